//! The case-file-item lifecycle: `create` makes an item Available, every
//! other event keeps it Available, and `delete` discards it for good.

use std::collections::HashMap;

use thiserror::Error;

use super::kind::{CaseFileItemEvent, EventKind};
use crate::repo::ObjectId;

pub use crate::casefile::ItemState as LifecycleState;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid transition: {kind} from {}", from.map_or("initial".to_string(), |s| format!("{s:?}")))]
pub struct InvalidTransition {
    pub from: Option<LifecycleState>,
    pub kind: EventKind,
}

/// `state` is `None` for an item that has not been created yet.
pub fn apply_transition(state: Option<LifecycleState>, kind: EventKind) -> Result<LifecycleState, InvalidTransition> {
    match (state, kind) {
        (None, EventKind::Create) => Ok(LifecycleState::Available),
        (Some(LifecycleState::Available), EventKind::Delete) => Ok(LifecycleState::Discarded),
        (Some(LifecycleState::Available), k) if k != EventKind::Create => Ok(LifecycleState::Available),
        (from, kind) => Err(InvalidTransition { from, kind }),
    }
}

/// Per-item lifecycle states. Versions replacing an item share its state:
/// a `replace` event aliases the new version to the item it replaces.
#[derive(Debug, Default, Clone)]
pub struct LifecycleTracker {
    states: HashMap<ObjectId, LifecycleState>,
    aliases: HashMap<ObjectId, ObjectId>,
}

impl LifecycleTracker {
    pub fn new() -> Self {
        Self::default()
    }

    /// The id under which the item's state is kept.
    pub fn canonical<'a>(&'a self, id: &'a ObjectId) -> &'a ObjectId {
        self.aliases.get(id).unwrap_or(id)
    }

    pub fn state(&self, id: &ObjectId) -> Option<LifecycleState> {
        self.states.get(self.canonical(id)).copied()
    }

    /// Folds one event into the item's state.
    pub fn apply(&mut self, event: &CaseFileItemEvent) -> Result<LifecycleState, InvalidTransition> {
        if event.kind == EventKind::Replace {
            if let Some(old) = &event.related_object_id {
                let canonical = self.canonical(old).clone();
                let next = apply_transition(self.states.get(&canonical).copied(), EventKind::Replace)?;
                self.states.insert(canonical.clone(), next);
                self.aliases.insert(event.item_object_id.clone(), canonical);
                return Ok(next);
            }
        }
        let canonical = self.canonical(&event.item_object_id).clone();
        let next = apply_transition(self.states.get(&canonical).copied(), event.kind)?;
        self.states.insert(canonical, next);
        Ok(next)
    }
}
