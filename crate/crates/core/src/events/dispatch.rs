//! onPart subscriptions and event dispatch.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::kind::{CaseFileItemEvent, EventKind};
use super::lifecycle::{InvalidTransition, LifecycleState, LifecycleTracker};
use crate::repo::ObjectId;

pub type Sink = Arc<dyn Fn(&CaseFileItemEvent) + Send + Sync>;

/// Which item a subscription listens to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Selector {
    /// Any item with this name.
    Name(String),
    /// This item, across all of its versions.
    Object(ObjectId),
}

#[derive(Clone)]
pub struct OnPartSubscription {
    /// Restricts the subscription to one case when set.
    pub case_id: Option<ObjectId>,
    pub selector: Selector,
    pub kinds: BTreeSet<EventKind>,
    pub sink: Sink,
}

impl OnPartSubscription {
    pub fn new(
        selector: Selector,
        kinds: impl IntoIterator<Item = EventKind>,
        sink: impl Fn(&CaseFileItemEvent) + Send + Sync + 'static,
    ) -> Self {
        OnPartSubscription {
            case_id: None,
            selector,
            kinds: kinds.into_iter().collect(),
            sink: Arc::new(sink),
        }
    }

    pub fn in_case(mut self, case_id: ObjectId) -> Self {
        self.case_id = Some(case_id);
        self
    }
}

impl fmt::Debug for OnPartSubscription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OnPartSubscription")
            .field("case_id", &self.case_id)
            .field("selector", &self.selector)
            .field("kinds", &self.kinds)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SubscriptionId(pub u64);

impl fmt::Display for SubscriptionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "sub-{}", self.0)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SubscribeError {
    #[error("a subscription needs at least one event kind")]
    NoKinds,
}

/// Delivers events to matching subscriptions in registration order and
/// tracks every item's lifecycle state.
#[derive(Default)]
pub struct Dispatcher {
    subscriptions: RwLock<Vec<(SubscriptionId, OnPartSubscription)>>,
    next_id: AtomicU64,
    lifecycle: Mutex<LifecycleTracker>,
    violations: Mutex<Vec<(CaseFileItemEvent, InvalidTransition)>>,
}

impl fmt::Debug for Dispatcher {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Dispatcher")
            .field("subscriptions", &self.subscriptions.read().len())
            .finish_non_exhaustive()
    }
}

impl Dispatcher {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn subscribe(&self, sub: OnPartSubscription) -> Result<SubscriptionId, SubscribeError> {
        if sub.kinds.is_empty() {
            return Err(SubscribeError::NoKinds);
        }
        let id = SubscriptionId(self.next_id.fetch_add(1, Ordering::Relaxed));
        self.subscriptions.write().push((id, sub));
        Ok(id)
    }

    /// Removes a subscription; returns whether it existed.
    pub fn unsubscribe(&self, id: SubscriptionId) -> bool {
        let mut subs = self.subscriptions.write();
        let before = subs.len();
        subs.retain(|(s, _)| *s != id);
        let removed = subs.len() != before;
        if !removed {
            log::warn!("unsubscribe: no subscription {id}");
        }
        removed
    }

    /// Updates the item's lifecycle, then runs every matching sink.
    /// Returns the number of sinks run.
    pub fn dispatch(&self, event: &CaseFileItemEvent) -> usize {
        let canonical = {
            let mut lifecycle = self.lifecycle.lock();
            if let Err(e) = lifecycle.apply(event) {
                log::warn!("{event}: {e}");
                self.violations.lock().push((event.clone(), e));
            }
            lifecycle.canonical(&event.item_object_id).clone()
        };
        let sinks: Vec<Sink> = self
            .subscriptions
            .read()
            .iter()
            .filter(|(_, s)| self.matches(s, event, &canonical))
            .map(|(_, s)| s.sink.clone())
            .collect();
        for sink in &sinks {
            sink(event);
        }
        sinks.len()
    }

    fn matches(&self, sub: &OnPartSubscription, event: &CaseFileItemEvent, canonical: &ObjectId) -> bool {
        if !sub.kinds.contains(&event.kind) {
            return false;
        }
        if sub.case_id.is_some() && sub.case_id != event.case_id {
            return false;
        }
        match &sub.selector {
            Selector::Name(n) => *n == event.item_name,
            Selector::Object(id) => id == &event.item_object_id || self.lifecycle.lock().canonical(id) == canonical,
        }
    }

    pub fn state(&self, id: &ObjectId) -> Option<LifecycleState> {
        self.lifecycle.lock().state(id)
    }

    /// Events whose lifecycle transition was invalid, in arrival order.
    pub fn violations(&self) -> Vec<(CaseFileItemEvent, InvalidTransition)> {
        self.violations.lock().clone()
    }
}
