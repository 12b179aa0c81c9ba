//! Embedded mode: events computed from each committed mutation.

use std::collections::VecDeque;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use parking_lot::Mutex;

use super::dispatch::Dispatcher;
use super::kind::{CaseFileItemEvent, EventKind};
use crate::repo::{Mutation, MutationKind, MutationObserver, ObjectId, ObjectRecord, Repository};

/// Maps one mutation to the case-file-item events it raises.
pub fn map_mutation(m: &Mutation, root_folder_id: &ObjectId) -> Vec<CaseFileItemEvent> {
    let token = m.tokens.last().copied();
    let event = |kind: EventKind, item: &ObjectId, related: Option<&ObjectId>| {
        let ctx = m.context.get(item);
        CaseFileItemEvent {
            kind,
            case_id: ctx.and_then(|c| c.case_root.clone()),
            item_object_id: item.clone(),
            item_name: ctx.map(|c| c.name.clone()).unwrap_or_default(),
            related_object_id: related.cloned(),
            source_token: token,
        }
    };
    let parents =
        |r: &ObjectRecord| -> Vec<ObjectId> { r.parent_ids.iter().filter(|p| *p != root_folder_id).cloned().collect() };
    let mut out = Vec::new();
    match &m.kind {
        MutationKind::Created(r) if r.is_relationship() => {
            for end in [&r.source_id, &r.target_id].into_iter().flatten() {
                out.push(event(EventKind::AddReference, end, Some(&r.object_id)));
            }
        }
        MutationKind::Created(r) => {
            out.push(event(EventKind::Create, &r.object_id, None));
            for p in parents(r) {
                out.push(event(EventKind::AddChild, &p, Some(&r.object_id)));
            }
        }
        MutationKind::Updated { after, .. } if after.is_relationship() => {
            log::debug!(
                "update of relationship {} raises no case-file-item event",
                after.object_id
            );
        }
        MutationKind::Updated { before, after } => {
            let (old, new) = (parents(before), parents(after));
            let added: Vec<_> = new.iter().filter(|p| !old.contains(p)).collect();
            let removed: Vec<_> = old.iter().filter(|p| !new.contains(p)).collect();
            if (added.is_empty() && removed.is_empty()) || before.name != after.name {
                out.push(event(EventKind::Update, &after.object_id, None));
            }
            for p in added {
                out.push(event(EventKind::AddChild, p, Some(&after.object_id)));
            }
            for p in removed {
                out.push(event(EventKind::RemoveChild, p, Some(&after.object_id)));
            }
        }
        MutationKind::Deleted(r) if r.is_relationship() => {
            for end in [&r.source_id, &r.target_id].into_iter().flatten() {
                out.push(event(EventKind::RemoveReference, end, Some(&r.object_id)));
            }
        }
        MutationKind::Deleted(r) => {
            out.push(event(EventKind::Delete, &r.object_id, None));
            for p in parents(r) {
                out.push(event(EventKind::RemoveChild, &p, Some(&r.object_id)));
            }
        }
        MutationKind::CheckedIn { previous, current } => {
            out.push(event(EventKind::Replace, &current.object_id, Some(&previous.object_id)));
        }
        MutationKind::Security(r) => {
            log::debug!("security change on {} raises no case-file-item event", r.object_id);
        }
    }
    out
}

/// Observer that turns commits into events and dispatches them once the
/// repository lock is released.
///
/// Events are delivered in commit order from one thread at a time. A sink
/// that mutates the repository does not recurse: the resulting events are
/// queued and delivered after the current one.
pub struct EmbeddedEvents {
    dispatcher: Arc<Dispatcher>,
    queue: Mutex<VecDeque<CaseFileItemEvent>>,
    draining: AtomicBool,
}

impl EmbeddedEvents {
    pub fn new(dispatcher: Arc<Dispatcher>) -> Arc<Self> {
        Arc::new(EmbeddedEvents {
            dispatcher,
            queue: Mutex::new(VecDeque::new()),
            draining: AtomicBool::new(false),
        })
    }

    /// Creates the observer and registers it with `repo`.
    pub fn attach(repo: &Repository, dispatcher: Arc<Dispatcher>) -> Arc<Self> {
        let bus = Self::new(dispatcher);
        repo.add_observer(bus.clone());
        bus
    }

    pub fn dispatcher(&self) -> &Arc<Dispatcher> {
        &self.dispatcher
    }

    fn drain(&self) {
        loop {
            if self.draining.swap(true, Ordering::AcqRel) {
                return;
            }
            loop {
                let next = self.queue.lock().pop_front();
                let Some(event) = next else { break };
                self.dispatcher.dispatch(&event);
            }
            self.draining.store(false, Ordering::Release);
            if self.queue.lock().is_empty() {
                return;
            }
        }
    }
}

impl MutationObserver for EmbeddedEvents {
    fn on_commit(&self, mutations: &[Mutation], root_folder_id: &ObjectId) {
        let mut queue = self.queue.lock();
        for m in mutations {
            queue.extend(map_mutation(m, root_folder_id));
        }
    }

    fn after_commit(&self) {
        self.drain();
    }
}
