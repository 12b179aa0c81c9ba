//! Commit notifications for in-process (push-mode) consumers.

use std::collections::BTreeMap;

use super::object::{ObjectId, ObjectRecord};

/// What one logical mutation did to one object.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MutationKind {
    Created(ObjectRecord),
    Updated {
        before: ObjectRecord,
        after: ObjectRecord,
    },
    /// Last state of the deleted object.
    Deleted(ObjectRecord),
    /// A checkin: `previous` is the former latest version as it was filed.
    CheckedIn {
        previous: ObjectRecord,
        current: ObjectRecord,
    },
    Security(ObjectRecord),
}

/// Name and case membership of an object involved in a mutation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItemContext {
    pub name: String,
    /// Root folder of the case the object belongs to, if any.
    pub case_root: Option<ObjectId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mutation {
    /// Change-log tokens produced by this mutation (two for a checkin).
    pub tokens: Vec<u64>,
    pub kind: MutationKind,
    /// Context for the subject, its parents and its endpoints. An object
    /// that entered or left a case is attributed to that case.
    pub context: BTreeMap<ObjectId, ItemContext>,
}

impl Mutation {
    /// The object the mutation is about (the new version for a checkin).
    pub fn subject(&self) -> &ObjectRecord {
        match &self.kind {
            MutationKind::Created(r) | MutationKind::Deleted(r) | MutationKind::Security(r) => r,
            MutationKind::Updated { after, .. } => after,
            MutationKind::CheckedIn { current, .. } => current,
        }
    }
}

/// Receives every committed mutation.
///
/// `on_commit` runs while the repository's write lock is held and must not
/// call back into the repository; `after_commit` runs once the lock is
/// released and may.
pub trait MutationObserver: Send + Sync {
    fn on_commit(&self, mutations: &[Mutation], root_folder_id: &ObjectId);

    fn after_commit(&self) {}
}
