//! Integration mode: events derived from the change log.
//!
//! Change entries only say that an object was created, updated, deleted or
//! had its ACL changed. To tell a property update from a filing change the
//! deriver keeps a shadow copy of every object's name, parents and
//! endpoints, and diffs each UPDATED snapshot against it. A checkin shows
//! up as DELETED(old) immediately followed by CREATED(new) in the same
//! version series; the deriver holds back a document deletion until it
//! has seen the next entry (even across polls) so that it can report the
//! pair as one `replace`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::kind::{CaseFileItemEvent, EventKind};
use crate::repo::{BaseType, ChangeEvent, ChangeType, ObjectId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ShadowEntry {
    pub name: String,
    pub base_type: BaseType,
    #[serde(default)]
    pub parent_ids: Vec<ObjectId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_id: Option<ObjectId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_id: Option<ObjectId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version_series_id: Option<ObjectId>,
}

impl ShadowEntry {
    fn of(c: &ChangeEvent) -> Self {
        ShadowEntry {
            name: c.name_snapshot.clone(),
            base_type: c.base_type,
            parent_ids: c.parent_ids_snapshot.clone(),
            source_id: c.source_id_snapshot.clone(),
            target_id: c.target_id_snapshot.clone(),
            version_series_id: c.version_series_id.clone(),
        }
    }
}

/// Last known shape of every live object, as seen through the change log.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ShadowIndex {
    pub entries: BTreeMap<ObjectId, ShadowEntry>,
    /// Replaced versions mapped to the version that replaced them.
    #[serde(default)]
    pub aliases: BTreeMap<ObjectId, ObjectId>,
}

impl ShadowIndex {
    pub fn get(&self, id: &ObjectId) -> Option<&ShadowEntry> {
        self.entries.get(self.aliases.get(id).unwrap_or(id))
    }

    /// Root folder of the case `id` belongs to. Case roots are the folders
    /// without a parent, other than the repository root.
    pub fn case_of(&self, id: &ObjectId, repo_root: &ObjectId) -> Option<ObjectId> {
        let e = self.get(id)?;
        if e.base_type == BaseType::Relationship {
            let source = e.source_id.as_ref()?;
            return match self.get(source) {
                Some(s) if s.base_type != BaseType::Relationship => self.case_of(source, repo_root),
                _ => None,
            };
        }
        if e.base_type == BaseType::Folder && e.parent_ids.is_empty() {
            return (id != repo_root).then(|| id.clone());
        }
        e.parent_ids.iter().find_map(|p| self.case_of_folder(p, repo_root))
    }

    fn case_of_folder(&self, folder: &ObjectId, repo_root: &ObjectId) -> Option<ObjectId> {
        let mut cur = folder;
        loop {
            let e = self.entries.get(cur)?;
            match e.parent_ids.first() {
                Some(p) => cur = p,
                None => return (cur != repo_root).then(|| cur.clone()),
            }
        }
    }

    fn replace(&mut self, old: &ObjectId, new: ObjectId, entry: ShadowEntry) {
        self.entries.remove(old);
        for target in self.aliases.values_mut() {
            if target == old {
                *target = new.clone();
            }
        }
        self.aliases.insert(old.clone(), new.clone());
        self.entries.insert(new, entry);
    }

    fn remove(&mut self, id: &ObjectId) {
        self.entries.remove(id);
        self.aliases.retain(|_, target| target != id);
    }
}

/// Everything a deriver needs to resume where it stopped.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DeriverState {
    /// Highest token consumed; older entries are ignored.
    pub high_water: u64,
    pub shadow: ShadowIndex,
    /// A document deletion waiting to see whether a checkin follows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pending_delete: Option<ChangeEvent>,
    /// Entries that could not be turned into events.
    #[serde(default)]
    pub skipped: u64,
}

#[derive(Debug, Clone)]
pub struct Deriver {
    repo_root: ObjectId,
    state: DeriverState,
}

impl Deriver {
    pub fn new(repo_root: ObjectId) -> Self {
        Self::resume(repo_root, DeriverState::default())
    }

    pub fn resume(repo_root: ObjectId, state: DeriverState) -> Self {
        Deriver { repo_root, state }
    }

    pub fn state(&self) -> &DeriverState {
        &self.state
    }

    pub fn high_water(&self) -> u64 {
        self.state.high_water
    }

    pub fn skipped(&self) -> u64 {
        self.state.skipped
    }

    pub fn has_pending(&self) -> bool {
        self.state.pending_delete.is_some()
    }

    /// Derives events from token-ascending changes. Entries at or below
    /// the high-water token are ignored, so re-reading a page is harmless.
    pub fn derive(&mut self, changes: &[ChangeEvent]) -> Vec<CaseFileItemEvent> {
        let mut out = Vec::new();
        for c in changes {
            if c.token <= self.state.high_water {
                continue;
            }
            self.state.high_water = c.token;
            if let Some(pending) = self.state.pending_delete.take() {
                if is_checkin_pair(&pending, c) {
                    self.emit_replace(&pending, c, &mut out);
                    continue;
                }
                self.emit_delete(&pending, &mut out);
            }
            self.derive_one(c, &mut out);
        }
        out
    }

    /// Emits a held-back deletion as a plain delete. Call when no further
    /// changes are available.
    pub fn flush(&mut self) -> Vec<CaseFileItemEvent> {
        let mut out = Vec::new();
        if let Some(pending) = self.state.pending_delete.take() {
            self.emit_delete(&pending, &mut out);
        }
        out
    }

    fn event(&self, kind: EventKind, item: &ObjectId, related: Option<&ObjectId>, token: u64) -> CaseFileItemEvent {
        CaseFileItemEvent {
            kind,
            case_id: self.state.shadow.case_of(item, &self.repo_root),
            item_object_id: item.clone(),
            item_name: self.state.shadow.get(item).map(|e| e.name.clone()).unwrap_or_default(),
            related_object_id: related.cloned(),
            source_token: Some(token),
        }
    }

    fn parents<'a>(&'a self, ids: &'a [ObjectId]) -> impl Iterator<Item = &'a ObjectId> + 'a {
        ids.iter().filter(move |p| **p != self.repo_root)
    }

    fn derive_one(&mut self, c: &ChangeEvent, out: &mut Vec<CaseFileItemEvent>) {
        let id = &c.object_id;
        let is_rel = c.base_type == BaseType::Relationship;
        match c.change_type {
            ChangeType::Created => {
                self.state.shadow.entries.insert(id.clone(), ShadowEntry::of(c));
                if is_rel {
                    for end in [&c.source_id_snapshot, &c.target_id_snapshot].into_iter().flatten() {
                        out.push(self.event(EventKind::AddReference, end, Some(id), c.token));
                    }
                } else {
                    out.push(self.event(EventKind::Create, id, None, c.token));
                    for p in self.parents(&c.parent_ids_snapshot) {
                        out.push(self.event(EventKind::AddChild, p, Some(id), c.token));
                    }
                }
            }
            ChangeType::Updated if is_rel => {
                self.state.shadow.entries.insert(id.clone(), ShadowEntry::of(c));
                log::debug!("change {}: update of relationship {id} raises no event", c.token);
            }
            ChangeType::Updated => {
                let Some(before) = self.state.shadow.get(id).cloned() else {
                    log::warn!("change {}: no shadow entry for {id}; skipped", c.token);
                    self.state.skipped += 1;
                    self.state.shadow.entries.insert(id.clone(), ShadowEntry::of(c));
                    return;
                };
                let case_before = self.state.shadow.case_of(id, &self.repo_root);
                self.state.shadow.entries.insert(id.clone(), ShadowEntry::of(c));
                let old: Vec<_> = self.parents(&before.parent_ids).cloned().collect();
                let new: Vec<_> = self.parents(&c.parent_ids_snapshot).cloned().collect();
                let added: Vec<_> = new.iter().filter(|p| !old.contains(p)).collect();
                let removed: Vec<_> = old.iter().filter(|p| !new.contains(p)).collect();
                if (added.is_empty() && removed.is_empty()) || before.name != c.name_snapshot {
                    let mut e = self.event(EventKind::Update, id, None, c.token);
                    e.case_id = e.case_id.or(case_before);
                    out.push(e);
                }
                for p in added {
                    out.push(self.event(EventKind::AddChild, p, Some(id), c.token));
                }
                for p in removed {
                    out.push(self.event(EventKind::RemoveChild, p, Some(id), c.token));
                }
            }
            ChangeType::Deleted if c.base_type == BaseType::Document => {
                self.state.pending_delete = Some(c.clone());
            }
            ChangeType::Deleted => self.emit_delete(c, out),
            ChangeType::Security => {
                log::debug!("change {}: security change on {id} raises no event", c.token);
            }
        }
    }

    fn emit_delete(&mut self, c: &ChangeEvent, out: &mut Vec<CaseFileItemEvent>) {
        let id = &c.object_id;
        if self.state.shadow.get(id).is_none() {
            // The snapshot carries everything needed; learn it so the
            // events can be routed.
            self.state.shadow.entries.insert(id.clone(), ShadowEntry::of(c));
        }
        if c.base_type == BaseType::Relationship {
            for end in [&c.source_id_snapshot, &c.target_id_snapshot].into_iter().flatten() {
                out.push(self.event(EventKind::RemoveReference, end, Some(id), c.token));
            }
        } else {
            out.push(self.event(EventKind::Delete, id, None, c.token));
            for p in self.parents(&c.parent_ids_snapshot) {
                out.push(self.event(EventKind::RemoveChild, p, Some(id), c.token));
            }
        }
        self.state.shadow.remove(id);
    }

    fn emit_replace(&mut self, deleted: &ChangeEvent, created: &ChangeEvent, out: &mut Vec<CaseFileItemEvent>) {
        self.state
            .shadow
            .replace(&deleted.object_id, created.object_id.clone(), ShadowEntry::of(created));
        out.push(self.event(
            EventKind::Replace,
            &created.object_id,
            Some(&deleted.object_id),
            created.token,
        ));
    }
}

/// Whether `created` installs a new version of the document `deleted`
/// removed: same version series when the log reports one, otherwise the
/// same name and filing.
fn is_checkin_pair(deleted: &ChangeEvent, created: &ChangeEvent) -> bool {
    if created.change_type != ChangeType::Created || created.base_type != deleted.base_type {
        return false;
    }
    match (&deleted.version_series_id, &created.version_series_id) {
        (Some(a), Some(b)) => a == b,
        _ => {
            let mut p1 = deleted.parent_ids_snapshot.clone();
            let mut p2 = created.parent_ids_snapshot.clone();
            p1.sort();
            p2.sort();
            deleted.name_snapshot == created.name_snapshot && p1 == p2
        }
    }
}
