//! Random mutation scripts shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use casefs_core::events::{map_mutation, CaseFileItemEvent};
use casefs_core::repo::{
    Ace, ContentStream, DataKind, Mutation, MutationObserver, NewObject, ObjectId, ObjectRecord, Permission,
    PropertyValue, Repository, Scalar, CASE_FILE_TYPE, DESCRIPTION, NAME_PROPERTY, SECONDARY_TYPE_IDS,
};
use parking_lot::Mutex;

pub const ME: &str = "script";

/// Collects push-mode events straight from the commit hook.
#[derive(Default)]
pub struct Recorder(pub Mutex<Vec<CaseFileItemEvent>>);

impl MutationObserver for Recorder {
    fn on_commit(&self, mutations: &[Mutation], root: &ObjectId) {
        let mut out = self.0.lock();
        for m in mutations {
            out.extend(map_mutation(m, root));
        }
    }
}

fn pick<T>(items: &[T], n: u8) -> Option<&T> {
    (!items.is_empty()).then(|| &items[n as usize % items.len()])
}

/// Applies one operation chosen by `op` with arguments `a`, `b`. Failing
/// operations (duplicate names, non-empty folders, ...) are ignored.
pub fn apply_op(repo: &Repository, op: u8, a: u8, b: u8) {
    let live: Vec<ObjectRecord> = repo
        .latest_objects()
        .into_values()
        .filter(|r| r.object_id != repo.root_folder_id())
        .collect();
    let folders: Vec<_> = live.iter().filter(|r| r.is_folder()).collect();
    let docs: Vec<_> = live
        .iter()
        .filter(|r| r.base_type.type_id() == "cmis:document")
        .collect();
    let filed: Vec<_> = live.iter().filter(|r| !r.is_relationship()).collect();
    let names = ["a", "b", "c", "report"];
    let name = names[b as usize % names.len()];
    let _ = match op % 12 {
        0 => {
            let marker = PropertyValue::multi(DataKind::Id, vec![Scalar::Id(CASE_FILE_TYPE.into())]).unwrap();
            repo.create_object(
                ME,
                NewObject::folder(format!("case {a}")).with_property(SECONDARY_TYPE_IDS, marker),
            )
            .map(|_| ())
        }
        1 | 2 => match pick(&folders, a) {
            Some(f) => repo
                .create_object(ME, NewObject::document(name).in_folder(f.object_id.clone()))
                .map(|_| ()),
            None => Ok(()),
        },
        3 => match pick(&folders, a) {
            Some(f) => repo
                .create_object(ME, NewObject::folder(format!("f{b}")).in_folder(f.object_id.clone()))
                .map(|_| ()),
            None => Ok(()),
        },
        4 => match (pick(&filed, a), pick(&filed, b)) {
            (Some(s), Some(t)) => repo
                .create_object(
                    ME,
                    NewObject::relationship("rel", s.object_id.clone(), t.object_id.clone()),
                )
                .map(|_| ()),
            _ => Ok(()),
        },
        5 => match pick(&live, a) {
            Some(o) => repo
                .update_properties(
                    ME,
                    &o.object_id,
                    BTreeMap::from([(DESCRIPTION.to_string(), PropertyValue::string(format!("d{b}")))]),
                )
                .map(|_| ()),
            None => Ok(()),
        },
        6 => match pick(&filed, a) {
            Some(o) => repo
                .update_properties(
                    ME,
                    &o.object_id,
                    BTreeMap::from([(NAME_PROPERTY.to_string(), PropertyValue::string(name))]),
                )
                .map(|_| ()),
            None => Ok(()),
        },
        7 => match (pick(&docs, a), pick(&folders, b)) {
            (Some(d), Some(f)) => repo.file_in(ME, &d.object_id, &f.object_id).map(|_| ()),
            _ => Ok(()),
        },
        8 => match pick(&docs, a) {
            Some(d) => match pick(&d.parent_ids, b) {
                Some(p) => repo.unfile(ME, &d.object_id, p).map(|_| ()),
                None => Ok(()),
            },
            None => Ok(()),
        },
        9 => match pick(&docs, a) {
            Some(d) if b.is_multiple_of(2) => repo
                .checkin(
                    ME,
                    &d.object_id,
                    Some(ContentStream::new("text/plain", vec![b])),
                    BTreeMap::new(),
                )
                .map(|_| ()),
            Some(d) => repo
                .set_content(ME, &d.object_id, ContentStream::new("text/plain", vec![b]))
                .map(|_| ()),
            None => Ok(()),
        },
        10 => match pick(&live, a) {
            Some(o) => repo.delete_object(ME, &o.object_id),
            None => Ok(()),
        },
        _ => match pick(&live, a) {
            Some(o) => repo
                .apply_acl(ME, &o.object_id, vec![Ace::new(format!("p{b}"), [Permission::Read])])
                .map(|_| ()),
            None => Ok(()),
        },
    };
}

/// A repository with one case already created, recording push events.
pub fn scripted_repo() -> (Repository, Arc<Recorder>) {
    let repo = Repository::in_memory();
    let recorder = Arc::new(Recorder::default());
    repo.add_observer(recorder.clone());
    apply_op(&repo, 0, 0, 0);
    (repo, recorder)
}
