mod common;

use std::collections::BTreeMap;
use std::sync::Arc;

use casefs_core::casefile::CaseFiles;
use casefs_core::events::{
    apply_transition, CaseFileItemEvent, Deriver, DeriverState, Dispatcher, EmbeddedEvents, EventKind, LifecycleState,
    LifecycleTracker, OnPartSubscription, Selector,
};
use casefs_core::repo::{
    Ace, ChangeEvent, ChangeType, LocalSession, NewObject, ObjectId, Permission, PropertyValue, Repository, DESCRIPTION,
};
use common::{apply_op, scripted_repo, ME};
use parking_lot::Mutex;
use proptest::prelude::*;

fn key(e: &CaseFileItemEvent) -> (String, EventKind, Option<String>, Option<String>) {
    (
        e.item_object_id.to_string(),
        e.kind,
        e.related_object_id.as_ref().map(ToString::to_string),
        e.case_id.as_ref().map(ToString::to_string),
    )
}

fn sorted(events: &[CaseFileItemEvent]) -> Vec<(String, EventKind, Option<String>, Option<String>)> {
    let mut v: Vec<_> = events.iter().map(key).collect();
    v.sort();
    v
}

fn derive_all(repo: &Repository, page: usize) -> (Vec<CaseFileItemEvent>, Deriver) {
    let mut deriver = Deriver::new(repo.root_folder_id());
    let mut out = Vec::new();
    let mut token = 0;
    loop {
        let p = repo.get_content_changes(token, page).unwrap();
        if p.changes.is_empty() {
            out.extend(deriver.flush());
            return (out, deriver);
        }
        token = p.next_token;
        out.extend(deriver.derive(&p.changes));
    }
}

fn kinds(events: &[CaseFileItemEvent]) -> Vec<(EventKind, ObjectId)> {
    events.iter().map(|e| (e.kind, e.item_object_id.clone())).collect()
}

#[test]
fn push_examples() {
    let (repo, rec) = scripted_repo();
    let case = repo.case_roots()[0].object_id.clone();
    let incoming = repo
        .create_object(ME, NewObject::folder("Incoming documents").in_folder(case.clone()))
        .unwrap()
        .object_id;
    let b = repo
        .create_object(ME, NewObject::document("picture B").in_folder(incoming.clone()))
        .unwrap()
        .object_id;
    rec.0.lock().clear();
    let c = repo
        .create_object(ME, NewObject::document("document C").in_folder(incoming.clone()))
        .unwrap()
        .object_id;
    assert_eq!(
        kinds(&rec.0.lock()),
        [(EventKind::Create, c.clone()), (EventKind::AddChild, incoming.clone())]
    );
    assert_eq!(rec.0.lock()[1].related_object_id.as_ref(), Some(&c));
    assert_eq!(rec.0.lock()[0].case_id.as_ref(), Some(&case));

    rec.0.lock().clear();
    let rel = repo
        .create_object(ME, NewObject::relationship("mentions", c.clone(), b.clone()))
        .unwrap()
        .object_id;
    let events = rec.0.lock().clone();
    assert_eq!(
        kinds(&events),
        [
            (EventKind::AddReference, c.clone()),
            (EventKind::AddReference, b.clone())
        ]
    );
    assert!(events.iter().all(|e| e.related_object_id.as_ref() == Some(&rel)));

    rec.0.lock().clear();
    let v2 = repo.checkin(ME, &c, None, BTreeMap::new()).unwrap().object_id;
    let events = rec.0.lock().clone();
    assert_eq!(kinds(&events), [(EventKind::Replace, v2)]);
    assert_eq!(events[0].related_object_id.as_ref(), Some(&c));

    rec.0.lock().clear();
    repo.apply_acl(ME, &b, vec![Ace::new("w", [Permission::Read])]).unwrap();
    assert!(rec.0.lock().is_empty());
}

fn change(token: u64, kind: ChangeType, id: &str, name: &str, parents: &[&str]) -> ChangeEvent {
    serde_json::from_value(serde_json::json!({
        "token": token,
        "changeType": kind,
        "objectId": id,
        "baseType": "cmis:document",
        "name": name,
        "parentIds": parents,
        "timestamp": "2024-01-01T00:00:00.000Z",
    }))
    .unwrap()
}

#[test]
fn derive_examples() {
    let root: ObjectId = "root".into();
    let mut d = Deriver::new(root.clone());
    let created = d.derive(&[change(1, ChangeType::Created, "d1", "doc", &["case"])]);
    assert_eq!(
        kinds(&created),
        [(EventKind::Create, "d1".into()), (EventKind::AddChild, "case".into())]
    );

    let replaced = d.derive(&[
        change(2, ChangeType::Deleted, "d1", "doc", &["case"]),
        change(3, ChangeType::Created, "d2", "doc", &["case"]),
    ]);
    assert_eq!(kinds(&replaced), [(EventKind::Replace, "d2".into())]);

    assert!(d
        .derive(&[change(4, ChangeType::Security, "d2", "doc", &["case"])])
        .is_empty());

    // Re-reading old tokens yields nothing.
    assert!(d
        .derive(&[change(1, ChangeType::Created, "d1", "doc", &["case"])])
        .is_empty());

    // An update for an object never seen is skipped and counted.
    assert!(d
        .derive(&[change(5, ChangeType::Updated, "ghost", "g", &[])])
        .is_empty());
    assert_eq!(d.skipped(), 1);

    // A deletion split from its creation by a page boundary is still a replace.
    let held = d.derive(&[change(6, ChangeType::Deleted, "d2", "doc", &["case"])]);
    assert!(held.is_empty() && d.has_pending());
    let state: DeriverState = serde_json::from_str(&serde_json::to_string(d.state()).unwrap()).unwrap();
    let mut resumed = Deriver::resume(root, state);
    let after = resumed.derive(&[change(7, ChangeType::Created, "d3", "doc", &["case"])]);
    assert_eq!(kinds(&after), [(EventKind::Replace, "d3".into())]);

    // A deletion followed by something else is a plain delete.
    let del = resumed.derive(&[
        change(8, ChangeType::Deleted, "d3", "doc", &["case"]),
        change(9, ChangeType::Created, "x", "other", &["case"]),
    ]);
    assert_eq!(
        kinds(&del),
        [
            (EventKind::Delete, "d3".into()),
            (EventKind::RemoveChild, "case".into()),
            (EventKind::Create, "x".into()),
            (EventKind::AddChild, "case".into()),
        ]
    );
    let last = resumed.derive(&[change(10, ChangeType::Deleted, "x", "other", &["case"])]);
    assert!(last.is_empty());
    assert_eq!(kinds(&resumed.flush()).len(), 2);
}

#[test]
fn filing_changes_derive_like_push() {
    let (repo, rec) = scripted_repo();
    let case = repo.case_roots()[0].object_id.clone();
    let f1 = repo
        .create_object(ME, NewObject::folder("f1").in_folder(case.clone()))
        .unwrap()
        .object_id;
    let d = repo
        .create_object(ME, NewObject::document("d").in_folder(case.clone()))
        .unwrap()
        .object_id;
    repo.file_in(ME, &d, &f1).unwrap();
    repo.unfile(ME, &d, &case).unwrap();
    repo.update_properties(
        ME,
        &d,
        BTreeMap::from([(DESCRIPTION.into(), PropertyValue::string("x"))]),
    )
    .unwrap();
    let (derived, _) = derive_all(&repo, 2);
    assert_eq!(sorted(&derived), sorted(&rec.0.lock()));
    let tail: Vec<_> = kinds(&derived).into_iter().rev().take(3).collect();
    assert_eq!(
        tail,
        [
            (EventKind::Update, d.clone()),
            (EventKind::RemoveChild, case.clone()),
            (EventKind::AddChild, f1.clone()),
        ]
    );
}

#[test]
fn lifecycle_transitions() {
    use LifecycleState::*;
    assert_eq!(apply_transition(None, EventKind::Create), Ok(Available));
    assert_eq!(apply_transition(Some(Available), EventKind::Delete), Ok(Discarded));
    assert_eq!(apply_transition(Some(Available), EventKind::Update), Ok(Available));
    assert!(apply_transition(Some(Discarded), EventKind::Update).is_err());
    assert!(apply_transition(None, EventKind::Update).is_err());
    assert!(apply_transition(Some(Available), EventKind::Create).is_err());
}

#[test]
fn embedded_dispatch_and_reentrancy() {
    let repo = Arc::new(Repository::in_memory());
    let dispatcher = Arc::new(Dispatcher::new());
    EmbeddedEvents::attach(&repo, dispatcher.clone());
    let files = CaseFiles::new(LocalSession::new(repo.clone(), "worker"));
    let case = files.create_case_file("project XX", BTreeMap::new()).unwrap();
    let data_a = files
        .create_document_item(&case, "Data A", "cmis:document", BTreeMap::new(), None, None)
        .unwrap();
    let a_id = data_a.object_id.clone().unwrap();

    let seen = Arc::new(Mutex::new(Vec::new()));
    {
        let seen = seen.clone();
        dispatcher
            .subscribe(
                OnPartSubscription::new(Selector::Name("Data A".into()), [EventKind::Update], move |e| {
                    seen.lock().push(("update", e.item_object_id.clone()))
                })
                .in_case(case.case_id.clone()),
            )
            .unwrap();
    }
    {
        let seen = seen.clone();
        dispatcher
            .subscribe(OnPartSubscription::new(
                Selector::Object(a_id.clone()),
                [EventKind::Delete],
                move |e| seen.lock().push(("delete", e.item_object_id.clone())),
            ))
            .unwrap();
    }
    // A sink that mutates the repository: its events are queued, not nested.
    {
        let repo = repo.clone();
        let case_root = case.root_folder_object_id.clone();
        let seen = seen.clone();
        dispatcher
            .subscribe(OnPartSubscription::new(
                Selector::Name("trigger".into()),
                [EventKind::Create],
                move |_| {
                    seen.lock().push(("trigger", ObjectId::new("-")));
                    repo.create_object("sentry", NewObject::document("reaction").in_folder(case_root.clone()))
                        .unwrap();
                    seen.lock().push(("trigger done", ObjectId::new("-")));
                },
            ))
            .unwrap();
    }
    {
        let seen = seen.clone();
        dispatcher
            .subscribe(OnPartSubscription::new(
                Selector::Name("reaction".into()),
                [EventKind::Create],
                move |_| seen.lock().push(("reaction", ObjectId::new("-"))),
            ))
            .unwrap();
    }

    repo.update_properties(
        "w",
        &a_id,
        BTreeMap::from([(DESCRIPTION.into(), PropertyValue::string("x"))]),
    )
    .unwrap();
    repo.apply_acl("w", &a_id, vec![Ace::new("w", [Permission::Write])])
        .unwrap();
    repo.create_object(
        "w",
        NewObject::document("trigger").in_folder(case.root_folder_object_id.clone()),
    )
    .unwrap();
    repo.delete_object("w", &a_id).unwrap();

    let got: Vec<_> = seen.lock().iter().map(|(t, _)| *t).collect();
    assert_eq!(got, ["update", "trigger", "trigger done", "reaction", "delete"]);
    assert_eq!(dispatcher.state(&a_id), Some(LifecycleState::Discarded));
    assert!(dispatcher.violations().is_empty());
}

fn fold_lifecycle(events: &[CaseFileItemEvent]) -> usize {
    let mut t = LifecycleTracker::new();
    events.iter().filter(|e| t.apply(e).is_err()).count()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn modes_agree(ops in prop::collection::vec((0u8..12, any::<u8>(), any::<u8>()), 20..60), page in 1usize..7) {
        let (repo, rec) = scripted_repo();
        for (op, a, b) in ops {
            apply_op(&repo, op, a, b);
        }
        let pushed = rec.0.lock().clone();
        let (derived, deriver) = derive_all(&repo, page);
        prop_assert_eq!(sorted(&derived), sorted(&pushed));
        prop_assert_eq!(deriver.skipped(), 0);
        prop_assert_eq!(fold_lifecycle(&pushed), 0);
        prop_assert_eq!(fold_lifecycle(&derived), 0);
    }

    #[test]
    fn resumed_derivation_is_exactly_once(ops in prop::collection::vec((0u8..12, any::<u8>(), any::<u8>()), 20..40), cut in 0usize..200) {
        let (repo, _) = scripted_repo();
        for (op, a, b) in ops {
            apply_op(&repo, op, a, b);
        }
        let log = repo.change_log();
        let cut = cut % (log.len() + 1);
        let (whole, _) = derive_all(&repo, usize::MAX);

        // Derive up to the cut, checkpoint, then resume and re-read an
        // overlapping window as a restarted poller would.
        let mut first = Deriver::new(repo.root_folder_id());
        let mut out = first.derive(&log[..cut]);
        let saved = serde_json::to_string(first.state()).unwrap();
        let mut second = Deriver::resume(repo.root_folder_id(), serde_json::from_str(&saved).unwrap());
        out.extend(second.derive(&log[cut.saturating_sub(3)..]));
        out.extend(second.flush());
        prop_assert_eq!(out, whole);
    }

    #[test]
    fn filing_is_consistent_and_replayable(ops in prop::collection::vec((0u8..12, any::<u8>(), any::<u8>()), 20..60)) {
        let (repo, _) = scripted_repo();
        for (op, a, b) in ops {
            apply_op(&repo, op, a, b);
        }
        let latest = repo.latest_objects();
        for (id, rec) in &latest {
            for p in &rec.parent_ids {
                let kids = repo.get_children(p).unwrap();
                prop_assert!(kids.iter().any(|k| &k.object_id == id));
            }
            if rec.is_folder() {
                for k in repo.get_children(id).unwrap() {
                    prop_assert!(k.parent_ids.contains(id));
                }
            }
            let versions = repo.versions(id).unwrap();
            prop_assert_eq!(versions.iter().filter(|v| v.is_latest_version).count(), 1);
            let majors: Vec<_> = versions.iter().map(|v| v.major_version()).collect();
            prop_assert!(majors.windows(2).all(|w| w[0] < w[1]));
        }
        let log = repo.change_log();
        prop_assert!(log.windows(2).all(|w| w[0].token < w[1].token));
        let replayed = Repository::from_records(repo.journal()).unwrap();
        prop_assert_eq!(replayed.latest_objects(), latest);
    }
}
