use std::collections::BTreeMap;

use casefs_core::repo::{
    Ace, BaseType, ChangeType, ContentStream, DataKind, ErrorKind, JournalRecord, NewObject, ObjectId, Permission,
    PropertyDefinition, PropertyValue, RepoError, Repository, TypeDefinition, NAME_PROPERTY,
};

const ME: &str = "tester";

fn claim_doc(repo: &Repository) {
    repo.create_type(
        TypeDefinition::new("claimDoc", BaseType::Document)
            .parent("cmis:document")
            .property(PropertyDefinition::new("claimNo", DataKind::String))
            .property(PropertyDefinition::new("status", DataKind::String)),
    )
    .unwrap();
}

fn folder(repo: &Repository, name: &str, parent: Option<&ObjectId>) -> ObjectId {
    let mut new = NewObject::folder(name);
    new.parent_id = parent.cloned();
    repo.create_object(ME, new).unwrap().object_id
}

fn doc(repo: &Repository, name: &str, parent: &ObjectId) -> ObjectId {
    repo.create_object(ME, NewObject::document(name).in_folder(parent.clone()))
        .unwrap()
        .object_id
}

fn tokens(repo: &Repository) -> Vec<(ChangeType, ObjectId)> {
    repo.change_log()
        .into_iter()
        .map(|c| (c.change_type, c.object_id))
        .collect()
}

#[test]
fn type_creation_and_inheritance() {
    let repo = Repository::in_memory();
    claim_doc(&repo);
    repo.create_type(TypeDefinition::new("invoiceDoc", BaseType::Document).parent("claimDoc"))
        .unwrap();

    // Oracle: walk the parent chain by hand and union own properties.
    let mut expected = Vec::new();
    let mut cur = Some("invoiceDoc".to_string());
    while let Some(t) = cur {
        let def = repo.get_type(&t).unwrap();
        expected.extend(def.property_defs.iter().map(|p| p.property_id.clone()));
        cur = def.parent_type_id.clone();
    }
    expected.sort();
    let mut effective: Vec<_> = repo
        .effective_properties("invoiceDoc")
        .unwrap()
        .into_iter()
        .map(|p| p.property_id)
        .collect();
    effective.sort();
    assert_eq!(effective, expected);
    assert!(effective.contains(&"claimNo".to_string()));

    let err = repo
        .create_type(TypeDefinition::new("bad", BaseType::Folder).parent("claimDoc"))
        .unwrap_err();
    assert!(matches!(err, RepoError::BaseMismatch { .. }));
    assert!(matches!(
        repo.create_type(TypeDefinition::new("claimDoc", BaseType::Document)),
        Err(RepoError::DuplicateType(_))
    ));
    assert!(matches!(
        repo.create_type(TypeDefinition::new("x", BaseType::Document).parent("nope")),
        Err(RepoError::UnknownParentType(_))
    ));
    assert!(matches!(
        repo.create_type(
            TypeDefinition::new("y", BaseType::Document)
                .parent("claimDoc")
                .property(PropertyDefinition::new("claimNo", DataKind::Integer))
        ),
        Err(RepoError::DuplicateProperty(_))
    ));
}

#[test]
fn create_read_and_children() {
    let repo = Repository::in_memory();
    let case = folder(&repo, "project XX", None);
    let data_a = doc(&repo, "Data A", &case);
    let incoming = folder(&repo, "Incoming documents", Some(&case));
    let pic = repo
        .create_object(
            ME,
            NewObject::document("picture B")
                .in_folder(incoming.clone())
                .with_content(ContentStream::new("image/png", vec![1, 2, 3])),
        )
        .unwrap();
    let c = doc(&repo, "document C", &incoming);
    let rel = repo
        .create_object(
            ME,
            NewObject::relationship("mentions", c.clone(), pic.object_id.clone()),
        )
        .unwrap();

    let a = repo.get_object(&data_a).unwrap();
    assert_eq!(a.name, "Data A");
    assert!(a.content.is_none());
    assert_eq!(a.version_label, "1.0");
    assert!(a.is_latest_version);
    assert_eq!(pic.content.as_ref().unwrap().length, 3);
    assert_eq!(repo.get_content(&pic.object_id).unwrap().unwrap().bytes, vec![1, 2, 3]);
    assert_eq!(rel.source_id.as_ref(), Some(&c));
    assert!(rel.parent_ids.is_empty());

    let names: Vec<_> = repo
        .get_children(&incoming)
        .unwrap()
        .into_iter()
        .map(|r| r.name)
        .collect();
    assert_eq!(names, ["picture B", "document C"]);
    let empty = folder(&repo, "empty", Some(&case));
    assert!(repo.get_children(&empty).unwrap().is_empty());
    assert!(matches!(repo.get_children(&data_a), Err(RepoError::NotAFolder(_))));
    assert!(matches!(
        repo.get_object(&"obj-9999".into()),
        Err(RepoError::NotFound(_))
    ));

    let err = repo
        .create_object(ME, NewObject::relationship("r", c.clone(), "obj-4242".into()))
        .unwrap_err();
    assert!(matches!(err, RepoError::DanglingEndpoint(_)));
    assert_eq!(err.kind(), ErrorKind::Validation);
    assert!(matches!(
        repo.create_object(ME, NewObject::document("x").in_folder(data_a.clone())),
        Err(RepoError::NotAFolder(_))
    ));
    assert!(matches!(
        repo.create_object(ME, NewObject::new("nope", "x")),
        Err(RepoError::TypeNotFound(_))
    ));
}

#[test]
fn required_properties_and_kinds() {
    let repo = Repository::in_memory();
    repo.create_type(
        TypeDefinition::new("strict", BaseType::Document)
            .property(PropertyDefinition::new("must", DataKind::Integer).required())
            .property(PropertyDefinition::new("dflt", DataKind::String).with_default(PropertyValue::string("d"))),
    )
    .unwrap();
    let root = repo.root_folder_id();
    assert!(matches!(
        repo.create_object(ME, NewObject::new("strict", "a").in_folder(root.clone())),
        Err(RepoError::MissingProperty(_))
    ));
    assert!(matches!(
        repo.create_object(
            ME,
            NewObject::new("strict", "a")
                .in_folder(root.clone())
                .with_property("must", PropertyValue::string("1"))
        ),
        Err(RepoError::KindMismatch { .. })
    ));
    let ok = repo
        .create_object(
            ME,
            NewObject::new("strict", "a")
                .in_folder(root)
                .with_property("must", PropertyValue::integer(7)),
        )
        .unwrap();
    assert_eq!(ok.properties["dflt"], PropertyValue::string("d"));
}

#[test]
fn multi_filing_rules() {
    let repo = Repository::in_memory();
    let case = folder(&repo, "case", None);
    let f1 = folder(&repo, "f1", Some(&case));
    let f2 = folder(&repo, "f2", Some(&case));
    let c = doc(&repo, "document C", &f1);

    let filed = repo.file_in(ME, &c, &f2).unwrap();
    assert_eq!(filed.parent_ids, [f1.clone(), f2.clone()]);
    assert!(matches!(
        repo.file_in(ME, &f1, &f2),
        Err(RepoError::FolderMultiFiling(_))
    ));
    assert!(matches!(repo.file_in(ME, &c, &f2), Err(RepoError::AlreadyFiled { .. })));

    repo.unfile(ME, &c, &f1).unwrap();
    assert!(repo.get_children(&f1).unwrap().is_empty());
    assert_eq!(repo.get_children(&f2).unwrap()[0].object_id, c);
    assert!(matches!(repo.unfile(ME, &c, &f1), Err(RepoError::NotAParent { .. })));

    repo.unfile(ME, &c, &f2).unwrap();
    let orphan = repo.get_object(&c).unwrap();
    assert!(orphan.parent_ids.is_empty());

    let last = repo.change_log().pop().unwrap();
    assert_eq!(last.change_type, ChangeType::Updated);
    assert!(last.parent_ids_snapshot.is_empty());
}

#[test]
fn updates_append_changes() {
    let repo = Repository::in_memory();
    claim_doc(&repo);
    let case = folder(&repo, "case", None);
    let a = repo
        .create_object(ME, NewObject::new("claimDoc", "Data A").in_folder(case))
        .unwrap()
        .object_id;
    let before = repo.change_log().len();
    let status = |v: &str| BTreeMap::from([("status".to_string(), PropertyValue::string(v))]);
    repo.update_properties(ME, &a, status("open")).unwrap();
    assert_eq!(
        repo.get_object(&a).unwrap().properties["status"],
        PropertyValue::string("open")
    );
    repo.update_properties(ME, &a, status("closed")).unwrap();

    let log = repo.change_log();
    assert_eq!(log.len(), before + 2);
    let tail = &log[before..];
    assert!(tail.iter().all(|c| c.change_type == ChangeType::Updated));
    assert!(tail[0].token < tail[1].token);

    let bad = BTreeMap::from([("status".to_string(), PropertyValue::integer(3))]);
    assert!(matches!(
        repo.update_properties(ME, &a, bad),
        Err(RepoError::KindMismatch { .. })
    ));
    let unknown = BTreeMap::from([("nope".to_string(), PropertyValue::string("x"))]);
    assert!(matches!(
        repo.update_properties(ME, &a, unknown),
        Err(RepoError::UnknownProperty { .. })
    ));

    let renamed = repo
        .update_properties(
            ME,
            &a,
            BTreeMap::from([(NAME_PROPERTY.into(), PropertyValue::string("Data Z"))]),
        )
        .unwrap();
    assert_eq!(renamed.name, "Data Z");
    assert!(renamed.last_modification_date >= renamed.creation_date);
}

#[test]
fn delete_cascades_relationships() {
    let repo = Repository::in_memory();
    let case = folder(&repo, "case", None);
    let incoming = folder(&repo, "Incoming documents", Some(&case));
    let b = doc(&repo, "picture B", &incoming);
    let c = doc(&repo, "document C", &incoming);
    let rel = repo
        .create_object(ME, NewObject::relationship("mentions", c.clone(), b.clone()))
        .unwrap()
        .object_id;
    let unrelated = repo
        .create_object(ME, NewObject::relationship("self", c.clone(), c.clone()))
        .unwrap()
        .object_id;

    assert!(matches!(
        repo.delete_object(ME, &incoming),
        Err(RepoError::FolderNotEmpty(_))
    ));

    // Oracle: live relationships whose endpoints include B, then B itself.
    let mut expected: Vec<_> = repo
        .latest_objects()
        .into_values()
        .filter(|r| r.is_relationship() && (r.source_id.as_ref() == Some(&b) || r.target_id.as_ref() == Some(&b)))
        .map(|r| (ChangeType::Deleted, r.object_id))
        .collect();
    expected.push((ChangeType::Deleted, b.clone()));
    let before = repo.change_log().len();
    repo.delete_object(ME, &b).unwrap();
    assert_eq!(tokens(&repo)[before..], expected[..]);
    assert_eq!(expected[0].1, rel);

    assert!(matches!(repo.get_object(&b), Err(RepoError::NotFound(_))));
    assert!(matches!(repo.get_object(&rel), Err(RepoError::NotFound(_))));
    assert!(repo.get_object(&unrelated).is_ok());
    assert!(matches!(
        repo.delete_object(ME, &repo.root_folder_id()),
        Err(RepoError::RootFolder)
    ));
}

#[test]
fn checkin_creates_linear_versions() {
    let repo = Repository::in_memory();
    let case = folder(&repo, "case", None);
    let c = repo
        .create_object(
            ME,
            NewObject::document("document C")
                .in_folder(case.clone())
                .with_content(ContentStream::new("text/plain", "v1")),
        )
        .unwrap()
        .object_id;
    let v2 = repo.checkin(ME, &c, None, BTreeMap::new()).unwrap();
    assert_eq!(v2.version_label, "2.0");
    assert_eq!(v2.version_series_id, c);
    assert_eq!(repo.get_content(&v2.object_id).unwrap().unwrap().bytes, b"v1");

    let old = repo.get_object(&c).unwrap();
    assert!(!old.is_latest_version);
    assert_eq!(old.version_label, "1.0");
    assert_eq!(repo.versions(&c).unwrap().len(), 2);
    assert_eq!(repo.get_latest(&c).unwrap().object_id, v2.object_id);

    let log = repo.change_log();
    let tail = &log[log.len() - 2..];
    assert_eq!(tail[0].change_type, ChangeType::Deleted);
    assert_eq!(tail[0].object_id, c);
    assert_eq!(tail[1].change_type, ChangeType::Created);
    assert_eq!(tail[1].object_id, v2.object_id);
    assert_eq!(tail[0].name_snapshot, tail[1].name_snapshot);
    assert_eq!(tail[0].parent_ids_snapshot, tail[1].parent_ids_snapshot);
    assert_eq!(tail[0].token + 1, tail[1].token);

    assert!(matches!(
        repo.checkin(ME, &c, None, BTreeMap::new()),
        Err(RepoError::NotLatestVersion(_))
    ));
    let v3 = repo
        .checkin(
            ME,
            &v2.object_id,
            Some(ContentStream::new("text/plain", "v3")),
            BTreeMap::new(),
        )
        .unwrap();
    assert_eq!(v3.version_label, "3.0");
    assert_eq!(repo.get_children(&case).unwrap()[0].object_id, v3.object_id);
    assert!(matches!(
        repo.checkin(ME, &case, None, BTreeMap::new()),
        Err(RepoError::NotADocument(_))
    ));
}

#[test]
fn acl_changes_are_security_events() {
    let repo = Repository::in_memory();
    let case = folder(&repo, "case", None);
    let a = doc(&repo, "Data A", &case);
    let acl = vec![Ace::new("worker", [Permission::Read])];
    let rec = repo.apply_acl(ME, &a, acl.clone()).unwrap();
    assert_eq!(rec.acl, acl);
    repo.apply_acl(ME, &a, vec![Ace::new("boss", [Permission::All])])
        .unwrap();
    let log = repo.change_log();
    let sec: Vec<_> = log.iter().filter(|c| c.change_type == ChangeType::Security).collect();
    assert_eq!(sec.len(), 2);
    assert!(sec[0].token < sec[1].token);
    assert!(matches!(
        repo.apply_acl(ME, &a, vec![Ace::new("nobody", [])]),
        Err(RepoError::EmptyPermissions(_))
    ));
    assert!(matches!(
        repo.apply_acl(ME, &"obj-77".into(), acl),
        Err(RepoError::NotFound(_))
    ));
}

#[test]
fn change_paging() {
    let repo = Repository::in_memory();
    let case = folder(&repo, "case", None);
    for i in 0..5 {
        doc(&repo, &format!("d{i}"), &case);
    }
    let all = repo.get_content_changes(0, usize::MAX).unwrap();
    assert_eq!(all.changes.len(), 6);
    assert_eq!(all.next_token, all.changes.last().unwrap().token);
    let after = repo.get_content_changes(all.next_token, 10).unwrap();
    assert!(after.changes.is_empty());
    assert_eq!(after.next_token, all.next_token);
    assert!(repo.get_content_changes(999, 10).unwrap().changes.is_empty());

    let mut paged = Vec::new();
    let mut token = 0;
    loop {
        let page = repo.get_content_changes(token, 1).unwrap();
        if page.changes.is_empty() {
            break;
        }
        token = page.next_token;
        paged.extend(page.changes);
    }
    assert_eq!(
        serde_json::to_string(&paged).unwrap(),
        serde_json::to_string(&all.changes).unwrap()
    );
    assert!(matches!(
        repo.get_content_changes(0, 0),
        Err(RepoError::InvalidArgument(_))
    ));
}

#[test]
fn journal_file_survives_reopen() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("repo.jsonl");
    let (case, c) = {
        let repo = Repository::open(&path).unwrap();
        let case = folder(&repo, "case", None);
        let c = repo
            .create_object(
                ME,
                NewObject::document("document C")
                    .in_folder(case.clone())
                    .with_content(ContentStream::new("text/plain", "hello")),
            )
            .unwrap()
            .object_id;
        repo.checkin(ME, &c, None, BTreeMap::new()).unwrap();
        (case, c)
    };
    let repo = Repository::open(&path).unwrap();
    let latest = repo.get_latest(&c).unwrap();
    assert_eq!(latest.version_label, "2.0");
    assert_eq!(repo.get_content(&latest.object_id).unwrap().unwrap().bytes, b"hello");
    assert_eq!(repo.get_children(&case).unwrap().len(), 1);
    // New ids continue after the replayed ones.
    let d = doc(&repo, "next", &case);
    assert!(d > latest.object_id);

    // Handles on the same file pick up each other's writes: before every
    // mutation, and on refresh.
    let other = Repository::open(&path).unwrap();
    doc(&repo, "later", &case);
    doc(&other, "from other", &case);
    repo.refresh().unwrap();
    let names: Vec<_> = repo.get_children(&case).unwrap().into_iter().map(|r| r.name).collect();
    assert_eq!(names, ["document C", "next", "later", "from other"]);
}

#[test]
fn replay_from_records() {
    let repo = Repository::in_memory();
    let case = folder(&repo, "case", None);
    let a = doc(&repo, "a", &case);
    repo.checkin(ME, &a, Some(ContentStream::new("text/plain", "x")), BTreeMap::new())
        .unwrap();
    let journal = repo.journal();
    assert!(matches!(journal[0], JournalRecord::Repository { .. }));
    let copy = Repository::from_records(journal).unwrap();
    assert_eq!(copy.latest_objects(), repo.latest_objects());
    assert_eq!(copy.change_log(), repo.change_log());
}
