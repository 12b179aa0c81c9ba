use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::net::TcpStream;
use std::sync::Arc;

use casefs_core::repo::{
    Ace, BaseType, ContentStream, DataKind, ErrorKind, LocalSession, NewObject, ObjectId, ObjectRecord, ObjectService,
    Permission, PropertyDefinition, PropertyValue, RepoError, Repository, Scalar, TypeDefinition, CASE_FILE_TYPE,
    DESCRIPTION, NAME_PROPERTY, SECONDARY_TYPE_IDS,
};
use casefs_wire::{HttpClient, Server};

fn serve() -> (Arc<Repository>, Server, HttpClient) {
    let repo = Arc::new(Repository::in_memory());
    let server = Server::start(repo.clone(), "127.0.0.1:0").unwrap();
    let client = HttpClient::new(server.url(), "alice").unwrap();
    (repo, server, client)
}

/// Minimal HTTP/1.1 exchange, to look at raw status lines and bodies.
fn raw(server: &Server, request: &str) -> (u16, String) {
    let mut s = TcpStream::connect(server.addr()).unwrap();
    s.write_all(request.as_bytes()).unwrap();
    let mut text = String::new();
    s.read_to_string(&mut text).unwrap();
    let status = text[9..12].parse().unwrap();
    let body = text.split("\r\n\r\n").nth(1).unwrap_or("").to_string();
    (status, body)
}

#[test]
fn fresh_repository_info() {
    let (_repo, server, client) = serve();
    let info = client.info().unwrap();
    assert_eq!(info.latest_change_log_token, 0);
    let (status, body) = raw(&server, "GET /repo HTTP/1.1\r\nHost: x\r\nConnection: close\r\n\r\n");
    assert_eq!(status, 200);
    let v: serde_json::Value = serde_json::from_str(&body).unwrap();
    assert!(v["repositoryId"].is_string());
    assert_eq!(v["latestChangeLogToken"], 0);
    server.shutdown().unwrap();
}

#[test]
fn create_get_delete_round_trip() {
    let (repo, _server, client) = serve();
    let root = client.info().unwrap().root_folder_id;
    let folder = client.create_object(NewObject::folder("Project XX")).unwrap();
    assert_eq!(folder.parent_ids, vec![root]);
    let doc = client
        .create_object(
            NewObject::document("Claim Form")
                .in_folder(folder.object_id.clone())
                .with_property(DESCRIPTION, PropertyValue::string("naïve ☃"))
                .with_content(ContentStream::new("text/plain; charset=utf-8", "héllo".as_bytes())),
        )
        .unwrap();
    assert_eq!(doc.created_by, "alice");
    assert_eq!(client.get_object(&doc.object_id).unwrap(), doc);
    assert_eq!(repo.get_object(&doc.object_id).unwrap(), doc);
    assert_eq!(
        client.get_content(&doc.object_id).unwrap(),
        Some(ContentStream::new("text/plain; charset=utf-8", "héllo".as_bytes()))
    );
    assert_eq!(client.get_content(&folder.object_id).unwrap(), None);
    assert_eq!(client.get_children(&folder.object_id).unwrap(), vec![doc.clone()]);

    // The JSON shape of an object.
    let v = serde_json::to_value(&doc).unwrap();
    for key in [
        "objectId",
        "typeId",
        "baseType",
        "name",
        "properties",
        "parentIds",
        "versionLabel",
        "caseIndex",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["properties"][DESCRIPTION]["kind"], "string");

    client.delete_object(&doc.object_id).unwrap();
    let err = client.get_object(&doc.object_id).unwrap_err();
    assert!(
        matches!(&err, RepoError::NotFound(id) if *id == doc.object_id),
        "{err:?}"
    );
    assert_eq!(err.kind(), ErrorKind::NotFound);
}

#[test]
fn typed_errors_cross_the_wire() {
    let (_repo, server, client) = serve();
    let doc = client.create_object(NewObject::document("d")).unwrap();

    let dangling = client
        .create_object(NewObject::relationship(
            "r",
            doc.object_id.clone(),
            ObjectId::new("obj-9999999999"),
        ))
        .unwrap_err();
    assert!(matches!(dangling, RepoError::DanglingEndpoint(_)), "{dangling:?}");
    assert_eq!(dangling.kind(), ErrorKind::Validation);

    let not_folder = client.get_children(&doc.object_id).unwrap_err();
    assert!(matches!(&not_folder, RepoError::NotAFolder(id) if *id == doc.object_id));
    assert_eq!(not_folder.kind(), ErrorKind::Conflict);

    let missing = client.get_type("x:nope").unwrap_err();
    assert!(matches!(missing, RepoError::TypeNotFound(t) if t == "x:nope"));

    let bad_kind = client
        .update_properties(
            &doc.object_id,
            BTreeMap::from([(DESCRIPTION.into(), PropertyValue::boolean(true))]),
        )
        .unwrap_err();
    assert!(matches!(bad_kind, RepoError::Remote { status: 422, ref code, .. } if code == "kindMismatch"));

    let id = doc.object_id.as_str();
    let (status, body) = raw(
        &server,
        &format!("GET /object/{id}/children HTTP/1.1\r\nHost: x\r\nConnection: close\r\n\r\n"),
    );
    assert_eq!(status, 409);
    assert!(body.contains("\"notAFolder\""));

    let patch = r#"{"addParentId":"obj-0000000000","removeParentId":"obj-0000000000"}"#;
    let (status, body) = raw(
        &server,
        &format!(
            "PATCH /object/{id} HTTP/1.1\r\nHost: x\r\nConnection: close\r\nContent-Type: application/json\r\nContent-Length: {}\r\n\r\n{patch}",
            patch.len()
        ),
    );
    assert_eq!(status, 422);
    assert!(body.contains("\"invalidArgument\""));

    let (status, _) = raw(
        &server,
        "POST /object HTTP/1.1\r\nHost: x\r\nConnection: close\r\nContent-Length: 3\r\n\r\n{x}",
    );
    assert_eq!(status, 422);

    let (status, _) = raw(
        &server,
        "DELETE /object/obj-4242424242 HTTP/1.1\r\nHost: x\r\nConnection: close\r\n\r\n",
    );
    assert_eq!(status, 404);
}

#[test]
fn transport_failure_is_typed() {
    let (_repo, server, _client) = serve();
    let url = server.url();
    server.shutdown().unwrap();
    let client = HttpClient::new(url, "bob").unwrap();
    assert!(matches!(client.info(), Err(RepoError::Transport(_))));
}

#[test]
fn principal_header_and_default() {
    let (_repo, server, client) = serve();
    let doc = client.create_object(NewObject::document("mine")).unwrap();
    assert_eq!(doc.created_by, "alice");
    let body = r#"{"typeId":"cmis:document","name":"anon"}"#;
    let (status, body) = raw(
        &server,
        &format!(
            "POST /object HTTP/1.1\r\nHost: x\r\nConnection: close\r\nContent-Type: application/json\r\nContent-Length: {}\r\n\r\n{body}",
            body.len()
        ),
    );
    assert_eq!(status, 201);
    assert!(body.contains("\"createdBy\":\"anonymous\""));
}

fn case_marker() -> PropertyValue {
    PropertyValue::multi(DataKind::Id, vec![Scalar::Id(CASE_FILE_TYPE.into())]).unwrap()
}

/// Runs the same script through `svc`; returns the ids it created, in order.
fn script(svc: &dyn ObjectService) -> Vec<ObjectId> {
    let mut ids = Vec::new();
    let def = TypeDefinition::new("x:claim", BaseType::Document)
        .property(PropertyDefinition::new("x:amount", DataKind::Decimal));
    assert_eq!(svc.create_type(def.clone()).unwrap(), "x:claim");
    assert!(matches!(svc.create_type(def), Err(RepoError::DuplicateType(_))));
    let case = svc
        .create_object(NewObject::folder("Case 1").with_property(SECONDARY_TYPE_IDS, case_marker()))
        .unwrap();
    let sub = svc
        .create_object(NewObject::folder("Evidence").in_folder(case.object_id.clone()))
        .unwrap();
    let claim = svc
        .create_object(
            NewObject::new("x:claim", "Claim")
                .in_folder(case.object_id.clone())
                .with_property("x:amount", PropertyValue::decimal("12.50").unwrap())
                .with_content(ContentStream::new("application/pdf", vec![0, 1, 2, 255])),
        )
        .unwrap();
    let photo = svc
        .create_object(NewObject::document("Photo").in_folder(sub.object_id.clone()))
        .unwrap();
    let rel = svc
        .create_object(NewObject::relationship(
            "supports",
            photo.object_id.clone(),
            claim.object_id.clone(),
        ))
        .unwrap();
    svc.file_in(&photo.object_id, &case.object_id).unwrap();
    assert!(svc.file_in(&photo.object_id, &case.object_id).is_err());
    svc.unfile(&photo.object_id, &sub.object_id).unwrap();
    svc.update_properties(
        &claim.object_id,
        BTreeMap::from([(NAME_PROPERTY.into(), PropertyValue::string("Claim (signed)"))]),
    )
    .unwrap();
    svc.set_content(&photo.object_id, ContentStream::new("image/png", vec![137, 80, 78, 71]))
        .unwrap();
    let v2 = svc
        .checkin(
            &claim.object_id,
            Some(ContentStream::new("application/pdf", vec![9; 300])),
            BTreeMap::from([(DESCRIPTION.into(), PropertyValue::string("größer"))]),
        )
        .unwrap();
    assert_eq!(v2.version_label, "2.0");
    assert!(svc.checkin(&claim.object_id, None, BTreeMap::new()).is_err());
    let v3 = svc.checkin(&v2.object_id, None, BTreeMap::new()).unwrap();
    assert_eq!(svc.get_latest(&claim.object_id).unwrap(), v3);
    svc.apply_acl(
        &sub.object_id,
        vec![Ace::new("bob", [Permission::Read, Permission::Write])],
    )
    .unwrap();
    assert!(svc.delete_object(&case.object_id).is_err());
    svc.delete_object(&rel.object_id).unwrap();
    let extra = svc
        .create_object(NewObject::relationship(
            "again",
            sub.object_id.clone(),
            v3.object_id.clone(),
        ))
        .unwrap();
    assert_eq!(svc.get_relationships(&v3.object_id).unwrap(), vec![extra.clone()]);
    svc.delete_object(&sub.object_id).unwrap();
    assert_eq!(svc.case_roots().unwrap().len(), 1);
    assert_eq!(svc.descendants(&case.object_id).unwrap().len(), 2);
    ids.extend([case, sub, claim, photo, rel, v2, v3, extra].map(|r| r.object_id));
    ids
}

/// Object records without the wall-clock fields.
fn timeless(mut r: ObjectRecord) -> ObjectRecord {
    r.creation_date = Default::default();
    r.last_modification_date = Default::default();
    r
}

#[test]
fn proxy_transparency() {
    let local = Arc::new(Repository::in_memory());
    let local_ids = script(&LocalSession::new(local.clone(), "alice"));
    let (remote, _server, client) = serve();
    let remote_ids = script(&client);
    assert_eq!(local_ids, remote_ids);

    let objects = |r: &Repository| r.all_objects().into_iter().map(timeless).collect::<Vec<_>>();
    assert_eq!(objects(&local), objects(&remote));
    for r in local.all_objects() {
        let id = &r.object_id;
        assert_eq!(local.get_content(id).unwrap(), client.get_content(id).unwrap());
    }
    assert!(local_ids.iter().any(|id| local.get_content(id).is_err()));

    let strip = |mut c: casefs_core::repo::ChangeEvent| {
        c.timestamp = Default::default();
        c
    };
    let log: Vec<_> = local.change_log().into_iter().map(strip).collect();
    let remote_log: Vec<_> = client
        .get_content_changes(0, 10_000)
        .unwrap()
        .changes
        .into_iter()
        .map(strip)
        .collect();
    assert_eq!(log, remote_log);
    assert_eq!(
        client.get_content_changes(0, 100).unwrap(),
        remote.get_content_changes(0, 100).unwrap()
    );

    // Paging through the client walks the same log.
    let mut token = 0;
    let mut paged = Vec::new();
    loop {
        let page = client.get_content_changes(token, 3).unwrap();
        if page.changes.is_empty() {
            break;
        }
        token = page.next_token;
        paged.extend(page.changes.into_iter().map(strip));
    }
    assert_eq!(paged, log);
    assert!(matches!(
        client.get_content_changes(0, 0),
        Err(RepoError::Remote { status: 422, .. })
    ));
}

#[test]
fn file_backed_server_sees_other_writers() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("repo.jsonl");
    let served = Arc::new(Repository::open(&path).unwrap());
    let server = Server::start(served, "127.0.0.1:0").unwrap();
    let client = HttpClient::new(server.url(), "alice").unwrap();
    let writer = Repository::open(&path).unwrap();
    let doc = writer.create_object("carol", NewObject::document("side door")).unwrap();
    assert_eq!(client.get_object(&doc.object_id).unwrap(), doc);
}
