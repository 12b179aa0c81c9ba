use std::sync::Arc;

use casefs_core::casefile::{DefinitionType, PropertyType};
use casefs_core::models::{
    export_compat10, load_model, parse_model, serialize_model, store_model, stored_models, CaseFileItemDecl,
    CaseFileItemDefinitionDecl, CaseModel, DefinitionExt, ItemExt, ModelError, PropertyDecl, PropertyExt, MODEL_TYPE,
};
use casefs_core::repo::{LocalSession, ObjectService, Repository, DESCRIPTION};
use proptest::prelude::*;

/// A model using every definition type and every property type.
fn every_uri_model() -> CaseModel {
    let mut m = CaseModel::new("all uris");
    m.description = Some("one of each".into());
    for (i, dt) in DefinitionType::ALL.into_iter().enumerate() {
        m.definitions.push(CaseFileItemDefinitionDecl {
            name: format!("def{i}"),
            definition_type: dt,
            properties: PropertyType::ALL
                .into_iter()
                .map(|pt| PropertyDecl {
                    name: pt.local_name().to_string(),
                    property_type: pt,
                    ext: Some(PropertyExt {
                        cmis_property_id: Some(format!("p:{}", pt.local_name())),
                    }),
                })
                .collect(),
            ext: Some(DefinitionExt {
                cmis_type_id: Some(format!("t:{i}")),
            }),
        });
        m.items.push(CaseFileItemDecl {
            name: format!("item{i}"),
            multiplicity: "ZeroOrMore".into(),
            definition_ref: format!("def{i}"),
            children: vec![],
            target_refs: vec![],
            ext: Some(ItemExt {
                cmis_object_id: Some(format!("obj-{i}")),
                index: Some(i as u64),
            }),
        });
    }
    m.ext = Some(ItemExt {
        cmis_object_id: Some("obj-root".into()),
        index: None,
    });
    m
}

#[test]
fn every_uri_round_trips() {
    let m = every_uri_model();
    let bytes = serialize_model(&m);
    let text = String::from_utf8(bytes.clone()).unwrap();
    for dt in DefinitionType::ALL {
        assert!(text.contains(&format!("\"{}\"", dt.uri())));
    }
    for pt in PropertyType::ALL {
        assert!(text.contains(&format!("\"{}\"", pt.uri())));
    }
    assert_eq!(parse_model(&bytes).unwrap(), m);
}

#[test]
fn parse_errors() {
    let text = String::from_utf8(serialize_model(&every_uri_model())).unwrap();
    assert!(matches!(
        parse_model(&text.as_bytes()[..text.len() / 2]),
        Err(ModelError::Malformed(_))
    ));
    let typo = text.replacen("DefinitionType/CMISFolder", "DefinitionType/CMISFolda", 1);
    assert_eq!(
        parse_model(typo.as_bytes()),
        Err(ModelError::UnknownUri(
            "http://www.omg.org/spec/CMMN/DefinitionType/CMISFolda".into()
        ))
    );
}

#[test]
fn compat_downgrade() {
    let m = every_uri_model();
    let c = export_compat10(&m);
    let text = String::from_utf8(serialize_model(&c)).unwrap();
    for bad in [
        "CMISObjectId",
        "CMISTypeId",
        "CMISPropertyId",
        "/PropertyType/decimal",
        "/PropertyType/Id",
        "/PropertyType/HTML",
        "/DefinitionType/CMISPolicy",
        "/DefinitionType/CMISItem",
        "/DefinitionType/CMISSecondary",
    ] {
        assert!(!text.contains(bad), "{bad} survived");
    }
    assert_eq!(export_compat10(&c), c);
    assert_eq!(parse_model(text.as_bytes()).unwrap(), c);
    let decimal = &c.definitions[0]
        .properties
        .iter()
        .find(|p| p.name == "decimal")
        .unwrap();
    assert_eq!(decimal.property_type, PropertyType::Double);
    let item_def = c.definitions.iter().find(|d| d.name == "def9").unwrap();
    assert_eq!(item_def.definition_type, DefinitionType::Unknown);

    // A model without extensions serializes identically.
    let plain = CaseModel::new("plain");
    assert_eq!(serialize_model(&export_compat10(&plain)), serialize_model(&plain));
}

#[test]
fn store_and_version() {
    let repo = Arc::new(Repository::in_memory());
    let svc = LocalSession::new(repo.clone(), "modeler");
    let mut m = every_uri_model();
    let first = store_model(&svc, &m).unwrap();
    assert_eq!(first.version_label, "1.0");
    assert_eq!(first.type_id, MODEL_TYPE);
    assert_eq!(first.name, "all uris");
    assert_eq!(first.properties[DESCRIPTION].as_str(), Some("one of each"));
    assert_eq!(load_model(&svc, &first.object_id).unwrap(), m);

    m.items.pop();
    let second = store_model(&svc, &m).unwrap();
    assert_eq!(second.version_label, "2.0");
    assert_eq!(second.version_series_id, first.version_series_id);
    assert_eq!(load_model(&svc, &second.object_id).unwrap(), m);
    assert_ne!(load_model(&svc, &first.object_id).unwrap(), m);
    assert_eq!(stored_models(&svc).unwrap().len(), 1);

    let other = store_model(&svc, &CaseModel::new("other")).unwrap();
    assert_eq!(other.version_label, "1.0");
    assert_eq!(stored_models(&svc).unwrap().len(), 2);
    assert!(svc.get_content(&other.object_id).unwrap().is_some());
}

fn uri_model() -> impl Strategy<Value = CaseModel> {
    let prop = (0..PropertyType::ALL.len(), any::<bool>()).prop_map(|(i, ext)| (PropertyType::ALL[i], ext));
    let def = (
        0..DefinitionType::ALL.len(),
        prop::collection::vec(prop, 0..5),
        any::<bool>(),
    );
    (prop::collection::vec(def, 1..5), any::<bool>(), "[a-z][a-z ]{0,11}").prop_map(|(defs, root_ext, name)| {
        let mut m = CaseModel::new(name);
        for (i, (dt, props, ext)) in defs.into_iter().enumerate() {
            m.definitions.push(CaseFileItemDefinitionDecl {
                name: format!("d{i}"),
                definition_type: DefinitionType::ALL[dt],
                properties: props
                    .into_iter()
                    .enumerate()
                    .map(|(j, (pt, ext))| PropertyDecl {
                        name: format!("p{j}"),
                        property_type: pt,
                        ext: ext.then(|| PropertyExt {
                            cmis_property_id: Some(format!("x:{j}")),
                        }),
                    })
                    .collect(),
                ext: ext.then(|| DefinitionExt {
                    cmis_type_id: Some(format!("t{i}")),
                }),
            });
            m.items.push(CaseFileItemDecl {
                name: format!("i{i}"),
                multiplicity: String::new(),
                definition_ref: format!("d{i}"),
                children: vec![CaseFileItemDecl {
                    name: format!("c{i}"),
                    multiplicity: "ExactlyOne".into(),
                    definition_ref: "d0".into(),
                    children: vec![],
                    target_refs: vec![format!("i{i}")],
                    ext: ext.then_some(ItemExt {
                        cmis_object_id: None,
                        index: Some(i as u64),
                    }),
                }],
                target_refs: vec![],
                ext: None,
            });
        }
        if root_ext {
            m.ext = Some(ItemExt {
                cmis_object_id: Some("root".into()),
                index: None,
            });
        }
        m
    })
}

proptest! {
    #[test]
    fn round_trip_and_idempotent_downgrade(m in uri_model()) {
        prop_assert_eq!(parse_model(&serialize_model(&m)).unwrap(), m.clone());
        let c = export_compat10(&m);
        prop_assert_eq!(export_compat10(&c), c.clone());
        prop_assert_eq!(parse_model(&serialize_model(&c)).unwrap(), c.clone());
        prop_assert!(c.definitions.iter().all(|d| !d.definition_type.is_extension()
            && d.properties.iter().all(|p| !p.property_type.is_extension())));
    }
}
