//! Random models using every extension, and a text-level oracle for the
//! CMMN 1.0 downgrade.

use casefs_core::casefile::{DefinitionType, PropertyType};
use casefs_core::models::{
    export_compat10, parse_model, serialize_model, CaseFileItemDecl, CaseFileItemDefinitionDecl, CaseModel,
    DefinitionExt, ItemExt, PropertyDecl, PropertyExt,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

/// Substrings no downgraded model may contain.
pub const FORBIDDEN: [&str; 11] = [
    "CMISObjectId",
    "CMISTypeId",
    "CMISPropertyId",
    "\"index\"",
    "\"ext\"",
    "http://www.omg.org/spec/CMMN/PropertyType/decimal",
    "http://www.omg.org/spec/CMMN/PropertyType/Id",
    "http://www.omg.org/spec/CMMN/PropertyType/HTML",
    "http://www.omg.org/spec/CMMN/DefinitionType/CMISPolicy",
    "http://www.omg.org/spec/CMMN/DefinitionType/CMISItem",
    "http://www.omg.org/spec/CMMN/DefinitionType/CMISSecondary",
];

/// URI replacements, written out.
const URI_MAP: [(&str, &str); 6] = [
    (
        "http://www.omg.org/spec/CMMN/PropertyType/decimal",
        "http://www.omg.org/spec/CMMN/PropertyType/double",
    ),
    (
        "http://www.omg.org/spec/CMMN/PropertyType/Id",
        "http://www.omg.org/spec/CMMN/PropertyType/string",
    ),
    (
        "http://www.omg.org/spec/CMMN/PropertyType/HTML",
        "http://www.omg.org/spec/CMMN/PropertyType/string",
    ),
    (
        "http://www.omg.org/spec/CMMN/DefinitionType/CMISPolicy",
        "http://www.omg.org/spec/CMMN/DefinitionType/Unknown",
    ),
    (
        "http://www.omg.org/spec/CMMN/DefinitionType/CMISItem",
        "http://www.omg.org/spec/CMMN/DefinitionType/Unknown",
    ),
    (
        "http://www.omg.org/spec/CMMN/DefinitionType/CMISSecondary",
        "http://www.omg.org/spec/CMMN/DefinitionType/Unknown",
    ),
];

fn item(rng: &mut ChaCha8Rng, name: String, defs: usize, depth: u32) -> CaseFileItemDecl {
    let children = if depth < 3 {
        (0..rng.random_range(0..3))
            .map(|i| item(rng, format!("{name}.{i}"), defs, depth + 1))
            .collect()
    } else {
        Vec::new()
    };
    CaseFileItemDecl {
        multiplicity: ["", "ExactlyOne", "ZeroOrMore", "OneOrMore"][rng.random_range(0..4)].into(),
        definition_ref: format!("def{}", rng.random_range(0..defs)),
        children,
        target_refs: Vec::new(),
        ext: rng.random_bool(0.7).then(|| ItemExt {
            cmis_object_id: rng
                .random_bool(0.8)
                .then(|| format!("obj-{}", rng.random_range(0..999))),
            index: Some(rng.random_range(0..10)),
        }),
        name,
    }
}

/// A model with every definition type and every property type, carrying
/// all four extension attributes somewhere.
pub fn random_model(rng: &mut ChaCha8Rng) -> CaseModel {
    let mut m = CaseModel::new(format!("model {}", rng.random_range(0..100)));
    m.description = rng.random_bool(0.5).then(|| "generated".to_string());
    let mut defs: Vec<DefinitionType> = DefinitionType::ALL.to_vec();
    for _ in 0..rng.random_range(0..5) {
        defs.push(DefinitionType::ALL[rng.random_range(0..DefinitionType::ALL.len())]);
    }
    let n = defs.len();
    for (i, dt) in defs.into_iter().enumerate() {
        let mut props: Vec<PropertyType> = if i == 0 {
            PropertyType::ALL.to_vec()
        } else {
            (0..rng.random_range(0..6))
                .map(|_| PropertyType::ALL[rng.random_range(0..PropertyType::ALL.len())])
                .collect()
        };
        props.dedup();
        m.definitions.push(CaseFileItemDefinitionDecl {
            name: format!("def{i}"),
            definition_type: dt,
            properties: props
                .into_iter()
                .enumerate()
                .map(|(j, pt)| PropertyDecl {
                    name: format!("p{j}"),
                    property_type: pt,
                    ext: (i == 0 || rng.random_bool(0.5)).then(|| PropertyExt {
                        cmis_property_id: Some(format!("x:p{j}")),
                    }),
                })
                .collect(),
            ext: (i == 0 || rng.random_bool(0.5)).then(|| DefinitionExt {
                cmis_type_id: Some(format!("x:t{i}")),
            }),
        });
    }
    for i in 0..rng.random_range(1..5) {
        m.items.push(item(rng, format!("item{i}"), n, 0));
    }
    m.items[0].ext = Some(ItemExt {
        cmis_object_id: Some("obj-1".into()),
        index: Some(0),
    });
    if m.items.len() > 1 {
        let first = m.items[0].name.clone();
        m.items[1].target_refs.push(first);
    }
    m.ext = Some(ItemExt {
        cmis_object_id: Some("obj-0".into()),
        index: None,
    });
    m
}

/// The downgrade computed on the serialized form: drop every `ext` object
/// and rewrite the extended URIs.
pub fn expected_downgrade(model: &CaseModel) -> Value {
    fn walk(v: &mut Value) {
        match v {
            Value::Object(map) => {
                map.remove("ext");
                map.values_mut().for_each(walk);
            }
            Value::Array(items) => items.iter_mut().for_each(walk),
            Value::String(s) => {
                if let Some((_, to)) = URI_MAP.iter().find(|(from, _)| from == s) {
                    *s = to.to_string();
                }
            }
            _ => {}
        }
    }
    let mut v: Value = serde_json::from_slice(&serialize_model(model)).expect("model JSON");
    walk(&mut v);
    v
}

/// Checks one model; returns the number of forbidden substrings the input
/// contained (all of them, for a model that exercises every extension).
pub fn check(model: &CaseModel) -> Result<usize, String> {
    let before = String::from_utf8(serialize_model(model)).map_err(|e| e.to_string())?;
    let present = FORBIDDEN.iter().filter(|f| before.contains(*f)).count();
    let down = export_compat10(model);
    let bytes = serialize_model(&down);
    let text = String::from_utf8(bytes.clone()).map_err(|e| e.to_string())?;
    if let Some(f) = FORBIDDEN.iter().find(|f| text.contains(*f)) {
        return Err(format!("{f} survives the downgrade"));
    }
    if export_compat10(&down) != down {
        return Err("downgrade is not idempotent".into());
    }
    let reparsed = parse_model(&bytes).map_err(|e| format!("re-parse failed: {e}"))?;
    if reparsed != down {
        return Err("re-parsed model differs".into());
    }
    let got: Value = serde_json::from_slice(&bytes).map_err(|e| e.to_string())?;
    if got != expected_downgrade(model) {
        return Err("downgrade changed more than the extensions".into());
    }
    Ok(present)
}
