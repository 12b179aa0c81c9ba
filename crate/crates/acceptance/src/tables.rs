//! The mapping tables written out literally, and a check of the engine's
//! lookups against them in both directions.

use std::collections::BTreeSet;

use casefs_core::casefile::{CmmnClass, DefinitionType, PropertyType};
use casefs_core::repo::{BaseType, DataKind};

/// (CMMN class, repository class).
pub const CLASSES: [(&str, &str); 4] = [
    ("CaseFile", "cmis:folder"),
    ("CaseFileItem", "cmis:object"),
    ("CaseFileItemDefinition", "cmis:object Type"),
    ("Property", "cmis:property Type"),
];

pub struct ObjectTypeRow {
    pub cmis_type: Option<&'static str>,
    pub cmmn_name: Option<&'static str>,
    pub uri: &'static str,
    pub extension: bool,
}

const fn row(
    cmis_type: Option<&'static str>,
    cmmn_name: Option<&'static str>,
    uri: &'static str,
    extension: bool,
) -> ObjectTypeRow {
    ObjectTypeRow {
        cmis_type,
        cmmn_name,
        uri,
        extension,
    }
}

pub const OBJECT_TYPES: [ObjectTypeRow; 11] = [
    row(
        Some("cmis:folder"),
        Some("CMIS Folder"),
        "http://www.omg.org/spec/CMMN/DefinitionType/CMISFolder",
        false,
    ),
    row(
        Some("cmis:document"),
        Some("CMIS Document"),
        "http://www.omg.org/spec/CMMN/DefinitionType/CMISDocument",
        false,
    ),
    row(
        Some("cmis:relationship"),
        Some("CMIS Relationship"),
        "http://www.omg.org/spec/CMMN/DefinitionType/CMISRelationship",
        false,
    ),
    row(
        None,
        Some("XML-Schema Element"),
        "http://www.omg.org/spec/CMMN/DefinitionType/XSDElement",
        false,
    ),
    row(
        None,
        Some("XML Schema Complex Type"),
        "http://www.omg.org/spec/CMMN/DefinitionType/XSDComplexType",
        false,
    ),
    row(
        None,
        Some("XML Schema Simple Type"),
        "http://www.omg.org/spec/CMMN/DefinitionType/XSDSimpleType",
        false,
    ),
    row(
        None,
        Some("Unknown"),
        "http://www.omg.org/spec/CMMN/DefinitionType/Unknown",
        false,
    ),
    row(
        None,
        Some("Unspecified"),
        "http://www.omg.org/spec/CMMN/DefinitionType/Unspecified",
        false,
    ),
    row(
        Some("cmis:policy"),
        None,
        "http://www.omg.org/spec/CMMN/DefinitionType/CMISPolicy",
        true,
    ),
    row(
        Some("cmis:item"),
        None,
        "http://www.omg.org/spec/CMMN/DefinitionType/CMISItem",
        true,
    ),
    row(
        Some("cmis:secondary"),
        None,
        "http://www.omg.org/spec/CMMN/DefinitionType/CMISSecondary",
        true,
    ),
];

/// What a plain `cmis:object` may be declared as.
pub const CMIS_OBJECT_FAN_OUT: [&str; 6] = [
    "http://www.omg.org/spec/CMMN/DefinitionType/CMISFolder",
    "http://www.omg.org/spec/CMMN/DefinitionType/CMISDocument",
    "http://www.omg.org/spec/CMMN/DefinitionType/CMISRelationship",
    "http://www.omg.org/spec/CMMN/DefinitionType/CMISPolicy",
    "http://www.omg.org/spec/CMMN/DefinitionType/CMISItem",
    "http://www.omg.org/spec/CMMN/DefinitionType/CMISSecondary",
];

/// (CMMN type, repository type, URI). The last three rows are extensions.
pub const PROPERTY_TYPES: [(Option<&str>, Option<&str>, &str); 21] = [
    (
        Some("string"),
        Some("xsd:string"),
        "http://www.omg.org/spec/CMMN/PropertyType/string",
    ),
    (
        Some("boolean"),
        Some("xsd:boolean"),
        "http://www.omg.org/spec/CMMN/PropertyType/boolean",
    ),
    (
        Some("integer"),
        Some("xsd:integer"),
        "http://www.omg.org/spec/CMMN/PropertyType/integer",
    ),
    (Some("float"), None, "http://www.omg.org/spec/CMMN/PropertyType/float"),
    (Some("double"), None, "http://www.omg.org/spec/CMMN/PropertyType/double"),
    (
        Some("duration"),
        None,
        "http://www.omg.org/spec/CMMN/PropertyType/duration",
    ),
    (
        Some("dateTime"),
        Some("xsd:dateTime"),
        "http://www.omg.org/spec/CMMN/PropertyType/dateTime",
    ),
    (Some("time"), None, "http://www.omg.org/spec/CMMN/PropertyType/time"),
    (Some("date"), None, "http://www.omg.org/spec/CMMN/PropertyType/date"),
    (
        Some("gYearMonth"),
        None,
        "http://www.omg.org/spec/CMMN/PropertyType/gYearMonth",
    ),
    (Some("gYear"), None, "http://www.omg.org/spec/CMMN/PropertyType/gYear"),
    (
        Some("gMonthDay"),
        None,
        "http://www.omg.org/spec/CMMN/PropertyType/gMonthDay",
    ),
    (Some("gDay"), None, "http://www.omg.org/spec/CMMN/PropertyType/gDay"),
    (Some("gMonth"), None, "http://www.omg.org/spec/CMMN/PropertyType/gMonth"),
    (
        Some("hexBinary"),
        None,
        "http://www.omg.org/spec/CMMN/PropertyType/hexBinary",
    ),
    (
        Some("base64Binary"),
        None,
        "http://www.omg.org/spec/CMMN/PropertyType/base64Binary",
    ),
    (
        Some("anyURI"),
        Some("xsd:anyURI"),
        "http://www.omg.org/spec/CMMN/PropertyType/anyURI",
    ),
    (Some("QName"), None, "http://www.omg.org/spec/CMMN/PropertyType/QName"),
    (
        None,
        Some("xsd:decimal"),
        "http://www.omg.org/spec/CMMN/PropertyType/decimal",
    ),
    (None, Some("Id"), "http://www.omg.org/spec/CMMN/PropertyType/Id"),
    (None, Some("HTML"), "http://www.omg.org/spec/CMMN/PropertyType/HTML"),
];

/// Definition-type URI for a repository base type, read off the table.
pub fn definition_uri_for(cmis_type: &str) -> Option<&'static str> {
    OBJECT_TYPES
        .iter()
        .find(|r| r.cmis_type == Some(cmis_type))
        .map(|r| r.uri)
}

fn base_of(type_id: &str) -> Option<BaseType> {
    BaseType::ALL.into_iter().find(|b| b.type_id() == type_id)
}

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

/// Compares every row; returns the number of rows checked.
pub fn check_all() -> Result<usize, String> {
    let mut rows = 0;

    ensure(CmmnClass::ALL.len() == CLASSES.len(), || "class count".into())?;
    for (cmmn, cmis) in CLASSES {
        let class = CmmnClass::ALL
            .into_iter()
            .find(|c| c.name() == cmmn)
            .ok_or_else(|| format!("no class {cmmn}"))?;
        ensure(class.cmis_class() == cmis, || {
            format!("{cmmn} -> {}", class.cmis_class())
        })?;
        ensure(CmmnClass::from_cmis_class(cmis) == Some(class), || {
            format!("inverse of {cmis}")
        })?;
        rows += 1;
    }

    ensure(DefinitionType::ALL.len() == OBJECT_TYPES.len(), || {
        "definition type count".into()
    })?;
    let uris: BTreeSet<String> = DefinitionType::ALL.iter().map(|d| d.uri()).collect();
    let expected: BTreeSet<String> = OBJECT_TYPES.iter().map(|r| r.uri.to_string()).collect();
    ensure(uris == expected, || format!("definition URIs differ: {uris:?}"))?;
    for r in &OBJECT_TYPES {
        let d = DefinitionType::from_uri(r.uri).ok_or_else(|| format!("unparsed {}", r.uri))?;
        ensure(d.uri() == r.uri, || format!("{} prints as {}", r.uri, d.uri()))?;
        ensure(d.cmmn_name() == r.cmmn_name, || format!("CMMN name of {}", r.uri))?;
        ensure(d.is_extension() == r.extension, || {
            format!("extension flag of {}", r.uri)
        })?;
        match r.cmis_type {
            Some(t) => {
                let base = base_of(t).ok_or_else(|| format!("no base type {t}"))?;
                ensure(d.base_type() == Some(base), || {
                    format!("{} -> {:?}", r.uri, d.base_type())
                })?;
                ensure(DefinitionType::from_base(base).uri() == r.uri, || format!("{t} -> URI"))?;
            }
            None => ensure(d.base_type().is_none(), || format!("{} has a base type", r.uri))?,
        }
        rows += 1;
    }
    let fan: BTreeSet<String> = DefinitionType::for_cmis_object().iter().map(|d| d.uri()).collect();
    let want: BTreeSet<String> = CMIS_OBJECT_FAN_OUT.iter().map(|s| s.to_string()).collect();
    ensure(fan.len() == 6 && fan == want, || format!("cmis:object fan-out {fan:?}"))?;
    rows += 1;

    ensure(PropertyType::ALL.len() == PROPERTY_TYPES.len(), || {
        "property type count".into()
    })?;
    let mut backed = BTreeSet::new();
    for (cmmn, cmis, uri) in PROPERTY_TYPES {
        let p = PropertyType::from_uri(uri).ok_or_else(|| format!("unparsed {uri}"))?;
        ensure(p.uri() == uri, || format!("{uri} prints as {}", p.uri()))?;
        if let Some(n) = cmmn {
            ensure(p.local_name() == n, || format!("{uri} local name {}", p.local_name()))?;
        }
        ensure(p.is_extension() == cmmn.is_none(), || {
            format!("extension flag of {uri}")
        })?;
        ensure(p.cmis_type() == cmis, || format!("{uri} -> {:?}", p.cmis_type()))?;
        match cmis {
            Some(_) => {
                let kind = p.data_kind().ok_or_else(|| format!("{uri} has no data kind"))?;
                ensure(PropertyType::from_kind(kind) == p, || format!("inverse of {kind:?}"))?;
                backed.insert(uri);
            }
            None => ensure(p.data_kind().is_none(), || format!("{uri} has a data kind"))?,
        }
        rows += 1;
    }
    let kinds: BTreeSet<String> = DataKind::ALL
        .iter()
        .map(|k| PropertyType::from_kind(*k).uri())
        .collect();
    ensure(
        kinds.iter().map(String::as_str).collect::<BTreeSet<_>>() == backed,
        || "repository-backed subset differs".into(),
    )?;
    Ok(rows)
}
