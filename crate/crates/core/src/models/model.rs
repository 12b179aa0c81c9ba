use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::casefile::{DefinitionType, PropertyType};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("malformed model: {0}")]
    Malformed(String),
    #[error("unknown URI `{0}`")]
    UnknownUri(String),
    #[error("invalid model: {0}")]
    Invalid(String),
}

/// Extension attributes of the case file and of item declarations.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ItemExt {
    #[serde(rename = "CMISObjectId", default, skip_serializing_if = "Option::is_none")]
    pub cmis_object_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DefinitionExt {
    #[serde(rename = "CMISTypeId", default, skip_serializing_if = "Option::is_none")]
    pub cmis_type_id: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropertyExt {
    #[serde(rename = "CMISPropertyId", default, skip_serializing_if = "Option::is_none")]
    pub cmis_property_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct PropertyDecl {
    pub name: String,
    #[serde(rename = "type")]
    pub property_type: PropertyType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ext: Option<PropertyExt>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct CaseFileItemDefinitionDecl {
    pub name: String,
    pub definition_type: DefinitionType,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub properties: Vec<PropertyDecl>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ext: Option<DefinitionExt>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct CaseFileItemDecl {
    pub name: String,
    /// Declared multiplicity, kept verbatim.
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub multiplicity: String,
    pub definition_ref: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<CaseFileItemDecl>,
    /// Names of the declarations this one references.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub target_refs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ext: Option<ItemExt>,
}

/// A design-time case-file model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct CaseModel {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_id: Option<String>,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    /// Free-form annotations, such as which repository classes the model's
    /// classes generalize. Never transformed.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
    pub definitions: Vec<CaseFileItemDefinitionDecl>,
    pub items: Vec<CaseFileItemDecl>,
    /// Extension attributes of the case file itself.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ext: Option<ItemExt>,
}

impl CaseModel {
    pub fn new(name: impl Into<String>) -> Self {
        CaseModel {
            model_id: None,
            name: name.into(),
            description: None,
            metadata: BTreeMap::new(),
            definitions: Vec::new(),
            items: Vec::new(),
            ext: None,
        }
    }

    /// Identity used to find earlier stored versions of this model.
    pub fn key(&self) -> &str {
        self.model_id.as_deref().unwrap_or(&self.name)
    }

    /// Item declarations in depth-first order.
    pub fn all_items(&self) -> Vec<&CaseFileItemDecl> {
        fn walk<'a>(decls: &'a [CaseFileItemDecl], out: &mut Vec<&'a CaseFileItemDecl>) {
            for d in decls {
                out.push(d);
                walk(&d.children, out);
            }
        }
        let mut out = Vec::new();
        walk(&self.items, &mut out);
        out
    }

    /// Checks names and references.
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.name.trim().is_empty() {
            return Err(ModelError::Invalid("model name must not be empty".into()));
        }
        let mut defs = HashSet::new();
        for d in &self.definitions {
            if !defs.insert(d.name.as_str()) {
                return Err(ModelError::Invalid(format!("definition `{}` declared twice", d.name)));
            }
            let mut props = HashSet::new();
            for p in &d.properties {
                if !props.insert(p.name.as_str()) {
                    return Err(ModelError::Invalid(format!(
                        "property `{}` declared twice in `{}`",
                        p.name, d.name
                    )));
                }
            }
        }
        let items = self.all_items();
        let mut names = HashSet::new();
        for i in &items {
            if !names.insert(i.name.as_str()) {
                return Err(ModelError::Invalid(format!("item `{}` declared twice", i.name)));
            }
            if !defs.contains(i.definition_ref.as_str()) {
                return Err(ModelError::Invalid(format!(
                    "item `{}` references undeclared definition `{}`",
                    i.name, i.definition_ref
                )));
            }
        }
        for i in &items {
            if let Some(t) = i.target_refs.iter().find(|t| !names.contains(t.as_str())) {
                return Err(ModelError::Invalid(format!(
                    "item `{}` targets undeclared item `{t}`",
                    i.name
                )));
            }
        }
        Ok(())
    }
}

pub fn serialize_model(model: &CaseModel) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(model).expect("models serialize");
    bytes.push(b'\n');
    bytes
}

pub fn parse_model(bytes: &[u8]) -> Result<CaseModel, ModelError> {
    let value: Value = serde_json::from_slice(bytes).map_err(|e| ModelError::Malformed(e.to_string()))?;
    if let Some(uri) = first_unknown_uri(&value) {
        return Err(ModelError::UnknownUri(uri));
    }
    let model: CaseModel = serde_json::from_value(value).map_err(|e| ModelError::Malformed(e.to_string()))?;
    model.validate()?;
    Ok(model)
}

/// Looks for definition-type and property-type strings outside both tables.
fn first_unknown_uri(model: &Value) -> Option<String> {
    let defs = model.get("definitions")?.as_array()?;
    for d in defs {
        if let Some(uri) = d.get("definitionType").and_then(Value::as_str) {
            if DefinitionType::from_uri(uri).is_none() {
                return Some(uri.to_string());
            }
        }
        for p in d.get("properties").and_then(Value::as_array).into_iter().flatten() {
            if let Some(uri) = p.get("type").and_then(Value::as_str) {
                if PropertyType::from_uri(uri).is_none() {
                    return Some(uri.to_string());
                }
            }
        }
    }
    None
}

/// The model as CMMN 1.0 can express it: extension attributes removed and
/// extended URIs mapped to their closest standard counterparts.
pub fn export_compat10(model: &CaseModel) -> CaseModel {
    fn strip(decls: &mut [CaseFileItemDecl]) {
        for d in decls {
            d.ext = None;
            strip(&mut d.children);
        }
    }
    let mut out = model.clone();
    out.ext = None;
    for d in &mut out.definitions {
        d.ext = None;
        d.definition_type = d.definition_type.compat10();
        for p in &mut d.properties {
            p.ext = None;
            p.property_type = p.property_type.compat10();
        }
    }
    strip(&mut out.items);
    out
}
