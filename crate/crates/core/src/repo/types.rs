//! The mutable type system: object types and their property definitions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::error::RepoError;
use super::value::{Cardinality, DataKind, PropertyValue};

/// Multi-valued id property listing the secondary types attached to an object.
pub const SECONDARY_TYPE_IDS: &str = "secondaryTypeIds";
/// Optional free-text description available on every creatable base type.
pub const DESCRIPTION: &str = "cmis:description";
/// Secondary type that marks a folder as the root of a case.
pub const CASE_FILE_TYPE: &str = "cmmn:caseFile";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BaseType {
    #[serde(rename = "cmis:document")]
    Document,
    #[serde(rename = "cmis:folder")]
    Folder,
    #[serde(rename = "cmis:relationship")]
    Relationship,
    #[serde(rename = "cmis:policy")]
    Policy,
    #[serde(rename = "cmis:item")]
    Item,
    #[serde(rename = "cmis:secondary")]
    Secondary,
}

impl BaseType {
    pub const ALL: [BaseType; 6] = [
        BaseType::Document,
        BaseType::Folder,
        BaseType::Relationship,
        BaseType::Policy,
        BaseType::Item,
        BaseType::Secondary,
    ];

    /// The base type id, which is also the id of the root type definition.
    pub fn type_id(self) -> &'static str {
        match self {
            BaseType::Document => "cmis:document",
            BaseType::Folder => "cmis:folder",
            BaseType::Relationship => "cmis:relationship",
            BaseType::Policy => "cmis:policy",
            BaseType::Item => "cmis:item",
            BaseType::Secondary => "cmis:secondary",
        }
    }

    pub fn is_fileable(self) -> bool {
        matches!(
            self,
            BaseType::Document | BaseType::Folder | BaseType::Policy | BaseType::Item
        )
    }
}

impl fmt::Display for BaseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.type_id())
    }
}

impl FromStr for BaseType {
    type Err = RepoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BaseType::ALL
            .into_iter()
            .find(|b| b.type_id() == s || b.type_id().trim_start_matches("cmis:") == s)
            .ok_or_else(|| RepoError::InvalidArgument(format!("unknown base type `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PropertyDefinition {
    pub property_id: String,
    pub data_kind: DataKind,
    pub cardinality: Cardinality,
    #[serde(default)]
    pub required: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_value: Option<PropertyValue>,
}

impl PropertyDefinition {
    pub fn new(property_id: impl Into<String>, data_kind: DataKind) -> Self {
        PropertyDefinition {
            property_id: property_id.into(),
            data_kind,
            cardinality: Cardinality::Single,
            required: false,
            default_value: None,
        }
    }

    pub fn multi(mut self) -> Self {
        self.cardinality = Cardinality::Multi;
        self
    }

    pub fn required(mut self) -> Self {
        self.required = true;
        self
    }

    pub fn with_default(mut self, value: PropertyValue) -> Self {
        self.default_value = Some(value);
        self
    }

    /// Checks that `value` fits this definition's kind and cardinality.
    pub fn check(&self, value: &PropertyValue) -> Result<(), RepoError> {
        if value.kind() != self.data_kind {
            return Err(RepoError::KindMismatch {
                property: self.property_id.clone(),
                expected: self.data_kind,
                found: value.kind(),
            });
        }
        if value.cardinality() != self.cardinality {
            return Err(RepoError::CardinalityMismatch {
                property: self.property_id.clone(),
                expected: self.cardinality,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TypeDefinition {
    pub type_id: String,
    pub base_type: BaseType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent_type_id: Option<String>,
    #[serde(default)]
    pub display_name: String,
    #[serde(default)]
    pub property_defs: Vec<PropertyDefinition>,
}

impl TypeDefinition {
    /// A subtype of `base` whose parent defaults to the base type itself.
    pub fn new(type_id: impl Into<String>, base_type: BaseType) -> Self {
        let type_id = type_id.into();
        TypeDefinition {
            display_name: type_id.clone(),
            type_id,
            base_type,
            parent_type_id: Some(base_type.type_id().to_string()),
            property_defs: Vec::new(),
        }
    }

    pub fn parent(mut self, parent_type_id: impl Into<String>) -> Self {
        self.parent_type_id = Some(parent_type_id.into());
        self
    }

    pub fn display_name(mut self, name: impl Into<String>) -> Self {
        self.display_name = name.into();
        self
    }

    pub fn property(mut self, def: PropertyDefinition) -> Self {
        self.property_defs.push(def);
        self
    }

    pub fn is_base(&self) -> bool {
        self.parent_type_id.is_none()
    }

    /// Root definitions for the six base types plus the case-file marker.
    pub fn builtins() -> Vec<TypeDefinition> {
        let mut defs: Vec<TypeDefinition> = BaseType::ALL
            .into_iter()
            .map(|base| {
                let mut def = TypeDefinition {
                    type_id: base.type_id().to_string(),
                    base_type: base,
                    parent_type_id: None,
                    display_name: base.type_id().to_string(),
                    property_defs: Vec::new(),
                };
                if base != BaseType::Secondary {
                    def.property_defs
                        .push(PropertyDefinition::new(DESCRIPTION, DataKind::String));
                    def.property_defs
                        .push(PropertyDefinition::new(SECONDARY_TYPE_IDS, DataKind::Id).multi());
                }
                def
            })
            .collect();
        defs.push(TypeDefinition::new(CASE_FILE_TYPE, BaseType::Secondary).display_name("Case file"));
        defs
    }
}
