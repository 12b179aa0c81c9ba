use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::mapping::{DefinitionType, PropertyType};
use crate::repo::{ObjectId, ObjectRecord, PropertyValue, RepoError};

/// One case instance. A case is identified by its root folder, so `case_id`
/// and `root_folder_object_id` carry the same id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CaseFileHandle {
    pub case_id: ObjectId,
    pub root_folder_object_id: ObjectId,
    pub case_name: String,
}

/// Lifecycle state of a case file item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ItemState {
    Available,
    Discarded,
}

/// Case-layer view of a repository object, or the empty instance that
/// navigation returns on a miss.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CaseFileItemRef {
    pub empty: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub object_id: Option<ObjectId>,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub index: u64,
    #[serde(default)]
    pub definition_type_uri: String,
    pub state: ItemState,
    /// Set when the item is the case file itself (its root folder).
    #[serde(default)]
    pub case_file: bool,
}

impl CaseFileItemRef {
    pub fn empty() -> Self {
        CaseFileItemRef {
            empty: true,
            object_id: None,
            name: String::new(),
            index: 0,
            definition_type_uri: String::new(),
            state: ItemState::Available,
            case_file: false,
        }
    }

    pub fn of(record: &ObjectRecord) -> Self {
        CaseFileItemRef {
            empty: false,
            object_id: Some(record.object_id.clone()),
            name: record.name.clone(),
            index: record.case_index,
            definition_type_uri: DefinitionType::from_base(record.base_type).uri(),
            state: ItemState::Available,
            case_file: record.is_case_root(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.empty
    }

    pub fn definition_type(&self) -> Option<DefinitionType> {
        DefinitionType::from_uri(&self.definition_type_uri)
    }
}

/// A single property value as returned by [`item_property`], or the empty
/// element for a property the item does not have.
///
/// [`item_property`]: super::CaseFiles::item_property
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Element {
    pub empty: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub property_type_uri: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<PropertyValue>,
}

impl Element {
    /// Empty element, typed when the property is defined but unset.
    pub fn empty(property_type: Option<PropertyType>) -> Self {
        Element {
            empty: true,
            property_type_uri: property_type.map(PropertyType::uri),
            value: None,
        }
    }

    pub fn of(value: PropertyValue) -> Self {
        Element {
            empty: false,
            property_type_uri: Some(PropertyType::from_kind(value.kind()).uri()),
            value: Some(value),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.empty
    }
}

#[derive(Debug, Error)]
pub enum CaseFileError {
    #[error(transparent)]
    Repo(#[from] RepoError),
    #[error("the item is the empty instance")]
    EmptyItem,
    #[error("item `{0}` has been discarded")]
    Discarded(ObjectId),
    #[error("item `{0}` is not a folder")]
    NotAFolder(ObjectId),
    #[error("object `{0}` is not part of case `{1}`")]
    OutsideCase(ObjectId, ObjectId),
    #[error("object `{0}` is not a case file")]
    NotACase(ObjectId),
    #[error("no case matches `{0}`")]
    UnknownCase(String),
    #[error("`{0}` matches more than one case; use the case id")]
    AmbiguousCase(String),
    #[error("case name must not be empty")]
    EmptyCaseName,
}

impl CaseFileError {
    /// Whether the error is caused by the caller rather than the repository.
    pub fn is_user_error(&self) -> bool {
        match self {
            CaseFileError::Repo(e) => e.kind() != crate::repo::ErrorKind::Internal,
            _ => true,
        }
    }
}
