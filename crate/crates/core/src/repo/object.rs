use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::types::{BaseType, CASE_FILE_TYPE, SECONDARY_TYPE_IDS};
use super::value::{PropertyValue, Scalar};

/// Opaque, repository-generated object identifier.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectId(String);

impl ObjectId {
    pub fn new(id: impl Into<String>) -> Self {
        ObjectId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ObjectId {
    fn from(s: &str) -> Self {
        ObjectId(s.to_string())
    }
}

impl From<String> for ObjectId {
    fn from(s: String) -> Self {
        ObjectId(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Permission {
    Read,
    Write,
    All,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ace {
    pub principal: String,
    pub permissions: BTreeSet<Permission>,
}

impl Ace {
    pub fn new(principal: impl Into<String>, permissions: impl IntoIterator<Item = Permission>) -> Self {
        Ace {
            principal: principal.into(),
            permissions: permissions.into_iter().collect(),
        }
    }
}

/// Content stream metadata as stored on the object record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ContentInfo {
    pub mime_type: String,
    pub length: u64,
}

/// A content stream payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContentStream {
    pub mime_type: String,
    pub bytes: Vec<u8>,
}

impl ContentStream {
    pub fn new(mime_type: impl Into<String>, bytes: impl Into<Vec<u8>>) -> Self {
        ContentStream {
            mime_type: mime_type.into(),
            bytes: bytes.into(),
        }
    }

    pub fn length(&self) -> u64 {
        self.bytes.len() as u64
    }

    pub fn info(&self) -> ContentInfo {
        ContentInfo {
            mime_type: self.mime_type.clone(),
            length: self.length(),
        }
    }
}

/// One stored repository object.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ObjectRecord {
    pub object_id: ObjectId,
    pub type_id: String,
    pub base_type: BaseType,
    pub name: String,
    #[serde(default)]
    pub properties: BTreeMap<String, PropertyValue>,
    #[serde(default)]
    pub parent_ids: Vec<ObjectId>,
    #[serde(default)]
    pub source_id: Option<ObjectId>,
    #[serde(default)]
    pub target_id: Option<ObjectId>,
    #[serde(default, rename = "contentStream")]
    pub content: Option<ContentInfo>,
    pub version_series_id: ObjectId,
    pub version_label: String,
    pub is_latest_version: bool,
    pub case_index: u64,
    #[serde(default)]
    pub acl: Vec<Ace>,
    pub created_by: String,
    pub last_modified_by: String,
    pub creation_date: DateTime<Utc>,
    pub last_modification_date: DateTime<Utc>,
}

impl ObjectRecord {
    pub fn is_folder(&self) -> bool {
        self.base_type == BaseType::Folder
    }

    pub fn is_relationship(&self) -> bool {
        self.base_type == BaseType::Relationship
    }

    pub fn secondary_type_ids(&self) -> impl Iterator<Item = &str> {
        self.properties
            .get(SECONDARY_TYPE_IDS)
            .into_iter()
            .flat_map(|v| v.scalars())
            .filter_map(|s| match s {
                Scalar::Id(id) => Some(id.as_str()),
                _ => None,
            })
    }

    /// Whether this folder carries the case-file marker.
    pub fn is_case_root(&self) -> bool {
        self.is_folder() && self.secondary_type_ids().any(|t| t == CASE_FILE_TYPE)
    }

    /// Major version number parsed from the label.
    pub fn major_version(&self) -> u64 {
        self.version_label
            .split('.')
            .next()
            .and_then(|m| m.parse().ok())
            .unwrap_or(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ChangeType {
    Created,
    Updated,
    Deleted,
    Security,
}

impl fmt::Display for ChangeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChangeType::Created => "CREATED",
            ChangeType::Updated => "UPDATED",
            ChangeType::Deleted => "DELETED",
            ChangeType::Security => "SECURITY",
        })
    }
}

/// Change-log entry. Snapshots record the object's name, filing and
/// endpoints as of the change (before it, for deletions).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ChangeEvent {
    pub token: u64,
    pub change_type: ChangeType,
    pub object_id: ObjectId,
    pub base_type: BaseType,
    #[serde(rename = "name")]
    pub name_snapshot: String,
    #[serde(rename = "parentIds", default)]
    pub parent_ids_snapshot: Vec<ObjectId>,
    #[serde(rename = "sourceId", default)]
    pub source_id_snapshot: Option<ObjectId>,
    #[serde(rename = "targetId", default)]
    pub target_id_snapshot: Option<ObjectId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version_series_id: Option<ObjectId>,
    pub timestamp: DateTime<Utc>,
}

impl ChangeEvent {
    pub(crate) fn of(token: u64, change_type: ChangeType, record: &ObjectRecord, at: DateTime<Utc>) -> Self {
        ChangeEvent {
            token,
            change_type,
            object_id: record.object_id.clone(),
            base_type: record.base_type,
            name_snapshot: record.name.clone(),
            parent_ids_snapshot: record.parent_ids.clone(),
            source_id_snapshot: record.source_id.clone(),
            target_id_snapshot: record.target_id.clone(),
            version_series_id: Some(record.version_series_id.clone()),
            timestamp: at,
        }
    }
}

/// One page of the change log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ChangePage {
    pub changes: Vec<ChangeEvent>,
    pub next_token: u64,
}

/// Arguments for object creation.
#[derive(Debug, Clone, Default)]
pub struct NewObject {
    pub type_id: String,
    pub name: String,
    pub properties: BTreeMap<String, PropertyValue>,
    pub parent_id: Option<ObjectId>,
    pub content: Option<ContentStream>,
    pub source_id: Option<ObjectId>,
    pub target_id: Option<ObjectId>,
}

impl NewObject {
    pub fn new(type_id: impl Into<String>, name: impl Into<String>) -> Self {
        NewObject {
            type_id: type_id.into(),
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn document(name: impl Into<String>) -> Self {
        NewObject::new(BaseType::Document.type_id(), name)
    }

    pub fn folder(name: impl Into<String>) -> Self {
        NewObject::new(BaseType::Folder.type_id(), name)
    }

    pub fn relationship(name: impl Into<String>, source: ObjectId, target: ObjectId) -> Self {
        NewObject {
            source_id: Some(source),
            target_id: Some(target),
            ..NewObject::new(BaseType::Relationship.type_id(), name)
        }
    }

    pub fn in_folder(mut self, parent: ObjectId) -> Self {
        self.parent_id = Some(parent);
        self
    }

    pub fn with_property(mut self, id: impl Into<String>, value: PropertyValue) -> Self {
        self.properties.insert(id.into(), value);
        self
    }

    pub fn with_content(mut self, content: ContentStream) -> Self {
        self.content = Some(content);
        self
    }
}

/// Repository-level metadata.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RepositoryInfo {
    pub repository_id: String,
    pub latest_change_log_token: u64,
    pub root_folder_id: ObjectId,
}
