//! JSON bodies exchanged by the server and the client.
//!
//! Objects travel as the serialized [`ObjectRecord`] and change-log entries
//! as the serialized [`ChangeEvent`]; the types here cover requests and
//! errors only.
//!
//! [`ObjectRecord`]: casefs_core::repo::ObjectRecord
//! [`ChangeEvent`]: casefs_core::repo::ChangeEvent

use std::collections::BTreeMap;

use casefs_core::repo::{Ace, ErrorKind, ObjectId, PropertyValue, RepoError};
use serde::{Deserialize, Serialize};

/// Header naming the acting principal.
pub const PRINCIPAL_HEADER: &str = "x-principal";
/// Header carrying object metadata when the body is a content stream.
pub const OBJECT_HEADER: &str = "x-object";
/// Header carrying checkin properties when the body is a content stream.
pub const CHECKIN_HEADER: &str = "x-checkin-properties";
pub const DEFAULT_PRINCIPAL: &str = "anonymous";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CreateRequest {
    pub type_id: String,
    pub name: String,
    #[serde(default)]
    pub properties: BTreeMap<String, PropertyValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent_id: Option<ObjectId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_id: Option<ObjectId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_id: Option<ObjectId>,
}

/// PATCH body: either a property patch or one filing change.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PatchRequest {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub properties: BTreeMap<String, PropertyValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub add_parent_id: Option<ObjectId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub remove_parent_id: Option<ObjectId>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckinRequest {
    #[serde(default)]
    pub properties: BTreeMap<String, PropertyValue>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AclRequest {
    pub acl: Vec<Ace>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TypeCreated {
    pub type_id: String,
}

/// Error body. `subject` names the object or type the error is about, so
/// the client can rebuild the typed error.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireError {
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subject: Option<String>,
}

pub fn status_of(kind: ErrorKind) -> u16 {
    match kind {
        ErrorKind::NotFound => 404,
        ErrorKind::Conflict => 409,
        ErrorKind::Validation => 422,
        ErrorKind::Internal => 500,
    }
}

impl WireError {
    pub fn of(e: &RepoError) -> Self {
        let subject = match e {
            RepoError::NotFound(id)
            | RepoError::NotAFolder(id)
            | RepoError::NotADocument(id)
            | RepoError::FolderMultiFiling(id)
            | RepoError::RelationshipFiling(id)
            | RepoError::FolderNotEmpty(id)
            | RepoError::DanglingEndpoint(id)
            | RepoError::NotLatestVersion(id) => Some(id.to_string()),
            RepoError::TypeNotFound(t) | RepoError::DuplicateType(t) | RepoError::UnknownParentType(t) => {
                Some(t.clone())
            }
            _ => None,
        };
        WireError {
            code: e.code().to_string(),
            message: e.to_string(),
            subject,
        }
    }

    /// Rebuilds the typed error where the code identifies one, otherwise a
    /// [`RepoError::Remote`] keeping status, code and message.
    pub fn into_error(self, status: u16) -> RepoError {
        let id = || ObjectId::new(self.subject.clone().unwrap_or_default());
        let name = || self.subject.clone().unwrap_or_default();
        match (self.code.as_str(), self.subject.is_some()) {
            ("notFound", true) => RepoError::NotFound(id()),
            ("notAFolder", true) => RepoError::NotAFolder(id()),
            ("notADocument", true) => RepoError::NotADocument(id()),
            ("folderMultiFiling", true) => RepoError::FolderMultiFiling(id()),
            ("relationshipFiling", true) => RepoError::RelationshipFiling(id()),
            ("folderNotEmpty", true) => RepoError::FolderNotEmpty(id()),
            ("danglingEndpoint", true) => RepoError::DanglingEndpoint(id()),
            ("notLatestVersion", true) => RepoError::NotLatestVersion(id()),
            ("typeNotFound", true) => RepoError::TypeNotFound(name()),
            ("duplicateType", true) => RepoError::DuplicateType(name()),
            ("unknownParentType", true) => RepoError::UnknownParentType(name()),
            _ => RepoError::Remote {
                status,
                code: self.code,
                message: self.message,
            },
        }
    }
}

/// JSON text restricted to ASCII (non-ASCII characters as `\u` escapes),
/// so it can travel in a header.
pub fn ascii_json<T: Serialize>(value: &T) -> String {
    let text = serde_json::to_string(value).expect("wire bodies serialize");
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        if c.is_ascii() {
            out.push(c);
        } else {
            let mut buf = [0u16; 2];
            for unit in c.encode_utf16(&mut buf) {
                out.push_str(&format!("\\u{unit:04x}"));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascii_json_round_trips() {
        let req = CheckinRequest {
            properties: BTreeMap::from([("n".to_string(), PropertyValue::string("Grüße 🙂"))]),
        };
        let text = ascii_json(&req);
        assert!(text.is_ascii());
        assert_eq!(serde_json::from_str::<CheckinRequest>(&text).unwrap(), req);
    }

    #[test]
    fn typed_errors_survive() {
        let e = RepoError::NotFound("obj-1".into());
        let back = WireError::of(&e).into_error(404);
        assert!(matches!(back, RepoError::NotFound(id) if id.as_str() == "obj-1"));
        let e = RepoError::InvalidArgument("x".into());
        let back = WireError::of(&e).into_error(422);
        assert!(matches!(back, RepoError::Remote { status: 422, .. }));
        assert_eq!(back.kind(), ErrorKind::Validation);
    }
}
