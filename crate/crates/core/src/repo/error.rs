use thiserror::Error;

use super::object::ObjectId;
use super::value::{Cardinality, DataKind};

/// Coarse classification used by the wire binding and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    NotFound,
    Conflict,
    Validation,
    Internal,
}

#[derive(Debug, Error)]
pub enum RepoError {
    #[error("object `{0}` not found")]
    NotFound(ObjectId),
    #[error("type `{0}` not found")]
    TypeNotFound(String),
    #[error("type `{0}` already exists")]
    DuplicateType(String),
    #[error("parent type `{0}` does not exist")]
    UnknownParentType(String),
    #[error("type `{type_id}` has base {base} but its parent `{parent}` has base {parent_base}")]
    BaseMismatch {
        type_id: String,
        base: String,
        parent: String,
        parent_base: String,
    },
    #[error("property `{0}` is defined more than once in the type hierarchy")]
    DuplicateProperty(String),
    #[error("type `{0}` cannot be instantiated")]
    NotCreatable(String),
    #[error("required property `{0}` is missing")]
    MissingProperty(String),
    #[error("property `{property}` is not defined for type `{type_id}`")]
    UnknownProperty { type_id: String, property: String },
    #[error("property `{property}` expects {expected} but got {found}")]
    KindMismatch {
        property: String,
        expected: DataKind,
        found: DataKind,
    },
    #[error("property `{property}` is {expected:?}-valued")]
    CardinalityMismatch { property: String, expected: Cardinality },
    #[error("object `{0}` is not a folder")]
    NotAFolder(ObjectId),
    #[error("object `{0}` is not a document")]
    NotADocument(ObjectId),
    #[error("folder `{0}` cannot be multi-filed")]
    FolderMultiFiling(ObjectId),
    #[error("relationship `{0}` cannot be filed")]
    RelationshipFiling(ObjectId),
    #[error("object `{object}` is already filed in `{folder}`")]
    AlreadyFiled { object: ObjectId, folder: ObjectId },
    #[error("object `{object}` is not filed in `{folder}`")]
    NotAParent { object: ObjectId, folder: ObjectId },
    #[error("folder `{0}` is not empty")]
    FolderNotEmpty(ObjectId),
    #[error("relationship endpoint `{0}` does not exist")]
    DanglingEndpoint(ObjectId),
    #[error("object `{0}` is not the latest version")]
    NotLatestVersion(ObjectId),
    #[error("name `{name}` is already used by a sibling in `{folder}`")]
    DuplicateName { folder: ObjectId, name: String },
    #[error("access control entry for `{0}` grants no permissions")]
    EmptyPermissions(String),
    #[error("the repository root folder cannot be modified this way")]
    RootFolder,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("journal error: {0}")]
    Journal(String),
    #[error("{message}")]
    Remote { status: u16, code: String, message: String },
    #[error("transport error: {0}")]
    Transport(String),
}

impl RepoError {
    /// Stable machine-readable code, carried across the wire binding.
    pub fn code(&self) -> &str {
        match self {
            RepoError::NotFound(_) => "notFound",
            RepoError::TypeNotFound(_) => "typeNotFound",
            RepoError::DuplicateType(_) => "duplicateType",
            RepoError::UnknownParentType(_) => "unknownParentType",
            RepoError::BaseMismatch { .. } => "baseMismatch",
            RepoError::DuplicateProperty(_) => "duplicateProperty",
            RepoError::NotCreatable(_) => "notCreatable",
            RepoError::MissingProperty(_) => "missingProperty",
            RepoError::UnknownProperty { .. } => "unknownProperty",
            RepoError::KindMismatch { .. } => "kindMismatch",
            RepoError::CardinalityMismatch { .. } => "cardinalityMismatch",
            RepoError::NotAFolder(_) => "notAFolder",
            RepoError::NotADocument(_) => "notADocument",
            RepoError::FolderMultiFiling(_) => "folderMultiFiling",
            RepoError::RelationshipFiling(_) => "relationshipFiling",
            RepoError::AlreadyFiled { .. } => "alreadyFiled",
            RepoError::NotAParent { .. } => "notAParent",
            RepoError::FolderNotEmpty(_) => "folderNotEmpty",
            RepoError::DanglingEndpoint(_) => "danglingEndpoint",
            RepoError::NotLatestVersion(_) => "notLatestVersion",
            RepoError::DuplicateName { .. } => "duplicateName",
            RepoError::EmptyPermissions(_) => "emptyPermissions",
            RepoError::RootFolder => "rootFolder",
            RepoError::InvalidArgument(_) => "invalidArgument",
            RepoError::Journal(_) => "journal",
            RepoError::Remote { code, .. } => code,
            RepoError::Transport(_) => "transport",
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            RepoError::NotFound(_) | RepoError::TypeNotFound(_) => ErrorKind::NotFound,
            RepoError::DuplicateType(_)
            | RepoError::NotAFolder(_)
            | RepoError::NotADocument(_)
            | RepoError::FolderMultiFiling(_)
            | RepoError::RelationshipFiling(_)
            | RepoError::AlreadyFiled { .. }
            | RepoError::NotAParent { .. }
            | RepoError::FolderNotEmpty(_)
            | RepoError::NotLatestVersion(_)
            | RepoError::DuplicateName { .. }
            | RepoError::RootFolder => ErrorKind::Conflict,
            RepoError::UnknownParentType(_)
            | RepoError::BaseMismatch { .. }
            | RepoError::DuplicateProperty(_)
            | RepoError::NotCreatable(_)
            | RepoError::MissingProperty(_)
            | RepoError::UnknownProperty { .. }
            | RepoError::KindMismatch { .. }
            | RepoError::CardinalityMismatch { .. }
            | RepoError::DanglingEndpoint(_)
            | RepoError::EmptyPermissions(_)
            | RepoError::InvalidArgument(_) => ErrorKind::Validation,
            RepoError::Remote { status, .. } => match status {
                404 => ErrorKind::NotFound,
                409 => ErrorKind::Conflict,
                422 => ErrorKind::Validation,
                _ => ErrorKind::Internal,
            },
            RepoError::Journal(_) | RepoError::Transport(_) => ErrorKind::Internal,
        }
    }
}

pub type Result<T, E = RepoError> = std::result::Result<T, E>;
