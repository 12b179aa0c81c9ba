//! Embedded content repository: types, objects, filing, content streams,
//! linear versioning, ACL storage and the change log.

mod error;
mod journal;
mod object;
mod observer;
mod service;
mod store;
mod types;
mod value;

pub use error::{ErrorKind, RepoError, Result};
pub use journal::JournalRecord;
pub use object::{
    Ace, ChangeEvent, ChangePage, ChangeType, ContentInfo, ContentStream, NewObject, ObjectId, ObjectRecord,
    Permission, RepositoryInfo,
};
pub use observer::{ItemContext, Mutation, MutationKind, MutationObserver};
pub use service::{LocalSession, ObjectService};
pub use store::{Repository, NAME_PROPERTY};
pub use types::{BaseType, PropertyDefinition, TypeDefinition, CASE_FILE_TYPE, DESCRIPTION, SECONDARY_TYPE_IDS};
pub use value::{format_timestamp, to_millis, Cardinality, DataKind, Decimal, PropertyValue, Scalar};
