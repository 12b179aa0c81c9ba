//! CMMN case files over the repository: the class, definition-type and
//! property-type mappings, case creation, item navigation and creation.
//!
//! A case file is a folder carrying the `cmmn:caseFile` secondary type.
//! Every object filed below it is one of its items; same-named items are
//! told apart by a per-case multiplicity index the repository assigns.

mod case;
mod item;
mod mapping;

pub use case::{CaseFiles, Result, INDEX_PROPERTY};
pub use item::{CaseFileError, CaseFileHandle, CaseFileItemRef, Element, ItemState};
pub use mapping::{CmmnClass, DefinitionType, PropertyType, UnknownUri};
