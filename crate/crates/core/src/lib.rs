//! Case-file information model engine.
//!
//! [`repo`] is an embedded content repository with a typed, mutable type
//! system, multi-filing, linear versioning and an append-only change log.
//! [`casefile`] layers CMMN case files on top of it, [`events`] turns
//! repository changes into case-file-item lifecycle events (pushed in
//! process or derived from the change log), and [`models`] stores and
//! downgrades design-time case models.

pub mod casefile;
pub mod events;
pub mod models;
pub mod repo;
