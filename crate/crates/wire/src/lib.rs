//! HTTP/JSON binding for the repository: an axum server, a blocking
//! client implementing [`ObjectService`], and the change-log poller that
//! drives integration-mode event derivation.
//!
//! [`ObjectService`]: casefs_core::repo::ObjectService

pub mod client;
pub mod dto;
pub mod poller;
pub mod server;

pub use client::HttpClient;
pub use dto::WireError;
pub use poller::{
    CheckpointError, CheckpointStore, DeadLetter, FileCheckpoint, MemoryCheckpoint, PollError, PollOutcome, Poller,
    PollerConfig,
};
pub use server::{router, Server};
