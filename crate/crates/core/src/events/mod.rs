//! Case-file-item events: the lifecycle state machine, the mapping from
//! repository changes to events in both modes, and onPart subscriptions.
//!
//! In embedded mode [`EmbeddedEvents`] observes the repository and maps
//! each committed mutation directly ([`map_mutation`]). In integration
//! mode a poller feeds change-log pages to a [`Deriver`]. Both produce the
//! same events for the same mutations and hand them to a [`Dispatcher`].

mod derive;
mod dispatch;
mod kind;
mod lifecycle;
mod push;

pub use derive::{Deriver, DeriverState, ShadowEntry, ShadowIndex};
pub use dispatch::{Dispatcher, OnPartSubscription, Selector, Sink, SubscribeError, SubscriptionId};
pub use kind::{CaseFileItemEvent, EventKind};
pub use lifecycle::{apply_transition, InvalidTransition, LifecycleState, LifecycleTracker};
pub use push::{map_mutation, EmbeddedEvents};
