//! Change-log poller: reads the remote change log, derives case-file-item
//! events and hands them to a handler, checkpointing as it goes.

use std::fs;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Duration;

use casefs_core::events::{CaseFileItemEvent, Deriver, DeriverState};
use casefs_core::repo::{ObjectService, RepoError};
use parking_lot::Mutex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PollerConfig {
    pub poll_interval: Duration,
    pub batch_size: usize,
    pub initial_backoff: Duration,
    pub max_backoff: Duration,
}

impl Default for PollerConfig {
    fn default() -> Self {
        PollerConfig {
            poll_interval: Duration::from_millis(500),
            batch_size: 100,
            initial_backoff: Duration::from_millis(250),
            max_backoff: Duration::from_secs(8),
        }
    }
}

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint i/o on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("checkpoint {path} is corrupt: {source}")]
    Corrupt {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

#[derive(Debug, Error)]
pub enum PollError {
    #[error(transparent)]
    Repo(#[from] RepoError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
}

/// Where the poller keeps its resume state.
pub trait CheckpointStore: Send {
    fn load(&self) -> Result<Option<DeriverState>, CheckpointError>;
    fn save(&self, state: &DeriverState) -> Result<(), CheckpointError>;
}

#[derive(Debug, Default)]
pub struct MemoryCheckpoint(Mutex<Option<DeriverState>>);

impl MemoryCheckpoint {
    pub fn new() -> Self {
        Self::default()
    }
}

impl CheckpointStore for MemoryCheckpoint {
    fn load(&self) -> Result<Option<DeriverState>, CheckpointError> {
        Ok(self.0.lock().clone())
    }

    fn save(&self, state: &DeriverState) -> Result<(), CheckpointError> {
        *self.0.lock() = Some(state.clone());
        Ok(())
    }
}

/// JSON file, replaced atomically on every save.
#[derive(Debug, Clone)]
pub struct FileCheckpoint {
    path: PathBuf,
}

impl FileCheckpoint {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        FileCheckpoint { path: path.into() }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn io(&self, source: std::io::Error) -> CheckpointError {
        CheckpointError::Io {
            path: self.path.clone(),
            source,
        }
    }
}

impl CheckpointStore for FileCheckpoint {
    fn load(&self) -> Result<Option<DeriverState>, CheckpointError> {
        match fs::read(&self.path) {
            Ok(bytes) => serde_json::from_slice(&bytes)
                .map(Some)
                .map_err(|source| CheckpointError::Corrupt {
                    path: self.path.clone(),
                    source,
                }),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(self.io(e)),
        }
    }

    fn save(&self, state: &DeriverState) -> Result<(), CheckpointError> {
        let mut tmp = self.path.clone().into_os_string();
        tmp.push(".tmp");
        let tmp = PathBuf::from(tmp);
        let bytes = serde_json::to_vec(state).expect("deriver state serializes");
        let mut f = fs::File::create(&tmp).map_err(|e| self.io(e))?;
        f.write_all(&bytes).and_then(|_| f.sync_all()).map_err(|e| self.io(e))?;
        fs::rename(&tmp, &self.path).map_err(|e| self.io(e))
    }
}

/// An event whose handler failed twice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeadLetter {
    pub token: Option<u64>,
    pub event: CaseFileItemEvent,
    pub error: String,
}

/// Result of one poll.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PollOutcome {
    pub changes: usize,
    pub events: usize,
    pub dead_lettered: usize,
}

pub struct Poller<S> {
    service: S,
    config: PollerConfig,
    deriver: Deriver,
    checkpoint: Box<dyn CheckpointStore>,
    dead: Vec<DeadLetter>,
}

impl<S: ObjectService> Poller<S> {
    /// Resumes from the checkpoint if it holds a state.
    pub fn new(service: S, config: PollerConfig, checkpoint: Box<dyn CheckpointStore>) -> Result<Self, PollError> {
        if config.batch_size == 0 {
            return Err(RepoError::InvalidArgument("batch size must be positive".into()).into());
        }
        let root = service.info()?.root_folder_id;
        let deriver = match checkpoint.load()? {
            Some(state) => {
                log::info!("poller resuming after token {}", state.high_water);
                Deriver::resume(root, state)
            }
            None => Deriver::new(root),
        };
        Ok(Poller {
            service,
            config,
            deriver,
            checkpoint,
            dead: Vec::new(),
        })
    }

    pub fn service(&self) -> &S {
        &self.service
    }

    pub fn high_water(&self) -> u64 {
        self.deriver.high_water()
    }

    pub fn skipped(&self) -> u64 {
        self.deriver.skipped()
    }

    pub fn dead_letters(&self) -> &[DeadLetter] {
        &self.dead
    }

    pub fn drain_dead_letters(&mut self) -> Vec<DeadLetter> {
        std::mem::take(&mut self.dead)
    }

    /// Reads one page, handles its events and saves the checkpoint. An
    /// empty page releases any deletion held back for replace detection.
    pub fn poll_once<H>(&mut self, handler: &mut H) -> Result<PollOutcome, PollError>
    where
        H: FnMut(&CaseFileItemEvent) -> Result<(), String>,
    {
        let page = self
            .service
            .get_content_changes(self.deriver.high_water(), self.config.batch_size)?;
        let events = if page.changes.is_empty() {
            self.deriver.flush()
        } else {
            self.deriver.derive(&page.changes)
        };
        let mut outcome = PollOutcome {
            changes: page.changes.len(),
            events: events.len(),
            dead_lettered: 0,
        };
        for event in &events {
            if !self.deliver(handler, event) {
                outcome.dead_lettered += 1;
            }
        }
        if outcome.changes > 0 || outcome.events > 0 {
            self.checkpoint.save(self.deriver.state())?;
        }
        Ok(outcome)
    }

    /// Calls the handler, retrying once; dead-letters the event on a
    /// second failure.
    fn deliver<H>(&mut self, handler: &mut H, event: &CaseFileItemEvent) -> bool
    where
        H: FnMut(&CaseFileItemEvent) -> Result<(), String>,
    {
        let mut last = String::new();
        for attempt in 0..2 {
            let result = catch_unwind(AssertUnwindSafe(|| handler(event)))
                .unwrap_or_else(|p| Err(format!("handler panicked: {}", panic_message(&p))));
            match result {
                Ok(()) => return true,
                Err(e) => {
                    log::warn!("handler failed on {event} (attempt {}): {e}", attempt + 1);
                    last = e;
                }
            }
        }
        self.dead.push(DeadLetter {
            token: event.source_token,
            event: event.clone(),
            error: last,
        });
        false
    }

    /// Polls until `stop` is set. Sleeps the poll interval after an empty
    /// page and backs off exponentially after errors.
    pub fn run<H>(&mut self, mut handler: H, stop: &AtomicBool)
    where
        H: FnMut(&CaseFileItemEvent) -> Result<(), String>,
    {
        let mut backoff = self.config.initial_backoff;
        while !stop.load(Ordering::Acquire) {
            match self.poll_once(&mut handler) {
                Ok(outcome) => {
                    backoff = self.config.initial_backoff;
                    if outcome.changes < self.config.batch_size {
                        sleep_unless_stopped(self.config.poll_interval, stop);
                    }
                }
                Err(e) => {
                    log::warn!("poll failed, retrying in {backoff:?}: {e}");
                    sleep_unless_stopped(backoff, stop);
                    backoff = next_backoff(backoff, self.config.max_backoff);
                }
            }
        }
    }
}

pub fn next_backoff(current: Duration, cap: Duration) -> Duration {
    (current * 2).min(cap)
}

fn sleep_unless_stopped(total: Duration, stop: &AtomicBool) {
    let step = Duration::from_millis(10);
    let mut left = total;
    while !left.is_zero() && !stop.load(Ordering::Acquire) {
        let d = left.min(step);
        std::thread::sleep(d);
        left -= d;
    }
}

fn panic_message(p: &Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = p.downcast_ref::<&str>() {
        s.to_string()
    } else if let Some(s) = p.downcast_ref::<String>() {
        s.clone()
    } else {
        "unknown panic".into()
    }
}
