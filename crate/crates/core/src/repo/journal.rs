//! Append-only journal: one JSON record per line, replayed on open.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use base64::engine::general_purpose::STANDARD;
use base64::Engine as _;
use serde::{Deserialize, Serialize};

use super::error::{RepoError, Result};
use super::object::{ChangeEvent, ObjectRecord};
use super::types::TypeDefinition;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum JournalRecord {
    /// First line of every journal.
    #[serde(rename_all = "camelCase")]
    Repository {
        repository_id: String,
        root_folder: ObjectRecord,
    },
    Type {
        definition: TypeDefinition,
    },
    /// A change-log entry plus the full object snapshot after the change
    /// (for deletions, the last state). `content` is present when the
    /// payload was set by this change.
    Change {
        #[serde(flatten)]
        event: ChangeEvent,
        object: ObjectRecord,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        content: Option<String>,
    },
}

pub(crate) fn encode_content(bytes: &[u8]) -> String {
    STANDARD.encode(bytes)
}

pub(crate) fn decode_content(text: &str) -> Result<Vec<u8>> {
    STANDARD
        .decode(text)
        .map_err(|e| RepoError::Journal(format!("bad content payload: {e}")))
}

/// Append handle on a journal file, tracking how far it has been read.
#[derive(Debug)]
pub(crate) struct JournalFile {
    path: PathBuf,
    file: File,
    offset: u64,
}

impl JournalFile {
    /// Opens (creating if needed) and reads every complete record.
    pub(crate) fn open(path: &Path) -> Result<(JournalFile, Vec<JournalRecord>)> {
        let file = OpenOptions::new()
            .create(true)
            .read(true)
            .append(true)
            .open(path)
            .map_err(|e| RepoError::Journal(format!("{}: {e}", path.display())))?;
        let mut journal = JournalFile {
            path: path.to_path_buf(),
            file,
            offset: 0,
        };
        let records = journal.read_new()?;
        Ok((journal, records))
    }

    /// Reads records appended since the last read. A trailing line without
    /// a newline is a torn write and is left for a later read.
    pub(crate) fn read_new(&mut self) -> Result<Vec<JournalRecord>> {
        let io = |e: std::io::Error| RepoError::Journal(format!("{}: {e}", self.path.display()));
        let mut reader = BufReader::new(File::open(&self.path).map_err(io)?);
        reader.seek(SeekFrom::Start(self.offset)).map_err(io)?;
        let mut records = Vec::new();
        let mut line = String::new();
        loop {
            line.clear();
            let n = reader.read_line(&mut line).map_err(io)?;
            if n == 0 || !line.ends_with('\n') {
                if n > 0 {
                    log::warn!("{}: ignoring incomplete trailing record", self.path.display());
                }
                break;
            }
            self.offset += n as u64;
            if line.trim().is_empty() {
                continue;
            }
            let record = serde_json::from_str(&line)
                .map_err(|e| RepoError::Journal(format!("{} at byte {}: {e}", self.path.display(), self.offset)))?;
            records.push(record);
        }
        Ok(records)
    }

    pub(crate) fn append(&mut self, records: &[JournalRecord]) -> Result<()> {
        let mut buf = String::new();
        for r in records {
            buf.push_str(&serde_json::to_string(r).map_err(|e| RepoError::Journal(e.to_string()))?);
            buf.push('\n');
        }
        let io = |e: std::io::Error| RepoError::Journal(format!("{}: {e}", self.path.display()));
        // Pick up records another writer appended before ours.
        let end = self.file.seek(SeekFrom::End(0)).map_err(io)?;
        if end != self.offset {
            return Err(RepoError::Journal(format!(
                "{} was modified by another writer; refresh before writing",
                self.path.display()
            )));
        }
        self.file.write_all(buf.as_bytes()).map_err(io)?;
        self.file.flush().map_err(io)?;
        self.offset += buf.len() as u64;
        Ok(())
    }
}
