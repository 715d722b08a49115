//! Append-only JSON-lines event log with periodic snapshots.
//!
//! Every event is written and synced before it touches the in-memory
//! queue. The log is never rewritten; the snapshot only shortens recovery.

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use mhscreen_core::review::{Applied, Event, Flag, ModeratorDecision, QueueState, ReviewError, Snapshot};

pub const DEFAULT_SNAPSHOT_EVERY: u64 = 100;

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}, line {line}: corrupted record near seq {seq}: {message}")]
    Corrupt {
        path: PathBuf,
        line: usize,
        seq: u64,
        message: String,
    },
    #[error("{path}: unreadable snapshot: {message}")]
    Snapshot { path: PathBuf, message: String },
    #[error("{path}, seq {seq}: {source}")]
    Replay {
        path: PathBuf,
        seq: u64,
        #[source]
        source: ReviewError,
    },
    #[error(transparent)]
    Rejected(#[from] ReviewError),
}

/// What [`EventStore::open`] found on disk.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Recovery {
    /// `last_seq` of the snapshot used, if any.
    pub snapshot_seq: Option<u64>,
    /// Log events applied on top of the snapshot.
    pub replayed: u64,
    /// Bytes cut from an incomplete final record.
    pub truncated_bytes: u64,
}

pub struct EventStore {
    log_path: PathBuf,
    snapshot_path: PathBuf,
    log: File,
    state: QueueState,
    snapshot_every: u64,
}

pub fn snapshot_path_for(log_path: &Path) -> PathBuf {
    let mut s = log_path.as_os_str().to_owned();
    s.push(".snapshot.json");
    PathBuf::from(s)
}

impl EventStore {
    /// Opens or creates the log and rebuilds the queue from it.
    pub fn open(log_path: &Path, snapshot_every: u64) -> Result<(Self, Recovery), StoreError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| StoreError::Io { path, source }
        };
        if let Some(dir) = log_path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(io(dir))?;
        }
        let snapshot_path = snapshot_path_for(log_path);
        let mut recovery = Recovery::default();

        let mut state = match fs::read(&snapshot_path) {
            Ok(bytes) => {
                let bad = |message: String| StoreError::Snapshot {
                    path: snapshot_path.clone(),
                    message,
                };
                let snap: Snapshot = serde_json::from_slice(&bytes).map_err(|e| bad(e.to_string()))?;
                recovery.snapshot_seq = Some(snap.last_seq);
                QueueState::from_snapshot(snap).map_err(|e| bad(e.to_string()))?
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => QueueState::new(),
            Err(e) => return Err(io(&snapshot_path)(e)),
        };

        let bytes = match fs::read(log_path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(io(log_path)(e)),
        };
        let (events, keep) = parse_log(log_path, &bytes)?;
        if keep < bytes.len() {
            recovery.truncated_bytes = (bytes.len() - keep) as u64;
            tracing::warn!(
                path = %log_path.display(),
                bytes = recovery.truncated_bytes,
                "dropping incomplete final record"
            );
        }
        let log_end = events.last().map_or(0, Event::seq);
        if let Some(s) = recovery.snapshot_seq.filter(|&s| s > log_end) {
            return Err(StoreError::Snapshot {
                path: snapshot_path.clone(),
                message: format!("snapshot at seq {s} is ahead of the log (ends at {log_end})"),
            });
        }
        for e in &events {
            // Events under the snapshot come back as duplicates; their
            // fingerprints are still checked.
            let applied = state.apply(e).map_err(|source| StoreError::Replay {
                path: log_path.to_path_buf(),
                seq: e.seq(),
                source,
            })?;
            if applied == Applied::Changed {
                recovery.replayed += 1;
            }
        }

        let log = OpenOptions::new()
            .create(true)
            .append(true)
            .open(log_path)
            .map_err(io(log_path))?;
        if recovery.truncated_bytes > 0 {
            log.set_len(keep as u64).map_err(io(log_path))?;
            log.sync_data().map_err(io(log_path))?;
        }
        Ok((
            EventStore {
                log_path: log_path.to_path_buf(),
                snapshot_path,
                log,
                state,
                snapshot_every: snapshot_every.max(1),
            },
            recovery,
        ))
    }

    pub fn state(&self) -> &QueueState {
        &self.state
    }

    pub fn log_path(&self) -> &Path {
        &self.log_path
    }

    /// Persists a new flag under the next flag id and returns it.
    pub fn record_flag(&mut self, mut flag: Flag) -> Result<&Flag, StoreError> {
        flag.id = self.state.next_flag_id();
        self.state.validate_flag(&flag)?;
        let id = flag.id.clone();
        self.commit(Event::FlagCreated {
            seq: self.state.next_seq(),
            flag: Box::new(flag),
        })?;
        Ok(self.state.get(&id).expect("just committed"))
    }

    pub fn record_decision(&mut self, d: ModeratorDecision) -> Result<&Flag, StoreError> {
        self.state.validate_decision(&d)?;
        let id = d.flag_id.clone();
        self.commit(Event::DecisionRecorded {
            seq: self.state.next_seq(),
            decision: d,
        })?;
        Ok(self.state.get(&id).expect("validated above"))
    }

    /// Write-ahead: the event is durable before the state changes.
    fn commit(&mut self, e: Event) -> Result<(), StoreError> {
        let mut line = serde_json::to_vec(&e).expect("events always serialize");
        line.push(b'\n');
        let io = |source| StoreError::Io {
            path: self.log_path.clone(),
            source,
        };
        self.log.write_all(&line).map_err(io)?;
        self.log.sync_data().map_err(io)?;
        self.state.apply(&e)?;
        if self.state.last_seq().is_multiple_of(self.snapshot_every) {
            self.write_snapshot()?;
        }
        Ok(())
    }

    pub fn write_snapshot(&self) -> Result<(), StoreError> {
        let io = |source| StoreError::Io {
            path: self.snapshot_path.clone(),
            source,
        };
        let tmp = {
            let mut s = self.snapshot_path.as_os_str().to_owned();
            s.push(".tmp");
            PathBuf::from(s)
        };
        let bytes = serde_json::to_vec(&self.state.snapshot()).expect("snapshots always serialize");
        let mut f = File::create(&tmp).map_err(io)?;
        f.write_all(&bytes).map_err(io)?;
        f.sync_all().map_err(io)?;
        fs::rename(&tmp, &self.snapshot_path).map_err(io)?;
        Ok(())
    }
}

/// Parses complete records; returns them with the byte length to keep.
/// An unparseable last record is dropped, any earlier one is fatal.
fn parse_log(path: &Path, bytes: &[u8]) -> Result<(Vec<Event>, usize), StoreError> {
    let mut events: Vec<Event> = Vec::new();
    let mut start = 0;
    let mut line_no = 0;
    while start < bytes.len() {
        line_no += 1;
        let (end, next) = match bytes[start..].iter().position(|&b| b == b'\n') {
            Some(i) => (start + i, start + i + 1),
            None => (bytes.len(), bytes.len()),
        };
        let raw = &bytes[start..end];
        let is_last = next >= bytes.len();
        let terminated = end < bytes.len();
        if raw.iter().all(u8::is_ascii_whitespace) && terminated {
            start = next;
            continue;
        }
        match serde_json::from_slice::<Event>(raw) {
            Ok(e) if terminated => events.push(e),
            Ok(_) => return Ok((events, start)),
            Err(_) if is_last => return Ok((events, start)),
            Err(err) => {
                return Err(StoreError::Corrupt {
                    path: path.to_path_buf(),
                    line: line_no,
                    seq: events.last().map_or(1, |e| e.seq() + 1),
                    message: err.to_string(),
                })
            }
        }
        start = next;
    }
    Ok((events, bytes.len()))
}
