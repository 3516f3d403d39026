//! Append-only JSON-lines session logs, one file per session.
//!
//! Each line is one [`SessionEvent`] with keys in the fixed order `kind`,
//! `payload`, `wall_time`. Lines are written whole or not at all: a failed
//! write truncates the file back to its previous length.

use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use cogspeech_core::{BiomarkerScoreSet, EventPayload, SessionEvent};

/// Replaces utterance text when history recording is off.
pub const REDACTED: &str = "[REDACTED]";

#[derive(Debug, thiserror::Error)]
pub enum LogError {
    #[error("session log io: {0}")]
    Io(#[from] io::Error),
    #[error("{path}:{line}: {source}")]
    Parse { path: PathBuf, line: usize, source: serde_json::Error },
    #[error("invalid session id {0:?}")]
    BadSessionId(String),
    #[error("wall time {got} precedes the previous event at {last}")]
    NonMonotone { last: u64, got: u64 },
}

/// Session ids become file names, so only a conservative alphabet is
/// accepted.
pub fn valid_session_id(id: &str) -> bool {
    !id.is_empty()
        && id.len() <= 128
        && !id.starts_with('.')
        && id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
}

pub fn log_path(dir: &Path, session_id: &str) -> Result<PathBuf, LogError> {
    if !valid_session_id(session_id) {
        return Err(LogError::BadSessionId(session_id.into()));
    }
    Ok(dir.join(format!("{session_id}.jsonl")))
}

/// Storage under a log. Implemented for files; tests substitute failing
/// stores.
pub trait LogStore {
    fn len(&mut self) -> io::Result<u64>;
    fn append(&mut self, bytes: &[u8]) -> io::Result<()>;
    fn truncate(&mut self, len: u64) -> io::Result<()>;
}

impl LogStore for File {
    fn len(&mut self) -> io::Result<u64> {
        self.seek(SeekFrom::End(0))
    }

    fn append(&mut self, bytes: &[u8]) -> io::Result<()> {
        self.write_all(bytes)?;
        self.sync_data()
    }

    fn truncate(&mut self, len: u64) -> io::Result<()> {
        self.set_len(len)?;
        self.seek(SeekFrom::Start(len)).map(drop)
    }
}

pub fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

/// Single writer for one session's log.
#[derive(Debug)]
pub struct SessionLog<S: LogStore = File> {
    store: S,
    history: bool,
    last_wall: u64,
}

impl SessionLog<File> {
    /// Opens `<dir>/<session_id>.jsonl` for appending, creating it if
    /// needed. Wall times continue from the last event already present.
    pub fn open(dir: &Path, session_id: &str, history: bool) -> Result<Self, LogError> {
        let path = log_path(dir, session_id)?;
        std::fs::create_dir_all(dir)?;
        let last_wall = if path.exists() {
            read_log(&path)?.last().map_or(0, |e| e.wall_time)
        } else {
            0
        };
        let file = OpenOptions::new().create(true).read(true).append(true).open(&path)?;
        Ok(SessionLog { store: file, history, last_wall })
    }
}

impl<S: LogStore> SessionLog<S> {
    pub fn with_store(store: S, history: bool) -> Self {
        SessionLog { store, history, last_wall: 0 }
    }

    pub fn history(&self) -> bool {
        self.history
    }

    pub fn last_wall_time(&self) -> u64 {
        self.last_wall
    }

    /// Appends at the current wall clock, never going backwards. Returns the
    /// event as stored.
    pub fn append(&mut self, payload: EventPayload) -> Result<SessionEvent, LogError> {
        let wall = now_ms().max(self.last_wall);
        self.append_at(payload, wall)
    }

    pub fn append_at(&mut self, payload: EventPayload, wall_time: u64) -> Result<SessionEvent, LogError> {
        if wall_time < self.last_wall {
            return Err(LogError::NonMonotone { last: self.last_wall, got: wall_time });
        }
        let payload = match payload {
            EventPayload::Utterance(mut u) if !self.history => {
                u.text = REDACTED.into();
                EventPayload::Utterance(u)
            }
            p => p,
        };
        let event = SessionEvent::new(payload, wall_time);
        let mut line = serde_json::to_string(&event).map_err(io::Error::other)?;
        line.push('\n');
        let before = self.store.len()?;
        if let Err(e) = self.store.append(line.as_bytes()) {
            // Truncation can itself fail; the original error is what matters.
            let _ = self.store.truncate(before);
            return Err(e.into());
        }
        self.last_wall = wall_time;
        Ok(event)
    }
}

pub fn read_log(path: &Path) -> Result<Vec<SessionEvent>, LogError> {
    let reader = BufReader::new(File::open(path)?);
    let mut events = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let event = serde_json::from_str(&line)
            .map_err(|source| LogError::Parse { path: path.into(), line: i + 1, source })?;
        events.push(event);
    }
    Ok(events)
}

/// The newest persisted score set in a log.
pub fn latest_scores(path: &Path) -> Result<Option<BiomarkerScoreSet>, LogError> {
    Ok(read_log(path)?.into_iter().rev().find_map(|e| match e.payload {
        EventPayload::Scores(s) => Some(s),
        _ => None,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use cogspeech_core::{Speaker, UtteranceRecord};

    fn utterance(text: &str) -> EventPayload {
        EventPayload::Utterance(UtteranceRecord::new("s1", Speaker::Patient, text, 0, 900).unwrap())
    }

    fn scores() -> EventPayload {
        EventPayload::Scores(BiomarkerScoreSet::new(5000, [Some(0.2), None, Some(0.4), None, None, None]).unwrap())
    }

    #[test]
    fn redaction_follows_history_flag() {
        let dir = tempfile::tempdir().unwrap();
        let mut off = SessionLog::open(dir.path(), "off", false).unwrap();
        let stored = off.append(utterance("my secret")).unwrap();
        let EventPayload::Utterance(u) = &stored.payload else { panic!() };
        assert_eq!(u.text, REDACTED);
        assert_eq!(off.append(scores()).unwrap().payload, scores());

        let mut on = SessionLog::open(dir.path(), "on", true).unwrap();
        assert_eq!(on.append(utterance("my secret")).unwrap().payload, utterance("my secret"));
    }

    #[test]
    fn round_trip_and_key_order() {
        let dir = tempfile::tempdir().unwrap();
        let mut log = SessionLog::open(dir.path(), "rt", true).unwrap();
        let written = vec![
            log.append_at(utterance("hello there"), 10).unwrap(),
            log.append_at(scores(), 10).unwrap(),
            log.append_at(EventPayload::Response { text: "hi \"you\"\n".into() }, 12).unwrap(),
            log.append_at(EventPayload::Error { code: "TIMEOUT".into(), message: "slow".into() }, 20).unwrap(),
        ];
        let path = log_path(dir.path(), "rt").unwrap();
        assert_eq!(read_log(&path).unwrap(), written);
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.lines().next().unwrap().starts_with(r#"{"kind":"UTTERANCE","payload":{"session_id":"s1""#));
        assert!(text.lines().all(|l| l
            .rsplit_once(r#","wall_time":"#)
            .is_some_and(|(_, t)| t.strip_suffix('}').is_some_and(|t| t.parse::<u64>().is_ok()))));
        assert_eq!(latest_scores(&path).unwrap(), Some(match scores() { EventPayload::Scores(s) => s, _ => unreachable!() }));
    }

    #[test]
    fn reopening_continues_wall_time() {
        let dir = tempfile::tempdir().unwrap();
        SessionLog::open(dir.path(), "w", false).unwrap().append_at(scores(), u64::MAX - 5).unwrap();
        let mut again = SessionLog::open(dir.path(), "w", false).unwrap();
        assert_eq!(again.last_wall_time(), u64::MAX - 5);
        assert!(matches!(again.append_at(scores(), 3), Err(LogError::NonMonotone { .. })));
        assert_eq!(again.append(scores()).unwrap().wall_time, u64::MAX - 5);
    }

    #[test]
    fn rejects_unsafe_ids() {
        for id in ["", "../x", "a/b", ".hidden", "sp ace"] {
            assert!(!valid_session_id(id), "{id}");
        }
        assert!(valid_session_id("session-01_a.b"));
    }

    /// Accepts `budget` bytes, then fails mid-line.
    struct Flaky {
        data: Vec<u8>,
        budget: usize,
    }

    impl LogStore for Flaky {
        fn len(&mut self) -> io::Result<u64> {
            Ok(self.data.len() as u64)
        }
        fn append(&mut self, bytes: &[u8]) -> io::Result<()> {
            let take = bytes.len().min(self.budget);
            self.data.extend_from_slice(&bytes[..take]);
            self.budget -= take;
            if take < bytes.len() {
                return Err(io::Error::new(io::ErrorKind::StorageFull, "disk full"));
            }
            Ok(())
        }
        fn truncate(&mut self, len: u64) -> io::Result<()> {
            self.data.truncate(len as usize);
            Ok(())
        }
    }

    #[test]
    fn storage_failure_leaves_no_partial_line() {
        let mut log = SessionLog::with_store(Flaky { data: Vec::new(), budget: 150 }, true);
        log.append_at(scores(), 1).unwrap();
        let good = log.store.data.clone();
        let err = log.append_at(utterance("a rather long utterance that will not fit"), 2).unwrap_err();
        assert!(matches!(err, LogError::Io(ref e) if e.kind() == io::ErrorKind::StorageFull));
        assert_eq!(log.store.data, good);
        assert_eq!(log.last_wall_time(), 1);
    }

    #[test]
    fn full_device_propagates() {
        let Ok(file) = OpenOptions::new().append(true).open("/dev/full") else { return };
        let mut log = SessionLog::with_store(file, false);
        assert!(log.append_at(scores(), 1).is_err());
    }
}
