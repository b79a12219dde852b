use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Seek, SeekFrom, Write};
use std::path::Path;

use crate::{DomainEvent, StoreError};

/// First line of every log file.
pub const LOG_HEADER: &str = "ROBERTO-LOG v1";

pub(crate) trait Backend: Send {
    /// Writes one record line. Must be durable when it returns.
    fn append(&mut self, line: &str) -> io::Result<()>;
}

#[derive(Default)]
pub(crate) struct MemoryBackend;

impl Backend for MemoryBackend {
    fn append(&mut self, _line: &str) -> io::Result<()> {
        Ok(())
    }
}

pub(crate) struct FileBackend {
    file: File,
}

impl Backend for FileBackend {
    fn append(&mut self, line: &str) -> io::Result<()> {
        let mut record = String::with_capacity(line.len() + 1);
        record.push_str(line);
        record.push('\n');
        self.file.write_all(record.as_bytes())?;
        self.file.sync_data()
    }
}

/// Opens or creates a log, returning its events and a backend positioned
/// at the end. A torn final line without a newline is dropped.
pub(crate) fn open_file(path: &Path) -> Result<(Vec<DomainEvent>, FileBackend), StoreError> {
    let mut file = OpenOptions::new()
        .read(true)
        .append(true)
        .create(true)
        .open(path)?;
    if file.metadata()?.len() == 0 {
        file.write_all(format!("{LOG_HEADER}\n").as_bytes())?;
        file.sync_all()?;
        return Ok((Vec::new(), FileBackend { file }));
    }
    file.seek(SeekFrom::Start(0))?;
    let (events, good_len) = parse(BufReader::new(&file))?;
    if good_len < file.metadata()?.len() {
        tracing::warn!(path = %path.display(), "dropping torn final record");
        file.set_len(good_len)?;
        file.sync_all()?;
    }
    Ok((events, FileBackend { file }))
}

/// Reads every event of a log file.
pub fn read_log(path: &Path) -> Result<Vec<DomainEvent>, StoreError> {
    Ok(parse(BufReader::new(File::open(path)?))?.0)
}

/// Returns the events and the byte length of the well-formed prefix.
fn parse(mut reader: impl BufRead) -> Result<(Vec<DomainEvent>, u64), StoreError> {
    let corrupt = |seq, reason: String| StoreError::CorruptLog { seq, reason };
    let mut line = String::new();
    let mut offset = reader.read_line(&mut line)? as u64;
    if line.trim_end_matches('\n') != LOG_HEADER {
        return Err(corrupt(0, format!("expected header {LOG_HEADER:?}")));
    }
    let mut events: Vec<DomainEvent> = Vec::new();
    loop {
        line.clear();
        let read = reader.read_line(&mut line)?;
        if read == 0 {
            break;
        }
        let expected = events.last().map_or(1, |e| e.seq + 1);
        if !line.ends_with('\n') {
            // Torn write: never acknowledged.
            break;
        }
        let event: DomainEvent =
            serde_json::from_str(&line).map_err(|e| corrupt(expected, e.to_string()))?;
        if event.seq != expected {
            return Err(corrupt(event.seq, format!("expected seq {expected}")));
        }
        events.push(event);
        offset += read as u64;
    }
    Ok((events, offset))
}
