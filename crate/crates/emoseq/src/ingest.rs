//! Streams annotated comment records between files and [`Dataset`]s.
//!
//! Both formats carry one record per comment with the same four fields:
//!
//! - JSONL: one object per line with keys `thread_id`, `index`, `p_pos`,
//!   `p_sub`; unknown extra keys are ignored.
//! - CSV: a `thread_id,index,p_pos,p_sub` header row followed by one row per
//!   comment.
//!
//! Records may arrive in any order; reading groups them by thread, sorts by
//! index, and rejects gaps and duplicates. Probabilities are written with
//! enough digits to round-trip `f64` exactly, so `read(write(d))` reproduces
//! every thread of `d` field for field.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Comment, Dataset, Thread};

/// On-disk record format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Jsonl,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsonl" => Ok(Format::Jsonl),
            "csv" => Ok(Format::Csv),
            other => Err(Error::InvalidArgument(format!(
                "unknown format {other:?}, expected jsonl or csv"
            ))),
        }
    }
}

impl std::fmt::Display for Format {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Format::Jsonl => write!(f, "jsonl"),
            Format::Csv => write!(f, "csv"),
        }
    }
}

/// One serialized comment record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordLine {
    pub thread_id: String,
    pub index: usize,
    pub p_pos: f64,
    pub p_sub: f64,
}

const CSV_HEADER: [&str; 4] = ["thread_id", "index", "p_pos", "p_sub"];

/// Reads a dataset from `path`, labeling it with the path itself.
pub fn read_dataset(path: impl AsRef<Path>, format: Format) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset_from(
        BufReader::new(file),
        format,
        path.display().to_string(),
    )
}

/// Reads a dataset from any reader in a single pass.
pub fn read_dataset_from(
    reader: impl Read,
    format: Format,
    source_label: impl Into<String>,
) -> Result<Dataset> {
    let mut builder = ThreadBuilder::default();
    match format {
        Format::Jsonl => {
            let buf = BufReader::new(reader);
            for (line_idx, line) in buf.lines().enumerate() {
                let line_no = line_idx as u64 + 1;
                let line = line.map_err(|e| Error::Parse {
                    line: line_no,
                    message: e.to_string(),
                })?;
                if line.trim().is_empty() {
                    continue;
                }
                let record: RecordLine =
                    serde_json::from_str(&line).map_err(|e| Error::Parse {
                        line: line_no,
                        message: e.to_string(),
                    })?;
                builder.push(record, line_no)?;
            }
        }
        Format::Csv => {
            let mut csv_reader = csv::ReaderBuilder::new()
                .has_headers(true)
                .from_reader(reader);
            for row in csv_reader.deserialize::<RecordLine>() {
                let record = row.map_err(|e| Error::Parse {
                    line: e.position().map_or(0, |p| p.line()),
                    message: e.to_string(),
                })?;
                builder.push(record, 0)?;
            }
        }
    }
    builder.finish(source_label)
}

/// Writes one record per comment: threads in stable id order, comments in
/// index order. An empty dataset yields an empty JSONL file or a header-only
/// CSV file.
pub fn write_dataset(dataset: &Dataset, path: impl AsRef<Path>, format: Format) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = BufWriter::new(file);
    write_dataset_to(dataset, &mut writer, format).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })?;
    writer.flush().map_err(|e| Error::io(path, e))
}

/// Writes a dataset to any writer.
pub fn write_dataset_to(dataset: &Dataset, writer: impl Write, format: Format) -> Result<()> {
    let io_err = |e: std::io::Error| Error::io("<writer>", e);
    match format {
        Format::Jsonl => {
            let mut writer = writer;
            for record in records(dataset) {
                serde_json::to_writer(&mut writer, &record)
                    .map_err(|e| Error::io("<writer>", e.into()))?;
                writer.write_all(b"\n").map_err(io_err)?;
            }
        }
        Format::Csv => {
            let mut csv_writer = csv::WriterBuilder::new()
                .has_headers(false)
                .from_writer(writer);
            csv_writer.write_record(CSV_HEADER).map_err(csv_err)?;
            for record in records(dataset) {
                csv_writer.serialize(&record).map_err(csv_err)?;
            }
            csv_writer.flush().map_err(io_err)?;
        }
    }
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io("<writer>", io),
        other => Error::Parse {
            line: 0,
            message: format!("{other:?}"),
        },
    }
}

fn records(dataset: &Dataset) -> impl Iterator<Item = RecordLine> + '_ {
    dataset.threads.iter().flat_map(|thread| {
        thread.comments.iter().map(move |comment| RecordLine {
            thread_id: thread.id.clone(),
            index: comment.index,
            p_pos: comment.p_pos,
            p_sub: comment.p_sub,
        })
    })
}

/// Accumulates records per thread, then checks ranges, duplicates and index
/// contiguity when finishing.
#[derive(Default)]
struct ThreadBuilder {
    threads: HashMap<String, Vec<Comment>>,
}

impl ThreadBuilder {
    fn push(&mut self, record: RecordLine, line: u64) -> Result<()> {
        for (name, value) in [("p_pos", record.p_pos), ("p_sub", record.p_sub)] {
            if !(0.0..=1.0).contains(&value) {
                let at_line = if line > 0 {
                    format!(" (line {line})")
                } else {
                    String::new()
                };
                return Err(Error::domain_at(
                    value,
                    format!(
                        "{name} of thread {:?} index {}{at_line}",
                        record.thread_id, record.index
                    ),
                ));
            }
        }
        self.threads
            .entry(record.thread_id)
            .or_default()
            .push(Comment::new(record.index, record.p_pos, record.p_sub));
        Ok(())
    }

    fn finish(self, source_label: impl Into<String>) -> Result<Dataset> {
        let mut threads = Vec::with_capacity(self.threads.len());
        for (id, mut comments) in self.threads {
            comments.sort_by_key(|c| c.index);
            for (position, comment) in comments.iter().enumerate() {
                if position > 0 && comments[position - 1].index == comment.index {
                    return Err(Error::DuplicateRecord {
                        thread_id: id,
                        index: comment.index,
                    });
                }
                if comment.index != position {
                    return Err(Error::Contiguity {
                        thread_id: id,
                        expected: position,
                        found: comment.index,
                    });
                }
            }
            threads.push(Thread::new(id, comments));
        }
        Ok(Dataset::new(threads, source_label))
    }
}
