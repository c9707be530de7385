//! Parser for CHB-MIT-style seizure annotation summaries.
//!
//! The summary lists, per EDF file, the number of seizures and one start/end
//! line per seizure, e.g.:
//!
//! ```text
//! File Name: chb01_03.edf
//! Number of Seizures in File: 1
//! Seizure Start Time: 2996 seconds
//! Seizure End Time: 3036 seconds
//! ```
//!
//! Later patients use numbered lines ("Seizure 1 Start Time: ..."); both
//! spellings are accepted.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Seizure intervals per EDF file name, in seconds from file start.
pub type FileAnnotations = BTreeMap<String, Vec<(f64, f64)>>;

fn parse_seconds(value: &str, line_no: usize) -> Result<f64> {
    value
        .trim()
        .trim_end_matches("seconds")
        .trim()
        .parse()
        .map_err(|_| Error::parse(line_no, format!("cannot parse seizure time {value:?}")))
}

/// Parses a summary text into per-file seizure intervals.
pub fn parse_annotations(text: &str) -> Result<FileAnnotations> {
    let mut out = FileAnnotations::new();
    let mut current: Option<String> = None;
    let mut pending_start: Option<f64> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        let Some((key, value)) = line.split_once(':') else {
            continue;
        };
        let key = key.trim();
        if key == "File Name" {
            let name = value.trim().to_string();
            out.entry(name.clone()).or_default();
            current = Some(name);
            pending_start = None;
        } else if key.starts_with("Number of Seizures") {
            // informational; the start/end lines are authoritative
        } else if key.starts_with("Seizure") && key.ends_with("Start Time") {
            if current.is_none() {
                return Err(Error::parse(line_no, "seizure time before any File Name"));
            }
            if pending_start.is_some() {
                return Err(Error::parse(line_no, "seizure start without matching end"));
            }
            pending_start = Some(parse_seconds(value, line_no)?);
        } else if key.starts_with("Seizure") && key.ends_with("End Time") {
            let file = current
                .clone()
                .ok_or_else(|| Error::parse(line_no, "seizure time before any File Name"))?;
            let start = pending_start
                .take()
                .ok_or_else(|| Error::parse(line_no, "seizure end without matching start"))?;
            let end = parse_seconds(value, line_no)?;
            if end <= start {
                return Err(Error::parse(line_no, format!("invalid interval {start}..{end}")));
            }
            out.get_mut(&file).unwrap().push((start, end));
        }
    }
    if pending_start.is_some() {
        return Err(Error::Data("summary ends with an unmatched seizure start".into()));
    }
    Ok(out)
}
