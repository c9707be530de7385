//! Minimal EDF reader for CHB-MIT-style recordings.
//!
//! Supports the plain EDF layout: a 256-byte fixed header, one 256-byte
//! header block per signal, then data records of 16-bit little-endian
//! samples. Samples are calibrated to physical units with the per-signal
//! digital/physical ranges.

use crate::error::{Error, Result};

/// One decoded signal: label plus calibrated physical samples.
#[derive(Debug, Clone)]
pub struct EdfSignal {
    pub label: String,
    pub physical_dimension: String,
    pub samples_per_record: usize,
    pub samples: Vec<f64>,
}

/// A parsed EDF file.
#[derive(Debug, Clone)]
pub struct EdfFile {
    pub num_records: usize,
    pub record_duration: f64,
    pub signals: Vec<EdfSignal>,
}

impl EdfFile {
    /// Sampling rate of one signal in Hz.
    pub fn sampling_rate(&self, signal: usize) -> f64 {
        self.signals[signal].samples_per_record as f64 / self.record_duration
    }
}

fn ascii_field<'a>(bytes: &'a [u8], offset: usize, len: usize) -> Result<&'a str> {
    let slice = bytes
        .get(offset..offset + len)
        .ok_or_else(|| Error::Data("unexpected end of data in EDF header".into()))?;
    std::str::from_utf8(slice)
        .map(str::trim)
        .map_err(|_| Error::Data("non-ASCII bytes in EDF header".into()))
}

fn numeric_field<T: std::str::FromStr>(bytes: &[u8], offset: usize, len: usize, what: &str) -> Result<T> {
    let text = ascii_field(bytes, offset, len)?;
    text.parse()
        .map_err(|_| Error::Data(format!("malformed EDF header field {what}: {text:?}")))
}

/// Parses an EDF file from raw bytes.
pub fn parse_edf(bytes: &[u8]) -> Result<EdfFile> {
    if bytes.len() < 256 {
        return Err(Error::Data("EDF header truncated".into()));
    }
    let version = ascii_field(bytes, 0, 8)?;
    if version != "0" {
        return Err(Error::Data(format!("unsupported EDF version {version:?}")));
    }
    let header_bytes: usize = numeric_field(bytes, 184, 8, "header size")?;
    let num_records: i64 = numeric_field(bytes, 236, 8, "record count")?;
    let record_duration: f64 = numeric_field(bytes, 244, 8, "record duration")?;
    let ns: usize = numeric_field(bytes, 252, 4, "signal count")?;
    if ns == 0 {
        return Err(Error::Data("EDF file declares zero signals".into()));
    }
    let expected_header = 256 + ns * 256;
    if header_bytes != expected_header {
        return Err(Error::Data(format!(
            "inconsistent EDF header size: declared {header_bytes}, expected {expected_header}"
        )));
    }
    if bytes.len() < expected_header {
        return Err(Error::Data("unexpected end of data in EDF signal headers".into()));
    }
    // unknown record count (-1) is resolved from the file length below
    let labels_off = 256; // 16 bytes each
    let physdim_off = 256 + (16 + 80) * ns; // 8 bytes each
    let physmin_off = physdim_off + 8 * ns;
    let physmax_off = physmin_off + 8 * ns;
    let digmin_off = physmax_off + 8 * ns;
    let digmax_off = digmin_off + 8 * ns;
    let spr_off = digmax_off + 8 * ns + 80 * ns; // after prefiltering

    struct SigMeta {
        label: String,
        dim: String,
        gain: f64,
        offset: f64,
        spr: usize,
    }
    let mut metas = Vec::with_capacity(ns);
    for k in 0..ns {
        let label = ascii_field(bytes, labels_off + 16 * k, 16)?.to_string();
        let dim = ascii_field(bytes, physdim_off + 8 * k, 8)?.to_string();
        let phys_min: f64 = numeric_field(bytes, physmin_off + 8 * k, 8, "physical minimum")?;
        let phys_max: f64 = numeric_field(bytes, physmax_off + 8 * k, 8, "physical maximum")?;
        let dig_min: f64 = numeric_field(bytes, digmin_off + 8 * k, 8, "digital minimum")?;
        let dig_max: f64 = numeric_field(bytes, digmax_off + 8 * k, 8, "digital maximum")?;
        let spr: usize = numeric_field(bytes, spr_off + 8 * k, 8, "samples per record")?;
        if dig_max == dig_min {
            return Err(Error::Data(format!("signal {label:?} has a degenerate digital range")));
        }
        let gain = (phys_max - phys_min) / (dig_max - dig_min);
        metas.push(SigMeta { label, dim, gain, offset: phys_min - gain * dig_min, spr });
    }

    let record_len: usize = metas.iter().map(|m| 2 * m.spr).sum();
    let data = &bytes[expected_header..];
    let num_records = if num_records >= 0 {
        num_records as usize
    } else if record_len == 0 {
        0
    } else {
        data.len() / record_len
    };
    if data.len() < num_records * record_len {
        return Err(Error::Data("unexpected end of data in EDF records".into()));
    }

    let mut signals: Vec<EdfSignal> = metas
        .iter()
        .map(|m| EdfSignal {
            label: m.label.clone(),
            physical_dimension: m.dim.clone(),
            samples_per_record: m.spr,
            samples: Vec::with_capacity(num_records * m.spr),
        })
        .collect();

    let mut cursor = 0usize;
    for _ in 0..num_records {
        for (sig, meta) in signals.iter_mut().zip(&metas) {
            for _ in 0..meta.spr {
                let raw = i16::from_le_bytes([data[cursor], data[cursor + 1]]);
                sig.samples.push(raw as f64 * meta.gain + meta.offset);
                cursor += 2;
            }
        }
    }

    Ok(EdfFile { num_records, record_duration, signals })
}

/// Builds a minimal single-data-block EDF byte stream. Used by tests and the
/// synthetic-data tooling; not a general-purpose writer.
pub fn build_edf(
    signals: &[(&str, &[i16])],
    phys_range: (f64, f64),
    dig_range: (i16, i16),
    record_duration: f64,
) -> Vec<u8> {
    fn field(out: &mut Vec<u8>, text: &str, width: usize) {
        let mut bytes = text.as_bytes().to_vec();
        bytes.resize(width, b' ');
        out.extend_from_slice(&bytes);
    }
    let ns = signals.len();
    let mut out = Vec::new();
    field(&mut out, "0", 8);
    field(&mut out, "test patient", 80);
    field(&mut out, "test recording", 80);
    field(&mut out, "01.01.20", 8);
    field(&mut out, "00.00.00", 8);
    field(&mut out, &(256 + ns * 256).to_string(), 8);
    field(&mut out, "", 44);
    field(&mut out, "1", 8);
    field(&mut out, &record_duration.to_string(), 8);
    field(&mut out, &ns.to_string(), 4);
    for (label, _) in signals {
        field(&mut out, label, 16);
    }
    for _ in signals {
        field(&mut out, "", 80);
    }
    for _ in signals {
        field(&mut out, "uV", 8);
    }
    for _ in signals {
        field(&mut out, &phys_range.0.to_string(), 8);
    }
    for _ in signals {
        field(&mut out, &phys_range.1.to_string(), 8);
    }
    for _ in signals {
        field(&mut out, &dig_range.0.to_string(), 8);
    }
    for _ in signals {
        field(&mut out, &dig_range.1.to_string(), 8);
    }
    for _ in signals {
        field(&mut out, "", 80);
    }
    for (_, data) in signals {
        field(&mut out, &data.len().to_string(), 8);
    }
    for _ in signals {
        field(&mut out, "", 32);
    }
    for (_, data) in signals {
        for s in *data {
            out.extend_from_slice(&s.to_le_bytes());
        }
    }
    out
}
