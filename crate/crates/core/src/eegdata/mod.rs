//! Ingestion, preprocessing, windowing and labeling of EEG recordings.
//!
//! Recordings come from EDF files plus CHB-MIT-style annotation summaries, a
//! plain CSV fallback, or the seeded synthetic generator. Windows are
//! non-overlapping 3 s segments labeled preictal (fully inside the horizon
//! before a seizure onset) or interictal (at least four hours away from any
//! seizure); everything else is dropped.

pub mod annotations;
pub mod edf;
pub mod filter;
pub mod synth;

pub use annotations::{parse_annotations, FileAnnotations};
pub use edf::{parse_edf, EdfFile};
pub use filter::lowpass_zero_phase;
pub use synth::{synthesize, SyntheticProfile};

use crate::error::{Error, Result};

/// Window length used throughout the pipeline (s).
pub const WINDOW_SECONDS: f64 = 3.0;
/// Two seizures closer than this count as one event (s).
pub const SEIZURE_MERGE_GAP: f64 = 30.0 * 60.0;
/// Interictal windows must be this far from any seizure (s).
pub const INTERICTAL_MARGIN: f64 = 4.0 * 3600.0;
/// Default preictal horizon (s).
pub const DEFAULT_HORIZON: f64 = 30.0 * 60.0;

/// The 18 bipolar channels retained for analysis, in canonical order.
pub const PAPER_CHANNELS: [&str; 18] = [
    "FP1-F3", "F3-C3", "C3-P3", "P3-O1", "FP2-F4", "F4-C4", "C4-P4", "P4-O2", "FP1-F7", "F7-T7",
    "T7-P7", "P7-O1", "FP2-F8", "F8-T8", "T8-P8", "P8-O2", "FZ-CZ", "CZ-PZ",
];

/// Window class for the prediction task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Preictal,
    Interictal,
}

/// One multichannel recording on a patient's absolute timeline.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub patient_id: String,
    pub channels: Vec<String>,
    pub sampling_rate: f64,
    /// Per-channel sample sequences (uV); all the same length.
    pub samples: Vec<Vec<f64>>,
    /// Seizure intervals in seconds from recording start.
    pub seizures: Vec<(f64, f64)>,
    /// Position of this recording's first sample on the patient timeline (s).
    pub start_offset_sec: f64,
    /// Provenance (file name or generator tag).
    pub source: String,
}

impl Recording {
    pub fn duration_sec(&self) -> f64 {
        self.samples.first().map_or(0.0, |ch| ch.len() as f64) / self.sampling_rate
    }

    /// Seizure intervals shifted onto the patient timeline.
    pub fn absolute_seizures(&self) -> Vec<(f64, f64)> {
        self.seizures
            .iter()
            .map(|(s, e)| (s + self.start_offset_sec, e + self.start_offset_sec))
            .collect()
    }

    /// Reorders channels into the canonical 18-channel montage, failing
    /// loudly with the list of missing labels.
    pub fn select_paper_channels(&self) -> Result<Recording> {
        let mut missing = Vec::new();
        let mut picked = Vec::with_capacity(PAPER_CHANNELS.len());
        for want in PAPER_CHANNELS {
            match self.channels.iter().position(|c| c == want) {
                Some(idx) => picked.push(idx),
                None => missing.push(want),
            }
        }
        if !missing.is_empty() {
            return Err(Error::Data(format!(
                "recording {} is missing channels: {}",
                self.source,
                missing.join(", ")
            )));
        }
        Ok(Recording {
            channels: PAPER_CHANNELS.iter().map(|s| s.to_string()).collect(),
            samples: picked.iter().map(|&i| self.samples[i].clone()).collect(),
            ..self.clone()
        })
    }

    /// Zero-phase low-pass of every channel.
    pub fn filter_lowpass(&self, cutoff: f64) -> Result<Recording> {
        let samples = self
            .samples
            .iter()
            .map(|ch| lowpass_zero_phase(ch, cutoff, self.sampling_rate))
            .collect::<Result<Vec<_>>>()?;
        Ok(Recording { samples, ..self.clone() })
    }
}

/// One labeled 3 s window.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledWindow {
    pub patient_id: String,
    /// Absolute start time on the patient timeline (s).
    pub window_start: f64,
    /// Per-channel samples, `channels x (3 s * sampling rate)`.
    pub samples: Vec<Vec<f64>>,
    pub label: Label,
    pub source: String,
}

/// Merges seizures separated by less than [`SEIZURE_MERGE_GAP`].
/// Input must be sorted by start time.
pub fn merge_seizures(intervals: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(intervals.len());
    for &(start, end) in intervals {
        match out.last_mut() {
            Some(prev) if start - prev.1 <= SEIZURE_MERGE_GAP => prev.1 = prev.1.max(end),
            _ => out.push((start, end)),
        }
    }
    out
}

/// Cuts every recording into non-overlapping 3 s windows and labels them.
///
/// Labels are computed against the merged seizure list of the whole
/// recording set, so file boundaries do not influence the result.
pub fn label_windows(recordings: &[Recording], horizon_sec: f64) -> Result<Vec<LabeledWindow>> {
    let mut seizures: Vec<(f64, f64)> = recordings
        .iter()
        .flat_map(|r| r.absolute_seizures())
        .collect();
    seizures.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let seizures = merge_seizures(&seizures);

    let mut out = Vec::new();
    for rec in recordings {
        let win_len = (WINDOW_SECONDS * rec.sampling_rate).round() as usize;
        if win_len == 0 {
            return Err(Error::InvalidParam("zero-length window".into()));
        }
        let n_samples = rec.samples.first().map_or(0, Vec::len);
        let n_windows = n_samples / win_len;
        for k in 0..n_windows {
            let t0 = rec.start_offset_sec + k as f64 * WINDOW_SECONDS;
            let t1 = t0 + WINDOW_SECONDS;
            let label = classify_window(t0, t1, &seizures, horizon_sec);
            let Some(label) = label else { continue };
            let samples = rec
                .samples
                .iter()
                .map(|ch| ch[k * win_len..(k + 1) * win_len].to_vec())
                .collect();
            out.push(LabeledWindow {
                patient_id: rec.patient_id.clone(),
                window_start: t0,
                samples,
                label,
                source: rec.source.clone(),
            });
        }
    }
    out.sort_by(|a, b| a.window_start.partial_cmp(&b.window_start).unwrap());
    Ok(out)
}

fn classify_window(
    t0: f64,
    t1: f64,
    merged_seizures: &[(f64, f64)],
    horizon_sec: f64,
) -> Option<Label> {
    let preictal = merged_seizures
        .iter()
        .any(|(onset, _)| t0 >= onset - horizon_sec && t1 <= *onset);
    if preictal {
        return Some(Label::Preictal);
    }
    let interictal = merged_seizures
        .iter()
        .all(|(start, end)| t1 <= start - INTERICTAL_MARGIN || t0 >= end + INTERICTAL_MARGIN);
    interictal.then_some(Label::Interictal)
}

/// All recordings of one patient.
#[derive(Debug, Clone)]
pub struct PatientData {
    pub id: String,
    pub recordings: Vec<Recording>,
}

impl PatientData {
    /// Merged seizure events on the patient timeline.
    pub fn merged_seizures(&self) -> Vec<(f64, f64)> {
        let mut seizures: Vec<(f64, f64)> =
            self.recordings.iter().flat_map(|r| r.absolute_seizures()).collect();
        seizures.sort_by(|a, b| a.partial_cmp(b).unwrap());
        merge_seizures(&seizures)
    }

    /// Total recorded time at least four hours from any seizure (s).
    pub fn interictal_seconds(&self) -> f64 {
        let forbidden: Vec<(f64, f64)> = self
            .merged_seizures()
            .iter()
            .map(|(s, e)| (s - INTERICTAL_MARGIN, e + INTERICTAL_MARGIN))
            .collect();
        self.recordings
            .iter()
            .map(|r| {
                let start = r.start_offset_sec;
                let end = start + r.duration_sec();
                subtract_measure(start, end, &forbidden)
            })
            .sum()
    }
}

/// Measure of `[start, end]` minus the union of `cut` intervals.
fn subtract_measure(start: f64, end: f64, cut: &[(f64, f64)]) -> f64 {
    let mut kept = end - start;
    let mut cursor = start;
    for &(s, e) in cut {
        // cut list is sorted and non-overlapping after expansion-merge; be
        // conservative and clip each against the remaining span
        let lo = s.max(cursor);
        let hi = e.min(end);
        if hi > lo {
            kept -= hi - lo;
            cursor = hi;
        }
    }
    kept.max(0.0)
}

/// Applies the dataset selection rule: at least two merged seizures and
/// three hours of interictal recording.
pub fn select_patients(patients: &[PatientData]) -> Vec<String> {
    patients
        .iter()
        .filter(|p| p.merged_seizures().len() >= 2 && p.interictal_seconds() >= 3.0 * 3600.0)
        .map(|p| p.id.clone())
        .collect()
}

/// Parses the CSV fallback format: optional header, then
/// `seconds, ch1, ch2, ...` rows.
pub fn parse_csv(text: &str, patient_id: &str) -> Result<Recording> {
    let mut rows: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut channels: Option<Vec<String>> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() < 2 {
            return Err(Error::parse(idx + 1, "CSV row needs time plus at least one channel"));
        }
        if rows.is_empty() && channels.is_none() && fields[0].parse::<f64>().is_err() {
            channels = Some(fields[1..].iter().map(|s| s.to_string()).collect());
            continue;
        }
        let time: f64 = fields[0]
            .parse()
            .map_err(|_| Error::parse(idx + 1, format!("bad time value {:?}", fields[0])))?;
        let values = fields[1..]
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::parse(idx + 1, format!("bad sample value {f:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some((_, first)) = rows.first() {
            if values.len() != first.len() {
                return Err(Error::parse(idx + 1, "ragged CSV row"));
            }
        }
        rows.push((time, values));
    }
    if rows.len() < 2 {
        return Err(Error::Data("CSV needs at least two sample rows".into()));
    }
    let n_ch = rows[0].1.len();
    let dt = rows[1].0 - rows[0].0;
    if dt <= 0.0 {
        return Err(Error::Data("CSV time column must be strictly increasing".into()));
    }
    let channels = channels
        .unwrap_or_else(|| (0..n_ch).map(|k| format!("ch{k}")).collect());
    if channels.len() != n_ch {
        return Err(Error::Data("CSV header width does not match rows".into()));
    }
    let mut samples = vec![Vec::with_capacity(rows.len()); n_ch];
    for (_, values) in &rows {
        for (ch, v) in values.iter().enumerate() {
            samples[ch].push(*v);
        }
    }
    Ok(Recording {
        patient_id: patient_id.to_string(),
        channels,
        sampling_rate: 1.0 / dt,
        samples,
        seizures: Vec::new(),
        start_offset_sec: rows[0].0,
        source: "csv".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_recording(
        patient: &str,
        start: f64,
        duration: f64,
        seizures: Vec<(f64, f64)>,
    ) -> Recording {
        let fs = 2.0; // coarse rate keeps labeling tests fast
        Recording {
            patient_id: patient.into(),
            channels: vec!["a".into(), "b".into()],
            sampling_rate: fs,
            samples: vec![vec![0.0; (duration * fs) as usize]; 2],
            seizures,
            start_offset_sec: start,
            source: format!("{patient}@{start}"),
        }
    }

    #[test]
    fn close_seizures_merge_into_one() {
        let merged = merge_seizures(&[(100.0, 160.0), (1000.0, 1060.0)]);
        assert_eq!(merged, vec![(100.0, 1060.0)]);
    }

    #[test]
    fn distant_seizures_stay_separate() {
        let merged = merge_seizures(&[(0.0, 60.0), (4000.0, 4060.0)]);
        assert_eq!(merged.len(), 2);
    }

    #[test]
    fn single_seizure_unchanged() {
        assert_eq!(merge_seizures(&[(5.0, 10.0)]), vec![(5.0, 10.0)]);
    }

    #[test]
    fn window_near_onset_is_preictal() {
        // seizure at t = 20000 s; the recording covers the last 1000 s before
        // onset, entirely inside the 30 min horizon
        let rec = flat_recording("p", 19000.0, 1000.0, vec![(1000.0, 1060.0)]);
        let wins = label_windows(&[rec], DEFAULT_HORIZON).unwrap();
        assert_eq!(wins.len(), 333);
        assert!(wins.iter().all(|w| w.label == Label::Preictal));
        // includes a window ending roughly ten minutes before onset
        assert!(wins.iter().any(|w| (w.window_start - 19396.0).abs() < 3.0));
    }

    #[test]
    fn window_far_from_seizures_is_interictal() {
        // seizure at 20000 s, window 5 h later
        let rec = flat_recording("p", 38000.0, 30.0, vec![(-18000.0, -17940.0)]);
        let wins = label_windows(&[rec], DEFAULT_HORIZON).unwrap();
        assert!(!wins.is_empty());
        assert!(wins.iter().all(|w| w.label == Label::Interictal));
    }

    #[test]
    fn window_one_hour_before_onset_is_dropped() {
        // recording covers exactly one window one hour before onset
        let rec = flat_recording("p", 0.0, 3.0, vec![(3600.0, 3660.0)]);
        let wins = label_windows(&[rec], DEFAULT_HORIZON).unwrap();
        assert!(wins.is_empty());
    }

    #[test]
    fn labels_are_exclusive_and_complementary() {
        let rec = flat_recording("p", 0.0, 60000.0, vec![(30000.0, 30100.0)]);
        let wins = label_windows(&[rec.clone()], DEFAULT_HORIZON).unwrap();
        let win_count = (rec.duration_sec() / WINDOW_SECONDS) as usize;
        let pre = wins.iter().filter(|w| w.label == Label::Preictal).count();
        let inter = wins.iter().filter(|w| w.label == Label::Interictal).count();
        // 30 min of preictal at 3 s windows
        assert_eq!(pre, 600);
        // dropped = everything within 4 h of the seizure except the preictal horizon
        let dropped = win_count - pre - inter;
        assert!(dropped > 0);
        // interictal = time before onset-4h plus after end+4h, in whole windows
        let expect_inter = ((30000.0_f64 - 14400.0) / 3.0).floor() as usize
            + ((60000.0_f64 - (30100.0 + 14400.0)) / 3.0).floor() as usize;
        assert!((inter as i64 - expect_inter as i64).abs() <= 2, "{inter} vs {expect_inter}");
    }

    #[test]
    fn labeling_is_invariant_to_file_boundaries() {
        // the split point sits on the 3 s window grid so both layouts
        // produce identical window start times
        let joint = flat_recording("p", 0.0, 40000.0, vec![(30000.0, 30060.0)]);
        let part_a = flat_recording("p", 0.0, 19998.0, vec![]);
        let part_b = flat_recording("p", 19998.0, 20002.0, vec![(10002.0, 10062.0)]);
        let wins_joint = label_windows(&[joint], DEFAULT_HORIZON).unwrap();
        let wins_split = label_windows(&[part_a, part_b], DEFAULT_HORIZON).unwrap();
        assert_eq!(wins_joint.len(), wins_split.len());
        for (a, b) in wins_joint.iter().zip(&wins_split) {
            assert_eq!(a.window_start, b.window_start);
            assert_eq!(a.label, b.label);
        }
    }

    #[test]
    fn patient_with_one_seizure_is_excluded() {
        let p = PatientData {
            id: "one".into(),
            recordings: vec![flat_recording("one", 0.0, 100000.0, vec![(50000.0, 50060.0)])],
        };
        assert!(select_patients(&[p]).is_empty());
    }

    #[test]
    fn patient_with_two_seizures_and_interictal_time_is_included() {
        let p = PatientData {
            id: "two".into(),
            recordings: vec![flat_recording(
                "two",
                0.0,
                200000.0,
                vec![(50000.0, 50060.0), (120000.0, 120060.0)],
            )],
        };
        assert_eq!(select_patients(&[p]), vec!["two".to_string()]);
    }

    #[test]
    fn merged_pair_counts_as_one_seizure() {
        // two seizures 10 min apart merge, leaving one event
        let p = PatientData {
            id: "merged".into(),
            recordings: vec![flat_recording(
                "merged",
                0.0,
                200000.0,
                vec![(50000.0, 50060.0), (50660.0, 50720.0)],
            )],
        };
        assert!(select_patients(&[p]).is_empty());
    }

    #[test]
    fn channel_selection_orders_and_reports_missing() {
        let mut rec = flat_recording("p", 0.0, 3.0, vec![]);
        rec.channels = PAPER_CHANNELS.iter().rev().map(|s| s.to_string()).collect();
        rec.samples = (0..18).map(|k| vec![k as f64; 48]).collect();
        let sel = rec.select_paper_channels().unwrap();
        assert_eq!(sel.channels[0], "FP1-F3");
        // reversed storage means FP1-F3 was stored last
        assert_eq!(sel.samples[0][0], 17.0);

        rec.channels[3] = "BOGUS".into();
        let err = rec.select_paper_channels().unwrap_err();
        assert!(err.to_string().contains("T8-P8"), "{err}");
    }

    #[test]
    fn csv_roundtrip_with_header() {
        let text = "t, a, b\n0.0, 1.0, 2.0\n0.5, 3.0, 4.0\n1.0, 5.0, 6.0\n";
        let rec = parse_csv(text, "csvpat").unwrap();
        assert_eq!(rec.channels, vec!["a", "b"]);
        assert_eq!(rec.sampling_rate, 2.0);
        assert_eq!(rec.samples[0], vec![1.0, 3.0, 5.0]);
        assert_eq!(rec.samples[1], vec![2.0, 4.0, 6.0]);
    }

    #[test]
    fn csv_rejects_ragged_rows() {
        let text = "0.0, 1.0, 2.0\n0.5, 3.0\n";
        let err = parse_csv(text, "p").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }
}
