//! Per-window correlation feature extraction and its software oracles.
//!
//! The hardware path is encode → drive a fresh crossbar → read the
//! conductance map. The oracles are exact coincidence counting (the closed
//! form the slot-by-slot simulation must reproduce) and the Pearson
//! correlation coefficient, which is an evaluation reference only and never
//! feeds the predictor.

use ndarray::Array2;

use crate::crossbar::CrossbarArray;
use crate::device::{self, DeviceParams, DeviceState};
use crate::eegdata::LabeledWindow;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::waveform::{encode_window, EncodingConfig, PulseTrain};

/// An extracted 18x18 conductance map with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMap<F> {
    /// Conductances at the read voltage (S).
    pub values: Array2<F>,
    /// Window identifier (patient and start time).
    pub window_id: String,
    /// Hash of the configuration that produced the map.
    pub config_hash: u64,
}

impl<F: Real> CorrelationMap<F> {
    pub fn dim(&self) -> usize {
        self.values.nrows()
    }

    /// Plain-text matrix form, one row per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# window {} config {:016x}\n", self.window_id, self.config_hash));
        for row in self.values.rows() {
            let line: Vec<String> = row.iter().map(|g| format!("{g:.6e}")).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    /// Flat `(i, j, siemens)` records.
    pub fn to_records(&self) -> String {
        let mut out = String::new();
        for ((i, j), g) in self.values.indexed_iter() {
            out.push_str(&format!("{i} {j} {g:.6e}\n"));
        }
        out
    }

    /// Recovers the device state behind each conductance entry. The mapping
    /// `w -> G` is affine with positive slope, so this is exact in ideal mode.
    pub fn to_states(&self, params: &DeviceParams<F>) -> Array2<DeviceState<F>> {
        let g0 = device::conductance(DeviceState::new(F::zero()), params);
        let g1 = device::conductance(DeviceState::new(F::one()), params);
        self.values.map(|g| DeviceState::new((*g - g0) / (g1 - g0)))
    }
}

/// Runs the full hardware extraction path for one window: fresh array at
/// `w = 0`, positive pass, negative pass, conductance readout.
pub fn extract_features<F: Real>(
    window: &LabeledWindow,
    cfgs: &[EncodingConfig<F>],
    params: &DeviceParams<F>,
    config_hash: u64,
) -> Result<CorrelationMap<F>> {
    let channels: Vec<Vec<F>> = window
        .samples
        .iter()
        .map(|ch| ch.iter().map(|s| F::c(*s)).collect())
        .collect();
    let encoded = encode_window(&channels, cfgs)?;
    let pos: Vec<PulseTrain<F>> = encoded.iter().map(|(p, _)| p.clone()).collect();
    let neg: Vec<PulseTrain<F>> = encoded.iter().map(|(_, n)| n.clone()).collect();
    let n = channels.len();
    let mut array = CrossbarArray::new(n, n, *params)?;
    array.extract(&pos, &neg)?;
    Ok(CorrelationMap {
        values: array.read_map(),
        window_id: format!("{}@{}", window.patient_id, window.window_start),
        config_hash,
    })
}

/// Map after `rounds` identical presentations of the window's pulse trains
/// without resetting the array in between.
///
/// `dw/dt` does not depend on `w`, so every presentation adds the same
/// increment and the final state is exactly `rounds` times the single-pass
/// state, clamped at the device ceiling. Repetition builds usable conductance
/// contrast out of the small per-pass change, as in cumulative potentiation
/// under repeated pulses.
pub fn accumulate_rounds<F: Real>(
    map: &CorrelationMap<F>,
    params: &DeviceParams<F>,
    rounds: usize,
) -> Result<CorrelationMap<F>> {
    if rounds == 0 {
        return Err(Error::InvalidParam("accumulation needs at least one round".into()));
    }
    let scale = F::from_usize(rounds).unwrap();
    let values = map
        .to_states(params)
        .map(|s| device::conductance(DeviceState::new(s.w() * scale), params));
    Ok(CorrelationMap { values, window_id: map.window_id.clone(), config_hash: map.config_hash })
}

/// Slot-level coincidence statistics for one device pair over both passes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoincidenceCounts {
    /// Slots where both channels fire.
    pub coincident: usize,
    /// Slots where exactly one fires.
    pub single: usize,
}

/// Brute-force per-slot counting over the positive and negative passes.
pub fn coincidence_counts<F: Real>(
    pos_i: &PulseTrain<F>,
    neg_i: &PulseTrain<F>,
    pos_j: &PulseTrain<F>,
    neg_j: &PulseTrain<F>,
) -> Result<CoincidenceCounts> {
    if pos_i.len() != pos_j.len() || neg_i.len() != neg_j.len() {
        return Err(Error::DimensionMismatch("pulse trains differ in slot count".into()));
    }
    let mut coincident = 0;
    let mut single = 0;
    for (a, b) in pos_i.slots.iter().zip(&pos_j.slots).chain(neg_i.slots.iter().zip(&neg_j.slots)) {
        match (a, b) {
            (true, true) => coincident += 1,
            (true, false) | (false, true) => single += 1,
            _ => {}
        }
    }
    Ok(CoincidenceCounts { coincident, single })
}

/// Closed-form final state implied by coincidence counts:
/// `w = n_coinc·λ·sinh(2·a·η)·τ + n_single·λ·sinh(a·η)·τ`, clamped.
pub fn state_from_counts<F: Real>(
    counts: CoincidenceCounts,
    params: &DeviceParams<F>,
    amplitude: F,
    slot_width: F,
) -> DeviceState<F> {
    let two = F::c(2.0);
    let dw_coinc = params.lambda * (params.eta * two * amplitude).sinh() * slot_width;
    let dw_single = params.lambda * (params.eta * amplitude).sinh() * slot_width;
    DeviceState::new(
        F::from_usize(counts.coincident).unwrap() * dw_coinc
            + F::from_usize(counts.single).unwrap() * dw_single,
    )
}

/// Conductance map built entirely from coincidence counts; the independent
/// oracle for [`extract_features`].
pub fn oracle_map<F: Real>(
    trains: &[(PulseTrain<F>, PulseTrain<F>)],
    params: &DeviceParams<F>,
) -> Result<Array2<F>> {
    let n = trains.len();
    let amplitude = trains
        .first()
        .map(|(p, _)| p.amplitude)
        .ok_or_else(|| Error::Data("no pulse trains".into()))?;
    let slot_width = trains[0].0.slot_width;
    let mut out = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let counts =
                coincidence_counts(&trains[i].0, &trains[i].1, &trains[j].0, &trains[j].1)?;
            let state = state_from_counts(counts, params, amplitude, slot_width);
            out[(i, j)] = device::conductance(state, params);
        }
    }
    Ok(out)
}

/// Pearson correlation coefficient of two equal-length sequences.
pub fn pcc(x1: &[f64], x2: &[f64]) -> Result<f64> {
    if x1.len() != x2.len() || x1.len() < 2 {
        return Err(Error::InvalidParam("PCC needs two equal-length sequences of >= 2".into()));
    }
    let n = x1.len() as f64;
    let m1 = x1.iter().sum::<f64>() / n;
    let m2 = x2.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut v1 = 0.0;
    let mut v2 = 0.0;
    for (a, b) in x1.iter().zip(x2) {
        let d1 = a - m1;
        let d2 = b - m2;
        cov += d1 * d2;
        v1 += d1 * d1;
        v2 += d2 * d2;
    }
    if v1 == 0.0 || v2 == 0.0 {
        return Err(Error::Data("undefined PCC: zero-variance input".into()));
    }
    Ok(cov / (v1 * v2).sqrt())
}
