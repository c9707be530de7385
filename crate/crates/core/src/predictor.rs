//! Two-layer seizure predictor: offline constrained training, crossbar
//! deployment, inference through the bit-serial compute path, and
//! event-level prediction metrics.
//!
//! The network is 18x18 -> ReLU -> 18x2 with every weight in [0, 1] (the
//! 18x2 array has no differential columns, so signed weights are not
//! representable; argmax over two non-negative columns still realizes the
//! needed decision boundaries). Training is projected gradient descent on
//! softmax cross-entropy with class-balanced mini-batches, and the forward
//! model during training matches the deployed compute semantics: the input
//! feature is the device current at the compute read voltage, including its
//! `w = 0` offset.

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::crossbar::{relu, AdcConfig, BitSerialWeights, CrossbarArray};
use crate::device::{self, DeviceParams, DeviceState};
use crate::eegdata::Label;
use crate::error::{Error, Result};
use crate::features::CorrelationMap;

/// Layer-2 column index per class.
const COL_PREICTAL: usize = 0;
const COL_INTERICTAL: usize = 1;

/// Trained network weights, both layers in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkWeights {
    /// First layer, one weight per correlation-map entry.
    pub layer1: Array2<f64>,
    /// Second layer, columns = (preictal, interictal).
    pub layer2: Array2<f64>,
    /// Bit width used when the weights are deployed.
    pub bit_width: u32,
}

impl NetworkWeights {
    pub fn validate(&self) -> Result<()> {
        let n = self.layer1.nrows();
        if self.layer1.ncols() != n {
            return Err(Error::DimensionMismatch("layer1 must be square".into()));
        }
        if self.layer2.dim() != (n, 2) {
            return Err(Error::DimensionMismatch("layer2 must be n x 2".into()));
        }
        let in_range = |w: &f64| (0.0..=1.0).contains(w);
        if self.layer1.iter().all(in_range) && self.layer2.iter().all(in_range) {
            Ok(())
        } else {
            Err(Error::InvalidParam("weights must lie in [0, 1]".into()))
        }
    }

    /// Plain-text serialization: a header line then both matrices.
    pub fn to_text(&self, seed: u64, config_hash: u64) -> String {
        let mut out = format!(
            "# eegcim-weights bits={} n={} seed={} config={:016x}\n",
            self.bit_width,
            self.layer1.nrows(),
            seed,
            config_hash
        );
        for (tag, m) in [("layer1", &self.layer1), ("layer2", &self.layer2)] {
            out.push_str(&format!("# {tag} {}x{}\n", m.nrows(), m.ncols()));
            for row in m.rows() {
                let line: Vec<String> = row.iter().map(|w| format!("{w:.12e}")).collect();
                out.push_str(&line.join(" "));
                out.push('\n');
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::Data("empty weights file".into()))?;
        if !header.starts_with("# eegcim-weights") {
            return Err(Error::Data("not a weights file".into()));
        }
        let bit_width: u32 = header
            .split_whitespace()
            .find_map(|tok| tok.strip_prefix("bits=").and_then(|v| v.parse().ok()))
            .ok_or_else(|| Error::Data("weights header missing bit width".into()))?;
        let mut matrices: Vec<Array2<f64>> = Vec::new();
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let flush = |rows: &mut Vec<Vec<f64>>, matrices: &mut Vec<Array2<f64>>| -> Result<()> {
            if rows.is_empty() {
                return Ok(());
            }
            let ncols = rows[0].len();
            let data: Vec<f64> = rows.drain(..).flatten().collect();
            let nrows = data.len() / ncols;
            matrices.push(
                Array2::from_shape_vec((nrows, ncols), data)
                    .map_err(|e| Error::Data(format!("bad weight matrix: {e}")))?,
            );
            Ok(())
        };
        for (idx, line) in lines {
            let line = line.trim();
            if line.starts_with('#') {
                flush(&mut rows, &mut matrices)?;
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>()
                        .map_err(|_| Error::parse(idx + 1, format!("bad weight {tok:?}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        flush(&mut rows, &mut matrices)?;
        if matrices.len() != 2 {
            return Err(Error::Data(format!("expected 2 weight matrices, found {}", matrices.len())));
        }
        let layer2 = matrices.pop().unwrap();
        let layer1 = matrices.pop().unwrap();
        let w = NetworkWeights { layer1, layer2, bit_width };
        w.validate()?;
        Ok(w)
    }
}

/// Training hyperparameters.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    /// Examples drawn per class per mini-batch.
    pub batch_per_class: usize,
    pub bit_width: u32,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { epochs: 200, learning_rate: 0.5, batch_per_class: 8, bit_width: 8 }
    }
}

/// Normalized device-current feature of one map: `I(w_ij, V_read)` divided
/// by the map's mean current.
///
/// The network is positively homogeneous (weighted sums and ReLU), so a
/// per-map positive scale leaves every argmax decision identical to the one
/// the hardware makes on raw currents. Dividing by the map's own mean removes
/// the total-mass channel, which carries no shape information but would
/// otherwise dominate training: single-window conductance changes are small,
/// so the shared `w = 0` current offset dwarfs the per-device variation.
pub fn map_features(map: &CorrelationMap<f64>, params: &DeviceParams<f64>) -> Array2<f64> {
    let vread = crate::crossbar::COMPUTE_READ_VOLTAGE;
    let currents = map
        .to_states(params)
        .map(|s| device::current(*s, params, vread));
    // per-map mean 1/n keeps initial logits of order one
    let scale = currents.sum() / map.dim() as f64;
    currents.map(|i| i / scale)
}

/// Float forward pass used both by training and as the deployment oracle.
/// Returns (hidden-after-relu, logits).
fn forward(features: &Array2<f64>, l1: &Array2<f64>, l2: &Array2<f64>) -> (Vec<f64>, [f64; 2]) {
    let n = l1.nrows();
    let hidden: Vec<f64> = (0..n)
        .map(|j| relu((0..n).map(|i| l1[(i, j)] * features[(i, j)]).sum()))
        .collect();
    let mut logits = [0.0; 2];
    for c in 0..2 {
        logits[c] = (0..n).map(|j| l2[(j, c)] * hidden[j]).sum();
    }
    (hidden, logits)
}

fn softmax2(logits: [f64; 2]) -> [f64; 2] {
    let m = logits[0].max(logits[1]);
    let e0 = (logits[0] - m).exp();
    let e1 = (logits[1] - m).exp();
    [e0 / (e0 + e1), e1 / (e0 + e1)]
}

/// Projected gradient descent on softmax cross-entropy. Deterministic for a
/// given seed and data multiset (examples are canonically ordered per class
/// before sampling).
pub fn train(
    examples: &[(CorrelationMap<f64>, Label)],
    params: &DeviceParams<f64>,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<NetworkWeights> {
    let n = examples
        .first()
        .map(|(m, _)| m.dim())
        .ok_or_else(|| Error::Data("no training examples".into()))?;
    let mut by_class: [Vec<&CorrelationMap<f64>>; 2] = [Vec::new(), Vec::new()];
    for (map, label) in examples {
        let idx = if *label == Label::Preictal { COL_PREICTAL } else { COL_INTERICTAL };
        by_class[idx].push(map);
    }
    if by_class[0].is_empty() || by_class[1].is_empty() {
        return Err(Error::Data("degenerate training set: only one class present".into()));
    }
    // canonical order makes the run independent of input ordering
    for class in &mut by_class {
        class.sort_by(|a, b| a.window_id.cmp(&b.window_id));
    }
    let feats: [Vec<Array2<f64>>; 2] = [
        by_class[0].iter().map(|m| map_features(m, params)).collect(),
        by_class[1].iter().map(|m| map_features(m, params)).collect(),
    ];

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut l1 = Array2::from_shape_fn((n, n), |_| rng.gen_range(0.1..0.9));
    let mut l2 = Array2::from_shape_fn((n, 2), |_| rng.gen_range(0.1..0.9));

    for _ in 0..cfg.epochs {
        let mut g1 = Array2::<f64>::zeros((n, n));
        let mut g2 = Array2::<f64>::zeros((n, 2));
        let batch = 2 * cfg.batch_per_class;
        for _ in 0..cfg.batch_per_class {
            for class in 0..2 {
                let f = &feats[class][rng.gen_range(0..feats[class].len())];
                let (hidden, logits) = forward(f, &l1, &l2);
                let p = softmax2(logits);
                let mut dlogits = p;
                dlogits[class] -= 1.0;
                for j in 0..n {
                    for c in 0..2 {
                        g2[(j, c)] += hidden[j] * dlogits[c];
                    }
                    if hidden[j] > 0.0 {
                        let dh: f64 = (0..2).map(|c| l2[(j, c)] * dlogits[c]).sum();
                        for i in 0..n {
                            g1[(i, j)] += f[(i, j)] * dh;
                        }
                    }
                }
            }
        }
        let step = cfg.learning_rate / batch as f64;
        l1.zip_mut_with(&g1, |w, g| *w = (*w - step * g).clamp(0.0, 1.0));
        l2.zip_mut_with(&g2, |w, g| *w = (*w - step * g).clamp(0.0, 1.0));
    }

    let weights = NetworkWeights { layer1: l1, layer2: l2, bit_width: cfg.bit_width };
    weights.validate()?;
    Ok(weights)
}

/// Quantization error statistics reported by [`deploy`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantStats {
    pub max_abs_error: f64,
    pub mean_abs_error: f64,
}

/// A model mapped onto the hardware: bit-plane first-layer weights and a
/// programmed 18x2 second-layer array.
#[derive(Debug, Clone)]
pub struct DeployedModel {
    pub l1_bits: BitSerialWeights,
    pub array2: CrossbarArray<f64>,
    pub adc: AdcConfig<f64>,
    pub bit_width: u32,
    pub params: DeviceParams<f64>,
    pub quant: QuantStats,
    /// Float copies for oracle comparisons.
    weights: NetworkWeights,
}

/// Maps trained weights onto the compute path: first-layer weights become
/// bit planes, second-layer weights program device states linearly.
pub fn deploy(weights: &NetworkWeights, params: &DeviceParams<f64>) -> Result<DeployedModel> {
    weights.validate()?;
    params.validate()?;
    let n = weights.layer1.nrows();
    let l1_bits = BitSerialWeights::quantize(&weights.layer1, weights.bit_width)?;
    let mut array2 = CrossbarArray::new(n, 2, *params)?;
    for j in 0..n {
        for c in 0..2 {
            array2.program(j, c, DeviceState::new(weights.layer2[(j, c)]));
        }
    }
    let mut max_err = 0.0f64;
    let mut sum_err = 0.0f64;
    let mut count = 0usize;
    for i in 0..n {
        for j in 0..n {
            let err = (l1_bits.dequantized::<f64>(i, j) - weights.layer1[(i, j)]).abs();
            max_err = max_err.max(err);
            sum_err += err;
            count += 1;
        }
    }
    let adc = AdcConfig::new(8, AdcConfig::<f64>::full_scale_for(n, params))?;
    Ok(DeployedModel {
        l1_bits,
        array2,
        adc,
        bit_width: weights.bit_width,
        params: *params,
        quant: QuantStats { max_abs_error: max_err, mean_abs_error: sum_err / count as f64 },
        weights: weights.clone(),
    })
}

impl DeployedModel {
    /// Full crossbar inference for one correlation map.
    pub fn predict_window(&self, map: &CorrelationMap<f64>) -> Result<Label> {
        let logits = self.logits(map)?;
        Ok(classify(logits))
    }

    /// Hardware-path logits: bit-serial first layer, ReLU, bit-serial second
    /// layer.
    pub fn logits(&self, map: &CorrelationMap<f64>) -> Result<[f64; 2]> {
        let n = self.array2.rows();
        if map.dim() != n {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} map for an {n}-row model",
                map.dim(),
                map.dim()
            )));
        }
        let mut array1 = CrossbarArray::new(n, n, self.params)?;
        for ((i, j), s) in map.to_states(&self.params).indexed_iter() {
            array1.program(i, j, *s);
        }
        let hidden = array1.first_layer_compute(&self.l1_bits, &self.adc)?;
        let activated: Vec<f64> = hidden.values.iter().map(|h| relu(*h)).collect();
        let out = self.array2.second_layer_compute(&activated, self.bit_width, &self.adc)?;
        Ok([out.values[COL_PREICTAL], out.values[COL_INTERICTAL]])
    }

    /// Float oracle with identical semantics but exact arithmetic: dequantized
    /// weights, exact device currents, no ADC.
    pub fn logits_float(&self, map: &CorrelationMap<f64>) -> Result<[f64; 2]> {
        let n = self.array2.rows();
        let vread = crate::crossbar::COMPUTE_READ_VOLTAGE;
        let states = map.to_states(&self.params);
        let hidden: Vec<f64> = (0..n)
            .map(|j| {
                relu(
                    (0..n)
                        .map(|i| {
                            self.l1_bits.dequantized::<f64>(i, j)
                                * device::current(states[(i, j)], &self.params, vread)
                        })
                        .sum(),
                )
            })
            .collect();
        let mut logits = [0.0; 2];
        for c in 0..2 {
            logits[c] = (0..n)
                .map(|j| hidden[j] * device::current(self.array2.state(j, c), &self.params, vread))
                .sum();
        }
        Ok(logits)
    }

    /// Training-time float forward pass (pre-quantization weights).
    pub fn logits_trained(&self, map: &CorrelationMap<f64>) -> [f64; 2] {
        let f = map_features(map, &self.params);
        forward(&f, &self.weights.layer1, &self.weights.layer2).1
    }
}

/// Argmax with the documented tie-break: equal logits predict interictal.
pub fn classify(logits: [f64; 2]) -> Label {
    if logits[COL_PREICTAL] > logits[COL_INTERICTAL] {
        Label::Preictal
    } else {
        Label::Interictal
    }
}

/// Alarm post-processing parameters.
#[derive(Debug, Clone, Copy)]
pub struct AlarmConfig {
    /// No second alarm may fire within this many seconds of the last.
    pub refractory_sec: f64,
    /// Preictal horizon used for crediting alarms to seizures (s).
    pub horizon_sec: f64,
}

impl Default for AlarmConfig {
    fn default() -> Self {
        Self { refractory_sec: 30.0 * 60.0, horizon_sec: crate::eegdata::DEFAULT_HORIZON }
    }
}

/// One scored test window.
#[derive(Debug, Clone)]
pub struct ScoredWindow {
    pub start_sec: f64,
    pub label: Label,
    pub predicted: Label,
}

/// Event-level prediction metrics for one patient.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionMetrics {
    pub patient_id: String,
    pub n_seizures: usize,
    /// Percent of seizures with at least one alarm inside the horizon.
    pub sensitivity_pct: f64,
    /// False alarms per interictal hour (refractory applied).
    pub fpr_per_hour: f64,
    /// Average horizon actually covered by preictal data, minutes.
    pub predicted_time_min: f64,
    /// Fraction of windows classified correctly (window-level).
    pub window_accuracy: f64,
}

/// Scores a window sequence against seizure onsets.
///
/// A seizure counts as predicted when at least one alarm fires inside its
/// horizon. Alarms respect a refractory period. FPR/h counts alarms outside
/// every horizon against the interictal hours in the data.
pub fn evaluate(
    patient_id: &str,
    windows: &[ScoredWindow],
    seizure_onsets: &[f64],
    cfg: &AlarmConfig,
) -> PredictionMetrics {
    let mut sorted: Vec<&ScoredWindow> = windows.iter().collect();
    sorted.sort_by(|a, b| a.start_sec.partial_cmp(&b.start_sec).unwrap());

    // alarm times after refractory suppression
    let mut alarms: Vec<f64> = Vec::new();
    for w in &sorted {
        if w.predicted == Label::Preictal {
            let suppressed = alarms
                .last()
                .is_some_and(|last| w.start_sec - last < cfg.refractory_sec);
            if !suppressed {
                alarms.push(w.start_sec);
            }
        }
    }

    let in_horizon = |t: f64| {
        seizure_onsets
            .iter()
            .any(|onset| t >= onset - cfg.horizon_sec && t < *onset)
    };

    let predicted = seizure_onsets
        .iter()
        .filter(|onset| {
            alarms
                .iter()
                .any(|a| *a >= *onset - cfg.horizon_sec && a < onset)
        })
        .count();
    let false_alarms = alarms.iter().filter(|a| !in_horizon(**a)).count();

    let interictal_windows = sorted.iter().filter(|w| w.label == Label::Interictal).count();
    let interictal_hours =
        interictal_windows as f64 * crate::eegdata::WINDOW_SECONDS / 3600.0;
    let fpr = if interictal_hours > 0.0 { false_alarms as f64 / interictal_hours } else { 0.0 };

    // per-seizure coverage: time from the earliest preictal window to onset
    let mut coverage_min = 0.0;
    for onset in seizure_onsets {
        let first = sorted
            .iter()
            .filter(|w| {
                w.label == Label::Preictal
                    && w.start_sec >= onset - cfg.horizon_sec
                    && w.start_sec < *onset
            })
            .map(|w| w.start_sec)
            .fold(f64::INFINITY, f64::min);
        if first.is_finite() {
            coverage_min += (onset - first) / 60.0;
        }
    }
    let predicted_time_min = if seizure_onsets.is_empty() {
        0.0
    } else {
        coverage_min / seizure_onsets.len() as f64
    };

    let correct = sorted.iter().filter(|w| w.predicted == w.label).count();
    let window_accuracy =
        if sorted.is_empty() { 0.0 } else { correct as f64 / sorted.len() as f64 };

    PredictionMetrics {
        patient_id: patient_id.to_string(),
        n_seizures: seizure_onsets.len(),
        sensitivity_pct: if seizure_onsets.is_empty() {
            0.0
        } else {
            100.0 * predicted as f64 / seizure_onsets.len() as f64
        },
        fpr_per_hour: fpr,
        predicted_time_min,
        window_accuracy,
    }
}

/// Averages per-patient metrics the way the results table does.
pub fn average_metrics(per_patient: &[PredictionMetrics]) -> Option<PredictionMetrics> {
    if per_patient.is_empty() {
        return None;
    }
    let n = per_patient.len() as f64;
    Some(PredictionMetrics {
        patient_id: "average".into(),
        n_seizures: per_patient.iter().map(|m| m.n_seizures).sum(),
        sensitivity_pct: per_patient.iter().map(|m| m.sensitivity_pct).sum::<f64>() / n,
        fpr_per_hour: per_patient.iter().map(|m| m.fpr_per_hour).sum::<f64>() / n,
        predicted_time_min: per_patient.iter().map(|m| m.predicted_time_min).sum::<f64>() / n,
        window_accuracy: per_patient.iter().map(|m| m.window_accuracy).sum::<f64>() / n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::Array2;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params() -> DeviceParams<f64> {
        DeviceParams::default()
    }

    fn map_from_states(states: &Array2<f64>, id: &str) -> CorrelationMap<f64> {
        let p = params();
        CorrelationMap {
            values: states.map(|w| device::conductance(DeviceState::new(*w), &p)),
            window_id: id.into(),
            config_hash: 0,
        }
    }

    /// Synthetic features: interictal maps have hot diagonal, preictal maps
    /// have hot off-diagonals. Same total mass, different shape.
    fn synthetic_example(rng: &mut ChaCha8Rng, n: usize, preictal: bool, id: &str) -> (CorrelationMap<f64>, Label) {
        let mut states = Array2::from_shape_fn((n, n), |_| rng.gen_range(0.0..0.05));
        for i in 0..n {
            for j in 0..n {
                let hot = if preictal { i != j } else { i == j };
                if hot {
                    states[(i, j)] += rng.gen_range(0.3..0.5);
                }
            }
        }
        (
            map_from_states(&states, id),
            if preictal { Label::Preictal } else { Label::Interictal },
        )
    }

    fn synthetic_set(seed: u64, n: usize, per_class: usize) -> Vec<(CorrelationMap<f64>, Label)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::new();
        for k in 0..per_class {
            out.push(synthetic_example(&mut rng, n, true, &format!("pre{k}")));
            out.push(synthetic_example(&mut rng, n, false, &format!("int{k}")));
        }
        out
    }

    #[test]
    fn separable_features_train_to_high_accuracy() {
        let data = synthetic_set(1, 6, 40);
        let w = train(&data, &params(), &TrainConfig::default(), 7).unwrap();
        let model = deploy(&w, &params()).unwrap();
        let correct = data
            .iter()
            .filter(|(m, l)| classify(model.logits_trained(m)) == *l)
            .count();
        let acc = correct as f64 / data.len() as f64;
        assert!(acc >= 0.99, "training accuracy {acc}");
    }

    #[test]
    fn zero_epochs_returns_initialization() {
        let data = synthetic_set(2, 4, 4);
        let cfg = TrainConfig { epochs: 0, ..TrainConfig::default() };
        let a = train(&data, &params(), &cfg, 3).unwrap();
        let b = train(&data, &params(), &cfg, 3).unwrap();
        assert_eq!(a, b);
        // initialization depends only on the seed
        let c = train(&data, &params(), &cfg, 4).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn training_is_deterministic_per_seed() {
        let data = synthetic_set(3, 5, 10);
        let cfg = TrainConfig { epochs: 30, ..TrainConfig::default() };
        let a = train(&data, &params(), &cfg, 11).unwrap();
        let b = train(&data, &params(), &cfg, 11).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn training_is_invariant_to_input_order() {
        let mut data = synthetic_set(4, 5, 10);
        let cfg = TrainConfig { epochs: 30, ..TrainConfig::default() };
        let a = train(&data, &params(), &cfg, 11).unwrap();
        data.reverse();
        let b = train(&data, &params(), &cfg, 11).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_class_data_is_rejected() {
        let data: Vec<_> = synthetic_set(5, 4, 4)
            .into_iter()
            .filter(|(_, l)| *l == Label::Preictal)
            .collect();
        let err = train(&data, &params(), &TrainConfig::default(), 1).unwrap_err();
        assert!(err.to_string().contains("degenerate"), "{err}");
    }

    #[test]
    fn weights_stay_in_unit_interval() {
        let data = synthetic_set(6, 5, 10);
        for seed in 0..5 {
            let cfg = TrainConfig { epochs: 50, learning_rate: 5.0, ..TrainConfig::default() };
            let w = train(&data, &params(), &cfg, seed).unwrap();
            assert!(w.validate().is_ok());
        }
    }

    #[test]
    fn deploy_endpoint_weights_hit_endpoint_states() {
        let n = 3;
        let mut layer2 = Array2::zeros((n, 2));
        layer2[(0, 0)] = 1.0;
        let w = NetworkWeights {
            layer1: Array2::from_elem((n, n), 0.5),
            layer2,
            bit_width: 8,
        };
        let model = deploy(&w, &params()).unwrap();
        assert_eq!(model.array2.state(0, 0).w(), 1.0);
        assert_eq!(model.array2.state(1, 0).w(), 0.0);
    }

    #[test]
    fn quantizer_midpoint_arithmetic() {
        let n = 2;
        let w = NetworkWeights {
            layer1: Array2::from_elem((n, n), 0.5),
            layer2: Array2::from_elem((n, 2), 0.5),
            bit_width: 8,
        };
        let model = deploy(&w, &params()).unwrap();
        assert_eq!(model.l1_bits.code(0, 0), 128);
        assert_relative_eq!(model.l1_bits.dequantized::<f64>(0, 0), 128.0 / 255.0, max_relative = 1e-12);
        assert_relative_eq!(model.l1_bits.dequantized::<f64>(0, 0), 0.50196, max_relative = 1e-4);
        assert!(model.quant.max_abs_error <= 0.5 / 255.0 + 1e-12);
    }

    #[test]
    fn deployed_argmax_mostly_agrees_with_float_model() {
        let data = synthetic_set(7, 6, 30);
        let w = train(&data, &params(), &TrainConfig::default(), 5).unwrap();
        let model = deploy(&w, &params()).unwrap();
        let test = synthetic_set(8, 6, 50);
        let agree = test
            .iter()
            .filter(|(m, _)| {
                classify(model.logits(m).unwrap()) == classify(model.logits_float(m).unwrap())
            })
            .count();
        let frac = agree as f64 / test.len() as f64;
        assert!(frac >= 0.95, "argmax agreement {frac}");
    }

    #[test]
    fn uniform_map_with_equal_weights_ties_to_interictal() {
        let n = 4;
        let w = NetworkWeights {
            layer1: Array2::from_elem((n, n), 0.5),
            layer2: Array2::from_elem((n, 2), 0.5),
            bit_width: 8,
        };
        let model = deploy(&w, &params()).unwrap();
        let map = map_from_states(&Array2::zeros((n, n)), "uniform");
        assert_eq!(model.predict_window(&map).unwrap(), Label::Interictal);
    }

    #[test]
    fn trained_model_separates_end_to_end() {
        let data = synthetic_set(9, 6, 30);
        let w = train(&data, &params(), &TrainConfig::default(), 13).unwrap();
        let model = deploy(&w, &params()).unwrap();
        let test = synthetic_set(10, 6, 20);
        let correct = test
            .iter()
            .filter(|(m, l)| model.predict_window(m).unwrap() == *l)
            .count();
        let acc = correct as f64 / test.len() as f64;
        assert!(acc >= 0.9, "deployed accuracy {acc}");
    }

    fn scored(start: f64, label: Label, predicted: Label) -> ScoredWindow {
        ScoredWindow { start_sec: start, label, predicted }
    }

    #[test]
    fn perfect_classifier_metrics() {
        let onset = 10_000.0;
        let mut windows = Vec::new();
        for k in 0..100 {
            windows.push(scored(k as f64 * 3.0, Label::Interictal, Label::Interictal));
        }
        for k in 0..10 {
            let t = onset - 60.0 + k as f64 * 3.0;
            windows.push(scored(t, Label::Preictal, Label::Preictal));
        }
        let m = evaluate("p", &windows, &[onset], &AlarmConfig::default());
        assert_eq!(m.sensitivity_pct, 100.0);
        assert_eq!(m.fpr_per_hour, 0.0);
        assert_relative_eq!(m.predicted_time_min, 1.0, max_relative = 1e-9);
        assert_eq!(m.window_accuracy, 1.0);
    }

    #[test]
    fn always_negative_classifier_metrics() {
        let onset = 10_000.0;
        let mut windows = Vec::new();
        for k in 0..100 {
            windows.push(scored(k as f64 * 3.0, Label::Interictal, Label::Interictal));
        }
        windows.push(scored(onset - 30.0, Label::Preictal, Label::Interictal));
        let m = evaluate("p", &windows, &[onset], &AlarmConfig::default());
        assert_eq!(m.sensitivity_pct, 0.0);
        assert_eq!(m.fpr_per_hour, 0.0);
    }

    #[test]
    fn refractory_suppresses_rapid_alarms() {
        // three false alarms 3 s apart collapse into one
        let windows = vec![
            scored(0.0, Label::Interictal, Label::Preictal),
            scored(3.0, Label::Interictal, Label::Preictal),
            scored(6.0, Label::Interictal, Label::Preictal),
        ];
        let m = evaluate("p", &windows, &[], &AlarmConfig::default());
        let hours = 3.0 * 3.0 / 3600.0;
        assert_relative_eq!(m.fpr_per_hour, 1.0 / hours, max_relative = 1e-9);
    }

    #[test]
    fn metrics_are_monotone_under_added_windows() {
        let onset = 50_000.0;
        let base = vec![
            scored(100.0, Label::Interictal, Label::Interictal),
            scored(onset - 600.0, Label::Preictal, Label::Interictal),
        ];
        let cfg = AlarmConfig::default();
        let m0 = evaluate("p", &base, &[onset], &cfg);

        // adding a true positive never lowers sensitivity
        let mut with_tp = base.clone();
        with_tp.push(scored(onset - 300.0, Label::Preictal, Label::Preictal));
        let m1 = evaluate("p", &with_tp, &[onset], &cfg);
        assert!(m1.sensitivity_pct >= m0.sensitivity_pct);

        // adding an interictal false alarm never lowers FPR/h
        let mut with_fa = base.clone();
        with_fa.push(scored(5_000.0, Label::Interictal, Label::Preictal));
        let m2 = evaluate("p", &with_fa, &[onset], &cfg);
        assert!(m2.fpr_per_hour >= m0.fpr_per_hour);
    }

    #[test]
    fn weights_text_roundtrip() {
        let data = synthetic_set(11, 4, 5);
        let cfg = TrainConfig { epochs: 10, ..TrainConfig::default() };
        let w = train(&data, &params(), &cfg, 2).unwrap();
        let text = w.to_text(2, 0xdead_beef);
        let back = NetworkWeights::from_text(&text).unwrap();
        for (a, b) in w.layer1.iter().zip(back.layer1.iter()) {
            assert_relative_eq!(a, b, max_relative = 1e-10);
        }
        for (a, b) in w.layer2.iter().zip(back.layer2.iter()) {
            assert_relative_eq!(a, b, max_relative = 1e-10);
        }
        assert_eq!(w.bit_width, back.bit_width);
    }
}
