//! Seeded synthetic EEG generator.
//!
//! Channels are built from a shared common source plus independent noise, so
//! the pairwise correlation is controlled directly: with mixing coefficient
//! `rho`, `x_i = sqrt(rho)·common + sqrt(1-rho)·own_i` has expected pairwise
//! Pearson correlation `rho`. An optional preictal regime raises `rho` in
//! the horizon before each scripted seizure, which raises inter-channel
//! pulse coincidence after thresholding.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Recording;

/// Parameters of one synthetic recording.
#[derive(Debug, Clone)]
pub struct SyntheticProfile {
    pub channels: usize,
    pub sampling_rate: f64,
    pub duration_sec: f64,
    /// Baseline cross-channel correlation in [0, 1).
    pub rho: f64,
    /// Correlation during the preictal regime.
    pub preictal_rho: f64,
    /// Scripted seizure onsets (s); each lasts `seizure_len_sec`.
    pub seizure_onsets: Vec<f64>,
    pub seizure_len_sec: f64,
    /// How long before each onset the elevated-coincidence regime holds (s).
    pub preictal_span_sec: f64,
    /// Output amplitude scale (uV).
    pub amplitude_uv: f64,
    /// One-pole coloring coefficient in [0, 1); 0 leaves white noise.
    pub coloring: f64,
}

impl Default for SyntheticProfile {
    fn default() -> Self {
        Self {
            channels: 18,
            sampling_rate: 256.0,
            duration_sec: 3600.0,
            rho: 0.1,
            preictal_rho: 0.1,
            seizure_onsets: Vec::new(),
            seizure_len_sec: 60.0,
            preictal_span_sec: 300.0,
            amplitude_uv: 50.0,
            coloring: 0.0,
        }
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller, one value per call
    let u1: f64 = rng.gen_range(1e-300..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Generates a deterministic synthetic recording for the given seed.
pub fn synthesize(profile: &SyntheticProfile, seed: u64) -> Recording {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = (profile.duration_sec * profile.sampling_rate).round() as usize;
    let mut samples = vec![Vec::with_capacity(n); profile.channels];
    let mut colored_state = vec![0.0f64; profile.channels];
    let a = profile.coloring;

    for k in 0..n {
        let t = k as f64 / profile.sampling_rate;
        let preictal = profile
            .seizure_onsets
            .iter()
            .any(|onset| t >= onset - profile.preictal_span_sec && t < *onset);
        let rho = if preictal { profile.preictal_rho } else { profile.rho };
        let common = gaussian(&mut rng);
        for (ch, out) in samples.iter_mut().enumerate() {
            let own = gaussian(&mut rng);
            let mixed = rho.sqrt() * common + (1.0 - rho).sqrt() * own;
            let v = if a > 0.0 {
                colored_state[ch] = a * colored_state[ch] + (1.0 - a) * mixed;
                colored_state[ch]
            } else {
                mixed
            };
            out.push(v * profile.amplitude_uv);
        }
    }

    let channels = super::PAPER_CHANNELS
        .iter()
        .cycle()
        .take(profile.channels)
        .map(|s| s.to_string())
        .collect();
    Recording {
        patient_id: format!("synthetic-{seed}"),
        channels,
        sampling_rate: profile.sampling_rate,
        samples,
        seizures: profile
            .seizure_onsets
            .iter()
            .map(|s| (*s, s + profile.seizure_len_sec))
            .collect(),
        start_offset_sec: 0.0,
        source: format!("synthetic(seed={seed})"),
    }
}
