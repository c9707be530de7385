//! Slotted pulse trains and the dual-threshold EEG signal encoding.
//!
//! Each raw EEG sample becomes one time slot. A sample above the positive
//! threshold raises a pulse in the positive train, a sample below the
//! negative threshold raises one in the negative train; everything in between
//! stays silent. Both trains share the window's slot count, so a 3 s window
//! at 256 Hz yields 768 slots per polarity and the two sequential extraction
//! passes cover 1536 slots.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default extraction pulse amplitude (V).
pub const DEFAULT_PULSE_AMPLITUDE: f64 = 0.8;
/// Default extraction slot width (s). 1536 slots at 40 ns give the 61.44 us
/// extraction latency.
pub const DEFAULT_SLOT_WIDTH: f64 = 40e-9;

/// Pulse polarity of a train.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    Positive,
    Negative,
}

/// Per-channel encoding thresholds plus the physical pulse shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncodingConfig<F> {
    /// Positive threshold (uV); samples strictly above fire.
    pub v_pth: F,
    /// Negative threshold (uV); samples strictly below fire.
    pub v_nth: F,
    /// Amplitude of generated pulses (V).
    pub pulse_amplitude: F,
    /// Width of one slot (s).
    pub slot_width: F,
}

impl<F: Real> EncodingConfig<F> {
    pub fn new(v_pth: F, v_nth: F) -> Result<Self> {
        Self::with_shape(v_pth, v_nth, F::c(DEFAULT_PULSE_AMPLITUDE), F::c(DEFAULT_SLOT_WIDTH))
    }

    pub fn with_shape(v_pth: F, v_nth: F, pulse_amplitude: F, slot_width: F) -> Result<Self> {
        if v_pth <= v_nth {
            return Err(Error::InvalidParam("v_pth must exceed v_nth".into()));
        }
        if pulse_amplitude <= F::zero() || slot_width <= F::zero() {
            return Err(Error::InvalidParam(
                "pulse amplitude and slot width must be positive".into(),
            ));
        }
        Ok(Self { v_pth, v_nth, pulse_amplitude, slot_width })
    }
}

/// A binary pulse sequence with one bit per sample slot.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseTrain<F> {
    pub slots: Vec<bool>,
    pub amplitude: F,
    pub slot_width: F,
    pub polarity: Polarity,
}

impl<F: Real> PulseTrain<F> {
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Number of raised slots.
    pub fn count_ones(&self) -> usize {
        self.slots.iter().filter(|b| **b).count()
    }

    /// Total wall-clock duration covered by the train.
    pub fn duration(&self) -> F {
        self.slot_width * F::from_usize(self.slots.len()).unwrap()
    }

    /// Compact binary form: magic, polarity, amplitude, slot width, slot
    /// count, then packed bits (LSB-first within each byte).
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(21 + self.slots.len() / 8 + 1);
        out.extend_from_slice(b"PTRN");
        out.push(match self.polarity {
            Polarity::Positive => b'+',
            Polarity::Negative => b'-',
        });
        out.extend_from_slice(&self.amplitude.to_f64().unwrap().to_le_bytes());
        out.extend_from_slice(&self.slot_width.to_f64().unwrap().to_le_bytes());
        out.extend_from_slice(&(self.slots.len() as u32).to_le_bytes());
        let mut byte = 0u8;
        for (k, bit) in self.slots.iter().enumerate() {
            if *bit {
                byte |= 1 << (k % 8);
            }
            if k % 8 == 7 {
                out.push(byte);
                byte = 0;
            }
        }
        if self.slots.len() % 8 != 0 {
            out.push(byte);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 25 || &bytes[0..4] != b"PTRN" {
            return Err(Error::Data("not a pulse-train blob".into()));
        }
        let polarity = match bytes[4] {
            b'+' => Polarity::Positive,
            b'-' => Polarity::Negative,
            _ => return Err(Error::Data("bad polarity tag".into())),
        };
        let amplitude = f64::from_le_bytes(bytes[5..13].try_into().unwrap());
        let slot_width = f64::from_le_bytes(bytes[13..21].try_into().unwrap());
        let n = u32::from_le_bytes(bytes[21..25].try_into().unwrap()) as usize;
        let need = 25 + (n + 7) / 8;
        if bytes.len() < need {
            return Err(Error::Data("truncated pulse-train blob".into()));
        }
        let slots = (0..n)
            .map(|k| bytes[25 + k / 8] & (1 << (k % 8)) != 0)
            .collect();
        Ok(Self {
            slots,
            amplitude: F::c(amplitude),
            slot_width: F::c(slot_width),
            polarity,
        })
    }
}

impl<F: Real> fmt::Display for PulseTrain<F> {
    /// Debug text form: `+|.#..#` style, one char per slot.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.polarity {
            Polarity::Positive => '+',
            Polarity::Negative => '-',
        };
        write!(f, "{tag}|")?;
        for bit in &self.slots {
            write!(f, "{}", if *bit { '#' } else { '.' })?;
        }
        Ok(())
    }
}

/// Encodes one channel into its positive and negative pulse trains.
pub fn encode_channel<F: Real>(samples: &[F], cfg: &EncodingConfig<F>) -> Result<(PulseTrain<F>, PulseTrain<F>)> {
    if samples.is_empty() {
        return Err(Error::Data("cannot encode an empty channel".into()));
    }
    let positive = PulseTrain {
        slots: samples.iter().map(|s| *s > cfg.v_pth).collect(),
        amplitude: cfg.pulse_amplitude,
        slot_width: cfg.slot_width,
        polarity: Polarity::Positive,
    };
    let negative = PulseTrain {
        slots: samples.iter().map(|s| *s < cfg.v_nth).collect(),
        amplitude: cfg.pulse_amplitude,
        slot_width: cfg.slot_width,
        polarity: Polarity::Negative,
    };
    Ok((positive, negative))
}

/// Encodes a whole window, one threshold config per channel.
pub fn encode_window<F: Real>(
    channels: &[Vec<F>],
    cfgs: &[EncodingConfig<F>],
) -> Result<Vec<(PulseTrain<F>, PulseTrain<F>)>> {
    if channels.len() != cfgs.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} channels but {} encoding configs",
            channels.len(),
            cfgs.len()
        )));
    }
    channels
        .iter()
        .zip(cfgs)
        .map(|(ch, cfg)| encode_channel(ch, cfg))
        .collect()
}

/// Derives per-channel thresholds `mu ± k·sigma` from training windows.
///
/// `windows` is a list of windows, each a list of per-channel sample vectors
/// of identical channel count. Statistics pool all training samples of a
/// channel.
pub fn calibrate_thresholds<F: Real>(
    windows: &[Vec<Vec<F>>],
    k_sigma: F,
) -> Result<Vec<EncodingConfig<F>>> {
    let first = windows.first().ok_or_else(|| Error::Data("no calibration data".into()))?;
    let n_ch = first.len();
    let mut cfgs = Vec::with_capacity(n_ch);
    for ch in 0..n_ch {
        let mut n = 0usize;
        let mut sum = F::zero();
        for win in windows {
            if win.len() != n_ch {
                return Err(Error::DimensionMismatch("ragged calibration windows".into()));
            }
            for s in &win[ch] {
                sum = sum + *s;
                n += 1;
            }
        }
        if n == 0 {
            return Err(Error::Data("no calibration data".into()));
        }
        let nf = F::from_usize(n).unwrap();
        let mean = sum / nf;
        let mut ss = F::zero();
        for win in windows {
            for s in &win[ch] {
                let d = *s - mean;
                ss = ss + d * d;
            }
        }
        let sigma = (ss / nf).sqrt();
        if sigma == F::zero() {
            return Err(Error::Data(format!("zero variance channel {ch}")));
        }
        cfgs.push(EncodingConfig::new(mean + k_sigma * sigma, mean - k_sigma * sigma)?);
    }
    Ok(cfgs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cfg(p: f64, n: f64) -> EncodingConfig<f64> {
        EncodingConfig::new(p, n).unwrap()
    }

    #[test]
    fn silent_window_yields_empty_trains() {
        let samples = vec![0.0; 768];
        let (pos, neg) = encode_channel(&samples, &cfg(1.0, -1.0)).unwrap();
        assert_eq!(pos.count_ones(), 0);
        assert_eq!(neg.count_ones(), 0);
        assert_eq!(pos.len(), 768);
    }

    #[test]
    fn window_slot_arithmetic_matches_latency() {
        let samples = vec![0.0; 768];
        let (pos, neg) = encode_channel(&samples, &cfg(1.0, -1.0)).unwrap();
        assert_eq!(pos.len() + neg.len(), 1536);
        let total = pos.duration() + neg.duration();
        assert_relative_eq!(total, 61.44e-6, max_relative = 1e-12);
    }

    #[test]
    fn threshold_boundary_is_strict() {
        let samples = vec![1.0, 1.0 + 1e-9, -1.0, -1.0 - 1e-9];
        let (pos, neg) = encode_channel(&samples, &cfg(1.0, -1.0)).unwrap();
        assert_eq!(pos.slots, vec![false, true, false, false]);
        assert_eq!(neg.slots, vec![false, false, false, true]);
    }

    #[test]
    fn polarities_never_both_fire() {
        let samples: Vec<f64> = (0..100).map(|k| ((k * 37) % 17) as f64 - 8.0).collect();
        let (pos, neg) = encode_channel(&samples, &cfg(2.0, -2.0)).unwrap();
        for k in 0..samples.len() {
            assert!(!(pos.slots[k] && neg.slots[k]));
        }
    }

    #[test]
    fn calibrate_rejects_empty_and_degenerate() {
        assert!(calibrate_thresholds::<f64>(&[], 1.0).is_err());
        let constant = vec![vec![vec![5.0; 64]]];
        let err = calibrate_thresholds(&constant, 1.0).unwrap_err();
        assert!(err.to_string().contains("zero variance"));
    }

    #[test]
    fn calibrate_standard_normal_hits_unit_thresholds() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        // Box-Muller standard normals
        let samples: Vec<f64> = (0..100_000)
            .map(|_| {
                let u1: f64 = rng.gen_range(1e-12..1.0);
                let u2: f64 = rng.gen_range(0.0..1.0);
                (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
            })
            .collect();
        let cfgs = calibrate_thresholds(&[vec![samples]], 1.0).unwrap();
        assert!((cfgs[0].v_pth - 1.0).abs() < 0.05, "v_pth = {}", cfgs[0].v_pth);
        assert!((cfgs[0].v_nth + 1.0).abs() < 0.05, "v_nth = {}", cfgs[0].v_nth);
    }

    #[test]
    fn calibrate_is_per_channel() {
        let ch_a: Vec<f64> = (0..1000).map(|k| (k as f64 * 0.7).sin()).collect();
        let ch_b: Vec<f64> = ch_a.iter().map(|s| 10.0 * s).collect();
        let cfgs = calibrate_thresholds(&[vec![ch_a, ch_b]], 1.0).unwrap();
        assert_relative_eq!(cfgs[1].v_pth, 10.0 * cfgs[0].v_pth, max_relative = 1e-9);
    }

    #[test]
    fn display_form_marks_fired_slots() {
        let (pos, _) = encode_channel(&[0.0, 2.0, 0.0], &cfg(1.0, -1.0)).unwrap();
        assert_eq!(pos.to_string(), "+|.#.");
    }

    proptest! {
        #[test]
        fn encoding_scale_invariant(
            samples in prop::collection::vec(-100.0f64..100.0, 1..200),
            scale in 0.01f64..100.0,
        ) {
            let base = cfg(3.0, -2.0);
            let scaled_cfg = cfg(3.0 * scale, -2.0 * scale);
            let scaled: Vec<f64> = samples.iter().map(|s| s * scale).collect();
            let (p1, n1) = encode_channel(&samples, &base).unwrap();
            let (p2, n2) = encode_channel(&scaled, &scaled_cfg).unwrap();
            prop_assert_eq!(p1.slots, p2.slots);
            prop_assert_eq!(n1.slots, n2.slots);
        }

        #[test]
        fn binary_roundtrip(
            slots in prop::collection::vec(any::<bool>(), 0..300),
            negative in any::<bool>(),
        ) {
            let train = PulseTrain::<f64> {
                slots,
                amplitude: 0.8,
                slot_width: 40e-9,
                polarity: if negative { Polarity::Negative } else { Polarity::Positive },
            };
            let back = PulseTrain::<f64>::from_bytes(&train.to_bytes()).unwrap();
            prop_assert_eq!(train, back);
        }
    }
}
