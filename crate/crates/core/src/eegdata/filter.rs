//! Zero-phase low-pass filtering.
//!
//! A 4th-order Butterworth low-pass (two cascaded biquads) applied forward
//! and backward, so the passband keeps zero phase and coincidence timing is
//! not skewed. DC gain is exactly 1.

use crate::error::{Error, Result};

/// One second-order IIR section.
#[derive(Debug, Clone, Copy)]
struct Biquad {
    b0: f64,
    b1: f64,
    b2: f64,
    a1: f64,
    a2: f64,
}

impl Biquad {
    /// RBJ-cookbook low-pass section with cutoff `fc`, quality `q`.
    fn lowpass(fc: f64, fs: f64, q: f64) -> Self {
        let w0 = 2.0 * std::f64::consts::PI * fc / fs;
        let alpha = w0.sin() / (2.0 * q);
        let cosw = w0.cos();
        let a0 = 1.0 + alpha;
        Biquad {
            b0: (1.0 - cosw) / 2.0 / a0,
            b1: (1.0 - cosw) / a0,
            b2: (1.0 - cosw) / 2.0 / a0,
            a1: -2.0 * cosw / a0,
            a2: (1.0 - alpha) / a0,
        }
    }

    fn run(&self, x: &[f64]) -> Vec<f64> {
        // start from the steady state of a constant input equal to the first
        // sample, so step transients do not leak past the reflection pad
        let x0 = x.first().copied().unwrap_or(0.0);
        let mut z1 = (1.0 - self.b0) * x0;
        let mut z2 = (self.b2 - self.a2) * x0;
        x.iter()
            .map(|&s| {
                // transposed direct form II
                let y = self.b0 * s + z1;
                z1 = self.b1 * s + z2 - self.a1 * y;
                z2 = self.b2 * s - self.a2 * y;
                y
            })
            .collect()
    }
}

// Butterworth pole-pair quality factors for order 4.
const BUTTER4_Q: [f64; 2] = [0.541_196_100_146_197, 1.306_562_964_876_376];

fn pad_reflect(x: &[f64], pad: usize) -> Vec<f64> {
    // odd reflection about the endpoints keeps the signal continuous
    let n = x.len();
    let pad = pad.min(n - 1);
    let mut out = Vec::with_capacity(n + 2 * pad);
    for k in (1..=pad).rev() {
        out.push(2.0 * x[0] - x[k]);
    }
    out.extend_from_slice(x);
    for k in 1..=pad {
        out.push(2.0 * x[n - 1] - x[n - 1 - k]);
    }
    out
}

/// Forward-backward 4th-order Butterworth low-pass of one channel.
pub fn lowpass_zero_phase(x: &[f64], cutoff: f64, fs: f64) -> Result<Vec<f64>> {
    if fs <= 2.0 * cutoff {
        return Err(Error::InvalidParam(format!(
            "sampling rate {fs} Hz cannot represent a {cutoff} Hz cutoff"
        )));
    }
    if x.is_empty() {
        return Ok(Vec::new());
    }
    let pad = 3 * 8; // a few filter lengths of edge padding
    let mut y = pad_reflect(x, pad);
    for q in BUTTER4_Q {
        y = Biquad::lowpass(cutoff, fs, q).run(&y);
    }
    y.reverse();
    for q in BUTTER4_Q {
        y = Biquad::lowpass(cutoff, fs, q).run(&y);
    }
    y.reverse();
    let pad = pad.min(x.len() - 1);
    Ok(y[pad..pad + x.len()].to_vec())
}
