//! 1T1R crossbar array with two operating modes.
//!
//! *Extraction* drives the rows (BLs) with positive pulses and the columns
//! (SLs) with negative pulses slot by slot; every device integrates the
//! differential voltage, so coincident pulses (1.6 V across the device)
//! dominate single-sided ones (0.8 V) by two orders of magnitude.
//!
//! *Compute* is DAC-less and bit-serial: operands are applied as binary bit
//! planes at the compute read voltage, each plane's column current is
//! digitized by a uniform ADC, and a shift-and-add over the planes
//! reconstructs the weighted sum.

use ndarray::Array2;

use crate::device::{self, DeviceParams, DeviceState, VoltageInterval};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::waveform::PulseTrain;

/// Compute-mode read voltage (V). Binary operands drive rows at this level,
/// which stays at the device's disturb margin.
pub const COMPUTE_READ_VOLTAGE: f64 = 1.0;

/// Uniform ADC configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdcConfig<F> {
    /// Resolution in bits.
    pub bits: u32,
    /// Current mapped to the top code (A).
    pub full_scale: F,
    /// Sampling speed metadata (S/s); not used by the math.
    pub sampling: F,
}

impl<F: Real> AdcConfig<F> {
    pub fn new(bits: u32, full_scale: F) -> Result<Self> {
        if bits < 1 {
            return Err(Error::InvalidParam("ADC needs at least 1 bit".into()));
        }
        if full_scale <= F::zero() {
            return Err(Error::InvalidParam("ADC full scale must be positive".into()));
        }
        Ok(Self { bits, full_scale, sampling: F::c(1e9) })
    }

    /// Worst-case column current for `rows` devices at `w = 1`; using it as
    /// full scale guarantees no clipping in ideal mode.
    pub fn full_scale_for<FF: Real>(rows: usize, params: &DeviceParams<FF>) -> FF {
        let imax = device::current(DeviceState::new(FF::one()), params, FF::c(COMPUTE_READ_VOLTAGE));
        imax * FF::from_usize(rows).unwrap()
    }

    fn max_code(&self) -> u64 {
        (1u64 << self.bits) - 1
    }

    /// Digitizes a current: returns (code, clipped).
    fn quantize(&self, current: F) -> (u64, bool) {
        let max = self.max_code();
        let x = current / self.full_scale * F::from_u64(max).unwrap();
        if x <= F::zero() {
            (0, false)
        } else if x >= F::from_u64(max).unwrap() {
            (max, current > self.full_scale)
        } else {
            (x.round().to_u64().unwrap(), false)
        }
    }

    /// Current value of one LSB.
    pub fn lsb(&self) -> F {
        self.full_scale / F::from_u64(self.max_code()).unwrap()
    }
}

/// Quantized weight matrix for bit-serial application.
#[derive(Debug, Clone, PartialEq)]
pub struct BitSerialWeights {
    codes: Array2<u64>,
    bit_width: u32,
}

impl BitSerialWeights {
    /// Quantizes real weights in `[0, 1]` to `bit_width`-bit codes.
    pub fn quantize<F: Real>(weights: &Array2<F>, bit_width: u32) -> Result<Self> {
        if bit_width < 1 || bit_width > 32 {
            return Err(Error::InvalidParam("weight bit width must be in 1..=32".into()));
        }
        let max = (1u64 << bit_width) - 1;
        let maxf = F::from_u64(max).unwrap();
        let mut codes = Array2::zeros(weights.raw_dim());
        for (c, w) in codes.iter_mut().zip(weights.iter()) {
            if *w < F::zero() || *w > F::one() {
                return Err(Error::InvalidParam(format!("weight {w} outside [0, 1]")));
            }
            *c = (*w * maxf).round().to_u64().unwrap();
        }
        Ok(Self { codes, bit_width })
    }

    pub fn bit_width(&self) -> u32 {
        self.bit_width
    }

    pub fn shape(&self) -> (usize, usize) {
        let s = self.codes.dim();
        (s.0, s.1)
    }

    pub fn code(&self, i: usize, j: usize) -> u64 {
        self.codes[(i, j)]
    }

    /// Dequantized weight, `code / (2^bits - 1)`.
    pub fn dequantized<F: Real>(&self, i: usize, j: usize) -> F {
        F::from_u64(self.codes[(i, j)]).unwrap() / F::from_u64((1u64 << self.bit_width) - 1).unwrap()
    }
}

/// Result of a bit-serial compute pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ComputeOutput<F> {
    /// Reconstructed weighted sums, one per selected column.
    pub values: Vec<F>,
    /// Number of ADC samples that saturated at the top code.
    pub clipped_samples: usize,
}

/// A 1T1R array: per-device state plus a word-line enable mask.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossbarArray<F> {
    devices: Array2<DeviceState<F>>,
    params: DeviceParams<F>,
    wl_enable: Vec<bool>,
}

impl<F: Real> CrossbarArray<F> {
    /// New array with every device pre-set to the lowest conductance (w = 0)
    /// and all word lines enabled.
    pub fn new(rows: usize, cols: usize, params: DeviceParams<F>) -> Result<Self> {
        params.validate()?;
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParam("array dimensions must be nonzero".into()));
        }
        Ok(Self {
            devices: Array2::from_elem((rows, cols), DeviceState::default()),
            params,
            wl_enable: vec![true; rows],
        })
    }

    pub fn rows(&self) -> usize {
        self.devices.nrows()
    }

    pub fn cols(&self) -> usize {
        self.devices.ncols()
    }

    pub fn params(&self) -> &DeviceParams<F> {
        &self.params
    }

    pub fn state(&self, i: usize, j: usize) -> DeviceState<F> {
        self.devices[(i, j)]
    }

    /// Directly programs one device state (used to deploy trained weights).
    pub fn program(&mut self, i: usize, j: usize, state: DeviceState<F>) {
        self.devices[(i, j)] = state;
    }

    /// Resets every device to w = 0.
    pub fn preset(&mut self) {
        self.devices.fill(DeviceState::default());
    }

    pub fn set_wl_enable(&mut self, mask: Vec<bool>) -> Result<()> {
        if mask.len() != self.rows() {
            return Err(Error::DimensionMismatch("WL mask length != rows".into()));
        }
        self.wl_enable = mask;
        Ok(())
    }

    /// Runs one extraction pass: row `i` sees `+amplitude` when train `i`
    /// fires, column `j` sees `-amplitude` when train `j` fires, and each
    /// enabled device integrates `BL_i - SL_j` for one slot width.
    fn extract_pass(&mut self, trains: &[PulseTrain<F>]) -> Result<()> {
        if trains.len() != self.rows() || trains.len() != self.cols() {
            return Err(Error::DimensionMismatch(format!(
                "{} trains for a {}x{} array",
                trains.len(),
                self.rows(),
                self.cols()
            )));
        }
        let n_slots = trains[0].len();
        if trains.iter().any(|t| t.len() != n_slots) {
            return Err(Error::DimensionMismatch("pulse trains differ in slot count".into()));
        }
        let amplitude = trains[0].amplitude;
        let slot_width = trains[0].slot_width;
        for k in 0..n_slots {
            for i in 0..self.rows() {
                if !self.wl_enable[i] {
                    continue;
                }
                let bl = if trains[i].slots[k] { amplitude } else { F::zero() };
                for j in 0..self.cols() {
                    let sl = if trains[j].slots[k] { -amplitude } else { F::zero() };
                    let v = bl - sl;
                    if v != F::zero() {
                        self.devices[(i, j)] = device::step(
                            self.devices[(i, j)],
                            &self.params,
                            VoltageInterval { voltage: v, duration: slot_width },
                        );
                    }
                }
            }
        }
        Ok(())
    }

    /// Correlation extraction over one encoded window: the positive pass runs
    /// first, then the negative pass.
    pub fn extract(
        &mut self,
        positive_trains: &[PulseTrain<F>],
        negative_trains: &[PulseTrain<F>],
    ) -> Result<()> {
        if !self.wl_enable.iter().all(|e| *e) {
            return Err(Error::InvalidParam(
                "extraction requires all word lines enabled".into(),
            ));
        }
        self.extract_pass(positive_trains)?;
        self.extract_pass(negative_trains)
    }

    /// Reads the conductance of every device at the read voltage.
    /// Non-destructive in ideal mode.
    pub fn read_map(&self) -> Array2<F> {
        self.devices.map(|s| device::conductance(*s, &self.params))
    }

    /// Device current at the compute read voltage.
    fn compute_current(&self, i: usize, j: usize) -> F {
        device::current(self.devices[(i, j)], &self.params, F::c(COMPUTE_READ_VOLTAGE))
    }

    /// Bit-serial weighted column reduction (first network layer).
    ///
    /// For each column `j`, weight column `j` is applied plane by plane on
    /// the BLs: rows whose weight code has bit `b` set are driven at the
    /// compute read voltage, others stay at 0 V. The MUX selects SL column
    /// `j`, the ADC digitizes the per-plane column current, and shift-and-add
    /// reconstructs `h_j = sum_i W_ij * I_ij(V_read)` with `W` the
    /// dequantized weight.
    pub fn first_layer_compute(
        &self,
        weights: &BitSerialWeights,
        adc: &AdcConfig<F>,
    ) -> Result<ComputeOutput<F>> {
        let (wr, wc) = weights.shape();
        if wr != self.rows() || wc != self.cols() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} weights for a {}x{} array",
                wr,
                wc,
                self.rows(),
                self.cols()
            )));
        }
        let mut values = Vec::with_capacity(self.cols());
        let mut clipped = 0usize;
        let weight_denom = F::from_u64((1u64 << weights.bit_width()) - 1).unwrap();
        for j in 0..self.cols() {
            let mut acc = F::zero();
            for b in 0..weights.bit_width() {
                let mut column_current = F::zero();
                for i in 0..self.rows() {
                    if self.wl_enable[i] && weights.code(i, j) & (1u64 << b) != 0 {
                        column_current = column_current + self.compute_current(i, j);
                    }
                }
                let (code, clip) = adc.quantize(column_current);
                if clip {
                    clipped += 1;
                }
                acc = acc + F::from_u64(code << b).unwrap() * adc.lsb();
            }
            values.push(acc / weight_denom);
        }
        Ok(ComputeOutput { values, clipped_samples: clipped })
    }

    /// Bit-serial row-operand compute (second network layer).
    ///
    /// The digitized hidden activations are quantized to `bit_width` bits
    /// against their own maximum, applied plane by plane on the rows, and
    /// both column currents are digitized and shift-added. Returns one logit
    /// per column.
    pub fn second_layer_compute(
        &self,
        hidden: &[F],
        bit_width: u32,
        adc: &AdcConfig<F>,
    ) -> Result<ComputeOutput<F>> {
        if hidden.len() != self.rows() {
            return Err(Error::DimensionMismatch(format!(
                "{} hidden values for {} rows",
                hidden.len(),
                self.rows()
            )));
        }
        if hidden.iter().any(|h| *h < F::zero()) {
            return Err(Error::InvalidParam("hidden activations must be non-negative".into()));
        }
        let max_code = F::from_u64((1u64 << bit_width) - 1).unwrap();
        let h_max = hidden.iter().cloned().fold(F::zero(), F::max);
        // all-zero input: every plane is empty and the logits are exactly 0
        let h_scale = if h_max > F::zero() { h_max } else { F::one() };
        let codes: Vec<u64> = hidden
            .iter()
            .map(|h| (*h / h_scale * max_code).round().to_u64().unwrap())
            .collect();
        let mut values = Vec::with_capacity(self.cols());
        let mut clipped = 0usize;
        for j in 0..self.cols() {
            let mut acc = F::zero();
            for b in 0..bit_width {
                let mut column_current = F::zero();
                for i in 0..self.rows() {
                    if self.wl_enable[i] && codes[i] & (1u64 << b) != 0 {
                        column_current = column_current + self.compute_current(i, j);
                    }
                }
                let (code, clip) = adc.quantize(column_current);
                if clip {
                    clipped += 1;
                }
                acc = acc + F::from_u64(code << b).unwrap() * adc.lsb();
            }
            values.push(acc / max_code * h_scale);
        }
        Ok(ComputeOutput { values, clipped_samples: clipped })
    }
}

/// Rectified linear activation.
pub fn relu<F: Real>(x: F) -> F {
    x.max(F::zero())
}
