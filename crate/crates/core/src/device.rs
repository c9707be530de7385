//! Behavioral model of a single WOx memristor.
//!
//! Current readout follows
//! `I = (1 - w)·α·[1 - exp(-β·V)] + w·γ·sinh(δ·V)` and the internal state
//! obeys `dw/dt = λ·sinh(η·V)` with `w` hard-clamped to `[0, 1]`. Because the
//! state derivative does not depend on `w`, integration over a
//! constant-voltage interval has an exact closed form; no ODE solver is
//! involved anywhere.
//!
//! Besides the raw state/current primitives this module implements the three
//! characterization protocols used to validate the model: quasi-static I-V
//! sweeps, repeated-pulse programming, and the pre/post pulse-overlap
//! response.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Read voltage used to convert device state into a conductance.
///
/// 0.5 V sits well below the ~1 V disturb threshold and keeps the two
/// current branches from cancelling, giving ~3.6x dynamic range between
/// `w = 0` and `w = 1`.
pub const READ_VOLTAGE: f64 = 0.5;

/// Material parameters of the memristor model. All strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceParams<F> {
    /// Diode-branch current scale (A).
    pub alpha: F,
    /// Diode-branch voltage sensitivity (1/V).
    pub beta: F,
    /// Tunneling-branch current scale (A).
    pub gamma: F,
    /// Tunneling-branch voltage sensitivity (1/V).
    pub delta: F,
    /// State-change rate (1/s).
    pub lambda: F,
    /// State-change voltage sensitivity (1/V).
    pub eta: F,
}

impl<F: Real> Default for DeviceParams<F> {
    fn default() -> Self {
        Self {
            alpha: F::c(9e-7),
            beta: F::c(4.0),
            gamma: F::c(2.8e-7),
            delta: F::c(6.0),
            lambda: F::c(0.045),
            eta: F::c(6.0),
        }
    }
}

impl<F: Real> DeviceParams<F> {
    /// Checks that all six parameters are strictly positive.
    pub fn validate(&self) -> Result<()> {
        let all = [self.alpha, self.beta, self.gamma, self.delta, self.lambda, self.eta];
        if all.iter().all(|p| *p > F::zero()) {
            Ok(())
        } else {
            Err(Error::InvalidParam(
                "device parameters must be strictly positive".into(),
            ))
        }
    }
}

/// Internal state of one memristor: `w` in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct DeviceState<F> {
    w: F,
}

impl<F: Real> Default for DeviceState<F> {
    fn default() -> Self {
        Self { w: F::zero() }
    }
}

impl<F: Real> DeviceState<F> {
    /// Creates a state, clamping the argument into `[0, 1]`.
    pub fn new(w: F) -> Self {
        Self {
            w: clamp01(w),
        }
    }

    /// The dimensionless state variable.
    pub fn w(&self) -> F {
        self.w
    }
}

/// One constant-voltage segment of a drive waveform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoltageInterval<F> {
    /// Applied voltage (V), any sign.
    pub voltage: F,
    /// Segment duration (s), strictly positive.
    pub duration: F,
}

impl<F: Real> VoltageInterval<F> {
    pub fn new(voltage: F, duration: F) -> Result<Self> {
        if duration > F::zero() {
            Ok(Self { voltage, duration })
        } else {
            Err(Error::InvalidParam("interval duration must be > 0".into()))
        }
    }
}

fn clamp01<F: Real>(w: F) -> F {
    if w < F::zero() {
        F::zero()
    } else if w > F::one() {
        F::one()
    } else {
        w
    }
}

/// Device current at the given terminal voltage.
pub fn current<F: Real>(state: DeviceState<F>, params: &DeviceParams<F>, voltage: F) -> F {
    let w = state.w();
    let diode = (F::one() - w) * params.alpha * (F::one() - (-params.beta * voltage).exp());
    let tunnel = w * params.gamma * (params.delta * voltage).sinh();
    diode + tunnel
}

/// Conductance at the standard read voltage, `G = I(w, V_read) / V_read`.
pub fn conductance<F: Real>(state: DeviceState<F>, params: &DeviceParams<F>) -> F {
    let v = F::c(READ_VOLTAGE);
    current(state, params, v) / v
}

/// Exact state change over one constant-voltage interval.
///
/// The derivative `λ·sinh(η·V)` is independent of `w`, so the update is the
/// closed form `w' = clamp(w + λ·sinh(η·V)·Δt)`.
pub fn step<F: Real>(
    state: DeviceState<F>,
    params: &DeviceParams<F>,
    interval: VoltageInterval<F>,
) -> DeviceState<F> {
    let dw = params.lambda * (params.eta * interval.voltage).sinh() * interval.duration;
    DeviceState::new(state.w + dw)
}

/// Folds [`step`] over a sequence of intervals in order.
pub fn apply_waveform<F: Real>(
    state: DeviceState<F>,
    params: &DeviceParams<F>,
    intervals: &[VoltageInterval<F>],
) -> DeviceState<F> {
    intervals
        .iter()
        .fold(state, |s, iv| step(s, params, *iv))
}

/// One record of a quasi-static I-V sweep: (voltage, current, state after dwell).
pub type SweepPoint<F> = (F, F, F);

/// Quasi-static staircase sweep from `v_min` to `v_max`.
///
/// At each of `steps` evenly spaced voltages the current is recorded at the
/// present state, then the state dwells at that voltage for `dwell` seconds.
/// A zero dwell freezes `w` and yields the pure static I-V curve.
pub fn iv_sweep<F: Real>(
    params: &DeviceParams<F>,
    v_min: F,
    v_max: F,
    steps: usize,
    dwell: F,
) -> Result<Vec<SweepPoint<F>>> {
    if steps < 2 {
        return Err(Error::InvalidParam("sweep needs at least 2 steps".into()));
    }
    if v_min >= v_max {
        return Err(Error::InvalidParam("sweep requires v_min < v_max".into()));
    }
    let mut state = DeviceState::default();
    let span = v_max - v_min;
    let denom = F::from_usize(steps - 1).unwrap();
    let mut out = Vec::with_capacity(steps);
    for k in 0..steps {
        let v = v_min + span * F::from_usize(k).unwrap() / denom;
        let i = current(state, params, v);
        out.push((v, i, state.w()));
        if dwell > F::zero() {
            state = step(state, params, VoltageInterval { voltage: v, duration: dwell });
        }
    }
    Ok(out)
}

/// Conductance change produced by a pre/post pulse pair offset by `dt_offset`.
///
/// A positive pulse of `amplitude` is applied to the front terminal over
/// `[0, pulse_width)` and a negative pulse of the same magnitude to the back
/// terminal over `[dt, dt + pulse_width)`; the device sees the differential
/// voltage. Starting from `w = 0`, returns the conductance change at the read
/// voltage. Outside `|dt| <= pulse_width` the pulses are disjoint and the
/// response sits on the no-overlap plateau.
pub fn overlap_response<F: Real>(
    params: &DeviceParams<F>,
    pulse_width: F,
    amplitude: F,
    dt_offset: F,
) -> F {
    let two = F::c(2.0);
    let overlap = (pulse_width - dt_offset.abs()).max(F::zero());
    let single = two * pulse_width.abs().min(dt_offset.abs().min(pulse_width));
    // During overlap the differential voltage is 2·amplitude; during the
    // non-overlapping tails each pulse alone drives `amplitude` across the
    // device (the negated post pulse subtracts).
    let mut state = DeviceState::default();
    let g0 = conductance(state, params);
    if overlap > F::zero() {
        state = step(state, params, VoltageInterval { voltage: two * amplitude, duration: overlap });
    }
    if single > F::zero() {
        state = step(state, params, VoltageInterval { voltage: amplitude, duration: single });
    }
    conductance(state, params) - g0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params() -> DeviceParams<f64> {
        DeviceParams::default()
    }

    /// Fine-step explicit-Euler integration over a constant interval. This is
    /// the independent oracle for the closed-form `step`.
    fn substepped(w0: f64, p: &DeviceParams<f64>, v: f64, dt: f64, n: usize) -> f64 {
        // Kahan-compensated accumulation so the oracle's rounding error stays
        // far below the comparison tolerance
        let mut w = w0;
        let mut c = 0.0;
        let h = dt / n as f64;
        for _ in 0..n {
            let y = p.lambda * (p.eta * v).sinh() * h - c;
            let t = w + y;
            c = (t - w) - y;
            w = t;
        }
        w.clamp(0.0, 1.0)
    }

    #[test]
    fn current_matches_direct_evaluation() {
        let p = params();
        let i0 = current(DeviceState::new(0.0), &p, 0.5);
        assert_relative_eq!(i0, 9e-7 * (1.0 - (-2.0f64).exp()), max_relative = 1e-14);
        assert_relative_eq!(i0, 7.782e-7, max_relative = 1e-3);

        let i1 = current(DeviceState::new(1.0), &p, 0.5);
        assert_relative_eq!(i1, 2.8e-7 * 3.0f64.sinh(), max_relative = 1e-14);
        assert_relative_eq!(i1, 2.805e-6, max_relative = 1e-3);
    }

    #[test]
    fn current_vanishes_at_zero_volts() {
        let p = params();
        for w in [0.0, 0.25, 0.5, 1.0] {
            assert_eq!(current(DeviceState::new(w), &p, 0.0), 0.0);
        }
    }

    #[test]
    fn current_increasing_in_voltage() {
        let p = params();
        for w in [0.0, 0.3, 1.0] {
            let s = DeviceState::new(w);
            let mut prev = current(s, &p, 1e-3);
            for k in 1..=200 {
                let v = 2.0 * k as f64 / 200.0;
                let i = current(s, &p, v);
                assert!(i > prev, "current not increasing at w={w} v={v}");
                prev = i;
            }
        }
    }

    #[test]
    fn current_increasing_in_state_at_read_voltage() {
        let p = params();
        let mut prev = current(DeviceState::new(0.0), &p, READ_VOLTAGE);
        for k in 1..=10 {
            let i = current(DeviceState::new(k as f64 / 10.0), &p, READ_VOLTAGE);
            assert!(i > prev);
            prev = i;
        }
    }

    #[test]
    fn step_matches_substepped_oracle() {
        let p = params();
        let iv = VoltageInterval { voltage: 1.6, duration: 500e-9 };
        let s = step(DeviceState::new(0.0), &p, iv);
        let oracle = substepped(0.0, &p, 1.6, 500e-9, 100_000);
        assert_relative_eq!(s.w(), oracle, max_relative = 1e-12);
        assert_relative_eq!(s.w(), 1.661e-4, max_relative = 1e-3);
    }

    #[test]
    fn step_zero_voltage_is_identity() {
        let p = params();
        let s0 = DeviceState::new(0.42);
        let s = step(s0, &p, VoltageInterval { voltage: 0.0, duration: 1.0 });
        assert_eq!(s.w(), 0.42);
    }

    #[test]
    fn step_clamps_at_upper_bound() {
        let p = params();
        let s = step(DeviceState::new(0.99999), &p, VoltageInterval { voltage: 1.6, duration: 500e-9 });
        assert_eq!(s.w(), 1.0);
    }

    #[test]
    fn step_negative_voltage_clamps_at_zero() {
        let p = params();
        let s = step(DeviceState::new(1e-6), &p, VoltageInterval { voltage: -1.6, duration: 500e-9 });
        assert_eq!(s.w(), 0.0);
    }

    #[test]
    fn waveform_accumulates_pulses() {
        let p = params();
        let pulse = VoltageInterval { voltage: 1.6, duration: 500e-9 };
        let train = vec![pulse; 2000];
        let s = apply_waveform(DeviceState::default(), &p, &train);
        let per_pulse = 0.045 * (6.0f64 * 1.6).sinh() * 500e-9;
        assert_relative_eq!(s.w(), 2000.0 * per_pulse, max_relative = 1e-12);
        assert_relative_eq!(s.w(), 0.3322, max_relative = 1e-3);
    }

    #[test]
    fn subthreshold_pulses_barely_move_state() {
        let p = params();
        let pulse = VoltageInterval { voltage: 0.8, duration: 500e-9 };
        let train = vec![pulse; 2000];
        let s = apply_waveform(DeviceState::default(), &p, &train);
        assert_relative_eq!(s.w(), 2.734e-3, max_relative = 1e-3);

        let high = 0.045 * (6.0f64 * 1.6).sinh() * 500e-9;
        let low = 0.045 * (6.0f64 * 0.8).sinh() * 500e-9;
        assert!(high / low > 100.0, "disturb ratio {} too small", high / low);
    }

    #[test]
    fn empty_waveform_keeps_state() {
        let p = params();
        let s0 = DeviceState::new(0.2);
        assert_eq!(apply_waveform(s0, &p, &[]).w(), 0.2);
        let zeros = vec![VoltageInterval { voltage: 0.0, duration: 1e-6 }; 5];
        assert_eq!(apply_waveform(s0, &p, &zeros).w(), 0.2);
    }

    #[test]
    fn step_additivity_over_subintervals() {
        let p = params();
        let s_whole = step(DeviceState::new(0.1), &p, VoltageInterval { voltage: 1.2, duration: 1e-6 });
        let sub = vec![VoltageInterval { voltage: 1.2, duration: 0.25e-6 }; 4];
        let s_split = apply_waveform(DeviceState::new(0.1), &p, &sub);
        assert_relative_eq!(s_whole.w(), s_split.w(), max_relative = 1e-12);
    }

    #[test]
    fn zero_dwell_sweep_is_static_curve() {
        let p = params();
        let pts = iv_sweep(&p, 0.0, 2.0, 50, 0.0).unwrap();
        for (v, i, w) in pts {
            assert_eq!(w, 0.0);
            assert_relative_eq!(i, current(DeviceState::new(0.0), &p, v), max_relative = 1e-14);
        }
    }

    #[test]
    fn dwelled_sweep_shows_threshold_rise() {
        let p = params();
        let pts = iv_sweep(&p, 0.0, 2.0, 200, 1e-6).unwrap();
        // monotone current, superlinear rise past ~1 V
        for pair in pts.windows(2) {
            assert!(pair[1].1 >= pair[0].1);
        }
        let i_half = pts.iter().find(|(v, _, _)| *v >= 1.0).unwrap().1;
        let i_end = pts.last().unwrap().1;
        assert!(i_end / i_half > 10.0, "no superlinear rise past threshold");
    }

    #[test]
    fn narrow_sweep_yields_near_identical_points() {
        let p = params();
        let pts = iv_sweep(&p, 1.0, 1.0 + 1e-9, 2, 0.0).unwrap();
        assert_eq!(pts.len(), 2);
        assert_relative_eq!(pts[0].1, pts[1].1, max_relative = 1e-6);
    }

    #[test]
    fn sweep_rejects_bad_arguments() {
        let p = params();
        assert!(iv_sweep(&p, 0.0, 2.0, 1, 0.0).is_err());
        assert!(iv_sweep(&p, 2.0, 0.0, 10, 0.0).is_err());
    }

    fn dw_of_overlap(p: &DeviceParams<f64>, dt: f64) -> f64 {
        // reconstruct the state change implied by the conductance change
        let dg = overlap_response(p, 500e-9, 0.8, dt);
        let g0 = conductance(DeviceState::new(0.0), p);
        let g1 = conductance(DeviceState::new(1.0), p);
        dg / (g1 - g0)
    }

    #[test]
    fn full_overlap_matches_closed_form() {
        let p = params();
        let dw = dw_of_overlap(&p, 0.0);
        assert_relative_eq!(dw, 0.045 * (9.6f64).sinh() * 500e-9, max_relative = 1e-9);
        assert_relative_eq!(dw, 1.661e-4, max_relative = 1e-3);
    }

    #[test]
    fn zero_overlap_matches_closed_form() {
        let p = params();
        let dw = dw_of_overlap(&p, 500e-9);
        assert_relative_eq!(dw, 2.0 * 0.045 * (4.8f64).sinh() * 500e-9, max_relative = 1e-9);
        assert_relative_eq!(dw, 2.734e-6, max_relative = 1e-3);
    }

    #[test]
    fn overlap_response_even_and_decreasing() {
        let p = params();
        let mut prev = f64::INFINITY;
        for k in 0..=10 {
            let dt = k as f64 * 50e-9;
            let dg = overlap_response(&p, 500e-9, 0.8, dt);
            let dg_neg = overlap_response(&p, 500e-9, 0.8, -dt);
            assert_relative_eq!(dg, dg_neg, max_relative = 1e-12);
            assert!(dg < prev, "overlap response not strictly decreasing at dt={dt}");
            prev = dg;
        }
    }

    #[test]
    fn params_validate_positivity() {
        let mut p = params();
        assert!(p.validate().is_ok());
        p.lambda = 0.0;
        assert!(p.validate().is_err());
    }
}
