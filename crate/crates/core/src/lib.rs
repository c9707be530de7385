//! Behavioral simulator for an RRAM computing-in-memory EEG correlation
//! extractor and seizure predictor, with a parametric hardware cost model.
//!
//! The core pipeline mirrors the hardware: multichannel EEG windows are
//! encoded into bipolar pulse trains ([`waveform`]), pulse overlap drives
//! conductance accumulation in a memristor crossbar ([`device`],
//! [`crossbar`]), the resulting pairwise correlation maps ([`features`]) feed
//! a small quantized classifier executed bit-serially on a second array
//! ([`predictor`]), and a component catalog prices the whole thing
//! ([`costmodel`]).
//!
//! All numeric code is generic over the [`scalar::Real`] scalar trait so it
//! runs in `f32` or `f64`; the aliases below fix `f64` as the default
//! precision for applications.

pub mod cli;
pub mod costmodel;
pub mod crossbar;
pub mod device;
pub mod eegdata;
pub mod error;
pub mod features;
pub mod predictor;
pub mod scalar;
pub mod waveform;

pub use error::{Error, Result};
pub use scalar::Real;

/// Default-precision device parameter set.
pub type DeviceParams = device::DeviceParams<f64>;
/// Default-precision device state.
pub type DeviceState = device::DeviceState<f64>;
/// Default-precision encoding configuration.
pub type EncodingConfig = waveform::EncodingConfig<f64>;
/// Default-precision pulse train.
pub type PulseTrain = waveform::PulseTrain<f64>;
/// Default-precision crossbar array.
pub type CrossbarArray = crossbar::CrossbarArray<f64>;
/// Default-precision ADC configuration.
pub type AdcConfig = crossbar::AdcConfig<f64>;
/// Default-precision correlation map.
pub type CorrelationMap = features::CorrelationMap<f64>;
/// Default-precision hardware catalog.
pub type Catalog = costmodel::Catalog<f64>;
/// Default-precision cost report.
pub type CostReport = costmodel::CostReport<f64>;
