//! NBPU receive chain: channel impairments, the 320 kHz band-pass filter,
//! square-law envelope detection, amplification and the low-rate ADC, plus
//! the closed-form first-order harmonic model of the envelope.

mod adc;
mod channel;
pub mod dsp;
mod filter;
mod harmonics;

pub use adc::{
    adc_rate_ratio, interpolate, Adc, DIRECT_ADC_RATE_HZ, GAIN_MAX_DB, GAIN_MIN_DB,
    NBPU_ADC_RATE_HZ,
};
pub use channel::{
    apply_channel, complex_gaussian, measure_inband_snr_db, ChannelConfig, Interferer, PathModel,
    INBAND_BW_HZ, NR_BANDWIDTH_HZ, NR_EDGE_HZ, REFERENCE_POWER,
};
pub use filter::{BandpassFilter, Envelope, EnvelopeDetector, FilterSpec, DETECTOR_CORNER_HZ};
pub use harmonics::{analytic_envelope, measure_harmonics, Harmonic, HarmonicSet};

use std::io::{self, Write};

use thiserror::Error;

use crate::waveform::BasebandSignal;

#[derive(Debug, Error)]
pub enum FrontendError {
    #[error("invalid front-end configuration: {0}")]
    Config(String),
    #[error("sample time {t} s outside the simulated trace")]
    TimeOutOfRange { t: f64 },
}

/// Filter then detector, sharing one simulation rate.
#[derive(Debug, Clone)]
pub struct ReceiverChain {
    pub filter: BandpassFilter,
    pub detector: EnvelopeDetector,
}

impl ReceiverChain {
    pub fn new(sample_rate: f64) -> Result<Self, FrontendError> {
        Ok(Self {
            filter: BandpassFilter::design(sample_rate, FilterSpec::default())?,
            detector: EnvelopeDetector::new(sample_rate)?,
        })
    }

    pub fn process(&self, sig: &BasebandSignal) -> Result<Envelope, FrontendError> {
        Ok(self.detector.detect(&self.filter.apply(sig)?))
    }
}

/// CSV with columns `t,value`.
pub fn write_envelope_csv<W: Write>(mut w: W, env: &Envelope) -> io::Result<()> {
    writeln!(w, "t,value")?;
    for (i, v) in env.samples.iter().enumerate() {
        writeln!(w, "{:.9e},{v:.9e}", env.time_of(i))?;
    }
    Ok(())
}
