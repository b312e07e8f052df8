use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::frontend::{
    complex_gaussian, interpolate, BandpassFilter, Envelope, Interferer, INBAND_BW_HZ,
    REFERENCE_POWER,
};
use crate::waveform::{useful_start_s, ResourceGrid, SubframeWaveform};

/// Detector output as seen by the NBPU receiver's ADC. `u` is measured
/// from the receiver's own (local-clock) idea of where the useful part of
/// `symbol` starts in the NBPU subframe of `period`.
pub trait EnvelopeSource {
    fn sample(&mut self, period: u64, symbol: usize, u: f64) -> f64;

    /// Mean envelope contributed by noise alone, known from calibration.
    fn noise_floor(&self) -> f64 {
        0.0
    }

    /// True arrival offset in `period`, when the source knows it.
    fn true_offset(&self, _period: u64) -> Option<f64> {
        None
    }
}

/// Post-filter noise variance per sample for an in-band SNR.
pub fn filtered_noise_variance(filter: &BandpassFilter, snr_db: f64) -> f64 {
    if snr_db.is_infinite() {
        return 0.0;
    }
    REFERENCE_POWER * (filter.enbw_hz() / INBAND_BW_HZ) / 10f64.powf(snr_db / 10.0)
}

/// Analytic receiver: the band-limited waveform evaluated at the sampling
/// instant through the filter's per-subcarrier response, plus complex
/// Gaussian noise (and Gaussian-modelled interference) of the post-filter
/// variance, then square-law detected.
#[derive(Debug, Clone)]
pub struct FastReceiver {
    wave: SubframeWaveform,
    /// Arrival offset in period 0.
    pub tau_s: f64,
    /// Offset growth per period (clock drift).
    pub drift_s: f64,
    pub noise_var: f64,
    pub present: bool,
    rng: ChaCha8Rng,
}

impl FastReceiver {
    pub fn new(
        grid: &ResourceGrid,
        filter: &BandpassFilter,
        snr_db: f64,
        interference: &[Interferer],
        tau_s: f64,
        seed: u64,
    ) -> Self {
        let noise = filtered_noise_variance(filter, snr_db);
        let intf: f64 = interference.iter().map(|i| i.filtered_power(filter)).sum();
        Self {
            wave: SubframeWaveform::with_response(grid, &filter.subcarrier_response()),
            tau_s,
            drift_s: 0.0,
            noise_var: noise + intf,
            present: true,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn with_drift(mut self, drift_s: f64) -> Self {
        self.drift_s = drift_s;
        self
    }

    /// Noise only: no NBPU is being transmitted.
    pub fn absent(mut self) -> Self {
        self.present = false;
        self
    }

    /// Noiseless complex value at subframe time `t`.
    pub fn clean(&self, t: f64) -> num_complex::Complex64 {
        self.wave.eval(t)
    }

    pub fn offset_at(&self, period: u64) -> f64 {
        self.tau_s + self.drift_s * period as f64
    }
}

impl EnvelopeSource for FastReceiver {
    fn sample(&mut self, period: u64, symbol: usize, u: f64) -> f64 {
        let t = useful_start_s(symbol) + u - self.offset_at(period);
        let mut v = if self.present {
            self.wave.eval(t)
        } else {
            num_complex::Complex64::new(0.0, 0.0)
        };
        if self.noise_var > 0.0 {
            v += complex_gaussian(&mut self.rng, self.noise_var);
        }
        v.norm_sqr()
    }

    fn noise_floor(&self) -> f64 {
        self.noise_var
    }

    fn true_offset(&self, period: u64) -> Option<f64> {
        Some(self.offset_at(period))
    }
}

/// A simulated envelope trace of one NBPU subframe, repeated every period.
/// Times on the trace are subframe-relative (trace `t0` = subframe start).
#[derive(Debug, Clone)]
pub struct TraceSource {
    pub env: Envelope,
    pub tau_s: f64,
}

impl EnvelopeSource for TraceSource {
    fn sample(&mut self, _period: u64, symbol: usize, u: f64) -> f64 {
        interpolate(&self.env, useful_start_s(symbol) + u - self.tau_s).unwrap_or(0.0)
    }

    fn true_offset(&self, _period: u64) -> Option<f64> {
        Some(self.tau_s)
    }
}
