use num_complex::Complex64;

use crate::waveform::{subcarrier_offset_hz, BasebandSignal, SUBCARRIERS};

use super::dsp::{
    convolve_same, convolve_same_real, fir_response, kaiser_lowpass, tune_cutoff_for_3db,
};
use super::FrontendError;

/// Receive band-pass filter, modelled at complex baseband as a real,
/// linear-phase low-pass centred on the carrier. Group delay is removed.
#[derive(Debug, Clone)]
pub struct BandpassFilter {
    pub taps: Vec<f64>,
    pub sample_rate: f64,
    pub bandwidth_3db_hz: f64,
}

/// Design parameters: impulse-response span and Kaiser β set the skirt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    pub bandwidth_3db_hz: f64,
    pub span_s: f64,
    pub beta: f64,
}

impl Default for FilterSpec {
    fn default() -> Self {
        Self {
            bandwidth_3db_hz: 320e3,
            span_s: 25e-6,
            beta: 5.0,
        }
    }
}

fn odd_taps(span_s: f64, sample_rate: f64) -> usize {
    ((span_s * sample_rate).round() as usize) | 1
}

impl BandpassFilter {
    pub fn design(sample_rate: f64, spec: FilterSpec) -> Result<Self, FrontendError> {
        let edge = spec.bandwidth_3db_hz / 2.0;
        if !(edge > 0.0 && edge < sample_rate / 4.0) {
            return Err(FrontendError::Config(format!(
                "{} Hz bandwidth does not fit a {sample_rate} Hz simulation rate",
                spec.bandwidth_3db_hz
            )));
        }
        let n = odd_taps(spec.span_s, sample_rate);
        let fc = tune_cutoff_for_3db(n, spec.beta, edge, sample_rate);
        Ok(Self {
            taps: kaiser_lowpass(n, fc, sample_rate, spec.beta),
            sample_rate,
            bandwidth_3db_hz: spec.bandwidth_3db_hz,
        })
    }

    /// Real, zero-phase amplitude response at baseband offset `freq_hz`.
    pub fn response(&self, freq_hz: f64) -> f64 {
        fir_response(&self.taps, freq_hz, self.sample_rate)
    }

    pub fn gain_db(&self, freq_hz: f64) -> f64 {
        20.0 * self.response(freq_hz).abs().max(1e-300).log10()
    }

    /// Per-subcarrier response, for the analytic fast path.
    pub fn subcarrier_response(&self) -> [Complex64; SUBCARRIERS] {
        std::array::from_fn(|c| Complex64::new(self.response(subcarrier_offset_hz(c)), 0.0))
    }

    /// Equivalent noise bandwidth.
    pub fn enbw_hz(&self) -> f64 {
        let e: f64 = self.taps.iter().map(|h| h * h).sum();
        let dc: f64 = self.taps.iter().sum();
        self.sample_rate * e / (dc * dc)
    }

    /// Mean power gain over [f1, f2] (flat input PSD), in dB.
    pub fn band_gain_db(&self, f1: f64, f2: f64) -> f64 {
        let steps = 4000;
        let df = (f2 - f1) / steps as f64;
        let mean = (0..steps)
            .map(|i| self.response(f1 + (i as f64 + 0.5) * df).powi(2))
            .sum::<f64>()
            / steps as f64;
        10.0 * mean.max(1e-300).log10()
    }

    pub fn apply(&self, sig: &BasebandSignal) -> Result<BasebandSignal, FrontendError> {
        self.check_rate(sig.sample_rate)?;
        Ok(BasebandSignal {
            samples: convolve_same(&sig.samples, &self.taps),
            sample_rate: sig.sample_rate,
            t0: sig.t0,
        })
    }

    fn check_rate(&self, rate: f64) -> Result<(), FrontendError> {
        if (rate - self.sample_rate).abs() > 1e-6 * rate {
            return Err(FrontendError::Config(format!(
                "filter designed for {} Hz, signal is {rate} Hz",
                self.sample_rate
            )));
        }
        Ok(())
    }
}

/// Real-valued envelope trace.
#[derive(Debug, Clone)]
pub struct Envelope {
    pub samples: Vec<f64>,
    pub sample_rate: f64,
    pub t0: f64,
}

impl Envelope {
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    pub fn time_of(&self, i: usize) -> f64 {
        self.t0 + i as f64 / self.sample_rate
    }
}

/// Square-law diode followed by a post-detection low-pass.
#[derive(Debug, Clone)]
pub struct EnvelopeDetector {
    pub lowpass: Vec<f64>,
    pub sample_rate: f64,
    pub cutoff_hz: f64,
}

/// Post-detection −3 dB corner: above the 165 kHz top harmonic.
pub const DETECTOR_CORNER_HZ: f64 = 240e3;

impl EnvelopeDetector {
    pub fn new(sample_rate: f64) -> Result<Self, FrontendError> {
        if DETECTOR_CORNER_HZ >= sample_rate / 4.0 {
            return Err(FrontendError::Config(format!(
                "{sample_rate} Hz too slow for the envelope low-pass"
            )));
        }
        let n = odd_taps(25e-6, sample_rate);
        let fc = tune_cutoff_for_3db(n, 5.0, DETECTOR_CORNER_HZ, sample_rate);
        Ok(Self {
            lowpass: kaiser_lowpass(n, fc, sample_rate, 5.0),
            sample_rate,
            cutoff_hz: DETECTOR_CORNER_HZ,
        })
    }

    pub fn response(&self, freq_hz: f64) -> f64 {
        fir_response(&self.lowpass, freq_hz, self.sample_rate)
    }

    pub fn detect(&self, sig: &BasebandSignal) -> Envelope {
        let sq: Vec<f64> = sig.samples.iter().map(|s| s.norm_sqr()).collect();
        Envelope {
            samples: convolve_same_real(&sq, &self.lowpass),
            sample_rate: sig.sample_rate,
            t0: sig.t0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tone(freq: f64, fs: f64, n: usize) -> BasebandSignal {
        let samples = (0..n)
            .map(|i| Complex64::from_polar(1.0, 2.0 * PI * freq * i as f64 / fs))
            .collect();
        BasebandSignal {
            samples,
            sample_rate: fs,
            t0: 0.0,
        }
    }

    fn steady_gain(f: &BandpassFilter, freq: f64) -> f64 {
        let sig = tone(freq, f.sample_rate, 8192);
        let out = f.apply(&sig).unwrap();
        let mid = &out.samples[2000..6000];
        10.0 * (mid.iter().map(|s| s.norm_sqr()).sum::<f64>() / mid.len() as f64).log10()
    }

    #[test]
    fn passband_template() {
        let f = BandpassFilter::design(3.84e6, FilterSpec::default()).unwrap();
        assert!((f.gain_db(160e3) + 3.0103).abs() < 1e-3);
        assert!((f.gain_db(-160e3) + 3.0103).abs() < 1e-3);
        assert!(f.gain_db(0.0).abs() < 1e-9);
        for c in 0..12 {
            assert!(f.gain_db(subcarrier_offset_hz(c)) > -3.0);
        }
        assert!(f.gain_db(300e3) < -18.0);
    }

    #[test]
    fn measured_tone_gains_match_response() {
        let f = BandpassFilter::design(3.84e6, FilterSpec::default()).unwrap();
        for freq in [0.0, 75e3, -90e3, 160e3, 400e3] {
            assert!(
                (steady_gain(&f, freq) - f.gain_db(freq)).abs() < 0.05,
                "{freq}"
            );
        }
    }

    #[test]
    fn filter_is_linear() {
        let f = BandpassFilter::design(3.84e6, FilterSpec::default()).unwrap();
        let a = tone(40e3, 3.84e6, 1000);
        let b = tone(-250e3, 3.84e6, 1000);
        let sum = BasebandSignal {
            samples: a
                .samples
                .iter()
                .zip(&b.samples)
                .map(|(x, y)| x * 2.0 + y)
                .collect(),
            ..a.clone()
        };
        let (fa, fb, fs) = (
            f.apply(&a).unwrap(),
            f.apply(&b).unwrap(),
            f.apply(&sum).unwrap(),
        );
        for i in 0..1000 {
            assert!((fs.samples[i] - (fa.samples[i] * 2.0 + fb.samples[i])).norm() < 1e-10);
        }
    }

    #[test]
    fn rate_mismatch_is_an_error() {
        let f = BandpassFilter::design(3.84e6, FilterSpec::default()).unwrap();
        assert!(f.apply(&tone(0.0, 15.36e6, 10)).is_err());
    }

    #[test]
    fn single_tone_envelope_is_constant_and_two_tones_beat() {
        let fs = 3.84e6;
        let det = EnvelopeDetector::new(fs).unwrap();
        let env = det.detect(&tone(30e3, fs, 4096));
        for v in &env.samples[200..3800] {
            assert!((v - 1.0).abs() < 1e-9);
        }
        let two = BasebandSignal {
            samples: (0..4096)
                .map(|i| {
                    let t = i as f64 / fs;
                    Complex64::from_polar(1.0, 2.0 * PI * 15e3 * t)
                        + Complex64::from_polar(1.0, 2.0 * PI * 30e3 * t)
                })
                .collect(),
            sample_rate: fs,
            t0: 0.0,
        };
        let env = det.detect(&two);
        // |x|² = 2 + 2cos(2π·15 kHz·t): period 256 samples.
        for i in 300..3500 {
            let t = i as f64 / fs;
            let want = 2.0 + 2.0 * (2.0 * PI * 15e3 * t).cos() * det.response(15e3);
            assert!((env.samples[i] - want).abs() < 1e-9);
        }
    }

    #[test]
    fn enbw_is_close_to_3db_bandwidth() {
        let f = BandpassFilter::design(3.84e6, FilterSpec::default()).unwrap();
        let b = f.enbw_hz();
        assert!(b > 280e3 && b < 340e3, "{b}");
    }
}
