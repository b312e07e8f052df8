use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::waveform::BasebandSignal;

use super::filter::BandpassFilter;
use super::FrontendError;

/// Mean power of a full, unattenuated NB-IoT subframe (12 unit subcarriers).
pub const REFERENCE_POWER: f64 = 12.0;
/// SNR is defined over the receive filter's 320 kHz band.
pub const INBAND_BW_HZ: f64 = 320e3;

/// Log-distance path loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathModel {
    pub tx_power_dbm: f64,
    pub distance_m: f64,
    pub exponent: f64,
    /// Loss at 1 m.
    pub ref_loss_db: f64,
    /// Noise power in the 320 kHz band.
    pub noise_dbm: f64,
}

impl PathModel {
    pub fn snr_db(&self) -> f64 {
        let loss = self.ref_loss_db + 10.0 * self.exponent * self.distance_m.max(1e-3).log10();
        self.tx_power_dbm - loss - self.noise_dbm
    }
}

/// Tone (`bandwidth_hz` = 0) or flat band starting at `offset_hz`. Power is
/// relative to [`REFERENCE_POWER`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interferer {
    pub offset_hz: f64,
    #[serde(default)]
    pub bandwidth_hz: f64,
    pub power_db: f64,
}

/// Lower edge of the neighbouring NR allocation: 90 kHz NB-IoT half-band
/// plus the 70 kHz gap.
pub const NR_EDGE_HZ: f64 = 160e3;
pub const NR_BANDWIDTH_HZ: f64 = 5e6;

impl Interferer {
    /// Fully loaded 5 MHz NR neighbour giving the requested pre-filter SINR.
    pub fn nr_guardband(sinr_db: f64) -> Self {
        Self {
            offset_hz: NR_EDGE_HZ,
            bandwidth_hz: NR_BANDWIDTH_HZ,
            power_db: -sinr_db,
        }
    }

    pub fn power(&self) -> f64 {
        REFERENCE_POWER * 10f64.powf(self.power_db / 10.0)
    }

    pub fn highest_hz(&self) -> f64 {
        self.offset_hz
            .abs()
            .max((self.offset_hz + self.bandwidth_hz).abs())
    }

    /// Power left after the receive filter.
    pub fn filtered_power(&self, filter: &BandpassFilter) -> f64 {
        let g = if self.bandwidth_hz > 0.0 {
            10f64.powf(
                filter.band_gain_db(self.offset_hz, self.offset_hz + self.bandwidth_hz) / 10.0,
            )
        } else {
            filter.response(self.offset_hz).powi(2)
        };
        self.power() * g
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ChannelConfig {
    /// In-band SNR of the unblocked signal; overrides `path`. `None` with
    /// no path means noiseless.
    pub snr_db: Option<f64>,
    pub path: Option<PathModel>,
    #[serde(default)]
    pub blockage_db: f64,
    #[serde(default)]
    pub blocked: bool,
    #[serde(default)]
    pub interference: Vec<Interferer>,
}

impl ChannelConfig {
    pub fn with_snr(snr_db: f64) -> Self {
        Self {
            snr_db: Some(snr_db),
            ..Default::default()
        }
    }

    pub fn attenuation_db(&self) -> f64 {
        if self.blocked {
            self.blockage_db
        } else {
            0.0
        }
    }

    /// SNR after blockage; +∞ when noiseless.
    pub fn effective_snr_db(&self) -> f64 {
        let base = match (self.snr_db, &self.path) {
            (Some(s), _) => s,
            (None, Some(p)) => p.snr_db(),
            (None, None) => f64::INFINITY,
        };
        base - self.attenuation_db()
    }

    /// Noise variance per complex sample before filtering, referenced to
    /// the unattenuated signal.
    pub fn noise_variance(&self, sample_rate: f64) -> f64 {
        let snr = self
            .snr_db
            .or_else(|| self.path.map(|p| p.snr_db()))
            .unwrap_or(f64::INFINITY);
        if snr.is_infinite() {
            return 0.0;
        }
        REFERENCE_POWER * sample_rate / (INBAND_BW_HZ * 10f64.powf(snr / 10.0))
    }
}

pub fn complex_gaussian(rng: &mut impl Rng, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    Complex64::new(
        s * rng.sample::<f64, _>(StandardNormal),
        s * rng.sample::<f64, _>(StandardNormal),
    )
}

/// Attenuated signal plus white Gaussian noise plus interference.
pub fn apply_channel(
    sig: &BasebandSignal,
    ch: &ChannelConfig,
    rng: &mut impl Rng,
) -> Result<BasebandSignal, FrontendError> {
    let fs = sig.sample_rate;
    let gain = 10f64.powf(-ch.attenuation_db() / 20.0);
    let var = ch.noise_variance(fs);
    let mut out: Vec<Complex64> = sig.samples.iter().map(|&s| s * gain).collect();
    if var > 0.0 {
        for s in &mut out {
            *s += complex_gaussian(rng, var);
        }
    }
    for intf in &ch.interference {
        if intf.highest_hz() >= fs / 2.0 {
            return Err(FrontendError::Config(format!(
                "interferer reaching {} Hz needs more than {fs} Hz sampling",
                intf.highest_hz()
            )));
        }
        let wave = interference_wave(intf, out.len(), fs, sig.t0, rng);
        for (s, w) in out.iter_mut().zip(wave) {
            *s += w;
        }
    }
    Ok(BasebandSignal {
        samples: out,
        sample_rate: fs,
        t0: sig.t0,
    })
}

fn interference_wave(
    intf: &Interferer,
    n: usize,
    fs: f64,
    t0: f64,
    rng: &mut impl Rng,
) -> Vec<Complex64> {
    let p = intf.power();
    if intf.bandwidth_hz <= 0.0 {
        let theta = rng.random::<f64>() * 2.0 * PI;
        return (0..n)
            .map(|i| {
                Complex64::from_polar(
                    p.sqrt(),
                    2.0 * PI * intf.offset_hz * (t0 + i as f64 / fs) + theta,
                )
            })
            .collect();
    }
    // Flat-spectrum Gaussian band synthesised bin by bin.
    let mut spec = vec![Complex64::new(0.0, 0.0); n];
    let df = fs / n as f64;
    for (k, slot) in spec.iter_mut().enumerate() {
        let f = if k < n.div_ceil(2) {
            k as f64 * df
        } else {
            (k as f64 - n as f64) * df
        };
        if f >= intf.offset_hz && f < intf.offset_hz + intf.bandwidth_hz {
            *slot = complex_gaussian(rng, 1.0);
        }
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut spec);
    let got = spec.iter().map(|s| s.norm_sqr()).sum::<f64>() / n as f64;
    let scale = if got > 0.0 { (p / got).sqrt() } else { 0.0 };
    spec.iter().map(|s| s * scale).collect()
}

/// In-band SNR of `noisy` against the clean reference: noise power is
/// measured in the ±160 kHz band of the residual's spectrum.
pub fn measure_inband_snr_db(clean: &BasebandSignal, noisy: &BasebandSignal) -> f64 {
    let n = clean.samples.len();
    let mut resid: Vec<Complex64> = noisy
        .samples
        .iter()
        .zip(&clean.samples)
        .map(|(a, b)| a - b)
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut resid);
    let df = clean.sample_rate / n as f64;
    let inband: f64 = resid
        .iter()
        .enumerate()
        .filter(|(k, _)| {
            let f = if *k < n.div_ceil(2) {
                *k as f64 * df
            } else {
                (*k as f64 - n as f64) * df
            };
            f.abs() <= INBAND_BW_HZ / 2.0
        })
        .map(|(_, v)| v.norm_sqr())
        .sum::<f64>()
        / (n as f64 * n as f64);
    10.0 * (clean.mean_power() / inband).log10()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveform::{modulate_subframe, ModulatorConfig, NrsPattern, Qpsk, ResourceGrid};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// `k` subframes of random QPSK data.
    fn subframes(k: usize, cfg: ModulatorConfig) -> BasebandSignal {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut samples = Vec::new();
        let mut rate = 0.0;
        for _ in 0..k {
            let mut grid = ResourceGrid::new(NrsPattern::default()).unwrap();
            let res: Vec<_> = grid.data_elements().collect();
            for (s, c) in res {
                grid.set(s, c, Qpsk::from_quadrant(rng.random_range(0..4)))
                    .unwrap();
            }
            let one = modulate_subframe(&grid, &cfg, 0.0).unwrap();
            rate = one.sample_rate;
            samples.extend(one.samples);
        }
        BasebandSignal {
            samples,
            sample_rate: rate,
            t0: 0.0,
        }
    }

    #[test]
    fn infinite_snr_is_identity() {
        let sig = subframes(1, ModulatorConfig::default());
        let out = apply_channel(
            &sig,
            &ChannelConfig::default(),
            &mut ChaCha8Rng::seed_from_u64(1),
        )
        .unwrap();
        assert_eq!(out.samples, sig.samples);
    }

    #[test]
    fn zero_db_snr_measures_zero() {
        let sig = subframes(27, ModulatorConfig::default()); // 103,680 samples
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let out = apply_channel(&sig, &ChannelConfig::with_snr(0.0), &mut rng).unwrap();
        let snr =
            measure_inband_snr_db(&sig, &out) - 10.0 * (sig.mean_power() / REFERENCE_POWER).log10();
        assert!(snr.abs() < 0.2, "{snr}");
    }

    #[test]
    fn nr_neighbour_sets_presinr() {
        let sig = subframes(2, ModulatorConfig::oversampled(4));
        let ch = ChannelConfig {
            interference: vec![Interferer::nr_guardband(-8.0)],
            ..Default::default()
        };
        let out = apply_channel(&sig, &ch, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let intf: f64 = out
            .samples
            .iter()
            .zip(&sig.samples)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            / sig.samples.len() as f64;
        let sinr = 10.0 * (REFERENCE_POWER / intf).log10();
        assert!((sinr + 8.0).abs() < 0.05, "{sinr}");
    }

    #[test]
    fn interferer_beyond_nyquist_is_rejected() {
        let sig = subframes(1, ModulatorConfig::default());
        let ch = ChannelConfig {
            interference: vec![Interferer::nr_guardband(-8.0)],
            ..Default::default()
        };
        assert!(apply_channel(&sig, &ch, &mut ChaCha8Rng::seed_from_u64(3)).is_err());
    }

    #[test]
    fn path_snr_and_blockage() {
        let p = PathModel {
            tx_power_dbm: 0.0,
            distance_m: 10.0,
            exponent: 2.0,
            ref_loss_db: 40.0,
            noise_dbm: -100.0,
        };
        assert!((p.snr_db() - 40.0).abs() < 1e-12);
        let ch = ChannelConfig {
            path: Some(p),
            blockage_db: 25.0,
            blocked: true,
            ..Default::default()
        };
        assert!((ch.effective_snr_db() - 15.0).abs() < 1e-12);
    }
}
