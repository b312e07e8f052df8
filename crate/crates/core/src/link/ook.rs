use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::frontend::{complex_gaussian, BandpassFilter, FilterSpec, Interferer, REFERENCE_POWER};
use crate::sync::{filtered_noise_variance, trial_seed, EnvelopeSource, EtsConfig};
use crate::waveform::{useful_start_s, NrsPattern, SubframeWaveform, DEFAULT_SAMPLE_RATE_HZ};

use super::frame::{NbpuFrame, INFO_BITS, INFO_SYMBOLS, SYNC_SYMBOLS};
use super::LinkError;

/// Midpoint between the ON level measured on the sync symbols and the
/// calibrated noise floor.
pub fn adaptive_threshold(sync_centers: &[f64], noise_floor: f64) -> f64 {
    let on = sync_centers.iter().sum::<f64>() / sync_centers.len().max(1) as f64;
    0.5 * (on + noise_floor)
}

/// Five info-symbol centre samples to bits, MSB first.
pub fn demodulate_ook(centers: &[f64; INFO_BITS], threshold: f64) -> u8 {
    centers
        .iter()
        .fold(0u8, |acc, &e| acc << 1 | u8::from(e > threshold))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceivedFrame {
    pub sync_centers: [f64; 5],
    pub info_centers: [f64; INFO_BITS],
    pub threshold: f64,
    pub info: u8,
}

/// Samples every NBPU symbol at the centre of its useful part, shifted by
/// the synchronised offset `t0`, and slices the info symbols.
pub fn receive_frame<S: EnvelopeSource + ?Sized>(
    src: &mut S,
    ets: &EtsConfig,
    period: u64,
    t0: f64,
) -> ReceivedFrame {
    let u = (ets.slots_per_symbol / 2) as f64 * ets.slot_s + t0;
    let sync_centers = SYNC_SYMBOLS.map(|s| src.sample(period, s, u));
    let info_centers = INFO_SYMBOLS.map(|s| src.sample(period, s, u));
    let threshold = adaptive_threshold(&sync_centers, src.noise_floor());
    ReceivedFrame {
        sync_centers,
        info_centers,
        threshold,
        info: demodulate_ook(&info_centers, threshold),
    }
}

/// Noiseless centre values of an ON and an OFF symbol after the receive
/// filter's per-subcarrier response.
pub fn center_phasors(filter: &BandpassFilter, timing_offset_s: f64) -> (Complex64, Complex64) {
    let grid = NbpuFrame::new(0b10000)
        .expect("fits")
        .ideal_grid(NrsPattern::default())
        .expect("valid frame");
    let wave = SubframeWaveform::with_response(&grid, &filter.subcarrier_response());
    let u = EtsConfig::default().slot_s * 128.0 - timing_offset_s;
    (
        wave.eval(useful_start_s(INFO_SYMBOLS[0]) + u),
        wave.eval(useful_start_s(INFO_SYMBOLS[1]) + u),
    )
}

/// One BER operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkCondition {
    pub snr_db: f64,
    #[serde(default)]
    pub interference: Vec<Interferer>,
    /// Residual sync error applied to every sample.
    #[serde(default)]
    pub timing_offset_s: f64,
}

impl LinkCondition {
    pub fn snr(snr_db: f64) -> Self {
        Self {
            snr_db,
            interference: Vec::new(),
            timing_offset_s: 0.0,
        }
    }

    /// Thermal noise at `snr_db` plus the NR guard-band interferer at
    /// `sinr_db` (interferer power relative to the NBPU, before filtering).
    pub fn nr_interference(snr_db: f64, sinr_db: f64) -> Self {
        Self {
            snr_db,
            interference: vec![Interferer::nr_guardband(sinr_db)],
            timing_offset_s: 0.0,
        }
    }

    /// In-band SNR, or SINR counting interference at its unfiltered power.
    pub fn effective_db(&self) -> f64 {
        let i: f64 = self.interference.iter().map(|x| x.power()).sum::<f64>() / REFERENCE_POWER;
        let n = 10f64.powf(-self.snr_db / 10.0);
        -10.0 * (n + i).log10()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerPoint {
    pub snr_db: f64,
    pub symbols: usize,
    pub errors: usize,
    pub ber: f64,
}

/// Monte-Carlo OOK BER with independent noise on every sample. Each frame
/// carries random info bits; the threshold adapts from that frame's own
/// noisy sync symbols. Counts info symbols only.
pub fn ber_sweep(
    points: &[LinkCondition],
    symbols: usize,
    seed: u64,
) -> Result<Vec<BerPoint>, LinkError> {
    let filter = BandpassFilter::design(DEFAULT_SAMPLE_RATE_HZ * 4.0, FilterSpec::default())?;
    let frames = symbols.div_ceil(INFO_BITS);
    points
        .par_iter()
        .enumerate()
        .map(|(i, cond)| {
            let nyquist = filter.sample_rate / 2.0;
            if let Some(bad) = cond.interference.iter().find(|x| x.highest_hz() > nyquist) {
                return Err(LinkError::Config(format!(
                    "interferer reaches {} Hz",
                    bad.highest_hz()
                )));
            }
            let (on, off) = center_phasors(&filter, cond.timing_offset_s);
            let var = filtered_noise_variance(&filter, cond.snr_db)
                + cond
                    .interference
                    .iter()
                    .map(|x| x.filtered_power(&filter))
                    .sum::<f64>();
            let errors: usize = (0..frames)
                .into_par_iter()
                .with_min_len(256)
                .map(|f| {
                    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, i, f));
                    let info: u8 = rng.random_range(0..1 << INFO_BITS);
                    let mut draw = |clean: Complex64| {
                        let n = if var > 0.0 {
                            complex_gaussian(&mut rng, var)
                        } else {
                            Complex64::new(0.0, 0.0)
                        };
                        (clean + n).norm_sqr()
                    };
                    let sync: [f64; 5] = std::array::from_fn(|_| draw(on));
                    let threshold = adaptive_threshold(&sync, var);
                    let centers: [f64; INFO_BITS] = std::array::from_fn(|b| {
                        let bit = info >> (INFO_BITS - 1 - b) & 1 == 1;
                        draw(if bit { on } else { off })
                    });
                    (demodulate_ook(&centers, threshold) ^ info).count_ones() as usize
                })
                .sum();
            let n = frames * INFO_BITS;
            Ok(BerPoint {
                snr_db: cond.effective_db(),
                symbols: n,
                errors,
                ber: errors as f64 / n as f64,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn filter() -> BandpassFilter {
        BandpassFilter::design(DEFAULT_SAMPLE_RATE_HZ * 4.0, FilterSpec::default()).unwrap()
    }

    #[test]
    fn off_center_is_13_db_below_on() {
        let (on, off) = center_phasors(&filter(), 0.0);
        let ratio = 10.0 * (on.norm_sqr() / off.norm_sqr()).log10();
        assert!(ratio >= 13.0, "{ratio} dB");
    }

    #[test]
    fn geometric_mean_threshold_is_error_free() {
        let (on, off) = center_phasors(&filter(), 0.0);
        let (e_on, e_off) = (on.norm_sqr(), off.norm_sqr());
        let thr = (e_on * e_off).sqrt();
        for info in 0..32u8 {
            let centers = std::array::from_fn(|b| {
                if info >> (4 - b) & 1 == 1 {
                    e_on
                } else {
                    e_off
                }
            });
            assert_eq!(demodulate_ook(&centers, thr), info);
        }
    }

    #[test]
    fn infinite_snr_has_no_errors() {
        let p = ber_sweep(&[LinkCondition::snr(f64::INFINITY)], 5000, 1).unwrap();
        assert_eq!(p[0].errors, 0);
        assert_eq!(p[0].symbols, 5000);
    }

    #[test]
    fn low_snr_has_errors_and_improves() {
        let p = ber_sweep(
            &[
                LinkCondition::snr(-5.0),
                LinkCondition::snr(0.0),
                LinkCondition::snr(5.0),
            ],
            20000,
            2,
        )
        .unwrap();
        assert!(p[0].errors > 0);
        assert!(p[0].ber >= p[1].ber && p[1].ber >= p[2].ber);
    }

    #[test]
    fn effective_db_combines_noise_and_interference() {
        assert!((LinkCondition::snr(14.0).effective_db() - 14.0).abs() < 1e-12);
        let c = LinkCondition::nr_interference(f64::INFINITY, -10.0);
        assert!((c.effective_db() + 10.0).abs() < 1e-9);
    }
}
