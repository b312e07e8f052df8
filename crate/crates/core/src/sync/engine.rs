use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::frontend::{BandpassFilter, FilterSpec};
use crate::waveform::{NrsPattern, ResourceGrid, DEFAULT_SAMPLE_RATE_HZ, ON_SYMBOL};

use super::ets::EtsConfig;
use super::matched::{envelope_template, full_symbol_match, matched_filter_window};
use super::source::{EnvelopeSource, FastReceiver};
use super::SyncError;

#[derive(Debug, Clone, PartialEq)]
pub struct SyncConfig {
    pub ets: EtsConfig,
    /// Full coverage passes accumulated before the matched filter.
    pub bootstrap_sweeps: usize,
    /// Minimum normalised full-symbol correlation to declare an NBPU.
    pub detect_threshold: f64,
    /// Windowed-filter score below which a period counts as missed.
    pub lock_threshold: f64,
    /// Consecutive missed periods before lock is declared lost.
    pub lock_loss_periods: usize,
    /// Apply the windowed filter's ±1-slot estimate to t0.
    pub track_corrections: bool,
    /// Parabolic sub-slot refinement of the bootstrap peak.
    pub parabolic: bool,
}

impl Default for SyncConfig {
    fn default() -> Self {
        Self {
            ets: EtsConfig::default(),
            bootstrap_sweeps: 4,
            detect_threshold: 0.3,
            lock_threshold: 0.5,
            lock_loss_periods: 3,
            track_corrections: false,
            parabolic: true,
        }
    }
}

impl SyncConfig {
    pub fn validate(&self) -> Result<(), SyncError> {
        self.ets.validate()?;
        if self.bootstrap_sweeps == 0 || self.lock_loss_periods == 0 {
            return Err(SyncError::Config(
                "sweeps and lock-loss count must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapResult {
    /// Estimated arrival offset, wrapped to within half a symbol.
    pub offset_s: f64,
    /// Local slot holding the envelope peak.
    pub window_center_slot: usize,
    pub frames_used: usize,
    /// Frames for one full coverage pass.
    pub coverage_frames: usize,
    pub score: f64,
}

/// Wraps an offset into [−T/2, T/2) for a symbol of `slots` slots.
pub fn wrap_offset(x: f64, cfg: &EtsConfig) -> f64 {
    let t = cfg.slot_s * cfg.slots_per_symbol as f64;
    (x + t / 2.0).rem_euclid(t) - t / 2.0
}

/// Sweeps ETS over the whole symbol, then locates the peak with a
/// full-symbol circular matched filter.
pub fn bootstrap_sweep<S: EnvelopeSource + ?Sized>(
    src: &mut S,
    cfg: &SyncConfig,
    start_period: u64,
) -> Result<BootstrapResult, SyncError> {
    cfg.validate()?;
    let ets = &cfg.ets;
    let slots = ets.slots_per_symbol;
    let n_cover = ets
        .coverage_frames()
        .ok_or_else(|| SyncError::Config("stride never covers the symbol".into()))?;
    let frames = n_cover * cfg.bootstrap_sweeps;
    let mut sum = vec![0.0; slots];
    let mut count = vec![0usize; slots];
    for n in 0..frames {
        for j in 0..ets.sync_symbols {
            let k = ets.bootstrap_slot(n, j);
            sum[k] += src.sample(start_period + n as u64, j, k as f64 * ets.slot_s);
            count[k] += 1;
        }
    }
    let profile: Vec<f64> = sum
        .iter()
        .zip(&count)
        .map(|(s, &c)| s / c.max(1) as f64)
        .collect();
    let template = envelope_template(slots, ets.slot_s);
    let m = full_symbol_match(&profile, &template, cfg.parabolic);
    if m.score < cfg.detect_threshold {
        return Err(SyncError::NoNbpu { score: m.score });
    }
    let offset_s = wrap_offset(m.refined * ets.slot_s, ets);
    Ok(BootstrapResult {
        offset_s,
        window_center_slot: (slots / 2 + m.shift) % slots,
        frames_used: frames,
        coverage_frames: n_cover,
        score: m.score,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyncState {
    /// Estimated arrival offset of the NBPU in the current period.
    pub t0_estimate: f64,
    pub window_center_slot: usize,
    pub locked: bool,
    /// Drift the receiver compensates for, seconds per period.
    pub drift_model: f64,
    pub period: u64,
    missed: usize,
}

impl SyncState {
    pub fn from_bootstrap(b: &BootstrapResult, next_period: u64) -> Self {
        Self {
            t0_estimate: b.offset_s,
            window_center_slot: b.window_center_slot,
            locked: true,
            drift_model: 0.0,
            period: next_period,
            missed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodReport {
    pub period: u64,
    pub score: f64,
    pub shift: i32,
    /// Estimate minus ground truth, when the source knows the truth.
    pub error_s: Option<f64>,
}

/// One 20 ms tracking step: t0 advances by the known period (plus modelled
/// drift), five samples are taken around the expected peak and scored by the
/// windowed matched filter.
pub fn synchronize<S: EnvelopeSource + ?Sized>(
    src: &mut S,
    state: &mut SyncState,
    cfg: &SyncConfig,
) -> Result<PeriodReport, SyncError> {
    if !state.locked {
        return Err(SyncError::NotLocked);
    }
    let ets = &cfg.ets;
    let half = ets.slots_per_symbol / 2;
    state.t0_estimate += state.drift_model;
    let template = envelope_template(ets.slots_per_symbol, ets.slot_s);
    let window = [template[half - 1], template[half], template[half + 1]];
    let mut samples = [0.0; 5];
    for (i, s) in samples.iter_mut().enumerate() {
        let u = (half + i) as f64 * ets.slot_s - 2.0 * ets.slot_s + state.t0_estimate;
        *s = src.sample(state.period, i % ets.sync_symbols, u);
    }
    let (score, shift) = matched_filter_window(&samples, &window, src.noise_floor());
    if score < cfg.lock_threshold {
        state.missed += 1;
    } else {
        state.missed = 0;
        if cfg.track_corrections {
            state.t0_estimate -= f64::from(shift) * ets.slot_s;
        }
    }
    let error_s = src
        .true_offset(state.period)
        .map(|truth| wrap_offset(state.t0_estimate - truth, ets));
    let report = PeriodReport {
        period: state.period,
        score,
        shift,
        error_s,
    };
    state.period += 1;
    if state.missed >= cfg.lock_loss_periods {
        state.locked = false;
        return Err(SyncError::LockLost {
            period: report.period,
        });
    }
    Ok(report)
}

/// NBPU subframe whose five sync symbols carry the max-power symbol.
pub fn sync_grid() -> ResourceGrid {
    let mut g = ResourceGrid::new(NrsPattern::default()).expect("default NRS is valid");
    for s in 0..5 {
        g.set_symbol(s, &ON_SYMBOL)
            .expect("sync symbols hold no NRS");
    }
    g
}

/// Residual arrival offsets drawn by the Monte-Carlo, in slots.
pub const TRUE_OFFSET_RANGE_SLOTS: f64 = 8.0;

/// One trial: random arrival offset, bootstrap, one tracking period.
/// Returns |error| in seconds, or `None` if no NBPU was detected.
pub fn run_sync_trial(
    snr_db: f64,
    cfg: &SyncConfig,
    filter: &BandpassFilter,
    seed: u64,
) -> Option<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tau = rng.random_range(-TRUE_OFFSET_RANGE_SLOTS..TRUE_OFFSET_RANGE_SLOTS) * cfg.ets.slot_s;
    let mut rx = FastReceiver::new(&sync_grid(), filter, snr_db, &[], tau, rng.random());
    let boot = bootstrap_sweep(&mut rx, cfg, 0).ok()?;
    let mut state = SyncState::from_bootstrap(&boot, boot.frames_used as u64);
    match synchronize(&mut rx, &mut state, cfg) {
        Ok(r) => r.error_s.map(f64::abs),
        Err(_) => {
            Some(wrap_offset(state.t0_estimate - rx.offset_at(state.period - 1), &cfg.ets).abs())
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyncPoint {
    pub snr_db: f64,
    pub trials: usize,
    /// Trials where bootstrap found no NBPU; their error counts as half a
    /// symbol.
    pub missed: usize,
    pub mean_error_ns: f64,
    pub p95_error_ns: f64,
    pub max_error_ns: f64,
    pub errors_ns: Vec<f64>,
}

/// Monte-Carlo sync error over an SNR list. Trial seeds derive from `seed`,
/// the SNR index and the trial index, so results do not depend on thread
/// scheduling.
pub fn sync_sweep(
    snrs: &[f64],
    trials: usize,
    seed: u64,
    cfg: &SyncConfig,
) -> Result<Vec<SyncPoint>, SyncError> {
    cfg.validate()?;
    let filter = BandpassFilter::design(DEFAULT_SAMPLE_RATE_HZ * 4.0, FilterSpec::default())?;
    let half_symbol_ns = cfg.ets.slot_s * cfg.ets.slots_per_symbol as f64 / 2.0 * 1e9;
    Ok(snrs
        .iter()
        .enumerate()
        .map(|(i, &snr)| {
            let results: Vec<Option<f64>> = (0..trials)
                .into_par_iter()
                .map(|t| run_sync_trial(snr, cfg, &filter, trial_seed(seed, i, t)))
                .collect();
            let missed = results.iter().filter(|r| r.is_none()).count();
            let mut errors: Vec<f64> = results
                .iter()
                .map(|r| r.map_or(half_symbol_ns, |e| e * 1e9))
                .collect();
            let mean = errors.iter().sum::<f64>() / errors.len().max(1) as f64;
            let mut sorted = errors.clone();
            sorted.sort_by(f64::total_cmp);
            let p95 = percentile(&sorted, 0.95);
            let max = sorted.last().copied().unwrap_or(0.0);
            errors.shrink_to_fit();
            SyncPoint {
                snr_db: snr,
                trials,
                missed,
                mean_error_ns: mean,
                p95_error_ns: p95,
                max_error_ns: max,
                errors_ns: errors,
            }
        })
        .collect())
}

pub fn trial_seed(seed: u64, point: usize, trial: usize) -> u64 {
    seed ^ (point as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (trial as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F)
}

/// Nearest-rank percentile of sorted data.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let idx = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len()) - 1;
    sorted[idx]
}

/// Reconfiguration must land inside the FR2 cyclic prefix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingBudget {
    pub reconfig_latency_ns: f64,
    pub symbol_cp_ns: f64,
    pub half_subframe_cp_ns: f64,
    pub noncolocated_penalty_ns: f64,
}

impl Default for TimingBudget {
    fn default() -> Self {
        Self {
            reconfig_latency_ns: 10.0,
            symbol_cp_ns: 585.0,
            half_subframe_cp_ns: 1106.0,
            noncolocated_penalty_ns: 260.0,
        }
    }
}

impl TimingBudget {
    /// Colocated: error + latency inside the symbol CP.
    pub fn fits_symbol_cp(&self, sync_error_ns: f64) -> bool {
        sync_error_ns.abs() + self.reconfig_latency_ns < self.symbol_cp_ns
    }

    /// Non-colocated: the extra propagation penalty against the longer
    /// half-subframe CP.
    pub fn fits_half_subframe_cp(&self, sync_error_ns: f64) -> bool {
        sync_error_ns.abs() + self.reconfig_latency_ns + self.noncolocated_penalty_ns
            < self.half_subframe_cp_ns
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn filter() -> BandpassFilter {
        BandpassFilter::design(DEFAULT_SAMPLE_RATE_HZ * 4.0, FilterSpec::default()).unwrap()
    }

    #[test]
    fn noiseless_bootstrap_is_within_half_slot() {
        let cfg = SyncConfig {
            bootstrap_sweeps: 1,
            ..Default::default()
        };
        for tau_slots in [-7.3, -0.5, 0.0, 0.49, 3.7] {
            let tau = tau_slots * cfg.ets.slot_s;
            let mut rx = FastReceiver::new(&sync_grid(), &filter(), f64::INFINITY, &[], tau, 1);
            let b = bootstrap_sweep(&mut rx, &cfg, 0).unwrap();
            assert!(
                (b.offset_s - tau).abs() <= cfg.ets.slot_s / 2.0 + 1e-12,
                "{tau_slots}"
            );
            assert_eq!(b.frames_used, b.coverage_frames);
        }
    }

    #[test]
    fn no_nbpu_is_reported() {
        let cfg = SyncConfig::default();
        let mut rx = FastReceiver::new(&sync_grid(), &filter(), 0.0, &[], 0.0, 5).absent();
        assert!(matches!(
            bootstrap_sweep(&mut rx, &cfg, 0),
            Err(SyncError::NoNbpu { .. })
        ));
    }

    #[test]
    fn drift_accumulates_without_updates() {
        let cfg = SyncConfig::default();
        let mut rx = FastReceiver::new(&sync_grid(), &filter(), f64::INFINITY, &[], 0.0, 1)
            .with_drift(20e-9);
        let boot = bootstrap_sweep(&mut rx, &cfg, 0).unwrap();
        // Re-anchor at the bootstrap's last period so the first error is the
        // bootstrap quantisation alone.
        let mut state = SyncState::from_bootstrap(&boot, 0);
        state.t0_estimate = 0.0;
        let mut last: Option<f64> = None;
        for _ in 0..10 {
            let e = synchronize(&mut rx, &mut state, &cfg)
                .unwrap()
                .error_s
                .unwrap();
            if let Some(prev) = last {
                assert!(((prev - e) - 20e-9).abs() < 1e-12);
            }
            last = Some(e);
        }
    }

    #[test]
    fn lock_is_lost_after_three_misses() {
        let cfg = SyncConfig::default();
        let mut rx = FastReceiver::new(&sync_grid(), &filter(), f64::INFINITY, &[], 0.0, 1);
        let boot = bootstrap_sweep(&mut rx, &cfg, 0).unwrap();
        let mut state = SyncState::from_bootstrap(&boot, 1000);
        assert!(synchronize(&mut rx, &mut state, &cfg).unwrap().score > 0.99);
        let mut dark = FastReceiver::new(&sync_grid(), &filter(), 0.0, &[], 0.0, 9).absent();
        let mut outcome: Result<(), SyncError> = Ok(());
        for _ in 0..3 {
            outcome = synchronize(&mut dark, &mut state, &cfg).map(|_| ());
            if outcome.is_err() {
                break;
            }
        }
        assert!(matches!(outcome, Err(SyncError::LockLost { .. })));
        assert!(!state.locked);
    }

    #[test]
    fn budget_thresholds() {
        let b = TimingBudget::default();
        assert!(b.fits_symbol_cp(574.0));
        assert!(!b.fits_symbol_cp(575.0));
        assert!(b.fits_half_subframe_cp(835.0));
        assert!(!b.fits_half_subframe_cp(836.0));
    }

    #[test]
    fn percentile_nearest_rank() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(percentile(&v, 0.95), 95.0);
        assert_eq!(percentile(&v, 1.0), 100.0);
    }
}
