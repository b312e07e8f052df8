use super::grid::SYMBOLS_PER_SUBFRAME;
use super::modulator::{symbol_timing, units_to_s, SUBFRAME_UNITS};
use super::WaveformError;

pub const SUBFRAMES_PER_PERIOD: usize = 20;
pub const PERIOD_S: f64 = 20e-3;
pub const PERIOD_UNITS: i64 = SUBFRAME_UNITS * SUBFRAMES_PER_PERIOD as i64;
pub const SYMBOLS_PER_PERIOD: usize = SUBFRAMES_PER_PERIOD * SYMBOLS_PER_SUBFRAME;

/// Which subframes of the 20 ms beam-management period carry an NBPU.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameConfig {
    pub nbpu_subframes: Vec<usize>,
}

impl Default for FrameConfig {
    fn default() -> Self {
        Self {
            nbpu_subframes: vec![0],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameSchedule {
    pub period: f64,
    pub nbpu_subframes: Vec<usize>,
    pub symbols_per_period: usize,
}

pub fn build_frame_schedule(cfg: &FrameConfig) -> Result<FrameSchedule, WaveformError> {
    if cfg.nbpu_subframes.is_empty() {
        return Err(WaveformError::InvalidConfig(
            "at least one NBPU subframe is required".into(),
        ));
    }
    let mut subframes = cfg.nbpu_subframes.clone();
    subframes.sort_unstable();
    subframes.dedup();
    if subframes.len() != cfg.nbpu_subframes.len() {
        return Err(WaveformError::InvalidConfig(
            "duplicate NBPU subframe index".into(),
        ));
    }
    if let Some(&bad) = subframes.iter().find(|&&i| i >= SUBFRAMES_PER_PERIOD) {
        return Err(WaveformError::InvalidConfig(format!(
            "NBPU subframe index {bad} >= 20"
        )));
    }
    Ok(FrameSchedule {
        period: PERIOD_S,
        nbpu_subframes: subframes,
        symbols_per_period: SYMBOLS_PER_PERIOD,
    })
}

impl FrameSchedule {
    /// Start of the cyclic prefix of global symbol `n`, counted from the
    /// start of period 0, in basic time units. Exact integer arithmetic keeps
    /// the 280-symbol periodicity exact.
    pub fn symbol_start_units(&self, n: u64) -> i64 {
        let per = SYMBOLS_PER_PERIOD as u64;
        let period = (n / per) as i64;
        let within = (n % per) as usize;
        let subframe = (within / SYMBOLS_PER_SUBFRAME) as i64;
        let sym = within % SYMBOLS_PER_SUBFRAME;
        period * PERIOD_UNITS + subframe * SUBFRAME_UNITS + symbol_timing(sym).start
    }

    pub fn symbol_start(&self, n: u64) -> f64 {
        units_to_s(self.symbol_start_units(n))
    }

    /// NBPU transmissions in `period` as (start, end) seconds.
    pub fn nbpu_windows(&self, period: u64) -> Vec<(f64, f64)> {
        self.nbpu_subframes
            .iter()
            .map(|&sf| {
                let start = period as f64 * self.period + sf as f64 * 1e-3;
                (start, start + 1e-3)
            })
            .collect()
    }

    pub fn nbpu_per_period(&self) -> usize {
        self.nbpu_subframes.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_schedule() {
        let s = build_frame_schedule(&FrameConfig::default()).unwrap();
        assert_eq!(s.period, 0.020);
        assert_eq!(s.symbols_per_period, 280);
        assert_eq!(s.nbpu_windows(0), vec![(0.0, 1e-3)]);
        let w = s.nbpu_windows(3);
        assert!((w[0].0 - 0.060).abs() < 1e-12);
    }

    #[test]
    fn two_nbpus_for_two_surfaces() {
        let s = build_frame_schedule(&FrameConfig {
            nbpu_subframes: vec![10, 0],
        })
        .unwrap();
        assert_eq!(s.nbpu_per_period(), 2);
        assert_eq!(s.nbpu_subframes, vec![0, 10]);
    }

    #[test]
    fn invalid_configs() {
        assert!(build_frame_schedule(&FrameConfig {
            nbpu_subframes: vec![]
        })
        .is_err());
        assert!(build_frame_schedule(&FrameConfig {
            nbpu_subframes: vec![20]
        })
        .is_err());
        assert!(build_frame_schedule(&FrameConfig {
            nbpu_subframes: vec![3, 3]
        })
        .is_err());
    }

    #[test]
    fn periodicity_is_exact() {
        let s = build_frame_schedule(&FrameConfig::default()).unwrap();
        for n in [0u64, 1, 13, 14, 139, 279, 1000, 123_457] {
            assert_eq!(
                s.symbol_start_units(n + 280) - s.symbol_start_units(n),
                PERIOD_UNITS
            );
        }
    }
}
