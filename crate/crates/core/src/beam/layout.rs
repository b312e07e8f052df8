use serde::{Deserialize, Serialize};

use super::BeamError;

/// FR2 basic time unit, 1/(480 kHz · 4096).
pub const TC_S: f64 = 1.0 / (480e3 * 4096.0);
/// μ = 3 (120 kHz) symbol: useful part, normal CP, and the extra CP on the
/// first symbol of each half subframe.
pub const USEFUL_TC: f64 = 16384.0;
pub const CP_TC: f64 = 1152.0;
pub const LONG_CP_EXTRA_TC: f64 = 1024.0;
pub const SYMBOLS_PER_HALF_SUBFRAME: usize = 56;
pub const HALF_SUBFRAME_S: f64 = 0.5e-3;
pub const SURFACE_STRIDE: usize = 8;

/// Normal FR2 CP, ≈ 585.9 ns.
pub fn symbol_cp_s() -> f64 {
    CP_TC * TC_S
}

/// CP at half-subframe boundaries, ≈ 1106.8 ns.
pub fn long_cp_s() -> f64 {
    (CP_TC + LONG_CP_EXTRA_TC) * TC_S
}

/// Start (CP start) of symbol `l` counted from a half-frame boundary.
pub fn symbol_start_s(l: usize) -> f64 {
    let (half, r) = (l / SYMBOLS_PER_HALF_SUBFRAME, l % SYMBOLS_PER_HALF_SUBFRAME);
    let extra = if r > 0 { LONG_CP_EXTRA_TC } else { 0.0 };
    half as f64 * HALF_SUBFRAME_S + (r as f64 * (USEFUL_TC + CP_TC) + extra) * TC_S
}

/// First symbol of each SSB in an L = 64 half frame at 120 kHz
/// ({4, 8, 16, 20} + 28n, n ∉ {4, 9, 14}).
pub fn ssb_first_symbols() -> Vec<usize> {
    (0..19usize)
        .filter(|n| n % 5 != 4)
        .flat_map(|n| [4, 8, 16, 20].map(|o| o + 28 * n))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CpMode {
    /// Any symbol boundary (585 ns CP, or the long one where it falls).
    #[default]
    Symbol,
    /// Half-subframe boundaries only (1106 ns CP).
    HalfSubframe,
}

impl CpMode {
    /// Nearest boundary at or after `t` (period-relative seconds).
    pub fn align(self, t: f64) -> f64 {
        let eps = 1e-12;
        let half = (t / HALF_SUBFRAME_S - eps).ceil().max(0.0);
        match self {
            Self::HalfSubframe => half * HALF_SUBFRAME_S,
            Self::Symbol => {
                let base =
                    ((t / HALF_SUBFRAME_S).floor().max(0.0)) as usize * SYMBOLS_PER_HALF_SUBFRAME;
                (base..)
                    .map(symbol_start_s)
                    .find(|&s| s >= t - eps)
                    .expect("symbol boundaries are unbounded")
            }
        }
    }

    pub fn is_boundary(self, t: f64) -> bool {
        (self.align(t) - t).abs() < 1e-12
    }

    /// CP protecting a reconfiguration at boundary `t`.
    pub fn cp_at(self, t: f64) -> f64 {
        let r = t / HALF_SUBFRAME_S;
        if (r - r.round()).abs() < 1e-9 {
            long_cp_s()
        } else {
            symbol_cp_s()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PeriodLayout {
    pub period_s: f64,
    pub sweep_window_s: f64,
    pub ssb_count: usize,
    pub surface_ssb_count: usize,
    pub report_delay_min_s: f64,
    pub report_delay_max_s: f64,
    /// Subframe (1 ms) carrying surface 0's NBPU; surface s uses this − s.
    pub nbpu_subframe: usize,
    pub nbpu_active_s: f64,
    pub wake_lead_s: f64,
    /// Awake time per reconfiguration, wake lead included.
    pub reconfig_burst_s: f64,
    pub cp_mode: CpMode,
}

impl Default for PeriodLayout {
    fn default() -> Self {
        Self {
            period_s: 20e-3,
            sweep_window_s: 5e-3,
            ssb_count: 64,
            surface_ssb_count: 8,
            report_delay_min_s: 25e-3,
            report_delay_max_s: 29e-3,
            nbpu_subframe: 19,
            nbpu_active_s: 1e-3,
            wake_lead_s: 10e-6,
            reconfig_burst_s: 156e-6,
            cp_mode: CpMode::Symbol,
        }
    }
}

impl PeriodLayout {
    pub fn data_window_s(&self) -> f64 {
        self.period_s - self.sweep_window_s
    }

    pub fn validate(&self) -> Result<(), BeamError> {
        let bad = |m: &str| Err(BeamError::Config(m.into()));
        if self.ssb_count == 0 || self.ssb_count > 64 {
            return bad("ssb_count must be in 1..=64");
        }
        if self.surface_ssb_count == 0 || self.surface_ssb_count > self.ssb_count {
            return bad("surface_ssb_count must be in 1..=ssb_count");
        }
        if !(self.sweep_window_s > 0.0 && self.sweep_window_s < self.period_s) {
            return bad("sweep window must lie inside the period");
        }
        if !(0.0 <= self.report_delay_min_s && self.report_delay_min_s <= self.report_delay_max_s) {
            return bad("report delay range is empty");
        }
        if (self.nbpu_subframe + 1) as f64 * 1e-3 > self.period_s + 1e-12 {
            return bad("NBPU subframe outside the period");
        }
        if self.reconfig_burst_s < self.wake_lead_s || self.wake_lead_s < 0.0 {
            return bad("reconfiguration burst shorter than the wake lead");
        }
        Ok(())
    }

    /// SSB indices owned by surface `s`: {s + 8j}, so up to eight surfaces
    /// interleave through one sweep.
    pub fn surface_ssbs(&self, s: usize, count: usize) -> Result<Vec<usize>, BeamError> {
        if s >= SURFACE_STRIDE {
            return Err(BeamError::Config(format!(
                "at most {SURFACE_STRIDE} surfaces share a sweep"
            )));
        }
        let v: Vec<usize> = (0..count).map(|j| s + SURFACE_STRIDE * j).collect();
        if v.iter().any(|&k| k >= self.ssb_count) {
            return Err(BeamError::Config(format!(
                "surface {s} needs SSBs beyond {}",
                self.ssb_count
            )));
        }
        Ok(v)
    }

    /// Period-relative start of SSB `k`.
    pub fn ssb_time(&self, k: usize) -> f64 {
        symbol_start_s(ssb_first_symbols()[k])
    }

    pub fn nbpu_time(&self, surface: usize) -> f64 {
        (self.nbpu_subframe - surface) as f64 * 1e-3
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cp_lengths() {
        assert!((symbol_cp_s() * 1e9 - 585.9).abs() < 0.1);
        assert!((long_cp_s() * 1e9 - 1106.8).abs() < 0.1);
    }

    #[test]
    fn half_subframe_tiles() {
        assert!((symbol_start_s(56) - 0.5e-3).abs() < 1e-15);
        assert!((symbol_start_s(560) - 5e-3).abs() < 1e-14);
    }

    #[test]
    fn sixty_four_ssbs_inside_sweep() {
        let s = ssb_first_symbols();
        assert_eq!(s.len(), 64);
        assert!(s.windows(2).all(|w| w[1] > w[0]));
        assert!(symbol_start_s(s[63] + 4) <= 5e-3);
    }

    #[test]
    fn alignment() {
        assert!(CpMode::HalfSubframe.is_boundary(12.5e-3));
        assert!(CpMode::Symbol.is_boundary(5e-3));
        let t = CpMode::Symbol.align(1e-6);
        assert!((t - symbol_start_s(1)).abs() < 1e-15);
        assert!((CpMode::HalfSubframe.align(0.6e-3) - 1e-3).abs() < 1e-15);
        assert_eq!(CpMode::Symbol.cp_at(5e-3), long_cp_s());
        assert_eq!(CpMode::Symbol.cp_at(symbol_start_s(3)), symbol_cp_s());
    }

    #[test]
    fn surfaces_interleave_ssbs() {
        let l = PeriodLayout::default();
        assert_eq!(
            l.surface_ssbs(0, 8).unwrap(),
            vec![0, 8, 16, 24, 32, 40, 48, 56]
        );
        assert_eq!(l.surface_ssbs(3, 8).unwrap()[1], 11);
        assert!(l.surface_ssbs(8, 1).is_err());
        assert!(PeriodLayout { ssb_count: 32, ..l }
            .surface_ssbs(0, 8)
            .is_err());
    }
}
