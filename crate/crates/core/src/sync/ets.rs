use crate::waveform::{useful_symbol_s, DEFAULT_SAMPLE_RATE_HZ};

use super::source::EnvelopeSource;
use super::SyncError;

/// Equivalent-time sampling geometry. The slot is one period of the
/// 3.84 Msps grid (≈260.4 ns), so 256 slots tile a useful symbol exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtsConfig {
    pub slot_s: f64,
    pub slots_per_symbol: usize,
    pub sync_symbols: usize,
    /// Slot advance of the first sample from one 20 ms frame to the next.
    pub stride: usize,
}

impl Default for EtsConfig {
    fn default() -> Self {
        Self {
            slot_s: 1.0 / DEFAULT_SAMPLE_RATE_HZ,
            slots_per_symbol: 256,
            sync_symbols: 5,
            stride: 13,
        }
    }
}

pub fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl EtsConfig {
    pub fn validate(&self) -> Result<(), SyncError> {
        let span = self.slot_s * self.slots_per_symbol as f64;
        if (span - useful_symbol_s()).abs() > self.slot_s {
            return Err(SyncError::Config(format!(
                "{} slots of {} s do not tile a symbol",
                self.slots_per_symbol, self.slot_s
            )));
        }
        if self.sync_symbols == 0 || self.slots_per_symbol == 0 {
            return Err(SyncError::Config("empty sampling geometry".into()));
        }
        if gcd(self.stride, self.slots_per_symbol) != 1 {
            return Err(SyncError::Config(format!(
                "stride {} shares a factor with {} slots",
                self.stride, self.slots_per_symbol
            )));
        }
        Ok(())
    }

    /// Slot sampled on sync symbol `j` of bootstrap frame `n`.
    pub fn bootstrap_slot(&self, n: usize, j: usize) -> usize {
        (self.stride * n + j) % self.slots_per_symbol
    }

    /// Frames until every slot has been sampled at least once.
    pub fn coverage_frames(&self) -> Option<usize> {
        coverage_frames(self.stride, self.sync_symbols, self.slots_per_symbol)
    }
}

/// Smallest N such that {stride·n + j mod slots : n < N, j < per_frame}
/// covers every slot, or `None` if it never does.
pub fn coverage_frames(stride: usize, per_frame: usize, slots: usize) -> Option<usize> {
    let mut seen = vec![false; slots];
    let mut missing = slots;
    for n in 0..slots {
        for j in 0..per_frame {
            let s = (stride * n + j) % slots;
            if !std::mem::replace(&mut seen[s], true) {
                missing -= 1;
            }
        }
        if missing == 0 {
            return Some(n + 1);
        }
    }
    None
}

/// One sample per sync symbol: sample i lands `(base_offset + i)` slots
/// (mod one symbol) after the useful start of sync symbol i.
pub fn equivalent_time_sample<S: EnvelopeSource + ?Sized>(
    src: &mut S,
    cfg: &EtsConfig,
    period: u64,
    base_offset: usize,
    extra_delay_s: f64,
) -> Vec<f64> {
    (0..cfg.sync_symbols)
        .map(|i| {
            let slot = (base_offset + i) % cfg.slots_per_symbol;
            src.sample(period, i, slot as f64 * cfg.slot_s + extra_delay_s)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_geometry() {
        let cfg = EtsConfig::default();
        cfg.validate().unwrap();
        assert!((cfg.slot_s * 1e9 - 260.4).abs() < 0.1);
        assert!(cfg.coverage_frames().unwrap() <= 60);
    }

    #[test]
    fn unit_stride_single_sample_needs_256() {
        assert_eq!(coverage_frames(1, 1, 256), Some(256));
    }

    #[test]
    fn even_stride_rejected() {
        let cfg = EtsConfig {
            stride: 12,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = EtsConfig {
            slot_s: 300e-9,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }
}
