//! NBPU timing recovery: equivalent-time sampling of the envelope across
//! 20 ms periods, a full-symbol matched filter at bootstrap and a three-slot
//! windowed filter for lock monitoring afterwards.

mod engine;
mod ets;
mod matched;
mod source;

pub use engine::{
    bootstrap_sweep, percentile, run_sync_trial, sync_grid, sync_sweep, synchronize, trial_seed,
    wrap_offset, BootstrapResult, PeriodReport, SyncConfig, SyncPoint, SyncState, TimingBudget,
    TRUE_OFFSET_RANGE_SLOTS,
};
pub use ets::{coverage_frames, equivalent_time_sample, gcd, EtsConfig};
pub use matched::{envelope_template, full_symbol_match, matched_filter_window, FullSymbolMatch};
pub use source::{filtered_noise_variance, EnvelopeSource, FastReceiver, TraceSource};

use thiserror::Error;

use crate::frontend::FrontendError;

#[derive(Debug, Error)]
pub enum SyncError {
    #[error("no NBPU detected (correlation {score:.3})")]
    NoNbpu { score: f64 },
    #[error("lock lost in period {period}")]
    LockLost { period: u64 },
    #[error("receiver is not locked")]
    NotLocked,
    #[error("invalid sync configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Frontend(#[from] FrontendError),
}
