//! NB-IoT downlink subframes: resource grid, OFDM modulation with the
//! normal cyclic prefix, and the 20 ms NBPU frame schedule.

mod grid;
pub mod io;
mod modulator;
mod schedule;

pub use grid::{
    qpsk_phase, wrap_phase, NrsPattern, Qpsk, ResourceGrid, NRS_SYMBOLS, OFF_SYMBOL, ON_SYMBOL,
    SUBCARRIERS, SYMBOLS_PER_SUBFRAME,
};
pub use modulator::{
    demodulate_subframe, modulate_subframe, modulate_symbol, subcarrier_bin, subcarrier_offset_hz,
    symbol_timing, unit_coeffs, units_to_s, useful_start_s, useful_symbol_s, BasebandSignal,
    ModulatorConfig, SubframeWaveform, SymbolTiming, BASIC_RATE_HZ, DEFAULT_SAMPLE_RATE_HZ,
    SUBCARRIER_SPACING_HZ, SUBFRAME_S,
};
pub use schedule::{
    build_frame_schedule, FrameConfig, FrameSchedule, PERIOD_S, SUBFRAMES_PER_PERIOD,
    SYMBOLS_PER_PERIOD,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum WaveformError {
    #[error("invalid resource grid: {0}")]
    InvalidGrid(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
