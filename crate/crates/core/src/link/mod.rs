//! NBPU framing and the OOK link: sync symbols, five info bits, and the
//! envelope-receiver slicer with its BER Monte-Carlo.

mod frame;
mod ook;

pub use frame::{
    assemble_frame, InfoEncoding, NbpuFrame, ReconfigInfo, INFO_BITS, INFO_SYMBOLS, SYNC_SYMBOLS,
};
pub use ook::{
    adaptive_threshold, ber_sweep, center_phasors, demodulate_ook, receive_frame, BerPoint,
    LinkCondition, ReceivedFrame,
};

use thiserror::Error;

use crate::emulation::EmulationError;
use crate::frontend::FrontendError;
use crate::waveform::WaveformError;

#[derive(Debug, Error)]
pub enum LinkError {
    #[error("info value {0} does not fit in 5 bits")]
    InfoTooLarge(u32),
    #[error("invalid reconfiguration info: {0}")]
    InvalidInfo(String),
    #[error("invalid link configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Emulation(#[from] EmulationError),
    #[error(transparent)]
    Waveform(#[from] WaveformError),
    #[error(transparent)]
    Frontend(#[from] FrontendError),
}
