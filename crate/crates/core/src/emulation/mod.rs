//! NBPU emulation: the downlink coding chain as an affine map over GF(2)
//! and its inversion, which yields payload bits that put chosen QPSK phases
//! on the NBPU resource elements.

mod model;
mod pipeline;

pub use model::{
    build_affine_model, controllable_harmonics, solve_payload, CodingPipeline, PhaseTargets,
    CONSTRAINED_BITS, NBPU_SYMBOLS,
};
pub use pipeline::{
    attach_crc24a, data_elements, encode_pipeline, gold_sequence, map_to_grids, rate_match,
    subblock_interleave_indices, tbcc_encode, PipelineConfig, CRC_BITS, DEFAULT_SCRAMBLER_INIT,
    PAYLOAD_BITS, SUBBLOCK_PERMUTATION, TBCC_POLYS,
};

use thiserror::Error;

use crate::waveform::WaveformError;

#[derive(Debug, Error)]
pub enum EmulationError {
    #[error("payload has {got} bits, expected {expected}")]
    PayloadLength { expected: usize, got: usize },
    #[error("invalid targets: {0}")]
    InvalidTargets(String),
    /// (symbol, subcarrier, bit) of the target bits that conflict.
    #[error("targets unsatisfiable; conflicting bits (symbol, subcarrier, bit): {bits:?}")]
    Unsatisfiable { bits: Vec<(usize, usize, usize)> },
    #[error("affine model disagrees with the encoder on probe {probe}")]
    ProbeMismatch { probe: usize },
    #[error("invalid pipeline configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Waveform(#[from] WaveformError),
}
