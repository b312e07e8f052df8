//! Reflective metasurface: varactor unit-cell circuit, 1-bit beam
//! codebooks and array-factor patterns.

mod array;
mod codebook;
mod varactor;

pub use array::{
    angle_grid, array_factor, bit_gamma, column_factor, direction_uv, half_power_width, pattern_of,
    planar_gain_db, planar_main_lobe, BeamPattern, PlanarLobe, SurfaceConfig, SPEED_OF_LIGHT,
};
pub use codebook::{
    build_codebook, codebook_3d, codeword_3d_gain_db, ideal_peak_db, ideal_phases, lobe_pattern,
    quantize, steer_codebook, Codeword, Codeword3d, MAX_AZ_3D_DEG, MAX_EL_3D_DEG, MAX_STEER_DEG,
};
pub use varactor::{
    reconfig_cost, VaractorModel, CELL_SWITCH_ENERGY_J, DEFAULT_CARRIER_HZ, GPIO_RISE_S, Z0,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SurfaceError {
    #[error("bias {0} V is not a modelled GPIO state (0 or 3.3 V)")]
    Bias(f64),
    #[error("invalid surface configuration: {0}")]
    Config(String),
}
