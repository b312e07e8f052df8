//! Simulation models for NR-Surface: an NB-IoT-controlled reconfigurable
//! metasurface and the mmWave beam management it enables.

pub mod acceptance;
pub mod beam;
pub mod emulation;
pub mod frontend;
pub mod gf2;
pub mod link;
pub mod power;
pub mod surface;
pub mod sync;
pub mod waveform;
