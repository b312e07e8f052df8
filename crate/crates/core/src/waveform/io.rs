use std::io::{self, Write};

use super::grid::{ResourceGrid, SUBCARRIERS, SYMBOLS_PER_SUBFRAME};
use super::modulator::BasebandSignal;

/// Interleaved little-endian f32 I/Q.
pub fn write_iq_f32le<W: Write>(mut w: W, sig: &BasebandSignal) -> io::Result<()> {
    let mut buf = Vec::with_capacity(sig.samples.len() * 8);
    for s in &sig.samples {
        buf.extend_from_slice(&(s.re as f32).to_le_bytes());
        buf.extend_from_slice(&(s.im as f32).to_le_bytes());
    }
    w.write_all(&buf)
}

pub fn read_iq_f32le(bytes: &[u8]) -> Vec<num_complex::Complex32> {
    bytes
        .chunks_exact(8)
        .map(|c| {
            let re = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            let im = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
            num_complex::Complex32::new(re, im)
        })
        .collect()
}

/// CSV with columns `symbol,subcarrier,phase,is_nrs`.
pub fn write_grid_csv<W: Write>(mut w: W, grid: &ResourceGrid) -> io::Result<()> {
    writeln!(w, "symbol,subcarrier,phase,is_nrs")?;
    for s in 0..SYMBOLS_PER_SUBFRAME {
        for c in 0..SUBCARRIERS {
            writeln!(
                w,
                "{s},{c},{:.9},{}",
                grid.get(s, c).radians(),
                u8::from(grid.is_nrs(s, c))
            )?;
        }
    }
    Ok(())
}
