use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use super::WaveformError;

pub const SUBCARRIERS: usize = 12;
pub const SYMBOLS_PER_SUBFRAME: usize = 14;
/// Symbol columns that carry narrowband reference signals.
pub const NRS_SYMBOLS: [usize; 4] = [5, 6, 12, 13];

/// One of the four QPSK constellation phases, `π/4 + quadrant·π/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Qpsk(u8);

impl Qpsk {
    pub const Q1: Qpsk = Qpsk(0); // π/4
    pub const Q2: Qpsk = Qpsk(1); // 3π/4
    pub const Q3: Qpsk = Qpsk(2); // 5π/4
    pub const Q4: Qpsk = Qpsk(3); // 7π/4

    pub fn from_quadrant(q: u8) -> Self {
        Qpsk(q % 4)
    }

    pub fn quadrant(self) -> u8 {
        self.0
    }

    pub fn radians(self) -> f64 {
        FRAC_PI_4 + f64::from(self.0) * FRAC_PI_2
    }

    /// Gray mapping: a bit pair (b0, b1) lands on ((1-2b0) + j(1-2b1))/√2.
    pub fn from_bits(b0: bool, b1: bool) -> Self {
        match (b0, b1) {
            (false, false) => Qpsk::Q1,
            (true, false) => Qpsk::Q2,
            (true, true) => Qpsk::Q3,
            (false, true) => Qpsk::Q4,
        }
    }

    pub fn to_bits(self) -> (bool, bool) {
        match self.0 {
            0 => (false, false),
            1 => (true, false),
            2 => (true, true),
            _ => (false, true),
        }
    }

    /// Accepts any angle within 1e-6 rad of a constellation phase (mod 2π).
    pub fn from_radians(phase: f64) -> Option<Self> {
        let q = ((phase - FRAC_PI_4) / FRAC_PI_2).round();
        let residual = phase - FRAC_PI_4 - q * FRAC_PI_2;
        if residual.abs() > 1e-6 {
            return None;
        }
        Some(Qpsk::from_quadrant(q.rem_euclid(4.0) as u8))
    }

    /// Nearest constellation point to an arbitrary angle.
    pub fn nearest(phase: f64) -> Self {
        let q = ((phase - FRAC_PI_4) / FRAC_PI_2).round();
        Qpsk::from_quadrant(q.rem_euclid(4.0) as u8)
    }

    /// The point rotated by π.
    pub fn flipped(self) -> Self {
        Qpsk::from_quadrant(self.0 + 2)
    }
}

use Qpsk as Q;

/// Max-power NBPU symbol: even (0-indexed) subcarriers at π/4, odd at 5π/4.
/// Every pair at spacing k then beats with phase kπ, so each envelope
/// harmonic reaches its largest amplitude 12−k.
pub const ON_SYMBOL: [Qpsk; SUBCARRIERS] = [
    Q::Q1,
    Q::Q3,
    Q::Q1,
    Q::Q3,
    Q::Q1,
    Q::Q3,
    Q::Q1,
    Q::Q3,
    Q::Q1,
    Q::Q3,
    Q::Q1,
    Q::Q3,
];

/// NBPU symbol whose envelope is zero at the centre of the useful part.
pub const OFF_SYMBOL: [Qpsk; SUBCARRIERS] = [
    Q::Q1,
    Q::Q1,
    Q::Q3,
    Q::Q3,
    Q::Q3,
    Q::Q3,
    Q::Q1,
    Q::Q1,
    Q::Q1,
    Q::Q1,
    Q::Q3,
    Q::Q3,
];

/// Radians for a 2-bit value `b0b1` (b0 is the high bit).
pub fn qpsk_phase(bit_pair: u8) -> f64 {
    Qpsk::from_bits(bit_pair & 0b10 != 0, bit_pair & 0b01 != 0).radians()
}

/// Which two subcarriers carry NRS in each NRS symbol column, in the order of
/// [`NRS_SYMBOLS`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NrsPattern {
    pub subcarriers: [[usize; 2]; 4],
}

impl Default for NrsPattern {
    // Single antenna port with zero cell-specific shift.
    fn default() -> Self {
        Self {
            subcarriers: [[0, 6], [3, 9], [0, 6], [3, 9]],
        }
    }
}

impl NrsPattern {
    pub fn validate(&self) -> Result<(), WaveformError> {
        for pair in &self.subcarriers {
            if pair[0] == pair[1] || pair.iter().any(|&c| c >= SUBCARRIERS) {
                return Err(WaveformError::InvalidGrid(format!(
                    "bad NRS subcarrier pair {pair:?}"
                )));
            }
        }
        Ok(())
    }

    pub fn is_nrs(&self, symbol: usize, subcarrier: usize) -> bool {
        NRS_SYMBOLS
            .iter()
            .position(|&s| s == symbol)
            .is_some_and(|i| self.subcarriers[i].contains(&subcarrier))
    }

    /// Per-subcarrier NRS mask for one symbol column.
    pub fn mask(&self, symbol: usize) -> [bool; SUBCARRIERS] {
        let mut m = [false; SUBCARRIERS];
        for (c, slot) in m.iter_mut().enumerate() {
            *slot = self.is_nrs(symbol, c);
        }
        m
    }
}

/// QPSK phases of one NB-IoT subframe, 14 symbols by 12 subcarriers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResourceGrid {
    phases: [[Qpsk; SUBCARRIERS]; SYMBOLS_PER_SUBFRAME],
    nrs: NrsPattern,
}

impl ResourceGrid {
    /// All data REs at π/4; NRS REs fixed at π/4.
    pub fn new(nrs: NrsPattern) -> Result<Self, WaveformError> {
        nrs.validate()?;
        Ok(Self {
            phases: [[Qpsk::Q1; SUBCARRIERS]; SYMBOLS_PER_SUBFRAME],
            nrs,
        })
    }

    /// Builds a grid from raw radians. Rows are symbols, columns subcarriers.
    pub fn from_radians(rows: &[Vec<f64>], nrs: NrsPattern) -> Result<Self, WaveformError> {
        if rows.len() != SYMBOLS_PER_SUBFRAME {
            return Err(WaveformError::InvalidGrid(format!(
                "expected {SYMBOLS_PER_SUBFRAME} symbols, got {}",
                rows.len()
            )));
        }
        let mut grid = Self::new(nrs)?;
        for (s, row) in rows.iter().enumerate() {
            if row.len() != SUBCARRIERS {
                return Err(WaveformError::InvalidGrid(format!(
                    "symbol {s}: expected {SUBCARRIERS} subcarriers, got {}",
                    row.len()
                )));
            }
            for (c, &phi) in row.iter().enumerate() {
                let q = Qpsk::from_radians(phi).ok_or_else(|| {
                    WaveformError::InvalidGrid(format!("({s},{c}): {phi} is not a QPSK phase"))
                })?;
                if grid.nrs.is_nrs(s, c) && q != Qpsk::Q1 {
                    return Err(WaveformError::InvalidGrid(format!(
                        "({s},{c}): NRS phase must be π/4"
                    )));
                }
                grid.phases[s][c] = q;
            }
        }
        Ok(grid)
    }

    pub fn nrs(&self) -> &NrsPattern {
        &self.nrs
    }

    pub fn is_nrs(&self, symbol: usize, subcarrier: usize) -> bool {
        self.nrs.is_nrs(symbol, subcarrier)
    }

    pub fn get(&self, symbol: usize, subcarrier: usize) -> Qpsk {
        self.phases[symbol][subcarrier]
    }

    /// Writes a data RE. NRS REs are read-only.
    pub fn set(&mut self, symbol: usize, subcarrier: usize, q: Qpsk) -> Result<(), WaveformError> {
        if symbol >= SYMBOLS_PER_SUBFRAME || subcarrier >= SUBCARRIERS {
            return Err(WaveformError::InvalidGrid(format!(
                "({symbol},{subcarrier}) out of range"
            )));
        }
        if self.nrs.is_nrs(symbol, subcarrier) {
            return Err(WaveformError::InvalidGrid(format!(
                "({symbol},{subcarrier}) is an NRS element"
            )));
        }
        self.phases[symbol][subcarrier] = q;
        Ok(())
    }

    pub fn set_symbol(
        &mut self,
        symbol: usize,
        row: &[Qpsk; SUBCARRIERS],
    ) -> Result<(), WaveformError> {
        for (c, &q) in row.iter().enumerate() {
            if !self.nrs.is_nrs(symbol, c) {
                self.set(symbol, c, q)?;
            }
        }
        Ok(())
    }

    pub fn symbol(&self, symbol: usize) -> &[Qpsk; SUBCARRIERS] {
        &self.phases[symbol]
    }

    pub fn symbol_radians(&self, symbol: usize) -> [f64; SUBCARRIERS] {
        self.phases[symbol].map(Qpsk::radians)
    }

    /// Non-NRS resource elements in frequency-first, then time order.
    pub fn data_elements(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..SYMBOLS_PER_SUBFRAME)
            .flat_map(|s| (0..SUBCARRIERS).map(move |c| (s, c)))
            .filter(|&(s, c)| !self.nrs.is_nrs(s, c))
    }
}

/// Wraps an angle into (-π, π].
pub fn wrap_phase(phi: f64) -> f64 {
    let w = phi.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}
