//! Forward NB-IoT downlink coding chain. Linear over GF(2) up to the
//! scrambling offset, which is what makes payload inversion possible.

use crate::gf2::BitVec;
use crate::waveform::{NrsPattern, Qpsk, ResourceGrid, SUBCARRIERS, SYMBOLS_PER_SUBFRAME};

use super::EmulationError;

pub const PAYLOAD_BITS: usize = 256;
pub const CRC_BITS: usize = 24;

/// LTE TBCC generators (octal 133, 171, 165), constraint length 7.
pub const TBCC_POLYS: [u8; 3] = [0o133, 0o171, 0o165];
const CONSTRAINT: usize = 7;

/// CRC24A generator without the leading x^24 term.
const CRC24A: u32 = 0x86_4CFB;

/// Column permutation of the convolutional sub-block interleaver.
pub const SUBBLOCK_PERMUTATION: [usize; 32] = [
    1, 17, 9, 25, 5, 21, 13, 29, 3, 19, 11, 27, 7, 23, 15, 31, 0, 16, 8, 24, 4, 20, 12, 28, 2, 18,
    10, 26, 6, 22, 14, 30,
];

/// Scrambler initialisation for the fixed Gold sequence. Any constant works:
/// the scrambler only contributes the affine offset.
pub const DEFAULT_SCRAMBLER_INIT: u32 = 0x2A5_5A5;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub payload_bits: usize,
    /// Attach CRC24A before encoding.
    pub crc: bool,
    /// Subframes the rate-matched codeword spans.
    pub subframes: usize,
    /// Which of those subframes is the NBPU subframe.
    pub nbpu_subframe: usize,
    pub scrambler_init: u32,
    pub nrs: NrsPattern,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            payload_bits: PAYLOAD_BITS,
            crc: false,
            subframes: 3,
            nbpu_subframe: 0,
            scrambler_init: DEFAULT_SCRAMBLER_INIT,
            nrs: NrsPattern::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), EmulationError> {
        self.nrs.validate()?;
        if self.payload_bits == 0 {
            return Err(EmulationError::Config("payload must be non-empty".into()));
        }
        if self.subframes == 0 || self.nbpu_subframe >= self.subframes {
            return Err(EmulationError::Config(format!(
                "NBPU subframe {} outside a {}-subframe allocation",
                self.nbpu_subframe, self.subframes
            )));
        }
        if self.scrambler_init >= 1 << 31 {
            return Err(EmulationError::Config(
                "scrambler init must fit in 31 bits".into(),
            ));
        }
        Ok(())
    }

    pub fn data_res_per_subframe(&self) -> usize {
        SYMBOLS_PER_SUBFRAME * SUBCARRIERS - 8
    }

    /// Rate-matched output length E.
    pub fn coded_bits(&self) -> usize {
        2 * self.data_res_per_subframe() * self.subframes
    }

    /// Length of the sequence fed to the convolutional encoder.
    pub fn block_bits(&self) -> usize {
        self.payload_bits + if self.crc { CRC_BITS } else { 0 }
    }
}

/// Appends the 24 CRC24A parity bits (zero init, no final inversion, so the
/// map stays linear).
pub fn attach_crc24a(bits: &BitVec) -> BitVec {
    let mut reg: u32 = 0;
    for b in bits.iter() {
        let top = ((reg >> 23) & 1 == 1) ^ b;
        reg = (reg << 1) & 0xFF_FFFF;
        if top {
            reg ^= CRC24A;
        }
    }
    let mut out = BitVec::zeros(bits.len() + CRC_BITS);
    for (i, b) in bits.iter().enumerate() {
        out.set(i, b);
    }
    for i in 0..CRC_BITS {
        out.set(bits.len() + i, (reg >> (23 - i)) & 1 == 1);
    }
    out
}

/// Tail-biting convolutional encoder; returns the three output streams.
pub fn tbcc_encode(c: &BitVec) -> [BitVec; 3] {
    let k = c.len();
    let mut streams = [BitVec::zeros(k), BitVec::zeros(k), BitVec::zeros(k)];
    for n in 0..k {
        for (stream, &g) in streams.iter_mut().zip(&TBCC_POLYS) {
            let mut acc = false;
            for delay in 0..CONSTRAINT {
                if (g >> (CONSTRAINT - 1 - delay)) & 1 == 1 {
                    // Tail-biting: the register starts with the last six bits.
                    acc ^= c.get((n + k * CONSTRAINT - delay) % k);
                }
            }
            stream.set(n, acc);
        }
    }
    streams
}

/// Sub-block interleaver output as source indices; `None` is a dummy bit.
pub fn subblock_interleave_indices(d: usize) -> Vec<Option<usize>> {
    let rows = d.div_ceil(32);
    let dummies = rows * 32 - d;
    let mut out = Vec::with_capacity(rows * 32);
    for &col in &SUBBLOCK_PERMUTATION {
        for r in 0..rows {
            let y = r * 32 + col;
            out.push(y.checked_sub(dummies));
        }
    }
    out
}

/// Circular-buffer rate matching: reads `e` bits starting at k0 = 0,
/// skipping dummies and wrapping (repeating) as needed.
pub fn rate_match(streams: &[BitVec; 3], e: usize) -> BitVec {
    let d = streams[0].len();
    let perm = subblock_interleave_indices(d);
    let buffer: Vec<bool> = streams
        .iter()
        .flat_map(|s| perm.iter().filter_map(move |p| p.map(|i| s.get(i))))
        .collect();
    let mut out = BitVec::zeros(e);
    for k in 0..e {
        out.set(k, buffer[k % buffer.len()]);
    }
    out
}

/// Length-31 Gold sequence c(n) with Nc = 1600.
pub fn gold_sequence(c_init: u32, len: usize) -> BitVec {
    const NC: usize = 1600;
    let total = NC + len + 31;
    let mut x1 = vec![false; total];
    let mut x2 = vec![false; total];
    x1[0] = true;
    for (i, slot) in x2.iter_mut().take(31).enumerate() {
        *slot = (c_init >> i) & 1 == 1;
    }
    for n in 0..total - 31 {
        x1[n + 31] = x1[n + 3] ^ x1[n];
        x2[n + 31] = x2[n + 3] ^ x2[n + 2] ^ x2[n + 1] ^ x2[n];
    }
    let mut out = BitVec::zeros(len);
    for n in 0..len {
        out.set(n, x1[n + NC] ^ x2[n + NC]);
    }
    out
}

/// Payload to scrambled, rate-matched coded bits (length E). Bit pairs map
/// onto the data REs of consecutive subframes, frequency first.
pub fn encode_pipeline(payload: &BitVec, cfg: &PipelineConfig) -> Result<BitVec, EmulationError> {
    cfg.validate()?;
    if payload.len() != cfg.payload_bits {
        return Err(EmulationError::PayloadLength {
            expected: cfg.payload_bits,
            got: payload.len(),
        });
    }
    let block = if cfg.crc {
        attach_crc24a(payload)
    } else {
        payload.clone()
    };
    let streams = tbcc_encode(&block);
    let e = cfg.coded_bits();
    let mut coded = rate_match(&streams, e);
    coded.xor_assign(&gold_sequence(cfg.scrambler_init, e));
    Ok(coded)
}

/// Ordered data REs of one subframe, frequency first.
pub fn data_elements(nrs: &NrsPattern) -> Vec<(usize, usize)> {
    (0..SYMBOLS_PER_SUBFRAME)
        .flat_map(|s| (0..SUBCARRIERS).map(move |c| (s, c)))
        .filter(|&(s, c)| !nrs.is_nrs(s, c))
        .collect()
}

/// QPSK-maps coded bits onto one resource grid per subframe.
pub fn map_to_grids(
    coded: &BitVec,
    cfg: &PipelineConfig,
) -> Result<Vec<ResourceGrid>, EmulationError> {
    if coded.len() != cfg.coded_bits() {
        return Err(EmulationError::Config(format!(
            "expected {} coded bits, got {}",
            cfg.coded_bits(),
            coded.len()
        )));
    }
    let res = data_elements(&cfg.nrs);
    let mut grids = Vec::with_capacity(cfg.subframes);
    for sf in 0..cfg.subframes {
        let mut grid = ResourceGrid::new(cfg.nrs)?;
        for (i, &(s, c)) in res.iter().enumerate() {
            let bit = 2 * (sf * res.len() + i);
            grid.set(s, c, Qpsk::from_bits(coded.get(bit), coded.get(bit + 1)))?;
        }
        grids.push(grid);
    }
    Ok(grids)
}
