use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::gf2::{BitMatrix, BitVec};
use crate::waveform::{Qpsk, NRS_SYMBOLS, SUBCARRIERS};

use super::pipeline::{data_elements, encode_pipeline, PipelineConfig};
use super::EmulationError;

/// Symbols that carry NBPU content (sync 0..4, info 7..11).
pub const NBPU_SYMBOLS: [usize; 10] = [0, 1, 2, 3, 4, 7, 8, 9, 10, 11];
pub const CONSTRAINED_BITS: usize = 2 * SUBCARRIERS * NBPU_SYMBOLS.len();

const PROBES: usize = 100;
const PROBE_SEED: u64 = 0x4E42_5055;

/// `encode(x)` restricted to the NBPU REs, written as `A·x ⊕ b`.
#[derive(Debug, Clone)]
pub struct CodingPipeline {
    pub generator_matrix: BitMatrix,
    pub offset_vector: BitVec,
    pub payload_len: usize,
    pub constrained_len: usize,
    /// Coded-bit index of each constrained row.
    pub positions: Vec<usize>,
    /// (symbol, subcarrier, bit-within-pair) of each constrained row.
    pub labels: Vec<(usize, usize, usize)>,
    pub config: PipelineConfig,
}

/// Coded-bit positions of the NBPU REs, ordered by symbol then subcarrier.
fn constrained_positions(cfg: &PipelineConfig) -> (Vec<usize>, Vec<(usize, usize, usize)>) {
    let res = data_elements(&cfg.nrs);
    let base = 2 * res.len() * cfg.nbpu_subframe;
    let mut positions = Vec::with_capacity(CONSTRAINED_BITS);
    let mut labels = Vec::with_capacity(CONSTRAINED_BITS);
    for &s in &NBPU_SYMBOLS {
        for c in 0..SUBCARRIERS {
            let i = res
                .iter()
                .position(|&re| re == (s, c))
                .expect("NBPU symbols hold no NRS");
            for bit in 0..2 {
                positions.push(base + 2 * i + bit);
                labels.push((s, c, bit));
            }
        }
    }
    (positions, labels)
}

pub fn build_affine_model(cfg: &PipelineConfig) -> Result<CodingPipeline, EmulationError> {
    cfg.validate()?;
    let (positions, labels) = constrained_positions(cfg);
    let n = cfg.payload_bits;
    let b = encode_pipeline(&BitVec::zeros(n), cfg)?.select(&positions);
    let columns: Vec<BitVec> = (0..n)
        .map(|j| encode_pipeline(&BitVec::unit(n, j), cfg).map(|y| y.select(&positions).xor(&b)))
        .collect::<Result<_, _>>()?;
    let model = CodingPipeline {
        generator_matrix: BitMatrix::from_columns(&columns),
        offset_vector: b,
        payload_len: n,
        constrained_len: positions.len(),
        positions,
        labels,
        config: cfg.clone(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    for probe in 0..PROBES {
        let mut x = BitVec::zeros(n);
        for i in 0..n {
            x.set(i, rng.random());
        }
        if model.predict(&x) != model.encode_constrained(&x)? {
            return Err(EmulationError::ProbeMismatch { probe });
        }
    }
    Ok(model)
}

impl CodingPipeline {
    /// `A·x ⊕ b`.
    pub fn predict(&self, x: &BitVec) -> BitVec {
        self.generator_matrix.mul_vec(x).xor(&self.offset_vector)
    }

    /// Runs the real pipeline and keeps only the constrained positions.
    pub fn encode_constrained(&self, x: &BitVec) -> Result<BitVec, EmulationError> {
        Ok(encode_pipeline(x, &self.config)?.select(&self.positions))
    }

    pub fn rank(&self) -> usize {
        self.generator_matrix.rank()
    }
}

/// Desired QPSK phase for every NBPU resource element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseTargets {
    pub entries: Vec<(usize, usize, Qpsk)>,
}

impl PhaseTargets {
    /// Same 12-subcarrier pattern in each listed symbol.
    pub fn from_symbols(symbols: &[(usize, [Qpsk; SUBCARRIERS])]) -> Self {
        let entries = symbols
            .iter()
            .flat_map(|(s, row)| row.iter().enumerate().map(move |(c, &q)| (*s, c, q)))
            .collect();
        Self { entries }
    }

    /// One pattern in all ten NBPU symbols.
    pub fn uniform(row: [Qpsk; SUBCARRIERS]) -> Self {
        let rows: Vec<_> = NBPU_SYMBOLS.iter().map(|&s| (s, row)).collect();
        Self::from_symbols(&rows)
    }

    /// From (symbol, subcarrier, radians) rows.
    pub fn from_radians(rows: &[(usize, usize, f64)]) -> Result<Self, EmulationError> {
        let entries = rows
            .iter()
            .map(|&(s, c, phi)| {
                Qpsk::from_radians(phi).map(|q| (s, c, q)).ok_or_else(|| {
                    EmulationError::InvalidTargets(format!(
                        "({s},{c}): {phi} rad is not a QPSK phase"
                    ))
                })
            })
            .collect::<Result<_, _>>()?;
        let t = Self { entries };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), EmulationError> {
        let mut seen = [[false; SUBCARRIERS]; 14];
        for &(s, c, _) in &self.entries {
            if NRS_SYMBOLS.contains(&s) {
                return Err(EmulationError::InvalidTargets(format!(
                    "symbol {s} is an NRS column"
                )));
            }
            if !NBPU_SYMBOLS.contains(&s) || c >= SUBCARRIERS {
                return Err(EmulationError::InvalidTargets(format!(
                    "({s},{c}) outside the NBPU symbols"
                )));
            }
            if std::mem::replace(&mut seen[s][c], true) {
                return Err(EmulationError::InvalidTargets(format!(
                    "({s},{c}) listed twice"
                )));
            }
        }
        let want = CONSTRAINED_BITS / 2;
        if self.entries.len() != want {
            return Err(EmulationError::InvalidTargets(format!(
                "{} resource elements given, {want} required",
                self.entries.len()
            )));
        }
        Ok(())
    }

    fn lookup(&self, s: usize, c: usize) -> Qpsk {
        self.entries
            .iter()
            .find(|e| e.0 == s && e.1 == c)
            .map(|e| e.2)
            .expect("validated")
    }

    /// Target bits in model row order.
    pub fn to_bits(&self, model: &CodingPipeline) -> Result<BitVec, EmulationError> {
        self.validate()?;
        let mut t = BitVec::zeros(model.constrained_len);
        for (row, &(s, c, bit)) in model.labels.iter().enumerate() {
            let (b0, b1) = self.lookup(s, c).to_bits();
            t.set(row, if bit == 0 { b0 } else { b1 });
        }
        Ok(t)
    }

    /// Reads the QPSK phases the constrained bits realise.
    pub fn from_bits(model: &CodingPipeline, bits: &BitVec) -> Self {
        let entries = model
            .labels
            .chunks(2)
            .enumerate()
            .map(|(i, pair)| {
                (
                    pair[0].0,
                    pair[0].1,
                    Qpsk::from_bits(bits.get(2 * i), bits.get(2 * i + 1)),
                )
            })
            .collect();
        Self { entries }
    }
}

/// Finds a payload whose encoding realises every target phase. Free
/// variables are zero, so identical targets give identical payloads.
pub fn solve_payload(
    targets: &PhaseTargets,
    model: &CodingPipeline,
) -> Result<BitVec, EmulationError> {
    let t = targets.to_bits(model)?;
    let rhs = t.xor(&model.offset_vector);
    let x = model
        .generator_matrix
        .solve(&rhs)
        .map_err(|inc| EmulationError::Unsatisfiable {
            bits: inc.rows.iter().map(|&r| model.labels[r]).collect(),
        })?;
    if model.encode_constrained(&x)? != t {
        return Err(EmulationError::ProbeMismatch { probe: usize::MAX });
    }
    Ok(x)
}

/// Subcarrier pairs whose beat the payload can steer: both members free.
pub fn controllable_harmonics(nrs_mask: &[bool]) -> usize {
    let free = nrs_mask.iter().filter(|&&m| !m).count();
    free * free.saturating_sub(1) / 2
}
