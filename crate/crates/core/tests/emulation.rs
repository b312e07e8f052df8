//! Emulation round trips against a second, straight-line encoder.

use std::sync::OnceLock;

use nrsurface::emulation::{
    build_affine_model, encode_pipeline, solve_payload, CodingPipeline, PhaseTargets,
    PipelineConfig, NBPU_SYMBOLS,
};
use nrsurface::gf2::BitVec;
use nrsurface::waveform::{Qpsk, ON_SYMBOL};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn model() -> &'static CodingPipeline {
    static M: OnceLock<CodingPipeline> = OnceLock::new();
    M.get_or_init(|| build_affine_model(&PipelineConfig::default()).unwrap())
}

/// Encoder written from the textbook description with plain vectors: a
/// shift-register TBCC, an explicit 32-column interleaver matrix with NULL
/// padding, a NULL-skipping circular buffer and a word-level Gold LFSR.
fn oracle_encode(payload: &[u8], scrambler_init: u32, e: usize) -> Vec<u8> {
    let k = payload.len();
    // Register holds the last six inputs, newest in bit 5.
    let mut reg: u32 = 0;
    for &b in &payload[k - 6..] {
        reg = (reg >> 1) | (u32::from(b) << 5);
    }
    let polys = [0b1011011u32, 0b1111001, 0b1110101];
    let mut d = vec![Vec::new(), Vec::new(), Vec::new()];
    for &bit in payload {
        let window = (u32::from(bit) << 6) | reg;
        for (i, g) in polys.iter().enumerate() {
            d[i].push(((window & g).count_ones() % 2) as u8);
        }
        reg = window >> 1;
    }
    let perm = [
        1, 17, 9, 25, 5, 21, 13, 29, 3, 19, 11, 27, 7, 23, 15, 31, 0, 16, 8, 24, 4, 20, 12, 28, 2,
        18, 10, 26, 6, 22, 14, 30,
    ];
    let rows = k.div_ceil(32);
    let pad = rows * 32 - k;
    let mut w: Vec<Option<u8>> = Vec::new();
    for stream in &d {
        let mut y: Vec<Option<u8>> = vec![None; pad];
        y.extend(stream.iter().map(|&b| Some(b)));
        let matrix: Vec<Vec<Option<u8>>> = y.chunks(32).map(<[_]>::to_vec).collect();
        for &col in &perm {
            for row in &matrix {
                w.push(row[col]);
            }
        }
    }
    let mut out = Vec::with_capacity(e);
    let mut j = 0;
    while out.len() < e {
        if let Some(b) = w[j % w.len()] {
            out.push(b);
        }
        j += 1;
    }
    let (mut x1, mut x2) = (1u32, scrambler_init);
    for _ in 0..1600 {
        x1 = (x1 >> 1) | ((((x1 >> 3) ^ x1) & 1) << 30);
        x2 = (x2 >> 1) | ((((x2 >> 3) ^ (x2 >> 2) ^ (x2 >> 1) ^ x2) & 1) << 30);
    }
    for o in &mut out {
        *o ^= ((x1 ^ x2) & 1) as u8;
        x1 = (x1 >> 1) | ((((x1 >> 3) ^ x1) & 1) << 30);
        x2 = (x2 >> 1) | ((((x2 >> 3) ^ (x2 >> 2) ^ (x2 >> 1) ^ x2) & 1) << 30);
    }
    out
}

fn random_bits(rng: &mut impl Rng, n: usize) -> BitVec {
    let mut v = BitVec::zeros(n);
    for i in 0..n {
        v.set(i, rng.random());
    }
    v
}

#[test]
fn pipeline_matches_straight_line_oracle() {
    let cfg = PipelineConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let x = random_bits(&mut rng, 256);
        let ours = encode_pipeline(&x, &cfg).unwrap();
        let bytes: Vec<u8> = x.iter().map(u8::from).collect();
        let theirs = oracle_encode(&bytes, cfg.scrambler_init, cfg.coded_bits());
        assert_eq!(ours.iter().map(u8::from).collect::<Vec<_>>(), theirs);
    }
}

#[test]
fn affine_model_exact_on_1000_payloads() {
    let m = model();
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    for _ in 0..1000 {
        let x = random_bits(&mut rng, 256);
        assert_eq!(m.predict(&x), m.encode_constrained(&x).unwrap());
    }
}

#[test]
fn affine_linearity() {
    let m = model();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (x1, x2) = (random_bits(&mut rng, 256), random_bits(&mut rng, 256));
    let lhs = m.encode_constrained(&x1.xor(&x2)).unwrap();
    let rhs = m
        .encode_constrained(&x1)
        .unwrap()
        .xor(&m.encode_constrained(&x2).unwrap())
        .xor(&m.offset_vector);
    assert_eq!(lhs, rhs);
}

#[test]
fn column_is_unit_response_minus_offset() {
    let m = model();
    let j = 77;
    let col = m
        .encode_constrained(&BitVec::unit(256, j))
        .unwrap()
        .xor(&m.offset_vector);
    assert_eq!(m.generator_matrix.column(j), col);
}

#[test]
fn known_payload_round_trip() {
    let m = model();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let x = random_bits(&mut rng, 256);
    let y = m.encode_constrained(&x).unwrap();
    let targets = PhaseTargets::from_bits(m, &y);
    let solved = solve_payload(&targets, m).unwrap();
    assert_eq!(m.encode_constrained(&solved).unwrap(), y);
}

#[test]
fn solver_is_deterministic() {
    let m = model();
    let t = PhaseTargets::uniform(ON_SYMBOL);
    assert_eq!(solve_payload(&t, m).unwrap(), solve_payload(&t, m).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn encode_after_solve_is_identity(quads in prop::collection::vec(0u8..4, 120)) {
        let m = model();
        let entries = NBPU_SYMBOLS
            .iter()
            .flat_map(|&s| (0..12).map(move |c| (s, c)))
            .zip(&quads)
            .map(|((s, c), &q)| (s, c, Qpsk::from_quadrant(q)))
            .collect();
        let targets = PhaseTargets { entries };
        let x = solve_payload(&targets, m).unwrap();
        let realised = PhaseTargets::from_bits(m, &m.encode_constrained(&x).unwrap());
        prop_assert_eq!(realised, targets);
    }
}
