use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::array::{
    angle_grid, array_factor, bit_gamma, direction_uv, pattern_of, planar_gain_db,
    planar_main_lobe, BeamPattern, PlanarLobe, SurfaceConfig,
};
use super::SurfaceError;

pub const MAX_STEER_DEG: f64 = 70.0;
pub const MAX_AZ_3D_DEG: f64 = 60.0;
pub const MAX_EL_3D_DEG: f64 = 45.0;

/// Commanded-angle search span either side of the target, and its step.
const SEARCH_SPAN_DEG: f64 = 10.0;
const SEARCH_STEP_DEG: f64 = 0.25;
const SEARCH_OFFSETS: usize = 32;
/// Lobe errors below this are treated as equal and ranked by gain.
const ERROR_FLOOR_DEG: f64 = 1.0;

fn centered(n: usize, count: usize) -> f64 {
    n as f64 - (count as f64 - 1.0) / 2.0
}

/// Continuous per-column phase steering a reflected beam to `target_deg`.
pub fn ideal_phases(cfg: &SurfaceConfig, target_deg: f64) -> Vec<f64> {
    let step = cfg.phase_step(target_deg.to_radians().sin() + cfg.incident_deg.to_radians().sin());
    (0..cfg.columns)
        .map(|n| -step * centered(n, cfg.columns))
        .collect()
}

/// Each phase (plus `offset`) to whichever of {0, π} is nearer; `true` = π.
pub fn quantize(phases: &[f64], offset: f64) -> Vec<bool> {
    phases
        .iter()
        .map(|p| (p + offset).rem_euclid(2.0 * PI) - PI)
        .map(|d| d.abs() < PI / 2.0)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Codeword {
    pub target_deg: f64,
    pub bits: Vec<bool>,
    /// Ramp angle and offset the search settled on.
    pub commanded_deg: f64,
    pub offset_rad: f64,
    pub main_lobe_deg: f64,
    pub peak_db: f64,
    pub hpbw_deg: Option<f64>,
    /// False when the target lies beyond the ±70° steering range.
    pub in_range: bool,
}

impl Codeword {
    pub fn mirrored(&self) -> Self {
        Self {
            target_deg: -self.target_deg,
            bits: self.bits.iter().rev().copied().collect(),
            commanded_deg: -self.commanded_deg,
            offset_rad: self.offset_rad,
            main_lobe_deg: -self.main_lobe_deg,
            peak_db: self.peak_db,
            hpbw_deg: self.hpbw_deg,
            in_range: self.in_range,
        }
    }
}

/// Angles on the side of the target's reflected lobe; the opposite side
/// holds the mirror lobe every 1-bit pattern has.
fn lobe_side(cfg: &SurfaceConfig, target_deg: f64, step: f64) -> Vec<f64> {
    let si = cfg.incident_deg.to_radians().sin();
    let want = target_deg.to_radians().sin() + si;
    angle_grid(-90.0, 90.0, step)
        .into_iter()
        .filter(|a| (a.to_radians().sin() + si) * want >= 0.0)
        .collect()
}

/// Pattern restricted to the target's side of the surface.
pub fn lobe_pattern(
    cfg: &SurfaceConfig,
    bits: &[bool],
    target_deg: f64,
    step: f64,
) -> Result<BeamPattern, SurfaceError> {
    array_factor(cfg, bits, &lobe_side(cfg, target_deg, step))
}

/// 1-bit codeword for `target_deg`. The quantised ramp is searched over
/// commanded angle and phase offset so the realised main lobe lands
/// nearest the target (errors under 1° tie, broken by peak gain).
/// Negative targets at normal incidence reuse the mirrored positive word.
pub fn steer_codebook(target_deg: f64, cfg: &SurfaceConfig) -> Result<Codeword, SurfaceError> {
    cfg.validate()?;
    if target_deg < 0.0 && cfg.incident_deg == 0.0 {
        return Ok(steer_codebook(-target_deg, cfg)?.mirrored());
    }
    let coarse = lobe_side(cfg, target_deg, 0.1);
    let steps = (2.0 * SEARCH_SPAN_DEG / SEARCH_STEP_DEG).round() as usize;
    let candidates: Vec<(f64, f64)> = (0..=steps)
        .flat_map(|i| {
            let c = target_deg - SEARCH_SPAN_DEG + i as f64 * SEARCH_STEP_DEG;
            (0..SEARCH_OFFSETS).map(move |k| (c, PI * k as f64 / SEARCH_OFFSETS as f64))
        })
        .filter(|(c, _)| c.abs() <= 90.0)
        .collect();
    let score = |&(c, off): &(f64, f64)| {
        let bits = quantize(&ideal_phases(cfg, c), off);
        let p = pattern_of(cfg, &bit_gamma(cfg.amplitude, &bits), &coarse);
        let err = (p.main_lobe_deg - target_deg).abs().max(ERROR_FLOOR_DEG);
        (err, -p.gain_at(target_deg), c, off)
    };
    let best = candidates.par_iter().map(score).reduce(
        || (f64::INFINITY, f64::INFINITY, 0.0, 0.0),
        |a, b| if (b.0, b.1) < (a.0, a.1) { b } else { a },
    );
    let (_, _, commanded, offset) = best;
    let bits = quantize(&ideal_phases(cfg, commanded), offset);
    let fine = lobe_pattern(cfg, &bits, target_deg, 0.01)?;
    Ok(Codeword {
        target_deg,
        bits,
        commanded_deg: commanded,
        offset_rad: offset,
        main_lobe_deg: fine.main_lobe_deg,
        peak_db: fine.peak_db,
        hpbw_deg: fine.hpbw_deg,
        in_range: target_deg.abs() <= MAX_STEER_DEG,
    })
}

/// Codewords for many targets, in order.
pub fn build_codebook(targets: &[f64], cfg: &SurfaceConfig) -> Result<Vec<Codeword>, SurfaceError> {
    targets
        .par_iter()
        .map(|&t| steer_codebook(t, cfg))
        .collect()
}

/// Peak gain of the unquantised beam at `target_deg` (0 dB by
/// normalisation; exposed for quantisation-loss checks).
pub fn ideal_peak_db(cfg: &SurfaceConfig, target_deg: f64) -> f64 {
    let gamma: Vec<Complex64> = ideal_phases(cfg, target_deg)
        .iter()
        .map(|p| Complex64::from_polar(cfg.amplitude, *p))
        .collect();
    pattern_of(cfg, &gamma, &[target_deg]).gain_db[0]
}

#[derive(Debug, Clone, PartialEq)]
pub struct Codeword3d {
    pub az_deg: f64,
    pub el_deg: f64,
    /// rows × columns; `true` = π.
    pub bits: Vec<Vec<bool>>,
    pub lobe: PlanarLobe,
    pub in_range: bool,
}

/// Directions on the target's half of (u, v) space with their per-column
/// and per-row phasors, so candidate patterns cost one small matrix sum.
struct PlanarTable {
    dirs: Vec<(f64, f64)>,
    cols: Vec<Vec<Complex64>>,
    rows: Vec<Vec<Complex64>>,
}

impl PlanarTable {
    fn new(cfg: &SurfaceConfig, hint: (f64, f64), step_deg: f64) -> Self {
        let (hu, hv) = direction_uv(hint.0, hint.1);
        let si = cfg.incident_deg.to_radians().sin();
        let grid = angle_grid(-90.0, 90.0, step_deg);
        let dirs: Vec<(f64, f64)> = grid
            .iter()
            .flat_map(|&el| grid.iter().map(move |&az| (az, el)))
            .filter(|&(az, el)| {
                let (u, v) = direction_uv(az, el);
                u * hu + v * hv >= 0.0
            })
            .collect();
        let phasors = |step: f64, count: usize| -> Vec<Complex64> {
            (0..count)
                .map(|n| Complex64::from_polar(1.0, step * centered(n, count)))
                .collect()
        };
        let cols = dirs
            .iter()
            .map(|&(az, el)| phasors(cfg.phase_step(direction_uv(az, el).0 + si), cfg.columns))
            .collect();
        let rows = dirs
            .iter()
            .map(|&(az, el)| phasors(cfg.phase_step(direction_uv(az, el).1), cfg.rows))
            .collect();
        Self { dirs, cols, rows }
    }

    /// Strongest direction for `bits`: (az, el, |AF|²).
    fn peak(&self, bits: &[Vec<bool>]) -> (f64, f64, f64) {
        let mut best = (0.0, 0.0, f64::NEG_INFINITY);
        for (i, &(az, el)) in self.dirs.iter().enumerate() {
            let af: Complex64 = bits
                .iter()
                .zip(&self.rows[i])
                .map(|(row, r)| {
                    let s: Complex64 = row
                        .iter()
                        .zip(&self.cols[i])
                        .map(|(&b, c)| if b { -c } else { *c })
                        .sum();
                    s * r
                })
                .sum();
            let p = af.norm_sqr();
            if p > best.2 + 1e-12 {
                best = (az, el, p);
            }
        }
        best
    }
}

fn planar_bits(cfg: &SurfaceConfig, u: f64, v: f64, offset: f64) -> Vec<Vec<bool>> {
    let su = cfg.phase_step(u + cfg.incident_deg.to_radians().sin());
    let sv = cfg.phase_step(v);
    (0..cfg.rows)
        .map(|m| {
            let row: Vec<f64> = (0..cfg.columns)
                .map(|n| -su * centered(n, cfg.columns) - sv * centered(m, cfg.rows))
                .collect();
            quantize(&row, offset)
        })
        .collect()
}

/// Commanded direction-sine search span and step for planar codewords.
const PLANAR_SPAN: f64 = 0.2;
const PLANAR_STEP: f64 = 0.025;
const PLANAR_OFFSETS: usize = 8;
/// Best coarse candidates re-ranked on the fine grid.
const PLANAR_RERANK: usize = 24;

/// Per-cell 1-bit quantised planar ramp toward (az, el). As in the linear
/// case, the commanded (u, v) and the phase offset are searched so the
/// realised lobe lands nearest the target.
pub fn codebook_3d(
    az_deg: f64,
    el_deg: f64,
    cfg: &SurfaceConfig,
) -> Result<Codeword3d, SurfaceError> {
    cfg.validate()?;
    let (u0, v0) = direction_uv(az_deg, el_deg);
    let table = PlanarTable::new(cfg, (az_deg, el_deg), 2.0);
    let k = (PLANAR_SPAN / PLANAR_STEP).round() as i32;
    let candidates: Vec<(f64, f64, f64)> = (-k..=k)
        .flat_map(|i| (-k..=k).map(move |j| (i, j)))
        .flat_map(|(i, j)| {
            let (u, v) = (
                u0 + f64::from(i) * PLANAR_STEP,
                v0 + f64::from(j) * PLANAR_STEP,
            );
            (0..PLANAR_OFFSETS).map(move |o| (u, v, PI * o as f64 / PLANAR_OFFSETS as f64))
        })
        .filter(|&(u, v, _)| u * u + v * v <= 1.0)
        .collect();
    let target_gain = |bits: &[Vec<bool>]| planar_gain_db(cfg, bits, az_deg, el_deg);
    let rank = |table: &PlanarTable, bits: Vec<Vec<bool>>| {
        let (az, el, _) = table.peak(&bits);
        let err = (az - az_deg)
            .abs()
            .max((el - el_deg).abs())
            .max(ERROR_FLOOR_DEG);
        (err, -target_gain(&bits), bits)
    };
    let mut coarse: Vec<_> = candidates
        .par_iter()
        .map(|&(u, v, off)| rank(&table, planar_bits(cfg, u, v, off)))
        .collect();
    coarse.sort_by(|a, b| (a.0, a.1).partial_cmp(&(b.0, b.1)).expect("finite keys"));
    coarse.dedup_by(|a, b| a.2 == b.2);
    let fine = PlanarTable::new(cfg, (az_deg, el_deg), 0.5);
    let bits = coarse
        .into_iter()
        .take(PLANAR_RERANK)
        .par_bridge()
        .map(|c| rank(&fine, c.2))
        .reduce_with(|a, b| {
            if (b.0, b.1, &b.2) < (a.0, a.1, &a.2) {
                b
            } else {
                a
            }
        })
        .expect("non-empty search")
        .2;
    let lobe = planar_main_lobe(cfg, &bits, (az_deg, el_deg), 0.5);
    Ok(Codeword3d {
        az_deg,
        el_deg,
        lobe,
        in_range: az_deg.abs() <= MAX_AZ_3D_DEG && el_deg.abs() <= MAX_EL_3D_DEG,
        bits,
    })
}

/// Gain of a planar codeword in one direction.
pub fn codeword_3d_gain_db(
    cfg: &SurfaceConfig,
    word: &Codeword3d,
    az_deg: f64,
    el_deg: f64,
) -> f64 {
    planar_gain_db(cfg, &word.bits, az_deg, el_deg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn broadside_is_uniform() {
        let cfg = SurfaceConfig::half_wave(16, 16);
        let bits = quantize(&ideal_phases(&cfg, 0.0), 0.0);
        assert!(bits.iter().all(|&b| b == bits[0]));
        let w = codebook_3d(0.0, 0.0, &SurfaceConfig::half_wave(4, 4)).unwrap();
        let first = w.bits[0][0];
        assert!(w.bits.iter().flatten().all(|&b| b == first));
    }

    #[test]
    fn negative_target_mirrors() {
        let cfg = SurfaceConfig::half_wave(16, 16);
        let pos = steer_codebook(40.0, &cfg).unwrap();
        let neg = steer_codebook(-40.0, &cfg).unwrap();
        assert_eq!(neg.bits, pos.bits.iter().rev().copied().collect::<Vec<_>>());
        assert!((neg.main_lobe_deg + pos.main_lobe_deg).abs() < 0.02);
    }

    #[test]
    fn out_of_range_still_computes() {
        let w = steer_codebook(80.0, &SurfaceConfig::half_wave(16, 16)).unwrap();
        assert!(!w.in_range);
        assert_eq!(w.bits.len(), 16);
    }

    #[test]
    fn ideal_beam_peaks_at_zero_db() {
        let cfg = SurfaceConfig::half_wave(16, 16);
        for t in [0.0, 20.0, 60.0] {
            assert!(ideal_peak_db(&cfg, t).abs() < 1e-9);
        }
    }
}
