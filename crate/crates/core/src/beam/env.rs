use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::surface::{bit_gamma, build_codebook, column_factor, SurfaceConfig};

use super::BeamError;

pub type Point = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkBudget {
    pub tx_power_dbm: f64,
    /// BS and UE antenna gains combined.
    pub antenna_gain_dbi: f64,
    /// Path loss at 1 m.
    pub ref_loss_db: f64,
    pub exponent: f64,
    pub noise_dbm: f64,
}

impl Default for LinkBudget {
    fn default() -> Self {
        Self {
            tx_power_dbm: 5.0,
            antenna_gain_dbi: 22.0,
            ref_loss_db: 60.1,
            exponent: 2.0,
            noise_dbm: -90.0,
        }
    }
}

impl LinkBudget {
    pub fn path_loss_db(&self, d: f64) -> f64 {
        self.ref_loss_db + 10.0 * self.exponent * d.max(1e-3).log10()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSite {
    pub id: usize,
    pub position: Point,
    /// World bearing of the surface normal, degrees from +x.
    pub normal_deg: f64,
    #[serde(default = "default_cells")]
    pub columns: usize,
    #[serde(default = "default_cells")]
    pub rows: usize,
    /// Steering targets swept, one per SSB.
    pub codebook: Vec<f64>,
    /// Fixed all-zero configuration with unit reflection (a metal plate).
    #[serde(default)]
    pub mirror: bool,
    /// Pre-shared beam tuples for multi-UE schedules; defaults to the full
    /// product of codewords when that fits in 32 rows.
    #[serde(default)]
    pub schedule_table: Option<Vec<Vec<u16>>>,
}

fn default_cells() -> usize {
    16
}

fn bearing_deg(from: Point, to: Point, normal_deg: f64) -> f64 {
    let phi = (to[1] - from[1]).atan2(to[0] - from[0]).to_degrees();
    let b = normal_deg - phi;
    (b + 180.0).rem_euclid(360.0) - 180.0
}

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ue {
    pub id: usize,
    /// Serving surface.
    #[serde(default)]
    pub surface: usize,
    /// Piecewise-linear path; a single point is a static UE.
    pub waypoints: Vec<Point>,
    #[serde(default = "default_speed")]
    pub speed_mps: f64,
    /// Rx antenna offsets from the UE position; the UE selects the best.
    #[serde(default = "default_antennas")]
    pub antennas: Vec<Point>,
}

fn default_speed() -> f64 {
    1.0
}

fn default_antennas() -> Vec<Point> {
    vec![[0.0, 0.0]]
}

impl Ue {
    pub fn position(&self, t: f64) -> Point {
        let mut left = self.speed_mps * t.max(0.0);
        for w in self.waypoints.windows(2) {
            let d = dist(w[0], w[1]);
            if left <= d {
                let f = if d > 0.0 { left / d } else { 0.0 };
                return [
                    w[0][0] + f * (w[1][0] - w[0][0]),
                    w[0][1] + f * (w[1][1] - w[0][1]),
                ];
            }
            left -= d;
        }
        *self.waypoints.last().expect("validated non-empty")
    }

    pub fn antenna_position(&self, antenna: usize, t: f64) -> Point {
        let p = self.position(t);
        [
            p[0] + self.antennas[antenna][0],
            p[1] + self.antennas[antenna][1],
        ]
    }
}

/// Attenuation on a UE antenna's link, optionally toggling on and off
/// every `toggle_s` from `start_s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Blockage {
    pub ue: usize,
    /// `None` blocks every antenna of the UE.
    #[serde(default)]
    pub antenna: Option<usize>,
    pub start_s: f64,
    #[serde(default = "f64_inf")]
    pub end_s: f64,
    pub attenuation_db: f64,
    #[serde(default)]
    pub toggle_s: Option<f64>,
}

fn f64_inf() -> f64 {
    f64::INFINITY
}

impl Blockage {
    pub fn active(&self, t: f64) -> bool {
        if t < self.start_s || t >= self.end_s {
            return false;
        }
        match self.toggle_s {
            Some(p) if p > 0.0 => ((t - self.start_s) / p).floor() as i64 % 2 == 0,
            _ => true,
        }
    }

    fn applies(&self, ue: usize, antenna: usize) -> bool {
        self.ue == ue && self.antenna.is_none_or(|a| a == antenna)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Environment {
    pub bs: Point,
    #[serde(default)]
    pub budget: LinkBudget,
    #[serde(rename = "surface")]
    pub surfaces: Vec<SurfaceSite>,
    #[serde(rename = "ue")]
    pub ues: Vec<Ue>,
    #[serde(default, rename = "blockage")]
    pub blockages: Vec<Blockage>,
}

impl Environment {
    pub fn validate(&self) -> Result<(), BeamError> {
        let finite = |p: &Point| p.iter().all(|v| v.is_finite());
        if !finite(&self.bs) {
            return Err(BeamError::Config("BS position not finite".into()));
        }
        for (i, s) in self.surfaces.iter().enumerate() {
            if s.id != i {
                return Err(BeamError::Config(
                    "surface ids must be 0, 1, … in order".into(),
                ));
            }
            if !finite(&s.position)
                || s.columns == 0
                || s.rows == 0
                || (!s.mirror && s.codebook.is_empty())
            {
                return Err(BeamError::Config(format!("surface {i} is malformed")));
            }
            if s.codebook.len() > 32 {
                return Err(BeamError::Config(format!(
                    "surface {i}: more than 32 codewords"
                )));
            }
        }
        for (i, u) in self.ues.iter().enumerate() {
            if u.id != i {
                return Err(BeamError::Config("UE ids must be 0, 1, … in order".into()));
            }
            if u.waypoints.is_empty() || !u.waypoints.iter().all(finite) || u.antennas.is_empty() {
                return Err(BeamError::Config(format!(
                    "UE {i} needs waypoints and antennas"
                )));
            }
            if u.surface >= self.surfaces.len() || u.speed_mps.is_nan() || u.speed_mps < 0.0 {
                return Err(BeamError::Config(format!("UE {i}: bad surface or speed")));
            }
        }
        for b in &self.blockages {
            if b.ue >= self.ues.len()
                || b.antenna
                    .is_some_and(|a| a >= self.ues[b.ue].antennas.len())
            {
                return Err(BeamError::Config(
                    "blockage refers to a missing UE or antenna".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn blockage_db(&self, ue: usize, antenna: usize, t: f64) -> f64 {
        self.blockages
            .iter()
            .filter(|b| b.applies(ue, antenna) && b.active(t))
            .map(|b| b.attenuation_db)
            .sum()
    }

    /// Array configuration of a site, with the BS as the incident direction.
    pub fn surface_config(&self, site: &SurfaceSite) -> SurfaceConfig {
        SurfaceConfig {
            incident_deg: bearing_deg(site.position, self.bs, site.normal_deg),
            amplitude: if site.mirror { 1.0 } else { 0.6 },
            ..SurfaceConfig::half_wave(site.columns, site.rows)
        }
    }

    pub fn ue_bearing_deg(&self, site: &SurfaceSite, p: Point) -> f64 {
        bearing_deg(site.position, p, site.normal_deg)
    }
}

/// Codewords of every site, built once per scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteBeams {
    pub config: SurfaceConfig,
    pub words: Vec<Vec<bool>>,
}

pub fn build_site_beams(env: &Environment) -> Result<Vec<SiteBeams>, BeamError> {
    env.surfaces
        .iter()
        .map(|site| {
            let config = env.surface_config(site);
            let words = if site.mirror {
                vec![vec![false; site.columns]]
            } else {
                build_codebook(&site.codebook, &config)?
                    .into_iter()
                    .map(|w| w.bits)
                    .collect()
            };
            Ok(SiteBeams { config, words })
        })
        .collect()
}

/// Absolute reflection gain of a column codeword toward bearing `deg`:
/// rows in phase at zero elevation, so rows² times the column factor.
pub fn surface_gain_db(cfg: &SurfaceConfig, bits: &[bool], deg: f64) -> f64 {
    let gamma: Vec<Complex64> = bit_gamma(cfg.amplitude, bits);
    let af = column_factor(cfg, &gamma, deg.to_radians().sin()).norm_sqr();
    20.0 * (cfg.rows as f64).log10() + 10.0 * af.max(1e-30).log10()
}

/// SNR of one UE antenna through a surface configuration at time `t`:
/// Tx budget − two-leg path loss + reflection gain − blockage − noise.
pub fn antenna_snr_db(
    env: &Environment,
    beams: &SiteBeams,
    site: &SurfaceSite,
    bits: &[bool],
    ue: &Ue,
    antenna: usize,
    t: f64,
) -> f64 {
    let b = &env.budget;
    let p = ue.antenna_position(antenna, t);
    b.tx_power_dbm + b.antenna_gain_dbi
        - b.path_loss_db(dist(env.bs, site.position))
        - b.path_loss_db(dist(site.position, p))
        + surface_gain_db(&beams.config, bits, env.ue_bearing_deg(site, p))
        - env.blockage_db(ue.id, antenna, t)
        - b.noise_dbm
}

/// UE SNR with antenna selection.
pub fn ue_snr(env: &Environment, beams: &SiteBeams, ue: &Ue, bits: &[bool], t: f64) -> f64 {
    let site = &env.surfaces[ue.surface];
    (0..ue.antennas.len())
        .map(|a| antenna_snr_db(env, beams, site, bits, ue, a, t))
        .fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn corner_env() -> Environment {
        Environment {
            bs: [0.0, 13.0],
            budget: LinkBudget::default(),
            surfaces: vec![SurfaceSite {
                id: 0,
                position: [0.0, 0.0],
                normal_deg: 90.0,
                columns: 16,
                rows: 16,
                codebook: vec![10.0, 30.0, 50.0],
                mirror: false,
                schedule_table: None,
            }],
            ues: vec![Ue {
                id: 0,
                surface: 0,
                waypoints: vec![[3.0, 3.0], [3.0, 6.0]],
                speed_mps: 1.0,
                antennas: vec![[0.0, 0.0]],
            }],
            blockages: vec![Blockage {
                ue: 0,
                antenna: None,
                start_s: 1.0,
                end_s: 2.0,
                attenuation_db: 15.0,
                toggle_s: None,
            }],
        }
    }

    #[test]
    fn bearings_follow_normal() {
        let env = corner_env();
        let site = &env.surfaces[0];
        assert!(env.surface_config(site).incident_deg.abs() < 1e-12);
        assert!((env.ue_bearing_deg(site, [2.0, 4.0]) - 26.565).abs() < 1e-3);
        assert!((env.ue_bearing_deg(site, [-1.0, 1.0]) + 45.0).abs() < 1e-9);
    }

    #[test]
    fn mobility_is_piecewise_linear() {
        let env = corner_env();
        let u = &env.ues[0];
        assert_eq!(u.position(1.5), [3.0, 4.5]);
        assert_eq!(u.position(10.0), [3.0, 6.0]);
    }

    #[test]
    fn blockage_drop_equals_attenuation() {
        let env = corner_env();
        let beams = build_site_beams(&env).unwrap();
        let ue = Ue {
            speed_mps: 0.0,
            ..env.ues[0].clone()
        };
        let bits = &beams[0].words[1];
        let before = ue_snr(&env, &beams[0], &ue, bits, 0.5);
        let during = ue_snr(&env, &beams[0], &ue, bits, 1.5);
        assert!((before - during - 15.0).abs() < 1e-9);
    }

    #[test]
    fn gain_difference_is_pattern_difference() {
        let env = corner_env();
        let beams = build_site_beams(&env).unwrap();
        let cfg = &beams[0].config;
        let bits = &beams[0].words[1];
        let on = surface_gain_db(cfg, bits, 30.0);
        let off = surface_gain_db(cfg, bits, 50.0);
        let p = crate::surface::array_factor(cfg, bits, &[30.0, 50.0]).unwrap();
        assert!(((on - off) - (p.gain_db[0] - p.gain_db[1])).abs() < 1e-9);
    }

    #[test]
    fn toggling_blockage() {
        let b = Blockage {
            ue: 0,
            antenna: Some(0),
            start_s: 0.0,
            end_s: 1.0,
            attenuation_db: 20.0,
            toggle_s: Some(0.02),
        };
        assert!(b.active(0.01) && !b.active(0.03) && b.active(0.05));
        assert!(!b.active(1.0));
    }
}
