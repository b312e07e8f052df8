use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::varactor::DEFAULT_CARRIER_HZ;
use super::SurfaceError;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceConfig {
    pub columns: usize,
    pub rows: usize,
    /// Element spacing; defaults to half a wavelength at the carrier.
    pub spacing_m: f64,
    pub carrier_hz: f64,
    /// Bearing of the incident wave from the surface normal.
    pub incident_deg: f64,
    pub amplitude: f64,
}

impl Default for SurfaceConfig {
    fn default() -> Self {
        Self::half_wave(16, 16)
    }
}

impl SurfaceConfig {
    pub fn half_wave(columns: usize, rows: usize) -> Self {
        Self {
            columns,
            rows,
            spacing_m: SPEED_OF_LIGHT / DEFAULT_CARRIER_HZ / 2.0,
            carrier_hz: DEFAULT_CARRIER_HZ,
            incident_deg: 0.0,
            amplitude: 0.6,
        }
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI * self.carrier_hz / SPEED_OF_LIGHT
    }

    /// Electrical phase step per element for direction sine `s`.
    pub fn phase_step(&self, s: f64) -> f64 {
        self.wavenumber() * self.spacing_m * s
    }

    pub fn validate(&self) -> Result<(), SurfaceError> {
        if self.columns == 0 || self.rows == 0 || self.spacing_m <= 0.0 || self.carrier_hz <= 0.0 {
            return Err(SurfaceError::Config(
                "surface dimensions must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn cells(&self) -> usize {
        self.columns * self.rows
    }
}

/// Normalised pattern: 0 dB is the peak of an ideal continuous-phase beam
/// from the same aperture and cell amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamPattern {
    pub angles_deg: Vec<f64>,
    pub gain_db: Vec<f64>,
    pub main_lobe_deg: f64,
    pub peak_db: f64,
    /// −3 dB width about the main lobe; `None` if a crossing falls off the
    /// grid.
    pub hpbw_deg: Option<f64>,
}

impl BeamPattern {
    pub fn from_samples(angles_deg: Vec<f64>, gain_db: Vec<f64>) -> Self {
        let peak = (0..gain_db.len()).fold(0, |b, i| if gain_db[i] > gain_db[b] { i } else { b });
        let hpbw = half_power_width(&angles_deg, &gain_db, peak);
        Self {
            main_lobe_deg: angles_deg[peak],
            peak_db: gain_db[peak],
            hpbw_deg: hpbw,
            angles_deg,
            gain_db,
        }
    }

    pub fn gain_at(&self, angle_deg: f64) -> f64 {
        let i = self
            .angles_deg
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - angle_deg).abs().total_cmp(&(b.1 - angle_deg).abs()))
            .map_or(0, |e| e.0);
        self.gain_db[i]
    }
}

/// Width between the linearly interpolated −3 dB crossings either side of
/// sample `peak`.
pub fn half_power_width(angles: &[f64], gain_db: &[f64], peak: usize) -> Option<f64> {
    let level = gain_db[peak] - 3.0;
    let cross = |i: usize, j: usize| {
        let t = (gain_db[i] - level) / (gain_db[i] - gain_db[j]);
        angles[i] + t * (angles[j] - angles[i])
    };
    let right = (peak + 1..angles.len())
        .find(|&j| gain_db[j] < level)
        .map(|j| cross(j - 1, j))?;
    let left = (0..peak)
        .rev()
        .find(|&j| gain_db[j] < level)
        .map(|j| cross(j + 1, j))?;
    Some(right - left)
}

/// `n` evenly spaced angles from `lo` to `hi` inclusive.
pub fn angle_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

fn centered(n: usize, count: usize) -> f64 {
    n as f64 - (count as f64 - 1.0) / 2.0
}

/// Linear array factor of per-column amplitudes `gamma` (already
/// including the 1-bit phase) at direction sine `s`, against incidence.
pub fn column_factor(cfg: &SurfaceConfig, gamma: &[Complex64], s: f64) -> Complex64 {
    let step = cfg.phase_step(s + cfg.incident_deg.to_radians().sin());
    let w = Complex64::from_polar(1.0, step);
    let mut p = Complex64::from_polar(1.0, step * centered(0, gamma.len()));
    let mut acc = Complex64::new(0.0, 0.0);
    for g in gamma {
        acc += g * p;
        p *= w;
    }
    acc
}

pub fn bit_gamma(amplitude: f64, bits: &[bool]) -> Vec<Complex64> {
    bits.iter()
        .map(|&b| Complex64::new(if b { -amplitude } else { amplitude }, 0.0))
        .collect()
}

fn to_db(af: Complex64, norm: f64) -> f64 {
    10.0 * (af.norm_sqr() / norm).max(1e-30).log10()
}

/// 2D pattern of per-column bits (all rows identical) over `angles_deg`.
pub fn array_factor(
    cfg: &SurfaceConfig,
    bits: &[bool],
    angles_deg: &[f64],
) -> Result<BeamPattern, SurfaceError> {
    cfg.validate()?;
    if bits.len() != cfg.columns {
        return Err(SurfaceError::Config(format!(
            "{} bits for {} columns",
            bits.len(),
            cfg.columns
        )));
    }
    let gamma = bit_gamma(cfg.amplitude, bits);
    Ok(pattern_of(cfg, &gamma, angles_deg))
}

pub fn pattern_of(cfg: &SurfaceConfig, gamma: &[Complex64], angles_deg: &[f64]) -> BeamPattern {
    let norm = (gamma.len() as f64 * cfg.amplitude).powi(2);
    let gain: Vec<f64> = angles_deg
        .par_iter()
        .map(|a| to_db(column_factor(cfg, gamma, a.to_radians().sin()), norm))
        .collect();
    BeamPattern::from_samples(angles_deg.to_vec(), gain)
}

/// Direction sines for azimuth/elevation: u across columns, v across rows.
pub fn direction_uv(az_deg: f64, el_deg: f64) -> (f64, f64) {
    let (az, el) = (az_deg.to_radians(), el_deg.to_radians());
    (el.cos() * az.sin(), el.sin())
}

/// Planar array factor of a rows × columns bit matrix, dB relative to the
/// ideal full-aperture peak.
pub fn planar_gain_db(cfg: &SurfaceConfig, bits: &[Vec<bool>], az_deg: f64, el_deg: f64) -> f64 {
    let (u, v) = direction_uv(az_deg, el_deg);
    let su = cfg.phase_step(u + cfg.incident_deg.to_radians().sin());
    let sv = cfg.phase_step(v);
    let rows = bits.len();
    let mut af = Complex64::new(0.0, 0.0);
    for (m, row) in bits.iter().enumerate() {
        for (n, &b) in row.iter().enumerate() {
            let amp = if b { -cfg.amplitude } else { cfg.amplitude };
            af += amp
                * Complex64::from_polar(1.0, su * centered(n, row.len()) + sv * centered(m, rows));
        }
    }
    to_db(af, (cfg.cells() as f64 * cfg.amplitude).powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarLobe {
    pub az_deg: f64,
    pub el_deg: f64,
    pub gain_db: f64,
}

/// Strongest direction on an az/el grid among directions whose (u, v)
/// lies on the same side as the hint's; this excludes the mirror lobe
/// that any 1-bit pattern carries.
pub fn planar_main_lobe(
    cfg: &SurfaceConfig,
    bits: &[Vec<bool>],
    hint: (f64, f64),
    step_deg: f64,
) -> PlanarLobe {
    let (hu, hv) = direction_uv(hint.0, hint.1);
    let grid = angle_grid(-90.0, 90.0, step_deg);
    grid.par_iter()
        .flat_map_iter(|&el| grid.iter().map(move |&az| (az, el)))
        .filter(|&(az, el)| {
            let (u, v) = direction_uv(az, el);
            u * hu + v * hv >= 0.0
        })
        .map(|(az, el)| PlanarLobe {
            az_deg: az,
            el_deg: el,
            gain_db: planar_gain_db(cfg, bits, az, el),
        })
        .reduce(
            || PlanarLobe {
                az_deg: 0.0,
                el_deg: 0.0,
                gain_db: f64::NEG_INFINITY,
            },
            |a, b| {
                if b.gain_db > a.gain_db
                    || (b.gain_db == a.gain_db && (b.el_deg, b.az_deg) < (a.el_deg, a.az_deg))
                {
                    b
                } else {
                    a
                }
            },
        )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_column_is_flat() {
        let cfg = SurfaceConfig::half_wave(1, 1);
        let p = array_factor(&cfg, &[true], &angle_grid(-90.0, 90.0, 1.0)).unwrap();
        assert!(p.gain_db.iter().all(|g| g.abs() < 1e-9));
    }

    #[test]
    fn uniform_array_broadside_width() {
        // Uniform 16-element half-wave array: HPBW ≈ 0.886·2/N rad.
        let cfg = SurfaceConfig::half_wave(16, 1);
        let p = array_factor(&cfg, &[false; 16], &angle_grid(-90.0, 90.0, 0.01)).unwrap();
        assert!(p.main_lobe_deg.abs() < 1e-9);
        assert!(p.peak_db.abs() < 1e-9);
        let want = (0.886 * 2.0 / 16.0f64).to_degrees();
        assert!((p.hpbw_deg.unwrap() - want).abs() < 0.1, "{:?}", p.hpbw_deg);
    }

    #[test]
    fn wrong_bit_count_rejected() {
        assert!(array_factor(&SurfaceConfig::default(), &[false; 3], &[0.0]).is_err());
    }

    #[test]
    fn planar_matches_linear_for_identical_rows() {
        let cfg = SurfaceConfig::half_wave(4, 4);
        let row = vec![false, true, true, false];
        let bits = vec![row.clone(); 4];
        for az in [-40.0, 0.0, 25.0] {
            let lin = array_factor(&cfg, &row, &[az]).unwrap().gain_db[0];
            assert!((planar_gain_db(&cfg, &bits, az, 0.0) - lin).abs() < 1e-9);
        }
    }
}
