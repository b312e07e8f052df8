use std::f64::consts::PI;

use num_complex::Complex64;

use super::SurfaceError;

/// Free-space wave impedance, ohms.
pub const Z0: f64 = 376.730_313_668;
pub const DEFAULT_CARRIER_HZ: f64 = 24.125e9;
/// GPIO rise time driving the varactor bias.
pub const GPIO_RISE_S: f64 = 7e-9;
pub const CELL_SWITCH_ENERGY_J: f64 = 12e-12;

/// Unit cell as a shunt admittance on the free-space line:
/// y = g + (fixed reactive part) + n²·Z0 / (Rs + 1/(jωCj)), normalised to
/// 1/Z0, with Γ = (1 − y)/(1 + y). The fixed part and the coupling n² are
/// fitted so the two GPIO bias states give amplitude 0.6 and opposite phase
/// at the carrier.
#[derive(Debug, Clone, PartialEq)]
pub struct VaractorModel {
    pub rs_ohm: f64,
    /// (bias V, junction capacitance F), ascending bias.
    pub cj_table: Vec<(f64, f64)>,
    pub amplitude: f64,
    pub carrier_hz: f64,
    /// Normalised loss conductance.
    pub conductance: f64,
    /// Fixed shunt inductance (H); `None` if the fixed part is capacitive.
    pub inductance_h: Option<f64>,
    /// Fixed shunt capacitance (F) when the fit needs one.
    pub capacitance_f: f64,
    pub coupling: f64,
    /// Fitted phase of Γ in the 0 V state.
    pub phase_0v: f64,
}

impl Default for VaractorModel {
    fn default() -> Self {
        Self::fit(
            13.0,
            vec![(0.0, 0.22e-12), (3.3, 0.08e-12), (15.0, 0.04e-12)],
            0.6,
            DEFAULT_CARRIER_HZ,
        )
        .expect("nominal varactor parameters admit a fit")
    }
}

fn varactor_term(rs: f64, cj: f64, omega: f64) -> Complex64 {
    Z0 / Complex64::new(rs, -1.0 / (omega * cj))
}

impl VaractorModel {
    /// Solves for the circuit so that Γ(0 V) = a∠ψ and Γ(3.3 V) = −Γ(0 V).
    /// With y₁ = 1/y₀ for opposite Γ, the condition is
    /// −4Γ/(1 − Γ²) = n²·(D₀ − D₁); ψ is the root making n² real and
    /// positive with non-negative loss conductance.
    pub fn fit(
        rs_ohm: f64,
        cj_table: Vec<(f64, f64)>,
        amplitude: f64,
        carrier_hz: f64,
    ) -> Result<Self, SurfaceError> {
        if !(0.0..1.0).contains(&amplitude) || amplitude == 0.0 {
            return Err(SurfaceError::Config(format!(
                "reflection amplitude {amplitude} not in (0, 1)"
            )));
        }
        let lookup = |v: f64| cj_table.iter().find(|e| e.0 == v).map(|e| e.1);
        let (c0, c1) = match (lookup(0.0), lookup(3.3)) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(SurfaceError::Config(
                    "capacitance table needs 0 V and 3.3 V".into(),
                ))
            }
        };
        let omega = 2.0 * PI * carrier_hz;
        let d = varactor_term(rs_ohm, c0, omega) - varactor_term(rs_ohm, c1, omega);
        let ratio = |psi: f64| {
            let g = Complex64::from_polar(amplitude, psi);
            -4.0 * g / (1.0 - g * g) / d
        };
        let steps = 720;
        let mut best: Option<(f64, f64, Complex64)> = None;
        for i in 0..steps {
            let (mut lo, mut hi) = (
                2.0 * PI * i as f64 / steps as f64,
                2.0 * PI * (i + 1) as f64 / steps as f64,
            );
            if ratio(lo).im.signum() == ratio(hi).im.signum() {
                continue;
            }
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if ratio(mid).im.signum() == ratio(lo).im.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let psi = 0.5 * (lo + hi);
            let n2 = ratio(psi).re;
            if n2 <= 0.0 {
                continue;
            }
            let g0 = Complex64::from_polar(amplitude, psi);
            let y0 = (1.0 - g0) / (1.0 + g0);
            let yf = y0 - n2 * varactor_term(rs_ohm, c0, omega);
            if yf.re >= -1e-12 && best.is_none() {
                best = Some((psi, n2, yf));
            }
        }
        let (psi, n2, yf) =
            best.ok_or_else(|| SurfaceError::Config("no passive circuit fits the targets".into()))?;
        let (inductance_h, capacitance_f) = if yf.im < 0.0 {
            (Some(Z0 / (omega * -yf.im)), 0.0)
        } else {
            (None, yf.im / (Z0 * omega))
        };
        Ok(Self {
            rs_ohm,
            cj_table,
            amplitude,
            carrier_hz,
            conductance: yf.re.max(0.0),
            inductance_h,
            capacitance_f,
            coupling: n2,
            phase_0v: psi,
        })
    }

    pub fn cj(&self, bias_v: f64) -> Option<f64> {
        self.cj_table
            .iter()
            .find(|e| (e.0 - bias_v).abs() < 1e-9)
            .map(|e| e.1)
    }

    /// Rs·Cj at 0 V, the slowest state.
    pub fn time_constant_s(&self) -> f64 {
        self.rs_ohm * self.cj(0.0).unwrap_or(0.0)
    }

    /// Γ of the cell at a GPIO bias (0 or 3.3 V).
    pub fn reflection_coefficient(
        &self,
        bias_v: f64,
        freq_hz: f64,
    ) -> Result<Complex64, SurfaceError> {
        if ![0.0, 3.3].iter().any(|b| (b - bias_v).abs() < 1e-9) {
            return Err(SurfaceError::Bias(bias_v));
        }
        let cj = self.cj(bias_v).ok_or(SurfaceError::Bias(bias_v))?;
        let omega = 2.0 * PI * freq_hz;
        let fixed_b =
            self.inductance_h.map_or(0.0, |l| -Z0 / (omega * l)) + Z0 * omega * self.capacitance_f;
        let y = Complex64::new(self.conductance, fixed_b)
            + self.coupling * varactor_term(self.rs_ohm, cj, omega);
        Ok((1.0 - y) / (1.0 + y))
    }

    /// Phase of Γ(0 V) relative to Γ(3.3 V), degrees in (−180, 180].
    pub fn phase_difference_deg(&self, freq_hz: f64) -> Result<f64, SurfaceError> {
        let a = self.reflection_coefficient(0.0, freq_hz)?;
        let b = self.reflection_coefficient(3.3, freq_hz)?;
        Ok((a / b).arg().to_degrees())
    }
}

/// Latency and energy to reconfigure `cells` unit cells at once.
pub fn reconfig_cost(cells: usize, varactor: &VaractorModel) -> (f64, f64) {
    let latency = if cells == 0 {
        0.0
    } else {
        GPIO_RISE_S + varactor.time_constant_s()
    };
    (latency, cells as f64 * CELL_SWITCH_ENERGY_J)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fitted_states_are_opposite_with_amplitude() {
        let m = VaractorModel::default();
        let a = m.reflection_coefficient(0.0, DEFAULT_CARRIER_HZ).unwrap();
        let b = m.reflection_coefficient(3.3, DEFAULT_CARRIER_HZ).unwrap();
        assert!((a.norm() - 0.6).abs() < 1e-9 && (b.norm() - 0.6).abs() < 1e-9);
        assert!((m.phase_difference_deg(DEFAULT_CARRIER_HZ).unwrap().abs() - 180.0).abs() < 1e-6);
        assert!(m.coupling > 0.0 && m.conductance >= 0.0);
    }

    #[test]
    fn fit_parameters() {
        let m = VaractorModel::default();
        assert!((m.phase_0v.to_degrees() - 216.56).abs() < 0.01);
        assert!((m.coupling - 0.345).abs() < 1e-3);
        assert!((m.inductance_h.unwrap() - 1.346e-9).abs() < 0.01e-9);
    }

    #[test]
    fn band_edges_hold_tolerance() {
        let m = VaractorModel::default();
        for f in [24.025e9, 24.075e9, 24.175e9, 24.225e9] {
            let d = m.phase_difference_deg(f).unwrap().abs();
            assert!((d - 180.0).abs() <= 10.0, "{f}: {d}");
            for bias in [0.0, 3.3] {
                let amp = m.reflection_coefficient(bias, f).unwrap().norm();
                assert!((amp - 0.6).abs() <= 0.05, "{f} {bias}: {amp}");
            }
        }
    }

    #[test]
    fn passive_everywhere() {
        let m = VaractorModel::default();
        for i in 0..=100 {
            let f = 20e9 + 1e8 * i as f64;
            assert!(m.reflection_coefficient(0.0, f).unwrap().norm() <= 1.0);
            assert!(m.reflection_coefficient(3.3, f).unwrap().norm() <= 1.0);
        }
    }

    #[test]
    fn bias_outside_gpio_set_is_rejected() {
        let m = VaractorModel::default();
        assert!(matches!(
            m.reflection_coefficient(15.0, DEFAULT_CARRIER_HZ),
            Err(SurfaceError::Bias(_))
        ));
        assert!(m.reflection_coefficient(1.0, DEFAULT_CARRIER_HZ).is_err());
    }

    #[test]
    fn time_constant_and_cost() {
        let m = VaractorModel::default();
        assert!((m.time_constant_s() - 2.86e-12).abs() < 1e-15);
        let (lat, e) = reconfig_cost(256, &m);
        assert!(lat < 10e-9 && lat > 7e-9);
        assert!((e - 3.072e-9).abs() < 1e-15);
        assert_eq!(reconfig_cost(1, &m).1, 12e-12);
        assert_eq!(reconfig_cost(0, &m), (0.0, 0.0));
    }
}
