use std::f64::consts::PI;

use num_complex::Complex64;

use crate::waveform::{SUBCARRIERS, SUBCARRIER_SPACING_HZ};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Harmonic {
    pub k: usize,
    pub frequency_hz: f64,
    pub amplitude: f64,
    pub phase: f64,
}

impl Harmonic {
    pub fn phasor(&self) -> Complex64 {
        Complex64::from_polar(self.amplitude, self.phase)
    }
}

/// First-order envelope harmonics of one OFDM symbol (k = 1..11), with
/// per-pair amplitude normalised to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicSet {
    pub components: Vec<Harmonic>,
}

impl HarmonicSet {
    /// Σ_k A_k cos(2π kΔf t + θ_k), `t` from the start of the useful part.
    pub fn eval(&self, t: f64) -> f64 {
        self.components
            .iter()
            .map(|h| h.amplitude * (2.0 * PI * h.frequency_hz * t + h.phase).cos())
            .sum()
    }

    /// Total square-law envelope |x(t)|² = N + 2·Σ_k A_k cos(...).
    pub fn square_law(&self, t: f64) -> f64 {
        SUBCARRIERS as f64 + 2.0 * self.eval(t)
    }

    pub fn amplitudes(&self) -> Vec<f64> {
        self.components.iter().map(|h| h.amplitude).collect()
    }
}

/// Component k is the phasor sum of the 12−k subcarrier pairs at spacing k.
pub fn analytic_envelope(phases: &[f64; SUBCARRIERS]) -> HarmonicSet {
    let components = (1..SUBCARRIERS)
        .map(|k| {
            let h: Complex64 = (k..SUBCARRIERS)
                .map(|i| Complex64::from_polar(1.0, phases[i] - phases[i - k]))
                .sum();
            Harmonic {
                k,
                frequency_hz: k as f64 * SUBCARRIER_SPACING_HZ,
                amplitude: h.norm(),
                phase: h.arg(),
            }
        })
        .collect();
    HarmonicSet { components }
}

/// Harmonics measured from one useful-symbol period of envelope samples
/// (`samples.len()` must span exactly 1/Δf): bin k divided by N.
pub fn measure_harmonics(samples: &[f64]) -> HarmonicSet {
    let n = samples.len();
    let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    rustfft::FftPlanner::new()
        .plan_fft_forward(n)
        .process(&mut buf);
    let components = (1..SUBCARRIERS)
        .map(|k| {
            let h = buf[k] / n as f64;
            Harmonic {
                k,
                frequency_hz: k as f64 * SUBCARRIER_SPACING_HZ,
                amplitude: h.norm(),
                phase: h.arg(),
            }
        })
        .collect();
    HarmonicSet { components }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveform::{useful_symbol_s, Qpsk, ON_SYMBOL};

    fn wrapped_diff(a: f64, b: f64) -> f64 {
        crate::waveform::wrap_phase(a - b).abs()
    }

    #[test]
    fn max_power_symbol_law() {
        let phases = ON_SYMBOL.map(Qpsk::radians);
        let set = analytic_envelope(&phases);
        for h in &set.components {
            assert!((h.amplitude - (12 - h.k) as f64).abs() < 1e-12);
            assert!(wrapped_diff(h.phase, h.k as f64 * PI) < 1e-9);
        }
        assert!((set.eval(0.0) + 6.0).abs() < 1e-9);
        assert!((set.eval(useful_symbol_s() / 2.0) - 66.0).abs() < 1e-9);
        assert!((set.square_law(useful_symbol_s() / 2.0) - 144.0).abs() < 1e-9);
    }

    #[test]
    fn measurement_inverts_the_model() {
        let phases = [
            0.3, 1.0, -2.0, 2.2, 0.0, 0.5, 1.5, -1.0, 3.0, -0.2, 0.9, 2.0,
        ];
        let set = analytic_envelope(&phases);
        let n = 512;
        let samples: Vec<f64> = (0..n)
            .map(|i| set.square_law(i as f64 * useful_symbol_s() / n as f64))
            .collect();
        let got = measure_harmonics(&samples);
        for (a, b) in set.components.iter().zip(&got.components) {
            assert!((a.phasor() - b.phasor()).norm() < 1e-9);
        }
    }

    #[test]
    fn equal_phases_give_zero_phase() {
        let set = analytic_envelope(&[1.3; 12]);
        for h in &set.components {
            assert!((h.amplitude - (12 - h.k) as f64).abs() < 1e-12);
            assert!(h.phase.abs() < 1e-12);
        }
    }

    #[test]
    fn square_law_matches_direct_sum() {
        let phases = [
            0.1, 2.0, -1.0, 0.7, 3.0, 1.1, -2.2, 0.0, 0.4, 2.8, -0.5, 1.9,
        ];
        let set = analytic_envelope(&phases);
        for t in [0.0, 3e-6, 17.7e-6, 50e-6] {
            let x: Complex64 = phases
                .iter()
                .enumerate()
                .map(|(c, &p)| {
                    Complex64::from_polar(
                        1.0,
                        2.0 * PI * (c as f64 - 6.0) * SUBCARRIER_SPACING_HZ * t + p,
                    )
                })
                .sum();
            assert!((x.norm_sqr() - set.square_law(t)).abs() < 1e-9);
        }
    }
}
