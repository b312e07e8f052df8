use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Zeroth-order modified Bessel function of the first kind (power series).
pub fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let q = x * x / 4.0;
    for k in 1..200 {
        term *= q / (k as f64 * k as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

pub fn kaiser_window(n: usize, beta: f64) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    let denom = bessel_i0(beta);
    (0..n)
        .map(|i| {
            let r = 2.0 * i as f64 / (n - 1) as f64 - 1.0;
            bessel_i0(beta * (1.0 - r * r).max(0.0).sqrt()) / denom
        })
        .collect()
}

/// Odd-length, unit-DC-gain Kaiser-windowed sinc low-pass.
pub fn kaiser_lowpass(num_taps: usize, cutoff_hz: f64, sample_rate: f64, beta: f64) -> Vec<f64> {
    assert!(
        num_taps % 2 == 1,
        "linear-phase design needs an odd tap count"
    );
    let m = (num_taps / 2) as f64;
    let wc = 2.0 * cutoff_hz / sample_rate;
    let win = kaiser_window(num_taps, beta);
    let mut h: Vec<f64> = (0..num_taps)
        .map(|i| {
            let x = i as f64 - m;
            let sinc = if x == 0.0 {
                1.0
            } else {
                (PI * wc * x).sin() / (PI * wc * x)
            };
            wc * sinc * win[i]
        })
        .collect();
    let dc: f64 = h.iter().sum();
    for v in &mut h {
        *v /= dc;
    }
    h
}

/// Zero-phase response of a symmetric FIR (delay removed) at `freq_hz`.
pub fn fir_response(h: &[f64], freq_hz: f64, sample_rate: f64) -> f64 {
    let m = (h.len() / 2) as f64;
    h.iter()
        .enumerate()
        .map(|(i, &v)| v * (2.0 * PI * freq_hz * (i as f64 - m) / sample_rate).cos())
        .sum()
}

/// Linear convolution truncated to the input length with the FIR group
/// delay removed, computed by FFT.
pub fn convolve_same(x: &[Complex64], h: &[f64]) -> Vec<Complex64> {
    if x.is_empty() {
        return Vec::new();
    }
    let delay = h.len() / 2;
    let n = (x.len() + h.len() - 1).next_power_of_two();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut a: Vec<Complex64> = x
        .iter()
        .copied()
        .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
        .take(n)
        .collect();
    let mut b: Vec<Complex64> = h
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
        .take(n)
        .collect();
    fwd.process(&mut a);
    fwd.process(&mut b);
    for (p, q) in a.iter_mut().zip(&b) {
        *p *= q / n as f64;
    }
    inv.process(&mut a);
    a[delay..delay + x.len()].to_vec()
}

pub fn convolve_same_real(x: &[f64], h: &[f64]) -> Vec<f64> {
    let xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    convolve_same(&xc, h).into_iter().map(|c| c.re).collect()
}

/// Cutoff for which the design's response at `edge_hz` is −3 dB.
pub fn tune_cutoff_for_3db(num_taps: usize, beta: f64, edge_hz: f64, sample_rate: f64) -> f64 {
    let target = std::f64::consts::FRAC_1_SQRT_2;
    let (mut lo, mut hi) = (
        edge_hz * 0.5,
        (edge_hz * 2.0).min(sample_rate / 2.0 * 0.999),
    );
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let g = fir_response(
            &kaiser_lowpass(num_taps, mid, sample_rate, beta),
            edge_hz,
            sample_rate,
        );
        if g < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bessel_reference_values() {
        // I0(1) = 1.2660658777520082, I0(5) = 27.239871823604442
        assert!((bessel_i0(1.0) - 1.266_065_877_752_008_2).abs() < 1e-13);
        assert!((bessel_i0(5.0) - 27.239_871_823_604_442).abs() < 1e-10);
    }

    #[test]
    fn convolution_matches_direct_sum() {
        let x: Vec<Complex64> = (0..50)
            .map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos()))
            .collect();
        let h = [0.25, 0.5, 0.25];
        let y = convolve_same(&x, &h);
        for n in 1..49 {
            let direct = x[n - 1] * 0.25 + x[n] * 0.5 + x[n + 1] * 0.25;
            assert!((y[n] - direct).norm() < 1e-12);
        }
    }

    #[test]
    fn tuned_lowpass_hits_3db() {
        let fs = 3.84e6;
        let fc = tune_cutoff_for_3db(97, 4.0, 160e3, fs);
        let g = fir_response(&kaiser_lowpass(97, fc, fs, 4.0), 160e3, fs);
        assert!((20.0 * g.log10() + 3.0103).abs() < 1e-6);
    }
}
