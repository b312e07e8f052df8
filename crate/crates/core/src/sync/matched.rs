use num_complex::Complex64;

use crate::waveform::{subcarrier_offset_hz, ON_SYMBOL};

/// Square-law envelope of the max-power symbol on the slot grid, from the
/// useful start. Peaks at 144 in the middle slot.
pub fn envelope_template(slots: usize, slot_s: f64) -> Vec<f64> {
    (0..slots)
        .map(|k| {
            let t = k as f64 * slot_s;
            ON_SYMBOL
                .iter()
                .enumerate()
                .map(|(c, q)| {
                    Complex64::from_polar(
                        1.0,
                        q.radians() + 2.0 * std::f64::consts::PI * subcarrier_offset_hz(c) * t,
                    )
                })
                .sum::<Complex64>()
                .norm_sqr()
        })
        .collect()
}

/// Result of correlating a full-symbol slot profile with the template.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullSymbolMatch {
    /// Circular shift (slots) maximising the correlation; earliest on ties.
    pub shift: usize,
    /// Shift with optional sub-slot refinement.
    pub refined: f64,
    /// Normalised correlation at the peak, in [−1, 1].
    pub score: f64,
}

/// Circular matched filter of a mean-removed profile against the
/// mean-removed template.
pub fn full_symbol_match(profile: &[f64], template: &[f64], parabolic: bool) -> FullSymbolMatch {
    let n = profile.len();
    assert_eq!(n, template.len(), "profile and template lengths differ");
    let pm = profile.iter().sum::<f64>() / n as f64;
    let tm = template.iter().sum::<f64>() / n as f64;
    let p: Vec<f64> = profile.iter().map(|v| v - pm).collect();
    let t: Vec<f64> = template.iter().map(|v| v - tm).collect();
    let corr: Vec<f64> = (0..n)
        .map(|s| (0..n).map(|k| p[(k + s) % n] * t[k]).sum())
        .collect();
    let mut best = 0;
    for s in 1..n {
        if corr[s] > corr[best] {
            best = s;
        }
    }
    let norm = (p.iter().map(|v| v * v).sum::<f64>() * t.iter().map(|v| v * v).sum::<f64>()).sqrt();
    let score = if norm > 0.0 { corr[best] / norm } else { 0.0 };
    let mut refined = best as f64;
    if parabolic {
        let (y0, y1, y2) = (corr[(best + n - 1) % n], corr[best], corr[(best + 1) % n]);
        let den = y0 - 2.0 * y1 + y2;
        if den < 0.0 {
            refined += (0.5 * (y0 - y2) / den).clamp(-0.5, 0.5);
        }
    }
    FullSymbolMatch {
        shift: best,
        refined,
        score,
    }
}

/// Windowed matched filter over the central three slots. `samples` are the
/// five ETS samples at slots c−2..=c+2 around the expected peak `c`;
/// `window` is the template at c−1..=c+1. Returns the normalised score at
/// the best shift and the shift in {−1, 0, +1}: +1 means the samples were
/// taken one slot late.
pub fn matched_filter_window(
    samples: &[f64; 5],
    window: &[f64; 3],
    noise_floor: f64,
) -> (f64, i32) {
    let mut best = (f64::NEG_INFINITY, 0);
    for shift in [-1i32, 0, 1] {
        let start = (1 - shift) as usize;
        let seg: Vec<f64> = samples[start..start + 3]
            .iter()
            .map(|v| v - noise_floor)
            .collect();
        let score = cosine(&seg, window);
        if score > best.0 + 1e-12 || (shift == 0 && (score - best.0).abs() <= 1e-12) {
            best = (score, shift);
        }
    }
    best
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::analytic_envelope;
    use crate::sync::EtsConfig;
    use crate::waveform::Qpsk;

    #[test]
    fn template_peak_and_edges() {
        let cfg = EtsConfig::default();
        let t = envelope_template(256, cfg.slot_s);
        assert!((t[128] - 144.0).abs() < 1e-9);
        assert!(t[0].abs() < 1e-9);
        let set = analytic_envelope(&ON_SYMBOL.map(Qpsk::radians));
        for k in [0usize, 17, 100, 128, 201] {
            assert!((t[k] - set.square_law(k as f64 * cfg.slot_s)).abs() < 1e-9);
        }
    }

    #[test]
    fn central_window_holds_most_energy_per_slot() {
        let t = envelope_template(256, EtsConfig::default().slot_s);
        let window_mean = (t[127] + t[128] + t[129]) / 3.0;
        let symbol_mean = t.iter().sum::<f64>() / 256.0;
        // 144 at the centre against a 12 average over the symbol.
        assert!(window_mean > 11.0 * symbol_mean);
        assert!((symbol_mean - 12.0).abs() < 1e-9);
    }

    #[test]
    fn full_match_recovers_circular_shift() {
        let t = envelope_template(256, EtsConfig::default().slot_s);
        for s in [0usize, 5, 128, 250] {
            let p: Vec<f64> = (0..256).map(|k| t[(k + 256 - s) % 256]).collect();
            let m = full_symbol_match(&p, &t, true);
            assert_eq!(m.shift, s);
            assert!((m.refined - s as f64).abs() < 1e-9);
            assert!((m.score - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn window_detects_alignment_and_shift() {
        let t = envelope_template(256, EtsConfig::default().slot_s);
        let window = [t[127], t[128], t[129]];
        let aligned = [t[126], t[127], t[128], t[129], t[130]];
        let (score, off) = matched_filter_window(&aligned, &window, 0.0);
        assert_eq!(off, 0);
        assert!((score - 1.0).abs() < 1e-12);
        let late = [t[127], t[128], t[129], t[130], t[131]];
        assert_eq!(matched_filter_window(&late, &window, 0.0).1, 1);
        let early = [t[125], t[126], t[127], t[128], t[129]];
        assert_eq!(matched_filter_window(&early, &window, 0.0).1, -1);
    }
}
