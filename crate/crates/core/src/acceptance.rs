//! The nine end-to-end acceptance checks, shared by the `acceptance` test
//! target and `nrsurface selftest`. Each check returns a verdict with the
//! measured figures instead of panicking.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::beam::{corner_gain_grid, default_timeline, simulate, EventKind, Scenario};
use crate::emulation::{
    build_affine_model, encode_pipeline, solve_payload, PhaseTargets, PipelineConfig, NBPU_SYMBOLS,
};
use crate::frontend::{measure_harmonics, BandpassFilter, ReceiverChain};
use crate::link::{ber_sweep, LinkCondition};
use crate::power::{
    average_power, battery_life_years, reduction_ratio, PowerState, PowerTable, AA_CAPACITY_WH,
};
use crate::surface::{build_codebook, codebook_3d, steer_codebook, SurfaceConfig};
use crate::sync::{
    equivalent_time_sample, sync_sweep, EtsConfig, FastReceiver, SyncConfig, SyncPoint,
    TimingBudget,
};
use crate::waveform::{
    modulate_subframe, wrap_phase, ModulatorConfig, NrsPattern, Qpsk, ResourceGrid, ON_SYMBOL,
};

pub const BLOCKAGE_SCENARIO: &str = include_str!("../../../scenarios/blockage.toml");
pub const TOGGLING_SCENARIO: &str = include_str!("../../../scenarios/toggling.toml");
pub const MULTI_UE_SCENARIO: &str = include_str!("../../../scenarios/multi_ue.toml");

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {}. {}: {}", self.id, self.name, self.detail)
    }
}

fn verdict(id: u8, name: &'static str, passed: bool, detail: String) -> Verdict {
    Verdict {
        id,
        name,
        passed,
        detail,
    }
}

fn failed(id: u8, name: &'static str, e: impl fmt::Display) -> Verdict {
    verdict(id, name, false, format!("error: {e}"))
}

pub fn harmonic_law() -> Verdict {
    const NAME: &str = "harmonic law";
    let run = || -> Result<(f64, f64), Box<dyn std::error::Error>> {
        let mut grid = ResourceGrid::new(NrsPattern::default())?;
        for s in 0..5 {
            grid.set_symbol(s, &ON_SYMBOL)?;
        }
        let cfg = ModulatorConfig::oversampled(4);
        let sig = modulate_subframe(&grid, &cfg, 0.0)?;
        let env = ReceiverChain::new(sig.sample_rate)?.process(&sig)?;
        let start = cfg.useful_start_sample(2);
        let got = measure_harmonics(&env.samples[start..start + cfg.fft_size]);
        let amps: Vec<f64> = got.components.iter().map(|h| h.amplitude).collect();
        let want: Vec<f64> = (1..12).map(|k| (12 - k) as f64).collect();
        let scale = amps.iter().zip(&want).map(|(a, w)| a * w).sum::<f64>()
            / amps.iter().map(|a| a * a).sum::<f64>();
        let rms = (amps
            .iter()
            .zip(&want)
            .map(|(a, w)| ((a * scale - w) / w).powi(2))
            .sum::<f64>()
            / 11.0)
            .sqrt();
        let phase = got
            .components
            .iter()
            .map(|h| wrap_phase(h.phase - h.k as f64 * PI).abs().to_degrees())
            .fold(0.0, f64::max);
        Ok((rms, phase))
    };
    match run() {
        Ok((rms, phase)) => verdict(
            1,
            NAME,
            rms < 0.02 && phase < 2.0,
            format!(
                "amplitude RMS error {:.3}% (< 2%), worst phase error {phase:.3}° (< 2°)",
                rms * 100.0
            ),
        ),
        Err(e) => failed(1, NAME, e),
    }
}

pub fn emulation_round_trip(seed: u64) -> Verdict {
    const NAME: &str = "emulation round trip";
    let run = || -> Result<(usize, usize), Box<dyn std::error::Error>> {
        let cfg = PipelineConfig::default();
        let model = build_affine_model(&cfg)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut exact = 0;
        for _ in 0..100 {
            let entries = NBPU_SYMBOLS
                .iter()
                .flat_map(|&s| (0..12).map(move |c| (s, c)))
                .map(|(s, c)| (s, c, Qpsk::from_quadrant(rng.random_range(0..4))))
                .collect();
            let targets = PhaseTargets { entries };
            let x = solve_payload(&targets, &model)?;
            let coded = encode_pipeline(&x, &cfg)?.select(&model.positions);
            if PhaseTargets::from_bits(&model, &coded) == targets {
                exact += 1;
            }
        }
        Ok((exact, model.rank()))
    };
    match run() {
        Ok((exact, rank)) => verdict(
            2,
            NAME,
            exact == 100 && rank >= 240,
            format!("{exact}/100 target vectors reproduced exactly, rank(A) = {rank} (≥ 240)"),
        ),
        Err(e) => failed(2, NAME, e),
    }
}

pub fn ets_equivalence(seed: u64) -> Verdict {
    const NAME: &str = "ETS equivalence";
    let run = || -> Result<(f64, usize, usize), Box<dyn std::error::Error>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut grid = ResourceGrid::new(NrsPattern::default())?;
        for s in 0..14 {
            for c in 0..12 {
                if !grid.is_nrs(s, c) {
                    grid.set(s, c, Qpsk::from_quadrant(rng.random_range(0..4)))?;
                }
            }
        }
        let cfg = ModulatorConfig::default();
        let direct: Vec<f64> = modulate_subframe(&grid, &cfg, 0.0)?
            .samples
            .iter()
            .map(|x| x.norm_sqr())
            .collect();
        let flat = BandpassFilter {
            taps: vec![1.0],
            sample_rate: cfg.sample_rate(),
            bandwidth_3db_hz: f64::INFINITY,
        };
        let mut rx = FastReceiver::new(&grid, &flat, f64::INFINITY, &[], 0.0, 0);
        let ets = EtsConfig::default();
        let n = ets
            .coverage_frames()
            .ok_or("stride 13 does not cover the symbol")?;
        let mut worst: f64 = 0.0;
        for frame in 0..n {
            let base = ets.bootstrap_slot(frame, 0);
            for (j, v) in equivalent_time_sample(&mut rx, &ets, frame as u64, base, 0.0)
                .iter()
                .enumerate()
            {
                let want = direct[cfg.useful_start_sample(j) + (base + j) % 256];
                worst = worst.max((v - want).abs() / want.abs().max(1.0));
            }
        }
        let oracle = residue_oracle(13, 5, 256);
        Ok((worst, n, oracle))
    };
    match run() {
        Ok((worst, n, oracle)) => verdict(
            3,
            NAME,
            worst <= 1e-9 && n <= 60 && n == oracle && n as f64 * 0.02 <= 1.2,
            format!(
                "max relative deviation {worst:.1e} (≤ 1e-9); brute-force minimal coverage N = {n} frames ({:.2} s), closed-form check {oracle}",
                n as f64 * 0.02
            ),
        ),
        Err(e) => failed(3, NAME, e),
    }
}

/// Closed-form cross-check of the brute-force count: slot k is first
/// reached on symbol j at frame (k − j)·stride⁻¹ mod slots.
fn residue_oracle(stride: usize, per_frame: usize, slots: usize) -> usize {
    let inv = (1..slots).find(|i| (i * stride) % slots == 1).unwrap_or(0);
    (0..slots)
        .map(|k| {
            (0..per_frame)
                .map(|j| ((k + slots - j) * inv) % slots)
                .min()
                .unwrap_or(0)
        })
        .max()
        .unwrap_or(0)
        + 1
}

pub const SYNC_SNRS_DB: [f64; 5] = [-5.0, 0.0, 5.0, 10.0, 15.0];
pub const SYNC_TRIALS: usize = 400;

pub fn sync_points(seed: u64) -> Result<Vec<SyncPoint>, crate::sync::SyncError> {
    sync_sweep(&SYNC_SNRS_DB, SYNC_TRIALS, seed, &SyncConfig::default())
}

pub fn sync_accuracy(points: &[SyncPoint]) -> Verdict {
    const NAME: &str = "sync accuracy";
    let Some(zero) = points.iter().find(|p| p.snr_db == 0.0) else {
        return failed(4, NAME, "no 0 dB point");
    };
    let monotone = points
        .windows(2)
        .all(|w| w[1].mean_error_ns <= w[0].mean_error_ns);
    let curve: Vec<String> = points
        .iter()
        .map(|p| format!("{:.0} dB {:.1} ns", p.snr_db, p.mean_error_ns))
        .collect();
    verdict(
        4,
        NAME,
        zero.mean_error_ns <= 260.0 && monotone && points.iter().all(|p| p.trials >= 400),
        format!(
            "mean |error| {} ({} trials/point; ≤ 260 ns at 0 dB, non-increasing)",
            curve.join(", "),
            zero.trials
        ),
    )
}

pub fn nbpu_ber(seed: u64) -> Verdict {
    const NAME: &str = "NBPU BER";
    match ber_sweep(
        &[
            LinkCondition::snr(14.0),
            LinkCondition::nr_interference(14.0, -10.0),
        ],
        200_000,
        seed,
    ) {
        Ok(pts) => verdict(
            5,
            NAME,
            pts.iter().all(|p| p.symbols >= 200_000 && p.ber <= 2e-5),
            format!(
                "+14 dB: {}/{} errors; −10 dB SINR: {}/{} errors (≤ 2e-5)",
                pts[0].errors, pts[0].symbols, pts[1].errors, pts[1].symbols
            ),
        ),
        Err(e) => failed(5, NAME, e),
    }
}

pub fn beam_synthesis() -> Verdict {
    const NAME: &str = "beam synthesis";
    let run = || -> Result<(f64, f64, f64, f64), crate::surface::SurfaceError> {
        let c16 = SurfaceConfig::half_wave(16, 16);
        let targets: Vec<f64> = (1..=7).map(|i| 10.0 * i as f64).collect();
        let lobe_err = build_codebook(&targets, &c16)?
            .iter()
            .map(|w| (w.main_lobe_deg - w.target_deg).abs())
            .fold(0.0, f64::max);
        let hpbw16 = steer_codebook(30.0, &c16)?
            .hpbw_deg
            .unwrap_or(f64::INFINITY);
        let c80 = SurfaceConfig::half_wave(80, 16);
        let mut hpbw80_err: f64 = 0.0;
        for t in [10.0, 20.0, 30.0] {
            let h = steer_codebook(t, &c80)?.hpbw_deg.unwrap_or(f64::INFINITY);
            hpbw80_err = hpbw80_err.max((h - 1.3).abs());
        }
        let c4 = SurfaceConfig::half_wave(4, 4);
        let mut err3d: f64 = 0.0;
        for az in [-60.0, -40.0, -20.0, 0.0, 20.0, 40.0, 60.0] {
            for el in [0.0, 15.0, 30.0, 45.0] {
                let w = codebook_3d(az, el, &c4)?;
                err3d = err3d.max((w.lobe.az_deg - az).abs().max((w.lobe.el_deg - el).abs()));
            }
        }
        Ok((lobe_err, hpbw16, hpbw80_err, err3d))
    };
    match run() {
        Ok((lobe, h16, h80, e3)) => verdict(
            6,
            NAME,
            lobe <= 2.0 && (h16 - 6.3).abs() <= 1.0 && h80 <= 0.3 && e3 <= 5.0,
            format!(
                "16-col worst lobe error {lobe:.2}° (≤ 2°), HPBW@30° {h16:.2}° (6.3 ± 1), 80-col worst HPBW deviation {h80:.2}° (≤ 0.3), 4×4 worst 3D error {e3:.2}° (≤ 5°)"
            ),
        ),
        Err(e) => failed(6, NAME, e),
    }
}

pub fn power_budget() -> Verdict {
    const NAME: &str = "power budget";
    let run = || -> Result<(f64, f64, f64, f64), crate::power::PowerError> {
        let t = default_timeline();
        let table = PowerTable::default();
        let p = average_power(&t, &table)?;
        let rn = reduction_ratio(&t, &table, PowerState::NbpuActive)?;
        let rr = reduction_ratio(&t, &table, PowerState::ReconfigActive)?;
        let years = battery_life_years(p, AA_CAPACITY_WH)?;
        Ok((p, rn, rr, years))
    };
    match run() {
        Ok((p, rn, rr, years)) => verdict(
            7,
            NAME,
            (p / 242.7e-6 - 1.0).abs() <= 0.01
                && (rn / 20.4 - 1.0).abs() <= 0.05
                && (rr / 13.9 - 1.0).abs() <= 0.05
                && (years - 2.1).abs() <= 0.1,
            format!(
                "average {:.2} µW (242.7 ± 1%), NBPU ratio {rn:.2}× (20.4 ± 5%), reconfig ratio {rr:.2}× (13.9 ± 5%), battery {years:.2} y (2.1 ± 0.1)",
                p * 1e6
            ),
        ),
        Err(e) => failed(7, NAME, e),
    }
}

pub fn protocol_behaviour() -> Verdict {
    const NAME: &str = "protocol behaviour";
    let run = || -> Result<(bool, String), crate::beam::BeamError> {
        // Blockage flip: within 1 dB of the new optimum after 2 periods + report delay.
        let sc = Scenario::from_toml(BLOCKAGE_SCENARIO)?;
        let flip = sc.env.blockages.first().map_or(0.0, |b| b.start_s);
        let deadline = flip + 2.0 * sc.layout.period_s + sc.layout.report_delay_max_s;
        let r = simulate(&sc)?;
        let recovered_at = r
            .traces
            .iter()
            .filter(|t| t.t > flip && t.optimum_db - t.snr_db <= 1.0)
            .map(|t| t.t)
            .find(|&t| {
                r.traces
                    .iter()
                    .filter(|x| x.t >= t)
                    .all(|x| x.optimum_db - x.snr_db <= 1.0)
            });
        let flip_ok = recovered_at.is_some_and(|t| t <= deadline);

        let r = simulate(&Scenario::from_toml(TOGGLING_SCENARIO)?)?;
        let beams: Vec<u16> = r.traces.iter().map(|t| t.beam).collect();
        let toggle_ok = beams.len() > 3 && beams[2..].windows(2).all(|w| w[0] != w[1]);

        let r = simulate(&Scenario::from_toml(MULTI_UE_SCENARIO)?)?;
        let boundaries = [5e-3, 12.5e-3];
        let split_ok = r.traces.iter().filter(|t| t.period >= 2).all(|t| {
            let offset = t.t - t.period as f64 * 0.02;
            (t.snr_db - t.optimum_db).abs() < 1e-9
                && boundaries
                    .get(t.ue)
                    .is_some_and(|b| (offset - b).abs() < 1e-9)
        }) && r.events.iter().any(|e| e.event == EventKind::Reconfig);

        let codebook: Vec<f64> = (0..=28).map(|i| -70.0 + 5.0 * i as f64).collect();
        let grid = corner_gain_grid(16, &codebook)?;
        let min_gain = grid.iter().map(|p| p.gain_db).fold(f64::INFINITY, f64::min);
        let mean_gain = grid.iter().map(|p| p.gain_db).sum::<f64>() / grid.len().max(1) as f64;
        let corner_ok = !grid.is_empty() && min_gain > 0.0;

        let detail = format!(
            "blockage recovery at {} (deadline {:.0} ms); toggling beams {}; multi-UE split {}; corner gain over mirror min {min_gain:.1} dB, mean {mean_gain:.1} dB over {} points",
            recovered_at.map_or("never".into(), |t| format!("{:.0} ms", t * 1e3)),
            deadline * 1e3,
            if toggle_ok { "alternate every period" } else { "do not alternate" },
            if split_ok { "serves each UE its best beam" } else { "misses a UE's best beam" },
            grid.len()
        );
        Ok((flip_ok && toggle_ok && split_ok && corner_ok, detail))
    };
    match run() {
        Ok((ok, detail)) => verdict(8, NAME, ok, detail),
        Err(e) => failed(8, NAME, e),
    }
}

pub fn timing_budget(points: &[SyncPoint]) -> Verdict {
    const NAME: &str = "timing budget";
    let b = TimingBudget::default();
    let at_or_above: Vec<&SyncPoint> = points.iter().filter(|p| p.snr_db >= 0.0).collect();
    let worst = at_or_above
        .iter()
        .flat_map(|p| p.errors_ns.iter().copied())
        .fold(0.0, f64::max);
    let trials: usize = at_or_above.iter().map(|p| p.errors_ns.len()).sum();
    let ok = trials > 0
        && at_or_above
            .iter()
            .flat_map(|p| &p.errors_ns)
            .all(|&e| b.fits_symbol_cp(e) && b.fits_half_subframe_cp(e));
    verdict(
        9,
        NAME,
        ok,
        format!(
            "worst sync error {worst:.1} ns over {trials} trials at ≥ 0 dB: +10 ns = {:.1} (< 585), +260 ns = {:.1} (< 1106)",
            worst + b.reconfig_latency_ns,
            worst + b.reconfig_latency_ns + b.noncolocated_penalty_ns
        ),
    )
}

/// Runs all nine checks in order.
pub fn run_all(seed: u64) -> Vec<Verdict> {
    let sync = sync_points(seed);
    let (c4, c9) = match &sync {
        Ok(points) => (sync_accuracy(points), timing_budget(points)),
        Err(e) => (failed(4, "sync accuracy", e), failed(9, "timing budget", e)),
    };
    vec![
        harmonic_law(),
        emulation_round_trip(seed),
        ets_equivalence(seed),
        c4,
        nbpu_ber(seed),
        beam_synthesis(),
        power_budget(),
        protocol_behaviour(),
        c9,
    ]
}
