//! Equivalent-time sampling against direct sampling, coverage against a
//! modular-inverse oracle, and the Monte-Carlo shape.

use nrsurface::frontend::{BandpassFilter, ReceiverChain};
use nrsurface::sync::{
    bootstrap_sweep, coverage_frames, equivalent_time_sample, sync_grid, sync_sweep, synchronize,
    EtsConfig, FastReceiver, SyncConfig, SyncState, TraceSource,
};
use nrsurface::waveform::{modulate_subframe, ModulatorConfig, NrsPattern, Qpsk, ResourceGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_grid(seed: u64) -> ResourceGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = ResourceGrid::new(NrsPattern::default()).unwrap();
    for s in 0..14 {
        for c in 0..12 {
            if !g.is_nrs(s, c) {
                g.set(s, c, Qpsk::from_quadrant(rng.random_range(0..4)))
                    .unwrap();
            }
        }
    }
    g
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn ets_equals_direct_sampling_of_modulator_output() {
    let grid = random_grid(3);
    let cfg = ModulatorConfig::default();
    let direct: Vec<f64> = modulate_subframe(&grid, &cfg, 0.0)
        .unwrap()
        .samples
        .iter()
        .map(|x| x.norm_sqr())
        .collect();
    // A single unit tap: flat response, so the analytic path is the raw signal.
    let flat = BandpassFilter {
        taps: vec![1.0],
        sample_rate: cfg.sample_rate(),
        bandwidth_3db_hz: f64::INFINITY,
    };
    let mut rx = FastReceiver::new(&grid, &flat, f64::INFINITY, &[], 0.0, 0);
    let ets = EtsConfig::default();
    let n = ets.coverage_frames().unwrap();
    let mut checked = vec![false; 256];
    for frame in 0..n {
        let base = ets.bootstrap_slot(frame, 0);
        let got = equivalent_time_sample(&mut rx, &ets, frame as u64, base, 0.0);
        for (j, v) in got.iter().enumerate() {
            let slot = (base + j) % 256;
            let want = direct[cfg.useful_start_sample(j) + slot];
            assert!(
                close(*v, want),
                "frame {frame} symbol {j} slot {slot}: {v} vs {want}"
            );
            checked[slot] = true;
        }
    }
    assert!(checked.iter().all(|&c| c));
}

#[test]
fn ets_equals_direct_sampling_of_dense_trace() {
    let grid = sync_grid();
    let cfg = ModulatorConfig::oversampled(4);
    let sig = modulate_subframe(&grid, &cfg, 0.0).unwrap();
    let env = ReceiverChain::new(sig.sample_rate)
        .unwrap()
        .process(&sig)
        .unwrap();
    let mut src = TraceSource {
        env: env.clone(),
        tau_s: 0.0,
    };
    let ets = EtsConfig::default();
    for base in [0usize, 13, 128, 251] {
        let got = equivalent_time_sample(&mut src, &ets, 0, base, 0.0);
        for (j, v) in got.iter().enumerate() {
            let slot = (base + j) % 256;
            let want = env.samples[cfg.useful_start_sample(j) + 4 * slot];
            assert!(close(*v, want), "symbol {j} slot {slot}");
        }
    }
}

/// Frames needed so every slot is hit: slot k is first reached on symbol j
/// at frame n = (k − j)·stride⁻¹ mod slots.
fn residue_oracle(stride: usize, per_frame: usize, slots: usize) -> usize {
    let inv = (1..slots)
        .find(|i| (i * stride) % slots == 1)
        .expect("stride invertible");
    (0..slots)
        .map(|k| {
            (0..per_frame)
                .map(|j| ((k + slots - j) * inv) % slots)
                .min()
                .unwrap()
        })
        .max()
        .unwrap()
        + 1
}

#[test]
fn coverage_matches_residue_oracle() {
    for stride in [13usize, 23, 1, 51, 127] {
        let want = residue_oracle(stride, 5, 256);
        assert_eq!(
            coverage_frames(stride, 5, 256),
            Some(want),
            "stride {stride}"
        );
        println!("stride {stride}: minimal coverage N = {want}");
    }
    let n13 = coverage_frames(13, 5, 256).unwrap();
    assert!(n13 <= 60);
    assert!(n13 as f64 * 0.02 <= 1.2);
    assert_eq!(coverage_frames(2, 1, 256), None);
}

#[test]
fn drift_without_corrections_grows_linearly() {
    let filter = BandpassFilter::design(15.36e6, Default::default()).unwrap();
    let cfg = SyncConfig::default();
    let drift = 3e-9;
    let mut rx = FastReceiver::new(&sync_grid(), &filter, 20.0, &[], 50e-9, 11).with_drift(drift);
    let boot = bootstrap_sweep(&mut rx, &cfg, 0).unwrap();
    let mut state = SyncState::from_bootstrap(&boot, boot.frames_used as u64);
    let first = synchronize(&mut rx, &mut state, &cfg)
        .unwrap()
        .error_s
        .unwrap();
    for _ in 0..20 {
        synchronize(&mut rx, &mut state, &cfg).unwrap();
    }
    let last = synchronize(&mut rx, &mut state, &cfg)
        .unwrap()
        .error_s
        .unwrap();
    assert!(((first - last) - 21.0 * drift).abs() < 1e-12);
}

#[test]
fn error_curve_is_non_increasing() {
    let snrs = [-5.0, 0.0, 5.0, 10.0, 15.0];
    let pts = sync_sweep(&snrs, 400, 21, &SyncConfig::default()).unwrap();
    for w in pts.windows(2) {
        assert!(
            w[1].mean_error_ns <= w[0].mean_error_ns,
            "{} dB → {} dB",
            w[0].snr_db,
            w[1].snr_db
        );
    }
    let zero = &pts[1];
    assert!(zero.mean_error_ns <= 260.0);
    assert_eq!(zero.errors_ns.len(), 400);
}

#[test]
fn sweep_is_reproducible() {
    let a = sync_sweep(&[0.0], 50, 5, &SyncConfig::default()).unwrap();
    let b = sync_sweep(&[0.0], 50, 5, &SyncConfig::default()).unwrap();
    assert_eq!(a, b);
}
