use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn nrsurface(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nrsurface"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<csv::StringRecord>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    (header, r.records().map(Result::unwrap).collect())
}

#[test]
fn sync_sweep_writes_one_row_per_snr() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sync.csv");
    let o = nrsurface(&[
        "--seed",
        "7",
        "sync-sweep",
        "--snr",
        "-5:15:5",
        "--trials",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = csv_rows(&out);
    assert_eq!(
        header,
        [
            "snr_db",
            "trials",
            "missed",
            "mean_error_ns",
            "p95_error_ns",
            "max_error_ns"
        ]
    );
    assert_eq!(rows.len(), 5);
    let snrs: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(snrs, [-5.0, 0.0, 5.0, 10.0, 15.0]);
}

#[test]
fn identical_seeds_give_identical_output() {
    let run = |seed: &str| {
        nrsurface(&[
            "--seed",
            seed,
            "ber-sweep",
            "--snr",
            "-2,2",
            "--symbols",
            "2000",
        ])
        .stdout
    };
    let a = run("11");
    assert!(!a.is_empty());
    assert_eq!(a, run("11"));
    assert_ne!(a, run("12"));
}

#[test]
fn scenario_event_log_shape() {
    let dir = tempfile::tempdir().unwrap();
    let events = dir.path().join("events.csv");
    let trace = dir.path().join("trace.csv");
    let cfg = scenario("multi_ue.toml");
    let o = nrsurface(&[
        "scenario",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        events.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = csv_rows(&events);
    assert_eq!(header, ["t", "event", "surface", "beam", "ue", "snr_db"]);
    assert!(!rows.is_empty());
    let kinds = [
        "sync",
        "sync_fail",
        "sweep",
        "report",
        "nbpu_decode",
        "nbpu_miss",
        "reconfig",
    ];
    let mut last = f64::NEG_INFINITY;
    for r in &rows {
        assert!(kinds.contains(&&r[1]), "unknown event {}", &r[1]);
        let t: f64 = r[0].parse().unwrap();
        assert!(t >= last, "events out of order");
        last = t;
    }
    assert!(rows.iter().any(|r| &r[1] == "reconfig"));
    let (header, rows) = csv_rows(&trace);
    assert_eq!(header[..3], ["period", "t", "surface"]);
    assert!(!rows.is_empty());
}

#[test]
fn codebook_and_pattern_agree_on_main_lobe() {
    let o = nrsurface(&["codebook", "--targets", "30"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let lobe: f64 = row[3].parse().unwrap();
    assert!((lobe - 30.0).abs() <= 2.0);

    let o = nrsurface(&["beam-pattern", "--target", "30", "--step", "0.01"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let (peak, _) = text
        .lines()
        .skip(1)
        .map(|l| {
            let (a, g) = l.split_once(',').unwrap();
            (a.parse::<f64>().unwrap(), g.parse::<f64>().unwrap())
        })
        .filter(|&(a, _)| a > 0.0)
        .fold((0.0, f64::NEG_INFINITY), |best, p| {
            if p.1 > best.1 {
                p
            } else {
                best
            }
        });
    assert!(
        (peak - lobe).abs() < 0.02,
        "pattern peak {peak} vs codebook {lobe}"
    );
}

#[test]
fn emulate_reproduces_every_target() {
    let o = nrsurface(&["emulate", "--info", "21"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("payload"));
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<_> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 120);
    for r in rows {
        let f: Vec<f64> = r.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((f[2] - f[3]).abs() < 1e-9, "{r}");
    }
}

#[test]
fn waveform_writes_envelope_and_iq() {
    let dir = tempfile::tempdir().unwrap();
    let iq = dir.path().join("sf.iq");
    let o = nrsurface(&[
        "waveform",
        "--oversample",
        "2",
        "--iq-out",
        iq.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    // 1 ms at 7.68 MHz, 8 bytes per sample.
    assert_eq!(std::fs::metadata(&iq).unwrap().len(), 7680 * 8);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("t,value"));
    assert_eq!(text.lines().count(), 7681);
}

#[test]
fn power_reports_each_state() {
    let o = nrsurface(&["power"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let states: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(states, ["nbpu_active", "reconfig_active", "idle"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("years"));
}

#[test]
fn exit_codes() {
    assert_eq!(nrsurface(&["--help"]).status.code(), Some(0));
    assert_eq!(nrsurface(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(
        nrsurface(&["sync-sweep", "--snr", "5:0:1"]).status.code(),
        Some(1)
    );
    assert_eq!(
        nrsurface(&["emulate", "--info", "32"]).status.code(),
        Some(1)
    );
    assert_eq!(
        nrsurface(&["power", "--capacity-wh", "0"]).status.code(),
        Some(1)
    );

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "version = 1\nunknown_key = 3\n").unwrap();
    assert_eq!(
        nrsurface(&["scenario", "--config", bad.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        nrsurface(&["scenario", "--config", "/nonexistent/x.toml"])
            .status
            .code(),
        Some(2)
    );
    let unwritable = dir.path().join("missing-dir").join("out.csv");
    assert_eq!(
        nrsurface(&["power", "--out", unwritable.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}
