use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::Args;
use serde::Serialize;

use nrsurface::acceptance::run_all;
use nrsurface::beam::{default_timeline, simulate, Scenario};
use nrsurface::emulation::{build_affine_model, solve_payload, PhaseTargets, PipelineConfig};
use nrsurface::frontend::{write_envelope_csv, ReceiverChain};
use nrsurface::link::{ber_sweep as run_ber_sweep, LinkCondition, NbpuFrame};
use nrsurface::power::{
    average_power, battery_life_years, breakdown, PowerTable, PowerTimeline, AA_CAPACITY_WH,
};
use nrsurface::surface::{
    angle_grid, array_factor, build_codebook, codebook_3d, steer_codebook, SurfaceConfig,
};
use nrsurface::sync::{sync_sweep as run_sync_sweep, SyncConfig};
use nrsurface::waveform::io::write_iq_f32le;
use nrsurface::waveform::{modulate_subframe, ModulatorConfig, NrsPattern};

use crate::range::parse_values;
use crate::{invalid, io_failure, Outcome};

#[derive(Debug, Args)]
pub struct Output {
    /// CSV destination; stdout when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

fn create(path: &Path) -> Result<Box<dyn Write>, crate::Failure> {
    let f = File::create(path)
        .with_context(|| format!("cannot create {}", path.display()))
        .map_err(io_failure)?;
    Ok(Box::new(BufWriter::new(f)))
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>, crate::Failure> {
    match out {
        Some(p) => create(p),
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

fn write_rows<T: Serialize>(out: &Option<PathBuf>, rows: impl IntoIterator<Item = T>) -> Outcome {
    let mut w = csv::Writer::from_writer(sink(out)?);
    for r in rows {
        w.serialize(r).map_err(io_failure)?;
    }
    w.flush().map_err(io_failure)
}

/// Parsed `--snr`-style list; a newtype so clap does not treat it as a
/// repeated argument.
#[derive(Debug, Clone)]
pub struct Values(pub Vec<f64>);

fn values(s: &str) -> Result<Values, String> {
    parse_values(s).map(Values)
}

fn bit_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

#[derive(Debug, Args)]
#[command(
    about = "Solve for the payload whose NB-IoT encoding emulates an NBPU",
    after_help = "CSV columns: symbol,subcarrier,target_deg,realised_deg (one row per NBPU resource element).\n\
                  The payload is printed as hex on stderr."
)]
pub struct EmulateArgs {
    /// 5-bit NBPU info value.
    #[arg(long, default_value_t = 0)]
    info: u8,
    #[command(flatten)]
    output: Output,
}

#[derive(Serialize)]
struct EmulateRow {
    symbol: usize,
    subcarrier: usize,
    target_deg: f64,
    realised_deg: f64,
}

pub fn emulate(a: EmulateArgs) -> Outcome {
    let frame = NbpuFrame::new(a.info).map_err(invalid)?;
    let model = build_affine_model(&PipelineConfig::default()).map_err(invalid)?;
    let targets = frame.targets();
    let payload = solve_payload(&targets, &model).map_err(invalid)?;
    let realised = PhaseTargets::from_bits(
        &model,
        &model.encode_constrained(&payload).map_err(invalid)?,
    );
    eprintln!("payload ({} bits): {}", payload.len(), payload.to_hex());
    let rows = targets.entries.iter().map(|&(s, c, q)| {
        let r = realised
            .entries
            .iter()
            .find(|e| e.0 == s && e.1 == c)
            .map_or(f64::NAN, |e| e.2.radians());
        EmulateRow {
            symbol: s,
            subcarrier: c,
            target_deg: q.radians().to_degrees(),
            realised_deg: r.to_degrees(),
        }
    });
    write_rows(&a.output.out, rows)
}

#[derive(Debug, Args)]
#[command(
    about = "Synthesize an NBPU subframe and its detected envelope",
    after_help = "CSV columns: t,value (envelope after the band-pass filter and square-law detector).\n\
                  --iq-out writes the baseband subframe as interleaved little-endian f32 I/Q."
)]
pub struct WaveformArgs {
    #[arg(long, default_value_t = 0)]
    info: u8,
    /// Oversampling over the 3.84 MHz (256-point FFT) rate.
    #[arg(long, default_value_t = 4)]
    oversample: usize,
    /// Use the payload-emulated grid (NRS and all) instead of the ideal one.
    #[arg(long)]
    emulated: bool,
    #[arg(long)]
    iq_out: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

pub fn waveform(a: WaveformArgs) -> Outcome {
    if a.oversample == 0 {
        return Err(invalid(anyhow!("--oversample must be at least 1")));
    }
    let frame = NbpuFrame::new(a.info).map_err(invalid)?;
    let grid = if a.emulated {
        let model = build_affine_model(&PipelineConfig::default()).map_err(invalid)?;
        frame.emulated_grid(&model)
    } else {
        frame.ideal_grid(NrsPattern::default())
    }
    .map_err(invalid)?;
    let cfg = ModulatorConfig::oversampled(a.oversample);
    let sig = modulate_subframe(&grid, &cfg, 0.0).map_err(invalid)?;
    if let Some(p) = &a.iq_out {
        write_iq_f32le(create(p)?, &sig).map_err(io_failure)?;
    }
    let env = ReceiverChain::new(sig.sample_rate)
        .map_err(invalid)?
        .process(&sig)
        .map_err(invalid)?;
    let mut w = sink(&a.output.out)?;
    write_envelope_csv(&mut w, &env).map_err(io_failure)?;
    w.flush().map_err(io_failure)?;
    eprintln!(
        "{} samples at {:.3} MHz",
        sig.samples.len(),
        sig.sample_rate / 1e6
    );
    Ok(())
}

#[derive(Debug, Args)]
#[command(
    about = "Monte-Carlo synchronization error versus SNR",
    after_help = "CSV columns: snr_db,trials,missed,mean_error_ns,p95_error_ns,max_error_ns.\n\
                  Missed bootstraps count as half a symbol of error."
)]
pub struct SyncSweepArgs {
    /// start:stop:step or a comma list, dB.
    #[arg(long, default_value = "-5:15:5", value_parser = values, allow_hyphen_values = true)]
    snr: Values,
    #[arg(long, default_value_t = 400)]
    trials: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Serialize)]
struct SyncRow {
    snr_db: f64,
    trials: usize,
    missed: usize,
    mean_error_ns: f64,
    p95_error_ns: f64,
    max_error_ns: f64,
}

pub fn sync_sweep(a: SyncSweepArgs, seed: u64) -> Outcome {
    if a.trials == 0 {
        return Err(invalid(anyhow!("--trials must be positive")));
    }
    let pts = run_sync_sweep(&a.snr.0, a.trials, seed, &SyncConfig::default()).map_err(invalid)?;
    write_rows(
        &a.output.out,
        pts.into_iter().map(|p| SyncRow {
            snr_db: p.snr_db,
            trials: p.trials,
            missed: p.missed,
            mean_error_ns: p.mean_error_ns,
            p95_error_ns: p.p95_error_ns,
            max_error_ns: p.max_error_ns,
        }),
    )
}

#[derive(Debug, Args)]
#[command(
    about = "Monte-Carlo OOK bit error rate of the NBPU link",
    after_help = "CSV columns: snr_db,sinr_db,effective_db,symbols,errors,ber.\n\
                  sinr_db is empty without --sinr; effective_db folds the interferer in at its unfiltered power."
)]
pub struct BerSweepArgs {
    /// In-band SNR values, dB.
    #[arg(long, default_value = "0:14:2", value_parser = values, allow_hyphen_values = true)]
    snr: Values,
    #[arg(long, default_value_t = 200_000)]
    symbols: usize,
    /// Add the NR guard-band interferer at this SINR, dB.
    #[arg(long, allow_hyphen_values = true)]
    sinr: Option<f64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Serialize)]
struct BerRow {
    snr_db: f64,
    sinr_db: Option<f64>,
    effective_db: f64,
    symbols: usize,
    errors: usize,
    ber: f64,
}

pub fn ber_sweep(a: BerSweepArgs, seed: u64) -> Outcome {
    if a.symbols == 0 {
        return Err(invalid(anyhow!("--symbols must be positive")));
    }
    let conds: Vec<LinkCondition> = a
        .snr
        .0
        .iter()
        .map(|&s| match a.sinr {
            Some(i) => LinkCondition::nr_interference(s, i),
            None => LinkCondition::snr(s),
        })
        .collect();
    let pts = run_ber_sweep(&conds, a.symbols, seed).map_err(invalid)?;
    write_rows(
        &a.output.out,
        pts.into_iter().zip(&conds).map(|(p, c)| BerRow {
            snr_db: p.snr_db,
            sinr_db: a.sinr,
            effective_db: c.effective_db(),
            symbols: p.symbols,
            errors: p.errors,
            ber: p.ber,
        }),
    )
}

#[derive(Debug, Args)]
pub struct SurfaceArgs {
    #[arg(long, default_value_t = 16)]
    columns: usize,
    #[arg(long, default_value_t = 16)]
    rows: usize,
    /// Incidence angle from broadside, degrees.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    incident: f64,
}

impl SurfaceArgs {
    fn config(&self) -> SurfaceConfig {
        SurfaceConfig {
            incident_deg: self.incident,
            ..SurfaceConfig::half_wave(self.columns, self.rows)
        }
    }
}

#[derive(Debug, Args)]
#[command(
    about = "Far-field pattern of the 1-bit codeword steering to a target",
    after_help = "CSV columns: angle_deg,gain_db (array-factor gain over -90..90 degrees).\n\
                  The main lobe and half-power beamwidth go to stderr."
)]
pub struct BeamPatternArgs {
    #[command(flatten)]
    surface: SurfaceArgs,
    #[arg(long, default_value_t = 30.0, allow_hyphen_values = true)]
    target: f64,
    #[arg(long, default_value_t = 0.1)]
    step: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Serialize)]
struct PatternRow {
    angle_deg: f64,
    gain_db: f64,
}

pub fn beam_pattern(a: BeamPatternArgs) -> Outcome {
    if a.step.is_nan() || a.step <= 0.0 {
        return Err(invalid(anyhow!("--step must be positive")));
    }
    let cfg = a.surface.config();
    let word = steer_codebook(a.target, &cfg).map_err(invalid)?;
    let p = array_factor(&cfg, &word.bits, &angle_grid(-90.0, 90.0, a.step)).map_err(invalid)?;
    eprintln!(
        "bits {}  main lobe {:.2}°  HPBW {}",
        bit_string(&word.bits),
        word.main_lobe_deg,
        word.hpbw_deg.map_or("n/a".into(), |h| format!("{h:.2}°"))
    );
    write_rows(
        &a.output.out,
        p.angles_deg
            .iter()
            .zip(&p.gain_db)
            .map(|(&angle_deg, &gain_db)| PatternRow { angle_deg, gain_db }),
    )
}

#[derive(Debug, Args)]
#[command(
    about = "1-bit steering codebook over a list of targets",
    after_help = "CSV columns (1-D): target_deg,commanded_deg,offset_rad,main_lobe_deg,peak_db,hpbw_deg,bits.\n\
                  CSV columns (with --el): az_deg,el_deg,lobe_az_deg,lobe_el_deg,gain_db,bits; \
                  bits lists rows separated by '/'."
)]
pub struct CodebookArgs {
    #[command(flatten)]
    surface: SurfaceArgs,
    /// Azimuth targets, degrees.
    #[arg(long, default_value = "10:70:10", value_parser = values, allow_hyphen_values = true)]
    targets: Values,
    /// Elevation targets; switches to planar (row × column) codewords.
    #[arg(long, value_parser = values, allow_hyphen_values = true)]
    el: Option<Values>,
    #[command(flatten)]
    output: Output,
}

#[derive(Serialize)]
struct CodewordRow {
    target_deg: f64,
    commanded_deg: f64,
    offset_rad: f64,
    main_lobe_deg: f64,
    peak_db: f64,
    hpbw_deg: Option<f64>,
    bits: String,
}

#[derive(Serialize)]
struct Codeword3dRow {
    az_deg: f64,
    el_deg: f64,
    lobe_az_deg: f64,
    lobe_el_deg: f64,
    gain_db: f64,
    bits: String,
}

pub fn codebook(a: CodebookArgs) -> Outcome {
    let cfg = a.surface.config();
    match &a.el {
        None => {
            let words = build_codebook(&a.targets.0, &cfg).map_err(invalid)?;
            write_rows(
                &a.output.out,
                words.into_iter().map(|w| CodewordRow {
                    target_deg: w.target_deg,
                    commanded_deg: w.commanded_deg,
                    offset_rad: w.offset_rad,
                    main_lobe_deg: w.main_lobe_deg,
                    peak_db: w.peak_db,
                    hpbw_deg: w.hpbw_deg,
                    bits: bit_string(&w.bits),
                }),
            )
        }
        Some(els) => {
            let mut rows = Vec::new();
            for &el in &els.0 {
                for &az in &a.targets.0 {
                    let w = codebook_3d(az, el, &cfg).map_err(invalid)?;
                    rows.push(Codeword3dRow {
                        az_deg: az,
                        el_deg: el,
                        lobe_az_deg: w.lobe.az_deg,
                        lobe_el_deg: w.lobe.el_deg,
                        gain_db: w.lobe.gain_db,
                        bits: w
                            .bits
                            .iter()
                            .map(|r| bit_string(r))
                            .collect::<Vec<_>>()
                            .join("/"),
                    });
                }
            }
            write_rows(&a.output.out, rows)
        }
    }
}

#[derive(Debug, Args)]
#[command(
    about = "Run a beam-management scenario",
    after_help = "Event CSV columns: t,event,surface,beam,ue,snr_db (empty where not applicable).\n\
                  Events: sync, sync_fail, sweep, report, nbpu_decode, nbpu_miss, reconfig.\n\
                  Trace CSV columns: period,t,surface,ue,beam,snr_db,optimum_db,source_period.\n\
                  --seed overrides the seed in the scenario file."
)]
pub struct ScenarioArgs {
    /// Scenario TOML.
    #[arg(long)]
    config: PathBuf,
    /// Per-period SNR trace CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

fn load_scenario(path: &Path, seed: Option<u64>) -> Result<Scenario, crate::Failure> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(io_failure)?;
    let mut sc = Scenario::from_toml(&text)
        .with_context(|| format!("in {}", path.display()))
        .map_err(invalid)?;
    if let Some(s) = seed {
        sc.seed = s;
    }
    Ok(sc)
}

pub fn scenario(a: ScenarioArgs, seed: Option<u64>) -> Outcome {
    let sc = load_scenario(&a.config, seed)?;
    let r = simulate(&sc).map_err(invalid)?;
    write_rows(&a.output.out, &r.events)?;
    if let Some(p) = &a.trace {
        write_rows(&Some(p.clone()), &r.traces)?;
    }
    eprintln!(
        "{} periods, {} events, {} CP violations, NBPU frame error rate {:.2e}",
        sc.periods,
        r.events.len(),
        r.cp_violations,
        r.nbpu_frame_error_rate
    );
    Ok(())
}

#[derive(Debug, Args)]
#[command(
    about = "Surface controller power budget",
    after_help = "CSV columns: state,duration_ms,energy_uj,avg_uw (duration and energy per schedule period).\n\
                  Total average power and battery life go to stderr."
)]
pub struct PowerArgs {
    /// Take the duty cycle from a scenario run instead of the default schedule.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long, default_value_t = AA_CAPACITY_WH)]
    capacity_wh: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Serialize)]
struct PowerRow {
    state: &'static str,
    duration_ms: f64,
    energy_uj: f64,
    avg_uw: f64,
}

pub fn power(a: PowerArgs, seed: Option<u64>) -> Outcome {
    let timeline = match &a.scenario {
        None => default_timeline(),
        Some(p) => {
            let r = simulate(&load_scenario(p, seed)?).map_err(invalid)?;
            let period_s = r
                .timelines
                .first()
                .map(|t| t.period_s)
                .ok_or_else(|| invalid(anyhow!("no periods")))?;
            PowerTimeline {
                period_s,
                segments: r.timelines.into_iter().flat_map(|t| t.segments).collect(),
            }
        }
    };
    let table = PowerTable::default();
    let periods = (timeline.duration() / timeline.period_s).round();
    let rows = breakdown(&timeline, &table).map_err(invalid)?;
    let avg = average_power(&timeline, &table).map_err(invalid)?;
    let years = battery_life_years(avg, a.capacity_wh).map_err(invalid)?;
    write_rows(
        &a.output.out,
        rows.into_iter().map(|r| PowerRow {
            state: r.state.label(),
            duration_ms: r.duration_s / periods * 1e3,
            energy_uj: r.energy_j / periods * 1e6,
            avg_uw: r.avg_w * 1e6,
        }),
    )?;
    eprintln!(
        "average {:.2} µW over {periods} period(s) of {} ms; {:.2} years on {} Wh",
        avg * 1e6,
        timeline.period_s * 1e3,
        years,
        a.capacity_wh
    );
    Ok(())
}

#[derive(Debug, Args)]
#[command(about = "Run the acceptance checks; exits 1 if any fails")]
pub struct SelftestArgs {}

pub fn selftest(seed: u64) -> Outcome {
    let verdicts = run_all(seed);
    for v in &verdicts {
        println!("{v}");
    }
    let failed = verdicts.iter().filter(|v| !v.passed).count();
    if failed > 0 {
        return Err(invalid(anyhow!("{failed} check(s) failed")));
    }
    Ok(())
}
