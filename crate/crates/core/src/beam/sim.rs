use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::frontend::{BandpassFilter, FilterSpec};
use crate::link::{ber_sweep, InfoEncoding, LinkCondition, ReconfigInfo, INFO_BITS};
use crate::power::{PowerState, PowerTimeline, Segment};
use crate::sync::{run_sync_trial, trial_seed, SyncConfig, SyncError, TimingBudget};
use crate::waveform::DEFAULT_SAMPLE_RATE_HZ;

use super::{
    build_site_beams, duty_cycle_timeline, schedule_multi, ue_snr, BeamError, BeamSchedule,
    Environment, LinkBudget, PeriodLayout, ScheduleTable, SiteBeams, SurfaceSite, Ue,
};

pub const SCENARIO_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Protocol {
    /// NBPU link SNR; decode failures are drawn at the frame error rate
    /// measured there. `None` delivers every NBPU.
    pub nbpu_snr_db: Option<f64>,
    pub ber_symbols: usize,
    /// (period, surface) pairs whose NBPU is lost.
    pub missed_nbpu: Vec<(usize, usize)>,
    /// Envelope SNR for each surface's sync bootstrap; `None` is perfect sync.
    pub sync_snr_db: Option<f64>,
    /// Surface far from the BS: adds the propagation penalty to the budget.
    pub non_colocated: bool,
}

impl Default for Protocol {
    fn default() -> Self {
        Self {
            nbpu_snr_db: None,
            ber_symbols: 20_000,
            missed_nbpu: Vec::new(),
            sync_snr_db: None,
            non_colocated: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub version: u32,
    #[serde(default)]
    pub seed: u64,
    pub periods: usize,
    #[serde(default)]
    pub layout: PeriodLayout,
    #[serde(default)]
    pub protocol: Protocol,
    pub env: Environment,
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self, BeamError> {
        let s: Self = toml::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), BeamError> {
        if self.version != SCENARIO_VERSION {
            return Err(BeamError::Config(format!(
                "unsupported scenario version {}",
                self.version
            )));
        }
        if self.periods == 0 {
            return Err(BeamError::Config("periods must be positive".into()));
        }
        self.layout.validate()?;
        self.env.validate()?;
        if self.env.surfaces.len() > super::SURFACE_STRIDE {
            return Err(BeamError::Config("at most 8 surfaces".into()));
        }
        for s in &self.env.surfaces {
            if s.codebook.len() > self.layout.surface_ssb_count {
                return Err(BeamError::Config(format!(
                    "surface {}: codebook exceeds surface_ssb_count",
                    s.id
                )));
            }
            if !s.mirror {
                self.layout.surface_ssbs(s.id, s.codebook.len())?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Sync,
    SyncFail,
    Sweep,
    Report,
    NbpuDecode,
    NbpuMiss,
    Reconfig,
}

/// One event-log row. `beam` on NBPU rows is the five-bit info value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Event {
    pub t: f64,
    pub event: EventKind,
    pub surface: Option<usize>,
    pub beam: Option<u16>,
    pub ue: Option<usize>,
    pub snr_db: Option<f64>,
}

/// Served SNR of one UE at the start of its data slot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub period: usize,
    pub t: f64,
    pub surface: usize,
    pub ue: usize,
    pub beam: u16,
    pub snr_db: f64,
    pub optimum_db: f64,
    /// Sweep period whose report chose this beam.
    pub source_period: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub events: Vec<Event>,
    pub traces: Vec<TraceRow>,
    /// Per-surface |sync error|; `None` if bootstrap failed.
    pub sync_errors_s: Vec<Option<f64>>,
    /// Smallest CP − sync error − latency over executed reconfigurations.
    pub min_cp_margin_s: Option<f64>,
    pub cp_violations: usize,
    pub nbpu_frame_error_rate: f64,
    /// Per-surface controller timeline over the whole run.
    pub timelines: Vec<PowerTimeline>,
}

#[derive(Debug, Clone)]
struct Applied {
    schedule: BeamSchedule,
    origin: Vec<Option<usize>>,
}

fn table_for(site: &SurfaceSite, ues: usize) -> Result<Option<ScheduleTable>, BeamError> {
    if ues <= 1 {
        return Ok(None);
    }
    let t = match &site.schedule_table {
        Some(rows) => ScheduleTable::new(rows.clone())?,
        None => ScheduleTable::cartesian(site.codebook.len(), ues)?,
    };
    if t.rows[0].len() != ues
        || t.rows
            .iter()
            .flatten()
            .any(|&b| b as usize >= site.codebook.len())
    {
        return Err(BeamError::Config(format!(
            "surface {}: schedule table does not fit its UEs",
            site.id
        )));
    }
    Ok(Some(t))
}

fn best_beam(env: &Environment, beams: &SiteBeams, ue: &Ue, t: f64) -> (u16, f64) {
    let mut best = (0u16, f64::NEG_INFINITY);
    for (j, w) in beams.words.iter().enumerate() {
        let snr = ue_snr(env, beams, ue, w, t);
        if snr > best.1 {
            best = (j as u16, snr);
        }
    }
    best
}

/// Runs the beam-management loop for `sc.periods` periods.
pub fn simulate(sc: &Scenario) -> Result<ScenarioResult, BeamError> {
    sc.validate()?;
    let (env, l, proto) = (&sc.env, &sc.layout, &sc.protocol);
    let beams = build_site_beams(env)?;
    let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
    let ns = env.surfaces.len();
    let served: Vec<Vec<usize>> = (0..ns)
        .map(|s| {
            env.ues
                .iter()
                .filter(|u| u.surface == s)
                .map(|u| u.id)
                .collect()
        })
        .collect();
    let tables = env
        .surfaces
        .iter()
        .map(|site| {
            if site.mirror {
                Ok(None)
            } else {
                table_for(site, served[site.id].len())
            }
        })
        .collect::<Result<Vec<_>, _>>()?;

    let fer = match proto.nbpu_snr_db {
        Some(snr) => {
            let ber = ber_sweep(&[LinkCondition::snr(snr)], proto.ber_symbols, sc.seed)?[0].ber;
            1.0 - (1.0 - ber).powi(INFO_BITS as i32)
        }
        None => 0.0,
    };

    let mut events = Vec::new();
    let sync_errors_s: Vec<Option<f64>> = match proto.sync_snr_db {
        Some(snr) => {
            let filter =
                BandpassFilter::design(DEFAULT_SAMPLE_RATE_HZ * 4.0, FilterSpec::default())
                    .map_err(SyncError::from)?;
            let cfg = SyncConfig::default();
            (0..ns)
                .map(|s| run_sync_trial(snr, &cfg, &filter, trial_seed(sc.seed, 1, s)))
                .collect()
        }
        None => vec![Some(0.0); ns],
    };
    for (s, e) in sync_errors_s.iter().enumerate() {
        if !env.surfaces[s].mirror {
            let kind = if e.is_some() {
                EventKind::Sync
            } else {
                EventKind::SyncFail
            };
            events.push(Event {
                t: 0.0,
                event: kind,
                surface: Some(s),
                beam: None,
                ue: None,
                snr_db: None,
            });
        }
    }
    let live = |s: usize| !env.surfaces[s].mirror && sync_errors_s[s].is_some();

    let budget = TimingBudget::default();
    let penalty = if proto.non_colocated {
        budget.noncolocated_penalty_ns * 1e-9
    } else {
        0.0
    };
    let mut min_margin: Option<f64> = None;
    let mut cp_violations = 0;
    let mut check_cp = |s: usize, t_rel: f64| {
        let m = l.cp_mode.cp_at(t_rel)
            - sync_errors_s[s].unwrap_or(0.0)
            - budget.reconfig_latency_ns * 1e-9
            - penalty;
        min_margin = Some(min_margin.map_or(m, |x: f64| x.min(m)));
        if m <= 0.0 {
            cp_violations += 1;
        }
    };

    let mut current: Vec<Applied> = (0..ns)
        .map(|s| {
            let ues: Vec<(usize, u16)> = served[s].iter().map(|&u| (u, 0)).collect();
            Applied {
                schedule: schedule_multi(s, &ues, l),
                origin: vec![None; ues.len()],
            }
        })
        .collect();
    let mut next: Vec<Option<Applied>> = vec![None; ns];
    // Latest report per UE that has reached the BS: (beam, sweep period).
    let mut known: Vec<Option<(u16, usize)>> = vec![None; env.ues.len()];
    // In-flight reports: (arrival, ue, beam, sweep period).
    let mut pending: Vec<(f64, usize, u16, usize)> = Vec::new();
    let mut traces = Vec::new();
    let mut timelines: Vec<PowerTimeline> = (0..ns)
        .map(|_| PowerTimeline {
            period_s: l.period_s,
            segments: Vec::new(),
        })
        .collect();

    for m in 0..sc.periods {
        let t0 = m as f64 * l.period_s;
        for s in 0..ns {
            if let Some(a) = next[s].take() {
                current[s] = a;
            }
        }

        // SSB sweep: each live surface cycles its codewords at its SSBs.
        for s in (0..ns).filter(|&s| live(s)) {
            let site = &env.surfaces[s];
            let mut best: Vec<(u16, f64)> = vec![(0, f64::NEG_INFINITY); served[s].len()];
            for (j, k) in l
                .surface_ssbs(s, site.codebook.len())?
                .into_iter()
                .enumerate()
            {
                let t_rel = l.ssb_time(k);
                check_cp(s, t_rel);
                let t = t0 + t_rel;
                events.push(Event {
                    t,
                    event: EventKind::Sweep,
                    surface: Some(s),
                    beam: Some(j as u16),
                    ue: None,
                    snr_db: None,
                });
                for (i, &u) in served[s].iter().enumerate() {
                    let snr = ue_snr(env, &beams[s], &env.ues[u], &beams[s].words[j], t);
                    if snr > best[i].1 {
                        best[i] = (j as u16, snr);
                    }
                }
            }
            for (i, &u) in served[s].iter().enumerate() {
                let delay = rng.random_range(l.report_delay_min_s..=l.report_delay_max_s);
                let t = t0 + l.sweep_window_s + delay;
                pending.push((t, u, best[i].0, m));
                events.push(Event {
                    t,
                    event: EventKind::Report,
                    surface: Some(s),
                    beam: Some(best[i].0),
                    ue: Some(u),
                    snr_db: Some(best[i].1),
                });
            }
        }

        // Data window under the schedule in force.
        for s in 0..ns {
            let a = &current[s];
            for (i, e) in a.schedule.entries.iter().enumerate() {
                let t = t0 + e.t_s;
                let Some(u) = e.ue else { continue };
                let ue = &env.ues[u];
                let snr = ue_snr(env, &beams[s], ue, &beams[s].words[e.beam as usize], t);
                if live(s) {
                    check_cp(s, e.t_s);
                    events.push(Event {
                        t,
                        event: EventKind::Reconfig,
                        surface: Some(s),
                        beam: Some(e.beam),
                        ue: Some(u),
                        snr_db: Some(snr),
                    });
                }
                traces.push(TraceRow {
                    period: m,
                    t,
                    surface: s,
                    ue: u,
                    beam: e.beam,
                    snr_db: snr,
                    optimum_db: best_beam(env, &beams[s], ue, t).1,
                    source_period: a.origin[i],
                });
            }
        }

        // NBPUs configure the next period from reports that have arrived.
        for s in (0..ns).filter(|&s| live(s)) {
            let t = t0 + l.nbpu_time(s);
            pending.retain(|&(arr, u, b, src)| {
                if arr <= t && env.ues[u].surface == s {
                    if known[u].is_none_or(|(_, p)| p <= src) {
                        known[u] = Some((b, src));
                    }
                    false
                } else {
                    true
                }
            });
            if served[s].iter().all(|&u| known[u].is_none()) {
                continue;
            }
            let wanted: Vec<u16> = served[s]
                .iter()
                .map(|&u| known[u].map_or(0, |k| k.0))
                .collect();
            let plan = schedule_multi(
                s,
                &served[s]
                    .iter()
                    .copied()
                    .zip(wanted.iter().copied())
                    .collect::<Vec<_>>(),
                l,
            );
            let info = ReconfigInfo {
                surface_id: s as u8,
                entries: plan.entries.iter().map(|e| (e.t_s, e.beam)).collect(),
            };
            let value = match &tables[s] {
                Some(tab) => {
                    info.encode(InfoEncoding::ScheduleIndex, Some(tab.closest(&wanted)))?
                }
                None => info.encode(InfoEncoding::BeamId, None)?,
            };
            let lost =
                proto.missed_nbpu.contains(&(m, s)) || (fer > 0.0 && rng.random::<f64>() < fer);
            let kind = if lost {
                EventKind::NbpuMiss
            } else {
                EventKind::NbpuDecode
            };
            events.push(Event {
                t,
                event: kind,
                surface: Some(s),
                beam: Some(u16::from(value)),
                ue: None,
                snr_db: None,
            });
            if lost {
                continue;
            }
            let decoded: Vec<u16> = match &tables[s] {
                Some(tab) => tab.rows[value as usize].clone(),
                None => vec![u16::from(value)],
            };
            let pairs: Vec<(usize, u16)> = served[s].iter().copied().zip(decoded).collect();
            next[s] = Some(Applied {
                schedule: schedule_multi(s, &pairs, l),
                origin: served[s].iter().map(|&u| known[u].map(|k| k.1)).collect(),
            });
        }

        for s in 0..ns {
            if live(s) {
                let tl = duty_cycle_timeline(
                    l,
                    s,
                    env.surfaces[s].codebook.len(),
                    &current[s].schedule,
                )?;
                timelines[s].segments.extend(tl.segments);
            } else {
                timelines[s].segments.push(Segment {
                    state: PowerState::Idle,
                    duration_s: l.period_s,
                    wake: false,
                });
            }
        }
    }

    events.sort_by(|a, b| a.t.total_cmp(&b.t));
    Ok(ScenarioResult {
        events,
        traces,
        sync_errors_s,
        min_cp_margin_s: min_margin,
        cp_violations,
        nbpu_frame_error_rate: fer,
        timelines,
    })
}

/// One grid point of the around-the-corner comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CornerPoint {
    pub x: f64,
    pub y: f64,
    pub bearing_deg: f64,
    pub best_beam: u16,
    pub best_db: f64,
    pub mirror_db: f64,
    pub gain_db: f64,
}

/// Best codeword against a metal plate for UEs around a corner: surface at
/// the origin facing +y, BS at (0, 13), UEs on the integer grid x ∈ 2..=6,
/// y ∈ 1..=4, keeping bearings within ±70°.
pub fn corner_gain_grid(columns: usize, codebook: &[f64]) -> Result<Vec<CornerPoint>, BeamError> {
    let site = |id: usize, mirror: bool| SurfaceSite {
        id,
        position: [0.0, 0.0],
        normal_deg: 90.0,
        columns,
        rows: columns,
        codebook: if mirror {
            Vec::new()
        } else {
            codebook.to_vec()
        },
        mirror,
        schedule_table: None,
    };
    let mut env = Environment {
        bs: [0.0, 13.0],
        budget: LinkBudget::default(),
        surfaces: vec![site(0, false), site(1, true)],
        ues: Vec::new(),
        blockages: Vec::new(),
    };
    let beams = build_site_beams(&env)?;
    let mut out = Vec::new();
    for x in 2..=6 {
        for y in 1..=4 {
            let p = [x as f64, y as f64];
            let bearing = env.ue_bearing_deg(&env.surfaces[0], p);
            if bearing.abs() > 70.0 {
                continue;
            }
            let ue = Ue {
                id: 0,
                surface: 0,
                waypoints: vec![p],
                speed_mps: 0.0,
                antennas: vec![[0.0, 0.0]],
            };
            env.ues = vec![ue.clone()];
            let (b, best) = best_beam(&env, &beams[0], &ue, 0.0);
            let mirror = ue_snr(
                &env,
                &beams[1],
                &Ue { surface: 1, ..ue },
                &beams[1].words[0],
                0.0,
            );
            out.push(CornerPoint {
                x: p[0],
                y: p[1],
                bearing_deg: bearing,
                best_beam: b,
                best_db: best,
                mirror_db: mirror,
                gain_db: best - mirror,
            });
        }
    }
    Ok(out)
}
