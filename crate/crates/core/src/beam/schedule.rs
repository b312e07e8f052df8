use serde::Serialize;

use crate::power::{PowerState, PowerTimeline, Segment};

use super::{BeamError, CpMode, PeriodLayout};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScheduleEntry {
    /// Period-relative reconfiguration instant.
    pub t_s: f64,
    pub surface: usize,
    pub beam: u16,
    pub ue: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeamSchedule {
    pub cp_mode: CpMode,
    pub entries: Vec<ScheduleEntry>,
}

impl BeamSchedule {
    pub fn validate(&self) -> Result<(), BeamError> {
        if let Some(e) = self
            .entries
            .iter()
            .find(|e| !self.cp_mode.is_boundary(e.t_s))
        {
            return Err(BeamError::Config(format!(
                "entry at {} s is not on a CP boundary",
                e.t_s
            )));
        }
        if self.entries.windows(2).any(|w| w[1].t_s <= w[0].t_s) {
            return Err(BeamError::Config(
                "schedule times must strictly increase".into(),
            ));
        }
        Ok(())
    }

    /// Beam in force at period-relative time `t`, if any entry precedes it.
    pub fn beam_at(&self, t: f64) -> Option<u16> {
        self.entries
            .iter()
            .take_while(|e| e.t_s <= t + 1e-12)
            .last()
            .map(|e| e.beam)
    }
}

/// Equal split of the data window among the UEs of one surface, in the
/// given order; each boundary snaps to the next CP start.
pub fn schedule_multi(
    surface: usize,
    beams: &[(usize, u16)],
    layout: &PeriodLayout,
) -> BeamSchedule {
    let n = beams.len().max(1) as f64;
    let entries = beams
        .iter()
        .enumerate()
        .map(|(i, &(ue, beam))| ScheduleEntry {
            t_s: layout
                .cp_mode
                .align(layout.sweep_window_s + i as f64 * layout.data_window_s() / n),
            surface,
            beam,
            ue: Some(ue),
        })
        .collect();
    BeamSchedule {
        cp_mode: layout.cp_mode,
        entries,
    }
}

/// Pre-shared table of per-UE beam tuples addressed by the five info bits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleTable {
    pub rows: Vec<Vec<u16>>,
}

impl ScheduleTable {
    pub const MAX_ROWS: usize = 32;

    pub fn new(rows: Vec<Vec<u16>>) -> Result<Self, BeamError> {
        if rows.is_empty() || rows.len() > Self::MAX_ROWS {
            return Err(BeamError::Config(format!(
                "schedule table needs 1..=32 rows, got {}",
                rows.len()
            )));
        }
        if rows.iter().any(|r| r.len() != rows[0].len()) {
            return Err(BeamError::Config(
                "schedule table rows differ in length".into(),
            ));
        }
        Ok(Self { rows })
    }

    /// Every combination of `codewords` beams over `ues` UEs, first UE
    /// slowest; fails past 32 rows.
    pub fn cartesian(codewords: usize, ues: usize) -> Result<Self, BeamError> {
        let n = (codewords as u64)
            .checked_pow(ues as u32)
            .unwrap_or(u64::MAX);
        if n > Self::MAX_ROWS as u64 {
            return Err(BeamError::Config(format!(
                "{codewords} codewords over {ues} UEs need {n} table rows; give an explicit table"
            )));
        }
        let rows = (0..n as usize)
            .map(|mut i| {
                let mut r = vec![0u16; ues];
                for slot in r.iter_mut().rev() {
                    *slot = (i % codewords) as u16;
                    i /= codewords;
                }
                r
            })
            .collect();
        Self::new(rows)
    }

    /// Row matching the most UE beams; the lowest index wins ties.
    pub fn closest(&self, beams: &[u16]) -> u8 {
        let score = |r: &Vec<u16>| r.iter().zip(beams).filter(|(a, b)| a == b).count();
        let mut best = 0;
        for (i, r) in self.rows.iter().enumerate() {
            if score(r) > score(&self.rows[best]) {
                best = i;
            }
        }
        best as u8
    }
}

/// Awake intervals of one surface's controller over a period: its NBPU
/// window, one burst per owned sweep SSB and one per schedule entry. Each
/// interval opens with the wake lead; idle fills the rest.
pub fn duty_cycle_timeline(
    layout: &PeriodLayout,
    surface: usize,
    sweep_beams: usize,
    schedule: &BeamSchedule,
) -> Result<PowerTimeline, BeamError> {
    layout.validate()?;
    let mut active: Vec<(f64, f64, PowerState)> = Vec::new();
    let burst = |t: f64| {
        (
            t - layout.wake_lead_s,
            t - layout.wake_lead_s + layout.reconfig_burst_s,
            PowerState::ReconfigActive,
        )
    };
    for k in layout.surface_ssbs(surface, sweep_beams)? {
        active.push(burst(layout.ssb_time(k)));
    }
    for e in &schedule.entries {
        active.push(burst(e.t_s));
    }
    let nbpu = layout.nbpu_time(surface);
    active.push((
        nbpu - layout.wake_lead_s,
        nbpu - layout.wake_lead_s + layout.nbpu_active_s,
        PowerState::NbpuActive,
    ));
    active.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut segments = Vec::new();
    let mut cursor = 0.0;
    for &(start, end, state) in &active {
        if start < cursor - 1e-12 {
            return Err(BeamError::Config(format!(
                "awake intervals overlap at {start} s"
            )));
        }
        if end > layout.period_s + 1e-12 {
            return Err(BeamError::Config(format!(
                "awake interval runs past the period at {end} s"
            )));
        }
        if start > cursor {
            segments.push(Segment {
                state: PowerState::Idle,
                duration_s: start - cursor,
                wake: false,
            });
        }
        let lead = layout.wake_lead_s.min(end - start);
        segments.push(Segment {
            state,
            duration_s: lead,
            wake: true,
        });
        segments.push(Segment {
            state,
            duration_s: end - start - lead,
            wake: false,
        });
        cursor = end;
    }
    if layout.period_s > cursor {
        segments.push(Segment {
            state: PowerState::Idle,
            duration_s: layout.period_s - cursor,
            wake: false,
        });
    }
    Ok(PowerTimeline {
        period_s: layout.period_s,
        segments,
    })
}

/// Single surface, eight-beam sweep and one UE served from 5 ms.
pub fn default_timeline() -> PowerTimeline {
    let layout = PeriodLayout::default();
    let schedule = schedule_multi(0, &[(0, 0)], &layout);
    duty_cycle_timeline(&layout, 0, layout.surface_ssb_count, &schedule)
        .expect("default layout is consistent")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::power::{average_power, reduction_ratio, PowerTable};

    #[test]
    fn two_ues_split_at_quarter_points() {
        let l = PeriodLayout::default();
        let s = schedule_multi(0, &[(0, 3), (1, 5)], &l);
        assert!((s.entries[0].t_s - 5e-3).abs() < 1e-15);
        assert!((s.entries[1].t_s - 12.5e-3).abs() < 1e-15);
        s.validate().unwrap();
        assert_eq!(s.beam_at(10e-3), Some(3));
        assert_eq!(s.beam_at(13e-3), Some(5));
        assert_eq!(s.beam_at(1e-3), None);
    }

    #[test]
    fn three_ues_snap_to_cp() {
        let l = PeriodLayout::default();
        let s = schedule_multi(1, &[(0, 0), (1, 1), (2, 2)], &l);
        s.validate().unwrap();
        assert!(s.entries[1].t_s >= 10e-3 && s.entries[1].t_s - 10e-3 < 10e-6);
        let h = schedule_multi(
            1,
            &[(0, 0), (1, 1), (2, 2)],
            &PeriodLayout {
                cp_mode: CpMode::HalfSubframe,
                ..l
            },
        );
        h.validate().unwrap();
    }

    #[test]
    fn cartesian_table() {
        let t = ScheduleTable::cartesian(5, 2).unwrap();
        assert_eq!(t.rows.len(), 25);
        assert_eq!(t.rows[7], vec![1, 2]);
        assert_eq!(t.closest(&[1, 2]), 7);
        assert!(ScheduleTable::cartesian(8, 2).is_err());
        assert_eq!(ScheduleTable::cartesian(32, 1).unwrap().rows.len(), 32);
    }

    #[test]
    fn default_timeline_shape() {
        let t = default_timeline();
        assert!((t.duration() - 0.02).abs() < 1e-12);
        assert_eq!(t.bursts(PowerState::ReconfigActive), 9);
        assert_eq!(t.bursts(PowerState::NbpuActive), 1);
        let idle = t.fraction(PowerState::Idle);
        assert!((idle - 0.9).abs() < 0.03, "{idle}");
        // Every awake interval starts with a full wake lead.
        for (i, s) in t.segments.iter().enumerate() {
            if s.state != PowerState::Idle && !s.wake {
                assert!(t.segments[i - 1].wake && t.segments[i - 1].duration_s >= 10e-6 - 1e-15);
            }
        }
    }

    #[test]
    fn default_budget() {
        let t = default_timeline();
        let table = PowerTable::default();
        let p = average_power(&t, &table).unwrap();
        assert!((p - 242.7e-6).abs() / 242.7e-6 < 0.01, "{p}");
        let rn = reduction_ratio(&t, &table, PowerState::NbpuActive).unwrap();
        let rr = reduction_ratio(&t, &table, PowerState::ReconfigActive).unwrap();
        assert!((rn / 20.4 - 1.0).abs() < 0.05, "{rn}");
        assert!((rr / 13.9 - 1.0).abs() < 0.05, "{rr}");
    }

    #[test]
    fn overlapping_bursts_rejected() {
        let l = PeriodLayout::default();
        let s = BeamSchedule {
            cp_mode: l.cp_mode,
            entries: vec![ScheduleEntry {
                t_s: l.ssb_time(0),
                surface: 0,
                beam: 0,
                ue: None,
            }],
        };
        assert!(duty_cycle_timeline(&l, 0, 8, &s).is_err());
    }
}
