//! State-based power accounting over the 20 ms beam-management period and
//! battery-life estimates.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PowerError {
    #[error("timeline covers {got} s, expected whole periods of {period} s")]
    PartialPeriod { got: f64, period: f64 },
    #[error("load power must be positive, got {0} W")]
    NonPositiveLoad(f64),
    #[error("battery capacity must be positive, got {0} Wh")]
    NonPositiveCapacity(f64),
}

pub const HOURS_PER_YEAR: f64 = 8766.0;
pub const AA_CAPACITY_WH: f64 = 4.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerState {
    NbpuActive,
    ReconfigActive,
    Idle,
}

impl PowerState {
    pub fn label(self) -> &'static str {
        match self {
            Self::NbpuActive => "nbpu_active",
            Self::ReconfigActive => "reconfig_active",
            Self::Idle => "idle",
        }
    }
}

/// Active-state power draws and their component breakdowns, watts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerTable {
    pub amplifier: f64,
    pub adc: f64,
    pub sync_timer: f64,
    pub sync_logic: f64,
    pub reconfig_active: f64,
    pub standby: f64,
    pub idle_timer: f64,
    /// Cell leakage for the whole surface.
    pub cell_leakage: f64,
}

impl Default for PowerTable {
    fn default() -> Self {
        Self {
            amplifier: 655e-6,
            adc: 294e-6,
            sync_timer: 111e-6,
            sync_logic: 1.36e-3,
            reconfig_active: 1.67e-3,
            standby: 5.9e-6,
            idle_timer: 0.5e-6,
            cell_leakage: 0.072e-6,
        }
    }
}

impl PowerTable {
    pub fn nbpu_active(&self) -> f64 {
        self.amplifier + self.adc + self.sync_timer + self.sync_logic
    }

    pub fn idle(&self) -> f64 {
        self.standby + self.idle_timer + self.cell_leakage
    }

    pub fn power(&self, s: PowerState) -> f64 {
        match s {
            PowerState::NbpuActive => self.nbpu_active(),
            PowerState::ReconfigActive => self.reconfig_active,
            PowerState::Idle => self.idle(),
        }
    }
}

/// A contiguous interval in one state. `wake` marks the MCU wake-up lead
/// before an active interval, charged at that interval's power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub state: PowerState,
    pub duration_s: f64,
    pub wake: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PowerTimeline {
    pub period_s: f64,
    pub segments: Vec<Segment>,
}

impl PowerTimeline {
    pub fn duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration_s).sum()
    }

    pub fn time_in(&self, state: PowerState) -> f64 {
        self.segments
            .iter()
            .filter(|s| s.state == state)
            .map(|s| s.duration_s)
            .sum()
    }

    pub fn fraction(&self, state: PowerState) -> f64 {
        self.time_in(state) / self.duration()
    }

    /// Active bursts of `state`, a wake lead and its interval counting as one.
    pub fn bursts(&self, state: PowerState) -> usize {
        self.segments
            .iter()
            .filter(|s| s.state == state && !s.wake)
            .count()
    }

    fn check_whole_periods(&self) -> Result<f64, PowerError> {
        let d = self.duration();
        let n = (d / self.period_s).round();
        if n < 1.0 || (d - n * self.period_s).abs() > 1e-9 {
            return Err(PowerError::PartialPeriod {
                got: d,
                period: self.period_s,
            });
        }
        Ok(d)
    }
}

/// Time-averaged draw of one state over the timeline, watts.
pub fn state_average(
    timeline: &PowerTimeline,
    table: &PowerTable,
    state: PowerState,
) -> Result<f64, PowerError> {
    let d = timeline.check_whole_periods()?;
    Ok(table.power(state) * timeline.time_in(state) / d)
}

/// Σ power × duration over the timeline, divided by its length.
pub fn average_power(timeline: &PowerTimeline, table: &PowerTable) -> Result<f64, PowerError> {
    let d = timeline.check_whole_periods()?;
    Ok(timeline
        .segments
        .iter()
        .map(|s| table.power(s.state) * s.duration_s)
        .sum::<f64>()
        / d)
}

/// Active power over duty-cycled average, for an active state.
pub fn reduction_ratio(
    timeline: &PowerTimeline,
    table: &PowerTable,
    state: PowerState,
) -> Result<f64, PowerError> {
    Ok(table.power(state) / state_average(timeline, table, state)?)
}

pub fn battery_life_years(avg_watts: f64, capacity_wh: f64) -> Result<f64, PowerError> {
    if avg_watts.is_nan() || avg_watts <= 0.0 {
        return Err(PowerError::NonPositiveLoad(avg_watts));
    }
    if capacity_wh.is_nan() || capacity_wh <= 0.0 {
        return Err(PowerError::NonPositiveCapacity(capacity_wh));
    }
    Ok(capacity_wh / avg_watts / HOURS_PER_YEAR)
}

/// One row of the per-state breakdown.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateEnergy {
    pub state: PowerState,
    pub duration_s: f64,
    pub energy_j: f64,
    pub avg_w: f64,
}

pub fn breakdown(
    timeline: &PowerTimeline,
    table: &PowerTable,
) -> Result<Vec<StateEnergy>, PowerError> {
    let d = timeline.check_whole_periods()?;
    Ok([
        PowerState::NbpuActive,
        PowerState::ReconfigActive,
        PowerState::Idle,
    ]
    .into_iter()
    .map(|state| {
        let t = timeline.time_in(state);
        let e = t * table.power(state);
        StateEnergy {
            state,
            duration_s: t,
            energy_j: e,
            avg_w: e / d,
        }
    })
    .collect())
}
