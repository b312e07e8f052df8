//! NR beam-management loop around the surfaces: SSB sweep, UE report,
//! NBPU delivery and CP-aligned reconfiguration, with duty-cycled power.

mod env;
mod layout;
mod schedule;
mod sim;

pub use env::{
    antenna_snr_db, build_site_beams, surface_gain_db, ue_snr, Blockage, Environment, LinkBudget,
    Point, SiteBeams, SurfaceSite, Ue,
};
pub use layout::{
    long_cp_s, ssb_first_symbols, symbol_cp_s, symbol_start_s, CpMode, PeriodLayout,
    HALF_SUBFRAME_S, SURFACE_STRIDE, TC_S,
};
pub use schedule::{
    default_timeline, duty_cycle_timeline, schedule_multi, BeamSchedule, ScheduleEntry,
    ScheduleTable,
};
pub use sim::{
    corner_gain_grid, simulate, CornerPoint, Event, EventKind, Protocol, Scenario, ScenarioResult,
    TraceRow, SCENARIO_VERSION,
};

use thiserror::Error;

use crate::link::LinkError;
use crate::power::PowerError;
use crate::surface::SurfaceError;
use crate::sync::SyncError;

#[derive(Debug, Error)]
pub enum BeamError {
    #[error("invalid scenario: {0}")]
    Config(String),
    #[error("scenario parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Link(#[from] LinkError),
    #[error(transparent)]
    Sync(#[from] SyncError),
    #[error(transparent)]
    Power(#[from] PowerError),
}
