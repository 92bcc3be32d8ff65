//! Grid planners: textbook A*, the lazy-deletion fast A*, and a Dijkstra oracle.
//!
//! All three share the edge-cost model of [`GridMap::neighbors`] and test for
//! the goal when it is popped from the frontier, not when it is generated.

mod dijkstra;
mod fast;
mod queue;
mod textbook;
mod workspace;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::grid::{Cell, GridMap};
use crate::heuristics::HeuristicSpec;

pub use dijkstra::plan_dijkstra;
pub use fast::{plan_fast, plan_fast_with};
pub use textbook::{plan_textbook, plan_textbook_with};
pub use workspace::{reconstruct_path, SearchWorkspace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Textbook,
    Fast,
}

impl Variant {
    pub fn token(self) -> &'static str {
        match self {
            Variant::Textbook => "textbook",
            Variant::Fast => "fast",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown planner variant `{0}` (expected textbook or fast)")]
pub struct UnknownVariant(pub String);

impl FromStr for Variant {
    type Err = UnknownVariant;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "textbook" => Ok(Variant::Textbook),
            "fast" => Ok(Variant::Fast),
            _ => Err(UnknownVariant(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlannerConfig {
    pub variant: Variant,
    pub spec: HeuristicSpec,
    /// Only the fast variant may run without a closed list.
    pub use_closed_list: bool,
}

impl PlannerConfig {
    pub fn textbook(spec: HeuristicSpec) -> Self {
        PlannerConfig {
            variant: Variant::Textbook,
            spec,
            use_closed_list: true,
        }
    }

    pub fn fast(spec: HeuristicSpec) -> Self {
        PlannerConfig {
            variant: Variant::Fast,
            spec,
            use_closed_list: true,
        }
    }

    pub fn without_closed_list(mut self) -> Self {
        self.use_closed_list = false;
        self
    }

    pub fn validate(&self) -> Result<(), PlanError> {
        if !self.use_closed_list && self.variant != Variant::Fast {
            return Err(PlanError::ClosedListRequired);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    Start,
    Goal,
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Endpoint::Start => "start",
            Endpoint::Goal => "goal",
        })
    }
}

/// Configuration errors. A goal that simply cannot be reached is not an
/// error; it is reported as [`SearchStatus::Unreachable`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("{which} {cell} lies outside the {width}x{height} map")]
    OutOfBounds {
        which: Endpoint,
        cell: Cell,
        width: u32,
        height: u32,
    },
    #[error("{which} {cell} is impassable")]
    Blocked { which: Endpoint, cell: Cell },
    #[error("the textbook planner always keeps a closed list")]
    ClosedListRequired,
    #[error("goal {0} was not reached by the last search on this workspace")]
    GoalNotReached(Cell),
}

pub(crate) fn check_endpoints(map: &GridMap, start: Cell, goal: Cell) -> Result<(), PlanError> {
    for (which, cell) in [(Endpoint::Start, start), (Endpoint::Goal, goal)] {
        if !map.in_bounds(cell) {
            return Err(PlanError::OutOfBounds {
                which,
                cell,
                width: map.width(),
                height: map.height(),
            });
        }
        if !map.is_passable(cell) {
            return Err(PlanError::Blocked { which, cell });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchStatus {
    Found,
    Unreachable,
    /// The deadline in [`PlanOptions`] passed before the search finished.
    TimedOut,
}

impl fmt::Display for SearchStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SearchStatus::Found => "Found",
            SearchStatus::Unreachable => "Unreachable",
            SearchStatus::TimedOut => "TimedOut",
        })
    }
}

/// One frontier pop, recorded when [`PlanOptions::record_pops`] is set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopEvent {
    pub cell: Cell,
    pub f: f64,
    pub g: f64,
    /// Insertion sequence number of the popped entry.
    pub seq: u64,
    /// Entries pushed before this pop; entry `k` was queued at this pop iff `k.seq < pushes`.
    pub pushes: u64,
    pub stale: bool,
}

#[derive(Debug, Clone, Default)]
pub struct PlanOptions {
    pub deadline: Option<Instant>,
    pub record_pops: bool,
}

impl PlanOptions {
    pub fn with_timeout(timeout: Duration) -> Self {
        PlanOptions {
            deadline: Some(Instant::now() + timeout),
            record_pops: false,
        }
    }

    pub fn recording() -> Self {
        PlanOptions {
            deadline: None,
            record_pops: true,
        }
    }
}

/// A new g must beat the recorded one by more than this to count as better.
/// Absorbs summation-order noise in √2 step costs.
pub(crate) const G_EPS: f64 = 1e-9;

/// The deadline is polled once per this many pops.
pub(crate) const DEADLINE_POLL: u64 = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct PlanResult {
    pub status: SearchStatus,
    /// Start to goal inclusive; empty unless `status` is `Found`.
    pub path: Vec<Cell>,
    /// Sum of step costs along `path`.
    pub cost: f64,
    pub expansions: u64,
    pub reexpansions: u64,
    pub stale_pops: u64,
    pub heap_pushes: u64,
    pub elapsed: Duration,
    pub pops: Vec<PopEvent>,
}

impl PlanResult {
    pub(crate) fn empty(status: SearchStatus) -> Self {
        PlanResult {
            status,
            path: Vec::new(),
            cost: 0.0,
            expansions: 0,
            reexpansions: 0,
            stale_pops: 0,
            heap_pushes: 0,
            elapsed: Duration::ZERO,
            pops: Vec::new(),
        }
    }

    pub fn found(&self) -> bool {
        self.status == SearchStatus::Found
    }
}

/// Sums step costs front to back, matching the order in which planners accumulate g.
pub(crate) fn sum_path_cost(map: &GridMap, path: &[Cell], diagonals: bool) -> f64 {
    map.path_cost(path, diagonals)
        .expect("planner produced a path with an illegal step")
}

/// Runs whichever planner `cfg` selects. The workspace is only used by the fast variant.
pub fn plan(
    map: &GridMap,
    start: Cell,
    goal: Cell,
    cfg: &PlannerConfig,
    ws: &mut SearchWorkspace,
    opts: &PlanOptions,
) -> Result<PlanResult, PlanError> {
    cfg.validate()?;
    match cfg.variant {
        Variant::Textbook => plan_textbook_with(map, start, goal, &cfg.spec, opts),
        Variant::Fast => plan_fast_with(map, start, goal, cfg, ws, opts),
    }
}
