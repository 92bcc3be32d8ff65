//! Closed-loop navigation on a partially known map.
//!
//! A point robot plans on its *known* map, moves one cell per tick over the
//! *true* map, and senses true occupancy inside a disk around itself. When a
//! newly revealed obstacle lies on the remaining path it replans from where
//! it stands. Walking into an undetected obstacle is a bump: the robot stays
//! put, learns that cell, and replans.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use thiserror::Error;

use crate::grid::{Cell, GridMap, STEPS};
use crate::heuristics::HeuristicSpec;
use crate::search::{plan_fast, PlanError, PlannerConfig, SearchStatus, SearchWorkspace};

/// Runs are cut off as `Stuck` after this many ticks per map cell.
pub const TICK_BOUND_PER_CELL: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeName {
    M1,
    M2,
    Custom,
}

impl fmt::Display for ModeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModeName::M1 => "M1",
            ModeName::M2 => "M2",
            ModeName::Custom => "custom",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NavMode {
    pub name: ModeName,
    pub sensor_range_mm: u32,
    /// Halves speed next to known obstacles.
    pub action_limiter: bool,
}

impl NavMode {
    /// Short sensor range, no limiter.
    pub const M1: NavMode = NavMode {
        name: ModeName::M1,
        sensor_range_mm: 50,
        action_limiter: false,
    };
    /// Long sensor range with the limiter on.
    pub const M2: NavMode = NavMode {
        name: ModeName::M2,
        sensor_range_mm: 225,
        action_limiter: true,
    };

    pub fn custom(sensor_range_mm: u32, action_limiter: bool) -> Self {
        NavMode {
            name: ModeName::Custom,
            sensor_range_mm,
            action_limiter,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown mode `{0}` (expected M1 or M2)")]
pub struct UnknownMode(pub String);

impl FromStr for NavMode {
    type Err = UnknownMode;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "M1" | "m1" => Ok(NavMode::M1),
            "M2" | "m2" => Ok(NavMode::M2),
            _ => Err(UnknownMode(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NavError {
    #[error("true map is {true_w}x{true_h} but known map is {known_w}x{known_h}")]
    ShapeMismatch {
        true_w: u32,
        true_h: u32,
        known_w: u32,
        known_h: u32,
    },
    #[error("known map marks {0} impassable but the true map does not")]
    PhantomObstacle(Cell),
    #[error("cell size differs between true and known map")]
    CellSizeMismatch,
    #[error(transparent)]
    Endpoint(#[from] PlanError),
}

/// Everything that determines a run.
#[derive(Debug, Clone)]
pub struct NavInputs {
    pub true_map: GridMap,
    pub known_map: GridMap,
    pub start: Cell,
    pub goal: Cell,
    pub mode: NavMode,
    pub spec: HeuristicSpec,
}

impl NavInputs {
    pub fn new(true_map: GridMap, known_map: GridMap, start: Cell, goal: Cell, mode: NavMode) -> Self {
        NavInputs {
            true_map,
            known_map,
            start,
            goal,
            mode,
            spec: HeuristicSpec::navigation_default(),
        }
    }

    pub fn with_mode(&self, mode: NavMode) -> Self {
        NavInputs {
            mode,
            ..self.clone()
        }
    }

    fn validate(&self) -> Result<(), NavError> {
        let (t, k) = (&self.true_map, &self.known_map);
        if t.width() != k.width() || t.height() != k.height() {
            return Err(NavError::ShapeMismatch {
                true_w: t.width(),
                true_h: t.height(),
                known_w: k.width(),
                known_h: k.height(),
            });
        }
        if t.cell_size_mm() != k.cell_size_mm() {
            return Err(NavError::CellSizeMismatch);
        }
        if let Some(c) = k.iter_cells().find(|c| !k.is_passable(*c) && t.is_passable(*c)) {
            return Err(NavError::PhantomObstacle(c));
        }
        for map in [t, k] {
            crate::search::check_endpoints(map, self.start, self.goal)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Move(Cell),
    /// Tried to enter an undetected obstacle and stayed put.
    Bump(Cell),
    /// Replanning failed; the robot gives up.
    Halt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TickRecord {
    /// Tick at which this step began.
    pub tick: u64,
    /// Where the robot sensed (and possibly replanned) this step.
    pub sensed_from: Cell,
    /// Position at the end of the step.
    pub pos: Cell,
    /// Obstacle cells learned this step, from sensing and bumping.
    pub revealed: Vec<Cell>,
    pub replan: bool,
    pub limited: bool,
    pub action: Action,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanSummary {
    pub tick: u64,
    pub from: Cell,
    pub status: SearchStatus,
    pub cost: f64,
    pub expansions: u64,
    /// False for the initial plan.
    pub replan: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    ReachedGoal,
    Stuck,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::ReachedGoal => "ReachedGoal",
            Outcome::Stuck => "Stuck",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NavRun {
    pub ticks: u64,
    /// Replans after the initial plan.
    pub replans: u64,
    pub trace: Vec<TickRecord>,
    pub outcome: Outcome,
    pub plans: Vec<PlanSummary>,
    pub final_pos: Cell,
}

impl NavRun {
    /// Tick of the step during which `c` was first learned to be an obstacle.
    pub fn first_reveal_tick(&self, c: Cell) -> Option<u64> {
        self.trace
            .iter()
            .find(|r| r.revealed.contains(&c))
            .map(|r| r.tick)
    }

    /// All revealed obstacle cells in the order they were learned.
    pub fn revealed_cells(&self) -> impl Iterator<Item = (u64, Cell, Cell)> + '_ {
        self.trace
            .iter()
            .flat_map(|r| r.revealed.iter().map(move |c| (r.tick, r.sensed_from, *c)))
    }

    pub fn moves(&self) -> usize {
        self.trace
            .iter()
            .filter(|r| matches!(r.action, Action::Move(_)))
            .count()
    }

    pub fn summary_line(&self) -> String {
        format!(
            "outcome={} ticks={} replans={}",
            self.outcome, self.ticks, self.replans
        )
    }

    /// One `tick=… pos=… revealed=… replan=… limited=…` line per step, then the summary.
    pub fn write_trace<W: Write>(&self, mut sink: W) -> io::Result<()> {
        for r in &self.trace {
            writeln!(
                sink,
                "tick={} pos={},{} revealed={} replan={} limited={}",
                r.tick,
                r.pos.x,
                r.pos.y,
                r.revealed.len(),
                u8::from(r.replan),
                u8::from(r.limited)
            )?;
        }
        writeln!(sink, "{}", self.summary_line())
    }

    pub fn trace_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_trace(&mut buf).expect("writing to a Vec");
        String::from_utf8(buf).expect("trace is ASCII")
    }
}

/// Copies true occupancy into `known` for every cell whose centre lies within
/// `range_mm` of the centre of `pos`. Returns the cells that turned from
/// believed-free to known-impassable, in row-major order.
pub fn sense(true_map: &GridMap, known: &mut GridMap, pos: Cell, range_mm: u32) -> Vec<Cell> {
    let cs = u64::from(true_map.cell_size_mm());
    let r = u64::from(range_mm);
    let reach = (r / cs) as i64;
    let mut out = Vec::new();
    for dy in -reach..=reach {
        for dx in -reach..=reach {
            let d2 = (dx * dx + dy * dy) as u64 * cs * cs;
            if d2 > r * r {
                continue;
            }
            let (x, y) = (i64::from(pos.x) + dx, i64::from(pos.y) + dy);
            if x < 0 || y < 0 || x >= i64::from(true_map.width()) || y >= i64::from(true_map.height()) {
                continue;
            }
            let c = Cell::new(x as u32, y as u32);
            let truth = true_map.get(c);
            let before = known.get(c);
            if before != truth {
                known.set(c, truth);
                if before.is_passable() && !truth.is_passable() {
                    out.push(c);
                }
            }
        }
    }
    out
}

fn near_known_obstacle(known: &GridMap, c: Cell) -> bool {
    STEPS.iter().any(|&(dx, dy)| {
        let (x, y) = (i64::from(c.x) + i64::from(dx), i64::from(c.y) + i64::from(dy));
        x >= 0
            && y >= 0
            && x < i64::from(known.width())
            && y < i64::from(known.height())
            && !known.is_passable(Cell::new(x as u32, y as u32))
    })
}

pub fn navigate(inputs: &NavInputs) -> Result<NavRun, NavError> {
    inputs.validate()?;
    let NavInputs {
        true_map,
        known_map,
        start,
        goal,
        mode,
        spec,
    } = inputs;
    let goal = *goal;
    let cfg = PlannerConfig::fast(*spec);
    let bound = TICK_BOUND_PER_CELL * true_map.len() as u64;

    let mut known = known_map.clone();
    let mut ws = SearchWorkspace::for_map(&known);
    let mut pos = *start;
    let mut ticks = 0u64;
    let mut replans = 0u64;
    let mut trace = Vec::new();
    let mut plans = Vec::new();
    // `path[step]` is the robot's current cell while a plan is live.
    let mut path: Vec<Cell> = Vec::new();
    let mut step = 0usize;
    let mut need_plan = true;

    let outcome = loop {
        if pos == goal {
            break Outcome::ReachedGoal;
        }
        if ticks >= bound {
            break Outcome::Stuck;
        }
        let tick = ticks;
        let mut revealed = sense(true_map, &mut known, pos, mode.sensor_range_mm);
        let blocked_ahead = revealed.iter().any(|c| path[step..].contains(c));

        let mut replan = false;
        if need_plan || blocked_ahead {
            let r = plan_fast(&known, pos, goal, &cfg, &mut ws)?;
            let is_replan = !plans.is_empty();
            plans.push(PlanSummary {
                tick,
                from: pos,
                status: r.status,
                cost: r.cost,
                expansions: r.expansions,
                replan: is_replan,
            });
            if is_replan {
                replans += 1;
                replan = true;
            }
            need_plan = false;
            if !r.found() {
                trace.push(TickRecord {
                    tick,
                    sensed_from: pos,
                    pos,
                    revealed,
                    replan,
                    limited: false,
                    action: Action::Halt,
                });
                break Outcome::Stuck;
            }
            path = r.path;
            step = 0;
        }

        let origin = pos;
        let next = path[step + 1];
        let limited = mode.action_limiter
            && (near_known_obstacle(&known, pos) || near_known_obstacle(&known, next));
        let action = if true_map.is_passable(next) {
            pos = next;
            step += 1;
            Action::Move(next)
        } else {
            known.set(next, true_map.get(next));
            revealed.push(next);
            need_plan = true;
            Action::Bump(next)
        };
        ticks += if limited { 2 } else { 1 };
        trace.push(TickRecord {
            tick,
            sensed_from: origin,
            pos,
            revealed,
            replan,
            limited,
            action,
        });
    };

    Ok(NavRun {
        ticks,
        replans,
        trace,
        outcome,
        plans,
        final_pos: pos,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayReport {
    pub identical: bool,
    /// Index into the trace of the first differing record.
    pub first_divergence: Option<usize>,
}

/// Re-runs `inputs` and compares the result with `run` step for step.
pub fn replay_check(run: &NavRun, inputs: &NavInputs) -> ReplayReport {
    let Ok(again) = navigate(inputs) else {
        return ReplayReport {
            identical: false,
            first_divergence: Some(0),
        };
    };
    let first = run
        .trace
        .iter()
        .zip(&again.trace)
        .position(|(a, b)| a != b)
        .or_else(|| {
            (run.trace.len() != again.trace.len())
                .then(|| run.trace.len().min(again.trace.len()))
        })
        .or_else(|| {
            (run.outcome != again.outcome
                || run.ticks != again.ticks
                || run.replans != again.replans)
                .then_some(run.trace.len())
        });
    ReplayReport {
        identical: first.is_none(),
        first_divergence: first,
    }
}
