//! Grid path planning with a textbook A* and a lazy-deletion "fast" A*, plus
//! the tooling to compare them: a heuristic-weight sweep harness and a
//! closed-loop navigation simulator for maps with hidden obstacles.

pub mod bench;
pub mod bundled;
pub mod grid;
pub mod heuristics;
pub mod nav;
pub mod search;

pub use grid::{Cell, CellWeight, GridMap, MapError, ObstacleOverlay, ObstacleRect};
pub use heuristics::{HeuristicSpec, Metric};
pub use search::{
    plan, plan_dijkstra, plan_fast, plan_textbook, PlanError, PlanOptions, PlanResult,
    PlannerConfig, SearchStatus, SearchWorkspace, Variant,
};
