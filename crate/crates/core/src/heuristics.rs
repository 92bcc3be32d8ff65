//! Distance metrics, weighted heuristics and the consistency check.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::grid::{Cell, GridMap};

/// Slack allowed on a reduced cost before an edge counts as a violation.
pub const CONSISTENCY_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    /// `dx + dy`
    Manhattan,
    /// `max(dx, dy)`
    MaxAxis,
    /// Octile distance, `√2·min(dx, dy) + |dx − dy|`.
    DiagonalShortcut,
    Euclidean,
    /// `dx² + dy²`, not a metric in the strict sense.
    EuclideanSquared,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::Manhattan,
        Metric::MaxAxis,
        Metric::DiagonalShortcut,
        Metric::Euclidean,
        Metric::EuclideanSquared,
    ];

    /// Short token used on the command line and in CSV output.
    pub fn token(self) -> &'static str {
        match self {
            Metric::Manhattan => "m",
            Metric::MaxAxis => "Mxy",
            Metric::DiagonalShortcut => "DS",
            Metric::Euclidean => "E",
            Metric::EuclideanSquared => "SQR",
        }
    }

    pub fn distance(self, a: Cell, b: Cell) -> f64 {
        let dx = f64::from(a.x.abs_diff(b.x));
        let dy = f64::from(a.y.abs_diff(b.y));
        match self {
            Metric::Manhattan => dx + dy,
            Metric::MaxAxis => dx.max(dy),
            Metric::DiagonalShortcut => SQRT_2 * dx.min(dy) + (dx - dy).abs(),
            Metric::Euclidean => dx.hypot(dy),
            Metric::EuclideanSquared => dx * dx + dy * dy,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown metric `{0}` (expected one of m, Mxy, DS, E, SQR)")]
pub struct UnknownMetric(pub String);

impl FromStr for Metric {
    type Err = UnknownMetric;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Metric::ALL
            .into_iter()
            .find(|m| m.token() == s)
            .ok_or_else(|| UnknownMetric(s.to_string()))
    }
}

pub fn metric_distance(metric: Metric, a: Cell, b: Cell) -> f64 {
    metric.distance(a, b)
}

/// Metric, multiplicative weight and motion model of one planner configuration.
///
/// A weight of 0 turns the heuristic off, reducing A* to uniform-cost search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HeuristicSpec {
    pub metric: Metric,
    pub weight: u32,
    pub diagonals: bool,
}

impl HeuristicSpec {
    pub fn new(metric: Metric, weight: u32, diagonals: bool) -> Self {
        HeuristicSpec {
            metric,
            weight,
            diagonals,
        }
    }

    /// Weight 8, max-axis metric, diagonals allowed: the configuration used
    /// for on-line navigation.
    pub fn navigation_default() -> Self {
        HeuristicSpec::new(Metric::MaxAxis, 8, true)
    }

    #[inline]
    pub fn h(&self, n: Cell, goal: Cell) -> f64 {
        if self.weight == 0 {
            0.0
        } else {
            f64::from(self.weight) * self.metric.distance(n, goal)
        }
    }
}

pub fn h_value(spec: &HeuristicSpec, n: Cell, goal: Cell) -> f64 {
    spec.h(n, goal)
}

/// `d − h(x) + h(y)`; non-negative on every edge iff the heuristic is consistent.
pub fn reduced_cost(spec: &HeuristicSpec, x: Cell, y: Cell, d: f64, goal: Cell) -> f64 {
    d - spec.h(x, goal) + spec.h(y, goal)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub from: Cell,
    pub to: Cell,
    pub cost: f64,
    pub reduced_cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    pub consistent: bool,
    /// The edge with the most negative reduced cost when inconsistent.
    pub witness: Option<Edge>,
    /// Minimum reduced cost over all edges; `None` for a map without edges.
    pub min_reduced_cost: Option<f64>,
    pub edges_checked: usize,
}

/// Exhaustively checks `h(x) ≤ d(x,y) + h(y)` over every edge of `map`.
pub fn check_consistency(spec: &HeuristicSpec, map: &GridMap, goal: Cell) -> ConsistencyReport {
    let mut worst: Option<Edge> = None;
    let mut edges_checked = 0;
    for x in map.iter_cells() {
        for (y, d) in map.neighbors(x, spec.diagonals) {
            edges_checked += 1;
            let rc = reduced_cost(spec, x, y, d, goal);
            if worst.is_none_or(|w| rc < w.reduced_cost) {
                worst = Some(Edge {
                    from: x,
                    to: y,
                    cost: d,
                    reduced_cost: rc,
                });
            }
        }
    }
    let min_reduced_cost = worst.map(|e| e.reduced_cost);
    let consistent = min_reduced_cost.is_none_or(|rc| rc >= -CONSISTENCY_EPS);
    ConsistencyReport {
        consistent,
        witness: if consistent { None } else { worst },
        min_reduced_cost,
        edges_checked,
    }
}
