//! Heuristic-weight sweep: for each planner variant and metric, raise the
//! weight from a starting value until the median run time goes up (or a run
//! times out), and report every step as a CSV row.

use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::time::Duration;

use thiserror::Error;

use crate::grid::{parse_map, Cell, GridMap, MapError};
use crate::heuristics::{HeuristicSpec, Metric};
use crate::search::{
    plan, PlanError, PlanOptions, PlanResult, PlannerConfig, SearchStatus, SearchWorkspace, Variant,
};

pub const CSV_HEADER: &str = "run,heuristic,diagonals,formula,time_s,expansions,stale_pops,cost,status";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Map {
        path: String,
        #[source]
        source: MapError,
    },
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error("invalid sweep configuration: {0}")]
    Config(String),
}

pub fn load_map(path: impl AsRef<Path>) -> Result<GridMap, HarnessError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_map(&text).map_err(|source| HarnessError::Map {
        path: path.display().to_string(),
        source,
    })
}

/// Where run times come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeSource {
    /// Host monotonic clock.
    Monotonic,
    /// Deterministic stand-in: a fixed cost per expansion, heap push and
    /// stale pop. Used to make sweeps reproducible byte for byte.
    Synthetic { nanos_per_op: u64 },
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub map: GridMap,
    pub start: Cell,
    pub goal: Cell,
    pub variants: Vec<Variant>,
    pub metrics: Vec<Metric>,
    pub diagonals: bool,
    pub weight_start: u32,
    /// Hard cap on the weight, so a series whose times never rise still ends.
    pub max_weight: u32,
    pub timeout_s: f64,
    pub repetitions: u32,
    pub use_closed_list: bool,
    pub time_source: TimeSource,
}

impl SweepConfig {
    pub fn new(map: GridMap, start: Cell, goal: Cell) -> Self {
        SweepConfig {
            map,
            start,
            goal,
            variants: vec![Variant::Textbook, Variant::Fast],
            metrics: Metric::ALL.to_vec(),
            diagonals: true,
            weight_start: 0,
            max_weight: 32,
            timeout_s: 30.0,
            repetitions: 5,
            use_closed_list: true,
            time_source: TimeSource::Monotonic,
        }
    }

    fn validate(&self) -> Result<(), HarnessError> {
        if self.repetitions == 0 {
            return Err(HarnessError::Config("repetitions must be at least 1".into()));
        }
        if self.timeout_s <= 0.0 || !self.timeout_s.is_finite() {
            return Err(HarnessError::Config("timeout must be a positive number of seconds".into()));
        }
        if self.max_weight < self.weight_start {
            return Err(HarnessError::Config("max weight is below the starting weight".into()));
        }
        if !self.use_closed_list && self.variants.contains(&Variant::Textbook) {
            return Err(HarnessError::Config(
                "the textbook planner cannot run without a closed list".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    Found,
    Unreachable,
    Timeout,
}

impl RowStatus {
    pub fn token(self) -> &'static str {
        match self {
            RowStatus::Found => "Found",
            RowStatus::Unreachable => "Unreachable",
            RowStatus::Timeout => "TIMEOUT",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub run: u32,
    pub variant: Variant,
    pub heuristic: u32,
    pub diagonals: bool,
    pub formula: Metric,
    /// Median over repetitions; `None` on timeout.
    pub time_s: Option<f64>,
    pub expansions: Option<u64>,
    pub stale_pops: Option<u64>,
    pub cost: Option<f64>,
    pub status: RowStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    /// Sum of row times per variant, timeouts counted at the timeout value.
    pub totals: Vec<(Variant, f64)>,
}

impl SweepReport {
    pub fn total(&self, v: Variant) -> Option<f64> {
        self.totals.iter().find(|(x, _)| *x == v).map(|(_, t)| *t)
    }

    /// Textbook total over fast total, when both ran.
    pub fn speedup(&self) -> Option<f64> {
        Some(self.total(Variant::Textbook)? / self.total(Variant::Fast)?)
    }

    /// Rows grouped into (variant, metric) series in run order.
    pub fn series(&self) -> Vec<&[SweepRow]> {
        let mut out = Vec::new();
        let mut begin = 0;
        for i in 1..=self.rows.len() {
            let split = i == self.rows.len()
                || self.rows[i].variant != self.rows[begin].variant
                || self.rows[i].formula != self.rows[begin].formula;
            if split {
                out.push(&self.rows[begin..i]);
                begin = i;
            }
        }
        out.retain(|s| !s.is_empty());
        out
    }
}

pub fn median(samples: &mut [f64]) -> f64 {
    assert!(!samples.is_empty());
    samples.sort_by(f64::total_cmp);
    let n = samples.len();
    if n % 2 == 1 {
        samples[n / 2]
    } else {
        (samples[n / 2 - 1] + samples[n / 2]) / 2.0
    }
}

struct Measurement {
    time_s: Option<f64>,
    last: PlanResult,
}

fn measure(
    cfg: &SweepConfig,
    planner: &PlannerConfig,
    ws: &mut SearchWorkspace,
) -> Result<Measurement, HarnessError> {
    let timeout = Duration::from_secs_f64(cfg.timeout_s);
    let mut samples = Vec::with_capacity(cfg.repetitions as usize);
    let mut last = None;
    for _ in 0..cfg.repetitions {
        let opts = match cfg.time_source {
            TimeSource::Monotonic => PlanOptions::with_timeout(timeout),
            TimeSource::Synthetic { .. } => PlanOptions::default(),
        };
        let r = plan(&cfg.map, cfg.start, cfg.goal, planner, ws, &opts)?;
        let t = match cfg.time_source {
            TimeSource::Monotonic => r.elapsed.as_secs_f64(),
            TimeSource::Synthetic { nanos_per_op } => {
                let ops = r.expansions + r.heap_pushes + r.stale_pops;
                (ops * nanos_per_op) as f64 * 1e-9
            }
        };
        let timed_out = r.status == SearchStatus::TimedOut || t > cfg.timeout_s;
        last = Some(r);
        if timed_out {
            return Ok(Measurement {
                time_s: None,
                last: last.unwrap(),
            });
        }
        samples.push(t);
    }
    Ok(Measurement {
        time_s: Some(median(&mut samples)),
        last: last.expect("at least one repetition"),
    })
}

/// Runs the sweep. Within a series the weight rises by one per row; the
/// series ends at the first row slower than its predecessor, at a timeout
/// (unless it is the series' first row), or at `max_weight`.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepReport, HarnessError> {
    cfg.validate()?;
    let mut rows = Vec::new();
    let mut totals = Vec::new();
    let mut run = 0u32;
    let mut ws = SearchWorkspace::for_map(&cfg.map);
    for &variant in &cfg.variants {
        let mut total = 0.0;
        for &metric in &cfg.metrics {
            let mut prev: Option<Option<f64>> = None;
            for weight in cfg.weight_start..=cfg.max_weight {
                let spec = HeuristicSpec::new(metric, weight, cfg.diagonals);
                let planner = PlannerConfig {
                    variant,
                    spec,
                    use_closed_list: cfg.use_closed_list,
                };
                let m = measure(cfg, &planner, &mut ws)?;
                run += 1;
                total += m.time_s.unwrap_or(cfg.timeout_s);
                let row = match m.time_s {
                    None => SweepRow {
                        run,
                        variant,
                        heuristic: weight,
                        diagonals: cfg.diagonals,
                        formula: metric,
                        time_s: None,
                        expansions: None,
                        stale_pops: None,
                        cost: None,
                        status: RowStatus::Timeout,
                    },
                    Some(t) => SweepRow {
                        run,
                        variant,
                        heuristic: weight,
                        diagonals: cfg.diagonals,
                        formula: metric,
                        time_s: Some(t),
                        expansions: Some(m.last.expansions),
                        stale_pops: Some(m.last.stale_pops),
                        cost: m.last.found().then_some(m.last.cost),
                        status: if m.last.found() {
                            RowStatus::Found
                        } else {
                            RowStatus::Unreachable
                        },
                    },
                };
                rows.push(row);
                let stop = match (prev, m.time_s) {
                    (None, _) => false,
                    (Some(_), None) => true,
                    (Some(None), Some(_)) => false,
                    (Some(Some(before)), Some(now)) => now > before,
                };
                if stop {
                    break;
                }
                prev = Some(m.time_s);
            }
        }
        totals.push((variant, total));
    }
    Ok(SweepReport { rows, totals })
}

fn fmt4(x: f64) -> String {
    format!("{x:.4}")
}

/// Writes the report as CSV. Each variant's rows are preceded by a
/// `# variant,<name>` comment; totals (and the textbook/fast ratio when both
/// ran) follow as `#` comments.
pub fn emit_csv<W: Write>(report: &SweepReport, mut sink: W) -> io::Result<()> {
    writeln!(sink, "{CSV_HEADER}")?;
    let mut current: Option<Variant> = None;
    for r in &report.rows {
        if current != Some(r.variant) {
            writeln!(sink, "# variant,{}", r.variant)?;
            current = Some(r.variant);
        }
        writeln!(
            sink,
            "{},{},{},{},{},{},{},{},{}",
            r.run,
            r.heuristic,
            u8::from(r.diagonals),
            r.formula.token(),
            r.time_s.map_or_else(|| "TIMEOUT".to_string(), fmt4),
            r.expansions.map_or_else(String::new, |e| e.to_string()),
            r.stale_pops.map_or_else(String::new, |e| e.to_string()),
            r.cost.map_or_else(String::new, fmt4),
            r.status.token(),
        )?;
    }
    for (variant, total) in &report.totals {
        writeln!(sink, "# total,{variant},{}", fmt4(*total))?;
    }
    if let Some(ratio) = report.speedup() {
        writeln!(sink, "# ratio,textbook/fast,{}", fmt4(ratio))?;
    }
    Ok(())
}

pub fn csv_string(report: &SweepReport) -> String {
    let mut buf = Vec::new();
    emit_csv(report, &mut buf).expect("writing to a Vec");
    String::from_utf8(buf).expect("CSV is ASCII")
}
