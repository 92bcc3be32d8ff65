use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use fastar::bench::{emit_csv, load_map, run_sweep, SweepConfig, TimeSource};
use fastar::grid::{random_endpoints, random_map, random_weighted_map};
use fastar::nav::{navigate, NavInputs, NavMode, Outcome};
use fastar::{
    plan, Cell, GridMap, HeuristicSpec, Metric, ObstacleOverlay, PlanOptions, PlannerConfig,
    SearchStatus, SearchWorkspace, Variant,
};

const METRIC_HELP: &str = "m (Manhattan), Mxy (max axis), DS (diagonal shortcut), E (Euclidean), SQR (squared Euclidean)";

/// Grid A* planning, heuristic-weight sweeps and navigation on partially known maps.
#[derive(Parser, Debug)]
#[command(name = "fastar", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Plan one path and print its cost, expansion count and time.
    ///
    /// Exit status: 0 path found, 1 goal unreachable (or timed out), 2 bad input.
    Plan(PlanArgs),
    /// Sweep heuristic weights for each variant and metric; write CSV.
    ///
    /// Each series raises the weight by one until the median time increases.
    Sweep(SweepArgs),
    /// Drive a simulated robot over a map with hidden obstacles.
    ///
    /// Exit status: 0 reached the goal, 1 stuck, 2 bad input.
    Navigate(NavigateArgs),
}

/// Where the map comes from: a file, or a seeded random map.
#[derive(Args, Debug)]
struct MapSource {
    /// Map file.
    #[arg(long, value_name = "PATH", required_unless_present = "random")]
    map: Option<PathBuf>,
    /// Generate a random map of this size instead, e.g. 200x150.
    #[arg(long, value_name = "WxH", conflicts_with = "map")]
    random: Option<String>,
    /// Obstacle density for --random.
    #[arg(long, default_value_t = 0.25)]
    density: f64,
    /// Largest terrain weight for --random (1 gives unit-cost terrain).
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=9))]
    max_terrain: u8,
    /// Seed for --random, and for picking endpoints when --start/--goal are omitted.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Start cell as x,y (random free cell on generated maps if omitted).
    #[arg(long, value_name = "X,Y")]
    start: Option<Cell>,
    /// Goal cell as x,y (random free cell on generated maps if omitted).
    #[arg(long, value_name = "X,Y")]
    goal: Option<Cell>,
}

impl MapSource {
    fn load(&self) -> Result<(GridMap, Cell, Cell)> {
        let map = match (&self.map, &self.random) {
            (Some(path), _) => load_map(path)?,
            (None, Some(size)) => {
                let (w, h) = parse_size(size)?;
                if !(0.0..1.0).contains(&self.density) {
                    bail!("--density must be in [0, 1)");
                }
                if self.max_terrain == 1 {
                    random_map(w, h, self.density, self.seed)
                } else {
                    random_weighted_map(w, h, self.density, self.max_terrain, self.seed)
                }
            }
            (None, None) => bail!("one of --map or --random is required"),
        };
        let (start, goal) = match (self.start, self.goal) {
            (Some(s), Some(g)) => (s, g),
            (s, g) if self.random.is_some() => {
                let (rs, rg) = random_endpoints(&map, self.seed)
                    .context("generated map has fewer than two free cells")?;
                (s.unwrap_or(rs), g.unwrap_or(rg))
            }
            _ => bail!("--start and --goal are required with --map"),
        };
        Ok((map, start, goal))
    }
}

fn parse_size(s: &str) -> Result<(u32, u32)> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .with_context(|| format!("size `{s}` is not WxH"))?;
    let (w, h): (u32, u32) = (w.trim().parse()?, h.trim().parse()?);
    if w == 0 || h == 0 {
        bail!("size `{s}` has a zero dimension");
    }
    Ok((w, h))
}

#[derive(Args, Debug)]
struct PlanArgs {
    #[command(flatten)]
    source: MapSource,
    /// Planner: textbook or fast.
    #[arg(long, default_value = "fast")]
    variant: Variant,
    #[arg(long, default_value = "DS", help = format!("Heuristic metric: {METRIC_HELP}"))]
    metric: Metric,
    /// Heuristic weight; 0 turns the heuristic off.
    #[arg(long, default_value_t = 1)]
    weight: u32,
    /// Allow diagonal moves.
    #[arg(long)]
    diagonals: bool,
    /// Run the fast planner without a closed list.
    #[arg(long)]
    no_closed_list: bool,
    /// Give up after this many seconds.
    #[arg(long, value_name = "SECONDS")]
    timeout_s: Option<f64>,
    /// Write the path, one x,y per line.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Write the map with the path drawn on it.
    #[arg(long, value_name = "PATH")]
    render: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    source: MapSource,
    /// Comma-separated planners to sweep.
    #[arg(long, value_delimiter = ',', default_value = "textbook,fast")]
    variants: Vec<Variant>,
    #[arg(long, value_delimiter = ',', default_value = "m,Mxy,DS,E,SQR",
          help = format!("Comma-separated metrics: {METRIC_HELP}"))]
    metrics: Vec<Metric>,
    /// Allow diagonal moves.
    #[arg(long)]
    diagonals: bool,
    /// Run the fast planner without a closed list (textbook cannot be swept then).
    #[arg(long)]
    no_closed_list: bool,
    /// First weight of every series.
    #[arg(long, default_value_t = 0)]
    weight: u32,
    /// Last weight any series may reach.
    #[arg(long, default_value_t = 32)]
    max_weight: u32,
    /// Per-run time limit; slower runs are reported as TIMEOUT.
    #[arg(long, value_name = "SECONDS", default_value_t = 30.0)]
    timeout_s: f64,
    /// Repetitions per row; the median time is reported.
    #[arg(long, default_value_t = 5)]
    reps: u32,
    /// Replace wall-clock time with a fixed cost per search operation (in
    /// nanoseconds), making the CSV reproducible.
    #[arg(long, value_name = "NANOS")]
    synthetic_clock: Option<u64>,
    /// CSV output file (stdout if omitted).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Args, Debug)]
struct NavigateArgs {
    #[command(flatten)]
    source: MapSource,
    /// Hidden obstacles added to the map to form the true world.
    #[arg(long, value_name = "PATH")]
    overlay: Option<PathBuf>,
    /// Sensing and speed preset: M1 (50 mm, no limiter) or M2 (225 mm, limiter).
    #[arg(long, default_value = "M2")]
    mode: NavMode,
    /// Override the preset's sensor range.
    #[arg(long, value_name = "MM")]
    sensor_mm: Option<u32>,
    /// Override the preset's action limiter.
    #[arg(long)]
    limiter: Option<OnOff>,
    #[arg(long, default_value = "Mxy", help = format!("Planner metric: {METRIC_HELP}"))]
    metric: Metric,
    /// Planner heuristic weight.
    #[arg(long, default_value_t = 8)]
    weight: u32,
    /// Plan with 4-connected moves only.
    #[arg(long)]
    no_diagonals: bool,
    /// Write the per-tick trace here.
    #[arg(long, value_name = "PATH")]
    trace: Option<PathBuf>,
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn cmd_plan(args: &PlanArgs) -> Result<u8> {
    let (map, start, goal) = args.source.load()?;
    let mut cfg = PlannerConfig {
        variant: args.variant,
        spec: HeuristicSpec::new(args.metric, args.weight, args.diagonals),
        use_closed_list: true,
    };
    if args.no_closed_list {
        cfg = cfg.without_closed_list();
    }
    let opts = match args.timeout_s {
        Some(t) if t > 0.0 && t.is_finite() => PlanOptions::with_timeout(Duration::from_secs_f64(t)),
        Some(_) => bail!("--timeout-s must be a positive number"),
        None => PlanOptions::default(),
    };
    let mut ws = SearchWorkspace::new();
    let r = plan(&map, start, goal, &cfg, &mut ws, &opts)?;
    let status = match r.status {
        SearchStatus::Found => "Found",
        SearchStatus::Unreachable => "Unreachable",
        SearchStatus::TimedOut => "TimedOut",
    };
    println!(
        "status={status} cost={} expansions={} stale_pops={} time_s={:.6}",
        if r.found() { format!("{:.4}", r.cost) } else { "-".into() },
        r.expansions,
        r.stale_pops,
        r.elapsed.as_secs_f64()
    );
    if let Some(path) = &args.out {
        let text: String = r.path.iter().map(|c| format!("{c}\n")).collect();
        write_file(path, &text)?;
    }
    if let Some(path) = &args.render {
        write_file(path, &map.render_with_path(&r.path))?;
    }
    Ok(if r.found() { 0 } else { 1 })
}

fn cmd_sweep(args: &SweepArgs) -> Result<u8> {
    let (map, start, goal) = args.source.load()?;
    let cfg = SweepConfig {
        variants: args.variants.clone(),
        metrics: args.metrics.clone(),
        diagonals: args.diagonals,
        weight_start: args.weight,
        max_weight: args.max_weight,
        timeout_s: args.timeout_s,
        repetitions: args.reps,
        use_closed_list: !args.no_closed_list,
        time_source: match args.synthetic_clock {
            Some(nanos_per_op) => TimeSource::Synthetic { nanos_per_op },
            None => TimeSource::Monotonic,
        },
        ..SweepConfig::new(map, start, goal)
    };
    let report = run_sweep(&cfg)?;
    match &args.out {
        Some(path) => {
            let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut w = io::BufWriter::new(file);
            emit_csv(&report, &mut w)?;
            w.flush()?;
        }
        None => emit_csv(&report, io::stdout().lock())?,
    }
    for (variant, total) in &report.totals {
        eprintln!("total {variant}: {total:.4} s");
    }
    Ok(0)
}

fn cmd_navigate(args: &NavigateArgs) -> Result<u8> {
    let (known, start, goal) = args.source.load()?;
    let overlay = match &args.overlay {
        Some(path) => fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?
            .parse::<ObstacleOverlay>()
            .with_context(|| format!("parsing {}", path.display()))?,
        None => ObstacleOverlay::empty(),
    };
    let truth = known.apply_overlay(&overlay)?;
    let mut mode = args.mode;
    if args.sensor_mm.is_some() || args.limiter.is_some() {
        mode = NavMode::custom(
            args.sensor_mm.unwrap_or(mode.sensor_range_mm),
            args.limiter.map_or(mode.action_limiter, |l| l == OnOff::On),
        );
    }
    let mut inputs = NavInputs::new(truth, known, start, goal, mode);
    inputs.spec = HeuristicSpec::new(args.metric, args.weight, !args.no_diagonals);
    let run = navigate(&inputs)?;
    if let Some(path) = &args.trace {
        write_file(path, &run.trace_text())?;
    }
    println!("{}", run.summary_line());
    Ok(match run.outcome {
        Outcome::ReachedGoal => 0,
        Outcome::Stuck => 1,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Plan(a) => cmd_plan(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Navigate(a) => cmd_navigate(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
