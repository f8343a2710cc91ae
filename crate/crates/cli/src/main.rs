//! `swarmsafe` command-line interface.
//!
//! Every flag can also be set through an environment variable named
//! `SWARMSAFE_<FLAG>`. Precedence is flag, then environment, then config
//! file, then the preset of the chosen subcommand.

mod plot;
mod summary;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use swarmsafe::config::{ContactMode, ControllerConfig, ExperimentConfig, GraphKind, Layout};
use swarmsafe::controllers::CoverageMode;
use swarmsafe::dynamics::Pose;
use swarmsafe::geometry::{DensityRef, DEFAULT_SIGMA};
use swarmsafe::sim::{run_configured, Trace};
use swarmsafe::verify::{default_suite, verify_configured, Decision};
use swarmsafe::Vec2;

#[derive(Parser)]
#[command(name = "swarmsafe", version, about = "Safe multi-robot experiments, verification and live sessions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment config (JSON). Its fields override the preset.
    #[arg(long, env = "SWARMSAFE_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long, env = "SWARMSAFE_SEED")]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, env = "SWARMSAFE_OUT")]
    out: Option<PathBuf>,
    #[arg(long, env = "SWARMSAFE_FILTER", value_enum)]
    filter: Option<Toggle>,
    /// Simulated seconds (per scenario for `verify`).
    #[arg(long, env = "SWARMSAFE_DURATION")]
    duration: Option<f64>,
    #[arg(long, env = "SWARMSAFE_ROBOTS")]
    robots: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset experiment and write trace, summary and plot.
    Demo {
        #[arg(value_enum)]
        kind: DemoKind,
        #[command(flatten)]
        common: Common,
        /// Interaction graph for consensus.
        #[arg(long, env = "SWARMSAFE_GRAPH", value_enum)]
        graph: Option<Graph>,
        /// Formation only: start in the target shape.
        #[arg(long)]
        at_rest: bool,
    },
    /// Run the experiment described by a config file.
    Run {
        #[command(flatten)]
        common: Common,
    },
    /// Score a controller on the scenario suite with the filter off.
    /// Exits 0 when filter bypass is allowed and 1 when wrapping is required.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Controller to verify, overriding the config.
        #[arg(long, env = "SWARMSAFE_CONTROLLER", value_enum)]
        controller: Option<ControllerArg>,
        /// Command file for `--controller external`.
        #[arg(long, env = "SWARMSAFE_EXTERNAL")]
        external: Option<PathBuf>,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Serve a live coverage session over TCP.
    Serve {
        #[command(flatten)]
        common: Common,
        #[arg(long, env = "SWARMSAFE_ADDR", default_value = "127.0.0.1:7878")]
        addr: String,
        /// Simulated seconds per wall-clock second.
        #[arg(long, env = "SWARMSAFE_SPEED", default_value_t = 1.0)]
        speed: f64,
        /// State broadcasts per simulated second.
        #[arg(long, env = "SWARMSAFE_BROADCAST_HZ", default_value_t = swarmsafe_server::net::DEFAULT_BROADCAST_HZ)]
        broadcast_hz: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum DemoKind {
    Consensus,
    Formation,
    Coverage,
    Swap,
}

#[derive(Clone, Copy, ValueEnum)]
enum Graph {
    Cycle,
    Path,
    Complete,
}

impl From<Graph> for GraphKind {
    fn from(g: Graph) -> Self {
        match g {
            Graph::Cycle => GraphKind::Cycle,
            Graph::Path => GraphKind::Path,
            Graph::Complete => GraphKind::Complete,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ControllerArg {
    Consensus,
    Formation,
    Coverage,
    Swap,
    Adversarial,
    HeadOn,
    Zero,
    External,
}

#[derive(Debug)]
struct CliError {
    kind: &'static str,
    message: String,
}

impl From<swarmsafe::Error> for CliError {
    fn from(e: swarmsafe::Error) -> Self {
        Self { kind: e.kind(), message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self { kind: "io", message: e.to_string() }
    }
}

fn config_error(message: impl Into<String>) -> CliError {
    CliError { kind: "config", message: message.into() }
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Demo { kind, common, graph, at_rest } => demo(kind, &common, graph, at_rest),
        Command::Run { common } => run(&common),
        Command::Verify { common, controller, external, json } => verify(&common, controller, external, json),
        Command::Serve { common, addr, speed, broadcast_hz } => serve(&common, &addr, speed, broadcast_hz),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let message = e.message.replace('\n', " ");
            eprintln!("error[{}]: {message}", e.kind);
            ExitCode::from(2)
        }
    }
}

/// Regular polygon of circumradius 0.25 m on the complete graph. Sparser
/// rigid graphs admit flipped equilibria from random starts.
fn polygon_formation(n: usize) -> ControllerConfig {
    let shape = (0..n)
        .map(|k| {
            let a = std::f64::consts::TAU * k as f64 / n as f64;
            [0.25 * a.cos(), 0.25 * a.sin()]
        })
        .collect();
    let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    ControllerConfig::Formation { shape, edges, gain: 5.0 }
}

fn demo_coverage() -> ControllerConfig {
    ControllerConfig::Coverage {
        kappa: 1.0,
        mode: CoverageMode::Lloyd,
        resolution: 64,
        sigma: DEFAULT_SIGMA,
        refs: vec![DensityRef::fixed(1, Vec2::new(0.3, 0.25), 4.0), DensityRef::fixed(2, Vec2::new(-0.25, -0.3), 2.0)],
    }
}

fn preset(kind: DemoKind, robots: Option<usize>, graph: Option<Graph>) -> ExperimentConfig {
    let base = ExperimentConfig::default();
    match kind {
        DemoKind::Consensus => ExperimentConfig {
            robots: robots.unwrap_or(6),
            controller: ControllerConfig::Consensus { graph: graph.map_or(GraphKind::Cycle, Into::into) },
            filter: false,
            contacts: ContactMode::Record,
            ..base
        },
        DemoKind::Formation => {
            let n = robots.unwrap_or(6);
            ExperimentConfig { robots: n, duration: 20.0, controller: polygon_formation(n), ..base }
        }
        DemoKind::Coverage => ExperimentConfig { robots: robots.unwrap_or(8), controller: demo_coverage(), ..base },
        DemoKind::Swap => {
            let n = robots.unwrap_or(4);
            let layout = if n == 4 { Layout::SquareCorners { half: 0.4 } } else { Layout::Circle { radius: 0.45 } };
            ExperimentConfig { robots: n, duration: 40.0, layout, ..base }
        }
    }
}

/// Shallow merge of the config file over `base`, then flag overrides.
fn resolve(base: ExperimentConfig, common: &Common) -> CliResult<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
            let file: serde_json::Value = serde_json::from_str(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
            let serde_json::Value::Object(fields) = file else {
                return Err(config_error(format!("{}: expected a JSON object", path.display())));
            };
            let mut merged = serde_json::to_value(&base).expect("config serializes");
            merged.as_object_mut().expect("object").extend(fields);
            serde_json::from_value(merged).map_err(|e| config_error(format!("{}: {e}", path.display())))?
        }
        None => base,
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(d) = common.duration {
        cfg.duration = d;
    }
    if let Some(n) = common.robots {
        cfg.robots = n;
    }
    if let Some(f) = common.filter {
        cfg.filter = matches!(f, Toggle::On);
    }
    if let Some(out) = &common.out {
        cfg.out = Some(out.display().to_string());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn demo(kind: DemoKind, common: &Common, graph: Option<Graph>, at_rest: bool) -> CliResult<ExitCode> {
    let mut base = preset(kind, common.robots, graph);
    if at_rest {
        let ControllerConfig::Formation { shape, .. } = &base.controller else {
            return Err(config_error("--at-rest applies to the formation demo only"));
        };
        let poses = shape.iter().map(|&[x, y]| Pose::new(x, y, 0.0)).collect();
        base.layout = Layout::Explicit { poses };
    }
    let cfg = resolve(base, common)?;
    let name = match kind {
        DemoKind::Consensus => "consensus",
        DemoKind::Formation => "formation",
        DemoKind::Coverage => "coverage",
        DemoKind::Swap => "swap",
    };
    if cfg.controller.name() != name {
        return Err(config_error(format!("config controller {} does not match demo {name}", cfg.controller.name())));
    }
    execute(&cfg, name)
}

fn run(common: &Common) -> CliResult<ExitCode> {
    if common.config.is_none() {
        return Err(config_error("run needs --config"));
    }
    let cfg = resolve(ExperimentConfig::default(), common)?;
    execute(&cfg, "run")
}

fn create(dir: &Path, name: &str) -> CliResult<BufWriter<File>> {
    let path = dir.join(name);
    File::create(&path).map(BufWriter::new).map_err(|e| CliError { kind: "io", message: format!("cannot create {}: {e}", path.display()) })
}

fn write_outputs(trace: &Trace, dir: &Path) -> CliResult<summary::Summary> {
    std::fs::create_dir_all(dir).map_err(|e| CliError { kind: "io", message: format!("cannot create {}: {e}", dir.display()) })?;
    let summary = summary::summarize(trace)?;
    trace.write_jsonl(create(dir, "trace.jsonl")?)?;
    trace.write_csv(create(dir, "trace.csv")?)?;
    trace.write_contacts_csv(create(dir, "contacts.csv")?)?;
    let mut f = create(dir, "summary.json")?;
    serde_json::to_writer_pretty(&mut f, &summary).map_err(|e| CliError { kind: "io", message: e.to_string() })?;
    writeln!(f)?;
    f.flush()?;
    let mut f = create(dir, "config.json")?;
    writeln!(f, "{}", trace.config.to_json())?;
    f.flush()?;
    let mut f = create(dir, "trajectories.svg")?;
    f.write_all(plot::trajectories_svg(trace).as_bytes())?;
    f.flush()?;
    Ok(summary)
}

fn execute(cfg: &ExperimentConfig, name: &str) -> CliResult<ExitCode> {
    let dir = cfg.out.clone().map_or_else(|| Path::new("swarmsafe-out").join(name), PathBuf::from);
    let trace = run_configured(cfg)?;
    let s = write_outputs(&trace, &dir)?;
    let fmt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.6}"));
    println!("controller {}  robots {}  ticks {}  filter {}", s.controller, s.robots, s.ticks, if s.filter { "on" } else { "off" });
    println!(
        "min pairwise distance {} m  final max pairwise distance {} m",
        fmt(s.min_pairwise_distance),
        fmt(s.final_max_pairwise_distance)
    );
    println!("safety score {:.6}  impacts {}", s.score.score, s.score.impacts);
    if let Some(e) = s.final_max_edge_error {
        println!("final max edge error {e:.3e} m");
    }
    if let Some(h) = s.coverage_cost.as_ref().and_then(|c| c.first().zip(c.last())) {
        println!("coverage cost {:.6} -> {:.6}", h.0[1], h.1[1]);
    }
    if s.controller == "swap" {
        println!("goals reached at {}", s.goals_reached_at.map_or_else(|| "never".to_string(), |t| format!("{t:.2} s")));
    }
    if let swarmsafe::sim::RunStatus::Truncated { reason } = &s.status {
        println!("run truncated: {reason}");
    }
    println!("wrote {}", dir.display());
    Ok(ExitCode::SUCCESS)
}

fn verify(common: &Common, controller: Option<ControllerArg>, external: Option<PathBuf>, json: bool) -> CliResult<ExitCode> {
    // Scenario durations come from the suite unless --duration is given.
    let mut base = resolve(ExperimentConfig::default(), &Common { duration: None, ..common.clone() })?;
    if let Some(c) = controller {
        base.controller = match c {
            ControllerArg::Consensus => ControllerConfig::Consensus { graph: GraphKind::Cycle },
            ControllerArg::Formation => polygon_formation(base.robots),
            ControllerArg::Coverage => ControllerConfig::default_coverage(),
            ControllerArg::Swap => ControllerConfig::default(),
            ControllerArg::Adversarial => ControllerConfig::Adversarial {},
            ControllerArg::HeadOn => ControllerConfig::HeadOn {},
            ControllerArg::Zero => ControllerConfig::Zero {},
            ControllerArg::External => {
                let path = external.ok_or_else(|| config_error("--controller external needs --external <file>"))?;
                ControllerConfig::External { path: path.display().to_string() }
            }
        };
        base.validate()?;
    }
    let mut suite = default_suite(base.robots);
    if let Some(d) = common.duration {
        if !(d.is_finite() && d > 0.0) {
            return Err(config_error(format!("duration must be > 0, got {d}")));
        }
        suite.iter_mut().for_each(|s| s.duration = d);
    }
    let report = verify_configured(&base, &suite)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    } else {
        println!("{report}");
    }
    if let Some(dir) = &base.out {
        let dir = Path::new(dir);
        std::fs::create_dir_all(dir)?;
        let mut f = create(dir, "report.json")?;
        serde_json::to_writer_pretty(&mut f, &report).map_err(|e| CliError { kind: "io", message: e.to_string() })?;
        writeln!(f)?;
        f.flush()?;
    }
    Ok(match report.decision {
        Decision::BypassAllowed => ExitCode::SUCCESS,
        Decision::WrapRequired => ExitCode::from(1),
    })
}

fn serve(common: &Common, addr: &str, speed: f64, broadcast_hz: f64) -> CliResult<ExitCode> {
    let base = preset(DemoKind::Coverage, common.robots, None);
    // A live session runs until stopped unless --duration is given.
    let cfg = resolve(base, &Common { duration: None, ..common.clone() })?;
    let max_loops = match common.duration {
        Some(d) if d.is_finite() && d >= 0.0 => Some((d / cfg.dt).round() as u64),
        Some(d) => return Err(config_error(format!("duration must be >= 0, got {d}"))),
        None => None,
    };
    let session = swarmsafe_server::Session::new(cfg)?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        let opts = swarmsafe_server::ServerOptions { broadcast_hz, speed, max_loops, wait_for_clients: 0 };
        let handle = swarmsafe_server::start(listener, session, opts)?;
        println!("listening on {}", handle.local_addr());
        std::io::stdout().flush()?;
        let session = handle.finished().await;
        println!("served {} ticks, t = {:.2} s, score {:.6}", session.world().tick(), session.world().t(), session.score());
        Ok(ExitCode::SUCCESS)
    })
}
