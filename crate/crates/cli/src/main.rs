use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use graph_eikonal::eikonal::{assemble_algebra, controllability};
use graph_eikonal::graph::MetricGraph;
use graph_eikonal::hydra::{HydraUnion, DEFAULT_MAX_EVENTS};
use graph_eikonal::lattice::{build_partition, Partition, DEFAULT_MAX_LATTICE_POINTS};
use graph_eikonal::oracle::fd_solve;
use graph_eikonal::rational::{format_rational, parse_rational, Rational};
use graph_eikonal::sampled::Placement;
use graph_eikonal::verify::{default_suite, report_json, suite_for};
use graph_eikonal::wave::{wave_snapshot, Control};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "graph-eikonal", version, about = "Exact eikonal algebra of the wave equation on metric graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a graph file.
    Validate {
        #[arg(long)]
        graph: PathBuf,
        /// Write the canonical graph document here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the hydra union (DOT on stdout, DOT and JSON with --out).
    Hydra(Common),
    /// Build the partition into families (JSON, plus critical.csv with --out).
    Partition(Common),
    /// Assemble the eikonal blocks, commutators and controllability report.
    Algebra(Common),
    /// Sample the wave at time T for the controls in a file.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        controls: PathBuf,
        #[arg(long)]
        grid: String,
        #[arg(long, value_enum, default_value_t = Method::Hydra)]
        method: Method,
    },
    /// Run the oracle suite (the built-in graphs when --graph is absent).
    Verify {
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long = "sigma", visible_alias = "gamma")]
        sigma: Vec<String>,
        #[arg(long)]
        time: Option<String>,
        #[arg(long, default_value = "1/32")]
        grid: String,
        #[arg(long = "xi-steps", default_value_t = 16)]
        xi_steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    graph: PathBuf,
    /// Boundary vertex id of a source; repeat for several sources.
    #[arg(long = "sigma", visible_alias = "gamma", required = true)]
    sigma: Vec<String>,
    /// Horizon T as a rational, e.g. 3/2.
    #[arg(long)]
    time: String,
    #[arg(long = "max-events", default_value_t = DEFAULT_MAX_EVENTS)]
    max_events: usize,
    /// Output directory; without it the main artifact goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Hydra,
    Fd,
    Both,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Io(anyhow::Error),
    Invalid(anyhow::Error),
    ChecksFailed,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Invalid(_) => 2,
            Failure::ChecksFailed => 3,
        }
    }
}

type Outcome<T> = Result<T, Failure>;

fn invalid(module: &str, e: impl std::fmt::Display) -> Failure {
    Failure::Invalid(anyhow!("{module}: {e}"))
}

fn read(path: &Path) -> Outcome<String> {
    fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(Failure::Io)
}

fn load_graph(path: &Path) -> Outcome<MetricGraph> {
    MetricGraph::from_json(&read(path)?).map_err(|e| invalid("graph", e))
}

fn rational_arg(name: &str, text: &str) -> Outcome<Rational> {
    parse_rational(text).ok_or_else(|| invalid("arguments", format!("{name} must be a rational like 3/2, got {text:?}")))
}

fn source_indices(g: &MetricGraph, ids: &[String]) -> Outcome<Vec<usize>> {
    ids.iter()
        .map(|id| g.vertex_index(id).map_err(|e| invalid("arguments", e)))
        .collect()
}

fn write_files(dir: &Path, files: &[(&str, String)]) -> Outcome<()> {
    fs::create_dir_all(dir)
        .with_context(|| format!("cannot create {}", dir.display()))
        .map_err(Failure::Io)?;
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body)
            .with_context(|| format!("cannot write {}", path.display()))
            .map_err(Failure::Io)?;
    }
    Ok(())
}

/// Writes `files` under `out`, or prints the first one.
fn emit(out: &Option<PathBuf>, files: &[(&str, String)]) -> Outcome<()> {
    match out {
        Some(dir) => write_files(dir, files),
        None => {
            print!("{}", files[0].1);
            Ok(())
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

/// Wraps a data document with the tool version kept apart from the data.
fn document(data: Value) -> String {
    pretty(&json!({
        "metadata": {"tool": "graph-eikonal", "version": env!("CARGO_PKG_VERSION")},
        "data": data,
    }))
}

struct Loaded {
    graph: MetricGraph,
    horizon: Rational,
    hydra: HydraUnion,
}

fn load(c: &Common) -> Outcome<Loaded> {
    let graph = load_graph(&c.graph)?;
    let horizon = rational_arg("--time", &c.time)?;
    let sources = source_indices(&graph, &c.sigma)?;
    let hydra = HydraUnion::build(&graph, &sources, &horizon, c.max_events).map_err(|e| invalid("hydra", e))?;
    Ok(Loaded { graph, horizon, hydra })
}

fn partition(l: &Loaded) -> Outcome<Partition> {
    build_partition(&l.hydra, DEFAULT_MAX_LATTICE_POINTS).map_err(|e| invalid("lattice", e))
}

fn cmd_validate(graph: &Path, out: &Option<PathBuf>) -> Outcome<()> {
    let g = load_graph(graph)?;
    let boundary: Vec<&str> = g.boundary_vertices().iter().map(|&v| g.vertex(v).id.as_str()).collect();
    let report = json!({
        "valid": true,
        "vertices": g.vertices().len(),
        "edges": g.edges().len(),
        "boundary": boundary,
        "total_length": format_rational(&g.total_length()),
    });
    if let Some(dir) = out {
        write_files(dir, &[("graph.json", g.to_json())])?;
    }
    print!("{}", pretty(&report));
    Ok(())
}

fn cmd_hydra(c: &Common) -> Outcome<()> {
    let l = load(c)?;
    emit(&c.out, &[("hydra.dot", l.hydra.to_dot()), ("hydra.json", document(l.hydra.to_json()))])
}

fn cmd_partition(c: &Common) -> Outcome<()> {
    let l = load(c)?;
    let p = partition(&l)?;
    emit(&c.out, &[("partition.json", document(p.to_json())), ("critical.csv", p.critical_csv())])
}

fn cmd_algebra(c: &Common) -> Outcome<()> {
    let l = load(c)?;
    let p = partition(&l)?;
    let alg = assemble_algebra(&p, &l.hydra).map_err(|e| invalid("eikonal", e))?;
    let report = controllability(&p, &l.hydra, &l.hydra.sources()).map_err(|e| invalid("eikonal", e))?;
    let mut data = alg.to_json();
    data["controllability"] = json!({
        "controllable": report.controllable,
        "covers_graph": report.covers_graph,
        "families": report.families.iter().map(|f| json!({"family": f.family, "size": f.size, "rank": f.rank})).collect::<Vec<_>>(),
    });
    emit(&c.out, &[("algebra.json", document(data))])
}

fn cmd_simulate(c: &Common, controls: &Path, grid: &str, method: Method) -> Outcome<()> {
    let l = load(c)?;
    let h = rational_arg("--grid", grid)?;
    let f = Control::from_json(&l.graph, &read(controls)?).map_err(|e| invalid("wave", e))?;
    let mut files: Vec<(&str, String)> = Vec::new();
    let exact = if method != Method::Fd {
        let s = wave_snapshot(&l.hydra, &f, &l.horizon, &h, Placement::Nodes).map_err(|e| invalid("wave", e))?;
        files.push(("snapshot_hydra.csv", s.to_csv(&l.graph)));
        Some(s)
    } else {
        None
    };
    if method != Method::Hydra {
        let fd = fd_solve(&l.graph, &f, &l.horizon, &h).map_err(|e| invalid("oracle", e))?;
        files.push(("snapshot_fd.csv", fd.to_csv(&l.graph)));
        if let Some(s) = &exact {
            let diff = fd.max_abs_diff(s).map_err(|e| invalid("oracle", e))?;
            files.push(("simulate.json", document(json!({"max_node_discrepancy": format!("{diff:.16e}")}))));
        }
    }
    emit(&c.out, &files)
}

fn cmd_verify(
    graph: &Option<PathBuf>,
    sigma: &[String],
    time: &Option<String>,
    grid: &str,
    xi_steps: usize,
    out: &Option<PathBuf>,
) -> Outcome<()> {
    let checks = match graph {
        None => default_suite(xi_steps).map_err(|e| invalid("oracle", e))?,
        Some(path) => {
            let g = load_graph(path)?;
            let t = rational_arg("--time", time.as_deref().ok_or_else(|| invalid("arguments", "--time is required with --graph"))?)?;
            let h = rational_arg("--grid", grid)?;
            if sigma.is_empty() {
                return Err(invalid("arguments", "--sigma is required with --graph"));
            }
            let sources = source_indices(&g, sigma)?;
            let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("graph");
            suite_for(name, &g, &sources, &t, &h, xi_steps).map_err(|e| invalid("oracle", e))?
        }
    };
    for c in &checks {
        eprintln!(
            "{} {} (error {:.3e}, tolerance {:.1e})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.max_error,
            c.tolerance
        );
    }
    emit(out, &[("verify.json", document(report_json(&checks)))])?;
    if checks.iter().all(|c| c.passed) {
        Ok(())
    } else {
        Err(Failure::ChecksFailed)
    }
}

fn run(cli: Cli) -> Outcome<()> {
    match &cli.command {
        Command::Validate { graph, out } => cmd_validate(graph, out),
        Command::Hydra(c) => cmd_hydra(c),
        Command::Partition(c) => cmd_partition(c),
        Command::Algebra(c) => cmd_algebra(c),
        Command::Simulate { common, controls, grid, method } => cmd_simulate(common, controls, grid, *method),
        Command::Verify { graph, sigma, time, grid, xi_steps, out } => {
            cmd_verify(graph, sigma, time, grid, *xi_steps, out)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Io(e) | Failure::Invalid(e) => eprintln!("error: {e:#}"),
                Failure::ChecksFailed => eprintln!("error: verification failed"),
            }
            ExitCode::from(f.code())
        }
    }
}
