//! Command-line front end: JSON config in, CSV/JSON out.
//!
//! Each subcommand expects a config whose `mode` field names it. Every file
//! written is accompanied by (or embeds) the resolved config with defaults
//! filled in.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::circuit::{derive, solve_cancellation, CancellationTarget, CircuitParams, SignConvention};
use crate::dynamics::{evolve, ClassifierControls, IntegratorControls, PhaseKind, SeedKind};
use crate::error::{Error, ErrorCategory, Result};
use crate::model::ModelParams;
use crate::observables::{linspace, wigner};
use crate::oracle::{
    steady_state_with, write_g2_csv, G2Entry, LatticeParams, LatticeSpec, SolverOptions, SteadyStateMethod,
};
use crate::sweep::{extract_boundary, run_point, run_sweep, SweepSpec};

#[derive(Debug, Parser)]
#[command(name = "kerr-array", version, about = "Driven-dissipative cavity arrays with cross-Kerr coupling")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true, env = "KERR_ARRAY_WORKERS")]
    pub workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve one parameter point and classify it.
    Run(IoArgs),
    /// Classify every node of a parameter grid.
    Sweep(IoArgs),
    /// Exact steady state of a small chain with g² tables.
    Oracle(IoArgs),
    /// Wigner functions of the asymptotic sublattice states.
    Wigner(IoArgs),
    /// Map circuit elements to model couplings.
    Circuit(IoArgs),
}

#[derive(Debug, clap::Args)]
pub struct IoArgs {
    /// JSON config file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum RunConfig {
    Run(PointConfig),
    Sweep(SweepSpec),
    Oracle(OracleConfig),
    Wigner(WignerConfig),
    Circuit(CircuitConfig),
}

impl RunConfig {
    fn mode(&self) -> &'static str {
        match self {
            RunConfig::Run(_) => "run",
            RunConfig::Sweep(_) => "sweep",
            RunConfig::Oracle(_) => "oracle",
            RunConfig::Wigner(_) => "wigner",
            RunConfig::Circuit(_) => "circuit",
        }
    }
}

fn default_retries() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointConfig {
    pub params: ModelParams,
    #[serde(default)]
    pub seed: SeedKind,
    #[serde(default)]
    pub classifier: ClassifierControls,
    #[serde(default)]
    pub integrator: IntegratorControls,
    #[serde(default = "default_retries")]
    pub retries: usize,
}

fn default_method() -> SteadyStateMethod {
    SteadyStateMethod::Iterative
}

/// Exactly one of `params` (coordination-scaled, divided by the chain's
/// z = 2) and `bond_params` (bare per-bond) must be given.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub lattice: LatticeSpec,
    #[serde(default)]
    pub params: Option<ModelParams>,
    #[serde(default)]
    pub bond_params: Option<LatticeParams>,
    #[serde(default = "default_method")]
    pub method: SteadyStateMethod,
    /// Defaults to the central site.
    #[serde(default)]
    pub reference_site: Option<usize>,
    #[serde(default)]
    pub solver: SolverOptions,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WignerGridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub n_points: usize,
}

impl Default for WignerGridSpec {
    fn default() -> Self {
        Self { x_min: -5.0, x_max: 5.0, p_min: -5.0, p_max: 5.0, n_points: 101 }
    }
}

fn default_snapshots() -> usize {
    8
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WignerConfig {
    #[serde(flatten)]
    pub point: PointConfig,
    #[serde(default)]
    pub grid: WignerGridSpec,
    /// Snapshots per period for oscillating states.
    #[serde(default = "default_snapshots")]
    pub snapshots: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CancellationRequest {
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub z: f64,
    pub target: CancellationTarget,
}

/// Mapping into dynamics parameters; `sign_convention` has no default.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelMapping {
    pub sign_convention: SignConvention,
    pub kappa_hz: f64,
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub omega: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitConfig {
    #[serde(default)]
    pub circuit: Option<CircuitParams>,
    #[serde(default)]
    pub solve: Option<CancellationRequest>,
    #[serde(default)]
    pub model: Option<ModelMapping>,
}

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err.category() {
        ErrorCategory::InvalidInput => 2,
        ErrorCategory::Numerical => 3,
        ErrorCategory::Inconclusive => 4,
        ErrorCategory::Io => 1,
    }
}

/// One-line JSON error report.
pub fn error_json(err: &Error) -> String {
    json!({"error": err.kind(), "message": err.to_string(), "exit_code": exit_code(err)}).to_string()
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_value(value).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Runs the parsed command; returns the JSON printed on stdout.
pub fn execute(cli: &Cli) -> Result<Value> {
    let (args, expected) = match &cli.command {
        Command::Run(a) => (a, "run"),
        Command::Sweep(a) => (a, "sweep"),
        Command::Oracle(a) => (a, "oracle"),
        Command::Wigner(a) => (a, "wigner"),
        Command::Circuit(a) => (a, "circuit"),
    };
    let config = load_config(&args.config)?;
    if config.mode() != expected {
        return Err(Error::Config(format!("config mode `{}` does not match subcommand `{expected}`", config.mode())));
    }
    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let out = args.out.as_path();
    match &config {
        RunConfig::Run(c) => cmd_run(c, &config, out),
        RunConfig::Sweep(s) => cmd_sweep(s, &config, out, cli.workers),
        RunConfig::Oracle(c) => cmd_oracle(c, &config, out),
        RunConfig::Wigner(c) => cmd_wigner(c, &config, out),
        RunConfig::Circuit(c) => cmd_circuit(c, &config, out),
    }
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    std::fs::File::create(path).map(std::io::BufWriter::new).map_err(|e| Error::io(path, e))
}

/// CSV at `path` plus `<path>.json` holding `meta`.
fn with_sidecar(path: &Path, meta: &Value, write: impl FnOnce(std::io::BufWriter<std::fs::File>) -> Result<()>) -> Result<()> {
    write(create(path)?)?;
    write_json(&crate::sweep::sidecar_path(path), meta)
}

fn cmd_run(c: &PointConfig, config: &RunConfig, out: &Path) -> Result<Value> {
    let p = run_point(&c.params, &c.seed, &c.classifier, &c.integrator, c.retries)?;
    let summary = json!({
        "label": p.label,
        "n_max_used": p.trajectory.n_max(),
        "t_end": p.trajectory.t_end(),
        "config": config,
    });
    with_sidecar(&out.join("trajectory.csv"), &summary, |w| p.trajectory.write_csv(w))?;
    write_json(&out.join("phase.json"), &summary)?;
    Ok(summary)
}

fn cmd_sweep(spec: &SweepSpec, config: &RunConfig, out: &Path, workers: Option<usize>) -> Result<Value> {
    let table = run_sweep(spec, workers)?;
    let csv = out.join("phase_table.csv");
    table.save(spec, &csv)?;
    let boundary = extract_boundary(&table, spec.classifier.eps_crystal);
    let counts = json!({
        "uniform": table.count(Some(PhaseKind::Uniform)),
        "crystal": table.count(Some(PhaseKind::Crystal)),
        "oscillating": table.count(Some(PhaseKind::Oscillating)),
        "inconclusive": table.count(None),
    });
    write_json(&out.join("boundary.json"), &json!({"boundary": boundary, "config": config}))?;
    Ok(json!({"nodes": table.rows.len(), "counts": counts, "table": csv}))
}

fn cmd_oracle(c: &OracleConfig, config: &RunConfig, out: &Path) -> Result<Value> {
    let z = c.lattice.geometry.coordination();
    let bond = match (&c.params, &c.bond_params) {
        (Some(p), None) => LatticeParams::from_mean_field(p, z)?,
        (None, Some(b)) => b.clone(),
        _ => return Err(Error::Config("oracle config needs exactly one of `params` and `bond_params`".into())),
    };
    let reference = c.reference_site.unwrap_or_else(|| c.lattice.center());
    if reference >= c.lattice.n_sites {
        return Err(Error::Config(format!("reference site {reference} outside the chain")));
    }
    let state = steady_state_with(&c.lattice, &bond, c.method, &c.solver)?;
    let occupations = state.occupations();
    let n = c.lattice.n_sites;
    let mut table: Vec<G2Entry> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            table.push(G2Entry { i, j, r: c.lattice.distance(i, j), g2: state.g2(i, j)? });
        }
    }
    let row = state.g2_row(reference)?;
    let by_distance = state.g2_by_distance()?;
    let meta = json!({
        "bond_params": bond,
        "coordination": z,
        "mean_field_params": c.params,
        "reference_site": reference,
        "residual": state.residual(),
        "occupations": occupations,
        "g2_reference": row,
        "g2_by_distance": by_distance,
        "config": config,
    });
    with_sidecar(&out.join("g2.csv"), &meta, |w| write_g2_csv(&table, w))?;
    with_sidecar(&out.join("occupations.csv"), &meta, |w| {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["site", "n"])?;
        for (k, v) in occupations.iter().enumerate() {
            w.write_record([k.to_string(), v.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))
    })?;
    Ok(meta)
}

fn cmd_wigner(c: &WignerConfig, config: &RunConfig, out: &Path) -> Result<Value> {
    let g = &c.grid;
    if g.n_points < 2 || !(g.x_max > g.x_min && g.p_max > g.p_min) {
        return Err(Error::Config("wigner grid needs n_points >= 2 and increasing bounds".into()));
    }
    if c.snapshots == 0 {
        return Err(Error::Config("snapshots must be at least 1".into()));
    }
    let pc = &c.point;
    let p = run_point(&pc.params, &pc.seed, &pc.classifier, &pc.integrator, pc.retries)?;
    let xs = linspace(g.x_min, g.x_max, g.n_points);
    let ps = linspace(g.p_min, g.p_max, g.n_points);
    let mut states = vec![p.trajectory.final_state.clone()];
    if let (PhaseKind::Oscillating, Some(period)) = (p.label.kind, p.label.period) {
        let chunk = period / c.snapshots as f64;
        let controls = IntegratorControls { sample_interval: chunk, ..pc.integrator.clone() };
        for _ in 1..c.snapshots {
            let next = evolve(states.last().expect("non-empty"), &pc.params, chunk, &controls)?;
            states.push(next.final_state);
        }
    }
    let mut files = Vec::new();
    for (k, s) in states.iter().enumerate() {
        for (name, rho) in [("A", &s.rho_a), ("B", &s.rho_b)] {
            let grid = wigner(rho, &xs, &ps)?;
            let file = if states.len() == 1 { format!("wigner_{name}.csv") } else { format!("wigner_{name}_{k}.csv") };
            let meta = json!({
                "sublattice": name,
                "t": s.t,
                "snapshot": k,
                "label": p.label,
                "w_min": grid.min(),
                "w_max": grid.max(),
                "config": config,
            });
            with_sidecar(&out.join(&file), &meta, |w| grid.write_csv(w))?;
            files.push(json!({"file": file, "t": s.t, "w_min": grid.min(), "w_max": grid.max()}));
        }
    }
    Ok(json!({"label": p.label, "files": files}))
}

fn cmd_circuit(c: &CircuitConfig, config: &RunConfig, out: &Path) -> Result<Value> {
    let circuit = match (&c.circuit, &c.solve) {
        (Some(p), None) => *p,
        (None, Some(s)) => solve_cancellation(s.c, s.l, s.z, s.target)?,
        _ => return Err(Error::Config("circuit config needs exactly one of `circuit` and `solve`".into())),
    };
    let derived = derive(&circuit)?;
    let model = match &c.model {
        Some(m) => Some(derived.to_model_params(m.sign_convention, m.kappa_hz, m.delta, m.omega)?),
        None => None,
    };
    let result = json!({
        "circuit": circuit,
        "derived": derived,
        "model_params": model,
        "config": config,
    });
    write_json(&out.join("circuit.json"), &result)?;
    Ok(result)
}
