//! Parameter-plane sweeps and phase-boundary extraction.
//!
//! Every grid node is evolved from the same seed policy and classified
//! independently, so results do not depend on the number of workers. Rows
//! come out row-major: axis1 outer, axis2 inner.

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    classify, evolve, evolve_seeded, ClassifierControls, IntegratorControls, PhaseKind, PhaseLabel, SeedKind,
    Trajectory,
};
use crate::error::{Error, Result};
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SweepParam {
    #[serde(rename = "delta")]
    Delta,
    #[serde(rename = "omega")]
    Omega,
    #[serde(rename = "zJ")]
    ZJ,
    #[serde(rename = "U")]
    U,
    #[serde(rename = "zV")]
    ZV,
    #[serde(rename = "t_ch")]
    TCh,
    /// initial occupation of sublattice A
    #[serde(rename = "n_A0")]
    NA0,
    /// initial occupation of sublattice B
    #[serde(rename = "n_B0")]
    NB0,
}

impl SweepParam {
    fn is_occupation(self) -> bool {
        matches!(self, SweepParam::NA0 | SweepParam::NB0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub param: SweepParam,
    pub min: f64,
    pub max: f64,
    pub n_points: usize,
}

impl Axis {
    pub fn new(param: SweepParam, min: f64, max: f64, n_points: usize) -> Self {
        Self { param, min, max, n_points }
    }

    /// Grid values; the end points are hit exactly.
    pub fn values(&self) -> Vec<f64> {
        let n = self.n_points;
        (0..n)
            .map(|k| if k + 1 == n { self.max } else { self.min + (self.max - self.min) * k as f64 / (n - 1) as f64 })
            .collect()
    }
}

fn default_retries() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub base: ModelParams,
    pub axis1: Axis,
    /// Omitted for one-dimensional cuts.
    #[serde(default)]
    pub axis2: Option<Axis>,
    #[serde(default)]
    pub seed: SeedKind,
    #[serde(default)]
    pub classifier: ClassifierControls,
    #[serde(default)]
    pub integrator: IntegratorControls,
    /// Extra attempts with doubled transient and window for inconclusive nodes.
    #[serde(default = "default_retries")]
    pub retries: usize,
}

impl SweepSpec {
    pub fn new(base: ModelParams, axis1: Axis, axis2: Option<Axis>) -> Self {
        Self {
            base,
            axis1,
            axis2,
            seed: SeedKind::default_sweep(),
            classifier: ClassifierControls::default(),
            integrator: IntegratorControls::default(),
            retries: default_retries(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        for axis in std::iter::once(&self.axis1).chain(&self.axis2) {
            if axis.n_points < 2 {
                return Err(Error::Config(format!("axis {:?} needs at least 2 points", axis.param)));
            }
            if !(axis.min.is_finite() && axis.max.is_finite()) {
                return Err(Error::Config(format!("axis {:?} has non-finite bounds", axis.param)));
            }
        }
        if let Some(a2) = &self.axis2 {
            if a2.param == self.axis1.param {
                return Err(Error::Config("axes must name distinct parameters".into()));
            }
        }
        Ok(())
    }

    /// Parameters and seed at one node.
    pub fn node(&self, v1: f64, v2: Option<f64>) -> (ModelParams, SeedKind) {
        let mut params = self.base.clone();
        let mut seed = self.seed;
        let mut set = |param: SweepParam, v: f64| {
            if param.is_occupation() {
                let (mut n_a, mut n_b) = match seed {
                    SeedKind::FockOccupation { n_a, n_b } => (n_a, n_b),
                    _ => (0.0, 0.0),
                };
                if param == SweepParam::NA0 {
                    n_a = v;
                } else {
                    n_b = v;
                }
                seed = SeedKind::FockOccupation { n_a, n_b };
                return;
            }
            let slot = match param {
                SweepParam::Delta => &mut params.delta,
                SweepParam::Omega => &mut params.omega,
                SweepParam::ZJ => &mut params.zj,
                SweepParam::U => &mut params.u,
                SweepParam::ZV => &mut params.zv,
                SweepParam::TCh => &mut params.t_ch,
                SweepParam::NA0 | SweepParam::NB0 => unreachable!(),
            };
            *slot = v;
        };
        set(self.axis1.param, v1);
        if let (Some(a2), Some(v2)) = (&self.axis2, v2) {
            set(a2.param, v2);
        }
        (params, seed)
    }
}

/// Outcome of evolving and classifying one parameter point.
#[derive(Debug, Clone)]
pub struct PointResult {
    pub label: PhaseLabel,
    pub trajectory: Trajectory,
    /// Controls of the attempt that succeeded.
    pub classifier: ClassifierControls,
}

/// Evolves and classifies one point; inconclusive runs are extended to
/// doubled transient and window up to `retries` times.
pub fn run_point(
    params: &ModelParams,
    seed: &SeedKind,
    classifier: &ClassifierControls,
    integrator: &IntegratorControls,
    retries: usize,
) -> Result<PointResult> {
    let mut controls = classifier.clone();
    let mut traj = evolve_seeded(seed, params, controls.t_total(), integrator)?;
    let mut attempt = 0;
    loop {
        match classify(&traj, &controls) {
            Ok(label) => return Ok(PointResult { label, trajectory: traj, classifier: controls }),
            Err(e @ (Error::Inconclusive(_) | Error::TrajectoryTooShort { .. })) => {
                if attempt >= retries {
                    return Err(e);
                }
            }
            Err(e) => return Err(e),
        }
        attempt += 1;
        let next = controls.doubled();
        traj = extend(traj, params, seed, next.t_total(), integrator)?;
        controls = next;
    }
}

/// Continues `traj` up to total span `t_total`, restarting from the seed if
/// the truncation has to grow.
fn extend(
    traj: Trajectory,
    params: &ModelParams,
    seed: &SeedKind,
    t_total: f64,
    integrator: &IntegratorControls,
) -> Result<Trajectory> {
    let more = t_total - (traj.t_end() - traj.t_start());
    match evolve(&traj.final_state, params, more, integrator) {
        Ok(tail) => {
            let mut samples = traj.samples;
            samples.extend_from_slice(&tail.samples[1..]);
            Ok(Trajectory {
                samples,
                final_state: tail.final_state,
                max_top_population: traj.max_top_population.max(tail.max_top_population),
            })
        }
        Err(Error::TruncationExceeded { .. }) => evolve_seeded(seed, params, t_total, integrator),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseRow {
    pub axis1: f64,
    pub axis2: Option<f64>,
    /// `None` when the node stayed inconclusive or failed.
    pub phase: Option<PhaseKind>,
    pub delta_n: Option<f64>,
    pub period: Option<f64>,
    pub residual: Option<f64>,
    pub n_max_used: Option<usize>,
    pub error: Option<String>,
}

impl PhaseRow {
    fn from_result(axis1: f64, axis2: Option<f64>, r: Result<PointResult>) -> Self {
        match r {
            Ok(p) => Self {
                axis1,
                axis2,
                phase: Some(p.label.kind),
                delta_n: Some(p.label.delta_n),
                period: p.label.period,
                residual: Some(p.label.residual),
                n_max_used: Some(p.trajectory.n_max()),
                error: None,
            },
            Err(e) => Self {
                axis1,
                axis2,
                phase: None,
                delta_n: None,
                period: None,
                residual: None,
                n_max_used: None,
                error: Some(e.to_string()),
            },
        }
    }

    pub fn phase_str(&self) -> &'static str {
        self.phase.map_or("inconclusive", PhaseKind::as_str)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTable {
    pub axis1: Vec<f64>,
    /// Empty for one-dimensional cuts.
    pub axis2: Vec<f64>,
    pub rows: Vec<PhaseRow>,
}

pub const CSV_HEADER: [&str; 7] = ["axis1", "axis2", "phase", "delta_n", "period", "residual", "n_max_used"];

impl PhaseTable {
    fn width(&self) -> usize {
        self.axis2.len().max(1)
    }

    pub fn row(&self, i: usize, j: usize) -> &PhaseRow {
        &self.rows[i * self.width() + j]
    }

    pub fn count(&self, kind: Option<PhaseKind>) -> usize {
        self.rows.iter().filter(|r| r.phase == kind).count()
    }

    /// Along a one-dimensional cut: the first `to` node and the closest
    /// classified node before it, provided that one is `from`. Inconclusive
    /// nodes in between widen the bracket.
    pub fn transition_bracket(&self, from: PhaseKind, to: PhaseKind) -> Option<(f64, f64)> {
        let k = self.rows.iter().position(|r| r.phase == Some(to))?;
        let before = self.rows[..k].iter().rev().find(|r| r.phase.is_some())?;
        if before.phase != Some(from) {
            return None;
        }
        Some((before.axis1, self.rows[k].axis1))
    }

    pub fn write_csv(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(CSV_HEADER)?;
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        for r in &self.rows {
            w.write_record([
                r.axis1.to_string(),
                opt(r.axis2),
                r.phase_str().to_string(),
                opt(r.delta_n),
                opt(r.period),
                opt(r.residual),
                r.n_max_used.map(|n| n.to_string()).unwrap_or_default(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    /// Writes `path` and a `<path>.json` sidecar with the spec, crate version
    /// and the errors of inconclusive nodes.
    pub fn save(&self, spec: &SweepSpec, path: &Path) -> Result<PathBuf> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))?;
        let sidecar = sidecar_path(path);
        let failures: Vec<_> = self
            .rows
            .iter()
            .filter_map(|r| r.error.as_ref().map(|e| serde_json::json!({"axis1": r.axis1, "axis2": r.axis2, "error": e})))
            .collect();
        let meta = serde_json::json!({
            "crate": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "spec": spec,
            "inconclusive": failures,
        });
        let text = serde_json::to_string_pretty(&meta)?;
        std::fs::write(&sidecar, text).map_err(|e| Error::io(&sidecar, e))?;
        Ok(sidecar)
    }
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    let mut name = csv.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

/// Runs every node of the grid on a pool of `workers` threads (all
/// available cores when `None`). Node failures become inconclusive rows.
pub fn run_sweep(spec: &SweepSpec, workers: Option<usize>) -> Result<PhaseTable> {
    spec.validate()?;
    let axis1 = spec.axis1.values();
    let axis2 = spec.axis2.as_ref().map(Axis::values).unwrap_or_default();
    let nodes: Vec<(f64, Option<f64>)> = axis1
        .iter()
        .flat_map(|&a| {
            if axis2.is_empty() {
                vec![(a, None)]
            } else {
                axis2.iter().map(|&b| (a, Some(b))).collect()
            }
        })
        .collect();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder.build().map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let rows = pool.install(|| {
        nodes
            .par_iter()
            .map(|&(a, b)| {
                let (params, seed) = spec.node(a, b);
                let r = run_point(&params, &seed, &spec.classifier, &spec.integrator, spec.retries);
                PhaseRow::from_result(a, b, r)
            })
            .collect()
    });
    Ok(PhaseTable { axis1, axis2, rows })
}

/// Polyline in the (axis1, axis2) plane.
pub type Polyline = Vec<(f64, f64)>;

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Boundary {
    /// Contour Δn = ε.
    pub delta_n: Vec<Polyline>,
    /// Contour 0.5 of the oscillating-phase indicator.
    pub oscillating: Vec<Polyline>,
}

/// Marching-squares contours of the table. Inconclusive nodes leave holes.
/// One-dimensional cuts give single-point polylines at the interpolated
/// crossings, with second coordinate 0.
pub fn extract_boundary(table: &PhaseTable, epsilon: f64) -> Boundary {
    let dn = |r: &PhaseRow| r.delta_n.filter(|_| r.phase.is_some()).unwrap_or(f64::NAN);
    let osc = |r: &PhaseRow| match r.phase {
        Some(PhaseKind::Oscillating) => 1.0,
        Some(_) => 0.0,
        None => f64::NAN,
    };
    Boundary { delta_n: contour(table, dn, epsilon), oscillating: contour(table, osc, 0.5) }
}

fn lerp(a: f64, b: f64, fa: f64, fb: f64, level: f64) -> f64 {
    a + (b - a) * (level - fa) / (fb - fa)
}

fn contour(table: &PhaseTable, field: impl Fn(&PhaseRow) -> f64, level: f64) -> Vec<Polyline> {
    let xs = &table.axis1;
    if table.axis2.is_empty() {
        let v: Vec<f64> = table.rows.iter().map(&field).collect();
        return (0..v.len().saturating_sub(1))
            .filter(|&i| v[i].is_finite() && v[i + 1].is_finite() && ((v[i] > level) != (v[i + 1] > level)))
            .map(|i| vec![(lerp(xs[i], xs[i + 1], v[i], v[i + 1], level), 0.0)])
            .collect();
    }
    let ys = &table.axis2;
    let (nx, ny) = (xs.len(), ys.len());
    let f = |i: usize, j: usize| field(table.row(i, j));

    // edge keys: (i, j, false) joins (i,j)-(i+1,j); (i, j, true) joins (i,j)-(i,j+1)
    type Key = (usize, usize, bool);
    let point = |k: Key| -> (f64, f64) {
        let (i, j, vertical) = k;
        if vertical {
            (xs[i], lerp(ys[j], ys[j + 1], f(i, j), f(i, j + 1), level))
        } else {
            (lerp(xs[i], xs[i + 1], f(i, j), f(i + 1, j), level), ys[j])
        }
    };
    let mut segments: Vec<(Key, Key)> = Vec::new();
    for i in 0..nx - 1 {
        for j in 0..ny - 1 {
            let c = [f(i, j), f(i + 1, j), f(i + 1, j + 1), f(i, j + 1)];
            if c.iter().any(|v| !v.is_finite()) {
                continue;
            }
            let above = c.map(|v| v > level);
            // bottom, right, top, left
            let edges: [Key; 4] = [(i, j, false), (i + 1, j, true), (i, j + 1, false), (i, j, true)];
            let ends = [(0, 1), (1, 2), (3, 2), (0, 3)];
            let crossing: Vec<usize> = (0..4).filter(|&e| above[ends[e].0] != above[ends[e].1]).collect();
            match crossing.len() {
                2 => segments.push((edges[crossing[0]], edges[crossing[1]])),
                4 => {
                    let center = c.iter().sum::<f64>() / 4.0 > level;
                    if center == above[0] {
                        segments.push((edges[0], edges[1]));
                        segments.push((edges[2], edges[3]));
                    } else {
                        segments.push((edges[3], edges[0]));
                        segments.push((edges[1], edges[2]));
                    }
                }
                _ => {}
            }
        }
    }

    let mut adjacency: HashMap<Key, Vec<usize>> = HashMap::new();
    for (s, &(a, b)) in segments.iter().enumerate() {
        adjacency.entry(a).or_default().push(s);
        adjacency.entry(b).or_default().push(s);
    }
    let mut used = vec![false; segments.len()];
    let mut lines = Vec::new();
    // open chains start at keys with a single segment, then closed loops
    let mut starts: Vec<usize> = (0..segments.len())
        .filter(|&s| adjacency[&segments[s].0].len() == 1 || adjacency[&segments[s].1].len() == 1)
        .collect();
    starts.extend(0..segments.len());
    for s0 in starts {
        if used[s0] {
            continue;
        }
        let (a, b) = segments[s0];
        let mut key = if adjacency[&a].len() == 1 { a } else if adjacency[&b].len() == 1 { b } else { a };
        let mut keys = vec![key];
        let mut s = s0;
        loop {
            used[s] = true;
            let (a, b) = segments[s];
            key = if a == key { b } else { a };
            keys.push(key);
            match adjacency[&key].iter().find(|&&t| !used[t]) {
                Some(&t) => s = t,
                None => break,
            }
        }
        lines.push(keys.into_iter().map(point).collect());
    }
    lines
}
