//! Run configuration, orchestration and output files.
//!
//! A run is described by a TOML file:
//!
//! ```toml
//! problem = "problem1"
//! dt = 2.5e-3
//! t_end = 0.5
//! output_dir = "out/problem1"
//!
//! [scheme]
//! kind = "caputo"
//! alpha = 0.7
//! ```
//!
//! Registered problems fill in every omitted field from their defaults;
//! `problem = "custom"` requires `mesh`, `scheme`, `t_end` and `bcs`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::condense::NonlinearParams;
use crate::driver::{error_metrics, ProbeSample, Simulation, SimulationConfig, StepReport};
use crate::error::Error;
use crate::frac_time::{FractionalScheme, SchemeKind};
use crate::global::BcKind;
use crate::kernels::{DiscontinuousLayout, QuadratureConfig};
use crate::mesh::{
    export_mesh, generate_annulus, generate_disk, generate_rectangle, star_boundary, Mesh,
};
use crate::reference::{instantiate, registry_defaults, CustomProblem, MeshRecipe, Probe, Problem};

/// Exit status for configuration errors.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for failures during the computation.
pub const EXIT_RUNTIME: i32 = 3;

/// CLI failure carrying its exit status.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSpec {
    #[serde(default = "default_kind")]
    pub kind: SchemeKind,
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

fn default_kind() -> SchemeKind {
    SchemeKind::Caputo
}

/// Constant boundary condition on one mesh tag (custom problems only).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BcSpec {
    pub tag: String,
    pub kind: BcKind,
    pub value: f64,
}

/// Schema of a run configuration file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: String,
    pub dt: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh: Option<MeshRecipe>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<SchemeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_nl: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_nl_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bcs: Option<Vec<BcSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probes: Option<Vec<Probe>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub snapshots: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report_times: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<QuadratureConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_roots: Option<usize>,
}

pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Fully resolved run: everything needed to build and march a simulation.
pub struct RunPlan {
    pub config: RunConfig,
    pub problem_id: String,
    pub sim: SimulationConfig,
    pub mesh: Mesh,
    pub problem: Arc<dyn Problem>,
    pub probes: Vec<Probe>,
    /// Step indices (and requested times) for snapshots and reports.
    pub snapshots: Vec<(usize, f64)>,
    pub reports: Vec<(usize, f64)>,
    pub output_dir: PathBuf,
}

const DEFAULT_ROOTS: usize = 200;

impl RunConfig {
    /// Validates the configuration and fills in registry defaults. Relative
    /// mesh paths resolve against `base`.
    pub fn resolve(&self, base: &Path) -> Result<RunPlan, CliError> {
        self.resolve_with_mesh(base, None)
    }

    /// Like [`RunConfig::resolve`], but a supplied mesh replaces the
    /// configured or default one.
    pub fn resolve_with_mesh(&self, base: &Path, mesh: Option<Mesh>) -> Result<RunPlan, CliError> {
        let custom = self.problem == "custom";
        let defaults = if custom { None } else { Some(registry_defaults(&self.problem).map_err(config_err)?) };
        if !custom && (self.bcs.is_some() || self.initial.is_some() || self.source.is_some()) {
            return Err(config_err("bcs, initial and source are only accepted for problem = \"custom\""));
        }

        let scheme_spec = match (&self.scheme, &defaults) {
            (Some(s), _) => s.clone(),
            (None, Some(d)) => SchemeSpec { kind: SchemeKind::Caputo, alpha: d.alpha, beta: None },
            (None, None) => return Err(config_err("custom problems need a [scheme] table")),
        };
        if scheme_spec.kind == SchemeKind::Caputo && scheme_spec.beta.is_some() {
            return Err(config_err("beta applies only to kind = \"fractal_fractional\""));
        }
        let scheme = FractionalScheme::new(scheme_spec.kind, scheme_spec.alpha, scheme_spec.beta.unwrap_or(1.0), self.dt)
            .map_err(config_err)?;

        let pick = |v: Option<f64>, d: Option<f64>, name: &str| -> Result<f64, CliError> {
            v.or(d).ok_or_else(|| config_err(format!("missing field `{name}`")))
        };
        let t_end = pick(self.t_end, defaults.as_ref().map(|d| d.t_end), "t_end")?;
        let rho = self.rho.or(defaults.as_ref().map(|d| d.rho)).unwrap_or(1.0);
        let m = self.m.or(defaults.as_ref().map(|d| d.m)).unwrap_or([0.0; 3]);
        let params = NonlinearParams::new(m, rho).map_err(config_err)?;

        let mut sim = SimulationConfig::new(scheme, params, t_end);
        if let Some(t) = self.tol_nl {
            sim.tol_nl = t;
        }
        if let Some(k) = self.max_nl_iters {
            sim.max_nl_iters = k;
        }
        if let Some(x) = self.xi_c {
            sim.layout = DiscontinuousLayout::new(x).map_err(config_err)?;
        }
        if let Some(q) = self.quadrature {
            q.validate().map_err(config_err)?;
            sim.quadrature = q;
        }
        sim.validate().map_err(config_err)?;

        let mesh = match mesh {
            Some(m) => m,
            None => {
                let recipe = match (&self.mesh, defaults.as_ref().and_then(|d| d.mesh.clone())) {
                    (Some(r), _) => r.clone(),
                    (None, Some(r)) => r,
                    (None, None) => return Err(config_err(format!("problem {} needs a [mesh] table", self.problem))),
                };
                recipe.build(base).map_err(config_err)?
            }
        };

        let problem: Arc<dyn Problem> = if custom {
            let specs = self.bcs.as_ref().ok_or_else(|| config_err("custom problems need a bcs list"))?;
            let mut bcs = BTreeMap::new();
            for b in specs {
                if !b.value.is_finite() {
                    return Err(config_err(format!("bc value for tag {:?} is not finite", b.tag)));
                }
                if bcs.insert(b.tag.clone(), (b.kind, b.value)).is_some() {
                    return Err(config_err(format!("duplicate bc for tag {:?}", b.tag)));
                }
            }
            Arc::new(CustomProblem { bcs, initial: self.initial.unwrap_or(0.0), source: self.source.unwrap_or(0.0) })
        } else {
            instantiate(&self.problem, scheme.alpha, scheme.kind, rho, self.n_roots.unwrap_or(DEFAULT_ROOTS))
                .map_err(config_err)?
        };

        let probes = self.probes.clone().or(defaults.as_ref().map(|d| d.probes.clone())).unwrap_or_default();
        let report_times = self
            .report_times
            .clone()
            .or(defaults.as_ref().map(|d| d.report_times.clone()))
            .unwrap_or_else(|| vec![t_end]);
        let steps = sim.step_count();
        let snapshots = schedule(&self.snapshots, self.dt, steps, "snapshots")?;
        let reports = schedule(&report_times, self.dt, steps, "report_times")?;

        let output_dir = PathBuf::from(self.output_dir.clone().unwrap_or_else(|| format!("out/{}", self.problem)));
        Ok(RunPlan {
            config: self.clone(),
            problem_id: self.problem.clone(),
            sim,
            mesh,
            problem,
            probes,
            snapshots,
            reports,
            output_dir,
        })
    }
}

/// Maps requested times to the nearest step index within `[0, steps]`.
fn schedule(times: &[f64], dt: f64, steps: usize, name: &str) -> Result<Vec<(usize, f64)>, CliError> {
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        if !t.is_finite() || t < 0.0 {
            return Err(config_err(format!("{name}: invalid time {t}")));
        }
        let k = (t / dt).round();
        if k > steps as f64 {
            return Err(config_err(format!("{name}: time {t} lies beyond t_end")));
        }
        out.push((k as usize, t));
    }
    out.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    out.dedup_by_key(|e| e.0);
    Ok(out)
}

/// One error-report row.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorEntry {
    pub probe: usize,
    pub time: f64,
    pub e_inf: f64,
    pub e_2: f64,
    pub nodes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunStats {
    pub steps: usize,
    pub quads: usize,
    pub unknowns: usize,
    pub nonlinear_iterations: usize,
    pub max_step_iterations: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ErrorReport {
    pub problem: String,
    pub errors: Vec<ErrorEntry>,
    pub stats: RunStats,
    pub config: RunConfig,
}

/// What a finished run produced.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub errors: Vec<ErrorEntry>,
    pub stats: RunStats,
    pub files: Vec<PathBuf>,
}

fn fmt_time(t: f64) -> String {
    format!("{t:.6}")
}

fn snapshot_csv(sim: &Simulation) -> String {
    let mut s = String::from("x,y,phi\n");
    for n in sim.nodal_values() {
        let _ = writeln!(s, "{:.16e},{:.16e},{:.16e}", n.point.x, n.point.y, n.phi);
    }
    s
}

fn probe_csv(samples: &[ProbeSample], exact: Option<&[f64]>) -> String {
    let mut s = String::from("s,x,y,phi,exact,abs_err\n");
    for (i, p) in samples.iter().enumerate() {
        let _ = write!(s, "{:.16e},{:.16e},{:.16e},{:.16e}", p.s, p.point.x, p.point.y, p.phi);
        match exact {
            Some(e) => {
                let _ = writeln!(s, ",{:.16e},{:.16e}", e[i], (p.phi - e[i]).abs());
            }
            None => s.push_str(",,\n"),
        }
    }
    s
}

/// Marches the plan to `t_end`, writing snapshots, probe files, the run log
/// and (when the problem has an exact solution) the error report.
pub fn execute(plan: RunPlan) -> Result<RunOutcome, CliError> {
    let RunPlan { config, problem_id, sim: sim_cfg, mesh, problem, probes, snapshots, reports, output_dir } = plan;
    fs::create_dir_all(&output_dir).map_err(|e| runtime_err(format!("cannot create {}: {e}", output_dir.display())))?;
    let has_exact = problem.has_exact();
    let mut sim = Simulation::new(sim_cfg, mesh, problem).map_err(|e| match e {
        Error::Config(_) | Error::Mesh(_) | Error::InvalidArgument(_) | Error::DegenerateQuad(_) | Error::ZeroLengthEdge => {
            config_err(e)
        }
        other => runtime_err(other),
    })?;
    log::info!(
        "{} quads, {} unknowns, {} steps, setup {:.3?}",
        sim.assets.mesh.quad_count(),
        sim.assets.dofs.n_dofs,
        sim.config.step_count(),
        sim.timings.setup
    );

    let mut files = Vec::new();
    let mut errors = Vec::new();
    let mut log_text = String::new();
    let mut total_iters = 0usize;
    let mut max_iters = 0usize;

    let emit = |sim: &Simulation, files: &mut Vec<PathBuf>, errors: &mut Vec<ErrorEntry>| -> crate::Result<()> {
        let n = sim.state.n;
        for &(_, t) in snapshots.iter().filter(|s| s.0 == n) {
            let path = output_dir.join(format!("snapshot_t{}.csv", fmt_time(t)));
            fs::write(&path, snapshot_csv(sim))?;
            files.push(path);
        }
        for &(_, t) in reports.iter().filter(|s| s.0 == n) {
            for (i, probe) in probes.iter().enumerate() {
                let samples = sim.sample_probe(probe)?;
                let exact = if has_exact { sim.exact_at(&samples) } else { None };
                let path = output_dir.join(format!("probe{i}_t{}.csv", fmt_time(t)));
                fs::write(&path, probe_csv(&samples, exact.as_deref()))?;
                files.push(path);
                if let Some(ex) = exact {
                    let numeric: Vec<f64> = samples.iter().map(|s| s.phi).collect();
                    let (e_inf, e_2) = error_metrics(&ex, &numeric)?;
                    log::info!("probe {i} t={t}: E_inf={e_inf:.3e} E_2={e_2:.3e} ({} nodes)", samples.len());
                    errors.push(ErrorEntry { probe: i, time: t, e_inf, e_2, nodes: samples.len() });
                }
            }
        }
        Ok(())
    };

    emit(&sim, &mut files, &mut errors).map_err(runtime_err)?;
    sim.run(|s, r: &StepReport| {
        total_iters += r.iterations;
        max_iters = max_iters.max(r.iterations);
        let _ = writeln!(
            log_text,
            "step {} t={:.16e} iterations={} change={:.6e} residual={:.6e}",
            s.state.n,
            s.time(),
            r.iterations,
            r.change,
            r.residual
        );
        emit(s, &mut files, &mut errors)
    })
    .map_err(runtime_err)?;
    log::info!(
        "condense {:.3?}, solve {:.3?}",
        sim.timings.condense,
        sim.timings.solve
    );

    let stats = RunStats {
        steps: sim.state.n,
        quads: sim.assets.mesh.quad_count(),
        unknowns: sim.assets.dofs.n_dofs,
        nonlinear_iterations: total_iters,
        max_step_iterations: max_iters,
    };
    let log_path = output_dir.join("run.log");
    fs::write(&log_path, log_text).map_err(runtime_err)?;
    files.push(log_path);
    if has_exact {
        let report = ErrorReport { problem: problem_id, errors: errors.clone(), stats: stats.clone(), config };
        let path = output_dir.join("report.json");
        let text = serde_json::to_string_pretty(&report).map_err(runtime_err)?;
        fs::write(&path, text + "\n").map_err(runtime_err)?;
        files.push(path);
    }
    Ok(RunOutcome { errors, stats, files })
}

/// `run <config>`: load, resolve and execute.
pub fn cmd_run(config_path: &Path) -> Result<RunOutcome, CliError> {
    let config = load_config(config_path)?;
    let base = config_path.parent().unwrap_or(Path::new("."));
    let plan = config.resolve(base)?;
    execute(plan)
}

/// Generators accepted by `mesh`.
#[derive(Clone, Debug, PartialEq)]
pub enum MeshCommand {
    Rectangle { nx: usize, ny: usize, x_range: [f64; 2], y_range: [f64; 2] },
    Annulus { nr: usize, ntheta: usize, r_in: f64, r_out: f64 },
    Disk { n_core: usize, n_ring: usize, radius: f64 },
    /// Boundary points only, written as `x,y` CSV.
    Star { n_points: usize, radius: f64 },
}

/// `mesh <generator> [params] <out>`.
pub fn cmd_mesh(cmd: &MeshCommand, out: &Path) -> Result<(), CliError> {
    let text = match *cmd {
        MeshCommand::Rectangle { nx, ny, x_range, y_range } => {
            export_mesh(&generate_rectangle(nx, ny, (x_range[0], x_range[1]), (y_range[0], y_range[1])).map_err(config_err)?)
        }
        MeshCommand::Annulus { nr, ntheta, r_in, r_out } => {
            export_mesh(&generate_annulus(nr, ntheta, r_in, r_out).map_err(config_err)?)
        }
        MeshCommand::Disk { n_core, n_ring, radius } => export_mesh(&generate_disk(n_core, n_ring, radius).map_err(config_err)?),
        MeshCommand::Star { n_points, radius } => {
            let mut s = String::from("x,y\n");
            for p in star_boundary(n_points, radius).map_err(config_err)? {
                let _ = writeln!(s, "{:.16e},{:.16e}", p.x, p.y);
            }
            s
        }
    };
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(runtime_err)?;
    }
    fs::write(out, text).map_err(|e| runtime_err(format!("cannot write {}: {e}", out.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_dt_is_named() {
        let e = parse_config("problem = \"problem1\"\n").unwrap_err();
        assert_eq!(e.exit_code(), EXIT_CONFIG);
        assert!(e.to_string().contains("dt"), "{e}");
    }

    #[test]
    fn unknown_keys_rejected() {
        let e = parse_config("problem = \"problem1\"\ndt = 0.1\nfoo = 1\n").unwrap_err();
        assert!(e.to_string().contains("foo"), "{e}");
    }

    #[test]
    fn registry_defaults_fill_in() {
        let c = parse_config("problem = \"problem1\"\ndt = 0.1\n").unwrap();
        let plan = c.resolve(Path::new(".")).unwrap();
        assert_eq!(plan.mesh.quad_count(), 256);
        assert_eq!(plan.sim.step_count(), 5);
        assert_eq!(plan.sim.params.m, [3.0, 1.0, 1.0]);
        assert_eq!(plan.reports.iter().map(|r| r.0).collect::<Vec<_>>(), vec![1, 2, 4, 5]);
    }

    #[test]
    fn custom_requires_bcs_and_scheme() {
        let base = "problem = \"custom\"\ndt = 0.1\nt_end = 0.2\n[mesh]\ngenerator = \"rectangle\"\nnx = 1\nny = 1\nx_range = [0.0, 1.0]\ny_range = [0.0, 1.0]\n";
        let no_scheme = parse_config(base).unwrap().resolve(Path::new(".")).err().unwrap();
        assert!(no_scheme.to_string().contains("scheme"));
        let no_bcs = parse_config(&format!("{base}[scheme]\nalpha = 0.5\n")).unwrap().resolve(Path::new(".")).err().unwrap();
        assert!(no_bcs.to_string().contains("bcs"));
    }

    #[test]
    fn schedule_rounds_to_steps() {
        let s = schedule(&[0.5, 0.1, 0.1], 0.1, 5, "x").unwrap();
        assert_eq!(s, vec![(1, 0.1), (5, 0.5)]);
        assert!(schedule(&[0.7], 0.1, 5, "x").is_err());
        assert!(schedule(&[-0.1], 0.1, 5, "x").is_err());
    }
}
