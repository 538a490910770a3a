//! Time marching with lagging iterations, history maintenance, probes and
//! error metrics.

use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::condense::{build_s_and_b, condense, nonlinear_matrix_m, recover_interior, CondensedBlock, NonlinearParams};
use crate::error::{Error, Result};
use crate::frac_time::{history_terms, FractionalScheme, HistoryLedger};
use crate::global::{assemble_global, build_dof_map, BcKind, DofMap, KnownValues, SparseSolver};
use crate::kernels::{DiscontinuousLayout, Integrator, QuadratureConfig};
use crate::mesh::{build_topology, EdgeKind, Mesh, Point2, Topology};
use crate::reference::{Probe, Problem};
use crate::subdomain::{assemble_all, SubdomainMatrices, Vec4, Vec8};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimulationConfig {
    pub scheme: FractionalScheme,
    pub params: NonlinearParams,
    pub t_end: f64,
    pub tol_nl: f64,
    pub max_nl_iters: usize,
    pub layout: DiscontinuousLayout,
    pub quadrature: QuadratureConfig,
}

impl SimulationConfig {
    pub fn new(scheme: FractionalScheme, params: NonlinearParams, t_end: f64) -> Self {
        Self {
            scheme,
            params,
            t_end,
            tol_nl: 1e-8,
            max_nl_iters: 50,
            layout: DiscontinuousLayout::default(),
            quadrature: QuadratureConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_end >= self.scheme.dt) {
            return Err(Error::Config(format!("t_end {} must be at least dt {}", self.t_end, self.scheme.dt)));
        }
        if !(self.tol_nl > 0.0) {
            return Err(Error::Config("tol_nl must be positive".into()));
        }
        if self.max_nl_iters == 0 {
            return Err(Error::Config("max_nl_iters must be >= 1".into()));
        }
        Ok(())
    }

    /// Number of steps `⌈t_end / dt⌉`, ignoring round-off in the ratio.
    pub fn step_count(&self) -> usize {
        let r = self.t_end / self.scheme.dt;
        let n = r.round();
        if (r - n).abs() <= 1e-9 * n.max(1.0) {
            n as usize
        } else {
            r.ceil() as usize
        }
    }
}

/// Geometry-static data shared by every step.
pub struct Assets {
    pub mesh: Mesh,
    pub topology: Topology,
    pub integrator: Integrator,
    pub blocks: Vec<SubdomainMatrices>,
    pub dofs: DofMap,
    pub problem: Arc<dyn Problem>,
}

impl Assets {
    pub fn new(mesh: Mesh, problem: Arc<dyn Problem>, layout: DiscontinuousLayout, quadrature: QuadratureConfig) -> Result<Self> {
        let topology = build_topology(&mesh)?;
        let integrator = Integrator::new(layout, quadrature)?;
        let dofs = build_dof_map(&mesh, &topology, |t| problem.bc_kind(t), &integrator)?;
        let blocks = assemble_all(&mesh, &integrator)?;
        Ok(Self { mesh, topology, integrator, blocks, dofs, problem })
    }

    /// Prescribed boundary data at time `t`.
    pub fn known_values(&self, t: f64) -> KnownValues {
        let mut kv = KnownValues::zeros(self.mesh.quad_count());
        for (q, nodes) in self.dofs.nodes.iter().enumerate() {
            for (k, node) in nodes.iter().enumerate() {
                if let Some(tag) = node.tag {
                    let name = self.mesh.tag_name(tag);
                    let v = self.problem.bc_value(name, node.point, t);
                    match self.problem.bc_kind(name) {
                        Some(BcKind::Dirichlet) => kv.phi[q][k] = v,
                        Some(BcKind::Neumann) => kv.q[q][k] = v,
                        None => {}
                    }
                }
            }
        }
        kv
    }

    /// Source at the cell nodes at time `t`.
    pub fn source_values(&self, t: f64) -> Vec<Vec4> {
        self.dofs
            .cells
            .iter()
            .map(|c| Vec4::from_fn(|i, _| self.problem.source(c[i], t)))
            .collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Timings {
    pub setup: Duration,
    pub condense: Duration,
    pub solve: Duration,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationState {
    pub phi_b: Vec<[f64; 8]>,
    pub q_b: Vec<[f64; 8]>,
    pub phi_d: Vec<[f64; 4]>,
    pub ledger: HistoryLedger,
    pub n: usize,
}

impl SimulationState {
    pub fn time(&self, dt: f64) -> f64 {
        self.n as f64 * dt
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepReport {
    pub iterations: usize,
    pub change: f64,
    pub residual: f64,
}

pub struct Simulation {
    pub config: SimulationConfig,
    pub assets: Assets,
    pub state: SimulationState,
    pub timings: Timings,
    solver: SparseSolver,
}

/// One output node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodalValue {
    pub point: Point2,
    pub phi: f64,
    /// Half of the square root of the owning quad's area.
    pub half_size: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeSample {
    pub s: f64,
    pub point: Point2,
    pub phi: f64,
}

impl Simulation {
    pub fn new(config: SimulationConfig, mesh: Mesh, problem: Arc<dyn Problem>) -> Result<Self> {
        config.validate()?;
        let start = Instant::now();
        let assets = Assets::new(mesh, problem, config.layout, config.quadrature)?;
        let nq = assets.mesh.quad_count();
        let mut phi_b = vec![[0.0; 8]; nq];
        let mut phi_d = vec![[0.0; 4]; nq];
        for q in 0..nq {
            for k in 0..8 {
                phi_b[q][k] = assets.problem.initial(assets.dofs.nodes[q][k].point);
            }
            for i in 0..4 {
                phi_d[q][i] = assets.problem.initial(assets.dofs.cells[q][i]);
            }
        }
        let ledger = HistoryLedger::new(phi_d.iter().flatten().copied().collect());
        let state = SimulationState { phi_b, q_b: vec![[0.0; 8]; nq], phi_d, ledger, n: 0 };
        let timings = Timings { setup: start.elapsed(), ..Default::default() };
        Ok(Self { config, assets, state, timings, solver: SparseSolver::new() })
    }

    pub fn time(&self) -> f64 {
        self.state.time(self.config.scheme.dt)
    }

    /// Condensed blocks for the lagged cell values `lag`.
    pub fn condensed_blocks(
        &self,
        lag: &[[f64; 4]],
        c_time: f64,
        history: &[f64],
        source: &[Vec4],
    ) -> Result<Vec<CondensedBlock>> {
        let params = self.config.params;
        self.assets
            .blocks
            .par_iter()
            .enumerate()
            .map(|(q, blocks)| {
                let m = nonlinear_matrix_m(&params.m, &Vec4::from(lag[q]))?;
                let phi_n = Vec4::from(self.state.phi_d[q]);
                let p = Vec4::from_column_slice(&history[4 * q..4 * q + 4]);
                let sb = build_s_and_b(blocks, &m, c_time, &phi_n, &p, &source[q], params.rho);
                condense(blocks, &sb)
            })
            .collect()
    }

    pub fn advance_one_step(&mut self) -> Result<StepReport> {
        let n = self.state.n;
        let scheme = self.config.scheme;
        let t_next = (n + 1) as f64 * scheme.dt;
        let c_time = scheme.coeff(n);
        let history = history_terms(&scheme, &self.state.ledger, n)?;
        let source = self.assets.source_values(t_next);
        let known = self.assets.known_values(t_next);

        let mut lag = self.state.phi_d.clone();
        let mut lag_b = self.state.phi_b.clone();
        let mut q_b = self.state.q_b.clone();
        let mut change = f64::INFINITY;
        let mut residual;
        for iter in 1..=self.config.max_nl_iters {
            let t0 = Instant::now();
            let cond = self.condensed_blocks(&lag, c_time, &history, &source)?;
            let sys = assemble_global(&cond, &self.assets.dofs, &known)?;
            self.timings.condense += t0.elapsed();
            let t1 = Instant::now();
            let sol = self.solver.solve(&sys)?;
            self.timings.solve += t1.elapsed();
            residual = sol.relative_residual;

            let dofs = &self.assets.dofs;
            let blocks = &self.assets.blocks;
            let updated: Vec<([f64; 8], [f64; 8], [f64; 4])> = (0..cond.len())
                .into_par_iter()
                .map(|q| {
                    let (p, f) = dofs.local_values(q, &sol.x, &known);
                    let d = recover_interior(&cond[q], &blocks[q], &Vec8::from(p), &Vec8::from(f));
                    (p, f, [d[0], d[1], d[2], d[3]])
                })
                .collect();

            let mut diff: f64 = 0.0;
            let mut scale: f64 = 0.0;
            for (q, (p, _, d)) in updated.iter().enumerate() {
                for k in 0..8 {
                    diff = diff.max((p[k] - lag_b[q][k]).abs());
                    scale = scale.max(p[k].abs());
                }
                for i in 0..4 {
                    diff = diff.max((d[i] - lag[q][i]).abs());
                    scale = scale.max(d[i].abs());
                }
            }
            if !diff.is_finite() {
                return Err(Error::NonConvergence { iterations: iter, change: diff });
            }
            change = if scale > 0.0 { diff / scale } else { diff };
            for (q, (p, f, d)) in updated.into_iter().enumerate() {
                lag_b[q] = p;
                q_b[q] = f;
                lag[q] = d;
            }
            if change <= self.config.tol_nl {
                let increments: Vec<f64> = lag
                    .iter()
                    .zip(&self.state.phi_d)
                    .flat_map(|(new, old)| (0..4).map(move |i| new[i] - old[i]))
                    .collect();
                self.state.ledger.push(increments)?;
                self.state.phi_d = lag;
                self.state.phi_b = lag_b;
                self.state.q_b = q_b;
                self.state.n += 1;
                return Ok(StepReport { iterations: iter, change, residual });
            }
        }
        Err(Error::NonConvergence { iterations: self.config.max_nl_iters, change })
    }

    /// Marches to `t_end`, calling `observer` after every step.
    pub fn run(&mut self, mut observer: impl FnMut(&Simulation, &StepReport) -> Result<()>) -> Result<()> {
        let total = self.config.step_count();
        while self.state.n < total {
            let report = self.advance_one_step()?;
            log::debug!(
                "step {} t={:.6} iterations={} change={:.3e} residual={:.3e}",
                self.state.n,
                self.time(),
                report.iterations,
                report.change,
                report.residual
            );
            observer(self, &report)?;
        }
        Ok(())
    }

    /// Boundary and cell nodes with their current φ. Interface nodes are
    /// listed once, from the lower-numbered quad.
    pub fn nodal_values(&self) -> Vec<NodalValue> {
        let mesh = &self.assets.mesh;
        let mut out = Vec::with_capacity(12 * mesh.quad_count());
        for q in 0..mesh.quad_count() {
            let half_size = 0.5 * mesh.geometry(q).area().sqrt();
            for k in 0..8 {
                if let EdgeKind::Interface { neighbor, .. } = mesh.edge_kinds[q][k / 2] {
                    if neighbor < q {
                        continue;
                    }
                }
                out.push(NodalValue { point: self.assets.dofs.nodes[q][k].point, phi: self.state.phi_b[q][k], half_size });
            }
            for i in 0..4 {
                out.push(NodalValue { point: self.assets.dofs.cells[q][i], phi: self.state.phi_d[q][i], half_size });
            }
        }
        out
    }

    /// Nodes selected by `probe`, sorted by the line parameter `s` (or in
    /// node order for [`Probe::All`]).
    pub fn sample_probe(&self, probe: &Probe) -> Result<Vec<ProbeSample>> {
        let nodes = self.nodal_values();
        match probe {
            Probe::All => Ok(nodes
                .iter()
                .enumerate()
                .map(|(i, n)| ProbeSample { s: i as f64, point: n.point, phi: n.phi })
                .collect()),
            Probe::Line { origin, direction, tolerance } => {
                let o = Point2::new(origin[0], origin[1]);
                let d = Point2::new(direction[0], direction[1]);
                let len = d.norm();
                if !(len > 0.0) || !len.is_finite() {
                    return Err(Error::Config("probe direction must be a nonzero vector".into()));
                }
                let u = d * (1.0 / len);
                let mut out: Vec<ProbeSample> = nodes
                    .iter()
                    .filter(|n| {
                        let band = tolerance.unwrap_or(1e-6 + n.half_size);
                        (n.point - o).cross(u).abs() <= band
                    })
                    .map(|n| ProbeSample { s: (n.point - o).dot(u), point: n.point, phi: n.phi })
                    .collect();
                out.sort_by(|a, b| a.s.total_cmp(&b.s).then(a.point.y.total_cmp(&b.point.y)));
                Ok(out)
            }
        }
    }

    /// Exact values at the samples, when the problem has a solution.
    pub fn exact_at(&self, samples: &[ProbeSample]) -> Option<Vec<f64>> {
        let pts: Vec<Point2> = samples.iter().map(|s| s.point).collect();
        self.assets.problem.exact_many(&pts, self.time())
    }
}

/// `E∞ = max |exact − numeric|`, `E₂ = ‖exact − numeric‖₂ / ‖exact‖₂`.
pub fn error_metrics(exact: &[f64], numeric: &[f64]) -> Result<(f64, f64)> {
    if exact.len() != numeric.len() {
        return Err(Error::Dimension(format!("{} exact values vs {} numeric", exact.len(), numeric.len())));
    }
    let mut e_inf: f64 = 0.0;
    let mut d2 = 0.0;
    let mut x2 = 0.0;
    for (e, n) in exact.iter().zip(numeric) {
        let d = e - n;
        e_inf = e_inf.max(d.abs());
        d2 += d * d;
        x2 += e * e;
    }
    if x2 == 0.0 {
        return Err(Error::Accuracy("E2 undefined: exact values are all zero".into()));
    }
    Ok((e_inf, (d2 / x2).sqrt()))
}
