//! Self-check suites behind `ldbem verify <suite>`.
//!
//! Each suite returns measured values next to their targets; a suite passes
//! when every check does.

use std::path::Path;

use nalgebra::{SMatrix, SVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cli::ErrorEntry;
use crate::condense::{build_s_and_b, condense, direct_inverse, hs_inverse, recover_interior, NonlinearParams};
use crate::driver::{error_metrics, Simulation, SimulationConfig};
use crate::error::{Error, Result};
use crate::frac_time::{caputo_oracle, discrete_derivative, history_term, FractionalScheme, HistoryLedger, SchemeKind};
use crate::kernels::{DiscontinuousLayout, Integrator, Kernel, QuadratureConfig};
use crate::mesh::{Point2, QuadGeometry};
use crate::reference::special::gamma_unchecked;
use crate::reference::{instantiate, registry_defaults, MeshRecipe};
use crate::subdomain::{assemble_all, assemble_subdomain, Mat4, Vec4, Vec8};

pub const SUITES: [&str; 7] = ["fractional", "kernels", "condensation", "problem1", "problem2", "problem3", "problem4"];

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub target: f64,
}

impl Check {
    fn new(name: impl Into<String>, measured: f64, target: f64) -> Self {
        Self { name: name.into(), measured, target }
    }

    pub fn pass(&self) -> bool {
        self.measured <= self.target
    }
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {:<48} measured {:.3e}  target <= {:.3e}",
            if self.pass() { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.target
        )
    }
}

pub fn run_suite(name: &str) -> Result<Vec<Check>> {
    match name {
        "fractional" => Ok(fractional()),
        "kernels" => kernels(),
        "condensation" => condensation(),
        "problem1" => problem1(),
        "problem2" => radial("problem2", &[(0.3, 9.5e-3), (0.5, 4.1e-3), (0.7, 5.2e-3), (0.9, 7.2e-3)]),
        "problem3" => radial("problem3", &[(0.3, 1e-2), (0.5, 1e-2), (0.7, 1e-2), (0.9, 1e-2)]),
        "problem4" => problem4(),
        other => Err(Error::Config(format!("unknown suite {other:?}; expected one of {}", SUITES.join(", ")))),
    }
}

/// Discrete derivative at the last sample of `series`, through the ledger.
fn discrete_at_end(scheme: &FractionalScheme, series: &[f64]) -> Result<f64> {
    let n = series.len() - 2;
    let mut ledger = HistoryLedger::new(vec![series[0]]);
    for k in 0..n {
        ledger.push(vec![series[k + 1] - series[k]])?;
    }
    let p = history_term(scheme, &ledger, n, 0)?;
    Ok(discrete_derivative(scheme, series[n + 1], series[n], p, n))
}

fn fractional() -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut oracle_diff: f64 = 0.0;
    let mut reduction_diff: f64 = 0.0;
    for _ in 0..1000 {
        let alpha = rng.random_range(0.05..0.95);
        let dt = rng.random_range(0.01..0.5);
        let len = rng.random_range(2..=50);
        let mut series: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
        let caputo = FractionalScheme::caputo(alpha, dt).expect("valid scheme");
        let got = discrete_at_end(&caputo, &series).expect("ledger");
        let want = caputo_oracle(&series, alpha, dt);
        oracle_diff = oracle_diff.max((got - want).abs() / want.abs().max(1.0));

        series[0] = 0.0;
        let ffp = FractionalScheme::fractal_fractional(alpha, 1.0, dt).expect("valid scheme");
        let a = discrete_at_end(&caputo, &series).expect("ledger");
        let b = discrete_at_end(&ffp, &series).expect("ledger");
        reduction_diff = reduction_diff.max((a - b).abs() / a.abs().max(1.0));
    }

    let mut linear: f64 = 0.0;
    for alpha in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let dt = 0.01;
        let series: Vec<f64> = (0..=40).map(|k| k as f64 * dt).collect();
        let scheme = FractionalScheme::caputo(alpha, dt).expect("valid scheme");
        let got = discrete_at_end(&scheme, &series).expect("ledger");
        let t: f64 = 40.0 * dt;
        let want = t.powf(1.0 - alpha) / gamma_unchecked(2.0 - alpha);
        linear = linear.max((got - want).abs());
    }
    vec![
        Check::new("caputo scheme vs direct quadrature (1000 series)", oracle_diff, 1e-12),
        Check::new("exactness on phi(t) = t", linear, 1e-10),
        Check::new("fractal-fractional beta=1, phi0=0 vs caputo", reduction_diff, 1e-12),
    ]
}

/// Meshes used by the benchmark suites.
fn benchmark_meshes() -> Result<Vec<(String, MeshRecipe)>> {
    let mut out = Vec::new();
    for id in ["problem1", "problem2", "problem3", "problem4"] {
        out.push((id.to_string(), registry_defaults(id)?.mesh.expect("registered mesh")));
    }
    for n in [8, 32] {
        out.push((
            format!("problem1 {n}x{n}"),
            MeshRecipe::Rectangle { nx: n, ny: n, x_range: [0.0, 1.0], y_range: [0.0, 2.0] },
        ));
    }
    Ok(out)
}

fn kernels() -> Result<Vec<Check>> {
    let integrator = Integrator::new(DiscontinuousLayout::default(), QuadratureConfig::default())?;
    let mut checks = Vec::new();
    for (name, recipe) in benchmark_meshes()? {
        let mesh = recipe.build(Path::new("."))?;
        let worst = assemble_all(&mesh, &integrator)?.iter().map(|b| b.equipotential_defect()).fold(0.0, f64::max);
        checks.push(Check::new(format!("equipotential rows, {name}"), worst, 1e-8));
    }
    let square = QuadGeometry::new([
        Point2::new(-0.5, -0.5),
        Point2::new(0.5, -0.5),
        Point2::new(0.5, 0.5),
        Point2::new(-0.5, 0.5),
    ]);
    let total: f64 = integrator.cell(Point2::new(0.0, 0.0), &square)?.iter().sum();
    checks.push(Check::new("unit square cell integral at centre", (total - 0.168_891_314_676_006).abs(), 1e-10));
    let self_edge: f64 = integrator
        .edge(Point2::new(0.5, 0.0), Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Kernel::G)?
        .iter()
        .sum();
    let want = (1.0 + std::f64::consts::LN_2) / (2.0 * std::f64::consts::PI);
    checks.push(Check::new("self edge G integral", (self_edge - want).abs(), 1e-12));
    Ok(checks)
}

/// Random subdomain with random reaction, time coefficient and loads.
fn condensation() -> Result<Vec<Check>> {
    let integrator = Integrator::new(DiscontinuousLayout::default(), QuadratureConfig::default())?;
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut solve_diff: f64 = 0.0;
    let mut inverse_diff: f64 = 0.0;
    for _ in 0..1000 {
        let h = rng.random_range(0.05..2.0);
        let mut corners = [
            Point2::new(0.0, 0.0),
            Point2::new(h, 0.0),
            Point2::new(h, h),
            Point2::new(0.0, h),
        ];
        for c in corners.iter_mut() {
            *c = *c + Point2::new(rng.random_range(-0.15..0.15) * h, rng.random_range(-0.15..0.15) * h);
        }
        let quad = QuadGeometry::new(corners);
        let blocks = assemble_subdomain(&quad, &integrator)?;
        let m_diag = Vec4::from_fn(|_, _| rng.random_range(-2.0..2.0));
        let c_time = rng.random_range(0.5..20.0);
        let phi_n = Vec4::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let p = Vec4::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let f = Vec4::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let rho = rng.random_range(0.2..5.0);
        let sb = build_s_and_b(&blocks, &m_diag, c_time, &phi_n, &p, &f, rho);
        let cond = condense(&blocks, &sb)?;

        // Known boundary φ; unknown q and cell φ.
        let phi_b = Vec8::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let q_b = cond.gbar.lu().solve(&(cond.hbar * phi_b - cond.bbar)).ok_or(Error::SingularMatrix { dof: 0 })?;
        let phi_d = recover_interior(&cond, &blocks, &phi_b, &q_b);

        let mut a = SMatrix::<f64, 12, 12>::zeros();
        let mut rhs = SVector::<f64, 12>::zeros();
        let x = Mat4::identity() + sb.s_dd;
        let hb = blocks.h_bb * phi_b;
        let hd = blocks.h_db * phi_b;
        for r in 0..8 {
            for c in 0..8 {
                a[(r, c)] = -blocks.g_bb[(r, c)];
            }
            for c in 0..4 {
                a[(r, 8 + c)] = sb.s_bd[(r, c)];
            }
            rhs[r] = sb.b_bd[r] - hb[r];
        }
        for r in 0..4 {
            for c in 0..8 {
                a[(8 + r, c)] = -blocks.g_db[(r, c)];
            }
            for c in 0..4 {
                a[(8 + r, 8 + c)] = x[(r, c)];
            }
            rhs[8 + r] = sb.b_dd[r] - hd[r];
        }
        let mono = a.lu().solve(&rhs).ok_or(Error::SingularMatrix { dof: 0 })?;
        let scale = mono.amax().max(1.0);
        for k in 0..8 {
            solve_diff = solve_diff.max((mono[k] - q_b[k]).abs() / scale);
        }
        for i in 0..4 {
            solve_diff = solve_diff.max((mono[8 + i] - phi_d[i]).abs() / scale);
        }

        let hs = hs_inverse(&sb.s_dd)?;
        let direct = direct_inverse(&x).ok_or(Error::SingularMatrix { dof: 0 })?;
        inverse_diff = inverse_diff.max((hs - direct).amax() / direct.amax().max(1.0));
    }
    Ok(vec![
        Check::new("condensed + recovery vs monolithic 12x12 (1000 cases)", solve_diff, 1e-10),
        Check::new("rank-one inverse vs direct inverse", inverse_diff, 1e-10),
    ])
}

/// Runs a registered problem with the Caputo scheme and reports errors at
/// its report times. `mesh` overrides the registered mesh.
pub fn benchmark(id: &str, alpha: f64, mesh: Option<MeshRecipe>) -> Result<Vec<ErrorEntry>> {
    let d = registry_defaults(id)?;
    let recipe = mesh.or(d.mesh).ok_or_else(|| Error::Config(format!("{id} has no registered mesh")))?;
    let mesh = recipe.build(Path::new("."))?;
    let scheme = FractionalScheme::new(SchemeKind::Caputo, alpha, 1.0, d.dt)?;
    let config = SimulationConfig::new(scheme, NonlinearParams::new(d.m, d.rho)?, d.t_end);
    let problem = instantiate(id, alpha, SchemeKind::Caputo, d.rho, 200)?;
    let mut sim = Simulation::new(config, mesh, problem)?;
    let steps: Vec<(usize, f64)> = d.report_times.iter().map(|&t| ((t / d.dt).round() as usize, t)).collect();
    let mut out = Vec::new();
    sim.run(|s, _| {
        for &(_, t) in steps.iter().filter(|e| e.0 == s.state.n) {
            for (i, probe) in d.probes.iter().enumerate() {
                let samples = s.sample_probe(probe)?;
                let exact = s.exact_at(&samples).ok_or_else(|| Error::Config(format!("{id} has no exact solution")))?;
                let numeric: Vec<f64> = samples.iter().map(|p| p.phi).collect();
                let (e_inf, e_2) = error_metrics(&exact, &numeric)?;
                out.push(ErrorEntry { probe: i, time: t, e_inf, e_2, nodes: samples.len() });
            }
        }
        Ok(())
    })?;
    Ok(out)
}

fn final_entry(entries: &[ErrorEntry]) -> Result<ErrorEntry> {
    entries.last().cloned().ok_or_else(|| Error::Accuracy("no report produced".into()))
}

fn problem1() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for alpha in [0.5, 0.6, 0.7, 0.8, 0.9] {
        let e = final_entry(&benchmark("problem1", alpha, None)?)?;
        checks.push(Check::new(format!("problem1 alpha={alpha} E_inf t=0.5"), e.e_inf, 7.5e-4));
        checks.push(Check::new(format!("problem1 alpha={alpha} E_2 t=0.5"), e.e_2, 1.5e-3));
    }
    let mut previous = f64::INFINITY;
    for n in [8, 16, 32] {
        let recipe = MeshRecipe::Rectangle { nx: n, ny: n, x_range: [0.0, 1.0], y_range: [0.0, 2.0] };
        let e = final_entry(&benchmark("problem1", 0.5, Some(recipe))?)?;
        let target = if n == 8 { 1.1e-3 } else { previous };
        checks.push(Check::new(format!("problem1 {} quads E_inf (non-increasing)", n * n), e.e_inf, target));
        previous = e.e_inf;
    }
    Ok(checks)
}

fn radial(id: &str, cases: &[(f64, f64)]) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for &(alpha, target) in cases {
        let e = final_entry(&benchmark(id, alpha, None)?)?;
        checks.push(Check::new(format!("{id} alpha={alpha} E_2 t=1"), e.e_2, target));
    }
    Ok(checks)
}

fn problem4() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for alpha in [0.3, 0.5, 0.7, 0.9] {
        let e = final_entry(&benchmark("problem4", alpha, None)?)?;
        checks.push(Check::new(format!("problem4 alpha={alpha} E_2 t=0.1"), e.e_2, 1e-2));
    }
    Ok(checks)
}
