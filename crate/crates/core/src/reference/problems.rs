//! Benchmark problems: boundary conditions, sources, initial data and, where
//! known, analytical solutions.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::special::{find_roots, j0, j1, mittag_leffler, y0, RootEquation};
use crate::error::{Error, Result};
use crate::frac_time::SchemeKind;
use crate::global::BcKind;
use crate::mesh::{generate_annulus, generate_disk, generate_rectangle, import_mesh, Mesh, Point2};
use crate::reference::special::gamma_unchecked;

pub const PROBLEM_IDS: [&str; 6] = ["problem1", "problem2", "problem3", "problem4", "problem5", "problem6"];

/// Data of one initial-boundary value problem.
pub trait Problem: Send + Sync {
    fn id(&self) -> &str;
    fn bc_kind(&self, tag: &str) -> Option<BcKind>;
    /// Prescribed φ on Dirichlet tags, prescribed q on Neumann tags.
    fn bc_value(&self, tag: &str, p: Point2, t: f64) -> f64;
    fn source(&self, _p: Point2, _t: f64) -> f64 {
        0.0
    }
    fn initial(&self, p: Point2) -> f64;
    fn exact(&self, _p: Point2, _t: f64) -> Option<f64> {
        None
    }
    fn has_exact(&self) -> bool {
        false
    }
    /// Exact values at many points; series solutions share their
    /// time-dependent coefficients across points.
    fn exact_many(&self, points: &[Point2], t: f64) -> Option<Vec<f64>> {
        points.iter().map(|&p| self.exact(p, t)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeshRecipe {
    Rectangle { nx: usize, ny: usize, x_range: [f64; 2], y_range: [f64; 2] },
    Annulus { nr: usize, ntheta: usize, r_in: f64, r_out: f64 },
    Disk { n_core: usize, n_ring: usize, radius: f64 },
    File { path: String },
}

impl MeshRecipe {
    /// Builds the mesh; relative file paths resolve against `base`.
    pub fn build(&self, base: &Path) -> Result<Mesh> {
        match self {
            MeshRecipe::Rectangle { nx, ny, x_range, y_range } => {
                generate_rectangle(*nx, *ny, (x_range[0], x_range[1]), (y_range[0], y_range[1]))
            }
            MeshRecipe::Annulus { nr, ntheta, r_in, r_out } => generate_annulus(*nr, *ntheta, *r_in, *r_out),
            MeshRecipe::Disk { n_core, n_ring, radius } => generate_disk(*n_core, *n_ring, *radius),
            MeshRecipe::File { path } => {
                let p = base.join(path);
                let text = std::fs::read_to_string(&p)
                    .map_err(|e| Error::Config(format!("cannot read mesh file {}: {e}", p.display())))?;
                import_mesh(&text)
            }
        }
    }
}

/// Where errors are measured.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Probe {
    /// Nodes within `tolerance` of the line through `origin` along
    /// `direction`; the default band is `1e-6` plus half the local element size.
    Line {
        origin: [f64; 2],
        direction: [f64; 2],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tolerance: Option<f64>,
    },
    /// Every boundary and cell node.
    All,
}

/// Registry defaults for one problem.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemDefaults {
    pub id: &'static str,
    pub mesh: Option<MeshRecipe>,
    pub m: [f64; 3],
    pub rho: f64,
    pub dt: f64,
    pub t_end: f64,
    pub alpha: f64,
    pub probes: Vec<Probe>,
    pub report_times: Vec<f64>,
}

pub fn registry_defaults(id: &str) -> Result<ProblemDefaults> {
    let line = |y: f64| Probe::Line { origin: [0.0, y], direction: [1.0, 0.0], tolerance: None };
    let d = match id {
        "problem1" => ProblemDefaults {
            id: "problem1",
            mesh: Some(MeshRecipe::Rectangle { nx: 16, ny: 16, x_range: [0.0, 1.0], y_range: [0.0, 2.0] }),
            m: [3.0, 1.0, 1.0],
            rho: 1.0,
            dt: 2.5e-3,
            t_end: 0.5,
            alpha: 0.5,
            probes: vec![line(0.25)],
            report_times: vec![0.1, 0.2, 0.4, 0.5],
        },
        "problem2" => ProblemDefaults {
            id: "problem2",
            mesh: Some(MeshRecipe::Disk { n_core: 10, n_ring: 8, radius: 2.0 }),
            m: [0.0, 0.0, 0.0],
            rho: 1.0,
            dt: 1.0 / 255.0,
            t_end: 1.0,
            alpha: 0.5,
            probes: vec![Probe::All],
            report_times: vec![1.0],
        },
        "problem3" => ProblemDefaults {
            id: "problem3",
            mesh: Some(MeshRecipe::Annulus { nr: 6, ntheta: 98, r_in: 1.0, r_out: 2.0 }),
            m: [0.0, 0.0, 0.0],
            rho: 1.0,
            dt: 1.0 / 255.0,
            t_end: 1.0,
            alpha: 0.5,
            probes: vec![Probe::All],
            report_times: vec![1.0],
        },
        "problem4" => ProblemDefaults {
            id: "problem4",
            mesh: Some(MeshRecipe::Rectangle { nx: 16, ny: 16, x_range: [-10.0, 10.0], y_range: [-20.0, 20.0] }),
            m: [1.0, 1.0, 1.0],
            rho: 1.0,
            dt: 0.1 / 99.0,
            t_end: 0.1,
            alpha: 0.5,
            probes: vec![line(10.0)],
            report_times: vec![0.1],
        },
        "problem5" => ProblemDefaults {
            id: "problem5",
            mesh: None,
            m: [2.0, 1.0, 1.0],
            rho: 1.0,
            dt: 0.2 / 255.0,
            t_end: 0.2,
            alpha: 0.5,
            probes: vec![line(0.0)],
            report_times: vec![0.2],
        },
        "problem6" => ProblemDefaults {
            id: "problem6",
            mesh: None,
            m: [0.0, 0.0, 0.0],
            rho: 1.0,
            dt: 10.0 / 255.0,
            t_end: 10.0,
            alpha: 0.5,
            probes: vec![line(0.0)],
            report_times: vec![10.0],
        },
        other => return Err(Error::Config(format!("unknown problem {other:?}"))),
    };
    Ok(d)
}

/// Builds the problem instance for the given order and scheme. Analytical
/// solutions are attached only for the Caputo scheme.
pub fn instantiate(id: &str, alpha: f64, kind: SchemeKind, rho: f64, n_roots: usize) -> Result<Arc<dyn Problem>> {
    let exact = kind == SchemeKind::Caputo;
    Ok(match id {
        "problem1" => Arc::new(Problem1 { alpha, rho, exact }),
        "problem2" => Arc::new(Problem2 { series: RadialSeriesParams::disk(1.0, 2.0, rho, alpha, n_roots)?, exact }),
        "problem3" => Arc::new(Problem3 {
            series: RadialSeriesParams::annulus(1.0, 1.0, 2.0, rho, alpha, n_roots)?,
            exact,
        }),
        "problem4" => Arc::new(Problem4 { alpha, exact }),
        "problem5" => Arc::new(DirichletPatch { id: "problem5", value: 1.0 }),
        "problem6" => Arc::new(DirichletPatch { id: "problem6", value: 10.0 }),
        other => return Err(Error::Config(format!("unknown problem {other:?}"))),
    })
}

/// `φ = t^{2α} (1 − x²) e^{2x}`.
pub fn problem1_exact(p: Point2, t: f64, alpha: f64) -> f64 {
    t.powf(2.0 * alpha) * (1.0 - p.x * p.x) * (2.0 * p.x).exp()
}

/// Source consistent with [`problem1_exact`] for `m = [3, 1, 1]`.
pub fn problem1_source(p: Point2, t: f64, alpha: f64, rho: f64) -> f64 {
    let x = p.x;
    let e = (2.0 * x).exp();
    let phi = t.powf(2.0 * alpha) * (1.0 - x * x) * e;
    e * (1.0 - x * x) * t.powf(alpha) * gamma_unchecked(2.0 * alpha + 1.0) / gamma_unchecked(alpha + 1.0)
        - 2.0 * rho * t.powf(2.0 * alpha) * (1.0 - 4.0 * x - 2.0 * x * x) * e
        - phi * (1.0 - phi.powi(3))
}

/// `φ = 1 + t^α sin(x) / Γ(1+α)`.
pub fn problem4_exact(p: Point2, t: f64, alpha: f64) -> f64 {
    1.0 + t.powf(alpha) / gamma_unchecked(1.0 + alpha) * p.x.sin()
}

/// Source consistent with [`problem4_exact`] for `m = [1, 1, 1]`, `ρ = 1`.
pub fn problem4_source(p: Point2, t: f64, alpha: f64) -> f64 {
    let s = p.x.sin();
    let a = t.powf(alpha) / gamma_unchecked(1.0 + alpha);
    s + 2.0 * s * a + s * s * a * a
}

struct Problem1 {
    alpha: f64,
    rho: f64,
    exact: bool,
}

impl Problem for Problem1 {
    fn id(&self) -> &str {
        "problem1"
    }
    fn bc_kind(&self, tag: &str) -> Option<BcKind> {
        match tag {
            "left" | "right" => Some(BcKind::Dirichlet),
            "bottom" | "top" => Some(BcKind::Neumann),
            _ => None,
        }
    }
    fn bc_value(&self, tag: &str, _p: Point2, t: f64) -> f64 {
        match tag {
            "left" => t.powf(2.0 * self.alpha),
            _ => 0.0,
        }
    }
    fn source(&self, p: Point2, t: f64) -> f64 {
        problem1_source(p, t, self.alpha, self.rho)
    }
    fn initial(&self, _p: Point2) -> f64 {
        0.0
    }
    fn exact(&self, p: Point2, t: f64) -> Option<f64> {
        self.exact.then(|| problem1_exact(p, t, self.alpha))
    }
    fn has_exact(&self) -> bool {
        self.exact
    }
}

struct Problem4 {
    alpha: f64,
    exact: bool,
}

impl Problem for Problem4 {
    fn id(&self) -> &str {
        "problem4"
    }
    fn bc_kind(&self, tag: &str) -> Option<BcKind> {
        match tag {
            "left" | "right" => Some(BcKind::Dirichlet),
            "bottom" | "top" => Some(BcKind::Neumann),
            _ => None,
        }
    }
    fn bc_value(&self, tag: &str, p: Point2, t: f64) -> f64 {
        match tag {
            "left" | "right" => problem4_exact(p, t, self.alpha),
            _ => 0.0,
        }
    }
    fn source(&self, p: Point2, t: f64) -> f64 {
        problem4_source(p, t, self.alpha)
    }
    fn initial(&self, _p: Point2) -> f64 {
        1.0
    }
    fn exact(&self, p: Point2, t: f64) -> Option<f64> {
        self.exact.then(|| problem4_exact(p, t, self.alpha))
    }
    fn has_exact(&self) -> bool {
        self.exact
    }
}

/// Truncated radial series data for the disk and annulus benchmarks.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialSeriesParams {
    /// Prescribed value on the Dirichlet circle.
    pub value: f64,
    pub r_in: f64,
    pub r_out: f64,
    pub rho: f64,
    pub alpha: f64,
    pub roots: Vec<f64>,
}

impl RadialSeriesParams {
    /// Disk of radius `radius`: roots `η_i` of `J₀(η) = 0`.
    pub fn disk(c0: f64, radius: f64, rho: f64, alpha: f64, n_roots: usize) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::invalid("disk radius must be positive"));
        }
        let roots = find_roots(RootEquation::J0Zero, n_roots)?;
        Ok(Self { value: c0, r_in: 0.0, r_out: radius, rho, alpha, roots })
    }

    /// Annulus `r_in ≤ r ≤ r_out`: roots `k_i` of the cross-product equation.
    pub fn annulus(phi0: f64, r_in: f64, r_out: f64, rho: f64, alpha: f64, n_roots: usize) -> Result<Self> {
        if !(r_in > 0.0 && r_out > r_in) {
            return Err(Error::invalid("annulus needs 0 < r_in < r_out"));
        }
        let roots = find_roots(RootEquation::CrossProduct { lambda: r_out / r_in }, n_roots)?;
        Ok(Self { value: phi0, r_in, r_out, rho, alpha, roots })
    }

    /// Disk series coefficients `E_α(−κ²η_i²) / (η_i J₁(η_i))` at time `t`.
    pub fn disk_coefficients(&self, t: f64) -> Result<Vec<f64>> {
        let scale = self.rho * t.powf(self.alpha) / (self.r_out * self.r_out);
        self.roots
            .iter()
            .map(|&eta| Ok(mittag_leffler(self.alpha, -scale * eta * eta)? / (eta * j1(eta))))
            .collect()
    }

    /// `c₀ (1 − 2 Σ coeff_i J₀(d η_i))` with `d = |r| / R`.
    pub fn disk_value(&self, coeffs: &[f64], r: f64) -> f64 {
        let d = (r / self.r_out).clamp(0.0, 1.0);
        let sum: f64 = self.roots.iter().zip(coeffs).map(|(&eta, &c)| c * j0(d * eta)).sum();
        self.value * (1.0 - 2.0 * sum)
    }

    /// Annulus series coefficients `J₁²(k)/(J₁²(k) − J₀²(λk)) E_α(−k² τ^α)`.
    pub fn annulus_coefficients(&self, t: f64) -> Result<Vec<f64>> {
        let lambda = self.r_out / self.r_in;
        let tau_alpha = self.rho * t.powf(self.alpha) / (self.r_in * self.r_in);
        self.roots
            .iter()
            .map(|&k| {
                let a = j1(k).powi(2);
                let b = j0(lambda * k).powi(2);
                Ok(a / (a - b) * mittag_leffler(self.alpha, -k * k * tau_alpha)?)
            })
            .collect()
    }

    /// `φ₀ (1 − π Σ coeff_i U₀(d k_i))` with `d = |r| / R_in`.
    pub fn annulus_value(&self, coeffs: &[f64], r: f64) -> f64 {
        let lambda = self.r_out / self.r_in;
        let d = (r / self.r_in).clamp(1.0, lambda);
        let sum: f64 = self
            .roots
            .iter()
            .zip(coeffs)
            .map(|(&k, &c)| {
                let u0 = j0(d * k) * y0(lambda * k) - j0(lambda * k) * y0(d * k);
                c * u0
            })
            .sum();
        self.value * (1.0 - PI * sum)
    }
}

struct Problem2 {
    series: RadialSeriesParams,
    exact: bool,
}

impl Problem for Problem2 {
    fn id(&self) -> &str {
        "problem2"
    }
    fn bc_kind(&self, tag: &str) -> Option<BcKind> {
        (tag == "rim").then_some(BcKind::Dirichlet)
    }
    fn bc_value(&self, _tag: &str, _p: Point2, _t: f64) -> f64 {
        self.series.value
    }
    fn initial(&self, _p: Point2) -> f64 {
        0.0
    }
    fn exact(&self, p: Point2, t: f64) -> Option<f64> {
        self.exact_many(&[p], t).map(|v| v[0])
    }
    fn has_exact(&self) -> bool {
        self.exact
    }
    fn exact_many(&self, points: &[Point2], t: f64) -> Option<Vec<f64>> {
        if !self.exact {
            return None;
        }
        let c = self.series.disk_coefficients(t).ok()?;
        Some(points.iter().map(|p| self.series.disk_value(&c, p.norm())).collect())
    }
}

struct Problem3 {
    series: RadialSeriesParams,
    exact: bool,
}

impl Problem for Problem3 {
    fn id(&self) -> &str {
        "problem3"
    }
    fn bc_kind(&self, tag: &str) -> Option<BcKind> {
        match tag {
            "inner" => Some(BcKind::Neumann),
            "outer" => Some(BcKind::Dirichlet),
            _ => None,
        }
    }
    fn bc_value(&self, tag: &str, _p: Point2, _t: f64) -> f64 {
        if tag == "outer" {
            self.series.value
        } else {
            0.0
        }
    }
    fn initial(&self, _p: Point2) -> f64 {
        0.0
    }
    fn exact(&self, p: Point2, t: f64) -> Option<f64> {
        self.exact_many(&[p], t).map(|v| v[0])
    }
    fn has_exact(&self) -> bool {
        self.exact
    }
    fn exact_many(&self, points: &[Point2], t: f64) -> Option<Vec<f64>> {
        if !self.exact {
            return None;
        }
        let c = self.series.annulus_coefficients(t).ok()?;
        Some(points.iter().map(|p| self.series.annulus_value(&c, p.norm())).collect())
    }
}

/// Imported geometry with a constant Dirichlet value on tag `s_r1` and zero
/// flux on every other tag.
struct DirichletPatch {
    id: &'static str,
    value: f64,
}

impl Problem for DirichletPatch {
    fn id(&self) -> &str {
        self.id
    }
    fn bc_kind(&self, tag: &str) -> Option<BcKind> {
        Some(if tag == "s_r1" { BcKind::Dirichlet } else { BcKind::Neumann })
    }
    fn bc_value(&self, tag: &str, _p: Point2, _t: f64) -> f64 {
        if tag == "s_r1" {
            self.value
        } else {
            0.0
        }
    }
    fn initial(&self, _p: Point2) -> f64 {
        0.0
    }
}

/// Constant boundary values per tag, constant initial field and source.
#[derive(Clone, Debug, PartialEq)]
pub struct CustomProblem {
    pub bcs: BTreeMap<String, (BcKind, f64)>,
    pub initial: f64,
    pub source: f64,
}

impl Problem for CustomProblem {
    fn id(&self) -> &str {
        "custom"
    }
    fn bc_kind(&self, tag: &str) -> Option<BcKind> {
        self.bcs.get(tag).map(|b| b.0)
    }
    fn bc_value(&self, tag: &str, _p: Point2, _t: f64) -> f64 {
        self.bcs.get(tag).map_or(0.0, |b| b.1)
    }
    fn source(&self, _p: Point2, _t: f64) -> f64 {
        self.source
    }
    fn initial(&self, _p: Point2) -> f64 {
        self.initial
    }
}
