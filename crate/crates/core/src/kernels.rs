//! Laplace fundamental solutions, discontinuous shape functions and the
//! edge/cell quadratures that feed the subdomain blocks.
//!
//! Edge integrals use Gauss-Legendre on straight segments with recursive
//! bisection near the collocation point and the exact logarithmic
//! antiderivative when the point lies on the edge. Cell integrals with the
//! collocation point inside or on the cell are split into triangles apexed
//! at that point; `ln r` is separated into `ln u` (handled by a log-weighted
//! Gauss rule) and a smooth remainder.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::mesh::{Point2, QuadGeometry};
use crate::quadrature::{gauss_legendre, gauss_log_weight, GaussRule};

const INV_2PI: f64 = 0.5 / PI;

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    pub regular_order: usize,
    pub near_singular_order: usize,
    pub near_field_ratio: f64,
    pub singular_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { regular_order: 8, near_singular_order: 16, near_field_ratio: 2.0, singular_subdivisions: 4 }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.regular_order < 2 || self.near_singular_order < 2 {
            return Err(Error::invalid("quadrature orders must be >= 2"));
        }
        if !(self.near_field_ratio > 0.0) {
            return Err(Error::invalid("near_field_ratio must be positive"));
        }
        if self.singular_subdivisions < 1 {
            return Err(Error::invalid("singular_subdivisions must be >= 1"));
        }
        Ok(())
    }
}

/// Placement of the discontinuous nodes: boundary nodes at `ξ = ±xi_c` on
/// each edge, cell nodes at `(±xi_c, ±xi_c)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscontinuousLayout {
    pub xi_c: f64,
}

pub const DEFAULT_XI_C: f64 = 0.6;

impl Default for DiscontinuousLayout {
    fn default() -> Self {
        Self { xi_c: DEFAULT_XI_C }
    }
}

/// Reference-square signs of the four cell nodes.
pub const CELL_NODE_SIGNS: [(f64, f64); 4] = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];

impl DiscontinuousLayout {
    pub fn new(xi_c: f64) -> Result<Self> {
        if !(xi_c > 0.0 && xi_c < 1.0) {
            return Err(Error::invalid(format!("xi_c must lie in (0, 1), got {xi_c}")));
        }
        Ok(Self { xi_c })
    }

    /// Edge parameter of boundary node `b ∈ {0, 1}`.
    pub fn edge_node_param(&self, b: usize) -> f64 {
        if b == 0 {
            -self.xi_c
        } else {
            self.xi_c
        }
    }

    /// Reference coordinates of cell node `i`.
    pub fn cell_node_ref(&self, i: usize) -> (f64, f64) {
        let (sx, sy) = CELL_NODE_SIGNS[i];
        (sx * self.xi_c, sy * self.xi_c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kernel {
    G,
    Q,
}

/// `G(r, r') = −ln|r − r'| / 2π`.
pub fn green_g(r: Point2, rp: Point2) -> Result<f64> {
    let d = r.dist(rp);
    if d == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    Ok(-d.ln() * INV_2PI)
}

/// `Q(r, r') = n'·∇_{r'}G = −(1/2π) n'·(r' − r) / |r' − r|²`.
pub fn green_q(r: Point2, rp: Point2, normal: Point2) -> Result<f64> {
    let d = rp - r;
    let d2 = d.dot(d);
    if d2 == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    Ok(-normal.dot(d) / d2 * INV_2PI)
}

pub fn edge_shape(xi: f64, layout: &DiscontinuousLayout) -> [f64; 2] {
    let c = layout.xi_c;
    [(c - xi) / (2.0 * c), (c + xi) / (2.0 * c)]
}

pub fn cell_shape(xi: f64, eta: f64, layout: &DiscontinuousLayout) -> [f64; 4] {
    let [a0, a1] = edge_shape(xi, layout);
    let [b0, b1] = edge_shape(eta, layout);
    [a0 * b0, a1 * b0, a1 * b1, a0 * b1]
}

/// Outward unit normal of a counter-clockwise edge from `a` to `b`.
pub fn edge_normal(a: Point2, b: Point2) -> Point2 {
    let d = b - a;
    let l = d.norm();
    Point2::new(d.y / l, -d.x / l)
}

fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let d = b - a;
    let l2 = d.dot(d);
    let t = if l2 > 0.0 { ((p - a).dot(d) / l2).clamp(0.0, 1.0) } else { 0.0 };
    p.dist(a + d * t)
}

/// Distance from `p` to a straight-sided quadrilateral; zero inside.
fn point_quad_distance(p: Point2, c: &[Point2; 4]) -> f64 {
    let mut winding = 0i32;
    let mut dmin = f64::INFINITY;
    for e in 0..4 {
        let (a, b) = (c[e], c[(e + 1) % 4]);
        dmin = dmin.min(point_segment_distance(p, a, b));
        if a.y <= p.y {
            if b.y > p.y && (b - a).cross(p - a) > 0.0 {
                winding += 1;
            }
        } else if b.y <= p.y && (b - a).cross(p - a) < 0.0 {
            winding -= 1;
        }
    }
    if winding != 0 {
        0.0
    } else {
        dmin
    }
}

fn f0(u: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        u * u.abs().ln() - u
    }
}

fn f1(u: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        0.5 * u * u * u.abs().ln() - 0.25 * u * u
    }
}

/// Quadrature engine with pre-built rules.
#[derive(Clone, Debug)]
pub struct Integrator {
    pub layout: DiscontinuousLayout,
    pub config: QuadratureConfig,
    regular: GaussRule,
    near: GaussRule,
    log: GaussRule,
}

impl Integrator {
    pub fn new(layout: DiscontinuousLayout, config: QuadratureConfig) -> Result<Self> {
        DiscontinuousLayout::new(layout.xi_c)?;
        config.validate()?;
        Ok(Self {
            layout,
            config,
            regular: gauss_legendre(config.regular_order),
            near: gauss_legendre(config.near_singular_order),
            log: gauss_log_weight((config.near_singular_order / 2).max(3)),
        })
    }

    /// `∫ K(z, r'(s)) N_b(s) |J| ds` over the straight edge `a → b` for both
    /// edge nodes.
    pub fn edge(&self, z: Point2, a: Point2, b: Point2, kernel: Kernel) -> Result<[f64; 2]> {
        let d = b - a;
        let len = d.norm();
        if !(len > 0.0) || !len.is_finite() {
            return Err(Error::ZeroLengthEdge);
        }
        let t = d * (1.0 / len);
        let rel = z - a;
        let s0 = 2.0 * rel.dot(t) / len - 1.0;
        let off = rel.cross(t);
        let tol = 1e-10;
        if off.abs() <= tol * len && s0.abs() <= 1.0 + tol {
            return Ok(match kernel {
                Kernel::Q => [0.0, 0.0],
                Kernel::G => self.edge_self_g(len, s0.clamp(-1.0, 1.0)),
            });
        }
        let normal = Point2::new(t.y, -t.x);
        let mut out = [0.0; 2];
        let dist = point_segment_distance(z, a, b);
        if dist >= self.config.near_field_ratio * len {
            self.edge_piece(z, a, d, normal, len, -1.0, 1.0, kernel, &self.regular, &mut out);
        } else {
            self.edge_near(z, a, d, normal, len, -1.0, 1.0, kernel, 0, &mut out);
        }
        Ok(out)
    }

    /// Exact integral of `G N_b` over an edge containing the collocation point
    /// at parameter `s0`.
    fn edge_self_g(&self, len: f64, s0: f64) -> [f64; 2] {
        let c = self.layout.xi_c;
        let u0 = 0.5 * len * (-1.0 - s0);
        let u1 = 0.5 * len * (1.0 - s0);
        let i0 = f0(u1) - f0(u0);
        let i1 = f1(u1) - f1(u0);
        let n = edge_shape(s0, &self.layout);
        let slope = 1.0 / (len * c);
        [-INV_2PI * (n[0] * i0 - slope * i1), -INV_2PI * (n[1] * i0 + slope * i1)]
    }

    #[allow(clippy::too_many_arguments)]
    fn edge_near(
        &self,
        z: Point2,
        a: Point2,
        d: Point2,
        normal: Point2,
        len: f64,
        sa: f64,
        sb: f64,
        kernel: Kernel,
        depth: usize,
        out: &mut [f64; 2],
    ) {
        let pa = a + d * (0.5 * (1.0 + sa));
        let pb = a + d * (0.5 * (1.0 + sb));
        let piece = 0.5 * len * (sb - sa);
        if depth >= 60 || point_segment_distance(z, pa, pb) >= self.config.near_field_ratio * piece {
            self.edge_piece(z, a, d, normal, len, sa, sb, kernel, &self.near, out);
        } else {
            let sm = 0.5 * (sa + sb);
            self.edge_near(z, a, d, normal, len, sa, sm, kernel, depth + 1, out);
            self.edge_near(z, a, d, normal, len, sm, sb, kernel, depth + 1, out);
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn edge_piece(
        &self,
        z: Point2,
        a: Point2,
        d: Point2,
        normal: Point2,
        len: f64,
        sa: f64,
        sb: f64,
        kernel: Kernel,
        rule: &GaussRule,
        out: &mut [f64; 2],
    ) {
        let mid = 0.5 * (sa + sb);
        let half = 0.5 * (sb - sa);
        let jac = 0.5 * len * half;
        for (x, w) in rule.iter() {
            let s = mid + half * x;
            let rp = a + d * (0.5 * (1.0 + s));
            let r = rp - z;
            let r2 = r.dot(r);
            let k = match kernel {
                Kernel::G => -0.5 * r2.ln() * INV_2PI,
                Kernel::Q => -normal.dot(r) / r2 * INV_2PI,
            };
            let n = edge_shape(s, &self.layout);
            let f = w * jac * k;
            out[0] += f * n[0];
            out[1] += f * n[1];
        }
    }

    /// `∫∫ G(z, r'(ξ,η)) N_i(ξ,η) |J| dξ dη` for the four cell nodes.
    pub fn cell(&self, z: Point2, quad: &QuadGeometry) -> Result<[f64; 4]> {
        let diam = quad.diameter();
        let dist = point_quad_distance(z, &quad.corners);
        let mut out = [0.0; 4];
        if dist <= 1e-12 * diam {
            let (xi, eta) = quad.inverse_map(z).ok_or_else(|| {
                Error::DegenerateQuad(format!("cannot locate ({}, {}) in reference coordinates", z.x, z.y))
            })?;
            let tol = 1e-9;
            if xi.abs() > 1.0 + tol || eta.abs() > 1.0 + tol {
                return Err(Error::DegenerateQuad("inverse map left the reference square".into()));
            }
            self.cell_singular(z, quad, (xi.clamp(-1.0, 1.0), eta.clamp(-1.0, 1.0)), &mut out)?;
        } else if dist >= self.config.near_field_ratio * diam {
            self.cell_tensor(z, quad, (-1.0, 1.0), (-1.0, 1.0), &self.regular, &mut out)?;
        } else {
            self.cell_near(z, quad, (-1.0, 1.0), (-1.0, 1.0), 0, &mut out)?;
        }
        Ok(out)
    }

    fn cell_near(
        &self,
        z: Point2,
        quad: &QuadGeometry,
        xr: (f64, f64),
        yr: (f64, f64),
        depth: usize,
        out: &mut [f64; 4],
    ) -> Result<()> {
        let corners = [
            quad.map(xr.0, yr.0),
            quad.map(xr.1, yr.0),
            quad.map(xr.1, yr.1),
            quad.map(xr.0, yr.1),
        ];
        let sub = QuadGeometry::new(corners);
        let dist = point_quad_distance(z, &corners);
        if depth >= 20 || dist >= self.config.near_field_ratio * sub.diameter() {
            return self.cell_tensor(z, quad, xr, yr, &self.near, out);
        }
        let xm = 0.5 * (xr.0 + xr.1);
        let ym = 0.5 * (yr.0 + yr.1);
        for (a, b) in [((xr.0, xm), (yr.0, ym)), ((xm, xr.1), (yr.0, ym)), ((xm, xr.1), (ym, yr.1)), ((xr.0, xm), (ym, yr.1))] {
            self.cell_near(z, quad, a, b, depth + 1, out)?;
        }
        Ok(())
    }

    fn cell_tensor(
        &self,
        z: Point2,
        quad: &QuadGeometry,
        xr: (f64, f64),
        yr: (f64, f64),
        rule: &GaussRule,
        out: &mut [f64; 4],
    ) -> Result<()> {
        let (xm, xh) = (0.5 * (xr.0 + xr.1), 0.5 * (xr.1 - xr.0));
        let (ym, yh) = (0.5 * (yr.0 + yr.1), 0.5 * (yr.1 - yr.0));
        for (gx, wx) in rule.iter() {
            let xi = xm + xh * gx;
            for (gy, wy) in rule.iter() {
                let eta = ym + yh * gy;
                let p = quad.map(xi, eta);
                let r2 = (p - z).dot(p - z);
                if r2 == 0.0 {
                    return Err(Error::CoincidentPoints);
                }
                let f = wx * wy * xh * yh * quad.jacobian(xi, eta) * (-0.5 * r2.ln() * INV_2PI);
                let n = cell_shape(xi, eta, &self.layout);
                for i in 0..4 {
                    out[i] += f * n[i];
                }
            }
        }
        Ok(())
    }

    fn cell_singular(&self, z: Point2, quad: &QuadGeometry, apex: (f64, f64), out: &mut [f64; 4]) -> Result<()> {
        let p = Point2::new(apex.0, apex.1);
        let sq = [
            Point2::new(-1.0, -1.0),
            Point2::new(1.0, -1.0),
            Point2::new(1.0, 1.0),
            Point2::new(-1.0, 1.0),
        ];
        let nsub = self.config.singular_subdivisions;
        for e in 0..4 {
            let (c0, c1) = (sq[e], sq[(e + 1) % 4]);
            if (c0 - p).cross(c1 - p) <= 1e-12 {
                continue;
            }
            for j in 0..nsub {
                let b0 = c0.lerp(c1, j as f64 / nsub as f64);
                let b1 = c0.lerp(c1, (j + 1) as f64 / nsub as f64);
                self.fan_piece(z, quad, p, b0, b1, out)?;
            }
        }
        Ok(())
    }

    /// Triangle `(p, b0, b1)` in reference space, parametrised as
    /// `p + u (b0 + v (b1 − b0) − p)` with Jacobian `u · area2`.
    fn fan_piece(&self, z: Point2, quad: &QuadGeometry, p: Point2, b0: Point2, b1: Point2, out: &mut [f64; 4]) -> Result<()> {
        let area2 = (b0 - p).cross(b1 - p);
        for (gv, wv) in self.near.iter() {
            let v = 0.5 * (1.0 + gv);
            let wv = 0.5 * wv;
            let dir = b0.lerp(b1, v) - p;
            // ln u part: ∫₀¹ ln(u) g(u) du = −Σ w g(u).
            for (u, wl) in self.log.iter() {
                let q = p + dir * u;
                let g = u * area2 * quad.jacobian(q.x, q.y);
                let f = wv * wl * g * INV_2PI;
                let n = cell_shape(q.x, q.y, &self.layout);
                for i in 0..4 {
                    out[i] += f * n[i];
                }
            }
            // Smooth remainder −(1/2π) ln(|r − z| / u).
            for (gu, wu) in self.near.iter() {
                let u = 0.5 * (1.0 + gu);
                let wu = 0.5 * wu;
                let q = p + dir * u;
                let x = quad.map(q.x, q.y);
                let r = x.dist(z);
                if r == 0.0 {
                    return Err(Error::CoincidentPoints);
                }
                let g = u * area2 * quad.jacobian(q.x, q.y);
                let f = -wv * wu * g * (r / u).ln() * INV_2PI;
                let n = cell_shape(q.x, q.y, &self.layout);
                for i in 0..4 {
                    out[i] += f * n[i];
                }
            }
        }
        Ok(())
    }
}

pub fn integrate_edge(
    collocation: Point2,
    a: Point2,
    b: Point2,
    kernel: Kernel,
    layout: &DiscontinuousLayout,
    config: &QuadratureConfig,
) -> Result<[f64; 2]> {
    Integrator::new(*layout, *config)?.edge(collocation, a, b, kernel)
}

pub fn integrate_cell(
    collocation: Point2,
    quad: &QuadGeometry,
    layout: &DiscontinuousLayout,
    config: &QuadratureConfig,
) -> Result<[f64; 4]> {
    Integrator::new(*layout, *config)?.cell(collocation, quad)
}
