//! Geometry-static boundary and volume blocks of one quadrilateral
//! subdomain.
//!
//! Boundary node `2e + b` sits on local edge `e` at edge parameter `∓xi_c`;
//! cell node `i` sits at the reference point listed in
//! [`CELL_NODE_SIGNS`](crate::kernels::CELL_NODE_SIGNS). Boundary rows carry
//! the jump coefficient 0.5 on the diagonal of `H_bb`; the cell-row jump
//! coefficient 1 is the identity that appears in the condensation.

use nalgebra::SMatrix;
use rayon::prelude::*;

use crate::error::Result;
use crate::kernels::{Integrator, Kernel};
use crate::mesh::{Mesh, Point2, QuadGeometry};

pub type Mat8 = SMatrix<f64, 8, 8>;
pub type Mat84 = SMatrix<f64, 8, 4>;
pub type Mat48 = SMatrix<f64, 4, 8>;
pub type Mat4 = SMatrix<f64, 4, 4>;
pub type Vec8 = SMatrix<f64, 8, 1>;
pub type Vec4 = SMatrix<f64, 4, 1>;

pub const BOUNDARY_JUMP: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollocationSet {
    pub boundary: [Point2; 8],
    /// Outward unit normal at each boundary node.
    pub normals: [Point2; 8],
    pub cell: [Point2; 4],
}

pub fn collocation_set(quad: &QuadGeometry, integrator: &Integrator) -> CollocationSet {
    let layout = integrator.layout;
    let mut boundary = [Point2::default(); 8];
    let mut normals = [Point2::default(); 8];
    for e in 0..4 {
        let (a, b) = quad.edge(e);
        let n = crate::kernels::edge_normal(a, b);
        for nb in 0..2 {
            let s = layout.edge_node_param(nb);
            boundary[2 * e + nb] = a.lerp(b, 0.5 * (1.0 + s));
            normals[2 * e + nb] = n;
        }
    }
    let cell = std::array::from_fn(|i| {
        let (x, y) = layout.cell_node_ref(i);
        quad.map(x, y)
    });
    CollocationSet { boundary, normals, cell }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubdomainMatrices {
    pub h_bb: Mat8,
    pub g_bb: Mat8,
    pub c_bd: Mat84,
    pub h_db: Mat48,
    pub g_db: Mat48,
    pub c_dd: Mat4,
}

pub fn assemble_subdomain(quad: &QuadGeometry, integrator: &Integrator) -> Result<SubdomainMatrices> {
    quad.validate()?;
    let colloc = collocation_set(quad, integrator);
    let points: Vec<Point2> = colloc.boundary.iter().chain(colloc.cell.iter()).copied().collect();
    let mut h = SMatrix::<f64, 12, 8>::zeros();
    let mut g = SMatrix::<f64, 12, 8>::zeros();
    let mut c = SMatrix::<f64, 12, 4>::zeros();
    for (k, &z) in points.iter().enumerate() {
        for e in 0..4 {
            let (a, b) = quad.edge(e);
            let hq = integrator.edge(z, a, b, Kernel::Q)?;
            let hg = integrator.edge(z, a, b, Kernel::G)?;
            for nb in 0..2 {
                h[(k, 2 * e + nb)] += hq[nb];
                g[(k, 2 * e + nb)] += hg[nb];
            }
        }
        let cv = integrator.cell(z, quad)?;
        for i in 0..4 {
            c[(k, i)] = cv[i];
        }
    }
    for k in 0..8 {
        h[(k, k)] += BOUNDARY_JUMP;
    }
    Ok(SubdomainMatrices {
        h_bb: h.fixed_view::<8, 8>(0, 0).into_owned(),
        g_bb: g.fixed_view::<8, 8>(0, 0).into_owned(),
        c_bd: c.fixed_view::<8, 4>(0, 0).into_owned(),
        h_db: h.fixed_view::<4, 8>(8, 0).into_owned(),
        g_db: g.fixed_view::<4, 8>(8, 0).into_owned(),
        c_dd: c.fixed_view::<4, 4>(8, 0).into_owned(),
    })
}

/// Blocks for every quad of the mesh, in quad order.
pub fn assemble_all(mesh: &Mesh, integrator: &Integrator) -> Result<Vec<SubdomainMatrices>> {
    (0..mesh.quad_count())
        .into_par_iter()
        .map(|q| assemble_subdomain(&mesh.geometry(q), integrator))
        .collect()
}

impl SubdomainMatrices {
    /// Largest `|c(z) + Σ_l H_kl|` over all twelve collocation rows.
    pub fn equipotential_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..8 {
            worst = worst.max(self.h_bb.row(k).sum().abs());
        }
        for i in 0..4 {
            worst = worst.max((1.0 + self.h_db.row(i).sum()).abs());
        }
        worst
    }
}
