//! Degrees of freedom, sparse assembly of the condensed subdomain equations
//! and the sparse direct solve.
//!
//! Every subdomain contributes its eight rows `H̄ φ − Ḡ q = b̄`. Outer nodes
//! carry one unknown (q on Dirichlet pieces, φ on Neumann pieces); the two
//! nodes of an interface pair share one φ and one q unknown, the q entering
//! with `+1` in the lower-numbered quad and `−1` in the other.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::linalg::LuError;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use rayon::prelude::*;

use crate::condense::CondensedBlock;
use crate::error::{Error, Result};
use crate::kernels::Integrator;
use crate::mesh::{EdgeKind, Mesh, Point2, Topology};
use crate::subdomain::collocation_set;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BcKind {
    Dirichlet,
    Neumann,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PhiSlot {
    Unknown(usize),
    Known,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum QSlot {
    Unknown { dof: usize, sign: f64 },
    Known,
}

/// Collocation geometry of one boundary node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodeInfo {
    pub point: Point2,
    pub normal: Point2,
    /// Outer tag index into [`Mesh::tags`]; `None` on interfaces.
    pub tag: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct DofMap {
    pub phi: Vec<[PhiSlot; 8]>,
    pub q: Vec<[QSlot; 8]>,
    pub nodes: Vec<[NodeInfo; 8]>,
    /// Cell collocation points per quad.
    pub cells: Vec<[Point2; 4]>,
    pub n_dofs: usize,
    /// `(quad, node)` that introduced each dof.
    pub dof_origin: Vec<(usize, usize)>,
}

/// Prescribed boundary values at the current time level.
#[derive(Clone, Debug, PartialEq)]
pub struct KnownValues {
    pub phi: Vec<[f64; 8]>,
    pub q: Vec<[f64; 8]>,
}

impl KnownValues {
    pub fn zeros(n_quads: usize) -> Self {
        Self { phi: vec![[0.0; 8]; n_quads], q: vec![[0.0; 8]; n_quads] }
    }
}

pub fn build_dof_map(
    mesh: &Mesh,
    topology: &Topology,
    bc_kind: impl Fn(&str) -> Option<BcKind>,
    integrator: &Integrator,
) -> Result<DofMap> {
    let nq = mesh.quad_count();
    let mut phi = vec![[PhiSlot::Known; 8]; nq];
    let mut q = vec![[QSlot::Known; 8]; nq];
    let mut nodes = Vec::with_capacity(nq);
    let mut cells = Vec::with_capacity(nq);
    for quad in 0..nq {
        let c = collocation_set(&mesh.geometry(quad), integrator);
        let mut info = [NodeInfo { point: Point2::default(), normal: Point2::default(), tag: None }; 8];
        for k in 0..8 {
            let tag = match mesh.edge_kinds[quad][k / 2] {
                EdgeKind::Outer { tag } => Some(tag),
                EdgeKind::Interface { .. } => None,
            };
            info[k] = NodeInfo { point: c.boundary[k], normal: c.normals[k], tag };
        }
        nodes.push(info);
        cells.push(c.cell);
    }

    let mut kinds = Vec::with_capacity(mesh.tags.len());
    for name in &mesh.tags {
        kinds.push(bc_kind(name).ok_or_else(|| Error::Config(format!("no boundary condition for tag {name:?}")))?);
    }

    let tol = 1e-9 * mesh.diameter();
    let mut n_dofs = 0;
    let mut origin = Vec::new();
    let mut next = |qd: usize, k: usize, origin: &mut Vec<(usize, usize)>| {
        origin.push((qd, k));
        n_dofs += 1;
        n_dofs - 1
    };
    let mut paired = 0usize;
    for quad in 0..nq {
        for e in 0..4 {
            match mesh.edge_kinds[quad][e] {
                EdgeKind::Outer { tag } => {
                    for b in 0..2 {
                        let k = 2 * e + b;
                        match kinds[tag] {
                            BcKind::Dirichlet => {
                                q[quad][k] = QSlot::Unknown { dof: next(quad, k, &mut origin), sign: 1.0 };
                            }
                            BcKind::Neumann => phi[quad][k] = PhiSlot::Unknown(next(quad, k, &mut origin)),
                        }
                    }
                }
                EdgeKind::Interface { neighbor, neighbor_edge } => {
                    if neighbor < quad {
                        continue;
                    }
                    paired += 1;
                    for b in 0..2 {
                        let k = 2 * e + b;
                        let kn = 2 * neighbor_edge + (1 - b);
                        let (pa, pb) = (nodes[quad][k].point, nodes[neighbor][kn].point);
                        if pa.dist(pb) > tol {
                            return Err(Error::Mesh(format!(
                                "interface collocation points of quads {quad} and {neighbor} do not coincide (gap {:e})",
                                pa.dist(pb)
                            )));
                        }
                        let pd = next(quad, k, &mut origin);
                        let qd = next(quad, k, &mut origin);
                        phi[quad][k] = PhiSlot::Unknown(pd);
                        phi[neighbor][kn] = PhiSlot::Unknown(pd);
                        q[quad][k] = QSlot::Unknown { dof: qd, sign: 1.0 };
                        q[neighbor][kn] = QSlot::Unknown { dof: qd, sign: -1.0 };
                    }
                }
            }
        }
    }
    if paired != topology.pairs.len() {
        return Err(Error::Mesh(format!(
            "topology lists {} interfaces but the mesh links {paired}",
            topology.pairs.len()
        )));
    }
    if n_dofs != 8 * nq {
        return Err(Error::Dimension(format!("{n_dofs} unknowns for {} equations", 8 * nq)));
    }
    Ok(DofMap { phi, q, nodes, cells, n_dofs, dof_origin: origin })
}

impl DofMap {
    pub fn quad_count(&self) -> usize {
        self.phi.len()
    }

    /// Boundary φ and q of one quad from the global solution and the known values.
    pub fn local_values(&self, quad: usize, x: &[f64], known: &KnownValues) -> ([f64; 8], [f64; 8]) {
        let mut p = [0.0; 8];
        let mut f = [0.0; 8];
        for k in 0..8 {
            p[k] = match self.phi[quad][k] {
                PhiSlot::Unknown(d) => x[d],
                PhiSlot::Known => known.phi[quad][k],
            };
            f[k] = match self.q[quad][k] {
                QSlot::Unknown { dof, sign } => sign * x[dof],
                QSlot::Known => known.q[quad][k],
            };
        }
        (p, f)
    }
}

/// Sparse system in coordinate form with rows grouped by subdomain.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSystem {
    pub n: usize,
    pub entries: Vec<(usize, usize, f64)>,
    pub rhs: Vec<f64>,
}

impl SparseSystem {
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
        y
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; self.n]; self.n];
        for &(r, c, v) in &self.entries {
            a[r][c] += v;
        }
        a
    }

    pub fn row_nnz(&self) -> Vec<usize> {
        let mut seen = std::collections::BTreeSet::new();
        let mut counts = vec![0; self.n];
        for &(r, c, _) in &self.entries {
            if seen.insert((r, c)) {
                counts[r] += 1;
            }
        }
        counts
    }

    /// `‖A x − b‖∞ / ‖b‖∞` (absolute when `b = 0`).
    pub fn relative_residual(&self, x: &[f64]) -> f64 {
        let ax = self.matvec(x);
        let res = ax.iter().zip(&self.rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let bn = self.rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if bn > 0.0 {
            res / bn
        } else {
            res
        }
    }
}

pub fn assemble_global(blocks: &[CondensedBlock], dofs: &DofMap, known: &KnownValues) -> Result<SparseSystem> {
    if blocks.len() != dofs.quad_count() || known.phi.len() != blocks.len() || known.q.len() != blocks.len() {
        return Err(Error::Dimension(format!(
            "{} condensed blocks for {} subdomains",
            blocks.len(),
            dofs.quad_count()
        )));
    }
    let parts: Vec<(Vec<(usize, usize, f64)>, [f64; 8])> = blocks
        .par_iter()
        .enumerate()
        .map(|(quad, cb)| {
            let mut entries = Vec::with_capacity(128);
            let mut rhs = [0.0; 8];
            for k in 0..8 {
                let row = 8 * quad + k;
                let mut r = cb.bbar[k];
                for j in 0..8 {
                    match dofs.phi[quad][j] {
                        PhiSlot::Unknown(d) => entries.push((row, d, cb.hbar[(k, j)])),
                        PhiSlot::Known => r -= cb.hbar[(k, j)] * known.phi[quad][j],
                    }
                    match dofs.q[quad][j] {
                        QSlot::Unknown { dof, sign } => entries.push((row, dof, -sign * cb.gbar[(k, j)])),
                        QSlot::Known => r += cb.gbar[(k, j)] * known.q[quad][j],
                    }
                }
                rhs[k] = r;
            }
            (entries, rhs)
        })
        .collect();
    let mut entries = Vec::with_capacity(parts.iter().map(|p| p.0.len()).sum());
    let mut rhs = Vec::with_capacity(8 * blocks.len());
    for (e, r) in parts {
        entries.extend(e);
        rhs.extend_from_slice(&r);
    }
    Ok(SparseSystem { n: dofs.n_dofs, entries, rhs })
}

#[derive(Clone, Debug)]
pub struct SparseSolution {
    pub x: Vec<f64>,
    pub relative_residual: f64,
}

/// Sparse LU solver that reuses the symbolic analysis while the sparsity
/// pattern is unchanged and the numeric factors while the values are.
#[derive(Default)]
pub struct SparseSolver {
    symbolic: Option<(Vec<usize>, Vec<usize>, SymbolicLu<usize>)>,
    numeric: Option<(Vec<f64>, Lu<usize, f64>)>,
}

impl SparseSolver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn solve(&mut self, sys: &SparseSystem) -> Result<SparseSolution> {
        if sys.rhs.len() != sys.n {
            return Err(Error::Dimension(format!("rhs of length {} for {} unknowns", sys.rhs.len(), sys.n)));
        }
        if sys.n == 0 {
            return Ok(SparseSolution { x: Vec::new(), relative_residual: 0.0 });
        }
        let triplets: Vec<Triplet<usize, usize, f64>> =
            sys.entries.iter().map(|&(r, c, v)| Triplet::new(r, c, v)).collect();
        let mat = SparseColMat::<usize, f64>::try_new_from_triplets(sys.n, sys.n, &triplets)
            .map_err(|e| Error::Dimension(format!("sparse matrix construction failed: {e:?}")))?;
        let col_ptr = mat.symbolic().col_ptr().to_vec();
        let row_idx = mat.symbolic().row_idx().to_vec();
        let values = mat.val().to_vec();

        let reuse_numeric = matches!(
            (&self.symbolic, &self.numeric),
            (Some((cp, ri, _)), Some((v, _))) if *cp == col_ptr && *ri == row_idx && *v == values
        );
        if !reuse_numeric {
            let symbolic = match &self.symbolic {
                Some((cp, ri, s)) if *cp == col_ptr && *ri == row_idx => s.clone(),
                _ => {
                    let s = SymbolicLu::try_new(mat.symbolic())
                        .map_err(|e| Error::Dimension(format!("symbolic LU failed: {e:?}")))?;
                    self.symbolic = Some((col_ptr, row_idx, s.clone()));
                    s
                }
            };
            let lu = Lu::try_new_with_symbolic(symbolic, mat.as_ref()).map_err(lu_error)?;
            self.numeric = Some((values, lu));
        }
        let lu = &self.numeric.as_ref().expect("factorization present").1;
        let mut rhs = Mat::<f64>::from_fn(sys.n, 1, |i, _| sys.rhs[i]);
        lu.solve_in_place(rhs.as_mut());
        let x: Vec<f64> = (0..sys.n).map(|i| rhs[(i, 0)]).collect();
        check_solution(sys, x)
    }
}

fn lu_error(e: LuError) -> Error {
    match e {
        LuError::SymbolicSingular { index } => Error::SingularMatrix { dof: index },
        other => Error::Dimension(format!("sparse LU failed: {other:?}")),
    }
}

fn check_solution(sys: &SparseSystem, x: Vec<f64>) -> Result<SparseSolution> {
    if let Some(bad) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::SingularMatrix { dof: bad });
    }
    let a_norm = {
        let mut rows = vec![0.0; sys.n];
        for &(r, _, v) in &sys.entries {
            rows[r] += v.abs();
        }
        rows.into_iter().fold(0.0, f64::max)
    };
    let b_norm = sys.rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let (imax, x_max) = x.iter().enumerate().fold((0, 0.0f64), |m, (i, v)| if v.abs() > m.1 { (i, v.abs()) } else { m });
    if b_norm > 0.0 && x_max * a_norm > 1e14 * b_norm {
        return Err(Error::SingularMatrix { dof: imax });
    }
    let relative_residual = sys.relative_residual(&x);
    if relative_residual > 1e-6 {
        log::warn!("sparse solve residual {relative_residual:e} exceeds 1e-6");
    }
    Ok(SparseSolution { x, relative_residual })
}

pub fn solve_sparse(sys: &SparseSystem) -> Result<SparseSolution> {
    SparseSolver::new().solve(sys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{DiscontinuousLayout, QuadratureConfig};
    use crate::mesh::{build_topology, generate_rectangle};

    fn integ() -> Integrator {
        Integrator::new(DiscontinuousLayout::default(), QuadratureConfig::default()).unwrap()
    }

    fn count(d: &DofMap) -> (usize, usize, usize) {
        let mut phi_unknown = 0;
        let mut q_unknown = 0;
        let mut shared = 0;
        for quad in 0..d.quad_count() {
            for k in 0..8 {
                let ip = matches!(d.phi[quad][k], PhiSlot::Unknown(_));
                let iq = matches!(d.q[quad][k], QSlot::Unknown { .. });
                phi_unknown += ip as usize;
                q_unknown += iq as usize;
                shared += (ip && iq) as usize;
            }
        }
        (phi_unknown, q_unknown, shared)
    }

    #[test]
    fn single_quad_all_dirichlet() {
        let m = generate_rectangle(1, 1, (0.0, 1.0), (0.0, 1.0)).unwrap();
        let t = build_topology(&m).unwrap();
        let d = build_dof_map(&m, &t, |_| Some(BcKind::Dirichlet), &integ()).unwrap();
        assert_eq!(d.n_dofs, 8);
        assert_eq!(count(&d), (0, 8, 0));
    }

    #[test]
    fn two_quads_all_dirichlet() {
        let m = generate_rectangle(2, 1, (0.0, 2.0), (0.0, 1.0)).unwrap();
        let t = build_topology(&m).unwrap();
        let d = build_dof_map(&m, &t, |_| Some(BcKind::Dirichlet), &integ()).unwrap();
        assert_eq!(d.n_dofs, 16);
        // 12 outer q, 2 shared φ, 2 shared q; each shared dof is seen from both sides.
        assert_eq!(count(&d), (4, 16, 4));
    }

    #[test]
    fn mixed_conditions_on_two_by_two() {
        let m = generate_rectangle(2, 2, (0.0, 1.0), (0.0, 2.0)).unwrap();
        let t = build_topology(&m).unwrap();
        let bc = |tag: &str| match tag {
            "left" | "right" => Some(BcKind::Dirichlet),
            _ => Some(BcKind::Neumann),
        };
        let d = build_dof_map(&m, &t, bc, &integ()).unwrap();
        assert_eq!(d.n_dofs, 32);
        // 8 Dirichlet nodes (q), 8 Neumann nodes (φ), 4 interfaces × 2 node pairs.
        let (p, q, s) = count(&d);
        assert_eq!((p - s, q - s), (8, 8));
        assert_eq!(s, 16);
    }

    #[test]
    fn missing_condition_is_reported() {
        let m = generate_rectangle(1, 1, (0.0, 1.0), (0.0, 1.0)).unwrap();
        let t = build_topology(&m).unwrap();
        let err = build_dof_map(&m, &t, |tag| (tag != "top").then_some(BcKind::Neumann), &integ()).unwrap_err();
        assert!(err.to_string().contains("top"));
    }

    #[test]
    fn identity_system() {
        let n = 5;
        let sys = SparseSystem {
            n,
            entries: (0..n).map(|i| (i, i, 1.0)).collect(),
            rhs: vec![1.0, -2.0, 3.5, 0.0, 7.0],
        };
        let s = solve_sparse(&sys).unwrap();
        assert_eq!(s.x, sys.rhs);
    }

    #[test]
    fn duplicate_row_is_singular() {
        let sys = SparseSystem {
            n: 3,
            entries: vec![(0, 0, 1.0), (0, 1, 2.0), (1, 0, 1.0), (1, 1, 2.0), (2, 2, 1.0)],
            rhs: vec![1.0, 1.0, 1.0],
        };
        assert!(matches!(solve_sparse(&sys), Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn solver_reuses_factorization() {
        let sys = SparseSystem { n: 2, entries: vec![(0, 0, 2.0), (1, 1, 4.0), (0, 1, 1.0)], rhs: vec![3.0, 4.0] };
        let mut solver = SparseSolver::new();
        let a = solver.solve(&sys).unwrap();
        let mut sys2 = sys.clone();
        sys2.rhs = vec![1.0, 8.0];
        let b = solver.solve(&sys2).unwrap();
        assert_eq!(a.x, vec![1.0, 1.0]);
        assert_eq!(b.x, vec![-0.5, 2.0]);
        let mut sys3 = sys.clone();
        sys3.entries[0].2 = 1.0;
        let c = solver.solve(&sys3).unwrap();
        assert_eq!(c.x, vec![2.0, 1.0]);
    }
}
