//! Elimination of the four cell unknowns of a subdomain for one lagging
//! iterate.
//!
//! Cell rows: `(I + S_dd) φ_D = G_db q − H_db φ + b_dd`.
//! Boundary rows: `H_bb φ − G_bb q + S_bd φ_D = b_bd`.
//! Substituting the first into the second gives `H̄ φ − Ḡ q = b̄`.

use crate::error::{Error, Result};
use crate::subdomain::{Mat4, Mat48, Mat8, Mat84, SubdomainMatrices, Vec4, Vec8};

/// Coefficients of `N(φ) = φ (c − d φ^b)` and the diffusivity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NonlinearParams {
    /// `[b, c, d]`.
    pub m: [f64; 3],
    pub rho: f64,
}

impl NonlinearParams {
    pub fn new(m: [f64; 3], rho: f64) -> Result<Self> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::invalid(format!("rho must be positive, got {rho}")));
        }
        if !(m[0] >= 0.0) || m.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("m = {m:?} needs finite entries and b >= 0")));
        }
        Ok(Self { m, rho })
    }

    pub fn is_linear(&self) -> bool {
        self.m[1] == 0.0 && self.m[2] == 0.0
    }
}

/// Diagonal of the lagged reaction matrix: `c − d (φ_i)^b`.
pub fn nonlinear_matrix_m(m: &[f64; 3], phi_k: &Vec4) -> Result<Vec4> {
    let [b, c, d] = *m;
    let mut out = Vec4::zeros();
    for i in 0..4 {
        let p = phi_k[i];
        let pow = if d == 0.0 {
            0.0
        } else if b == 0.0 {
            1.0
        } else if p < 0.0 && b.fract() != 0.0 {
            return Err(Error::NegativeBase { value: p, exponent: b });
        } else if b.fract() == 0.0 && b.abs() <= 64.0 {
            p.powi(b as i32)
        } else {
            p.powf(b)
        };
        out[i] = c - d * pow;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SAndB {
    pub s_dd: Mat4,
    pub s_bd: Mat84,
    pub b_dd: Vec4,
    pub b_bd: Vec8,
}

/// `S = (1/ρ) C (c_t I − M)`, `b = (1/ρ) C (c_t φ_n − c_t P + f)`.
pub fn build_s_and_b(
    blocks: &SubdomainMatrices,
    m_diag: &Vec4,
    c_time: f64,
    phi_n: &Vec4,
    p: &Vec4,
    f_next: &Vec4,
    rho: f64,
) -> SAndB {
    let inv_rho = 1.0 / rho;
    let mut right = Mat4::zeros();
    for i in 0..4 {
        right[(i, i)] = (c_time - m_diag[i]) * inv_rho;
    }
    let load = (phi_n - p) * (c_time * inv_rho) + f_next * inv_rho;
    SAndB {
        s_dd: blocks.c_dd * right,
        s_bd: blocks.c_bd * right,
        b_dd: blocks.c_dd * load,
        b_bd: blocks.c_bd * load,
    }
}

const HS_SINGULAR: f64 = 1e-12;

/// `(I + S)⁻¹` by rank-one accumulation over the columns of `S`:
/// with `s_r` the r-th column, `X_{r}⁻¹ = X_{r−1}⁻¹ − g (X_{r−1}⁻¹ s_r)(e_rᵀ X_{r−1}⁻¹)`,
/// `g = 1 / (1 + e_rᵀ X_{r−1}⁻¹ s_r)`. Falls back to direct elimination when a
/// denominator vanishes.
pub fn hs_inverse(s: &Mat4) -> Result<Mat4> {
    match hs_inverse_strict(s) {
        Ok(inv) => Ok(inv),
        Err(Error::SingularUpdate(den)) => {
            log::warn!("rank-one inverse hit |1 + trace| = {den:e}; using direct elimination");
            direct_inverse(&(Mat4::identity() + s)).ok_or(Error::SingularUpdate(den))
        }
        Err(e) => Err(e),
    }
}

/// Rank-one accumulation without fallback.
pub fn hs_inverse_strict(s: &Mat4) -> Result<Mat4> {
    let mut inv = Mat4::identity();
    for r in 0..4 {
        let u = inv * s.column(r);
        let den = 1.0 + u[r];
        if den.abs() < HS_SINGULAR || !den.is_finite() {
            return Err(Error::SingularUpdate(den.abs()));
        }
        let row = inv.row(r).into_owned();
        inv -= (u * row) * (1.0 / den);
    }
    Ok(inv)
}

/// Gauss-Jordan inverse with partial pivoting; `None` when singular.
pub fn direct_inverse(x: &Mat4) -> Option<Mat4> {
    let mut a = *x;
    let mut inv = Mat4::identity();
    let scale = x.amax();
    if !(scale > 0.0) || !scale.is_finite() {
        return None;
    }
    for col in 0..4 {
        let piv = (col..4).max_by(|&i, &j| a[(i, col)].abs().total_cmp(&a[(j, col)].abs()))?;
        if a[(piv, col)].abs() <= 1e-14 * scale {
            return None;
        }
        a.swap_rows(col, piv);
        inv.swap_rows(col, piv);
        let d = 1.0 / a[(col, col)];
        for j in 0..4 {
            a[(col, j)] *= d;
            inv[(col, j)] *= d;
        }
        for i in 0..4 {
            if i != col {
                let f = a[(i, col)];
                if f != 0.0 {
                    for j in 0..4 {
                        a[(i, j)] -= f * a[(col, j)];
                        inv[(i, j)] -= f * inv[(col, j)];
                    }
                }
            }
        }
    }
    Some(inv)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CondensedBlock {
    pub hbar: Mat8,
    pub gbar: Mat8,
    pub bbar: Vec8,
    pub x_inv: Mat4,
    pub s_bd: Mat84,
    pub b_dd: Vec4,
}

pub fn condense(blocks: &SubdomainMatrices, sb: &SAndB) -> Result<CondensedBlock> {
    let x_inv = hs_inverse(&sb.s_dd)?;
    let k: Mat84 = sb.s_bd * x_inv;
    let h_db: &Mat48 = &blocks.h_db;
    Ok(CondensedBlock {
        hbar: blocks.h_bb - k * h_db,
        gbar: blocks.g_bb - k * blocks.g_db,
        bbar: sb.b_bd - k * sb.b_dd,
        x_inv,
        s_bd: sb.s_bd,
        b_dd: sb.b_dd,
    })
}

/// `φ_D = X⁻¹ (G_db q − H_db φ + b_dd)`.
pub fn recover_interior(cond: &CondensedBlock, blocks: &SubdomainMatrices, phi_b: &Vec8, q_b: &Vec8) -> Vec4 {
    cond.x_inv * (blocks.g_db * q_b - blocks.h_db * phi_b + cond.b_dd)
}
