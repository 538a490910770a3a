//! One-dimensional quadrature rules shared by the kernel integrator and the
//! special functions.

use nalgebra::{DMatrix, SymmetricEigen};

/// Nodes and weights of a rule on a fixed reference interval.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }
}

/// Gauss–Legendre rule with `n` points on `[-1, 1]`, by Newton iteration on
/// the three-term recurrence.
pub fn gauss_legendre(n: usize) -> GaussRule {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one point");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    GaussRule { nodes, weights }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 1 {
        return (x, 1.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss rule on `[0, 1]` for the weight `-ln u`: `∫₀¹ -ln(u) g(u) du ≈ Σ wᵢ g(uᵢ)`,
/// exact for polynomials of degree `2n - 1`.
///
/// Recurrence coefficients come from the Stieltjes procedure on a fine
/// discretization of the weight (dyadic intervals towards the origin, 20
/// Gauss points each), which is stable where the moment-based route is not.
pub fn gauss_log_weight(n: usize) -> GaussRule {
    assert!(n >= 1, "log-weighted rule needs at least one point");
    let base = gauss_legendre(20);
    let mut xs = Vec::new();
    let mut ws = Vec::new();
    for j in 0..90 {
        let hi = 0.5f64.powi(j);
        let lo = 0.5 * hi;
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        for (t, w) in base.iter() {
            let u = mid + half * t;
            xs.push(u);
            ws.push(half * w * (-u.ln()));
        }
    }

    let mut alpha = vec![0.0; n];
    let mut beta = vec![0.0; n];
    let mut p_prev = vec![0.0; xs.len()];
    let mut p_cur = vec![1.0; xs.len()];
    let mut norm_prev = 1.0;
    for k in 0..n {
        let norm: f64 = ws.iter().zip(&p_cur).map(|(w, p)| w * p * p).sum();
        let xnorm: f64 = ws.iter().zip(&p_cur).zip(&xs).map(|((w, p), x)| w * x * p * p).sum();
        alpha[k] = xnorm / norm;
        beta[k] = if k == 0 { norm } else { norm / norm_prev };
        let next: Vec<f64> = xs
            .iter()
            .zip(p_cur.iter().zip(&p_prev))
            .map(|(x, (pc, pp))| (x - alpha[k]) * pc - if k == 0 { 0.0 } else { beta[k] * pp })
            .collect();
        p_prev = std::mem::replace(&mut p_cur, next);
        norm_prev = norm;
    }

    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        jacobi[(k, k)] = alpha[k];
        if k + 1 < n {
            let b = beta[k + 1].sqrt();
            jacobi[(k, k + 1)] = b;
            jacobi[(k + 1, k)] = b;
        }
    }
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], beta[0] * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    GaussRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

const GK15_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK15_KRONROD: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GK15_GAUSS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = GK15_KRONROD[7] * fc;
    let mut gauss = GK15_GAUSS[3] * fc;
    for i in 0..7 {
        let x = h * GK15_NODES[i];
        let s = f(c - x) + f(c + x);
        kron += GK15_KRONROD[i] * s;
        if i % 2 == 1 {
            gauss += GK15_GAUSS[i / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod (7/15) integration by bisection. Returns the
/// value and the accumulated error estimate.
pub fn adaptive_gk15(f: impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64) -> (f64, f64) {
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        tol: f64,
        depth: usize,
    ) -> (f64, f64) {
        let (v, e) = gk15(f, a, b);
        if e <= tol || depth >= 60 || (b - a).abs() < 1e-300 {
            return (v, e);
        }
        let m = 0.5 * (a + b);
        let (v1, e1) = recurse(f, a, m, 0.5 * tol, depth + 1);
        let (v2, e2) = recurse(f, m, b, 0.5 * tol, depth + 1);
        (v1 + v2, e1 + e2)
    }
    recurse(&f, a, b, abs_tol, 0)
}
