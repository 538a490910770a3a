//! Discrete fractional time derivatives on a uniform grid.
//!
//! Both schemes advance `φ_n → φ_{n+1}` with a derivative of the form
//! `coeff(n) · (φ_{n+1} − φ_n + P_n)` where `P_n` collects the memory of all
//! earlier increments.

use crate::error::{Error, Result};
use crate::reference::special::gamma_unchecked;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    Caputo,
    /// Fractal-fractional derivative in the Riemann-Liouville sense.
    FractalFractional,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FractionalScheme {
    pub kind: SchemeKind,
    pub alpha: f64,
    pub beta: f64,
    pub dt: f64,
}

impl FractionalScheme {
    pub fn new(kind: SchemeKind, alpha: f64, beta: f64, dt: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::invalid(format!("alpha must lie strictly inside (0, 1), got {alpha}")));
        }
        if kind == SchemeKind::FractalFractional && !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::invalid(format!("beta must lie in (0, 1], got {beta}")));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::invalid(format!("dt must be positive, got {dt}")));
        }
        Ok(Self { kind, alpha, beta, dt })
    }

    pub fn caputo(alpha: f64, dt: f64) -> Result<Self> {
        Self::new(SchemeKind::Caputo, alpha, 1.0, dt)
    }

    pub fn fractal_fractional(alpha: f64, beta: f64, dt: f64) -> Result<Self> {
        Self::new(SchemeKind::FractalFractional, alpha, beta, dt)
    }

    /// `c_α = 1 / (Δt^α Γ(2−α))`.
    pub fn caputo_coeff(&self) -> f64 {
        1.0 / (self.dt.powf(self.alpha) * gamma_unchecked(2.0 - self.alpha))
    }

    /// `c_{α,β,n} = Δt / (Γ(2−α) β Δt^{α+β} (n+1)^{β−1})`.
    pub fn ffp_coeff(&self, n: usize) -> f64 {
        let (a, b, dt) = (self.alpha, self.beta, self.dt);
        dt / (gamma_unchecked(2.0 - a) * b * dt.powf(a + b) * ((n + 1) as f64).powf(b - 1.0))
    }

    /// Coefficient multiplying `φ_{n+1} − φ_n + P_n` at step `n`.
    pub fn coeff(&self, n: usize) -> f64 {
        match self.kind {
            SchemeKind::Caputo => self.caputo_coeff(),
            SchemeKind::FractalFractional => self.ffp_coeff(n),
        }
    }

    /// Initial-value contribution to `P_n` (zero for Caputo).
    pub fn initial_term(&self, n: usize, phi0: f64) -> f64 {
        match self.kind {
            SchemeKind::Caputo => 0.0,
            SchemeKind::FractalFractional => {
                let a = self.alpha;
                phi0 * (1.0 - a) / (((n + 1) as f64).powf(a) * gamma_unchecked(1.0 - a))
            }
        }
    }
}

/// `B_{n,k,α} = (n+1−k)^{1−α} − (n−k)^{1−α}` for `0 ≤ k ≤ n−1`.
pub fn weight_b(n: usize, k: usize, alpha: f64) -> Result<f64> {
    if k >= n {
        return Err(Error::invalid(format!("history index {k} out of range for step {n}")));
    }
    Ok(weight_unchecked(n - k, alpha))
}

/// Weight for lag `j = n − k ≥ 1`.
fn weight_unchecked(j: usize, alpha: f64) -> f64 {
    let e = 1.0 - alpha;
    ((j + 1) as f64).powf(e) - (j as f64).powf(e)
}

/// All weights `B_{n,k,α}` for `k = 0..n`.
pub fn weights(n: usize, alpha: f64) -> Vec<f64> {
    (0..n).map(|k| weight_unchecked(n - k, alpha)).collect()
}

/// Per-node increment history `Δφ_k = φ_{k+1} − φ_k`, stored step-major.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct HistoryLedger {
    phi0: Vec<f64>,
    increments: Vec<Vec<f64>>,
}

impl HistoryLedger {
    pub fn new(phi0: Vec<f64>) -> Self {
        Self { phi0, increments: Vec::new() }
    }

    pub fn node_count(&self) -> usize {
        self.phi0.len()
    }

    /// Number of committed steps.
    pub fn len(&self) -> usize {
        self.increments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.increments.is_empty()
    }

    pub fn phi0(&self) -> &[f64] {
        &self.phi0
    }

    pub fn increments(&self, k: usize) -> &[f64] {
        &self.increments[k]
    }

    pub fn push(&mut self, increments: Vec<f64>) -> Result<()> {
        if increments.len() != self.phi0.len() {
            return Err(Error::Dimension(format!(
                "ledger holds {} nodes, increment has {}",
                self.phi0.len(),
                increments.len()
            )));
        }
        self.increments.push(increments);
        Ok(())
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.increments.len() < n {
            return Err(Error::HistoryTooShort { available: self.increments.len(), requested: n });
        }
        Ok(())
    }
}

/// Memory term `P_n` for one node.
pub fn history_term(scheme: &FractionalScheme, ledger: &HistoryLedger, n: usize, node: usize) -> Result<f64> {
    ledger.check(n)?;
    if node >= ledger.node_count() {
        return Err(Error::invalid(format!("node {node} outside ledger of {} nodes", ledger.node_count())));
    }
    let mut p = scheme.initial_term(n, ledger.phi0[node]);
    for k in 0..n {
        p += weight_unchecked(n - k, scheme.alpha) * ledger.increments[k][node];
    }
    Ok(p)
}

/// Memory terms `P_n` for every node of the ledger.
pub fn history_terms(scheme: &FractionalScheme, ledger: &HistoryLedger, n: usize) -> Result<Vec<f64>> {
    ledger.check(n)?;
    let mut p: Vec<f64> = ledger.phi0.iter().map(|&v| scheme.initial_term(n, v)).collect();
    for k in 0..n {
        let w = weight_unchecked(n - k, scheme.alpha);
        for (pi, di) in p.iter_mut().zip(&ledger.increments[k]) {
            *pi += w * di;
        }
    }
    Ok(p)
}

/// `coeff(n) · (φ_{n+1} − φ_n + P_n)`.
pub fn discrete_derivative(scheme: &FractionalScheme, phi_next: f64, phi_curr: f64, p: f64, n: usize) -> f64 {
    scheme.coeff(n) * (phi_next - phi_curr + p)
}

/// Direct evaluation of the Caputo derivative of the piecewise-linear
/// interpolant of `samples` (spacing `dt`) at `t_eval = samples.len()−1` steps:
/// each interval contributes its finite-difference rate times the exact
/// integral of `(t − τ)^{−α}` over that interval.
pub fn caputo_oracle(samples: &[f64], alpha: f64, dt: f64) -> f64 {
    if samples.len() < 2 {
        return 0.0;
    }
    let last = samples.len() - 1;
    let e = 1.0 - alpha;
    let mut sum = 0.0;
    for (k, w) in samples.windows(2).enumerate() {
        let rate = (w[1] - w[0]) / dt;
        // Lags from integers: a rounding-level remainder raised to 1−α is not small.
        let far = (last - k) as f64 * dt;
        let near = (last - k - 1) as f64 * dt;
        let kernel = (far.powf(e) - near.powf(e)) / e;
        sum += rate * kernel;
    }
    sum / gamma_unchecked(1.0 - alpha)
}
