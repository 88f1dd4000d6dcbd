//! Closed-form variance bounds for estimating `θ = vᵀφ`.

use serde::Serialize;

use crate::error::{QsnError, Result};
use crate::states::ghz_allocation;

const UNIT_TOL: f64 = 1e-9;
/// Entries smaller than this are dropped from the quasi-norm sum.
const TINY: f64 = 1e-300;

/// The estimation task: coefficients `v`, spectral-width constant `κ`,
/// particle budget `N` and repetition count `μ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearFunctional {
    v: Vec<f64>,
    kappa: f64,
    n: usize,
    mu: u64,
}

impl LinearFunctional {
    pub fn new(v: Vec<f64>, kappa: f64, n: usize, mu: u64) -> Result<Self> {
        if v.is_empty() {
            return Err(QsnError::InvalidFunctional(
                "empty coefficient vector".into(),
            ));
        }
        if let Some(k) = v.iter().position(|x| !x.is_finite() || *x < 0.0) {
            return Err(QsnError::InvalidFunctional(format!(
                "coefficient {k} must be finite and nonnegative"
            )));
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(QsnError::InvalidFunctional(format!(
                "|v|_2 = {norm}, expected 1"
            )));
        }
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(QsnError::InvalidFunctional(format!(
                "kappa must be positive, got {kappa}"
            )));
        }
        if n == 0 || mu == 0 {
            return Err(QsnError::InvalidFunctional(
                "N and mu must be positive".into(),
            ));
        }
        Ok(Self { v, kappa, n, mu })
    }

    /// `v = (1,…,1)/√d`.
    pub fn uniform(d: usize, kappa: f64, n: usize, mu: u64) -> Result<Self> {
        Self::new(vec![1.0 / (d as f64).sqrt(); d], kappa, n, mu)
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mu(&self) -> u64 {
        self.mu
    }

    pub fn d(&self) -> usize {
        self.v.len()
    }

    /// `μκ²N²`.
    fn scale(&self) -> f64 {
        self.mu as f64 * self.kappa * self.kappa * (self.n as f64).powi(2)
    }
}

/// `(Σ_k |v_k|^p)^{1/p}`; a quasi-norm for `p < 1`.
pub fn pnorm(v: &[f64], p: f64) -> Result<f64> {
    if v.is_empty() {
        return Err(QsnError::InvalidFunctional("empty vector".into()));
    }
    if !(p.is_finite() && p > 0.0) {
        return Err(QsnError::InvalidFunctional(format!(
            "p must be positive, got {p}"
        )));
    }
    let sum: f64 = v
        .iter()
        .map(|x| x.abs())
        .filter(|&x| x >= TINY)
        .map(|x| (p * x.ln()).exp())
        .sum();
    if sum == 0.0 {
        return Ok(0.0);
    }
    Ok((sum.ln() / p).exp())
}

/// `‖v‖_{2/3}² = (Σ_k |v_k|^{2/3})³`.
pub fn two_thirds_norm_squared(v: &[f64]) -> Result<f64> {
    pnorm(v, 2.0 / 3.0).map(|x| x * x)
}

/// `‖v‖_{2/3}²/(μκ²N²)`, the best variance reachable with probes that are
/// separable across sensors.
pub fn separable_bound(f: &LinearFunctional) -> f64 {
    two_thirds_norm_squared(&f.v).expect("validated functional") / f.scale()
}

/// `‖v‖₁³/(μκ²N²)`, the weaker form of [`separable_bound`].
pub fn separable_bound_l1(f: &LinearFunctional) -> f64 {
    pnorm(&f.v, 1.0).expect("validated functional").powi(3) / f.scale()
}

/// `‖v‖₁²/(μκ²N²)`, reached by the GHZ-like network probe.
pub fn ghz_bound(f: &LinearFunctional) -> f64 {
    pnorm(&f.v, 1.0).expect("validated functional").powi(2) / f.scale()
}

/// Whether `N v_k / ‖v‖₁` is integral for every `k`, i.e. whether the GHZ
/// probe attaining [`ghz_bound`] can be built.
pub fn ghz_constructible(f: &LinearFunctional) -> bool {
    ghz_allocation(&f.v, f.n).is_ok()
}

/// `separable_bound / ghz_bound = ‖v‖_{2/3}²/‖v‖₁²`.
pub fn enhancement_ratio(f: &LinearFunctional) -> f64 {
    let l1 = pnorm(&f.v, 1.0).expect("validated functional");
    two_thirds_norm_squared(&f.v).expect("validated functional") / (l1 * l1)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundComparison {
    pub d: usize,
    pub n: usize,
    pub kappa: f64,
    pub mu: u64,
    pub separable_bound: f64,
    pub separable_bound_l1: f64,
    pub ghz_bound: f64,
    pub ratio: f64,
    pub ghz_constructible: bool,
}

impl BoundComparison {
    pub fn new(f: &LinearFunctional) -> Self {
        Self {
            d: f.d(),
            n: f.n,
            kappa: f.kappa,
            mu: f.mu,
            separable_bound: separable_bound(f),
            separable_bound_l1: separable_bound_l1(f),
            ghz_bound: ghz_bound(f),
            ratio: enhancement_ratio(f),
            ghz_constructible: ghz_constructible(f),
        }
    }
}
