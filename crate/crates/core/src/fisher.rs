//! Quantum and classical Fisher information.
//!
//! All QFIMs are evaluated at the fiducial point `φ = 0`, where the
//! derivative of the encoded state along parameter `k` is `-i[H_k, ρ]`.

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{QsnError, Result};
use crate::hilbert::{
    self, eigh_matrix, ComplexMatrix, ComplexVector, DensityOperator, HermitianOperator, PureState,
    C64,
};
use crate::network::{ParameterPoint, Partition, Probe, SensorNetwork, WeightMatrix};

/// Relative eigenvalue threshold (times the largest eigenvalue) below which
/// a QFIM direction counts as outside the support.
pub const RANK_TOL: f64 = 1e-10;
pub const SYMMETRY_TOL: f64 = 1e-10;
/// QFIM eigenvalues down to `-PSD_SLACK · max(1, λ_max)` are roundoff.
pub const PSD_SLACK: f64 = 1e-9;
/// Pairs of density eigenvalues with `p_i + p_j` below this (relative to the
/// largest) get a zero SLD entry.
pub const SLD_RANK_TOL: f64 = 1e-10;
/// Squared kernel weight above which a parameter is undetermined.
pub const UNDETERMINED_TOL: f64 = 1e-8;
/// Off-diagonal block magnitude treated as zero in the block-inverse check.
pub const BLOCK_EQUALITY_TOL: f64 = 1e-10;
pub const CFIM_STEP: f64 = 1e-5;
pub const CFIM_MIN_PROBABILITY: f64 = 1e-12;
pub const POVM_TOL: f64 = 1e-9;

/// A real symmetric positive semidefinite Fisher information matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Qfim {
    matrix: DMatrix<f64>,
    partition: Option<Partition>,
}

impl Qfim {
    pub fn new(matrix: DMatrix<f64>, partition: Option<Partition>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(QsnError::InvalidConfig(
                "QFIM must be a non-empty square matrix".into(),
            ));
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(QsnError::NonFinite("QFIM"));
        }
        if let Some(p) = &partition {
            if p.dim() != matrix.nrows() {
                return Err(QsnError::DimensionMismatch {
                    context: "QFIM partition",
                    expected: matrix.nrows(),
                    found: p.dim(),
                });
            }
        }
        let scale = matrix.amax().max(1.0);
        let asym = (&matrix - matrix.transpose()).amax();
        if asym > SYMMETRY_TOL * scale {
            return Err(QsnError::InvalidConfig(format!(
                "QFIM is not symmetric ({asym:e})"
            )));
        }
        let matrix = (&matrix + matrix.transpose()) * 0.5;
        let min = SymmetricEigen::new(matrix.clone()).eigenvalues.min();
        if min < -PSD_SLACK * scale {
            return Err(QsnError::InvalidConfig(format!(
                "QFIM is not PSD (min eigenvalue {min:e})"
            )));
        }
        Ok(Self { matrix, partition })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn partition(&self) -> Option<&Partition> {
        self.partition.as_ref()
    }

    pub fn with_partition(self, partition: Partition) -> Result<Self> {
        Self::new(self.matrix, Some(partition))
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = SymmetricEigen::new(self.matrix.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        v.sort_by(f64::total_cmp);
        v
    }

    fn require_partition(&self) -> Result<&Partition> {
        self.partition
            .as_ref()
            .ok_or_else(|| QsnError::InvalidConfig("QFIM carries no parameter partition".into()))
    }

    /// `F_[kk]`.
    pub fn block(&self, k: usize) -> Result<DMatrix<f64>> {
        let p = self.require_partition()?;
        if k >= p.num_blocks() {
            return Err(QsnError::IndexOutOfRange {
                what: "partition block",
                index: k,
                len: p.num_blocks(),
            });
        }
        let r = p.range(k);
        Ok(self
            .matrix
            .view((r.start, r.start), (r.len(), r.len()))
            .into_owned())
    }

    /// `[F⁻¹]_[kk]`; for singular `F` the pseudo-inverse restricted to the
    /// support is used and `singular` is set.
    pub fn inverse_block(&self, k: usize) -> Result<InverseBlock> {
        let p = self.require_partition()?;
        if k >= p.num_blocks() {
            return Err(QsnError::IndexOutOfRange {
                what: "partition block",
                index: k,
                len: p.num_blocks(),
            });
        }
        let spectral = Spectral::new(&self.matrix);
        let inv = spectral.pseudo_inverse();
        let r = p.range(k);
        Ok(InverseBlock {
            matrix: inv
                .view((r.start, r.start), (r.len(), r.len()))
                .into_owned(),
            singular: spectral.is_singular(),
        })
    }

    /// Largest off-diagonal-block entry in block row `k`.
    pub fn off_diagonal_norm(&self, k: usize) -> Result<f64> {
        let p = self.require_partition()?;
        let rk = p.range(k);
        let mut max = 0.0_f64;
        for i in rk.clone() {
            for j in 0..self.dim() {
                if !rk.contains(&j) {
                    max = max.max(self.matrix[(i, j)].abs());
                }
            }
        }
        Ok(max)
    }

    pub fn is_block_diagonal(&self, tol: f64) -> Result<bool> {
        let p = self.require_partition()?;
        for k in 0..p.num_blocks() {
            if self.off_diagonal_norm(k)? > tol {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InverseBlock {
    pub matrix: DMatrix<f64>,
    pub singular: bool,
}

/// Eigendecomposition of a real symmetric matrix split into support and
/// kernel by [`RANK_TOL`].
struct Spectral {
    values: Vec<f64>,
    vectors: DMatrix<f64>,
    threshold: f64,
}

impl Spectral {
    fn new(m: &DMatrix<f64>) -> Self {
        let e = SymmetricEigen::new(m.clone());
        let max = e.eigenvalues.max().max(0.0);
        Self {
            values: e.eigenvalues.iter().copied().collect(),
            vectors: e.eigenvectors,
            threshold: RANK_TOL * max,
        }
    }

    fn in_support(&self, i: usize) -> bool {
        self.values[i] > 0.0 && self.values[i] >= self.threshold
    }

    fn support_dim(&self) -> usize {
        (0..self.values.len())
            .filter(|&i| self.in_support(i))
            .count()
    }

    fn is_singular(&self) -> bool {
        self.support_dim() < self.values.len()
    }

    fn pseudo_inverse(&self) -> DMatrix<f64> {
        let n = self.values.len();
        let mut out = DMatrix::zeros(n, n);
        for i in (0..n).filter(|&i| self.in_support(i)) {
            let v = self.vectors.column(i);
            out += (v * v.transpose()) / self.values[i];
        }
        out
    }

    /// `‖P_ker e_k‖²` for each parameter.
    fn kernel_weights(&self) -> Vec<f64> {
        let n = self.values.len();
        (0..n)
            .map(|k| {
                (0..n)
                    .filter(|&i| !self.in_support(i))
                    .map(|i| self.vectors[(k, i)].powi(2))
                    .sum()
            })
            .collect()
    }

    fn kernel(&self) -> Vec<Vec<f64>> {
        (0..self.values.len())
            .filter(|&i| !self.in_support(i))
            .map(|i| self.vectors.column(i).iter().copied().collect())
            .collect()
    }
}

/// Symmetric logarithmic derivatives, one per parameter.
#[derive(Debug, Clone)]
pub struct SldSet {
    pub operators: Vec<HermitianOperator>,
}

impl SldSet {
    /// `max |∂_k ρ - (ρ L_k + L_k ρ)/2|` with `∂_k ρ = -i[H_k, ρ]`.
    pub fn residual(&self, rho: &DensityOperator, generators: &[HermitianOperator]) -> f64 {
        self.operators
            .iter()
            .zip(generators)
            .map(|(l, h)| {
                let d = derivative(rho.matrix(), h.matrix());
                let anti = (rho.matrix() * l.matrix() + l.matrix() * rho.matrix()).scale(0.5);
                hilbert::max_abs(&(d - anti))
            })
            .fold(0.0, f64::max)
    }
}

/// `-i [H, ρ]`.
pub fn derivative(rho: &ComplexMatrix, h: &ComplexMatrix) -> ComplexMatrix {
    (h * rho - rho * h) * C64::new(0.0, -1.0)
}

/// `F_mn = 4 Re⟨H_m ψ|H_n ψ⟩ - 4⟨H_m⟩⟨H_n⟩` from the vectors `H_k |ψ⟩`.
fn qfim_from_actions(psi: &ComplexVector, actions: &[ComplexVector]) -> DMatrix<f64> {
    let d = actions.len();
    let means: Vec<f64> = actions.iter().map(|a| psi.dotc(a).re).collect();
    let mut f = DMatrix::zeros(d, d);
    for m in 0..d {
        for n in m..d {
            let value = 4.0 * actions[m].dotc(&actions[n]).re - 4.0 * means[m] * means[n];
            f[(m, n)] = value;
            f[(n, m)] = value;
        }
    }
    f
}

/// Pure-state QFIM for generators given on the full space.
pub fn qfim_pure(psi: &PureState, generators: &[HermitianOperator]) -> Result<Qfim> {
    if generators.is_empty() {
        return Err(QsnError::InvalidConfig("no generators".into()));
    }
    let actions = generators
        .iter()
        .map(|h| {
            if h.dim() != psi.dim() {
                return Err(QsnError::DimensionMismatch {
                    context: "generator vs state",
                    expected: psi.dim(),
                    found: h.dim(),
                });
            }
            Ok(h.matrix() * psi.amplitudes())
        })
        .collect::<Result<Vec<_>>>()?;
    Qfim::new(qfim_from_actions(psi.amplitudes(), &actions), None)
}

/// Pure-state QFIM of a network probe, applying generators sensor-locally.
pub fn qfim_pure_network(network: &SensorNetwork, psi: &PureState) -> Result<Qfim> {
    let actions = network.generator_actions(psi)?;
    Qfim::new(
        qfim_from_actions(psi.amplitudes(), &actions),
        Some(network.partition().clone()),
    )
}

/// SLD-based QFIM `F_kl = Re Tr[ρ (L_k L_l + L_l L_k)] / 2`.
///
/// The SLDs are solved in the eigenbasis of `ρ`: with `ρ = Σ p_i |i⟩⟨i|`,
/// `L_ij = 2 (∂ρ)_ij / (p_i + p_j)` and zero where `p_i + p_j` vanishes.
pub fn qfim_mixed(
    rho: &DensityOperator,
    generators: &[HermitianOperator],
) -> Result<(Qfim, SldSet)> {
    if generators.is_empty() {
        return Err(QsnError::InvalidConfig("no generators".into()));
    }
    for h in generators {
        if h.dim() != rho.dim() {
            return Err(QsnError::DimensionMismatch {
                context: "generator vs state",
                expected: rho.dim(),
                found: h.dim(),
            });
        }
    }
    let n = rho.dim();
    let e = eigh_matrix(rho.matrix());
    let p = &e.values;
    let v = &e.vectors;
    let v_adj = v.adjoint();
    let cutoff = SLD_RANK_TOL * p.iter().copied().fold(0.0, f64::max);

    let mut slds_eigen = Vec::with_capacity(generators.len());
    for h in generators {
        let h_eig = &v_adj * h.matrix() * v;
        let mut l = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let denom = p[i] + p[j];
                if denom > cutoff && denom > 0.0 {
                    // (∂ρ)_ij = -i H_ij (p_j - p_i) in the eigenbasis
                    let d = h_eig[(i, j)] * C64::new(0.0, -(p[j] - p[i]));
                    l[(i, j)] = d * (2.0 / denom);
                }
            }
        }
        slds_eigen.push(l);
    }

    let d = generators.len();
    let mut f = DMatrix::zeros(d, d);
    for k in 0..d {
        for m in k..d {
            let (a, b) = (&slds_eigen[k], &slds_eigen[m]);
            let mut acc = 0.0;
            for i in 0..n {
                if p[i] <= 0.0 {
                    continue;
                }
                let mut s = C64::new(0.0, 0.0);
                for j in 0..n {
                    s += a[(i, j)] * b[(j, i)] + b[(i, j)] * a[(j, i)];
                }
                acc += p[i] * s.re;
            }
            f[(k, m)] = acc / 2.0;
            f[(m, k)] = acc / 2.0;
        }
    }

    let operators = slds_eigen
        .into_iter()
        .map(|l| HermitianOperator::hermitian_part(&(v * l * &v_adj)))
        .collect();
    Ok((Qfim::new(f, None)?, SldSet { operators }))
}

pub fn qfim_mixed_network(
    network: &SensorNetwork,
    rho: &DensityOperator,
) -> Result<(Qfim, SldSet)> {
    network.check_layout(rho.layout())?;
    let (f, slds) = qfim_mixed(rho, &network.global_generators()?)?;
    Ok((f.with_partition(network.partition().clone())?, slds))
}

/// QFIM of either kind of probe on a network.
pub fn qfim(network: &SensorNetwork, probe: &Probe) -> Result<Qfim> {
    match probe {
        Probe::Pure(psi) => qfim_pure_network(network, psi),
        Probe::Mixed(rho) => Ok(qfim_mixed_network(network, rho)?.0),
    }
}

/// Weighted quantum Cramér-Rao bound for one `(F, W, μ)` triple.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    /// `Σ_k W_kk [F⁻¹]_kk / μ`; `None` when a weighted parameter lies
    /// (partly) outside the support of `F`, i.e. the bound is infinite.
    pub bound: Option<f64>,
    /// `[F⁻¹]_kk` (pseudo-inverse on the support); `None` for undetermined
    /// parameters.
    pub diag_inverse: Vec<Option<f64>>,
    pub singular: bool,
    pub support_dim: usize,
    /// Orthonormal basis of the QFIM kernel.
    pub undetermined_directions: Vec<Vec<f64>>,
    /// Per-block minimum eigenvalue of `[F⁻¹]_[kk] - [F_[kk]]⁻¹`; empty when
    /// `F` is singular or has no partition.
    pub residuals: Vec<f64>,
    pub repetitions: u64,
}

impl BoundReport {
    pub fn bound_or_infinity(&self) -> f64 {
        self.bound.unwrap_or(f64::INFINITY)
    }
}

pub fn qcrb(f: &Qfim, w: &WeightMatrix, mu: u64) -> Result<BoundReport> {
    if mu == 0 {
        return Err(QsnError::InvalidConfig(
            "repetition count must be positive".into(),
        ));
    }
    if w.len() != f.dim() {
        return Err(QsnError::DimensionMismatch {
            context: "weight matrix vs QFIM",
            expected: f.dim(),
            found: w.len(),
        });
    }
    let spectral = Spectral::new(f.matrix());
    let pinv = spectral.pseudo_inverse();
    let kernel_weights = spectral.kernel_weights();
    let diag_inverse: Vec<Option<f64>> = (0..f.dim())
        .map(|k| (kernel_weights[k] <= UNDETERMINED_TOL).then(|| pinv[(k, k)]))
        .collect();
    let mut bound = Some(0.0);
    for (wk, dk) in w.diagonal().iter().zip(&diag_inverse) {
        if *wk > 0.0 {
            bound = match (bound, dk) {
                (Some(b), Some(x)) => Some(b + wk * x),
                _ => None,
            };
        }
    }
    let singular = spectral.is_singular();
    let residuals = if !singular && f.partition().is_some() {
        prop1_check(f)
            .map(|rs| rs.into_iter().map(|r| r.min_eigenvalue).collect())
            .unwrap_or_default()
    } else {
        Vec::new()
    };
    Ok(BoundReport {
        bound: bound.map(|b| b / mu as f64),
        diag_inverse,
        singular,
        support_dim: spectral.support_dim(),
        undetermined_directions: spectral.kernel(),
        residuals,
        repetitions: mu,
    })
}

/// `Tr(W F⁻¹)`, infinite when a weighted direction is undetermined.
pub fn weighted_trace(f: &Qfim, w: &WeightMatrix) -> Result<f64> {
    Ok(qcrb(f, w, 1)?.bound_or_infinity())
}

/// `M F Mᵀ` for an orthogonal `M`; the partition is dropped.
pub fn rotate_qfim(f: &Qfim, m: &DMatrix<f64>) -> Result<Qfim> {
    if m.nrows() != f.dim() || m.ncols() != f.dim() {
        return Err(QsnError::DimensionMismatch {
            context: "rotation matrix",
            expected: f.dim(),
            found: m.nrows(),
        });
    }
    let deviation = (m * m.transpose() - DMatrix::identity(f.dim(), f.dim())).amax();
    if deviation > 1e-10 {
        return Err(QsnError::NotOrthogonal { deviation });
    }
    Qfim::new(m * f.matrix() * m.transpose(), None)
}

/// Orthogonal matrix whose first row is `v`; the other rows come from
/// Gram-Schmidt over the standard basis in order.
pub fn orthogonal_completion(v: &[f64]) -> Result<DMatrix<f64>> {
    let d = v.len();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if d == 0 || norm == 0.0 || !norm.is_finite() {
        return Err(QsnError::InvalidFunctional(
            "cannot complete a zero vector".into(),
        ));
    }
    if (norm - 1.0).abs() > 1e-10 {
        return Err(QsnError::InvalidFunctional(format!(
            "vector is not unit length (norm {norm})"
        )));
    }
    let mut rows: Vec<nalgebra::DVector<f64>> = vec![nalgebra::DVector::from_column_slice(v)];
    for i in 0..d {
        if rows.len() == d {
            break;
        }
        let mut candidate = nalgebra::DVector::zeros(d);
        candidate[i] = 1.0;
        for _ in 0..2 {
            for r in &rows {
                let overlap = r.dot(&candidate);
                candidate -= r * overlap;
            }
        }
        let n = candidate.norm();
        if n > 1e-8 {
            rows.push(candidate / n);
        }
    }
    let mut m = DMatrix::zeros(d, d);
    for (i, r) in rows.iter().enumerate() {
        m.set_row(i, &r.transpose());
    }
    Ok(m)
}

/// Outcome of the block-inverse inequality check for one block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockResidual {
    pub block: usize,
    /// Minimum eigenvalue of `[F⁻¹]_[kk] - [F_[kk]]⁻¹`; nonnegative up to
    /// roundoff for every positive definite `F`.
    pub min_eigenvalue: f64,
    /// Largest entry magnitude of the same difference.
    pub max_abs_difference: f64,
    pub off_diagonal_norm: f64,
    /// Off-diagonal blocks in this block row vanish, so the difference
    /// should be zero.
    pub equality_case: bool,
}

fn spd_inverse(m: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    Cholesky::new(m.clone())
        .map(|c| c.inverse())
        .ok_or_else(|| QsnError::Singular(format!("{what} is not positive definite")))
}

/// For each partition block, compares `[F⁻¹]_[kk]` against `[F_[kk]]⁻¹`.
pub fn prop1_check(f: &Qfim) -> Result<Vec<BlockResidual>> {
    let p = f.require_partition()?.clone();
    let spectral = Spectral::new(f.matrix());
    if spectral.is_singular() {
        return Err(QsnError::Singular("QFIM has a nontrivial kernel".into()));
    }
    let inv = spd_inverse(f.matrix(), "QFIM")?;
    (0..p.num_blocks())
        .map(|k| {
            let r = p.range(k);
            let inv_block = inv
                .view((r.start, r.start), (r.len(), r.len()))
                .into_owned();
            let block_inv = spd_inverse(&f.block(k)?, "diagonal block")?;
            let diff = inv_block - block_inv;
            let diff = (&diff + diff.transpose()) * 0.5;
            let min_eigenvalue = SymmetricEigen::new(diff.clone()).eigenvalues.min();
            let off = f.off_diagonal_norm(k)?;
            Ok(BlockResidual {
                block: k,
                min_eigenvalue,
                max_abs_difference: diff.amax(),
                off_diagonal_norm: off,
                equality_case: off <= BLOCK_EQUALITY_TOL,
            })
        })
        .collect()
}

/// A measurement: PSD effects summing to the identity.
#[derive(Debug, Clone)]
pub struct Povm {
    effects: Vec<HermitianOperator>,
}

impl Povm {
    pub fn new(effects: Vec<HermitianOperator>) -> Result<Self> {
        let first = effects
            .first()
            .ok_or_else(|| QsnError::InvalidPovm("no effects".into()))?;
        let n = first.dim();
        let mut sum = ComplexMatrix::zeros(n, n);
        for (m, e) in effects.iter().enumerate() {
            if e.dim() != n {
                return Err(QsnError::InvalidPovm(format!(
                    "effect {m} has dimension {}",
                    e.dim()
                )));
            }
            let min = hilbert::eigh(e).values[0];
            if min < -POVM_TOL {
                return Err(QsnError::InvalidPovm(format!(
                    "effect {m} has eigenvalue {min:e}"
                )));
            }
            sum += e.matrix();
        }
        let deviation = hilbert::max_abs(&(sum - hilbert::identity(n)));
        if deviation > POVM_TOL {
            return Err(QsnError::InvalidPovm(format!(
                "effects sum to the identity only within {deviation:e}"
            )));
        }
        Ok(Self { effects })
    }

    /// Rank-one projectors onto the columns of a unitary.
    pub fn projective(basis: &ComplexMatrix) -> Result<Self> {
        let effects = (0..basis.ncols())
            .map(|j| {
                let v = basis.column(j);
                HermitianOperator::new(v * v.adjoint())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(effects)
    }

    /// Independent local measurements: all tensor products of effects.
    pub fn product(local: &[Povm]) -> Result<Self> {
        let mut effects = vec![hilbert::identity(1)];
        for povm in local {
            let mut next = Vec::with_capacity(effects.len() * povm.effects.len());
            for e in &effects {
                for f in &povm.effects {
                    next.push(hilbert::tensor_product(e, f.matrix())?);
                }
            }
            effects = next;
        }
        Self::new(
            effects
                .into_iter()
                .map(HermitianOperator::new)
                .collect::<Result<_>>()?,
        )
    }

    pub fn effects(&self) -> &[HermitianOperator] {
        &self.effects
    }

    pub fn dim(&self) -> usize {
        self.effects[0].dim()
    }

    pub fn probabilities(&self, probe: &Probe) -> Vec<f64> {
        match probe {
            Probe::Pure(psi) => self.effects.iter().map(|e| psi.expectation(e)).collect(),
            Probe::Mixed(rho) => self.effects.iter().map(|e| rho.expectation(e)).collect(),
        }
    }
}

/// Classical Fisher information of `povm` on the encoded probe at `phi0`,
/// from central differences with step [`CFIM_STEP`].
pub fn cfim(
    povm: &Povm,
    network: &SensorNetwork,
    probe: &Probe,
    phi0: &ParameterPoint,
) -> Result<DMatrix<f64>> {
    if povm.dim() != network.total_dim() {
        return Err(QsnError::DimensionMismatch {
            context: "POVM vs network",
            expected: network.total_dim(),
            found: povm.dim(),
        });
    }
    let d = network.parameter_count();
    let center = povm.probabilities(&network.encode(probe, phi0)?);
    let mut derivatives = Vec::with_capacity(d);
    for k in 0..d {
        let plus = povm.probabilities(&network.encode(probe, &phi0.shifted(k, CFIM_STEP))?);
        let minus = povm.probabilities(&network.encode(probe, &phi0.shifted(k, -CFIM_STEP))?);
        derivatives.push(
            plus.iter()
                .zip(&minus)
                .map(|(a, b)| (a - b) / (2.0 * CFIM_STEP))
                .collect::<Vec<f64>>(),
        );
    }
    let mut out = DMatrix::zeros(d, d);
    for (m, &p) in center.iter().enumerate() {
        if p < CFIM_MIN_PROBABILITY {
            continue;
        }
        for k in 0..d {
            for l in 0..d {
                out[(k, l)] += derivatives[k][m] * derivatives[l][m] / p;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{Layout, ONE, ZERO};
    use crate::network::{half_sigma_y, half_sigma_z, qubit_network};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn plus() -> PureState {
        let s = 1.0 / 2f64.sqrt();
        PureState::new(
            ComplexVector::from_vec(vec![C64::new(s, 0.0), C64::new(s, 0.0)]),
            Layout::single(2).unwrap(),
        )
        .unwrap()
    }

    fn random_pure(rng: &mut ChaCha8Rng, layout: Layout) -> PureState {
        let n = layout.total();
        let v = ComplexVector::from_fn(n, |_, _| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        PureState::normalized(v, layout).unwrap()
    }

    fn random_spd(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
        let a = DMatrix::from_fn(d, d, |_, _| rng.random::<f64>() - 0.5);
        a.transpose() * a + DMatrix::identity(d, d) * 0.1
    }

    /// Bottom-right block of the inverse via the Schur complement
    /// `g = c - b a⁻¹ bᵀ` after permuting block `k` to the end.
    fn schur_inverse_block(f: &DMatrix<f64>, range: std::ops::Range<usize>) -> DMatrix<f64> {
        let d = f.nrows();
        let rest: Vec<usize> = (0..d).filter(|i| !range.contains(i)).collect();
        let kk: Vec<usize> = range.collect();
        let pick = |rows: &[usize], cols: &[usize]| {
            DMatrix::from_fn(rows.len(), cols.len(), |i, j| f[(rows[i], cols[j])])
        };
        let c = pick(&kk, &kk);
        if rest.is_empty() {
            return c.try_inverse().unwrap();
        }
        let a = pick(&rest, &rest);
        let b = pick(&kk, &rest);
        let g = &c - &b * a.try_inverse().unwrap() * b.transpose();
        g.try_inverse().unwrap()
    }

    #[test]
    fn plus_state_qfi_is_one() {
        let f = qfim_pure(&plus(), &[half_sigma_z()]).unwrap();
        assert_abs_diff_eq!(f.matrix()[(0, 0)], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn maximally_mixed_qubit_has_zero_qfi() {
        let rho = DensityOperator::maximally_mixed(Layout::single(2).unwrap());
        let (f, _) = qfim_mixed(&rho, &[half_sigma_z()]).unwrap();
        assert_eq!(f.matrix()[(0, 0)], 0.0);
        let report = qcrb(&f, &WeightMatrix::identity(1), 1).unwrap();
        assert!(report.singular);
        assert_eq!(report.bound, None);
    }

    #[test]
    fn mixed_matches_pure_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let net = qubit_network(3).unwrap();
        let gens = net.global_generators().unwrap();
        for _ in 0..20 {
            let psi = random_pure(&mut rng, net.layout().clone());
            let a = qfim_pure(&psi, &gens).unwrap();
            let b = qfim_pure_network(&net, &psi).unwrap();
            let (c, slds) = qfim_mixed(&psi.to_density(), &gens).unwrap();
            assert!((a.matrix() - b.matrix()).amax() < 1e-12);
            assert!((a.matrix() - c.matrix()).amax() < 1e-9);
            assert!(slds.residual(&psi.to_density(), &gens) < 1e-8);
        }
    }

    /// Fidelity between qubit density matrices, `(Tr√(√ρ σ √ρ))²`.
    fn fidelity(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
        let sqrt = |m: &ComplexMatrix| {
            let e = eigh_matrix(m);
            let mut s = e.vectors.clone();
            for (j, &l) in e.values.iter().enumerate() {
                s.column_mut(j).scale_mut(l.max(0.0).sqrt());
            }
            &s * e.vectors.adjoint()
        };
        let ra = sqrt(a);
        let inner = &ra * b * &ra;
        let e = eigh_matrix(&((&inner + inner.adjoint()) * C64::new(0.5, 0.0)));
        e.values
            .iter()
            .map(|l| l.max(0.0).sqrt())
            .sum::<f64>()
            .powi(2)
    }

    #[test]
    fn partially_mixed_qfi_matches_fidelity_finite_difference() {
        let net = qubit_network(1).unwrap();
        for p in [0.2, 0.5, 0.9] {
            let plus = plus().to_density();
            let m = plus.matrix().scale(p) + hilbert::identity(2).scale((1.0 - p) / 2.0);
            let rho = DensityOperator::new(m, Layout::single(2).unwrap()).unwrap();
            let (f, _) = qfim_mixed_network(&net, &rho).unwrap();
            // F = 8 (1 - √fid(ρ, ρ_δ)) / δ²
            let delta = 1e-4;
            let shifted = net
                .encode_density(&rho, &ParameterPoint::new(vec![delta]).unwrap())
                .unwrap();
            let fid = fidelity(rho.matrix(), shifted.matrix());
            let oracle = 8.0 * (1.0 - fid.sqrt()) / delta.powi(2);
            assert_abs_diff_eq!(f.matrix()[(0, 0)], oracle, epsilon = 1e-4);
            assert_abs_diff_eq!(f.matrix()[(0, 0)], p * p, epsilon = 1e-12);
        }
    }

    #[test]
    fn qcrb_examples() {
        let f = Qfim::new(DMatrix::identity(3, 3), None).unwrap();
        let r = qcrb(&f, &WeightMatrix::identity(3), 1).unwrap();
        assert_abs_diff_eq!(r.bound.unwrap(), 3.0, epsilon = 1e-14);
        let f = Qfim::new(
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![4.0, 1.0])),
            None,
        )
        .unwrap();
        let r = qcrb(&f, &WeightMatrix::new(vec![1.0, 0.0]).unwrap(), 10).unwrap();
        assert_abs_diff_eq!(r.bound.unwrap(), 0.025, epsilon = 1e-15);
        assert!(!r.singular);
        assert_eq!(r.support_dim, 2);
    }

    #[test]
    fn qcrb_on_singular_qfim_lists_kernel() {
        // F = v vᵀ with v = (1,1)/√2: only the sum direction is determined.
        let f = Qfim::new(DMatrix::from_element(2, 2, 0.5), None).unwrap();
        let r = qcrb(&f, &WeightMatrix::identity(2), 1).unwrap();
        assert!(r.singular);
        assert_eq!(r.support_dim, 1);
        assert_eq!(r.bound, None);
        assert_eq!(r.diag_inverse, vec![None, None]);
        assert_eq!(r.undetermined_directions.len(), 1);
        let k = &r.undetermined_directions[0];
        assert_abs_diff_eq!((k[0] + k[1]).abs(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn qcrb_errors() {
        let f = Qfim::new(DMatrix::identity(2, 2), None).unwrap();
        assert!(qcrb(&f, &WeightMatrix::identity(3), 1).is_err());
        assert!(qcrb(&f, &WeightMatrix::identity(2), 0).is_err());
    }

    #[test]
    fn qcrb_is_monotone_under_psd_perturbation() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..50 {
            let d = rng.random_range(1..6);
            let f = random_spd(&mut rng, d);
            let b = DMatrix::from_fn(d, 2, |_, _| rng.random::<f64>() - 0.5);
            let w = WeightMatrix::new((0..d).map(|_| rng.random::<f64>()).collect()).unwrap();
            let base = qcrb(&Qfim::new(f.clone(), None).unwrap(), &w, 3)
                .unwrap()
                .bound
                .unwrap();
            let more = qcrb(&Qfim::new(&f + &b * b.transpose(), None).unwrap(), &w, 3)
                .unwrap()
                .bound
                .unwrap();
            assert!(more <= base + 1e-12);
        }
    }

    #[test]
    fn rotation_examples() {
        let f = Qfim::new(DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]), None).unwrap();
        let same = rotate_qfim(&f, &DMatrix::identity(2, 2)).unwrap();
        assert_eq!(same.matrix(), f.matrix());
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(matches!(
            rotate_qfim(&f, &bad),
            Err(QsnError::NotOrthogonal { .. })
        ));
    }

    #[test]
    fn rotation_preserves_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for d in 2..7 {
            let f = Qfim::new(random_spd(&mut rng, d), None).unwrap();
            let v: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let m = orthogonal_completion(&v.iter().map(|x| x / n).collect::<Vec<_>>()).unwrap();
            let r = rotate_qfim(&f, &m).unwrap();
            for (a, b) in f.eigenvalues().iter().zip(r.eigenvalues()) {
                assert_abs_diff_eq!(*a, b, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn orthogonal_completion_examples() {
        let m = orthogonal_completion(&[1.0, 0.0, 0.0]).unwrap();
        assert!((m - DMatrix::<f64>::identity(3, 3)).amax() < 1e-15);
        let s = 1.0 / 2f64.sqrt();
        let m = orthogonal_completion(&[s, s]).unwrap();
        assert_abs_diff_eq!(m[(1, 0)].abs(), s, epsilon = 1e-15);
        assert_abs_diff_eq!(m[(1, 0)] + m[(1, 1)], 0.0, epsilon = 1e-15);
        assert!(orthogonal_completion(&[0.0, 0.0]).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for d in 1..10 {
            let v: Vec<f64> = (0..d).map(|_| rng.random::<f64>() - 0.5).collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let v: Vec<f64> = v.iter().map(|x| x / n).collect();
            let m = orthogonal_completion(&v).unwrap();
            assert!((&m * m.transpose() - DMatrix::<f64>::identity(d, d)).amax() < 1e-10);
            for (j, x) in v.iter().enumerate() {
                assert_eq!(m[(0, j)], *x);
            }
        }
    }

    #[test]
    fn block_accessors() {
        let f = Qfim::new(
            DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]),
            Some(Partition::singletons(2)),
        )
        .unwrap();
        assert_eq!(f.block(0).unwrap()[(0, 0)], 2.0);
        let inv = f.inverse_block(0).unwrap();
        assert!(!inv.singular);
        assert_abs_diff_eq!(inv.matrix[(0, 0)], 2.0 / 3.0, epsilon = 1e-14);
        assert!(f.block(2).is_err());
        let r = prop1_check(&f).unwrap();
        assert_abs_diff_eq!(r[0].min_eigenvalue, 1.0 / 6.0, epsilon = 1e-14);
        assert!(!r[0].equality_case);
    }

    #[test]
    fn block_diagonal_inverse_is_block_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = random_spd(&mut rng, 2);
        let b = random_spd(&mut rng, 3);
        let mut m = DMatrix::zeros(5, 5);
        m.view_mut((0, 0), (2, 2)).copy_from(&a);
        m.view_mut((2, 2), (3, 3)).copy_from(&b);
        let f = Qfim::new(m, Some(Partition::new(vec![2, 3]).unwrap())).unwrap();
        let inv = f.inverse_block(1).unwrap().matrix;
        assert!((inv - b.try_inverse().unwrap()).amax() < 1e-12);
        for r in prop1_check(&f).unwrap() {
            assert!(r.equality_case);
            assert!(r.max_abs_difference < 1e-12);
        }
    }

    #[test]
    fn prop1_matches_schur_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..100 {
            let d = rng.random_range(2..9);
            let m = random_spd(&mut rng, d);
            let mut sizes = Vec::new();
            let mut left = d;
            while left > 0 {
                let s = rng.random_range(1..=left);
                sizes.push(s);
                left -= s;
            }
            let partition = Partition::new(sizes).unwrap();
            let f = Qfim::new(m.clone(), Some(partition.clone())).unwrap();
            for r in prop1_check(&f).unwrap() {
                let range = partition.range(r.block);
                let oracle = schur_inverse_block(&m, range.clone());
                let mine = f.inverse_block(r.block).unwrap().matrix;
                assert!((oracle - mine).amax() < 1e-9);
                assert!(r.min_eigenvalue >= -1e-9);
            }
        }
    }

    #[test]
    fn prop1_rejects_singular() {
        let f = Qfim::new(
            DMatrix::from_element(2, 2, 1.0),
            Some(Partition::singletons(2)),
        )
        .unwrap();
        assert!(matches!(prop1_check(&f), Err(QsnError::Singular(_))));
    }

    fn sigma_y_basis() -> ComplexMatrix {
        let s = 1.0 / 2f64.sqrt();
        ComplexMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(s, 0.0),
                C64::new(s, 0.0),
                C64::new(0.0, s),
                C64::new(0.0, -s),
            ],
        )
    }

    #[test]
    fn cfim_sigma_y_measurement_saturates() {
        let net = qubit_network(1).unwrap();
        let povm = Povm::projective(&sigma_y_basis()).unwrap();
        let c = cfim(&povm, &net, &Probe::Pure(plus()), &ParameterPoint::zeros(1)).unwrap();
        assert_abs_diff_eq!(c[(0, 0)], 1.0, epsilon = 1e-5);
        // sanity: the basis diagonalizes σ_y
        let e = hilbert::eigh(&half_sigma_y());
        assert_abs_diff_eq!(e.values[1], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn cfim_sigma_z_measurement_is_blind() {
        let net = qubit_network(1).unwrap();
        let povm = Povm::projective(&hilbert::identity(2)).unwrap();
        let c = cfim(&povm, &net, &Probe::Pure(plus()), &ParameterPoint::zeros(1)).unwrap();
        assert!(c[(0, 0)].abs() < 1e-12);
    }

    #[test]
    fn povm_validation() {
        let half = HermitianOperator::identity(2).scale(0.5);
        assert!(Povm::new(vec![half.clone()]).is_err());
        assert!(Povm::new(vec![half.clone(), half]).is_ok());
        let neg = HermitianOperator::from_real_diagonal(&[1.5, 1.0]);
        let other = HermitianOperator::from_real_diagonal(&[-0.5, 0.0]);
        assert!(Povm::new(vec![neg, other]).is_err());
        let _ = (ONE, ZERO);
    }
}
