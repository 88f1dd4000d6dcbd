//! Probe-state constructors: separable surrogates, purifications, local
//! purifications, extremal single-sensor probes, GHZ-like network probes
//! and optimal separable allocations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{QsnError, Result};
use crate::hilbert::{
    self, eigh, eigh_matrix, ComplexMatrix, ComplexVector, DensityOperator, HermitianOperator,
    Layout, PureState, C64,
};
use crate::network::{commute, SensorFamily, SensorNetwork, SensorSpec};

/// Seed of the random linear combination used for simultaneous
/// diagonalization. Fixed so every run picks the same basis.
const JOINT_BASIS_SEED: u64 = 0x6a6f_696e_745f_6569;
pub const JOINT_BASIS_TOL: f64 = 1e-9;
/// Relative gap below which two eigenvalues are treated as degenerate.
const CLUSTER_TOL: f64 = 1e-8;
const INTEGRALITY_TOL: f64 = 1e-9;
/// Exhaustive allocation search is used up to this many compositions.
pub const EXHAUSTIVE_LIMIT: u64 = 1_000_000;

/// Simultaneous eigenbasis of one sensor's generators.
#[derive(Debug, Clone)]
pub struct JointEigenbasis {
    pub sensor: usize,
    /// Orthonormal columns.
    pub vectors: ComplexMatrix,
    /// `labels[i][j]`: eigenvalue of generator `j` on vector `i`.
    pub labels: Vec<Vec<f64>>,
}

impl JointEigenbasis {
    /// Largest `|V diag(label_j) V† - H_j|` over the generators.
    pub fn residual(&self, generators: &[HermitianOperator]) -> f64 {
        generators
            .iter()
            .enumerate()
            .map(|(j, h)| {
                let mut scaled = self.vectors.clone();
                for (i, label) in self.labels.iter().enumerate() {
                    scaled.column_mut(i).scale_mut(label[j]);
                }
                hilbert::max_abs(&(&scaled * self.vectors.adjoint() - h.matrix()))
            })
            .fold(0.0, f64::max)
    }
}

fn clusters(values: &[f64]) -> Vec<std::ops::Range<usize>> {
    let spread = values.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1.0);
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > CLUSTER_TOL * spread {
            out.push(start..i);
            start = i;
        }
    }
    out
}

/// Splits the columns of `basis` until every operator in `ops` is diagonal
/// on them. `basis` spans an invariant subspace of all of `ops`.
fn refine(basis: ComplexMatrix, ops: &[&HermitianOperator]) -> ComplexMatrix {
    if basis.ncols() <= 1 || ops.is_empty() {
        return basis;
    }
    let restricted = basis.adjoint() * ops[0].matrix() * &basis;
    let restricted = (&restricted + restricted.adjoint()) * C64::new(0.5, 0.0);
    let e = eigh_matrix(&restricted);
    let rotated = &basis * &e.vectors;
    let mut out = ComplexMatrix::zeros(basis.nrows(), basis.ncols());
    for range in clusters(&e.values) {
        let block = rotated.columns(range.start, range.len()).into_owned();
        let refined = refine(block, &ops[1..]);
        out.columns_mut(range.start, range.len())
            .copy_from(&refined);
    }
    out
}

fn simultaneous_basis(dim: usize, ops: &[&HermitianOperator]) -> ComplexMatrix {
    if ops.is_empty() {
        return hilbert::identity(dim);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(JOINT_BASIS_SEED);
    let coeffs: Vec<f64> = ops.iter().map(|_| rng.random_range(0.5..1.5)).collect();
    let mix = HermitianOperator::linear_combination(&coeffs, ops);
    let e = eigh(&mix);
    let mut out = ComplexMatrix::zeros(dim, dim);
    for range in clusters(&e.values) {
        let block = e.vectors.columns(range.start, range.len()).into_owned();
        out.columns_mut(range.start, range.len())
            .copy_from(&refine(block, ops));
    }
    out
}

fn check_commuting(index: usize, ops: &[&HermitianOperator]) -> Result<()> {
    for i in 0..ops.len() {
        for j in i + 1..ops.len() {
            let (ok, residual) = commute(ops[i], ops[j]);
            if !ok {
                return Err(QsnError::NonCommuting {
                    sensor: index,
                    residual,
                });
            }
        }
    }
    Ok(())
}

fn build_joint_basis(
    index: usize,
    sensor: &SensorSpec,
    extra: Option<&HermitianOperator>,
) -> Result<JointEigenbasis> {
    let generators: Vec<&HermitianOperator> = sensor.generators().iter().collect();
    check_commuting(index, &generators)?;
    let mut ops = generators.clone();
    ops.extend(extra);
    let vectors = simultaneous_basis(sensor.local_dim(), &ops);
    let labels = (0..vectors.ncols())
        .map(|i| {
            let v: ComplexVector = vectors.column(i).into_owned();
            generators.iter().map(|h| h.expectation(&v)).collect()
        })
        .collect();
    let basis = JointEigenbasis {
        sensor: index,
        vectors,
        labels,
    };
    let residual = basis.residual(sensor.generators());
    if residual > JOINT_BASIS_TOL {
        return Err(QsnError::NonCommuting {
            sensor: index,
            residual,
        });
    }
    Ok(basis)
}

/// Orthonormal common eigenvectors of all generators of `sensor`.
pub fn joint_eigenbasis(index: usize, sensor: &SensorSpec) -> Result<JointEigenbasis> {
    build_joint_basis(index, sensor, None)
}

/// The basis the surrogate is built in: joint eigenvectors of the
/// generators, additionally diagonalizing the resource operator when it
/// commutes with them, so resource counts carry over exactly.
pub fn surrogate_basis(index: usize, sensor: &SensorSpec) -> Result<JointEigenbasis> {
    let conserved = sensor
        .generators()
        .iter()
        .all(|h| commute(sensor.resource(), h).0);
    build_joint_basis(index, sensor, conserved.then_some(sensor.resource()))
}

/// Product state whose sensor-`k` factor is `Σ_λ ‖⟨ψ|λ_k⟩‖ |λ_k⟩` over the
/// joint eigenbasis of that sensor's generators.
pub fn separable_surrogate(psi: &PureState, network: &SensorNetwork) -> Result<PureState> {
    network.check_layout(psi.layout())?;
    let factors = network
        .sensors()
        .iter()
        .enumerate()
        .map(|(k, sensor)| {
            let basis = surrogate_basis(k, sensor)?;
            let marginal = psi.reduced(&[k])?;
            let mut amps = ComplexVector::zeros(sensor.local_dim());
            for i in 0..basis.vectors.ncols() {
                let v: ComplexVector = basis.vectors.column(i).into_owned();
                let weight = v.dotc(&(marginal.matrix() * &v)).re.max(0.0);
                amps += v * C64::new(weight.sqrt(), 0.0);
            }
            PureState::normalized(amps, Layout::single(sensor.local_dim())?)
        })
        .collect::<Result<Vec<_>>>()?;
    PureState::product(&factors)
        .and_then(|p| PureState::new(p.amplitudes().clone(), network.layout().clone()))
}

/// `1 - λ_max(ρ_k)` maximized over sensors: zero exactly for states that
/// are products across the sensor factors.
pub fn product_residual(psi: &PureState) -> Result<f64> {
    let mut worst = 0.0_f64;
    for k in 0..psi.layout().len() {
        let marginal = psi.reduced(&[k])?;
        let top = marginal.eigh().values.last().copied().unwrap_or(1.0);
        worst = worst.max(1.0 - top);
    }
    Ok(worst)
}

/// `Σ_i √p_i |v_i⟩ ⊗ |v_i⟩` from the eigendecomposition `ρ = Σ_i p_i |v_i⟩⟨v_i|`,
/// on the layout `ρ.layout ++ ρ.layout`. Both marginals equal `ρ`.
pub fn purify(rho: &DensityOperator) -> Result<PureState> {
    let e = rho.eigh();
    if let Some(&min) = e.values.first() {
        if min < -hilbert::PSD_SLACK {
            return Err(QsnError::InvalidDensity(format!(
                "negative eigenvalue {min:e}"
            )));
        }
    }
    let n = rho.dim();
    let mut amps = ComplexVector::zeros(n * n);
    for (i, &p) in e.values.iter().enumerate().rev() {
        if p <= 0.0 {
            continue;
        }
        let v: ComplexVector = e.vectors.column(i).into_owned();
        amps += hilbert::tensor_vectors(&v, &v) * C64::new(p.sqrt(), 0.0);
    }
    PureState::normalized(amps, rho.layout().concat(rho.layout())?)
}

/// `⊗_l |φ_l⟩` with `|φ_l⟩` a purification of sensor `l`'s marginal, on the
/// layout of [`SensorNetwork::with_local_ancillas`].
pub fn local_purification_probe(
    rho: &DensityOperator,
    network: &SensorNetwork,
) -> Result<PureState> {
    network.check_layout(rho.layout())?;
    let s = network.sensors().len();
    let factors = (0..s)
        .map(|l| {
            let discard: Vec<usize> = (0..s).filter(|&i| i != l).collect();
            let marginal = if discard.is_empty() {
                rho.clone()
            } else {
                hilbert::partial_trace(rho, &discard)?
            };
            purify(&marginal)
        })
        .collect::<Result<Vec<_>>>()?;
    PureState::product(&factors)
}

/// Indices of the extremal eigenvectors; ties go to the lowest index in
/// ascending eigenvalue order.
fn extremal_indices(values: &[f64]) -> (usize, usize) {
    let max = *values.last().expect("non-empty spectrum");
    let scale = values.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let top = values
        .iter()
        .position(|&v| v >= max - CLUSTER_TOL * scale)
        .unwrap_or(values.len() - 1);
    (0, top)
}

/// `|λ_min⟩` and `|λ_max⟩` of a generator.
pub fn extremal_eigenvectors(generator: &HermitianOperator) -> (ComplexVector, ComplexVector, f64) {
    let e = eigh(generator);
    let (lo, hi) = extremal_indices(&e.values);
    (
        e.vectors.column(lo).into_owned(),
        e.vectors.column(hi).into_owned(),
        e.values[hi] - e.values[lo],
    )
}

/// `(|λ_min⟩ + |λ_max⟩)/√2` for the single-generator sensor of `family`
/// with `n` particles.
pub fn extremal_superposition(family: SensorFamily, n: usize) -> Result<PureState> {
    let sensor = family.sensor(n)?;
    extremal_superposition_of(&sensor)
}

pub fn extremal_superposition_of(sensor: &SensorSpec) -> Result<PureState> {
    let generator = sensor
        .generators()
        .first()
        .ok_or_else(|| QsnError::InvalidNetwork("sensor has no generator".into()))?;
    let (lo, hi, width) = extremal_eigenvectors(generator);
    let amps = if width > 0.0 { lo + hi } else { lo };
    PureState::normalized(amps, Layout::single(sensor.local_dim())?)
}

/// Spectral width of the family's generator divided by `n`.
pub fn measured_kappa(family: SensorFamily, n: usize) -> Result<f64> {
    let sensor = family.sensor(n)?;
    let (_, _, width) = extremal_eigenvectors(&sensor.generators()[0]);
    Ok(width / n as f64)
}

fn check_functional(v: &[f64], allow_negative: bool) -> Result<()> {
    if v.is_empty() {
        return Err(QsnError::InvalidFunctional(
            "empty coefficient vector".into(),
        ));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(QsnError::InvalidFunctional("non-finite coefficient".into()));
    }
    if !allow_negative {
        if let Some(k) = v.iter().position(|&x| x < 0.0) {
            return Err(QsnError::InvalidFunctional(format!(
                "coefficient {k} is negative"
            )));
        }
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(QsnError::InvalidFunctional(format!(
            "|v|_2 = {norm}, expected 1"
        )));
    }
    Ok(())
}

/// Integer particle numbers `ṽ_k = N |v_k| / ‖v‖₁`.
pub fn ghz_allocation(v: &[f64], n: usize) -> Result<Vec<usize>> {
    let l1: f64 = v.iter().map(|x| x.abs()).sum();
    v.iter()
        .enumerate()
        .map(|(k, x)| {
            let value = n as f64 * x.abs() / l1;
            let rounded = value.round();
            if (value - rounded).abs() > INTEGRALITY_TOL * value.max(1.0) {
                Err(QsnError::NonIntegerAllocation { index: k, value })
            } else {
                Ok(rounded as usize)
            }
        })
        .collect()
}

/// A probe together with the network it lives on.
#[derive(Debug, Clone)]
pub struct NetworkProbe {
    pub network: SensorNetwork,
    pub state: PureState,
    pub allocation: Vec<usize>,
}

/// `(|λ_max,ṽ₁⟩⋯|λ_max,ṽ_d⟩ + |λ_min,ṽ₁⟩⋯|λ_min,ṽ_d⟩)/√2` for a
/// nonnegative unit `v`.
pub fn ghz_probe(v: &[f64], n: usize, family: SensorFamily) -> Result<NetworkProbe> {
    check_functional(v, false)?;
    ghz_like(v, n, family)
}

/// GHZ-like probe for a signed unit `v`: sensors with negative `v_k` swap
/// the roles of their extremal eigenvectors, so the probe is sensitive to
/// `Σ_k v_k φ_k`.
pub fn ghz_probe_signed(v: &[f64], n: usize, family: SensorFamily) -> Result<NetworkProbe> {
    check_functional(v, true)?;
    ghz_like(v, n, family)
}

fn ghz_like(v: &[f64], n: usize, family: SensorFamily) -> Result<NetworkProbe> {
    if n == 0 {
        return Err(QsnError::InvalidFunctional(
            "particle budget N must be positive".into(),
        ));
    }
    let allocation = ghz_allocation(v, n)?;
    let network = family.network(&allocation)?;
    let mut upper: Vec<PureState> = Vec::with_capacity(v.len());
    let mut lower: Vec<PureState> = Vec::with_capacity(v.len());
    for (sensor, &coeff) in network.sensors().iter().zip(v) {
        let (lo, hi, _) = extremal_eigenvectors(&sensor.generators()[0]);
        let layout = Layout::single(sensor.local_dim())?;
        let (a, b) = if coeff < 0.0 { (lo, hi) } else { (hi, lo) };
        upper.push(PureState::new(a, layout.clone())?);
        lower.push(PureState::new(b, layout)?);
    }
    let up = PureState::product(&upper)?;
    let down = PureState::product(&lower)?;
    let state = PureState::normalized(
        up.amplitudes() + down.amplitudes(),
        network.layout().clone(),
    )?;
    Ok(NetworkProbe {
        network,
        state,
        allocation,
    })
}

/// Particle numbers per sensor, summing to `N`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct AllocationVector(pub Vec<usize>);

impl AllocationVector {
    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }
}

/// `Σ_k v_k² / w_k²`: the variance bound (times `μκ²`) of the product of
/// extremal superpositions with `w_k` particles on sensor `k`.
pub fn allocation_objective(v: &[f64], w: &[usize]) -> f64 {
    v.iter()
        .zip(w)
        .map(|(&x, &n)| {
            if x == 0.0 {
                0.0
            } else if n == 0 {
                f64::INFINITY
            } else {
                x * x / (n as f64).powi(2)
            }
        })
        .sum()
}

/// Number of compositions `C(N+d-1, d-1)`, saturating at `cap + 1`.
fn composition_count(n: usize, d: usize, cap: u64) -> u64 {
    let mut c: u128 = 1;
    let k = (d as u128).saturating_sub(1);
    let top = n as u128 + k;
    for i in 0..k {
        c = c * (top - i) / (i + 1);
        if c > cap as u128 {
            return cap + 1;
        }
    }
    c as u64
}

fn exhaustive_allocation(v: &[f64], n: usize) -> Vec<usize> {
    let d = v.len();
    let mut best = (f64::INFINITY, vec![0; d]);
    let mut w = vec![0usize; d];
    fn walk(v: &[f64], w: &mut Vec<usize>, pos: usize, left: usize, best: &mut (f64, Vec<usize>)) {
        if pos == w.len() - 1 {
            w[pos] = left;
            let obj = allocation_objective(v, w);
            if obj < best.0 {
                *best = (obj, w.clone());
            }
            return;
        }
        for take in (0..=left).rev() {
            w[pos] = take;
            walk(v, w, pos + 1, left - take, best);
        }
    }
    walk(v, &mut w, 0, n, &mut best);
    best.1
}

fn greedy_allocation(v: &[f64], n: usize) -> Vec<usize> {
    let d = v.len();
    let weights: Vec<f64> = v.iter().map(|x| x.abs().powf(2.0 / 3.0)).collect();
    let total: f64 = weights.iter().sum();
    let ideal: Vec<f64> = weights.iter().map(|w| n as f64 * w / total).collect();
    let mut w: Vec<usize> = ideal.iter().map(|x| x.floor() as usize).collect();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        (ideal[b] - ideal[b].floor())
            .total_cmp(&(ideal[a] - ideal[a].floor()))
            .then(a.cmp(&b))
    });
    let mut left = n - w.iter().sum::<usize>();
    for &k in order.iter().cycle().take(d * (left + 1)) {
        if left == 0 {
            break;
        }
        w[k] += 1;
        left -= 1;
    }
    // pairwise unit moves until no move improves the objective
    loop {
        let current = allocation_objective(v, &w);
        let mut best: Option<(f64, usize, usize)> = None;
        for from in 0..d {
            if w[from] == 0 {
                continue;
            }
            for to in 0..d {
                if to == from {
                    continue;
                }
                w[from] -= 1;
                w[to] += 1;
                let obj = allocation_objective(v, &w);
                w[from] += 1;
                w[to] -= 1;
                if obj < current && best.is_none_or(|b| obj < b.0) {
                    best = Some((obj, from, to));
                }
            }
        }
        match best {
            Some((_, from, to)) => {
                w[from] -= 1;
                w[to] += 1;
            }
            None => break,
        }
    }
    w
}

/// Integer allocation minimizing [`allocation_objective`] subject to
/// `Σ w_k = N`.
pub fn optimal_allocation(v: &[f64], n: usize) -> Result<AllocationVector> {
    if v.is_empty() {
        return Err(QsnError::InvalidFunctional(
            "empty coefficient vector".into(),
        ));
    }
    let support = v.iter().filter(|&&x| x != 0.0).count();
    if n < support {
        return Err(QsnError::InvalidFunctional(format!(
            "N = {n} particles cannot cover {support} sensors with nonzero weight"
        )));
    }
    let w = if composition_count(n, v.len(), EXHAUSTIVE_LIMIT) <= EXHAUSTIVE_LIMIT {
        exhaustive_allocation(v, n)
    } else {
        greedy_allocation(v, n)
    };
    Ok(AllocationVector(w))
}

#[derive(Debug, Clone)]
pub struct SeparableProbe {
    pub network: SensorNetwork,
    pub state: PureState,
    pub allocation: AllocationVector,
    /// `Σ_k v_k² / (μ κ² w_k²)` for the chosen integer allocation.
    pub variance_bound: f64,
}

/// Best product of extremal superpositions for estimating `vᵀφ` with `N`
/// particles.
pub fn optimal_separable_probe(
    v: &[f64],
    n: usize,
    family: SensorFamily,
    mu: u64,
) -> Result<SeparableProbe> {
    check_functional(v, true)?;
    if mu == 0 {
        return Err(QsnError::InvalidConfig(
            "repetition count must be positive".into(),
        ));
    }
    let allocation = optimal_allocation(v, n)?;
    let network = family.network(&allocation.0)?;
    let factors = network
        .sensors()
        .iter()
        .map(extremal_superposition_of)
        .collect::<Result<Vec<_>>>()?;
    let state = PureState::new(
        PureState::product(&factors)?.amplitudes().clone(),
        network.layout().clone(),
    )?;
    let kappa = family.kappa();
    let variance_bound = allocation_objective(v, &allocation.0) / (mu as f64 * kappa * kappa);
    Ok(SeparableProbe {
        network,
        state,
        allocation,
        variance_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fisher::{qcrb, qfim_pure_network};
    use crate::hilbert::{max_abs, partial_trace, ONE, ZERO};
    use crate::network::{half_sigma_z, qubit_network, WeightMatrix};
    use approx::assert_abs_diff_eq;

    fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
        let a = ComplexMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        a.qr().q()
    }

    fn bell() -> PureState {
        let s = 1.0 / 2f64.sqrt();
        PureState::new(
            ComplexVector::from_vec(vec![C64::new(s, 0.0), ZERO, ZERO, C64::new(s, 0.0)]),
            Layout::new(vec![2, 2]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn joint_basis_of_sigma_z() {
        let sensor = SensorSpec::new(
            2,
            vec![half_sigma_z().scale(2.0)],
            HermitianOperator::identity(2),
        )
        .unwrap();
        let b = joint_eigenbasis(0, &sensor).unwrap();
        assert!(
            max_abs(
                &(b.vectors.clone() - ComplexMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]))
            ) < 1e-15
        );
        assert_eq!(b.labels, vec![vec![-1.0], vec![1.0]]);
    }

    #[test]
    fn joint_basis_with_identity_generator() {
        let sensor = SensorSpec::new(
            2,
            vec![half_sigma_z().scale(2.0), HermitianOperator::identity(2)],
            HermitianOperator::identity(2),
        )
        .unwrap();
        let b = joint_eigenbasis(0, &sensor).unwrap();
        assert_eq!(b.labels, vec![vec![-1.0, 1.0], vec![1.0, 1.0]]);
    }

    #[test]
    fn joint_basis_recovers_conjugated_diagonals() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for n in [3, 4, 6] {
            let u = random_unitary(&mut rng, n);
            // degenerate spectra on purpose
            let d1: Vec<f64> = (0..n).map(|i| (i % 2) as f64).collect();
            let d2: Vec<f64> = (0..n).map(|i| (i / 2) as f64 * 0.7).collect();
            let conj = |d: &[f64]| {
                let m = &u * HermitianOperator::from_real_diagonal(d).matrix() * u.adjoint();
                HermitianOperator::new(m).unwrap()
            };
            let sensor = SensorSpec::new(
                n,
                vec![conj(&d1), conj(&d2)],
                HermitianOperator::identity(n),
            )
            .unwrap();
            let b = joint_eigenbasis(0, &sensor).unwrap();
            assert!(b.residual(sensor.generators()) <= 1e-9);
            let gram = b.vectors.adjoint() * &b.vectors;
            assert!(max_abs(&(gram - hilbert::identity(n))) < 1e-10);
        }
    }

    #[test]
    fn non_commuting_generators_rejected() {
        let sensor = SensorSpec::new(
            2,
            vec![crate::network::half_sigma_x(), half_sigma_z()],
            HermitianOperator::identity(2),
        )
        .unwrap();
        assert!(matches!(
            joint_eigenbasis(3, &sensor),
            Err(QsnError::NonCommuting { sensor: 3, .. })
        ));
        let net = SensorNetwork::new(vec![sensor]).unwrap();
        let psi = PureState::basis(0, net.layout().clone()).unwrap();
        assert!(separable_surrogate(&psi, &net).is_err());
    }

    #[test]
    fn surrogate_of_bell_state() {
        let net = qubit_network(2).unwrap();
        let surrogate = separable_surrogate(&bell(), &net).unwrap();
        for a in surrogate.amplitudes().iter() {
            assert_abs_diff_eq!(a.re, 0.5, epsilon = 1e-15);
            assert_abs_diff_eq!(a.im, 0.0, epsilon = 1e-15);
        }
        let fb = qfim_pure_network(&net, &bell()).unwrap();
        let fs = qfim_pure_network(&net, &surrogate).unwrap();
        for k in 0..2 {
            assert_abs_diff_eq!(fb.matrix()[(k, k)], fs.matrix()[(k, k)], epsilon = 1e-12);
        }
        assert_abs_diff_eq!(fs.matrix()[(0, 1)], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(fb.matrix()[(0, 1)], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn surrogate_of_diagonal_product_keeps_profile() {
        let net = qubit_network(2).unwrap();
        let a = PureState::normalized(
            ComplexVector::from_vec(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]),
            Layout::single(2).unwrap(),
        )
        .unwrap();
        let psi = a.tensor(&a).unwrap();
        let s = separable_surrogate(&psi, &net).unwrap();
        for (x, y) in psi.amplitudes().iter().zip(s.amplitudes().iter()) {
            assert_abs_diff_eq!(x.norm(), y.norm(), epsilon = 1e-14);
        }
        assert!(product_residual(&s).unwrap() < 1e-12);
    }

    #[test]
    fn surrogate_ignores_choice_within_degenerate_eigenspaces() {
        // Generator degenerate on a 2-dim subspace: rotating the basis there
        // leaves the surrogate QFIM untouched.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = HermitianOperator::from_real_diagonal(&[0.0, 1.0, 1.0]);
        let mk = |resource: HermitianOperator| {
            SensorNetwork::new(vec![
                SensorSpec::new(3, vec![h.clone()], resource).unwrap(),
                SensorSpec::new(2, vec![half_sigma_z()], HermitianOperator::identity(2)).unwrap(),
            ])
            .unwrap()
        };
        // two resource operators commuting with h but splitting the
        // degenerate subspace in different bases
        let r1 = HermitianOperator::from_real_diagonal(&[0.0, 1.0, 2.0]);
        let rot = {
            let mut u = hilbert::identity(3);
            let sub = random_unitary(&mut rng, 2);
            u.view_mut((1, 1), (2, 2)).copy_from(&sub);
            u
        };
        let r2 = HermitianOperator::new(&rot * r1.matrix() * rot.adjoint()).unwrap();
        let (n1, n2) = (mk(r1), mk(r2));
        let v = ComplexVector::from_fn(6, |_, _| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let psi = PureState::normalized(v, n1.layout().clone()).unwrap();
        let f1 = qfim_pure_network(&n1, &separable_surrogate(&psi, &n1).unwrap()).unwrap();
        let f2 = qfim_pure_network(&n2, &separable_surrogate(&psi, &n2).unwrap()).unwrap();
        assert!((f1.matrix() - f2.matrix()).amax() < 1e-12);
    }

    #[test]
    fn surrogate_resources_do_not_grow() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let net = crate::network::SensorFamily::OpticalMode
            .network(&[2, 3])
            .unwrap();
        for _ in 0..10 {
            let v = ComplexVector::from_fn(12, |_, _| {
                C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
            });
            let psi = PureState::normalized(v, net.layout().clone()).unwrap();
            let s = separable_surrogate(&psi, &net).unwrap();
            let (r0, r1) = (
                net.resource_count_pure(&psi).unwrap(),
                net.resource_count_pure(&s).unwrap(),
            );
            assert!(r1 <= r0 + 1e-12);
            assert_abs_diff_eq!(r0, r1, epsilon = 1e-12);
        }
    }

    #[test]
    fn purify_examples() {
        let zero = PureState::basis(0, Layout::single(2).unwrap())
            .unwrap()
            .to_density();
        let p = purify(&zero).unwrap();
        assert_abs_diff_eq!(p.amplitudes()[0].re, 1.0, epsilon = 1e-15);
        assert_eq!(p.layout().dims(), &[2, 2]);
        let mixed = DensityOperator::maximally_mixed(Layout::single(2).unwrap());
        let p = purify(&mixed).unwrap();
        let marginal = p.reduced(&[0]).unwrap();
        assert!(max_abs(&(marginal.matrix() - mixed.matrix())) < 1e-15);
        assert!(product_residual(&p).unwrap() > 0.49);
    }

    #[test]
    fn purify_round_trips_random_mixed_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let layout = Layout::new(vec![2, 3]).unwrap();
        for _ in 0..10 {
            let a = ComplexMatrix::from_fn(6, 4, |_, _| {
                C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
            });
            let m = &a * a.adjoint();
            let tr = m.trace();
            let rho = DensityOperator::new(m / tr, layout.clone()).unwrap();
            let psi = purify(&rho).unwrap();
            let back = partial_trace(&psi.to_density(), &[2, 3]).unwrap();
            assert!(max_abs(&(back.matrix() - rho.matrix())) <= 1e-9);
            let ancilla = partial_trace(&psi.to_density(), &[0, 1]).unwrap();
            assert!(max_abs(&(ancilla.matrix() - rho.matrix())) <= 1e-9);
        }
    }

    #[test]
    fn local_purification_of_product_is_product_of_purifications() {
        let net = qubit_network(2).unwrap();
        let a = DensityOperator::new(
            HermitianOperator::from_real_diagonal(&[0.7, 0.3]).into_matrix(),
            Layout::single(2).unwrap(),
        )
        .unwrap();
        let b = DensityOperator::maximally_mixed(Layout::single(2).unwrap());
        let rho = a.tensor(&b).unwrap();
        let probe = local_purification_probe(&rho, &net).unwrap();
        let expected = purify(&a).unwrap().tensor(&purify(&b).unwrap()).unwrap();
        assert!((probe.inner(&expected).norm() - 1.0).abs() < 1e-12);
        assert_eq!(probe.layout().dims(), &[2, 2, 2, 2]);
    }

    #[test]
    fn local_purification_of_bell_keeps_diagonal_blocks() {
        let net = qubit_network(2).unwrap();
        let rho = bell().to_density();
        let probe = local_purification_probe(&rho, &net).unwrap();
        let doubled = net.with_local_ancillas().unwrap();
        let f_orig = qfim_pure_network(&net, &bell()).unwrap();
        let f_local = qfim_pure_network(&doubled, &probe).unwrap();
        for k in 0..2 {
            assert_abs_diff_eq!(
                f_orig.matrix()[(k, k)],
                f_local.matrix()[(k, k)],
                epsilon = 1e-12
            );
        }
        assert_abs_diff_eq!(f_local.matrix()[(0, 1)], 0.0, epsilon = 1e-15);
        let r0 = net.resource_count_density(&rho).unwrap();
        let r1 = doubled.resource_count_pure(&probe).unwrap();
        assert!(r1 <= 2.0 * r0 + 1e-12);
    }

    #[test]
    fn extremal_superposition_single_qubit() {
        let psi = extremal_superposition(SensorFamily::QubitEnsemble, 1).unwrap();
        let s = 1.0 / 2f64.sqrt();
        assert_abs_diff_eq!(psi.amplitudes()[0].re, s, epsilon = 1e-15);
        assert_abs_diff_eq!(psi.amplitudes()[1].re, s, epsilon = 1e-15);
        let net = SensorFamily::QubitEnsemble.network(&[1]).unwrap();
        let f = qfim_pure_network(&net, &psi).unwrap();
        assert_abs_diff_eq!(f.matrix()[(0, 0)], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn extremal_superposition_is_local_ghz() {
        for n in 1..=5 {
            let psi = extremal_superposition(SensorFamily::QubitEnsemble, n).unwrap();
            let dim = 1usize << n;
            let s = 1.0 / 2f64.sqrt();
            assert_abs_diff_eq!(psi.amplitudes()[0].re, s, epsilon = 1e-15);
            assert_abs_diff_eq!(psi.amplitudes()[dim - 1].re, s, epsilon = 1e-15);
            let net = SensorFamily::QubitEnsemble.network(&[n]).unwrap();
            let f = qfim_pure_network(&net, &psi).unwrap();
            assert_abs_diff_eq!(f.matrix()[(0, 0)], (n * n) as f64, epsilon = 1e-12);
            assert_abs_diff_eq!(
                measured_kappa(SensorFamily::QubitEnsemble, n).unwrap(),
                1.0,
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn full_and_collective_representations_agree() {
        let n = 4;
        for family in [SensorFamily::QubitEnsemble, SensorFamily::CollectiveSpin] {
            let psi = extremal_superposition(family, n).unwrap();
            let net = family.network(&[n]).unwrap();
            let f = qfim_pure_network(&net, &psi).unwrap();
            assert_abs_diff_eq!(f.matrix()[(0, 0)], 16.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn ghz_probe_two_qubits() {
        let s = 1.0 / 2f64.sqrt();
        let probe = ghz_probe(&[s, s], 2, SensorFamily::QubitEnsemble).unwrap();
        assert_eq!(probe.allocation, vec![1, 1]);
        let amps = probe.state.amplitudes();
        assert_abs_diff_eq!(amps[0].re, s, epsilon = 1e-15);
        assert_abs_diff_eq!(amps[3].re, s, epsilon = 1e-15);
        assert_abs_diff_eq!(
            probe.network.resource_count_pure(&probe.state).unwrap(),
            2.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn ghz_probe_single_sensor_limit() {
        let probe = ghz_probe(&[1.0, 0.0], 3, SensorFamily::QubitEnsemble).unwrap();
        assert_eq!(probe.allocation, vec![3, 0]);
        let f = qfim_pure_network(&probe.network, &probe.state).unwrap();
        assert_abs_diff_eq!(f.matrix()[(0, 0)], 9.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.matrix()[(1, 1)], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn ghz_probe_reports_offending_index() {
        let v = [0.6, 0.8];
        match ghz_probe(&v, 5, SensorFamily::QubitEnsemble) {
            Err(QsnError::NonIntegerAllocation { index, .. }) => assert_eq!(index, 0),
            other => panic!("unexpected {other:?}"),
        }
        assert!(ghz_probe(&[-0.6, 0.8], 7, SensorFamily::QubitEnsemble).is_err());
    }

    #[test]
    fn ghz_qfim_is_rank_one_along_v() {
        let v = [0.6, 0.8];
        let probe = ghz_probe(&v, 7, SensorFamily::QubitEnsemble).unwrap();
        assert_eq!(probe.allocation, vec![3, 4]);
        let f = qfim_pure_network(&probe.network, &probe.state).unwrap();
        let ev = f.eigenvalues();
        assert_abs_diff_eq!(ev[0], 0.0, epsilon = 1e-12);
        let l1: f64 = 1.4;
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(
                    f.matrix()[(i, j)],
                    49.0 * v[i] * v[j] / (l1 * l1),
                    epsilon = 1e-10
                );
            }
        }
    }

    #[test]
    fn allocation_examples() {
        let s = 1.0 / 2f64.sqrt();
        assert_eq!(
            optimal_allocation(&[s, s], 4).unwrap(),
            AllocationVector(vec![2, 2])
        );
        assert_eq!(
            optimal_allocation(&[1.0, 0.0], 5).unwrap(),
            AllocationVector(vec![5, 0])
        );
        assert!(optimal_allocation(&[s, s], 1).is_err());
    }

    #[test]
    fn exhaustive_matches_brute_force_enumeration() {
        // independent enumeration over all pairs/triples
        let v = [0.2, 0.5, (1.0f64 - 0.29).sqrt()];
        let n = 9;
        let mut best = (f64::INFINITY, vec![]);
        for a in 0..=n {
            for b in 0..=n - a {
                let w = vec![a, b, n - a - b];
                let obj = allocation_objective(&v, &w);
                if obj < best.0 {
                    best = (obj, w);
                }
            }
        }
        let w = optimal_allocation(&v, n).unwrap();
        assert_abs_diff_eq!(allocation_objective(&v, &w.0), best.0, epsilon = 1e-15);
    }

    #[test]
    fn greedy_matches_exhaustive_on_small_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let d = rng.random_range(2..5);
            let raw: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
            let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
            let v: Vec<f64> = raw.iter().map(|x| x / norm).collect();
            let n = rng.random_range(d..20);
            let e = exhaustive_allocation(&v, n);
            let g = greedy_allocation(&v, n);
            assert_abs_diff_eq!(
                allocation_objective(&v, &e),
                allocation_objective(&v, &g),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn separable_probe_bound_matches_state_level_qfim() {
        let s = 1.0 / 2f64.sqrt();
        let probe = optimal_separable_probe(&[s, s], 4, SensorFamily::QubitEnsemble, 1).unwrap();
        assert_abs_diff_eq!(probe.variance_bound, 0.25, epsilon = 1e-15);
        let f = qfim_pure_network(&probe.network, &probe.state).unwrap();
        let m = crate::fisher::orthogonal_completion(&[s, s]).unwrap();
        let rotated = crate::fisher::rotate_qfim(&f, &m).unwrap();
        let report = qcrb(&rotated, &WeightMatrix::new(vec![1.0, 0.0]).unwrap(), 1).unwrap();
        assert_abs_diff_eq!(report.bound.unwrap(), 0.25, epsilon = 1e-12);
    }
}
