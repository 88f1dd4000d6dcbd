//! Random ensembles for the audits. All samplers take the RNG explicitly so
//! each trial can own a seeded stream.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::fisher::Povm;
use crate::hilbert::{
    self, eigh_matrix, ComplexMatrix, ComplexVector, DensityOperator, HermitianOperator, Layout,
    PureState, C64,
};
use crate::network::{Partition, SensorNetwork, SensorSpec, WeightMatrix};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(gaussian(rng), gaussian(rng)) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Haar unitary: QR of a Ginibre matrix with the phases of `diag(R)`
/// moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let qr = ginibre(rng, n, n).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        q.column_mut(j).iter_mut().for_each(|x| *x *= phase);
    }
    q
}

pub fn haar_state<R: Rng + ?Sized>(rng: &mut R, layout: &Layout) -> Result<PureState> {
    let v = ComplexVector::from_fn(layout.total(), |_, _| complex_gaussian(rng));
    PureState::normalized(v, layout.clone())
}

/// Marginal of a Haar-random pure state on `layout ⊗ C^env`.
pub fn random_mixed<R: Rng + ?Sized>(
    rng: &mut R,
    layout: &Layout,
    env: usize,
) -> Result<DensityOperator> {
    let joint = layout.concat(&Layout::single(env)?)?;
    let psi = haar_state(rng, &joint)?;
    hilbert::partial_trace(&psi.to_density(), &[layout.len()])
}

/// GUE-style Hermitian matrix.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> HermitianOperator {
    let a = ginibre(rng, n, n);
    HermitianOperator::new((&a + a.adjoint()) * C64::new(0.5, 0.0)).expect("symmetrized")
}

/// `AᵀA/d + εI` with Gaussian `A`.
pub fn random_spd<R: Rng + ?Sized>(rng: &mut R, d: usize, eps: f64) -> DMatrix<f64> {
    let a = DMatrix::from_fn(d, d, |_, _| gaussian(rng));
    a.transpose() * &a / d as f64 + DMatrix::identity(d, d) * eps
}

/// Uniformly random composition of `d` into positive block sizes.
pub fn random_partition<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Partition {
    let mut sizes = Vec::new();
    let mut current = 1;
    for _ in 1..d {
        if rng.random_bool(0.5) {
            sizes.push(current);
            current = 1;
        } else {
            current += 1;
        }
    }
    sizes.push(current);
    Partition::new(sizes).expect("positive sizes")
}

pub fn random_weights<R: Rng + ?Sized>(rng: &mut R, d: usize) -> WeightMatrix {
    WeightMatrix::new((0..d).map(|_| rng.random_range(0.1..1.0)).collect())
        .expect("positive weights")
}

/// `E_i = S^{-1/2} G_i S^{-1/2}` with `G_i = A_i A_i†` Wishart and `S = Σ G_i`.
pub fn random_povm<R: Rng + ?Sized>(rng: &mut R, dim: usize, outcomes: usize) -> Result<Povm> {
    let grams: Vec<ComplexMatrix> = (0..outcomes)
        .map(|_| {
            let a = ginibre(rng, dim, dim);
            &a * a.adjoint()
        })
        .collect();
    let total = grams
        .iter()
        .fold(ComplexMatrix::zeros(dim, dim), |acc, g| acc + g);
    let e = eigh_matrix(&total);
    let mut inv_sqrt = e.vectors.clone();
    for (j, &lambda) in e.values.iter().enumerate() {
        inv_sqrt.column_mut(j).scale_mut(1.0 / lambda.sqrt());
    }
    let inv_sqrt = inv_sqrt * e.vectors.adjoint();
    let effects = grams
        .iter()
        .map(|g| {
            let m = &inv_sqrt * g * &inv_sqrt;
            HermitianOperator::new((&m + m.adjoint()) * C64::new(0.5, 0.0))
        })
        .collect::<Result<Vec<_>>>()?;
    Povm::new(effects)
}

/// `U diag(values) U†`.
fn conjugate(u: &ComplexMatrix, values: &[f64]) -> HermitianOperator {
    let m = u * HermitianOperator::from_real_diagonal(values).matrix() * u.adjoint();
    HermitianOperator::new((&m + m.adjoint()) * C64::new(0.5, 0.0)).expect("symmetrized")
}

/// Spectrum for a random diagonal generator; sometimes degenerate so the
/// joint-eigenbasis refinement is exercised.
fn random_spectrum<R: Rng + ?Sized>(rng: &mut R, q: usize) -> Vec<f64> {
    if rng.random_bool(0.3) {
        // {0, 1} entries, never constant
        let mut s: Vec<f64> = (0..q).map(|_| rng.random_range(0..2) as f64).collect();
        let k = rng.random_range(0..q);
        s[k] = 1.0 - s[(k + 1) % q];
        s
    } else {
        (0..q).map(|_| gaussian(rng)).collect()
    }
}

/// Sensor whose generators and resource are all diagonal in one random
/// basis. Resource spectra are nonnegative integers.
pub fn random_commuting_sensor<R: Rng + ?Sized>(
    rng: &mut R,
    q: usize,
    generators: usize,
) -> Result<SensorSpec> {
    let u = haar_unitary(rng, q);
    let gens = (0..generators)
        .map(|_| conjugate(&u, &random_spectrum(rng, q)))
        .collect();
    let resource: Vec<f64> = (0..q).map(|_| rng.random_range(0..=q) as f64).collect();
    SensorSpec::new(q, gens, conjugate(&u, &resource))
}

/// Sensor with two generically non-commuting generators and an independent
/// random positive resource.
pub fn random_noncommuting_sensor<R: Rng + ?Sized>(rng: &mut R, q: usize) -> Result<SensorSpec> {
    let gens = vec![random_hermitian(rng, q), random_hermitian(rng, q)];
    let u = haar_unitary(rng, q);
    let resource: Vec<f64> = (0..q).map(|_| rng.random_range(0.0..2.0)).collect();
    SensorSpec::new(q, gens, conjugate(&u, &resource))
}

/// Network with sensor count and local dimensions drawn from the given
/// ranges; each sensor has one or two commuting generators.
pub fn random_commuting_network<R: Rng + ?Sized>(
    rng: &mut R,
    sensors: std::ops::RangeInclusive<usize>,
    dims: std::ops::RangeInclusive<usize>,
) -> Result<SensorNetwork> {
    let count = rng.random_range(sensors);
    let specs = (0..count)
        .map(|_| {
            let q = rng.random_range(dims.clone());
            // at most q - 1 generators can be independent modulo the identity
            let g = rng.random_range(1..=2.min(q - 1));
            random_commuting_sensor(rng, q, g)
        })
        .collect::<Result<Vec<_>>>()?;
    SensorNetwork::new(specs)
}

/// Network whose first sensor has non-commuting generators; remaining
/// sensors have a single generator.
pub fn random_noncommuting_network<R: Rng + ?Sized>(
    rng: &mut R,
    sensors: std::ops::RangeInclusive<usize>,
    dims: std::ops::RangeInclusive<usize>,
) -> Result<SensorNetwork> {
    let count = rng.random_range(sensors);
    let q = rng.random_range(dims.clone());
    let mut specs = vec![random_noncommuting_sensor(rng, q)?];
    for _ in 1..count {
        let q = rng.random_range(dims.clone());
        specs.push(random_commuting_sensor(rng, q, 1)?);
    }
    SensorNetwork::new(specs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::max_abs;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..6 {
            let u = haar_unitary(&mut rng, n);
            assert!(max_abs(&(u.adjoint() * &u - hilbert::identity(n))) < 1e-12);
        }
    }

    #[test]
    fn haar_first_moment() {
        // E|U_00|² = 1/n
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 3;
        let trials = 4000;
        let mean: f64 = (0..trials)
            .map(|_| haar_unitary(&mut rng, n)[(0, 0)].norm_sqr())
            .sum::<f64>()
            / trials as f64;
        assert!((mean - 1.0 / 3.0).abs() < 0.02);
    }

    #[test]
    fn random_mixed_is_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let layout = Layout::new(vec![2, 3]).unwrap();
        let rho = random_mixed(&mut rng, &layout, 2).unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
        let positive = rho.eigh().values.iter().filter(|&&p| p > 1e-12).count();
        assert_eq!(positive, 2);
    }

    #[test]
    fn random_povm_is_complete() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let povm = random_povm(&mut rng, 4, 5).unwrap();
        let sum = povm
            .effects()
            .iter()
            .fold(ComplexMatrix::zeros(4, 4), |acc, e| acc + e.matrix());
        assert!(max_abs(&(sum - hilbert::identity(4))) < 1e-9);
    }

    #[test]
    fn random_partitions_cover_dimension() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in 1..13 {
            assert_eq!(random_partition(&mut rng, d).dim(), d);
        }
    }

    #[test]
    fn commuting_networks_commute() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let net = random_commuting_network(&mut rng, 2..=4, 2..=4).unwrap();
            let diag = net.validate().unwrap();
            assert!(diag.all_commuting && diag.all_resources_conserved);
        }
        let net = random_noncommuting_network(&mut rng, 2..=3, 2..=3).unwrap();
        assert!(!net.all_commuting());
    }
}
