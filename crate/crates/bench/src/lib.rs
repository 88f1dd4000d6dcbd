//! Seeded fixtures shared by the benchmarks.

use qsn_core::scenarios::random::{haar_state, random_commuting_network, random_mixed, random_spd};
use qsn_core::{DensityOperator, PureState, Qfim, SensorNetwork};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A network of `sensors` sensors of local dimension `q`, with one pure and
/// one mixed probe on it.
pub struct Fixture {
    pub network: SensorNetwork,
    pub pure: PureState,
    pub mixed: DensityOperator,
}

pub fn fixture(seed: u64, sensors: usize, q: usize) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let network =
        random_commuting_network(&mut rng, sensors..=sensors, q..=q).expect("valid network");
    let pure = haar_state(&mut rng, network.layout()).expect("valid state");
    let mixed = random_mixed(&mut rng, network.layout(), 2).expect("valid state");
    Fixture {
        network,
        pure,
        mixed,
    }
}

/// A well-conditioned random QFIM of size `d` without a block partition.
pub fn spd_qfim(seed: u64, d: usize) -> Qfim {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Qfim::new(random_spd(&mut rng, d, 0.05), None).expect("valid matrix")
}
