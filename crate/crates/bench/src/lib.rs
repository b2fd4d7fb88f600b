//! Seeded fixtures shared by the benches in `benches/`.

use lbforge::mpas::IntervalAssignment;
use lbforge::numerics::{rat, EpsRational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `n` valid intervals with sizes and offsets on a `1/grid` lattice.
pub fn random_assignments(n: usize, grid: i64, seed: u64) -> Vec<IntervalAssignment> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|id| {
            let size = rng.random_range(1..=grid);
            let offset = rng.random_range(0..=grid - size);
            IntervalAssignment::new(
                id,
                EpsRational::real(rat(size, grid)),
                EpsRational::real(rat(offset, grid)),
            )
        })
        .collect()
}

/// `n` item sizes in `(0, 1]` on a `1/grid` lattice.
pub fn random_sizes(n: usize, grid: i64, seed: u64) -> Vec<EpsRational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| EpsRational::real(rat(rng.random_range(1..=grid), grid)))
        .collect()
}
