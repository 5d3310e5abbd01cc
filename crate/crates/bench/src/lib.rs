//! Inputs shared by the criterion benchmarks.

use genperm_core::fixtures::{random_mixture, random_step_measure};
use genperm_core::{rng, Exact, StepPermuton};

/// A pair of random step measures with `cells x cells` grids.
pub fn measure_pair(cells: usize, seed: u64) -> (StepPermuton<Exact>, StepPermuton<Exact>) {
    let mut rng = rng::stream(seed, 0);
    let resolution = 4 * cells as i64;
    (random_step_measure(cells, cells, resolution, &mut rng), random_step_measure(cells, cells, resolution, &mut rng))
}

/// A random valid `m/n`-permuton.
pub fn mixture(n: usize, m: usize, seed: u64) -> StepPermuton<Exact> {
    random_mixture(n, m, 4, &mut rng::stream(seed, 0))
}
