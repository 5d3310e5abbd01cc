//! Worked examples and random generators of valid generalized permutons.

use rand::Rng;

use crate::embed::{embed_selection, mu_sigma};
use crate::perm::{OrderedSelection, Permutation};
use crate::rng;
use crate::scalar::{exact_decimal, Exact, Scalar};
use crate::step::StepPermuton;

fn r(n: i64, d: i64) -> Exact {
    Exact::ratio(n, d)
}

fn decimals(values: &[&str]) -> Vec<Exact> {
    values.iter().map(|v| exact_decimal(v)).collect()
}

/// The ordered selection `(2,4,1)` of `[5]`.
pub fn example_2_1_selection() -> OrderedSelection {
    OrderedSelection::new(5, vec![2, 4, 1]).expect("valid selection")
}

/// A `0.8`-permuton with uniform x-marginal whose y-marginal has the
/// quartiles `0.4, 0.55, 0.75`: mass `1/4` on each diagonal cell of the
/// `[0,0.2,..,0.8] x [0,0.4,0.55,0.75,1]` grid.
///
/// The quartile gap `0.15` forces a y-slope of `5/3 > 1/0.8`, so this measure
/// fails the Lipschitz check; only its quantiles are used.
pub fn example_3_1_target() -> StepPermuton<Exact> {
    let mut cell_mass = vec![vec![r(0, 1); 4]; 4];
    for (i, column) in cell_mass.iter_mut().enumerate() {
        column[i] = r(1, 4);
    }
    StepPermuton::new(
        decimals(&["0", "0.2", "0.4", "0.6", "0.8"]),
        decimals(&["0", "0.4", "0.55", "0.75", "1"]),
        cell_mass,
        exact_decimal("0.8"),
    )
    .expect("well-formed grid")
}

pub fn example_3_1_sigma() -> Permutation {
    Permutation::new(vec![2, 3, 1, 4]).expect("valid permutation")
}

/// A valid `3/5`-permuton whose y-marginal has tertiles `0.25` and `0.74`;
/// with `N = 5`, `M = 3` its black stripes are `(0.2,0.4], (0.6,0.8], (0.8,1]`.
pub fn example_4_1_target() -> StepPermuton<Exact> {
    let sixth = r(1, 6);
    let zero = r(0, 1);
    let column = |rows: [usize; 2]| -> Vec<Exact> {
        (1..=3).map(|j| if rows.contains(&j) { sixth.clone() } else { zero.clone() }).collect()
    };
    StepPermuton::new(
        decimals(&["0", "0.2", "0.4", "0.6"]),
        decimals(&["0", "0.25", "0.74", "1"]),
        vec![column([1, 2]), column([3, 1]), column([3, 2])],
        r(3, 5),
    )
    .expect("well-formed grid")
}

pub const EXAMPLE_4_1_N: usize = 5;
pub const EXAMPLE_4_1_M: usize = 3;
pub const EXAMPLE_4_1_K: usize = 2;

/// Seed under which digitizing the magnified [`example_4_1_target`] yields
/// [`example_4_1_sigma`].
pub const EXAMPLE_4_1_SEED: u64 = 1089;

pub fn example_4_1_sigma() -> Permutation {
    Permutation::new(vec![2, 3, 6, 1, 5, 4]).expect("valid permutation")
}

pub fn example_4_1_selection() -> OrderedSelection {
    OrderedSelection::new(10, vec![4, 7, 10, 3, 9, 8]).expect("valid selection")
}

/// A uniformly random member of `V_{n,m}`.
pub fn random_selection<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> OrderedSelection {
    let values = rand::seq::index::sample(rng, n, m).into_iter().map(|v| v + 1).collect();
    OrderedSelection::new(n, values).expect("distinct values in range")
}

/// A convex combination of `components` random embeddings from `V_{n,m}`
/// with random integer weights: always a valid `m/n`-permuton.
pub fn random_mixture<R: Rng + ?Sized>(n: usize, m: usize, components: usize, rng: &mut R) -> StepPermuton<Exact> {
    let weights: Vec<i64> = (0..components.max(1)).map(|_| rng.random_range(1..=9)).collect();
    let total: i64 = weights.iter().sum();
    let mut cell_mass = vec![vec![r(0, 1); n]; m];
    for &w in &weights {
        let nu = random_selection(n, m, rng);
        for (h, &v) in nu.values().iter().enumerate() {
            cell_mass[h][v - 1] += r(w, total * m as i64);
        }
    }
    let base = embed_selection::<Exact>(&OrderedSelection::new(n, (1..=m).collect()).expect("identity selection"));
    StepPermuton::new(base.x_cuts().to_vec(), base.y_cuts().to_vec(), cell_mass, r(m as i64, n as i64))
        .expect("mixture grid is well formed")
}

/// `mu_sigma` of a random mixture for a random `sigma` of `[k]`: a valid
/// permuton on a non-uniform grid.
pub fn random_pattern_measure<R: Rng + ?Sized>(n: usize, m: usize, k: usize, rng: &mut R) -> StepPermuton<Exact> {
    let base = random_mixture(n, m, 3, rng);
    let sigma = Permutation::new(random_selection(k, k, rng).values().to_vec()).expect("a permutation");
    mu_sigma(&base, &sigma).expect("mixtures have strictly increasing quantiles")
}

/// A random probability measure on a random rational grid of `columns x rows`
/// cells inside `[0,1]^2` (not necessarily a permuton). Cut positions are
/// multiples of `1/resolution`.
pub fn random_step_measure<R: Rng + ?Sized>(
    columns: usize,
    rows: usize,
    resolution: i64,
    rng: &mut R,
) -> StepPermuton<Exact> {
    let mut cuts = |count: usize| -> Vec<Exact> {
        let inner = rand::seq::index::sample(rng, resolution as usize - 1, count - 1);
        let mut points: Vec<i64> = inner.into_iter().map(|v| v as i64 + 1).collect();
        points.sort_unstable();
        std::iter::once(0).chain(points).chain(std::iter::once(resolution)).map(|p| r(p, resolution)).collect()
    };
    let x_cuts = cuts(columns);
    let y_cuts = cuts(rows);
    let weights: Vec<Vec<i64>> = (0..columns)
        .map(|_| (0..rows).map(|_| if rng.random_bool(0.3) { 0 } else { rng.random_range(1..=20) }).collect())
        .collect();
    let total: i64 = weights.iter().flatten().sum::<i64>().max(1);
    let mut cell_mass: Vec<Vec<Exact>> = weights.iter().map(|c| c.iter().map(|&w| r(w, total)).collect()).collect();
    if weights.iter().flatten().all(|&w| w == 0) {
        cell_mass[0][0] = r(1, 1);
    }
    StepPermuton::new(x_cuts, y_cuts, cell_mass, r(1, 1)).expect("random grid is well formed")
}

/// The uniform `lambda`-permuton on `[0, lambda] x [0, 1]`.
pub fn uniform_strip(lambda: Exact) -> StepPermuton<Exact> {
    StepPermuton::new(vec![r(0, 1), lambda.clone()], vec![r(0, 1), r(1, 1)], vec![vec![r(1, 1)]], lambda)
        .expect("single cell")
}

/// A named target for the approximation experiments.
#[derive(Debug, Clone)]
pub struct NamedTarget {
    pub name: &'static str,
    pub target: StepPermuton<Exact>,
    /// `N / M` for every admissible `(N, M)`: `lambda = 1 / ratio`.
    pub ratio: usize,
}

/// Five valid targets with `lambda` in `{1, 1/2, 1/5}`.
pub fn approximation_targets() -> Vec<NamedTarget> {
    let mut rng = rng::stream(20_240_601, 0);
    let anti = OrderedSelection::new(4, vec![4, 3, 2, 1]).expect("valid selection");
    vec![
        NamedTarget { name: "uniform-square", target: StepPermuton::uniform_square(), ratio: 1 },
        NamedTarget { name: "anti-diagonal-4", target: embed_selection(&anti), ratio: 1 },
        NamedTarget { name: "mixture-6-3", target: random_mixture(6, 3, 4, &mut rng), ratio: 2 },
        NamedTarget { name: "uniform-strip-1/2", target: uniform_strip(r(1, 2)), ratio: 2 },
        NamedTarget { name: "mixture-10-2", target: random_mixture(10, 2, 3, &mut rng), ratio: 5 },
    ]
}

/// Three valid permutons for the concentration experiments, in `f64`.
pub fn concentration_fixtures() -> Vec<(&'static str, StepPermuton<f64>)> {
    let mut rng = rng::stream(7, 0);
    vec![
        ("uniform-square", StepPermuton::uniform_square()),
        ("example-2.1", embed_selection(&example_2_1_selection())),
        ("mixture-5-5", random_mixture(5, 5, 3, &mut rng).to_f64()),
    ]
}
