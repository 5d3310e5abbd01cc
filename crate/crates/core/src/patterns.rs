//! Pattern densities in ordered selections and in step measures.

use serde::{Deserialize, Serialize};

use crate::embed::embed_selection;
use crate::error::{Error, Result};
use crate::perm::{OrderedSelection, Permutation};
use crate::rng;
use crate::sampling::CellSampler;
use crate::scalar::Scalar;
use crate::step::StepPermuton;

/// Default cap on the number of cell multisets the exact enumeration visits.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 100_000_000;

/// Monte Carlo draws are processed in chunks of this size, chunk `c` using
/// random stream `c`; the estimate is the sum of per-chunk counts.
pub const MC_CHUNK: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DensityMethod {
    #[serde(rename = "exact-enumeration")]
    ExactEnumeration,
    #[serde(rename = "monte-carlo")]
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatternDensityResult<T = f64> {
    pub tau: Permutation,
    pub value: T,
    pub method: DensityMethod,
    pub std_error: f64,
    #[serde(rename = "samples")]
    pub sample_count: u64,
}

impl<T: Scalar> PatternDensityResult<T> {
    fn exact(tau: &Permutation, value: T) -> Self {
        Self { tau: tau.clone(), value, method: DensityMethod::ExactEnumeration, std_error: 0.0, sample_count: 0 }
    }

    pub fn to_f64(&self) -> PatternDensityResult<f64> {
        PatternDensityResult {
            tau: self.tau.clone(),
            value: self.value.to_f64(),
            method: self.method,
            std_error: self.std_error,
            sample_count: self.sample_count,
        }
    }
}

/// The pattern formed by planar points: `sigma(i)` is the y-rank of the point
/// with the `i`-th smallest x-coordinate.
pub fn pattern_of_points<T: PartialOrd>(points: &[(T, T)]) -> Result<Permutation> {
    let k = points.len();
    if k == 0 {
        return Err(Error::Domain("no points".into()));
    }
    let mut by_x: Vec<usize> = (0..k).collect();
    by_x.sort_by(|&a, &b| points[a].0.partial_cmp(&points[b].0).expect("comparable coordinates"));
    let mut by_y: Vec<usize> = (0..k).collect();
    by_y.sort_by(|&a, &b| points[a].1.partial_cmp(&points[b].1).expect("comparable coordinates"));
    for w in by_x.windows(2) {
        if points[w[0]].0 == points[w[1]].0 {
            return Err(Error::Tie { first: w[0].min(w[1]), second: w[0].max(w[1]) });
        }
    }
    for w in by_y.windows(2) {
        if points[w[0]].1 == points[w[1]].1 {
            return Err(Error::Tie { first: w[0].min(w[1]), second: w[0].max(w[1]) });
        }
    }
    let mut y_rank = vec![0; k];
    for (rank, &p) in by_y.iter().enumerate() {
        y_rank[p] = rank + 1;
    }
    Ok(Permutation::from_ranks(by_x.iter().map(|&p| y_rank[p]).collect()))
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn realizes(tau: &[usize], values: &[usize]) -> bool {
    for a in 0..tau.len() {
        for b in a + 1..tau.len() {
            if (values[a] < values[b]) != (tau[a] < tau[b]) {
                return false;
            }
        }
    }
    true
}

/// `Gamma(tau, nu)`: increasing index tuples of `nu` whose values form `tau`.
pub fn count_occurrences(tau: &Permutation, nu: &OrderedSelection) -> Result<u128> {
    let (k, m) = (tau.len(), nu.m());
    if k > m {
        return Err(Error::Domain(format!("pattern of length {k} exceeds selection length {m}")));
    }
    let mut idx: Vec<usize> = (0..k).collect();
    let mut values = vec![0; k];
    let mut count = 0u128;
    loop {
        for (slot, &i) in idx.iter().enumerate() {
            values[slot] = nu.values()[i];
        }
        if realizes(tau.values(), &values) {
            count += 1;
        }
        // Next k-combination of 0..m in lexicographic order.
        let mut t = k;
        while t > 0 && idx[t - 1] == m - k + t - 1 {
            t -= 1;
        }
        if t == 0 {
            break;
        }
        idx[t - 1] += 1;
        for s in t..k {
            idx[s] = idx[s - 1] + 1;
        }
    }
    Ok(count)
}

/// `t(tau, nu) = Gamma(tau, nu) / C(m, k)`.
pub fn density_in_selection<T: Scalar>(tau: &Permutation, nu: &OrderedSelection) -> Result<PatternDensityResult<T>> {
    let count = count_occurrences(tau, nu)?;
    let total = binomial(nu.m(), tau.len());
    let value = T::from_usize(count as usize) / T::from_usize(total as usize);
    Ok(PatternDensityResult::exact(tau, value))
}

/// Exact `t(tau, mu) = P(mu^(k) = tau)` for a step measure.
pub fn density_in_step_permuton_exact<T: Scalar>(
    tau: &Permutation,
    mu: &StepPermuton<T>,
) -> Result<PatternDensityResult<T>> {
    density_in_step_permuton_exact_with_budget(tau, mu, DEFAULT_ENUMERATION_BUDGET)
}

/// As [`density_in_step_permuton_exact`] with an explicit cap on the number
/// of cell multisets visited.
///
/// The `k` iid points are assigned to active cells; assignments are grouped
/// into multisets weighted by their multinomial count. Given an assignment,
/// points sharing a column have a uniformly random relative x-order, points
/// sharing a row a uniformly random y-order, independently, while points in
/// distinct columns (rows) are ordered by the grid. The conditional
/// probability of `tau` is the number of compatible x-rank assignments
/// divided by the number of within-block orders.
///
/// Cells of one grid never partially overlap, so every comparison is either
/// forced or uniformly random.
pub fn density_in_step_permuton_exact_with_budget<T: Scalar>(
    tau: &Permutation,
    mu: &StepPermuton<T>,
    budget: u128,
) -> Result<PatternDensityResult<T>> {
    let k = tau.len();
    if k == 1 {
        return Ok(PatternDensityResult::exact(tau, T::one()));
    }
    let cells: Vec<(usize, usize, T)> =
        mu.active_cells().into_iter().map(|(i, j)| (i, j, mu.mass(i, j).clone())).collect();
    let c = cells.len();
    let terms = binomial(c + k - 1, k);
    if terms > budget {
        return Err(Error::Resource { terms, budget });
    }
    let factorial: Vec<u128> = (0..=k)
        .scan(1u128, |f, i| {
            if i > 0 {
                *f *= i as u128;
            }
            Some(*f)
        })
        .collect();
    let tau_values: Vec<usize> = tau.values().iter().map(|v| v - 1).collect();

    let mut total = T::zero();
    let mut choice = vec![0usize; k];
    loop {
        // choice is a non-decreasing sequence of cell indices.
        let weight = multiset_weight(&choice, &cells, &factorial);
        if !weight.is_zero() {
            let (count, orders) = compatible_orders(&choice, &cells, &tau_values, &factorial);
            if count > 0 {
                total = total + weight * T::from_usize(count as usize) / T::from_usize(orders as usize);
            }
        }
        let mut t = k;
        while t > 0 && choice[t - 1] == c - 1 {
            t -= 1;
        }
        if t == 0 {
            break;
        }
        let next = choice[t - 1] + 1;
        for slot in choice.iter_mut().skip(t - 1) {
            *slot = next;
        }
    }
    Ok(PatternDensityResult::exact(tau, total))
}

/// Probability of drawing the multiset `choice` in some order.
fn multiset_weight<T: Scalar>(choice: &[usize], cells: &[(usize, usize, T)], factorial: &[u128]) -> T {
    let k = choice.len();
    let mut weight = T::one();
    let mut multinomial = factorial[k];
    let mut run = 1;
    for t in 0..k {
        weight = weight * cells[choice[t]].2.clone();
        if t + 1 < k && choice[t + 1] == choice[t] {
            run += 1;
        } else {
            multinomial /= factorial[run];
            run = 1;
        }
    }
    weight * T::from_usize(multinomial as usize)
}

/// Returns `(compatible, total)` where `total` is the number of equally likely
/// (x-order, y-order) pairs and `compatible` those producing the pattern.
fn compatible_orders<T>(
    choice: &[usize],
    cells: &[(usize, usize, T)],
    tau: &[usize],
    factorial: &[u128],
) -> (u128, u128) {
    let k = choice.len();
    let columns: Vec<usize> = choice.iter().map(|&c| cells[c].0).collect();
    let rows: Vec<usize> = choice.iter().map(|&c| cells[c].1).collect();
    // Rank range [start, end) of each point's column block and row block.
    let block_range = |keys: &[usize], p: usize| {
        let start = keys.iter().filter(|&&q| q < keys[p]).count();
        let size = keys.iter().filter(|&&q| q == keys[p]).count();
        (start, start + size)
    };
    let mut allowed = vec![0u32; k];
    for (p, mask) in allowed.iter_mut().enumerate() {
        let (xs, xe) = block_range(&columns, p);
        let (ys, ye) = block_range(&rows, p);
        for (r, t) in tau.iter().enumerate().take(xe).skip(xs) {
            if (ys..ye).contains(t) {
                *mask |= 1 << r;
            }
        }
    }
    // Permanent of the point/rank incidence matrix, ranks filled in order.
    let mut ways = vec![0u128; 1 << k];
    ways[0] = 1;
    for mask in 0..(1usize << k) {
        let w = ways[mask];
        if w == 0 {
            continue;
        }
        let rank = mask.count_ones();
        if rank as usize == k {
            continue;
        }
        for p in 0..k {
            if mask & (1 << p) == 0 && allowed[p] & (1 << rank) != 0 {
                ways[mask | (1 << p)] += w;
            }
        }
    }
    let mut orders = 1u128;
    for keys in [&columns, &rows] {
        let mut sorted = keys.clone();
        sorted.sort_unstable();
        let mut run = 1;
        for t in 0..k {
            if t + 1 < k && sorted[t + 1] == sorted[t] {
                run += 1;
            } else {
                orders *= factorial[run];
                run = 1;
            }
        }
    }
    (ways[(1 << k) - 1], orders)
}

/// Exact densities of every pattern of length `k`, in lexicographic order.
pub fn pattern_distribution_exact<T: Scalar>(mu: &StepPermuton<T>, k: usize) -> Result<Vec<PatternDensityResult<T>>> {
    Permutation::all(k).iter().map(|tau| density_in_step_permuton_exact(tau, mu)).collect()
}

/// Monte Carlo estimate of `t(tau, mu)` from `samples` independent draws of
/// `mu^(k)`. Deterministic for a fixed seed.
pub fn density_in_permuton_mc<T: Scalar>(
    tau: &Permutation,
    mu: &StepPermuton<T>,
    samples: u64,
    seed: u64,
) -> Result<PatternDensityResult<f64>> {
    if samples == 0 {
        return Err(Error::Domain("at least one sample is required".into()));
    }
    let k = tau.len();
    if k == 1 {
        return Ok(PatternDensityResult {
            tau: tau.clone(),
            value: 1.0,
            method: DensityMethod::MonteCarlo,
            std_error: 0.0,
            sample_count: samples,
        });
    }
    let sampler = CellSampler::new(&mu.to_f64())?;
    let mut hits = 0u64;
    let mut points = Vec::with_capacity(k);
    let chunks = samples.div_ceil(MC_CHUNK);
    for chunk in 0..chunks {
        let mut rng = rng::stream(seed, chunk);
        let in_chunk = MC_CHUNK.min(samples - chunk * MC_CHUNK);
        for _ in 0..in_chunk {
            sampler.draw_distinct(k, &mut rng, &mut points);
            if pattern_of_points(&points)? == *tau {
                hits += 1;
            }
        }
    }
    let p = hits as f64 / samples as f64;
    Ok(PatternDensityResult {
        tau: tau.clone(),
        value: p,
        method: DensityMethod::MonteCarlo,
        std_error: (p * (1.0 - p) / samples as f64).sqrt(),
        sample_count: samples,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lemma45Gap<T = f64> {
    /// `|t(tau, nu) - t(tau, mu_nu)|`.
    pub gap: T,
    /// `C(k, 2) / m`.
    pub bound: T,
}

/// Compares the density of `tau` in `nu` with its density in the embedding of `nu`.
pub fn lemma45_gap<T: Scalar>(tau: &Permutation, nu: &OrderedSelection) -> Result<Lemma45Gap<T>> {
    let discrete = density_in_selection::<T>(tau, nu)?.value;
    let continuous = density_in_step_permuton_exact(tau, &embed_selection::<T>(nu))?.value;
    let pairs = binomial(tau.len(), 2) as usize;
    Ok(Lemma45Gap { gap: (discrete - continuous).abs(), bound: T::from_usize(pairs) / T::from_usize(nu.m()) })
}
