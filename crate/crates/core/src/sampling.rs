//! Sampling from step measures: iid points, random patterns `mu^(k)`, random
//! subpermutons `sigma(k, mu)`, and the concentration experiment for the
//! distance between a measure and its random subpermuton.

use std::collections::HashSet;

use rand::Rng;
use serde::Serialize;

use crate::embed::{k_subdivision, place_pattern};
use crate::error::{Error, Result};
use crate::metrics::{d_inf, d_square, union_grid_size};
use crate::patterns::pattern_of_points;
use crate::perm::Permutation;
use crate::rng;
use crate::scalar::Scalar;
use crate::step::StepPermuton;

/// Draws points from a step measure: a cell by mass, then a uniform point in it.
#[derive(Debug, Clone)]
pub struct CellSampler {
    cumulative: Vec<f64>,
    cells: Vec<[f64; 4]>,
}

impl CellSampler {
    pub fn new(mu: &StepPermuton<f64>) -> Result<Self> {
        let mut cumulative = Vec::new();
        let mut cells = Vec::new();
        let mut acc = 0.0;
        for (i, j) in mu.active_cells() {
            acc += mu.mass(i, j);
            cumulative.push(acc);
            cells.push([mu.x_cuts()[i], mu.x_cuts()[i + 1], mu.y_cuts()[j], mu.y_cuts()[j + 1]]);
        }
        if cells.is_empty() {
            return Err(Error::Invalid("measure has no mass".into()));
        }
        Ok(Self { cumulative, cells })
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let total = self.cumulative[self.cumulative.len() - 1];
        let u = rng.random::<f64>() * total;
        let c = self.cumulative.partition_point(|&m| m <= u).min(self.cells.len() - 1);
        let [x0, x1, y0, y1] = self.cells[c];
        (x0 + (x1 - x0) * rng.random::<f64>(), y0 + (y1 - y0) * rng.random::<f64>())
    }

    /// Fills `out` with `k` points with pairwise distinct x and distinct y
    /// coordinates, redrawing any point that ties an earlier one. Returns the
    /// number of redraws.
    pub fn draw_distinct<R: Rng + ?Sized>(&self, k: usize, rng: &mut R, out: &mut Vec<(f64, f64)>) -> u64 {
        out.clear();
        let mut resamples = 0;
        if k <= 16 {
            while out.len() < k {
                let pt = self.draw(rng);
                if out.iter().any(|q| q.0 == pt.0 || q.1 == pt.1) {
                    resamples += 1;
                    continue;
                }
                out.push(pt);
            }
            return resamples;
        }
        let mut xs = HashSet::with_capacity(k);
        let mut ys = HashSet::with_capacity(k);
        while out.len() < k {
            let pt = self.draw(rng);
            if xs.contains(&pt.0.to_bits()) || ys.contains(&pt.1.to_bits()) {
                resamples += 1;
                continue;
            }
            xs.insert(pt.0.to_bits());
            ys.insert(pt.1.to_bits());
            out.push(pt);
        }
        resamples
    }
}

/// `k` iid points drawn from a measure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleBatch {
    pub points: Vec<(f64, f64)>,
    pub seed: u64,
    /// Points redrawn because they tied an earlier coordinate.
    pub resample_count: u64,
}

pub fn sample_points<T: Scalar>(mu: &StepPermuton<T>, k: usize, seed: u64) -> Result<SampleBatch> {
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    let sampler = CellSampler::new(&mu.to_f64())?;
    let mut points = Vec::with_capacity(k);
    let resample_count = sampler.draw_distinct(k, &mut rng::stream(seed, 0), &mut points);
    Ok(SampleBatch { points, seed, resample_count })
}

/// The `mu`-random permutation `mu^(k)`.
pub fn random_pattern<T: Scalar>(mu: &StepPermuton<T>, k: usize, seed: u64) -> Result<Permutation> {
    let batch = sample_points(mu, k, seed)?;
    pattern_of_points(&batch.points)
}

/// The `mu`-random subpermuton `sigma(k, mu) = mu_sigma` with `sigma = mu^(k)`.
pub fn random_subpermuton<T: Scalar>(mu: &StepPermuton<T>, k: usize, seed: u64) -> Result<StepPermuton<T>> {
    let sub = k_subdivision(mu, k)?;
    let sigma = random_pattern(mu, k, seed)?;
    Ok(place_pattern(&sub, &sigma, mu.lambda().clone()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationTrial {
    pub trial: u64,
    pub d_inf: f64,
    /// Present only when the union grid fits the `d_square` budget.
    pub d_square: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationReport {
    pub k: usize,
    pub seed: u64,
    /// `4 k^(-1/4)`.
    pub threshold_inf: f64,
    /// `16 k^(-1/4)`.
    pub threshold_square: f64,
    pub trials: Vec<ConcentrationTrial>,
    pub exceed_inf_fraction: f64,
    pub exceed_square_fraction: Option<f64>,
    pub median_d_inf: f64,
    pub max_d_inf: f64,
}

/// Default cap on the `Q^2 P` work of one exact `d_square` evaluation.
pub const DEFAULT_SQUARE_BUDGET: u128 = 20_000_000;

/// Repeats `g = d_inf(mu, sigma(k, mu))` over `trials` independent subpermutons
/// (trial `t` uses seed `seed ^ t`) and compares it with `4 k^(-1/4)`.
pub fn concentration_experiment<T: Scalar>(
    mu: &StepPermuton<T>,
    k: usize,
    trials: u64,
    seed: u64,
) -> Result<ConcentrationReport> {
    concentration_experiment_with_budget(mu, k, trials, seed, DEFAULT_SQUARE_BUDGET)
}

pub fn concentration_experiment_with_budget<T: Scalar>(
    mu: &StepPermuton<T>,
    k: usize,
    trials: u64,
    seed: u64,
    square_budget: u128,
) -> Result<ConcentrationReport> {
    if k == 0 || trials == 0 {
        return Err(Error::Domain("k and trials must be at least 1".into()));
    }
    let target = mu.to_f64();
    let sub = k_subdivision(&target, k)?;
    let sampler = CellSampler::new(&target)?;
    let scale = (k as f64).powf(-0.25);
    let (threshold_inf, threshold_square) = (4.0 * scale, 16.0 * scale);
    let mut points = Vec::with_capacity(k);
    let mut results = Vec::with_capacity(trials as usize);
    for trial in 0..trials {
        let mut rng = rng::stream(rng::trial_seed(seed, trial), 0);
        sampler.draw_distinct(k, &mut rng, &mut points);
        let sigma = pattern_of_points(&points)?;
        let approx = place_pattern(&sub, &sigma, *target.lambda());
        let (p, q) = union_grid_size(&target, &approx);
        let square = ((q as u128).pow(2) * p as u128 <= square_budget).then(|| d_square(&target, &approx).value);
        results.push(ConcentrationTrial { trial, d_inf: d_inf(&target, &approx).value, d_square: square });
    }
    let n = results.len() as f64;
    let exceed_inf_fraction = results.iter().filter(|t| t.d_inf > threshold_inf).count() as f64 / n;
    let exceed_square_fraction = if results.iter().all(|t| t.d_square.is_some()) {
        Some(results.iter().filter(|t| t.d_square.unwrap() > threshold_square).count() as f64 / n)
    } else {
        None
    };
    let mut sorted: Vec<f64> = results.iter().map(|t| t.d_inf).collect();
    sorted.sort_by(f64::total_cmp);
    Ok(ConcentrationReport {
        k,
        seed,
        threshold_inf,
        threshold_square,
        exceed_inf_fraction,
        exceed_square_fraction,
        median_d_inf: median(&sorted),
        max_d_inf: sorted[sorted.len() - 1],
        trials: results,
    })
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}
