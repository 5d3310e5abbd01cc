//! The correspondence between ordered selections and step measures, the
//! quantile subdivision of a measure, and pattern measures built on it.

use crate::cdf::PiecewiseLinearCdf;
use crate::error::{Error, Result};
use crate::perm::{OrderedSelection, Permutation};
use crate::scalar::Scalar;
use crate::step::StepPermuton;

/// The generalized permuton of an `(n, m)`-permutation: mass `1/m` spread
/// uniformly over each square `[(h-1)/n, h/n) x [(nu(h)-1)/n, nu(h)/n)`.
pub fn embed_selection<T: Scalar>(nu: &OrderedSelection) -> StepPermuton<T> {
    let (n, m) = (nu.n(), nu.m());
    let x_cuts = (0..=m).map(|h| T::ratio(h as i64, n as i64)).collect();
    let y_cuts = (0..=n).map(|l| T::ratio(l as i64, n as i64)).collect();
    let mut cell_mass = vec![vec![T::zero(); n]; m];
    for (h, &value) in nu.values().iter().enumerate() {
        cell_mass[h][value - 1] = T::ratio(1, m as i64);
    }
    StepPermuton::new(x_cuts, y_cuts, cell_mass, T::ratio(m as i64, n as i64)).expect("embedding grid is well formed")
}

/// The permuton of a permutation of `[k]` (an embedding with `n = m = k`).
pub fn embed_permutation<T: Scalar>(sigma: &Permutation) -> StepPermuton<T> {
    embed_selection(&OrderedSelection::from(sigma.clone()))
}

/// Inverse of [`embed_selection`].
pub fn extract_selection<T: Scalar>(mu: &StepPermuton<T>) -> Result<OrderedSelection> {
    let n = mu.rows();
    let m = mu.columns();
    if m > n {
        return Err(Error::Structure(format!("{m} columns on a board with {n} rows")));
    }
    let step = |i: usize| T::ratio(i as i64, n as i64);
    if mu.y_cuts().iter().enumerate().any(|(l, y)| !y.approx_eq(&step(l))) {
        return Err(Error::Structure(format!("y-grid is not the uniform 1/{n} grid")));
    }
    if mu.x_cuts().iter().enumerate().any(|(h, x)| !x.approx_eq(&step(h))) {
        return Err(Error::Structure(format!("x-grid is not the uniform 1/{n} grid")));
    }
    if !mu.lambda().approx_eq(&T::ratio(m as i64, n as i64)) {
        return Err(Error::Structure(format!("lambda differs from m/n = {m}/{n}")));
    }
    let share = T::ratio(1, m as i64);
    let mut values = Vec::with_capacity(m);
    let mut used = vec![false; n];
    for h in 0..m {
        let active: Vec<usize> = (0..n).filter(|&l| *mu.mass(h, l) > T::tolerance()).collect();
        let row = match active.as_slice() {
            [row] if mu.mass(h, *row).approx_eq(&share) => *row,
            [_] => return Err(Error::Structure(format!("column {} does not carry mass 1/{m}", h + 1))),
            [] => return Err(Error::Structure(format!("column {} is empty", h + 1))),
            _ => return Err(Error::Structure(format!("column {} has {} active cells", h + 1, active.len()))),
        };
        if std::mem::replace(&mut used[row], true) {
            return Err(Error::Structure(format!("column {} reuses row {}", h + 1, row + 1)));
        }
        values.push(row + 1);
    }
    OrderedSelection::new(n, values)
}

/// Marginal distribution functions `(F_x, F_y)`.
pub fn marginals<T: Scalar>(mu: &StepPermuton<T>) -> (PiecewiseLinearCdf<T>, PiecewiseLinearCdf<T>) {
    mu.marginals()
}

/// The quantile grid of a measure: `x_i` is the `i/k`-quantile of `F_x`
/// (with `x_k = lambda`) and `y_j` the `j/k`-quantile of `F_y` (with `y_k = 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct KSubdivision<T = f64> {
    pub x_quantiles: Vec<T>,
    pub y_quantiles: Vec<T>,
}

impl<T: Scalar> KSubdivision<T> {
    pub fn k(&self) -> usize {
        self.x_quantiles.len() - 1
    }
}

pub fn k_subdivision<T: Scalar>(mu: &StepPermuton<T>, k: usize) -> Result<KSubdivision<T>> {
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    let (fx, fy) = mu.marginals();
    let grid = |f: &PiecewiseLinearCdf<T>, top: T, axis: &str| -> Result<Vec<T>> {
        let mut cuts = Vec::with_capacity(k + 1);
        cuts.push(T::zero());
        for i in 1..k {
            cuts.push(f.quantile(&T::ratio(i as i64, k as i64))?);
        }
        cuts.push(top);
        if let Some(i) = cuts.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::Structure(format!(
                "{axis}-quantiles {i} and {} coincide; the marginal is not continuous and spanning",
                i + 1
            )));
        }
        Ok(cuts)
    };
    Ok(KSubdivision { x_quantiles: grid(&fx, mu.lambda().clone(), "x")?, y_quantiles: grid(&fy, T::one(), "y")? })
}

/// The measure `mu_sigma`: mass `1/k` uniformly on each rectangle
/// `R_{i, sigma(i)}` of the k-subdivision of `mu`, zero elsewhere.
pub fn mu_sigma<T: Scalar>(mu: &StepPermuton<T>, sigma: &Permutation) -> Result<StepPermuton<T>> {
    let sub = k_subdivision(mu, sigma.len())?;
    Ok(place_pattern(&sub, sigma, mu.lambda().clone()))
}

/// Places `sigma` on an existing subdivision (of matching size).
pub fn place_pattern<T: Scalar>(sub: &KSubdivision<T>, sigma: &Permutation, lambda: T) -> StepPermuton<T> {
    let k = sigma.len();
    assert_eq!(sub.k(), k, "subdivision size must match the pattern");
    let mut cell_mass = vec![vec![T::zero(); k]; k];
    for i in 0..k {
        cell_mass[i][sigma.values()[i] - 1] = T::ratio(1, k as i64);
    }
    StepPermuton::new(sub.x_quantiles.clone(), sub.y_quantiles.clone(), cell_mass, lambda)
        .expect("quantile grid is strictly increasing")
}
