//! Constructive approximation of a `lambda`-permuton (with `lambda = M/N`) by
//! `(Nk, Mk)`-permutations.
//!
//! The pipeline:
//! 1. split the y-axis into `M` gray stripes at the `j/M`-quantiles of `F_y`
//!    and mark the `1/N`-band containing each quantile as black;
//! 2. move the mass of every gray stripe into its black stripe;
//! 3. delete the (now empty) white bands and magnify the `lambda x lambda`
//!    square to the unit square;
//! 4. digitize the resulting permuton by a random permutation of `[Mk]`;
//! 5. undo steps 3 and 2 on the permutation to obtain an `(Nk, Mk)`-permutation.
//!
//! The distance to the target is measured exactly and certified by
//! `2/M + eps_k`, where `eps_k` is the measured digitization error.

use serde::Serialize;

use crate::embed::{embed_permutation, embed_selection, extract_selection};
use crate::error::{Error, Result};
use crate::metrics::d_inf;
use crate::perm::{OrderedSelection, Permutation};
use crate::sampling::random_pattern;
use crate::scalar::{ceil_ratio, Scalar};
use crate::step::{merge_cuts, StepPermuton};

/// Gray, black and white stripes of the y-axis for grid parameters `N`, `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct StripeDecomposition<T = f64> {
    /// Number of `1/N` bands on the y-axis.
    pub n: usize,
    /// Number of gray stripes.
    pub m: usize,
    /// `y_0 = 0 < y_1 < ... < y_M = 1`.
    pub y_quantiles: Vec<T>,
    /// `l_j` (one-based): black stripe `j` is `((l_j - 1)/N, l_j/N]`.
    pub black_bands: Vec<usize>,
}

impl<T: Scalar> StripeDecomposition<T> {
    /// Stripes for given quantiles `y_1 < ... < y_{M-1}` (`y_0`, `y_M` implied).
    pub fn from_quantiles(n: usize, m: usize, inner: &[T]) -> Result<Self> {
        if m == 0 || m > n {
            return Err(Error::Parameter(format!("need 1 <= M <= N, got M = {m}, N = {n}")));
        }
        if inner.len() + 1 != m {
            return Err(Error::Shape { expected: m - 1, found: inner.len() });
        }
        let mut y_quantiles = Vec::with_capacity(m + 1);
        y_quantiles.push(T::zero());
        y_quantiles.extend(inner.iter().cloned());
        y_quantiles.push(T::one());
        if y_quantiles.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid("quantiles must be strictly increasing inside (0, 1)".into()));
        }
        let black_bands: Vec<usize> = y_quantiles[1..].iter().map(|y| ceil_ratio(y, n as i64) as usize).collect();
        if let Some(j) = black_bands.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::Invariant(format!(
                "black stripes {} and {} coincide; the y-marginal is steeper than N/M",
                j + 1,
                j + 2
            )));
        }
        Ok(Self { n, m, y_quantiles, black_bands })
    }

    pub fn lambda(&self) -> T {
        T::ratio(self.m as i64, self.n as i64)
    }

    /// Gray stripe `j` (one-based) as `(y_{j-1}, y_j]`.
    pub fn gray(&self, j: usize) -> (T, T) {
        (self.y_quantiles[j - 1].clone(), self.y_quantiles[j].clone())
    }

    /// Black stripe `j` (one-based) as `((l_j - 1)/N, l_j/N]`.
    pub fn black(&self, j: usize) -> (T, T) {
        let l = self.black_bands[j - 1] as i64;
        (T::ratio(l - 1, self.n as i64), T::ratio(l, self.n as i64))
    }

    /// The non-empty white stripes, bottom to top.
    pub fn white(&self) -> Vec<(T, T)> {
        let mut out = Vec::new();
        let mut previous_top = 0;
        for &l in &self.black_bands {
            if l - 1 > previous_top {
                out.push((T::ratio(previous_top as i64, self.n as i64), T::ratio(l as i64 - 1, self.n as i64)));
            }
            previous_top = l;
        }
        if previous_top < self.n {
            out.push((T::ratio(previous_top as i64, self.n as i64), T::one()));
        }
        out
    }

    fn band_cuts(&self) -> Vec<T> {
        (0..=self.n).map(|l| T::ratio(l as i64, self.n as i64)).collect()
    }
}

fn check_target<T: Scalar>(mu: &StepPermuton<T>, n: usize, m: usize) -> Result<()> {
    if m == 0 || m > n {
        return Err(Error::Parameter(format!("need 1 <= M <= N, got M = {m}, N = {n}")));
    }
    if !mu.lambda().approx_eq(&T::ratio(m as i64, n as i64)) {
        return Err(Error::Parameter(format!(
            "target lambda {} differs from M/N = {m}/{n}; rationalize the target first",
            mu.lambda().to_f64()
        )));
    }
    let report = mu.validate();
    if !report.is_valid() {
        return Err(Error::Invalid(format!("target is not a lambda-permuton: {:?}", report.violations)));
    }
    Ok(())
}

/// Stripes of a target whose lambda is `M/N`.
pub fn build_stripes<T: Scalar>(mu: &StepPermuton<T>, n: usize, m: usize) -> Result<StripeDecomposition<T>> {
    check_target(mu, n, m)?;
    let (_, fy) = mu.marginals();
    let inner = (1..m).map(|j| fy.quantile(&T::ratio(j as i64, m as i64))).collect::<Result<Vec<_>>>()?;
    StripeDecomposition::from_quantiles(n, m, &inner)
}

/// Moves the mass of each `(x_{i-1}, x_i] x (y_{j-1}, y_j]` uniformly onto
/// `(x_{i-1}, x_i] x black_j`, where `x_i = i/N`. The result lives on the
/// `M x N` grid of `1/N` squares and is zero on white stripes.
pub fn transfer_to_black<T: Scalar>(mu: &StepPermuton<T>, stripes: &StripeDecomposition<T>) -> StepPermuton<T> {
    let (n, m) = (stripes.n, stripes.m);
    let cuts = stripes.band_cuts();
    let mut cell_mass = vec![vec![T::zero(); n]; m];
    for (i, column) in cell_mass.iter_mut().enumerate() {
        for j in 1..=m {
            let (lo, hi) = stripes.gray(j);
            column[stripes.black_bands[j - 1] - 1] = mu.rect_mass(&cuts[i], &cuts[i + 1], &lo, &hi);
        }
    }
    StepPermuton::new(cuts[..=m].to_vec(), cuts, cell_mass, stripes.lambda()).expect("band grid is well formed")
}

/// Re-expresses `mu` with every `1/N` band boundary below `top` among its y-cuts.
fn split_at_bands<T: Scalar>(mu: &StepPermuton<T>, n: usize) -> Result<StepPermuton<T>> {
    let top = mu.y_cuts()[mu.rows()].clone();
    let bands: Vec<T> = (0..=n).map(|l| T::ratio(l as i64, n as i64)).filter(|b| *b <= top).collect();
    let y = merge_cuts(mu.y_cuts(), &bands);
    mu.refine(mu.x_cuts(), &y)
}

fn band_of<T: Scalar>(lo: &T, n: usize) -> usize {
    // Band index (zero-based) of a row starting at `lo` on a band-aligned grid.
    (lo.to_f64() * n as f64 + 1e-9).floor() as usize
}

/// Deletes the white stripes and shifts the black stripes down, giving a
/// measure on `(0, lambda]^2`.
pub fn remove_white<T: Scalar>(
    mu_tilde: &StepPermuton<T>,
    stripes: &StripeDecomposition<T>,
) -> Result<StepPermuton<T>> {
    let fine = split_at_bands(mu_tilde, stripes.n)?;
    let mut compressed_of_band = vec![None; stripes.n];
    for (j, &l) in stripes.black_bands.iter().enumerate() {
        compressed_of_band[l - 1] = Some(j);
    }
    let mut y_cuts = vec![T::zero()];
    let mut keep = Vec::new();
    for r in 0..fine.rows() {
        let (lo, hi) = (fine.y_cuts()[r].clone(), fine.y_cuts()[r + 1].clone());
        let band = band_of(&lo, stripes.n);
        match compressed_of_band[band] {
            Some(j) => {
                let shift = T::ratio((stripes.black_bands[j] - 1 - j) as i64, stripes.n as i64);
                y_cuts.push(hi - shift);
                keep.push(r);
            }
            None => {
                let mass = fine.row_mass(r);
                if mass > T::tolerance() {
                    return Err(Error::Precondition(format!(
                        "white stripe containing band {} carries mass {}",
                        band + 1,
                        mass.to_f64()
                    )));
                }
            }
        }
    }
    let cell_mass = (0..fine.columns()).map(|i| keep.iter().map(|&r| fine.mass(i, r).clone()).collect()).collect();
    StepPermuton::new(fine.x_cuts().to_vec(), y_cuts, cell_mass, mu_tilde.lambda().clone())
}

/// Inverse of [`remove_white`]: spreads the bands of a measure on
/// `(0, lambda]^2` back onto the black stripes, with empty white stripes between.
pub fn insert_white<T: Scalar>(
    mu_lambda: &StepPermuton<T>,
    stripes: &StripeDecomposition<T>,
) -> Result<StepPermuton<T>> {
    let squeezed = truncate_rows(mu_lambda, &stripes.lambda())?;
    let fine = split_at_bands(&squeezed, stripes.n)?;
    let n = stripes.n as i64;
    let mut y_cuts = vec![T::zero()];
    // Source row for each output row; None marks an inserted white stripe.
    let mut source: Vec<Option<usize>> = Vec::new();
    let mut previous_band = 0;
    let mut r = 0;
    for (j, &l) in stripes.black_bands.iter().enumerate() {
        if l - 1 > previous_band {
            y_cuts.push(T::ratio(l as i64 - 1, n));
            source.push(None);
        }
        let shift = T::ratio((l - 1 - j) as i64, n);
        while r < fine.rows() && band_of(&fine.y_cuts()[r], stripes.n) == j {
            y_cuts.push(fine.y_cuts()[r + 1].clone() + shift.clone());
            source.push(Some(r));
            r += 1;
        }
        previous_band = l;
    }
    if previous_band < stripes.n {
        y_cuts.push(T::one());
        source.push(None);
    }
    let cell_mass = (0..fine.columns())
        .map(|i| source.iter().map(|s| s.map_or_else(T::zero, |r| fine.mass(i, r).clone())).collect())
        .collect();
    StepPermuton::new(fine.x_cuts().to_vec(), y_cuts, cell_mass, mu_lambda.lambda().clone())
}

/// Drops rows above `top`, which must carry no mass.
fn truncate_rows<T: Scalar>(mu: &StepPermuton<T>, top: &T) -> Result<StepPermuton<T>> {
    if mu.y_cuts()[mu.rows()] <= *top {
        return Ok(mu.clone());
    }
    let split = mu.refine(mu.x_cuts(), &merge_cuts(mu.y_cuts(), std::slice::from_ref(top)))?;
    let keep = split.y_cuts().iter().position(|y| y.approx_eq(top)).expect("top was merged in");
    for r in keep..split.rows() {
        if split.row_mass(r) > T::tolerance() {
            return Err(Error::Precondition(format!("mass above y = {}", top.to_f64())));
        }
    }
    let cell_mass = split.cell_mass().iter().map(|c| c[..keep].to_vec()).collect();
    StepPermuton::new(split.x_cuts().to_vec(), split.y_cuts()[..=keep].to_vec(), cell_mass, mu.lambda().clone())
}

/// Pushforward under `(x, y) -> (x / lambda, y / lambda)`: a measure on
/// `(0, lambda]^2` becomes a permuton on the unit square.
pub fn magnify<T: Scalar>(mu_lambda: &StepPermuton<T>) -> Result<StepPermuton<T>> {
    let lambda = mu_lambda.lambda().clone();
    let inside = truncate_rows(mu_lambda, &lambda)?;
    let factor = T::one() / lambda;
    inside.scaled(&factor, &factor, T::one())
}

/// Pushforward under `(x, y) -> (lambda x, lambda y)`.
pub fn shrink<T: Scalar>(mu: &StepPermuton<T>, lambda: &T) -> Result<StepPermuton<T>> {
    mu.scaled(lambda, lambda, lambda.clone())
}

/// A permutation approximating a permuton, with its measured error.
#[derive(Debug, Clone, PartialEq)]
pub struct Digitization<T = f64> {
    pub sigma: Permutation,
    /// `d_inf(permuton, embedding of sigma)`.
    pub epsilon: T,
}

/// Approximates a permuton (`lambda = 1`) by its random permutation of order
/// `size`; the error is measured, not assumed.
pub fn digitize_permuton<T: Scalar>(permuton: &StepPermuton<T>, size: usize, seed: u64) -> Result<Digitization<T>> {
    if !permuton.lambda().approx_eq(&T::one()) {
        return Err(Error::Precondition("digitization needs a permuton with lambda = 1".into()));
    }
    let sigma = random_pattern(permuton, size, seed)?;
    let epsilon = d_inf(permuton, &embed_permutation::<T>(&sigma)).value;
    Ok(Digitization { sigma, epsilon })
}

/// Shrinks the permuton of `sigma` (a permutation of `[Mk]`) into
/// `(0, lambda]^2`, re-inserts the white stripes and returns the resulting
/// member of `W_{Nk, Mk}` on its uniform `1/(Nk)` grid.
pub fn shrink_and_insert_white<T: Scalar>(
    sigma: &Permutation,
    stripes: &StripeDecomposition<T>,
    k: usize,
) -> Result<StepPermuton<T>> {
    if sigma.len() != stripes.m * k {
        return Err(Error::Shape { expected: stripes.m * k, found: sigma.len() });
    }
    let shrunk = shrink(&embed_permutation::<T>(sigma), &stripes.lambda())?;
    let spread = insert_white(&shrunk, stripes)?;
    let rows = (stripes.n * k) as i64;
    let uniform: Vec<T> = (0..=rows).map(|l| T::ratio(l, rows)).collect();
    let board = spread.refine(spread.x_cuts(), &uniform)?;
    Ok(board)
}

/// The two terms of the certificate `2/M + eps_k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundComponents<T = f64> {
    #[serde(rename = "two_over_M")]
    pub two_over_m: T,
    pub epsilon_k: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertifiedApproximation<T = f64> {
    /// The constructed member of `V_{Nk, Mk}`.
    pub selection: OrderedSelection,
    /// Measured `d_inf(target, beta_k)`.
    pub d_inf_to_target: T,
    pub bound_components: BoundComponents<T>,
    /// Measured `d_inf(target, mu_tilde)`; never more than `2/M`.
    pub transfer_distance: T,
    #[serde(rename = "N")]
    pub big_n: usize,
    #[serde(rename = "M")]
    pub big_m: usize,
    pub k: usize,
    pub seed: u64,
}

impl<T: Scalar> CertifiedApproximation<T> {
    pub fn certificate(&self) -> T {
        self.bound_components.two_over_m.clone() + self.bound_components.epsilon_k.clone()
    }

    /// Whether the measured distance respects the certificate (slack `1e-10`).
    pub fn is_certified(&self) -> bool {
        self.d_inf_to_target.to_f64() <= self.certificate().to_f64() + 1e-10
    }

    pub fn to_f64(&self) -> CertifiedApproximation<f64> {
        CertifiedApproximation {
            selection: self.selection.clone(),
            d_inf_to_target: self.d_inf_to_target.to_f64(),
            bound_components: BoundComponents {
                two_over_m: self.bound_components.two_over_m.to_f64(),
                epsilon_k: self.bound_components.epsilon_k.to_f64(),
            },
            transfer_distance: self.transfer_distance.to_f64(),
            big_n: self.big_n,
            big_m: self.big_m,
            k: self.k,
            seed: self.seed,
        }
    }
}

/// Runs the full pipeline for a target with `lambda = M/N`.
pub fn approximate<T: Scalar>(
    mu_target: &StepPermuton<T>,
    n: usize,
    m: usize,
    k: usize,
    seed: u64,
) -> Result<CertifiedApproximation<T>> {
    if k == 0 {
        return Err(Error::Parameter("k must be at least 1".into()));
    }
    let stripes = build_stripes(mu_target, n, m)?;
    let tilde = transfer_to_black(mu_target, &stripes);
    let transfer_distance = d_inf(mu_target, &tilde).value;
    let unit = magnify(&remove_white(&tilde, &stripes)?)?;
    let digitized = digitize_permuton(&unit, m * k, seed)?;
    let beta = shrink_and_insert_white(&digitized.sigma, &stripes, k)?;
    let selection = extract_selection(&beta)?;
    Ok(CertifiedApproximation {
        selection,
        d_inf_to_target: d_inf(mu_target, &beta).value,
        bound_components: BoundComponents { two_over_m: T::ratio(2, m as i64), epsilon_k: digitized.epsilon },
        transfer_distance,
        big_n: n,
        big_m: m,
        k,
        seed,
    })
}

/// Rescales the x-axis of a target so that its lambda becomes `round(lambda N) / N`.
pub fn rationalize<T: Scalar>(mu: &StepPermuton<T>, n: usize) -> Result<(StepPermuton<T>, usize)> {
    let m = ((mu.lambda().to_f64() * n as f64).round() as usize).clamp(1, n);
    let lambda = T::ratio(m as i64, n as i64);
    let factor = lambda.clone() / mu.lambda().clone();
    let rescaled = mu.scaled(&factor, &T::one(), lambda)?;
    Ok((rescaled, m))
}

/// Parameters of an interpolation run from `beta_{k+1}` to `W_{Nk, Mk}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct InterpolationSchedule {
    #[serde(rename = "N")]
    pub big_n: usize,
    #[serde(rename = "M")]
    pub big_m: usize,
    pub k: usize,
}

impl InterpolationSchedule {
    /// Infers `k` from the board of `beta_{k+1}` (`N(k+1)` rows, `M(k+1)` columns).
    pub fn for_board(rows: usize, columns: usize, big_n: usize, big_m: usize) -> Result<Self> {
        if big_m == 0
            || big_m > big_n
            || !rows.is_multiple_of(big_n)
            || rows / big_n < 2
            || columns * big_n != rows * big_m
        {
            return Err(Error::Parameter(format!(
                "a {rows} x {columns} board is not W_(N(k+1), M(k+1)) for N = {big_n}, M = {big_m}, k >= 1"
            )));
        }
        Ok(Self { big_n, big_m, k: rows / big_n - 1 })
    }

    /// `(1/k)(2N/M + 1)`.
    pub fn total_bound(&self) -> f64 {
        (2.0 * self.big_n as f64 / self.big_m as f64 + 1.0) / self.k as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InterpolationPhase {
    /// Deleting a black square with its row and column.
    #[serde(rename = "remove_black")]
    RemoveBlack,
    /// Deleting an empty row.
    #[serde(rename = "remove_empty_row")]
    RemoveEmptyRow,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterpolationStep<T = f64> {
    pub phase: InterpolationPhase,
    pub rows: usize,
    pub columns: usize,
    pub selection: OrderedSelection,
    /// `d_inf` to the previous board.
    pub step_distance: T,
    /// `3/(Mk)` for black removals, `2/(Mk)` for row removals.
    pub step_bound: T,
    /// `d_inf` to `beta_{k+1}`.
    pub distance_from_start: T,
}

/// Walks from `beta_{k+1}` down to a member of `W_{Nk, Mk}`: first `M`
/// black-square removals (rightmost column each time; its row goes too and
/// the freed mass is spread evenly over the remaining squares), then `N - M`
/// removals of the topmost empty row. Each board is renormalized to cells of
/// side `1/rows`.
pub fn interpolate_parameters<T: Scalar>(
    beta_next: &StepPermuton<T>,
    schedule: InterpolationSchedule,
) -> Result<Vec<InterpolationStep<T>>> {
    let start_selection = extract_selection(beta_next)?;
    let InterpolationSchedule { big_n, big_m, k } = schedule;
    if k == 0 || start_selection.n() != big_n * (k + 1) || start_selection.m() != big_m * (k + 1) {
        return Err(Error::Structure(format!(
            "board is W_({}, {}), expected W_({}, {})",
            start_selection.n(),
            start_selection.m(),
            big_n * (k + 1),
            big_m * (k + 1)
        )));
    }
    let start = embed_selection::<T>(&start_selection);
    let mk = (big_m * k) as i64;
    let mut steps = Vec::with_capacity(big_n);
    let mut current = start_selection;
    let mut previous = start.clone();
    for s in 0..big_n {
        let (phase, next) = if s < big_m {
            (InterpolationPhase::RemoveBlack, remove_last_column(&current)?)
        } else {
            (InterpolationPhase::RemoveEmptyRow, remove_top_empty_row(&current)?)
        };
        let board = embed_selection::<T>(&next);
        let step_bound = match phase {
            InterpolationPhase::RemoveBlack => T::ratio(3, mk),
            InterpolationPhase::RemoveEmptyRow => T::ratio(2, mk),
        };
        steps.push(InterpolationStep {
            phase,
            rows: next.n(),
            columns: next.m(),
            selection: next.clone(),
            step_distance: d_inf(&previous, &board).value,
            step_bound,
            distance_from_start: d_inf(&start, &board).value,
        });
        previous = board;
        current = next;
    }
    Ok(steps)
}

fn remove_last_column(nu: &OrderedSelection) -> Result<OrderedSelection> {
    let (&row, rest) = nu.values().split_last().expect("selections are non-empty");
    if rest.is_empty() {
        return Err(Error::Structure("cannot remove the only black square".into()));
    }
    let values = rest.iter().map(|&v| if v > row { v - 1 } else { v }).collect();
    OrderedSelection::new(nu.n() - 1, values)
}

fn remove_top_empty_row(nu: &OrderedSelection) -> Result<OrderedSelection> {
    let mut used = vec![false; nu.n() + 1];
    for &v in nu.values() {
        used[v] = true;
    }
    let row = (1..=nu.n()).rev().find(|&r| !used[r]).ok_or_else(|| Error::Structure("no empty row left".into()))?;
    let values = nu.values().iter().map(|&v| if v > row { v - 1 } else { v }).collect();
    OrderedSelection::new(nu.n() - 1, values)
}
