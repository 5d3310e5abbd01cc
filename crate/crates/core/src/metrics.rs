//! Joint CDF evaluation and the distances `d_inf` (sup-norm of the CDF
//! difference) and `d_square` (largest rectangle discrepancy).
//!
//! Both distances are computed exactly on the union of the two cut sets. On
//! every cell of that union grid both measures have constant density, so the
//! CDF difference is bilinear per cell and attains its extremes at grid
//! corners, and the rectangle discrepancy is additive over cells, so an
//! optimal rectangle has grid-aligned sides.

use serde::Serialize;

use crate::scalar::Scalar;
use crate::step::{merge_cuts, StepPermuton};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Witness<T = f64> {
    Point { x: T, y: T },
    Rectangle { x1: T, x2: T, y1: T, y2: T },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceResult<T = f64> {
    pub value: T,
    pub witness: Witness<T>,
}

impl<T: Scalar> DistanceResult<T> {
    pub fn to_f64(&self) -> DistanceResult<f64> {
        let witness = match &self.witness {
            Witness::Point { x, y } => Witness::Point { x: x.to_f64(), y: y.to_f64() },
            Witness::Rectangle { x1, x2, y1, y2 } => {
                Witness::Rectangle { x1: x1.to_f64(), x2: x2.to_f64(), y1: y1.to_f64(), y2: y2.to_f64() }
            }
        };
        DistanceResult { value: self.value.to_f64(), witness }
    }
}

/// `F(x, y) = mu([0, x] x [0, y])`.
pub fn joint_cdf_eval<T: Scalar>(mu: &StepPermuton<T>, x: &T, y: &T) -> T {
    mu.cdf(x, y)
}

/// Sorted union of two cut sets, always including 1.
fn union_cuts<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    let mut out = merge_cuts(a, b);
    if !out.last().expect("non-empty cut sets").approx_eq(&T::one()) {
        out.push(T::one());
    }
    out
}

/// For each union cell, the index of the containing original cell, or `None`
/// beyond the original grid.
fn parents<T: Scalar>(cuts: &[T], union: &[T]) -> Vec<Option<usize>> {
    let mut out = Vec::with_capacity(union.len() - 1);
    let mut parent = 0;
    for w in union.windows(2) {
        while parent + 1 < cuts.len() && cuts[parent + 1].approx_le(&w[0]) {
            parent += 1;
        }
        out.push((parent + 1 < cuts.len()).then_some(parent));
    }
    out
}

/// Cell densities of `mu` on the union grid, row-major: `dens[row][col]`.
struct UnionView<T> {
    density: Vec<Vec<T>>,
    x_parent: Vec<Option<usize>>,
    y_parent: Vec<Option<usize>>,
}

impl<T: Scalar> UnionView<T> {
    fn new(mu: &StepPermuton<T>, ux: &[T], uy: &[T]) -> Self {
        let density = (0..mu.rows())
            .map(|j| {
                let h = mu.height(j);
                (0..mu.columns())
                    .map(|i| {
                        let m = mu.mass(i, j);
                        if m.is_zero() {
                            T::zero()
                        } else {
                            m.clone() / (mu.width(i) * h.clone())
                        }
                    })
                    .collect()
            })
            .collect();
        Self { density, x_parent: parents(mu.x_cuts(), ux), y_parent: parents(mu.y_cuts(), uy) }
    }

    fn row(&self, b: usize) -> Option<&[T]> {
        self.y_parent[b].map(|j| self.density[j].as_slice())
    }

    fn at(&self, row: Option<&[T]>, a: usize) -> T {
        match (row, self.x_parent[a]) {
            (Some(r), Some(i)) => r[i].clone(),
            _ => T::zero(),
        }
    }
}

struct UnionGrid<T> {
    ux: Vec<T>,
    uy: Vec<T>,
    first: UnionView<T>,
    second: UnionView<T>,
}

impl<T: Scalar> UnionGrid<T> {
    fn new(mu1: &StepPermuton<T>, mu2: &StepPermuton<T>) -> Self {
        let ux = union_cuts(mu1.x_cuts(), mu2.x_cuts());
        let uy = union_cuts(mu1.y_cuts(), mu2.y_cuts());
        let first = UnionView::new(mu1, &ux, &uy);
        let second = UnionView::new(mu2, &ux, &uy);
        Self { ux, uy, first, second }
    }

    /// Signed masses `mu1 - mu2` of the union cells in row `b`.
    fn signed_row(&self, b: usize, widths: &[T], out: &mut [T]) {
        let h = self.uy[b + 1].clone() - self.uy[b].clone();
        let (r1, r2) = (self.first.row(b), self.second.row(b));
        for (a, slot) in out.iter_mut().enumerate() {
            let d = self.first.at(r1, a) - self.second.at(r2, a);
            *slot = if d.is_zero() { T::zero() } else { d * widths[a].clone() * h.clone() };
        }
    }

    fn widths(&self) -> Vec<T> {
        self.ux.windows(2).map(|w| w[1].clone() - w[0].clone()).collect()
    }
}

/// Number of union-grid cells and the `Q^2 * P` work of [`d_square`].
pub fn union_grid_size<T: Scalar>(mu1: &StepPermuton<T>, mu2: &StepPermuton<T>) -> (usize, usize) {
    let ux = union_cuts(mu1.x_cuts(), mu2.x_cuts());
    let uy = union_cuts(mu1.y_cuts(), mu2.y_cuts());
    (ux.len() - 1, uy.len() - 1)
}

/// `d_inf = sup |F1 - F2|` with a maximizing corner. Ties go to the
/// lexicographically smallest `(x, y)`.
pub fn d_inf<T: Scalar>(mu1: &StepPermuton<T>, mu2: &StepPermuton<T>) -> DistanceResult<T> {
    let grid = UnionGrid::new(mu1, mu2);
    let p = grid.ux.len() - 1;
    let widths = grid.widths();
    let mut column_cum = vec![T::zero(); p];
    let mut row = vec![T::zero(); p];
    let mut best = T::zero();
    let mut at = (0usize, 0usize);
    for b in 0..grid.uy.len() - 1 {
        grid.signed_row(b, &widths, &mut row);
        let mut running = T::zero();
        for a in 0..p {
            column_cum[a] = column_cum[a].clone() + row[a].clone();
            running = running + column_cum[a].clone();
            let v = running.abs();
            if v > best || (v == best && !v.is_zero() && (a + 1, b + 1) < at) {
                best = v;
                at = (a + 1, b + 1);
            }
        }
    }
    let witness = Witness::Point { x: grid.ux[at.0].clone(), y: grid.uy[at.1].clone() };
    DistanceResult { value: best, witness }
}

/// Best contiguous run of `values` for maximizing `sign * sum`:
/// `(sum, start, end_inclusive)`.
fn kadane<T: Scalar>(values: &[T], maximize: bool) -> (T, usize, usize) {
    let better = |a: &T, b: &T| if maximize { a > b } else { a < b };
    let mut best = (values[0].clone(), 0, 0);
    let mut current = values[0].clone();
    let mut start = 0;
    for (a, v) in values.iter().enumerate().skip(1) {
        let extended = current.clone() + v.clone();
        if better(v, &extended) {
            current = v.clone();
            start = a;
        } else {
            current = extended;
        }
        if better(&current, &best.0) {
            best = (current.clone(), start, a);
        }
    }
    best
}

/// `d_square = sup_R |mu1(R) - mu2(R)|` over axis-parallel rectangles, in
/// `O(Q^2 P)` on a `P x Q` union grid.
pub fn d_square<T: Scalar>(mu1: &StepPermuton<T>, mu2: &StepPermuton<T>) -> DistanceResult<T> {
    let grid = UnionGrid::new(mu1, mu2);
    let p = grid.ux.len() - 1;
    let q = grid.uy.len() - 1;
    let widths = grid.widths();
    let mut signed = vec![vec![T::zero(); p]; q];
    for (b, row) in signed.iter_mut().enumerate() {
        grid.signed_row(b, &widths, row);
    }
    let mut best = T::zero();
    let mut rect = (0, p - 1, 0, q - 1);
    let mut sums = vec![T::zero(); p];
    for y1 in 0..q {
        sums.iter_mut().for_each(|s| *s = T::zero());
        for (y2, row) in signed.iter().enumerate().skip(y1) {
            for (s, v) in sums.iter_mut().zip(row) {
                *s = s.clone() + v.clone();
            }
            for maximize in [true, false] {
                let (sum, x1, x2) = kadane(&sums, maximize);
                let v = sum.abs();
                if v > best {
                    best = v;
                    rect = (x1, x2, y1, y2);
                }
            }
        }
    }
    let witness = Witness::Rectangle {
        x1: grid.ux[rect.0].clone(),
        x2: grid.ux[rect.1 + 1].clone(),
        y1: grid.uy[rect.2].clone(),
        y2: grid.uy[rect.3 + 1].clone(),
    };
    DistanceResult { value: best, witness }
}
