//! Step measures on rectangular grids: the canonical representation of every
//! generalized permuton in this crate.
//!
//! Cells are half-open `[x_i, x_{i+1}) x [y_j, y_{j+1})` and carry uniform
//! density. The measures are atomless, so closed and half-open rectangles have
//! the same mass and the distinction never affects a computed value.

use serde::{Deserialize, Serialize};

use crate::cdf::PiecewiseLinearCdf;
use crate::error::{Error, Result};
use crate::scalar::{Exact, Scalar};

/// A probability measure on `[0, 1]^2` with piecewise-constant density.
///
/// `cell_mass[i][j]` is the mass of the cell in x-column `i` and y-row `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepPermuton<T = f64> {
    x_cuts: Vec<T>,
    y_cuts: Vec<T>,
    cell_mass: Vec<Vec<T>>,
    lambda: T,
}

impl<T: Scalar> StepPermuton<T> {
    /// Checks only the grid structure. Measure-level properties (total mass,
    /// marginals) are left to [`StepPermuton::validate`].
    pub fn new(x_cuts: Vec<T>, y_cuts: Vec<T>, cell_mass: Vec<Vec<T>>, lambda: T) -> Result<Self> {
        check_cuts("x", &x_cuts)?;
        check_cuts("y", &y_cuts)?;
        if lambda <= T::zero() || lambda > T::one() + T::tolerance() {
            return Err(Error::Invalid(format!("lambda {:?} is outside (0, 1]", lambda.to_f64())));
        }
        let (p, q) = (x_cuts.len() - 1, y_cuts.len() - 1);
        if cell_mass.len() != p {
            return Err(Error::Shape { expected: p, found: cell_mass.len() });
        }
        for (i, column) in cell_mass.iter().enumerate() {
            if column.len() != q {
                return Err(Error::Shape { expected: q, found: column.len() });
            }
            if let Some(j) = column.iter().position(|m| *m < T::zero()) {
                return Err(Error::Invalid(format!("cell ({i}, {j}) has negative mass")));
            }
        }
        Ok(Self { x_cuts, y_cuts, cell_mass, lambda })
    }

    /// The uniform measure on the unit square (a 1-permuton).
    pub fn uniform_square() -> Self {
        Self {
            x_cuts: vec![T::zero(), T::one()],
            y_cuts: vec![T::zero(), T::one()],
            cell_mass: vec![vec![T::one()]],
            lambda: T::one(),
        }
    }

    pub fn x_cuts(&self) -> &[T] {
        &self.x_cuts
    }

    pub fn y_cuts(&self) -> &[T] {
        &self.y_cuts
    }

    pub fn cell_mass(&self) -> &[Vec<T>] {
        &self.cell_mass
    }

    pub fn lambda(&self) -> &T {
        &self.lambda
    }

    /// Number of x-cells.
    pub fn columns(&self) -> usize {
        self.x_cuts.len() - 1
    }

    /// Number of y-cells.
    pub fn rows(&self) -> usize {
        self.y_cuts.len() - 1
    }

    pub fn mass(&self, column: usize, row: usize) -> &T {
        &self.cell_mass[column][row]
    }

    pub fn width(&self, column: usize) -> T {
        self.x_cuts[column + 1].clone() - self.x_cuts[column].clone()
    }

    pub fn height(&self, row: usize) -> T {
        self.y_cuts[row + 1].clone() - self.y_cuts[row].clone()
    }

    pub fn total_mass(&self) -> T {
        self.cell_mass.iter().flatten().cloned().fold(T::zero(), |a, b| a + b)
    }

    pub fn column_mass(&self, column: usize) -> T {
        self.cell_mass[column].iter().cloned().fold(T::zero(), |a, b| a + b)
    }

    pub fn row_mass(&self, row: usize) -> T {
        self.cell_mass.iter().map(|c| c[row].clone()).fold(T::zero(), |a, b| a + b)
    }

    /// Cells with positive mass, as `(column, row)` pairs in column-major order.
    pub fn active_cells(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, column) in self.cell_mass.iter().enumerate() {
            for (j, m) in column.iter().enumerate() {
                if *m > T::zero() {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Fraction of each cell along one axis lying in `[a, b]`.
    fn overlap_fractions(cuts: &[T], a: &T, b: &T) -> Vec<T> {
        cuts.windows(2)
            .map(|w| {
                let lo = a.clone().max_of(w[0].clone());
                let hi = b.clone().min_of(w[1].clone());
                if hi <= lo {
                    T::zero()
                } else {
                    (hi - lo) / (w[1].clone() - w[0].clone())
                }
            })
            .collect()
    }

    /// Joint distribution function `F(x, y) = mu([0, x] x [0, y])`.
    pub fn cdf(&self, x: &T, y: &T) -> T {
        self.rect_mass(&T::zero(), x, &T::zero(), y)
    }

    /// `mu([x1, x2] x [y1, y2])`.
    pub fn rect_mass(&self, x1: &T, x2: &T, y1: &T, y2: &T) -> T {
        let fx = Self::overlap_fractions(&self.x_cuts, x1, x2);
        let fy = Self::overlap_fractions(&self.y_cuts, y1, y2);
        let mut total = T::zero();
        for (i, column) in self.cell_mass.iter().enumerate() {
            if fx[i].is_zero() {
                continue;
            }
            let mut col = T::zero();
            for (j, m) in column.iter().enumerate() {
                if !fy[j].is_zero() && !m.is_zero() {
                    col = col + m.clone() * fy[j].clone();
                }
            }
            total = total + col * fx[i].clone();
        }
        total
    }

    /// Marginal distribution functions `(F_x, F_y)`.
    pub fn marginals(&self) -> (PiecewiseLinearCdf<T>, PiecewiseLinearCdf<T>) {
        let fx = cumulative(self.x_cuts.clone(), (0..self.columns()).map(|i| self.column_mass(i)));
        let fy = cumulative(self.y_cuts.clone(), (0..self.rows()).map(|j| self.row_mass(j)));
        (fx, fy)
    }

    /// Re-expresses the measure on a finer grid. The new cut sets must contain
    /// the old ones; masses are split in proportion to area.
    pub fn refine(&self, x_cuts: &[T], y_cuts: &[T]) -> Result<Self> {
        let x_map = parent_cells(&self.x_cuts, x_cuts)?;
        let y_map = parent_cells(&self.y_cuts, y_cuts)?;
        let mut cell_mass = vec![vec![T::zero(); y_cuts.len() - 1]; x_cuts.len() - 1];
        for (a, (pi, fx)) in x_map.iter().enumerate() {
            for (b, (pj, fy)) in y_map.iter().enumerate() {
                let m = &self.cell_mass[*pi][*pj];
                if !m.is_zero() {
                    cell_mass[a][b] = m.clone() * fx.clone() * fy.clone();
                }
            }
        }
        Self::new(x_cuts.to_vec(), y_cuts.to_vec(), cell_mass, self.lambda.clone())
    }

    /// Pushforward under `(x, y) -> (sx * x, sy * y)`, relabelled with `lambda`.
    pub fn scaled(&self, sx: &T, sy: &T, lambda: T) -> Result<Self> {
        Self::new(
            self.x_cuts.iter().map(|x| x.clone() * sx.clone()).collect(),
            self.y_cuts.iter().map(|y| y.clone() * sy.clone()).collect(),
            self.cell_mass.clone(),
            lambda,
        )
    }

    /// Reports every violated lambda-permuton property. An empty report
    /// means the measure is a valid `lambda`-permuton.
    pub fn validate(&self) -> ValidationReport {
        self.validate_with_tolerance(&T::tolerance())
    }

    /// As [`validate`](Self::validate) with an explicit absolute slack.
    pub fn validate_with_tolerance(&self, tol: &T) -> ValidationReport {
        let mut violations = Vec::new();
        let tol = tol.clone();
        let close = |a: &T, b: &T| (a.clone() - b.clone()).abs() <= tol;
        let total = self.total_mass();
        if !close(&total, &T::one()) {
            violations.push(Violation::TotalMass { total: total.to_f64() });
        }
        let expected = T::one() / self.lambda.clone();
        for i in 0..self.columns() {
            let mass = self.column_mass(i);
            if self.x_cuts[i + 1] > self.lambda.clone() + tol.clone() {
                if mass > tol {
                    violations.push(Violation::Support { column: i, mass: mass.to_f64() });
                }
                continue;
            }
            let density = mass / self.width(i);
            if !close(&density, &expected) {
                violations.push(Violation::UniformX {
                    column: i,
                    density: density.to_f64(),
                    expected: expected.to_f64(),
                });
            }
        }
        let last_x = self.x_cuts[self.columns()].clone();
        if last_x < self.lambda.clone() - tol.clone() {
            // The grid stops short of lambda, so [last_x, lambda] carries no mass.
            violations.push(Violation::UniformX { column: self.columns(), density: 0.0, expected: expected.to_f64() });
        }
        for j in 0..self.rows() {
            let slope = self.row_mass(j) / self.height(j);
            if slope > expected.clone() + tol.clone() {
                violations.push(Violation::YLipschitz { row: j, slope: slope.to_f64(), bound: expected.to_f64() });
            }
        }
        ValidationReport { violations }
    }

    pub fn map_scalar<U: Scalar>(&self, f: impl Fn(&T) -> U) -> StepPermuton<U> {
        StepPermuton {
            x_cuts: self.x_cuts.iter().map(&f).collect(),
            y_cuts: self.y_cuts.iter().map(&f).collect(),
            cell_mass: self.cell_mass.iter().map(|c| c.iter().map(&f).collect()).collect(),
            lambda: f(&self.lambda),
        }
    }

    pub fn to_f64(&self) -> StepPermuton<f64> {
        self.map_scalar(Scalar::to_f64)
    }
}

impl StepPermuton<f64> {
    /// Exact copy holding the binary values of the floats verbatim.
    pub fn to_exact(&self) -> StepPermuton<Exact> {
        self.map_scalar(|v| Exact::from_f64(*v))
    }
}

/// Sorted union of two increasing cut lists; cuts within the scalar
/// tolerance of the previous one are dropped.
pub(crate) fn merge_cuts<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    let mut out: Vec<T> = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = if j == b.len() || (i < a.len() && a[i] <= b[j]) {
            i += 1;
            a[i - 1].clone()
        } else {
            j += 1;
            b[j - 1].clone()
        };
        if out.last().is_none_or(|last| !last.approx_eq(&next)) {
            out.push(next);
        }
    }
    out
}

fn check_cuts<T: Scalar>(axis: &str, cuts: &[T]) -> Result<()> {
    if cuts.len() < 2 {
        return Err(Error::Invalid(format!("{axis}-grid needs at least one cell")));
    }
    if !cuts[0].is_zero() {
        return Err(Error::Invalid(format!("{axis}-grid must start at 0")));
    }
    if let Some(i) = cuts.windows(2).position(|w| w[0] >= w[1]) {
        return Err(Error::Invalid(format!(
            "{axis}-cuts must be strictly increasing (cell {i} has zero or negative width)"
        )));
    }
    if cuts[cuts.len() - 1] > T::one() + T::tolerance() {
        return Err(Error::Invalid(format!("{axis}-grid extends beyond 1")));
    }
    Ok(())
}

fn cumulative<T: Scalar>(cuts: Vec<T>, masses: impl Iterator<Item = T>) -> PiecewiseLinearCdf<T> {
    let mut values = Vec::with_capacity(cuts.len());
    let mut acc = T::zero();
    values.push(acc.clone());
    for m in masses {
        acc = acc + m;
        values.push(acc.clone());
    }
    PiecewiseLinearCdf::new(cuts, values).expect("marginal of a probability measure")
}

/// For every cell of `fine`, the index of the `coarse` cell containing it and
/// the fraction of that cell's extent it covers.
fn parent_cells<T: Scalar>(coarse: &[T], fine: &[T]) -> Result<Vec<(usize, T)>> {
    let same = |a: Option<&T>, b: Option<&T>| matches!((a, b), (Some(a), Some(b)) if a.approx_eq(b));
    if !same(fine.first(), coarse.first()) || !same(fine.last(), coarse.last()) {
        return Err(Error::Structure("refined grid must span the same range".into()));
    }
    let mut out = Vec::with_capacity(fine.len() - 1);
    let mut parent = 0;
    for w in fine.windows(2) {
        while parent + 2 < coarse.len() && coarse[parent + 1].approx_le(&w[0]) {
            parent += 1;
        }
        if !w[1].approx_le(&coarse[parent + 1]) {
            return Err(Error::Structure("refined grid does not contain the original cuts".into()));
        }
        let extent = coarse[parent + 1].clone() - coarse[parent].clone();
        out.push((parent, (w[1].clone() - w[0].clone()) / extent));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    TotalMass {
        total: f64,
    },
    /// Mass to the right of lambda.
    Support {
        column: usize,
        mass: f64,
    },
    UniformX {
        column: usize,
        density: f64,
        expected: f64,
    },
    YLipschitz {
        row: usize,
        slope: f64,
        bound: f64,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// On-disk form: `{"lambda", "x_cuts", "y_cuts", "cell_mass"}` with
/// `cell_mass[i][j]` indexed by x-cell then y-cell.
#[derive(Serialize, Deserialize)]
struct StepPermutonFile {
    lambda: f64,
    x_cuts: Vec<f64>,
    y_cuts: Vec<f64>,
    cell_mass: Vec<Vec<f64>>,
}

impl Serialize for StepPermuton<f64> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        StepPermutonFile {
            lambda: self.lambda,
            x_cuts: self.x_cuts.clone(),
            y_cuts: self.y_cuts.clone(),
            cell_mass: self.cell_mass.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for StepPermuton<f64> {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let file = StepPermutonFile::deserialize(deserializer)?;
        StepPermuton::new(file.x_cuts, file.y_cuts, file.cell_mass, file.lambda).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Exact {
        Exact::ratio(n, d)
    }

    fn two_by_two(masses: [[i64; 2]; 2], den: i64) -> StepPermuton<Exact> {
        StepPermuton::new(
            vec![r(0, 1), r(1, 2), r(1, 1)],
            vec![r(0, 1), r(1, 2), r(1, 1)],
            masses.iter().map(|c| c.iter().map(|&m| r(m, den)).collect()).collect(),
            r(1, 1),
        )
        .unwrap()
    }

    #[test]
    fn uniform_square_is_valid() {
        assert!(StepPermuton::<f64>::uniform_square().validate().is_valid());
        assert!(StepPermuton::<Exact>::uniform_square().validate().is_valid());
    }

    #[test]
    fn doubled_column_is_reported() {
        let mu = two_by_two([[2, 2], [1, 1]], 4);
        let report = mu.validate();
        assert!(report.violations.iter().any(|v| matches!(v, Violation::UniformX { column: 0, .. })));
        assert!(report.violations.iter().any(|v| matches!(v, Violation::TotalMass { .. })));
    }

    #[test]
    fn lipschitz_violation_is_reported() {
        // Both columns put all mass in the lower row: slope 2 > 1.
        let mu = two_by_two([[1, 0], [1, 0]], 2);
        let report = mu.validate();
        assert_eq!(report.violations, vec![Violation::YLipschitz { row: 0, slope: 2.0, bound: 1.0 }]);
    }

    #[test]
    fn support_violation_is_reported() {
        let mu = StepPermuton::new(
            vec![r(0, 1), r(1, 2), r(1, 1)],
            vec![r(0, 1), r(1, 1)],
            vec![vec![r(1, 2)], vec![r(1, 2)]],
            r(1, 2),
        )
        .unwrap();
        let report = mu.validate();
        assert!(report.violations.iter().any(|v| matches!(v, Violation::Support { column: 1, .. })));
    }

    #[test]
    fn structural_errors() {
        assert!(StepPermuton::new(vec![0.0, 0.5, 0.5], vec![0.0, 1.0], vec![vec![0.5], vec![0.5]], 1.0).is_err());
        assert!(StepPermuton::new(vec![0.1, 1.0], vec![0.0, 1.0], vec![vec![1.0]], 1.0).is_err());
        assert!(StepPermuton::new(vec![0.0, 1.0], vec![0.0, 1.0], vec![vec![-1.0]], 1.0).is_err());
        assert!(StepPermuton::new(vec![0.0, 1.0], vec![0.0, 1.0], vec![vec![1.0]], 0.0).is_err());
        assert!(matches!(
            StepPermuton::new(vec![0.0, 1.0], vec![0.0, 1.0], vec![vec![1.0, 0.0]], 1.0),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn cdf_and_rectangles() {
        let mu = two_by_two([[1, 0], [0, 1]], 2);
        assert_eq!(mu.cdf(&r(1, 2), &r(1, 2)), r(1, 2));
        assert_eq!(mu.cdf(&r(1, 4), &r(1, 4)), r(1, 8));
        assert_eq!(mu.cdf(&r(1, 1), &r(1, 1)), r(1, 1));
        assert_eq!(mu.rect_mass(&r(1, 4), &r(3, 4), &r(1, 4), &r(3, 4)), r(1, 4));
    }

    #[test]
    fn refinement_preserves_cdf() {
        let mu = two_by_two([[1, 0], [0, 1]], 2);
        let fine: Vec<Exact> = (0..=4).map(|i| r(i, 4)).collect();
        let refined = mu.refine(&fine, &fine).unwrap();
        for a in &fine {
            for b in &fine {
                assert_eq!(refined.cdf(a, b), mu.cdf(a, b));
            }
        }
        assert!(mu.refine(&[r(0, 1), r(1, 3), r(1, 1)], &fine).is_err());
    }

    #[test]
    fn json_schema() {
        let mu = StepPermuton::<f64>::uniform_square();
        let text = serde_json::to_string(&mu).unwrap();
        assert_eq!(text, r#"{"lambda":1.0,"x_cuts":[0.0,1.0],"y_cuts":[0.0,1.0],"cell_mass":[[1.0]]}"#);
        let back: StepPermuton = serde_json::from_str(&text).unwrap();
        assert_eq!(back, mu);
        assert!(serde_json::from_str::<StepPermuton>(
            r#"{"lambda":1.0,"x_cuts":[0.0],"y_cuts":[0.0,1.0],"cell_mass":[]}"#
        )
        .is_err());
    }
}
