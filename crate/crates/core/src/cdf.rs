//! Continuous piecewise-linear distribution functions on `[0, 1]`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A continuous CDF given by its breakpoints. Between breakpoints it is
/// linear; left of the first breakpoint it is 0 and right of the last it is 1.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearCdf<T = f64> {
    breakpoints: Vec<T>,
    values: Vec<T>,
}

impl<T: Scalar> PiecewiseLinearCdf<T> {
    pub fn new(breakpoints: Vec<T>, values: Vec<T>) -> Result<Self> {
        if breakpoints.len() != values.len() {
            return Err(Error::Shape { expected: breakpoints.len(), found: values.len() });
        }
        if breakpoints.len() < 2 {
            return Err(Error::Invalid("a CDF needs at least two breakpoints".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid("breakpoints must be strictly increasing".into()));
        }
        if breakpoints[0] < T::zero() || breakpoints[breakpoints.len() - 1] > T::one() + T::tolerance() {
            return Err(Error::Invalid("breakpoints must lie in [0, 1]".into()));
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Invalid("CDF values must be non-decreasing".into()));
        }
        if !values[0].approx_eq(&T::zero()) || !values[values.len() - 1].approx_eq(&T::one()) {
            return Err(Error::Invalid("CDF must start at 0 and end at 1".into()));
        }
        Ok(Self { breakpoints, values })
    }

    /// Uniform distribution on `[0, upper]`.
    pub fn uniform(upper: T) -> Self {
        Self { breakpoints: vec![T::zero(), upper], values: vec![T::zero(), T::one()] }
    }

    pub fn breakpoints(&self) -> &[T] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn eval(&self, x: &T) -> T {
        let last = self.breakpoints.len() - 1;
        if *x <= self.breakpoints[0] {
            return self.values[0].clone();
        }
        if *x >= self.breakpoints[last] {
            return self.values[last].clone();
        }
        // First breakpoint strictly greater than x.
        let hi = self.breakpoints.partition_point(|b| b <= x);
        let lo = hi - 1;
        let (x0, x1) = (&self.breakpoints[lo], &self.breakpoints[hi]);
        let (v0, v1) = (&self.values[lo], &self.values[hi]);
        v0.clone() + (v1.clone() - v0.clone()) * (x.clone() - x0.clone()) / (x1.clone() - x0.clone())
    }

    /// `sup { x : F(x) = q }` for `0 < q < 1`.
    pub fn quantile(&self, q: &T) -> Result<T> {
        if *q <= T::zero() || *q >= T::one() {
            return Err(Error::Domain(format!("quantile level {:?} is outside (0, 1)", q.to_f64())));
        }
        // Largest index whose value does not exceed q. Values start at 0 < q,
        // and end at 1 > q, so idx is in [0, last).
        let idx = self.values.partition_point(|v| v <= q) - 1;
        if self.values[idx] == *q {
            return Ok(self.breakpoints[idx].clone());
        }
        let (x0, x1) = (&self.breakpoints[idx], &self.breakpoints[idx + 1]);
        let (v0, v1) = (&self.values[idx], &self.values[idx + 1]);
        Ok(x0.clone() + (x1.clone() - x0.clone()) * (q.clone() - v0.clone()) / (v1.clone() - v0.clone()))
    }

    /// Largest slope over all linear pieces.
    pub fn max_slope(&self) -> T {
        self.breakpoints
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(b, v)| (v[1].clone() - v[0].clone()) / (b[1].clone() - b[0].clone()))
            .fold(T::zero(), T::max_of)
    }

    /// Whether every increment obeys `F(b) - F(a) <= (b - a) / lambda`.
    pub fn is_lipschitz(&self, lambda: &T) -> bool {
        self.breakpoints.windows(2).zip(self.values.windows(2)).all(|(b, v)| {
            let rise = v[1].clone() - v[0].clone();
            let run = b[1].clone() - b[0].clone();
            rise.approx_le(&(run / lambda.clone()))
        })
    }

    /// `sup_x |F(x) - G(x)|`. The difference is linear between merged
    /// breakpoints, so the maximum sits on one of them.
    pub fn sup_distance(&self, other: &Self) -> T {
        let mut best = T::zero();
        for x in self.breakpoints.iter().chain(other.breakpoints.iter()) {
            best = best.max_of((self.eval(x) - other.eval(x)).abs());
        }
        best
    }

    pub fn to_f64(&self) -> PiecewiseLinearCdf<f64> {
        PiecewiseLinearCdf {
            breakpoints: self.breakpoints.iter().map(Scalar::to_f64).collect(),
            values: self.values.iter().map(Scalar::to_f64).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Exact;

    fn example_fy() -> PiecewiseLinearCdf<Exact> {
        let r = Exact::ratio;
        PiecewiseLinearCdf::new(
            (0..=5).map(|i| r(i, 5)).collect(),
            vec![r(0, 1), r(1, 3), r(2, 3), r(2, 3), r(1, 1), r(1, 1)],
        )
        .unwrap()
    }

    #[test]
    fn uniform_evaluation_and_inverse() {
        let f = PiecewiseLinearCdf::uniform(0.6);
        assert!((f.eval(&0.3) - 0.5).abs() < 1e-15);
        assert_eq!(f.eval(&0.9), 1.0);
        assert_eq!(f.eval(&-0.1), 0.0);
        assert!((f.quantile(&(1.0 / 3.0)).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn broken_line_flat_piece() {
        let f = example_fy();
        assert_eq!(f.eval(&Exact::ratio(1, 2)), Exact::ratio(2, 3));
        // Flat piece [2/5, 3/5] at level 2/3: the quantile takes its right end.
        assert_eq!(f.quantile(&Exact::ratio(2, 3)).unwrap(), Exact::ratio(3, 5));
        assert_eq!(f.quantile(&Exact::ratio(1, 3)).unwrap(), Exact::ratio(1, 5));
        assert_eq!(f.max_slope(), Exact::ratio(5, 3));
        assert!(f.is_lipschitz(&Exact::ratio(3, 5)));
        assert!(!f.is_lipschitz(&Exact::ratio(4, 5)));
    }

    #[test]
    fn quantile_domain() {
        let f = PiecewiseLinearCdf::uniform(1.0);
        assert!(matches!(f.quantile(&0.0), Err(Error::Domain(_))));
        assert!(matches!(f.quantile(&1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn constructor_checks() {
        assert!(PiecewiseLinearCdf::new(vec![0.0, 0.5], vec![0.0, 0.9]).is_err());
        assert!(PiecewiseLinearCdf::new(vec![0.0, 0.0], vec![0.0, 1.0]).is_err());
        assert!(PiecewiseLinearCdf::new(vec![0.0, 0.5, 1.0], vec![0.0, 0.6, 0.4]).is_err());
    }

    #[test]
    fn sup_distance_between_uniforms() {
        let a = PiecewiseLinearCdf::uniform(Exact::ratio(1, 2));
        let b = PiecewiseLinearCdf::uniform(Exact::ratio(1, 1));
        assert_eq!(a.sup_distance(&b), Exact::ratio(1, 2));
    }
}
