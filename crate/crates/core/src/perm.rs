//! Permutations (patterns) and ordered selections.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A permutation of `[k] = {1, ..., k}` stored in one-line notation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    values: Vec<usize>,
}

impl Permutation {
    pub fn new(values: Vec<usize>) -> Result<Self> {
        let k = values.len();
        if k == 0 {
            return Err(Error::Invalid("permutation must have at least one entry".into()));
        }
        let mut seen = vec![false; k];
        for &v in &values {
            if v == 0 || v > k {
                return Err(Error::Invalid(format!("value {v} is outside 1..={k}")));
            }
            if std::mem::replace(&mut seen[v - 1], true) {
                return Err(Error::Invalid(format!("value {v} appears twice")));
            }
        }
        Ok(Self { values })
    }

    pub fn identity(k: usize) -> Self {
        assert!(k >= 1, "identity of an empty set");
        Self { values: (1..=k).collect() }
    }

    /// The permutation whose one-line notation lists the ranks of `keys`.
    /// Keys must be pairwise distinct.
    pub(crate) fn from_ranks(ranks: Vec<usize>) -> Self {
        debug_assert!(Self::new(ranks.clone()).is_ok());
        Self { values: ranks }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    /// `sigma(i)` for one-based `i`.
    pub fn at(&self, i: usize) -> usize {
        self.values[i - 1]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.len()];
        for (i, &v) in self.values.iter().enumerate() {
            inv[v - 1] = i + 1;
        }
        Self { values: inv }
    }

    /// All `k!` permutations of `[k]` in lexicographic order.
    pub fn all(k: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut current: Vec<usize> = (1..=k).collect();
        loop {
            out.push(Self { values: current.clone() });
            if !next_permutation(&mut current) {
                break;
            }
        }
        out
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;

    fn try_from(values: Vec<usize>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.values
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

impl FromStr for Permutation {
    type Err = Error;

    /// Accepts `2,3,1,4`, `(2,3,1,4)` or `2 3 1 4`.
    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim().trim_start_matches('(').trim_end_matches(')');
        let values = trimmed
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<usize>().map_err(|_| Error::Invalid(format!("not a positive integer: {t:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(values)
    }
}

/// An `(n, m)`-permutation: `m` distinct values from `[n]` in a significant order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "SelectionFile", into = "SelectionFile")]
pub struct OrderedSelection {
    n: usize,
    values: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct SelectionFile {
    n: usize,
    m: usize,
    values: Vec<usize>,
}

impl OrderedSelection {
    pub fn new(n: usize, values: Vec<usize>) -> Result<Self> {
        let m = values.len();
        if m == 0 {
            return Err(Error::Invalid("selection must contain at least one value".into()));
        }
        if m > n {
            return Err(Error::Invalid(format!("selection length {m} exceeds ground set {n}")));
        }
        let mut seen = vec![false; n];
        for &v in &values {
            if v == 0 || v > n {
                return Err(Error::Invalid(format!("value {v} is outside 1..={n}")));
            }
            if std::mem::replace(&mut seen[v - 1], true) {
                return Err(Error::Invalid(format!("value {v} appears twice")));
            }
        }
        Ok(Self { n, values })
    }

    /// Ground-set size.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Selection length.
    pub fn m(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    /// `nu(h)` for one-based `h`.
    pub fn at(&self, h: usize) -> usize {
        self.values[h - 1]
    }

    /// Every member of `V_{n,m}`, lexicographically.
    pub fn all(n: usize, m: usize) -> Vec<OrderedSelection> {
        fn extend(n: usize, m: usize, used: &mut [bool], cur: &mut Vec<usize>, out: &mut Vec<OrderedSelection>) {
            if cur.len() == m {
                out.push(OrderedSelection { n, values: cur.clone() });
                return;
            }
            for v in 1..=n {
                if !used[v - 1] {
                    used[v - 1] = true;
                    cur.push(v);
                    extend(n, m, used, cur, out);
                    cur.pop();
                    used[v - 1] = false;
                }
            }
        }
        let mut out = Vec::new();
        if m >= 1 && m <= n {
            extend(n, m, &mut vec![false; n], &mut Vec::with_capacity(m), &mut out);
        }
        out
    }
}

impl From<Permutation> for OrderedSelection {
    fn from(p: Permutation) -> Self {
        Self { n: p.len(), values: p.values }
    }
}

impl TryFrom<SelectionFile> for OrderedSelection {
    type Error = Error;

    fn try_from(file: SelectionFile) -> Result<Self> {
        if file.m != file.values.len() {
            return Err(Error::Invalid(format!("m = {} but {} values were given", file.m, file.values.len())));
        }
        Self::new(file.n, file.values)
    }
}

impl From<OrderedSelection> for SelectionFile {
    fn from(s: OrderedSelection) -> Self {
        SelectionFile { n: s.n, m: s.values.len(), values: s.values }
    }
}

impl fmt::Display for OrderedSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ") in V_({},{})", self.n, self.m())
    }
}
