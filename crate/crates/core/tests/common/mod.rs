//! Reference implementations used to cross-check the library.
#![allow(dead_code)]

use genperm_core::{Exact, Permutation, Scalar, StepPermuton};
use num_traits::Zero;

/// All permutations of `items` (Heap-free recursive listing).
pub fn orders(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in orders(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// `t(tau, mu)` by summing over ordered assignments of the `k` points to
/// cells and, for each, over every within-column x-order and within-row
/// y-order.
pub fn density_oracle(tau: &Permutation, mu: &StepPermuton<Exact>) -> Exact {
    let k = tau.len();
    let cells: Vec<(usize, usize)> = mu.active_cells();
    let mut total = Exact::zero();
    let mut assignment = vec![0usize; k];
    loop {
        let weight =
            assignment.iter().fold(Exact::ratio(1, 1), |acc, &c| acc * mu.mass(cells[c].0, cells[c].1).clone());
        let cols: Vec<usize> = assignment.iter().map(|&c| cells[c].0).collect();
        let rows: Vec<usize> = assignment.iter().map(|&c| cells[c].1).collect();
        total += weight * conditional(tau, &cols, &rows);
        let mut pos = 0;
        loop {
            if pos == k {
                return total;
            }
            assignment[pos] += 1;
            if assignment[pos] < cells.len() {
                break;
            }
            assignment[pos] = 0;
            pos += 1;
        }
    }
}

/// Orders of points sharing a key, as lists of per-point tie-break ranks.
fn tie_breaks(keys: &[usize]) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut distinct: Vec<usize> = keys.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    for key in distinct {
        groups.push((0..keys.len()).filter(|&p| keys[p] == key).collect());
    }
    let mut out = vec![vec![0usize; keys.len()]];
    for group in groups {
        let mut next = Vec::new();
        for base in &out {
            for order in orders(&group) {
                let mut b = base.clone();
                for (rank, &p) in order.iter().enumerate() {
                    b[p] = rank;
                }
                next.push(b);
            }
        }
        out = next;
    }
    out
}

fn conditional(tau: &Permutation, cols: &[usize], rows: &[usize]) -> Exact {
    let k = cols.len();
    let x_orders = tie_breaks(cols);
    let y_orders = tie_breaks(rows);
    let mut hits = 0i64;
    for xo in &x_orders {
        for yo in &y_orders {
            let mut by_x: Vec<usize> = (0..k).collect();
            by_x.sort_by_key(|&p| (cols[p], xo[p]));
            let mut by_y: Vec<usize> = (0..k).collect();
            by_y.sort_by_key(|&p| (rows[p], yo[p]));
            let mut y_rank = vec![0; k];
            for (r, &p) in by_y.iter().enumerate() {
                y_rank[p] = r + 1;
            }
            if by_x.iter().map(|&p| y_rank[p]).eq(tau.values().iter().copied()) {
                hits += 1;
            }
        }
    }
    Exact::ratio(hits, (x_orders.len() * y_orders.len()) as i64)
}

/// Joint CDF written directly from the definition.
pub fn cdf_f64(mu: &StepPermuton<f64>, x: f64, y: f64) -> f64 {
    let mut total = 0.0;
    for i in 0..mu.columns() {
        let (x0, x1) = (mu.x_cuts()[i], mu.x_cuts()[i + 1]);
        let fx = ((x - x0) / (x1 - x0)).clamp(0.0, 1.0);
        if fx == 0.0 {
            continue;
        }
        for j in 0..mu.rows() {
            let (y0, y1) = (mu.y_cuts()[j], mu.y_cuts()[j + 1]);
            let fy = ((y - y0) / (y1 - y0)).clamp(0.0, 1.0);
            total += mu.mass(i, j) * fx * fy;
        }
    }
    total
}

fn union<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    let mut all: Vec<T> = a.iter().chain(b.iter()).cloned().collect();
    all.push(T::one());
    all.sort_by(|p, q| p.partial_cmp(q).unwrap());
    all.dedup();
    all
}

/// `sup_R |mu1(R) - mu2(R)|` over every rectangle with corners on the union
/// grid, using 2-D prefix sums of the signed cell masses.
pub fn d_square_oracle(mu1: &StepPermuton<Exact>, mu2: &StepPermuton<Exact>) -> Exact {
    let xs = union(mu1.x_cuts(), mu2.x_cuts());
    let ys = union(mu1.y_cuts(), mu2.y_cuts());
    let (p, q) = (xs.len() - 1, ys.len() - 1);
    let mut prefix = vec![vec![Exact::zero(); q + 1]; p + 1];
    for a in 0..p {
        for b in 0..q {
            let cell = mu1.rect_mass(&xs[a], &xs[a + 1], &ys[b], &ys[b + 1])
                - mu2.rect_mass(&xs[a], &xs[a + 1], &ys[b], &ys[b + 1]);
            prefix[a + 1][b + 1] = cell + prefix[a][b + 1].clone() + prefix[a + 1][b].clone() - prefix[a][b].clone();
        }
    }
    let mut best = Exact::zero();
    for a0 in 0..p {
        for a1 in a0 + 1..=p {
            for b0 in 0..q {
                for b1 in b0 + 1..=q {
                    let v = prefix[a1][b1].clone() - prefix[a0][b1].clone() - prefix[a1][b0].clone()
                        + prefix[a0][b0].clone();
                    let v = if v < Exact::zero() { -v } else { v };
                    if v > best {
                        best = v;
                    }
                }
            }
        }
    }
    best
}
