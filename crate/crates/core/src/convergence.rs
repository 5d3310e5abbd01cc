//! Diagnostics for a sequence of ordered selections converging to a target:
//! pattern-density gaps, marginal CDF gaps and `d_inf`, per sequence element.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::embed::embed_selection;
use crate::error::{Error, Result};
use crate::metrics::d_inf;
use crate::patterns::{
    density_in_permuton_mc, density_in_selection, density_in_step_permuton_exact_with_budget, DensityMethod,
    DEFAULT_ENUMERATION_BUDGET,
};
use crate::perm::{OrderedSelection, Permutation};
use crate::step::StepPermuton;

/// Knobs for [`converge`].
#[derive(Debug, Clone)]
pub struct ConvergenceOptions {
    /// Patterns of every size `1..=max_k` are tracked.
    pub max_k: usize,
    /// Explicit pattern list; overrides `max_k` when set.
    pub patterns: Option<Vec<Permutation>>,
    /// Exact enumeration budget for target densities.
    pub budget: u128,
    /// Monte Carlo draws per pattern when the budget is exceeded.
    pub mc_samples: u64,
    pub seed: u64,
}

impl Default for ConvergenceOptions {
    fn default() -> Self {
        Self { max_k: 3, patterns: None, budget: DEFAULT_ENUMERATION_BUDGET, mc_samples: 1 << 18, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityTrajectory {
    pub tau: Permutation,
    /// `t(tau, mu)` for the target.
    pub target: f64,
    pub target_method: DensityMethod,
    /// `t(tau, nu_n)`.
    pub values: Vec<f64>,
    /// `|t(tau, nu_n) - t(tau, mu)|`.
    pub gaps: Vec<f64>,
}

/// Monotone-trend flags: a channel "trends to zero" when its last entry is
/// no larger than its first and no larger than every earlier entry plus `slack`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub density_gaps_decrease: bool,
    pub marginal_gaps_decrease: bool,
    pub d_inf_decreases: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    /// `(n, m)` of every sequence element, in input order.
    pub sizes: Vec<(usize, usize)>,
    pub densities: Vec<DensityTrajectory>,
    pub marginal_gap_x: Vec<f64>,
    pub marginal_gap_y: Vec<f64>,
    pub d_inf: Vec<f64>,
    pub verdict: Verdict,
}

const TREND_SLACK: f64 = 1e-12;

fn trends_down(values: &[f64]) -> bool {
    match values.last() {
        None => true,
        Some(&last) => values.iter().all(|&v| last <= v + TREND_SLACK),
    }
}

/// Computes every diagnostic channel for `sequence` against `target`.
pub fn converge(
    sequence: &[OrderedSelection],
    target: &StepPermuton,
    options: &ConvergenceOptions,
) -> Result<ConvergenceReport> {
    let patterns: Vec<Permutation> = match &options.patterns {
        Some(list) => list.clone(),
        None => (1..=options.max_k).flat_map(Permutation::all).collect(),
    };
    let longest = patterns.iter().map(Permutation::len).max().unwrap_or(0);
    if longest == 0 {
        return Err(Error::Parameter("at least one non-empty pattern is required".into()));
    }
    if let Some(nu) = sequence.iter().find(|nu| nu.m() < longest) {
        return Err(Error::Parameter(format!("pattern size {longest} exceeds m = {} of a sequence element", nu.m())));
    }
    let mut densities = Vec::with_capacity(patterns.len());
    for tau in &patterns {
        let reference = match density_in_step_permuton_exact_with_budget(tau, target, options.budget) {
            Ok(exact) => exact,
            Err(Error::Resource { .. }) => density_in_permuton_mc(tau, target, options.mc_samples, options.seed)?,
            Err(e) => return Err(e),
        };
        let values = sequence
            .iter()
            .map(|nu| density_in_selection::<f64>(tau, nu).map(|d| d.value))
            .collect::<Result<Vec<_>>>()?;
        let gaps = values.iter().map(|v| (v - reference.value).abs()).collect();
        densities.push(DensityTrajectory {
            tau: tau.clone(),
            target: reference.value,
            target_method: reference.method,
            values,
            gaps,
        });
    }
    let (tx, ty) = target.marginals();
    let mut marginal_gap_x = Vec::with_capacity(sequence.len());
    let mut marginal_gap_y = Vec::with_capacity(sequence.len());
    let mut distances = Vec::with_capacity(sequence.len());
    for nu in sequence {
        let embedded = embed_selection::<f64>(nu);
        let (fx, fy) = embedded.marginals();
        marginal_gap_x.push(fx.sup_distance(&tx));
        marginal_gap_y.push(fy.sup_distance(&ty));
        distances.push(d_inf(&embedded, target).value);
    }
    let verdict = Verdict {
        density_gaps_decrease: densities.iter().all(|d| trends_down(&d.gaps)),
        marginal_gaps_decrease: trends_down(&marginal_gap_x) && trends_down(&marginal_gap_y),
        d_inf_decreases: trends_down(&distances),
    };
    Ok(ConvergenceReport {
        sizes: sequence.iter().map(|nu| (nu.n(), nu.m())).collect(),
        densities,
        marginal_gap_x,
        marginal_gap_y,
        d_inf: distances,
        verdict,
    })
}

/// One row of the CSV export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub index: usize,
    pub n: usize,
    pub m: usize,
    /// `density:<tau>`, `marginal_gap_x`, `marginal_gap_y` or `d_inf`.
    pub channel: String,
    pub value: f64,
}

pub const CSV_HEADER: [&str; 5] = ["index", "n", "m", "channel", "value"];

impl ConvergenceReport {
    /// Rows in a stable order: by sequence index, then densities in pattern
    /// order, then the x and y marginal gaps, then `d_inf`.
    pub fn rows(&self) -> Vec<CsvRow> {
        let mut rows = Vec::new();
        for (index, &(n, m)) in self.sizes.iter().enumerate() {
            let mut push = |channel: String, value: f64| rows.push(CsvRow { index, n, m, channel, value });
            for d in &self.densities {
                push(format!("density:{}", d.tau), d.values[index]);
            }
            push("marginal_gap_x".into(), self.marginal_gap_x[index]);
            push("marginal_gap_y".into(), self.marginal_gap_y[index]);
            push("d_inf".into(), self.d_inf[index]);
        }
        rows
    }

    /// Writes the header `index,n,m,channel,value` and one row per
    /// `(element, channel)`. Floats use shortest round-trip formatting.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_rows(&self.rows(), out)
    }
}

pub fn write_rows<W: Write>(rows: &[CsvRow], out: W) -> Result<()> {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    writer.write_record(CSV_HEADER)?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Parses CSV produced by [`ConvergenceReport::write_csv`].
pub fn read_csv<R: Read>(input: R) -> Result<Vec<CsvRow>> {
    let mut reader = csv::Reader::from_reader(input);
    if reader.headers()?.iter().ne(CSV_HEADER) {
        return Err(Error::Invalid(format!("expected CSV header {}", CSV_HEADER.join(","))));
    }
    reader.deserialize().map(|r| r.map_err(Error::from)).collect()
}
