//! Torus integrals of trace invariants of the conditioned matrices `X`, `Y`.

use serde::{Deserialize, Serialize};

use crate::correlations::CensusRow;
use crate::kacrice::{conditioned_covariance, default_grid_n, energy, JetEvaluator, TraceInvariants, DEFAULT_EPS_SING};
use crate::lattice::LatticeSet;
use crate::quadrature::symmetric_grid;
use crate::{Error, Result};

pub const LEMMA52_NAMES: [&str; 11] = [
    "lemma52_part1",
    "lemma52_part2",
    "lemma52_part3",
    "lemma52_part4",
    "lemma52_part5",
    "lemma52_part6",
    "lemma52_part7",
    "lemma52_part8",
    "lemma52_part9",
    "lemma52_part10",
    "lemma52_part11",
];

/// Integrands in [`LEMMA52_NAMES`] order.
fn integrands(t: &TraceInvariants) -> [f64; 11] {
    let r2 = t.r * t.r;
    [
        t.tr_x,
        t.tr_y2,
        t.tr_xy2,
        t.tr_x2,
        t.tr_y4,
        t.tr_y2 * t.tr_y2,
        t.tr_x * t.tr_y2,
        r2 * t.tr_x,
        r2 * t.tr_y2,
        t.tr_x3,
        t.tr_y6,
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Lemma52Budget {
    /// `|X(4)|/N^4 + |C(6)|/N^6`.
    Psi,
    /// `m^(-1/28)/N^2 + |X(4)|/N^4 + |C(6)|/N^6`.
    Phi,
    /// Upper bound `|C(6)|/N^6`.
    C6,
}

/// Predicted `(1/N, 1/N^2)` coefficients and budget class.
pub(super) fn lemma52_prediction(k: usize) -> ((i64, i64), (i64, i64), Lemma52Budget) {
    use Lemma52Budget::*;
    match k {
        0 => ((-3, 1), (-3, 1), Psi),
        1 => ((9, 1), (-6, 1), Psi),
        2 => ((0, 1), (-9, 1), Psi),
        3 => ((0, 1), (15, 1), Psi),
        4 => ((0, 1), (351, 5), Phi),
        5 => ((0, 1), (567, 5), Phi),
        6 => ((0, 1), (-27, 1), Psi),
        7 => ((0, 1), (-3, 1), Psi),
        8 => ((0, 1), (15, 1), Psi),
        _ => ((0, 1), (0, 1), C6),
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Lemma52Config {
    /// Points per axis; `None` selects the variance default.
    pub grid_n: Option<usize>,
    pub eps_sing: f64,
}

impl Default for Lemma52Config {
    fn default() -> Self {
        Lemma52Config { grid_n: None, eps_sing: DEFAULT_EPS_SING }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma52Row {
    pub m: u64,
    #[serde(rename = "N")]
    pub n: usize,
    pub entry: String,
    #[serde(serialize_with = "crate::report::sig::serialize")]
    pub value: f64,
    #[serde(serialize_with = "crate::report::sig::serialize")]
    pub prediction: f64,
    #[serde(serialize_with = "crate::report::sig::serialize")]
    pub deviation: f64,
    pub budget_kind: Lemma52Budget,
    /// Budget terms with unit constants; `None` without a `C(6)` count.
    #[serde(serialize_with = "crate::report::sig_opt::serialize")]
    pub budget: Option<f64>,
}

pub const LEMMA52_CSV_HEADER: &str = "m,N,entry,value,prediction,deviation,budget_kind,budget";

impl Lemma52Row {
    pub fn csv_line(&self) -> String {
        use crate::report::fmt_sig;
        let kind = match self.budget_kind {
            Lemma52Budget::Psi => "psi",
            Lemma52Budget::Phi => "phi",
            Lemma52Budget::C6 => "c6",
        };
        format!(
            "{},{},{},{},{},{},{},{}",
            self.m,
            self.n,
            self.entry,
            fmt_sig(self.value),
            fmt_sig(self.prediction),
            fmt_sig(self.deviation),
            kind,
            self.budget.map(fmt_sig).unwrap_or_default()
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma52Table {
    pub grid_n: usize,
    /// Fraction of grid nodes skipped as near-singular.
    pub excluded_fraction: f64,
    pub rows: Vec<Lemma52Row>,
}

/// Midpoint-rule integrals of the eleven trace combinations over nodes with
/// `|r| < 1 - eps_sing`, against their predicted leading terms.
pub fn lemma52_terms(set: &LatticeSet, census: &CensusRow, cfg: &Lemma52Config) -> Result<Lemma52Table> {
    if set.is_empty() {
        return Err(Error::InvalidArgument(format!("E({}) is empty", set.m())));
    }
    let (m, n) = (set.m(), set.len());
    let grid_n = cfg.grid_n.unwrap_or_else(|| default_grid_n(m));
    if grid_n < 16 {
        return Err(Error::InvalidArgument(format!("grid resolution {grid_n} below 16")));
    }
    let e = energy(m);
    let ev = JetEvaluator::new(set);
    let nodes = symmetric_grid(grid_n);
    let per_node = crate::par::map_slice(&nodes, |node| -> Result<([f64; 11], u64)> {
        let x = node.point(grid_n);
        let jet = ev.jet(x);
        if jet.r.abs() >= 1.0 - cfg.eps_sing {
            return Ok(([0.0; 11], node.weight));
        }
        let cc = conditioned_covariance(&jet, e, 0.0)?;
        let v = integrands(&TraceInvariants::new(jet.r, &cc.x, &cc.y));
        if v.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFiniteIntegrand { x });
        }
        Ok((v.map(|t| t * node.weight as f64), 0))
    });
    let mut cols: Vec<Vec<f64>> = (0..11).map(|_| Vec::with_capacity(per_node.len())).collect();
    let mut skipped = 0u64;
    for item in per_node {
        let (v, w) = item?;
        skipped += w;
        for (col, t) in cols.iter_mut().zip(v) {
            col.push(t);
        }
    }
    let total = (grid_n * grid_n * grid_n) as f64;
    let nf = n as f64;
    let x4 = census.x4 as f64 / nf.powi(4);
    let c6 = census.c6.map(|c| c as f64 / nf.powi(6));
    let equid = (m as f64).powf(-1.0 / 28.0) / (nf * nf);
    let rows = cols
        .iter()
        .enumerate()
        .map(|(k, col)| {
            let value = crate::par::ordered_sum(col) / total;
            let ((a, b), (c, d), kind) = lemma52_prediction(k);
            let prediction = a as f64 / b as f64 / nf + c as f64 / d as f64 / (nf * nf);
            let budget = match kind {
                Lemma52Budget::Psi => c6.map(|c| x4 + c),
                Lemma52Budget::Phi => c6.map(|c| equid + x4 + c),
                Lemma52Budget::C6 => c6,
            };
            Lemma52Row {
                m,
                n,
                entry: LEMMA52_NAMES[k].to_string(),
                value,
                prediction,
                deviation: (value - prediction).abs(),
                budget_kind: kind,
                budget,
            }
        })
        .collect();
    Ok(Lemma52Table { grid_n, excluded_fraction: skipped as f64 / total, rows })
}
