//! Angular moments of lattice-point inner products and exact torus
//! integrals of products of `r`, `D` and `H`.
//!
//! Integrating a product of `r`, `D = grad r` and `H = Hess r` over the
//! torus keeps only the frequency tuples summing to zero, so every integral
//! below is a finite sum over `C(2)`, `C(4)` or `C(6)` of products of
//! inner products `mu_i . mu_j`, divided by powers of `m` and `N`. The sums
//! are accumulated in integers and divided once.

mod assembly;
mod lemma52;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::correlations::{count_c4, count_c6, CensusRow, CostCaps};
use crate::kacrice::{energy, JetEvaluator};
use crate::lattice::{inner_product_histogram, LatticePoint, LatticeSet, PairGroups, PairSumTable};
use crate::quadrature::symmetric_grid;
use crate::{Error, Result};

pub use assembly::{
    assemble_leading_constant, l2_integral_predictions, AssemblyTerm, IntegralPrediction, LeadingTermAssembly,
};
pub use lemma52::{lemma52_terms, Lemma52Config, Lemma52Row, Lemma52Table, LEMMA52_CSV_HEADER, LEMMA52_NAMES};

/// `B_k = (1/(m^k N^2)) sum_{mu1, mu2} (mu1 . mu2)^k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AngularMoment {
    pub k: u32,
    pub value: BigRational,
}

fn big(x: impl Into<BigInt>) -> BigInt {
    x.into()
}

fn ratio(num: impl Into<BigInt>, den: BigInt) -> BigRational {
    BigRational::new(num.into(), den)
}

/// `B_k` through the inner-product histogram.
pub fn angular_moment(set: &LatticeSet, k: u32) -> Result<AngularMoment> {
    if set.is_empty() || k == 0 {
        return Err(Error::InvalidArgument(format!("B_{k} needs k >= 1 and a nonempty E({})", set.m())));
    }
    let sum: BigInt = inner_product_histogram(set).iter().map(|(&r, &c)| big(r).pow(k) * big(c)).sum();
    let den = big(set.m()).pow(k) * big(set.len()).pow(2);
    Ok(AngularMoment { k, value: ratio(sum, den) })
}

/// `B_k` by the plain double loop.
pub fn angular_moment_direct(set: &LatticeSet, k: u32) -> Result<AngularMoment> {
    if set.is_empty() || k == 0 {
        return Err(Error::InvalidArgument(format!("B_{k} needs k >= 1 and a nonempty E({})", set.m())));
    }
    let mut sum = BigInt::zero();
    for a in set {
        for b in set {
            sum += big(a.dot(b)).pow(k);
        }
    }
    let den = big(set.m()).pow(k) * big(set.len()).pow(2);
    Ok(AngularMoment { k, value: ratio(sum, den) })
}

/// Entry names in table order.
pub const LEMMA61_NAMES: [&str; 16] = [
    "lemma61_part1a",
    "lemma61_part1b",
    "lemma61_part2a",
    "lemma61_part2b",
    "lemma61_part3",
    "lemma61_part4a",
    "lemma61_part4b",
    "lemma61_part5a",
    "lemma61_part5b",
    "lemma61_part6",
    "lemma61_part7",
    "lemma61_part8",
    "lemma61_part9",
    "lemma61_part10",
    "lemma61_part11",
    "lemma61_part12",
];

/// Exact values of the sixteen torus integrals.
#[derive(Clone, Debug, PartialEq)]
pub struct Lemma61Table {
    pub m: u64,
    pub n: usize,
    /// `int r^2`.
    pub int_r2: BigRational,
    /// `int r^4`.
    pub int_r4: BigRational,
    /// `(1/E) int D D^t`.
    pub int_ddt_over_e: BigRational,
    /// `(1/E^2) int (D D^t)^2`.
    pub int_ddt2_over_e2: BigRational,
    /// `(1/E) int r^2 D D^t`.
    pub int_r2ddt_over_e: BigRational,
    /// `(1/E^2) int tr(H^2)`.
    pub int_trh2_over_e2: BigRational,
    /// `(1/E^2) int r^2 tr(H^2)`.
    pub int_r2trh2_over_e2: BigRational,
    /// `(1/E^4) int tr(H^4)`.
    pub int_trh4_over_e4: BigRational,
    /// `(1/E^4) int tr(H^2)^2`.
    pub int_trh2sq_over_e4: BigRational,
    /// `(1/E^3) int D D^t tr(H^2)`.
    pub int_ddttrh2_over_e3: BigRational,
    /// `(1/E^2) int r D H D^t`.
    pub int_rdhdt_over_e2: BigRational,
    /// `(1/E^3) int D H^2 D^t`.
    pub int_dh2dt_over_e3: BigRational,
    /// Entries over `C(6)`; `None` when the cost cap refused them.
    pub six: Option<Lemma61Six>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lemma61Six {
    /// `(1/E^3) int (D D^t)^3`.
    pub int_ddt3_over_e3: BigRational,
    /// `(1/E) int r^4 D D^t`.
    pub int_r4ddt_over_e: BigRational,
    /// `(1/E^6) int tr(H^6)`.
    pub int_trh6_over_e6: BigRational,
    /// `(1/E^3) int r D D^t D H D^t`.
    pub int_rddtdhdt_over_e3: BigRational,
}

impl Lemma61Table {
    /// `(name, value)` in [`LEMMA61_NAMES`] order.
    pub fn entries(&self) -> Vec<(&'static str, Option<&BigRational>)> {
        let six = self.six.as_ref();
        let vals = [
            Some(&self.int_r2),
            Some(&self.int_r4),
            Some(&self.int_ddt_over_e),
            Some(&self.int_ddt2_over_e2),
            Some(&self.int_r2ddt_over_e),
            Some(&self.int_trh2_over_e2),
            Some(&self.int_r2trh2_over_e2),
            Some(&self.int_trh4_over_e4),
            Some(&self.int_trh2sq_over_e4),
            Some(&self.int_ddttrh2_over_e3),
            Some(&self.int_rdhdt_over_e2),
            Some(&self.int_dh2dt_over_e3),
            six.map(|s| &s.int_ddt3_over_e3),
            six.map(|s| &s.int_r4ddt_over_e),
            six.map(|s| &s.int_trh6_over_e6),
            six.map(|s| &s.int_rddtdhdt_over_e3),
        ];
        LEMMA61_NAMES.iter().copied().zip(vals).collect()
    }
}

/// Inner products of all pairs of points.
struct Gram {
    n: usize,
    g: Vec<i64>,
}

impl Gram {
    fn new(pts: &[LatticePoint]) -> Self {
        let n = pts.len();
        let mut g = Vec::with_capacity(n * n);
        for a in pts {
            for b in pts {
                g.push(a.dot(b));
            }
        }
        Gram { n, g }
    }

    #[inline]
    fn at(&self, i: u32, j: u32) -> i128 {
        self.g[i as usize * self.n + j as usize] as i128
    }
}

/// Sums over `C(4)` in the order 2b, 3, 4b, 5a, 5b, 6, 7, 8.
fn c4_sums(gram: &Gram, groups: &PairGroups) -> [i128; 8] {
    let rows = crate::par::map_range(0..groups.len(), |g| {
        let mut s = [0i128; 8];
        for &(a, b) in &groups.pairs[g] {
            let g12 = gram.at(a, b);
            for &(c, d) in &groups.pairs[groups.partner[g]] {
                let (g23, g34, g41) = (gram.at(b, c), gram.at(c, d), gram.at(d, a));
                s[0] += g12 * g34;
                s[1] += g34;
                s[2] += g34 * g34;
                s[3] += g12 * g23 * g34 * g41;
                s[4] += g12 * g12 * g34 * g34;
                s[5] += g12 * g34 * g34;
                s[6] += g23 * g34;
                s[7] += g12 * g23 * g34;
            }
        }
        s
    });
    rows.iter().fold([0i128; 8], |mut acc, s| {
        for k in 0..8 {
            acc[k] += s[k];
        }
        acc
    })
}

/// Sums over `C(6)` in the order 9, 10, 11, 12.
fn c6_sums(gram: &Gram, groups: &PairGroups) -> [i128; 4] {
    let rows = crate::par::map_range(0..groups.len(), |g1| {
        let mut s = [0i128; 4];
        let t1 = groups.taus[g1];
        for g2 in 0..groups.len() {
            let Some(g3) = groups.index_of(&-(t1 + groups.taus[g2])) else { continue };
            for &(a, b) in &groups.pairs[g1] {
                let g12 = gram.at(a, b);
                for &(c, d) in &groups.pairs[g2] {
                    let (g23, g34) = (gram.at(b, c), gram.at(c, d));
                    for &(e, f) in &groups.pairs[g3] {
                        let (g45, g56, g61) = (gram.at(d, e), gram.at(e, f), gram.at(f, a));
                        s[0] += g12 * g34 * g56;
                        s[1] += g56;
                        s[2] += g12 * g23 * g34 * g45 * g56 * g61;
                        s[3] += g23 * g45 * g56;
                    }
                }
            }
        }
        s
    });
    rows.iter().fold([0i128; 4], |mut acc, s| {
        for k in 0..4 {
            acc[k] += s[k];
        }
        acc
    })
}

/// Exact table. The `C(6)` entries are skipped (left `None`) when the
/// tuple enumeration would exceed `caps.c6_work`; `strict` turns that
/// refusal into an error instead.
pub fn lemma61_exact(set: &LatticeSet, caps: &CostCaps, strict: bool) -> Result<Lemma61Table> {
    if set.is_empty() {
        return Err(Error::InvalidArgument(format!("E({}) is empty", set.m())));
    }
    let (m, n) = (set.m(), set.len());
    let table = PairSumTable::new(set);
    let groups = PairGroups::new(set);
    let gram = Gram::new(set.points());
    let bm = big(m);
    let bn = big(n);
    let den = |pm: u32, pn: u32| bm.pow(pm) * bn.pow(pn);

    let zero = groups.index_of(&LatticePoint::ZERO).expect("tau = 0 is always a pair sum");
    let (mut c2_dot, mut c2_dot2) = (0i128, 0i128);
    for &(a, b) in &groups.pairs[zero] {
        let g = gram.at(a, b);
        c2_dot += g;
        c2_dot2 += g * g;
    }
    let c4 = count_c4(&table);
    let s = c4_sums(&gram, &groups);

    let six = match six_entries(set, &table, &gram, &groups, caps) {
        Ok(sums) => Some(Lemma61Six {
            int_ddt3_over_e3: ratio(-sums[0], den(3, 6)),
            int_r4ddt_over_e: ratio(-sums[1], den(1, 6)),
            int_trh6_over_e6: ratio(sums[2], den(6, 6)),
            int_rddtdhdt_over_e3: ratio(-sums[3], den(3, 6)),
        }),
        Err(e @ Error::CostCapExceeded { .. }) if strict => return Err(e),
        Err(Error::CostCapExceeded { .. }) => None,
        Err(e) => return Err(e),
    };

    Ok(Lemma61Table {
        m,
        n,
        int_r2: ratio(n, den(0, 2)),
        int_r4: ratio(c4, den(0, 4)),
        int_ddt_over_e: ratio(-c2_dot, den(1, 2)),
        int_ddt2_over_e2: ratio(s[0], den(2, 4)),
        int_r2ddt_over_e: ratio(-s[1], den(1, 4)),
        int_trh2_over_e2: ratio(c2_dot2, den(2, 2)),
        int_r2trh2_over_e2: ratio(s[2], den(2, 4)),
        int_trh4_over_e4: ratio(s[3], den(4, 4)),
        int_trh2sq_over_e4: ratio(s[4], den(4, 4)),
        int_ddttrh2_over_e3: ratio(-s[5], den(3, 4)),
        int_rdhdt_over_e2: ratio(s[6], den(2, 4)),
        int_dh2dt_over_e3: ratio(-s[7], den(3, 4)),
        six,
    })
}

fn six_entries(
    set: &LatticeSet,
    table: &PairSumTable,
    gram: &Gram,
    groups: &PairGroups,
    caps: &CostCaps,
) -> Result<[i128; 4]> {
    let support = groups.len() as u128;
    let c6 = count_c6(set, table, caps)?;
    let work = support * support + c6;
    if work > caps.c6_work {
        return Err(Error::CostCapExceeded { what: "lemma61 C(6) entries", estimate: work, cap: caps.c6_work });
    }
    Ok(c6_sums(gram, groups))
}

/// Midpoint-rule values of the same sixteen integrals from the covariance
/// jet on an `n^3` grid, in [`LEMMA61_NAMES`] order.
///
/// The integrands are trigonometric polynomials with frequencies below
/// `6 sqrt(m) + 1`, so the rule is exact up to rounding once `n` exceeds
/// that bound.
pub fn lemma61_numeric(set: &LatticeSet, grid_n: usize) -> Result<Vec<(&'static str, f64)>> {
    if set.is_empty() || grid_n == 0 {
        return Err(Error::InvalidArgument("lemma61_numeric needs a nonempty set and grid".into()));
    }
    let ev = JetEvaluator::new(set);
    let e = energy(set.m());
    let nodes = symmetric_grid(grid_n);
    let per_node = crate::par::map_slice(&nodes, |node| {
        let j = ev.jet(node.point(grid_n));
        let w = node.weight as f64;
        let r = j.r;
        let dd = j.d.norm_squared();
        let h2 = j.h * j.h;
        let tr_h2 = h2.trace();
        let tr_h4 = (h2 * h2).trace();
        let tr_h6 = (h2 * h2 * h2).trace();
        let dhd = (j.d.transpose() * j.h * j.d)[0];
        let dh2d = (j.d.transpose() * h2 * j.d)[0];
        let (e2, e3) = (e * e, e * e * e);
        let (e4, e6) = (e2 * e2, e3 * e3);
        [
            r * r,
            r.powi(4),
            dd / e,
            dd * dd / e2,
            r * r * dd / e,
            tr_h2 / e2,
            r * r * tr_h2 / e2,
            tr_h4 / e4,
            tr_h2 * tr_h2 / e4,
            dd * tr_h2 / e3,
            r * dhd / e2,
            dh2d / e3,
            dd * dd * dd / e3,
            r.powi(4) * dd / e,
            tr_h6 / e6,
            r * dd * dhd / e3,
        ]
        .map(|v| w * v)
    });
    let total = (grid_n * grid_n * grid_n) as f64;
    Ok(LEMMA61_NAMES
        .iter()
        .enumerate()
        .map(|(k, &name)| {
            let col: Vec<f64> = per_node.iter().map(|row| row[k]).collect();
            (name, crate::par::ordered_sum(&col) / total)
        })
        .collect())
}

/// Which error budget an asymptotic statement carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Budget {
    /// Identity, no error term.
    Exact,
    /// `1/N^3 + |X(4)|/N^4`.
    Rho,
    /// `m^(-1/28)/N^2 + |X(4)|/N^4`.
    Sigma,
    /// Upper bound `|C(6)|/N^6`.
    C6,
}

/// Stated leading behaviour of each entry: coefficient of `1/N` (for the
/// identities) or `1/N^2`, and the budget class.
fn lemma61_leading(name: &str) -> (i32, (i64, i64), Budget) {
    match name {
        "lemma61_part1a" | "lemma61_part2a" | "lemma61_part4a" => (1, (1, 1), Budget::Exact),
        "lemma61_part1b" => (2, (3, 1), Budget::Rho),
        "lemma61_part2b" | "lemma61_part4b" => (2, (5, 3), Budget::Rho),
        "lemma61_part3" | "lemma61_part6" => (2, (1, 1), Budget::Rho),
        "lemma61_part5a" => (2, (13, 15), Budget::Sigma),
        "lemma61_part5b" => (2, (7, 5), Budget::Sigma),
        "lemma61_part7" => (2, (-1, 3), Budget::Rho),
        "lemma61_part8" => (2, (1, 3), Budget::Rho),
        _ => (2, (0, 1), Budget::C6),
    }
}

/// One line of the asymptotic comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticRow {
    pub m: u64,
    #[serde(rename = "N")]
    pub n: usize,
    pub entry: String,
    /// Exact value as `p/q`; empty when refused by the cost cap.
    pub exact: String,
    #[serde(serialize_with = "crate::report::sig_opt::serialize")]
    pub value: Option<f64>,
    #[serde(serialize_with = "crate::report::sig::serialize")]
    pub leading: f64,
    #[serde(serialize_with = "crate::report::sig_opt::serialize")]
    pub deviation: Option<f64>,
    pub budget_kind: Budget,
    /// Sum of the budget terms with unit constants; `None` if a needed
    /// census entry is missing.
    #[serde(serialize_with = "crate::report::sig_opt::serialize")]
    pub budget: Option<f64>,
}

pub const ASYMPTOTIC_CSV_HEADER: &str = "m,N,entry,exact,value,leading,deviation,budget_kind,budget";

impl AsymptoticRow {
    pub fn csv_line(&self) -> String {
        use crate::report::fmt_sig;
        let opt = |x: Option<f64>| x.map(fmt_sig).unwrap_or_default();
        let kind = match self.budget_kind {
            Budget::Exact => "exact",
            Budget::Rho => "rho",
            Budget::Sigma => "sigma",
            Budget::C6 => "c6",
        };
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.m,
            self.n,
            self.entry,
            self.exact,
            opt(self.value),
            fmt_sig(self.leading),
            opt(self.deviation),
            kind,
            opt(self.budget)
        )
    }
}

/// Compares each exact entry with its stated leading term. Deviations are
/// reported next to the budget terms evaluated from `census`; nothing is
/// asserted.
pub fn lemma61_asymptotic_check(table: &Lemma61Table, census: &CensusRow) -> Vec<AsymptoticRow> {
    let n = table.n as f64;
    let inv_n3 = n.powi(-3);
    let x4 = census.x4 as f64 / n.powi(4);
    let equid = (table.m as f64).powf(-1.0 / 28.0) / (n * n);
    let c6 = census.c6.map(|c| c as f64 / n.powi(6));
    table
        .entries()
        .into_iter()
        .map(|(name, exact)| {
            let (power, (p, q), kind) = lemma61_leading(name);
            let leading = p as f64 / q as f64 * n.powi(-power);
            let value = exact.map(|v| v.to_f64().unwrap_or(f64::NAN));
            let budget = match kind {
                Budget::Exact => Some(0.0),
                Budget::Rho => Some(inv_n3 + x4),
                Budget::Sigma => Some(equid + x4),
                Budget::C6 => c6,
            };
            AsymptoticRow {
                m: table.m,
                n: table.n,
                entry: name.to_string(),
                exact: exact.map(|v| v.to_string()).unwrap_or_default(),
                value,
                leading,
                deviation: value.map(|v| (v - leading).abs()),
                budget_kind: kind,
                budget,
            }
        })
        .collect()
}
