//! Exact censuses of zero-sum tuples `mu_1 + ... + mu_l = 0` in `E(m)`.
//!
//! Every count is assembled from the pair-sum table `s2`; nothing is
//! approximated. Work estimates are checked against [`CostCaps`] before any
//! expensive loop starts.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::lattice::{LatticePoint, LatticeSet, PairSumTable};
use crate::{Error, Result};

/// Work budgets, in elementary inner-loop steps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostCaps {
    /// Budget for the `C(6)` convolution, `N * |supp s2|`.
    pub c6_work: u128,
    /// Budget for the iterated convolutions behind [`count_cl`].
    pub cl_work: u128,
}

impl Default for CostCaps {
    fn default() -> Self {
        CostCaps { c6_work: 20_000_000_000, cl_work: 20_000_000_000 }
    }
}

/// `|C(2)|`, read off the table as `s2(0)`.
pub fn count_c2(table: &PairSumTable) -> u64 {
    table.get(&LatticePoint::ZERO)
}

/// `|C(4)| = sum_tau s2(tau) s2(-tau) = sum_tau s2(tau)^2`.
pub fn count_c4(table: &PairSumTable) -> u128 {
    table.entries().iter().map(|&(_, c)| (c as u128) * (c as u128)).sum()
}

/// A set of constraints `mu_i = -mu_j` on an `l`-tuple.
type Pairing = Vec<(usize, usize)>;

/// The three ways of splitting four positions into two antipodal pairs.
fn pairings4() -> [Pairing; 3] {
    [vec![(0, 1), (2, 3)], vec![(0, 2), (1, 3)], vec![(0, 3), (1, 2)]]
}

/// Number of `l`-tuples in `E^l` satisfying every `mu_i = -mu_j` in
/// `constraints`.
///
/// The constraints tie positions into classes with a relative sign. A class
/// is free (N choices) unless it forces some `mu = -mu`, which no point with
/// `m > 0` satisfies.
fn count_constrained(len: usize, constraints: &[(usize, usize)], n: u128) -> u128 {
    // parent[i], sign[i]: mu_i = sign[i] * mu_root
    let mut parent: Vec<usize> = (0..len).collect();
    let mut sign = vec![1i8; len];
    fn find(parent: &mut [usize], sign: &mut [i8], i: usize) -> (usize, i8) {
        if parent[i] == i {
            return (i, 1);
        }
        let p = parent[i];
        let (root, s) = find(parent, sign, p);
        parent[i] = root;
        sign[i] *= s;
        (root, sign[i])
    }
    for &(i, j) in constraints {
        let (ri, si) = find(&mut parent, &mut sign, i);
        let (rj, sj) = find(&mut parent, &mut sign, j);
        if ri == rj {
            if si != -sj {
                return 0;
            }
        } else {
            parent[ri] = rj;
            sign[ri] = -si * sj;
        }
    }
    let classes = (0..len).filter(|&i| find(&mut parent, &mut sign, i).0 == i).count();
    n.pow(classes as u32)
}

/// Size of the union of the constraint families, by inclusion-exclusion
/// over all nonempty sub-families.
fn union_count(len: usize, families: &[Pairing], n: u128) -> u128 {
    let mut total: i128 = 0;
    for mask in 1u32..(1 << families.len()) {
        let merged: Pairing = families
            .iter()
            .enumerate()
            .filter(|(k, _)| mask >> k & 1 == 1)
            .flat_map(|(_, f)| f.iter().copied())
            .collect();
        let c = count_constrained(len, &merged, n) as i128;
        if mask.count_ones() % 2 == 1 {
            total += c;
        } else {
            total -= c;
        }
    }
    total as u128
}

/// `(|D(4)|, |D''(4)|)`: 4-correlations cancelling in antipodal pairs, and
/// the diagonal ones lying in at least two pairings at once.
pub fn count_degenerate4(n: usize) -> (u128, u128) {
    let n = n as u128;
    let p = pairings4();
    let sym = union_count(4, &p, n);
    let overlaps: Vec<Pairing> = (0..3)
        .flat_map(|a| (a + 1..3).map(move |b| (a, b)))
        .map(|(a, b)| [p[a].clone(), p[b].clone()].concat())
        .collect();
    let diag = union_count(4, &overlaps, n);
    (sym, diag)
}

/// `|X(4)| = |C(4)| - |D(4)|`.
pub fn count_x4(table: &PairSumTable) -> u128 {
    count_c4(table) - count_degenerate4(table.set_len()).0
}

/// Estimated inner-loop steps of [`count_c6`].
pub fn c6_work(set: &LatticeSet, table: &PairSumTable) -> u128 {
    set.len() as u128 * table.support_len() as u128
}

/// `|C(6)| = sum_tau s3(tau)^2` with `s3 = s2 * 1_E`, built one slab of
/// constant first coordinate at a time.
pub fn count_c6(set: &LatticeSet, table: &PairSumTable, caps: &CostCaps) -> Result<u128> {
    let work = c6_work(set, table);
    if work > caps.c6_work {
        return Err(Error::CostCapExceeded { what: "count_c6", estimate: work, cap: caps.c6_work });
    }
    if set.is_empty() {
        return Ok(0);
    }
    let r = set.radius_bound();
    let w = 3 * r;
    let side = (2 * w + 1) as usize;
    let entries = table.entries();
    // Start of each first-coordinate block in the sorted table.
    let mut blocks: HashMap<i64, (usize, usize)> = HashMap::new();
    for (i, (tau, _)) in entries.iter().enumerate() {
        let e = blocks.entry(tau.0[0]).or_insert((i, i));
        e.1 = i + 1;
    }
    let pts = set.points();
    Ok(crate::par::sum_range_u128(0..side, |k| {
        let t1 = k as i64 - w;
        let mut slab = vec![0u64; side * side];
        for mu in pts {
            let Some(&(lo, hi)) = blocks.get(&(t1 - mu.0[0])) else { continue };
            for (tau, c) in &entries[lo..hi] {
                let a = (tau.0[1] + mu.0[1] + w) as usize;
                let b = (tau.0[2] + mu.0[2] + w) as usize;
                slab[a * side + b] += c;
            }
        }
        slab.iter().map(|&c| (c as u128) * (c as u128)).sum()
    }))
}

/// `|C(6)|` as `sum_{tau1, tau2} s2(tau1) s2(tau2) s2(-tau1 - tau2)` with
/// hash lookups. Quadratic in the table support; used as a cross-check.
pub fn count_c6_double_loop(table: &PairSumTable) -> u128 {
    let entries = table.entries();
    crate::par::sum_range_u128(0..entries.len(), |i| {
        let (t1, c1) = entries[i];
        entries
            .iter()
            .map(|&(t2, c2)| {
                let c3 = table.get(&-(t1 + t2));
                c1 as u128 * c2 as u128 * c3 as u128
            })
            .sum()
    })
}

/// `s_k(tau)`: ordered `k`-tuples with sum `tau`, as a sorted list.
fn convolve_power(set: &LatticeSet, k: usize) -> Vec<(LatticePoint, u128)> {
    let mut cur: Vec<(LatticePoint, u128)> = vec![(LatticePoint::ZERO, 1)];
    for _ in 0..k {
        let mut next: HashMap<LatticePoint, u128> = HashMap::new();
        for &(tau, c) in &cur {
            for mu in set {
                *next.entry(tau + *mu).or_default() += c;
            }
        }
        cur = next.into_iter().collect();
        cur.sort_unstable_by_key(|e| e.0);
    }
    cur
}

/// Upper estimate of [`count_cl`] work: `N * sum_k |supp s_k|`, with
/// `|supp s_k| <= min(N^k, (2k sqrt(m) + 1)^3)`.
pub fn cl_work(set: &LatticeSet, ell: usize) -> u128 {
    let n = set.len() as u128;
    let r = set.radius_bound() as u128;
    (0..ell.div_ceil(2))
        .map(|k| n * n.pow(k as u32).min((2 * k as u128 * r + 1).pow(3)))
        .sum()
}

/// `|C(l)|` for `1 <= l <= 8` by iterated convolution:
/// `sum_tau s_a(tau) s_b(-tau)` with `a = ceil(l/2)`, `b = floor(l/2)`.
pub fn count_cl(set: &LatticeSet, ell: usize, caps: &CostCaps) -> Result<u128> {
    if !(1..=8).contains(&ell) {
        return Err(Error::InvalidArgument(format!("correlation length {ell} outside 1..=8")));
    }
    let work = cl_work(set, ell);
    if work > caps.cl_work {
        return Err(Error::CostCapExceeded { what: "count_cl", estimate: work, cap: caps.cl_work });
    }
    let a = convolve_power(set, ell.div_ceil(2));
    let b = convolve_power(set, ell / 2);
    let b: HashMap<LatticePoint, u128> = b.into_iter().collect();
    Ok(a.iter().map(|(tau, c)| c * b.get(&-*tau).copied().unwrap_or(0)).sum())
}

/// `R(l) = |C(l)| / N^l` as an exact rational.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentR {
    pub ell: usize,
    pub value: BigRational,
}

pub fn moment_r(set: &LatticeSet, ell: usize, caps: &CostCaps) -> Result<MomentR> {
    if set.is_empty() {
        return Err(Error::InvalidArgument(format!("E({}) is empty", set.m())));
    }
    let c = count_cl(set, ell, caps)?;
    let denom = BigInt::from(set.len()).pow(ell as u32);
    Ok(MomentR { ell, value: BigRational::new(BigInt::from(c), denom) })
}

/// `|T|`: pair sums `tau` with `0 < |tau|^2 < 4m` carried by more than two
/// pairs, i.e. circles holding more than two lattice points.
pub fn t_census(table: &PairSumTable) -> u64 {
    let four_m = 4 * table.m() as i64;
    table
        .entries()
        .iter()
        .filter(|(tau, c)| {
            let t2 = tau.norm_sq();
            *c > 2 && t2 > 0 && t2 < four_m
        })
        .count() as u64
}

/// One census row. `c6` is `None` when the cost cap refused it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusRow {
    pub m: u64,
    #[serde(rename = "N")]
    pub n: u64,
    pub c2: u64,
    pub c4: u128,
    pub x4: u128,
    pub d4_sym: u128,
    pub d4_diag: u128,
    pub c6: Option<u128>,
    pub t_size: u64,
    pub admissible: bool,
}

/// Column order of the census CSV.
pub const CENSUS_CSV_HEADER: &str = "m,N,c2,c4,x4,d4_sym,d4_diag,c6,t_size";

impl CensusRow {
    pub fn csv_line(&self) -> String {
        let c6 = self.c6.map(|c| c.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.m, self.n, self.c2, self.c4, self.x4, self.d4_sym, self.d4_diag, c6, self.t_size
        )
    }
}

/// Full census of one energy level; `C(6)` only if within `caps`.
pub fn census(set: &LatticeSet, caps: &CostCaps) -> CensusRow {
    let table = PairSumTable::new(set);
    let (d4_sym, d4_diag) = if set.is_empty() { (0, 0) } else { count_degenerate4(set.len()) };
    let c4 = count_c4(&table);
    CensusRow {
        m: set.m(),
        n: set.len() as u64,
        c2: count_c2(&table),
        c4,
        x4: c4 - d4_sym,
        d4_sym,
        d4_diag,
        c6: count_c6(set, &table, caps).ok(),
        t_size: t_census(&table),
        admissible: crate::lattice::is_admissible(set.m()),
    }
}

/// Least-squares slope of `log y` against `log x`; `None` with fewer than
/// two distinct abscissae.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let k = pts.len() as f64;
    if pts.len() < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Census rows over a range of energies with fitted growth exponents.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExponentMonitor {
    pub rows: Vec<CensusRow>,
    /// Fitted exponent of `|X(4)|` against `N`; compare with 7/4.
    pub slope_x4: Option<f64>,
    /// Fitted exponent of `|C(6)|` against `N`; compare with 11/3.
    pub slope_c6: Option<f64>,
    /// Fitted exponent of `|T|` against `N`; compare with 7/4.
    pub slope_t: Option<f64>,
}

pub const X4_REFERENCE_EXPONENT: f64 = 7.0 / 4.0;
pub const C6_REFERENCE_EXPONENT: f64 = 11.0 / 3.0;

pub fn exponent_monitor(rows: Vec<CensusRow>) -> ExponentMonitor {
    let fit = |f: &dyn Fn(&CensusRow) -> Option<f64>| {
        let pts: Vec<(f64, f64)> = rows.iter().filter_map(|r| Some((r.n as f64, f(r)?))).collect();
        loglog_slope(&pts)
    };
    let slope_x4 = fit(&|r| Some(r.x4 as f64));
    let slope_c6 = fit(&|r| r.c6.map(|c| c as f64));
    let slope_t = fit(&|r| Some(r.t_size as f64));
    ExponentMonitor { rows, slope_x4, slope_c6, slope_t }
}
