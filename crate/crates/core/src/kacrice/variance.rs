//! Torus quadrature of `(E/3) int (K2(x) - 4/pi^2) dx`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{
    default_berry_config, energy, ewald_z, k2_from_jet, singular_points, variance_leading, JetEvaluator,
    DEFAULT_EPS_SING,
};
use crate::lattice::LatticeSet;
use crate::quadrature::{symmetric_grid, QuadConfig};
use crate::{Error, Result};

/// Treatment of grid nodes close to points where `|r| = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SingularPolicy {
    /// Evaluate `K2` at every node and correct the midpoint rule for the
    /// `1/|x - x0|` behaviour at each exact singular point `x0`.
    Evaluate,
    /// Skip nodes with `|r| >= 1 - eps_sing` and report a bias bound for
    /// the skipped volume.
    Exclude,
}

#[derive(Clone, Copy, Debug)]
pub struct VarianceConfig {
    /// Points per axis; `None` selects [`default_grid_n`].
    pub grid_n: Option<usize>,
    pub eps_sing: f64,
    pub policy: SingularPolicy,
    pub berry: QuadConfig,
}

impl Default for VarianceConfig {
    fn default() -> Self {
        VarianceConfig {
            grid_n: None,
            eps_sing: DEFAULT_EPS_SING,
            policy: SingularPolicy::Evaluate,
            berry: default_berry_config(),
        }
    }
}

/// `max(32, 4 ceil(sqrt m))`.
pub fn default_grid_n(m: u64) -> usize {
    let s = crate::lattice::isqrt(m);
    let ceil = if s * s == m { s } else { s + 1 };
    32.max(4 * ceil as usize)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceQuadrature {
    pub m: u64,
    #[serde(rename = "N")]
    pub n: usize,
    pub grid_n: usize,
    /// Variance estimate including the singular correction.
    #[serde(serialize_with = "crate::report::sig::serialize")]
    pub value: f64,
    /// Fraction of nodes with `|r| >= 1 - eps_sing`.
    #[serde(serialize_with = "crate::report::sig::serialize")]
    pub excluded_fraction: f64,
    /// Bound on the contribution of skipped nodes (zero when nothing is
    /// skipped).
    #[serde(serialize_with = "crate::report::sig::serialize")]
    pub exclusion_bias_bound: f64,
    /// Midpoint-rule correction added for exact singular points.
    #[serde(serialize_with = "crate::report::sig::serialize")]
    pub singular_correction: f64,
    pub singular_points: usize,
    pub policy: SingularPolicy,
}

/// Kac-Rice variance of the nodal area by a cell-centred midpoint rule on
/// an `n^3` grid, evaluated on orbit representatives of the signed
/// permutation group.
pub fn variance_quadrature(set: &LatticeSet, cfg: &VarianceConfig) -> Result<VarianceQuadrature> {
    if set.is_empty() {
        return Err(Error::InvalidArgument(format!("E({}) is empty", set.m())));
    }
    let m = set.m();
    let n = cfg.grid_n.unwrap_or_else(|| default_grid_n(m));
    if n < 16 {
        return Err(Error::InvalidArgument(format!("grid resolution {n} below 16")));
    }
    let e = energy(m);
    let h = 1.0 / n as f64;
    let ev = JetEvaluator::new(set);
    let nodes = symmetric_grid(n);
    let background = 4.0 / (PI * PI);

    // Per node: (weighted K2 - 4/pi^2, near-singular weight, bias bound).
    let per_node = crate::par::map_slice(&nodes, |node| -> Result<(f64, u64, f64)> {
        let x = node.point(n);
        let jet = ev.jet(x);
        let w = node.weight as f64;
        let near = jet.r.abs() >= 1.0 - cfg.eps_sing;
        if near && cfg.policy == SingularPolicy::Exclude {
            let one_minus = (1.0 - jet.r * jet.r).max(0.0);
            let bound = (3.0 / (2.0 * PI * one_minus.sqrt())).max(background);
            return Ok((0.0, node.weight, w * bound * h * h * h * e / 3.0));
        }
        if jet.r.abs() >= 1.0 {
            return Err(Error::NodeOnSingularPoint(x));
        }
        let k = k2_from_jet(&jet, e, 0.0, &cfg.berry)?;
        Ok((w * (k - background), if near { node.weight } else { 0 }, 0.0))
    });
    let mut values = Vec::with_capacity(per_node.len());
    let mut near_weight = 0u64;
    let mut bias = Vec::new();
    for item in per_node {
        let (v, nw, b) = item?;
        values.push(v);
        near_weight += nw;
        bias.push(b);
    }
    let total = (n * n * n) as f64;
    let excluded_fraction = near_weight as f64 / total;
    if excluded_fraction > 0.5 {
        return Err(Error::ExcessiveExclusion { fraction: excluded_fraction });
    }
    let raw = e / 3.0 * crate::par::ordered_sum(&values) / total;

    let (singular_correction, count) = match cfg.policy {
        SingularPolicy::Exclude => (0.0, 0),
        SingularPolicy::Evaluate => {
            let pts = singular_points(set);
            let mut corr = Vec::with_capacity(pts.len());
            for p in &pts {
                // Offset of the grid from x0 in cell units: 1/2 - n x0 mod 1,
                // exactly in rationals.
                let q = p.denom;
                let delta = p.numer.map(|k| (q - 2 * n as i64 * k).rem_euclid(2 * q) as f64 / (2 * q) as f64);
                let z = ewald_z(delta).ok_or(Error::NodeOnSingularPoint(p.coords()))?;
                corr.push(-(e / 3.0).sqrt() / PI * h * h * z);
            }
            (crate::par::ordered_sum(&corr), pts.len())
        }
    };

    Ok(VarianceQuadrature {
        m,
        n: set.len(),
        grid_n: n,
        value: raw + singular_correction,
        excluded_fraction,
        exclusion_bias_bound: crate::par::ordered_sum(&bias),
        singular_correction,
        singular_points: count,
        policy: cfg.policy,
    })
}

/// One row of a variance sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    pub m: u64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(serialize_with = "crate::report::sig::serialize")]
    pub var_quadrature: f64,
    #[serde(serialize_with = "crate::report::sig::serialize")]
    pub var_leading: f64,
    #[serde(serialize_with = "crate::report::sig_opt::serialize")]
    pub var_montecarlo: Option<f64>,
    #[serde(serialize_with = "crate::report::sig_opt::serialize")]
    pub mc_stderr: Option<f64>,
    #[serde(serialize_with = "crate::report::sig::serialize")]
    pub excluded_fraction: f64,
    pub grid_n: usize,
}

pub const VARIANCE_CSV_HEADER: &str =
    "m,N,var_quadrature,var_leading,var_montecarlo,mc_stderr,excluded_fraction,grid_n";

/// Column order of the quadrature CSV.
pub const QUADRATURE_CSV_HEADER: &str =
    "m,N,grid_n,value,excluded_fraction,exclusion_bias_bound,singular_correction,singular_points,policy";

impl VarianceQuadrature {
    pub fn csv_line(&self) -> String {
        use crate::report::fmt_sig;
        let policy = match self.policy {
            SingularPolicy::Evaluate => "evaluate",
            SingularPolicy::Exclude => "exclude",
        };
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.m,
            self.n,
            self.grid_n,
            fmt_sig(self.value),
            fmt_sig(self.excluded_fraction),
            fmt_sig(self.exclusion_bias_bound),
            fmt_sig(self.singular_correction),
            self.singular_points,
            policy
        )
    }
}

impl VarianceReport {
    pub fn new(q: &VarianceQuadrature) -> Self {
        VarianceReport {
            m: q.m,
            n: q.n,
            var_quadrature: q.value,
            var_leading: variance_leading(q.m, q.n),
            var_montecarlo: None,
            mc_stderr: None,
            excluded_fraction: q.excluded_fraction,
            grid_n: q.grid_n,
        }
    }

    /// `var_quadrature * N^2 / m`, to be compared with 32/375.
    pub fn normalized(&self) -> f64 {
        self.var_quadrature * (self.n * self.n) as f64 / self.m as f64
    }

    pub fn csv_line(&self) -> String {
        use crate::report::fmt_sig;
        let opt = |x: Option<f64>| x.map(fmt_sig).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{}",
            self.m,
            self.n,
            fmt_sig(self.var_quadrature),
            fmt_sig(self.var_leading),
            opt(self.var_montecarlo),
            opt(self.mc_stderr),
            fmt_sig(self.excluded_fraction),
            self.grid_n
        )
    }
}
