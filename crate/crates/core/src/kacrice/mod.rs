//! Pointwise two-point function of the nodal area and its torus integral.
//!
//! The covariance `r(x) = E[F(y) F(x + y)]` and its first two derivatives
//! feed the Gaussian conditioning that defines the matrices `X`, `Y` and
//! `Omega`; the two-point function `K2` is a Berry-type double integral of
//! determinants built from them.

mod berry;
mod expansion;
mod singular;
mod variance;
mod videntity;

use std::f64::consts::PI;

use nalgebra::{Matrix3, Matrix6, Vector3};

use crate::lattice::LatticeSet;
use crate::{Error, Result};

pub use berry::{berry_bracket, berry_bracket_dense, berry_expectation, default_berry_config};
pub use expansion::{
    det_inv_sqrt_second_order, l2, lemma51_taylor, taylor_vs_berry, TaylorComparison, TraceInvariants,
};
pub use singular::{ewald_z, singular_points, SingularPoint};
pub use variance::{
    default_grid_n, variance_quadrature, SingularPolicy, VarianceConfig, VarianceQuadrature, VarianceReport,
    QUADRATURE_CSV_HEADER, VARIANCE_CSV_HEADER,
};
pub use videntity::{v_identity_check, v_integral_exact, VCheck};

/// Default near-singular threshold: points with `|r| >= 1 - 1/48` are
/// treated as singular.
pub const DEFAULT_EPS_SING: f64 = 1.0 / 48.0;

/// `E = 4 pi^2 m`, the Laplace eigenvalue.
pub fn energy(m: u64) -> f64 {
    4.0 * PI * PI * m as f64
}

/// `r`, `D = grad r` and `H = Hess r` at a torus point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CovarianceJet {
    pub x: [f64; 3],
    pub r: f64,
    pub d: Vector3<f64>,
    pub h: Matrix3<f64>,
}

impl CovarianceJet {
    pub fn zero(x: [f64; 3]) -> Self {
        CovarianceJet { x, r: 0.0, d: Vector3::zeros(), h: Matrix3::zeros() }
    }
}

/// Evaluates covariance jets for one lattice set. Terms for `mu` and `-mu`
/// are equal in every component, so only a half set is summed.
#[derive(Clone, Debug)]
pub struct JetEvaluator {
    m: u64,
    n: usize,
    half: Vec<Vector3<f64>>,
}

impl JetEvaluator {
    pub fn new(set: &LatticeSet) -> Self {
        let half = set.half_set().iter().map(|p| Vector3::from(p.as_f64())).collect();
        JetEvaluator { m: set.m(), n: set.len(), half }
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn set_len(&self) -> usize {
        self.n
    }

    pub fn jet(&self, x: [f64; 3]) -> CovarianceJet {
        let xv = Vector3::from(x);
        let (mut r, mut d, mut h) = (0.0, Vector3::zeros(), Matrix3::zeros());
        for mu in &self.half {
            let phase = mu.dot(&xv);
            let (s, c) = (2.0 * PI * (phase - phase.round())).sin_cos();
            r += c;
            d += s * mu;
            h += c * mu * mu.transpose();
        }
        let scale = 2.0 / self.n as f64;
        CovarianceJet { x, r: scale * r, d: -2.0 * PI * scale * d, h: -4.0 * PI * PI * scale * h }
    }

    /// `r(x)` alone.
    pub fn r(&self, x: [f64; 3]) -> f64 {
        let xv = Vector3::from(x);
        let sum: f64 = self
            .half
            .iter()
            .map(|mu| {
                let phase = mu.dot(&xv);
                (2.0 * PI * (phase - phase.round())).cos()
            })
            .sum();
        2.0 * sum / self.n as f64
    }
}

/// One-off jet evaluation; use [`JetEvaluator`] in loops.
pub fn covariance_jet(set: &LatticeSet, x: [f64; 3]) -> CovarianceJet {
    JetEvaluator::new(set).jet(x)
}

/// The conditioned matrices `X`, `Y` and `Omega = I6 + [[X, Y], [Y, X]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditionedCovariance {
    pub x: Matrix3<f64>,
    pub y: Matrix3<f64>,
    pub omega: Matrix6<f64>,
}

impl ConditionedCovariance {
    pub fn from_xy(x: Matrix3<f64>, y: Matrix3<f64>) -> Self {
        let mut omega = Matrix6::identity();
        for i in 0..3 {
            for j in 0..3 {
                omega[(i, j)] += x[(i, j)];
                omega[(i + 3, j + 3)] += x[(i, j)];
                omega[(i, j + 3)] = y[(i, j)];
                omega[(i + 3, j)] = y[(i, j)];
            }
        }
        ConditionedCovariance { x, y, omega }
    }

    pub fn is_positive_definite(&self) -> bool {
        self.omega.cholesky().is_some()
    }
}

/// `X = -(3/E) D^t D / (1 - r^2)`, `Y = -(3/E) (H + r/(1 - r^2) D^t D)`.
///
/// Refuses points with `|r| >= 1 - eps_sing`.
pub fn conditioned_covariance(jet: &CovarianceJet, e: f64, eps_sing: f64) -> Result<ConditionedCovariance> {
    if jet.r.abs() >= 1.0 - eps_sing {
        return Err(Error::NearSingular { abs_r: jet.r.abs(), eps: eps_sing });
    }
    let one_minus = 1.0 - jet.r * jet.r;
    let dd = jet.d * jet.d.transpose();
    let x = -(3.0 / e) * dd / one_minus;
    let y = -(3.0 / e) * (jet.h + (jet.r / one_minus) * dd);
    Ok(ConditionedCovariance::from_xy(x, y))
}

/// `K2` from a jet: `E[|w1| |w2|] / (2 pi sqrt(1 - r^2))`.
pub fn k2_from_jet(jet: &CovarianceJet, e: f64, eps_sing: f64, cfg: &crate::quadrature::QuadConfig) -> Result<f64> {
    let cc = conditioned_covariance(jet, e, eps_sing)?;
    let b = berry_expectation(&cc, cfg).map_err(|err| match err {
        Error::QuadratureNonConvergence { residual, .. } if residual.is_nan() => Error::NonFiniteIntegrand { x: jet.x },
        other => other,
    })?;
    Ok(b / (2.0 * PI * (1.0 - jet.r * jet.r).sqrt()))
}

/// Two-point function `K2(x)` of the nodal area.
pub fn k2(set: &LatticeSet, x: [f64; 3], eps_sing: f64) -> Result<f64> {
    let jet = covariance_jet(set, x);
    k2_from_jet(&jet, energy(set.m()), eps_sing, &default_berry_config())
}

/// `(32/375) m / N^2`.
pub fn variance_leading(m: u64, n: usize) -> f64 {
    32.0 / 375.0 * m as f64 / (n as f64 * n as f64)
}

/// Expected nodal area `(4/sqrt 3) sqrt m`.
pub fn expected_area(m: u64) -> f64 {
    4.0 / 3f64.sqrt() * (m as f64).sqrt()
}

/// `I_d = sqrt(4 pi / d) Gamma((d+1)/2) / Gamma(d/2)`, the expected nodal
/// volume of a unit-energy wave in dimension `d`.
pub fn nodal_constant(d: u32) -> f64 {
    let d = d as f64;
    (4.0 * PI / d).sqrt() * libm::tgamma((d + 1.0) / 2.0) / libm::tgamma(d / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::enumerate;

    fn rand_points(k: usize, seed: u64) -> Vec<[f64; 3]> {
        // Weyl sequence; deterministic and well spread.
        let a = [0.754_877_666_246_692_7, 0.569_840_290_998_053_3, 0.362_491_892_301_459_3];
        (0..k)
            .map(|i| {
                let t = (i as u64 + 1 + seed) as f64;
                a.map(|c| (c * t).fract())
            })
            .collect()
    }

    #[test]
    fn jet_at_origin_and_antipode() {
        for m in [1, 3, 5, 11] {
            let j = covariance_jet(&enumerate(m), [0.0; 3]);
            assert!((j.r - 1.0).abs() < 1e-15);
            assert!(j.d.norm() < 1e-12);
            assert!((j.h.trace() + energy(m)).abs() < 1e-9);
        }
        let j = covariance_jet(&enumerate(3), [0.5; 3]);
        assert_eq!(j.r, -1.0);
    }

    #[test]
    fn jet_parity_and_finite_differences() {
        let set = enumerate(11);
        let ev = JetEvaluator::new(&set);
        for x in rand_points(20, 3) {
            let a = ev.jet(x);
            let b = ev.jet(x.map(|c| -c));
            assert!((a.r - b.r).abs() < 1e-12);
            assert!((a.d + b.d).norm() < 1e-9);
            assert!((a.h - b.h).norm() < 1e-8);
            let mut errs = Vec::new();
            for h in [1e-3, 5e-4] {
                let mut err: f64 = 0.0;
                for k in 0..3 {
                    let mut p = x;
                    let mut q = x;
                    p[k] += h;
                    q[k] -= h;
                    let (jp, jq) = (ev.jet(p), ev.jet(q));
                    err = err.max(((jp.r - jq.r) / (2.0 * h) - a.d[k]).abs() / energy(11).sqrt());
                    err = err.max(((jp.d - jq.d) / (2.0 * h) - a.h.column(k)).norm() / energy(11));
                }
                errs.push(err);
            }
            assert!(errs[0] < 1e-3);
            // Central differences: halving h divides the error by about 4.
            assert!(errs[1] < errs[0] / 3.0, "{errs:?}");
        }
    }

    #[test]
    fn conditioned_matrices() {
        let z = CovarianceJet::zero([0.1; 3]);
        let cc = conditioned_covariance(&z, 1.0, DEFAULT_EPS_SING).unwrap();
        assert_eq!(cc.omega, Matrix6::identity());
        let set = enumerate(5);
        let e = energy(5);
        assert!(matches!(
            conditioned_covariance(&covariance_jet(&set, [0.0; 3]), e, DEFAULT_EPS_SING),
            Err(Error::NearSingular { .. })
        ));
        for x in rand_points(20, 7) {
            let jet = covariance_jet(&set, x);
            let Ok(cc) = conditioned_covariance(&jet, e, DEFAULT_EPS_SING) else { continue };
            let sv = cc.x.svd(false, false).singular_values;
            let mut s: Vec<f64> = sv.iter().copied().collect();
            s.sort_by(|a, b| b.total_cmp(a));
            assert!(s[1] <= 1e-12 * s[0].max(1e-300));
            assert!(cc.x.trace() <= 0.0);
            assert!(cc.is_positive_definite());
            assert_eq!(cc.omega, cc.omega.transpose());
        }
    }

    #[test]
    fn k2_constants_and_symmetry() {
        let z = CovarianceJet::zero([0.2; 3]);
        let k = k2_from_jet(&z, 1.0, DEFAULT_EPS_SING, &default_berry_config()).unwrap();
        assert!((k - 4.0 / (PI * PI)).abs() < 1e-8);
        let set = enumerate(5);
        for x in rand_points(5, 11) {
            let (Ok(a), Ok(b)) = (k2(&set, x, DEFAULT_EPS_SING), k2(&set, x.map(|c| -c), DEFAULT_EPS_SING)) else {
                continue;
            };
            assert!((a - b).abs() < 1e-9);
            assert!(a >= 0.0);
        }
    }

    #[test]
    fn closed_forms() {
        assert!((variance_leading(3, 8) - 0.004).abs() < 1e-18);
        assert!((variance_leading(5, 24) - 32.0 / 375.0 * 5.0 / 576.0).abs() < 1e-18);
        assert!((expected_area(3) - 4.0).abs() < 1e-14);
        assert!((nodal_constant(3) - 4.0 / 3f64.sqrt()).abs() < 1e-14);
        assert!((nodal_constant(1) - 2.0).abs() < 1e-14);
        assert!((nodal_constant(3) * 7f64.sqrt() - expected_area(7)).abs() < 1e-13);
    }
}
