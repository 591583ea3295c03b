//! Low-order expansions of the Berry expectation and of `K2`.

use std::f64::consts::PI;

use nalgebra::Matrix3;

use super::{berry_expectation, ConditionedCovariance};
use crate::quadrature::QuadConfig;
use crate::{Error, Result};

/// Trace invariants of `(r, X, Y)` entering the expansions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceInvariants {
    pub r: f64,
    pub tr_x: f64,
    pub tr_x2: f64,
    pub tr_x3: f64,
    pub tr_y2: f64,
    pub tr_xy2: f64,
    pub tr_y4: f64,
    pub tr_y6: f64,
}

impl TraceInvariants {
    pub fn new(r: f64, x: &Matrix3<f64>, y: &Matrix3<f64>) -> Self {
        let x2 = x * x;
        let y2 = y * y;
        let y4 = y2 * y2;
        TraceInvariants {
            r,
            tr_x: x.trace(),
            tr_x2: x2.trace(),
            tr_x3: (x2 * x).trace(),
            tr_y2: y2.trace(),
            tr_xy2: (x * y2).trace(),
            tr_y4: y4.trace(),
            tr_y6: (y4 * y2).trace(),
        }
    }
}

/// Fourth-order Taylor polynomial of `E[|w1| |w2|]` in `(X, Y)` for rank-1
/// `X`.
pub fn lemma51_taylor(x: &Matrix3<f64>, y: &Matrix3<f64>) -> f64 {
    let t = TraceInvariants::new(0.0, x, y);
    8.0 / PI
        * (1.0 + t.tr_x / 3.0 + t.tr_y2 / 18.0 - t.tr_xy2 / 45.0 - t.tr_x2 / 45.0
            + t.tr_y4 / 900.0
            + t.tr_y2 * t.tr_y2 / 1800.0
            - t.tr_x * t.tr_y2 / 90.0)
}

/// Second-order part `L2` of `K2 - 4/pi^2`.
pub fn l2(t: &TraceInvariants) -> f64 {
    let r2 = t.r * t.r;
    4.0 / (PI * PI)
        * (0.5 * r2 + t.tr_x / 3.0 + t.tr_y2 / 18.0 + 0.375 * r2 * r2
            - t.tr_xy2 / 45.0
            - t.tr_x2 / 45.0
            + t.tr_y4 / 900.0
            + t.tr_y2 * t.tr_y2 / 1800.0
            - t.tr_x * t.tr_y2 / 90.0
            + r2 * t.tr_x / 6.0
            + r2 * t.tr_y2 / 36.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TaylorComparison {
    pub berry: f64,
    pub taylor: f64,
    pub difference: f64,
}

/// Berry integral against its Taylor polynomial. `X` must have rank at most
/// one and `Omega` must be positive definite.
pub fn taylor_vs_berry(x: &Matrix3<f64>, y: &Matrix3<f64>, cfg: &QuadConfig) -> Result<TaylorComparison> {
    let sv = x.svd(false, false).singular_values;
    let mut s: Vec<f64> = sv.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    if s[1] > 1e-10 * s[0].max(f64::MIN_POSITIVE) {
        return Err(Error::InvalidArgument("X must have rank at most one".into()));
    }
    let berry = berry_expectation(&ConditionedCovariance::from_xy(*x, *y), cfg)?;
    let taylor = lemma51_taylor(x, y);
    Ok(TaylorComparison { berry, taylor, difference: berry - taylor })
}

/// `1 - tr P / 2 + tr(P^2) / 4 + (tr P)^2 / 8`, the second-order expansion
/// of `det(I + P)^(-1/2)`.
pub fn det_inv_sqrt_second_order(p: &Matrix3<f64>) -> f64 {
    let tr = p.trace();
    1.0 - tr / 2.0 + (p * p).trace() / 4.0 + tr * tr / 8.0
}

#[cfg(test)]
mod tests {
    use super::super::{default_berry_config, k2_from_jet, CovarianceJet};
    use super::*;
    use nalgebra::Vector3;

    /// Small deterministic generator for test matrices.
    struct Lcg(u64);
    impl Lcg {
        fn next(&mut self) -> f64 {
            self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((self.0 >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        }
        fn sym(&mut self) -> Matrix3<f64> {
            let a = Matrix3::from_fn(|_, _| self.next());
            let s = (a + a.transpose()) / 2.0;
            s / s.norm()
        }
        fn rank1(&mut self) -> Matrix3<f64> {
            let v = Vector3::new(self.next(), self.next(), self.next()).normalize();
            -v * v.transpose()
        }
    }

    #[test]
    fn zero_inputs() {
        let z = Matrix3::zeros();
        assert!((lemma51_taylor(&z, &z) - 8.0 / PI).abs() < 1e-15);
        let c = taylor_vs_berry(&z, &z, &default_berry_config()).unwrap();
        assert!(c.difference.abs() < 1e-9);
        assert_eq!(l2(&TraceInvariants::new(0.0, &z, &z)), 0.0);
        let rho: f64 = 0.3;
        let want = 4.0 / (PI * PI) * (rho * rho / 2.0 + 3.0 * rho.powi(4) / 8.0);
        assert!((l2(&TraceInvariants::new(rho, &z, &z)) - want).abs() < 1e-15);
    }

    #[test]
    fn isotropic_y() {
        let cfg = default_berry_config();
        for e in [0.1, 0.05, 0.025] {
            let y = e * Matrix3::identity();
            let taylor = lemma51_taylor(&Matrix3::zeros(), &y);
            let e2: f64 = e * e;
            let want = 8.0 / PI * (1.0 + e2 / 6.0 + e2 * e2 * (3.0 / 900.0 + 9.0 / 1800.0));
            assert!((taylor - want).abs() < 1e-15);
            let c = taylor_vs_berry(&Matrix3::zeros(), &y, &cfg).unwrap();
            assert!(c.difference.abs() < 20.0 * e.powi(6) + 2e-9, "{e}: {}", c.difference);
        }
    }

    #[test]
    fn cubic_remainder() {
        let cfg = default_berry_config();
        let mut g = Lcg(7);
        let mut sq = [0.0; 3];
        for _ in 0..5 {
            let (x, y) = (g.rank1(), g.sym());
            for (k, e) in [0.2, 0.1, 0.05].iter().enumerate() {
                let d = taylor_vs_berry(&(*e * x), &(*e * y), &cfg).unwrap().difference;
                sq[k] += d * d;
            }
        }
        for w in sq.windows(2) {
            let ratio = (w[0] / w[1]).sqrt();
            assert!((6.0..=10.0).contains(&ratio), "{sq:?}");
        }
    }

    #[test]
    fn rejects_rank_two() {
        let x = Matrix3::from_diagonal(&Vector3::new(-0.1, -0.1, 0.0));
        assert!(taylor_vs_berry(&x, &Matrix3::zeros(), &default_berry_config()).is_err());
    }

    #[test]
    fn k2_minus_l2_is_third_order() {
        let cfg = default_berry_config();
        let mut g = Lcg(19);
        for _ in 0..3 {
            let (x0, y0, r0) = (g.rank1(), g.sym(), 0.5 * g.next());
            let rem: Vec<f64> = [0.2, 0.1, 0.05]
                .iter()
                .map(|&e| {
                    let (x, y, r) = (e * x0, e * y0, e * r0);
                    let cc = ConditionedCovariance::from_xy(x, y);
                    let b = berry_expectation(&cc, &cfg).unwrap();
                    let k2 = b / (2.0 * PI * (1.0 - r * r).sqrt());
                    k2 - 4.0 / (PI * PI) - l2(&TraceInvariants::new(r, &x, &y))
                })
                .collect();
            let ratio = rem[1] / rem[2];
            assert!((5.0..=11.0).contains(&ratio), "{rem:?}");
        }
        // The jet route agrees with the direct formula at a zero jet.
        let k = k2_from_jet(&CovarianceJet::zero([0.3; 3]), 1.0, 0.0, &cfg).unwrap();
        assert!((k - 4.0 / (PI * PI)).abs() < 1e-9);
    }

    #[test]
    fn det_expansion_is_second_order() {
        let mut g = Lcg(3);
        for _ in 0..10 {
            let a = Matrix3::from_fn(|_, _| g.next());
            let p0 = a / a.norm();
            let err = |e: f64| {
                let p = e * p0;
                let exact = (Matrix3::identity() + p).determinant().powf(-0.5);
                (exact - det_inv_sqrt_second_order(&p)).abs()
            };
            let (e1, e2) = (err(0.02), err(0.01));
            assert!(e1 < 1e-4);
            assert!(e1 / e2 > 6.0, "{e1} {e2}");
        }
    }
}
