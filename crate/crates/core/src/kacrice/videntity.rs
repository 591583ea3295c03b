//! The combination `v = r^2 - (2/E) D D^t + tr(H^2) / E^2`, which also
//! equals `(1/N^2) sum_{mu1, mu2} cos(2 pi (mu1 + mu2) . x) ((m + mu1 . mu2) / m)^2`.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::{energy, JetEvaluator};
use crate::lattice::LatticeSet;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub difference: f64,
}

/// Evaluates `v(x)` from the jet and from the double sum.
pub fn v_identity_check(set: &LatticeSet, x: [f64; 3]) -> VCheck {
    let jet = JetEvaluator::new(set).jet(x);
    let e = energy(set.m());
    let lhs = jet.r * jet.r - 2.0 / e * jet.d.norm_squared() + (jet.h * jet.h).trace() / (e * e);
    let m = set.m() as f64;
    let pts = set.points();
    let rows = crate::par::map_slice(pts, |a| {
        let terms: Vec<f64> = pts
            .iter()
            .map(|b| {
                let s = *a + *b;
                let phase = s.as_f64().iter().zip(x).map(|(c, xi)| c * xi).sum::<f64>();
                let w = (m + a.dot(b) as f64) / m;
                (2.0 * PI * (phase - phase.round())).cos() * w * w
            })
            .collect();
        crate::par::ordered_sum(&terms)
    });
    let n = set.len() as f64;
    let rhs = crate::par::ordered_sum(&rows) / (n * n);
    VCheck { lhs, rhs, difference: lhs - rhs }
}

/// `int v dx` as the exact sum over 2-correlations `mu2 = -mu1`, where
/// every weight `(m + mu1 . mu2)^2` vanishes.
pub fn v_integral_exact(set: &LatticeSet) -> BigRational {
    let m = BigInt::from(set.m());
    let mut num = BigInt::from(0);
    for a in set {
        let b = -*a;
        let w = &m + BigInt::from(a.dot(&b));
        num += &w * &w;
    }
    let n = BigInt::from(set.len().max(1));
    BigRational::new(num, &m * &m * &n * &n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::enumerate;
    use num_traits::Zero;

    #[test]
    fn origin_value() {
        for m in [3, 5, 11] {
            let c = v_identity_check(&enumerate(m), [0.0; 3]);
            assert!((c.lhs - 4.0 / 3.0).abs() < 1e-12);
            assert!(c.difference.abs() < 1e-12);
        }
    }

    #[test]
    fn random_points_agree() {
        for m in [3, 5, 11, 50] {
            let set = enumerate(m);
            for k in 0..10 {
                let x = [0.13 * k as f64 + 0.01, 0.377 * k as f64, 0.61 * k as f64 + 0.2].map(|c: f64| c.fract());
                let c = v_identity_check(&set, x);
                assert!(c.difference.abs() < 1e-9, "m={m} x={x:?} {c:?}");
            }
        }
    }

    #[test]
    fn integral_vanishes() {
        for m in [1, 3, 5, 11, 50, 101] {
            assert!(v_integral_exact(&enumerate(m)).is_zero());
        }
    }
}
