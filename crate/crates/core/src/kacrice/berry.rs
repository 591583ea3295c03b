//! `E[|w1| |w2|]` for a centred Gaussian `(w1, w2)` in `R^3 x R^3` with
//! covariance `Omega`.
//!
//! With `f(t, s) = det(I6 + diag(sqrt t, sqrt s) Omega diag(sqrt t, sqrt s))^(-1/2)`
//! the expectation equals
//!
//! ```text
//! (1 / 2 pi) int_0^inf int_0^inf [f(0,0) - f(t,0) - f(0,s) + f(t,s)] (ts)^(-3/2) dt ds.
//! ```
//!
//! The substitution `t = (u / (1 - u))^2` maps the quadrant to the unit
//! square with `t^(-3/2) dt = 2 du / u^2`, leaving a bounded smooth
//! integrand.
//!
//! Near the axes the bracket is `O(ts)` and four determinants of size one
//! would cancel to nothing, so it is evaluated in the factored form
//! `(1 - f_t)(1 - f_s) + f_t f_s (q - 1)` with
//! `q = det(I3 - K)^(-1/2)`, `K = ts A_s^-1 Y A_t^-1 Y`, `A_t = I3 + t (I3 + X)`,
//! each piece through `ln_1p`/`expm1` and exact characteristic
//! coefficients.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Matrix6};

use super::ConditionedCovariance;
use crate::quadrature::{integrate, QuadConfig};
use crate::{Error, Result};

/// Tolerance used for Berry integrals unless a caller overrides it.
pub fn default_berry_config() -> QuadConfig {
    QuadConfig { abs_tol: 1e-9, rel_tol: 1e-12, max_intervals: 200 }
}

/// Coefficients `(c1, c2, c3)` of `det(I + A) = 1 + c1 + c2 + c3`.
fn char_coeffs(a: &Matrix3<f64>) -> [f64; 3] {
    let tr = a.trace();
    let tr2 = (a * a).trace();
    [tr, 0.5 * (tr * tr - tr2), a.determinant()]
}

/// `f(t, 0)` and `1 - f(t, 0)` from the coefficients of `B = I3 + X`.
fn marginal(c: &[f64; 3], t: f64) -> (f64, f64) {
    let log_det = (t * (c[0] + t * (c[1] + t * c[2]))).ln_1p();
    let e = (-0.5 * log_det).exp_m1();
    (1.0 + e, -e)
}

struct Prepared {
    b: Matrix3<f64>,
    coeffs: [f64; 3],
    y: Matrix3<f64>,
}

impl Prepared {
    fn new(cc: &ConditionedCovariance) -> Self {
        let b = Matrix3::identity() + cc.x;
        Prepared { b, coeffs: char_coeffs(&b), y: cc.y }
    }

    /// `(f(t,0), 1 - f(t,0), t A_t^-1 Y)`.
    fn side(&self, t: f64) -> (f64, f64, Matrix3<f64>) {
        let (f, omf) = marginal(&self.coeffs, t);
        let a = Matrix3::identity() + t * self.b;
        let inv = a.try_inverse().unwrap_or_else(|| Matrix3::from_element(f64::NAN));
        (f, omf, t * inv * self.y)
    }

    fn bracket(&self, t_side: &(f64, f64, Matrix3<f64>), s_side: &(f64, f64, Matrix3<f64>)) -> f64 {
        let k = s_side.2 * t_side.2;
        let [c1, c2, c3] = char_coeffs(&k);
        let delta = -c1 + c2 - c3;
        let q_minus_1 = (-0.5 * delta.ln_1p()).exp_m1();
        t_side.1 * s_side.1 + t_side.0 * s_side.0 * q_minus_1
    }
}

/// `f(0,0) - f(t,0) - f(0,s) + f(t,s)` in the factored form.
pub fn berry_bracket(cc: &ConditionedCovariance, t: f64, s: f64) -> f64 {
    let p = Prepared::new(cc);
    p.bracket(&p.side(t), &p.side(s))
}

/// The same bracket from four dense 6x6 LU determinants; a cross-check
/// for [`berry_bracket`] away from the axes.
pub fn berry_bracket_dense(cc: &ConditionedCovariance, t: f64, s: f64) -> f64 {
    let f = |t: f64, s: f64| {
        let d = Matrix6::from_diagonal(&nalgebra::Vector6::new(
            t.sqrt(),
            t.sqrt(),
            t.sqrt(),
            s.sqrt(),
            s.sqrt(),
            s.sqrt(),
        ));
        let m = Matrix6::identity() + d * cc.omega * d;
        m.lu().determinant().powf(-0.5)
    };
    f(0.0, 0.0) - f(t, 0.0) - f(0.0, s) + f(t, s)
}

/// `E[|w1| |w2|]` for `(w1, w2) ~ N(0, Omega)`.
pub fn berry_expectation(cc: &ConditionedCovariance, cfg: &QuadConfig) -> Result<f64> {
    if !cc.is_positive_definite() {
        return Err(Error::NotPositiveDefinite);
    }
    let p = Prepared::new(cc);
    let to_t = |u: f64| {
        let r = u / (1.0 - u);
        r * r
    };
    let inner = QuadConfig { abs_tol: cfg.abs_tol / 10.0, rel_tol: cfg.rel_tol / 10.0, ..*cfg };
    let r = integrate(
        |u| {
            let ts = p.side(to_t(u));
            let row = integrate(
                |v| {
                    let g = 2.0 / PI * p.bracket(&ts, &p.side(to_t(v))) / (u * u * v * v);
                    if g.is_finite() {
                        Ok(g)
                    } else {
                        Err(Error::QuadratureNonConvergence { residual: f64::NAN, evaluations: 0 })
                    }
                },
                0.0,
                1.0,
                &inner,
            )?;
            Ok(row.value)
        },
        0.0,
        1.0,
        cfg,
    )?;
    Ok(r.value)
}
