use std::f64::consts::PI;

use arw_core::kacrice::{
    berry_expectation, conditioned_covariance, energy, k2_from_jet, v_identity_check, v_integral_exact,
    variance_quadrature, ConditionedCovariance, CovarianceJet, JetEvaluator, VarianceConfig, DEFAULT_EPS_SING,
};
use arw_core::lattice::enumerate;
use arw_core::quadrature::symmetric_grid;
use nalgebra::Matrix3;
use num_traits::Zero;

#[test]
fn calibration_constants() {
    let cfg = arw_core::kacrice::default_berry_config();
    let b = berry_expectation(&ConditionedCovariance::from_xy(Matrix3::zeros(), Matrix3::zeros()), &cfg).unwrap();
    assert!((b - 8.0 / PI).abs() < 1e-8);
    let k = k2_from_jet(&CovarianceJet::zero([0.1, 0.2, 0.3]), energy(3), DEFAULT_EPS_SING, &cfg).unwrap();
    assert!((k - 4.0 / (PI * PI)).abs() < 1e-8);
}

#[test]
fn omega_positive_definite_off_the_singular_set() {
    for m in [3, 5, 11] {
        let set = enumerate(m);
        let ev = JetEvaluator::new(&set);
        let n = 24;
        let mut checked = 0;
        for node in symmetric_grid(n) {
            let jet = ev.jet(node.point(n));
            let Ok(cc) = conditioned_covariance(&jet, energy(m), DEFAULT_EPS_SING) else { continue };
            assert!(cc.is_positive_definite(), "m={m} x={:?}", jet.x);
            checked += 1;
        }
        assert!(checked > 100);
    }
}

#[test]
fn v_identity_at_random_points() {
    let a = [0.754_877_666_246_692_7, 0.569_840_290_998_053_3, 0.362_491_892_301_459_3];
    for m in [3, 5, 11, 50] {
        let set = enumerate(m);
        for i in 1..=50 {
            let x = a.map(|c| (c * i as f64 * 1.37).fract());
            let c = v_identity_check(&set, x);
            assert!(c.difference.abs() <= 1e-9, "m={m} x={x:?}: {c:?}");
        }
        assert!(v_integral_exact(&set).is_zero());
    }
}

#[test]
fn variance_is_positive_and_grid_stable() {
    let set = enumerate(5);
    let a = variance_quadrature(&set, &VarianceConfig { grid_n: Some(32), ..Default::default() }).unwrap();
    let b = variance_quadrature(&set, &VarianceConfig { grid_n: Some(48), ..Default::default() }).unwrap();
    assert!(a.value > 0.0 && b.value > 0.0);
    assert!((a.value - b.value).abs() < 0.05 * b.value, "{} {}", a.value, b.value);
}
