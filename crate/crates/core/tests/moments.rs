use arw_core::correlations::{census, CostCaps};
use arw_core::lattice::{enumerate, is_admissible};
use arw_core::moments::{
    angular_moment, assemble_leading_constant, l2_integral_predictions, lemma52_terms, lemma61_asymptotic_check,
    lemma61_exact, lemma61_numeric, Lemma52Config,
};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

fn q(p: i64, d: i64) -> BigRational {
    BigRational::new(p.into(), d.into())
}

#[test]
fn b4_approaches_one_fifth() {
    let dev = |m: u64| {
        let b4 = angular_moment(&enumerate(m), 4).unwrap().value;
        (b4 - q(1, 5)).to_f64().unwrap().abs()
    };
    let small = dev(3);
    let large = (300..=400).filter(|&m| is_admissible(m)).map(dev).fold(f64::INFINITY, f64::min);
    assert!(large < small, "{large} vs {small}");
    assert!(angular_moment(&enumerate(389), 3).unwrap().value.is_zero());
}

#[test]
fn numeric_quadrature_reproduces_exact_table() {
    for m in [1u64, 2, 3, 5] {
        let set = enumerate(m);
        let t = lemma61_exact(&set, &CostCaps::default(), true).unwrap();
        for ((name, exact), (_, v)) in t.entries().into_iter().zip(lemma61_numeric(&set, 64).unwrap()) {
            let exact = exact.unwrap().to_f64().unwrap();
            assert!((exact - v).abs() < 1e-9, "m={m} {name}: {exact} vs {v}");
        }
    }
}

#[test]
fn deviations_stay_within_budget() {
    for m in [3u64, 5, 11, 101] {
        let set = enumerate(m);
        let t = lemma61_exact(&set, &CostCaps::default(), false).unwrap();
        let rows = lemma61_asymptotic_check(&t, &census(&set, &CostCaps::default()));
        assert_eq!(rows.len(), 16);
        for r in rows {
            let (d, b) = (r.deviation.unwrap(), r.budget.unwrap());
            assert!(d <= b * (1.0 + 1e-12), "m={m} {}: {d} > {b}", r.entry);
        }
    }
}

#[test]
fn trace_terms_report() {
    let set = enumerate(6);
    let c = census(&set, &CostCaps::default());
    let t = lemma52_terms(&set, &c, &Lemma52Config { grid_n: Some(32), ..Default::default() }).unwrap();
    assert_eq!(t.rows.len(), 11);
    assert!(t.excluded_fraction < 0.5);
    // tr X <= 0 pointwise, tr Y^2 >= 0.
    assert!(t.rows[0].value < 0.0 && t.rows[1].value > 0.0);
}

#[test]
fn assembly_is_exact() {
    let a = assemble_leading_constant(&l2_integral_predictions()).unwrap();
    assert!(a.coeff_1_over_n.is_zero());
    assert_eq!(a.coeff_1_over_n2, q(6, 375));
    assert_eq!(a.constant, q(32, 375));
    let json = serde_json::to_string(&a).unwrap();
    assert!(json.contains("\"constant\":\"32/375\""));
}

