use std::collections::HashSet;

use arw_core::correlations::{census, count_c6, count_c6_double_loop, exponent_monitor, CostCaps};
use arw_core::lattice::{enumerate, is_admissible, LatticeCache, LatticePoint, LatticeSet, PairSumTable};

/// Exhaustive counts of zero-sum 4- and 6-tuples with a hash membership
/// test for the last coordinate.
fn oracle(set: &LatticeSet) -> (u128, u128, u128) {
    let pts = set.points();
    let member: HashSet<LatticePoint> = pts.iter().copied().collect();
    let (mut c4, mut d4) = (0u128, 0u128);
    for a in pts {
        for b in pts {
            for c in pts {
                let d = -(*a + *b + *c);
                if member.contains(&d) {
                    c4 += 1;
                    let z = LatticePoint::ZERO;
                    if *a + *b == z || *a + *c == z || *a + d == z {
                        d4 += 1;
                    }
                }
            }
        }
    }
    let mut c6 = 0u128;
    for a in pts {
        for b in pts {
            for c in pts {
                let s3 = *a + *b + *c;
                for d in pts {
                    for e in pts {
                        if member.contains(&-(s3 + *d + *e)) {
                            c6 += 1;
                        }
                    }
                }
            }
        }
    }
    (c4, d4, c6)
}

#[test]
fn census_matches_oracle_for_small_m() {
    for m in 1..=14u64 {
        let set = enumerate(m);
        if set.is_empty() {
            continue;
        }
        let row = census(&set, &CostCaps::default());
        let (c4, d4, c6) = oracle(&set);
        assert_eq!(row.c4, c4, "m={m}");
        assert_eq!(row.d4_sym, d4, "m={m}");
        assert_eq!(row.x4, c4 - d4, "m={m}");
        assert_eq!(row.c6, Some(c6), "m={m}");
        assert_eq!(row.admissible, is_admissible(m));
    }
}

#[test]
fn slab_and_double_loop_agree() {
    for m in [17u64, 26, 41, 50] {
        let set = enumerate(m);
        let t = PairSumTable::new(&set);
        assert_eq!(count_c6(&set, &t, &CostCaps::default()).unwrap(), count_c6_double_loop(&t));
    }
}

#[test]
fn monitor_over_a_range() {
    let rows: Vec<_> = (1..=200u64)
        .filter(|&m| is_admissible(m))
        .map(|m| census(&enumerate(m), &CostCaps::default()))
        .collect();
    let mon = exponent_monitor(rows);
    assert!(mon.slope_x4.unwrap().is_finite());
    assert!(mon.slope_c6.unwrap().is_finite());
    assert!(mon.rows.iter().all(|r| r.c6.is_some()));
}

#[test]
fn cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cache = LatticeCache::new(dir.path()).unwrap();
    let cold = cache.get(101).unwrap();
    assert!(cache.path_for(101).exists());
    let warm = cache.get(101).unwrap();
    assert_eq!(cold, warm);
    assert_eq!(warm, enumerate(101));
}
