//! Exact singular points (`r = +-1`) and the lattice constant used to
//! correct the midpoint rule for their `1/|x - x0|` singularities.

use num_integer::Integer;

use crate::lattice::LatticeSet;

/// A torus point `numer / denom` where `r = sign`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SingularPoint {
    pub numer: [i64; 3],
    pub denom: i64,
    pub sign: i8,
}

impl SingularPoint {
    pub fn coords(&self) -> [f64; 3] {
        self.numer.map(|k| k as f64 / self.denom as f64)
    }
}

/// All `x in [0,1)^3` with `r(x) = +-1`, i.e. `mu . x` in `Z` for every
/// `mu` or in `1/2 + Z` for every `mu`.
///
/// With `g` the gcd of all coordinates, the set contains `2g e_i`, so such
/// `x` lie in `(1/(4g)) Z^3`; that finite grid is scanned exactly.
pub fn singular_points(set: &LatticeSet) -> Vec<SingularPoint> {
    if set.is_empty() {
        return Vec::new();
    }
    let g = set.iter().flat_map(|p| p.0).fold(0i64, |a, c| a.gcd(&c));
    let q = 4 * g;
    let mut out = Vec::new();
    for a in 0..q {
        for b in 0..q {
            for c in 0..q {
                let k = [a, b, c];
                let mut sign = 0i8;
                let ok = set.iter().all(|mu| {
                    let s = (mu.0[0] * a + mu.0[1] * b + mu.0[2] * c).rem_euclid(q);
                    let this = if s == 0 {
                        1
                    } else if 2 * s == q {
                        -1
                    } else {
                        return false;
                    };
                    if sign == 0 {
                        sign = this;
                    }
                    sign == this
                });
                if ok {
                    out.push(SingularPoint { numer: k, denom: q, sign });
                }
            }
        }
    }
    out
}

/// `Z(delta) = lim_{h -> 0} (sum_j h^3 phi(h(j + delta)) / |h(j + delta)| - int phi(y)/|y| dy) / h^2`
/// for smooth cut-offs `phi` with `phi(0) = 1`, by Ewald summation.
///
/// Returns `None` when `delta` is a lattice point (a node sits on the
/// singularity).
pub fn ewald_z(delta: [f64; 3]) -> Option<f64> {
    const ETA: f64 = 2.0;
    const R: i64 = 6;
    let pi = std::f64::consts::PI;
    let d = delta.map(|c| c - c.floor());
    let mut terms = Vec::with_capacity(((2 * R + 1) as usize).pow(3) * 2);
    for i in -R..=R {
        for j in -R..=R {
            for k in -R..=R {
                let y = [i as f64 + d[0], j as f64 + d[1], k as f64 + d[2]];
                let dist = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
                if dist == 0.0 {
                    return None;
                }
                terms.push(libm::erfc(ETA * dist) / dist);
                if (i, j, k) != (0, 0, 0) {
                    let kk = (i * i + j * j + k * k) as f64;
                    let phase = 2.0 * pi * (i as f64 * d[0] + j as f64 * d[1] + k as f64 * d[2]);
                    terms.push(phase.cos() * (-pi * pi * kk / (ETA * ETA)).exp() / (pi * kk));
                }
            }
        }
    }
    Some(crate::par::ordered_sum(&terms) - pi / (ETA * ETA))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kacrice::JetEvaluator;
    use crate::lattice::enumerate;

    #[test]
    fn singular_points_small() {
        let pts = singular_points(&enumerate(3));
        assert!(pts.contains(&SingularPoint { numer: [0, 0, 0], denom: 4, sign: 1 }));
        assert!(pts.contains(&SingularPoint { numer: [2, 2, 2], denom: 4, sign: -1 }));
        for m in [1, 2, 3, 5, 6, 11, 12] {
            let set = enumerate(m);
            let ev = JetEvaluator::new(&set);
            let pts = singular_points(&set);
            for p in &pts {
                let r = ev.r(p.coords());
                assert!((r - p.sign as f64).abs() < 1e-12, "m={m} {p:?}");
            }
            // Every point of a fine rational grid with |r| = 1 is listed.
            let q = 8 * pts[0].denom;
            for a in 0..q {
                for b in 0..q {
                    for c in 0..q {
                        let x = [a, b, c].map(|k| k as f64 / q as f64);
                        if (ev.r(x).abs() - 1.0).abs() < 1e-12 {
                            let hit = pts.iter().any(|p| {
                                (0..3).all(|i| p.numer[i] * q == [a, b, c][i] * p.denom)
                            });
                            assert!(hit, "m={m} missing {x:?}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn ewald_is_independent_of_splitting() {
        let z = ewald_z([0.1, 0.2, 0.3]).unwrap();
        assert!((z - ewald_z([1.1, -0.8, 0.3]).unwrap()).abs() < 1e-13);
        let p = ewald_z([0.2, 0.1, 0.3]).unwrap();
        assert!((z - p).abs() < 1e-13);
        let neg = ewald_z([0.9, 0.8, 0.7]).unwrap();
        assert!((z - neg).abs() < 1e-13);
        assert!(ewald_z([0.0, 0.0, 0.0]).is_none());
    }

    #[test]
    fn ewald_matches_gaussian_cutoff_sums() {
        // sum_j h^3 exp(-|y_j|^2)/|y_j| - 2 pi ~ h^2 Z(delta).
        let delta = [0.1, 0.2, 0.3];
        let z = ewald_z(delta).unwrap();
        let n = 16;
        let h = 1.0 / n as f64;
        let l = 6 * n as i64;
        let mut rows = Vec::new();
        for i in -l..=l {
            let mut row = 0.0;
            for j in -l..=l {
                for k in -l..=l {
                    let y = [i as f64 + delta[0], j as f64 + delta[1], k as f64 + delta[2]].map(|c| h * c);
                    let r2 = y[0] * y[0] + y[1] * y[1] + y[2] * y[2];
                    row += (-r2).exp() / r2.sqrt();
                }
            }
            rows.push(row * h * h * h);
        }
        let sum = crate::par::ordered_sum(&rows);
        let est = (sum - 2.0 * std::f64::consts::PI) / (h * h);
        assert!((est - z).abs() < 1e-3, "{est} vs {z}");
    }
}
