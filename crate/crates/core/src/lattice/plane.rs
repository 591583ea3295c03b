use std::collections::HashMap;

use num_integer::Integer;

use super::{LatticePoint, LatticeSet};
use crate::{Error, Result};

/// Default largest `m` for which [`max_coplanar`] runs its O(N^3) scan.
pub const DEFAULT_COPLANAR_CAP: u64 = 2_000;

/// Exact normal form of the plane `normal . x = offset`: primitive integer
/// normal whose first nonzero entry is positive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlaneKey {
    pub normal: [i64; 3],
    pub offset: i64,
}

impl PlaneKey {
    /// Plane through three non-collinear points, `None` if collinear.
    pub fn through(a: &LatticePoint, b: &LatticePoint, c: &LatticePoint) -> Option<Self> {
        let u = *b - *a;
        let v = *c - *a;
        let mut n = [
            u.0[1] * v.0[2] - u.0[2] * v.0[1],
            u.0[2] * v.0[0] - u.0[0] * v.0[2],
            u.0[0] * v.0[1] - u.0[1] * v.0[0],
        ];
        let g = n[0].gcd(&n[1]).gcd(&n[2]);
        if g == 0 {
            return None;
        }
        let first = *n.iter().find(|&&x| x != 0).unwrap();
        let sign = if first < 0 { -1 } else { 1 };
        for x in &mut n {
            *x = *x / g * sign;
        }
        let offset = LatticePoint(n).dot(a);
        Some(PlaneKey { normal: n, offset })
    }
}

/// `kappa_3(m)`: the largest number of points of `E(m)` on one plane.
///
/// Every plane holding three or more points is spanned by some triple, so
/// the scan over triples is exhaustive; planes through at most two points
/// contribute the trivial bound 2. Refuses when `m > cap`.
pub fn max_coplanar(set: &LatticeSet, cap: u64) -> Result<usize> {
    if set.m() > cap {
        return Err(Error::CostCapExceeded {
            what: "max_coplanar",
            estimate: (set.len() as u128).pow(3) / 6,
            cap: (super::r3(cap) as u128).pow(3) / 6,
        });
    }
    let pts = set.points();
    let n = pts.len();
    if n < 3 {
        return Ok(n);
    }
    // Triples per plane; a plane carrying k points is hit C(k,3) times.
    let partial = crate::par::map_range(0..n, |i| {
        let mut local: HashMap<PlaneKey, u64> = HashMap::new();
        for j in i + 1..n {
            for k in j + 1..n {
                if let Some(key) = PlaneKey::through(&pts[i], &pts[j], &pts[k]) {
                    *local.entry(key).or_default() += 1;
                }
            }
        }
        local
    });
    let mut triples: HashMap<PlaneKey, u64> = HashMap::new();
    for local in partial {
        for (k, c) in local {
            *triples.entry(k).or_default() += c;
        }
    }
    let best = triples.values().copied().max().unwrap_or(0);
    let mut k = 2u64;
    while (k + 1) * k * (k - 1) / 6 <= best {
        k += 1;
    }
    Ok(k as usize)
}
