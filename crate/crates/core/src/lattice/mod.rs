//! Lattice points on the sphere `|mu|^2 = m` and the elementary counts built
//! from them.

mod io;
mod pairsum;
mod plane;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

pub use io::{read_lattice, write_lattice, LatticeCache};
pub use pairsum::{circle_count, PairGroups, PairSumTable};
pub use plane::{max_coplanar, PlaneKey, DEFAULT_COPLANAR_CAP};

/// An integer vector in `Z^3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticePoint(pub [i64; 3]);

impl LatticePoint {
    pub const ZERO: LatticePoint = LatticePoint([0, 0, 0]);

    pub fn new(x: i64, y: i64, z: i64) -> Self {
        LatticePoint([x, y, z])
    }

    pub fn coords(&self) -> [i64; 3] {
        self.0
    }

    pub fn norm_sq(&self) -> i64 {
        self.dot(self)
    }

    pub fn dot(&self, other: &LatticePoint) -> i64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    /// `mu` precedes `-mu` lexicographically, i.e. the first nonzero
    /// coordinate is positive. Picks one representative per antipodal pair.
    pub fn is_positive(&self) -> bool {
        self.0.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0)
    }

    pub fn as_f64(&self) -> [f64; 3] {
        [self.0[0] as f64, self.0[1] as f64, self.0[2] as f64]
    }
}

impl Neg for LatticePoint {
    type Output = LatticePoint;
    fn neg(self) -> LatticePoint {
        LatticePoint([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl Add for LatticePoint {
    type Output = LatticePoint;
    fn add(self, o: LatticePoint) -> LatticePoint {
        LatticePoint([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for LatticePoint {
    type Output = LatticePoint;
    fn sub(self, o: LatticePoint) -> LatticePoint {
        LatticePoint([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.0[0], self.0[1], self.0[2])
    }
}

/// The set `E(m)` in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSet {
    m: u64,
    points: Vec<LatticePoint>,
}

impl LatticeSet {
    /// Builds a set from explicit points. The points are sorted and
    /// deduplicated; every point must have squared norm `m`.
    pub fn from_points(m: u64, mut points: Vec<LatticePoint>) -> crate::Result<Self> {
        if let Some(p) = points.iter().find(|p| p.norm_sq() as u64 != m) {
            return Err(crate::Error::InvalidArgument(format!(
                "point {p} does not lie on the sphere |x|^2 = {m}"
            )));
        }
        points.sort_unstable();
        points.dedup();
        Ok(LatticeSet { m, points })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    /// Cardinality `N = r_3(m)`.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LatticePoint> {
        self.points.iter()
    }

    pub fn contains(&self, p: &LatticePoint) -> bool {
        self.points.binary_search(p).is_ok()
    }

    /// One representative of each antipodal pair `{mu, -mu}`, in order.
    pub fn half_set(&self) -> Vec<LatticePoint> {
        self.points.iter().copied().filter(LatticePoint::is_positive).collect()
    }

    /// Half-width of the coordinate box containing the set.
    pub fn radius_bound(&self) -> i64 {
        isqrt(self.m) as i64
    }
}

impl<'a> IntoIterator for &'a LatticeSet {
    type Item = &'a LatticePoint;
    type IntoIter = std::slice::Iter<'a, LatticePoint>;
    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

/// `floor(sqrt(n))`, exact for all `u64`.
pub fn isqrt(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut x = (n as f64).sqrt() as u64;
    while x.checked_mul(x).is_none_or(|v| v > n) {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).is_some_and(|v| v <= n) {
        x += 1;
    }
    x
}

/// `m mod 8` not in `{0, 4, 7}`: primitive representations exist and
/// `N -> infinity` along such `m`.
pub fn is_admissible(m: u64) -> bool {
    !matches!(m % 8, 0 | 4 | 7)
}

/// Enumerates `E(m)`: an outer loop over the first coordinate and a
/// two-square decomposition of the remainder.
pub fn enumerate(m: u64) -> LatticeSet {
    let s = isqrt(m) as i64;
    let mut points = Vec::new();
    for a in -s..=s {
        let rest = m - (a * a) as u64;
        let t = isqrt(rest) as i64;
        for b in -t..=t {
            let c2 = rest - (b * b) as u64;
            let c = isqrt(c2);
            if c * c == c2 {
                let c = c as i64;
                points.push(LatticePoint([a, b, c]));
                if c != 0 {
                    points.push(LatticePoint([a, b, -c]));
                }
            }
        }
    }
    points.sort_unstable();
    LatticeSet { m, points }
}

/// Number of representations of `m` as an ordered sum of three signed
/// squares.
pub fn r3(m: u64) -> usize {
    enumerate(m).len()
}

/// Histogram `r -> |{(mu1, mu2) in E^2 : mu1 . mu2 = r}|`.
pub fn inner_product_histogram(set: &LatticeSet) -> BTreeMap<i64, u64> {
    let pts = set.points();
    let rows = crate::par::map_slice(pts, |a| {
        let mut local: BTreeMap<i64, u64> = BTreeMap::new();
        for b in pts {
            *local.entry(a.dot(b)).or_default() += 1;
        }
        local
    });
    let mut hist = BTreeMap::new();
    for row in rows {
        for (r, c) in row {
            *hist.entry(r).or_default() += c;
        }
    }
    hist
}

/// `|I_m(r)|`: ordered pairs with inner product `r`.
pub fn inner_product_count(set: &LatticeSet, r: i64) -> u64 {
    let pts = set.points();
    pts.iter()
        .map(|a| pts.iter().filter(|b| a.dot(b) == r).count() as u64)
        .sum()
}
