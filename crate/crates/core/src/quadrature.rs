//! Globally adaptive Gauss-Kronrod (7, 15) quadrature on finite intervals.

use crate::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances and work limit for [`integrate`].
#[derive(Clone, Copy, Debug)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig { abs_tol: 1e-10, rel_tol: 1e-10, max_intervals: 200 }
    }
}

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15<F: FnMut(f64) -> Result<f64>>(f: &mut F, a: f64, b: f64) -> Result<Piece> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (i, (&x, &w)) in XGK.iter().zip(&WGK).take(7).enumerate() {
        let s = f(c - h * x)? + f(c + h * x)?;
        kronrod += w * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    Ok(Piece { a, b, value: kronrod * h, error: ((kronrod - gauss) * h).abs() })
}

/// Integrates `f` over `[a, b]`, bisecting the piece with the largest error
/// estimate until the total estimate meets `max(abs_tol, rel_tol * |I|)`.
///
/// The subdivision sequence depends only on `f`, so results are
/// reproducible bit for bit.
pub fn integrate<F>(mut f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<Integral>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut pieces = vec![gk15(&mut f, a, b)?];
    let mut evaluations = 15;
    loop {
        let value: f64 = pieces.iter().map(|p| p.value).sum();
        let error: f64 = pieces.iter().map(|p| p.error).sum();
        if !value.is_finite() {
            return Err(Error::QuadratureNonConvergence { residual: f64::NAN, evaluations });
        }
        if error <= cfg.abs_tol.max(cfg.rel_tol * value.abs()) {
            return Ok(Integral { value, error, evaluations });
        }
        if pieces.len() >= cfg.max_intervals {
            return Err(Error::QuadratureNonConvergence { residual: error, evaluations });
        }
        let worst = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .unwrap();
        let p = pieces.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        pieces.push(gk15(&mut f, p.a, mid)?);
        pieces.push(gk15(&mut f, mid, p.b)?);
        evaluations += 30;
    }
}

/// Iterated integral over `[a0, b0] x [a1, b1]`; `f(x, y)`.
///
/// The inner tolerance is a tenth of the outer one so inner errors do not
/// dominate the outer estimate.
pub fn integrate_2d<F>(f: F, x: (f64, f64), y: (f64, f64), cfg: &QuadConfig) -> Result<Integral>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    let inner = QuadConfig {
        abs_tol: cfg.abs_tol / (10.0 * (x.1 - x.0)),
        rel_tol: cfg.rel_tol / 10.0,
        max_intervals: cfg.max_intervals,
    };
    let mut evaluations = 0;
    let outer = integrate(
        |u| {
            let r = integrate(|v| f(u, v), y.0, y.1, &inner)?;
            evaluations += r.evaluations;
            Ok(r.value)
        },
        x.0,
        x.1,
        cfg,
    )?;
    Ok(Integral { evaluations, ..outer })
}

/// Cell-centred coordinate of grid index `j` on an `n`-point torus axis.
pub fn node_coord(j: usize, n: usize) -> f64 {
    (j as f64 + 0.5) / n as f64
}

/// Representative of an orbit of the cell-centred `n^3` torus grid under
/// coordinate permutations and sign changes `x_i -> -x_i (mod 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OrbitNode {
    /// Folded indices `min(j, n - 1 - j)`, sorted ascending.
    pub index: [usize; 3],
    /// Number of grid nodes in the orbit.
    pub weight: u64,
}

impl OrbitNode {
    pub fn point(&self, n: usize) -> [f64; 3] {
        self.index.map(|j| node_coord(j, n))
    }
}

/// Orbit representatives of the `n^3` grid. The weights sum to `n^3`, so a
/// weighted sum over the representatives equals the full grid sum for any
/// integrand invariant under the signed permutations of the axes.
pub fn symmetric_grid(n: usize) -> Vec<OrbitNode> {
    let half = n.div_ceil(2);
    let preimages = |k: usize| if 2 * k + 1 == n { 1u64 } else { 2 };
    let mut nodes = Vec::new();
    for a in 0..half {
        for b in a..half {
            for c in b..half {
                let perms = match (a == b, b == c) {
                    (true, true) => 1,
                    (false, false) => 6,
                    _ => 3,
                };
                let weight = perms * preimages(a) * preimages(b) * preimages(c);
                nodes.push(OrbitNode { index: [a, b, c], weight });
            }
        }
    }
    nodes
}
