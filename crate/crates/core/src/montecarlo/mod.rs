//! Random waves `F(x) = N^(-1/2) sum_mu a_mu e(mu . x)` and their nodal
//! area.
//!
//! Coefficients live on the half set of lexicographically positive points;
//! `a_(-mu)` is the conjugate of `a_mu`, so `F` is real and is evaluated as
//! `(2 / sqrt N) sum_half Re(a_mu e(mu . x))`.

mod isosurface;

use std::f64::consts::PI;
use std::io::Write;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::kacrice::VarianceReport;
use crate::lattice::{LatticePoint, LatticeSet};
use crate::{Error, Result};

pub use isosurface::{isosurface_area, IsosurfaceArea};

/// One realisation of the random wave.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveSample {
    pub m: u64,
    /// Size of the full lattice set.
    pub n: usize,
    /// Master seed and sample index the coefficients were drawn from.
    pub seed: u64,
    pub index: u64,
    /// Half-set representatives with their amplitudes `(Re a, Im a)`.
    pub half: Vec<LatticePoint>,
    pub coeffs: Vec<[f64; 2]>,
}

/// Standard complex Gaussian from two uniform words via Box-Muller:
/// `(z1 + i z2) / sqrt 2` with `E|a|^2 = 1`.
fn complex_gaussian(rng: &mut ChaCha8Rng) -> [f64; 2] {
    let scale = 1.0 / (1u64 << 53) as f64;
    let u1 = ((rng.next_u64() >> 11) + 1) as f64 * scale;
    let u2 = (rng.next_u64() >> 11) as f64 * scale;
    let rad = (-2.0 * u1.ln()).sqrt();
    let (s, c) = (2.0 * PI * u2).sin_cos();
    [rad * c / 2f64.sqrt(), rad * s / 2f64.sqrt()]
}

/// Draws sample `index` under master `seed`.
///
/// The generator is ChaCha8 keyed by `seed`, on stream `index`; the
/// coefficient of the `k`-th half-set point uses words `4k .. 4k + 4`, so
/// every amplitude depends only on `(seed, index, k)`.
pub fn sample_wave(set: &LatticeSet, seed: u64, index: u64) -> Result<WaveSample> {
    if set.is_empty() {
        return Err(Error::InvalidArgument(format!("E({}) is empty", set.m())));
    }
    let half = set.half_set();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng.set_word_pos(0);
    let coeffs = half.iter().map(|_| complex_gaussian(&mut rng)).collect();
    Ok(WaveSample { m: set.m(), n: set.len(), seed, index, half, coeffs })
}

/// `F(x)` at one point.
pub fn evaluate_field(sample: &WaveSample, x: [f64; 3]) -> f64 {
    let mut acc = 0.0;
    for (mu, a) in sample.half.iter().zip(&sample.coeffs) {
        let p = mu.0[0] as f64 * x[0] + mu.0[1] as f64 * x[1] + mu.0[2] as f64 * x[2];
        let (s, c) = (2.0 * PI * (p - p.round())).sin_cos();
        acc += a[0] * c - a[1] * s;
    }
    2.0 * acc / (sample.n as f64).sqrt()
}

/// `F` on the grid `j / n`, indexed `(i * n + j) * n + k`.
pub fn evaluate_grid(sample: &WaveSample, n: usize) -> Vec<f64> {
    // e(t / n) for t in 0..n; e(mu_i j / n) is read at (mu_i j) mod n.
    let table: Vec<(f64, f64)> = (0..n).map(|t| (2.0 * PI * t as f64 / n as f64).sin_cos()).collect();
    let phase = |k: i64, j: usize| table[(k * j as i64).rem_euclid(n as i64) as usize];
    let scale = 2.0 / (sample.n as f64).sqrt();
    let slabs = crate::par::map_range(0..n, |i| {
        let mut slab = vec![0.0; n * n];
        for (mu, a) in sample.half.iter().zip(&sample.coeffs) {
            let (s1, c1) = phase(mu.0[0], i);
            let (re1, im1) = (a[0] * c1 - a[1] * s1, a[0] * s1 + a[1] * c1);
            for j in 0..n {
                let (s2, c2) = phase(mu.0[1], j);
                let (re2, im2) = (re1 * c2 - im1 * s2, re1 * s2 + im1 * c2);
                let row = &mut slab[j * n..(j + 1) * n];
                for (k, v) in row.iter_mut().enumerate() {
                    let (s3, c3) = phase(mu.0[2], k);
                    *v += re2 * c3 - im2 * s3;
                }
            }
        }
        slab.iter_mut().for_each(|v| *v *= scale);
        slab
    });
    slabs.concat()
}

/// Default resolution `max(32, 6 ceil(sqrt m))`.
pub fn default_resolution(m: u64) -> usize {
    let s = crate::lattice::isqrt(m);
    let ceil = if s * s == m { s } else { s + 1 };
    32.max(6 * ceil as usize)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodalAreaEstimate {
    #[serde(serialize_with = "crate::report::sig::serialize")]
    pub area: f64,
    pub resolution: usize,
    pub seed: u64,
    pub index: u64,
    /// Set when no grid edge changes sign; the area is then reported as 0.
    pub no_sign_change: bool,
}

/// Nodal area of one sample from the zero isosurface of its grid values.
pub fn nodal_area(sample: &WaveSample, resolution: usize) -> Result<NodalAreaEstimate> {
    if resolution < 16 {
        return Err(Error::InvalidArgument(format!("resolution {resolution} below 16")));
    }
    let grid = evaluate_grid(sample, resolution);
    let iso = isosurface_area(&grid, resolution);
    Ok(NodalAreaEstimate {
        area: iso.area,
        resolution,
        seed: sample.seed,
        index: sample.index,
        no_sign_change: iso.no_sign_change,
    })
}

/// Sample mean and unbiased variance of the nodal area with jackknife
/// standard errors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub m: u64,
    #[serde(rename = "N")]
    pub n: usize,
    pub samples: usize,
    pub resolution: usize,
    pub seed: u64,
    #[serde(serialize_with = "crate::report::sig::serialize")]
    pub mean: f64,
    #[serde(serialize_with = "crate::report::sig::serialize")]
    pub variance: f64,
    #[serde(serialize_with = "crate::report::sig::serialize")]
    pub mean_stderr: f64,
    #[serde(serialize_with = "crate::report::sig::serialize")]
    pub variance_stderr: f64,
    /// Samples whose grid showed no sign change.
    pub flagged: usize,
    #[serde(skip)]
    pub estimates: Vec<NodalAreaEstimate>,
}

/// Column order of the ensemble CSV.
pub const ENSEMBLE_CSV_HEADER: &str = "m,N,samples,resolution,seed,mean,variance,mean_stderr,variance_stderr,flagged";

impl EnsembleStats {
    pub fn csv_line(&self) -> String {
        use crate::report::fmt_sig;
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.m,
            self.n,
            self.samples,
            self.resolution,
            self.seed,
            fmt_sig(self.mean),
            fmt_sig(self.variance),
            fmt_sig(self.mean_stderr),
            fmt_sig(self.variance_stderr),
            self.flagged
        )
    }

    /// Copies the Monte-Carlo variance and its standard error into a
    /// variance report.
    pub fn merge_into(&self, report: &mut VarianceReport) {
        report.var_montecarlo = Some(self.variance);
        report.mc_stderr = Some(self.variance_stderr);
    }
}

/// `(mean, variance, se_mean, se_variance)` with jackknife errors; needs
/// at least three values.
pub fn jackknife(values: &[f64]) -> Result<(f64, f64, f64, f64)> {
    let k = values.len();
    if k < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 samples, got {k}")));
    }
    let kf = k as f64;
    let mean = crate::par::ordered_sum(values) / kf;
    let dev: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let s1 = crate::par::ordered_sum(&dev);
    let s2 = crate::par::ordered_sum(&dev.iter().map(|d| d * d).collect::<Vec<_>>());
    let variance = (s2 - s1 * s1 / kf) / (kf - 1.0);
    // Leave-one-out estimates.
    let loo_mean: Vec<f64> = dev.iter().map(|d| mean + (s1 - d) / (kf - 1.0)).collect();
    let loo_var: Vec<f64> = dev
        .iter()
        .map(|d| {
            let (a, b) = (s1 - d, s2 - d * d);
            (b - a * a / (kf - 1.0)) / (kf - 2.0)
        })
        .collect();
    let spread = |xs: &[f64]| {
        let c = crate::par::ordered_sum(xs) / kf;
        let sq: Vec<f64> = xs.iter().map(|x| (x - c) * (x - c)).collect();
        ((kf - 1.0) / kf * crate::par::ordered_sum(&sq)).sqrt()
    };
    Ok((mean, variance, spread(&loo_mean), spread(&loo_var)))
}

/// Nodal areas of samples `0 .. samples` under master `seed`.
pub fn ensemble_stats(set: &LatticeSet, samples: usize, resolution: usize, seed: u64) -> Result<EnsembleStats> {
    if samples < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 samples, got {samples}")));
    }
    let estimates: Vec<NodalAreaEstimate> = crate::par::map_range(0..samples, |i| {
        let s = sample_wave(set, seed, i as u64)?;
        nodal_area(&s, resolution)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let areas: Vec<f64> = estimates.iter().map(|e| e.area).collect();
    let (mean, variance, mean_stderr, variance_stderr) = jackknife(&areas)?;
    Ok(EnsembleStats {
        m: set.m(),
        n: set.len(),
        samples,
        resolution,
        seed,
        mean,
        variance,
        mean_stderr,
        variance_stderr,
        flagged: estimates.iter().filter(|e| e.no_sign_change).count(),
        estimates,
    })
}

/// Per-sample areas as `seed,area` lines, where `seed` is the sample index.
pub fn write_samples_csv<W: Write>(estimates: &[NodalAreaEstimate], mut out: W) -> Result<()> {
    writeln!(out, "seed,area")?;
    for e in estimates {
        writeln!(out, "{},{}", e.index, crate::report::fmt_sig(e.area))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::enumerate;

    #[test]
    fn sampling_is_deterministic() {
        let set = enumerate(5);
        let a = sample_wave(&set, 42, 7).unwrap();
        assert_eq!(a, sample_wave(&set, 42, 7).unwrap());
        assert_ne!(a.coeffs, sample_wave(&set, 42, 8).unwrap().coeffs);
        assert_ne!(a.coeffs, sample_wave(&set, 43, 7).unwrap().coeffs);
        assert_eq!(a.half.len() * 2, set.len());
        assert!(sample_wave(&enumerate(7), 0, 0).is_err());
    }

    #[test]
    fn grid_matches_pointwise() {
        let set = enumerate(6);
        let s = sample_wave(&set, 1, 2).unwrap();
        let n = 16;
        let g = evaluate_grid(&s, n);
        for (i, j, k) in [(0, 0, 0), (3, 7, 11), (15, 1, 9)] {
            let x = [i, j, k].map(|t| t as f64 / n as f64);
            assert!((g[(i * n + j) * n + k] - evaluate_field(&s, x)).abs() < 1e-12);
        }
    }

    #[test]
    fn all_ones_closed_form() {
        let set = enumerate(3);
        let mut s = sample_wave(&set, 0, 0).unwrap();
        s.coeffs.iter_mut().for_each(|a| *a = [1.0, 0.0]);
        let x = [0.1, 0.27, 0.4];
        assert!((evaluate_field(&s, [0.0; 3]) - 8.0 / 8f64.sqrt()).abs() < 1e-12);
        let direct: f64 = s
            .half
            .iter()
            .map(|mu| (2.0 * PI * (mu.0[0] as f64 * x[0] + mu.0[1] as f64 * x[1] + mu.0[2] as f64 * x[2])).cos())
            .sum::<f64>()
            * 2.0
            / 8f64.sqrt();
        assert!((evaluate_field(&s, x) - direct).abs() < 1e-12);
        assert!((evaluate_field(&s, x) - evaluate_field(&s, x.map(|c| -c))).abs() < 1e-12);
    }

    #[test]
    fn jackknife_matches_closed_forms() {
        let v = [1.0, 2.0, 4.0, 7.0, 11.0];
        let (mean, var, se_mean, se_var) = jackknife(&v).unwrap();
        assert!((mean - 5.0).abs() < 1e-14);
        assert!((var - 16.5).abs() < 1e-12);
        assert!((se_mean - (16.5f64 / 5.0).sqrt()).abs() < 1e-12);
        // Brute-force leave-one-out for the variance.
        let loo: Vec<f64> = (0..5)
            .map(|i| {
                let w: Vec<f64> = v.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, x)| *x).collect();
                let mu = w.iter().sum::<f64>() / 4.0;
                w.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / 3.0
            })
            .collect();
        let c = loo.iter().sum::<f64>() / 5.0;
        let want = (0.8 * loo.iter().map(|x| (x - c).powi(2)).sum::<f64>()).sqrt();
        assert!((se_var - want).abs() < 1e-12);
        assert!(jackknife(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn resolution_default() {
        assert_eq!(default_resolution(3), 32);
        assert_eq!(default_resolution(50), 48);
        assert_eq!(default_resolution(49), 42);
    }

    #[test]
    fn csv_output() {
        let est = [NodalAreaEstimate { area: 4.25, resolution: 16, seed: 0, index: 3, no_sign_change: false }];
        let mut buf = Vec::new();
        write_samples_csv(&est, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "seed,area\n3,4.25\n");
    }
}
