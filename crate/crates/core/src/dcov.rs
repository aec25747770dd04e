//! Pairwise distances, U-centering, and the unbiased distance-covariance
//! estimator.
//!
//! All matrices are materialized as dense row-major `n×n` buffers. Row sums
//! and the final double sum use pairwise summation: the estimator is a
//! difference of nearly cancelling sums and naive accumulation loses digits
//! at large `n`.

use crate::error::{Error, Result};
use crate::rng::{RngSpec, StreamRng};

/// Symmetric matrix of Euclidean distances between the rows of a point set.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.d[i * self.n..(i + 1) * self.n]
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            n: self.n,
            d: self.d.iter().map(|v| v * c).collect(),
        }
    }
}

/// U-centered distance matrix. The diagonal is zero and never enters a sum.
#[derive(Debug, Clone, PartialEq)]
pub struct UCenteredMatrix {
    n: usize,
    a: Vec<f64>,
}

impl UCenteredMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.a[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.a
    }
}

/// Unbiased estimate of the squared distance covariance. May be negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DcovStatistic {
    pub value: f64,
    pub n: usize,
}

/// Pairwise (cascade) summation.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    const BLOCK: usize = 16;
    if v.len() <= BLOCK {
        v.iter().sum()
    } else {
        let mid = v.len() / 2;
        pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
    }
}

/// Euclidean distances between the rows of a row-major `n×q` buffer.
pub fn pairwise_distances(points: &[f64], q: usize) -> Result<DistanceMatrix> {
    if q == 0 || points.is_empty() || !points.len().is_multiple_of(q) {
        return Err(Error::Dimension(format!(
            "point buffer of length {} is not a non-empty n×{q} matrix",
            points.len()
        )));
    }
    if points.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidData("non-finite coordinate in distance input".into()));
    }
    let n = points.len() / q;
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        let xi = &points[i * q..(i + 1) * q];
        for j in (i + 1)..n {
            let xj = &points[j * q..(j + 1) * q];
            let dist = if q == 1 {
                (xi[0] - xj[0]).abs()
            } else {
                xi.iter().zip(xj).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
            };
            d[i * n + j] = dist;
            d[j * n + i] = dist;
        }
    }
    Ok(DistanceMatrix { n, d })
}

/// Distances between scalars, `|v_i - v_j|`.
pub fn scalar_distances(values: &[f64]) -> Result<DistanceMatrix> {
    pairwise_distances(values, 1)
}

pub fn u_center(d: &DistanceMatrix) -> Result<UCenteredMatrix> {
    let n = d.n;
    if n < 3 {
        return Err(Error::Size(format!("U-centering needs n >= 3, got {n}")));
    }
    let row_sums: Vec<f64> = (0..n).map(|i| pairwise_sum(d.row(i))).collect();
    let total = pairwise_sum(&row_sums);
    let nf = n as f64;
    let inv_m2 = 1.0 / (nf - 2.0);
    let grand = total / ((nf - 1.0) * (nf - 2.0));
    let scaled: Vec<f64> = row_sums.iter().map(|r| r * inv_m2).collect();

    let mut a = vec![0.0; n * n];
    for i in 0..n {
        let di = d.row(i);
        for j in (i + 1)..n {
            let v = di[j] - scaled[i] - scaled[j] + grand;
            a[i * n + j] = v;
            a[j * n + i] = v;
        }
    }
    Ok(UCenteredMatrix { n, a })
}

/// `(1 / (n(n-3))) Σ_{i≠j} a_ij b_ij`.
pub fn dcov_unbiased(a: &UCenteredMatrix, b: &UCenteredMatrix) -> Result<DcovStatistic> {
    if a.n != b.n {
        return Err(Error::Dimension(format!(
            "centered matrices have sizes {} and {}",
            a.n, b.n
        )));
    }
    let n = a.n;
    if n < 4 {
        return Err(Error::Size(format!("unbiased dCov needs n >= 4, got {n}")));
    }
    let mut row_buf = vec![0.0; n];
    let row_totals: Vec<f64> = (0..n)
        .map(|i| {
            for ((slot, x), y) in row_buf.iter_mut().zip(a.row(i)).zip(b.row(i)) {
                *slot = x * y;
            }
            row_buf[i] = 0.0;
            pairwise_sum(&row_buf)
        })
        .collect();
    let nf = n as f64;
    Ok(DcovStatistic {
        value: pairwise_sum(&row_totals) / (nf * (nf - 3.0)),
        n,
    })
}

/// Convenience: unbiased dCov² between two row-major point sets.
pub fn dcov_from_points(x: &[f64], p: usize, w: &[f64], q: usize) -> Result<DcovStatistic> {
    let a = u_center(&pairwise_distances(x, p)?)?;
    let b = u_center(&pairwise_distances(w, q)?)?;
    dcov_unbiased(&a, &b)
}

/// Monte Carlo estimate of the population dCov² through
/// `E[U(Z,Z') V(W,W')]` with doubly-centered distance kernels.
///
/// `sampler` draws one `(Z, W)` pair. A reference sample of size `m`
/// estimates the conditional means `E(|z - Z|)` and `E|Z - Z'|`; the kernel
/// product is then averaged over `m` further independent pairs of draws.
/// Returns `(estimate, standard_error)`.
pub fn dcov_population_oracle<F>(mut sampler: F, m: usize, seed: u64) -> Result<(f64, f64)>
where
    F: FnMut(&mut StreamRng) -> (Vec<f64>, Vec<f64>),
{
    if m < 1000 {
        return Err(Error::Config(format!(
            "oracle Monte Carlo size must be >= 1000, got {m}"
        )));
    }
    let spec = RngSpec::new(seed);
    let mut ref_rng = spec.stream("oracle-reference", 0);
    let reference: Vec<(Vec<f64>, Vec<f64>)> = (0..m).map(|_| sampler(&mut ref_rng)).collect();

    let dist = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt() };
    let cond_mean_z = |z: &[f64]| reference.iter().map(|(r, _)| dist(z, r)).sum::<f64>() / m as f64;
    let cond_mean_w = |w: &[f64]| reference.iter().map(|(_, r)| dist(w, r)).sum::<f64>() / m as f64;

    // E|Z - Z'| from disjoint halves of an independent draw.
    let mut mix_rng = spec.stream("oracle-grand", 0);
    let (mut gz, mut gw) = (0.0, 0.0);
    for _ in 0..m {
        let (z1, w1) = sampler(&mut mix_rng);
        let (z2, w2) = sampler(&mut mix_rng);
        gz += dist(&z1, &z2);
        gw += dist(&w1, &w2);
    }
    gz /= m as f64;
    gw /= m as f64;

    let mut pair_rng = spec.stream("oracle-pairs", 0);
    let mut products = Vec::with_capacity(m);
    for _ in 0..m {
        let (z, w) = sampler(&mut pair_rng);
        let (z2, w2) = sampler(&mut pair_rng);
        let u = dist(&z, &z2) - cond_mean_z(&z) - cond_mean_z(&z2) + gz;
        let v = dist(&w, &w2) - cond_mean_w(&w) - cond_mean_w(&w2) + gw;
        products.push(u * v);
    }
    let mf = m as f64;
    let mean = products.iter().sum::<f64>() / mf;
    let var = products.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (mf - 1.0);
    Ok((mean, (var / mf).sqrt()))
}
