//! Monte Carlo simulation of the field with zero boundary and empirical
//! variance and covariance estimates.
//!
//! Innovations come from a counter-based stream: the noise of cell `(k, l)`
//! in replicate `r` depends only on `(seed, r, k, l)`, so grids are
//! reproducible regardless of traversal order or worker count.

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_pcg::Pcg64Mcg;
use rayon::prelude::*;
use serde::Serialize;

use crate::budget::MemoryBudget;
use crate::covariance::CovQuery;
use crate::error::{Error, Result};
use crate::params::Params;
use crate::summation::NeumaierSum;

/// Unit-variance, zero-mean innovation laws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    Gaussian,
    Rademacher,
    /// Uniform on `[-sqrt 3, sqrt 3]`.
    UniformCentered,
}

impl NoiseKind {
    pub fn name(&self) -> &'static str {
        match self {
            NoiseKind::Gaussian => "gaussian",
            NoiseKind::Rademacher => "rademacher",
            NoiseKind::UniformCentered => "uniform_centered",
        }
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(NoiseKind::Gaussian),
            "rademacher" => Ok(NoiseKind::Rademacher),
            "uniform_centered" => Ok(NoiseKind::UniformCentered),
            other => Err(Error::InvalidParameter(format!(
                "unknown noise kind {other:?}; expected gaussian, rademacher or uniform_centered"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(kind: NoiseKind, seed: u64) -> Self {
        Self { kind, seed }
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Innovation `eps[k, l]` of replicate `replicate`.
pub fn noise_at(noise: &NoiseSpec, replicate: u64, k: usize, l: usize) -> f64 {
    let key = splitmix(splitmix(splitmix(splitmix(noise.seed) ^ replicate) ^ k as u64) ^ l as u64);
    let mut rng = Pcg64Mcg::seed_from_u64(key);
    match noise.kind {
        NoiseKind::Gaussian => rng.sample(StandardNormal),
        NoiseKind::Rademacher => {
            if rng.random::<bool>() {
                1.0
            } else {
                -1.0
            }
        }
        NoiseKind::UniformCentered => 3f64.sqrt() * (2.0 * rng.random::<f64>() - 1.0),
    }
}

/// `X[k, l]` for `0 <= k <= K`, `0 <= l <= L`, zero on the axes.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    k_max: usize,
    l_max: usize,
    values: Vec<f64>,
}

impl FieldGrid {
    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn get(&self, k: usize, l: usize) -> f64 {
        assert!(
            k <= self.k_max && l <= self.l_max,
            "index ({k}, {l}) out of range"
        );
        self.values[k * (self.l_max + 1) + l]
    }

    pub fn row(&self, k: usize) -> &[f64] {
        let w = self.l_max + 1;
        &self.values[k * w..(k + 1) * w]
    }
}

/// One row of the recursion: `cur[l]` from `prev` (row `k - 1`) and the
/// innovations of row `k`. Index 0 is the boundary.
fn advance_row(
    p: &Params,
    noise: &NoiseSpec,
    replicate: u64,
    k: usize,
    prev: &[f64],
    cur: &mut [f64],
) {
    cur[0] = 0.0;
    for l in 1..cur.len() {
        cur[l] = p.alpha * prev[l]
            + p.beta * cur[l - 1]
            + p.gamma * prev[l - 1]
            + noise_at(noise, replicate, k, l);
    }
}

pub fn generate_field(
    k_max: usize,
    l_max: usize,
    p: &Params,
    noise: &NoiseSpec,
    replicate: u64,
) -> Result<FieldGrid> {
    generate_field_within(k_max, l_max, p, noise, replicate, &MemoryBudget::default())
}

pub fn generate_field_within(
    k_max: usize,
    l_max: usize,
    p: &Params,
    noise: &NoiseSpec,
    replicate: u64,
    budget: &MemoryBudget,
) -> Result<FieldGrid> {
    p.validate()?;
    if k_max == 0 || l_max == 0 {
        return Err(Error::InvalidParameter(format!(
            "need K, L >= 1, got ({k_max}, {l_max})"
        )));
    }
    budget.check_f64s((k_max as u128 + 1) * (l_max as u128 + 1))?;
    let w = l_max + 1;
    let mut values = vec![0.0; (k_max + 1) * w];
    for k in 1..=k_max {
        let (done, rest) = values.split_at_mut(k * w);
        advance_row(p, noise, replicate, k, &done[(k - 1) * w..], &mut rest[..w]);
    }
    Ok(FieldGrid {
        k_max,
        l_max,
        values,
    })
}

/// Runs one replicate with two rolling rows and returns `X` at `a` and `b`.
fn replicate_pair(
    p: &Params,
    noise: &NoiseSpec,
    replicate: u64,
    a: (usize, usize),
    b: (usize, usize),
    bufs: &mut (Vec<f64>, Vec<f64>),
) -> (f64, f64) {
    let k_max = a.0.max(b.0);
    let (prev, cur) = bufs;
    prev.iter_mut().for_each(|x| *x = 0.0);
    let (mut xa, mut xb) = (0.0, 0.0);
    for k in 1..=k_max {
        advance_row(p, noise, replicate, k, prev, cur);
        if k == a.0 {
            xa = cur[a.1];
        }
        if k == b.0 {
            xb = cur[b.1];
        }
        std::mem::swap(prev, cur);
    }
    (xa, xb)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum McTarget {
    Variance { k: usize, l: usize },
    Covariance { query: CovQuery },
}

/// Monte Carlo estimate. `mean` is the sample mean of the first cell,
/// `variance` the sample (co)variance with divisor `reps - 1`, and
/// `std_error` the standard error of `variance`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub target: McTarget,
    pub noise: NoiseSpec,
    pub reps: usize,
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
}

fn check_reps(reps: usize) -> Result<()> {
    if reps < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 replications, got {reps}"
        )));
    }
    Ok(())
}

pub fn mc_variance(
    k: usize,
    l: usize,
    p: &Params,
    noise: &NoiseSpec,
    reps: usize,
) -> Result<McEstimate> {
    mc_variance_within(k, l, p, noise, reps, &MemoryBudget::default())
}

pub fn mc_variance_within(
    k: usize,
    l: usize,
    p: &Params,
    noise: &NoiseSpec,
    reps: usize,
    budget: &MemoryBudget,
) -> Result<McEstimate> {
    let q = CovQuery::diagonal(k, l)?;
    let mut est = mc_estimate(&q, p, noise, reps, budget)?;
    est.target = McTarget::Variance { k, l };
    Ok(est)
}

/// Sample covariance of `X[k1, l1]` and `X[k2, l2]`, both read from the same
/// grid in every replication.
pub fn mc_covariance(
    q: &CovQuery,
    p: &Params,
    noise: &NoiseSpec,
    reps: usize,
) -> Result<McEstimate> {
    mc_covariance_within(q, p, noise, reps, &MemoryBudget::default())
}

pub fn mc_covariance_within(
    q: &CovQuery,
    p: &Params,
    noise: &NoiseSpec,
    reps: usize,
    budget: &MemoryBudget,
) -> Result<McEstimate> {
    let q = CovQuery::new(q.k1, q.l1, q.k2, q.l2)?;
    mc_estimate(&q, p, noise, reps, budget)
}

fn mc_estimate(
    q: &CovQuery,
    p: &Params,
    noise: &NoiseSpec,
    reps: usize,
    budget: &MemoryBudget,
) -> Result<McEstimate> {
    p.validate()?;
    check_reps(reps)?;
    let cols = q.l1.max(q.l2) + 1;
    budget
        .check_f64s(2 * cols as u128 * rayon::current_num_threads() as u128 + 2 * reps as u128)?;
    let (a, b) = ((q.k1, q.l1), (q.k2, q.l2));
    let samples: Vec<(f64, f64)> = (0..reps as u64)
        .into_par_iter()
        .map_init(
            || (vec![0.0; cols], vec![0.0; cols]),
            |bufs, r| replicate_pair(p, noise, r, a, b, bufs),
        )
        .collect();
    let moments = Moments::of(&samples);
    let std_error = match noise.kind {
        NoiseKind::Gaussian => moments.gaussian_std_error(),
        _ => moments.jackknife_std_error(),
    };
    Ok(McEstimate {
        target: McTarget::Covariance { query: *q },
        noise: *noise,
        reps,
        mean: moments.mean_x,
        variance: moments.cov,
        std_error,
    })
}

/// Centered sample moments of paired draws.
struct Moments {
    n: f64,
    mean_x: f64,
    dx: Vec<f64>,
    dy: Vec<f64>,
    var_x: f64,
    var_y: f64,
    cov: f64,
}

impl Moments {
    fn of(samples: &[(f64, f64)]) -> Self {
        let n = samples.len() as f64;
        let mean_x = samples.iter().map(|s| s.0).sum::<NeumaierSum>().value() / n;
        let mean_y = samples.iter().map(|s| s.1).sum::<NeumaierSum>().value() / n;
        let dx: Vec<f64> = samples.iter().map(|s| s.0 - mean_x).collect();
        let dy: Vec<f64> = samples.iter().map(|s| s.1 - mean_y).collect();
        let dot = |u: &[f64], v: &[f64]| {
            u.iter()
                .zip(v)
                .map(|(a, b)| a * b)
                .sum::<NeumaierSum>()
                .value()
                / (n - 1.0)
        };
        Self {
            n,
            mean_x,
            var_x: dot(&dx, &dx),
            var_y: dot(&dy, &dy),
            cov: dot(&dx, &dy),
            dx,
            dy,
        }
    }

    /// Normal-theory standard error; reduces to `var sqrt(2 / (n - 1))` on
    /// the diagonal.
    fn gaussian_std_error(&self) -> f64 {
        ((self.var_x * self.var_y + self.cov * self.cov) / (self.n - 1.0)).sqrt()
    }

    /// Leave-one-out jackknife of the sample covariance. With two draws the
    /// leave-one-out estimates are undefined and the normal-theory value is
    /// returned.
    fn jackknife_std_error(&self) -> f64 {
        let n = self.n;
        if n < 3.0 {
            return self.gaussian_std_error();
        }
        let s = self.cov * (n - 1.0);
        // removing draw i: (S - n/(n-1) dx_i dy_i) / (n - 2)
        let loo: Vec<f64> = self
            .dx
            .iter()
            .zip(&self.dy)
            .map(|(x, y)| (s - n / (n - 1.0) * x * y) / (n - 2.0))
            .collect();
        let mean = loo.iter().copied().sum::<NeumaierSum>().value() / n;
        let ss = loo
            .iter()
            .map(|v| (v - mean) * (v - mean))
            .sum::<NeumaierSum>()
            .value();
        ((n - 1.0) / n * ss).sqrt()
    }
}
