//! Exact laws of sums of two independent binomials and their discrete
//! normal (local CLT) approximation.
//!
//! Probabilities are generated by a multiplicative recurrence started at the
//! mode and normalized by their total, which keeps the relative error of far
//! tail values small (no `exp` of a large log-gamma difference).

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::summation::NeumaierSum;

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "binomial success probability must lie in [0, 1], got {p}"
        )))
    }
}

/// Full probability vector of `Bin(n, p)`, indices `0..=n`.
pub fn binomial_pmf_vec(n: usize, p: f64) -> Result<Vec<f64>> {
    check_probability(p)?;
    let mut w = vec![0.0; n + 1];
    if p == 0.0 {
        w[0] = 1.0;
        return Ok(w);
    }
    if p == 1.0 {
        w[n] = 1.0;
        return Ok(w);
    }
    let mode = (((n + 1) as f64 * p).floor() as usize).min(n);
    let odds = p / (1.0 - p);
    w[mode] = 1.0;
    // upward: w[j+1] = w[j] (n-j)/(j+1) * odds
    for j in mode..n {
        w[j + 1] = w[j] * ((n - j) as f64 / (j + 1) as f64) * odds;
    }
    // downward: w[j-1] = w[j] j/(n-j+1) / odds
    for j in (1..=mode).rev() {
        w[j - 1] = w[j] * (j as f64 / (n - j + 1) as f64) / odds;
    }
    let total = w.iter().copied().sum::<NeumaierSum>().value();
    for x in &mut w {
        *x /= total;
    }
    Ok(w)
}

/// `P(Bin(n, p) = j)`; zero outside `0..=n`.
pub fn pmf_binomial(n: usize, p: f64, j: i64) -> Result<f64> {
    check_probability(p)?;
    if j < 0 || j as u64 > n as u64 {
        return Ok(0.0);
    }
    Ok(binomial_pmf_vec(n, p)?[j as usize])
}

/// `S = xi + eta` with independent `xi ~ Bin(k, nu)` and `eta ~ Bin(l, mu)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinomialSumSpec {
    pub k: usize,
    pub l: usize,
    pub nu: f64,
    pub mu: f64,
}

impl BinomialSumSpec {
    pub fn new(k: usize, l: usize, nu: f64, mu: f64) -> Result<Self> {
        check_probability(nu)?;
        check_probability(mu)?;
        Ok(Self { k, l, nu, mu })
    }

    pub fn mean(&self) -> f64 {
        self.k as f64 * self.nu + self.l as f64 * self.mu
    }

    pub fn variance(&self) -> f64 {
        self.k as f64 * self.nu * (1.0 - self.nu) + self.l as f64 * self.mu * (1.0 - self.mu)
    }

    /// `(j - mean) / sqrt(variance)`.
    pub fn standardize(&self, j: f64) -> f64 {
        (j - self.mean()) / self.variance().sqrt()
    }

    pub fn support_max(&self) -> usize {
        self.k + self.l
    }

    /// `P(S = j)` by exact convolution; zero outside the support.
    pub fn pmf(&self, j: i64) -> f64 {
        if j < 0 || j as u64 > self.support_max() as u64 {
            return 0.0;
        }
        let j = j as usize;
        let xi = binomial_pmf_vec(self.k, self.nu).expect("validated");
        let eta = binomial_pmf_vec(self.l, self.mu).expect("validated");
        convolve_at(&xi, &eta, j)
    }

    /// The whole law of `S`, indices `0..=k+l`.
    pub fn pmf_all(&self) -> Vec<f64> {
        let xi = binomial_pmf_vec(self.k, self.nu).expect("validated");
        let eta = binomial_pmf_vec(self.l, self.mu).expect("validated");
        (0..=self.support_max())
            .map(|j| convolve_at(&xi, &eta, j))
            .collect()
    }

    /// Discrete normal approximation `exp(-x^2/2) / sqrt(2 pi b)`.
    pub fn local_clt_density(&self, j: i64) -> Result<f64> {
        let b = self.variance();
        if b <= 0.0 {
            return domain("local CLT density needs a positive variance");
        }
        let x = self.standardize(j as f64);
        Ok((-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI * b).sqrt())
    }

    /// Scans the support for the largest local CLT error.
    pub fn clt_error_profile(&self) -> Result<CltErrorProfile> {
        let b = self.variance();
        if b <= 0.0 {
            return domain("local CLT error profile needs a positive variance");
        }
        let law = self.pmf_all();
        let mut sup_error = 0.0f64;
        let mut argmax = 0;
        for (j, &pj) in law.iter().enumerate() {
            let e = (pj - self.local_clt_density(j as i64)?).abs();
            if e > sup_error {
                sup_error = e;
                argmax = j;
            }
        }
        Ok(CltErrorProfile {
            sup_error,
            argmax,
            b,
            product: sup_error * b,
        })
    }
}

/// `sum_r xi[r] eta[j - r]`.
pub(crate) fn convolve_at(xi: &[f64], eta: &[f64], j: usize) -> f64 {
    let lo = j.saturating_sub(eta.len() - 1);
    let hi = j.min(xi.len() - 1);
    if lo > hi {
        return 0.0;
    }
    (lo..=hi)
        .map(|r| xi[r] * eta[j - r])
        .sum::<NeumaierSum>()
        .value()
}

/// Sup-norm local CLT error and its product with the variance, an empirical
/// stand-in for the unquantified constant of the `O(1/b)` bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CltErrorProfile {
    pub sup_error: f64,
    pub argmax: usize,
    pub b: f64,
    pub product: f64,
}
