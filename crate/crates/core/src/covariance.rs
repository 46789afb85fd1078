//! Exact covariances of the field,
//!
//! ```text
//! Cov(X[k1,l1], X[k2,l2]) = sum_{i=1}^{k1 ^ k2} sum_{j=1}^{l1 ^ l2} G(k1-i, l1-j) G(k2-i, l2-j),
//! ```
//!
//! closed forms on edges and vertices, and empirical checks of the
//! covariance bounds in each regime.

use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64Mcg;
use serde::Serialize;

use crate::budget::MemoryBudget;
use crate::error::{domain, Error, Result};
use crate::macoef::{g_table_within, CoeffTable, RowStream};
use crate::params::{classify, Axis, DomainClass, DomainKind, Params, DEFAULT_TOL};
use crate::summation::NeumaierSum;

/// Index quadruple `(k1, l1, k2, l2)`, all at least one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct CovQuery {
    pub k1: usize,
    pub l1: usize,
    pub k2: usize,
    pub l2: usize,
}

impl CovQuery {
    pub fn new(k1: usize, l1: usize, k2: usize, l2: usize) -> Result<Self> {
        if k1 == 0 || l1 == 0 || k2 == 0 || l2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "grid indices start at 1, got ({k1}, {l1}, {k2}, {l2})"
            )));
        }
        Ok(Self { k1, l1, k2, l2 })
    }

    /// The variance query at `(k, l)`.
    pub fn diagonal(k: usize, l: usize) -> Result<Self> {
        Self::new(k, l, k, l)
    }

    pub fn k_min(&self) -> usize {
        self.k1.min(self.k2)
    }

    pub fn l_min(&self) -> usize {
        self.l1.min(self.l2)
    }

    pub fn k_gap(&self) -> usize {
        self.k1.abs_diff(self.k2)
    }

    pub fn l_gap(&self) -> usize {
        self.l1.abs_diff(self.l2)
    }
}

/// `Cov(X[k1,l1], X[k2,l2])` from a coefficient table covering both points.
pub(crate) fn cov_from_table(table: &CoeffTable, q: &CovQuery) -> f64 {
    debug_assert!(table.rows() >= q.k1.max(q.k2) && table.cols() >= q.l1.max(q.l2));
    let mut acc = NeumaierSum::new();
    for i in 1..=q.k_min() {
        let r1 = table.row(q.k1 - i);
        let r2 = table.row(q.k2 - i);
        for j in 1..=q.l_min() {
            acc += r1[q.l1 - j] * r2[q.l2 - j];
        }
    }
    acc.value()
}

pub fn cov_exact(q: &CovQuery, p: &Params) -> Result<f64> {
    cov_exact_within(q, p, &MemoryBudget::default())
}

/// Exact covariance by double summation over one coefficient table of size
/// `max(k1,k2) x max(l1,l2)`.
pub fn cov_exact_within(q: &CovQuery, p: &Params, budget: &MemoryBudget) -> Result<f64> {
    let q = CovQuery::new(q.k1, q.l1, q.k2, q.l2)?;
    let table = g_table_within(q.k1.max(q.k2) - 1, q.l1.max(q.l2) - 1, p, budget)?;
    Ok(cov_from_table(&table, &q))
}

/// `Var(X[k, l])` for `1 <= k <= K`, `1 <= l <= L`.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceTable {
    pub params: Params,
    k_max: usize,
    l_max: usize,
    var: Vec<f64>,
}

impl VarianceTable {
    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    /// `Var(X[k, l])`, 1-based indices.
    pub fn get(&self, k: usize, l: usize) -> f64 {
        assert!(
            (1..=self.k_max).contains(&k) && (1..=self.l_max).contains(&l),
            "index ({k}, {l}) out of range"
        );
        self.var[(k - 1) * self.l_max + (l - 1)]
    }

    /// Row `k` as a slice over `l = 1..=L`.
    pub fn row(&self, k: usize) -> &[f64] {
        &self.var[(k - 1) * self.l_max..k * self.l_max]
    }
}

pub fn var_table(k_max: usize, l_max: usize, p: &Params) -> Result<VarianceTable> {
    var_table_within(k_max, l_max, p, &MemoryBudget::default())
}

/// All variances up to `(K, L)` in one streaming pass over the rows of `G`:
/// `Var(X[k,l]) = sum_{m<k} sum_{n<l} G(m,n)^2`.
pub fn var_table_within(
    k_max: usize,
    l_max: usize,
    p: &Params,
    budget: &MemoryBudget,
) -> Result<VarianceTable> {
    p.validate()?;
    if k_max == 0 || l_max == 0 {
        return Err(Error::InvalidParameter(format!(
            "variance table needs K, L >= 1, got ({k_max}, {l_max})"
        )));
    }
    budget.check_f64s(k_max as u128 * l_max as u128 + 4 * l_max as u128)?;
    let mut var = Vec::with_capacity(k_max * l_max);
    let mut running = vec![NeumaierSum::new(); l_max];
    let mut stream = RowStream::new(p, l_max);
    for _ in 0..k_max {
        let row = stream.next_row();
        let mut prefix = 0.0;
        for (acc, g) in running.iter_mut().zip(row) {
            prefix += g * g;
            *acc += prefix;
        }
        var.extend(running.iter().map(NeumaierSum::value));
    }
    Ok(VarianceTable {
        params: *p,
        k_max,
        l_max,
        var,
    })
}

/// `Var(X[k, l])` at each requested point in a single streaming pass with
/// `O(max l)` memory. Output order follows `points`.
pub fn variance_points(
    p: &Params,
    points: &[(usize, usize)],
    budget: &MemoryBudget,
) -> Result<Vec<f64>> {
    p.validate()?;
    if let Some(&(k, l)) = points.iter().find(|(k, l)| *k == 0 || *l == 0) {
        return Err(Error::InvalidParameter(format!(
            "grid indices start at 1, got ({k}, {l})"
        )));
    }
    let Some(l_max) = points.iter().map(|&(_, l)| l).max() else {
        return Ok(Vec::new());
    };
    budget.check_f64s(4 * l_max as u128)?;
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by_key(|&i| points[i].0);

    let mut out = vec![0.0; points.len()];
    // column sums of G^2 over the rows consumed so far
    let mut columns = vec![NeumaierSum::new(); l_max];
    let mut stream = RowStream::new(p, l_max);
    let mut rows_done = 0;
    for i in order {
        let (k, l) = points[i];
        while rows_done < k {
            for (acc, g) in columns.iter_mut().zip(stream.next_row()) {
                *acc += g * g;
            }
            rows_done += 1;
        }
        out[i] = columns[..l]
            .iter()
            .map(NeumaierSum::value)
            .sum::<NeumaierSum>()
            .value();
    }
    Ok(out)
}

fn regime(p: &Params) -> Result<DomainClass> {
    classify(p, DEFAULT_TOL)
}

/// Closed form on the `alpha` or `beta` edge (including the degenerate
/// `|alpha| = 1, beta = gamma = 0` and its mirror).
pub fn cov_edge(q: &CovQuery, p: &Params) -> Result<f64> {
    let q = CovQuery::new(q.k1, q.l1, q.k2, q.l2)?;
    let class = regime(p)?;
    // power sums: sum_{j=0}^{len-1} x^(2j) = (1 - x^(2 len)) / (1 - x^2)
    let geometric = |x: f64, len: usize| {
        let x2 = x * x;
        if x2 == 0.0 {
            1.0
        } else {
            (1.0 - x2.powi(len as i32)) / (1.0 - x2)
        }
    };
    match class.kind {
        DomainKind::EdgeB { axis: Axis::Alpha } => Ok(q.k_min() as f64
            * p.alpha.powi(q.k_gap() as i32)
            * p.beta.powi(q.l_gap() as i32)
            * geometric(p.beta, q.l_min())),
        DomainKind::EdgeB { axis: Axis::Beta } => Ok(q.l_min() as f64
            * p.beta.powi(q.l_gap() as i32)
            * p.alpha.powi(q.k_gap() as i32)
            * geometric(p.alpha, q.k_min())),
        other => domain(format!(
            "edge closed form needs an alpha or beta edge, got {}",
            other.name()
        )),
    }
}

/// `(k1 ^ k2)(l1 ^ l2) alpha^|k1-k2| beta^|l1-l2|` at a vertex.
pub fn cov_vertex(q: &CovQuery, p: &Params) -> Result<f64> {
    let q = CovQuery::new(q.k1, q.l1, q.k2, q.l2)?;
    let class = regime(p)?;
    if class.kind != DomainKind::VertexC {
        return domain(format!(
            "vertex closed form needs a vertex, got {}",
            class.kind.name()
        ));
    }
    let sign_a = if p.alpha < 0.0 && q.k_gap() % 2 == 1 {
        -1.0
    } else {
        1.0
    };
    let sign_b = if p.beta < 0.0 && q.l_gap() % 2 == 1 {
        -1.0
    } else {
        1.0
    };
    Ok(sign_a * sign_b * (q.k_min() as f64) * (q.l_min() as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundRegime {
    Stable,
    Face,
    Edge,
    Vertex,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LadderStep {
    pub index_max: usize,
    pub max_ratio: f64,
}

/// Outcome of [`check_bounds`].
///
/// `max_ratio` is `|cov| / bound` for the stable and edge bounds,
/// `|cov| / sqrt(k1 + l1 + k2 + l2)` on faces (whose constant is not known
/// explicitly) and `|cov - closed form|` at vertices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub params: Params,
    pub class: DomainClass,
    pub regime: BoundRegime,
    pub n_samples: usize,
    pub index_max: usize,
    pub seed: u64,
    pub violations: usize,
    pub max_abs_cov: f64,
    pub max_ratio: f64,
    /// Face regime only: max ratio at `index_max / 4`, `index_max / 2`, `index_max`.
    pub ladder: Vec<LadderStep>,
    pub passed: bool,
    pub note: String,
}

fn sample_queries(n: usize, index_max: usize, seed: u64) -> Vec<CovQuery> {
    let mut rng = Pcg64Mcg::seed_from_u64(seed);
    (0..n)
        .map(|_| CovQuery {
            k1: rng.random_range(1..=index_max),
            l1: rng.random_range(1..=index_max),
            k2: rng.random_range(1..=index_max),
            l2: rng.random_range(1..=index_max),
        })
        .collect()
}

/// Samples index quadruples uniformly from `[1, index_max]^4` and checks the
/// covariance bound of the regime of `p` against exact covariances.
pub fn check_bounds(
    p: &Params,
    n_samples: usize,
    index_max: usize,
    seed: u64,
) -> Result<BoundReport> {
    check_bounds_within(p, n_samples, index_max, seed, &MemoryBudget::default())
}

pub fn check_bounds_within(
    p: &Params,
    n_samples: usize,
    index_max: usize,
    seed: u64,
    budget: &MemoryBudget,
) -> Result<BoundReport> {
    let class = regime(p)?;
    if index_max == 0 || n_samples == 0 {
        return Err(Error::InvalidParameter(
            "need n_samples >= 1 and index_max >= 1".into(),
        ));
    }
    let table = g_table_within(index_max - 1, index_max - 1, p, budget)?;
    let queries = sample_queries(n_samples, index_max, seed);
    let covs: Vec<f64> = queries.iter().map(|q| cov_from_table(&table, q)).collect();
    let max_abs_cov = covs.iter().fold(0.0f64, |m, c| m.max(c.abs()));

    let mut report = BoundReport {
        params: *p,
        class,
        regime: BoundRegime::Stable,
        n_samples,
        index_max,
        seed,
        violations: 0,
        max_abs_cov,
        max_ratio: 0.0,
        ladder: Vec::new(),
        passed: false,
        note: String::new(),
    };

    match class.kind {
        DomainKind::Stable => {
            let s = p.abs_sum();
            if s >= 1.0 {
                return domain(format!(
                    "stable covariance bound needs |alpha|+|beta|+|gamma| < 1, got {s}"
                ));
            }
            let denom = (1.0 - s) * (1.0 - s);
            for (q, c) in queries.iter().zip(&covs) {
                let bound = s.powf((q.k_gap() + q.l_gap()) as f64 / 2.0) / denom;
                report.max_ratio = report.max_ratio.max(c.abs() / bound);
                if c.abs() > bound {
                    report.violations += 1;
                }
            }
            report.passed = report.violations == 0;
            report.note =
                "|cov| <= s^((|k1-k2|+|l1-l2|)/2) / (1-s)^2 with s = |alpha|+|beta|+|gamma|".into();
        }
        DomainKind::EdgeB { axis } => {
            report.regime = BoundRegime::Edge;
            let g = p.gamma.abs();
            for (q, c) in queries.iter().zip(&covs) {
                let bound = match axis {
                    Axis::Alpha => q.k_min() as f64 * g.powi(q.l_gap() as i32),
                    _ => q.l_min() as f64 * g.powi(q.k_gap() as i32),
                } / (1.0 - g * g);
                report.max_ratio = report.max_ratio.max(c.abs() / bound);
                if c.abs() > bound {
                    report.violations += 1;
                }
            }
            report.passed = report.violations == 0;
            report.note = match axis {
                Axis::Alpha => "|cov| <= (k1^k2) |gamma|^|l1-l2| / (1-gamma^2)".into(),
                _ => "|cov| <= (l1^l2) |gamma|^|k1-k2| / (1-gamma^2)".into(),
            };
        }
        DomainKind::VertexC => {
            report.regime = BoundRegime::Vertex;
            for (q, c) in queries.iter().zip(&covs) {
                let exact = cov_vertex(q, p)?;
                report.max_ratio = report.max_ratio.max((c - exact).abs());
                if *c != exact {
                    report.violations += 1;
                }
            }
            report.passed = report.violations == 0;
            report.note = "cov equals (k1^k2)(l1^l2) alpha^|k1-k2| beta^|l1-l2| exactly".into();
        }
        DomainKind::FaceA { .. } => {
            report.regime = BoundRegime::Face;
            let ratio = |qs: &[CovQuery], cs: &[f64]| {
                qs.iter()
                    .zip(cs)
                    .map(|(q, c)| c.abs() / ((q.k1 + q.l1 + q.k2 + q.l2) as f64).sqrt())
                    .fold(0.0f64, f64::max)
            };
            report.max_ratio = ratio(&queries, &covs);
            let mut levels = vec![(index_max / 4).max(1), (index_max / 2).max(1)];
            levels.dedup();
            levels.retain(|&m| m < index_max);
            for level in levels {
                let qs = sample_queries(n_samples, level, seed);
                let cs: Vec<f64> = qs.iter().map(|q| cov_from_table(&table, q)).collect();
                report.ladder.push(LadderStep {
                    index_max: level,
                    max_ratio: ratio(&qs, &cs),
                });
            }
            report.ladder.push(LadderStep {
                index_max,
                max_ratio: report.max_ratio,
            });
            let base = report.ladder[0].max_ratio;
            report.passed = report.max_ratio <= 2.0 * base;
            report.note = "face constant is not explicit: checks that max |cov|/sqrt(k1+l1+k2+l2) \
                           at index_max stays within twice its value at index_max/4"
                .into();
        }
        other => {
            return domain(format!(
                "no covariance bound is available for {}",
                other.name()
            ));
        }
    }
    Ok(report)
}
