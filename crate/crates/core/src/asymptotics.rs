//! Limits of `n^(-2 rho) Var(X[[ns], [nt]])` in each regime and
//! convergence studies against exact variances.

use std::f64::consts::PI;

use serde::Serialize;

use crate::budget::MemoryBudget;
use crate::covariance::variance_points;
use crate::error::{domain, Error, Result};
use crate::params::{
    canonicalize, classify, Axis, DomainClass, DomainKind, Params, Rho, DEFAULT_TOL,
};

/// Below this value of `|alpha| + |beta|` the face limit is not evaluated.
pub const FACE_DEGENERACY_FLOOR: f64 = 1e-8;

/// The point `(s, t)` of the scaled field at resolution `n`, i.e. grid index
/// `([ns], [nt])`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaledQuery {
    pub s: f64,
    pub t: f64,
    pub n: u64,
}

impl ScaledQuery {
    pub fn new(s: f64, t: f64, n: u64) -> Result<Self> {
        check_st(s, t)?;
        let q = Self { s, t, n };
        q.grid_index()?;
        Ok(q)
    }

    /// `([ns], [nt])`, both required to be at least one.
    pub fn grid_index(&self) -> Result<(usize, usize)> {
        let n = self.n as f64;
        let (k, l) = ((n * self.s).floor(), (n * self.t).floor());
        if k < 1.0 || l < 1.0 {
            return Err(Error::InvalidParameter(format!(
                "grid index ([ns], [nt]) = ({k}, {l}) at n = {}, s = {}, t = {} must be at least 1",
                self.n, self.s, self.t
            )));
        }
        if k >= usize::MAX as f64 || l >= usize::MAX as f64 {
            return Err(Error::InvalidParameter(format!(
                "grid index ({k}, {l}) is too large"
            )));
        }
        Ok((k as usize, l as usize))
    }
}

fn check_st(s: f64, t: f64) -> Result<()> {
    if s > 0.0 && t > 0.0 && s.is_finite() && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "s and t must be positive and finite, got ({s}, {t})"
        )))
    }
}

fn class_of(p: &Params) -> Result<DomainClass> {
    classify(p, DEFAULT_TOL)
}

/// Variance of the stationary field,
/// `((1+a+b-c)(1+a-b+c)(1-a+b+c)(1-a-b-c))^(-1/2)`.
pub fn sigma2_stable(p: &Params) -> Result<f64> {
    let class = class_of(p)?;
    if class.kind != DomainKind::Stable {
        return domain(format!(
            "stationary variance needs a stable triple, got {}",
            class.kind.name()
        ));
    }
    let (a, b, c) = (p.alpha, p.beta, p.gamma);
    let product = (1.0 + a + b - c) * (1.0 + a - b + c) * (1.0 - a + b + c) * (1.0 - a - b - c);
    Ok(1.0 / product.sqrt())
}

/// Limit of `n^(-1/2) Var`,
/// `min(sqrt((1-|a|)s), sqrt((1-|b|)t)) / (sqrt(pi) sqrt(|a|+|b|) (1-|a|)(1-|b|))`.
pub fn limit_face(p: &Params, s: f64, t: f64) -> Result<f64> {
    check_st(s, t)?;
    let class = class_of(p)?;
    if !matches!(class.kind, DomainKind::FaceA { .. }) {
        return domain(format!(
            "face limit needs a face point with a known limit, got {}",
            class.kind.name()
        ));
    }
    let (a, b) = (p.alpha.abs(), p.beta.abs());
    if a + b < FACE_DEGENERACY_FLOOR {
        return domain(format!(
            "face limit degenerates at |alpha| + |beta| = {}",
            a + b
        ));
    }
    let numer = ((1.0 - a) * s).sqrt().min(((1.0 - b) * t).sqrt());
    Ok(numer / (PI.sqrt() * (a + b).sqrt() * (1.0 - a) * (1.0 - b)))
}

/// Limit of `n^(-1) Var`: `s / (1 - gamma^2)` on the `alpha` edge and
/// `t / (1 - gamma^2)` on the `beta` edge.
pub fn limit_edge(p: &Params, s: f64, t: f64) -> Result<f64> {
    check_st(s, t)?;
    let class = class_of(p)?;
    let g2 = p.gamma * p.gamma;
    match class.kind {
        DomainKind::EdgeB { axis: Axis::Alpha } => Ok(s / (1.0 - g2)),
        DomainKind::EdgeB { axis: Axis::Beta } => Ok(t / (1.0 - g2)),
        DomainKind::EdgeB { axis: Axis::Gamma } | DomainKind::MissingGammaEdge => Err(
            Error::Unsupported("no variance limit is known on the gamma edge".into()),
        ),
        DomainKind::TrivialGammaEdge => Err(Error::Unsupported(
            "use the trivial gamma edge limit min(s, t) for alpha = beta = 0".into(),
        )),
        other => domain(format!(
            "edge limit needs an alpha or beta edge, got {}",
            other.name()
        )),
    }
}

/// Limit of `n^(-2) Var` at a vertex: the Wiener sheet variance `s t`.
pub fn limit_vertex(s: f64, t: f64) -> f64 {
    s * t
}

/// Limit of `n^(-1) Var` for `alpha = beta = 0`, `|gamma| = 1`.
pub fn limit_trivial_gamma_edge(s: f64, t: f64) -> f64 {
    s.min(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum VarianceLimit {
    Known {
        class: DomainClass,
        rho: Rho,
        value: f64,
    },
    Unknown {
        class: DomainClass,
    },
}

impl VarianceLimit {
    pub fn value(&self) -> Option<f64> {
        match self {
            VarianceLimit::Known { value, .. } => Some(*value),
            VarianceLimit::Unknown { .. } => None,
        }
    }

    pub fn class(&self) -> DomainClass {
        match self {
            VarianceLimit::Known { class, .. } | VarianceLimit::Unknown { class } => *class,
        }
    }
}

/// Dispatches on the regime of `p`, evaluated at its canonical representative.
pub fn variance_limit(p: &Params, s: f64, t: f64) -> Result<VarianceLimit> {
    check_st(s, t)?;
    let (canon, _) = canonicalize(p);
    let class = class_of(&canon)?;
    let value = match class.kind {
        DomainKind::Stable => sigma2_stable(&canon)?,
        DomainKind::FaceA { .. } => limit_face(&canon, s, t)?,
        DomainKind::EdgeB {
            axis: Axis::Alpha | Axis::Beta,
        } => limit_edge(&canon, s, t)?,
        DomainKind::VertexC => limit_vertex(s, t),
        DomainKind::TrivialGammaEdge => limit_trivial_gamma_edge(s, t),
        _ => return Ok(VarianceLimit::Unknown { class }),
    };
    Ok(VarianceLimit::Known {
        class,
        rho: class.rho,
        value,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: u64,
    pub var_exact: f64,
    pub scaled: f64,
    pub limit: f64,
    pub abs_err: f64,
    pub rel_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub params: Params,
    pub class: DomainClass,
    pub rho: Rho,
    pub s: f64,
    pub t: f64,
    pub rows: Vec<ConvergenceRow>,
}

pub fn convergence_study(p: &Params, s: f64, t: f64, n_list: &[u64]) -> Result<ConvergenceReport> {
    convergence_study_within(p, s, t, n_list, &MemoryBudget::default())
}

/// Exact `Var(X[[ns], [nt]])` for each `n`, scaled by `n^(-2 rho)` and
/// compared to the limit. All grid sizes share one streaming pass.
pub fn convergence_study_within(
    p: &Params,
    s: f64,
    t: f64,
    n_list: &[u64],
    budget: &MemoryBudget,
) -> Result<ConvergenceReport> {
    if n_list.is_empty() {
        return Err(Error::InvalidParameter("n list is empty".into()));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(format!(
            "n list must be strictly ascending, got {n_list:?}"
        )));
    }
    let (limit, class) = match variance_limit(p, s, t)? {
        VarianceLimit::Known { value, class, .. } => (value, class),
        VarianceLimit::Unknown { class } => {
            return domain(format!(
                "no variance limit is known for {}",
                class.kind.name()
            ));
        }
    };
    let points = n_list
        .iter()
        .map(|&n| ScaledQuery::new(s, t, n)?.grid_index())
        .collect::<Result<Vec<_>>>()?;
    let exact = variance_points(p, &points, budget)?;
    let rows = n_list
        .iter()
        .zip(exact)
        .map(|(&n, var_exact)| {
            let scaled = var_exact * class.rho.variance_scale(n).expect("known regime");
            let abs_err = (scaled - limit).abs();
            ConvergenceRow {
                n,
                var_exact,
                scaled,
                limit,
                abs_err,
                rel_err: abs_err / limit.abs(),
            }
        })
        .collect();
    Ok(ConvergenceReport {
        params: *p,
        class,
        rho: class.rho,
        s,
        t,
        rows,
    })
}
