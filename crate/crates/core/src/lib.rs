//! Unilateral spatial autoregressive field
//!
//! ```text
//! X[k,l] = alpha X[k-1,l] + beta X[k,l-1] + gamma X[k-1,l-1] + eps[k,l],   X[k,0] = X[0,l] = 0,
//! ```
//!
//! its moving-average coefficients, exact variances and covariances, and the
//! limits of the normalized variances on and inside the boundary of the
//! stability domain.

pub mod asymptotics;
pub mod binomial;
pub mod budget;
pub mod covariance;
pub mod error;
pub mod macoef;
pub mod params;
pub mod simulate;
pub mod special;
pub mod summation;

pub use asymptotics::{
    convergence_study, limit_edge, limit_face, limit_trivial_gamma_edge, limit_vertex,
    sigma2_stable, variance_limit, ConvergenceReport, ConvergenceRow, ScaledQuery, VarianceLimit,
};
pub use binomial::{pmf_binomial, BinomialSumSpec, CltErrorProfile};
pub use budget::{MemoryBudget, MEM_BUDGET_ENV};
pub use covariance::{
    check_bounds, cov_edge, cov_exact, cov_vertex, var_table, BoundRegime, BoundReport, CovQuery,
    VarianceTable,
};
pub use error::{Error, Result};
pub use macoef::{
    g_binomial, g_direct, g_face, g_hypergeom, g_table, CoeffMethod, CoeffTable, RowStream,
};
pub use params::{
    canonicalize, classify, Axis, DomainClass, DomainKind, MissingFaceVariant, Params, Rho,
    SignMap, DEFAULT_TOL,
};
pub use simulate::{
    generate_field, mc_covariance, mc_covariance_within, mc_variance, mc_variance_within,
    FieldGrid, McEstimate, McTarget, NoiseKind, NoiseSpec,
};
pub use special::{g_gamma_edge, g_missing_face, jacobi_p0b, var_gamma_edge, JacobiEvalSpec};
pub use summation::NeumaierSum;
