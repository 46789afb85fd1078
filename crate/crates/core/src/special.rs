//! Exact representations on the boundary pieces without a variance limit:
//! alternating binomial sums on the sign-mixed faces and Jacobi polynomials
//! on the `gamma = -1` edge.

use serde::Serialize;
use twofloat::TwoFloat;

use crate::error::{domain, Error, Result};
use crate::params::{Params, DEFAULT_TOL};
use crate::summation::NeumaierSum;

/// Largest index accepted by [`g_missing_face`]; past it the alternating sum
/// loses all significant digits.
pub const MISSING_FACE_MAX_INDEX: usize = 200;

/// `P_n^(0,b)(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JacobiEvalSpec {
    pub degree: usize,
    pub b: usize,
    pub x: f64,
}

impl JacobiEvalSpec {
    pub fn eval(&self) -> f64 {
        jacobi_p0b(self.degree, self.b, self.x)
    }
}

/// `scale * P_j^(0,b)(x)` for `j = 0, 1, 2, ...` by the three-term
/// recurrence in the degree.
struct JacobiSeq {
    b: f64,
    x: f64,
    next: usize,
    prev: f64,
    cur: f64,
}

impl JacobiSeq {
    fn new(b: usize, x: f64, scale: f64) -> Self {
        Self {
            b: b as f64,
            x,
            next: 0,
            prev: 0.0,
            cur: scale,
        }
    }
}

impl Iterator for JacobiSeq {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let n = self.next;
        let (b, x) = (self.b, self.x);
        let value = match n {
            0 => self.cur,
            1 => self.cur * ((b + 2.0) * x - b) / 2.0,
            _ => {
                let nf = n as f64;
                let s = 2.0 * nf + b;
                let lead = 2.0 * nf * (nf + b) * (s - 2.0);
                let mid = (s - 1.0) * (s * (s - 2.0) * x - b * b);
                let back = 2.0 * (nf - 1.0) * (nf + b - 1.0) * s;
                (mid * self.cur - back * self.prev) / lead
            }
        };
        if n > 0 {
            self.prev = self.cur;
            self.cur = value;
        }
        self.next += 1;
        Some(value)
    }
}

/// Jacobi polynomial `P_n^(0,b)(x)`.
pub fn jacobi_p0b(n: usize, b: usize, x: f64) -> f64 {
    JacobiSeq::new(b, x, 1.0).nth(n).expect("infinite sequence")
}

/// `G(m, n; alpha, alpha, -1) = alpha^|m-n| P_{m^n}^(0,|m-n|)(2 alpha^2 - 1)`.
pub fn g_gamma_edge(m: usize, n: usize, alpha: f64) -> f64 {
    let b = m.abs_diff(n);
    let x = 2.0 * alpha * alpha - 1.0;
    JacobiSeq::new(b, x, alpha.powi(b as i32))
        .nth(m.min(n))
        .expect("infinite sequence")
}

/// `Var(X[K, L])` at `(alpha, alpha, -1)` as the double sum of squared Jacobi
/// values, one recurrence per diagonal `m - n = d`.
pub fn var_gamma_edge(k_max: usize, l_max: usize, alpha: f64) -> Result<f64> {
    if !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "alpha must be finite, got {alpha}"
        )));
    }
    if k_max == 0 || l_max == 0 {
        return Err(Error::InvalidParameter(format!(
            "need K, L >= 1, got ({k_max}, {l_max})"
        )));
    }
    let x = 2.0 * alpha * alpha - 1.0;
    let mut acc = NeumaierSum::new();
    for d in -(l_max as i64 - 1)..=(k_max as i64 - 1) {
        let b = d.unsigned_abs() as usize;
        let len = if d >= 0 {
            l_max.min(k_max - b)
        } else {
            k_max.min(l_max - b)
        };
        for q in JacobiSeq::new(b, x, alpha.powi(b as i32)).take(len) {
            acc += q * q;
        }
    }
    Ok(acc.value())
}

/// Alternating binomial form of `G(m, n)` on the faces
/// `alpha - beta - gamma = 1` and `-alpha + beta - gamma = 1`
/// (`0 < alpha, beta < 1`, `-1 <= gamma < 0`):
///
/// ```text
/// G(m,n) = (1+2 beta)^n  sum_r (-1)^r P(xi_m(alpha) = m-r) P(eta_n((1+beta)/(1+2 beta)) = r)
/// G(m,n) = (1+2 alpha)^m sum_r (-1)^r P(xi_n(beta) = n-r)  P(eta_m((1+alpha)/(1+2 alpha)) = r)
/// ```
pub fn g_missing_face(m: usize, n: usize, p: &Params) -> Result<f64> {
    p.validate()?;
    let (a, b, c) = (p.alpha, p.beta, p.gamma);
    if !(a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0 && (-1.0..0.0).contains(&c)) {
        return domain(format!(
            "sign-mixed face form needs 0 < alpha, beta < 1 and -1 <= gamma < 0, got ({a}, {b}, {c})"
        ));
    }
    let first = (a - b - c - 1.0).abs();
    let second = (-a + b - c - 1.0).abs();
    if first.min(second) > DEFAULT_TOL {
        return domain(format!(
            "({a}, {b}, {c}) lies on neither alpha - beta - gamma = 1 nor -alpha + beta - gamma = 1"
        ));
    }
    if m.max(n) > MISSING_FACE_MAX_INDEX {
        return Err(Error::Precision(format!(
            "alternating sum for G({m}, {n}) cancels beyond double precision (indices above {MISSING_FACE_MAX_INDEX})"
        )));
    }
    // (outer index, inner index, outer probability, face parameter of the prefactor)
    let (i, j, pi, f) = if first <= second {
        (m, n, a, b)
    } else {
        (n, m, b, a)
    };
    // the prefactor folds into the inner law:
    // (1+2f)^j P(eta_j = r) = C(j, r) (1+f)^r f^(j-r), summed in double-double
    let (one_minus_pi, one_plus_f) = (TwoFloat::new_sub(1.0, pi), TwoFloat::new_add(1.0, f));
    let (mut c_i, mut c_j) = (TwoFloat::from(1.0), TwoFloat::from(1.0));
    let mut acc = TwoFloat::from(0.0);
    for r in 0..=i.min(j) {
        if r > 0 {
            c_i = c_i * (i + 1 - r) as f64 / r as f64;
            c_j = c_j * (j + 1 - r) as f64 / r as f64;
        }
        let ri = r as i32;
        let term = c_i
            * c_j
            * TwoFloat::from(pi).powi((i - r) as i32)
            * one_minus_pi.powi(ri)
            * one_plus_f.powi(ri)
            * TwoFloat::from(f).powi((j - r) as i32);
        acc = if r % 2 == 0 { acc + term } else { acc - term };
    }
    Ok(acc.hi() + acc.lo())
}
