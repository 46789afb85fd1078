//! Moving-average coefficients `G(m, n)`: the weight of `eps[k-m, l-n]` in
//! `X[k, l]`,
//!
//! ```text
//! G(m, n) = sum_{r=0}^{min(m,n)} (m+n-r)! / ((m-r)! (n-r)! r!) alpha^(m-r) beta^(n-r) gamma^r.
//! ```
//!
//! Four independent routes are provided:
//!
//! * [`g_direct`]: the factorial sum above, term by term;
//! * [`g_table`] / [`RowStream`]: the recurrence
//!   `G(m,n) = alpha G(m-1,n) + beta G(m,n-1) + gamma G(m-1,n-1)`, the
//!   production path;
//! * [`g_hypergeom`]: a binomial coefficient times a terminating Gauss
//!   hypergeometric sum;
//! * [`g_binomial`] / [`g_face`]: probabilities of sums of two binomials
//!   (nonnegative `alpha, beta` and `alpha beta + gamma >= 0`).

use serde::Serialize;
use twofloat::TwoFloat;

use crate::binomial::BinomialSumSpec;
use crate::budget::MemoryBudget;
use crate::error::{domain, Error, Result};
use crate::params::{Params, DEFAULT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoeffMethod {
    Direct,
    Recurrence,
    Binomial,
    Hypergeometric,
}

impl CoeffMethod {
    pub fn name(&self) -> &'static str {
        match self {
            CoeffMethod::Direct => "direct",
            CoeffMethod::Recurrence => "recurrence",
            CoeffMethod::Binomial => "binomial",
            CoeffMethod::Hypergeometric => "hypergeometric",
        }
    }

    /// Single-coefficient evaluation by this method.
    pub fn eval(&self, m: usize, n: usize, p: &Params) -> Result<f64> {
        match self {
            CoeffMethod::Direct => g_direct(m, n, p),
            CoeffMethod::Recurrence => Ok(g_table(m, n, p)?.get(m, n)),
            CoeffMethod::Binomial => g_binomial(m, n, p),
            CoeffMethod::Hypergeometric => g_hypergeom(m, n, p),
        }
    }
}

/// `C(n, k)` as a running product of ratios.
fn binomial_f64(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let base = (n - k) as f64;
    (1..=k).fold(1.0, |acc, i| acc * (base + i as f64) / i as f64)
}

fn overflow(m: usize, n: usize) -> Error {
    Error::NumericOverflow(format!(
        "term magnitude of the direct sum for G({m}, {n}) is not representable; use the recurrence"
    ))
}

/// Double-double value times `2^exp2`, so long products can pass through
/// magnitudes outside the `f64` range.
#[derive(Debug, Clone, Copy)]
struct Scaled {
    v: TwoFloat,
    exp2: i32,
}

fn pow2(k: i32) -> f64 {
    debug_assert!((-1022..=1023).contains(&k));
    2f64.powi(k)
}

impl Scaled {
    fn new(x: TwoFloat) -> Self {
        let mut s = Self { v: x, exp2: 0 };
        s.normalize();
        s
    }

    fn normalize(&mut self) {
        let h = self.v.hi().abs();
        if h == 0.0 || !h.is_finite() {
            return;
        }
        let k = h.log2().floor() as i32;
        if k != 0 {
            self.v *= pow2(-k);
            self.exp2 += k;
        }
    }

    fn mul(&mut self, x: impl Into<TwoFloat>) {
        self.v *= x.into();
        self.normalize();
    }

    fn div(&mut self, x: f64) {
        self.v /= x;
        self.normalize();
    }

    /// Back to an unscaled value; not finite on overflow, flushed towards
    /// zero on underflow.
    fn value(&self) -> TwoFloat {
        let mut v = self.v;
        let mut k = self.exp2;
        while k != 0 && v.hi() != 0.0 && v.hi().is_finite() {
            let step = k.clamp(-1000, 1000);
            v *= pow2(step);
            k -= step;
        }
        v
    }
}

/// Double-double quotient by long division. The library's own
/// double-double by double-double division loses the low word.
fn dd_div(a: TwoFloat, b: TwoFloat) -> TwoFloat {
    let q1 = a.hi() / b.hi();
    let r = a - b * q1;
    let q2 = r.hi() / b.hi();
    let r = r - b * q2;
    let q3 = r.hi() / b.hi();
    TwoFloat::new_add(q1, q2) + q3
}

/// `C(m+n, n) alpha^m beta^n`, interleaved so partial products stay moderate.
fn leading_term(m: usize, n: usize, a: f64, b: f64) -> Scaled {
    let mut t = Scaled::new(TwoFloat::from(1.0));
    for i in 1..=m {
        t.mul(TwoFloat::from((n + i) as f64) / i as f64 * a);
    }
    for _ in 0..n {
        t.mul(b);
    }
    t
}

/// `(m-r)(n-r) / ((m+n-r)(r+1))`, the factorial part of `t_{r+1} / t_r`.
fn term_ratio(m: usize, n: usize, r: usize) -> TwoFloat {
    TwoFloat::from((m - r) as f64 * (n - r) as f64) / ((m + n - r) as f64 * (r + 1) as f64)
}

/// The defining factorial sum. Terms follow the ratio recurrence between
/// consecutive `r` and are formed and summed in double-double arithmetic,
/// since for `gamma < 0` the sum alternates and can cancel by many orders of
/// magnitude.
pub fn g_direct(m: usize, n: usize, p: &Params) -> Result<f64> {
    p.validate()?;
    let (a, b, c) = (p.alpha, p.beta, p.gamma);
    if a == 0.0 || b == 0.0 {
        // Only terms with a vanishing power of the zero parameter survive.
        let r = if a == 0.0 { m } else { n };
        if r > m.min(n) || (b == 0.0 && r != n) {
            return Ok(0.0);
        }
        // (m+n-r)! / ((m-r)! (n-r)! r!) with r = min(m, n) is C(max(m, n), r)
        let term = binomial_f64(m.max(n), r)
            * a.powi((m - r) as i32)
            * b.powi((n - r) as i32)
            * c.powi(r as i32);
        return if term.is_finite() {
            Ok(term)
        } else {
            Err(overflow(m, n))
        };
    }

    let mut term = leading_term(m, n, a, b);
    let mut acc = TwoFloat::from(0.0);
    for r in 0..=m.min(n) {
        if r > 0 {
            // t_r / t_{r-1} = ratio * gamma / (alpha beta)
            term.mul(term_ratio(m, n, r - 1) * c);
            term.div(a);
            term.div(b);
        }
        let t = term.value();
        if !t.hi().is_finite() {
            return Err(overflow(m, n));
        }
        acc += t;
    }
    Ok(acc.hi() + acc.lo())
}

/// Dense row-major table of `G(m, n)` for `0 <= m <= M`, `0 <= n <= N`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffTable {
    pub params: Params,
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    pub method: CoeffMethod,
}

impl CoeffTable {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, m: usize, n: usize) -> f64 {
        self.values[m * self.cols + n]
    }

    pub fn row(&self, m: usize) -> &[f64] {
        &self.values[m * self.cols..(m + 1) * self.cols]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Fills the `(M+1) x (N+1)` table with the requested method. Only the
    /// recurrence is `O(MN)`; the others evaluate every entry independently.
    pub fn build(max_m: usize, max_n: usize, p: &Params, method: CoeffMethod) -> Result<Self> {
        if method == CoeffMethod::Recurrence {
            return g_table(max_m, max_n, p);
        }
        p.validate()?;
        MemoryBudget::default().check_f64s((max_m as u128 + 1) * (max_n as u128 + 1))?;
        let cols = max_n + 1;
        let mut values = Vec::with_capacity((max_m + 1) * cols);
        for m in 0..=max_m {
            for n in 0..=max_n {
                values.push(method.eval(m, n, p)?);
            }
        }
        Ok(Self {
            params: *p,
            rows: max_m + 1,
            cols,
            values,
            method,
        })
    }
}

/// Streams rows of `G` one at a time holding two rows of length `cols`.
#[derive(Debug, Clone)]
pub struct RowStream {
    params: Params,
    prev: Vec<f64>,
    cur: Vec<f64>,
    next_m: usize,
}

impl RowStream {
    pub fn new(p: &Params, cols: usize) -> Self {
        Self {
            params: *p,
            prev: vec![0.0; cols],
            cur: vec![0.0; cols],
            next_m: 0,
        }
    }

    /// Index of the row the next call to [`RowStream::next_row`] yields.
    pub fn next_index(&self) -> usize {
        self.next_m
    }

    /// Yields row `m = 0, 1, 2, ...` of `G`, restricted to `n < cols`.
    pub fn next_row(&mut self) -> &[f64] {
        let Params { alpha, beta, gamma } = self.params;
        std::mem::swap(&mut self.prev, &mut self.cur);
        let cols = self.cur.len();
        if cols > 0 {
            if self.next_m == 0 {
                self.cur[0] = 1.0;
                for n in 1..cols {
                    self.cur[n] = beta * self.cur[n - 1];
                }
            } else {
                self.cur[0] = alpha * self.prev[0];
                for n in 1..cols {
                    self.cur[n] =
                        alpha * self.prev[n] + beta * self.cur[n - 1] + gamma * self.prev[n - 1];
                }
            }
        }
        self.next_m += 1;
        &self.cur
    }
}

/// Full coefficient table by the recurrence, within the default memory budget.
pub fn g_table(max_m: usize, max_n: usize, p: &Params) -> Result<CoeffTable> {
    g_table_within(max_m, max_n, p, &MemoryBudget::default())
}

pub fn g_table_within(
    max_m: usize,
    max_n: usize,
    p: &Params,
    budget: &MemoryBudget,
) -> Result<CoeffTable> {
    p.validate()?;
    let rows = max_m.checked_add(1).ok_or(Error::Resource {
        requested: u64::MAX,
        budget: budget.bytes,
    })?;
    let cols = max_n.checked_add(1).ok_or(Error::Resource {
        requested: u64::MAX,
        budget: budget.bytes,
    })?;
    budget.check_f64s(rows as u128 * cols as u128)?;
    let mut values = Vec::with_capacity(rows * cols);
    let mut stream = RowStream::new(p, cols);
    for _ in 0..rows {
        values.extend_from_slice(stream.next_row());
    }
    Ok(CoeffTable {
        params: *p,
        rows,
        cols,
        values,
        method: CoeffMethod::Recurrence,
    })
}

/// Terminating Gauss hypergeometric sum
/// `F(-n, b; c; z) = sum_{r=0}^{n} (-n)_r (b)_r / ((c)_r r!) z^r`.
pub fn hypergeometric_terminating(n: usize, b: f64, c: f64, z: f64) -> Result<f64> {
    hypergeometric_dd(n, b, c, TwoFloat::from(z)).map(|v| v.hi() + v.lo())
}

/// The terminating sum in double-double arithmetic, term-ratio recurrence.
fn hypergeometric_dd(n: usize, b: f64, c: f64, z: TwoFloat) -> Result<TwoFloat> {
    let mut term = TwoFloat::from(1.0);
    let mut acc = term;
    for r in 0..n {
        let r_f = r as f64;
        let numer = TwoFloat::from(r_f - n as f64) * (TwoFloat::from(b) + r_f);
        if numer == 0.0 {
            break;
        }
        let denom = (TwoFloat::from(c) + r_f) * (r_f + 1.0);
        if denom == 0.0 {
            return domain(format!("Pochhammer symbol ({c})_{} vanishes", r + 1));
        }
        term = dd_div(term * numer * z, denom);
        if !term.hi().is_finite() {
            return Err(Error::NumericOverflow(format!(
                "hypergeometric term {} overflowed",
                r + 1
            )));
        }
        acc += term;
    }
    Ok(acc)
}

/// `C(m+n, n) alpha^m beta^n F(-m, -n; -m-n; -gamma / (alpha beta))`.
pub fn g_hypergeom(m: usize, n: usize, p: &Params) -> Result<f64> {
    p.validate()?;
    let (a, b) = (p.alpha, p.beta);
    if a == 0.0 || b == 0.0 {
        return Err(Error::Unsupported(
            "hypergeometric form needs alpha beta != 0; use the direct sum or the recurrence"
                .into(),
        ));
    }
    let z = dd_div(TwoFloat::from(-p.gamma), TwoFloat::new_mul(a, b));
    let f = hypergeometric_dd(m, -(n as f64), -((m + n) as f64), z)?;
    let mut v = leading_term(m, n, a, b);
    v.mul(f);
    let v = v.value();
    if v.hi().is_finite() {
        Ok(v.hi() + v.lo())
    } else {
        Err(Error::NumericOverflow(format!(
            "hypergeometric form of G({m}, {n}) overflowed"
        )))
    }
}

/// Probability form for `0 <= alpha, beta < 1`, `alpha beta + gamma >= 0`:
///
/// ```text
/// G(m,n) = ((alpha+gamma)/(1-beta))^m P(xi_n(beta) + eta_m(q1) = n),  q1 = (alpha beta + gamma)/(alpha + gamma)
///        = ((beta+gamma)/(1-alpha))^n P(xi_m(alpha) + eta_n(q2) = m), q2 = (alpha beta + gamma)/(beta + gamma)
/// ```
///
/// The form with the smaller prefactor power is used.
pub fn g_binomial(m: usize, n: usize, p: &Params) -> Result<f64> {
    p.validate()?;
    let (a, b, c) = (p.alpha, p.beta, p.gamma);
    if !(0.0..1.0).contains(&a) || !(0.0..1.0).contains(&b) {
        return domain(format!(
            "binomial form needs 0 <= alpha, beta < 1, got ({a}, {b})"
        ));
    }
    let ab_c = a * b + c;
    if ab_c < 0.0 {
        return domain(format!(
            "binomial form needs alpha beta + gamma >= 0, got {ab_c}"
        ));
    }
    let first = (a + c > 0.0).then(|| ((a + c) / (1.0 - b), ab_c / (a + c)));
    let second = (b + c > 0.0).then(|| ((b + c) / (1.0 - a), ab_c / (b + c)));
    let use_first = match (first, second) {
        (None, None) => {
            // alpha = beta = gamma = 0
            return Ok(if m == 0 && n == 0 { 1.0 } else { 0.0 });
        }
        (Some(_), None) => true,
        (None, Some(_)) => false,
        (Some((f1, _)), Some((f2, _))) => m as f64 * f1.ln() <= n as f64 * f2.ln(),
    };
    let (factor, q, power, spec, target) = if use_first {
        let (f, q) = first.expect("checked");
        (f, q, m, BinomialSumSpec::new(n, m, b, q.min(1.0))?, n)
    } else {
        let (f, q) = second.expect("checked");
        (f, q, n, BinomialSumSpec::new(m, n, a, q.min(1.0))?, m)
    };
    debug_assert!(q <= 1.0 + 1e-12);
    Ok(factor.powi(power as i32) * spec.pmf(target as i64))
}

/// Face value `P(xi_m(alpha) + eta_n(1 - beta) = m)` for
/// `0 <= alpha, beta < 1` with `alpha + beta + gamma = 1`.
pub fn g_face(m: usize, n: usize, p: &Params) -> Result<f64> {
    p.validate()?;
    let (a, b, c) = (p.alpha, p.beta, p.gamma);
    if !(0.0..1.0).contains(&a) || !(0.0..1.0).contains(&b) || (a + b + c - 1.0).abs() > DEFAULT_TOL
    {
        return domain(format!(
            "face form needs 0 <= alpha, beta < 1 and alpha + beta + gamma = 1, got ({a}, {b}, {c})"
        ));
    }
    Ok(BinomialSumSpec::new(m, n, a, 1.0 - b)?.pmf(m as i64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(a: f64, b: f64, c: f64) -> Params {
        Params::new(a, b, c).unwrap()
    }

    fn close(x: f64, y: f64, tol: f64) -> bool {
        (x - y).abs() <= tol * y.abs().max(1.0)
    }

    #[test]
    fn direct_examples() {
        assert_eq!(g_direct(0, 0, &p(0.7, -0.2, 0.4)).unwrap(), 1.0);
        assert_eq!(g_direct(0, 0, &p(0.0, 0.0, 0.0)).unwrap(), 1.0);
        assert!(close(
            g_direct(2, 0, &p(0.7, -0.2, 0.4)).unwrap(),
            0.49,
            1e-15
        ));
        // 2 alpha beta + gamma = 0.3 + 0.2
        assert!(close(
            g_direct(1, 1, &p(0.5, 0.3, 0.2)).unwrap(),
            0.5,
            1e-15
        ));
        // gamma = -alpha beta: doubly geometric, 0.4^3 0.5^2
        assert!(close(
            g_direct(3, 2, &p(0.4, 0.5, -0.2)).unwrap(),
            0.016,
            1e-13
        ));
    }

    #[test]
    fn direct_with_zero_parameters() {
        // alpha = 0: only r = m survives, C(n, m) beta^(n-m) gamma^m
        assert!(close(
            g_direct(2, 3, &p(0.0, 0.5, 0.3)).unwrap(),
            3.0 * 0.5 * 0.09,
            1e-15
        ));
        assert_eq!(g_direct(3, 2, &p(0.0, 0.5, 0.3)).unwrap(), 0.0);
        // alpha = beta = 0: gamma^m on the diagonal
        assert!(close(
            g_direct(4, 4, &p(0.0, 0.0, -0.5)).unwrap(),
            0.0625,
            1e-15
        ));
        assert_eq!(g_direct(4, 3, &p(0.0, 0.0, -0.5)).unwrap(), 0.0);
        assert!(close(
            g_direct(0, 3, &p(0.0, 0.5, 0.3)).unwrap(),
            0.125,
            1e-15
        ));
    }

    #[test]
    fn direct_reports_overflow() {
        let err = g_direct(600, 600, &p(0.9, 0.9, 0.05)).unwrap_err();
        assert!(matches!(err, Error::NumericOverflow(_)), "{err:?}");
    }

    #[test]
    fn table_examples() {
        let t = g_table(2, 2, &p(0.0, 0.0, 0.0)).unwrap();
        for m in 0..=2 {
            for n in 0..=2 {
                assert_eq!(t.get(m, n), if m == 0 && n == 0 { 1.0 } else { 0.0 });
            }
        }
        let t = g_table(1, 1, &p(0.5, 0.3, 0.2)).unwrap();
        assert!(close(t.get(1, 1), 0.5, 1e-15));
        assert_eq!(t.rows(), 2);
        assert_eq!(t.cols(), 2);
        assert_eq!(t.method, CoeffMethod::Recurrence);
    }

    #[test]
    fn table_boundary_rows() {
        let q = p(0.7, -0.4, 0.1);
        let t = g_table(6, 5, &q).unwrap();
        for m in 0..=6 {
            assert!(close(t.get(m, 0), 0.7f64.powi(m as i32), 1e-14));
        }
        for n in 0..=5 {
            assert!(close(t.get(0, n), (-0.4f64).powi(n as i32), 1e-14));
        }
    }

    #[test]
    fn row_stream_matches_table() {
        let q = p(0.3, 0.45, -0.2);
        let t = g_table(7, 9, &q).unwrap();
        let mut s = RowStream::new(&q, 10);
        for m in 0..=7 {
            assert_eq!(s.next_index(), m);
            assert_eq!(s.next_row(), t.row(m));
        }
    }

    #[test]
    fn table_respects_budget() {
        let err =
            g_table_within(1000, 1000, &p(0.1, 0.1, 0.1), &MemoryBudget::new(1024)).unwrap_err();
        assert!(err.is_resource());
        let err = g_table(usize::MAX, 3, &p(0.1, 0.1, 0.1)).unwrap_err();
        assert!(err.is_resource());
    }

    #[test]
    fn hypergeometric_examples() {
        assert_eq!(hypergeometric_terminating(0, 2.5, -3.0, 7.0).unwrap(), 1.0);
        // F(-n, -m; -n-m; 1) = 1 / C(m+n, n)
        let v = hypergeometric_terminating(2, -3.0, -5.0, 1.0).unwrap();
        assert!(close(v, 0.1, 1e-15));
        for (n, m) in [(4usize, 7usize), (10, 3), (12, 12)] {
            let v = hypergeometric_terminating(n, -(m as f64), -((n + m) as f64), 1.0).unwrap();
            assert!(close(v, 1.0 / binomial_f64(n + m, n), 1e-13));
            assert_eq!(
                hypergeometric_terminating(n, -(m as f64), -((n + m) as f64), 0.0).unwrap(),
                1.0
            );
        }
        // (c)_r hits zero at r = 2 with a nonzero numerator
        assert!(matches!(
            hypergeometric_terminating(3, 0.5, -1.0, 1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn hypergeom_examples() {
        assert!(close(
            g_hypergeom(1, 1, &p(0.5, 0.3, 0.2)).unwrap(),
            0.5,
            1e-14
        ));
        assert!(close(
            g_hypergeom(4, 0, &p(0.7, 0.2, 0.1)).unwrap(),
            0.2401,
            1e-14
        ));
        for (a, b) in [(0.4, 0.5), (-0.7, 0.2), (0.9, -0.9)] {
            let q = p(a, b, -a * b);
            for m in 0..8 {
                for n in 0..8 {
                    let want = a.powi(m as i32) * b.powi(n as i32);
                    assert!(
                        close(g_hypergeom(m, n, &q).unwrap(), want, 1e-12),
                        "({a},{b}) {m} {n}"
                    );
                }
            }
        }
        assert!(matches!(
            g_hypergeom(1, 1, &p(0.0, 0.3, 0.2)),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn binomial_examples() {
        assert!(close(
            g_binomial(1, 1, &p(0.3, 0.5, 0.2)).unwrap(),
            0.5,
            1e-15
        ));
        let q = p(0.25, 0.35, 0.1);
        for m in 0..6 {
            assert!(close(
                g_binomial(m, 0, &q).unwrap(),
                0.25f64.powi(m as i32),
                1e-14
            ));
        }
        let want = g_direct(2, 3, &q).unwrap();
        assert!((g_binomial(2, 3, &q).unwrap() - want).abs() <= 1e-13);
        // alpha + gamma = 0 falls back to the second form
        let q = p(0.0, 0.4, 0.0);
        assert!(close(g_binomial(0, 3, &q).unwrap(), 0.064, 1e-15));
        assert_eq!(g_binomial(2, 3, &q).unwrap(), 0.0);
        assert_eq!(g_binomial(0, 0, &p(0.0, 0.0, 0.0)).unwrap(), 1.0);
        assert_eq!(g_binomial(1, 0, &p(0.0, 0.0, 0.0)).unwrap(), 0.0);
    }

    #[test]
    fn binomial_preconditions() {
        assert!(matches!(
            g_binomial(1, 1, &p(-0.1, 0.3, 0.2)),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            g_binomial(1, 1, &p(0.3, 1.0, 0.0)),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            g_binomial(1, 1, &p(0.5, 0.5, -0.3)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn face_examples() {
        let q = p(0.3, 0.5, 0.2);
        assert!(close(g_face(1, 1, &q).unwrap(), 0.5, 1e-15));
        for n in 0..10 {
            assert!(close(
                g_face(0, n, &q).unwrap(),
                0.5f64.powi(n as i32),
                1e-14
            ));
        }
        for m in 0..12 {
            for n in 0..12 {
                let v = g_face(m, n, &q).unwrap();
                assert!((0.0..=1.0).contains(&v));
            }
        }
        assert!(matches!(
            g_face(1, 1, &p(0.3, 0.5, 0.1)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn build_by_method() {
        let q = p(0.25, 0.35, 0.1);
        let rec = CoeffTable::build(6, 5, &q, CoeffMethod::Recurrence).unwrap();
        for method in [
            CoeffMethod::Direct,
            CoeffMethod::Binomial,
            CoeffMethod::Hypergeometric,
        ] {
            let t = CoeffTable::build(6, 5, &q, method).unwrap();
            assert_eq!(t.method, method);
            for (x, y) in t.values().iter().zip(rec.values()) {
                assert!(close(*x, *y, 1e-12), "{method:?}");
            }
        }
    }

    #[test]
    fn dd_division() {
        let x = dd_div(TwoFloat::from(1.0), TwoFloat::from(3.0));
        let back = x * 3.0 - 1.0;
        assert!(back.hi().abs() < 1e-31, "{back:?}");
        let y = dd_div(TwoFloat::new_add(2.0, 1e-20), TwoFloat::new_mul(0.1, 0.7));
        assert!(
            (y * TwoFloat::new_mul(0.1, 0.7) - TwoFloat::new_add(2.0, 1e-20))
                .hi()
                .abs()
                < 1e-30
        );
    }

    #[test]
    fn binomial_small() {
        assert_eq!(binomial_f64(10, 3), 120.0);
        assert_eq!(binomial_f64(7, 0), 1.0);
        assert_eq!(binomial_f64(7, 7), 1.0);
    }

    #[test]
    fn direct_survives_cancellation() {
        // gamma = -alpha beta: G = alpha^m beta^n while the terms reach ~1e6
        let q = p(1.0, 0.5, -0.5);
        for (m, n) in [(25, 25), (40, 30), (10, 35)] {
            let want = 0.5f64.powi(n);
            let d = g_direct(m as usize, n as usize, &q).unwrap();
            assert!(close(d, want, 1e-12), "{m} {n}: {d} vs {want}");
            let h = g_hypergeom(m as usize, n as usize, &q).unwrap();
            assert!(close(h, want, 1e-12), "{m} {n}: {h} vs {want}");
        }
        // vertex: G = 1 with alternating terms of size C(50, 25)
        assert!(close(
            g_direct(25, 25, &p(1.0, 1.0, -1.0)).unwrap(),
            1.0,
            1e-13
        ));
    }

    #[test]
    fn direct_handles_tiny_leading_term() {
        // alpha^m beta^n underflows on its own while gamma^min(m,n) dominates
        let q = p(1e-200, 1e-200, 0.5);
        let v = g_direct(3, 3, &q).unwrap();
        assert!(close(v, 0.125, 1e-14), "{v}");
    }
}
