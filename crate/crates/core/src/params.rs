//! Parameter triples of the field
//! `X[k,l] = alpha X[k-1,l] + beta X[k,l-1] + gamma X[k-1,l-1] + eps[k,l]`,
//! their position relative to the stability tetrahedron, and the
//! variance-preserving sign flips.
//!
//! The stability domain is cut out by `|alpha|, |beta|, |gamma| < 1` and the
//! four linear inequalities
//!
//! ```text
//!  alpha - beta - gamma < 1      -alpha + beta - gamma < 1
//! -alpha - beta + gamma < 1       alpha + beta + gamma < 1
//! ```
//!
//! Its boundary splits into faces (one equality active), edges (one
//! parameter of modulus one) and vertices (`alpha beta gamma = -1`). Only
//! part of each stratum has a known variance limit; the rest is classified
//! but reported as missing.

use serde::Serialize;

use crate::error::{Error, Result};

/// Default absolute tolerance used for boundary equalities.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Coefficients `(alpha, beta, gamma)` of the unilateral autoregression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Params {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Params {
    /// Builds a parameter triple, rejecting non-finite values.
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite() && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "parameters must be finite, got ({alpha}, {beta}, {gamma})"
            )));
        }
        Ok(Self { alpha, beta, gamma })
    }

    /// Unchecked constructor for literals known to be finite.
    pub const fn from_triple(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self { alpha, beta, gamma }
    }

    pub fn validate(&self) -> Result<()> {
        Self::new(self.alpha, self.beta, self.gamma).map(|_| ())
    }

    /// Sign flips `(alpha, beta, gamma) -> (±alpha, ±beta, ±gamma)` induced by
    /// multiplying the field by `(-1)^k` and/or `(-1)^l`.
    pub fn flipped(&self, flips: SignMap) -> Self {
        let sk = if flips.flip_k { -1.0 } else { 1.0 };
        let sl = if flips.flip_l { -1.0 } else { 1.0 };
        Self {
            alpha: sk * self.alpha,
            beta: sl * self.beta,
            gamma: sk * sl * self.gamma,
        }
    }

    pub fn abs_sum(&self) -> f64 {
        self.alpha.abs() + self.beta.abs() + self.gamma.abs()
    }

    /// Values of the four linear forms whose strict bound `< 1` defines
    /// stability, in the order of [`FACE_SIGNS`].
    pub fn face_forms(&self) -> [f64; 4] {
        FACE_SIGNS.map(|(a, b, c)| a * self.alpha + b * self.beta + c * self.gamma)
    }
}

/// Sign patterns of the four face equations `±alpha ± beta ± gamma = 1`;
/// face `i` (1-based) uses `FACE_SIGNS[i - 1]`.
pub const FACE_SIGNS: [(f64, f64, f64); 4] = [
    (1.0, -1.0, -1.0),
    (-1.0, 1.0, -1.0),
    (-1.0, -1.0, 1.0),
    (1.0, 1.0, 1.0),
];

/// Human-readable form of face equation `index` (1-based).
pub fn face_equation(index: u8) -> &'static str {
    match index {
        1 => "alpha-beta-gamma=1",
        2 => "-alpha+beta-gamma=1",
        3 => "-alpha-beta+gamma=1",
        4 => "alpha+beta+gamma=1",
        _ => "invalid",
    }
}

/// Multiplication of the field by `(-1)^k` (`flip_k`) and/or `(-1)^l`
/// (`flip_l`). The induced parameter maps are
/// `(T,T): (-a,-b,c)`, `(T,F): (-a,b,-c)`, `(F,T): (a,-b,-c)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct SignMap {
    pub flip_k: bool,
    pub flip_l: bool,
}

impl SignMap {
    pub const IDENTITY: SignMap = SignMap {
        flip_k: false,
        flip_l: false,
    };

    pub fn is_identity(&self) -> bool {
        !self.flip_k && !self.flip_l
    }

    /// Sign relating the flipped field to the original one at `(k, l)`.
    pub fn sign_at(&self, k: usize, l: usize) -> f64 {
        let odd = (self.flip_k && k % 2 == 1) ^ (self.flip_l && l % 2 == 1);
        if odd {
            -1.0
        } else {
            1.0
        }
    }

    pub fn compose(self, other: SignMap) -> SignMap {
        SignMap {
            flip_k: self.flip_k ^ other.flip_k,
            flip_l: self.flip_l ^ other.flip_l,
        }
    }
}

/// Which coordinate has modulus one on an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Alpha,
    Beta,
    Gamma,
}

/// The two sign-mixed face pieces without a known limit, named by their
/// canonical equation: `alpha - beta - gamma = 1` and `-alpha + beta - gamma = 1`
/// with `alpha, beta > 0 > gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingFaceVariant {
    AlphaMinusBeta,
    BetaMinusAlpha,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DomainKind {
    Stable,
    /// Interior of a face with a known limit. `face_index` refers to
    /// [`FACE_SIGNS`] evaluated at the original (not canonical) parameters.
    FaceA {
        face_index: u8,
    },
    EdgeB {
        axis: Axis,
    },
    VertexC,
    MissingFace {
        variant: MissingFaceVariant,
    },
    MissingGammaEdge,
    TrivialGammaEdge,
    Outside,
}

impl DomainKind {
    pub fn name(&self) -> &'static str {
        match self {
            DomainKind::Stable => "stable",
            DomainKind::FaceA { .. } => "face_a",
            DomainKind::EdgeB { .. } => "edge_b",
            DomainKind::VertexC => "vertex_c",
            DomainKind::MissingFace { .. } => "missing_face",
            DomainKind::MissingGammaEdge => "missing_gamma_edge",
            DomainKind::TrivialGammaEdge => "trivial_gamma_edge",
            DomainKind::Outside => "outside",
        }
    }

    /// Variance scaling exponent: `Var X[ns,nt]` grows like `n^(2 rho)`.
    pub fn rho(&self) -> Rho {
        match self {
            DomainKind::Stable => Rho::Zero,
            DomainKind::FaceA { .. } => Rho::Quarter,
            DomainKind::EdgeB { .. } | DomainKind::TrivialGammaEdge => Rho::Half,
            DomainKind::VertexC => Rho::One,
            DomainKind::MissingFace { .. } | DomainKind::MissingGammaEdge | DomainKind::Outside => {
                Rho::Unknown
            }
        }
    }
}

/// Scaling exponent, kept as an exact rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rho {
    Zero,
    Quarter,
    Half,
    One,
    Unknown,
}

impl Rho {
    /// `(numerator, denominator)`, or `None` when unknown.
    pub fn fraction(&self) -> Option<(u32, u32)> {
        match self {
            Rho::Zero => Some((0, 1)),
            Rho::Quarter => Some((1, 4)),
            Rho::Half => Some((1, 2)),
            Rho::One => Some((1, 1)),
            Rho::Unknown => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        self.fraction().map(|(p, q)| p as f64 / q as f64)
    }

    /// Variance normalization `n^(-2 rho)`.
    pub fn variance_scale(&self, n: u64) -> Option<f64> {
        let (p, q) = self.fraction()?;
        // 2 rho = 2p/q is one of 0, 1/2, 1, 2
        let n = n as f64;
        Some(match (2 * p, q) {
            (0, _) => 1.0,
            (2, 4) => 1.0 / n.sqrt(),
            (2, 2) => 1.0 / n,
            (2, 1) => 1.0 / (n * n),
            _ => unreachable!("rho is one of 0, 1/4, 1/2, 1"),
        })
    }
}

/// Classification of a parameter triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DomainClass {
    #[serde(flatten)]
    pub kind: DomainKind,
    pub rho: Rho,
    /// Face point with `alpha` or `beta` equal to zero; the face limit is
    /// evaluated there but its derivation assumes both are nonzero.
    pub degenerate: bool,
}

impl DomainClass {
    fn of(kind: DomainKind) -> Self {
        Self {
            kind,
            rho: kind.rho(),
            degenerate: false,
        }
    }
}

/// Maps `p` to the representative with nonnegative `alpha, beta` and
/// `gamma >= 0` when `alpha beta gamma >= 0` (`gamma < 0` otherwise).
///
/// All returned entries are sign-normalized (`-0.0` becomes `0.0`); zero
/// entries are resolved towards nonnegative signs. The product
/// `alpha beta gamma` keeps its sign.
pub fn canonicalize(p: &Params) -> (Params, SignMap) {
    let mut flips = SignMap {
        flip_k: p.alpha < 0.0,
        flip_l: p.beta < 0.0,
    };
    let mut q = p.flipped(flips);
    if q.gamma < 0.0 {
        if p.alpha == 0.0 {
            flips.flip_k = !flips.flip_k;
        } else if p.beta == 0.0 {
            flips.flip_l = !flips.flip_l;
        }
        q = p.flipped(flips);
    }
    // strip negative zeros
    q.alpha = q.alpha.abs();
    q.beta = q.beta.abs();
    if q.gamma == 0.0 {
        q.gamma = 0.0;
    }
    (q, flips)
}

/// Locates `p` relative to the stability tetrahedron.
///
/// Equalities are tested as `|expr| <= tol`. Points outside the closed
/// tetrahedron are classified [`DomainKind::Outside`] rather than rejected.
pub fn classify(p: &Params, tol: f64) -> Result<DomainClass> {
    p.validate()?;
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be finite and nonnegative, got {tol}"
        )));
    }
    let moduli = [p.alpha.abs(), p.beta.abs(), p.gamma.abs()];
    let forms = p.face_forms();

    let in_closure =
        moduli.iter().all(|&m| m <= 1.0 + tol) && forms.iter().all(|&f| f <= 1.0 + tol);
    if !in_closure {
        return Ok(DomainClass::of(DomainKind::Outside));
    }

    let unit: Vec<usize> = (0..3).filter(|&i| (moduli[i] - 1.0).abs() <= tol).collect();
    let kind = match unit.len() {
        0 => {
            let active: Vec<usize> = (0..4).filter(|&i| (forms[i] - 1.0).abs() <= tol).collect();
            if active.is_empty() {
                // inside the closure, no equality active, no unit modulus
                return Ok(DomainClass::of(DomainKind::Stable));
            }
            // Two active face equations force a unit modulus, so with a
            // positive tol only near-ties reach here; take the closest.
            let face = *active
                .iter()
                .min_by(|&&a, &&b| (forms[a] - 1.0).abs().total_cmp(&(forms[b] - 1.0).abs()))
                .expect("nonempty");
            return Ok(classify_face(p, face as u8 + 1, tol));
        }
        1 => match unit[0] {
            // Inside the closure |alpha| = 1 forces gamma = -alpha beta, so
            // alpha beta gamma <= 0 automatically (same for beta).
            0 => DomainKind::EdgeB { axis: Axis::Alpha },
            1 => DomainKind::EdgeB { axis: Axis::Beta },
            _ => {
                // |gamma| = 1 forces beta = -gamma alpha.
                if moduli[0] <= tol && moduli[1] <= tol {
                    DomainKind::TrivialGammaEdge
                } else {
                    DomainKind::MissingGammaEdge
                }
            }
        },
        _ => {
            let product = p.alpha * p.beta * p.gamma;
            if unit.len() == 3 && (product + 1.0).abs() <= 3.0 * tol {
                DomainKind::VertexC
            } else {
                DomainKind::Outside
            }
        }
    };
    Ok(DomainClass::of(kind))
}

fn classify_face(p: &Params, face_index: u8, tol: f64) -> DomainClass {
    let (c, _) = canonicalize(p);
    let face = DomainClass {
        kind: DomainKind::FaceA { face_index },
        rho: Rho::Quarter,
        degenerate: c.alpha <= tol || c.beta <= tol,
    };
    if c.gamma >= 0.0 {
        // alpha beta gamma >= 0: the face reads |alpha| + |beta| + |gamma| = 1
        return face;
    }
    let known_face = (c.alpha + c.beta - c.gamma.abs() - 1.0).abs();
    let alpha_side = (c.alpha - c.beta + c.gamma.abs() - 1.0).abs();
    let beta_side = (-c.alpha + c.beta + c.gamma.abs() - 1.0).abs();
    if known_face <= tol && known_face <= alpha_side.min(beta_side) {
        face
    } else if alpha_side <= beta_side {
        DomainClass::of(DomainKind::MissingFace {
            variant: MissingFaceVariant::AlphaMinusBeta,
        })
    } else {
        DomainClass::of(DomainKind::MissingFace {
            variant: MissingFaceVariant::BetaMinusAlpha,
        })
    }
}
