//! Obstacle pairs and the coordinate normalisations applied before
//! classification.
//!
//! An obstacle pair is two homogeneous quadratics `p1 <= p2` that touch only
//! at the origin. Everything downstream (classification, solution families,
//! the grid solver) works with the normalised diagonal form, so this module
//! owns validation, the cross-term-removing rotation, the harmonic
//! subtraction, and the scaling that reduces a mirror-symmetric pair to the
//! canonical `(-1,-1,1,1)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance for case-membership sums such as `a1 + c2`.
///
/// These are sums of user-supplied floats; the trichotomy is exact, so the
/// tolerance only absorbs representation error of the inputs.
pub const CASE_TOL: f64 = 1e-12;

/// Selects one of the two obstacles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObstacleSide {
    Lower,
    Upper,
}

/// Homogeneous quadratic `a x1^2 + 2 b x1 x2 + c x2^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticForm {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl QuadraticForm {
    pub const fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }

    pub const fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    /// Diagonal form `a x1^2 + c x2^2`.
    pub const fn diagonal(a: f64, c: f64) -> Self {
        Self::new(a, 0.0, c)
    }

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        self.a * x[0] * x[0] + 2.0 * self.b * x[0] * x[1] + self.c * x[1] * x[1]
    }

    pub fn gradient(&self, x: [f64; 2]) -> [f64; 2] {
        [
            2.0 * (self.a * x[0] + self.b * x[1]),
            2.0 * (self.b * x[0] + self.c * x[1]),
        ]
    }

    pub fn laplacian(&self) -> f64 {
        2.0 * (self.a + self.c)
    }

    /// Coefficients of `x -> self(R_phi x)` where `R_phi` is the
    /// counterclockwise rotation by `phi`.
    pub fn substituted_rotation(&self, phi: f64) -> Self {
        let (s, co) = phi.sin_cos();
        // First new basis vector R_phi e1 = (cos, sin), second (-sin, cos).
        let a = self.a * co * co + 2.0 * self.b * co * s + self.c * s * s;
        let c = self.a * s * s - 2.0 * self.b * co * s + self.c * co * co;
        let b = (self.c - self.a) * s * co + self.b * (co * co - s * s);
        Self::new(a, b, c)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.a * s, self.b * s, self.c * s)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(self.a - other.a, self.b - other.b, self.c - other.c)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.a + other.a, self.b + other.b, self.c + other.c)
    }
}

/// Coefficients of a pair of quadratic obstacles
/// `p1 = a1 x1^2 + 2 b1 x1 x2 + c1 x2^2 <= p2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObstaclePair {
    pub a1: f64,
    pub b1: f64,
    pub c1: f64,
    pub a2: f64,
    pub b2: f64,
    pub c2: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum ValidationError {
    #[error("sign violation: {0}")]
    SignViolation(String),
    #[error("obstacles do not meet at a single point: {0}")]
    NotSinglePointContact(String),
    #[error("non-finite coefficient {0}")]
    NonFinite(&'static str),
}

#[derive(Debug, Error, PartialEq)]
pub enum ReduceError {
    #[error("pair is not mirror-symmetric: {0}")]
    NotCase1(String),
}

impl ObstaclePair {
    pub fn new(a1: f64, b1: f64, c1: f64, a2: f64, b2: f64, c2: f64) -> Self {
        Self { a1, b1, c1, a2, b2, c2 }
    }

    pub fn lower(&self) -> QuadraticForm {
        QuadraticForm::new(self.a1, self.b1, self.c1)
    }

    pub fn upper(&self) -> QuadraticForm {
        QuadraticForm::new(self.a2, self.b2, self.c2)
    }

    /// `lambda1 = lap p1 = 2 (a1 + c1)`, negative for a valid pair.
    pub fn lambda1(&self) -> f64 {
        2.0 * (self.a1 + self.c1)
    }

    /// `lambda2 = lap p2 = 2 (a2 + c2)`, positive for a valid pair.
    pub fn lambda2(&self) -> f64 {
        2.0 * (self.a2 + self.c2)
    }

    /// Checks the two structural requirements: the Laplacian signs
    /// `lambda1 < 0 < lambda2`, and positive definiteness of
    /// `D^2(p2 - p1)` so the obstacles touch only at the origin.
    ///
    /// Strict inequalities with zero tolerance: the theory degenerates
    /// exactly at equality.
    pub fn validate(self) -> Result<Self, ValidationError> {
        for (v, name) in [
            (self.a1, "a1"),
            (self.b1, "b1"),
            (self.c1, "c1"),
            (self.a2, "a2"),
            (self.b2, "b2"),
            (self.c2, "c2"),
        ] {
            if !v.is_finite() {
                return Err(ValidationError::NonFinite(name));
            }
        }
        let l1 = self.lambda1();
        if !(l1 < 0.0) {
            return Err(ValidationError::SignViolation(format!(
                "lambda1 = 2(a1+c1) = {l1} must be < 0"
            )));
        }
        let l2 = self.lambda2();
        if !(l2 > 0.0) {
            return Err(ValidationError::SignViolation(format!(
                "lambda2 = 2(a2+c2) = {l2} must be > 0"
            )));
        }
        let da = self.a2 - self.a1;
        let dc = self.c2 - self.c1;
        let db = self.b2 - self.b1;
        if !(da > 0.0) {
            return Err(ValidationError::NotSinglePointContact(format!(
                "a2 - a1 = {da} must be > 0"
            )));
        }
        let det = da * dc - db * db;
        if !(det > 0.0) {
            return Err(ValidationError::NotSinglePointContact(format!(
                "(a2-a1)(c2-c1) - (b2-b1)^2 = {det} must be > 0"
            )));
        }
        Ok(self)
    }

    /// Rotates away unequal cross terms and subtracts the shared harmonic
    /// `2 b x1 x2`, producing the diagonal form and the record needed to
    /// undo both steps.
    pub fn normalize(self) -> Result<(NormalizedPair, TransformRecord), ValidationError> {
        let pair = self.validate()?;
        let theta = if pair.b1 == pair.b2 {
            0.0
        } else {
            0.5 * f64::atan2(
                2.0 * (pair.b1 - pair.b2),
                pair.a2 - pair.a1 - pair.c2 + pair.c1,
            )
        };
        let p1 = pair.lower().substituted_rotation(-theta);
        let p2 = pair.upper().substituted_rotation(-theta);
        // The rotation is chosen so the cross terms agree; the remaining
        // shared 2b x1 x2 is harmonic and comes off both obstacles.
        let b = 0.5 * (p1.b + p2.b);
        let harmonic = QuadraticForm::new(0.0, b, 0.0);
        let record = TransformRecord {
            rotation: theta,
            harmonic: [0.0, b],
            scale: 1.0,
        };
        let q1 = p1.sub(&harmonic);
        let q2 = p2.sub(&harmonic);
        let norm = NormalizedPair {
            a1: q1.a,
            c1: q1.c,
            a2: q2.a,
            c2: q2.c,
        };
        debug_assert!(q1.b.abs() < 1e-9 * (1.0 + b.abs()));
        debug_assert!(q2.b.abs() < 1e-9 * (1.0 + b.abs()));
        Ok((norm, record))
    }
}

/// Diagonal obstacle pair `p1 = a1 x1^2 + c1 x2^2`, `p2 = a2 x1^2 + c2 x2^2`
/// with `a2 > a1`, `c2 > c1`, `a1 + c1 < 0 < a2 + c2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizedPair {
    pub a1: f64,
    pub c1: f64,
    pub a2: f64,
    pub c2: f64,
}

impl NormalizedPair {
    pub fn new(a1: f64, c1: f64, a2: f64, c2: f64) -> Result<Self, ValidationError> {
        ObstaclePair::new(a1, 0.0, c1, a2, 0.0, c2).validate()?;
        Ok(Self { a1, c1, a2, c2 })
    }

    /// The canonical mirror-symmetric pair `p1 = -x1^2-x2^2`, `p2 = x1^2+x2^2`.
    pub fn canonical() -> Self {
        Self { a1: -1.0, c1: -1.0, a2: 1.0, c2: 1.0 }
    }

    pub fn is_canonical(&self) -> bool {
        (self.a1 + 1.0).abs() <= CASE_TOL
            && (self.c1 + 1.0).abs() <= CASE_TOL
            && (self.a2 - 1.0).abs() <= CASE_TOL
            && (self.c2 - 1.0).abs() <= CASE_TOL
    }

    pub fn lower(&self) -> QuadraticForm {
        QuadraticForm::diagonal(self.a1, self.c1)
    }

    pub fn upper(&self) -> QuadraticForm {
        QuadraticForm::diagonal(self.a2, self.c2)
    }

    pub fn lambda1(&self) -> f64 {
        2.0 * (self.a1 + self.c1)
    }

    pub fn lambda2(&self) -> f64 {
        2.0 * (self.a2 + self.c2)
    }

    pub fn as_pair(&self) -> ObstaclePair {
        ObstaclePair::new(self.a1, 0.0, self.c1, self.a2, 0.0, self.c2)
    }

    /// Signature coefficients `(A, C) = (a1 + c2, a2 + c1)` of the polynomial
    /// `P = A x1^2 + C x2^2` whose sign pattern drives the classification.
    pub fn signature(&self) -> SignaturePolynomial {
        SignaturePolynomial {
            a: self.a1 + self.c2,
            c: self.a2 + self.c1,
        }
    }

    /// Scales a mirror-symmetric pair (`a1 + c2 = a2 + c1 = 0`) to the
    /// canonical `(-1,-1,1,1)` by subtracting the trace-free part and
    /// rescaling. Errors with `NotCase1` when the sums are not both zero.
    pub fn reduce_case1(self) -> Result<(NormalizedPair, TransformRecord), ReduceError> {
        let sig = self.signature();
        if sig.a.abs() > CASE_TOL || sig.c.abs() > CASE_TOL {
            return Err(ReduceError::NotCase1(format!(
                "a1 + c2 = {}, a2 + c1 = {} (each must vanish within {CASE_TOL})",
                sig.a, sig.c
            )));
        }
        // p1 = -a x1^2 - c x2^2, p2 = c x1^2 + a x2^2 with a + c > 0.
        let a = -self.a1;
        let c = -self.c1;
        let sum = a + c;
        let a_h = 0.5 * (c - a);
        let harmonic = QuadraticForm::new(a_h, 0.0, -a_h);
        let scale = 2.0 / sum;
        let q1 = self.lower().sub(&harmonic).scaled(scale);
        let q2 = self.upper().sub(&harmonic).scaled(scale);
        let canonical = NormalizedPair {
            a1: q1.a,
            c1: q1.c,
            a2: q2.a,
            c2: q2.c,
        };
        let record = TransformRecord {
            rotation: 0.0,
            harmonic: [a_h, 0.0],
            scale,
        };
        Ok((canonical, record))
    }
}

/// Coefficients `(A, C)` of `P(x) = A x1^2 + C x2^2` with `A = a1 + c2`,
/// `C = a2 + c1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignaturePolynomial {
    pub a: f64,
    pub c: f64,
}

/// Invertible record of the steps taken by [`ObstaclePair::normalize`] and
/// [`NormalizedPair::reduce_case1`].
///
/// Semantics: `normalized(x) = scale * (original(R_{-rotation} x) - h(x))`
/// where `h = harmonic[0] (x1^2 - x2^2) + 2 harmonic[1] x1 x2`. Records
/// compose left to right; `apply`/`unapply` round-trip to within float
/// precision.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformRecord {
    pub rotation: f64,
    pub harmonic: [f64; 2],
    pub scale: f64,
}

impl TransformRecord {
    pub fn identity() -> Self {
        Self { rotation: 0.0, harmonic: [0.0, 0.0], scale: 1.0 }
    }

    pub fn is_identity(&self) -> bool {
        self.rotation == 0.0 && self.harmonic == [0.0, 0.0] && self.scale == 1.0
    }

    fn harmonic_form(&self) -> QuadraticForm {
        QuadraticForm::new(self.harmonic[0], self.harmonic[1], -self.harmonic[0])
    }

    pub fn apply(&self, form: &QuadraticForm) -> QuadraticForm {
        form.substituted_rotation(-self.rotation)
            .sub(&self.harmonic_form())
            .scaled(self.scale)
    }

    pub fn unapply(&self, form: &QuadraticForm) -> QuadraticForm {
        form.scaled(1.0 / self.scale)
            .add(&self.harmonic_form())
            .substituted_rotation(self.rotation)
    }

    /// `self` followed by `next` (`next` acts on `self`'s output frame and
    /// must not rotate again).
    pub fn compose(&self, next: &TransformRecord) -> TransformRecord {
        assert_eq!(next.rotation, 0.0, "only the first step may rotate");
        TransformRecord {
            rotation: self.rotation,
            harmonic: [
                self.harmonic[0] + next.harmonic[0] / self.scale,
                self.harmonic[1] + next.harmonic[1] / self.scale,
            ],
            scale: self.scale * next.scale,
        }
    }
}
