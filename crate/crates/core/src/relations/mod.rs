//! Distance relations between geodesics, horocycles and points in the
//! hyperbolic plane.
//!
//! Evaluators compute a missing weight; residual checkers return LHS − RHS
//! together with the magnitude of the largest monomial, so that thresholds can
//! be applied relative to the size of the identity.
//!
//! Labeling for four objects with P, B, A, C in cyclic order:
//! X = PA, Y = PB, Z = PC, x = BC, y = AC, z = AB.

mod mixed;
mod quintet;

pub use mixed::*;
pub use quintet::*;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{Real, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RelError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("no relation for curvature pattern {0}")]
    UnknownPattern(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("zero denominator in {0}")]
    ZeroDenominator(&'static str),
}

pub type RelResult<T> = Result<T, RelError>;

/// LHS − RHS of an identity and the largest monomial magnitude in it.
#[derive(Clone, Debug, PartialEq)]
pub struct Residual<S> {
    pub diff: S,
    pub scale: S,
}

impl<S: Scalar> Residual<S> {
    pub fn new(diff: S, scale: S) -> Self {
        Residual { diff, scale }
    }

    /// Builds a residual from signed monomials summing to LHS − RHS.
    pub fn from_terms(terms: &[S]) -> Self {
        let mut diff = S::zero();
        let mut scale = S::zero();
        for t in terms {
            diff = diff + t.clone();
            scale = scale.max_of(t.abs());
        }
        Residual { diff, scale }
    }

    /// Builds a residual for an equation lhs = rhs between two quantities.
    pub fn between(lhs: S, rhs: S) -> Self {
        let scale = lhs.abs().max_of(rhs.abs());
        Residual { diff: lhs - rhs, scale }
    }

    pub fn relative(&self) -> S {
        if self.scale == S::zero() {
            self.diff.abs()
        } else {
            self.diff.abs() / self.scale.clone()
        }
    }

    pub fn relative_f64(&self) -> f64 {
        self.relative().to_f64()
    }

    pub fn passes(&self, tol: f64) -> bool {
        let r = self.relative_f64();
        r.is_finite() && r <= tol
    }
}

/// Which root of the quadruplet equation to take.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum Root {
    /// B, A, C, P in cyclic order.
    #[default]
    Plus,
    /// The other cyclic order.
    Minus,
}

pub(crate) fn require_gt_one<R: Scalar>(name: &str, v: &R) -> RelResult<()> {
    if *v > R::one() {
        Ok(())
    } else {
        Err(RelError::Domain(format!("{name} = {v} must exceed 1")))
    }
}

pub(crate) fn require_positive<R: Scalar>(name: &str, v: &R) -> RelResult<()> {
    if *v > R::zero() {
        Ok(())
    } else {
        Err(RelError::Domain(format!("{name} = {v} must be positive")))
    }
}

pub(crate) fn checked_sqrt<R: Real>(what: &str, v: R) -> RelResult<R> {
    if v < R::zero() {
        Err(RelError::Domain(format!("negative radicand {v} in {what}")))
    } else {
        Ok(v.sqrt())
    }
}

/// a² + b² + c² + 2abc − 1, the radicand of [`cap_p`].
pub fn cap_p_sq<S: Scalar>(a: &S, b: &S, c: &S) -> S {
    a.square() + b.square() + c.square() + S::two() * a.clone() * b.clone() * c.clone() - S::one()
}

/// √(a² + b² + c² + 2abc − 1).
pub fn cap_p<R: Real>(a: &R, b: &R, c: &R) -> RelResult<R> {
    checked_sqrt("cap_p", cap_p_sq(a, b, c))
}

/// h(X) = ½ log((X+1)/(X−1)), radius of the stable neighbourhood.
pub fn stable_radius<R: Real>(x: &R) -> RelResult<R> {
    require_gt_one("X", x)?;
    let t = R::two() / (x.clone() - R::one());
    Ok(t.ln_1p() / R::two())
}

/// f(x,Y,Z) = arccosh((x + YZ)/√((Y²−1)(Z²−1))).
pub fn triple_gap<R: Real>(x: &R, y: &R, z: &R) -> RelResult<R> {
    require_gt_one("x", x)?;
    require_gt_one("Y", y)?;
    require_gt_one("Z", z)?;
    // arccosh(a) = log(a + √(a²−1)) and √(a²−1)·D = P(x,Y,Z)
    let d = ((y.square() - R::one()) * (z.square() - R::one())).sqrt();
    let p = cap_p(x, y, z)?;
    Ok(((x.clone() + y.clone() * z.clone() + p) / d).ln())
}

/// f(x,Y,Z) − h(Y) − h(Z), evaluated without cancellation.
///
/// This is the exact Σ 2h over the subtree beyond an edge.
pub fn triple_gap_excess<R: Real>(x: &R, y: &R, z: &R) -> RelResult<R> {
    require_gt_one("x", x)?;
    require_gt_one("Y", y)?;
    require_gt_one("Z", z)?;
    let one = R::one();
    let p = cap_p(x, y, z)?;
    let ratio = (x.clone() + R::two() * y.clone() * z.clone() + one.clone()) / (p + y.clone() + z.clone());
    let t = (x.clone() - one.clone()) / ((y.clone() + one.clone()) * (z.clone() + one.clone())) * (one + ratio);
    Ok(t.ln_1p())
}

/// f(x,Y,Z) − f(z,X,Y) − f(y,X,Z) for B, A, C, P in cyclic order.
pub fn harmonic_residual<R: Real>(x: &R, y: &R, z: &R, xx: &R, yy: &R, zz: &R) -> RelResult<Residual<R>> {
    let whole = triple_gap(x, yy, zz)?;
    let left = triple_gap(z, xx, yy)?;
    let right = triple_gap(y, xx, zz)?;
    Ok(Residual::new(whole.clone() - left - right, whole))
}

/// X = ((xy+z)Y + (xz+y)Z ± P(x,y,z)·P(x,Y,Z)) / (x²−1).
pub fn geodesic_ptolemy_next<R: Real>(x: &R, y: &R, z: &R, yy: &R, zz: &R, root: Root) -> RelResult<R> {
    for (n, v) in [("x", x), ("y", y), ("z", z), ("Y", yy), ("Z", zz)] {
        require_gt_one(n, v)?;
    }
    let lin = (x.clone() * y.clone() + z.clone()) * yy.clone() + (x.clone() * z.clone() + y.clone()) * zz.clone();
    let rad = cap_p(x, y, z)? * cap_p(x, yy, zz)?;
    let num = match root {
        Root::Plus => lin + rad,
        Root::Minus => lin - rad,
    };
    Ok(num / (x.square() - R::one()))
}

/// Quadruplet of geodesics: holds for either cyclic order.
pub fn quadruplet_residual<S: Scalar>(x: &S, y: &S, z: &S, xx: &S, yy: &S, zz: &S) -> Residual<S> {
    let one = S::one();
    let two = S::two();
    let c = |a: &S, b: &S| a.clone() * b.clone();
    Residual::from_terms(&[
        (x.square() - one.clone()) * xx.square(),
        (y.square() - one.clone()) * yy.square(),
        (z.square() - one.clone()) * zz.square(),
        -(two.clone() * (c(x, y) + z.clone()) * c(xx, yy)),
        -(two.clone() * (c(y, z) + x.clone()) * c(yy, zz)),
        -(two * (c(x, z) + y.clone()) * c(xx, zz)),
        -cap_p_sq(x, y, z),
    ])
}

/// Truncated length across a concave core from three half-traces
/// (cusps enter as 1).
pub fn concave_core_trunclength<R: Real>(a1: &R, a2: &R, a3: &R) -> RelResult<R> {
    for (n, v) in [("a1", a1), ("a2", a2), ("a3", a3)] {
        if *v < R::one() {
            return Err(RelError::Domain(format!("{n} = {v} below 1")));
        }
    }
    let rad = cap_p(a1, a2, a3)?;
    let num = a1.clone() * a2.clone() + a3.clone() + rad;
    let den = (a1.clone() + R::one()) * (a2.clone() + R::one());
    Ok((num / den).ln())
}

/// (a1+1)(a2+1)t² − 2(a1a2+a3)t + (a1−1)(a2−1) at t.
pub fn trunclength_quadratic_residual<S: Scalar>(a1: &S, a2: &S, a3: &S, t: &S) -> Residual<S> {
    let one = S::one();
    Residual::from_terms(&[
        (a1.clone() + one.clone()) * (a2.clone() + one.clone()) * t.square(),
        -(S::two() * (a1.clone() * a2.clone() + a3.clone()) * t.clone()),
        (a1.clone() - one.clone()) * (a2.clone() - one),
    ])
}
