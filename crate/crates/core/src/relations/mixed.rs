//! Relations mixing geodesics and horocycles.
//!
//! Weights follow one convention throughout: cosh d between two geodesics,
//! ½e^d as soon as a horocycle is involved. The Cayley–Menger form instead
//! takes the generalized half-weights of [`generalized_halfweight`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{
    checked_sqrt, geodesic_ptolemy_next, quadruplet_residual, require_gt_one, require_positive, triple_gap,
    RelError, RelResult, Residual, Root,
};
use crate::scalar::{Real, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Curve {
    Geodesic,
    Horocycle,
}

impl Curve {
    /// Geodesic curvature: 0 for geodesics, 1 for horocycles.
    pub fn kappa(self) -> u8 {
        match self {
            Curve::Geodesic => 0,
            Curve::Horocycle => 1,
        }
    }

    pub fn from_kappa(k: u8) -> Option<Curve> {
        match k {
            0 => Some(Curve::Geodesic),
            1 => Some(Curve::Horocycle),
            _ => None,
        }
    }

    fn letter(self) -> char {
        match self {
            Curve::Geodesic => 'g',
            Curve::Horocycle => 'h',
        }
    }
}

/// Curvature tags, one per object, written as a string over {g, h}.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CurvaturePattern(pub Vec<Curve>);

impl CurvaturePattern {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn all(n: usize, c: Curve) -> Self {
        CurvaturePattern(vec![c; n])
    }

    /// Every pattern of length `n`, geodesics first.
    pub fn enumerate(n: usize) -> Vec<CurvaturePattern> {
        (0..1usize << n)
            .map(|bits| {
                CurvaturePattern(
                    (0..n)
                        .map(|i| if bits >> (n - 1 - i) & 1 == 1 { Curve::Horocycle } else { Curve::Geodesic })
                        .collect(),
                )
            })
            .collect()
    }

    fn expect_len(&self, n: usize) -> RelResult<()> {
        if self.len() == n {
            Ok(())
        } else {
            Err(RelError::UnknownPattern(format!("{self} (expected {n} objects)")))
        }
    }
}

impl fmt::Display for CurvaturePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.0 {
            write!(f, "{}", c.letter())?;
        }
        Ok(())
    }
}

impl FromStr for CurvaturePattern {
    type Err = RelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|ch| match ch.to_ascii_lowercase() {
                'g' | '0' => Ok(Curve::Geodesic),
                'h' | '1' => Ok(Curve::Horocycle),
                _ => Err(RelError::UnknownPattern(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(CurvaturePattern)
    }
}

impl Serialize for CurvaturePattern {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CurvaturePattern {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

use Curve::{Geodesic as G, Horocycle as H};

/// The ten tabulated quadruplet cases, keyed by the kinds of (P, A, B, C).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum MixedCase {
    GgHg,
    GHgg,
    GHgH,
    GgHH,
    GHHH,
    Hggg,
    HHgg,
    HHHg,
    HHHH,
    Gggg,
}

impl MixedCase {
    fn lookup(kinds: [Curve; 4]) -> Option<MixedCase> {
        Some(match kinds {
            [G, G, H, G] => MixedCase::GgHg,
            [G, H, G, G] => MixedCase::GHgg,
            [G, H, G, H] => MixedCase::GHgH,
            [G, G, H, H] => MixedCase::GgHH,
            [G, H, H, H] => MixedCase::GHHH,
            [H, G, G, G] => MixedCase::Hggg,
            [H, H, G, G] => MixedCase::HHgg,
            [H, H, H, G] => MixedCase::HHHg,
            [H, H, H, H] => MixedCase::HHHH,
            [G, G, G, G] => MixedCase::Gggg,
            _ => return None,
        })
    }
}

/// Resolves a pattern over (P, A, B, C) to a tabulated case, swapping B and C
/// when only the mirror image is tabulated. Returns the case and whether the
/// swap was applied.
fn resolve(pattern: &CurvaturePattern) -> RelResult<(MixedCase, bool)> {
    pattern.expect_len(4)?;
    let k = [pattern.0[0], pattern.0[1], pattern.0[2], pattern.0[3]];
    if let Some(c) = MixedCase::lookup(k) {
        return Ok((c, false));
    }
    if let Some(c) = MixedCase::lookup([k[0], k[1], k[3], k[2]]) {
        return Ok((c, true));
    }
    Err(RelError::UnknownPattern(pattern.to_string()))
}

/// Whether [`mixed_next`] and [`mixed_residual`] cover the pattern.
pub fn mixed_supported(pattern: &CurvaturePattern) -> bool {
    resolve(pattern).is_ok()
}

fn check_inputs<R: Scalar>(case: MixedCase, vals: &[(&str, &R)]) -> RelResult<()> {
    for (n, v) in vals {
        if case == MixedCase::Gggg {
            require_gt_one(n, *v)?;
        } else {
            require_positive(n, *v)?;
        }
    }
    Ok(())
}

/// Weight X = PA from x = BC, y = AC, z = AB, Y = PB, Z = PC for objects
/// P, B, A, C in cyclic order with kinds given over (P, A, B, C).
pub fn mixed_next<R: Real>(pattern: &CurvaturePattern, x: &R, y: &R, z: &R, yy: &R, zz: &R) -> RelResult<R> {
    let (case, swap) = resolve(pattern)?;
    let (y, z, yy, zz) = if swap { (z, y, zz, yy) } else { (y, z, yy, zz) };
    check_inputs(case, &[("x", x), ("y", y), ("z", z), ("Y", yy), ("Z", zz)])?;
    let (x, y, z, yy, zz) = (x.clone(), y.clone(), z.clone(), yy.clone(), zz.clone());
    let one = R::one();
    let two = R::two();
    let x2 = x.square();
    let xyz2 = two.clone() * x.clone() * y.clone() * z.clone();
    let xyy2 = two.clone() * x.clone() * yy.clone() * zz.clone();
    let cross = x.clone() * y.clone() * yy.clone() + x.clone() * z.clone() * zz.clone();
    let sq = |what: &str, v: R| checked_sqrt(what, v);
    let denom_nonzero = |d: &R| -> RelResult<()> {
        if d.is_zero() {
            Err(RelError::ZeroDenominator("mixed_next"))
        } else {
            Ok(())
        }
    };
    let out = match case {
        MixedCase::Gggg => return geodesic_ptolemy_next(&x, &y, &z, &yy, &zz, Root::Plus),
        MixedCase::GgHg => {
            let r = sq("ggHg", (x2.clone() + z.square() + xyz2) * (x2.clone() + yy.square() + xyy2))?;
            (cross + z.clone() * yy.clone() + r) / x2
        }
        MixedCase::GHgg => {
            let r = sq(
                "gHgg",
                (y.square() + z.square() + xyz2) * (x2.clone() + yy.square() + zz.square() + xyy2 - one.clone()),
            )?;
            let d = x2 - one;
            denom_nonzero(&d)?;
            (cross + z.clone() * yy.clone() + y.clone() * zz.clone() + r) / d
        }
        MixedCase::GHgH => {
            let r = sq("gHgH", (y.square() + xyz2) * (x2.clone() + zz.square() + xyy2))?;
            (cross + y.clone() * zz.clone() + r) / x2
        }
        MixedCase::GgHH => {
            let r = sq(
                "ggHH",
                (x.clone() + two.clone() * y.clone() * z.clone()) * (x.clone() + two.clone() * yy.clone() * zz.clone()),
            )?;
            (y.clone() * yy.clone() + z.clone() * zz.clone() + r) / x
        }
        MixedCase::GHHH => {
            let r = sq(
                "gHHH",
                two.clone() * y.clone() * z.clone() * (x.clone() + two.clone() * yy.clone() * zz.clone()),
            )?;
            (y.clone() * yy.clone() + z.clone() * zz.clone() + r) / x
        }
        MixedCase::Hggg => {
            let r = sq(
                "Hggg",
                (x2.clone() + y.square() + z.square() + xyz2 - one.clone()) * (yy.square() + zz.square() + xyy2),
            )?;
            let d = x2 - one;
            denom_nonzero(&d)?;
            (cross + z.clone() * yy.clone() + y.clone() * zz.clone() + r) / d
        }
        MixedCase::HHgg => {
            let r = sq("HHgg", (y.square() + z.square() + xyz2) * (yy.square() + zz.square() + xyy2))?;
            let d = x2 - one;
            denom_nonzero(&d)?;
            (cross + z.clone() * yy.clone() + y.clone() * zz.clone() + r) / d
        }
        MixedCase::HHHg => {
            let r = sq("HHHg", (z.square() + xyz2) * (yy.square() + xyy2))?;
            (cross + z.clone() * yy.clone() + r) / x2
        }
        MixedCase::HHHH => {
            let s = (y.clone() * yy.clone()).sqrt() + (z.clone() * zz.clone()).sqrt();
            s.square() / x
        }
    };
    Ok(out)
}

/// Quadratic relation among the six weights of the case; see [`mixed_next`]
/// for the labeling.
pub fn mixed_residual<S: Scalar>(
    pattern: &CurvaturePattern,
    x: &S,
    y: &S,
    z: &S,
    xx: &S,
    yy: &S,
    zz: &S,
) -> RelResult<Residual<S>> {
    let (case, swap) = resolve(pattern)?;
    let (y, z, yy, zz) = if swap { (z, y, zz, yy) } else { (y, z, yy, zz) };
    if case == MixedCase::Gggg {
        return Ok(quadruplet_residual(x, y, z, xx, yy, zz));
    }
    check_inputs(case, &[("x", x), ("y", y), ("z", z), ("X", xx), ("Y", yy), ("Z", zz)])?;
    let one = S::one();
    let two = S::two();
    let m = |a: &S, b: &S| a.clone() * b.clone();
    let xyz2 = two.clone() * x.clone() * y.clone() * z.clone();
    // squared-term coefficients, cross coefficients (XY, YZ, XZ) and constant
    let (cx, cy, cz, kxy, kyz, kxz, k): (S, S, S, S, S, S, S) = match case {
        MixedCase::GgHg => (
            x.square(),
            y.square() - one.clone(),
            z.square(),
            m(x, y) + z.clone(),
            m(y, z) + x.clone(),
            m(x, z),
            x.square() + z.square() + xyz2,
        ),
        MixedCase::GHgg => (
            x.square() - one.clone(),
            y.square(),
            z.square(),
            m(x, y) + z.clone(),
            m(y, z),
            m(x, z) + y.clone(),
            y.square() + z.square() + xyz2,
        ),
        MixedCase::GHgH => (
            x.square(),
            y.square(),
            z.square(),
            m(x, y),
            m(y, z),
            m(x, z) + y.clone(),
            y.square() + xyz2,
        ),
        MixedCase::GgHH => (
            x.square(),
            y.square(),
            z.square(),
            m(x, y),
            m(y, z) + x.clone(),
            m(x, z),
            x.square() + xyz2,
        ),
        MixedCase::GHHH => (x.square(), y.square(), z.square(), m(x, y), m(y, z), m(x, z), xyz2),
        MixedCase::Hggg => (
            x.square() - one.clone(),
            y.square() - one.clone(),
            z.square() - one.clone(),
            m(x, y) + z.clone(),
            m(y, z) + x.clone(),
            m(x, z) + y.clone(),
            S::zero(),
        ),
        MixedCase::HHgg => (
            x.square() - one.clone(),
            y.square(),
            z.square(),
            m(x, y) + z.clone(),
            m(y, z),
            m(x, z) + y.clone(),
            S::zero(),
        ),
        MixedCase::HHHg => (x.square(), y.square(), z.square(), m(x, y) + z.clone(), m(y, z), m(x, z), S::zero()),
        MixedCase::HHHH => (x.square(), y.square(), z.square(), m(x, y), m(y, z), m(x, z), S::zero()),
        MixedCase::Gggg => unreachable!(),
    };
    Ok(Residual::from_terms(&[
        cx * xx.square(),
        cy * yy.square(),
        cz * zz.square(),
        -(two.clone() * kxy * m(xx, yy)),
        -(two.clone() * kyz * m(yy, zz)),
        -(two * kxz * m(xx, zz)),
        -k,
    ]))
}

/// Length along P between the feet of A and B (perpendicular feet on a
/// geodesic, nearest-point projections on a horocycle). Kinds are given over
/// (P, A, B); arc length is measured on the horocycle itself.
pub fn foot_gap_m<R: Real>(pattern: &CurvaturePattern, pa: &R, pb: &R, ab: &R) -> RelResult<R> {
    pattern.expect_len(3)?;
    let k = [pattern.0[0], pattern.0[1], pattern.0[2]];
    let (k, pa, pb) = match k {
        [H, G, H] | [G, H, G] => ([k[0], k[2], k[1]], pb, pa),
        _ => (k, pa, pb),
    };
    let four = R::from_i64(4);
    let two = R::two();
    match k {
        [G, G, G] => triple_gap(ab, pa, pb),
        [H, H, H] => {
            for (n, v) in [("PA", pa), ("PB", pb), ("AB", ab)] {
                require_positive(n, v)?;
            }
            Ok((ab.clone() / (two * pa.clone() * pb.clone())).sqrt())
        }
        [H, H, G] => {
            for (n, v) in [("PA", pa), ("PB", pb), ("AB", ab)] {
                require_positive(n, v)?;
            }
            let t = R::one() / (four * pb.square()) + ab.clone() / (two * pa.clone() * pb.clone());
            Ok(t.sqrt())
        }
        [H, G, G] => {
            require_positive("PA", pa)?;
            require_positive("PB", pb)?;
            require_gt_one("AB", ab)?;
            let t = R::one() / (four.clone() * pa.square())
                + R::one() / (four * pb.square())
                + ab.clone() / (two * pa.clone() * pb.clone());
            Ok(t.sqrt())
        }
        [G, H, H] => {
            for (n, v) in [("PA", pa), ("PB", pb), ("AB", ab)] {
                require_positive(n, v)?;
            }
            Ok((R::one() + ab.clone() / (pa.clone() * pb.clone())).acosh())
        }
        [G, G, H] => {
            require_gt_one("PA", pa)?;
            require_positive("PB", pb)?;
            require_positive("AB", ab)?;
            let arg = (pa.clone() * pb.clone() + ab.clone()) / (pb.clone() * (pa.square() - R::one()).sqrt());
            if arg < R::one() {
                return Err(RelError::Domain(format!("arccosh argument {arg} below 1")));
            }
            Ok(arg.acosh())
        }
        _ => unreachable!(),
    }
}

/// Additivity of feet along P: m(P;B,C) = m(P;B,A) + m(P;A,C) for P, B, A, C
/// in cyclic order. Kinds and labels as in [`mixed_next`].
#[allow(clippy::too_many_arguments)]
pub fn mixed_harmonic_residual<R: Real>(
    pattern: &CurvaturePattern,
    x: &R,
    y: &R,
    z: &R,
    xx: &R,
    yy: &R,
    zz: &R,
) -> RelResult<Residual<R>> {
    pattern.expect_len(4)?;
    let [p, a, b, c] = [pattern.0[0], pattern.0[1], pattern.0[2], pattern.0[3]];
    let pat = |u: Curve, v: Curve| CurvaturePattern(vec![p, u, v]);
    let whole = foot_gap_m(&pat(b, c), yy, zz, x)?;
    let left = foot_gap_m(&pat(b, a), yy, xx, z)?;
    let right = foot_gap_m(&pat(a, c), xx, zz, y)?;
    Ok(Residual::new(whole.clone() - left - right, whole))
}

/// (e^{d/2} + (1−κ_U)(1−κ_V)e^{−d/2})/2.
pub fn generalized_halfweight<R: Real>(d: &R, ku: Curve, kv: Curve) -> R {
    let half = d.clone() / R::two();
    let e = half.exp();
    if ku == G && kv == G {
        (e.clone() + R::one() / e) / R::two()
    } else {
        e / R::two()
    }
}

/// Determinant of the bordered matrix with corner 2, border 1−κ_i and
/// entries w̄_ij². Zero for any four disjoint geodesics or horocycles.
pub fn cayley_menger_residual<S: Scalar>(weights: &[[S; 4]; 4], pattern: &CurvaturePattern) -> RelResult<Residual<S>> {
    pattern.expect_len(4)?;
    for i in 0..4 {
        if !weights[i][i].is_zero() {
            return Err(RelError::Precondition(format!("diagonal entry {i} is not zero")));
        }
        for j in 0..i {
            if weights[i][j] != weights[j][i] {
                return Err(RelError::Precondition(format!("weights not symmetric at ({i},{j})")));
            }
        }
    }
    let mut m: Vec<Vec<S>> = vec![vec![S::zero(); 5]; 5];
    m[0][0] = S::two();
    for i in 0..4 {
        let b = S::from_i64(1 - pattern.0[i].kappa() as i64);
        m[0][i + 1] = b.clone();
        m[i + 1][0] = b;
        for j in 0..4 {
            m[i + 1][j + 1] = weights[i][j].square();
        }
    }
    Ok(Residual::from_terms(&leibniz_terms(&m)))
}

/// Signed permutation products of a square matrix; they sum to its
/// determinant.
pub(crate) fn leibniz_terms<S: Scalar>(m: &[Vec<S>]) -> Vec<S> {
    let n = m.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    permute(&mut perm, 0, true, m, &mut out);
    out
}

fn permute<S: Scalar>(perm: &mut Vec<usize>, k: usize, even: bool, m: &[Vec<S>], out: &mut Vec<S>) {
    let n = perm.len();
    if k == n {
        let mut t = S::one();
        for (i, &j) in perm.iter().enumerate() {
            if m[i][j].is_zero() {
                return;
            }
            t = t * m[i][j].clone();
        }
        out.push(if even { t } else { -t });
        return;
    }
    for i in k..n {
        perm.swap(k, i);
        permute(perm, k + 1, if i == k { even } else { !even }, m, out);
        perm.swap(k, i);
    }
}

/// Penner's Ptolemy relation on half-lambda (or lambda) lengths.
pub fn penner_next<R: Real>(x: &R, y: &R, z: &R, yy: &R, zz: &R) -> RelResult<R> {
    require_positive("x", x)?;
    Ok((y.clone() * yy.clone() + z.clone() * zz.clone()) / x.clone())
}

pub fn penner_residual<S: Scalar>(x: &S, y: &S, z: &S, xx: &S, yy: &S, zz: &S) -> Residual<S> {
    Residual::from_terms(&[
        x.clone() * xx.clone(),
        -(y.clone() * yy.clone()),
        -(z.clone() * zz.clone()),
    ])
}
