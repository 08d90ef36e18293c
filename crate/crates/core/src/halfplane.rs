//! Upper half-plane model: geodesics, horocycles and points with distances,
//! perpendiculars, intersections and random configurations.
//!
//! Every metric computation first moves one object to a normal form (the
//! imaginary axis, the line y = 1 or the point i) with a Möbius map, then uses
//! a closed form. This keeps the oracle independent of the relation formulas.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::relations::{Curve, CurvaturePattern};
use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("objects intersect or are tangent")]
    NotDisjoint,
    #[error("geodesics do not cross")]
    NotCrossing,
    #[error("geodesics share an ideal endpoint")]
    Asymptotic,
    #[error("invalid object: {0}")]
    Invalid(String),
}

pub type GeomResult<T> = Result<T, GeomError>;

/// Extended real line.
#[derive(Clone, Debug, PartialEq)]
pub enum Ext<R> {
    Finite(R),
    Infinity,
}

impl<R: Real> Ext<R> {
    pub fn finite(&self) -> Option<&R> {
        match self {
            Ext::Finite(v) => Some(v),
            Ext::Infinity => None,
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Ext::Finite(v) => Value::String(v.to_string()),
            Ext::Infinity => Value::String("inf".into()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum HObject<R> {
    Geodesic { a: Ext<R>, b: Ext<R> },
    /// `size` is the Euclidean diameter, or the height of the horizontal line
    /// when the base is ∞.
    Horocycle { base: Ext<R>, size: R },
    Point { x: R, y: R },
}

impl<R: Real> HObject<R> {
    pub fn geodesic(a: R, b: R) -> Self {
        HObject::Geodesic { a: Ext::Finite(a), b: Ext::Finite(b) }
    }

    pub fn horocycle(base: R, diameter: R) -> Self {
        HObject::Horocycle { base: Ext::Finite(base), size: diameter }
    }

    pub fn horocycle_at_infinity(height: R) -> Self {
        HObject::Horocycle { base: Ext::Infinity, size: height }
    }

    pub fn point(x: R, y: R) -> Self {
        HObject::Point { x, y }
    }

    pub fn curve(&self) -> Option<Curve> {
        match self {
            HObject::Geodesic { .. } => Some(Curve::Geodesic),
            HObject::Horocycle { .. } => Some(Curve::Horocycle),
            HObject::Point { .. } => None,
        }
    }

    pub fn validate(&self) -> GeomResult<()> {
        match self {
            HObject::Geodesic { a, b } if a == b => Err(GeomError::Invalid("geodesic endpoints coincide".into())),
            HObject::Horocycle { size, .. } if *size <= R::zero() => {
                Err(GeomError::Invalid("horocycle size must be positive".into()))
            }
            HObject::Point { y, .. } if *y <= R::zero() => Err(GeomError::Invalid("point must have y > 0".into())),
            _ => Ok(()),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            HObject::Geodesic { a, b } => json!({"kind": "geodesic", "a": a.to_json(), "b": b.to_json()}),
            HObject::Horocycle { base, size } => {
                json!({"kind": "horocycle", "base": base.to_json(), "size": size.to_string()})
            }
            HObject::Point { x, y } => json!({"kind": "point", "x": x.to_string(), "y": y.to_string()}),
        }
    }
}

/// z ↦ (az + b)/(cz + d) with ad − bc > 0.
#[derive(Clone, Debug, PartialEq)]
pub struct Mobius<R> {
    pub a: R,
    pub b: R,
    pub c: R,
    pub d: R,
}

impl<R: Real> Mobius<R> {
    pub fn new(a: R, b: R, c: R, d: R) -> GeomResult<Self> {
        if a.clone() * d.clone() - b.clone() * c.clone() <= R::zero() {
            return Err(GeomError::Invalid("Möbius determinant must be positive".into()));
        }
        Ok(Mobius { a, b, c, d })
    }

    pub fn identity() -> Self {
        Mobius { a: R::one(), b: R::zero(), c: R::zero(), d: R::one() }
    }

    /// Random element of SL(2,R) with moderate entries.
    pub fn random(rng: &mut impl Rng) -> Self {
        let a: f64 = rng.gen_range(0.5..2.0);
        let b: f64 = rng.gen_range(-1.0..1.0);
        let c: f64 = rng.gen_range(-1.0..1.0);
        let (a, b, c) = (R::from_f64(a), R::from_f64(b), R::from_f64(c));
        let d = (R::one() + b.clone() * c.clone()) / a.clone();
        Mobius { a, b, c, d }
    }

    pub fn inverse(&self) -> Self {
        Mobius { a: self.d.clone(), b: -self.b.clone(), c: -self.c.clone(), d: self.a.clone() }
    }

    pub fn compose(&self, inner: &Mobius<R>) -> Self {
        Mobius {
            a: self.a.clone() * inner.a.clone() + self.b.clone() * inner.c.clone(),
            b: self.a.clone() * inner.b.clone() + self.b.clone() * inner.d.clone(),
            c: self.c.clone() * inner.a.clone() + self.d.clone() * inner.c.clone(),
            d: self.c.clone() * inner.b.clone() + self.d.clone() * inner.d.clone(),
        }
    }

    pub fn apply_ext(&self, z: &Ext<R>) -> Ext<R> {
        match z {
            Ext::Infinity => {
                if self.c.is_zero() {
                    Ext::Infinity
                } else {
                    Ext::Finite(self.a.clone() / self.c.clone())
                }
            }
            Ext::Finite(x) => {
                let den = self.c.clone() * x.clone() + self.d.clone();
                if den.is_zero() {
                    Ext::Infinity
                } else {
                    Ext::Finite((self.a.clone() * x.clone() + self.b.clone()) / den)
                }
            }
        }
    }

    pub fn apply(&self, z: &Complex<R>) -> Complex<R> {
        let num = z.clone() * self.a.clone() + Complex::new(self.b.clone(), R::zero());
        let den = z.clone() * self.c.clone() + Complex::new(self.d.clone(), R::zero());
        num / den
    }

    pub fn apply_object(&self, o: &HObject<R>) -> HObject<R> {
        match o {
            HObject::Geodesic { a, b } => HObject::Geodesic { a: self.apply_ext(a), b: self.apply_ext(b) },
            HObject::Point { x, y } => {
                let w = self.apply(&Complex::new(x.clone(), y.clone()));
                HObject::Point { x: w.re, y: w.im }
            }
            HObject::Horocycle { base, size } => {
                let on = horocycle_top(base, size);
                let w = self.apply(&on);
                match self.apply_ext(base) {
                    Ext::Infinity => HObject::Horocycle { base: Ext::Infinity, size: w.im },
                    Ext::Finite(q) => {
                        let dx = w.re - q.clone();
                        let diam = (dx.square() + w.im.square()) / w.im;
                        HObject::Horocycle { base: Ext::Finite(q), size: diam }
                    }
                }
            }
        }
    }
}

/// A point on the horocycle: the top of the circle, or i·height.
fn horocycle_top<R: Real>(base: &Ext<R>, size: &R) -> Complex<R> {
    match base {
        Ext::Finite(q) => Complex::new(q.clone(), size.clone()),
        Ext::Infinity => Complex::new(R::zero(), size.clone()),
    }
}

/// Isometry taking the geodesic a→b to 0→∞.
fn normalize_geodesic<R: Real>(a: &Ext<R>, b: &Ext<R>) -> Mobius<R> {
    let one = R::one();
    let zero = R::zero();
    match (a, b) {
        (Ext::Finite(a), Ext::Infinity) => Mobius { a: one.clone(), b: -a.clone(), c: zero, d: one },
        (Ext::Infinity, Ext::Finite(b)) => Mobius { a: zero, b: -one.clone(), c: one, d: -b.clone() },
        (Ext::Finite(a), Ext::Finite(b)) => {
            if b > a {
                // (z − a)/(b − z)
                Mobius { a: one.clone(), b: -a.clone(), c: -one, d: b.clone() }
            } else {
                // (z − a)/(z − b)
                Mobius { a: one.clone(), b: -a.clone(), c: one, d: -b.clone() }
            }
        }
        (Ext::Infinity, Ext::Infinity) => Mobius::identity(),
    }
}

/// Isometry taking the horocycle to the line y = 1 (base to ∞).
fn normalize_horocycle<R: Real>(base: &Ext<R>, size: &R) -> Mobius<R> {
    match base {
        // z ↦ −D/(z − q)
        Ext::Finite(q) => Mobius { a: R::zero(), b: -size.clone(), c: R::one(), d: -q.clone() },
        Ext::Infinity => Mobius { a: R::one(), b: R::zero(), c: R::zero(), d: size.clone() },
    }
}

/// Isometry taking the point to i.
fn normalize_point<R: Real>(x: &R, y: &R) -> Mobius<R> {
    Mobius { a: R::one(), b: -x.clone(), c: R::zero(), d: y.clone() }
}

fn normalizer<R: Real>(o: &HObject<R>) -> Mobius<R> {
    match o {
        HObject::Geodesic { a, b } => normalize_geodesic(a, b),
        HObject::Horocycle { base, size } => normalize_horocycle(base, size),
        HObject::Point { x, y } => normalize_point(x, y),
    }
}

/// Hyperbolic distance between two objects. Signed when a horocycle meets a
/// point or another horocycle: negative for overlap, zero for tangency.
pub fn distance<R: Real>(u: &HObject<R>, v: &HObject<R>) -> GeomResult<R> {
    u.validate()?;
    v.validate()?;
    // horocycles are normalized first, then geodesics, then points
    let rank = |o: &HObject<R>| match o {
        HObject::Horocycle { .. } => 0,
        HObject::Geodesic { .. } => 1,
        HObject::Point { .. } => 2,
    };
    let (u, v) = if rank(v) < rank(u) { (v, u) } else { (u, v) };
    let m = normalizer(u);
    let w = m.apply_object(v);
    match (u, &w) {
        (HObject::Horocycle { .. }, HObject::Horocycle { base, size }) => match base {
            Ext::Infinity => Err(GeomError::NotDisjoint),
            Ext::Finite(_) => Ok(-size.ln()),
        },
        (HObject::Horocycle { .. }, HObject::Geodesic { a, b }) => match (a, b) {
            (Ext::Finite(a), Ext::Finite(b)) => {
                let r = (b.clone() - a.clone()).abs() / R::two();
                if r >= R::one() {
                    Err(GeomError::NotDisjoint)
                } else {
                    Ok(-r.ln())
                }
            }
            _ => Err(GeomError::NotDisjoint),
        },
        (HObject::Horocycle { .. }, HObject::Point { y, .. }) => Ok(-y.ln()),
        (HObject::Geodesic { .. }, HObject::Geodesic { a, b }) => match (a, b) {
            (Ext::Finite(c), Ext::Finite(d)) => {
                if c.is_zero() || d.is_zero() {
                    return Err(GeomError::Asymptotic);
                }
                if (*c < R::zero()) != (*d < R::zero()) {
                    return Err(GeomError::NotDisjoint);
                }
                let ch = (c.clone() + d.clone()).abs() / (d.clone() - c.clone()).abs();
                Ok(ch.acosh())
            }
            _ => Err(GeomError::Asymptotic),
        },
        (HObject::Geodesic { .. }, HObject::Point { x, y }) => {
            let ch = (x.square() + y.square()).sqrt() / y.clone();
            Ok(ch.acosh())
        }
        (HObject::Point { .. }, HObject::Point { x, y }) => {
            let ch = R::one() + (x.square() + (y.clone() - R::one()).square()) / (R::two() * y.clone());
            Ok(ch.acosh())
        }
        _ => unreachable!(),
    }
}

/// Weight conventions for a distance d.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Convention {
    Distance,
    /// cosh d
    CoshDistance,
    /// cosh(d/2)
    HalfTrace,
    /// sinh d
    SinhDistance,
    /// ½e^d
    HalfExp,
    /// ½e^{d/2}
    HalfLambda,
    /// e^{d/2}
    Lambda,
}

impl Convention {
    pub fn apply<R: Real>(self, d: &R) -> R {
        let two = R::two();
        match self {
            Convention::Distance => d.clone(),
            Convention::CoshDistance => d.cosh(),
            Convention::HalfTrace => (d.clone() / two).cosh(),
            Convention::SinhDistance => d.sinh(),
            Convention::HalfExp => d.exp() / two,
            Convention::HalfLambda => (d.clone() / two.clone()).exp() / two,
            Convention::Lambda => (d.clone() / two).exp(),
        }
    }

    /// cosh d between geodesics and points, ½e^d once a horocycle is involved.
    pub fn standard<R: Real>(u: &HObject<R>, v: &HObject<R>) -> Convention {
        if u.curve() == Some(Curve::Horocycle) || v.curve() == Some(Curve::Horocycle) {
            Convention::HalfExp
        } else {
            Convention::CoshDistance
        }
    }
}

/// Weight in the given convention. Lambda-type conventions accept tangent or
/// overlapping horocycles; the others need a positive distance.
pub fn pair_weight<R: Real>(u: &HObject<R>, v: &HObject<R>, convention: Convention) -> GeomResult<R> {
    let d = distance(u, v)?;
    let signed_ok = matches!(convention, Convention::Distance | Convention::HalfLambda | Convention::Lambda);
    if !signed_ok && d <= R::zero() {
        return Err(GeomError::NotDisjoint);
    }
    Ok(convention.apply(&d))
}

/// Weight in the standard convention of [`Convention::standard`].
pub fn standard_weight<R: Real>(u: &HObject<R>, v: &HObject<R>) -> GeomResult<R> {
    pair_weight(u, v, Convention::standard(u, v))
}

/// Generalized half-weight: cosh(d/2) between geodesics, ½e^{d/2} otherwise.
pub fn half_weight<R: Real>(u: &HObject<R>, v: &HObject<R>) -> GeomResult<R> {
    let d = distance(u, v)?;
    match (u.curve(), v.curve()) {
        (Some(Curve::Geodesic), Some(Curve::Geodesic)) => Ok(Convention::HalfTrace.apply(&d)),
        _ => Ok(Convention::HalfLambda.apply(&d)),
    }
}

/// Common perpendicular of two disjoint geodesics with its feet on each.
pub fn common_perpendicular<R: Real>(
    g1: &HObject<R>,
    g2: &HObject<R>,
) -> GeomResult<(HObject<R>, Complex<R>, Complex<R>)> {
    let (HObject::Geodesic { a, b }, HObject::Geodesic { .. }) = (g1, g2) else {
        return Err(GeomError::Invalid("common perpendicular needs two geodesics".into()));
    };
    distance(g1, g2)?;
    let m = normalize_geodesic(a, b);
    let HObject::Geodesic { a: c, b: d } = m.apply_object(g2) else { unreachable!() };
    let (c, d) = (c.finite().unwrap().clone(), d.finite().unwrap().clone());
    let rho = (c.clone() * d.clone()).sqrt();
    let inv = m.inverse();
    let perp = HObject::Geodesic {
        a: inv.apply_ext(&Ext::Finite(-rho.clone())),
        b: inv.apply_ext(&Ext::Finite(rho.clone())),
    };
    let foot1 = inv.apply(&Complex::new(R::zero(), rho.clone()));
    let mid = (c.clone() + d.clone()) / R::two();
    let r = (d - c).abs() / R::two();
    let x = (rho.square() + mid.square() - r.square()) / (R::two() * mid);
    let y = (rho.square() - x.square()).sqrt();
    let foot2 = inv.apply(&Complex::new(x, y));
    Ok((perp, foot1, foot2))
}

/// Crossing point of two geodesics and the angle in (0, π) between them, each
/// oriented from its first endpoint to its second.
pub fn intersect<R: Real>(g1: &HObject<R>, g2: &HObject<R>) -> GeomResult<(Complex<R>, R)> {
    let (HObject::Geodesic { a, b }, HObject::Geodesic { .. }) = (g1, g2) else {
        return Err(GeomError::Invalid("intersection needs two geodesics".into()));
    };
    let m = normalize_geodesic(a, b);
    let HObject::Geodesic { a: c, b: d } = m.apply_object(g2) else { unreachable!() };
    let (Ext::Finite(c), Ext::Finite(d)) = (c, d) else {
        return Err(GeomError::NotCrossing);
    };
    if (c < R::zero()) == (d < R::zero()) || c.is_zero() || d.is_zero() {
        return Err(GeomError::NotCrossing);
    }
    let y = (-(c.clone() * d.clone())).sqrt();
    let mid = (c.clone() + d.clone()) / R::two();
    // tangent of g2 at iy, oriented c → d; g1 points straight up
    let up_component = if c < d { mid.clone() } else { -mid.clone() };
    let cos = up_component / (mid.square() + y.square()).sqrt();
    let angle = cos.acos();
    let p = m.inverse().apply(&Complex::new(R::zero(), y));
    Ok((p, angle))
}

/// Angle at `o` between the geodesic rays towards two ideal points.
pub fn ray_angle<R: Real>(o: &Complex<R>, t1: &Ext<R>, t2: &Ext<R>) -> R {
    let m = normalize_point(&o.re, &o.im);
    // Cayley map to the disk sends i to the centre; rays become radii
    let disk = |t: &Ext<R>| -> Complex<R> {
        match m.apply_ext(t) {
            Ext::Infinity => Complex::new(R::one(), R::zero()),
            Ext::Finite(s) => {
                let z = Complex::new(s, R::zero());
                let i = Complex::new(R::zero(), R::one());
                (z.clone() - i.clone()) / (z + i)
            }
        }
    };
    let (w1, w2) = (disk(t1), disk(t2));
    let dot = w1.re * w2.re + w1.im * w2.im;
    let one = R::one();
    let dot = if dot > one.clone() { one.clone() } else if dot < -one.clone() { -one } else { dot };
    dot.acos()
}

/// Coordinate of the foot of `a` on `p`: log-height along a geodesic mapped
/// to the imaginary axis, or x along a horocycle mapped to y = 1.
fn foot_coordinate<R: Real>(p: &HObject<R>, a: &HObject<R>) -> GeomResult<R> {
    let m = normalizer(p);
    let w = m.apply_object(a);
    match p {
        HObject::Geodesic { .. } => match w {
            HObject::Geodesic { a: Ext::Finite(c), b: Ext::Finite(d) } => Ok((c * d).abs().sqrt().ln()),
            HObject::Horocycle { base: Ext::Finite(q), .. } => Ok(q.abs().ln()),
            HObject::Point { x, y } => Ok((x.square() + y.square()).sqrt().ln()),
            _ => Err(GeomError::Asymptotic),
        },
        HObject::Horocycle { .. } => match w {
            HObject::Geodesic { a: Ext::Finite(c), b: Ext::Finite(d) } => Ok((c + d) / R::two()),
            HObject::Horocycle { base: Ext::Finite(q), .. } => Ok(q),
            HObject::Point { x, .. } => Ok(x),
            _ => Err(GeomError::Asymptotic),
        },
        HObject::Point { .. } => Err(GeomError::Invalid("feet are taken on a curve".into())),
    }
}

/// Length along `p` between the feet of `a` and `b`.
pub fn foot_gap<R: Real>(p: &HObject<R>, a: &HObject<R>, b: &HObject<R>) -> GeomResult<R> {
    Ok((foot_coordinate(p, a)? - foot_coordinate(p, b)?).abs())
}

/// Objects in cyclic order around the boundary, reproducible from the seed.
#[derive(Clone, Debug, PartialEq)]
pub struct CyclicConfig<R> {
    pub objects: Vec<HObject<R>>,
    pub seed: u64,
    pub index: u64,
}

impl<R: Real> CyclicConfig<R> {
    pub fn transformed(&self, m: &Mobius<R>) -> Self {
        CyclicConfig { objects: self.objects.iter().map(|o| m.apply_object(o)).collect(), ..self.clone() }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "seed": self.seed,
            "index": self.index,
            "precision_bits": R::BITS,
            "objects": self.objects.iter().map(HObject::to_json).collect::<Vec<_>>(),
        })
    }

    /// Pairwise disjointness, checked through the distance oracle.
    pub fn check_disjoint(&self) -> GeomResult<()> {
        for i in 0..self.objects.len() {
            for j in 0..i {
                let d = distance(&self.objects[i], &self.objects[j])?;
                if d <= R::zero() {
                    return Err(GeomError::NotDisjoint);
                }
            }
        }
        Ok(())
    }
}

/// RNG stream for shard `index` of a run seeded with `seed`.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Disjoint geodesics and horocycles in increasing cyclic order along the
/// real line, kinds taken from `pattern`.
///
/// Geodesics span consecutive disjoint intervals; each horocycle sits at the
/// midpoint of its interval and its diameter is a random fraction of the
/// largest one keeping it clear of every other object.
pub fn random_cyclic_config<R: Real>(pattern: &CurvaturePattern, seed: u64, index: u64) -> CyclicConfig<R> {
    let mut rng = stream_rng(seed, index);
    let n = pattern.len();
    let mut pts: Vec<f64> = (0..2 * n).map(|_| rng.gen_range(-10.0..10.0)).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let intervals: Vec<(f64, f64)> = (0..n).map(|i| (pts[2 * i], pts[2 * i + 1])).collect();
    let mut objects = Vec::with_capacity(n);
    for (i, kind) in pattern.0.iter().enumerate() {
        let (a, b) = intervals[i];
        match kind {
            Curve::Geodesic => objects.push(HObject::geodesic(R::from_f64(a), R::from_f64(b))),
            Curve::Horocycle => {
                let p = (a + b) / 2.0;
                let mut lim = f64::INFINITY;
                for (j, other) in pattern.0.iter().enumerate() {
                    if j == i {
                        continue;
                    }
                    let (c, d) = intervals[j];
                    lim = lim.min(match other {
                        Curve::Geodesic => {
                            let (m, r) = ((c + d) / 2.0, (d - c) / 2.0);
                            ((p - m).powi(2) - r * r) / r
                        }
                        Curve::Horocycle => (p - (c + d) / 2.0).abs(),
                    });
                }
                let diam = lim * rng.gen_range(0.05..0.5);
                objects.push(HObject::horocycle(R::from_f64(p), R::from_f64(diam)));
            }
        }
    }
    CyclicConfig { objects, seed, index }
}

/// As [`random_cyclic_config`], then moved by a random isometry drawn from
/// the same stream.
pub fn random_moved_config<R: Real>(pattern: &CurvaturePattern, seed: u64, index: u64) -> CyclicConfig<R> {
    let base = random_cyclic_config::<R>(pattern, seed, index);
    let mut rng = stream_rng(seed ^ 0x9e37_79b9_7f4a_7c15, index);
    base.transformed(&Mobius::random(&mut rng))
}
