//! Five-object relations: orthoquadrilaterals and the shape corollaries, for
//! geodesics and for horocycles.
//!
//! Objects A, P, B, C, D are in cyclic order and O is where the common
//! perpendicular of A and C crosses the one of B and D.

use serde::{Deserialize, Serialize};

use super::{require_gt_one, require_positive, RelError, RelResult, Residual};
use crate::scalar::{Real, Scalar};

/// (PA·OC + PC·OA)/(PB·OD + PD·OB) − sinh(AC)/sinh(BD), all cosh weights.
#[allow(clippy::too_many_arguments)]
pub fn quintet_geodesic_residual<R: Real>(
    pa: &R,
    pb: &R,
    pc: &R,
    pd: &R,
    oa: &R,
    ob: &R,
    oc: &R,
    od: &R,
    sinh_ac: &R,
    sinh_bd: &R,
) -> RelResult<Residual<R>> {
    for (n, v) in [("PA", pa), ("PB", pb), ("PC", pc), ("PD", pd)] {
        require_gt_one(n, v)?;
    }
    let den = pb.clone() * od.clone() + pd.clone() * ob.clone();
    if den.is_zero() || sinh_bd.is_zero() {
        return Err(RelError::ZeroDenominator("quintet_geodesic_residual"));
    }
    let lhs = (pa.clone() * oc.clone() + pc.clone() * oa.clone()) / den;
    Ok(Residual::between(lhs, sinh_ac.clone() / sinh_bd.clone()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShapeKind {
    IsoscelesTrapezoid,
    Rectangle,
    Parallelogram,
    Kite,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 4] =
        [ShapeKind::IsoscelesTrapezoid, ShapeKind::Rectangle, ShapeKind::Parallelogram, ShapeKind::Kite];
}

/// Cosh weights of five geodesics A, P, B, C, D in cyclic order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuintetWeights<S> {
    pub pa: S,
    pub pb: S,
    pub pc: S,
    pub pd: S,
    pub ab: S,
    pub ac: S,
    pub ad: S,
    pub bc: S,
    pub bd: S,
    pub cd: S,
}

fn check_equal<R: Real>(name: &str, a: &R, b: &R, tol: f64) -> RelResult<()> {
    let scale = a.abs().max_of(b.abs()).max_of(R::one());
    if ((a.clone() - b.clone()).abs() / scale).to_f64() <= tol {
        Ok(())
    } else {
        Err(RelError::Precondition(format!("{name}: {a} != {b}")))
    }
}

fn half_trace_sq<R: Real>(x: &R) -> R {
    (x.clone() + R::one()) / R::two()
}

/// Relation for a geodesic shape. The hypothesis equalities are checked to
/// relative tolerance `hyp_tol` before evaluation.
pub fn shape_residual<R: Real>(kind: ShapeKind, w: &QuintetWeights<R>, hyp_tol: f64) -> RelResult<Residual<R>> {
    for (n, v) in [
        ("PA", &w.pa),
        ("PB", &w.pb),
        ("PC", &w.pc),
        ("PD", &w.pd),
        ("AB", &w.ab),
        ("AC", &w.ac),
        ("AD", &w.ad),
        ("BC", &w.bc),
        ("BD", &w.bd),
        ("CD", &w.cd),
    ] {
        require_gt_one(n, v)?;
    }
    match kind {
        ShapeKind::IsoscelesTrapezoid => {
            check_equal("AD = BC", &w.ad, &w.bc, hyp_tol)?;
            check_equal("AC = BD", &w.ac, &w.bd, hyp_tol)?;
            let ab = half_trace_sq(&w.ab).sqrt();
            let cd = half_trace_sq(&w.cd).sqrt();
            let lhs = (half_trace_sq(&w.pa) - half_trace_sq(&w.pb)) / ab;
            let rhs = (half_trace_sq(&w.pd) - half_trace_sq(&w.pc)) / cd;
            Ok(Residual::between(lhs, rhs))
        }
        ShapeKind::Rectangle => {
            check_equal("AB = CD", &w.ab, &w.cd, hyp_tol)?;
            check_equal("AD = BC", &w.ad, &w.bc, hyp_tol)?;
            check_equal("AC = BD", &w.ac, &w.bd, hyp_tol)?;
            Ok(Residual::from_terms(&[
                half_trace_sq(&w.pa),
                half_trace_sq(&w.pc),
                -half_trace_sq(&w.pb),
                -half_trace_sq(&w.pd),
            ]))
        }
        ShapeKind::Parallelogram => {
            check_equal("AB = CD", &w.ab, &w.cd, hyp_tol)?;
            check_equal("AD = BC", &w.ad, &w.bc, hyp_tol)?;
            let lhs = (w.pa.clone() + w.pc.clone()) / (w.pb.clone() + w.pd.clone());
            let rhs = ((w.ac.clone() - R::one()) / (w.bd.clone() - R::one())).sqrt();
            Ok(Residual::between(lhs, rhs))
        }
        ShapeKind::Kite => {
            check_equal("AB = AD", &w.ab, &w.ad, hyp_tol)?;
            check_equal("CB = CD", &w.bc, &w.cd, hyp_tol)?;
            let d = w.ac.square() - R::one();
            let two = R::two();
            let ca = two.clone() * (w.ac.clone() * w.bc.clone() + w.ab.clone()) / d.clone();
            let cc = two * (w.ac.clone() * w.ab.clone() + w.bc.clone()) / d;
            Ok(Residual::from_terms(&[w.pd.clone(), w.pb.clone(), -(ca * w.pa.clone()), -(cc * w.pc.clone())]))
        }
    }
}

/// Data for five horocycles A, P, B, C, D in cyclic order.
///
/// `p*` and `o*` are half-exp weights ½e^d (O is a point, so ½e^d of the
/// signed distance to the horocycle); the pair fields are half-lambda lengths
/// ½e^{d/2}; `alpha` is the angle at O between the rays to the bases of A
/// and P.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoroQuintet<S> {
    pub pa: S,
    pub pb: S,
    pub pc: S,
    pub pd: S,
    pub op: S,
    pub oa: S,
    pub ob: S,
    pub oc: S,
    pub od: S,
    pub alpha: S,
    pub ab: S,
    pub ac: S,
    pub ad: S,
    pub bc: S,
    pub bd: S,
    pub cd: S,
}

#[derive(Clone, Debug)]
pub struct HoroQuintetResiduals<S> {
    pub pentagon: Residual<S>,
    /// OA, OB, OC, OD each against the half-lambda formula.
    pub center: [Residual<S>; 4],
    pub quadrilateral: Residual<S>,
    /// The same ratio written through the O weights.
    pub quadrilateral_center: Residual<S>,
}

impl<S: Scalar> HoroQuintetResiduals<S> {
    pub fn worst(&self) -> f64 {
        let mut w = self.pentagon.relative_f64().max(self.quadrilateral.relative_f64());
        w = w.max(self.quadrilateral_center.relative_f64());
        for c in &self.center {
            w = w.max(c.relative_f64());
        }
        w
    }
}

fn reject_tangent<R: Real>(name: &str, v: &R) -> RelResult<()> {
    if *v > R::one() / R::two() {
        Ok(())
    } else {
        Err(RelError::Precondition(format!("{name} = {v}: horocycles tangent or overlapping")))
    }
}

pub fn horo_quintet<R: Real>(q: &HoroQuintet<R>) -> RelResult<HoroQuintetResiduals<R>> {
    for (n, v) in [("AB", &q.ab), ("AC", &q.ac), ("AD", &q.ad), ("BC", &q.bc), ("BD", &q.bd), ("CD", &q.cd)] {
        reject_tangent(n, v)?;
    }
    for (n, v) in [("PA", &q.pa), ("PB", &q.pb), ("PC", &q.pc), ("PD", &q.pd)] {
        if *v <= R::one() / R::two() {
            return Err(RelError::Precondition(format!("{n} = {v}: horocycles tangent or overlapping")));
        }
    }
    for (n, v) in [("OP", &q.op), ("OA", &q.oa), ("OB", &q.ob), ("OC", &q.oc), ("OD", &q.od)] {
        require_positive(n, v)?;
    }
    let pentagon = Residual::between(q.pa.clone(), q.op.clone() * q.oa.clone() * (R::one() - q.alpha.cos()));
    let c = |lead: &R, n1: &R, n2: &R, d1: &R, d2: &R| lead.clone() * (n1.clone() * n2.clone() / (d1.clone() * d2.clone())).sqrt();
    let center = [
        Residual::between(q.oa.clone(), c(&q.ac, &q.ad, &q.ab, &q.cd, &q.bc)),
        Residual::between(q.ob.clone(), c(&q.bd, &q.ab, &q.bc, &q.ad, &q.cd)),
        Residual::between(q.oc.clone(), c(&q.ac, &q.cd, &q.bc, &q.ad, &q.ab)),
        Residual::between(q.od.clone(), c(&q.bd, &q.ad, &q.cd, &q.ab, &q.bc)),
    ];
    let num = q.pa.clone() * q.cd.clone() * q.bc.clone() + q.pc.clone() * q.ad.clone() * q.ab.clone();
    let den = q.pb.clone() * q.ad.clone() * q.cd.clone() + q.pd.clone() * q.ab.clone() * q.bc.clone();
    let quadrilateral = Residual::between(num / den, q.ac.clone() / q.bd.clone());
    // AC/BD in half-exp weights is (2·ĀC²)/(2·B̄D²)
    let lhs = (q.pa.clone() * q.oc.clone() + q.pc.clone() * q.oa.clone())
        / (q.pb.clone() * q.od.clone() + q.pd.clone() * q.ob.clone());
    let quadrilateral_center = Residual::between(lhs, q.ac.square() / q.bd.square());
    Ok(HoroQuintetResiduals { pentagon, center, quadrilateral, quadrilateral_center })
}

/// Half-lambda weights of five horocycles A, P, B, C, D in cyclic order.
pub type HoroShapeWeights<S> = QuintetWeights<S>;

/// Relation for a horocycle shape; kites have no horocycle form.
pub fn horo_shape_residual<R: Real>(kind: ShapeKind, w: &HoroShapeWeights<R>, hyp_tol: f64) -> RelResult<Residual<R>> {
    for (n, v) in [("AB", &w.ab), ("AC", &w.ac), ("AD", &w.ad), ("BC", &w.bc), ("BD", &w.bd), ("CD", &w.cd)] {
        reject_tangent(n, v)?;
    }
    for (n, v) in [("PA", &w.pa), ("PB", &w.pb), ("PC", &w.pc), ("PD", &w.pd)] {
        reject_tangent(n, v)?;
    }
    match kind {
        ShapeKind::IsoscelesTrapezoid => {
            check_equal("AD = BC", &w.ad, &w.bc, hyp_tol)?;
            check_equal("AC = BD", &w.ac, &w.bd, hyp_tol)?;
            let lhs = (w.pa.square() - w.pb.square()) / w.ab.clone();
            let rhs = (w.pd.square() - w.pc.square()) / w.cd.clone();
            Ok(Residual::between(lhs, rhs))
        }
        ShapeKind::Rectangle => {
            check_equal("AB = CD", &w.ab, &w.cd, hyp_tol)?;
            check_equal("AD = BC", &w.ad, &w.bc, hyp_tol)?;
            check_equal("AC = BD", &w.ac, &w.bd, hyp_tol)?;
            Ok(Residual::from_terms(&[w.pa.square(), w.pc.square(), -w.pb.square(), -w.pd.square()]))
        }
        ShapeKind::Parallelogram => {
            check_equal("AB = CD", &w.ab, &w.cd, hyp_tol)?;
            check_equal("AD = BC", &w.ad, &w.bc, hyp_tol)?;
            let lhs = (w.pa.square() + w.pc.square()) / (w.pb.square() + w.pd.square());
            Ok(Residual::between(lhs, w.ac.clone() / w.bd.clone()))
        }
        ShapeKind::Kite => Err(RelError::UnknownPattern("horocycle kite".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Mp;

    type F = Mp<128>;

    fn f(v: f64) -> F {
        F::from_f64(v)
    }

    #[test]
    fn symmetric_quintet_ratio_one() {
        let r = quintet_geodesic_residual(&f(2.0), &f(2.0), &f(3.0), &f(3.0), &f(1.5), &f(1.5), &f(1.2), &f(1.2), &f(4.0), &f(4.0))
            .unwrap();
        assert_eq!(r.diff, f(0.0));
    }

    #[test]
    fn degenerate_point_rejected() {
        let r = quintet_geodesic_residual(&f(1.0), &f(2.0), &f(3.0), &f(3.0), &f(1.5), &f(1.5), &f(1.2), &f(1.2), &f(4.0), &f(4.0));
        assert!(r.is_err());
    }

    #[test]
    fn hypothesis_checked() {
        let w = QuintetWeights {
            pa: f(2.0),
            pb: f(3.0),
            pc: f(4.0),
            pd: f(5.0),
            ab: f(2.0),
            ac: f(3.0),
            ad: f(4.0),
            bc: f(5.0),
            bd: f(6.0),
            cd: f(7.0),
        };
        for k in ShapeKind::ALL {
            match shape_residual(k, &w, 1e-9) {
                Err(RelError::Precondition(_)) => {}
                other => panic!("{k:?}: {other:?}"),
            }
        }
        // P = A collapses PA to 1
        let mut t = w.clone();
        t.ad = t.bc.clone();
        t.ac = t.bd.clone();
        assert!(shape_residual(ShapeKind::IsoscelesTrapezoid, &t, 1e-9).is_ok());
        t.pa = f(1.0);
        assert!(shape_residual(ShapeKind::IsoscelesTrapezoid, &t, 1e-9).is_err());
    }
}
