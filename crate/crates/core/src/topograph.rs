//! Conway topographs of integer binary quadratic forms, and the quadratic
//! vertex equations satisfied by ortho-integral seeds.

use std::fmt;
use std::io::{self, Write};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::farey::Step;
use crate::orthotree::{Letter, SectorSpec};
use crate::relations::cap_p_sq;
use crate::scalar::Scalar;
use crate::weights::{propagate, surface_trees, SeedSpec, SurfaceKind, WeightError};

#[derive(Debug, Error)]
pub enum TopoError {
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("unknown catalog entry {0:?}")]
    UnknownEquation(String),
    #[error(transparent)]
    Weight(#[from] WeightError),
}

pub type TopoResult<T> = Result<T, TopoError>;

fn ck(v: Option<i128>, what: &'static str) -> TopoResult<i128> {
    v.ok_or(TopoError::Overflow(what))
}

/// B(x, y) = a x² + b xy + c y².
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadraticForm {
    pub a: i128,
    pub b: i128,
    pub c: i128,
}

impl QuadraticForm {
    pub fn new(a: i128, b: i128, c: i128) -> Self {
        QuadraticForm { a, b, c }
    }

    pub fn discriminant(&self) -> TopoResult<i128> {
        let bb = ck(self.b.checked_mul(self.b), "discriminant")?;
        let ac = ck(self.a.checked_mul(self.c).and_then(|v| v.checked_mul(4)), "discriminant")?;
        ck(bb.checked_sub(ac), "discriminant")
    }

    pub fn value(&self, v: (i128, i128)) -> TopoResult<i128> {
        let (x, y) = v;
        let t1 = self.a.checked_mul(x).and_then(|t| t.checked_mul(x));
        let t2 = self.b.checked_mul(x).and_then(|t| t.checked_mul(y));
        let t3 = self.c.checked_mul(y).and_then(|t| t.checked_mul(y));
        ck(t1.and_then(|t| t.checked_add(t2?)).and_then(|t| t.checked_add(t3?)), "form value")
    }
}

impl fmt::Display for QuadraticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x^2{:+}xy{:+}y^2", self.a, self.b, self.c)
    }
}

/// B(u+v) = 2(B(u) + B(v)) − B(u−v).
pub fn parallelogram_next(bu: i128, bv: i128, bu_minus_v: i128) -> TopoResult<i128> {
    let s = ck(bu.checked_add(bv).and_then(|s| s.checked_mul(2)), "parallelogram rule")?;
    ck(s.checked_sub(bu_minus_v), "parallelogram rule")
}

/// (B(u) − B(v))² − B(u+v)·B(u−v) − (b² − 4ac); zero around every edge.
pub fn discriminant_residual(bu: i128, bv: i128, bu_plus_v: i128, bu_minus_v: i128, form: &QuadraticForm) -> TopoResult<i128> {
    let d = ck(bu.checked_sub(bv), "discriminant residual")?;
    let sq = ck(d.checked_mul(d), "discriminant residual")?;
    let prod = ck(bu_plus_v.checked_mul(bu_minus_v), "discriminant residual")?;
    ck(sq.checked_sub(prod).and_then(|r| r.checked_sub(form.discriminant().ok()?)), "discriminant residual")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TopographNode {
    /// '+' or '-' for the side of the starting edge, then L/R turns.
    pub path: String,
    pub value: i128,
    pub vector: (i128, i128),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Topograph {
    /// Regions in creation order; the first two are the starting pair.
    pub nodes: Vec<TopographNode>,
    pub edges_checked: usize,
    /// First edge with a nonzero discriminant residual: (path, residual).
    pub residual_failure: Option<(String, i128)>,
    /// First region whose rule value differs from direct evaluation.
    pub evaluation_failure: Option<String>,
}

impl Topograph {
    pub fn passed(&self) -> bool {
        self.residual_failure.is_none() && self.evaluation_failure.is_none()
    }

    pub fn dump_jsonl(&self, out: &mut impl Write) -> io::Result<()> {
        for n in &self.nodes {
            let rec = json!({"path": n.path, "value": n.value, "vector": [n.vector.0, n.vector.1]});
            writeln!(out, "{rec}")?;
        }
        Ok(())
    }
}

fn vadd(p: (i128, i128), q: (i128, i128)) -> TopoResult<(i128, i128)> {
    Ok((ck(p.0.checked_add(q.0), "vector")?, ck(p.1.checked_add(q.1), "vector")?))
}

/// Values of the form on both sides of the starting edge between (1,0) and
/// (0,1), `depth` generations per side, via the parallelogram rule.
pub fn enumerate_topograph(form: &QuadraticForm, depth: u32) -> TopoResult<Topograph> {
    let u = (1i128, 0i128);
    let v = (0i128, 1i128);
    let mut topo = Topograph::default();
    let bu = form.value(u)?;
    let bv = form.value(v)?;
    topo.nodes.push(TopographNode { path: String::new(), value: bu, vector: u });
    topo.nodes.push(TopographNode { path: String::new(), value: bv, vector: v });
    // edge (p, q) with the region p − q behind it
    struct E {
        p: (i128, i128),
        q: (i128, i128),
        bp: i128,
        bq: i128,
        back: i128,
        path: String,
    }
    let u_minus_v = form.value((1, -1))?;
    let u_plus_v = form.value((1, 1))?;
    let mut level = vec![
        E { p: u, q: v, bp: bu, bq: bv, back: u_minus_v, path: "+".into() },
        E { p: u, q: (0, -1), bp: bu, bq: bv, back: u_plus_v, path: "-".into() },
    ];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(level.len() * 2);
        for e in level {
            let s = vadd(e.p, e.q)?;
            let bs = parallelogram_next(e.bp, e.bq, e.back)?;
            topo.edges_checked += 1;
            let r = discriminant_residual(e.bp, e.bq, bs, e.back, form)?;
            if r != 0 && topo.residual_failure.is_none() {
                topo.residual_failure = Some((e.path.clone(), r));
            }
            if form.value(s)? != bs && topo.evaluation_failure.is_none() {
                topo.evaluation_failure = Some(e.path.clone());
            }
            topo.nodes.push(TopographNode { path: e.path.clone(), value: bs, vector: s });
            next.push(E { p: e.p, q: s, bp: e.bp, bq: bs, back: e.bq, path: format!("{}{}", e.path, Step::L) });
            next.push(E { p: e.q, q: s, bp: e.bq, bq: bs, back: e.bp, path: format!("{}{}", e.path, Step::R) });
        }
        level = next;
    }
    Ok(topo)
}

/// Σ cᵢ·(monomial) = g over region weights X, Y, Z, each the region
/// opposite the edge of the corresponding basis letter.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VertexEquation {
    pub name: String,
    /// Coefficients of X², Y², Z², XY, YZ, XZ.
    pub coeffs: [i64; 6],
    pub g: i64,
}

impl VertexEquation {
    /// Vertex relation of a seed with integer basis, divided by the gcd of
    /// its coefficients and constant.
    pub fn from_seed(name: &str, basis: [i64; 3]) -> Self {
        let [x, y, z] = basis.map(BigInt::from);
        let one = BigInt::from(1);
        let two = BigInt::from(2);
        let raw: [BigInt; 7] = [
            &x * &x - &one,
            &y * &y - &one,
            &z * &z - &one,
            -(&two * (&x * &y + &z)),
            -(&two * (&y * &z + &x)),
            -(&two * (&x * &z + &y)),
            cap_p_sq(&BigRational::from_integer(x.clone()), &BigRational::from_integer(y.clone()), &BigRational::from_integer(z.clone()))
                .to_integer(),
        ];
        let g = raw.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        let n: Vec<i64> = raw.iter().map(|c| (c / &g).to_i64().expect("small catalog coefficients")).collect();
        VertexEquation { name: name.to_string(), coeffs: [n[0], n[1], n[2], n[3], n[4], n[5]], g: n[6] }
    }

    /// LHS − g.
    pub fn residual<S: Scalar>(&self, xx: &S, yy: &S, zz: &S) -> S {
        vertex_equation_residual(self, xx, yy, zz)
    }
}

impl fmt::Display for VertexEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = ["X^2", "Y^2", "Z^2", "XY", "YZ", "XZ"];
        let mut first = true;
        for (c, n) in self.coeffs.iter().zip(names) {
            if *c == 0 {
                continue;
            }
            let sign = if *c < 0 { "-" } else if first { "" } else { "+" };
            let mag = if c.abs() == 1 { String::new() } else { c.abs().to_string() };
            write!(f, "{sign}{mag}{n}")?;
            first = false;
        }
        write!(f, "={}", self.g)
    }
}

pub fn vertex_equation_residual<S: Scalar>(eq: &VertexEquation, xx: &S, yy: &S, zz: &S) -> S {
    let c = |i: usize| S::from_i64(eq.coeffs[i]);
    let m = |a: &S, b: &S| a.clone() * b.clone();
    c(0) * xx.square() + c(1) * yy.square() + c(2) * zz.square() + c(3) * m(xx, yy) + c(4) * m(yy, zz) + c(5) * m(xx, zz)
        - S::from_i64(eq.g)
}

/// Catalog entry: name, seed kind and basis.
pub const CATALOG: [(&str, SurfaceKind, [i64; 3]); 6] = [
    ("pants-3", SurfaceKind::Pants, [3, 3, 3]),
    ("pants-2", SurfaceKind::Pants, [2, 2, 2]),
    ("torus-3-17-21", SurfaceKind::Torus, [3, 17, 21]),
    ("torus-2-7-10", SurfaceKind::Torus, [2, 7, 10]),
    ("torus-17-19-37", SurfaceKind::Torus, [17, 19, 37]),
    ("torus-7-17-25", SurfaceKind::Torus, [7, 17, 25]),
];

pub fn catalog_entry(name: &str) -> TopoResult<(VertexEquation, SurfaceKind, [i64; 3])> {
    CATALOG
        .iter()
        .find(|(n, _, _)| *n == name)
        .map(|(n, k, b)| (VertexEquation::from_seed(n, *b), *k, *b))
        .ok_or_else(|| TopoError::UnknownEquation(name.to_string()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CatalogReport {
    pub equation: String,
    pub vertices: usize,
    /// Distinct left-hand-side values seen (a single value g when it holds).
    pub lhs_values: Vec<String>,
    pub all_zero: bool,
}

/// Evaluates a catalog equation at every vertex of all sector trees of its
/// seed, in exact arithmetic.
pub fn check_catalog(name: &str, depth: u32) -> TopoResult<CatalogReport> {
    let (eq, kind, basis) = catalog_entry(name)?;
    let seed = SeedSpec::<BigRational>::from_ints(kind, basis)?;
    let mut vertices = 0;
    let mut lhs: Vec<BigRational> = Vec::new();
    let g = BigRational::from_integer(eq.g.into());
    for tree in surface_trees(&seed, depth)? {
        for r in tree.vertex_regions() {
            vertices += 1;
            let v = eq.residual(&r[0], &r[1], &r[2]) + g.clone();
            if !lhs.contains(&v) {
                lhs.push(v);
            }
        }
    }
    let all_zero = lhs.iter().all(|v| *v == g);
    Ok(CatalogReport {
        equation: eq.to_string(),
        vertices,
        lhs_values: lhs.iter().map(|v| v.to_string()).collect(),
        all_zero,
    })
}

/// Largest |X² + Y² + Z² − 2XY − 2YZ − 2XZ| over the vertices of a cusped
/// tree with unit lambda basis, evaluated on squared lambda lengths.
pub fn cusped_bridge_residual(depth: u32) -> TopoResult<BigRational> {
    let seed = SeedSpec::<BigRational>::cusped_unit();
    let mut worst = BigRational::zero();
    for tree in surface_trees(&seed, depth)? {
        for r in tree.vertex_regions() {
            let [x, y, z] = r.map(|v| v.square());
            let two = BigRational::from_integer(2.into());
            let q = x.square() + y.square() + z.square()
                - two.clone() * (x.clone() * y.clone() + y.clone() * z.clone() + x * z);
            worst = Ord::max(worst, Signed::abs(&q));
        }
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CompareRow {
    pub fraction: String,
    pub word: String,
    pub lambda: String,
    pub lambda_squared: String,
    /// x² at the vector reached from flank vectors (1,0) and (1,1).
    pub topograph_ones: i128,
    /// x² at the vector reached from flank vectors (1,0) and (0,1).
    pub topograph_basis: i128,
}

/// Side-by-side values of the unit cusped tree (one sector) and of the
/// topograph of x² under two alignments of the starting regions.
pub fn compare_cusped(depth: u32) -> TopoResult<Vec<CompareRow>> {
    let seed = SeedSpec::<BigRational>::cusped_unit();
    let tree = propagate(&seed, SectorSpec::between(Letter::A, Letter::B).expect("distinct letters"), depth)?;
    let t = &tree.topology;
    let square = QuadraticForm::new(1, 0, 0);
    let walk = |region: u32, lo: (i128, i128), hi: (i128, i128)| -> TopoResult<i128> {
        let (mut lo, mut hi) = (lo, hi);
        if region == crate::orthotree::LEFT_INITIAL {
            return square.value(lo);
        }
        if region == crate::orthotree::RIGHT_INITIAL {
            return square.value(hi);
        }
        let path = t.edge_path(t.regions[region as usize].edge);
        for &e in &path {
            let m = vadd(lo, hi)?;
            match t.edges[e as usize].step {
                Some(Step::L) => hi = m,
                Some(Step::R) => lo = m,
                None => {}
            }
        }
        square.value(vadd(lo, hi)?)
    };
    let mut rows = Vec::new();
    for r in t.regions_in_order() {
        let lam = tree.weight(r);
        rows.push(CompareRow {
            fraction: t.region_fraction(r).to_string(),
            word: t.region_word(r),
            lambda: lam.to_string(),
            lambda_squared: lam.square().to_string(),
            topograph_ones: walk(r, (1, 0), (1, 1))?,
            topograph_basis: walk(r, (1, 0), (0, 1))?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parallelogram_examples() {
        assert_eq!(parallelogram_next(1, 1, 3).unwrap(), 1);
        let sq = QuadraticForm::new(1, 0, 0);
        // B(1,1) from B(1,0)=1, B(0,1)=0, B(1,-1)=1
        assert_eq!(parallelogram_next(1, 0, 1).unwrap(), sq.value((1, 1)).unwrap());
        assert_eq!(parallelogram_next(0, 0, 0).unwrap(), 0);
        assert!(parallelogram_next(i128::MAX, 1, 0).is_err());
    }

    #[test]
    fn discriminant_examples() {
        let f = QuadraticForm::new(1, 1, 1);
        assert_eq!(discriminant_residual(1, 1, 3, 1, &f).unwrap(), 0);
        let sq = QuadraticForm::new(1, 0, 0);
        assert_eq!(discriminant_residual(4, 1, 9, 1, &sq).unwrap(), 0);
    }

    #[test]
    fn random_forms_hold_to_depth_ten() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let f = QuadraticForm::new(rng.gen_range(-100..=100), rng.gen_range(-100..=100), rng.gen_range(-100..=100));
            let t = enumerate_topograph(&f, 10).unwrap();
            assert!(t.passed(), "{f}");
            assert_eq!(t.edges_checked, 2 * ((1 << 10) - 1));
        }
    }

    #[test]
    fn square_form_gives_squares() {
        let t = enumerate_topograph(&QuadraticForm::new(1, 0, 0), 3).unwrap();
        for n in &t.nodes {
            assert_eq!(n.value, n.vector.0 * n.vector.0);
        }
        let t = enumerate_topograph(&QuadraticForm::new(1, 0, 1), 3).unwrap();
        assert!(t.nodes.iter().all(|n| n.value == n.vector.0.pow(2) + n.vector.1.pow(2)));
    }

    #[test]
    fn catalog_equations_match() {
        let want = [
            ("pants-3", [1, 1, 1, -3, -3, -3], 10),
            ("pants-2", [1, 1, 1, -4, -4, -4], 9),
            ("torus-3-17-21", [1, 36, 55, -18, -90, -20], 360),
        ];
        for (name, coeffs, g) in want {
            let (eq, _, _) = catalog_entry(name).unwrap();
            assert_eq!(eq.coeffs, coeffs);
            assert_eq!(eq.g, g);
        }
        let gs: Vec<i64> = CATALOG.iter().map(|(n, _, _)| catalog_entry(n).unwrap().0.g).collect();
        assert_eq!(gs, vec![10, 9, 360, 144, 360, 144]);
        assert!(catalog_entry("nope").is_err());
        assert_eq!(catalog_entry("pants-3").unwrap().0.to_string(), "X^2+Y^2+Z^2-3XY-3YZ-3XZ=10");
    }

    #[test]
    fn residual_examples() {
        let q = |v: i64| BigRational::from_integer(v.into());
        let (eq, _, _) = catalog_entry("pants-3").unwrap();
        assert!(eq.residual(&q(19), &q(3), &q(3)).is_zero());
        let (eq, _, _) = catalog_entry("pants-2").unwrap();
        assert!(eq.residual(&q(17), &q(2), &q(2)).is_zero());
        let (eq, _, _) = catalog_entry("torus-3-17-21").unwrap();
        assert!(eq.residual(&q(723), &q(17), &q(21)).is_zero());
    }

    #[test]
    fn catalog_holds_on_trees() {
        for (name, _, _) in CATALOG {
            let rep = check_catalog(name, 6).unwrap();
            assert!(rep.all_zero, "{name}: {:?}", rep.lhs_values);
            assert_eq!(rep.lhs_values.len(), 1);
        }
    }

    #[test]
    fn cusped_bridge_on_squares() {
        assert!(cusped_bridge_residual(8).unwrap().is_zero());
    }

    #[test]
    fn compare_rows() {
        let rows = compare_cusped(3).unwrap();
        assert_eq!(rows.len(), 2 + 7);
        assert_eq!(rows[0].fraction, "0/1");
        for r in &rows {
            assert_eq!(r.lambda_squared, r.topograph_ones.to_string());
        }
    }
}
