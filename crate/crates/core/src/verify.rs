//! Oracle suite: every relation family evaluated on random configurations
//! built in the half-plane model.
//!
//! Configurations and weights are computed at twice the working precision,
//! rounded to the working precision, and fed to the relation. Each sample is
//! run twice, on the configuration as generated and after a random isometry.

use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::halfplane::{
    common_perpendicular, distance, foot_gap, half_weight, intersect, pair_weight, random_cyclic_config, ray_angle,
    standard_weight, stream_rng, Convention, CyclicConfig, Ext, GeomError, HObject, Mobius,
};
use crate::relations::{
    cayley_menger_residual, concave_core_trunclength, foot_gap_m, geodesic_ptolemy_next, harmonic_residual,
    horo_quintet, horo_shape_residual, mixed_harmonic_residual, mixed_next, mixed_residual, penner_next,
    penner_residual, quadruplet_residual, quintet_geodesic_residual, shape_residual, trunclength_quadratic_residual,
    CurvaturePattern, HoroQuintet, QuintetWeights, RelError, Root, ShapeKind,
};
use crate::scalar::{cast, Mp, Real};

const MOVE_SALT: u64 = 0x9e37_79b9_7f4a_7c15;
const SHAPE_SALT: u64 = 0x5348_4150_4553_0001;
const SCALAR_SALT: u64 = 0x5452_554e_4341_5445;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("tolerance {tol:e} is below the {precision}-bit precision floor {floor:e}")]
    BelowFloor { tol: f64, precision: u32, floor: f64 },
    #[error("unsupported precision {0} (use 64, 128, 256 or 512)")]
    Precision(u32),
    #[error("unknown relation family {0:?}")]
    UnknownFamily(String),
    #[error("sample count must be at least 1")]
    NoSamples,
    #[error("tolerance must be positive")]
    Tolerance,
}

/// Smallest tolerance a run at `precision` bits can honour.
pub fn precision_floor(precision: u32) -> f64 {
    2f64.powi(8 - precision as i32)
}

/// 1e-9 up to 128 bits, then shrinking as 2^(−bits/2).
pub fn default_tolerance(precision: u32) -> f64 {
    if precision <= 128 {
        1e-9
    } else {
        1e-9 * 2f64.powf(-((precision - 128) as f64) / 2.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Harmonic,
    GeodesicPtolemy,
    GeodesicPtolemyMinus,
    Quadruplet,
    /// Kinds over (P, A, B, C).
    Mixed([u8; 4]),
    MixedHarmonic,
    /// Kinds over (P, A, B).
    FootGap([u8; 3]),
    QuintetGeodesic,
    QuintetHorocycle,
    Shape(ShapeKind),
    HoroShape(ShapeKind),
    CayleyMenger,
    TruncatedLength,
    PennerPtolemy,
    MobiusInvariance,
}

const MIXED: [&str; 9] = ["gghg", "ghgg", "ghgh", "gghh", "ghhh", "hggg", "hhgg", "hhhg", "hhhh"];
const FEET: [&str; 5] = ["hhh", "hhg", "hgg", "ghh", "ggh"];

fn kinds<const N: usize>(s: &str) -> [u8; N] {
    let mut out = [0u8; N];
    for (o, c) in out.iter_mut().zip(s.bytes()) {
        *o = c;
    }
    out
}

fn kinds_str(k: &[u8]) -> String {
    k.iter().map(|&c| c as char).collect()
}

fn shape_name(k: ShapeKind) -> &'static str {
    match k {
        ShapeKind::IsoscelesTrapezoid => "trapezoid",
        ShapeKind::Rectangle => "rectangle",
        ShapeKind::Parallelogram => "parallelogram",
        ShapeKind::Kite => "kite",
    }
}

impl Family {
    pub fn all() -> Vec<Family> {
        let mut v = vec![Family::Harmonic, Family::GeodesicPtolemy, Family::GeodesicPtolemyMinus, Family::Quadruplet];
        v.extend(MIXED.iter().map(|s| Family::Mixed(kinds(s))));
        v.push(Family::MixedHarmonic);
        v.extend(FEET.iter().map(|s| Family::FootGap(kinds(s))));
        v.push(Family::QuintetGeodesic);
        v.push(Family::QuintetHorocycle);
        v.extend(ShapeKind::ALL.iter().map(|&k| Family::Shape(k)));
        v.extend([ShapeKind::IsoscelesTrapezoid, ShapeKind::Rectangle, ShapeKind::Parallelogram].map(Family::HoroShape));
        v.extend([Family::CayleyMenger, Family::TruncatedLength, Family::PennerPtolemy, Family::MobiusInvariance]);
        v
    }

    pub fn name(&self) -> String {
        match self {
            Family::Harmonic => "harmonic".into(),
            Family::GeodesicPtolemy => "geodesic-ptolemy".into(),
            Family::GeodesicPtolemyMinus => "geodesic-ptolemy-minus".into(),
            Family::Quadruplet => "quadruplet".into(),
            Family::Mixed(k) => format!("mixed-{}", kinds_str(k)),
            Family::MixedHarmonic => "harmonic-mixed".into(),
            Family::FootGap(k) => format!("foot-gap-{}", kinds_str(k)),
            Family::QuintetGeodesic => "quintet-geodesic".into(),
            Family::QuintetHorocycle => "quintet-horocycle".into(),
            Family::Shape(k) => format!("shape-{}", shape_name(*k)),
            Family::HoroShape(k) => format!("horo-shape-{}", shape_name(*k)),
            Family::CayleyMenger => "cayley-menger".into(),
            Family::TruncatedLength => "truncated-length".into(),
            Family::PennerPtolemy => "penner-ptolemy".into(),
            Family::MobiusInvariance => "mobius-invariance".into(),
        }
    }

    /// Exact name, or a prefix selecting a group ("mixed", "foot-gap", ...).
    pub fn select(query: &str) -> Result<Vec<Family>, VerifyError> {
        let all = Family::all();
        if let Some(f) = all.iter().find(|f| f.name() == query) {
            return Ok(vec![*f]);
        }
        let group: Vec<Family> = all.into_iter().filter(|f| f.name().starts_with(&format!("{query}-"))).collect();
        if group.is_empty() {
            Err(VerifyError::UnknownFamily(query.to_string()))
        } else {
            Ok(group)
        }
    }

    /// Whether the family is geometric, so that the moved variant differs.
    fn has_moved_variant(&self) -> bool {
        !matches!(self, Family::TruncatedLength | Family::MobiusInvariance)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub samples: usize,
    pub rng_seed: u64,
    pub tol: f64,
    pub precision: u32,
    pub only: Vec<String>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { samples: 1000, rng_seed: 42, tol: 1e-9, precision: 128, only: Vec::new() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Failure {
    pub family: String,
    pub index: u64,
    pub moved: bool,
    /// Relative residual, or the error message when evaluation failed.
    pub residual: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyReport {
    pub family: String,
    pub samples: usize,
    pub max_residual: f64,
    pub max_residual_moved: f64,
    pub worst_index: u64,
    pub failures: usize,
    /// First few failures.
    pub examples: Vec<Failure>,
}

impl FamilyReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub samples: usize,
    pub rng_seed: u64,
    pub tol: f64,
    pub precision: u32,
    pub oracle_precision: u32,
    pub families: Vec<FamilyReport>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.families.iter().all(FamilyReport::passed)
    }

    pub fn max_residual(&self) -> f64 {
        self.families.iter().map(|f| f.max_residual.max(f.max_residual_moved)).fold(0.0, f64::max)
    }
}

const KEEP_FAILURES: usize = 5;

pub fn run_verify(cfg: &VerifyConfig) -> Result<VerifyReport, VerifyError> {
    if cfg.samples == 0 {
        return Err(VerifyError::NoSamples);
    }
    if !(cfg.tol > 0.0) {
        return Err(VerifyError::Tolerance);
    }
    let floor = precision_floor(cfg.precision);
    if cfg.tol < floor {
        return Err(VerifyError::BelowFloor { tol: cfg.tol, precision: cfg.precision, floor });
    }
    let families = if cfg.only.is_empty() {
        Family::all()
    } else {
        let mut v = Vec::new();
        for q in &cfg.only {
            for f in Family::select(q)? {
                if !v.contains(&f) {
                    v.push(f);
                }
            }
        }
        v
    };
    let reports = match cfg.precision {
        64 => run_all::<Mp<64>, Mp<128>>(&families, cfg),
        128 => run_all::<Mp<128>, Mp<256>>(&families, cfg),
        256 => run_all::<Mp<256>, Mp<512>>(&families, cfg),
        512 => run_all::<Mp<512>, Mp<1024>>(&families, cfg),
        p => return Err(VerifyError::Precision(p)),
    };
    Ok(VerifyReport {
        samples: cfg.samples,
        rng_seed: cfg.rng_seed,
        tol: cfg.tol,
        precision: cfg.precision,
        oracle_precision: 2 * cfg.precision,
        families: reports,
    })
}

fn run_all<R: Real, O: Real>(families: &[Family], cfg: &VerifyConfig) -> Vec<FamilyReport> {
    families.iter().map(|f| run_family::<R, O>(*f, cfg)).collect()
}

fn run_family<R: Real, O: Real>(family: Family, cfg: &VerifyConfig) -> FamilyReport {
    let variants: &[bool] = if family.has_moved_variant() { &[false, true] } else { &[false] };
    let results: Vec<(u64, bool, Result<f64, String>)> = (0..cfg.samples as u64)
        .into_par_iter()
        .flat_map_iter(|i| variants.iter().map(move |&m| (i, m, evaluate::<R, O>(family, cfg.rng_seed, i, m))))
        .collect();
    let mut rep = FamilyReport {
        family: family.name(),
        samples: cfg.samples,
        max_residual: 0.0,
        max_residual_moved: 0.0,
        worst_index: 0,
        failures: 0,
        examples: Vec::new(),
    };
    let mut worst = -1.0;
    for (index, moved, r) in results {
        let (ok, residual, error) = match r {
            Ok(v) if v.is_finite() && v <= cfg.tol => (true, Some(v), None),
            Ok(v) => (false, Some(v), None),
            Err(e) => (false, None, Some(e)),
        };
        if let Some(v) = residual {
            let slot = if moved { &mut rep.max_residual_moved } else { &mut rep.max_residual };
            *slot = slot.max(v);
            if v > worst {
                worst = v;
                rep.worst_index = index;
            }
        }
        if !ok {
            rep.failures += 1;
            if rep.examples.len() < KEEP_FAILURES {
                rep.examples.push(Failure { family: family.name(), index, moved, residual, error });
            }
        }
    }
    rep
}

type Eval = Result<f64, String>;

fn geom<T>(r: Result<T, GeomError>) -> Result<T, String> {
    r.map_err(|e| format!("oracle: {e}"))
}

fn rel<T>(r: Result<T, RelError>) -> Result<T, String> {
    r.map_err(|e| format!("relation: {e}"))
}

/// |a − b| / |b|.
fn rel_diff<R: Real>(a: &R, b: &R) -> f64 {
    let scale = b.abs();
    if scale.is_zero() {
        a.abs().to_f64()
    } else {
        ((a.clone() - b.clone()).abs() / scale).to_f64()
    }
}

fn down<O: Real, R: Real>(v: &O) -> R {
    cast::<O, R>(v)
}

fn mover<O: Real>(seed: u64, index: u64) -> Mobius<O> {
    Mobius::random(&mut stream_rng(seed ^ MOVE_SALT, index))
}

fn place<O: Real>(c: CyclicConfig<O>, moved: bool) -> CyclicConfig<O> {
    if moved {
        let m = mover(c.seed, c.index);
        c.transformed(&m)
    } else {
        c
    }
}

fn config<O: Real>(pattern: &str, seed: u64, index: u64, moved: bool) -> CyclicConfig<O> {
    let pat: CurvaturePattern = pattern.parse().expect("valid pattern");
    place(random_cyclic_config::<O>(&pat, seed, index), moved)
}

fn weight<O: Real, R: Real>(u: &HObject<O>, v: &HObject<O>) -> Result<R, String> {
    Ok(down(&geom(standard_weight(u, v))?))
}

fn weight_in<O: Real, R: Real>(u: &HObject<O>, v: &HObject<O>, c: Convention) -> Result<R, String> {
    Ok(down(&geom(pair_weight(u, v, c))?))
}

/// Weights around P, B, A, C: (x, y, z, X, Y, Z) with x = BC, y = AC, z = AB,
/// X = PA, Y = PB, Z = PC.
fn ptolemy_weights<O: Real, R: Real>(
    p: &HObject<O>,
    b: &HObject<O>,
    a: &HObject<O>,
    c: &HObject<O>,
    conv: Option<Convention>,
) -> Result<[R; 6], String> {
    let w = |u: &HObject<O>, v: &HObject<O>| match conv {
        Some(cv) => weight_in::<O, R>(u, v, cv),
        None => weight::<O, R>(u, v),
    };
    Ok([w(b, c)?, w(a, c)?, w(a, b)?, w(p, a)?, w(p, b)?, w(p, c)?])
}

fn evaluate<R: Real, O: Real>(family: Family, seed: u64, index: u64, moved: bool) -> Eval {
    match family {
        Family::Harmonic => {
            let c = config::<O>("gggg", seed, index, moved);
            let [x, y, z, xx, yy, zz] = ptolemy_weights::<O, R>(&c.objects[0], &c.objects[1], &c.objects[2], &c.objects[3], None)?;
            Ok(rel(harmonic_residual(&x, &y, &z, &xx, &yy, &zz))?.relative_f64())
        }
        Family::GeodesicPtolemy => {
            let c = config::<O>("gggg", seed, index, moved);
            let [x, y, z, xx, yy, zz] = ptolemy_weights::<O, R>(&c.objects[0], &c.objects[1], &c.objects[2], &c.objects[3], None)?;
            let next = rel(geodesic_ptolemy_next(&x, &y, &z, &yy, &zz, Root::Plus))?;
            Ok(rel_diff(&next, &xx))
        }
        Family::GeodesicPtolemyMinus => {
            // P, A, B, C in cyclic order: A is now next to P
            let c = config::<O>("gggg", seed, index, moved);
            let [x, y, z, xx, yy, zz] = ptolemy_weights::<O, R>(&c.objects[0], &c.objects[2], &c.objects[1], &c.objects[3], None)?;
            let next = rel(geodesic_ptolemy_next(&x, &y, &z, &yy, &zz, Root::Minus))?;
            Ok(rel_diff(&next, &xx))
        }
        Family::Quadruplet => {
            let c = config::<O>("gggg", seed, index, moved);
            // any assignment of the four roles
            let perm = PERMS[(index % 24) as usize];
            let o = |i: usize| &c.objects[perm[i]];
            let [x, y, z, xx, yy, zz] = ptolemy_weights::<O, R>(o(0), o(1), o(2), o(3), None)?;
            Ok(quadruplet_residual(&x, &y, &z, &xx, &yy, &zz).relative_f64())
        }
        Family::Mixed(k) => {
            // kinds over (P, A, B, C); the generator lays out P, B, A, C
            let line = kinds_str(&[k[0], k[2], k[1], k[3]]);
            let pat: CurvaturePattern = kinds_str(&k).parse().unwrap();
            let c = config::<O>(&line, seed, index, moved);
            let [x, y, z, xx, yy, zz] = ptolemy_weights::<O, R>(&c.objects[0], &c.objects[1], &c.objects[2], &c.objects[3], None)?;
            let next = rel(mixed_next(&pat, &x, &y, &z, &yy, &zz))?;
            let res = rel(mixed_residual(&pat, &x, &y, &z, &xx, &yy, &zz))?;
            Ok(rel_diff(&next, &xx).max(res.relative_f64()))
        }
        Family::MixedHarmonic => {
            let pat = &CurvaturePattern::enumerate(4)[(index % 16) as usize];
            let line = format!("{}", CurvaturePattern(vec![pat.0[0], pat.0[2], pat.0[1], pat.0[3]]));
            let c = config::<O>(&line, seed, index, moved);
            let [x, y, z, xx, yy, zz] = ptolemy_weights::<O, R>(&c.objects[0], &c.objects[1], &c.objects[2], &c.objects[3], None)?;
            Ok(rel(mixed_harmonic_residual(pat, &x, &y, &z, &xx, &yy, &zz))?.relative_f64())
        }
        Family::FootGap(k) => {
            let s = kinds_str(&k);
            let pat: CurvaturePattern = s.parse().unwrap();
            let c = config::<O>(&s, seed, index, moved);
            let (p, a, b) = (&c.objects[0], &c.objects[1], &c.objects[2]);
            let m = rel(foot_gap_m(&pat, &weight::<O, R>(p, a)?, &weight::<O, R>(p, b)?, &weight::<O, R>(a, b)?))?;
            let truth: R = down(&geom(foot_gap(p, a, b))?);
            Ok(rel_diff(&m, &truth))
        }
        Family::QuintetGeodesic => quintet_geodesic::<R, O>(seed, index, moved),
        Family::QuintetHorocycle => quintet_horocycle::<R, O>(seed, index, moved),
        Family::Shape(kind) => {
            let objs = shape_config::<O>(kind, false, seed, index, moved)?;
            let w = shape_weights::<O, R>(&objs, Convention::CoshDistance)?;
            Ok(rel(shape_residual(kind, &w, 1e-12))?.relative_f64())
        }
        Family::HoroShape(kind) => {
            let objs = shape_config::<O>(kind, true, seed, index, moved)?;
            let w = shape_weights::<O, R>(&objs, Convention::HalfLambda)?;
            Ok(rel(horo_shape_residual(kind, &w, 1e-12))?.relative_f64())
        }
        Family::CayleyMenger => {
            let pat = CurvaturePattern::enumerate(4)[(index % 16) as usize].clone();
            let c = config::<O>(&pat.to_string(), seed, index, moved);
            let mut w: [[R; 4]; 4] = std::array::from_fn(|_| std::array::from_fn(|_| R::zero()));
            for i in 0..4 {
                for j in 0..i {
                    let v: R = down(&geom(half_weight(&c.objects[i], &c.objects[j]))?);
                    w[i][j] = v.clone();
                    w[j][i] = v;
                }
            }
            Ok(rel(cayley_menger_residual(&w, &pat))?.relative_f64())
        }
        Family::TruncatedLength => {
            let mut rng = stream_rng(seed ^ SCALAR_SALT, index);
            let mut draw = || -> R {
                if rng.gen_bool(0.2) {
                    R::one()
                } else {
                    R::from_f64(rng.gen_range(1.0..20.0))
                }
            };
            let (a1, a2, a3) = (draw(), draw(), draw());
            let t = rel(concave_core_trunclength(&a1, &a2, &a3))?.exp();
            Ok(trunclength_quadratic_residual(&a1, &a2, &a3, &t).relative_f64())
        }
        Family::PennerPtolemy => {
            let c = config::<O>("hhhh", seed, index, moved);
            let [x, y, z, xx, yy, zz] =
                ptolemy_weights::<O, R>(&c.objects[0], &c.objects[1], &c.objects[2], &c.objects[3], Some(Convention::Lambda))?;
            let next = rel(penner_next(&x, &y, &z, &yy, &zz))?;
            Ok(rel_diff(&next, &xx).max(penner_residual(&x, &y, &z, &xx, &yy, &zz).relative_f64()))
        }
        Family::MobiusInvariance => {
            let pat = CurvaturePattern::enumerate(4)[(index % 16) as usize].to_string();
            let a = config::<O>(&pat, seed, index, false);
            let b = config::<O>(&pat, seed, index, true);
            let mut worst = 0.0f64;
            for i in 0..4 {
                for j in 0..i {
                    // compared before rounding, at oracle precision
                    let u: O = geom(standard_weight(&a.objects[i], &a.objects[j]))?;
                    let v: O = geom(standard_weight(&b.objects[i], &b.objects[j]))?;
                    worst = worst.max(rel_diff(&v, &u));
                }
            }
            Ok(worst)
        }
    }
}

const PERMS: [[usize; 4]; 24] = [
    [0, 1, 2, 3],
    [0, 1, 3, 2],
    [0, 2, 1, 3],
    [0, 2, 3, 1],
    [0, 3, 1, 2],
    [0, 3, 2, 1],
    [1, 0, 2, 3],
    [1, 0, 3, 2],
    [1, 2, 0, 3],
    [1, 2, 3, 0],
    [1, 3, 0, 2],
    [1, 3, 2, 0],
    [2, 0, 1, 3],
    [2, 0, 3, 1],
    [2, 1, 0, 3],
    [2, 1, 3, 0],
    [2, 3, 0, 1],
    [2, 3, 1, 0],
    [3, 0, 1, 2],
    [3, 0, 2, 1],
    [3, 1, 0, 2],
    [3, 1, 2, 0],
    [3, 2, 0, 1],
    [3, 2, 1, 0],
];

fn point<O: Real>(z: &num_complex::Complex<O>) -> HObject<O> {
    HObject::point(z.re.clone(), z.im.clone())
}

/// Five geodesics A, P, B, C, D; O where the perpendiculars A–C and B–D cross.
fn quintet_geodesic<R: Real, O: Real>(seed: u64, index: u64, moved: bool) -> Eval {
    let c = config::<O>("ggggg", seed, index, moved);
    let [a, p, b, cc, d] = [&c.objects[0], &c.objects[1], &c.objects[2], &c.objects[3], &c.objects[4]];
    let (perp_ac, _, _) = geom(common_perpendicular(a, cc))?;
    let (perp_bd, _, _) = geom(common_perpendicular(b, d))?;
    let (o, _) = geom(intersect(&perp_ac, &perp_bd))?;
    let o = point(&o);
    let w = |u: &HObject<O>, v: &HObject<O>| weight::<O, R>(u, v);
    let sinh = |u: &HObject<O>, v: &HObject<O>| -> Result<R, String> { Ok(down(&geom(distance(u, v))?.sinh())) };
    let r = rel(quintet_geodesic_residual(
        &w(p, a)?,
        &w(p, b)?,
        &w(p, cc)?,
        &w(p, d)?,
        &w(&o, a)?,
        &w(&o, b)?,
        &w(&o, cc)?,
        &w(&o, d)?,
        &sinh(a, cc)?,
        &sinh(b, d)?,
    ))?;
    Ok(r.relative_f64())
}

fn base<O: Real>(h: &HObject<O>) -> Ext<O> {
    match h {
        HObject::Horocycle { base, .. } => base.clone(),
        _ => unreachable!("horocycle expected"),
    }
}

/// Five horocycles A, P, B, C, D; O where the geodesics joining the bases of
/// A, C and of B, D cross.
fn quintet_horocycle<R: Real, O: Real>(seed: u64, index: u64, moved: bool) -> Eval {
    let c = config::<O>("hhhhh", seed, index, moved);
    let [a, p, b, cc, d] = [&c.objects[0], &c.objects[1], &c.objects[2], &c.objects[3], &c.objects[4]];
    let ac = HObject::Geodesic { a: base(a), b: base(cc) };
    let bd = HObject::Geodesic { a: base(b), b: base(d) };
    let (oz, _) = geom(intersect(&ac, &bd))?;
    let o = point(&oz);
    let half_exp = |u: &HObject<O>, v: &HObject<O>| -> Result<R, String> {
        Ok(down(&(geom(distance(u, v))?.exp() / O::two())))
    };
    let bar = |u: &HObject<O>, v: &HObject<O>| weight_in::<O, R>(u, v, Convention::HalfLambda);
    let q = HoroQuintet {
        pa: half_exp(p, a)?,
        pb: half_exp(p, b)?,
        pc: half_exp(p, cc)?,
        pd: half_exp(p, d)?,
        op: half_exp(&o, p)?,
        oa: half_exp(&o, a)?,
        ob: half_exp(&o, b)?,
        oc: half_exp(&o, cc)?,
        od: half_exp(&o, d)?,
        alpha: down(&ray_angle(&oz, &base(a), &base(p))),
        ab: bar(a, b)?,
        ac: bar(a, cc)?,
        ad: bar(a, d)?,
        bc: bar(b, cc)?,
        bd: bar(b, d)?,
        cd: bar(cc, d)?,
    };
    Ok(rel(horo_quintet(&q))?.worst())
}

/// z ↦ −z̄.
fn reflect<O: Real>(o: &HObject<O>) -> HObject<O> {
    let neg = |e: &Ext<O>| match e {
        Ext::Finite(v) => Ext::Finite(-v.clone()),
        Ext::Infinity => Ext::Infinity,
    };
    match o {
        HObject::Geodesic { a, b } => HObject::Geodesic { a: neg(b), b: neg(a) },
        HObject::Horocycle { base, size } => HObject::Horocycle { base: neg(base), size: size.clone() },
        HObject::Point { x, y } => HObject::Point { x: -x.clone(), y: y.clone() },
    }
}

/// z ↦ −1/z.
fn half_turn<O: Real>() -> Mobius<O> {
    Mobius { a: O::zero(), b: -O::one(), c: O::one(), d: O::zero() }
}

/// z ↦ 1/z̄.
fn invert<O: Real>(o: &HObject<O>) -> HObject<O> {
    half_turn().apply_object(&reflect(o))
}

/// Object of the given kind over the interval (lo, hi): the geodesic with
/// those endpoints, or a horocycle at the midpoint.
fn object_on<O: Real>(lo: f64, hi: f64, horo: bool, size: f64) -> HObject<O> {
    if horo {
        HObject::horocycle(O::from_f64((lo + hi) / 2.0), O::from_f64(size * (hi - lo)))
    } else {
        HObject::geodesic(O::from_f64(lo), O::from_f64(hi))
    }
}

fn sorted<const N: usize>(rng: &mut impl Rng, lo: f64, hi: f64) -> [f64; N] {
    let mut v: [f64; N] = std::array::from_fn(|_| rng.gen_range(lo..hi));
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// A, P, B, C, D with the symmetry of the shape, built by reflections so the
/// hypothesis equalities hold to working precision.
fn shape_config<O: Real>(kind: ShapeKind, horo: bool, seed: u64, index: u64, moved: bool) -> Result<Vec<HObject<O>>, String> {
    let mut rng = stream_rng(seed ^ SHAPE_SALT, index);
    let mut size = if horo { rng.gen_range(0.05..0.4) } else { 0.0 };
    for _ in 0..40 {
        let objs = shape_layout::<O>(kind, horo, size, &mut rng.clone());
        let cfg = CyclicConfig { objects: objs, seed, index };
        if cfg.check_disjoint().is_ok() {
            return Ok(place(cfg, moved).objects);
        }
        size /= 2.0;
    }
    Err("no disjoint shape configuration".into())
}

fn shape_layout<O: Real>(kind: ShapeKind, horo: bool, size: f64, rng: &mut impl Rng) -> Vec<HObject<O>> {
    let on = |lo: f64, hi: f64| object_on::<O>(lo, hi, horo, size);
    match kind {
        ShapeKind::Rectangle => {
            let [s, t] = sorted(rng, 0.05, 0.95);
            let a = on(s, t);
            let [p1, p2] = sorted(rng, t, 1.0 / t);
            let b = invert(&a);
            let c = reflect(&b);
            let d = reflect(&a);
            vec![a, on(p1, p2), b, c, d]
        }
        ShapeKind::IsoscelesTrapezoid => {
            let [s, t] = sorted(rng, 0.05, 0.95);
            let [d1, d2] = sorted(rng, -0.95, -0.05);
            let a = on(s, t);
            let d = on(d1, d2);
            let [p1, p2] = sorted(rng, t, 1.0 / t);
            let b = invert(&a);
            let c = invert(&d);
            vec![a, on(p1, p2), b, c, d]
        }
        ShapeKind::Parallelogram => {
            let [s, t, u, v] = sorted(rng, 0.2, 5.0);
            let a = on(s, t);
            let b = on(u, v);
            let [p1, p2] = sorted(rng, t, u);
            let m = half_turn::<O>();
            let c = m.apply_object(&a);
            let d = m.apply_object(&b);
            vec![a, on(p1, p2), b, c, d]
        }
        ShapeKind::Kite => {
            let ai = rng.gen_range(0.2..0.8);
            let ci = rng.gen_range(1.5..5.0);
            let [b1, b2] = sorted(rng, 1.0 / ai, 1.0 / ai + 5.0);
            let [p1, p2] = sorted(rng, 1.0 / ai, b1);
            let a = HObject::geodesic(O::from_f64(ai), O::one() / O::from_f64(ai));
            let c = HObject::geodesic(-O::from_f64(ci), -(O::one() / O::from_f64(ci)));
            let b = on(b1, b2);
            let d = invert(&b);
            vec![a, on(p1, p2), b, c, d]
        }
    }
}

fn shape_weights<O: Real, R: Real>(objs: &[HObject<O>], conv: Convention) -> Result<QuintetWeights<R>, String> {
    let [a, p, b, c, d] = [&objs[0], &objs[1], &objs[2], &objs[3], &objs[4]];
    let w = |u: &HObject<O>, v: &HObject<O>| weight_in::<O, R>(u, v, conv);
    Ok(QuintetWeights {
        pa: w(p, a)?,
        pb: w(p, b)?,
        pc: w(p, c)?,
        pd: w(p, d)?,
        ab: w(a, b)?,
        ac: w(a, c)?,
        ad: w(a, d)?,
        bc: w(b, c)?,
        bd: w(b, d)?,
        cd: w(c, d)?,
    })
}

/// Evaluates one sample; exposed for property tests.
pub fn evaluate_sample(family: Family, precision: u32, seed: u64, index: u64, moved: bool) -> Result<f64, String> {
    match precision {
        64 => evaluate::<Mp<64>, Mp<128>>(family, seed, index, moved),
        128 => evaluate::<Mp<128>, Mp<256>>(family, seed, index, moved),
        256 => evaluate::<Mp<256>, Mp<512>>(family, seed, index, moved),
        512 => evaluate::<Mp<512>, Mp<1024>>(family, seed, index, moved),
        p => Err(format!("unsupported precision {p}")),
    }
}
