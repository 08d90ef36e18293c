//! Seed surfaces, weight propagation over orthotrees, and spectra.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::orthotree::{
    build_sector, child_edge_labels, Grammar, Letter, SectorSpec, TreeError, TreeTopology, NONE,
};
use crate::relations::{cap_p_sq, geodesic_ptolemy_next, quadruplet_residual, RelError, Residual, Root};
use crate::scalar::{cast, Real, Scalar};

#[derive(Debug, Error)]
pub enum WeightError {
    #[error("invalid seed: {0}")]
    Seed(String),
    #[error("grouping needs exact arithmetic")]
    InexactGrouping,
    #[error("odd oriented count {count} for value {value}")]
    OddMultiplicity { value: String, count: u64 },
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Relation(#[from] RelError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurfaceKind {
    Pants,
    Torus,
    CuspedPants,
}

impl SurfaceKind {
    pub fn grammar(self) -> Grammar {
        match self {
            SurfaceKind::Torus => Grammar::torus(),
            SurfaceKind::Pants | SurfaceKind::CuspedPants => Grammar::pants(),
        }
    }
}

impl fmt::Display for SurfaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SurfaceKind::Pants => "pants",
            SurfaceKind::Torus => "torus",
            SurfaceKind::CuspedPants => "cusped-pants",
        })
    }
}

impl FromStr for SurfaceKind {
    type Err = WeightError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pants" => Ok(SurfaceKind::Pants),
            "torus" => Ok(SurfaceKind::Torus),
            "cusped-pants" | "cusped" => Ok(SurfaceKind::CuspedPants),
            _ => Err(WeightError::Seed(format!("unknown surface kind {s:?}"))),
        }
    }
}

/// A seed surface with its orthobasis. Geodesic kinds use cosh-lengths,
/// the cusped kind uses lambda lengths.
#[derive(Clone, Debug, PartialEq)]
pub struct SeedSpec<S> {
    pub kind: SurfaceKind,
    pub basis: [S; 3],
}

impl<S: Scalar> SeedSpec<S> {
    pub fn new(kind: SurfaceKind, basis: [S; 3]) -> Result<Self, WeightError> {
        for (l, v) in Letter::ALL.iter().zip(basis.iter()) {
            let ok = match kind {
                SurfaceKind::CuspedPants => *v > S::zero(),
                _ => *v > S::one(),
            };
            if !ok {
                return Err(WeightError::Seed(format!("basis {l} = {v} out of range for {kind}")));
            }
        }
        Ok(SeedSpec { kind, basis })
    }

    pub fn from_ints(kind: SurfaceKind, basis: [i64; 3]) -> Result<Self, WeightError> {
        SeedSpec::new(kind, basis.map(S::from_i64))
    }

    /// The unit lambda basis of the thrice-punctured sphere.
    pub fn cusped_unit() -> Self {
        SeedSpec { kind: SurfaceKind::CuspedPants, basis: [S::one(), S::one(), S::one()] }
    }

    pub fn weight(&self, l: Letter) -> &S {
        &self.basis[l.index()]
    }

    pub fn cast<T: Scalar>(&self) -> SeedSpec<T> {
        SeedSpec { kind: self.kind, basis: [cast(&self.basis[0]), cast(&self.basis[1]), cast(&self.basis[2])] }
    }

    pub fn label(&self) -> String {
        format!("{}({},{},{})", self.kind, self.basis[0], self.basis[1], self.basis[2])
    }
}

/// Weight of the first region beyond a root edge of weight `x` between
/// regions of weights `y` and `z` (geodesic kinds). Rational in its inputs.
pub fn first_region_weight<S: Scalar>(x: &S, y: &S, z: &S) -> Result<S, WeightError> {
    if *x <= S::one() {
        return Err(WeightError::Relation(RelError::Domain(format!("x = {x} must exceed 1"))));
    }
    let lin = (x.clone() * y.clone() + z.clone()) * y.clone() + (x.clone() * z.clone() + y.clone()) * z.clone();
    Ok((lin + cap_p_sq(x, y, z)) / (x.square() - S::one()))
}

/// Region reached by crossing the torus arc `x` once, (y+z)²/(x−1) + 1.
pub fn once_crossing_torus<S: Scalar>(x: &S, y: &S, z: &S) -> Result<S, WeightError> {
    if *x <= S::one() {
        return Err(WeightError::Relation(RelError::Domain(format!("x = {x} must exceed 1"))));
    }
    Ok((y.clone() + z.clone()).square() / (x.clone() - S::one()) + S::one())
}

/// Region weights over one sector tree. Region ids follow the topology:
/// the two initial regions, then the region beyond edge i at id i + 2.
#[derive(Clone, Debug)]
pub struct WeightedTree<S> {
    pub seed: SeedSpec<S>,
    pub topology: TreeTopology,
    pub weights: Vec<S>,
}

/// Local data at an edge: letter weights and flanking region weights.
pub(crate) struct Local<'a, S> {
    pub x: &'a S,
    pub y: &'a S,
    pub z: &'a S,
    pub near: &'a S,
    pub far: &'a S,
    pub opposite: Option<&'a S>,
}

fn local<'a, S: Scalar>(seed: &'a SeedSpec<S>, t: &TreeTopology, w: &'a [S], i: usize) -> Local<'a, S> {
    let e = &t.edges[i];
    Local {
        x: seed.weight(e.letter),
        y: seed.weight(e.label_far),
        z: seed.weight(e.label_near),
        near: &w[e.near as usize],
        far: &w[e.far as usize],
        opposite: (e.opposite != NONE).then(|| &w[e.opposite as usize]),
    }
}

pub(crate) fn next_weight<S: Scalar>(kind: SurfaceKind, l: &Local<S>) -> Result<S, WeightError> {
    let (x, y, z) = (l.x.clone(), l.y.clone(), l.z.clone());
    let (yy, zz) = (l.near.clone(), l.far.clone());
    let Some(x1) = l.opposite.cloned() else {
        return match kind {
            SurfaceKind::CuspedPants => Ok((yy.square() + zz.square()) / x),
            _ => first_region_weight(&x, &yy, &zz),
        };
    };
    Ok(match kind {
        SurfaceKind::Pants => {
            let den = x.square() - S::one();
            let cy = S::two() * (x.clone() * y.clone() + z.clone()) / den.clone();
            let cz = S::two() * (x * z + y) / den;
            cy * yy + cz * zz - x1
        }
        SurfaceKind::Torus => (y + z) / (x - S::one()) * (yy + zz) - x1,
        SurfaceKind::CuspedPants => (y * yy + z * zz) / x,
    })
}

/// Weights for one sector to `depth`, level by level.
pub fn propagate<S: Scalar>(seed: &SeedSpec<S>, sector: SectorSpec, depth: u32) -> Result<WeightedTree<S>, WeightError> {
    let topology = build_sector(seed.kind.grammar(), sector, depth);
    let mut weights = Vec::with_capacity(topology.regions.len());
    weights.push(seed.weight(sector.left).clone());
    weights.push(seed.weight(sector.right).clone());
    for d in 0..depth {
        let (start, end) = topology.level_range(d);
        let level: Vec<S> = (start..end)
            .into_par_iter()
            .map(|i| next_weight(seed.kind, &local(seed, &topology, &weights, i)))
            .collect::<Result<_, _>>()?;
        debug_assert_eq!(weights.len(), start + 2);
        weights.extend(level);
    }
    Ok(WeightedTree { seed: seed.clone(), topology, weights })
}

impl<S: Scalar> WeightedTree<S> {
    pub fn weight(&self, region: u32) -> &S {
        &self.weights[region as usize]
    }

    /// Weights of regions at exactly `depth`.
    pub fn frontier_weights(&self, depth: u32) -> impl Iterator<Item = &S> {
        self.topology.regions.iter().zip(&self.weights).filter(move |(r, _)| r.depth == depth).map(|(_, w)| w)
    }

    /// First region whose weight is not an integer.
    pub fn first_non_integer(&self) -> Option<(u32, S)> {
        self.weights.iter().enumerate().find_map(|(i, w)| match w.to_ratio() {
            Some(r) if r.is_integer() => None,
            _ => Some((i as u32, w.clone())),
        })
    }

    /// The three regions around the vertex beyond each built non-frontier
    /// edge, indexed by the letter of the edge opposite each region.
    pub fn vertex_regions(&self) -> Vec<[S; 3]> {
        let t = &self.topology;
        let mut out = Vec::new();
        for (i, e) in t.edges.iter().enumerate() {
            if e.beyond == NONE {
                continue;
            }
            let (c1, c2) = t.children(i as u32).expect("built edge has children");
            let (n_near, n_far) = (t.edges[c1 as usize].letter, t.edges[c2 as usize].letter);
            let mut region = [S::zero(), S::zero(), S::zero()];
            region[e.letter.index()] = self.weight(e.beyond).clone();
            region[n_far.index()] = self.weight(e.near).clone();
            region[n_near.index()] = self.weight(e.far).clone();
            out.push(region);
        }
        out
    }

    /// Vertex relation at the vertex beyond each built non-frontier edge.
    pub fn vertex_residuals(&self) -> Vec<Residual<S>> {
        let w = &self.seed.basis;
        self.vertex_regions()
            .iter()
            .map(|r| quadruplet_residual(&w[0], &w[1], &w[2], &r[0], &r[1], &r[2]))
            .collect()
    }

    /// Largest relative gap between the propagated weights and the radical
    /// recursive formula, evaluated in `R`.
    pub fn dual_derivation_deviation<R: Real>(&self) -> Result<f64, WeightError> {
        if self.seed.kind == SurfaceKind::CuspedPants {
            return Ok(0.0);
        }
        let t = &self.topology;
        let grammar = t.grammar.kind;
        let basis: [R; 3] = [cast(&self.seed.basis[0]), cast(&self.seed.basis[1]), cast(&self.seed.basis[2])];
        let mut worst = 0.0f64;
        for e in &t.edges {
            if e.beyond == NONE || e.opposite == NONE {
                continue;
            }
            let (n_near, n_far) = child_edge_labels(grammar, e.letter, e.label_near)?;
            let yy: R = cast(self.weight(e.near));
            let zz: R = cast(self.weight(e.far));
            let radical = geodesic_ptolemy_next(
                &basis[e.letter.index()],
                &basis[n_far.index()],
                &basis[n_near.index()],
                &yy,
                &zz,
                Root::Plus,
            )?;
            let got: R = cast(self.weight(e.beyond));
            let rel = ((got - radical.clone()) / radical).abs().to_f64();
            worst = worst.max(rel);
        }
        Ok(worst)
    }
}

/// Congruence rule checked at every edge-region triple (x, Y, Z).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CongruenceRule {
    /// Edge weight `x` forces Y ≡ Z (mod m).
    SameResidue { x: BigInt, modulus: BigInt },
    /// Edge weight `x` forces Y + Z ≡ 0 (mod m).
    SumVanishes { x: BigInt, modulus: BigInt },
}

/// Rules for the one-holed torus with basis (3, 17, 21).
pub fn torus_3_17_21_rules() -> Vec<CongruenceRule> {
    vec![
        CongruenceRule::SameResidue { x: 3.into(), modulus: 4.into() },
        CongruenceRule::SumVanishes { x: 17.into(), modulus: 4.into() },
        CongruenceRule::SumVanishes { x: 21.into(), modulus: 4.into() },
    ]
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CongruenceReport {
    pub triples_checked: usize,
    /// Description of the first violation or non-integer weight.
    pub failure: Option<String>,
}

impl CongruenceReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

fn as_integer<S: Scalar>(v: &S) -> Option<BigInt> {
    v.to_ratio().filter(|r| r.is_integer()).map(|r| r.to_integer())
}

pub fn congruence_check<S: Scalar>(tree: &WeightedTree<S>, rules: &[CongruenceRule]) -> CongruenceReport {
    let t = &tree.topology;
    let mut checked = 0;
    for (i, e) in t.edges.iter().enumerate() {
        let vals = [tree.seed.weight(e.letter), tree.weight(e.near), tree.weight(e.far)];
        let ints: Option<Vec<BigInt>> = vals.iter().map(|v| as_integer(*v)).collect();
        let Some(ints) = ints else {
            return CongruenceReport {
                triples_checked: checked,
                failure: Some(format!("non-integer weight at edge {} ({})", i, t.edge_word(i as u32))),
            };
        };
        let (x, y, z) = (&ints[0], &ints[1], &ints[2]);
        for rule in rules {
            let bad = match rule {
                CongruenceRule::SameResidue { x: rx, modulus } => rx == x && !(y - z).is_multiple_of(modulus),
                CongruenceRule::SumVanishes { x: rx, modulus } => rx == x && !(y + z).is_multiple_of(modulus),
            };
            if bad {
                return CongruenceReport {
                    triples_checked: checked,
                    failure: Some(format!("{rule:?} fails at (x={x}, Y={y}, Z={z}), edge path {}", t.edge_word(i as u32))),
                };
            }
        }
        checked += 1;
    }
    CongruenceReport { triples_checked: checked, failure: None }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumEntry<S> {
    pub value: S,
    pub multiplicity: u64,
    pub first_depth: u32,
    pub witness_word: String,
}

#[derive(Clone, Debug)]
pub struct Spectrum<S> {
    pub entries: Vec<SpectrumEntry<S>>,
    pub depth: u32,
    /// Entries with value at most this are complete (no unbuilt region can
    /// reach them, since weights grow away from the root).
    pub complete_below: Option<S>,
}

impl<S: Scalar> Spectrum<S> {
    pub fn complete_entries(&self) -> impl Iterator<Item = &SpectrumEntry<S>> {
        self.entries.iter().filter(move |e| self.complete_below.as_ref().is_none_or(|c| e.value <= *c))
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.entries
                .iter()
                .map(|e| {
                    json!({
                        "value": format_value(&e.value),
                        "multiplicity": e.multiplicity,
                        "first_depth": e.first_depth,
                        "witness_word": e.witness_word,
                    })
                })
                .collect(),
        )
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("value,multiplicity,first_depth,witness_word\n");
        for e in &self.entries {
            s.push_str(&format!("{},{},{},{}\n", format_value(&e.value), e.multiplicity, e.first_depth, e.witness_word));
        }
        s
    }
}

/// Integers print bare, other rationals as p/q, inexact values in decimal.
pub fn format_value<S: Scalar>(v: &S) -> String {
    if S::EXACT {
        if let Some(r) = v.to_ratio() {
            return r.to_string();
        }
    }
    v.to_string()
}

/// One region occurrence: value, depth and word.
type Occurrence<S> = (S, u32, String);

fn group<S: Scalar>(mut occ: Vec<Occurrence<S>>, halve: bool) -> Result<Vec<SpectrumEntry<S>>, WeightError> {
    if !S::EXACT {
        return Err(WeightError::InexactGrouping);
    }
    occ.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite weights").then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut out: Vec<SpectrumEntry<S>> = Vec::new();
    let mut counts: Vec<u64> = Vec::new();
    for (v, d, w) in occ {
        match out.last() {
            Some(last) if last.value == v => *counts.last_mut().unwrap() += 1,
            _ => {
                out.push(SpectrumEntry { value: v, multiplicity: 0, first_depth: d, witness_word: w });
                counts.push(1);
            }
        }
    }
    for (e, c) in out.iter_mut().zip(counts) {
        if halve {
            if c % 2 != 0 {
                return Err(WeightError::OddMultiplicity { value: format_value(&e.value), count: c });
            }
            e.multiplicity = c / 2;
        } else {
            e.multiplicity = c;
        }
    }
    Ok(out)
}

fn occurrences<S: Scalar>(tree: &WeightedTree<S>) -> Vec<Occurrence<S>> {
    let t = &tree.topology;
    (2..t.regions.len() as u32)
        .map(|r| (tree.weight(r).clone(), t.regions[r as usize].depth, t.region_word(r)))
        .collect()
}

fn min_frontier<'a, S: Scalar + 'a>(trees: impl Iterator<Item = &'a WeightedTree<S>>) -> Option<S> {
    let mut m: Option<S> = None;
    for t in trees {
        for w in t.frontier_weights(t.topology.depth) {
            m = Some(match m {
                Some(c) => c.min_of(w.clone()),
                None => w.clone(),
            });
        }
    }
    m
}

/// Oriented spectrum of the non-initial regions of a single tree.
pub fn tree_spectrum<S: Scalar>(tree: &WeightedTree<S>) -> Result<Spectrum<S>, WeightError> {
    Ok(Spectrum {
        entries: group(occurrences(tree), false)?,
        depth: tree.topology.depth,
        complete_below: min_frontier(std::iter::once(tree)),
    })
}

/// The six sector trees of a seed surface, one per ordered pair of letters.
pub fn surface_trees<S: Scalar>(seed: &SeedSpec<S>, depth: u32) -> Result<Vec<WeightedTree<S>>, WeightError> {
    SectorSpec::all_six().into_iter().map(|s| propagate(seed, s, depth)).collect()
}

/// Unoriented surface spectrum: every sector tree's non-initial regions plus
/// each basis arc in both directions, then halved.
pub fn surface_spectrum<S: Scalar>(seed: &SeedSpec<S>, depth: u32) -> Result<Spectrum<S>, WeightError> {
    if !S::EXACT {
        return Err(WeightError::InexactGrouping);
    }
    let trees = surface_trees(seed, depth)?;
    let mut occ: Vec<Occurrence<S>> = trees.iter().flat_map(occurrences).collect();
    for l in Letter::ALL {
        for _ in 0..2 {
            occ.push((seed.weight(l).clone(), 0, l.lower().to_string()));
        }
    }
    Ok(Spectrum { entries: group(occ, true)?, depth, complete_below: min_frontier(trees.iter()) })
}

/// Surface spectrum in floating point. Values within a relative 2^(−bits/2)
/// of each other are merged into one entry.
pub fn surface_spectrum_float<R: Real>(seed: &SeedSpec<R>, depth: u32) -> Result<Spectrum<R>, WeightError> {
    let trees = surface_trees(seed, depth)?;
    let mut occ: Vec<Occurrence<R>> = trees.iter().flat_map(occurrences).collect();
    for l in Letter::ALL {
        for _ in 0..2 {
            occ.push((seed.weight(l).clone(), 0, l.lower().to_string()));
        }
    }
    occ.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite weights").then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let tol = R::from_f64(2f64.powi(-(R::BITS as i32) / 2));
    let mut entries: Vec<SpectrumEntry<R>> = Vec::new();
    for (v, d, w) in occ {
        match entries.last_mut() {
            Some(last) if (v.clone() - last.value.clone()).abs() <= tol.clone() * v.abs() => {
                last.multiplicity += 1;
                if d < last.first_depth {
                    last.first_depth = d;
                    last.witness_word = w;
                }
            }
            _ => entries.push(SpectrumEntry { value: v, multiplicity: 1, first_depth: d, witness_word: w }),
        }
    }
    for e in &mut entries {
        if e.multiplicity % 2 != 0 {
            return Err(WeightError::OddMultiplicity { value: format_value(&e.value), count: e.multiplicity });
        }
        e.multiplicity /= 2;
    }
    Ok(Spectrum { entries, depth, complete_below: min_frontier(trees.iter()) })
}

/// Raw weights of every region of every sector tree, for inexact modes.
pub fn surface_multiset<S: Scalar>(seed: &SeedSpec<S>, depth: u32) -> Result<Vec<Occurrence<S>>, WeightError> {
    let trees = surface_trees(seed, depth)?;
    Ok(trees.iter().flat_map(occurrences).collect())
}

/// Parses "3", "-2", "7/3" or a decimal such as "2.5" into a rational.
pub fn parse_rational(s: &str) -> Result<BigRational, WeightError> {
    let s = s.trim();
    let bad = || WeightError::Seed(format!("cannot parse {s:?} as a rational"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        let neg = ip.starts_with('-');
        let digits = format!("{}{}", ip.trim_start_matches('-'), fp);
        let n: BigInt = digits.parse().map_err(|_| bad())?;
        let d = num_traits::pow(BigInt::from(10), fp.len());
        let r = BigRational::new(n, d);
        return Ok(if neg { -r } else { r });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}
