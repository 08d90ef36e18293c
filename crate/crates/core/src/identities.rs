//! Basmajian and Bridgeman identity engines with frontier certificates,
//! and the Rogers dilogarithm.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::orthotree::{child_edge_labels, Letter, RootConvention, SectorSpec, TreeError, NONE};
use crate::relations::{cap_p, stable_radius, triple_gap, triple_gap_excess, RelError};
use crate::scalar::{cast, Real, Scalar};
use crate::weights::{next_weight, propagate, surface_spectrum, Local, SeedSpec, SurfaceKind, WeightError, WeightedTree};

#[derive(Debug, Error)]
pub enum IdentityError {
    #[error("argument outside the domain: {0}")]
    Domain(String),
    #[error("invalid frontier: {0}")]
    InvalidFrontier(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Relation(#[from] RelError),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

pub type IdResult<T> = Result<T, IdentityError>;

/// Li₂(u) and log(1−u) from their power series, for 0 < u ≤ ½.
fn li2_and_log1m<R: Real>(u: &R) -> (R, R) {
    let eps = R::epsilon();
    let mut li2 = R::zero();
    let mut log1m = R::zero();
    let mut pow = u.clone();
    let mut k: i64 = 1;
    loop {
        let over_k = pow.clone() / R::from_i64(k);
        let term = over_k.clone() / R::from_i64(k);
        li2 = li2 + term;
        log1m = log1m - over_k.clone();
        if over_k <= -(eps.clone() * log1m.clone()) {
            return (li2, log1m);
        }
        pow = pow * u.clone();
        k += 1;
    }
}

/// Rogers dilogarithm L(u) = Li₂(u) + ½ log u · log(1−u) on (0, 1].
pub fn rogers_dilog<R: Real>(u: &R) -> IdResult<R> {
    let one = R::one();
    if *u <= R::zero() || *u > one {
        return Err(IdentityError::Domain(format!("Rogers dilogarithm needs 0 < u <= 1, got {u}")));
    }
    let small = |v: &R| {
        let (li2, log1m) = li2_and_log1m(v);
        li2 + v.ln() * log1m / R::two()
    };
    if *u <= one.clone() / R::two() {
        return Ok(small(u));
    }
    let zeta2 = R::pi().square() / R::from_i64(6);
    if *u == one {
        return Ok(zeta2);
    }
    Ok(zeta2 - small(&(one - u.clone())))
}

/// Summand L(2/(X+1)) of the Bridgeman sum for an orthogeodesic of
/// cosh-length X ≥ 1.
pub fn bridgeman_term<R: Real>(x: &R) -> IdResult<R> {
    if *x < R::one() {
        return Err(IdentityError::Domain(format!("cosh-length {x} below 1")));
    }
    rogers_dilog(&(R::two() / (x.clone() + R::one())))
}

/// Checks L(u) ≤ −log(1−u)·(1 + log(1/u)) at `points` evenly spaced
/// interior points; this is the inequality behind the Bridgeman tail bound.
/// Returns the first failing u.
pub fn dilog_bound_check<R: Real>(points: usize) -> Result<(), R> {
    dilog_bound_scan(points, &R::one(), |u: &R| -(-u.clone()).ln_1p())
}

/// The sharper L(u) ≤ u(1 + log(1/u)) on (0, upper); it only holds for
/// u up to about 0.533.
pub fn dilog_linear_bound_check<R: Real>(points: usize, upper: &R) -> Result<(), R> {
    dilog_bound_scan(points, upper, |u: &R| u.clone())
}

fn dilog_bound_scan<R: Real>(points: usize, upper: &R, lead: impl Fn(&R) -> R) -> Result<(), R> {
    for k in 1..=points {
        let u = upper.clone() * R::from_i64(k as i64) / R::from_i64(points as i64 + 1);
        let l = rogers_dilog(&u).map_err(|_| u.clone())?;
        let bound = lead(&u) * (R::one() - u.ln());
        if l > bound {
            return Err(u);
        }
    }
    Ok(())
}

/// Closed-form T₁ total, log((x₀+Y₀Z₀+P)/((Y₀−1)(Z₀−1))).
pub fn basmajian_total<R: Real>(x0: &R, y0: &R, z0: &R) -> IdResult<R> {
    let one = R::one();
    for v in [x0, y0, z0] {
        if *v <= one {
            return Err(IdentityError::Domain(format!("cosh-length {v} must exceed 1")));
        }
    }
    let p = cap_p(x0, y0, z0)?;
    let num = x0.clone() + y0.clone() * z0.clone() + p;
    Ok((num / ((y0.clone() - one.clone()) * (z0.clone() - one))).ln())
}

/// The same total as h(Y₀) + h(Z₀) + f(x₀, Y₀, Z₀).
pub fn basmajian_total_split<R: Real>(x0: &R, y0: &R, z0: &R) -> IdResult<R> {
    Ok(stable_radius(y0)? + stable_radius(z0)? + triple_gap(x0, y0, z0)?)
}

/// Where a tree is cut for a certificate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Frontier {
    /// All edges at this depth.
    Depth(u32),
    /// An explicit antichain of edge ids meeting every root-to-leaf path once.
    Edges(Vec<u32>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrontierCertificate<R> {
    /// Σ 2h(X) over enumerated regions.
    pub partial: R,
    /// Σ (f − h − h) over frontier triples.
    pub remainder: R,
    pub total: R,
    pub policy: String,
    pub regions: usize,
    pub frontier_edges: usize,
}

impl<R: Real> FrontierCertificate<R> {
    /// partial + remainder − total.
    pub fn residual(&self) -> R {
        self.partial.clone() + self.remainder.clone() - self.total.clone()
    }
}

/// Marks edges strictly above the frontier (those whose beyond region is
/// enumerated) and the frontier edges themselves.
fn frontier_marks<S: Scalar>(tree: &WeightedTree<S>, frontier: &Frontier) -> IdResult<(Vec<bool>, Vec<u32>)> {
    let t = &tree.topology;
    let edges: Vec<u32> = match frontier {
        Frontier::Depth(d) => {
            let (a, b) = if *d <= t.depth {
                t.level_range(*d)
            } else {
                return Err(TreeError::TooDeep { asked: *d, built: t.depth }.into());
            };
            (a as u32..b as u32).collect()
        }
        Frontier::Edges(v) => v.clone(),
    };
    let mut is_front = vec![false; t.edges.len()];
    for &e in &edges {
        let slot = is_front
            .get_mut(e as usize)
            .ok_or_else(|| IdentityError::InvalidFrontier(format!("edge {e} not in the tree")))?;
        if *slot {
            return Err(IdentityError::InvalidFrontier(format!("edge {e} listed twice")));
        }
        *slot = true;
    }
    // count frontier edges on each root path; edges are stored parents first
    let mut count = vec![0u8; t.edges.len()];
    for (i, e) in t.edges.iter().enumerate() {
        let above = if e.parent == NONE { 0 } else { count[e.parent as usize] };
        let c = above.saturating_add(is_front[i] as u8);
        if c > 1 {
            return Err(IdentityError::InvalidFrontier(format!("edge {i} lies below another frontier edge")));
        }
        count[i] = c;
    }
    let (leaf_start, leaf_end) = t.level_range(t.depth);
    if let Some(i) = (leaf_start..leaf_end).find(|&i| count[i] == 0) {
        return Err(IdentityError::InvalidFrontier(format!("path to edge {i} misses the frontier")));
    }
    let above: Vec<bool> = (0..t.edges.len()).map(|i| count[i] == 0).collect();
    Ok((above, edges))
}

fn edge_excess<S: Scalar, R: Real>(tree: &WeightedTree<S>, e: u32) -> IdResult<R> {
    let edge = &tree.topology.edges[e as usize];
    let x: R = cast(tree.seed.weight(edge.letter));
    let y: R = cast(tree.weight(edge.near));
    let z: R = cast(tree.weight(edge.far));
    Ok(triple_gap_excess(&x, &y, &z)?)
}

fn two_h<S: Scalar, R: Real>(v: &S) -> IdResult<R> {
    Ok(stable_radius::<R>(&cast(v))? * R::two())
}

/// Sums for one sector tree: (Σ 2h over non-initial enumerated regions,
/// remainder, enumerated count, frontier size).
fn sector_sums<S: Scalar, R: Real>(tree: &WeightedTree<S>, frontier: &Frontier) -> IdResult<(R, R, usize, usize)> {
    require_geodesic(tree.seed.kind)?;
    let (above, front) = frontier_marks(tree, frontier)?;
    let mut partial = R::zero();
    let mut n = 0;
    for (i, e) in tree.topology.edges.iter().enumerate() {
        if above[i] {
            debug_assert_ne!(e.beyond, NONE);
            partial = partial + two_h::<S, R>(tree.weight(e.beyond))?;
            n += 1;
        }
    }
    let mut remainder = R::zero();
    for &e in &front {
        remainder = remainder + edge_excess::<S, R>(tree, e)?;
    }
    Ok((partial, remainder, n, front.len()))
}

fn require_geodesic(kind: SurfaceKind) -> IdResult<()> {
    if kind == SurfaceKind::CuspedPants {
        return Err(IdentityError::Unsupported("identities need geodesic boundary".into()));
    }
    Ok(())
}

fn policy_name(f: &Frontier) -> String {
    match f {
        Frontier::Depth(d) => format!("depth={d}"),
        Frontier::Edges(v) => format!("antichain({} edges)", v.len()),
    }
}

/// T₁ certificate for a single sector tree: the initial regions contribute
/// 2h each, the total is the closed form at the root.
pub fn basmajian_partial<S: Scalar, R: Real>(tree: &WeightedTree<S>, frontier: &Frontier) -> IdResult<FrontierCertificate<R>> {
    let (p, remainder, n, nf) = sector_sums::<S, R>(tree, frontier)?;
    let s = tree.topology.sector;
    let w = |l: Letter| tree.seed.weight(l);
    let partial = p + two_h::<S, R>(w(s.left))? + two_h::<S, R>(w(s.right))?;
    let total = basmajian_total::<R>(&cast(w(s.root)), &cast(w(s.left)), &cast(w(s.right)))?;
    Ok(FrontierCertificate { partial, remainder, total, policy: policy_name(frontier), regions: n + 2, frontier_edges: nf })
}

/// Certificate for sectors glued cyclically at one root vertex. The total is
/// Σ f(x₀ₖ, Y₀ₖ, Z₀ₖ); each shared initial region enters the partial sum once.
pub fn basmajian_tn<S: Scalar, R: Real>(seed: &SeedSpec<S>, sectors: &[SectorSpec], depth: u32) -> IdResult<FrontierCertificate<R>> {
    crate::orthotree::check_cyclic(sectors)?;
    require_geodesic(seed.kind)?;
    let mut partial = R::zero();
    let mut remainder = R::zero();
    let mut total = R::zero();
    let (mut n, mut nf) = (0, 0);
    for s in sectors {
        let tree = propagate(seed, *s, depth)?;
        let (p, r, k, kf) = sector_sums::<S, R>(&tree, &Frontier::Depth(depth))?;
        partial = partial + p + two_h::<S, R>(seed.weight(s.left))?;
        remainder = remainder + r;
        n += k + 1;
        nf += kf;
        let w = |l: Letter| -> R { cast(seed.weight(l)) };
        total = total + triple_gap(&w(s.root), &w(s.left), &w(s.right))?;
    }
    Ok(FrontierCertificate {
        partial,
        remainder,
        total,
        policy: format!("depth={depth}, sectors={}", sectors.len()),
        regions: n,
        frontier_edges: nf,
    })
}

/// Product form of a T₁ certificate.
#[derive(Clone, Debug)]
pub struct ProductCertificate<S, R> {
    /// Region weights with their counts, initial regions included, ascending.
    pub factors: Vec<(S, u64)>,
    pub partial_product: R,
    /// partial_product · exp(remainder).
    pub certified: R,
    /// exp(total).
    pub expected: R,
    /// Weights at most this have complete counts.
    pub complete_below: Option<S>,
}

/// Π (X+1)/(X−1) over the enumerated regions of a sector tree cut at
/// `depth`, closed by the exponentiated remainder.
pub fn boundary_product<S: Scalar, R: Real>(tree: &WeightedTree<S>, depth: u32) -> IdResult<ProductCertificate<S, R>> {
    let cert = basmajian_partial::<S, R>(tree, &Frontier::Depth(depth))?;
    let mut values: Vec<S> = tree
        .topology
        .regions
        .iter()
        .zip(&tree.weights)
        .filter(|(r, _)| r.depth <= depth)
        .map(|(_, w)| w.clone())
        .collect();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let mut factors: Vec<(S, u64)> = Vec::new();
    for v in values {
        match factors.last_mut() {
            Some((last, c)) if *last == v => *c += 1,
            _ => factors.push((v, 1)),
        }
    }
    let mut prod = R::one();
    for (v, c) in &factors {
        let x: R = cast(v);
        let f = (x.clone() + R::one()) / (x - R::one());
        prod = prod * f.powi(*c as i32);
    }
    let complete_below = tree.frontier_weights(depth).cloned().reduce(|a, b| a.min_of(b));
    Ok(ProductCertificate {
        factors,
        certified: prod.clone() * cert.remainder.exp(),
        partial_product: prod,
        expected: cert.total.exp(),
        complete_below,
    })
}

/// Constants of the per-edge Bridgeman tail bound for a basis.
#[derive(Clone, Debug, PartialEq)]
pub struct TailConstants<R> {
    /// Growth factor: a new region is at most gamma·(Y+Z).
    pub gamma: R,
    /// Subtree contraction: children's excess ≤ rho · parent's excess.
    pub rho: R,
    /// log(2·gamma)·rho/(1−rho).
    pub depth_term: R,
}

pub fn tail_constants<R: Real>(basis: &[R; 3]) -> IdResult<TailConstants<R>> {
    let one = R::one();
    let mut gamma: Option<R> = None;
    let mut s: Option<R> = None;
    for xi in Letter::ALL {
        for yi in Letter::ALL {
            if yi == xi {
                continue;
            }
            let zi = xi.third(yi);
            let (x, y, z) = (&basis[xi.index()], &basis[yi.index()], &basis[zi.index()]);
            let lin = (x.clone() * y.clone() + z.clone()).max_of(x.clone() * z.clone() + y.clone());
            let g = (lin + cap_p(x, y, z)? * (one.clone() + x.clone()) / R::two()) / (x.square() - one.clone());
            gamma = Some(match gamma {
                Some(c) => c.max_of(g),
                None => g,
            });
            let pair = y.clone() + z.clone();
            s = Some(match s {
                Some(c) => c.max_of(pair),
                None => pair,
            });
        }
    }
    let (gamma, s) = (gamma.unwrap(), s.unwrap());
    let rho = (s.clone() - R::two()) / s;
    let depth_term = (R::two() * gamma.clone()).ln() * rho.clone() / (one - rho.clone());
    Ok(TailConstants { gamma, rho, depth_term })
}

/// Bound on Σ L(2/(X+1)) over the subtree beyond an edge with flanks Y, Z
/// and excess `excess`.
pub fn subtree_tail_bound<R: Real>(c: &TailConstants<R>, y: &R, z: &R, excess: &R) -> R {
    let b0 = c.gamma.clone() * (y.clone() + z.clone());
    let first = ((b0 + R::one()) / R::two()).ln();
    excess.clone() * (R::one() + first + c.depth_term.clone())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Policy {
    /// Expand every edge above this depth.
    Depth(u32),
    /// Expand the edge with the largest tail bound first, up to this many
    /// regions.
    Adaptive { budget: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub nodes: usize,
    pub partial: f64,
    pub bound: f64,
}

#[derive(Clone, Debug)]
pub struct BridgemanReport<R> {
    /// Surface-level partial sum Σ m·L(2/(X+1)).
    pub partial: R,
    pub tail_bound: R,
    /// Allowance for rounding in the partial sum.
    pub rounding: R,
    /// π²/2.
    pub target: R,
    pub nodes: usize,
    pub max_depth: u32,
    /// Whether every expansion respected the growth and contraction
    /// constants behind the tail bound.
    pub bound_checks_held: bool,
    pub trace: Vec<TraceRow>,
    pub constants: TailConstants<R>,
}

impl<R: Real> BridgemanReport<R> {
    /// partial ≤ target ≤ partial + tail_bound, up to the rounding allowance.
    pub fn brackets_target(&self) -> bool {
        let lo = self.partial.clone() - self.rounding.clone();
        let hi = self.partial.clone() + self.tail_bound.clone() + self.rounding.clone();
        lo <= self.target && self.target <= hi
    }

    /// Width of the certified bracket.
    pub fn bracket_width(&self) -> R {
        self.tail_bound.clone() + R::two() * self.rounding.clone()
    }

    pub fn deficit(&self) -> R {
        self.target.clone() - self.partial.clone()
    }
}

struct Pending<R> {
    letter: Letter,
    label_near: Letter,
    label_far: Letter,
    near: R,
    far: R,
    opposite: Option<R>,
    depth: u32,
    excess: f64,
    bound: f64,
}

struct Keyed<R> {
    key: f64,
    seq: u64,
    item: Pending<R>,
}

impl<R> PartialEq for Keyed<R> {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl<R> Eq for Keyed<R> {}
impl<R> PartialOrd for Keyed<R> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl<R> Ord for Keyed<R> {
    fn cmp(&self, o: &Self) -> Ordering {
        // ties broken by insertion order for determinism
        self.key.total_cmp(&o.key).then(o.seq.cmp(&self.seq))
    }
}

enum Queue<R> {
    Fifo(VecDeque<Pending<R>>),
    Heap(BinaryHeap<Keyed<R>>, u64),
}

impl<R> Queue<R> {
    fn push(&mut self, p: Pending<R>) {
        match self {
            Queue::Fifo(q) => q.push_back(p),
            Queue::Heap(h, seq) => {
                *seq += 1;
                h.push(Keyed { key: p.bound, seq: *seq, item: p });
            }
        }
    }

    fn bounds(&self) -> Vec<f64> {
        match self {
            Queue::Fifo(q) => q.iter().map(|p| p.bound).collect(),
            Queue::Heap(h, _) => {
                let mut v: Vec<(u64, f64)> = h.iter().map(|k| (k.seq, k.key)).collect();
                v.sort_unstable_by_key(|e| e.0);
                v.into_iter().map(|e| e.1).collect()
            }
        }
    }
}

/// Relative slack on each f64 tail term for its evaluation error.
const TERM_PAD: f64 = 1e-12;

/// Bridgeman sum over the six sector trees of a geodesic seed, with a
/// certified tail bound for the unexpanded subtrees.
///
/// Region weights and the partial sum are carried in `R`; the per-subtree
/// tail bounds are upper estimates evaluated in f64 and padded.
pub fn bridgeman<R: Real>(seed: &SeedSpec<R>, policy: Policy, checkpoints: &[usize]) -> IdResult<BridgemanReport<R>> {
    require_geodesic(seed.kind)?;
    let grammar = seed.kind.grammar();
    let constants = tail_constants(&seed.basis)?;
    let basis_f: [f64; 3] = [seed.basis[0].to_f64(), seed.basis[1].to_f64(), seed.basis[2].to_f64()];
    let consts_f = tail_constants(&basis_f)?;
    let (gamma_f, rho_f) = (consts_f.gamma, consts_f.rho);
    let mut queue: Queue<R> = match policy {
        Policy::Depth(_) => Queue::Fifo(VecDeque::new()),
        Policy::Adaptive { .. } => Queue::Heap(BinaryHeap::new(), 0),
    };
    let mut tail = 0.0f64;
    let mut checks = dilog_bound_check::<f64>(10_000).is_ok();

    let make = |letter: Letter, near: R, far: R, opposite: Option<R>, ln: Letter, lf: Letter, depth: u32| -> IdResult<Pending<R>> {
        let (y, z) = (near.to_f64(), far.to_f64());
        let excess = triple_gap_excess(&basis_f[letter.index()], &y, &z)?;
        let bound = subtree_tail_bound(&consts_f, &y, &z, &excess) * (1.0 + TERM_PAD);
        Ok(Pending { letter, label_near: ln, label_far: lf, near, far, opposite, depth, excess, bound })
    };

    let mut oriented = R::zero();
    for l in Letter::ALL {
        oriented = oriented + R::two() * bridgeman_term(seed.weight(l))?;
    }
    for s in SectorSpec::all_six() {
        let p = make(s.root, seed.weight(s.left).clone(), seed.weight(s.right).clone(), None, s.left, s.right, 0)?;
        tail += p.bound;
        queue.push(p);
    }

    let mut nodes = 0usize;
    let mut max_depth = 0u32;
    let mut trace = Vec::new();
    let mut cps: Vec<usize> = checkpoints.iter().copied().filter(|&c| c > 0).collect();
    cps.sort_unstable();
    cps.dedup();
    let mut cps = cps.into_iter().peekable();
    loop {
        let p = match (&mut queue, policy) {
            (Queue::Fifo(q), Policy::Depth(d)) => match q.front() {
                Some(p) if p.depth < d => q.pop_front().unwrap(),
                _ => break,
            },
            (Queue::Heap(h, _), Policy::Adaptive { budget }) => {
                if nodes >= budget {
                    break;
                }
                match h.pop() {
                    Some(k) => k.item,
                    None => break,
                }
            }
            _ => unreachable!(),
        };
        let local = Local {
            x: seed.weight(p.letter),
            y: seed.weight(p.label_far),
            z: seed.weight(p.label_near),
            near: &p.near,
            far: &p.far,
            opposite: p.opposite.as_ref(),
        };
        let x2 = next_weight(seed.kind, &local)?;
        let (n_near, n_far) = if p.opposite.is_none() {
            match grammar.root {
                RootConvention::ThirdLetter => (p.label_far, p.label_near),
                RootConvention::SameLetter => (p.label_near, p.label_far),
            }
        } else {
            child_edge_labels(grammar.kind, p.letter, p.label_near)?
        };
        tail -= p.bound;
        oriented = oriented + bridgeman_term(&x2)?;
        nodes += 1;
        max_depth = max_depth.max(p.depth + 1);
        let grow_ok = x2.to_f64() <= gamma_f * (p.near.to_f64() + p.far.to_f64()) * (1.0 + 1e-9);
        let c1 = make(n_near, x2.clone(), p.near.clone(), Some(p.far.clone()), n_far, p.letter, p.depth + 1)?;
        let c2 = make(n_far, x2, p.far, Some(p.near), n_near, p.letter, p.depth + 1)?;
        if !grow_ok || c1.excess + c2.excess > rho_f * p.excess * (1.0 + 1e-9) {
            checks = false;
        }
        tail += c1.bound + c2.bound;
        queue.push(c1);
        queue.push(c2);
        if cps.peek() == Some(&nodes) {
            cps.next();
            trace.push(TraceRow { nodes, partial: oriented.to_f64() / 2.0, bound: tail / 2.0 });
        }
    }
    // exact re-summation of the frontier, padded for the n-term f64 sum
    let bounds = queue.bounds();
    let n = bounds.len() as f64;
    let tail: f64 = bounds.iter().sum::<f64>() * (1.0 + (n + 8.0) * f64::EPSILON) / 2.0;
    let partial = oriented / R::two();
    // each region term carries a few ulps of evaluation error
    let rounding = partial.clone() * R::epsilon() * R::from_i64(64 * (nodes as i64 + 6));
    trace.push(TraceRow { nodes, partial: partial.to_f64(), bound: tail });
    Ok(BridgemanReport {
        partial,
        tail_bound: R::from_f64(tail),
        rounding,
        target: R::pi().square() / R::two(),
        nodes,
        max_depth,
        bound_checks_held: checks,
        trace,
        constants,
    })
}

/// First `n` surface-level Bridgeman terms as (argument 2/(X+1),
/// multiplicity), from the exact spectrum.
pub fn bridgeman_coefficients<S: Scalar>(seed: &SeedSpec<S>, depth: u32, n: usize) -> IdResult<Vec<(S, u64)>> {
    let sp = surface_spectrum(seed, depth)?;
    let complete: Vec<(S, u64)> = sp
        .complete_entries()
        .take(n)
        .map(|e| (S::two() / (e.value.clone() + S::one()), e.multiplicity))
        .collect();
    if complete.len() < n {
        return Err(IdentityError::Unsupported(format!("depth {depth} resolves only {} complete terms", complete.len())));
    }
    Ok(complete)
}

/// Σ m·L(u) over listed (u, m) pairs.
pub fn coefficient_sum<S: Scalar, R: Real>(terms: &[(S, u64)]) -> IdResult<R> {
    let mut acc = R::zero();
    for (u, m) in terms {
        acc = acc + rogers_dilog::<R>(&cast(u))? * R::from_i64(*m as i64);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orthotree::{pants_boundary_sectors, torus_sectors};
    use crate::weights::parse_rational;
    use crate::{Exact, F128, F256};
    use num_traits::One;

    fn f(v: f64) -> F128 {
        F128::from_f64(v)
    }

    #[test]
    fn dilog_special_values() {
        let pi2 = F128::pi().square();
        let d = rogers_dilog(&F128::one()).unwrap() - pi2.clone() / F128::from_i64(6);
        assert!(d.abs().to_f64() < 1e-35);
        let d = rogers_dilog(&f(0.5)).unwrap() - pi2 / F128::from_i64(12);
        assert!(d.abs().to_f64() < 1e-35);
        assert!(rogers_dilog(&f(0.0)).is_err());
        assert!(rogers_dilog(&f(1.5)).is_err());
    }

    #[test]
    fn dilog_matches_library_li2() {
        for k in 1..40 {
            let u = F256::from_i64(k) / F256::from_i64(41);
            let lib = u.li2() + u.ln() * (F256::one() - u.clone()).ln() / F256::two();
            let ours = rogers_dilog(&u).unwrap();
            assert!(((ours - lib.clone()) / lib).abs().to_f64() < 1e-70);
        }
    }

    #[test]
    fn dilog_reflection() {
        let z2 = F128::pi().square() / F128::from_i64(6);
        for k in 1..50 {
            let u = F128::from_i64(k) / F128::from_i64(50);
            let s = rogers_dilog(&u).unwrap() + rogers_dilog(&(F128::one() - u)).unwrap();
            assert!((s - z2.clone()).abs().to_f64() < 1e-20);
        }
    }

    #[test]
    fn dilog_bound_on_grid() {
        assert!(dilog_bound_check::<f64>(10_000).is_ok());
        assert!(dilog_linear_bound_check::<f64>(10_000, &0.5).is_ok());
        let u = dilog_linear_bound_check::<f64>(10_000, &1.0).unwrap_err();
        assert!(u > 0.53 && u < 0.54);
    }

    #[test]
    fn totals_agree() {
        let t = basmajian_total(&f(3.0), &f(3.0), &f(3.0)).unwrap();
        let want = (F128::from_i64(3) + F128::from_i64(5).sqrt()).ln();
        assert!((t.clone() - want).abs().to_f64() < 1e-30);
        let s = basmajian_total_split(&f(3.0), &f(3.0), &f(3.0)).unwrap();
        assert!((t - s).abs().to_f64() < 1e-30);
        let t = basmajian_total(&f(2.0), &f(2.0), &f(2.0)).unwrap();
        let s = basmajian_total_split(&f(2.0), &f(2.0), &f(2.0)).unwrap();
        assert!((t - s).abs().to_f64() < 1e-30);
        let big = F128::from_f64(1e9);
        let t = basmajian_total(&f(3.0), &f(5.0), &big).unwrap();
        let s = basmajian_total_split(&f(3.0), &f(5.0), &big).unwrap();
        assert!((t - s).abs().to_f64() < 1e-25);
        assert!(basmajian_total(&f(1.0), &f(2.0), &f(2.0)).is_err());
    }

    #[test]
    fn certificate_exact_each_depth() {
        let seed = SeedSpec::<Exact>::from_ints(SurfaceKind::Pants, [3, 3, 3]).unwrap();
        let tree = propagate(&seed, SectorSpec::between(Letter::B, Letter::C).unwrap(), 10).unwrap();
        let mut last_partial: Option<F128> = None;
        let mut last_rem: Option<F128> = None;
        for d in 0..=10 {
            let c = basmajian_partial::<_, F128>(&tree, &Frontier::Depth(d)).unwrap();
            assert!(c.residual().abs().to_f64() < 1e-30, "depth {d}");
            if d == 0 {
                let two_ln2 = F128::from_i64(2) * F128::from_i64(2).ln();
                assert!((c.partial.clone() - two_ln2).abs().to_f64() < 1e-30);
            }
            if let (Some(p), Some(r)) = (&last_partial, &last_rem) {
                assert!(c.partial >= *p);
                assert!(c.remainder <= *r);
            }
            last_partial = Some(c.partial);
            last_rem = Some(c.remainder);
        }
    }

    #[test]
    fn ragged_frontier() {
        let seed = SeedSpec::<Exact>::from_ints(SurfaceKind::Torus, [3, 17, 21]).unwrap();
        let tree = propagate(&seed, SectorSpec::between(Letter::C, Letter::A).unwrap(), 4).unwrap();
        let t = &tree.topology;
        let (c1, c2) = t.children(0).unwrap();
        let (g1, g2) = t.children(c1).unwrap();
        let cert = basmajian_partial::<_, F128>(&tree, &Frontier::Edges(vec![g1, g2, c2])).unwrap();
        assert!(cert.residual().abs().to_f64() < 1e-30);
        assert_eq!(cert.regions, 4);
        assert!(basmajian_partial::<_, F128>(&tree, &Frontier::Edges(vec![c1])).is_err());
        assert!(basmajian_partial::<_, F128>(&tree, &Frontier::Edges(vec![c1, g1, c2])).is_err());
    }

    #[test]
    fn tn_totals() {
        let seed = SeedSpec::<Exact>::from_ints(SurfaceKind::Pants, [3, 3, 3]).unwrap();
        let c = basmajian_tn::<_, F128>(&seed, &pants_boundary_sectors(Letter::A), 8).unwrap();
        let want = F128::from_i64(2) * F128::from_f64(1.5).acosh();
        assert!((c.total.clone() - want).abs().to_f64() < 1e-30);
        assert!(c.residual().abs().to_f64() < 1e-30);
        let seed = SeedSpec::<Exact>::from_ints(SurfaceKind::Torus, [3, 17, 21]).unwrap();
        let c = basmajian_tn::<_, F128>(&seed, &torus_sectors(), 8).unwrap();
        assert!(c.residual().abs().to_f64() < 1e-30);
        assert!(basmajian_tn::<_, F128>(&seed, &torus_sectors()[..3], 3).is_err());
    }

    #[test]
    fn golden_product() {
        let seed = SeedSpec::<Exact>::from_ints(SurfaceKind::Pants, [3, 3, 3]).unwrap();
        let tree = propagate(&seed, SectorSpec::between(Letter::B, Letter::C).unwrap(), 12).unwrap();
        let p = boundary_product::<_, F128>(&tree, 2).unwrap();
        let want = F128::from_i64(3) + F128::from_i64(5).sqrt();
        assert!((p.certified.clone() - want.clone()).abs().to_f64() < 1e-30);
        let q = |v: i64| Exact::from_integer(v.into());
        assert_eq!(p.factors, vec![(q(3), 2), (q(19), 1), (q(63), 2)]);
        let p = boundary_product::<_, F128>(&tree, 12).unwrap();
        assert!((p.certified - want).abs().to_f64() < 1e-30);
        let ratios: Vec<(Exact, u64)> = p
            .factors
            .iter()
            .filter(|(v, _)| *v <= p.complete_below.clone().unwrap())
            .skip(1)
            .take(7)
            .map(|(v, c)| ((v.clone() + q(1)) / (v.clone() - q(1)), *c))
            .collect();
        let want: Vec<(Exact, u64)> = [("10/9", 1), ("32/31", 2), ("90/89", 2), ("122/121", 2), ("242/241", 2), ("362/361", 4), ("450/449", 2)]
            .iter()
            .map(|(s, c)| (parse_rational(s).unwrap(), *c))
            .collect();
        assert_eq!(ratios, want);
    }

    #[test]
    fn bridgeman_fixed_depth_monotone() {
        let seed = SeedSpec::<F128>::from_ints(SurfaceKind::Pants, [3, 3, 3]).unwrap();
        let mut last: Option<BridgemanReport<F128>> = None;
        for d in 0..6 {
            let r = bridgeman(&seed, Policy::Depth(d), &[]).unwrap();
            assert!(r.brackets_target(), "depth {d}");
            assert!(r.bound_checks_held);
            if let Some(l) = &last {
                assert!(r.partial >= l.partial);
            }
            last = Some(r);
        }
        let r = last.unwrap();
        assert_eq!(r.nodes, 6 * 31);
        assert_eq!(r.max_depth, 5);
    }

    #[test]
    fn bridgeman_adaptive_brackets() {
        let seed = SeedSpec::<F128>::from_ints(SurfaceKind::Torus, [3, 17, 21]).unwrap();
        let r = bridgeman(&seed, Policy::Adaptive { budget: 5000 }, &[1000, 2000]).unwrap();
        assert!(r.brackets_target());
        assert!(r.bound_checks_held);
        assert_eq!(r.nodes, 5000);
        assert_eq!(r.trace.len(), 3);
        assert!(r.trace[0].bound >= r.trace[2].bound);
    }

    #[test]
    fn listed_coefficients() {
        let q = |s: &str| parse_rational(s).unwrap();
        let cases: [([i64; 3], SurfaceKind, [(&str, u64); 7]); 4] = [
            ([3, 3, 3], SurfaceKind::Pants, [("1/2", 3), ("1/10", 3), ("1/32", 6), ("1/90", 6), ("1/122", 6), ("1/242", 6), ("1/362", 12)]),
            ([2, 2, 2], SurfaceKind::Pants, [("2/3", 3), ("2/18", 3), ("2/75", 6), ("2/288", 6), ("2/363", 6), ("2/1083", 6), ("2/1443", 12)]),
            ([3, 17, 21], SurfaceKind::Torus, [("1/2", 1), ("1/9", 1), ("1/10", 2), ("1/11", 2), ("1/19", 2), ("1/32", 2), ("1/41", 2)]),
            ([37, 17, 19], SurfaceKind::Torus, [("1/9", 1), ("1/10", 1), ("1/19", 2), ("1/72", 2), ("1/82", 2), ("1/90", 2), ("1/99", 2)]),
        ];
        for (b, kind, want) in cases {
            let seed = SeedSpec::<Exact>::from_ints(kind, b).unwrap();
            let got = bridgeman_coefficients(&seed, 8, 7).unwrap();
            let want: Vec<(Exact, u64)> = want.iter().map(|(s, m)| (q(s), *m)).collect();
            assert_eq!(got, want, "{kind} {b:?}");
            let s: F128 = coefficient_sum(&got).unwrap();
            assert!(s.to_f64() < std::f64::consts::PI.powi(2) / 2.0);
        }
    }

    #[test]
    fn cusped_rejected() {
        let seed = SeedSpec::<F128>::cusped_unit();
        assert!(bridgeman(&seed, Policy::Depth(2), &[]).is_err());
    }
}
