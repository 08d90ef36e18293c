//! Planar rooted trivalent trees whose complementary regions index oriented
//! orthogeodesics leaving a boundary segment.
//!
//! Each edge carries a basis letter. An edge stores its two flanking regions
//! in a fixed slot order: the `near` slot holds the newer region (the one
//! created at the parent vertex) and the `far` slot the older one. For the
//! region `opposite` the edge on the parent side, `label_near` and `label_far`
//! are the letters of its edges towards `near` and `far`.

use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::farey::{fraction_of_path, Fraction, Step};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("letter index {0} outside the alphabet")]
    BadLetter(u8),
    #[error("letters must be distinct: {0}")]
    RepeatedLetter(String),
    #[error("sectors are not glued cyclically: {0}")]
    NotCyclic(String),
    #[error("depth {asked} beyond built depth {built}")]
    TooDeep { asked: u32, built: u32 },
}

/// One of the three basis letters a, b, c.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter(u8);

impl Letter {
    pub const A: Letter = Letter(0);
    pub const B: Letter = Letter(1);
    pub const C: Letter = Letter(2);
    pub const ALL: [Letter; 3] = [Letter::A, Letter::B, Letter::C];

    pub fn new(i: u8) -> Result<Letter, TreeError> {
        if i < 3 {
            Ok(Letter(i))
        } else {
            Err(TreeError::BadLetter(i))
        }
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// The letter different from both arguments.
    pub fn third(self, other: Letter) -> Letter {
        debug_assert_ne!(self, other);
        Letter(3 - self.0 - other.0)
    }

    pub fn lower(self) -> char {
        (b'a' + self.0) as char
    }

    pub fn upper(self) -> char {
        (b'A' + self.0) as char
    }

    pub fn parse(c: char) -> Option<Letter> {
        match c.to_ascii_lowercase() {
            'a' => Some(Letter::A),
            'b' => Some(Letter::B),
            'c' => Some(Letter::C),
            _ => None,
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.lower())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GrammarKind {
    /// Pair of pants: an outgoing edge next to a region repeats the letter
    /// that region was flanked by before.
    PantsPersist,
    /// One-holed torus: it takes the remaining letter instead.
    TorusSwap,
}

/// How the two edges leaving the first vertex are lettered.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum RootConvention {
    /// The edge next to the initial region of letter w carries the letter
    /// that is neither the root letter nor w.
    #[default]
    ThirdLetter,
    /// The mirror choice: that edge carries w itself.
    SameLetter,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Grammar {
    pub kind: GrammarKind,
    pub root: RootConvention,
}

impl Grammar {
    pub fn pants() -> Self {
        Grammar { kind: GrammarKind::PantsPersist, root: RootConvention::ThirdLetter }
    }

    pub fn torus() -> Self {
        Grammar { kind: GrammarKind::TorusSwap, root: RootConvention::ThirdLetter }
    }
}

/// Letters of the two edges leaving the far end of an edge lettered
/// `incoming`, given the letter `label_near` of the edge bounding the
/// opposite region on the near side. Returns (edge next to the near region,
/// edge next to the far region).
pub fn child_edge_labels(kind: GrammarKind, incoming: Letter, label_near: Letter) -> Result<(Letter, Letter), TreeError> {
    if incoming == label_near {
        return Err(TreeError::RepeatedLetter(format!("{incoming}{label_near}")));
    }
    let other = incoming.third(label_near);
    Ok(match kind {
        GrammarKind::PantsPersist => (label_near, other),
        GrammarKind::TorusSwap => (other, label_near),
    })
}

/// Root edge letter and the letters of the two initial regions, left then
/// right in the planar order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SectorSpec {
    pub root: Letter,
    pub left: Letter,
    pub right: Letter,
}

impl SectorSpec {
    pub fn new(root: Letter, left: Letter, right: Letter) -> Result<Self, TreeError> {
        if root == left || root == right || left == right {
            return Err(TreeError::RepeatedLetter(format!("{root}{left}{right}")));
        }
        Ok(SectorSpec { root, left, right })
    }

    /// Sector between initial regions `left` and `right`; the root edge gets
    /// the third letter.
    pub fn between(left: Letter, right: Letter) -> Result<Self, TreeError> {
        if left == right {
            return Err(TreeError::RepeatedLetter(format!("{left}{right}")));
        }
        SectorSpec::new(left.third(right), left, right)
    }

    /// All six ordered pairs of initial letters.
    pub fn all_six() -> Vec<SectorSpec> {
        let mut out = Vec::new();
        for l in Letter::ALL {
            for r in Letter::ALL {
                if l != r {
                    out.push(SectorSpec::between(l, r).unwrap());
                }
            }
        }
        out
    }
}

impl fmt::Display for SectorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{};{},{}", self.root, self.left, self.right)
    }
}

pub const NONE: u32 = u32::MAX;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub parent: u32,
    pub letter: Letter,
    pub depth: u32,
    pub near: u32,
    pub far: u32,
    /// Region on the parent side; `NONE` for the root edge.
    pub opposite: u32,
    pub label_near: Letter,
    pub label_far: Letter,
    /// Which Farey sub-pair the edge refines, relative to its parent.
    pub step: Option<Step>,
    /// True when the near region has the smaller Farey fraction.
    pub near_is_low: bool,
    /// Region beyond the edge, `NONE` on the frontier.
    pub beyond: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Region {
    pub depth: u32,
    /// Edge the region lies beyond; `NONE` for the two initial regions.
    pub edge: u32,
    /// Letter of an initial region.
    pub initial: Option<Letter>,
}

/// A single-sector tree built to a fixed depth.
#[derive(Clone, Debug)]
pub struct TreeTopology {
    pub grammar: Grammar,
    pub sector: SectorSpec,
    pub depth: u32,
    pub edges: Vec<Edge>,
    pub regions: Vec<Region>,
    /// Edge index ranges by depth.
    levels: Vec<(usize, usize)>,
}

/// Initial regions have ids 0 (left) and 1 (right); the root edge is edge 0.
pub const LEFT_INITIAL: u32 = 0;
pub const RIGHT_INITIAL: u32 = 1;

impl TreeTopology {
    pub fn edges_at(&self, depth: u32) -> Result<&[Edge], TreeError> {
        if depth > self.depth {
            return Err(TreeError::TooDeep { asked: depth, built: self.depth });
        }
        let (a, b) = self.levels[depth as usize];
        Ok(&self.edges[a..b])
    }

    pub fn level_range(&self, depth: u32) -> (usize, usize) {
        self.levels[depth as usize]
    }

    /// Edges from the root edge down to `edge`, inclusive.
    pub fn edge_path(&self, edge: u32) -> Vec<u32> {
        let mut out = Vec::new();
        let mut e = edge;
        while e != NONE {
            out.push(e);
            e = self.edges[e as usize].parent;
        }
        out.reverse();
        out
    }

    /// Capitalized crossing letters; initial regions use their lowercase
    /// letter.
    pub fn region_word(&self, region: u32) -> String {
        let r = &self.regions[region as usize];
        if let Some(l) = r.initial {
            return l.lower().to_string();
        }
        self.edge_path(r.edge).iter().map(|&e| self.edges[e as usize].letter.upper()).collect()
    }

    pub fn region_fraction(&self, region: u32) -> Fraction {
        match region {
            LEFT_INITIAL => Fraction::zero(),
            RIGHT_INITIAL => Fraction::one(),
            _ => {
                let path = self.edge_path(self.regions[region as usize].edge);
                let steps: Vec<Step> = path.iter().filter_map(|&e| self.edges[e as usize].step).collect();
                fraction_of_path(&steps)
            }
        }
    }

    /// Letters of the edges on the path to `edge`, as a string.
    pub fn edge_word(&self, edge: u32) -> String {
        self.edge_path(edge).iter().map(|&e| self.edges[e as usize].letter.lower()).collect()
    }

    /// Region ids in planar left-to-right order.
    pub fn regions_in_order(&self) -> Vec<u32> {
        let mut out = vec![LEFT_INITIAL];
        // in-order walk: left subtree, region, right subtree
        fn walk(t: &TreeTopology, e: u32, out: &mut Vec<u32>) {
            let edge = &t.edges[e as usize];
            if edge.beyond == NONE {
                return;
            }
            let kids = t.children(e);
            let (lo, hi) = match kids {
                Some((c1, c2)) => {
                    if t.edges[c1 as usize].step == Some(Step::L) {
                        (Some(c1), Some(c2))
                    } else {
                        (Some(c2), Some(c1))
                    }
                }
                None => (None, None),
            };
            if let Some(c) = lo {
                walk(t, c, out);
            }
            out.push(edge.beyond);
            if let Some(c) = hi {
                walk(t, c, out);
            }
        }
        walk(self, 0, &mut out);
        out.push(RIGHT_INITIAL);
        out
    }

    /// Child edges of `edge` (near-side child first) if built.
    pub fn children(&self, edge: u32) -> Option<(u32, u32)> {
        let e = &self.edges[edge as usize];
        if e.depth >= self.depth || e.beyond == NONE {
            return None;
        }
        let (start, end) = self.levels[e.depth as usize];
        let (cstart, _) = self.levels[e.depth as usize + 1];
        debug_assert!((edge as usize) >= start && (edge as usize) < end);
        let k = cstart + 2 * (edge as usize - start);
        Some((k as u32, k as u32 + 1))
    }

    /// Frontier triples (edge, near region, far region) at depth `d`.
    pub fn edge_region_triples(&self, d: u32) -> Result<Vec<(u32, u32, u32)>, TreeError> {
        let (a, _) = self.levels.get(d as usize).copied().ok_or(TreeError::TooDeep { asked: d, built: self.depth })?;
        Ok(self.edges_at(d)?.iter().enumerate().map(|(i, e)| ((a + i) as u32, e.near, e.far)).collect())
    }

    /// JSON-lines dump: one record per region, then one per edge.
    pub fn dump_jsonl(&self, sector_index: usize, out: &mut impl Write) -> io::Result<()> {
        for (i, r) in self.regions.iter().enumerate() {
            let rec = json!({
                "record": "region",
                "sector": sector_index,
                "fraction": self.region_fraction(i as u32).to_string(),
                "word": self.region_word(i as u32),
                "depth": r.depth,
            });
            writeln!(out, "{rec}")?;
        }
        for (i, e) in self.edges.iter().enumerate() {
            let rec = json!({
                "record": "edge",
                "sector": sector_index,
                "path": self.edge_word(i as u32),
                "letter": e.letter.to_string(),
                "depth": e.depth,
            });
            writeln!(out, "{rec}")?;
        }
        Ok(())
    }
}

/// Builds one sector to `depth`: edges of depth ≤ `depth`, regions of depth
/// ≤ `depth`. Depth 0 is the root edge between the two initial regions.
pub fn build_sector(grammar: Grammar, sector: SectorSpec, depth: u32) -> TreeTopology {
    let mut regions = vec![
        Region { depth: 0, edge: NONE, initial: Some(sector.left) },
        Region { depth: 0, edge: NONE, initial: Some(sector.right) },
    ];
    let mut edges = vec![Edge {
        parent: NONE,
        letter: sector.root,
        depth: 0,
        near: LEFT_INITIAL,
        far: RIGHT_INITIAL,
        opposite: NONE,
        label_near: sector.left,
        label_far: sector.right,
        step: None,
        near_is_low: true,
        beyond: NONE,
    }];
    let mut levels = vec![(0usize, 1usize)];
    for d in 0..depth {
        let (start, end) = levels[d as usize];
        let cstart = edges.len();
        edges.reserve(2 * (end - start));
        regions.reserve(end - start);
        for i in start..end {
            let e = edges[i].clone();
            let x2 = regions.len() as u32;
            regions.push(Region { depth: d + 1, edge: i as u32, initial: None });
            edges[i].beyond = x2;
            let (n_near, n_far) = if e.parent == NONE {
                match grammar.root {
                    RootConvention::ThirdLetter => (sector.right, sector.left),
                    RootConvention::SameLetter => (sector.left, sector.right),
                }
            } else {
                child_edge_labels(grammar.kind, e.letter, e.label_near).expect("grammar letters stay distinct")
            };
            let near_step = if e.near_is_low { Step::L } else { Step::R };
            let far_step = if e.near_is_low { Step::R } else { Step::L };
            edges.push(Edge {
                parent: i as u32,
                letter: n_near,
                depth: d + 1,
                near: x2,
                far: e.near,
                opposite: e.far,
                label_near: n_far,
                label_far: e.letter,
                step: Some(near_step),
                near_is_low: !e.near_is_low,
                beyond: NONE,
            });
            edges.push(Edge {
                parent: i as u32,
                letter: n_far,
                depth: d + 1,
                near: x2,
                far: e.far,
                opposite: e.near,
                label_near: n_near,
                label_far: e.letter,
                step: Some(far_step),
                near_is_low: e.near_is_low,
                beyond: NONE,
            });
        }
        levels.push((cstart, edges.len()));
    }
    TreeTopology { grammar, sector, depth, edges, regions, levels }
}

/// Several sectors glued at a common root vertex: the right initial region of
/// each sector is the left initial region of the next, cyclically.
#[derive(Clone, Debug)]
pub struct GluedTopology {
    pub sectors: Vec<TreeTopology>,
}

impl GluedTopology {
    pub fn initial_region_count(&self) -> usize {
        self.sectors.len()
    }
}

pub fn check_cyclic(sectors: &[SectorSpec]) -> Result<(), TreeError> {
    let n = sectors.len();
    if n == 0 {
        return Err(TreeError::NotCyclic("no sectors".into()));
    }
    for k in 0..n {
        let next = &sectors[(k + 1) % n];
        if sectors[k].right != next.left {
            return Err(TreeError::NotCyclic(format!("sector {} ends at {} but sector {} starts at {}", k, sectors[k].right, (k + 1) % n, next.left)));
        }
    }
    Ok(())
}

/// n-rooted tree from cyclically glued sectors.
pub fn build_topology(grammar: Grammar, sectors: &[SectorSpec], depth: u32) -> Result<GluedTopology, TreeError> {
    check_cyclic(sectors)?;
    Ok(GluedTopology { sectors: sectors.iter().map(|s| build_sector(grammar, *s, depth)).collect() })
}

/// Initial-region letters a, b, a, c, b, c around the root vertex: every
/// ordered pair of distinct letters occurs once.
pub fn torus_sectors() -> Vec<SectorSpec> {
    let seq = [Letter::A, Letter::B, Letter::A, Letter::C, Letter::B, Letter::C];
    (0..6).map(|k| SectorSpec::between(seq[k], seq[(k + 1) % 6]).unwrap()).collect()
}

/// The boundary component not met by arc `root` is cut by the other two arcs
/// into two segments; one sector per segment.
pub fn pants_boundary_sectors(root: Letter) -> Vec<SectorSpec> {
    let others: Vec<Letter> = Letter::ALL.iter().copied().filter(|l| *l != root).collect();
    vec![
        SectorSpec::new(root, others[0], others[1]).unwrap(),
        SectorSpec::new(root, others[1], others[0]).unwrap(),
    ]
}
