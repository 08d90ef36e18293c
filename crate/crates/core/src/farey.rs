//! Reduced fractions in [0,1], Farey pairs and the Stern–Brocot path bijection.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FareyError {
    #[error("fraction {0}/{1} is not reduced")]
    NotReduced(BigUint, BigUint),
    #[error("fraction {0}/{1} lies outside [0,1] or has zero denominator")]
    OutOfRange(BigUint, BigUint),
    #[error("({0}, {1}) is not a Farey pair: determinant is not 1")]
    NotFarey(Fraction, Fraction),
    #[error("cannot parse fraction from {0:?}")]
    Parse(String),
}

/// A reduced fraction p/q with 0 ≤ p/q ≤ 1.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Fraction {
    p: BigUint,
    q: BigUint,
}

impl Fraction {
    pub fn new(p: impl Into<BigUint>, q: impl Into<BigUint>) -> Result<Self, FareyError> {
        let (p, q) = (p.into(), q.into());
        if q.is_zero() || p > q {
            return Err(FareyError::OutOfRange(p, q));
        }
        if !p.gcd(&q).is_one() {
            return Err(FareyError::NotReduced(p, q));
        }
        Ok(Fraction { p, q })
    }

    pub fn zero() -> Self {
        Fraction { p: BigUint::zero(), q: BigUint::one() }
    }

    pub fn one() -> Self {
        Fraction { p: BigUint::one(), q: BigUint::one() }
    }

    pub fn numer(&self) -> &BigUint {
        &self.p
    }

    pub fn denom(&self) -> &BigUint {
        &self.q
    }

    pub fn to_f64(&self) -> f64 {
        use num_traits::ToPrimitive;
        let r = num_rational::BigRational::new(BigInt::from(self.p.clone()), BigInt::from(self.q.clone()));
        r.to_f64().unwrap_or(f64::NAN)
    }
}

impl Ord for Fraction {
    fn cmp(&self, other: &Self) -> Ordering {
        (&self.p * &other.q).cmp(&(&other.p * &self.q))
    }
}

impl PartialOrd for Fraction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

impl fmt::Debug for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

impl FromStr for Fraction {
    type Err = FareyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s.split_once('/').ok_or_else(|| FareyError::Parse(s.to_string()))?;
        let p: BigUint = a.trim().parse().map_err(|_| FareyError::Parse(s.to_string()))?;
        let q: BigUint = b.trim().parse().map_err(|_| FareyError::Parse(s.to_string()))?;
        Fraction::new(p, q)
    }
}

impl Serialize for Fraction {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Fraction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Two fractions p/q < m/n with qm − pn = 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FareyPair {
    left: Fraction,
    right: Fraction,
}

impl FareyPair {
    pub fn new(left: Fraction, right: Fraction) -> Result<Self, FareyError> {
        let lhs = BigInt::from(&left.q * &right.p);
        let rhs = BigInt::from(&left.p * &right.q);
        if lhs - rhs != BigInt::one() {
            return Err(FareyError::NotFarey(left, right));
        }
        Ok(FareyPair { left, right })
    }

    /// The pair (0/1, 1/1) at the root of the tree.
    pub fn unit() -> Self {
        FareyPair { left: Fraction::zero(), right: Fraction::one() }
    }

    pub fn left(&self) -> &Fraction {
        &self.left
    }

    pub fn right(&self) -> &Fraction {
        &self.right
    }

    /// Mediant (p+m)/(q+n). Always reduced for a Farey pair.
    pub fn mediant(&self) -> Fraction {
        Fraction {
            p: &self.left.p + &self.right.p,
            q: &self.left.q + &self.right.q,
        }
    }

    /// Splits at the mediant into the two child pairs.
    pub fn split(&self) -> (FareyPair, FareyPair) {
        let m = self.mediant();
        (
            FareyPair { left: self.left.clone(), right: m.clone() },
            FareyPair { left: m, right: self.right.clone() },
        )
    }

    pub fn child(&self, step: Step) -> FareyPair {
        let (l, r) = self.split();
        match step {
            Step::L => l,
            Step::R => r,
        }
    }
}

/// Farey sum of the two endpoints of a checked pair.
pub fn farey_sum(left: &Fraction, right: &Fraction) -> Result<Fraction, FareyError> {
    Ok(FareyPair::new(left.clone(), right.clone())?.mediant())
}

/// One step down the tree; `L` refines toward the left endpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Step {
    L,
    R,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Step::L => "L",
            Step::R => "R",
        })
    }
}

pub fn path_to_string(path: &[Step]) -> String {
    path.iter().map(|s| s.to_string()).collect()
}

pub fn fraction_of_path(path: &[Step]) -> Fraction {
    let mut pair = FareyPair::unit();
    for &s in path {
        pair = pair.child(s);
    }
    pair.mediant()
}

/// Stern–Brocot descent. `None` for the endpoints 0/1 and 1/1, which are not
/// mediants of any pair below the root.
pub fn path_of_fraction(target: &Fraction) -> Option<Vec<Step>> {
    if target.p.is_zero() || target.p == target.q {
        return None;
    }
    let mut pair = FareyPair::unit();
    let mut path = Vec::new();
    loop {
        let m = pair.mediant();
        match target.cmp(&m) {
            Ordering::Equal => return Some(path),
            Ordering::Less => {
                path.push(Step::L);
                pair = pair.child(Step::L);
            }
            Ordering::Greater => {
                path.push(Step::R);
                pair = pair.child(Step::R);
            }
        }
    }
}

/// Mediants of all 2^depth pairs at the given depth, left to right.
pub fn mediants_at_depth(depth: usize) -> Vec<Fraction> {
    let mut level = vec![FareyPair::unit()];
    for _ in 0..depth {
        level = level
            .iter()
            .flat_map(|p| {
                let (a, b) = p.split();
                [a, b]
            })
            .collect();
    }
    level.iter().map(FareyPair::mediant).collect()
}
