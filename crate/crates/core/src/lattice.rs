//! Rank-two lattice geometry for the fan of the projective plane.
//!
//! `M = Z^2` carries the orientation `e1 ^ e2 = 1`. Dual vectors in `N` are
//! represented by [`LatticeVec`] as well and act through [`LatticeVec::pair`].
//! The degree lattice `T = Z^3` has generators `t0, t1, t2` mapping to the fan
//! rays `m0 = (-1,-1)`, `m1 = (1,0)`, `m2 = (0,1)`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational scalar.
pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Format as a reduced `p/q` string with `q > 0`.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parse `p/q` or a bare integer `p`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(p, q))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Serde adapter writing rationals as `"p/q"` strings.
pub mod rational_str {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// An element of `M = Z^2` (or of the dual lattice `N`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticeVec {
    pub x: i64,
    pub y: i64,
}

impl LatticeVec {
    pub const ZERO: LatticeVec = LatticeVec { x: 0, y: 0 };

    pub const fn new(x: i64, y: i64) -> Self {
        LatticeVec { x, y }
    }

    pub fn is_zero(&self) -> bool {
        self.x == 0 && self.y == 0
    }

    /// Signed determinant `u.x * v.y - u.y * v.x`.
    pub fn wedge(self, other: LatticeVec) -> i64 {
        wedge(self, other)
    }

    /// Duality pairing `<n, m>`, with `self` playing the role of `n`.
    pub fn pair(self, m: LatticeVec) -> i64 {
        self.x * m.x + self.y * m.y
    }

    pub fn index(self) -> Result<i64> {
        index(self)
    }

    pub fn primitive(self) -> Result<LatticeVec> {
        primitive(self)
    }
}

impl Add for LatticeVec {
    type Output = LatticeVec;
    fn add(self, o: LatticeVec) -> LatticeVec {
        LatticeVec::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for LatticeVec {
    type Output = LatticeVec;
    fn sub(self, o: LatticeVec) -> LatticeVec {
        LatticeVec::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for LatticeVec {
    type Output = LatticeVec;
    fn neg(self) -> LatticeVec {
        LatticeVec::new(-self.x, -self.y)
    }
}

impl Mul<LatticeVec> for i64 {
    type Output = LatticeVec;
    fn mul(self, v: LatticeVec) -> LatticeVec {
        LatticeVec::new(self * v.x, self * v.y)
    }
}

impl fmt::Display for LatticeVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Primitive generators of the three rays of the fan.
pub const FAN_RAYS: [LatticeVec; 3] = [
    LatticeVec::new(-1, -1),
    LatticeVec::new(1, 0),
    LatticeVec::new(0, 1),
];

pub fn wedge(u: LatticeVec, v: LatticeVec) -> i64 {
    u.x * v.y - u.y * v.x
}

/// Largest `w > 0` with `v = w * v'` for an integral `v'`.
pub fn index(v: LatticeVec) -> Result<i64> {
    if v.is_zero() {
        return Err(Error::ZeroVector);
    }
    Ok(v.x.abs().gcd(&v.y.abs()))
}

pub fn primitive(v: LatticeVec) -> Result<LatticeVec> {
    let w = index(v)?;
    Ok(LatticeVec::new(v.x / w, v.y / w))
}

/// A point of `M_R` with exact rational coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RatPoint {
    #[serde(with = "rational_str")]
    pub x: Rational,
    #[serde(with = "rational_str")]
    pub y: Rational,
}

impl RatPoint {
    pub fn new(x: Rational, y: Rational) -> Self {
        RatPoint { x, y }
    }

    pub fn from_ints(x: i64, y: i64) -> Self {
        RatPoint::new(rat_int(x), rat_int(y))
    }

    pub fn from_fracs(x: (i64, i64), y: (i64, i64)) -> Self {
        RatPoint::new(rat(x.0, x.1), rat(y.0, y.1))
    }

    /// `self + t * v`.
    pub fn offset(&self, t: &Rational, v: LatticeVec) -> RatPoint {
        RatPoint::new(
            &self.x + t * BigInt::from(v.x),
            &self.y + t * BigInt::from(v.y),
        )
    }

    pub fn sub(&self, other: &RatPoint) -> (Rational, Rational) {
        (&self.x - &other.x, &self.y - &other.y)
    }

    /// Parse `"x,y"` where each coordinate is `p/q` or an integer.
    pub fn parse(s: &str) -> Result<RatPoint> {
        let (a, b) = s
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("expected \"x,y\", got {s:?}")))?;
        Ok(RatPoint::new(parse_rational(a)?, parse_rational(b)?))
    }
}

impl fmt::Display for RatPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", format_rational(&self.x), format_rational(&self.y))
    }
}

/// Signed wedge of a rational vector with a lattice vector.
pub fn wedge_rat(a: &(Rational, Rational), v: LatticeVec) -> Rational {
    &a.0 * BigInt::from(v.y) - &a.1 * BigInt::from(v.x)
}

/// Sign of `<n, (x,y)>`-type expressions, as `-1`, `0` or `1`.
pub fn sign(r: &Rational) -> i32 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

/// Exponent vector `n0 t0 + n1 t1 + n2 t2` in the degree lattice.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DegreeVec(pub [u32; 3]);

impl DegreeVec {
    pub const ZERO: DegreeVec = DegreeVec([0, 0, 0]);

    pub const fn new(n0: u32, n1: u32, n2: u32) -> Self {
        DegreeVec([n0, n1, n2])
    }

    /// The generator `t_j`.
    pub fn unit(j: usize) -> Self {
        let mut n = [0; 3];
        n[j] = 1;
        DegreeVec(n)
    }

    /// `Delta_d = d (t0 + t1 + t2)`.
    pub const fn delta(d: u32) -> Self {
        DegreeVec([d, d, d])
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn r_map(&self) -> LatticeVec {
        r_map(*self)
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &DegreeVec) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a <= b)
    }

    pub fn checked_sub(&self, other: &DegreeVec) -> Option<DegreeVec> {
        Some(DegreeVec([
            self.0[0].checked_sub(other.0[0])?,
            self.0[1].checked_sub(other.0[1])?,
            self.0[2].checked_sub(other.0[2])?,
        ]))
    }
}

impl Add for DegreeVec {
    type Output = DegreeVec;
    fn add(self, o: DegreeVec) -> DegreeVec {
        DegreeVec([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl fmt::Display for DegreeVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}, {}]", self.0[0], self.0[1], self.0[2])
    }
}

impl Serialize for DegreeVec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DegreeVec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(DegreeVec(<[u32; 3]>::deserialize(d)?))
    }
}

/// `r(n0 t0 + n1 t1 + n2 t2) = n0 m0 + n1 m1 + n2 m2`.
pub fn r_map(m: DegreeVec) -> LatticeVec {
    let [n0, n1, n2] = m.0.map(i64::from);
    LatticeVec::new(n1 - n0, n2 - n0)
}
