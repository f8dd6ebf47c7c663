//! The coefficient ring: finite sums of `c q^a z^m u_I` with rational `c`,
//! Laurent powers of `q`, exponents `m` in the degree lattice and squarefree
//! monomials `u_I` in the nilpotent variables `u_1, ..., u_k` (`u_i^2 = 0`).

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{format_rational, parse_rational, DegreeVec, Rational};

/// Largest supported marked-point index.
pub const MAX_POINTS: usize = 63;

/// A set of marked-point indices, `{1..k}`, stored as a bitmask.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct USet(u64);

impl USet {
    pub const EMPTY: USet = USet(0);

    pub fn singleton(i: usize) -> USet {
        assert!((1..=MAX_POINTS).contains(&i), "marked point index {i} out of range");
        USet(1 << i)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(it: I) -> USet {
        it.into_iter().fold(USet::EMPTY, |acc, i| acc.union(USet::singleton(i)))
    }

    /// `{1, ..., k}`.
    pub fn full(k: usize) -> USet {
        USet::from_indices(1..=k)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn from_bits(bits: u64) -> USet {
        debug_assert_eq!(bits & 1, 0, "index 0 is not a marked point");
        USet(bits)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, i: usize) -> bool {
        i <= MAX_POINTS && self.0 & (1 << i) != 0
    }

    pub fn is_disjoint(self, other: USet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_subset(self, other: USet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: USet) -> USet {
        USet(self.0 | other.0)
    }

    pub fn minus(self, other: USet) -> USet {
        USet(self.0 & !other.0)
    }

    pub fn without(self, i: usize) -> USet {
        self.minus(USet::singleton(i))
    }

    /// Member indices in increasing order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        (1..=MAX_POINTS).filter(move |&i| self.contains(i))
    }

    /// All subsets (including empty and `self`).
    pub fn subsets(self) -> impl Iterator<Item = USet> {
        let full = self.0;
        let mut cur = Some(full);
        std::iter::from_fn(move || {
            let s = cur?;
            cur = if s == 0 { None } else { Some((s - 1) & full) };
            Some(USet(s))
        })
    }

    /// Subsets of exactly `size` elements, in increasing lexicographic order.
    pub fn subsets_of_size(self, size: usize) -> Vec<USet> {
        let mut out: Vec<USet> = self.subsets().filter(|s| s.len() == size).collect();
        out.sort();
        out
    }
}

impl Ord for USet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.iter().cmp(other.iter())
    }
}

impl PartialOrd for USet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for USet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (n, i) in self.iter().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

/// Key of a monomial `q^qpow z^degree u_uset`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    pub qpow: i64,
    pub degree: DegreeVec,
    pub uset: USet,
}

impl Monomial {
    pub fn new(qpow: i64, degree: DegreeVec, uset: USet) -> Self {
        Monomial { qpow, degree, uset }
    }

    pub const ONE: Monomial = Monomial {
        qpow: 0,
        degree: DegreeVec::ZERO,
        uset: USet::EMPTY,
    };

    /// Product, or `None` when the `u`-parts overlap.
    pub fn mul(&self, other: &Monomial) -> Option<Monomial> {
        if !self.uset.is_disjoint(other.uset) {
            return None;
        }
        Some(Monomial {
            qpow: self.qpow + other.qpow,
            degree: self.degree + other.degree,
            uset: self.uset.union(other.uset),
        })
    }
}

/// A single nonzero term `coeff * q^qpow z^degree u_uset`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub coeff: Rational,
    pub qpow: i64,
    pub degree: DegreeVec,
    pub uset: USet,
}

impl Term {
    pub fn new(coeff: Rational, qpow: i64, degree: DegreeVec, uset: USet) -> Self {
        Term { coeff, qpow, degree, uset }
    }

    pub fn monomial(&self) -> Monomial {
        Monomial::new(self.qpow, self.degree, self.uset)
    }
}

/// A finite exact series, canonical: merged keys and no zero coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Series {
    terms: BTreeMap<Monomial, Rational>,
}

impl Series {
    pub fn zero() -> Series {
        Series::default()
    }

    pub fn one() -> Series {
        Series::monomial(Rational::one(), Monomial::ONE)
    }

    pub fn monomial(coeff: Rational, mono: Monomial) -> Series {
        let mut s = Series::zero();
        s.add_term(mono, coeff);
        s
    }

    /// `z^{t_j}`.
    pub fn x(j: usize) -> Series {
        Series::monomial(
            Rational::one(),
            Monomial::new(0, DegreeVec::unit(j), USet::EMPTY),
        )
    }

    pub fn from_terms<I: IntoIterator<Item = Term>>(terms: I) -> Series {
        let mut s = Series::zero();
        for t in terms {
            s.add_term(t.monomial(), t.coeff);
        }
        s
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, mono: Monomial, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(mono) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn coeff(&self, mono: &Monomial) -> Rational {
        self.terms.get(mono).cloned().unwrap_or_else(Rational::zero)
    }

    /// Terms in canonical order `(qpow, degree, uset)`.
    pub fn iter(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn terms(&self) -> Vec<Term> {
        self.terms
            .iter()
            .map(|(m, c)| Term::new(c.clone(), m.qpow, m.degree, m.uset))
            .collect()
    }

    pub fn scale(&self, c: &Rational) -> Series {
        if c.is_zero() {
            return Series::zero();
        }
        Series {
            terms: self.terms.iter().map(|(m, v)| (*m, v * c)).collect(),
        }
    }

    /// Multiply every term by the monomial `q^qpow`.
    pub fn shift_q(&self, qpow: i64) -> Series {
        Series {
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (Monomial::new(m.qpow + qpow, m.degree, m.uset), v.clone()))
                .collect(),
        }
    }

    /// Keep only the terms accepted by `keep`.
    pub fn filter<F: FnMut(&Monomial) -> bool>(&self, mut keep: F) -> Series {
        Series {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| keep(m))
                .map(|(m, v)| (*m, v.clone()))
                .collect(),
        }
    }

    /// Truncate to terms whose `u`-monomial has at most `order` factors.
    pub fn truncate_u(&self, order: usize) -> Series {
        self.filter(|m| m.uset.len() <= order)
    }

    /// `sum_j q^j s^j / j!`, finite because every term is nilpotent.
    pub fn exp_q(&self) -> Result<Series> {
        if self.terms.keys().any(|m| m.uset.is_empty()) {
            return Err(Error::NonNilpotentInput);
        }
        // exp(sum t_i) = prod (1 + q t_i) because t_i^2 = 0 and the ring is commutative.
        let mut acc: HashMap<Monomial, Rational> = HashMap::new();
        acc.insert(Monomial::ONE, Rational::one());
        for (m, c) in &self.terms {
            let qm = Monomial::new(m.qpow + 1, m.degree, m.uset);
            let mut additions: Vec<(Monomial, Rational)> = Vec::new();
            for (am, ac) in &acc {
                if let Some(p) = am.mul(&qm) {
                    additions.push((p, ac * c));
                }
            }
            for (p, v) in additions {
                *acc.entry(p).or_insert_with(Rational::zero) += v;
            }
        }
        Ok(Series::from_map(acc))
    }

    fn from_map(map: HashMap<Monomial, Rational>) -> Series {
        Series {
            terms: map.into_iter().filter(|(_, v)| !v.is_zero()).collect(),
        }
    }
}

impl Add for &Series {
    type Output = Series;
    fn add(self, other: &Series) -> Series {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c.clone());
        }
        out
    }
}

impl Add for Series {
    type Output = Series;
    fn add(self, other: Series) -> Series {
        &self + &other
    }
}

impl Neg for &Series {
    type Output = Series;
    fn neg(self) -> Series {
        Series {
            terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect(),
        }
    }
}

impl Sub for &Series {
    type Output = Series;
    fn sub(self, other: &Series) -> Series {
        self + &(-other)
    }
}

impl Sub for Series {
    type Output = Series;
    fn sub(self, other: Series) -> Series {
        &self - &other
    }
}

impl Mul for &Series {
    type Output = Series;
    fn mul(self, other: &Series) -> Series {
        let mut acc: HashMap<Monomial, Rational> = HashMap::new();
        for (am, ac) in &self.terms {
            for (bm, bc) in &other.terms {
                if let Some(p) = am.mul(bm) {
                    *acc.entry(p).or_insert_with(Rational::zero) += ac * bc;
                }
            }
        }
        Series::from_map(acc)
    }
}

impl Mul for Series {
    type Output = Series;
    fn mul(self, other: Series) -> Series {
        &self * &other
    }
}

/// Human-readable form, e.g. `x0 + x1 + x2 + u1*x1*x2 - 1/2*q*u1*u2*x0^2`.
/// Terms are listed by number of marked points, then by degree.
impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut terms: Vec<(&Monomial, &Rational)> = self.terms.iter().collect();
        terms.sort_by(|(a, _), (b, _)| {
            (a.uset.len(), a.qpow)
                .cmp(&(b.uset.len(), b.qpow))
                .then(b.degree.cmp(&a.degree))
                .then(a.uset.cmp(&b.uset))
        });
        for (n, (m, c)) in terms.into_iter().enumerate() {
            let neg = c.is_negative();
            match (n, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mut factors: Vec<String> = Vec::new();
            let abs = c.abs();
            let trivial = *m == Monomial::ONE;
            if !abs.is_one() || trivial {
                factors.push(if abs.is_integer() {
                    abs.numer().to_string()
                } else {
                    format!("{}/{}", abs.numer(), abs.denom())
                });
            }
            factors.extend(m.uset.iter().map(|i| format!("u{i}")));
            match m.qpow {
                0 => {}
                1 => factors.push("q".into()),
                p => factors.push(format!("q^{p}")),
            }
            for (j, e) in m.degree.0.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(format!("x{j}")),
                    e => factors.push(format!("x{j}^{e}")),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

/// Wire form of one term: `{"q": int, "m": [n0,n1,n2], "u": [indices], "c": "p/q"}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermRecord {
    pub q: i64,
    pub m: [u32; 3],
    pub u: Vec<usize>,
    pub c: String,
}

impl Serialize for Series {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let records: Vec<TermRecord> = self
            .terms
            .iter()
            .map(|(m, c)| TermRecord {
                q: m.qpow,
                m: m.degree.0,
                u: m.uset.iter().collect(),
                c: format_rational(c),
            })
            .collect();
        records.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Series {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let records = Vec::<TermRecord>::deserialize(d)?;
        let mut s = Series::zero();
        for r in records {
            if r.u.iter().any(|&i| i == 0 || i > MAX_POINTS) {
                return Err(serde::de::Error::custom("marked point index out of range"));
            }
            let c = parse_rational(&r.c).map_err(serde::de::Error::custom)?;
            s.add_term(
                Monomial::new(r.q, DegreeVec(r.m), USet::from_indices(r.u)),
                c,
            );
        }
        Ok(s)
    }
}
