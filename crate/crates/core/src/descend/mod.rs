//! Descendent invariants from the potential: the expansion of
//! `exp(q(W_k - W_0))`, its pairing with the period coefficients, and the
//! extraction of the three families of invariants.

mod jfun;
mod periods;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::binomial;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::broken::Potential;
use crate::coeff::{Monomial, Series, USet};
use crate::error::{Error, Result};
use crate::lattice::{format_rational, parse_rational, DegreeVec, RatPoint, Rational};

pub use jfun::{j_function, JColumn, JEntry, JReport};
pub use periods::{b_coeff, c_coeff, d_coeff, harmonic, harmonic2, mult_psi};

/// One term `coeff * u_uset * q^nu * z^degree` of `exp(q(W_k - W_0))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkTerm {
    pub coeff: Rational,
    pub uset: USet,
    pub nu: u32,
    pub degree: DegreeVec,
}

pub fn sk_expansion(w: &Potential) -> Result<Vec<SkTerm>> {
    let e = w.corrections().exp_q()?;
    e.iter()
        .map(|(m, c)| {
            let nu = u32::try_from(m.qpow)
                .map_err(|_| Error::NegativePsiPower(format!("q^{} in exp expansion", m.qpow)))?;
            Ok(SkTerm {
                coeff: c.clone(),
                uset: m.uset,
                nu,
                degree: m.degree,
            })
        })
        .collect()
}

fn l_sum<F: Fn(&SkTerm) -> bool>(sk: &[SkTerm], d: u32, i: usize, keep: F) -> Series {
    let mut out = Series::zero();
    for t in sk.iter().filter(|t| keep(t)) {
        let dc = d_coeff(i, d, t.degree);
        if dc.is_zero() {
            continue;
        }
        let qpow = 3 * d as i64 + t.nu as i64 - t.degree.total() as i64;
        out.add_term(Monomial::new(qpow, DegreeVec::ZERO, t.uset), &t.coeff * dc);
    }
    out
}

/// `L^d_i = sum c q^{3d + nu - |m|} D_i(d, m)`.
#[allow(non_snake_case)]
pub fn L_d_i(sk: &[SkTerm], d: u32, i: usize) -> Series {
    l_sum(sk, d, i, |_| true)
}

/// Cones of the fan of the projective plane, labelled by which entries of a
/// degree exceed `d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Region {
    Zero,
    Rho0,
    Rho1,
    Rho2,
    Sigma01,
    Sigma12,
    Sigma20,
    Null,
}

impl Region {
    pub const ALL: [Region; 8] = [
        Region::Zero,
        Region::Rho0,
        Region::Rho1,
        Region::Rho2,
        Region::Sigma01,
        Region::Sigma12,
        Region::Sigma20,
        Region::Null,
    ];
}

pub fn region_of(m: DegreeVec, d: u32) -> Region {
    let over = [m.0[0] > d, m.0[1] > d, m.0[2] > d];
    match over {
        [false, false, false] => Region::Zero,
        [true, false, false] => Region::Rho0,
        [false, true, false] => Region::Rho1,
        [false, false, true] => Region::Rho2,
        [true, true, false] => Region::Sigma01,
        [false, true, true] => Region::Sigma12,
        [true, false, true] => Region::Sigma20,
        [true, true, true] => Region::Null,
    }
}

/// `L^d_i` restricted to degrees in one region.
#[allow(non_snake_case)]
pub fn L_d_i_sigma(sk: &[SkTerm], d: u32, i: usize, region: Region) -> Series {
    l_sum(sk, d, i, |t| region_of(t.degree, d) == region)
}

/// Insertion class of an invariant; `index()` is the `i` of `L^d_i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    T2,
    T1,
    T0,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::T2, Family::T1, Family::T0];

    pub fn index(self) -> usize {
        match self {
            Family::T2 => 0,
            Family::T1 => 1,
            Family::T0 => 2,
        }
    }

    pub fn from_index(i: usize) -> Family {
        Family::ALL[i]
    }

    /// Number of point conditions `3d + i - 2 - nu`, if nonnegative.
    pub fn points(self, d: u32, nu: u32) -> Option<usize> {
        let n = 3 * d as i64 + self.index() as i64 - 2 - nu as i64;
        usize::try_from(n).ok()
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::T2 => "T2",
            Family::T1 => "T1",
            Family::T0 => "T0",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Family> {
        match s {
            "T2" => Ok(Family::T2),
            "T1" => Ok(Family::T1),
            "T0" => Ok(Family::T0),
            _ => Err(Error::Parse(format!("unknown family {s:?}"))),
        }
    }
}

/// Where the points of a run came from.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableMeta {
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attempt: Option<u32>,
    pub points: Vec<RatPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<RatPoint>,
}

/// `<T2^{points}, psi^nu T_family>_d` for every computed `(family, d, nu)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DescendentTable {
    pub entries: BTreeMap<(Family, u32, u32), Rational>,
    pub meta: TableMeta,
}

impl DescendentTable {
    pub fn get(&self, family: Family, d: u32, nu: u32) -> Option<&Rational> {
        self.entries.get(&(family, d, nu))
    }

    pub fn d_max(&self) -> u32 {
        self.entries.keys().map(|&(_, d, _)| d).max().unwrap_or(0)
    }

    /// Entries present in both tables that differ.
    pub fn disagreements(&self, other: &DescendentTable) -> Vec<(Family, u32, u32)> {
        self.entries
            .iter()
            .filter(|(k, v)| other.entries.get(k).is_some_and(|w| w != *v))
            .map(|(k, _)| *k)
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("family,d,nu,points,value\n");
        for (&(f, d, nu), v) in &self.entries {
            let pts = f.points(d, nu).unwrap_or(0);
            out.push_str(&format!("{f},{d},{nu},{pts},{}\n", format_rational(v)));
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct EntryRecord {
    family: String,
    d: u32,
    nu: u32,
    points: usize,
    value: String,
}

#[derive(Serialize, Deserialize)]
struct TableRecord {
    meta: TableMeta,
    entries: Vec<EntryRecord>,
}

impl Serialize for DescendentTable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TableRecord {
            meta: self.meta.clone(),
            entries: self
                .entries
                .iter()
                .map(|(&(f, d, nu), v)| EntryRecord {
                    family: f.to_string(),
                    d,
                    nu,
                    points: f.points(d, nu).unwrap_or(0),
                    value: format_rational(v),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DescendentTable {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let rec = TableRecord::deserialize(de)?;
        let mut entries = BTreeMap::new();
        for e in rec.entries {
            let f: Family = e.family.parse().map_err(D::Error::custom)?;
            let v = parse_rational(&e.value).map_err(D::Error::custom)?;
            entries.insert((f, e.d, e.nu), v);
        }
        Ok(DescendentTable {
            entries,
            meta: rec.meta,
        })
    }
}

/// The correction terms carried by `L^0_0` and `L^0_2` besides invariants.
fn delta_terms(d: u32, i: usize, k: usize) -> Series {
    let mut s = Series::zero();
    if d != 0 {
        return s;
    }
    match i {
        0 => s.add_term(Monomial::ONE, Rational::one()),
        2 => {
            for j in 1..=k {
                s.add_term(Monomial::new(-1, DegreeVec::ZERO, USet::singleton(j)), Rational::one());
            }
        }
        _ => {}
    }
    s
}

/// Read every `<T2^n, psi^nu T_{2-i}>_d` with `1 <= d <= d_max`, `n <= k`,
/// checking that all index sets of the right size give the same value.
pub fn extract_invariants(sk: &[SkTerm], d_max: u32, k: usize) -> Result<DescendentTable> {
    let mut table = DescendentTable::default();
    table.meta.k = k;
    let all = USet::full(k);
    for d in 0..=d_max {
        for family in Family::ALL {
            let i = family.index();
            let l = &L_d_i(sk, d, i) - &delta_terms(d, i, k);
            let min_q = 2 - i as i64;
            for (m, c) in l.iter() {
                if m.qpow < min_q && !c.is_zero() {
                    return Err(Error::NegativePsiPower(format!(
                        "L^{d}_{i} has coefficient {} at u_{} q^{}",
                        format_rational(c),
                        m.uset,
                        m.qpow
                    )));
                }
            }
            if d == 0 {
                continue;
            }
            for nu in 0..=(3 * d + i as u32).saturating_sub(2) {
                let Some(points) = family.points(d, nu) else {
                    continue;
                };
                if points > k {
                    continue;
                }
                let qpow = nu as i64 + 2 - i as i64;
                let mut value: Option<Rational> = None;
                for uset in all.subsets_of_size(points) {
                    let c = l.coeff(&Monomial::new(qpow, DegreeVec::ZERO, uset));
                    match &value {
                        None => value = Some(c),
                        Some(v) if *v != c => {
                            return Err(Error::InconsistentAcrossSubsets {
                                family: family.to_string(),
                                d,
                                nu,
                                size: points,
                            })
                        }
                        _ => {}
                    }
                }
                table
                    .entries
                    .insert((family, d, nu), value.unwrap_or_else(Rational::zero));
            }
        }
    }
    Ok(table)
}

/// Number of rational plane curves of degree `d` through `3d - 1` points.
pub fn kontsevich_oracle(d: u32) -> BigInt {
    assert!(d >= 1, "degree must be positive");
    let mut n: Vec<BigInt> = vec![BigInt::zero(), BigInt::one()];
    for e in 2..=d as i64 {
        let mut total = BigInt::zero();
        for d1 in 1..e {
            let d2 = e - d1;
            let pair = &n[d1 as usize] * &n[d2 as usize];
            let a = BigInt::from(d1 * d1 * d2 * d2) * binomial(BigInt::from(3 * e - 4), BigInt::from(3 * d1 - 2));
            let b = BigInt::from(d1 * d1 * d1 * d2) * binomial(BigInt::from(3 * e - 4), BigInt::from(3 * d1 - 1));
            total += pair * (a - b);
        }
        n.push(total);
    }
    n.swap_remove(d as usize)
}
