//! Closed forms for the period coefficients `B_i`, `C_i`, `D_i` and the
//! descendent vertex multiplicities.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::lattice::{DegreeVec, Rational};

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

fn recip_factorial(n: u32) -> Rational {
    Rational::new(BigInt::one(), factorial(n))
}

/// `sum_{k=1}^n 1/k`.
pub fn harmonic(n: u32) -> Rational {
    (1..=n).fold(Rational::zero(), |acc, k| acc + Rational::new(1.into(), k.into()))
}

/// `sum_{k=1}^n 1/k^2`.
pub fn harmonic2(n: u32) -> Rational {
    (1..=n).fold(Rational::zero(), |acc, k| {
        acc + Rational::new(1.into(), BigInt::from(k) * BigInt::from(k))
    })
}

fn sign(e: u32) -> Rational {
    if e.is_multiple_of(2) {
        Rational::one()
    } else {
        -Rational::one()
    }
}

/// Coefficient of `alpha^i q^{3d}` in the unshifted period.
pub fn b_coeff(i: usize, d: u32) -> Rational {
    let base = recip_factorial(d).pow(3);
    let h = harmonic(d);
    match i {
        0 => base,
        1 => -Rational::from_integer(3.into()) * h * base,
        2 => {
            let h2 = harmonic2(d);
            Rational::new(9.into(), 2.into()) * (&h * &h + h2 / BigInt::from(3)) * base
        }
        _ => panic!("period index {i} out of range 0..=2"),
    }
}

/// Product and reciprocal sums over `k` in `d-n+1..=d`, skipping `k = 0`.
struct Range {
    prod: Rational,
    sum: Rational,
    sum2: Rational,
    hits_zero: bool,
}

fn range(d: u32, n: u32) -> Range {
    let (lo, hi) = (d as i64 - n as i64 + 1, d as i64);
    let mut r = Range {
        prod: Rational::one(),
        sum: Rational::zero(),
        sum2: Rational::zero(),
        hits_zero: false,
    };
    for k in lo..=hi {
        if k == 0 {
            r.hits_zero = true;
            continue;
        }
        let kr = Rational::from_integer(k.into());
        r.sum += kr.recip();
        r.sum2 += (&kr * &kr).recip();
        r.prod *= kr;
    }
    r
}

/// Coefficient of `alpha^i` in `prod_l prod_{k=1}^{n_l} (alpha + d - k + 1)`.
pub fn c_coeff(i: usize, d: u32, m: DegreeVec) -> Rational {
    assert!(i <= 2, "period index {i} out of range 0..=2");
    let ranges: Vec<Range> = m.0.iter().map(|&n| range(d, n)).collect();
    let over = ranges.iter().filter(|r| r.hits_zero).count();
    let prod = ranges.iter().fold(Rational::one(), |acc, r| acc * &r.prod);
    let sum = ranges.iter().fold(Rational::zero(), |acc, r| acc + &r.sum);
    let sum2 = ranges.iter().fold(Rational::zero(), |acc, r| acc + &r.sum2);
    match (over, i) {
        (0, 0) => prod,
        (0, 1) => prod * sum,
        (0, 2) => prod * (&sum * &sum - sum2) / BigInt::from(2),
        (1, 0) => Rational::zero(),
        (1, 1) => prod,
        (1, 2) => prod * sum,
        (2, 2) => prod,
        _ => Rational::zero(),
    }
}

/// Coefficient `D_i(d, m)` of the shifted period integral.
pub fn d_coeff(i: usize, d: u32, m: DegreeVec) -> Rational {
    assert!(i <= 2, "period index {i} out of range 0..=2");
    let n = m.0;
    let over: Vec<usize> = (0..3).filter(|&j| n[j] > d).collect();
    let under: Vec<usize> = (0..3).filter(|&j| n[j] <= d).collect();
    let inv = |j: usize| recip_factorial(d - n[j]);
    let h = |j: usize| harmonic(d - n[j]);
    match over.len() {
        0 => {
            let p = inv(0) * inv(1) * inv(2);
            let t = h(0) + h(1) + h(2);
            match i {
                0 => p,
                1 => -p * t,
                _ => {
                    let t2 = harmonic2(d - n[0]) + harmonic2(d - n[1]) + harmonic2(d - n[2]);
                    p * (&t * &t + t2) / BigInt::from(2)
                }
            }
        }
        1 => {
            let e = n[over[0]] - d;
            let base = Rational::from_integer(factorial(e - 1)) * inv(under[0]) * inv(under[1]);
            match i {
                0 => Rational::zero(),
                1 => sign(e - 1) * base,
                _ => sign(e) * base * (h(under[0]) + h(under[1]) + harmonic(e - 1)),
            }
        }
        2 => match i {
            2 => {
                let (a, b) = (n[over[0]], n[over[1]]);
                sign(a + b)
                    * Rational::from_integer(factorial(a - d - 1) * factorial(b - d - 1))
                    * inv(under[0])
            }
            _ => Rational::zero(),
        },
        _ => Rational::zero(),
    }
}

/// Descendent multiplicity `Mult^i` of a vertex meeting `counts[j]`
/// unbounded edges in direction `m_j`.
pub fn mult_psi(i: usize, counts: [u32; 3]) -> Rational {
    let p = counts
        .iter()
        .fold(Rational::one(), |acc, &c| acc * recip_factorial(c));
    let t: Rational = counts.iter().map(|&c| harmonic(c)).sum();
    match i {
        0 => p,
        1 => -p * t,
        2 => {
            let t2: Rational = counts.iter().map(|&c| harmonic2(c)).sum();
            p * (&t * &t + t2) / BigInt::from(2)
        }
        _ => panic!("psi power {i} out of range 0..=2"),
    }
}
