//! End-to-end acceptance checks. Each check prints one PASS/FAIL line; the
//! binary exits nonzero if any check fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tropdesc::broken::{potential, transport, Potential};
use tropdesc::coeff::{Monomial, Series, USet};
use tropdesc::descend::{
    b_coeff, c_coeff, d_coeff, mult_psi, sk_expansion, DescendentTable,
    Family, L_d_i,
};
use tropdesc::error::Error;
use tropdesc::lattice::{primitive, r_map, DegreeVec, LatticeVec, RatPoint, Rational, FAN_RAYS};
use tropdesc::sample::{invariants_for, sample_generic, SampleConfig};
use tropdesc::scatter::{build_diagram, check_consistency, BuildOptions};

type Check = std::result::Result<String, String>;

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn factorial(n: u32) -> BigInt {
    (1..=n).map(BigInt::from).product()
}

fn inv_factorial(n: u32) -> Rational {
    Rational::new(BigInt::one(), factorial(n))
}

fn harmonic(n: u32, power: u32) -> Rational {
    (1..=n as i64)
        .map(|k| Rational::new(1.into(), BigInt::from(k).pow(power)))
        .sum()
}

/// Rational plane curve counts from the WDVV recursion, computed in machine integers.
fn curve_count(d: u32) -> i128 {
    fn binom(n: i128, k: i128) -> i128 {
        if k < 0 || k > n {
            return 0;
        }
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }
    let mut n = vec![0i128, 1];
    for e in 2..=d as i128 {
        let mut total = 0;
        for a in 1..e {
            let b = e - a;
            total += n[a as usize]
                * n[b as usize]
                * (a * a * b * b * binom(3 * e - 4, 3 * a - 2)
                    - a * a * a * b * binom(3 * e - 4, 3 * a - 1));
        }
        n.push(total);
    }
    n[d as usize]
}

fn x(j: usize) -> Series {
    Series::x(j)
}

fn term(m: [u32; 3], u: &[usize]) -> Series {
    Series::monomial(
        Rational::one(),
        Monomial::new(0, DegreeVec(m), USet::from_indices(u.iter().copied())),
    )
}

fn table(k: usize, seed: u64, d_max: u32) -> std::result::Result<DescendentTable, String> {
    invariants_for(&SampleConfig::seeded(k, seed), d_max)
        .map(|(_, t)| t)
        .map_err(|e| format!("k = {k}, seed = {seed}: {e}"))
}

fn entry(t: &DescendentTable, f: Family, d: u32, nu: u32) -> std::result::Result<Rational, String> {
    t.get(f, d, nu)
        .cloned()
        .ok_or_else(|| format!("table has no entry for {f}, d = {d}, nu = {nu}"))
}

fn within(start: Instant, limit: Duration, what: &str) -> std::result::Result<Duration, String> {
    let took = start.elapsed();
    if took > limit {
        Err(format!("{what} took {took:.2?}, limit {limit:?}"))
    } else {
        Ok(took)
    }
}

fn pinned_potentials() -> Check {
    let start = Instant::now();
    let d1 = build_diagram(&[RatPoint::from_ints(0, 0)]).map_err(|e| e.to_string())?;
    let w1 = potential(&RatPoint::from_ints(-1, -2), &d1).map_err(|e| e.to_string())?;
    let want1 = &(&(&x(0) + &x(1)) + &x(2)) + &term([0, 1, 1], &[1]);
    if w1.y0 != Rational::one() || w1.series != want1 {
        return Err(format!("k = 1 potential is {w1}"));
    }
    let pts = [RatPoint::from_ints(0, 0), RatPoint::from_ints(1, 2)];
    let d2 = build_diagram(&pts).map_err(|e| e.to_string())?;
    let w2 = potential(&RatPoint::from_ints(-3, 4), &d2).map_err(|e| e.to_string())?;
    let want2 = &(&(&(&(&x(0) + &x(1)) + &x(2)) + &term([1, 1, 0], &[1])) + &term([1, 1, 0], &[2]))
        + &term([1, 2, 0], &[1, 2]);
    if w2.y0 != Rational::one() || w2.series != want2 {
        return Err(format!("k = 2 potential is {w2}"));
    }
    let took = within(start, Duration::from_secs(1), "both potentials")?;
    Ok(format!("W1 = {w1}; W2 = {w2} ({took:.2?})"))
}

fn maximal_descendents() -> Check {
    let start = Instant::now();
    let t0 = table(0, 1, 4)?;
    for d in 1..=4 {
        let got = entry(&t0, Family::T2, d, 3 * d - 2)?;
        let want = inv_factorial(d).pow(3);
        if got != want {
            return Err(format!("<psi^{} T2>_{d} = {got}, expected {want}", 3 * d - 2));
        }
    }
    let t1 = table(1, 1, 3)?;
    for d in 1..=3 {
        let got = entry(&t1, Family::T2, d, 3 * d - 3)?;
        let want = inv_factorial(d) * inv_factorial(d - 1).pow(2);
        if got != want {
            return Err(format!("<T2, psi^{} T2>_{d} = {got}, expected {want}", 3 * d - 3));
        }
    }
    let took = within(start, Duration::from_secs(5), "maximal rows")?;
    Ok(format!("d <= 4 at k = 0 and d <= 3 at k = 1 ({took:.2?})"))
}

fn curve_counts() -> Check {
    let mut notes = Vec::new();
    for (d, k, limit) in [(1u32, 2usize, 10u64), (2, 5, 10), (3, 8, 600)] {
        let start = Instant::now();
        let t = table(k, 3, d)?;
        let got = entry(&t, Family::T2, d, 0)?;
        let want = Rational::from_integer(curve_count(d).into());
        if got != want {
            return Err(format!("<T2^{}, T2>_{d} = {got}, expected N_{d} = {want}", 3 * d - 2));
        }
        let took = within(start, Duration::from_secs(limit), &format!("d = {d}"))?;
        notes.push(format!("N{d} = {got} ({took:.2?})"));
    }
    Ok(notes.join(", "))
}

fn divisor_rows() -> Check {
    let t = table(5, 4, 2)?;
    for d in 1..=2 {
        let got = entry(&t, Family::T1, d, 0)?;
        let want = Rational::from_integer((d as i128 * curve_count(d)).into());
        if got != want {
            return Err(format!("<T2^{}, T1>_{d} = {got}, expected {want}", 3 * d - 1));
        }
    }
    let got = entry(&t, Family::T0, 1, 0)?;
    if !got.is_zero() {
        return Err(format!("<T2^3, T0>_1 = {got}, expected 0"));
    }
    Ok("T1 rows d <= 2 equal d*N_d, T0 row d = 1 vanishes".into())
}

fn degree_zero_identities() -> Check {
    let mut configs = 0;
    for k in 0..=6usize {
        for seed in 0..2u64 {
            let opts = BuildOptions {
                singular_points: false,
                ..BuildOptions::default()
            };
            let s = sample_generic(&SampleConfig::seeded(k, 100 + seed), &opts)
                .map_err(|e| format!("k = {k}: {e}"))?;
            let sk = sk_expansion(&s.potential).map_err(|e| e.to_string())?;
            let l0 = L_d_i(&sk, 0, 0);
            let l1 = L_d_i(&sk, 0, 1);
            let l2 = L_d_i(&sk, 0, 2);
            let mut want2 = Series::zero();
            for i in 1..=k {
                want2.add_term(Monomial::new(-1, DegreeVec::ZERO, USet::singleton(i)), Rational::one());
            }
            if l0 != Series::one() {
                return Err(format!("k = {k}: L^0_0 = {l0}"));
            }
            if !l1.is_zero() {
                return Err(format!("k = {k}: L^0_1 = {l1}"));
            }
            if l2 != want2 {
                return Err(format!("k = {k}: L^0_2 = {l2}"));
            }
            configs += 1;
        }
    }
    Ok(format!("{configs} configurations with k <= 6"))
}

fn scattering_consistency() -> Check {
    let start = Instant::now();
    let mut loops = 0;
    for k in 0..=5usize {
        for seed in 0..10u64 {
            let s = sample_generic(&SampleConfig::seeded(k, 200 + seed), &BuildOptions::default())
                .map_err(|e| format!("k = {k}, seed = {seed}: {e}"))?;
            let report = check_consistency(&s.diagram).map_err(|e| e.to_string())?;
            if let Some(f) = report.failures.first() {
                return Err(format!(
                    "k = {k}, seed = {seed}: loop at {} maps x{} to {}",
                    f.point, f.generator, f.image
                ));
            }
            loops += report.checked;
        }
    }
    let took = within(start, Duration::from_secs(30), "consistency audit")?;
    Ok(format!("{loops} singular points over 60 configurations ({took:.2?})"))
}

fn random_point(rng: &mut ChaCha8Rng, scale: i64) -> RatPoint {
    let mut c = || Rational::new(rng.gen_range(-scale * 9973..=scale * 9973).into(), 9973.into());
    RatPoint::new(c(), c())
}

fn wall_crossing_transport() -> Check {
    let mut pairs = 0;
    let mut crossings = 0;
    for k in 0..=4usize {
        let s = sample_generic(&SampleConfig::seeded(k, 300), &BuildOptions::default())
            .map_err(|e| format!("k = {k}: {e}"))?;
        let diag = &s.diagram;
        let mut rng = ChaCha8Rng::seed_from_u64(301 + k as u64);
        let mut done = 0;
        let mut attempts = 0;
        while done < 20 {
            attempts += 1;
            if attempts > 400 {
                return Err(format!("k = {k}: could not sample generic endpoint pairs"));
            }
            let q = random_point(&mut rng, 150);
            let q2 = random_point(&mut rng, 150);
            let mid = random_point(&mut rng, 150);
            let (w, w2) = match (potential(&q, diag), potential(&q2, diag)) {
                (Ok(a), Ok(b)) => (a, b),
                _ => continue,
            };
            let path = [q.clone(), mid, q2.clone()];
            let moved: Potential = match transport(&w, &path, diag) {
                Ok(m) => m,
                Err(Error::PathHitsSingularPoint(_) | Error::EndpointOnSupport(_) | Error::TangentialCrossing) => {
                    continue
                }
                Err(e) => return Err(e.to_string()),
            };
            if moved != w2 {
                return Err(format!(
                    "k = {k}: transport from {q} to {q2} gives {moved}, potential there is {w2}"
                ));
            }
            if w != w2 {
                crossings += 1;
            }
            done += 1;
        }
        pairs += done;
    }
    Ok(format!("{pairs} endpoint pairs, {crossings} with different potentials"))
}

/// Coefficients of `prod_l prod_{k=1}^{n_l} (alpha + d - k + 1)` up to `alpha^2`.
fn c_oracle(d: u32, m: DegreeVec) -> [Rational; 3] {
    let mut poly = vec![Rational::one()];
    for &n in &m.0 {
        for k in 1..=n as i64 {
            let shift = Rational::from_integer((d as i64 - k + 1).into());
            let mut next = vec![Rational::zero(); poly.len() + 1];
            for (e, c) in poly.iter().enumerate() {
                next[e] += c * &shift;
                next[e + 1] += c;
            }
            poly = next;
        }
    }
    poly.resize(poly.len().max(3), Rational::zero());
    [poly[0].clone(), poly[1].clone(), poly[2].clone()]
}

fn b_oracle(d: u32) -> [Rational; 3] {
    let base = inv_factorial(d).pow(3);
    let h = harmonic(d, 1);
    let h2 = harmonic(d, 2);
    [
        base.clone(),
        rat(-3, 1) * &h * &base,
        rat(9, 2) * (&h * &h + h2 / BigInt::from(3)) * base,
    ]
}

fn coefficient_identities() -> Check {
    let start = Instant::now();
    let mut checked = 0usize;
    for d in 0..=6u32 {
        let b = b_oracle(d);
        for i in 0..3 {
            if b_coeff(i, d) != b[i] {
                return Err(format!("B_{i}({d}) = {}, expected {}", b_coeff(i, d), b[i]));
            }
        }
        for n0 in 0..=8 {
            for n1 in 0..=8 {
                for n2 in 0..=8 {
                    let m = DegreeVec::new(n0, n1, n2);
                    let c = c_oracle(d, m);
                    for i in 0..3 {
                        if c_coeff(i, d, m) != c[i] {
                            return Err(format!("C_{i}({d}, {m}) disagrees with the product expansion"));
                        }
                        let conv: Rational = (0..=i).map(|j| &b[j] * &c[i - j]).sum();
                        if d_coeff(i, d, m) != conv {
                            return Err(format!(
                                "D_{i}({d}, {m}) = {}, convolution gives {conv}",
                                d_coeff(i, d, m)
                            ));
                        }
                        checked += 1;
                    }
                }
            }
        }
    }
    for d in 0..=4u32 {
        for m in degrees(5) {
            for mw in degrees(3) {
                let r = r_map(mw);
                if r.is_zero() {
                    continue;
                }
                let p = primitive(r).unwrap();
                let n = LatticeVec::new(-p.y, p.x);
                for i in 0..3 {
                    let mut total = Rational::from_integer(n.pair(r_map(m)).into()) * d_coeff(i, d, m + mw);
                    for (j, mj) in FAN_RAYS.iter().enumerate() {
                        total += Rational::from_integer(n.pair(*mj).into())
                            * d_coeff(i, d, m + mw + DegreeVec::unit(j));
                    }
                    if !total.is_zero() {
                        return Err(format!(
                            "wall-crossing identity fails for i = {i}, d = {d}, m = {m}, m_w = {mw}: {total}"
                        ));
                    }
                    checked += 1;
                }
            }
        }
    }
    for d in 0..=6u32 {
        for m in degrees(d) {
            let counts = [d - m.0[0], d - m.0[1], d - m.0[2]];
            for i in 0..3 {
                if mult_psi(i, counts) != d_coeff(i, d, m) {
                    return Err(format!("Mult^{i}{counts:?} differs from D_{i}({d}, {m})"));
                }
                checked += 1;
            }
        }
    }
    let took = within(start, Duration::from_secs(10), "coefficient identities")?;
    Ok(format!("{checked} exact identities ({took:.2?})"))
}

/// All degree vectors with entries at most `bound`.
fn degrees(bound: u32) -> Vec<DegreeVec> {
    let mut out = Vec::new();
    for a in 0..=bound {
        for b in 0..=bound {
            for c in 0..=bound {
                out.push(DegreeVec::new(a, b, c));
            }
        }
    }
    out
}

fn position_independence() -> Check {
    let mut entries = 0;
    for k in 0..=6usize {
        let a = table(k, 400, 2)?;
        let b = table(k, 401, 2)?;
        if k > 0 && a.meta.points == b.meta.points {
            return Err(format!("k = {k}: both seeds gave the same points"));
        }
        if a.entries.keys().ne(b.entries.keys()) {
            return Err(format!("k = {k}: tables have different entries"));
        }
        if let Some(&(f, d, nu)) = a.disagreements(&b).first() {
            return Err(format!(
                "k = {k}: {f}, d = {d}, nu = {nu} is {} for one seed and {} for the other",
                a.entries[&(f, d, nu)],
                b.entries[&(f, d, nu)]
            ));
        }
        entries += a.entries.len();
    }
    Ok(format!("{entries} entries agree across k <= 6"))
}

fn main() -> ExitCode {
    let checks: [(&str, fn() -> Check); 9] = [
        ("pinned potentials for k = 1 and k = 2", pinned_potentials),
        ("maximal descendent rows", maximal_descendents),
        ("curve counts N1, N2, N3", curve_counts),
        ("divisor and fundamental class rows", divisor_rows),
        ("degree zero extraction identities", degree_zero_identities),
        ("scattering consistency", scattering_consistency),
        ("wall-crossing transport", wall_crossing_transport),
        ("period coefficient identities", coefficient_identities),
        ("position independence", position_independence),
    ];
    let mut failed = 0;
    for (n, (name, check)) in checks.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", n + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {why}", n + 1);
            }
        }
    }
    if failed == 0 {
        println!("acceptance: all {} criteria passed", checks.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of {} criteria failed", checks.len());
        ExitCode::FAILURE
    }
}
