//! The acceptance suite behind `tropdesc verify`.

use std::path::PathBuf;

use anyhow::{anyhow, Result};
use clap::ValueEnum;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use tropdesc::broken::{potential, transport, Potential};
use tropdesc::coeff::{Monomial, Series, USet};
use tropdesc::descend::{
    b_coeff, c_coeff, d_coeff, kontsevich_oracle, mult_psi, sk_expansion, DescendentTable, Family, L_d_i,
};
use tropdesc::error::Error;
use tropdesc::lattice::{primitive, r_map, DegreeVec, LatticeVec, RatPoint, Rational, FAN_RAYS};
use tropdesc::sample::{invariants_for, sample_generic, SampleConfig};
use tropdesc::scatter::{build_diagram, check_consistency, BuildOptions};

use crate::config::{Format, RunConfig};
use crate::{write_or_print, CheckFailed};

/// Deliberate corruption used to test that failures are reported.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Perturb {
    DCoeff,
    Potential,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Serialize)]
struct Outcome {
    id: usize,
    name: &'static str,
    status: Status,
    detail: String,
}

#[derive(Debug, Serialize)]
struct Report {
    k: usize,
    d_max: u32,
    seed: u64,
    passed: bool,
    checks: Vec<Outcome>,
}

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

type Step<T> = std::result::Result<T, String>;

struct Ctx {
    k: usize,
    d: u32,
    seed: u64,
    threads: usize,
    perturb: Option<Perturb>,
}

impl Ctx {
    fn seed(&self, offset: u64) -> u64 {
        self.seed.wrapping_add(offset)
    }

    fn table(&self, k: usize, seed: u64, d_max: u32) -> Step<DescendentTable> {
        invariants_for(&SampleConfig::seeded(k, seed), d_max)
            .map(|(_, t)| t)
            .map_err(|e| format!("k = {k}, seed = {seed}: {e}"))
    }

    fn d_coeff(&self, i: usize, d: u32, m: DegreeVec) -> Rational {
        let v = d_coeff(i, d, m);
        if self.perturb == Some(Perturb::DCoeff) && i == 1 && d == 2 && m == DegreeVec::new(1, 1, 1) {
            v + Rational::new(1.into(), 997.into())
        } else {
            v
        }
    }

    fn observe(&self, mut w: Potential) -> Potential {
        if self.perturb == Some(Perturb::Potential) {
            w.series.add_term(Monomial::new(0, DegreeVec::new(2, 0, 0), USet::singleton(1)), Rational::one());
        }
        w
    }

    /// Map `f` over `items` on up to `threads` workers, keeping input order.
    fn map<T: Sync, R: Send>(&self, items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
        if self.threads <= 1 || items.len() <= 1 {
            return items.iter().map(f).collect();
        }
        let workers = self.threads.min(items.len());
        let f = &f;
        let mut slots: Vec<Option<R>> = (0..items.len()).map(|_| None).collect();
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    scope.spawn(move || {
                        (w..items.len())
                            .step_by(workers)
                            .map(|i| (i, f(&items[i])))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            for h in handles {
                for (i, r) in h.join().expect("worker panicked") {
                    slots[i] = Some(r);
                }
            }
        });
        slots.into_iter().map(|r| r.expect("every slot filled")).collect()
    }
}

fn inv_factorial(n: u32) -> Rational {
    Rational::new(BigInt::one(), (1..=n).map(BigInt::from).product())
}

fn entry(t: &DescendentTable, f: Family, d: u32, nu: u32) -> Step<Rational> {
    t.get(f, d, nu)
        .cloned()
        .ok_or_else(|| format!("table has no entry for {f}, d = {d}, nu = {nu}"))
}

fn verdict(r: Step<String>) -> Verdict {
    match r {
        Ok(s) => Verdict::Pass(s),
        Err(s) => Verdict::Fail(s),
    }
}

fn term(m: [u32; 3], u: &[usize]) -> Series {
    Series::monomial(Rational::one(), Monomial::new(0, DegreeVec(m), USet::from_indices(u.iter().copied())))
}

fn standard() -> Series {
    Potential::standard().series
}

fn pinned_potentials(ctx: &Ctx) -> Verdict {
    if ctx.k < 1 {
        return Verdict::Skip("needs k >= 1".into());
    }
    verdict((|| {
        let d1 = build_diagram(&[RatPoint::from_ints(0, 0)]).map_err(|e| e.to_string())?;
        let w1 = ctx.observe(potential(&RatPoint::from_ints(-1, -2), &d1).map_err(|e| e.to_string())?);
        if w1.y0 != Rational::one() || w1.series != &standard() + &term([0, 1, 1], &[1]) {
            return Err(format!("k = 1 potential is {w1}"));
        }
        let mut done = vec![format!("W1 = {w1}")];
        if ctx.k >= 2 {
            let d2 = build_diagram(&[RatPoint::from_ints(0, 0), RatPoint::from_ints(1, 2)]).map_err(|e| e.to_string())?;
            let w2 = ctx.observe(potential(&RatPoint::from_ints(-3, 4), &d2).map_err(|e| e.to_string())?);
            let want = &(&(&standard() + &term([1, 1, 0], &[1])) + &term([1, 1, 0], &[2])) + &term([1, 2, 0], &[1, 2]);
            if w2.y0 != Rational::one() || w2.series != want {
                return Err(format!("k = 2 potential is {w2}"));
            }
            done.push(format!("W2 = {w2}"));
        }
        Ok(done.join("; "))
    })())
}

fn maximal_rows(ctx: &Ctx) -> Verdict {
    verdict((|| {
        let d0 = ctx.d.min(4);
        let t0 = ctx.table(0, ctx.seed(1), d0)?;
        for d in 1..=d0 {
            let got = entry(&t0, Family::T2, d, 3 * d - 2)?;
            let want = inv_factorial(d).pow(3);
            if got != want {
                return Err(format!("<psi^{} T2>_{d} = {got}, expected {want}", 3 * d - 2));
            }
        }
        let mut note = format!("k = 0 rows d <= {d0}");
        if ctx.k >= 1 {
            let d1 = ctx.d.min(3);
            let t1 = ctx.table(1, ctx.seed(1), d1)?;
            for d in 1..=d1 {
                let got = entry(&t1, Family::T2, d, 3 * d - 3)?;
                let want = inv_factorial(d) * inv_factorial(d - 1).pow(2);
                if got != want {
                    return Err(format!("<T2, psi^{} T2>_{d} = {got}, expected {want}", 3 * d - 3));
                }
            }
            note += &format!(", k = 1 rows d <= {d1}");
        }
        Ok(note)
    })())
}

fn curve_counts(ctx: &Ctx) -> Verdict {
    let cases: Vec<(u32, usize)> = [(1, 2), (2, 5), (3, 8)]
        .into_iter()
        .filter(|&(d, k)| d <= ctx.d && k <= ctx.k)
        .collect();
    if cases.is_empty() {
        return Verdict::Skip("needs k >= 2".into());
    }
    let results = ctx.map(&cases, |&(d, k)| -> Step<String> {
        let t = ctx.table(k, ctx.seed(3), d)?;
        let got = entry(&t, Family::T2, d, 0)?;
        let want = Rational::from_integer(kontsevich_oracle(d));
        if got != want {
            return Err(format!("<T2^{}, T2>_{d} = {got}, expected N_{d} = {want}", 3 * d - 2));
        }
        Ok(format!("N{d} = {got}"))
    });
    verdict(results.into_iter().collect::<Step<Vec<_>>>().map(|v| v.join(", ")))
}

fn divisor_rows(ctx: &Ctx) -> Verdict {
    let k = ctx.k.min(5);
    if k < 2 {
        return Verdict::Skip("needs k >= 2".into());
    }
    verdict((|| {
        let d_top = ctx.d.min(2).min((k as u32 + 1) / 3);
        let t = ctx.table(k, ctx.seed(4), d_top)?;
        for d in 1..=d_top {
            let got = entry(&t, Family::T1, d, 0)?;
            let want = Rational::from_integer(kontsevich_oracle(d) * BigInt::from(d));
            if got != want {
                return Err(format!("<T2^{}, T1>_{d} = {got}, expected {want}", 3 * d - 1));
            }
        }
        let mut note = format!("T1 rows d <= {d_top}");
        if k >= 3 {
            let got = entry(&t, Family::T0, 1, 0)?;
            if !got.is_zero() {
                return Err(format!("<T2^3, T0>_1 = {got}, expected 0"));
            }
            note += ", T0 row d = 1";
        }
        Ok(note)
    })())
}

fn degree_zero(ctx: &Ctx) -> Verdict {
    let cases: Vec<(usize, u64)> = (0..=ctx.k.min(6)).flat_map(|k| (0..2).map(move |s| (k, s))).collect();
    let results = ctx.map(&cases, |&(k, s)| -> Step<()> {
        let opts = BuildOptions {
            singular_points: false,
            ..BuildOptions::default()
        };
        let smp = sample_generic(&SampleConfig::seeded(k, ctx.seed(100 + s)), &opts).map_err(|e| format!("k = {k}: {e}"))?;
        let sk = sk_expansion(&smp.potential).map_err(|e| e.to_string())?;
        let mut want2 = Series::zero();
        for i in 1..=k {
            want2.add_term(Monomial::new(-1, DegreeVec::ZERO, USet::singleton(i)), Rational::one());
        }
        let (l0, l1, l2) = (L_d_i(&sk, 0, 0), L_d_i(&sk, 0, 1), L_d_i(&sk, 0, 2));
        if l0 != Series::one() {
            return Err(format!("k = {k}: L^0_0 = {l0}"));
        }
        if !l1.is_zero() {
            return Err(format!("k = {k}: L^0_1 = {l1}"));
        }
        if l2 != want2 {
            return Err(format!("k = {k}: L^0_2 = {l2}"));
        }
        Ok(())
    });
    verdict(
        results
            .into_iter()
            .collect::<Step<Vec<_>>>()
            .map(|v| format!("{} configurations with k <= {}", v.len(), ctx.k.min(6))),
    )
}

fn consistency(ctx: &Ctx) -> Verdict {
    let cases: Vec<(usize, u64)> = (0..=ctx.k.min(5)).flat_map(|k| (0..10).map(move |s| (k, s))).collect();
    let results = ctx.map(&cases, |&(k, s)| -> Step<usize> {
        let smp = sample_generic(&SampleConfig::seeded(k, ctx.seed(200 + s)), &BuildOptions::default())
            .map_err(|e| format!("k = {k}: {e}"))?;
        let report = check_consistency(&smp.diagram).map_err(|e| e.to_string())?;
        match report.failures.first() {
            Some(f) => Err(format!("k = {k}: loop at {} maps x{} to {}", f.point, f.generator, f.image)),
            None => Ok(report.checked),
        }
    });
    verdict(results.into_iter().collect::<Step<Vec<_>>>().map(|v| {
        format!("{} singular points over {} configurations", v.iter().sum::<usize>(), v.len())
    }))
}

fn random_point(rng: &mut ChaCha8Rng) -> RatPoint {
    let mut c = || Rational::new(rng.gen_range(-150 * 9973..=150 * 9973).into(), 9973.into());
    RatPoint::new(c(), c())
}

fn wall_crossing(ctx: &Ctx) -> Verdict {
    let ks: Vec<usize> = (0..=ctx.k.min(4)).collect();
    let results = ctx.map(&ks, |&k| -> Step<usize> {
        let smp = sample_generic(&SampleConfig::seeded(k, ctx.seed(300)), &BuildOptions::default())
            .map_err(|e| format!("k = {k}: {e}"))?;
        let diag = &smp.diagram;
        let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed(301 + k as u64));
        let (mut done, mut attempts) = (0, 0);
        while done < 20 {
            attempts += 1;
            if attempts > 400 {
                return Err(format!("k = {k}: could not sample generic endpoint pairs"));
            }
            let (q, q2, mid) = (random_point(&mut rng), random_point(&mut rng), random_point(&mut rng));
            let (w, w2) = match (potential(&q, diag), potential(&q2, diag)) {
                (Ok(a), Ok(b)) => (a, b),
                _ => continue,
            };
            let moved = match transport(&w, &[q.clone(), mid, q2.clone()], diag) {
                Ok(m) => m,
                Err(Error::PathHitsSingularPoint(_) | Error::EndpointOnSupport(_) | Error::TangentialCrossing) => continue,
                Err(e) => return Err(e.to_string()),
            };
            if moved != w2 {
                return Err(format!("k = {k}: transport from {q} to {q2} gives {moved}, potential there is {w2}"));
            }
            done += 1;
        }
        Ok(done)
    });
    verdict(
        results
            .into_iter()
            .collect::<Step<Vec<_>>>()
            .map(|v| format!("{} endpoint pairs with k <= {}", v.iter().sum::<usize>(), ctx.k.min(4))),
    )
}

/// Coefficients of `prod_l prod_{j=1}^{n_l} (alpha + d - j + 1)` up to `alpha^2`.
fn product_expansion(d: u32, m: DegreeVec) -> [Rational; 3] {
    let mut poly = vec![Rational::one()];
    for &n in &m.0 {
        for j in 1..=n as i64 {
            let shift = Rational::from_integer((d as i64 - j + 1).into());
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

fn box_degrees(bound: u32) -> impl Iterator<Item = DegreeVec> {
    (0..=bound).flat_map(move |a| (0..=bound).flat_map(move |b| (0..=bound).map(move |c| DegreeVec::new(a, b, c))))
}

fn coefficient_identities(ctx: &Ctx) -> Verdict {
    verdict((|| {
        let mut checked = 0usize;
        let d_conv = ctx.d.min(6);
        for d in 0..=d_conv {
            for m in box_degrees(8) {
                let c = product_expansion(d, m);
                for i in 0..3 {
                    if c_coeff(i, d, m) != c[i] {
                        return Err(format!("C_{i}({d}, {m}) disagrees with the product expansion"));
                    }
                    let conv: Rational = (0..=i).map(|j| b_coeff(j, d) * &c[i - j]).sum();
                    let got = ctx.d_coeff(i, d, m);
                    if got != conv {
                        return Err(format!("D = B*C convolution fails: D_{i}({d}, {m}) = {got}, convolution gives {conv}"));
                    }
                    checked += 1;
                }
            }
        }
        for d in 0..=ctx.d.min(4) {
            for m in box_degrees(5) {
                for mw in box_degrees(3) {
                    let r = r_map(mw);
                    if r.is_zero() {
                        continue;
                    }
                    let p = primitive(r).map_err(|e| e.to_string())?;
                    let n = LatticeVec::new(-p.y, p.x);
                    for i in 0..3 {
                        let mut total = Rational::from_integer(n.pair(r_map(m)).into()) * ctx.d_coeff(i, d, m + mw);
                        for (j, mj) in FAN_RAYS.iter().enumerate() {
                            total += Rational::from_integer(n.pair(*mj).into()) * ctx.d_coeff(i, d, m + mw + DegreeVec::unit(j));
                        }
                        if !total.is_zero() {
                            return Err(format!(
                                "wall-crossing vanishing identity fails for i = {i}, d = {d}, m = {m}, m_w = {mw}: {total}"
                            ));
                        }
                        checked += 1;
                    }
                }
            }
        }
        for d in 0..=d_conv {
            for m in box_degrees(d) {
                let counts = [d - m.0[0], d - m.0[1], d - m.0[2]];
                for i in 0..3 {
                    if mult_psi(i, counts) != ctx.d_coeff(i, d, m) {
                        return Err(format!("psi-vertex multiplicity Mult^{i}{counts:?} differs from D_{i}({d}, {m})"));
                    }
                    checked += 1;
                }
            }
        }
        Ok(format!("{checked} exact identities with d <= {d_conv}"))
    })())
}

fn position_independence(ctx: &Ctx) -> Verdict {
    let d = ctx.d.min(2);
    let ks: Vec<usize> = (0..=ctx.k.min(6)).collect();
    let results = ctx.map(&ks, |&k| -> Step<usize> {
        let a = ctx.table(k, ctx.seed(400), d)?;
        let b = ctx.table(k, ctx.seed(401), d)?;
        if k > 0 && a.meta.points == b.meta.points {
            return Err(format!("k = {k}: both seeds gave the same points"));
        }
        if a.entries.keys().ne(b.entries.keys()) {
            return Err(format!("k = {k}: tables have different entries"));
        }
        if let Some(&(f, dd, nu)) = a.disagreements(&b).first() {
            return Err(format!(
                "k = {k}: {f}, d = {dd}, nu = {nu} is {} for one seed and {} for the other",
                a.entries[&(f, dd, nu)],
                b.entries[&(f, dd, nu)]
            ));
        }
        Ok(a.entries.len())
    });
    verdict(
        results
            .into_iter()
            .collect::<Step<Vec<_>>>()
            .map(|v| format!("{} entries agree for k <= {}, d <= {d}", v.iter().sum::<usize>(), ctx.k.min(6))),
    )
}

type CheckFn = fn(&Ctx) -> Verdict;

const CHECKS: [(&str, CheckFn); 9] = [
    ("pinned potentials", pinned_potentials),
    ("maximal descendent rows", maximal_rows),
    ("curve counts", curve_counts),
    ("divisor and fundamental class rows", divisor_rows),
    ("degree zero extraction identities", degree_zero),
    ("scattering consistency", consistency),
    ("wall-crossing transport", wall_crossing),
    ("period coefficient identities", coefficient_identities),
    ("position independence", position_independence),
];

/// With `k = 0` only the period identities and the `k = 0` rows run.
const K0_CHECKS: [usize; 2] = [2, 8];

pub fn run(cfg: &RunConfig, report_path: Option<PathBuf>, perturb: Option<Perturb>) -> Result<()> {
    let ctx = Ctx {
        k: cfg.k,
        d: cfg.d_max,
        seed: cfg.seed,
        threads: cfg.threads,
        perturb,
    };
    let checks: Vec<Outcome> = CHECKS
        .iter()
        .enumerate()
        .map(|(n, (name, check))| {
            let id = n + 1;
            let v = if ctx.k == 0 && !K0_CHECKS.contains(&id) {
                Verdict::Skip("k = 0 fast path".into())
            } else {
                check(&ctx)
            };
            let (status, detail) = match v {
                Verdict::Pass(d) => (Status::Pass, d),
                Verdict::Fail(d) => (Status::Fail, d),
                Verdict::Skip(d) => (Status::Skipped, d),
            };
            Outcome { id, name, status, detail }
        })
        .collect();
    let failed: Vec<&Outcome> = checks.iter().filter(|c| c.status == Status::Fail).collect();
    let summary = failed.iter().map(|c| format!("{} ({})", c.name, c.detail)).collect::<Vec<_>>().join("; ");
    let report = Report {
        k: ctx.k,
        d_max: ctx.d,
        seed: ctx.seed,
        passed: failed.is_empty(),
        checks,
    };
    let body = match cfg.format {
        Format::Json => serde_json::to_string_pretty(&report)? + "\n",
        Format::Text => report
            .checks
            .iter()
            .map(|c| {
                let s = match c.status {
                    Status::Pass => "PASS",
                    Status::Fail => "FAIL",
                    Status::Skipped => "SKIP",
                };
                format!("criterion {}: {s} {}: {}\n", c.id, c.name, c.detail)
            })
            .collect(),
    };
    write_or_print(report_path.as_deref().or(cfg.out.as_deref()), &body)?;
    if report.passed {
        Ok(())
    } else {
        Err(anyhow!("failed: {summary}").context(CheckFailed))
    }
}
