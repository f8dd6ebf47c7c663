//! Seeded sampling of marked points and endpoint in general position.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::broken::{potential, Potential};
use crate::descend::{extract_invariants, sk_expansion, DescendentTable};
use crate::error::{Error, Result};
use crate::lattice::{RatPoint, Rational};
use crate::scatter::{build_diagram_with, BuildOptions, Diagram};

pub const DEFAULT_RETRIES: u32 = 32;
const NUMERATOR_BOUND: i64 = 1_000_000;
const DENOMINATOR_BASE: i64 = 10_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleConfig {
    pub k: usize,
    pub points: Option<Vec<RatPoint>>,
    pub q: Option<RatPoint>,
    pub seed: u64,
    pub retries: u32,
}

impl SampleConfig {
    pub fn seeded(k: usize, seed: u64) -> SampleConfig {
        SampleConfig {
            k,
            points: None,
            q: None,
            seed,
            retries: DEFAULT_RETRIES,
        }
    }
}

/// A configuration that passed every genericity check.
#[derive(Clone, Debug)]
pub struct Sampled {
    pub points: Vec<RatPoint>,
    pub q: RatPoint,
    /// Zero-based index of the successful attempt.
    pub attempt: u32,
    pub diagram: Diagram,
    pub potential: Potential,
}

fn small_primes(n: usize) -> Vec<i64> {
    let mut out: Vec<i64> = Vec::with_capacity(n);
    let mut c = 2;
    while out.len() < n {
        if out.iter().take_while(|&&p| p * p <= c).all(|&p| c % p != 0) {
            out.push(c);
        }
        c += 1;
    }
    out
}

fn coordinate(rng: &mut ChaCha8Rng, denom: i64) -> Rational {
    let num = rng.gen_range(-NUMERATOR_BOUND..=NUMERATOR_BOUND);
    Rational::new(BigInt::from(num), BigInt::from(denom))
}

/// Coordinate `c` is drawn with denominator `10^4 + p_c`, `p_c` the c-th prime.
fn draw(rng: &mut ChaCha8Rng, k: usize) -> (Vec<RatPoint>, RatPoint) {
    let primes = small_primes(2 * k + 2);
    let denom = |c: usize| DENOMINATOR_BASE + primes[c];
    let points = (0..k)
        .map(|j| RatPoint::new(coordinate(rng, denom(2 * j)), coordinate(rng, denom(2 * j + 1))))
        .collect();
    let q = RatPoint::new(coordinate(rng, denom(2 * k)), coordinate(rng, denom(2 * k + 1)));
    (points, q)
}

fn is_degeneracy(e: &Error) -> bool {
    matches!(
        e,
        Error::DegeneratePosition(_)
            | Error::DegenerateEndpoint(_)
            | Error::DuplicatePoints(..)
            | Error::EndpointOnSupport(_)
    )
}

/// Draw points and endpoint from the seed until the diagram and the broken
/// lines at the endpoint are generic. Explicit points or endpoint are kept.
pub fn sample_generic(cfg: &SampleConfig, opts: &BuildOptions) -> Result<Sampled> {
    if let Some(p) = &cfg.points {
        if p.len() != cfg.k {
            return Err(Error::Parse(format!(
                "k = {} but {} explicit points were given",
                cfg.k,
                p.len()
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let fixed = cfg.points.is_some() && cfg.q.is_some();
    let mut last = String::from("no attempts made");
    let mut made = 0;
    for attempt in 0..cfg.retries.max(1) {
        made = attempt + 1;
        let (drawn, drawn_q) = draw(&mut rng, cfg.k);
        let points = cfg.points.clone().unwrap_or(drawn);
        let q = cfg.q.clone().unwrap_or(drawn_q);
        let outcome = build_diagram_with(&points, opts)
            .and_then(|diagram| potential(&q, &diagram).map(|w| (diagram, w)));
        match outcome {
            Ok((diagram, potential)) => {
                return Ok(Sampled {
                    points,
                    q,
                    attempt,
                    diagram,
                    potential,
                })
            }
            Err(e) if is_degeneracy(&e) => {
                last = e.to_string();
                if fixed || (cfg.points.is_some() && !matches!(e, Error::DegenerateEndpoint(_))) {
                    break;
                }
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::ExhaustedRetries {
        attempts: made,
        last,
    })
}

/// Sample, build, and extract the descendent table up to degree `d_max`.
pub fn invariants_for(cfg: &SampleConfig, d_max: u32) -> Result<(Sampled, DescendentTable)> {
    let opts = BuildOptions {
        singular_points: false,
        ..BuildOptions::default()
    };
    let s = sample_generic(cfg, &opts)?;
    let sk = sk_expansion(&s.potential)?;
    let mut table = extract_invariants(&sk, d_max, cfg.k)?;
    table.meta.seed = Some(cfg.seed);
    table.meta.attempt = Some(s.attempt);
    table.meta.points = s.points.clone();
    table.meta.q = Some(s.q.clone());
    Ok((s, table))
}
