//! Broken lines with a fixed endpoint, the deformed potential, and transport.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::coeff::{Series, Term, USet};
use crate::error::{Error, Result};
use crate::lattice::{r_map, rat_int, wedge, DegreeVec, LatticeVec, RatPoint, Rational};
use crate::scatter::{intersect, path_product, Diagram, Ray};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BendEvent {
    pub ray_index: usize,
    pub point: RatPoint,
    #[serde(with = "crate::lattice::rational_str")]
    pub factor: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BrokenLine {
    pub endpoint: RatPoint,
    pub init_dir: usize,
    /// Ordered from infinity toward the endpoint.
    pub bends: Vec<BendEvent>,
    pub final_term: Term,
}

impl BrokenLine {
    /// Vertices from the bend nearest infinity to the endpoint, with the
    /// direction of travel of the unbounded first segment.
    pub fn polyline(&self) -> (LatticeVec, Vec<RatPoint>) {
        let first = -r_map(DegreeVec::unit(self.init_dir));
        let mut pts: Vec<RatPoint> = self.bends.iter().map(|b| b.point.clone()).collect();
        pts.push(self.endpoint.clone());
        (first, pts)
    }
}

/// Rays grouped by marked-point set.
pub(crate) struct RayIndex {
    by_uset: HashMap<USet, Vec<usize>>,
}

impl RayIndex {
    pub(crate) fn new(rays: &[Ray]) -> RayIndex {
        let mut by_uset: HashMap<USet, Vec<usize>> = HashMap::new();
        for (i, r) in rays.iter().enumerate() {
            by_uset.entry(r.uset).or_default().push(i);
        }
        RayIndex { by_uset }
    }

    fn get(&self, u: USet) -> &[usize] {
        self.by_uset.get(&u).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Degree vectors of total `n` with `r(m) != 0`.
fn degrees_of_total(n: u32) -> Vec<DegreeVec> {
    let mut out = Vec::new();
    for a in 0..=n {
        for b in 0..=n - a {
            let m = DegreeVec::new(a, b, n - a - b);
            if !r_map(m).is_zero() {
                out.push(m);
            }
        }
    }
    out
}

/// Floating-point shadow of a point, used to discard impossible candidates
/// before exact arithmetic.
pub(crate) type Approx = [f64; 2];

pub(crate) fn approx(p: &RatPoint) -> Approx {
    [p.x.to_f64().unwrap_or(f64::NAN), p.y.to_f64().unwrap_or(f64::NAN)]
}

fn slack(w: Approx) -> f64 {
    1e-6 * (1.0 + w[0].abs() + w[1].abs())
}

/// False only if `a + s u = b + t v` surely has `s < 0` or `t < 0`.
pub(crate) fn may_meet(a: Approx, u: LatticeVec, b: Approx, v: LatticeVec) -> bool {
    let det = wedge(u, v) as f64;
    let w = [b[0] - a[0], b[1] - a[1]];
    let s = (w[0] * v.y as f64 - w[1] * v.x as f64) / det;
    let t = (w[0] * u.y as f64 - w[1] * u.x as f64) / det;
    let eps = slack(w);
    !(s < -eps || t < -eps)
}

/// False only if `p` is surely off the ray `b + t v`, `t >= 0`.
pub(crate) fn may_contain(b: Approx, v: LatticeVec, p: Approx) -> bool {
    let w = [p[0] - b[0], p[1] - b[1]];
    let eps = slack(w);
    let cross = w[0] * v.y as f64 - w[1] * v.x as f64;
    let along = w[0] * v.x as f64 + w[1] * v.y as f64;
    cross.abs() <= eps && along >= -eps
}

struct Tracer<'a> {
    rays: &'a [Ray],
    bases: Vec<Approx>,
    index: &'a RayIndex,
    /// Rays visible to the lines being traced.
    visible: Vec<usize>,
    endpoint: &'a RatPoint,
    out: Vec<BrokenLine>,
}

impl Tracer<'_> {
    /// Another ray through `p` that is not a parallel companion of `skip`.
    /// Rays from one marked point in the same direction overlap, but their
    /// shared marked point makes them commute, so meeting both is harmless.
    fn on_other_ray(&self, p: &RatPoint, pf: Approx, skip: usize) -> Option<usize> {
        let r = &self.rays[skip];
        self.visible.iter().copied().find(|&i| {
            let o = &self.rays[i];
            i != skip
                && may_contain(self.bases[i], o.dir, pf)
                && o.contains(p)
                && !(wedge(o.dir, r.dir) == 0 && !o.uset.is_disjoint(r.uset))
        })
    }

    /// Extend backwards from `anchor`, where the segment toward the endpoint
    /// carries `z^m u_I` and `bends` (nearest the endpoint first) are fixed.
    fn search(
        &mut self,
        anchor: &RatPoint,
        anchor_f: Approx,
        m: DegreeVec,
        uset: USet,
        bends: &mut Vec<BendEvent>,
    ) -> Result<()> {
        if uset.is_empty() {
            let init_dir = (0..3).find(|&j| m == DegreeVec::unit(j)).unwrap();
            let mut ordered = bends.clone();
            ordered.reverse();
            self.out.push(BrokenLine {
                endpoint: self.endpoint.clone(),
                init_dir,
                bends: ordered,
                final_term: Term::new(rat_int(1), 0, DegreeVec::ZERO, USet::EMPTY),
            });
            return Ok(());
        }
        let back = r_map(m);
        for sub in uset.subsets() {
            if sub.is_empty() {
                continue;
            }
            for &ri in self.index.get(sub) {
                let ray = &self.rays[ri];
                let Some(prev) = m.checked_sub(&ray.degree) else {
                    continue;
                };
                let r_prev = r_map(prev);
                if r_prev.is_zero() {
                    continue;
                }
                let w = wedge(ray.dir, r_prev);
                if w == 0 {
                    continue;
                }
                if !may_meet(anchor_f, back, self.bases[ri], ray.dir) {
                    continue;
                }
                let Some((s, t)) = intersect(anchor, back, &ray.base, ray.dir) else {
                    continue;
                };
                if !s.is_positive() || t.is_negative() {
                    continue;
                }
                let x = anchor.offset(&s, back);
                let xf = approx(&x);
                if t.is_zero() {
                    return Err(Error::DegenerateEndpoint(format!(
                        "broken line to {} passes through the start {} of a ray",
                        self.endpoint, x
                    )));
                }
                if let Some(other) = self.on_other_ray(&x, xf, ri) {
                    let o = &self.rays[other];
                    return Err(Error::DegenerateEndpoint(format!(
                        "bend point {} of a broken line to {} lies on the ray of degree {} with marked points {} and on the ray of degree {} with marked points {}{}",
                        x,
                        self.endpoint,
                        ray.degree,
                        ray.uset,
                        o.degree,
                        o.uset,
                        if o.base == x { " (its start)" } else { "" }
                    )));
                }
                let factor = &ray.mult * BigInt::from(w.abs() * ray.wout);
                bends.push(BendEvent {
                    ray_index: ri,
                    point: x.clone(),
                    factor: factor.clone(),
                });
                self.search(&x, xf, prev, uset.minus(sub), bends)?;
                bends.pop();
            }
        }
        Ok(())
    }
}

/// Broken lines ending at `q` that only see rays with usets inside `allowed`
/// and whose final uset has exactly `size` elements.
pub(crate) fn trace(
    rays: &[Ray],
    index: &RayIndex,
    q: &RatPoint,
    allowed: USet,
    size: usize,
    cap: Option<DegreeVec>,
) -> Result<Vec<BrokenLine>> {
    let visible: Vec<usize> = (0..rays.len())
        .filter(|&i| rays[i].uset.is_subset(allowed))
        .collect();
    if let Some(&i) = visible.iter().find(|&&i| rays[i].contains(q)) {
        return Err(Error::DegenerateEndpoint(format!(
            "{q} lies on the ray of degree {} with marked points {}",
            rays[i].degree, rays[i].uset
        )));
    }
    let qf = approx(q);
    let mut tracer = Tracer {
        rays,
        bases: rays.iter().map(|r| approx(&r.base)).collect(),
        index,
        visible,
        endpoint: q,
        out: Vec::new(),
    };
    for uset in allowed.subsets_of_size(size) {
        for m in degrees_of_total(size as u32 + 1) {
            if cap.is_some_and(|c| !m.le(&c)) {
                continue;
            }
            let mut bends = Vec::new();
            let start = tracer.out.len();
            tracer.search(q, qf, m, uset, &mut bends)?;
            for line in &mut tracer.out[start..] {
                let coeff = line
                    .bends
                    .iter()
                    .fold(Rational::one(), |acc, b| acc * &b.factor);
                line.final_term = Term::new(coeff, 0, m, uset);
            }
        }
    }
    let mut out = tracer.out;
    out.sort_by(|a, b| {
        a.final_term
            .monomial()
            .cmp(&b.final_term.monomial())
            .then(a.init_dir.cmp(&b.init_dir))
            .then_with(|| {
                let ka: Vec<usize> = a.bends.iter().map(|e| e.ray_index).collect();
                let kb: Vec<usize> = b.bends.iter().map(|e| e.ray_index).collect();
                ka.cmp(&kb)
            })
    });
    Ok(out)
}

/// All broken lines ending at `q`.
pub fn enumerate_broken_lines(q: &RatPoint, diag: &Diagram) -> Result<Vec<BrokenLine>> {
    enumerate_broken_lines_capped(q, diag, None)
}

/// Broken lines ending at `q` whose final degree is at most `cap` entrywise.
pub fn enumerate_broken_lines_capped(
    q: &RatPoint,
    diag: &Diagram,
    cap: Option<DegreeVec>,
) -> Result<Vec<BrokenLine>> {
    let index = diag.ray_index();
    let allowed = USet::full(diag.k());
    let max_size = diag.rays.iter().map(|r| r.uset.len()).max().unwrap_or(0);
    let max_size = max_size.min(diag.k());
    let mut lines = Vec::new();
    for size in 0..=max_size {
        lines.extend(trace(&diag.rays, &index, q, allowed, size, cap)?);
    }
    Ok(lines)
}

/// `y0 + sum of final monomials`; `y0` is kept apart from the series.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Potential {
    #[serde(with = "crate::lattice::rational_str")]
    pub y0: Rational,
    pub series: Series,
}

impl Potential {
    /// `W_0 = y0 + x0 + x1 + x2`.
    pub fn standard() -> Potential {
        Potential {
            y0: Rational::one(),
            series: &(&Series::x(0) + &Series::x(1)) + &Series::x(2),
        }
    }

    /// `W - W_0`, the part built from disks through marked points.
    pub fn corrections(&self) -> Series {
        &self.series - &Potential::standard().series
    }
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.y0.is_zero() {
            return write!(f, "{}", self.series);
        }
        if self.y0.is_one() {
            write!(f, "y0")?;
        } else {
            write!(f, "{}*y0", self.y0)?;
        }
        if !self.series.is_zero() {
            let s = self.series.to_string();
            if let Some(rest) = s.strip_prefix('-') {
                write!(f, " - {rest}")?;
            } else {
                write!(f, " + {s}")?;
            }
        }
        Ok(())
    }
}

pub fn potential(q: &RatPoint, diag: &Diagram) -> Result<Potential> {
    potential_capped(q, diag, None)
}

pub fn potential_capped(q: &RatPoint, diag: &Diagram, cap: Option<DegreeVec>) -> Result<Potential> {
    let lines = enumerate_broken_lines_capped(q, diag, cap)?;
    Ok(Potential {
        y0: Rational::one(),
        series: Series::from_terms(lines.into_iter().map(|l| l.final_term)),
    })
}

/// Carry a potential along a polyline; `y0` is fixed by every crossing.
pub fn transport(w: &Potential, path: &[RatPoint], diag: &Diagram) -> Result<Potential> {
    Ok(Potential {
        y0: w.y0.clone(),
        series: path_product(&w.series, path, diag)?,
    })
}
