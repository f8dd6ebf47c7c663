//! Scattering diagrams of Maslov-index-zero trees.
//!
//! Every ray carries the wall function `1 + wout * mult * u_I z^degree` and
//! is supported on `base + R_{>=0} dir` with `dir = -primitive(r(degree))`.
//! The diagram for marked points `P_1..P_k` is built level by level in the
//! size of the marked-point set `I`:
//!
//! * rays based at `P_i` come from broken lines ending at `P_i` in the diagram
//!   of the other points (level one gives the three initial rays);
//! * every other ray starts where two rays with disjoint marked-point sets
//!   cross transversally.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::broken::{self, approx, may_contain, may_meet, Approx, RayIndex};
use crate::coeff::{Monomial, Series, USet};
use crate::error::{Error, Result};
use crate::lattice::{
    format_rational, index, primitive, r_map, rat_int, sign, wedge, wedge_rat, DegreeVec,
    LatticeVec, RatPoint, Rational,
};

/// A ray of the scattering diagram.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ray {
    pub base: RatPoint,
    pub degree: DegreeVec,
    pub uset: USet,
    pub mult: Rational,
    pub wout: i64,
    pub dir: LatticeVec,
}

impl Ray {
    pub fn new(base: RatPoint, degree: DegreeVec, uset: USet, mult: Rational) -> Result<Ray> {
        let r = r_map(degree);
        let wout = index(r)?;
        let dir = -primitive(r)?;
        Ok(Ray {
            base,
            degree,
            uset,
            mult,
            wout,
            dir,
        })
    }

    /// Coefficient `c` of the wall function `1 + c u_I z^degree`.
    pub fn coefficient(&self) -> Rational {
        &self.mult * BigInt::from(self.wout)
    }

    pub fn wall_function(&self) -> Series {
        let mut f = Series::one();
        f.add_term(Monomial::new(0, self.degree, self.uset), self.coefficient());
        f
    }

    pub fn wall(&self) -> Wall {
        Wall {
            base: self.base.clone(),
            dir: self.dir,
            degree: self.degree,
            uset: self.uset,
            coeff: self.coefficient(),
        }
    }

    /// Parameter `t` with `base + t dir = p`, if `p` is on the supporting line.
    pub fn param_of(&self, p: &RatPoint) -> Option<Rational> {
        line_param(&self.base, self.dir, p)
    }

    /// Whether `p` lies on the support (base included).
    pub fn contains(&self, p: &RatPoint) -> bool {
        self.param_of(p).is_some_and(|t| !t.is_negative())
    }
}

/// A wall as seen by path-ordered products: a ray support with a function.
/// Lines are represented by two opposite walls sharing the function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Wall {
    pub base: RatPoint,
    pub dir: LatticeVec,
    pub degree: DegreeVec,
    pub uset: USet,
    pub coeff: Rational,
}

impl Wall {
    pub fn contains(&self, p: &RatPoint) -> bool {
        line_param(&self.base, self.dir, p).is_some_and(|t| !t.is_negative())
    }
}

fn line_param(base: &RatPoint, dir: LatticeVec, p: &RatPoint) -> Option<Rational> {
    let w = p.sub(base);
    if !wedge_rat(&w, dir).is_zero() {
        return None;
    }
    Some(if dir.x != 0 {
        w.0 / BigInt::from(dir.x)
    } else {
        w.1 / BigInt::from(dir.y)
    })
}

/// Transversal intersection of `a0 + s u` and `b0 + t v`: returns `(s, t)`.
pub(crate) fn intersect(
    a0: &RatPoint,
    u: LatticeVec,
    b0: &RatPoint,
    v: LatticeVec,
) -> Option<(Rational, Rational)> {
    let det = wedge(u, v);
    if det == 0 {
        return None;
    }
    let w = b0.sub(a0);
    let det = Rational::from_integer(BigInt::from(det));
    let s = wedge_rat(&w, v) / &det;
    let t = wedge_rat(&w, u) / &det;
    Some((s, t))
}

/// A point where rays meet or begin, with the indices of all rays through it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SingularPoint {
    pub point: RatPoint,
    pub rays: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagram {
    pub points: Vec<RatPoint>,
    pub rays: Vec<Ray>,
    pub singular_points: Vec<SingularPoint>,
}

#[derive(Clone, Debug)]
pub struct BuildOptions {
    /// Only build rays whose marked-point set has at most this many elements.
    pub max_uset: Option<usize>,
    /// Compute `singular_points` (quadratic in the number of rays).
    pub singular_points: bool,
    /// Process candidate pairs and points in reverse order.
    pub reverse_order: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            max_uset: None,
            singular_points: true,
            reverse_order: false,
        }
    }
}

impl Diagram {
    pub fn empty() -> Diagram {
        Diagram {
            points: Vec::new(),
            rays: Vec::new(),
            singular_points: Vec::new(),
        }
    }

    pub fn k(&self) -> usize {
        self.points.len()
    }

    pub fn walls(&self) -> Vec<Wall> {
        self.rays.iter().map(Ray::wall).collect()
    }

    pub(crate) fn ray_index(&self) -> RayIndex {
        RayIndex::new(&self.rays)
    }

    /// Indices of rays whose support contains `p`.
    pub fn rays_through(&self, p: &RatPoint) -> Vec<usize> {
        (0..self.rays.len())
            .filter(|&i| self.rays[i].contains(p))
            .collect()
    }
}

fn check_distinct(points: &[RatPoint]) -> Result<()> {
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if points[i] == points[j] {
                return Err(Error::DuplicatePoints(i + 1, j + 1));
            }
        }
    }
    Ok(())
}

/// The `3k` rays leaving the marked points along `-m_j`.
pub fn initial_rays(points: &[RatPoint]) -> Result<Vec<Ray>> {
    check_distinct(points)?;
    let mut rays = Vec::with_capacity(3 * points.len());
    for (i, p) in points.iter().enumerate() {
        for j in 0..3 {
            rays.push(Ray::new(
                p.clone(),
                DegreeVec::unit(j),
                USet::singleton(i + 1),
                Rational::one(),
            )?);
        }
    }
    Ok(rays)
}

pub fn build_diagram(points: &[RatPoint]) -> Result<Diagram> {
    build_diagram_with(points, &BuildOptions::default())
}

type RayKey = (USet, DegreeVec, RatPoint);

pub fn build_diagram_with(points: &[RatPoint], opts: &BuildOptions) -> Result<Diagram> {
    check_distinct(points)?;
    let k = points.len();
    let max_level = opts.max_uset.unwrap_or(k).min(k);
    let mut rays: Vec<Ray> = Vec::new();
    let mut by_uset: BTreeMap<USet, Vec<usize>> = BTreeMap::new();
    // Collision points of disjoint pairs, for the triple-point check.
    let mut collisions: HashMap<RatPoint, BTreeSet<usize>> = HashMap::new();

    for level in 1..=max_level {
        let mut fresh: BTreeMap<RayKey, Rational> = BTreeMap::new();

        // Rays based at marked points: broken lines ending at P_i that avoid i.
        let mut order: Vec<usize> = (1..=k).collect();
        if opts.reverse_order {
            order.reverse();
        }
        let index = RayIndex::new(&rays);
        for &i in &order {
            let p = &points[i - 1];
            let allowed = USet::full(k).without(i);
            let lines = broken::trace(&rays, &index, p, allowed, level - 1, None)
                .map_err(|e| match e {
                    Error::DegenerateEndpoint(msg) => {
                        Error::DegeneratePosition(format!("broken lines ending at P{i}: {msg}"))
                    }
                    e => e,
                })?;
            for line in lines {
                if line.final_term.uset.len() != level - 1 {
                    continue;
                }
                let key = (
                    line.final_term.uset.union(USet::singleton(i)),
                    line.final_term.degree,
                    p.clone(),
                );
                *fresh.entry(key).or_insert_with(Rational::zero) += &line.final_term.coeff;
            }
        }

        // Collisions of disjoint pairs with |I_A| + |I_B| = level.
        let approx_bases: Vec<Approx> = rays.iter().map(|r| approx(&r.base)).collect();
        let mut pairs: Vec<(USet, USet)> = Vec::new();
        for &ua in by_uset.keys() {
            for &ub in by_uset.keys() {
                if ua.bits() < ub.bits() && ua.is_disjoint(ub) && ua.len() + ub.len() == level {
                    pairs.push((ua, ub));
                }
            }
        }
        if opts.reverse_order {
            pairs.reverse();
        }
        for (ua, ub) in pairs {
            let mut ia = by_uset[&ua].clone();
            let mut ib = by_uset[&ub].clone();
            if opts.reverse_order {
                ia.reverse();
                ib.reverse();
            }
            for &a in &ia {
                for &b in &ib {
                    let (ra, rb) = (&rays[a], &rays[b]);
                    if wedge(ra.dir, rb.dir) != 0
                        && !may_meet(approx_bases[a], ra.dir, approx_bases[b], rb.dir)
                    {
                        continue;
                    }
                    if let Some((p, child)) = collide(ra, rb)? {
                        let set = collisions.entry(p.clone()).or_default();
                        set.insert(a);
                        set.insert(b);
                        if let Some((degree, mult)) = child {
                            let key = (ua.union(ub), degree, p);
                            *fresh.entry(key).or_insert_with(Rational::zero) += mult;
                        }
                    }
                }
            }
        }

        for ((uset, degree, base), mult) in fresh {
            if mult.is_zero() {
                continue;
            }
            let ray = Ray::new(base, degree, uset, mult).map_err(|_| {
                Error::DegeneratePosition(format!(
                    "tree of degree {degree} through {uset} has no outgoing direction"
                ))
            })?;
            check_foreign_points(&ray, points)?;
            by_uset.entry(uset).or_default().push(rays.len());
            rays.push(ray);
        }
    }

    check_triple_points(&rays, &collisions)?;

    let mut diagram = Diagram {
        points: points.to_vec(),
        rays,
        singular_points: Vec::new(),
    };
    if opts.singular_points {
        diagram.singular_points = singular_points(&diagram.rays);
    }
    Ok(diagram)
}

/// Where two rays with disjoint marked-point sets cross.
/// Returns the crossing point and, when the child is nonzero, its degree and multiplicity.
#[allow(clippy::type_complexity)]
fn collide(a: &Ray, b: &Ray) -> Result<Option<(RatPoint, Option<(DegreeVec, Rational)>)>> {
    match intersect(&a.base, a.dir, &b.base, b.dir) {
        None => {
            // Parallel: overlapping supports would make the diagram non-generic.
            if let Some(t) = a.param_of(&b.base) {
                let same_way = a.dir == b.dir;
                if same_way || !t.is_negative() {
                    return Err(Error::DegeneratePosition(format!(
                        "parallel rays with disjoint marked points overlap near {}",
                        b.base
                    )));
                }
            }
            Ok(None)
        }
        Some((s, t)) => {
            if s.is_negative() || t.is_negative() {
                return Ok(None);
            }
            let p = a.base.offset(&s, a.dir);
            if s.is_zero() || t.is_zero() {
                return Err(Error::DegeneratePosition(format!(
                    "ray with marked points {} passes through the start {} of a ray with marked points {}",
                    if s.is_zero() { b.uset } else { a.uset },
                    p,
                    if s.is_zero() { a.uset } else { b.uset },
                )));
            }
            let ra = r_map(a.degree);
            let rb = r_map(b.degree);
            let w = wedge(ra, rb).abs();
            if w == 0 {
                return Ok(Some((p, None)));
            }
            let degree = a.degree + b.degree;
            if r_map(degree).is_zero() {
                return Err(Error::DegeneratePosition(format!(
                    "collision at {p} produces a tree with r(degree) = 0"
                )));
            }
            let mult = &a.mult * &b.mult * BigInt::from(w);
            Ok(Some((p, Some((degree, mult)))))
        }
    }
}

fn check_foreign_points(ray: &Ray, points: &[RatPoint]) -> Result<()> {
    for (j, p) in points.iter().enumerate() {
        if *p == ray.base && ray.uset.contains(j + 1) {
            continue;
        }
        if ray.contains(p) {
            return Err(Error::DegeneratePosition(format!(
                "ray of degree {} with marked points {} passes through P{}",
                ray.degree,
                ray.uset,
                j + 1
            )));
        }
    }
    Ok(())
}

fn check_triple_points(rays: &[Ray], collisions: &HashMap<RatPoint, BTreeSet<usize>>) -> Result<()> {
    for (p, set) in collisions {
        if set.len() < 3 {
            continue;
        }
        let ids: Vec<usize> = set.iter().copied().collect();
        for a in 0..ids.len() {
            for b in a + 1..ids.len() {
                for c in b + 1..ids.len() {
                    let (ua, ub, uc) = (rays[ids[a]].uset, rays[ids[b]].uset, rays[ids[c]].uset);
                    if ua.is_disjoint(ub) && ua.is_disjoint(uc) && ub.is_disjoint(uc) {
                        return Err(Error::DegeneratePosition(format!(
                            "three rays with disjoint marked points {ua}, {ub}, {uc} meet at {p}"
                        )));
                    }
                }
            }
        }
    }
    Ok(())
}

/// All ray starts and pairwise intersection points, with incident rays.
pub fn singular_points(rays: &[Ray]) -> Vec<SingularPoint> {
    let mut map: BTreeMap<RatPoint, BTreeSet<usize>> = BTreeMap::new();
    for (i, r) in rays.iter().enumerate() {
        map.entry(r.base.clone()).or_default().insert(i);
    }
    let bases: Vec<Approx> = rays.iter().map(|r| approx(&r.base)).collect();
    for a in 0..rays.len() {
        for b in a + 1..rays.len() {
            let (ra, rb) = (&rays[a], &rays[b]);
            if wedge(ra.dir, rb.dir) == 0 || !may_meet(bases[a], ra.dir, bases[b], rb.dir) {
                continue;
            }
            if let Some((s, t)) = intersect(&ra.base, ra.dir, &rb.base, rb.dir) {
                if !s.is_negative() && !t.is_negative() {
                    let set = map.entry(ra.base.offset(&s, ra.dir)).or_default();
                    set.insert(a);
                    set.insert(b);
                }
            }
        }
    }
    // Rays passing through a start point of another ray.
    let starts: Vec<RatPoint> = map.keys().cloned().collect();
    for p in &starts {
        let pf = approx(p);
        for (i, r) in rays.iter().enumerate() {
            if may_contain(bases[i], r.dir, pf) && r.contains(p) {
                map.get_mut(p).unwrap().insert(i);
            }
        }
    }
    map.into_iter()
        .map(|(point, rays)| SingularPoint {
            point,
            rays: rays.into_iter().collect(),
        })
        .collect()
}

/// Sign of `<n0, .>` relative to `wedge(dir, .)`, fixed by `<n0, travel> < 0`.
fn n0_sign(dir: LatticeVec, travel_wedge: i32) -> Result<i64> {
    match travel_wedge {
        0 => Err(Error::TangentialCrossing),
        s => {
            let _ = dir;
            Ok(-(s as i64))
        }
    }
}

/// Apply the wall-crossing automorphism of `wall` to `s` for a path moving
/// with `travel_wedge = sign(wedge(dir, travel))`.
fn cross_wall(s: &Series, wall: &Wall, travel_wedge: i32) -> Result<Series> {
    let eps = n0_sign(wall.dir, travel_wedge)?;
    let mut out = Series::zero();
    for (m, c) in s.iter() {
        out.add_term(*m, c.clone());
        if !m.uset.is_disjoint(wall.uset) {
            continue;
        }
        let e = eps * wedge(wall.dir, r_map(m.degree));
        if e == 0 {
            continue;
        }
        let mono = Monomial::new(m.qpow, m.degree + wall.degree, m.uset.union(wall.uset));
        out.add_term(mono, c * &wall.coeff * BigInt::from(e));
    }
    Ok(out)
}

/// Wall-crossing automorphism of `ray` for a path crossing it along `travel`:
/// `z^m -> z^m f^{<n0, r(m)>}` with `<n0, travel> < 0`.
pub fn cross(s: &Series, ray: &Ray, travel: LatticeVec) -> Result<Series> {
    cross_wall(s, &ray.wall(), wedge(ray.dir, travel).signum() as i32)
}

struct Crossing {
    lambda: Rational,
    wall: usize,
    travel_wedge: i32,
}

/// Path-ordered product along a polyline over an explicit wall list.
pub fn path_product_walls(s: &Series, path: &[RatPoint], walls: &[Wall]) -> Result<Series> {
    for v in path {
        if walls.iter().any(|w| w.contains(v)) {
            return Err(Error::EndpointOnSupport(Box::new(v.clone())));
        }
    }
    let mut cur = s.clone();
    for seg in path.windows(2) {
        let (a, b) = (&seg[0], &seg[1]);
        if a == b {
            continue;
        }
        let delta = b.sub(a);
        let mut crossings: Vec<Crossing> = Vec::new();
        for (wi, w) in walls.iter().enumerate() {
            // a + lambda * delta = base + t * dir
            let det = &delta.0 * BigInt::from(w.dir.y) - &delta.1 * BigInt::from(w.dir.x);
            let off = w.base.sub(a);
            if det.is_zero() {
                // Parallel; a segment running along the support would be tangential.
                if wedge_rat(&off, w.dir).is_zero() {
                    let ta = line_param(&w.base, w.dir, a).unwrap();
                    let tb = line_param(&w.base, w.dir, b).unwrap();
                    if !ta.is_negative() || !tb.is_negative() {
                        return Err(Error::TangentialCrossing);
                    }
                }
                continue;
            }
            let lambda = wedge_rat(&off, w.dir) / &det;
            if !lambda.is_positive() || lambda >= Rational::one() {
                continue;
            }
            let t = (&off.0 * &delta.1 - &off.1 * &delta.0) / &det;
            if t.is_negative() {
                continue;
            }
            if t.is_zero() {
                return Err(Error::PathHitsSingularPoint(Box::new(w.base.clone())));
            }
            let tw = sign(&(&delta.1 * BigInt::from(w.dir.x) - &delta.0 * BigInt::from(w.dir.y)));
            crossings.push(Crossing {
                lambda,
                wall: wi,
                travel_wedge: tw,
            });
        }
        crossings.sort_by(|x, y| x.lambda.cmp(&y.lambda).then(x.wall.cmp(&y.wall)));
        for pair in crossings.windows(2) {
            if pair[0].lambda == pair[1].lambda {
                let (d0, d1) = (walls[pair[0].wall].dir, walls[pair[1].wall].dir);
                if wedge(d0, d1) != 0 {
                    let p = RatPoint::new(
                        &a.x + &pair[0].lambda * &delta.0,
                        &a.y + &pair[0].lambda * &delta.1,
                    );
                    return Err(Error::PathHitsSingularPoint(Box::new(p)));
                }
            }
        }
        for c in crossings {
            cur = cross_wall(&cur, &walls[c.wall], c.travel_wedge)?;
        }
    }
    Ok(cur)
}

/// Path-ordered product `theta_{path, D}` applied to `s`.
pub fn path_product(s: &Series, path: &[RatPoint], diag: &Diagram) -> Result<Series> {
    path_product_walls(s, path, &diag.walls())
}

/// A violation found by [`check_consistency`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsistencyFailure {
    pub point: RatPoint,
    pub generator: usize,
    pub image: crate::coeff::Series,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub checked: usize,
    pub failures: Vec<ConsistencyFailure>,
}

impl ConsistencyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Corner directions for small loops; rotated until no corner is parallel to
/// an incident wall.
const LOOP_CORNERS: [[LatticeVec; 4]; 4] = [
    [
        LatticeVec::new(7, 3),
        LatticeVec::new(-3, 7),
        LatticeVec::new(-7, -3),
        LatticeVec::new(3, -7),
    ],
    [
        LatticeVec::new(11, 5),
        LatticeVec::new(-5, 11),
        LatticeVec::new(-11, -5),
        LatticeVec::new(5, -11),
    ],
    [
        LatticeVec::new(13, 2),
        LatticeVec::new(-2, 13),
        LatticeVec::new(-13, -2),
        LatticeVec::new(2, -13),
    ],
    [
        LatticeVec::new(17, 9),
        LatticeVec::new(-9, 17),
        LatticeVec::new(-17, -9),
        LatticeVec::new(9, -17),
    ],
];

/// The walls of the diagram seen by an arbitrarily small loop around `p`:
/// rays starting at `p` stay rays, rays passing through `p` become lines.
pub fn local_walls(diag: &Diagram, p: &RatPoint, incident: &[usize]) -> Vec<Wall> {
    let mut walls = Vec::new();
    for &i in incident {
        let ray = &diag.rays[i];
        let mut w = ray.wall();
        w.base = p.clone();
        let through = ray.base != *p;
        walls.push(w.clone());
        if through {
            w.dir = -w.dir;
            walls.push(w);
        }
    }
    walls
}

/// Product around a small counterclockwise loop at `p`, applied to `s`.
pub fn small_loop_product(s: &Series, p: &RatPoint, walls: &[Wall]) -> Result<Series> {
    let corners = LOOP_CORNERS
        .iter()
        .find(|cs| {
            cs.iter()
                .all(|c| walls.iter().all(|w| wedge(*c, w.dir) != 0))
        })
        .expect("one of the loop shapes avoids every wall direction");
    let one = rat_int(1);
    let mut path: Vec<RatPoint> = corners.iter().map(|c| p.offset(&one, *c)).collect();
    path.push(path[0].clone());
    path_product_walls(s, &path, walls)
}

/// Verify that small loops around every singular point away from the marked
/// points act trivially on `z^{t_0}, z^{t_1}, z^{t_2}`.
pub fn check_consistency(diag: &Diagram) -> Result<ConsistencyReport> {
    let sing = if diag.singular_points.is_empty() && !diag.rays.is_empty() {
        singular_points(&diag.rays)
    } else {
        diag.singular_points.clone()
    };
    let mut report = ConsistencyReport::default();
    for sp in &sing {
        if diag.points.contains(&sp.point) {
            continue;
        }
        report.checked += 1;
        let walls = local_walls(diag, &sp.point, &sp.rays);
        for j in 0..3 {
            let x = Series::x(j);
            let image = small_loop_product(&x, &sp.point, &walls)?;
            if image != x {
                report.failures.push(ConsistencyFailure {
                    point: sp.point.clone(),
                    generator: j,
                    image,
                });
            }
        }
    }
    Ok(report)
}

/// Wire form of a ray.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RayRecord {
    pub base: [String; 2],
    pub degree: [u32; 3],
    pub uset: Vec<usize>,
    pub mult: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SingularRecord {
    pub point: [String; 2],
    pub rays: Vec<usize>,
}

/// Wire form of a diagram: `{"points": [...], "rays": [...], "singular": [...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramRecord {
    pub points: Vec<[String; 2]>,
    pub rays: Vec<RayRecord>,
    pub singular: Vec<SingularRecord>,
}

fn point_record(p: &RatPoint) -> [String; 2] {
    [format_rational(&p.x), format_rational(&p.y)]
}

fn parse_point(rec: &[String; 2]) -> Result<RatPoint> {
    Ok(RatPoint::new(
        crate::lattice::parse_rational(&rec[0])?,
        crate::lattice::parse_rational(&rec[1])?,
    ))
}

impl From<&Diagram> for DiagramRecord {
    fn from(d: &Diagram) -> Self {
        DiagramRecord {
            points: d.points.iter().map(point_record).collect(),
            rays: d
                .rays
                .iter()
                .map(|r| RayRecord {
                    base: point_record(&r.base),
                    degree: r.degree.0,
                    uset: r.uset.iter().collect(),
                    mult: format_rational(&r.mult),
                })
                .collect(),
            singular: d
                .singular_points
                .iter()
                .map(|s| SingularRecord {
                    point: point_record(&s.point),
                    rays: s.rays.clone(),
                })
                .collect(),
        }
    }
}

impl TryFrom<&DiagramRecord> for Diagram {
    type Error = Error;

    fn try_from(rec: &DiagramRecord) -> Result<Diagram> {
        let points = rec.points.iter().map(parse_point).collect::<Result<Vec<_>>>()?;
        let mut rays = Vec::with_capacity(rec.rays.len());
        for r in &rec.rays {
            if r.uset.iter().any(|&i| i == 0 || i > points.len()) {
                return Err(Error::Parse(format!("ray marked point out of range: {:?}", r.uset)));
            }
            rays.push(Ray::new(
                parse_point(&r.base)?,
                DegreeVec(r.degree),
                USet::from_indices(r.uset.iter().copied()),
                crate::lattice::parse_rational(&r.mult)?,
            )?);
        }
        let singular_points = rec
            .singular
            .iter()
            .map(|s| {
                if s.rays.iter().any(|&i| i >= rays.len()) {
                    return Err(Error::Parse("singular point references a missing ray".into()));
                }
                Ok(SingularPoint {
                    point: parse_point(&s.point)?,
                    rays: s.rays.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Diagram {
            points,
            rays,
            singular_points,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::rat;

    fn pt(x: i64, y: i64) -> RatPoint {
        RatPoint::from_ints(x, y)
    }

    #[test]
    fn initial_rays_shape() {
        assert!(initial_rays(&[]).unwrap().is_empty());
        let one = initial_rays(&[pt(0, 0)]).unwrap();
        assert_eq!(one.len(), 3);
        for (j, r) in one.iter().enumerate() {
            assert_eq!(r.degree, DegreeVec::unit(j));
            assert_eq!(r.uset, USet::singleton(1));
            assert_eq!(r.mult, rat_int(1));
            assert_eq!(r.wout, 1);
            assert_eq!(r.dir, -crate::lattice::FAN_RAYS[j]);
            let mut f = Series::one();
            f.add_term(Monomial::new(0, DegreeVec::unit(j), USet::singleton(1)), rat_int(1));
            assert_eq!(r.wall_function(), f);
        }
        assert_eq!(initial_rays(&[pt(0, 0), pt(1, 2)]).unwrap().len(), 6);
        assert_eq!(
            initial_rays(&[pt(0, 0), pt(0, 0)]),
            Err(Error::DuplicatePoints(1, 2))
        );
    }

    #[test]
    fn one_point_has_no_children() {
        let d = build_diagram(&[pt(0, 0)]).unwrap();
        assert_eq!(d.rays.len(), 3);
    }

    #[test]
    fn cross_bends_into_wall_degree() {
        let ray = &initial_rays(&[pt(0, 0)]).unwrap()[2];
        // Wall along -m2; n0 = (1,0) pairs to 1 with m1 when travel has negative x.
        let s = Series::x(1);
        let out = cross(&s, ray, LatticeVec::new(-1, 0)).unwrap();
        let mut expected = Series::x(1);
        expected.add_term(Monomial::new(0, DegreeVec::new(0, 1, 1), USet::singleton(1)), rat_int(1));
        assert_eq!(out, expected);

        let unchanged = cross(&Series::x(2), ray, LatticeVec::new(-1, 0)).unwrap();
        assert_eq!(unchanged, Series::x(2));

        let back = cross(&out, ray, LatticeVec::new(1, 0)).unwrap();
        assert_eq!(back, s);

        assert_eq!(
            cross(&s, ray, LatticeVec::new(0, 3)),
            Err(Error::TangentialCrossing)
        );
    }

    #[test]
    fn path_product_trivial_cases() {
        let d = build_diagram(&[pt(0, 0)]).unwrap();
        let s = Series::x(0);
        let path = [pt(5, 1), pt(6, 3)];
        assert_eq!(path_product(&s, &path, &d).unwrap(), s);
        // A loop that winds around nothing.
        let square = [pt(5, 1), pt(8, 1), pt(8, 4), pt(5, 4), pt(5, 1)];
        assert_eq!(path_product(&Series::x(1), &square, &d).unwrap(), Series::x(1));
        // Endpoint on a wall.
        assert!(matches!(
            path_product(&s, &[pt(-3, 0), pt(2, 5)], &d),
            Err(Error::EndpointOnSupport(_))
        ));
        // Through the base point.
        assert!(matches!(
            path_product(&s, &[pt(-1, 1), pt(1, -1)], &d),
            Err(Error::PathHitsSingularPoint(_))
        ));
    }

    /// Two lines with nilpotent coefficients plus the outgoing child ray.
    fn basic_triple(m1: DegreeVec, m2: DegreeVec, c1: usize, c2: usize) -> Vec<Wall> {
        let origin = pt(0, 0);
        let mut walls = Vec::new();
        for (m, c) in [(m1, c1), (m2, c2)] {
            let r = r_map(m);
            let w = index(r).unwrap();
            let d = primitive(r).unwrap();
            for dir in [d, -d] {
                walls.push(Wall {
                    base: origin.clone(),
                    dir,
                    degree: m,
                    uset: USet::singleton(c),
                    coeff: rat_int(w),
                });
            }
        }
        let out = m1 + m2;
        let r = r_map(out);
        walls.push(Wall {
            base: origin,
            dir: -primitive(r).unwrap(),
            degree: out,
            uset: USet::from_indices([c1, c2]),
            coeff: rat_int(index(r).unwrap() * wedge(r_map(m1), r_map(m2)).abs()),
        });
        walls
    }

    #[test]
    fn basic_triple_loop_is_identity() {
        let cases = [
            (DegreeVec::unit(1), DegreeVec::unit(2)),
            (DegreeVec::new(0, 2, 0), DegreeVec::new(1, 0, 0)),
            (DegreeVec::new(0, 1, 1), DegreeVec::new(2, 0, 1)),
            (DegreeVec::new(3, 0, 1), DegreeVec::new(0, 2, 2)),
        ];
        for (m1, m2) in cases {
            let walls = basic_triple(m1, m2, 1, 2);
            for j in 0..3 {
                let x = Series::x(j);
                let image = small_loop_product(&x, &pt(0, 0), &walls).unwrap();
                assert_eq!(image, x, "m1 = {m1}, m2 = {m2}, generator {j}");
            }
        }
    }

    #[test]
    fn basic_triple_without_child_is_not_identity() {
        let mut walls = basic_triple(DegreeVec::unit(1), DegreeVec::unit(2), 1, 2);
        walls.pop();
        let image = small_loop_product(&Series::x(1), &pt(0, 0), &walls).unwrap();
        assert_ne!(image, Series::x(1));
    }

    #[test]
    fn overlapping_usets_commute_without_child() {
        let mut walls = basic_triple(DegreeVec::unit(1), DegreeVec::unit(2), 1, 1);
        walls.pop();
        for j in 0..3 {
            let image = small_loop_product(&Series::x(j), &pt(0, 0), &walls).unwrap();
            assert_eq!(image, Series::x(j));
        }
    }

    #[test]
    fn two_points_children_and_consistency() {
        let d = build_diagram(&[pt(0, 0), RatPoint::from_fracs((7, 3), (5, 2))]).unwrap();
        assert!(d.rays.len() > 6);
        for r in &d.rays {
            assert_eq!(r.uset.len() as u32, r.degree.total());
            assert!(r.mult.is_positive());
        }
        let report = check_consistency(&d).unwrap();
        assert!(report.checked > 0);
        assert!(report.passed(), "{:?}", report.failures);
    }

    #[test]
    fn foreign_point_on_ray_is_degenerate() {
        // P2 sits on the leftward ray of P1.
        let err = build_diagram(&[pt(0, 0), pt(-3, 0)]).unwrap_err();
        assert!(matches!(err, Error::DegeneratePosition(_)), "{err:?}");
    }

    #[test]
    fn json_round_trip() {
        let d = build_diagram(&[pt(0, 0), RatPoint::from_fracs((7, 3), (5, 2))]).unwrap();
        let rec = DiagramRecord::from(&d);
        let text = serde_json::to_string(&rec).unwrap();
        let back: DiagramRecord = serde_json::from_str(&text).unwrap();
        assert_eq!(Diagram::try_from(&back).unwrap(), d);
        assert_eq!(rec.rays[0].base, ["0/1".to_string(), "0/1".to_string()]);
        let _ = rat(1, 2);
    }
}
