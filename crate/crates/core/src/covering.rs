//! Greedy maximal separated sets on compact surfaces, with cover,
//! overlap and containment certificates.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypflow::geometry::{disk_circle, disk_dist, disk_to_uhp, mobius, uhp_to_disk};
use crate::hypflow::{FuchsianGroup, SCALE_CAP};

pub const MIN_TESTGRID: usize = 10_000;
/// Candidate stream density: at least this many points per r^2 of area.
const CANDIDATES_PER_R2: f64 = 64.0;

/// A compact surface seen through a chart of its fundamental domain.
/// Points are chart coordinates; every lift of a point that can lie within
/// `reach` of the domain is available through `lifts`.
pub trait CoverSpace: Sync {
    fn volume(&self) -> f64;
    fn ball_volume(&self, rho: f64) -> f64;
    /// Largest admissible radius.
    fn max_radius(&self) -> f64;
    /// Maps the unit square onto the domain; None when rejected.
    fn sample(&self, u: [f64; 2]) -> Option<C64>;
    /// Distance in the chart (the covering space), not on the quotient.
    fn chart_dist(&self, a: C64, b: C64) -> f64;
    /// Euclidean center and radius of the chart image of a ball.
    fn chart_ball(&self, p: C64, rho: f64) -> (C64, f64);
    fn lifts(&self, p: C64, reach: f64) -> Vec<C64>;
    fn reduce(&self, p: C64) -> Result<C64>;
    /// Coordinates reported for a chart point.
    fn report_coords(&self, p: C64) -> [f64; 2];

    /// Quotient distance by brute force over lifts.
    fn dist(&self, a: C64, b: C64, reach: f64) -> f64 {
        self.lifts(b, reach)
            .into_iter()
            .map(|l| self.chart_dist(a, l))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Compact hyperbolic surface in the Poincaré disk, domain centered at 0.
pub struct HyperbolicSurface {
    pub group: FuchsianGroup,
    /// Translates keyed by how far they move the center.
    translates: Vec<(f64, crate::hypflow::geometry::Sl2)>,
}

impl HyperbolicSurface {
    pub fn new(group: FuchsianGroup) -> Self {
        let r = 2.0 * group.circumradius + 4.0 * SCALE_CAP + 0.1;
        let translates = group
            .translates_within(r)
            .into_iter()
            .map(|g| {
                (
                    crate::hypflow::geometry::dist(mobius(&g, group.center), group.center),
                    g,
                )
            })
            .collect();
        HyperbolicSurface { group, translates }
    }

    pub fn bolza() -> Self {
        Self::new(FuchsianGroup::bolza())
    }
}

impl CoverSpace for HyperbolicSurface {
    fn volume(&self) -> f64 {
        self.group.area()
    }

    fn ball_volume(&self, rho: f64) -> f64 {
        2.0 * PI * (rho.cosh() - 1.0)
    }

    fn max_radius(&self) -> f64 {
        SCALE_CAP
    }

    fn sample(&self, u: [f64; 2]) -> Option<C64> {
        let big = self.group.circumradius + 1e-9;
        let rho = (1.0 + u[0] * (big.cosh() - 1.0)).acosh();
        let w = C64::from_polar((rho / 2.0).tanh(), 2.0 * PI * u[1]);
        self.group.in_domain(disk_to_uhp(w), 0.0).then_some(w)
    }

    fn chart_dist(&self, a: C64, b: C64) -> f64 {
        disk_dist(a, b)
    }

    fn chart_ball(&self, p: C64, rho: f64) -> (C64, f64) {
        disk_circle(p, rho)
    }

    fn lifts(&self, p: C64, reach: f64) -> Vec<C64> {
        let z = disk_to_uhp(p);
        let d0 = disk_dist(p, C64::new(0.0, 0.0));
        let lim = self.group.circumradius + reach;
        self.translates
            .iter()
            .take_while(|(d, _)| *d <= lim + d0 + 1e-9)
            .map(|(_, g)| uhp_to_disk(mobius(g, z)))
            .filter(|w| disk_dist(*w, C64::new(0.0, 0.0)) <= lim + 1e-9)
            .collect()
    }

    fn reduce(&self, p: C64) -> Result<C64> {
        let z = disk_to_uhp(p);
        let (g, _) = self.group.reduce_point(z)?;
        Ok(uhp_to_disk(mobius(&g, z)))
    }

    fn report_coords(&self, p: C64) -> [f64; 2] {
        let z = disk_to_uhp(p);
        [z.re, z.im]
    }
}

/// The unit square with periodic boundary.
pub struct FlatTorus;

impl CoverSpace for FlatTorus {
    fn volume(&self) -> f64 {
        1.0
    }

    fn ball_volume(&self, rho: f64) -> f64 {
        PI * rho * rho
    }

    fn max_radius(&self) -> f64 {
        f64::INFINITY
    }

    fn sample(&self, u: [f64; 2]) -> Option<C64> {
        Some(C64::new(u[0], u[1]))
    }

    fn chart_dist(&self, a: C64, b: C64) -> f64 {
        (a - b).norm()
    }

    fn chart_ball(&self, p: C64, rho: f64) -> (C64, f64) {
        (p, rho)
    }

    fn lifts(&self, p: C64, reach: f64) -> Vec<C64> {
        let k = reach.ceil() as i64 + 1;
        let mut out = Vec::new();
        for i in -k..=k {
            for j in -k..=k {
                let q = p + C64::new(i as f64, j as f64);
                if q.re >= -reach && q.re <= 1.0 + reach && q.im >= -reach && q.im <= 1.0 + reach {
                    out.push(q);
                }
            }
        }
        out
    }

    fn reduce(&self, p: C64) -> Result<C64> {
        let wrap = |x: f64| {
            let y = x.rem_euclid(1.0);
            if y >= 1.0 {
                0.0
            } else {
                y
            }
        };
        Ok(C64::new(wrap(p.re), wrap(p.im)))
    }

    fn report_coords(&self, p: C64) -> [f64; 2] {
        [p.re, p.im]
    }
}

/// Uniform grid over lifted centers in chart coordinates.
pub struct LiftIndex {
    cell: f64,
    reach: f64,
    cells: HashMap<(i64, i64), Vec<(usize, C64)>>,
    points: Vec<C64>,
}

impl LiftIndex {
    pub fn new(cell: f64, reach: f64) -> Self {
        LiftIndex {
            cell,
            reach,
            cells: HashMap::new(),
            points: Vec::new(),
        }
    }

    fn key(&self, p: C64) -> (i64, i64) {
        ((p.re / self.cell).floor() as i64, (p.im / self.cell).floor() as i64)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[C64] {
        &self.points
    }

    pub fn insert<S: CoverSpace + ?Sized>(&mut self, space: &S, p: C64) -> usize {
        let id = self.points.len();
        self.points.push(p);
        for l in space.lifts(p, self.reach) {
            let k = self.key(l);
            self.cells.entry(k).or_default().push((id, l));
        }
        id
    }

    /// Every lifted center within rho of p, as (id, lift, distance).
    pub fn within<S: CoverSpace + ?Sized>(&self, space: &S, p: C64, rho: f64) -> Vec<(usize, C64, f64)> {
        let (c, er) = space.chart_ball(p, rho);
        let lo = self.key(c - C64::new(er, er));
        let hi = self.key(c + C64::new(er, er));
        let mut out = Vec::new();
        for i in lo.0..=hi.0 {
            for j in lo.1..=hi.1 {
                if let Some(v) = self.cells.get(&(i, j)) {
                    for &(id, l) in v {
                        let d = space.chart_dist(p, l);
                        if d <= rho {
                            out.push((id, l, d));
                        }
                    }
                }
            }
        }
        out
    }

    /// Quotient distance to the nearest center, if one is within rho.
    pub fn nearest<S: CoverSpace + ?Sized>(&self, space: &S, p: C64, rho: f64) -> Option<f64> {
        self.within(space, p, rho)
            .into_iter()
            .map(|x| x.2)
            .min_by(f64::total_cmp)
    }

    /// Number of distinct centers within rho (closed ball).
    pub fn count_within<S: CoverSpace + ?Sized>(&self, space: &S, p: C64, rho: f64) -> usize {
        let mut ids: Vec<usize> = self.within(space, p, rho).into_iter().map(|x| x.0).collect();
        ids.sort_unstable();
        ids.dedup();
        ids.len()
    }
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Halton points in the domain from bases (b1, b2), skipping rejected ones.
pub fn halton_points<S: CoverSpace + ?Sized>(space: &S, n: usize, bases: (u64, u64)) -> Vec<C64> {
    let mut out = Vec::with_capacity(n);
    let mut i = 1u64;
    while out.len() < n {
        if let Some(p) = space.sample([radical_inverse(i, bases.0), radical_inverse(i, bases.1)]) {
            out.push(p);
        }
        i += 1;
    }
    out
}

/// Intersections of two circles of chart radius given by their
/// Euclidean images.
fn circle_intersections(c1: (C64, f64), c2: (C64, f64)) -> Vec<C64> {
    let d = (c2.0 - c1.0).norm();
    if d == 0.0 || d > c1.1 + c2.1 || d < (c1.1 - c2.1).abs() {
        return Vec::new();
    }
    let a = (c1.1 * c1.1 - c2.1 * c2.1 + d * d) / (2.0 * d);
    let h = (c1.1 * c1.1 - a * a).max(0.0).sqrt();
    let u = (c2.0 - c1.0) / d;
    let m = c1.0 + u * a;
    let n = C64::new(-u.im, u.re);
    vec![m + n * h, m - n * h]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverReport {
    pub r: f64,
    pub centers: Vec<[f64; 2]>,
    #[serde(rename = "N")]
    pub count: usize,
    pub c1_hat: f64,
    /// Largest number of centers in a closed 2r ball, maximized exactly
    /// over the arrangement of 2r circles.
    pub c2_hat: usize,
    /// Largest number of centers within 2r of a testgrid point.
    pub c2_testgrid: usize,
    /// Packing bound V(7r/3) / V(r/3) on c2.
    pub c2_bound: f64,
    pub min_separation: f64,
    /// Sum of the r/3 ball volumes divided by the total volume.
    pub packing_fraction: f64,
    pub cover_ok: bool,
    pub containment_ok: bool,
    pub testgrid_size: usize,
    pub candidates: usize,
    /// Centers added at uncovered circle intersections after the stream.
    pub vertex_insertions: usize,
    #[serde(skip)]
    pub chart_centers: Vec<C64>,
}

impl CoverReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn sweep_csv(reports: &[CoverReport]) -> String {
        let mut s = String::from("r,N,c1_hat,c2_hat\n");
        for r in reports {
            s.push_str(&format!("{},{},{:e},{}\n", r.r, r.count, r.c1_hat, r.c2_hat));
        }
        s
    }
}

fn build_index<S: CoverSpace + ?Sized>(space: &S, r: f64, centers: &[C64]) -> LiftIndex {
    let reach = 4.0 * r * (1.0 + 1e-9);
    let (_, er) = space.chart_ball(C64::new(0.0, 0.0), 2.0 * r / 3.0);
    let mut idx = LiftIndex::new(er.max(1e-3), reach);
    for &c in centers {
        idx.insert(space, c);
    }
    idx
}

/// Greedy maximal 2r/3-separated set and its certificates.
///
/// Candidates are a seed-shuffled Halton stream of max(testgrid, 64 vol/r^2)
/// domain points. After the stream, every intersection point of two 2r/3
/// circles that no center covers gets a center just outside both circles,
/// until none remain; this makes the family maximal on the whole surface,
/// not just on the candidates.
pub fn greedy_cover<S: CoverSpace + ?Sized>(space: &S, r: f64, testgrid: usize, seed: u64) -> Result<CoverReport> {
    greedy_cover_with(space, r, testgrid, None, seed)
}

/// As `greedy_cover` with an explicit candidate count.
pub fn greedy_cover_with<S: CoverSpace + ?Sized>(
    space: &S,
    r: f64,
    testgrid: usize,
    candidates: Option<usize>,
    seed: u64,
) -> Result<CoverReport> {
    if !(r > 0.0 && r <= space.max_radius()) {
        return Err(Error::Invalid(format!(
            "radius {r} outside (0, {}]",
            space.max_radius()
        )));
    }
    if testgrid < MIN_TESTGRID {
        return Err(Error::Invalid(format!("testgrid {testgrid} below {MIN_TESTGRID}")));
    }
    let vol = space.volume();
    let n_cand = candidates.unwrap_or_else(|| testgrid.max((CANDIDATES_PER_R2 * vol / (r * r)).ceil() as usize));
    let spacing = (vol / n_cand as f64).sqrt();
    if spacing > r / 6.0 {
        return Err(Error::GridTooCoarse {
            spacing,
            limit: r / 6.0,
        });
    }
    let sep = 2.0 * r / 3.0;
    let mut cand = halton_points(space, n_cand, (2, 3));
    cand.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut idx = build_index(space, r, &[]);
    for p in cand {
        if idx.nearest(space, p, sep).is_none_or(|d| d >= sep) {
            idx.insert(space, p);
        }
    }
    let vertex_insertions = fill_vertices(space, &mut idx, sep)?;
    let centers = idx.points().to_vec();

    let tests = halton_points(space, testgrid, (5, 7));
    let nearest: Vec<f64> = tests
        .par_iter()
        .map(|&p| idx.nearest(space, p, r).unwrap_or(f64::INFINITY))
        .collect();
    let c2_testgrid = tests
        .par_iter()
        .map(|&p| idx.count_within(space, p, 2.0 * r))
        .max()
        .unwrap_or(0);
    let cover_ok = nearest.iter().all(|d| *d <= r);
    let containment_ok = nearest.iter().all(|d| *d <= sep);

    let c2_hat = max_depth(space, &idx, 2.0 * r);
    let min_separation = min_separation(space, &idx, 4.0 * r);
    let n = centers.len();
    Ok(CoverReport {
        r,
        centers: centers.iter().map(|&c| space.report_coords(c)).collect(),
        count: n,
        c1_hat: n as f64 * r * r,
        c2_hat,
        c2_testgrid,
        c2_bound: space.ball_volume(7.0 * r / 3.0) / space.ball_volume(r / 3.0),
        min_separation,
        packing_fraction: n as f64 * space.ball_volume(r / 3.0) / vol,
        cover_ok,
        containment_ok,
        testgrid_size: testgrid,
        candidates: n_cand,
        vertex_insertions,
        chart_centers: centers,
    })
}

fn fill_vertices<S: CoverSpace + ?Sized>(space: &S, idx: &mut LiftIndex, sep: f64) -> Result<usize> {
    let mut added = 0;
    let mut work: Vec<usize> = (0..idx.len()).collect();
    while let Some(i) = work.pop() {
        let p = idx.points()[i];
        let circle = space.chart_ball(p, sep);
        for (j, l, d) in idx.within(space, p, 2.0 * sep) {
            if j == i && d < 1e-9 {
                continue;
            }
            for raw in circle_intersections(circle, space.chart_ball(l, sep)) {
                let v = space.reduce(raw)?;
                if idx.nearest(space, v, sep).is_some_and(|e| e < sep * (1.0 - 1e-9)) {
                    continue;
                }
                // step out of both circles along the bisector
                let m = (p + l) * 0.5;
                let cand = space.reduce(raw + (raw - m) * 1e-7)?;
                if idx.nearest(space, cand, sep).is_none_or(|e| e >= sep) {
                    let id = idx.insert(space, cand);
                    work.push(id);
                    work.push(i);
                    added += 1;
                }
            }
        }
    }
    Ok(added)
}

/// Exact maximum over the surface of the number of centers in a closed
/// rho ball: the depth of the arrangement of rho circles peaks at a circle
/// intersection or, for a cell bounded by one circle, at its center.
fn max_depth<S: CoverSpace + ?Sized>(space: &S, idx: &LiftIndex, rho: f64) -> usize {
    let tol = rho * (1.0 + 1e-9);
    (0..idx.len())
        .into_par_iter()
        .map(|i| {
            let p = idx.points()[i];
            let mut best = idx.count_within(space, p, tol);
            let circle = space.chart_ball(p, rho);
            for (j, l, d) in idx.within(space, p, 2.0 * rho) {
                if j == i && d < 1e-9 {
                    continue;
                }
                for v in circle_intersections(circle, space.chart_ball(l, rho)) {
                    if let Ok(v) = space.reduce(v) {
                        best = best.max(idx.count_within(space, v, tol));
                    }
                }
            }
            best
        })
        .max()
        .unwrap_or(0)
}

fn min_separation<S: CoverSpace + ?Sized>(space: &S, idx: &LiftIndex, horizon: f64) -> f64 {
    (0..idx.len())
        .into_par_iter()
        .map(|i| {
            let p = idx.points()[i];
            idx.within(space, p, horizon)
                .into_iter()
                .filter(|&(j, _, _)| j != i)
                .map(|x| x.2)
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub tested: usize,
    /// Largest number of centers within 2r of a test center.
    pub max_overlap: usize,
    /// Largest distance from a test center to its nearest cover center.
    pub max_gap: f64,
}

/// Checks both covering properties at random test centers x: at most
/// c2_hat centers lie within 2r of x, and some center lies within 2r/3 of x,
/// so that B(x_i, r/3) is inside B(x, r).
pub fn verify_properties<S: CoverSpace + ?Sized>(
    space: &S,
    report: &CoverReport,
    testballs: usize,
    seed: u64,
) -> Result<Certificate> {
    let r = report.r;
    let idx = build_index(space, r, &report.chart_centers);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xs = Vec::with_capacity(testballs);
    while xs.len() < testballs {
        if let Some(p) = space.sample([rng.random(), rng.random()]) {
            xs.push(p);
        }
    }
    let mut max_overlap = 0;
    let mut max_gap: f64 = 0.0;
    for &x in &xs {
        let k = idx.count_within(space, x, 2.0 * r);
        if k > report.c2_hat {
            return Err(Error::CertificateFailure {
                property: "overlap",
                witness: space.report_coords(x),
            });
        }
        let gap = idx.nearest(space, x, 2.0 * r).unwrap_or(f64::INFINITY);
        if gap > 2.0 * r / 3.0 {
            return Err(Error::CertificateFailure {
                property: "containment",
                witness: space.report_coords(x),
            });
        }
        max_overlap = max_overlap.max(k);
        max_gap = max_gap.max(gap);
    }
    Ok(Certificate {
        tested: testballs,
        max_overlap,
        max_gap,
    })
}
