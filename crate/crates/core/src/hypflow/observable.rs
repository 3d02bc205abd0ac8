use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::frame::UnitTangentFrame;
use super::geometry::{self, dist, kak, mobius, mul, Sl2, I};
use super::group::FuchsianGroup;
use super::sample::chunk_rng;
use crate::error::{Error, Result};
use crate::symbols::{BumpProfile, HolderEstimate};

/// Scale cap for surface bumps.
pub const SCALE_CAP: f64 = 0.5;

/// A real function on the unit tangent bundle of the surface.
pub trait Observable: Sync {
    fn eval(&self, f: &UnitTangentFrame) -> f64;
    /// Exact Liouville mean when known.
    fn mean(&self) -> Option<f64>;
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceBumpSpec {
    pub center: [f64; 2],
    pub delta: f64,
    /// Reference direction at the center for the microlocalized variant.
    pub direction: Option<f64>,
    pub profile: BumpProfile,
}

impl SurfaceBumpSpec {
    pub fn localized(center: C64, delta: f64) -> Self {
        SurfaceBumpSpec {
            center: [center.re, center.im],
            delta,
            direction: None,
            profile: BumpProfile::standard(),
        }
    }
}

/// b(d(x, x0)/delta), optionally times b(psi/delta) where psi is the angle
/// between the direction and the reference direction transported along the
/// geodesic from x0.
#[derive(Clone, Debug)]
pub struct SurfaceBump {
    pub spec: SurfaceBumpSpec,
    /// Frames gamma g0 at the translates of x0 that can be within delta of
    /// a reduced point.
    lifts: Vec<Sl2>,
}

pub fn surface_observable(spec: SurfaceBumpSpec, group: &FuchsianGroup) -> Result<SurfaceBump> {
    if !(spec.delta > 0.0) {
        return Err(Error::InvalidScale(spec.delta));
    }
    if spec.delta > SCALE_CAP {
        return Err(Error::ScaleExceedsInjectivity {
            delta: spec.delta,
            cap: SCALE_CAP,
        });
    }
    let x0 = C64::new(spec.center[0], spec.center[1]);
    let g0 = UnitTangentFrame::at(x0, spec.direction.unwrap_or(PI / 2.0)).g;
    let lifts = if group.is_trivial() {
        vec![g0]
    } else {
        let d0 = dist(x0, group.center);
        let reach = group.circumradius + spec.delta + 1e-9;
        group
            .translates_within(reach + d0)
            .into_iter()
            .map(|gm| mul(&gm, &g0))
            .filter(|h| dist(mobius(h, I), group.center) <= reach)
            .collect()
    };
    Ok(SurfaceBump { spec, lifts })
}

impl SurfaceBump {
    pub fn lift_count(&self) -> usize {
        self.lifts.len()
    }

    /// Distance from the base of a reduced frame to the nearest lift of x0.
    pub fn distance_to_center(&self, z: C64) -> f64 {
        self.lifts
            .iter()
            .map(|h| dist(z, mobius(h, I)))
            .fold(f64::INFINITY, f64::min)
    }

    /// Integral of b(rho/delta) sinh(rho) over [0, delta], times 2 pi,
    /// divided by 4 pi(g - 1): the Liouville mean of the localized bump.
    pub fn exact_mean_for(&self, area: f64) -> f64 {
        let n = 1 << 14;
        let d = self.spec.delta;
        let h = d / n as f64;
        let f = |r: f64| self.spec.profile.eval(r / d) * r.sinh();
        let s: f64 = (1..n).map(|i| f(i as f64 * h)).sum::<f64>() + 0.5 * (f(0.0) + f(d));
        let radial = 2.0 * PI * s * h;
        let dir = match self.spec.direction {
            None => 1.0,
            Some(_) => {
                let m = 1 << 14;
                let hh = 2.0 * d / m as f64;
                (1..m)
                    .map(|i| self.spec.profile.eval((-d + i as f64 * hh) / d))
                    .sum::<f64>()
                    * hh
                    / (2.0 * PI)
            }
        };
        radial * dir / area
    }
}

impl Observable for SurfaceBump {
    fn eval(&self, f: &UnitTangentFrame) -> f64 {
        let z = f.base();
        let d = self.spec.delta;
        let mut best = 0.0f64;
        for h in &self.lifts {
            let r = dist(z, mobius(h, I));
            if r >= d {
                continue;
            }
            let mut v = self.spec.profile.eval(r / d);
            if self.spec.direction.is_some() {
                // h^{-1} g = k(alpha) a(s) k(beta); transported reference is
                // k(alpha) a(s) k(-alpha), so the relative rotation is alpha + beta
                let rel = mul(&geometry::inv(h), &f.g);
                let (al, _, be) = kak(&rel);
                let psi = (-2.0 * (al + be) + PI).rem_euclid(2.0 * PI) - PI;
                v *= self.spec.profile.eval(psi / d);
            }
            best = best.max(v);
        }
        best
    }

    fn mean(&self) -> Option<f64> {
        Some(self.exact_mean_for(4.0 * PI))
    }
}

/// f - c for an observable f.
pub struct Centered<'a, O: Observable> {
    pub inner: &'a O,
    pub shift: f64,
}

impl<O: Observable> Observable for Centered<'_, O> {
    fn eval(&self, f: &UnitTangentFrame) -> f64 {
        self.inner.eval(f) - self.shift
    }

    fn mean(&self) -> Option<f64> {
        self.inner.mean().map(|m| m - self.shift)
    }
}

pub struct ConstantObservable(pub f64);

impl Observable for ConstantObservable {
    fn eval(&self, _: &UnitTangentFrame) -> f64 {
        self.0
    }

    fn mean(&self) -> Option<f64> {
        Some(self.0)
    }
}

/// Pair-sampled Hölder norm of an observable near a point x0.
///
/// Pairs (p, q): p uniform by radius in the ball of radius `span` about x0,
/// q at distance span 2^-m (m = 0..12) from p in a random direction. The
/// seminorm is max |f(p) - f(q)| / d(p, q)^gamma; like the torus estimate
/// this is a lower bound on the true norm.
pub fn surface_holder<O: Observable>(
    obs: &O,
    x0: C64,
    span: f64,
    gamma: f64,
    pairs: usize,
    seed: u64,
) -> Result<HolderEstimate> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidGamma(gamma));
    }
    let mut rng = chunk_rng(seed, 0xa11ce);
    let base = UnitTangentFrame::at(x0, 0.0);
    let mut sup: f64 = 0.0;
    let mut semi: f64 = 0.0;
    let frame_at = |z: C64, th: f64| UnitTangentFrame::at(z, th);
    for _ in 0..pairs {
        let r = span * rng.random::<f64>();
        let th = 2.0 * PI * rng.random::<f64>();
        let p = mobius(&base.g, geometry::from_polar_at_i(r, th));
        let dir = 2.0 * PI * rng.random::<f64>();
        let fp = obs.eval(&frame_at(p, dir));
        sup = sup.max(fp.abs());
        for m in 0..13 {
            let s = span * 0.5f64.powi(m);
            let fq_frame = UnitTangentFrame::new(mul(&frame_at(p, dir).g, &geometry::a_t(s)));
            let q = fq_frame.base();
            let fq = obs.eval(&frame_at(q, dir));
            let d = dist(p, q);
            if d > 0.0 {
                semi = semi.max((fp - fq).abs() / d.powf(gamma));
            }
        }
    }
    Ok(HolderEstimate { sup, seminorm: semi })
}
