use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::geometry::{self, a_t, mobius, mul, rot, Sl2, I};
use super::group::FuchsianGroup;
use crate::error::{Error, Result};

/// Largest |t| accepted by `flow`.
pub const MAX_FLOW_TIME: f64 = 1e6;

/// A unit tangent vector of the surface as g in SL(2, R): base point g(i),
/// direction the image under g of the upward unit vector at i.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitTangentFrame {
    pub g: Sl2,
    pub reduced: bool,
}

impl UnitTangentFrame {
    pub fn new(g: Sl2) -> Self {
        UnitTangentFrame { g, reduced: false }
    }

    /// Frame at z pointing in direction theta (angle from the positive real axis).
    pub fn at(z: C64, theta: f64) -> Self {
        let s = z.im.sqrt();
        let nx = [[1.0, z.re], [0.0, 1.0]];
        let ay = [[s, 0.0], [0.0, 1.0 / s]];
        // rot(phi) turns the upward direction by -2 phi
        let phi = (PI / 2.0 - theta) / 2.0;
        UnitTangentFrame::new(mul(&nx, &mul(&ay, &rot(phi))))
    }

    pub fn base(&self) -> C64 {
        mobius(&self.g, I)
    }

    /// Direction angle in [0, 2 pi): pi/2 - 2 arg(c i + d).
    pub fn angle(&self) -> f64 {
        let c = self.g[1][0];
        let d = self.g[1][1];
        (PI / 2.0 - 2.0 * c.atan2(d)).rem_euclid(2.0 * PI)
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.g[0][0], self.g[0][1], self.g[1][0], self.g[1][1]]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        UnitTangentFrame::new([[a[0], a[1]], [a[2], a[3]]])
    }

    pub fn det(&self) -> f64 {
        geometry::det(&self.g)
    }
}

/// Moves the base point into the Dirichlet domain by the greedy descent.
pub fn reduce(frame: &UnitTangentFrame, group: &FuchsianGroup) -> Result<(UnitTangentFrame, usize)> {
    if group.is_trivial() {
        return Ok((
            UnitTangentFrame {
                g: frame.g,
                reduced: true,
            },
            0,
        ));
    }
    let (gamma, steps) = group.reduce_point(frame.base())?;
    let g = geometry::normalize(&mul(&gamma, &frame.g));
    Ok((UnitTangentFrame { g, reduced: true }, steps))
}

/// Geodesic flow g -> g a_t, in unit substeps with a reduction after each.
pub fn flow(frame: &UnitTangentFrame, t: f64, group: &FuchsianGroup) -> Result<UnitTangentFrame> {
    if !(t.abs() <= MAX_FLOW_TIME) {
        return Err(Error::Invalid(format!("flow time {t} beyond {MAX_FLOW_TIME}")));
    }
    let mut f = *frame;
    let whole = t.abs().floor() as u64;
    let step = a_t(t.signum());
    for _ in 0..whole {
        f = reduce(&UnitTangentFrame::new(geometry::normalize(&mul(&f.g, &step))), group)?.0;
    }
    let rest = t - t.signum() * whole as f64;
    if rest != 0.0 || whole == 0 {
        f = reduce(
            &UnitTangentFrame::new(geometry::normalize(&mul(&f.g, &a_t(rest)))),
            group,
        )?
        .0;
    }
    Ok(f)
}

/// Lifted flow with no reduction.
pub fn flow_lifted(frame: &UnitTangentFrame, t: f64) -> UnitTangentFrame {
    UnitTangentFrame::new(mul(&frame.g, &a_t(t)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypflow::geometry::dist;

    #[test]
    fn frame_from_point_and_angle() {
        for th in [0.0, 1.0, 2.5, 4.0, 6.0] {
            let z = C64::new(0.3, 1.7);
            let f = UnitTangentFrame::at(z, th);
            assert!((f.base() - z).norm() < 1e-14);
            assert!((f.angle() - th).abs() < 1e-12);
            assert!((f.det() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn upward_flow_on_plane() {
        let f = UnitTangentFrame::at(I, PI / 2.0);
        let g = flow(&f, 1.0, &FuchsianGroup::trivial()).unwrap();
        assert!((g.base() - C64::new(0.0, 1f64.exp())).norm() < 1e-14);
        assert!((dist(g.base(), I) - 1.0).abs() < 1e-14);
        assert_eq!(flow(&f, 0.0, &FuchsianGroup::trivial()).unwrap().g, f.g);
    }

    #[test]
    fn reduction_commutes_with_flow() {
        let grp = FuchsianGroup::bolza();
        let f = UnitTangentFrame::at(C64::new(0.2, 0.8), 1.3);
        let s = grp.generators[2];
        let moved = UnitTangentFrame::new(mul(&s, &f.g));
        let a = flow(&f, 3.7, &grp).unwrap();
        let b = flow(&moved, 3.7, &grp).unwrap();
        assert!((a.base() - b.base()).norm() < 1e-8);
    }
}
