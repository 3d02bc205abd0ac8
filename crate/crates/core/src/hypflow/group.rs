use std::collections::{HashSet, VecDeque};

use num_complex::Complex64 as C64;
use serde::Serialize;

use super::geometry::{self, cosh_dist, mobius, mul, Sl2, I, IDENTITY};
use crate::error::{Error, Result};

/// Iteration cap of the greedy reduction.
pub const REDUCTION_CAP: usize = 1000;

/// Cocompact Fuchsian group given by side-pairing generators of a Dirichlet
/// domain centered at `center`.
#[derive(Clone, Debug, Serialize)]
pub struct FuchsianGroup {
    /// Generators followed by their inverses.
    pub generators: Vec<Sl2>,
    pub center: C64,
    pub genus: u32,
    /// Largest distance from the center to a point of the domain.
    pub circumradius: f64,
    /// Distance from the center to the nearest side.
    pub inradius: f64,
}

impl FuchsianGroup {
    /// The Bolza surface: opposite sides of the regular octagon with
    /// interior angles pi/4 are paired by hyperbolic translations of length
    /// L with cosh(L/2) = 1 + sqrt 2. In the disk they are R_k T R_k^{-1},
    /// k = 0..3, moved to the upper half-plane by the Cayley transform.
    pub fn bolza() -> Self {
        let ch = 1.0 + 2f64.sqrt();
        let sh = (ch * ch - 1.0).sqrt();
        let cay = [[I, I], [C64::new(-1.0, 0.0), C64::new(1.0, 0.0)]];
        // inverse of the Cayley matrix up to scale
        let cay_inv = [[C64::new(1.0, 0.0), -I], [C64::new(1.0, 0.0), I]];
        let cmul = |a: &[[C64; 2]; 2], b: &[[C64; 2]; 2]| {
            [
                [
                    a[0][0] * b[0][0] + a[0][1] * b[1][0],
                    a[0][0] * b[0][1] + a[0][1] * b[1][1],
                ],
                [
                    a[1][0] * b[0][0] + a[1][1] * b[1][0],
                    a[1][0] * b[0][1] + a[1][1] * b[1][1],
                ],
            ]
        };
        let mut gens = Vec::new();
        for k in 0..4 {
            let r = C64::from_polar(1.0, std::f64::consts::PI * k as f64 / 8.0);
            let rk = [[r, C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), r.conj()]];
            let rk_inv = [[r.conj(), C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), r]];
            let t = [
                [C64::new(ch, 0.0), C64::new(sh, 0.0)],
                [C64::new(sh, 0.0), C64::new(ch, 0.0)],
            ];
            let disk = cmul(&rk, &cmul(&t, &rk_inv));
            let m = cmul(&cay, &cmul(&disk, &cay_inv));
            // m is a complex multiple of a real matrix; rotate the phase away
            let d = (m[0][0] * m[1][1] - m[0][1] * m[1][0]).sqrt();
            let real = [
                [(m[0][0] / d).re, (m[0][1] / d).re],
                [(m[1][0] / d).re, (m[1][1] / d).re],
            ];
            gens.push(geometry::normalize(&real));
        }
        let inverses: Vec<Sl2> = gens.iter().map(geometry::inv).collect();
        gens.extend(inverses);
        FuchsianGroup {
            generators: gens,
            center: I,
            genus: 2,
            circumradius: ((1.0 + 2f64.sqrt()).powi(2)).acosh(),
            inradius: ch.acosh(),
        }
    }

    /// No identifications: the whole upper half-plane.
    pub fn trivial() -> Self {
        FuchsianGroup {
            generators: Vec::new(),
            center: I,
            genus: 0,
            circumradius: f64::INFINITY,
            inradius: f64::INFINITY,
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.generators.is_empty()
    }

    /// 4 pi (g - 1).
    pub fn area(&self) -> f64 {
        4.0 * std::f64::consts::PI * (self.genus as f64 - 1.0)
    }

    /// Largest of |det - 1| and |g g^{-1} - I| over the generators.
    pub fn validate(&self) -> f64 {
        let h = self.generators.len() / 2;
        let mut worst: f64 = 0.0;
        for k in 0..h {
            let g = &self.generators[k];
            let gi = &self.generators[k + h];
            worst = worst.max((geometry::det(g) - 1.0).abs());
            let p = mul(g, gi);
            for i in 0..2 {
                for j in 0..2 {
                    worst = worst.max((p[i][j] - IDENTITY[i][j]).abs());
                }
            }
        }
        worst
    }

    /// Whether z lies in the closed Dirichlet domain, with slack `tol` on
    /// cosh distances.
    pub fn in_domain(&self, z: C64, tol: f64) -> bool {
        let c = cosh_dist(z, self.center);
        self.generators
            .iter()
            .all(|g| cosh_dist(mobius(g, z), self.center) >= c - tol)
    }

    /// Greedy descent: apply the generator that brings z closest to the
    /// center until none helps. Returns (gamma, steps) with gamma z reduced.
    pub fn reduce_point(&self, z: C64) -> Result<(Sl2, usize)> {
        let mut gamma = IDENTITY;
        let mut w = z;
        let mut c = cosh_dist(w, self.center);
        for steps in 0..=REDUCTION_CAP {
            let mut best: Option<(usize, f64)> = None;
            for (k, g) in self.generators.iter().enumerate() {
                let ck = cosh_dist(mobius(g, w), self.center);
                if ck < c * (1.0 - 1e-13) && best.is_none_or(|(_, b)| ck < b) {
                    best = Some((k, ck));
                }
            }
            match best {
                None => return Ok((gamma, steps)),
                Some((k, ck)) => {
                    let g = &self.generators[k];
                    gamma = geometry::normalize(&mul(g, &gamma));
                    w = mobius(g, w);
                    c = ck;
                }
            }
        }
        Err(Error::ReductionFailure(REDUCTION_CAP))
    }

    /// All group elements gamma with d(center, gamma center) <= radius.
    /// Breadth-first over the tiling, keeping tiles whose center lies
    /// within radius + circumradius so every tile meeting the ball is seen.
    pub fn translates_within(&self, radius: f64) -> Vec<Sl2> {
        if self.is_trivial() {
            return vec![IDENTITY];
        }
        let reach = (radius + self.circumradius + 1e-9).cosh();
        let key = |z: C64| ((z.re * 1e7).round() as i64, (z.im.ln() * 1e7).round() as i64);
        let mut seen = HashSet::new();
        seen.insert(key(self.center));
        let mut queue = VecDeque::from([IDENTITY]);
        let mut out = Vec::new();
        while let Some(g) = queue.pop_front() {
            let z = mobius(&g, self.center);
            if cosh_dist(z, self.center) <= radius.cosh() * (1.0 + 1e-12) {
                out.push(g);
            }
            for s in &self.generators {
                let h = geometry::normalize(&mul(&g, s));
                let w = mobius(&h, self.center);
                if cosh_dist(w, self.center) <= reach && seen.insert(key(w)) {
                    queue.push_back(h);
                }
            }
        }
        out.sort_by(|a, b| {
            cosh_dist(mobius(a, self.center), self.center).total_cmp(&cosh_dist(mobius(b, self.center), self.center))
        });
        out
    }
}
