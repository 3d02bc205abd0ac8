use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::frame::UnitTangentFrame;
use super::geometry::from_polar_at_i;
use super::group::FuchsianGroup;

/// Frames per RNG stream; stream k of the master seed serves chunk k, so the
/// output does not depend on the number of workers.
pub const CHUNK: usize = 4096;

pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(chunk);
    r
}

/// Hyperbolic-uniform point in the ball of radius `radius` about i.
fn ball_point(rng: &mut ChaCha8Rng, radius: f64) -> C64 {
    let u: f64 = rng.random();
    let rho = (1.0 + u * (radius.cosh() - 1.0)).acosh();
    let th = rng.random::<f64>() * 2.0 * PI;
    from_polar_at_i(rho, th)
}

/// Rejection draws from the circumscribed ball into the Dirichlet domain.
/// Returns the accepted frames and the number of trials.
fn sample_chunk(group: &FuchsianGroup, n: usize, seed: u64, chunk: u64) -> (Vec<UnitTangentFrame>, usize) {
    let mut rng = chunk_rng(seed, chunk);
    let radius = group.circumradius + 1e-9;
    let mut out = Vec::with_capacity(n);
    let mut trials = 0;
    while out.len() < n {
        trials += 1;
        let z = ball_point(&mut rng, radius);
        let th = rng.random::<f64>() * 2.0 * PI;
        if group.in_domain(z, 0.0) {
            let mut f = UnitTangentFrame::at(z, th);
            f.reduced = true;
            out.push(f);
        }
    }
    (out, trials)
}

/// n Liouville-distributed frames on the surface, deterministic per seed.
pub fn liouville_sample(group: &FuchsianGroup, n: usize, seed: u64) -> Vec<UnitTangentFrame> {
    liouville_with_trials(group, n, seed).0
}

fn liouville_with_trials(group: &FuchsianGroup, n: usize, seed: u64) -> (Vec<UnitTangentFrame>, usize) {
    assert!(!group.is_trivial(), "Liouville sampling needs a compact quotient");
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<(Vec<UnitTangentFrame>, usize)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let m = CHUNK.min(n - c * CHUNK);
            sample_chunk(group, m, seed, c as u64)
        })
        .collect();
    let trials = parts.iter().map(|p| p.1).sum();
    (parts.into_iter().flat_map(|p| p.0).collect(), trials)
}

/// Monte Carlo area of the Dirichlet domain with its standard error.
pub fn domain_area(group: &FuchsianGroup, n: usize, seed: u64) -> (f64, f64) {
    let (_, trials) = liouville_with_trials(group, n, seed);
    let ball = 2.0 * PI * ((group.circumradius + 1e-9).cosh() - 1.0);
    let p = n as f64 / trials as f64;
    let se = ball * (p * (1.0 - p) / trials as f64).sqrt();
    (ball * p, se)
}
