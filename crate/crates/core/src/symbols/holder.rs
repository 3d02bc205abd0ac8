use super::TorusSymbol;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HolderEstimate {
    pub sup: f64,
    pub seminorm: f64,
}

impl HolderEstimate {
    pub fn norm(&self) -> f64 {
        self.sup + self.seminorm
    }
}

/// Sampled Hölder norm sup|a| + sup |a(p) - a(q)| / d(p, q)^gamma.
///
/// Pairs are grid points separated by dyadic offsets 2^m (m = 0, 1, ...)
/// along the axes and both diagonals, with the periodic metric. Every
/// estimate is a lower bound on the true norm, and doubling `grid` never
/// decreases it because the coarse pairs reappear at the finer level.
pub fn holder_estimate(a: &TorusSymbol, gamma: f64, grid: usize) -> Result<HolderEstimate> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidGamma(gamma));
    }
    let bw = a.bandwidth();
    if grid < 8 * bw.max(1) {
        return Err(Error::GridTooSmall { grid, bandwidth: bw });
    }
    let v = a.evaluate_grid(grid);
    let sup = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let g = grid as f64;
    let mut semi: f64 = 0.0;
    let mut off = 1usize;
    while off <= grid / 2 {
        for (d1, d2) in [(off, 0usize), (0, off), (off, off), (off, grid - off)] {
            let dx = (d1.min(grid - d1)) as f64 / g;
            let dy = (d2.min(grid - d2)) as f64 / g;
            let dist = (dx * dx + dy * dy).sqrt();
            if dist == 0.0 {
                continue;
            }
            let w = dist.powf(-gamma);
            for p in 0..grid {
                let p2 = (p + d1) % grid;
                for q in 0..grid {
                    let q2 = (q + d2) % grid;
                    let diff = (v[[p, q]] - v[[p2, q2]]).norm();
                    if diff * w > semi {
                        semi = diff * w;
                    }
                }
            }
        }
        off *= 2;
    }
    Ok(HolderEstimate { sup, seminorm: semi })
}

pub fn holder_norm(a: &TorusSymbol, gamma: f64, grid: usize) -> Result<f64> {
    holder_estimate(a, gamma, grid).map(|h| h.norm())
}
