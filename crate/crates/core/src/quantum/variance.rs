use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use super::EigenSystem;
use crate::error::{Error, Result};
use crate::quantize::quantize_banded;
use crate::symbols::TorusSymbol;

/// Position dimension of the torus model, the n in the threshold delta^n.
pub const POSITION_DIM: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VarianceReport {
    pub n: usize,
    pub alpha: f64,
    pub delta: f64,
    pub beta_tilde: f64,
    pub v2: f64,
    pub v1: f64,
    pub mean_a: f64,
    pub per_j_deviations: Vec<f64>,
    pub gamma_set: Vec<usize>,
    pub lambda_set: Vec<usize>,
    pub threshold: f64,
    pub density_gamma: f64,
}

/// beta inside (alpha n, 1 - 2 alpha n): the midpoint (1 - alpha n)/2.
pub fn default_beta(alpha: f64, n_dim: u32) -> f64 {
    (1.0 - alpha * n_dim as f64) / 2.0
}

/// beta~ = (beta - alpha n)/3, which satisfies alpha n + 2 beta~ - beta < 0
/// whenever beta > alpha n.
pub fn default_beta_tilde(alpha: f64, n_dim: u32) -> Result<f64> {
    let an = alpha * n_dim as f64;
    if !(0.0..1.0 / (2.0 * n_dim as f64)).contains(&alpha) {
        return Err(Error::Invalid(format!(
            "alpha = {alpha} outside [0, 1/(2n)) with n = {n_dim}"
        )));
    }
    let beta = default_beta(alpha, n_dim);
    if beta <= an {
        return Err(Error::Invalid(format!(
            "alpha = {alpha}: no beta in (alpha n, 1 - 2 alpha n) with the default midpoint; pass beta_tilde"
        )));
    }
    Ok((beta - an) / 3.0)
}

/// delta(N) = (log N)^(-alpha).
pub fn scale_at(n: usize, alpha: f64) -> f64 {
    (n as f64).ln().powf(-alpha)
}

/// Diagonal matrix elements <Op(a) u_j, u_j> over the eigenbasis.
pub fn matrix_elements(a: &TorusSymbol, eig: &EigenSystem) -> Result<Vec<C64>> {
    let n = eig.n;
    if 2 * a.bandwidth() >= n {
        return Err(Error::AliasingError {
            n,
            bandwidth: a.bandwidth(),
        });
    }
    let op = quantize_banded(a, n)?;
    Ok((0..n).into_par_iter().map(|j| op.expectation(&eig.vector(j))).collect())
}

/// Quantum variance of a over the full eigenbasis, with the threshold sets
/// Lambda = {j : dev_j >= tau} and Gamma its complement, where
/// tau = delta^n (log N)^(-beta~).
pub fn variance(a: &TorusSymbol, eig: &EigenSystem, alpha: f64, beta_tilde: f64) -> Result<VarianceReport> {
    let n = eig.n;
    let elems = matrix_elements(a, eig)?;
    let mean = a.mean();
    let dev: Vec<f64> = elems.iter().map(|e| (e - mean).norm()).collect();
    let delta = scale_at(n, alpha);
    let threshold = delta.powi(POSITION_DIM as i32) * (n as f64).ln().powf(-beta_tilde);
    let (lambda_set, gamma_set): (Vec<usize>, Vec<usize>) = (0..n).partition(|&j| dev[j] >= threshold);
    let nf = n as f64;
    Ok(VarianceReport {
        n,
        alpha,
        delta,
        beta_tilde,
        v2: dev.iter().map(|d| d * d).sum::<f64>() / nf,
        v1: dev.iter().sum::<f64>() / nf,
        mean_a: mean.re,
        density_gamma: gamma_set.len() as f64 / nf,
        per_j_deviations: dev,
        gamma_set,
        lambda_set,
        threshold,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MassReport {
    pub x0: f64,
    pub r: f64,
    /// Length of the arc {x : |x - x0| < r} on the unit circle.
    pub arc: f64,
    pub masses: Vec<f64>,
}

impl MassReport {
    /// Fraction of eigenvectors with mass / arc in [lo, hi].
    pub fn fraction_within(&self, lo: f64, hi: f64) -> f64 {
        let k = self
            .masses
            .iter()
            .filter(|m| (lo..=hi).contains(&(*m / self.arc)))
            .count();
        k as f64 / self.masses.len() as f64
    }
}

fn circle_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Arc masses sum_{|j/N - x0| < r} |u(j)|^2 of every eigenvector.
pub fn small_scale_mass(eig: &EigenSystem, x0: f64, r: f64) -> Result<MassReport> {
    let n = eig.n;
    let min = 2.0 / n as f64;
    if !(r >= min) {
        return Err(Error::RadiusTooSmall { r, min });
    }
    let sites: Vec<usize> = (0..n).filter(|&j| circle_dist(j as f64 / n as f64, x0) < r).collect();
    let masses = (0..n)
        .map(|k| {
            let col = eig.vectors.column(k);
            sites.iter().map(|&j| col[j].norm_sqr()).sum::<f64>().min(1.0)
        })
        .collect();
    Ok(MassReport {
        x0,
        r,
        arc: (2.0 * r).min(1.0),
        masses,
    })
}

/// h_1 = 1, h_{m+1} = (h_m^-2 + h_m^-1)^(-1/2).
pub fn window_recurrence(m: usize) -> Vec<f64> {
    let mut h = Vec::with_capacity(m);
    let mut x: f64 = 1.0;
    for _ in 0..m {
        h.push(x);
        x = (x.powi(-2) + 1.0 / x).powf(-0.5);
    }
    h
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WindowSelection {
    pub m: usize,
    pub h_m: f64,
    pub n: usize,
    pub selected: Vec<usize>,
    pub density: f64,
    pub cumulative_density: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityExtraction {
    pub windows: Vec<WindowSelection>,
    pub h_table: Vec<f64>,
    /// Whether the cumulative density is nondecreasing (reported only).
    pub monotone: bool,
}

/// Each report is one window; Gamma of that window is the selected family.
pub fn density_one_extract(reports: &[VarianceReport]) -> Result<DensityExtraction> {
    if reports.len() < 3 {
        return Err(Error::Invalid(format!(
            "need at least 3 windows, got {}",
            reports.len()
        )));
    }
    let h = window_recurrence(reports.len());
    let mut windows = Vec::new();
    let (mut sel, mut tot) = (0usize, 0usize);
    for (i, r) in reports.iter().enumerate() {
        if r.n == 0 || r.per_j_deviations.is_empty() {
            return Err(Error::EmptyWindow(i + 1));
        }
        sel += r.gamma_set.len();
        tot += r.n;
        windows.push(WindowSelection {
            m: i + 1,
            h_m: h[i],
            n: r.n,
            selected: r.gamma_set.clone(),
            density: r.gamma_set.len() as f64 / r.n as f64,
            cumulative_density: sel as f64 / tot as f64,
        });
    }
    let monotone = windows
        .windows(2)
        .all(|w| w[1].cumulative_density >= w[0].cumulative_density);
    Ok(DensityExtraction {
        windows,
        h_table: h,
        monotone,
    })
}
