use std::f64::consts::PI;

use ndarray::{s, Array2, ShapeBuilder};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::quantize::QuantizedOperator;

const UNITARY_TOL: f64 = 1e-8;
const RESIDUAL_TOL: f64 = 1e-8;
const GRAM_TOL: f64 = 1e-10;
/// Eigenvalues of the Hermitian reduction closer than this are resolved
/// together inside their common cluster.
const CLUSTER_GAP: f64 = 1e-6;
const PHI0: f64 = 0.3718;

#[derive(Clone, Debug, Serialize)]
pub struct EigenSystem {
    pub n: usize,
    /// Eigenphases in [0, 2 pi), ascending.
    pub phases: Vec<f64>,
    /// Orthonormal eigenvectors as columns.
    #[serde(skip)]
    pub vectors: CMat,
    pub residual: f64,
    pub gram_defect: f64,
    /// Largest cluster resolved by the refinement step.
    pub max_cluster: usize,
}

impl EigenSystem {
    pub fn vector(&self, j: usize) -> Vec<C64> {
        self.vectors.column(j).to_vec()
    }
}

/// |U^* U - I|, exact for small N and from 8 random probes otherwise.
pub fn unitarity_check(u: &CMat) -> f64 {
    let n = u.nrows();
    if n <= 512 {
        return linalg::unitarity_defect(u);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let probes = Array2::from_shape_fn((n, 8), |_| {
        C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    let back = linalg::adjoint(u).dot(&u.dot(&probes));
    let mut worst: f64 = 0.0;
    for j in 0..8 {
        let p = probes.column(j);
        let nrm = p.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let d = p
            .iter()
            .zip(back.column(j))
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        worst = worst.max(d / nrm);
    }
    worst
}

/// Full eigendecomposition of a unitary matrix.
///
/// The Hermitian combination cos(phi0) Re U + sin(phi0) Im U has eigenvalue
/// cos(theta - phi0) on the eigenvector with phase theta. Its eigenvectors
/// are exact eigenvectors of U except where two phases share a value; such
/// clusters are diagonalized again through the compressed matrix V_C^* U V_C.
pub fn eigensolve(u_op: &QuantizedOperator) -> Result<EigenSystem> {
    let u = &u_op.matrix;
    let n = u.nrows();
    let ud = unitarity_check(u);
    if ud > UNITARY_TOL {
        return Err(Error::NotUnitary(ud));
    }
    let (c0, s0) = (PHI0.cos(), PHI0.sin());
    let h = Array2::from_shape_fn((n, n), |(i, j)| {
        let a = u[[i, j]];
        let b = u[[j, i]].conj();
        // Re U = (U + U^*)/2, Im U = (U - U^*)/(2i)
        (a + b) * 0.5 * c0 + (a - b) * C64::new(0.0, -0.5) * s0
    });
    let (w, mut v) = linalg::eigh(&h)?;
    drop(h);
    let mut wv = u.dot(&v);
    let mut clusters = Vec::new();
    let mut start = 0;
    for i in 1..=n {
        if i == n || w[i] - w[i - 1] >= CLUSTER_GAP {
            if i - start > 1 {
                clusters.push((start, i));
            }
            start = i;
        }
    }
    let mut max_cluster = 1;
    for &(a, b) in &clusters {
        max_cluster = max_cluster.max(b - a);
        refine_cluster(&mut v, &mut wv, a, b)?;
    }
    let mut phases = Vec::with_capacity(n);
    let mut residual: f64 = 0.0;
    for j in 0..n {
        let vj = v.column(j);
        let wj = wv.column(j);
        let lam: C64 = vj.iter().zip(wj.iter()).map(|(a, b)| a.conj() * b).sum();
        let th = lam.arg().rem_euclid(2.0 * PI);
        let e = C64::from_polar(1.0, th);
        let r = vj
            .iter()
            .zip(wj.iter())
            .map(|(a, b)| (b - a * e).norm_sqr())
            .sum::<f64>()
            .sqrt();
        residual = residual.max(r);
        phases.push(if th >= 2.0 * PI { 0.0 } else { th });
    }
    if residual > RESIDUAL_TOL {
        return Err(Error::ConvergenceFailure(format!(
            "residual {residual:.3e} after refining {} clusters (largest {max_cluster})",
            clusters.len()
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| phases[i].total_cmp(&phases[j]));
    let mut sorted = Array2::zeros((n, n).f());
    for (dst, &src) in order.iter().enumerate() {
        sorted.column_mut(dst).assign(&v.column(src));
    }
    let phases: Vec<f64> = order.iter().map(|&i| phases[i]).collect();
    let gram = linalg::adjoint(&sorted).dot(&sorted);
    let gram_defect = linalg::max_abs_diff(&gram, &linalg::identity(n));
    if gram_defect > GRAM_TOL {
        return Err(Error::ConvergenceFailure(format!("Gram defect {gram_defect:.3e}")));
    }
    Ok(EigenSystem {
        n,
        phases,
        vectors: sorted,
        residual,
        gram_defect,
        max_cluster,
    })
}

fn refine_cluster(v: &mut CMat, wv: &mut CMat, a: usize, b: usize) -> Result<()> {
    let vc = v.slice(s![.., a..b]).to_owned();
    let wc = wv.slice(s![.., a..b]).to_owned();
    let m = linalg::adjoint(&vc).dot(&wc);
    let k = b - a;
    let mut last = String::new();
    for c in [0.618, 1.732, -0.414] {
        let hm = Array2::from_shape_fn((k, k), |(i, j)| {
            let x = m[[i, j]];
            let y = m[[j, i]].conj();
            (x + y) * 0.5 + (x - y) * C64::new(0.0, -0.5) * c
        });
        let (_, q) = linalg::eigh(&hm)?;
        let nv = vc.dot(&q);
        let nw = wc.dot(&q);
        let mut worst: f64 = 0.0;
        for j in 0..k {
            let vj = nv.column(j);
            let wj = nw.column(j);
            let lam: C64 = vj.iter().zip(wj.iter()).map(|(p, r)| p.conj() * r).sum();
            let r = vj
                .iter()
                .zip(wj.iter())
                .map(|(p, r)| (r - p * lam).norm_sqr())
                .sum::<f64>()
                .sqrt();
            worst = worst.max(r);
        }
        if worst <= RESIDUAL_TOL {
            v.slice_mut(s![.., a..b]).assign(&nv);
            wv.slice_mut(s![.., a..b]).assign(&nw);
            return Ok(());
        }
        last = format!("cluster [{a}, {b}) residual {worst:.3e} with c = {c}");
    }
    Err(Error::ConvergenceFailure(last))
}
