use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::TorusSymbol;
use crate::fourier::cis;
use crate::linalg::svd;

/// Fast pointwise evaluation through a low-rank split of the coefficient
/// block: a(x, xi) = sum_r u_r(x) v_r(xi). Separable bumps are rank one.
#[derive(Clone, Debug)]
pub struct SymbolEvaluator {
    k: i64,
    /// (u_r, v_r) coefficient vectors over k1 and k2, singular value folded into u.
    terms: Vec<(Vec<C64>, Vec<C64>)>,
}

impl SymbolEvaluator {
    pub fn new(a: &TorusSymbol) -> Self {
        let k = a.bandwidth() as i64;
        let block = a.dense_coeffs();
        let mut terms = Vec::new();
        if !a.is_empty() {
            let (u, s, vt) = svd(&block).expect("svd of coefficient block");
            let cut = s[0] * 1e-15;
            for (r, sr) in s.iter().enumerate() {
                if *sr <= cut {
                    break;
                }
                let ur: Vec<C64> = u.column(r).iter().map(|z| z * *sr).collect();
                let vr: Vec<C64> = vt.row(r).to_vec();
                terms.push((ur, vr));
            }
        }
        SymbolEvaluator { k, terms }
    }

    pub fn rank(&self) -> usize {
        self.terms.len()
    }

    fn powers(&self, t: f64, out: &mut [C64]) {
        // e^{2 pi i k t} for k = -K..K, anchored at k = 0 to limit drift
        let k = self.k as usize;
        let w = cis(2.0 * PI * t);
        out[k] = C64::new(1.0, 0.0);
        for j in 1..=k {
            let p = if j % 64 == 0 {
                cis(2.0 * PI * t * j as f64)
            } else {
                out[k + j - 1] * w
            };
            out[k + j] = p;
            out[k - j] = p.conj();
        }
    }

    pub fn eval(&self, x: f64, xi: f64) -> C64 {
        let n = (2 * self.k + 1) as usize;
        let mut ex = vec![C64::new(0.0, 0.0); n];
        let mut ey = vec![C64::new(0.0, 0.0); n];
        self.eval_with(x, xi, &mut ex, &mut ey)
    }

    /// Same as `eval` with caller-provided scratch of length 2K+1.
    pub fn eval_with(&self, x: f64, xi: f64, ex: &mut [C64], ey: &mut [C64]) -> C64 {
        self.powers(x, ex);
        self.powers(xi, ey);
        let mut acc = C64::new(0.0, 0.0);
        for (u, v) in &self.terms {
            let a: C64 = u.iter().zip(ex.iter()).map(|(c, e)| c * e).sum();
            let b: C64 = v.iter().zip(ey.iter()).map(|(c, e)| c * e).sum();
            acc += a * b;
        }
        acc
    }

    pub fn scratch_len(&self) -> usize {
        (2 * self.k + 1) as usize
    }
}
