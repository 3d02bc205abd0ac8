use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::fourier::fft1;

/// Base profile b of a bump symbol.
///
/// `Smooth { sharpness: c }` is b(s) = exp(c - c / (1 - s^2)) on |s| < 1,
/// so b(0) = 1 for every c; c = 1 is the textbook mollifier. `Flat` is the
/// constant 1 everywhere (no support restriction).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BumpProfile {
    Flat,
    Smooth { sharpness: f64 },
}

impl Default for BumpProfile {
    fn default() -> Self {
        Self::sharp()
    }
}

impl BumpProfile {
    pub fn standard() -> Self {
        BumpProfile::Smooth { sharpness: 1.0 }
    }

    /// Default for Fourier-truncated symbols: the faster spectral decay
    /// reaches 1e-6 truncation error at roughly 8/delta modes.
    pub fn sharp() -> Self {
        BumpProfile::Smooth { sharpness: 8.0 }
    }

    pub fn eval(&self, s: f64) -> f64 {
        match *self {
            BumpProfile::Flat => 1.0,
            BumpProfile::Smooth { sharpness: c } => {
                let u = 1.0 - s * s;
                if u <= 0.0 {
                    0.0
                } else {
                    (c - c / u).exp()
                }
            }
        }
    }

    pub fn sup(&self) -> f64 {
        1.0
    }

    /// Number of torus samples used for the periodized transform.
    fn samples(delta: f64, kmax: usize) -> usize {
        let need = (4096.0 / delta).max(8.0 * (kmax as f64 + 1.0));
        (need.ceil() as usize).next_power_of_two()
    }

    /// Fourier coefficients beta_k, k = 0..=kmax, of the 1-periodic function
    /// x -> sum_m b((x + m) / delta). They are real and even in k.
    /// Trapezoid on a fine periodic grid; spectrally accurate for C^infinity b.
    pub fn periodized_coefficients(&self, delta: f64, kmax: usize) -> Vec<f64> {
        if let BumpProfile::Flat = self {
            let mut v = vec![0.0; kmax + 1];
            v[0] = 1.0;
            return v;
        }
        let l = Self::samples(delta, kmax);
        let mut buf: Vec<C64> = (0..l)
            .map(|i| {
                let x = i as f64 / l as f64;
                let x = if x > 0.5 { x - 1.0 } else { x };
                let v: f64 = (-2..=2).map(|m| self.eval((x + m as f64) / delta)).sum();
                C64::new(v, 0.0)
            })
            .collect();
        fft1(&mut buf, false);
        (0..=kmax).map(|k| buf[k].re / l as f64).collect()
    }

    /// Integral of b over [-1, 1].
    pub fn integral(&self) -> f64 {
        match self {
            BumpProfile::Flat => 2.0,
            _ => {
                let n = 1 << 16;
                let h = 2.0 / n as f64;
                (1..n).map(|i| self.eval(-1.0 + i as f64 * h)).sum::<f64>() * h
            }
        }
    }
}
