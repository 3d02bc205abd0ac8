//! Band-limited observables on the torus phase space and their measurements.

mod bump;
mod delta;
mod eval;
mod holder;
mod seminorm;

pub use bump::BumpProfile;
pub use delta::{make_delta_symbol, required_bandwidth, DeltaSymbolSpec, SymbolKind, TRUNCATION_TOL};
pub use eval::SymbolEvaluator;
pub use holder::{holder_estimate, holder_norm, HolderEstimate};
pub use seminorm::{seminorm_check, SeminormReport};

use std::collections::BTreeMap;
use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{cis, fft2};

pub type Wave = (i64, i64);

/// Relative tolerance used to decide Hermitian symmetry of coefficients.
const REAL_TOL: f64 = 1e-13;

/// a(x, xi) = sum_k c_k exp(2 pi i (k1 x + k2 xi)) with finitely many modes.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusSymbol {
    coeffs: BTreeMap<Wave, C64>,
    bandwidth: usize,
    real: bool,
}

impl Default for TorusSymbol {
    fn default() -> Self {
        Self::zero()
    }
}

impl TorusSymbol {
    pub fn zero() -> Self {
        TorusSymbol {
            coeffs: BTreeMap::new(),
            bandwidth: 0,
            real: true,
        }
    }

    pub fn constant(c: C64) -> Self {
        Self::from_coeffs([((0, 0), c)])
    }

    /// The plane wave e_k.
    pub fn mode(k1: i64, k2: i64) -> Self {
        Self::from_coeffs([((k1, k2), C64::new(1.0, 0.0))])
    }

    /// cos(2 pi k.z) = (e_k + e_{-k}) / 2.
    pub fn cosine(k1: i64, k2: i64) -> Self {
        Self::from_coeffs([((k1, k2), C64::new(0.5, 0.0)), ((-k1, -k2), C64::new(0.5, 0.0))])
    }

    /// Builds a symbol, summing repeated wave vectors and dropping exact zeros.
    pub fn from_coeffs<I: IntoIterator<Item = (Wave, C64)>>(it: I) -> Self {
        let mut coeffs = BTreeMap::new();
        for (k, c) in it {
            *coeffs.entry(k).or_insert(C64::new(0.0, 0.0)) += c;
        }
        Self::from_map(coeffs)
    }

    pub(crate) fn from_map(mut coeffs: BTreeMap<Wave, C64>) -> Self {
        coeffs.retain(|_, c| *c != C64::new(0.0, 0.0));
        let bandwidth = coeffs
            .keys()
            .map(|&(a, b)| a.unsigned_abs().max(b.unsigned_abs()) as usize)
            .max()
            .unwrap_or(0);
        let scale = coeffs.values().map(|c| c.norm()).fold(0.0, f64::max);
        let real = coeffs.iter().all(|(&(a, b), c)| {
            let m = coeffs.get(&(-a, -b)).copied().unwrap_or_default();
            (m - c.conj()).norm() <= REAL_TOL * scale
        });
        TorusSymbol {
            coeffs,
            bandwidth,
            real,
        }
    }

    pub fn coeff(&self, k: Wave) -> C64 {
        self.coeffs.get(&k).copied().unwrap_or_default()
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Wave, C64)> + '_ {
        self.coeffs.iter().map(|(k, c)| (*k, *c))
    }

    /// Phase-space mean, i.e. the zero mode.
    pub fn mean(&self) -> C64 {
        self.coeff((0, 0))
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Sum of |c_k|, an upper bound for sup |a|.
    pub fn l1_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).sum()
    }

    pub fn evaluate(&self, x: f64, xi: f64) -> C64 {
        self.coeffs
            .iter()
            .map(|(&(a, b), c)| c * cis(2.0 * PI * (a as f64 * x + b as f64 * xi)))
            .sum()
    }

    /// Values on the grid (p/m, q/m), p, q = 0..m, via inverse FFT.
    pub fn evaluate_grid(&self, m: usize) -> Array2<C64> {
        self.evaluate_grid_shifted(m, 0.0, 0.0)
    }

    /// Values at ((p + s1)/m, (q + s2)/m).
    pub fn evaluate_grid_shifted(&self, m: usize, s1: f64, s2: f64) -> Array2<C64> {
        let mut g = Array2::zeros((m, m));
        let mi = m as i64;
        for (&(a, b), c) in &self.coeffs {
            let ph = cis(2.0 * PI * (a as f64 * s1 + b as f64 * s2) / m as f64);
            g[[a.rem_euclid(mi) as usize, b.rem_euclid(mi) as usize]] += c * ph;
        }
        fft2(&mut g, true);
        g
    }

    /// Largest |a| over an m x m grid (a lower bound for sup |a|).
    pub fn grid_sup(&self, m: usize) -> f64 {
        self.evaluate_grid(m).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn conj(&self) -> Self {
        Self::from_coeffs(self.iter().map(|((a, b), c)| ((-a, -b), c.conj())))
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_coeffs(self.iter().map(|(k, c)| (k, c * s)))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_coeffs(self.iter().chain(other.iter()))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// Pointwise product (convolution of coefficients).
    pub fn product(&self, other: &Self) -> Self {
        let mut out = BTreeMap::new();
        for (&(a1, b1), c1) in &self.coeffs {
            for (&(a2, b2), c2) in &other.coeffs {
                *out.entry((a1 + a2, b1 + b2)).or_insert(C64::new(0.0, 0.0)) += c1 * c2;
            }
        }
        Self::from_map(out)
    }

    /// d^ax/dx^ax d^bx/dxi^bx.
    pub fn derivative(&self, ax: u32, bx: u32) -> Self {
        let i2pi = C64::new(0.0, 2.0 * PI);
        Self::from_coeffs(self.iter().map(|((a, b), c)| {
            let f = (i2pi * a as f64).powu(ax) * (i2pi * b as f64).powu(bx);
            ((a, b), c * f)
        }))
    }

    /// {a, b} = da/dx db/dxi - da/dxi db/dx.
    pub fn poisson_bracket(&self, other: &Self) -> Self {
        let l = self.derivative(1, 0).product(&other.derivative(0, 1));
        let r = self.derivative(0, 1).product(&other.derivative(1, 0));
        l.sub(&r)
    }

    /// Keeps modes with max(|k1|, |k2|) <= k.
    pub fn truncated(&self, k: usize) -> Self {
        let k = k as i64;
        Self::from_coeffs(self.iter().filter(|((a, b), _)| a.abs() <= k && b.abs() <= k))
    }

    /// Applies an integer linear map to every wave vector.
    pub fn map_waves(&self, f: impl Fn(Wave) -> Wave) -> Self {
        Self::from_coeffs(self.iter().map(|(k, c)| (f(k), c)))
    }

    /// L2 inner product of the functions, conjugate-linear in `other`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.coeffs.iter().map(|(k, c)| c * other.coeff(*k).conj()).sum()
    }

    /// Dense coefficient block indexed by [k1 + K, k2 + K].
    pub fn dense_coeffs(&self) -> Array2<C64> {
        let k = self.bandwidth as i64;
        let n = (2 * k + 1) as usize;
        let mut d = Array2::zeros((n, n));
        for (&(a, b), c) in &self.coeffs {
            d[[(a + k) as usize, (b + k) as usize]] = *c;
        }
        d
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&SymbolJson::from(self)).expect("symbol serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: SymbolJson = serde_json::from_str(s).map_err(|e| Error::Invalid(e.to_string()))?;
        let sym = Self::from_coeffs(
            j.entries
                .iter()
                .map(|e| ((e[0] as i64, e[1] as i64), C64::new(e[2], e[3]))),
        );
        if sym.bandwidth > j.bandwidth {
            return Err(Error::Invalid(format!(
                "entry with bandwidth {} beyond declared {}",
                sym.bandwidth, j.bandwidth
            )));
        }
        Ok(sym)
    }
}

#[derive(Serialize, Deserialize)]
struct SymbolJson {
    bandwidth: usize,
    entries: Vec<[f64; 4]>,
}

impl From<&TorusSymbol> for SymbolJson {
    fn from(s: &TorusSymbol) -> Self {
        SymbolJson {
            bandwidth: s.bandwidth,
            entries: s.iter().map(|((a, b), c)| [a as f64, b as f64, c.re, c.im]).collect(),
        }
    }
}
