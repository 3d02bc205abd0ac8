//! Hyperbolic toral automorphisms, their kicked perturbations, and exact
//! classical statistics computed from Fourier coefficients.
//!
//! Points are (x, xi) in [0,1)^2 and A acts on column vectors. The kicked
//! map is G = A o K with K(x, xi) = (x, xi - eps V'(x)), which is the
//! classical limit of the quantum kick exp(-2 pi i N eps V(j/N)).

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{ols, LineFit};
use crate::fourier::fft2;
use crate::symbols::{SymbolEvaluator, TorusSymbol, Wave};

pub type Mat2 = [[i64; 2]; 2];

/// Exact pullback gives up beyond this bandwidth.
pub const BANDWIDTH_CAP: usize = 1 << 14;
/// Relative L2 tail above which a grid pullback is flagged.
pub const TRUNCATION_WARN: f64 = 1e-4;

/// Kick potential V(x) = sum_m v_m cos(2 pi m x).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Kick {
    pub harmonics: Vec<(u32, f64)>,
}

impl Default for Kick {
    fn default() -> Self {
        Kick {
            harmonics: vec![(1, 1.0)],
        }
    }
}

impl Kick {
    pub fn value(&self, x: f64) -> f64 {
        self.harmonics
            .iter()
            .map(|&(m, v)| v * (2.0 * PI * m as f64 * x).cos())
            .sum()
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.harmonics
            .iter()
            .map(|&(m, v)| -2.0 * PI * m as f64 * v * (2.0 * PI * m as f64 * x).sin())
            .sum()
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        self.harmonics
            .iter()
            .map(|&(m, v)| -(2.0 * PI * m as f64).powi(2) * v * (2.0 * PI * m as f64 * x).cos())
            .sum()
    }

    pub fn sup(&self) -> f64 {
        self.harmonics.iter().map(|(_, v)| v.abs()).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnosovMap {
    pub a: Mat2,
    pub epsilon: f64,
    pub kick: Kick,
    pub lyap: f64,
}

fn frac(v: f64) -> f64 {
    let f = v - v.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

impl AnosovMap {
    pub fn new(a: Mat2, epsilon: f64) -> Result<Self> {
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        let tr = a[0][0] + a[1][1];
        if det != 1 || tr.abs() <= 2 {
            return Err(Error::NotHyperbolic(a));
        }
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::Invalid(format!("epsilon = {epsilon} must be >= 0")));
        }
        let t = tr.abs() as f64;
        Ok(AnosovMap {
            a,
            epsilon,
            kick: Kick::default(),
            lyap: ((t + (t * t - 4.0).sqrt()) / 2.0).ln(),
        })
    }

    /// The default quantizable cat map [[2,1],[3,2]].
    pub fn cat(epsilon: f64) -> Self {
        Self::new([[2, 1], [3, 2]], epsilon).expect("default map is hyperbolic")
    }

    pub fn with_kick(mut self, kick: Kick) -> Self {
        self.kick = kick;
        self
    }

    /// A12 A11 and A21 A22 even, needed for the metaplectic quantization.
    pub fn is_quantizable(&self) -> bool {
        let a = self.a;
        (a[0][1] * a[0][0]) % 2 == 0 && (a[1][0] * a[1][1]) % 2 == 0
    }

    pub fn trace(&self) -> i64 {
        self.a[0][0] + self.a[1][1]
    }

    /// log N / l.
    pub fn ehrenfest_time(&self, n: usize) -> f64 {
        (n as f64).ln() / self.lyap
    }

    pub fn inverse_matrix(&self) -> Mat2 {
        let a = self.a;
        [[a[1][1], -a[0][1]], [-a[1][0], a[0][0]]]
    }

    pub fn apply(&self, z: [f64; 2]) -> [f64; 2] {
        let [x, mut xi] = z;
        if self.epsilon != 0.0 {
            xi -= self.epsilon * self.kick.derivative(x);
        }
        let a = self.a;
        [
            frac(a[0][0] as f64 * x + a[0][1] as f64 * xi),
            frac(a[1][0] as f64 * x + a[1][1] as f64 * xi),
        ]
    }

    pub fn apply_inverse(&self, z: [f64; 2]) -> [f64; 2] {
        let b = self.inverse_matrix();
        let [x, y] = z;
        let x1 = frac(b[0][0] as f64 * x + b[0][1] as f64 * y);
        let mut y1 = b[1][0] as f64 * x + b[1][1] as f64 * y;
        if self.epsilon != 0.0 {
            y1 += self.epsilon * self.kick.derivative(x1);
        }
        [x1, frac(y1)]
    }

    /// G^t for any integer t.
    pub fn iterate(&self, z: [f64; 2], t: i64) -> [f64; 2] {
        let mut z = z;
        for _ in 0..t.unsigned_abs() {
            z = if t > 0 { self.apply(z) } else { self.apply_inverse(z) };
        }
        z
    }

    /// Tangent map DG at z applied to v.
    pub fn tangent(&self, z: [f64; 2], v: [f64; 2]) -> [f64; 2] {
        let s = -self.epsilon * self.kick.second_derivative(z[0]);
        let w = [v[0], v[1] + s * v[0]];
        let a = self.a;
        [
            a[0][0] as f64 * w[0] + a[0][1] as f64 * w[1],
            a[1][0] as f64 * w[0] + a[1][1] as f64 * w[1],
        ]
    }

    /// k -> (A^T)^s k for s = +-1; None on overflow.
    fn wave_step(&self, k: Wave, forward: bool) -> Option<Wave> {
        let m = if forward { self.a } else { self.inverse_matrix() };
        let k1 = m[0][0].checked_mul(k.0)?.checked_add(m[1][0].checked_mul(k.1)?)?;
        let k2 = m[0][1].checked_mul(k.0)?.checked_add(m[1][1].checked_mul(k.1)?)?;
        Some((k1, k2))
    }

    fn wave_power(&self, k: Wave, t: i64) -> Option<Wave> {
        let mut k = k;
        for _ in 0..t.unsigned_abs() {
            k = self.wave_step(k, t > 0)?;
        }
        Some(k)
    }
}

/// Result of pulling a symbol back along the dynamics.
#[derive(Clone, Debug, PartialEq)]
pub struct Pullback {
    pub symbol: TorusSymbol,
    /// Relative L2 mass discarded by truncation (0 for the exact path).
    pub residual: f64,
    pub bandwidth: usize,
}

impl Pullback {
    pub fn warning(&self) -> Option<Error> {
        (self.residual > TRUNCATION_WARN).then_some(Error::TruncationWarning {
            residual: self.residual,
            bandwidth: self.bandwidth,
        })
    }
}

/// a o G^t. The unkicked map acts on modes exactly (e_k -> e_{(A^T)^t k});
/// a kicked map needs `k_out` and goes through a grid and an FFT.
pub fn pullback(a: &TorusSymbol, map: &AnosovMap, t: i64, k_out: Option<usize>) -> Result<Pullback> {
    if t == 0 {
        return Ok(Pullback {
            symbol: a.clone(),
            residual: 0.0,
            bandwidth: a.bandwidth(),
        });
    }
    if map.epsilon == 0.0 {
        let mut coeffs = BTreeMap::new();
        for (k, c) in a.iter() {
            let kt = map.wave_power(k, t);
            let ok = kt.filter(|w| w.0.unsigned_abs().max(w.1.unsigned_abs()) as usize <= BANDWIDTH_CAP);
            match ok {
                Some(w) => {
                    coeffs.insert(w, c);
                }
                None => {
                    let bw = kt.map_or(usize::MAX, |w| w.0.unsigned_abs().max(w.1.unsigned_abs()) as usize);
                    return Err(Error::BandwidthOverflow {
                        bandwidth: bw,
                        cap: BANDWIDTH_CAP,
                    });
                }
            }
        }
        let s = TorusSymbol::from_coeffs(coeffs);
        let bw = s.bandwidth();
        return Ok(Pullback {
            symbol: s,
            residual: 0.0,
            bandwidth: bw,
        });
    }
    let k_out = k_out.ok_or_else(|| Error::Invalid("kicked pullback needs a target bandwidth".into()))?;
    let m = (4 * (k_out + 1)).max(64).next_power_of_two();
    let eval = SymbolEvaluator::new(a);
    let rows: Vec<Vec<C64>> = (0..m)
        .into_par_iter()
        .map(|p| {
            let mut ex = vec![C64::new(0.0, 0.0); eval.scratch_len()];
            let mut ey = ex.clone();
            (0..m)
                .map(|q| {
                    let z = map.iterate([p as f64 / m as f64, q as f64 / m as f64], t);
                    eval.eval_with(z[0], z[1], &mut ex, &mut ey)
                })
                .collect()
        })
        .collect();
    let mut g = ndarray::Array2::from_shape_fn((m, m), |(p, q)| rows[p][q]);
    fft2(&mut g, false);
    let mm = (m * m) as f64;
    let ko = k_out as i64;
    let mut kept = BTreeMap::new();
    let (mut total, mut inside) = (0.0, 0.0);
    for ((p, q), c) in g.indexed_iter() {
        let c = c / mm;
        let k1 = if p < m / 2 { p as i64 } else { p as i64 - m as i64 };
        let k2 = if q < m / 2 { q as i64 } else { q as i64 - m as i64 };
        total += c.norm_sqr();
        if k1.abs() <= ko && k2.abs() <= ko {
            inside += c.norm_sqr();
            if c.norm() > 1e-300 {
                kept.insert((k1, k2), c);
            }
        }
    }
    let residual = if total > 0.0 {
        ((total - inside).max(0.0) / total).sqrt()
    } else {
        0.0
    };
    Ok(Pullback {
        symbol: TorusSymbol::from_coeffs(kept),
        residual,
        bandwidth: k_out,
    })
}

/// Av_T a = (1/T) sum_{t<T} a o G^t.
pub fn time_average(a: &TorusSymbol, map: &AnosovMap, big_t: usize, k_out: Option<usize>) -> Result<TorusSymbol> {
    if big_t == 0 {
        return Err(Error::Invalid("time average needs T >= 1".into()));
    }
    let mut acc = TorusSymbol::zero();
    for t in 0..big_t as i64 {
        acc = acc.add(&pullback(a, map, t, k_out)?.symbol);
    }
    Ok(acc.scale(C64::new(1.0 / big_t as f64, 0.0)))
}

/// C(t) = int f conj(g o G^t) - mean(f) conj(mean(g)), exact for the
/// unkicked map. Only modes of f are visited, so there is no cap.
pub fn correlation_exact(f: &TorusSymbol, g: &TorusSymbol, map: &AnosovMap, t: i64) -> C64 {
    assert!(map.epsilon == 0.0, "exact correlation needs an unkicked map");
    let mut acc = C64::new(0.0, 0.0);
    for (l, c) in g.iter() {
        if l == (0, 0) {
            continue;
        }
        if let Some(k) = map.wave_power(l, t) {
            let fk = f.coeff(k);
            if fk != C64::new(0.0, 0.0) {
                acc += fk * c.conj();
            }
        }
    }
    acc
}

/// Beyond this lag band-limited correlations of the linear map vanish.
pub fn correlation_horizon(map: &AnosovMap, k: usize) -> i64 {
    ((2.0 * k.max(1) as f64).ln() / map.lyap).ceil() as i64 + 1
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelationSeries {
    pub t: Vec<i64>,
    pub c: Vec<C64>,
    /// Quadrature error estimate per lag (None when exact).
    pub err: Option<Vec<f64>>,
}

impl CorrelationSeries {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,re,im,abs\n");
        for (t, c) in self.t.iter().zip(&self.c) {
            s.push_str(&format!("{t},{:e},{:e},{:e}\n", c.re, c.im, c.norm()));
        }
        s
    }
}

/// C(t) for t = 0..=tmax. Exact for eps = 0, otherwise midpoint quadrature
/// on an m x m grid; the error column is the change under a quarter-cell
/// shift of the grid.
pub fn correlation(f: &TorusSymbol, g: &TorusSymbol, map: &AnosovMap, tmax: usize, m: usize) -> CorrelationSeries {
    let ts: Vec<i64> = (0..=tmax as i64).collect();
    if map.epsilon == 0.0 {
        let c = ts.iter().map(|&t| correlation_exact(f, g, map, t)).collect();
        return CorrelationSeries { t: ts, c, err: None };
    }
    let a = correlation_quadrature(f, g, map, tmax, m, 0.5);
    let b = correlation_quadrature(f, g, map, tmax, m, 0.25);
    let err = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).collect();
    CorrelationSeries {
        t: ts,
        c: a,
        err: Some(err),
    }
}

fn correlation_quadrature(
    f: &TorusSymbol,
    g: &TorusSymbol,
    map: &AnosovMap,
    tmax: usize,
    m: usize,
    shift: f64,
) -> Vec<C64> {
    let fv = f.evaluate_grid_shifted(m, shift, shift);
    let eval = SymbolEvaluator::new(g);
    let sums: Vec<Vec<C64>> = (0..m)
        .into_par_iter()
        .map(|p| {
            let mut ex = vec![C64::new(0.0, 0.0); eval.scratch_len()];
            let mut ey = ex.clone();
            let mut acc = vec![C64::new(0.0, 0.0); tmax + 1];
            for q in 0..m {
                let mut z = [(p as f64 + shift) / m as f64, (q as f64 + shift) / m as f64];
                let fz = fv[[p, q]];
                for a in acc.iter_mut() {
                    *a += fz * eval.eval_with(z[0], z[1], &mut ex, &mut ey).conj();
                    z = map.apply(z);
                }
            }
            acc
        })
        .collect();
    let mm = (m * m) as f64;
    let base = f.mean() * g.mean().conj();
    (0..=tmax)
        .map(|t| sums.iter().map(|r| r[t]).sum::<C64>() / mm - base)
        .collect()
}

/// Exponential fit |C(t)| ~ C e^{-c t}.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    pub constant: f64,
    pub rate: f64,
    pub r2: f64,
    /// Lags used in the fit.
    pub range: Vec<i64>,
}

/// Fits log|C(t)| on the initial run of lags whose |C| exceeds 3x the error
/// estimate (all lags with nonzero |C| when no estimate is present).
pub fn fit_decay(s: &CorrelationSeries) -> Result<DecayFit> {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (i, (t, c)) in s.t.iter().zip(&s.c).enumerate() {
        let noise = s.err.as_ref().map_or(0.0, |e| e[i]);
        if c.norm() <= 3.0 * noise || c.norm() == 0.0 {
            break;
        }
        x.push(*t as f64);
        y.push(c.norm().ln());
    }
    if x.len() < 3 {
        return Err(Error::SignalBelowNoise);
    }
    let LineFit {
        slope, intercept, r2, ..
    } = ols(&x, &y)?;
    Ok(DecayFit {
        constant: intercept.exp(),
        rate: -slope,
        r2,
        range: x.iter().map(|v| *v as i64).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErgodicityRate {
    #[serde(rename = "T")]
    pub ts: Vec<usize>,
    pub norm: Vec<f64>,
    /// Fit of log norm against log T; None when every norm is exactly 0.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub r2: Option<f64>,
    /// Decay exponent p = -slope.
    pub p: Option<f64>,
}

/// |Av_T f|_{L2} from the correlation double sum
/// |Av_T f|^2 = (1/T) sum_{|s| < T} (1 - |s|/T) C(s), with f's mean removed.
pub fn ergodicity_rate(f: &TorusSymbol, map: &AnosovMap, ts: &[usize], m: usize) -> Result<ErgodicityRate> {
    if ts.len() < 3 {
        return Err(Error::FitDegenerate(ts.len()));
    }
    if ts.contains(&0) {
        return Err(Error::Invalid("T values must be >= 1".into()));
    }
    let f0 = f.sub(&TorusSymbol::constant(f.mean()));
    let tmax = *ts.iter().max().unwrap();
    let c = correlation(&f0, &f0, map, tmax - 1, m).c;
    let norm: Vec<f64> = ts
        .iter()
        .map(|&big_t| {
            let tt = big_t as f64;
            let mut s = c[0].re;
            for (tau, ct) in c.iter().enumerate().take(big_t).skip(1) {
                s += 2.0 * (1.0 - tau as f64 / tt) * ct.re;
            }
            (s / tt).max(0.0).sqrt()
        })
        .collect();
    if norm.iter().all(|v| *v == 0.0) {
        return Ok(ErgodicityRate {
            ts: ts.to_vec(),
            norm,
            slope: None,
            intercept: None,
            r2: None,
            p: None,
        });
    }
    let lx: Vec<f64> = ts.iter().map(|t| (*t as f64).ln()).collect();
    let ly: Vec<f64> = norm.iter().map(|v| v.ln()).collect();
    let fit = ols(&lx, &ly)?;
    Ok(ErgodicityRate {
        ts: ts.to_vec(),
        norm,
        slope: Some(fit.slope),
        intercept: Some(fit.intercept),
        r2: Some(fit.r2),
        p: Some(-fit.slope),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExpansionRate {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub std_err: f64,
}

/// Mean log growth per step of the separation of nearby orbit pairs.
/// Pairs start 1e-9 apart, run 10 burn-in steps to align with the unstable
/// direction, then average the growth over 20 renormalized steps.
pub fn expansion_rate(map: &AnosovMap, samples: usize, seed: u64) -> Result<ExpansionRate> {
    if samples < 10 {
        return Err(Error::Invalid(format!(
            "expansion rate needs >= 10 samples (got {samples})"
        )));
    }
    const SEP: f64 = 1e-9;
    const BURN: usize = 10;
    const STEPS: usize = 20;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<([f64; 2], f64)> = (0..samples)
        .map(|_| {
            (
                [rng.random::<f64>(), rng.random::<f64>()],
                rng.random::<f64>() * 2.0 * PI,
            )
        })
        .collect();
    let wrap = |d: f64| d - d.round();
    let rates: Vec<f64> = starts
        .par_iter()
        .map(|&(z0, th)| {
            let mut z = z0;
            let mut w = [frac(z0[0] + SEP * th.cos()), frac(z0[1] + SEP * th.sin())];
            let mut total = 0.0;
            for step in 0..BURN + STEPS {
                z = map.apply(z);
                w = map.apply(w);
                let d = [wrap(w[0] - z[0]), wrap(w[1] - z[1])];
                let len = d[0].hypot(d[1]);
                if step >= BURN {
                    total += (len / SEP).ln();
                }
                w = [frac(z[0] + d[0] * SEP / len), frac(z[1] + d[1] * SEP / len)];
            }
            total / STEPS as f64
        })
        .collect();
    let n = rates.len() as f64;
    let mean = rates.iter().sum::<f64>() / n;
    let var = rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(ExpansionRate {
        mean,
        min: rates.iter().copied().fold(f64::INFINITY, f64::min),
        max: rates.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        std_err: (var / n).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(matches!(
            AnosovMap::new([[1, 1], [0, 1]], 0.0),
            Err(Error::NotHyperbolic(_))
        ));
        assert!(matches!(
            AnosovMap::new([[2, 1], [3, 1]], 0.0),
            Err(Error::NotHyperbolic(_))
        ));
        let m = AnosovMap::cat(0.0);
        assert!(m.is_quantizable());
        assert!((m.lyap - (2.0 + 3f64.sqrt()).ln()).abs() < 1e-15);
        assert!(!AnosovMap::new([[2, 1], [1, 1]], 0.0).unwrap().is_quantizable());
    }

    #[test]
    fn inverse_undoes_kicked_map() {
        let m = AnosovMap::cat(0.05);
        for i in 0..50 {
            let z = [(0.37 * i as f64).fract(), (0.61 * i as f64 + 0.1).fract()];
            let w = m.apply_inverse(m.apply(z));
            let d = ((w[0] - z[0]) - (w[0] - z[0]).round()).abs() + ((w[1] - z[1]) - (w[1] - z[1]).round()).abs();
            assert!(d < 1e-12);
        }
    }

    #[test]
    fn mode_pullback() {
        let m = AnosovMap::cat(0.0);
        let p = pullback(&TorusSymbol::mode(1, 0), &m, 1, None).unwrap();
        assert_eq!(p.symbol, TorusSymbol::mode(2, 1));
        let back = pullback(&p.symbol, &m, -1, None).unwrap();
        assert_eq!(back.symbol, TorusSymbol::mode(1, 0));
        assert!(matches!(
            pullback(&TorusSymbol::mode(1, 0), &m, 12, None),
            Err(Error::BandwidthOverflow { .. })
        ));
    }

    #[test]
    fn kicked_pullback_matches_composition() {
        let m = AnosovMap::cat(0.02);
        let a = TorusSymbol::cosine(1, 0).add(&TorusSymbol::cosine(0, 1));
        let p = pullback(&a, &m, 1, Some(40)).unwrap();
        assert!(p.warning().is_none(), "{}", p.residual);
        for i in 0..20 {
            let z = [(0.123 * i as f64).fract(), (0.777 * i as f64 + 0.05).fract()];
            let w = m.apply(z);
            assert!((p.symbol.evaluate(z[0], z[1]) - a.evaluate(w[0], w[1])).norm() < 1e-8);
        }
    }

    #[test]
    fn correlation_of_modes() {
        let m = AnosovMap::cat(0.0);
        let e = TorusSymbol::mode(1, 0);
        assert_eq!(correlation_exact(&e, &e, &m, 0), C64::new(1.0, 0.0));
        assert_eq!(correlation_exact(&e, &e, &m, 1), C64::new(0.0, 0.0));
        // f = e_(2,1) meets g o G^1 for g = e_(1,0)
        assert_eq!(
            correlation_exact(&TorusSymbol::mode(2, 1), &e, &m, 1),
            C64::new(1.0, 0.0)
        );
    }

    #[test]
    fn decay_fit_recovers_rate() {
        let s = CorrelationSeries {
            t: (0..8).collect(),
            c: (0..8).map(|t| C64::new(2.0 * (-0.7 * t as f64).exp(), 0.0)).collect(),
            err: None,
        };
        let f = fit_decay(&s).unwrap();
        assert!((f.rate - 0.7).abs() < 1e-12 && (f.constant - 2.0).abs() < 1e-12);
    }
}
