use ndarray::Array2;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::anosov::{pullback, AnosovMap};
use crate::error::{Error, Result};
use crate::fourier::{cis, roots_of_unity};
use crate::linalg::{self, CMat};
use crate::quantize::{operator_norm, quantize, quantize_samples, QuantizedOperator};
use crate::symbols::{SymbolEvaluator, TorusSymbol};

/// Metaplectic propagator of the (kicked) map at dimension N.
///
/// For A = [[a, b], [c, d]] the unkicked matrix is
/// U_jk ~ sum_{m < |b|} exp(pi i (a (k + mN)^2 - 2 j (k + mN) + d j^2) / (N b)),
/// normalized to be unitary; it satisfies U^* Op(f) U = Op(f o A) exactly.
/// The kick multiplies columns by exp(-2 pi i N eps V(k/N)).
pub fn propagator(map: &AnosovMap, n: usize) -> Result<QuantizedOperator> {
    if n < 2 {
        return Err(Error::Invalid(format!("dimension N = {n} < 2")));
    }
    let [[a, b], [_, d]] = map.a;
    if b == 0 {
        return Err(Error::SingularError(map.a));
    }
    if !map.is_quantizable() {
        return Err(Error::ParityError(map.a));
    }
    let ni = n as i64;
    let modulus = 2 * ni * b.abs();
    let roots = roots_of_unity(modulus as usize);
    let sb = b.signum();
    let rows: Vec<Vec<C64>> = (0..ni)
        .into_par_iter()
        .map(|j| {
            (0..ni)
                .map(|k| {
                    (0..b.abs())
                        .map(|m| {
                            let q = k + m * ni;
                            let p = (a * q * q - 2 * j * q + d * j * j) * sb;
                            roots[p.rem_euclid(modulus) as usize]
                        })
                        .sum::<C64>()
                })
                .collect()
        })
        .collect();
    let mut u = Array2::from_shape_fn((n, n), |(j, k)| rows[j][k]);
    let scale = (linalg::frobenius(&u).powi(2) / n as f64).sqrt();
    u.mapv_inplace(|z| z / scale);
    if map.epsilon != 0.0 {
        let kick: Vec<C64> = (0..n)
            .map(|k| {
                let v = map.kick.value(k as f64 / n as f64);
                cis(-2.0 * std::f64::consts::PI * n as f64 * map.epsilon * v)
            })
            .collect();
        for mut row in u.rows_mut() {
            for (z, w) in row.iter_mut().zip(&kick) {
                *z *= w;
            }
        }
    }
    Ok(QuantizedOperator::new(
        u,
        format!("U_{n}(A={:?}, eps={})", map.a, map.epsilon),
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EgorovPoint {
    pub t: i64,
    pub defect: f64,
    /// Bandwidth of a o G^t (exact path) or of the reference grid.
    pub bandwidth: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EgorovSweep {
    pub n: usize,
    pub epsilon: f64,
    pub ehrenfest_time: f64,
    pub points: Vec<EgorovPoint>,
    /// Set when the unkicked sweep stopped at the aliasing limit.
    pub stopped: Option<Error>,
}

/// |U^{-t} Op(a) U^t - Op(a o G^t)| for t = 0..=tmax.
///
/// Unkicked maps compare against the exact pullback and stop with
/// AliasLimited once its bandwidth reaches N/2. Kicked maps quantize
/// a o G^t from half-lattice samples, which has no bandwidth limit.
pub fn egorov_sweep(a: &TorusSymbol, map: &AnosovMap, n: usize, tmax: usize) -> Result<EgorovSweep> {
    let u = propagator(map, n)?.matrix;
    let ud = linalg::adjoint(&u);
    let mut evolved = quantize(a, n)?.matrix;
    let mut points = Vec::new();
    let mut stopped = None;
    for t in 0..=tmax as i64 {
        if t > 0 {
            evolved = ud.dot(&evolved).dot(&u);
        }
        let (reference, bw) = if map.epsilon == 0.0 {
            let p = pullback(a, map, t, None)?;
            if 2 * p.bandwidth >= n {
                stopped = Some(Error::AliasLimited {
                    t,
                    n,
                    bandwidth: p.bandwidth,
                });
                break;
            }
            (quantize(&p.symbol, n)?.matrix, p.bandwidth)
        } else {
            (evolved_reference(a, map, n, t), n)
        };
        let diff: CMat = &evolved - &reference;
        points.push(EgorovPoint {
            t,
            defect: operator_norm(&QuantizedOperator::new(diff, "egorov")),
            bandwidth: bw,
        });
    }
    Ok(EgorovSweep {
        n,
        epsilon: map.epsilon,
        ehrenfest_time: map.ehrenfest_time(n),
        points,
        stopped,
    })
}

fn evolved_reference(a: &TorusSymbol, map: &AnosovMap, n: usize, t: i64) -> CMat {
    let two_n = 2 * n;
    let eval = SymbolEvaluator::new(a);
    let rows: Vec<Vec<C64>> = (0..two_n)
        .into_par_iter()
        .map(|s| {
            let mut ex = vec![C64::new(0.0, 0.0); eval.scratch_len()];
            let mut ey = ex.clone();
            (0..two_n)
                .map(|q| {
                    let z = map.iterate([s as f64 / two_n as f64, q as f64 / two_n as f64], t);
                    eval.eval_with(z[0], z[1], &mut ex, &mut ey)
                })
                .collect()
        })
        .collect();
    let g = Array2::from_shape_fn((two_n, two_n), |(s, q)| rows[s][q]);
    quantize_samples(&g).matrix
}

/// Single-time Egorov defect.
pub fn egorov_defect(a: &TorusSymbol, map: &AnosovMap, n: usize, t: i64) -> Result<f64> {
    if t < 0 {
        return Err(Error::Invalid("egorov_defect needs t >= 0".into()));
    }
    let s = egorov_sweep(a, map, n, t as usize)?;
    match s.stopped {
        Some(e) => Err(e),
        None => Ok(s.points.last().map_or(0.0, |p| p.defect)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, unitarity_defect};

    #[test]
    fn unitary_and_covariant() {
        let map = AnosovMap::cat(0.0);
        assert!(unitarity_defect(&propagator(&map, 2).unwrap().matrix) < 1e-12);
        for n in [5usize, 7, 8, 16] {
            let u = propagator(&map, n).unwrap().matrix;
            assert!(unitarity_defect(&u) < 1e-12);
            let ud = linalg::adjoint(&u);
            for k in [(1, 0), (0, 1), (2, -1)] {
                let e = TorusSymbol::mode(k.0, k.1);
                let lhs = ud.dot(&quantize(&e, n).unwrap().matrix).dot(&u);
                // (A^T) k
                let kt = (2 * k.0 + 3 * k.1, k.0 + 2 * k.1);
                let rhs = crate::quantize::quantize_function(|x, y| TorusSymbol::mode(kt.0, kt.1).evaluate(x, y), n);
                assert!(max_abs_diff(&lhs, &rhs.matrix) < 1e-12, "n={n} k={k:?}");
            }
        }
    }

    #[test]
    fn rejects_bad_maps() {
        let m = AnosovMap::new([[2, 1], [1, 1]], 0.0).unwrap();
        assert_eq!(propagator(&m, 8).unwrap_err(), Error::ParityError(m.a));
        let m = AnosovMap::new([[3, 0], [1, 1]], 0.0);
        assert!(m.is_err());
        let m = AnosovMap::new([[2, 3], [1, 2]], 0.0).unwrap();
        assert!(unitarity_defect(&propagator(&m, 6).unwrap().matrix) < 1e-12);
    }

    #[test]
    fn exact_egorov_small_n() {
        let a = TorusSymbol::cosine(1, 0).add(&TorusSymbol::cosine(0, 1));
        let s = egorov_sweep(&a, &AnosovMap::cat(0.0), 8, 4).unwrap();
        assert!(s.points.iter().all(|p| p.defect < 1e-12));
        assert!(matches!(s.stopped, Some(Error::AliasLimited { .. })));
    }

    #[test]
    fn kick_bound() {
        let n = 32;
        let u0 = propagator(&AnosovMap::cat(0.0), n).unwrap();
        let u1 = propagator(&AnosovMap::cat(0.05), n).unwrap();
        let d = operator_norm(&QuantizedOperator::new(&u1.matrix - &u0.matrix, "d"));
        assert!(d <= 2.0 * std::f64::consts::PI * n as f64 * 0.05 + 1e-10);
        assert!(unitarity_defect(&u1.matrix) < 1e-12);
    }
}
