//! Weyl quantization on C^N with h = 1/(2 pi N).
//!
//! The mode e_k quantizes to T(k) = e^{pi i k1 k2 / N} Z^k1 S^k2 with the
//! clock Z = diag(e^{2 pi i j / N}) and the shift (S psi)_j = psi_{j+1}, so
//! T(k)_{j, j+k2} = e^{pi i k1 (k2 + 2j) / N}. The phase is an exact
//! 2N-th root of unity and is looked up in a table.

use std::f64::consts::PI;
use std::io::{Read, Write};

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::{fft1, roots_of_unity};
use crate::linalg::{self, CMat};
use crate::symbols::TorusSymbol;

pub const MAGIC: &[u8; 4] = b"QOP1";

pub fn planck(n: usize) -> f64 {
    1.0 / (2.0 * PI * n as f64)
}

#[derive(Clone, Debug)]
pub struct QuantizedOperator {
    pub dim: usize,
    pub matrix: CMat,
    pub h: f64,
    pub label: String,
}

impl QuantizedOperator {
    pub fn new(matrix: CMat, label: impl Into<String>) -> Self {
        let dim = matrix.nrows();
        assert_eq!(dim, matrix.ncols(), "operator must be square");
        QuantizedOperator {
            dim,
            matrix,
            h: planck(dim),
            label: label.into(),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::new(linalg::adjoint(&self.matrix), format!("({})^*", self.label))
    }

    /// max |A - A^*| entrywise.
    pub fn hermitian_defect(&self) -> f64 {
        linalg::max_abs_diff(&self.matrix, &linalg::adjoint(&self.matrix))
    }

    pub fn trace(&self) -> C64 {
        self.matrix.diag().sum()
    }

    /// Writes the QOP1 binary format: "QOP1", u32 N (LE), 8 zero bytes,
    /// then N*N (re, im) float64 LE pairs in row-major order.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let mut head = [0u8; 16];
        head[..4].copy_from_slice(MAGIC);
        head[4..8].copy_from_slice(&(self.dim as u32).to_le_bytes());
        w.write_all(&head)?;
        let mut buf = Vec::with_capacity(16 * self.dim);
        for row in self.matrix.rows() {
            buf.clear();
            for z in row {
                buf.extend_from_slice(&z.re.to_le_bytes());
                buf.extend_from_slice(&z.im.to_le_bytes());
            }
            w.write_all(&buf)?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R, label: &str) -> Result<Self> {
        let mut head = [0u8; 16];
        r.read_exact(&mut head)?;
        if &head[..4] != MAGIC {
            return Err(Error::Invalid("bad QOP1 magic".into()));
        }
        let n = u32::from_le_bytes(head[4..8].try_into().unwrap()) as usize;
        let mut bytes = vec![0u8; 16 * n * n];
        r.read_exact(&mut bytes)?;
        let f = |i: usize| f64::from_le_bytes(bytes[8 * i..8 * i + 8].try_into().unwrap());
        let m = Array2::from_shape_fn((n, n), |(i, j)| {
            let k = 2 * (i * n + j);
            C64::new(f(k), f(k + 1))
        });
        Ok(Self::new(m, label))
    }

    /// CSV with header `row,col,re,im`, one line per entry. Only for N <= 64.
    pub fn to_csv(&self) -> Result<String> {
        if self.dim > 64 {
            return Err(Error::Invalid(format!(
                "CSV export limited to N <= 64 (N = {})",
                self.dim
            )));
        }
        let mut s = String::from("row,col,re,im\n");
        for ((i, j), z) in self.matrix.indexed_iter() {
            s.push_str(&format!("{i},{j},{:e},{:e}\n", z.re, z.im));
        }
        Ok(s)
    }
}

/// Op(a) stored by diagonals: entry (j, j + k2 mod N) = diags[i][j] for
/// k2 = offsets[i]. A band-limited symbol with 2K < N has 2K + 1 diagonals.
#[derive(Clone, Debug)]
pub struct BandedOperator {
    pub n: usize,
    pub offsets: Vec<i64>,
    pub diags: Vec<Vec<C64>>,
}

impl BandedOperator {
    pub fn to_dense(&self) -> CMat {
        let n = self.n;
        let mut m = Array2::zeros((n, n));
        for (k2, d) in self.offsets.iter().zip(&self.diags) {
            let s = k2.rem_euclid(n as i64) as usize;
            for (j, v) in d.iter().enumerate() {
                m[[j, (j + s) % n]] += v;
            }
        }
        m
    }

    /// Op(a) v.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (k2, d) in self.offsets.iter().zip(&self.diags) {
            let s = k2.rem_euclid(n as i64) as usize;
            for j in 0..n {
                out[j] += d[j] * v[(j + s) % n];
            }
        }
        out
    }

    /// <Op(a) u, u> = sum_j conj(u_j) (Op(a) u)_j.
    pub fn expectation(&self, u: &[C64]) -> C64 {
        let n = self.n;
        let mut acc = C64::new(0.0, 0.0);
        for (k2, d) in self.offsets.iter().zip(&self.diags) {
            let s = k2.rem_euclid(n as i64) as usize;
            let mut part = C64::new(0.0, 0.0);
            for j in 0..n {
                part += u[j].conj() * d[j] * u[(j + s) % n];
            }
            acc += part;
        }
        acc
    }
}

fn check_alias(a: &TorusSymbol, n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Invalid(format!("dimension N = {n} < 2")));
    }
    if n <= 2 * a.bandwidth() {
        return Err(Error::AliasingError {
            n,
            bandwidth: a.bandwidth(),
        });
    }
    Ok(())
}

/// Diagonal representation of Op_N(a).
pub fn quantize_banded(a: &TorusSymbol, n: usize) -> Result<BandedOperator> {
    check_alias(a, n)?;
    let two_n = 2 * n as i64;
    let roots = roots_of_unity(2 * n);
    let mut rows: std::collections::BTreeMap<i64, Vec<(i64, C64)>> = Default::default();
    for ((k1, k2), c) in a.iter() {
        rows.entry(k2).or_default().push((k1, c));
    }
    let entries: Vec<(i64, Vec<(i64, C64)>)> = rows.into_iter().collect();
    let diags: Vec<Vec<C64>> = entries
        .par_iter()
        .map(|(k2, modes)| {
            // diag[j] = sum_k1 c e^{2 pi i k1 (2j + k2) / 2N}
            if modes.len() <= 16 {
                (0..n as i64)
                    .map(|j| {
                        modes
                            .iter()
                            .map(|(k1, c)| c * roots[(k1 * (2 * j + k2)).rem_euclid(two_n) as usize])
                            .sum()
                    })
                    .collect()
            } else {
                let mut g = vec![C64::new(0.0, 0.0); 2 * n];
                for (k1, c) in modes {
                    g[k1.rem_euclid(two_n) as usize] += c;
                }
                fft1(&mut g, true);
                (0..n as i64)
                    .map(|j| g[(2 * j + k2).rem_euclid(two_n) as usize])
                    .collect()
            }
        })
        .collect();
    Ok(BandedOperator {
        n,
        offsets: entries.iter().map(|(k2, _)| *k2).collect(),
        diags,
    })
}

pub fn quantize(a: &TorusSymbol, n: usize) -> Result<QuantizedOperator> {
    let b = quantize_banded(a, n)?;
    Ok(QuantizedOperator::new(
        b.to_dense(),
        format!("Op_{n}(K={}, modes={})", a.bandwidth(), a.len()),
    ))
}

/// Weyl quantization of an arbitrary function from its samples on the
/// half-lattice (s / 2N, q / 2N), s, q = 0..2N. Exact for every symbol
/// whose Fourier support is seen through that lattice, no bandwidth limit.
pub fn quantize_samples(samples: &Array2<C64>) -> QuantizedOperator {
    let (two_n, q) = samples.dim();
    assert!(two_n == q && two_n % 2 == 0 && two_n >= 4, "need a 2N x 2N sample grid");
    let n = two_n / 2;
    // P[s][k2] = (1/2N) sum_q F[s][q] e^{-2 pi i k2 q / 2N}
    let p: Vec<Vec<C64>> = samples
        .rows()
        .into_iter()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|row| {
            let mut r = row.to_vec();
            fft1(&mut r, false);
            r.iter().map(|z| z / two_n as f64).collect()
        })
        .collect();
    let mut m = Array2::zeros((n, n));
    for j in 0..n {
        for k2 in 0..two_n {
            m[[j, (j + k2) % n]] += p[(2 * j + k2) % two_n][k2];
        }
    }
    QuantizedOperator::new(m, format!("Op_{n}(samples)"))
}

pub fn quantize_function<F>(f: F, n: usize) -> QuantizedOperator
where
    F: Fn(f64, f64) -> C64 + Sync,
{
    let two_n = 2 * n;
    let rows: Vec<Vec<C64>> = (0..two_n)
        .into_par_iter()
        .map(|s| {
            let x = s as f64 / two_n as f64;
            (0..two_n).map(|q| f(x, q as f64 / two_n as f64)).collect()
        })
        .collect();
    let g = Array2::from_shape_fn((two_n, two_n), |(s, q)| rows[s][q]);
    quantize_samples(&g)
}

pub fn operator_norm(a: &QuantizedOperator) -> f64 {
    if a.dim == 0 {
        return 0.0;
    }
    let scale = a.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if a.hermitian_defect() <= 1e-14 * scale.max(1.0) {
        let w = linalg::eigvalsh(&a.matrix).expect("zheevd failed to converge");
        w[0].abs().max(w[w.len() - 1].abs())
    } else {
        linalg::spectral_norm(&a.matrix)
    }
}

/// Operator-norm defects of the torus symbol calculus at dimension N.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CalculusDefects {
    pub n: usize,
    /// |Op(conj a) - Op(a)^*|
    pub adjoint_defect: f64,
    /// |(Op(a)Op(b) + Op(b)Op(a))/2 - Op(ab)|, the symmetric product remainder.
    pub product_defect: f64,
    /// |Op(a)Op(b) - Op(ab)|
    pub product_defect_raw: f64,
    /// |Op(a)Op(b) - Op(ab) - (ih/2) Op({a,b})|
    pub product_defect_corrected: f64,
    /// |[Op(a), Op(b)] - ih Op({a,b})|
    pub commutator_defect: f64,
}

pub fn calculus_defects(a: &TorusSymbol, b: &TorusSymbol, n: usize) -> Result<CalculusDefects> {
    let kab = a.bandwidth() + b.bandwidth();
    if n <= 2 * kab {
        return Err(Error::AliasingError { n, bandwidth: kab });
    }
    let h = planck(n);
    let ih = C64::new(0.0, h);
    let oa = quantize(a, n)?.matrix;
    let ob = quantize(b, n)?.matrix;
    let oab = quantize(&a.product(b), n)?.matrix;
    let opb = quantize(&a.poisson_bracket(b), n)?.matrix;
    let oac = quantize(&a.conj(), n)?.matrix;
    let ab = oa.dot(&ob);
    let ba = ob.dot(&oa);
    let half = C64::new(0.5, 0.0);
    let norm = |m: CMat| QuantizedOperator::new(m, "defect");
    Ok(CalculusDefects {
        n,
        adjoint_defect: linalg::max_abs_diff(&oac, &linalg::adjoint(&oa)),
        product_defect: operator_norm(&norm((&ab + &ba).mapv(|z| z * half) - &oab)),
        product_defect_raw: operator_norm(&norm(&ab - &oab)),
        product_defect_corrected: operator_norm(&norm(&ab - &oab - opb.mapv(|z| z * ih * half))),
        commutator_defect: operator_norm(&norm(&ab - &ba - opb.mapv(|z| z * ih))),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceAverage {
    /// Re N^{-1} Tr A
    pub trace_n: f64,
    /// Re coeff(0)
    pub mean: f64,
    /// |N^{-1} Tr A - coeff(0)|
    pub defect: f64,
}

pub fn trace_average(a_op: &QuantizedOperator, a: &TorusSymbol) -> TraceAverage {
    let t = a_op.trace() / a_op.dim as f64;
    TraceAverage {
        trace_n: t.re,
        mean: a.mean().re,
        defect: (t - a.mean()).norm(),
    }
}
