//! Thin wrappers around `rustfft` for 1D and 2D transforms.

use ndarray::{Array2, Axis};
use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

/// In-place transform of a contiguous buffer. `inverse` uses the `+` sign.
/// Unnormalized in both directions.
pub fn fft1(buf: &mut [C64], inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let plan = if inverse {
        planner.plan_fft_inverse(buf.len())
    } else {
        planner.plan_fft_forward(buf.len())
    };
    plan.process(buf);
}

/// Unnormalized 2D transform, rows then columns.
pub fn fft2(a: &mut Array2<C64>, inverse: bool) {
    let (m, n) = a.dim();
    let mut planner = FftPlanner::<f64>::new();
    let (prow, pcol) = if inverse {
        (planner.plan_fft_inverse(n), planner.plan_fft_inverse(m))
    } else {
        (planner.plan_fft_forward(n), planner.plan_fft_forward(m))
    };
    let mut row = vec![C64::new(0.0, 0.0); n];
    for mut r in a.axis_iter_mut(Axis(0)) {
        for (d, s) in row.iter_mut().zip(r.iter()) {
            *d = *s;
        }
        prow.process(&mut row);
        for (d, s) in r.iter_mut().zip(row.iter()) {
            *d = *s;
        }
    }
    let mut col = vec![C64::new(0.0, 0.0); m];
    for mut c in a.axis_iter_mut(Axis(1)) {
        for (d, s) in col.iter_mut().zip(c.iter()) {
            *d = *s;
        }
        pcol.process(&mut col);
        for (d, s) in c.iter_mut().zip(col.iter()) {
            *d = *s;
        }
    }
}

pub fn cis(t: f64) -> C64 {
    C64::new(t.cos(), t.sin())
}

/// Table of e^{2 pi i r / m}, r = 0..m.
pub fn roots_of_unity(m: usize) -> Vec<C64> {
    (0..m)
        .map(|r| cis(2.0 * std::f64::consts::PI * r as f64 / m as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fft2_roundtrip_and_single_mode() {
        let mut a = Array2::zeros((4, 6));
        a[[1, 2]] = C64::new(1.0, 0.0);
        fft2(&mut a, true);
        // a[p,q] = e^{2 pi i (p/4 + 2q/6)}
        for p in 0..4 {
            for q in 0..6 {
                let e = cis(2.0 * std::f64::consts::PI * (p as f64 / 4.0 + 2.0 * q as f64 / 6.0));
                assert!((a[[p, q]] - e).norm() < 1e-14);
            }
        }
        fft2(&mut a, false);
        assert!((a[[1, 2]] - C64::new(24.0, 0.0)).norm() < 1e-12);
        assert!(a[[0, 0]].norm() < 1e-12);
    }
}
