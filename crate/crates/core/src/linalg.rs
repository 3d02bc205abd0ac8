//! Dense complex linear algebra on top of system LAPACK/BLAS.
//!
//! Matrices are `ndarray` arrays of `Complex64`. LAPACK wants column-major
//! storage, so every wrapper copies into a Fortran-ordered buffer first.

use ndarray::{Array2, ShapeBuilder};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type CMat = Array2<C64>;

pub fn identity(n: usize) -> CMat {
    Array2::from_diag_elem(n, C64::new(1.0, 0.0))
}

pub fn adjoint(a: &CMat) -> CMat {
    a.t().mapv(|z| z.conj())
}

pub fn matmul(a: &CMat, b: &CMat) -> CMat {
    a.dot(b)
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.dim(), b.dim());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn fortran_copy(a: &CMat) -> CMat {
    let mut f = Array2::zeros(a.dim().f());
    f.assign(a);
    f
}

/// Eigenvalues (ascending) and orthonormal eigenvectors (columns) of a
/// Hermitian matrix. Only the upper triangle of `a` is read.
pub fn eigh(a: &CMat) -> Result<(Vec<f64>, CMat)> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let mut f = fortran_copy(a);
    let mut w = vec![0.0; n];
    if n == 0 {
        return Ok((w, f));
    }
    let ni = n as i32;
    let mut info = 0;
    let mut wq = [C64::new(0.0, 0.0)];
    let mut rq = [0.0f64];
    let mut iq = [0i32];
    let q = -1i32;
    unsafe {
        lapack_sys::zheevd_(
            c"V".as_ptr(),
            c"U".as_ptr(),
            &ni,
            f.as_mut_ptr() as *mut _,
            &ni,
            w.as_mut_ptr(),
            wq.as_mut_ptr() as *mut _,
            &q,
            rq.as_mut_ptr(),
            &q,
            iq.as_mut_ptr(),
            &q,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::ConvergenceFailure(format!("zheevd workspace query info={info}")));
    }
    let lw = wq[0].re as i32;
    let lrw = rq[0] as i32;
    let liw = iq[0];
    let mut work = vec![C64::new(0.0, 0.0); lw.max(1) as usize];
    let mut rwork = vec![0.0; lrw.max(1) as usize];
    let mut iwork = vec![0i32; liw.max(1) as usize];
    unsafe {
        lapack_sys::zheevd_(
            c"V".as_ptr(),
            c"U".as_ptr(),
            &ni,
            f.as_mut_ptr() as *mut _,
            &ni,
            w.as_mut_ptr(),
            work.as_mut_ptr() as *mut _,
            &lw,
            rwork.as_mut_ptr(),
            &lrw,
            iwork.as_mut_ptr(),
            &liw,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::ConvergenceFailure(format!("zheevd info={info} (n={n})")));
    }
    Ok((w, f))
}

/// Eigenvalues only (ascending) of a Hermitian matrix.
pub fn eigvalsh(a: &CMat) -> Result<Vec<f64>> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let mut f = fortran_copy(a);
    let mut w = vec![0.0; n];
    if n == 0 {
        return Ok(w);
    }
    let ni = n as i32;
    let mut info = 0;
    let lw = (n + 1) as i32;
    let lrw = n as i32;
    let liw = 1i32;
    let mut work = vec![C64::new(0.0, 0.0); lw as usize];
    let mut rwork = vec![0.0; lrw as usize];
    let mut iwork = [0i32];
    unsafe {
        lapack_sys::zheevd_(
            c"N".as_ptr(),
            c"U".as_ptr(),
            &ni,
            f.as_mut_ptr() as *mut _,
            &ni,
            w.as_mut_ptr(),
            work.as_mut_ptr() as *mut _,
            &lw,
            rwork.as_mut_ptr(),
            &lrw,
            iwork.as_mut_ptr(),
            &liw,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::ConvergenceFailure(format!("zheevd info={info} (n={n})")));
    }
    Ok(w)
}

/// Singular values in descending order.
pub fn singular_values(a: &CMat) -> Result<Vec<f64>> {
    let (m, n) = a.dim();
    let k = m.min(n);
    if k == 0 {
        return Ok(vec![]);
    }
    let mut f = fortran_copy(a);
    let mut s = vec![0.0; k];
    let (mi, ni) = (m as i32, n as i32);
    let one = 1i32;
    let mut u = [C64::new(0.0, 0.0)];
    let mut vt = [C64::new(0.0, 0.0)];
    let mut rwork = vec![0.0; 7 * k + 8];
    let mut iwork = vec![0i32; 8 * k];
    let mut info = 0;
    let mut wq = [C64::new(0.0, 0.0)];
    let q = -1i32;
    unsafe {
        lapack_sys::zgesdd_(
            c"N".as_ptr(),
            &mi,
            &ni,
            f.as_mut_ptr() as *mut _,
            &mi,
            s.as_mut_ptr(),
            u.as_mut_ptr() as *mut _,
            &one,
            vt.as_mut_ptr() as *mut _,
            &one,
            wq.as_mut_ptr() as *mut _,
            &q,
            rwork.as_mut_ptr(),
            iwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::ConvergenceFailure(format!("zgesdd workspace query info={info}")));
    }
    let lw = (wq[0].re as i32).max(1);
    let mut work = vec![C64::new(0.0, 0.0); lw as usize];
    unsafe {
        lapack_sys::zgesdd_(
            c"N".as_ptr(),
            &mi,
            &ni,
            f.as_mut_ptr() as *mut _,
            &mi,
            s.as_mut_ptr(),
            u.as_mut_ptr() as *mut _,
            &one,
            vt.as_mut_ptr() as *mut _,
            &one,
            work.as_mut_ptr() as *mut _,
            &lw,
            rwork.as_mut_ptr(),
            iwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::ConvergenceFailure(format!("zgesdd info={info}")));
    }
    Ok(s)
}

/// Thin SVD a = U diag(s) Vh.
pub fn svd(a: &CMat) -> Result<(CMat, Vec<f64>, CMat)> {
    let (m, n) = a.dim();
    let k = m.min(n);
    let mut f = fortran_copy(a);
    let mut s = vec![0.0; k];
    let mut u: CMat = Array2::zeros((m, k).f());
    let mut vt: CMat = Array2::zeros((k, n).f());
    if k == 0 {
        return Ok((u, s, vt));
    }
    let (mi, ni, ki) = (m as i32, n as i32, k as i32);
    let lrw = (5 * k * k + 7 * k).max(2 * m.max(n) * k + 2 * k * k + k);
    let mut rwork = vec![0.0; lrw];
    let mut iwork = vec![0i32; 8 * k];
    let mut info = 0;
    let mut wq = [C64::new(0.0, 0.0)];
    let q = -1i32;
    unsafe {
        lapack_sys::zgesdd_(
            c"S".as_ptr(),
            &mi,
            &ni,
            f.as_mut_ptr() as *mut _,
            &mi,
            s.as_mut_ptr(),
            u.as_mut_ptr() as *mut _,
            &mi,
            vt.as_mut_ptr() as *mut _,
            &ki,
            wq.as_mut_ptr() as *mut _,
            &q,
            rwork.as_mut_ptr(),
            iwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::ConvergenceFailure(format!("zgesdd workspace query info={info}")));
    }
    let lw = (wq[0].re as i32).max(1);
    let mut work = vec![C64::new(0.0, 0.0); lw as usize];
    unsafe {
        lapack_sys::zgesdd_(
            c"S".as_ptr(),
            &mi,
            &ni,
            f.as_mut_ptr() as *mut _,
            &mi,
            s.as_mut_ptr(),
            u.as_mut_ptr() as *mut _,
            &mi,
            vt.as_mut_ptr() as *mut _,
            &ki,
            work.as_mut_ptr() as *mut _,
            &lw,
            rwork.as_mut_ptr(),
            iwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::ConvergenceFailure(format!("zgesdd info={info}")));
    }
    Ok((u, s, vt))
}

/// Largest singular value.
pub fn spectral_norm(a: &CMat) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    singular_values(a).expect("zgesdd failed to converge")[0]
}

pub fn frobenius(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// max |A*A - I| entrywise.
pub fn unitarity_defect(a: &CMat) -> f64 {
    let g = adjoint(a).dot(a);
    max_abs_diff(&g, &identity(a.nrows()))
}
