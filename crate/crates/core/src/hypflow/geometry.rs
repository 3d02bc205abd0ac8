//! Upper half-plane geometry with SL(2, R) matrices.

use num_complex::Complex64 as C64;

pub type Sl2 = [[f64; 2]; 2];

pub const IDENTITY: Sl2 = [[1.0, 0.0], [0.0, 1.0]];
pub const I: C64 = C64::new(0.0, 1.0);

pub fn mul(a: &Sl2, b: &Sl2) -> Sl2 {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

pub fn det(a: &Sl2) -> f64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

/// Inverse assuming det = 1.
pub fn inv(a: &Sl2) -> Sl2 {
    [[a[1][1], -a[0][1]], [-a[1][0], a[0][0]]]
}

/// Rescales to det = 1.
pub fn normalize(a: &Sl2) -> Sl2 {
    let s = det(a).sqrt();
    [[a[0][0] / s, a[0][1] / s], [a[1][0] / s, a[1][1] / s]]
}

pub fn mobius(a: &Sl2, z: C64) -> C64 {
    (z * a[0][0] + a[0][1]) / (z * a[1][0] + a[1][1])
}

/// Geodesic flow generator exp(t/2 H).
pub fn a_t(t: f64) -> Sl2 {
    let e = (t / 2.0).exp();
    [[e, 0.0], [0.0, 1.0 / e]]
}

/// Rotation about i; turns tangent directions at i by -2 phi.
pub fn rot(phi: f64) -> Sl2 {
    let (s, c) = phi.sin_cos();
    [[c, -s], [s, c]]
}

/// cosh of the hyperbolic distance.
pub fn cosh_dist(z: C64, w: C64) -> f64 {
    1.0 + (z - w).norm_sqr() / (2.0 * z.im * w.im)
}

/// Hyperbolic distance via sinh(d/2) = |z - w| / (2 sqrt(y y')), accurate
/// for small separations.
pub fn dist(z: C64, w: C64) -> f64 {
    2.0 * ((z - w).norm() / (2.0 * (z.im * w.im).sqrt())).asinh()
}

pub fn disk_to_uhp(w: C64) -> C64 {
    I * (1.0 + w) / (1.0 - w)
}

pub fn uhp_to_disk(z: C64) -> C64 {
    (z - I) / (z + I)
}

/// Hyperbolic distance in the Poincaré disk.
pub fn disk_dist(a: C64, b: C64) -> f64 {
    let num = (a - b).norm();
    let den = ((1.0 - a.norm_sqr()) * (1.0 - b.norm_sqr())).sqrt();
    2.0 * (num / den).asinh()
}

/// Euclidean center and radius of the hyperbolic circle of radius rho
/// about w0 in the disk.
pub fn disk_circle(w0: C64, rho: f64) -> (C64, f64) {
    let t = (rho / 2.0).tanh();
    let m = w0.norm_sqr();
    let den = 1.0 - t * t * m;
    (w0 * ((1.0 - t * t) / den), t * (1.0 - m) / den)
}

/// Point at distance rho from i in direction angle theta (measured at i
/// from the positive real axis of the disk picture).
pub fn from_polar_at_i(rho: f64, theta: f64) -> C64 {
    disk_to_uhp(C64::from_polar((rho / 2.0).tanh(), theta))
}

/// h = k(alpha) a(s) k(beta) with s >= 0. Returns (alpha, s, beta).
pub fn kak(h: &Sl2) -> (f64, f64, f64) {
    // h^T h = k(-beta) a(2s) k(beta)
    let p = [
        h[0][0] * h[0][0] + h[1][0] * h[1][0],
        h[0][0] * h[0][1] + h[1][0] * h[1][1],
        h[0][1] * h[0][1] + h[1][1] * h[1][1],
    ];
    let tr = p[0] + p[2];
    // eigenvalues e^{s}, e^{-s} of h^T h
    let s = ((tr / 2.0).max(1.0)).acosh();
    // eigenvector of the larger eigenvalue is k(-beta) e1 = (cos beta, -sin beta)
    let beta = -0.5 * (2.0 * p[1]).atan2(p[0] - p[2]);
    let kb = rot(beta);
    let ka = mul(h, &mul(&inv(&kb), &a_t(-s)));
    let alpha = ka[1][0].atan2(ka[0][0]);
    (alpha, s, beta)
}
