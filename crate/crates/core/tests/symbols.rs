use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use proptest::prelude::*;
use qe_core::symbols::*;
use qe_core::Error;

/// Gauss-Legendre 5-point rule on m equal panels of [a, b].
fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let x = [
        0.0,
        0.538_469_310_105_683_1,
        -0.538_469_310_105_683_1,
        0.906_179_845_938_664,
        -0.906_179_845_938_664,
    ];
    let w = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let h = (b - a) / m as f64;
    (0..m)
        .map(|p| {
            let c = a + (p as f64 + 0.5) * h;
            (0..5).map(|i| w[i] * f(c + 0.5 * h * x[i])).sum::<f64>() * 0.5 * h
        })
        .sum()
}

fn random_symbol(k: i64, seed: u64) -> TorusSymbol {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    TorusSymbol::from_coeffs(
        (-k..=k)
            .flat_map(|a| (-k..=k).map(move |b| (a, b)))
            .map(|w| (w, C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))),
    )
}

#[test]
fn flat_profile_gives_the_constant() {
    let s = DeltaSymbolSpec::localized(0.3, 1.0).with_profile(BumpProfile::Flat);
    let a = make_delta_symbol(&s, 4).unwrap();
    assert_eq!(a.len(), 1);
    assert_eq!(a.coeff((0, 0)), C64::new(1.0, 0.0));
}

#[test]
fn mean_matches_independent_quadrature() {
    let s = DeltaSymbolSpec::localized(0.0, 0.25);
    let a = make_delta_symbol(&s, 64).unwrap();
    let b = s.profile;
    let integral = gauss_legendre(|u| b.eval(u), -1.0, 1.0, 4000);
    assert!((a.coeff((0, 0)).re - 0.25 * integral).abs() < 1e-6);
    assert!(a.coeff((0, 0)).im.abs() < 1e-15);
    // the same holds for the standard profile once its bandwidth suffices
    let s = DeltaSymbolSpec::localized(0.0, 0.25).with_profile(BumpProfile::standard());
    let k = required_bandwidth(s.profile, 0.25, SymbolKind::Localized, TRUNCATION_TOL);
    let a = make_delta_symbol(&s, k).unwrap();
    let integral = gauss_legendre(|u| BumpProfile::standard().eval(u), -1.0, 1.0, 4000);
    assert!((a.coeff((0, 0)).re - 0.25 * integral).abs() < 1e-6);
    assert!(matches!(
        make_delta_symbol(&s, 64),
        Err(Error::BandwidthTooSmall { .. })
    ));
}

#[test]
fn microlocal_bump_vanishes_off_its_box() {
    let s = DeltaSymbolSpec::microlocalized(0.5, 0.5, 0.1);
    let a = make_delta_symbol(&s, 128).unwrap();
    assert!(a.is_real());
    let m = 400;
    let mut worst: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            let (x, y) = (i as f64 / m as f64, j as f64 / m as f64);
            if (x - 0.5).abs().max((y - 0.5).abs()) > 0.1 {
                worst = worst.max(a.evaluate(x, y).norm());
            }
        }
    }
    assert!(worst <= 1e-6, "{worst}");
    assert!((a.evaluate(0.5, 0.5).re - 1.0).abs() < 1e-6);
}

#[test]
fn truncation_error_within_tolerance() {
    for (kind, delta) in [(SymbolKind::Localized, 0.05), (SymbolKind::Microlocalized, 0.2)] {
        let spec = DeltaSymbolSpec {
            kind,
            ..DeltaSymbolSpec::microlocalized(0.3, 0.7, delta)
        };
        let a = spec.realize().unwrap();
        let b = spec.profile;
        let dper = |t: f64, c: f64| {
            let d = (t - c).rem_euclid(1.0);
            d.min(1.0 - d)
        };
        let m = 257;
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                let (x, y) = (i as f64 / m as f64, j as f64 / m as f64);
                let mut exact = b.eval(dper(x, 0.3) / delta);
                if kind == SymbolKind::Microlocalized {
                    exact *= b.eval(dper(y, 0.7) / delta);
                }
                worst = worst.max((a.evaluate(x, y) - exact).norm());
            }
        }
        assert!(worst <= 1e-6, "{kind:?}: {worst}");
    }
}

#[test]
fn holder_of_constant_and_mode() {
    let c = TorusSymbol::constant(C64::new(-2.5, 0.0));
    assert_eq!(holder_norm(&c, 0.5, 64).unwrap(), 2.5);
    assert!(matches!(holder_norm(&c, 1.0, 64), Err(Error::InvalidGamma(_))));
    let e = TorusSymbol::mode(1, 0);
    let a = holder_norm(&e, 0.5, 256).unwrap();
    let b = holder_norm(&e, 0.5, 512).unwrap();
    assert!(b >= a && (b / a - 1.0) < 0.02);
}

#[test]
fn holder_of_bump_scales_like_inverse_power() {
    let a = DeltaSymbolSpec::localized(0.5, 0.1).realize().unwrap();
    let g = 8 * a.bandwidth();
    let coarse = holder_norm(&a, 0.5, g).unwrap();
    let fine = holder_norm(&a, 0.5, 4 * g).unwrap();
    assert!(fine >= coarse);
    let s = 0.1f64.powf(-0.5);
    assert!((0.3 * s..=30.0 * s).contains(&fine), "{fine}");
}

#[test]
fn seminorm_examples() {
    let c = seminorm_check(&TorusSymbol::constant(C64::new(3.0, 4.0)), 0.5, 3);
    assert!((c.get(0, 0).unwrap() - 5.0).abs() < 1e-14);
    assert!((1..=3).all(|k| c.max_at_order(k) == 0.0));
    let k = 16;
    let m = seminorm_check(&TorusSymbol::mode(k, 0), 1.0 / k as f64, 1);
    assert!((m.get(1, 0).unwrap() - 2.0 * PI).abs() < 1e-12);
    // finite difference of the mode agrees with the analytic derivative
    let e = TorusSymbol::mode(k, 0);
    let h = 1e-6;
    let fd = (e.evaluate(0.1 + h, 0.0) - e.evaluate(0.1 - h, 0.0)) / (2.0 * h);
    let an = e.derivative(1, 0).evaluate(0.1, 0.0);
    assert!((fd - an).norm() / an.norm() < 1e-8);
}

#[test]
fn bump_family_seminorms_are_uniform() {
    let deltas = [1.0, 0.5, 0.25, 0.125];
    let reports: Vec<SeminormReport> = deltas
        .iter()
        .map(|&d| seminorm_check(&DeltaSymbolSpec::microlocalized(0.5, 0.5, d).realize().unwrap(), d, 3))
        .collect();
    for k in 0..=3u32 {
        let v: Vec<f64> = reports.iter().map(|r| r.max_at_order(k)).collect();
        let hi = v.iter().cloned().fold(0.0, f64::max);
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(hi / lo < 2.0, "order {k}: {v:?}");
    }
}

#[test]
fn holder_scaling_constant_across_dyadic_scales() {
    for gamma in [0.3, 0.5, 0.9] {
        let v: Vec<f64> = (1..=5)
            .map(|j| {
                let d = 0.5f64.powi(j);
                let a = DeltaSymbolSpec::localized(0.5, d).realize().unwrap();
                holder_norm(&a, gamma, 8 * a.bandwidth()).unwrap() * d.powf(gamma)
            })
            .collect();
        let hi = v.iter().cloned().fold(0.0, f64::max);
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(hi / lo <= 2.0, "gamma {gamma}: {v:?}");
    }
}

#[test]
fn json_shape() {
    let a = TorusSymbol::cosine(1, 2);
    let v: serde_json::Value = serde_json::from_str(&a.to_json()).unwrap();
    assert_eq!(v["bandwidth"], 2);
    assert_eq!(v["entries"].as_array().unwrap().len(), 2);
    assert_eq!(TorusSymbol::from_json(&a.to_json()).unwrap(), a);
}

#[test]
fn spec_strings() {
    let s = DeltaSymbolSpec::parse("loc:x0=0.25,alpha=0.3", Some(1024)).unwrap();
    assert!((s.scale - (1024f64).ln().powf(-0.3)).abs() < 1e-15);
    assert!(DeltaSymbolSpec::parse("loc:x0=0.25,alpha=0.3", None).is_err());
    assert!(DeltaSymbolSpec::parse("ring:x0=0", None).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn fft_grid_matches_pointwise(k in 1i64..6, seed in 0u64..1000, m in prop::sample::select(vec![16usize, 32, 64])) {
        let a = random_symbol(k, seed);
        let g = a.evaluate_grid(m);
        for i in (0..m).step_by(3) {
            for j in (0..m).step_by(5) {
                let p = a.evaluate(i as f64 / m as f64, j as f64 / m as f64);
                prop_assert!((g[[i, j]] - p).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn bumps_are_real_and_periodic(x0 in 0.0f64..1.0, xi0 in 0.0f64..1.0, d in 0.1f64..0.5) {
        let a = DeltaSymbolSpec::microlocalized(x0, xi0, d).realize().unwrap();
        prop_assert!(a.is_real());
        for (k, c) in a.iter() {
            prop_assert!((a.coeff((-k.0, -k.1)) - c.conj()).norm() < 1e-13);
            prop_assert!(k.0.unsigned_abs().max(k.1.unsigned_abs()) as usize <= a.bandwidth());
        }
        let p = a.evaluate(0.37, 0.81);
        prop_assert!((a.evaluate(1.37, -0.19) - p).norm() < 1e-10);
    }

    #[test]
    fn holder_monotone_in_grid(k in 1i64..4, seed in 0u64..100) {
        let a = random_symbol(k, seed);
        let g = 8 * a.bandwidth();
        // the finer grid contains every pair of the coarser one; FFT rounding only
        let (fine, coarse) = (holder_norm(&a, 0.5, 2 * g).unwrap(), holder_norm(&a, 0.5, g).unwrap());
        prop_assert!(fine >= coarse * (1.0 - 1e-12), "{fine} < {coarse}");
    }
}
