use std::f64::consts::PI;

use proptest::prelude::*;
use qe_core::anosov::{
    correlation, correlation_exact, correlation_horizon, ergodicity_rate, expansion_rate, fit_decay, pullback,
    time_average, AnosovMap,
};
use qe_core::symbols::{DeltaSymbolSpec, TorusSymbol};
use qe_core::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn random_symbol(k: i64, seed: u64) -> TorusSymbol {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut modes = Vec::new();
    for k1 in -k..=k {
        for k2 in -k..=k {
            modes.push(((k1, k2), C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)));
        }
    }
    TorusSymbol::from_coeffs(modes)
}

/// L2 inner product by midpoint quadrature on an m x m grid, exact for
/// trigonometric polynomials of bandwidth below m / 2.
fn grid_inner(f: &TorusSymbol, g: &TorusSymbol, m: usize) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for p in 0..m {
        for q in 0..m {
            let (x, y) = (p as f64 / m as f64, q as f64 / m as f64);
            acc += f.evaluate(x, y) * g.evaluate(x, y).conj();
        }
    }
    acc / (m * m) as f64
}

#[test]
fn pullback_examples() {
    let cat = AnosovMap::cat(0.0);
    let e = TorusSymbol::mode(1, 0);
    assert_eq!(pullback(&e, &cat, 0, None).unwrap().symbol, e);
    let p = pullback(&e, &cat, 1, None).unwrap().symbol;
    assert_eq!(p, TorusSymbol::mode(2, 1));
    // pointwise composition: e_(1,0)(A z) = e^{2 pi i (2x + xi)}
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let z = [rng.random::<f64>(), rng.random::<f64>()];
        let gz = cat.apply(z);
        assert!((p.evaluate(z[0], z[1]) - e.evaluate(gz[0], gz[1])).norm() < 1e-12);
    }
    let a = random_symbol(3, 2);
    let back = pullback(&pullback(&a, &cat, 1, None).unwrap().symbol, &cat, -1, None)
        .unwrap()
        .symbol;
    let d = a.sub(&back);
    assert!(d.l1_norm() < 1e-12);
}

#[test]
fn kicked_pullback_matches_composition() {
    let map = AnosovMap::cat(0.05);
    let a = TorusSymbol::cosine(1, 0);
    let p = pullback(&a, &map, 2, Some(64)).unwrap();
    assert!(p.residual < 1e-6, "{}", p.residual);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let z = [rng.random::<f64>(), rng.random::<f64>()];
        let gz = map.iterate(z, 2);
        assert!((p.symbol.evaluate(z[0], z[1]) - a.evaluate(gz[0], gz[1])).norm() < 1e-6);
    }
    assert!((p.symbol.mean() - a.mean()).norm() < 1e-10);
    assert!((p.symbol.l2_norm() - a.l2_norm()).abs() < 1e-6);
}

#[test]
fn time_average_examples() {
    let cat = AnosovMap::cat(0.0);
    let k = TorusSymbol::constant(c(2.5));
    for t in [1, 3, 8] {
        assert_eq!(time_average(&k, &cat, t, None).unwrap(), k);
    }
    let e = TorusSymbol::mode(1, 0);
    let av = time_average(&e, &cat, 4, None).unwrap();
    // four distinct modes of weight 1/4, checked by quadrature
    let m = 2 * av.bandwidth() + 2;
    assert!((grid_inner(&av, &av, m).re.sqrt() - 0.5).abs() < 1e-12);
    // T = 16 already exceeds the exact bandwidth cap; larger T go through the
    // double sum in ergodicity_examples
    for t in [1usize, 2, 4, 8] {
        let av = time_average(&e, &cat, t, None).unwrap();
        assert!((av.l2_norm().powi(2) - 1.0 / t as f64).abs() < 1e-12);
    }
}

#[test]
fn averages_keep_the_mean_and_shrink() {
    let cat = AnosovMap::cat(0.0);
    let a = random_symbol(2, 5);
    let a0 = a.sub(&TorusSymbol::constant(a.mean()));
    let mut last = f64::INFINITY;
    for t in [1, 2, 3, 4, 5] {
        let av = time_average(&a, &cat, t, None).unwrap();
        assert!((av.mean() - a.mean()).norm() < 1e-15);
        let n = time_average(&a0, &cat, t, None).unwrap().l2_norm();
        assert!(n <= last + 1e-12);
        last = n;
    }
}

#[test]
fn correlation_examples() {
    let cat = AnosovMap::cat(0.0);
    let e = TorusSymbol::mode(1, 0);
    assert_eq!(correlation_exact(&e, &e, &cat, 0), c(1.0));
    assert_eq!(correlation_exact(&e, &e, &cat, 1), c(0.0));
    // exact path against quadrature of f conj(g o G^t)
    let (f, g) = (random_symbol(2, 7), random_symbol(2, 8));
    for t in 0..3 {
        let gt = pullback(&g, &cat, t, None).unwrap().symbol;
        let q = grid_inner(&f, &gt, 2 * gt.bandwidth() + 8) - f.mean() * g.mean().conj();
        assert!((correlation_exact(&f, &g, &cat, t) - q).norm() < 1e-12);
    }
}

#[test]
fn correlations_vanish_beyond_horizon() {
    let cat = AnosovMap::cat(0.0);
    for (k, seed) in [(1, 1), (3, 2), (6, 3)] {
        let (f, g) = (random_symbol(k, seed), random_symbol(k, seed + 10));
        let h = correlation_horizon(&cat, k as usize);
        for t in h + 1..h + 6 {
            assert!(correlation_exact(&f, &g, &cat, t).norm() <= 1e-12);
            assert!(correlation_exact(&f, &g, &cat, -t).norm() <= 1e-12);
        }
    }
}

#[test]
fn kicked_bump_correlation_decays() {
    let map = AnosovMap::cat(0.05);
    // a bump in x alone decorrelates in one step, so localize in both variables
    let f = DeltaSymbolSpec::microlocalized(0.5, 0.5, 0.2).realize().unwrap();
    let s = correlation(&f, &f, &map, 12, 512);
    let fit = fit_decay(&s).unwrap();
    assert!(fit.rate > 0.0, "{fit:?}");
    assert!(fit.r2 >= 0.9, "{fit:?}");
}

#[test]
fn ergodicity_examples() {
    let cat = AnosovMap::cat(0.0);
    let r = ergodicity_rate(&TorusSymbol::constant(c(3.0)), &cat, &[1, 2, 4], 64).unwrap();
    assert!(r.norm.iter().all(|v| *v == 0.0) && r.p.is_none());
    let r = ergodicity_rate(&TorusSymbol::mode(1, 0), &cat, &[1, 4, 16, 64], 64).unwrap();
    for (t, v) in r.ts.iter().zip(&r.norm) {
        assert!((v * v - 1.0 / *t as f64).abs() < 1e-12);
    }
    assert!((r.p.unwrap() - 0.5).abs() <= 1e-3);
    let json = serde_json::to_value(&r).unwrap();
    for k in ["T", "norm", "slope", "intercept", "r2"] {
        assert!(json.get(k).is_some(), "{k}");
    }
}

#[test]
fn kicked_bump_ergodicity_rate() {
    let map = AnosovMap::cat(0.05);
    let f = DeltaSymbolSpec::localized(0.5, 0.25).realize().unwrap();
    let r = ergodicity_rate(&f, &map, &[4, 8, 16, 32, 64], 512).unwrap();
    let p = r.p.unwrap();
    assert!((0.4..=0.75).contains(&p), "p = {p}");
}

#[test]
fn expansion_rates() {
    let cat = expansion_rate(&AnosovMap::cat(0.0), 200, 1).unwrap();
    assert!((cat.mean - (2.0 + 3f64.sqrt()).ln()).abs() <= 0.013, "{cat:?}");
    let golden = AnosovMap::new([[2, 1], [1, 1]], 0.0).unwrap();
    assert!(!golden.is_quantizable());
    let g = expansion_rate(&golden, 200, 2).unwrap();
    assert!((g.mean - ((3.0 + 5f64.sqrt()) / 2.0).ln()).abs() <= 0.01, "{g:?}");
    let kicked = expansion_rate(&AnosovMap::cat(0.05), 200, 3).unwrap();
    assert!((kicked.mean / cat.mean - 1.0).abs() <= 0.1, "{kicked:?}");
}

/// sup over sample points of |grad(a o G^t)| through the tangent cocycle.
fn gradient_sup(a: &TorusSymbol, map: &AnosovMap, t: i64, pts: &[[f64; 2]]) -> f64 {
    let ax = a.derivative(1, 0);
    let ay = a.derivative(0, 1);
    pts.iter()
        .map(|&z0| {
            let (mut z, mut e1, mut e2) = (z0, [1.0, 0.0], [0.0, 1.0]);
            for _ in 0..t {
                e1 = map.tangent(z, e1);
                e2 = map.tangent(z, e2);
                z = map.apply(z);
            }
            let g = [ax.evaluate(z[0], z[1]).re, ay.evaluate(z[0], z[1]).re];
            let d = [g[0] * e1[0] + g[1] * e1[1], g[0] * e2[0] + g[1] * e2[1]];
            d[0].hypot(d[1])
        })
        .fold(0.0, f64::max)
}

#[test]
fn derivative_growth_rate() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let pts: Vec<[f64; 2]> = (0..4000).map(|_| [rng.random(), rng.random()]).collect();
    let a = TorusSymbol::cosine(1, 0);
    let cat = AnosovMap::cat(0.0);
    let ts: Vec<f64> = (1..=8).map(|t| t as f64).collect();
    let logs: Vec<f64> = (1..=8).map(|t| gradient_sup(&a, &cat, t, &pts).ln()).collect();
    let fit = qe_core::fit::ols(&ts, &logs).unwrap();
    assert!(
        (fit.slope / cat.lyap - 1.0).abs() <= 0.15,
        "{} vs {}",
        fit.slope,
        cat.lyap
    );
    // with the kick the sup follows the most expanding orbit segments, which
    // outpace the mean rate
    let kicked = AnosovMap::cat(0.05);
    let logs: Vec<f64> = (1..=8).map(|t| gradient_sup(&a, &kicked, t, &pts).ln()).collect();
    let mean = expansion_rate(&kicked, 400, 5).unwrap().mean;
    assert!(qe_core::fit::ols(&ts, &logs).unwrap().slope >= mean);
    // exact path: the first-order seminorm of a single mode is 2 pi |k_t|
    let e = TorusSymbol::mode(1, 0);
    for t in 1..=7 {
        let p = pullback(&e, &cat, t, None).unwrap().symbol;
        let (k, _) = p.iter().next().unwrap();
        let d = p.derivative(1, 0).l1_norm().max(p.derivative(0, 1).l1_norm());
        assert!((d - 2.0 * PI * k.0.abs().max(k.1.abs()) as f64).abs() < 1e-9 * d);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn correlation_symmetry(s1 in 0u64..500, s2 in 0u64..500, t in 0i64..5, k in 1i64..3) {
        let cat = AnosovMap::cat(0.0);
        let (f, g) = (random_symbol(k, s1), random_symbol(k, s2));
        let lhs = correlation_exact(&f, &g, &cat, t);
        let rhs = correlation_exact(&g, &f, &cat, -t).conj();
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn exact_pullback_preserves_norm_and_mean(seed in 0u64..500, t in -4i64..5) {
        let cat = AnosovMap::cat(0.0);
        let a = random_symbol(2, seed);
        let p = pullback(&a, &cat, t, None).unwrap().symbol;
        prop_assert!((p.mean() - a.mean()).norm() == 0.0);
        prop_assert!((p.l2_norm() - a.l2_norm()).abs() < 1e-12);
    }

    #[test]
    fn single_modes_obey_the_inverse_t_law(k1 in -5i64..6, k2 in -5i64..6, t in 1usize..7) {
        prop_assume!((k1, k2) != (0, 0));
        let cat = AnosovMap::cat(0.0);
        let av = time_average(&TorusSymbol::mode(k1, k2), &cat, t, None).unwrap();
        prop_assert!((av.l2_norm().powi(2) - 1.0 / t as f64).abs() < 1e-12);
    }
}
