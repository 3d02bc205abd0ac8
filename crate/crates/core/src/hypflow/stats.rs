use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::frame::{flow, flow_lifted, reduce, UnitTangentFrame};
use super::geometry::{self, a_t, dist, mul};
use super::group::FuchsianGroup;
use super::observable::Observable;
use super::sample::{chunk_rng, liouville_sample};
use crate::error::{Error, Result};
use crate::fit::{ols, wls, LineFit};

pub const BOOTSTRAP: usize = 200;
pub const MAX_MIXING_TIME: f64 = 20.0;
pub const MIN_MIXING_SAMPLES: usize = 10_000;
pub const MAX_ERGODIC_TIME: f64 = 30.0;
/// Trajectory quadrature step for time averages.
pub const QUAD_DT: f64 = 0.05;

/// Seeds of the bootstrap resamples live on their own stream range.
const BOOT_STREAM: u64 = 1 << 40;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurfaceCorrelation {
    pub t: Vec<f64>,
    pub c: Vec<f64>,
    /// Bootstrap standard error per lag.
    pub se: Vec<f64>,
}

impl SurfaceCorrelation {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,c,se\n");
        for i in 0..self.t.len() {
            s.push_str(&format!("{},{:e},{:e}\n", self.t[i], self.c[i], self.se[i]));
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MixingFit {
    pub series: SurfaceCorrelation,
    pub constant: f64,
    pub rate: f64,
    pub r2: f64,
    pub range: Vec<f64>,
}

/// Bootstrap standard error of a statistic of the sample index multiset.
fn bootstrap<F>(n: usize, seed: u64, stat: F) -> Vec<Vec<f64>>
where
    F: Fn(&[u32]) -> Vec<f64> + Sync,
{
    (0..BOOTSTRAP)
        .into_par_iter()
        .map(|b| {
            let mut rng = chunk_rng(seed, BOOT_STREAM + b as u64);
            let mut counts = vec![0u32; n];
            for _ in 0..n {
                counts[rng.random_range(0..n)] += 1;
            }
            stat(&counts)
        })
        .collect()
}

fn std_dev(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

fn weighted_cov(f: &[f64], g: &[f64], w: &[u32]) -> f64 {
    let (mut sw, mut sf, mut sg, mut sfg) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..f.len() {
        let c = w[i] as f64;
        sw += c;
        sf += c * f[i];
        sg += c * g[i];
        sfg += c * f[i] * g[i];
    }
    sfg / sw - (sf / sw) * (sg / sw)
}

/// Monte Carlo correlations C(t) = mu(f g o G_t) - mu(f) mu(g) on the grid
/// t = 0, dt, ..., tmax, each with a bootstrap error bar.
pub fn surface_correlation<F: Observable, G: Observable>(
    f: &F,
    g: &G,
    group: &FuchsianGroup,
    tmax: f64,
    dt: f64,
    samples: usize,
    seed: u64,
) -> Result<SurfaceCorrelation> {
    if !(tmax > 0.0 && tmax <= MAX_MIXING_TIME) {
        return Err(Error::Invalid(format!("tmax = {tmax} outside (0, {MAX_MIXING_TIME}]")));
    }
    if samples < MIN_MIXING_SAMPLES {
        return Err(Error::Invalid(format!(
            "mixing needs >= {MIN_MIXING_SAMPLES} samples (got {samples})"
        )));
    }
    if !(dt > 0.0) {
        return Err(Error::Invalid(format!("lag step {dt}")));
    }
    let lags = (tmax / dt + 1e-9).floor() as usize;
    let frames = liouville_sample(group, samples, seed);
    let fv: Vec<f64> = frames.par_iter().map(|x| f.eval(x)).collect();
    // gv[i][k] = g(G_{k dt} x_i)
    let gv: Vec<Vec<f64>> = frames
        .par_iter()
        .map(|x| {
            let mut y = *x;
            let mut out = Vec::with_capacity(lags + 1);
            out.push(g.eval(&y));
            for _ in 0..lags {
                y = flow(&y, dt, group)?;
                out.push(g.eval(&y));
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let col = |k: usize| gv.iter().map(|r| r[k]).collect::<Vec<f64>>();
    let cols: Vec<Vec<f64>> = (0..=lags).map(col).collect();
    let ones = vec![1u32; samples];
    let c: Vec<f64> = cols.iter().map(|gk| weighted_cov(&fv, gk, &ones)).collect();
    let boots = bootstrap(samples, seed, |w| {
        cols.iter().map(|gk| weighted_cov(&fv, gk, w)).collect()
    });
    let se: Vec<f64> = (0..=lags)
        .map(|k| std_dev(&boots.iter().map(|b| b[k]).collect::<Vec<_>>()))
        .collect();
    Ok(SurfaceCorrelation {
        t: (0..=lags).map(|k| k as f64 * dt).collect(),
        c,
        se,
    })
}

/// Correlations plus an exponential fit of |C| by weighted least squares over
/// the initial run of lags with |C| > 3 SE.
pub fn mixing_fit<F: Observable, G: Observable>(
    f: &F,
    g: &G,
    group: &FuchsianGroup,
    tmax: f64,
    dt: f64,
    samples: usize,
    seed: u64,
) -> Result<MixingFit> {
    let series = surface_correlation(f, g, group, tmax, dt, samples, seed)?;
    let lags = series.t.len() - 1;
    let (mut x, mut y, mut w) = (Vec::new(), Vec::new(), Vec::new());
    for k in 0..=lags {
        let a = series.c[k].abs();
        if !(a > 3.0 * series.se[k]) {
            break;
        }
        x.push(series.t[k]);
        y.push(a.ln());
        // var(log|C|) ~ (se/|C|)^2
        w.push((a / series.se[k].max(f64::MIN_POSITIVE)).powi(2));
    }
    if x.len() < 3 {
        return Err(Error::SignalBelowNoise);
    }
    let LineFit {
        slope, intercept, r2, ..
    } = wls(&x, &y, &w)?;
    Ok(MixingFit {
        series,
        constant: intercept.exp(),
        rate: -slope,
        r2,
        range: x,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurfaceErgodicity {
    #[serde(rename = "T")]
    pub ts: Vec<f64>,
    pub norm: Vec<f64>,
    pub norm_se: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// p = -slope of log |Av_T f| against log T.
    pub p: f64,
    /// Bootstrap 95% percentile interval for p.
    pub p_ci: [f64; 2],
    /// Whether each norm is at most the previous one plus 2 SE.
    pub monotone_2se: bool,
}

fn loglog_weighted(ts: &[f64], norms: &[f64], se: &[f64]) -> Result<LineFit> {
    let x: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let y: Vec<f64> = norms.iter().map(|v| v.ln()).collect();
    if se.iter().all(|s| *s > 0.0) {
        let w: Vec<f64> = norms.iter().zip(se).map(|(v, s)| (v / s).powi(2)).collect();
        wls(&x, &y, &w)
    } else {
        ols(&x, &y)
    }
}

/// L2 norms of the time averages of a mean-zero f, (1/T) int_0^T f(G_s x) ds over Liouville
/// samples, trapezoid rule with step QUAD_DT, and the fitted decay exponent.
pub fn ergodicity_rate_mc<F: Observable>(
    f: &F,
    group: &FuchsianGroup,
    ts: &[f64],
    samples: usize,
    seed: u64,
) -> Result<SurfaceErgodicity> {
    if ts.len() < 4 {
        return Err(Error::FitDegenerate(ts.len()));
    }
    if ts.windows(2).any(|w| w[1] <= w[0]) || ts.iter().any(|t| !(*t > 0.0 && *t <= MAX_ERGODIC_TIME)) {
        return Err(Error::Invalid(format!(
            "averaging times {ts:?} must increase within (0, {MAX_ERGODIC_TIME}]"
        )));
    }
    let steps: Vec<usize> = ts.iter().map(|t| (t / QUAD_DT).round() as usize).collect();
    let last = *steps.last().unwrap();
    let step = a_t(QUAD_DT);
    let frames = liouville_sample(group, samples, seed);
    let avgs: Vec<Vec<f64>> = frames
        .par_iter()
        .map(|x| {
            let mut y = *x;
            let mut prev = f.eval(&y);
            let mut acc = 0.0;
            let mut out = Vec::with_capacity(ts.len());
            let mut next = 0;
            for k in 1..=last {
                y = reduce(&UnitTangentFrame::new(geometry::normalize(&mul(&y.g, &step))), group)?.0;
                let v = f.eval(&y);
                acc += 0.5 * (prev + v) * QUAD_DT;
                prev = v;
                if k == steps[next] {
                    out.push(acc / (k as f64 * QUAD_DT));
                    next += 1;
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let sq: Vec<Vec<f64>> = (0..ts.len())
        .map(|j| avgs.iter().map(|a| a[j] * a[j]).collect())
        .collect();
    let norm_of = |w: &[u32]| -> Vec<f64> {
        sq.iter()
            .map(|col| {
                let (s, n) = col
                    .iter()
                    .zip(w)
                    .fold((0.0, 0.0), |(s, n), (v, c)| (s + v * *c as f64, n + *c as f64));
                (s / n).sqrt()
            })
            .collect()
    };
    let ones = vec![1u32; samples];
    let norm = norm_of(&ones);
    let boots = bootstrap(samples, seed, |w| norm_of(w));
    let norm_se: Vec<f64> = (0..ts.len())
        .map(|j| std_dev(&boots.iter().map(|b| b[j]).collect::<Vec<_>>()))
        .collect();
    if norm.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::FitDegenerate(0));
    }
    let fit = loglog_weighted(ts, &norm, &norm_se)?;
    let mut ps: Vec<f64> = boots
        .iter()
        .filter_map(|b| loglog_weighted(ts, b, &norm_se).ok().map(|l| -l.slope))
        .collect();
    ps.sort_by(f64::total_cmp);
    let q = |p: f64| ps[((ps.len() - 1) as f64 * p).round() as usize];
    let monotone_2se = (1..ts.len()).all(|j| norm[j] <= norm[j - 1] + 2.0 * norm_se[j].hypot(norm_se[j - 1]));
    Ok(SurfaceErgodicity {
        ts: ts.to_vec(),
        norm,
        norm_se,
        slope: fit.slope,
        intercept: fit.intercept,
        r2: fit.r2,
        p: -fit.slope,
        p_ci: [q(0.025), q(0.975)],
        monotone_2se,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeparationRate {
    pub rate: f64,
    pub rate_se: f64,
    pub pairs: usize,
}

/// Log-slope of the mean log base-point separation of frame pairs started
/// `sep` apart in a random direction of the frame bundle, fitted over the
/// second half [tmax/2, tmax] where the unstable component dominates.
pub fn separation_rate(
    group: &FuchsianGroup,
    pairs: usize,
    sep: f64,
    tmax: usize,
    seed: u64,
) -> Result<SeparationRate> {
    if pairs < 2 || tmax < 3 {
        return Err(Error::Invalid(format!(
            "separation run needs >= 2 pairs and tmax >= 3 (got {pairs}, {tmax})"
        )));
    }
    let frames = liouville_sample(group, pairs, seed);
    let mut rng = chunk_rng(seed, 0x5e9);
    let slopes: Vec<f64> = frames
        .iter()
        .map(|x| {
            let v = [
                rng.random::<f64>() - 0.5,
                rng.random::<f64>() - 0.5,
                rng.random::<f64>() - 0.5,
            ];
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            let e = sep / n;
            let pert = geometry::normalize(&[[1.0 + e * v[0], e * v[1]], [e * v[2], 1.0 - e * v[0]]]);
            let y = UnitTangentFrame::new(mul(&x.g, &pert));
            let ts: Vec<f64> = (2 * tmax..=4 * tmax).map(|k| k as f64 / 4.0).collect();
            let ls: Vec<f64> = ts
                .iter()
                .map(|&t| dist(flow_lifted(x, t).base(), flow_lifted(&y, t).base()).ln())
                .collect();
            ols(&ts, &ls).map(|l| l.slope)
        })
        .collect::<Result<_>>()?;
    let n = slopes.len() as f64;
    Ok(SeparationRate {
        rate: slopes.iter().sum::<f64>() / n,
        rate_se: std_dev(&slopes) / n.sqrt(),
        pairs,
    })
}

/// Reduced orbit sampled every dt up to tmax, as (t, frame).
pub fn trajectory(
    frame: &UnitTangentFrame,
    group: &FuchsianGroup,
    tmax: f64,
    dt: f64,
) -> Result<Vec<(f64, UnitTangentFrame)>> {
    if !(dt > 0.0) {
        return Err(Error::Invalid(format!("time step {dt}")));
    }
    let mut out = vec![(0.0, reduce(frame, group)?.0)];
    let steps = (tmax / dt + 1e-9).floor() as usize;
    for k in 1..=steps {
        let y = flow(&out[k - 1].1, dt, group)?;
        out.push((k as f64 * dt, y));
    }
    Ok(out)
}

pub fn trajectory_csv(traj: &[(f64, UnitTangentFrame)]) -> String {
    let mut s = String::from("t,re_base,im_base,angle\n");
    for (t, f) in traj {
        let z = f.base();
        s.push_str(&format!("{t},{:e},{:e},{:e}\n", z.re, z.im, f.angle()));
    }
    s
}
