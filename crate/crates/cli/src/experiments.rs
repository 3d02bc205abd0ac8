use std::path::Path;

use num_complex::Complex64 as C64;
use qe_core::anosov::{correlation, correlation_horizon, ergodicity_rate, fit_decay, AnosovMap};
use qe_core::covering::{greedy_cover, verify_properties, CoverReport, CoverSpace, FlatTorus, HyperbolicSurface};
use qe_core::fit::loglog_slope;
use qe_core::hypflow::{
    ergodicity_rate_mc, mixing_fit, surface_observable, Centered, FuchsianGroup, Observable, SurfaceBumpSpec,
};
use qe_core::quantize::{calculus_defects, quantize, trace_average};
use qe_core::quantum::{
    default_beta_tilde, density_one_extract, egorov_sweep, eigensolve, propagator, small_scale_mass, variance,
    VarianceReport,
};
use qe_core::symbols::TorusSymbol;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::config::{Experiment, ExperimentConfig, Model, Space};
use crate::output::{num, write_atomic, FileEntry, Table};
use crate::symbol::SymbolParam;

const MASS_BAND: (f64, f64) = (0.5, 1.5);

#[derive(Clone, Debug, Serialize)]
pub struct Failure {
    pub point: String,
    pub error: String,
}

/// Everything a run produced besides the manifest.
pub struct RunOutput {
    pub files: Vec<FileEntry>,
    pub summary: Table,
    pub extras: Vec<(String, Table)>,
    pub failures: Vec<Failure>,
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    dir: &'a Path,
    seed: u64,
}

impl Ctx<'_> {
    fn ext(&self) -> &'static str {
        match self.cfg.format {
            crate::config::Format::Csv => "csv",
            crate::config::Format::Json => "json",
        }
    }
}

type PointResult<T> = Result<(Table, Vec<Vec<Value>>, T), String>;
type Written<T> = Result<(FileEntry, Vec<Vec<Value>>, T), Failure>;

/// Runs `f` over the sweep points on the worker pool. Each success is written
/// atomically to `<label>.<ext>` as soon as it finishes.
fn sweep<P, T, F>(ctx: &Ctx, points: &[P], label: impl Fn(&P) -> String + Sync, f: F) -> Vec<Written<T>>
where
    P: Sync,
    T: Send,
    F: Fn(&P) -> PointResult<T> + Sync,
{
    points
        .par_iter()
        .map(|p| {
            let name = label(p);
            let fail = |error: String| Failure {
                point: name.clone(),
                error,
            };
            let (table, rows, extra) = f(p).map_err(fail)?;
            let file = format!("{name}.{}", ctx.ext());
            let entry = write_atomic(ctx.dir, &file, &table.render(ctx.cfg.format)).map_err(|e| fail(e.to_string()))?;
            Ok((entry, rows, extra))
        })
        .collect()
}

fn collect<T>(results: Vec<Written<T>>, summary: &mut Table) -> (Vec<FileEntry>, Vec<T>, Vec<Failure>) {
    let (mut files, mut extra, mut failures) = (Vec::new(), Vec::new(), Vec::new());
    for r in results {
        match r {
            Ok((e, rows, x)) => {
                files.push(e);
                for row in rows {
                    summary.push(row);
                }
                extra.push(x);
            }
            Err(f) => failures.push(f),
        }
    }
    (files, extra, failures)
}

fn symbol_or(p: &Option<SymbolParam>, default: &str, n: Option<usize>) -> Result<TorusSymbol, String> {
    match p {
        Some(s) => s.realize(n),
        None => SymbolParam::Named(default.into()).realize(n),
    }
}

fn map_of(cfg: &ExperimentConfig) -> Result<AnosovMap, String> {
    let p = &cfg.parameters;
    AnosovMap::new(p.matrix(), p.epsilon.unwrap_or(0.0)).map_err(|e| e.to_string())
}

pub fn run(cfg: &ExperimentConfig, dir: &Path, seed: u64) -> RunOutput {
    let ctx = Ctx { cfg, dir, seed };
    match cfg.experiment {
        Experiment::Egorov => egorov(&ctx),
        Experiment::VarianceSweep => variance_sweep(&ctx),
        Experiment::MassDist => mass_dist(&ctx),
        Experiment::Mixing => match cfg.parameters.model() {
            Model::Surface => surface_mixing(&ctx),
            Model::Torus => torus_mixing(&ctx),
        },
        Experiment::ErgodicityRate => match cfg.parameters.model() {
            Model::Surface => surface_ergodicity(&ctx),
            Model::Torus => torus_ergodicity(&ctx),
        },
        Experiment::CoverSweep => cover_sweep(&ctx),
        Experiment::CalculusDefects => calculus(&ctx),
        Experiment::TraceCheck => trace_check(&ctx),
    }
}

fn ns(ctx: &Ctx) -> Vec<usize> {
    ctx.cfg.parameters.n.clone().unwrap_or_default()
}

fn egorov(ctx: &Ctx) -> RunOutput {
    let p = &ctx.cfg.parameters;
    let mut summary = Table::new(&["N", "epsilon", "ehrenfest_time", "t_last", "max_defect", "stopped"]);
    let res = sweep(
        ctx,
        &ns(ctx),
        |n| format!("egorov_N{n}"),
        |&n| {
            let map = map_of(ctx.cfg)?;
            let a = symbol_or(&p.symbol, "smooth", Some(n))?;
            let tmax = p.tmax.map_or(10, |t| t as usize);
            let s = egorov_sweep(&a, &map, n, tmax).map_err(|e| e.to_string())?;
            let mut t = Table::new(&["t", "defect", "bandwidth"]);
            for q in &s.points {
                t.push(vec![q.t.into(), num(q.defect), q.bandwidth.into()]);
            }
            let max = s.points.iter().map(|q| q.defect).fold(0.0, f64::max);
            let row = vec![
                n.into(),
                num(s.epsilon),
                num(s.ehrenfest_time),
                s.points.last().map_or(Value::Null, |q| q.t.into()),
                num(max),
                s.stopped.as_ref().map_or(Value::Null, |e| e.to_string().into()),
            ];
            Ok((t, vec![row], ()))
        },
    );
    let (files, _, failures) = collect(res, &mut summary);
    RunOutput {
        files,
        summary,
        extras: vec![],
        failures,
    }
}

fn variance_sweep(ctx: &Ctx) -> RunOutput {
    let p = &ctx.cfg.parameters;
    let alpha = p.alpha.unwrap_or(0.3);
    let mut summary = Table::new(&["N", "delta", "v1", "v2", "v2_log_n", "density_gamma"]);
    let res = sweep(
        ctx,
        &ns(ctx),
        |n| format!("variance_N{n}"),
        |&n| {
            let bt = match p.beta_tilde {
                Some(b) => b,
                None => default_beta_tilde(alpha, 1).map_err(|e| e.to_string())?,
            };
            let a = symbol_or(&p.symbol, "mix", Some(n))?;
            let u = propagator(&map_of(ctx.cfg)?, n).map_err(|e| e.to_string())?;
            let eig = eigensolve(&u).map_err(|e| e.to_string())?;
            let v = variance(&a, &eig, alpha, bt).map_err(|e| e.to_string())?;
            let mut t = Table::new(&["j", "phase", "deviation", "in_gamma"]);
            let mut in_gamma = vec![false; n];
            for &j in &v.gamma_set {
                in_gamma[j] = true;
            }
            for (j, g) in in_gamma.iter().enumerate() {
                t.push(vec![
                    j.into(),
                    num(eig.phases[j]),
                    num(v.per_j_deviations[j]),
                    (*g).into(),
                ]);
            }
            let row = vec![
                n.into(),
                num(v.delta),
                num(v.v1),
                num(v.v2),
                num(v.v2 * (n as f64).ln()),
                num(v.density_gamma),
            ];
            Ok((t, vec![row], v))
        },
    );
    let (files, reports, failures): (_, Vec<VarianceReport>, _) = collect(res, &mut summary);
    let mut extras = Vec::new();
    if let Ok(d) = density_one_extract(&reports) {
        let mut t = Table::new(&["m", "h_m", "N", "density", "cumulative_density"]);
        for w in &d.windows {
            t.push(vec![
                w.m.into(),
                num(w.h_m),
                w.n.into(),
                num(w.density),
                num(w.cumulative_density),
            ]);
        }
        extras.push(("density".to_string(), t));
    }
    RunOutput {
        files,
        summary,
        extras,
        failures,
    }
}

fn mass_dist(ctx: &Ctx) -> RunOutput {
    let p = &ctx.cfg.parameters;
    let x0 = p.x0.unwrap_or(0.5);
    let mut points = Vec::new();
    for n in ns(ctx) {
        match &p.r {
            Some(rs) => points.extend(rs.iter().map(|&r| (n, r))),
            None => points.push((n, (n as f64).ln().powf(-1.0 / 3.0))),
        }
    }
    let mut summary = Table::new(&["N", "r", "arc", "fraction_within", "min_ratio", "max_ratio"]);
    let res = sweep(
        ctx,
        &points,
        |(n, r)| format!("mass_N{n}_r{r}"),
        |&(n, r)| {
            let u = propagator(&map_of(ctx.cfg)?, n).map_err(|e| e.to_string())?;
            let eig = eigensolve(&u).map_err(|e| e.to_string())?;
            let m = small_scale_mass(&eig, x0, r).map_err(|e| e.to_string())?;
            let mut t = Table::new(&["j", "mass", "ratio"]);
            let mut lo = f64::INFINITY;
            let mut hi: f64 = 0.0;
            for (j, &mass) in m.masses.iter().enumerate() {
                let ratio = mass / m.arc;
                lo = lo.min(ratio);
                hi = hi.max(ratio);
                t.push(vec![j.into(), num(mass), num(ratio)]);
            }
            let row = vec![
                n.into(),
                num(r),
                num(m.arc),
                num(m.fraction_within(MASS_BAND.0, MASS_BAND.1)),
                num(lo),
                num(hi),
            ];
            Ok((t, vec![row], ()))
        },
    );
    let (files, _, failures) = collect(res, &mut summary);
    RunOutput {
        files,
        summary,
        extras: vec![],
        failures,
    }
}

fn surface_bump(ctx: &Ctx, group: &FuchsianGroup) -> Result<qe_core::hypflow::SurfaceBump, String> {
    let d = ctx.cfg.parameters.delta.unwrap_or(0.5);
    surface_observable(SurfaceBumpSpec::localized(C64::new(0.0, 1.0), d), group).map_err(|e| e.to_string())
}

fn surface_mixing(ctx: &Ctx) -> RunOutput {
    let p = &ctx.cfg.parameters;
    let mut summary = Table::new(&["delta", "samples", "constant", "rate", "r2", "fit_start", "fit_end"]);
    let res = sweep(
        ctx,
        &[()],
        |_| "mixing_surface".to_string(),
        |_| {
            let g = FuchsianGroup::bolza();
            let f = surface_bump(ctx, &g)?;
            let samples = p.samples.unwrap_or(100_000);
            let fit = mixing_fit(
                &f,
                &f,
                &g,
                p.tmax.unwrap_or(10.0),
                p.dt.unwrap_or(0.25),
                samples,
                ctx.seed,
            )
            .map_err(|e| e.to_string())?;
            let s = &fit.series;
            let mut t = Table::new(&["t", "c", "se"]);
            for i in 0..s.t.len() {
                t.push(vec![num(s.t[i]), num(s.c[i]), num(s.se[i])]);
            }
            let row = vec![
                num(p.delta.unwrap_or(0.5)),
                samples.into(),
                num(fit.constant),
                num(fit.rate),
                num(fit.r2),
                num(fit.range[0]),
                num(*fit.range.last().unwrap()),
            ];
            Ok((t, vec![row], ()))
        },
    );
    let (files, _, failures) = collect(res, &mut summary);
    RunOutput {
        files,
        summary,
        extras: vec![],
        failures,
    }
}

fn torus_mixing(ctx: &Ctx) -> RunOutput {
    let p = &ctx.cfg.parameters;
    let mut summary = Table::new(&["epsilon", "horizon", "constant", "rate", "r2", "fit_start", "fit_end"]);
    let res = sweep(
        ctx,
        &[()],
        |_| "mixing_torus".to_string(),
        |_| {
            let map = map_of(ctx.cfg)?;
            let f = symbol_or(&p.symbol, "micro:x0=0.5,xi0=0.5,delta=0.2", None)?;
            let g = match &p.symbol_b {
                Some(s) => s.realize(None)?,
                None => f.clone(),
            };
            let tmax = p.tmax.map_or(10, |t| t as usize);
            let s = correlation(&f, &g, &map, tmax, p.grid.unwrap_or(256));
            let mut t = Table::new(&["t", "re", "im", "abs"]);
            for (tt, c) in s.t.iter().zip(&s.c) {
                t.push(vec![(*tt).into(), num(c.re), num(c.im), num(c.norm())]);
            }
            let horizon: Value = if map.epsilon == 0.0 {
                correlation_horizon(&map, f.bandwidth().max(g.bandwidth())).into()
            } else {
                Value::Null
            };
            let row = match fit_decay(&s) {
                Ok(fit) => vec![
                    num(map.epsilon),
                    horizon,
                    num(fit.constant),
                    num(fit.rate),
                    num(fit.r2),
                    fit.range[0].into(),
                    (*fit.range.last().unwrap()).into(),
                ],
                Err(_) => vec![
                    num(map.epsilon),
                    horizon,
                    Value::Null,
                    Value::Null,
                    Value::Null,
                    Value::Null,
                    Value::Null,
                ],
            };
            Ok((t, vec![row], ()))
        },
    );
    let (files, _, failures) = collect(res, &mut summary);
    RunOutput {
        files,
        summary,
        extras: vec![],
        failures,
    }
}

fn surface_ergodicity(ctx: &Ctx) -> RunOutput {
    let p = &ctx.cfg.parameters;
    let ts = p.ts.clone().unwrap_or_else(|| vec![2.0, 4.0, 8.0, 16.0]);
    let mut summary = Table::new(&["p", "p_ci_lo", "p_ci_hi", "slope", "intercept", "r2", "monotone_2se"]);
    let res = sweep(
        ctx,
        &[()],
        |_| "ergodicity_surface".to_string(),
        |_| {
            let g = FuchsianGroup::bolza();
            let b = surface_bump(ctx, &g)?;
            let shift = b.mean().ok_or("bump has no exact mean")?;
            let f = Centered { inner: &b, shift };
            let e =
                ergodicity_rate_mc(&f, &g, &ts, p.samples.unwrap_or(10_000), ctx.seed).map_err(|e| e.to_string())?;
            let mut t = Table::new(&["T", "norm", "norm_se"]);
            for i in 0..e.ts.len() {
                t.push(vec![num(e.ts[i]), num(e.norm[i]), num(e.norm_se[i])]);
            }
            let row = vec![
                num(e.p),
                num(e.p_ci[0]),
                num(e.p_ci[1]),
                num(e.slope),
                num(e.intercept),
                num(e.r2),
                e.monotone_2se.into(),
            ];
            Ok((t, vec![row], ()))
        },
    );
    let (files, _, failures) = collect(res, &mut summary);
    RunOutput {
        files,
        summary,
        extras: vec![],
        failures,
    }
}

fn torus_ergodicity(ctx: &Ctx) -> RunOutput {
    let p = &ctx.cfg.parameters;
    let ts: Vec<usize> =
        p.ts.clone()
            .unwrap_or_else(|| vec![1.0, 4.0, 16.0, 64.0])
            .iter()
            .map(|t| *t as usize)
            .collect();
    let mut summary = Table::new(&["p", "slope", "intercept", "r2"]);
    let res = sweep(
        ctx,
        &[()],
        |_| "ergodicity_torus".to_string(),
        |_| {
            let f = symbol_or(&p.symbol, "mode:1,0", None)?;
            let e = ergodicity_rate(&f, &map_of(ctx.cfg)?, &ts, p.grid.unwrap_or(256)).map_err(|e| e.to_string())?;
            let mut t = Table::new(&["T", "norm"]);
            for (tt, v) in e.ts.iter().zip(&e.norm) {
                t.push(vec![(*tt).into(), num(*v)]);
            }
            let o = |x: Option<f64>| x.map_or(Value::Null, num);
            let row = vec![o(e.p), o(e.slope), o(e.intercept), o(e.r2)];
            Ok((t, vec![row], ()))
        },
    );
    let (files, _, failures) = collect(res, &mut summary);
    RunOutput {
        files,
        summary,
        extras: vec![],
        failures,
    }
}

fn cover_point<S: CoverSpace>(space: &S, ctx: &Ctx, r: f64) -> PointResult<()> {
    let p = &ctx.cfg.parameters;
    let rep: CoverReport = greedy_cover(space, r, p.testgrid.unwrap_or(10_000), ctx.seed).map_err(|e| e.to_string())?;
    let cert =
        verify_properties(space, &rep, p.testballs.unwrap_or(1000), ctx.seed ^ 0x7e57).map_err(|e| e.to_string())?;
    let mut t = Table::new(&["i", "x", "y"]);
    for (i, c) in rep.centers.iter().enumerate() {
        t.push(vec![i.into(), num(c[0]), num(c[1])]);
    }
    let row = vec![
        num(r),
        rep.count.into(),
        num(rep.c1_hat),
        rep.c2_hat.into(),
        rep.c2_testgrid.into(),
        num(rep.min_separation),
        cert.tested.into(),
        cert.max_overlap.into(),
        num(cert.max_gap),
    ];
    Ok((t, vec![row], ()))
}

fn cover_sweep(ctx: &Ctx) -> RunOutput {
    let p = &ctx.cfg.parameters;
    let rs = p.r.clone().unwrap_or_else(|| vec![0.4, 0.2, 0.1]);
    let mut summary = Table::new(&[
        "r",
        "N",
        "c1_hat",
        "c2_hat",
        "c2_testgrid",
        "min_separation",
        "testballs",
        "max_overlap",
        "max_gap",
    ]);
    let res = match p.space.unwrap_or_default() {
        Space::Bolza => {
            let s = HyperbolicSurface::bolza();
            sweep(ctx, &rs, |r| format!("cover_r{r}"), |&r| cover_point(&s, ctx, r))
        }
        Space::Flat => sweep(
            ctx,
            &rs,
            |r| format!("cover_r{r}"),
            |&r| cover_point(&FlatTorus, ctx, r),
        ),
    };
    let (files, _, failures) = collect(res, &mut summary);
    RunOutput {
        files,
        summary,
        extras: vec![],
        failures,
    }
}

const DEFECT_COLUMNS: [&str; 6] = [
    "N",
    "adjoint",
    "product",
    "product_raw",
    "product_corrected",
    "commutator",
];

fn calculus(ctx: &Ctx) -> RunOutput {
    let p = &ctx.cfg.parameters;
    let mut summary = Table::new(&DEFECT_COLUMNS);
    let res = sweep(
        ctx,
        &ns(ctx),
        |n| format!("calculus_N{n}"),
        |&n| {
            let a = symbol_or(&p.symbol, "smooth", Some(n))?;
            let b = symbol_or(&p.symbol_b, "mix", Some(n))?;
            let d = calculus_defects(&a, &b, n).map_err(|e| e.to_string())?;
            let row = vec![
                n.into(),
                num(d.adjoint_defect),
                num(d.product_defect),
                num(d.product_defect_raw),
                num(d.product_defect_corrected),
                num(d.commutator_defect),
            ];
            let mut t = Table::new(&DEFECT_COLUMNS);
            t.push(row.clone());
            Ok((t, vec![row], (n as f64, [d.product_defect, d.commutator_defect])))
        },
    );
    let (files, pts, failures) = collect(res, &mut summary);
    let mut extras = Vec::new();
    if pts.len() >= 3 {
        let x: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let mut t = Table::new(&["quantity", "slope", "r2"]);
        for (k, name) in ["product", "commutator"].iter().enumerate() {
            let y: Vec<f64> = pts.iter().map(|p| p.1[k]).collect();
            match loglog_slope(&x, &y) {
                Ok(f) => t.push(vec![(*name).into(), num(f.slope), num(f.r2)]),
                Err(_) => t.push(vec![(*name).into(), Value::Null, Value::Null]),
            }
        }
        extras.push(("slopes".to_string(), t));
    }
    RunOutput {
        files,
        summary,
        extras,
        failures,
    }
}

fn trace_check(ctx: &Ctx) -> RunOutput {
    let p = &ctx.cfg.parameters;
    let cols = ["N", "trace_n", "mean", "defect"];
    let mut summary = Table::new(&cols);
    let res = sweep(
        ctx,
        &ns(ctx),
        |n| format!("trace_N{n}"),
        |&n| {
            let a = symbol_or(&p.symbol, "mix", Some(n))?;
            let op = quantize(&a, n).map_err(|e| e.to_string())?;
            let tr = trace_average(&op, &a);
            let row = vec![n.into(), num(tr.trace_n), num(tr.mean), num(tr.defect)];
            let mut t = Table::new(&cols);
            t.push(row.clone());
            Ok((t, vec![row], ()))
        },
    );
    let (files, _, failures) = collect(res, &mut summary);
    RunOutput {
        files,
        summary,
        extras: vec![],
        failures,
    }
}
