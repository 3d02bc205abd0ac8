use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{BumpProfile, TorusSymbol};
use crate::error::{Error, Result};
use crate::fourier::cis;

/// Maximum pointwise truncation error, relative to sup |b| = 1.
pub const TRUNCATION_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolKind {
    /// b((x - x0)/delta), independent of xi.
    Localized,
    /// b((x - x0)/delta) b((xi - xi0)/delta).
    Microlocalized,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaSymbolSpec {
    pub profile: BumpProfile,
    /// (x0, xi0); xi0 is ignored for localized symbols.
    pub center: [f64; 2],
    pub scale: f64,
    pub alpha: f64,
    pub kind: SymbolKind,
}

impl DeltaSymbolSpec {
    pub fn localized(x0: f64, delta: f64) -> Self {
        DeltaSymbolSpec {
            profile: BumpProfile::default(),
            center: [x0, 0.0],
            scale: delta,
            alpha: 0.0,
            kind: SymbolKind::Localized,
        }
    }

    pub fn microlocalized(x0: f64, xi0: f64, delta: f64) -> Self {
        DeltaSymbolSpec {
            kind: SymbolKind::Microlocalized,
            center: [x0, xi0],
            ..Self::localized(x0, delta)
        }
    }

    pub fn with_profile(mut self, profile: BumpProfile) -> Self {
        self.profile = profile;
        self
    }

    /// delta = |log h|^(-alpha), checked against h^rho <= delta <= 1.
    pub fn from_h(kind: SymbolKind, center: [f64; 2], h: f64, alpha: f64, rho: f64) -> Result<Self> {
        if !(0.0..0.5).contains(&rho) {
            return Err(Error::Invalid(format!("rho = {rho} outside [0, 1/2)")));
        }
        if !(h > 0.0 && h < 1.0) || alpha < 0.0 {
            return Err(Error::Invalid(format!(
                "need 0 < h < 1 and alpha >= 0 (h={h}, alpha={alpha})"
            )));
        }
        let delta = (-h.ln()).powf(-alpha);
        if delta < h.powf(rho) || delta > 1.0 {
            return Err(Error::Invalid(format!(
                "delta = {delta:.4e} not {rho}-admissible at h = {h:.4e}"
            )));
        }
        Ok(DeltaSymbolSpec {
            profile: BumpProfile::default(),
            center,
            scale: delta,
            alpha,
            kind,
        })
    }

    /// delta(N) = (log N)^(-alpha), the dimension-indexed scale.
    pub fn at_dimension(kind: SymbolKind, center: [f64; 2], n: usize, alpha: f64) -> Self {
        DeltaSymbolSpec {
            profile: BumpProfile::default(),
            center,
            scale: (n as f64).ln().powf(-alpha).min(1.0),
            alpha,
            kind,
        }
    }

    /// Realizes the symbol at the smallest bandwidth meeting the truncation
    /// tolerance.
    pub fn realize(&self) -> Result<TorusSymbol> {
        check_scale(self.scale)?;
        let k = required_bandwidth(self.profile, self.scale, self.kind, TRUNCATION_TOL);
        make_delta_symbol(self, k)
    }

    /// Parses "loc:x0=0.5,delta=0.1" or "micro:x0=0.5,xi0=0.5,alpha=0.3".
    /// A scale given through alpha needs the dimension `n`.
    pub fn parse(s: &str, n: Option<usize>) -> Result<Self> {
        let bad = |m: &str| Error::Invalid(format!("symbol spec '{s}': {m}"));
        let (head, rest) = s.split_once(':').ok_or_else(|| bad("missing kind prefix"))?;
        let kind = match head {
            "loc" => SymbolKind::Localized,
            "micro" => SymbolKind::Microlocalized,
            _ => return Err(bad("kind must be loc or micro")),
        };
        let mut kv = BTreeMap::new();
        for part in rest.split(',').filter(|p| !p.is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(|| bad("expected key=value"))?;
            let v: f64 = v.trim().parse().map_err(|_| bad("non-numeric value"))?;
            kv.insert(k.trim().to_string(), v);
        }
        let x0 = kv.remove("x0").unwrap_or(0.0);
        let xi0 = kv.remove("xi0").unwrap_or(0.0);
        let sharp = kv.remove("sharpness");
        let alpha = kv.remove("alpha");
        let delta = kv.remove("delta");
        if let Some(k) = kv.keys().next() {
            return Err(bad(&format!("unknown key {k}")));
        }
        let mut spec = match (delta, alpha) {
            (Some(d), a) => DeltaSymbolSpec {
                profile: BumpProfile::default(),
                center: [x0, xi0],
                scale: d,
                alpha: a.unwrap_or(0.0),
                kind,
            },
            (None, Some(a)) => {
                let n = n.ok_or_else(|| bad("alpha without a dimension"))?;
                Self::at_dimension(kind, [x0, xi0], n, a)
            }
            (None, None) => return Err(bad("need delta or alpha")),
        };
        if let Some(c) = sharp {
            spec.profile = BumpProfile::Smooth { sharpness: c };
        }
        check_scale(spec.scale)?;
        Ok(spec)
    }
}

fn check_scale(delta: f64) -> Result<()> {
    if delta > 0.0 && delta <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidScale(delta))
    }
}

fn error_bound(kind: SymbolKind, tail: f64) -> f64 {
    match kind {
        SymbolKind::Localized => tail,
        // |ab - a_K b_K| <= t sup|b| + (sup|a| + t) t with sup = 1
        SymbolKind::Microlocalized => 2.0 * tail + tail * tail,
    }
}

/// Smallest K >= ceil(4/delta) whose truncation error bound is <= tol.
pub fn required_bandwidth(profile: BumpProfile, delta: f64, kind: SymbolKind, tol: f64) -> usize {
    let floor = (4.0 / delta - 1e-9).ceil() as usize;
    if let BumpProfile::Flat = profile {
        return floor;
    }
    let kscan = ((200.0 / delta).ceil() as usize).max(64);
    let beta = profile.periodized_coefficients(delta, kscan);
    // tail[K] = 2 sum_{k > K} |beta_k|
    let mut tail = vec![0.0; kscan + 2];
    for k in (0..=kscan).rev() {
        tail[k] = tail[k + 1] + if k < kscan { 2.0 * beta[k + 1].abs() } else { 0.0 };
    }
    let k = (0..=kscan)
        .find(|&k| error_bound(kind, tail[k]) <= tol)
        .unwrap_or(kscan);
    k.max(floor)
}

/// Fourier truncation at bandwidth `k` of the bump described by `spec`.
pub fn make_delta_symbol(spec: &DeltaSymbolSpec, k: usize) -> Result<TorusSymbol> {
    let delta = spec.scale;
    check_scale(delta)?;
    let required = required_bandwidth(spec.profile, delta, spec.kind, TRUNCATION_TOL);
    if k < required {
        return Err(Error::BandwidthTooSmall {
            bandwidth: k,
            delta,
            required,
        });
    }
    if let BumpProfile::Flat = spec.profile {
        return Ok(TorusSymbol::constant(C64::new(1.0, 0.0)));
    }
    let beta = spec.profile.periodized_coefficients(delta, k);
    let ki = k as i64;
    let factor = |k1: i64, c: f64| -> C64 {
        let b = beta[k1.unsigned_abs() as usize];
        let e = cis(-2.0 * PI * k1.unsigned_abs() as f64 * c);
        if k1 >= 0 {
            e * b
        } else {
            e.conj() * b
        }
    };
    let [x0, xi0] = spec.center;
    let mut coeffs = BTreeMap::new();
    match spec.kind {
        SymbolKind::Localized => {
            for k1 in -ki..=ki {
                coeffs.insert((k1, 0), factor(k1, x0));
            }
        }
        SymbolKind::Microlocalized => {
            let fx: Vec<C64> = (-ki..=ki).map(|k1| factor(k1, x0)).collect();
            let fy: Vec<C64> = (-ki..=ki).map(|k2| factor(k2, xi0)).collect();
            for (i, a) in fx.iter().enumerate() {
                for (j, b) in fy.iter().enumerate() {
                    coeffs.insert((i as i64 - ki, j as i64 - ki), a * b);
                }
            }
        }
    }
    Ok(TorusSymbol::from_map(coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invalid_scale_and_bandwidth() {
        let s = DeltaSymbolSpec::localized(0.0, 0.0);
        assert_eq!(make_delta_symbol(&s, 64), Err(Error::InvalidScale(0.0)));
        let s = DeltaSymbolSpec::localized(0.0, 1.5);
        assert!(matches!(make_delta_symbol(&s, 64), Err(Error::InvalidScale(_))));
        let s = DeltaSymbolSpec::localized(0.0, 0.25);
        assert!(matches!(
            make_delta_symbol(&s, 15),
            Err(Error::BandwidthTooSmall { required, .. }) if required >= 16
        ));
    }

    #[test]
    fn flat_profile_is_constant_one() {
        let s = DeltaSymbolSpec::localized(0.3, 1.0).with_profile(BumpProfile::Flat);
        let a = make_delta_symbol(&s, 4).unwrap();
        assert_eq!(a, TorusSymbol::constant(C64::new(1.0, 0.0)));
    }

    #[test]
    fn parse_specs() {
        let s = DeltaSymbolSpec::parse("loc:x0=0.25,delta=0.1", None).unwrap();
        assert_eq!(s.kind, SymbolKind::Localized);
        assert_eq!(s.center[0], 0.25);
        assert_eq!(s.scale, 0.1);
        let s = DeltaSymbolSpec::parse("micro:x0=0.5,xi0=0.5,alpha=0.3", Some(1024)).unwrap();
        assert!((s.scale - 1024f64.ln().powf(-0.3)).abs() < 1e-15);
        assert!(DeltaSymbolSpec::parse("loc:alpha=0.3", None).is_err());
        assert!(DeltaSymbolSpec::parse("loc:delta=2", None).is_err());
        assert!(DeltaSymbolSpec::parse("ring:delta=0.1", None).is_err());
    }

    #[test]
    fn admissibility_window() {
        let h = 1.0 / (2.0 * PI * 1024.0);
        assert!(DeltaSymbolSpec::from_h(SymbolKind::Localized, [0.0; 2], h, 0.3, 0.25).is_ok());
        assert!(DeltaSymbolSpec::from_h(SymbolKind::Localized, [0.0; 2], h, 0.3, 0.5).is_err());
        // alpha so large that delta < h^rho
        assert!(DeltaSymbolSpec::from_h(SymbolKind::Localized, [0.0; 2], h, 20.0, 0.2).is_err());
    }
}
