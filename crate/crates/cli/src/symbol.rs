use std::path::Path;

use num_complex::Complex64 as C64;
use qe_core::symbols::{DeltaSymbolSpec, TorusSymbol};
use serde::{Deserialize, Serialize};

/// A symbol given by name, by "loc:" / "micro:" spec, by a path to a JSON
/// coefficient file, or inline as a list of [k1, k2, re, im] rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SymbolParam {
    Named(String),
    Modes { modes: Vec<[f64; 4]> },
}

impl SymbolParam {
    pub fn check(&self) -> Result<(), String> {
        match self {
            SymbolParam::Named(s) if s.ends_with(".json") => Ok(()),
            SymbolParam::Named(s) if s.starts_with("loc:") || s.starts_with("micro:") => {
                // alpha-only specs need N; check against a placeholder
                DeltaSymbolSpec::parse(s, Some(1024))
                    .map(|_| ())
                    .map_err(|e| e.to_string())
            }
            _ => self.realize(None).map(|_| ()),
        }
    }

    /// `n` resolves alpha-only delta specs.
    pub fn realize(&self, n: Option<usize>) -> Result<TorusSymbol, String> {
        match self {
            SymbolParam::Modes { modes } => {
                let mut it = Vec::with_capacity(modes.len());
                for m in modes {
                    if m[0].fract() != 0.0 || m[1].fract() != 0.0 {
                        return Err(format!("mode indices {m:?} are not integers"));
                    }
                    it.push(((m[0] as i64, m[1] as i64), C64::new(m[2], m[3])));
                }
                Ok(TorusSymbol::from_coeffs(it))
            }
            SymbolParam::Named(s) => named(s, n),
        }
    }
}

fn pair(s: &str) -> Result<(i64, i64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected k1,k2 in '{s}'"))?;
    let p = |v: &str| v.trim().parse::<i64>().map_err(|_| format!("bad integer '{v}'"));
    Ok((p(a)?, p(b)?))
}

fn named(s: &str, n: Option<usize>) -> Result<TorusSymbol, String> {
    if s.ends_with(".json") {
        let text = std::fs::read_to_string(Path::new(s)).map_err(|e| format!("{s}: {e}"))?;
        return TorusSymbol::from_json(&text).map_err(|e| e.to_string());
    }
    if s.starts_with("loc:") || s.starts_with("micro:") {
        return DeltaSymbolSpec::parse(s, n)
            .and_then(|d| d.realize())
            .map_err(|e| e.to_string());
    }
    if let Some(r) = s.strip_prefix("mode:") {
        let (a, b) = pair(r)?;
        return Ok(TorusSymbol::mode(a, b));
    }
    if let Some(r) = s.strip_prefix("cos:") {
        let (a, b) = pair(r)?;
        return Ok(TorusSymbol::cosine(a, b));
    }
    match s {
        // cos 2pi(x + xi) + 0.5 cos 2pi(2x) + 0.3 cos 2pi(x - xi)
        "mix" => Ok(TorusSymbol::cosine(1, 1)
            .add(&TorusSymbol::cosine(2, 0).scale(C64::new(0.5, 0.0)))
            .add(&TorusSymbol::cosine(1, -1).scale(C64::new(0.3, 0.0)))),
        "smooth" => Ok(TorusSymbol::cosine(1, 0).add(&TorusSymbol::cosine(0, 1).scale(C64::new(0.5, 0.0)))),
        _ => Err(format!("unknown symbol '{s}'")),
    }
}
