use std::fmt;
use std::path::{Path, PathBuf};

use qe_core::quantum::default_beta_tilde;
use serde::{Deserialize, Serialize};

use crate::symbol::SymbolParam;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Egorov,
    VarianceSweep,
    MassDist,
    Mixing,
    ErgodicityRate,
    CoverSweep,
    CalculusDefects,
    TraceCheck,
}

impl Experiment {
    pub fn is_stochastic(self, p: &Parameters) -> bool {
        match self {
            Experiment::Mixing | Experiment::ErgodicityRate => p.model() == Model::Surface,
            Experiment::CoverSweep => true,
            _ => false,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Egorov => "egorov",
            Experiment::VarianceSweep => "variance-sweep",
            Experiment::MassDist => "mass-dist",
            Experiment::Mixing => "mixing",
            Experiment::ErgodicityRate => "ergodicity-rate",
            Experiment::CoverSweep => "cover-sweep",
            Experiment::CalculusDefects => "calculus-defects",
            Experiment::TraceCheck => "trace-check",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    #[default]
    Surface,
    Torus,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    #[default]
    Bolza,
    Flat,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameters {
    #[serde(skip_serializing_if = "Option::is_none")]
    #[serde(rename = "N")]
    pub n: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_tilde: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    #[serde(rename = "Ts")]
    pub ts: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tmax: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<[[i64; 2]; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symbol: Option<SymbolParam>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symbol_b: Option<SymbolParam>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<Model>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub space: Option<Space>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub testgrid: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub testballs: Option<usize>,
    /// Same as the top-level seed, which wins when both are set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Parameters {
    pub fn model(&self) -> Model {
        self.model.unwrap_or_default()
    }

    pub fn matrix(&self) -> [[i64; 2]; 2] {
        self.matrix.unwrap_or([[2, 1], [3, 2]])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub parameters: Parameters,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ConfigError: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

impl ExperimentConfig {
    pub fn seed(&self) -> Option<u64> {
        self.seed.or(self.parameters.seed)
    }

    /// TOML unless the extension is .json.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        let cfg: ExperimentConfig = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| ConfigError(e.to_string()))?
        } else {
            toml::from_str(&text).map_err(|e| ConfigError(e.message().to_string()))?
        };
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let p = &self.parameters;
        let need_n = || -> Result<&Vec<usize>, ConfigError> {
            match &p.n {
                Some(v) if !v.is_empty() => Ok(v),
                _ => bad(format!("{} needs a nonempty N list", self.experiment.name())),
            }
        };
        if self.experiment.is_stochastic(p) && self.seed().is_none() {
            return bad(format!("{} is stochastic and needs a seed", self.experiment.name()));
        }
        if let Some(e) = p.epsilon {
            if !(0.0..=0.1).contains(&e) {
                return bad(format!("epsilon = {e} outside [0, 0.1]"));
            }
        }
        if let Some(a) = p.alpha {
            if !(0.0..0.5).contains(&a) {
                return bad(format!(
                    "alpha = {a} violates the rho-admissibility window: need 0 <= alpha < 1/2 (position dimension 1)"
                ));
            }
        }
        if let Some(g) = p.gamma {
            if !(g > 0.0 && g < 1.0) {
                return bad(format!("gamma = {g} outside (0, 1)"));
            }
        }
        if let Some(m) = p.matrix {
            if let Err(e) = qe_core::anosov::AnosovMap::new(m, p.epsilon.unwrap_or(0.0)) {
                return bad(e.to_string());
            }
        }
        match self.experiment {
            Experiment::Egorov => {
                for &n in need_n()? {
                    if n < 2 {
                        return bad(format!("N = {n} below 2"));
                    }
                }
                let m = p.matrix();
                if (m[0][0] * m[0][1]) % 2 != 0 || (m[1][0] * m[1][1]) % 2 != 0 {
                    return bad("matrix fails the quantization parity condition");
                }
                if p.tmax.is_some_and(|t| t < 0.0 || t.fract() != 0.0) {
                    return bad("egorov tmax must be a nonnegative integer");
                }
            }
            Experiment::VarianceSweep => {
                need_n()?;
                let alpha = p.alpha.unwrap_or(0.3);
                if p.beta_tilde.is_none() {
                    default_beta_tilde(alpha, 1).map_err(|e| ConfigError(e.to_string()))?;
                } else if let Some(b) = p.beta_tilde {
                    if !(b > 0.0) {
                        return bad(format!("beta_tilde = {b} must be positive"));
                    }
                }
            }
            Experiment::MassDist => {
                for &n in need_n()? {
                    let r =
                        p.r.as_ref()
                            .and_then(|v| v.first().copied())
                            .unwrap_or((n as f64).ln().powf(-1.0 / 3.0));
                    if r < 2.0 / n as f64 {
                        return bad(format!("r = {r} below 2/N at N = {n}"));
                    }
                }
            }
            Experiment::Mixing => {
                let tmax = p.tmax.unwrap_or(10.0);
                if p.model() == Model::Surface {
                    if !(tmax > 0.0 && tmax <= 20.0) {
                        return bad(format!("tmax = {tmax} outside (0, 20]"));
                    }
                    if p.samples.unwrap_or(100_000) < 10_000 {
                        return bad("mixing needs samples >= 10^4");
                    }
                    check_delta(p.delta.unwrap_or(0.5))?;
                }
            }
            Experiment::ErgodicityRate => {
                let ts = p.ts.clone().unwrap_or_else(|| vec![2.0, 4.0, 8.0, 16.0]);
                if p.model() == Model::Surface {
                    if ts.len() < 4
                        || ts.iter().any(|t| !(*t > 0.0 && *t <= 30.0))
                        || ts.windows(2).any(|w| w[1] <= w[0])
                    {
                        return bad("Ts must be >= 4 increasing values in (0, 30]");
                    }
                    check_delta(p.delta.unwrap_or(0.5))?;
                } else if ts.len() < 3 || ts.iter().any(|t| *t < 1.0 || t.fract() != 0.0) {
                    return bad("torus Ts must be >= 3 positive integers");
                }
            }
            Experiment::CoverSweep => {
                let rs = p.r.clone().unwrap_or_else(|| vec![0.4, 0.2, 0.1]);
                let cap = match p.space.unwrap_or_default() {
                    Space::Bolza => 0.5,
                    Space::Flat => f64::INFINITY,
                };
                if rs.is_empty() || rs.iter().any(|r| !(*r > 0.0 && *r <= cap)) {
                    return bad(format!("r values must lie in (0, {cap}]"));
                }
                if p.testgrid.unwrap_or(10_000) < 10_000 {
                    return bad("testgrid must be >= 10^4");
                }
            }
            Experiment::CalculusDefects | Experiment::TraceCheck => {
                for &n in need_n()? {
                    if n < 2 {
                        return bad(format!("N = {n} below 2"));
                    }
                }
            }
        }
        for s in [&p.symbol, &p.symbol_b].into_iter().flatten() {
            s.check().map_err(ConfigError)?;
        }
        Ok(())
    }
}

fn check_delta(d: f64) -> Result<(), ConfigError> {
    if !(d > 0.0 && d <= 0.5) {
        return bad(format!("surface delta = {d} outside (0, 0.5]"));
    }
    Ok(())
}
