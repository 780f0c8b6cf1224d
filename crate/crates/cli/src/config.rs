//! Run configuration files.

use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("CONFIG_PARSE: {path}{}: {message}", line.map(|l| format!(":{l}")).unwrap_or_default())]
    Parse {
        path: String,
        line: Option<usize>,
        message: String,
    },
    #[error("CONFIG_PARSE: cannot read {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyName {
    SpinHalf,
    Spin1,
    Spin2,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeName {
    #[default]
    Fd,
    Spectral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    Anni,
    Alm,
    Multiblock,
}

/// A scalar broadcast over all axes, or one value per axis.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum PerAxis<T> {
    One(T),
    Each(Vec<T>),
}

impl<T: Copy> PerAxis<T> {
    fn len(&self) -> Option<usize> {
        match self {
            PerAxis::One(_) => None,
            PerAxis::Each(v) => Some(v.len()),
        }
    }

    pub fn expand(&self, dims: usize) -> Vec<T> {
        match self {
            PerAxis::One(x) => vec![*x; dims],
            PerAxis::Each(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub lower: PerAxis<f64>,
    pub upper: PerAxis<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShapeName {
    Sin,
    Cos,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub amplitude: f64,
    pub wavenumber: f64,
    pub shape: ShapeName,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    /// Weights `w_i` of `1/2 Σ w_i x_i²`; defaults to 1 on every axis.
    pub harmonic: Option<PerAxis<f64>>,
    pub lattice: Option<LatticeConfig>,
}

/// Interaction and population parameters; any of them may be swept.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Params {
    /// Common factor applied to `beta11`, `beta22`, `beta12`.
    pub beta: Option<f64>,
    pub beta0: Option<f64>,
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
    pub beta11: Option<f64>,
    pub beta22: Option<f64>,
    pub beta12: Option<f64>,
    pub alpha: Option<f64>,
    pub magnetization: Option<f64>,
}

/// Sweepable parameter names, in table column order.
pub const PARAM_NAMES: [&str; 9] = [
    "beta",
    "beta0",
    "beta1",
    "beta2",
    "beta11",
    "beta22",
    "beta12",
    "alpha",
    "magnetization",
];

impl Params {
    pub fn get(&self, name: &str) -> Option<f64> {
        match name {
            "beta" => self.beta,
            "beta0" => self.beta0,
            "beta1" => self.beta1,
            "beta2" => self.beta2,
            "beta11" => self.beta11,
            "beta22" => self.beta22,
            "beta12" => self.beta12,
            "alpha" => self.alpha,
            "magnetization" => self.magnetization,
            _ => None,
        }
    }

    pub fn set(&mut self, name: &str, value: f64) {
        let slot = match name {
            "beta" => &mut self.beta,
            "beta0" => &mut self.beta0,
            "beta1" => &mut self.beta1,
            "beta2" => &mut self.beta2,
            "beta11" => &mut self.beta11,
            "beta22" => &mut self.beta22,
            "beta12" => &mut self.beta12,
            "alpha" => &mut self.alpha,
            "magnetization" => &mut self.magnetization,
            _ => return,
        };
        *slot = Some(value);
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub family: FamilyName,
    #[serde(default)]
    pub scheme: SchemeName,
    pub n: Option<PerAxis<usize>>,
    pub domain: Option<DomainConfig>,
    pub potential: Option<PotentialConfig>,
    pub beta: Option<f64>,
    pub beta0: Option<f64>,
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
    pub beta11: Option<f64>,
    pub beta22: Option<f64>,
    pub beta12: Option<f64>,
    pub alpha: Option<f64>,
    pub magnetization: Option<f64>,
    /// Dense operators for `custom` problems.
    pub a1: Option<Vec<Vec<f64>>>,
    pub a2: Option<Vec<Vec<f64>>>,
}

impl ProblemConfig {
    pub fn params(&self) -> Params {
        Params {
            beta: self.beta,
            beta0: self.beta0,
            beta1: self.beta1,
            beta2: self.beta2,
            beta11: self.beta11,
            beta22: self.beta22,
            beta12: self.beta12,
            alpha: self.alpha,
            magnetization: self.magnetization,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Tau2Config {
    Fixed(f64),
    Named(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitName {
    #[default]
    Ones,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default)]
    pub method: Method,
    pub tau1: Option<f64>,
    pub tau2: Option<Tau2Config>,
    pub grad_tol: Option<f64>,
    pub energy_tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub max_halvings: Option<usize>,
    pub inner_tol: Option<f64>,
    pub inner_max_iter: Option<usize>,
    #[serde(default)]
    pub init: InitName,
    pub gaussian_width: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub beta: Option<Vec<f64>>,
    pub beta0: Option<Vec<f64>>,
    pub beta1: Option<Vec<f64>>,
    pub beta2: Option<Vec<f64>>,
    pub beta11: Option<Vec<f64>>,
    pub beta22: Option<Vec<f64>>,
    pub beta12: Option<Vec<f64>>,
    pub alpha: Option<Vec<f64>>,
    pub magnetization: Option<Vec<f64>>,
}

impl SweepSection {
    /// Swept names with their values, in column order.
    pub fn axes(&self) -> Vec<(&'static str, &[f64])> {
        let lists = [
            &self.beta,
            &self.beta0,
            &self.beta1,
            &self.beta2,
            &self.beta11,
            &self.beta22,
            &self.beta12,
            &self.alpha,
            &self.magnetization,
        ];
        PARAM_NAMES
            .iter()
            .zip(lists)
            .filter_map(|(name, list)| list.as_deref().map(|v| (*name, v)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    #[serde(default)]
    pub solver: SolverSection,
    pub sweep: Option<SweepSection>,
    pub output: Option<OutputSection>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn header_line(text: &str, header: &str) -> Option<usize> {
    text.lines().position(|l| l.trim() == header).map(|i| i + 1)
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parses and validates; `origin` labels error messages.
    pub fn parse(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: origin.to_string(),
            line: e.span().map(|s| line_of(text, s.start)),
            message: e.message().to_string(),
        })?;
        cfg.validate().map_err(|(header, message)| ConfigError::Parse {
            path: origin.to_string(),
            line: header_line(text, header),
            message,
        })?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), (&'static str, String)> {
        let p = &self.problem;
        let missing = |field: &str| ("[problem]", format!("missing field `{field}` in [problem]"));
        if p.family == FamilyName::Custom {
            if p.a1.is_none() {
                return Err(missing("a1"));
            }
            if p.a2.is_none() {
                return Err(missing("a2"));
            }
        } else {
            let domain = p.domain.as_ref().ok_or_else(|| missing("domain"))?;
            let n = p.n.as_ref().ok_or_else(|| missing("n"))?;
            let lens: Vec<usize> = [n.len(), domain.lower.len(), domain.upper.len()]
                .into_iter()
                .flatten()
                .collect();
            if lens.windows(2).any(|w| w[0] != w[1]) {
                return Err(("[problem]", "`n`, `domain.lower` and `domain.upper` disagree on dimension".into()));
            }
        }
        let required: &[&str] = match p.family {
            FamilyName::SpinHalf => &["beta11", "beta22", "beta12", "alpha"],
            FamilyName::Spin1 => &["beta0", "beta1", "magnetization"],
            FamilyName::Spin2 => &["beta0", "beta1", "beta2", "magnetization"],
            FamilyName::Custom => &["beta11", "beta22", "beta12"],
        };
        let swept: Vec<&str> = self
            .sweep
            .as_ref()
            .map(|s| s.axes().iter().map(|(n, _)| *n).collect())
            .unwrap_or_default();
        for field in required {
            if p.params().get(field).is_none() && !swept.contains(field) {
                return Err(missing(field));
            }
        }
        if let Some(sweep) = &self.sweep {
            for (name, values) in sweep.axes() {
                if values.is_empty() {
                    return Err(("[sweep]", format!("sweep list `{name}` is empty")));
                }
            }
        }
        if let Some(Tau2Config::Named(name)) = &self.solver.tau2 {
            if name != "auto" {
                return Err(("[solver]", format!("tau2 must be a number or \"auto\", got \"{name}\"")));
            }
        }
        Ok(())
    }

    /// Problem dimension (1 for custom problems).
    pub fn dims(&self) -> usize {
        let p = &self.problem;
        let from_n = p.n.as_ref().and_then(|n| n.len());
        let from_domain = p.domain.as_ref().and_then(|d| d.lower.len().or(d.upper.len()));
        from_n.or(from_domain).unwrap_or(1)
    }

    /// Every parameter point of the sweep, outermost axis first.
    pub fn points(&self) -> Vec<Params> {
        let mut points = vec![self.problem.params()];
        if let Some(sweep) = &self.sweep {
            for (name, values) in sweep.axes() {
                points = points
                    .into_iter()
                    .flat_map(|base| {
                        values.iter().map(move |&v| {
                            let mut p = base;
                            p.set(name, v);
                            p
                        })
                    })
                    .collect();
            }
        }
        points
    }

    /// Parameter columns of the summary table.
    pub fn columns(&self) -> Vec<&'static str> {
        let axis = match self.problem.family {
            FamilyName::SpinHalf => Some("alpha"),
            FamilyName::Spin1 | FamilyName::Spin2 => Some("magnetization"),
            FamilyName::Custom => None,
        };
        let swept: Vec<&str> = self
            .sweep
            .as_ref()
            .map(|s| s.axes().iter().map(|(n, _)| *n).collect())
            .unwrap_or_default();
        PARAM_NAMES
            .iter()
            .copied()
            .filter(|n| swept.contains(n) || Some(*n) == axis)
            .collect()
    }
}
