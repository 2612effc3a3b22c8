//! Run configuration files (TOML).

use std::path::{Path, PathBuf};

use serde::Deserialize;
use twisted_hessian::algebra::document::TransformDoc;
use twisted_hessian::algebra::OperatorSpec;
use twisted_hessian::concavity::sampling::{random_spd, sample_rng, SPD_EPSILON};
use twisted_hessian::concavity::ScalarTransform;
use twisted_hessian::solver::{ConvexDomain, Grid, SolveOptions};

use crate::expr::Expr;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// `det D^2u + Delta u`, `G = x^(1/n)`.
    DetLaplacian,
    /// `sum_{k=2}^n S_k(D^2u)`, `G = x^(1/n)`.
    SumHessians,
    /// `tr(A D^2u) + sum_k f_k sigma_{k,B_k}(D^2u)` with `A`, `B_k`, `f_k` drawn from the seed.
    Pencil,
}

impl Preset {
    pub fn build(self, n: usize, seed: u64) -> Result<OperatorSpec<f64>, CliError> {
        Ok(match self {
            Preset::DetLaplacian => OperatorSpec::det_plus_laplacian(n)?,
            Preset::SumHessians => OperatorSpec::sum_of_hessians(n)?,
            Preset::Pencil => {
                if n < 2 {
                    return Err(CliError::usage(format!("pencil preset needs n >= 2, got {n}")));
                }
                let mut rng = sample_rng(seed, 0);
                let a = random_spd(n, SPD_EPSILON, &mut rng);
                let weights: Vec<f64> =
                    (2..=n).map(|_| rand::Rng::random_range(&mut rng, 0.1..2.0)).collect();
                let bs = (2..=n).map(|_| random_spd(n, SPD_EPSILON, &mut rng)).collect();
                OperatorSpec::weighted_pencil(n, a, &weights, bs)?
            }
        })
    }
}

/// Reads an operator document from a TOML file.
pub fn load_operator(path: &Path) -> Result<OperatorSpec<f64>, CliError> {
    let text = read(path)?;
    Ok(OperatorSpec::from_toml(&text)?)
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorRef {
    pub preset: Option<Preset>,
    pub n: Option<usize>,
    /// Operator document, relative to the config file.
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Problem {
    pub f: String,
    #[serde(default = "zero_text")]
    pub phi: String,
}

fn zero_text() -> String {
    "0".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default = "default_steps")]
    pub continuity_steps: usize,
    /// Start from a randomized initial guess.
    pub initial_seed: Option<u64>,
}

fn default_h() -> f64 {
    SolveOptions::default().h
}

fn default_steps() -> usize {
    SolveOptions::default().continuity_steps
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            h: default_h(),
            continuity_steps: default_steps(),
            initial_seed: None,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub h: Option<Vec<f64>>,
    pub alpha: Option<Vec<f64>>,
    pub region_ratio: Option<f64>,
    pub pairs: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    pub lo: f64,
    pub hi: f64,
    pub links: Vec<TransformDoc>,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    10_000
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub operator: OperatorRef,
    #[serde(default = "unit_disk")]
    pub domain: ConvexDomain,
    pub problem: Option<Problem>,
    #[serde(default)]
    pub grid: GridConfig,
    pub probe: Option<ProbeConfig>,
    pub chain: Option<ChainConfig>,
    #[serde(default)]
    pub seed: u64,
    pub out: Option<PathBuf>,
}

fn unit_disk() -> ConvexDomain {
    ConvexDomain::Disk { radius: 1.0 }
}

/// A config with every part parsed and checked.
#[derive(Debug, Clone)]
pub struct Validated {
    pub spec: OperatorSpec<f64>,
    pub domain: ConvexDomain,
    pub f: Option<Expr>,
    pub phi: Option<Expr>,
    pub options: SolveOptions,
    pub probe: ProbeConfig,
    pub chain: Option<(Vec<ScalarTransform<f64>>, ChainConfig)>,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Validated, CliError> {
        let text = read(path)?;
        let cfg: RunConfig =
            toml::from_str(&text).map_err(|e| CliError::usage(format!("{}: {}", path.display(), one_line(&e.to_string()))))?;
        cfg.validate(path.parent().unwrap_or(Path::new(".")))
    }

    fn validate(self, base: &Path) -> Result<Validated, CliError> {
        let spec = match (&self.operator.preset, &self.operator.file) {
            (Some(p), None) => {
                let n = self.operator.n.ok_or_else(|| CliError::usage("operator.preset needs operator.n"))?;
                p.build(n, self.seed)?
            }
            (None, Some(file)) => {
                if self.operator.n.is_some() {
                    return Err(CliError::usage("operator.n is taken from the operator file"));
                }
                load_operator(&base.join(file))?
            }
            _ => return Err(CliError::usage("operator needs exactly one of preset or file")),
        };
        self.domain.validate()?;
        let parse = |what: &str, s: &str| {
            Expr::parse(s).map_err(|e| CliError::usage(format!("problem.{what}: {e}")))
        };
        let (f, phi) = match &self.problem {
            Some(p) => (Some(parse("f", &p.f)?), Some(parse("phi", &p.phi)?)),
            None => (None, None),
        };
        Grid::new(self.domain, self.grid.h)?;
        if self.grid.continuity_steps == 0 {
            return Err(CliError::usage("grid.continuity_steps must be at least 1"));
        }
        let probe = self.probe.unwrap_or_default();
        if let Some(r) = probe.region_ratio {
            if !(r > 0.0 && r <= 1.0) {
                return Err(CliError::usage(format!("probe.region_ratio must lie in (0, 1], got {r}")));
            }
        }
        let chain = match self.chain {
            Some(c) => {
                let links = c.links.iter().map(TransformDoc::build).collect::<Result<Vec<_>, _>>()?;
                Some((links, c))
            }
            None => None,
        };
        Ok(Validated {
            spec,
            domain: self.domain,
            f,
            phi,
            options: SolveOptions {
                h: self.grid.h,
                continuity_steps: self.grid.continuity_steps,
                initial_seed: self.grid.initial_seed,
                ..SolveOptions::default()
            },
            probe,
            chain,
            seed: self.seed,
            out: self.out,
        })
    }
}

pub fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Parses a decimal or a plain fraction such as `1/16`.
pub fn parse_number(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| format!("bad number '{s}'"))?;
            let b: f64 = b.trim().parse().map_err(|_| format!("bad number '{s}'"))?;
            a / b
        }
        None => s.parse().map_err(|_| format!("bad number '{s}'"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("number '{s}' is not finite"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn validate(text: &str) -> Result<Validated, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::usage(e.to_string()))?;
        cfg.validate(Path::new("."))
    }

    #[test]
    fn minimal_config() {
        let v = validate("[operator]\npreset = \"det-laplacian\"\nn = 2\n[problem]\nf = \"3 + x^2\"\n").unwrap();
        assert_eq!(v.spec.dim(), 2);
        assert_eq!(v.f.unwrap().eval(1.0, 0.0), 4.0);
        assert_eq!(v.phi.unwrap().eval(1.0, 0.0), 0.0);
        assert_eq!(v.options.h, 1.0 / 32.0);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(validate("[operator]\npreset = \"det-laplacian\"\nn = 2\ncolour = 1\n").is_err());
        assert!(validate("typo = 1\n[operator]\npreset = \"det-laplacian\"\nn = 2\n").is_err());
        assert!(validate("[operator]\npreset = \"det-laplacian\"\n").is_err());
        assert!(validate("[operator]\npreset = \"det-laplacian\"\nn = 2\n[problem]\nf = \"3 +\"\n").is_err());
        assert!(validate("[operator]\npreset = \"det-laplacian\"\nn = 2\n[grid]\nh = 2.0\n").is_err());
        assert!(validate("[operator]\npreset = \"det-laplacian\"\nn = 2\n[domain]\nkind = \"ellipse\"\na = 1.0\nb = -1.0\n").is_err());
    }

    #[test]
    fn fractions() {
        assert_eq!(parse_number("1/16").unwrap(), 0.0625);
        assert_eq!(parse_number(" 0.5 ").unwrap(), 0.5);
        assert!(parse_number("1/0").is_err());
        assert!(parse_number("a").is_err());
    }
}
