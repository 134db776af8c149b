use crate::cg::Precision;
use crate::ensembles::{BLaw, ClusterConvention};
use crate::{Error, Result};
use sha2::{Digest, Sha256};
use std::fmt;
use std::str::FromStr;

/// Deterministic part of the system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Family {
    /// `A = 0`, `sigma = inf`: the system is `H` itself.
    #[default]
    NoiseOnly,
    /// Dirichlet Laplacian on an `m x m` grid, `m = floor(sqrt(N))`.
    Laplacian,
    /// Marchenko-Pastur quantile clusters with `m = k = floor(sqrt(N))`.
    MpClusters,
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "noise_only" => Ok(Self::NoiseOnly),
            "laplacian" => Ok(Self::Laplacian),
            "mp_clusters" => Ok(Self::MpClusters),
            _ => Err(Error::InvalidSpec(format!("unknown family '{s}'"))),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::NoiseOnly => "noise_only",
            Self::Laplacian => "laplacian",
            Self::MpClusters => "mp_clusters",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub family: Family,
    pub n_grid: Vec<usize>,
    pub gamma: f64,
    pub c: f64,
    /// Noise scale; `inf` for pure noise, `0` for the unperturbed system.
    pub sigma: f64,
    pub eps: f64,
    pub samples_per_n: usize,
    pub master_seed: u64,
    pub b_law: BLaw,
    pub precision: Precision,
    pub cluster_convention: ClusterConvention,
    /// Rescale the deterministic part to unit top eigenvalue.
    pub normalize: bool,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        Self {
            family: Family::NoiseOnly,
            n_grid: vec![100],
            gamma: 1.0,
            c: 1.0,
            sigma: f64::INFINITY,
            eps: 1e-4,
            samples_per_n: 10,
            master_seed: 0,
            b_law: BLaw::UniformBox,
            precision: Precision::Extended,
            cluster_convention: ClusterConvention::ZeroRow,
            normalize: false,
        }
    }
}

fn fmt_f64(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else {
        format!("{x:?}")
    }
}

fn parse_f64(key: &str, v: &str, line: usize) -> Result<f64> {
    match v {
        "inf" | "Inf" | "infinity" => Ok(f64::INFINITY),
        _ => v.parse().map_err(|_| Error::Parse {
            line,
            message: format!("{key}: cannot parse '{v}' as a number"),
        }),
    }
}

fn parse_int<T: FromStr>(key: &str, v: &str, line: usize) -> Result<T> {
    v.parse().map_err(|_| Error::Parse {
        line,
        message: format!("{key}: cannot parse '{v}' as an integer"),
    })
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() || self.n_grid.contains(&0) {
            return Err(Error::InvalidSpec("N_grid must be non-empty with positive entries".into()));
        }
        if self.family != Family::NoiseOnly && self.n_grid.iter().any(|&n| n < 4) {
            return Err(Error::InvalidSpec("structured families need N >= 4".into()));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::InvalidSpec(format!("gamma must lie in (0, 1], got {}", self.gamma)));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidSpec(format!("c must be positive, got {}", self.c)));
        }
        if self.sigma.is_nan() || self.sigma < 0.0 {
            return Err(Error::InvalidSpec(format!("sigma must be >= 0, got {}", self.sigma)));
        }
        if self.sigma == 0.0 && self.family == Family::NoiseOnly {
            return Err(Error::InvalidSpec("sigma = 0 leaves nothing to sample in noise_only".into()));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::InvalidSpec(format!("eps must lie in (0, 1), got {}", self.eps)));
        }
        if self.samples_per_n == 0 {
            return Err(Error::InvalidSpec("samples_per_N must be positive".into()));
        }
        Ok(())
    }

    /// Parses the `key = value` plan format. Blank lines and `#` comments are
    /// ignored; unknown or repeated keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut plan = Self::default();
        let mut seen = std::collections::HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
                line,
                message: format!("expected 'key = value', got '{content}'"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(Error::Parse {
                    line,
                    message: format!("duplicate key '{key}'"),
                });
            }
            let bad = |m: String| Error::Parse { line, message: m };
            match key {
                "family" => plan.family = value.parse().map_err(|e: Error| bad(e.to_string()))?,
                "N_grid" => {
                    plan.n_grid = value
                        .split(',')
                        .map(|s| parse_int(key, s.trim(), line))
                        .collect::<Result<Vec<usize>>>()?
                }
                "gamma" => plan.gamma = parse_f64(key, value, line)?,
                "c" => plan.c = parse_f64(key, value, line)?,
                "sigma" => plan.sigma = parse_f64(key, value, line)?,
                "eps" => plan.eps = parse_f64(key, value, line)?,
                "samples_per_N" => plan.samples_per_n = parse_int(key, value, line)?,
                "master_seed" => plan.master_seed = parse_int(key, value, line)?,
                "b_law" => plan.b_law = value.parse().map_err(|e: Error| bad(e.to_string()))?,
                "precision" => {
                    plan.precision = match value {
                        "standard" => Precision::Standard,
                        "extended" => Precision::Extended,
                        _ => return Err(bad(format!("unknown precision '{value}'"))),
                    }
                }
                "cluster_convention" => {
                    plan.cluster_convention = match value {
                        "zero_row" => ClusterConvention::ZeroRow,
                        "extra_zero_row" => ClusterConvention::ExtraZeroRow,
                        _ => return Err(bad(format!("unknown cluster convention '{value}'"))),
                    }
                }
                "normalize" => {
                    plan.normalize = value
                        .parse()
                        .map_err(|_| bad(format!("normalize: expected true/false, got '{value}'")))?
                }
                _ => return Err(bad(format!("unknown key '{key}'"))),
            }
        }
        plan.validate()?;
        Ok(plan)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Canonical serialization: every key, fixed order, shortest round-trip floats.
    pub fn canonical(&self) -> String {
        let grid: Vec<String> = self.n_grid.iter().map(|n| n.to_string()).collect();
        let precision = match self.precision {
            Precision::Standard => "standard",
            Precision::Extended => "extended",
        };
        let convention = match self.cluster_convention {
            ClusterConvention::ZeroRow => "zero_row",
            ClusterConvention::ExtraZeroRow => "extra_zero_row",
        };
        format!(
            "family = {}\nN_grid = {}\ngamma = {}\nc = {}\nsigma = {}\neps = {}\nsamples_per_N = {}\n\
             master_seed = {}\nb_law = {}\nprecision = {}\ncluster_convention = {}\nnormalize = {}\n",
            self.family,
            grid.join(","),
            fmt_f64(self.gamma),
            fmt_f64(self.c),
            fmt_f64(self.sigma),
            fmt_f64(self.eps),
            self.samples_per_n,
            self.master_seed,
            self.b_law,
            precision,
            convention,
            self.normalize,
        )
    }

    /// SHA-256 of [`Self::canonical`], lowercase hex.
    pub fn digest(&self) -> String {
        let h = Sha256::digest(self.canonical().as_bytes());
        format!("{h:x}")
    }
}
