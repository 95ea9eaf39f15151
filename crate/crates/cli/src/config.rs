//! Run configuration: the JSON schema and its validation.

use std::collections::BTreeMap;
use std::path::Path;

use manakov_core::completeness::{partitions, Target};
use manakov_core::defaults::Tolerances;
use manakov_core::flows::IntegratorConfig;
use manakov_core::sectional::{MetricSpec, OperatorKind, SectionalOperator};
use manakov_core::{BlockPartition, Matrix, SkewMatrix, SpectralParams};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Default cap on `n` for sweeps.
pub const SWEEP_MAX_N: usize = 8;

/// Seeds used when neither the config nor `--seeds` lists any.
pub const DEFAULT_SEEDS: std::ops::RangeInclusive<u64> = 1..=20;

/// The config file as written. See `docs/config.md` for the field list.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n: usize,
    /// Block sizes; defaults to `n` blocks of size one.
    #[serde(default)]
    pub partition: Option<Vec<usize>>,
    #[serde(default)]
    pub alphas: Option<Vec<f64>>,
    #[serde(default)]
    pub betas: Option<Vec<f64>>,
    #[serde(default)]
    pub operator: Option<OperatorKind>,
    /// Interior operator on `so(n)_A` (singular kind), rows in the isotropy wedge basis.
    #[serde(default)]
    pub interior_op: Option<Vec<Vec<f64>>>,
    /// Simulate the geodesic flow of a homogeneous metric instead of an operator.
    #[serde(default)]
    pub metric: Option<MetricSpec>,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub initial: Option<InitialCondition>,
    #[serde(default)]
    pub targets: Vec<String>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    /// Number of leading isotropy blocks forming `h` for theorem4.
    #[serde(default)]
    pub l_split: Option<usize>,
    #[serde(default)]
    pub sweep: SweepSpec,
    #[serde(default)]
    pub output: OutputPaths,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    /// Sample uniformly from the momentum space.
    Seed(u64),
    /// Upper-triangle entries `m_01, m_02, ..., m_{n-2,n-1}`.
    Entries(Vec<f64>),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Partitions to visit; all partitions of `n` when absent.
    #[serde(default)]
    pub partitions: Option<Vec<Vec<usize>>>,
    #[serde(default)]
    pub max_n: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputPaths {
    pub trajectory: String,
    pub report: String,
    pub verdict: String,
    pub sweep: String,
}

impl Default for OutputPaths {
    fn default() -> Self {
        OutputPaths {
            trajectory: "trajectory.csv".into(),
            report: "report.json".into(),
            verdict: "verdict.json".into(),
            sweep: "sweep.csv".into(),
        }
    }
}

/// What a trajectory is integrated with.
#[derive(Clone, Debug)]
pub enum Dynamics {
    Operator(SectionalOperator),
    Metric(MetricSpec),
}

/// A config after validation, with command-line overrides applied.
#[derive(Clone, Debug)]
pub struct Setup {
    pub raw: RunConfig,
    pub params: SpectralParams,
    pub operator: OperatorKind,
    pub interior: Option<Matrix>,
    pub dynamics: Dynamics,
    pub targets: Vec<Target>,
    pub tolerances: Tolerances,
    pub seeds: Vec<u64>,
    pub l_split: usize,
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seeds: Option<Vec<u64>>,
    pub tolerances: Vec<(String, f64)>,
}

impl RunConfig {
    /// Parses JSON; errors carry the offending field path and position.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            CliError::Validation(format!("{path}: {inner}"))
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        RunConfig::from_json(&text)
    }

    pub fn validate(self, overrides: &Overrides) -> Result<Setup, CliError> {
        let n = self.n;
        if n < 2 {
            return Err(CliError::field("n", format!("must be at least 2 (got {n})")));
        }
        let partition = match &self.partition {
            Some(parts) => partition_for(n, parts, "partition")?,
            None => BlockPartition::trivial(n),
        };
        let r = partition.blocks();
        let operator = self.operator.unwrap_or(if r == n { OperatorKind::Regular } else { OperatorKind::Singular });

        let params = spectral_params(&self, &partition, operator)?;
        let interior = match &self.interior_op {
            None => None,
            Some(rows) => {
                if operator != OperatorKind::Singular {
                    return Err(CliError::field("interior_op", "only used with operator \"singular\""));
                }
                Some(square(rows, partition.isotropy_dim(), "interior_op")?)
            }
        };
        let dynamics = match &self.metric {
            Some(spec) => {
                let p = spec.partition().map_err(|e| CliError::field("metric", e))?;
                if p.n() != n {
                    return Err(CliError::field("metric", format!("metric is on so({}), config has n = {n}", p.n())));
                }
                spec.cometric().map_err(|e| CliError::field("metric", e))?;
                Dynamics::Metric(spec.clone())
            }
            None => Dynamics::Operator(build_operator(&params, operator, interior.clone())?),
        };

        self.integrator.validate().map_err(|e| CliError::field("integrator", e))?;
        if let Some(InitialCondition::Entries(entries)) = &self.initial {
            SkewMatrix::from_upper(n, entries).map_err(|e| CliError::field("initial.entries", e))?;
        }

        let targets = self
            .targets
            .iter()
            .enumerate()
            .map(|(i, t)| t.parse::<Target>().map_err(|e| CliError::field(&format!("targets[{i}]"), e)))
            .collect::<Result<Vec<_>, _>>()?;

        let mut tolerances = Tolerances::default();
        let pairs = self.tolerances.iter().map(|(k, v)| (k.as_str(), *v, "tolerances"));
        let cli = overrides.tolerances.iter().map(|(k, v)| (k.as_str(), *v, "--tol-override"));
        for (key, value, origin) in pairs.chain(cli) {
            if !tolerances.set(key, value) {
                return Err(CliError::field(&format!("{origin}.{key}"), "unknown tolerance"));
            }
            let ok = if key == "pass_fraction" { value > 0.0 && value <= 1.0 } else { value > 0.0 && value.is_finite() };
            if !ok {
                return Err(CliError::field(&format!("{origin}.{key}"), format!("out of range ({value})")));
            }
        }

        let seeds = overrides.seeds.clone().or_else(|| self.seeds.clone()).unwrap_or_else(|| DEFAULT_SEEDS.collect());
        if seeds.is_empty() {
            return Err(CliError::field("seeds", "at least one seed is required"));
        }

        let l_split = self.l_split.unwrap_or(1);
        if l_split == 0 || l_split > r {
            return Err(CliError::field("l_split", format!("must lie in 1..={r} (got {l_split})")));
        }
        if let Some(max_n) = self.sweep.max_n {
            if max_n < 2 {
                return Err(CliError::field("sweep.max_n", format!("must be at least 2 (got {max_n})")));
            }
        }

        Ok(Setup { raw: self, params, operator, interior, dynamics, targets, tolerances, seeds, l_split })
    }
}

impl Setup {
    /// Partitions visited by `sweep`, after the cap and subset checks.
    pub fn sweep_partitions(&self) -> Result<Vec<BlockPartition>, CliError> {
        let n = self.raw.n;
        let cap = self.raw.sweep.max_n.unwrap_or(SWEEP_MAX_N);
        if n > cap {
            return Err(CliError::field("n", format!("sweep is capped at n = {cap} (got {n}); raise sweep.max_n")));
        }
        let lists = match &self.raw.sweep.partitions {
            Some(list) => list.clone(),
            None => partitions(n),
        };
        if lists.is_empty() {
            return Err(CliError::field("sweep.partitions", "empty partition list"));
        }
        lists
            .iter()
            .enumerate()
            .map(|(i, parts)| partition_for(n, parts, &format!("sweep.partitions[{i}]")))
            .collect()
    }
}

fn partition_for(n: usize, parts: &[usize], field: &str) -> Result<BlockPartition, CliError> {
    let p = BlockPartition::new(parts.to_vec()).map_err(|e| CliError::field(field, e))?;
    if p.n() != n {
        return Err(CliError::field(field, format!("block sizes sum to {}, config has n = {n}", p.n())));
    }
    Ok(p)
}

fn spectral_params(cfg: &RunConfig, partition: &BlockPartition, kind: OperatorKind) -> Result<SpectralParams, CliError> {
    let r = partition.blocks();
    if kind == OperatorKind::RigidBody {
        let betas = cfg.betas.clone().unwrap_or_else(|| (1..=r).map(|p| p as f64).collect());
        let op = SectionalOperator::rigid_body(partition.clone(), betas).map_err(|e| CliError::field("betas", e))?;
        if let Some(alphas) = &cfg.alphas {
            let derived = op.params().alphas();
            if alphas.len() != derived.len() || alphas.iter().zip(derived).any(|(a, d)| (a - d).abs() > 1e-12 * d) {
                return Err(CliError::field("alphas", "rigid body derives alpha = beta^2; omit alphas or make them match"));
            }
        }
        return Ok(op.params().clone());
    }
    let standard = SpectralParams::standard(partition.clone());
    let alphas = cfg.alphas.clone().unwrap_or_else(|| standard.alphas().to_vec());
    let betas = cfg.betas.clone().unwrap_or_else(|| standard.betas().to_vec());
    SpectralParams::new(partition.clone(), alphas, betas).map_err(|e| {
        let field = match &e {
            manakov_core::Error::RepeatedEigenvalue { which: "beta", .. } => "betas",
            _ => "alphas",
        };
        CliError::field(field, e)
    })
}

/// The sectional operator of a validated kind; parameter problems are validation errors.
pub fn build_operator(
    params: &SpectralParams,
    kind: OperatorKind,
    interior: Option<Matrix>,
) -> Result<SectionalOperator, CliError> {
    let result = match kind {
        OperatorKind::Regular => {
            if params.partition().blocks() != params.n() {
                return Err(CliError::field("operator", "regular needs a partition of n blocks of size one; use singular"));
            }
            SectionalOperator::regular(params.clone())
        }
        OperatorKind::Singular => SectionalOperator::singular(params.clone(), interior),
        OperatorKind::RigidBody => SectionalOperator::rigid_body(params.partition().clone(), params.betas().to_vec()),
    };
    result.map_err(|e| CliError::field("operator", e))
}

fn square(rows: &[Vec<f64>], d: usize, field: &str) -> Result<Matrix, CliError> {
    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
        return Err(CliError::field(field, format!("expected a {d}x{d} matrix")));
    }
    Ok(Matrix::from_fn(d, d, |i, j| rows[i][j]))
}

/// `key=value` from `--tol-override`.
pub fn parse_tol_override(s: &str) -> Result<(String, f64), CliError> {
    let (key, value) = s
        .split_once('=')
        .ok_or_else(|| CliError::field("--tol-override", format!("expected key=value, got `{s}`")))?;
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|_| CliError::field(&format!("--tol-override.{}", key.trim()), format!("not a number: `{value}`")))?;
    Ok((key.trim().to_string(), value))
}

/// Comma-separated seeds from `--seeds`.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>, CliError> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse().map_err(|_| CliError::field("--seeds", format!("not a seed: `{t}`"))))
        .collect()
}
