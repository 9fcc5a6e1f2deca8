//! Run configuration and the named field presets it is built from.
//!
//! A config is TOML or JSON. Every field except `grid` has a default, so the
//! smallest valid file is
//!
//! ```toml
//! [grid]
//! dim = 1
//! box_side = 8.0
//! points_per_axis = 256
//! buffer = 2.0
//! omega = { shape = "interval", half_width = 1.0 }
//! ```
//!
//! which describes the torsion problem `A = I`, `f_# = 2`, `g = 1`, `s = 1`.
//! Scalar fields are given as presets:
//!
//! | preset           | keys                                 | value at `x`                              |
//! |------------------|--------------------------------------|-------------------------------------------|
//! | `constant`       | `value`                              | `value`                                   |
//! | `gaussian-bump`  | `amplitude`, `center`, `width`       | `amplitude exp(-|x - center|^2 / 2 width^2)` |
//! | `indicator`      | `value`, `center`, `radius`          | `value` if `|x - center| < radius`        |
//! | `linear`         | `offset`, `slope`                    | `offset + slope . x`                      |
//! | `raw`            | `values`                             | lattice values in row-major order         |
//!
//! Vector fields are lists of scalar presets, one per axis; missing trailing
//! components are zero.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::forms::{threshold_replace, OperatorData, SourceData, Threshold};
use crate::grid::{GridSpec, ScalarField, Shape, VectorField};
use crate::oracle::{PdhgConfig, QpConfig};
use crate::penalty::SolverConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldPreset {
    Constant {
        value: f64,
    },
    GaussianBump {
        amplitude: f64,
        #[serde(default)]
        center: Vec<f64>,
        width: f64,
    },
    Indicator {
        value: f64,
        #[serde(default)]
        center: Vec<f64>,
        radius: f64,
    },
    Linear {
        offset: f64,
        slope: Vec<f64>,
    },
    Raw {
        values: Vec<f64>,
    },
}

impl FieldPreset {
    pub fn constant(value: f64) -> Self {
        FieldPreset::Constant { value }
    }

    /// Evaluate on every lattice node of the box.
    pub fn evaluate(&self, grid: &GridSpec) -> Result<ScalarField> {
        let coord = |v: &[f64], a: usize| v.get(a).copied().unwrap_or(0.0);
        let dim = grid.dim;
        match self {
            FieldPreset::Constant { value } => Ok(ScalarField::constant(grid, *value)),
            FieldPreset::GaussianBump { amplitude, center, width } => {
                if !(*width > 0.0) {
                    return Err(Error::Config(format!("gaussian-bump width must be positive, got {width}")));
                }
                Ok(ScalarField::from_fn(grid, |x| {
                    let r2: f64 = (0..dim).map(|a| (x[a] - coord(center, a)).powi(2)).sum();
                    amplitude * (-r2 / (2.0 * width * width)).exp()
                }))
            }
            FieldPreset::Indicator { value, center, radius } => Ok(ScalarField::from_fn(grid, |x| {
                let r2: f64 = (0..dim).map(|a| (x[a] - coord(center, a)).powi(2)).sum();
                if r2.sqrt() < *radius { *value } else { 0.0 }
            })),
            FieldPreset::Linear { offset, slope } => {
                Ok(ScalarField::from_fn(grid, |x| offset + (0..dim).map(|a| coord(slope, a) * x[a]).sum::<f64>()))
            }
            FieldPreset::Raw { values } => ScalarField::from_values(grid, values.clone()),
        }
    }
}

fn vector_field(grid: &GridSpec, presets: &[FieldPreset], masked: bool) -> Result<VectorField> {
    if presets.is_empty() {
        return Ok(VectorField::zeros(grid));
    }
    if presets.len() > grid.dim {
        return Err(Error::Config(format!("vector field has {} components on a {}-d grid", presets.len(), grid.dim)));
    }
    let mut comps = presets
        .iter()
        .map(|p| p.evaluate(grid).map(|f| if masked { f.masked().values } else { f.values }))
        .collect::<Result<Vec<_>>>()?;
    comps.resize(grid.dim, vec![0.0; grid.len()]);
    VectorField::from_components(grid, comps)
}

/// `A = a(x) I` plus lower-order terms; `b`, `dvec` and `c` are cut to `Omega`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OperatorPreset {
    pub a: FieldPreset,
    /// Ellipticity floor; the minimum of `a` over the box when unset.
    pub a_star: Option<f64>,
    pub b: Vec<FieldPreset>,
    pub dvec: Vec<FieldPreset>,
    pub c: Option<FieldPreset>,
}

impl Default for OperatorPreset {
    fn default() -> Self {
        OperatorPreset { a: FieldPreset::constant(1.0), a_star: None, b: Vec::new(), dvec: Vec::new(), c: None }
    }
}

impl OperatorPreset {
    pub fn build(&self, grid: &GridSpec) -> Result<OperatorData> {
        let a = self.a.evaluate(grid)?;
        let floor = a.values.iter().cloned().fold(f64::INFINITY, f64::min).max(0.0);
        let a_star = self.a_star.unwrap_or(floor);
        let op = OperatorData::from_scalar_a(&a, a_star)?;
        let c = match &self.c {
            Some(p) => p.evaluate(grid)?.masked(),
            None => ScalarField::zeros(grid),
        };
        op.with_lower_order(vector_field(grid, &self.b, true)?, vector_field(grid, &self.dvec, true)?, c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourcePreset {
    /// Cut to `Omega`.
    pub f_sharp: FieldPreset,
    /// Lives on the whole box.
    pub f_vec: Vec<FieldPreset>,
}

impl Default for SourcePreset {
    fn default() -> Self {
        SourcePreset { f_sharp: FieldPreset::constant(2.0), f_vec: Vec::new() }
    }
}

impl SourcePreset {
    pub fn build(&self, grid: &GridSpec) -> Result<SourceData> {
        SourceData::new(self.f_sharp.evaluate(grid)?.masked(), vector_field(grid, &self.f_vec, false)?)
    }

    /// `self + delta`, componentwise on the evaluated fields.
    pub fn build_perturbed(&self, grid: &GridSpec, delta: &SourcePreset) -> Result<SourceData> {
        let base = self.build(grid)?;
        let pert = delta.build(grid)?;
        SourceData::new(base.f_sharp.axpy(1.0, &pert.f_sharp)?, base.f_vec.axpy(1.0, &pert.f_vec)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdPreset {
    pub g: FieldPreset,
    /// Keep `g` on `Omega_R` and use this constant outside.
    pub replace_outside: Option<f64>,
    /// Constant shifts `eta_nu`; member `nu` of the family is `g + eta_nu`.
    pub perturbation: Vec<f64>,
}

impl Default for ThresholdPreset {
    fn default() -> Self {
        ThresholdPreset { g: FieldPreset::constant(1.0), replace_outside: None, perturbation: vec![0.05] }
    }
}

impl ThresholdPreset {
    pub fn build(&self, grid: &GridSpec) -> Result<Threshold> {
        self.build_shifted(grid, 0.0)
    }

    pub fn build_shifted(&self, grid: &GridSpec, shift: f64) -> Result<Threshold> {
        let g = self.g.evaluate(grid)?;
        let g = ScalarField { grid: *grid, values: g.values.iter().map(|v| v + shift).collect() };
        match self.replace_outside {
            Some(k) => threshold_replace(&g, Some(k + shift)),
            None => Threshold::new(g),
        }
    }
}

/// Pairs for the continuous-dependence study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DependenceConfig {
    /// Source perturbations added to the base source.
    pub source_perturbations: Vec<SourcePreset>,
    /// Bump ensemble size for the empirical constants.
    pub ensemble: usize,
}

impl Default for DependenceConfig {
    fn default() -> Self {
        let zero_vec = Vec::new();
        DependenceConfig {
            source_perturbations: vec![
                SourcePreset { f_sharp: FieldPreset::constant(0.1), f_vec: zero_vec.clone() },
                SourcePreset {
                    f_sharp: FieldPreset::GaussianBump { amplitude: 0.5, center: vec![0.3], width: 0.2 },
                    f_vec: zero_vec,
                },
                SourcePreset {
                    f_sharp: FieldPreset::constant(0.0),
                    f_vec: vec![FieldPreset::GaussianBump { amplitude: 0.2, center: vec![-0.2], width: 0.3 }],
                },
            ],
            ensemble: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LocalizeConfig {
    /// Order of the surrogate `||D^sigma (u_s - u_1)||_{L^2}`.
    pub sigma: f64,
}

impl Default for LocalizeConfig {
    fn default() -> Self {
        LocalizeConfig { sigma: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct OracleRunConfig {
    pub pdhg: PdhgConfig,
    pub qp: QpConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    /// Checks to run; all of them when unset.
    pub checks: Option<Vec<String>>,
    /// Test hook: shifts the order of the divergence used by the adjointness check.
    pub fault_divergence_shift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub grid: GridSpec,
    #[serde(default)]
    pub s: Option<f64>,
    #[serde(default)]
    pub s_list: Vec<f64>,
    #[serde(default)]
    pub operator: OperatorPreset,
    #[serde(default)]
    pub source: SourcePreset,
    #[serde(default)]
    pub threshold: ThresholdPreset,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub dependence: DependenceConfig,
    #[serde(default)]
    pub localize: LocalizeConfig,
    #[serde(default)]
    pub oracle: OracleRunConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    /// Run directory relative to the output root.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

fn default_name() -> String {
    "run".into()
}

impl RunConfig {
    /// Torsion data on `Omega = (-1, 1)`: `A = I`, `f_# = 2`, `g = 1`, `s = 1`.
    pub fn torsion_1d(n: usize) -> Result<Self> {
        Ok(RunConfig {
            name: "torsion".into(),
            grid: GridSpec::interval(1.0, 8.0, n, 2.0)?,
            s: Some(1.0),
            s_list: Vec::new(),
            operator: OperatorPreset::default(),
            source: SourcePreset::default(),
            threshold: ThresholdPreset::default(),
            solver: SolverConfig::default(),
            dependence: DependenceConfig::default(),
            localize: LocalizeConfig::default(),
            oracle: OracleRunConfig::default(),
            verify: VerifyConfig::default(),
            output_dir: None,
            seed: 0,
        })
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Plain config, or the `config` entry of a run manifest.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let inner = match value.get("config") {
            Some(c) if value.get("command").is_some() => c.clone(),
            _ => value,
        };
        Ok(serde_json::from_value(inner)?)
    }

    /// Read by extension: `.json` as JSON, anything else as TOML.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg = if path.extension().is_some_and(|e| e == "json") { Self::from_json(&text)? } else { Self::from_toml(&text)? };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Overrides the config seed and the solver seed together.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.solver.seed = seed;
        self
    }

    /// The single order `s`: `s`, else the last entry of `s_list`, else 1.
    pub fn order(&self) -> f64 {
        self.s.or_else(|| self.s_list.last().copied()).unwrap_or(1.0)
    }

    /// Everything a run needs, checked before any solve.
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        let mut orders: Vec<f64> = self.s_list.clone();
        orders.push(self.order());
        for &s in &orders {
            if !(s > 0.0 && s <= 1.0) {
                return Err(Error::InvalidOrder(s));
            }
            self.solver.validate(self.grid.dim, s)?;
        }
        if !(self.localize.sigma > 0.0 && self.localize.sigma < 1.0) {
            return Err(Error::Config(format!("localize.sigma must lie in (0, 1), got {}", self.localize.sigma)));
        }
        if let Some(&lo) = self.s_list.iter().min_by(|a, b| a.total_cmp(b)) {
            if self.localize.sigma >= lo {
                return Err(Error::Config("localize.sigma must be below every s in s_list".into()));
            }
        }
        self.operator.build(&self.grid)?;
        self.source.build(&self.grid)?;
        self.threshold.build(&self.grid)?;
        for &eta in &self.threshold.perturbation {
            self.threshold.build_shifted(&self.grid, eta)?;
        }
        for p in &self.dependence.source_perturbations {
            p.build(&self.grid)?;
        }
        Ok(())
    }

    /// Grid dimension check for presets written for one dimension.
    pub fn is_interval(&self) -> bool {
        matches!(self.grid.omega, Shape::Interval { .. })
    }
}
