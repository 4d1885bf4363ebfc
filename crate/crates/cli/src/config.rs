//! TOML run configuration. Sections mirror the library modules; every key is
//! checked, so a misspelt key is an error rather than a silent default.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use triplex::bounds::{BoundId, BoundInputs, ConstantTrace, OrliczLog, ParamGrid};
use triplex::linproc::LagPolynomial;
use triplex::montecarlo::Statistic;
use triplex::orlicz::estimate_orlicz_norm;
use triplex::processes::{generate, mixingale_profile_with_order, ProcessSpec};
use triplex::{MixingaleProfile, SubWeibullSpec};

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub process: ProcessSection,
    pub filter: Option<FilterSection>,
    #[serde(default)]
    pub bounds: BoundsSection,
    #[serde(default)]
    pub montecarlo: MonteCarloSection,
    #[serde(default)]
    pub verify: VerifySection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub seed: u64,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    Iid,
    Ar1,
    Arch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProcessSection {
    pub family: FamilyName,
    pub n: usize,
    pub t_len: usize,
    pub alpha: f64,
    pub phi: f64,
    pub a0: f64,
    pub a1: f64,
}

impl Default for ProcessSection {
    fn default() -> Self {
        Self { family: FamilyName::Iid, n: 10, t_len: 200, alpha: 2.0, phi: 0.5, a0: 0.9, a1: 0.1 }
    }
}

/// `Y_t = Σ_j w_j X_{t−j}` with scalar weights, or a full lag polynomial file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterSection {
    pub weights: Option<Vec<f64>>,
    pub file: Option<PathBuf>,
}

/// Log-spaced grid when `log` is set, otherwise uniform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    #[serde(default = "yes")]
    pub log: bool,
}

fn yes() -> bool {
    true
}

impl Range {
    fn expand(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        (0..self.points)
            .map(|i| {
                let f = i as f64 / (self.points - 1) as f64;
                if self.log {
                    (self.min.ln() + f * (self.max.ln() - self.min.ln())).exp()
                } else {
                    self.min + f * (self.max - self.min)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub max_m: usize,
    pub big_m_min: f64,
    pub big_m_max: f64,
    pub big_m_points: usize,
    pub a_points: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { max_m: 5, big_m_min: 1e-2, big_m_max: 1e3, big_m_points: 120, a_points: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceName {
    #[default]
    Rederived,
    AsPrinted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogName {
    #[default]
    Printed,
    Direct,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundsSection {
    pub ids: Vec<String>,
    pub x: Vec<f64>,
    pub x_range: Option<Range>,
    /// Autocovariance lag for the `autocov` bound.
    pub h: usize,
    pub c_psi: Option<f64>,
    pub c_psi_half: Option<f64>,
    pub p: Option<f64>,
    pub gamma: Option<f64>,
    pub c_rho: Option<f64>,
    pub c_bar: Option<f64>,
    pub m: Option<usize>,
    pub big_m: Option<f64>,
    pub a: Option<f64>,
    pub tau: Option<f64>,
    pub beta: Option<f64>,
    pub trace: TraceName,
    pub orlicz_log: LogName,
    /// Minimize over `(m, M, a)` when present.
    pub optimize: Option<GridSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticName {
    #[default]
    SupNormSum,
    DeltaAutocov,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonteCarloSection {
    pub statistic: StatisticName,
    pub h: usize,
    pub replicates: usize,
    pub x: Vec<f64>,
    pub x_range: Option<Range>,
    /// Wilson multiplier of the domination check.
    pub z: f64,
    /// Matrix CSV with the Δ target, needed for dependent innovations.
    pub sigma_bar_file: Option<PathBuf>,
}

impl Default for MonteCarloSection {
    fn default() -> Self {
        Self {
            statistic: StatisticName::SupNormSum,
            h: 0,
            replicates: 1000,
            x: Vec::new(),
            x_range: None,
            z: 3.0,
            sigma_bar_file: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    pub polynomials: usize,
    pub max_dim: usize,
    pub max_lag: usize,
    pub lags: Vec<usize>,
    pub z: Vec<f64>,
    pub path_len: usize,
    pub telescoping_m: Vec<usize>,
    pub commutation_max: usize,
    pub tol_bn: f64,
    pub tol_path: f64,
    pub tol_telescoping: f64,
    pub tol_vec: f64,
    pub fixtures: Vec<PolynomialFixture>,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            polynomials: 100,
            max_dim: 4,
            max_lag: 4,
            lags: vec![0, 1, 2],
            z: vec![-1.0, -0.5, 0.0, 0.5, 1.0],
            path_len: 200,
            telescoping_m: vec![1, 3, 5],
            commutation_max: 8,
            tol_bn: 1e-12,
            tol_path: 1e-9,
            tol_telescoping: 1e-10,
            tol_vec: 1e-10,
            fixtures: Vec::new(),
        }
    }
}

/// A lag polynomial given as row-major matrices, optionally with a claimed
/// decomposition `C(1)`, `C̃_j` to check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialFixture {
    pub name: String,
    pub coeffs: Vec<Vec<Vec<f64>>>,
    pub c_one: Option<Vec<Vec<f64>>>,
    pub tilde: Option<Vec<Vec<Vec<f64>>>>,
}

pub fn matrix(rows: &[Vec<f64>]) -> Result<Array2<f64>, CliError> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Config("fixture matrices must be square".into()));
    }
    Ok(Array2::from_shape_fn((n, n), |(i, j)| rows[i][j]))
}

impl PolynomialFixture {
    pub fn polynomial(&self) -> Result<LagPolynomial<f64>, CliError> {
        let coeffs = self.coeffs.iter().map(|m| matrix(m)).collect::<Result<Vec<_>, _>>()?;
        LagPolynomial::new(coeffs).map_err(|e| CliError::Config(format!("fixture `{}`: {e}", self.name)))
    }
}

/// Reads a config, or the config embedded in a run manifest.
pub fn load(path: &Path) -> Result<Config, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn parse(text: &str) -> Result<Config, String> {
    let table: toml::Table = toml::from_str(text).map_err(|e| e.to_string())?;
    if table.contains_key("tool_version") {
        let inner = table.get("config").cloned().ok_or("manifest has no [config] table")?;
        return inner.try_into().map_err(|e: toml::de::Error| e.to_string());
    }
    toml::from_str(text).map_err(|e| e.to_string())
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

impl Config {
    /// Relative paths inside the config resolve against its directory.
    /// Stored absolute, so a manifest can be rerun from anywhere.
    pub fn rebase(&mut self, dir: &Path) {
        let fix = |f: &mut PathBuf| {
            if f.is_relative() {
                let joined = dir.join(&*f);
                *f = std::path::absolute(&joined).unwrap_or(joined);
            }
        };
        if let Some(f) = self.filter.as_mut().and_then(|f| f.file.as_mut()) {
            fix(f);
        }
        if let Some(f) = self.montecarlo.sigma_bar_file.as_mut() {
            fix(f);
        }
    }

    pub fn process_spec(&self) -> Result<ProcessSpec<f64>, CliError> {
        let p = &self.process;
        let spec = match p.family {
            FamilyName::Iid => ProcessSpec::iid(p.n, p.alpha),
            FamilyName::Ar1 => ProcessSpec::ar1(p.n, p.phi),
            FamilyName::Arch => ProcessSpec::arch(p.n, p.alpha, p.a0, p.a1),
        };
        spec.validate().map_err(config_err)?;
        if p.t_len == 0 {
            return Err(CliError::Config("process.t_len must be positive".into()));
        }
        Ok(spec)
    }

    pub fn filter(&self) -> Result<Option<LagPolynomial<f64>>, CliError> {
        let Some(f) = &self.filter else { return Ok(None) };
        let n = self.process.n;
        let poly = match (&f.weights, &f.file) {
            (Some(w), None) => {
                if w.is_empty() {
                    return Err(CliError::Config("filter.weights must not be empty".into()));
                }
                LagPolynomial::new(w.iter().map(|c| Array2::eye(n) * *c).collect()).map_err(config_err)?
            }
            (None, Some(path)) => {
                let file = fs::File::open(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                LagPolynomial::read_text(std::io::BufReader::new(file)).map_err(config_err)?
            }
            (None, None) => return Ok(None),
            (Some(_), Some(_)) => return Err(CliError::Config("filter takes either `weights` or `file`, not both".into())),
        };
        if poly.dim() != n {
            return Err(CliError::Config(format!("filter dimension {} differs from process.n = {n}", poly.dim())));
        }
        Ok(Some(poly))
    }

    pub fn bound_ids(&self) -> Result<Vec<BoundId>, CliError> {
        self.bounds
            .ids
            .iter()
            .map(|s| BoundId::parse(s).ok_or_else(|| CliError::Config(format!("unknown bound id `{s}`"))))
            .collect()
    }

    pub fn bound_x_grid(&self) -> Result<Vec<f64>, CliError> {
        grid(&self.bounds.x, &self.bounds.x_range, "bounds")
    }

    pub fn experiment_x_grid(&self) -> Result<Vec<f64>, CliError> {
        grid(&self.montecarlo.x, &self.montecarlo.x_range, "montecarlo")
    }

    pub fn statistic(&self) -> Statistic {
        match self.montecarlo.statistic {
            StatisticName::SupNormSum => Statistic::SupNormSum,
            StatisticName::DeltaAutocov => Statistic::DeltaAutocov,
        }
    }

    /// `‖X‖_ψα` from the config, the closed form, or a long simulated path.
    pub fn c_psi(&self, spec: &ProcessSpec<f64>) -> Result<f64, CliError> {
        if let Some(c) = self.bounds.c_psi {
            return Ok(c);
        }
        if let Some(c) = spec.marginal_orlicz_norm() {
            return Ok(c);
        }
        let len = 100_000usize.div_ceil(spec.n).max(1000);
        let path = generate(spec, len, self.run.seed ^ 0x5eed).map_err(config_err)?;
        let flat: Vec<f64> = path.data.iter().copied().collect();
        Ok(estimate_orlicz_norm(&flat, spec.alpha).map_err(config_err)?.value)
    }

    /// Mixingale profile of the process at order `p`, with config overrides.
    ///
    /// The autocovariance bound consumes `L_1` products, so it defaults to
    /// `p = 1` and `c̄` equal to the marginal variance.
    pub fn mixingale(&self, spec: &ProcessSpec<f64>, for_autocov: bool) -> Result<MixingaleProfile<f64>, CliError> {
        let b = &self.bounds;
        let p = b.p.unwrap_or(if for_autocov { 1.0 } else { 2.0 });
        let mut mix = mixingale_profile_with_order(spec, p).map_err(config_err)?;
        if for_autocov {
            mix.c_bar = spec.marginal_variance();
        }
        let gamma = b.gamma.unwrap_or(mix.gamma);
        let c_rho = b.c_rho.unwrap_or(mix.c_rho);
        let c_bar = b.c_bar.unwrap_or(mix.c_bar);
        if gamma.is_infinite() {
            return Ok(MixingaleProfile::martingale_difference(p, c_bar));
        }
        MixingaleProfile::new(p, gamma, c_rho, c_bar).map_err(config_err)
    }

    pub fn bound_inputs(&self, spec: &ProcessSpec<f64>, for_autocov: bool) -> Result<BoundInputs<f64>, CliError> {
        let b = &self.bounds;
        let alpha = spec.alpha;
        let sw = SubWeibullSpec::new(alpha, self.c_psi(spec)?).map_err(config_err)?;
        let mut inp = BoundInputs::new(spec.n, self.process.t_len, 1.0, sw, self.mixingale(spec, for_autocov)?);
        if let Some(m) = b.m {
            inp.m = m;
        }
        if let Some(v) = b.big_m {
            inp.big_m = v;
        }
        if let Some(v) = b.a {
            inp.a = v;
        }
        if let Some(v) = b.tau {
            inp.tau = v;
        }
        if let Some(v) = b.beta {
            inp.beta = v;
        }
        inp.c_psi_half = b.c_psi_half;
        inp.trace = match b.trace {
            TraceName::Rederived => ConstantTrace::Rederived,
            TraceName::AsPrinted => ConstantTrace::AsPrinted,
        };
        inp.orlicz_log = match b.orlicz_log {
            LogName::Printed => OrliczLog::Printed,
            LogName::Direct => OrliczLog::Direct,
        };
        Ok(inp)
    }

    pub fn param_grid(&self) -> Option<ParamGrid<f64>> {
        self.bounds
            .optimize
            .as_ref()
            .map(|g| ParamGrid::standard(g.max_m, g.big_m_min, g.big_m_max, g.big_m_points, g.a_points))
    }
}

fn grid(list: &[f64], range: &Option<Range>, section: &str) -> Result<Vec<f64>, CliError> {
    let xs = match (list.is_empty(), range) {
        (_, None) => list.to_vec(),
        (true, Some(r)) => {
            if r.points == 0 || !(r.min > 0.0) || !(r.max >= r.min) {
                return Err(CliError::Config(format!("{section}.x_range needs 0 < min <= max and points >= 1")));
            }
            r.expand()
        }
        (false, Some(_)) => return Err(CliError::Config(format!("{section} takes either `x` or `x_range`, not both"))),
    };
    if xs.windows(2).any(|w| !(w[0] < w[1])) || xs.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
        return Err(CliError::Config(format!("{section} x grid must be positive and strictly increasing")));
    }
    Ok(xs)
}
