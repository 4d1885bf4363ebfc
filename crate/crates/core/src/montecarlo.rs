//! Replicated tail-frequency estimation, comparison against the closed-form
//! bounds, and the growth-rate experiment.
//!
//! Replicate `r` is simulated from seed `base_seed ^ r`; replicates run on a
//! dedicated rayon pool and are reduced in index order, so results do not
//! depend on the number of worker threads.

use std::io::Write;

use ndarray::Array2;
use rayon::prelude::*;

use crate::autocov::{delta_statistic, expected_autocov, population_autocov};
use crate::bounds::{evaluate, optimize_free_params, BoundId, BoundInputs, ParamGrid};
use crate::error::{domain, Error, Result};
use crate::linproc::{apply_filter, LagPolynomial, PolynomialConstants};
use crate::processes::{generate, Family, ProcessSpec};
use crate::scalar::Real;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    /// `|Σ_t Y_t|_∞`, compared with `T x`.
    SupNormSum,
    /// `Δ_T(h)`, compared with `x`.
    DeltaAutocov,
}

/// How bounds are evaluated along the x grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundSetup<T> {
    /// Template inputs; `x` is overwritten at each grid point.
    pub inputs: BoundInputs<T>,
    pub consts: Option<PolynomialConstants<T>>,
    /// Free-parameter grid for bounds that have one; `None` evaluates at the
    /// template's own `(m, M, a)`.
    pub grid: Option<ParamGrid<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig<T> {
    pub process: ProcessSpec<T>,
    pub poly: Option<LagPolynomial<T>>,
    pub statistic: Statistic,
    pub h: usize,
    /// Length of the (filtered) sample.
    pub t_len: usize,
    pub x_grid: Vec<T>,
    pub replicates: usize,
    pub base_seed: u64,
    pub bounds: Vec<BoundId>,
    pub setup: Option<BoundSetup<T>>,
    /// `Σ_T(h)` for [`Statistic::DeltaAutocov`]; derived from the filter when
    /// the innovations are i.i.d. and this is `None`.
    pub sigma_bar: Option<Array2<T>>,
    /// Worker threads; `None` uses the global rayon pool size.
    pub threads: Option<usize>,
}

impl<T: Real> ExperimentConfig<T> {
    pub fn new(process: ProcessSpec<T>, t_len: usize, x_grid: Vec<T>, replicates: usize, base_seed: u64) -> Self {
        Self {
            process,
            poly: None,
            statistic: Statistic::SupNormSum,
            h: 0,
            t_len,
            x_grid,
            replicates,
            base_seed,
            bounds: Vec::new(),
            setup: None,
            sigma_bar: None,
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.process.validate()?;
        if self.replicates < 100 {
            return Err(Error::InvalidSpec(format!("need at least 100 replicates, got {}", self.replicates)));
        }
        if self.t_len == 0 {
            return Err(Error::InvalidSpec("T must be at least 1".into()));
        }
        if self.x_grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidSpec("x grid must be strictly increasing".into()));
        }
        if self.x_grid.iter().any(|x| !(*x >= T::zero()) || !x.is_finite()) {
            return Err(Error::InvalidSpec("x grid must be finite and nonnegative".into()));
        }
        if let Some(p) = &self.poly {
            if p.dim() != self.process.n {
                return Err(Error::Shape(format!("filter dimension {} vs process dimension {}", p.dim(), self.process.n)));
            }
        }
        if self.statistic == Statistic::DeltaAutocov && self.h >= self.t_len {
            return Err(Error::InvalidSpec("lag h must be below T".into()));
        }
        if !self.bounds.is_empty() && self.setup.is_none() {
            return Err(Error::InvalidSpec("bounds requested without bound inputs".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidSpec("threads must be at least 1".into()));
        }
        Ok(())
    }

    fn resolve_sigma_bar(&self) -> Result<Option<Array2<T>>> {
        if self.statistic != Statistic::DeltaAutocov {
            return Ok(None);
        }
        if let Some(s) = &self.sigma_bar {
            return Ok(Some(s.clone()));
        }
        if self.process.family != Family::IidSubWeibull {
            return Err(Error::Unsupported(
                "Δ target for dependent innovations must be supplied (see autocov::long_run_autocov)".into(),
            ));
        }
        let n = self.process.n;
        let poly = self.poly.clone().unwrap_or_else(|| LagPolynomial::identity(n));
        let gamma = population_autocov(&poly, &Array2::eye(n), self.h)?;
        Ok(Some(expected_autocov(&gamma, self.t_len, self.h)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailCurve<T> {
    pub statistic: Statistic,
    pub t_len: usize,
    pub x: Vec<T>,
    pub freq: Vec<T>,
    pub exceed: Vec<usize>,
    pub replicates: usize,
    pub wilson_lo: Vec<T>,
    pub wilson_hi: Vec<T>,
    pub bounds: Vec<(BoundId, Vec<T>)>,
    /// Per-replicate statistic, in replicate order.
    pub statistics: Vec<T>,
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson<T: Real>(k: usize, n: usize, z: T) -> (T, T) {
    if n == 0 {
        return (T::zero(), T::one());
    }
    let nf = T::of_usize(n);
    let p = T::of_usize(k) / nf;
    let z2 = z * z;
    let denom = T::one() + z2 / nf;
    let centre = (p + z2 / (T::lit(2.0) * nf)) / denom;
    let half = z / denom * (p * (T::one() - p) / nf + z2 / (T::lit(4.0) * nf * nf)).sqrt();
    let lo = if k == 0 { T::zero() } else { (centre - half).max(T::zero()) };
    let hi = if k == n { T::one() } else { (centre + half).min(T::one()) };
    (lo, hi)
}

fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(k) = threads {
        b = b.num_threads(k);
    }
    b.build().map_err(|e| Error::Unsupported(format!("thread pool: {e}")))
}

/// One replicate of the configured statistic.
fn replicate_statistic<T: Real>(
    process: &ProcessSpec<T>,
    poly: Option<&LagPolynomial<T>>,
    statistic: Statistic,
    h: usize,
    t_len: usize,
    sigma_bar: Option<&Array2<T>>,
    seed: u64,
) -> Result<T> {
    let j = poly.map_or(0, |p| p.max_lag());
    let x = generate(process, t_len + j, seed)?;
    let y = match poly {
        Some(p) => apply_filter(p, &x)?,
        None => x,
    };
    match statistic {
        Statistic::SupNormSum => Ok(y.column_sums().iter().fold(T::zero(), |a, v| a.max(v.abs()))),
        Statistic::DeltaAutocov => delta_statistic(&y, h, sigma_bar.expect("resolved target")),
    }
}

fn simulate_statistics<T: Real>(cfg: &ExperimentConfig<T>, sigma_bar: Option<&Array2<T>>) -> Result<Vec<T>> {
    let results: Vec<Result<T>> = pool(cfg.threads)?.install(|| {
        (0..cfg.replicates)
            .into_par_iter()
            .map(|r| {
                replicate_statistic(
                    &cfg.process,
                    cfg.poly.as_ref(),
                    cfg.statistic,
                    cfg.h,
                    cfg.t_len,
                    sigma_bar,
                    cfg.base_seed ^ r as u64,
                )
            })
            .collect()
    });
    results.into_iter().collect()
}

/// Evaluates one bound along the x grid; `x = 0` maps to the trivial value 1.
pub fn bound_curve<T: Real>(id: BoundId, setup: &BoundSetup<T>, h: usize, xs: &[T]) -> Result<Vec<T>> {
    xs.iter()
        .map(|&x| {
            if x == T::zero() {
                return Ok(T::one());
            }
            let inp = setup.inputs.with_x(x);
            let r = match &setup.grid {
                Some(g) => optimize_free_params(id, &inp, setup.consts.as_ref(), h, g)?,
                None => evaluate(id, &inp, setup.consts.as_ref(), h)?,
            };
            Ok(r.value)
        })
        .collect()
}

/// Empirical tail curve `x ↦ #{r : S_r > threshold(x)}/R` with 95% Wilson
/// intervals and the requested bounds.
pub fn estimate_tail<T: Real>(cfg: &ExperimentConfig<T>) -> Result<TailCurve<T>> {
    cfg.validate()?;
    let sigma_bar = cfg.resolve_sigma_bar()?;
    let stats = simulate_statistics(cfg, sigma_bar.as_ref())?;
    let scale = match cfg.statistic {
        Statistic::SupNormSum => T::of_usize(cfg.t_len),
        Statistic::DeltaAutocov => T::one(),
    };
    let mut exceed = Vec::with_capacity(cfg.x_grid.len());
    let mut freq = Vec::with_capacity(cfg.x_grid.len());
    let mut lo = Vec::with_capacity(cfg.x_grid.len());
    let mut hi = Vec::with_capacity(cfg.x_grid.len());
    for &x in &cfg.x_grid {
        let k = stats.iter().filter(|&&s| s > scale * x).count();
        let (l, u) = wilson(k, cfg.replicates, T::lit(Z95));
        exceed.push(k);
        freq.push(T::of_usize(k) / T::of_usize(cfg.replicates));
        lo.push(l);
        hi.push(u);
    }
    let mut bounds = Vec::with_capacity(cfg.bounds.len());
    if let Some(setup) = &cfg.setup {
        for &id in &cfg.bounds {
            bounds.push((id, bound_curve(id, setup, cfg.h, &cfg.x_grid)?));
        }
    }
    Ok(TailCurve {
        statistic: cfg.statistic,
        t_len: cfg.t_len,
        x: cfg.x_grid.clone(),
        freq,
        exceed,
        replicates: cfg.replicates,
        wilson_lo: lo,
        wilson_hi: hi,
        bounds,
        statistics: stats,
    })
}

impl<T: Real> TailCurve<T> {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut header = String::from("x,freq,wilson_lo,wilson_hi");
        for (id, _) in &self.bounds {
            header.push_str(&format!(",bound_{id}"));
        }
        writeln!(w, "{header}")?;
        let f = |v: T| format!("{:.16e}", v.as_f64());
        for i in 0..self.x.len() {
            let mut line = format!("{},{},{},{}", f(self.x[i]), f(self.freq[i]), f(self.wilson_lo[i]), f(self.wilson_hi[i]));
            for (_, vals) in &self.bounds {
                line.push(',');
                line.push_str(&f(vals[i]));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// Bound values below this are compared; larger ones are uninformative.
pub const INFORMATIVE_BELOW: f64 = 0.9;

#[derive(Debug, Clone, PartialEq)]
pub struct DominationRow<T> {
    pub bound: BoundId,
    pub x: T,
    pub freq: T,
    pub upper: T,
    pub bound_value: T,
    pub pass: bool,
    /// False when no replicate exceeded the threshold and the bound lies
    /// below the zero-count upper limit `z²/(R + z²)`: the replicate count
    /// cannot distinguish the bound from zero there.
    pub resolved: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominationReport<T> {
    /// Only the informative points.
    pub rows: Vec<DominationRow<T>>,
    /// Every informative point passes.
    pub pass: bool,
    /// Every resolved informative point passes.
    pub pass_resolved: bool,
    pub unresolved: usize,
}

impl<T: Real> DominationReport<T> {
    pub fn failures(&self) -> impl Iterator<Item = &DominationRow<T>> {
        self.rows.iter().filter(|r| !r.pass)
    }

    /// Failures with at least one observed exceedance.
    pub fn resolved_failures(&self) -> impl Iterator<Item = &DominationRow<T>> {
        self.rows.iter().filter(|r| !r.pass && r.resolved)
    }
}

/// Upper Wilson limit at `z` against each bound wherever the bound is below 0.9.
pub fn domination_report<T: Real>(curve: &TailCurve<T>, z: T) -> DominationReport<T> {
    let mut rows = Vec::new();
    for (id, vals) in &curve.bounds {
        for (i, &value) in vals.iter().enumerate() {
            if !(value < T::lit(INFORMATIVE_BELOW)) {
                continue;
            }
            let (_, upper) = wilson(curve.exceed[i], curve.replicates, z);
            let pass = upper <= value;
            rows.push(DominationRow {
                bound: *id,
                x: curve.x[i],
                freq: curve.freq[i],
                upper,
                bound_value: value,
                pass,
                resolved: pass || curve.exceed[i] > 0,
            });
        }
    }
    let pass = rows.iter().all(|r| r.pass);
    let pass_resolved = rows.iter().all(|r| r.pass || !r.resolved);
    let unresolved = rows.iter().filter(|r| !r.resolved).count();
    DominationReport { rows, pass, pass_resolved, unresolved }
}

/// Nearest-rank empirical quantile.
pub fn empirical_quantile<T: Real>(values: &[T], q: f64) -> Result<T> {
    if values.is_empty() || !(0.0..=1.0).contains(&q) {
        return Err(domain("quantile needs data and q in [0, 1]"));
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite statistic"));
    let rank = ((q * v.len() as f64).ceil() as usize).clamp(1, v.len());
    Ok(v[rank - 1])
}

/// Normalization of the rate statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RateScaling {
    /// `log(n)^{1/2+1/α+1/γ} |Σ Y_t|_∞ / √T`.
    #[default]
    AsPrinted,
    /// `|Σ Y_t|_∞ / (√T log(n)^{1/2+1/α+1/γ})`, the self-normalized reading.
    Inverse,
}

#[derive(Debug, Clone)]
pub struct RateConfig<T> {
    /// Innovation family; its `n` is replaced per row.
    pub process: ProcessSpec<T>,
    pub poly_for_n: Option<fn(usize) -> LagPolynomial<T>>,
    pub alpha: T,
    /// `∞` for martingale differences.
    pub gamma: T,
    pub t_grid: Vec<usize>,
    pub c: T,
    pub n_cap: usize,
    pub replicates: usize,
    pub base_seed: u64,
    pub quantile: f64,
    pub scaling: RateScaling,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateRow<T> {
    pub t_len: usize,
    pub n: usize,
    pub quantile: T,
}

/// `αγ/(2γ + αγ + 2α)`: `log n = o(T^{rate})`; `α/(2 + α)` when `γ = ∞`.
pub fn rate_exponent<T: Real>(alpha: T, gamma: T) -> T {
    if gamma.is_infinite() {
        return alpha / (T::lit(2.0) + alpha);
    }
    alpha * gamma / (T::lit(2.0) * gamma + alpha * gamma + T::lit(2.0) * alpha)
}

/// `n = ⌈exp(c T^{rate})⌉`.
pub fn rate_dimension<T: Real>(alpha: T, gamma: T, t_len: usize, c: T, cap: usize) -> Result<usize> {
    let n = (c * T::of_usize(t_len).powf(rate_exponent(alpha, gamma))).exp().ceil();
    let n = n.to_usize().unwrap_or(usize::MAX).max(1);
    if n > cap {
        return Err(Error::DimensionCap {
            n,
            cap,
            hint: "lower c or the largest T".into(),
        });
    }
    Ok(n)
}

/// Per-T quantile of the scaled sup-norm statistic with `n` grown by the rate rule.
pub fn rate_experiment<T: Real>(cfg: &RateConfig<T>) -> Result<Vec<RateRow<T>>> {
    if cfg.t_grid.windows(2).any(|w| w[0] >= w[1]) || cfg.t_grid.is_empty() {
        return Err(Error::InvalidSpec("T grid must be nonempty and increasing".into()));
    }
    let power = T::lit(0.5) + cfg.alpha.recip() + cfg.gamma.recip();
    let mut rows = Vec::with_capacity(cfg.t_grid.len());
    for (ti, &t_len) in cfg.t_grid.iter().enumerate() {
        let n = rate_dimension(cfg.alpha, cfg.gamma, t_len, cfg.c, cfg.n_cap)?;
        let mut process = cfg.process;
        process.n = n;
        let mut exp = ExperimentConfig::new(
            process,
            t_len,
            Vec::new(),
            cfg.replicates,
            cfg.base_seed.wrapping_add((ti as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
        );
        exp.poly = cfg.poly_for_n.map(|f| f(n));
        exp.threads = cfg.threads;
        let curve = estimate_tail(&exp)?;
        let log_factor = T::of_usize(n).ln().powf(power);
        let sqrt_t = T::of_usize(t_len).sqrt();
        let scaled: Vec<T> = curve
            .statistics
            .iter()
            .map(|&s| match cfg.scaling {
                RateScaling::AsPrinted => log_factor * s / sqrt_t,
                RateScaling::Inverse => s / (sqrt_t * log_factor),
            })
            .collect();
        rows.push(RateRow { t_len, n, quantile: empirical_quantile(&scaled, cfg.quantile)? });
    }
    Ok(rows)
}

/// `max/min − 1` over the row quantiles.
pub fn relative_variation<T: Real>(rows: &[RateRow<T>]) -> T {
    let max = rows.iter().fold(T::neg_infinity(), |a, r| a.max(r.quantile));
    let min = rows.iter().fold(T::infinity(), |a, r| a.min(r.quantile));
    max / min - T::one()
}
