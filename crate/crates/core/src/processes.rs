//! Synthetic centred vector processes with a controllable sub-Weibull
//! exponent and known mixingale profile.
//!
//! Every coordinate draws from its own ChaCha8 stream keyed by
//! `(seed, coordinate)`, and position in the stream is the time index, so a
//! path is a pure function of `(spec, T, seed)`.

use std::io::{BufRead, Write};

use ndarray::{Array2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::function::gamma::ln_gamma;

use crate::error::{domain, Error, Result};
use crate::scalar::Real;

/// Steps discarded before the first recorded observation of a recursive family.
pub const BURN_IN: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family<T> {
    /// Independent draws of `sign(Z)|Z|^{2/α}` rescaled to unit variance.
    IidSubWeibull,
    /// `X_t = φ X_{t−1} + ε_t` per coordinate with standard Gaussian `ε_t`.
    GaussianAr1 { phi: T },
    /// `X_t = σ_t ε_t`, `σ_t² = a0 + a1 X_{t−1}²`, with `ε_t` drawn from the
    /// unit-variance sub-Weibull(α) family.
    ArchMds { a0: T, a1: T },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessSpec<T> {
    pub family: Family<T>,
    pub n: usize,
    pub alpha: T,
}

impl<T: Real> ProcessSpec<T> {
    pub fn iid(n: usize, alpha: T) -> Self {
        Self { family: Family::IidSubWeibull, n, alpha }
    }

    pub fn ar1(n: usize, phi: T) -> Self {
        Self { family: Family::GaussianAr1 { phi }, n, alpha: T::lit(2.0) }
    }

    pub fn arch(n: usize, alpha: T, a0: T, a1: T) -> Self {
        Self { family: Family::ArchMds { a0, a1 }, n, alpha }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if self.n == 0 {
            return bad("dimension n must be at least 1".into());
        }
        if !(self.alpha > T::zero()) || !self.alpha.is_finite() {
            return bad(format!("alpha must be positive, got {}", self.alpha));
        }
        match self.family {
            Family::IidSubWeibull => Ok(()),
            Family::GaussianAr1 { phi } => {
                if !(phi.abs() < T::one()) {
                    return bad(format!("AR coefficient must satisfy |phi| < 1, got {phi}"));
                }
                if self.alpha != T::lit(2.0) {
                    return bad("Gaussian AR(1) is sub-Weibull(2); alpha must be 2".into());
                }
                Ok(())
            }
            Family::ArchMds { a0, a1 } => {
                if !(a0 > T::zero()) {
                    return bad(format!("ARCH a0 must be positive, got {a0}"));
                }
                if !(a1 >= T::zero() && a1 < T::one()) {
                    return bad(format!("ARCH a1 must lie in [0, 1), got {a1}"));
                }
                Ok(())
            }
        }
    }

    /// True when `E[X_t | F_{t−1}] = 0`.
    pub fn is_martingale_difference(&self) -> bool {
        match self.family {
            Family::IidSubWeibull | Family::ArchMds { .. } => true,
            Family::GaussianAr1 { phi } => phi == T::zero(),
        }
    }

    /// Stationary marginal variance of each coordinate.
    pub fn marginal_variance(&self) -> T {
        match self.family {
            Family::IidSubWeibull => T::one(),
            Family::GaussianAr1 { phi } => T::one() / (T::one() - phi * phi),
            Family::ArchMds { a0, a1 } => a0 / (T::one() - a1),
        }
    }

    /// Closed-form `‖X_t‖_p` of the stationary marginal, where one exists.
    ///
    /// For the ARCH family only `p ≤ 2` is available, through `‖X‖_p ≤ ‖X‖_2`.
    pub fn marginal_lp_norm(&self, p: T) -> Result<T> {
        match self.family {
            Family::IidSubWeibull => {
                let s = transformed_gaussian_scale(self.alpha.as_f64());
                let pf = p.as_f64();
                let a = self.alpha.as_f64();
                Ok(T::lit(s * abs_gaussian_moment(2.0 * pf / a).powf(1.0 / pf)))
            }
            Family::GaussianAr1 { .. } => {
                let sd = self.marginal_variance().sqrt().as_f64();
                let pf = p.as_f64();
                Ok(T::lit(sd * abs_gaussian_moment(pf).powf(1.0 / pf)))
            }
            Family::ArchMds { .. } if p <= T::lit(2.0) => Ok(self.marginal_variance().sqrt()),
            Family::ArchMds { .. } => Err(Error::Unsupported(
                "ARCH marginal L_p norm has no closed form for p > 2".into(),
            )),
        }
    }

    /// Closed-form `‖X_t‖_ψα` of the stationary marginal where one exists.
    pub fn marginal_orlicz_norm(&self) -> Option<T> {
        match self.family {
            Family::IidSubWeibull => Some(T::lit(transformed_gaussian_orlicz_norm(
                self.alpha.as_f64(),
            ))),
            // Gaussian with variance v: ‖X‖_ψ2 = sqrt(8v/3).
            Family::GaussianAr1 { .. } => {
                Some((T::lit(8.0 / 3.0) * self.marginal_variance()).sqrt())
            }
            Family::ArchMds { a1, .. } if a1 == T::zero() => {
                let sd = self.marginal_variance().sqrt();
                Some(sd * T::lit(transformed_gaussian_orlicz_norm(self.alpha.as_f64())))
            }
            Family::ArchMds { .. } => None,
        }
    }
}

/// `E|Z|^q` for a standard Gaussian `Z`.
pub fn abs_gaussian_moment(q: f64) -> f64 {
    (q / 2.0 * 2f64.ln() + ln_gamma((q + 1.0) / 2.0) - 0.5 * std::f64::consts::PI.ln()).exp()
}

/// Scale `s` making `s·sign(Z)|Z|^{2/α}` unit-variance.
pub fn transformed_gaussian_scale(alpha: f64) -> f64 {
    abs_gaussian_moment(4.0 / alpha).sqrt().recip()
}

/// `‖s·|Z|^{2/α}‖_ψα = s (8/3)^{1/α}`: from `E exp(λZ²) = (1−2λ)^{-1/2}`.
pub fn transformed_gaussian_orlicz_norm(alpha: f64) -> f64 {
    transformed_gaussian_scale(alpha) * (8.0f64 / 3.0).powf(1.0 / alpha)
}

/// One realization of a vector process: row `t` holds `X_{t+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath<T> {
    pub data: Array2<T>,
    /// Generating spec of the underlying innovations, when known.
    pub spec: Option<ProcessSpec<T>>,
    pub seed: u64,
}

impl<T: Real> SamplePath<T> {
    pub fn from_data(data: Array2<T>) -> Self {
        Self { data, spec: None, seed: 0 }
    }

    pub fn len(&self) -> usize {
        self.data.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.data.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    /// `Σ_t X_t`.
    pub fn column_sums(&self) -> ndarray::Array1<T> {
        self.data.sum_axis(Axis(0))
    }

    /// CSV with header `t,x1,...,xn`; 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut header = String::from("t");
        for j in 1..=self.dim() {
            header.push_str(&format!(",x{j}"));
        }
        writeln!(w, "{header}")?;
        for (t, row) in self.data.axis_iter(Axis(0)).enumerate() {
            let mut line = (t + 1).to_string();
            for v in row {
                line.push(',');
                line.push_str(&format!("{:.16e}", v.as_f64()));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty path CSV".into()))??;
        let cols: Vec<&str> = header.trim().split(',').collect();
        if cols.first() != Some(&"t") {
            return Err(Error::Parse("path CSV header must start with `t`".into()));
        }
        let n = cols.len() - 1;
        let mut values = Vec::new();
        let mut rows = 0;
        for (k, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.trim().split(',').collect();
            if fields.len() != n + 1 {
                return Err(Error::Parse(format!(
                    "row {}: expected {} fields, found {}",
                    k + 1,
                    n + 1,
                    fields.len()
                )));
            }
            for f in &fields[1..] {
                let v: f64 = f
                    .parse()
                    .map_err(|_| Error::Parse(format!("row {}: bad number `{f}`", k + 1)))?;
                values.push(T::lit(v));
            }
            rows += 1;
        }
        let data = Array2::from_shape_vec((rows, n), values)
            .map_err(|e| Error::Parse(e.to_string()))?;
        Ok(Self::from_data(data))
    }
}

fn coordinate_rng(seed: u64, coordinate: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(coordinate as u64);
    rng
}

/// Generates a centred path of length `t_len`.
pub fn generate<T: Real>(spec: &ProcessSpec<T>, t_len: usize, seed: u64) -> Result<SamplePath<T>> {
    spec.validate()?;
    if t_len == 0 {
        return Err(domain("path length must be at least 1"));
    }
    let n = spec.n;
    let alpha = spec.alpha.as_f64();
    let power = 2.0 / alpha;
    let scale = transformed_gaussian_scale(alpha);
    let innovation = move |rng: &mut ChaCha8Rng| -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        z.signum() * z.abs().powf(power) * scale
    };
    let mut data = Array2::<T>::zeros((t_len, n));
    for j in 0..n {
        let mut rng = coordinate_rng(seed, j);
        match spec.family {
            Family::IidSubWeibull => {
                for t in 0..t_len {
                    data[[t, j]] = T::lit(innovation(&mut rng));
                }
            }
            Family::GaussianAr1 { phi } => {
                let mut x = T::zero();
                for step in 0..(BURN_IN + t_len) {
                    let e: f64 = StandardNormal.sample(&mut rng);
                    x = phi * x + T::lit(e);
                    if step >= BURN_IN {
                        data[[step - BURN_IN, j]] = x;
                    }
                }
            }
            Family::ArchMds { a0, a1 } => {
                let mut x = T::zero();
                for step in 0..(BURN_IN + t_len) {
                    let sigma = (a0 + a1 * x * x).sqrt();
                    x = sigma * T::lit(innovation(&mut rng));
                    if step >= BURN_IN {
                        data[[step - BURN_IN, j]] = x;
                    }
                }
            }
        }
    }
    Ok(SamplePath { data, spec: Some(*spec), seed })
}

/// Dependence class: `L_p`-mixingale with
/// `‖E[X_t|F_{t−m}] − E X_t‖_p ≤ c_t ρ_m` and `ρ_m ≤ exp(−m^γ/(p c_ρ))`.
///
/// `gamma = ∞` encodes a martingale difference (`ρ_m = 0` for `m ≥ 1`).
/// Bounds built on `L_1` product processes use `p = 1`, where this envelope
/// coincides with `exp(−m^γ/c_ρ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingaleProfile<T> {
    pub p: T,
    pub gamma: T,
    pub c_rho: T,
    /// Time average of the mixingale constants `c_t`.
    pub c_bar: T,
}

impl<T: Real> MixingaleProfile<T> {
    pub fn new(p: T, gamma: T, c_rho: T, c_bar: T) -> Result<Self> {
        if !(p >= T::one()) {
            return Err(domain(format!("mixingale order p must be >= 1, got {p}")));
        }
        if !(gamma > T::zero()) {
            return Err(domain(format!("gamma must be positive, got {gamma}")));
        }
        if !(c_rho > T::zero()) || !c_rho.is_finite() {
            return Err(domain(format!("c_rho must be positive, got {c_rho}")));
        }
        if !(c_bar >= T::zero()) {
            return Err(domain(format!("c_bar must be nonnegative, got {c_bar}")));
        }
        Ok(Self { p, gamma, c_rho, c_bar })
    }

    pub fn martingale_difference(p: T, c_bar: T) -> Self {
        Self { p, gamma: T::infinity(), c_rho: T::one(), c_bar }
    }

    pub fn is_martingale_difference(&self) -> bool {
        self.gamma.is_infinite()
    }

    /// `1/γ`, zero in the martingale-difference limit.
    pub fn inv_gamma(&self) -> T {
        self.gamma.recip()
    }

    /// Decay envelope `ρ_m`.
    pub fn rho(&self, m: usize) -> T {
        if m == 0 {
            return T::one();
        }
        if self.is_martingale_difference() {
            return T::zero();
        }
        (-(T::of_usize(m).powf(self.gamma)) / (self.p * self.c_rho)).exp()
    }
}

/// Analytic mixingale profile at the default order `p = 2`.
pub fn mixingale_profile_of<T: Real>(spec: &ProcessSpec<T>) -> Result<MixingaleProfile<T>> {
    mixingale_profile_with_order(spec, T::lit(2.0))
}

/// Analytic mixingale profile at order `p`.
///
/// AR(1): `E[X_t|F_{t−m}] = φ^m X_{t−m}`, so `c_t = ‖X_t‖_p`, `γ = 1` and
/// `c_ρ = p / log(1/|φ|)`. i.i.d. and ARCH paths are martingale differences.
pub fn mixingale_profile_with_order<T: Real>(
    spec: &ProcessSpec<T>,
    p: T,
) -> Result<MixingaleProfile<T>> {
    spec.validate()?;
    if !(p >= T::one()) {
        return Err(domain(format!("mixingale order p must be >= 1, got {p}")));
    }
    // ARCH with p > 2 falls back to the L_2 norm; its ρ_m vanishes anyway.
    let c_bar = spec
        .marginal_lp_norm(p)
        .or_else(|_| spec.marginal_lp_norm(T::lit(2.0)))?;
    match spec.family {
        Family::GaussianAr1 { phi } if phi != T::zero() => {
            let c_rho = p / (T::one() / phi.abs()).ln();
            MixingaleProfile::new(p, T::one(), c_rho, c_bar)
        }
        _ => Ok(MixingaleProfile::martingale_difference(p, c_bar)),
    }
}

/// Empirical `L_p` norm of the best linear predictor of `X_t` from
/// `X_{t−m}`, averaged over coordinates, for each `m` in `m_grid`.
pub fn estimate_mixingale_decay<T: Real>(
    path: &SamplePath<T>,
    p: T,
    m_grid: &[usize],
) -> Result<Vec<T>> {
    if !(p >= T::one()) {
        return Err(domain(format!("p must be >= 1, got {p}")));
    }
    let t_len = path.len();
    let max_m = m_grid.iter().copied().max().unwrap_or(0);
    if t_len < max_m + 1000 {
        return Err(Error::Insufficient(format!(
            "need T - max(m) >= 1000, have T = {t_len}, max m = {max_m}"
        )));
    }
    let n = path.dim();
    let mut out = Vec::with_capacity(m_grid.len());
    for &m in m_grid {
        let mut acc = T::zero();
        for j in 0..n {
            let col = path.data.column(j);
            let (mut sxy, mut sxx) = (T::zero(), T::zero());
            for t in m..t_len {
                sxy = sxy + col[t] * col[t - m];
                sxx = sxx + col[t - m] * col[t - m];
            }
            let b = if sxx > T::zero() { sxy / sxx } else { T::zero() };
            let cnt = T::of_usize(t_len - m);
            let mean_p = (m..t_len)
                .map(|t| (b * col[t - m]).abs().powf(p))
                .fold(T::zero(), |a, v| a + v)
                / cnt;
            acc = acc + mean_p.powf(p.recip());
        }
        out.push(acc / T::of_usize(n));
    }
    Ok(out)
}

/// Closed-form `E[X_t | F_{t−i}]` for coordinate `j` at row `t`.
fn conditional_mean<T: Real>(spec: &ProcessSpec<T>, path: &SamplePath<T>, t: usize, i: usize, j: usize) -> T {
    match spec.family {
        Family::GaussianAr1 { phi } => phi.powi(i as i32) * path.data[[t - i, j]],
        Family::IidSubWeibull | Family::ArchMds { .. } => {
            if i == 0 {
                path.data[[t, j]]
            } else {
                T::zero()
            }
        }
    }
}

/// Largest residual of `X_t − E X_t = Σ_{i=1}^m V_{i,t} + (E[X_t|F_{t−m}] − E X_t)`
/// with `V_{i,t} = E[X_t|F_{t−i+1}] − E[X_t|F_{t−i}]`, using closed-form
/// conditional means.
pub fn telescoping_check<T: Real>(path: &SamplePath<T>, m: usize) -> Result<T> {
    let spec = path
        .spec
        .as_ref()
        .ok_or_else(|| Error::Unsupported("telescoping check needs a generated path".into()))?;
    if path.len() <= m {
        return Err(Error::Insufficient(format!(
            "path length {} must exceed m = {m}",
            path.len()
        )));
    }
    let mut worst = T::zero();
    for t in m..path.len() {
        for j in 0..path.dim() {
            let lhs = path.data[[t, j]];
            let mut rhs = conditional_mean(spec, path, t, m, j);
            for i in 1..=m {
                rhs = rhs + conditional_mean(spec, path, t, i - 1, j)
                    - conditional_mean(spec, path, t, i, j);
            }
            worst = worst.max((lhs - rhs).abs());
        }
    }
    Ok(worst)
}

/// `L_1`-mixingale constant of the product `X_{it} X_{j,t−k}`:
/// `(c_it + c_it c_jt ρ_m^{3/2} + ‖XY‖_2 ‖Y‖_2) ρ_m^{1/2}`, from truncating at
/// `M = ρ_m^{-1/2}`.
pub fn product_mixingale_bound<T: Real>(c_it: T, c_jt: T, rho_m: T, l2_norms: (T, T)) -> Result<T> {
    let (xy, y) = l2_norms;
    if [c_it, c_jt, rho_m, xy, y].iter().any(|v| !(*v >= T::zero())) {
        return Err(domain("product_mixingale_bound inputs must be nonnegative"));
    }
    let root = rho_m.sqrt();
    Ok((c_it + c_it * c_jt * rho_m * root + xy * y) * root)
}
