//! Lag-`h` autocovariance matrices `Σ̂_T(h) = T^{−1} Σ_{t>h} Y_t Y_{t−h}'`,
//! their sup-norm deviation `Δ_T(h)`, and numeric checks of the
//! vec/Kronecker expansion that the autocovariance bound is built on.
//!
//! With `η_t(k) = vec(X_t X_{t−k}')` and `F_d(L) = Σ_j (C_{j+d} ⊗ C_j) L^j`
//! (`C_i = 0` outside `0..=J`),
//!
//! ```text
//! vec(Y_t Y_{t−h}') = Σ_{k≥0} F_{k−h}(L) η_t(k) + P Σ_{k≥1} F_{k+h}(L) η_{t−h}(k)
//! ```
//!
//! where `P` is the commutation matrix. Both sums stop at `k = J + h`.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{domain, Error, Result};
use crate::linalg::{kron, max_abs, unvec, vec};
use crate::linproc::{apply_filter, bn_decompose, check_dimension, LagPolynomial};
use crate::processes::{generate, ProcessSpec, SamplePath};
use crate::scalar::Real;

/// Largest `n` accepted by [`commutation_matrix`].
pub const COMMUTATION_CAP: usize = 64;
/// Largest `n` accepted by the identity checks.
pub const IDENTITY_CAP: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct AutocovEstimate<T> {
    pub h: usize,
    pub sigma_hat: Array2<T>,
    pub sigma_bar: Option<Array2<T>>,
    pub delta: Option<T>,
}

impl<T: Real> AutocovEstimate<T> {
    pub fn new(path: &SamplePath<T>, h: usize, sigma_bar: Option<Array2<T>>) -> Result<Self> {
        let sigma_hat = empirical_autocov(path, h)?;
        let delta = match &sigma_bar {
            Some(b) => Some(delta_max(&sigma_hat.view(), &b.view())?),
            None => None,
        };
        Ok(Self { h, sigma_hat, sigma_bar, delta })
    }
}

/// `T^{−1} Σ_{t=h+1}^T Y_t Y_{t−h}'` (divisor `T`).
pub fn empirical_autocov<T: Real>(path: &SamplePath<T>, h: usize) -> Result<Array2<T>> {
    let t_len = path.len();
    if h >= t_len {
        return Err(domain(format!("lag h = {h} must be below T = {t_len}")));
    }
    let y = &path.data;
    let lead = y.slice(s![h.., ..]);
    let lag = y.slice(s![..t_len - h, ..]);
    Ok(lead.t().dot(&lag) / T::of_usize(t_len))
}

/// `max_{ij} |A_ij − B_ij|`.
pub fn delta_max<T: Real>(a: &ArrayView2<'_, T>, b: &ArrayView2<'_, T>) -> Result<T> {
    if a.shape() != b.shape() {
        return Err(Error::Shape(format!("{:?} vs {:?}", a.shape(), b.shape())));
    }
    Ok(a.iter().zip(b.iter()).fold(T::zero(), |acc, (x, y)| acc.max((*x - *y).abs())))
}

/// `P` with `P vec(W) = vec(W')` for `n×n` matrices `W`.
pub fn commutation_matrix<T: Real>(n: usize) -> Result<Array2<T>> {
    check_dimension(n, COMMUTATION_CAP)?;
    let mut p = Array2::<T>::zeros((n * n, n * n));
    for i in 0..n {
        for j in 0..n {
            p[[i + j * n, j + i * n]] = T::one();
        }
    }
    Ok(p)
}

/// Coefficients of `F_d(L)`: `(C_{j+d} ⊗ C_j)` for `j = 0..`, leading zeros
/// kept so index `j` is the power of `L`. `d` may be negative.
pub fn f_polynomial<T: Real>(poly: &LagPolynomial<T>, d: isize) -> Vec<Array2<T>> {
    let j_max = poly.max_lag() as isize;
    let n2 = poly.dim() * poly.dim();
    let mut out = Vec::new();
    for j in 0..=j_max {
        let i = j + d;
        if i > j_max {
            break;
        }
        if i < 0 {
            out.push(Array2::zeros((n2, n2)));
            continue;
        }
        out.push(kron(&poly.coeffs()[i as usize].view(), &poly.coeffs()[j as usize].view()));
    }
    out
}

/// `vec(X_t X_{t−k}')`.
fn eta<T: Real>(x: &Array2<T>, t: usize, k: usize) -> Array1<T> {
    let n = x.ncols();
    let mut v = Array1::<T>::zeros(n * n);
    for col in 0..n {
        let b = x[[t - k, col]];
        for row in 0..n {
            v[row + col * n] = x[[t, row]] * b;
        }
    }
    v
}

/// `Σ_j G_j η_{t−j}(k)`.
fn apply_at<T: Real>(g: &[Array2<T>], x: &Array2<T>, t: usize, k: usize) -> Array1<T> {
    let n2 = x.ncols() * x.ncols();
    let mut acc = Array1::<T>::zeros(n2);
    for (j, c) in g.iter().enumerate() {
        acc.scaled_add(T::one(), &c.dot(&eta(x, t - j, k)));
    }
    acc
}

#[derive(Debug, Clone, PartialEq)]
pub struct VecIdentityCheck<T> {
    /// `max_t |vec(Y_t Y_{t−h}') − rhs_t|_∞`.
    pub residual: T,
    /// `max_t |vec(Y_t Y_{t−h}')|_∞`.
    pub scale: T,
    /// `Σ̂` assembled from the right-hand sides, divided by the filtered length.
    pub sigma_from_identity: Array2<T>,
}

/// Rebuilds `vec(Y_t Y_{t−h}')` from the `η_t(k)` expansion for every `t` at
/// which all lags exist, and compares with the direct outer product of the
/// filtered path `Y = C(L) X`.
pub fn verify_vec_identity<T: Real>(
    poly: &LagPolynomial<T>,
    innovations: &SamplePath<T>,
    h: usize,
) -> Result<VecIdentityCheck<T>> {
    let n = poly.dim();
    check_dimension(n, IDENTITY_CAP)?;
    let j_max = poly.max_lag();
    let x = &innovations.data;
    if innovations.dim() != n {
        return Err(Error::Shape(format!("innovations have dimension {}, polynomial {n}", innovations.dim())));
    }
    if x.nrows() <= j_max + h {
        return Err(Error::Insufficient(format!("need more than J + h = {} innovations", j_max + h)));
    }
    let y = apply_filter(poly, innovations)?.data;
    let p = commutation_matrix::<T>(n)?;
    let k_max = j_max + h;
    let lead: Vec<Vec<Array2<T>>> = (0..=k_max).map(|k| f_polynomial(poly, k as isize - h as isize)).collect();
    let transposed: Vec<Vec<Array2<T>>> = (1..=k_max).map(|k| f_polynomial(poly, (k + h) as isize)).collect();

    let mut residual = T::zero();
    let mut scale = T::zero();
    let mut sum = Array1::<T>::zeros(n * n);
    for t in (j_max + h)..x.nrows() {
        let yt = y.row(t - j_max);
        let ylag = y.row(t - j_max - h);
        let direct = Array2::from_shape_fn((n, n), |(i, j)| yt[i] * ylag[j]);
        let lhs = vec(&direct.view());
        let mut rhs = Array1::<T>::zeros(n * n);
        for (k, g) in lead.iter().enumerate() {
            if g.iter().all(|c| c.iter().all(|v| *v == T::zero())) {
                continue;
            }
            rhs.scaled_add(T::one(), &apply_at(g, x, t, k));
        }
        let mut back = Array1::<T>::zeros(n * n);
        for (i, g) in transposed.iter().enumerate() {
            let k = i + 1;
            if g.is_empty() || t < h + k + g.len() - 1 {
                continue;
            }
            back.scaled_add(T::one(), &apply_at(g, x, t - h, k));
        }
        rhs.scaled_add(T::one(), &p.dot(&back));
        for (a, b) in lhs.iter().zip(rhs.iter()) {
            residual = residual.max((*a - *b).abs());
            scale = scale.max(a.abs());
        }
        sum.scaled_add(T::one(), &rhs);
    }
    let sigma_from_identity = unvec(&sum, n, n) / T::of_usize(y.nrows());
    Ok(VecIdentityCheck { residual, scale, sigma_from_identity })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BnOnFCheck<T> {
    /// Largest deviation of the BN tail coefficients from their direct sums.
    pub coefficient_residual: T,
    /// `max_t |F(L)η_t − F(1)η_t + F̃(L)η_t − F̃(L)η_{t−1}|_∞`.
    pub path_residual: T,
    pub scale: T,
}

/// Checks `F_{k+h}(L) η_t(k) = F_{k+h}(1) η_t(k) − (1 − L) F̃_{k+h}(L) η_t(k)`
/// along the innovation path, and `F̃_{k+h,j} = Σ_{s>j} C_{k+h+s} ⊗ C_s`.
pub fn verify_bn_on_f<T: Real>(
    poly: &LagPolynomial<T>,
    innovations: &SamplePath<T>,
    h: usize,
    k: usize,
) -> Result<BnOnFCheck<T>> {
    let n = poly.dim();
    check_dimension(n, IDENTITY_CAP)?;
    let d = k + h;
    let g = f_polynomial(poly, d as isize);
    let n2 = n * n;
    if g.is_empty() {
        return Ok(BnOnFCheck { coefficient_residual: T::zero(), path_residual: T::zero(), scale: T::zero() });
    }
    let f_poly = LagPolynomial::new(g.clone())?;
    let bn = bn_decompose(&f_poly);

    let c = poly.coeffs();
    let j_max = poly.max_lag();
    let mut coefficient_residual = T::zero();
    for (j, tilde) in bn.tilde_coeffs.iter().enumerate() {
        let mut direct = Array2::<T>::zeros((n2, n2));
        for s_ in (j + 1)..=j_max {
            if d + s_ > j_max {
                break;
            }
            direct = direct + kron(&c[d + s_].view(), &c[s_].view());
        }
        coefficient_residual = coefficient_residual.max(delta_max(&tilde.view(), &direct.view())?);
    }

    let x = &innovations.data;
    let lags = g.len() - 1;
    let start = k + lags + 1;
    if x.nrows() <= start {
        return Err(Error::Insufficient(format!("need more than {start} innovations")));
    }
    let mut path_residual = T::zero();
    let mut scale = T::zero();
    for t in start..x.nrows() {
        let lhs = apply_at(&g, x, t, k);
        let mut rhs = bn.c_one.dot(&eta(x, t, k));
        if !bn.tilde_coeffs.is_empty() {
            rhs = rhs - apply_at(&bn.tilde_coeffs, x, t, k) + apply_at(&bn.tilde_coeffs, x, t - 1, k);
        }
        for (a, b) in lhs.iter().zip(rhs.iter()) {
            path_residual = path_residual.max((*a - *b).abs());
            scale = scale.max(a.abs());
        }
    }
    Ok(BnOnFCheck { coefficient_residual, path_residual, scale })
}

/// `Σ_j C_{j+h} S C_j'` for serially uncorrelated innovations with covariance `S`.
pub fn population_autocov<T: Real>(poly: &LagPolynomial<T>, innovation_cov: &Array2<T>, h: usize) -> Result<Array2<T>> {
    let n = poly.dim();
    if innovation_cov.shape() != [n, n] {
        return Err(Error::Shape(format!("innovation covariance must be {n}x{n}")));
    }
    let c = poly.coeffs();
    let mut acc = Array2::<T>::zeros((n, n));
    for j in 0..c.len() {
        if j + h >= c.len() {
            break;
        }
        acc = acc + c[j + h].dot(innovation_cov).dot(&c[j].t());
    }
    Ok(acc)
}

/// `E Σ̂_T(h) = (T − h)/T · Γ(h)` for a stationary `Y` with autocovariance `Γ(h)`.
pub fn expected_autocov<T: Real>(gamma_h: &Array2<T>, t_len: usize, h: usize) -> Array2<T> {
    gamma_h * (T::of_usize(t_len.saturating_sub(h)) / T::of_usize(t_len))
}

/// `i,j,value` triplets, 1-based indices.
pub fn write_matrix_csv<T: Real, W: Write>(m: &Array2<T>, mut w: W) -> Result<()> {
    writeln!(w, "i,j,value")?;
    for ((i, j), v) in m.indexed_iter() {
        writeln!(w, "{},{},{:.16e}", i + 1, j + 1, v.as_f64())?;
    }
    Ok(())
}

pub fn read_matrix_csv<T: Real, R: BufRead>(r: R) -> Result<Array2<T>> {
    let mut entries = Vec::new();
    let (mut rows, mut cols) = (0, 0);
    for (k, line) in r.lines().enumerate() {
        let line = line?;
        if k == 0 {
            if line.trim() != "i,j,value" {
                return Err(Error::Parse("matrix CSV header must be `i,j,value`".into()));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.trim().split(',').collect();
        let bad = || Error::Parse(format!("line {}: `{line}`", k + 1));
        if f.len() != 3 {
            return Err(bad());
        }
        let i: usize = f[0].parse().map_err(|_| bad())?;
        let j: usize = f[1].parse().map_err(|_| bad())?;
        let v: f64 = f[2].parse().map_err(|_| bad())?;
        if i == 0 || j == 0 {
            return Err(bad());
        }
        rows = rows.max(i);
        cols = cols.max(j);
        entries.push((i - 1, j - 1, v));
    }
    let mut m = Array2::<T>::zeros((rows, cols));
    for (i, j, v) in entries {
        m[[i, j]] = T::lit(v);
    }
    Ok(m)
}

/// Settings for the long-run Monte-Carlo autocovariance target.
#[derive(Debug, Clone, PartialEq)]
pub struct LongRunTarget {
    /// Total number of lagged products averaged, across all chunks.
    pub effective_samples: usize,
    /// Filtered length of each independent chunk.
    pub chunk_len: usize,
    pub seed: u64,
    /// Cache directory; `None` disables caching.
    pub cache_dir: Option<PathBuf>,
}

impl Default for LongRunTarget {
    fn default() -> Self {
        Self { effective_samples: 10_000_000, chunk_len: 20_000, seed: 0x5eed, cache_dir: None }
    }
}

fn cache_key<T: Real>(spec: &ProcessSpec<T>, poly: &LagPolynomial<T>, h: usize, cfg: &LongRunTarget) -> String {
    let mut hasher = Sha256::new();
    hasher.update(format!("{spec:?}|h={h}|N={}|chunk={}|seed={}|", cfg.effective_samples, cfg.chunk_len, cfg.seed));
    hasher.update(std::any::type_name::<T>());
    for c in poly.coeffs() {
        for v in c.iter() {
            hasher.update(v.as_f64().to_bits().to_le_bytes());
        }
        hasher.update(b";");
    }
    hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Stationary `Γ(h) = E Y_t Y_{t−h}'` of `Y = C(L) X`, estimated by averaging
/// over independent chunks (run in parallel, reduced in chunk order).
/// Results are cached under a content hash of `(spec, poly, h, settings)`.
pub fn long_run_autocov<T: Real>(
    spec: &ProcessSpec<T>,
    poly: &LagPolynomial<T>,
    h: usize,
    cfg: &LongRunTarget,
) -> Result<Array2<T>> {
    if cfg.chunk_len <= h || cfg.effective_samples == 0 {
        return Err(domain("chunk length must exceed h and the sample budget must be positive"));
    }
    let cache_file: Option<PathBuf> = cfg
        .cache_dir
        .as_ref()
        .map(|d| d.join(format!("autocov-{}.csv", cache_key(spec, poly, h, cfg))));
    if let Some(path) = &cache_file {
        if path.exists() {
            return read_matrix_csv(BufReader::new(fs::File::open(path)?));
        }
    }
    let per_chunk = cfg.chunk_len - h;
    let chunks = cfg.effective_samples.div_ceil(per_chunk);
    let j_max = poly.max_lag();
    let parts: Vec<Result<Array2<T>>> = (0..chunks)
        .into_par_iter()
        .map(|r| {
            let x = generate(spec, cfg.chunk_len + j_max, cfg.seed ^ r as u64)?;
            let y = apply_filter(poly, &x)?;
            let d = &y.data;
            let lead = d.slice(s![h.., ..]);
            let lag = d.slice(s![..d.nrows() - h, ..]);
            Ok(lead.t().dot(&lag))
        })
        .collect();
    let n = poly.dim();
    let mut acc = Array2::<T>::zeros((n, n));
    for p in parts {
        acc = acc + p?;
    }
    let gamma = acc / T::of_usize(chunks * per_chunk);
    if let Some(path) = &cache_file {
        write_cache(path, &gamma)?;
    }
    Ok(gamma)
}

fn write_cache<T: Real>(path: &Path, m: &Array2<T>) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::io::BufWriter::new(fs::File::create(&tmp)?);
        write_matrix_csv(m, &mut f)?;
        f.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// `Δ_T(h)` of a filtered path against a target `Σ_T(h)`.
pub fn delta_statistic<T: Real>(y: &SamplePath<T>, h: usize, sigma_bar: &Array2<T>) -> Result<T> {
    let s = empirical_autocov(y, h)?;
    delta_max(&s.view(), &sigma_bar.view())
}

/// Row sums of `|η|` across `t`, for audits of the product process scale.
pub fn mean_abs_eta<T: Real>(x: &SamplePath<T>, k: usize) -> Result<Array1<T>> {
    if x.len() <= k {
        return Err(Error::Insufficient("path shorter than lag".into()));
    }
    let rows: Vec<Array1<T>> = (k..x.len()).map(|t| eta(&x.data, t, k).mapv(|v| v.abs())).collect();
    let views: Vec<_> = rows.iter().map(|r| r.view().insert_axis(Axis(0))).collect();
    let stacked = ndarray::concatenate(Axis(0), &views).map_err(|e| Error::Shape(e.to_string()))?;
    Ok(stacked.mean_axis(Axis(0)).expect("nonempty"))
}

/// Largest `|Σ̂|` entry, a convenience for scale-relative tolerances.
pub fn scale_of<T: Real>(m: &Array2<T>) -> T {
    max_abs(&m.view())
}
