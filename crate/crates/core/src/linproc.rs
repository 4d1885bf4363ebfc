//! Matrix lag polynomials `C(L) = Σ_j C_j L^j`, the Beveridge–Nelson
//! decomposition `C(z) = C(1) − (1 − z) C̃(z)` with `C̃_j = Σ_{k>j} C_k`,
//! filtering, and the polynomial constants the bounds consume.

use std::io::{BufRead, Write};

use ndarray::{Array1, Array2, Axis};

use crate::error::{domain, Error, Result};
use crate::linalg::{kron, norm_inf, row_abs_sums, spectral_norm};
use crate::processes::SamplePath;
use crate::scalar::Real;

/// Finite truncation `C_0, ..., C_J` of a matrix lag polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct LagPolynomial<T> {
    coeffs: Vec<Array2<T>>,
}

impl<T: Real> LagPolynomial<T> {
    pub fn new(coeffs: Vec<Array2<T>>) -> Result<Self> {
        let first = coeffs
            .first()
            .ok_or_else(|| Error::Shape("lag polynomial needs at least C_0".into()))?;
        let n = first.nrows();
        if n == 0 {
            return Err(Error::Shape("coefficient matrices must be nonempty".into()));
        }
        for (j, c) in coeffs.iter().enumerate() {
            if c.nrows() != n || c.ncols() != n {
                return Err(Error::Shape(format!(
                    "C_{j} is {}x{}, expected {n}x{n}",
                    c.nrows(),
                    c.ncols()
                )));
            }
        }
        Ok(Self { coeffs })
    }

    pub fn identity(n: usize) -> Self {
        Self { coeffs: vec![Array2::eye(n)] }
    }

    /// Scalar polynomial `Σ_j c_j L^j` as a 1x1 matrix polynomial.
    pub fn scalar(coeffs: &[T]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| Array2::from_elem((1, 1), c)).collect())
    }

    /// `C_j = Φ^j` for `j = 0..=max_lag` (MA(∞) form of a VAR(1)).
    pub fn var1_ma(phi: &Array2<T>, max_lag: usize) -> Result<Self> {
        let n = phi.nrows();
        let mut coeffs = Vec::with_capacity(max_lag + 1);
        let mut cur = Array2::<T>::eye(n);
        for _ in 0..=max_lag {
            coeffs.push(cur.clone());
            cur = cur.dot(phi);
        }
        Self::new(coeffs)
    }

    pub fn dim(&self) -> usize {
        self.coeffs[0].nrows()
    }

    /// Maximum lag `J`.
    pub fn max_lag(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Array2<T>] {
        &self.coeffs
    }

    /// `C_j`, zero outside `0..=J`.
    pub fn coeff(&self, j: isize) -> Option<&Array2<T>> {
        if j < 0 {
            None
        } else {
            self.coeffs.get(j as usize)
        }
    }

    /// `C(z) = Σ_j C_j z^j`.
    pub fn eval(&self, z: T) -> Array2<T> {
        horner(&self.coeffs, z, self.dim())
    }

    /// Reads the text format: first line `n J`, then `J+1` blocks of `n`
    /// rows with `n` whitespace-separated decimals.
    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut tokens: Vec<String> = Vec::new();
        let mut header: Option<(usize, usize)> = None;
        for line in r.lines() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if header.is_none() {
                let parts: Vec<&str> = trimmed.split_whitespace().collect();
                if parts.len() != 2 {
                    return Err(Error::Parse(format!("header must be `n J`, got `{trimmed}`")));
                }
                let n = parts[0]
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad dimension `{}`", parts[0])))?;
                let j = parts[1]
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad max lag `{}`", parts[1])))?;
                header = Some((n, j));
                continue;
            }
            tokens.extend(trimmed.split_whitespace().map(str::to_owned));
        }
        let (n, j) = header.ok_or_else(|| Error::Parse("empty lag polynomial file".into()))?;
        let expected = n * n * (j + 1);
        if tokens.len() != expected {
            return Err(Error::Parse(format!(
                "expected {expected} coefficients for n = {n}, J = {j}, found {}",
                tokens.len()
            )));
        }
        let values = tokens
            .iter()
            .map(|t| {
                t.parse::<f64>()
                    .map(T::lit)
                    .map_err(|_| Error::Parse(format!("bad number `{t}`")))
            })
            .collect::<Result<Vec<T>>>()?;
        let coeffs = values
            .chunks(n * n)
            .map(|c| Array2::from_shape_vec((n, n), c.to_vec()).expect("chunk size n*n"))
            .collect();
        Self::new(coeffs)
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {}", self.dim(), self.max_lag())?;
        for c in &self.coeffs {
            for row in c.axis_iter(Axis(0)) {
                let line: Vec<String> = row.iter().map(|v| format!("{:.16e}", v.as_f64())).collect();
                writeln!(w, "{}", line.join(" "))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

fn horner<T: Real>(coeffs: &[Array2<T>], z: T, n: usize) -> Array2<T> {
    let mut acc = Array2::<T>::zeros((n, n));
    for c in coeffs.iter().rev() {
        acc = acc * z + c;
    }
    acc
}

/// `C(1)` and the tail sums `C̃_0, ..., C̃_{J−1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BNDecomposition<T> {
    pub c_one: Array2<T>,
    pub tilde_coeffs: Vec<Array2<T>>,
}

impl<T: Real> BNDecomposition<T> {
    /// `C̃(z)`.
    pub fn tilde_eval(&self, z: T) -> Array2<T> {
        horner(&self.tilde_coeffs, z, self.c_one.nrows())
    }

    /// Right-hand side `C(1) − (1 − z) C̃(z)`.
    pub fn eval(&self, z: T) -> Array2<T> {
        &self.c_one - &(self.tilde_eval(z) * (T::one() - z))
    }
}

pub fn bn_decompose<T: Real>(poly: &LagPolynomial<T>) -> BNDecomposition<T> {
    let n = poly.dim();
    let j_max = poly.max_lag();
    let mut tilde = vec![Array2::<T>::zeros((n, n)); j_max];
    // C̃_{J−1} = C_J, C̃_{j} = C̃_{j+1} + C_{j+1}
    let mut running = Array2::<T>::zeros((n, n));
    for j in (0..j_max).rev() {
        running = running + &poly.coeffs[j + 1];
        tilde[j] = running.clone();
    }
    let c_one = if j_max > 0 { &tilde[0] + &poly.coeffs[0] } else { poly.coeffs[0].clone() };
    BNDecomposition { c_one, tilde_coeffs: tilde }
}

/// `Y_t = Σ_{j=0}^J C_j X_{t−j}`; the first `J` innovations serve as pre-sample,
/// so the output has `T − J` rows.
pub fn apply_filter<T: Real>(poly: &LagPolynomial<T>, innovations: &SamplePath<T>) -> Result<SamplePath<T>> {
    check_filter_input(poly, innovations)?;
    let data = filter_rows(poly.coeffs(), &innovations.data, poly.max_lag());
    Ok(SamplePath { data, spec: innovations.spec, seed: innovations.seed })
}

fn check_filter_input<T: Real>(poly: &LagPolynomial<T>, innovations: &SamplePath<T>) -> Result<()> {
    if innovations.dim() != poly.dim() {
        return Err(Error::Shape(format!(
            "innovations have dimension {}, polynomial {}",
            innovations.dim(),
            poly.dim()
        )));
    }
    if innovations.len() <= poly.max_lag() {
        return Err(Error::Insufficient(format!(
            "need more than J = {} innovations for pre-sample, got {}",
            poly.max_lag(),
            innovations.len()
        )));
    }
    Ok(())
}

/// Filters rows `start..` of `x` by `coeffs`; row `t` uses `x[t − j]`.
fn filter_rows<T: Real>(coeffs: &[Array2<T>], x: &Array2<T>, start: usize) -> Array2<T> {
    let n = coeffs.first().map_or(x.ncols(), |c| c.nrows());
    let out_len = x.nrows() - start;
    let mut y = Array2::<T>::zeros((out_len, n));
    for s in 0..out_len {
        let t = s + start;
        let mut row = y.row_mut(s);
        for (j, c) in coeffs.iter().enumerate() {
            if j > t {
                break;
            }
            row.scaled_add(T::one(), &c.dot(&x.row(t - j)));
        }
    }
    y
}

/// Residual of `Σ_t Y_t = C(1) Σ_t X_t + X̃_0 − X̃_T` with `X̃_t = C̃(L) X_t`.
///
/// Returns the largest absolute coordinate difference together with the
/// scale `max_t |Y_t|_∞` for relative comparisons.
pub fn bn_path_identity_residual<T: Real>(
    poly: &LagPolynomial<T>,
    innovations: &SamplePath<T>,
) -> Result<(T, T)> {
    check_filter_input(poly, innovations)?;
    let j_max = poly.max_lag();
    let x = &innovations.data;
    let y = filter_rows(poly.coeffs(), x, j_max);
    let lhs = y.sum_axis(Axis(0));
    let bn = bn_decompose(poly);
    let last = x.nrows() - 1;
    let tilde_at = |row: usize| -> Array1<T> {
        let mut acc = Array1::<T>::zeros(poly.dim());
        for (j, c) in bn.tilde_coeffs.iter().enumerate() {
            acc.scaled_add(T::one(), &c.dot(&x.row(row - j)));
        }
        acc
    };
    let sum_x = x.slice(ndarray::s![j_max.., ..]).sum_axis(Axis(0));
    // X̃_0 sits one row before the first filtered output.
    let rhs = bn.c_one.dot(&sum_x) + tilde_at(j_max.saturating_sub(1)) - tilde_at(last);
    let residual = lhs
        .iter()
        .zip(rhs.iter())
        .fold(T::zero(), |acc, (a, b)| acc.max((*a - *b).abs()));
    let scale = crate::linalg::max_abs(&y.view());
    Ok((residual, scale))
}

/// Operator norm used for `|||C_j|||` in `c̃_{2,∞}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MatrixNorm {
    #[default]
    Spectral,
    Inf,
}

/// How Kronecker-based constants are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KroneckerMode {
    /// Form `n² × n²` Kronecker sums explicitly, refusing `n > cap`.
    Explicit { cap: usize },
    /// Upper bounds through `|||A ⊗ B|||_∞ = |||A|||_∞ |||B|||_∞`.
    Factorized,
}

impl Default for KroneckerMode {
    fn default() -> Self {
        KroneckerMode::Explicit { cap: 32 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConstantsOptions {
    pub norm: MatrixNorm,
    pub kronecker: KroneckerMode,
}

/// Constants of a lag polynomial consumed by the linear-process and
/// autocovariance bounds. All sums are truncated at `J`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolynomialConstants<T> {
    /// `|||C(1)|||_∞`.
    pub c_inf: T,
    /// `max_i Σ_j j |e_i' C_j|_1`.
    pub tilde_c_inf: T,
    /// `Σ_j j |||C_j|||²`.
    pub tilde_c2_inf: T,
    /// `max_k |||Σ_j C_{j+k} ⊗ C_j|||_∞` over `k ∈ 1..=h` (`k = 0` when `h = 0`).
    pub c_h: T,
    /// `max_k |||Σ_i (Σ_{j ≥ i+k} C_j) ⊗ C_i|||_∞` over `k ∈ 1..=max(h, 1)`.
    pub c_inf_kron: T,
    /// `max_{i ≤ n²} Σ_{j ≥ 1} j |Σ_k e_i'(C_{j+k} ⊗ C_k)|_1`.
    pub tilde_c_inf_kron: T,
    /// `max_k |||S_k|||_∞²`, `S_k = Σ_{j ≥ k} C_j`: upper bound for `c_inf_kron`.
    pub s_k_bound: T,
    /// Geometric extrapolation of the neglected tail `Σ_{j>J} j |||C_j|||_∞`.
    pub truncation_tail: T,
    /// True when Kronecker constants are factorized upper bounds.
    pub factorized: bool,
}

pub fn compute_constants<T: Real>(poly: &LagPolynomial<T>, h: usize) -> Result<PolynomialConstants<T>> {
    compute_constants_with(poly, h, ConstantsOptions::default())
}

pub fn compute_constants_with<T: Real>(
    poly: &LagPolynomial<T>,
    h: usize,
    opts: ConstantsOptions,
) -> Result<PolynomialConstants<T>> {
    let n = poly.dim();
    let factorized = match opts.kronecker {
        KroneckerMode::Explicit { cap } if n > cap => {
            return Err(Error::DimensionCap {
                n,
                cap,
                hint: "explicit Kronecker sums need O(n^4) memory; use the factorized upper-bound mode"
                    .into(),
            })
        }
        KroneckerMode::Explicit { .. } => false,
        KroneckerMode::Factorized => true,
    };
    let c = poly.coeffs();
    let j_max = poly.max_lag();
    let bn = bn_decompose(poly);
    let c_inf = norm_inf(&bn.c_one.view());

    let mut weighted_rows = Array1::<T>::zeros(n);
    for (j, cj) in c.iter().enumerate().skip(1) {
        weighted_rows = weighted_rows + row_abs_sums(&cj.view()) * T::of_usize(j);
    }
    let tilde_c_inf = weighted_rows.iter().copied().fold(T::zero(), T::max);

    let tilde_c2_inf = c
        .iter()
        .enumerate()
        .skip(1)
        .map(|(j, cj)| {
            let norm = match opts.norm {
                MatrixNorm::Spectral => spectral_norm(&cj.view()),
                MatrixNorm::Inf => norm_inf(&cj.view()),
            };
            T::of_usize(j) * norm * norm
        })
        .fold(T::zero(), |a, b| a + b);

    // S_k = Σ_{j ≥ k} C_j
    let mut tails = vec![Array2::<T>::zeros((n, n)); j_max + 2];
    for k in (0..=j_max).rev() {
        tails[k] = &tails[k + 1] + &c[k];
    }
    let tail = |k: usize| -> &Array2<T> { &tails[k.min(j_max + 1)] };
    let s_k_bound = tails
        .iter()
        .map(|s| {
            let v = norm_inf(&s.view());
            v * v
        })
        .fold(T::zero(), T::max);

    let ch_range: Vec<usize> = if h == 0 { vec![0] } else { (1..=h).collect() };
    let cinf_range: Vec<usize> = (1..=h.max(1)).collect();

    let (c_h, c_inf_kron, tilde_c_inf_kron) = if factorized {
        let norms: Vec<T> = c.iter().map(|m| norm_inf(&m.view())).collect();
        let tail_norms: Vec<T> = tails.iter().map(|m| norm_inf(&m.view())).collect();
        let c_h = ch_range
            .iter()
            .map(|&k| {
                (0..=j_max)
                    .filter(|j| j + k <= j_max)
                    .map(|j| norms[j + k] * norms[j])
                    .fold(T::zero(), |a, b| a + b)
            })
            .fold(T::zero(), T::max);
        let c_inf_kron = cinf_range
            .iter()
            .map(|&k| {
                (0..=j_max)
                    .map(|i| tail_norms[(i + k).min(j_max + 1)] * norms[i])
                    .fold(T::zero(), |a, b| a + b)
            })
            .fold(T::zero(), T::max);
        let rows: Vec<Array1<T>> = c.iter().map(|m| row_abs_sums(&m.view())).collect();
        let mut best = T::zero();
        for l in 0..n {
            for m in 0..n {
                let mut acc = T::zero();
                for j in 1..=j_max {
                    let inner = (0..=(j_max - j))
                        .map(|k| rows[j + k][l] * rows[k][m])
                        .fold(T::zero(), |a, b| a + b);
                    acc = acc + T::of_usize(j) * inner;
                }
                best = best.max(acc);
            }
        }
        (c_h, c_inf_kron, best)
    } else {
        let c_h = ch_range
            .iter()
            .map(|&k| norm_inf(&kron_lag_sum(c, k).view()))
            .fold(T::zero(), T::max);
        let c_inf_kron = cinf_range
            .iter()
            .map(|&k| {
                let mut acc = Array2::<T>::zeros((n * n, n * n));
                for (i, ci) in c.iter().enumerate() {
                    acc = acc + kron(&tail(i + k).view(), &ci.view());
                }
                norm_inf(&acc.view())
            })
            .fold(T::zero(), T::max);
        let mut weighted = Array1::<T>::zeros(n * n);
        for j in 1..=j_max {
            weighted = weighted + row_abs_sums(&kron_lag_sum(c, j).view()) * T::of_usize(j);
        }
        let tilde = weighted.iter().copied().fold(T::zero(), T::max);
        (c_h, c_inf_kron, tilde)
    };

    Ok(PolynomialConstants {
        c_inf,
        tilde_c_inf,
        tilde_c2_inf,
        c_h,
        c_inf_kron,
        tilde_c_inf_kron,
        s_k_bound,
        truncation_tail: truncation_tail(c),
        factorized,
    })
}

/// `Σ_j C_{j+k} ⊗ C_j`.
pub fn kron_lag_sum<T: Real>(c: &[Array2<T>], k: usize) -> Array2<T> {
    let n = c[0].nrows();
    let mut acc = Array2::<T>::zeros((n * n, n * n));
    for j in 0..c.len() {
        if j + k >= c.len() {
            break;
        }
        acc = acc + kron(&c[j + k].view(), &c[j].view());
    }
    acc
}

/// Extrapolates `Σ_{j>J} j a_J r^{j−J}` with `a_j = |||C_j|||_∞` and
/// `r = a_J / a_{J−1}`; infinite when the last ratio is not below one.
fn truncation_tail<T: Real>(c: &[Array2<T>]) -> T {
    let j_max = c.len() - 1;
    if j_max == 0 {
        return T::zero();
    }
    let last = norm_inf(&c[j_max].view());
    let prev = norm_inf(&c[j_max - 1].view());
    if last == T::zero() {
        return T::zero();
    }
    if prev == T::zero() {
        return T::infinity();
    }
    let r = last / prev;
    if r >= T::one() {
        return T::infinity();
    }
    let jf = T::of_usize(j_max);
    let one_minus = T::one() - r;
    last * (jf * r / one_minus + r / (one_minus * one_minus))
}

/// `n²×n²` zero matrix check helper for callers bounding Kronecker sizes.
pub fn check_dimension(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        Err(Error::DimensionCap { n, cap, hint: "reduce the dimension".into() })
    } else if n == 0 {
        Err(domain("dimension must be at least 1"))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;

    #[test]
    fn single_coefficient_bn() {
        let p = LagPolynomial::new(vec![array![[1.0, 2.0], [3.0, 4.0]]]).unwrap();
        let bn = bn_decompose(&p);
        assert_eq!(bn.c_one, p.coeffs()[0]);
        assert!(bn.tilde_coeffs.is_empty());
    }

    #[test]
    fn scalar_bn_example() {
        let p = LagPolynomial::scalar(&[1.0, 0.5]).unwrap();
        let bn = bn_decompose(&p);
        assert_eq!(bn.c_one[[0, 0]], 1.5);
        assert_eq!(bn.tilde_coeffs[0][[0, 0]], 0.5);
        assert_eq!(p.eval(2.0)[[0, 0]], 2.0);
        assert_eq!(bn.eval(2.0)[[0, 0]], 2.0);
    }

    #[test]
    fn filter_examples() {
        let x = SamplePath::from_data(Array2::from_elem((6, 1), 1.0));
        let p = LagPolynomial::scalar(&[1.0, 0.5]).unwrap();
        let y = apply_filter(&p, &x).unwrap();
        assert_eq!(y.len(), 5);
        assert!(y.data.iter().all(|&v| v == 1.5));

        let x = SamplePath::from_data(array![[1.0, 2.0], [3.0, -1.0], [0.5, 0.25]]);
        let id = LagPolynomial::identity(2);
        assert_eq!(apply_filter(&id, &x).unwrap().data, x.data);
        let zero = LagPolynomial::new(vec![Array2::zeros((2, 2))]).unwrap();
        assert!(apply_filter(&zero, &x).unwrap().data.iter().all(|&v| v == 0.0));

        let short = SamplePath::from_data(Array2::<f64>::zeros((1, 1)));
        assert!(apply_filter(&p, &short).is_err());
    }

    #[test]
    fn identity_polynomial_path_identity() {
        let x = SamplePath::from_data(array![[1.0, 2.0], [3.0, -1.0], [0.5, 0.25]]);
        let (res, _) = bn_path_identity_residual(&LagPolynomial::identity(2), &x).unwrap();
        assert_eq!(res, 0.0);
    }

    #[test]
    fn constants_identity_and_scalar() {
        let k = compute_constants(&LagPolynomial::<f64>::identity(3), 0).unwrap();
        assert_eq!(k.c_inf, 1.0);
        assert_eq!(k.tilde_c_inf, 0.0);
        assert_eq!(k.tilde_c2_inf, 0.0);
        assert_eq!(k.c_h, 1.0);

        let k = compute_constants(&LagPolynomial::scalar(&[1.0, 0.5]).unwrap(), 1).unwrap();
        assert_relative_eq!(k.c_inf, 1.5);
        assert_relative_eq!(k.tilde_c_inf, 0.5);
        assert_relative_eq!(k.tilde_c2_inf, 0.25);
        // Σ_j C_{j+1} C_j = 0.5
        assert_relative_eq!(k.c_h, 0.5);
        // Σ_i S_{i+1} C_i = S_1 C_0 + S_2 C_1 = 0.5
        assert_relative_eq!(k.c_inf_kron, 0.5);
        // j = 1: C_1 C_0 = 0.5
        assert_relative_eq!(k.tilde_c_inf_kron, 0.5);
        assert_relative_eq!(k.s_k_bound, 2.25);
    }

    #[test]
    fn dimension_cap() {
        let p = LagPolynomial::<f64>::identity(4);
        let opts = ConstantsOptions { kronecker: KroneckerMode::Explicit { cap: 3 }, ..Default::default() };
        match compute_constants_with(&p, 1, opts) {
            Err(Error::DimensionCap { hint, .. }) => assert!(hint.contains("factorized")),
            other => panic!("expected cap error, got {other:?}"),
        }
    }

    #[test]
    fn factorized_mode_bounds_explicit() {
        let p = LagPolynomial::new(vec![
            array![[1.0, -0.3], [0.2, 0.8]],
            array![[0.4, 0.1], [-0.2, 0.3]],
            array![[0.1, 0.05], [0.0, -0.1]],
        ])
        .unwrap();
        for h in 0..3 {
            let e = compute_constants(&p, h).unwrap();
            let f = compute_constants_with(
                &p,
                h,
                ConstantsOptions { kronecker: KroneckerMode::Factorized, ..Default::default() },
            )
            .unwrap();
            assert!(f.factorized && !e.factorized);
            assert!(f.c_h >= e.c_h - 1e-12);
            assert!(f.c_inf_kron >= e.c_inf_kron - 1e-12);
            assert!(f.tilde_c_inf_kron >= e.tilde_c_inf_kron - 1e-12);
            assert_eq!(f.c_inf, e.c_inf);
            // item (c) is dominated by the S_k diagnostic only up to the
            // row-sum relaxation; both are reported.
            assert!(e.s_k_bound > 0.0);
        }
    }

    #[test]
    fn truncation_tail_geometric() {
        let p = LagPolynomial::scalar(&[1.0, 0.5, 0.25]).unwrap();
        let k = compute_constants(&p, 0).unwrap();
        // Σ_{j>2} j 0.5^j = 2 - (0.5 + 0.5) = 1
        assert_relative_eq!(k.truncation_tail, 1.0, epsilon = 1e-12);
        let p = LagPolynomial::<f64>::scalar(&[1.0, 0.5, 0.6]).unwrap();
        assert!(compute_constants(&p, 0).unwrap().truncation_tail.is_infinite());
    }

    #[test]
    fn text_round_trip() {
        let p = LagPolynomial::new(vec![array![[1.0, 2.0], [3.0, 4.0]], array![[0.5, -0.25], [1e-3, 7.0]]])
            .unwrap();
        let mut buf = Vec::new();
        p.write_text(&mut buf).unwrap();
        let back = LagPolynomial::<f64>::read_text(&buf[..]).unwrap();
        assert_eq!(back, p);
        assert!(LagPolynomial::<f64>::read_text("2 1\n1 2\n3 4\n".as_bytes()).is_err());
        assert!(LagPolynomial::<f64>::read_text("2 0\n1 x\n3 4\n".as_bytes()).is_err());
    }
}
