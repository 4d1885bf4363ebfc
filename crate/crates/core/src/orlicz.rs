//! ψ_α Orlicz (quasi-)norm machinery for sub-Weibull random variables.
//!
//! `ψ_α(x) = exp(x^α) − 1` and `‖X‖_ψα = inf{c > 0 : E ψ_α(|X|/c) ≤ 1}`.
//! A variable is sub-Weibull(α) when `P(|X| > x) ≤ 2 exp(−(x/K)^α)`,
//! with `K = ‖X‖_ψα`. The norm is a proper norm for `α ≥ 1` and only a
//! quasi-norm below that.

use crate::error::{domain, Error, Result};
use crate::scalar::{ln_one_point_five, Real};

/// Tail class of a sub-Weibull family: exponent `alpha` and a uniform bound
/// `c_psi` on the ψ_α norms of all coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubWeibullSpec<T> {
    pub alpha: T,
    pub c_psi: T,
}

impl<T: Real> SubWeibullSpec<T> {
    pub fn new(alpha: T, c_psi: T) -> Result<Self> {
        if !(alpha > T::zero()) || !alpha.is_finite() {
            return Err(domain(format!("alpha must be positive, got {alpha}")));
        }
        if !(c_psi > T::zero()) || !c_psi.is_finite() {
            return Err(domain(format!("c_psi must be positive, got {c_psi}")));
        }
        Ok(Self { alpha, c_psi })
    }
}

/// Plug-in estimate of `‖X‖_ψα` from samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrliczEstimate<T> {
    pub value: T,
    pub n_samples: usize,
    /// Root-finding interval the bisection started from.
    pub bracket: (T, T),
}

fn check_alpha<T: Real>(alpha: T) -> Result<()> {
    if alpha > T::zero() && alpha.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("alpha must be positive, got {alpha}")))
    }
}

/// `ψ_α(x) = exp(x^α) − 1`.
pub fn psi<T: Real>(x: T, alpha: T) -> Result<T> {
    check_alpha(alpha)?;
    if !(x >= T::zero()) {
        return Err(domain(format!("psi needs x >= 0, got {x}")));
    }
    Ok(psi_unchecked(x, alpha))
}

#[inline]
fn psi_unchecked<T: Real>(x: T, alpha: T) -> T {
    x.powf(alpha).exp_m1()
}

/// `ψ_α^{-1}(y) = log(1 + y)^{1/α}`.
pub fn psi_inverse<T: Real>(y: T, alpha: T) -> Result<T> {
    check_alpha(alpha)?;
    if !(y >= T::zero()) {
        return Err(domain(format!("psi_inverse needs y >= 0, got {y}")));
    }
    Ok(y.ln_1p().powf(alpha.recip()))
}

/// Quasi-triangle constant: `‖X+Y‖ ≤ C_α (‖X‖ + ‖Y‖)` with
/// `C_α = 2^{1/α}` for `α < 1` and 1 otherwise.
pub fn quasi_triangle_constant<T: Real>(alpha: T) -> T {
    if alpha < T::one() {
        T::lit(2.0).powf(alpha.recip())
    } else {
        T::one()
    }
}

/// `(d_α, D_α)` with `d_α ‖X‖* ≤ ‖X‖_ψα ≤ D_α ‖X‖*`, where
/// `‖X‖* = sup_p p^{-1/α} ‖X‖_p`.
pub fn moment_equivalence_bounds<T: Real>(alpha: T) -> Result<(T, T)> {
    check_alpha(alpha)?;
    let e = T::E();
    let inv = alpha.recip();
    let d = (e * alpha).powf(inv) / T::lit(2.0);
    let big_d = (T::lit(2.0) * e * alpha.min(T::one())).powf(inv);
    Ok((d, big_d))
}

/// `2 / log(1.5)`, the maximal-inequality constant.
pub fn max_bound_constant<T: Real>() -> T {
    T::lit(2.0) / ln_one_point_five::<T>()
}

/// Bound on `‖max_i |X_i|‖_ψα` for `n` variables with ψ_α norms at most
/// `max_individual_norm`: `(2/log 1.5) ψ_α^{-1}(2n) max_i ‖X_i‖_ψα`.
pub fn max_norm_bound<T: Real>(n: usize, alpha: T, max_individual_norm: T) -> Result<T> {
    if n == 0 {
        return Err(domain("max_norm_bound needs n >= 1"));
    }
    if !(max_individual_norm >= T::zero()) {
        return Err(domain("norm must be nonnegative"));
    }
    let y = psi_inverse(T::lit(2.0) * T::of_usize(n), alpha)?;
    Ok(max_bound_constant::<T>() * y * max_individual_norm)
}

/// Tail bound `P(max_i |X_i| > x) ≤ exp(−x^α / ((c₁ K)^α log(1 + 2n)))`,
/// with `c₁ = 2/log 1.5` and `K = max_i ‖X_i‖_ψα`, clipped to `[0, 1]`.
pub fn orlicz_tail_bound<T: Real>(x: T, n: usize, alpha: T, max_individual_norm: T) -> Result<T> {
    check_alpha(alpha)?;
    if !(x > T::zero()) {
        return Err(domain(format!("orlicz_tail_bound needs x > 0, got {x}")));
    }
    if n == 0 {
        return Err(domain("orlicz_tail_bound needs n >= 1"));
    }
    if !(max_individual_norm >= T::zero()) {
        return Err(domain("norm must be nonnegative"));
    }
    let scale = (max_bound_constant::<T>() * max_individual_norm).powf(alpha)
        * (T::one() + T::lit(2.0) * T::of_usize(n)).ln();
    Ok(crate::bounds::exp_neg_ratio(T::one(), x.powf(alpha), scale))
}

/// Plug-in estimate of `‖X‖_ψα`: the root of `c ↦ mean ψ_α(|x_i|/c) − 1`.
///
/// The search runs geometric bisection on `[max|x|/ψ_α^{-1}(N), 1e12 max|x|]`
/// and stops once the bracket is relatively narrower than `1e-12` (or a few
/// ulps for `f32`).
pub fn estimate_orlicz_norm<T: Real>(samples: &[T], alpha: T) -> Result<OrliczEstimate<T>> {
    check_alpha(alpha)?;
    let n = samples.len();
    if n < 100 {
        return Err(Error::Insufficient(format!(
            "Orlicz estimation needs at least 100 samples, got {n}"
        )));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(domain("samples must be finite"));
    }
    let abs: Vec<T> = samples.iter().map(|v| v.abs()).collect();
    let max = abs.iter().copied().fold(T::zero(), T::max);
    if max == T::zero() {
        return Ok(OrliczEstimate {
            value: T::zero(),
            n_samples: n,
            bracket: (T::zero(), T::zero()),
        });
    }
    let nf = T::of_usize(n);
    // mean ψ(|x|/c) − 1, summed in f64 to keep 10⁶-sample means stable.
    let excess = |c: T| -> f64 {
        let s: f64 = abs
            .iter()
            .map(|&v| psi_unchecked(v / c, alpha).as_f64())
            .sum();
        s / n as f64 - 1.0
    };
    let lo0 = max / psi_inverse(nf, alpha)?;
    let hi0 = T::lit(1e12) * max;
    let (mut lo, mut hi) = (lo0, hi0);
    if excess(lo) < 0.0 {
        // Only the largest point contributes N at lo0, so this means rounding.
        return Err(Error::Bracket(format!("mean psi below 1 at lower end {lo}")));
    }
    if excess(hi) > 0.0 {
        return Err(Error::Bracket(format!(
            "mean psi never reaches 1 within c <= {hi}"
        )));
    }
    let tol = T::lit(1e-12).max(T::epsilon() * T::lit(8.0));
    for _ in 0..400 {
        if hi / lo - T::one() <= tol {
            break;
        }
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(OrliczEstimate {
        value: (lo * hi).sqrt(),
        n_samples: n,
        bracket: (lo0, hi0),
    })
}
