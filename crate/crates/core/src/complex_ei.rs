//! Exponential integral `E1(z) = ∫_z^∞ e^{-u}/u du` for complex `z` in the cut
//! plane, `Ei(z) = -E1(-z)`, and the divergent large-argument series
//! `e^{-z} Ei(z) ~ Σ k!/z^{k+1}`.
//!
//! Evaluation regions: the convergent power series for `|z| <= 4` (and in a
//! thin wedge along the cut where its terms do not cancel), the Stieltjes
//! continued fraction elsewhere. The continued fraction converges in
//! the whole cut plane, so the asymptotic series is never used as a primary
//! path, only as an approximation whose remainder can be measured.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{lit, re, Estimate, Real};

/// Radius below which the power series is used.
const SERIES_RADIUS: f64 = 4.0;
/// Near the negative real axis the power-series terms share a phase, so the
/// series stays accurate out to this radius while the continued fraction slows.
const NEAR_CUT_RADIUS: f64 = 50.0;
/// Allowed `|z| (1 + cos arg z)`, i.e. the log of the tolerated cancellation.
const NEAR_CUT_SPREAD: f64 = 4.0;
const MAX_CF_TERMS: usize = 20_000;

/// Argument of `E1`: a nonzero complex number off the negative real axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EiArgument<T: Real>(Complex<T>);

impl<T: Real> EiArgument<T> {
    pub fn new(z: Complex<T>) -> Result<Self> {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::Domain(format!("non-finite argument {z}")));
        }
        if z.re == T::zero() && z.im == T::zero() {
            return Err(Error::Domain("E1 is singular at z = 0".into()));
        }
        if z.im == T::zero() && z.re < T::zero() {
            return Err(Error::Domain(format!("z = {z} lies on the branch cut")));
        }
        Ok(Self(z))
    }

    pub fn get(self) -> Complex<T> {
        self.0
    }
}

/// Truncation order of the asymptotic series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct AsymptoticOrder(usize);

impl AsymptoticOrder {
    pub const DEFAULT_MAX: usize = 20;

    pub fn new(n: usize, max: usize) -> Result<Self> {
        if n > max {
            return Err(Error::Order { requested: n, max });
        }
        Ok(Self(n))
    }

    pub fn get(self) -> usize {
        self.0
    }
}

/// `E1(z)` with an absolute error estimate.
pub fn e1<T: Real>(z: EiArgument<T>) -> Estimate<T> {
    let z = z.get();
    if uses_series(z) {
        e1_series(z)
    } else {
        e1_continued_fraction(z)
    }
}

fn uses_series<T: Real>(z: Complex<T>) -> bool {
    let r = z.norm();
    let near_cut =
        r <= lit(NEAR_CUT_RADIUS) && r * (T::one() + z.arg().cos()) <= lit(NEAR_CUT_SPREAD);
    r <= lit(SERIES_RADIUS) || near_cut
}

/// Convenience wrapper validating the argument.
pub fn e1_checked<T: Real>(z: Complex<T>) -> Result<Estimate<T>> {
    Ok(e1(EiArgument::new(z)?))
}

fn e1_series<T: Real>(z: Complex<T>) -> Estimate<T> {
    // E1(z) = -γ - log z - Σ_{k>=1} (-z)^k / (k k!)
    let mut power = re::<T>(T::one());
    let mut sum = Complex::new(T::zero(), T::zero());
    let mut magnitude = T::zero();
    let mut k = 1usize;
    loop {
        let kf = T::from_usize(k).unwrap();
        power = power * (-z) / kf;
        let term = power / kf;
        sum = sum + term;
        magnitude = magnitude + term.norm();
        if term.norm() <= T::epsilon() * sum.norm() * lit(0.01) || k > 600 {
            break;
        }
        k += 1;
    }
    let value = -re(T::euler_gamma()) - z.ln() - sum;
    let err =
        T::epsilon() * (magnitude + value.norm() + T::euler_gamma() + z.ln().norm()) * lit(4.0);
    Estimate::new(value, err)
}

fn e1_continued_fraction<T: Real>(z: Complex<T>) -> Estimate<T> {
    let (scaled, rel) = scaled_continued_fraction(z);
    let value = (-z).exp() * scaled;
    Estimate::new(value, value.norm() * rel)
}

/// `e^{z} E1(z)` and its relative error from the continued fraction
/// `1/(z + 1 - 1/(z + 3 - 4/(z + 5 - ...)))`, modified Lentz.
fn scaled_continued_fraction<T: Real>(z: Complex<T>) -> (Complex<T>, T) {
    let tiny = T::min_positive_value().sqrt();
    let zero = Complex::new(T::zero(), T::zero());
    let nonzero = |x: Complex<T>| {
        if x.norm() < tiny {
            Complex::new(tiny, T::zero())
        } else {
            x
        }
    };

    let b0 = z + T::one();
    let mut f = nonzero(b0);
    let mut c = f;
    let mut d = zero;
    let mut last_delta = T::infinity();
    let mut iters = 0usize;
    for k in 1..MAX_CF_TERMS {
        let kf = T::from_usize(k).unwrap();
        let a = re(-(kf * kf));
        let b = z + lit::<T>(2.0) * kf + T::one();
        d = nonzero(b + a * d);
        c = nonzero(b + a / c);
        d = d.inv();
        let delta = c * d;
        f = f * delta;
        last_delta = (delta - T::one()).norm();
        iters = k;
        if last_delta <= T::epsilon() {
            break;
        }
    }
    let iter_scale = T::from_usize(iters).unwrap().sqrt();
    (
        f.inv(),
        last_delta + T::epsilon() * (lit::<T>(8.0) + iter_scale),
    )
}

/// `e^{z} E1(z)` without overflow for large `Re z`.
pub fn e1_scaled<T: Real>(z: EiArgument<T>) -> Estimate<T> {
    let w = z.get();
    if uses_series(w) {
        let e = e1_series(w);
        let factor = w.exp();
        Estimate::new(e.value * factor, e.err * factor.norm())
    } else {
        let (value, rel) = scaled_continued_fraction(w);
        Estimate::new(value, value.norm() * rel)
    }
}

/// `Ei(x)` for real `x > 0` as the real (principal-value) function, summed
/// from its all-positive series.
pub fn ei_real<T: Real>(x: T) -> Result<T> {
    if !(x > T::zero()) || !x.is_finite() || x > lit(700.0) {
        return Err(Error::Domain(format!(
            "real Ei needs 0 < x <= 700, got {x}"
        )));
    }
    let mut power = T::one();
    let mut sum = T::zero();
    let mut k = 1usize;
    loop {
        let kf = T::from_usize(k).unwrap();
        power = power * x / kf;
        let term = power / kf;
        sum = sum + term;
        if term <= T::epsilon() * sum * lit(0.01) {
            break;
        }
        k += 1;
    }
    Ok(T::euler_gamma() + x.ln() + sum)
}

/// `Ei(z) = -E1(-z)`. On the positive real axis, where `-z` sits on the cut,
/// the real principal-value `Ei` is returned.
pub fn ei<T: Real>(z: Complex<T>) -> Result<Estimate<T>> {
    if z.im == T::zero() && z.re > T::zero() {
        return Ok(Estimate::new(
            re(ei_real(z.re)?),
            T::epsilon() * lit(8.0) * z.re.exp(),
        ));
    }
    let e = e1(EiArgument::new(-z)?);
    Ok(Estimate::new(-e.value, e.err))
}

/// Configuration for the asymptotic series of `Ei`.
#[derive(Debug, Clone, Copy)]
pub struct AsymptoticConfig<T> {
    pub max_order: usize,
    /// Sector margin: the series is accepted for `|arg(-z)| <= π - delta`.
    pub delta: T,
    /// Slack constant of the remainder bound.
    pub slack: T,
}

impl<T: Real> Default for AsymptoticConfig<T> {
    fn default() -> Self {
        Self {
            max_order: AsymptoticOrder::DEFAULT_MAX,
            delta: lit(0.1),
            slack: lit(2.0),
        }
    }
}

/// `Σ_{k=0}^{n} k!/z^{k+1}`, the truncated expansion of `e^{-z} Ei(z)`.
///
/// Accepted arguments are the sector `|arg(-z)| <= π - δ` and the positive real
/// axis, where `Ei` is the real function and the same expansion holds.
pub fn ei_asymptotic_partial_sum<T: Real>(
    z: Complex<T>,
    n: usize,
    cfg: &AsymptoticConfig<T>,
) -> Result<Complex<T>> {
    let order = AsymptoticOrder::new(n, cfg.max_order)?;
    if z.norm() == T::zero() || !z.norm().is_finite() {
        return Err(Error::Domain(format!(
            "asymptotic series needs finite nonzero z, got {z}"
        )));
    }
    let on_positive_axis = z.im == T::zero() && z.re > T::zero();
    if !on_positive_axis && (-z).arg().abs() > T::PI() - cfg.delta {
        return Err(Error::Domain(format!("|arg(-z)| > π - δ for z = {z}")));
    }
    let inv = z.inv();
    let mut term = inv;
    let mut sum = term;
    for k in 1..=order.get() {
        term = term * inv * T::from_usize(k).unwrap();
        sum = sum + term;
    }
    Ok(sum)
}

/// Magnitudes `k!/|z|^{k+1}` of the first `count` series terms.
pub fn asymptotic_term_magnitudes<T: Real>(z: Complex<T>, count: usize) -> Vec<T> {
    let r = z.norm();
    let mut out = Vec::with_capacity(count);
    let mut t = T::one() / r;
    for k in 0..count {
        if k > 0 {
            t = t * T::from_usize(k).unwrap() / r;
        }
        out.push(t);
    }
    out
}

/// Optimal truncation heuristic `n* = floor(|z|) - 1`: the index of the
/// smallest term of the divergent series.
pub fn optimal_truncation_order<T: Real>(z: Complex<T>) -> usize {
    let m = z.norm().floor().to_usize().unwrap_or(0);
    m.saturating_sub(1)
}

/// The remainder bound `C (n+1)! / |z|^{n+2}` valid for `|z| >= 2(n+1)`.
pub fn asymptotic_remainder_bound<T: Real>(z: Complex<T>, n: usize, slack: T) -> T {
    let r = z.norm();
    let mut b = slack / r;
    for k in 1..=n + 1 {
        b = b * T::from_usize(k).unwrap() / r;
    }
    b
}
