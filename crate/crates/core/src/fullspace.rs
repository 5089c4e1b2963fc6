//! Free-space Faddeev–Green function
//! `G_ζ(x) = ∫ e^{i x·ξ} / (ξ² + 2ζ·ξ) d³ξ` in spherical Fourier coordinates.
//!
//! The radial integral `I = ∫_0^∞ r e^{iRβr}/(r + A) dr` with `A = 2sα` has
//! the exponential-integral closed form `I = 1/B - A e^{AB} E1(AB)`,
//! `B = -iRβ`, as long as rotating the ray onto `arg(Br) = 0` does not sweep
//! across the pole `r = -A`. When it does, the residue `2πi sign(β) A e^{AB}`
//! has to be added back; [`residue_correction`] decides that case.
//!
//! For the angular integral every direction is paired with its antipode.
//! `(A, B) -> (-A, -B)` leaves `w = AB` unchanged, so both `E1(w)` terms and
//! both `1/B` terms cancel and only the residue difference remains. The
//! `1/B` part is a distribution in `β`; its delta contribution gives the
//! constant `2π²/R`.

use num_complex::Complex;
use num_traits::{Num, Zero};

use crate::complex_ei::{e1_scaled, ei_real, AsymptoticOrder, EiArgument};
use crate::error::{Error, Result};
use crate::geometry::{DirectionSpec, FieldPoint, Frame};
use crate::oracle::QuadratureSpec;
use crate::quadrature::{integrate, Tolerance};
use crate::scalar::{imag_unit, lit, re, Estimate, Real};

/// `(R, s, α, β)` of one radial integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialKernelParams<T: Real> {
    pub r: T,
    pub s: T,
    pub alpha: Complex<T>,
    pub beta: T,
}

impl<T: Real> RadialKernelParams<T> {
    pub fn new(r: T, s: T, alpha: Complex<T>, beta: T) -> Result<Self> {
        if !(r > T::zero()) || !r.is_finite() {
            return Err(Error::Domain(format!("R must be positive, got {r}")));
        }
        if !(s > T::zero()) || !s.is_finite() {
            return Err(Error::Domain(format!("s must be positive, got {s}")));
        }
        if !alpha.re.is_finite() || !alpha.im.is_finite() {
            return Err(Error::Domain("alpha is not finite".into()));
        }
        if beta == T::zero() || !beta.is_finite() {
            return Err(Error::Domain(format!(
                "beta must be finite and nonzero, got {beta}"
            )));
        }
        Ok(Self { r, s, alpha, beta })
    }

    /// `A = 2sα`.
    pub fn a(&self) -> Complex<T> {
        self.alpha * (lit::<T>(2.0) * self.s)
    }

    /// `B = -iRβ`.
    pub fn b(&self) -> Complex<T> {
        Complex::new(T::zero(), -self.r * self.beta)
    }

    pub fn w(&self) -> Complex<T> {
        self.a() * self.b()
    }
}

/// Residue term that completes `A e^{w} E1(w)` to the true value of
/// `A ∫_0^∞ e^{-Br}/(r + A) dr`: `2πi sign(β)` when the pole `-A` lies in the
/// quadrant swept by the contour rotation, else zero. A pole on the positive
/// real axis is taken with the `β -> β + i0` prescription.
pub fn residue_correction<T: Real>(a: Complex<T>, beta: T) -> Complex<T> {
    if !(a.re < T::zero()) {
        return Complex::zero();
    }
    let swept = beta * a.im < T::zero() || (a.im == T::zero() && beta < T::zero());
    if swept {
        imag_unit::<T>() * (T::TAU() * beta.signum())
    } else {
        Complex::zero()
    }
}

/// `∫_0^∞ e^{ibr}/(r + A) dr = e^{w} (E1(w) + correction)` with `w = -ibA`,
/// Abel-summed at infinity. `A = 0` or `b = 0` make the integral diverge.
pub fn shifted_exponential_integral<T: Real>(a: Complex<T>, b: T) -> Result<Estimate<T>> {
    if a.is_zero() || b == T::zero() || !b.is_finite() {
        return Err(Error::Singularity(format!(
            "divergent integral for A = {a}, b = {b}"
        )));
    }
    let w = Complex::new(a.im * b, -a.re * b);
    if w.im == T::zero() && w.re < T::zero() {
        // Pole on the rotated ray: principal value plus half the residue.
        let x = -w.re;
        let decay = (-x).exp();
        let value = Complex::new(-ei_real(x)? * decay, T::PI() * b.signum() * decay);
        return Ok(Estimate::new(
            value,
            T::epsilon() * lit(16.0) * value.norm(),
        ));
    }
    let scaled = e1_scaled(EiArgument::new(w)?);
    let corr = residue_correction(a, b);
    Ok(Estimate::new(scaled.value + corr * w.exp(), scaled.err))
}

/// `A e^{w} (E1(w) + correction)`, so that `I = 1/B - remainder`.
fn radial_remainder<T: Real>(p: &RadialKernelParams<T>) -> Result<Estimate<T>> {
    let a = p.a();
    if a.is_zero() {
        return Ok(Estimate::exact(Complex::zero()));
    }
    Ok(shifted_exponential_integral(a, p.r * p.beta)?.scale(a))
}

/// Closed form of `∫_0^∞ r e^{iRβr}/(r + 2sα) dr` (Abel-summed at infinity).
pub fn radial_integral_closed<T: Real>(p: &RadialKernelParams<T>) -> Result<Estimate<T>> {
    let rem = radial_remainder(p)?;
    Ok(Estimate::new(p.b().inv() - rem.value, rem.err))
}

/// `A (e^{AB} Ei(-AB) + 1/(AB))` exactly as written, with no residue term.
/// Agrees with [`radial_integral_closed`] except where the pole is swept.
pub fn radial_integral_printed<T: Real>(p: &RadialKernelParams<T>) -> Result<Estimate<T>> {
    let a = p.a();
    if a.is_zero() {
        return Err(Error::Domain("A = 0".into()));
    }
    let w = p.w();
    if w.im == T::zero() && w.re < T::zero() {
        return Err(Error::Domain(format!("|arg(AB)| = π for AB = {w}")));
    }
    let scaled = e1_scaled(EiArgument::new(w)?);
    // Ei(-w) = -E1(w)
    let value = a * (-scaled.value + w.inv());
    Ok(Estimate::new(value, scaled.err * a.norm()))
}

/// `I(α, β) + I(-α, -β)`. Only the residue terms survive.
pub fn antipodal_pair<T: Real>(p: &RadialKernelParams<T>) -> Complex<T> {
    let a = p.a();
    let diff = residue_correction(a, p.beta) - residue_correction(-a, -p.beta);
    if diff.is_zero() {
        return Complex::zero();
    }
    -(a * p.w().exp() * diff)
}

/// `k!/(i^{k+1} 2^k) = k! (-i)^{k+1} / 2^k` in any complex-capable number
/// type, including exact rationals.
pub fn series_prefactor<N>(k: usize) -> Complex<N>
where
    N: Clone + Num + std::ops::Neg<Output = N>,
{
    let two = N::one() + N::one();
    let mut fact = N::one();
    let mut counter = N::zero();
    let mut pow2 = N::one();
    for _ in 0..k {
        counter = counter + N::one();
        fact = fact * counter.clone();
        pow2 = pow2 * two.clone();
    }
    let mut phase = Complex::new(N::one(), N::zero());
    let minus_i = Complex::new(N::zero(), -N::one());
    for _ in 0..=k {
        phase = phase * minus_i.clone();
    }
    phase * (fact / pow2)
}

/// One term `coefficient · s^{s_power}` of the large-`s` radial series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionTerm<T: Real> {
    pub k: usize,
    pub coefficient: Complex<T>,
    pub s_power: i32,
}

impl<T: Real> ExpansionTerm<T> {
    pub fn value(&self, s: T) -> Complex<T> {
        self.coefficient * s.powi(self.s_power)
    }
}

/// Partial sum `Σ_{k=1}^n k!/(i^{k+1} 2^k α^k R^{k+1} β^{k+1} s^k)`.
pub fn radial_integral_series<T: Real>(
    p: &RadialKernelParams<T>,
    n: AsymptoticOrder,
    beta_min: T,
) -> Result<(Complex<T>, Vec<ExpansionTerm<T>>)> {
    let n = n.get();
    if n == 0 {
        return Err(Error::Domain("the radial series starts at k = 1".into()));
    }
    if p.alpha.is_zero() || (p.alpha.re == T::zero() && p.alpha.im < T::zero()) {
        return Err(Error::Domain(format!(
            "alpha = {} outside -π/2 < arg α < 3π/2",
            p.alpha
        )));
    }
    if p.beta.abs() < beta_min {
        return Err(Error::Caustic {
            beta: p.beta.to_f64().unwrap_or(f64::NAN),
            beta_min: beta_min.to_f64().unwrap_or(f64::NAN),
        });
    }
    let mut terms = Vec::with_capacity(n);
    let mut sum = Complex::zero();
    let base = (p.alpha * p.r * p.beta).inv();
    let mut power = re::<T>(T::one() / (p.r * p.beta));
    for k in 1..=n {
        power = power * base;
        let coefficient = series_prefactor::<T>(k) * power;
        let term = ExpansionTerm {
            k,
            coefficient,
            s_power: -(k as i32),
        };
        sum = sum + term.value(p.s);
        terms.push(term);
    }
    Ok((sum, terms))
}

/// Overall constant applied to the Fourier integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// `∫ e^{ix·ξ}/(ξ² + 2ζ·ξ) d³ξ` as it stands.
    #[default]
    Paper,
    /// `(2π)^{-3}` and the sign of the symbol `-(ξ² + 2ζ·ξ)`, so that the
    /// `s -> 0` Laplace limit is `-1/(4π|x|)`.
    FourierStandard,
}

impl Normalization {
    pub fn factor<T: Real>(self) -> T {
        match self {
            Normalization::Paper => T::one(),
            Normalization::FourierStandard => -T::one() / (lit::<T>(8.0) * T::PI().powi(3)),
        }
    }

    pub fn apply<T: Real>(self, e: Estimate<T>) -> Estimate<T> {
        e.scale(re(self.factor::<T>()))
    }
}

impl std::str::FromStr for Normalization {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Self::Paper),
            "fourier-standard" => Ok(Self::FourierStandard),
            other => Err(Error::Config(format!("unknown normalization `{other}`"))),
        }
    }
}

/// Angular data of one field point in the frame whose polar axis is `x̂`.
/// A Fourier direction is `ξ̂ = cos t (cos φ e1 + sin φ e2) + sin t x̂`, so
/// `β = sin t`, and `α = cos t · a(φ) + sin t · c`.
struct AlignedGeometry<T: Real> {
    a1: Complex<T>,
    a2: Complex<T>,
    c: Complex<T>,
    /// `(t, φ)` of the zeros of `α` on the upper hemisphere.
    alpha_zeros: Vec<(T, T)>,
}

impl<T: Real> AlignedGeometry<T> {
    fn new(p: &FieldPoint<T>, d: &DirectionSpec<T>) -> Self {
        let frame = Frame::about(p.unit());
        let proj = |v: &[T; 3]| d.zeta_dot[0] * v[0] + d.zeta_dot[1] * v[1] + d.zeta_dot[2] * v[2];
        let (a1, a2, c) = (proj(&frame.e1), proj(&frame.e2), proj(&frame.axis));

        let rz = d.zeta_dot.map(|z| z.re);
        let iz = d.zeta_dot.map(|z| z.im);
        let n = [
            rz[1] * iz[2] - rz[2] * iz[1],
            rz[2] * iz[0] - rz[0] * iz[2],
            rz[0] * iz[1] - rz[1] * iz[0],
        ];
        let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        let mut alpha_zeros = Vec::new();
        if len > lit(1e-12) {
            for sign in [T::one(), -T::one()] {
                let v = n.map(|x| sign * x / len);
                let (u, phi) = frame.coordinates(&v);
                if u >= T::zero() {
                    alpha_zeros.push((u.min(T::one()).asin(), phi));
                }
            }
        }
        Self {
            a1,
            a2,
            c,
            alpha_zeros,
        }
    }

    fn a(&self, phi: T) -> Complex<T> {
        let (sp, cp) = phi.sin_cos();
        self.a1 * cp + self.a2 * sp
    }

    /// Zeros of `c1(φ) = Im a(φ)` in `[0, 2π)`.
    fn im_a_zeros(&self) -> Vec<T> {
        let (p, q) = (self.a1.im, self.a2.im);
        if p == T::zero() && q == T::zero() {
            return Vec::new();
        }
        // p cos φ + q sin φ = 0
        let base = (-p).atan2(q);
        vec![
            crate::geometry::reduce_azimuth(base),
            crate::geometry::reduce_azimuth(base + T::PI()),
        ]
    }

    /// `t ∈ (0, π/2)` where `Im α` changes sign along the meridian `φ`.
    fn im_alpha_zero(&self, phi: T) -> Option<T> {
        let c1 = self.a(phi).im;
        let c2 = self.c.im;
        // c1 cos t + c2 sin t = 0
        let t = (-c1).atan2(c2);
        let t = if t < T::zero() { t + T::PI() } else { t };
        (t > T::zero() && t < T::FRAC_PI_2()).then_some(t)
    }
}

pub(crate) fn sorted_breakpoints<T: Real>(lo: T, hi: T, mut extra: Vec<T>) -> Vec<T> {
    extra.retain(|&x| x > lo && x < hi && x.is_finite());
    extra.push(lo);
    extra.push(hi);
    extra.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let min_gap = (hi - lo) * T::epsilon() * lit(64.0);
    let mut out: Vec<T> = Vec::with_capacity(extra.len());
    for x in extra {
        if out.last().is_none_or(|&l| x - l > min_gap) {
            out.push(x);
        } else if x == hi {
            *out.last_mut().unwrap() = hi;
        }
    }
    out
}

/// Geometric layer points `center ± scale·{1/8, 1/2, 2, 8, 32}`.
pub(crate) fn layer_points<T: Real>(center: T, scale: T) -> impl Iterator<Item = T> {
    [0.125, 0.5, 2.0, 8.0, 32.0].into_iter().flat_map(move |k| {
        let d = scale * lit::<T>(k);
        [center - d, center + d]
    })
}

fn tolerance<T: Real>(q: &QuadratureSpec<T>, abs: T) -> Tolerance<T> {
    Tolerance::new(abs, q.rel_tol, q.max_subdivisions)
}

/// Meridian integral `π/R + ∫_0^{π/2} [I(ξ̂) + I(-ξ̂)] cos t dt` at azimuth
/// `φ` of the `x̂`-aligned frame. `G_ζ` is its integral over `φ ∈ [0, 2π)`.
pub fn meridian_integral<T: Real>(
    p: &FieldPoint<T>,
    d: &DirectionSpec<T>,
    phi: T,
    q: &QuadratureSpec<T>,
) -> Result<Estimate<T>> {
    let geo = AlignedGeometry::new(p, d);
    let inner = meridian_pair_integral(&geo, p, d, phi, q, q.abs_tol)?;
    Ok(Estimate::new(inner.value + re(T::PI() / p.r), inner.err))
}

fn meridian_pair_integral<T: Real>(
    geo: &AlignedGeometry<T>,
    p: &FieldPoint<T>,
    d: &DirectionSpec<T>,
    phi: T,
    q: &QuadratureSpec<T>,
    abs_tol: T,
) -> Result<Estimate<T>> {
    let a_phi = geo.a(phi);
    let scale = T::one() / (d.s * p.r);
    let mut extra: Vec<T> = layer_points(T::zero(), scale).collect();
    if let Some(t0) = geo.im_alpha_zero(phi) {
        extra.push(t0);
        extra.extend(layer_points(t0, scale));
    }
    for &(t, _) in &geo.alpha_zeros {
        extra.push(t);
    }
    let breaks = sorted_breakpoints(T::zero(), T::FRAC_PI_2(), extra);
    integrate(
        |t: T| {
            let (st, ct) = t.sin_cos();
            if st == T::zero() {
                return Ok(Complex::zero());
            }
            let alpha = a_phi * ct + geo.c * st;
            let k = RadialKernelParams {
                r: p.r,
                s: d.s,
                alpha,
                beta: st,
            };
            Ok(antipodal_pair(&k) * ct)
        },
        &breaks,
        tolerance(q, abs_tol),
    )
}

/// `G_ζ(x)` in the normalization of the bare Fourier integral (see
/// [`Normalization`]); nested adaptive quadrature in the `x̂`-aligned frame.
pub fn g_zeta_fullspace<T: Real>(
    p: &FieldPoint<T>,
    d: &DirectionSpec<T>,
    q: &QuadratureSpec<T>,
) -> Result<Estimate<T>> {
    q.validate()?;
    let geo = AlignedGeometry::new(p, d);
    let scale = T::one() / (d.s * p.r);
    let mut extra = Vec::new();
    for z in geo.im_a_zeros() {
        extra.push(z);
        for x in layer_points(z, scale) {
            extra.push(crate::geometry::reduce_azimuth(x));
        }
    }
    for &(_, phi) in &geo.alpha_zeros {
        extra.push(phi);
    }
    let breaks = sorted_breakpoints(T::zero(), T::TAU(), extra);
    let inner_tol = q.abs_tol / T::TAU();
    let mut inner_err = T::zero();
    let outer = integrate(
        |phi: T| {
            let e = meridian_pair_integral(&geo, p, d, phi, q, inner_tol)?;
            inner_err = inner_err.max(e.err);
            Ok(e.value)
        },
        &breaks,
        tolerance(q, q.abs_tol),
    )?;
    let value = outer.value + re(lit::<T>(2.0) * T::PI() * T::PI() / p.r);
    Ok(Estimate::new(value, outer.err + inner_err * T::TAU()))
}

/// Angular coefficient `∫ dΩ α^{-k} (β + i0)^{-(k+1)}` of the term-by-term
/// integrated series; only `k = 1` is an ordinary function of the field point.
/// `G_ζ ≈ -coefficient / (2 R² s)`.
pub fn expansion_coefficient<T: Real>(
    p: &FieldPoint<T>,
    d: &DirectionSpec<T>,
    k: usize,
    q: &QuadratureSpec<T>,
) -> Result<Estimate<T>> {
    match k {
        0 => {
            return Err(Error::Domain(
                "the term-by-term series starts at k = 1".into(),
            ))
        }
        1 => {}
        _ => return Err(Error::UnsupportedOrder(k)),
    }
    q.validate()?;
    let geo = AlignedGeometry::new(p, d);
    let c = geo.c;
    let two = lit::<T>(2.0);

    // Per meridian: ⟨(u + i0)^{-2}, h⟩ over u ∈ [-1, 1] with h = 1/α, as the
    // Hadamard finite part ∫_0^1 (h(u) + h(-u) - 2h(0))/u² du - 2h(0) plus
    // iπ⟨δ', h⟩ = iπ c/a². Evaluated in t with u = sin t.
    let meridian = |phi: T, abs_tol: T| -> Result<Estimate<T>> {
        let a = geo.a(phi);
        if a.norm() < q.beta_min {
            return Err(Error::Singularity(format!(
                "α vanishes on the caustic circle at φ = {phi}"
            )));
        }
        let extra: Vec<T> = geo.alpha_zeros.iter().map(|&(t, _)| t).collect();
        let breaks = sorted_breakpoints(T::zero(), T::FRAC_PI_2(), extra);
        let fp = integrate(
            |t: T| {
                let (u, sigma) = t.sin_cos();
                // (h(u) + h(-u) - 2h(0))/u² without cancellation
                let num = (a * a * (sigma / (T::one() + sigma)) + c * c) * two;
                let den = a * (a * a * (sigma * sigma) - c * c * (u * u));
                Ok(num / den * sigma)
            },
            &breaks,
            tolerance(q, abs_tol),
        )?;
        let boundary = -(a.inv() * two) + imag_unit::<T>() * T::PI() * c / (a * a);
        Ok(Estimate::new(fp.value + boundary, fp.err))
    };

    let mut extra: Vec<T> = geo
        .alpha_zeros
        .iter()
        .map(|&(_, phi)| phi % T::PI())
        .collect();
    extra.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let breaks = sorted_breakpoints(T::zero(), T::PI(), extra);
    let inner_tol = q.abs_tol / T::TAU();
    let mut inner_err = T::zero();
    let outer = integrate(
        |phi: T| {
            let e1 = meridian(phi, inner_tol)?;
            let e2 = meridian(phi + T::PI(), inner_tol)?;
            inner_err = inner_err.max(e1.err + e2.err);
            Ok(e1.value + e2.value)
        },
        &breaks,
        tolerance(q, q.abs_tol),
    )?;
    Ok(Estimate::new(outer.value, outer.err + inner_err * T::PI()))
}

/// Leading term `-C1/(2R²s)` of the large-`s` expansion of `G_ζ`.
pub fn first_term<T: Real>(coefficient: Complex<T>, r: T, s: T) -> Complex<T> {
    -coefficient / (lit::<T>(2.0) * r * r * s)
}
