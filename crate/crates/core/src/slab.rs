//! Faddeev–Green function of the Helmholtz slab `0 < z < H` with a Dirichlet
//! wall at `z = 0` and a Neumann-type wall at `z = H`.
//!
//! The horizontal kernel `M_ν(φ) = ∫_0^∞ e^{-iR cos(θ-φ) r} / (r² - 2 a s r - λ_ν²) dr`
//! with `a = cos φ + i ℓ̇ sin φ` is evaluated by partial fractions over the
//! roots of the quadratic. The textbook closed form with the `(α+β_ν)/(2β)`
//! prefactor, its principal term and the angular factor `g` are evaluated as
//! written for comparison; see [`crate::harness`] for the discrepancy report.

use num_complex::Complex;
use num_traits::Zero;

use crate::complex_ei::ei;
use crate::error::{Error, Result};
use crate::fullspace::{layer_points, shifted_exponential_integral, sorted_breakpoints};
use crate::geometry::reduce_azimuth;
use crate::oracle::QuadratureSpec;
use crate::quadrature::{integrate, integrate_plain, Tolerance};
use crate::scalar::{imag_unit, lit, re, Estimate, Real};

/// Slab geometry and the spectral parameter `ζ = (s, i s ℓ̇, m)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlabConfig<T: Real> {
    pub h: T,
    pub k0: T,
    pub m: Complex<T>,
    pub ell_dot: T,
    pub source: [T; 3],
}

impl<T: Real> SlabConfig<T> {
    pub fn new(h: T, k0: T, m: Complex<T>, ell_dot: T, source: [T; 3]) -> Result<Self> {
        let cfg = Self {
            h,
            k0,
            m,
            ell_dot,
            source,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Builds the configuration with `m = s·ṁ`.
    pub fn with_scaled_m(
        h: T,
        k0: T,
        m_dot: Complex<T>,
        s: T,
        ell_dot: T,
        source: [T; 3],
    ) -> Result<Self> {
        Self::new(h, k0, m_dot * s, ell_dot, source)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > T::zero()) || !self.h.is_finite() {
            return Err(Error::Config(format!(
                "slab height must be positive, got {}",
                self.h
            )));
        }
        if !(self.k0 >= T::zero()) || !self.k0.is_finite() {
            return Err(Error::Config(format!(
                "k0 must be non-negative, got {}",
                self.k0
            )));
        }
        let z0 = self.source[2];
        if !(z0 > T::zero() && z0 < self.h) {
            return Err(Error::Config(format!(
                "source height {z0} outside (0, {})",
                self.h
            )));
        }
        if !self.ell_dot.is_finite() || (self.ell_dot.abs() - T::one()).abs() < lit(1e-12) {
            return Err(Error::Config(format!(
                "ell_dot = {} makes 1 - ell_dot^2 vanish",
                self.ell_dot
            )));
        }
        if !self.m.re.is_finite() || !self.m.im.is_finite() {
            return Err(Error::Config("m must be finite".into()));
        }
        Ok(())
    }

    pub fn z0(&self) -> T {
        self.source[2]
    }

    /// `ṁ = m/s`.
    pub fn m_dot(&self, s: T) -> Complex<T> {
        self.m / s
    }

    /// Default truncation: `(n + 1/2)π/H ≥ 20·max(|m|, k0)`, at least 4 modes.
    pub fn default_modes(&self) -> usize {
        let need = lit::<T>(20.0) * self.m.norm().max(self.k0) * self.h / T::PI() - lit(0.5);
        need.ceil().to_usize().unwrap_or(0).max(4)
    }
}

/// How `α` is read in the textbook closed form and principal term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AlphaConvention {
    /// `α = cos φ + i ℓ̇ sin φ`, the reading under which `β_ν² = α² - (1-ℓ̇) + ρ_ν²/s²` is consistent.
    #[default]
    Unit,
    /// `α = s (cos φ + i ℓ̇ sin φ)`, literally as printed.
    Scaled,
}

impl std::str::FromStr for AlphaConvention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unit" => Ok(Self::Unit),
            "scaled" => Ok(Self::Scaled),
            other => Err(Error::Config(format!(
                "unknown alpha convention {other:?} (expected unit|scaled)"
            ))),
        }
    }
}

/// Mode `ν` of the vertical problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlabModeData<T: Real> {
    pub nu: i64,
    /// `(ν + 1/2) π / H`.
    pub mu: T,
    pub lambda_sq: Complex<T>,
    pub lambda_nu: Complex<T>,
    pub rho_nu: T,
}

/// Horizontal field point relative to the source, and height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlabFieldPoint<T: Real> {
    pub r: T,
    pub theta: T,
    pub z: T,
}

impl<T: Real> SlabFieldPoint<T> {
    pub fn new(r: T, theta: T, z: T, cfg: &SlabConfig<T>) -> Result<Self> {
        if !(r > T::zero()) || !r.is_finite() {
            return Err(Error::Domain(format!("R must be positive, got {r}")));
        }
        if !theta.is_finite() {
            return Err(Error::Angle {
                name: "theta",
                value: theta.to_f64().unwrap_or(f64::NAN),
            });
        }
        if !(z > T::zero() && z < cfg.h) {
            return Err(Error::Domain(format!("z = {z} outside (0, {})", cfg.h)));
        }
        Ok(Self {
            r,
            theta: reduce_azimuth(theta),
            z,
        })
    }
}

fn mode_mu<T: Real>(nu: i64, h: T) -> T {
    (lit::<T>(nu as f64) + lit(0.5)) * T::PI() / h
}

pub fn lambda_nu<T: Real>(nu: i64, cfg: &SlabConfig<T>) -> SlabModeData<T> {
    let mu = mode_mu(nu, cfg.h);
    let lambda_sq = cfg.m * cfg.m + re(mu * mu);
    SlabModeData {
        nu,
        mu,
        lambda_sq,
        lambda_nu: lambda_sq.sqrt(),
        rho_nu: (cfg.k0 * cfg.k0 + mu * mu).sqrt(),
    }
}

/// `α`, `β_ν` and `β₀` of the textbook closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlabKernelParams<T: Real> {
    pub alpha: Complex<T>,
    pub beta_nu: Complex<T>,
    pub beta_0: Complex<T>,
}

fn on_negative_axis<T: Real>(z: Complex<T>) -> bool {
    z.im == T::zero() && z.re <= T::zero()
}

fn sector_root<T: Real>(alpha: Complex<T>, sq: Complex<T>, phi: T) -> Result<Complex<T>> {
    let i = imag_unit::<T>();
    for b in [sq.sqrt(), -sq.sqrt()] {
        if !on_negative_axis(i * (alpha + b)) && !on_negative_axis(i * (alpha - b)) {
            return Ok(b);
        }
    }
    Err(Error::Branch {
        phi: phi.to_f64().unwrap_or(f64::NAN),
    })
}

fn horizontal_direction<T: Real>(phi: T, ell_dot: T) -> Complex<T> {
    Complex::new(phi.cos(), ell_dot * phi.sin())
}

fn convention_alpha<T: Real>(phi: T, s: T, ell_dot: T, conv: AlphaConvention) -> Complex<T> {
    let a = horizontal_direction(phi, ell_dot);
    match conv {
        AlphaConvention::Unit => a,
        AlphaConvention::Scaled => a * s,
    }
}

pub fn slab_kernel_params<T: Real>(
    phi: T,
    s: T,
    nu: i64,
    cfg: &SlabConfig<T>,
    conv: AlphaConvention,
) -> Result<SlabKernelParams<T>> {
    if !(s > T::zero()) || !s.is_finite() {
        return Err(Error::Domain(format!("s must be positive, got {s}")));
    }
    let alpha = convention_alpha(phi, s, cfg.ell_dot, conv);
    let shift = re(T::one() - cfg.ell_dot);
    let rho = lambda_nu(nu, cfg).rho_nu;
    let beta_nu = sector_root(alpha, alpha * alpha - shift + re(rho * rho / (s * s)), phi)?;
    let beta_0 = sector_root(alpha, alpha * alpha - shift, phi)?;
    Ok(SlabKernelParams {
        alpha,
        beta_nu,
        beta_0,
    })
}

/// Guards for [`m_nu_closed`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelGuards<T> {
    /// Smallest admissible `|cos(θ-φ)|`.
    pub cos_margin: T,
    /// Smallest admissible `|r₊ - r₋|`.
    pub root_floor: T,
}

impl<T: Real> Default for KernelGuards<T> {
    fn default() -> Self {
        Self {
            cos_margin: lit(1e-6),
            root_floor: lit(1e-10),
        }
    }
}

fn quadratic_roots<T: Real>(
    phi: T,
    s: T,
    lambda_sq: Complex<T>,
    ell_dot: T,
) -> (Complex<T>, Complex<T>) {
    let a = horizontal_direction(phi, ell_dot) * s;
    let disc = (a * a + lambda_sq).sqrt();
    (a + disc, a - disc)
}

/// `M_ν(φ)` by partial fractions: `(J(-r₊) - J(-r₋)) / (r₊ - r₋)` with
/// `J(A) = ∫_0^∞ e^{ibr}/(r + A) dr`, `b = -R cos(θ-φ)`.
pub fn m_nu_closed<T: Real>(
    phi: T,
    p: &SlabFieldPoint<T>,
    s: T,
    nu: i64,
    cfg: &SlabConfig<T>,
    guards: &KernelGuards<T>,
) -> Result<Estimate<T>> {
    let c = (p.theta - phi).cos();
    if c.abs() < guards.cos_margin || c == T::zero() {
        return Err(Error::Singularity(format!(
            "cos(theta - phi) = {c} inside the margin"
        )));
    }
    let (rp, rm) = quadratic_roots(phi, s, lambda_nu(nu, cfg).lambda_sq, cfg.ell_dot);
    let gap = (rp - rm).norm();
    if gap < guards.root_floor {
        return Err(Error::DegenerateRoots {
            separation: gap.to_f64().unwrap_or(f64::NAN),
        });
    }
    let b = -p.r * c;
    let jp = shifted_exponential_integral(-rp, b)?;
    let jm = shifted_exponential_integral(-rm, b)?;
    Ok((jp - jm).scale((rp - rm).inv()))
}

/// The textbook closed form with `β` read as `β_ν`.
pub fn m_nu_printed<T: Real>(
    phi: T,
    p: &SlabFieldPoint<T>,
    s: T,
    nu: i64,
    cfg: &SlabConfig<T>,
    conv: AlphaConvention,
) -> Result<Complex<T>> {
    let k = slab_kernel_params(phi, s, nu, cfg, conv)?;
    let (alpha, beta) = (k.alpha, k.beta_nu);
    let i = imag_unit::<T>();
    let rc = p.r * (p.theta - phi).cos();
    let lower = ei(i * s * (alpha - beta) * rc)?.value;
    let upper = ei(i * s * (alpha + beta) * rc)?.value;
    let bracket = (i * s * beta * rc).exp() * lower - (-i * s * beta * rc).exp() * upper;
    Ok((alpha + beta) / (beta * lit::<T>(2.0)) * (-i * alpha * rc * s).exp() * bracket)
}

/// Principal term `-(i/R)(α + √(α² - (1-ℓ̇)))/(1-ℓ̇²) · 1/cos(θ-φ) · 1/s`, as written.
pub fn m_nu_principal<T: Real>(
    phi: T,
    p: &SlabFieldPoint<T>,
    s: T,
    cfg: &SlabConfig<T>,
    conv: AlphaConvention,
) -> Result<Complex<T>> {
    let c = (p.theta - phi).cos();
    if c == T::zero() {
        return Err(Error::Singularity(format!(
            "cos(theta - phi) = 0 at phi = {phi}"
        )));
    }
    Ok(principal_numerator(phi, s, cfg, conv)? / (c * p.r))
}

fn principal_numerator<T: Real>(
    phi: T,
    s: T,
    cfg: &SlabConfig<T>,
    conv: AlphaConvention,
) -> Result<Complex<T>> {
    let k = slab_kernel_params(phi, s, 0, cfg, conv)?;
    let l = cfg.ell_dot;
    Ok(-imag_unit::<T>() * (k.alpha + k.beta_0) / (p_scale(l) * s))
}

fn p_scale<T: Real>(l: T) -> T {
    T::one() - l * l
}

/// Azimuths where one root of the quadratic crosses the positive real axis;
/// `M_ν` jumps there by the residue of the crossing pole.
fn root_crossings<T: Real>(s: T, lambda_sq: Complex<T>, ell_dot: T) -> Vec<T> {
    const SAMPLES: usize = 1440;
    let tau = T::TAU();
    let h = |phi: T| {
        let (rp, rm) = quadratic_roots(phi, s, lambda_sq, ell_dot);
        rp.im * rm.im
    };
    let mut out = vec![T::zero(), T::PI()];
    let step = tau / lit(SAMPLES as f64);
    let mut prev = h(T::zero());
    for k in 1..=SAMPLES {
        let x = step * lit(k as f64);
        let cur = h(x);
        if prev * cur < T::zero() {
            let (mut lo, mut hi, mut flo) = (x - step, x, prev);
            for _ in 0..60 {
                let mid = (lo + hi) / lit(2.0);
                let fm = h(mid);
                if fm * flo > T::zero() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            out.push((lo + hi) / lit(2.0));
        }
        prev = cur;
    }
    out
}

fn cos_zeros<T: Real>(theta: T) -> [T; 2] {
    [
        reduce_azimuth(theta + T::FRAC_PI_2()),
        reduce_azimuth(theta - T::FRAC_PI_2()),
    ]
}

/// `I_ν = ∫_0^{2π} M_ν(φ) dφ`. `M_ν` stays bounded where `cos(θ-φ)` vanishes,
/// so the two zeros are handled as breakpoints rather than excised.
pub fn i_nu_quadrature<T: Real>(
    p: &SlabFieldPoint<T>,
    s: T,
    nu: i64,
    cfg: &SlabConfig<T>,
    q: &QuadratureSpec<T>,
) -> Result<Estimate<T>> {
    q.validate()?;
    let mode = lambda_nu(nu, cfg);
    let guards = KernelGuards {
        cos_margin: T::zero(),
        root_floor: T::min_positive_value(),
    };
    let scale = (s * p.r).recip().min(lit(0.05));
    let mut extra = Vec::new();
    for c in cos_zeros(p.theta)
        .into_iter()
        .chain(root_crossings(s, mode.lambda_sq, cfg.ell_dot))
    {
        extra.push(c);
        extra.extend(layer_points(c, scale));
    }
    let breaks = sorted_breakpoints(T::zero(), T::TAU(), extra);
    let tol = Tolerance::new(q.abs_tol, q.rel_tol, q.max_subdivisions);
    integrate(
        |phi| m_nu_closed(phi, p, s, nu, cfg, &guards).map(|e| e.value),
        &breaks,
        tol,
    )
}

/// `I_ν` recomputed by symmetric excision of the cosine zeros. Each value
/// extrapolates excision radii `r, r/2, r/4` against `1, r, r²` (the kernel is
/// bounded but not smooth there); `at_eps` uses `r = ε`, `at_half_eps` `r = ε/2`,
/// where `ε = min(pv_epsilon, 0.1/(sR))` keeps the window inside the kernel's
/// own angular scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExcisionDiagnostic<T: Real> {
    pub at_eps: Estimate<T>,
    pub at_half_eps: Estimate<T>,
}

impl<T: Real> ExcisionDiagnostic<T> {
    pub fn relative_change(&self) -> T {
        (self.at_eps.value - self.at_half_eps.value).norm() / self.at_half_eps.value.norm()
    }
}

pub fn i_nu_excision_diagnostic<T: Real>(
    p: &SlabFieldPoint<T>,
    s: T,
    nu: i64,
    cfg: &SlabConfig<T>,
    q: &QuadratureSpec<T>,
) -> Result<ExcisionDiagnostic<T>> {
    q.validate()?;
    let mode = lambda_nu(nu, cfg);
    let guards = KernelGuards {
        cos_margin: T::zero(),
        root_floor: T::min_positive_value(),
    };
    let zeros = cos_zeros(p.theta);
    let crossings = root_crossings(s, mode.lambda_sq, cfg.ell_dot);
    let tol = Tolerance::new(q.abs_tol, q.rel_tol, q.max_subdivisions);
    let tau = T::TAU();
    let excised = |radius: T| -> Result<Estimate<T>> {
        // Walk from just past the first zero to just before it, one full turn.
        let start = zeros[0].min(zeros[1]);
        let other = zeros[0].max(zeros[1]);
        let mut total = Estimate::exact(Complex::zero());
        for (a, b) in [
            (start + radius, other - radius),
            (other + radius, start + tau - radius),
        ] {
            let extra: Vec<T> = crossings.iter().flat_map(|&c| [c, c + tau]).collect();
            let breaks = sorted_breakpoints(a, b, extra);
            total = total
                + integrate(
                    |phi| m_nu_closed(reduce_azimuth(phi), p, s, nu, cfg, &guards).map(|e| e.value),
                    &breaks,
                    tol,
                )?;
        }
        Ok(total)
    };
    let extrapolate = |radius: T| -> Result<Estimate<T>> {
        let q1 = excised(radius)?;
        let q2 = excised(radius / lit(2.0))?;
        let q4 = excised(radius / lit(4.0))?;
        let value =
            (q4.value * lit::<T>(8.0) - q2.value * lit::<T>(6.0) + q1.value) / lit::<T>(3.0);
        Ok(Estimate::new(
            value,
            (value - q4.value).norm() * lit(0.01) + q1.err + q2.err + q4.err,
        ))
    };
    let eps = q.pv_epsilon.min(lit::<T>(0.1) / (s * p.r));
    let at_eps = extrapolate(eps)?;
    let at_half_eps = extrapolate(eps / lit(2.0))?;
    Ok(ExcisionDiagnostic {
        at_eps,
        at_half_eps,
    })
}

/// `PV ∫_0^{2π} f(φ)/cos(θ-φ) dφ` by folding `φ ↔ φ + π` and then `t ↔ -t`
/// about a zero of the cosine, which leaves a bounded integrand.
pub fn pv_over_cos<T, F>(mut f: F, theta: T, tol: Tolerance<T>) -> Result<Estimate<T>>
where
    T: Real,
    F: FnMut(T) -> Result<Complex<T>>,
{
    // cos(θ - φ0 - t) = -sin t.
    let phi0 = theta + T::FRAC_PI_2();
    let pi = T::PI();
    let mut h = |t: T| -> Result<Complex<T>> { Ok(f(phi0 + t)? - f(phi0 + t + pi)?) };
    integrate(
        |t: T| Ok(-(h(t)? - h(-t)?) / t.sin()),
        &[T::zero(), T::FRAC_PI_4(), T::FRAC_PI_2()],
        tol,
    )
}

/// Principal-value `φ`-integral of [`m_nu_principal`].
pub fn i_nu_asymptotic<T: Real>(
    p: &SlabFieldPoint<T>,
    s: T,
    cfg: &SlabConfig<T>,
    conv: AlphaConvention,
    tol: Tolerance<T>,
) -> Result<Estimate<T>> {
    Ok(
        pv_over_cos(|phi| principal_numerator(phi, s, cfg, conv), p.theta, tol)?
            .scale(re(p.r.recip())),
    )
}

/// The two angular integrals `PV∫ a/cos(θ-φ)` and `PV∫ (a² - (1-ℓ̇)²)/cos(θ-φ)`,
/// `a = cos φ + i ℓ̇ sin φ`, exactly as printed.
pub fn angular_integrals<T: Real>(
    theta: T,
    ell_dot: T,
    tol: Tolerance<T>,
) -> Result<(Estimate<T>, Estimate<T>)> {
    let shift = (T::one() - ell_dot) * (T::one() - ell_dot);
    let first = pv_over_cos(|phi| Ok(horizontal_direction(phi, ell_dot)), theta, tol)?;
    let second = pv_over_cos(
        |phi| {
            let a = horizontal_direction(phi, ell_dot);
            Ok(a * a - re(shift))
        },
        theta,
        tol,
    )?;
    Ok((first, second))
}

/// `-(i/(1-ℓ̇²))(1/R)(first + second)`: the coefficient of `1/s` obtained by
/// combining the two angular integrals.
pub fn angular_combination<T: Real>(
    r: T,
    theta: T,
    ell_dot: T,
    tol: Tolerance<T>,
) -> Result<Estimate<T>> {
    let (a, b) = angular_integrals(theta, ell_dot, tol)?;
    Ok((a + b).scale(-imag_unit::<T>() / (p_scale(ell_dot) * r)))
}

/// Closed-form angular factor `g(R, θ; ℓ̇)`, as written.
pub fn g_angular<T: Real>(r: T, theta: T, ell_dot: T) -> Result<Complex<T>> {
    let theta = reduce_azimuth(theta);
    let c = theta.cos();
    if c.abs() < T::epsilon() * lit(4.0) {
        return Err(Error::Singularity(format!(
            "log|cos theta| diverges at theta = {theta}"
        )));
    }
    let i = imag_unit::<T>();
    let chi = if theta > T::FRAC_PI_2() && theta < lit::<T>(1.5) * T::PI() {
        T::one()
    } else {
        T::zero()
    };
    let bracket = re(T::TAU() - theta) - i * (re(c.abs().ln()) - i * (T::PI() * chi));
    Ok(-i / p_scale(ell_dot) * Complex::from_polar(r.recip(), theta) * bracket)
}

/// Smooth test function on `(0, H)` for the distributional checks.
pub trait TestFunction<T: Real> {
    fn value(&self, z: T) -> T;
    /// Closed support `[lo, hi]`.
    fn support(&self) -> (T, T);
}

/// `height · exp(1 - 1/(1 - u²))`, `u = (z - center)/width`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump<T> {
    pub center: T,
    pub width: T,
    pub height: T,
}

impl<T: Real> TestFunction<T> for Bump<T> {
    fn value(&self, z: T) -> T {
        let u = (z - self.center) / self.width;
        if u.abs() >= T::one() {
            return T::zero();
        }
        self.height * (T::one() - (T::one() - u * u).recip()).exp()
    }

    fn support(&self) -> (T, T) {
        (self.center - self.width, self.center + self.width)
    }
}

fn check_support<T: Real, F: TestFunction<T> + ?Sized>(
    psi: &F,
    cfg: &SlabConfig<T>,
) -> Result<(T, T)> {
    let (lo, hi) = psi.support();
    if !(lo > T::zero() && hi < cfg.h && lo < hi) {
        return Err(Error::Domain(format!(
            "test function support [{lo}, {hi}] not inside (0, {})",
            cfg.h
        )));
    }
    Ok((lo, hi))
}

/// `⟨f(·; z0), ψ⟩` for the image comb: the sum of the cosine-weighted images
/// `2νH - z0` and `z0 + 2νH`, `|ν| ≤ n_images`, that land in the support.
pub fn f_pairing<T: Real, F: TestFunction<T> + ?Sized>(
    psi: &F,
    cfg: &SlabConfig<T>,
    n_images: usize,
) -> Result<T> {
    let (lo, hi) = check_support(psi, cfg)?;
    if n_images == 0 {
        return Err(Error::Domain("n_images must be at least 1".into()));
    }
    let (h, z0) = (cfg.h, cfg.z0());
    let two_h = lit::<T>(2.0) * h;
    let quarter = T::PI() / two_h;
    let n = n_images as i64;
    let mut total = T::zero();
    for nu in -n..=n {
        let shift = two_h * lit(nu as f64);
        for (z, weight) in [
            (shift - z0, (quarter * (shift)).cos()),
            (z0 + shift, -(quarter * shift).cos()),
        ] {
            if z >= lo && z <= hi {
                total = total + weight * psi.value(z);
            }
        }
    }
    Ok(total)
}

/// `sin((ν + 1/2) π z / H)`.
pub fn vertical_mode<T: Real>(nu: i64, z: T, h: T) -> T {
    (mode_mu(nu, h) * z).sin()
}

/// `d/dz sin((ν + 1/2) π z / H)`, written as `μ (-1)^ν sin(μ (H - z))` so that
/// it is exactly zero at `z = H`.
pub fn vertical_mode_derivative<T: Real>(nu: i64, z: T, h: T) -> T {
    let mu = mode_mu(nu, h);
    let sign = if nu.rem_euclid(2) == 0 {
        T::one()
    } else {
        -T::one()
    };
    mu * sign * (mu * (h - z)).sin()
}

/// `Σ_{ν=-n}^{n-1} sin(μ_ν z0) sin(μ_ν z)`.
pub fn vertical_factor<T: Real>(z: T, z0: T, h: T, n_modes: usize) -> T {
    let n = n_modes as i64;
    (-n..n).fold(T::zero(), |acc, nu| {
        acc + vertical_mode(nu, z0, h) * vertical_mode(nu, z, h)
    })
}

pub fn vertical_factor_derivative<T: Real>(z: T, z0: T, h: T, n_modes: usize) -> T {
    let n = n_modes as i64;
    (-n..n).fold(T::zero(), |acc, nu| {
        acc + vertical_mode(nu, z0, h) * vertical_mode_derivative(nu, z, h)
    })
}

fn mode_coefficient<T: Real, F: TestFunction<T> + ?Sized>(
    psi: &F,
    mu: T,
    support: (T, T),
) -> Result<T> {
    let mid = (support.0 + support.1) / lit(2.0);
    // high modes give coefficients near roundoff; set the floor by ψ's size
    let scale = psi.value(mid).abs() * (support.1 - support.0);
    let tol = Tolerance::new(
        lit::<T>(1e-13) * scale.max(T::min_positive_value()),
        lit(1e-12),
        2000,
    );
    let est = integrate_plain(
        |z| re((mu * z).sin() * psi.value(z)),
        &[support.0, mid, support.1],
        tol,
    )?;
    Ok(est.value.re)
}

/// `⟨Σ_{|ν|≤N} abel^{|ν|} sin(μ_ν z0) sin(μ_ν ·), ψ⟩` by quadrature in `z`.
pub fn eigen_sum_pairing<T: Real, F: TestFunction<T> + ?Sized>(
    psi: &F,
    cfg: &SlabConfig<T>,
    n_modes: usize,
    abel: T,
) -> Result<T> {
    let support = check_support(psi, cfg)?;
    if n_modes == 0 {
        return Err(Error::Domain("n_modes must be at least 1".into()));
    }
    if !(abel > T::zero() && abel <= T::one()) {
        return Err(Error::Domain(format!("Abel factor {abel} outside (0, 1]")));
    }
    let (h, z0) = (cfg.h, cfg.z0());
    let mut total = T::zero();
    let mut weight = T::one();
    for nu in 0..=n_modes as i64 {
        let mu = mode_mu(nu, h);
        let term = (mu * z0).sin() * mode_coefficient(psi, mu, support)?;
        // ν and -ν-1 carry the same product of sines; damping uses |ν|.
        let mirror = if nu < n_modes as i64 {
            weight * abel
        } else {
            T::zero()
        };
        total = total + term * (weight + mirror);
        weight = weight * abel;
    }
    Ok(total)
}

/// Abel factors used by [`eigen_sum_abel_limit`].
pub const ABEL_FACTORS: [f64; 3] = [0.99, 0.995, 0.999];

/// Quadratic extrapolation of [`eigen_sum_pairing`] in `1 - abel` to `abel = 1`.
pub fn eigen_sum_abel_limit<T: Real, F: TestFunction<T> + ?Sized>(
    psi: &F,
    cfg: &SlabConfig<T>,
    n_modes: usize,
) -> Result<Estimate<T>> {
    let xs: Vec<T> = ABEL_FACTORS.iter().map(|&a| lit::<T>(1.0 - a)).collect();
    let ys = ABEL_FACTORS
        .iter()
        .map(|&a| eigen_sum_pairing(psi, cfg, n_modes, lit(a)))
        .collect::<Result<Vec<T>>>()?;
    let lagrange = |pts: &[usize]| {
        pts.iter().fold(T::zero(), |acc, &j| {
            let w = pts
                .iter()
                .filter(|&&k| k != j)
                .fold(T::one(), |w, &k| w * (-xs[k]) / (xs[j] - xs[k]));
            acc + w * ys[j]
        })
    };
    let quadratic = lagrange(&[0, 1, 2]);
    let linear = lagrange(&[1, 2]);
    let err = (quadratic - linear).abs();
    if err > lit::<T>(0.1) * quadratic.abs().max(ys[2].abs()) {
        return Err(Error::NonConvergence {
            what: "Abel extrapolation".into(),
            err_est: err.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(Estimate::new(re(quadratic), err))
}

/// Truncated eigenfunction series together with its tail estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct SlabSeries<T: Real> {
    pub value: Estimate<T>,
    /// Magnitude of the last mode pair included.
    pub tail: T,
    /// `I_ν` for `ν = 0, …, n_modes - 1` (`I_{-ν-1} = I_ν`).
    pub horizontal: Vec<Complex<T>>,
}

fn series_prefactor<T: Real>(cfg: &SlabConfig<T>) -> Complex<T> {
    let i = imag_unit::<T>();
    (i * cfg.m * cfg.z0()).exp() * (-(lit::<T>(2.0) * T::PI() * T::PI() * cfg.h).recip())
}

/// Sums `Σ_ν w_ν I_ν` over mode pairs with the prefactor applied; the weights
/// already include the `ν ↔ -ν-1` doubling.
fn sum_modes<T: Real>(
    p: &SlabFieldPoint<T>,
    s: T,
    cfg: &SlabConfig<T>,
    n_modes: usize,
    q: &QuadratureSpec<T>,
    weight: impl Fn(i64) -> Result<T>,
) -> Result<SlabSeries<T>> {
    if n_modes == 0 {
        return Err(Error::Domain("n_modes must be at least 1".into()));
    }
    let mut total = Estimate::exact(Complex::zero());
    let mut horizontal = Vec::with_capacity(n_modes);
    let mut first = T::zero();
    let mut last = T::zero();
    for nu in 0..n_modes as i64 {
        let i_nu = i_nu_quadrature(p, s, nu, cfg, q)?;
        horizontal.push(i_nu.value);
        let term = i_nu.scale(re(lit::<T>(2.0) * weight(nu)?));
        if nu == 0 {
            first = term.value.norm();
        }
        last = term.value.norm();
        total = total + term;
    }
    if n_modes > 2 && last > first && last > T::epsilon() * total.value.norm() {
        return Err(Error::NonConvergence {
            what: "slab mode series".into(),
            err_est: last.to_f64().unwrap_or(f64::NAN),
        });
    }
    let pre = series_prefactor(cfg);
    let value = Estimate::new(total.value, total.err + last).scale(pre);
    Ok(SlabSeries {
        value,
        tail: last * pre.norm(),
        horizontal,
    })
}

/// `G_ζ` at `p` from the first `n_modes` mode pairs `ν, -ν-1`.
pub fn g_zeta_slab_truncated<T: Real>(
    p: &SlabFieldPoint<T>,
    s: T,
    cfg: &SlabConfig<T>,
    n_modes: usize,
    q: &QuadratureSpec<T>,
) -> Result<SlabSeries<T>> {
    let (h, z0) = (cfg.h, cfg.z0());
    sum_modes(p, s, cfg, n_modes, q, |nu| {
        Ok(vertical_mode(nu, z0, h) * vertical_mode(nu, p.z, h))
    })
}

/// `⟨G_ζ(R, θ, ·), ψ⟩` over the vertical variable, truncated at `n_modes` pairs.
pub fn g_zeta_slab_paired<T: Real, F: TestFunction<T> + ?Sized>(
    psi: &F,
    p: &SlabFieldPoint<T>,
    s: T,
    cfg: &SlabConfig<T>,
    n_modes: usize,
    q: &QuadratureSpec<T>,
) -> Result<SlabSeries<T>> {
    let support = check_support(psi, cfg)?;
    let (h, z0) = (cfg.h, cfg.z0());
    sum_modes(p, s, cfg, n_modes, q, |nu| {
        let mu = mode_mu(nu, h);
        Ok((mu * z0).sin() * mode_coefficient(psi, mu, support)?)
    })
}
