//! Reference integration back-ends. These are deliberately slow and simple:
//! a bisecting Gauss–Legendre rule whose nodes are computed at start-up, an
//! algebraic tail map for semi-infinite ranges, contour rotation for
//! oscillatory kernels, and symmetric excision with Richardson extrapolation
//! for principal values. None of it shares code with the fast paths it checks.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{lit, Estimate, Real};

const GL_POINTS: usize = 16;

/// Tolerances, cut-offs and excision radii for every oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_subdivisions: usize,
    /// Half-width of the symmetric excision around principal-value poles.
    pub pv_epsilon: T,
    /// Rotation angle of the semi-infinite contour, in `(0, π/2)`.
    pub contour_angle: T,
    /// Distance along the real axis before the contour turns into the complex
    /// plane. Must exceed the real part of any pole inside the rotation sector.
    pub upper_cutoff: T,
    /// Caustic threshold `|β| >= beta_min` for the asymptotic coefficients.
    pub beta_min: T,
}

impl<T: Real> Default for QuadratureSpec<T> {
    fn default() -> Self {
        Self {
            abs_tol: lit(1e-12),
            rel_tol: lit(1e-10),
            max_subdivisions: 4000,
            pv_epsilon: lit(1e-2),
            contour_angle: lit(std::f64::consts::FRAC_PI_3),
            upper_cutoff: T::zero(),
            beta_min: lit(1e-3),
        }
    }
}

impl<T: Real> QuadratureSpec<T> {
    pub fn with_cutoff(mut self, cutoff: T) -> Self {
        self.upper_cutoff = cutoff;
        self
    }

    pub fn with_tolerances(mut self, abs_tol: T, rel_tol: T) -> Self {
        self.abs_tol = abs_tol;
        self.rel_tol = rel_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: T| x > T::zero() && x.is_finite();
        if !positive(self.abs_tol) || !positive(self.rel_tol) {
            return Err(Error::Config(
                "quadrature tolerances must be positive".into(),
            ));
        }
        if !positive(self.pv_epsilon) {
            return Err(Error::Config("pv_epsilon must be positive".into()));
        }
        if !(self.contour_angle > T::zero() && self.contour_angle < T::FRAC_PI_2()) {
            return Err(Error::Sector(format!(
                "contour angle {} not in (0, π/2)",
                self.contour_angle
            )));
        }
        if !(self.upper_cutoff >= T::zero()) {
            return Err(Error::Config("upper_cutoff must be non-negative".into()));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::Config("max_subdivisions must be positive".into()));
        }
        Ok(())
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration.
fn gauss_legendre<T: Real>(n: usize) -> Vec<(T, T)> {
    let mut out = Vec::with_capacity(n);
    let nf = T::from_usize(n).unwrap();
    for i in 0..n {
        let guess = T::PI() * (T::from_usize(i).unwrap() + lit(0.75)) / (nf + lit(0.5));
        let mut x = guess.cos();
        let mut dp = T::one();
        for _ in 0..100 {
            let (mut p0, mut p1) = (T::one(), x);
            for k in 2..=n {
                let kf = T::from_usize(k).unwrap();
                let p2 = ((lit::<T>(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - T::one());
            let dx = p1 / dp;
            x = x - dx;
            if dx.abs() <= T::epsilon() {
                break;
            }
        }
        let w = lit::<T>(2.0) / ((T::one() - x * x) * dp * dp);
        out.push((x, w));
    }
    out
}

fn gl_apply<T, F>(f: &mut F, rule: &[(T, T)], a: T, b: T) -> Result<Complex<T>>
where
    T: Real,
    F: FnMut(T) -> Result<Complex<T>>,
{
    let half = (b - a) / lit(2.0);
    let mid = (a + b) / lit(2.0);
    let mut acc = Complex::new(T::zero(), T::zero());
    for &(x, w) in rule {
        acc = acc + f(mid + half * x)? * w;
    }
    Ok(acc * half)
}

struct Piece<T: Real> {
    a: T,
    b: T,
    value: Complex<T>,
    err: T,
}

fn piece<T, F>(f: &mut F, rule: &[(T, T)], a: T, b: T) -> Result<Piece<T>>
where
    T: Real,
    F: FnMut(T) -> Result<Complex<T>>,
{
    let mid = (a + b) / lit(2.0);
    let whole = gl_apply(f, rule, a, b)?;
    let left = gl_apply(f, rule, a, mid)?;
    let right = gl_apply(f, rule, mid, b)?;
    let value = left + right;
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(Error::Domain("oracle integrand is not finite".into()));
    }
    let err = (value - whole).norm() + T::epsilon() * value.norm();
    Ok(Piece { a, b, value, err })
}

/// Adaptive bisection of a fallible integrand over `[a, b]`.
pub fn integrate_interval<T, F>(mut f: F, a: T, b: T, q: &QuadratureSpec<T>) -> Result<Estimate<T>>
where
    T: Real,
    F: FnMut(T) -> Result<Complex<T>>,
{
    if !(b > a) {
        return Ok(Estimate::exact(Complex::new(T::zero(), T::zero())));
    }
    let rule = gauss_legendre::<T>(GL_POINTS);
    let mut pieces = vec![piece(&mut f, &rule, a, b)?];
    loop {
        let total = pieces
            .iter()
            .fold(Complex::new(T::zero(), T::zero()), |acc, p| acc + p.value);
        let err = pieces.iter().fold(T::zero(), |acc, p| acc + p.err);
        if err <= q.abs_tol.max(q.rel_tol * total.norm()) {
            return Ok(Estimate::new(total, err));
        }
        if pieces.len() >= q.max_subdivisions {
            return Err(Error::MaxSubdivisions {
                limit: q.max_subdivisions,
                err_est: err.to_f64().unwrap_or(f64::NAN),
            });
        }
        let mut worst = 0;
        for (i, p) in pieces.iter().enumerate() {
            if p.err > pieces[worst].err {
                worst = i;
            }
        }
        let p = pieces.remove(worst);
        let mid = (p.a + p.b) / lit(2.0);
        if !(mid > p.a && mid < p.b) {
            return Ok(Estimate::new(total, err));
        }
        let right = piece(&mut f, &rule, mid, p.b)?;
        let left = piece(&mut f, &rule, p.a, mid)?;
        pieces.insert(worst, right);
        pieces.insert(worst, left);
    }
}

/// `∫_a^b f` for an infallible integrand.
pub fn integrate_adaptive<T, F>(mut f: F, a: T, b: T, q: &QuadratureSpec<T>) -> Result<Estimate<T>>
where
    T: Real,
    F: FnMut(T) -> Complex<T>,
{
    integrate_interval(|x| Ok(f(x)), a, b, q)
}

/// `∫_a^∞ f` through `x = a + t/(1 - t)`, `t ∈ [0, 1)`.
pub fn integrate_tail<T, F>(mut f: F, a: T, q: &QuadratureSpec<T>) -> Result<Estimate<T>>
where
    T: Real,
    F: FnMut(T) -> Complex<T>,
{
    integrate_interval(
        |t| {
            let one_minus = T::one() - t;
            let x = a + t / one_minus;
            let jac = T::one() / (one_minus * one_minus);
            let v = f(x) * jac;
            Ok(if v.re.is_finite() && v.im.is_finite() {
                v
            } else {
                Complex::new(T::zero(), T::zero())
            })
        },
        T::zero(),
        T::one(),
        q,
    )
}

/// `∫∫ f(x, y)` over `[x0, x1] × [y0, y1]`, nested adaptive rules.
pub fn integrate_rectangle<T, F>(
    mut f: F,
    x: (T, T),
    y: (T, T),
    q: &QuadratureSpec<T>,
) -> Result<Estimate<T>>
where
    T: Real,
    F: FnMut(T, T) -> Complex<T>,
{
    let mut inner_err = T::zero();
    let outer = integrate_interval(
        |xv| {
            let e = integrate_adaptive(|yv| f(xv, yv), y.0, y.1, q)?;
            inner_err = inner_err.max(e.err);
            Ok(e.value)
        },
        x.0,
        x.1,
        q,
    )?;
    Ok(Estimate::new(
        outer.value,
        outer.err + inner_err * (x.1 - x.0),
    ))
}

/// `∫_0^∞ f(r) dr` for an integrand oscillating like `e^{i·osc_rate·r}`.
///
/// The path follows the real axis up to `q.upper_cutoff`, then turns by
/// `sign(osc_rate)·q.contour_angle` where the oscillation becomes exponential
/// decay. `f` must be analytic in the swept sector; poles with real part
/// below the cut-off are harmless. `osc_rate = 0` integrates along the real
/// axis directly.
pub fn integrate_semiinfinite_oscillatory<T, F>(
    mut f: F,
    osc_rate: T,
    q: &QuadratureSpec<T>,
) -> Result<Estimate<T>>
where
    T: Real,
    F: FnMut(Complex<T>) -> Complex<T>,
{
    q.validate()?;
    if osc_rate == T::zero() {
        return integrate_tail(|x| f(Complex::new(x, T::zero())), T::zero(), q);
    }
    let cut = q.upper_cutoff;
    let direction = Complex::from_polar(T::one(), osc_rate.signum() * q.contour_angle);

    // The rotated integrand must decay: compare its size across a few decay lengths.
    let decay = osc_rate.abs() * q.contour_angle.sin();
    let probe_near = Complex::new(cut, T::zero()) + direction * (lit::<T>(2.0) / decay);
    let probe_far = Complex::new(cut, T::zero()) + direction * (lit::<T>(40.0) / decay);
    let (near, far) = (f(probe_near).norm(), f(probe_far).norm());
    if !(far <= near) && far.is_finite() && far > T::zero() {
        return Err(Error::Sector(format!(
            "integrand grows along the rotated ray ({near} -> {far})"
        )));
    }

    let head = if cut > T::zero() {
        integrate_adaptive(|x| f(Complex::new(x, T::zero())), T::zero(), cut, q)?
    } else {
        Estimate::exact(Complex::new(T::zero(), T::zero()))
    };
    let tail = integrate_tail(
        |t| f(Complex::new(cut, T::zero()) + direction * t) * direction,
        T::zero(),
        q,
    )?;
    Ok(head + tail)
}

/// `E1(z) = ∫_1^∞ e^{-zt}/t dt` along `t = 1 + u e^{-i arg z}`, where the
/// exponential decays monotonically. Defined off the cut `z ≤ 0`. The factor
/// `e^{-z}` is pulled out so the tolerances act on an O(1) integrand.
pub fn e1_reference<T: Real>(z: Complex<T>, q: &QuadratureSpec<T>) -> Result<Estimate<T>> {
    if z.norm() == T::zero() || (z.im == T::zero() && z.re < T::zero()) {
        return Err(Error::Domain(format!("E1 reference undefined at {z}")));
    }
    let dir = Complex::from_polar(T::one(), -z.arg());
    let modulus = z.norm();
    let scaled = integrate_tail(
        |u| dir * (-(modulus * u)).exp() / (Complex::new(T::one(), T::zero()) + dir * u),
        T::zero(),
        q,
    )?;
    Ok(scaled.scale((-z).exp()))
}

fn circular_gap<T: Real>(a: T, b: T) -> T {
    let tau = T::TAU();
    let d = (a - b).abs() % tau;
    d.min(tau - d)
}

/// Principal value of `∫_0^{2π} f(φ) dφ` where `f` has simple poles at
/// `singularities`. Each pole is excised symmetrically at radii `ε, ε/2, ε/4`
/// and the three results are Richardson-extrapolated to `ε → 0`.
pub fn integrate_pv_circle<T, F>(
    mut f: F,
    singularities: &[T],
    q: &QuadratureSpec<T>,
) -> Result<Estimate<T>>
where
    T: Real,
    F: FnMut(T) -> Complex<T>,
{
    let tau = T::TAU();
    let eps = q.pv_epsilon;
    let mut poles: Vec<T> = singularities
        .iter()
        .map(|&p| crate::geometry::reduce_azimuth(p))
        .collect();
    poles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for i in 0..poles.len() {
        for j in i + 1..poles.len() {
            let gap = circular_gap(poles[i], poles[j]);
            if gap <= lit::<T>(4.0) * eps {
                return Err(Error::Separation {
                    gap: gap.to_f64().unwrap_or(f64::NAN),
                    needed: (lit::<T>(4.0) * eps).to_f64().unwrap_or(f64::NAN),
                });
            }
        }
    }

    let mut excised = |radius: T| -> Result<Estimate<T>> {
        if poles.is_empty() {
            return integrate_adaptive(&mut f, T::zero(), tau, q);
        }
        // Arcs between consecutive excision windows, walking once around the circle.
        let mut total = Estimate::exact(Complex::new(T::zero(), T::zero()));
        let n = poles.len();
        for i in 0..n {
            let start = poles[i] + radius;
            let mut end = poles[(i + 1) % n] - radius;
            if i + 1 == n {
                end = end + tau;
            }
            total = total + integrate_adaptive(&mut f, start, end, q)?;
        }
        Ok(total)
    };

    let q1 = excised(eps)?;
    let q2 = excised(eps / lit(2.0))?;
    let q4 = excised(eps / lit(4.0))?;
    let r1 = q2.value * lit::<T>(2.0) - q1.value;
    let r2 = q4.value * lit::<T>(2.0) - q2.value;
    let value = (r2 * lit::<T>(8.0) - r1) / lit::<T>(7.0);
    let extrapolation = (value - r2).norm();
    let err = extrapolation + q1.err + q2.err + q4.err;
    let quad_err = q1.err + q2.err + q4.err;
    let allowed = (lit::<T>(1e-2) * value.norm())
        .max(lit::<T>(10.0) * quad_err)
        .max(lit::<T>(100.0) * q.abs_tol);
    if (r1 - r2).norm() > allowed {
        return Err(Error::NonConvergence {
            what: "principal-value extrapolation".into(),
            err_est: err.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(Estimate::new(value, err))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn q() -> QuadratureSpec<f64> {
        QuadratureSpec::default()
    }

    #[test]
    fn legendre_rule_integrates_polynomials() {
        let rule = gauss_legendre::<f64>(GL_POINTS);
        let s: f64 = rule.iter().map(|&(x, w)| w * x.powi(30)).sum();
        assert_relative_eq!(s, 2.0 / 31.0, max_relative = 1e-13);
        let wsum: f64 = rule.iter().map(|&(_, w)| w).sum();
        assert_relative_eq!(wsum, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn unit_interval() {
        let e = integrate_adaptive(|_| Complex::new(1.0, 0.0), 0.0, 1.0, &q()).unwrap();
        assert_relative_eq!(e.value.re, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn e1_at_one_by_tail_map() {
        let e = integrate_tail(|u: f64| Complex::new((-u).exp() / u, 0.0), 1.0, &q()).unwrap();
        assert_relative_eq!(e.value.re, 0.219_383_934_395_520_3, max_relative = 1e-12);
    }

    #[test]
    fn sphere_area() {
        let e = integrate_rectangle(
            |t: f64, _p: f64| Complex::new(t.sin(), 0.0),
            (0.0, PI),
            (0.0, 2.0 * PI),
            &q(),
        )
        .unwrap();
        assert_relative_eq!(e.value.re, 4.0 * PI, max_relative = 1e-13);
    }

    #[test]
    fn decaying_exponential() {
        let e = integrate_semiinfinite_oscillatory(|r| (-r).exp(), 0.0, &q()).unwrap();
        assert_relative_eq!(e.value.re, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn damped_oscillation() {
        let i = Complex::new(0.0, 1.0);
        let e = integrate_semiinfinite_oscillatory(|r| (i * r - r).exp(), 1.0, &q()).unwrap();
        assert_relative_eq!(e.value.re, 0.5, max_relative = 1e-12);
        assert_relative_eq!(e.value.im, 0.5, max_relative = 1e-12);
    }

    #[test]
    fn pure_oscillation_is_abel_summed() {
        // ∫_0^∞ e^{iωr} dr = i/ω
        let i = Complex::new(0.0, 1.0);
        for w in [2.0, -0.5] {
            let e = integrate_semiinfinite_oscillatory(|r| (i * r * w).exp(), w, &q()).unwrap();
            assert!((e.value - i / w).norm() < 1e-11);
        }
    }

    #[test]
    fn growing_ray_is_rejected() {
        let i = Complex::new(0.0, 1.0);
        let res = integrate_semiinfinite_oscillatory(|r| (i * r).exp(), -1.0, &q());
        assert!(matches!(res, Err(Error::Sector(_))));
    }

    #[test]
    fn bend_point_skips_poles() {
        // ∫_0^∞ e^{ir}/(r - (2 + i)) dr: pole in the first quadrant, inside the sector.
        let i = Complex::new(0.0, 1.0);
        let pole = Complex::new(2.0, 1.0);
        let f = |r: Complex<f64>| (i * r).exp() / (r - pole);
        let bent = integrate_semiinfinite_oscillatory(f, 1.0, &q().with_cutoff(5.0)).unwrap();
        let rotated = integrate_semiinfinite_oscillatory(f, 1.0, &q()).unwrap();
        // The straight rotation picks up the residue 2πi e^{i·pole}.
        let residue = 2.0 * PI * i * (i * pole).exp();
        assert!((bent.value - rotated.value - residue).norm() < 1e-9);
    }

    #[test]
    fn pv_odd_kernel_vanishes() {
        let e = integrate_pv_circle(
            |p: f64| Complex::new(1.0 / p.cos(), 0.0),
            &[PI / 2.0, 3.0 * PI / 2.0],
            &q(),
        )
        .unwrap();
        assert!(e.value.norm() < 1e-9, "{}", e.value);
    }

    #[test]
    fn pv_removable_kernel() {
        let e = integrate_pv_circle(
            |p: f64| Complex::new(p.cos() / p.cos(), 0.0),
            &[PI / 2.0, 3.0 * PI / 2.0],
            &q(),
        )
        .unwrap();
        assert_relative_eq!(e.value.re, 2.0 * PI, max_relative = 1e-10);
    }

    #[test]
    fn pv_shifted_cosine_kernel() {
        // PV ∫ cos φ / cos(θ - φ) dφ = 2π cos θ
        let theta = PI / 4.0;
        let e = integrate_pv_circle(
            |p: f64| Complex::new(p.cos() / (theta - p).cos(), 0.0),
            &[theta + PI / 2.0, theta - PI / 2.0],
            &q(),
        )
        .unwrap();
        assert_relative_eq!(e.value.re, 2.0 * PI * theta.cos(), max_relative = 1e-9);
    }

    #[test]
    fn pv_separation_error() {
        let res = integrate_pv_circle(|p: f64| Complex::new(p, 0.0), &[1.0, 1.01], &q());
        assert!(matches!(res, Err(Error::Separation { .. })));
    }
}
