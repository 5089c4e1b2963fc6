//! Complex directions, spherical coordinates and the angular kernels
//! `α = ζ̇·ξ̂` and `β = ξ̂·x̂` of the free-space construction.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{lit, re, Real};

pub type CVec3<T> = [Complex<T>; 3];
pub type Vec3<T> = [T; 3];

/// Slack allowed on polar angles before they are rejected.
const POLAR_SLACK: f64 = 1e-9;

fn tol<T: Real>(x: f64) -> T {
    lit::<T>(x).max(T::epsilon() * lit(16.0))
}

/// Bilinear (non-conjugating) product `a·b`.
pub fn dot<T: Real>(a: &CVec3<T>, b: &CVec3<T>) -> Complex<T> {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// `a·v` for a real vector `v`.
pub fn dot_real<T: Real>(a: &CVec3<T>, v: &Vec3<T>) -> Complex<T> {
    a[0] * v[0] + a[1] * v[1] + a[2] * v[2]
}

pub fn hermitian_norm<T: Real>(a: &CVec3<T>) -> T {
    (a[0].norm_sqr() + a[1].norm_sqr() + a[2].norm_sqr()).sqrt()
}

/// Reduces an azimuth into `[0, 2π)`.
pub fn reduce_azimuth<T: Real>(x: T) -> T {
    let tau = T::TAU();
    let r = x % tau;
    let r = if r < T::zero() { r + tau } else { r };
    if r >= tau {
        T::zero()
    } else {
        r
    }
}

/// Clamps a polar angle into `[0, π]`, rejecting violations beyond round-off.
pub fn clamp_polar<T: Real>(name: &'static str, x: T) -> Result<T> {
    let slack = tol::<T>(POLAR_SLACK);
    if !x.is_finite() || x < -slack || x > T::PI() + slack {
        return Err(Error::Angle {
            name,
            value: x.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(x.max(T::zero()).min(T::PI()))
}

/// Unit vector with polar angle `theta` and azimuth `phi`.
pub fn spherical_unit<T: Real>(theta: T, phi: T) -> Vec3<T> {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [st * cp, st * sp, ct]
}

/// The complex frequency `ζ = s ζ̇` on the quadric `ζ·ζ = k0²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionSpec<T: Real> {
    pub zeta: CVec3<T>,
    pub s: T,
    pub zeta_dot: CVec3<T>,
    pub k0: T,
}

impl<T: Real> DirectionSpec<T> {
    /// `ζ·ζ - k0²`.
    pub fn quadric_residual(&self) -> Complex<T> {
        dot(&self.zeta, &self.zeta) - re(self.k0 * self.k0)
    }

    /// Same unit direction at a different magnitude; `k0` is rescaled so the
    /// quadric constraint is preserved.
    pub fn with_magnitude(&self, s: T) -> Result<Self> {
        make_direction(self.zeta_dot, s, self.k0 * s / self.s)
    }
}

/// Validates and builds a [`DirectionSpec`]. `zeta_dot` is stored as given and
/// must have unit hermitian norm, so that `s = |ζ|`.
pub fn make_direction<T: Real>(zeta_dot: CVec3<T>, s: T, k0: T) -> Result<DirectionSpec<T>> {
    if !(s > T::zero()) || !s.is_finite() {
        return Err(Error::Domain(format!(
            "direction magnitude must be positive, got {s}"
        )));
    }
    if !(k0 >= T::zero()) || !k0.is_finite() {
        return Err(Error::Domain(format!("k0 must be non-negative, got {k0}")));
    }
    let norm = hermitian_norm(&zeta_dot);
    if (norm - T::one()).abs() > tol::<T>(1e-12) {
        return Err(Error::Normalization {
            norm: norm.to_f64().unwrap_or(f64::NAN),
        });
    }
    let zeta = zeta_dot.map(|c| c * s);
    let d = DirectionSpec {
        zeta,
        s,
        zeta_dot,
        k0,
    };
    let residual = d.quadric_residual().norm();
    let scale = (s * s).max(k0 * k0);
    if residual > tol::<T>(1e-10) * scale {
        return Err(Error::Constraint {
            residual: residual.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(d)
}

/// The Calderón direction `(1, i, 0)/√2` (so `ζ·ζ = 0`, `k0 = 0`).
pub fn calderon_direction<T: Real>(s: T) -> Result<DirectionSpec<T>> {
    let h = T::FRAC_1_SQRT_2();
    make_direction(
        [
            Complex::new(h, T::zero()),
            Complex::new(T::zero(), h),
            Complex::new(T::zero(), T::zero()),
        ],
        s,
        T::zero(),
    )
}

/// Physical point in spherical coordinates `(R, ψ, ω)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldPoint<T: Real> {
    pub r: T,
    pub psi: T,
    pub omega: T,
}

impl<T: Real> FieldPoint<T> {
    pub fn new(r: T, psi: T, omega: T) -> Result<Self> {
        if !(r > T::zero()) || !r.is_finite() {
            return Err(Error::Domain(format!(
                "field point radius must be positive, got {r}"
            )));
        }
        Ok(Self {
            r,
            psi: clamp_polar("psi", psi)?,
            omega: reduce_azimuth(omega),
        })
    }

    pub fn from_cartesian(x: Vec3<T>) -> Result<Self> {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        if !(r > T::zero()) {
            return Err(Error::Domain("field point at the origin".into()));
        }
        let psi = (x[2] / r).max(-T::one()).min(T::one()).acos();
        let omega = x[1].atan2(x[0]);
        Self::new(r, psi, omega)
    }

    pub fn unit(&self) -> Vec3<T> {
        spherical_unit(self.psi, self.omega)
    }

    pub fn cartesian(&self) -> Vec3<T> {
        self.unit().map(|c| c * self.r)
    }
}

/// Fourier-space angles `(θ, φ)`; the radius enters only as an integration
/// variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierAngles<T: Real> {
    pub theta: T,
    pub phi: T,
}

impl<T: Real> FourierAngles<T> {
    pub fn new(theta: T, phi: T) -> Result<Self> {
        Ok(Self {
            theta: clamp_polar("theta", theta)?,
            phi: reduce_azimuth(phi),
        })
    }

    pub fn unit(&self) -> Vec3<T> {
        spherical_unit(self.theta, self.phi)
    }
}

/// `α(θ, φ) = (k̇ cos φ + ℓ̇ sin φ) sin θ + ṁ cos θ`.
pub fn alpha_fullspace<T: Real>(theta: T, phi: T, d: &DirectionSpec<T>) -> Complex<T> {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let z = &d.zeta_dot;
    (z[0] * cp + z[1] * sp) * st + z[2] * ct
}

/// `β(θ, φ; ψ, ω) = sin θ sin ψ cos(φ - ω) + cos θ cos ψ`.
pub fn beta_fullspace<T: Real>(theta: T, phi: T, p: &FieldPoint<T>) -> T {
    theta.sin() * p.psi.sin() * (phi - p.omega).cos() + theta.cos() * p.psi.cos()
}

/// Right-handed orthonormal frame `(e1, e2, axis)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame<T: Real> {
    pub e1: Vec3<T>,
    pub e2: Vec3<T>,
    pub axis: Vec3<T>,
}

impl<T: Real> Frame<T> {
    /// Frame whose polar axis is `axis` (unit length assumed).
    pub fn about(axis: Vec3<T>) -> Self {
        // Pick the coordinate vector least aligned with the axis.
        let mut helper = [T::zero(); 3];
        let idx = (0..3)
            .min_by(|&i, &j| axis[i].abs().partial_cmp(&axis[j].abs()).unwrap())
            .unwrap();
        helper[idx] = T::one();
        let proj = helper[0] * axis[0] + helper[1] * axis[1] + helper[2] * axis[2];
        let mut e1 = [
            helper[0] - proj * axis[0],
            helper[1] - proj * axis[1],
            helper[2] - proj * axis[2],
        ];
        let n = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
        e1 = e1.map(|c| c / n);
        let e2 = [
            axis[1] * e1[2] - axis[2] * e1[1],
            axis[2] * e1[0] - axis[0] * e1[2],
            axis[0] * e1[1] - axis[1] * e1[0],
        ];
        Self { e1, e2, axis }
    }

    /// Coordinates `(u, φ')` of a unit vector: `u` along the axis, `φ'` the
    /// azimuth measured from `e1`.
    pub fn coordinates(&self, v: &Vec3<T>) -> (T, T) {
        let d = |a: &Vec3<T>| a[0] * v[0] + a[1] * v[1] + a[2] * v[2];
        (
            d(&self.axis),
            reduce_azimuth(d(&self.e2).atan2(d(&self.e1))),
        )
    }
}
