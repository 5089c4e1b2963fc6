//! Globally adaptive Gauss–Kronrod (10/21) integration of complex-valued
//! integrands over finite intervals. This is the production integrator used by
//! the angular quadratures; the reference back-ends in [`crate::oracle`] are
//! built on a different rule and never call into this module.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{lit, Estimate, Real};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance<T> {
    pub abs: T,
    pub rel: T,
    pub max_subdivisions: usize,
}

impl<T: Real> Tolerance<T> {
    pub fn new(abs: T, rel: T, max_subdivisions: usize) -> Self {
        Self {
            abs,
            rel,
            max_subdivisions,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment<T: Real> {
    a: T,
    b: T,
    value: Complex<T>,
    err: T,
}

fn gk21<T, F>(f: &mut F, a: T, b: T) -> Result<Segment<T>>
where
    T: Real,
    F: FnMut(T) -> Result<Complex<T>>,
{
    let two = lit::<T>(2.0);
    let center = (a + b) / two;
    let half = (b - a) / two;

    let f_center = f(center)?;
    let mut kronrod = f_center * lit::<T>(WGK[10]);
    let mut gauss = Complex::new(T::zero(), T::zero());
    let mut samples = [(
        Complex::new(T::zero(), T::zero()),
        Complex::new(T::zero(), T::zero()),
    ); 10];
    for (j, sample) in samples.iter_mut().enumerate() {
        let dx = half * lit::<T>(XGK[j]);
        let lo = f(center - dx)?;
        let hi = f(center + dx)?;
        kronrod = kronrod + (lo + hi) * lit::<T>(WGK[j]);
        if j % 2 == 1 {
            gauss = gauss + (lo + hi) * lit::<T>(WG[j / 2]);
        }
        *sample = (lo, hi);
    }

    let mean = kronrod * lit::<T>(0.5);
    let mut asc = (f_center - mean).norm() * lit::<T>(WGK[10]);
    for (j, (lo, hi)) in samples.iter().enumerate() {
        asc = asc + ((*lo - mean).norm() + (*hi - mean).norm()) * lit::<T>(WGK[j]);
    }
    let hl = half.abs();
    let asc = asc * hl;
    let mut err = ((kronrod - gauss) * half).norm();
    if asc > T::zero() && err > T::zero() {
        let scale = (lit::<T>(200.0) * err / asc).powf(lit(1.5));
        err = if scale < T::one() { asc * scale } else { asc };
    }
    let value = kronrod * half;
    let floor = lit::<T>(50.0) * T::epsilon() * value.norm();
    if floor > err {
        err = floor;
    }
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(Error::Domain(format!(
            "integrand not finite on [{}, {}]",
            a.to_f64().unwrap_or(f64::NAN),
            b.to_f64().unwrap_or(f64::NAN)
        )));
    }
    Ok(Segment { a, b, value, err })
}

/// Integrates `f` over the piecewise interval defined by `breakpoints`
/// (at least two, increasing). Interior breakpoints are never sampled, so
/// integrable endpoint singularities can be placed there.
pub fn integrate<T, F>(mut f: F, breakpoints: &[T], tol: Tolerance<T>) -> Result<Estimate<T>>
where
    T: Real,
    F: FnMut(T) -> Result<Complex<T>>,
{
    assert!(breakpoints.len() >= 2, "need at least one interval");
    let mut segments = Vec::with_capacity(tol.max_subdivisions.max(breakpoints.len()));
    for w in breakpoints.windows(2) {
        if w[1] > w[0] {
            segments.push(gk21(&mut f, w[0], w[1])?);
        }
    }

    loop {
        let total = segments
            .iter()
            .fold(Complex::new(T::zero(), T::zero()), |acc, s| acc + s.value);
        let err = segments.iter().fold(T::zero(), |acc, s| acc + s.err);
        let target = tol.abs.max(tol.rel * total.norm());
        if err <= target {
            return Ok(Estimate::new(total, err));
        }
        if segments.len() >= tol.max_subdivisions {
            return Err(Error::MaxSubdivisions {
                limit: tol.max_subdivisions,
                err_est: err.to_f64().unwrap_or(f64::NAN),
            });
        }
        // Largest error first; ties resolved by position for determinism.
        let (worst, _) =
            segments
                .iter()
                .enumerate()
                .fold((0usize, T::neg_infinity()), |(bi, be), (i, s)| {
                    if s.err > be {
                        (i, s.err)
                    } else {
                        (bi, be)
                    }
                });
        let seg = segments[worst];
        let mid = (seg.a + seg.b) / lit(2.0);
        if mid <= seg.a || mid >= seg.b {
            // Interval can no longer be split in this precision.
            return Ok(Estimate::new(total, err));
        }
        let left = gk21(&mut f, seg.a, mid)?;
        let right = gk21(&mut f, mid, seg.b)?;
        segments[worst] = left;
        segments.insert(worst + 1, right);
    }
}

/// Convenience wrapper for infallible integrands.
pub fn integrate_plain<T, F>(mut f: F, breakpoints: &[T], tol: Tolerance<T>) -> Result<Estimate<T>>
where
    T: Real,
    F: FnMut(T) -> Complex<T>,
{
    integrate(|x| Ok(f(x)), breakpoints, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn tol() -> Tolerance<f64> {
        Tolerance::new(1e-13, 1e-12, 200)
    }

    #[test]
    fn polynomial_is_exact() {
        let est =
            integrate_plain(|x: f64| Complex::new(x * x * x, -x), &[0.0, 2.0], tol()).unwrap();
        assert_relative_eq!(est.value.re, 4.0, epsilon = 1e-14);
        assert_relative_eq!(est.value.im, -2.0, epsilon = 1e-14);
    }

    #[test]
    fn endpoint_log_singularity() {
        let est = integrate_plain(
            |x: f64| Complex::new(x.ln(), 0.0),
            &[0.0, 1.0],
            Tolerance::new(1e-12, 1e-12, 500),
        )
        .unwrap();
        assert_relative_eq!(est.value.re, -1.0, epsilon = 1e-10);
    }

    #[test]
    fn oscillatory_periodic() {
        let est = integrate_plain(
            |x: f64| Complex::new(0.0, x).exp(),
            &[0.0, PI, 2.0 * PI],
            tol(),
        )
        .unwrap();
        assert!(est.value.norm() < 1e-12);
    }

    #[test]
    fn exhaustion_is_reported() {
        let res = integrate_plain(
            |x: f64| Complex::new(1.0 / x.sqrt().max(1e-300) / x, 0.0),
            &[0.0, 1.0],
            Tolerance::new(1e-14, 1e-14, 20),
        );
        assert!(matches!(
            res,
            Err(Error::MaxSubdivisions { .. }) | Err(Error::Domain(_))
        ));
    }
}
