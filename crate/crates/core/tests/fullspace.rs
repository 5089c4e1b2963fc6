use std::f64::consts::PI;

use faddeev::fullspace::*;
use faddeev::geometry::*;
use faddeev::oracle::{integrate_semiinfinite_oscillatory, QuadratureSpec};
use faddeev::C64;
use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use proptest::prelude::*;

fn tight() -> QuadratureSpec<f64> {
    QuadratureSpec::default().with_tolerances(1e-14, 1e-12)
}

/// `∫_0^∞ r e^{iRβr}/(r + 2sα) dr` straight from the integrand.
fn radial_oracle(r: f64, s: f64, alpha: C64, beta: f64) -> C64 {
    let a = alpha * (2.0 * s);
    let rb = r * beta;
    let q = tight().with_cutoff((-a.re).max(0.0) + 1.0);
    integrate_semiinfinite_oscillatory(|x| x * (C64::new(0.0, rb) * x).exp() / (x + a), rb, &q)
        .unwrap()
        .value
}

fn closed(r: f64, s: f64, alpha: C64, beta: f64) -> C64 {
    radial_integral_closed(&RadialKernelParams::new(r, s, alpha, beta).unwrap())
        .unwrap()
        .value
}

#[test]
fn radial_closed_form_at_unit_parameters() {
    let o = radial_oracle(1.0, 10.0, C64::new(1.0, 0.0), 1.0);
    let c = closed(1.0, 10.0, C64::new(1.0, 0.0), 1.0);
    assert!((c - o).norm() <= 1e-10 * o.norm());
    // two series terms give -0.05 + 0.005i; the rest is O(1e-3)
    assert!((c - C64::new(-0.05, 0.005)).norm() < 1e-3);
}

#[test]
fn radial_closed_form_fixture() {
    let o = radial_oracle(2.0, 50.0, C64::new(1.0, 0.3), -0.7);
    let c = closed(2.0, 50.0, C64::new(1.0, 0.3), -0.7);
    assert!((c - o).norm() <= 1e-10 * o.norm(), "{c} vs {o}");
}

#[test]
fn residue_term_near_a_swept_pole() {
    let alpha = C64::new(-1.0, 0.005);
    let o = radial_oracle(2.0, 50.0, alpha, -0.7);
    let c = closed(2.0, 50.0, alpha, -0.7);
    assert!((c - o).norm() <= 1e-8 * o.norm(), "{c} vs {o}");
    let printed = radial_integral_printed(&RadialKernelParams::new(2.0, 50.0, alpha, -0.7).unwrap())
        .unwrap()
        .value;
    assert!((printed - o).norm() > 0.5 * o.norm());
}

#[test]
fn cross_oracle_hook() {
    let q = tight().with_cutoff(1.0);
    let o = integrate_semiinfinite_oscillatory(|x| x * (C64::i() * x).exp() / (x + 20.0), 1.0, &q)
        .unwrap()
        .value;
    assert!((closed(1.0, 10.0, C64::new(1.0, 0.0), 1.0) - o).norm() <= 1e-10 * o.norm());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn radial_closed_form_matches_quadrature(
        r in 0.2f64..3.0,
        s in 1.0f64..100.0,
        are in -1.0f64..1.0,
        aim in -1.0f64..1.0,
        beta in prop_oneof![-1.0f64..-0.05, 0.05f64..1.0],
    ) {
        let alpha = C64::new(are, aim);
        prop_assume!(alpha.norm() > 0.05);
        let o = radial_oracle(r, s, alpha, beta);
        prop_assert!((closed(r, s, alpha, beta) - o).norm() <= 1e-8 * o.norm());
    }
}

type Q = Complex<BigRational>;

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Rederives the series from `I = 1/B - A e^{AB} E1(AB)`. The coefficients
/// `a_j` of `e^w E1(w) ~ Σ a_j w^{-(j+1)}` follow from integration by parts,
/// `a_{j+1} = -(j+1) a_j`. The `j = 0` term cancels `1/B`; the `j = k` term
/// carries `A^{-k} B^{-(k+1)}`, and `A = 2sα`, `B = -iRβ` leave
/// `-a_k / (2^k (-i)^{k+1})` in front of `1/(α^k (Rβ)^{k+1} s^k)`.
#[test]
fn series_prefactors_rederived_exactly() {
    let mut a = q(1);
    let minus_i: Q = Complex::new(q(0), q(-1));
    for k in 1..=6usize {
        a = -a * q(k as i64);
        let mut denom: Q = Complex::new(q(1 << k), q(0));
        for _ in 0..=k {
            denom *= minus_i.clone();
        }
        let expected = Complex::new(-a.clone(), q(0)) / denom;
        assert_eq!(series_prefactor::<BigRational>(k), expected, "k = {k}");
    }
}

#[test]
fn pde_residual_vanishes_away_from_the_origin() {
    let q = QuadratureSpec::default().with_tolerances(1e-12, 1e-11);
    let d = calderon_direction(10.0).unwrap();
    let x0 = [0.5, 0.3, 0.8];
    let g = |x: [f64; 3]| {
        g_zeta_fullspace(&FieldPoint::from_cartesian(x).unwrap(), &d, &q)
            .unwrap()
            .value
    };
    let second = [-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0];
    let first = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
    let residual = |h: f64| {
        let mut lap = C64::new(0.0, 0.0);
        let mut drift = C64::new(0.0, 0.0);
        for ax in 0..3 {
            for k in 0..5 {
                let mut x = x0;
                x[ax] += (k as f64 - 2.0) * h;
                let v = g(x);
                lap += v * second[k] / (h * h);
                drift += d.zeta[ax] * v * first[k] / h * C64::new(0.0, 2.0);
            }
        }
        ((lap + drift).norm(), lap.norm())
    };
    let (coarse, scale) = residual(0.02);
    let (fine, _) = residual(0.01);
    assert!(
        fine < 1e-4 * scale,
        "residual {fine:e} against |Δ G| = {scale:e}"
    );
    // fourth-order stencils: halving h cuts the residual by about 16
    assert!(coarse / fine > 8.0, "{coarse:e} -> {fine:e}");
}

#[test]
fn scaling_identity() {
    let q = QuadratureSpec::default().with_tolerances(1e-12, 1e-11);
    let unit = calderon_direction(1.0).unwrap();
    for (r, s) in [(0.7, 4.0), (1.3, 9.0)] {
        let scaled = calderon_direction(s).unwrap();
        let lhs = g_zeta_fullspace(&FieldPoint::new(r, PI / 3.0, 0.4).unwrap(), &scaled, &q)
            .unwrap()
            .value;
        let rhs = g_zeta_fullspace(&FieldPoint::new(s * r, PI / 3.0, 0.4).unwrap(), &unit, &q)
            .unwrap()
            .value
            * s;
        assert!((lhs - rhs).norm() <= 1e-8 * rhs.norm(), "{lhs} vs {rhs}");
    }
}

#[test]
fn axial_symmetry_of_the_azimuthal_integrand() {
    let q = QuadratureSpec::default();
    let z = C64::new(0.0, 0.0);
    let d = make_direction([z, z, C64::new(1.0, 0.0)], 6.0, 6.0).unwrap();
    let p = FieldPoint::new(1.2, 0.0, 0.0).unwrap();
    let base = meridian_integral(&p, &d, 0.3, &q).unwrap().value;
    for phi in [1.1, 2.9, 4.4, 6.0] {
        let v = meridian_integral(&p, &d, phi, &q).unwrap().value;
        assert!((v - base).norm() <= 1e-9 * base.norm());
    }
}

#[test]
fn leading_coefficient_vanishes() {
    let q = QuadratureSpec::default();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let tilted = make_direction(
        [C64::new(0.0, 0.0), C64::new(h, 0.0), C64::new(0.0, h)],
        1.0,
        0.0,
    )
    .unwrap();
    for d in [calderon_direction(1.0).unwrap(), tilted] {
        for (psi, omega) in [(PI / 3.0, 0.0), (2.0, 2.5)] {
            let c1 = expansion_coefficient(&FieldPoint::new(1.0, psi, omega).unwrap(), &d, 1, &q)
                .unwrap();
            assert!(c1.value.norm() <= 1e-8, "C1 = {}", c1.value);
        }
    }
}

#[test]
fn fixture_is_stable_under_tighter_tolerances() {
    let p = FieldPoint::new(1.0, PI / 3.0, 0.0).unwrap();
    let d = calderon_direction(30.0).unwrap();
    let default = g_zeta_fullspace(&p, &d, &QuadratureSpec::default()).unwrap();
    let fine = g_zeta_fullspace(
        &p,
        &d,
        &QuadratureSpec::default().with_tolerances(1e-13, 1e-12),
    )
    .unwrap();
    assert!((default.value - fine.value).norm() <= default.err.max(1e-9 * fine.value.norm()));
}
