use std::f64::consts::PI;

use faddeev::oracle::{integrate_semiinfinite_oscillatory, QuadratureSpec};
use faddeev::quadrature::Tolerance;
use faddeev::slab::*;
use faddeev::C64;
use proptest::prelude::*;

fn fixture() -> (SlabConfig<f64>, SlabFieldPoint<f64>) {
    let cfg = SlabConfig::new(PI, 1.0, C64::new(0.0, 0.0), 0.3, [0.0, 0.0, 1.0]).unwrap();
    let p = SlabFieldPoint::new(1.0, PI / 3.0, 1.3, &cfg).unwrap();
    (cfg, p)
}

/// `∫_0^∞ e^{-iR cos(θ-φ) r}/(r² - 2 s a r - λ²) dr`, `a = cos φ + iℓ̇ sin φ`.
fn kernel_oracle(phi: f64, p: &SlabFieldPoint<f64>, s: f64, nu: i64, cfg: &SlabConfig<f64>) -> C64 {
    let a = C64::new(phi.cos(), cfg.ell_dot * phi.sin()) * s;
    let lam_sq = lambda_nu(nu, cfg).lambda_sq;
    let disc = (a * a + lam_sq).sqrt();
    let cut = (a + disc).re.max((a - disc).re).max(0.0) + 1.0;
    let b = -p.r * (p.theta - phi).cos();
    let q = QuadratureSpec::default()
        .with_tolerances(1e-14, 1e-12)
        .with_cutoff(cut);
    integrate_semiinfinite_oscillatory(
        |x| (C64::new(0.0, b) * x).exp() / (x * x - a * x * 2.0 - lam_sq),
        b,
        &q,
    )
    .unwrap()
    .value
}

#[test]
fn kernel_fixture_matches_quadrature() {
    let (cfg, p) = fixture();
    let c = m_nu_closed(0.25, &p, 20.0, 0, &cfg, &KernelGuards::default())
        .unwrap()
        .value;
    let o = kernel_oracle(0.25, &p, 20.0, 0, &cfg);
    assert!((c - o).norm() <= 1e-10 * o.norm(), "{c} vs {o}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_matches_quadrature(
        h in 1.0f64..4.0,
        mre in -2.0f64..2.0,
        mim in -2.0f64..2.0,
        ell in -0.8f64..0.8,
        r in 0.2f64..3.0,
        theta in 0.0f64..2.0 * PI,
        phi in 0.0f64..2.0 * PI,
        s in 1.0f64..100.0,
        nu in -4i64..4,
    ) {
        prop_assume!((theta - phi).cos().abs() > 1e-3);
        let cfg = SlabConfig::new(h, 1.0, C64::new(mre, mim), ell, [0.0, 0.0, h / 2.0]).unwrap();
        let p = SlabFieldPoint::new(r, theta, h / 3.0, &cfg).unwrap();
        let c = m_nu_closed(phi, &p, s, nu, &cfg, &KernelGuards::default());
        prop_assume!(c.is_ok());
        let o = kernel_oracle(phi, &p, s, nu, &cfg);
        prop_assert!((c.unwrap().value - o).norm() <= 1e-6 * o.norm());
    }

    #[test]
    fn mode_reflection_is_exact(nu in -50i64..50, h in 0.5f64..6.0, mre in -3.0f64..3.0, mim in -3.0f64..3.0, s in 1.0f64..300.0, phi in 0.0f64..6.0) {
        let cfg = SlabConfig::new(h, 1.0, C64::new(mre, mim), 0.3, [0.0, 0.0, h / 2.0]).unwrap();
        let (a, b) = (lambda_nu(nu, &cfg), lambda_nu(-nu - 1, &cfg));
        prop_assert_eq!(a.lambda_sq, b.lambda_sq);
        prop_assert_eq!(a.lambda_nu, b.lambda_nu);
        prop_assert_eq!(a.rho_nu, b.rho_nu);
        let ka = slab_kernel_params(phi, s, nu, &cfg, AlphaConvention::Unit);
        let kb = slab_kernel_params(phi, s, -nu - 1, &cfg, AlphaConvention::Unit);
        if let (Ok(ka), Ok(kb)) = (ka, kb) {
            prop_assert_eq!(ka.beta_nu, kb.beta_nu);
        }
    }
}

#[test]
fn beta_shift_falls_off_like_inverse_square() {
    let (cfg, _) = fixture();
    let shift = |s: f64| {
        let k = slab_kernel_params(0.25, s, 0, &cfg, AlphaConvention::Unit).unwrap();
        (k.beta_nu - k.beta_0).norm()
    };
    let ratio = shift(10.0) / shift(100.0);
    assert!((ratio / 100.0 - 1.0).abs() < 0.2, "ratio {ratio}");
}

#[test]
fn principal_term_scales_like_inverse_s() {
    let (cfg, p) = fixture();
    let a = m_nu_principal(0.7, &p, 40.0, &cfg, AlphaConvention::Unit).unwrap();
    let b = m_nu_principal(0.7, &p, 80.0, &cfg, AlphaConvention::Unit).unwrap();
    assert!((a.norm() / b.norm() - 2.0).abs() < 0.05);
}

#[test]
fn excision_is_stable_and_agrees_with_breakpoint_quadrature() {
    let (cfg, p) = fixture();
    let q = QuadratureSpec::default();
    let d = i_nu_excision_diagnostic(&p, 100.0, 0, &cfg, &q).unwrap();
    assert!(d.relative_change() < 1e-5, "{}", d.relative_change());
    let direct = i_nu_quadrature(&p, 100.0, 0, &cfg, &q).unwrap().value;
    assert!((direct - d.at_half_eps.value).norm() <= 1e-6 * direct.norm());
}

#[test]
fn angular_closed_form_as_written_at_quarter_turn() {
    // −i e^{iπ/4}(7π/4 + i ln √2)
    let expected =
        -C64::i() * C64::from_polar(1.0, PI / 4.0) * C64::new(7.0 * PI / 4.0, 0.5 * 2f64.ln());
    assert!((g_angular(1.0, PI / 4.0, 0.0).unwrap() - expected).norm() < 1e-14);
}

#[test]
fn angular_fold_matches_symmetric_excision() {
    let q = QuadratureSpec::default().with_tolerances(1e-14, 1e-12);
    let tol = Tolerance::new(1e-14, 1e-12, q.max_subdivisions);
    for theta in [0.2, 1.0, 2.5, 4.0, 5.5] {
        let fold = angular_combination(1.0, theta, 0.3, tol).unwrap().value;
        let excision =
            faddeev::harness::angular_combination_reference(1.0, theta, 0.3, &q).unwrap();
        assert!(
            (fold - excision).norm() <= 1e-8 * excision.norm(),
            "theta {theta}"
        );
    }
}

fn bump(center: f64, width: f64, height: f64) -> Bump<f64> {
    Bump {
        center,
        width,
        height,
    }
}

#[test]
fn pairings_vanish_when_psi_vanishes_at_the_source() {
    let cfg = SlabConfig::new(PI, 1.0, C64::new(0.0, 0.0), 0.3, [0.0, 0.0, 1.0]).unwrap();
    let psi = bump(2.2, 0.5, 1.0);
    assert_eq!(f_pairing(&psi, &cfg, 4).unwrap(), 0.0);
    assert!(eigen_sum_abel_limit(&psi, &cfg, 400).unwrap().value.norm() < 1e-6);
}

#[test]
fn eigen_pairing_of_unit_bump_tends_to_depth() {
    let cfg = SlabConfig::new(PI, 1.0, C64::new(0.0, 0.0), 0.3, [0.0, 0.0, 1.0]).unwrap();
    let psi = bump(1.0, 0.4, 1.0);
    assert_eq!(psi.value(1.0), 1.0);
    let e = eigen_sum_abel_limit(&psi, &cfg, 400).unwrap().value;
    assert!((e - C64::new(PI, 0.0)).norm() < 1e-3 * PI, "{e}");
}

#[test]
fn image_pairing_is_symmetric_in_source_and_field() {
    // both orders reduce to −ψ at the same point
    let h = 2.0;
    let psi = bump(0.9, 0.3, 1.5);
    for z0 in [0.75, 0.9, 1.1] {
        let cfg = SlabConfig::new(h, 1.0, C64::new(0.0, 0.0), 0.3, [0.0, 0.0, z0]).unwrap();
        assert_eq!(f_pairing(&psi, &cfg, 4).unwrap(), -psi.value(z0));
    }
}

#[test]
fn eigen_over_image_ratio_is_minus_depth() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5 {
        let h = rng.gen_range(1.0..4.0);
        let psi = faddeev::harness::random_bump(&mut rng, h);
        let z0 = psi.center + rng.gen_range(-0.5..0.5) * psi.width;
        let cfg = SlabConfig::new(h, 1.0, C64::new(0.0, 0.0), 0.3, [0.0, 0.0, z0]).unwrap();
        let modes = (40.0 * h / (PI * psi.width)).ceil() as usize + 20;
        let ratio = eigen_sum_abel_limit(&psi, &cfg, modes).unwrap().value.re
            / f_pairing(&psi, &cfg, 4).unwrap();
        assert!((ratio + h).abs() < 1e-3 * h, "ratio {ratio} vs -{h}");
    }
}

#[test]
fn paired_series_decays_like_inverse_s() {
    let (cfg, p) = fixture();
    let psi = bump(1.2, 0.6, 1.0);
    let q = QuadratureSpec::default();
    let mag = |s: f64| {
        g_zeta_slab_paired(&psi, &p, s, &cfg, 12, &q)
            .unwrap()
            .value
            .value
            .norm()
    };
    let ratio = mag(100.0) / mag(200.0);
    assert!((ratio - 2.0).abs() < 0.3, "ratio {ratio}");
}
