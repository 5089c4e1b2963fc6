use std::f64::consts::PI;

use faddeev::complex_ei::*;
use faddeev::harness::fit_loglog_slope;
use faddeev::oracle::{e1_reference, QuadratureSpec};
use faddeev::C64;
use proptest::prelude::*;

fn e1v(z: C64) -> C64 {
    e1(EiArgument::new(z).unwrap()).value
}

fn valid_z() -> impl Strategy<Value = C64> {
    (-1.0f64..2.0, -0.75 * PI..0.75 * PI).prop_map(|(lg, arg)| C64::from_polar(10f64.powf(lg), arg))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn schwarz_reflection(z in valid_z()) {
        let a = e1v(z.conj());
        let b = e1v(z).conj();
        prop_assert!((a - b).norm() <= 1e-12 * b.norm());
    }

    #[test]
    fn matches_integral_definition(z in valid_z()) {
        let q = QuadratureSpec::default().with_tolerances(1e-14, 1e-12);
        let o = e1_reference(z, &q).unwrap().value;
        prop_assert!((e1v(z) - o).norm() <= 1e-10 * o.norm());
    }
}

#[test]
fn derivative_by_richardson() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let z = C64::from_polar(
            10f64.powf(rng.gen_range(-0.5..1.5)),
            rng.gen_range(-0.7 * PI..0.7 * PI),
        );
        let h = 1e-3 * z.norm().min(1.0);
        let d = |h: f64| (e1v(z + h) - e1v(z - h)) / (2.0 * h);
        let richardson = (d(h / 2.0) * 4.0 - d(h)) / 3.0;
        let exact = -(-z).exp() / z;
        assert!(
            (richardson - exact).norm() <= 1e-8 * exact.norm(),
            "z = {z}: {richardson} vs {exact}"
        );
    }
}

#[test]
fn term_envelope_and_truncation_heuristic() {
    for modulus in [3.0, 5.5, 8.0, 12.3, 20.0] {
        let z = C64::from_polar(modulus, 0.4);
        let mags = asymptotic_term_magnitudes(z, 40);
        let min_at = mags
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert!(mags[..min_at].windows(2).all(|w| w[1] <= w[0]));
        assert!(mags[min_at..].windows(2).all(|w| w[1] >= w[0]));
        let expected = modulus.floor() as i64 - 1;
        assert!(
            (optimal_truncation_order(z) as i64 - expected).abs() <= 1,
            "|z| = {modulus}"
        );
    }
}

#[test]
fn remainder_slope_for_two_terms() {
    let zs = [20.0, 40.0, 80.0];
    let errs: Vec<f64> = zs
        .iter()
        .map(|&x| {
            let z = C64::new(x, 0.0);
            let exact = ei(z).unwrap().value * (-z).exp();
            (exact - ei_asymptotic_partial_sum(z, 2, &AsymptoticConfig::default()).unwrap()).norm()
        })
        .collect();
    let fit = fit_loglog_slope(&zs, &errs).unwrap();
    assert!((fit.slope + 4.0).abs() <= 0.2, "slope {}", fit.slope);
}
