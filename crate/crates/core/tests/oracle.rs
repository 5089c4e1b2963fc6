use std::f64::consts::PI;

use faddeev::harness::{csv_string, run_sweep, SweepConfig, SweepTarget};
use faddeev::oracle::*;
use faddeev::{Estimate64, C64};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn real(x: f64) -> C64 {
    c(x, 0.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn linearity(a in -3.0f64..3.0, b in -3.0f64..3.0, w in 0.5f64..4.0) {
        let q = QuadratureSpec::default().with_cutoff(1.0);
        let f = |x: C64| (c(0.0, w) * x).exp() / ((x + 1.0) * (x + 1.0));
        let g = |x: C64| (c(0.0, w) * x).exp() * (-x).exp();
        let combined = integrate_semiinfinite_oscillatory(|x| f(x) * a + g(x) * b, w, &q).unwrap().value;
        let separate = integrate_semiinfinite_oscillatory(f, w, &q).unwrap().value * a
            + integrate_semiinfinite_oscillatory(g, w, &q).unwrap().value * b;
        prop_assert!((combined - separate).norm() <= 10.0 * (q.abs_tol + q.rel_tol * separate.norm()));
    }
}

#[test]
fn error_estimates_cover_known_integrals() {
    let q = QuadratureSpec::default();
    let oq = q.with_cutoff(1.0);
    let cases: Vec<(&str, Estimate64, C64)> = vec![
        (
            "1 on [0,1]",
            integrate_adaptive(|_| real(1.0), 0.0, 1.0, &q).unwrap(),
            real(1.0),
        ),
        (
            "x^5 on [0,2]",
            integrate_adaptive(|x| real(x.powi(5)), 0.0, 2.0, &q).unwrap(),
            real(64.0 / 6.0),
        ),
        (
            "sin on [0,π]",
            integrate_adaptive(|x| real(x.sin()), 0.0, PI, &q).unwrap(),
            real(2.0),
        ),
        (
            "e^x on [0,1]",
            integrate_adaptive(|x| real(x.exp()), 0.0, 1.0, &q).unwrap(),
            real(1f64.exp() - 1.0),
        ),
        (
            "1/(1+x²) on [0,1]",
            integrate_adaptive(|x| real(1.0 / (1.0 + x * x)), 0.0, 1.0, &q).unwrap(),
            real(PI / 4.0),
        ),
        (
            "√x on [0,1]",
            integrate_adaptive(|x| real(x.sqrt()), 0.0, 1.0, &q).unwrap(),
            real(2.0 / 3.0),
        ),
        (
            "ln x on [0,1]",
            integrate_adaptive(|x| real(x.ln()), 0.0, 1.0, &q).unwrap(),
            real(-1.0),
        ),
        (
            "e^{ix} on [0,2π]",
            integrate_adaptive(|x| c(0.0, x).exp(), 0.0, 2.0 * PI, &q).unwrap(),
            real(0.0),
        ),
        (
            "e^{-x} on [0,∞)",
            integrate_tail(|x| real((-x).exp()), 0.0, &q).unwrap(),
            real(1.0),
        ),
        (
            "x e^{-x} on [0,∞)",
            integrate_tail(|x| real(x * (-x).exp()), 0.0, &q).unwrap(),
            real(1.0),
        ),
        (
            "1/(1+x²) on [0,∞)",
            integrate_tail(|x| real(1.0 / (1.0 + x * x)), 0.0, &q).unwrap(),
            real(PI / 2.0),
        ),
        (
            "e^{-x²} on [0,∞)",
            integrate_tail(|x| real((-x * x).exp()), 0.0, &q).unwrap(),
            real(PI.sqrt() / 2.0),
        ),
        (
            "e^{-u}/u on [1,∞)",
            integrate_tail(|u| real((-u).exp() / u), 1.0, &q).unwrap(),
            real(0.219_383_934_395_520_3),
        ),
        (
            "e^{ix}e^{-x}",
            integrate_semiinfinite_oscillatory(|x| (c(0.0, 1.0) * x).exp() * (-x).exp(), 1.0, &oq)
                .unwrap(),
            c(0.5, 0.5),
        ),
        (
            "e^{2ix}e^{-x}",
            integrate_semiinfinite_oscillatory(|x| (c(0.0, 2.0) * x).exp() * (-x).exp(), 2.0, &oq)
                .unwrap(),
            c(1.0, 0.0) / c(1.0, -2.0),
        ),
        (
            "x e^{-ix}e^{-x}",
            integrate_semiinfinite_oscillatory(
                |x| x * (c(0.0, -1.0) * x).exp() * (-x).exp(),
                -1.0,
                &oq,
            )
            .unwrap(),
            c(1.0, 0.0) / (c(1.0, 1.0) * c(1.0, 1.0)),
        ),
        (
            "PV 1/cos",
            integrate_pv_circle(|p| real(1.0 / p.cos()), &[PI / 2.0, 3.0 * PI / 2.0], &q).unwrap(),
            real(0.0),
        ),
        (
            "PV (1 + cos)/cos",
            integrate_pv_circle(
                |p| real((1.0 + p.cos()) / p.cos()),
                &[PI / 2.0, 3.0 * PI / 2.0],
                &q,
            )
            .unwrap(),
            real(2.0 * PI),
        ),
        (
            "sphere",
            integrate_rectangle(|t, _| real(t.sin()), (0.0, PI), (0.0, 2.0 * PI), &q).unwrap(),
            real(4.0 * PI),
        ),
        (
            "xy on the unit square",
            integrate_rectangle(|x, y| real(x * y), (0.0, 1.0), (0.0, 1.0), &q).unwrap(),
            real(0.25),
        ),
    ];
    assert_eq!(cases.len(), 20);
    // below a few ulps of the result an estimate cannot be resolved
    let misses: Vec<&str> = cases
        .iter()
        .filter(|(_, e, truth)| {
            (e.value - truth).norm() > e.err.max(16.0 * f64::EPSILON * truth.norm().max(1.0))
        })
        .map(|(name, _, _)| *name)
        .collect();
    assert!(misses.len() <= 1, "estimates too small for {misses:?}");
}

#[test]
fn sweeps_are_bitwise_identical_across_thread_counts() {
    let mut cfg = SweepConfig::new(SweepTarget::Fg3);
    cfg.s_values = vec![50.0, 80.0, 120.0];
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| csv_string(&run_sweep(&cfg).unwrap()).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(4));
}
