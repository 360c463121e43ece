use barnesq_core::qcore::{binomial, rational, ComplexQ};
use barnesq_core::qeuler::{
    lattice_series_truncated, q_euler_closed, q_euler_closed_exact, q_euler_closed_precise, q_euler_series,
    relative_deviation, BarnesSpec, Method, PowerKind, SumConfig,
};
use barnesq_core::zeta::q_zeta;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use proptest::prelude::*;

fn axes(max_r: usize) -> impl Strategy<Value = Vec<(u8, i64)>> {
    prop::collection::vec((1u8..=4, 1i64..=3), 2..=max_r)
}

fn spec_of(x: f64, ax: &[(u8, i64)]) -> BarnesSpec {
    BarnesSpec::new(x, ax.iter().map(|a| a.0 as f64).collect(), ax.iter().map(|a| a.1).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // the defining series is symmetric in the axes
    #[test]
    fn q_zeta_is_symmetric_under_axis_permutation(
        ax in axes(3),
        x in 0.1f64..3.0,
        s in -3.0f64..4.0,
        q in 0.2f64..0.8,
        rot in 1usize..3,
    ) {
        let q = ComplexQ::real(q).unwrap();
        let cfg = SumConfig::default();
        let s = Complex64::new(s, 0.0);
        let mut permuted = ax.clone();
        permuted.rotate_left(rot % ax.len());
        permuted.swap(0, ax.len() - 1);
        let a = q_zeta(s, &spec_of(x, &ax), &q, &cfg).unwrap();
        let b = q_zeta(s, &spec_of(x, &permuted), &q, &cfg).unwrap();
        prop_assert_eq!(a.method, Method::Direct);
        prop_assert!((a.value - b.value).norm() < 1e-12 * a.value.norm().max(1.0),
            "{} vs {}", a.value, b.value);
    }

    // doubling the truncation level moves the value by less than the
    // bound, and the bound shrinks
    #[test]
    fn truncation_bound_is_honest_and_monotone(
        ax in axes(2),
        x in 0.1f64..3.0,
        s in -2.0f64..3.0,
        q in 0.2f64..0.7,
        level in 4u64..20,
    ) {
        let q = ComplexQ::real(q).unwrap();
        let spec = spec_of(x, &ax);
        let kind = PowerKind::Power(Complex64::new(-s, 0.0));
        let coarse = lattice_series_truncated(kind, &spec, &q, level).unwrap();
        let fine = lattice_series_truncated(kind, &spec, &q, 2 * level).unwrap();
        prop_assert!(fine.error < coarse.error);
        prop_assert!((coarse.value - fine.value).norm() <= coarse.error);
    }

    #[test]
    fn float_and_exact_closed_forms_agree(
        n in 0u32..8,
        x in 0i64..4,
        ax in prop::collection::vec((1i64..=3, 0i64..=3), 1..=3),
        qn in 1i64..9,
    ) {
        let q = rational(qn, 10);
        let spec = BarnesSpec::new(x as f64, ax.iter().map(|a| a.0 as f64).collect(), ax.iter().map(|a| a.1).collect()).unwrap();
        let exact = q_euler_closed_exact(n, &spec, &q).unwrap().to_f64().unwrap();
        let float = q_euler_closed_precise(n, &spec, &ComplexQ::real(qn as f64 / 10.0).unwrap()).unwrap();
        prop_assert!(relative_deviation(float, Complex64::new(exact, 0.0)) < 1e-12);
    }

    #[test]
    fn gaussian_binomials_are_symmetric(n in 0i64..14, k in 0i64..14, num in -9i64..10, den in 1i64..10) {
        prop_assume!(k <= n);
        let q = rational(num, den);
        prop_assert_eq!(binomial(n, k, &q), binomial(n, n - k, &q));
    }

    // closed form against the absolutely convergent series
    #[test]
    fn closed_form_matches_direct_series(
        n in 0u32..6,
        x in 0.1f64..2.5,
        ax in axes(3),
        q in 0.2f64..0.8,
    ) {
        let q = ComplexQ::real(q).unwrap();
        let spec = spec_of(x, &ax);
        let series = q_euler_series(n, &spec, &q, &SumConfig::default()).unwrap();
        let closed = q_euler_closed_precise(n, &spec, &q).unwrap();
        prop_assert_eq!(series.method, Method::Direct);
        prop_assert!(relative_deviation(closed, series.value) < 1e-9);
    }

    // complex q inside the unit disk: the double-precision closed form and
    // the direct series agree
    #[test]
    fn complex_q_closed_form_matches_series(
        n in 0u32..4,
        x in 0.5f64..2.0,
        re in 0.2f64..0.5,
        im in -0.3f64..0.3,
    ) {
        let q = ComplexQ::new(Complex64::new(re, im)).unwrap();
        let spec = BarnesSpec::new(x, vec![1.0, 2.0], vec![1, 1]).unwrap();
        let series = q_euler_series(n, &spec, &q, &SumConfig::default()).unwrap();
        let closed = q_euler_closed(n, &spec, &q).unwrap();
        prop_assert!(relative_deviation(closed, series.value) < 1e-9);
    }
}
