//! Frozen reference values computed outside this crate: 50-digit brute-force
//! lattice sums, series expansions of the generating functions, and plain
//! modular Riemann sums.

#![allow(clippy::excessive_precision)]

use barnesq_core::chars::DirichletChar;
use barnesq_core::padic::{fermionic_integral, IntegralConfig, IntegrandSpec, Measure, PadicNum, PadicQ};
use barnesq_core::powerseries::{barnes_bernoulli, euler_multi_classical};
use barnesq_core::qcore::{rational, ComplexQ};
use barnesq_core::qeuler::{q_euler_closed, q_euler_closed_exact, q_euler_series, BarnesSpec, Method, SumConfig};
use barnesq_core::zeta::{barnes_zeta_classical, barnes_zeta_negative, q_zeta};
use num_complex::Complex64;
use num_rational::BigRational;

fn half() -> ComplexQ {
    ComplexQ::real(0.5).unwrap()
}

fn chi3() -> DirichletChar {
    DirichletChar::from_values(vec![0.0.into(), 1.0.into(), (-1.0).into()]).unwrap()
}

fn close(got: Complex64, want: f64, tol: f64) {
    let err = (got - want).norm() / want.abs().max(1.0);
    assert!(err < tol, "got {got}, want {want}, relative error {err:e}");
}

#[test]
fn q_euler_against_brute_force_sums() {
    let cases: Vec<(u32, BarnesSpec, f64)> = vec![
        (3, BarnesSpec::new(1.0, vec![1.0], vec![1]).unwrap(), 0.250980392156862745098039215686),
        (4, BarnesSpec::new(0.25, vec![1.0, 2.0], vec![1, 1]).unwrap(), -1.77496242394708164298024134949),
        (2, BarnesSpec::new(2.0, vec![1.0, 3.0], vec![2, 1]).unwrap(), 2.77440340477276181790545674945),
        (5, BarnesSpec::new(0.5, vec![2.0], vec![1]).unwrap(), -4.1471375567710704582481082806),
        (3, BarnesSpec::new(1.0, vec![1.0], vec![1]).unwrap().with_chi(chi3()), -4.83348172537951965774634479592),
        (
            2,
            BarnesSpec::new(0.5, vec![1.0, 2.0], vec![1, 2]).unwrap().with_chi(chi3()),
            2.83764299549372893108797483276,
        ),
    ];
    for (n, spec, want) in cases {
        close(q_euler_closed(n, &spec, &half()).unwrap(), want, 1e-12);
        let s = q_euler_series(n, &spec, &half(), &SumConfig::default()).unwrap();
        assert_eq!(s.method, Method::Direct);
        close(s.value, want, 1e-12);
    }
}

#[test]
fn exact_closed_form_matches_brute_force() {
    // 0.25098039215686... = 64/255
    let spec = BarnesSpec::new(1.0, vec![1.0], vec![1]).unwrap();
    assert_eq!(q_euler_closed_exact(3, &spec, &rational(1, 2)).unwrap(), rational(64, 255));
}

#[test]
fn q_zeta_against_brute_force_sums() {
    let cases: Vec<(f64, BarnesSpec, f64)> = vec![
        (2.0, BarnesSpec::new(1.0, vec![1.0], vec![1]).unwrap(), 1.67019070461960433855059959903),
        (3.5, BarnesSpec::new(0.5, vec![1.0, 2.0], vec![1, 1]).unwrap(), 25.1050383006863671121581864247),
        (-1.5, BarnesSpec::new(2.0, vec![1.0], vec![2]).unwrap(), 2.77059114113329665397555048826),
        (2.0, BarnesSpec::new(1.0, vec![1.0], vec![1]).unwrap().with_chi(chi3()), -0.563532230015544133986477261897),
    ];
    for (s, spec, want) in cases {
        let z = q_zeta(Complex64::new(s, 0.0), &spec, &half(), &SumConfig::default()).unwrap();
        assert_eq!(z.method, Method::Direct);
        close(z.value, want, 1e-12);
        assert!(z.error < 1e-10);
    }
}

/// Hurwitz closed forms: counting representations of `k = m_1 + 2 m_2`
/// gives `(2^{1-s} zeta(s-1, 1/2) + 2^{-s} zeta(s, 1/2))/2 + 2^{-s} zeta(s-1)`;
/// `zeta_1(s, w | a) = a^{-s} zeta(s, w/a)`; three unit periods give
/// `(zeta(s-2) + zeta(s-1))/2`.
#[test]
fn classical_barnes_zeta_against_hurwitz_sums() {
    let s = |v: f64| Complex64::new(v, 0.0);
    close(barnes_zeta_classical(s(3.5), 1.0, &[1.0, 2.0]).unwrap().value, 1.18431548989820976026374034269, 1e-12);
    close(barnes_zeta_classical(s(2.5), 0.5, &[1.5]).unwrap().value, 5.92705542895487223099887546789, 1e-12);
    close(barnes_zeta_classical(s(4.5), 1.0, &[1.0, 1.0, 1.0]).unwrap().value, 1.23411056228398691309229109260, 1e-12);
}

#[test]
fn negative_integer_values_against_series_expansion() {
    let a = |v: &[(i64, i64)]| v.iter().map(|&(n, d)| rational(n, d)).collect::<Vec<_>>();
    assert_eq!(barnes_zeta_negative(2, &rational(1, 1), &a(&[(1, 1), (2, 1)])).unwrap(), rational(1, 240));
    assert_eq!(barnes_zeta_negative(3, &rational(1, 2), &a(&[(1, 1), (3, 1)])).unwrap(), rational(-7, 1920));
    assert_eq!(barnes_zeta_negative(1, &rational(2, 1), &a(&[(1, 1), (1, 1), (1, 1)])).unwrap(), rational(1, 240));
}

#[test]
fn barnes_bernoulli_against_series_expansion() {
    let r = |v: &[i64]| v.iter().map(|&n| rational(n, 1)).collect::<Vec<BigRational>>();
    assert_eq!(barnes_bernoulli(3, &rational(1, 2), &r(&[1, 2])).unwrap(), rational(1, 8));
    assert_eq!(barnes_bernoulli(4, &rational(1, 1), &r(&[1, 1, 2])).unwrap(), rational(-11, 20));
    assert_eq!(barnes_bernoulli(2, &rational(1, 3), &[rational(1, 2)]).unwrap(), rational(-1, 36));
}

#[test]
fn classical_multiple_euler_against_series_expansion() {
    let r = |v: &[i64]| v.iter().map(|&n| rational(n, 1)).collect::<Vec<BigRational>>();
    assert_eq!(euler_multi_classical(3, &rational(0, 1), &r(&[1, 2])).unwrap(), rational(9, 4));
    assert_eq!(euler_multi_classical(4, &rational(1, 2), &r(&[1, 1])).unwrap(), rational(5, 16));
    assert_eq!(euler_multi_classical(5, &rational(1, 1), &r(&[3])).unwrap(), rational(-121, 2));
}

#[test]
fn fermionic_integral_against_modular_riemann_sums() {
    // sum_{y < 3^12} (-1)^y [x + y]_4^n mod 3^10
    let table: [(i64, [i64; 5]); 3] = [
        (0, [1, 47239, 15978, 26719, 22146]),
        (1, [1, 11810, 43071, 32330, 36903]),
        (2, [1, 47241, 15980, 26721, 22148]),
    ];
    let q = PadicQ::from_i64(3, 14, 4).unwrap();
    let cfg = IntegralConfig::with_precision(10);
    for (x, values) in table {
        for (n, &want) in values.iter().enumerate() {
            let f = IntegrandSpec::q_bracket(q.clone(), x, n as u32);
            let got = fermionic_integral(&f, &Measure::One, 3, &cfg).unwrap().value;
            assert_eq!(got, PadicNum::from_i64(3, 10, want).unwrap(), "x={x} n={n}");
        }
    }
}
