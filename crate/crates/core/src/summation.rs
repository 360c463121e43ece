//! Series acceleration and extrapolation primitives.

use num_complex::Complex64;
#[cfg(test)]
use num_traits::Zero;

/// Neumaier-compensated complex accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Compensated {
    sum: Complex64,
    carry: Complex64,
}

impl Compensated {
    pub fn add(&mut self, v: Complex64) {
        self.sum.re = two_sum(self.sum.re, v.re, &mut self.carry.re);
        self.sum.im = two_sum(self.sum.im, v.im, &mut self.carry.im);
    }

    pub fn value(&self) -> Complex64 {
        self.sum + self.carry
    }
}

#[inline]
fn two_sum(s: f64, v: f64, carry: &mut f64) -> f64 {
    let t = s + v;
    if s.abs() >= v.abs() {
        *carry += (s - t) + v;
    } else {
        *carry += (v - t) + s;
    }
    t
}

/// `sum_{k>=0} (-1)^k a_k` by the Cohen–Rodriguez Villegas–Zagier
/// alternating-series algorithm with `n` terms.
///
/// Exact up to `O(5.83^{-n})` for moment sequences `a_k = int u^k dmu(u)`
/// on `[0, 1]`, which covers finite combinations of `u^k`, `k^j u^k` and
/// analytic functions of `u^k`; for such sequences the result is the Abel
/// sum.
#[cfg(test)]
pub(crate) fn cvz<F: FnMut(usize) -> Complex64>(n: usize, mut a: F) -> Complex64 {
    let mut s = Complex64::zero();
    for (k, w) in cvz_weights(n).into_iter().enumerate() {
        s += a(k) * w;
    }
    s
}

/// Weights `omega_k` (signs included) with `cvz(n, a) = sum_k omega_k a_k`;
/// the method is linear, so vector-valued sequences can share them.
pub(crate) fn cvz_weights(n: usize) -> Vec<f64> {
    let d0 = (3.0 + 8f64.sqrt()).powi(n as i32);
    let d = (d0 + 1.0 / d0) / 2.0;
    let mut b = -1.0;
    let mut c = -d;
    let nf = n as f64;
    (0..n)
        .map(|k| {
            let kf = k as f64;
            c = b - c;
            b = (kf + nf) * (kf - nf) * b / ((kf + 0.5) * (kf + 1.0));
            c / d
        })
        .collect()
}

/// Richardson tableau for samples at step sizes halving each time
/// (`h_k = 2^{-k}`). Returns the last extrapolant of the given order and
/// its distance to the previous one.
pub(crate) fn richardson(values: &[Complex64], order: usize) -> (Complex64, f64) {
    assert!(values.len() >= order + 2, "too few samples for the extrapolation order");
    let mut row = values.to_vec();
    for j in 1..=order {
        let f = 2f64.powi(j as i32);
        row = row.windows(2).map(|w| (w[1] * f - w[0]) / (f - 1.0)).collect();
    }
    let n = row.len();
    (row[n - 1], (row[n - 1] - row[n - 2]).norm())
}

/// l1 norm of the linear map from samples to the difference of the last
/// two extrapolants: how much independent sample noise is amplified.
pub(crate) fn richardson_noise_gain(len: usize, order: usize) -> f64 {
    (0..len)
        .map(|i| {
            let unit: Vec<_> = (0..len).map(|j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)).collect();
            let mut row = unit;
            for j in 1..=order {
                let f = 2f64.powi(j as i32);
                row = row.windows(2).map(|w| (w[1] * f - w[0]) / (f - 1.0)).collect();
            }
            let n = row.len();
            (row[n - 1] - row[n - 2]).norm()
        })
        .sum()
}

/// `sum_{s > level} C(s + r - 1, r - 1) rho^s`, an upper bound for the mass
/// of lattice points beyond a weighted shell.
pub(crate) fn shell_tail(r: usize, rho: f64, level: u64) -> f64 {
    if rho <= 0.0 {
        return 0.0;
    }
    assert!(rho < 1.0);
    let rf = r as f64;
    let mut s = level as f64 + 1.0;
    // C(s + r - 1, r - 1) rho^s in log space
    let mut log_term = ln_binom(s + rf - 1.0, rf - 1.0) + s * rho.ln();
    let mut acc = 0.0;
    loop {
        let term = log_term.exp();
        let ratio = rho * (s + rf) / (s + 1.0);
        if ratio < 1.0 {
            let rest = term / (1.0 - ratio);
            if term == 0.0 || rest <= 1e-3 * (acc + term) || rest < 1e-300 {
                return acc + rest;
            }
        }
        acc += term;
        log_term += ratio.ln();
        s += 1.0;
    }
}

fn ln_binom(n: f64, k: f64) -> f64 {
    ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0)
}

/// `ln Gamma(x)` for `x > 0` (Stirling with shift; accurate to ~1e-13
/// absolute).
pub(crate) fn ln_gamma(mut x: f64) -> f64 {
    let mut shift = 0.0;
    while x < 15.0 {
        shift -= x.ln();
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    shift + (x - 0.5) * x.ln() - x
        + 0.5 * (2.0 * std::f64::consts::PI).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    #[test]
    fn cvz_log2() {
        // sum (-1)^k / (k + 1) = ln 2
        let v = cvz(40, |k| c(1.0 / (k as f64 + 1.0)));
        assert!((v.re - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn cvz_abel_sums_of_growing_sequences() {
        // Abel sums: sum (-1)^k = 1/2, sum (-1)^k (k+1) = 1/4
        assert!((cvz(48, |_| c(1.0)).re - 0.5).abs() < 1e-14);
        assert!((cvz(48, |k| c(k as f64 + 1.0)).re - 0.25).abs() < 1e-12);
        // sum (-1)^k C(k+2, 2) = 1/8; terms reach ~1e3, so roundoff dominates
        let v = cvz(48, |k| c(((k + 1) * (k + 2)) as f64 / 2.0));
        assert!((v.re - 0.125).abs() < 1e-10);
    }

    #[test]
    fn richardson_removes_polynomial_error() {
        // f(h) = 1 + h + h^2 + h^3 is reproduced exactly at h = 0
        let vals: Vec<_> = (2..8)
            .map(|k| {
                let h = 2f64.powi(-k);
                c(1.0 + h + h * h + h * h * h)
            })
            .collect();
        let (v, d) = richardson(&vals, 3);
        assert!((v.re - 1.0).abs() < 1e-14 && d < 1e-14);
    }

    #[test]
    fn noise_gains() {
        // order 0: the difference of the last two samples
        assert_eq!(richardson_noise_gain(5, 0), 2.0);
        assert!(richardson_noise_gain(11, 3) > 2.0);
        let l1: f64 = cvz_weights(48).iter().map(|w| w.abs()).sum();
        assert!(l1 > 1.0 && l1 < 48.0);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut acc = Compensated::default();
        acc.add(c(1e16));
        for _ in 0..10 {
            acc.add(c(1.0));
        }
        acc.add(c(-1e16));
        assert_eq!(acc.value().re, 10.0);
    }

    #[test]
    fn shell_tail_matches_geometric_series() {
        // r = 1: sum_{s > L} rho^s = rho^{L+1} / (1 - rho)
        let v = shell_tail(1, 0.5, 10);
        assert!((v - 0.5f64.powi(11) / 0.5).abs() < 1e-3 * v);
        // r = 2: sum_{s > 0} (s + 1) rho^s = 1/(1-rho)^2 - 1
        let v = shell_tail(2, 0.5, 0);
        assert!((v - 3.0).abs() < 1e-2);
        assert!(shell_tail(3, 0.9, 400) < shell_tail(3, 0.9, 200));
    }

    #[test]
    fn ln_gamma_values() {
        assert!((ln_gamma(5.0) - 24f64.ln()).abs() < 1e-12);
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-12);
    }
}
