//! Dirichlet characters of odd modulus.
//!
//! The unit group of `Z/f` splits by CRT into cyclic factors, one per odd
//! prime power dividing `f`. Each factor's generator is the smallest
//! residue that is congruent to 1 modulo the other prime powers and
//! generates that factor. A character is an exponent tuple over these
//! generators; enumeration is lexicographic in the tuple.

use num_complex::Complex64;
use num_integer::Integer;

use crate::error::{Error, Result};

pub const MAX_MODULUS: u64 = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct DirichletChar {
    modulus: u64,
    values: Vec<Complex64>,
    order: u64,
    index: usize,
    primitive: bool,
}

impl DirichletChar {
    pub fn trivial(modulus: u64) -> Result<Self> {
        Ok(characters_mod(modulus)?.swap_remove(0))
    }

    /// Character `index` in the deterministic enumeration mod `modulus`.
    pub fn from_index(modulus: u64, index: usize) -> Result<Self> {
        let mut all = characters_mod(modulus)?;
        if index >= all.len() {
            return Err(Error::InvalidSpec(format!(
                "character index {index} out of range; there are {} characters mod {modulus}",
                all.len()
            )));
        }
        Ok(all.swap_remove(index))
    }

    /// Builds a character from an explicit value table `v_0, ..., v_{f-1}`
    /// and checks that it really is one.
    pub fn from_values(values: Vec<Complex64>) -> Result<Self> {
        let f = values.len() as u64;
        check_modulus(f)?;
        let tol = 1e-9;
        for m in 0..f {
            let unit = m.gcd(&f) == 1;
            let v = values[m as usize];
            if unit && (v.norm() - 1.0).abs() > tol {
                return Err(Error::InvalidSpec(format!("chi({m}) is not a root of unity")));
            }
            if !unit && v.norm() > tol {
                return Err(Error::InvalidSpec(format!("chi({m}) must vanish on a non-unit")));
            }
        }
        if (values[1 % f as usize] - Complex64::new(1.0, 0.0)).norm() > tol {
            return Err(Error::InvalidSpec("chi(1) must be 1".into()));
        }
        for a in 1..f {
            for b in 1..f {
                if a.gcd(&f) == 1 && b.gcd(&f) == 1 {
                    let lhs = values[((a * b) % f) as usize];
                    let rhs = values[a as usize] * values[b as usize];
                    if (lhs - rhs).norm() > tol {
                        return Err(Error::InvalidSpec("values are not multiplicative".into()));
                    }
                }
            }
        }
        let order = value_order(&values, f);
        let index = characters_mod(f)?
            .iter()
            .position(|c| c.values.iter().zip(&values).all(|(x, y)| (x - y).norm() < tol))
            .unwrap_or(0);
        let values = values.into_iter().map(snap).collect::<Vec<_>>();
        let primitive = is_primitive(&values, f);
        Ok(Self { modulus: f, values, order, index, primitive })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn is_primitive(&self) -> bool {
        self.primitive
    }

    pub fn is_trivial(&self) -> bool {
        self.order == 1
    }

    /// True when every value lies in `{-1, 0, 1}`.
    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn eval(&self, m: i64) -> Complex64 {
        self.values[m.rem_euclid(self.modulus as i64) as usize]
    }

    /// Integer value of a real character.
    pub fn eval_real(&self, m: i64) -> Result<i64> {
        let v = self.eval(m);
        if v.im != 0.0 {
            return Err(Error::NonRealCharacter);
        }
        Ok(v.re as i64)
    }
}

/// `chi(m)`, reducing `m` modulo the modulus; zero on non-units.
pub fn char_eval(chi: &DirichletChar, m: i64) -> Complex64 {
    chi.eval(m)
}

fn check_modulus(f: u64) -> Result<()> {
    if f == 0 || f > MAX_MODULUS {
        return Err(Error::ModulusOutOfRange(f));
    }
    if f.is_multiple_of(2) {
        return Err(Error::EvenModulus(f));
    }
    Ok(())
}

/// Snaps components that are within rounding of 0 or +-1 to the exact value.
fn snap(z: Complex64) -> Complex64 {
    let fix = |v: f64| {
        for target in [-1.0, 0.0, 1.0] {
            if (v - target).abs() < 1e-12 {
                return target;
            }
        }
        v
    };
    Complex64::new(fix(z.re), fix(z.im))
}

/// `exp(2 pi i num / den)` with exact values at quarter turns.
fn root_of_unity(num: u64, den: u64) -> Complex64 {
    let g = num.gcd(&den);
    let (num, den) = (num / g, den / g);
    if (4 * num) % den == 0 {
        return match (4 * num / den) % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    let theta = 2.0 * std::f64::consts::PI * num as f64 / den as f64;
    snap(Complex64::new(theta.cos(), theta.sin()))
}

fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 3;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 2;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn mult_order(g: u64, m: u64) -> u64 {
    let mut x = g % m;
    let mut k = 1;
    while x != 1 % m {
        x = x * g % m;
        k += 1;
    }
    k
}

fn value_order(values: &[Complex64], f: u64) -> u64 {
    let mut order = 1u64;
    for m in 1..f {
        if m.gcd(&f) != 1 {
            continue;
        }
        let v = values[m as usize];
        let mut k = 1u64;
        let mut p = v;
        while (p - Complex64::new(1.0, 0.0)).norm() > 1e-9 && k <= f {
            p *= v;
            k += 1;
        }
        order = order.lcm(&k);
    }
    order
}

/// Primitive iff no proper divisor `d | f` makes `chi` trivial on units
/// congruent to 1 mod `d`.
fn is_primitive(values: &[Complex64], f: u64) -> bool {
    if f == 1 {
        return true;
    }
    for d in 1..f {
        if !f.is_multiple_of(d) {
            continue;
        }
        let induced = (1..f)
            .filter(|&a| a.gcd(&f) == 1 && a % d == 1 % d)
            .all(|a| (values[a as usize] - Complex64::new(1.0, 0.0)).norm() < 1e-9);
        if induced {
            return false;
        }
    }
    true
}

/// All `phi(f)` characters mod an odd `f`, in deterministic order.
pub fn characters_mod(f: u64) -> Result<Vec<DirichletChar>> {
    check_modulus(f)?;
    if f == 1 {
        return Ok(vec![DirichletChar {
            modulus: 1,
            values: vec![Complex64::new(1.0, 0.0)],
            order: 1,
            index: 0,
            primitive: true,
        }]);
    }
    let factors = factorize(f);
    let mut gens = Vec::with_capacity(factors.len());
    let mut orders = Vec::with_capacity(factors.len());
    for &(p, e) in &factors {
        let pe = p.pow(e);
        let rest = f / pe;
        let phi = pe / p * (p - 1);
        let g = (2..f)
            .find(|&g| g % rest == 1 % rest && g % p != 0 && mult_order(g % pe, pe) == phi)
            .expect("the unit group of an odd prime power is cyclic");
        gens.push(g);
        orders.push(phi);
    }

    // discrete log table: unit -> exponent tuple
    let mut logs: Vec<Option<Vec<u64>>> = vec![None; f as usize];
    let total: u64 = orders.iter().product();
    for flat in 0..total {
        let mut rem = flat;
        let mut exps = vec![0u64; gens.len()];
        let mut value = 1u64;
        for i in (0..gens.len()).rev() {
            exps[i] = rem % orders[i];
            rem /= orders[i];
        }
        for (g, &k) in gens.iter().zip(&exps) {
            for _ in 0..k {
                value = value * g % f;
            }
        }
        logs[value as usize] = Some(exps);
    }

    let mut chars = Vec::with_capacity(total as usize);
    for index in 0..total {
        let mut rem = index;
        let mut char_exps = vec![0u64; gens.len()];
        for i in (0..gens.len()).rev() {
            char_exps[i] = rem % orders[i];
            rem /= orders[i];
        }
        let values: Vec<Complex64> = (0..f)
            .map(|m| match &logs[m as usize] {
                None => Complex64::new(0.0, 0.0),
                Some(l) => {
                    // sum_i e_i l_i / n_i as a fraction over lcm(n_i)
                    let den = orders.iter().fold(1u64, |a, b| a.lcm(b));
                    let num =
                        char_exps.iter().zip(l).zip(&orders).map(|((e, li), n)| e * li % n * (den / n)).sum::<u64>()
                            % den;
                    root_of_unity(num, den)
                }
            })
            .collect();
        let order = char_exps.iter().zip(&orders).map(|(&e, &n)| n / e.gcd(&n)).fold(1u64, |a, b| a.lcm(&b));
        let primitive = is_primitive(&values, f);
        chars.push(DirichletChar { modulus: f, values, order, index: index as usize, primitive });
    }
    Ok(chars)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn modulus_one() {
        let chars = characters_mod(1).unwrap();
        assert_eq!(chars.len(), 1);
        for m in -5..5 {
            assert_eq!(chars[0].eval(m), c(1.0, 0.0));
        }
    }

    #[test]
    fn modulus_three() {
        let chars = characters_mod(3).unwrap();
        assert_eq!(chars.len(), 2);
        assert!(chars[0].is_trivial());
        assert_eq!(chars[1].eval(2), c(-1.0, 0.0));
        assert_eq!(char_eval(&chars[1], 5), c(-1.0, 0.0));
        assert_eq!(chars[1].eval(0), c(0.0, 0.0));
        assert!(chars[1].is_primitive());
    }

    #[test]
    fn modulus_five() {
        let chars = characters_mod(5).unwrap();
        let mut orders: Vec<u64> = chars.iter().map(|c| c.order()).collect();
        orders.sort();
        assert_eq!(orders, vec![1, 2, 4, 4]);
        for chi in chars.iter().filter(|c| c.order() == 4) {
            for m in 1..5 {
                let v = chi.eval(m);
                assert!([c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0)].contains(&v));
            }
        }
        assert!(chars.iter().filter(|c| c.order() == 2).all(|c| c.is_real()));
    }

    #[test]
    fn rejects_even_modulus() {
        assert_eq!(characters_mod(4), Err(Error::EvenModulus(4)));
        assert!(characters_mod(0).is_err());
        assert!(characters_mod(10_001).is_err());
    }

    #[test]
    fn generator_of_composite_modulus() {
        // mod 15: phi = 8 characters, group Z/2 x Z/4
        let chars = characters_mod(15).unwrap();
        assert_eq!(chars.len(), 8);
        // the character induced from mod 3 is not primitive
        assert!(chars.iter().any(|c| !c.is_primitive() && !c.is_trivial()));
    }

    #[test]
    fn from_values_round_trip() {
        let chi = DirichletChar::from_index(5, 2).unwrap();
        let rebuilt = DirichletChar::from_values(chi.values().to_vec()).unwrap();
        assert_eq!(rebuilt.index(), 2);
        assert_eq!(rebuilt.order(), chi.order());
        let bad = vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0)];
        assert!(DirichletChar::from_values(bad).is_err());
    }

    fn phi(f: u64) -> u64 {
        (1..=f).filter(|m| m.gcd(&f) == 1).count() as u64
    }

    #[test]
    fn orthogonality_up_to_45() {
        for f in (1..=45u64).step_by(2) {
            let chars = characters_mod(f).unwrap();
            assert_eq!(chars.len() as u64, phi(f));
            for (i, chi) in chars.iter().enumerate() {
                let total: Complex64 = (0..f as i64).map(|m| chi.eval(m)).sum();
                if i == 0 {
                    assert!(chi.is_trivial());
                } else {
                    assert!(total.norm() < 1e-12, "f={f} i={i}");
                }
                for (j, psi) in chars.iter().enumerate() {
                    let inner: Complex64 = (0..f as i64).map(|m| chi.eval(m) * psi.eval(m).conj()).sum();
                    let expect = if i == j { phi(f) as f64 } else { 0.0 };
                    assert!((inner - c(expect, 0.0)).norm() < 1e-12, "f={f} i={i} j={j}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn multiplicative_on_units(idx in 0usize..1000, a in 1i64..10_000, b in 1i64..10_000) {
            for f in [3u64, 5, 7, 9, 15, 21, 45] {
                let chars = characters_mod(f).unwrap();
                let chi = &chars[idx % chars.len()];
                let lhs = chi.eval(a * b);
                let rhs = chi.eval(a) * chi.eval(b);
                prop_assert!((lhs - rhs).norm() < 1e-12);
            }
        }
    }
}
