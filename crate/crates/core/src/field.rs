//! Arithmetic in GF(p^m).
//!
//! Elements are integers in `0..d`; the base-p digits of an element are the
//! coefficients of its polynomial representative, least significant digit
//! first. The reduction modulus is the lexicographically least monic
//! irreducible polynomial of degree m (coefficients compared from the highest
//! degree down), so every run picks the same representation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest field order accepted by [`make_field`].
pub const DEFAULT_FIELD_CAP: u32 = 1024;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not a prime power")]
    NotAPrimePower(u32),
    #[error("field order {order} exceeds cap {cap}")]
    TooLarge { order: u32, cap: u32 },
    #[error("element {value} out of range for GF({order})")]
    OutOfRange { value: u32, order: u32 },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("invalid field descriptor: {0}")]
    InvalidDescriptor(String),
}

/// An element of some GF(d), stored as its integer encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FieldElement(pub u32);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    pub fn value(self) -> u32 {
        self.0
    }
}

impl From<u32> for FieldElement {
    fn from(v: u32) -> Self {
        FieldElement(v)
    }
}

/// Parameters of a finite field GF(p^m).
///
/// `modulus` holds the m+1 coefficients of the reduction polynomial, constant
/// term first; the last entry is always 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u32,
    pub m: u32,
    pub d: u32,
    pub modulus: Vec<u32>,
}

/// Returns `Some((p, m))` when `d = p^m` for a prime `p` and `m >= 1`.
pub fn prime_power(d: u32) -> Option<(u32, u32)> {
    if d < 2 {
        return None;
    }
    let mut p = 2;
    while p * p <= d {
        if d.is_multiple_of(p) {
            break;
        }
        p += 1;
    }
    if !d.is_multiple_of(p) {
        // d itself is prime
        return Some((d, 1));
    }
    let mut rest = d;
    let mut m = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        m += 1;
    }
    (rest == 1).then_some((p, m))
}

pub fn is_prime_power(d: u32) -> bool {
    prime_power(d).is_some()
}

/// Builds GF(d) with the canonical modulus.
pub fn make_field(d: u32) -> Result<FieldSpec, FieldError> {
    make_field_with_cap(d, DEFAULT_FIELD_CAP)
}

pub fn make_field_with_cap(d: u32, cap: u32) -> Result<FieldSpec, FieldError> {
    if d > cap {
        return Err(FieldError::TooLarge { order: d, cap });
    }
    let (p, m) = prime_power(d).ok_or(FieldError::NotAPrimePower(d))?;
    let modulus = least_irreducible(p, m);
    Ok(FieldSpec { p, m, d, modulus })
}

/// Polynomials over GF(p) as coefficient vectors, constant term first.
mod poly {
    pub fn trim(mut a: Vec<u32>) -> Vec<u32> {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    }

    /// Remainder of `a` modulo the monic polynomial `b`.
    pub fn rem_monic(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let mut r = a.to_vec();
        let db = b.len() - 1;
        while r.len() > db {
            let lead = *r.last().unwrap();
            let shift = r.len() - 1 - db;
            if lead != 0 {
                for (i, &c) in b.iter().enumerate() {
                    r[shift + i] = (r[shift + i] + p - (lead * c) % p) % p;
                }
            }
            r.pop();
        }
        trim(r)
    }

    /// Monic polynomial of degree `deg` whose lower coefficients are the
    /// base-p digits of `code`.
    pub fn monic_from_code(mut code: u64, deg: u32, p: u32) -> Vec<u32> {
        let mut out = Vec::with_capacity(deg as usize + 1);
        for _ in 0..deg {
            out.push((code % p as u64) as u32);
            code /= p as u64;
        }
        out.push(1);
        out
    }
}

fn is_irreducible(f: &[u32], p: u32) -> bool {
    let deg = (f.len() - 1) as u32;
    if deg <= 1 {
        return deg == 1;
    }
    for div_deg in 1..=deg / 2 {
        let count = (p as u64).pow(div_deg);
        for code in 0..count {
            let g = poly::monic_from_code(code, div_deg, p);
            if poly::rem_monic(f, &g, p).is_empty() {
                return false;
            }
        }
    }
    true
}

/// Lexicographically least monic irreducible polynomial of degree m over
/// GF(p). Counting the lower coefficients as a base-p integer with the x^(m-1)
/// coefficient most significant gives exactly that order.
fn least_irreducible(p: u32, m: u32) -> Vec<u32> {
    let count = (p as u64).pow(m);
    (0..count)
        .map(|code| poly::monic_from_code(code, m, p))
        .find(|f| is_irreducible(f, p))
        .expect("an irreducible polynomial exists in every degree")
}

impl FieldSpec {
    /// Rebuilds a field from a serialized descriptor, checking every invariant.
    pub fn validated(p: u32, m: u32, modulus: Vec<u32>) -> Result<FieldSpec, FieldError> {
        let bad = |msg: &str| FieldError::InvalidDescriptor(msg.to_string());
        if prime_power(p) != Some((p, 1)) {
            return Err(bad("p is not prime"));
        }
        if m == 0 || modulus.len() != m as usize + 1 || modulus.last() != Some(&1) {
            return Err(bad("modulus must be monic of degree m"));
        }
        if modulus.iter().any(|&c| c >= p) {
            return Err(bad("modulus coefficient out of range"));
        }
        if !is_irreducible(&modulus, p) {
            return Err(bad("modulus is reducible"));
        }
        let d = p
            .checked_pow(m)
            .ok_or_else(|| bad("field order overflows"))?;
        Ok(FieldSpec { p, m, d, modulus })
    }

    pub fn order(&self) -> u32 {
        self.d
    }

    pub fn element(&self, value: u32) -> Result<FieldElement, FieldError> {
        self.check(FieldElement(value))
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElement> {
        (0..self.d).map(FieldElement)
    }

    fn check(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        if a.0 < self.d {
            Ok(a)
        } else {
            Err(FieldError::OutOfRange {
                value: a.0,
                order: self.d,
            })
        }
    }

    fn digits(&self, mut v: u32) -> Vec<u32> {
        let mut out = vec![0; self.m as usize];
        for slot in out.iter_mut() {
            *slot = v % self.p;
            v /= self.p;
        }
        out
    }

    fn from_digits(&self, digits: &[u32]) -> FieldElement {
        FieldElement(digits.iter().rev().fold(0, |acc, &c| acc * self.p + c))
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
        let (a, b) = (self.check(a)?, self.check(b)?);
        let sum: Vec<u32> = self
            .digits(a.0)
            .into_iter()
            .zip(self.digits(b.0))
            .map(|(x, y)| (x + y) % self.p)
            .collect();
        Ok(self.from_digits(&sum))
    }

    pub fn neg(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        let a = self.check(a)?;
        let neg: Vec<u32> = self
            .digits(a.0)
            .into_iter()
            .map(|x| (self.p - x) % self.p)
            .collect();
        Ok(self.from_digits(&neg))
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
        let (a, b) = (self.check(a)?, self.check(b)?);
        let (da, db) = (self.digits(a.0), self.digits(b.0));
        let p = self.p as u64;
        let mut prod = vec![0u32; 2 * self.m as usize - 1];
        for (i, &x) in da.iter().enumerate() {
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] = ((prod[i + j] as u64 + x as u64 * y as u64) % p) as u32;
            }
        }
        let mut r = poly::rem_monic(&prod, &self.modulus, self.p);
        r.resize(self.m as usize, 0);
        Ok(self.from_digits(&r))
    }

    /// Multiplicative inverse by exhaustive scan; fields here are small.
    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        let a = self.check(a)?;
        if a.0 == 0 {
            return Err(FieldError::ZeroInverse);
        }
        for b in 1..self.d {
            if self.mul(a, FieldElement(b))? == FieldElement::ONE {
                return Ok(FieldElement(b));
            }
        }
        unreachable!("nonzero element of a field without inverse: modulus is reducible")
    }

    /// Full addition and multiplication tables for repeated arithmetic.
    pub fn tables(&self) -> FieldTables {
        let d = self.d as usize;
        let mut add = vec![0u32; d * d];
        let mut mul = vec![0u32; d * d];
        for a in 0..self.d {
            for b in 0..self.d {
                let (x, y) = (FieldElement(a), FieldElement(b));
                add[a as usize * d + b as usize] = self.add(x, y).unwrap().0;
                mul[a as usize * d + b as usize] = self.mul(x, y).unwrap().0;
            }
        }
        FieldTables { d, add, mul }
    }
}

/// Precomputed Cayley tables of a field; lookups take raw encodings.
#[derive(Debug, Clone)]
pub struct FieldTables {
    d: usize,
    add: Vec<u32>,
    mul: Vec<u32>,
}

impl FieldTables {
    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        self.add[a as usize * self.d + b as usize]
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        self.mul[a as usize * self.d + b as usize]
    }

    /// Evaluates the polynomial with the given coefficients (constant first)
    /// at `x` by Horner's rule.
    pub fn eval(&self, coeffs: &[u32], x: u32) -> u32 {
        coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| self.add(self.mul(acc, x), c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fe(v: u32) -> FieldElement {
        FieldElement(v)
    }

    #[test]
    fn prime_field_has_modulus_x() {
        let f = make_field(5).unwrap();
        assert_eq!((f.p, f.m, f.d), (5, 1, 5));
        assert_eq!(f.modulus, vec![0, 1]);
    }

    #[test]
    fn gf4_modulus() {
        let f = make_field(4).unwrap();
        assert_eq!((f.p, f.m), (2, 2));
        assert_eq!(f.modulus, vec![1, 1, 1]);
    }

    #[test]
    fn canonical_moduli_match_exhaustive_search() {
        // Independent route: a monic polynomial is irreducible iff it has no
        // root-free factorisation, checked here by multiplying out every pair
        // of monic factors of complementary degree.
        fn products(p: u32, m: u32) -> std::collections::HashSet<Vec<u32>> {
            let mut out = std::collections::HashSet::new();
            for a in 1..m {
                let b = m - a;
                for ca in 0..(p as u64).pow(a) {
                    for cb in 0..(p as u64).pow(b) {
                        let f = poly::monic_from_code(ca, a, p);
                        let g = poly::monic_from_code(cb, b, p);
                        let mut prod = vec![0u32; (m + 1) as usize];
                        for (i, x) in f.iter().enumerate() {
                            for (j, y) in g.iter().enumerate() {
                                prod[i + j] = (prod[i + j] + x * y) % p;
                            }
                        }
                        out.insert(prod);
                    }
                }
            }
            out
        }
        for (p, m) in [(2, 2), (2, 3), (3, 2), (2, 4), (2, 5), (3, 3), (5, 2)] {
            let reducible = products(p, m);
            let expected = (0..(p as u64).pow(m))
                .map(|c| poly::monic_from_code(c, m, p))
                .find(|f| !reducible.contains(f))
                .unwrap();
            let f = make_field(p.pow(m)).unwrap();
            assert_eq!(f.modulus, expected, "GF({}^{})", p, m);
        }
    }

    #[test]
    fn non_prime_powers_rejected() {
        assert_eq!(make_field(6), Err(FieldError::NotAPrimePower(6)));
        let failing: Vec<u32> = (2..=32).filter(|&d| make_field(d).is_err()).collect();
        assert_eq!(
            failing,
            vec![6, 10, 12, 14, 15, 18, 20, 21, 22, 24, 26, 28, 30]
        );
        assert!(make_field(1).is_err());
        assert!(make_field(0).is_err());
    }

    #[test]
    fn cap_is_enforced() {
        assert_eq!(
            make_field(2048),
            Err(FieldError::TooLarge {
                order: 2048,
                cap: DEFAULT_FIELD_CAP
            })
        );
        assert!(make_field_with_cap(2048, 4096).is_ok());
    }

    #[test]
    fn small_examples() {
        let f5 = make_field(5).unwrap();
        assert_eq!(f5.add(fe(2), fe(4)).unwrap(), fe(1));
        assert_eq!(f5.mul(fe(2), fe(3)).unwrap(), fe(1));
        assert_eq!(f5.inv(fe(2)).unwrap(), fe(3));

        let f4 = make_field(4).unwrap();
        assert_eq!(f4.add(fe(2), fe(3)).unwrap(), fe(1));
        for a in f4.elements() {
            assert_eq!(f4.add(a, a).unwrap(), FieldElement::ZERO);
        }
        assert_eq!(f4.mul(fe(2), fe(2)).unwrap(), fe(3));
        assert_eq!(f4.mul(fe(2), fe(3)).unwrap(), fe(1));
        assert_eq!(f4.inv(fe(2)).unwrap(), fe(3));
    }

    #[test]
    fn errors() {
        let f4 = make_field(4).unwrap();
        assert_eq!(
            f4.add(fe(4), fe(0)),
            Err(FieldError::OutOfRange { value: 4, order: 4 })
        );
        assert!(f4.mul(fe(0), fe(9)).is_err());
        assert_eq!(f4.inv(fe(0)), Err(FieldError::ZeroInverse));
    }

    #[test]
    fn field_axioms_up_to_32() {
        for d in (2..=32).filter(|&d| is_prime_power(d)) {
            let f = make_field(d).unwrap();
            let t = f.tables();
            let zero = 0;
            let one = 1;
            for a in 0..d {
                assert_eq!(t.add(a, zero), a);
                assert_eq!(t.mul(a, one), a);
                assert!((0..d).any(|b| t.add(a, b) == zero), "additive inverse");
                if a != 0 {
                    let inv = f.inv(fe(a)).unwrap();
                    assert_eq!(t.mul(a, inv.0), one);
                    assert_eq!(f.inv(inv).unwrap(), fe(a));
                }
                for b in 0..d {
                    assert_eq!(t.add(a, b), t.add(b, a));
                    assert_eq!(t.mul(a, b), t.mul(b, a));
                    for c in 0..d {
                        assert_eq!(t.add(t.add(a, b), c), t.add(a, t.add(b, c)));
                        assert_eq!(t.mul(t.mul(a, b), c), t.mul(a, t.mul(b, c)));
                        assert_eq!(t.mul(a, t.add(b, c)), t.add(t.mul(a, b), t.mul(a, c)));
                    }
                }
            }
            assert_eq!(f.inv(FieldElement::ONE).unwrap(), FieldElement::ONE);
        }
    }

    #[test]
    fn negation_is_additive_inverse() {
        let f = make_field(9).unwrap();
        for a in f.elements() {
            assert_eq!(f.add(a, f.neg(a).unwrap()).unwrap(), FieldElement::ZERO);
        }
    }

    #[test]
    fn descriptor_validation() {
        let f = make_field(8).unwrap();
        assert_eq!(
            FieldSpec::validated(f.p, f.m, f.modulus.clone()).unwrap(),
            f
        );
        // x^2 + 1 = (x + 1)^2 over GF(2)
        assert!(FieldSpec::validated(2, 2, vec![1, 0, 1]).is_err());
        assert!(FieldSpec::validated(4, 1, vec![0, 1]).is_err());
    }

    #[test]
    fn horner_evaluation() {
        let f = make_field(7).unwrap();
        let t = f.tables();
        // 3 + 2x + x^2 at x = 4 is 27 = 6 mod 7
        assert_eq!(t.eval(&[3, 2, 1], 4), 6);
    }
}
