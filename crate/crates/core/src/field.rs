//! Arithmetic over GF(q) for prime powers q ≤ 256.
//!
//! Elements are plain indices in `0..q`. An index is read as the coefficient
//! vector of a polynomial over GF(p) in base p, least significant digit first:
//! index `c_0 + c_1 p + … + c_{m-1} p^{m-1}` stands for `c_0 + c_1 x + …`.
//! For extension fields the modulus is taken from a fixed table of Conway
//! polynomials, so element indexing is the same on every run:
//!
//! | q   | modulus                 |
//! |-----|-------------------------|
//! | 4   | x²+x+1                  |
//! | 8   | x³+x+1                  |
//! | 16  | x⁴+x+1                  |
//! | 32  | x⁵+x²+1                 |
//! | 64  | x⁶+x⁴+x³+x+1            |
//! | 128 | x⁷+x+1                  |
//! | 256 | x⁸+x⁴+x³+x²+1           |
//! | 9   | x²+2x+2                 |
//! | 27  | x³+2x+1                 |
//! | 81  | x⁴+2x³+2                |
//! | 243 | x⁵+2x+1                 |
//! | 25  | x²+4x+2                 |
//! | 125 | x³+3x+3                 |
//! | 49  | x²+6x+3                 |
//! | 121 | x²+7x+2                 |
//! | 169 | x²+12x+2                |
//!
//! For a Conway polynomial the class of `x` is a primitive element, so the
//! primitive element of GF(p^m), m > 1, is the index `p`. For prime fields it
//! is the smallest primitive root. Full add/mul/inverse tables are built at
//! construction time; every operation is a table lookup.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Largest supported field size.
pub const MAX_FIELD_SIZE: usize = 256;

/// Index of an element of a [`Field`].
pub type FieldElement = usize;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not a prime power")]
    NotPrimePower(usize),
    #[error("field size {0} is outside the supported range 2..=256")]
    UnsupportedSize(usize),
    #[error("{element} is not an element of GF({q})")]
    NotAnElement { element: usize, q: usize },
    #[error("zero has no multiplicative inverse")]
    InverseOfZero,
    #[error("built-in modulus for GF({0}) does not generate the multiplicative group")]
    BadModulus(usize),
}

/// Conway polynomials, coefficients listed from x^0 up to the leading 1.
const CONWAY: &[(usize, usize, &[u32])] = &[
    (2, 2, &[1, 1, 1]),
    (2, 3, &[1, 1, 0, 1]),
    (2, 4, &[1, 1, 0, 0, 1]),
    (2, 5, &[1, 0, 1, 0, 0, 1]),
    (2, 6, &[1, 1, 0, 1, 1, 0, 1]),
    (2, 7, &[1, 1, 0, 0, 0, 0, 0, 1]),
    (2, 8, &[1, 0, 1, 1, 1, 0, 0, 0, 1]),
    (3, 2, &[2, 2, 1]),
    (3, 3, &[1, 2, 0, 1]),
    (3, 4, &[2, 0, 0, 2, 1]),
    (3, 5, &[1, 2, 0, 0, 0, 1]),
    (5, 2, &[2, 4, 1]),
    (5, 3, &[3, 3, 0, 1]),
    (7, 2, &[3, 6, 1]),
    (11, 2, &[2, 7, 1]),
    (13, 2, &[2, 12, 1]),
];

struct Tables {
    q: usize,
    p: usize,
    m: usize,
    modulus: Vec<u32>,
    primitive: usize,
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    inv: Vec<u8>,
    /// `exp[k] = α^k` for k in 0..q-1.
    exp: Vec<u8>,
    /// `log[a]` for a ≠ 0; `log[0]` is unused.
    log: Vec<u16>,
}

/// A finite field GF(q) with precomputed operation tables.
///
/// Cloning is cheap: the tables are shared.
#[derive(Clone)]
pub struct Field {
    t: Arc<Tables>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("q", &self.t.q)
            .field("p", &self.t.p)
            .field("m", &self.t.m)
            .field("modulus", &self.t.modulus)
            .field("primitive", &self.t.primitive)
            .finish()
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.t.q == other.t.q && self.t.modulus == other.t.modulus
    }
}

impl Eq for Field {}

fn is_prime(n: usize) -> bool {
    n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

/// Splits `q` into `(p, m)` with `q = p^m`, if possible.
fn prime_power(q: usize) -> Option<(usize, usize)> {
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let mut rest = q;
    let mut m = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        m += 1;
    }
    (rest == 1 && is_prime(p)).then_some((p, m))
}

impl Field {
    /// Builds GF(q). Fails unless q is a prime power in `2..=256`.
    pub fn new(q: usize) -> Result<Self, FieldError> {
        let (p, m) = prime_power(q).ok_or(FieldError::NotPrimePower(q))?;
        if q > MAX_FIELD_SIZE {
            return Err(FieldError::UnsupportedSize(q));
        }
        let modulus: Vec<u32> = if m == 1 {
            vec![0, 1]
        } else {
            CONWAY
                .iter()
                .find(|(pp, mm, _)| *pp == p && *mm == m)
                .map(|(_, _, c)| c.to_vec())
                .ok_or(FieldError::UnsupportedSize(q))?
        };

        let digits = |mut a: usize| -> Vec<usize> {
            (0..m)
                .map(|_| {
                    let d = a % p;
                    a /= p;
                    d
                })
                .collect()
        };
        let undigits = |d: &[usize]| -> usize { d.iter().rev().fold(0, |acc, &c| acc * p + c) };

        let mut add = vec![0u8; q * q];
        let mut neg = vec![0u8; q];
        for a in 0..q {
            let da = digits(a);
            let dn: Vec<usize> = da.iter().map(|&c| (p - c) % p).collect();
            neg[a] = undigits(&dn) as u8;
            for b in 0..q {
                let db = digits(b);
                let s: Vec<usize> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
                add[a * q + b] = undigits(&s) as u8;
            }
        }

        // Multiplication by the candidate generator.
        let times_gen: Box<dyn Fn(usize, usize) -> usize> = if m == 1 {
            Box::new(move |a, g| (a * g) % p)
        } else {
            let modulus = modulus.clone();
            Box::new(move |a, _| {
                // a·x, reduced by the monic modulus: x^m = -(c_0 + … + c_{m-1} x^{m-1}).
                let d = digits(a);
                let top = d[m - 1];
                let mut shifted = vec![0usize; m];
                shifted[1..m].copy_from_slice(&d[..m - 1]);
                for k in 0..m {
                    let sub = (top * modulus[k] as usize) % p;
                    shifted[k] = (shifted[k] + p - sub) % p;
                }
                undigits(&shifted)
            })
        };

        let try_generator = |g: usize| -> Option<Vec<u8>> {
            let mut exp = Vec::with_capacity(q - 1);
            let mut seen = vec![false; q];
            let mut cur = 1usize;
            for _ in 0..q - 1 {
                if cur == 0 || seen[cur] {
                    return None;
                }
                seen[cur] = true;
                exp.push(cur as u8);
                cur = times_gen(cur, g);
            }
            (cur == 1).then_some(exp)
        };

        let (primitive, exp) = if m == 1 {
            (1..q)
                .find_map(|g| try_generator(g).map(|e| (g, e)))
                .ok_or(FieldError::BadModulus(q))?
        } else {
            (p, try_generator(p).ok_or(FieldError::BadModulus(q))?)
        };

        let mut log = vec![0u16; q];
        for (k, &e) in exp.iter().enumerate() {
            log[e as usize] = k as u16;
        }
        let mut mul = vec![0u8; q * q];
        let mut inv = vec![0u8; q];
        for a in 1..q {
            for b in 1..q {
                let k = (log[a] as usize + log[b] as usize) % (q - 1);
                mul[a * q + b] = exp[k];
            }
            inv[a] = exp[(q - 1 - log[a] as usize) % (q - 1)];
        }

        Ok(Field {
            t: Arc::new(Tables { q, p, m, modulus, primitive, add, mul, neg, inv, exp, log }),
        })
    }

    pub fn q(&self) -> usize {
        self.t.q
    }

    /// Characteristic.
    pub fn p(&self) -> usize {
        self.t.p
    }

    /// Extension degree.
    pub fn m(&self) -> usize {
        self.t.m
    }

    /// Coefficients of the monic modulus, constant term first.
    pub fn modulus(&self) -> &[u32] {
        &self.t.modulus
    }

    pub fn primitive_element(&self) -> FieldElement {
        self.t.primitive
    }

    pub fn is_prime_field(&self) -> bool {
        self.t.m == 1
    }

    pub fn contains(&self, a: FieldElement) -> bool {
        a < self.t.q
    }

    /// Validates an index.
    pub fn element(&self, a: usize) -> Result<FieldElement, FieldError> {
        if self.contains(a) {
            Ok(a)
        } else {
            Err(FieldError::NotAnElement { element: a, q: self.t.q })
        }
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.t.add[a * self.t.q + b] as usize
    }

    #[inline]
    pub fn neg(&self, a: FieldElement) -> FieldElement {
        self.t.neg[a] as usize
    }

    #[inline]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.t.mul[a * self.t.q + b] as usize
    }

    pub fn checked_add(&self, a: usize, b: usize) -> Result<FieldElement, FieldError> {
        Ok(self.add(self.element(a)?, self.element(b)?))
    }

    pub fn checked_mul(&self, a: usize, b: usize) -> Result<FieldElement, FieldError> {
        Ok(self.mul(self.element(a)?, self.element(b)?))
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        match self.element(a)? {
            0 => Err(FieldError::InverseOfZero),
            a => Ok(self.t.inv[a] as usize),
        }
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `a^k`, with `0^0 = 1`.
    pub fn pow(&self, a: FieldElement, k: u64) -> FieldElement {
        if k == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let order = (self.t.q - 1) as u64;
        let e = (self.t.log[a] as u64 * (k % order)) % order;
        self.t.exp[e as usize] as usize
    }

    /// `α^k` for the field's primitive element α.
    pub fn alpha_pow(&self, k: u64) -> FieldElement {
        self.t.exp[(k % (self.t.q as u64 - 1)) as usize] as usize
    }

    /// Multiplicative order of a nonzero element.
    pub fn order(&self, a: FieldElement) -> Option<usize> {
        if a == 0 || a >= self.t.q {
            return None;
        }
        let n = self.t.q - 1;
        let l = self.t.log[a] as usize;
        Some(n / gcd(n, l))
    }

    pub fn is_primitive(&self, a: FieldElement) -> bool {
        self.order(a) == Some(self.t.q - 1)
    }

    pub fn elements(&self) -> std::ops::Range<FieldElement> {
        0..self.t.q
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_fields() {
        let f2 = Field::new(2).unwrap();
        assert_eq!((f2.p(), f2.m(), f2.primitive_element()), (2, 1, 1));
        assert_eq!(f2.add(1, 1), 0);
        assert_eq!(f2.mul(1, 1), 1);
        assert!(f2.is_primitive(1));

        let f5 = Field::new(5).unwrap();
        assert_eq!((f5.p(), f5.m()), (5, 1));
        assert_eq!(f5.order(f5.primitive_element()), Some(4));
        assert_eq!(f5.add(3, 4), 2);
        assert_eq!(f5.mul(3, 4), 2);
        assert_eq!(f5.inv(3).unwrap(), 2);

        let f4 = Field::new(4).unwrap();
        assert_eq!((f4.p(), f4.m()), (2, 2));
        assert_eq!(f4.modulus(), &[1, 1, 1]);
        let alpha = 2; // the class of x
        assert_eq!(f4.add(alpha, alpha), 0);
        assert_eq!(f4.mul(alpha, alpha), 3); // α + 1
        assert!(f4.is_primitive(alpha));
    }

    #[test]
    fn primitive_root_of_five_by_exhaustive_order() {
        // Brute-force multiplicative orders mod 5.
        let order = |g: usize| (1..=4).find(|&k| (0..k).fold(1, |acc, _| acc * g % 5) == 1).unwrap();
        let f5 = Field::new(5).unwrap();
        assert_eq!(order(f5.primitive_element()), 4);
        assert_eq!(f5.primitive_element(), 2);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert_eq!(Field::new(6).unwrap_err(), FieldError::NotPrimePower(6));
        assert_eq!(Field::new(1).unwrap_err(), FieldError::NotPrimePower(1));
        assert_eq!(Field::new(512).unwrap_err(), FieldError::UnsupportedSize(512));
        assert!(matches!(Field::new(257), Err(FieldError::UnsupportedSize(257))));
    }

    #[test]
    fn inverse_of_zero_and_out_of_range() {
        let f = Field::new(7).unwrap();
        assert_eq!(f.inv(0), Err(FieldError::InverseOfZero));
        assert!(matches!(f.checked_add(7, 1), Err(FieldError::NotAnElement { .. })));
        assert!(matches!(f.checked_mul(1, 9), Err(FieldError::NotAnElement { .. })));
    }

    #[test]
    fn every_supported_field_has_a_generator() {
        for q in 2..=MAX_FIELD_SIZE {
            if prime_power(q).is_none() {
                continue;
            }
            let f = Field::new(q).unwrap();
            let g = f.primitive_element();
            let mut seen = vec![false; q];
            let mut cur = 1;
            for _ in 0..q - 1 {
                assert!(!seen[cur], "GF({q}) generator repeats");
                seen[cur] = true;
                cur = f.mul(cur, g);
            }
            assert_eq!(cur, 1);
            assert!(seen[1..].iter().all(|&s| s));
        }
    }

    #[test]
    fn field_axioms_exhaustive_up_to_16() {
        for q in [2, 3, 4, 5, 7, 8, 9, 11, 13, 16] {
            let f = Field::new(q).unwrap();
            for a in f.elements() {
                assert_eq!(f.add(a, 0), a);
                assert_eq!(f.mul(a, 1), a);
                assert_eq!(f.add(a, f.neg(a)), 0);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
                }
                for b in f.elements() {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for c in f.elements() {
                        assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn pow_matches_repeated_multiplication() {
        let f = Field::new(9).unwrap();
        for a in f.elements() {
            let mut acc = 1;
            for k in 0..20u64 {
                assert_eq!(f.pow(a, k), acc, "a={a} k={k}");
                acc = f.mul(acc, a);
            }
        }
    }
}
