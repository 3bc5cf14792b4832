//! Finite fields `F_{p^k}`, the rational function field `F_p(u)`, and dense
//! polynomials over finite fields.
//!
//! Elements of `F_{p^k}` are packed into a single `u64` as the base-`p`
//! integer `c_0 + c_1 p + ... + c_{k-1} p^{k-1}` of their coordinates in the
//! power basis of the defining modulus. The prime subfield is therefore the
//! range `0..p`, and small integers embed as themselves.

mod poly;
mod ratfn;
mod small;

use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

pub use poly::{distinct_root_count, separable_radical, Poly};
pub use ratfn::RatFn;
pub use small::SmallField;

use crate::error::{Error, Result};
use crate::scale::MAX_EXTENSION_DEGREE;

pub type Ctx = Arc<FieldCtx>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    Finite,
    RationalFunction,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldCtx {
    p: u64,
    k: usize,
    q: u64,
    /// Monic modulus, ascending coefficients, length `k + 1`. `None` for prime fields.
    modulus: Option<Vec<u64>>,
    flavor: Flavor,
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Builds `F_{p^k}` with the lexicographically least monic irreducible modulus,
/// or the `seed`-th one in that order when a seed is given.
pub fn field_make(p: u64, k: usize, seed: Option<u64>) -> Result<Ctx> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if p >= 1 << 31 {
        return Err(Error::ScaleExceeded { what: "characteristic", value: p as u128, limit: 1 << 31 });
    }
    if k == 0 || k > MAX_EXTENSION_DEGREE {
        return Err(Error::ScaleExceeded {
            what: "extension degree",
            value: k as u128,
            limit: MAX_EXTENSION_DEGREE as u128,
        });
    }
    let q = (p as u128).pow(k as u32);
    if q >= 1u128 << 62 {
        return Err(Error::ScaleExceeded { what: "field size", value: q, limit: 1 << 62 });
    }
    let prime = Arc::new(FieldCtx { p, k: 1, q: p, modulus: None, flavor: Flavor::Finite });
    if k == 1 {
        return Ok(prime);
    }
    let modulus = find_irreducible(&prime, k, seed.unwrap_or(0))?;
    Ok(Arc::new(FieldCtx { p, k, q: q as u64, modulus: Some(modulus), flavor: Flavor::Finite }))
}

fn find_irreducible(prime: &Ctx, k: usize, mut skip: u64) -> Result<Vec<u64>> {
    let p = prime.p;
    let count = p.pow(k as u32);
    for s in 0..count {
        let mut c = Vec::with_capacity(k + 1);
        let mut t = s;
        for _ in 0..k {
            c.push(t % p);
            t /= p;
        }
        c.push(1);
        let f = Poly::from_coeffs(prime, c.clone());
        if f.is_irreducible() {
            if skip == 0 {
                return Ok(c);
            }
            skip -= 1;
        }
    }
    Err(Error::NoIrreducibleFound { p, k })
}

impl FieldCtx {
    pub fn prime(p: u64) -> Result<Ctx> {
        field_make(p, 1, None)
    }

    /// The field `F_p(u)`; its elements are [`RatFn`] values.
    pub fn rational_function(p: u64) -> Result<Ctx> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(Arc::new(FieldCtx { p, k: 1, q: p, modulus: None, flavor: Flavor::RationalFunction }))
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of elements (`p^k`); for the rational-function flavor this is `p`,
    /// the size of the constant field.
    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn modulus(&self) -> Option<&[u64]> {
        self.modulus.as_deref()
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn is_finite(&self) -> bool {
        self.flavor == Flavor::Finite
    }

    /// The prime field underlying this context.
    pub fn prime_subfield(&self) -> Ctx {
        Arc::new(FieldCtx { p: self.p, k: 1, q: self.p, modulus: None, flavor: Flavor::Finite })
    }

    pub fn from_int(&self, n: i64) -> u64 {
        n.rem_euclid(self.p as i64) as u64
    }

    pub fn from_big(&self, n: &num_bigint::BigInt) -> u64 {
        let p = num_bigint::BigInt::from(self.p);
        let r = ((n % &p) + &p) % &p;
        r.to_u64().unwrap()
    }

    pub fn is_element(&self, a: u64) -> bool {
        a < self.q
    }

    fn digits(&self, mut a: u64) -> [u64; MAX_EXTENSION_DEGREE] {
        let mut d = [0u64; MAX_EXTENSION_DEGREE];
        for slot in d.iter_mut().take(self.k) {
            *slot = a % self.p;
            a /= self.p;
        }
        d
    }

    fn pack(&self, d: &[u64]) -> u64 {
        d.iter().take(self.k).rev().fold(0u64, |acc, &c| acc * self.p + c)
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        if self.k == 1 {
            let s = a + b;
            return if s >= self.p { s - self.p } else { s };
        }
        let (x, y) = (self.digits(a), self.digits(b));
        let mut z = [0u64; MAX_EXTENSION_DEGREE];
        for i in 0..self.k {
            let s = x[i] + y[i];
            z[i] = if s >= self.p { s - self.p } else { s };
        }
        self.pack(&z)
    }

    pub fn neg(&self, a: u64) -> u64 {
        if self.k == 1 {
            return if a == 0 { 0 } else { self.p - a };
        }
        let x = self.digits(a);
        let mut z = [0u64; MAX_EXTENSION_DEGREE];
        for i in 0..self.k {
            z[i] = if x[i] == 0 { 0 } else { self.p - x[i] };
        }
        self.pack(&z)
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        if self.k == 1 {
            return a * b % self.p;
        }
        let p = self.p;
        let k = self.k;
        let (x, y) = (self.digits(a), self.digits(b));
        let mut prod = [0u64; 2 * MAX_EXTENSION_DEGREE];
        for i in 0..k {
            if x[i] == 0 {
                continue;
            }
            for j in 0..k {
                prod[i + j] = (prod[i + j] + x[i] * y[j]) % p;
            }
        }
        let m = self.modulus.as_ref().expect("extension field has a modulus");
        for i in (k..2 * k - 1).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            prod[i] = 0;
            for j in 0..k {
                prod[i - k + j] = (prod[i - k + j] + (p - c) * m[j]) % p;
            }
        }
        self.pack(&prod[..k])
    }

    pub fn pow(&self, a: u64, mut e: u64) -> u64 {
        let mut base = a;
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn pow_big(&self, a: u64, e: &BigUint) -> u64 {
        let reduced = if a == 0 { e.clone() } else { e % BigUint::from(self.q - 1) };
        if a == 0 {
            return if e.is_zero() { 1 } else { 0 };
        }
        self.pow(a, reduced.to_u64().unwrap())
    }

    pub fn inv(&self, a: u64) -> Result<u64> {
        if a == 0 {
            return Err(Error::ZeroElement);
        }
        if self.k == 1 {
            return Ok(inv_mod(a, self.p));
        }
        Ok(self.pow(a, self.q - 2))
    }

    pub fn frobenius(&self, a: u64) -> u64 {
        if self.k == 1 {
            a
        } else {
            self.pow(a, self.p)
        }
    }

    /// The unique `b` with `b^p = a`, namely `a^(q/p)`.
    pub fn pth_root(&self, a: u64) -> u64 {
        if self.k == 1 {
            a
        } else {
            self.pow(a, self.q / self.p)
        }
    }

    /// Multiplicative order of a nonzero element.
    pub fn order(&self, a: u64) -> Result<u64> {
        if a == 0 {
            return Err(Error::ZeroElement);
        }
        let n = self.q - 1;
        let mut ord = n;
        for (r, _) in factor_u64(n) {
            while ord % r == 0 && self.pow(a, ord / r) == 1 {
                ord /= r;
            }
        }
        Ok(ord)
    }

    /// All elements, in packed order.
    pub fn elements(&self) -> impl Iterator<Item = u64> {
        0..self.q
    }

    // Generic element operations covering both flavors.

    pub fn el_zero(&self) -> FieldElem {
        match self.flavor {
            Flavor::Finite => FieldElem::Fin(0),
            Flavor::RationalFunction => FieldElem::Fun(RatFn::zero(self.p)),
        }
    }

    pub fn el_one(&self) -> FieldElem {
        self.el_int(1)
    }

    pub fn el_int(&self, n: i64) -> FieldElem {
        match self.flavor {
            Flavor::Finite => FieldElem::Fin(self.from_int(n)),
            Flavor::RationalFunction => FieldElem::Fun(RatFn::constant(self.p, self.from_int(n))),
        }
    }

    pub fn el_add(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        match (a, b) {
            (FieldElem::Fin(x), FieldElem::Fin(y)) => FieldElem::Fin(self.add(*x, *y)),
            (FieldElem::Fun(x), FieldElem::Fun(y)) => FieldElem::Fun(x.add(y)),
            _ => panic!("mixed field flavors"),
        }
    }

    pub fn el_neg(&self, a: &FieldElem) -> FieldElem {
        match a {
            FieldElem::Fin(x) => FieldElem::Fin(self.neg(*x)),
            FieldElem::Fun(x) => FieldElem::Fun(x.neg()),
        }
    }

    pub fn el_sub(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        self.el_add(a, &self.el_neg(b))
    }

    pub fn el_mul(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        match (a, b) {
            (FieldElem::Fin(x), FieldElem::Fin(y)) => FieldElem::Fin(self.mul(*x, *y)),
            (FieldElem::Fun(x), FieldElem::Fun(y)) => FieldElem::Fun(x.mul(y)),
            _ => panic!("mixed field flavors"),
        }
    }

    pub fn el_pow(&self, a: &FieldElem, e: u64) -> FieldElem {
        match a {
            FieldElem::Fin(x) => FieldElem::Fin(self.pow(*x, e)),
            FieldElem::Fun(x) => FieldElem::Fun(x.pow(e)),
        }
    }

    /// `a^(p^i)`.
    pub fn el_frobenius_iter(&self, a: &FieldElem, i: usize) -> FieldElem {
        match a {
            FieldElem::Fin(x) => {
                let mut y = *x;
                if self.k > 1 {
                    for _ in 0..(i % self.k) {
                        y = self.frobenius(y);
                    }
                }
                FieldElem::Fin(y)
            }
            FieldElem::Fun(x) => FieldElem::Fun(x.frobenius_iter(i)),
        }
    }
}

/// An element of either flavor of field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldElem {
    Fin(u64),
    Fun(RatFn),
}

impl std::fmt::Display for FieldElem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FieldElem::Fin(x) => write!(f, "{x}"),
            FieldElem::Fun(r) => write!(f, "{r}"),
        }
    }
}

impl FieldElem {
    pub fn is_zero(&self) -> bool {
        match self {
            FieldElem::Fin(x) => *x == 0,
            FieldElem::Fun(x) => x.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            FieldElem::Fin(x) => *x == 1,
            FieldElem::Fun(x) => x.is_one(),
        }
    }

    pub fn as_finite(&self) -> Option<u64> {
        match self {
            FieldElem::Fin(x) => Some(*x),
            FieldElem::Fun(_) => None,
        }
    }
}

pub(crate) fn inv_mod(a: u64, m: u64) -> u64 {
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (m as i128, (a % m) as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    debug_assert_eq!(r, 1, "{a} not invertible mod {m}");
    t.rem_euclid(m as i128) as u64
}

pub(crate) fn pow_mod(b: u64, mut e: u64, m: u64) -> u64 {
    let m = m as u128;
    let (mut acc, mut base) = (1u128 % m, b as u128 % m);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        e >>= 1;
    }
    acc as u64
}

/// Prime factorisation by trial division.
pub fn factor_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}
