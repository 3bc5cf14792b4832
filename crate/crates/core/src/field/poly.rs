use std::fmt;

use super::Ctx;
use crate::error::{Error, Result};

/// Dense univariate polynomial over a finite field, ascending coefficients,
/// with no trailing zeros. The zero polynomial has an empty coefficient list
/// and degree `None`.
#[derive(Clone, PartialEq, Eq)]
pub struct Poly {
    ctx: Ctx,
    c: Vec<u64>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly{:?}", self.c)
    }
}

impl Poly {
    pub fn from_coeffs(ctx: &Ctx, mut c: Vec<u64>) -> Poly {
        debug_assert!(ctx.is_finite());
        debug_assert!(c.iter().all(|&a| ctx.is_element(a)));
        while c.last() == Some(&0) {
            c.pop();
        }
        Poly { ctx: ctx.clone(), c }
    }

    /// Coefficients given as signed integers, reduced into the prime subfield.
    pub fn from_ints(ctx: &Ctx, c: &[i64]) -> Poly {
        Poly::from_coeffs(ctx, c.iter().map(|&a| ctx.from_int(a)).collect())
    }

    pub fn zero(ctx: &Ctx) -> Poly {
        Poly { ctx: ctx.clone(), c: Vec::new() }
    }

    pub fn constant(ctx: &Ctx, a: u64) -> Poly {
        Poly::from_coeffs(ctx, vec![a])
    }

    pub fn one(ctx: &Ctx) -> Poly {
        Poly::constant(ctx, 1)
    }

    pub fn x(ctx: &Ctx) -> Poly {
        Poly::from_coeffs(ctx, vec![0, 1])
    }

    pub fn monomial(ctx: &Ctx, a: u64, e: usize) -> Poly {
        let mut c = vec![0; e + 1];
        c[e] = a;
        Poly::from_coeffs(ctx, c)
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.c
    }

    pub fn coeff(&self, i: usize) -> u64 {
        self.c.get(i).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    /// Degree with the zero polynomial mapped to 0; handy for size bounds.
    pub fn deg0(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    pub fn lead(&self) -> u64 {
        self.c.last().copied().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.c.len() <= 1
    }

    pub fn is_monic(&self) -> bool {
        self.lead() == 1
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let f = &self.ctx;
        let n = self.c.len().max(o.c.len());
        let c = (0..n).map(|i| f.add(self.coeff(i), o.coeff(i))).collect();
        Poly::from_coeffs(f, c)
    }

    pub fn neg(&self) -> Poly {
        let f = &self.ctx;
        Poly { ctx: f.clone(), c: self.c.iter().map(|&a| f.neg(a)).collect() }
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        let f = &self.ctx;
        let n = self.c.len().max(o.c.len());
        let c = (0..n).map(|i| f.sub(self.coeff(i), o.coeff(i))).collect();
        Poly::from_coeffs(f, c)
    }

    pub fn scale(&self, a: u64) -> Poly {
        let f = &self.ctx;
        Poly::from_coeffs(f, self.c.iter().map(|&b| f.mul(a, b)).collect())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero(&self.ctx);
        }
        let f = &self.ctx;
        let mut r = vec![0u64; self.c.len() + o.c.len() - 1];
        if f.k() == 1 {
            let p = f.p();
            for (i, &a) in self.c.iter().enumerate() {
                if a == 0 {
                    continue;
                }
                for (j, &b) in o.c.iter().enumerate() {
                    r[i + j] = (r[i + j] + a * b) % p;
                }
            }
        } else {
            for (i, &a) in self.c.iter().enumerate() {
                if a == 0 {
                    continue;
                }
                for (j, &b) in o.c.iter().enumerate() {
                    r[i + j] = f.add(r[i + j], f.mul(a, b));
                }
            }
        }
        Poly::from_coeffs(f, r)
    }

    pub fn pow(&self, mut e: u64) -> Poly {
        let mut acc = Poly::one(&self.ctx);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// `(q, r)` with `self = q * d + r` and `deg r < deg d`.
    pub fn divrem(&self, d: &Poly) -> Result<(Poly, Poly)> {
        let f = &self.ctx;
        let dd = d.degree().ok_or(Error::DivisionByZeroPoly)?;
        let inv_lead = f.inv(d.lead())?;
        let mut r = self.c.clone();
        if r.len() <= dd {
            return Ok((Poly::zero(f), self.clone()));
        }
        let mut q = vec![0u64; r.len() - dd];
        for i in (dd..r.len()).rev() {
            let c = r[i];
            if c == 0 {
                continue;
            }
            let t = f.mul(c, inv_lead);
            q[i - dd] = t;
            for j in 0..=dd {
                r[i - dd + j] = f.sub(r[i - dd + j], f.mul(t, d.c[j]));
            }
        }
        r.truncate(dd);
        Ok((Poly::from_coeffs(f, q), Poly::from_coeffs(f, r)))
    }

    pub fn rem(&self, d: &Poly) -> Result<Poly> {
        Ok(self.divrem(d)?.1)
    }

    /// Exact quotient; errors if the division leaves a remainder.
    pub fn div_exact(&self, d: &Poly) -> Result<Poly> {
        let (q, r) = self.divrem(d)?;
        if !r.is_zero() {
            return Err(Error::Mismatch("inexact polynomial division".into()));
        }
        Ok(q)
    }

    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let inv = self.ctx.inv(self.lead()).expect("nonzero lead");
        self.scale(inv)
    }

    /// Monic greatest common divisor; `gcd(0, 0) = 0`.
    pub fn gcd(&self, o: &Poly) -> Poly {
        let mut a = self.clone();
        let mut b = o.clone();
        while !b.is_zero() {
            let r = a.rem(&b).expect("nonzero divisor");
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn derivative(&self) -> Poly {
        let f = &self.ctx;
        let c = self.c.iter().enumerate().skip(1).map(|(i, &a)| f.mul(a, (i as u64) % f.p())).collect();
        Poly::from_coeffs(f, c)
    }

    pub fn eval(&self, x: u64) -> u64 {
        let f = &self.ctx;
        self.c.iter().rev().fold(0, |acc, &a| f.add(f.mul(acc, x), a))
    }

    /// Composition `self(g)`.
    pub fn compose(&self, g: &Poly) -> Poly {
        let mut acc = Poly::zero(&self.ctx);
        for &a in self.c.iter().rev() {
            acc = acc.mul(g).add(&Poly::constant(&self.ctx, a));
        }
        acc
    }

    /// `self^p` computed coefficientwise: `(sum c_i x^i)^p = sum c_i^p x^(ip)`.
    pub fn frobenius_power(&self) -> Poly {
        let f = &self.ctx;
        let p = f.p() as usize;
        let mut c = vec![0u64; (self.c.len().max(1) - 1) * p + 1];
        for (i, &a) in self.c.iter().enumerate() {
            c[i * p] = f.frobenius(a);
        }
        Poly::from_coeffs(f, c)
    }

    /// When `self = g(x^p)`, returns `h` with `h^p = self`.
    fn pth_root(&self) -> Option<Poly> {
        let f = &self.ctx;
        let p = f.p() as usize;
        if self.c.iter().enumerate().any(|(i, &a)| a != 0 && i % p != 0) {
            return None;
        }
        let c = self.c.iter().step_by(p).map(|&a| f.pth_root(a)).collect();
        Some(Poly::from_coeffs(f, c))
    }

    /// `x^e mod m` by repeated squaring.
    pub fn x_pow_mod(&self, e: u64) -> Result<Poly> {
        let mut acc = Poly::one(&self.ctx);
        let mut base = Poly::x(&self.ctx).rem(self)?;
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).rem(self)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base).rem(self)?;
            }
        }
        Ok(acc)
    }

    /// Ben-Or irreducibility test: no factor of degree `i <= deg/2` divides,
    /// checked through `gcd(x^(q^i) - x, f)`.
    pub fn is_irreducible(&self) -> bool {
        let Some(n) = self.degree() else { return false };
        if n == 0 {
            return false;
        }
        if n == 1 {
            return true;
        }
        let q = self.ctx.q();
        let x = Poly::x(&self.ctx);
        let mut h = x.clone();
        for _ in 0..n / 2 {
            let mut e = q;
            // h <- h^q mod self
            let mut acc = Poly::one(&self.ctx);
            let mut base = h.clone();
            while e > 0 {
                if e & 1 == 1 {
                    acc = acc.mul(&base).rem(self).unwrap();
                }
                e >>= 1;
                if e > 0 {
                    base = base.mul(&base).rem(self).unwrap();
                }
            }
            h = acc;
            if h.sub(&x).gcd(self).degree() != Some(0) {
                return false;
            }
        }
        true
    }
}

/// Monic squarefree polynomial with the same roots as `f` over the algebraic
/// closure.
pub fn separable_radical(f: &Poly) -> Result<Poly> {
    if f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    Ok(radical(f))
}

fn radical(f: &Poly) -> Poly {
    if f.is_constant() {
        return Poly::one(f.ctx());
    }
    let df = f.derivative();
    if df.is_zero() {
        let h = f.pth_root().expect("zero derivative means f is a p-th power");
        return radical(&h);
    }
    let g = f.gcd(&df);
    let w = f.div_exact(&g).unwrap().monic();
    if g.is_constant() {
        return w;
    }
    // Roots of g are roots of f; those missing from w have multiplicity divisible by p.
    let rg = radical(&g);
    let common = w.gcd(&rg);
    w.mul(&rg).div_exact(&common).unwrap().monic()
}

/// Number of distinct roots of `f` in the algebraic closure.
pub fn distinct_root_count(f: &Poly) -> Result<usize> {
    Ok(separable_radical(f)?.deg0())
}
