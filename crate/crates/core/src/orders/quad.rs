use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::{v_p_big, OrderElem};
use crate::error::{Error, Result};

const START_PRECISION: u32 = 32;
const MAX_PRECISION: u32 = 1024;

/// The order `Z[tau]` with `tau^2 - T tau + N = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuadRing {
    pub t: i64,
    pub n: i64,
}

impl QuadRing {
    pub fn new(t: i64, n: i64) -> Result<QuadRing> {
        if t * t - 4 * n >= 0 {
            return Err(Error::InvalidInput(format!("T^2 - 4N = {} is not negative", t * t - 4 * n)));
        }
        Ok(QuadRing { t, n })
    }

    /// `Z[i]`.
    pub fn gaussian() -> QuadRing {
        QuadRing { t: 0, n: 1 }
    }

    /// `Z[w]` with `w^2 + w + 1 = 0`.
    pub fn eisenstein() -> QuadRing {
        QuadRing { t: -1, n: 1 }
    }

    pub fn disc(&self) -> i64 {
        self.t * self.t - 4 * self.n
    }

    pub fn elem(&self, a: impl Into<BigInt>, b: impl Into<BigInt>) -> QuadElem {
        QuadElem { ring: *self, a: a.into(), b: b.into() }
    }

    pub fn int(&self, a: i64) -> QuadElem {
        self.elem(a, 0)
    }

    pub fn tau(&self) -> QuadElem {
        self.elem(0, 1)
    }

    /// All units `a + b tau`.
    pub fn units(&self) -> Vec<QuadElem> {
        // the norm form is positive definite, so units have |b| <= 2 and |a| <= 2 + |T|
        let r = 2 + self.t.abs();
        let mut out = Vec::new();
        for b in -2..=2i64 {
            for a in -r..=r {
                let x = self.elem(a, b);
                if x.norm().is_one() {
                    out.push(x);
                }
            }
        }
        out
    }
}

/// `a + b tau` in a [`QuadRing`].
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuadElem {
    ring: QuadRing,
    a: BigInt,
    b: BigInt,
}

impl fmt::Debug for QuadElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}t)", self.a, self.b)
    }
}

impl QuadElem {
    pub fn ring(&self) -> QuadRing {
        self.ring
    }

    pub fn a(&self) -> &BigInt {
        &self.a
    }

    pub fn b(&self) -> &BigInt {
        &self.b
    }

    /// `conj(a + b tau) = (a + bT) - b tau`.
    pub fn conj(&self) -> QuadElem {
        QuadElem { ring: self.ring, a: &self.a + &self.b * self.ring.t, b: -&self.b }
    }

    /// Value of `a + b u` modulo `m`, i.e. the image under `tau -> u`.
    pub fn eval_mod(&self, u: &BigInt, m: &BigInt) -> BigInt {
        (&self.a + &self.b * u).mod_floor(m)
    }
}

impl OrderElem for QuadElem {
    fn int_like(&self, n: i64) -> QuadElem {
        self.ring.int(n)
    }

    fn add(&self, o: &QuadElem) -> QuadElem {
        debug_assert_eq!(self.ring, o.ring);
        QuadElem { ring: self.ring, a: &self.a + &o.a, b: &self.b + &o.b }
    }

    fn sub(&self, o: &QuadElem) -> QuadElem {
        debug_assert_eq!(self.ring, o.ring);
        QuadElem { ring: self.ring, a: &self.a - &o.a, b: &self.b - &o.b }
    }

    fn mul(&self, o: &QuadElem) -> QuadElem {
        debug_assert_eq!(self.ring, o.ring);
        let bd = &self.b * &o.b;
        QuadElem {
            ring: self.ring,
            a: &self.a * &o.a - &bd * self.ring.n,
            b: &self.a * &o.b + &self.b * &o.a + &bd * self.ring.t,
        }
    }

    fn conj(&self) -> QuadElem {
        QuadElem::conj(self)
    }

    fn norm(&self) -> BigInt {
        &self.a * &self.a + &self.a * &self.b * self.ring.t + &self.b * &self.b * self.ring.n
    }

    fn trace(&self) -> BigInt {
        BigInt::from(2) * &self.a + &self.b * self.ring.t
    }

    fn reduce(&self, m: &BigInt) -> QuadElem {
        QuadElem { ring: self.ring, a: self.a.mod_floor(m), b: self.b.mod_floor(m) }
    }

    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
}

/// A prime `p` split in a quadratic order, with the prime `P` above it
/// pinned down by a p-adic root `u` of `x^2 - T x + N`: `P` is the prime
/// on which `tau` does NOT reduce to `u`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeContext {
    p: u64,
    ring: QuadRing,
    u: BigInt,
    precision: u32,
}

impl PrimeContext {
    /// Picks the root `u` of `x^2 - T x + N` mod `p` that is a unit; when both
    /// roots are units, `root` selects one (default: the smaller residue).
    pub fn ordinary(ring: QuadRing, p: u64, root: Option<u64>) -> Result<PrimeContext> {
        if !crate::field::is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let pi = p as i64;
        let roots: Vec<i64> = (0..pi)
            .filter(|&x| (x * x - ring.t * x + ring.n).rem_euclid(pi) == 0)
            .filter(|&x| (2 * x - ring.t).rem_euclid(pi) != 0)
            .collect();
        if roots.len() != 2 {
            return Err(Error::HypothesisViolated(format!("{p} does not split in Z[tau] with T={}, N={}", ring.t, ring.n)));
        }
        let r0 = match root {
            Some(r) => {
                let r = r as i64 % pi;
                if !roots.contains(&r) {
                    return Err(Error::InvalidInput(format!("{r} is not a root mod {p}")));
                }
                r
            }
            None => *roots.iter().find(|&&r| r != 0).unwrap(),
        };
        let ctx = PrimeContext { p, ring, u: BigInt::from(r0), precision: 1 };
        ctx.with_precision(START_PRECISION)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn ring(&self) -> QuadRing {
        self.ring
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// The Hensel-lifted root modulo `p^precision`.
    pub fn unit_root(&self) -> &BigInt {
        &self.u
    }

    pub fn modulus(&self) -> BigInt {
        num_traits::pow(BigInt::from(self.p), self.precision as usize)
    }

    /// A new context carrying the root to at least `prec` digits.
    pub fn with_precision(&self, prec: u32) -> Result<PrimeContext> {
        if prec > MAX_PRECISION {
            return Err(Error::PrecisionExhausted(prec));
        }
        if prec <= self.precision {
            return Ok(self.clone());
        }
        let (t, n) = (BigInt::from(self.ring.t), BigInt::from(self.ring.n));
        let p = BigInt::from(self.p);
        let mut u = self.u.clone();
        let mut k = self.precision;
        while k < prec {
            k = (2 * k).min(prec);
            let m = num_traits::pow(p.clone(), k as usize);
            let g = (&u * &u - &t * &u + &n).mod_floor(&m);
            let dg = (BigInt::from(2) * &u - &t).mod_floor(&m);
            let inv = dg.modinv(&m).ok_or_else(|| Error::Mismatch("singular Hensel step".into()))?;
            u = (&u - g * inv).mod_floor(&m);
        }
        Ok(PrimeContext { p: self.p, ring: self.ring, u, precision: prec })
    }
}

/// `v_P(x) = v_p(N(x)) - v_p(x(u))`.
pub fn v_frak_p(x: &QuadElem, ctx: &PrimeContext) -> Result<u64> {
    let total = v_p_big(&x.norm(), ctx.p)?;
    let conj = v_conj(x, ctx, total)?;
    Ok(total - conj)
}

/// Valuation at the conjugate prime, `v_p(x(u))`.
pub fn v_frak_p_conj(x: &QuadElem, ctx: &PrimeContext) -> Result<u64> {
    let total = v_p_big(&x.norm(), ctx.p)?;
    v_conj(x, ctx, total)
}

fn v_conj(x: &QuadElem, ctx: &PrimeContext, total: u64) -> Result<u64> {
    let need = (total as u32 + 1).max(ctx.precision);
    let mut prec = ctx.precision;
    while prec < need {
        prec *= 2;
    }
    let c = ctx.with_precision(prec)?;
    let m = c.modulus();
    let val = x.eval_mod(&c.u, &m);
    if val.is_zero() {
        return Err(Error::PrecisionExhausted(prec));
    }
    Ok(v_p_big(&val, ctx.p)?.min(total))
}

/// `v_P(sigma^n - gamma)` computed modulo `p^K` with `K` doubling, so `n`
/// may be large.
pub fn v_frak_p_pow_minus(sigma: &QuadElem, n: u64, gamma: &QuadElem, ctx: &PrimeContext) -> Result<u64> {
    let p = BigInt::from(ctx.p);
    let mut prec = 8u32;
    loop {
        let c = ctx.with_precision(prec.max(ctx.precision))?;
        let m = num_traits::pow(p.clone(), prec as usize);
        let x = super::pow_mod_elem(sigma, n, &m).sub(gamma).reduce(&m);
        let nm = x.norm().mod_floor(&m);
        let um = x.eval_mod(&c.u, &m);
        if !nm.is_zero() && !um.is_zero() {
            return Ok(v_p_big(&nm, ctx.p)? - v_p_big(&um, ctx.p)?);
        }
        if prec >= MAX_PRECISION {
            return Err(Error::PrecisionExhausted(prec));
        }
        prec *= 2;
    }
}

/// Lifting the exponent at a split prime (`e = 1`):
/// `v_P(x^n - y^n) = v_P(x - y) + v_p(n)`.
pub fn lte_quad(x: &QuadElem, y: &QuadElem, ctx: &PrimeContext, n: u64) -> Result<u64> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    if v_frak_p(x, ctx)? != 0 || v_frak_p(y, ctx)? != 0 {
        return Err(Error::HypothesisViolated("x or y lies in P".into()));
    }
    let d = x.sub(y);
    if d.is_zero() {
        return Err(Error::HypothesisViolated("x = y".into()));
    }
    let v = v_frak_p(&d, ctx)?;
    if v == 0 {
        return Err(Error::HypothesisViolated("x - y is not in P".into()));
    }
    if ctx.p == 2 && v < 2 {
        return Err(Error::HypothesisViolated("p = 2 needs v_P(x - y) >= 2".into()));
    }
    let formula = v + super::v_p_u64(n, ctx.p);
    if n <= 64 {
        let direct = v_frak_p(&x.pow(n).sub(&y.pow(n)), ctx)?;
        if direct != formula {
            return Err(Error::Mismatch(format!("lte_quad: formula {formula}, direct {direct}")));
        }
    }
    Ok(formula)
}
