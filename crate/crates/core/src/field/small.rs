use super::{factor_u64, Ctx};
use crate::error::{Error, Result};
use crate::scale;

/// Table-driven arithmetic for a finite field small enough to enumerate.
///
/// Elements use the same packed encoding as [`super::FieldCtx`], so values
/// move freely between the two. Multiplication and inversion go through
/// discrete-log tables built from a primitive element.
#[derive(Debug, Clone)]
pub struct SmallField {
    ctx: Ctx,
    q: u64,
    log: Vec<u32>,
    exp: Vec<u32>,
}

impl SmallField {
    pub fn new(ctx: &Ctx) -> Result<SmallField> {
        if !ctx.is_finite() {
            return Err(Error::InvalidInput("table field needs a finite context".into()));
        }
        let q = ctx.q();
        scale::check_enumeration("field size", q as u128)?;
        let n = q - 1;
        let primes: Vec<u64> = factor_u64(n).into_iter().map(|(r, _)| r).collect();
        let g = (1..q)
            .find(|&g| primes.iter().all(|&r| ctx.pow(g, n / r) != 1))
            .ok_or_else(|| Error::Mismatch("no primitive element".into()))?;
        let mut exp = vec![0u32; n as usize];
        let mut log = vec![u32::MAX; q as usize];
        let mut x = 1u64;
        for i in 0..n {
            exp[i as usize] = x as u32;
            log[x as usize] = i as u32;
            x = ctx.mul(x, g);
        }
        debug_assert_eq!(x, 1);
        Ok(SmallField { ctx: ctx.clone(), q, log, exp })
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        self.ctx.add(a, b)
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        self.ctx.sub(a, b)
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        self.ctx.neg(a)
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        if a == 0 || b == 0 {
            return 0;
        }
        let s = self.log[a as usize] as u64 + self.log[b as usize] as u64;
        self.exp[(s % (self.q - 1)) as usize] as u64
    }

    #[inline]
    pub fn inv(&self, a: u64) -> u64 {
        debug_assert!(a != 0);
        let n = self.q - 1;
        self.exp[((n - self.log[a as usize] as u64) % n) as usize] as u64
    }

    /// Square root when one exists (odd characteristic only).
    pub fn sqrt(&self, a: u64) -> Option<u64> {
        if a == 0 {
            return Some(0);
        }
        let l = self.log[a as usize];
        if l % 2 == 1 {
            None
        } else {
            Some(self.exp[(l / 2) as usize] as u64)
        }
    }

    pub fn eval(&self, coeffs: &[u64], x: u64) -> u64 {
        coeffs.iter().rev().fold(0, |acc, &c| self.add(self.mul(acc, x), c))
    }
}
