//! The twisted polynomial ring `k<phi>` with `phi * c = c^p * phi`.
//!
//! An element `sum c_i phi^i` acts on the additive group as the additive
//! polynomial `sum c_i x^(p^i)`. Degrees are kept as the phi-index `m`
//! rather than as `p^m`.

use num_bigint::BigUint;
use num_traits::Pow;

use crate::error::{Error, Result};
use crate::field::{Ctx, FieldElem, Flavor, Poly};
use crate::scale;

const MAX_TRUNCATION: usize = 1 << 16;

#[derive(Clone, PartialEq, Eq)]
pub struct TwistedPoly {
    ctx: Ctx,
    c: Vec<FieldElem>,
}

impl std::fmt::Debug for TwistedPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Tw{:?}", self.c)
    }
}

impl std::fmt::Display for TwistedPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let terms: Vec<String> = self
            .c
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| match (i, c.is_one()) {
                (0, _) => format!("{c}"),
                (1, true) => "phi".into(),
                (1, false) => format!("{c} phi"),
                (_, true) => format!("phi^{i}"),
                _ => format!("{c} phi^{i}"),
            })
            .collect();
        if terms.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&terms.join(" + "))
        }
    }
}

/// Multiplicative order of the constant term of `sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstantOrder {
    Finite(u64),
    Transcendental,
}

impl TwistedPoly {
    pub fn new(ctx: &Ctx, mut c: Vec<FieldElem>) -> TwistedPoly {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        TwistedPoly { ctx: ctx.clone(), c }
    }

    /// Coefficients as integers in the prime subfield.
    pub fn from_ints(ctx: &Ctx, c: &[i64]) -> TwistedPoly {
        TwistedPoly::new(ctx, c.iter().map(|&a| ctx.el_int(a)).collect())
    }

    pub fn zero(ctx: &Ctx) -> TwistedPoly {
        TwistedPoly { ctx: ctx.clone(), c: Vec::new() }
    }

    pub fn one(ctx: &Ctx) -> TwistedPoly {
        TwistedPoly::scalar(ctx, ctx.el_one())
    }

    pub fn scalar(ctx: &Ctx, a: FieldElem) -> TwistedPoly {
        TwistedPoly::new(ctx, vec![a])
    }

    pub fn phi(ctx: &Ctx) -> TwistedPoly {
        TwistedPoly::new(ctx, vec![ctx.el_zero(), ctx.el_one()])
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn coeffs(&self) -> &[FieldElem] {
        &self.c
    }

    pub fn coeff(&self, i: usize) -> FieldElem {
        self.c.get(i).cloned().unwrap_or_else(|| self.ctx.el_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// Top phi-index `m`; the additive polynomial has degree `p^m`.
    pub fn index(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    /// `deg sigma = p^m`.
    pub fn degree(&self) -> Result<BigUint> {
        let m = self.index().ok_or(Error::ZeroElement)?;
        Ok(BigUint::from(self.ctx.p()).pow(m as u32))
    }

    pub fn add(&self, o: &TwistedPoly) -> TwistedPoly {
        let n = self.c.len().max(o.c.len());
        let c = (0..n).map(|i| self.ctx.el_add(&self.coeff(i), &o.coeff(i))).collect();
        TwistedPoly::new(&self.ctx, c)
    }

    pub fn neg(&self) -> TwistedPoly {
        TwistedPoly { ctx: self.ctx.clone(), c: self.c.iter().map(|a| self.ctx.el_neg(a)).collect() }
    }

    pub fn sub(&self, o: &TwistedPoly) -> TwistedPoly {
        self.add(&o.neg())
    }
}

/// `(a phi^i)(b phi^j) = a b^(p^i) phi^(i+j)`.
pub fn tw_mul(a: &TwistedPoly, b: &TwistedPoly) -> TwistedPoly {
    mul_truncated(a, b, usize::MAX)
}

fn mul_truncated(a: &TwistedPoly, b: &TwistedPoly, k: usize) -> TwistedPoly {
    let f = &a.ctx;
    if a.is_zero() || b.is_zero() {
        return TwistedPoly::zero(f);
    }
    let len = (a.c.len() + b.c.len() - 1).min(k);
    let mut r = vec![f.el_zero(); len];
    for (i, ai) in a.c.iter().enumerate().take(len) {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.c.iter().enumerate().take(len - i) {
            if bj.is_zero() {
                continue;
            }
            let t = f.el_mul(ai, &f.el_frobenius_iter(bj, i));
            r[i + j] = f.el_add(&r[i + j], &t);
        }
    }
    TwistedPoly::new(f, r)
}

pub fn tw_pow(a: &TwistedPoly, n: u64) -> TwistedPoly {
    pow_truncated(a, n, usize::MAX)
}

fn pow_truncated(a: &TwistedPoly, mut n: u64, k: usize) -> TwistedPoly {
    let mut acc = TwistedPoly::one(&a.ctx);
    let mut base = a.clone();
    base.c.truncate(k);
    while n > 0 {
        if n & 1 == 1 {
            acc = mul_truncated(&acc, &base, k);
        }
        n >>= 1;
        if n > 0 {
            base = mul_truncated(&base, &base, k);
        }
    }
    acc
}

/// `a - omega`, with `omega` taken as a constant.
pub fn tw_sub_scalar(a: &TwistedPoly, omega: &FieldElem) -> TwistedPoly {
    let mut c = a.c.clone();
    if c.is_empty() {
        c.push(a.ctx.el_zero());
    }
    c[0] = a.ctx.el_sub(&c[0], omega);
    TwistedPoly::new(&a.ctx, c)
}

/// Least index with a nonzero coefficient; `None` for the zero element.
pub fn v_phi(a: &TwistedPoly) -> Option<u64> {
    a.c.iter().position(|x| !x.is_zero()).map(|i| i as u64)
}

/// `#ker sigma = deg sigma / p^(v_phi(sigma))`.
pub fn kernel_size_ga(sigma: &TwistedPoly) -> Result<BigUint> {
    let m = sigma.index().ok_or(Error::ZeroElement)?;
    let v = v_phi(sigma).unwrap() as usize;
    Ok(BigUint::from(sigma.ctx.p()).pow((m - v) as u32))
}

/// `v_phi(sigma^n - omega)` without forming `sigma^n` in full.
///
/// Works modulo the two-sided ideal `(phi^K)`, doubling `K` until a nonzero
/// coefficient shows up or `K` exceeds the index of `sigma^n`.
pub fn v_phi_pow_minus(sigma: &TwistedPoly, n: u64, omega: &FieldElem) -> Result<Option<u64>> {
    let f = &sigma.ctx;
    let c0 = f.el_pow(&sigma.coeff(0), n);
    if c0 != *omega {
        return Ok(Some(0));
    }
    let full = (sigma.index().unwrap_or(0) as u128) * n as u128;
    let mut k = 8usize;
    loop {
        let r = tw_sub_scalar(&pow_truncated(sigma, n, k), omega);
        if let Some(v) = v_phi(&r) {
            return Ok(Some(v));
        }
        if k as u128 > full {
            return Ok(None);
        }
        if k >= MAX_TRUNCATION {
            return Err(Error::PrecisionExhausted(k as u32));
        }
        k *= 2;
    }
}

/// Lifting the exponent in `k<phi>`: `v_phi(x^n - 1) = v_phi(x - 1) p^(v_p(n))`.
///
/// Returns `None` when `x = 1`. The formula is checked against a direct
/// truncated computation.
pub fn lte_ga(x: &TwistedPoly, n: u64) -> Result<Option<u64>> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    let one = x.ctx.el_one();
    let Some(v1) = v_phi(&tw_sub_scalar(x, &one)) else {
        return Ok(None);
    };
    if v1 == 0 {
        return Err(Error::HypothesisViolated("x - 1 is not in (phi)".into()));
    }
    let p = x.ctx.p();
    let (mut m, mut pk) = (n, 1u64);
    while m % p == 0 {
        m /= p;
        pk *= p;
    }
    let formula = v1 * pk;
    if formula <= 4096 {
        let direct = v_phi_pow_minus(x, n, &one)?;
        if direct != Some(formula) {
            return Err(Error::Mismatch(format!(
                "lte_ga: formula {formula}, direct {direct:?}"
            )));
        }
    }
    Ok(Some(formula))
}

/// Order of the constant term of `sigma` in the multiplicative group.
pub fn constant_order(sigma: &TwistedPoly) -> Result<ConstantOrder> {
    match sigma.coeff(0) {
        FieldElem::Fin(0) => Err(Error::InseparableSigma),
        FieldElem::Fin(c) => Ok(ConstantOrder::Finite(sigma.ctx.order(c)?)),
        FieldElem::Fun(c) => {
            if c.is_zero() {
                Err(Error::InseparableSigma)
            } else if let Some(a) = c.constant_value() {
                Ok(ConstantOrder::Finite(sigma.ctx.prime_subfield().order(a)?))
            } else {
                Ok(ConstantOrder::Transcendental)
            }
        }
    }
}

/// The additive polynomial `sum c_i x^(p^i)`.
pub fn additive_poly(sigma: &TwistedPoly) -> Result<Poly> {
    if sigma.ctx.flavor() != Flavor::Finite {
        return Err(Error::NotRealizable("coefficients are not in a finite field".into()));
    }
    let Some(m) = sigma.index() else {
        return Ok(Poly::zero(&sigma.ctx));
    };
    let p = sigma.ctx.p();
    let deg = (p as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
    scale::check_degree("additive polynomial degree", deg.min(u64::MAX as u128) as u64)?;
    let mut c = vec![0u64; deg as usize + 1];
    let mut e = 1usize;
    for a in &sigma.c {
        c[e] = a.as_finite().unwrap();
        e *= p as usize;
    }
    Ok(Poly::from_coeffs(&sigma.ctx, c))
}
