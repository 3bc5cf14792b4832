//! Endomorphism-ring arithmetic: rational integers, imaginary quadratic
//! orders and two explicit quaternion orders, with the valuations that
//! measure inseparable degree and the lifting-the-exponent identities.

mod quad;
mod quat;

pub use quad::{lte_quad, v_frak_p, v_frak_p_conj, v_frak_p_pow_minus, PrimeContext, QuadElem, QuadRing};
pub use quat::{basis_tables, lte_quat, v_i, QuatElem, QuatOrder};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::field::factor_u64;

/// Arithmetic shared by quadratic and quaternion order elements.
pub trait OrderElem: Clone + PartialEq + std::fmt::Debug {
    /// The rational integer `n` in the same ring.
    fn int_like(&self, n: i64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn conj(&self) -> Self;
    fn norm(&self) -> BigInt;
    fn trace(&self) -> BigInt;
    /// Coordinates reduced into `[0, m)`.
    fn reduce(&self, m: &BigInt) -> Self;
    fn is_zero(&self) -> bool;

    fn pow(&self, mut n: u64) -> Self {
        let mut acc = self.int_like(1);
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }
}

/// `x^n` with coordinates reduced modulo `m` throughout.
pub fn pow_mod_elem<E: OrderElem>(x: &E, mut n: u64, m: &BigInt) -> E {
    let mut acc = x.int_like(1).reduce(m);
    let mut base = x.reduce(m);
    while n > 0 {
        if n & 1 == 1 {
            acc = acc.mul(&base).reduce(m);
        }
        n >>= 1;
        if n > 0 {
            base = base.mul(&base).reduce(m);
        }
    }
    acc
}

pub fn v_p_u64(mut n: u64, p: u64) -> u64 {
    let mut v = 0;
    while n > 0 && n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

pub(crate) fn v_p_big(x: &BigInt, p: u64) -> Result<u64> {
    if x.is_zero() {
        return Err(Error::ZeroInput);
    }
    let p = BigInt::from(p);
    let mut x = x.abs();
    let mut v = 0;
    loop {
        let (q, r) = x.div_rem(&p);
        if !r.is_zero() {
            return Ok(v);
        }
        x = q;
        v += 1;
    }
}

/// `v_p(x)` for a nonzero integer.
pub fn v_p_int(x: &BigInt, p: u64) -> Result<u64> {
    v_p_big(x, p)
}

/// Lifting the exponent over `Z`: `v_p(x^n - y^n) = v_p(x - y) + v_p(n)`.
pub fn lte_int(x: &BigInt, y: &BigInt, p: u64, n: u64) -> Result<u64> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    let bp = BigInt::from(p);
    if (x % &bp).is_zero() || (y % &bp).is_zero() {
        return Err(Error::HypothesisViolated(format!("{p} divides x or y")));
    }
    let d = x - y;
    if d.is_zero() {
        return Err(Error::HypothesisViolated("x = y".into()));
    }
    let v = v_p_big(&d, p)?;
    if v == 0 {
        return Err(Error::HypothesisViolated(format!("{p} does not divide x - y")));
    }
    if p == 2 && v < 2 {
        return Err(Error::HypothesisViolated("p = 2 needs 4 | x - y".into()));
    }
    let formula = v + v_p_u64(n, p);
    if n <= 64 {
        let direct = v_p_big(&(num_traits::pow(x.clone(), n as usize) - num_traits::pow(y.clone(), n as usize)), p)?;
        if direct != formula {
            return Err(Error::Mismatch(format!("lte_int: formula {formula}, direct {direct}")));
        }
    }
    Ok(formula)
}

/// The sequence `a_n = N(sigma^n - gamma) mod l`, `n = 0..length`, computed
/// directly and through its order-4 linear recurrence, with its period.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormSequence {
    pub ell: u64,
    pub direct: Vec<u64>,
    pub recurrence: Vec<u64>,
    pub preperiod: usize,
    pub period: u128,
    /// Least `A` with `period | (l-1)(l^2-1) l^A`.
    pub a_exponent: u32,
}

fn mod_u64(x: &BigInt, l: u64) -> u64 {
    x.mod_floor(&BigInt::from(l)).to_u64().unwrap()
}

/// `N^n - tr(sigma^n conj(gamma)) + N(gamma) mod l` by 2x2 matrix powering.
struct ClosedForm {
    l: u64,
    n_sigma: u64,
    t_sigma: u64,
    c0: u64,
    c1: u64,
    n_gamma: u64,
}

impl ClosedForm {
    fn at(&self, n: u128) -> u64 {
        let l = self.l as u128;
        let pow = |mut b: u128, mut e: u128| {
            let mut acc = 1 % l;
            b %= l;
            while e > 0 {
                if e & 1 == 1 {
                    acc = acc * b % l;
                }
                b = b * b % l;
                e >>= 1;
            }
            acc
        };
        // (c_n, c_{n+1}) = M^n (c_0, c_1), M = [[0, 1], [-N, T]]
        let mm = |a: [[u128; 2]; 2], b: [[u128; 2]; 2]| {
            let mut r = [[0u128; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    r[i][j] = (a[i][0] * b[0][j] + a[i][1] * b[1][j]) % l;
                }
            }
            r
        };
        let mut acc = [[1 % l, 0], [0, 1 % l]];
        let mut base = [[0, 1 % l], [(l - self.n_sigma as u128 % l) % l, self.t_sigma as u128 % l]];
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = mm(acc, base);
            }
            base = mm(base, base);
            e >>= 1;
        }
        let cn = (acc[0][0] * self.c0 as u128 + acc[0][1] * self.c1 as u128) % l;
        ((pow(self.n_sigma as u128, n) + l - cn + self.n_gamma as u128) % l) as u64
    }
}

pub fn norm_sequence<E: OrderElem>(sigma: &E, gamma: &E, ell: u64, length: usize) -> Result<NormSequence> {
    if !crate::field::is_prime(ell) {
        return Err(Error::NotPrime(ell));
    }
    let m = BigInt::from(ell);
    let mut direct = Vec::with_capacity(length);
    let mut s = sigma.int_like(1);
    let sig = sigma.reduce(&m);
    for _ in 0..length {
        direct.push(mod_u64(&s.sub(gamma).norm(), ell));
        s = s.mul(&sig).reduce(&m);
    }

    let cf = ClosedForm {
        l: ell,
        n_sigma: mod_u64(&sigma.norm(), ell),
        t_sigma: mod_u64(&sigma.trace(), ell),
        c0: mod_u64(&gamma.conj().trace(), ell),
        c1: mod_u64(&sigma.mul(&gamma.conj()).trace(), ell),
        n_gamma: mod_u64(&gamma.norm(), ell),
    };
    // g(x) = (x - 1)(x - N)(x^2 - T x + N) mod l
    let l = ell as i128;
    let (nn, tt) = (cf.n_sigma as i128, cf.t_sigma as i128);
    let mul = |a: &[i128], b: &[i128]| {
        let mut r = vec![0i128; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                r[i + j] = (r[i + j] + x * y).rem_euclid(l);
            }
        }
        r
    };
    let g = mul(&mul(&[-1, 1], &[-nn, 1]), &[nn, -tt, 1]);
    let mut recurrence: Vec<u64> = (0..length.min(4)).map(|n| cf.at(n as u128)).collect();
    for n in 4..length {
        let s: i128 = (0..4).map(|i| g[i] * recurrence[n - 4 + i] as i128).sum();
        recurrence.push((-s).rem_euclid(l) as u64);
    }
    if direct != recurrence {
        let i = direct.iter().zip(&recurrence).position(|(a, b)| a != b).unwrap();
        return Err(Error::Mismatch(format!("norm sequence differs from recurrence at n = {i}")));
    }

    let is_period = |pre: usize, per: u128| (0..4).all(|i| cf.at((pre + i) as u128) == cf.at(pre as u128 + i as u128 + per));
    let base = (ell as u128 - 1) * (ell as u128 * ell as u128 - 1);
    let mut found = None;
    for a in 0..=4u32 {
        let b = base * (ell as u128).pow(a);
        if is_period(4, b) {
            found = Some((a, b));
            break;
        }
    }
    let Some((a_exponent, bound)) = found else {
        return Err(Error::Mismatch(format!("no period dividing (l-1)(l^2-1)l^A with A <= 4 for l = {ell}")));
    };
    let mut period = bound;
    let mut primes: Vec<u64> = factor_u64(ell - 1).into_iter().map(|x| x.0).collect();
    primes.extend(factor_u64(ell + 1).into_iter().map(|x| x.0));
    primes.push(ell);
    primes.sort_unstable();
    primes.dedup();
    for q in primes {
        while period % q as u128 == 0 && is_period(4, period / q as u128) {
            period /= q as u128;
        }
    }
    let preperiod = (0..=4).find(|&pre| is_period(pre, period)).unwrap();
    for n in preperiod..length {
        if n as u128 + period < length as u128 && direct[n] != direct[n + period as usize] {
            return Err(Error::Mismatch("detected period contradicts the direct sequence".into()));
        }
    }
    let a_exponent = (0..=a_exponent).find(|&a| (base * (ell as u128).pow(a)) % period == 0).unwrap();
    Ok(NormSequence { ell, direct, recurrence, preperiod, period, a_exponent })
}

/// A ring element of either flavor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RingElem {
    Quad(QuadElem),
    Quat(QuatElem),
}

/// Which ring the automorphism group lives in.
#[derive(Debug, Clone)]
pub enum AutFlavor {
    /// Ordinary curve: imaginary quadratic order with the inseparable prime fixed by `ctx`.
    Ordinary { ctx: PrimeContext, gamma_order: u32 },
    /// Supersingular curve given only through a quadratic subring, `v_I = v_p(N)`.
    SupersingularPair { ring: QuadRing, p: u64, gamma_order: u32 },
    /// Supersingular `j = 0` curve in characteristic 2 or 3, full unit group.
    Quaternion(QuatOrder),
}

#[derive(Debug, Clone)]
pub struct AutEntry {
    pub gamma: RingElem,
    /// Multiplicative order of `gamma`.
    pub order: u32,
    /// `v(1 - gamma)`; `None` for `gamma = 1`.
    pub v: Option<u64>,
    /// `C(gamma) = p^v(1 - gamma)`.
    pub c: Option<BigInt>,
}

fn elem_order<E: OrderElem>(x: &E) -> u32 {
    let one = x.int_like(1);
    let mut y = x.clone();
    for k in 1..=24 {
        if y == one {
            return k;
        }
        y = y.mul(x);
    }
    0
}

/// The admissible automorphism groups with the constants `p^v(1 - gamma)`.
pub fn aut_group_table(p: u64, j_zero: bool, flavor: &AutFlavor) -> Result<Vec<AutEntry>> {
    let bp = BigInt::from(p);
    match flavor {
        AutFlavor::Quaternion(order) => {
            if !j_zero || order.p() != p {
                return Err(Error::InvalidCombination(format!("{order:?} order needs j = 0 and p = {}", order.p())));
            }
            let one = order.int(1);
            order
                .units()
                .into_iter()
                .map(|g| {
                    let d = one.sub(&g);
                    let v = if d.is_zero() { None } else { Some(v_i(&d)?) };
                    Ok(AutEntry {
                        order: elem_order(&g),
                        gamma: RingElem::Quat(g),
                        c: v.map(|v| num_traits::pow(bp.clone(), v as usize)),
                        v,
                    })
                })
                .collect()
        }
        AutFlavor::Ordinary { ctx, gamma_order } => {
            if ctx.p() != p {
                return Err(Error::InvalidCombination("prime context is for a different p".into()));
            }
            if p <= 3 && *gamma_order > 2 {
                return Err(Error::InvalidCombination(format!("ordinary curves in characteristic {p} have Aut = {{+-1}}")));
            }
            quad_table(ctx.ring(), *gamma_order, j_zero, |d| v_frak_p(d, ctx), &bp)
        }
        AutFlavor::SupersingularPair { ring, p: q, gamma_order } => {
            if *q != p || p < 5 {
                return Err(Error::InvalidCombination("abstract supersingular pairs need p >= 5".into()));
            }
            quad_table(*ring, *gamma_order, j_zero, |d| v_p_big(&d.norm(), p), &bp)
        }
    }
}

fn quad_table(
    ring: QuadRing,
    gamma_order: u32,
    j_zero: bool,
    val: impl Fn(&QuadElem) -> Result<u64>,
    bp: &BigInt,
) -> Result<Vec<AutEntry>> {
    if ![1, 2, 3, 4, 6].contains(&gamma_order) {
        return Err(Error::InvalidCombination(format!("|Gamma| = {gamma_order} is not 1, 2, 3, 4 or 6")));
    }
    if matches!(gamma_order, 3 | 6) && !j_zero {
        return Err(Error::InvalidCombination("|Gamma| = 3 or 6 needs j = 0".into()));
    }
    let one = ring.int(1);
    let out: Vec<AutEntry> = ring
        .units()
        .into_iter()
        .filter(|g| gamma_order % elem_order(g) == 0)
        .map(|g| {
            let d = one.sub(&g);
            let v = if d.is_zero() { None } else { Some(val(&d)?) };
            Ok(AutEntry {
                order: elem_order(&g),
                gamma: RingElem::Quad(g),
                c: v.map(|v| num_traits::pow(bp.clone(), v as usize)),
                v,
            })
        })
        .collect::<Result<_>>()?;
    if out.len() != gamma_order as usize {
        return Err(Error::InvalidCombination(format!("the order has no cyclic unit group of order {gamma_order}")));
    }
    Ok(out)
}
