//! Rational self-maps of the projective line and the brute-force
//! periodic-point oracle.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::{distinct_root_count, field_make, Ctx, Poly, SmallField};
use crate::scale;

/// A rational map `N/D` in lowest terms with monic denominator.
#[derive(Clone, PartialEq, Eq)]
pub struct RatMap {
    num: Poly,
    den: Poly,
}

impl fmt::Debug for RatMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RatMap({:?} / {:?})", self.num.coeffs(), self.den.coeffs())
    }
}

impl RatMap {
    pub fn new(num: Poly, den: Poly) -> Result<RatMap> {
        if den.is_zero() {
            return Err(Error::DivisionByZeroPoly);
        }
        let g = num.gcd(&den);
        let (mut n, mut d) = if g.is_zero() || g.is_constant() {
            (num, den)
        } else {
            (num.div_exact(&g)?, den.div_exact(&g)?)
        };
        let inv = d.ctx().inv(d.lead())?;
        if inv != 1 {
            n = n.scale(inv);
            d = d.scale(inv);
        }
        if n.is_constant() && d.is_constant() {
            return Err(Error::InvalidInput("constant map".into()));
        }
        Ok(RatMap { num: n, den: d })
    }

    pub fn polynomial(f: Poly) -> Result<RatMap> {
        let one = Poly::one(f.ctx());
        RatMap::new(f, one)
    }

    pub fn identity(ctx: &Ctx) -> RatMap {
        RatMap { num: Poly::x(ctx), den: Poly::one(ctx) }
    }

    pub fn ctx(&self) -> &Ctx {
        self.num.ctx()
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn degree(&self) -> usize {
        self.num.deg0().max(self.den.deg0())
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_constant()
    }

    /// `f(infinity)`: `None` stands for infinity itself.
    pub fn value_at_infinity(&self) -> Option<u64> {
        let (dn, dd) = (self.num.deg0(), self.den.deg0());
        if self.num.is_zero() {
            Some(0)
        } else if dn > dd {
            None
        } else if dn < dd {
            Some(0)
        } else {
            let f = self.ctx();
            Some(f.mul(self.num.lead(), f.inv(self.den.lead()).unwrap()))
        }
    }
}

/// `f(g(x))`.
pub fn compose(f: &RatMap, g: &RatMap) -> Result<RatMap> {
    if f.ctx() != g.ctx() {
        return Err(Error::InvalidInput("maps over different fields".into()));
    }
    let e = f.degree();
    let total = (e as u64).saturating_mul(g.degree() as u64);
    scale::check_degree("composite degree", total)?;
    if f.is_polynomial() && g.is_polynomial() {
        let c = f.ctx().inv(f.den.lead())?;
        let n = f.num.scale(c).compose(&g.num);
        return RatMap::new(n, Poly::one(f.ctx()));
    }
    // Homogenise: f(N/D) = sum a_i N^i D^(e-i) / sum b_i N^i D^(e-i).
    let mut npow = vec![Poly::one(f.ctx())];
    let mut dpow = vec![Poly::one(f.ctx())];
    for i in 1..=e {
        npow.push(npow[i - 1].mul(&g.num));
        dpow.push(dpow[i - 1].mul(&g.den));
    }
    let homog = |h: &Poly| {
        let mut acc = Poly::zero(f.ctx());
        for (i, &a) in h.coeffs().iter().enumerate() {
            if a != 0 {
                acc = acc.add(&npow[i].mul(&dpow[e - i]).scale(a));
            }
        }
        acc
    };
    RatMap::new(homog(&f.num), homog(&f.den))
}

/// `f^n`, by `n - 1` successive compositions `f o f^(k)`.
pub fn iterate(f: &RatMap, n: u32) -> Result<RatMap> {
    if n == 0 {
        return Ok(RatMap::identity(f.ctx()));
    }
    let total = (f.degree() as u128).checked_pow(n).unwrap_or(u128::MAX);
    if total > scale::max_degree() as u128 {
        return Err(Error::ScaleExceeded {
            what: "iterate degree",
            value: total,
            limit: scale::max_degree() as u128,
        });
    }
    let mut g = f.clone();
    for _ in 1..n {
        g = compose(f, &g)?;
    }
    Ok(g)
}

/// False exactly when `f` is a rational function of `x^p`.
pub fn is_separable(f: &RatMap) -> bool {
    let w = f.num.derivative().mul(&f.den).sub(&f.num.mul(&f.den.derivative()));
    !w.is_zero()
}

/// Number of fixed points of a map on the projective line over the
/// algebraic closure, with the point at infinity found by degree comparison.
pub fn fixed_point_count(g: &RatMap) -> Result<u64> {
    let fix = g.num.sub(&Poly::x(g.ctx()).mul(&g.den));
    if fix.is_zero() {
        return Err(Error::Infinite);
    }
    let finite = distinct_root_count(&fix)? as u64;
    let at_infinity = u64::from(g.num.deg0() > g.den.deg0());
    Ok(finite + at_infinity)
}

/// `#Per_n(f)` over the algebraic closure by brute force.
pub fn per_n_oracle(f: &RatMap, n: u32) -> Result<u64> {
    fixed_point_count(&iterate(f, n)?)
}

/// Cycle-length histogram of `f` on `P^1(F_{p^max_k})`, for lengths up to
/// `max_n`. Entry `i` is `(i + 1, number of cycles of length i + 1)`.
pub fn cycle_census(f: &RatMap, max_k: usize, max_n: usize) -> Result<Vec<(usize, u64)>> {
    if f.ctx().k() != 1 {
        return Err(Error::InvalidInput("census needs a map over the prime field".into()));
    }
    let p = f.ctx().p();
    let size = (p as u128).checked_pow(max_k as u32).unwrap_or(u128::MAX);
    scale::check_enumeration("census field size", size)?;
    let ext = field_make(p, max_k, None)?;
    let sf = SmallField::new(&ext)?;
    let q = sf.q();
    let inf = q;
    let num = f.num.coeffs();
    let den = f.den.coeffs();
    let at_inf = f.value_at_infinity().unwrap_or(inf);
    let next: Vec<u64> = (0..=q)
        .map(|x| {
            if x == inf {
                return at_inf;
            }
            let d = sf.eval(den, x);
            if d == 0 {
                inf
            } else {
                sf.mul(sf.eval(num, x), sf.inv(d))
            }
        })
        .collect();
    let mut hist = vec![0u64; max_n];
    // 0 = unseen, 1 = on the current walk, 2 = finished.
    let mut state = vec![0u8; (q + 1) as usize];
    let mut path = Vec::new();
    for start in 0..=q {
        if state[start as usize] != 0 {
            continue;
        }
        path.clear();
        let mut x = start;
        while state[x as usize] == 0 {
            state[x as usize] = 1;
            path.push(x);
            x = next[x as usize];
        }
        if state[x as usize] == 1 {
            let pos = path.iter().position(|&y| y == x).unwrap();
            let len = path.len() - pos;
            if len <= max_n {
                hist[len - 1] += 1;
            }
        }
        for &y in &path {
            state[y as usize] = 2;
        }
    }
    Ok(hist.into_iter().enumerate().map(|(i, c)| (i + 1, c)).collect())
}

/// Points of exact period dividing `n` recorded in a census histogram.
pub fn census_points_dividing(hist: &[(usize, u64)], n: usize) -> u64 {
    hist.iter().filter(|(len, _)| n % len == 0).map(|&(len, c)| len as u64 * c).sum()
}
