//! The five families of dynamically affine maps and their closed-form
//! periodic-point counts.
//!
//! Every count goes through the orbit template
//! `#Per_n = boundary + (1/|Gamma|) sum_gamma #ker(sigma^n - gamma)`, where the
//! boundary is the number of periodic points outside the image of the group.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::dynmap::RatMap;
use crate::elliptic::{lattes_realize, EllipticCurve};
use crate::error::{Error, Result};
use crate::field::{inv_mod, is_prime, Ctx, FieldCtx, FieldElem, Poly};
use crate::orders::{basis_tables, pow_mod_elem, QuatOrder, v_frak_p, v_frak_p_pow_minus, v_p_big, v_p_u64, OrderElem, PrimeContext, QuadElem, QuatElem};
use crate::twisted::{additive_poly, constant_order, v_phi, v_phi_pow_minus, ConstantOrder, TwistedPoly};

/// Largest bit length an exact count may reach.
pub const MAX_COUNT_BITS: u64 = 1 << 20;

/// Above this `n` the G_a valuation switches from direct truncated powering
/// to lifting the exponent.
const LTE_SWITCH: u64 = 4096;

/// Kernel rule for Lattès maps with endomorphism ring `Z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GenericJKernel {
    /// `(sigma^n - gamma)^2 / p^(v_p(sigma^n - gamma))`, the degree of the
    /// isogeny divided by its inseparable degree.
    Squared,
    /// `|sigma^n - gamma| / p^(v_p(sigma^n - gamma))`.
    Unsquared,
}

/// The variant the torsion oracle agrees with.
pub const DEFAULT_GENERIC_J_KERNEL: GenericJKernel = GenericJKernel::Squared;

#[derive(Debug, Clone, PartialEq)]
pub enum SupersingularSigma {
    /// `sigma` in `Z[tau]` for `p >= 5`; only `v_p(N(.))` is used.
    Pair { p: u64, sigma: QuadElem, gammas: Vec<QuadElem> },
    /// Explicit coordinates in the maximal order for `p` in `{2, 3}`.
    Quaternion { sigma: QuatElem, gammas: Vec<QuatElem> },
}

/// A dynamically affine map, described by its family and parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum DynAffineMap {
    Power { p: u64, d: i64 },
    Chebyshev { p: u64, d: i64 },
    Additive { sigma: TwistedPoly, translation: FieldElem },
    Subadditive { sigma: TwistedPoly, d: u64 },
    LattesGenericJ { p: u64, sigma: i64, kernel: GenericJKernel },
    LattesOrdinary { sigma: QuadElem, ctx: PrimeContext, gammas: Vec<QuadElem> },
    LattesSupersingular(SupersingularSigma),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Separability {
    Separable,
    Inseparable,
}

fn check_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotPrime(p))
    }
}

/// Checks that `gammas` is a finite group of order 2, 3, 4 or 6 of units.
fn check_gamma_group<E: OrderElem>(gammas: &[E], units: &[E]) -> Result<()> {
    if ![2, 3, 4, 6].contains(&gammas.len()) {
        return Err(Error::InvalidCombination(format!("|Gamma| = {} is not 2, 3, 4 or 6", gammas.len())));
    }
    for g in gammas {
        if !units.contains(g) {
            return Err(Error::InvalidCombination(format!("{g:?} is not a unit")));
        }
        if gammas.iter().filter(|h| *h == g).count() > 1 {
            return Err(Error::InvalidCombination(format!("{g:?} listed twice")));
        }
        for h in gammas {
            if !gammas.contains(&g.mul(h)) {
                return Err(Error::InvalidCombination("Gamma is not closed under multiplication".into()));
            }
        }
    }
    Ok(())
}

impl DynAffineMap {
    pub fn power(p: u64, d: i64) -> Result<DynAffineMap> {
        check_prime(p)?;
        if d.unsigned_abs() < 2 {
            return Err(Error::InvalidInput(format!("power map needs |d| >= 2, got {d}")));
        }
        Ok(DynAffineMap::Power { p, d })
    }

    /// `d` and `-d` give the same polynomial; negative values are accepted.
    pub fn chebyshev(p: u64, d: i64) -> Result<DynAffineMap> {
        check_prime(p)?;
        if d.unsigned_abs() < 2 {
            return Err(Error::InvalidInput(format!("Chebyshev map needs |d| >= 2, got {d}")));
        }
        Ok(DynAffineMap::Chebyshev { p, d })
    }

    pub fn additive(sigma: TwistedPoly, translation: FieldElem) -> Result<DynAffineMap> {
        if sigma.index().unwrap_or(0) < 1 {
            return Err(Error::InvalidInput("sigma must have positive phi-degree".into()));
        }
        Ok(DynAffineMap::Additive { sigma, translation })
    }

    /// Requires every term `c_i x^(p^i)` of the realization to have
    /// `p^i = 1 mod d`.
    pub fn subadditive(sigma: TwistedPoly, d: u64) -> Result<DynAffineMap> {
        let p = sigma.ctx().p();
        if sigma.index().unwrap_or(0) < 1 {
            return Err(Error::InvalidInput("sigma must have positive phi-degree".into()));
        }
        if d < 2 || d % p == 0 {
            return Err(Error::InvalidInput(format!("d = {d} must be >= 2 and prime to {p}")));
        }
        let mut pi = 1u64;
        for (i, c) in sigma.coeffs().iter().enumerate() {
            if !c.is_zero() && pi != 1 {
                return Err(Error::SubadditiveConditionViolated(format!("term of degree {p}^{i} is not 1 mod {d}")));
            }
            pi = pi * (p % d) % d;
        }
        Ok(DynAffineMap::Subadditive { sigma, d })
    }

    pub fn lattes_generic_j(p: u64, sigma: i64) -> Result<DynAffineMap> {
        check_prime(p)?;
        if sigma.unsigned_abs() < 2 {
            return Err(Error::InvalidInput(format!("|sigma| must be >= 2, got {sigma}")));
        }
        Ok(DynAffineMap::LattesGenericJ { p, sigma, kernel: DEFAULT_GENERIC_J_KERNEL })
    }

    pub fn lattes_ordinary(sigma: QuadElem, ctx: PrimeContext, gammas: Vec<QuadElem>) -> Result<DynAffineMap> {
        if sigma.ring() != ctx.ring() || gammas.iter().any(|g| g.ring() != ctx.ring()) {
            return Err(Error::InvalidCombination("sigma, Gamma and the prime context use different rings".into()));
        }
        check_gamma_group(&gammas, &ctx.ring().units())?;
        if sigma.norm() < BigInt::from(2) {
            return Err(Error::InvalidInput("N(sigma) must be >= 2".into()));
        }
        Ok(DynAffineMap::LattesOrdinary { sigma, ctx, gammas })
    }

    pub fn lattes_supersingular(s: SupersingularSigma) -> Result<DynAffineMap> {
        match &s {
            SupersingularSigma::Pair { p, sigma, gammas } => {
                check_prime(*p)?;
                if *p < 5 {
                    return Err(Error::InvalidCombination("p = 2, 3 need quaternion coordinates".into()));
                }
                if gammas.iter().any(|g| g.ring() != sigma.ring()) {
                    return Err(Error::InvalidCombination("sigma and Gamma use different rings".into()));
                }
                check_gamma_group(gammas, &sigma.ring().units())?;
                if sigma.norm() < BigInt::from(2) {
                    return Err(Error::InvalidInput("N(sigma) must be >= 2".into()));
                }
            }
            SupersingularSigma::Quaternion { sigma, gammas } => {
                if gammas.iter().any(|g| g.order() != sigma.order()) {
                    return Err(Error::InvalidCombination("sigma and Gamma use different orders".into()));
                }
                let units = sigma.order().units();
                if !(2..=24).contains(&gammas.len()) || 24 % gammas.len() != 0 {
                    return Err(Error::InvalidCombination(format!("|Gamma| = {} does not divide 24", gammas.len())));
                }
                for g in gammas {
                    if !units.contains(g) {
                        return Err(Error::InvalidCombination(format!("{g:?} is not a unit")));
                    }
                    for h in gammas {
                        if !gammas.contains(&g.mul(h)) {
                            return Err(Error::InvalidCombination("Gamma is not closed under multiplication".into()));
                        }
                    }
                    // psi descends to E/Gamma only if sigma gamma = gamma' sigma
                    let sg = sigma.mul(g);
                    if !gammas.iter().any(|h| h.mul(sigma) == sg) {
                        return Err(Error::InvalidCombination("sigma does not normalize Gamma".into()));
                    }
                }
                if sigma.norm() < BigInt::from(2) {
                    return Err(Error::InvalidInput("N(sigma) must be >= 2".into()));
                }
            }
        }
        Ok(DynAffineMap::LattesSupersingular(s))
    }

    /// Same map with the other generic-j kernel rule; other families are
    /// returned unchanged.
    pub fn with_generic_j_kernel(&self, k: GenericJKernel) -> DynAffineMap {
        match self {
            DynAffineMap::LattesGenericJ { p, sigma, .. } => DynAffineMap::LattesGenericJ { p: *p, sigma: *sigma, kernel: k },
            other => other.clone(),
        }
    }

    pub fn p(&self) -> u64 {
        match self {
            DynAffineMap::Power { p, .. } | DynAffineMap::Chebyshev { p, .. } | DynAffineMap::LattesGenericJ { p, .. } => *p,
            DynAffineMap::Additive { sigma, .. } | DynAffineMap::Subadditive { sigma, .. } => sigma.ctx().p(),
            DynAffineMap::LattesOrdinary { ctx, .. } => ctx.p(),
            DynAffineMap::LattesSupersingular(SupersingularSigma::Pair { p, .. }) => *p,
            DynAffineMap::LattesSupersingular(SupersingularSigma::Quaternion { sigma, .. }) => sigma.order().p(),
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            DynAffineMap::Power { .. } => "power",
            DynAffineMap::Chebyshev { .. } => "chebyshev",
            DynAffineMap::Additive { .. } => "additive",
            DynAffineMap::Subadditive { .. } => "subadditive",
            DynAffineMap::LattesGenericJ { .. } => "lattes_generic_j",
            DynAffineMap::LattesOrdinary { .. } => "lattes_ordinary",
            DynAffineMap::LattesSupersingular(_) => "lattes_supersingular",
        }
    }

    /// Degree of the map on `P^1`.
    pub fn degree(&self) -> BigUint {
        match self {
            DynAffineMap::Power { d, .. } | DynAffineMap::Chebyshev { d, .. } => BigUint::from(d.unsigned_abs()),
            DynAffineMap::Additive { sigma, .. } | DynAffineMap::Subadditive { sigma, .. } => {
                num_traits::pow(BigUint::from(sigma.ctx().p()), sigma.index().unwrap_or(0))
            }
            DynAffineMap::LattesGenericJ { sigma, .. } => BigUint::from(sigma.unsigned_abs()).pow(2),
            DynAffineMap::LattesOrdinary { sigma, .. } => sigma.norm().to_biguint().unwrap(),
            DynAffineMap::LattesSupersingular(SupersingularSigma::Pair { sigma, .. }) => sigma.norm().to_biguint().unwrap(),
            DynAffineMap::LattesSupersingular(SupersingularSigma::Quaternion { sigma, .. }) => sigma.norm().to_biguint().unwrap(),
        }
    }

    /// Number of periodic points outside the image of the group.
    pub fn boundary(&self, n: u64) -> u64 {
        match self {
            DynAffineMap::Power { d, .. } => {
                // 0 and infinity are swapped by a negative power
                if *d > 0 || n % 2 == 0 {
                    2
                } else {
                    0
                }
            }
            DynAffineMap::Chebyshev { .. } | DynAffineMap::Additive { .. } | DynAffineMap::Subadditive { .. } => 1,
            DynAffineMap::LattesGenericJ { .. } | DynAffineMap::LattesOrdinary { .. } | DynAffineMap::LattesSupersingular(_) => 0,
        }
    }
}

/// The orbit template: `boundary + (1/|Gamma|) sum #ker(sigma^n - gamma)`.
pub fn per_n_template<G>(
    boundary: u64,
    gammas: &[G],
    n: u64,
    kernel_size: impl Fn(&G, u64) -> Result<BigUint>,
) -> Result<BigUint> {
    if gammas.is_empty() {
        return Err(Error::InvalidInput("Gamma is empty".into()));
    }
    let mut sum = BigUint::zero();
    for g in gammas {
        sum += kernel_size(g, n)?;
    }
    let (q, r) = sum.div_rem(&BigUint::from(gammas.len()));
    if !r.is_zero() {
        return Err(Error::NonIntegerOrbitCount { num: sum.to_string(), den: gammas.len() as u64 });
    }
    Ok(q + boundary)
}

/// `#ker(x -> x^m)` on `G_m`: `|m| / p^(v_p(m))`.
pub fn kernel_gm(m: &BigInt, p: u64) -> Result<BigUint> {
    if m.is_zero() {
        return Err(Error::Infinite);
    }
    let v = v_p_big(m, p)?;
    Ok((m.abs() / num_traits::pow(BigInt::from(p), v as usize)).to_biguint().unwrap())
}

fn check_count_size(map: &DynAffineMap, n: u64) -> Result<()> {
    let bits = map.degree().bits().max(1).saturating_mul(n);
    if bits > MAX_COUNT_BITS {
        return Err(Error::ScaleExceeded { what: "count bit length", value: bits as u128, limit: MAX_COUNT_BITS as u128 });
    }
    Ok(())
}

/// Entries standing for the roots of unity `omega` of order dividing `d`.
/// Only `omega = c_0^n` can have `sigma^n - omega` in `(phi)`; every other
/// root contributes the full degree.
fn subadditive_omegas(sigma: &TwistedPoly, d: u64, n: u64) -> Vec<Option<FieldElem>> {
    let f = sigma.ctx();
    let w = f.el_pow(&sigma.coeff(0), n);
    let matched = !w.is_zero() && f.el_pow(&w, d).is_one();
    let mut out = vec![None; d as usize];
    if matched {
        out[0] = Some(w);
    }
    out
}

/// `v_phi(sigma^n - omega)`, switching to lifting the exponent for large
/// `n` when `omega = 1`.
fn ga_valuation(sigma: &TwistedPoly, n: u64, omega: &FieldElem) -> Result<u64> {
    let f = sigma.ctx();
    if f.el_pow(&sigma.coeff(0), n) != *omega {
        return Ok(0);
    }
    if n > LTE_SWITCH && omega.is_one() {
        if let Ok(ConstantOrder::Finite(m)) = constant_order(sigma) {
            if n % m == 0 {
                let v1 = v_phi_pow_minus(sigma, m, omega)?.ok_or(Error::Infinite)?;
                return Ok(v1 * num_traits::pow(sigma.ctx().p(), v_p_u64(n / m, f.p()) as usize));
            }
        }
    }
    v_phi_pow_minus(sigma, n, omega)?.ok_or(Error::Infinite)
}

pub fn classify_separability(map: &DynAffineMap) -> Separability {
    let p = map.p();
    let insep = match map {
        DynAffineMap::Power { d, .. } | DynAffineMap::Chebyshev { d, .. } => d.unsigned_abs() % p == 0,
        DynAffineMap::Additive { sigma, .. } | DynAffineMap::Subadditive { sigma, .. } => v_phi(sigma) != Some(0),
        DynAffineMap::LattesGenericJ { sigma, .. } => sigma.unsigned_abs() % p == 0,
        DynAffineMap::LattesOrdinary { sigma, ctx, .. } => v_frak_p(sigma, ctx).map_or(true, |v| v > 0),
        DynAffineMap::LattesSupersingular(SupersingularSigma::Pair { p, sigma, .. }) => (sigma.norm() % *p).is_zero(),
        DynAffineMap::LattesSupersingular(SupersingularSigma::Quaternion { sigma, .. }) => (sigma.norm() % p).is_zero(),
    };
    if insep {
        Separability::Inseparable
    } else {
        Separability::Separable
    }
}

fn norm_kernel<E: OrderElem>(x: &E, p: u64) -> Result<BigUint> {
    let nm = x.norm();
    if nm.is_zero() {
        return Err(Error::Infinite);
    }
    let v = v_p_big(&nm, p)?;
    Ok((nm / num_traits::pow(BigInt::from(p), v as usize)).to_biguint().unwrap())
}

/// Exact `#Per_n` from the family's closed form.
pub fn per_n_closed(map: &DynAffineMap, n: u64) -> Result<BigUint> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    check_count_size(map, n)?;
    if classify_separability(map) == Separability::Inseparable {
        return Ok(num_traits::pow(map.degree(), n as usize) + 1u32);
    }
    let p = map.p();
    let b = map.boundary(n);
    match map {
        DynAffineMap::Power { d, .. } => {
            let dn = num_traits::pow(BigInt::from(*d), n as usize);
            per_n_template(b, &[1i64], n, |g, _| kernel_gm(&(&dn - g), p))
        }
        DynAffineMap::Chebyshev { d, .. } => {
            let dn = num_traits::pow(BigInt::from(*d), n as usize);
            per_n_template(b, &[1i64, -1], n, |g, _| kernel_gm(&(&dn - g), p))
        }
        DynAffineMap::Additive { sigma, .. } => {
            let deg_n = num_traits::pow(map.degree(), n as usize);
            let one = sigma.ctx().el_one();
            per_n_template(b, &[one], n, |w, n| {
                let v = ga_valuation(sigma, n, w)?;
                Ok(&deg_n / num_traits::pow(BigUint::from(p), v as usize))
            })
        }
        DynAffineMap::Subadditive { sigma, d } => {
            let deg_n = num_traits::pow(map.degree(), n as usize);
            per_n_template(b, &subadditive_omegas(sigma, *d, n), n, |w, n| match w {
                None => Ok(deg_n.clone()),
                Some(w) => {
                    let v = ga_valuation(sigma, n, w)?;
                    Ok(&deg_n / num_traits::pow(BigUint::from(p), v as usize))
                }
            })
        }
        DynAffineMap::LattesGenericJ { sigma, kernel, .. } => {
            let sn = num_traits::pow(BigInt::from(*sigma), n as usize);
            per_n_template(b, &[1i64, -1], n, |g, _| {
                let x = &sn - g;
                let k = kernel_gm(&x, p)?;
                Ok(match kernel {
                    GenericJKernel::Squared => k * x.abs().to_biguint().unwrap(),
                    GenericJKernel::Unsquared => k,
                })
            })
        }
        DynAffineMap::LattesOrdinary { sigma, ctx, gammas } => {
            let sn = sigma.pow(n);
            per_n_template(b, gammas, n, |g, n| {
                let x = sn.sub(g);
                let nm = x.norm();
                if nm.is_zero() {
                    return Err(Error::Infinite);
                }
                let v = v_frak_p_pow_minus(sigma, n, g, ctx)?;
                let (q, r) = nm.div_rem(&num_traits::pow(BigInt::from(p), v as usize));
                if !r.is_zero() {
                    return Err(Error::Mismatch(format!("p^{v} does not divide N(sigma^n - gamma) = {nm}")));
                }
                Ok(q.to_biguint().unwrap())
            })
        }
        DynAffineMap::LattesSupersingular(SupersingularSigma::Pair { sigma, gammas, .. }) => {
            let sn = sigma.pow(n);
            per_n_template(b, gammas, n, |g, _| norm_kernel(&sn.sub(g), p))
        }
        DynAffineMap::LattesSupersingular(SupersingularSigma::Quaternion { sigma, gammas }) => {
            let sn = sigma.pow(n);
            per_n_template(b, gammas, n, |g, _| norm_kernel(&sn.sub(g), p))
        }
    }
}

/// `v_p` of an integer given only through its residues modulo `p^K`.
fn v_p_adaptive(p: u64, residue: impl Fn(&BigInt) -> Result<BigInt>) -> Result<u64> {
    let bp = BigInt::from(p);
    let mut k = 8u32;
    loop {
        let m = num_traits::pow(bp.clone(), k as usize);
        let r = residue(&m)?.mod_floor(&m);
        if !r.is_zero() {
            return v_p_big(&r, p);
        }
        if k >= 4096 {
            return Err(Error::PrecisionExhausted(k));
        }
        k *= 2;
    }
}

fn mod_u64(x: &BigInt, ell: u64) -> u64 {
    x.mod_floor(&BigInt::from(ell)).to_u64().unwrap()
}

/// `x / p^v mod ell` for `x` known mod `ell`.
fn strip_p(x_mod: u64, p: u64, v: u64, ell: u64) -> u64 {
    let pinv = inv_mod(p % ell, ell) as u128;
    let mut acc = x_mod as u128;
    let mut e = v;
    let mut base = pinv;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % ell as u128;
        }
        base = base * base % ell as u128;
        e >>= 1;
    }
    acc as u64
}

/// `#Per_n mod ell` for large `n`, without forming the count.
///
/// Needs `ell` prime to `p` and to `|Gamma|`.
pub fn per_n_closed_mod(map: &DynAffineMap, n: u64, ell: u64) -> Result<u64> {
    if n == 0 || ell < 2 {
        return Err(Error::InvalidInput("need n >= 1 and ell >= 2".into()));
    }
    let p = map.p();
    if ell % p == 0 {
        return Err(Error::InvalidInput(format!("ell = {ell} is divisible by p = {p}")));
    }
    if classify_separability(map) == Separability::Inseparable {
        let deg = BigInt::from(map.degree());
        return Ok((mod_u64(&deg.modpow(&BigInt::from(n), &BigInt::from(ell)), ell) + 1) % ell);
    }
    let kernels = kernel_terms_mod(map, n, ell)?;
    let g = kernels.len() as u64;
    if g.gcd(&ell) != 1 {
        return Err(Error::InvalidInput(format!("ell = {ell} is not prime to |Gamma| = {g}")));
    }
    let sum = kernels.iter().fold(0u128, |acc, &k| (acc + k as u128) % ell as u128) as u64;
    let avg = (sum as u128 * inv_mod(g % ell, ell) as u128 % ell as u128) as u64;
    Ok((avg + map.boundary(n) % ell) % ell)
}

/// Order of the group `Gamma` in the orbit template.
pub fn group_order(map: &DynAffineMap) -> u64 {
    match map {
        DynAffineMap::Power { .. } | DynAffineMap::Additive { .. } => 1,
        DynAffineMap::Chebyshev { .. } | DynAffineMap::LattesGenericJ { .. } => 2,
        DynAffineMap::Subadditive { d, .. } => *d,
        DynAffineMap::LattesOrdinary { gammas, .. } | DynAffineMap::LattesSupersingular(SupersingularSigma::Pair { gammas, .. }) => {
            gammas.len() as u64
        }
        DynAffineMap::LattesSupersingular(SupersingularSigma::Quaternion { gammas, .. }) => gammas.len() as u64,
    }
}

/// Position of `gamma = 1` among the terms of [`kernel_terms_mod`]. `None`
/// for the subadditive family, whose terms are indexed by the matching root.
pub fn identity_index(map: &DynAffineMap) -> Option<usize> {
    match map {
        DynAffineMap::Power { .. } | DynAffineMap::Chebyshev { .. } | DynAffineMap::LattesGenericJ { .. } => Some(0),
        DynAffineMap::Additive { .. } => Some(0),
        DynAffineMap::Subadditive { .. } => None,
        DynAffineMap::LattesOrdinary { gammas, .. } | DynAffineMap::LattesSupersingular(SupersingularSigma::Pair { gammas, .. }) => {
            gammas.iter().position(|g| *g == g.int_like(1))
        }
        DynAffineMap::LattesSupersingular(SupersingularSigma::Quaternion { gammas, .. }) => {
            gammas.iter().position(|g| *g == g.int_like(1))
        }
    }
}

/// `#ker(sigma^n - gamma) mod ell` for each `gamma` of a separable map.
pub fn kernel_terms_mod(map: &DynAffineMap, n: u64, ell: u64) -> Result<Vec<u64>> {
    let p = map.p();
    if n == 0 || ell < 2 || ell % p == 0 {
        return Err(Error::InvalidInput(format!("need n >= 1 and ell = {ell} >= 2 prime to {p}")));
    }
    if classify_separability(map) == Separability::Inseparable {
        return Err(Error::InvalidInput("map is inseparable".into()));
    }
    Ok(match map {
        DynAffineMap::Power { d, .. } | DynAffineMap::Chebyshev { d, .. } => {
            let gammas: &[i64] = if matches!(map, DynAffineMap::Power { .. }) { &[1] } else { &[1, -1] };
            let bd = BigInt::from(*d);
            let bn = BigInt::from(n);
            let sign = if *d < 0 && n % 2 == 1 { -1 } else { 1 };
            let mut out = Vec::new();
            for &g in gammas {
                let v = match word_v_int(*d, n, g, p) {
                    Some(v) => v,
                    None => v_p_adaptive(p, |m| Ok(bd.modpow(&bn, m) - g))?,
                };
                let x = int_mod(((int_pow_mod(*d, n, ell) + ell - int_mod(g, ell)) % ell) as i64 * sign, ell);
                out.push(strip_p(x, p, v, ell));
            }
            out
        }
        DynAffineMap::Additive { sigma, .. } => {
            let idx = sigma.index().unwrap() as u64;
            let v = ga_valuation(sigma, n, &sigma.ctx().el_one())?;
            vec![pow_mod_big(p, idx as u128 * n as u128 - v as u128, ell)]
        }
        DynAffineMap::Subadditive { sigma, d } => {
            let idx = sigma.index().unwrap() as u64;
            let mut out = Vec::new();
            for w in subadditive_omegas(sigma, *d, n) {
                let v = match w {
                    None => 0,
                    Some(w) => ga_valuation(sigma, n, &w)?,
                };
                out.push(pow_mod_big(p, idx as u128 * n as u128 - v as u128, ell));
            }
            out
        }
        DynAffineMap::LattesGenericJ { sigma, kernel, .. } => {
            let bs = BigInt::from(*sigma);
            let bn = BigInt::from(n);
            let sign = if *sigma < 0 && n % 2 == 1 { -1 } else { 1 };
            let mut out = Vec::new();
            for g in [1i64, -1] {
                let v = match word_v_int(*sigma, n, g, p) {
                    Some(v) => v,
                    None => v_p_adaptive(p, |m| Ok(bs.modpow(&bn, m) - g))?,
                };
                let x = int_mod(((int_pow_mod(*sigma, n, ell) + ell - int_mod(g, ell)) % ell) as i64 * sign, ell);
                let k = strip_p(x, p, v, ell);
                out.push(match kernel {
                    GenericJKernel::Squared => (k as u128 * x as u128 % ell as u128) as u64,
                    GenericJKernel::Unsquared => k,
                });
            }
            out
        }
        DynAffineMap::LattesOrdinary { sigma, ctx, gammas } => {
            let mut out = Vec::new();
            let (m, u) = word_context(ctx);
            let (pm, pl) = (quad_pow_mod(sigma, n, m), quad_pow_mod(sigma, n, ell));
            for g in gammas {
                let v = match word_v_frak(&pm, g, m, u, p) {
                    Some(v) => v,
                    None => v_frak_p_pow_minus(sigma, n, g, ctx)?,
                };
                let x = quad_norm_mod(&pl, g, ell);
                out.push(strip_p(x, p, v, ell));
            }
            out
        }
        DynAffineMap::LattesSupersingular(SupersingularSigma::Pair { sigma, gammas, .. }) => {
            let (m, _) = word_modulus(p);
            let (pm, pl) = (quad_pow_mod(sigma, n, m), quad_pow_mod(sigma, n, ell));
            let mut out = Vec::new();
            for g in gammas {
                let r = quad_norm_mod(&pm, g, m);
                let v = if r != 0 { v_p_u64(r, p) } else { v_p_adaptive(p, |m| Ok(pow_mod_elem(sigma, n, m).sub(g).norm()))? };
                let x = quad_norm_mod(&pl, g, ell);
                out.push(strip_p(x, p, v, ell));
            }
            out
        }
        DynAffineMap::LattesSupersingular(SupersingularSigma::Quaternion { sigma, gammas }) => {
            let w = WordQuat::new(sigma.order());
            let (m, _) = word_modulus(p);
            let (pm, pl) = (w.pow(sigma, n, m), w.pow(sigma, n, ell));
            let mut out = Vec::new();
            for g in gammas {
                let r = w.norm_minus(&pm, g, m);
                let v = if r != 0 { v_p_u64(r, p) } else { v_p_adaptive(p, |m| Ok(pow_mod_elem(sigma, n, m).sub(g).norm()))? };
                out.push(strip_p(w.norm_minus(&pl, g, ell), p, v, ell));
            }
            out
        }
    })
}

/// Quaternion arithmetic on basis coordinates modulo a word-sized `m`.
struct WordQuat {
    mult: [[[i64; 4]; 4]; 4],
    form: [[i64; 4]; 4],
}

impl WordQuat {
    fn new(order: QuatOrder) -> WordQuat {
        let (mult, form) = basis_tables(order);
        WordQuat { mult, form }
    }

    fn coords(x: &QuatElem, m: u64) -> [u64; 4] {
        std::array::from_fn(|i| big_mod(&x.basis_coords()[i], m))
    }

    fn mul(&self, x: &[u64; 4], y: &[u64; 4], m: u64) -> [u64; 4] {
        let mut r = [0u64; 4];
        for i in 0..4 {
            for j in 0..4 {
                let xy = mulm(x[i], y[j], m);
                for (k, rk) in r.iter_mut().enumerate() {
                    let c = self.mult[i][j][k];
                    if c != 0 {
                        *rk = (*rk + mulm(xy, int_mod(c, m), m)) % m;
                    }
                }
            }
        }
        r
    }

    fn pow(&self, x: &QuatElem, mut n: u64, m: u64) -> [u64; 4] {
        let mut acc = Self::coords(&x.order().int(1), m);
        let mut base = Self::coords(x, m);
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(&acc, &base, m);
            }
            base = self.mul(&base, &base, m);
            n >>= 1;
        }
        acc
    }

    /// `N(x - g) mod m`.
    fn norm_minus(&self, x: &[u64; 4], g: &QuatElem, m: u64) -> u64 {
        let gc = Self::coords(g, m);
        let d: [u64; 4] = std::array::from_fn(|i| (x[i] + m - gc[i]) % m);
        let mut acc = 0;
        for i in 0..4 {
            for j in i..4 {
                let c = self.form[i][j];
                if c != 0 {
                    acc = (acc + mulm(mulm(d[i], d[j], m), int_mod(c, m), m)) % m;
                }
            }
        }
        acc
    }
}

/// Largest `p^k` below `2^62`, and `k`.
fn word_modulus(p: u64) -> (u64, u32) {
    let (mut m, mut k) = (1u64, 0u32);
    while m < (1 << 62) / p {
        m *= p;
        k += 1;
    }
    (m, k)
}

fn mulm(a: u64, b: u64, m: u64) -> u64 {
    (a as u128 * b as u128 % m as u128) as u64
}

fn int_mod(x: i64, m: u64) -> u64 {
    x.rem_euclid(m as i64) as u64
}

fn big_mod(x: &BigInt, m: u64) -> u64 {
    mod_u64(x, m)
}

/// `v_p(d^n - g)` from residues mod a word-sized power of `p`; `None` when
/// the residue vanishes there.
fn word_v_int(d: i64, n: u64, g: i64, p: u64) -> Option<u64> {
    let (m, _) = word_modulus(p);
    let r = (int_pow_mod(d, n, m) + m - int_mod(g, m)) % m;
    (r != 0).then(|| v_p_u64(r, p))
}

fn int_pow_mod(d: i64, mut n: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    let mut base = int_mod(d, m);
    while n > 0 {
        if n & 1 == 1 {
            acc = mulm(acc, base, m);
        }
        base = mulm(base, base, m);
        n >>= 1;
    }
    acc
}

/// Coordinates of `x^n` in `Z[tau] / m`.
fn quad_pow_mod(x: &QuadElem, mut n: u64, m: u64) -> (u64, u64) {
    let r = x.ring();
    let (t, nn) = (int_mod(r.t, m), int_mod(r.n, m));
    let mul = |(a, b): (u64, u64), (c, d): (u64, u64)| {
        let bd = mulm(b, d, m);
        let re = (mulm(a, c, m) + m - mulm(bd, nn, m)) % m;
        let im = ((mulm(a, d, m) + mulm(b, c, m)) % m + mulm(bd, t, m)) % m;
        (re, im)
    };
    let mut acc = (1 % m, 0);
    let mut base = (big_mod(x.a(), m), big_mod(x.b(), m));
    while n > 0 {
        if n & 1 == 1 {
            acc = mul(acc, base);
        }
        base = mul(base, base);
        n >>= 1;
    }
    acc
}

/// `N(x - g) mod m` for `x` given by coordinates mod `m`.
fn quad_norm_mod(x: &(u64, u64), g: &QuadElem, m: u64) -> u64 {
    let r = g.ring();
    let a = (x.0 + m - big_mod(g.a(), m)) % m;
    let b = (x.1 + m - big_mod(g.b(), m)) % m;
    (mulm(a, a, m) + mulm(mulm(int_mod(r.t, m), a, m), b, m) + mulm(mulm(int_mod(r.n, m), b, m), b, m)) % m
}

/// A word-sized modulus `p^k`, `k` within the context's precision, and the
/// unit root reduced to it.
fn word_context(ctx: &PrimeContext) -> (u64, u64) {
    let p = ctx.p();
    let (mut m, mut k) = word_modulus(p);
    while k > ctx.precision() {
        m /= p;
        k -= 1;
    }
    (m, big_mod(ctx.unit_root(), m))
}

/// `v_P(x - gamma)` for `x` known mod `m`, when the residues settle it.
fn word_v_frak(x: &(u64, u64), gamma: &QuadElem, m: u64, u: u64, p: u64) -> Option<u64> {
    let nm = quad_norm_mod(x, gamma, m);
    let um = ((x.0 + m - big_mod(gamma.a(), m)) % m + mulm((x.1 + m - big_mod(gamma.b(), m)) % m, u, m)) % m;
    (nm != 0 && um != 0).then(|| v_p_u64(nm, p) - v_p_u64(um, p))
}

fn pow_mod_big(b: u64, e: u128, m: u64) -> u64 {
    BigUint::from(b).modpow(&BigUint::from(e), &BigUint::from(m)).to_u64().unwrap()
}

/// Chebyshev polynomial `T_d` with `T_d(x + 1/x) = x^d + x^(-d)`.
pub fn chebyshev_poly(ctx: &Ctx, d: u64) -> Poly {
    let x = Poly::x(ctx);
    let (mut a, mut b) = (Poly::constant(ctx, ctx.from_int(2)), x.clone());
    if d == 0 {
        return a;
    }
    for _ in 1..d {
        let c = x.mul(&b).sub(&a);
        a = b;
        b = c;
    }
    b
}

/// The subadditive map `f` with `psi(x)^d = f(x^d)`: writing
/// `psi(x) = x g(x^d)` gives `f(y) = y g(y)^d`.
pub fn subadditive_poly(sigma: &TwistedPoly, d: u64) -> Result<Poly> {
    let f = sigma.ctx();
    let psi = additive_poly(sigma)?;
    let d = d as usize;
    let mut g = vec![0u64; psi.deg0() / d + 1];
    for (e, &c) in psi.coeffs().iter().enumerate() {
        if c == 0 {
            continue;
        }
        if e % d != 1 {
            return Err(Error::SubadditiveConditionViolated(format!("x^{e} is not 1 mod {d}")));
        }
        g[(e - 1) / d] = c;
    }
    let g = Poly::from_coeffs(f, g);
    Ok(Poly::x(f).mul(&g.pow(d as u64)))
}

/// A concrete rational map for the families that have one without a curve.
pub fn realize(map: &DynAffineMap) -> Result<RatMap> {
    match map {
        DynAffineMap::Power { p, d } => {
            let f = FieldCtx::prime(*p)?;
            let k = d.unsigned_abs();
            crate::scale::check_degree("power map degree", k)?;
            let mono = Poly::monomial(&f, 1, k as usize);
            if *d > 0 {
                RatMap::polynomial(mono)
            } else {
                RatMap::new(Poly::one(&f), mono)
            }
        }
        DynAffineMap::Chebyshev { p, d } => {
            let f = FieldCtx::prime(*p)?;
            crate::scale::check_degree("Chebyshev degree", d.unsigned_abs())?;
            RatMap::polynomial(chebyshev_poly(&f, d.unsigned_abs()))
        }
        DynAffineMap::Additive { sigma, translation } => {
            let psi = additive_poly(sigma)?;
            let t = translation.as_finite().ok_or_else(|| Error::NotRealizable("translation is not in a finite field".into()))?;
            RatMap::polynomial(psi.add(&Poly::constant(sigma.ctx(), t)))
        }
        DynAffineMap::Subadditive { sigma, d } => RatMap::polynomial(subadditive_poly(sigma, *d)?),
        DynAffineMap::LattesGenericJ { .. } => {
            Err(Error::NotRealizable("a generic-j Lattès map needs a curve; use realize_on_curve".into()))
        }
        DynAffineMap::LattesOrdinary { .. } | DynAffineMap::LattesSupersingular(_) => {
            Err(Error::NotRealizable("Lattès maps with sigma outside Z are not realized".into()))
        }
    }
}

/// The Lattès map of `[sigma]` on `e`, for integer `sigma` with `|sigma| <= 5`.
pub fn realize_on_curve(map: &DynAffineMap, e: &EllipticCurve) -> Result<RatMap> {
    match map {
        DynAffineMap::LattesGenericJ { p, sigma, .. } if *p == e.p() => lattes_realize(e, sigma.unsigned_abs()),
        DynAffineMap::LattesGenericJ { .. } => Err(Error::InvalidCombination("curve is over a different prime".into())),
        _ => Err(Error::NotRealizable("only integer sigma is realized on a curve".into())),
    }
}

/// Multiplicative order of `sigma`'s constant term; `None` when it is
/// transcendental.
pub fn constant_term_order(sigma: &TwistedPoly) -> Result<Option<u64>> {
    Ok(match constant_order(sigma)? {
        ConstantOrder::Finite(m) => Some(m),
        ConstantOrder::Transcendental => None,
    })
}

fn field_name(ctx: &Ctx) -> String {
    match (ctx.is_finite(), ctx.k()) {
        (false, _) => format!("F_{}(u)", ctx.p()),
        (true, 1) => format!("F_{}", ctx.p()),
        (true, _) => format!("F_{}", ctx.q()),
    }
}

impl std::fmt::Display for DynAffineMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DynAffineMap::Power { p, d } => write!(f, "x^{d} over F_{p}"),
            DynAffineMap::Chebyshev { p, d } => write!(f, "T_{} over F_{p}", d.unsigned_abs()),
            DynAffineMap::Additive { sigma, .. } => write!(f, "additive {sigma} over {}", field_name(sigma.ctx())),
            DynAffineMap::Subadditive { sigma, d } => write!(f, "subadditive {sigma}, d = {d}, over {}", field_name(sigma.ctx())),
            DynAffineMap::LattesGenericJ { p, sigma, .. } => write!(f, "Lattès [{sigma}] over F_{p}"),
            DynAffineMap::LattesOrdinary { sigma, ctx, .. } => write!(f, "Lattès {sigma:?} at p = {}", ctx.p()),
            DynAffineMap::LattesSupersingular(SupersingularSigma::Pair { p, sigma, .. }) => write!(f, "Lattès {sigma:?} at p = {p}"),
            DynAffineMap::LattesSupersingular(SupersingularSigma::Quaternion { sigma, .. }) => write!(f, "Lattès {sigma:?}"),
        }
    }
}
