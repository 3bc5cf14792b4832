//! Short Weierstrass curves `y^2 = x^3 + Ax + B` over prime fields with
//! `p >= 5`, enumerated over small extensions for the Lattès oracle.

use crate::dynmap::RatMap;
use crate::error::{Error, Result};
use crate::field::{field_make, Ctx, FieldCtx, Poly, SmallField};
use crate::scale;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EllipticCurve {
    ctx: Ctx,
    a: u64,
    b: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CurvePoint {
    Infinity,
    Affine { x: u64, y: u64 },
}

impl EllipticCurve {
    pub fn new(p: u64, a: i64, b: i64) -> Result<EllipticCurve> {
        let ctx = FieldCtx::prime(p)?;
        if p < 5 {
            return Err(Error::InvalidInput(format!("curves need p >= 5, got {p}")));
        }
        let (a, b) = (ctx.from_int(a), ctx.from_int(b));
        let e = EllipticCurve { ctx, a, b };
        if e.discriminant() == 0 {
            return Err(Error::InvalidInput("singular curve: 4A^3 + 27B^2 = 0".into()));
        }
        Ok(e)
    }

    pub fn p(&self) -> u64 {
        self.ctx.p()
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn a(&self) -> u64 {
        self.a
    }

    pub fn b(&self) -> u64 {
        self.b
    }

    /// `4A^3 + 27B^2`.
    pub fn discriminant(&self) -> u64 {
        let f = &self.ctx;
        let a3 = f.mul(4, f.pow(self.a, 3));
        f.add(a3, f.mul(f.from_int(27), f.mul(self.b, self.b)))
    }

    pub fn j_invariant(&self) -> u64 {
        let f = &self.ctx;
        let a3 = f.mul(4, f.pow(self.a, 3));
        f.mul(f.from_int(1728), f.mul(a3, f.inv(self.discriminant()).unwrap()))
    }

    /// The curve over `F_{p^k}` with table arithmetic.
    pub fn over(&self, k: usize) -> Result<CurveField> {
        let size = (self.p() as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
        scale::check_enumeration("curve field size", size)?;
        let ext = field_make(self.p(), k, None)?;
        Ok(CurveField { curve: self.clone(), sf: SmallField::new(&ext)?, k })
    }

    /// `a_p = p + 1 - #E(F_p)`.
    pub fn trace(&self) -> Result<i64> {
        Ok(self.p() as i64 + 1 - point_count(self, 1)? as i64)
    }

    pub fn is_supersingular(&self) -> Result<bool> {
        Ok(self.trace()?.rem_euclid(self.p() as i64) == 0)
    }

    /// The cubic `x^3 + Ax + B`.
    pub fn rhs(&self) -> Poly {
        Poly::from_coeffs(&self.ctx, vec![self.b, self.a, 0, 1])
    }
}

/// A curve together with the field `F_{p^k}` its points live in.
#[derive(Debug, Clone)]
pub struct CurveField {
    curve: EllipticCurve,
    sf: SmallField,
    k: usize,
}

impl CurveField {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn field(&self) -> &SmallField {
        &self.sf
    }

    fn rhs(&self, x: u64) -> u64 {
        let f = &self.sf;
        f.add(f.mul(f.add(f.mul(x, x), self.curve.a), x), self.curve.b)
    }

    pub fn contains(&self, pt: &CurvePoint) -> bool {
        match *pt {
            CurvePoint::Infinity => true,
            CurvePoint::Affine { x, y } => self.sf.mul(y, y) == self.rhs(x),
        }
    }

    pub fn neg(&self, pt: &CurvePoint) -> CurvePoint {
        match *pt {
            CurvePoint::Infinity => CurvePoint::Infinity,
            CurvePoint::Affine { x, y } => CurvePoint::Affine { x, y: self.sf.neg(y) },
        }
    }

    pub fn add(&self, p1: &CurvePoint, p2: &CurvePoint) -> CurvePoint {
        let f = &self.sf;
        let (x1, y1, x2, y2) = match (*p1, *p2) {
            (CurvePoint::Infinity, q) | (q, CurvePoint::Infinity) => return q,
            (CurvePoint::Affine { x: a, y: b }, CurvePoint::Affine { x: c, y: d }) => (a, b, c, d),
        };
        let lambda = if x1 == x2 {
            if f.add(y1, y2) == 0 {
                return CurvePoint::Infinity;
            }
            let num = f.add(f.mul(3, f.mul(x1, x1)), self.curve.a);
            f.mul(num, f.inv(f.mul(2, y1)))
        } else {
            f.mul(f.sub(y2, y1), f.inv(f.sub(x2, x1)))
        };
        let x3 = f.sub(f.sub(f.mul(lambda, lambda), x1), x2);
        let y3 = f.sub(f.mul(lambda, f.sub(x1, x3)), y1);
        CurvePoint::Affine { x: x3, y: y3 }
    }

    /// `[m] P` by double-and-add.
    pub fn mul(&self, pt: &CurvePoint, m: i64) -> CurvePoint {
        let mut acc = CurvePoint::Infinity;
        let mut base = if m < 0 { self.neg(pt) } else { *pt };
        let mut e = m.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.add(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.add(&base, &base);
            }
        }
        acc
    }

    /// Every point of `E(F_{p^k})`, identity first.
    pub fn points(&self) -> Vec<CurvePoint> {
        let mut out = vec![CurvePoint::Infinity];
        for x in 0..self.sf.q() {
            if let Some(y) = self.sf.sqrt(self.rhs(x)) {
                out.push(CurvePoint::Affine { x, y });
                if y != 0 {
                    out.push(CurvePoint::Affine { x, y: self.sf.neg(y) });
                }
            }
        }
        out
    }

    /// Order of a point by repeated addition.
    pub fn order(&self, pt: &CurvePoint) -> u64 {
        let mut q = *pt;
        let mut k = 1;
        while q != CurvePoint::Infinity {
            q = self.add(&q, pt);
            k += 1;
        }
        k
    }
}

/// `#E(F_{p^k})` by x-enumeration and quadratic-residue tests.
pub fn point_count(e: &EllipticCurve, k: usize) -> Result<u64> {
    let c = e.over(k)?;
    let mut n = 1;
    for x in 0..c.sf.q() {
        let r = c.rhs(x);
        if r == 0 {
            n += 1;
        } else if c.sf.sqrt(r).is_some() {
            n += 2;
        }
    }
    Ok(n)
}

/// Size of `E[N]` found over some `F_{p^k}`, `k <= k_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TorsionCount {
    pub count: u64,
    /// Extension degree at which the count was taken.
    pub k: usize,
    pub complete: bool,
}

/// Counts points killed by `[N]`, walking extensions `F_{p^k}` for
/// `k = 1..=k_max` inside the enumeration cap.
///
/// With `N = p^v N'`, `#E[N]` is at most `N'^2 p^v` (ordinary) or `N'^2`
/// (supersingular). The count is complete once it reaches that ceiling.
/// Extensions whose point count the ceiling does not divide are skipped.
pub fn torsion_count(e: &EllipticCurve, n: u64, k_max: usize) -> Result<TorsionCount> {
    if n == 0 || k_max == 0 {
        return Err(Error::InvalidInput("N and k_max must be positive".into()));
    }
    if n > 50 {
        return Err(Error::ScaleExceeded { what: "torsion order", value: n as u128, limit: 50 });
    }
    let p = e.p();
    let (mut m, mut pp) = (n, 1);
    while m % p == 0 {
        m /= p;
        pp *= p;
    }
    let ceiling = m * m * if e.is_supersingular()? { 1 } else { pp };
    let mut best = TorsionCount { count: 1, k: 1, complete: n == 1 };
    if n == 1 {
        return Ok(best);
    }
    for k in 1..=k_max {
        let size = (p as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
        if size > scale::max_enumeration() as u128 {
            break;
        }
        if point_count(e, k)? % ceiling != 0 {
            continue;
        }
        let c = e.over(k)?;
        let count = c.points().iter().filter(|pt| c.mul(pt, n as i64) == CurvePoint::Infinity).count() as u64;
        if count >= best.count {
            best = TorsionCount { count, k, complete: count == ceiling };
        }
        if best.complete {
            break;
        }
    }
    Ok(best)
}

/// `#Per_n` of the Lattès map of `[m]` with `Gamma = {+-1}`:
/// `(#E[m^n - 1] + #E[m^n + 1]) / 2`.
pub fn lattes_oracle(e: &EllipticCurve, m: u64, n: u32, k_max: usize) -> Result<u64> {
    if m < 2 {
        return Err(Error::InvalidInput("m must be at least 2".into()));
    }
    let mn = m.checked_pow(n).filter(|&x| x < 50).ok_or(Error::ScaleExceeded {
        what: "torsion order m^n + 1",
        value: (m as u128).saturating_pow(n),
        limit: 50,
    })?;
    let mut total = 0;
    for big_n in [mn - 1, mn + 1] {
        let t = torsion_count(e, big_n, k_max)?;
        if !t.complete {
            return Err(Error::Incomplete(format!("E[{big_n}] over F_{}^{}: {} points", e.p(), t.k, t.count)));
        }
        total += t.count;
    }
    if total % 2 != 0 {
        return Err(Error::NonIntegerOrbitCount { num: total.to_string(), den: 2 });
    }
    Ok(total / 2)
}

/// `psi_m = g(x) * y^(odd)`, with `y^2` rewritten as the cubic.
#[derive(Clone)]
struct DivPoly {
    g: Poly,
    y: bool,
}

impl DivPoly {
    fn mul(&self, o: &DivPoly, cubic: &Poly) -> DivPoly {
        let g = self.g.mul(&o.g);
        if self.y && o.y {
            DivPoly { g: g.mul(cubic), y: false }
        } else {
            DivPoly { g, y: self.y || o.y }
        }
    }

    fn sub(&self, o: &DivPoly) -> DivPoly {
        debug_assert!(self.y == o.y || o.g.is_zero() || self.g.is_zero());
        DivPoly { g: self.g.sub(&o.g), y: self.y || o.y }
    }
}

fn division_polynomials(e: &EllipticCurve, upto: usize) -> Result<Vec<DivPoly>> {
    let f = &e.ctx;
    let (a, b) = (e.a as i64, e.b as i64);
    let cubic = e.rhs();
    let c = |v: &[i64]| Poly::from_ints(f, v);
    let mut psi = vec![
        DivPoly { g: Poly::zero(f), y: false },
        DivPoly { g: c(&[1]), y: false },
        DivPoly { g: c(&[2]), y: true },
        DivPoly { g: c(&[-a * a, 12 * b, 6 * a, 0, 3]), y: false },
        DivPoly { g: c(&[-8 * b * b - a * a * a, -4 * a * b, -5 * a * a, 20 * b, 5 * a, 0, 1]).scale(4), y: true },
    ];
    let half_y = f.inv(2)?;
    for m in 5..=upto {
        let k = m / 2;
        let next = if m % 2 == 1 {
            // psi_{2k+1} = psi_{k+2} psi_k^3 - psi_{k-1} psi_{k+1}^3
            let t1 = psi[k + 2].mul(&psi[k], &cubic).mul(&psi[k], &cubic).mul(&psi[k], &cubic);
            let t2 = psi[k - 1].mul(&psi[k + 1], &cubic).mul(&psi[k + 1], &cubic).mul(&psi[k + 1], &cubic);
            t1.sub(&t2)
        } else {
            // psi_{2k} = psi_k (psi_{k+2} psi_{k-1}^2 - psi_{k-2} psi_{k+1}^2) / (2y)
            let t1 = psi[k + 2].mul(&psi[k - 1], &cubic).mul(&psi[k - 1], &cubic);
            let t2 = psi[k - 2].mul(&psi[k + 1], &cubic).mul(&psi[k + 1], &cubic);
            let mut r = psi[k].mul(&t1.sub(&t2), &cubic);
            // divide by 2y: strip one y, or turn y^0 into y^-1 = y / cubic
            r = if r.y {
                DivPoly { g: r.g.scale(half_y), y: false }
            } else {
                DivPoly { g: r.g.div_exact(&cubic)?.scale(half_y), y: true }
            };
            r
        };
        psi.push(next);
    }
    psi.truncate(upto + 1);
    Ok(psi)
}

/// The degree-`m^2` map `x(P) -> x([m]P)`, `x - psi_{m-1} psi_{m+1} / psi_m^2`.
pub fn lattes_realize(e: &EllipticCurve, m: u64) -> Result<RatMap> {
    if !(2..=5).contains(&m) {
        return Err(Error::ScaleExceeded { what: "Lattès multiplier", value: m as u128, limit: 5 });
    }
    let m = m as usize;
    let psi = division_polynomials(e, m + 1)?;
    let cubic = e.rhs();
    let sq = psi[m].mul(&psi[m], &cubic);
    let cross = psi[m - 1].mul(&psi[m + 1], &cubic);
    debug_assert!(!sq.y && !cross.y);
    let x = Poly::x(&e.ctx);
    let num = x.mul(&sq.g).sub(&cross.g);
    RatMap::new(num, sq.g)
}
