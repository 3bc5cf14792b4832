use std::fmt;

use super::{FieldCtx, Poly};

/// Element of `F_p(u)`: a reduced fraction with monic denominator.
#[derive(Clone, PartialEq, Eq)]
pub struct RatFn {
    num: Poly,
    den: Poly,
}

impl fmt::Debug for RatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?})/({:?})", self.num.coeffs(), self.den.coeffs())
    }
}

/// Ascending coefficients as a polynomial in `u`.
fn show_poly(c: &[u64]) -> String {
    let terms: Vec<String> = c
        .iter()
        .enumerate()
        .filter(|(_, &a)| a != 0)
        .map(|(i, &a)| match (i, a) {
            (0, _) => a.to_string(),
            (1, 1) => "u".into(),
            (1, _) => format!("{a}u"),
            (_, 1) => format!("u^{i}"),
            _ => format!("{a}u^{i}"),
        })
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

impl fmt::Display for RatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let num = show_poly(self.num.coeffs());
        if self.den.is_constant() {
            return if self.num.coeffs().iter().filter(|&&a| a != 0).count() > 1 { write!(f, "({num})") } else { f.write_str(&num) };
        }
        write!(f, "({num})/({})", show_poly(self.den.coeffs()))
    }
}

impl RatFn {
    fn base(p: u64) -> super::Ctx {
        FieldCtx::prime(p).expect("prime characteristic")
    }

    pub fn new(num: Poly, den: Poly) -> RatFn {
        assert!(!den.is_zero(), "zero denominator");
        let g = num.gcd(&den);
        let (mut n, mut d) = if g.is_zero() || g.is_constant() {
            (num, den)
        } else {
            (num.div_exact(&g).unwrap(), den.div_exact(&g).unwrap())
        };
        if n.is_zero() {
            d = Poly::one(d.ctx());
        }
        let lc = d.lead();
        if lc != 1 {
            let inv = d.ctx().inv(lc).unwrap();
            n = n.scale(inv);
            d = d.scale(inv);
        }
        RatFn { num: n, den: d }
    }

    /// Polynomial in `u` with the given ascending integer coefficients.
    pub fn from_poly_ints(p: u64, c: &[i64]) -> RatFn {
        let ctx = Self::base(p);
        RatFn::new(Poly::from_ints(&ctx, c), Poly::one(&ctx))
    }

    pub fn zero(p: u64) -> RatFn {
        let ctx = Self::base(p);
        RatFn { num: Poly::zero(&ctx), den: Poly::one(&ctx) }
    }

    pub fn constant(p: u64, a: u64) -> RatFn {
        let ctx = Self::base(p);
        RatFn { num: Poly::constant(&ctx, a), den: Poly::one(&ctx) }
    }

    /// The transcendental generator `u`.
    pub fn u(p: u64) -> RatFn {
        Self::from_poly_ints(p, &[0, 1])
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_constant() && self.num.lead() == 1 && self.den.is_constant()
    }

    /// `Some(c)` when the element lies in the constant field `F_p`.
    pub fn constant_value(&self) -> Option<u64> {
        if self.num.is_constant() && self.den.is_constant() {
            Some(self.num.coeff(0))
        } else {
            None
        }
    }

    pub fn add(&self, o: &RatFn) -> RatFn {
        if self.den == o.den {
            return RatFn::new(self.num.add(&o.num), self.den.clone());
        }
        RatFn::new(self.num.mul(&o.den).add(&o.num.mul(&self.den)), self.den.mul(&o.den))
    }

    pub fn neg(&self) -> RatFn {
        RatFn { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, o: &RatFn) -> RatFn {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &RatFn) -> RatFn {
        RatFn::new(self.num.mul(&o.num), self.den.mul(&o.den))
    }

    pub fn inv(&self) -> Option<RatFn> {
        if self.is_zero() {
            None
        } else {
            Some(RatFn::new(self.den.clone(), self.num.clone()))
        }
    }

    pub fn pow(&self, e: u64) -> RatFn {
        RatFn::new(self.num.pow(e), self.den.pow(e))
    }

    /// `c(u)^(p^i) = c(u^(p^i))`, since constants are fixed by Frobenius.
    pub fn frobenius_iter(&self, i: usize) -> RatFn {
        let mut r = self.clone();
        for _ in 0..i {
            r = RatFn { num: r.num.frobenius_power(), den: r.den.frobenius_power() };
        }
        r
    }
}
