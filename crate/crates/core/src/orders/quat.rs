use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;

use super::{v_p_big, OrderElem};
use crate::error::{Error, Result};

/// The two maximal orders used for supersingular curves with `j = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuatOrder {
    /// Hurwitz quaternions in `(-1,-1 / Q)`, basis `(1+i+j+k)/2, i, j, k`.
    Hurwitz,
    /// The order `Z + Z i + Z (1+j)/2 + Z (i+k)/2` in `(-1,-3 / Q)`.
    Order3,
}

impl QuatOrder {
    /// The prime at which the algebra ramifies.
    pub fn p(self) -> u64 {
        match self {
            QuatOrder::Hurwitz => 2,
            QuatOrder::Order3 => 3,
        }
    }

    pub fn for_prime(p: u64) -> Result<QuatOrder> {
        match p {
            2 => Ok(QuatOrder::Hurwitz),
            3 => Ok(QuatOrder::Order3),
            _ => Err(Error::InvalidCombination(format!("no explicit quaternion order for p = {p}"))),
        }
    }

    /// `(a, b)` with `i^2 = a`, `j^2 = b`.
    fn params(self) -> (i64, i64) {
        match self {
            QuatOrder::Hurwitz => (-1, -1),
            QuatOrder::Order3 => (-1, -3),
        }
    }

    /// Doubled coordinates `X` (element `= (X0 + X1 i + X2 j + X3 k)/2`) lie in the order.
    pub fn contains_doubled(self, x: &[BigInt; 4]) -> bool {
        let par: Vec<bool> = x.iter().map(|c| c.is_odd()).collect();
        match self {
            QuatOrder::Hurwitz => par.iter().all(|&b| b == par[0]),
            QuatOrder::Order3 => par[0] == par[2] && par[1] == par[3],
        }
    }

    pub fn int(self, n: i64) -> QuatElem {
        QuatElem::from_doubled(self, [2 * n, 0, 0, 0].map(BigInt::from)).unwrap()
    }

    /// Element with rational coordinates `(x0 + x1 i + x2 j + x3 k) / 2`.
    pub fn half(self, x: [i64; 4]) -> Result<QuatElem> {
        QuatElem::from_doubled(self, x.map(BigInt::from))
    }

    /// The unit group of the order.
    pub fn units(self) -> Vec<QuatElem> {
        let mut out = Vec::new();
        for x0 in -2..=2i64 {
            for x1 in -2..=2i64 {
                for x2 in -2..=2i64 {
                    for x3 in -2..=2i64 {
                        if let Ok(u) = self.half([x0, x1, x2, x3]) {
                            if u.norm() == BigInt::from(1) {
                                out.push(u);
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// An element of one of the two explicit orders, stored by its integer
/// coordinates in the order's Z-basis.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuatElem {
    order: QuatOrder,
    c: [BigInt; 4],
}

impl fmt::Debug for QuatElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let x = self.doubled();
        write!(f, "({} + {}i + {}j + {}k)/2", x[0], x[1], x[2], x[3])
    }
}

impl QuatElem {
    pub fn from_doubled(order: QuatOrder, x: [BigInt; 4]) -> Result<QuatElem> {
        if !order.contains_doubled(&x) {
            return Err(Error::InvalidInput(format!("{x:?}/2 is not in the {order:?} order")));
        }
        let [x0, x1, x2, x3] = x;
        let c = match order {
            QuatOrder::Hurwitz => {
                let c1 = (&x1 - &x0) / 2;
                let c2 = (&x2 - &x0) / 2;
                let c3 = (&x3 - &x0) / 2;
                [x0, c1, c2, c3]
            }
            QuatOrder::Order3 => [(&x0 - &x2) / 2, (&x1 - &x3) / 2, x2, x3],
        };
        Ok(QuatElem { order, c })
    }

    pub fn order(&self) -> QuatOrder {
        self.order
    }

    pub fn basis_coords(&self) -> &[BigInt; 4] {
        &self.c
    }

    /// Coordinates doubled over `1, i, j, k`.
    pub fn doubled(&self) -> [BigInt; 4] {
        let c = &self.c;
        match self.order {
            QuatOrder::Hurwitz => [
                c[0].clone(),
                &c[0] + &c[1] * 2,
                &c[0] + &c[2] * 2,
                &c[0] + &c[3] * 2,
            ],
            QuatOrder::Order3 => [&c[0] * 2 + &c[2], &c[1] * 2 + &c[3], c[2].clone(), c[3].clone()],
        }
    }

    fn from_doubled_unchecked(order: QuatOrder, x: [BigInt; 4]) -> QuatElem {
        QuatElem::from_doubled(order, x).expect("order is closed under the operation")
    }
}

/// Multiplication and norm in basis coordinates: `e_i e_j = sum_k
/// mult[i][j][k] e_k` and `N(sum c_i e_i) = sum_(i <= j) form[i][j] c_i c_j`.
pub fn basis_tables(order: QuatOrder) -> ([[[i64; 4]; 4]; 4], [[i64; 4]; 4]) {
    let e = |i: usize| {
        let mut c: [BigInt; 4] = Default::default();
        c[i] = BigInt::from(1);
        QuatElem { order, c }
    };
    let small = |x: &BigInt| -> i64 { x.try_into().expect("structure constant fits i64") };
    let mut mult = [[[0i64; 4]; 4]; 4];
    let mut form = [[0i64; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let prod = e(i).mul(&e(j));
            for k in 0..4 {
                mult[i][j][k] = small(&prod.c[k]);
            }
        }
        form[i][i] = small(&e(i).norm());
    }
    for i in 0..4 {
        for j in i + 1..4 {
            form[i][j] = small(&e(i).add(&e(j)).norm()) - form[i][i] - form[j][j];
        }
    }
    (mult, form)
}

/// `v_I(x) = v_p(N(x))` for the maximal two-sided ideal above `p`.
pub fn v_i(x: &QuatElem) -> Result<u64> {
    v_p_big(&x.norm(), x.order.p())
}

impl OrderElem for QuatElem {
    fn int_like(&self, n: i64) -> QuatElem {
        self.order.int(n)
    }

    fn add(&self, o: &QuatElem) -> QuatElem {
        let c = std::array::from_fn(|i| &self.c[i] + &o.c[i]);
        QuatElem { order: self.order, c }
    }

    fn sub(&self, o: &QuatElem) -> QuatElem {
        let c = std::array::from_fn(|i| &self.c[i] - &o.c[i]);
        QuatElem { order: self.order, c }
    }

    fn mul(&self, o: &QuatElem) -> QuatElem {
        let (a, b) = self.order.params();
        let [x0, x1, x2, x3] = self.doubled();
        let [y0, y1, y2, y3] = o.doubled();
        let ab = a * b;
        let r = [
            &x0 * &y0 + &x1 * &y1 * a + &x2 * &y2 * b - &x3 * &y3 * ab,
            &x0 * &y1 + &x1 * &y0 - &x2 * &y3 * b + &x3 * &y2 * b,
            &x0 * &y2 + &x2 * &y0 + &x1 * &y3 * a - &x3 * &y1 * a,
            &x0 * &y3 + &x3 * &y0 + &x1 * &y2 - &x2 * &y1,
        ];
        // (X/2)(Y/2) = r/4, so the doubled coordinates are r/2
        let d = r.map(|v| {
            debug_assert!(v.is_even());
            v / 2
        });
        QuatElem::from_doubled_unchecked(self.order, d)
    }

    fn conj(&self) -> QuatElem {
        let [x0, x1, x2, x3] = self.doubled();
        QuatElem::from_doubled_unchecked(self.order, [x0, -x1, -x2, -x3])
    }

    fn norm(&self) -> BigInt {
        let (a, b) = self.order.params();
        let [x0, x1, x2, x3] = self.doubled();
        let four = &x0 * &x0 - &x1 * &x1 * a - &x2 * &x2 * b + &x3 * &x3 * (a * b);
        debug_assert!((&four % BigInt::from(4)).is_zero());
        four / 4
    }

    fn trace(&self) -> BigInt {
        self.doubled()[0].clone()
    }

    fn reduce(&self, m: &BigInt) -> QuatElem {
        QuatElem { order: self.order, c: self.c.clone().map(|v| v.mod_floor(m)) }
    }

    fn is_zero(&self) -> bool {
        self.c.iter().all(|v| v.is_zero())
    }
}

/// Lifting the exponent at `I`: `v_I(x^n - y^n) = v_I(x - y) + 2 v_p(n)`,
/// for commuting `x`, `y`.
pub fn lte_quat(x: &QuatElem, y: &QuatElem, n: u64) -> Result<u64> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    let p = x.order.p();
    if v_i(x)? != 0 || v_i(y)? != 0 {
        return Err(Error::HypothesisViolated("x or y lies in I".into()));
    }
    if x.mul(y) != y.mul(x) {
        return Err(Error::HypothesisViolated("x and y do not commute".into()));
    }
    let d = x.sub(y);
    if d.is_zero() {
        return Err(Error::HypothesisViolated("x = y".into()));
    }
    let v = v_i(&d)?;
    let need = match p {
        2 => 3,
        3 => 2,
        _ => 1,
    };
    if v < need {
        return Err(Error::HypothesisViolated(format!("v_I(x - y) = {v} < {need}")));
    }
    let formula = v + 2 * super::v_p_u64(n, p);
    if n <= 64 {
        let direct = v_i(&x.pow(n).sub(&y.pow(n)))?;
        if direct != formula {
            return Err(Error::Mismatch(format!("lte_quat: formula {formula}, direct {direct}")));
        }
    }
    Ok(formula)
}
