use affine_zeta::dynmap::per_n_oracle;
use affine_zeta::elliptic::{lattes_oracle, torsion_count, CurveField, CurvePoint, EllipticCurve};
use affine_zeta::families::*;
use affine_zeta::field::{field_make, FieldCtx, Poly};
use affine_zeta::orders::{OrderElem, PrimeContext, QuadElem, QuadRing, QuatOrder};
use affine_zeta::twisted::TwistedPoly;
use affine_zeta::Error;
use num_bigint::{BigInt, BigUint};
use num_traits::ToPrimitive;
use proptest::prelude::*;

fn closed(map: &DynAffineMap, n: u64) -> u64 {
    per_n_closed(map, n).unwrap().to_u64().unwrap()
}

fn oracle(map: &DynAffineMap, n: u32) -> u64 {
    per_n_oracle(&realize(map).unwrap(), n).unwrap()
}

fn xcubed_minus_x() -> DynAffineMap {
    let f = FieldCtx::prime(3).unwrap();
    DynAffineMap::additive(TwistedPoly::from_ints(&f, &[-1, 1]), f.el_zero()).unwrap()
}

#[test]
fn template_basics() {
    let k = |g: &u64, n: u64| Ok(BigUint::from(g * n));
    assert_eq!(per_n_template(2, &[5u64], 1, k).unwrap(), BigUint::from(7u32));
    assert_eq!(per_n_template(1, &[1u64, 3], 2, k).unwrap(), BigUint::from(5u32));
    assert!(matches!(per_n_template(0, &[1u64, 2], 1, k), Err(Error::NonIntegerOrbitCount { .. })));
    assert!(per_n_template(0, &[] as &[u64], 1, k).is_err());
}

#[test]
fn spec_examples() {
    assert_eq!(closed(&DynAffineMap::power(3, 2).unwrap(), 1), 3);
    assert_eq!(closed(&DynAffineMap::chebyshev(5, 2).unwrap(), 1), 3);
    assert_eq!(closed(&xcubed_minus_x(), 2), 4);
    assert_eq!(closed(&DynAffineMap::power(5, -3).unwrap(), 1), 4);
    // x^-2 over F_3 fixes only 1; 0 and infinity form a 2-cycle
    let m = DynAffineMap::power(3, -2).unwrap();
    assert_eq!(closed(&m, 1), 1);
    assert_eq!(oracle(&m, 1), 1);
    assert_eq!(closed(&m, 2), 3);
    assert_eq!(oracle(&m, 2), 3);
}

#[test]
fn negative_powers_follow_parity_of_n() {
    for p in [2u64, 3, 5, 7] {
        for d in [-2i64, -3, -4, -5, -6] {
            let m = DynAffineMap::power(p, d).unwrap();
            for n in 1..=4u32 {
                if (d.unsigned_abs() as u128).pow(n) > 2000 {
                    break;
                }
                assert_eq!(closed(&m, n as u64), oracle(&m, n), "p={p} d={d} n={n}");
            }
        }
    }
}

#[test]
fn additive_examples() {
    let m = xcubed_minus_x();
    let counts: Vec<u64> = (1..=6).map(|n| closed(&m, n)).collect();
    assert_eq!(counts, vec![4, 4, 28, 28, 244, 28]);
    for n in 1..=6u32 {
        assert_eq!(oracle(&m, n), counts[n as usize - 1]);
    }
    let f = FieldCtx::prime(3).unwrap();
    let shifted = DynAffineMap::additive(TwistedPoly::from_ints(&f, &[-1, 1]), f.el_int(1)).unwrap();
    for n in 1..=5u32 {
        assert_eq!(closed(&shifted, n as u64), oracle(&shifted, n));
    }
}

#[test]
fn inseparable_maps() {
    let f = FieldCtx::prime(3).unwrap();
    let phi = DynAffineMap::additive(TwistedPoly::phi(&f), f.el_zero()).unwrap();
    assert_eq!(classify_separability(&phi), Separability::Inseparable);
    assert_eq!(closed(&phi, 3), 28);
    let pw = DynAffineMap::power(5, 5).unwrap();
    assert_eq!(classify_separability(&pw), Separability::Inseparable);
    assert_eq!(classify_separability(&DynAffineMap::power(5, 6).unwrap()), Separability::Separable);
    for map in [phi, pw, DynAffineMap::power(3, -6).unwrap(), DynAffineMap::chebyshev(3, 3).unwrap()] {
        for n in 1..=3u32 {
            if map.degree().to_u64().unwrap().pow(n) <= 2000 {
                assert_eq!(closed(&map, n as u64), oracle(&map, n), "{map}");
            }
        }
    }
}

#[test]
fn construction_errors() {
    assert!(DynAffineMap::power(4, 2).is_err());
    assert!(DynAffineMap::power(3, 1).is_err());
    assert!(DynAffineMap::chebyshev(3, -1).is_err());
    let f = FieldCtx::prime(5).unwrap();
    assert!(DynAffineMap::additive(TwistedPoly::from_ints(&f, &[2]), f.el_zero()).is_err());
    // x^5 + x has a term of degree 5, not 1 mod 3
    assert!(matches!(
        DynAffineMap::subadditive(TwistedPoly::from_ints(&f, &[1, 1]), 3),
        Err(Error::SubadditiveConditionViolated(_))
    ));
    assert!(DynAffineMap::subadditive(TwistedPoly::from_ints(&f, &[1, 1]), 5).is_err());
    let g = QuadRing::gaussian();
    let ctx = PrimeContext::ordinary(g, 5, None).unwrap();
    let bad = vec![g.int(1), g.int(-1), g.elem(0, 1)];
    assert!(DynAffineMap::lattes_ordinary(g.elem(2, 1), ctx.clone(), bad).is_err());
    let not_units = vec![g.int(1), g.int(2)];
    assert!(DynAffineMap::lattes_ordinary(g.elem(2, 1), ctx, not_units).is_err());
    let pair = SupersingularSigma::Pair { p: 3, sigma: g.elem(1, 1), gammas: vec![g.int(1), g.int(-1)] };
    assert!(DynAffineMap::lattes_supersingular(pair).is_err());
}

#[test]
fn chebyshev_realization() {
    let f = FieldCtx::prime(5).unwrap();
    assert_eq!(chebyshev_poly(&f, 2), Poly::from_ints(&f, &[-2, 0, 1]));
    assert_eq!(chebyshev_poly(&f, 3), Poly::from_ints(&f, &[0, -3, 0, 1]));
}

#[test]
fn chebyshev_semiconjugacy() {
    // x^d T_d((x^2 + 1)/x) = x^(2d) + 1, checked modulo a large prime
    let f = FieldCtx::prime(1_000_003).unwrap();
    let x = Poly::x(&f);
    let x2p1 = Poly::from_ints(&f, &[1, 0, 1]);
    for d in 1..=12u64 {
        let t = chebyshev_poly(&f, d);
        let mut lhs = Poly::zero(&f);
        for (i, &c) in t.coeffs().iter().enumerate() {
            lhs = lhs.add(&x2p1.pow(i as u64).mul(&x.pow(d - i as u64)).scale(c));
        }
        assert_eq!(lhs, Poly::monomial(&f, 1, 2 * d as usize).add(&Poly::one(&f)), "d={d}");
    }
}

#[test]
fn subadditive_realization() {
    for p in [3u64, 5, 7] {
        let f = FieldCtx::prime(p).unwrap();
        let sigma = TwistedPoly::from_ints(&f, &[-1, 1]);
        let d = p - 1;
        let got = subadditive_poly(&sigma, d).unwrap();
        // x (x - 1)^(p-1)
        let expect = Poly::x(&f).mul(&Poly::from_ints(&f, &[-1, 1]).pow(d));
        assert_eq!(got, expect);
        let m = DynAffineMap::subadditive(sigma, d).unwrap();
        for n in 1..=3u32 {
            if p.pow(n) <= 400 {
                assert_eq!(closed(&m, n as u64), oracle(&m, n), "p={p} n={n}");
            }
        }
    }
    let f = FieldCtx::prime(5).unwrap();
    assert_eq!(subadditive_poly(&TwistedPoly::phi(&f), 4).unwrap(), Poly::monomial(&f, 1, 5));
}

#[test]
fn realization_errors() {
    assert!(matches!(realize(&DynAffineMap::lattes_generic_j(5, 2).unwrap()), Err(Error::NotRealizable(_))));
    let u = FieldCtx::rational_function(3).unwrap();
    let sigma = TwistedPoly::new(&u, vec![u.el_zero(), u.el_one()]);
    assert!(realize(&DynAffineMap::additive(sigma, u.el_zero()).unwrap()).is_err());
}

#[test]
fn generic_j_lattes_against_torsion() {
    for (p, a, b) in [(5u64, 1i64, 1i64), (5, 1, 4), (7, 1, 1), (7, 2, 1)] {
        let e = EllipticCurve::new(p, a, b).unwrap();
        let sq = DynAffineMap::lattes_generic_j(p, 2).unwrap();
        let un = sq.with_generic_j_kernel(GenericJKernel::Unsquared);
        for n in 1..=2u32 {
            let want = lattes_oracle(&e, 2, n, 4).unwrap();
            assert_eq!(closed(&sq, n as u64), want, "p={p} a={a} b={b} n={n}");
            assert_ne!(closed(&un, n as u64), want);
        }
        let f = realize_on_curve(&sq, &e).unwrap();
        assert_eq!(per_n_oracle(&f, 1).unwrap(), closed(&sq, 1));
    }
    assert_eq!(DEFAULT_GENERIC_J_KERNEL, GenericJKernel::Squared);
}

/// `a P + b tau(P)` where `tau` acts through `aut`.
fn apply(c: &CurveField, aut: &dyn Fn(&CurvePoint) -> CurvePoint, al: &QuadElem, pt: &CurvePoint) -> CurvePoint {
    let a = c.mul(pt, al.a().to_i64().unwrap());
    let b = c.mul(&aut(pt), al.b().to_i64().unwrap());
    c.add(&a, &b)
}

/// `#ker(alpha)` counted inside `E(F_{p^k})`, once `E[N(alpha)]` is known
/// to be there.
fn kernel_by_enumeration(e: &EllipticCurve, k_min: usize, al: &QuadElem, aut_of: &dyn Fn(&CurveField) -> Box<dyn Fn(&CurvePoint) -> CurvePoint + '_>) -> Option<u64> {
    let n = al.norm().to_u64().unwrap();
    let t = torsion_count(e, n, 8).ok()?;
    if !t.complete {
        return None;
    }
    let k = (k_min..=8).find(|k| k % t.k == 0 && k % k_min == 0)?;
    let c = e.over(k).ok()?;
    let aut = aut_of(&c);
    Some(c.points().iter().filter(|pt| apply(&c, &*aut, al, pt) == CurvePoint::Infinity).count() as u64)
}

fn gaussian_aut(c: &CurveField) -> Box<dyn Fn(&CurvePoint) -> CurvePoint + '_> {
    let sf = c.field();
    gaussian_aut_with(c, sf.sqrt(sf.neg(1)).unwrap())
}

/// `(x, y) -> (-x, iota y)`; prime-field elements keep their value in any
/// extension.
fn gaussian_aut_with(c: &CurveField, iota: u64) -> Box<dyn Fn(&CurvePoint) -> CurvePoint + '_> {
    let sf = c.field();
    Box::new(move |pt| match *pt {
        CurvePoint::Infinity => CurvePoint::Infinity,
        CurvePoint::Affine { x, y } => CurvePoint::Affine { x: sf.neg(x), y: sf.mul(iota, y) },
    })
}

fn eisenstein_aut(c: &CurveField) -> Box<dyn Fn(&CurvePoint) -> CurvePoint + '_> {
    let sf = c.field();
    let zeta = (2..sf.q()).find(|&z| sf.mul(z, sf.mul(z, z)) == 1).unwrap();
    Box::new(move |pt| match *pt {
        CurvePoint::Infinity => CurvePoint::Infinity,
        CurvePoint::Affine { x, y } => CurvePoint::Affine { x: sf.mul(zeta, x), y },
    })
}

/// The prime context whose `P` matches the action of `tau` on the invariant
/// differential: `alpha` is inseparable exactly when `a + b * c` vanishes,
/// with `c` the scalar by which `tau` scales `dx/y`.
fn matching_context(ring: QuadRing, p: u64, tau_scalar: u64) -> PrimeContext {
    // P is the prime where tau does not reduce to u, so u is the conjugate root
    let u = (ring.t.rem_euclid(p as i64) as u64 + p - tau_scalar) % p;
    PrimeContext::ordinary(ring, p, Some(u)).unwrap()
}

#[test]
fn ordinary_lattes_kernels_match_enumeration() {
    // y^2 = x^3 + x over F_5 has i: (x, y) -> (-x, iota y), scaling dx/y by iota
    let e = EllipticCurve::new(5, 1, 0).unwrap();
    assert!(!e.is_supersingular().unwrap());
    let g = QuadRing::gaussian();
    let c1 = e.over(1).unwrap();
    let iota = c1.field().sqrt(4).unwrap();
    let ctx = matching_context(g, 5, iota);
    let mut checked = 0;
    for (a, b) in [(1i64, 1i64), (2, 1), (1, 2), (2, 0), (3, 1), (0, 2), (1, -2)] {
        let al = g.elem(a, b);
        let Some(count) = kernel_by_enumeration(&e, 1, &al, &|c| gaussian_aut_with(c, iota)) else {
            continue;
        };
        let v = affine_zeta::orders::v_frak_p(&al, &ctx).unwrap();
        let want = al.norm().to_u64().unwrap() / 5u64.pow(v as u32);
        assert_eq!(count, want, "alpha = {al:?}");
        checked += 1;
    }
    assert!(checked >= 4, "{checked}");

    // y^2 = x^3 + 1 over F_7 has zeta_3: (x, y) -> (zeta x, y), scaling dx/y by zeta
    let e = EllipticCurve::new(7, 0, 1).unwrap();
    assert!(!e.is_supersingular().unwrap());
    let w = QuadRing::eisenstein();
    let zeta = 2u64;
    let ctx = matching_context(w, 7, zeta);
    let mut checked = 0;
    for (a, b) in [(1i64, 1i64), (2, 1), (1, 2), (2, 0), (3, 1), (1, -1), (2, -1)] {
        let al = w.elem(a, b);
        let Some(count) = kernel_by_enumeration(&e, 1, &al, &|c| {
            Box::new(move |pt: &CurvePoint| match *pt {
                CurvePoint::Infinity => CurvePoint::Infinity,
                CurvePoint::Affine { x, y } => CurvePoint::Affine { x: c.field().mul(zeta, x), y },
            })
        }) else {
            continue;
        };
        let v = affine_zeta::orders::v_frak_p(&al, &ctx).unwrap();
        let want = al.norm().to_u64().unwrap() / 7u64.pow(v as u32);
        assert_eq!(count, want, "alpha = {al:?}");
        checked += 1;
    }
    assert!(checked >= 4, "{checked}");
}

#[test]
fn ordinary_lattes_counts() {
    let g = QuadRing::gaussian();
    let ctx = PrimeContext::ordinary(g, 5, None).unwrap();
    let pm = vec![g.int(1), g.int(-1)];
    let two = DynAffineMap::lattes_ordinary(g.int(2), ctx.clone(), pm.clone()).unwrap();
    let e = EllipticCurve::new(5, 1, 0).unwrap();
    for n in 1..=2u32 {
        assert_eq!(closed(&two, n as u64), lattes_oracle(&e, 2, n, 8).unwrap());
    }
    let mu4 = g.units();
    let m = DynAffineMap::lattes_ordinary(g.elem(2, 1), ctx.clone(), mu4).unwrap();
    assert_eq!(classify_separability(&m), Separability::Inseparable);
    assert_eq!(closed(&m, 2), 26);
    let m = DynAffineMap::lattes_ordinary(g.elem(1, 1), ctx, pm).unwrap();
    assert_eq!(classify_separability(&m), Separability::Separable);
    // N(1+i) = 2: sigma - 1 = i and sigma + 1 = 2 + i
    let k5 = 5 / 5u64.pow(affine_zeta::orders::v_frak_p(&g.elem(2, 1), &PrimeContext::ordinary(g, 5, None).unwrap()).unwrap() as u32);
    assert_eq!(closed(&m, 1), (1 + k5) / 2);
}

#[test]
fn supersingular_lattes_counts() {
    // y^2 = x^3 + x over F_7 is supersingular with i defined over F_49
    let e = EllipticCurve::new(7, 1, 0).unwrap();
    assert!(e.is_supersingular().unwrap());
    let g = QuadRing::gaussian();
    let mut checked = 0;
    for (a, b) in [(1i64, 1i64), (2, 1), (1, 2), (2, 0), (0, 2)] {
        let al = g.elem(a, b);
        let Some(count) = kernel_by_enumeration(&e, 2, &al, &gaussian_aut) else { continue };
        let nm = al.norm().to_u64().unwrap();
        let v = affine_zeta::orders::v_p_u64(nm, 7);
        assert_eq!(count, nm / 7u64.pow(v as u32), "alpha = {al:?}");
        checked += 1;
    }
    assert!(checked >= 3);
    // E[5] needs F_(7^8), beyond the enumeration cap, so only n = 1
    let pm = vec![g.int(1), g.int(-1)];
    let m = DynAffineMap::lattes_supersingular(SupersingularSigma::Pair { p: 7, sigma: g.int(2), gammas: pm }).unwrap();
    assert_eq!(closed(&m, 1), lattes_oracle(&e, 2, 1, 7).unwrap());
    // y^2 = x^3 + 1 over F_5 is supersingular with zeta_3 over F_25
    let e = EllipticCurve::new(5, 0, 1).unwrap();
    assert!(e.is_supersingular().unwrap());
    let w = QuadRing::eisenstein();
    let mut checked = 0;
    for (a, b) in [(1i64, 1i64), (2, 1), (1, 2), (1, -1)] {
        let al = w.elem(a, b);
        let Some(count) = kernel_by_enumeration(&e, 2, &al, &eisenstein_aut) else { continue };
        let nm = al.norm().to_u64().unwrap();
        assert_eq!(count, nm / 5u64.pow(affine_zeta::orders::v_p_u64(nm, 5) as u32), "alpha = {al:?}");
        checked += 1;
    }
    assert!(checked >= 2);
    let pm = vec![w.int(1), w.int(-1)];
    let m = DynAffineMap::lattes_supersingular(SupersingularSigma::Pair { p: 5, sigma: w.int(2), gammas: pm }).unwrap();
    for n in 1..=2u32 {
        assert_eq!(closed(&m, n as u64), lattes_oracle(&e, 2, n, 8).unwrap());
    }
}

#[test]
fn quaternion_lattes_counts() {
    let h = QuatOrder::Hurwitz;
    let units = h.units();
    assert_eq!(units.len(), 24);
    let sigma = h.half([2, 2, 0, 0]).unwrap(); // 1 + i, norm 2
    let m = DynAffineMap::lattes_supersingular(SupersingularSigma::Quaternion { sigma: sigma.clone(), gammas: units.clone() }).unwrap();
    assert_eq!(classify_separability(&m), Separability::Inseparable);
    assert_eq!(closed(&m, 3), 9);
    let sigma = h.half([3, 1, 1, 1]).unwrap(); // norm 3
    let pm = vec![h.int(1), h.int(-1)];
    let m = DynAffineMap::lattes_supersingular(SupersingularSigma::Quaternion { sigma: sigma.clone(), gammas: pm }).unwrap();
    assert_eq!(classify_separability(&m), Separability::Separable);
    for n in 1..=6 {
        let sn = sigma.pow(n);
        let odd = |x: BigInt| {
            let v = affine_zeta::orders::v_p_int(&x, 2).unwrap();
            x.to_u64().unwrap() >> v
        };
        let want = (odd(sn.sub(&h.int(1)).norm()) + odd(sn.sub(&h.int(-1)).norm())) / 2;
        assert_eq!(closed(&m, n), want);
    }
    // conjugation by a norm-3 element moves the unit group off itself
    let bad = SupersingularSigma::Quaternion { sigma: sigma.clone(), gammas: units.clone() };
    assert!(matches!(DynAffineMap::lattes_supersingular(bad), Err(Error::InvalidCombination(_))));
    // sigma = 2 + w with w = (-1 + i + j + k)/2, so sigma commutes with <-w>
    let w = h.half([-1, 1, 1, 1]).unwrap();
    let mw = h.int(0).sub(&w);
    let six: Vec<_> = (0..6).map(|k| mw.pow(k)).collect();
    let m = DynAffineMap::lattes_supersingular(SupersingularSigma::Quaternion { sigma, gammas: six }).unwrap();
    let three = DynAffineMap::lattes_supersingular(SupersingularSigma::Quaternion { sigma: h.int(3), gammas: units }).unwrap();
    for n in 1..=8 {
        per_n_closed(&m, n).unwrap();
        per_n_closed(&three, n).unwrap();
    }
}

#[test]
fn big_counts_and_scale() {
    let m = DynAffineMap::power(3, 2).unwrap();
    let c = per_n_closed(&m, 60).unwrap();
    // v_3(2^60 - 1) = v_3(4 - 1) + v_3(30) = 2
    assert_eq!(c, ((BigUint::from(1u32) << 60u32) - 1u32) / 9u32 + 2u32);
    assert!(matches!(per_n_closed(&m, 1 << 21), Err(Error::ScaleExceeded { .. })));
    assert!(per_n_closed(&m, 0).is_err());
}

#[test]
fn modular_counts_match_exact() {
    let f9 = field_make(3, 2, None).unwrap();
    let f3 = FieldCtx::prime(3).unwrap();
    let g = QuadRing::gaussian();
    let maps = vec![
        DynAffineMap::power(3, 2).unwrap(),
        DynAffineMap::power(5, -3).unwrap(),
        DynAffineMap::power(2, 3).unwrap(),
        DynAffineMap::chebyshev(5, 2).unwrap(),
        DynAffineMap::chebyshev(2, 3).unwrap(),
        xcubed_minus_x(),
        DynAffineMap::additive(TwistedPoly::new(&f9, vec![f9.el_int(1), f9.el_one(), f9.el_one()]), f9.el_zero()).unwrap(),
        DynAffineMap::subadditive(TwistedPoly::from_ints(&f3, &[-1, 1]), 2).unwrap(),
        DynAffineMap::lattes_generic_j(5, 2).unwrap(),
        DynAffineMap::lattes_generic_j(5, -3).unwrap().with_generic_j_kernel(GenericJKernel::Unsquared),
        DynAffineMap::lattes_ordinary(g.elem(1, 1), PrimeContext::ordinary(g, 5, None).unwrap(), g.units()).unwrap(),
        DynAffineMap::lattes_supersingular(SupersingularSigma::Pair { p: 7, sigma: g.elem(1, 2), gammas: g.units() }).unwrap(),
        DynAffineMap::lattes_supersingular(SupersingularSigma::Quaternion {
            sigma: QuatOrder::Hurwitz.half([3, 1, 1, 1]).unwrap(),
            gammas: vec![QuatOrder::Hurwitz.int(1), QuatOrder::Hurwitz.int(-1)],
        })
        .unwrap(),
    ];
    for map in &maps {
        for ell in [7u64, 11, 13, 101] {
            if ell % map.p() == 0 {
                continue;
            }
            for n in 1..=24u64 {
                let exact = per_n_closed(map, n).unwrap() % ell;
                match per_n_closed_mod(map, n, ell) {
                    Ok(r) => assert_eq!(BigUint::from(r), exact, "{map} n={n} ell={ell}"),
                    Err(Error::InvalidInput(_)) => {}
                    Err(e) => panic!("{map}: {e}"),
                }
            }
        }
    }
}

#[test]
fn modular_counts_for_large_n() {
    let f = FieldCtx::prime(3).unwrap();
    let m = DynAffineMap::additive(TwistedPoly::from_ints(&f, &[-1, 1]), f.el_zero()).unwrap();
    // sigma^2 - 1 = phi^2 + phi, so v = 3^(v_3(n/2)) for even n
    let n = 2 * 3u64.pow(8);
    let want = BigUint::from(3u32).modpow(&BigUint::from(n - 3u64.pow(8)), &BigUint::from(29u32)) + 1u32;
    assert_eq!(BigUint::from(per_n_closed_mod(&m, n, 29).unwrap()), want % 29u32);
    let p = DynAffineMap::power(5, 2).unwrap();
    assert!(per_n_closed_mod(&p, 1_000_000_007, 1_000_003).is_ok());
}

fn separable_sigma(p: u64) -> impl Strategy<Value = TwistedPoly> {
    (prop::collection::vec(0i64..p as i64, 1..=2), 1i64..p as i64).prop_map(move |(mut c, c0)| {
        let f = FieldCtx::prime(p).unwrap();
        c.insert(0, c0);
        if *c.last().unwrap() == 0 {
            *c.last_mut().unwrap() = 1;
        }
        TwistedPoly::from_ints(&f, &c)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn oracle_equivalence_gm(p in prop::sample::select(vec![2u64, 3, 5, 7]), d in -6i64..=7, cheb in any::<bool>(), n in 1u32..=4) {
        prop_assume!(d.unsigned_abs() >= 2);
        prop_assume!((d.unsigned_abs() as u128).pow(n) <= 1500);
        let map = if cheb { DynAffineMap::chebyshev(p, d).unwrap() } else { DynAffineMap::power(p, d).unwrap() };
        prop_assert_eq!(closed(&map, n as u64), oracle(&map, n));
    }

    #[test]
    fn oracle_equivalence_additive(sigma in prop::sample::select(vec![2u64, 3]).prop_flat_map(separable_sigma), t in 0i64..3, n in 1u32..=4) {
        let f = sigma.ctx().clone();
        let deg = f.p().pow(sigma.index().unwrap() as u32);
        prop_assume!((deg as u128).pow(n) <= 1000);
        let map = DynAffineMap::additive(sigma, f.el_int(t)).unwrap();
        prop_assert_eq!(closed(&map, n as u64), oracle(&map, n));
    }

    #[test]
    fn oracle_equivalence_subadditive(c0 in 1i64..5, c1 in 1i64..5, n in 1u32..=3) {
        // p = 5, d = 4: every index is allowed since 5^i = 1 mod 4
        let f = FieldCtx::prime(5).unwrap();
        let map = DynAffineMap::subadditive(TwistedPoly::from_ints(&f, &[c0, c1]), 4).unwrap();
        prop_assume!(5u64.pow(n) <= 200);
        prop_assert_eq!(closed(&map, n as u64), oracle(&map, n));
    }

    #[test]
    fn subadditive_identity(p in prop::sample::select(vec![3u64, 5, 7]), c in prop::collection::vec(0i64..7, 2..=3), di in 0usize..4) {
        let ds: Vec<u64> = (2..p).filter(|d| (p - 1) % d == 0).collect();
        let d = ds[di % ds.len()];
        let f = FieldCtx::prime(p).unwrap();
        let mut c = c;
        if c[c.len() - 1] % p as i64 == 0 { *c.last_mut().unwrap() = 1; }
        let sigma = TwistedPoly::from_ints(&f, &c);
        let fy = subadditive_poly(&sigma, d).unwrap();
        let psi = affine_zeta::twisted::additive_poly(&sigma).unwrap();
        prop_assert_eq!(psi.pow(d), fy.compose(&Poly::monomial(&f, 1, d as usize)));
    }

    #[test]
    fn chebyshev_depends_on_abs_d(p in prop::sample::select(vec![2u64, 3, 5, 7, 11]), d in 2i64..40, n in 1u64..30) {
        let a = per_n_closed(&DynAffineMap::chebyshev(p, d).unwrap(), n).unwrap();
        let b = per_n_closed(&DynAffineMap::chebyshev(p, -d).unwrap(), n).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn counts_are_bounded_by_degree(p in prop::sample::select(vec![2u64, 3, 5, 7]), d in 2i64..12, n in 1u64..12) {
        for map in [DynAffineMap::power(p, d).unwrap(), DynAffineMap::power(p, -d).unwrap(), DynAffineMap::chebyshev(p, d).unwrap()] {
            let c = per_n_closed(&map, n).unwrap();
            prop_assert!(c <= num_traits::pow(map.degree(), n as usize) + 1u32);
        }
    }

    #[test]
    fn additive_powers_nest(sigma in separable_sigma(3), m in 1u64..4, k in 1u64..4) {
        let f = sigma.ctx().clone();
        let map = DynAffineMap::additive(sigma.clone(), f.el_zero()).unwrap();
        prop_assert!(per_n_closed(&map, m).unwrap() <= per_n_closed(&map, m * k).unwrap());
    }
}
