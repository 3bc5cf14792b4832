use affine_zeta::field::{distinct_root_count, field_make, FieldCtx, FieldElem, RatFn};
use affine_zeta::twisted::*;
use affine_zeta::Error;
use num_bigint::BigUint;
use proptest::prelude::*;

fn f(p: u64) -> affine_zeta::field::Ctx {
    FieldCtx::prime(p).unwrap()
}

#[test]
fn twist_rule() {
    let k = field_make(3, 2, None).unwrap();
    let c = TwistedPoly::scalar(&k, FieldElem::Fin(3)); // the generator t
    let lhs = tw_mul(&TwistedPoly::phi(&k), &c);
    let rhs = tw_mul(&TwistedPoly::scalar(&k, FieldElem::Fin(k.pow(3, 3))), &TwistedPoly::phi(&k));
    assert_eq!(lhs, rhs);
    assert_ne!(k.pow(3, 3), 3);
}

#[test]
fn square_of_phi_minus_one() {
    let f3 = f(3);
    let s = TwistedPoly::from_ints(&f3, &[-1, 1]);
    assert_eq!(tw_mul(&s, &s), TwistedPoly::from_ints(&f3, &[1, 1, 1]));
    assert_eq!(tw_mul(&s, &TwistedPoly::one(&f3)), s);
    let sq_minus = tw_sub_scalar(&tw_pow(&s, 2), &f3.el_one());
    assert_eq!(sq_minus, TwistedPoly::from_ints(&f3, &[0, 1, 1]));
    assert_eq!(tw_sub_scalar(&s, &f3.el_zero()), s);
    assert_eq!(tw_pow(&TwistedPoly::phi(&f3), 2), TwistedPoly::from_ints(&f3, &[0, 0, 1]));
}

#[test]
fn valuations_and_kernels() {
    let f3 = f(3);
    assert_eq!(v_phi(&TwistedPoly::from_ints(&f3, &[0, 1, 1])), Some(1));
    assert_eq!(v_phi(&TwistedPoly::from_ints(&f3, &[-1, 1])), Some(0));
    assert_eq!(v_phi(&TwistedPoly::zero(&f3)), None);

    let s = TwistedPoly::from_ints(&f3, &[0, 1, 1]);
    assert_eq!(kernel_size_ga(&s).unwrap(), BigUint::from(3u32));
    assert_eq!(distinct_root_count(&additive_poly(&s).unwrap()).unwrap(), 3);
    assert_eq!(kernel_size_ga(&TwistedPoly::phi(&f3)).unwrap(), BigUint::from(1u32));
    assert_eq!(kernel_size_ga(&TwistedPoly::from_ints(&f3, &[-1, 1])).unwrap(), BigUint::from(3u32));
    assert!(matches!(kernel_size_ga(&TwistedPoly::zero(&f3)), Err(Error::ZeroElement)));
}

#[test]
fn lte_examples() {
    let f2 = f(2);
    let x = TwistedPoly::from_ints(&f2, &[1, 1]);
    assert_eq!(lte_ga(&x, 2).unwrap(), Some(2));
    assert_eq!(tw_sub_scalar(&tw_pow(&x, 2), &f2.el_one()), TwistedPoly::from_ints(&f2, &[0, 0, 1]));
    for n in [1u64, 3, 5, 7] {
        assert_eq!(lte_ga(&x, n).unwrap(), Some(1));
    }
    assert_eq!(lte_ga(&TwistedPoly::one(&f2), 4).unwrap(), None);
    let bad = TwistedPoly::from_ints(&f(3), &[-1, 1]);
    assert!(matches!(lte_ga(&bad, 2), Err(Error::HypothesisViolated(_))));
}

#[test]
fn constant_orders() {
    assert_eq!(constant_order(&TwistedPoly::from_ints(&f(3), &[-1, 1])).unwrap(), ConstantOrder::Finite(2));
    assert_eq!(constant_order(&TwistedPoly::from_ints(&f(2), &[1, 1])).unwrap(), ConstantOrder::Finite(1));
    let fu = FieldCtx::rational_function(3).unwrap();
    let s = TwistedPoly::new(&fu, vec![FieldElem::Fun(RatFn::u(3)), fu.el_one()]);
    assert_eq!(constant_order(&s).unwrap(), ConstantOrder::Transcendental);
    assert!(matches!(constant_order(&TwistedPoly::phi(&f(5))), Err(Error::InseparableSigma)));
}

#[test]
fn rational_function_coefficients_twist() {
    let fu = FieldCtx::rational_function(3).unwrap();
    let u = FieldElem::Fun(RatFn::u(3));
    let prod = tw_mul(&TwistedPoly::phi(&fu), &TwistedPoly::scalar(&fu, u.clone()));
    assert_eq!(prod.coeff(1), FieldElem::Fun(RatFn::u(3).pow(3)));
    // the constant term of sigma^n is u^n, never 1
    let s = TwistedPoly::new(&fu, vec![u, fu.el_one()]);
    assert_eq!(v_phi_pow_minus(&s, 5, &fu.el_one()).unwrap(), Some(0));
}

fn tw_strategy() -> impl Strategy<Value = (u64, usize, Vec<u64>)> {
    (prop::sample::select(vec![2u64, 3]), 1usize..3).prop_flat_map(|(p, k)| {
        let q = p.pow(k as u32);
        (Just(p), Just(k), prop::collection::vec(0..q, 1..4))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn valuation_is_additive((p, k, a) in tw_strategy(), b in prop::collection::vec(0u64..9, 1..4)) {
        let ctx = field_make(p, k, None).unwrap();
        let x = TwistedPoly::new(&ctx, a.iter().map(|&c| FieldElem::Fin(c)).collect());
        let y = TwistedPoly::new(&ctx, b.iter().map(|&c| FieldElem::Fin(c % ctx.q())).collect());
        prop_assume!(!x.is_zero() && !y.is_zero());
        let xy = tw_mul(&x, &y);
        prop_assert_eq!(v_phi(&xy).unwrap(), v_phi(&x).unwrap() + v_phi(&y).unwrap());
        prop_assert_eq!(xy.index().unwrap(), x.index().unwrap() + y.index().unwrap());
    }

    #[test]
    fn realization_is_a_homomorphism((p, k, a) in tw_strategy(), b in prop::collection::vec(0u64..9, 1..4)) {
        let ctx = field_make(p, k, None).unwrap();
        let x = TwistedPoly::new(&ctx, a.iter().map(|&c| FieldElem::Fin(c)).collect());
        let y = TwistedPoly::new(&ctx, b.iter().map(|&c| FieldElem::Fin(c % ctx.q())).collect());
        let lhs = additive_poly(&tw_mul(&x, &y)).unwrap();
        let rhs = additive_poly(&x).unwrap().compose(&additive_poly(&y).unwrap());
        prop_assert_eq!(lhs, rhs);
        let sum = additive_poly(&x.add(&y)).unwrap();
        prop_assert_eq!(sum, additive_poly(&x).unwrap().add(&additive_poly(&y).unwrap()));
    }

    #[test]
    fn kernel_matches_root_count((p, k, a) in tw_strategy()) {
        let ctx = field_make(p, k, None).unwrap();
        let x = TwistedPoly::new(&ctx, a.iter().map(|&c| FieldElem::Fin(c)).collect());
        prop_assume!(!x.is_zero());
        let roots = distinct_root_count(&additive_poly(&x).unwrap()).unwrap();
        prop_assert_eq!(kernel_size_ga(&x).unwrap(), BigUint::from(roots));
    }

    #[test]
    fn truncated_valuation_matches_full((p, k, a) in tw_strategy(), n in 1u64..12) {
        let ctx = field_make(p, k, None).unwrap();
        let x = TwistedPoly::new(&ctx, a.iter().map(|&c| FieldElem::Fin(c)).collect());
        let omega = ctx.el_pow(&x.coeff(0), n);
        let full = v_phi(&tw_sub_scalar(&tw_pow(&x, n), &omega));
        prop_assert_eq!(v_phi_pow_minus(&x, n, &omega).unwrap(), full);
    }
}
