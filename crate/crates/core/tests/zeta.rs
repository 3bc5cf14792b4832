use affine_zeta::automata::{KernelClassification, DEFAULT_PREFIX};
use affine_zeta::dynmap::cycle_census;
use affine_zeta::families::*;
use affine_zeta::field::{FieldCtx, FieldElem, RatFn};
use affine_zeta::orders::{PrimeContext, QuadRing, QuatOrder};
use affine_zeta::twisted::TwistedPoly;
use affine_zeta::zeta::*;
use affine_zeta::Error;
use num_bigint::{BigInt, BigUint};
use proptest::prelude::*;

fn big(xs: &[u64]) -> Vec<BigUint> {
    xs.iter().map(|&x| BigUint::from(x)).collect()
}

fn counts(map: &DynAffineMap, len: u64) -> Vec<BigUint> {
    (1..=len).map(|n| per_n_closed(map, n).unwrap()).collect()
}

/// `1 + d + ... + d^n`, the coefficients of `1/((1-t)(1-dt))`.
fn geometric_sums(d: i64, len: usize) -> Vec<BigInt> {
    let mut out = Vec::new();
    let (mut acc, mut pw) = (BigInt::from(0), BigInt::from(1));
    for _ in 0..len {
        acc += &pw;
        pw *= d;
        out.push(acc.clone());
    }
    out
}

fn x_cubed_minus_x() -> DynAffineMap {
    let f = FieldCtx::prime(3).unwrap();
    DynAffineMap::additive(TwistedPoly::from_ints(&f, &[-1, 1]), f.el_zero()).unwrap()
}

fn u_plus_phi() -> DynAffineMap {
    let fu = FieldCtx::rational_function(3).unwrap();
    let sigma = TwistedPoly::new(&fu, vec![FieldElem::Fun(RatFn::u(3)), fu.el_one()]);
    DynAffineMap::additive(sigma, fu.el_zero()).unwrap()
}

#[test]
fn exp_formula_examples() {
    for d in [2u64, 3, 5] {
        let c: Vec<u64> = (1..=25).map(|n| d.pow(n) + 1).collect();
        let z = zeta_from_counts(&big(&c)).unwrap();
        assert_eq!(z.coeffs(), &geometric_sums(d as i64, 26)[..]);
        assert_eq!(z.provenance(), Provenance::ExpFormula);
    }
    let ones = zeta_from_counts(&big(&[1; 20])).unwrap();
    assert!(ones.coeffs().iter().all(|c| *c == BigInt::from(1)));
    assert_eq!(ones.len(), 21);
}

#[test]
fn exp_formula_rejects_inconsistent_counts() {
    // a single point of exact period 2 is impossible
    assert!(matches!(zeta_from_counts(&big(&[0, 1])), Err(Error::NonIntegerCoefficient { index: 2 })));
}

#[test]
fn product_formula_matches_on_complete_prefix() {
    for map in [DynAffineMap::power(3, 2).unwrap(), DynAffineMap::chebyshev(5, 2).unwrap(), x_cubed_minus_x()] {
        let f = realize(&map).unwrap();
        let census = cycle_census(&f, 4, 12).unwrap();
        let c = counts(&map, 12);
        let n = census_complete_prefix(&census, &c);
        assert!(n >= 2, "{map}: census complete only to {n}");
        let prod = zeta_from_cycles(&census, n + 1);
        assert_eq!(prod.provenance(), Provenance::ProductFormula);
        assert_eq!(prod.coeffs(), zeta_from_counts(&c[..n]).unwrap().coeffs(), "{map}");
    }
}

#[test]
fn rational_expansion() {
    let one = BigInt::from(1);
    // (1 + t) / (1 - 2t)
    let s = expand_rational(&[one.clone(), one.clone()], &[one.clone(), BigInt::from(-2)], 5).unwrap();
    assert_eq!(s, [1, 3, 6, 12, 24].map(BigInt::from));
    assert!(expand_rational(&[one.clone()], &[BigInt::from(2)], 3).is_err());
}

#[test]
fn rationality_guess_examples() {
    let c: Vec<u64> = (1..=24).map(|n| 1 + 3u64.pow(n)).collect();
    let g = rationality_guess(&big(&c)).unwrap();
    assert_eq!(g.recurrence.len(), 2);
    let z = g.closed_form.unwrap();
    assert_eq!(z.denominator, [1, -4, 3].map(BigInt::from));
    assert_eq!(z.numerator, [BigInt::from(1)]);

    let x2 = counts(&DynAffineMap::power(3, 2).unwrap(), 30);
    assert!(rationality_guess(&x2).is_none());

    let insep = counts(&DynAffineMap::power(5, 5).unwrap(), 30);
    let z = rationality_guess(&insep).unwrap().closed_form.unwrap();
    assert_eq!(z.expand(30), geometric_sums(5, 30));

    assert!(rationality_guess(&big(&[2; 10])).is_none());
}

#[test]
fn rationality_guess_signed_multiplicities() {
    // #Per_n = 4^n - 2^n + 1 gives (1 - 2t) / ((1 - t)(1 - 4t))
    let c: Vec<u64> = (1..=24).map(|n| 4u64.pow(n) - 2u64.pow(n) + 1).collect();
    let z = rationality_guess(&big(&c)).unwrap().closed_form.unwrap();
    assert_eq!(z.numerator, [1, -2].map(BigInt::from));
    assert_eq!(z.denominator, [1, -5, 4].map(BigInt::from));
}

#[test]
fn verdict_inseparable_is_rational() {
    for p in [2u64, 3, 5] {
        let v = verdict(&DynAffineMap::power(p, p as i64).unwrap(), &Effort::default()).unwrap();
        assert!(v.is_rational());
        assert_eq!(v.theorem(), Theorem::Inseparable);
        let Outcome::RationalClosedForm { zeta, .. } = &v.outcome else { panic!() };
        assert_eq!(zeta.denominator, vec![BigInt::from(1), BigInt::from(-(p as i64 + 1)), BigInt::from(p)]);
        assert_eq!(v.series.unwrap().coeffs(), &geometric_sums(p as i64, MIN_SERIES + 1)[..]);
    }
}

#[test]
fn verdict_transcendental_constant_term_is_rational() {
    let map = u_plus_phi();
    let c = counts(&map, 20);
    assert!(c.iter().enumerate().all(|(i, x)| *x == BigUint::from(3u64.pow(i as u32 + 1) + 1)));
    let v = verdict(&map, &Effort::default()).unwrap();
    assert_eq!(v.theorem(), Theorem::AdditiveRational);
    let Outcome::RationalClosedForm { zeta, .. } = &v.outcome else { panic!() };
    assert_eq!(zeta.expand(30), geometric_sums(3, 30));
    assert!(matches!(certificate_build(&map, &Effort::default()), Err(Error::InvalidInput(_))));
}

#[test]
fn power_map_certificate() {
    let map = DynAffineMap::power(3, 2).unwrap();
    let c = certificate_build(&map, &Effort::default()).unwrap();
    assert_eq!((c.m, c.ell), (2, 5));
    assert_eq!(c.target, Target::Valuation { a: 3, p: 3, alpha: 4, beta: 1 });
    assert!(c.b.len() >= 1500);
    assert_eq!(c.period, None);
    let lk = c.ell_kernel.as_ref().unwrap();
    assert_eq!(lk.depth, 4);
    assert!(lk.strictly_growing());
    assert_eq!(c.p_kernel.classification, KernelClassification::Closed);
    assert_eq!(c.p_kernel.closed_at, Some(4));
    c.verify(&map).unwrap();
    // 4n + 1 = 1, 21, 9, 81 have v_3 = 0, 1, 2, 4
    assert_eq!((c.b[0], c.b[5], c.b[2], c.b[20]), (1, 3, 4, 1));
}

#[test]
fn chebyshev_p2_certificate() {
    let map = DynAffineMap::chebyshev(2, 3).unwrap();
    let c = certificate_build(&map, &Effort::default()).unwrap();
    assert_eq!((c.m, c.ell), (2, 7));
    assert!(matches!(c.recipe, Recipe::Multiplicative { alpha: 6, beta: 2, group: 2, .. }));
    c.verify(&map).unwrap();
}

#[test]
fn additive_certificate() {
    let map = x_cubed_minus_x();
    let c = certificate_build(&map, &Effort::default()).unwrap();
    assert_eq!((c.m, c.ell), (2, 29));
    assert_eq!(c.target, Target::Tower { a: 1, p: 3 });
    assert!(!c.heuristic);
    assert_eq!(c.ell_kernel.as_ref().unwrap().class_counts[..2], [1, 29]);
    c.verify(&map).unwrap();
}

#[test]
fn tampered_certificate_fails() {
    let map = DynAffineMap::power(3, 2).unwrap();
    let mut c = certificate_build(&map, &Effort::default()).unwrap();
    c.b[7] = (c.b[7] + 1) % 5;
    assert!(c.verify(&map).is_err());
}

#[test]
fn verdict_certificates_verify() {
    let g = QuadRing::gaussian();
    let maps = vec![
        DynAffineMap::power(5, -3).unwrap(),
        DynAffineMap::lattes_generic_j(3, -2).unwrap(),
        DynAffineMap::lattes_ordinary(g.elem(1, 1), PrimeContext::ordinary(g, 5, None).unwrap(), g.units()).unwrap(),
        DynAffineMap::lattes_supersingular(SupersingularSigma::Quaternion {
            sigma: QuatOrder::Hurwitz.half([3, 1, 1, 1]).unwrap(),
            gammas: vec![QuatOrder::Hurwitz.int(1), QuatOrder::Hurwitz.int(-1)],
        })
        .unwrap(),
    ];
    for map in &maps {
        let v = verdict(map, &Effort::default()).unwrap();
        assert_eq!(v.theorem(), Theorem::MultiplicativeOrLattes);
        let certs = v.certificates();
        assert_eq!(certs.len(), 3);
        let ells: Vec<u64> = certs.iter().map(|c| c.ell).collect();
        assert!(ells[1] < ells[2] && !ells[1..].contains(&ells[0]), "{map}: {ells:?}");
        for c in certs {
            c.verify(map).unwrap_or_else(|e| panic!("{map}, l = {}: {e}", c.ell));
        }
    }
}

#[test]
fn verdict_is_deterministic_in_the_seed() {
    let map = DynAffineMap::power(3, 2).unwrap();
    let a = verdict(&map, &Effort { seed: 7, ..Effort::default() }).unwrap();
    let b = verdict(&map, &Effort { seed: 7, ..Effort::default() }).unwrap();
    assert_eq!(a, b);
}

#[test]
fn target_values() {
    let t = Target::Valuation { a: 2, p: 3, alpha: 1, beta: 0 };
    assert_eq!([1, 3, 9, 27].map(|n| t.at(n, 5)), [1, 2, 4, 3]);
    let tw = Target::Tower { a: 1, p: 3 };
    assert_eq!(tw.at(1, 29), 3);
    assert_eq!(tw.at(3, 29), 27);
    assert_eq!(tw.at(0, 29), 0);
    assert_eq!(t.p(), 3);
    assert_eq!(DEFAULT_PREFIX, 256);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn zeta_prefixes_are_integral(p in prop::sample::select(vec![3u64, 5, 7]), d in prop::sample::select(vec![-3i64, -2, 2, 3, 4, 5])) {
        for map in [DynAffineMap::power(p, d).unwrap(), DynAffineMap::chebyshev(p, d.abs()).unwrap()] {
            let z = zeta_from_counts(&counts(&map, 30)).unwrap();
            prop_assert_eq!(z.coeffs()[0].clone(), BigInt::from(1));
        }
    }

    #[test]
    fn rational_closed_forms_round_trip(a in 2i64..6, b in 2i64..6, e in prop::sample::select(vec![-1i64, 1, 2])) {
        prop_assume!(a != b && (e > 0 || a > b));
        // #Per_n = 1 + a^n + e b^n
        let c: Vec<BigUint> = (1..=24u32)
            .map(|n| (BigInt::from(1) + BigInt::from(a).pow(n) + BigInt::from(e) * BigInt::from(b).pow(n)).to_biguint().unwrap())
            .collect();
        let z = zeta_from_counts(&c).unwrap();
        let g = rationality_guess(&c).unwrap();
        let rz = g.closed_form.unwrap();
        prop_assert_eq!(&rz.expand(z.len())[..], z.coeffs());
    }

    #[test]
    fn exp_formula_matches_primitive_cycles(cycles in prop::collection::vec(0u64..4, 1..10)) {
        let census: Vec<(usize, u64)> = cycles.iter().enumerate().map(|(i, &c)| (i + 1, c)).collect();
        let n = census.len();
        let c: Vec<BigUint> = (1..=n)
            .map(|m| BigUint::from(census.iter().filter(|(k, _)| m % k == 0).map(|&(k, c)| k as u64 * c).sum::<u64>()))
            .collect();
        prop_assert_eq!(census_complete_prefix(&census, &c), n);
        let (prod, exp) = (zeta_from_cycles(&census, n + 1), zeta_from_counts(&c).unwrap());
        prop_assert_eq!(prod.coeffs(), exp.coeffs());
    }
}
