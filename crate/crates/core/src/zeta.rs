//! Zeta-series coefficients, rationality detection and the verdict engine.
//!
//! A transcendental verdict is never a bare claim. It carries a
//! certificate: a sequence `b_n` derived from `#Per_n mod l` by the
//! manipulations of the transcendence argument, which should equal a
//! valuation sequence that is `p`-automatic but not `l`-automatic. The
//! certificate records the finite evidence for both halves.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::automata::{
    eventual_period_detect, kernel_closure, kernel_explore, prop78_sequence, prop79_sequence, KernelClassification, KernelReport,
    DEFAULT_PREFIX,
};
use crate::error::{Error, Result};
use crate::families::{
    classify_separability, constant_term_order, group_order, identity_index, kernel_terms_mod, per_n_closed,
    per_n_closed_mod, DynAffineMap, Separability, SupersingularSigma,
};
use crate::field::{factor_u64, inv_mod, is_prime, pow_mod};
use crate::orders::{pow_mod_elem, v_frak_p_pow_minus, v_i, v_p_big, v_p_u64, OrderElem};
use crate::twisted::v_phi_pow_minus;

/// Largest recurrence order tried by [`rationality_guess`].
pub const R_MAX: usize = 8;
/// Terms a recurrence must hold beyond the ones used to solve for it.
const SLACK: usize = 4;
/// Largest prime the `l`-search will consider.
pub const ELL_CAP: u64 = 10_000_000;
/// Terms compared when a rational closed form is cross-checked.
pub const MIN_SERIES: usize = 30;
/// Longest `b` prefix recorded while waiting for the period detector to clear.
pub const PERIOD_PREFIX_MAX: usize = 128_000;
/// Deepest level of the base-`p` kernel closure.
pub const P_KERNEL_DEPTH: u32 = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    /// `exp(sum #Per_n t^n / n)`.
    ExpFormula,
    /// `prod (1 - t^k)^(-c_k)` over primitive cycles.
    ProductFormula,
}

/// Coefficients `c_0 = 1, c_1, ..., c_N` of the zeta function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZetaSeries {
    coeffs: Vec<BigInt>,
    provenance: Provenance,
}

impl ZetaSeries {
    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Number of coefficients, including `c_0`.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }
}

/// `exp(sum_n counts[n-1] t^n / n)` through `j c_j = sum_i counts_i c_(j-i)`.
pub fn zeta_from_counts(counts: &[BigUint]) -> Result<ZetaSeries> {
    let mut c: Vec<BigInt> = vec![BigInt::one()];
    for j in 1..=counts.len() {
        let mut acc = BigInt::zero();
        for i in 1..=j {
            acc += BigInt::from(counts[i - 1].clone()) * &c[j - i];
        }
        let (q, r) = acc.div_rem(&BigInt::from(j));
        if !r.is_zero() {
            return Err(Error::NonIntegerCoefficient { index: j });
        }
        c.push(q);
    }
    Ok(ZetaSeries { coeffs: c, provenance: Provenance::ExpFormula })
}

/// `prod_k (1 - t^k)^(-c_k)` from a cycle census `(length, cycles)`, to
/// `len` coefficients.
pub fn zeta_from_cycles(census: &[(usize, u64)], len: usize) -> ZetaSeries {
    let mut c = vec![BigInt::zero(); len];
    if len > 0 {
        c[0] = BigInt::one();
    }
    for &(k, count) in census {
        if k == 0 || k >= len {
            continue;
        }
        // multiply by (1 - t^k)^(-1), count times
        for _ in 0..count {
            for j in k..len {
                let prev = c[j - k].clone();
                c[j] += prev;
            }
        }
    }
    ZetaSeries { coeffs: c, provenance: Provenance::ProductFormula }
}

/// Largest `N` such that the census accounts for every periodic point of
/// period dividing `n`, for all `n <= N`. `counts[n-1]` is `#Per_n`.
pub fn census_complete_prefix(census: &[(usize, u64)], counts: &[BigUint]) -> usize {
    for n in 1..=counts.len() {
        let found: u128 = census.iter().filter(|(k, _)| *k > 0 && n % k == 0).map(|&(k, c)| k as u128 * c as u128).sum();
        if BigUint::from(found) != counts[n - 1] {
            return n - 1;
        }
    }
    counts.len()
}

/// Integer polynomial, ascending coefficients.
pub type IntPoly = Vec<BigInt>;

fn poly_mul(a: &[BigInt], b: &[BigInt]) -> IntPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// First `len` coefficients of `num / den`; `den[0]` must be `1`.
pub fn expand_rational(num: &[BigInt], den: &[BigInt], len: usize) -> Result<Vec<BigInt>> {
    if den.first().map_or(true, |d| !d.is_one()) {
        return Err(Error::InvalidInput("denominator must have constant term 1".into()));
    }
    let mut out: Vec<BigInt> = Vec::with_capacity(len);
    for j in 0..len {
        let mut acc = num.get(j).cloned().unwrap_or_default();
        for i in 1..den.len().min(j + 1) {
            acc -= &den[i] * &out[j - i];
        }
        out.push(acc);
    }
    Ok(out)
}

/// `prod (1 - alpha t)^e` over the factors with `e > 0`.
fn product_of_factors(factors: &[(BigInt, i64)], sign: i64) -> IntPoly {
    let mut acc = vec![BigInt::one()];
    for (alpha, e) in factors {
        if e.signum() == sign {
            for _ in 0..e.unsigned_abs() {
                acc = poly_mul(&acc, &[BigInt::one(), -alpha]);
            }
        }
    }
    acc
}

/// `zeta = numerator / denominator = prod (1 - alpha_i t)^(-e_i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalZeta {
    pub numerator: IntPoly,
    pub denominator: IntPoly,
    /// `(alpha_i, e_i)` with `#Per_n = sum e_i alpha_i^n`.
    pub factors: Vec<(BigInt, i64)>,
}

impl RationalZeta {
    pub fn from_factors(factors: Vec<(BigInt, i64)>) -> RationalZeta {
        RationalZeta { numerator: product_of_factors(&factors, -1), denominator: product_of_factors(&factors, 1), factors }
    }

    pub fn expand(&self, len: usize) -> Vec<BigInt> {
        expand_rational(&self.numerator, &self.denominator, len).expect("denominator has constant term 1")
    }
}

/// A linear recurrence `s_n = sum_i c_i s_(n-i)` found for the counts, with
/// the zeta function it implies when the characteristic roots are distinct
/// integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalityGuess {
    pub recurrence: Vec<BigRational>,
    pub closed_form: Option<RationalZeta>,
}

/// Solves `m x = rhs` over the rationals; `None` when singular.
fn solve(mut m: Vec<Vec<BigRational>>, mut rhs: Vec<BigRational>) -> Option<Vec<BigRational>> {
    let r = rhs.len();
    for col in 0..r {
        let piv = (col..r).find(|&i| !m[i][col].is_zero())?;
        m.swap(col, piv);
        rhs.swap(col, piv);
        let inv = m[col][col].recip();
        for j in col..r {
            m[col][j] = &m[col][j] * &inv;
        }
        rhs[col] = &rhs[col] * &inv;
        for i in 0..r {
            if i != col && !m[i][col].is_zero() {
                let f = m[i][col].clone();
                for j in col..r {
                    let t = &f * &m[col][j];
                    m[i][j] -= t;
                }
                let t = &f * &rhs[col];
                rhs[i] -= t;
            }
        }
    }
    Some(rhs)
}

/// Distinct integer roots of the monic integer polynomial
/// `x^r - c_1 x^(r-1) - ... - c_r`, if it splits that way.
fn integer_roots(c: &[BigInt]) -> Option<Vec<BigInt>> {
    let r = c.len();
    let last = c[r - 1].abs().to_u64()?;
    if last == 0 {
        return None;
    }
    let mut divisors = vec![1u64];
    for (q, e) in factor_u64(last) {
        let mut next = Vec::new();
        for d in &divisors {
            let mut x = *d;
            for _ in 0..=e {
                next.push(x);
                x = x.saturating_mul(q);
            }
        }
        divisors = next;
    }
    // descending coefficients of the characteristic polynomial
    let mut poly: Vec<BigInt> = std::iter::once(BigInt::one()).chain(c.iter().map(|x| -x)).collect();
    let mut roots = Vec::new();
    for d in divisors {
        for cand in [BigInt::from(d), -BigInt::from(d)] {
            // synthetic division
            let mut q = Vec::with_capacity(poly.len() - 1);
            let mut acc = BigInt::zero();
            for a in &poly {
                acc = acc * &cand + a;
                q.push(acc.clone());
            }
            if acc.is_zero() {
                q.pop();
                poly = q;
                roots.push(cand);
            }
        }
    }
    if roots.len() == r {
        Some(roots)
    } else {
        None
    }
}

/// Looks for a linear recurrence of order `<= R_MAX` in `counts`
/// (`counts[n-1] = #Per_n`) by solving Hankel systems over the rationals.
/// Needs at least `2 R_MAX + 4` terms.
pub fn rationality_guess(counts: &[BigUint]) -> Option<RationalityGuess> {
    let n = counts.len();
    if n < 2 * R_MAX + SLACK {
        return None;
    }
    let s: Vec<BigRational> = counts.iter().map(|x| BigRational::from_integer(BigInt::from(x.clone()))).collect();
    for r in 1..=R_MAX {
        // s[k] = sum_{i=1..r} c_i s[k-i] for k = r..2r-1 (0-based)
        let m: Vec<Vec<BigRational>> = (r..2 * r).map(|k| (1..=r).map(|i| s[k - i].clone()).collect()).collect();
        let rhs: Vec<BigRational> = (r..2 * r).map(|k| s[k].clone()).collect();
        let Some(c) = solve(m, rhs) else { continue };
        let holds = (r..n).all(|k| {
            let pred: BigRational = (1..=r).map(|i| &c[i - 1] * &s[k - i]).sum();
            pred == s[k]
        });
        if holds {
            let closed_form = closed_form_from_recurrence(&c, counts);
            return Some(RationalityGuess { recurrence: c, closed_form });
        }
    }
    None
}

fn closed_form_from_recurrence(c: &[BigRational], counts: &[BigUint]) -> Option<RationalZeta> {
    if !c.iter().all(|x| x.is_integer()) {
        return None;
    }
    let ci: Vec<BigInt> = c.iter().map(|x| x.to_integer()).collect();
    let roots = integer_roots(&ci)?;
    let r = roots.len();
    // sum_i e_i alpha_i^n = #Per_n for n = 1..r
    let m: Vec<Vec<BigRational>> = (1..=r)
        .map(|k| roots.iter().map(|a| BigRational::from_integer(num_traits::pow(a.clone(), k))).collect())
        .collect();
    let rhs: Vec<BigRational> = counts[..r].iter().map(|x| BigRational::from_integer(BigInt::from(x.clone()))).collect();
    let e = solve(m, rhs)?;
    if !e.iter().all(|x| x.is_integer()) {
        return None;
    }
    let factors: Vec<(BigInt, i64)> =
        roots.into_iter().zip(e.iter().map(|x| x.to_integer().to_i64())).map(|(a, e)| e.map(|e| (a, e))).collect::<Option<_>>()?;
    let rz = RationalZeta::from_factors(factors);
    let series = zeta_from_counts(counts).ok()?;
    if rz.expand(series.len()) != series.coeffs() {
        return None;
    }
    Some(rz)
}

/// The result the verdict cites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Theorem {
    /// Inseparable maps: `zeta = 1 / ((1 - t)(1 - d t))`.
    Inseparable,
    /// Separable power maps, Chebyshev polynomials and Lattès maps have
    /// transcendental zeta.
    MultiplicativeOrLattes,
    /// Additive and subadditive maps: rational when `f'(0)` is
    /// transcendental over `F_p`, transcendental otherwise.
    AdditiveRational,
    AdditiveTranscendental,
}

impl std::fmt::Display for Theorem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Theorem::Inseparable => "inseparable map: rational",
            Theorem::MultiplicativeOrLattes => "separable power, Chebyshev or Lattès map: transcendental",
            Theorem::AdditiveRational => "additive family, f'(0) transcendental: rational",
            Theorem::AdditiveTranscendental => "additive family, f'(0) algebraic: transcendental",
        })
    }
}

/// The valuation sequence a certificate's `b_n` should equal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// `a^(v_p(alpha n + beta)) mod l`.
    Valuation { a: u64, p: u64, alpha: u64, beta: u64 },
    /// `p^(a p^(v_p(n))) mod l`, and `0` at `n = 0`.
    Tower { a: u64, p: u64 },
}

impl Target {
    pub fn p(&self) -> u64 {
        match *self {
            Target::Valuation { p, .. } | Target::Tower { p, .. } => p,
        }
    }

    /// The base-`p` automatic sequence the target is an arithmetic
    /// subsequence of: `a^(v_p(n))`, or the tower itself. Both are `0` at
    /// `n = 0`.
    pub fn source(&self, n: &BigUint, ell: u64) -> u64 {
        if n.is_zero() {
            return 0;
        }
        let v = v_p_biguint(n, self.p());
        match *self {
            Target::Valuation { a, .. } => pow_mod(a, v, ell),
            Target::Tower { a, p } => tower(a, p, v, ell),
        }
    }

    pub fn at(&self, n: u64, ell: u64) -> u64 {
        match *self {
            Target::Valuation { a, p, alpha, beta } => {
                let x = alpha as u128 * n as u128 + beta as u128;
                pow_mod(a, v_p_u128(x, p), ell)
            }
            Target::Tower { a, p } => {
                if n == 0 {
                    return 0;
                }
                tower(a, p, v_p_u64(n, p), ell)
            }
        }
    }
}

/// `p^(a p^v) mod l`, the exponent reduced mod `l - 1`.
fn tower(a: u64, p: u64, v: u64, ell: u64) -> u64 {
    let e = (a % (ell - 1)) as u128 * pow_mod(p, v, ell - 1) as u128 % (ell - 1) as u128;
    pow_mod(p, e as u64, ell)
}

fn v_p_biguint(n: &BigUint, p: u64) -> u64 {
    let mut v = 0;
    let mut x = n.clone();
    loop {
        let (q, r) = x.div_rem(&BigUint::from(p));
        if !r.is_zero() {
            return v;
        }
        x = q;
        v += 1;
    }
}

fn v_p_u128(mut x: u128, p: u64) -> u64 {
    let p = p as u128;
    let mut v = 0;
    while x > 0 && x % p == 0 {
        x /= p;
        v += 1;
    }
    v
}

/// How `b_n` is computed from `#Per_(m k) mod l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recipe {
    /// `k = alpha n + beta` and
    /// `b_n = scale / (|Gamma| (#Per_(mk) - boundary) - rest)`, where
    /// `rest` is the `gamma != 1` part of the orbit sum at `k = beta`.
    Multiplicative { alpha: u64, beta: u64, boundary: u64, group: u64, rest: u64, scale: u64 },
    /// `k = (l - 1) n` and `b_n = 1 / (d (#Per_(mk) - 1) - (d - 1))`, with
    /// `b_0 = 0`.
    Additive { d: u64 },
}

/// Finite evidence for one prime `l`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub p: u64,
    pub m: u64,
    pub ell: u64,
    pub recipe: Recipe,
    pub target: Target,
    /// `b_0, b_1, ...`, at least the requested prefix length.
    pub b: Vec<u64>,
    /// `eventual_period_detect` on the prefix; should be `None`.
    pub period: Option<(usize, usize)>,
    /// Base-`l` kernel of `b`; `None` when `l` is too large to explore.
    pub ell_kernel: Option<KernelReport>,
    /// Base-`p` kernel of the target sequence.
    pub p_kernel: KernelReport,
    /// `l` could not meet the size bound below [`ELL_CAP`].
    pub heuristic: bool,
}

impl Certificate {
    /// Recomputes `b` from the counts and checks every recorded claim.
    pub fn verify(&self, map: &DynAffineMap) -> Result<()> {
        let prefix = self.b.len().min(4096) as u64;
        for n in 0..prefix {
            let b = derive_b(map, self.m, self.ell, &self.recipe, n)?;
            if b != self.b[n as usize] {
                return Err(Error::Mismatch(format!("b_{n} re-derives to {b}, recorded {}", self.b[n as usize])));
            }
        }
        for (n, &b) in self.b.iter().enumerate() {
            let t = self.target.at(n as u64, self.ell);
            if b != t {
                return Err(Error::Mismatch(format!("b_{n} = {b} but the valuation sequence gives {t}")));
            }
        }
        if eventual_period_detect(&self.b) != self.period {
            return Err(Error::Mismatch("recorded period does not match the detector".into()));
        }
        if self.period.is_some() {
            return Err(Error::Mismatch(format!("b is eventually periodic: {:?}", self.period)));
        }
        if self.p_kernel.classification != KernelClassification::Closed {
            return Err(Error::Mismatch(format!("base-{} kernel did not close", self.p)));
        }
        match &self.ell_kernel {
            Some(k) if !k.strictly_growing() => Err(Error::Mismatch(format!("base-{} kernel is not growing", self.ell))),
            None if !self.heuristic => Err(Error::Mismatch("base-l kernel missing".into())),
            _ => Ok(()),
        }
    }
}

/// Knobs for [`verdict`] and [`certificate_build`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Effort {
    /// Length of the recorded `b` prefix.
    pub prefix: usize,
    /// Sequence evaluations allowed per kernel exploration.
    pub kernel_budget: u64,
    /// Deepest kernel level explored.
    pub max_depth: u32,
    /// Additional admissible primes certified beyond the recipe's.
    pub extra_ells: usize,
    /// Seed for choosing the additional primes.
    pub seed: u64,
    /// Terms used to cross-check a rational closed form.
    pub series_len: usize,
}

impl Default for Effort {
    fn default() -> Effort {
        Effort { prefix: 2000, kernel_budget: 250_000, max_depth: 4, extra_ells: 2, seed: 0, series_len: MIN_SERIES }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    RationalClosedForm { theorem: Theorem, zeta: RationalZeta },
    TranscendentalEvidence { theorem: Theorem, m: u64, ell: u64, certificate: Certificate, extra: Vec<Certificate> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub outcome: Outcome,
    /// The exact series the rational branch was checked against.
    pub series: Option<ZetaSeries>,
}

impl Verdict {
    pub fn is_rational(&self) -> bool {
        matches!(self.outcome, Outcome::RationalClosedForm { .. })
    }

    pub fn theorem(&self) -> Theorem {
        match self.outcome {
            Outcome::RationalClosedForm { theorem, .. } | Outcome::TranscendentalEvidence { theorem, .. } => theorem,
        }
    }

    /// Every certificate attached to the verdict.
    pub fn certificates(&self) -> Vec<&Certificate> {
        match &self.outcome {
            Outcome::RationalClosedForm { .. } => Vec::new(),
            Outcome::TranscendentalEvidence { certificate, extra, .. } => std::iter::once(certificate).chain(extra).collect(),
        }
    }
}

fn rational_verdict(map: &DynAffineMap, theorem: Theorem, effort: &Effort) -> Result<Verdict> {
    let d = BigInt::from(map.degree());
    let zeta = RationalZeta::from_factors(vec![(BigInt::one(), 1), (d, 1)]);
    let len = effort.series_len.max(MIN_SERIES);
    let counts = (1..=len as u64).map(|n| per_n_closed(map, n)).collect::<Result<Vec<_>>>()?;
    let series = zeta_from_counts(&counts)?;
    if zeta.expand(series.len()) != series.coeffs() {
        return Err(Error::Mismatch(format!("closed form disagrees with the counts of {map}")));
    }
    Ok(Verdict { outcome: Outcome::RationalClosedForm { theorem, zeta }, series: Some(series) })
}

/// Rational closed form or certified transcendence evidence for `map`.
pub fn verdict(map: &DynAffineMap, effort: &Effort) -> Result<Verdict> {
    if classify_separability(map) == Separability::Inseparable {
        return rational_verdict(map, Theorem::Inseparable, effort);
    }
    let theorem = match map {
        DynAffineMap::Additive { sigma, .. } | DynAffineMap::Subadditive { sigma, .. } => {
            if constant_term_order(sigma)?.is_none() {
                return rational_verdict(map, Theorem::AdditiveRational, effort);
            }
            Theorem::AdditiveTranscendental
        }
        _ => Theorem::MultiplicativeOrLattes,
    };
    let plan = plan(map)?;
    let ells = admissible_ells(map, &plan, 1 + if effort.extra_ells > 0 { 8 } else { 0 })?;
    let (first, heuristic) = (ells.primes[0], ells.heuristic);
    let certificate = build(map, &plan, first, heuristic, effort)?;
    let mut rest = ells.primes[1..].to_vec();
    rest.shuffle(&mut ChaCha8Rng::seed_from_u64(effort.seed));
    rest.truncate(effort.extra_ells);
    rest.sort_unstable();
    let extra = rest.into_iter().map(|l| build(map, &plan, l, heuristic, effort)).collect::<Result<Vec<_>>>()?;
    Ok(Verdict {
        outcome: Outcome::TranscendentalEvidence { theorem, m: plan.m, ell: first, certificate, extra },
        series: None,
    })
}

/// Certificate for the recipe's prime `l` (the least admissible one).
pub fn certificate_build(map: &DynAffineMap, effort: &Effort) -> Result<Certificate> {
    if classify_separability(map) == Separability::Inseparable {
        return Err(Error::InvalidInput(format!("{map} is inseparable; its zeta is rational")));
    }
    if let DynAffineMap::Additive { sigma, .. } | DynAffineMap::Subadditive { sigma, .. } = map {
        if constant_term_order(sigma)?.is_none() {
            return Err(Error::InvalidInput(format!("{map} has transcendental f'(0); its zeta is rational")));
        }
    }
    let plan = plan(map)?;
    let ells = admissible_ells(map, &plan, 1)?;
    build(map, &plan, ells.primes[0], ells.heuristic, effort)
}

/// Family-specific choices made before `l` is known.
#[derive(Debug, Clone)]
struct Plan {
    p: u64,
    m: u64,
    kind: PlanKind,
}

#[derive(Debug, Clone)]
enum PlanKind {
    /// `k = alpha n + beta`, with `alpha` fixed once `l` is known. The
    /// target base is `a`.
    Multiplicative { a: u64, beta: u64, congruence: (u64, Vec<u64>) },
    /// Target `p^(w' p^(v_p(n)))` with `w' = w p^(v_p(l - 1))`.
    Additive { w: u64, d: u64 },
}

/// Least `m >= 1` with `val(m) >= threshold`.
fn least_m(threshold: u64, limit: u64, val: impl Fn(u64) -> Result<u64>) -> Result<u64> {
    for m in 1..=limit {
        if val(m)? >= threshold {
            return Ok(m);
        }
    }
    Err(Error::HypothesisViolated(format!("no m <= {limit} puts sigma^m - 1 in the required power of the prime")))
}

fn plan(map: &DynAffineMap) -> Result<Plan> {
    let p = map.p();
    let lattes = |a: u64| {
        let (beta, congruence) = match p {
            2 => (16, (8, vec![3])),
            3 => (3, (9, vec![2])),
            _ => (1, (p, vec![2])),
        };
        PlanKind::Multiplicative { a, beta, congruence }
    };
    let gm_kind = || {
        let (beta, congruence) = if p == 2 { (2, (4, vec![3])) } else { (1, (p, vec![2])) };
        PlanKind::Multiplicative { a: p, beta, congruence }
    };
    let even_order = |s: i64| -> Result<u64> {
        if p == 2 {
            return Ok(2);
        }
        let o = crate::field::FieldCtx::prime(p)?.order(s.rem_euclid(p as i64) as u64)?;
        Ok(o.lcm(&2))
    };
    Ok(match map {
        DynAffineMap::Power { d, .. } => Plan { p, m: even_order(*d)?, kind: gm_kind() },
        DynAffineMap::Chebyshev { d, .. } => {
            let m = if p == 2 { 2 } else { crate::field::FieldCtx::prime(p)?.order(d.unsigned_abs() % p)? };
            Plan { p, m, kind: gm_kind() }
        }
        DynAffineMap::LattesGenericJ { sigma, .. } => Plan { p, m: even_order(*sigma)?, kind: gm_kind() },
        DynAffineMap::LattesOrdinary { sigma, ctx, .. } => {
            let one = sigma.int_like(1);
            let t = if p == 2 { 2 } else { 1 };
            let m = least_m(t, 4 * p * p, |m| v_frak_p_pow_minus(sigma, m, &one, ctx))?;
            Plan { p, m, kind: lattes(p) }
        }
        DynAffineMap::LattesSupersingular(SupersingularSigma::Pair { sigma, .. }) => {
            let one = sigma.int_like(1);
            let m = least_m(1, p * p, |m| v_p_big(&sigma.pow(m).sub(&one).norm(), p))?;
            Plan { p, m, kind: lattes(p * p) }
        }
        DynAffineMap::LattesSupersingular(SupersingularSigma::Quaternion { sigma, .. }) => {
            let one = sigma.int_like(1);
            let t = match p {
                2 => 3,
                3 => 2,
                _ => 1,
            };
            let m = least_m(t, 1000, |m| v_i(&sigma.pow(m).sub(&one)))?;
            Plan { p, m, kind: lattes(p * p) }
        }
        DynAffineMap::Additive { sigma, .. } | DynAffineMap::Subadditive { sigma, .. } => {
            let m = constant_term_order(sigma)?
                .ok_or_else(|| Error::InvalidInput("constant term is transcendental".into()))?;
            let w = v_phi_pow_minus(sigma, m, &sigma.ctx().el_one())?.ok_or(Error::Infinite)?;
            Plan { p, m, kind: PlanKind::Additive { w, d: group_order(map) } }
        }
    })
}

/// Target exponent `w p^(v_p(l - 1))` for the additive recipe.
fn additive_exponent(w: u64, p: u64, ell: u64) -> u64 {
    w * num_traits::pow(p, v_p_u64(ell - 1, p) as usize)
}

/// `p^(a p^a)`, or `None` past `u64`.
fn tower_bound(a: u64, p: u64) -> Option<u64> {
    let e = p.checked_pow(u32::try_from(a).ok()?)?.checked_mul(a)?;
    p.checked_pow(u32::try_from(e).ok()?)
}

struct Admissible {
    primes: Vec<u64>,
    heuristic: bool,
}

/// The `gamma = 1` kernel and the rest of the orbit sum at `n`, mod `l`.
fn split_terms(map: &DynAffineMap, n: u64, ell: u64) -> Result<(u64, u64)> {
    let terms = kernel_terms_mod(map, n, ell)?;
    let id = identity_index(map).ok_or_else(|| Error::InvalidInput("no identity term".into()))?;
    let rest = terms.iter().enumerate().filter(|(i, _)| *i != id).fold(0u64, |acc, (_, &t)| (acc + t) % ell);
    Ok((terms[id], rest))
}

/// First reason `ell` is not admissible, or `None`.
fn inadmissible(map: &DynAffineMap, plan: &Plan, ell: u64, ignore_bound: bool) -> Result<Option<String>> {
    let p = plan.p;
    if ell <= p {
        return Ok(Some("l > p".into()));
    }
    let g = group_order(map);
    if g % ell == 0 {
        return Ok(Some("l prime to |Gamma|".into()));
    }
    match &plan.kind {
        PlanKind::Multiplicative { a, beta, congruence: (modulus, residues), .. } => {
            if !residues.contains(&(ell % modulus)) {
                return Ok(Some(format!("l = {residues:?} mod {modulus}")));
            }
            if a % ell == 1 {
                return Ok(Some(format!("{a} != 1 mod l")));
            }
            if !unit_mod(map, ell) {
                return Ok(Some("sigma invertible mod l".into()));
            }
            let (t, _) = split_terms(map, plan.m * beta, ell)?;
            if t == 0 {
                return Ok(Some(format!("l prime to #ker(sigma^{} - 1)", plan.m * beta)));
            }
            Ok(None)
        }
        PlanKind::Additive { w, .. } => {
            if p == 2 {
                if ell % 8 != 7 {
                    return Ok(Some("l = 7 mod 8".into()));
                }
            } else if (ell - 1) % p == 0 {
                return Ok(Some(format!("p = {p} prime to l - 1")));
            }
            if !ignore_bound {
                let a = additive_exponent(*w, p, ell);
                if tower_bound(a, p).map_or(true, |b| ell <= b) {
                    return Ok(Some(format!("l > p^(a p^a) with a = {a}")));
                }
            }
            Ok(None)
        }
    }
}

fn unit_mod(map: &DynAffineMap, ell: u64) -> bool {
    let l = BigInt::from(ell);
    match map {
        DynAffineMap::Power { d, .. } | DynAffineMap::Chebyshev { d, .. } => d.unsigned_abs() % ell != 0,
        DynAffineMap::LattesGenericJ { sigma, .. } => sigma.unsigned_abs() % ell != 0,
        DynAffineMap::LattesOrdinary { sigma, .. } | DynAffineMap::LattesSupersingular(SupersingularSigma::Pair { sigma, .. }) => {
            !(sigma.norm() % &l).is_zero()
        }
        DynAffineMap::LattesSupersingular(SupersingularSigma::Quaternion { sigma, .. }) => !(sigma.norm() % &l).is_zero(),
        DynAffineMap::Additive { .. } | DynAffineMap::Subadditive { .. } => true,
    }
}

/// The least `count` admissible primes, searching upward from `p + 1`.
fn admissible_ells(map: &DynAffineMap, plan: &Plan, count: usize) -> Result<Admissible> {
    let mut primes = Vec::new();
    let mut last_reason = String::from("no candidate");
    let mut ell = plan.p + 1;
    while ell < ELL_CAP && primes.len() < count {
        if is_prime(ell) {
            match inadmissible(map, plan, ell, false)? {
                None => primes.push(ell),
                Some(r) => last_reason = r,
            }
        }
        ell += 1;
    }
    if !primes.is_empty() {
        return Ok(Admissible { primes, heuristic: false });
    }
    if let PlanKind::Additive { .. } = plan.kind {
        // the size bound is out of reach: fall back to the largest primes
        // meeting the congruence conditions
        let mut ell = ELL_CAP;
        while ell > plan.p && primes.len() < count {
            if is_prime(ell) && inadmissible(map, plan, ell, true)?.is_none() {
                primes.push(ell);
            }
            ell -= 1;
        }
        if !primes.is_empty() {
            return Ok(Admissible { primes, heuristic: true });
        }
    }
    Err(Error::NoAdmissibleEll { cap: ELL_CAP, constraint: last_reason })
}

/// Order of `sigma^m` in `(O / l O)^*`, a divisor of `l (l^2 - 1)`.
fn unit_order<E: OrderElem>(sigma: &E, m: u64, ell: u64) -> Result<u64> {
    let l = BigInt::from(ell);
    let x = pow_mod_elem(sigma, m, &l);
    let one = sigma.int_like(1).reduce(&l);
    let is_one = |e: u64| pow_mod_elem(&x, e, &l) == one;
    let mut order = ell
        .checked_mul(ell * ell - 1)
        .ok_or(Error::ScaleExceeded { what: "unit group order", value: ell as u128, limit: u64::MAX as u128 })?;
    if !is_one(order) {
        return Err(Error::Mismatch(format!("sigma^{m} has order not dividing l (l^2 - 1) mod {ell}")));
    }
    for (q, _) in factor_u64(order) {
        while order % q == 0 && is_one(order / q) {
            order /= q;
        }
    }
    Ok(order)
}

fn alpha_for(map: &DynAffineMap, plan: &Plan, ell: u64) -> Result<u64> {
    match map {
        DynAffineMap::LattesOrdinary { sigma, .. } | DynAffineMap::LattesSupersingular(SupersingularSigma::Pair { sigma, .. }) => {
            unit_order(sigma, plan.m, ell)
        }
        DynAffineMap::LattesSupersingular(SupersingularSigma::Quaternion { sigma, .. }) => unit_order(sigma, plan.m, ell),
        _ => Ok(ell - 1),
    }
}

fn derive_b(map: &DynAffineMap, m: u64, ell: u64, recipe: &Recipe, n: u64) -> Result<u64> {
    let index = |k: u128| -> Result<u64> {
        u64::try_from(k * m as u128).map_err(|_| Error::ScaleExceeded { what: "iterate index", value: k, limit: u64::MAX as u128 })
    };
    match *recipe {
        Recipe::Multiplicative { alpha, beta, boundary, group, rest, scale } => {
            let a = per_n_closed_mod(map, index(alpha as u128 * n as u128 + beta as u128)?, ell)?;
            let x = ((a + ell - boundary % ell) % ell * group % ell + ell - rest) % ell;
            if x == 0 {
                return Err(Error::Mismatch(format!("kernel term vanishes mod {ell} at n = {n}")));
            }
            Ok((scale as u128 * inv_mod(x, ell) as u128 % ell as u128) as u64)
        }
        Recipe::Additive { d } => {
            if n == 0 {
                return Ok(0);
            }
            let a = per_n_closed_mod(map, index((ell - 1) as u128 * n as u128)?, ell)?;
            let x = ((d % ell) * ((a + ell - 1) % ell) % ell + ell - (d - 1) % ell) % ell;
            if x == 0 {
                return Err(Error::Mismatch(format!("kernel term vanishes mod {ell} at n = {n}")));
            }
            Ok(inv_mod(x, ell))
        }
    }
}

/// Deepest level `e <= max` with `k^e * prefix <= budget`.
fn affordable_depth(k: u64, prefix: usize, budget: u64, max: u32) -> u32 {
    let mut e = 0;
    while e < max && (k as u128).pow(e + 1) * prefix as u128 <= budget as u128 {
        e += 1;
    }
    e
}

fn build(map: &DynAffineMap, plan: &Plan, ell: u64, heuristic: bool, effort: &Effort) -> Result<Certificate> {
    let p = plan.p;
    let (recipe, target) = match &plan.kind {
        PlanKind::Multiplicative { a, beta, .. } => {
            let alpha = alpha_for(map, plan, ell)?;
            if v_p_u64(alpha, p) > v_p_u64(*beta, p) {
                return Err(Error::Mismatch(format!("v_p(alpha) > v_p(beta) for alpha = {alpha}")));
            }
            let n0 = plan.m * beta;
            let (t, rest) = split_terms(map, n0, ell)?;
            let scale = (pow_mod(*a, v_p_u64(*beta, p), ell) as u128 * t as u128 % ell as u128) as u64;
            let recipe =
                Recipe::Multiplicative { alpha, beta: *beta, boundary: map.boundary(n0), group: group_order(map), rest, scale };
            (recipe, Target::Valuation { a: *a, p, alpha, beta: *beta })
        }
        PlanKind::Additive { w, d } => (Recipe::Additive { d: *d }, Target::Tower { a: additive_exponent(*w, p, ell), p }),
    };
    let l_depth = affordable_depth(ell, DEFAULT_PREFIX, effort.kernel_budget, effort.max_depth);
    let explore_len = if l_depth > 0 { (ell as usize).pow(l_depth) * DEFAULT_PREFIX } else { 0 };
    let mut len = effort.prefix.max(explore_len);
    let mut b = (0..len as u64).map(|n| derive_b(map, plan.m, ell, &recipe, n)).collect::<Result<Vec<_>>>()?;
    // a valuation sequence looks periodic until p-adic digits beyond the
    // prefix matter, so the recorded prefix doubles until the detector clears
    let mut keep = effort.prefix;
    while eventual_period_detect(&b[..keep]).is_some() && keep < PERIOD_PREFIX_MAX {
        keep = (2 * keep).min(PERIOD_PREFIX_MAX);
        if keep > len {
            let more = (len as u64..keep as u64).map(|n| derive_b(map, plan.m, ell, &recipe, n)).collect::<Result<Vec<_>>>()?;
            b.extend(more);
            len = keep;
        }
    }
    for (n, &x) in b.iter().enumerate() {
        let t = target.at(n as u64, ell);
        if x != t {
            return Err(Error::Mismatch(format!("b_{n} = {x} differs from the valuation sequence value {t} (l = {ell})")));
        }
    }
    if !heuristic {
        // the valuation sequence must meet its own hypotheses
        let check = match target {
            Target::Valuation { a, p, alpha, beta } => prop78_sequence(a, p, ell, alpha as i64, beta as i64, 64)?,
            Target::Tower { a, p } => prop79_sequence(a, p, ell, 64)?,
        };
        if check.terms[..] != b[..64] {
            return Err(Error::Mismatch("b disagrees with the valuation sequence".into()));
        }
    }
    let ell_kernel = (l_depth > 0).then(|| {
        let seq = |n: u64| b[n as usize];
        kernel_explore(&seq, ell, l_depth, DEFAULT_PREFIX)
    });
    let p_kernel = kernel_closure(&|n| target.source(n, ell), p, P_KERNEL_DEPTH, DEFAULT_PREFIX);
    let b_prefix = b[..keep].to_vec();
    let period = eventual_period_detect(&b_prefix);
    Ok(Certificate { p, m: plan.m, ell, recipe, target, b: b_prefix, period, ell_kernel, p_kernel, heuristic })
}
