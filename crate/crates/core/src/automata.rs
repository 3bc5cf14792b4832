//! Automatic sequences: DFAOs read least-significant digit first, base-k
//! kernel exploration on finite prefixes, power-series roots of algebraic
//! equations over `F_p(t)`, and eventual-periodicity detection.
//!
//! Kernel reports are evidence only. Two subsequences are merged when their
//! first `L` terms agree.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::field::{inv_mod, is_prime, pow_mod};
use crate::orders::v_p_u64;

pub const DEFAULT_PREFIX: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfao {
    base: u64,
    transitions: Vec<Vec<usize>>,
    outputs: Vec<u64>,
    initial: usize,
}

impl Dfao {
    /// `transitions[s][digit]` is the next state. Every reachable state must
    /// keep its output after reading a zero.
    pub fn new(base: u64, transitions: Vec<Vec<usize>>, outputs: Vec<u64>, initial: usize) -> Result<Dfao> {
        if base < 2 {
            return Err(Error::InvalidInput("base must be at least 2".into()));
        }
        let n = transitions.len();
        if n == 0 || outputs.len() != n || initial >= n {
            return Err(Error::InvalidInput("states, outputs and initial state disagree".into()));
        }
        for row in &transitions {
            if row.len() != base as usize || row.iter().any(|&s| s >= n) {
                return Err(Error::InvalidInput("transition table is not total".into()));
            }
        }
        let mut seen = vec![false; n];
        let mut stack = vec![initial];
        seen[initial] = true;
        while let Some(s) = stack.pop() {
            if outputs[transitions[s][0]] != outputs[s] {
                return Err(Error::InvalidInput(format!("state {s} changes output on a trailing zero")));
            }
            for &t in &transitions[s] {
                if !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        Ok(Dfao { base, transitions, outputs, initial })
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn states(&self) -> usize {
        self.transitions.len()
    }

    /// Reads `digits` from the initial state.
    pub fn run(&self, digits: &[u64]) -> u64 {
        let s = digits.iter().fold(self.initial, |s, &d| self.transitions[s][d as usize]);
        self.outputs[s]
    }
}

pub fn dfao_eval(a: &Dfao, mut n: u64) -> u64 {
    let mut s = a.initial;
    while n > 0 {
        s = a.transitions[s][(n % a.base) as usize];
        n /= a.base;
    }
    a.outputs[s]
}

/// Base-k digits of `n`, least significant first.
pub fn digits(mut n: u64, k: u64) -> Vec<u64> {
    let mut out = Vec::new();
    while n > 0 {
        out.push(n % k);
        n /= k;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelClassification {
    Closed,
    Growing,
}

/// Two kernel elements `a_(k^e n + r)` told apart at index `index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KernelWitness {
    pub first: (u32, u128),
    pub second: (u32, u128),
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelReport {
    pub base: u64,
    pub depth: u32,
    pub prefix_len: usize,
    /// Cumulative number of classes after depths `0..=depth`.
    pub class_counts: Vec<usize>,
    pub classification: KernelClassification,
    /// Depth of the last new class, when the report is closed.
    pub closed_at: Option<u32>,
    /// `(e, r)` of the first subsequence seen in each class.
    pub representatives: Vec<(u32, u128)>,
    /// Consecutive representatives and the first index where they differ.
    pub witnesses: Vec<KernelWitness>,
}

impl KernelReport {
    pub fn strictly_growing(&self) -> bool {
        self.class_counts.windows(2).all(|w| w[1] > w[0])
    }
}

/// Explores `n -> a_(k^e n + r)` for `e <= depth`, `0 <= r < k^e`, merging
/// subsequences whose first `prefix_len` terms agree.
///
/// Closed means two consecutive depths added no class.
pub fn kernel_explore(seq: &dyn Fn(u64) -> u64, k: u64, depth: u32, prefix_len: usize) -> KernelReport {
    let mut classes: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut reps: Vec<(u32, u128)> = Vec::new();
    let mut prefixes: Vec<Vec<u64>> = Vec::new();
    let mut counts = Vec::new();
    let mut ke = 1u64;
    for e in 0..=depth {
        for r in 0..ke {
            let pre: Vec<u64> = (0..prefix_len as u64).map(|n| seq(ke * n + r)).collect();
            if !classes.contains_key(&pre) {
                classes.insert(pre.clone(), reps.len());
                reps.push((e, r as u128));
                prefixes.push(pre);
            }
        }
        counts.push(reps.len());
        ke = ke.saturating_mul(k);
    }
    let mut closed_at = None;
    for e in 1..counts.len().saturating_sub(1) {
        if counts[e] == counts[e - 1] && counts[e + 1] == counts[e] {
            closed_at = Some((e - 1) as u32);
            break;
        }
    }
    let witnesses = prefixes
        .windows(2)
        .zip(reps.windows(2))
        .map(|(w, r)| KernelWitness {
            first: r[0],
            second: r[1],
            index: w[0].iter().zip(&w[1]).position(|(x, y)| x != y).unwrap_or(0),
        })
        .collect();
    KernelReport {
        base: k,
        depth,
        prefix_len,
        class_counts: counts,
        classification: if closed_at.is_some() { KernelClassification::Closed } else { KernelClassification::Growing },
        closed_at,
        representatives: reps,
        witnesses,
    }
}

/// Breadth-first closure of the `k`-kernel: only subsequences that opened a
/// new class are refined by `s -> s(k n + j)`. Stops once a level adds no
/// class, so deep levels cost nothing beyond their new classes.
///
/// `class_counts[e]` is cumulative over levels `0..=e`. Growing means
/// `max_depth` was reached with new classes still appearing. Residues in
/// the report are truncated to 128 bits.
pub fn kernel_closure(seq: &dyn Fn(&BigUint) -> u64, k: u64, max_depth: u32, prefix_len: usize) -> KernelReport {
    let mut classes: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut reps: Vec<(u32, u128)> = Vec::new();
    let mut prefixes: Vec<Vec<u64>> = Vec::new();
    let mut counts = Vec::new();
    let mut frontier: Vec<BigUint> = vec![BigUint::zero()];
    let mut ke = BigUint::one();
    let mut closed_at = None;
    for e in 0..=max_depth {
        let mut fresh = Vec::new();
        for r in frontier {
            let pre: Vec<u64> = (0..prefix_len as u64).map(|n| seq(&(&ke * n + &r))).collect();
            if !classes.contains_key(&pre) {
                classes.insert(pre.clone(), reps.len());
                reps.push((e, low_u128(&r)));
                prefixes.push(pre);
                fresh.push(r);
            }
        }
        counts.push(reps.len());
        if fresh.is_empty() {
            closed_at = Some(e.saturating_sub(1));
            break;
        }
        frontier = fresh.iter().flat_map(|r| (0..k).map(|j| r + &ke * j).collect::<Vec<_>>()).collect();
        ke *= k;
    }
    let witnesses = prefixes
        .windows(2)
        .zip(reps.windows(2))
        .map(|(w, r)| KernelWitness {
            first: r[0],
            second: r[1],
            index: w[0].iter().zip(&w[1]).position(|(x, y)| x != y).unwrap_or(0),
        })
        .collect();
    KernelReport {
        base: k,
        depth: counts.len() as u32 - 1,
        prefix_len,
        class_counts: counts,
        classification: if closed_at.is_some() { KernelClassification::Closed } else { KernelClassification::Growing },
        closed_at,
        representatives: reps,
        witnesses,
    }
}

fn low_u128(x: &BigUint) -> u128 {
    x.iter_u64_digits().take(2).enumerate().fold(0u128, |acc, (i, d)| acc | (d as u128) << (64 * i))
}

/// `P(t, y) = sum_j c_j(t) y^j` over `F_p`; `coeffs[j]` lists `c_j` by
/// ascending power of `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BivariatePoly {
    p: u64,
    coeffs: Vec<Vec<u64>>,
}

impl BivariatePoly {
    pub fn new(p: u64, coeffs: Vec<Vec<i64>>) -> Result<BivariatePoly> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let mut coeffs: Vec<Vec<u64>> = coeffs
            .into_iter()
            .map(|c| c.into_iter().map(|a| a.rem_euclid(p as i64) as u64).collect())
            .collect();
        while coeffs.last().is_some_and(|c| c.iter().all(|&a| a == 0)) {
            coeffs.pop();
        }
        if coeffs.len() < 2 {
            return Err(Error::InvalidInput("P must have positive degree in y".into()));
        }
        Ok(BivariatePoly { p, coeffs })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn y_degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `P(t, y) mod t^prec`.
    pub fn eval(&self, y: &[u64], prec: usize) -> Vec<u64> {
        let mut acc = vec![0u64; prec];
        for c in self.coeffs.iter().rev() {
            acc = series_mul(&acc, y, prec, self.p);
            for (i, &a) in c.iter().enumerate().take(prec) {
                acc[i] = (acc[i] + a) % self.p;
            }
        }
        acc
    }

    pub fn derivative_y(&self) -> BivariatePoly {
        let p = self.p;
        let coeffs = self.coeffs[1..]
            .iter()
            .enumerate()
            .map(|(j, c)| c.iter().map(|&a| a * ((j as u64 + 1) % p) % p).collect())
            .collect();
        BivariatePoly { p, coeffs }
    }
}

fn series_mul(a: &[u64], b: &[u64], prec: usize, p: u64) -> Vec<u64> {
    let mut out = vec![0u64; prec];
    for (i, &x) in a.iter().enumerate().take(prec) {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(prec - i) {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    out
}

fn series_inv(a: &[u64], prec: usize, p: u64) -> Vec<u64> {
    let a0inv = inv_mod(a[0], p);
    let mut b = vec![0u64; prec];
    b[0] = a0inv;
    for k in 1..prec {
        let mut s = 0u64;
        for i in 1..=k.min(a.len() - 1) {
            s = (s + a[i] * b[k - i]) % p;
        }
        b[k] = (p - s) % p * a0inv % p;
    }
    b
}

fn t_valuation(a: &[u64]) -> Option<usize> {
    a.iter().position(|&x| x != 0)
}

/// The power-series root of `P(t, y)` extending `prefix`, to `n` terms, by
/// Newton iteration in `F_p[[t]]`.
///
/// Needs `P(prefix) = 0 mod t^s` with `s = prefix.len()` and
/// `v_t(dP/dy(prefix)) = v` with `s > 2v`.
pub fn christol_series(poly: &BivariatePoly, prefix: &[i64], n: usize) -> Result<Vec<u64>> {
    let p = poly.p;
    let s = prefix.len();
    if s == 0 {
        return Err(Error::InvalidInput("empty prefix".into()));
    }
    let y0: Vec<u64> = prefix.iter().map(|&a| a.rem_euclid(p as i64) as u64).collect();
    if t_valuation(&poly.eval(&y0, s)).is_some() {
        return Err(Error::NotARoot(s));
    }
    let dp = poly.derivative_y();
    let v = match t_valuation(&dp.eval(&y0, s)) {
        Some(v) if s > 2 * v => v,
        _ => return Err(Error::SingularRoot(format!("dP/dy(prefix) has t-valuation >= {s}/2"))),
    };
    let target = n.max(s);
    let mut y = y0.clone();
    y.resize(target + v, 0);
    let mut prec = s;
    for _ in 0..64 {
        let work = (2 * prec).min(target + v);
        let f = poly.eval(&y, work + v);
        if t_valuation(&f).map_or(true, |e| e >= target) && prec >= target {
            break;
        }
        let df = dp.eval(&y, work + v);
        // both have valuation >= v; divide out t^v before inverting
        let num = &f[v..];
        let den = &df[v..];
        let delta = series_mul(num, &series_inv(den, work, p), work, p);
        for (i, d) in delta.iter().enumerate() {
            y[i] = (y[i] + p - d) % p;
        }
        prec = (2 * prec - 2 * v).max(prec + 1).min(target);
    }
    y.truncate(target);
    if t_valuation(&poly.eval(&y, target)).is_some() {
        return Err(Error::PrecisionExhausted(target as u32));
    }
    if y[..s] != y0[..] {
        return Err(Error::NotARoot(s));
    }
    y.truncate(n);
    Ok(y)
}

/// Least `(preperiod, period)` fitting the whole prefix with at least three
/// full periods after the preperiod, the periodic part covering at least
/// half the prefix. Smallest period first, then smallest preperiod.
pub fn eventual_period_detect(prefix: &[u64]) -> Option<(usize, usize)> {
    let len = prefix.len();
    if len < 16 {
        return None;
    }
    for q in 1..=len / 3 {
        // smallest s with prefix[i] == prefix[i + q] for all i >= s
        let mut s = len - q;
        while s > 0 && prefix[s - 1] == prefix[s - 1 + q] {
            s -= 1;
        }
        if len - s >= (3 * q).max(len.div_ceil(2)) {
            return Some((s, q));
        }
    }
    None
}

/// A sequence `a_n = g(v_p(...))` together with a base-`p` DFAO producing
/// it, when one is available.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValuationSequence {
    pub terms: Vec<u64>,
    /// `g(v)` for `v < preperiod + period`; `g` repeats with `period` after.
    pub values: Vec<u64>,
    pub preperiod: usize,
    pub period: usize,
    pub dfao: Option<Dfao>,
}

/// The DFAO reading `n` in base `p`, counting trailing zeros through the
/// eventually periodic table `values`. `n = 0` outputs 0.
fn valuation_dfao(p: u64, values: &[u64], preperiod: usize, period: usize) -> Result<Dfao> {
    // state 0..c-1: still in trailing zeros, i zeros seen
    // state c..2c-1: nonzero digit seen after i zeros
    let c = preperiod + period;
    let next = |i: usize| if i + 1 < c { i + 1 } else { preperiod };
    let mut trans = Vec::new();
    for i in 0..c {
        let mut row = vec![c + i; p as usize];
        row[0] = next(i);
        trans.push(row);
    }
    for i in 0..c {
        trans.push(vec![c + i; p as usize]);
    }
    let mut outputs = vec![0u64; c];
    outputs.extend_from_slice(&values[..c]);
    Dfao::new(p, trans, outputs, 0)
}

/// `a_n = a^(v_p(alpha n + beta)) mod ell`, with `a_n = 0` when
/// `alpha n + beta = 0`.
pub fn prop78_sequence(a: u64, p: u64, ell: u64, alpha: i64, beta: i64, length: usize) -> Result<ValuationSequence> {
    if !is_prime(p) || !is_prime(ell) {
        return Err(Error::HypothesisViolated("p and ell must be prime".into()));
    }
    if p == ell {
        return Err(Error::HypothesisViolated("p = ell".into()));
    }
    if a % ell == 1 || a % ell == 0 {
        return Err(Error::HypothesisViolated(format!("a = {a} is 0 or 1 mod {ell}")));
    }
    if alpha == 0 {
        return Err(Error::HypothesisViolated("alpha = 0".into()));
    }
    if beta != 0 && v_p_u64(alpha.unsigned_abs(), p) > v_p_u64(beta.unsigned_abs(), p) {
        return Err(Error::HypothesisViolated("v_p(alpha) > v_p(beta)".into()));
    }
    let d = crate::field::FieldCtx::prime(ell)?.order(a % ell)?;
    let values: Vec<u64> = (0..d).map(|v| pow_mod(a, v, ell)).collect();
    let terms = (0..length as i64)
        .map(|n| {
            let x = alpha as i128 * n as i128 + beta as i128;
            if x == 0 {
                0
            } else {
                values[(v_p_u128(x.unsigned_abs(), p) % d) as usize]
            }
        })
        .collect();
    let dfao = if alpha == 1 && beta == 0 { Some(valuation_dfao(p, &values, 0, d as usize)?) } else { None };
    Ok(ValuationSequence { terms, values, preperiod: 0, period: d as usize, dfao })
}

/// `a_n = p^(a p^(v_p(n))) mod ell` for `n >= 1`, with `a_0 = 0`.
pub fn prop79_sequence(a: u64, p: u64, ell: u64, length: usize) -> Result<ValuationSequence> {
    if !is_prime(p) || !is_prime(ell) {
        return Err(Error::HypothesisViolated("p and ell must be prime".into()));
    }
    if a == 0 {
        return Err(Error::HypothesisViolated("a must be positive".into()));
    }
    let bound = p
        .checked_pow(a as u32)
        .and_then(|x| x.checked_mul(a))
        .and_then(|e| u32::try_from(e).ok())
        .and_then(|e| p.checked_pow(e));
    if bound.map_or(true, |b| ell <= b) {
        return Err(Error::HypothesisViolated(format!("ell = {ell} is not above p^(a p^a)")));
    }
    if p == 2 {
        if ell % 8 != 7 {
            return Err(Error::HypothesisViolated("p = 2 needs ell = 7 mod 8".into()));
        }
    } else if (ell - 1) % p == 0 {
        return Err(Error::HypothesisViolated(format!("{p} divides ell - 1")));
    }
    let m = crate::field::FieldCtx::prime(ell)?.order(p % ell)?;
    // exponent a p^v mod m is eventually periodic in v
    let mut seen: HashMap<u64, usize> = HashMap::new();
    let mut exps = Vec::new();
    let mut x = a % m;
    while !seen.contains_key(&x) {
        seen.insert(x, exps.len());
        exps.push(x);
        x = x * (p % m) % m;
    }
    let preperiod = seen[&x];
    let period = exps.len() - preperiod;
    let values: Vec<u64> = exps.iter().map(|&e| pow_mod(p, e, ell)).collect();
    let g = |v: u64| {
        let v = v as usize;
        let i = if v < preperiod { v } else { preperiod + (v - preperiod) % period };
        values[i]
    };
    let terms = (0..length as u64).map(|n| if n == 0 { 0 } else { g(v_p_u64(n, p)) }).collect();
    let dfao = Some(valuation_dfao(p, &values, preperiod, period)?);
    Ok(ValuationSequence { terms, values, preperiod, period, dfao })
}

fn v_p_u128(mut n: u128, p: u64) -> u64 {
    let p = p as u128;
    let mut v = 0;
    while n > 0 && n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}
