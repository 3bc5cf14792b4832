//! Job files and their translation into library values.

use affine_zeta::dynmap::RatMap;
use affine_zeta::elliptic::EllipticCurve;
use affine_zeta::families::{DynAffineMap, GenericJKernel, SupersingularSigma, DEFAULT_GENERIC_J_KERNEL};
use affine_zeta::field::{field_make, Ctx, FieldCtx, FieldElem, Poly, RatFn};
use affine_zeta::orders::{PrimeContext, QuadElem, QuadRing, QuatElem, QuatOrder};
use affine_zeta::twisted::TwistedPoly;
use affine_zeta::zeta::Effort;
use affine_zeta::{Error, Result};
use serde::{Deserialize, Serialize};

pub const SCHEMA: &str = "affine-zeta/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Count,
    Zeta,
    Verdict,
    Oracle,
    Automata,
    Census,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobSpec {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<MapSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub automata: Option<AutomataSpec>,
    #[serde(default)]
    pub range: RangeSpec,
    #[serde(default)]
    pub effort: EffortSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

/// A field element: an integer, or a polynomial in the generator (the
/// adjoined root for `F_(p^k)`, `u` for `F_p(u)`), ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coeff {
    Int(i64),
    Poly(Vec<i64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    #[default]
    Finite,
    RationalFunction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub p: u64,
    #[serde(default = "one")]
    pub k: usize,
    /// Monic modulus for `F_(p^k)`, ascending, length `k + 1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<Vec<u64>>,
    #[serde(default)]
    pub kind: FieldKind,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RingSpec {
    Named(String),
    Params { t: i64, n: i64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelSpec {
    Squared,
    Unsquared,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    Power {
        p: u64,
        d: i64,
    },
    Chebyshev {
        p: u64,
        d: i64,
    },
    /// `sigma = sum sigma_i phi^i`, plus a translation.
    Additive {
        field: FieldSpec,
        sigma: Vec<Coeff>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        translation: Option<Coeff>,
    },
    Subadditive {
        field: FieldSpec,
        sigma: Vec<Coeff>,
        d: u64,
    },
    LattesGenericJ {
        p: u64,
        sigma: i64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        kernel: Option<KernelSpec>,
        /// `[a, b]` for `y^2 = x^3 + a x + b`; enables the brute-force oracle.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        curve: Option<[i64; 2]>,
    },
    LattesOrdinary {
        p: u64,
        ring: RingSpec,
        sigma: [i64; 2],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gammas: Option<Vec<[i64; 2]>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        root: Option<u64>,
    },
    LattesPair {
        p: u64,
        ring: RingSpec,
        sigma: [i64; 2],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gammas: Option<Vec<[i64; 2]>>,
    },
    /// Doubled coordinates: `(x0 + x1 i + x2 j + x3 k) / 2`.
    LattesQuaternion {
        p: u64,
        sigma: [i64; 4],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gammas: Option<Vec<[i64; 4]>>,
    },
    /// Any rational map `num / den`; only the brute-force verbs apply.
    Raw {
        field: FieldSpec,
        num: Vec<Coeff>,
        #[serde(default = "den_one")]
        den: Vec<Coeff>,
    },
}

fn den_one() -> Vec<Coeff> {
    vec![Coeff::Int(1)]
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AutomataSpec {
    /// Power-series root of `P(t, y)` over `F_p`; `poly[j]` is the
    /// coefficient of `y^j` as ascending powers of `t`.
    Christol {
        p: u64,
        poly: Vec<Vec<i64>>,
        prefix: Vec<i64>,
        terms: usize,
        #[serde(default = "kernel_depth")]
        depth: u32,
    },
    /// `a^(v_p(alpha n + beta)) mod ell`.
    Valuation {
        a: u64,
        p: u64,
        ell: u64,
        #[serde(default = "alpha_one")]
        alpha: i64,
        #[serde(default)]
        beta: i64,
        #[serde(default = "kernel_depth")]
        depth: u32,
    },
    /// Transcendence certificate for the job's map.
    Certificate,
}

fn kernel_depth() -> u32 {
    4
}

fn alpha_one() -> i64 {
    1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSpec {
    #[serde(default = "n_min")]
    pub n_min: u64,
    #[serde(default = "n_max")]
    pub n_max: u64,
    /// Zeta coefficients after `c_0`.
    #[serde(default = "terms")]
    pub terms: usize,
    /// Extension degree for the cycle census.
    #[serde(default = "max_k")]
    pub max_k: usize,
}

fn n_min() -> u64 {
    1
}
fn n_max() -> u64 {
    8
}
fn terms() -> usize {
    30
}
fn max_k() -> usize {
    4
}

impl Default for RangeSpec {
    fn default() -> Self {
        RangeSpec { n_min: n_min(), n_max: n_max(), terms: terms(), max_k: max_k() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffortSpec {
    #[serde(default = "prefix")]
    pub prefix: usize,
    #[serde(default = "extra_ells")]
    pub extra_ells: usize,
    #[serde(default)]
    pub seed: u64,
}

fn prefix() -> usize {
    Effort::default().prefix
}
fn extra_ells() -> usize {
    Effort::default().extra_ells
}

impl Default for EffortSpec {
    fn default() -> Self {
        EffortSpec { prefix: prefix(), extra_ells: extra_ells(), seed: 0 }
    }
}

impl EffortSpec {
    pub fn effort(&self) -> Effort {
        Effort { prefix: self.prefix, extra_ells: self.extra_ells, seed: self.seed, ..Effort::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Jsonl,
    Table,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub format: Format,
    /// Write here instead of stdout.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

/// What a map description turns into.
pub struct Built {
    pub family: Option<DynAffineMap>,
    /// A concrete rational map, when one is available for the oracle.
    pub rational: Option<RatMap>,
    pub label: String,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

impl FieldSpec {
    pub fn ctx(&self) -> Result<Ctx> {
        match self.kind {
            FieldKind::RationalFunction => {
                if self.k != 1 || self.modulus.is_some() {
                    return Err(invalid("F_p(u) takes no extension degree or modulus"));
                }
                FieldCtx::rational_function(self.p)
            }
            FieldKind::Finite => match &self.modulus {
                None => field_make(self.p, self.k, None),
                Some(m) => {
                    if m.len() != self.k + 1 || m.last() != Some(&1) {
                        return Err(invalid(format!("modulus must be monic of degree {}", self.k)));
                    }
                    let want: Vec<u64> = m.iter().map(|&c| c % self.p).collect();
                    let base = field_make(self.p, 1, None)?;
                    if self.k < 2 || !Poly::from_coeffs(&base, want.clone()).is_irreducible() {
                        return Err(invalid("modulus must be irreducible of degree at least 2"));
                    }
                    let mut seed = 0;
                    loop {
                        let f = field_make(self.p, self.k, Some(seed))?;
                        if f.modulus() == Some(&want[..]) {
                            return Ok(f);
                        }
                        seed += 1;
                    }
                }
            },
        }
    }
}

fn elem(ctx: &Ctx, c: &Coeff) -> Result<FieldElem> {
    let p = ctx.p() as i64;
    match (ctx.is_finite(), c) {
        (_, Coeff::Int(n)) => Ok(ctx.el_int(*n)),
        (true, Coeff::Poly(v)) => {
            if v.len() > ctx.k() {
                return Err(invalid(format!("element {v:?} has more than k = {} coordinates", ctx.k())));
            }
            Ok(FieldElem::Fin(v.iter().rev().fold(0u64, |acc, &a| acc * p as u64 + a.rem_euclid(p) as u64)))
        }
        (false, Coeff::Poly(v)) => Ok(FieldElem::Fun(RatFn::from_poly_ints(ctx.p(), v))),
    }
}

fn finite(ctx: &Ctx, c: &Coeff) -> Result<u64> {
    elem(ctx, c)?.as_finite().ok_or_else(|| invalid("rational maps need a finite field"))
}

fn twisted(field: &FieldSpec, sigma: &[Coeff]) -> Result<(Ctx, TwistedPoly)> {
    let ctx = field.ctx()?;
    let c = sigma.iter().map(|c| elem(&ctx, c)).collect::<Result<Vec<_>>>()?;
    Ok((ctx.clone(), TwistedPoly::new(&ctx, c)))
}

fn ring(r: &RingSpec) -> Result<QuadRing> {
    match r {
        RingSpec::Named(s) if s == "gaussian" => Ok(QuadRing::gaussian()),
        RingSpec::Named(s) if s == "eisenstein" => Ok(QuadRing::eisenstein()),
        RingSpec::Named(s) => Err(invalid(format!("unknown ring {s:?}; use gaussian, eisenstein or {{t, n}}"))),
        RingSpec::Params { t, n } => QuadRing::new(*t, *n),
    }
}

fn quad_gammas(r: QuadRing, g: &Option<Vec<[i64; 2]>>) -> Vec<QuadElem> {
    match g {
        Some(list) => list.iter().map(|&[a, b]| r.elem(a, b)).collect(),
        None => vec![r.int(1), r.int(-1)],
    }
}

impl MapSpec {
    pub fn build(&self) -> Result<Built> {
        use affine_zeta::families::{realize, realize_on_curve};
        let family = match self {
            MapSpec::Power { p, d } => DynAffineMap::power(*p, *d)?,
            MapSpec::Chebyshev { p, d } => DynAffineMap::chebyshev(*p, *d)?,
            MapSpec::Additive { field, sigma, translation } => {
                let (ctx, s) = twisted(field, sigma)?;
                let t = translation.as_ref().map(|c| elem(&ctx, c)).transpose()?.unwrap_or_else(|| ctx.el_zero());
                DynAffineMap::additive(s, t)?
            }
            MapSpec::Subadditive { field, sigma, d } => DynAffineMap::subadditive(twisted(field, sigma)?.1, *d)?,
            MapSpec::LattesGenericJ { p, sigma, kernel, curve } => {
                let k = match kernel {
                    Some(KernelSpec::Squared) => GenericJKernel::Squared,
                    Some(KernelSpec::Unsquared) => GenericJKernel::Unsquared,
                    None => DEFAULT_GENERIC_J_KERNEL,
                };
                let map = DynAffineMap::lattes_generic_j(*p, *sigma)?.with_generic_j_kernel(k);
                if let Some([a, b]) = curve {
                    let e = EllipticCurve::new(*p, *a, *b)?;
                    let f = realize_on_curve(&map, &e)?;
                    let label = format!("{map} on y^2 = x^3 + {a}x + {b}");
                    return Ok(Built { family: Some(map), rational: Some(f), label });
                }
                map
            }
            MapSpec::LattesOrdinary { p, ring: r, sigma, gammas, root } => {
                let r = ring(r)?;
                let ctx = PrimeContext::ordinary(r, *p, *root)?;
                DynAffineMap::lattes_ordinary(r.elem(sigma[0], sigma[1]), ctx, quad_gammas(r, gammas))?
            }
            MapSpec::LattesPair { p, ring: r, sigma, gammas } => {
                let r = ring(r)?;
                DynAffineMap::lattes_supersingular(SupersingularSigma::Pair {
                    p: *p,
                    sigma: r.elem(sigma[0], sigma[1]),
                    gammas: quad_gammas(r, gammas),
                })?
            }
            MapSpec::LattesQuaternion { p, sigma, gammas } => {
                let o = QuatOrder::for_prime(*p)?;
                let gammas = match gammas {
                    Some(list) => list.iter().map(|&x| o.half(x)).collect::<Result<Vec<QuatElem>>>()?,
                    None => vec![o.int(1), o.int(-1)],
                };
                DynAffineMap::lattes_supersingular(SupersingularSigma::Quaternion { sigma: o.half(*sigma)?, gammas })?
            }
            MapSpec::Raw { field, num, den } => {
                let ctx = field.ctx()?;
                let poly = |c: &[Coeff]| -> Result<Poly> {
                    Ok(Poly::from_coeffs(&ctx, c.iter().map(|c| finite(&ctx, c)).collect::<Result<Vec<_>>>()?))
                };
                let f = RatMap::new(poly(num)?, poly(den)?)?;
                let label = format!("raw map of degree {} over F_{}", f.degree(), ctx.q());
                return Ok(Built { family: None, rational: Some(f), label });
            }
        };
        let rational = match realize(&family) {
            Ok(f) => Some(f),
            Err(Error::NotRealizable(_) | Error::ScaleExceeded { .. }) => None,
            Err(e) => return Err(e),
        };
        Ok(Built { label: family.to_string(), family: Some(family), rational })
    }
}

impl JobSpec {
    /// Structural checks that do not need the library.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let needs_map = !matches!(self.command, Command::Automata)
            || matches!(self.automata, Some(AutomataSpec::Certificate));
        if needs_map && self.map.is_none() {
            return Err(format!("{:?} needs a map", self.command).to_lowercase());
        }
        if self.command == Command::Automata && self.automata.is_none() {
            return Err("automata needs an automata section".into());
        }
        if self.range.n_min == 0 || self.range.n_min > self.range.n_max {
            return Err(format!("bad n range {}..={}", self.range.n_min, self.range.n_max));
        }
        if self.range.terms == 0 || self.range.max_k == 0 {
            return Err("terms and max_k must be positive".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn coeff() -> impl Strategy<Value = Coeff> {
        prop_oneof![any::<i64>().prop_map(Coeff::Int), prop::collection::vec(-9i64..9, 0..4).prop_map(Coeff::Poly)]
    }

    fn field() -> impl Strategy<Value = FieldSpec> {
        (2u64..50, 1usize..4, prop::option::of(prop::collection::vec(0u64..5, 2..5)), any::<bool>()).prop_map(
            |(p, k, modulus, fun)| FieldSpec {
                p,
                k,
                modulus,
                kind: if fun { FieldKind::RationalFunction } else { FieldKind::Finite },
            },
        )
    }

    fn map() -> impl Strategy<Value = MapSpec> {
        let ring = prop_oneof![
            Just(RingSpec::Named("gaussian".into())),
            (-3i64..3, 1i64..5).prop_map(|(t, n)| RingSpec::Params { t, n })
        ];
        prop_oneof![
            (any::<u64>(), any::<i64>()).prop_map(|(p, d)| MapSpec::Power { p, d }),
            (any::<u64>(), any::<i64>()).prop_map(|(p, d)| MapSpec::Chebyshev { p, d }),
            (field(), prop::collection::vec(coeff(), 0..4), prop::option::of(coeff()))
                .prop_map(|(field, sigma, translation)| MapSpec::Additive { field, sigma, translation }),
            (field(), prop::collection::vec(coeff(), 0..4), any::<u64>())
                .prop_map(|(field, sigma, d)| MapSpec::Subadditive { field, sigma, d }),
            (any::<u64>(), any::<i64>(), prop::option::of(prop_oneof![Just(KernelSpec::Squared), Just(KernelSpec::Unsquared)]),
                prop::option::of(any::<[i64; 2]>()))
                .prop_map(|(p, sigma, kernel, curve)| MapSpec::LattesGenericJ { p, sigma, kernel, curve }),
            (any::<u64>(), ring.clone(), any::<[i64; 2]>(), prop::option::of(prop::collection::vec(any::<[i64; 2]>(), 0..4)),
                prop::option::of(any::<u64>()))
                .prop_map(|(p, ring, sigma, gammas, root)| MapSpec::LattesOrdinary { p, ring, sigma, gammas, root }),
            (any::<u64>(), ring, any::<[i64; 2]>(), prop::option::of(prop::collection::vec(any::<[i64; 2]>(), 0..4)))
                .prop_map(|(p, ring, sigma, gammas)| MapSpec::LattesPair { p, ring, sigma, gammas }),
            (any::<u64>(), any::<[i64; 4]>(), prop::option::of(prop::collection::vec(any::<[i64; 4]>(), 0..4)))
                .prop_map(|(p, sigma, gammas)| MapSpec::LattesQuaternion { p, sigma, gammas }),
            (field(), prop::collection::vec(coeff(), 0..4), prop::collection::vec(coeff(), 0..4))
                .prop_map(|(field, num, den)| MapSpec::Raw { field, num, den }),
        ]
    }

    fn automata() -> impl Strategy<Value = AutomataSpec> {
        prop_oneof![
            Just(AutomataSpec::Certificate),
            (any::<u64>(), prop::collection::vec(prop::collection::vec(-3i64..3, 0..3), 0..3),
                prop::collection::vec(-3i64..3, 0..3), any::<usize>(), any::<u32>())
                .prop_map(|(p, poly, prefix, terms, depth)| AutomataSpec::Christol { p, poly, prefix, terms, depth }),
            (any::<u64>(), any::<u64>(), any::<u64>(), any::<i64>(), any::<i64>(), any::<u32>())
                .prop_map(|(a, p, ell, alpha, beta, depth)| AutomataSpec::Valuation { a, p, ell, alpha, beta, depth }),
        ]
    }

    fn job() -> impl Strategy<Value = JobSpec> {
        let command = prop_oneof![
            Just(Command::Count),
            Just(Command::Zeta),
            Just(Command::Verdict),
            Just(Command::Oracle),
            Just(Command::Automata),
            Just(Command::Census)
        ];
        (
            command,
            prop::option::of(map()),
            prop::option::of(automata()),
            (any::<u64>(), any::<u64>(), any::<usize>(), any::<usize>()),
            (any::<usize>(), any::<usize>(), any::<u64>()),
            (any::<bool>(), prop::option::of("[a-z/]{1,12}")),
        )
            .prop_map(|(command, map, automata, r, e, o)| JobSpec {
                command,
                map,
                automata,
                range: RangeSpec { n_min: r.0, n_max: r.1, terms: r.2, max_k: r.3 },
                effort: EffortSpec { prefix: e.0, extra_ells: e.1, seed: e.2 },
                output: OutputSpec { format: if o.0 { Format::Table } else { Format::Jsonl }, path: o.1 },
            })
    }

    proptest! {
        #[test]
        fn job_spec_round_trips(j in job()) {
            let text = serde_json::to_string(&j).unwrap();
            let back: JobSpec = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(back, j);
        }
    }

    #[test]
    fn committed_jobs_parse_and_validate() {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("jobs");
        let mut n = 0;
        for entry in std::fs::read_dir(dir).unwrap() {
            let text = std::fs::read_to_string(entry.unwrap().path()).unwrap();
            let j: JobSpec = serde_json::from_str(&text).unwrap();
            j.validate().unwrap();
            j.map.as_ref().map(|m| m.build().unwrap());
            n += 1;
        }
        assert_eq!(n, 3);
    }
}
