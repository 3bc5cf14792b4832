//! The verbs. Each turns a validated job into output records.

use affine_zeta::automata::{
    christol_series, eventual_period_detect, kernel_closure, kernel_explore, prop78_sequence, BivariatePoly,
    KernelClassification, KernelReport,
};
use affine_zeta::dynmap::{census_points_dividing, cycle_census, per_n_oracle};
use affine_zeta::families::{per_n_closed, DynAffineMap};
use affine_zeta::zeta::{
    certificate_build, rationality_guess, verdict, zeta_from_counts, Certificate, Outcome, Recipe, RationalZeta, Target,
};
use affine_zeta::{Error, Result};
use num_bigint::{BigUint, ToBigUint};
use serde_json::{json, Map, Value};

use crate::job::{AutomataSpec, Built, Command, JobSpec, SCHEMA};

/// Records produced by a job, and whether a consistency check failed.
pub struct Report {
    pub records: Vec<Value>,
    pub mismatch: Option<String>,
}

/// Certificates list only this many `b` terms.
const B_SHOWN: usize = 64;

fn record(kind: &str, fields: Value) -> Value {
    let mut m = Map::new();
    m.insert("schema".into(), SCHEMA.into());
    m.insert("record".into(), kind.into());
    if let Value::Object(f) = fields {
        m.extend(f);
    }
    Value::Object(m)
}

fn s(x: impl ToString) -> Value {
    Value::String(x.to_string())
}

fn strings<T: ToString>(xs: impl IntoIterator<Item = T>) -> Value {
    Value::Array(xs.into_iter().map(s).collect())
}

fn family<'a>(built: &'a Built, what: &str) -> Result<&'a DynAffineMap> {
    built.family.as_ref().ok_or_else(|| Error::InvalidInput(format!("{what} needs a dynamically affine family, not a raw map")))
}

/// `None` when the iterate is out of scale or the map has no realization.
fn oracle(built: &Built, n: u64) -> Result<Option<u64>> {
    let Some(f) = &built.rational else { return Ok(None) };
    match per_n_oracle(f, n as u32) {
        Ok(c) => Ok(Some(c)),
        Err(Error::ScaleExceeded { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn run(job: &JobSpec) -> Result<Report> {
    let built = job.map.as_ref().map(|m| m.build()).transpose()?;
    let mut report = Report { records: Vec::new(), mismatch: None };
    let range = job.range.n_min..=job.range.n_max;
    match job.command {
        Command::Count => {
            let built = built.unwrap();
            for n in range {
                let closed = built.family.as_ref().map(|m| per_n_closed(m, n)).transpose()?;
                let orc = oracle(&built, n)?;
                let agree = match (&closed, orc) {
                    (Some(c), Some(o)) => Some(*c == BigUint::from(o)),
                    _ => None,
                };
                if agree == Some(false) && report.mismatch.is_none() {
                    report.mismatch = Some(format!("n = {n}: closed form {} but oracle {}", closed.clone().unwrap(), orc.unwrap()));
                }
                report.records.push(record(
                    "count",
                    json!({"map": built.label, "n": s(n), "closed": closed.map(s), "oracle": orc.map(s), "match": agree}),
                ));
            }
        }
        Command::Oracle => {
            let built = built.unwrap();
            if built.rational.is_none() {
                return Err(Error::NotRealizable(format!("{} has no concrete rational map", built.label)));
            }
            for n in range {
                let c = per_n_oracle(built.rational.as_ref().unwrap(), n as u32)?;
                report.records.push(record("oracle", json!({"map": built.label, "n": s(n), "per_n": s(c)})));
            }
        }
        Command::Zeta => {
            let built = built.unwrap();
            let counts = (1..=job.range.terms as u64)
                .map(|n| match &built.family {
                    Some(m) => per_n_closed(m, n),
                    None => per_n_oracle(built.rational.as_ref().unwrap(), n as u32).map(BigUint::from),
                })
                .collect::<Result<Vec<_>>>()?;
            let z = zeta_from_counts(&counts)?;
            let guess = rationality_guess(&counts).map(|g| {
                json!({
                    "recurrence": strings(&g.recurrence),
                    "closed_form": g.closed_form.as_ref().map(rational_json),
                })
            });
            report.records.push(record(
                "zeta",
                json!({
                    "map": built.label,
                    "source": if built.family.is_some() { "closed_form" } else { "oracle" },
                    "counts": strings(&counts),
                    "coefficients": strings(z.coeffs()),
                    "guess": guess,
                }),
            ));
        }
        Command::Verdict => {
            let built = built.unwrap();
            let map = family(&built, "verdict")?;
            let v = verdict(map, &job.effort.effort())?;
            let mut fields = json!({"map": built.label, "theorem": format!("{:?}", v.theorem()), "statement": v.theorem().to_string()});
            let f = fields.as_object_mut().unwrap();
            match &v.outcome {
                Outcome::RationalClosedForm { zeta, .. } => {
                    f.insert("outcome".into(), "rational".into());
                    f.insert("zeta".into(), rational_json(zeta));
                    if let Some(series) = &v.series {
                        f.insert("checked_terms".into(), s(series.len()));
                    }
                }
                Outcome::TranscendentalEvidence { m, ell, .. } => {
                    f.insert("outcome".into(), "transcendental_evidence".into());
                    f.insert("m".into(), s(m));
                    f.insert("ell".into(), s(ell));
                    let certs: Vec<Value> = v
                        .certificates()
                        .into_iter()
                        .map(|c| {
                            let (j, err) = certificate_json(c, map);
                            if let (Some(e), None) = (err, &report.mismatch) {
                                report.mismatch = Some(e);
                            }
                            j
                        })
                        .collect();
                    f.insert("certificates".into(), Value::Array(certs));
                }
            }
            report.records.push(record("verdict", fields));
        }
        Command::Census => {
            let built = built.unwrap();
            let f = built
                .rational
                .as_ref()
                .ok_or_else(|| Error::NotRealizable(format!("{} has no concrete rational map", built.label)))?;
            let hist = cycle_census(f, job.range.max_k, job.range.n_max as usize)?;
            let q = BigUint::from(f.ctx().p()).pow(job.range.max_k as u32);
            for &(len, cycles) in hist.iter().filter(|&&(len, _)| len as u64 >= job.range.n_min) {
                report.records.push(record(
                    "census",
                    json!({
                        "map": built.label,
                        "field_size": s(&q),
                        "period": s(len),
                        "cycles": s(cycles),
                        "points_dividing": s(census_points_dividing(&hist, len)),
                    }),
                ));
            }
        }
        Command::Automata => match job.automata.as_ref().unwrap() {
            AutomataSpec::Christol { p, poly, prefix, terms, depth } => {
                let bp = BivariatePoly::new(*p, poly.clone())?;
                let y = christol_series(&bp, prefix, *terms)?;
                let residual = bp.eval(&y, *terms).iter().all(|&c| c == 0);
                let prefix_len = kernel_prefix(*terms, *p, *depth)?;
                let k = kernel_explore(&|n| y[n as usize], *p, *depth, prefix_len);
                report.records.push(record(
                    "christol",
                    json!({"p": s(p), "terms": s(terms), "coefficients": strings(&y), "resubstitution_vanishes": residual}),
                ));
                report.records.push(record("kernel", kernel_json(&k)));
                if !residual {
                    report.mismatch = Some("series does not satisfy the equation".into());
                }
            }
            AutomataSpec::Valuation { a, p, ell, alpha, beta, depth } => {
                let prefix_len = 256;
                let len = (*ell as usize).pow(*depth) * prefix_len;
                if len > 50_000_000 {
                    return Err(Error::ScaleExceeded { what: "valuation sequence length", value: len as u128, limit: 50_000_000 });
                }
                let seq = prop78_sequence(*a, *p, *ell, *alpha, *beta, len.max(2000))?;
                let period = eventual_period_detect(&seq.terms[..2000]);
                let ell_kernel = kernel_explore(&|n| seq.terms[n as usize], *ell, *depth, prefix_len);
                                let v = |n: &BigUint| {
                    let x = BigUint::from(alpha.unsigned_abs()) * n + beta.unsigned_abs().to_biguint().unwrap();
                    if x == BigUint::ZERO {
                        return 0;
                    }
                    let mut e = 0u64;
                    let mut y = x;
                    let pb = BigUint::from(*p);
                    while (&y % &pb) == BigUint::ZERO {
                        y /= &pb;
                        e += 1;
                    }
                    seq.values[(e % seq.period as u64) as usize]
                };
                let p_kernel = kernel_closure(&v, *p, 400, prefix_len);
                report.records.push(record(
                    "valuation",
                    json!({
                        "a": s(a), "p": s(p), "ell": s(ell), "alpha": s(alpha), "beta": s(beta),
                        "values": strings(&seq.values),
                        "terms": strings(&seq.terms[..B_SHOWN]),
                        "period": period.map(|(s0, q)| strings([s0, q])),
                    }),
                ));
                report.records.push(record("kernel", kernel_json(&ell_kernel)));
                report.records.push(record("kernel", kernel_json(&p_kernel)));
            }
            AutomataSpec::Certificate => {
                let built = built.unwrap();
                let map = family(&built, "a certificate")?;
                let c = certificate_build(map, &job.effort.effort())?;
                let (mut j, err) = certificate_json(&c, map);
                j.as_object_mut().unwrap().insert("map".into(), built.label.clone().into());
                report.records.push(record("certificate", j));
                report.mismatch = err;
            }
        },
    }
    Ok(report)
}

/// Longest kernel prefix the computed terms support at `depth`.
fn kernel_prefix(terms: usize, k: u64, depth: u32) -> Result<usize> {
    let span = (k as usize).checked_pow(depth).unwrap_or(usize::MAX);
    match terms / span {
        0 => Err(Error::InvalidInput(format!("{terms} terms cannot feed a base-{k} kernel of depth {depth}"))),
        n => Ok(n.min(256)),
    }
}

fn rational_json(z: &RationalZeta) -> Value {
    json!({
        "numerator": strings(&z.numerator),
        "denominator": strings(&z.denominator),
        "factors": z.factors.iter().map(|(a, e)| json!({"alpha": s(a), "exponent": s(e)})).collect::<Vec<_>>(),
    })
}

fn kernel_json(k: &KernelReport) -> Value {
    json!({
        "base": s(k.base),
        "depth": s(k.depth),
        "prefix_len": s(k.prefix_len),
        "class_counts": strings(&k.class_counts),
        "classification": match k.classification {
            KernelClassification::Closed => "closed",
            KernelClassification::Growing => "growing",
        },
        "closed_at": k.closed_at.map(s),
    })
}

/// The certificate, and the reason it failed to verify, if it did.
fn certificate_json(c: &Certificate, map: &DynAffineMap) -> (Value, Option<String>) {
    let err = c.verify(map).err().map(|e| format!("certificate for l = {}: {e}", c.ell));
    let recipe = match c.recipe {
        Recipe::Multiplicative { alpha, beta, boundary, group, rest, scale } => json!({
            "kind": "multiplicative", "alpha": s(alpha), "beta": s(beta), "boundary": s(boundary),
            "group": s(group), "rest": s(rest), "scale": s(scale),
        }),
        Recipe::Additive { d } => json!({"kind": "additive", "d": s(d)}),
    };
    let target = match c.target {
        Target::Valuation { a, p, alpha, beta } => {
            json!({"kind": "valuation", "a": s(a), "p": s(p), "alpha": s(alpha), "beta": s(beta)})
        }
        Target::Tower { a, p } => json!({"kind": "tower", "a": s(a), "p": s(p)}),
    };
    let j = json!({
        "p": s(c.p),
        "m": s(c.m),
        "ell": s(c.ell),
        "recipe": recipe,
        "target": target,
        "b_len": s(c.b.len()),
        "b": strings(&c.b[..c.b.len().min(B_SHOWN)]),
        "period": c.period.map(|(a, b)| strings([a, b])),
        "ell_kernel": c.ell_kernel.as_ref().map(kernel_json),
        "p_kernel": kernel_json(&c.p_kernel),
        "heuristic": c.heuristic,
        "verified": err.is_none(),
    });
    (j, err)
}
