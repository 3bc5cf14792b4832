//! Command-line flags. Every flag combination compiles to a [`JobSpec`].
//! Structured values (coefficient lists, gammas, rings) are given as JSON.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;

use crate::job::{
    AutomataSpec, Coeff, Command, EffortSpec, FieldKind, FieldSpec, JobSpec, KernelSpec, MapSpec, OutputSpec, RangeSpec,
    RingSpec,
};

#[derive(Parser, Debug)]
#[command(name = "affine-zeta", version, about = "Zeta functions of dynamically affine maps in positive characteristic")]
pub struct Cli {
    /// Read the job from a JSON file.
    #[arg(long, global = true)]
    pub job: Option<String>,
    /// Render aligned columns instead of JSON lines.
    #[arg(long, global = true)]
    pub table: bool,
    /// Write output to this file.
    #[arg(long, global = true)]
    pub output: Option<String>,
    /// Print the compiled job file and exit.
    #[arg(long, global = true)]
    pub print_job: bool,
    #[command(subcommand)]
    pub verb: Option<Verb>,
}

#[derive(Subcommand, Debug)]
pub enum Verb {
    /// Closed-form #Per_n next to the brute-force oracle.
    Count(Common),
    /// Zeta coefficients and a rationality guess.
    Zeta(Common),
    /// Rational closed form or transcendence certificates.
    Verdict(Common),
    /// Brute-force #Per_n only.
    Oracle(Common),
    /// Christol series, valuation-sequence kernels, or a map's certificate.
    Automata {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        automata: AutomataArgs,
    },
    /// Cycle-length histogram over a finite extension.
    Census(Common),
}

#[derive(Args, Debug, Default)]
pub struct Common {
    #[command(flatten)]
    pub map: MapArgs,
    /// First n.
    #[arg(long)]
    pub n_min: Option<u64>,
    /// Last n (also the longest cycle the census records).
    #[arg(long)]
    pub n_max: Option<u64>,
    /// Zeta coefficients to compute.
    #[arg(long)]
    pub terms: Option<usize>,
    /// Census extension degree.
    #[arg(long)]
    pub max_k: Option<usize>,
    /// Certificate b-prefix length.
    #[arg(long)]
    pub prefix: Option<usize>,
    /// Extra certified primes.
    #[arg(long)]
    pub extra_ells: Option<usize>,
    /// Seed for picking the extra primes.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Family {
    Power,
    Chebyshev,
    Additive,
    Subadditive,
    LattesGenericJ,
    LattesOrdinary,
    LattesPair,
    LattesQuaternion,
    Raw,
}

#[derive(Args, Debug, Default)]
pub struct MapArgs {
    #[arg(long)]
    pub family: Option<Family>,
    /// Characteristic.
    #[arg(long)]
    pub p: Option<u64>,
    /// Extension degree of the base field.
    #[arg(long)]
    pub k: Option<usize>,
    /// Monic modulus for F_(p^k), JSON list, ascending.
    #[arg(long)]
    pub modulus: Option<String>,
    /// Work over F_p(u).
    #[arg(long)]
    pub rational_function: bool,
    /// Degree for power and Chebyshev maps, `d` for subadditive ones.
    #[arg(long, allow_hyphen_values = true)]
    pub d: Option<i64>,
    /// JSON: a list of coefficients, an integer, or a ring/order element.
    #[arg(long, allow_hyphen_values = true)]
    pub sigma: Option<String>,
    /// JSON field element.
    #[arg(long, allow_hyphen_values = true)]
    pub translation: Option<String>,
    /// JSON list of gamma elements.
    #[arg(long)]
    pub gammas: Option<String>,
    /// `gaussian`, `eisenstein`, or JSON `{"t":..,"n":..}`.
    #[arg(long)]
    pub ring: Option<String>,
    /// Unit root selecting the prime above p.
    #[arg(long)]
    pub root: Option<u64>,
    #[arg(long)]
    pub kernel: Option<KernelChoice>,
    /// Curve `a,b` for `y^2 = x^3 + a x + b`.
    #[arg(long, allow_hyphen_values = true)]
    pub curve: Option<String>,
    /// JSON numerator coefficients, ascending.
    #[arg(long)]
    pub num: Option<String>,
    /// JSON denominator coefficients, ascending.
    #[arg(long)]
    pub den: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum KernelChoice {
    Squared,
    Unsquared,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum AutomataKind {
    Christol,
    Valuation,
    Certificate,
}

#[derive(Args, Debug, Default)]
pub struct AutomataArgs {
    #[arg(long)]
    pub kind: Option<AutomataKind>,
    /// JSON rows of P(t, y): row j is the coefficient of y^j in t.
    #[arg(long)]
    pub poly: Option<String>,
    /// JSON prefix of the root.
    #[arg(long)]
    pub root_prefix: Option<String>,
    /// Kernel depth.
    #[arg(long)]
    pub depth: Option<u32>,
    #[arg(long)]
    pub a: Option<u64>,
    #[arg(long)]
    pub ell: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<i64>,
}

fn need<T: Copy>(v: Option<T>, flag: &str) -> Result<T, String> {
    v.ok_or_else(|| format!("--{flag} is required"))
}

fn parse<T: DeserializeOwned>(v: &Option<String>, flag: &str) -> Result<T, String> {
    let text = v.as_deref().ok_or_else(|| format!("--{flag} is required"))?;
    serde_json::from_str(text).map_err(|e| format!("--{flag}: {e}"))
}

fn parse_opt<T: DeserializeOwned>(v: &Option<String>, flag: &str) -> Result<Option<T>, String> {
    v.as_ref().map(|_| parse(v, flag)).transpose()
}

impl Verb {
    pub fn command(&self) -> Command {
        match self {
            Verb::Count(_) => Command::Count,
            Verb::Zeta(_) => Command::Zeta,
            Verb::Verdict(_) => Command::Verdict,
            Verb::Oracle(_) => Command::Oracle,
            Verb::Automata { .. } => Command::Automata,
            Verb::Census(_) => Command::Census,
        }
    }

    pub fn compile(&self) -> Result<JobSpec, String> {
        let (common, automata) = match self {
            Verb::Count(c) | Verb::Zeta(c) | Verb::Verdict(c) | Verb::Oracle(c) | Verb::Census(c) => (c, None),
            Verb::Automata { common, automata } => (common, Some(automata)),
        };
        let d = RangeSpec::default();
        let range = RangeSpec {
            n_min: common.n_min.unwrap_or(d.n_min),
            n_max: common.n_max.unwrap_or(d.n_max),
            terms: common.terms.unwrap_or(d.terms),
            max_k: common.max_k.unwrap_or(d.max_k),
        };
        let e = EffortSpec::default();
        let effort = EffortSpec {
            prefix: common.prefix.unwrap_or(e.prefix),
            extra_ells: common.extra_ells.unwrap_or(e.extra_ells),
            seed: common.seed.unwrap_or(e.seed),
        };
        let automata = automata.map(|a| a.compile(&common.map, range.terms)).transpose()?;
        let map = match common.map.family {
            Some(_) => Some(common.map.compile()?),
            None => None,
        };
        Ok(JobSpec { command: self.command(), map, automata, range, effort, output: OutputSpec::default() })
    }
}

impl MapArgs {
    fn field(&self) -> Result<FieldSpec, String> {
        Ok(FieldSpec {
            p: need(self.p, "p")?,
            k: self.k.unwrap_or(1),
            modulus: parse_opt(&self.modulus, "modulus")?,
            kind: if self.rational_function { FieldKind::RationalFunction } else { FieldKind::Finite },
        })
    }

    fn ring(&self) -> Result<RingSpec, String> {
        let r = self.ring.as_deref().ok_or("--ring is required")?;
        match r {
            "gaussian" | "eisenstein" => Ok(RingSpec::Named(r.into())),
            _ => serde_json::from_str(r).map_err(|e| format!("--ring: {e}")),
        }
    }

    pub fn compile(&self) -> Result<MapSpec, String> {
        let p = || need(self.p, "p");
        Ok(match need(self.family, "family")? {
            Family::Power => MapSpec::Power { p: p()?, d: need(self.d, "d")? },
            Family::Chebyshev => MapSpec::Chebyshev { p: p()?, d: need(self.d, "d")? },
            Family::Additive => MapSpec::Additive {
                field: self.field()?,
                sigma: parse(&self.sigma, "sigma")?,
                translation: parse_opt::<Coeff>(&self.translation, "translation")?,
            },
            Family::Subadditive => MapSpec::Subadditive {
                field: self.field()?,
                sigma: parse(&self.sigma, "sigma")?,
                d: u64::try_from(need(self.d, "d")?).map_err(|_| "--d must be positive")?,
            },
            Family::LattesGenericJ => MapSpec::LattesGenericJ {
                p: p()?,
                sigma: parse(&self.sigma, "sigma")?,
                kernel: self.kernel.map(|k| match k {
                    KernelChoice::Squared => KernelSpec::Squared,
                    KernelChoice::Unsquared => KernelSpec::Unsquared,
                }),
                curve: self
                    .curve
                    .as_ref()
                    .map(|c| serde_json::from_str(&format!("[{c}]")).map_err(|e| format!("--curve: {e}")))
                    .transpose()?,
            },
            Family::LattesOrdinary => MapSpec::LattesOrdinary {
                p: p()?,
                ring: self.ring()?,
                sigma: parse(&self.sigma, "sigma")?,
                gammas: parse_opt(&self.gammas, "gammas")?,
                root: self.root,
            },
            Family::LattesPair => MapSpec::LattesPair {
                p: p()?,
                ring: self.ring()?,
                sigma: parse(&self.sigma, "sigma")?,
                gammas: parse_opt(&self.gammas, "gammas")?,
            },
            Family::LattesQuaternion => MapSpec::LattesQuaternion {
                p: p()?,
                sigma: parse(&self.sigma, "sigma")?,
                gammas: parse_opt(&self.gammas, "gammas")?,
            },
            Family::Raw => MapSpec::Raw {
                field: self.field()?,
                num: parse(&self.num, "num")?,
                den: parse_opt(&self.den, "den")?.unwrap_or_else(|| vec![Coeff::Int(1)]),
            },
        })
    }
}

impl AutomataArgs {
    fn compile(&self, map: &MapArgs, terms: usize) -> Result<AutomataSpec, String> {
        let depth = self.depth.unwrap_or(4);
        Ok(match need(self.kind, "kind")? {
            AutomataKind::Christol => AutomataSpec::Christol {
                p: need(map.p, "p")?,
                poly: parse(&self.poly, "poly")?,
                prefix: parse(&self.root_prefix, "root-prefix")?,
                terms,
                depth,
            },
            AutomataKind::Valuation => AutomataSpec::Valuation {
                a: need(self.a, "a")?,
                p: need(map.p, "p")?,
                ell: need(self.ell, "ell")?,
                alpha: self.alpha.unwrap_or(1),
                beta: self.beta.unwrap_or(0),
                depth,
            },
            AutomataKind::Certificate => AutomataSpec::Certificate,
        })
    }
}
