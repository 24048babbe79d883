//! Seeded generators for the synthetic suites t1 to t6, random tight
//! programs for oracle testing, and a timing harness with CSV output.

use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::compile::{solve_amc3_with, Amc3Options};
use crate::dt::{solve_with, EnumOptions, Optimum, UtilityReport};
use crate::error::{Error, Result};
use crate::lang::load;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Suite {
    T1,
    T2,
    T3,
    T4,
    T5,
    T6,
}

impl Suite {
    pub const ALL: [Suite; 6] = [Suite::T1, Suite::T2, Suite::T3, Suite::T4, Suite::T5, Suite::T6];
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let i = Suite::ALL.iter().position(|s| s == self).unwrap() + 1;
        write!(f, "t{i}")
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .iter()
            .copied()
            .find(|x| x.to_string() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::Invalid(format!("unknown suite `{s}` (expected t1 to t6)")))
    }
}

/// For t3 to t6 the size is `n_prob_facts`, which must equal `n_decisions`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchSpec {
    pub suite: Suite,
    pub n_prob_facts: usize,
    pub n_decisions: usize,
    pub seed: u64,
}

impl BenchSpec {
    pub fn new(suite: Suite, n: usize, d: usize, seed: u64) -> Self {
        BenchSpec { suite, n_prob_facts: n, n_decisions: d, seed }
    }

    pub fn sized(suite: Suite, size: usize, seed: u64) -> Self {
        BenchSpec::new(suite, size, size, seed)
    }

    pub fn validate(&self) -> Result<()> {
        let (n, d) = (self.n_prob_facts, self.n_decisions);
        match self.suite {
            Suite::T1 if n == 0 && d > 0 => Err(Error::Invalid("t1 needs at least one probabilistic fact".into())),
            Suite::T2 if d == 0 && n > 0 => Err(Error::Invalid("t2 needs at least one decision atom".into())),
            Suite::T1 | Suite::T2 => Ok(()),
            _ if n != d => Err(Error::Invalid(format!("{} takes a single size; got n={n}, d={d}", self.suite))),
            Suite::T6 if n > 50 => Err(Error::Invalid("t6 supports at most 50 people".into())),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Enum,
    Amc3,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Enum => "enum",
            Method::Amc3 => "amc3",
        })
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "enum" => Ok(Method::Enum),
            "amc3" => Ok(Method::Amc3),
            _ => Err(Error::Invalid(format!("unknown method `{s}` (expected enum or amc3)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub spec: BenchSpec,
    pub method: Method,
    pub wall_time_seconds: f64,
    pub report: UtilityReport,
}

/// Probability on the lattice {0.05, 0.10, ..., 0.95}.
fn prob(rng: &mut ChaCha8Rng) -> String {
    format!("{:.2}", f64::from(rng.gen_range(1..=19u32)) * 0.05)
}

/// Program text for `spec`; identical for identical specs.
pub fn generate(spec: &BenchSpec) -> Result<String> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (n, d) = (spec.n_prob_facts, spec.n_decisions);
    let mut out = String::new();
    match spec.suite {
        Suite::T1 | Suite::T2 => {
            facts_and_decisions(&mut out, &mut rng, n, d, "a", "da");
            out.push_str("utility(qr,2). utility(nqr,-12).\n");
            // The pattern index runs over decisions in t1 and facts in t2.
            let (count, modulus) = if spec.suite == Suite::T1 { (d, n) } else { (n, d) };
            let atoms = |i: usize| {
                let j = i % modulus;
                if spec.suite == Suite::T1 {
                    format!("a({j}), da({i})")
                } else {
                    format!("a({i}), da({j})")
                }
            };
            for i in (0..count).step_by(2) {
                let _ = writeln!(out, "qr :- {}.", atoms(i));
            }
            for i in (1..count).step_by(2) {
                let _ = writeln!(out, "qr :- {}, not nqr.", atoms(i));
                let _ = writeln!(out, "nqr :- {}, not qr.", atoms(i));
            }
        }
        Suite::T3 | Suite::T4 => {
            facts_and_decisions(&mut out, &mut rng, n, n, "a", "da");
            out.push_str("utility(qr,2). utility(nqr,-12).\n");
            for i in 0..n {
                let _ = writeln!(out, "rda({i}) :- da({i}).");
                if spec.suite == Suite::T3 {
                    let _ = writeln!(out, "utility(rda({i}),{}).", rng.gen_range(-10..=10));
                }
            }
            for i in (0..n).step_by(2) {
                let _ = writeln!(out, "qr :- a({i}), da({i}).");
            }
            for i in (1..n).step_by(2) {
                let _ = writeln!(out, "qr :- a({i}), da({i}), not nqr.");
                let _ = writeln!(out, "nqr :- a({i}), da({i}), not qr.");
            }
        }
        Suite::T5 => {
            facts_and_decisions(&mut out, &mut rng, n, n, "a", "da");
            out.push_str("utility(qr,2). utility(nqr,-12).\n");
            for i in 0..n {
                let _ = writeln!(out, "utility(rda({i}),{}).", rng.gen_range(-10..=10));
                let _ = writeln!(out, "rda({i}) :- da({i}).");
            }
            let conj = |parity: usize| {
                (0..n).filter(|i| i % 2 == parity).map(|i| format!("a({i}), da({i})")).collect::<Vec<_>>().join(", ")
            };
            if n > 0 {
                let _ = writeln!(out, "qr :- {}.", conj(0));
            }
            if n > 1 {
                let odd = conj(1);
                let _ = writeln!(out, "qr :- {odd}, not nqr.");
                let _ = writeln!(out, "nqr :- {odd}, not qr.");
            }
        }
        Suite::T6 => {
            for i in 1..=n {
                let _ = writeln!(out, "{}::shops({i}).", prob(&mut rng));
            }
            for i in 1..=n {
                let _ = writeln!(out, "decision target({i}).");
            }
            for i in 1..=n {
                let _ = writeln!(out, "utility(target({i}),{}).", rng.gen_range(-5..=5));
            }
            // Products are drawn without replacement, so each rb/1 atom has one utility.
            let picks = sample(&mut rng, 100, 2 * n);
            for i in 1..=n {
                let (a, b) = (picks.index(2 * i - 2), picks.index(2 * i - 1));
                let _ = writeln!(out, "buy(item{a},{i}) ; buy(item{b},{i}) :- target({i}), shops({i}).");
                for j in [a, b] {
                    let _ = writeln!(out, "rb({j}) :- buy(item{j},{i}).");
                    let _ = writeln!(out, "utility(rb({j}),{}).", rng.gen_range(-10..=10));
                }
            }
        }
    }
    Ok(out)
}

fn facts_and_decisions(out: &mut String, rng: &mut ChaCha8Rng, n: usize, d: usize, fact: &str, dec: &str) {
    for i in 0..n {
        let _ = writeln!(out, "{}::{fact}({i}).", prob(rng));
    }
    for i in 0..d {
        let _ = writeln!(out, "decision {dec}({i}).");
    }
}

/// Shape limits of [`random_tight_program`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomShape {
    pub max_prob_facts: usize,
    pub max_decisions: usize,
    pub max_derived: usize,
    pub constraints: bool,
}

impl Default for RandomShape {
    fn default() -> Self {
        RandomShape { max_prob_facts: 3, max_decisions: 3, max_derived: 6, constraints: true }
    }
}

/// A random tight program: positive body atoms of a rule for `p_k` are
/// facts, decisions or derived atoms `p_j` with `j < k`, so the positive
/// dependency graph is acyclic; negation is unrestricted, and disjunctive
/// heads are head-cycle-free.
pub fn random_tight_program(seed: u64, shape: &RandomShape) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nf = rng.gen_range(0..=shape.max_prob_facts);
    let nd = rng.gen_range(0..=shape.max_decisions);
    let np = rng.gen_range(1..=shape.max_derived.max(1));
    let mut out = String::new();
    for i in 0..nf {
        let _ = writeln!(out, "{}::f{i}.", prob(&mut rng));
    }
    for i in 0..nd {
        let _ = writeln!(out, "decision d{i}.");
    }
    let lit = |rng: &mut ChaCha8Rng, below: usize| -> String {
        let kinds = [nf > 0, nd > 0, below > 0, np > 0];
        loop {
            let k = rng.gen_range(0..4);
            if !kinds[k] {
                continue;
            }
            return match k {
                0 => format!("f{}", rng.gen_range(0..nf)),
                1 => format!("d{}", rng.gen_range(0..nd)),
                2 => format!("p{}", rng.gen_range(0..below)),
                _ => format!("not p{}", rng.gen_range(0..np)),
            };
        }
    };
    for k in 0..np {
        for _ in 0..rng.gen_range(0..=2) {
            let len = rng.gen_range(0..=3);
            let body: Vec<String> = (0..len).map(|_| lit(&mut rng, k)).collect();
            let head = if k + 1 < np && rng.gen_bool(0.15) {
                format!("p{k} ; p{}", rng.gen_range(k + 1..np))
            } else {
                format!("p{k}")
            };
            if body.is_empty() {
                let _ = writeln!(out, "{head}.");
            } else {
                let _ = writeln!(out, "{head} :- {}.", body.join(", "));
            }
        }
    }
    if shape.constraints {
        for _ in 0..rng.gen_range(0..=2) {
            let len = rng.gen_range(1..=2);
            let body: Vec<String> = (0..len).map(|_| lit(&mut rng, np)).collect();
            let _ = writeln!(out, ":- {}.", body.join(", "));
        }
        if rng.gen_bool(0.2) {
            let cmps = [">", ">=", "<", "<=", "=", "!="];
            let cmp = cmps[rng.gen_range(0..cmps.len())];
            let k = rng.gen_range(1..=np.min(3));
            let elems: Vec<String> = sample(&mut rng, np, k).iter().map(|i| format!("{i} : p{i}")).collect();
            let _ = writeln!(out, ":- #count{{{}}} {cmp} {}.", elems.join("; "), rng.gen_range(0..=k));
        }
    }
    for k in 0..np {
        if rng.gen_bool(0.6) {
            let _ = writeln!(out, "utility(p{k},{}).", rng.gen_range(-10..=10));
        }
    }
    for i in 0..nd {
        if rng.gen_bool(0.3) {
            let _ = writeln!(out, "utility(d{i},{}).", rng.gen_range(-5..=5));
        }
    }
    out
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub timeout: Option<Duration>,
    pub jobs: Option<usize>,
    pub amc3: Amc3Options,
    pub enumeration: EnumOptions,
}

/// Generates, solves and times one instance (timing covers the solve only).
pub fn run(spec: &BenchSpec, method: Method, opts: &RunOptions) -> Result<BenchResult> {
    let text = generate(spec)?;
    let p = load(&text)?;
    let deadline = opts.timeout.map(|t| Instant::now() + t);
    let start = Instant::now();
    let report = match method {
        Method::Enum => {
            let eo = EnumOptions { jobs: opts.jobs.or(opts.enumeration.jobs), deadline, ..opts.enumeration.clone() };
            solve_with(&p, &eo)?
        }
        Method::Amc3 => {
            let mut ao = opts.amc3.clone();
            ao.compile.deadline = deadline;
            solve_amc3_with(&p, &ao)?
        }
    };
    let wall_time_seconds = start.elapsed().as_secs_f64();
    if method == Method::Enum
        && spec.suite != Suite::T6
        && report.per_strategy.iter().any(|e| e.inconsistent_mass > 0.0)
    {
        return Err(Error::Invalid(format!("{} instance has an inconsistent world", spec.suite)));
    }
    Ok(BenchResult { spec: *spec, method, wall_time_seconds, report })
}

#[derive(Debug, Serialize)]
struct CsvRow {
    suite: String,
    n: usize,
    d: usize,
    method: String,
    seed: u64,
    wall_time_seconds: f64,
    lower_value: Option<f64>,
    upper_value: Option<f64>,
    lower_strategy: String,
    upper_strategy: String,
}

fn strategy_text(r: &UtilityReport, o: &Option<Optimum>) -> String {
    o.map(|o| r.render_strategy(o.strategy)).unwrap_or_default()
}

/// One header row plus one row per result.
pub fn write_csv<W: std::io::Write>(w: W, results: &[BenchResult]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let io = |e: csv::Error| Error::Resource(format!("writing CSV: {e}"));
    if results.is_empty() {
        wr.write_record([
            "suite",
            "n",
            "d",
            "method",
            "seed",
            "wall_time_seconds",
            "lower_value",
            "upper_value",
            "lower_strategy",
            "upper_strategy",
        ])
        .map_err(io)?;
    }
    for r in results {
        wr.serialize(CsvRow {
            suite: r.spec.suite.to_string(),
            n: r.spec.n_prob_facts,
            d: r.spec.n_decisions,
            method: r.method.to_string(),
            seed: r.spec.seed,
            wall_time_seconds: r.wall_time_seconds,
            lower_value: r.report.best_lower.map(|o| o.value),
            upper_value: r.report.best_upper.map(|o| o.value),
            lower_strategy: strategy_text(&r.report, &r.report.best_lower),
            upper_strategy: strategy_text(&r.report, &r.report.best_upper),
        })
        .map_err(io)?;
    }
    wr.flush().map_err(|e| Error::Resource(format!("writing CSV: {e}")))?;
    Ok(())
}
