use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::json;

use dtpasp::algebra::AmcInstance;
use dtpasp::bench::{self, BenchResult, BenchSpec, Method, RunOptions, Suite};
use dtpasp::cnf::{parse_dimacs, parse_tiers, Cnf, Tier};
use dtpasp::compile::{compile_instance, compile_program, report_from_outer, to_cnf, Amc3Options, Circuit};
use dtpasp::credal::{parse_query, query_probability_capped, CredalResult};
use dtpasp::dt::{solve_with, EnumOptions, UtilityReport};
use dtpasp::lang::{load, GroundProgram};
use dtpasp::treedecomp::{amc3_decomposition_with, audit_amc3, VertexSet};
use dtpasp::compile::DefinabilityMode;

use crate::{render, BenchMethod, Global, MethodArg};

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn program(path: &Path) -> Result<GroundProgram> {
    Ok(load(&read(path)?).with_context(|| format!("in {}", path.display()))?)
}

fn deadline(g: &Global) -> Option<Instant> {
    g.timeout.map(|t| Instant::now() + Duration::from_secs_f64(t.max(0.0)))
}

fn enum_options(g: &Global) -> EnumOptions {
    EnumOptions { atom_cap: g.atom_cap, fact_cap: g.fact_cap, jobs: g.jobs, deadline: deadline(g), ..EnumOptions::default() }
}

fn amc3_options(g: &Global) -> Amc3Options {
    let mut o = Amc3Options::default();
    o.compile.deadline = deadline(g);
    o
}

fn print_json(v: &impl Serialize) -> Result<()> {
    outln!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

#[derive(Serialize)]
struct QueryOutput<'a> {
    query: &'a str,
    #[serde(flatten)]
    result: CredalResult,
}

pub fn query(g: &Global, file: &Path, queries: &[String]) -> Result<()> {
    let p = program(file)?;
    let mut outs = Vec::new();
    for q in queries {
        let lits = parse_query(&p, q)?;
        let r = query_probability_capped(&p, &lits, g.atom_cap, g.fact_cap)?;
        outs.push(QueryOutput { query: q, result: r });
    }
    if g.json {
        return print_json(&outs);
    }
    for o in &outs {
        outln!("{}", render::credal(o.query, &o.result));
    }
    Ok(())
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    method: &'a str,
    report: &'a UtilityReport,
}

/// Solves with the requested method; `auto` falls back to enumeration on
/// programs the compilation pipeline does not accept.
fn solve_program(g: &Global, p: &GroundProgram, method: MethodArg) -> Result<(&'static str, UtilityReport, Option<Circuit>)> {
    match method {
        MethodArg::Enum => Ok(("enum", solve_with(p, &enum_options(g))?, None)),
        MethodArg::Amc3 | MethodArg::Auto => match compile_program(p, &amc3_options(g)) {
            Ok(c) => {
                let r = report_from_outer(p, &c.evaluate()?);
                Ok(("amc3", r, Some(c.circuit)))
            }
            Err(e @ dtpasp::Error::Unsupported(_)) if method == MethodArg::Auto => {
                eprintln!("note: {e}; falling back to enumeration");
                Ok(("enum", solve_with(p, &enum_options(g))?, None))
            }
            Err(e) => Err(e.into()),
        },
    }
}

pub fn solve(g: &Global, file: &Path, method: MethodArg) -> Result<()> {
    let p = program(file)?;
    let (used, report, _) = solve_program(g, &p, method)?;
    if g.json {
        return print_json(&SolveOutput { method: used, report: &report });
    }
    out!("{}", render::report(used, &report));
    Ok(())
}

fn parse_range(key: &str, v: &str) -> Result<Vec<usize>> {
    let num = |s: &str| s.trim().parse::<usize>().with_context(|| format!("bad value `{s}` for {key}"));
    match v.split_once("..") {
        Some((a, b)) => {
            let b = b.strip_prefix('=').unwrap_or(b);
            let (a, b) = (num(a)?, num(b)?);
            if a > b {
                bail!("empty range {a}..{b} for {key}");
            }
            Ok((a..=b).collect())
        }
        None => Ok(vec![num(v)?]),
    }
}

fn bench_specs(suite: Suite, params: &str, seed: u64) -> Result<Vec<BenchSpec>> {
    let (mut n, mut d, mut size) = (None, None, None);
    for part in params.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = part.split_once('=').with_context(|| format!("expected key=value in `{part}`"))?;
        let values = parse_range(k.trim(), v)?;
        match k.trim() {
            "n" => n = Some(values),
            "d" => d = Some(values),
            "size" => size = Some(values),
            other => bail!("unknown parameter `{other}` (expected n, d or size)"),
        }
    }
    let mut specs = Vec::new();
    match suite {
        Suite::T1 | Suite::T2 => {
            let (Some(n), Some(d)) = (n, d) else { bail!("{suite} needs n=... and d=...") };
            for &n in &n {
                for &d in &d {
                    specs.push(BenchSpec::new(suite, n, d, seed));
                }
            }
        }
        _ => {
            let Some(sizes) = size.or(n).or(d) else { bail!("{suite} needs size=...") };
            specs.extend(sizes.into_iter().map(|s| BenchSpec::sized(suite, s, seed)));
        }
    }
    for s in &specs {
        s.validate()?;
    }
    Ok(specs)
}

pub fn bench(g: &Global, suite: &str, params: &str, seed: u64, method: BenchMethod, out: Option<&Path>) -> Result<()> {
    let suite: Suite = suite.parse()?;
    let specs = bench_specs(suite, params, seed)?;
    let methods = match method {
        BenchMethod::Enum => vec![Method::Enum],
        BenchMethod::Amc3 => vec![Method::Amc3],
        BenchMethod::Both => vec![Method::Enum, Method::Amc3],
    };
    let opts = RunOptions {
        timeout: g.timeout.map(|t| Duration::from_secs_f64(t.max(0.0))),
        jobs: g.jobs,
        amc3: Amc3Options::default(),
        enumeration: EnumOptions { atom_cap: g.atom_cap, fact_cap: g.fact_cap, ..EnumOptions::default() },
    };
    let mut results: Vec<BenchResult> = Vec::new();
    let mut failure = None;
    'outer: for spec in &specs {
        for &m in &methods {
            match bench::run(spec, m, &opts) {
                Ok(r) => {
                    if out.is_some() && !g.json {
                        outln!(
                            "{} n={} d={} {m}: {:.3}s",
                            spec.suite, spec.n_prob_facts, spec.n_decisions, r.wall_time_seconds
                        );
                    }
                    results.push(r);
                }
                Err(e) => {
                    failure = Some(anyhow::Error::new(e).context(format!(
                        "{} n={} d={} {m}",
                        spec.suite, spec.n_prob_facts, spec.n_decisions
                    )));
                    break 'outer;
                }
            }
        }
    }
    match out {
        Some(path) => {
            let f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
            bench::write_csv(f, &results)?;
        }
        None if g.json => print_json(&results)?,
        None => bench::write_csv(std::io::stdout().lock(), &results)?,
    }
    if out.is_some() && g.json {
        print_json(&results)?;
    }
    failure.map_or(Ok(()), Err)
}

fn is_dimacs(src: &str) -> bool {
    src.lines().any(|l| l.trim_start().starts_with("p cnf"))
}

/// The formula with tiers from `--tiers`, the file's comments, or all inner.
fn dimacs_input(src: &str, tiers: Option<&str>) -> Result<(Cnf, Vec<Tier>)> {
    let f = parse_dimacs(src)?;
    let n = f.cnf.num_vars;
    let tiers = match (tiers, f.tiers) {
        (Some(spec), _) => parse_tiers(spec, n)?,
        (None, Some(t)) => t,
        (None, None) => vec![Tier::Inner; n],
    };
    Ok((f.cnf, tiers))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    let mut f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    f.write_all(text.as_bytes()).with_context(|| format!("writing {}", path.display()))
}

fn circuit_summary(c: &Circuit) -> serde_json::Value {
    json!({ "nodes": c.len(), "variables": c.num_vars, "model_count": c.model_count().to_string() })
}

pub fn compile(g: &Global, file: &Path, dump: Option<&Path>, tiers: Option<&str>, method: MethodArg) -> Result<()> {
    let src = read(file)?;
    if is_dimacs(&src) {
        let (cnf, tiers) = dimacs_input(&src, tiers)?;
        let inst = AmcInstance::neutral(cnf, tiers);
        let (d, _, circuit) = compile_instance(&inst, &amc3_options(g))?;
        if let Some(path) = dump {
            write_file(path, &circuit.to_nnf())?;
        }
        let summary = circuit_summary(&circuit);
        if g.json {
            return print_json(&json!({ "circuit": summary, "width": d.td.width() }));
        }
        outln!(
            "circuit: {} nodes over {} variables, {} models",
            circuit.len(),
            circuit.num_vars,
            circuit.model_count()
        );
        outln!("width: {}", d.td.width());
        return Ok(());
    }
    let p = load(&src).with_context(|| format!("in {}", file.display()))?;
    let (used, report, circuit) = solve_program(g, &p, method)?;
    match (&circuit, dump) {
        (Some(c), Some(path)) => write_file(path, &c.to_nnf())?,
        (None, Some(_)) => eprintln!("note: no circuit was built, nothing dumped"),
        _ => {}
    }
    if g.json {
        let summary = circuit.as_ref().map(circuit_summary);
        return print_json(&json!({ "method": used, "circuit": summary, "report": report }));
    }
    if let Some(c) = &circuit {
        outln!("circuit: {} nodes over {} variables, {} models", c.len(), c.num_vars, c.model_count());
    }
    out!("{}", render::report(used, &report));
    Ok(())
}

fn names(cnf: &Cnf, s: &VertexSet) -> String {
    let v: Vec<&str> = s.iter().map(|&v| cnf.name(v)).collect();
    format!("{{{}}}", v.join(","))
}

pub fn td(g: &Global, file: &Path, tiers: Option<&str>, out: Option<&Path>, no_definability: bool) -> Result<()> {
    let src = read(file)?;
    let (cnf, tiers) = if is_dimacs(&src) {
        dimacs_input(&src, tiers)?
    } else {
        let p = load(&src).with_context(|| format!("in {}", file.display()))?;
        let e = to_cnf(&p.lift_decision_utilities())?;
        (e.cnf, e.tiers)
    };
    let tier = |t: Tier| -> VertexSet { (0..cnf.num_vars).filter(|&v| tiers[v] == t).collect() };
    let (xo, xm, xi) = (tier(Tier::Outer), tier(Tier::Middle), tier(Tier::Inner));
    let mode = (!no_definability).then_some(DefinabilityMode::Syntactic);
    let d = amc3_decomposition_with(&cnf, &xo, &xm, &xi, mode)?;
    let audit = audit_amc3(&cnf, &xo, &xm, &d);
    if let Some(path) = out {
        write_file(path, &d.td.to_td(cnf.num_vars))?;
    }
    let audit_text = match &audit {
        Ok(_) => "ok".to_string(),
        Err(e) => e.to_string(),
    };
    if g.json {
        let set = |s: &VertexSet| s.iter().map(|&v| cnf.name(v).to_string()).collect::<BTreeSet<_>>();
        print_json(&json!({
            "width": d.td.width(),
            "bags": d.td.bags.len(),
            "outer_separator": set(&d.s_outer),
            "middle_separator": set(&d.s_middle),
            "outer_witness": d.t_outer,
            "middle_witness": d.t_middle,
            "audit": audit_text,
        }))?;
    } else {
        outln!("width: {}", d.td.width());
        outln!("bags: {}", d.td.bags.len());
        outln!("outer separator: {}", names(&cnf, &d.s_outer));
        outln!("middle separator: {}", names(&cnf, &d.s_middle));
        outln!("witness bags: outer {} middle {}", d.t_outer + 1, d.t_middle + 1);
        outln!("audit: {audit_text}");
    }
    audit?;
    Ok(())
}
