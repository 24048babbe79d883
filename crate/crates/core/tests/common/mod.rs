#![allow(dead_code)]

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dtpasp::algebra::{check_laws, eval_3amc_by_definition, Inner, Middle, Outer, Semiring, DEFINITION_CAP};
use dtpasp::bench::{random_tight_program, run, BenchSpec, Method, RandomShape, RunOptions, Suite};
use dtpasp::cnf::parse_dimacs;
use dtpasp::compile::{compile_program, report_from_outer, solve_amc3, Amc3Options};
use dtpasp::credal::{enumerate_worlds, parse_query, query_probability, world_answer_sets};
use dtpasp::dt::{dtproblog_utility, solve, strategy_worlds, Optimum, Strategy, UtilityReport};
use dtpasp::lang::{load, GroundProgram};
use dtpasp::stable::{answer_sets, project, Interpretation};
use dtpasp::treedecomp::{
    amc3_decomposition, amc3_decomposition_with, audit_amc3, minimum_separator, primal_graph, VertexSet,
};

pub type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($arg:tt)+) => {
        if !$cond {
            return Err(format!($($arg)+));
        }
    };
}

pub const TOL: f64 = 1e-9;

pub fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= TOL * (1.0 + a.abs().max(b.abs()))
}

/// Outcome of comparing the three evaluators on one random program.
pub struct OracleOutcome {
    pub by_definition_checked: bool,
}

fn same_optimum(
    what: &str,
    oracle: &UtilityReport,
    want: Option<Optimum>,
    got: Option<Optimum>,
    pick: fn(&dtpasp::dt::StrategyEntry) -> f64,
) -> Result<(), String> {
    match (want, got) {
        (None, None) => Ok(()),
        (Some(w), Some(g)) => {
            if !close(w.value, g.value) {
                return Err(format!("{what}: oracle {} vs {}", w.value, g.value));
            }
            let entry = oracle
                .per_strategy
                .iter()
                .find(|e| e.strategy == g.strategy)
                .ok_or_else(|| format!("{what}: unknown strategy {:?}", g.strategy))?;
            if entry.all_inconsistent || !close(pick(entry), w.value) {
                return Err(format!("{what}: strategy {:?} does not attain {}", g.strategy, w.value));
            }
            Ok(())
        }
        (w, g) => Err(format!("{what}: oracle {w:?} vs {g:?}")),
    }
}

pub fn oracle_check(seed: u64) -> Result<OracleOutcome, String> {
    let text = random_tight_program(seed, &RandomShape::default());
    let ctx = |e: String| format!("seed {seed}: {e}\n{text}");
    let p = load(&text).map_err(|e| ctx(e.to_string()))?;
    let oracle = solve(&p).map_err(|e| ctx(e.to_string()))?;
    let compiled = compile_program(&p, &Amc3Options::default()).map_err(|e| ctx(e.to_string()))?;
    let v = compiled.evaluate().map_err(|e| ctx(e.to_string()))?;
    let circuit = report_from_outer(&p, &v);
    same_optimum("lower", &oracle, oracle.best_lower, circuit.best_lower, |e| e.lower).map_err(ctx)?;
    same_optimum("upper", &oracle, oracle.best_upper, circuit.best_upper, |e| e.upper).map_err(ctx)?;
    let n = compiled.instance.cnf.num_vars;
    let by_definition_checked = n <= DEFINITION_CAP;
    if by_definition_checked {
        let d = eval_3amc_by_definition(&compiled.instance, DEFINITION_CAP).map_err(|e| ctx(e.to_string()))?;
        let by_def = report_from_outer(&p, &d);
        same_optimum("lower (definition)", &oracle, oracle.best_lower, by_def.best_lower, |e| e.lower).map_err(ctx)?;
        same_optimum("upper (definition)", &oracle, oracle.best_upper, by_def.best_upper, |e| e.upper).map_err(ctx)?;
    }
    if n <= 20 {
        let models = compiled.encoding.cnf.models_brute_force().len() as u128;
        if compiled.circuit.model_count() != models {
            return Err(ctx(format!("circuit counts {} models, formula has {models}", compiled.circuit.model_count())));
        }
    }
    Ok(OracleOutcome { by_definition_checked })
}

pub const EX1: &str = "{a}. {b}. qr :- a. qr ; nqr :- b.";
pub const EX2: &str = "0.3::a. 0.4::b. qr :- a. qr ; nqr :- b.";
pub const EX3: &str = "0.3::a. 0.4::b. qr :- a. qr ; nqr :- b. :- a, b.";
pub const EX4: &str = "0.1::a. 0.7::b. ? :: da. ? :: db. q :- da, a. q :- db, b. \
                       utility(q,4). utility(da,-3). utility(db,-2).";
pub const EX5: &str = "0.3::a. 0.4::b. decision da. decision db. utility(qr,2). utility(nqr,-12). \
                       qr :- da, a. qr ; nqr :- db, b.";
pub const EX6: &str = include_str!("../data/example6.lp");
pub const C_RUN: &str = include_str!("../data/c_run.cnf");

fn program(src: &str) -> Result<GroundProgram, String> {
    load(src).map_err(|e| e.to_string())
}

fn within_a_second(what: &str, start: Instant) -> Check {
    let t = start.elapsed();
    ensure!(t < Duration::from_secs(1), "{what} took {t:?}");
    Ok(())
}

fn names(i: &Interpretation, p: &GroundProgram) -> BTreeSet<String> {
    i.names(p).into_iter().collect()
}

fn name_sets(xs: &[&[&str]]) -> BTreeSet<BTreeSet<String>> {
    xs.iter().map(|s| s.iter().map(|a| a.to_string()).collect()).collect()
}

fn query(src: &str, q: &str) -> Result<dtpasp::credal::CredalResult, String> {
    let p = program(src)?;
    let q = parse_query(&p, q).map_err(|e| e.to_string())?;
    query_probability(&p, &q).map_err(|e| e.to_string())
}

pub fn credal_golden() -> Check {
    let start = Instant::now();
    let r = query(EX2, "qr")?;
    ensure!(close(r.lower, 0.3) && close(r.upper, 0.58) && r.inconsistent_mass == 0.0, "example 2: {r:?}");
    within_a_second("example 2", start)?;
    let start = Instant::now();
    let r = query(EX3, "qr")?;
    ensure!(close(r.lower, 0.18) && close(r.upper, 0.46) && close(r.inconsistent_mass, 0.12), "example 3: {r:?}");
    let n = query(EX3, "not qr")?;
    ensure!(close(n.lower, 0.42) && close(n.upper, 0.70), "example 3, not qr: {n:?}");
    within_a_second("example 3", start)
}

fn check_per_strategy(what: &str, r: &UtilityReport, want: &[(f64, f64)]) -> Check {
    ensure!(r.per_strategy.len() == want.len(), "{what}: {} strategies", r.per_strategy.len());
    for (e, &(lo, hi)) in r.per_strategy.iter().zip(want) {
        ensure!(close(e.lower, lo) && close(e.upper, hi), "{what}: {e:?}, want [{lo}, {hi}]");
    }
    Ok(())
}

fn check_optimum(what: &str, r: &UtilityReport, o: Option<Optimum>, set: &str, value: f64) -> Check {
    let o = o.ok_or_else(|| format!("{what}: no optimum"))?;
    let got = r.render_strategy(o.strategy);
    ensure!(got == set && close(o.value, value), "{what}: {got} {} instead of {set} {value}", o.value);
    Ok(())
}

pub fn dt_golden() -> Check {
    let start = Instant::now();
    let p = program(EX5)?;
    let r = solve(&p).map_err(|e| e.to_string())?;
    check_per_strategy("example 5", &r, &[(0.0, 0.0), (0.6, 0.6), (-4.8, 0.8), (-2.76, 1.16)])?;
    check_optimum("example 5 lower", &r, r.best_lower, "{da}", 0.6)?;
    check_optimum("example 5 upper", &r, r.best_upper, "{da,db}", 1.16)?;
    let c = solve_amc3(&p).map_err(|e| e.to_string())?;
    check_optimum("example 5 lower (circuit)", &c, c.best_lower, "{da}", 0.6)?;
    check_optimum("example 5 upper (circuit)", &c, c.best_upper, "{da,db}", 1.16)?;
    within_a_second("example 5", start)?;

    let start = Instant::now();
    let p = program(EX6)?;
    let r = solve(&p).map_err(|e| e.to_string())?;
    check_per_strategy("example 6", &r, &[(0.0, 0.0), (-1.2, 2.8), (1.5, 1.5), (0.3, 4.3)])?;
    check_optimum("example 6 lower", &r, r.best_lower, "{target(bob)}", 1.5)?;
    check_optimum("example 6 upper", &r, r.best_upper, "{target(anna),target(bob)}", 4.3)?;
    let c = solve_amc3(&p).map_err(|e| e.to_string())?;
    check_optimum("example 6 lower (circuit)", &c, c.best_lower, "{target(bob)}", 1.5)?;
    check_optimum("example 6 upper (circuit)", &c, c.best_upper, "{target(anna),target(bob)}", 4.3)?;
    within_a_second("example 6", start)?;

    let start = Instant::now();
    let p = program(EX4)?;
    let u: Vec<f64> = (0..4).map(|s| dtproblog_utility(&p, Strategy(s))).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    for (got, want) in u[1..].iter().zip([-2.6, 0.8, -2.08]) {
        ensure!(close(*got, want), "example 4: {u:?}");
    }
    let best = (0..4).max_by(|&a, &b| u[a].total_cmp(&u[b])).unwrap_or(0);
    ensure!(Strategy(best as u64).render(&p) == "{db}", "example 4: best strategy {best}");
    within_a_second("example 4", start)
}

/// Expected rows: facts, answer sets, world probability, weighted reward range.
type Row<'a> = (&'a [&'a str], &'a [&'a [&'a str]], f64, Option<(f64, f64)>);

fn check_table(what: &str, p: &GroundProgram, s: u64, rows: &[Row], drop_facts: bool) -> Check {
    let got = strategy_worlds(p, Strategy(s)).map_err(|e| e.to_string())?;
    ensure!(got.len() == rows.len(), "{what}: {} worlds", got.len());
    let facts: BTreeSet<String> = p.prob_facts.iter().map(|&(a, _)| p.name(a)).collect();
    for (i, (row, &(wf, sets, prob, reward))) in got.iter().zip(rows).enumerate() {
        let world: BTreeSet<String> =
            p.prob_facts.iter().enumerate().filter(|(k, _)| row.world.mask >> k & 1 == 1).map(|(_, &(a, _))| p.name(a)).collect();
        ensure!(world == name_sets(&[wf]).into_iter().next().unwrap_or_default(), "{what} w{i}: world {world:?}");
        let mut got_sets: BTreeSet<BTreeSet<String>> = row.answer_sets.iter().map(|m| names(m, p)).collect();
        if drop_facts {
            got_sets = got_sets.into_iter().map(|m| m.difference(&facts).cloned().collect()).collect();
        }
        ensure!(got_sets == name_sets(sets), "{what} w{i}: answer sets {got_sets:?}");
        ensure!(close(row.world.prob, prob), "{what} w{i}: P(w) = {}", row.world.prob);
        let r = row.weighted.map(|u| (u.lower, u.upper));
        let ok = match (r, reward) {
            (Some((a, b)), Some((c, d))) => close(a, c) && close(b, d),
            (None, None) => true,
            _ => false,
        };
        ensure!(ok, "{what} w{i}: reward {r:?}, want {reward:?}");
    }
    Ok(())
}

pub fn answer_set_golden() -> Check {
    let p = program(EX1)?;
    let all = answer_sets(&p).map_err(|e| e.to_string())?;
    let got: BTreeSet<BTreeSet<String>> = all.sets.iter().map(|m| names(m, &p)).collect();
    ensure!(all.len() == 5, "example 1: {} answer sets", all.len());
    ensure!(
        got == name_sets(&[&[], &["a", "qr"], &["b", "qr"], &["a", "b", "qr"], &["b", "nqr"]]),
        "example 1: {got:?}"
    );
    let on = [p.lookup("qr").map_err(|e| e.to_string())?, p.lookup("a").map_err(|e| e.to_string())?];
    let proj: BTreeSet<BTreeSet<String>> = project(&all, &on).iter().map(|m| names(m, &p)).collect();
    ensure!(proj == name_sets(&[&[], &["a", "qr"], &["qr"]]), "example 1 projection: {proj:?}");

    let p = program(EX2)?;
    let rows = world_answer_sets(&p, 0).map_err(|e| e.to_string())?;
    let want: [(&[&str], &[&[&str]], f64); 4] = [
        (&[], &[&[]], 0.42),
        (&["a"], &[&["a", "qr"]], 0.18),
        (&["b"], &[&["b", "qr"], &["b", "nqr"]], 0.28),
        (&["a", "b"], &[&["a", "b", "qr"]], 0.12),
    ];
    ensure!(rows.len() == 4, "table 1: {} worlds", rows.len());
    let mut total = 0.0;
    for (i, ((w, sets), (facts, want_sets, prob))) in rows.iter().zip(want).enumerate() {
        let got: BTreeSet<BTreeSet<String>> = sets.iter().map(|m| names(m, &p)).collect();
        let world: Vec<String> =
            p.prob_facts.iter().enumerate().filter(|(k, _)| w.mask >> k & 1 == 1).map(|(_, &(a, _))| p.name(a)).collect();
        ensure!(world == facts, "table 1 w{i}: world {world:?}");
        ensure!(got == name_sets(want_sets) && close(w.prob, prob), "table 1 w{i}: {got:?} {}", w.prob);
        total += w.prob;
    }
    ensure!(close(total, 1.0), "table 1: probabilities sum to {total}");

    let p = program(EX5)?;
    let table2: [Row; 4] = [
        (&[], &[&[]], 0.42, Some((0.0, 0.0))),
        (&["a"], &[&[]], 0.18, Some((0.0, 0.0))),
        (&["b"], &[&[]], 0.28, Some((0.0, 0.0))),
        (&["a", "b"], &[&[]], 0.12, Some((0.0, 0.0))),
    ];
    check_table("table 2", &p, 0, &table2, true)?;
    let table3: [Row; 4] = [
        (&[], &[&["da"]], 0.42, Some((0.0, 0.0))),
        (&["a"], &[&["a", "da", "qr"]], 0.18, Some((0.36, 0.36))),
        (&["b"], &[&["b", "da"]], 0.28, Some((0.0, 0.0))),
        (&["a", "b"], &[&["a", "b", "da", "qr"]], 0.12, Some((0.24, 0.24))),
    ];
    check_table("table 3", &p, 1, &table3, false)?;
    let table4: [Row; 4] = [
        (&[], &[&["db"]], 0.42, Some((0.0, 0.0))),
        (&["a"], &[&["a", "db"]], 0.18, Some((0.0, 0.0))),
        (&["b"], &[&["b", "db", "qr"], &["b", "db", "nqr"]], 0.28, Some((-3.36, 0.56))),
        (&["a", "b"], &[&["a", "b", "db", "qr"], &["a", "b", "db", "nqr"]], 0.12, Some((-1.44, 0.24))),
    ];
    check_table("table 4", &p, 2, &table4, false)?;
    let table5: [Row; 4] = [
        (&[], &[&["da", "db"]], 0.42, Some((0.0, 0.0))),
        (&["a"], &[&["a", "qr", "da", "db"]], 0.18, Some((0.36, 0.36))),
        (&["b"], &[&["b", "da", "db", "qr"], &["b", "da", "db", "nqr"]], 0.28, Some((-3.36, 0.56))),
        (&["a", "b"], &[&["a", "b", "qr", "da", "db"]], 0.12, Some((0.24, 0.24))),
    ];
    check_table("table 5", &p, 3, &table5, false)
}

/// Runs the three-way comparison on `seeds`; returns how many programs were
/// also checked against the literal nested sum.
pub fn oracle_equivalence(seeds: std::ops::Range<u64>) -> Result<usize, String> {
    let mut by_definition = 0;
    for seed in seeds {
        by_definition += usize::from(oracle_check(seed)?.by_definition_checked);
    }
    Ok(by_definition)
}

fn set(xs: &[usize]) -> VertexSet {
    xs.iter().copied().collect()
}

pub fn tree_decomposition_golden() -> Check {
    let f = parse_dimacs(C_RUN).map_err(|e| e.to_string())?;
    let c = f.cnf;
    let g = primal_graph(&c);
    let (xo, xm, xi) = (set(&[0, 1, 2, 3]), set(&[4, 5, 6]), set(&[7, 8]));
    let d = amc3_decomposition(&c, &xo, &xm, &xi).map_err(|e| e.to_string())?;
    ensure!(d.td.width() == 2, "width {} with definability", d.td.width());
    ensure!(d.s_outer == set(&[4]), "S_O = {:?}", d.s_outer);
    ensure!(d.s_middle == set(&[5, 6]), "S_M = {:?}", d.s_middle);
    ensure!(minimum_separator(&g, &d.defined_outer, &xo) == set(&[4]), "outer separator");
    ensure!(minimum_separator(&g.torso(&xo), &d.defined_outer_middle, &xm) == set(&[5, 6]), "middle separator");
    d.td.validate(&g)?;
    audit_amc3(&c, &xo, &xm, &d).map_err(|e| e.to_string())?;
    let plain = amc3_decomposition_with(&c, &xo, &xm, &xi, None).map_err(|e| e.to_string())?;
    ensure!(plain.td.width() >= 4, "width {} without definability", plain.td.width());
    plain.td.validate(&g)?;
    audit_amc3(&c, &xo, &xm, &plain).map_err(|e| e.to_string())?;
    Ok(())
}

/// `n_derived` atoms defined by definite rules over facts, decisions and
/// earlier atoms, so every world has exactly one answer set.
pub fn random_definite_program(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (nf, nd, np) = (rng.gen_range(0..=3), rng.gen_range(0..=3), rng.gen_range(1..=5));
    let mut out = String::new();
    let mut atoms = Vec::new();
    for i in 0..nf {
        out.push_str(&format!("0.{}::f{i}. ", rng.gen_range(1..=9)));
        atoms.push(format!("f{i}"));
    }
    for i in 0..nd {
        out.push_str(&format!("decision d{i}. "));
        atoms.push(format!("d{i}"));
    }
    for k in 0..np {
        for _ in 0..rng.gen_range(1..=2) {
            let len = rng.gen_range(0..=2.min(atoms.len()));
            let body: Vec<String> = (0..len).map(|_| atoms[rng.gen_range(0..atoms.len())].clone()).collect();
            if body.is_empty() {
                out.push_str(&format!("p{k}. "));
            } else {
                out.push_str(&format!("p{k} :- {}. ", body.join(", ")));
            }
        }
        atoms.push(format!("p{k}"));
        if rng.gen_bool(0.7) {
            out.push_str(&format!("utility(p{k},{}). ", rng.gen_range(-10..=10)));
        }
    }
    out
}

/// World probabilities, bounds and duality for every atom of a program.
pub fn credal_invariants(src: &str) -> Check {
    let p = program(src)?;
    let total: f64 = enumerate_worlds(&p).map_err(|e| e.to_string())?.iter().map(|w| w.prob).sum();
    ensure!(close(total, 1.0), "world probabilities sum to {total}\n{src}");
    for a in 0..p.num_atoms() {
        if p.is_aux(a) {
            continue;
        }
        let name = p.name(a);
        let pos = query(src, &name)?;
        let neg = query(src, &format!("not {name}"))?;
        ensure!(pos.lower <= pos.upper + 1e-12, "{name}: {pos:?}\n{src}");
        ensure!(close(pos.lower, 1.0 - neg.upper - pos.inconsistent_mass), "duality fails for {name}: {pos:?} {neg:?}\n{src}");
        ensure!(close(pos.upper, 1.0 - neg.lower - pos.inconsistent_mass), "duality fails for {name}: {pos:?} {neg:?}\n{src}");
    }
    let r = solve(&p).map_err(|e| e.to_string())?;
    for e in &r.per_strategy {
        ensure!(e.lower <= e.upper + 1e-12, "{e:?}\n{src}");
    }
    Ok(())
}

/// Lower and upper utilities coincide with the scalar expected utility.
pub fn degenerate_invariant(src: &str) -> Check {
    let p = program(src)?;
    let r = solve(&p).map_err(|e| e.to_string())?;
    for e in &r.per_strategy {
        let u = dtproblog_utility(&p, e.strategy).map_err(|e| e.to_string())?;
        ensure!(close(e.lower, u) && close(e.upper, u), "{e:?} vs {u}\n{src}");
    }
    Ok(())
}

fn sample_inner(rng: &mut ChaCha8Rng) -> Inner {
    match rng.gen_range(0..20) {
        0 => Inner::zero(),
        1 => Inner::one(),
        _ => {
            let (a, b) = (rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
            Inner::new(f64::min(a, b), f64::max(a, b))
        }
    }
}

fn sample_middle(rng: &mut ChaCha8Rng) -> Middle {
    match rng.gen_range(0..20) {
        0 => Middle::zero(),
        1 => Middle::one(),
        _ => Middle::new(rng.gen_range(0.0..1.0), rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)),
    }
}

fn sample_outer(rng: &mut ChaCha8Rng) -> Outer {
    match rng.gen_range(0..20) {
        0 => Outer::zero(),
        1 => Outer::one(),
        _ => Outer::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0), rng.gen_range(0..16), rng.gen_range(0..16)),
    }
}

fn laws<S: Semiring>(samples: usize, seed: u64, sample: fn(&mut ChaCha8Rng) -> S) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let (a, b, c) = (sample(&mut rng), sample(&mut rng), sample(&mut rng));
        check_laws(&a, &b, &c, 1e-9)?;
    }
    Ok(())
}

pub fn semiring_laws(samples: usize, seed: u64) -> Check {
    laws(samples, seed, sample_inner)?;
    laws(samples, seed + 1, sample_middle)?;
    laws(samples, seed + 2, sample_outer)
}

pub fn invariants() -> Check {
    for src in [EX2, EX3, EX5, EX6] {
        credal_invariants(src)?;
    }
    for seed in 0..100 {
        credal_invariants(&random_tight_program(seed, &RandomShape::default()))?;
        degenerate_invariant(&random_definite_program(seed))?;
    }
    semiring_laws(10_000, 7)
}

fn timed(suite: Suite, n: usize, d: usize, method: Method) -> Result<dtpasp::bench::BenchResult, String> {
    run(&BenchSpec::new(suite, n, d, 0), method, &RunOptions::default()).map_err(|e| format!("{suite} n={n} d={d} {method}: {e}"))
}

pub fn performance() -> Result<String, String> {
    let limit = 120.0;
    let e8 = timed(Suite::T1, 2, 8, Method::Enum)?;
    ensure!(e8.wall_time_seconds <= limit, "t1 n=2 d=8 enum took {:.1}s", e8.wall_time_seconds);
    let a14 = timed(Suite::T1, 2, 14, Method::Amc3)?;
    ensure!(a14.wall_time_seconds <= limit, "t1 n=2 d=14 amc3 took {:.1}s", a14.wall_time_seconds);
    let e12 = timed(Suite::T1, 2, 12, Method::Enum)?;
    let a12 = timed(Suite::T1, 2, 12, Method::Amc3)?;
    let agree = |x: Option<Optimum>, y: Option<Optimum>| match (x, y) {
        (Some(x), Some(y)) => close(x.value, y.value),
        (None, None) => true,
        _ => false,
    };
    ensure!(
        agree(e12.report.best_lower, a12.report.best_lower) && agree(e12.report.best_upper, a12.report.best_upper),
        "t1 n=2 d=12: methods disagree"
    );
    ensure!(
        a12.wall_time_seconds < e12.wall_time_seconds,
        "t1 n=2 d=12: amc3 {:.3}s is not faster than enum {:.3}s",
        a12.wall_time_seconds,
        e12.wall_time_seconds
    );
    Ok(format!(
        "enum d=8 {:.3}s, amc3 d=14 {:.3}s, d=12 enum {:.3}s vs amc3 {:.3}s",
        e8.wall_time_seconds, a14.wall_time_seconds, e12.wall_time_seconds, a12.wall_time_seconds
    ))
}

pub fn complexity() -> Check {
    for (n, d) in [(2, 2), (2, 5), (3, 3)] {
        let r = timed(Suite::T1, n, d, Method::Enum)?.report;
        ensure!(r.per_strategy.iter().all(|e| e.inconsistent_mass == 0.0), "t1 n={n} d={d} has inconsistent worlds");
        ensure!(r.pairs_evaluated == 1 << (d + n), "t1 n={n} d={d}: {} pairs", r.pairs_evaluated);
    }
    Ok(())
}
