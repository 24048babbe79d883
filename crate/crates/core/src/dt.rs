//! Exhaustive strategy/world enumeration: the reference solver.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::credal::{facts_for, world_prob, World, DEFAULT_FACT_CAP};
use crate::error::{Error, Result};
use crate::lang::{AtomId, GroundProgram};
use crate::stable::{Interpretation, Solver, DEFAULT_ATOM_CAP};

/// Bit `i` selects the `i`-th declared decision atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Strategy(pub u64);

impl Strategy {
    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn names(self, p: &GroundProgram) -> Vec<String> {
        p.decisions.iter().enumerate().filter(|(i, _)| self.contains(*i)).map(|(_, &d)| p.name(d)).collect()
    }

    pub fn render(self, p: &GroundProgram) -> String {
        format!("{{{}}}", self.names(p).join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UtilityRange {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WorldReward {
    Range(UtilityRange),
    Inconsistent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyEntry {
    pub strategy: Strategy,
    pub lower: f64,
    pub upper: f64,
    pub inconsistent_mass: f64,
    /// Every world inconsistent: reported as [0,0] and never selected.
    pub all_inconsistent: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub strategy: Strategy,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityReport {
    pub decisions: Vec<String>,
    /// `None` when no strategy has a consistent world.
    pub best_lower: Option<Optimum>,
    pub best_upper: Option<Optimum>,
    /// Empty when the method computes optima only.
    pub per_strategy: Vec<StrategyEntry>,
    pub pairs_evaluated: u64,
}

impl UtilityReport {
    /// `{a,b}` over the report's decision names.
    pub fn render_strategy(&self, s: Strategy) -> String {
        let names: Vec<&str> =
            self.decisions.iter().enumerate().filter(|(i, _)| s.contains(*i)).map(|(_, n)| n.as_str()).collect();
        format!("{{{}}}", names.join(","))
    }
}

#[derive(Debug, Clone)]
pub struct EnumOptions {
    pub atom_cap: usize,
    pub fact_cap: usize,
    /// Upper bound on d + n.
    pub max_pairs_log2: u32,
    pub jobs: Option<usize>,
    pub deadline: Option<Instant>,
}

impl Default for EnumOptions {
    fn default() -> Self {
        EnumOptions {
            atom_cap: DEFAULT_ATOM_CAP,
            fact_cap: DEFAULT_FACT_CAP,
            max_pairs_log2: 24,
            jobs: None,
            deadline: None,
        }
    }
}

pub fn answer_set_reward(a: &Interpretation, utilities: &[(AtomId, f64)]) -> f64 {
    utilities.iter().filter(|(u, _)| a.contains(*u)).map(|(_, r)| r).sum()
}

/// Raw (unweighted) reward range over the answer sets of one world.
pub fn world_reward_range(p: &GroundProgram, sets: &[Interpretation]) -> WorldReward {
    if sets.is_empty() {
        return WorldReward::Inconsistent;
    }
    let rewards = sets.iter().map(|a| answer_set_reward(a, &p.utilities));
    let (lo, hi) = rewards.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), r| (l.min(r), h.max(r)));
    WorldReward::Range(UtilityRange { lower: lo, upper: hi })
}

/// One row of a per-strategy world table.
#[derive(Debug, Clone)]
pub struct WorldRow {
    pub world: World,
    pub answer_sets: Vec<Interpretation>,
    /// Probability-weighted range, `None` for inconsistent worlds.
    pub weighted: Option<UtilityRange>,
}

pub fn strategy_worlds(p: &GroundProgram, s: Strategy) -> Result<Vec<WorldRow>> {
    let solver = Solver::new(p, DEFAULT_ATOM_CAP)?;
    check_sizes(p, &EnumOptions::default())?;
    (0..1u64 << p.prob_facts.len())
        .map(|mask| {
            let world = World { mask, prob: world_prob(p, mask) };
            let answer_sets = solver.solve(&facts_for(p, mask, s.0))?;
            let weighted = match world_reward_range(p, &answer_sets) {
                WorldReward::Range(r) => {
                    Some(UtilityRange { lower: r.lower * world.prob, upper: r.upper * world.prob })
                }
                WorldReward::Inconsistent => None,
            };
            Ok(WorldRow { world, answer_sets, weighted })
        })
        .collect()
}

fn check_sizes(p: &GroundProgram, opts: &EnumOptions) -> Result<()> {
    let (d, n) = (p.decisions.len(), p.prob_facts.len());
    if n > opts.fact_cap {
        return Err(Error::Resource(format!("{n} probabilistic facts exceed the cap of {}", opts.fact_cap)));
    }
    if (d + n) as u32 > opts.max_pairs_log2.min(62) {
        return Err(Error::Resource(format!(
            "2^{} strategy/world pairs exceed the enumeration budget of 2^{}",
            d + n,
            opts.max_pairs_log2
        )));
    }
    Ok(())
}

struct Enumerator<'a> {
    p: &'a GroundProgram,
    solver: Solver<'a>,
    probs: Vec<f64>,
    counter: AtomicU64,
    deadline: Option<Instant>,
}

impl Enumerator<'_> {
    fn eval(&self, s: Strategy) -> Result<StrategyEntry> {
        let mut e = StrategyEntry { strategy: s, lower: 0.0, upper: 0.0, inconsistent_mass: 0.0, all_inconsistent: true };
        for (mask, &prob) in self.probs.iter().enumerate() {
            if let Some(d) = self.deadline {
                if Instant::now() > d {
                    return Err(Error::Timeout(d.elapsed()));
                }
            }
            let sets = self.solver.solve(&facts_for(self.p, mask as u64, s.0))?;
            self.counter.fetch_add(1, Ordering::Relaxed);
            match world_reward_range(self.p, &sets) {
                WorldReward::Inconsistent => e.inconsistent_mass += prob,
                WorldReward::Range(r) => {
                    e.all_inconsistent = false;
                    e.lower += prob * r.lower;
                    e.upper += prob * r.upper;
                }
            }
        }
        Ok(e)
    }
}

pub fn strategy_utility(p: &GroundProgram, s: Strategy) -> Result<StrategyEntry> {
    enumerator(p, &EnumOptions::default())?.eval(s)
}

fn enumerator<'a>(p: &'a GroundProgram, opts: &EnumOptions) -> Result<Enumerator<'a>> {
    check_sizes(p, opts)?;
    Ok(Enumerator {
        p,
        solver: Solver::new(p, opts.atom_cap)?,
        probs: (0..1u64 << p.prob_facts.len()).map(|m| world_prob(p, m)).collect(),
        counter: AtomicU64::new(0),
        deadline: opts.deadline,
    })
}

pub fn solve(p: &GroundProgram) -> Result<UtilityReport> {
    solve_with(p, &EnumOptions::default())
}

pub fn solve_with(p: &GroundProgram, opts: &EnumOptions) -> Result<UtilityReport> {
    let en = enumerator(p, opts)?;
    let strategies: Vec<Strategy> = (0..1u64 << p.decisions.len()).map(Strategy).collect();
    let run = || strategies.par_iter().map(|&s| en.eval(s)).collect::<Result<Vec<_>>>();
    let per_strategy = match opts.jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map_err(|e| Error::Resource(e.to_string()))?
            .install(run)?,
        None => run()?,
    };
    let mut report = UtilityReport {
        decisions: p.decisions.iter().map(|&d| p.name(d)).collect(),
        best_lower: None,
        best_upper: None,
        per_strategy,
        pairs_evaluated: en.counter.load(Ordering::Relaxed),
    };
    for e in report.per_strategy.iter().filter(|e| !e.all_inconsistent) {
        if report.best_lower.map_or(true, |b| e.lower > b.value) {
            report.best_lower = Some(Optimum { strategy: e.strategy, value: e.lower });
        }
        if report.best_upper.map_or(true, |b| e.upper > b.value) {
            report.best_upper = Some(Optimum { strategy: e.strategy, value: e.upper });
        }
    }
    for e in report.per_strategy.iter_mut().filter(|e| e.all_inconsistent) {
        e.lower = 0.0;
        e.upper = 0.0;
    }
    Ok(report)
}

/// Scalar expected utility when every world has exactly one answer set.
pub fn dtproblog_utility(p: &GroundProgram, s: Strategy) -> Result<f64> {
    let en = enumerator(p, &EnumOptions::default())?;
    let mut total = 0.0;
    for (mask, &prob) in en.probs.iter().enumerate() {
        let sets = en.solver.solve(&facts_for(p, mask as u64, s.0))?;
        if sets.len() != 1 {
            return Err(Error::NotDegenerate { world: mask as u64, count: sets.len() });
        }
        total += prob * answer_set_reward(&sets[0], &p.utilities);
    }
    Ok(total)
}
