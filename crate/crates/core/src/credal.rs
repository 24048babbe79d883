//! Worlds, world probabilities and lower/upper query probabilities.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lang::{AtomId, GroundProgram};
use crate::stable::{Interpretation, Solver, DEFAULT_ATOM_CAP};

/// Largest number of probabilistic facts enumerated by default.
pub const DEFAULT_FACT_CAP: usize = 24;

/// Bit `i` of `mask` selects the `i`-th probabilistic fact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct World {
    pub mask: u64,
    pub prob: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CredalResult {
    pub lower: f64,
    pub upper: f64,
    pub inconsistent_mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueryLit {
    pub atom: AtomId,
    pub positive: bool,
}

pub fn enumerate_worlds(p: &GroundProgram) -> Result<Vec<World>> {
    enumerate_worlds_capped(p, DEFAULT_FACT_CAP)
}

pub fn enumerate_worlds_capped(p: &GroundProgram, cap: usize) -> Result<Vec<World>> {
    let n = p.prob_facts.len();
    if n > cap.min(63) {
        return Err(Error::Resource(format!("{n} probabilistic facts exceed the cap of {cap}")));
    }
    Ok((0..1u64 << n).map(|mask| World { mask, prob: world_prob(p, mask) }).collect())
}

pub fn world_prob(p: &GroundProgram, mask: u64) -> f64 {
    p.prob_facts
        .iter()
        .enumerate()
        .map(|(i, &(_, pr))| if mask >> i & 1 == 1 { pr } else { 1.0 - pr })
        .product()
}

/// Facts made true by a world mask together with a decision mask.
pub fn facts_for(p: &GroundProgram, world: u64, strategy: u64) -> Interpretation {
    let facts = p.prob_facts.iter().enumerate().filter(|(i, _)| world >> i & 1 == 1).map(|(_, &(a, _))| a);
    let decs = p.decisions.iter().enumerate().filter(|(i, _)| strategy >> i & 1 == 1).map(|(_, &d)| d);
    Interpretation::from_atoms(p.num_atoms(), facts.chain(decs))
}

/// Parses `qr`, `not qr`, `\+qr`, and comma-separated conjunctions thereof.
pub fn parse_query(p: &GroundProgram, text: &str) -> Result<Vec<QueryLit>> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    let mut parts = Vec::new();
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&text[start..]);
    for part in parts {
        let part = part.trim();
        let (positive, atom) = if let Some(rest) = part.strip_prefix("\\+") {
            (false, rest)
        } else if let Some(rest) = part.strip_prefix("not ") {
            (false, rest)
        } else {
            (true, part)
        };
        if atom.trim().is_empty() {
            return Err(Error::Invalid(format!("empty query literal in `{text}`")));
        }
        out.push(QueryLit { atom: p.lookup(atom)?, positive });
    }
    Ok(out)
}

fn holds(q: &[QueryLit], m: &Interpretation) -> bool {
    q.iter().all(|l| m.contains(l.atom) == l.positive)
}

/// Answer sets of every world under a decision mask, in mask order.
pub fn world_answer_sets(p: &GroundProgram, strategy: u64) -> Result<Vec<(World, Vec<Interpretation>)>> {
    world_answer_sets_capped(p, strategy, DEFAULT_ATOM_CAP, DEFAULT_FACT_CAP)
}

pub fn world_answer_sets_capped(
    p: &GroundProgram,
    strategy: u64,
    atom_cap: usize,
    fact_cap: usize,
) -> Result<Vec<(World, Vec<Interpretation>)>> {
    let worlds = enumerate_worlds_capped(p, fact_cap)?;
    let solver = Solver::new(p, atom_cap)?;
    worlds
        .par_iter()
        .map(|w| Ok((*w, solver.solve(&facts_for(p, w.mask, strategy))?)))
        .collect()
}

pub fn query_probability(p: &GroundProgram, q: &[QueryLit]) -> Result<CredalResult> {
    query_probability_capped(p, q, DEFAULT_ATOM_CAP, DEFAULT_FACT_CAP)
}

/// Decision atoms are taken as false.
pub fn query_probability_capped(
    p: &GroundProgram,
    q: &[QueryLit],
    atom_cap: usize,
    fact_cap: usize,
) -> Result<CredalResult> {
    let mut r = CredalResult { lower: 0.0, upper: 0.0, inconsistent_mass: 0.0 };
    for (w, sets) in world_answer_sets_capped(p, 0, atom_cap, fact_cap)? {
        if sets.is_empty() {
            r.inconsistent_mass += w.prob;
            continue;
        }
        if sets.iter().all(|m| holds(q, m)) {
            r.lower += w.prob;
        }
        if sets.iter().any(|m| holds(q, m)) {
            r.upper += w.prob;
        }
    }
    Ok(r)
}
