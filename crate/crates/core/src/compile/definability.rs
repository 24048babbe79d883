//! Variables whose value is fixed by an assignment to a given set.

use std::collections::{BTreeSet, HashSet};

use crate::cnf::{satisfied_by_mask, Cnf, Lit};
use crate::error::{Error, Result};

/// Variable cap of the semantic (brute-force) mode.
pub const SEMANTIC_CAP: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DefinabilityMode {
    /// Sound under-approximation from gate patterns in the clauses.
    #[default]
    Syntactic,
    /// Exact, by enumerating models; limited to [`SEMANTIC_CAP`] variables.
    Semantic,
}

/// `output <-> AND(inputs)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gate {
    pub output: Lit,
    pub inputs: Vec<Lit>,
}

/// Gates of the form: a clause `(m v l1 v .. v lk)` plus binaries `(-m v -li)`
/// for every `i`, which together state `m <-> AND(-l1, .., -lk)`.
pub fn detect_gates(c: &Cnf) -> Vec<Gate> {
    let binaries: HashSet<(Lit, Lit)> = c
        .clauses
        .iter()
        .filter(|cl| cl.len() == 2)
        .flat_map(|cl| [(cl[0], cl[1]), (cl[1], cl[0])])
        .collect();
    let mut gates = Vec::new();
    for cl in &c.clauses {
        for &m in cl {
            let others: Vec<Lit> = cl.iter().copied().filter(|&l| l != m).collect();
            if others.iter().all(|&l| binaries.contains(&(!m, !l))) {
                gates.push(Gate { output: m, inputs: others.iter().map(|&l| !l).collect() });
            }
        }
    }
    gates
}

/// `D(c, x)`: variables outside `x` defined by `x`.
pub fn definability(c: &Cnf, x: &BTreeSet<usize>, mode: DefinabilityMode) -> Result<BTreeSet<usize>> {
    match mode {
        DefinabilityMode::Syntactic => Ok(syntactic(c, x)),
        DefinabilityMode::Semantic => semantic(c, x),
    }
}

fn syntactic(c: &Cnf, x: &BTreeSet<usize>) -> BTreeSet<usize> {
    let gates = detect_gates(c);
    let mut known = x.clone();
    loop {
        let before = known.len();
        for g in &gates {
            if !known.contains(&g.output.var()) && g.inputs.iter().all(|l| known.contains(&l.var())) {
                known.insert(g.output.var());
            }
        }
        if known.len() == before {
            break;
        }
    }
    known.difference(x).copied().collect()
}

fn semantic(c: &Cnf, x: &BTreeSet<usize>) -> Result<BTreeSet<usize>> {
    if c.num_vars > SEMANTIC_CAP {
        return Err(Error::Resource(format!(
            "semantic definability limited to {SEMANTIC_CAP} variables, formula has {}",
            c.num_vars
        )));
    }
    let xmask: u64 = x.iter().fold(0, |m, &v| m | 1 << v);
    let masks = c.clause_masks();
    // Per projection onto x: (AND of models, OR of models).
    let mut seen: std::collections::HashMap<u64, (u64, u64)> = std::collections::HashMap::new();
    for m in 0..1u64 << c.num_vars {
        if satisfied_by_mask(&masks, m) {
            let e = seen.entry(m & xmask).or_insert((u64::MAX, 0));
            e.0 &= m;
            e.1 |= m;
        }
    }
    let varying = seen.values().fold(0u64, |acc, &(and, or)| acc | (and ^ or));
    Ok((0..c.num_vars).filter(|v| !x.contains(v) && varying >> v & 1 == 0).collect())
}
