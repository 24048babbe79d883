//! The compilation route: completion to CNF, definability, ordered
//! decomposition, decision-DNNF compilation and circuit evaluation.

pub mod circuit;
pub mod compiler;
pub mod completion;
pub mod definability;

use std::collections::BTreeSet;

pub use circuit::{audit, eval_circuit_3amc, parse_nnf, Circuit, Node, NodeId};
pub use compiler::{compile, compile_with, CompileOptions, TierPlan};
pub use completion::{check_supported, shift, to_cnf, CnfEncoding};
pub use definability::{definability, detect_gates, DefinabilityMode, Gate};

use crate::algebra::{tier_weights, AmcInstance, Outer};
use crate::cnf::Tier;
use crate::dt::{Optimum, Strategy, UtilityReport};
use crate::error::{Error, Result};
use crate::lang::GroundProgram;
use crate::treedecomp::{amc3_decomposition_with, audit_amc3, Amc3Decomposition};

/// Decision atoms representable in a strategy bitmask.
pub const MAX_DECISIONS: usize = 63;

#[derive(Debug, Clone, Default)]
pub struct Amc3Options {
    pub definability: DefinabilityMode,
    pub compile: CompileOptions,
}

/// Everything produced on the way from a program to its circuit.
#[derive(Debug, Clone)]
pub struct Compiled {
    pub encoding: CnfEncoding,
    pub instance: AmcInstance,
    pub decomposition: Amc3Decomposition,
    pub plan: TierPlan,
    pub circuit: Circuit,
}

impl Compiled {
    pub fn evaluate(&self) -> Result<Outer> {
        eval_circuit_3amc(&self.circuit, &self.instance, &self.plan.levels)
    }
}

fn tier_set(tiers: &[Tier], t: Tier) -> BTreeSet<usize> {
    (0..tiers.len()).filter(|&v| tiers[v] == t).collect()
}

/// Builds the weighted instance for a program; utilities on decisions must
/// already be lifted.
pub fn instance(p: &GroundProgram, enc: &CnfEncoding) -> Result<AmcInstance> {
    let w = tier_weights(p)?;
    let mut inst = AmcInstance::neutral(enc.cnf.clone(), enc.tiers.clone());
    for a in 0..enc.num_atoms {
        inst.inner[a] = w.inner[a];
        inst.middle[a] = w.middle[a];
        inst.outer[a] = w.outer[a];
    }
    Ok(inst)
}

/// Decomposes, compiles and audits a weighted instance.
pub fn compile_instance(
    inst: &AmcInstance,
    opts: &Amc3Options,
) -> Result<(Amc3Decomposition, TierPlan, Circuit)> {
    let (xo, xm, xi) =
        (tier_set(&inst.tiers, Tier::Outer), tier_set(&inst.tiers, Tier::Middle), tier_set(&inst.tiers, Tier::Inner));
    let d = amc3_decomposition_with(&inst.cnf, &xo, &xm, &xi, Some(opts.definability))?;
    audit_amc3(&inst.cnf, &xo, &xm, &d)?;
    let plan = TierPlan::new(inst, &d);
    let circuit = compile_with(&inst.cnf, &plan, &opts.compile)?;
    audit(&circuit, &plan.levels)?;
    Ok((d, plan, circuit))
}

pub fn compile_program(p: &GroundProgram, opts: &Amc3Options) -> Result<Compiled> {
    if p.decisions.len() > MAX_DECISIONS {
        return Err(Error::Resource(format!(
            "{} decision atoms exceed the limit of {MAX_DECISIONS}",
            p.decisions.len()
        )));
    }
    let p = p.lift_decision_utilities();
    let encoding = to_cnf(&p)?;
    let instance = instance(&p, &encoding)?;
    let (decomposition, plan, circuit) = compile_instance(&instance, opts)?;
    Ok(Compiled { encoding, instance, decomposition, plan, circuit })
}

/// Optimal lower and upper strategies from a three-level count.
pub fn report_from_outer(p: &GroundProgram, v: &Outer) -> UtilityReport {
    let opt = |value: f64, set: u64| {
        (value > f64::NEG_INFINITY).then_some(Optimum { strategy: Strategy(set), value })
    };
    UtilityReport {
        decisions: p.decisions.iter().map(|&d| p.name(d)).collect(),
        best_lower: opt(v.lo, v.lo_set),
        best_upper: opt(v.hi, v.hi_set),
        per_strategy: Vec::new(),
        pairs_evaluated: 0,
    }
}

pub fn solve_amc3(p: &GroundProgram) -> Result<UtilityReport> {
    solve_amc3_with(p, &Amc3Options::default())
}

pub fn solve_amc3_with(p: &GroundProgram, opts: &Amc3Options) -> Result<UtilityReport> {
    let c = compile_program(p, opts)?;
    Ok(report_from_outer(p, &c.evaluate()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{eval_3amc_by_definition, DEFINITION_CAP};
    use crate::lang::load;

    const EX5: &str = "0.3::a. 0.4::b. decision da. decision db. utility(qr,2). utility(nqr,-12).
                       qr :- da, a. qr ; nqr :- db, b.";

    #[test]
    fn example5() {
        let p = load(EX5).unwrap();
        let c = compile_program(&p, &Amc3Options::default()).unwrap();
        let v = c.evaluate().unwrap();
        let by_def = eval_3amc_by_definition(&c.instance, DEFINITION_CAP).unwrap();
        assert!((v.lo - 0.6).abs() < 1e-9 && (v.hi - 1.16).abs() < 1e-9, "{v:?}");
        assert!((by_def.lo - 0.6).abs() < 1e-9 && (by_def.hi - 1.16).abs() < 1e-9);
        let r = report_from_outer(&p, &v);
        assert_eq!(r.best_lower.unwrap().strategy, Strategy(1));
        assert_eq!(r.best_upper.unwrap().strategy, Strategy(3));
    }

    #[test]
    fn model_count_matches_cnf() {
        let p = load(EX5).unwrap();
        let c = compile_program(&p, &Amc3Options::default()).unwrap();
        assert_eq!(c.circuit.model_count() as usize, c.encoding.cnf.models_brute_force().len());
    }

    #[test]
    fn credal_bounds_as_utilities() {
        let p = load("0.3::a. 0.4::b. qr :- a. qr ; nqr :- b. utility(qr,1).").unwrap();
        let r = solve_amc3(&p).unwrap();
        assert!((r.best_lower.unwrap().value - 0.3).abs() < 1e-9);
        assert!((r.best_upper.unwrap().value - 0.58).abs() < 1e-9);
    }

    #[test]
    fn example8_definability() {
        let p = load("a :- b, not na. c :- a, b. na :- b, not a. 0.5::b.").unwrap();
        let e = to_cnf(&p).unwrap();
        let id = |s: &str| p.lookup(s).unwrap();
        let ab: BTreeSet<usize> = [id("a"), id("b")].into();
        for mode in [DefinabilityMode::Syntactic, DefinabilityMode::Semantic] {
            assert!(definability(&e.cnf, &ab, mode).unwrap().contains(&id("c")));
        }
        let nab: BTreeSet<usize> = [id("na"), id("b")].into();
        assert!(definability(&e.cnf, &nab, DefinabilityMode::Syntactic).unwrap().contains(&id("a")));
    }
}
