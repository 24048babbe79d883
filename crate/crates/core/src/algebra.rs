//! Semirings for two- and three-level algebraic model counting, the weight
//! and transformation functions of the decision task, and brute-force
//! evaluators that follow the nested-sum definitions literally.

use serde::{Deserialize, Serialize};

use crate::cnf::{satisfied_by_mask, Cnf, Lit, Tier};
use crate::error::{Error, Result};
use crate::lang::GroundProgram;

/// Decision sets are bitmasks over decision indices; the full set `D` is all ones.
pub const ALL_DECISIONS: u64 = u64::MAX;

pub trait Semiring: Clone + PartialEq + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn plus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    /// Equality up to `tol` on real components.
    fn approx_eq(&self, other: &Self, tol: f64) -> bool;
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

/// Minmax-plus pair: (minimum, maximum) reward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Inner {
    pub min: f64,
    pub max: f64,
}

impl Inner {
    pub fn new(min: f64, max: f64) -> Self {
        Inner { min, max }
    }
}

impl Semiring for Inner {
    fn zero() -> Self {
        Inner::new(f64::INFINITY, f64::NEG_INFINITY)
    }
    fn one() -> Self {
        Inner::new(0.0, 0.0)
    }
    fn plus(&self, o: &Self) -> Self {
        Inner::new(self.min.min(o.min), self.max.max(o.max))
    }
    fn times(&self, o: &Self) -> Self {
        Inner::new(self.min + o.min, self.max + o.max)
    }
    fn approx_eq(&self, o: &Self, tol: f64) -> bool {
        close(self.min, o.min, tol) && close(self.max, o.max, tol)
    }
}

/// Two-gradient triple: (probability, expected lower, expected upper).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Middle {
    pub prob: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Middle {
    pub fn new(prob: f64, lo: f64, hi: f64) -> Self {
        Middle { prob, lo, hi }
    }
}

impl Semiring for Middle {
    fn zero() -> Self {
        Middle::new(0.0, 0.0, 0.0)
    }
    fn one() -> Self {
        Middle::new(1.0, 0.0, 0.0)
    }
    fn plus(&self, o: &Self) -> Self {
        Middle::new(self.prob + o.prob, self.lo + o.lo, self.hi + o.hi)
    }
    fn times(&self, o: &Self) -> Self {
        Middle::new(
            self.prob * o.prob,
            self.prob * o.lo + o.prob * self.lo,
            self.prob * o.hi + o.prob * self.hi,
        )
    }
    fn approx_eq(&self, o: &Self, tol: f64) -> bool {
        close(self.prob, o.prob, tol) && close(self.lo, o.lo, tol) && close(self.hi, o.hi, tol)
    }
}

/// max^4 / sum^4 quadruple: best lower and upper values with their strategies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Outer {
    pub lo: f64,
    pub hi: f64,
    pub lo_set: u64,
    pub hi_set: u64,
}

impl Outer {
    pub fn new(lo: f64, hi: f64, lo_set: u64, hi_set: u64) -> Self {
        Outer { lo, hi, lo_set, hi_set }
    }
}

impl Semiring for Outer {
    fn zero() -> Self {
        Outer::new(f64::NEG_INFINITY, f64::NEG_INFINITY, ALL_DECISIONS, ALL_DECISIONS)
    }
    fn one() -> Self {
        Outer::new(0.0, 0.0, 0, 0)
    }
    /// Ties keep the left operand.
    fn plus(&self, o: &Self) -> Self {
        let (lo, lo_set) = if o.lo > self.lo { (o.lo, o.lo_set) } else { (self.lo, self.lo_set) };
        let (hi, hi_set) = if o.hi > self.hi { (o.hi, o.hi_set) } else { (self.hi, self.hi_set) };
        Outer::new(lo, hi, lo_set, hi_set)
    }
    fn times(&self, o: &Self) -> Self {
        Outer::new(self.lo + o.lo, self.hi + o.hi, self.lo_set | o.lo_set, self.hi_set | o.hi_set)
    }
    fn approx_eq(&self, o: &Self, tol: f64) -> bool {
        close(self.lo, o.lo, tol) && close(self.hi, o.hi, tol) && self.lo_set == o.lo_set && self.hi_set == o.hi_set
    }
}

/// Gradient pair (probability, expected utility) used by the two-level reduction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gradient {
    pub prob: f64,
    pub util: f64,
}

impl Semiring for Gradient {
    fn zero() -> Self {
        Gradient { prob: 0.0, util: 0.0 }
    }
    fn one() -> Self {
        Gradient { prob: 1.0, util: 0.0 }
    }
    fn plus(&self, o: &Self) -> Self {
        Gradient { prob: self.prob + o.prob, util: self.util + o.util }
    }
    fn times(&self, o: &Self) -> Self {
        Gradient { prob: self.prob * o.prob, util: self.prob * o.util + o.prob * self.util }
    }
    fn approx_eq(&self, o: &Self, tol: f64) -> bool {
        close(self.prob, o.prob, tol) && close(self.util, o.util, tol)
    }
}

/// Argmax pair (value, decision set); ties keep the left operand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArgMax {
    pub value: f64,
    pub set: u64,
}

impl Semiring for ArgMax {
    fn zero() -> Self {
        ArgMax { value: f64::NEG_INFINITY, set: ALL_DECISIONS }
    }
    fn one() -> Self {
        ArgMax { value: 0.0, set: 0 }
    }
    fn plus(&self, o: &Self) -> Self {
        if o.value > self.value {
            *o
        } else {
            *self
        }
    }
    fn times(&self, o: &Self) -> Self {
        ArgMax { value: self.value + o.value, set: self.set | o.set }
    }
    fn approx_eq(&self, o: &Self, tol: f64) -> bool {
        close(self.value, o.value, tol) && self.set == o.set
    }
}

/// Maps the inner zero (no answer set) to the middle zero.
pub fn transform_im(v: &Inner) -> Middle {
    if v.min == f64::INFINITY && v.max == f64::NEG_INFINITY {
        Middle::zero()
    } else {
        Middle::new(1.0, v.min, v.max)
    }
}

/// Drops the probability component.
pub fn transform_mo(v: &Middle) -> Outer {
    Outer::new(v.lo, v.hi, 0, 0)
}

/// As [`transform_mo`], but a strategy with no consistent mass becomes the
/// outer zero so it can never be selected.
pub fn transform_mo_guarded(v: &Middle) -> Outer {
    if v.prob == 0.0 {
        Outer::zero()
    } else {
        transform_mo(v)
    }
}

/// `f(p,u) = (u,{})`, and `(-inf, D)` when `p = 0`.
pub fn transform_dtproblog(v: &Gradient) -> ArgMax {
    if v.prob == 0.0 {
        ArgMax::zero()
    } else {
        ArgMax { value: v.util, set: 0 }
    }
}

/// Weights of both polarities, indexed `[negative, positive]`.
pub type Weights<S> = [S; 2];

pub fn lit_weight<S: Clone>(w: &Weights<S>, l: Lit) -> S {
    w[usize::from(l.is_positive())].clone()
}

/// Per-atom weights of the three levels, indexed by atom id.
#[derive(Debug, Clone)]
pub struct TierWeights {
    pub inner: Vec<Weights<Inner>>,
    pub middle: Vec<Weights<Middle>>,
    pub outer: Vec<Weights<Outer>>,
}

pub fn tier_weights(p: &GroundProgram) -> Result<TierWeights> {
    let n = p.num_atoms();
    let mut w = TierWeights {
        inner: vec![[Inner::one(); 2]; n],
        middle: vec![[Middle::one(); 2]; n],
        outer: vec![[Outer::one(); 2]; n],
    };
    for &(a, r) in &p.utilities {
        if p.is_decision(a) {
            return Err(Error::Invalid(format!(
                "utility on decision atom {}; add `r :- {0}.` with a utility on r instead",
                p.name(a)
            )));
        }
        w.inner[a][1] = Inner::new(r, r);
    }
    for &(a, pr) in &p.prob_facts {
        w.middle[a] = [Middle::new(1.0 - pr, 0.0, 0.0), Middle::new(pr, 0.0, 0.0)];
    }
    for (i, &d) in p.decisions.iter().enumerate() {
        w.outer[d][1] = Outer::new(0.0, 0.0, 1 << i, 1 << i);
    }
    Ok(w)
}

/// A three-level counting problem over a CNF.
#[derive(Debug, Clone)]
pub struct AmcInstance {
    pub cnf: Cnf,
    pub tiers: Vec<Tier>,
    pub inner: Vec<Weights<Inner>>,
    pub middle: Vec<Weights<Middle>>,
    pub outer: Vec<Weights<Outer>>,
}

impl AmcInstance {
    /// All weights neutral; callers fill in what they need.
    pub fn neutral(cnf: Cnf, tiers: Vec<Tier>) -> Self {
        let n = cnf.num_vars;
        AmcInstance {
            cnf,
            tiers,
            inner: vec![[Inner::one(); 2]; n],
            middle: vec![[Middle::one(); 2]; n],
            outer: vec![[Outer::one(); 2]; n],
        }
    }

    pub fn vars_of(&self, t: Tier) -> Vec<usize> {
        (0..self.cnf.num_vars).filter(|&v| self.tiers[v] == t).collect()
    }
}

/// Default variable cap of the brute-force evaluators.
pub const DEFINITION_CAP: usize = 24;

fn spread(bits: u64, vars: &[usize]) -> u64 {
    vars.iter().enumerate().filter(|(i, _)| bits >> i & 1 == 1).fold(0, |m, (_, &v)| m | 1 << v)
}

fn product<S: Semiring>(bits: u64, vars: &[usize], w: &[Weights<S>]) -> S {
    vars.iter()
        .enumerate()
        .fold(S::one(), |acc, (i, &v)| acc.times(&lit_weight(&w[v], Lit::new(v, bits >> i & 1 == 1))))
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap.min(62) {
        return Err(Error::Resource(format!("{n} variables exceed the brute-force cap of {cap}")));
    }
    Ok(())
}

/// Literal two-level nested sum over all assignments.
pub fn eval_2amc_by_definition<I: Semiring, O: Semiring>(
    cnf: &Cnf,
    is_outer: &[bool],
    wi: &[Weights<I>],
    wo: &[Weights<O>],
    f: impl Fn(&I) -> O,
    cap: usize,
) -> Result<O> {
    check_cap(cnf.num_vars, cap)?;
    let masks = cnf.clause_masks();
    let outer: Vec<usize> = (0..cnf.num_vars).filter(|&v| is_outer[v]).collect();
    let inner: Vec<usize> = (0..cnf.num_vars).filter(|&v| !is_outer[v]).collect();
    let mut total = O::zero();
    for ob in 0..1u64 << outer.len() {
        let base = spread(ob, &outer);
        let mut sum = I::zero();
        for ib in 0..1u64 << inner.len() {
            if satisfied_by_mask(&masks, base | spread(ib, &inner)) {
                sum = sum.plus(&product(ib, &inner, wi));
            }
        }
        total = total.plus(&product(ob, &outer, wo).times(&f(&sum)));
    }
    Ok(total)
}

/// Literal three-level nested sum; fully inconsistent strategies map to the
/// outer zero through [`transform_mo_guarded`].
pub fn eval_3amc_by_definition(inst: &AmcInstance, cap: usize) -> Result<Outer> {
    check_cap(inst.cnf.num_vars, cap)?;
    let masks = inst.cnf.clause_masks();
    let (xo, xm, xi) = (inst.vars_of(Tier::Outer), inst.vars_of(Tier::Middle), inst.vars_of(Tier::Inner));
    let mut total = Outer::zero();
    for ob in 0..1u64 << xo.len() {
        let obase = spread(ob, &xo);
        let mut mid = Middle::zero();
        for mb in 0..1u64 << xm.len() {
            let mbase = obase | spread(mb, &xm);
            let mut inn = Inner::zero();
            for ib in 0..1u64 << xi.len() {
                if satisfied_by_mask(&masks, mbase | spread(ib, &xi)) {
                    inn = inn.plus(&product(ib, &xi, &inst.inner));
                }
            }
            mid = mid.plus(&product(mb, &xm, &inst.middle).times(&transform_im(&inn)));
        }
        total = total.plus(&product(ob, &xo, &inst.outer).times(&transform_mo_guarded(&mid)));
    }
    Ok(total)
}

/// Checks commutativity, associativity, distributivity, neutrality and
/// annihilation on one triple of elements.
pub fn check_laws<S: Semiring>(a: &S, b: &S, c: &S, tol: f64) -> std::result::Result<(), String> {
    let (z, o) = (S::zero(), S::one());
    let checks = [
        ("plus commutative", a.plus(b), b.plus(a)),
        ("times commutative", a.times(b), b.times(a)),
        ("plus associative", a.plus(b).plus(c), a.plus(&b.plus(c))),
        ("times associative", a.times(b).times(c), a.times(&b.times(c))),
        ("distributive", a.times(&b.plus(c)), a.times(b).plus(&a.times(c))),
        ("zero neutral", z.plus(a), a.clone()),
        ("one neutral", o.times(a), a.clone()),
        ("zero annihilates", z.times(a), z.clone()),
    ];
    for (law, l, r) in checks {
        if !l.approx_eq(&r, tol) {
            return Err(format!("{law} fails for {a:?}, {b:?}, {c:?}: {l:?} vs {r:?}"));
        }
    }
    Ok(())
}
