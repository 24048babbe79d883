//! Top-down compilation to X/D-first decision-DNNF: unit propagation,
//! component splitting and Shannon expansion in decomposition order, with
//! formula caching.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::time::Instant;

use crate::algebra::{AmcInstance, Inner, Middle, Outer, Semiring};
use crate::cnf::{Cnf, Lit, Tier};
use crate::error::{Error, Result};
use crate::treedecomp::Amc3Decomposition;

use super::circuit::{Circuit, Node, NodeId};

/// Where each variable is summed and in which order variables are decided.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TierPlan {
    pub levels: Vec<Tier>,
    /// Both literal weights are the unit of the variable's own tier.
    pub neutral: Vec<bool>,
    /// Rank of each variable in the decision order.
    pub rank: Vec<usize>,
}

impl TierPlan {
    /// Neutral variables defined by the outer tier move up to it; inner
    /// variables defined by the outer and middle tiers move to the middle.
    pub fn new(inst: &AmcInstance, d: &Amc3Decomposition) -> Self {
        let n = inst.cnf.num_vars;
        let neutral: Vec<bool> = (0..n)
            .map(|v| match inst.tiers[v] {
                Tier::Outer => inst.outer[v].iter().all(|w| *w == Outer::one()),
                Tier::Middle => inst.middle[v].iter().all(|w| *w == Middle::one()),
                Tier::Inner => inst.inner[v].iter().all(|w| *w == Inner::one()),
            })
            .collect();
        let levels = (0..n)
            .map(|v| match inst.tiers[v] {
                Tier::Outer => Tier::Outer,
                _ if neutral[v] && d.defined_outer.contains(&v) => Tier::Outer,
                Tier::Middle => Tier::Middle,
                Tier::Inner if d.defined_outer_middle.contains(&v) => Tier::Middle,
                Tier::Inner => Tier::Inner,
            })
            .collect();
        let mut order = d.td.vertex_order(d.t_outer);
        let placed: HashSet<usize> = order.iter().copied().collect();
        order.extend((0..n).filter(|v| !placed.contains(v)));
        let mut rank = vec![0; n];
        for (i, &v) in order.iter().enumerate() {
            if v < n {
                rank[v] = i;
            }
        }
        TierPlan { levels, neutral, rank }
    }

    /// Tiers as levels, nothing neutral, index order.
    pub fn plain(tiers: &[Tier]) -> Self {
        TierPlan { levels: tiers.to_vec(), neutral: vec![false; tiers.len()], rank: (0..tiers.len()).collect() }
    }
}

#[derive(Debug, Clone)]
pub struct CompileOptions {
    pub max_nodes: usize,
    pub deadline: Option<Instant>,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions { max_nodes: 20_000_000, deadline: None }
    }
}

type Clauses = Vec<Vec<Lit>>;

struct Compiler<'a> {
    plan: &'a TierPlan,
    opts: &'a CompileOptions,
    out: Circuit,
    cache: HashMap<(Clauses, Vec<usize>), NodeId>,
    steps: u64,
}

fn normalize(c: &mut Vec<Lit>) -> bool {
    c.sort_unstable();
    c.dedup();
    !c.windows(2).any(|w| w[0].var() == w[1].var())
}

/// Clauses and variables of one connected piece.
struct Piece {
    clauses: Clauses,
    vars: Vec<usize>,
}

impl Compiler<'_> {
    fn level(&self, v: usize) -> Tier {
        self.plan.levels[v]
    }

    fn check_budget(&mut self) -> Result<()> {
        self.steps += 1;
        if self.out.len() > self.opts.max_nodes {
            return Err(Error::Resource(format!("circuit exceeds {} nodes", self.opts.max_nodes)));
        }
        if self.steps % 1024 == 0 {
            if let Some(d) = self.opts.deadline {
                if Instant::now() >= d {
                    return Err(Error::Resource("compilation deadline reached".into()));
                }
            }
        }
        Ok(())
    }

    fn compile(&mut self, mut clauses: Clauses, mut scope: Vec<usize>) -> Result<NodeId> {
        self.check_budget()?;
        clauses.sort();
        clauses.dedup();
        scope.sort_unstable();
        let key = (clauses, scope);
        if let Some(&id) = self.cache.get(&key) {
            return Ok(id);
        }
        let id = self.compile_uncached(key.0.clone(), key.1.clone())?;
        self.cache.insert(key, id);
        Ok(id)
    }

    fn compile_uncached(&mut self, clauses: Clauses, scope: Vec<usize>) -> Result<NodeId> {
        let Some(ctx) = scope.iter().map(|&v| self.level(v)).min() else {
            return Ok(self.out.add(if clauses.is_empty() { Node::True } else { Node::False }));
        };
        let Some((clauses, scope, leaves)) = self.simplify(clauses, scope, ctx) else {
            return Ok(self.out.add(Node::False));
        };
        let mut children = leaves;
        if scope.iter().all(|&v| self.level(v) != ctx) {
            // Simplification removed every variable of the context level.
            let rest = self.compile(clauses, scope)?;
            if rest == self.out.add(Node::False) {
                return Ok(rest);
            }
            children.push(rest);
            return Ok(self.out.add(Node::And(children)));
        }
        for group in self.groups(&clauses, &scope, ctx) {
            let id = if group.vars.len() == scope.len() {
                self.branch(group, ctx)?
            } else {
                self.compile(group.clauses, group.vars)?
            };
            if id == self.out.add(Node::False) {
                return Ok(id);
            }
            children.push(id);
        }
        Ok(self.out.add(Node::And(children)))
    }

    /// Shannon expansion on the earliest variable of the context level.
    fn branch(&mut self, group: Piece, ctx: Tier) -> Result<NodeId> {
        if group.clauses.is_empty() && group.vars.len() == 1 {
            let t = self.out.add(Node::True);
            return Ok(self.out.add(Node::Decision { var: group.vars[0], hi: t, lo: t }));
        }
        let var = group
            .vars
            .iter()
            .copied()
            .filter(|&v| self.level(v) == ctx)
            .min_by_key(|&v| self.plan.rank[v])
            .expect("context level is attained in the scope");
        let rest: Vec<usize> = group.vars.iter().copied().filter(|&v| v != var).collect();
        let hi = self.compile(condition(&group.clauses, Lit::pos(var)), rest.clone())?;
        let lo = self.compile(condition(&group.clauses, Lit::neg(var)), rest)?;
        let f = self.out.add(Node::False);
        if hi == f && lo == f {
            return Ok(f);
        }
        Ok(self.out.add(Node::Decision { var, hi, lo }))
    }

    /// Unit propagation and substitution of neutral equivalent variables.
    /// Units at the context level become leaves, neutral units vanish, and
    /// other units stay as unit clauses. `None` on conflict.
    fn simplify(&mut self, mut clauses: Clauses, scope: Vec<usize>, ctx: Tier) -> Option<(Clauses, Vec<usize>, Vec<NodeId>)> {
        let mut scope: BTreeSet<usize> = scope.into_iter().collect();
        let mut kept: BTreeSet<Lit> = BTreeSet::new();
        let mut leaves = Vec::new();
        loop {
            if clauses.iter().any(Vec::is_empty) {
                return None;
            }
            let units: Vec<Lit> = clauses.iter().filter(|c| c.len() == 1).map(|c| c[0]).collect();
            let fresh: Vec<Lit> = units.into_iter().filter(|l| !kept.contains(l)).collect();
            if !fresh.is_empty() {
                let mut assign: HashMap<usize, bool> = HashMap::new();
                for l in fresh {
                    if let Some(&b) = assign.get(&l.var()) {
                        if b != l.is_positive() {
                            return None;
                        }
                        continue;
                    }
                    if kept.contains(&!l) {
                        return None;
                    }
                    assign.insert(l.var(), l.is_positive());
                    let v = l.var();
                    if self.plan.neutral[v] {
                        scope.remove(&v);
                    } else if self.level(v) == ctx {
                        scope.remove(&v);
                        leaves.push(self.out.add(Node::Lit(l)));
                    } else {
                        kept.insert(l);
                    }
                }
                let mut next = Vec::with_capacity(clauses.len());
                for c in clauses {
                    if c.len() == 1 && kept.contains(&c[0]) {
                        continue;
                    }
                    if c.iter().any(|l| assign.get(&l.var()) == Some(&l.is_positive())) {
                        continue;
                    }
                    next.push(c.into_iter().filter(|l| !assign.contains_key(&l.var())).collect());
                }
                clauses = next;
                for &k in &kept {
                    clauses.push(vec![k]);
                }
                clauses.sort();
                clauses.dedup();
                continue;
            }
            match self.equivalence(&clauses, &kept) {
                Some((x, l)) => {
                    // x <-> l: rewrite x as l everywhere.
                    scope.remove(&x);
                    let mut next = Vec::with_capacity(clauses.len());
                    for c in clauses {
                        let mut c: Vec<Lit> = c
                            .into_iter()
                            .map(|m| if m.var() == x { if m.is_positive() { l } else { !l } } else { m })
                            .collect();
                        if normalize(&mut c) {
                            next.push(c);
                        }
                    }
                    next.sort();
                    next.dedup();
                    clauses = next;
                }
                None => break,
            }
        }
        Some((clauses, scope.into_iter().collect(), leaves))
    }

    /// A neutral variable `x` and literal `l` with `x <-> l` stated by two
    /// binary clauses, where `l` is summed no later than `x`.
    fn equivalence(&self, clauses: &Clauses, kept: &BTreeSet<Lit>) -> Option<(usize, Lit)> {
        let binaries: HashSet<(Lit, Lit)> =
            clauses.iter().filter(|c| c.len() == 2).map(|c| (c[0].min(c[1]), c[0].max(c[1]))).collect();
        let mut best: Option<(usize, Lit)> = None;
        for &(p, q) in &binaries {
            let (np, nq) = (!p, !q);
            if !binaries.contains(&(np.min(nq), np.max(nq))) {
                continue;
            }
            // p <-> !q
            for (a, b) in [(p, !q), (q, !p)] {
                let x = a.var();
                if self.plan.neutral[x]
                    && self.level(x) >= self.level(b.var())
                    && !kept.iter().any(|k| k.var() == x)
                {
                    let sub = if a.is_positive() { b } else { !b };
                    if best.map_or(true, |(bx, _)| x < bx) {
                        best = Some((x, sub));
                    }
                }
            }
        }
        best
    }

    /// Connected pieces, grouped so that for the outer and the middle split a
    /// piece mixing both sides has only siblings wholly above the split.
    fn groups(&self, clauses: &Clauses, scope: &[usize], ctx: Tier) -> Vec<Piece> {
        let pos: HashMap<usize, usize> = scope.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut parent: Vec<usize> = (0..scope.len()).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let nx = p[y];
                p[y] = r;
                y = nx;
            }
            r
        }
        for c in clauses {
            for l in &c[1..] {
                let a = find(&mut parent, pos[&c[0].var()]);
                let b = find(&mut parent, pos[&l.var()]);
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut pieces: Vec<Piece> = Vec::new();
        let mut slot: HashMap<usize, usize> = HashMap::new();
        for (i, &v) in scope.iter().enumerate() {
            let r = find(&mut parent, i);
            let k = *slot.entry(r).or_insert_with(|| {
                pieces.push(Piece { clauses: Vec::new(), vars: Vec::new() });
                pieces.len() - 1
            });
            pieces[k].vars.push(v);
        }
        for c in clauses {
            let r = find(&mut parent, pos[&c[0].var()]);
            pieces[slot[&r]].clauses.push(c.clone());
        }
        for split in [Tier::Outer, Tier::Middle] {
            if split >= ctx && pieces.len() > 1 {
                pieces = self.merge_mixed(pieces, split);
            }
        }
        pieces
    }

    /// Merges every piece not pure at or above `split` into one, if any of
    /// them mixes both sides of the split.
    fn merge_mixed(&self, pieces: Vec<Piece>, split: Tier) -> Vec<Piece> {
        let inside = |p: &Piece| p.vars.iter().filter(|&&v| self.level(v) <= split).count();
        if !pieces.iter().any(|p| (1..p.vars.len()).contains(&inside(p))) {
            return pieces;
        }
        let mut out = Vec::new();
        let mut merged = Piece { clauses: Vec::new(), vars: Vec::new() };
        for p in pieces {
            if inside(&p) == p.vars.len() {
                out.push(p);
            } else {
                merged.clauses.extend(p.clauses);
                merged.vars.extend(p.vars);
            }
        }
        merged.vars.sort_unstable();
        out.push(merged);
        out
    }
}

fn condition(clauses: &Clauses, l: Lit) -> Clauses {
    clauses
        .iter()
        .filter(|c| !c.contains(&l))
        .map(|c| c.iter().copied().filter(|&m| m != !l).collect())
        .collect()
}

/// Compiles `cnf` following `plan`. The root accounts for every variable.
pub fn compile(cnf: &Cnf, plan: &TierPlan) -> Result<Circuit> {
    compile_with(cnf, plan, &CompileOptions::default())
}

pub fn compile_with(cnf: &Cnf, plan: &TierPlan, opts: &CompileOptions) -> Result<Circuit> {
    if plan.levels.len() != cnf.num_vars {
        return Err(Error::Invalid("plan does not match the formula".into()));
    }
    let mut clauses = Vec::with_capacity(cnf.clauses.len());
    for c in &cnf.clauses {
        let mut c = c.clone();
        if normalize(&mut c) {
            clauses.push(c);
        }
    }
    let scope: Vec<usize> = (0..cnf.num_vars).collect();
    let run = move || -> Result<Circuit> {
        let mut comp =
            Compiler { plan, opts, out: Circuit::new(cnf.num_vars), cache: HashMap::new(), steps: 0 };
        comp.out.root = comp.compile(clauses, scope)?;
        Ok(comp.out)
    };
    // Recursion depth grows with the number of variables.
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(512 << 20)
            .spawn_scoped(s, run)
            .map_err(|e| Error::Resource(e.to_string()))?
            .join()
            .map_err(|_| Error::Resource("compiler thread panicked".into()))?
    })
}
