//! Hash-consed decision-DNNF circuits, their text form, structural audit
//! and bottom-up three-level evaluation.

use std::collections::HashMap;
use std::fmt::Write as _;

use fixedbitset::FixedBitSet;

use crate::algebra::{lit_weight, transform_im, transform_mo_guarded, AmcInstance, Inner, Middle, Outer, Semiring};
use crate::cnf::{Lit, Tier};
use crate::error::{Error, ParseError, Result};

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    True,
    False,
    Lit(Lit),
    And(Vec<NodeId>),
    Or(Vec<NodeId>),
    /// Shannon node: `(var & hi) | (!var & lo)`; children do not mention `var`.
    Decision { var: usize, hi: NodeId, lo: NodeId },
}

/// Nodes are stored children-first; the last node need not be the root.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Circuit {
    pub num_vars: usize,
    pub nodes: Vec<Node>,
    pub root: NodeId,
    index: HashMap<Node, NodeId>,
}

impl Circuit {
    pub fn new(num_vars: usize) -> Self {
        Circuit { num_vars, ..Circuit::default() }
    }

    /// Adds a node, returning the existing id for structurally equal nodes.
    /// Conjunctions are flattened and simplified.
    pub fn add(&mut self, node: Node) -> NodeId {
        let node = match node {
            Node::And(children) => {
                let mut flat = Vec::new();
                for c in children {
                    match &self.nodes[c] {
                        Node::False => return self.add(Node::False),
                        Node::True => {}
                        Node::And(gs) => flat.extend(gs.iter().copied()),
                        _ => flat.push(c),
                    }
                }
                flat.sort_unstable();
                flat.dedup();
                match flat.len() {
                    0 => Node::True,
                    1 => return flat[0],
                    _ => Node::And(flat),
                }
            }
            n => n,
        };
        if let Some(&id) = self.index.get(&node) {
            return id;
        }
        let id = self.nodes.len();
        self.index.insert(node.clone(), id);
        self.nodes.push(node);
        id
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn children(&self, id: NodeId) -> Vec<NodeId> {
        match &self.nodes[id] {
            Node::And(cs) | Node::Or(cs) => cs.clone(),
            Node::Decision { hi, lo, .. } => vec![*hi, *lo],
            _ => Vec::new(),
        }
    }

    /// Variables mentioned below each node.
    pub fn node_vars(&self) -> Vec<FixedBitSet> {
        let mut out: Vec<FixedBitSet> = Vec::with_capacity(self.nodes.len());
        for n in &self.nodes {
            let mut s = FixedBitSet::with_capacity(self.num_vars);
            match n {
                Node::True | Node::False => {}
                Node::Lit(l) => s.insert(l.var()),
                Node::And(cs) | Node::Or(cs) => cs.iter().for_each(|&c| s.union_with(&out[c])),
                Node::Decision { var, hi, lo } => {
                    s.insert(*var);
                    s.union_with(&out[*hi]);
                    s.union_with(&out[*lo]);
                }
            }
            out.push(s);
        }
        out
    }

    /// Number of satisfying assignments of the variables the circuit
    /// accounts for (saturating).
    pub fn model_count(&self) -> u128 {
        let mut v: Vec<u128> = Vec::with_capacity(self.nodes.len());
        for n in &self.nodes {
            let x = match n {
                Node::True | Node::Lit(_) => 1,
                Node::False => 0,
                Node::And(cs) => cs.iter().fold(1u128, |a, &c| a.saturating_mul(v[c])),
                Node::Or(cs) => cs.iter().fold(0u128, |a, &c| a.saturating_add(v[c])),
                Node::Decision { hi, lo, .. } => v[*hi].saturating_add(v[*lo]),
            };
            v.push(x);
        }
        v.get(self.root).copied().unwrap_or(0)
    }

    /// Line-oriented text: a header `nnf <nodes> <vars> <root>` and one line
    /// per node, `<id> T|F`, `<id> L <lit>`, `<id> A|O <child>..`, or
    /// `<id> D <var> <hi> <lo>`, with DIMACS literals and 1-based variables.
    pub fn to_nnf(&self) -> String {
        let mut out = format!("nnf {} {} {}\n", self.nodes.len(), self.num_vars, self.root);
        for (i, n) in self.nodes.iter().enumerate() {
            let _ = match n {
                Node::True => writeln!(out, "{i} T"),
                Node::False => writeln!(out, "{i} F"),
                Node::Lit(l) => writeln!(out, "{i} L {}", l.to_dimacs()),
                Node::And(cs) | Node::Or(cs) => {
                    let k = if matches!(n, Node::And(_)) { 'A' } else { 'O' };
                    let cs: Vec<String> = cs.iter().map(ToString::to_string).collect();
                    writeln!(out, "{i} {k} {}", cs.join(" "))
                }
                Node::Decision { var, hi, lo } => writeln!(out, "{i} D {} {hi} {lo}", var + 1),
            };
        }
        out
    }
}

/// Parses [`Circuit::to_nnf`] output. Children must precede their parents.
pub fn parse_nnf(src: &str) -> std::result::Result<Circuit, ParseError> {
    let mut lines = src.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('c'));
    let (hl, header) = lines.next().ok_or_else(|| ParseError::new(1, 1, "missing `nnf` header"))?;
    let words: Vec<&str> = header.split_whitespace().collect();
    let num = |w: &str, ln: usize| -> std::result::Result<usize, ParseError> {
        w.parse::<usize>().map_err(|_| ParseError::new(ln, 1, format!("expected a number, found `{w}`")))
    };
    if words.len() != 4 || words[0] != "nnf" {
        return Err(ParseError::new(hl + 1, 1, "expected `nnf <nodes> <vars> <root>`"));
    }
    let (count, num_vars, root) = (num(words[1], hl + 1)?, num(words[2], hl + 1)?, num(words[3], hl + 1)?);
    if num_vars > 1 << 24 {
        return Err(ParseError::new(hl + 1, 1, "too many variables"));
    }
    let mut c = Circuit::new(num_vars);
    for (ln, line) in lines {
        let ln = ln + 1;
        let words: Vec<&str> = line.split_whitespace().collect();
        let id = num(words[0], ln)?;
        if id != c.nodes.len() {
            return Err(ParseError::new(ln, 1, format!("expected node {}, found {id}", c.nodes.len())));
        }
        let child = |w: &str| -> std::result::Result<NodeId, ParseError> {
            let x = num(w, ln)?;
            if x >= id {
                return Err(ParseError::new(ln, 1, format!("child {x} does not precede node {id}")));
            }
            Ok(x)
        };
        let arity = |k: usize| -> std::result::Result<(), ParseError> {
            if words.len() != k {
                return Err(ParseError::new(ln, 1, format!("expected {} fields", k)));
            }
            Ok(())
        };
        let node = match words.get(1).copied() {
            Some("T") => {
                arity(2)?;
                Node::True
            }
            Some("F") => {
                arity(2)?;
                Node::False
            }
            Some("L") => {
                arity(3)?;
                let x: i64 = words[2].parse().map_err(|_| ParseError::new(ln, 1, "bad literal"))?;
                let l = Lit::from_dimacs(x).ok_or_else(|| ParseError::new(ln, 1, "bad literal"))?;
                if l.var() >= num_vars {
                    return Err(ParseError::new(ln, 1, format!("literal {x} out of range")));
                }
                Node::Lit(l)
            }
            Some(k @ ("A" | "O")) => {
                let cs = words[2..].iter().map(|w| child(w)).collect::<std::result::Result<Vec<_>, _>>()?;
                if k == "A" {
                    Node::And(cs)
                } else {
                    Node::Or(cs)
                }
            }
            Some("D") => {
                arity(5)?;
                let var = num(words[2], ln)?;
                if var == 0 || var > num_vars {
                    return Err(ParseError::new(ln, 1, format!("variable {var} out of range")));
                }
                Node::Decision { var: var - 1, hi: child(words[3])?, lo: child(words[4])? }
            }
            _ => return Err(ParseError::new(ln, 1, "unknown node kind")),
        };
        c.index.entry(node.clone()).or_insert(id);
        c.nodes.push(node);
    }
    if c.nodes.len() != count {
        return Err(ParseError::new(1, 1, format!("header announces {count} nodes, found {}", c.nodes.len())));
    }
    if root >= count {
        return Err(ParseError::new(1, 1, "root out of range"));
    }
    c.root = root;
    Ok(c)
}

fn node_level(vars: &FixedBitSet, levels: &[Tier]) -> Tier {
    vars.ones().map(|v| levels[v]).min().unwrap_or(Tier::Inner)
}

/// Structural check: decomposable conjunctions, decisions on variables
/// absent below them and at the node's own level, and, for both splits
/// (outer | rest) and (outer and middle | inner), every conjunction has at
/// most one mixed child with all siblings inside the first part.
pub fn audit(c: &Circuit, levels: &[Tier]) -> Result<()> {
    let vars = c.node_vars();
    for (i, n) in c.nodes.iter().enumerate() {
        match n {
            Node::And(cs) => {
                let mut seen = FixedBitSet::with_capacity(c.num_vars);
                for &ch in cs {
                    if !seen.is_disjoint(&vars[ch]) {
                        return Err(Error::Purity(format!("node {i}: conjunction is not decomposable")));
                    }
                    seen.union_with(&vars[ch]);
                }
                for split in [Tier::Outer, Tier::Middle] {
                    let inside = |v: usize| levels[v] <= split;
                    let mut mixed = 0;
                    let mut outside_pure = false;
                    for &ch in cs {
                        let ins = vars[ch].ones().filter(|&v| inside(v)).count();
                        let total = vars[ch].count_ones(..);
                        if ins > 0 && ins < total {
                            mixed += 1;
                        } else if ins == 0 && total > 0 {
                            outside_pure = true;
                        }
                    }
                    if mixed > 1 || (mixed == 1 && outside_pure) {
                        return Err(Error::Purity(format!(
                            "node {i}: conjunction violates the {}-first condition",
                            split.keyword()
                        )));
                    }
                }
            }
            Node::Decision { var, hi, lo } => {
                if vars[*hi].contains(*var) || vars[*lo].contains(*var) {
                    return Err(Error::Purity(format!("node {i}: decided variable reappears below")));
                }
                if levels[*var] != node_level(&vars[i], levels) {
                    return Err(Error::Purity(format!("node {i}: variable {} decided too early", var + 1)));
                }
            }
            _ => {}
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Val {
    O(Outer),
    M(Middle),
    I(Inner),
}

impl Val {
    fn level(&self) -> Tier {
        match self {
            Val::O(_) => Tier::Outer,
            Val::M(_) => Tier::Middle,
            Val::I(_) => Tier::Inner,
        }
    }

    fn middle(self) -> Middle {
        match self {
            Val::I(x) => transform_im(&x),
            Val::M(x) => x,
            Val::O(_) => unreachable!("outer value lifted downwards"),
        }
    }

    fn outer(self) -> Outer {
        match self {
            Val::O(x) => x,
            v => transform_mo_guarded(&v.middle()),
        }
    }

    fn lift(self, to: Tier) -> Val {
        match to {
            Tier::Outer => Val::O(self.outer()),
            Tier::Middle => Val::M(self.middle()),
            Tier::Inner => self,
        }
    }
}

/// Weight of literal `l` evaluated at `level`.
fn leaf(inst: &AmcInstance, level: Tier, l: Lit) -> Val {
    let v = l.var();
    match level {
        Tier::Outer if inst.tiers[v] == Tier::Outer => Val::O(lit_weight(&inst.outer[v], l)),
        Tier::Outer => Val::O(Outer::one()),
        Tier::Middle if inst.tiers[v] == Tier::Middle => Val::M(lit_weight(&inst.middle[v], l)),
        Tier::Middle => Val::M(transform_im(&lit_weight(&inst.inner[v], l))),
        Tier::Inner => Val::I(lit_weight(&inst.inner[v], l)),
    }
}

fn times(a: Val, b: Val) -> Val {
    match (a, b) {
        (Val::O(x), Val::O(y)) => Val::O(x.times(&y)),
        (Val::M(x), Val::M(y)) => Val::M(x.times(&y)),
        (Val::I(x), Val::I(y)) => Val::I(x.times(&y)),
        _ => unreachable!("operands at different levels"),
    }
}

fn plus(a: Val, b: Val) -> Val {
    match (a, b) {
        (Val::O(x), Val::O(y)) => Val::O(x.plus(&y)),
        (Val::M(x), Val::M(y)) => Val::M(x.plus(&y)),
        (Val::I(x), Val::I(y)) => Val::I(x.plus(&y)),
        _ => unreachable!("operands at different levels"),
    }
}

fn one(level: Tier) -> Val {
    match level {
        Tier::Outer => Val::O(Outer::one()),
        Tier::Middle => Val::M(Middle::one()),
        Tier::Inner => Val::I(Inner::one()),
    }
}

/// Bottom-up evaluation. `levels[v]` is the level at which variable `v` is
/// summed; conjunctions multiply inner children, lift them, multiply middle
/// children, lift again and multiply outer children.
pub fn eval_circuit_3amc(c: &Circuit, inst: &AmcInstance, levels: &[Tier]) -> Result<Outer> {
    if c.nodes.is_empty() {
        return Err(Error::Invalid("empty circuit".into()));
    }
    let vars = c.node_vars();
    let mut vals: Vec<Val> = Vec::with_capacity(c.nodes.len());
    for (i, n) in c.nodes.iter().enumerate() {
        let lvl = node_level(&vars[i], levels);
        let v = match n {
            Node::True => Val::I(Inner::one()),
            Node::False => Val::I(Inner::zero()),
            Node::Lit(l) => leaf(inst, levels[l.var()], *l),
            Node::And(cs) => {
                let mut acc = one(Tier::Inner);
                for t in [Tier::Inner, Tier::Middle, Tier::Outer] {
                    if t < lvl {
                        break;
                    }
                    acc = acc.lift(t);
                    for &ch in cs.iter().filter(|&&ch| vals[ch].level() == t) {
                        acc = times(acc, vals[ch]);
                    }
                }
                acc.lift(lvl)
            }
            Node::Or(cs) => cs
                .iter()
                .map(|&ch| vals[ch].lift(lvl))
                .reduce(plus)
                .unwrap_or_else(|| Val::I(Inner::zero()).lift(lvl)),
            Node::Decision { var, hi, lo } => {
                if levels[*var] != lvl {
                    return Err(Error::Purity(format!("node {i}: variable {} decided too early", var + 1)));
                }
                let pos = times(leaf(inst, lvl, Lit::pos(*var)), vals[*hi].lift(lvl));
                let neg = times(leaf(inst, lvl, Lit::neg(*var)), vals[*lo].lift(lvl));
                plus(neg, pos)
            }
        };
        vals.push(v);
    }
    Ok(vals[c.root].outer())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_consing_and_simplification() {
        let mut c = Circuit::new(2);
        let t = c.add(Node::True);
        let f = c.add(Node::False);
        let a = c.add(Node::Lit(Lit::pos(0)));
        assert_eq!(c.add(Node::Lit(Lit::pos(0))), a);
        assert_eq!(c.add(Node::And(vec![a, t])), a);
        assert_eq!(c.add(Node::And(vec![a, f])), f);
        assert_eq!(c.add(Node::And(vec![])), t);
    }

    #[test]
    fn nnf_round_trip() {
        let mut c = Circuit::new(2);
        let a = c.add(Node::Lit(Lit::pos(0)));
        let b = c.add(Node::Lit(Lit::neg(1)));
        let t = c.add(Node::True);
        let and = c.add(Node::And(vec![a, b]));
        c.root = c.add(Node::Decision { var: 1, hi: t, lo: a });
        let _ = and;
        let back = parse_nnf(&c.to_nnf()).unwrap();
        assert_eq!(back.nodes, c.nodes);
        assert_eq!(back.root, c.root);
        assert!(parse_nnf("nnf 1 1 0\n0 A 0").is_err());
        assert!(parse_nnf("nnf 1 1 0\n0 L 2").is_err());
        assert!(parse_nnf("").is_err());
    }

    #[test]
    fn audit_rejects_mixed_siblings() {
        let levels = [Tier::Outer, Tier::Middle, Tier::Inner, Tier::Inner];
        let mut c = Circuit::new(4);
        let o = c.add(Node::Lit(Lit::pos(0)));
        let m = c.add(Node::Lit(Lit::pos(1)));
        let i = c.add(Node::Lit(Lit::pos(2)));
        let j = c.add(Node::Lit(Lit::pos(3)));
        let t = c.add(Node::True);
        let mixed = c.add(Node::Decision { var: 1, hi: i, lo: t });
        c.root = c.add(Node::And(vec![o, mixed]));
        audit(&c, &levels).unwrap();

        let mut bad = c.clone();
        bad.root = bad.add(Node::And(vec![mixed, j]));
        assert!(audit(&bad, &levels).is_err());

        let mut early = c.clone();
        early.root = early.add(Node::Decision { var: 2, hi: m, lo: t });
        assert!(audit(&early, &levels).is_err());
    }
}
