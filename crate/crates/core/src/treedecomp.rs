//! Primal graphs, vertex separators, tree decompositions and the
//! three-part decomposition that orders outer, middle and inner variables.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::cnf::Cnf;
use crate::compile::definability::{definability, DefinabilityMode};
use crate::error::{Error, ParseError, Result};

pub type VertexSet = BTreeSet<usize>;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Graph {
    adj: BTreeMap<usize, VertexSet>,
}

impl Graph {
    pub fn new() -> Self {
        Graph::default()
    }

    pub fn with_vertices(vs: impl IntoIterator<Item = usize>) -> Self {
        let mut g = Graph::new();
        for v in vs {
            g.add_vertex(v);
        }
        g
    }

    pub fn add_vertex(&mut self, v: usize) {
        self.adj.entry(v).or_default();
    }

    /// Self-loops are ignored.
    pub fn add_edge(&mut self, u: usize, v: usize) {
        self.add_vertex(u);
        self.add_vertex(v);
        if u != v {
            self.adj.get_mut(&u).unwrap().insert(v);
            self.adj.get_mut(&v).unwrap().insert(u);
        }
    }

    pub fn add_clique(&mut self, vs: &VertexSet) {
        for &u in vs {
            self.add_vertex(u);
            for &v in vs {
                self.add_edge(u, v);
            }
        }
    }

    pub fn contains(&self, v: usize) -> bool {
        self.adj.contains_key(&v)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj.get(&u).is_some_and(|n| n.contains(&v))
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj.get(&v).into_iter().flatten().copied()
    }

    pub fn vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.adj.keys().copied()
    }

    pub fn num_vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adj.iter().flat_map(|(&u, n)| n.range(u + 1..).map(move |&v| (u, v))).collect()
    }

    pub fn induced(&self, keep: &VertexSet) -> Graph {
        let mut g = Graph::with_vertices(keep.iter().copied().filter(|v| self.contains(*v)));
        for (u, v) in self.edges() {
            if keep.contains(&u) && keep.contains(&v) {
                g.add_edge(u, v);
            }
        }
        g
    }

    pub fn without(&self, drop: &VertexSet) -> Graph {
        let keep = self.vertices().filter(|v| !drop.contains(v)).collect();
        self.induced(&keep)
    }

    /// Removes `drop`, connecting the neighbours of every connected piece of
    /// `drop` so that paths through it survive as edges.
    pub fn torso(&self, drop: &VertexSet) -> Graph {
        let mut g = self.without(drop);
        for piece in self.induced(drop).components() {
            let border: VertexSet =
                piece.iter().flat_map(|&v| self.neighbors(v)).filter(|v| !drop.contains(v)).collect();
            g.add_clique(&border);
        }
        g
    }

    /// Connected components, ordered by smallest vertex.
    pub fn components(&self) -> Vec<VertexSet> {
        let mut seen = VertexSet::new();
        let mut out = Vec::new();
        for s in self.vertices() {
            if seen.insert(s) {
                let mut comp = VertexSet::from([s]);
                let mut queue = VecDeque::from([s]);
                while let Some(u) = queue.pop_front() {
                    for v in self.neighbors(u) {
                        if seen.insert(v) {
                            comp.insert(v);
                            queue.push_back(v);
                        }
                    }
                }
                out.push(comp);
            }
        }
        out
    }

    /// Vertices reachable from `from` without entering `blocked`.
    pub fn reachable(&self, from: &VertexSet, blocked: &VertexSet) -> VertexSet {
        let mut seen: VertexSet = from.iter().copied().filter(|v| !blocked.contains(v) && self.contains(*v)).collect();
        let mut queue: VecDeque<usize> = seen.iter().copied().collect();
        while let Some(u) = queue.pop_front() {
            for v in self.neighbors(u) {
                if !blocked.contains(&v) && seen.insert(v) {
                    queue.push_back(v);
                }
            }
        }
        seen
    }
}

pub fn primal_graph(c: &Cnf) -> Graph {
    let mut g = Graph::with_vertices(0..c.num_vars);
    for cl in &c.clauses {
        for (i, a) in cl.iter().enumerate() {
            for b in &cl[i + 1..] {
                g.add_edge(a.var(), b.var());
            }
        }
    }
    g
}

/// Whether removing `s` leaves no path from `w` to a vertex outside `v ∪ w`.
pub fn separates(g: &Graph, v: &VertexSet, w: &VertexSet, s: &VertexSet) -> bool {
    g.reachable(w, s).iter().all(|x| v.contains(x) || w.contains(x))
}

/// A minimum-cardinality `S ⊆ v ∪ w` whose removal leaves no path from `w`
/// to any vertex outside `v ∪ w`. Unit-capacity vertex-split max-flow with
/// breadth-first augmenting paths.
pub fn minimum_separator(g: &Graph, v: &VertexSet, w: &VertexSet) -> VertexSet {
    let verts: Vec<usize> = g.vertices().collect();
    let idx: BTreeMap<usize, usize> = verts.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let n = verts.len();
    let (src, sink) = (2 * n, 2 * n + 1);
    let inf = n as i64 + 1;
    let mut net = FlowNet::new(2 * n + 2);
    for (i, &x) in verts.iter().enumerate() {
        let cuttable = v.contains(&x) || w.contains(&x);
        net.add(2 * i, 2 * i + 1, if cuttable { 1 } else { inf });
        if w.contains(&x) {
            net.add(src, 2 * i, inf);
        }
        if !cuttable {
            net.add(2 * i + 1, sink, inf);
        }
        for y in g.neighbors(x) {
            net.add(2 * i + 1, 2 * idx[&y], inf);
        }
    }
    net.max_flow(src, sink);
    let side = net.source_side(src);
    verts.iter().enumerate().filter(|(i, _)| side[2 * i] && !side[2 * i + 1]).map(|(_, &x)| x).collect()
}

struct FlowNet {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<i64>,
}

impl FlowNet {
    fn new(n: usize) -> Self {
        FlowNet { head: vec![Vec::new(); n], to: Vec::new(), cap: Vec::new() }
    }

    fn add(&mut self, a: usize, b: usize, c: i64) {
        self.head[a].push(self.to.len());
        self.to.push(b);
        self.cap.push(c);
        self.head[b].push(self.to.len());
        self.to.push(a);
        self.cap.push(0);
    }

    fn max_flow(&mut self, s: usize, t: usize) -> i64 {
        let mut total = 0;
        loop {
            let mut prev = vec![usize::MAX; self.head.len()];
            let mut queue = VecDeque::from([s]);
            let mut seen = vec![false; self.head.len()];
            seen[s] = true;
            while let Some(u) = queue.pop_front() {
                for &e in &self.head[u] {
                    let v = self.to[e];
                    if self.cap[e] > 0 && !seen[v] {
                        seen[v] = true;
                        prev[v] = e;
                        queue.push_back(v);
                    }
                }
            }
            if !seen[t] {
                return total;
            }
            let mut push = i64::MAX;
            let mut v = t;
            while v != s {
                let e = prev[v];
                push = push.min(self.cap[e]);
                v = self.to[e ^ 1];
            }
            let mut v = t;
            while v != s {
                let e = prev[v];
                self.cap[e] -= push;
                self.cap[e ^ 1] += push;
                v = self.to[e ^ 1];
            }
            total += push;
        }
    }

    fn source_side(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.head.len()];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &e in &self.head[u] {
                if self.cap[e] > 0 && !seen[self.to[e]] {
                    seen[self.to[e]] = true;
                    stack.push(self.to[e]);
                }
            }
        }
        seen
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TreeDecomposition {
    pub bags: Vec<VertexSet>,
    pub edges: Vec<(usize, usize)>,
}

impl TreeDecomposition {
    /// Largest bag size minus one (0 for an empty decomposition).
    pub fn width(&self) -> usize {
        self.bags.iter().map(BTreeSet::len).max().unwrap_or(0).saturating_sub(1)
    }

    pub fn neighbors(&self, t: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| if a == t { Some(b) } else if b == t { Some(a) } else { None })
            .collect()
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.bags.len()];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    fn add_bag(&mut self, bag: VertexSet) -> usize {
        self.bags.push(bag);
        self.bags.len() - 1
    }

    /// Appends `other`, returning the index offset of its bags.
    fn absorb(&mut self, other: TreeDecomposition) -> usize {
        let off = self.bags.len();
        self.bags.extend(other.bags);
        self.edges.extend(other.edges.into_iter().map(|(a, b)| (a + off, b + off)));
        off
    }

    /// Tree nodes on the path between `a` and `b`.
    fn path(&self, a: usize, b: usize) -> Vec<usize> {
        let adj = self.adjacency();
        let mut prev = vec![usize::MAX; self.bags.len()];
        let mut queue = VecDeque::from([a]);
        prev[a] = a;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if prev[v] == usize::MAX {
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        let mut out = vec![b];
        let mut cur = b;
        while cur != a && prev[cur] != usize::MAX {
            cur = prev[cur];
            out.push(cur);
        }
        out
    }

    /// Restores the connected-subtree property by adding each vertex to the
    /// bags of the minimal subtree spanning its occurrences.
    pub fn steiner_repair(&mut self) {
        let verts: VertexSet = self.bags.iter().flatten().copied().collect();
        for v in verts {
            let holders: Vec<usize> = (0..self.bags.len()).filter(|&t| self.bags[t].contains(&v)).collect();
            for &t in &holders[1..] {
                for node in self.path(holders[0], t) {
                    self.bags[node].insert(v);
                }
            }
        }
    }

    /// Checks that this is a tree and the three decomposition conditions for `g`.
    pub fn validate(&self, g: &Graph) -> std::result::Result<(), String> {
        let n = self.bags.len();
        if n == 0 {
            return Err("no bags".into());
        }
        if self.edges.len() != n - 1 {
            return Err(format!("{} bags but {} edges", n, self.edges.len()));
        }
        if self.edges.iter().any(|&(a, b)| a >= n || b >= n || a == b) {
            return Err("edge references a missing bag".into());
        }
        let adj = self.adjacency();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err("tree is disconnected".into());
        }
        for v in g.vertices() {
            if !self.bags.iter().any(|b| b.contains(&v)) {
                return Err(format!("vertex {v} is in no bag"));
            }
        }
        for (u, v) in g.edges() {
            if !self.bags.iter().any(|b| b.contains(&u) && b.contains(&v)) {
                return Err(format!("edge {u}-{v} is in no bag"));
            }
        }
        let verts: VertexSet = self.bags.iter().flatten().copied().collect();
        for v in verts {
            let holders: Vec<usize> = (0..n).filter(|&t| self.bags[t].contains(&v)).collect();
            let mut reach = vec![false; n];
            let mut stack = vec![holders[0]];
            reach[holders[0]] = true;
            while let Some(u) = stack.pop() {
                for &w in &adj[u] {
                    if !reach[w] && self.bags[w].contains(&v) {
                        reach[w] = true;
                        stack.push(w);
                    }
                }
            }
            if holders.iter().any(|&t| !reach[t]) {
                return Err(format!("bags holding vertex {v} are not connected"));
            }
        }
        Ok(())
    }

    /// Vertices in order of first appearance, breadth-first from `root`.
    pub fn vertex_order(&self, root: usize) -> Vec<usize> {
        let adj = self.adjacency();
        let mut out = Vec::new();
        let mut placed = VertexSet::new();
        let mut seen = vec![false; self.bags.len()];
        let mut queue = VecDeque::new();
        if root < self.bags.len() {
            seen[root] = true;
            queue.push_back(root);
        }
        while let Some(t) = queue.pop_front() {
            for &v in &self.bags[t] {
                if placed.insert(v) {
                    out.push(v);
                }
            }
            for &u in &adj[t] {
                if !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
        out
    }

    /// PACE `.td` text; vertices are written 1-based.
    pub fn to_td(&self, num_vertices: usize) -> String {
        let mut out = format!("s td {} {} {}\n", self.bags.len(), self.width() + 1, num_vertices);
        for (i, b) in self.bags.iter().enumerate() {
            out.push_str(&format!("b {}", i + 1));
            for v in b {
                out.push_str(&format!(" {}", v + 1));
            }
            out.push('\n');
        }
        for &(a, b) in &self.edges {
            out.push_str(&format!("{} {}\n", a + 1, b + 1));
        }
        out
    }
}

/// Parses PACE `.td` text, returning the decomposition and the vertex count.
pub fn parse_td(src: &str) -> std::result::Result<(TreeDecomposition, usize), ParseError> {
    let mut td = TreeDecomposition::default();
    let mut header: Option<(usize, usize)> = None;
    let num = |w: &str, ln: usize| -> std::result::Result<usize, ParseError> {
        w.parse::<usize>().map_err(|_| ParseError::new(ln, 1, format!("expected a number, found `{w}`")))
    };
    for (ln, line) in src.lines().enumerate() {
        let ln = ln + 1;
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.first().copied() {
            None | Some("c") => {}
            Some("s") => {
                if words.len() != 5 || words[1] != "td" || header.is_some() {
                    return Err(ParseError::new(ln, 1, "expected a single `s td <bags> <width+1> <vertices>`"));
                }
                let (nb, nv) = (num(words[2], ln)?, num(words[4], ln)?);
                num(words[3], ln)?;
                if nb > 1 << 20 {
                    return Err(ParseError::new(ln, 1, "too many bags"));
                }
                td.bags = vec![VertexSet::new(); nb];
                header = Some((nb, nv));
            }
            Some(first) => {
                let Some((nb, nv)) = header else {
                    return Err(ParseError::new(ln, 1, "content before the `s td` line"));
                };
                if first == "b" {
                    let i = words.get(1).ok_or_else(|| ParseError::new(ln, 1, "missing bag index"))?;
                    let i = num(i, ln)?;
                    if i == 0 || i > nb {
                        return Err(ParseError::new(ln, 1, format!("bag {i} out of range")));
                    }
                    for w in &words[2..] {
                        let v = num(w, ln)?;
                        if v == 0 || v > nv {
                            return Err(ParseError::new(ln, 1, format!("vertex {v} out of range")));
                        }
                        td.bags[i - 1].insert(v - 1);
                    }
                } else {
                    if words.len() != 2 {
                        return Err(ParseError::new(ln, 1, "expected an edge `<bag> <bag>`"));
                    }
                    let (a, b) = (num(words[0], ln)?, num(words[1], ln)?);
                    if a == 0 || b == 0 || a > nb || b > nb {
                        return Err(ParseError::new(ln, 1, "edge references a missing bag"));
                    }
                    td.edges.push((a - 1, b - 1));
                }
            }
        }
    }
    let (_, nv) = header.ok_or_else(|| ParseError::new(1, 1, "missing `s td` line"))?;
    Ok((td, nv))
}

/// Min-fill elimination (ties by vertex index), bags from the elimination
/// tree, then bags contained in a neighbour are merged away.
pub fn tree_decomposition(g: &Graph) -> TreeDecomposition {
    let mut h = g.clone();
    let mut order = Vec::new();
    let mut bags = Vec::new();
    while h.num_vertices() > 0 {
        let v = h
            .vertices()
            .min_by_key(|&v| {
                let n: Vec<usize> = h.neighbors(v).collect();
                let fill = n
                    .iter()
                    .enumerate()
                    .map(|(i, &a)| n[i + 1..].iter().filter(|&&b| !h.has_edge(a, b)).count())
                    .sum::<usize>();
                (fill, v)
            })
            .unwrap();
        let nb: VertexSet = h.neighbors(v).collect();
        h.add_clique(&nb);
        h = h.without(&VertexSet::from([v]));
        let mut bag = nb;
        bag.insert(v);
        bags.push(bag);
        order.push(v);
    }
    if bags.is_empty() {
        return TreeDecomposition { bags: vec![VertexSet::new()], edges: vec![] };
    }
    let pos: BTreeMap<usize, usize> = order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut td = TreeDecomposition { bags, edges: Vec::new() };
    let mut roots = Vec::new();
    for i in 0..order.len() {
        let parent = td.bags[i].iter().filter(|&&u| u != order[i]).map(|u| pos[u]).min();
        match parent {
            Some(p) => td.edges.push((i, p)),
            None => roots.push(i),
        }
    }
    for w in roots.windows(2) {
        td.edges.push((w[0], w[1]));
    }
    compress(td)
}

/// Contracts tree edges whose one endpoint's bag is a subset of the other's.
fn compress(mut td: TreeDecomposition) -> TreeDecomposition {
    loop {
        let hit = td.edges.iter().position(|&(a, b)| td.bags[a].is_subset(&td.bags[b]) || td.bags[b].is_subset(&td.bags[a]));
        let Some(k) = hit else { break };
        let (a, b) = td.edges.remove(k);
        let (keep, gone) = if td.bags[a].is_subset(&td.bags[b]) { (b, a) } else { (a, b) };
        for e in &mut td.edges {
            if e.0 == gone {
                e.0 = keep;
            }
            if e.1 == gone {
                e.1 = keep;
            }
        }
        td.bags.remove(gone);
        for e in &mut td.edges {
            if e.0 > gone {
                e.0 -= 1;
            }
            if e.1 > gone {
                e.1 -= 1;
            }
        }
    }
    td
}

/// Output of the ordered decomposition with the data needed to audit it.
#[derive(Debug, Clone)]
pub struct Amc3Decomposition {
    pub td: TreeDecomposition,
    pub s_outer: VertexSet,
    pub s_middle: VertexSet,
    pub defined_outer: VertexSet,
    pub defined_outer_middle: VertexSet,
    /// Witness bags for the outer and middle conditions.
    pub t_outer: usize,
    pub t_middle: usize,
}

pub fn amc3_decomposition(c: &Cnf, xo: &VertexSet, xm: &VertexSet, xi: &VertexSet) -> Result<Amc3Decomposition> {
    amc3_decomposition_with(c, xo, xm, xi, Some(DefinabilityMode::Syntactic))
}

/// `definability = None` disables definability (both defined sets empty).
pub fn amc3_decomposition_with(
    c: &Cnf,
    xo: &VertexSet,
    xm: &VertexSet,
    xi: &VertexSet,
    mode: Option<DefinabilityMode>,
) -> Result<Amc3Decomposition> {
    let all: VertexSet = (0..c.num_vars).collect();
    let union: VertexSet = xo.iter().chain(xm).chain(xi).copied().collect();
    if union != all || xo.len() + xm.len() + xi.len() != c.num_vars {
        return Err(Error::Invalid("tiers must partition the variables".into()));
    }
    let xom: VertexSet = xo.union(xm).copied().collect();
    let (d_o, d_om) = match mode {
        Some(m) => (definability(c, xo, m)?, definability(c, &xom, m)?),
        None => (VertexSet::new(), VertexSet::new()),
    };
    let g = primal_graph(c);

    let s_o = minimum_separator(&g, &d_o, xo);
    let g_w = g.without(&s_o);
    let v_o: VertexSet = g_w.components().into_iter().filter(|k| !k.is_disjoint(xo)).flatten().collect();
    let mut g_o = g.induced(&v_o.union(&s_o).copied().collect());
    g_o.add_clique(&s_o);
    let td_o = tree_decomposition(&g_o);

    let g_mid = g.torso(xo);
    let s_m = minimum_separator(&g_mid, &d_om, xm);
    let blocked: VertexSet = v_o.iter().chain(&s_o).chain(&s_m).copied().collect();
    let v_m: VertexSet =
        g.without(&blocked).components().into_iter().filter(|k| !k.is_disjoint(xm)).flatten().collect();
    let mut g_m = g.induced(&v_m.iter().chain(&s_m).chain(&s_o).copied().collect());
    g_m.add_clique(&s_o);
    g_m.add_clique(&s_m);
    let td_m = tree_decomposition(&g_m);

    let mut g_i = g.without(&v_o.union(&v_m).copied().collect());
    g_i.add_clique(&s_o);
    g_i.add_clique(&s_m);
    let td_i = tree_decomposition(&g_i);

    let mut td = combine(td_o, td_m, td_i, &s_o, &s_m);
    td.steiner_repair();
    let mut out = Amc3Decomposition {
        td,
        s_outer: s_o,
        s_middle: s_m,
        defined_outer: d_o,
        defined_outer_middle: d_om,
        t_outer: 0,
        t_middle: 0,
    };
    out.t_outer = witness_or_insert(&mut out.td, &g, xo, &out.defined_outer, &out.s_outer);
    let allowed_m: VertexSet = xm.union(&out.defined_outer_middle).copied().collect();
    out.t_middle = witness_or_insert_m(&mut out.td, &g, xo, xm, &allowed_m, &out.s_middle);
    Ok(out)
}

/// Joins the parts at bags holding the shared separators, choosing the
/// bags with the largest overlap.
fn combine(
    td_o: TreeDecomposition,
    td_m: TreeDecomposition,
    td_i: TreeDecomposition,
    s_o: &VertexSet,
    s_m: &VertexSet,
) -> TreeDecomposition {
    let best = |td: &TreeDecomposition, range: std::ops::Range<usize>, need: &VertexSet, prefer: &VertexSet| {
        range
            .clone()
            .filter(|&t| need.is_subset(&td.bags[t]))
            .max_by_key(|&t| (td.bags[t].intersection(prefer).count(), std::cmp::Reverse(t)))
            .unwrap_or(range.start)
    };
    let shared: VertexSet = s_o.union(s_m).copied().collect();
    let mut td = td_o;
    let n_o = td.bags.len();
    let off_m = td.absorb(td_m);
    let n_m = td.bags.len();
    let a_o = best(&td, 0..n_o, s_o, &shared);
    let a_m = best(&td, off_m..n_m, s_o, &shared);
    td.edges.push((a_o, a_m));
    let off_i = td.absorb(td_i);
    let n_i = td.bags.len();
    let b_m = best(&td, off_m..n_m, s_m, &shared);
    let b_i = best(&td, off_i..n_i, s_m, &shared);
    td.edges.push((b_m, b_i));
    td
}

fn path_blocked(g: &Graph, from: &VertexSet, allowed: &VertexSet, bag: &VertexSet) -> bool {
    g.reachable(from, bag).iter().all(|v| allowed.contains(v))
}

/// First bag meeting the outer conditions, or a new leaf bag `s_o`.
fn witness_or_insert(td: &mut TreeDecomposition, g: &Graph, xo: &VertexSet, d_o: &VertexSet, s_o: &VertexSet) -> usize {
    let allowed: VertexSet = xo.union(d_o).copied().collect();
    let ok = |b: &VertexSet| b.is_subset(&allowed) && path_blocked(g, xo, &allowed, b);
    if let Some(t) = (0..td.bags.len()).find(|&t| ok(&td.bags[t])) {
        return t;
    }
    attach_leaf(td, s_o)
}

fn witness_or_insert_m(
    td: &mut TreeDecomposition,
    g: &Graph,
    xo: &VertexSet,
    xm: &VertexSet,
    allowed_m: &VertexSet,
    s_m: &VertexSet,
) -> usize {
    let reach_ok: VertexSet = allowed_m.union(xo).copied().collect();
    let ok = |b: &VertexSet| b.is_subset(allowed_m) && path_blocked(g, xm, &reach_ok, b);
    if let Some(t) = (0..td.bags.len()).find(|&t| ok(&td.bags[t])) {
        return t;
    }
    attach_leaf(td, s_m)
}

fn attach_leaf(td: &mut TreeDecomposition, bag: &VertexSet) -> usize {
    let host = (0..td.bags.len()).find(|&t| bag.is_subset(&td.bags[t])).unwrap_or(0);
    let leaf = td.add_bag(bag.clone());
    td.edges.push((host, leaf));
    leaf
}

/// Result of checking an ordered decomposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Amc3Audit {
    pub t_outer: usize,
    pub t_middle: usize,
}

/// Validity plus the outer/middle bag conditions, with the recorded
/// witnesses checked explicitly.
pub fn audit_amc3(c: &Cnf, xo: &VertexSet, xm: &VertexSet, d: &Amc3Decomposition) -> Result<Amc3Audit> {
    let g = primal_graph(c);
    d.td.validate(&g).map_err(Error::Decomposition)?;
    let allowed_o: VertexSet = xo.union(&d.defined_outer).copied().collect();
    let bo = d.td.bags.get(d.t_outer).ok_or_else(|| Error::Decomposition("missing outer witness".into()))?;
    if !bo.is_subset(&allowed_o) || !path_blocked(&g, xo, &allowed_o, bo) {
        return Err(Error::Decomposition(format!("bag {} does not separate the outer variables", d.t_outer)));
    }
    let allowed_m: VertexSet = xm.union(&d.defined_outer_middle).copied().collect();
    let reach_ok: VertexSet = allowed_m.union(xo).copied().collect();
    let bm = d.td.bags.get(d.t_middle).ok_or_else(|| Error::Decomposition("missing middle witness".into()))?;
    if !bm.is_subset(&allowed_m) || !path_blocked(&g, xm, &reach_ok, bm) {
        return Err(Error::Decomposition(format!("bag {} does not separate the middle variables", d.t_middle)));
    }
    Ok(Amc3Audit { t_outer: d.t_outer, t_middle: d.t_middle })
}
