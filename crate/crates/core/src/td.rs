//! Tree decompositions of the primal graph: heuristic construction via
//! elimination orderings, validation, normalization to nice form, bag
//! programs, and PACE-2017 `.td` interchange.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bitset::BitSet;
use crate::graphs::PrimalGraph;
use crate::program::{Program, Rule};

/// A rooted tree decomposition. Vertices are atom ids; bags are atom sets.
#[derive(Clone, Debug)]
pub struct TreeDecomposition {
    pub n_vertices: usize,
    pub bags: Vec<BitSet>,
    pub parent: Vec<Option<usize>>,
    pub children: Vec<Vec<usize>>,
    pub root: usize,
}

impl TreeDecomposition {
    pub fn n_nodes(&self) -> usize {
        self.bags.len()
    }

    pub fn max_bag_size(&self) -> usize {
        self.bags.iter().map(|b| b.len()).max().unwrap_or(0)
    }

    /// Max bag size minus one; -1 for a decomposition of the empty graph.
    pub fn width(&self) -> isize {
        self.max_bag_size() as isize - 1
    }

    /// Nodes in postorder: every node appears after all of its children.
    pub fn postorder(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.n_nodes());
        let mut stack = vec![(self.root, 0usize)];
        while let Some((t, ci)) = stack.pop() {
            if ci < self.children[t].len() {
                stack.push((t, ci + 1));
                stack.push((self.children[t][ci], 0));
            } else {
                order.push(t);
            }
        }
        order
    }
}

/// Elimination-ordering heuristic for `decompose`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Heuristic {
    MinFill,
    MinDegree,
}

impl std::str::FromStr for Heuristic {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "min-fill" => Ok(Heuristic::MinFill),
            "min-degree" => Ok(Heuristic::MinDegree),
            other => Err(format!(
                "unknown heuristic '{other}' (expected min-fill or min-degree)"
            )),
        }
    }
}

/// Builds a tree decomposition from a greedy elimination ordering. Ties go to
/// the smallest vertex id; a nonzero seed instead picks uniformly among the
/// tied candidates. The result always has a synthetic empty root bag, so
/// disconnected graphs (and the empty graph) come out as one tree.
pub fn decompose(g: &PrimalGraph, heuristic: Heuristic, seed: u64) -> TreeDecomposition {
    let n = g.n();
    let mut adj: Vec<BitSet> = (0..n).map(|v| g.neighbors(v).clone()).collect();
    let mut alive: BitSet = (0..n).collect();
    let mut rng = (seed != 0).then(|| ChaCha8Rng::seed_from_u64(seed));

    let mut bags: Vec<BitSet> = Vec::with_capacity(n + 1);
    let mut elim_pos = vec![usize::MAX; n];
    let mut vertex_at = Vec::with_capacity(n);
    for step in 0..n {
        let mut best = Vec::new();
        let mut best_score = usize::MAX;
        for v in alive.iter() {
            let score = match heuristic {
                Heuristic::MinDegree => adj[v].len(),
                Heuristic::MinFill => {
                    let nb = &adj[v];
                    let missing: usize = nb
                        .iter()
                        .map(|u| nb.len() - 1 - nb.intersection_len(&adj[u]))
                        .sum();
                    missing / 2
                }
            };
            if score < best_score {
                best_score = score;
                best.clear();
            }
            if score == best_score {
                best.push(v);
            }
        }
        let v = match rng.as_mut() {
            None => best[0],
            Some(r) => best[r.gen_range(0..best.len())],
        };
        let mut bag = adj[v].clone();
        bag.insert(v);
        bags.push(bag);
        elim_pos[v] = step;
        vertex_at.push(v);
        let neighbors: Vec<usize> = adj[v].iter().collect();
        for (i, &a) in neighbors.iter().enumerate() {
            for &b in &neighbors[i + 1..] {
                adj[a].insert(b);
                adj[b].insert(a);
            }
        }
        for &a in &neighbors {
            adj[a].remove(v);
        }
        alive.remove(v);
    }

    let root = n;
    bags.push(BitSet::new());
    let mut parent = vec![None; n + 1];
    let mut children = vec![Vec::new(); n + 1];
    for node in 0..n {
        let v = vertex_at[node];
        let up = bags[node]
            .iter()
            .filter(|&u| u != v)
            .map(|u| elim_pos[u])
            .min()
            .unwrap_or(root);
        parent[node] = Some(up);
        children[up].push(node);
    }
    TreeDecomposition {
        n_vertices: n,
        bags,
        parent,
        children,
        root,
    }
}

/// A violated tree-decomposition condition, with a witness.
#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum TdViolation {
    #[error("malformed tree: {0}")]
    MalformedTree(String),
    #[error("vertex {vertex} appears in no bag")]
    VertexNotCovered { vertex: usize },
    #[error("edge {{{u},{v}}} is contained in no bag")]
    EdgeNotCovered { u: usize, v: usize },
    #[error("vertex {vertex} induces a disconnected set of bags (node {node} is separated)")]
    NotConnected { vertex: usize, node: usize },
}

/// Checks the three decomposition conditions (vertex coverage, edge coverage,
/// connectedness) plus tree well-formedness, reporting the first violation.
pub fn validate_td(g: &PrimalGraph, td: &TreeDecomposition) -> Result<(), TdViolation> {
    let m = td.n_nodes();
    if m == 0 {
        return Err(TdViolation::MalformedTree("no nodes".into()));
    }
    if td.root >= m || td.parent.len() != m || td.children.len() != m {
        return Err(TdViolation::MalformedTree("inconsistent node arrays".into()));
    }
    if td.parent[td.root].is_some() {
        return Err(TdViolation::MalformedTree("root has a parent".into()));
    }
    let mut seen = vec![false; m];
    let mut stack = vec![td.root];
    let mut reached = 0;
    while let Some(t) = stack.pop() {
        if seen[t] {
            return Err(TdViolation::MalformedTree(format!(
                "node {t} reached twice"
            )));
        }
        seen[t] = true;
        reached += 1;
        for &c in &td.children[t] {
            if c >= m || td.parent[c] != Some(t) {
                return Err(TdViolation::MalformedTree(format!(
                    "child link {t} -> {c} has no matching parent link"
                )));
            }
            stack.push(c);
        }
    }
    if reached != m {
        return Err(TdViolation::MalformedTree(format!(
            "{} of {m} nodes unreachable from root",
            m - reached
        )));
    }

    let mut nodes_of: Vec<Vec<usize>> = vec![Vec::new(); g.n()];
    for (t, bag) in td.bags.iter().enumerate() {
        for v in bag.iter() {
            if v >= g.n() {
                return Err(TdViolation::MalformedTree(format!(
                    "bag {t} mentions vertex {v} outside the graph"
                )));
            }
            nodes_of[v].push(t);
        }
    }
    for (v, nodes) in nodes_of.iter().enumerate() {
        if nodes.is_empty() {
            return Err(TdViolation::VertexNotCovered { vertex: v });
        }
    }
    for (u, nodes) in nodes_of.iter().enumerate() {
        for v in g.neighbors(u).iter() {
            if u < v && !nodes.iter().any(|&t| td.bags[t].contains(v)) {
                return Err(TdViolation::EdgeNotCovered { u, v });
            }
        }
    }
    for v in 0..g.n() {
        let total = nodes_of[v].len();
        let mut visited = vec![false; m];
        let mut stack = vec![nodes_of[v][0]];
        visited[nodes_of[v][0]] = true;
        let mut count = 0;
        while let Some(t) = stack.pop() {
            count += 1;
            let push = |s: usize, visited: &mut Vec<bool>, stack: &mut Vec<usize>| {
                if !visited[s] && td.bags[s].contains(v) {
                    visited[s] = true;
                    stack.push(s);
                }
            };
            if let Some(par) = td.parent[t] {
                push(par, &mut visited, &mut stack);
            }
            for &c in &td.children[t] {
                push(c, &mut visited, &mut stack);
            }
        }
        if count != total {
            let node = nodes_of[v].iter().copied().find(|&t| !visited[t]).unwrap();
            return Err(TdViolation::NotConnected { vertex: v, node });
        }
    }
    Ok(())
}

/// Node types of a nice decomposition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Leaf,
    Introduce(usize),
    Forget(usize),
    Join,
}

/// A nice tree decomposition: unit bag changes per node, empty leaf and root
/// bags, binary joins over equal bags.
#[derive(Clone, Debug)]
pub struct NiceTD {
    pub td: TreeDecomposition,
    pub kind: Vec<NodeKind>,
}

impl NiceTD {
    pub fn n_nodes(&self) -> usize {
        self.td.n_nodes()
    }

    pub fn root(&self) -> usize {
        self.td.root
    }

    pub fn bag(&self, t: usize) -> &BitSet {
        &self.td.bags[t]
    }

    pub fn children(&self, t: usize) -> &[usize] {
        &self.td.children[t]
    }
}

struct NiceBuilder {
    bags: Vec<BitSet>,
    kind: Vec<NodeKind>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
}

impl NiceBuilder {
    fn add(&mut self, kind: NodeKind, bag: BitSet, children: Vec<usize>) -> usize {
        let id = self.bags.len();
        for &c in &children {
            self.parent[c] = Some(id);
        }
        self.bags.push(bag);
        self.kind.push(kind);
        self.parent.push(None);
        self.children.push(children);
        id
    }

    /// Extends the tree above `top` (whose bag is `from`) so the final bag is
    /// `to`: forgets the surplus atoms, then introduces the missing ones.
    fn morph(&mut self, mut top: usize, from: &BitSet, to: &BitSet) -> usize {
        let mut cur = from.clone();
        let mut down = from.clone();
        down.difference_with(to);
        for a in down.iter() {
            cur.remove(a);
            top = self.add(NodeKind::Forget(a), cur.clone(), vec![top]);
        }
        let mut up = to.clone();
        up.difference_with(from);
        for a in up.iter() {
            cur.insert(a);
            top = self.add(NodeKind::Introduce(a), cur.clone(), vec![top]);
        }
        top
    }
}

/// Normalizes a valid decomposition to nice form without changing the width:
/// per original node, each child subtree is morphed to the node's bag with
/// unit forget/introduce steps, the results are folded with binary joins, and
/// the root bag is forgotten down to empty.
pub fn make_nice(td: &TreeDecomposition) -> NiceTD {
    let mut b = NiceBuilder {
        bags: Vec::new(),
        kind: Vec::new(),
        parent: Vec::new(),
        children: Vec::new(),
    };
    // Top node of the nice subtree built for each original node; its bag
    // equals the original bag.
    let mut top = vec![usize::MAX; td.n_nodes()];
    for t in td.postorder() {
        let bag = &td.bags[t];
        let mut tops: Vec<usize> = td.children[t]
            .iter()
            .map(|&c| b.morph(top[c], &td.bags[c], bag))
            .collect();
        if tops.is_empty() {
            let leaf = b.add(NodeKind::Leaf, BitSet::new(), vec![]);
            tops.push(b.morph(leaf, &BitSet::new(), bag));
        }
        let mut acc = tops[0];
        for &next in &tops[1..] {
            acc = b.add(NodeKind::Join, bag.clone(), vec![acc, next]);
        }
        top[t] = acc;
    }
    let root = b.morph(top[td.root], &td.bags[td.root], &BitSet::new());
    NiceTD {
        td: TreeDecomposition {
            n_vertices: td.n_vertices,
            bags: b.bags,
            parent: b.parent,
            children: b.children,
            root,
        },
        kind: b.kind,
    }
}

/// Checks the nice-form conditions: typed nodes with the right child counts
/// and unit bag changes, empty leaf bags, an empty root bag, and joins over
/// equal bags.
pub fn validate_nice(nice: &NiceTD) -> Result<(), String> {
    let td = &nice.td;
    if nice.kind.len() != td.n_nodes() {
        return Err("node kind list does not match the tree".into());
    }
    if !td.bags[td.root].is_empty() {
        return Err(format!("root bag is not empty: node {}", td.root));
    }
    for t in 0..td.n_nodes() {
        let kids = &td.children[t];
        match nice.kind[t] {
            NodeKind::Leaf => {
                if !kids.is_empty() || !td.bags[t].is_empty() {
                    return Err(format!("leaf node {t} has children or a nonempty bag"));
                }
            }
            NodeKind::Introduce(a) => {
                if kids.len() != 1 {
                    return Err(format!("introduce node {t} has {} children", kids.len()));
                }
                let mut below = td.bags[t].clone();
                if !below.contains(a) {
                    return Err(format!("introduce node {t} lacks its own atom {a}"));
                }
                below.remove(a);
                if below != td.bags[kids[0]] {
                    return Err(format!("introduce node {t} changes more than atom {a}"));
                }
            }
            NodeKind::Forget(a) => {
                if kids.len() != 1 {
                    return Err(format!("forget node {t} has {} children", kids.len()));
                }
                let mut above = td.bags[kids[0]].clone();
                if !above.contains(a) {
                    return Err(format!("forget node {t} forgets absent atom {a}"));
                }
                above.remove(a);
                if above != td.bags[t] {
                    return Err(format!("forget node {t} changes more than atom {a}"));
                }
            }
            NodeKind::Join => {
                if kids.len() != 2 {
                    return Err(format!("join node {t} has {} children", kids.len()));
                }
                if td.bags[t] != td.bags[kids[0]] || td.bags[t] != td.bags[kids[1]] {
                    return Err(format!("join node {t} has unequal child bags"));
                }
            }
        }
    }
    Ok(())
}

/// Π_t: the rules whose atoms all lie inside `bag`, as indices into
/// `p.rules()`.
pub fn bag_program_indices(p: &Program, bag: &BitSet) -> Vec<usize> {
    p.rules()
        .iter()
        .enumerate()
        .filter(|(_, r)| r.atoms().all(|a| bag.contains(a as usize)))
        .map(|(i, _)| i)
        .collect()
}

/// Π_t as cloned rules.
pub fn bag_program(p: &Program, bag: &BitSet) -> Vec<Rule> {
    bag_program_indices(p, bag)
        .into_iter()
        .map(|i| p.rules()[i].clone())
        .collect()
}

#[derive(Debug, thiserror::Error)]
#[error("line {line}: {msg}")]
pub struct TdParseError {
    pub line: usize,
    pub msg: String,
}

/// Serializes to the PACE-2017 `.td` format. Bag and vertex numbers are
/// 1-based, so vertex k stands for atom id k-1.
pub fn write_td(td: &TreeDecomposition) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "s td {} {} {}\n",
        td.n_nodes(),
        td.max_bag_size(),
        td.n_vertices
    ));
    for (t, bag) in td.bags.iter().enumerate() {
        let verts = bag
            .iter()
            .map(|v| (v + 1).to_string())
            .collect::<Vec<_>>()
            .join(" ");
        if verts.is_empty() {
            out.push_str(&format!("b {}\n", t + 1));
        } else {
            out.push_str(&format!("b {} {}\n", t + 1, verts));
        }
    }
    for t in 0..td.n_nodes() {
        if let Some(par) = td.parent[t] {
            out.push_str(&format!("{} {}\n", par + 1, t + 1));
        }
    }
    out
}

/// Parses the PACE-2017 `.td` format, rooting the tree at bag 1.
pub fn parse_td(text: &str) -> Result<TreeDecomposition, TdParseError> {
    let err = |line: usize, msg: String| TdParseError { line, msg };
    let mut header: Option<(usize, usize, usize)> = None;
    let mut bags: Vec<Option<BitSet>> = Vec::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let ln = ln + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let parse_num = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| err(ln, format!("expected a number, found '{s}'")))
        };
        if fields[0] == "s" {
            if header.is_some() {
                return Err(err(ln, "duplicate header".into()));
            }
            if fields.len() != 5 || fields[1] != "td" {
                return Err(err(ln, "header must be 's td <bags> <size> <vertices>'".into()));
            }
            let nb = parse_num(fields[2])?;
            let _max_size = parse_num(fields[3])?;
            let nv = parse_num(fields[4])?;
            if nb == 0 {
                return Err(err(ln, "a decomposition needs at least one bag".into()));
            }
            header = Some((nb, _max_size, nv));
            bags = vec![None; nb];
        } else if fields[0] == "b" {
            let (nb, _, nv) = header.ok_or_else(|| err(ln, "bag line before header".into()))?;
            if fields.len() < 2 {
                return Err(err(ln, "bag line needs an id".into()));
            }
            let id = parse_num(fields[1])?;
            if id == 0 || id > nb {
                return Err(err(ln, format!("bag id {id} out of range 1..={nb}")));
            }
            if bags[id - 1].is_some() {
                return Err(err(ln, format!("bag {id} defined twice")));
            }
            let mut bag = BitSet::new();
            for f in &fields[2..] {
                let v = parse_num(f)?;
                if v == 0 || v > nv {
                    return Err(err(ln, format!("vertex {v} out of range 1..={nv}")));
                }
                bag.insert(v - 1);
            }
            bags[id - 1] = Some(bag);
        } else {
            let (nb, _, _) = header.ok_or_else(|| err(ln, "edge line before header".into()))?;
            if fields.len() != 2 {
                return Err(err(ln, format!("unrecognized line '{line}'")));
            }
            let u = parse_num(fields[0])?;
            let v = parse_num(fields[1])?;
            if u == 0 || u > nb || v == 0 || v > nb || u == v {
                return Err(err(ln, format!("bad tree edge {u} {v}")));
            }
            edges.push((u - 1, v - 1));
        }
    }
    let (nb, _, nv) = header.ok_or_else(|| err(0, "missing 's td' header".into()))?;
    let bags: Vec<BitSet> = bags
        .into_iter()
        .enumerate()
        .map(|(i, b)| b.ok_or_else(|| err(0, format!("bag {} never defined", i + 1))))
        .collect::<Result<_, _>>()?;
    if edges.len() != nb - 1 {
        return Err(err(
            0,
            format!("{} edges do not form a tree over {nb} bags", edges.len()),
        ));
    }
    let mut adj = vec![Vec::new(); nb];
    for &(u, v) in &edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let root = 0;
    let mut parent = vec![None; nb];
    let mut children = vec![Vec::new(); nb];
    let mut seen = vec![false; nb];
    seen[root] = true;
    let mut stack = vec![root];
    let mut reached = 1;
    while let Some(t) = stack.pop() {
        for &s in &adj[t] {
            if !seen[s] {
                seen[s] = true;
                reached += 1;
                parent[s] = Some(t);
                children[t].push(s);
                stack.push(s);
            }
        }
    }
    if reached != nb {
        return Err(err(0, "tree edges leave some bags disconnected".into()));
    }
    Ok(TreeDecomposition {
        n_vertices: nv,
        bags,
        parent,
        children,
        root,
    })
}
