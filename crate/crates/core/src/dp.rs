//! Dynamic programming over a nice tree decomposition for answer sets of
//! head-cycle-free programs: consistency, exact counting, and enumeration.
//!
//! Each table row is a triple (I, P, sigma): the interpretation restricted to
//! the bag, the bag atoms already proven by some rule seen so far, and a level
//! per bag atom (0 for atoms outside I). Introduce nodes guess the new atom's
//! truth and level, check the rules that just became local, reject level maps
//! a local rule could lower, and collect new proofs; forget nodes demand the
//! leaving atom be proven and project it away; join nodes match rows on
//! (I, sigma) and union the proofs. Counts follow the merges: sums where rows
//! collide, products at joins. Keeping P in the row key (rather than merging
//! rows by (I, sigma) alone) is what makes the counts exact: rows equal up to
//! P describe different sets of partial answer sets and must not be conflated
//! while both can still complete.

use std::collections::HashMap;

use indexmap::IndexMap;
use num_bigint::BigUint;

use crate::bitset::BitSet;
use crate::graphs::{self, SccInfo};
use crate::program::{
    check_hcf, proves, AtomId, Interpretation, LevelMap, Program, Rule, SemanticsError,
};
use crate::td::{validate_nice, validate_td, NiceTD, NodeKind, TdViolation};

#[derive(Debug, thiserror::Error)]
pub enum DpError {
    #[error(transparent)]
    NotHcf(#[from] SemanticsError),
    #[error("invalid tree decomposition: {0}")]
    InvalidTd(#[from] TdViolation),
    #[error("not a nice decomposition: {0}")]
    NotNice(String),
    #[error("bag of node {node} has {size} atoms; this solver handles at most 64")]
    BagTooWide { node: usize, size: usize },
}

#[derive(Clone, Copy, Debug)]
pub struct DpOptions {
    /// Reject level maps that a bag rule could lower. Required for exact
    /// counting and enumeration; consistency alone works either way.
    pub prune_minimal: bool,
}

impl Default for DpOptions {
    fn default() -> Self {
        DpOptions {
            prune_minimal: true,
        }
    }
}

/// One table row: bag-local bit masks for I and P, levels per bag position.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Row {
    i: u64,
    p: u64,
    sigma: Box<[u16]>,
}

/// How a row arose; indices refer to rows of the child tables.
#[derive(Clone, Copy, Debug)]
enum Prov {
    Leaf,
    Int { child: usize, in_i: bool },
    Forget { child: usize },
    Join { left: usize, right: usize },
}

struct RowData {
    count: BigUint,
    prov: Vec<Prov>,
}

type Table = IndexMap<Row, RowData>;

/// Per-head-atom data of a compiled rule, used to test whether the rule
/// proves that atom. Head atoms depending on themselves are dropped at
/// compile time; no level map lets such a rule prove them.
struct HeadCheck {
    h: usize,
    others: u64,
    scc_pos: Vec<usize>,
}

/// A rule with all atom sets as bag-local masks.
struct CompiledRule {
    head: u64,
    pos: u64,
    neg: u64,
    checks: Vec<HeadCheck>,
}

struct NodeData {
    bag: Vec<AtomId>,
    kind: NodeKind,
    /// Introduce only: the new atom's bag position, its SCC size, and the
    /// rules of the bag program that mention it (exactly the rules not
    /// already local below).
    intro: Option<(usize, u16, Vec<CompiledRule>)>,
    /// Forget only: the atom's position in the child bag.
    forget_pos: usize,
    /// Saturating row-count bound for this bag.
    row_bound: u128,
}

/// The finished run: all tables, retained for counting, enumeration, and
/// inspection.
pub struct DpSolution<'a> {
    program: &'a Program,
    ntd: &'a NiceTD,
    opts: DpOptions,
    nodes: Vec<NodeData>,
    tables: Vec<Table>,
}

/// Runs the table algorithm bottom-up over `ntd`. The program must be
/// head-cycle-free and `ntd` a valid nice decomposition of its primal graph.
pub fn solve<'a>(
    p: &'a Program,
    ntd: &'a NiceTD,
    opts: DpOptions,
) -> Result<DpSolution<'a>, DpError> {
    let d = graphs::dependency_digraph(p);
    let scc = graphs::scc_info(p, &d);
    check_hcf(p, &scc)?;
    let g = graphs::primal_graph(p);
    validate_td(&g, &ntd.td)?;
    validate_nice(ntd).map_err(DpError::NotNice)?;

    let nodes = compile_nodes(p, ntd, &scc)?;
    let mut tables: Vec<Table> = (0..ntd.n_nodes()).map(|_| Table::new()).collect();
    for t in ntd.td.postorder() {
        let node = &nodes[t];
        let table = match node.kind {
            NodeKind::Leaf => leaf_table(),
            NodeKind::Introduce(_) => {
                let child = ntd.children(t)[0];
                introduce_table(node, &tables[child], opts)
            }
            NodeKind::Forget(_) => {
                let child = ntd.children(t)[0];
                forget_table(node, &tables[child])
            }
            NodeKind::Join => {
                let (l, r) = (ntd.children(t)[0], ntd.children(t)[1]);
                join_table(&tables[l], &tables[r])
            }
        };
        assert!(
            (table.len() as u128) <= node.row_bound,
            "table at node {t} exceeds its size bound"
        );
        tables[t] = table;
    }
    let root_rows = tables[ntd.root()].len();
    assert!(
        root_rows <= 1,
        "root table has {root_rows} rows, expected at most one"
    );
    Ok(DpSolution {
        program: p,
        ntd,
        opts,
        nodes,
        tables,
    })
}

fn compile_nodes(p: &Program, ntd: &NiceTD, scc: &SccInfo) -> Result<Vec<NodeData>, DpError> {
    // Rules indexed by member atom, to find a node's newly local rules fast.
    let mut occ: Vec<Vec<usize>> = vec![Vec::new(); p.n_atoms()];
    for (ri, r) in p.rules().iter().enumerate() {
        let mut atoms: Vec<AtomId> = r.atoms().collect();
        atoms.sort_unstable();
        atoms.dedup();
        for a in atoms {
            occ[a as usize].push(ri);
        }
    }
    let mut nodes = Vec::with_capacity(ntd.n_nodes());
    for t in 0..ntd.n_nodes() {
        let bag: Vec<AtomId> = ntd.bag(t).iter().map(|a| a as AtomId).collect();
        if bag.len() > 64 {
            return Err(DpError::BagTooWide {
                node: t,
                size: bag.len(),
            });
        }
        let row_bound = bag.iter().fold(1u128, |acc, &a| {
            acc.saturating_mul(1 + 2 * scc.ell_scc(a) as u128)
        });
        let mut intro = None;
        let mut forget_pos = 0;
        match ntd.kind[t] {
            NodeKind::Introduce(a) => {
                let a = a as AtomId;
                let pos_a = bag
                    .binary_search(&a)
                    .expect("introduced atom is in the bag");
                let ell = scc.ell_scc(a);
                assert!(ell <= u16::MAX as u32, "SCC size fits the level type");
                let mut delta = Vec::new();
                for &ri in &occ[a as usize] {
                    let r = &p.rules()[ri];
                    if r.atoms().all(|x| bag.binary_search(&x).is_ok()) {
                        delta.push(compile_rule(r, &bag, scc));
                    }
                }
                intro = Some((pos_a, ell as u16, delta));
            }
            NodeKind::Forget(a) => {
                let child_bag = ntd.bag(ntd.children(t)[0]);
                forget_pos = child_bag
                    .iter()
                    .position(|x| x == a)
                    .expect("forgotten atom is in the child bag");
            }
            _ => {}
        }
        nodes.push(NodeData {
            bag,
            kind: ntd.kind[t],
            intro,
            forget_pos,
            row_bound,
        });
    }
    Ok(nodes)
}

fn compile_rule(r: &Rule, bag: &[AtomId], scc: &SccInfo) -> CompiledRule {
    let local = |a: AtomId| bag.binary_search(&a).expect("rule atom is in the bag");
    let mask = |atoms: &[AtomId]| atoms.iter().fold(0u64, |m, &a| m | 1 << local(a));
    let mut checks = Vec::new();
    for &h in &r.head {
        let scc_pos: Vec<usize> = r
            .pos
            .iter()
            .filter(|&&b| scc.scc_of(b) == scc.scc_of(h))
            .map(|&b| local(b))
            .collect();
        if scc_pos.contains(&local(h)) {
            continue;
        }
        checks.push(HeadCheck {
            h: local(h),
            others: mask(&r.head) & !(1 << local(h)),
            scc_pos,
        });
    }
    CompiledRule {
        head: mask(&r.head),
        pos: mask(&r.pos),
        neg: mask(&r.neg),
        checks,
    }
}

fn leaf_table() -> Table {
    let mut t = Table::new();
    t.insert(
        Row {
            i: 0,
            p: 0,
            sigma: Box::new([]),
        },
        RowData {
            count: BigUint::from(1u32),
            prov: vec![Prov::Leaf],
        },
    );
    t
}

/// Opens a gap at `pos`, shifting higher bits up; the new bit starts cleared.
fn insert_bit(mask: u64, pos: usize) -> u64 {
    let low = if pos == 0 { 0 } else { mask & ((1u64 << pos) - 1) };
    let high = (((mask as u128) >> pos) << (pos + 1)) as u64;
    low | high
}

/// Drops the bit at `pos`, shifting higher bits down.
fn remove_bit(mask: u64, pos: usize) -> u64 {
    let low = if pos == 0 { 0 } else { mask & ((1u64 << pos) - 1) };
    let high = (((mask as u128) >> (pos + 1)) << pos) as u64;
    low | high
}

fn merge(table: &mut Table, row: Row, count: BigUint, prov: Prov) {
    match table.entry(row) {
        indexmap::map::Entry::Occupied(mut e) => {
            let d = e.get_mut();
            d.count += count;
            d.prov.push(prov);
        }
        indexmap::map::Entry::Vacant(e) => {
            e.insert(RowData {
                count,
                prov: vec![prov],
            });
        }
    }
}

fn introduce_table(node: &NodeData, child: &Table, opts: DpOptions) -> Table {
    let (pos_a, ell, delta) = node.intro.as_ref().expect("introduce node data");
    let pos_a = *pos_a;
    let mut out = Table::new();
    for (child_idx, (row, data)) in child.iter().enumerate() {
        let i_base = insert_bit(row.i, pos_a);
        let p_base = insert_bit(row.p, pos_a);
        let mut sigma_base: Vec<u16> = Vec::with_capacity(row.sigma.len() + 1);
        sigma_base.extend_from_slice(&row.sigma[..pos_a]);
        sigma_base.push(0);
        sigma_base.extend_from_slice(&row.sigma[pos_a..]);
        for a_in in [false, true] {
            let i = i_base | u64::from(a_in) << pos_a;
            // Rules that just became local must be satisfied; older bag rules
            // were checked when their last atom appeared.
            if !delta
                .iter()
                .all(|r| (r.head | r.neg) & i != 0 || r.pos & i != r.pos)
            {
                continue;
            }
            let levels: u16 = if a_in { *ell } else { 1 };
            for lvl in 0..levels {
                let mut sigma = sigma_base.clone();
                sigma[pos_a] = lvl;
                if opts.prune_minimal && !delta_minimal(delta, i, &sigma) {
                    continue;
                }
                let gained = gather_delta(delta, i, &sigma);
                let row = Row {
                    i,
                    p: p_base | gained,
                    sigma: sigma.into_boxed_slice(),
                };
                merge(
                    &mut out,
                    row,
                    data.count.clone(),
                    Prov::Int {
                        child: child_idx,
                        in_i: a_in,
                    },
                );
            }
        }
    }
    out
}

/// Whether no newly local rule proves one of its true head atoms at a level
/// one below sigma's. Minimality against older rules holds by induction.
fn delta_minimal(delta: &[CompiledRule], i: u64, sigma: &[u16]) -> bool {
    for r in delta {
        if r.pos & i != r.pos || r.neg & i != 0 {
            continue;
        }
        for c in &r.checks {
            if i >> c.h & 1 == 1
                && sigma[c.h] > 0
                && c.others & i == 0
                && c.scc_pos.iter().all(|&b| sigma[b] + 1 < sigma[c.h])
            {
                return false;
            }
        }
    }
    true
}

/// Bag mask of the true atoms the newly local rules prove under (i, sigma).
fn gather_delta(delta: &[CompiledRule], i: u64, sigma: &[u16]) -> u64 {
    let mut gained = 0u64;
    for r in delta {
        if r.pos & i != r.pos || r.neg & i != 0 {
            continue;
        }
        for c in &r.checks {
            if i >> c.h & 1 == 1
                && c.others & i == 0
                && c.scc_pos.iter().all(|&b| sigma[b] < sigma[c.h])
            {
                gained |= 1 << c.h;
            }
        }
    }
    gained
}

fn forget_table(node: &NodeData, child: &Table) -> Table {
    let fp = node.forget_pos;
    let mut out = Table::new();
    for (child_idx, (row, data)) in child.iter().enumerate() {
        // The leaving atom must be proven if true: all rules that could still
        // prove it mention it, so they are local here or below.
        if row.i >> fp & 1 == 1 && row.p >> fp & 1 == 0 {
            continue;
        }
        let mut sigma: Vec<u16> = Vec::with_capacity(row.sigma.len() - 1);
        sigma.extend_from_slice(&row.sigma[..fp]);
        sigma.extend_from_slice(&row.sigma[fp + 1..]);
        let projected = Row {
            i: remove_bit(row.i, fp),
            p: remove_bit(row.p, fp),
            sigma: sigma.into_boxed_slice(),
        };
        merge(
            &mut out,
            projected,
            data.count.clone(),
            Prov::Forget { child: child_idx },
        );
    }
    out
}

fn join_table(left: &Table, right: &Table) -> Table {
    let mut by_key: HashMap<(u64, &[u16]), Vec<usize>> = HashMap::new();
    for (idx, (row, _)) in right.iter().enumerate() {
        by_key.entry((row.i, &row.sigma)).or_default().push(idx);
    }
    let mut out = Table::new();
    for (l_idx, (l_row, l_data)) in left.iter().enumerate() {
        let Some(matches) = by_key.get(&(l_row.i, &*l_row.sigma)) else {
            continue;
        };
        for &r_idx in matches {
            let (r_row, r_data) = right.get_index(r_idx).unwrap();
            let row = Row {
                i: l_row.i,
                p: l_row.p | r_row.p,
                sigma: l_row.sigma.clone(),
            };
            merge(
                &mut out,
                row,
                &l_data.count * &r_data.count,
                Prov::Join {
                    left: l_idx,
                    right: r_idx,
                },
            );
        }
    }
    out
}

impl<'a> DpSolution<'a> {
    /// Whether the program has any answer set.
    pub fn is_consistent(&self) -> bool {
        !self.tables[self.ntd.root()].is_empty()
    }

    /// The number of answer sets.
    pub fn count(&self) -> BigUint {
        self.tables[self.ntd.root()]
            .values()
            .map(|d| d.count.clone())
            .sum()
    }

    /// Calls `emit` once per answer set until it returns false or the table
    /// is exhausted. Requires a run with minimality pruning; without it the
    /// same set would be visited once per surviving level map.
    pub fn for_each_answer_set(&self, mut emit: impl FnMut(&Interpretation) -> bool) {
        assert!(
            self.opts.prune_minimal,
            "enumeration needs a run with prune_minimal"
        );
        let root = self.ntd.root();
        let mut counts = vec![0u32; self.program.n_atoms()];
        let mut levels = vec![0u16; self.program.n_atoms()];
        for row_idx in 0..self.tables[root].len() {
            let mut stack = vec![(root, row_idx)];
            let alive = self.walk(&mut stack, &mut counts, &mut levels, &mut |counts, _| {
                let i: Interpretation = counts
                    .iter()
                    .enumerate()
                    .filter(|&(_, &c)| c > 0)
                    .map(|(a, _)| a)
                    .collect();
                emit(&i)
            });
            if !alive {
                return;
            }
        }
    }

    /// Materializes up to `limit` answer sets.
    pub fn enumerate(&self, limit: Option<usize>) -> Vec<Interpretation> {
        let mut out = Vec::new();
        self.for_each_answer_set(|i| {
            out.push(i.clone());
            limit.is_none_or(|l| out.len() < l)
        });
        out
    }

    /// All full (interpretation, level map) traces of one row: the pairs the
    /// row stands for, over the atoms seen at or below its node. Meant for
    /// checking table invariants from tests on small instances.
    pub fn traces(&self, node: usize, row: usize) -> Vec<(Interpretation, LevelMap)> {
        let mut counts = vec![0u32; self.program.n_atoms()];
        let mut levels = vec![0u16; self.program.n_atoms()];
        let mut stack = vec![(node, row)];
        let mut out = Vec::new();
        self.walk(
            &mut stack,
            &mut counts,
            &mut levels,
            &mut |counts, levels| {
                let i: Interpretation = counts
                    .iter()
                    .enumerate()
                    .filter(|&(_, &c)| c > 0)
                    .map(|(a, _)| a)
                    .collect();
                let sigma: LevelMap = i.iter().map(|a| (a as AtomId, levels[a] as u32)).collect();
                out.push((i, sigma));
                true
            },
        );
        out
    }

    /// Depth-first expansion of every provenance combination of the rows on
    /// `stack`. `emit` gets atom multiplicities and levels; a false return
    /// stops the whole walk.
    fn walk(
        &self,
        stack: &mut Vec<(usize, usize)>,
        counts: &mut [u32],
        levels: &mut [u16],
        emit: &mut impl FnMut(&[u32], &[u16]) -> bool,
    ) -> bool {
        let Some((t, row_idx)) = stack.pop() else {
            return emit(counts, levels);
        };
        let (row, data) = self.tables[t].get_index(row_idx).unwrap();
        let mut alive = true;
        for &prov in &data.prov {
            let depth = stack.len();
            let mut introduced = None;
            match prov {
                Prov::Leaf => {}
                Prov::Int { child, in_i } => {
                    stack.push((self.ntd.children(t)[0], child));
                    if in_i {
                        let (pos_a, ..) = self.nodes[t].intro.as_ref().unwrap();
                        let a = self.nodes[t].bag[*pos_a] as usize;
                        counts[a] += 1;
                        levels[a] = row.sigma[*pos_a];
                        introduced = Some(a);
                    }
                }
                Prov::Forget { child } => {
                    stack.push((self.ntd.children(t)[0], child));
                }
                Prov::Join { left, right } => {
                    stack.push((self.ntd.children(t)[0], left));
                    stack.push((self.ntd.children(t)[1], right));
                }
            }
            alive = self.walk(stack, counts, levels, emit);
            stack.truncate(depth);
            if let Some(a) = introduced {
                counts[a] -= 1;
            }
            if !alive {
                break;
            }
        }
        stack.push((t, row_idx));
        alive
    }

    /// Table rows of one node in insertion order, decoded to atom ids.
    pub fn rows(&self, node: usize) -> Vec<RowView> {
        let bag = &self.nodes[node].bag;
        self.tables[node]
            .iter()
            .map(|(row, data)| RowView {
                interp: bag
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| row.i >> k & 1 == 1)
                    .map(|(_, &a)| a)
                    .collect(),
                proven: bag
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| row.p >> k & 1 == 1)
                    .map(|(_, &a)| a)
                    .collect(),
                sigma: bag
                    .iter()
                    .enumerate()
                    .map(|(k, &a)| (a, row.sigma[k]))
                    .collect(),
                count: data.count.clone(),
            })
            .collect()
    }

    pub fn n_nodes(&self) -> usize {
        self.ntd.n_nodes()
    }

    pub fn node_kind(&self, node: usize) -> NodeKind {
        self.ntd.kind[node]
    }

    pub fn bag_atoms(&self, node: usize) -> &[AtomId] {
        &self.nodes[node].bag
    }

    pub fn n_rows(&self, node: usize) -> usize {
        self.tables[node].len()
    }
}

/// A decoded table row.
#[derive(Clone, Debug)]
pub struct RowView {
    pub interp: Vec<AtomId>,
    pub proven: Vec<AtomId>,
    pub sigma: Vec<(AtomId, u16)>,
    pub count: BigUint,
}

/// The atoms of `i` proven by some rule of `bag_rules` under `sigma`.
pub fn gatherproof(
    i: &Interpretation,
    sigma: &LevelMap,
    bag_rules: &[Rule],
    scc: &SccInfo,
) -> BitSet {
    let mut out = BitSet::new();
    for r in bag_rules {
        for &h in &r.head {
            if i.contains(h as usize) && proves(r, h, i, sigma, scc) {
                out.insert(h as usize);
            }
        }
    }
    out
}

/// All extensions of `sigma` giving each new atom a level below its SCC size.
pub fn possord(sigma: &LevelMap, new_atoms: &BitSet, scc: &SccInfo) -> Vec<LevelMap> {
    for a in new_atoms.iter() {
        assert!(
            sigma.get(a as AtomId).is_none(),
            "atom {a} already has a level"
        );
    }
    let mut out = vec![sigma.clone()];
    for a in new_atoms.iter() {
        let mut next = Vec::with_capacity(out.len() * scc.ell_scc(a as AtomId) as usize);
        for base in &out {
            for lvl in 0..scc.ell_scc(a as AtomId) {
                let mut m = base.clone();
                m.set(a as AtomId, lvl);
                next.push(m);
            }
        }
        out = next;
    }
    out
}

/// Whether no rule of `bag_rules` proves an atom of `i` at a level one below
/// its own. A level map failing this cannot be the minimal one for its
/// interpretation, and its row would duplicate another.
pub fn isminimal(sigma: &LevelMap, i: &Interpretation, bag_rules: &[Rule], scc: &SccInfo) -> bool {
    for a in i.iter() {
        let a = a as AtomId;
        let Some(level) = sigma.get(a) else { continue };
        if level == 0 {
            continue;
        }
        let mut rho = sigma.clone();
        rho.set(a, level - 1);
        for r in bag_rules {
            if r.head.binary_search(&a).is_ok() && proves(r, a, i, &rho, scc) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;
    use crate::oracle;
    use crate::td::{decompose, make_nice, Heuristic};

    fn nice_of(p: &Program) -> NiceTD {
        let g = graphs::primal_graph(p);
        make_nice(&decompose(&g, Heuristic::MinFill, 0))
    }

    fn scc_of(p: &Program) -> SccInfo {
        graphs::scc_info(p, &graphs::dependency_digraph(p))
    }

    fn count_of(text: &str) -> BigUint {
        let p = Program::parse(text).unwrap();
        let ntd = nice_of(&p);
        solve(&p, &ntd, DpOptions::default()).unwrap().count()
    }

    #[test]
    fn running_example_counts_and_enumerates() {
        let p = instances::example1();
        let ntd = nice_of(&p);
        let sol = solve(&p, &ntd, DpOptions::default()).unwrap();
        assert!(sol.is_consistent());
        assert_eq!(sol.count(), BigUint::from(3u32));
        let mut sets: Vec<String> = sol
            .enumerate(None)
            .iter()
            .map(|i| p.format_interpretation(i))
            .collect();
        sets.sort();
        assert_eq!(sets, vec!["{a,b,c,d,e}", "{f}", "{g}"]);
    }

    #[test]
    fn degenerate_programs() {
        assert_eq!(count_of(""), BigUint::from(1u32));
        assert_eq!(count_of("a :- a."), BigUint::from(1u32));
        assert_eq!(count_of("a. :- a."), BigUint::from(0u32));
        let p = Program::parse("a. :- a.").unwrap();
        let ntd = nice_of(&p);
        let sol = solve(&p, &ntd, DpOptions::default()).unwrap();
        assert!(!sol.is_consistent());
        assert!(sol.enumerate(None).is_empty());
    }

    #[test]
    fn counting_needs_the_proof_sets_in_the_row_key() {
        // Merging rows by (I, sigma) alone would double-count here: with c
        // false, the trace proving b from c dies at the forget of c, but
        // merging it into the surviving unproven row first would inflate that
        // row's count.
        let text = "b :- c. a :- b. b :- a. {c}.";
        assert_eq!(count_of(text), BigUint::from(2u32));
    }

    #[test]
    fn matches_oracle_on_small_corpus() {
        for seed in 0..120 {
            let p = instances::random_hcf(seed, 6, 8);
            let ntd = nice_of(&p);
            let sol = solve(&p, &ntd, DpOptions::default()).unwrap();
            let expected = oracle::brute_answer_sets(&p).unwrap();
            assert_eq!(
                sol.count(),
                BigUint::from(expected.len()),
                "seed {seed}: {p}"
            );
            let mut got = sol.enumerate(None);
            got.sort();
            let mut want = expected.clone();
            want.sort();
            assert_eq!(got, want, "seed {seed}: {p}");
        }
    }

    #[test]
    fn consistency_without_pruning_matches() {
        for seed in 0..60 {
            let p = instances::random_hcf(seed, 6, 8);
            let ntd = nice_of(&p);
            let pruned = solve(&p, &ntd, DpOptions::default()).unwrap();
            let raw = solve(
                &p,
                &ntd,
                DpOptions {
                    prune_minimal: false,
                },
            )
            .unwrap();
            assert_eq!(pruned.is_consistent(), raw.is_consistent(), "seed {seed}");
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = Program::parse("a | b :- c. c :- a. c :- b.").unwrap();
        let ntd = nice_of(&p);
        assert!(matches!(
            solve(&p, &ntd, DpOptions::default()),
            Err(DpError::NotHcf(_))
        ));

        let p = Program::parse("a :- b.").unwrap();
        let q = Program::parse("x.").unwrap();
        let ntd = nice_of(&q);
        assert!(matches!(
            solve(&p, &ntd, DpOptions::default()),
            Err(DpError::InvalidTd(_))
        ));
    }

    #[test]
    fn enumeration_respects_limit() {
        let p = Program::parse("{a}. {b}. {c}.").unwrap();
        let ntd = nice_of(&p);
        let sol = solve(&p, &ntd, DpOptions::default()).unwrap();
        assert_eq!(sol.count(), BigUint::from(8u32));
        assert_eq!(sol.enumerate(Some(3)).len(), 3);
        assert_eq!(sol.enumerate(None).len(), 8);
    }

    #[test]
    fn gatherproof_examples() {
        let p = instances::example1();
        let scc = scc_of(&p);
        let id = |n: &str| p.atom_id(n).unwrap();
        let r6 = p.rules()[5].clone();
        let i = p.interpretation(["b", "c", "d"]);
        let sigma: LevelMap = [(id("b"), 0), (id("c"), 1), (id("d"), 2)]
            .into_iter()
            .collect();
        let proven = gatherproof(&i, &sigma, &[r6], &scc);
        assert_eq!(proven, BitSet::from_iter([id("d") as usize]));
        assert!(gatherproof(&i, &sigma, &[], &scc).is_empty());

        let r2 = p.rules()[1].clone();
        let i = p.interpretation(["a", "b"]);
        let sigma: LevelMap = [(id("a"), 3), (id("b"), 0)].into_iter().collect();
        assert!(gatherproof(&i, &sigma, &[r2], &scc).is_empty());
    }

    #[test]
    fn possord_examples() {
        let p = instances::example1();
        let scc = scc_of(&p);
        let id = |n: &str| p.atom_id(n).unwrap() as usize;
        let empty = LevelMap::new();
        let exts = possord(&empty, &BitSet::from_iter([id("d")]), &scc);
        assert_eq!(exts.len(), 4);
        let exts = possord(&empty, &BitSet::from_iter([id("e")]), &scc);
        assert_eq!(exts.len(), 1);
        assert_eq!(exts[0].get(id("e") as AtomId), Some(0));
        let sigma: LevelMap = [(id("b") as AtomId, 0)].into_iter().collect();
        let exts = possord(&sigma, &BitSet::new(), &scc);
        assert_eq!(exts, vec![sigma]);
    }

    #[test]
    fn isminimal_examples() {
        let p = instances::example1();
        let scc = scc_of(&p);
        let id = |n: &str| p.atom_id(n).unwrap();
        let r5 = p.rules()[4].clone();
        let i = p.interpretation(["b", "c"]);
        let sigma: LevelMap = [(id("b"), 0), (id("c"), 2)].into_iter().collect();
        assert!(!isminimal(&sigma, &i, std::slice::from_ref(&r5), &scc));

        let zero: LevelMap = [(id("b"), 0), (id("c"), 0)].into_iter().collect();
        assert!(isminimal(&zero, &i, &[r5], &scc));

        let r6 = p.rules()[5].clone();
        let i = p.interpretation(["b", "c", "d"]);
        let sigma: LevelMap = [(id("b"), 0), (id("c"), 1), (id("d"), 2)]
            .into_iter()
            .collect();
        assert!(isminimal(&sigma, &i, &[r6], &scc));
    }

    #[test]
    fn forget_drops_unproven_rows() {
        // Over "a :- a." the row with a true stays unproven (the rule cannot
        // prove its own head) and must die at the forget above it.
        let p = Program::parse("a :- a.").unwrap();
        let ntd = nice_of(&p);
        let sol = solve(&p, &ntd, DpOptions::default()).unwrap();
        let sets = sol.enumerate(None);
        assert_eq!(sets.len(), 1);
        assert!(sets[0].is_empty());
    }

    #[test]
    fn scaling_chain_counts_one() {
        let p = instances::disjoint_cycles(50, 4);
        let ntd = nice_of(&p);
        let sol = solve(&p, &ntd, DpOptions::default()).unwrap();
        assert_eq!(sol.count(), BigUint::from(1u32));
    }
}
