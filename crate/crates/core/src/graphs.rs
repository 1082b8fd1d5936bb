//! Program graphs: the primal (co-occurrence) graph used for tree
//! decomposition and the positive dependency digraph whose strongly connected
//! components drive level-map bounds and the head-cycle-free check.

use crate::bitset::BitSet;
use crate::program::{AtomId, Program};

/// Undirected co-occurrence graph: one vertex per interned atom, an edge
/// between two distinct atoms whenever some rule mentions both.
#[derive(Clone, Debug)]
pub struct PrimalGraph {
    adj: Vec<BitSet>,
}

impl PrimalGraph {
    /// Builds a graph on vertices 0..n from an undirected edge list.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> PrimalGraph {
        let mut adj = vec![BitSet::new(); n];
        for &(u, v) in edges {
            assert!(u != v && u < n && v < n, "bad edge ({u},{v})");
            adj[u].insert(v);
            adj[v].insert(u);
        }
        PrimalGraph { adj }
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, v: usize) -> &BitSet {
        &self.adj[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].contains(v)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }
}

pub fn primal_graph(p: &Program) -> PrimalGraph {
    let mut adj = vec![BitSet::new(); p.n_atoms()];
    for r in p.rules() {
        let atoms: Vec<AtomId> = {
            let mut v: Vec<AtomId> = r.atoms().collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        for (i, &a) in atoms.iter().enumerate() {
            for &b in &atoms[i + 1..] {
                adj[a as usize].insert(b as usize);
                adj[b as usize].insert(a as usize);
            }
        }
    }
    PrimalGraph { adj }
}

/// Positive dependency digraph: vertices are the atoms occurring in some head
/// or positive body, with an edge a -> b whenever a rule has a in its positive
/// body and b in its head.
pub struct DependencyDigraph {
    members: BitSet,
    succ: Vec<BitSet>,
}

impl DependencyDigraph {
    pub fn contains(&self, a: AtomId) -> bool {
        self.members.contains(a as usize)
    }

    pub fn successors(&self, a: AtomId) -> &BitSet {
        &self.succ[a as usize]
    }

    pub fn has_edge(&self, a: AtomId, b: AtomId) -> bool {
        self.succ[a as usize].contains(b as usize)
    }
}

pub fn dependency_digraph(p: &Program) -> DependencyDigraph {
    let mut members = BitSet::new();
    let mut succ = vec![BitSet::new(); p.n_atoms()];
    for r in p.rules() {
        for &h in &r.head {
            members.insert(h as usize);
        }
        for &b in &r.pos {
            members.insert(b as usize);
            for &h in &r.head {
                succ[b as usize].insert(h as usize);
            }
        }
    }
    DependencyDigraph { members, succ }
}

/// Strongly connected components of the dependency digraph, extended to the
/// whole atom table: an atom outside the digraph forms its own singleton
/// component. `ell_scc` is the component size, and `ell` is one past the
/// largest component (so 2 for cycle-free programs, including the empty one).
pub struct SccInfo {
    scc_of: Vec<u32>,
    members: Vec<Vec<AtomId>>,
    self_loop: bool,
}

impl SccInfo {
    pub fn scc_of(&self, a: AtomId) -> u32 {
        self.scc_of[a as usize]
    }

    pub fn scc_count(&self) -> usize {
        self.members.len()
    }

    pub fn scc_members(&self, comp: u32) -> &[AtomId] {
        &self.members[comp as usize]
    }

    pub fn scc_size(&self, comp: u32) -> u32 {
        self.members[comp as usize].len() as u32
    }

    /// Size of the component containing `a`.
    pub fn ell_scc(&self, a: AtomId) -> u32 {
        self.scc_size(self.scc_of(a))
    }

    /// One past the largest component size; at least 2.
    pub fn ell(&self) -> u32 {
        self.members
            .iter()
            .map(|m| m.len() as u32)
            .max()
            .unwrap_or(1)
            + 1
    }

    /// True when the digraph has no cycle, counting self-loops as cycles.
    pub fn is_acyclic(&self) -> bool {
        !self.self_loop && self.members.iter().all(|m| m.len() == 1)
    }
}

/// Computes SCCs with an iterative Tarjan walk over the digraph vertices.
pub fn scc_info(p: &Program, d: &DependencyDigraph) -> SccInfo {
    let n = p.n_atoms();
    const UNSEEN: u32 = u32::MAX;
    let mut index = vec![UNSEEN; n];
    let mut lowlink = vec![0u32; n];
    let mut on_stack = BitSet::new();
    let mut stack: Vec<u32> = Vec::new();
    let mut scc_of = vec![UNSEEN; n];
    let mut members: Vec<Vec<AtomId>> = Vec::new();
    let mut next_index = 0u32;
    // Call frames: vertex plus the neighbors not yet visited.
    let mut frames: Vec<(u32, std::vec::IntoIter<u32>)> = Vec::new();

    for root in 0..n as u32 {
        if !d.contains(root) || index[root as usize] != UNSEEN {
            continue;
        }
        index[root as usize] = next_index;
        lowlink[root as usize] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack.insert(root as usize);
        let succs: Vec<u32> = d.successors(root).iter().map(|x| x as u32).collect();
        frames.push((root, succs.into_iter()));
        while let Some((v, iter)) = frames.last_mut() {
            let v = *v;
            if let Some(w) = iter.next() {
                if index[w as usize] == UNSEEN {
                    index[w as usize] = next_index;
                    lowlink[w as usize] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack.insert(w as usize);
                    let succs: Vec<u32> = d.successors(w).iter().map(|x| x as u32).collect();
                    frames.push((w, succs.into_iter()));
                } else if on_stack.contains(w as usize) {
                    lowlink[v as usize] = lowlink[v as usize].min(index[w as usize]);
                }
            } else {
                frames.pop();
                if let Some((parent, _)) = frames.last() {
                    let parent = *parent as usize;
                    lowlink[parent] = lowlink[parent].min(lowlink[v as usize]);
                }
                if lowlink[v as usize] == index[v as usize] {
                    let comp = members.len() as u32;
                    let mut comp_members = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack.remove(w as usize);
                        scc_of[w as usize] = comp;
                        comp_members.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp_members.sort_unstable();
                    members.push(comp_members);
                }
            }
        }
    }
    for a in 0..n as u32 {
        if scc_of[a as usize] == UNSEEN {
            scc_of[a as usize] = members.len() as u32;
            members.push(vec![a]);
        }
    }
    let self_loop = (0..n as u32).any(|a| d.contains(a) && d.has_edge(a, a));
    SccInfo {
        scc_of,
        members,
        self_loop,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;

    #[test]
    fn primal_graph_of_running_example() {
        let p = instances::example1();
        let g = primal_graph(&p);
        let id = |n: &str| p.atom_id(n).unwrap() as usize;
        assert_eq!(g.n(), 7);
        let edges = [
            ("a", "d"),
            ("a", "b"),
            ("b", "d"),
            ("b", "e"),
            ("b", "f"),
            ("e", "f"),
            ("b", "c"),
            ("c", "d"),
            ("e", "g"),
            ("f", "g"),
        ];
        for (u, v) in edges {
            assert!(g.has_edge(id(u), id(v)), "missing edge {u}-{v}");
        }
        assert!(!g.has_edge(id("a"), id("e")));
        assert!(!g.has_edge(id("a"), id("g")));
        assert_eq!(g.degree(id("b")), 5);
    }

    #[test]
    fn isolated_atoms_stay_in_primal_graph() {
        let p = crate::Program::parse("a. b :- c.").unwrap();
        let g = primal_graph(&p);
        assert_eq!(g.n(), 3);
        assert_eq!(g.degree(p.atom_id("a").unwrap() as usize), 0);
    }

    #[test]
    fn dependency_digraph_of_running_example() {
        let p = instances::example1();
        let d = dependency_digraph(&p);
        let id = |n: &str| p.atom_id(n).unwrap();
        for a in ["a", "b", "c", "d", "e", "f", "g"] {
            assert!(d.contains(id(a)), "vertex {a}");
        }
        let edges = [
            ("d", "a"),
            ("a", "b"),
            ("d", "b"),
            ("e", "b"),
            ("b", "c"),
            ("b", "d"),
            ("c", "d"),
        ];
        for (u, v) in edges {
            assert!(d.has_edge(id(u), id(v)), "missing edge {u}->{v}");
        }
        assert!(!d.has_edge(id("a"), id("d")));
        assert!(!d.has_edge(id("f"), id("b")));
    }

    #[test]
    fn negative_only_atoms_stay_out_of_digraph() {
        let p = crate::Program::parse("a :- not b.").unwrap();
        let d = dependency_digraph(&p);
        assert!(d.contains(p.atom_id("a").unwrap()));
        assert!(!d.contains(p.atom_id("b").unwrap()));
    }

    #[test]
    fn scc_levels_of_running_example() {
        let p = instances::example1();
        let scc = scc_info(&p, &dependency_digraph(&p));
        let id = |n: &str| p.atom_id(n).unwrap();
        for a in ["a", "b", "c", "d"] {
            assert_eq!(scc.ell_scc(id(a)), 4, "ell_scc({a})");
        }
        for a in ["e", "f", "g"] {
            assert_eq!(scc.ell_scc(id(a)), 1, "ell_scc({a})");
        }
        assert_eq!(scc.scc_of(id("a")), scc.scc_of(id("d")));
        assert_ne!(scc.scc_of(id("e")), scc.scc_of(id("f")));
        assert_eq!(scc.ell(), 5);
        assert!(!scc.is_acyclic());
    }

    #[test]
    fn empty_program_defaults() {
        let p = crate::Program::parse("").unwrap();
        let scc = scc_info(&p, &dependency_digraph(&p));
        assert_eq!(scc.ell(), 2);
        assert!(scc.is_acyclic());
        assert_eq!(scc.scc_count(), 0);
    }

    #[test]
    fn self_loop_counts_as_cycle() {
        let p = crate::Program::parse("a :- a.").unwrap();
        let scc = scc_info(&p, &dependency_digraph(&p));
        let a = p.atom_id("a").unwrap();
        assert_eq!(scc.ell_scc(a), 1);
        assert_eq!(scc.ell(), 2);
        assert!(!scc.is_acyclic());
    }

    #[test]
    fn two_cycles_and_a_bridge() {
        let p = crate::Program::parse(
            "a :- b. b :- a. c :- d, a. d :- c. e :- not a.",
        )
        .unwrap();
        let scc = scc_info(&p, &dependency_digraph(&p));
        let id = |n: &str| p.atom_id(n).unwrap();
        assert_eq!(scc.ell_scc(id("a")), 2);
        assert_eq!(scc.ell_scc(id("c")), 2);
        assert_ne!(scc.scc_of(id("a")), scc.scc_of(id("c")));
        assert_eq!(scc.ell_scc(id("e")), 1);
        assert_eq!(scc.ell(), 3);
    }
}
