//! Shared test instances: the running example, seeded random program and
//! graph generators, and fixed-shape scaling inputs. Everything here is
//! deterministic in its seed so failures replay exactly.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graphs::{self, PrimalGraph};
use crate::program::{choice_copy_name, AtomId, Program, Rule};

/// The seven-rule running example used throughout the docs and tests. Its
/// answer sets are {a,b,c,d,e}, {f}, and {g}.
pub const EXAMPLE1: &str = "\
a :- d.
b :- a.
b :- d.
b :- e, not f.
c :- b.
d :- b, c.
e | f | g.
";

pub fn example1() -> Program {
    Program::parse(EXAMPLE1).expect("running example parses")
}

/// `n_cycles` disjoint positive cycles of `len` atoms each. The only answer
/// set is empty, every cycle is one SCC of size `len`, and the primal graph
/// has treewidth 2, so the instance scales the cycle machinery without
/// blowing up tables.
pub fn disjoint_cycles(n_cycles: usize, len: usize) -> Program {
    assert!(len >= 2, "a cycle needs at least two atoms");
    let mut p = Program::new();
    for k in 0..n_cycles {
        let ids: Vec<AtomId> = (0..len).map(|i| p.intern(&format!("c{k}_x{i}"))).collect();
        for i in 0..len {
            p.push_rule(Rule::new(vec![ids[i]], vec![ids[(i + 1) % len]], vec![]));
        }
    }
    p
}

/// Seeded random head-cycle-free program with at most `max_atoms` named atoms
/// (choice copies come on top) and at most `max_rules` rules. A slice of the
/// seed space gets a planted positive cycle or self-loop so the corpus mixes
/// tight, cyclic, and degenerate shapes; candidate rules that would break
/// head-cycle-freeness are dropped.
pub fn random_hcf(seed: u64, max_atoms: usize, max_rules: usize) -> Program {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_atoms);
    let mut p = Program::new();
    let atoms: Vec<AtomId> = (0..n).map(|i| p.intern(&format!("x{i}"))).collect();
    let push = |p: &mut Program, r: Rule| {
        if r.head.is_empty() && r.pos.is_empty() && r.neg.is_empty() {
            return;
        }
        if p.rules().contains(&r) {
            return;
        }
        p.push_rule(r);
        let scc = graphs::scc_info(p, &graphs::dependency_digraph(p));
        if crate::program::check_hcf(p, &scc).is_err() {
            p.pop_rule();
        }
    };
    if n >= 2 && seed % 3 != 2 {
        let len = rng.gen_range(2..=n.min(4));
        let start = rng.gen_range(0..n);
        for i in 0..len {
            let head = atoms[(start + i) % n];
            let body = atoms[(start + (i + 1) % len) % n];
            push(&mut p, Rule::new(vec![head], vec![body], vec![]));
        }
    }
    if seed.is_multiple_of(7) {
        let a = atoms[rng.gen_range(0..n)];
        push(&mut p, Rule::new(vec![a], vec![a], vec![]));
    }
    let n_rules = rng.gen_range(0..=max_rules);
    for _ in 0..n_rules {
        if rng.gen_ratio(1, 8) {
            let x = atoms[rng.gen_range(0..n)];
            let copy_name = choice_copy_name(p.atom_name(x));
            let copy = p.intern(&copy_name);
            p.mark_choice_copy(copy);
            push(&mut p, Rule::new(vec![x, copy], vec![], vec![]));
            continue;
        }
        let head_n = *[0usize, 1, 1, 1, 1, 2, 2, 3].choose(&mut rng).unwrap();
        let mut pool = atoms.clone();
        pool.shuffle(&mut rng);
        let head = pool[..head_n.min(n)].to_vec();
        let mut body_pool = atoms.clone();
        body_pool.shuffle(&mut rng);
        let np = rng.gen_range(0..=2.min(n));
        let nn = rng.gen_range(0..=2.min(n - np));
        let pos = body_pool[..np].to_vec();
        let neg = body_pool[np..np + nn].to_vec();
        push(&mut p, Rule::new(head, pos, neg));
    }
    p
}

/// Seeded random tight program with at most `max_atoms` named atoms. Positive
/// body atoms of non-constraint rules are forced below every head atom in a
/// fixed order, so the dependency digraph stays acyclic by construction.
pub fn random_tight(seed: u64, max_atoms: usize) -> Program {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_atoms);
    let mut p = Program::new();
    let atoms: Vec<AtomId> = (0..n).map(|i| p.intern(&format!("x{i}"))).collect();
    let n_rules = rng.gen_range(0..=max_atoms + 3);
    for _ in 0..n_rules {
        if rng.gen_ratio(1, 6) {
            let x = atoms[rng.gen_range(0..n)];
            let copy_name = choice_copy_name(p.atom_name(x));
            let copy = p.intern(&copy_name);
            p.mark_choice_copy(copy);
            let r = Rule::new(vec![x, copy], vec![], vec![]);
            if !p.rules().contains(&r) {
                p.push_rule(r);
            }
            continue;
        }
        let head_n = *[0usize, 1, 1, 1, 1, 2].choose(&mut rng).unwrap();
        let mut pool = atoms.clone();
        pool.shuffle(&mut rng);
        let head = pool[..head_n.min(n)].to_vec();
        let min_head = head.iter().min().copied().unwrap_or(n as AtomId);
        let below: Vec<AtomId> = atoms[..min_head as usize].to_vec();
        let mut pos_pool = below.clone();
        pos_pool.shuffle(&mut rng);
        let np = rng.gen_range(0..=2.min(pos_pool.len()));
        let pos = pos_pool[..np].to_vec();
        let mut neg_pool: Vec<AtomId> = atoms.iter().copied().filter(|a| !pos.contains(a)).collect();
        neg_pool.shuffle(&mut rng);
        let nn = rng.gen_range(0..=2.min(neg_pool.len()));
        let neg = neg_pool[..nn].to_vec();
        if head.is_empty() && pos.is_empty() && neg.is_empty() {
            continue;
        }
        let r = Rule::new(head, pos, neg);
        if !p.rules().contains(&r) {
            p.push_rule(r);
        }
    }
    debug_assert!(
        graphs::scc_info(&p, &graphs::dependency_digraph(&p)).is_acyclic(),
        "tight generator produced a cycle"
    );
    p
}

/// Seeded random graph on 1..=24 vertices with a seed-dependent edge density.
pub fn random_graph(seed: u64) -> PrimalGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=24);
    let density = rng.gen_range(0.05..0.5);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(density) {
                edges.push((u, v));
            }
        }
    }
    PrimalGraph::from_edges(n, &edges)
}
