//! Compiling tight programs to CNF along a tree decomposition, plus the
//! explicitly built decomposition certifying the formula's width.
//!
//! Satisfaction of every rule is one clause. Support is tracked structurally:
//! a firing variable per head occurrence of a bag rule says "this rule proves
//! this head here", a per-node proof variable collects the firings, and a
//! per-node collected-proof variable sweeps proofs up the tree. An atom
//! forgotten (or left at the root) without a collected proof forces its own
//! falsity. On tight programs supported models are exactly the answer sets,
//! so the strong translation's models restricted to program atoms are the
//! answer sets, one model each: all auxiliary variables are functions of the
//! atoms. The weak translation keeps only the clauses needed for that
//! restriction to be sound (each proof variable still implies a real proof),
//! dropping the converse directions; it preserves satisfiability but a single
//! answer set may then correspond to several models.
//!
//! Head occurrences whose firing condition is contradictory (an atom required
//! both true and false) get no firing variable, and satisfaction clauses that
//! are tautologies are dropped.

use crate::bitset::BitSet;
use crate::graphs::{dependency_digraph, primal_graph, scc_info, PrimalGraph};
use crate::program::{AtomId, Program, Rule};
use crate::td::{bag_program_indices, validate_td, NiceTD, TreeDecomposition};

use super::{clause_proof_below_name, clause_proof_here_name, fire_name, CnfFormula, ReduceError};

/// Variable-name prefixes this translation mints; inputs must not use them.
const RESERVED: [&str; 3] = ["__q_", "__qb_", "__f_"];

/// Compiles a tight program to CNF over the bags of `ntd`. Program atoms
/// become variables 1..=n in atom id order. With `weak` the formula is only
/// equisatisfiable (models still restrict to answer sets); without it, models
/// and answer sets correspond one-to-one.
pub fn tight_to_cnf(p: &Program, ntd: &NiceTD, weak: bool) -> Result<CnfFormula, ReduceError> {
    Ok(build(p, &ntd.td, weak, false)?.0)
}

/// A tree decomposition of the compiled formula's primal graph. For
/// decompositions with at most two children per node (nice ones in
/// particular), every bag stays within 4 bag atoms plus one per head
/// occurrence of a bag rule.
pub fn witness_td_cnf(ntd: &NiceTD, p: &Program) -> Result<TreeDecomposition, ReduceError> {
    Ok(witness_td_cnf_detailed(ntd, p)?.0)
}

/// Same as [`witness_td_cnf`] plus, per witness bag, the input node it was
/// derived from, so callers can check the per-bag size guarantee.
pub fn witness_td_cnf_detailed(
    ntd: &NiceTD,
    p: &Program,
) -> Result<(TreeDecomposition, Vec<usize>), ReduceError> {
    let (_, witness) = build(p, &ntd.td, false, true)?;
    Ok(witness.expect("witness requested"))
}

/// The primal graph of a CNF formula: one vertex per variable (index shifted
/// to 0-based), one clique per clause.
pub fn cnf_primal_graph(f: &CnfFormula) -> PrimalGraph {
    let mut edges = Vec::new();
    for clause in f.clauses() {
        for (i, &l1) in clause.iter().enumerate() {
            for &l2 in &clause[i + 1..] {
                edges.push((
                    l1.unsigned_abs() as usize - 1,
                    l2.unsigned_abs() as usize - 1,
                ));
            }
        }
    }
    PrimalGraph::from_edges(f.n_vars(), &edges)
}

/// A head occurrence is dead when its firing condition needs some atom both
/// true and false.
fn blocked(r: &Rule, x: AtomId) -> bool {
    r.pos
        .iter()
        .chain(std::iter::once(&x))
        .any(|&a| (a != x && r.head.binary_search(&a).is_ok()) || r.neg.binary_search(&a).is_ok())
}

type Witness = (TreeDecomposition, Vec<usize>);

fn build(
    p: &Program,
    td: &TreeDecomposition,
    weak: bool,
    want_witness: bool,
) -> Result<(CnfFormula, Option<Witness>), ReduceError> {
    let scc = scc_info(p, &dependency_digraph(p));
    if !scc.is_acyclic() {
        let a = p
            .atom_ids()
            .find(|&a| scc.ell_scc(a) > 1 || dependency_digraph(p).has_edge(a, a))
            .expect("cyclic program has a cyclic atom");
        return Err(ReduceError::NotTight(p.atom_name(a).to_string()));
    }
    validate_td(&primal_graph(p), td)?;
    for a in p.atom_ids() {
        let name = p.atom_name(a);
        if RESERVED.iter().any(|pre| name.starts_with(pre)) {
            return Err(ReduceError::ReservedAtom(name.to_string()));
        }
    }

    let m = td.n_nodes();
    let mut f = CnfFormula::new();
    for a in p.atom_ids() {
        f.var(p.atom_name(a));
    }

    let bag_rules: Vec<Vec<usize>> = td
        .bags
        .iter()
        .map(|bag| bag_program_indices(p, bag))
        .collect();

    // head_occs[t]: per bag atom with a head occurrence in the bag program,
    // the (rule, firing variable) pairs of its live occurrences.
    let mut proof_here: Vec<Vec<Option<i32>>> = vec![Vec::new(); m];
    let mut proof_below: Vec<Vec<i32>> = vec![Vec::new(); m];
    let mut fires: Vec<Vec<Vec<(usize, i32)>>> = vec![Vec::new(); m];
    for t in 0..m {
        for xv in td.bags[t].iter() {
            let x = xv as AtomId;
            let xn = p.atom_name(x);
            let occs: Vec<usize> = bag_rules[t]
                .iter()
                .copied()
                .filter(|&ri| p.rules()[ri].head.binary_search(&x).is_ok())
                .collect();
            let q = if occs.is_empty() {
                None
            } else {
                Some(f.var(&clause_proof_here_name(t, xn)))
            };
            proof_here[t].push(q);
            proof_below[t].push(f.var(&clause_proof_below_name(t, xn)));
            fires[t].push(
                occs.into_iter()
                    .filter(|&ri| !blocked(&p.rules()[ri], x))
                    .map(|ri| (ri, f.var(&fire_name(t, ri, xn))))
                    .collect(),
            );
        }
    }

    let bag_pos = |t: usize, x: AtomId| {
        td.bags[t]
            .iter()
            .position(|v| v == x as usize)
            .expect("atom in bag")
    };

    let mut rule_done = vec![false; p.rules().len()];
    for t in 0..m {
        // every model satisfies every rule
        for &ri in &bag_rules[t] {
            if rule_done[ri] {
                continue;
            }
            rule_done[ri] = true;
            let r = &p.rules()[ri];
            if r.pos.iter().any(|a| r.head.binary_search(a).is_ok()) {
                continue; // tautology
            }
            let mut clause: Vec<i32> = r.pos.iter().map(|&a| -(a as i32 + 1)).collect();
            clause.extend(r.neg.iter().chain(r.head.iter()).map(|&a| a as i32 + 1));
            f.add_clause(clause);
        }

        for (xi, xv) in td.bags[t].iter().enumerate() {
            let x = xv as AtomId;
            let xlit = x as i32 + 1;
            // firing variables tie a head occurrence to its condition
            for &(ri, fire) in &fires[t][xi] {
                let r = &p.rules()[ri];
                let mut cond: Vec<i32> = vec![xlit];
                cond.extend(r.pos.iter().map(|&a| a as i32 + 1));
                cond.extend(
                    r.neg
                        .iter()
                        .chain(r.head.iter().filter(|&&h| h != x))
                        .map(|&a| -(a as i32 + 1)),
                );
                cond.sort_unstable();
                cond.dedup();
                for &lit in &cond {
                    f.add_clause(vec![-fire, lit]);
                }
                if !weak {
                    let mut back: Vec<i32> = cond.iter().map(|&l| -l).collect();
                    back.push(fire);
                    f.add_clause(back);
                }
            }
            // a proof here is one of the firings
            if let Some(q) = proof_here[t][xi] {
                let mut clause: Vec<i32> = vec![-q];
                clause.extend(fires[t][xi].iter().map(|&(_, fire)| fire));
                f.add_clause(clause);
                if !weak {
                    for &(_, fire) in &fires[t][xi] {
                        f.add_clause(vec![-fire, q]);
                    }
                }
            }
            // a proof below is a proof here or in a child sharing the atom
            let qb = proof_below[t][xi];
            let mut clause: Vec<i32> = vec![-qb];
            clause.extend(proof_here[t][xi]);
            for &c in &td.children[t] {
                if td.bags[c].contains(xv) {
                    clause.push(proof_below[c][bag_pos(c, x)]);
                }
            }
            if !weak {
                for &lit in &clause[1..] {
                    f.add_clause(vec![-lit, qb]);
                }
            }
            f.add_clause(clause);
        }

        // atoms leaving scope must have collected a proof
        for &c in &td.children[t] {
            for xv in td.bags[c].iter() {
                if !td.bags[t].contains(xv) {
                    let x = xv as AtomId;
                    f.add_clause(vec![-(x as i32 + 1), proof_below[c][bag_pos(c, x)]]);
                }
            }
        }
        if t == td.root {
            for xv in td.bags[t].iter() {
                let x = xv as AtomId;
                f.add_clause(vec![-(x as i32 + 1), proof_below[t][bag_pos(t, x)]]);
            }
        }
    }

    let witness = want_witness.then(|| {
        let mut bags: Vec<BitSet> = Vec::new();
        let mut parent: Vec<Option<usize>> = Vec::new();
        let mut origin: Vec<usize> = Vec::new();
        let vx = |lit: i32| lit as usize - 1;

        // primary bags mirror the input tree: bag atoms, both proof
        // variables, and the children's collected proofs for shared atoms
        for t in 0..m {
            let mut w = BitSet::new();
            for (xi, xv) in td.bags[t].iter().enumerate() {
                w.insert(xv);
                if let Some(q) = proof_here[t][xi] {
                    w.insert(vx(q));
                }
                w.insert(vx(proof_below[t][xi]));
                for &c in &td.children[t] {
                    if td.bags[c].contains(xv) {
                        w.insert(vx(proof_below[c][bag_pos(c, xv as AtomId)]));
                    }
                }
            }
            bags.push(w);
            parent.push(td.parent[t]);
            origin.push(t);
        }

        // one pendant bag per live proof variable carries its firings
        for t in 0..m {
            for xi in 0..proof_here[t].len() {
                let Some(q) = proof_here[t][xi] else { continue };
                let mut b = BitSet::new();
                for yv in td.bags[t].iter() {
                    b.insert(yv);
                }
                b.insert(vx(q));
                for &(_, fire) in &fires[t][xi] {
                    b.insert(vx(fire));
                }
                bags.push(b);
                parent.push(Some(t));
                origin.push(t);
            }
        }

        let mut children: Vec<Vec<usize>> = vec![Vec::new(); bags.len()];
        for (i, pa) in parent.iter().enumerate() {
            if let Some(pa) = pa {
                children[*pa].push(i);
            }
        }
        (
            TreeDecomposition {
                n_vertices: f.n_vars(),
                bags,
                parent,
                children,
                root: td.root,
            },
            origin,
        )
    });

    debug_assert!(rule_done.iter().all(|&d| d), "a rule fits no bag");
    Ok((f, witness))
}
