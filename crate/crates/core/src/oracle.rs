//! Ground truth, kept deliberately independent of the solver: brute-force
//! answer sets by definition, brute-force CNF models, an exhaustive DPLL
//! model counter for formulas past the brute-force guard, and answer-set
//! counting for tight programs via shifted completion.

use num_bigint::BigUint;

use crate::bitset::BitSet;
use crate::graphs;
use crate::program::{Interpretation, Program};
use crate::reduce::CnfFormula;

const GUARD: usize = 24;

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("{what} has size {size}, the brute-force guard is {max}")]
    TooLarge {
        what: &'static str,
        size: usize,
        max: usize,
    },
    #[error("completion counting requires a tight program")]
    NotTight,
}

/// All answer sets of `p` by direct definition: every subset I is kept iff it
/// models the reduct of `p` under I and no proper subset does. Guarded to 24
/// atoms.
pub fn brute_answer_sets(p: &Program) -> Result<Vec<Interpretation>, OracleError> {
    let n = p.n_atoms();
    if n > GUARD {
        return Err(OracleError::TooLarge {
            what: "program",
            size: n,
            max: GUARD,
        });
    }
    let rules: Vec<(u32, u32, u32)> = p
        .rules()
        .iter()
        .map(|r| {
            let mask = |atoms: &[crate::program::AtomId]| {
                atoms.iter().fold(0u32, |m, &a| m | (1 << a))
            };
            (mask(&r.head), mask(&r.pos), mask(&r.neg))
        })
        .collect();
    let mut out = Vec::new();
    for i in 0u32..1 << n {
        // I models the reduct under I exactly when I models p itself.
        if !rules
            .iter()
            .all(|&(h, pos, neg)| (h | neg) & i != 0 || pos & i != pos)
        {
            continue;
        }
        let reduct: Vec<(u32, u32)> = rules
            .iter()
            .filter(|&&(_, _, neg)| neg & i == 0)
            .map(|&(h, pos, _)| (h, pos))
            .collect();
        let mut minimal = true;
        if i != 0 {
            let mut sub = (i - 1) & i;
            loop {
                if reduct.iter().all(|&(h, pos)| h & sub != 0 || pos & sub != pos) {
                    minimal = false;
                    break;
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & i;
            }
        }
        if minimal {
            out.push((0..n).filter(|&a| i & (1 << a) != 0).collect());
        }
    }
    Ok(out)
}

/// All models of `f` by enumeration, each as the set of true variable
/// indices (0-based). Guarded to 24 variables.
pub fn brute_models(f: &CnfFormula) -> Result<Vec<BitSet>, OracleError> {
    let n = f.n_vars();
    if n > GUARD {
        return Err(OracleError::TooLarge {
            what: "formula",
            size: n,
            max: GUARD,
        });
    }
    let mut out = Vec::new();
    for m in 0u32..1 << n {
        let holds = f.clauses().iter().all(|clause| {
            clause
                .iter()
                .any(|&l| (m >> (l.unsigned_abs() - 1)) & 1 == (l > 0) as u32)
        });
        if holds {
            out.push((0..n).filter(|&v| m & (1 << v) != 0).collect());
        }
    }
    Ok(out)
}

/// Exact model count of `f` by exhaustive DPLL with unit propagation and
/// connected-component factoring. No size guard; cost is exponential only in
/// the branching depth per component.
pub fn count_models(f: &CnfFormula) -> BigUint {
    match split(f) {
        None => BigUint::from(0u32),
        Some((free, components)) => {
            let mut total = BigUint::from(1u32) << free;
            for mut solver in components {
                total *= solver.count();
            }
            total
        }
    }
}

/// Whether `f` has a model; same search as [`count_models`] with early exit.
pub fn is_satisfiable(f: &CnfFormula) -> bool {
    match split(f) {
        None => false,
        Some((_, components)) => {
            let mut components = components;
            components.iter_mut().all(|s| s.satisfiable())
        }
    }
}

/// Top-level unit propagation and component split. Returns None on conflict,
/// otherwise the count of free variables (unassigned, in no open clause) and
/// one sub-solver per connected component of the open clauses.
fn split(f: &CnfFormula) -> Option<(usize, Vec<Solver>)> {
    let n = f.n_vars();
    let mut assign = vec![0i8; n];
    let mut open: Vec<bool> = vec![true; f.n_clauses()];
    // Unit propagation over the raw clause list; fine at top level.
    loop {
        let mut changed = false;
        for (ci, clause) in f.clauses().iter().enumerate() {
            if !open[ci] {
                continue;
            }
            let mut unassigned = None;
            let mut n_unassigned = 0;
            let mut satisfied = false;
            for &l in clause {
                match assign[l.unsigned_abs() as usize - 1] as i32 * l.signum() {
                    0 => {
                        n_unassigned += 1;
                        unassigned = Some(l);
                    }
                    x if x > 0 => {
                        satisfied = true;
                        break;
                    }
                    _ => {}
                }
            }
            if satisfied {
                open[ci] = false;
                changed = true;
            } else if n_unassigned == 0 {
                return None;
            } else if n_unassigned == 1 {
                let l = unassigned.unwrap();
                assign[l.unsigned_abs() as usize - 1] = l.signum() as i8;
                open[ci] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    // Union-find over variables of open clauses.
    let mut uf: Vec<usize> = (0..n).collect();
    fn find(uf: &mut [usize], mut x: usize) -> usize {
        while uf[x] != x {
            uf[x] = uf[uf[x]];
            x = uf[x];
        }
        x
    }
    let mut in_open = vec![false; n];
    for (ci, clause) in f.clauses().iter().enumerate() {
        if !open[ci] {
            continue;
        }
        let mut prev: Option<usize> = None;
        for &l in clause {
            let v = l.unsigned_abs() as usize - 1;
            if assign[v] != 0 {
                continue;
            }
            in_open[v] = true;
            if let Some(p) = prev {
                let (a, b) = (find(&mut uf, p), find(&mut uf, v));
                uf[a] = b;
            }
            prev = Some(v);
        }
    }
    let free = (0..n).filter(|&v| assign[v] == 0 && !in_open[v]).count();

    let mut comp_of: std::collections::HashMap<usize, usize> = std::collections::HashMap::new();
    let mut var_maps: Vec<std::collections::HashMap<usize, i32>> = Vec::new();
    let mut comp_clauses: Vec<Vec<Vec<i32>>> = Vec::new();
    for (ci, clause) in f.clauses().iter().enumerate() {
        if !open[ci] {
            continue;
        }
        let rep = clause
            .iter()
            .map(|&l| l.unsigned_abs() as usize - 1)
            .find(|&v| assign[v] == 0)
            .expect("open clause has an unassigned literal");
        let rep = find(&mut uf, rep);
        let comp = *comp_of.entry(rep).or_insert_with(|| {
            var_maps.push(std::collections::HashMap::new());
            comp_clauses.push(Vec::new());
            var_maps.len() - 1
        });
        let mut lits = Vec::new();
        for &l in clause {
            let v = l.unsigned_abs() as usize - 1;
            if assign[v] != 0 {
                continue;
            }
            let next = var_maps[comp].len() as i32 + 1;
            let idx = *var_maps[comp].entry(v).or_insert(next);
            lits.push(idx * l.signum());
        }
        comp_clauses[comp].push(lits);
    }
    let components = comp_clauses
        .into_iter()
        .enumerate()
        .map(|(k, clauses)| Solver::new(var_maps[k].len(), clauses))
        .collect();
    Some((free, components))
}

/// Counter-based DPLL over one connected component.
struct Solver {
    clauses: Vec<Vec<i32>>,
    pos_occ: Vec<Vec<usize>>,
    neg_occ: Vec<Vec<usize>>,
    assign: Vec<i8>,
    n_true: Vec<u32>,
    n_open_lits: Vec<u32>,
    n_unsat: usize,
    n_free: usize,
    trail: Vec<usize>,
}

impl Solver {
    fn new(n_vars: usize, clauses: Vec<Vec<i32>>) -> Solver {
        let mut pos_occ = vec![Vec::new(); n_vars];
        let mut neg_occ = vec![Vec::new(); n_vars];
        let mut n_open_lits = Vec::with_capacity(clauses.len());
        for (ci, clause) in clauses.iter().enumerate() {
            for &l in clause {
                let v = l.unsigned_abs() as usize - 1;
                if l > 0 {
                    pos_occ[v].push(ci);
                } else {
                    neg_occ[v].push(ci);
                }
            }
            n_open_lits.push(clause.len() as u32);
        }
        Solver {
            n_unsat: clauses.len(),
            n_true: vec![0; clauses.len()],
            n_open_lits,
            clauses,
            pos_occ,
            neg_occ,
            assign: vec![0; n_vars],
            n_free: n_vars,
            trail: Vec::new(),
        }
    }

    /// Assigns v := val and unit-propagates. Returns false on conflict. Every
    /// assignment updates all of its occurrence counters before the conflict
    /// is reported, so rollback stays exact.
    fn assign_propagate(&mut self, v: usize, val: i8) -> bool {
        let mut queue = vec![(v, val)];
        while let Some((v, val)) = queue.pop() {
            if self.assign[v] != 0 {
                if self.assign[v] != val {
                    return false;
                }
                continue;
            }
            self.assign[v] = val;
            self.n_free -= 1;
            self.trail.push(v);
            let (sat_occ, unsat_occ) = if val > 0 {
                (&self.pos_occ[v], &self.neg_occ[v])
            } else {
                (&self.neg_occ[v], &self.pos_occ[v])
            };
            for &ci in sat_occ {
                if self.n_true[ci] == 0 {
                    self.n_unsat -= 1;
                }
                self.n_true[ci] += 1;
                self.n_open_lits[ci] -= 1;
            }
            let mut conflict = false;
            for &ci in unsat_occ {
                self.n_open_lits[ci] -= 1;
                if self.n_true[ci] == 0 && !conflict {
                    match self.n_open_lits[ci] {
                        0 => conflict = true,
                        1 => {
                            let l = self.clauses[ci]
                                .iter()
                                .copied()
                                .find(|&l| self.assign[l.unsigned_abs() as usize - 1] == 0)
                                .expect("one open literal left");
                            queue.push((l.unsigned_abs() as usize - 1, l.signum() as i8));
                        }
                        _ => {}
                    }
                }
            }
            if conflict {
                return false;
            }
        }
        true
    }

    fn rollback(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let v = self.trail.pop().unwrap();
            let val = self.assign[v];
            let (sat_occ, unsat_occ) = if val > 0 {
                (&self.pos_occ[v], &self.neg_occ[v])
            } else {
                (&self.neg_occ[v], &self.pos_occ[v])
            };
            for &ci in sat_occ {
                self.n_true[ci] -= 1;
                if self.n_true[ci] == 0 {
                    self.n_unsat += 1;
                }
                self.n_open_lits[ci] += 1;
            }
            for &ci in unsat_occ {
                self.n_open_lits[ci] += 1;
            }
            self.assign[v] = 0;
            self.n_free += 1;
        }
    }

    /// Lowest-indexed open clause's first unassigned literal, as the variable
    /// and the value satisfying that literal. Trying the satisfying polarity
    /// first keeps the search near-linear on formulas that are easy to
    /// satisfy greedily (one-directional implication chains in particular).
    fn pick(&self) -> (usize, i8) {
        let ci = (0..self.clauses.len())
            .find(|&ci| self.n_true[ci] == 0)
            .expect("called with an open clause");
        let l = self.clauses[ci]
            .iter()
            .copied()
            .find(|&l| self.assign[l.unsigned_abs() as usize - 1] == 0)
            .expect("open clause has an unassigned literal");
        (l.unsigned_abs() as usize - 1, l.signum() as i8)
    }

    fn count(&mut self) -> BigUint {
        if self.n_unsat == 0 {
            return BigUint::from(1u32) << self.n_free;
        }
        let (v, first) = self.pick();
        let mut total = BigUint::from(0u32);
        for val in [first, -first] {
            let mark = self.trail.len();
            if self.assign_propagate(v, val) {
                total += self.count();
            }
            self.rollback(mark);
        }
        total
    }

    fn satisfiable(&mut self) -> bool {
        if self.n_unsat == 0 {
            return true;
        }
        let (v, first) = self.pick();
        for val in [first, -first] {
            let mark = self.trail.len();
            let ok = self.assign_propagate(v, val) && self.satisfiable();
            self.rollback(mark);
            if ok {
                return true;
            }
        }
        false
    }
}

/// CNF whose models correspond one-to-one to the answer sets of the tight
/// program `p`: disjunctive rules are shifted to normal ones (answer-set
/// preserving under head-cycle-freeness, which tightness implies), then the
/// completion of each atom is clausified with one defined variable per rule
/// body. Atom k of `p` is variable k+1.
pub fn completion_cnf(p: &Program) -> Result<CnfFormula, OracleError> {
    let scc = graphs::scc_info(p, &graphs::dependency_digraph(p));
    if !scc.is_acyclic() {
        return Err(OracleError::NotTight);
    }
    let mut f = CnfFormula::new();
    for a in p.atom_ids() {
        f.var(p.atom_name(a));
    }
    // Shifted bodies per head atom: (positive atoms, negated atoms).
    let mut bodies: Vec<Vec<(Vec<u32>, Vec<u32>)>> = vec![Vec::new(); p.n_atoms()];
    for r in p.rules() {
        if r.head.is_empty() {
            let mut clause: Vec<i32> = r.pos.iter().map(|&a| -(a as i32 + 1)).collect();
            clause.extend(r.neg.iter().map(|&a| a as i32 + 1));
            f.add_clause(clause);
            continue;
        }
        for &x in &r.head {
            let mut negs: Vec<u32> = r.neg.clone();
            negs.extend(r.head.iter().copied().filter(|&h| h != x));
            negs.sort_unstable();
            negs.dedup();
            // A body naming an atom both ways can never fire; drop it.
            if r.pos.iter().any(|a| negs.binary_search(a).is_ok()) {
                continue;
            }
            bodies[x as usize].push((r.pos.clone(), negs));
        }
    }
    for (x, defs) in bodies.iter().enumerate() {
        let xv = x as i32 + 1;
        if defs.is_empty() {
            f.add_clause(vec![-xv]);
            continue;
        }
        let mut fire_lits = Vec::new();
        for (k, (pos, negs)) in defs.iter().enumerate() {
            let fire = f.var(&format!("__def_{}_{k}", p.atom_name(x as u32)));
            fire_lits.push(fire);
            let mut back = vec![fire];
            for &a in pos {
                f.add_clause(vec![-fire, a as i32 + 1]);
                back.push(-(a as i32 + 1));
            }
            for &b in negs {
                f.add_clause(vec![-fire, -(b as i32 + 1)]);
                back.push(b as i32 + 1);
            }
            f.add_clause(back);
            f.add_clause(vec![-fire, xv]);
        }
        let mut forward = vec![-xv];
        forward.extend(&fire_lits);
        f.add_clause(forward);
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;
    use crate::program::{is_answer_set, Interpretation};

    fn names(p: &Program, sets: &[Interpretation]) -> Vec<String> {
        let mut v: Vec<String> = sets.iter().map(|i| p.format_interpretation(i)).collect();
        v.sort();
        v
    }

    #[test]
    fn running_example_answer_sets() {
        let p = instances::example1();
        let sets = brute_answer_sets(&p).unwrap();
        assert_eq!(names(&p, &sets), vec!["{a,b,c,d,e}", "{f}", "{g}"]);
    }

    #[test]
    fn even_loop_answer_sets() {
        let p = Program::parse("a :- not b. b :- not a.").unwrap();
        let sets = brute_answer_sets(&p).unwrap();
        assert_eq!(names(&p, &sets), vec!["{a}", "{b}"]);
    }

    #[test]
    fn choice_projects_to_both_values() {
        let p = Program::parse("{a}.").unwrap();
        let sets = brute_answer_sets(&p).unwrap();
        let a = p.atom_id("a").unwrap() as usize;
        let mut projected: Vec<bool> = sets.iter().map(|i| i.contains(a)).collect();
        projected.sort();
        assert_eq!(projected, vec![false, true]);
    }

    #[test]
    fn guard_rejects_large_programs() {
        let text: String = (0..25).map(|i| format!("x{i}. ")).collect();
        let p = Program::parse(&text).unwrap();
        assert!(brute_answer_sets(&p).is_err());
    }

    #[test]
    fn brute_agrees_with_level_characterization() {
        for seed in 0..60 {
            let p = instances::random_hcf(seed, 6, 8);
            let scc = crate::graphs::scc_info(&p, &crate::graphs::dependency_digraph(&p));
            let brute = brute_answer_sets(&p).unwrap();
            let n = p.n_atoms();
            for mask in 0u32..1 << n {
                let i: Interpretation =
                    (0..n).filter(|&a| mask & (1 << a) != 0).collect();
                let by_def = brute.contains(&i);
                let by_levels = is_answer_set(&p, &i, &scc).unwrap();
                assert_eq!(by_def, by_levels, "seed {seed}, {}", p.format_interpretation(&i));
            }
        }
    }

    #[test]
    fn brute_models_on_tiny_formulas() {
        let mut f = CnfFormula::new();
        let x = f.var("x");
        let y = f.var("y");
        f.add_clause(vec![x, y]);
        f.add_clause(vec![-x, -y]);
        let models = brute_models(&f).unwrap();
        assert_eq!(models.len(), 2);
        assert!(models.contains(&BitSet::from_iter([0])));
        assert!(models.contains(&BitSet::from_iter([1])));

        let empty = CnfFormula::new();
        assert_eq!(brute_models(&empty).unwrap(), vec![BitSet::new()]);
        assert_eq!(count_models(&empty), BigUint::from(1u32));
    }

    #[test]
    fn counter_handles_conflicts_and_units() {
        let mut f = CnfFormula::new();
        let x = f.var("x");
        f.add_clause(vec![x]);
        f.add_clause(vec![-x]);
        assert_eq!(count_models(&f), BigUint::from(0u32));
        assert!(!is_satisfiable(&f));

        let mut f = CnfFormula::new();
        let x = f.var("x");
        let y = f.var("y");
        let z = f.var("z");
        f.add_clause(vec![x]);
        f.add_clause(vec![-x, y]);
        let _ = z;
        assert_eq!(count_models(&f), BigUint::from(2u32));
        assert!(is_satisfiable(&f));
    }

    #[test]
    fn counter_matches_brute_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for _ in 0..200 {
            let n = rng.gen_range(1..=10);
            let m = rng.gen_range(0..=18);
            let mut f = CnfFormula::new();
            for v in 0..n {
                f.var(&format!("v{v}"));
            }
            for _ in 0..m {
                let len = rng.gen_range(1..=3.min(n));
                let mut vars: Vec<i32> = (1..=n as i32).collect();
                use rand::seq::SliceRandom;
                vars.shuffle(&mut rng);
                let lits: Vec<i32> = vars[..len]
                    .iter()
                    .map(|&v| if rng.gen_bool(0.5) { v } else { -v })
                    .collect();
                f.add_clause(lits);
            }
            let brute = brute_models(&f).unwrap();
            assert_eq!(count_models(&f), BigUint::from(brute.len()));
            assert_eq!(is_satisfiable(&f), !brute.is_empty());
        }
    }

    #[test]
    fn counter_multiplies_components() {
        let mut f = CnfFormula::new();
        let vars: Vec<i32> = (0..6).map(|i| f.var(&format!("v{i}"))).collect();
        f.add_clause(vec![vars[0], vars[1]]);
        f.add_clause(vec![vars[2], vars[3]]);
        f.add_clause(vec![vars[4], vars[5]]);
        assert_eq!(count_models(&f), BigUint::from(27u32));
    }

    #[test]
    fn completion_counts_answer_sets_of_tight_programs() {
        let p = Program::parse("a :- not b.").unwrap();
        let f = completion_cnf(&p).unwrap();
        assert_eq!(count_models(&f), BigUint::from(1u32));

        let p = Program::parse("a | b.").unwrap();
        let f = completion_cnf(&p).unwrap();
        assert_eq!(count_models(&f), BigUint::from(2u32));

        let p = Program::parse("a :- a.").unwrap();
        assert!(completion_cnf(&p).is_err());

        for seed in 0..120 {
            let p = instances::random_tight(seed, 6);
            let f = completion_cnf(&p).unwrap();
            let expected = brute_answer_sets(&p).unwrap().len();
            assert_eq!(count_models(&f), BigUint::from(expected), "seed {seed}");
        }
    }

    #[test]
    fn completion_handles_self_blocking_bodies() {
        // The parser rejects "a :- b, not b." but hand-built programs can
        // carry such a rule; its body can never fire and must not wreck the
        // clause set.
        let mut p = Program::new();
        let a = p.intern("a");
        let b = p.intern("b");
        p.push_rule(crate::program::Rule::new(vec![a], vec![b], vec![b]));
        let f = completion_cnf(&p).unwrap();
        let expected = brute_answer_sets(&p).unwrap().len();
        assert_eq!(expected, 1);
        assert_eq!(count_models(&f), BigUint::from(expected));
    }
}
