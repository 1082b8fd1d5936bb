//! CNF formulas with named variables and DIMACS output.

use std::collections::HashMap;

/// A CNF formula over 1-based variables. Literals are nonzero i32s in DIMACS
/// convention: v for a positive occurrence of variable v, -v for a negated one.
#[derive(Clone, Debug, Default)]
pub struct CnfFormula {
    var_names: Vec<String>,
    var_index: HashMap<String, i32>,
    clauses: Vec<Vec<i32>>,
}

impl CnfFormula {
    pub fn new() -> Self {
        CnfFormula::default()
    }

    pub fn n_vars(&self) -> usize {
        self.var_names.len()
    }

    pub fn n_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Vec<i32>] {
        &self.clauses
    }

    /// The variable named `name`, created on first use. Returns its positive
    /// literal.
    pub fn var(&mut self, name: &str) -> i32 {
        if let Some(&v) = self.var_index.get(name) {
            return v;
        }
        let v = self.var_names.len() as i32 + 1;
        self.var_names.push(name.to_string());
        self.var_index.insert(name.to_string(), v);
        v
    }

    pub fn lookup(&self, name: &str) -> Option<i32> {
        self.var_index.get(name).copied()
    }

    pub fn var_name(&self, v: i32) -> &str {
        assert!(v > 0, "variable indices are positive");
        &self.var_names[v as usize - 1]
    }

    /// Adds a clause; literals are deduplicated and sorted by variable.
    /// Panics on a tautological or empty-literal clause, which no translation
    /// here should produce.
    pub fn add_clause(&mut self, mut lits: Vec<i32>) {
        lits.sort_unstable_by_key(|l| (l.abs(), *l < 0));
        lits.dedup();
        for w in lits.windows(2) {
            assert!(
                w[0] != -w[1],
                "tautological clause on variable {}",
                w[0].abs()
            );
        }
        for &l in &lits {
            assert!(
                l != 0 && l.unsigned_abs() as usize <= self.n_vars(),
                "literal {l} out of range"
            );
        }
        self.clauses.push(lits);
    }

    /// DIMACS text with `c var <idx> = <name>` comments mapping indices back
    /// to names.
    pub fn to_dimacs(&self) -> String {
        let mut out = String::new();
        for (i, name) in self.var_names.iter().enumerate() {
            out.push_str(&format!("c var {} = {}\n", i + 1, name));
        }
        out.push_str(&format!("p cnf {} {}\n", self.n_vars(), self.n_clauses()));
        for clause in &self.clauses {
            for &l in clause {
                out.push_str(&format!("{l} "));
            }
            out.push_str("0\n");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interns_variables_once() {
        let mut f = CnfFormula::new();
        let x = f.var("x");
        let y = f.var("y");
        assert_eq!((x, y), (1, 2));
        assert_eq!(f.var("x"), 1);
        assert_eq!(f.n_vars(), 2);
        assert_eq!(f.var_name(2), "y");
    }

    #[test]
    fn dimacs_output_shape() {
        let mut f = CnfFormula::new();
        let x = f.var("x");
        let y = f.var("y");
        f.add_clause(vec![x, y]);
        f.add_clause(vec![-x, -y]);
        let text = f.to_dimacs();
        assert_eq!(
            text,
            "c var 1 = x\nc var 2 = y\np cnf 2 2\n1 2 0\n-1 -2 0\n"
        );
    }

    #[test]
    fn clauses_are_normalized() {
        let mut f = CnfFormula::new();
        let x = f.var("x");
        let y = f.var("y");
        f.add_clause(vec![y, x, y]);
        assert_eq!(f.clauses()[0], vec![x, y]);
    }

    #[test]
    #[should_panic(expected = "tautological")]
    fn rejects_tautologies() {
        let mut f = CnfFormula::new();
        let x = f.var("x");
        f.add_clause(vec![x, -x]);
    }
}
