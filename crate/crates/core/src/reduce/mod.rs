//! Structure-preserving reductions: head-cycle-free to tight programs, tight
//! programs to CNF, and the explicitly constructed decompositions that certify
//! the width of each output.
//!
//! Auxiliary atoms introduced here all start with a double underscore and
//! encode their role in the name:
//!
//! * `__c_<x>`: the free-choice copy paired with `<x>` in a two-atom head;
//! * `__b_<x>_<j>`: bit j (1 = least significant) of the level guessed for `<x>`;
//! * `__lt_<t>_<x>_<i>`: at decomposition node t, the level of `<x>` is below i;
//! * `__p_<t>_<x>`: some rule inside node t's bag proves `<x>`;
//! * `__pb_<t>_<x>`: `<x>` is proven at or below node t.
//!
//! The CNF stage mints its own variables with prefixes disjoint from the atom
//! prefixes above, so a program that already went through the tight lowering
//! can be compiled without name clashes:
//!
//! * `__q_<t>_<x>`: some bag rule at node t proves `<x>`;
//! * `__qb_<t>_<x>`: `<x>` is proven at or below node t;
//! * `__f_<t>_<r>_<x>`: rule r fires at node t with `<x>` as the proven head.

pub mod cnf;
pub mod tight;
pub mod to_cnf;

pub use cnf::CnfFormula;

use crate::program::SemanticsError;
use crate::td::TdViolation;

/// Why a reduction refused its input.
#[derive(Debug, thiserror::Error)]
pub enum ReduceError {
    #[error(transparent)]
    NotHcf(#[from] SemanticsError),
    #[error("program has a cycle of positive dependencies through '{0}'")]
    NotTight(String),
    #[error("decomposition does not fit the program: {0}")]
    InvalidTd(#[from] TdViolation),
    #[error("atom name '{0}' is reserved for atoms this lowering mints")]
    ReservedAtom(String),
}

/// Bit atom for level bit `j` (1-based, least significant first) of `x`.
pub fn bit_name(x: &str, j: u32) -> String {
    format!("__b_{x}_{j}")
}

/// Node-local comparison atom: at node `t`, level of `x` lies below `i`.
pub fn lt_name(t: usize, x: &str, i: u32) -> String {
    format!("__lt_{t}_{x}_{i}")
}

/// Provability atom: some rule in node `t`'s bag proves `x`.
pub fn proof_here_name(t: usize, x: &str) -> String {
    format!("__p_{t}_{x}")
}

/// Provability atom: `x` is proven at node `t` or below it.
pub fn proof_below_name(t: usize, x: &str) -> String {
    format!("__pb_{t}_{x}")
}

/// CNF variable: some bag rule at node `t` proves `x`.
pub fn clause_proof_here_name(t: usize, x: &str) -> String {
    format!("__q_{t}_{x}")
}

/// CNF variable: `x` is proven at node `t` or below it.
pub fn clause_proof_below_name(t: usize, x: &str) -> String {
    format!("__qb_{t}_{x}")
}

/// CNF firing variable for rule index `r` proving `x` at node `t`.
pub fn fire_name(t: usize, r: usize, x: &str) -> String {
    format!("__f_{t}_{r}_{x}")
}
