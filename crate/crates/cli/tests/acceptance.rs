//! The acceptance gate: one test per shipping criterion, each printing a
//! summary line. Criteria 1 and 2 drive the installed binary; the rest
//! exercise the library against brute force on seeded corpora.

use std::process::Command;
use std::time::Instant;

use tdasp::bitset::BitSet;
use tdasp::graphs::{dependency_digraph, primal_graph, scc_info, SccInfo};
use tdasp::instances::{disjoint_cycles, random_graph, random_hcf, random_tight, EXAMPLE1};
use tdasp::oracle::{
    brute_answer_sets, brute_models, completion_cnf, count_models, is_satisfiable,
};
use tdasp::program::{classify, is_answer_set, AtomId, Interpretation, Program, Rule};
use tdasp::reduce::tight::{
    encode_bits, hcf_to_tight, lifted_answer_set, lt_bodies, n_bits, witness_td_tight_detailed,
};
use tdasp::reduce::to_cnf::{cnf_primal_graph, tight_to_cnf, witness_td_cnf_detailed};
use tdasp::td::{
    bag_program_indices, decompose, make_nice, validate_nice, validate_td, Heuristic, NiceTD,
};

const HCF_SEEDS: u64 = 500;
const TIGHT_SEEDS: u64 = 500;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tdasp"))
}

fn example_file(dir: &tempfile::TempDir) -> std::path::PathBuf {
    let path = dir.path().join("example1.lp");
    std::fs::write(&path, EXAMPLE1).unwrap();
    path
}

fn analyze(p: &Program) -> SccInfo {
    scc_info(p, &dependency_digraph(p))
}

fn nice_td(p: &Program) -> NiceTD {
    make_nice(&decompose(&primal_graph(p), Heuristic::MinFill, 0))
}

fn restrict(i: &Interpretation, n: usize) -> Interpretation {
    i.iter().take_while(|&a| a < n).collect()
}

#[test]
fn criterion_1_running_example_counts_and_enumerates() {
    let dir = tempfile::tempdir().unwrap();
    let file = example_file(&dir);
    let t0 = Instant::now();
    let count = bin().arg("count").arg(&file).output().unwrap();
    let enumerated = bin().arg("enum").arg(&file).output().unwrap();
    let elapsed = t0.elapsed();
    assert!(count.status.success());
    assert_eq!(String::from_utf8_lossy(&count.stdout).trim(), "3");
    let lines: Vec<String> = String::from_utf8_lossy(&enumerated.stdout)
        .lines()
        .map(str::to_string)
        .collect();
    assert_eq!(lines, ["{a,b,c,d,e}", "{f}", "{g}"]);
    assert!(
        elapsed.as_secs_f64() < 1.0,
        "took {elapsed:?}, budget is 1 s"
    );
    println!("criterion 1: count 3 and the three expected sets in {elapsed:?}");
}

#[test]
fn criterion_2_analyze_reports_the_structural_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let file = example_file(&dir);
    let out = bin().arg("analyze").arg(&file).output().unwrap();
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["ell"], 5);
    assert_eq!(doc["is_hcf"], true);
    assert_eq!(doc["td_width"], 2);
    for (atom, ell_scc) in [("a", 4), ("b", 4), ("c", 4), ("d", 4), ("e", 1)] {
        assert_eq!(doc["ell_scc"][atom], ell_scc, "ell_scc({atom})");
    }
    println!("criterion 2: ell 5, ell_scc table, and width 2 as reported");
}

#[test]
fn criterion_3_dp_matches_brute_force_on_the_hcf_corpus() {
    let t0 = Instant::now();
    for seed in 0..HCF_SEEDS {
        let p = random_hcf(seed, 7, 10);
        let mut expected = brute_answer_sets(&p).unwrap();
        expected.sort();
        let ntd = nice_td(&p);
        let sol = tdasp::dp::solve(&p, &ntd, tdasp::dp::DpOptions::default()).unwrap();
        let mut got = sol.enumerate(None);
        got.sort();
        assert_eq!(got, expected, "seed {seed}:\n{p}");
        assert_eq!(sol.count(), expected.len().into(), "seed {seed}");
    }
    let elapsed = t0.elapsed();
    assert!(
        elapsed.as_secs_f64() < 60.0,
        "took {elapsed:?}, budget is 60 s"
    );
    println!("criterion 3: {HCF_SEEDS} HCF programs match brute force in {elapsed:?}");
}

#[test]
fn criterion_4_lowering_is_tight_and_projects_bijectively() {
    for seed in 0..HCF_SEEDS {
        let p = random_hcf(seed, 7, 10);
        let scc = analyze(&p);
        let ntd = nice_td(&p);
        let lowered = hcf_to_tight(&p, &ntd, &scc, true).unwrap();
        let lscc = analyze(&lowered);
        assert!(classify(&lowered, &lscc).is_tight, "seed {seed}");

        // Injectivity: every input answer set lifts to an answer set of the
        // lowering that restricts back to it. Surjectivity: the lowering has
        // no further answer sets, counted through its completion.
        let brute = brute_answer_sets(&p).unwrap();
        for i in &brute {
            let lift = lifted_answer_set(&p, &ntd, &scc, &lowered, i)
                .expect("answer set lifts");
            assert!(is_answer_set(&lowered, &lift, &lscc).unwrap(), "seed {seed}");
            assert_eq!(&restrict(&lift, p.n_atoms()), i, "seed {seed}");
        }
        assert_eq!(
            count_models(&completion_cnf(&lowered).unwrap()),
            brute.len().into(),
            "seed {seed}:\n{p}"
        );
    }
    println!("criterion 4: {HCF_SEEDS} lowerings tight with bijective projections");
}

#[test]
fn criterion_5_cnf_models_match_answer_sets_on_the_tight_corpus() {
    for seed in 0..TIGHT_SEEDS {
        let p = random_tight(seed, 8);
        let expected = brute_answer_sets(&p).unwrap().len();
        let ntd = nice_td(&p);
        let strong = tight_to_cnf(&p, &ntd, false).unwrap();
        if strong.n_vars() <= 24 {
            assert_eq!(brute_models(&strong).unwrap().len(), expected, "seed {seed}");
        }
        assert_eq!(count_models(&strong), expected.into(), "seed {seed}:\n{p}");
        let weak = tight_to_cnf(&p, &ntd, true).unwrap();
        assert_eq!(is_satisfiable(&weak), expected > 0, "seed {seed} weak");
    }
    println!("criterion 5: {TIGHT_SEEDS} tight programs count identically through CNF");
}

#[test]
fn criterion_6_witness_decompositions_are_valid_and_within_bounds() {
    for seed in 0..HCF_SEEDS {
        let p = random_hcf(seed, 7, 10);
        let scc = analyze(&p);
        let ntd = nice_td(&p);
        let lowered = hcf_to_tight(&p, &ntd, &scc, true).unwrap();
        let (w, origin) = witness_td_tight_detailed(&p, &ntd, &scc).unwrap();
        validate_td(&primal_graph(&lowered), &w).unwrap();
        let per_atom = 4 + n_bits(scc.ell() - 1);
        for (i, bag) in w.bags.iter().enumerate() {
            let bound = ntd.bag(origin[i]).len() * per_atom as usize;
            assert!(bag.len() <= bound, "seed {seed}: bag {i} exceeds {bound}");
        }
    }
    for seed in 0..TIGHT_SEEDS {
        let p = random_tight(seed, 8);
        let ntd = nice_td(&p);
        let f = tight_to_cnf(&p, &ntd, false).unwrap();
        let (w, origin) = witness_td_cnf_detailed(&ntd, &p).unwrap();
        validate_td(&cnf_primal_graph(&f), &w).unwrap();
        for (i, bag) in w.bags.iter().enumerate() {
            let chi = ntd.bag(origin[i]);
            let occ: usize = bag_program_indices(&p, chi)
                .iter()
                .map(|&ri| p.rules()[ri].head.len())
                .sum();
            let bound = 4 * chi.len() + occ;
            assert!(bag.len() <= bound, "seed {seed}: bag {i} exceeds {bound}");
        }
    }
    println!(
        "criterion 6: witness bags within (4+log)*bag and 4*bag+occ on {HCF_SEEDS}+{TIGHT_SEEDS} instances"
    );
}

#[test]
fn criterion_7_level_comparators_decide_less_than_exhaustively() {
    for n in 2u32..=32 {
        let mut p = Program::new();
        let ids: Vec<AtomId> = (0..n).map(|k| p.intern(&format!("x{k}"))).collect();
        for k in 0..n as usize {
            p.push_rule(Rule::new(
                vec![ids[k]],
                vec![ids[(k + 1) % n as usize]],
                vec![],
            ));
        }
        let scc = analyze(&p);
        assert_eq!(scc.ell_scc(ids[0]), n);
        let nb = n_bits(n);
        for v in 0..n {
            let true_bits: BitSet = encode_bits(ids[0], v, &scc)
                .bits
                .iter()
                .filter(|&&(_, set)| set)
                .map(|&(j, _)| j as usize)
                .collect();
            for i in 1..n {
                let derived = lt_bodies(i, nb)
                    .iter()
                    .any(|body| body.iter().all(|&j| !true_bits.contains(j as usize)));
                assert_eq!(derived, v < i, "component size {n}: v={v}, i={i}");
            }
        }
    }
    println!("criterion 7: comparator bodies decide v<i for all component sizes 2..=32");
}

#[test]
fn criterion_8_disjoint_cycles_solve_fast_through_both_engines() {
    let p = disjoint_cycles(50, 4);
    assert_eq!(p.n_atoms(), 200);
    let t0 = Instant::now();
    let scc = analyze(&p);
    let ntd = nice_td(&p);
    let sol = tdasp::dp::solve(&p, &ntd, tdasp::dp::DpOptions::default()).unwrap();
    let dp_count = sol.count();

    let lowered = hcf_to_tight(&p, &ntd, &scc, true).unwrap();
    let (w, _) = witness_td_tight_detailed(&p, &ntd, &scc).unwrap();
    let f = tight_to_cnf(&lowered, &make_nice(&w), false).unwrap();
    let cnf_count = count_models(&f);
    let elapsed = t0.elapsed();

    assert_eq!(dp_count, cnf_count);
    assert_eq!(dp_count, 1u32.into());
    assert!(
        elapsed.as_secs_f64() < 10.0,
        "took {elapsed:?}, budget is 10 s"
    );
    println!("criterion 8: 200-atom cycle chain agrees across engines in {elapsed:?}");
}

#[test]
fn criterion_9_nice_normalization_preserves_width_and_validity() {
    for seed in 0..200 {
        let g = random_graph(seed);
        let heuristic = if seed % 2 == 0 {
            Heuristic::MinFill
        } else {
            Heuristic::MinDegree
        };
        let td = decompose(&g, heuristic, seed);
        validate_td(&g, &td).unwrap();
        let nice = make_nice(&td);
        validate_td(&g, &nice.td).unwrap();
        validate_nice(&nice).unwrap();
        assert_eq!(nice.td.width(), td.width(), "seed {seed}");
    }
    println!("criterion 9: 200 nice normalizations preserve width and validity");
}
