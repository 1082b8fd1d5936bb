//! Batch front end for the solver and the two compilers.
//!
//! Every subcommand reads one ground program, builds (or imports) a tree
//! decomposition of its primal graph, and drives the library: `analyze`
//! prints the structural parameters as JSON, `solve`/`count`/`enum` run the
//! dynamic-programming solver, `compile tight` and `compile cnf` print the
//! lowered program or DIMACS formula, and `verify` cross-checks all of those
//! against brute force on instances small enough to brute-force.
//!
//! Exit codes: 0 success (for `solve`: 10 consistent, 20 inconsistent),
//! 1 bad input or a `verify` disagreement, 2 a `verify` size-guard trip.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tdasp::dp::{self, DpOptions};
use tdasp::graphs::{dependency_digraph, primal_graph, scc_info, SccInfo};
use tdasp::oracle;
use tdasp::program::{classify, Interpretation, Program};
use tdasp::reduce::tight::{hcf_to_tight, witness_td_tight};
use tdasp::reduce::to_cnf::tight_to_cnf;
use tdasp::td::{
    bag_program_indices, decompose, make_nice, parse_td, validate_td, write_td, Heuristic, NiceTD,
    TreeDecomposition,
};

#[derive(Parser)]
#[command(name = "tdasp", version, about = "Treewidth-aware answer-set solving")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Import a tree decomposition instead of running the heuristic
    #[arg(long, global = true, value_name = "FILE")]
    td: Option<PathBuf>,

    /// Write the decomposition that was used
    #[arg(long, global = true, value_name = "FILE")]
    emit_td: Option<PathBuf>,

    /// Elimination ordering heuristic
    #[arg(long, global = true, default_value = "min-fill")]
    heuristic: Heuristic,

    /// Seed for heuristic tie-breaking
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Print structural parameters as JSON
    Analyze { file: PathBuf },
    /// Decide consistency: prints CONSISTENT or INCONSISTENT
    Solve { file: PathBuf },
    /// Print the exact answer-set count
    Count { file: PathBuf },
    /// Print answer sets, one per line, as sorted atom names in braces
    Enum {
        file: PathBuf,
        /// Stop after this many answer sets
        #[arg(long, value_name = "N")]
        limit: Option<usize>,
    },
    /// Compile the program to another representation
    #[command(subcommand)]
    Compile(CompileTarget),
    /// Cross-check solver, compilers, and brute force on a small instance
    Verify { file: PathBuf },
}

#[derive(Subcommand)]
enum CompileTarget {
    /// Print an equivalent tight program
    Tight {
        file: PathBuf,
        /// Lower to a consistency-preserving program that may merge answer sets
        #[arg(long)]
        no_preserve: bool,
    },
    /// Print a DIMACS CNF formula (lowering non-tight input first)
    Cnf {
        file: PathBuf,
        /// Keep only the clauses needed for equisatisfiability
        #[arg(long)]
        weak: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

/// Writes to stdout, treating a closed pipe as a normal early exit so
/// `tdasp ... | head` ends quietly.
fn stream(text: &str) -> Result<ExitCode, String> {
    use std::io::Write;
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Ok(()) => Ok(ExitCode::SUCCESS),
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(ExitCode::SUCCESS),
        Err(e) => Err(format!("cannot write output: {e}")),
    }
}

fn run(cli: &Cli) -> Result<ExitCode, String> {
    let file = match &cli.command {
        Command::Analyze { file }
        | Command::Solve { file }
        | Command::Count { file }
        | Command::Enum { file, .. }
        | Command::Compile(CompileTarget::Tight { file, .. })
        | Command::Compile(CompileTarget::Cnf { file, .. })
        | Command::Verify { file } => file,
    };
    let text =
        fs::read_to_string(file).map_err(|e| format!("cannot read {}: {e}", file.display()))?;
    let p = Program::parse(&text).map_err(|e| e.to_string())?;
    let td = load_or_build_td(cli, &p)?;
    if let Some(out) = &cli.emit_td {
        fs::write(out, write_td(&td)).map_err(|e| format!("cannot write {}: {e}", out.display()))?;
    }
    let ntd = make_nice(&td);

    match &cli.command {
        Command::Analyze { .. } => stream(&format!("{}\n", analyze(&p, &td))),
        Command::Solve { .. } => {
            let sol = dp::solve(&p, &ntd, DpOptions::default()).map_err(|e| e.to_string())?;
            if sol.is_consistent() {
                println!("CONSISTENT");
                Ok(ExitCode::from(10))
            } else {
                println!("INCONSISTENT");
                Ok(ExitCode::from(20))
            }
        }
        Command::Count { .. } => {
            let sol = dp::solve(&p, &ntd, DpOptions::default()).map_err(|e| e.to_string())?;
            println!("{}", sol.count());
            Ok(ExitCode::SUCCESS)
        }
        Command::Enum { limit, .. } => {
            let sol = dp::solve(&p, &ntd, DpOptions::default()).map_err(|e| e.to_string())?;
            let mut lines: Vec<String> = sol
                .enumerate(*limit)
                .iter()
                .map(|i| render_set(&p, i))
                .collect();
            lines.sort();
            let mut text = lines.join("\n");
            if !text.is_empty() {
                text.push('\n');
            }
            stream(&text)
        }
        Command::Compile(CompileTarget::Tight { no_preserve, .. }) => {
            let scc = scc_info(&p, &dependency_digraph(&p));
            let out =
                hcf_to_tight(&p, &ntd, &scc, !no_preserve).map_err(|e| e.to_string())?;
            stream(&out.to_string())
        }
        Command::Compile(CompileTarget::Cnf { weak, .. }) => {
            let scc = scc_info(&p, &dependency_digraph(&p));
            let f = compile_cnf(&p, &ntd, &scc, *weak)?;
            stream(&f.to_dimacs())
        }
        Command::Verify { .. } => verify(&p, &ntd),
    }
}

fn load_or_build_td(cli: &Cli, p: &Program) -> Result<TreeDecomposition, String> {
    let g = primal_graph(p);
    let td = match &cli.td {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            parse_td(&text).map_err(|e| e.to_string())?
        }
        None => decompose(&g, cli.heuristic, cli.seed),
    };
    validate_td(&g, &td).map_err(|e| format!("tree decomposition rejected: {e}"))?;
    Ok(td)
}

fn analyze(p: &Program, td: &TreeDecomposition) -> String {
    let scc = scc_info(p, &dependency_digraph(p));
    let class = classify(p, &scc);
    let mut table = serde_json::Map::new();
    for a in p.atom_ids() {
        table.insert(p.atom_name(a).to_string(), scc.ell_scc(a).into());
    }
    let width = td.width();
    let ell = scc.ell();
    let max_bag_rules = td
        .bags
        .iter()
        .map(|bag| bag_program_indices(p, bag).len())
        .max()
        .unwrap_or(0);
    let doc = serde_json::json!({
        "atoms": p.n_atoms(),
        "rules": p.rules().len(),
        "is_tight": class.is_tight,
        "is_normal": class.is_normal,
        "is_hcf": class.is_hcf,
        "ell_scc": table,
        "ell": ell,
        "td_width": width,
        "lambda": width.min(ell as isize),
        "max_bag_rules": max_bag_rules,
    });
    serde_json::to_string_pretty(&doc).expect("json serializes")
}

/// Compiles straight to CNF when the input is already tight; otherwise lowers
/// it first and carries the lowering's witness decomposition into the second
/// stage, so the formula's width stays tied to the input's.
fn compile_cnf(
    p: &Program,
    ntd: &NiceTD,
    scc: &SccInfo,
    weak: bool,
) -> Result<tdasp::reduce::CnfFormula, String> {
    if scc.is_acyclic() {
        return tight_to_cnf(p, ntd, weak).map_err(|e| e.to_string());
    }
    let lowered = hcf_to_tight(p, ntd, scc, true).map_err(|e| e.to_string())?;
    let witness = witness_td_tight(p, ntd, scc).map_err(|e| e.to_string())?;
    tight_to_cnf(&lowered, &make_nice(&witness), weak).map_err(|e| e.to_string())
}

fn render_set(p: &Program, i: &Interpretation) -> String {
    let mut names: Vec<&str> = i.iter().map(|a| p.atom_name(a as u32)).collect();
    names.sort_unstable();
    format!("{{{}}}", names.join(","))
}

/// Runs every engine on one small instance and compares: DP against brute
/// force, the lowering's answer sets projected back, and the model counts of
/// both CNF translations. Prints one line per check.
fn verify(p: &Program, ntd: &NiceTD) -> Result<ExitCode, String> {
    const GUARD: usize = 24;
    if p.n_atoms() > GUARD {
        eprintln!(
            "error: {} atoms exceed the verify guard of {GUARD}",
            p.n_atoms()
        );
        return Ok(ExitCode::from(2));
    }
    let mut brute = oracle::brute_answer_sets(p).map_err(|e| e.to_string())?;
    brute.sort();
    let mut ok = true;
    let mut check = |name: &str, pass: bool, detail: String| {
        let sep = if detail.is_empty() { "" } else { " " };
        println!("{}: {name}{sep}{detail}", if pass { "ok" } else { "MISMATCH" });
        ok &= pass;
    };

    let sol = dp::solve(p, ntd, DpOptions::default()).map_err(|e| e.to_string())?;
    let mut dp_sets = sol.enumerate(None);
    dp_sets.sort();
    check(
        "dp answer sets == brute force",
        dp_sets == brute,
        format!("({} sets)", brute.len()),
    );
    check(
        "dp count == enumeration",
        sol.count() == brute.len().into(),
        format!("(count {})", sol.count()),
    );

    let scc = scc_info(p, &dependency_digraph(p));
    let lowered = hcf_to_tight(p, ntd, &scc, true).map_err(|e| e.to_string())?;
    let lscc = scc_info(&lowered, &dependency_digraph(&lowered));
    check(
        "lowering is tight",
        classify(&lowered, &lscc).is_tight,
        String::new(),
    );
    let witness = witness_td_tight(p, ntd, &scc).map_err(|e| e.to_string())?;
    check(
        "witness decomposition covers the lowering",
        validate_td(&primal_graph(&lowered), &witness).is_ok(),
        String::new(),
    );
    // A fresh compact decomposition keeps the cross-check formulas small; the
    // witness decomposition's job (width) was just checked structurally.
    let lntd = make_nice(&decompose(&primal_graph(&lowered), Heuristic::MinFill, 0));
    let lsol = dp::solve(&lowered, &lntd, DpOptions::default()).map_err(|e| e.to_string())?;
    let mut projected: Vec<Interpretation> = lsol
        .enumerate(None)
        .iter()
        .map(|i| i.iter().take_while(|&a| a < p.n_atoms()).collect())
        .collect();
    projected.sort();
    check(
        "lowered answer sets project onto the input's",
        projected == brute && lsol.count() == brute.len().into(),
        format!("(count {})", lsol.count()),
    );

    let strong = tight_to_cnf(&lowered, &lntd, false).map_err(|e| e.to_string())?;
    check(
        "strong cnf model count == answer-set count",
        oracle::count_models(&strong) == brute.len().into(),
        format!("({} models)", oracle::count_models(&strong)),
    );
    let weak = tight_to_cnf(&lowered, &lntd, true).map_err(|e| e.to_string())?;
    check(
        "weak cnf satisfiability == consistency",
        oracle::is_satisfiable(&weak) == !brute.is_empty(),
        String::new(),
    );
    if scc.is_acyclic() {
        let direct = tight_to_cnf(p, ntd, false).map_err(|e| e.to_string())?;
        check(
            "direct cnf model count == answer-set count",
            oracle::count_models(&direct) == brute.len().into(),
            format!("({} models)", oracle::count_models(&direct)),
        );
    }

    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
