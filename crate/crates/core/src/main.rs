use clap::{Args, Parser, Subcommand};
use quartet_trees::bipartite::Picker;
use quartet_trees::formats::{
    build_system, parse_partition, parse_quartets, parse_square_matrix, render_partition,
    render_quartets, ParsedSystem, Report, ReportWitness,
};
use quartet_trees::gen::{
    complete_from_tree, flip_cross_quartets, flip_full_quartets, full_multipartite_from_tree,
    random_partition, random_tree_splits,
};
use quartet_trees::ingest::{
    four_point_violation, quartets_from_all_distances, DistanceTable, Tolerance,
};
use quartet_trees::oracle::{oracle_complete, oracle_full_multipartite, OracleError};
use quartet_trees::solver::{solve_complete, solve_full, Solution, SolveFailure, Witness};
use quartet_trees::taxa::{TaxonPartition, TaxonSet};
use quartet_trees::tree::PhyloTree;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_COMPATIBLE: u8 = 0;
const EXIT_INCOMPATIBLE: u8 = 1;
const EXIT_MALFORMED: u8 = 2;
const EXIT_CAP: u8 = 3;

/// Decide quartet compatibility and reconstruct phylogenetic trees.
#[derive(Parser)]
#[command(name = "quartet-trees", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a quartet system (class auto-detected from the input files).
    Solve(SolveArgs),
    /// Build a system from distance tables, then solve it.
    FromDist(FromDistArgs),
    /// Check that a Newick tree displays a quartet system.
    Check(CheckArgs),
    /// Generate a random instance with a known ground-truth tree.
    Gen(GenArgs),
    /// Decide compatibility by brute force over all tree topologies.
    Oracle(SolveInputs),
}

#[derive(Args)]
struct SolveInputs {
    /// Partition file (`Block1: name …` lines).
    #[arg(long)]
    partition: PathBuf,
    /// Quartet file (`a b || c d` / `a b | c d` lines).
    #[arg(long)]
    quartets: PathBuf,
    /// Treat a purely-cross input as a full A-partite system.
    #[arg(long)]
    full: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    inputs: SolveInputs,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct RunArgs {
    /// Write a JSON report here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Seed for the algorithms' arbitrary choices (default: deterministic
    /// smallest-taxon choices). `QMS_SEED` overrides.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct FromDistArgs {
    /// Partition file; omit to treat the matrix as one full system.
    #[arg(long)]
    partition: Option<PathBuf>,
    /// PHYLIP-style square distance matrix over all taxa.
    #[arg(long)]
    matrix: PathBuf,
    /// Relative equality tolerance for distance-sum comparisons.
    #[arg(long, default_value_t = 1e-9)]
    epsilon: f64,
    /// Report whether the matrix satisfies the four-point condition.
    #[arg(long)]
    four_point: bool,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    inputs: SolveInputs,
    /// Newick file with the candidate tree.
    #[arg(long)]
    tree: PathBuf,
}

#[derive(Args)]
struct GenArgs {
    /// Number of taxa.
    #[arg(long)]
    n: u32,
    /// Number of blocks.
    #[arg(long)]
    r: usize,
    /// Instance class: `complete` or `full`.
    #[arg(long, default_value = "complete")]
    mode: String,
    /// Number of quartet choices to flip after reading them off the tree.
    #[arg(long, default_value_t = 0)]
    noise: usize,
    /// Generator seed. `QMS_SEED` overrides.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for partition.txt, quartets.txt, tree.nwk.
    #[arg(long)]
    out_dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::FromDist(args) => cmd_from_dist(args),
        Command::Check(args) => cmd_check(args),
        Command::Gen(args) => cmd_gen(args),
        Command::Oracle(inputs) => cmd_oracle(inputs),
    };
    match code {
        Ok(c) => ExitCode::from(c),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_MALFORMED)
        }
    }
}

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn env_seed() -> Option<u64> {
    std::env::var("QMS_SEED").ok().and_then(|s| s.parse().ok())
}

fn picker_for(run: &RunArgs) -> (Picker, Option<u64>) {
    match env_seed().or(run.seed) {
        Some(s) => (Picker::seeded(s), Some(s)),
        None => (Picker::min(), None),
    }
}

fn load_system(inputs: &SolveInputs) -> Result<(TaxonPartition, ParsedSystem), String> {
    let p = parse_partition(&read(&inputs.partition)?).map_err(|e| e.to_string())?;
    let qs = parse_quartets(&read(&inputs.quartets)?, &p).map_err(|e| e.to_string())?;
    let sys = build_system(&p, &qs, inputs.full).map_err(|e| e.to_string())?;
    Ok((p, sys))
}

fn names_of(set: &TaxonSet, p: &TaxonPartition) -> Vec<String> {
    set.iter().map(|t| p.name(t).to_string()).collect()
}

fn witness_report(w: &Witness, p: &TaxonPartition) -> ReportWitness {
    match w {
        Witness::NonLaminar { x, y, z, w, blocks } => ReportWitness::NonLaminarTriple {
            members: [x, y, z, w]
                .iter()
                .map(|c| names_of(c.representative(), p))
                .collect(),
            blocks: *blocks,
        },
        Witness::DisplayMismatch { taxa: (a, b, c, d) } => ReportWitness::DisplayMismatch {
            taxa: [a, b, c, d].map(|t| p.name(*t).to_string()).to_vec(),
        },
    }
}

fn report_outcome(
    p: &TaxonPartition,
    outcome: &Result<Solution, SolveFailure>,
    seed: Option<u64>,
) -> Report {
    match outcome {
        Ok(sol) => Report {
            verdict: "compatible".into(),
            phase: "verified".into(),
            displaying_family: sol
                .classes
                .iter()
                .map(|c| names_of(c.representative(), p))
                .collect(),
            laminar_family: sol.laminar.iter().map(|s| names_of(s, p)).collect(),
            newick: Some(sol.tree.to_newick(p.names())),
            witness: None,
            seed,
        },
        Err(fail) => Report {
            verdict: "incompatible".into(),
            phase: fail.phase.to_string(),
            displaying_family: vec![],
            laminar_family: vec![],
            newick: None,
            witness: fail.witness.as_ref().map(|w| witness_report(w, p)),
            seed,
        },
    }
}

fn emit(
    p: &TaxonPartition,
    outcome: Result<Solution, SolveFailure>,
    run: &RunArgs,
    seed: Option<u64>,
) -> Result<u8, String> {
    let report = report_outcome(p, &outcome, seed);
    if let Some(path) = &run.report {
        let json = serde_json::to_string_pretty(&report).expect("report serializes");
        std::fs::write(path, json).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    match outcome {
        Ok(sol) => {
            println!("compatible");
            println!("{}", sol.tree.to_newick(p.names()));
            Ok(EXIT_COMPATIBLE)
        }
        Err(fail) => {
            println!("incompatible ({} phase)", fail.phase);
            Ok(EXIT_INCOMPATIBLE)
        }
    }
}

fn cmd_solve(args: SolveArgs) -> Result<u8, String> {
    let (p, sys) = load_system(&args.inputs)?;
    let (mut picker, seed) = picker_for(&args.run);
    let outcome = match &sys {
        ParsedSystem::Complete(s) => solve_complete(s, &mut picker),
        ParsedSystem::Full(s) => solve_full(s, &mut picker),
    };
    emit(&p, outcome, &args.run, seed)
}

fn cmd_from_dist(args: FromDistArgs) -> Result<u8, String> {
    let tol = Tolerance::new(args.epsilon);
    let (names, values) = parse_square_matrix(&read(&args.matrix)?).map_err(|e| e.to_string())?;
    let p = match &args.partition {
        Some(path) => {
            let p = parse_partition(&read(path)?).map_err(|e| e.to_string())?;
            if p.names() != names.as_slice() {
                // allow any order: remap rows to partition ids
                for name in p.names() {
                    if !names.contains(name) {
                        return Err(format!("taxon `{name}` missing from the matrix"));
                    }
                }
            }
            p
        }
        None => TaxonPartition::new(names.clone(), vec![(0..names.len() as u32).collect()])
            .map_err(|e| e.to_string())?,
    };
    let id_of: HashMap<&str, u32> = p
        .names()
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i as u32))
        .collect();
    let row_id: Vec<u32> = names.iter().map(|n| id_of[n.as_str()]).collect();
    let taxa: Vec<u32> = row_id.clone();
    let mut by_id = vec![vec![0.0; p.n_ids() as usize]; p.n_ids() as usize];
    for (i, row) in values.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            by_id[row_id[i] as usize][row_id[j] as usize] = *v;
        }
    }
    let full_table = {
        let mut ordered: Vec<u32> = taxa.clone();
        ordered.sort_unstable();
        let vals = ordered
            .iter()
            .map(|&a| ordered.iter().map(|&b| by_id[a as usize][b as usize]).collect())
            .collect();
        DistanceTable::square(ordered, vals, &tol).map_err(|e| e.to_string())?
    };
    if args.four_point {
        match four_point_violation(&full_table, &tol) {
            None => println!("four-point condition holds"),
            Some([a, b, c, d]) => println!(
                "four-point condition violated on {} {} {} {}",
                p.name(a),
                p.name(b),
                p.name(c),
                p.name(d)
            ),
        }
    }
    let mut cross_tables = HashMap::new();
    for i in 0..p.num_blocks() {
        for j in (i + 1)..p.num_blocks() {
            let rows = p.block(i).to_vec();
            let cols = p.block(j).to_vec();
            let vals = rows
                .iter()
                .map(|&a| cols.iter().map(|&b| by_id[a as usize][b as usize]).collect())
                .collect();
            cross_tables.insert(
                (i, j),
                DistanceTable::cross(rows, cols, vals).map_err(|e| e.to_string())?,
            );
        }
    }
    let mut within_tables = HashMap::new();
    for i in 0..p.num_blocks() {
        let ts = p.block(i).to_vec();
        let vals = ts
            .iter()
            .map(|&a| ts.iter().map(|&b| by_id[a as usize][b as usize]).collect())
            .collect();
        within_tables.insert(
            i,
            DistanceTable::square(ts, vals, &tol).map_err(|e| e.to_string())?,
        );
    }
    let sys = quartets_from_all_distances(&cross_tables, &within_tables, &p, &tol)
        .map_err(|e| e.to_string())?;
    let (mut picker, seed) = picker_for(&args.run);
    let outcome = solve_full(&sys, &mut picker);
    emit(&p, outcome, &args.run, seed)
}

fn cmd_check(args: CheckArgs) -> Result<u8, String> {
    let (p, sys) = load_system(&args.inputs)?;
    let tree = PhyloTree::from_newick(&read(&args.tree)?, p.names()).map_err(|e| e.to_string())?;
    let ok = match &sys {
        ParsedSystem::Complete(s) => s.displayed_by_family(tree.splits()),
        ParsedSystem::Full(s) => {
            s.cross().displayed_by_family(tree.splits())
                && s.within().iter().all(|w| w.displayed_by_family(tree.splits()))
        }
    };
    if ok {
        println!("tree displays the system");
        Ok(EXIT_COMPATIBLE)
    } else {
        println!("tree does not display the system");
        Ok(EXIT_INCOMPATIBLE)
    }
}

fn cmd_gen(args: GenArgs) -> Result<u8, String> {
    if args.n < 4 || args.r < 1 || (args.n as usize) < 2 * args.r {
        return Err("need n >= 4, r >= 1 and n >= 2r (blocks of size >= 2)".into());
    }
    let seed = env_seed().unwrap_or(args.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let splits = random_tree_splits(args.n, &mut rng);
    let partition = random_partition(args.n, args.r, &mut rng);
    let tree = PhyloTree::from_laminar(args.n, &splits).expect("generated splits are laminar");
    let strict = match args.mode.as_str() {
        "complete" => {
            let sys = complete_from_tree(&splits, &partition);
            let sys = flip_cross_quartets(&sys, args.noise, &mut rng);
            sys.strict_quartets().iter().copied().collect::<Vec<_>>()
        }
        "full" => {
            let sys = full_multipartite_from_tree(&splits, &partition);
            let mut strict: Vec<_> = flip_cross_quartets(sys.cross(), args.noise, &mut rng)
                .strict_quartets()
                .iter()
                .copied()
                .collect();
            for w in sys.within() {
                strict.extend(flip_full_quartets(w, args.noise, &mut rng).strict_quartets());
            }
            strict
        }
        other => return Err(format!("unknown mode `{other}` (use complete or full)")),
    };
    std::fs::create_dir_all(&args.out_dir).map_err(|e| e.to_string())?;
    let write = |file: &str, content: String| -> Result<(), String> {
        let path = args.out_dir.join(file);
        std::fs::write(&path, content).map_err(|e| format!("{}: {e}", path.display()))
    };
    write("partition.txt", render_partition(&partition))?;
    write("quartets.txt", render_quartets(&strict, &partition))?;
    write("tree.nwk", tree.to_newick(partition.names()) + "\n")?;
    println!("seed {seed}");
    Ok(EXIT_COMPATIBLE)
}

fn cmd_oracle(inputs: SolveInputs) -> Result<u8, String> {
    let (p, sys) = load_system(&inputs)?;
    let found = match &sys {
        ParsedSystem::Complete(s) => oracle_complete(s),
        ParsedSystem::Full(s) => oracle_full_multipartite(s),
    };
    match found {
        Ok(Some(fam)) => {
            let tree = PhyloTree::from_laminar(p.n_ids(), &fam).expect("oracle families are trees");
            println!("compatible");
            println!("{}", tree.to_newick(p.names()));
            Ok(EXIT_COMPATIBLE)
        }
        Ok(None) => {
            println!("incompatible");
            Ok(EXIT_INCOMPATIBLE)
        }
        Err(OracleError::CapExceeded(got, cap)) => {
            eprintln!("error: instance too large for the oracle ({got} > {cap})");
            Ok(EXIT_CAP)
        }
    }
}
