//! Batch front end: loads separated graphs, builds their interval branching
//! systems, applies and decides elements, and reproduces the shipped
//! five-vertex fan example against its golden interval dump.
//!
//! Exit codes: 0 on success or all checks passing, 1 when any check fails,
//! 2 on input errors. Data goes to stdout, diagnostics to stderr.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use leavitt_core::algebra::{parse_element, SelectedEdges};
use leavitt_core::branching::{
    construct, pick_combinations, r1_region, render_intervals, verify_axioms,
};
use leavitt_core::freeproduct::{check_iso_on_relations, decompose};
use leavitt_core::graph::{GroupId, LoadError, SeparatedGraph};
use leavitt_core::interval::IntervalUnion;
use leavitt_core::rational::{parse_rational, rat};
use leavitt_core::representation::{
    apply, faithfulness_trial, is_zero, nonvanishing_checks, relation_check, DeltaVector,
    ZeroDecision,
};

const FAN_GRAPH_JSON: &str = include_str!("../../../golden/example1.json");
const FAN_GRAPH_INTERVALS: &str = include_str!("../../../golden/example1.intervals.txt");

#[derive(Parser)]
#[command(name = "leavitt", about = "Exact branching-system models of Cohn-Leavitt path algebras", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a graph file against the separated-graph invariants.
    Validate { path: PathBuf },
    /// Build the branching system and verify its axioms.
    Build {
        #[arg(long)]
        graph: PathBuf,
    },
    /// Print the interval dump of the constructed branching system.
    ShowIntervals {
        #[arg(long)]
        graph: PathBuf,
    },
    /// Apply an element to the delta function at a rational point.
    Apply {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        elem: String,
        #[arg(long)]
        point: String,
    },
    /// Decide exactly whether an element acts as the zero operator.
    IsZero {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        elem: String,
    },
    /// Check every defining relation as an exact operator identity.
    Relations {
        #[arg(long)]
        graph: PathBuf,
    },
    /// Run the randomized faithfulness harness (requires a common-source,
    /// injective-range, loop-free graph).
    FaithfulnessTest {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 3)]
        bound: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Selected edges per group in S, as vertex:index=edge pairs
        /// separated by commas, e.g. v0:1=e4.
        #[arg(long)]
        selected: Option<String>,
    },
    /// Split the graph into one factor per group and check the amalgamated
    /// free product relations both ways.
    Decompose {
        #[arg(long)]
        graph: PathBuf,
        /// Directory for the factor graph files and the identification
        /// manifest.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Rebuild the shipped five-vertex fan example and diff its interval
    /// dump against the golden file, then run the full check suite on it.
    ReproduceExample1,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn load_graph(path: &Path) -> Result<SeparatedGraph, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    SeparatedGraph::load(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn parse_selected(g: &SeparatedGraph, text: &str) -> Result<SelectedEdges, String> {
    let mut overrides = Vec::new();
    for entry in text.split(',').filter(|s| !s.is_empty()) {
        let (group_text, edge_text) = entry
            .split_once('=')
            .ok_or_else(|| format!("bad selection {entry:?}: expected vertex:index=edge"))?;
        let (vertex_text, index_text) = group_text
            .split_once(':')
            .ok_or_else(|| format!("bad selection {entry:?}: expected vertex:index=edge"))?;
        let vertex = g
            .vertex_id(vertex_text)
            .ok_or_else(|| format!("unknown vertex {vertex_text}"))?;
        let index: usize = index_text
            .parse()
            .map_err(|_| format!("bad group index {index_text:?}"))?;
        let edge = g
            .edge_id(edge_text)
            .ok_or_else(|| format!("unknown edge {edge_text}"))?;
        overrides.push((GroupId { vertex, index }, edge));
    }
    SelectedEdges::with_overrides(g, &overrides).map_err(|e| e.to_string())
}

fn run(command: Command) -> Result<bool, String> {
    match command {
        Command::Validate { path } => {
            let text = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
            match SeparatedGraph::load(&text) {
                Ok(_) => {
                    println!("ok");
                    Ok(true)
                }
                Err(LoadError::Invalid(violations)) => {
                    for violation in violations {
                        println!("{violation}");
                    }
                    Err(format!("{} is not a valid separated graph", path.display()))
                }
                Err(other) => Err(format!("{}: {other}", path.display())),
            }
        }
        Command::Build { graph } => {
            let g = load_graph(&graph)?;
            let bs = construct(&g);
            let report = verify_axioms(&g, &bs);
            println!("carrier = {}", bs.carrier());
            if report.is_ok() {
                println!("axioms: {} checks, all passed", report.checks);
                Ok(true)
            } else {
                for failure in &report.failures {
                    println!("FAIL {failure}");
                }
                Ok(false)
            }
        }
        Command::ShowIntervals { graph } => {
            let g = load_graph(&graph)?;
            let bs = construct(&g);
            print!("{}", render_intervals(&g, &bs));
            Ok(true)
        }
        Command::Apply { graph, elem, point } => {
            let g = load_graph(&graph)?;
            let bs = construct(&g);
            let x = parse_element(&g, &elem).map_err(|e| e.to_string())?;
            let p = parse_rational(&point).map_err(|e| e.to_string())?;
            let image = apply(&x, &DeltaVector::delta(p), &bs);
            println!("{image}");
            Ok(true)
        }
        Command::IsZero { graph, elem } => {
            let g = load_graph(&graph)?;
            let bs = construct(&g);
            let x = parse_element(&g, &elem).map_err(|e| e.to_string())?;
            match is_zero(&x, &bs) {
                ZeroDecision::Zero => println!("ZERO"),
                ZeroDecision::NonZero { witness, image } => {
                    println!("NONZERO");
                    println!("witness = {witness}");
                    println!("image = {image}");
                }
            }
            Ok(true)
        }
        Command::Relations { graph } => {
            let g = load_graph(&graph)?;
            let bs = construct(&g);
            let report = relation_check(&g, &bs);
            if report.is_ok() {
                println!("relations: {} checks, all passed", report.checks);
                Ok(true)
            } else {
                for failure in &report.failures {
                    println!("FAIL {failure}");
                }
                Ok(false)
            }
        }
        Command::FaithfulnessTest {
            graph,
            bound,
            trials,
            seed,
            selected,
        } => {
            let g = load_graph(&graph)?;
            let bs = construct(&g);
            let sel = match &selected {
                Some(text) => parse_selected(&g, text)?,
                None => SelectedEdges::first_edges(&g),
            };
            let report =
                faithfulness_trial(&g, &bs, &sel, bound, trials, seed).map_err(|e| e.to_string())?;
            println!("forward: {}/{} nonzero", report.forward_nonzero, report.forward_trials);
            println!("converse: {}/{} zero", report.converse_zero, report.converse_trials);
            for counterexample in &report.counterexamples {
                eprintln!("counterexample: {counterexample}");
            }
            Ok(report.is_ok())
        }
        Command::Decompose { graph, out } => {
            let g = load_graph(&graph)?;
            let sel = SelectedEdges::first_edges(&g);
            let (factors, amalgamation) = decompose(&g);
            fs::create_dir_all(&out).map_err(|e| format!("{}: {e}", out.display()))?;
            for (color, factor) in factors.iter().enumerate() {
                let name = format!(
                    "factor-{}-{}.json",
                    g.vertex_name(factor.group.vertex),
                    factor.group.index
                );
                let path = out.join(&name);
                fs::write(&path, factor.graph.save()).map_err(|e| format!("{}: {e}", path.display()))?;
                println!("factor {color}: {}", path.display());
            }
            let manifest_path = out.join("identifications.txt");
            let mut manifest = String::new();
            for ident in &amalgamation.identifications {
                manifest.push_str(&format!(
                    "{vertex}@{a} == {vertex}@{b}\n",
                    vertex = g.vertex_name(ident.vertex),
                    a = ident.color_a,
                    b = ident.color_b
                ));
            }
            fs::write(&manifest_path, manifest).map_err(|e| format!("{}: {e}", manifest_path.display()))?;
            println!("identifications: {}", manifest_path.display());
            let report = check_iso_on_relations(&g, &factors, &amalgamation, &sel);
            if report.is_ok() {
                println!(
                    "presentation: {} forward, {} backward, {} round-trip checks, all passed",
                    report.forward_checks, report.backward_checks, report.roundtrip_checks
                );
                Ok(true)
            } else {
                for failure in &report.failures {
                    println!("FAIL {failure}");
                }
                Ok(false)
            }
        }
        Command::ReproduceExample1 => reproduce_example1(),
    }
}

fn check(name: &str, passed: bool, detail: &str) -> bool {
    if passed {
        println!("PASS {name}");
    } else {
        println!("FAIL {name}: {detail}");
    }
    passed
}

fn reproduce_example1() -> Result<bool, String> {
    let g = SeparatedGraph::load(FAN_GRAPH_JSON).map_err(|e| e.to_string())?;
    let bs = construct(&g);
    let mut all = true;

    let rendered = render_intervals(&g, &bs);
    all &= check(
        "intervals-match-golden",
        rendered == FAN_GRAPH_INTERVALS,
        "interval dump differs from the golden file",
    );
    if rendered != FAN_GRAPH_INTERVALS {
        eprintln!("-- expected --\n{FAN_GRAPH_INTERVALS}-- got --\n{rendered}");
    }

    let axioms = verify_axioms(&g, &bs);
    all &= check(
        "branching-axioms",
        axioms.is_ok(),
        &axioms.failures.join("; "),
    );

    // the published pick region: the S-group edge e3 against the complement
    // of the group outside S
    let region = r1_region(
        &g,
        &bs,
        g.vertex_id("v0").expect("shipped graph has v0"),
        &[
            (1, leavitt_core::branching::Pick::Edge(g.edge_id("e3").unwrap())),
            (0, leavitt_core::branching::Pick::Complement),
        ],
    )
    .map_err(|e| e.to_string())?;
    let expected_region = IntervalUnion::interval(rat(2, 3), rat(5, 6));
    all &= check(
        "pick-region-value",
        region == expected_region,
        &format!("got {region}, expected {expected_region}"),
    );

    let mut sweep_failures = Vec::new();
    for v in g.vertex_ids() {
        for combo in pick_combinations(&g, v) {
            let region = r1_region(&g, &bs, v, &combo).map_err(|e| e.to_string())?;
            if region.is_empty() {
                sweep_failures.push(format!("empty region at {} for {combo:?}", g.vertex_name(v)));
            }
        }
    }
    all &= check("pick-region-sweep", sweep_failures.is_empty(), &sweep_failures.join("; "));

    let relations = relation_check(&g, &bs);
    all &= check(
        "operator-relations",
        relations.is_ok(),
        &relations.failures.join("; "),
    );

    let nonvanishing = nonvanishing_checks(&g, &bs);
    all &= check(
        "nonvanishing-suite",
        nonvanishing.is_ok(),
        &nonvanishing.failures.join("; "),
    );

    // the strictness witness must land in the uncovered region [2/3, 1)
    let strict = parse_element(&g, "e1.e1^+e2.e2^-v0").map_err(|e| e.to_string())?;
    let witness_ok = match is_zero(&strict, &bs) {
        ZeroDecision::NonZero { witness, .. } => witness >= rat(2, 3) && witness < rat(1, 1),
        ZeroDecision::Zero => false,
    };
    all &= check(
        "strictness-witness",
        witness_ok,
        "expected a nonzero decision with witness in [2/3, 1)",
    );

    Ok(all)
}
