//! The `collapse-lab` command line.
//!
//! Every command writes either text or (with `--json`) one JSON document to
//! the output.  Exit status: 0 success, 1 domain error or failed check,
//! 2 usage error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::bisim::{is_bisimulation, maximal_bisimulation, NodeRelation};
use crate::collapse::{
    ackermann_collapse_image, addition_graph_direct, addition_graph_via_collapse, tree_collapse, CarrierRelation,
};
use crate::constructible::{def_audit, l_level};
use crate::error::{Error, Result};
use crate::formula::{eval, Formula};
use crate::games::{bisimulation_game, solve};
use crate::hf::{finite_powerset, rank, transitive_closure, with_node_limit, HFSet};
use crate::prs::{eval_prim, Bindings, PrimTerm};
use crate::sexpr::{parse_set, parse_set_list};
use crate::tr::{tr_direct_shuffled, tr_trees, verify_recursion, TRInstance};
use crate::tree::{FiniteTree, Label};
use crate::truth::{bot_tree, sat_tree, top_tree, truth_via_collapse};
use crate::veblen::{descending_transfer, QuasiOrder, TransferCase, VSystem};

/// Largest set printed in full by `lconstr`; bigger levels show their size.
const PRINT_LIMIT: usize = 64;

/// Largest level audited by `lconstr --audit-def` (2^|a| subsets).
const AUDIT_LIMIT: usize = 4;

#[derive(Parser)]
#[command(name = "collapse-lab", version, about = "Hereditarily finite sets, collapse and bisimulation at desk scale")]
pub struct Cli {
    /// Emit one JSON document instead of text.
    #[arg(long, global = true)]
    pub json: bool,

    /// Ceiling on the number of distinct sets alive at once.
    #[arg(long, global = true, value_name = "N")]
    pub max_nodes: Option<usize>,

    /// Seed for randomized choices (results never depend on it).
    #[arg(long, global = true, value_name = "S", default_value_t = 0)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Hereditarily finite set expressions.
    Hf {
        #[command(subcommand)]
        op: HfOp,
    },
    /// Collapse a relation file ({"carrier","edges"}) or a tree file.
    Collapse { file: PathBuf },
    /// Maximal bisimulation of a tree, or check a candidate relation.
    Bisim {
        treefile: PathBuf,
        /// A relation file to check: is it a bisimulation?
        #[arg(long, value_name = "FILE")]
        check: Option<PathBuf>,
    },
    /// Evaluate a formula in (a,∈).
    Eval(FormulaArgs),
    /// Decide a formula through the collapse of truth-value trees.
    Truth {
        #[command(flatten)]
        args: FormulaArgs,
        /// Write the ⊤, ⊥ and satisfaction trees as tree JSON files here.
        #[arg(long, value_name = "DIR")]
        dump_trees: Option<PathBuf>,
    },
    /// Run Δ0 transfinite recursion on an instance file.
    Tr {
        instancefile: PathBuf,
        #[arg(long, value_enum, default_value_t = Engine::Trees)]
        engine: Engine,
    },
    /// Clopen games on finite trees.
    Game {
        #[command(subcommand)]
        op: GameOp,
    },
    /// The relativized Veblen notation system.
    Veblen {
        #[command(subcommand)]
        op: VeblenOp,
    },
    /// Primitive recursive set functions.
    Prs {
        #[command(subcommand)]
        op: PrsOp,
    },
    /// Finite constructible levels L_0(b), …, L_n(b).
    Lconstr {
        #[arg(long, value_name = "SETEXPR")]
        base: String,
        #[arg(long, value_name = "N")]
        levels: usize,
        /// Define every subset of the small levels by formula enumeration.
        #[arg(long)]
        audit_def: bool,
    },
    /// Worked collapses of arithmetic relations.
    Demo {
        #[command(subcommand)]
        op: DemoOp,
    },
}

#[derive(Subcommand)]
pub enum HfOp {
    /// Print the canonical form of a set expression.
    Eval { expr: String },
    /// Transitive closure.
    Tc { expr: String },
    /// Von Neumann rank.
    Rank { expr: String },
    /// Powerset.
    Powerset { expr: String },
}

#[derive(Args)]
pub struct FormulaArgs {
    #[arg(long, value_name = "SETEXPR")]
    pub model: String,
    #[arg(long, value_name = "FEXPR")]
    pub formula: String,
    /// Values of x0, x1, … as a whitespace-separated list of set expressions.
    #[arg(long, value_name = "SETEXPRS", default_value = "")]
    pub assign: String,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    Direct,
    Trees,
    Both,
}

#[derive(Subcommand)]
pub enum GameOp {
    /// Winner and a winning strategy.
    Solve { treefile: PathBuf },
    /// The bisimulation game started at two nodes (indices in preorder).
    Bisim {
        treefile: PathBuf,
        #[arg(long, num_args = 2, value_names = ["I", "J"], required = true)]
        pair: Vec<usize>,
    },
}

#[derive(Args)]
pub struct SystemArgs {
    /// Level bound α.
    #[arg(long, default_value_t = 0)]
    pub alpha: u32,
    /// Λ: a finite ordinal k, `revnat` for the reversed naturals, or a JSON
    /// file {"elements", "leq"}.
    #[arg(long, default_value = "revnat")]
    pub lambda: String,
}

#[derive(Subcommand)]
pub enum VeblenOp {
    /// Compare two terms.
    Cmp {
        t: String,
        s: String,
        #[command(flatten)]
        sys: SystemArgs,
    },
    /// Normal form of a term of O(0,Λ).
    Nf0 {
        t: String,
        #[command(flatten)]
        sys: SystemArgs,
    },
    /// Ordinal value of a term (Λ a finite ordinal).
    Value {
        t: String,
        #[command(flatten)]
        sys: SystemArgs,
    },
    /// Extract a descending sequence in Λ from a descending term stream.
    Descend {
        /// One term per line.
        #[arg(long, value_name = "FILE")]
        input: PathBuf,
        #[arg(long, value_name = "N", default_value_t = 50)]
        lookahead: usize,
        #[command(flatten)]
        sys: SystemArgs,
    },
}

#[derive(Subcommand)]
pub enum PrsOp {
    /// Evaluate a program file.
    Eval {
        program: PathBuf,
        #[arg(long, value_name = "SETEXPRS", default_value = "")]
        args: String,
        /// Bind a named constant, e.g. `omega=#6`.
        #[arg(long, value_name = "NAME=SETEXPR")]
        bind: Vec<String>,
    },
}

#[derive(Subcommand)]
pub enum DemoOp {
    /// The graph of addition on {0..k-1} as a collapse.
    Addition {
        #[arg(long, default_value_t = 4)]
        k: usize,
    },
    /// The collapse image of the Ackermann relation on {0..2^bits-1} (V_4 for 4 bits).
    Ackermann {
        #[arg(long, default_value_t = 4)]
        bits: u32,
    },
}

/// A command's result in both output formats.
struct Report {
    text: String,
    json: Value,
    status: i32,
}

impl Report {
    fn ok(text: impl Into<String>, json: Value) -> Report {
        Report { text: text.into(), json, status: 0 }
    }
}

/// Parse `args` (including the program name) and run the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let result = match cli.max_nodes {
        Some(n) => with_node_limit(n, || dispatch(&cli)),
        None => dispatch(&cli),
    };
    match result {
        Ok(r) => {
            let _ = if cli.json { writeln!(out, "{}", r.json) } else { write_text(out, &r.text) };
            r.status
        }
        Err(e) => {
            let code = if e.is_usage() { 2 } else { 1 };
            if cli.json {
                let _ = writeln!(out, "{}", json!({"error": {"kind": e.kind(), "message": e.to_string()}}));
            } else {
                let _ = writeln!(err, "error: {e}");
            }
            code
        }
    }
}

fn write_text(out: &mut dyn Write, text: &str) -> std::io::Result<()> {
    if text.ends_with('\n') {
        write!(out, "{text}")
    } else {
        writeln!(out, "{text}")
    }
}

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

fn read_tree(path: &Path) -> Result<FiniteTree> {
    FiniteTree::from_json(&read_json(path)?)
}

fn dispatch(cli: &Cli) -> Result<Report> {
    match &cli.command {
        Command::Hf { op } => hf(op),
        Command::Collapse { file } => collapse(file),
        Command::Bisim { treefile, check } => bisim(treefile, check.as_deref()),
        Command::Eval(args) => {
            let (a, f, s) = formula_args(args)?;
            let v = eval(&a, &f, &s)?;
            Ok(Report::ok(v.to_string(), json!({"value": v})))
        }
        Command::Truth { args, dump_trees } => truth(args, dump_trees.as_deref()),
        Command::Tr { instancefile, engine } => tr(instancefile, *engine, cli.seed),
        Command::Game { op } => game(op),
        Command::Veblen { op } => veblen(op),
        Command::Prs { op: PrsOp::Eval { program, args, bind } } => prs(program, args, bind),
        Command::Lconstr { base, levels, audit_def } => lconstr(base, *levels, *audit_def),
        Command::Demo { op } => demo(op),
    }
}

fn hf(op: &HfOp) -> Result<Report> {
    let x = match op {
        HfOp::Eval { expr } | HfOp::Tc { expr } | HfOp::Rank { expr } | HfOp::Powerset { expr } => parse_set(expr)?,
    };
    let set_report = |y: HFSet| Report::ok(y.to_string(), y.to_json());
    Ok(match op {
        HfOp::Eval { .. } => set_report(x),
        HfOp::Tc { .. } => set_report(transitive_closure(&x)?),
        HfOp::Powerset { .. } => set_report(finite_powerset(&x)?),
        HfOp::Rank { .. } => {
            let r = rank(&x);
            Report::ok(r.to_string(), json!(r))
        }
    })
}

fn collapse(file: &Path) -> Result<Report> {
    let v = read_json(file)?;
    let rows: Vec<(Value, String, Value)> = if v.is_object() {
        let rel = CarrierRelation::<Label>::from_json(&v)?;
        rel.collapse()?.into_iter().map(|(l, s)| (l.to_json(), l.to_string(), s.to_json_with_text())).collect()
    } else {
        let t = FiniteTree::from_json(&v)?;
        tree_collapse(&t)?
            .into_iter()
            .map(|(p, s)| {
                let labels: Vec<Value> = p.iter().map(Label::to_json).collect();
                (Value::Array(labels), format!("({})", join(&p)), s.to_json_with_text())
            })
            .collect()
    };
    let text = rows.iter().map(|(_, name, s)| format!("{name}\t{}\n", s["text"].as_str().unwrap_or(""))).collect::<String>();
    let json = Value::Array(rows.into_iter().map(|(k, _, s)| json!([k, s["set"]])).collect());
    Ok(Report::ok(text, json))
}

trait SetJson {
    fn to_json_with_text(&self) -> Value;
}

impl SetJson for HFSet {
    fn to_json_with_text(&self) -> Value {
        json!({"set": self.to_json(), "text": self.to_string()})
    }
}

fn join(labels: &[Label]) -> String {
    labels.iter().map(Label::to_string).collect::<Vec<_>>().join(",")
}

fn relation_text(r: &NodeRelation) -> String {
    r.pairs.iter().map(|(a, b)| format!("({})\t({})\n", join(a), join(b))).collect()
}

fn bisim(treefile: &Path, check: Option<&Path>) -> Result<Report> {
    let t = read_tree(treefile)?;
    let max = maximal_bisimulation(&t)?;
    match check {
        None => Ok(Report::ok(relation_text(&max), max.to_json())),
        Some(file) => {
            let r = NodeRelation::from_json(&read_json(file)?)?;
            let ok = is_bisimulation(&t, &r)?;
            let below = r.is_subset(&max);
            let verdict = if ok { "BISIMULATION" } else { "NOT A BISIMULATION" };
            Ok(Report {
                text: format!("{verdict}\ncontained in the maximal bisimulation: {below}"),
                json: json!({"bisimulation": ok, "subset_of_maximal": below}),
                status: if ok { 0 } else { 1 },
            })
        }
    }
}

fn formula_args(args: &FormulaArgs) -> Result<(HFSet, Formula, Vec<HFSet>)> {
    let a = parse_set(&args.model)?;
    let f: Formula = args.formula.parse()?;
    let s = if args.assign.trim().is_empty() { Vec::new() } else { parse_set_list(&args.assign)? };
    Ok((a, f, s))
}

fn truth(args: &FormulaArgs, dump: Option<&Path>) -> Result<Report> {
    let (a, f, s) = formula_args(args)?;
    let f = f.to_nnf();
    let via = truth_via_collapse(&a, &f, &s)?;
    let direct = eval(&a, &f, &s)?;
    if let Some(dir) = dump {
        fs::create_dir_all(dir)?;
        for (name, t) in [("top", top_tree(&f)?), ("bot", bot_tree(&f)?), ("sat", sat_tree(&a, &f, &s)?)] {
            fs::write(dir.join(format!("{name}.json")), format!("{}\n", t.to_json()?))?;
        }
    }
    let agree = via == direct;
    Ok(Report {
        text: format!("{via}\n{}", if agree { "AGREES WITH EVAL" } else { "DISAGREES WITH EVAL" }),
        json: json!({"value": via, "eval": direct, "nnf": f.to_string()}),
        status: if agree { 0 } else { 1 },
    })
}

fn tr(file: &Path, engine: Engine, seed: u64) -> Result<Report> {
    let inst = TRInstance::from_json(&read_json(file)?)?;
    let text_of = |r: &crate::tr::TRResult| r.h.iter().map(|(c, s)| format!("{c}\t{s}\n")).collect::<String>();
    match engine {
        Engine::Direct | Engine::Trees => {
            let r = if engine == Engine::Direct { tr_direct_shuffled(&inst, seed)? } else { tr_trees(&inst)? };
            let verified = verify_recursion(&inst, &r)?;
            Ok(Report {
                text: text_of(&r),
                json: json!({"h": r.to_json(), "verified": verified}),
                status: if verified { 0 } else { 1 },
            })
        }
        Engine::Both => {
            let d = tr_direct_shuffled(&inst, seed)?;
            let t = tr_trees(&inst)?;
            let agree = d == t;
            let only = |x: &crate::tr::TRResult, y: &crate::tr::TRResult| {
                x.h.difference(&y.h).map(|(c, s)| json!([c.to_json(), s.to_json()])).collect::<Vec<_>>()
            };
            let text = if agree {
                format!("ENGINES AGREE\n{}", text_of(&d))
            } else {
                let diff: Vec<String> = d.h.symmetric_difference(&t.h).map(|(c, s)| format!("{c}\t{s}")).collect();
                format!("ENGINES DIFFER\n{}", diff.join("\n"))
            };
            Ok(Report {
                text,
                json: json!({"agree": agree, "h": d.to_json(), "only_direct": only(&d, &t), "only_trees": only(&t, &d)}),
                status: if agree { 0 } else { 1 },
            })
        }
    }
}

fn game(op: &GameOp) -> Result<Report> {
    match op {
        GameOp::Solve { treefile } => {
            let g = read_tree(treefile)?;
            let sol = solve(&g)?;
            let strategy = sol.winning_strategy();
            let moves: String = strategy.moves.iter().map(|(p, l)| format!("({})\t{l}\n", join(p))).collect();
            Ok(Report::ok(
                format!("winner: {}\n{moves}", sol.winner),
                json!({"winner": sol.winner.to_string(), "strategy": strategy.to_json()}),
            ))
        }
        GameOp::Bisim { treefile, pair } => {
            let t = read_tree(treefile)?;
            let ex = t.explicit()?;
            let node = |i: usize| {
                ex.paths.get(i).ok_or_else(|| Error::InvalidInput(format!("no node {i}; the tree has {}", ex.len())))
            };
            let (p, q) = (node(pair[0])?, node(pair[1])?);
            let sol = solve(&bisimulation_game(&t, (p, q))?)?;
            let bisimilar = sol.winner == crate::games::Player::II;
            Ok(Report::ok(
                format!("winner: {}\nbisimilar: {bisimilar}", sol.winner),
                json!({"winner": sol.winner.to_string(), "bisimilar": bisimilar}),
            ))
        }
    }
}

fn system(args: &SystemArgs) -> Result<VSystem> {
    let lambda = if args.lambda == "revnat" {
        QuasiOrder::reversed_naturals()
    } else if let Ok(k) = args.lambda.parse::<u64>() {
        QuasiOrder::Ordinal(k)
    } else {
        QuasiOrder::from_json(&read_json(Path::new(&args.lambda))?)?
    };
    Ok(VSystem::new(args.alpha, lambda))
}

fn veblen(op: &VeblenOp) -> Result<Report> {
    match op {
        VeblenOp::Cmp { t, s, sys } => {
            let sys = system(sys)?;
            let (t, s) = (sys.parse(t)?, sys.parse(s)?);
            let (le, ge) = (sys.leq(&t, &s), sys.leq(&s, &t));
            let rel = match (le, ge) {
                (true, true) => "≡",
                (true, false) => "<",
                (false, true) => ">",
                (false, false) => "incomparable",
            };
            Ok(Report::ok(
                format!("{} {rel} {}", sys.format(&t), sys.format(&s)),
                json!({"leq": le, "geq": ge, "relation": rel}),
            ))
        }
        VeblenOp::Nf0 { t, sys } => {
            let sys = system(sys)?;
            let nf = sys.normal_form0(&sys.parse(t)?)?;
            let term = sys.format(&VSystem::nf0_term(&nf));
            let names: Vec<String> = nf.iter().map(|&e| sys.lambda.name(e)).collect();
            Ok(Report::ok(term.clone(), json!({"term": term, "exponents": names})))
        }
        VeblenOp::Value { t, sys } => {
            let sys = system(sys)?;
            let v = sys.value(&sys.parse(t)?)?;
            Ok(Report::ok(v.to_string(), json!({"value": v.to_string()})))
        }
        VeblenOp::Descend { input, lookahead, sys } => {
            let sys = system(sys)?;
            let text = fs::read_to_string(input).map_err(|e| Error::Io(format!("{}: {e}", input.display())))?;
            let terms = text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(|l| sys.parse(l))
                .collect::<Result<Vec<_>>>()?;
            let out = descending_transfer(&sys, terms, *lookahead)?;
            let case = match out.case {
                TransferCase::Coordinate(i) => format!("coordinate {i}"),
                TransferCase::Diagonal => "diagonal".to_string(),
            };
            let names: Vec<String> = out.descent.iter().map(|&e| sys.lambda.name(e)).collect();
            Ok(Report::ok(
                format!("{case}\n{}", names.join(" > ")),
                json!({"case": case, "descent": names}),
            ))
        }
    }
}

fn prs(program: &Path, args: &str, bind: &[String]) -> Result<Report> {
    let src = fs::read_to_string(program).map_err(|e| Error::Io(format!("{}: {e}", program.display())))?;
    let p = PrimTerm::parse(&src)?;
    let args = if args.trim().is_empty() { Vec::new() } else { parse_set_list(args)? };
    let mut bindings = Bindings::new();
    for b in bind {
        let (name, value) =
            b.split_once('=').ok_or_else(|| Error::parse(0, format!("binding `{b}` is not NAME=SETEXPR")))?;
        bindings.insert(name.trim().to_string(), parse_set(value)?);
    }
    let v = eval_prim(&p, &args, &bindings)?;
    Ok(Report::ok(v.to_string(), v.to_json()))
}

fn lconstr(base: &str, n: usize, audit: bool) -> Result<Report> {
    let b = parse_set(base)?;
    let seq = l_level(&b, n)?;
    let mut text = String::new();
    let mut levels = Vec::new();
    for (k, l) in seq.levels.iter().enumerate() {
        let shown = if l.len() <= PRINT_LIMIT { l.to_string() } else { "…".to_string() };
        text.push_str(&format!("L_{k}\t{}\t{shown}\n", l.len()));
        let mut entry = json!({"level": k, "size": l.len()});
        if l.len() <= PRINT_LIMIT {
            entry["set"] = l.to_json();
        }
        if audit && l.len() <= AUDIT_LIMIT {
            let a = def_audit(l, 9)?;
            text.push_str(&format!(
                "  Def audit: {}/{} subsets defined{}\n",
                a.defined,
                a.subsets,
                a.saturated_at.map(|s| format!(" by formula size {s}")).unwrap_or_default()
            ));
            entry["audit"] = json!({"defined": a.defined, "subsets": a.subsets, "saturated_at": a.saturated_at});
        }
        levels.push(entry);
    }
    text.push_str(&format!("transitive and increasing: {}\n", seq.check_basic_facts()));
    Ok(Report::ok(text, json!({"levels": levels, "basic_facts": seq.check_basic_facts()})))
}

fn demo(op: &DemoOp) -> Result<Report> {
    match op {
        DemoOp::Addition { k } => {
            let g = addition_graph_via_collapse(*k)?;
            let agree = g == addition_graph_direct(*k)?;
            Ok(Report {
                text: format!("{g}\n{} pairs; equals the addition graph: {agree}", g.len()),
                json: json!({"graph": g.to_json(), "pairs": g.len(), "agrees": agree}),
                status: if agree { 0 } else { 1 },
            })
        }
        DemoOp::Ackermann { bits } => {
            let img = ackermann_collapse_image(*bits)?;
            Ok(Report::ok(format!("{img}\n{} sets", img.len()), json!({"image": img.to_json(), "size": img.len()})))
        }
    }
}
