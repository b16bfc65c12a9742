use std::fs;
use std::path::Path;

use collapse_lab::bisim::maximal_bisimulation;
use collapse_lab::cli::run;
use collapse_lab::gen::{random_tr_instance, random_tree};
use collapse_lab::prs::programs;
use collapse_lab::veblen::{settling_sums, QuasiOrder, VSystem};
use collapse_lab::HFSet;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("collapse-lab").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut full = vec!["--json"];
    full.extend_from_slice(args);
    let (code, out, _) = cli(&full);
    (code, serde_json::from_str(&out).unwrap_or_else(|e| panic!("{e}: {out}")))
}

fn write(dir: &Path, name: &str, contents: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, contents).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn set_expressions() {
    assert_eq!(cli(&["hf", "eval", "{{} {{}}}"]), (0, "{{} {{}}}\n".into(), String::new()));
    assert_eq!(cli(&["hf", "eval", "{{{}} {} {}}"]).1, "{{} {{}}}\n");
    assert_eq!(cli(&["hf", "rank", "#5"]).1, "5\n");
    assert_eq!(cli(&["hf", "tc", "{#3}"]).1, "{{} {{}} {{} {{}}} {{} {{}} {{} {{}}}}}\n");
    let (code, v) = json(&["hf", "powerset", "#3"]);
    assert_eq!(code, 0);
    assert_eq!(HFSet::from_json(&v).unwrap().len(), 8);
    let (_, v) = json(&["hf", "eval", "#4"]);
    assert_eq!(HFSet::from_json(&v).unwrap(), "#4".parse().unwrap());
}

#[test]
fn exit_codes() {
    assert_eq!(cli(&["hf", "eval", "{"]).0, 2);
    assert_eq!(cli(&["frobnicate"]).0, 2);
    assert_eq!(cli(&["--max-nodes", "10", "hf", "powerset", "#4"]).0, 1);
    let (code, v) = json(&["hf", "eval", "{{}"]);
    assert_eq!(code, 2);
    assert_eq!(v["error"]["kind"], "parse");
    let (code, v) = json(&["eval", "--model", "#2", "--formula", "(in 0 1)", "--assign", "{}"]);
    assert_eq!(code, 1);
    assert_eq!(v["error"]["kind"], "assignment-too-short");
    assert_eq!(cli(&["--help"]).0, 0);
}

#[test]
fn demonstrations() {
    let (code, v) = json(&["demo", "addition", "--k", "4"]);
    assert_eq!(code, 0);
    assert_eq!(v["pairs"], 16);
    assert_eq!(v["agrees"], true);
    let (_, v) = json(&["demo", "ackermann", "--bits", "4"]);
    assert_eq!(HFSet::from_json(&v["image"]).unwrap(), collapse_lab::hf::v_level(4).unwrap());
}

#[test]
fn formulas_and_truth_trees() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--model", "#3", "--formula", "(ex 2 (and (in 2 0) (not (eq 2 1))))", "--assign", "#2 {}"];
    let mut eval_args = vec!["eval"];
    eval_args.extend_from_slice(&args);
    assert_eq!(cli(&eval_args).1, "true\n");
    let dump = dir.path().join("trees");
    let mut truth_args = vec!["truth", "--dump-trees", dump.to_str().unwrap()];
    truth_args.extend_from_slice(&args);
    let (code, out, _) = cli(&truth_args);
    assert_eq!(code, 0);
    assert_eq!(out, "true\nAGREES WITH EVAL\n");
    for name in ["top", "bot", "sat"] {
        let v: Value = serde_json::from_str(&fs::read_to_string(dump.join(format!("{name}.json"))).unwrap()).unwrap();
        assert!(collapse_lab::tree::FiniteTree::from_json(&v).is_ok());
    }
}

#[test]
fn collapse_relations_and_trees() {
    let dir = tempfile::tempdir().unwrap();
    let rel = write(dir.path(), "rel.json", r#"{"carrier":["a","b","c"],"edges":[["a","b"],["b","c"],["a","c"]]}"#);
    let (code, v) = json(&["collapse", &rel]);
    assert_eq!(code, 0);
    let values: Vec<HFSet> = v.as_array().unwrap().iter().map(|r| HFSet::from_json(&r[1]).unwrap()).collect();
    assert_eq!(values, ["#0", "#1", "#2"].map(|s| s.parse().unwrap()));
    let cyc = write(dir.path(), "cyc.json", r#"{"carrier":[1,2],"edges":[[1,2],[2,1]]}"#);
    let (code, v) = json(&["collapse", &cyc]);
    assert_eq!(code, 1);
    assert_eq!(v["error"]["kind"], "not-well-founded");
    let tree = write(dir.path(), "tree.json", "[[], [0], [1], [1, 0]]");
    let (_, out, _) = cli(&["collapse", &tree]);
    assert_eq!(out.lines().next().unwrap(), "()\t{{} {{}}}");
}

#[test]
fn bisimulations_and_games() {
    let dir = tempfile::tempdir().unwrap();
    let t = random_tree(&mut ChaCha8Rng::seed_from_u64(3), 12);
    let tree = write(dir.path(), "t.json", &t.to_json().unwrap().to_string());
    let (code, v) = json(&["bisim", &tree]);
    assert_eq!(code, 0);
    let max = maximal_bisimulation(&t).unwrap();
    assert_eq!(v, max.to_json());
    let rel = write(dir.path(), "r.json", &v.to_string());
    assert_eq!(cli(&["bisim", &tree, "--check", &rel]).1.lines().next(), Some("BISIMULATION"));
    let bad = write(dir.path(), "bad.json", "[[[], [0]]]");
    assert_eq!(cli(&["bisim", &tree, "--check", &bad]).0, 1);

    let (code, v) = json(&["game", "solve", &tree]);
    assert_eq!(code, 0);
    assert!(v["winner"] == "I" || v["winner"] == "II");
    let (_, v) = json(&["game", "bisim", &tree, "--pair", "0", "0"]);
    assert_eq!(v["bisimilar"], true);
    assert_eq!(cli(&["game", "bisim", &tree, "--pair", "0", "99"]).0, 1);
}

#[test]
fn recursion_engines() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..5 {
        let inst = random_tr_instance(&mut rng, 5, 3, 5).unwrap();
        let file = write(dir.path(), &format!("i{i}.json"), &inst.to_json().to_string());
        let (code, out, _) = cli(&["tr", &file, "--engine", "both"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().next(), Some("ENGINES AGREE"));
        let (_, d) = json(&["tr", &file, "--engine", "direct", "--seed", "7"]);
        let (_, t) = json(&["tr", &file]);
        assert_eq!(d, t);
        assert_eq!(d["verified"], true);
    }
}

#[test]
fn veblen_commands() {
    let (code, out, _) = cli(&["veblen", "cmp", "phi(0,phi(T,'1'))", "phi(T,'1')", "--alpha", "1", "--lambda", "3"]);
    assert_eq!(code, 0);
    assert_eq!(out, "phi(0,phi(T,'1')) ≡ phi(T,'1')\n");
    assert_eq!(cli(&["veblen", "value", "phi(T,'2') + phi(T,'0')", "--lambda", "3"]).1, "ω^(2) + 1\n");
    assert_eq!(cli(&["veblen", "nf0", "phi(T,'1') + phi(T,'2')", "--lambda", "3"]).1, "phi(T,'2')\n");

    let dir = tempfile::tempdir().unwrap();
    let sys = VSystem::new(0, QuasiOrder::reversed_naturals());
    let stream: Vec<String> = settling_sums().take(60).map(|t| sys.format(&t)).collect();
    let file = write(dir.path(), "stream.txt", &stream.join("\n"));
    let (code, v) = json(&["veblen", "descend", "--input", &file, "--lookahead", "50"]);
    assert_eq!(code, 0);
    assert_eq!(v["case"], "diagonal");
    assert!(v["descent"].as_array().unwrap().len() >= 10);
    let (code, v) = json(&["veblen", "descend", "--input", &file, "--lookahead", "1"]);
    assert_eq!(code, 1);
    assert_eq!(v["error"]["kind"], "insufficient-input");
}

#[test]
fn programs_and_levels() {
    let dir = tempfile::tempdir().unwrap();
    let pfin = write(dir.path(), "pfin.prs", &programs::pfin().to_string());
    let (code, v) = json(&["prs", "eval", &pfin, "--args", "#3", "--bind", "omega=#6"]);
    assert_eq!(code, 0);
    assert_eq!(HFSet::from_json(&v).unwrap().len(), 8);
    let (code, v) = json(&["prs", "eval", &pfin, "--args", "#3"]);
    assert_eq!(code, 2);
    assert_eq!(v["error"]["kind"], "unbound");

    let (code, v) = json(&["lconstr", "--base", "{}", "--levels", "4", "--audit-def"]);
    assert_eq!(code, 0);
    assert_eq!(HFSet::from_json(&v["levels"][4]["set"]).unwrap(), collapse_lab::hf::v_level(4).unwrap());
    assert_eq!(v["levels"][3]["audit"]["defined"], 16);
    assert_eq!(v["basic_facts"], true);
}

#[test]
fn output_is_deterministic() {
    let a = cli(&["--json", "lconstr", "--base", "{#2}", "--levels", "2"]);
    let b = cli(&["--json", "lconstr", "--base", "{#2}", "--levels", "2"]);
    assert_eq!(a, b);
}
