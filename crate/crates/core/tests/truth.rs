use collapse_lab::formula::{eval, Formula};
use collapse_lab::gen::{random_assignment, random_hf, random_nnf};
use collapse_lab::sexpr::parse_set;
use collapse_lab::HFSet;
use collapse_lab::truth::{bot_tree, nnf_corpus, top_tree, truth_distinctness_report, truth_run, truth_via_collapse, validate_combined};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn collapse_decides_satisfaction_on_random_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7a11);
    for case in 0..500 {
        let a = random_hf(&mut rng, 4, 5).unwrap();
        let size = rng.gen_range(1..=7);
        let qdepth = rng.gen_range(0..=3);
        let f = random_nnf(&mut rng, size, 3, qdepth);
        assert!(f.is_nnf() && f.size() <= 7 && f.quantifier_depth() <= 3);
        let s = random_assignment(&mut rng, &a, f.needed_len());
        assert_eq!(truth_via_collapse(&a, &f, &s).unwrap(), eval(&a, &f, &s).unwrap(), "case {case}: a = {a}, f = {f}");
    }
}

#[test]
fn combined_trees_validate_on_random_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xc0b);
    for case in 0..60 {
        let a = random_hf(&mut rng, 3, 3).unwrap().adjoin(&HFSet::empty()).unwrap();
        let size = rng.gen_range(1..=5);
        let f = random_nnf(&mut rng, size, 2, 2);
        let s = random_assignment(&mut rng, &a, f.needed_len());
        let run = truth_run(&a, &f, &s).unwrap();
        if let Err(e) = validate_combined(&run.tree, &a) {
            panic!("case {case}: a = {a}, f = {f}, s = {s:?}: {e}");
        }
    }
}

#[test]
fn true_and_false_values_of_one_formula_differ() {
    let corpus = nnf_corpus(5, 2);
    assert!(corpus.iter().all(|f| f.is_nnf() && f.size() <= 5));
    let r = truth_distinctness_report(&corpus).unwrap();
    assert!(r.same_formula_distinct);
    assert!(r.top_bot_heights_equal);
    assert!(r.weighted_rank_matches_height);
}

#[test]
fn conjunction_true_equals_disjunction_false() {
    // Both trees are the four ordered pairs of the subformula values.
    for theta in [Formula::member(0, 1), Formula::exists(0, Formula::equal(0, 1))] {
        let and = Formula::and(theta.clone(), theta.clone());
        let or = Formula::or(theta.clone(), theta.clone());
        assert_eq!(top_tree(&and).unwrap().root_collapse().unwrap(), bot_tree(&or).unwrap().root_collapse().unwrap());
        let ex = Formula::exists(0, theta.clone());
        let all = Formula::forall(0, theta);
        assert_eq!(top_tree(&ex).unwrap().root_collapse().unwrap(), bot_tree(&all).unwrap().root_collapse().unwrap());
    }
    let r = truth_distinctness_report(&nnf_corpus(3, 1)).unwrap();
    assert!(!r.distinct);
    let (theta, psi) = r.collision.unwrap();
    assert_eq!(top_tree(&theta).unwrap().root_collapse().unwrap(), bot_tree(&psi).unwrap().root_collapse().unwrap());
}

#[test]
fn atomic_values() {
    let top = parse_set("{{{}} {}}").unwrap();
    let bot = parse_set("{{{}}}").unwrap();
    for f in [Formula::member(0, 1), Formula::equal(0, 1), Formula::member(1, 1)] {
        assert_eq!(top_tree(&f).unwrap().root_collapse().unwrap(), top);
        assert_eq!(bot_tree(&f).unwrap().root_collapse().unwrap(), bot);
    }
}
