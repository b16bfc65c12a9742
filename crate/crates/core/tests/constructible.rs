use collapse_lab::constructible::{def_audit, def_set, definable_subset, l_level, rank_function};
use collapse_lab::formula::Formula;
use collapse_lab::gen::random_hf;
use collapse_lab::hf::{finite_powerset, transitive_closure, v_level, von_neumann};
use collapse_lab::prs::rank_via_oracle;
use collapse_lab::sexpr::parse_set;
use collapse_lab::{Error, HFSet};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn levels_over_the_empty_set_are_the_v_levels() {
    let seq = l_level(&HFSet::empty(), 4).unwrap();
    assert_eq!(seq.levels.len(), 5);
    for n in 0..=4 {
        assert_eq!(seq.levels[n], v_level(n).unwrap(), "n = {n}");
    }
    assert!(seq.check_basic_facts());
    assert!(matches!(l_level(&HFSet::empty(), 6), Err(Error::SizeLimit { .. })));
}

#[test]
fn relative_levels() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1c);
    for _ in 0..30 {
        let b = random_hf(&mut rng, 3, 3).unwrap();
        let seq = l_level(&b, 2).unwrap();
        assert_eq!(seq.levels[0], transitive_closure(&b).unwrap());
        assert_eq!(seq.levels[1], finite_powerset(&seq.levels[0]).unwrap());
        assert!(seq.check_basic_facts());
        assert!(seq.levels.iter().all(|l| l.is_transitive()));
    }
}

#[test]
fn every_subset_of_a_small_set_is_definable() {
    for src in ["#3", "{{} {{}} {{{}}}}", "{{{}}}", "#4"] {
        let a = parse_set(src).unwrap();
        let audit = def_audit(&a, 9).unwrap();
        assert_eq!(audit.subsets, 1 << a.len());
        assert_eq!(audit.defined, audit.subsets, "a = {a}");
        assert!(audit.saturated_at.unwrap() <= 9);
        assert_eq!(def_set(&a).unwrap().len(), audit.subsets);
    }
}

#[test]
fn definable_subsets_by_hand() {
    let a = von_neumann(3).unwrap();
    // x₀ ∈ x₁ with x₁ = 2 defines 2 inside 3.
    let two = von_neumann(2).unwrap();
    assert_eq!(definable_subset(&a, &Formula::member(0, 1), std::slice::from_ref(&two)).unwrap(), two);
    // Elements with no members: {0}.
    let empty = Formula::forall(1, Formula::not(Formula::member(1, 0)));
    assert_eq!(definable_subset(&a, &empty, &[]).unwrap(), von_neumann(1).unwrap());
}

#[test]
fn rank_function_two_ways() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x2a);
    for _ in 0..60 {
        let x = random_hf(&mut rng, 4, 5).unwrap();
        let r = rank_function(&x).unwrap();
        assert_eq!(r.len(), transitive_closure(&HFSet::singleton(&x).unwrap()).unwrap().len());
        for (y, v) in &r {
            assert_eq!(*v, von_neumann(y.rank() as usize).unwrap());
        }
        assert_eq!(r, rank_via_oracle(&x).unwrap());
    }
}
