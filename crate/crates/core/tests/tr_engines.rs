use collapse_lab::bisim::{is_bisimulation, maximal_bisimulation};
use collapse_lab::gen::{random_tr_instance, random_tree};
use collapse_lab::tr::{bisim_via_tr, tr_direct, tr_direct_shuffled, tr_trees, tr_trees_with, verify_recursion, TreeOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn engines_agree_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7e57);
    for case in 0..200 {
        let inst = random_tr_instance(&mut rng, 6, 4, 6).unwrap();
        let direct = tr_direct(&inst).unwrap();
        assert!(verify_recursion(&inst, &direct).unwrap(), "case {case}");
        let trees = tr_trees(&inst).unwrap_or_else(|e| panic!("case {case}: {e} on {}", inst.psi));
        assert_eq!(trees, direct, "case {case}: ψ = {}", inst.psi);
        assert_eq!(tr_direct_shuffled(&inst, case).unwrap(), direct);
    }
}

#[test]
fn unpruned_trees_agree_on_small_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for case in 0..40 {
        let inst = random_tr_instance(&mut rng, 4, 3, 5).unwrap();
        let opts = TreeOptions { prune_guards: false, ..Default::default() };
        assert_eq!(tr_trees_with(&inst, opts).unwrap(), tr_direct(&inst).unwrap(), "case {case}: ψ = {}", inst.psi);
    }
}

#[test]
fn bisimulation_from_recursion() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xb15);
    for case in 0..100 {
        let n = rng.gen_range(1..=60);
        let t = random_tree(&mut rng, n);
        let r = bisim_via_tr(&t).unwrap();
        assert!(is_bisimulation(&t, &r).unwrap(), "case {case}");
        assert_eq!(r, maximal_bisimulation(&t).unwrap(), "case {case}");
    }
}
