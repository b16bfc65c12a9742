use collapse_lab::bisim::{collapse_kernel, is_bisimulation, maximal_bisimulation, tree_member_star, trees_equal_star};
use collapse_lab::collapse::{
    ackermann_collapse_image, addition_graph_direct, addition_graph_via_collapse, membership_relation, tree_collapse,
};
use collapse_lab::gen::{random_hf, random_order, random_tree, random_tree_upto};
use collapse_lab::hf::{transitive_closure, v_level, von_neumann};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn bisimilarity_is_equal_collapse() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xb1);
    for case in 0..200 {
        let n = rng.gen_range(1..=200);
        let t = random_tree(&mut rng, n);
        let max = maximal_bisimulation(&t).unwrap();
        assert!(is_bisimulation(&t, &max).unwrap(), "case {case}");
        assert_eq!(max, collapse_kernel(&t).unwrap(), "case {case}: {n} nodes");
    }
}

#[test]
fn addition_graphs() {
    for k in 0..=8 {
        assert_eq!(addition_graph_via_collapse(k).unwrap(), addition_graph_direct(k).unwrap(), "k = {k}");
    }
    assert_eq!(addition_graph_direct(2).unwrap().len(), 4);
}

#[test]
fn ackermann_image_is_v4() {
    assert_eq!(ackermann_collapse_image(4).unwrap(), v_level(4).unwrap());
    // 2^bits elements: V_1, V_2, V_3 have 1, 2, 4 members.
    for (bits, level) in [(0, 1), (1, 2), (2, 3)] {
        assert_eq!(ackermann_collapse_image(bits).unwrap(), v_level(level).unwrap());
    }
    assert_eq!(ackermann_collapse_image(3).unwrap().len(), 8);
}

#[test]
fn collapse_of_random_orders_satisfies_its_equation() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0d);
    for _ in 0..50 {
        let n = rng.gen_range(1..=8);
        let r = random_order(&mut rng, n, 0.4).unwrap();
        let pi = r.collapse().unwrap();
        assert!(r.satisfies_collapse_equation(&pi).unwrap());
    }
}

#[test]
fn star_relations_follow_collapse() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x57a);
    for case in 0..100 {
        let t = random_tree_upto(&mut rng, 12);
        let s = random_tree_upto(&mut rng, 12);
        let (pt, ps) = (t.root_collapse().unwrap(), s.root_collapse().unwrap());
        assert_eq!(trees_equal_star(&t, &s).unwrap(), pt == ps, "case {case}");
        assert_eq!(tree_member_star(&t, &s).unwrap(), ps.contains(&pt), "case {case}");
    }
}

proptest! {
    #[test]
    fn transitive_sets_collapse_to_themselves(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = transitive_closure(&random_hf(&mut rng, 4, 6).unwrap()).unwrap();
        let pi = membership_relation(&x).unwrap().collapse().unwrap();
        prop_assert!(pi.iter().all(|(k, v)| k == v));
    }

    #[test]
    fn tree_collapse_respects_children(seed in any::<u64>(), n in 1usize..80) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_tree(&mut rng, n);
        let pi = tree_collapse(&t).unwrap();
        for (p, v) in &pi {
            let below: Vec<_> = pi.iter().filter(|(q, _)| q.len() == p.len() + 1 && q.starts_with(p)).map(|(_, w)| w.clone()).collect();
            prop_assert_eq!(v.len(), below.iter().collect::<std::collections::BTreeSet<_>>().len());
            prop_assert!(below.iter().all(|w| v.contains(w)));
        }
    }

    #[test]
    fn ordinals_are_transitive_chains(n in 0usize..12) {
        let a = von_neumann(n).unwrap();
        prop_assert_eq!(a.len(), n);
        prop_assert!(a.is_transitive());
        prop_assert_eq!(a.as_ordinal(), Some(n));
    }
}
