//! One line per acceptance criterion: `PASS`/`FAIL`, the check, the time.

use std::time::{Duration, Instant};

use collapse_lab::bisim::{collapse_kernel, is_bisimulation, maximal_bisimulation};
use collapse_lab::collapse::{ackermann_collapse_image, addition_graph_direct, addition_graph_via_collapse};
use collapse_lab::constructible::l_level;
use collapse_lab::formula::{eval, Formula};
use collapse_lab::games::{
    bisim_from_strategy, exhaustive_winner, full_bisimulation_game, full_game_strategy, solve, winner, Player,
};
use collapse_lab::gen::{
    all_tree_shapes, random_assignment, random_hf, random_nnf, random_o0_term, random_tr_instance, random_tree,
};
use collapse_lab::hf::{finite_powerset, kuratowski, transitive_closure, v_level};
use collapse_lab::prs::{beta_oracle, pfin_prim, tc_rud};
use collapse_lab::sexpr::parse_set;
use collapse_lab::tr::{bisim_via_tr, tr_direct, tr_trees, verify_recursion};
use collapse_lab::truth::{bot_tree, nnf_corpus, top_tree, truth_distinctness_report, truth_via_collapse};
use collapse_lab::veblen::{
    descending_heads, descending_transfer, exhaustive_check, settling_sums, QuasiOrder, VSystem, VTerm,
};
use collapse_lab::{Error, HFSet, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ok<T>(r: Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn truth_theorem() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for case in 0..500 {
        let a = ok(random_hf(&mut rng, 4, 5))?;
        let size = rng.gen_range(1..=7);
        let qdepth = rng.gen_range(0..=3);
        let f = random_nnf(&mut rng, size, 3, qdepth);
        let s = random_assignment(&mut rng, &a, f.needed_len());
        let (via, direct) = (ok(truth_via_collapse(&a, &f, &s))?, ok(eval(&a, &f, &s))?);
        ensure(via == direct, || format!("case {case}: a = {a}, f = {f}: collapse says {via}, eval says {direct}"))?;
    }
    Ok("500 random cases agree".into())
}

fn distinctness() -> Outcome {
    let top = parse_set("{{{}} {}}").expect("literal");
    let bot = parse_set("{{{}}}").expect("literal");
    for f in [Formula::member(0, 1), Formula::equal(0, 1), Formula::not(Formula::member(1, 0))] {
        ensure(ok(ok(top_tree(&f))?.root_collapse())? == top, || format!("π⊤ of {f} is not {{{{∅}},∅}}"))?;
        ensure(ok(ok(bot_tree(&f))?.root_collapse())? == bot, || format!("π⊥ of {f} is not {{{{∅}}}}"))?;
    }
    let corpus = nnf_corpus(5, 2);
    let r = ok(truth_distinctness_report(&corpus))?;
    ensure(r.same_formula_distinct, || "π⊤_θ = π⊥_θ for some θ".into())?;
    if let Some((theta, psi)) = r.collision {
        return Err(format!(
            "atomic values exact, π⊤_θ ≠ π⊥_θ for all {} formulas, but π⊤ of {theta} = π⊥ of {psi}",
            corpus.len()
        ));
    }
    Ok(format!("{} formulas, all pairs distinct; atomic values exact", corpus.len()))
}

fn bisim_kernel() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for case in 0..200 {
        let n = rng.gen_range(1..=200);
        let t = random_tree(&mut rng, n);
        ensure(ok(maximal_bisimulation(&t))? == ok(collapse_kernel(&t))?, || format!("case {case} ({n} nodes)"))?;
    }
    Ok("200 random trees ≤ 200 nodes".into())
}

fn tr_engines() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for case in 0..200 {
        let inst = ok(random_tr_instance(&mut rng, 6, 4, 6))?;
        let direct = ok(tr_direct(&inst))?;
        let trees = ok(tr_trees(&inst))?;
        ensure(trees == direct, || format!("case {case}: engines differ on ψ = {}", inst.psi))?;
        ensure(ok(verify_recursion(&inst, &trees))?, || format!("case {case}: recursion equation fails"))?;
    }
    Ok("200 random instances, recursion re-verified".into())
}

fn tr_bisim() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..100 {
        let n = rng.gen_range(1..=60);
        let t = random_tree(&mut rng, n);
        ensure(ok(bisim_via_tr(&t))? == ok(maximal_bisimulation(&t))?, || format!("case {case} ({n} nodes)"))?;
    }
    Ok("100 random trees ≤ 60 nodes".into())
}

fn games() -> Outcome {
    let shapes = all_tree_shapes(15);
    for (i, g) in shapes.iter().enumerate() {
        let sol = ok(solve(g))?;
        ensure(sol.winner == ok(exhaustive_winner(g))?, || format!("game {i}: solver and minimax disagree"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for case in 0..50 {
        let n = rng.gen_range(1..=12);
        let t = random_tree(&mut rng, n);
        ensure(winner(&ok(full_bisimulation_game(&t))?) == Player::II, || format!("tree {case}: I wins"))?;
        let b = ok(bisim_from_strategy(&t, &ok(full_game_strategy(&t))?))?;
        ensure(ok(is_bisimulation(&t, &b))?, || format!("tree {case}: not a bisimulation"))?;
        ensure(b.is_subset(&ok(maximal_bisimulation(&t))?), || format!("tree {case}: not below the maximal one"))?;
    }
    Ok(format!("{} games ≤ 15 nodes, 50 full bisimulation games", shapes.len()))
}

fn veblen() -> Outcome {
    let mut terms = 0;
    for k in 0..=4 {
        for alpha in 0..=3 {
            let rep = ok(exhaustive_check(&VSystem::new(alpha, QuasiOrder::Ordinal(k)), 6))?;
            ensure(rep.all_ok() && rep.oracle_mismatches == Some(0), || format!("Λ = {k}, α = {alpha}: {rep:?}"))?;
            terms += rep.terms;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let sys = VSystem::new(0, QuasiOrder::Ordinal(4));
    for case in 0..300 {
        let t = random_o0_term(&mut rng, 4, 8);
        let nf = ok(sys.normal_form0(&t))?;
        let back = VSystem::nf0_term(&nf);
        ensure(sys.equiv(&t, &back), || format!("term {case}: normal form not equivalent"))?;
        ensure(ok(sys.normal_form0(&back))? == nf, || format!("term {case}: normal form not idempotent"))?;
    }
    Ok(format!("{terms} terms over 20 systems, lemma items 1–4, 300 normal forms"))
}

fn transfer() -> Outcome {
    let sys = VSystem::new(0, QuasiOrder::reversed_naturals());
    let mut lens = Vec::new();
    for stream in [
        Box::new(descending_heads()) as Box<dyn Iterator<Item = VTerm>>,
        Box::new(settling_sums()),
    ] {
        let out = ok(descending_transfer(&sys, stream, 50))?;
        ensure(out.descent.len() >= 10, || format!("only {} values", out.descent.len()))?;
        for k in 2..=out.descent.len() {
            let prefix = &out.descent[..k];
            ensure(prefix.windows(2).all(|w| sys.lambda.lt(w[1], w[0])), || format!("prefix of length {k}"))?;
        }
        lens.push(out.descent.len());
    }
    let short = descending_transfer(&sys, settling_sums(), 1);
    ensure(matches!(short, Err(Error::InsufficientInput(_))), || "N = 1 did not report insufficient input".into())?;
    Ok(format!("descents of length {lens:?}; N = 1 rejected"))
}

fn demonstrations() -> Outcome {
    for k in 0..=8 {
        ensure(ok(addition_graph_via_collapse(k))? == ok(addition_graph_direct(k))?, || format!("k = {k}"))?;
    }
    ensure(ok(ackermann_collapse_image(4))? == ok(v_level(4))?, || "Ackermann image is not V_4".into())?;
    Ok("addition graphs k ≤ 8, Ackermann image = V_4".into())
}

fn prs() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for case in 0..200 {
        let x = ok(random_hf(&mut rng, 4, 5))?;
        ensure(ok(tc_rud(&x))? == ok(transitive_closure(&x))?, || format!("case {case}: TC of {x}"))?;
        ensure(ok(pfin_prim(&x, x.len()))?.set == ok(finite_powerset(&x))?, || format!("case {case}: P of {x}"))?;
    }
    let (p, q) = (HFSet::empty(), ok(HFSet::singleton(&HFSet::empty()))?);
    let a = ok(HFSet::pair(&p, &q))?;
    let cycle = ok(HFSet::pair(&ok(kuratowski(&p, &q))?, &ok(kuratowski(&q, &p))?))?;
    ensure(ok(beta_oracle(&a, &cycle))?.is_empty(), || "B on a 2-cycle is not ∅".into())?;
    let t = ok(v_level(3))?;
    let mut eps = Vec::new();
    let mut id = Vec::new();
    for v in t.iter() {
        id.push(ok(kuratowski(v, v))?);
        for u in v.iter() {
            eps.push(ok(kuratowski(u, v))?);
        }
    }
    let graph = ok(beta_oracle(&t, &ok(HFSet::canon(eps))?))?;
    ensure(graph == ok(HFSet::canon(id))?, || "B on ∈ of V_3 is not the identity".into())?;
    let levels = ok(l_level(&HFSet::empty(), 4))?;
    for n in 0..=4 {
        ensure(levels.levels[n] == ok(v_level(n))?, || format!("L_{n}(∅) ≠ V_{n}"))?;
    }
    Ok("200 random sets, oracle B, L_n(∅) = V_n for n ≤ 4".into())
}

#[test]
fn acceptance() {
    type Check = fn() -> Outcome;
    let criteria: [(u32, &str, Check, Option<u64>); 10] = [
        (1, "truth trees decide satisfaction", truth_theorem, Some(30)),
        (2, "π⊤_θ ≠ π⊥_ψ and the atomic values", distinctness, None),
        (3, "maximal bisimulation = collapse kernel", bisim_kernel, Some(20)),
        (4, "Δ0 recursion: tree engine = direct engine", tr_engines, Some(60)),
        (5, "bisimulation through recursion", tr_bisim, None),
        (6, "clopen determinacy and the bisimulation game", games, None),
        (7, "Veblen comparison, lemma, normal forms", veblen, Some(120)),
        (8, "descending transfer", transfer, None),
        (9, "addition and Ackermann collapses", demonstrations, None),
        (10, "primitive recursive layer", prs, Some(60)),
    ];
    let mut failed = Vec::new();
    for (n, name, check, budget) in criteria {
        let start = Instant::now();
        let mut outcome = check();
        let took = start.elapsed();
        if let (Ok(msg), Some(b)) = (&outcome, budget) {
            if took > Duration::from_secs(b) {
                outcome = Err(format!("{msg}, but took {took:.1?} (budget {b} s)"));
            }
        }
        match outcome {
            Ok(msg) => println!("PASS {n:>2} {name}: {msg} [{took:.1?}]"),
            Err(msg) => {
                println!("FAIL {n:>2} {name}: {msg} [{took:.1?}]");
                failed.push(n);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
