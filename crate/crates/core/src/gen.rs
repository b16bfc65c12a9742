//! Seeded random generators for test corpora and demonstrations.
//!
//! Every generator takes an explicit RNG so that corpora are reproducible
//! from a seed.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::collapse::CarrierRelation;
use crate::error::Result;
use crate::formula::{Assignment, Formula};
use crate::hf::{v_level, HFSet};
use crate::tr::TRInstance;
use crate::tree::{Dag, FiniteTree, Label, NodeId, Path};
use crate::veblen::{Elem, VSystem, VTerm};

/// A random subset of `V_level` with at most `max_len` elements.
pub fn random_subset_of_v(rng: &mut impl Rng, level: usize, max_len: usize) -> Result<HFSet> {
    let v = v_level(level)?;
    let mut members = v.members().to_vec();
    members.shuffle(rng);
    let n = rng.gen_range(0..=max_len.min(members.len()));
    members.truncate(n);
    HFSet::canon(members)
}

/// A random element of `V_level`.
pub fn random_element_of_v(rng: &mut impl Rng, level: usize) -> Result<HFSet> {
    let v = v_level(level)?;
    Ok(v.members().choose(rng).cloned().unwrap_or_else(HFSet::empty))
}

/// A random hereditarily finite set of `|x| ≤ max_len` with members drawn
/// from `V_level`.
pub fn random_hf(rng: &mut impl Rng, level: usize, max_len: usize) -> Result<HFSet> {
    random_subset_of_v(rng, level, max_len)
}

/// A random tree with exactly `nodes` nodes (at least one).  Each new node
/// is attached to a uniformly chosen existing node; labels are small
/// integers so that sibling subtrees are often isomorphic.
pub fn random_tree(rng: &mut impl Rng, nodes: usize) -> FiniteTree {
    let mut paths: Vec<Path> = vec![vec![]];
    let mut child_count: Vec<i64> = vec![0];
    while paths.len() < nodes.max(1) {
        let p = rng.gen_range(0..paths.len());
        let mut path = paths[p].clone();
        path.push(Label::Int(child_count[p]));
        child_count[p] += 1;
        paths.push(path);
        child_count.push(0);
    }
    FiniteTree::from_sequences_closed(paths)
}

/// Every finite tree with at most `max_nodes` nodes, one per isomorphism
/// type, children labelled `0, 1, …` in order.  All trees share one DAG.
pub fn all_tree_shapes(max_nodes: usize) -> Vec<FiniteTree> {
    // shapes[n] lists the trees of n nodes, each as its nonincreasing list
    // of child keys (size, index into shapes[size]).
    type Key = (usize, usize);
    fn fill(rem: usize, max: Key, cur: &mut Vec<Key>, shapes: &[Vec<Vec<Key>>], out: &mut Vec<Vec<Key>>) {
        if rem == 0 {
            out.push(cur.clone());
            return;
        }
        for size in (1..=rem.min(max.0)).rev() {
            let top = if size == max.0 { (max.1 + 1).min(shapes[size].len()) } else { shapes[size].len() };
            for idx in (0..top).rev() {
                cur.push((size, idx));
                fill(rem - size, (size, idx), cur, shapes, out);
                cur.pop();
            }
        }
    }
    let mut shapes: Vec<Vec<Vec<Key>>> = vec![Vec::new()];
    for n in 1..=max_nodes {
        let mut out = Vec::new();
        fill(n - 1, (n - 1, usize::MAX - 1), &mut Vec::new(), &shapes, &mut out);
        shapes.push(out);
    }
    let mut dag = Dag::new();
    let mut ids: Vec<Vec<NodeId>> = vec![Vec::new()];
    for level in shapes.iter().skip(1) {
        let row = level
            .iter()
            .map(|kids| {
                let edges = kids.iter().enumerate().map(|(k, &(s, i))| (Label::Int(k as i64), ids[s][i])).collect();
                dag.node(edges)
            })
            .collect();
        ids.push(row);
    }
    let dag = Arc::new(dag);
    ids.into_iter().flatten().map(|r| FiniteTree::from_shared(dag.clone(), r)).collect()
}

/// A random tree of uniformly random size in `1..=max_nodes`.
pub fn random_tree_upto(rng: &mut impl Rng, max_nodes: usize) -> FiniteTree {
    let n = rng.gen_range(1..=max_nodes.max(1));
    random_tree(rng, n)
}

/// A random term of `O(0,Λ)`: a sum of up to `max_len` summands, each `0`
/// or `φ(0,x)` with `x < elems`.
pub fn random_o0_term(rng: &mut impl Rng, elems: Elem, max_len: usize) -> VTerm {
    let n = rng.gen_range(1..=max_len.max(1));
    let items = (0..n)
        .map(|_| if rng.gen_bool(0.15) { VTerm::Zero } else { VTerm::PhiTop(rng.gen_range(0..elems.max(1))) })
        .collect();
    VTerm::sum(items)
}

/// A random term of the system with at most `size` syntax-tree nodes.
/// Needs a finite nonempty `Λ` or `α > 0` for anything beyond `0`.
pub fn random_vterm(rng: &mut impl Rng, sys: &VSystem, size: usize) -> VTerm {
    let elems = sys.lambda.elements().unwrap_or_else(|| (0..8).collect());
    fn go(rng: &mut impl Rng, sys: &VSystem, elems: &[Elem], size: usize, in_sum: bool) -> VTerm {
        let choice = rng.gen_range(0..4);
        if size >= 2 && choice == 0 && !elems.is_empty() {
            VTerm::PhiTop(*elems.choose(rng).expect("nonempty"))
        } else if size >= 2 && choice == 1 && sys.alpha > 0 {
            VTerm::phi(rng.gen_range(0..sys.alpha), go(rng, sys, elems, size - 1, false))
        } else if size >= 3 && choice == 2 && !in_sum {
            let mut rem = size - 1;
            let mut items = Vec::new();
            while rem > 0 && (items.len() < 2 || rng.gen_bool(0.5)) {
                let k = rng.gen_range(1..=rem);
                items.push(go(rng, sys, elems, k, true));
                rem -= k;
            }
            if items.len() < 2 {
                items.push(VTerm::Zero);
            }
            VTerm::Sum(Arc::new(items))
        } else {
            VTerm::Zero
        }
    }
    go(rng, sys, &elems, size, false)
}

/// A random formula of exactly `size` nodes (where achievable) in negation
/// normal form, with variables in `0..vars` and at most `qdepth` nested
/// quantifiers.
pub fn random_nnf(rng: &mut impl Rng, size: usize, vars: usize, qdepth: usize) -> Formula {
    let var = |rng: &mut dyn rand::RngCore| rng.gen_range(0..vars.max(1));
    let atom = |rng: &mut dyn rand::RngCore| {
        let (i, j) = (var(rng), var(rng));
        if rng.gen_bool(0.6) {
            Formula::member(i, j)
        } else {
            Formula::equal(i, j)
        }
    };
    match size {
        0 | 1 => atom(rng),
        2 => {
            if qdepth > 0 && rng.gen_bool(0.3) {
                let x = var(rng);
                let body = atom(rng);
                if rng.gen_bool(0.5) {
                    Formula::exists(x, body)
                } else {
                    Formula::forall(x, body)
                }
            } else {
                Formula::not(atom(rng))
            }
        }
        _ => {
            if qdepth > 0 && rng.gen_bool(0.4) {
                let x = var(rng);
                let body = random_nnf(rng, size - 1, vars, qdepth - 1);
                if rng.gen_bool(0.5) {
                    Formula::exists(x, body)
                } else {
                    Formula::forall(x, body)
                }
            } else {
                let left = rng.gen_range(1..size - 1);
                let g = random_nnf(rng, left, vars, qdepth);
                let h = random_nnf(rng, size - 1 - left, vars, qdepth);
                if rng.gen_bool(0.5) {
                    Formula::and(g, h)
                } else {
                    Formula::or(g, h)
                }
            }
        }
    }
}

/// A random assignment of the given length with values in `a` (or `∅` when
/// `a` is empty).
pub fn random_assignment(rng: &mut impl Rng, a: &HFSet, len: usize) -> Assignment {
    (0..len)
        .map(|_| a.members().choose(rng).cloned().unwrap_or_else(HFSet::empty))
        .collect()
}

/// A random well-founded relation on `n` distinct stages drawn from `V_4`:
/// edges only go from earlier to later positions of a random arrangement.
pub fn random_order(rng: &mut impl Rng, n: usize, density: f64) -> Result<CarrierRelation<HFSet>> {
    let v = v_level(4)?;
    let mut stages = v.members().to_vec();
    stages.shuffle(rng);
    stages.truncate(n);
    let mut edges = Vec::new();
    for i in 0..stages.len() {
        for j in i + 1..stages.len() {
            if rng.gen_bool(density) {
                edges.push((stages[i].clone(), stages[j].clone()));
            }
        }
    }
    CarrierRelation::new(stages, edges)
}

fn tr_literal(rng: &mut impl Rng, vars: &[usize], free: usize) -> Formula {
    // The first `free` entries of `vars` are u and the parameters; the rest
    // are bound.  Literals favour the innermost bound variable, so they talk
    // about what the enclosing quantifier ranges over.
    let any = |rng: &mut dyn rand::RngCore| vars[rng.gen_range(0..vars.len())];
    let inner = |rng: &mut dyn rand::RngCore| {
        if vars.len() > free && rng.gen_bool(0.8) {
            vars[vars.len() - 1]
        } else {
            vars[rng.gen_range(0..vars.len())]
        }
    };
    let core = match rng.gen_range(0..10) {
        0..=3 => Formula::member(inner(rng), 1),
        4..=5 => Formula::member(inner(rng), any(rng)),
        6..=7 => Formula::member(any(rng), inner(rng)),
        _ => Formula::equal(inner(rng), any(rng)),
    };
    if rng.gen_bool(0.35) {
        Formula::not(core)
    } else {
        core
    }
}

/// A random recursion formula of size ≤ `size`: v appears only as `x∈v` or
/// `x∉v`; quantifiers are mostly bounded (by v, u, a parameter or an
/// enclosing bound variable) and occasionally unbounded.
pub fn random_tr_formula(rng: &mut impl Rng, size: usize, params: usize) -> Formula {
    let mut vars = vec![0];
    vars.extend(2..2 + params);
    let next = 2 + params;
    let free = vars.len();
    if size >= 6 && params > 0 && rng.gen_bool(0.6) {
        // A seed ∨ a step: `u∈p₀ ∨ ∃x(x∈v ∧ L(x))`.
        let seed = Formula::member(0, 2);
        let mut inner = vars.clone();
        inner.push(next);
        let step = if rng.gen_bool(0.5) {
            Formula::member(0, next)
        } else {
            Formula::member(next, 2 + params - 1)
        };
        return Formula::or(seed, Formula::exists(next, Formula::and(Formula::member(next, 1), step)));
    }
    if size >= 4 && rng.gen_bool(0.6) {
        // Most interesting recursions look at v through a bounded
        // quantifier: ∃x∈v θ or ∀x∈v θ.
        let mut inner = vars.clone();
        inner.push(next);
        return if size >= 5 && rng.gen_bool(0.5) {
            let body = tr_formula_in(rng, size - 4, &inner, free, next + 1, 1);
            Formula::forall(next, Formula::or(Formula::not(Formula::member(next, 1)), body))
        } else {
            let body = tr_formula_in(rng, size - 3, &inner, free, next + 1, 1);
            Formula::exists(next, Formula::and(Formula::member(next, 1), body))
        };
    }
    tr_formula_in(rng, size.max(1), &vars, free, next, 2)
}

fn tr_formula_in(rng: &mut impl Rng, size: usize, vars: &[usize], free: usize, next: usize, qleft: usize) -> Formula {
    if size <= 1 || (size == 2 && rng.gen_bool(0.5)) {
        let f = tr_literal(rng, vars, free);
        return if size < f.size() { Formula::member(vars[0], 1) } else { f };
    }
    let choice = rng.gen_range(0..10);
    if qleft > 0 && choice < 5 && size >= 4 {
        let x = next;
        let mut inner = vars.to_vec();
        inner.push(x);
        let y = if rng.gen_bool(0.45) { 1 } else { vars[rng.gen_range(0..vars.len())] };
        if rng.gen_bool(0.5) {
            let body = tr_formula_in(rng, size - 3, &inner, free, next + 1, qleft - 1);
            Formula::exists(x, Formula::and(Formula::member(x, y), body))
        } else if size >= 5 {
            let body = tr_formula_in(rng, size - 4, &inner, free, next + 1, qleft - 1);
            Formula::forall(x, Formula::or(Formula::not(Formula::member(x, y)), body))
        } else {
            let body = tr_formula_in(rng, size - 3, &inner, free, next + 1, qleft - 1);
            Formula::exists(x, Formula::and(Formula::member(x, y), body))
        }
    } else if qleft > 0 && choice == 5 {
        let x = next;
        let mut inner = vars.to_vec();
        inner.push(x);
        let body = tr_formula_in(rng, size - 1, &inner, free, next + 1, qleft - 1);
        if rng.gen_bool(0.5) {
            Formula::exists(x, body)
        } else {
            Formula::forall(x, body)
        }
    } else if size >= 3 {
        let left = rng.gen_range(1..size - 1);
        let g = tr_formula_in(rng, left, vars, free, next, qleft);
        let h = tr_formula_in(rng, size - 1 - left, vars, free, next, qleft);
        if rng.gen_bool(0.5) {
            Formula::and(g, h)
        } else {
            Formula::or(g, h)
        }
    } else {
        tr_literal(rng, vars, free)
    }
}

/// A random recursion instance: `|X| ≤ max_x` stages from `V_4`,
/// `|a| ≤ max_a` from `V_3`, two parameters (usually a random subset of `a`
/// and a random subset of `a×X`; otherwise elements of `V_4`) and ψ of size
/// ≤ `max_psi`.
pub fn random_tr_instance(rng: &mut impl Rng, max_x: usize, max_a: usize, max_psi: usize) -> Result<TRInstance> {
    let n = rng.gen_range(1..=max_x.max(1));
    let order = random_order(rng, n, 0.45)?;
    let mut a = random_subset_of_v(rng, 3, max_a)?;
    if a.is_empty() {
        a = HFSet::singleton(&HFSet::empty())?;
    }
    // Parameters are often sets of pairs in a×X, so that ψ can compare v
    // against them.
    let ax = crate::hf::cartesian(&a, &HFSet::canon(order.carrier().to_vec())?)?;
    let mut params = Vec::new();
    for pool in [&a, &ax] {
        if rng.gen_bool(0.7) {
            let mut m = pool.members().to_vec();
            m.retain(|_| rng.gen_bool(0.5));
            params.push(HFSet::canon(m)?);
        } else {
            params.push(random_element_of_v(rng, 4)?);
        }
    }
    let size = if rng.gen_bool(0.6) { max_psi } else { rng.gen_range(max_psi.min(3)..=max_psi) };
    let psi = random_tr_formula(rng, size, params.len());
    Ok(TRInstance { a, order, psi, params })
}
