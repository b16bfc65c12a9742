//! Δ0 transfinite recursion.
//!
//! Given a set `a`, a well-founded relation `(X,≺)` (not necessarily
//! transitive), parameters `p₀..p_n` and a formula ψ in negation normal form
//! in which the variable `v` (index 1) occurs only in literals `x∈v` and
//! `x∉v`, there is a unique `H ⊆ a×X` with
//!
//! ```text
//! c ∈ H_s  ⟺  ψ[c, H_{≺s}, p₀, …, p_n]      for all s ∈ X, c ∈ a,
//! ```
//!
//! where `H_{≺s} = ⋃_{t≺s} H_t × {t}`.  The variable `u` has index 0 and
//! parameter `p_i` has index `i+2`.
//!
//! Two engines compute H.  [`tr_direct`] recurses along a topological order
//! and evaluates ψ with `v` bound to `H_{≺s}` as a set of Kuratowski pairs.
//! [`tr_trees`] never evaluates ψ at all: it builds, for every stage, truth
//! trees whose `x∈v` cases refer to the trees of earlier stages, embeds them
//! in one combined tree, collapses it once and reads H off the collapse.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bisim::NodeRelation;
use crate::collapse::{opair_node, CarrierRelation};
use crate::error::{Error, Result};
use crate::formula::{assign_update, eval, Assignment, Formula};
use crate::hf::{cartesian, kuratowski, transitive_closure, unpair, von_neumann, HFSet};
use crate::tree::{Dag, FiniteTree, Label, NodeId};

/// Index of the recursion argument `u`.
pub const U: usize = 0;
/// Index of the recursion variable `v`.
pub const V: usize = 1;

/// Default ceiling on DAG nodes for [`tr_trees`].
pub const DEFAULT_TR_NODE_LIMIT: usize = 6_000_000;

/// Default ceiling on `|T|` for [`bisim_via_tr`].
pub const DEFAULT_BISIM_TR_NODES: usize = 120;

/// One instance of the recursion scheme.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TRInstance {
    pub a: HFSet,
    pub order: CarrierRelation<HFSet>,
    pub psi: Formula,
    pub params: Vec<HFSet>,
}

/// The recursion's output: pairs `(c, s)` with `c ∈ H_s`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TRResult {
    pub h: BTreeSet<(HFSet, HFSet)>,
}

impl TRResult {
    /// `H_s`.
    pub fn slice(&self, s: &HFSet) -> BTreeSet<HFSet> {
        self.h.iter().filter(|(_, t)| t == s).map(|(c, _)| c.clone()).collect()
    }

    /// `X_{≺s}`.
    pub fn stages_below(order: &CarrierRelation<HFSet>, s: &HFSet) -> Vec<HFSet> {
        order.edges().iter().filter(|(_, u)| u == s).map(|(t, _)| t.clone()).collect()
    }

    /// `H_{≺s}` as a set of Kuratowski pairs `⟨c,t⟩`.
    pub fn below(&self, order: &CarrierRelation<HFSet>, s: &HFSet) -> Result<HFSet> {
        let mut pairs = Vec::new();
        for t in TRResult::stages_below(order, s) {
            for c in self.slice(&t) {
                pairs.push(kuratowski(&c, &t)?);
            }
        }
        HFSet::canon(pairs)
    }

    /// H as a set of Kuratowski pairs.
    pub fn as_set(&self) -> Result<HFSet> {
        HFSet::canon(self.h.iter().map(|(c, s)| kuratowski(c, s)).collect::<Result<_>>()?)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.h.iter().map(|(c, s)| serde_json::json!([c.to_json(), s.to_json()])).collect(),
        )
    }
}

fn check_v_occurrences(f: &Formula) -> std::result::Result<(), String> {
    match f {
        Formula::Member(x, y) => {
            if *y == V && *x == V {
                Err("v ∈ v is not of the form x∈v".into())
            } else if *x == V {
                Err(format!("v occurs on the left of ∈ in {f}"))
            } else {
                Ok(())
            }
        }
        Formula::Equal(x, y) => {
            if *x == V || *y == V {
                Err(format!("v occurs in equality {f}"))
            } else {
                Ok(())
            }
        }
        Formula::Not(g) => check_v_occurrences(g),
        Formula::And(g, h) | Formula::Or(g, h) => {
            check_v_occurrences(g)?;
            check_v_occurrences(h)
        }
        Formula::Exists(x, g) | Formula::Forall(x, g) => {
            if *x == V {
                Err(format!("v is bound in {f}"))
            } else {
                check_v_occurrences(g)
            }
        }
    }
}

/// Check every restriction on an instance, with a reason on failure.
pub fn check_instance(inst: &TRInstance) -> Result<()> {
    let bad = |m: String| Err(Error::InvalidInstance(m));
    if !inst.psi.is_nnf() {
        return bad(format!("ψ = {} is not in negation normal form", inst.psi));
    }
    if let Err(m) = check_v_occurrences(&inst.psi) {
        return bad(m);
    }
    let len = 2 + inst.params.len();
    if let Some(x) = inst.psi.free_vars().into_iter().find(|&x| x >= len) {
        return bad(format!("free variable {x} has no parameter (there are {})", inst.params.len()));
    }
    if !inst.order.is_well_founded() {
        return bad("the order is not well founded".into());
    }
    Ok(())
}

/// Whether the instance satisfies the v-occurrence restriction and the
/// order is well founded.
pub fn validate_instance(inst: &TRInstance) -> bool {
    check_instance(inst).is_ok()
}

/// The ambient set for quantifiers: `TC(a ∪ (a×X) ∪ {p₀,…,p_n})`.
pub fn universe(inst: &TRInstance) -> Result<HFSet> {
    let x = HFSet::canon(inst.order.carrier().to_vec())?;
    let base = inst.a.union(&cartesian(&inst.a, &x)?)?.union(&HFSet::canon(inst.params.clone())?)?;
    transitive_closure(&base)
}

fn tau(inst: &TRInstance, c: &HFSet, v: &HFSet) -> Assignment {
    let mut t = vec![c.clone(), v.clone()];
    t.extend(inst.params.iter().cloned());
    t
}

/// Direct recursion along the default topological order.
pub fn tr_direct(inst: &TRInstance) -> Result<TRResult> {
    check_instance(inst)?;
    let order = inst.order.topological_order().expect("validated");
    tr_direct_in_order(inst, &order)
}

/// Direct recursion along a seeded random topological order.
pub fn tr_direct_shuffled(inst: &TRInstance, seed: u64) -> Result<TRResult> {
    check_instance(inst)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let preds = inst.order.predecessors();
    let mut remaining: BTreeMap<HFSet, usize> = preds.iter().map(|(s, p)| (s.clone(), p.len())).collect();
    let mut order = Vec::new();
    let mut ready: Vec<HFSet> = remaining.iter().filter(|(_, &n)| n == 0).map(|(s, _)| s.clone()).collect();
    while !ready.is_empty() {
        ready.shuffle(&mut rng);
        let s = ready.pop().expect("nonempty");
        remaining.remove(&s);
        for (v, u) in inst.order.edges() {
            if *v == s {
                let n = remaining.get_mut(u).expect("not yet emitted");
                *n -= 1;
                if *n == 0 {
                    ready.push(u.clone());
                }
            }
        }
        order.push(s);
    }
    tr_direct_in_order(inst, &order)
}

/// Direct recursion along the given order, which must list every stage
/// after all of its ≺-predecessors.
pub fn tr_direct_in_order(inst: &TRInstance, order: &[HFSet]) -> Result<TRResult> {
    check_instance(inst)?;
    let preds = inst.order.predecessors();
    let mut done = BTreeSet::new();
    for s in order {
        if !preds.get(s).is_some_and(|p| p.iter().all(|t| done.contains(t))) || !done.insert(s.clone()) {
            return Err(Error::InvalidInput(format!("{s} is out of order or not a stage")));
        }
    }
    if done.len() != preds.len() {
        return Err(Error::InvalidInput("the order omits stages".into()));
    }
    let universe = universe(inst)?;
    let mut res = TRResult::default();
    for s in order {
        let below = res.below(&inst.order, s)?;
        for c in inst.a.iter() {
            if eval(&universe, &inst.psi, &tau(inst, c, &below))? {
                res.h.insert((c.clone(), s.clone()));
            }
        }
    }
    Ok(res)
}

/// Re-check the recursion equation at every stage of a result, each stage
/// independently of the others.
pub fn verify_recursion(inst: &TRInstance, res: &TRResult) -> Result<bool> {
    check_instance(inst)?;
    let stages: BTreeSet<&HFSet> = inst.order.carrier().iter().collect();
    if !res.h.iter().all(|(c, s)| inst.a.contains(c) && stages.contains(s)) {
        return Ok(false);
    }
    let universe = universe(inst)?;
    for s in inst.order.carrier() {
        let below = res.below(&inst.order, s)?;
        let slice = res.slice(s);
        for c in inst.a.iter() {
            if eval(&universe, &inst.psi, &tau(inst, c, &below))? != slice.contains(c) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// The tree engine.
// ---------------------------------------------------------------------------

/// Options for [`tr_trees_with`].
#[derive(Clone, Debug)]
pub struct TreeOptions {
    /// Restrict bounded quantifiers `∃x(x∈y ∧ θ)`, `∀x(x∉y ∨ θ)` to the
    /// candidates that can satisfy the bound.  Omitted branches are exactly
    /// those whose subtree collapses to the value already contributed by the
    /// constant branch, so every collapse value is unchanged.
    pub prune_guards: bool,
    pub node_limit: usize,
}

impl Default for TreeOptions {
    fn default() -> Self {
        TreeOptions { prune_guards: true, node_limit: DEFAULT_TR_NODE_LIMIT }
    }
}

/// Subformula arena entry.
struct Sub {
    f: Formula,
    label: Label,
    kids: Vec<usize>,
    has_v: bool,
    /// Free variables other than v, for labels and memo keys.
    fv: Vec<usize>,
    /// For a quantifier bounded by a guard literal, the guard variable.
    guard: Option<usize>,
}

fn guard_of(f: &Formula) -> Option<usize> {
    match f {
        Formula::Forall(x, b) => match &**b {
            Formula::Or(l, _) => match &**l {
                Formula::Not(m) => match &**m {
                    Formula::Member(y, z) if y == x && z != x => Some(*z),
                    _ => None,
                },
                _ => None,
            },
            _ => None,
        },
        Formula::Exists(x, b) => match &**b {
            Formula::And(l, _) => match &**l {
                Formula::Member(y, z) if y == x && z != x => Some(*z),
                _ => None,
            },
            _ => None,
        },
        _ => None,
    }
}

type Stage = Option<HFSet>;

struct TrForest<'a> {
    inst: &'a TRInstance,
    opts: TreeOptions,
    dag: Dag,
    subs: Vec<Sub>,
    preds: BTreeMap<HFSet, Vec<HFSet>>,
    universe: Option<HFSet>,
    top: HashMap<(usize, Stage), NodeId>,
    bot: HashMap<(usize, Stage), NodeId>,
    xin_top: HashMap<HFSet, NodeId>,
    xin_bot: HashMap<HFSet, NodeId>,
    sat: HashMap<(usize, Stage, Vec<HFSet>), NodeId>,
}

impl<'a> TrForest<'a> {
    fn new(inst: &'a TRInstance, opts: TreeOptions) -> TrForest<'a> {
        let mut forest = TrForest {
            inst,
            opts,
            dag: Dag::new(),
            subs: Vec::new(),
            preds: inst.order.predecessors(),
            universe: None,
            top: HashMap::new(),
            bot: HashMap::new(),
            xin_top: HashMap::new(),
            xin_bot: HashMap::new(),
            sat: HashMap::new(),
        };
        let mut index = HashMap::new();
        forest.intern(&inst.psi, &mut index);
        forest
    }

    /// Subformulas get ids bottom-up; ψ itself is the last id.
    fn intern(&mut self, f: &Formula, index: &mut HashMap<Formula, usize>) -> usize {
        if let Some(&i) = index.get(f) {
            return i;
        }
        let kids = f.children().into_iter().map(|g| self.intern(g, index)).collect::<Vec<_>>();
        let has_v = f.free_vars().contains(&V);
        let fv = f.free_vars().into_iter().filter(|&x| x != V).collect();
        self.subs.push(Sub { f: f.clone(), label: Label::str(&f.to_string()), kids, has_v, fv, guard: guard_of(f) });
        index.insert(f.clone(), self.subs.len() - 1);
        self.subs.len() - 1
    }

    fn psi(&self) -> usize {
        self.subs.len() - 1
    }

    fn guard(&self) -> Result<()> {
        if self.dag.len() > self.opts.node_limit {
            Err(Error::size("recursion-tree nodes", self.opts.node_limit))
        } else {
            Ok(())
        }
    }

    fn universe(&mut self) -> Result<HFSet> {
        if self.universe.is_none() {
            self.universe = Some(universe(self.inst)?);
        }
        Ok(self.universe.clone().expect("set above"))
    }

    fn stage_key(&self, k: usize, s: &HFSet) -> Stage {
        self.subs[k].has_v.then(|| s.clone())
    }

    fn preds(&self, s: &HFSet) -> Vec<HFSet> {
        self.preds.get(s).cloned().unwrap_or_default()
    }

    /// `(θ-literal)` is a v-literal: `x∈v` (Some(x, true)) or `x∉v`.
    fn v_literal(&self, k: usize) -> Option<(usize, bool)> {
        match &self.subs[k].f {
            Formula::Member(x, y) if *y == V => Some((*x, true)),
            Formula::Not(g) => match &**g {
                Formula::Member(x, y) if *y == V => Some((*x, false)),
                _ => None,
            },
            _ => None,
        }
    }

    fn literal_top(&mut self) -> NodeId {
        let leaf = self.dag.leaf();
        let z = self.dag.prefix(Label::Int(0), leaf);
        self.dag.node(vec![(Label::Int(0), z), (Label::Int(1), leaf)])
    }

    fn literal_bot(&mut self) -> NodeId {
        let leaf = self.dag.leaf();
        let z = self.dag.prefix(Label::Int(0), leaf);
        self.dag.prefix(Label::Int(0), z)
    }

    fn q0_label(q: &HFSet) -> Label {
        Label::tuple(vec![Label::set(q), Label::Int(0)])
    }

    /// Edges of `⊤^s_{x∈v} = ⋃_{t≺s} (t)⌢(⋃_{q≺s}(⟨q,0⟩)⌢⊥^q_ψ ∪ (s)⌢⊤^t_ψ)`.
    fn xin_top_edges(&mut self, s: &HFSet) -> Result<Vec<(Label, NodeId)>> {
        let preds = self.preds(s);
        let psi = self.psi();
        let mut bots = Vec::new();
        for q in &preds {
            bots.push((Self::q0_label(q), self.tb(psi, q, false)?));
        }
        let mut edges = Vec::new();
        for t in &preds {
            let mut inner = bots.clone();
            inner.push((Label::set(s), self.tb(psi, t, true)?));
            let n = self.dag.node(inner);
            edges.push((Label::set(t), n));
        }
        Ok(edges)
    }

    fn xin_top(&mut self, s: &HFSet) -> Result<NodeId> {
        if let Some(&n) = self.xin_top.get(s) {
            return Ok(n);
        }
        let edges = self.xin_top_edges(s)?;
        let n = self.dag.node(edges);
        self.xin_top.insert(s.clone(), n);
        Ok(n)
    }

    /// `⊥^s_{x∈v} = ⊤^s_{x∈v} ∪ (s)⌢⋃_{t≺s}(⟨t,0⟩)⌢⊥^t_ψ`.
    fn xin_bot(&mut self, s: &HFSet) -> Result<NodeId> {
        if let Some(&n) = self.xin_bot.get(s) {
            return Ok(n);
        }
        let mut edges = self.xin_top_edges(s)?;
        let psi = self.psi();
        let mut inner = Vec::new();
        for t in self.preds(s) {
            inner.push((Self::q0_label(&t), self.tb(psi, &t, false)?));
        }
        let n = self.dag.node(inner);
        edges.push((Label::set(s), n));
        let n = self.dag.node(edges);
        self.xin_bot.insert(s.clone(), n);
        Ok(n)
    }

    /// `⊤^s_θ` (top) or `⊥^s_θ`.
    fn tb(&mut self, k: usize, s: &HFSet, top: bool) -> Result<NodeId> {
        let key = (k, self.stage_key(k, s));
        let memo = if top { &self.top } else { &self.bot };
        if let Some(&n) = memo.get(&key) {
            return Ok(n);
        }
        self.guard()?;
        let f = self.subs[k].f.clone();
        let n = if let Some((_, positive)) = self.v_literal(k) {
            if positive == top {
                self.xin_top(s)?
            } else {
                self.xin_bot(s)?
            }
        } else {
            match &f {
                _ if f.is_literal() => {
                    if top {
                        self.literal_top()
                    } else {
                        self.literal_bot()
                    }
                }
                Formula::And(..) | Formula::Or(..) => {
                    let is_and = matches!(f, Formula::And(..));
                    let (g, h) = (self.subs[k].kids[0], self.subs[k].kids[1]);
                    let (t0, b0) = (self.tb(g, s, true)?, self.tb(g, s, false)?);
                    let (t1, b1) = (self.tb(h, s, true)?, self.tb(h, s, false)?);
                    let mut edges = Vec::new();
                    for (i, x) in [(1, t0), (0, b0)] {
                        for (j, y) in [(1, t1), (0, b1)] {
                            let skip = match (is_and, top) {
                                (true, false) => i == 1 && j == 1,
                                (false, true) => i == 0 && j == 0,
                                _ => false,
                            };
                            if !skip {
                                let o = opair_node(&mut self.dag, x, y);
                                let l = Label::tuple(vec![self.subs[k].label.clone(), Label::Int(i), Label::Int(j)]);
                                edges.push((l, o));
                            }
                        }
                    }
                    self.dag.node(edges)
                }
                Formula::Forall(..) | Formula::Exists(..) => {
                    let is_all = matches!(f, Formula::Forall(..));
                    let g = self.subs[k].kids[0];
                    let mut inner = Vec::new();
                    if is_all || top {
                        inner.push((Label::Int(1), self.tb(g, s, true)?));
                    }
                    if !(is_all && top) {
                        inner.push((Label::Int(0), self.tb(g, s, false)?));
                    }
                    let mid = self.dag.node(inner);
                    self.dag.prefix(self.subs[k].label.clone(), mid)
                }
                _ => unreachable!("validated NNF"),
            }
        };
        let memo = if top { &mut self.top } else { &mut self.bot };
        memo.insert(key, n);
        Ok(n)
    }

    fn sigma_label(&self, k: usize, env: &[HFSet]) -> Label {
        Label::tuple(
            self.subs[k]
                .fv
                .iter()
                .map(|&x| Label::tuple(vec![Label::Int(x as i64), Label::set(&env[x])]))
                .collect(),
        )
    }

    /// `S^s_⟨θ,σ⟩`.
    fn sat(&mut self, k: usize, s: &HFSet, env: &[HFSet]) -> Result<NodeId> {
        let restricted: Vec<HFSet> = self.subs[k].fv.iter().map(|&x| env[x].clone()).collect();
        let key = (k, self.stage_key(k, s), restricted);
        if let Some(&n) = self.sat.get(&key) {
            return Ok(n);
        }
        self.guard()?;
        let f = self.subs[k].f.clone();
        let n = if let Some((x, _)) = self.v_literal(k) {
            let preds = self.preds(s);
            match unpair(&env[x]) {
                Some((c, t)) if self.inst.a.contains(&c) && preds.contains(&t) => {
                    let mut edges = self.xin_top_edges(s)?;
                    let psi = self.psi();
                    let mut inner = Vec::new();
                    for q in &preds {
                        inner.push((Self::q0_label(q), self.tb(psi, q, false)?));
                    }
                    let sub = self.sat(psi, &t, &tau(self.inst, &c, &HFSet::empty()))?;
                    inner.push((Label::set(s), sub));
                    let n = self.dag.node(inner);
                    edges.push((Label::set(s), n));
                    self.dag.node(edges)
                }
                _ => self.xin_bot(s)?,
            }
        } else {
            match &f {
                _ if f.is_literal() => {
                    let holds = eval(&HFSet::empty(), &f, env)?;
                    self.tb(k, s, holds)?
                }
                Formula::And(..) | Formula::Or(..) => {
                    let live = if matches!(f, Formula::And(..)) { (1, 1) } else { (0, 0) };
                    let (g, h) = (self.subs[k].kids[0], self.subs[k].kids[1]);
                    let (t0, b0) = (self.tb(g, s, true)?, self.tb(g, s, false)?);
                    let (t1, b1) = (self.tb(h, s, true)?, self.tb(h, s, false)?);
                    let (s0, s1) = (self.sat(g, s, env)?, self.sat(h, s, env)?);
                    let sl = self.sigma_label(k, env);
                    let mut edges = Vec::new();
                    for (i, x) in [(1, t0), (0, b0)] {
                        for (j, y) in [(1, t1), (0, b1)] {
                            let o = if (i, j) == live {
                                opair_node(&mut self.dag, s0, s1)
                            } else {
                                opair_node(&mut self.dag, x, y)
                            };
                            let l = Label::tuple(vec![self.subs[k].label.clone(), sl.clone(), Label::Int(i), Label::Int(j)]);
                            edges.push((l, o));
                        }
                    }
                    self.dag.node(edges)
                }
                Formula::Forall(x, _) | Formula::Exists(x, _) => {
                    let is_all = matches!(f, Formula::Forall(..));
                    let g = self.subs[k].kids[0];
                    let mut inner = vec![if is_all {
                        (Label::Int(1), self.tb(g, s, true)?)
                    } else {
                        (Label::Int(0), self.tb(g, s, false)?)
                    }];
                    for b in self.candidates(k, s, env)? {
                        let env2 = assign_update(env, *x, &b);
                        let sub = self.sat(g, s, &env2)?;
                        inner.push((Label::tuple(vec![Label::Int(1), Label::set(&b)]), sub));
                    }
                    let mid = self.dag.node(inner);
                    let head = Label::tuple(vec![self.subs[k].label.clone(), self.sigma_label(k, env)]);
                    self.dag.prefix(head, mid)
                }
                _ => unreachable!("validated NNF"),
            }
        };
        self.sat.insert(key, n);
        Ok(n)
    }

    /// Values the quantified variable ranges over in S-trees.
    fn candidates(&mut self, k: usize, s: &HFSet, env: &[HFSet]) -> Result<Vec<HFSet>> {
        match self.subs[k].guard {
            Some(y) if self.opts.prune_guards && y == V => {
                let mut v = Vec::new();
                for t in self.preds(s) {
                    for c in self.inst.a.iter() {
                        v.push(kuratowski(c, &t)?);
                    }
                }
                Ok(v)
            }
            Some(y) if self.opts.prune_guards => Ok(env[y].members().to_vec()),
            _ => Ok(self.universe()?.members().to_vec()),
        }
    }
}

/// Result of one run of the tree engine.
pub struct TreeRun {
    /// For each queried `(c, s)`: whether `c ∈ H_s`.
    pub holds: BTreeMap<(HFSet, HFSet), bool>,
    /// The combined tree.
    pub tree: FiniteTree,
}

/// Build the trees needed to decide the queried pairs, embed them (and
/// `⊤^s_ψ`, `⊥^s_ψ` for every stage) in one combined tree, collapse once and
/// compare.
pub fn tr_trees_query(inst: &TRInstance, queries: &[(HFSet, HFSet)], opts: TreeOptions) -> Result<TreeRun> {
    check_instance(inst)?;
    let mut forest = TrForest::new(inst, opts);
    let psi = forest.psi();
    let psi_label = forest.subs[psi].label.clone();
    let mut root_edges = Vec::new();
    let mut stage_nodes = BTreeMap::new();
    for s in inst.order.carrier() {
        let t = forest.tb(psi, s, true)?;
        let b = forest.tb(psi, s, false)?;
        for (tag, n) in [(1, t), (0, b)] {
            let l = Label::tuple(vec![Label::set(s), psi_label.clone(), Label::Int(tag)]);
            root_edges.push((l, n));
        }
        stage_nodes.insert(s.clone(), (t, b));
    }
    let mut query_nodes = Vec::new();
    for (c, s) in queries {
        if !inst.a.contains(c) || !stage_nodes.contains_key(s) {
            return Err(Error::InvalidInput(format!("query ({c}, {s}) is outside a × X")));
        }
        let env = tau(inst, c, &HFSet::empty());
        let n = forest.sat(psi, s, &env)?;
        let l = Label::tuple(vec![Label::set(s), psi_label.clone(), forest.sigma_label(psi, &env)]);
        root_edges.push((l, n));
        query_nodes.push(((c.clone(), s.clone()), n));
    }
    let mut dag = forest.dag;
    let root = dag.node(root_edges);
    let pi = dag.collapse_from(root)?;
    let value = |n: NodeId| pi[n as usize].clone().expect("reachable from the root");
    let mut holds = BTreeMap::new();
    for ((c, s), n) in query_nodes {
        let (t, b) = stage_nodes[&s];
        let (vt, vb, vs) = (value(t), value(b), value(n));
        if vt == vb {
            return Err(Error::ContractViolation(format!("π⊤ = π⊥ at stage {s}")));
        }
        if vs != vt && vs != vb {
            return Err(Error::ContractViolation(format!("π S at ({c}, {s}) is neither π⊤ nor π⊥")));
        }
        holds.insert((c, s), vs == vt);
    }
    Ok(TreeRun { holds, tree: FiniteTree::new(dag, root) })
}

/// The tree engine over all of `a × X`.
pub fn tr_trees_with(inst: &TRInstance, opts: TreeOptions) -> Result<TRResult> {
    let queries: Vec<(HFSet, HFSet)> = inst
        .order
        .carrier()
        .iter()
        .flat_map(|s| inst.a.iter().map(move |c| (c.clone(), s.clone())))
        .collect();
    let run = tr_trees_query(inst, &queries, opts)?;
    Ok(TRResult { h: run.holds.into_iter().filter(|(_, b)| *b).map(|(k, _)| k).collect() })
}

/// The tree engine with default options.
pub fn tr_trees(inst: &TRInstance) -> Result<TRResult> {
    tr_trees_with(inst, TreeOptions::default())
}

// ---------------------------------------------------------------------------
// Bisimulation from recursion.
// ---------------------------------------------------------------------------

/// The recursion formula used by [`bisim_via_tr`]:
/// `∀o∈u (o ∈ p₀ ∨ ∃x∈o (x ∈ v))`.
pub fn bisim_formula() -> Formula {
    "(all 3 (or (not (in 3 0)) (or (in 3 2) (ex 4 (and (in 4 3) (in 4 1))))))"
        .parse()
        .expect("well-formed")
}

/// The stage code of each node pair `(i, j)` of the bisimulation instance.
pub type PairCodes = BTreeMap<(usize, usize), HFSet>;

/// The recursion instance behind [`bisim_via_tr`], together with the code
/// of each node pair.
///
/// Stages are node pairs of T×T, ordered by `(σ′,τ′) ≺ (σ,τ)` when σ′ and
/// τ′ are children of σ and τ.  The code of a pair is a set holding a
/// distinct tag `{∅, i+2, {j}}` (von Neumann numerals; it contains ∅, which
/// no obligation does) and one obligation per child
/// on either side: the set of diagonal entries `⟨p,p⟩` for the codes p of
/// the pairs that would answer that child.  ψ says every obligation in `u`
/// is met by some entry of `v`; the tags, collected in `p₀`, are skipped.
pub fn bisim_instance(t: &FiniteTree) -> Result<(TRInstance, PairCodes)> {
    let ex = t.explicit_bounded(DEFAULT_BISIM_TR_NODES as u64)?;
    let n = ex.len();
    let mut code: BTreeMap<(usize, usize), HFSet> = BTreeMap::new();
    let diag = |code: &BTreeMap<(usize, usize), HFSet>, i: usize, j: usize| -> Result<HFSet> {
        let p = &code[&(i, j)];
        kuratowski(p, p)
    };
    let ords: Vec<HFSet> = (0..n + 2).map(von_neumann).collect::<Result<_>>()?;
    let mut tags = Vec::new();
    // Children have larger indices than their parents.
    for i in (0..n).rev() {
        for j in (0..n).rev() {
            let tag = HFSet::canon(vec![HFSet::empty(), ords[i + 2].clone(), HFSet::singleton(&ords[j])?])?;
            tags.push(tag.clone());
            let mut members = vec![tag];
            for &ci in &ex.children[i] {
                let o = ex.children[j].iter().map(|&cj| diag(&code, ci, cj)).collect::<Result<_>>()?;
                members.push(HFSet::canon(o)?);
            }
            for &cj in &ex.children[j] {
                let o = ex.children[i].iter().map(|&ci| diag(&code, ci, cj)).collect::<Result<_>>()?;
                members.push(HFSet::canon(o)?);
            }
            code.insert((i, j), HFSet::canon(members)?);
        }
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for &ci in &ex.children[i] {
                for &cj in &ex.children[j] {
                    edges.push((code[&(ci, cj)].clone(), code[&(i, j)].clone()));
                }
            }
        }
    }
    let carrier: Vec<HFSet> = code.values().cloned().collect();
    let a = HFSet::canon(carrier.clone())?;
    let inst = TRInstance {
        a,
        order: CarrierRelation::new(carrier, edges)?,
        psi: bisim_formula(),
        params: vec![HFSet::canon(tags)?],
    };
    Ok((inst, code))
}

/// A bisimulation on `t` obtained by running the tree engine for the
/// recursion of [`bisim_instance`] and keeping the pairs `(σ,τ)` whose
/// diagonal entry `⟨⟨σ,τ⟩,⟨σ,τ⟩⟩` lies in H.  Only diagonal entries are
/// queried; the construction only ever refers to diagonal entries of
/// earlier stages.
pub fn bisim_via_tr(t: &FiniteTree) -> Result<NodeRelation> {
    let (inst, code) = bisim_instance(t)?;
    let queries: Vec<(HFSet, HFSet)> = code.values().map(|p| (p.clone(), p.clone())).collect();
    let run = tr_trees_query(&inst, &queries, TreeOptions::default())?;
    let ex = t.explicit()?;
    let mut r = NodeRelation::new();
    for ((i, j), p) in &code {
        if run.holds[&(p.clone(), p.clone())] {
            r.insert(ex.paths[*i].clone(), ex.paths[*j].clone());
        }
    }
    Ok(r)
}

// ---------------------------------------------------------------------------
// JSON.
// ---------------------------------------------------------------------------

impl TRInstance {
    /// `{"a": set, "order": {"carrier": [set…], "edges": [[set,set]…]},
    /// "psi": "s-expression", "params": [set…]}`; sets use the JSON form of
    /// [`HFSet::to_json`].
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "a": self.a.to_json(),
            "order": {
                "carrier": self.order.carrier().iter().map(HFSet::to_json).collect::<Vec<_>>(),
                "edges": self.order.edges().iter().map(|(v, u)| serde_json::json!([v.to_json(), u.to_json()])).collect::<Vec<_>>(),
            },
            "psi": self.psi.to_string(),
            "params": self.params.iter().map(HFSet::to_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<TRInstance> {
        let field = |k: &str| v.get(k).ok_or_else(|| Error::Json(format!("instance needs \"{k}\"")));
        let sets = |v: &serde_json::Value, what: &str| -> Result<Vec<HFSet>> {
            v.as_array()
                .ok_or_else(|| Error::Json(format!("\"{what}\" must be an array")))?
                .iter()
                .map(HFSet::from_json)
                .collect()
        };
        let order = field("order")?;
        let carrier = sets(order.get("carrier").unwrap_or(&serde_json::Value::Null), "carrier")?;
        let edges = order
            .get("edges")
            .and_then(|e| e.as_array())
            .ok_or_else(|| Error::Json("\"edges\" must be an array".into()))?
            .iter()
            .map(|e| match e.as_array().map(Vec::as_slice) {
                Some([x, y]) => Ok((HFSet::from_json(x)?, HFSet::from_json(y)?)),
                _ => Err(Error::Json("each edge is [v, u]".into())),
            })
            .collect::<Result<Vec<_>>>()?;
        let psi = field("psi")?
            .as_str()
            .ok_or_else(|| Error::Json("\"psi\" is an s-expression string".into()))?
            .parse()?;
        let params = match v.get("params") {
            Some(p) => sets(p, "params")?,
            None => Vec::new(),
        };
        Ok(TRInstance {
            a: HFSet::from_json(field("a")?)?,
            order: CarrierRelation::new(carrier, edges)?,
            psi,
            params,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bisim::maximal_bisimulation;
    use crate::collapse::pair_tree;

    fn set(s: &str) -> HFSet {
        s.parse().unwrap()
    }

    fn chain(stages: &[HFSet]) -> CarrierRelation<HFSet> {
        let edges: Vec<_> = stages.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect();
        CarrierRelation::new(stages.to_vec(), edges).unwrap()
    }

    fn ords(range: std::ops::Range<usize>) -> Vec<HFSet> {
        range.map(|i| von_neumann(i).unwrap()).collect()
    }

    fn both(inst: &TRInstance) -> TRResult {
        let d = tr_direct(inst).unwrap();
        assert!(verify_recursion(inst, &d).unwrap());
        assert_eq!(tr_trees(inst).unwrap(), d);
        assert_eq!(tr_trees_with(inst, TreeOptions { prune_guards: false, ..Default::default() }).unwrap(), d);
        d
    }

    #[test]
    fn validation() {
        let order = chain(&ords(1..2));
        let mk = |psi: &str| TRInstance { a: set("{{}}"), order: order.clone(), psi: psi.parse().unwrap(), params: vec![] };
        assert!(!validate_instance(&mk("(eq 1 1)")));
        assert!(validate_instance(&mk("(in 0 1)")));
        assert!(!validate_instance(&mk("(in 1 0)")));
        assert!(!validate_instance(&mk("(ex 1 (in 0 1))")));
        let cyc = CarrierRelation::new(ords(0..2), vec![(von_neumann(0).unwrap(), von_neumann(1).unwrap()), (von_neumann(1).unwrap(), von_neumann(0).unwrap())]).unwrap();
        assert!(!validate_instance(&TRInstance { order: cyc, ..mk("(in 0 1)") }));
    }

    #[test]
    fn full_slice() {
        let inst = TRInstance { a: set("{{} {{}}}"), order: chain(&ords(1..2)), psi: "(eq 0 0)".parse().unwrap(), params: vec![] };
        let h = both(&inst);
        assert_eq!(h.h.len(), 2);
    }

    #[test]
    fn alternating_slices() {
        let stages = ords(1..5);
        let inst = TRInstance {
            a: set("{{}}"),
            order: chain(&stages),
            psi: "(all 2 (or (not (in 2 1)) (all 3 (or (not (in 3 2)) (not (in 0 3))))))".parse().unwrap(),
            params: vec![],
        };
        let h = both(&inst);
        let sizes: Vec<usize> = stages.iter().map(|s| h.slice(s).len()).collect();
        assert_eq!(sizes, vec![1, 0, 1, 0]);
    }

    #[test]
    fn seeded_base_shifts_up() {
        // Stages are disjoint from a, so "u ∈ some member of some entry of v"
        // says u is in the slice below; at the base, v is empty and u ∈ p₀.
        let stages: Vec<HFSet> = ["{{{{}}}}", "{{{{{}}}}}", "{{{{{{}}}}}}"].iter().map(|s| set(s)).collect();
        let inst = TRInstance {
            a: set("{{} {{}}}"),
            order: chain(&stages),
            psi: "(or (and (in 0 2) (all 3 (not (in 3 1)))) (ex 3 (and (in 3 1) (ex 4 (and (in 4 3) (in 0 4))))))"
                .parse()
                .unwrap(),
            params: vec![set("{{{}}}")],
        };
        let h = both(&inst);
        for s in &stages {
            assert_eq!(h.slice(s).into_iter().collect::<Vec<_>>(), vec![set("{{}}")]);
        }
    }

    #[test]
    fn empty_order() {
        let inst = TRInstance {
            a: set("{{}}"),
            order: CarrierRelation::new(Vec::<HFSet>::new(), vec![]).unwrap(),
            psi: "(in 0 1)".parse().unwrap(),
            params: vec![],
        };
        assert!(both(&inst).h.is_empty());
    }

    #[test]
    fn shuffled_orders_agree() {
        let s = ords(1..6);
        let x = &s;
        let edges = vec![(x[0].clone(), x[2].clone()), (x[1].clone(), x[2].clone()), (x[2].clone(), x[3].clone()), (x[1].clone(), x[4].clone())];
        let inst = TRInstance {
            a: set("{{} {{}}}"),
            order: CarrierRelation::new(s.clone(), edges).unwrap(),
            psi: "(or (in 0 2) (ex 3 (and (in 3 1) (all 4 (or (not (in 4 3)) (not (in 0 4)))))))".parse().unwrap(),
            params: vec![set("{{}}")],
        };
        let d = both(&inst);
        for seed in 0..10 {
            assert_eq!(tr_direct_shuffled(&inst, seed).unwrap(), d);
        }
    }

    #[test]
    fn bisim_examples() {
        let single = FiniteTree::singleton();
        let r = bisim_via_tr(&single).unwrap();
        assert_eq!(r.pairs.into_iter().collect::<Vec<_>>(), vec![(vec![], vec![])]);
        let s = FiniteTree::from_sequences_closed(vec![vec![Label::Int(0), Label::Int(0)], vec![Label::Int(1)]]);
        let p = pair_tree(&s, &s);
        let r = bisim_via_tr(&p).unwrap();
        assert!(r.contains(&[Label::Int(0)], &[Label::Int(1)]));
        assert_eq!(r, maximal_bisimulation(&p).unwrap());
    }

    #[test]
    fn json_round_trip() {
        let inst = TRInstance { a: set("{{}}"), order: chain(&ords(1..3)), psi: "(in 0 2)".parse().unwrap(), params: vec![set("{{}}")] };
        assert_eq!(TRInstance::from_json(&inst.to_json()).unwrap(), inst);
    }
}
