//! Truth-value trees.
//!
//! For each formula θ in negation normal form there are two trees ⊤_θ and
//! ⊥_θ, independent of any structure, and for each assignment σ a
//! satisfaction tree S_⟨θ,σ⟩ over `(a,∈)`, such that
//!
//! ```text
//! (a,∈) ⊨ θ[σ]  ⟺  π S_⟨θ,σ⟩ = π ⊤_θ  ⟺  π S_⟨θ,σ⟩ ≠ π ⊥_θ.
//! ```
//!
//! Truth is therefore decided by collapsing trees.  All trees needed for one
//! question are embedded in a single combined tree, collapsed once.
//!
//! Label scheme (all labels are [`Label`] values):
//! * literal trees use the integer labels 0 and 1;
//! * a binary node of ⊤/⊥ is `⟨θ,i,j⟩`, of S is `⟨θ,σ,i,j⟩`, followed by the
//!   `OPair` labels 0/1;
//! * a quantifier node is the two-label prefix `(θ, b)` for ⊤/⊥ and
//!   `(⟨θ,σ⟩, b)` or `(⟨θ,σ⟩, ⟨1,s⟩)` for S;
//! * formulas appear as their s-expression text, assignments as tuples of
//!   sets;
//! * the combined tree has root edges `θ` then `"top"`, `"bot"` or σ.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::collapse::opair_node;
use crate::error::{Error, Result};
use crate::formula::{assign_update, eval, Assignment, Formula};
use crate::hf::HFSet;
use crate::tree::{Dag, FiniteTree, Label, NodeId};

/// Ceiling on the number of DAG nodes a single truth-tree computation may
/// create.
pub const DEFAULT_TREE_NODE_LIMIT: usize = 4_000_000;

/// The label for a formula.
pub fn formula_label(f: &Formula) -> Label {
    Label::str(&f.to_string())
}

/// The label for an assignment.
pub fn assign_label(s: &[HFSet]) -> Label {
    Label::tuple(s.iter().map(Label::set).collect())
}

fn bin_label(f: &Formula, i: i64, j: i64) -> Label {
    Label::tuple(vec![formula_label(f), Label::Int(i), Label::Int(j)])
}

fn sat_bin_label(f: &Formula, s: &[HFSet], i: i64, j: i64) -> Label {
    Label::tuple(vec![formula_label(f), assign_label(s), Label::Int(i), Label::Int(j)])
}

fn sat_head_label(f: &Formula, s: &[HFSet]) -> Label {
    Label::tuple(vec![formula_label(f), assign_label(s)])
}

fn witness_label(x: &HFSet) -> Label {
    Label::tuple(vec![Label::Int(1), Label::set(x)])
}

fn require_nnf(f: &Formula) -> Result<()> {
    if f.is_nnf() {
        Ok(())
    } else {
        Err(Error::NotNnf(f.to_string()))
    }
}

/// Builder for truth-value trees inside one shared DAG.
pub struct TruthForest {
    dag: Dag,
    a: HFSet,
    top: HashMap<Formula, NodeId>,
    bot: HashMap<Formula, NodeId>,
    sat: HashMap<(Formula, Assignment), NodeId>,
    node_limit: usize,
}

impl TruthForest {
    /// A forest for the structure `(a, ∈)`.
    pub fn new(a: &HFSet) -> TruthForest {
        TruthForest {
            dag: Dag::new(),
            a: a.clone(),
            top: HashMap::new(),
            bot: HashMap::new(),
            sat: HashMap::new(),
            node_limit: DEFAULT_TREE_NODE_LIMIT,
        }
    }

    pub fn with_node_limit(mut self, limit: usize) -> Self {
        self.node_limit = limit;
        self
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn into_dag(self) -> Dag {
        self.dag
    }

    fn guard(&self) -> Result<()> {
        if self.dag.len() > self.node_limit {
            Err(Error::size("truth-tree nodes", self.node_limit))
        } else {
            Ok(())
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

    /// ⊤_θ (θ must be in negation normal form).
    pub fn top(&mut self, f: &Formula) -> Result<NodeId> {
        require_nnf(f)?;
        self.top_or_bot(f, true)
    }

    /// ⊥_θ.
    pub fn bot(&mut self, f: &Formula) -> Result<NodeId> {
        require_nnf(f)?;
        self.top_or_bot(f, false)
    }

    fn top_or_bot(&mut self, f: &Formula, top: bool) -> Result<NodeId> {
        let memo = if top { &self.top } else { &self.bot };
        if let Some(&id) = memo.get(f) {
            return Ok(id);
        }
        self.guard()?;
        let id = match f {
            _ if f.is_literal() => {
                if top {
                    self.literal_top()
                } else {
                    self.literal_bot()
                }
            }
            Formula::And(g, h) | Formula::Or(g, h) => {
                let is_and = matches!(f, Formula::And(..));
                let (t0, b0) = (self.top_or_bot(g, true)?, self.top_or_bot(g, false)?);
                let (t1, b1) = (self.top_or_bot(h, true)?, self.top_or_bot(h, false)?);
                let mut edges = Vec::new();
                for (i, x) in [(1, t0), (0, b0)] {
                    for (j, y) in [(1, t1), (0, b1)] {
                        // ⊤∧ has all four branches, ⊥∧ lacks (1,1);
                        // ⊤∨ lacks (0,0), ⊥∨ has all four.
                        let skip = match (is_and, top) {
                            (true, false) => i == 1 && j == 1,
                            (false, true) => i == 0 && j == 0,
                            _ => false,
                        };
                        if !skip {
                            let o = opair_node(&mut self.dag, x, y);
                            edges.push((bin_label(f, i, j), o));
                        }
                    }
                }
                self.dag.node(edges)
            }
            Formula::Forall(_, g) | Formula::Exists(_, g) => {
                let is_all = matches!(f, Formula::Forall(..));
                let (t, b) = (self.top_or_bot(g, true)?, self.top_or_bot(g, false)?);
                let fl = formula_label(f);
                // ⊤∀ = (θ,1)⌢⊤, ⊥∀ = (θ,1)⌢⊤ ∪ (θ,0)⌢⊥;
                // ⊤∃ = (θ,1)⌢⊤ ∪ (θ,0)⌢⊥, ⊥∃ = (θ,0)⌢⊥.
                let mut inner = Vec::new();
                if is_all || top {
                    inner.push((Label::Int(1), t));
                }
                if !(is_all && top) {
                    inner.push((Label::Int(0), b));
                }
                let mid = self.dag.node(inner);
                self.dag.prefix(fl, mid)
            }
            _ => unreachable!("non-literal negation rejected by require_nnf"),
        };
        let memo = if top { &mut self.top } else { &mut self.bot };
        memo.insert(f.clone(), id);
        Ok(id)
    }

    /// S_⟨θ,σ⟩.
    pub fn sat(&mut self, f: &Formula, s: &[HFSet]) -> Result<NodeId> {
        require_nnf(f)?;
        let needed = f.needed_len();
        if s.len() < needed {
            return Err(Error::AssignmentTooShort { needed, got: s.len() });
        }
        self.sat_rec(f, s)
    }

    fn sat_rec(&mut self, f: &Formula, s: &[HFSet]) -> Result<NodeId> {
        let key = (f.clone(), s.to_vec());
        if let Some(&id) = self.sat.get(&key) {
            return Ok(id);
        }
        self.guard()?;
        let id = match f {
            _ if f.is_literal() => {
                if eval(&self.a, f, s)? {
                    self.top_or_bot(f, true)?
                } else {
                    self.top_or_bot(f, false)?
                }
            }
            Formula::And(g, h) | Formula::Or(g, h) => {
                let is_and = matches!(f, Formula::And(..));
                let (t0, b0) = (self.top_or_bot(g, true)?, self.top_or_bot(g, false)?);
                let (t1, b1) = (self.top_or_bot(h, true)?, self.top_or_bot(h, false)?);
                let (s0, s1) = (self.sat_rec(g, s)?, self.sat_rec(h, s)?);
                // The "live" branch carries OPair(S0,S1): (1,1) for ∧,
                // (0,0) for ∨; the other three are the constant pairs.
                let live = if is_and { (1, 1) } else { (0, 0) };
                let mut edges = Vec::new();
                for (i, x) in [(1, t0), (0, b0)] {
                    for (j, y) in [(1, t1), (0, b1)] {
                        let o = if (i, j) == live {
                            opair_node(&mut self.dag, s0, s1)
                        } else {
                            opair_node(&mut self.dag, x, y)
                        };
                        edges.push((sat_bin_label(f, s, i, j), o));
                    }
                }
                self.dag.node(edges)
            }
            Formula::Forall(x, g) | Formula::Exists(x, g) => {
                let is_all = matches!(f, Formula::Forall(..));
                let mut inner = Vec::new();
                if is_all {
                    inner.push((Label::Int(1), self.top_or_bot(g, true)?));
                } else {
                    inner.push((Label::Int(0), self.top_or_bot(g, false)?));
                }
                let a = self.a.clone();
                for b in a.iter() {
                    let s2 = assign_update(s, *x, b);
                    let sub = self.sat_rec(g, &s2)?;
                    inner.push((witness_label(b), sub));
                }
                let mid = self.dag.node(inner);
                self.dag.prefix(sat_head_label(f, s), mid)
            }
            _ => unreachable!("non-literal negation rejected by require_nnf"),
        };
        self.sat.insert(key, id);
        Ok(id)
    }

    /// Every (θ,σ) whose satisfaction tree has been built.
    pub fn built_sat_pairs(&self) -> Vec<(Formula, Assignment)> {
        let mut v: Vec<_> = self.sat.keys().cloned().collect();
        v.sort();
        v
    }

    /// The combined tree: root edges `θ ⌢ "top"`, `θ ⌢ "bot"` for every
    /// formula with a built ⊤/⊥ tree, and `θ ⌢ σ` for every built
    /// satisfaction tree.
    pub fn combined(&mut self) -> NodeId {
        let mut edges = Vec::new();
        let top: Vec<_> = self.top.iter().map(|(f, &n)| (f.clone(), n)).collect();
        for (f, n) in top {
            let p = self.dag.prefix(Label::str("top"), n);
            edges.push((formula_label(&f), p));
        }
        let bot: Vec<_> = self.bot.iter().map(|(f, &n)| (f.clone(), n)).collect();
        for (f, n) in bot {
            let p = self.dag.prefix(Label::str("bot"), n);
            edges.push((formula_label(&f), p));
        }
        let sat: Vec<_> = self.sat.iter().map(|((f, s), &n)| (f.clone(), s.clone(), n)).collect();
        for (f, s, n) in sat {
            let p = self.dag.prefix(assign_label(&s), n);
            edges.push((formula_label(&f), p));
        }
        self.dag.node(edges)
    }
}

/// ⊤_θ as a standalone tree.
pub fn top_tree(f: &Formula) -> Result<FiniteTree> {
    let mut forest = TruthForest::new(&HFSet::empty());
    let root = forest.top(f)?;
    Ok(FiniteTree::new(forest.into_dag(), root))
}

/// ⊥_θ as a standalone tree.
pub fn bot_tree(f: &Formula) -> Result<FiniteTree> {
    let mut forest = TruthForest::new(&HFSet::empty());
    let root = forest.bot(f)?;
    Ok(FiniteTree::new(forest.into_dag(), root))
}

/// S_⟨θ,σ⟩ over `(a,∈)` as a standalone tree.
pub fn sat_tree(a: &HFSet, f: &Formula, s: &[HFSet]) -> Result<FiniteTree> {
    let mut forest = TruthForest::new(a);
    let root = forest.sat(f, s)?;
    Ok(FiniteTree::new(forest.into_dag(), root))
}

/// Everything produced by one run of the truth-tree construction.
pub struct TruthRun {
    /// The combined tree.
    pub tree: FiniteTree,
    /// `H = {⟨θ,σ⟩ : π(θ,σ) = π(θ,top)}` over every built pair.
    pub holds: BTreeMap<(Formula, Assignment), bool>,
    /// `π ⊤_θ` and `π ⊥_θ` for every subformula.
    pub top_values: BTreeMap<Formula, HFSet>,
    pub bot_values: BTreeMap<Formula, HFSet>,
    /// `π S_⟨θ,σ⟩` for every built pair.
    pub sat_values: BTreeMap<(Formula, Assignment), HFSet>,
}

/// Build the combined tree for `⟨θ,σ⟩`, collapse it once and read off the
/// truth values of every built pair.
pub fn truth_run(a: &HFSet, f: &Formula, s: &[HFSet]) -> Result<TruthRun> {
    let mut forest = TruthForest::new(a);
    forest.sat(f, s)?;
    for g in f.subformulas() {
        forest.top(&g)?;
        forest.bot(&g)?;
    }
    let root = forest.combined();
    let dag = forest.dag().clone();
    let tree = FiniteTree::new(dag, root);
    let pi = tree.dag().collapse_from(root)?;

    // Locate π(θ,top), π(θ,bot), π(θ,σ) by walking the root edges, exactly
    // as the combined tree presents them.
    let mut top_values = BTreeMap::new();
    let mut bot_values = BTreeMap::new();
    let mut sat_values = BTreeMap::new();
    let d = tree.dag();
    let mut by_label: HashMap<Label, NodeId> = HashMap::new();
    for (l, n) in d.children(root) {
        by_label.insert(l.clone(), *n);
    }
    let child = |n: NodeId, l: &Label| -> NodeId {
        let e = d.children(n);
        e[e.binary_search_by(|(x, _)| x.cmp(l)).expect("edge present")].1
    };
    let value = |n: NodeId| pi[n as usize].clone().expect("reachable");
    for g in f.subformulas() {
        let n = by_label[&formula_label(&g)];
        top_values.insert(g.clone(), value(child(n, &Label::str("top"))));
        bot_values.insert(g.clone(), value(child(n, &Label::str("bot"))));
    }
    let mut holds = BTreeMap::new();
    for (g, s2) in forest.built_sat_pairs() {
        let n = by_label[&formula_label(&g)];
        let v = value(child(n, &assign_label(&s2)));
        holds.insert((g.clone(), s2.clone()), v == top_values[&g]);
        sat_values.insert((g, s2), v);
    }
    Ok(TruthRun { tree, holds, top_values, bot_values, sat_values })
}

/// Decide `(a,∈) ⊨ θ[σ]` by collapse.  The formula is converted to negation
/// normal form first.
pub fn truth_via_collapse(a: &HFSet, f: &Formula, s: &[HFSet]) -> Result<bool> {
    let f = f.to_nnf();
    let run = truth_run(a, &f, s)?;
    Ok(run.holds[&(f, s.to_vec())])
}

/// Weighted logical rank: literals 2, binary connectives add 3, quantifiers
/// add 2 — the amounts by which each construction step raises tree height.
pub fn weighted_rank(f: &Formula) -> usize {
    match f {
        _ if f.is_literal() => 2,
        Formula::And(g, h) | Formula::Or(g, h) => 3 + weighted_rank(g).max(weighted_rank(h)),
        Formula::Forall(_, g) | Formula::Exists(_, g) => 2 + weighted_rank(g),
        Formula::Not(g) => weighted_rank(g),
        _ => unreachable!(),
    }
}

/// Ordinary logical rank: literals 0, each connective or quantifier adds 1.
pub fn plain_rank(f: &Formula) -> usize {
    match f {
        _ if f.is_literal() => 0,
        Formula::And(g, h) | Formula::Or(g, h) => 1 + plain_rank(g).max(plain_rank(h)),
        Formula::Forall(_, g) | Formula::Exists(_, g) | Formula::Not(g) => 1 + plain_rank(g),
        _ => unreachable!(),
    }
}

/// Outcome of [`truth_distinctness_report`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistinctnessReport {
    /// π⊤_θ ≠ π⊥_ψ for all θ, ψ in the corpus.
    pub distinct: bool,
    /// A pair `(θ, ψ)` with π⊤_θ = π⊥_ψ, if any.
    pub collision: Option<(Formula, Formula)>,
    /// π⊤_θ ≠ π⊥_θ for every θ in the corpus.
    pub same_formula_distinct: bool,
    /// height(⊤_θ) = height(⊥_θ) for every θ.
    pub top_bot_heights_equal: bool,
    /// Equal weighted rank ⟺ equal height, for all pairs.
    pub weighted_rank_matches_height: bool,
    /// Equal plain rank ⟺ equal height, for all pairs.
    pub plain_rank_matches_height: bool,
    /// A pair witnessing failure of the plain-rank reading, if any.
    pub plain_rank_counterexample: Option<(Formula, Formula)>,
}

/// Check the distinctness observation and its rank remark on a corpus.
pub fn truth_distinctness_report(corpus: &[Formula]) -> Result<DistinctnessReport> {
    let mut forest = TruthForest::new(&HFSet::empty());
    let mut tops = Vec::new();
    let mut bots = Vec::new();
    for f in corpus {
        tops.push(forest.top(f)?);
        bots.push(forest.bot(f)?);
    }
    // Collapse everything at once through an artificial root.
    let mut d = forest.into_dag();
    let edges = tops.iter().chain(bots.iter()).enumerate().map(|(i, n)| (Label::Int(i as i64), *n)).collect();
    let r = d.node(edges);
    let pi = d.collapse_from(r)?;
    let value = |n: &NodeId| pi[*n as usize].clone().expect("reachable");
    let mut top_of: BTreeMap<HFSet, usize> = BTreeMap::new();
    for (i, n) in tops.iter().enumerate() {
        top_of.entry(value(n)).or_insert(i);
    }
    let collision = bots
        .iter()
        .enumerate()
        .find_map(|(j, n)| top_of.get(&value(n)).map(|&i| (corpus[i].clone(), corpus[j].clone())));
    let distinct = collision.is_none();
    let same_formula_distinct = tops.iter().zip(&bots).all(|(t, b)| value(t) != value(b));

    let heights: Vec<(usize, usize)> = tops.iter().zip(&bots).map(|(t, b)| (d.height(*t), d.height(*b))).collect();
    let top_bot_heights_equal = heights.iter().all(|(t, b)| t == b);

    // Group by rank / height and compare the partitions.
    let mut by_height: BTreeMap<usize, usize> = BTreeMap::new();
    let mut weighted_ok = true;
    let mut plain_rank_height: BTreeMap<usize, usize> = BTreeMap::new();
    let mut plain_ok = true;
    let mut counterexample = None;
    let mut plain_witness: BTreeMap<usize, &Formula> = BTreeMap::new();
    for (f, (h, _)) in corpus.iter().zip(&heights) {
        let w = weighted_rank(f);
        if *by_height.entry(w).or_insert(*h) != *h || w != *h {
            weighted_ok = false;
        }
        let p = plain_rank(f);
        match plain_rank_height.get(&p) {
            Some(&h0) if h0 != *h => {
                plain_ok = false;
                if counterexample.is_none() {
                    counterexample = Some((plain_witness[&p].clone(), f.clone()));
                }
            }
            Some(_) => {}
            None => {
                plain_rank_height.insert(p, *h);
                plain_witness.insert(p, f);
            }
        }
    }
    Ok(DistinctnessReport {
        distinct,
        collision,
        same_formula_distinct,
        top_bot_heights_equal,
        weighted_rank_matches_height: weighted_ok,
        plain_rank_matches_height: plain_ok,
        plain_rank_counterexample: counterexample,
    })
}

/// π⊤_θ ≠ π⊥_ψ for all pairs of the corpus, together with the rank remark
/// read with [`weighted_rank`].
pub fn truth_distinctness(corpus: &[Formula]) -> Result<bool> {
    let r = truth_distinctness_report(corpus)?;
    Ok(r.distinct && r.top_bot_heights_equal && r.weighted_rank_matches_height)
}

/// All NNF formulas of size ≤ `max_size` whose variables (free and bound)
/// are drawn from `0..vars`.
pub fn nnf_corpus(max_size: usize, vars: usize) -> Vec<Formula> {
    let mut by_size: Vec<Vec<Formula>> = vec![Vec::new(); max_size + 1];
    for size in 1..=max_size {
        let mut out = Vec::new();
        if size == 1 {
            for i in 0..vars {
                for j in 0..vars {
                    out.push(Formula::member(i, j));
                    out.push(Formula::equal(i, j));
                }
            }
        }
        if size == 2 {
            for i in 0..vars {
                for j in 0..vars {
                    out.push(Formula::not(Formula::member(i, j)));
                    out.push(Formula::not(Formula::equal(i, j)));
                }
            }
        }
        if size >= 2 {
            for g in &by_size[size - 1] {
                for x in 0..vars {
                    out.push(Formula::exists(x, g.clone()));
                    out.push(Formula::forall(x, g.clone()));
                }
            }
        }
        for l in 1..size.saturating_sub(1) {
            let r = size - 1 - l;
            for g in &by_size[l] {
                for h in &by_size[r] {
                    out.push(Formula::and(g.clone(), h.clone()));
                    out.push(Formula::or(g.clone(), h.clone()));
                }
            }
        }
        by_size[size] = out;
    }
    by_size.into_iter().flatten().collect()
}

// ---------------------------------------------------------------------------
// Local validation.
// ---------------------------------------------------------------------------

/// A description of a subtree by the construction rules, used to re-derive
/// the allowed successors of a node from the labels on its path alone.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Desc {
    Leaf,
    Prefix(Label, Box<Desc>),
    Top(Formula),
    Bot(Formula),
    Sat(Formula, Assignment),
    Pair(Box<Desc>, Box<Desc>),
}

fn opair(x: Desc, y: Desc) -> Desc {
    Desc::Pair(
        Box::new(Desc::Pair(Box::new(x.clone()), Box::new(x.clone()))),
        Box::new(Desc::Pair(Box::new(x), Box::new(y))),
    )
}

/// Outgoing edges of the root of a described subtree (labels may repeat;
/// repeated labels denote a union).
fn expand(a: &HFSet, d: &Desc) -> Result<Vec<(Label, Desc)>> {
    let zero_chain = || Desc::Prefix(Label::Int(0), Box::new(Desc::Leaf));
    Ok(match d {
        Desc::Leaf => vec![],
        Desc::Prefix(l, sub) => vec![(l.clone(), (**sub).clone())],
        Desc::Pair(x, y) => vec![(Label::Int(0), (**x).clone()), (Label::Int(1), (**y).clone())],
        Desc::Top(f) | Desc::Bot(f) => {
            let top = matches!(d, Desc::Top(_));
            match f {
                _ if f.is_literal() => {
                    if top {
                        vec![(Label::Int(0), zero_chain()), (Label::Int(1), Desc::Leaf)]
                    } else {
                        vec![(Label::Int(0), zero_chain())]
                    }
                }
                Formula::And(g, h) | Formula::Or(g, h) => {
                    let is_and = matches!(f, Formula::And(..));
                    let excluded = match (is_and, top) {
                        (true, false) => Some((1, 1)),
                        (false, true) => Some((0, 0)),
                        _ => None,
                    };
                    let mut v = Vec::new();
                    for i in [1, 0] {
                        for j in [1, 0] {
                            if Some((i, j)) == excluded {
                                continue;
                            }
                            let x = if i == 1 { Desc::Top((**g).clone()) } else { Desc::Bot((**g).clone()) };
                            let y = if j == 1 { Desc::Top((**h).clone()) } else { Desc::Bot((**h).clone()) };
                            v.push((bin_label(f, i, j), opair(x, y)));
                        }
                    }
                    v
                }
                Formula::Forall(_, g) | Formula::Exists(_, g) => {
                    let is_all = matches!(f, Formula::Forall(..));
                    let one = Desc::Prefix(Label::Int(1), Box::new(Desc::Top((**g).clone())));
                    let zero = Desc::Prefix(Label::Int(0), Box::new(Desc::Bot((**g).clone())));
                    let branches = match (is_all, top) {
                        (true, true) => vec![one],
                        (true, false) | (false, true) => vec![one, zero],
                        (false, false) => vec![zero],
                    };
                    branches.into_iter().map(|b| (formula_label(f), b)).collect()
                }
                _ => return Err(Error::NotNnf(f.to_string())),
            }
        }
        Desc::Sat(f, s) => match f {
            _ if f.is_literal() => {
                // Atomic facts are the only structure-dependent input.
                let d2 = if eval(a, f, s)? { Desc::Top(f.clone()) } else { Desc::Bot(f.clone()) };
                expand(a, &d2)?
            }
            Formula::And(g, h) | Formula::Or(g, h) => {
                let live = if matches!(f, Formula::And(..)) { (1, 1) } else { (0, 0) };
                let mut v = Vec::new();
                for i in [1, 0] {
                    for j in [1, 0] {
                        let pair = if (i, j) == live {
                            opair(Desc::Sat((**g).clone(), s.clone()), Desc::Sat((**h).clone(), s.clone()))
                        } else {
                            let x = if i == 1 { Desc::Top((**g).clone()) } else { Desc::Bot((**g).clone()) };
                            let y = if j == 1 { Desc::Top((**h).clone()) } else { Desc::Bot((**h).clone()) };
                            opair(x, y)
                        };
                        v.push((sat_bin_label(f, s, i, j), pair));
                    }
                }
                v
            }
            Formula::Forall(x, g) | Formula::Exists(x, g) => {
                let head = sat_head_label(f, s);
                let mut v = vec![if matches!(f, Formula::Forall(..)) {
                    (head.clone(), Desc::Prefix(Label::Int(1), Box::new(Desc::Top((**g).clone()))))
                } else {
                    (head.clone(), Desc::Prefix(Label::Int(0), Box::new(Desc::Bot((**g).clone()))))
                }];
                for b in a.iter() {
                    let s2 = assign_update(s, *x, b);
                    v.push((head.clone(), Desc::Prefix(witness_label(b), Box::new(Desc::Sat((**g).clone(), s2)))));
                }
                v
            }
            _ => return Err(Error::NotNnf(f.to_string())),
        },
    })
}

fn successors(a: &HFSet, state: &[Desc]) -> Result<BTreeMap<Label, Vec<Desc>>> {
    let mut out: BTreeMap<Label, Vec<Desc>> = BTreeMap::new();
    for d in state {
        for (l, d2) in expand(a, d)? {
            let e = out.entry(l).or_default();
            if !e.contains(&d2) {
                e.push(d2);
            }
        }
    }
    Ok(out)
}

fn parse_formula_label(l: &Label) -> Option<Formula> {
    match l {
        Label::Str(s) => s.parse().ok(),
        _ => None,
    }
}

fn parse_assign_label(l: &Label) -> Option<Assignment> {
    match l {
        Label::Tuple(items) => items
            .iter()
            .map(|x| match x {
                Label::Set(s) => Some(s.clone()),
                _ => None,
            })
            .collect(),
        _ => None,
    }
}

/// Re-derive every node of a combined tree from the construction rules.
///
/// The first two levels are checked for well-formedness (a formula label,
/// then `"top"`, `"bot"` or an assignment with values in `a` that is long
/// enough).  Below that, each node's set of successor labels must equal the
/// set the rules prescribe given only the labels on the path to it.
/// Returns the number of (node, rule-state) pairs examined.
pub fn validate_combined(tree: &FiniteTree, a: &HFSet) -> Result<usize> {
    let d = tree.dag();
    let mut checked = 0usize;
    let mut seen: BTreeSet<(NodeId, Vec<String>)> = BTreeSet::new();
    for (fl, n) in d.children(tree.root()) {
        let f = parse_formula_label(fl)
            .ok_or_else(|| Error::ContractViolation(format!("root edge {fl} is not a formula")))?;
        if !f.is_nnf() {
            return Err(Error::ContractViolation(format!("formula {f} is not in NNF")));
        }
        for (kind, m) in d.children(*n) {
            let state = match kind {
                Label::Str(s) if s.as_ref() == "top" => Desc::Top(f.clone()),
                Label::Str(s) if s.as_ref() == "bot" => Desc::Bot(f.clone()),
                other => {
                    let s = parse_assign_label(other)
                        .ok_or_else(|| Error::ContractViolation(format!("bad second label {other}")))?;
                    if s.len() < f.needed_len() || !s.iter().all(|x| a.contains(x)) {
                        return Err(Error::ContractViolation(format!("assignment {other} invalid for {f}")));
                    }
                    Desc::Sat(f.clone(), s)
                }
            };
            let mut stack = vec![(*m, vec![state])];
            while let Some((node, state)) = stack.pop() {
                let key = (node, state.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>());
                if !seen.insert(key) {
                    continue;
                }
                checked += 1;
                let expected = successors(a, &state)?;
                let actual = d.children(node);
                let exp_labels: Vec<&Label> = expected.keys().collect();
                let act_labels: Vec<&Label> = actual.iter().map(|(l, _)| l).collect();
                if exp_labels != act_labels {
                    return Err(Error::ContractViolation(format!(
                        "node below {fl}/{kind}: rules allow {exp_labels:?}, tree has {act_labels:?}"
                    )));
                }
                for (l, c) in actual {
                    stack.push((*c, expected[l].clone()));
                }
            }
        }
    }
    Ok(checked)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> Formula {
        s.parse().unwrap()
    }

    fn set(s: &str) -> HFSet {
        s.parse().unwrap()
    }

    #[test]
    fn literal_values_match_the_printed_ones() {
        let t = top_tree(&f("(in 0 1)")).unwrap();
        let b = bot_tree(&f("(in 0 1)")).unwrap();
        assert_eq!(t.root_collapse().unwrap(), set("{{{}} {}}"));
        assert_eq!(b.root_collapse().unwrap(), set("{{{}}}"));
        assert_eq!(t.node_count(), 4);
        assert_eq!(b.node_count(), 3);
    }

    #[test]
    fn disjunction_top_is_three_ordered_pairs() {
        use crate::hf::kuratowski;
        let (g, h) = (f("(in 0 1)"), f("(eq 0 1)"));
        let d = Formula::or(g.clone(), h.clone());
        let pt = |x: &Formula| top_tree(x).unwrap().root_collapse().unwrap();
        let pb = |x: &Formula| bot_tree(x).unwrap().root_collapse().unwrap();
        let expected = HFSet::canon(vec![
            kuratowski(&pt(&g), &pt(&h)).unwrap(),
            kuratowski(&pt(&g), &pb(&h)).unwrap(),
            kuratowski(&pb(&g), &pt(&h)).unwrap(),
        ])
        .unwrap();
        assert_eq!(pt(&d), expected);
    }

    #[test]
    fn true_literal_sat_tree_is_top_tree() {
        let a = set("{{} {{}}}");
        let s = vec![HFSet::empty(), set("{{}}")];
        let g = f("(in 0 1)");
        assert!(sat_tree(&a, &g, &s).unwrap().same_nodes(&top_tree(&g).unwrap()));
    }

    #[test]
    fn existential_examples() {
        let a = set("{{} {{}}}");
        let g = f("(ex 0 (in 0 1))");
        let top = top_tree(&g).unwrap().root_collapse().unwrap();
        let bot = bot_tree(&g).unwrap().root_collapse().unwrap();
        let yes = sat_tree(&a, &g, &[HFSet::empty(), set("{{}}")]).unwrap().root_collapse().unwrap();
        let no = sat_tree(&a, &g, &[HFSet::empty(), HFSet::empty()]).unwrap().root_collapse().unwrap();
        assert_eq!(yes, top);
        assert_eq!(no, bot);
    }

    #[test]
    fn tautology() {
        let g = f("(or (in 0 1) (not (in 0 1)))");
        let a = set("{{} {{}}}");
        for s in crate::formula::assignments(&a, 2) {
            assert!(truth_via_collapse(&a, &g, &s).unwrap());
        }
    }

    #[test]
    fn non_nnf_is_rejected() {
        assert!(matches!(top_tree(&f("(not (and (in 0 1) (in 1 0)))")), Err(Error::NotNnf(_))));
    }

    #[test]
    fn combined_tree_validates() {
        let a = set("{{} {{}}}");
        let g = f("(all 2 (or (in 2 1) (ex 0 (and (in 0 2) (not (eq 0 1))))))");
        let run = truth_run(&a, &g, &[HFSet::empty(), set("{{}}")]).unwrap();
        assert!(validate_combined(&run.tree, &a).unwrap() > 0);
    }

    #[test]
    fn ranks_and_heights() {
        let g = f("(in 0 1)");
        let gg = Formula::and(g.clone(), g.clone());
        let r = truth_distinctness_report(&[g.clone(), gg]).unwrap();
        assert!(r.distinct && r.top_bot_heights_equal && r.weighted_rank_matches_height);
        let r = truth_distinctness_report(&[Formula::forall(0, g.clone()), Formula::and(g.clone(), g)]).unwrap();
        assert!(r.distinct);
        assert!(!r.plain_rank_matches_height);
    }
}
