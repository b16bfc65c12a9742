//! Well-founded relations and their collapsing functions.
//!
//! For a well-founded relation R on a finite carrier X the collapsing
//! function is the unique π with `π(u) = {π(v) : ⟨v,u⟩ ∈ R}`.  It is computed
//! in one pass over a topological order; the canonical set table gives the
//! extensional identifications for free.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Debug;

use crate::error::{Error, Result};
use crate::hf::{kuratowski, von_neumann, HFSet};
use crate::tree::{Dag, FiniteTree, Label, NodeId, Path};

/// Default bound on the truncation parameter of
/// [`addition_graph_via_collapse`].
pub const DEFAULT_ADDITION_BOUND: usize = 8;

/// A finite carrier with an edge relation; an edge `(v, u)` means v is
/// R-below u.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CarrierRelation<L: Ord> {
    carrier: Vec<L>,
    edges: BTreeSet<(L, L)>,
}

impl<L: Ord + Clone + Debug> CarrierRelation<L> {
    /// Build a relation; duplicate carrier entries and edges are merged.
    /// Fails if an edge mentions a label outside the carrier.
    pub fn new(carrier: impl IntoIterator<Item = L>, edges: impl IntoIterator<Item = (L, L)>) -> Result<Self> {
        let carrier: BTreeSet<L> = carrier.into_iter().collect();
        let edges: BTreeSet<(L, L)> = edges.into_iter().collect();
        for (v, u) in &edges {
            for x in [v, u] {
                if !carrier.contains(x) {
                    return Err(Error::InvalidInput(format!("edge endpoint {x:?} is not in the carrier")));
                }
            }
        }
        Ok(CarrierRelation { carrier: carrier.into_iter().collect(), edges })
    }

    /// Carrier in increasing order.
    pub fn carrier(&self) -> &[L] {
        &self.carrier
    }

    pub fn edges(&self) -> &BTreeSet<(L, L)> {
        &self.edges
    }

    fn index(&self, x: &L) -> usize {
        self.carrier.binary_search(x).expect("endpoint validated at construction")
    }

    /// `preds[u]` lists the v with ⟨v,u⟩ ∈ R, `succs[v]` the u.
    fn adjacency(&self) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
        let n = self.carrier.len();
        let (mut preds, mut succs) = (vec![Vec::new(); n], vec![Vec::new(); n]);
        for (v, u) in &self.edges {
            let (vi, ui) = (self.index(v), self.index(u));
            preds[ui].push(vi);
            succs[vi].push(ui);
        }
        (preds, succs)
    }

    /// Carrier indices in an order where every v precedes each u with
    /// ⟨v,u⟩ ∈ R, or `None` if there is a cycle.
    fn topological(&self) -> Option<Vec<usize>> {
        let (preds, succs) = self.adjacency();
        let mut indeg: Vec<usize> = preds.iter().map(Vec::len).collect();
        let mut queue: VecDeque<usize> = (0..indeg.len()).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(indeg.len());
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &u in &succs[v] {
                indeg[u] -= 1;
                if indeg[u] == 0 {
                    queue.push_back(u);
                }
            }
        }
        (order.len() == indeg.len()).then_some(order)
    }

    /// Carrier elements in an order where every v precedes each u with
    /// ⟨v,u⟩ ∈ R, or `None` if there is a cycle.
    pub fn topological_order(&self) -> Option<Vec<L>> {
        Some(self.topological()?.into_iter().map(|i| self.carrier[i].clone()).collect())
    }

    /// For each carrier element u, the v with ⟨v,u⟩ ∈ R (in increasing order).
    pub fn predecessors(&self) -> BTreeMap<L, Vec<L>> {
        let mut m: BTreeMap<L, Vec<L>> = self.carrier.iter().map(|x| (x.clone(), Vec::new())).collect();
        for (v, u) in &self.edges {
            m.get_mut(u).expect("validated").push(v.clone());
        }
        m
    }

    /// Finite well-foundedness is acyclicity.
    pub fn is_well_founded(&self) -> bool {
        self.topological().is_some()
    }

    /// A canonical cycle, if any: the least carrier element lying on a
    /// cycle, followed by the lexicographically least shortest path back to
    /// it along the edges.
    pub fn find_cycle(&self) -> Option<Vec<L>> {
        if self.is_well_founded() {
            return None;
        }
        let (_, succs) = self.adjacency();
        let succs: Vec<Vec<usize>> = succs
            .into_iter()
            .map(|mut s| {
                s.sort_unstable();
                s
            })
            .collect();
        for start in 0..self.carrier.len() {
            // Breadth-first search visiting successors in label order.
            let mut parent: Vec<Option<usize>> = vec![None; self.carrier.len()];
            let mut seen = vec![false; self.carrier.len()];
            let mut queue = VecDeque::from([start]);
            let mut closing = None;
            'bfs: while let Some(x) = queue.pop_front() {
                for &y in &succs[x] {
                    if y == start {
                        closing = Some(x);
                        break 'bfs;
                    }
                    if !seen[y] {
                        seen[y] = true;
                        parent[y] = Some(x);
                        queue.push_back(y);
                    }
                }
            }
            if let Some(mut x) = closing {
                let mut rev = vec![];
                while x != start {
                    rev.push(x);
                    x = parent[x].expect("bfs tree");
                }
                rev.push(start);
                rev.reverse();
                return Some(rev.into_iter().map(|i| self.carrier[i].clone()).collect());
            }
        }
        unreachable!("a relation with no topological order has a cycle")
    }

    /// The collapsing function.
    pub fn collapse(&self) -> Result<BTreeMap<L, HFSet>> {
        let Some(order) = self.topological() else {
            let cycle = self.find_cycle().expect("cyclic");
            return Err(Error::NotWellFounded { cycle: cycle.iter().map(|x| format!("{x:?}")).collect() });
        };
        let (preds, _) = self.adjacency();
        let mut pi: Vec<Option<HFSet>> = vec![None; self.carrier.len()];
        for u in order {
            let members = preds[u]
                .iter()
                .map(|&v| pi[v].clone().expect("predecessors come first"))
                .collect();
            pi[u] = Some(HFSet::canon(members)?);
        }
        Ok(self
            .carrier
            .iter()
            .cloned()
            .zip(pi.into_iter().map(|p| p.expect("every node visited")))
            .collect())
    }

    /// Check the collapse equation for a candidate map.
    pub fn satisfies_collapse_equation(&self, pi: &BTreeMap<L, HFSet>) -> Result<bool> {
        if pi.len() != self.carrier.len() || !self.carrier.iter().all(|x| pi.contains_key(x)) {
            return Ok(false);
        }
        let (preds, _) = self.adjacency();
        for (u, ps) in preds.iter().enumerate() {
            let expected = HFSet::canon(ps.iter().map(|&v| pi[&self.carrier[v]].clone()).collect())?;
            if expected != pi[&self.carrier[u]] {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Length of the longest descending edge chain ending at each element.
    pub fn chain_heights(&self) -> Option<BTreeMap<L, usize>> {
        let order = self.topological()?;
        let (preds, _) = self.adjacency();
        let mut h = vec![0usize; self.carrier.len()];
        for u in order {
            h[u] = preds[u].iter().map(|&v| h[v] + 1).max().unwrap_or(0);
        }
        Some(self.carrier.iter().cloned().zip(h).collect())
    }
}

impl CarrierRelation<Label> {
    /// JSON form `{"carrier": [...], "edges": [[v,u], ...]}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "carrier": self.carrier.iter().map(Label::to_json).collect::<Vec<_>>(),
            "edges": self.edges.iter().map(|(v, u)| serde_json::json!([v.to_json(), u.to_json()])).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let carrier = v
            .get("carrier")
            .and_then(|c| c.as_array())
            .ok_or_else(|| Error::Json("relation needs a \"carrier\" array".into()))?
            .iter()
            .map(Label::from_json)
            .collect::<Result<Vec<_>>>()?;
        let edges = v
            .get("edges")
            .and_then(|c| c.as_array())
            .ok_or_else(|| Error::Json("relation needs an \"edges\" array".into()))?
            .iter()
            .map(|e| match e.as_array().map(Vec::as_slice) {
                Some([a, b]) => Ok((Label::from_json(a)?, Label::from_json(b)?)),
                _ => Err(Error::Json("each edge is a two-element array [v, u]".into())),
            })
            .collect::<Result<Vec<_>>>()?;
        CarrierRelation::new(carrier, edges)
    }
}

/// The membership relation restricted to `TC({x})`.
pub fn membership_relation(x: &HFSet) -> Result<CarrierRelation<HFSet>> {
    let tc = crate::hf::transitive_closure(&HFSet::singleton(x)?)?;
    let edges: Vec<(HFSet, HFSet)> = tc
        .iter()
        .flat_map(|u| u.iter().map(move |v| (v.clone(), u.clone())))
        .collect();
    CarrierRelation::new(tc.iter().cloned(), edges)
}

/// Collapse of a tree under the immediate-successor relation, one entry per
/// node.
pub fn tree_collapse(t: &FiniteTree) -> Result<BTreeMap<Path, HFSet>> {
    let ex = t.explicit()?;
    let pi = t.dag().collapse_from(t.root())?;
    Ok(ex
        .paths
        .into_iter()
        .zip(ex.dag_node)
        .map(|(p, n)| (p, pi[n as usize].clone().expect("reachable")))
        .collect())
}

/// `Pair(T0,T1) = (0)⌢T0 ∪ (1)⌢T1`.
pub fn pair_tree(t0: &FiniteTree, t1: &FiniteTree) -> FiniteTree {
    let mut dag = Dag::new();
    let a = dag.import(t0.dag(), t0.root());
    let b = dag.import(t1.dag(), t1.root());
    let root = pair_node(&mut dag, a, b);
    FiniteTree::new(dag, root)
}

/// `OPair(T0,T1) = Pair(Pair(T0,T0), Pair(T0,T1))`.
pub fn opair_tree(t0: &FiniteTree, t1: &FiniteTree) -> FiniteTree {
    let mut dag = Dag::new();
    let a = dag.import(t0.dag(), t0.root());
    let b = dag.import(t1.dag(), t1.root());
    let root = opair_node(&mut dag, a, b);
    FiniteTree::new(dag, root)
}

/// [`pair_tree`] inside an existing store.
pub fn pair_node(dag: &mut Dag, a: NodeId, b: NodeId) -> NodeId {
    dag.node(vec![(Label::Int(0), a), (Label::Int(1), b)])
}

/// [`opair_tree`] inside an existing store.
pub fn opair_node(dag: &mut Dag, a: NodeId, b: NodeId) -> NodeId {
    let aa = pair_node(dag, a, a);
    let ab = pair_node(dag, a, b);
    pair_node(dag, aa, ab)
}

/// The k-truncated eight-rule relation whose collapse at ⟨0,0,0⟩ is the
/// graph of addition on `{0..k-1}²`.
///
/// Carrier: `{0..7} × {0..k-1}²`.  The rules are instantiated only for
/// indices below k; this is enough because every rule for a triple with
/// indices below k only mentions triples with indices below k.
pub fn addition_relation(k: usize) -> Result<CarrierRelation<(usize, usize, usize)>> {
    let mut carrier = Vec::new();
    for t in 0..8 {
        for n in 0..k {
            for m in 0..k {
                carrier.push((t, n, m));
            }
        }
    }
    carrier.push((0, 0, 0));
    let mut edges = Vec::new();
    for n in 0..k {
        for m in 0..k {
            edges.push(((1, n, m), (0, 0, 0)));
            edges.push(((2, n, m), (1, n, m)));
            edges.push(((3, n, m), (1, n, m)));
            edges.push(((4, n, m), (2, n, m)));
            edges.push(((4, n, m), (3, n, m)));
            edges.push(((7, n, m), (3, n, m)));
            edges.push(((5, n, 0), (4, n, m)));
            edges.push(((6, n, m), (4, n, m)));
            edges.push(((7, n, 0), (6, n, m)));
            edges.push(((7, m, 0), (6, n, m)));
            for i in 0..n {
                edges.push(((7, i, 0), (7, n, m)));
            }
            for j in 0..m {
                edges.push(((7, n, j), (7, n, m)));
            }
        }
        edges.push(((7, n, 0), (5, n, 0)));
    }
    CarrierRelation::new(carrier, edges)
}

/// `π⟨0,0,0⟩` of the k-truncated addition relation.
pub fn addition_graph_via_collapse(k: usize) -> Result<HFSet> {
    addition_graph_via_collapse_bounded(k, DEFAULT_ADDITION_BOUND)
}

pub fn addition_graph_via_collapse_bounded(k: usize, bound: usize) -> Result<HFSet> {
    if k > bound {
        return Err(Error::size(format!("addition graph truncation k={k}"), bound));
    }
    if k == 0 {
        return Ok(HFSet::empty());
    }
    let pi = addition_relation(k)?.collapse()?;
    Ok(pi[&(0, 0, 0)].clone())
}

/// The addition graph computed directly: `{⟨⟨n,m⟩,n+m⟩ : n,m < k}`.
pub fn addition_graph_direct(k: usize) -> Result<HFSet> {
    let mut v = Vec::new();
    for n in 0..k {
        for m in 0..k {
            let nm = kuratowski(&von_neumann(n)?, &von_neumann(m)?)?;
            v.push(kuratowski(&nm, &von_neumann(n + m)?)?);
        }
    }
    HFSet::canon(v)
}

/// The Ackermann relation `{⟨i,j⟩ : bit i of j is 1}` on `{0..2^bits-1}`.
pub fn ackermann_relation(bits: u32) -> Result<CarrierRelation<u64>> {
    if bits > 16 {
        return Err(Error::size(format!("Ackermann relation on {bits} bits"), 16));
    }
    let n = 1u64 << bits;
    let edges = (0..n).flat_map(|j| (0..n).filter(move |&i| i < 64 && (j >> i) & 1 == 1).map(move |i| (i, j)));
    CarrierRelation::new(0..n, edges)
}

/// Image of the collapse of the Ackermann relation on `{0..2^bits-1}`.
pub fn ackermann_collapse_image(bits: u32) -> Result<HFSet> {
    let pi = ackermann_relation(bits)?.collapse()?;
    HFSet::canon(pi.into_values().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hf::{transitive_closure, v_level};

    fn s(x: &str) -> HFSet {
        x.parse().unwrap()
    }

    #[test]
    fn single_point_collapses_to_empty() {
        let r = CarrierRelation::new(["a"], []).unwrap();
        assert_eq!(r.collapse().unwrap()["a"], HFSet::empty());
    }

    #[test]
    fn cycles_are_reported() {
        let r = CarrierRelation::new(["a"], [("a", "a")]).unwrap();
        assert!(!r.is_well_founded());
        assert_eq!(r.find_cycle(), Some(vec!["a"]));
        let r = CarrierRelation::new(["a", "b", "c"], [("c", "b"), ("b", "c"), ("a", "b")]).unwrap();
        assert_eq!(r.find_cycle(), Some(vec!["b", "c"]));
        assert!(matches!(r.collapse(), Err(Error::NotWellFounded { .. })));
    }

    #[test]
    fn rejects_foreign_endpoints() {
        assert!(CarrierRelation::new(["a"], [("a", "b")]).is_err());
    }

    #[test]
    fn membership_collapses_to_identity() {
        let x = s("{{{}} {{} {{}}}}");
        let r = membership_relation(&x).unwrap();
        let pi = r.collapse().unwrap();
        for (k, v) in &pi {
            assert_eq!(k, v);
        }
        assert_eq!(pi.len(), transitive_closure(&HFSet::singleton(&x).unwrap()).unwrap().len());
    }

    #[test]
    fn paper_anchor_trees() {
        let top = FiniteTree::from_sequences_closed([vec![Label::Int(0), Label::Int(0)], vec![Label::Int(1)]]);
        let bot = FiniteTree::from_sequences_closed([vec![Label::Int(0), Label::Int(0)]]);
        assert_eq!(top.root_collapse().unwrap(), s("{{{}} {}}"));
        assert_eq!(bot.root_collapse().unwrap(), s("{{{}}}"));
        let m = tree_collapse(&top).unwrap();
        assert_eq!(m[&vec![Label::Int(1)]], HFSet::empty());
    }

    #[test]
    fn pair_trees() {
        let one = FiniteTree::singleton();
        let two = FiniteTree::from_sequences_closed([vec![Label::Int(0)]]);
        assert_eq!(pair_tree(&one, &one).root_collapse().unwrap(), s("{{}}"));
        assert_eq!(
            opair_tree(&one, &two).root_collapse().unwrap(),
            kuratowski(&HFSet::empty(), &s("{{}}")).unwrap()
        );
    }

    #[test]
    fn addition_graphs() {
        assert_eq!(
            addition_graph_via_collapse(1).unwrap(),
            HFSet::singleton(&kuratowski(&kuratowski(&HFSet::empty(), &HFSet::empty()).unwrap(), &HFSet::empty()).unwrap())
                .unwrap()
        );
        for k in 0..=5 {
            assert_eq!(addition_graph_via_collapse(k).unwrap(), addition_graph_direct(k).unwrap());
        }
        let g = addition_graph_via_collapse(6).unwrap();
        let nm = kuratowski(&von_neumann(2).unwrap(), &von_neumann(3).unwrap()).unwrap();
        assert!(g.contains(&kuratowski(&nm, &von_neumann(5).unwrap()).unwrap()));
        assert!(addition_graph_via_collapse(9).is_err());
    }

    #[test]
    fn ackermann_gives_v_levels() {
        // |V_1|=1, |V_2|=2, |V_3|=4, |V_4|=16: the numbers below 2^bits code
        // exactly these levels.
        for (bits, level) in [(0u32, 1usize), (1, 2), (2, 3), (4, 4)] {
            assert_eq!(ackermann_collapse_image(bits).unwrap(), v_level(level).unwrap());
        }
        assert_eq!(ackermann_collapse_image(3).unwrap().len(), 8);
    }

    #[test]
    fn ranks_are_chain_heights() {
        let r = CarrierRelation::new(0..5, [(0, 1), (1, 2), (0, 2), (3, 4)]).unwrap();
        let pi = r.collapse().unwrap();
        let h = r.chain_heights().unwrap();
        for x in 0..5 {
            assert_eq!(pi[&x].rank() as usize, h[&x]);
        }
    }
}
