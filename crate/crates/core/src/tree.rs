//! Labels and finite trees.
//!
//! A finite tree is a prefix-closed set of label sequences.  Trees built by
//! the constructions in this crate share most of their structure (the same
//! truth-value tree is hung below thousands of nodes), so they are stored as
//! hash-consed DAGs: a [`Dag`] node is a sorted list of `(label, child)`
//! edges, and two nodes with identical edge lists are the same node.  A
//! [`FiniteTree`] is a root in a DAG; its nodes are the label paths from that
//! root.  [`FiniteTree::explicit`] expands small trees into explicit nodes.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hf::HFSet;

/// Ceiling on the number of explicit nodes produced by expansion.
pub const DEFAULT_EXPLICIT_LIMIT: u64 = 2_000_000;

/// A tree label.  The variant order is part of the canonical node order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Int(i64),
    Str(Arc<str>),
    Set(HFSet),
    Tuple(Arc<[Label]>),
}

impl Label {
    pub fn int(i: i64) -> Label {
        Label::Int(i)
    }

    pub fn str(s: &str) -> Label {
        Label::Str(Arc::from(s))
    }

    pub fn set(x: &HFSet) -> Label {
        Label::Set(x.clone())
    }

    pub fn tuple(items: Vec<Label>) -> Label {
        Label::Tuple(Arc::from(items))
    }

    /// JSON form: integers and strings map to themselves, tuples to arrays,
    /// sets to `{"set": "<literal>"}`.
    pub fn to_json(&self) -> serde_json::Value {
        use serde_json::Value;
        match self {
            Label::Int(i) => Value::from(*i),
            Label::Str(s) => Value::from(s.as_ref()),
            Label::Set(x) => serde_json::json!({ "set": x.to_string() }),
            Label::Tuple(items) => Value::Array(items.iter().map(Label::to_json).collect()),
        }
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Label> {
        use serde_json::Value;
        match v {
            Value::Number(n) => n
                .as_i64()
                .map(Label::Int)
                .ok_or_else(|| Error::Json(format!("label {n} is not a 64-bit integer"))),
            Value::String(s) => Ok(Label::str(s)),
            Value::Array(items) => Ok(Label::tuple(
                items.iter().map(Label::from_json).collect::<Result<_>>()?,
            )),
            Value::Object(map) => match map.get("set") {
                Some(Value::String(text)) if map.len() == 1 => Ok(Label::Set(text.parse()?)),
                _ => Err(Error::Json("label objects must be {\"set\": \"<literal>\"}".into())),
            },
            other => Err(Error::Json(format!("unsupported label {other}"))),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Int(i) => write!(f, "{i}"),
            Label::Str(s) => write!(f, "{s:?}"),
            Label::Set(x) => write!(f, "{x}"),
            Label::Tuple(items) => {
                f.write_str("<")?;
                for (i, l) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{l}")?;
                }
                f.write_str(">")
            }
        }
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl From<i64> for Label {
    fn from(i: i64) -> Self {
        Label::Int(i)
    }
}

/// A node sequence of a tree.
pub type Path = Vec<Label>;

/// Identifier of a DAG node.  Children always have smaller identifiers than
/// their parents, so identifier order is a topological order.
pub type NodeId = u32;

type Edges = Arc<[(Label, NodeId)]>;

/// Hash-consed store of tree nodes.
#[derive(Clone, Default)]
pub struct Dag {
    nodes: Vec<Edges>,
    index: HashMap<Edges, NodeId>,
}

impl Dag {
    pub fn new() -> Dag {
        Dag::default()
    }

    /// Number of distinct nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Outgoing edges of a node, sorted by label.
    pub fn children(&self, id: NodeId) -> &[(Label, NodeId)] {
        &self.nodes[id as usize]
    }

    fn intern(&mut self, edges: Vec<(Label, NodeId)>) -> NodeId {
        let edges: Edges = Arc::from(edges);
        if let Some(&id) = self.index.get(&edges) {
            return id;
        }
        let id = self.nodes.len() as NodeId;
        self.nodes.push(edges.clone());
        self.index.insert(edges, id);
        id
    }

    /// The node with the given edges.  Edges sharing a label are merged by
    /// tree union, so the result is the union of the prefixed subtrees.
    pub fn node(&mut self, mut edges: Vec<(Label, NodeId)>) -> NodeId {
        edges.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
        edges.dedup();
        let mut merged: Vec<(Label, NodeId)> = Vec::with_capacity(edges.len());
        for (label, child) in edges {
            match merged.last_mut() {
                Some((l, c)) if *l == label => {
                    let (a, b) = (*c, child);
                    *c = self.union(a, b);
                }
                _ => merged.push((label, child)),
            }
        }
        self.intern(merged)
    }

    /// The one-node tree `{∅}`.
    pub fn leaf(&mut self) -> NodeId {
        self.intern(Vec::new())
    }

    /// Union of two trees (as sets of sequences).
    pub fn union(&mut self, a: NodeId, b: NodeId) -> NodeId {
        if a == b {
            return a;
        }
        let mut edges = self.children(a).to_vec();
        edges.extend_from_slice(self.children(b));
        self.node(edges)
    }

    /// Union of many trees; the union of none is the one-node tree.
    pub fn union_all(&mut self, ids: impl IntoIterator<Item = NodeId>) -> NodeId {
        let mut edges = Vec::new();
        for id in ids {
            edges.extend_from_slice(self.children(id));
        }
        self.node(edges)
    }

    /// `(label)⌢t`.
    pub fn prefix(&mut self, label: Label, sub: NodeId) -> NodeId {
        self.intern(vec![(label, sub)])
    }

    /// `(l_0,…,l_k)⌢t`.
    pub fn prefix_seq(&mut self, labels: &[Label], sub: NodeId) -> NodeId {
        labels.iter().rev().fold(sub, |acc, l| self.prefix(l.clone(), acc))
    }

    /// Copy the part of `other` reachable from `id` into this store.
    pub fn import(&mut self, other: &Dag, id: NodeId) -> NodeId {
        let mut memo = HashMap::new();
        self.import_memo(other, id, &mut memo)
    }

    fn import_memo(&mut self, other: &Dag, id: NodeId, memo: &mut HashMap<NodeId, NodeId>) -> NodeId {
        if let Some(&m) = memo.get(&id) {
            return m;
        }
        let edges: Vec<(Label, NodeId)> = other
            .children(id)
            .iter()
            .map(|(l, c)| (l.clone(), self.import_memo(other, *c, memo)))
            .collect();
        let m = self.intern(edges);
        memo.insert(id, m);
        m
    }

    /// Nodes reachable from `root`, in increasing identifier order.
    pub fn reachable(&self, root: NodeId) -> Vec<NodeId> {
        let mut seen = vec![false; root as usize + 1];
        let mut stack = vec![root];
        seen[root as usize] = true;
        while let Some(n) = stack.pop() {
            for &(_, c) in self.children(n) {
                if !seen[c as usize] {
                    seen[c as usize] = true;
                    stack.push(c);
                }
            }
        }
        (0..=root).filter(|&i| seen[i as usize]).collect()
    }

    /// Collapse every node reachable from `root`: `π(n) = {π(c) : c child}`.
    /// Entries for unreachable nodes are `None`.
    pub fn collapse_from(&self, root: NodeId) -> Result<Vec<Option<HFSet>>> {
        let mut pi: Vec<Option<HFSet>> = vec![None; root as usize + 1];
        for n in self.reachable(root) {
            let members = self
                .children(n)
                .iter()
                .map(|(_, c)| pi[*c as usize].clone().expect("children precede parents"))
                .collect();
            pi[n as usize] = Some(HFSet::canon(members)?);
        }
        Ok(pi)
    }

    /// Height of the tree rooted at `id` (a single node has height 0).
    pub fn height(&self, id: NodeId) -> usize {
        let mut h: HashMap<NodeId, usize> = HashMap::new();
        for n in self.reachable(id) {
            let v = self
                .children(n)
                .iter()
                .map(|(_, c)| h[c] + 1)
                .max()
                .unwrap_or(0);
            h.insert(n, v);
        }
        h[&id]
    }

    /// Number of label paths (explicit nodes) below `id`, saturating.
    pub fn path_count(&self, id: NodeId) -> u64 {
        let mut cnt: HashMap<NodeId, u64> = HashMap::new();
        for n in self.reachable(id) {
            let v = self
                .children(n)
                .iter()
                .fold(1u64, |acc, (_, c)| acc.saturating_add(cnt[c]));
            cnt.insert(n, v);
        }
        cnt[&id]
    }
}

/// A finite prefix-closed set of label sequences, rooted at the empty
/// sequence.
#[derive(Clone)]
pub struct FiniteTree {
    dag: Arc<Dag>,
    root: NodeId,
}

#[derive(Default)]
struct Trie {
    children: BTreeMap<Label, Trie>,
}

impl Trie {
    fn build(&self, dag: &mut Dag) -> NodeId {
        let edges = self
            .children
            .iter()
            .map(|(l, t)| (l.clone(), t.build(dag)))
            .collect();
        dag.node(edges)
    }
}

impl FiniteTree {
    pub fn new(dag: Dag, root: NodeId) -> FiniteTree {
        FiniteTree { dag: Arc::new(dag), root }
    }

    pub fn from_shared(dag: Arc<Dag>, root: NodeId) -> FiniteTree {
        FiniteTree { dag, root }
    }

    /// The tree `{∅}`.
    pub fn singleton() -> FiniteTree {
        let mut dag = Dag::new();
        let root = dag.leaf();
        FiniteTree::new(dag, root)
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn shared_dag(&self) -> &Arc<Dag> {
        &self.dag
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    /// Build from an explicit node set, which must contain the empty
    /// sequence and be closed under initial segments.
    pub fn from_sequences<I>(seqs: I) -> Result<FiniteTree>
    where
        I: IntoIterator<Item = Path>,
    {
        let seqs: Vec<Path> = seqs.into_iter().collect();
        let set: std::collections::BTreeSet<&Path> = seqs.iter().collect();
        if !set.contains(&Vec::new()) {
            return Err(Error::InvalidInput("tree must contain the empty sequence".into()));
        }
        for s in &set {
            if !s.is_empty() && !set.contains(&s[..s.len() - 1].to_vec()) {
                return Err(Error::InvalidInput(format!(
                    "tree is not closed under initial segments: missing parent of {s:?}"
                )));
            }
        }
        Ok(FiniteTree::from_sequences_closed(seqs))
    }

    /// Build the smallest tree containing the given sequences.
    pub fn from_sequences_closed<I>(seqs: I) -> FiniteTree
    where
        I: IntoIterator<Item = Path>,
    {
        let mut trie = Trie::default();
        for s in seqs {
            let mut cur = &mut trie;
            for l in s {
                cur = cur.children.entry(l).or_default();
            }
        }
        let mut dag = Dag::new();
        let root = trie.build(&mut dag);
        FiniteTree::new(dag, root)
    }

    /// Number of nodes (sequences), saturating.
    pub fn node_count(&self) -> u64 {
        self.dag.path_count(self.root)
    }

    pub fn height(&self) -> usize {
        self.dag.height(self.root)
    }

    /// Labels of the immediate successors of the root, sorted.
    pub fn root_labels(&self) -> Vec<Label> {
        self.dag.children(self.root).iter().map(|(l, _)| l.clone()).collect()
    }

    fn locate(&self, path: &[Label]) -> Option<NodeId> {
        let mut cur = self.root;
        for l in path {
            let edges = self.dag.children(cur);
            let i = edges.binary_search_by(|(x, _)| x.cmp(l)).ok()?;
            cur = edges[i].1;
        }
        Some(cur)
    }

    /// Whether the sequence is a node of the tree.
    pub fn contains(&self, path: &[Label]) -> bool {
        self.locate(path).is_some()
    }

    /// The tree `{τ : σ⌢τ ∈ t}` below a node.
    pub fn subtree(&self, path: &[Label]) -> Option<FiniteTree> {
        self.locate(path).map(|root| FiniteTree { dag: self.dag.clone(), root })
    }

    /// Collapse of the root, `πT`.
    pub fn root_collapse(&self) -> Result<HFSet> {
        Ok(self.dag.collapse_from(self.root)?[self.root as usize].clone().expect("root is reachable"))
    }

    /// All nodes in lexicographic order, guarded by
    /// [`DEFAULT_EXPLICIT_LIMIT`].
    pub fn sequences(&self) -> Result<Vec<Path>> {
        Ok(self.explicit()?.paths)
    }

    /// Expand into explicit nodes.
    pub fn explicit(&self) -> Result<Explicit> {
        self.explicit_bounded(DEFAULT_EXPLICIT_LIMIT)
    }

    pub fn explicit_bounded(&self, limit: u64) -> Result<Explicit> {
        let n = self.node_count();
        if n > limit {
            return Err(Error::size(format!("explicit expansion of a {n}-node tree"), limit as usize));
        }
        let mut ex = Explicit::default();
        ex.push(self, Vec::new(), self.root, None);
        Ok(ex)
    }

    /// JSON form: the list of all nodes, each an array of labels.
    pub fn to_json(&self) -> Result<serde_json::Value> {
        Ok(serde_json::Value::Array(
            self.sequences()?
                .iter()
                .map(|p| serde_json::Value::Array(p.iter().map(Label::to_json).collect()))
                .collect(),
        ))
    }

    pub fn from_json(v: &serde_json::Value) -> Result<FiniteTree> {
        let serde_json::Value::Array(items) = v else {
            return Err(Error::Json("a tree is a list of label arrays".into()));
        };
        let mut seqs = Vec::with_capacity(items.len());
        for item in items {
            let serde_json::Value::Array(labels) = item else {
                return Err(Error::Json("each tree node must be an array of labels".into()));
            };
            seqs.push(labels.iter().map(Label::from_json).collect::<Result<Path>>()?);
        }
        FiniteTree::from_sequences(seqs)
    }

    /// Structural equality as sets of sequences.
    pub fn same_nodes(&self, other: &FiniteTree) -> bool {
        fn go(a: &Dag, x: NodeId, b: &Dag, y: NodeId, memo: &mut HashMap<(NodeId, NodeId), bool>) -> bool {
            if let Some(&r) = memo.get(&(x, y)) {
                return r;
            }
            let (ea, eb) = (a.children(x), b.children(y));
            let r = ea.len() == eb.len()
                && ea
                    .iter()
                    .zip(eb.iter())
                    .all(|((la, ca), (lb, cb))| la == lb && go(a, *ca, b, *cb, memo));
            memo.insert((x, y), r);
            r
        }
        go(&self.dag, self.root, &other.dag, other.root, &mut HashMap::new())
    }
}

impl fmt::Debug for FiniteTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.explicit_bounded(64) {
            Ok(ex) => f.debug_set().entries(ex.paths.iter()).finish(),
            Err(_) => write!(f, "FiniteTree({} nodes)", self.node_count()),
        }
    }
}

/// A tree expanded into explicit nodes, indexed in lexicographic order
/// (index 0 is the root).
#[derive(Clone, Debug, Default)]
pub struct Explicit {
    pub paths: Vec<Path>,
    pub parent: Vec<Option<usize>>,
    pub children: Vec<Vec<usize>>,
    pub dag_node: Vec<NodeId>,
    index: HashMap<Path, usize>,
}

impl Explicit {
    fn push(&mut self, t: &FiniteTree, path: Path, node: NodeId, parent: Option<usize>) -> usize {
        let i = self.paths.len();
        self.paths.push(path.clone());
        self.parent.push(parent);
        self.children.push(Vec::new());
        self.dag_node.push(node);
        self.index.insert(path.clone(), i);
        for (l, c) in t.dag.children(node).iter() {
            let mut p = path.clone();
            p.push(l.clone());
            let j = self.push(t, p, *c, Some(i));
            self.children[i].push(j);
        }
        i
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn index_of(&self, path: &[Label]) -> Option<usize> {
        self.index.get(path).copied()
    }

    pub fn is_terminal(&self, i: usize) -> bool {
        self.children[i].is_empty()
    }

    /// Length of the node sequence.
    pub fn depth(&self, i: usize) -> usize {
        self.paths[i].len()
    }
}
