//! Bisimulations on finite trees.
//!
//! A relation B on the nodes of a tree is a bisimulation when every related
//! pair satisfies the forth and back conditions over immediate successors:
//! each child of one side is related to some child of the other.  On a
//! well-founded tree the largest bisimulation is exactly the kernel of the
//! collapse, `{⟨σ,τ⟩ : π(σ) = π(τ)}`.

use std::collections::{BTreeSet, HashMap};

use crate::collapse::{pair_tree, tree_collapse};
use crate::error::{Error, Result};
use crate::tree::{Explicit, FiniteTree, Label, Path};

/// A set of ordered pairs of tree nodes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NodeRelation {
    pub pairs: BTreeSet<(Path, Path)>,
}

impl NodeRelation {
    pub fn new() -> Self {
        NodeRelation::default()
    }

    pub fn contains(&self, a: &[Label], b: &[Label]) -> bool {
        self.pairs.contains(&(a.to_vec(), b.to_vec()))
    }

    pub fn insert(&mut self, a: Path, b: Path) {
        self.pairs.insert((a, b));
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn is_subset(&self, other: &NodeRelation) -> bool {
        self.pairs.is_subset(&other.pairs)
    }

    pub fn union(&self, other: &NodeRelation) -> NodeRelation {
        NodeRelation { pairs: self.pairs.union(&other.pairs).cloned().collect() }
    }

    /// Build from an index matrix over explicit nodes.
    pub fn from_matrix(ex: &Explicit, m: &[Vec<bool>]) -> NodeRelation {
        let mut r = NodeRelation::new();
        for (i, row) in m.iter().enumerate() {
            for (j, &b) in row.iter().enumerate() {
                if b {
                    r.insert(ex.paths[i].clone(), ex.paths[j].clone());
                }
            }
        }
        r
    }

    /// Index matrix over explicit nodes; fails if a pair mentions a node
    /// outside the tree.
    pub fn to_matrix(&self, ex: &Explicit) -> Result<Vec<Vec<bool>>> {
        let mut m = vec![vec![false; ex.len()]; ex.len()];
        for (a, b) in &self.pairs {
            let (Some(i), Some(j)) = (ex.index_of(a), ex.index_of(b)) else {
                return Err(Error::InvalidInput(format!("pair ({a:?}, {b:?}) mentions a node outside the tree")));
            };
            m[i][j] = true;
        }
        Ok(m)
    }

    pub fn is_equivalence_on(&self, ex: &Explicit) -> Result<bool> {
        let m = self.to_matrix(ex)?;
        let n = ex.len();
        for i in 0..n {
            if !m[i][i] {
                return Ok(false);
            }
            for j in 0..n {
                if m[i][j] != m[j][i] {
                    return Ok(false);
                }
                if m[i][j] && (0..n).any(|k| m[j][k] && !m[i][k]) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// JSON form: a list of `[path, path]` pairs.
    pub fn to_json(&self) -> serde_json::Value {
        let path = |p: &Path| serde_json::Value::Array(p.iter().map(Label::to_json).collect());
        serde_json::Value::Array(
            self.pairs
                .iter()
                .map(|(a, b)| serde_json::Value::Array(vec![path(a), path(b)]))
                .collect(),
        )
    }

    pub fn from_json(v: &serde_json::Value) -> Result<NodeRelation> {
        let path = |v: &serde_json::Value| -> Result<Path> {
            v.as_array()
                .ok_or_else(|| Error::Json("a node is an array of labels".into()))?
                .iter()
                .map(Label::from_json)
                .collect()
        };
        let items = v.as_array().ok_or_else(|| Error::Json("a relation is a list of pairs".into()))?;
        let mut r = NodeRelation::new();
        for it in items {
            match it.as_array().map(Vec::as_slice) {
                Some([a, b]) => r.insert(path(a)?, path(b)?),
                _ => return Err(Error::Json("each pair is a two-element array".into())),
            }
        }
        Ok(r)
    }
}

fn forth_back(ex: &Explicit, m: &[Vec<bool>], i: usize, j: usize) -> bool {
    let forth = ex.children[i].iter().all(|&c| ex.children[j].iter().any(|&d| m[c][d]));
    let back = ex.children[j].iter().all(|&d| ex.children[i].iter().any(|&c| m[c][d]));
    forth && back
}

/// Index-level check of the forth and back conditions for every related pair.
pub fn is_bisimulation_matrix(ex: &Explicit, m: &[Vec<bool>]) -> bool {
    (0..ex.len()).all(|i| (0..ex.len()).all(|j| !m[i][j] || forth_back(ex, m, i, j)))
}

/// Whether `b` is a bisimulation on `t`.  Fails if `b` mentions a node
/// outside `t`.
pub fn is_bisimulation(t: &FiniteTree, b: &NodeRelation) -> Result<bool> {
    let ex = t.explicit()?;
    let m = b.to_matrix(&ex)?;
    Ok(is_bisimulation_matrix(&ex, &m))
}

/// Greatest fixpoint of the forth-and-back refinement, as an index matrix.
pub fn maximal_bisimulation_matrix(ex: &Explicit) -> Vec<Vec<bool>> {
    let n = ex.len();
    let mut m: Vec<Vec<bool>> = (0..n)
        .map(|i| (0..n).map(|j| ex.is_terminal(i) == ex.is_terminal(j)).collect())
        .collect();
    loop {
        let mut changed = false;
        for i in 0..n {
            for j in 0..n {
                if m[i][j] && !forth_back(ex, &m, i, j) {
                    m[i][j] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            return m;
        }
    }
}

/// The largest bisimulation on `t`.
pub fn maximal_bisimulation(t: &FiniteTree) -> Result<NodeRelation> {
    let ex = t.explicit()?;
    Ok(NodeRelation::from_matrix(&ex, &maximal_bisimulation_matrix(&ex)))
}

/// Pairs of nodes with equal collapse.
pub fn collapse_kernel(t: &FiniteTree) -> Result<NodeRelation> {
    let pi = tree_collapse(t)?;
    let mut classes: HashMap<_, Vec<&Path>> = HashMap::new();
    for (p, v) in &pi {
        classes.entry(v.clone()).or_default().push(p);
    }
    let mut r = NodeRelation::new();
    for class in classes.values() {
        for a in class {
            for b in class {
                r.insert((*a).clone(), (*b).clone());
            }
        }
    }
    Ok(r)
}

/// `t =* s`: the roots of the two copies in `Pair(t,s)` are bisimilar.
pub fn trees_equal_star(t: &FiniteTree, s: &FiniteTree) -> Result<bool> {
    let p = pair_tree(t, s);
    let ex = p.explicit()?;
    let m = maximal_bisimulation_matrix(&ex);
    let i = ex.index_of(&[Label::Int(0)]).expect("left copy");
    let j = ex.index_of(&[Label::Int(1)]).expect("right copy");
    Ok(m[i][j])
}

/// `t ∈* s`: the root of t's copy in `Pair(t,s)` is bisimilar to an
/// immediate successor of the root of s's copy.
pub fn tree_member_star(t: &FiniteTree, s: &FiniteTree) -> Result<bool> {
    let p = pair_tree(t, s);
    let ex = p.explicit()?;
    let m = maximal_bisimulation_matrix(&ex);
    let i = ex.index_of(&[Label::Int(0)]).expect("left copy");
    let j = ex.index_of(&[Label::Int(1)]).expect("right copy");
    Ok(ex.children[j].iter().any(|&c| m[i][c]))
}
