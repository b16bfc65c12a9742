//! Finite levels of the relativized constructible hierarchy.
//!
//! `L_0(b) = TC(b)` and `L_{k+1}(b) = Def(L_k(b),∈)`.  For a finite `a`
//! every subset is definable with parameters (a disjunction of equalities
//! `x₀ = p`), so `Def(a)` is the powerset; [`def_audit`] confirms this by
//! enumerating formulas until every subset has been defined.

use std::collections::{BTreeMap, BTreeSet};

use crate::collapse::CarrierRelation;
use crate::error::{Error, Result};
use crate::formula::{enumerate_canonical, eval, Formula};
use crate::hf::{finite_powerset, transitive_closure, HFSet};

/// Largest `|a|` whose definable powerset is computed (`2^16` members).
pub const DEFAULT_DEF_LIMIT: usize = 16;

/// `{s ∈ a : (a,∈) ⊨ f[s, params…]}`: `x₀` ranges over `a`, the parameters
/// fill `x₁, x₂, …`.
pub fn definable_subset(a: &HFSet, f: &Formula, params: &[HFSet]) -> Result<HFSet> {
    if let Some(p) = params.iter().find(|p| !a.contains(p)) {
        return Err(Error::InvalidInput(format!("parameter {p} is not a member of a")));
    }
    let mut sigma = Vec::with_capacity(params.len() + 1);
    sigma.push(HFSet::empty());
    sigma.extend(params.iter().cloned());
    let mut out = Vec::new();
    for s in a.iter() {
        sigma[0] = s.clone();
        if eval(a, f, &sigma)? {
            out.push(s.clone());
        }
    }
    HFSet::canon(out)
}

/// `Def(a,∈)` for finite `a`: the powerset.
pub fn def_set(a: &HFSet) -> Result<HFSet> {
    if a.len() > DEFAULT_DEF_LIMIT {
        return Err(Error::size(format!("Def of a {}-element set", a.len()), DEFAULT_DEF_LIMIT));
    }
    finite_powerset(a)
}

/// Outcome of defining subsets by brute-force formula enumeration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefAudit {
    /// Distinct subsets defined.
    pub defined: usize,
    /// `2^|a|`.
    pub subsets: usize,
    /// The formula size at which every subset had been defined, if reached.
    pub saturated_at: Option<usize>,
}

/// Enumerate formulas (free variable `x₀`, the others parameters from `a`)
/// up to `max_size`, stopping once every subset of `a` has been defined.
pub fn def_audit(a: &HFSet, max_size: usize) -> Result<DefAudit> {
    let subsets = def_set(a)?.len();
    let members: Vec<HFSet> = a.iter().cloned().collect();
    let mut found: BTreeSet<HFSet> = BTreeSet::new();
    for size in 1..=max_size {
        for f in enumerate_canonical(size).into_iter().filter(|f| f.size() == size) {
            let k = f.needed_len().max(1);
            // All parameter tuples for x₁…x_{k-1}.
            let mut idx = vec![0usize; k - 1];
            if k > 1 && members.is_empty() {
                continue;
            }
            loop {
                let params: Vec<HFSet> = idx.iter().map(|&i| members[i].clone()).collect();
                found.insert(definable_subset(a, &f, &params)?);
                let mut pos = 0;
                while pos < idx.len() {
                    idx[pos] += 1;
                    if idx[pos] < members.len() {
                        break;
                    }
                    idx[pos] = 0;
                    pos += 1;
                }
                if pos == idx.len() {
                    break;
                }
            }
            if found.len() == subsets {
                return Ok(DefAudit { defined: found.len(), subsets, saturated_at: Some(size) });
            }
        }
    }
    Ok(DefAudit { defined: found.len(), subsets, saturated_at: None })
}

/// `L_0(b), …, L_n(b)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelSequence {
    pub levels: Vec<HFSet>,
}

impl LevelSequence {
    /// Every level is transitive and contained in the next.
    pub fn check_basic_facts(&self) -> bool {
        self.levels.iter().all(HFSet::is_transitive) && self.levels.windows(2).all(|w| w[0].is_subset(&w[1]))
    }
}

/// The levels `L_0(b)` through `L_n(b)`.
pub fn l_level(b: &HFSet, n: usize) -> Result<LevelSequence> {
    let mut levels = vec![transitive_closure(b)?];
    for _ in 0..n {
        let next = def_set(levels.last().expect("nonempty"))?;
        levels.push(next);
    }
    Ok(LevelSequence { levels })
}

/// The rank function on `TC({x})`: the collapse of the transitive closure
/// of `∈` there, so that `y ↦ rank(y)` as a von Neumann ordinal.
pub fn rank_function(x: &HFSet) -> Result<BTreeMap<HFSet, HFSet>> {
    let carrier = transitive_closure(&HFSet::singleton(x)?)?;
    let mut edges = Vec::new();
    for v in carrier.iter() {
        for u in transitive_closure(v)?.iter() {
            edges.push((u.clone(), v.clone()));
        }
    }
    CarrierRelation::new(carrier.iter().cloned(), edges)?.collapse()
}
