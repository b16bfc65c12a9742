//! Hereditarily finite sets, hash-consed.
//!
//! Every [`HFSet`] value is interned in a single process-wide table keyed by
//! the identities of its members.  Because members are themselves interned,
//! two sets are extensionally equal exactly when they are the same table
//! entry, so equality and hashing are pointer operations.  Entries are weak:
//! a set disappears from the table when its last handle is dropped.
//!
//! The table enforces a ceiling on the number of live sets (default
//! 10^6).  Every constructor that may create sets returns a [`Result`] and
//! fails with [`Error::SizeLimit`] instead of exhausting memory.

use std::cell::Cell;
use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};
use std::sync::{Arc, LazyLock, Mutex, MutexGuard, Weak};

use crate::error::{Error, Result};

/// Default ceiling on the number of distinct live sets.
pub const DEFAULT_NODE_LIMIT: usize = 1_000_000;

/// Default bound on the argument of [`v_level`].
pub const DEFAULT_V_LEVEL_BOUND: usize = 5;

static GLOBAL_LIMIT: AtomicUsize = AtomicUsize::new(DEFAULT_NODE_LIMIT);

thread_local! {
    static LOCAL_LIMIT: Cell<Option<usize>> = const { Cell::new(None) };
}

type Key = Box<[usize]>;

static TABLE: LazyLock<Mutex<HashMap<Key, Weak<Node>>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

fn table() -> MutexGuard<'static, HashMap<Key, Weak<Node>>> {
    TABLE.lock().unwrap_or_else(|e| e.into_inner())
}

/// The node ceiling in force on the current thread.
pub fn node_limit() -> usize {
    LOCAL_LIMIT
        .with(|l| l.get())
        .unwrap_or_else(|| GLOBAL_LIMIT.load(AtomicOrdering::Relaxed))
}

/// Set the process-wide node ceiling.
pub fn set_node_limit(limit: usize) {
    GLOBAL_LIMIT.store(limit, AtomicOrdering::Relaxed);
}

/// Run `f` with a node ceiling that applies to the current thread only.
///
/// The ceiling is compared against the size of the shared table, so sets
/// created by other threads count towards it.
pub fn with_node_limit<R>(limit: usize, f: impl FnOnce() -> R) -> R {
    struct Restore(Option<usize>);
    impl Drop for Restore {
        fn drop(&mut self) {
            LOCAL_LIMIT.with(|l| l.set(self.0));
        }
    }
    let _restore = Restore(LOCAL_LIMIT.with(|l| l.replace(Some(limit))));
    f()
}

/// Number of distinct sets currently alive.
pub fn live_sets() -> usize {
    table().len()
}

struct Node {
    /// Members in canonical order.
    members: Box<[HFSet]>,
    rank: u32,
    /// `Some(n)` when the set is the von Neumann ordinal n.
    ordinal: Option<u32>,
}

fn key_of(members: &[HFSet]) -> Key {
    let mut k: Vec<usize> = members.iter().map(HFSet::addr).collect();
    k.sort_unstable();
    k.into_boxed_slice()
}

impl Drop for Node {
    fn drop(&mut self) {
        let key = key_of(&self.members);
        let me = self as *const Node;
        let mut t = table();
        if t.get(&key).is_some_and(|w| w.as_ptr() == me) {
            t.remove(&key);
        }
    }
}

/// A canonical hereditarily finite set.
#[derive(Clone)]
pub struct HFSet(Arc<Node>);

impl HFSet {
    fn addr(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    fn intern(members: Vec<HFSet>, enforce_limit: bool) -> Result<HFSet> {
        let mut members = members;
        members.sort_unstable_by_key(HFSet::addr);
        members.dedup_by(|a, b| a.addr() == b.addr());
        let key: Key = members.iter().map(HFSet::addr).collect();

        {
            let t = table();
            if let Some(found) = t.get(&key).and_then(Weak::upgrade) {
                drop(t);
                return Ok(HFSet(found));
            }
        }

        members.sort();
        let rank = members.last().map_or(0, |m| m.rank() + 1);
        let ordinal = {
            let n = members.len();
            let ok = members
                .iter()
                .enumerate()
                .all(|(i, m)| m.0.ordinal == Some(i as u32));
            ok.then_some(n as u32)
        };
        let node = Arc::new(Node {
            members: members.into_boxed_slice(),
            rank,
            ordinal,
        });

        let mut t = table();
        if let Some(found) = t.get(&key).and_then(Weak::upgrade) {
            drop(t);
            drop(node);
            return Ok(HFSet(found));
        }
        if enforce_limit {
            let limit = node_limit();
            if t.len() >= limit {
                drop(t);
                drop(node);
                return Err(Error::size("live hereditarily finite sets", limit));
            }
        }
        t.insert(key, Arc::downgrade(&node));
        drop(t);
        Ok(HFSet(node))
    }

    /// The canonical set whose members are exactly the given sets.
    pub fn canon(members: Vec<HFSet>) -> Result<HFSet> {
        HFSet::intern(members, true)
    }

    /// The empty set.  Never fails: it is a single table entry.
    pub fn empty() -> HFSet {
        HFSet::intern(Vec::new(), false).expect("empty set is exempt from the limit")
    }

    /// `{x}`.
    pub fn singleton(x: &HFSet) -> Result<HFSet> {
        HFSet::canon(vec![x.clone()])
    }

    /// The unordered pair `{a, b}`.
    pub fn pair(a: &HFSet, b: &HFSet) -> Result<HFSet> {
        HFSet::canon(vec![a.clone(), b.clone()])
    }

    /// Members in canonical order.
    pub fn members(&self) -> &[HFSet] {
        &self.0.members
    }

    pub fn iter(&self) -> std::slice::Iter<'_, HFSet> {
        self.0.members.iter()
    }

    /// Cardinality.
    pub fn len(&self) -> usize {
        self.0.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.members.is_empty()
    }

    /// von Neumann rank: 0 for the empty set, otherwise one more than the
    /// largest rank of a member.
    pub fn rank(&self) -> u32 {
        self.0.rank
    }

    /// Membership test.
    pub fn contains(&self, x: &HFSet) -> bool {
        // Members are sorted by rank first, so a rank mismatch rules out a
        // match cheaply; the binary search handles the rest.
        if x.rank() >= self.rank() {
            return false;
        }
        self.0.members.binary_search_by(|m| m.cmp(x)).is_ok()
    }

    pub fn is_subset(&self, other: &HFSet) -> bool {
        self.len() <= other.len() && self.iter().all(|m| other.contains(m))
    }

    /// Every member is a subset.
    pub fn is_transitive(&self) -> bool {
        self.iter().all(|m| m.is_subset(self))
    }

    /// `Some(n)` when this set is the von Neumann ordinal n.
    pub fn as_ordinal(&self) -> Option<usize> {
        self.0.ordinal.map(|n| n as usize)
    }

    /// `x ∪ {y}`.
    pub fn adjoin(&self, y: &HFSet) -> Result<HFSet> {
        if self.contains(y) {
            return Ok(self.clone());
        }
        let mut v = self.members().to_vec();
        v.push(y.clone());
        HFSet::canon(v)
    }

    /// `x ∪ y`.
    pub fn union(&self, other: &HFSet) -> Result<HFSet> {
        if other.is_subset(self) {
            return Ok(self.clone());
        }
        let mut v = self.members().to_vec();
        v.extend(other.iter().cloned());
        HFSet::canon(v)
    }

    /// `⋃x`.
    pub fn big_union(&self) -> Result<HFSet> {
        let mut v = Vec::new();
        for m in self.iter() {
            v.extend(m.iter().cloned());
        }
        HFSet::canon(v)
    }

    /// `x ∩ y`.
    pub fn intersection(&self, other: &HFSet) -> Result<HFSet> {
        HFSet::canon(self.iter().filter(|m| other.contains(m)).cloned().collect())
    }

    /// `x \ y`.
    pub fn difference(&self, other: &HFSet) -> Result<HFSet> {
        HFSet::canon(self.iter().filter(|m| !other.contains(m)).cloned().collect())
    }

    /// Nested-array JSON form: the empty set is `[]`, members in canonical
    /// order.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(self.iter().map(HFSet::to_json).collect())
    }

    /// Inverse of [`HFSet::to_json`].  Duplicate members are permitted and
    /// merged.
    pub fn from_json(v: &serde_json::Value) -> Result<HFSet> {
        match v {
            serde_json::Value::Array(items) => {
                let members = items.iter().map(HFSet::from_json).collect::<Result<Vec<_>>>()?;
                HFSet::canon(members)
            }
            other => Err(Error::Json(format!("expected a nested array, found {other}"))),
        }
    }
}

impl PartialEq for HFSet {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl Eq for HFSet {}

impl Hash for HFSet {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.addr().hash(state);
    }
}

impl Ord for HFSet {
    /// Canonical structural order: rank, then cardinality, then
    /// lexicographic comparison of the canonically ordered members.
    fn cmp(&self, other: &Self) -> Ordering {
        if self == other {
            return Ordering::Equal;
        }
        self.rank()
            .cmp(&other.rank())
            .then_with(|| self.len().cmp(&other.len()))
            .then_with(|| {
                for (a, b) in self.iter().zip(other.iter()) {
                    match a.cmp(b) {
                        Ordering::Equal => continue,
                        o => return o,
                    }
                }
                Ordering::Equal
            })
    }
}

impl PartialOrd for HFSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for HFSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, m) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{m}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for HFSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<'a> IntoIterator for &'a HFSet {
    type Item = &'a HFSet;
    type IntoIter = std::slice::Iter<'a, HFSet>;
    fn into_iter(self) -> Self::IntoIter {
        self.iter()
    }
}

/// `canon(children)`: the canonical set with exactly these members.
pub fn canon(children: Vec<HFSet>) -> Result<HFSet> {
    HFSet::canon(children)
}

/// The Kuratowski pair `{{a},{a,b}}`.
pub fn kuratowski(a: &HFSet, b: &HFSet) -> Result<HFSet> {
    let sa = HFSet::singleton(a)?;
    let sab = HFSet::pair(a, b)?;
    HFSet::pair(&sa, &sab)
}

/// Decode a Kuratowski pair into its components.
pub fn unpair(p: &HFSet) -> Option<(HFSet, HFSet)> {
    match p.members() {
        [only] => match only.members() {
            [x] => Some((x.clone(), x.clone())),
            _ => None,
        },
        [small, big] => {
            let ([x], 2) = (small.members(), big.len()) else {
                return None;
            };
            if !big.contains(x) {
                return None;
            }
            let y = big.iter().find(|m| *m != x)?;
            Some((x.clone(), y.clone()))
        }
        _ => None,
    }
}

/// First component of a Kuratowski pair.
pub fn first(p: &HFSet) -> Option<HFSet> {
    unpair(p).map(|(a, _)| a)
}

/// Second component of a Kuratowski pair.
pub fn second(p: &HFSet) -> Option<HFSet> {
    unpair(p).map(|(_, b)| b)
}

/// Right-nested tuple `⟨x0,⟨x1,…,x_n⟩⟩`; a one-element tuple is the element.
pub fn tuple(xs: &[HFSet]) -> Result<HFSet> {
    match xs {
        [] => Ok(HFSet::empty()),
        [x] => Ok(x.clone()),
        [x, rest @ ..] => kuratowski(x, &tuple(rest)?),
    }
}

/// Smallest transitive set containing every member of `a`.
pub fn transitive_closure(a: &HFSet) -> Result<HFSet> {
    let mut seen: HashSet<HFSet> = HashSet::new();
    let mut stack: Vec<HFSet> = a.iter().cloned().collect();
    while let Some(x) = stack.pop() {
        if seen.insert(x.clone()) {
            stack.extend(x.iter().cloned());
        }
    }
    HFSet::canon(seen.into_iter().collect())
}

/// `rank(a)` as a free function.
pub fn rank(a: &HFSet) -> usize {
    a.rank() as usize
}

/// The n-th von Neumann ordinal.
pub fn von_neumann(n: usize) -> Result<HFSet> {
    let mut members = Vec::with_capacity(n);
    let mut cur = HFSet::empty();
    for _ in 0..n {
        members.push(cur.clone());
        cur = HFSet::canon(members.clone())?;
    }
    Ok(cur)
}

/// Set of all subsets of `a` (for hereditarily finite `a`, every subset is
/// finite).
pub fn finite_powerset(a: &HFSet) -> Result<HFSet> {
    let limit = node_limit();
    if a.len() >= usize::BITS as usize - 1 || (1usize << a.len()) > limit {
        return Err(Error::size(format!("powerset of a {}-element set", a.len()), limit));
    }
    let mut subsets: Vec<Vec<HFSet>> = vec![Vec::new()];
    for m in a.iter() {
        let extended: Vec<Vec<HFSet>> = subsets
            .iter()
            .map(|s| {
                let mut s = s.clone();
                s.push(m.clone());
                s
            })
            .collect();
        subsets.extend(extended);
    }
    let sets = subsets
        .into_iter()
        .map(HFSet::canon)
        .collect::<Result<Vec<_>>>()?;
    HFSet::canon(sets)
}

/// `V_n`, the n-th level of the cumulative hierarchy, with the default bound.
pub fn v_level(n: usize) -> Result<HFSet> {
    v_level_bounded(n, DEFAULT_V_LEVEL_BOUND)
}

/// `V_n` with an explicit bound on `n`.
pub fn v_level_bounded(n: usize, bound: usize) -> Result<HFSet> {
    if n > bound {
        return Err(Error::size(format!("v_level({n})"), bound));
    }
    let mut v = HFSet::empty();
    for _ in 0..n {
        v = finite_powerset(&v)?;
    }
    Ok(v)
}

/// Cartesian product as a set of Kuratowski pairs.
pub fn cartesian(a: &HFSet, b: &HFSet) -> Result<HFSet> {
    let mut v = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            v.push(kuratowski(x, y)?);
        }
    }
    HFSet::canon(v)
}
