//! A relativized notation system for the Veblen hierarchy.
//!
//! Terms of `O(α,Λ)` are built from `0`, `φ(α,x)` for `x` in a quasi linear
//! order `Λ`, finite sums of non-sum terms, and `φ(β,t)` for levels `β < α`.
//! Comparison `≤_{α,Λ}` is decided syntactically by four rules; it is a
//! quasi linear order, not antisymmetric.  When `Λ` is a finite ordinal the
//! terms denote ordinals below `Γ₀`, and [`Vnf`] computes those values in
//! Veblen normal form as an independent check of the comparison.
//!
//! Levels are naturals.  Term size counts syntax-tree nodes: `0`, a
//! `Λ`-element, each `φ` and each sum node count one.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A handle for an element of a parameter order.
pub type Elem = u64;

/// A quasi linear parameter order `Λ`: reflexive, transitive and total.
#[derive(Clone)]
pub enum QuasiOrder {
    /// The finite ordinal `k = {0,…,k-1}`.
    Ordinal(u64),
    /// Explicit finite order on elements `0..names.len()`.
    Finite { names: Vec<String>, leq: Vec<Vec<bool>> },
    /// An infinite order on all naturals, queried through a comparator.
    Lazy { name: String, leq: Arc<dyn Fn(Elem, Elem) -> bool + Send + Sync> },
    /// `Λ|_{<x}`: the elements of `base` strictly below `bound`.
    Restricted { base: Arc<QuasiOrder>, bound: Elem },
}

impl fmt::Debug for QuasiOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuasiOrder::Ordinal(k) => write!(f, "Ordinal({k})"),
            QuasiOrder::Finite { names, .. } => write!(f, "Finite({names:?})"),
            QuasiOrder::Lazy { name, .. } => write!(f, "Lazy({name})"),
            QuasiOrder::Restricted { base, bound } => write!(f, "{base:?}|<{}", base.name(*bound)),
        }
    }
}

impl QuasiOrder {
    /// The naturals in reverse: `m ≤ n` iff `m ≥ n` as numbers.  Every
    /// sequence `0, 1, 2, …` is descending.
    pub fn reversed_naturals() -> QuasiOrder {
        QuasiOrder::Lazy { name: "reversed naturals".into(), leq: Arc::new(|a, b| a >= b) }
    }

    /// A finite order from element names and the full list of `≤` pairs.
    pub fn finite(names: Vec<String>, pairs: &[(String, String)]) -> Result<QuasiOrder> {
        let idx: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        if idx.len() != names.len() {
            return Err(Error::InvalidInput("duplicate element names".into()));
        }
        let mut leq = vec![vec![false; names.len()]; names.len()];
        for (a, b) in pairs {
            let (Some(&i), Some(&j)) = (idx.get(a.as_str()), idx.get(b.as_str())) else {
                return Err(Error::InvalidInput(format!("unknown element in pair ({a}, {b})")));
            };
            leq[i][j] = true;
        }
        let q = QuasiOrder::Finite { names, leq };
        q.check()?;
        Ok(q)
    }

    /// Read `{"elements": [...], "leq": [[a, b], ...]}`.
    pub fn from_json(v: &serde_json::Value) -> Result<QuasiOrder> {
        let names: Vec<String> = v
            .get("elements")
            .and_then(|e| e.as_array())
            .ok_or_else(|| Error::Json("an order needs an `elements` array".into()))?
            .iter()
            .map(|e| e.as_str().map(str::to_owned).ok_or_else(|| Error::Json("element names are strings".into())))
            .collect::<Result<_>>()?;
        let pairs = v
            .get("leq")
            .and_then(|e| e.as_array())
            .ok_or_else(|| Error::Json("an order needs a `leq` array".into()))?
            .iter()
            .map(|p| match p.as_array().map(Vec::as_slice) {
                Some([a, b]) => match (a.as_str(), b.as_str()) {
                    (Some(a), Some(b)) => Ok((a.to_owned(), b.to_owned())),
                    _ => Err(Error::Json("leq pairs hold element names".into())),
                },
                _ => Err(Error::Json("leq entries are pairs".into())),
            })
            .collect::<Result<Vec<_>>>()?;
        QuasiOrder::finite(names, &pairs)
    }

    pub fn leq(&self, a: Elem, b: Elem) -> bool {
        match self {
            QuasiOrder::Ordinal(_) => a <= b,
            QuasiOrder::Finite { leq, .. } => leq[a as usize][b as usize],
            QuasiOrder::Lazy { leq, .. } => leq(a, b),
            QuasiOrder::Restricted { base, .. } => base.leq(a, b),
        }
    }

    pub fn lt(&self, a: Elem, b: Elem) -> bool {
        self.leq(a, b) && !self.leq(b, a)
    }

    pub fn equiv(&self, a: Elem, b: Elem) -> bool {
        self.leq(a, b) && self.leq(b, a)
    }

    pub fn contains(&self, e: Elem) -> bool {
        match self {
            QuasiOrder::Ordinal(k) => e < *k,
            QuasiOrder::Finite { names, .. } => (e as usize) < names.len(),
            QuasiOrder::Lazy { .. } => true,
            QuasiOrder::Restricted { base, bound } => base.contains(e) && base.lt(e, *bound),
        }
    }

    /// All elements, for finite orders.
    pub fn elements(&self) -> Option<Vec<Elem>> {
        match self {
            QuasiOrder::Ordinal(k) => Some((0..*k).collect()),
            QuasiOrder::Finite { names, .. } => Some((0..names.len() as Elem).collect()),
            QuasiOrder::Lazy { .. } => None,
            QuasiOrder::Restricted { base, bound } => {
                Some(base.elements()?.into_iter().filter(|&e| base.lt(e, *bound)).collect())
            }
        }
    }

    pub fn name(&self, e: Elem) -> String {
        match self {
            QuasiOrder::Finite { names, .. } => names.get(e as usize).cloned().unwrap_or_else(|| format!("#{e}")),
            QuasiOrder::Restricted { base, .. } => base.name(e),
            _ => e.to_string(),
        }
    }

    pub fn lookup(&self, name: &str) -> Option<Elem> {
        let e = match self {
            QuasiOrder::Finite { names, .. } => names.iter().position(|n| n == name)? as Elem,
            QuasiOrder::Restricted { base, .. } => base.lookup(name)?,
            _ => name.parse().ok()?,
        };
        self.contains(e).then_some(e)
    }

    /// `Λ|_{<x}`.
    pub fn restrict(&self, x: Elem) -> QuasiOrder {
        QuasiOrder::Restricted { base: Arc::new(self.clone()), bound: x }
    }

    /// The ordinal position of an element when `Λ` is a finite ordinal.
    pub fn ordinal_index(&self, e: Elem) -> Option<u64> {
        match self {
            QuasiOrder::Ordinal(_) => Some(e),
            QuasiOrder::Restricted { base, .. } => base.ordinal_index(e),
            _ => None,
        }
    }

    /// Check reflexivity, transitivity and totality: exhaustively for finite
    /// orders, on the handles `0..24` for lazy ones.
    pub fn check(&self) -> Result<()> {
        let elems = self.elements().unwrap_or_else(|| (0..24).collect());
        for &a in &elems {
            if !self.leq(a, a) {
                return Err(Error::InvalidInput(format!("order is not reflexive at {}", self.name(a))));
            }
            for &b in &elems {
                if !self.leq(a, b) && !self.leq(b, a) {
                    return Err(Error::InvalidInput(format!(
                        "{} and {} are incomparable",
                        self.name(a),
                        self.name(b)
                    )));
                }
                for &c in &elems {
                    if self.leq(a, b) && self.leq(b, c) && !self.leq(a, c) {
                        return Err(Error::InvalidInput(format!(
                            "order is not transitive at {}, {}, {}",
                            self.name(a),
                            self.name(b),
                            self.name(c)
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// A term of `O(α,Λ)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VTerm {
    Zero,
    /// `φ(α,x)` for `x ∈ Λ`.
    PhiTop(Elem),
    /// `φ(β,t)` for a level `β < α`.
    PhiLow(u32, Arc<VTerm>),
    /// `t₁+⋯+t_n`, `n ≥ 2`, no summand a sum.
    Sum(Arc<Vec<VTerm>>),
}

impl VTerm {
    pub fn phi(level: u32, t: VTerm) -> VTerm {
        VTerm::PhiLow(level, Arc::new(t))
    }

    /// The sum of `items`, flattening nested sums; a single item is
    /// returned as is and the empty sum is `0`.
    pub fn sum(items: Vec<VTerm>) -> VTerm {
        let mut flat = Vec::with_capacity(items.len());
        for t in items {
            match t {
                VTerm::Sum(ts) => flat.extend(ts.iter().cloned()),
                t => flat.push(t),
            }
        }
        match flat.len() {
            0 => VTerm::Zero,
            1 => flat.pop().expect("one item"),
            _ => VTerm::Sum(Arc::new(flat)),
        }
    }

    /// Number of syntax-tree nodes.
    pub fn size(&self) -> usize {
        match self {
            VTerm::Zero => 1,
            VTerm::PhiTop(_) => 2,
            VTerm::PhiLow(_, t) => 1 + t.size(),
            VTerm::Sum(ts) => 1 + ts.iter().map(VTerm::size).sum::<usize>(),
        }
    }

    fn summands(&self) -> &[VTerm] {
        match self {
            VTerm::Sum(ts) => ts,
            t => std::slice::from_ref(t),
        }
    }
}

/// The system `O(α,Λ)`.
#[derive(Clone, Debug)]
pub struct VSystem {
    pub alpha: u32,
    pub lambda: QuasiOrder,
}

impl VSystem {
    pub fn new(alpha: u32, lambda: QuasiOrder) -> Self {
        VSystem { alpha, lambda }
    }

    /// Check that `t` belongs to `O(α,Λ)`.
    pub fn check(&self, t: &VTerm) -> Result<()> {
        match t {
            VTerm::Zero => Ok(()),
            VTerm::PhiTop(x) if self.lambda.contains(*x) => Ok(()),
            VTerm::PhiTop(x) => Err(Error::InvalidInput(format!("{x} is not an element of Λ"))),
            VTerm::PhiLow(b, _) if *b >= self.alpha => {
                Err(Error::InvalidInput(format!("level {b} is not below α = {}", self.alpha)))
            }
            VTerm::PhiLow(_, s) => self.check(s),
            VTerm::Sum(ts) if ts.len() < 2 => Err(Error::InvalidInput("a sum has at least two summands".into())),
            VTerm::Sum(ts) => {
                for s in ts.iter() {
                    if matches!(s, VTerm::Sum(_)) {
                        return Err(Error::InvalidInput("a summand may not be a sum".into()));
                    }
                    self.check(s)?;
                }
                Ok(())
            }
        }
    }

    /// The `≤_Λ`-largest `x` with `φ(α,x)` occurring in `t`; `None` when
    /// there is none.
    pub fn h_lambda(&self, t: &VTerm) -> Option<Elem> {
        match t {
            VTerm::Zero => None,
            VTerm::PhiTop(x) => Some(*x),
            VTerm::PhiLow(_, s) => self.h_lambda(s),
            VTerm::Sum(ts) => ts.iter().filter_map(|s| self.h_lambda(s)).fold(None, |m, x| match m {
                Some(y) if self.lambda.leq(x, y) => Some(y),
                _ => Some(x),
            }),
        }
    }

    /// `t ≤_{α,Λ} s`.
    pub fn leq(&self, t: &VTerm, s: &VTerm) -> bool {
        match (t, s) {
            (VTerm::Zero, _) => true,
            (VTerm::PhiTop(x), _) => self.h_lambda(s).is_some_and(|y| self.lambda.leq(*x, y)),
            (VTerm::Sum(_), _) | (_, VTerm::Sum(_)) => self.leq_sums(t.summands(), s.summands()),
            (VTerm::PhiLow(b, t0), VTerm::PhiLow(g, s0)) => match b.cmp(g) {
                Ordering::Less => self.leq(t0, s),
                Ordering::Equal => self.leq(t0, s0),
                Ordering::Greater => self.leq(t, s0),
            },
            // φ(α,y) sits above every level β < α.
            (VTerm::PhiLow(_, t0), VTerm::PhiTop(_)) => self.leq(t0, s),
            (VTerm::PhiLow(..), VTerm::Zero) => false,
        }
    }

    /// The sum rule: a weakly increasing `f` with `t_i ≤ s_{f(i)}`, strictly
    /// increasing after a summand matched by an equivalent one.  Summands
    /// `0` are ignored.  The least admissible index is always the best
    /// choice, so a greedy scan decides existence.
    fn leq_sums(&self, ts: &[VTerm], ss: &[VTerm]) -> bool {
        let ts: Vec<&VTerm> = ts.iter().filter(|t| **t != VTerm::Zero).collect();
        let ss: Vec<&VTerm> = ss.iter().filter(|s| **s != VTerm::Zero).collect();
        let mut j = 0;
        for (i, t) in ts.iter().enumerate() {
            let Some(k) = (j..ss.len()).find(|&k| self.leq(t, ss[k])) else {
                return false;
            };
            j = if i + 1 < ts.len() && self.leq(ss[k], t) { k + 1 } else { k };
        }
        true
    }

    pub fn lt(&self, t: &VTerm, s: &VTerm) -> bool {
        self.leq(t, s) && !self.leq(s, t)
    }

    pub fn equiv(&self, t: &VTerm, s: &VTerm) -> bool {
        self.leq(t, s) && self.leq(s, t)
    }

    /// The ordinal denoted by `t` when `Λ` is a finite ordinal.
    pub fn value(&self, t: &VTerm) -> Result<Vnf> {
        match t {
            VTerm::Zero => Ok(Vnf::zero()),
            VTerm::PhiTop(x) => {
                let k = self
                    .lambda
                    .ordinal_index(*x)
                    .ok_or_else(|| Error::InvalidInput("values need Λ to be a finite ordinal".into()))?;
                Ok(vnf_phi(&Vnf::nat(self.alpha as u64), &Vnf::nat(k)))
            }
            VTerm::PhiLow(b, s) => Ok(vnf_phi(&Vnf::nat(*b as u64), &self.value(s)?)),
            VTerm::Sum(ts) => ts.iter().try_fold(Vnf::zero(), |acc, s| Ok(vnf_add(&acc, &self.value(s)?))),
        }
    }

    /// Parse the textual syntax `0 | phi(<level>|T, <arg>) | t + t + …`,
    /// with `Λ`-elements quoted, e.g. `phi(0, phi(T,'a')) + 0`.
    pub fn parse(&self, text: &str) -> Result<VTerm> {
        let mut p = TermParser { src: text.as_bytes(), pos: 0, lambda: &self.lambda };
        let t = p.sum()?;
        p.ws();
        if p.pos != p.src.len() {
            return Err(Error::parse(p.pos, "unexpected trailing input"));
        }
        self.check(&t).map_err(|e| Error::parse(0, e.to_string()))?;
        Ok(t)
    }

    pub fn format(&self, t: &VTerm) -> String {
        match t {
            VTerm::Zero => "0".into(),
            VTerm::PhiTop(x) => format!("phi(T,'{}')", self.lambda.name(*x)),
            VTerm::PhiLow(b, s) => format!("phi({b},{})", self.format(s)),
            VTerm::Sum(ts) => ts.iter().map(|s| self.format(s)).collect::<Vec<_>>().join(" + "),
        }
    }

    /// All terms of size at most `max_size`, ordered by size and then
    /// lexicographically.  Needs a finite `Λ`.
    pub fn enumerate(&self, max_size: usize) -> Result<Vec<VTerm>> {
        let elems = self
            .lambda
            .elements()
            .ok_or_else(|| Error::InvalidInput("enumeration needs a finite Λ".into()))?;
        let mut nonsum: Vec<Vec<VTerm>> = vec![Vec::new(); max_size + 1];
        let mut all: Vec<Vec<VTerm>> = vec![Vec::new(); max_size + 1];
        for n in 1..=max_size {
            let mut here = Vec::new();
            if n == 1 {
                here.push(VTerm::Zero);
            }
            if n == 2 {
                here.extend(elems.iter().map(|&e| VTerm::PhiTop(e)));
            }
            for b in 0..self.alpha {
                here.extend(all[n - 1].iter().map(|t| VTerm::phi(b, t.clone())));
            }
            nonsum[n] = here.clone();
            if n >= 3 {
                let mut seqs = Vec::new();
                compositions(n - 1, &nonsum, &mut Vec::new(), &mut seqs);
                here.extend(seqs.into_iter().filter(|s| s.len() >= 2).map(|s| VTerm::Sum(Arc::new(s))));
            }
            here.sort();
            all[n] = here;
        }
        Ok(all.into_iter().flatten().collect())
    }

    /// The normal form of a term of `O(0,Λ)`: the weakly decreasing
    /// `λ₀ ≥ ⋯ ≥ λ_n` with `t ≡ φ(0,λ₀)+⋯+φ(0,λ_n)`.
    pub fn normal_form0(&self, t: &VTerm) -> Result<Vec<Elem>> {
        let mut out: Vec<Elem> = Vec::new();
        for s in t.summands() {
            match s {
                VTerm::Zero => {}
                VTerm::PhiTop(x) => {
                    while out.last().is_some_and(|&y| self.lambda.lt(y, *x)) {
                        out.pop();
                    }
                    out.push(*x);
                }
                _ => return Err(Error::InvalidInput("normal forms need a term of O(0,Λ)".into())),
            }
        }
        Ok(out)
    }

    /// The term `φ(0,λ₀)+⋯+φ(0,λ_n)`.
    pub fn nf0_term(xs: &[Elem]) -> VTerm {
        VTerm::sum(xs.iter().map(|&x| VTerm::PhiTop(x)).collect())
    }
}

fn compositions(rem: usize, nonsum: &[Vec<VTerm>], cur: &mut Vec<VTerm>, out: &mut Vec<Vec<VTerm>>) {
    if rem == 0 {
        out.push(cur.clone());
        return;
    }
    for a in 1..=rem.min(nonsum.len() - 1) {
        for t in &nonsum[a] {
            cur.push(t.clone());
            compositions(rem - a, nonsum, cur, out);
            cur.pop();
        }
    }
}

struct TermParser<'a> {
    src: &'a [u8],
    pos: usize,
    lambda: &'a QuasiOrder,
}

impl TermParser<'_> {
    fn ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> Result<()> {
        self.ws();
        if self.src.get(self.pos) == Some(&c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::parse(self.pos, format!("expected `{}`", c as char)))
        }
    }

    fn sum(&mut self) -> Result<VTerm> {
        let mut items = vec![self.atom()?];
        loop {
            self.ws();
            if self.src.get(self.pos) == Some(&b'+') {
                self.pos += 1;
                items.push(self.atom()?);
            } else {
                break;
            }
        }
        Ok(if items.len() == 1 { items.pop().expect("one item") } else { VTerm::Sum(Arc::new(items)) })
    }

    fn number(&mut self) -> Result<u32> {
        self.ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::parse(start, "expected a level"))
    }

    fn atom(&mut self) -> Result<VTerm> {
        self.ws();
        if self.src[self.pos..].starts_with(b"phi") {
            self.pos += 3;
            self.eat(b'(')?;
            self.ws();
            let top = self.src.get(self.pos) == Some(&b'T');
            let level = if top {
                self.pos += 1;
                None
            } else {
                Some(self.number()?)
            };
            self.eat(b',')?;
            let t = match level {
                None => {
                    self.eat(b'\'')?;
                    let start = self.pos;
                    while self.pos < self.src.len() && self.src[self.pos] != b'\'' {
                        self.pos += 1;
                    }
                    let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
                    let x = self
                        .lambda
                        .lookup(name)
                        .ok_or_else(|| Error::parse(start, format!("`{name}` is not an element of Λ")))?;
                    self.eat(b'\'')?;
                    VTerm::PhiTop(x)
                }
                Some(b) => VTerm::phi(b, self.sum()?),
            };
            self.eat(b')')?;
            Ok(t)
        } else if self.src.get(self.pos) == Some(&b'0') {
            self.pos += 1;
            Ok(VTerm::Zero)
        } else {
            Err(Error::parse(self.pos, "expected `0` or `phi(`"))
        }
    }
}

// ---------------------------------------------------------------------------
// Ordinals below Γ₀ in Veblen normal form.
// ---------------------------------------------------------------------------

/// An ordinal below `Γ₀`: a weakly decreasing sum of `φ(a,b)` with
/// `b < φ(a,b)`.  Normal forms are unique, so structural equality is
/// ordinal equality.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Vnf(Arc<Vec<(Vnf, Vnf)>>);

impl Vnf {
    pub fn zero() -> Vnf {
        Vnf(Arc::new(Vec::new()))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn terms(&self) -> &[(Vnf, Vnf)] {
        &self.0
    }

    /// The natural number `n`.
    pub fn nat(n: u64) -> Vnf {
        Vnf(Arc::new(vec![(Vnf::zero(), Vnf::zero()); n as usize]))
    }

    pub fn omega() -> Vnf {
        vnf_phi(&Vnf::zero(), &Vnf::nat(1))
    }

    fn single(a: &Vnf, b: &Vnf) -> Vnf {
        Vnf(Arc::new(vec![(a.clone(), b.clone())]))
    }

    fn as_nat(&self) -> Option<usize> {
        self.0.iter().all(|(a, b)| a.is_zero() && b.is_zero()).then_some(self.0.len())
    }
}

fn term_cmp(x: &(Vnf, Vnf), y: &(Vnf, Vnf)) -> Ordering {
    let ((a1, b1), (a2, b2)) = (x, y);
    match vnf_compare(a1, a2) {
        Ordering::Less => vnf_compare(b1, &Vnf::single(a2, b2)),
        Ordering::Equal => vnf_compare(b1, b2),
        Ordering::Greater => vnf_compare(&Vnf::single(a1, b1), b2),
    }
}

/// Ordinal comparison.
pub fn vnf_compare(a: &Vnf, b: &Vnf) -> Ordering {
    for (x, y) in a.0.iter().zip(b.0.iter()) {
        match term_cmp(x, y) {
            Ordering::Equal => {}
            o => return o,
        }
    }
    a.0.len().cmp(&b.0.len())
}

/// Ordinal addition; summands of `a` below the head of `b` are absorbed.
pub fn vnf_add(a: &Vnf, b: &Vnf) -> Vnf {
    let Some(head) = b.0.first() else {
        return a.clone();
    };
    let keep = a.0.iter().take_while(|x| term_cmp(x, head) != Ordering::Less).count();
    let mut v: Vec<(Vnf, Vnf)> = a.0[..keep].to_vec();
    v.extend(b.0.iter().cloned());
    Vnf(Arc::new(v))
}

/// `φ(a,b)`, normalised: `φ(a, φ(c,d)) = φ(c,d)` when `c > a`.
pub fn vnf_phi(a: &Vnf, b: &Vnf) -> Vnf {
    if let [(c, _)] = b.0.as_slice() {
        if vnf_compare(c, a) == Ordering::Greater {
            return b.clone();
        }
    }
    Vnf::single(a, b)
}

impl fmt::Display for Vnf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(n) = self.as_nat() {
            return write!(f, "{n}");
        }
        let mut parts: Vec<String> = Vec::new();
        let mut i = 0;
        while i < self.0.len() {
            let mut j = i;
            while j < self.0.len() && self.0[j] == self.0[i] {
                j += 1;
            }
            let (a, b) = &self.0[i];
            let base = if a.is_zero() {
                if b.is_zero() {
                    "1".to_string()
                } else if b.as_nat() == Some(1) {
                    "ω".to_string()
                } else {
                    format!("ω^({b})")
                }
            } else {
                format!("φ({a},{b})")
            };
            if b.is_zero() && a.is_zero() {
                // Trailing finite part.
                parts.push((j - i).to_string());
            } else if j - i > 1 {
                parts.push(format!("{base}·{}", j - i));
            } else {
                parts.push(base);
            }
            i = j;
        }
        f.write_str(&parts.join(" + "))
    }
}

// ---------------------------------------------------------------------------
// Exhaustive checks.
// ---------------------------------------------------------------------------

/// Results of the exhaustive comparison checks on one enumeration.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExhaustiveReport {
    pub terms: usize,
    pub pairs: usize,
    /// Pairs where `leq` disagrees with the value oracle (absent when `Λ`
    /// is not a finite ordinal).
    pub oracle_mismatches: Option<usize>,
    pub first_mismatch: Option<(String, String)>,
    /// Lemma item 1: reflexive, total and transitive.
    pub quasi_linear: bool,
    /// Lemma item 2 on every enumerated `s₀+s₁` and `φ(β,t)`.
    pub item2_checked: usize,
    pub item2_ok: bool,
    /// Lemma item 3 for every enumerated `φ(β,t)` and `γ < β`.
    pub item3_checked: usize,
    pub item3_ok: bool,
    /// Lemma item 4 for every enumerated pair and level.
    pub item4_checked: usize,
    pub item4_ok: bool,
}

impl ExhaustiveReport {
    pub fn all_ok(&self) -> bool {
        self.oracle_mismatches.unwrap_or(0) == 0 && self.quasi_linear && self.item2_ok && self.item3_ok && self.item4_ok
    }
}

/// Check the comparison on all terms of size at most `max_size`.
pub fn exhaustive_check(sys: &VSystem, max_size: usize) -> Result<ExhaustiveReport> {
    let terms = sys.enumerate(max_size)?;
    let n = terms.len();
    let index: HashMap<&VTerm, usize> = terms.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let m: Vec<Vec<bool>> = terms.iter().map(|t| terms.iter().map(|s| sys.leq(t, s)).collect()).collect();
    let lt = |i: usize, j: usize| m[i][j] && !m[j][i];
    let mut rep = ExhaustiveReport { terms: n, pairs: n * n, ..Default::default() };

    // Value oracle: rank the distinct values, then compare ranks.
    if sys.lambda.elements().is_some_and(|es| es.iter().all(|&e| sys.lambda.ordinal_index(e).is_some())) {
        let values: Vec<Vnf> = terms.iter().map(|t| sys.value(t)).collect::<Result<_>>()?;
        let mut distinct: Vec<Vnf> = values.clone();
        distinct.sort_by(vnf_compare);
        distinct.dedup();
        let rank: HashMap<&Vnf, usize> = distinct.iter().enumerate().map(|(i, v)| (v, i)).collect();
        let r: Vec<usize> = values.iter().map(|v| rank[v]).collect();
        let mut bad = 0;
        for i in 0..n {
            for j in 0..n {
                if m[i][j] != (r[i] <= r[j]) {
                    if rep.first_mismatch.is_none() {
                        rep.first_mismatch = Some((sys.format(&terms[i]), sys.format(&terms[j])));
                    }
                    bad += 1;
                }
            }
        }
        rep.oracle_mismatches = Some(bad);
    }

    // Item 1.  With score(i) = |{u : u ≤ i}|, a relation is a total
    // preorder iff it is reflexive and i ≤ j ⟺ score(i) ≤ score(j).
    let score: Vec<usize> = (0..n).map(|j| (0..n).filter(|&i| m[i][j]).count()).collect();
    rep.quasi_linear = (0..n).all(|i| m[i][i] && (0..n).all(|j| m[i][j] == (score[i] <= score[j])));

    // Item 2.
    rep.item2_ok = true;
    for (p, pt) in terms.iter().enumerate() {
        if !matches!(pt, VTerm::PhiTop(_) | VTerm::PhiLow(..)) {
            continue;
        }
        for (q, st) in terms.iter().enumerate() {
            let VTerm::Sum(ss) = st else { continue };
            if ss.len() != 2 {
                continue;
            }
            let (a, b) = (index[&ss[0]], index[&ss[1]]);
            if lt(a, p) && lt(b, p) {
                rep.item2_checked += 1;
                rep.item2_ok &= lt(q, p);
            }
        }
    }

    // Item 3.
    rep.item3_ok = true;
    for t in &terms {
        let beta = match t {
            VTerm::PhiTop(_) => sys.alpha,
            VTerm::PhiLow(b, _) => *b,
            _ => continue,
        };
        for gamma in 0..beta {
            rep.item3_checked += 1;
            rep.item3_ok &= sys.equiv(&VTerm::phi(gamma, t.clone()), t);
        }
    }

    // Item 4.
    rep.item4_ok = true;
    for i in 0..n {
        for j in 0..n {
            if !lt(i, j) {
                continue;
            }
            for beta in 0..sys.alpha {
                rep.item4_checked += 1;
                rep.item4_ok &= sys.lt(&VTerm::phi(beta, terms[i].clone()), &VTerm::phi(beta, terms[j].clone()));
            }
        }
    }
    Ok(rep)
}

/// The correspondence `O(α,Λ)|_{<φ(α,x)} = O(α,Λ|_{<x})` on terms up to a
/// size bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RestrictIso {
    /// Terms of `O(α,Λ)` strictly below `φ(α,x)`.
    pub below: Vec<VTerm>,
    /// Terms of `O(α,Λ|_{<x})`; identical to `below` as a set.
    pub restricted: Vec<VTerm>,
}

/// Verify that the terms below `φ(α,x)` are exactly the terms over
/// `Λ|_{<x}` (identity on syntax), that the two comparisons agree on them,
/// and that each has `h_Λ` strictly below `x`.
pub fn restrict_iso(sys: &VSystem, x: Elem, max_size: usize) -> Result<RestrictIso> {
    if !sys.lambda.contains(x) {
        return Err(Error::InvalidInput(format!("{x} is not an element of Λ")));
    }
    let top = VTerm::PhiTop(x);
    let below: Vec<VTerm> = sys.enumerate(max_size)?.into_iter().filter(|t| sys.lt(t, &top)).collect();
    let sub = VSystem::new(sys.alpha, sys.lambda.restrict(x));
    let restricted = sub.enumerate(max_size)?;
    if below != restricted {
        return Err(Error::ContractViolation("terms below φ(α,x) differ from the restricted system".into()));
    }
    for t in &below {
        if sys.h_lambda(t).is_some_and(|h| !sys.lambda.lt(h, x)) {
            return Err(Error::ContractViolation(format!("{} has h_Λ not below x", sys.format(t))));
        }
        for s in &below {
            if sys.leq(t, s) != sub.leq(t, s) {
                return Err(Error::ContractViolation("restriction changes the order".into()));
            }
        }
    }
    Ok(RestrictIso { below, restricted })
}

// ---------------------------------------------------------------------------
// Descending sequences.
// ---------------------------------------------------------------------------

/// Which branch of the case split produced the descent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransferCase {
    /// Coordinate `i` of the normal forms keeps changing.
    Coordinate(usize),
    /// Every coordinate settles; the diagonal of settled values.
    Diagonal,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transfer {
    pub case: TransferCase,
    pub descent: Vec<Elem>,
}

/// Turn a `<_{0,Λ}`-descending stream into a `<_Λ`-descending list.
///
/// The first `lookahead` stream values form the window.  With `h_i(t)` the
/// `i`-th entry of the normal form of `t` (`-∞` past its end), a coordinate
/// is *settled* when it is constant on the second half of the window.  For
/// the least unsettled coordinate `i`: if it drops at least twice in the
/// second half, its values from the point where all lower coordinates are
/// constant form the descent; otherwise the diagonal `i ↦ h_i(f(n_i))` of
/// settled coordinates does, `n_i` being the least `n > n_{i-1}` from which
/// `h_i` is constant.  The output is re-verified; a window too short to
/// produce a verified descent of length two gives `InsufficientInput`.
pub fn descending_transfer(
    sys: &VSystem,
    stream: impl IntoIterator<Item = VTerm>,
    lookahead: usize,
) -> Result<Transfer> {
    if lookahead < 2 {
        return Err(Error::InsufficientInput(format!("a lookahead of {lookahead} cannot show any descent")));
    }
    let f: Vec<VTerm> = stream.into_iter().take(lookahead).collect();
    if f.len() < lookahead {
        return Err(Error::InsufficientInput(format!("stream ended after {} of {lookahead} values", f.len())));
    }
    if sys.alpha != 0 {
        return Err(Error::InvalidInput("descending transfer works in O(0,Λ)".into()));
    }
    for t in &f {
        sys.check(t)?;
    }
    if let Some(k) = (0..f.len() - 1).find(|&k| !sys.lt(&f[k + 1], &f[k])) {
        return Err(Error::ContractViolation(format!("stream is not descending at position {}", k + 1)));
    }
    let nfs: Vec<Vec<Elem>> = f.iter().map(|t| sys.normal_form0(t)).collect::<Result<_>>()?;
    let lam = &sys.lambda;
    let h = |i: usize, n: usize| nfs[n].get(i).copied();
    let same = |a: Option<Elem>, b: Option<Elem>| match (a, b) {
        (None, None) => true,
        (Some(x), Some(y)) => lam.equiv(x, y),
        _ => false,
    };
    let len = f.len();
    let constant_from = |i: usize, n: usize| (n..len).all(|m| same(h(i, m), h(i, n)));
    let width = nfs.iter().map(Vec::len).max().unwrap_or(0);
    let half = len / 2;
    let unsettled = (0..width).find(|&i| !constant_from(i, half));
    let first_diff = |n: usize| (0..=width).find(|&i| !same(h(i, n), h(i, n + 1)));

    let result = match unsettled {
        Some(i) if (half..len - 1).filter(|&n| first_diff(n) == Some(i)).count() >= 2 => {
            let n0 = (0..len).find(|&n| (0..i).all(|j| constant_from(j, n))).unwrap_or(len);
            let mut out: Vec<Elem> = Vec::new();
            for n in n0..len {
                if let Some(x) = h(i, n) {
                    if !out.last().is_some_and(|&y| lam.equiv(x, y)) {
                        out.push(x);
                    }
                }
            }
            Transfer { case: TransferCase::Coordinate(i), descent: out }
        }
        _ => {
            let mut out = Vec::new();
            let mut next = 0;
            for i in 0..unsettled.unwrap_or(width) {
                let Some(n) = (next..len).find(|&n| constant_from(i, n)) else { break };
                let Some(x) = h(i, n) else { break };
                out.push(x);
                next = n + 1;
            }
            Transfer { case: TransferCase::Diagonal, descent: out }
        }
    };
    let descending = result.descent.windows(2).all(|w| lam.lt(w[1], w[0]));
    if result.descent.len() < 2 || !descending {
        return Err(Error::InsufficientInput(format!(
            "a window of {lookahead} values does not resolve the case split"
        )));
    }
    Ok(result)
}

/// The stream `φ(0,0), φ(0,1), φ(0,2), …` over the reversed naturals:
/// its first coordinate descends forever.
pub fn descending_heads() -> impl Iterator<Item = VTerm> {
    (0..).map(VTerm::PhiTop)
}

/// The stream `f(n) = φ(0,0)+φ(0,1)+⋯+φ(0,n)+φ(0,n)` over the reversed
/// naturals: each coordinate settles, so the descent is the diagonal.
pub fn settling_sums() -> impl Iterator<Item = VTerm> {
    (0..).map(|n: Elem| {
        let mut xs: Vec<Elem> = (0..=n).collect();
        xs.push(n);
        VSystem::nf0_term(&xs)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(alpha: u32, k: u64) -> VSystem {
        VSystem::new(alpha, QuasiOrder::Ordinal(k))
    }

    fn one() -> VTerm {
        VTerm::phi(0, VTerm::Zero)
    }

    #[test]
    fn parse_and_format() {
        let s = VSystem::new(1, QuasiOrder::finite(vec!["a".into()], &[("a".into(), "a".into())]).unwrap());
        assert_eq!(s.parse("0").unwrap(), VTerm::Zero);
        assert_eq!(s.parse("phi(0, phi(T,'a'))").unwrap(), VTerm::phi(0, VTerm::PhiTop(0)));
        let t = s.parse("phi(0,0) + phi(T,'a') + 0").unwrap();
        assert_eq!(s.parse(&s.format(&t)).unwrap(), t);
        assert!(matches!(s.parse("phi(1,0)"), Err(Error::Parse { .. })));
        assert!(matches!(s.parse("phi(T,'b')"), Err(Error::Parse { .. })));
        assert!(matches!(s.parse("phi(0,0"), Err(Error::Parse { .. })));
    }

    #[test]
    fn h_lambda_scans_all_occurrences() {
        let s = sys(1, 3);
        assert_eq!(s.h_lambda(&VTerm::Zero), None);
        assert_eq!(s.h_lambda(&VTerm::PhiTop(1)), Some(1));
        let t = VTerm::sum(vec![VTerm::PhiTop(0), VTerm::phi(0, VTerm::PhiTop(2))]);
        assert_eq!(s.h_lambda(&t), Some(2));
    }

    #[test]
    fn comparison_examples() {
        let s = sys(2, 2);
        let t = VTerm::phi(1, VTerm::PhiTop(0));
        assert!(s.leq(&VTerm::Zero, &t));
        assert!(s.equiv(&VTerm::phi(0, t.clone()), &t));
        let omega = VTerm::phi(0, one());
        assert!(s.lt(&VTerm::sum(vec![one(), one()]), &omega));
        assert!(s.equiv(&VTerm::sum(vec![one(), omega.clone()]), &omega));
        assert!(s.lt(&omega, &VTerm::sum(vec![omega.clone(), one()])));
        assert!(s.equiv(&VTerm::sum(vec![omega.clone(), VTerm::Zero]), &omega));
    }

    #[test]
    fn values() {
        let s = sys(2, 2);
        assert_eq!(s.value(&one()).unwrap(), Vnf::nat(1));
        let omega = VTerm::phi(0, one());
        let w1 = s.value(&VTerm::sum(vec![omega, one()])).unwrap();
        assert_eq!(w1.to_string(), "ω + 1");
        let eps = VTerm::phi(1, VTerm::Zero);
        assert_eq!(s.value(&VTerm::phi(0, eps.clone())).unwrap(), s.value(&eps).unwrap());
        assert!(s.value(&VTerm::Zero).unwrap().is_zero());
    }

    #[test]
    fn vnf_arithmetic() {
        let w = Vnf::omega();
        let one = Vnf::nat(1);
        assert_eq!(vnf_add(&w, &one).to_string(), "ω + 1");
        assert_eq!(vnf_add(&one, &w), w);
        assert_eq!(vnf_phi(&Vnf::zero(), &Vnf::zero()), one);
        let eps = vnf_phi(&one, &Vnf::zero());
        assert_eq!(vnf_compare(&eps, &vnf_phi(&Vnf::zero(), &eps)), Ordering::Equal);
        assert_eq!(vnf_compare(&vnf_phi(&Vnf::zero(), &w), &eps), Ordering::Less);
    }

    #[test]
    fn normal_forms() {
        let s = VSystem::new(0, QuasiOrder::Ordinal(3));
        assert_eq!(s.normal_form0(&VTerm::Zero).unwrap(), Vec::<Elem>::new());
        let t = VTerm::sum(vec![VTerm::PhiTop(0), VTerm::PhiTop(2), VTerm::Zero, VTerm::PhiTop(1)]);
        assert_eq!(s.normal_form0(&t).unwrap(), vec![2, 1]);
        let nf = VSystem::nf0_term(&s.normal_form0(&t).unwrap());
        assert!(s.equiv(&nf, &t));
    }

    #[test]
    fn small_exhaustive() {
        let rep = exhaustive_check(&sys(1, 2), 5).unwrap();
        assert!(rep.all_ok(), "{rep:?}");
        assert!(rep.item2_checked > 0 && rep.item3_checked > 0 && rep.item4_checked > 0);
    }

    #[test]
    fn restriction() {
        let s = sys(1, 2);
        let r = restrict_iso(&s, 1, 5).unwrap();
        assert!(!r.below.is_empty());
        let minimal = restrict_iso(&s, 0, 4).unwrap();
        assert!(minimal.below.iter().all(|t| s.h_lambda(t).is_none()));
    }

    #[test]
    fn transfer_cases() {
        let s = VSystem::new(0, QuasiOrder::reversed_naturals());
        let a = descending_transfer(&s, descending_heads(), 20).unwrap();
        assert_eq!(a.case, TransferCase::Coordinate(0));
        assert_eq!(a.descent, (0..20).collect::<Vec<_>>());
        let b = descending_transfer(&s, settling_sums(), 20).unwrap();
        assert_eq!(b.case, TransferCase::Diagonal);
        assert!(b.descent.len() >= 5);
        assert!(matches!(descending_transfer(&s, descending_heads(), 1), Err(Error::InsufficientInput(_))));
        let up = (0..).map(|n| VTerm::PhiTop(100 - n));
        assert!(matches!(descending_transfer(&s, up, 5), Err(Error::ContractViolation(_))));
    }
}
