//! Primitive recursive set functions.
//!
//! Programs are built from projections, zero functions, adjunction
//! `x ∪ {y}`, case distinction, composition and ∈-recursion
//! `f(x,ȳ) = h(⋃{f(z,ȳ) : z ∈ x}, x, ȳ)`, plus the basic rudimentary
//! functions `F₀…F₈`, the collapsing oracle `B` and named constants bound at
//! evaluation time (`ω` is a constant bound to a finite ordinal).

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::collapse::CarrierRelation;
use crate::error::{Error, Result};
use crate::hf::{cartesian, kuratowski, transitive_closure, tuple, unpair, von_neumann, HFSet};
use crate::sexpr::{parse_sexp, Sexp};

/// Default bound on evaluation steps.
pub const DEFAULT_PRIM_FUEL: u64 = 20_000_000;

/// A program denoting a primitive recursive set function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PrimTerm {
    /// `x₀,…,x_{n-1} ↦ x_i`.
    Proj { i: usize, arity: usize },
    /// `x₀,…,x_{n-1} ↦ ∅`.
    Zero { arity: usize },
    /// `x, y ↦ x ∪ {y}`.
    Adjoin,
    /// `x, y, u, v ↦ x if u ∈ v else y`.
    Cond,
    /// `x̄ ↦ g₀(g₁(x̄),…,g_k(x̄))`.
    Comp(Arc<PrimTerm>, Vec<PrimTerm>),
    /// `f(x,ȳ) = h(⋃{f(z,ȳ) : z ∈ x}, x, ȳ)`.
    PrimRec(Arc<PrimTerm>),
    /// The basic rudimentary function `F_i(x,y)`, `i ≤ 8`.
    Rud(u8),
    /// `B(a,r)`: the graph of the collapsing function of `r` on `a`, or `∅`
    /// when `r` is not a well-founded relation on `a`.
    OracleB,
    /// A named constant, usable at any arity.
    Const(String),
}

/// The number of arguments a program takes; constants take any number.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arity {
    Fixed(usize),
    Any,
}

impl Arity {
    fn unify(self, other: Arity) -> Option<Arity> {
        match (self, other) {
            (Arity::Any, a) | (a, Arity::Any) => Some(a),
            (Arity::Fixed(a), Arity::Fixed(b)) => (a == b).then_some(Arity::Fixed(a)),
        }
    }

    fn accepts(self, n: usize) -> bool {
        matches!(self, Arity::Any) || self == Arity::Fixed(n)
    }
}

impl PrimTerm {
    pub fn proj(i: usize, arity: usize) -> PrimTerm {
        PrimTerm::Proj { i, arity }
    }

    pub fn comp(g0: PrimTerm, gs: Vec<PrimTerm>) -> PrimTerm {
        PrimTerm::Comp(Arc::new(g0), gs)
    }

    pub fn primrec(h: PrimTerm) -> PrimTerm {
        PrimTerm::PrimRec(Arc::new(h))
    }

    pub fn constant(name: &str) -> PrimTerm {
        PrimTerm::Const(name.to_owned())
    }

    /// Check arities statically.
    pub fn arity(&self) -> Result<Arity> {
        match self {
            PrimTerm::Proj { i, arity } if i < arity => Ok(Arity::Fixed(*arity)),
            PrimTerm::Proj { i, arity } => Err(Error::Arity(format!("projection {i} out of {arity} arguments"))),
            PrimTerm::Zero { arity } => Ok(Arity::Fixed(*arity)),
            PrimTerm::Adjoin | PrimTerm::Rud(_) | PrimTerm::OracleB => Ok(Arity::Fixed(2)),
            PrimTerm::Cond => Ok(Arity::Fixed(4)),
            PrimTerm::Const(_) => Ok(Arity::Any),
            PrimTerm::Comp(g0, gs) => {
                if !g0.arity()?.accepts(gs.len()) {
                    return Err(Error::Arity(format!("outer function of a composition does not take {} arguments", gs.len())));
                }
                gs.iter().try_fold(Arity::Any, |acc, g| {
                    acc.unify(g.arity()?).ok_or_else(|| Error::Arity("inner functions of a composition disagree in arity".into()))
                })
            }
            PrimTerm::PrimRec(h) => match h.arity()? {
                Arity::Fixed(n) if n >= 2 => Ok(Arity::Fixed(n - 1)),
                _ => Err(Error::Arity("a recursion step needs a fixed arity of at least 2".into())),
            },
        }
    }

    /// Read the s-expression syntax: `(proj i n)`, `(zero n)`, `adjoin`,
    /// `cond`, `(comp g0 g1 …)`, `(primrec h)`, `(rud i)`, `oracle-b`,
    /// `(const name)`.
    pub fn parse(src: &str) -> Result<PrimTerm> {
        let t = PrimTerm::from_sexp(&parse_sexp(src)?)?;
        t.arity()?;
        Ok(t)
    }

    pub fn from_sexp(s: &Sexp) -> Result<PrimTerm> {
        match s {
            Sexp::Atom { text, pos } => match text.as_str() {
                "adjoin" => Ok(PrimTerm::Adjoin),
                "cond" => Ok(PrimTerm::Cond),
                "oracle-b" => Ok(PrimTerm::OracleB),
                other => Err(Error::parse(*pos, format!("unknown program `{other}`"))),
            },
            Sexp::Set { pos, .. } => Err(Error::parse(*pos, "a set literal is not a program")),
            Sexp::List { items, pos } => {
                let head = items.first().and_then(Sexp::as_atom).ok_or_else(|| Error::parse(*pos, "expected a program head"))?;
                let args = &items[1..];
                let want = |n: usize| {
                    if args.len() == n {
                        Ok(())
                    } else {
                        Err(Error::parse(*pos, format!("`{head}` takes {n} argument(s)")))
                    }
                };
                match head {
                    "proj" => {
                        want(2)?;
                        Ok(PrimTerm::proj(args[0].as_usize()?, args[1].as_usize()?))
                    }
                    "zero" => {
                        want(1)?;
                        Ok(PrimTerm::Zero { arity: args[0].as_usize()? })
                    }
                    "rud" => {
                        want(1)?;
                        let i = args[0].as_usize()?;
                        if i > 8 {
                            return Err(Error::parse(args[0].pos(), "rudimentary functions are F0…F8"));
                        }
                        Ok(PrimTerm::Rud(i as u8))
                    }
                    "const" => {
                        want(1)?;
                        let name = args[0].as_atom().ok_or_else(|| Error::parse(args[0].pos(), "expected a name"))?;
                        Ok(PrimTerm::constant(name))
                    }
                    "primrec" => {
                        want(1)?;
                        Ok(PrimTerm::primrec(PrimTerm::from_sexp(&args[0])?))
                    }
                    "comp" => {
                        if args.is_empty() {
                            return Err(Error::parse(*pos, "`comp` needs an outer function"));
                        }
                        let gs = args[1..].iter().map(PrimTerm::from_sexp).collect::<Result<_>>()?;
                        Ok(PrimTerm::comp(PrimTerm::from_sexp(&args[0])?, gs))
                    }
                    other => Err(Error::parse(*pos, format!("unknown program `{other}`"))),
                }
            }
        }
    }
}

impl fmt::Display for PrimTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrimTerm::Proj { i, arity } => write!(f, "(proj {i} {arity})"),
            PrimTerm::Zero { arity } => write!(f, "(zero {arity})"),
            PrimTerm::Adjoin => f.write_str("adjoin"),
            PrimTerm::Cond => f.write_str("cond"),
            PrimTerm::Comp(g0, gs) => {
                write!(f, "(comp {g0}")?;
                for g in gs {
                    write!(f, " {g}")?;
                }
                f.write_str(")")
            }
            PrimTerm::PrimRec(h) => write!(f, "(primrec {h})"),
            PrimTerm::Rud(i) => write!(f, "(rud {i})"),
            PrimTerm::OracleB => f.write_str("oracle-b"),
            PrimTerm::Const(n) => write!(f, "(const {n})"),
        }
    }
}

/// Values of the named constants.
pub type Bindings = BTreeMap<String, HFSet>;

struct Evaluator<'a> {
    bindings: &'a Bindings,
    fuel: u64,
    limit: u64,
    memo: HashMap<(usize, Vec<HFSet>), HFSet>,
}

impl Evaluator<'_> {
    fn tick(&mut self) -> Result<()> {
        self.fuel += 1;
        if self.fuel > self.limit {
            return Err(Error::size("evaluation steps", self.limit as usize));
        }
        Ok(())
    }

    fn eval(&mut self, t: &PrimTerm, args: &[HFSet]) -> Result<HFSet> {
        self.tick()?;
        match t {
            PrimTerm::Proj { i, .. } => Ok(args[*i].clone()),
            PrimTerm::Zero { .. } => Ok(HFSet::empty()),
            PrimTerm::Adjoin => args[0].adjoin(&args[1]),
            PrimTerm::Cond => Ok(if args[3].contains(&args[2]) { args[0].clone() } else { args[1].clone() }),
            PrimTerm::Rud(i) => rud(*i, &args[0], &args[1]),
            PrimTerm::OracleB => beta_oracle(&args[0], &args[1]),
            PrimTerm::Const(name) => self.bindings.get(name).cloned().ok_or_else(|| Error::Unbound(name.clone())),
            PrimTerm::Comp(g0, gs) => {
                let inner = gs.iter().map(|g| self.eval(g, args)).collect::<Result<Vec<_>>>()?;
                self.eval(g0, &inner)
            }
            PrimTerm::PrimRec(h) => self.primrec(t, h, args),
        }
    }

    fn primrec(&mut self, t: &PrimTerm, h: &PrimTerm, args: &[HFSet]) -> Result<HFSet> {
        let key = (t as *const PrimTerm as usize, args.to_vec());
        if let Some(v) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        let mut below = Vec::new();
        for z in args[0].iter() {
            let mut a = args.to_vec();
            a[0] = z.clone();
            below.extend(self.primrec(t, h, &a)?.iter().cloned());
        }
        let mut hargs = Vec::with_capacity(args.len() + 1);
        hargs.push(HFSet::canon(below)?);
        hargs.extend(args.iter().cloned());
        let v = self.eval(h, &hargs)?;
        self.memo.insert(key, v.clone());
        Ok(v)
    }
}

/// Evaluate a program.  Recursion is memoised per evaluation.
pub fn eval_prim(t: &PrimTerm, args: &[HFSet], bindings: &Bindings) -> Result<HFSet> {
    eval_prim_with_fuel(t, args, bindings, DEFAULT_PRIM_FUEL)
}

/// [`eval_prim`] with an explicit bound on evaluation steps.
pub fn eval_prim_with_fuel(t: &PrimTerm, args: &[HFSet], bindings: &Bindings, fuel: u64) -> Result<HFSet> {
    if !t.arity()?.accepts(args.len()) {
        return Err(Error::Arity(format!("program does not take {} arguments", args.len())));
    }
    let mut ev = Evaluator { bindings, fuel: 0, limit: fuel, memo: HashMap::new() };
    ev.eval(t, args)
}

/// The basic rudimentary functions, with `⟨x₀,x₁,…⟩ = ⟨x₀,⟨x₁,…⟩⟩`.
pub fn rud(i: u8, x: &HFSet, y: &HFSet) -> Result<HFSet> {
    let pairs = |s: &HFSet| s.iter().filter_map(unpair).collect::<Vec<_>>();
    match i {
        0 => HFSet::pair(x, y),
        1 => x.difference(y),
        2 => cartesian(x, y),
        3 => {
            let mut out = Vec::new();
            for (u, v) in pairs(y) {
                for w in x.iter() {
                    out.push(tuple(&[u.clone(), w.clone(), v.clone()])?);
                }
            }
            HFSet::canon(out)
        }
        4 => {
            let mut out = Vec::new();
            for (u, v) in pairs(y) {
                for w in x.iter() {
                    out.push(tuple(&[u.clone(), v.clone(), w.clone()])?);
                }
            }
            HFSet::canon(out)
        }
        5 => x.big_union(),
        6 => HFSet::canon(pairs(x).into_iter().map(|(u, _)| u).collect()),
        7 => {
            let mut out = Vec::new();
            for u in x.iter() {
                for v in x.iter() {
                    if v.contains(u) {
                        out.push(kuratowski(u, v)?);
                    }
                }
            }
            HFSet::canon(out)
        }
        8 => {
            let ps = pairs(x);
            let out = y
                .iter()
                .map(|z| HFSet::canon(ps.iter().filter(|(_, b)| b == z).map(|(w, _)| w.clone()).collect()))
                .collect::<Result<Vec<_>>>()?;
            HFSet::canon(out)
        }
        _ => Err(Error::Arity(format!("there is no rudimentary function F{i}"))),
    }
}

/// `B(a,r)`: the graph `{⟨u,π(u)⟩ : u ∈ a}` of the collapsing function of
/// `r` on `a` (`⟨v,u⟩ ∈ r` puts `π(v)` into `π(u)`), or `∅` when `r` is not
/// a well-founded relation on `a`.
pub fn beta_oracle(a: &HFSet, r: &HFSet) -> Result<HFSet> {
    let mut edges = Vec::with_capacity(r.len());
    for p in r.iter() {
        match unpair(p) {
            Some((v, u)) if a.contains(&v) && a.contains(&u) => edges.push((v, u)),
            _ => return Ok(HFSet::empty()),
        }
    }
    let rel = CarrierRelation::new(a.iter().cloned(), edges)?;
    if !rel.is_well_founded() {
        return Ok(HFSet::empty());
    }
    let pi = rel.collapse()?;
    HFSet::canon(pi.iter().map(|(u, v)| kuratowski(u, v)).collect::<Result<Vec<_>>>()?)
}

/// Library programs.
pub mod programs {
    use super::PrimTerm;

    fn p(i: usize, n: usize) -> PrimTerm {
        PrimTerm::proj(i, n)
    }

    /// `x, y ↦ x ∪ y`, as `F₅(F₀(x,y))`.
    pub fn union() -> PrimTerm {
        PrimTerm::comp(PrimTerm::Rud(5), vec![PrimTerm::Rud(0), PrimTerm::Rud(0)])
    }

    /// `x ↦ {x}` at the given arity, from argument `i`.
    pub fn singleton_of(i: usize, n: usize) -> PrimTerm {
        PrimTerm::comp(PrimTerm::Adjoin, vec![PrimTerm::Zero { arity: n }, p(i, n)])
    }

    /// `TC(x) = ⋃{TC(y) : y ∈ x} ∪ x`.
    pub fn tc() -> PrimTerm {
        PrimTerm::primrec(PrimTerm::comp(union(), vec![p(0, 2), p(1, 2)]))
    }

    /// `x, ȳ ↦ ⋃{g(z,ȳ) : z ∈ x}` for `g` of arity `n`.
    ///
    /// Built by recursion with the top argument carried as a parameter:
    /// at the top the step returns the union of the recursive values, at
    /// every member it returns `g`.  No member of `TC(x)` equals `x`, so
    /// the test `w ∈ {x}` tells the two apart.
    pub fn union_of_image(g: PrimTerm, n: usize) -> PrimTerm {
        // Step arguments: (r, w, x, ȳ), arity n + 2.
        let m = n + 2;
        let g_at_w = PrimTerm::comp(g, (0..n).map(|k| if k == 0 { p(1, m) } else { p(k + 2, m) }).collect());
        let step = PrimTerm::comp(PrimTerm::Cond, vec![p(0, m), g_at_w, p(1, m), singleton_of(2, m)]);
        let rec = PrimTerm::primrec(step);
        // f(x, ȳ) = rec(x, x, ȳ).
        PrimTerm::comp(rec, (0..n + 1).map(|k| if k == 0 { p(0, n) } else { p(k - 1, n) }).collect())
    }

    /// `x, y ↦ x ∪ {u ∪ {v} : u ∈ x, v ∈ y}`.
    pub fn pfin_step() -> PrimTerm {
        // inner(v, u) = {u ∪ {v}}
        let inner = PrimTerm::comp(
            PrimTerm::Adjoin,
            vec![PrimTerm::Zero { arity: 2 }, PrimTerm::comp(PrimTerm::Adjoin, vec![p(1, 2), p(0, 2)])],
        );
        // over_v(y, u) = {u ∪ {v} : v ∈ y}
        let over_v = union_of_image(inner, 2);
        // over_u(x, y) = ⋃{ over_v(y, u) : u ∈ x }
        let g = PrimTerm::comp(over_v, vec![p(1, 2), p(0, 2)]);
        let over_u = union_of_image(g, 2);
        PrimTerm::comp(union(), vec![p(0, 2), over_u])
    }

    /// `H(z, x, y) = f(y ∪ ⋃{H(w,x,y) : w ∈ z}, x)` with `f` the
    /// [`pfin_step`]; `H(n, x, {∅})` holds the subsets of `x` of size at
    /// most `n + 1`.
    pub fn pfin_h() -> PrimTerm {
        // step(r, z, x, y) = f(r ∪ y, x)
        let seeded = PrimTerm::comp(union(), vec![p(0, 4), p(3, 4)]);
        PrimTerm::primrec(PrimTerm::comp(pfin_step(), vec![seeded, p(2, 4)]))
    }

    /// `x ↦ H(ω, x, {∅})`, `ω` a bound constant.
    pub fn pfin() -> PrimTerm {
        let one = PrimTerm::comp(PrimTerm::Adjoin, vec![PrimTerm::Zero { arity: 1 }, PrimTerm::Zero { arity: 1 }]);
        PrimTerm::comp(pfin_h(), vec![PrimTerm::constant("omega"), p(0, 1), one])
    }

    /// `x ↦ B(T, {⟨u,v⟩ : v ∈ T, u ∈ TC(v)})` with `T = TC({x})`: the graph
    /// of the rank function on `T`.
    pub fn rank_graph() -> PrimTerm {
        let kpair = |a: PrimTerm, b: PrimTerm| {
            PrimTerm::comp(
                PrimTerm::Rud(0),
                vec![
                    PrimTerm::comp(PrimTerm::Rud(0), vec![a.clone(), a.clone()]),
                    PrimTerm::comp(PrimTerm::Rud(0), vec![a, b]),
                ],
            )
        };
        // pairs_into(u, v) = {⟨u,v⟩}
        let single_pair = PrimTerm::comp(PrimTerm::Adjoin, vec![PrimTerm::Zero { arity: 2 }, kpair(p(0, 2), p(1, 2))]);
        // below(v) = {⟨u,v⟩ : u ∈ TC(v)} = ⋃{ {⟨u,v⟩} : u ∈ TC(v) }
        let over_u = union_of_image(single_pair, 2);
        let below = PrimTerm::comp(over_u, vec![PrimTerm::comp(tc(), vec![p(0, 1)]), p(0, 1)]);
        // rel(T) = ⋃{ below(v) : v ∈ T }
        let rel = union_of_image(below, 1);
        let t = PrimTerm::comp(tc(), vec![singleton_of(0, 1)]);
        PrimTerm::comp(PrimTerm::OracleB, vec![t.clone(), PrimTerm::comp(rel, vec![t])])
    }
}

/// `TC(x)` computed by the recursive program [`programs::tc`].
pub fn tc_rud(x: &HFSet) -> Result<HFSet> {
    eval_prim(&programs::tc(), std::slice::from_ref(x), &Bindings::new())
}

/// Result of the finite-powerset program.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PfinResult {
    pub set: HFSet,
    /// False when `n < |x|`: the result then holds only the subsets of size
    /// at most `n + 1`.
    pub complete: bool,
}

/// The finite powerset program with `ω` bound to the ordinal `n`.
pub fn pfin_prim(x: &HFSet, n: usize) -> Result<PfinResult> {
    let mut b = Bindings::new();
    b.insert("omega".into(), von_neumann(n)?);
    let set = eval_prim(&programs::pfin(), std::slice::from_ref(x), &b)?;
    Ok(PfinResult { set, complete: n >= x.len() })
}

/// The rank function of `x` through the collapsing oracle, as a map on
/// `TC({x})`.
pub fn rank_via_oracle(x: &HFSet) -> Result<BTreeMap<HFSet, HFSet>> {
    let graph = eval_prim(&programs::rank_graph(), std::slice::from_ref(x), &Bindings::new())?;
    let map: BTreeMap<HFSet, HFSet> = graph.iter().filter_map(unpair).collect();
    if map.len() != transitive_closure(&HFSet::singleton(x)?)?.len() {
        return Err(Error::ContractViolation("rank graph does not cover TC({x})".into()));
    }
    Ok(map)
}
