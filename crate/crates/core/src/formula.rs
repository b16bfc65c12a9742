//! First-order formulas over `{∈, =}` and their Tarskian evaluation in
//! `(a, ∈)`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::hf::HFSet;
use crate::sexpr::{parse_sexp, Sexp};

/// A formula; variables are natural-number indices.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Member(usize, usize),
    Equal(usize, usize),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Exists(usize, Box<Formula>),
    Forall(usize, Box<Formula>),
}

use Formula::*;

/// A variable assignment: position i holds the value of `x_i`.
pub type Assignment = Vec<HFSet>;

impl Formula {
    pub fn member(i: usize, j: usize) -> Formula {
        Member(i, j)
    }

    pub fn equal(i: usize, j: usize) -> Formula {
        Equal(i, j)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Not(Box::new(f))
    }

    pub fn and(f: Formula, g: Formula) -> Formula {
        And(Box::new(f), Box::new(g))
    }

    pub fn or(f: Formula, g: Formula) -> Formula {
        Or(Box::new(f), Box::new(g))
    }

    pub fn exists(i: usize, f: Formula) -> Formula {
        Exists(i, Box::new(f))
    }

    pub fn forall(i: usize, f: Formula) -> Formula {
        Forall(i, Box::new(f))
    }

    /// `f → g`, desugared to `¬f ∨ g`.
    pub fn implies(f: Formula, g: Formula) -> Formula {
        Formula::or(Formula::not(f), g)
    }

    /// `f ↔ g`, desugared to `(¬f ∨ g) ∧ (¬g ∨ f)`.
    pub fn iff(f: Formula, g: Formula) -> Formula {
        Formula::and(Formula::implies(f.clone(), g.clone()), Formula::implies(g, f))
    }

    /// Extensional equality `∀x (x∈y ↔ x∈z)` with bound variable `x`.
    pub fn ext_eq(y: usize, z: usize, x: usize) -> Formula {
        Formula::forall(x, Formula::iff(Member(x, y), Member(x, z)))
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        match self {
            Member(..) | Equal(..) => 1,
            Not(f) | Exists(_, f) | Forall(_, f) => 1 + f.size(),
            And(f, g) | Or(f, g) => 1 + f.size() + g.size(),
        }
    }

    /// Maximal nesting of quantifiers.
    pub fn quantifier_depth(&self) -> usize {
        match self {
            Member(..) | Equal(..) => 0,
            Not(f) => f.quantifier_depth(),
            And(f, g) | Or(f, g) => f.quantifier_depth().max(g.quantifier_depth()),
            Exists(_, f) | Forall(_, f) => 1 + f.quantifier_depth(),
        }
    }

    /// Free variables.
    pub fn free_vars(&self) -> BTreeSet<usize> {
        match self {
            Member(i, j) | Equal(i, j) => [*i, *j].into_iter().collect(),
            Not(f) => f.free_vars(),
            And(f, g) | Or(f, g) => {
                let mut s = f.free_vars();
                s.extend(g.free_vars());
                s
            }
            Exists(i, f) | Forall(i, f) => {
                let mut s = f.free_vars();
                s.remove(i);
                s
            }
        }
    }

    /// Minimum assignment length: one more than the largest free variable.
    pub fn needed_len(&self) -> usize {
        self.free_vars().last().map_or(0, |m| m + 1)
    }

    /// Every variable index occurring anywhere, bound or free.
    pub fn all_vars(&self) -> BTreeSet<usize> {
        match self {
            Member(i, j) | Equal(i, j) => [*i, *j].into_iter().collect(),
            Not(f) => f.all_vars(),
            And(f, g) | Or(f, g) => {
                let mut s = f.all_vars();
                s.extend(g.all_vars());
                s
            }
            Exists(i, f) | Forall(i, f) => {
                let mut s = f.all_vars();
                s.insert(*i);
                s
            }
        }
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Member(..) | Equal(..))
    }

    /// Atomic or negated atomic.
    pub fn is_literal(&self) -> bool {
        match self {
            Member(..) | Equal(..) => true,
            Not(f) => f.is_atomic(),
            _ => false,
        }
    }

    /// Negation appears only directly above atoms.
    pub fn is_nnf(&self) -> bool {
        match self {
            Member(..) | Equal(..) => true,
            Not(f) => f.is_atomic(),
            And(f, g) | Or(f, g) => f.is_nnf() && g.is_nnf(),
            Exists(_, f) | Forall(_, f) => f.is_nnf(),
        }
    }

    /// Negation normal form.
    pub fn to_nnf(&self) -> Formula {
        match self {
            Member(..) | Equal(..) => self.clone(),
            And(f, g) => Formula::and(f.to_nnf(), g.to_nnf()),
            Or(f, g) => Formula::or(f.to_nnf(), g.to_nnf()),
            Exists(i, f) => Formula::exists(*i, f.to_nnf()),
            Forall(i, f) => Formula::forall(*i, f.to_nnf()),
            Not(f) => match f.as_ref() {
                Member(..) | Equal(..) => self.clone(),
                Not(g) => g.to_nnf(),
                And(g, h) => Formula::or(Formula::not((**g).clone()).to_nnf(), Formula::not((**h).clone()).to_nnf()),
                Or(g, h) => Formula::and(Formula::not((**g).clone()).to_nnf(), Formula::not((**h).clone()).to_nnf()),
                Exists(i, g) => Formula::forall(*i, Formula::not((**g).clone()).to_nnf()),
                Forall(i, g) => Formula::exists(*i, Formula::not((**g).clone()).to_nnf()),
            },
        }
    }

    /// Alphabetic normalisation: free variables renumbered 0,1,… in order
    /// of first occurrence, and the variable bound at quantifier nesting
    /// depth d renumbered `k + d`, where k is the number of free variables.
    pub fn canonical(&self) -> Formula {
        fn first_free(f: &Formula, bound: &mut Vec<usize>, out: &mut Vec<usize>) {
            let note = |v: usize, bound: &Vec<usize>, out: &mut Vec<usize>| {
                if !bound.contains(&v) && !out.contains(&v) {
                    out.push(v);
                }
            };
            match f {
                Member(i, j) | Equal(i, j) => {
                    note(*i, bound, out);
                    note(*j, bound, out);
                }
                Not(g) => first_free(g, bound, out),
                And(g, h) | Or(g, h) => {
                    first_free(g, bound, out);
                    first_free(h, bound, out);
                }
                Exists(i, g) | Forall(i, g) => {
                    bound.push(*i);
                    first_free(g, bound, out);
                    bound.pop();
                }
            }
        }
        fn rename(f: &Formula, free: &[usize], scope: &mut Vec<usize>) -> Formula {
            let k = free.len();
            let var = |v: usize, scope: &Vec<usize>| -> usize {
                match scope.iter().rposition(|&b| b == v) {
                    Some(d) => k + d,
                    None => free.iter().position(|&x| x == v).expect("free variable listed"),
                }
            };
            match f {
                Member(i, j) => Member(var(*i, scope), var(*j, scope)),
                Equal(i, j) => Equal(var(*i, scope), var(*j, scope)),
                Not(g) => Formula::not(rename(g, free, scope)),
                And(g, h) => Formula::and(rename(g, free, scope), rename(h, free, scope)),
                Or(g, h) => Formula::or(rename(g, free, scope), rename(h, free, scope)),
                Exists(i, g) | Forall(i, g) => {
                    let d = scope.len();
                    scope.push(*i);
                    let body = rename(g, free, scope);
                    scope.pop();
                    if matches!(f, Exists(..)) {
                        Formula::exists(k + d, body)
                    } else {
                        Formula::forall(k + d, body)
                    }
                }
            }
        }
        let mut free = Vec::new();
        first_free(self, &mut Vec::new(), &mut free);
        rename(self, &free, &mut Vec::new())
    }

    /// Immediate subformulas.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Member(..) | Equal(..) => vec![],
            Not(f) | Exists(_, f) | Forall(_, f) => vec![f],
            And(f, g) | Or(f, g) => vec![f, g],
        }
    }

    /// All subformulas, including the formula itself.
    pub fn subformulas(&self) -> BTreeSet<Formula> {
        let mut out = BTreeSet::new();
        let mut stack = vec![self];
        while let Some(f) = stack.pop() {
            if out.insert(f.clone()) {
                stack.extend(f.children());
            }
        }
        out
    }

    /// Rename every occurrence (free or bound) of variable `from` to `to`.
    pub fn rename_var(&self, from: usize, to: usize) -> Formula {
        let r = |v: usize| if v == from { to } else { v };
        match self {
            Member(i, j) => Member(r(*i), r(*j)),
            Equal(i, j) => Equal(r(*i), r(*j)),
            Not(f) => Formula::not(f.rename_var(from, to)),
            And(f, g) => Formula::and(f.rename_var(from, to), g.rename_var(from, to)),
            Or(f, g) => Formula::or(f.rename_var(from, to), g.rename_var(from, to)),
            Exists(i, f) => Formula::exists(r(*i), f.rename_var(from, to)),
            Forall(i, f) => Formula::forall(r(*i), f.rename_var(from, to)),
        }
    }

    pub fn from_sexp(s: &Sexp) -> Result<Formula> {
        let Sexp::List { items, pos } = s else {
            return Err(Error::parse(s.pos(), "expected a parenthesised formula"));
        };
        let Some(head) = items.first().and_then(Sexp::as_atom) else {
            return Err(Error::parse(*pos, "formula must start with a connective"));
        };
        let want = |n: usize| -> Result<()> {
            if items.len() == n + 1 {
                Ok(())
            } else {
                Err(Error::parse(*pos, format!("`{head}` takes {n} arguments, found {}", items.len() - 1)))
            }
        };
        Ok(match head {
            "in" | "eq" => {
                want(2)?;
                let (i, j) = (items[1].as_usize()?, items[2].as_usize()?);
                if head == "in" {
                    Member(i, j)
                } else {
                    Equal(i, j)
                }
            }
            "not" => {
                want(1)?;
                Formula::not(Formula::from_sexp(&items[1])?)
            }
            "and" | "or" | "imp" | "iff" => {
                want(2)?;
                let (f, g) = (Formula::from_sexp(&items[1])?, Formula::from_sexp(&items[2])?);
                match head {
                    "and" => Formula::and(f, g),
                    "or" => Formula::or(f, g),
                    "imp" => Formula::implies(f, g),
                    _ => Formula::iff(f, g),
                }
            }
            "ex" | "all" => {
                want(2)?;
                let i = items[1].as_usize()?;
                let f = Formula::from_sexp(&items[2])?;
                if head == "ex" {
                    Formula::exists(i, f)
                } else {
                    Formula::forall(i, f)
                }
            }
            other => return Err(Error::parse(items[0].pos(), format!("unknown connective `{other}`"))),
        })
    }
}

impl FromStr for Formula {
    type Err = Error;
    fn from_str(s: &str) -> Result<Formula> {
        Formula::from_sexp(&parse_sexp(s)?)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Member(i, j) => write!(f, "(in {i} {j})"),
            Equal(i, j) => write!(f, "(eq {i} {j})"),
            Not(g) => write!(f, "(not {g})"),
            And(g, h) => write!(f, "(and {g} {h})"),
            Or(g, h) => write!(f, "(or {g} {h})"),
            Exists(i, g) => write!(f, "(ex {i} {g})"),
            Forall(i, g) => write!(f, "(all {i} {g})"),
        }
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// `σ[b/x_i]`: overwrite position i, or, when `i ≥ |σ|`, extend σ with b at
/// every position `|σ|..=i`.
pub fn assign_update(s: &[HFSet], i: usize, b: &HFSet) -> Assignment {
    let mut out = s.to_vec();
    if i < out.len() {
        out[i] = b.clone();
    } else {
        out.resize(i + 1, b.clone());
    }
    out
}

/// Satisfaction of `f` in `(a, ∈)` under `s`; quantifiers range over the
/// members of `a`.  Values of `s` are not required to lie in `a`.
pub fn eval(a: &HFSet, f: &Formula, s: &[HFSet]) -> Result<bool> {
    let needed = f.needed_len();
    if s.len() < needed {
        return Err(Error::AssignmentTooShort { needed, got: s.len() });
    }
    let mut env = s.to_vec();
    Ok(eval_in(a, f, &mut env))
}

fn eval_in(a: &HFSet, f: &Formula, env: &mut Vec<HFSet>) -> bool {
    match f {
        Member(i, j) => env[*j].contains(&env[*i]),
        Equal(i, j) => env[*i] == env[*j],
        Not(g) => !eval_in(a, g, env),
        And(g, h) => eval_in(a, g, env) && eval_in(a, h, env),
        Or(g, h) => eval_in(a, g, env) || eval_in(a, h, env),
        Exists(i, g) => a.iter().any(|b| with_update(env, *i, b, |env| eval_in(a, g, env))),
        Forall(i, g) => a.iter().all(|b| with_update(env, *i, b, |env| eval_in(a, g, env))),
    }
}

/// Run `k` on `env[b/x_i]`, restoring `env` afterwards.
pub(crate) fn with_update<R>(env: &mut Vec<HFSet>, i: usize, b: &HFSet, k: impl FnOnce(&mut Vec<HFSet>) -> R) -> R {
    if i < env.len() {
        let old = std::mem::replace(&mut env[i], b.clone());
        let r = k(env);
        env[i] = old;
        r
    } else {
        let len = env.len();
        env.resize(i + 1, b.clone());
        let r = k(env);
        env.truncate(len);
        r
    }
}

/// Every formula of size ≤ `max_size` in canonical variable numbering
/// (see [`Formula::canonical`]), each alphabetic-variant class once,
/// ordered by size and then structurally.
pub fn enumerate_canonical(max_size: usize) -> Vec<Formula> {
    // Free variables are generated as 0,1,2,… by first occurrence; bound
    // variables as BOUND + nesting depth, renumbered once k is known.
    const BOUND: usize = 1 << 20;

    fn gen(size: usize, k: usize, depth: usize, out: &mut Vec<(Formula, usize)>) {
        if size == 1 {
            let first: Vec<(usize, usize)> = (0..depth)
                .map(|d| (BOUND + d, k))
                .chain((0..=k).map(|v| (v, if v == k { k + 1 } else { k })))
                .collect();
            for &(x, k1) in &first {
                let second: Vec<(usize, usize)> = (0..depth)
                    .map(|d| (BOUND + d, k1))
                    .chain((0..=k1).map(|v| (v, if v == k1 { k1 + 1 } else { k1 })))
                    .collect();
                for &(y, k2) in &second {
                    out.push((Member(x, y), k2));
                    out.push((Equal(x, y), k2));
                }
            }
            return;
        }
        let mut sub = Vec::new();
        gen(size - 1, k, depth, &mut sub);
        for (f, k1) in sub {
            out.push((Formula::not(f), k1));
        }
        let mut sub = Vec::new();
        gen(size - 1, k, depth + 1, &mut sub);
        for (f, k1) in sub {
            out.push((Formula::exists(BOUND + depth, f.clone()), k1));
            out.push((Formula::forall(BOUND + depth, f), k1));
        }
        for left in 1..size - 1 {
            let right = size - 1 - left;
            let mut ls = Vec::new();
            gen(left, k, depth, &mut ls);
            for (f, k1) in ls {
                let mut rs = Vec::new();
                gen(right, k1, depth, &mut rs);
                for (g, k2) in rs {
                    out.push((Formula::and(f.clone(), g.clone()), k2));
                    out.push((Formula::or(f.clone(), g), k2));
                }
            }
        }
    }

    fn finish(f: &Formula, k: usize) -> Formula {
        let v = |x: usize| if x >= BOUND { k + (x - BOUND) } else { x };
        match f {
            Member(i, j) => Member(v(*i), v(*j)),
            Equal(i, j) => Equal(v(*i), v(*j)),
            Not(g) => Formula::not(finish(g, k)),
            And(g, h) => Formula::and(finish(g, k), finish(h, k)),
            Or(g, h) => Formula::or(finish(g, k), finish(h, k)),
            Exists(i, g) => Formula::exists(v(*i), finish(g, k)),
            Forall(i, g) => Formula::forall(v(*i), finish(g, k)),
        }
    }

    let mut all = Vec::new();
    for size in 1..=max_size {
        let mut raw = Vec::new();
        gen(size, 0, 0, &mut raw);
        let mut set: BTreeSet<Formula> = raw.iter().map(|(f, k)| finish(f, *k)).collect();
        all.extend(std::mem::take(&mut set));
    }
    all
}

/// Default ceiling on the number of (formula, assignment) pairs examined by
/// [`theory`].
pub const DEFAULT_THEORY_LIMIT: usize = 5_000_000;

/// The fragment of `Th(a,∈)` with formulas of size ≤ `max_size`: all pairs
/// `⟨θ,σ⟩` with θ canonical and `σ ∈ a^{k}` (k = number of free variables)
/// such that θ holds.
pub fn theory(a: &HFSet, max_size: usize) -> Result<BTreeSet<(Formula, Assignment)>> {
    let formulas = enumerate_canonical(max_size);
    let mut work = 0usize;
    for f in &formulas {
        work = work.saturating_add(a.len().saturating_pow(f.needed_len() as u32));
    }
    if work > DEFAULT_THEORY_LIMIT {
        return Err(Error::size(format!("theory enumeration with {work} candidate pairs"), DEFAULT_THEORY_LIMIT));
    }
    let mut out = BTreeSet::new();
    for f in formulas {
        for s in assignments(a, f.needed_len()) {
            if eval(a, &f, &s)? {
                out.insert((f.clone(), s));
            }
        }
    }
    Ok(out)
}

/// All assignments `a^k` in lexicographic order.
pub fn assignments(a: &HFSet, k: usize) -> Vec<Assignment> {
    let mut out: Vec<Assignment> = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|s| {
                a.iter().map(move |b| {
                    let mut s = s.clone();
                    s.push(b.clone());
                    s
                })
            })
            .collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hf::von_neumann;

    fn f(s: &str) -> Formula {
        s.parse().unwrap()
    }

    fn set(s: &str) -> HFSet {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_print() {
        let src = "(all 0 (or (in 0 1) (not (eq 0 1))))";
        assert_eq!(f(src).to_string(), src);
        assert_eq!(f("(imp (in 0 1) (in 1 0))"), f("(or (not (in 0 1)) (in 1 0))"));
        assert!("(in 0)".parse::<Formula>().is_err());
        assert!("(foo 0 1)".parse::<Formula>().is_err());
    }

    #[test]
    fn nnf_examples() {
        assert_eq!(
            f("(not (and (in 0 1) (eq 0 1)))").to_nnf(),
            f("(or (not (in 0 1)) (not (eq 0 1)))")
        );
        assert_eq!(f("(not (ex 0 (in 0 1)))").to_nnf(), f("(all 0 (not (in 0 1)))"));
        assert!(f("(not (not (in 0 1)))").to_nnf().is_nnf());
    }

    #[test]
    fn assign_update_examples() {
        let e = HFSet::empty();
        let one = set("{{}}");
        assert_eq!(assign_update(std::slice::from_ref(&e), 0, &one), vec![one.clone()]);
        assert_eq!(assign_update(std::slice::from_ref(&e), 2, &one), vec![e.clone(), one.clone(), one.clone()]);
        let once = assign_update(std::slice::from_ref(&e), 3, &one);
        assert_eq!(assign_update(&once, 3, &one), once);
    }

    #[test]
    fn eval_examples() {
        let e = HFSet::empty();
        assert!(!eval(&set("{{}}"), &f("(in 0 1)"), &[e.clone(), e.clone()]).unwrap());
        assert!(eval(&set("{{} {{}}}"), &f("(ex 0 (in 0 1))"), &[e.clone(), set("{{}}")]).unwrap());
        let four = von_neumann(4).unwrap();
        let three = von_neumann(3).unwrap();
        // Every member of 4 is either in 3 or equal to 3; with 2 in place of 3
        // the member 3 is a counterexample.
        let g = f("(all 0 (or (in 0 1) (eq 0 1)))");
        let brute = |x: &HFSet| four.iter().all(|m| x.contains(m) || m == x);
        assert_eq!(eval(&four, &g, &[e.clone(), three.clone()]).unwrap(), brute(&three));
        assert!(eval(&four, &g, &[e.clone(), three]).unwrap());
        assert!(!eval(&four, &g, &[e.clone(), von_neumann(2).unwrap()]).unwrap());
        assert!(matches!(
            eval(&four, &f("(in 0 1)"), &[e]),
            Err(Error::AssignmentTooShort { needed: 2, got: 1 })
        ));
    }

    #[test]
    fn canonical_renaming() {
        assert_eq!(f("(ex 7 (in 7 3))").canonical(), f("(ex 1 (in 1 0))"));
        assert_eq!(f("(and (in 5 2) (ex 5 (in 5 2)))").canonical(), f("(and (in 0 1) (ex 2 (in 2 1)))"));
    }

    #[test]
    fn enumeration_is_canonical_and_duplicate_free() {
        let all = enumerate_canonical(4);
        let set: BTreeSet<_> = all.iter().cloned().collect();
        assert_eq!(set.len(), all.len());
        for g in &all {
            assert_eq!(&g.canonical(), g, "{g}");
        }
        // Size-1 formulas: in/eq over (0,0) and (0,1).
        assert_eq!(all.iter().filter(|g| g.size() == 1).count(), 4);
    }

    #[test]
    fn theory_of_small_structures() {
        let th = theory(&HFSet::empty(), 3).unwrap();
        assert!(th.contains(&(f("(all 0 (in 0 0))"), vec![])));
        let th = theory(&set("{{}}"), 3).unwrap();
        assert!(th.contains(&(f("(eq 0 0)"), vec![HFSet::empty()])));
        assert!(!th.contains(&(f("(in 0 0)"), vec![HFSet::empty()])));
    }
}
