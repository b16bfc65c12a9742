//! C ABI for collapse-lab.
//!
//! Conventions:
//! - Every fallible function returns a [`ClStatus`]; results go through
//!   out-pointers.  On failure [`cl_last_error_message`] describes the error.
//! - Sets and trees are opaque handles, released with [`cl_set_free`] and
//!   [`cl_tree_free`].  Strings returned to the caller are released with
//!   [`cl_string_free`].
//! - Panics never cross the boundary; they become [`ClStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use collapse_lab::bisim::maximal_bisimulation;
use collapse_lab::constructible::l_level;
use collapse_lab::formula::{eval, Formula};
use collapse_lab::hf::{finite_powerset, rank, transitive_closure, v_level, von_neumann};
use collapse_lab::prs::{eval_prim, Bindings, PrimTerm};
use collapse_lab::sexpr::{parse_set, parse_set_list};
use collapse_lab::tree::FiniteTree;
use collapse_lab::truth::truth_via_collapse;
use collapse_lab::veblen::{QuasiOrder, VSystem};
use collapse_lab::{Error, HFSet};

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    SizeLimit = 4,
    NotWellFounded = 5,
    InvalidInput = 6,
    Domain = 7,
    Panic = 8,
}

/// Outcome of [`cl_veblen_compare`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClOrder {
    Less = -1,
    Equivalent = 0,
    Greater = 1,
    Incomparable = 2,
}

/// A hereditarily finite set.
pub struct ClSet(HFSet);

/// A finite labelled tree.
pub struct ClTree(FiniteTree);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior NUL");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> ClStatus {
    match e {
        Error::Parse { .. } | Error::Json(_) | Error::Arity(_) | Error::Unbound(_) => ClStatus::Parse,
        Error::SizeLimit { .. } => ClStatus::SizeLimit,
        Error::NotWellFounded { .. } => ClStatus::NotWellFounded,
        Error::InvalidInput(_) | Error::AssignmentTooShort { .. } | Error::NotNnf(_) => ClStatus::InvalidInput,
        _ => ClStatus::Domain,
    }
}

struct Fail(ClStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

type Res<T> = std::result::Result<T, Fail>;

/// Run `f`, record any error and translate it to a status.
fn guard(f: impl FnOnce() -> Res<()>) -> ClStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ClStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            ClStatus::Panic
        }
    }
}

/// # Safety
/// `p` is null or a valid NUL-terminated string.
unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Res<&'a str> {
    if p.is_null() {
        return Err(Fail(ClStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(ClStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

/// # Safety
/// `p` is null or points to a live handle.
unsafe fn handle<'a, T>(p: *const T, what: &str) -> Res<&'a T> {
    p.as_ref().ok_or_else(|| Fail(ClStatus::NullPointer, format!("{what} is null")))
}

/// # Safety
/// `out` is null or writable.
unsafe fn put<T>(out: *mut T, value: T) -> Res<()> {
    if out.is_null() {
        return Err(Fail(ClStatus::NullPointer, "output pointer is null".into()));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_set(out: *mut *mut ClSet, s: HFSet) -> Res<()> {
    put(out, Box::into_raw(Box::new(ClSet(s))))
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Res<()> {
    let c = CString::new(s).map_err(|_| Fail(ClStatus::Domain, "string contains NUL".into()))?;
    put(out, c.into_raw())
}

/// The message of the last failed call on this thread, or null.  The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` is null or was returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parse a set expression (`{}`, `{a b}`, `#n`).
///
/// # Safety
/// `expr` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn cl_set_parse(expr: *const c_char, out: *mut *mut ClSet) -> ClStatus {
    guard(|| put_set(out, parse_set(str_arg(expr, "expression")?)?))
}

/// The von Neumann ordinal `n`.
///
/// # Safety
/// `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn cl_set_ordinal(n: usize, out: *mut *mut ClSet) -> ClStatus {
    guard(|| put_set(out, von_neumann(n)?))
}

/// The level `V_n`.
///
/// # Safety
/// `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn cl_set_v_level(n: usize, out: *mut *mut ClSet) -> ClStatus {
    guard(|| put_set(out, v_level(n)?))
}

/// # Safety
/// `set` is null or a live handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cl_set_free(set: *mut ClSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Canonical text of a set; release with [`cl_string_free`].
///
/// # Safety
/// `set` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn cl_set_to_string(set: *const ClSet, out: *mut *mut c_char) -> ClStatus {
    guard(|| put_string(out, handle(set, "set")?.0.to_string()))
}

/// Number of members.
///
/// # Safety
/// `set` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn cl_set_len(set: *const ClSet, out: *mut usize) -> ClStatus {
    guard(|| put(out, handle(set, "set")?.0.len()))
}

/// Von Neumann rank.
///
/// # Safety
/// `set` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn cl_set_rank(set: *const ClSet, out: *mut usize) -> ClStatus {
    guard(|| put(out, rank(&handle(set, "set")?.0)))
}

/// Extensional equality.
///
/// # Safety
/// `a` and `b` are live handles; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn cl_set_equal(a: *const ClSet, b: *const ClSet, out: *mut bool) -> ClStatus {
    guard(|| put(out, handle(a, "a")?.0 == handle(b, "b")?.0))
}

/// `x ∈ a`.
///
/// # Safety
/// `a` and `x` are live handles; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn cl_set_contains(a: *const ClSet, x: *const ClSet, out: *mut bool) -> ClStatus {
    guard(|| put(out, handle(a, "a")?.0.contains(&handle(x, "x")?.0)))
}

/// Transitive closure.
///
/// # Safety
/// `set` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn cl_set_transitive_closure(set: *const ClSet, out: *mut *mut ClSet) -> ClStatus {
    guard(|| put_set(out, transitive_closure(&handle(set, "set")?.0)?))
}

/// Powerset.
///
/// # Safety
/// `set` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn cl_set_powerset(set: *const ClSet, out: *mut *mut ClSet) -> ClStatus {
    guard(|| put_set(out, finite_powerset(&handle(set, "set")?.0)?))
}

/// Decide `(a,∈) ⊨ f[σ]`.  `assign` lists the values of x0, x1, … as set
/// expressions.  With `via_collapse` the answer comes from the collapse of
/// the truth-value trees (the formula is first put in negation normal
/// form), otherwise from direct evaluation.
///
/// # Safety
/// `model` is a live handle; `formula` and `assign` are NUL-terminated
/// strings; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn cl_formula_holds(
    model: *const ClSet,
    formula: *const c_char,
    assign: *const c_char,
    via_collapse: bool,
    out: *mut bool,
) -> ClStatus {
    guard(|| {
        let a = &handle(model, "model")?.0;
        let f: Formula = str_arg(formula, "formula")?.parse()?;
        let text = str_arg(assign, "assignment")?;
        let s = if text.trim().is_empty() { Vec::new() } else { parse_set_list(text)? };
        let v = if via_collapse { truth_via_collapse(a, &f.to_nnf(), &s)? } else { eval(a, &f, &s)? };
        put(out, v)
    })
}

/// Parse a tree from its JSON form (a list of label paths).
///
/// # Safety
/// `json` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn cl_tree_from_json(json: *const c_char, out: *mut *mut ClTree) -> ClStatus {
    guard(|| {
        let v: serde_json::Value =
            serde_json::from_str(str_arg(json, "json")?).map_err(|e| Fail(ClStatus::Parse, e.to_string()))?;
        put(out, Box::into_raw(Box::new(ClTree(FiniteTree::from_json(&v)?))))
    })
}

/// # Safety
/// `tree` is null or a live handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cl_tree_free(tree: *mut ClTree) {
    if !tree.is_null() {
        drop(Box::from_raw(tree));
    }
}

/// Number of nodes.
///
/// # Safety
/// `tree` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn cl_tree_node_count(tree: *const ClTree, out: *mut u64) -> ClStatus {
    guard(|| put(out, handle(tree, "tree")?.0.node_count()))
}

/// The collapse of the root.
///
/// # Safety
/// `tree` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn cl_tree_collapse(tree: *const ClTree, out: *mut *mut ClSet) -> ClStatus {
    guard(|| put_set(out, handle(tree, "tree")?.0.root_collapse()?))
}

/// The maximal bisimulation as JSON (a list of node-path pairs); release
/// with [`cl_string_free`].
///
/// # Safety
/// `tree` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn cl_tree_maximal_bisimulation(tree: *const ClTree, out: *mut *mut c_char) -> ClStatus {
    guard(|| put_string(out, maximal_bisimulation(&handle(tree, "tree")?.0)?.to_json().to_string()))
}

/// Compare two Veblen terms over Λ = the finite ordinal `lambda` with
/// level bound `alpha`.
///
/// # Safety
/// `t` and `s` are NUL-terminated strings; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn cl_veblen_compare(
    alpha: u32,
    lambda: u64,
    t: *const c_char,
    s: *const c_char,
    out: *mut ClOrder,
) -> ClStatus {
    guard(|| {
        let sys = VSystem::new(alpha, QuasiOrder::Ordinal(lambda));
        let (t, s) = (sys.parse(str_arg(t, "t")?)?, sys.parse(str_arg(s, "s")?)?);
        let order = match (sys.leq(&t, &s), sys.leq(&s, &t)) {
            (true, true) => ClOrder::Equivalent,
            (true, false) => ClOrder::Less,
            (false, true) => ClOrder::Greater,
            (false, false) => ClOrder::Incomparable,
        };
        put(out, order)
    })
}

/// Evaluate a primitive recursive program (s-expression) on a list of set
/// expressions.  A non-negative `omega` binds the constant `omega` to that
/// finite ordinal.
///
/// # Safety
/// `program` and `args` are NUL-terminated strings; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn cl_prs_eval(
    program: *const c_char,
    args: *const c_char,
    omega: i64,
    out: *mut *mut ClSet,
) -> ClStatus {
    guard(|| {
        let p = PrimTerm::parse(str_arg(program, "program")?)?;
        let text = str_arg(args, "args")?;
        let xs = if text.trim().is_empty() { Vec::new() } else { parse_set_list(text)? };
        let mut b = Bindings::new();
        if omega >= 0 {
            b.insert("omega".into(), von_neumann(omega as usize)?);
        }
        put_set(out, eval_prim(&p, &xs, &b)?)
    })
}

/// The constructible level `L_n(base)`.
///
/// # Safety
/// `base` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn cl_constructible_level(base: *const ClSet, n: usize, out: *mut *mut ClSet) -> ClStatus {
    guard(|| {
        let mut seq = l_level(&handle(base, "base")?.0, n)?;
        put_set(out, seq.levels.pop().expect("n + 1 levels"))
    })
}
