use std::ffi::{CStr, CString};
use std::ptr;

use collapse_lab_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn set(expr: &str) -> *mut ClSet {
    let mut out = ptr::null_mut();
    assert_eq!(cl_set_parse(c(expr).as_ptr(), &mut out), ClStatus::Ok);
    out
}

unsafe fn text(s: *const ClSet) -> String {
    let mut out = ptr::null_mut();
    assert_eq!(cl_set_to_string(s, &mut out), ClStatus::Ok);
    let t = CStr::from_ptr(out).to_str().unwrap().to_string();
    cl_string_free(out);
    t
}

unsafe fn last_error() -> String {
    CStr::from_ptr(cl_last_error_message()).to_str().unwrap().to_string()
}

#[test]
fn sets() {
    unsafe {
        let a = set("{{{}} {} {}}");
        assert_eq!(text(a), "{{} {{}}}");
        let mut two = ptr::null_mut();
        assert_eq!(cl_set_ordinal(2, &mut two), ClStatus::Ok);
        let mut eq = false;
        assert_eq!(cl_set_equal(a, two, &mut eq), ClStatus::Ok);
        assert!(eq);
        let mut n = 0usize;
        assert_eq!(cl_set_rank(a, &mut n), ClStatus::Ok);
        assert_eq!(n, 2);
        let mut p = ptr::null_mut();
        assert_eq!(cl_set_powerset(a, &mut p), ClStatus::Ok);
        assert_eq!(cl_set_len(p, &mut n), ClStatus::Ok);
        assert_eq!(n, 4);
        let mut v3 = ptr::null_mut();
        assert_eq!(cl_set_v_level(3, &mut v3), ClStatus::Ok);
        assert_eq!(cl_set_equal(p, v3, &mut eq), ClStatus::Ok);
        assert!(eq);
        let mut member = false;
        assert_eq!(cl_set_contains(p, a, &mut member), ClStatus::Ok);
        assert!(member);
        let mut tc = ptr::null_mut();
        let x = set("{#3}");
        assert_eq!(cl_set_transitive_closure(x, &mut tc), ClStatus::Ok);
        assert_eq!(text(tc), "{{} {{}} {{} {{}}} {{} {{}} {{} {{}}}}}");
        for h in [a, two, p, v3, x, tc] {
            cl_set_free(h);
        }
    }
}

#[test]
fn errors() {
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(cl_set_parse(c("{").as_ptr(), &mut out), ClStatus::Parse);
        assert!(out.is_null());
        assert!(last_error().contains("unclosed"));
        assert_eq!(cl_set_parse(ptr::null(), &mut out), ClStatus::NullPointer);
        assert_eq!(cl_set_parse(c("{}").as_ptr(), ptr::null_mut()), ClStatus::NullPointer);
        let bad = [0xffu8, 0];
        assert_eq!(cl_set_parse(bad.as_ptr().cast(), &mut out), ClStatus::InvalidUtf8);
        assert_eq!(cl_set_v_level(7, &mut out), ClStatus::SizeLimit);
        let mut n = 0usize;
        assert_eq!(cl_set_len(ptr::null(), &mut n), ClStatus::NullPointer);
        cl_set_free(ptr::null_mut());
        cl_string_free(ptr::null_mut());
        assert!(!CStr::from_ptr(cl_version()).to_str().unwrap().is_empty());
    }
}

#[test]
fn formulas_both_ways() {
    unsafe {
        let a = set("#3");
        for (f, s, expected) in [
            ("(ex 2 (in 2 0))", "#2", true),
            ("(all 2 (in 2 0))", "#2", false),
            ("(not (and (in 0 1) (in 1 0)))", "#1 #2", true),
        ] {
            for via in [false, true] {
                let mut v = !expected;
                assert_eq!(cl_formula_holds(a, c(f).as_ptr(), c(s).as_ptr(), via, &mut v), ClStatus::Ok);
                assert_eq!(v, expected, "{f}, via collapse: {via}");
            }
        }
        let mut v = false;
        assert_eq!(cl_formula_holds(a, c("(in 0 1)").as_ptr(), c("").as_ptr(), true, &mut v), ClStatus::InvalidInput);
        cl_set_free(a);
    }
}

#[test]
fn trees() {
    unsafe {
        let mut t = ptr::null_mut();
        assert_eq!(cl_tree_from_json(c("[[], [0], [1], [1, 0]]").as_ptr(), &mut t), ClStatus::Ok);
        let mut n = 0u64;
        assert_eq!(cl_tree_node_count(t, &mut n), ClStatus::Ok);
        assert_eq!(n, 4);
        let mut pi = ptr::null_mut();
        assert_eq!(cl_tree_collapse(t, &mut pi), ClStatus::Ok);
        assert_eq!(text(pi), "{{} {{}}}");
        let mut json = ptr::null_mut();
        assert_eq!(cl_tree_maximal_bisimulation(t, &mut json), ClStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(CStr::from_ptr(json).to_str().unwrap()).unwrap();
        // Reflexive pairs on 4 nodes plus the two leaves (0) ~ (1,0).
        assert_eq!(v.as_array().unwrap().len(), 6);
        cl_string_free(json);
        cl_set_free(pi);
        cl_tree_free(t);
        assert_eq!(cl_tree_from_json(c("{").as_ptr(), &mut t), ClStatus::Parse);
    }
}

#[test]
fn veblen_programs_levels() {
    unsafe {
        let mut o = ClOrder::Incomparable;
        let (t, s) = (c("phi(0,phi(T,'1'))"), c("phi(T,'1')"));
        assert_eq!(cl_veblen_compare(1, 3, t.as_ptr(), s.as_ptr(), &mut o), ClStatus::Ok);
        assert_eq!(o, ClOrder::Equivalent);
        let (t, s) = (c("phi(T,'0') + phi(T,'0')"), c("phi(T,'1')"));
        assert_eq!(cl_veblen_compare(0, 3, t.as_ptr(), s.as_ptr(), &mut o), ClStatus::Ok);
        assert_eq!(o, ClOrder::Less);
        assert_eq!(cl_veblen_compare(0, 3, c("phi(").as_ptr(), s.as_ptr(), &mut o), ClStatus::Parse);

        let union = c("(comp (rud 5) (rud 0) (rud 0))");
        let mut out = ptr::null_mut();
        assert_eq!(cl_prs_eval(union.as_ptr(), c("#2 {{{{}}}}").as_ptr(), -1, &mut out), ClStatus::Ok);
        assert_eq!(text(out), "{{} {{}} {{{}}}}");
        cl_set_free(out);
        assert_eq!(cl_prs_eval(c("(const omega)").as_ptr(), c("#1").as_ptr(), 3, &mut out), ClStatus::Ok);
        assert_eq!(text(out), text(set("#3")));
        cl_set_free(out);
        assert_eq!(cl_prs_eval(c("(const omega)").as_ptr(), c("#1").as_ptr(), -1, &mut out), ClStatus::Parse);

        let empty = set("{}");
        let mut l4 = ptr::null_mut();
        assert_eq!(cl_constructible_level(empty, 4, &mut l4), ClStatus::Ok);
        let mut v4 = ptr::null_mut();
        assert_eq!(cl_set_v_level(4, &mut v4), ClStatus::Ok);
        let mut eq = false;
        assert_eq!(cl_set_equal(l4, v4, &mut eq), ClStatus::Ok);
        assert!(eq);
        for h in [empty, l4, v4] {
            cl_set_free(h);
        }
    }
}
