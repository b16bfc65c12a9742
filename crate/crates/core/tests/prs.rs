use collapse_lab::collapse::membership_relation;
use collapse_lab::gen::random_hf;
use collapse_lab::hf::{cartesian, finite_powerset, kuratowski, transitive_closure, tuple, unpair, von_neumann};
use collapse_lab::prs::{beta_oracle, eval_prim, pfin_prim, programs, rank_via_oracle, rud, tc_rud, Bindings, PrimTerm};
use collapse_lab::sexpr::parse_set;
use collapse_lab::{Error, HFSet};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn s(src: &str) -> HFSet {
    parse_set(src).unwrap()
}

fn set(members: impl IntoIterator<Item = HFSet>) -> HFSet {
    HFSet::canon(members.into_iter().collect()).unwrap()
}

#[test]
fn transitive_closure_and_powerset_programs() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9f);
    for case in 0..200 {
        let x = random_hf(&mut rng, 4, 5).unwrap();
        assert_eq!(tc_rud(&x).unwrap(), transitive_closure(&x).unwrap(), "case {case}: {x}");
        let p = pfin_prim(&x, x.len()).unwrap();
        assert!(p.complete);
        assert_eq!(p.set, finite_powerset(&x).unwrap(), "case {case}: {x}");
    }
}

#[test]
fn truncated_powerset_holds_small_subsets() {
    let x = s("#4");
    for n in 0..4 {
        let p = pfin_prim(&x, n).unwrap();
        assert!(!p.complete);
        let expected = set(finite_powerset(&x).unwrap().iter().filter(|u| u.len() <= n + 1).cloned());
        assert_eq!(p.set, expected, "n = {n}");
    }
}

#[test]
fn rudimentary_functions_against_definitions() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xf0);
    for case in 0..100 {
        let x = random_hf(&mut rng, 4, 4).unwrap();
        let y = random_hf(&mut rng, 4, 4).unwrap();
        // Relations built from x and y so the pair-consuming functions see pairs.
        let r = cartesian(&x, &y).unwrap();
        assert_eq!(rud(0, &x, &y).unwrap(), set([x.clone(), y.clone()]));
        assert_eq!(rud(1, &x, &y).unwrap(), set(x.iter().filter(|u| !y.contains(u)).cloned()));
        let prod = x.iter().flat_map(|u| y.iter().map(move |v| kuratowski(u, v).unwrap()));
        assert_eq!(rud(2, &x, &y).unwrap(), set(prod));
        let f3 = r.iter().filter_map(unpair).flat_map(|(u, v)| x.iter().map(move |w| tuple(&[u.clone(), w.clone(), v.clone()]).unwrap()).collect::<Vec<_>>());
        assert_eq!(rud(3, &x, &r).unwrap(), set(f3), "case {case}");
        let f4 = r.iter().filter_map(unpair).flat_map(|(u, v)| x.iter().map(move |w| tuple(&[u.clone(), v.clone(), w.clone()]).unwrap()).collect::<Vec<_>>());
        assert_eq!(rud(4, &x, &r).unwrap(), set(f4), "case {case}");
        assert_eq!(rud(5, &x, &y).unwrap(), set(x.iter().flat_map(|u| u.iter().cloned())));
        assert_eq!(rud(6, &r, &y).unwrap(), if y.is_empty() { HFSet::empty() } else { x.clone() });
        let eps = cartesian(&x, &x).unwrap().iter().filter(|p| unpair(p).is_some_and(|(u, v)| v.contains(&u))).cloned().collect::<Vec<_>>();
        assert_eq!(rud(7, &x, &y).unwrap(), set(eps), "case {case}");
        let images = y.iter().map(|z| set(x.iter().filter(|w| y.contains(z) && r.contains(&kuratowski(w, z).unwrap())).cloned()));
        assert_eq!(rud(8, &r, &y).unwrap(), set(images), "case {case}");
    }
    assert!(matches!(rud(9, &s("{}"), &s("{}")), Err(Error::Arity(_))));
}

#[test]
fn collapsing_oracle() {
    let a = s("{{} {{}}}");
    let (p, q) = (s("{}"), s("{{}}"));
    let cycle = set([kuratowski(&p, &q).unwrap(), kuratowski(&q, &p).unwrap()]);
    assert_eq!(beta_oracle(&a, &cycle).unwrap(), HFSet::empty());
    // Not a relation on a.
    assert_eq!(beta_oracle(&a, &set([kuratowski(&p, &s("#2")).unwrap()])).unwrap(), HFSet::empty());
    let mut rng = ChaCha8Rng::seed_from_u64(0xbe);
    for _ in 0..50 {
        let t = transitive_closure(&random_hf(&mut rng, 4, 5).unwrap()).unwrap();
        let r = set(t.iter().flat_map(|v| v.iter().map(|u| kuratowski(u, v).unwrap()).collect::<Vec<_>>()));
        let identity = set(t.iter().map(|u| kuratowski(u, u).unwrap()));
        assert_eq!(beta_oracle(&t, &r).unwrap(), identity);
        assert!(membership_relation(&t).unwrap().is_well_founded());
    }
}

#[test]
fn ranks_through_the_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x4a);
    for _ in 0..40 {
        let x = random_hf(&mut rng, 4, 4).unwrap();
        for (y, r) in rank_via_oracle(&x).unwrap() {
            assert_eq!(r, von_neumann(y.rank() as usize).unwrap());
        }
    }
}

#[test]
fn parsed_programs_evaluate() {
    let union = PrimTerm::parse("(comp (rud 5) (rud 0) (rud 0))").unwrap();
    assert_eq!(union, programs::union());
    assert_eq!(PrimTerm::parse(&programs::pfin().to_string()).unwrap(), programs::pfin());
    let b = Bindings::new();
    assert_eq!(eval_prim(&union, &[s("#2"), s("{{{{}}}}")], &b).unwrap(), s("{{} {{}} {{{}}}}"));
    let cond = PrimTerm::parse("cond").unwrap();
    assert_eq!(eval_prim(&cond, &[s("#1"), s("#2"), s("{}"), s("{{}}")], &b).unwrap(), s("#1"));
    assert!(matches!(eval_prim(&programs::pfin(), &[s("#1")], &b), Err(Error::Unbound(_))));
    assert!(matches!(eval_prim(&union, &[s("#1")], &b), Err(Error::Arity(_))));
    assert!(PrimTerm::parse("(rud 9)").is_err());
    assert!(PrimTerm::parse("(comp (proj 0 2) (proj 0 1))").is_err());
}
