//! End-to-end checks of the solver on small hand-verified instances.

use droms_core::graph::{Raag, SimpleGraph};
use droms_core::solver::{CosetAnswer, IntersectionOutcome, Solver};
use droms_core::word::{canonical, parse_word, words_equal, Word};

fn raag(vertices: &[&str], edges: &[(&str, &str)]) -> Raag {
    Raag::new(SimpleGraph::new(vertices, edges).unwrap()).unwrap()
}

fn w(r: &Raag, text: &str) -> Word {
    parse_word(r.graph(), text).unwrap()
}

fn words(r: &Raag, texts: &[&str]) -> Vec<Word> {
    texts.iter().map(|t| w(r, t)).collect()
}

/// Asserts that a membership witness evaluates back to the element.
fn assert_witness(r: &Raag, gens: &[Word], g: &Word, solver: &Solver) {
    let witness = solver
        .membership(gens, g)
        .unwrap()
        .unwrap_or_else(|| panic!("expected member: {}", g.render(r.graph())));
    let value = witness.evaluate(gens);
    assert!(
        words_equal(r.graph(), r.tree(), &value, g).unwrap(),
        "witness evaluates to {} instead of {}",
        canonical(r.graph(), r.tree(), &value).unwrap().render(r.graph()),
        g.render(r.graph())
    );
}

#[test]
fn free_group_membership() {
    let r = raag(&["a", "b"], &[]);
    let solver = Solver::new(&r);
    let gens = words(&r, &["a^2", "b"]);
    assert_witness(&r, &gens, &w(&r, "a^2 b"), &solver);
    assert_witness(&r, &gens, &w(&r, "b a^-2"), &solver);
    assert_witness(&r, &gens, &w(&r, "a^2 b a^2 b^-1 a^-4"), &solver);
    assert!(solver.membership(&gens, &w(&r, "a")).unwrap().is_none());
    assert!(solver.membership(&gens, &w(&r, "a b")).unwrap().is_none());
    assert_witness(&r, &gens, &w(&r, "1"), &solver);
}

#[test]
fn free_group_basis_of_redundant_generators() {
    let r = raag(&["a", "b"], &[]);
    let solver = Solver::new(&r);
    let gens = words(&r, &["a", "b", "a b"]);
    let basis = solver.subgroup_basis(&gens).unwrap();
    assert_eq!(basis.basis.len(), 2, "⟨a, b, ab⟩ is all of F2");
    for (i, g) in gens.iter().enumerate() {
        let back = basis.rewrite_in[i]
            .substitute(|k| basis.rewrite_out[k].clone())
            .evaluate(&gens);
        assert!(words_equal(r.graph(), r.tree(), &back, g).unwrap());
    }
}

#[test]
fn free_group_intersections() {
    let r = raag(&["a", "b"], &[]);
    let solver = Solver::new(&r);
    // ⟨a⟩ ∩ ⟨b⟩ = 1.
    match solver.intersect(&words(&r, &["a"]), &words(&r, &["b"])).unwrap() {
        IntersectionOutcome::Fg { generators } => {
            for g in &generators {
                assert!(canonical(r.graph(), r.tree(), g).unwrap().is_empty_word());
            }
        }
        _ => panic!("free cyclic intersection must be finitely generated"),
    }
    // ⟨a^2⟩ ∩ ⟨a^3⟩ = ⟨a^6⟩.
    match solver
        .intersect(&words(&r, &["a^2"]), &words(&r, &["a^3"]))
        .unwrap()
    {
        IntersectionOutcome::Fg { generators } => {
            let nontrivial: Vec<&Word> = generators
                .iter()
                .filter(|g| !canonical(r.graph(), r.tree(), g).unwrap().is_empty_word())
                .collect();
            assert_eq!(nontrivial.len(), 1);
            let got = canonical(r.graph(), r.tree(), nontrivial[0]).unwrap();
            let expect = canonical(r.graph(), r.tree(), &w(&r, "a^6")).unwrap();
            let expect_inv = canonical(r.graph(), r.tree(), &w(&r, "a^-6")).unwrap();
            assert!(got == expect || got == expect_inv, "got {}", got.render(r.graph()));
        }
        _ => panic!("⟨a^2⟩ ∩ ⟨a^3⟩ must be finitely generated"),
    }
}

#[test]
fn path_three_not_finitely_generated() {
    // a - b - c: the group is Z[b] x (Z[a] * Z[c]).
    let r = raag(&["a", "b", "c"], &[("a", "b"), ("b", "c")]);
    let solver = Solver::new(&r);
    let h = words(&r, &["a", "c"]);
    let k = words(&r, &["b a", "c"]);
    match solver.intersect(&h, &k).unwrap() {
        IntersectionOutcome::NotFg { witness } => {
            assert!(!canonical(r.graph(), r.tree(), &witness).unwrap().is_empty_word());
            assert!(solver.membership(&h, &witness).unwrap().is_some());
            assert!(solver.membership(&k, &witness).unwrap().is_some());
        }
        IntersectionOutcome::Fg { generators } => panic!(
            "expected an infinitely generated intersection, got {} generators",
            generators.len()
        ),
    }
}

#[test]
fn abelian_cosets() {
    let r = raag(&["a", "b"], &[("a", "b")]);
    let solver = Solver::new(&r);
    let h = words(&r, &["a^2"]);
    let k = words(&r, &["b^2"]);
    // a·⟨a^2⟩ ∩ ⟨b^2⟩·... : a H = odd powers of a; b K = odd powers of b.
    match solver
        .coset_intersect(&h, &k, &w(&r, "a"), &w(&r, "b"))
        .unwrap()
    {
        CosetAnswer::Empty => {}
        other => panic!("expected empty, got {other:?}"),
    }
    match solver
        .coset_intersect(&h, &k, &w(&r, "a^2 b^2"), &w(&r, "1"))
        .unwrap()
    {
        CosetAnswer::Element(x) => {
            // x ∈ a^2 b^2 ⟨a^2⟩ ∩ ⟨b^2⟩: must be a power of b^2 with even a.
            let c = canonical(r.graph(), r.tree(), &x).unwrap();
            assert_eq!(c.render(r.graph()), "b^2");
        }
        other => panic!("expected element, got {other:?}"),
    }
}

#[test]
fn free_group_cosets() {
    let r = raag(&["a", "b"], &[]);
    let solver = Solver::new(&r);
    let h = words(&r, &["a^2"]);
    let k = words(&r, &["b^2"]);
    // a⟨a^2⟩ ∩ b⟨b^2⟩ = ∅ (odd powers of a versus odd powers of b).
    match solver
        .coset_intersect(&h, &k, &w(&r, "a"), &w(&r, "b"))
        .unwrap()
    {
        CosetAnswer::Empty => {}
        other => panic!("expected empty, got {other:?}"),
    }
    // b⟨a^2⟩ ∩ b a^2⟨a^2⟩ obviously meets.
    match solver
        .coset_intersect(&h, &h, &w(&r, "b"), &w(&r, "b a^2"))
        .unwrap()
    {
        CosetAnswer::Element(x) => {
            let c = canonical(r.graph(), r.tree(), &x).unwrap();
            // Any element of b⟨a⟩ works.
            assert_eq!(c.letters()[0].vertex, r.graph().index_of("b").unwrap());
        }
        other => panic!("expected element, got {other:?}"),
    }
}

#[test]
fn central_extension_membership() {
    // a - b - c: Z[b] x (Z[a] * Z[c]).
    let r = raag(&["a", "b", "c"], &[("a", "b"), ("b", "c")]);
    let solver = Solver::new(&r);
    let gens = words(&r, &["b a", "c"]);
    assert_witness(&r, &gens, &w(&r, "b a"), &solver);
    assert_witness(&r, &gens, &w(&r, "b^2 a c a"), &solver);
    assert!(solver.membership(&gens, &w(&r, "a")).unwrap().is_none());
    assert!(solver.membership(&gens, &w(&r, "b")).unwrap().is_none());
    assert_witness(&r, &gens, &w(&r, "c b a"), &solver);
}
