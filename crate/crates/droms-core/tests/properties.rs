//! Randomised invariant checks (property tests) for the word, lattice and
//! automaton layers.

use num_bigint::BigInt;
use proptest::prelude::*;

use droms_core::graph::{Raag, SimpleGraph};
use droms_core::lattice::{row_from_i64, Lattice};
use droms_core::solver::Solver;
use droms_core::word::{canonical, words_equal, Letter, Word};

fn raag(vertices: &[&str], edges: &[(&str, &str)]) -> Raag {
    Raag::new(SimpleGraph::new(vertices, edges).unwrap()).unwrap()
}

/// Strategy: a word over `n` vertices with up to `len` letters, exponents
/// in [-3, 3] \ {0}.
fn word_strategy(n: usize, len: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec((0..n, prop_oneof![-3i64..0, 1i64..4]), 0..=len).prop_map(|letters| {
        Word::from_letters(letters.into_iter().map(|(vertex, exp)| Letter {
            vertex,
            exp: BigInt::from(exp),
        }))
    })
}

fn rows_strategy(k: usize, m: usize) -> impl Strategy<Value = Vec<Vec<BigInt>>> {
    prop::collection::vec(prop::collection::vec(-6i64..=6, m), 0..=k)
        .prop_map(|rows| rows.iter().map(|r| row_from_i64(r)).collect())
}

proptest! {
    #[test]
    fn canonical_form_is_idempotent(w in word_strategy(3, 8)) {
        // Ambient: path a - b - c (central extension over a free product).
        let r = raag(&["a", "b", "c"], &[("a", "b"), ("b", "c")]);
        let once = canonical(r.graph(), r.tree(), &w).unwrap();
        let twice = canonical(r.graph(), r.tree(), &once).unwrap();
        prop_assert_eq!(&once, &twice);
        prop_assert!(words_equal(r.graph(), r.tree(), &w, &once).unwrap());
    }

    #[test]
    fn inverse_cancels(w in word_strategy(3, 8)) {
        let r = raag(&["a", "b", "c"], &[("a", "c")]);
        let prod = w.concat(&w.inverse());
        prop_assert!(canonical(r.graph(), r.tree(), &prod).unwrap().is_empty_word());
    }

    #[test]
    fn equality_respects_concatenation(
        u in word_strategy(2, 6),
        v in word_strategy(2, 6),
        x in word_strategy(2, 6),
    ) {
        let r = raag(&["a", "b"], &[]);
        if words_equal(r.graph(), r.tree(), &u, &v).unwrap() {
            prop_assert!(
                words_equal(r.graph(), r.tree(), &u.concat(&x), &v.concat(&x)).unwrap()
            );
        }
    }

    #[test]
    fn lattice_basis_is_canonical(rows in rows_strategy(4, 3)) {
        let l = Lattice::from_rows(3, rows.clone());
        // Rebuilding from the basis gives the identical object.
        prop_assert_eq!(&Lattice::from_rows(3, l.basis().to_vec()), &l);
        // Row order is irrelevant.
        let mut rev = rows.clone();
        rev.reverse();
        prop_assert_eq!(&Lattice::from_rows(3, rev), &l);
        // Every original row is a member, and its coefficients reconstruct
        // it over the basis.
        for row in &rows {
            let coeffs = l.member(row);
            prop_assert!(coeffs.is_some());
            let mut back = vec![BigInt::from(0); 3];
            for (c, b) in coeffs.unwrap().iter().zip(l.basis()) {
                for (dst, e) in back.iter_mut().zip(b.iter()) {
                    *dst += c * e;
                }
            }
            prop_assert_eq!(&back, row);
        }
    }

    #[test]
    fn reduce_mod_is_a_canonical_residue(
        rows in rows_strategy(3, 3),
        v in prop::collection::vec(-10i64..=10, 3),
    ) {
        let l = Lattice::from_rows(3, rows);
        let v = row_from_i64(&v);
        let red = l.reduce_mod(&v);
        // The reduction differs from v by a lattice element and is a fixed
        // point of further reduction.
        let diff: Vec<BigInt> = v.iter().zip(red.iter()).map(|(a, b)| a - b).collect();
        prop_assert!(l.contains(&diff));
        prop_assert_eq!(&l.reduce_mod(&red), &red);
        // Equal residues characterise equality modulo the lattice.
        prop_assert!(l.contains(&v) == red.iter().all(|e| *e == BigInt::from(0)));
    }

    #[test]
    fn sum_and_intersection_bracket_the_inputs(
        rows1 in rows_strategy(3, 2),
        rows2 in rows_strategy(3, 2),
    ) {
        let l1 = Lattice::from_rows(2, rows1);
        let l2 = Lattice::from_rows(2, rows2);
        let sum = l1.sum(&l2);
        let inter = l1.intersection(&l2);
        for b in l1.basis().iter().chain(l2.basis()) {
            prop_assert!(sum.contains(b));
        }
        for b in inter.basis() {
            prop_assert!(l1.contains(b) && l2.contains(b));
        }
    }

    #[test]
    fn membership_witnesses_evaluate_back(
        gens in prop::collection::vec(word_strategy(2, 4), 1..=3),
        picks in prop::collection::vec((0usize..3, prop::bool::ANY), 1..=4),
    ) {
        // A deliberate member: a product of generators and inverses.
        let r = raag(&["a", "b"], &[]);
        let solver = Solver::new(&r);
        let mut g = Word::identity();
        for (i, inv) in &picks {
            let f = &gens[i % gens.len()];
            g = g.concat(&if *inv { f.inverse() } else { f.clone() });
        }
        let witness = solver.membership(&gens, &g).unwrap();
        prop_assert!(witness.is_some());
        let value = witness.unwrap().evaluate(&gens);
        prop_assert!(words_equal(r.graph(), r.tree(), &value, &g).unwrap());
    }

    #[test]
    fn reduced_automata_keep_their_ledger(
        gens in prop::collection::vec(word_strategy(3, 4), 1..=3),
    ) {
        use droms_core::wedge::WedgeAutomaton;
        let r = raag(&["a", "b", "c"], &[]);
        let solver = Solver::new(&r);
        let mut wa = WedgeAutomaton::flower(r.graph(), r.tree(), &gens).unwrap();
        prop_assert!(wa.ledger_consistent(r.graph()).unwrap());
        wa.reduce(r.graph(), &solver).unwrap();
        prop_assert!(wa.is_reduced(r.graph(), &solver).unwrap());
        prop_assert!(wa.ledger_consistent(r.graph()).unwrap());
        // Every structured generator's expression evaluates back to it.
        let kd = wa.kurosh(r.graph()).unwrap();
        for f in &kd.free {
            let value = f.witness.evaluate(&gens);
            prop_assert!(words_equal(r.graph(), r.tree(), &value, &f.elem).unwrap());
        }
        for vg in &kd.vertex_groups {
            for g in &vg.gens {
                let value = g.witness.evaluate(&gens);
                prop_assert!(words_equal(r.graph(), r.tree(), &value, &g.conj).unwrap());
            }
        }
    }

    #[test]
    fn intersection_generators_lie_in_both(
        gens1 in prop::collection::vec(word_strategy(3, 3), 1..=2),
        gens2 in prop::collection::vec(word_strategy(3, 3), 1..=2),
    ) {
        use droms_core::solver::IntersectionOutcome;
        let r = raag(&["a", "b", "c"], &[("a", "b"), ("b", "c")]);
        let solver = Solver::new(&r);
        match solver.intersect(&gens1, &gens2).unwrap() {
            IntersectionOutcome::Fg { generators } => {
                for g in &generators {
                    prop_assert!(solver.membership(&gens1, g).unwrap().is_some());
                    prop_assert!(solver.membership(&gens2, g).unwrap().is_some());
                }
            }
            IntersectionOutcome::NotFg { witness } => {
                prop_assert!(!canonical(r.graph(), r.tree(), &witness).unwrap().is_empty_word());
                prop_assert!(solver.membership(&gens1, &witness).unwrap().is_some());
                prop_assert!(solver.membership(&gens2, &witness).unwrap().is_some());
            }
        }
    }
}
