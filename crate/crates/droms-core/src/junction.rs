//! Product ("junction") automata for pairs of subgroups of a free product.
//!
//! Given two *reduced* folded automata over the same ambient free product —
//! one recognising `H`, one recognising `K` — the junction is their
//! pullback: its primary vertices are pairs of primaries reachable by a
//! common ambient element, and its arcs exist exactly when a factor-level
//! coset intersection is nonempty. A basepoint loop of the junction reads an
//! element readable in both inputs, so the junction recognises `H ∩ K`, and
//! a pair `(p, p')` appears at all if and only if some common element
//! reaches `p` in one automaton and `p'` in the other — which decides coset
//! intersection problems via tracked thread endpoints.
//!
//! The junction is built directly in reduced shape, as a breadth-first
//! search over pairs. For a pair and a factor kind, the unique kind-arcs
//! `e`, `e'` of the two inputs lead to secondaries with subgroup labels `C`,
//! `C'`; the junction secondary's label is the intersection
//! `ℓ(e)⁻¹Cℓ(e) ∩ ℓ(e')⁻¹C'ℓ(e')`, and an arc towards the pair behind arcs
//! `(f, f')` exists iff the right cosets `ℓ(e)⁻¹Cℓ(e)·ℓ(e)⁻¹ℓ(f)` and
//! `ℓ(e')⁻¹C'ℓ(e')·ℓ(e')⁻¹ℓ(f')` intersect. Both questions are delegated to
//! a [`FactorOps`] implementation (in practice the solver, recursing into
//! strictly smaller ambients).
//!
//! Label intersections are only needed to *generate* `H ∩ K`; reachability
//! of pairs does not depend on them. [`JunctionMode::TrivialLabels`] skips
//! them, which is enough for coset emptiness even when `H ∩ K` is not
//! finitely generated.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec::Vec;

use crate::formal::FormalWord;
use crate::graph::{DromsNode, SimpleGraph};
use crate::solver::{CosetAnswer, SipOutcome, SolverError};
use crate::wedge::WedgeAutomaton;
use crate::word::{canonical, Word};

/// Factor-group subroutines the junction construction needs.
pub trait FactorOps {
    /// Intersection of two finitely generated subgroups of a factor group.
    fn factor_sip(
        &self,
        graph: &SimpleGraph,
        node: &DromsNode,
        gens1: &[Word],
        gens2: &[Word],
    ) -> Result<SipOutcome, SolverError>;

    /// Emptiness of `w·⟨gens1⟩ ∩ w'·⟨gens2⟩` in a factor group.
    fn factor_coset(
        &self,
        graph: &SimpleGraph,
        node: &DromsNode,
        gens1: &[Word],
        gens2: &[Word],
        w: &Word,
        wp: &Word,
    ) -> Result<CosetAnswer, SolverError>;
}

/// Whether junction secondaries carry their true subgroup labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JunctionMode {
    /// Compute every label intersection; abort if one is not finitely
    /// generated. Required for reading generators of `H ∩ K` off the result.
    StrictFg,
    /// Leave all labels empty. Reachability of pairs (hence coset
    /// emptiness) is unaffected; generators cannot be read off.
    TrivialLabels,
}

/// The pullback automaton together with its pair bookkeeping.
#[derive(Debug, Clone)]
pub struct Junction {
    pub automaton: WedgeAutomaton,
    /// Junction primary id → pair of input primary ids.
    pub pair_of_prim: BTreeMap<usize, (usize, usize)>,
    /// Pair of input primary ids → junction primary id.
    pub prim_of_pair: BTreeMap<(usize, usize), usize>,
}

/// Outcome of building a junction.
#[derive(Debug, Clone)]
pub enum JunctionResult {
    Built(Junction),
    /// A label intersection was not finitely generated (strict mode only).
    /// The pair generates a rank-2 free subgroup of `H ∩ K` witnessing that
    /// `H ∩ K` is not finitely generated either.
    NotFg { u: Word, v: Word },
    /// A factor coset test could not be decided.
    Undecided,
}

/// Builds the junction of two reduced automata over the same ambient.
pub fn build(
    graph: &SimpleGraph,
    a: &WedgeAutomaton,
    b: &WedgeAutomaton,
    mode: JunctionMode,
    ops: &dyn FactorOps,
) -> Result<JunctionResult, SolverError> {
    debug_assert_eq!(a.ambient.verts, b.ambient.verts);
    let mut j = a.empty_like();
    let mut pair_of_prim: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    let mut prim_of_pair: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let bp = j.add_primary(Word::identity());
    pair_of_prim.insert(bp, (a.basepoint, b.basepoint));
    prim_of_pair.insert((a.basepoint, b.basepoint), bp);
    let mut queue: VecDeque<usize> = VecDeque::new();
    queue.push_back(bp);
    while let Some(jp) = queue.pop_front() {
        let (pa, pb) = pair_of_prim[&jp];
        for kind in 0..2 {
            if j.arc_of_kind(jp, kind).is_some() {
                // An earlier secondary already serves this pair for this
                // kind (it was built from the same pair of input
                // secondaries, by reducedness of the inputs).
                continue;
            }
            let (Some(e), Some(ep)) = (a.arc_of_kind(pa, kind), b.arc_of_kind(pb, kind)) else {
                continue;
            };
            let factor = &a.factors[kind];
            let qa = a.arc(e).sec;
            let qb = b.arc(ep).sec;
            let conj = |auto: &WedgeAutomaton, q: usize, arc: usize| -> Result<Vec<Word>, SolverError> {
                let label = &auto.arc(arc).label;
                auto.secondary(q)
                    .label
                    .iter()
                    .map(|g| {
                        Ok(canonical(
                            graph,
                            factor,
                            &label.inverse().concat(&g.elem).concat(label),
                        )?)
                    })
                    .collect()
            };
            let conj_a = conj(a, qa, e)?;
            let conj_b = conj(b, qb, ep)?;
            let label = match mode {
                JunctionMode::StrictFg => {
                    match ops.factor_sip(graph, factor, &conj_a, &conj_b)? {
                        SipOutcome::Fg(gens) => gens,
                        SipOutcome::NotFg { u, v } => {
                            // Conjugating by the pair's basic label moves
                            // the witness pair into H ∩ K.
                            let s = &j.primary(jp).s;
                            let lift = |x: &Word| -> Result<Word, SolverError> {
                                Ok(canonical(
                                    graph,
                                    &a.ambient,
                                    &s.concat(x).concat(&s.inverse()),
                                )?)
                            };
                            return Ok(JunctionResult::NotFg {
                                u: lift(&u)?,
                                v: lift(&v)?,
                            });
                        }
                    }
                }
                JunctionMode::TrivialLabels => Vec::new(),
            };
            let t = j.primary(jp).s.clone();
            let q = j.add_secondary(kind, t);
            for g in label {
                j.add_label_gen(q, g, FormalWord::identity());
            }
            j.add_arc(q, jp, Word::identity(), FormalWord::identity());
            for &f in &a.secondary(qa).arcs {
                for &fp in &b.secondary(qb).arcs {
                    if f == e && fp == ep {
                        continue;
                    }
                    // Right cosets converted to left: x ∈ C̃u ∩ C̃'u' iff
                    // x⁻¹ ∈ u⁻¹C̃ ∩ u'⁻¹C̃'.
                    let u = canonical(
                        graph,
                        factor,
                        &a.arc(f).label.inverse().concat(&a.arc(e).label),
                    )?;
                    let up = canonical(
                        graph,
                        factor,
                        &b.arc(fp).label.inverse().concat(&b.arc(ep).label),
                    )?;
                    match ops.factor_coset(graph, factor, &conj_a, &conj_b, &u, &up)? {
                        CosetAnswer::Empty => {}
                        CosetAnswer::Undecided => return Ok(JunctionResult::Undecided),
                        CosetAnswer::Element(y) => {
                            let x = canonical(graph, factor, &y.inverse())?;
                            let pair = (a.arc(f).prim, b.arc(fp).prim);
                            let target = match prim_of_pair.get(&pair) {
                                Some(&tp) => tp,
                                None => {
                                    let s = canonical(
                                        graph,
                                        &a.ambient,
                                        &j.primary(jp).s.concat(&x),
                                    )?;
                                    let tp = j.add_primary(s);
                                    pair_of_prim.insert(tp, pair);
                                    prim_of_pair.insert(pair, tp);
                                    queue.push_back(tp);
                                    tp
                                }
                            };
                            j.add_arc(q, target, x, FormalWord::identity());
                        }
                    }
                }
            }
        }
    }
    Ok(JunctionResult::Built(Junction {
        automaton: j,
        pair_of_prim,
        prim_of_pair,
    }))
}
