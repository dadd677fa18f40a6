//! Brute-force reference enumeration ("the oracle").
//!
//! These routines answer the same questions as the solver by exhaustive
//! search over bounded products of generators, with no shared machinery:
//! they rely only on the normal form for equality. They are deliberately
//! slow and bounded, and exist to cross-check the solver on small instances.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::String;
use alloc::vec::Vec;

use crate::graph::{DromsNode, SimpleGraph};
use crate::solver::SolverError;
use crate::word::{canonical, Letter, Word};

fn key_of(w: &Word) -> Vec<Letter> {
    w.letters().to_vec()
}

/// All elements of `⟨gens⟩` expressible as a product of at most `depth`
/// generators (or inverses), as canonical words. Fails when more than `cap`
/// distinct elements appear.
pub fn ball(
    graph: &SimpleGraph,
    node: &DromsNode,
    gens: &[Word],
    depth: usize,
    cap: usize,
) -> Result<Vec<Word>, SolverError> {
    let mut steps: Vec<Word> = Vec::new();
    for g in gens {
        steps.push(canonical(graph, node, g)?);
        steps.push(canonical(graph, node, &g.inverse())?);
    }
    let mut seen: BTreeMap<Vec<Letter>, Word> = BTreeMap::new();
    let identity = Word::identity();
    seen.insert(key_of(&identity), identity.clone());
    let mut frontier: VecDeque<(Word, usize)> = VecDeque::new();
    frontier.push_back((identity, 0));
    while let Some((current, dist)) = frontier.pop_front() {
        if dist == depth {
            continue;
        }
        for step in &steps {
            let next = canonical(graph, node, &current.concat(step))?;
            let key = key_of(&next);
            if seen.contains_key(&key) {
                continue;
            }
            if seen.len() >= cap {
                return Err(SolverError::Limit(String::from(
                    "oracle ball exceeded its element cap",
                )));
            }
            seen.insert(key, next.clone());
            frontier.push_back((next, dist + 1));
        }
    }
    Ok(seen.into_values().collect())
}

/// Whether the ball of `⟨gens⟩` up to `depth` contains `g`.
pub fn ball_contains(
    graph: &SimpleGraph,
    node: &DromsNode,
    gens: &[Word],
    g: &Word,
    depth: usize,
    cap: usize,
) -> Result<bool, SolverError> {
    let target = key_of(&canonical(graph, node, g)?);
    Ok(ball(graph, node, gens, depth, cap)?
        .iter()
        .any(|w| key_of(w) == target))
}

/// Elements common to both balls: a finite under-approximation of
/// `⟨gens1⟩ ∩ ⟨gens2⟩`, sorted canonically.
pub fn brute_intersection(
    graph: &SimpleGraph,
    node: &DromsNode,
    gens1: &[Word],
    gens2: &[Word],
    depth: usize,
    cap: usize,
) -> Result<Vec<Word>, SolverError> {
    let b1 = ball(graph, node, gens1, depth, cap)?;
    let keys2: BTreeSet<Vec<Letter>> = ball(graph, node, gens2, depth, cap)?
        .into_iter()
        .map(|w| key_of(&w))
        .collect();
    Ok(b1
        .into_iter()
        .filter(|w| keys2.contains(&key_of(w)))
        .collect())
}

/// The ball of the coset `w·⟨gens⟩`: `{w·h}` over the ball of `⟨gens⟩`.
pub fn coset_ball(
    graph: &SimpleGraph,
    node: &DromsNode,
    gens: &[Word],
    w: &Word,
    depth: usize,
    cap: usize,
) -> Result<Vec<Word>, SolverError> {
    ball(graph, node, gens, depth, cap)?
        .into_iter()
        .map(|h| Ok(canonical(graph, node, &w.concat(&h))?))
        .collect()
}

/// Elements common to two coset balls; nonempty proves the coset
/// intersection nonempty (emptiness of the balls proves nothing).
pub fn brute_coset_intersection(
    graph: &SimpleGraph,
    node: &DromsNode,
    gens1: &[Word],
    gens2: &[Word],
    w: &Word,
    wp: &Word,
    depth: usize,
    cap: usize,
) -> Result<Vec<Word>, SolverError> {
    let b1 = coset_ball(graph, node, gens1, w, depth, cap)?;
    let keys2: BTreeSet<Vec<Letter>> = coset_ball(graph, node, gens2, wp, depth, cap)?
        .into_iter()
        .map(|v| key_of(&v))
        .collect();
    Ok(b1
        .into_iter()
        .filter(|v| keys2.contains(&key_of(v)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Raag;
    use crate::word::parse_word;

    #[test]
    fn ball_of_cyclic_subgroup() {
        let r = Raag::new(SimpleGraph::new(&["a", "b"], &[]).unwrap()).unwrap();
        let gens = vec![parse_word(r.graph(), "a^2").unwrap()];
        let mut rendered: Vec<String> =
            ball(r.graph(), r.tree(), &gens, 3, 1000)
                .unwrap()
                .iter()
                .map(|w| w.render(r.graph()))
                .collect();
        rendered.sort();
        assert_eq!(rendered, vec!["1", "a^-2", "a^-4", "a^-6", "a^2", "a^4", "a^6"]);
    }

    #[test]
    fn brute_intersection_of_powers() {
        let r = Raag::new(SimpleGraph::new(&["a", "b"], &[]).unwrap()).unwrap();
        let g1 = vec![parse_word(r.graph(), "a^2").unwrap()];
        let g2 = vec![parse_word(r.graph(), "a^3").unwrap()];
        let inter = brute_intersection(r.graph(), r.tree(), &g1, &g2, 3, 1000).unwrap();
        let mut rendered: Vec<String> = inter.iter().map(|w| w.render(r.graph())).collect();
        rendered.sort();
        assert_eq!(rendered, vec!["1", "a^-6", "a^6"]);
    }

    #[test]
    fn coset_balls_detect_nonempty_intersections() {
        let r = Raag::new(SimpleGraph::new(&["a", "b"], &[]).unwrap()).unwrap();
        let g1 = vec![parse_word(r.graph(), "a^2").unwrap()];
        let g2 = vec![parse_word(r.graph(), "a^3").unwrap()];
        let w1 = parse_word(r.graph(), "a").unwrap();
        let w2 = parse_word(r.graph(), "1").unwrap();
        // a·⟨a^2⟩ = odd powers; ⟨a^3⟩ contains a^3: common element found.
        let hits = brute_coset_intersection(r.graph(), r.tree(), &g1, &g2, &w1, &w2, 3, 1000).unwrap();
        assert!(hits.iter().any(|w| w.render(r.graph()) == "a^3"));
    }
}
