//! Group words and their canonical normal forms.
//!
//! A [`Word`] is a sequence of letters `vertex^exponent` over the vertices of
//! an ambient graph. Normal forms are computed recursively along the
//! decomposition tree: at a central layer the central exponents are collected
//! into a vector, and at a free-product layer the word is cut into maximal
//! runs per factor which are normalised recursively and then reduced like a
//! free group word (adjacent syllables in the same factor multiply, trivial
//! syllables vanish). Two words represent the same group element exactly when
//! their normal forms are structurally equal, so normal-form comparison *is*
//! the word problem.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::graph::{DromsKind, DromsNode, SimpleGraph};

/// Errors from parsing or interpreting words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WordError {
    /// A token could not be parsed as `name` or `name^k`.
    BadToken(String),
    /// A generator name that is not a vertex of the ambient graph.
    UnknownGenerator(String),
    /// A word uses a vertex outside the sub-ambient it is interpreted in.
    OutsideAmbient(String),
}

impl fmt::Display for WordError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WordError::BadToken(t) => write!(f, "cannot parse word token: {t:?}"),
            WordError::UnknownGenerator(t) => write!(f, "unknown generator: {t}"),
            WordError::OutsideAmbient(t) => write!(f, "generator {t} lies outside this factor"),
        }
    }
}

/// One letter of a word: a vertex generator raised to a nonzero power.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Letter {
    /// Canonical index of the vertex in the ambient (root) graph.
    pub vertex: usize,
    pub exp: BigInt,
}

/// A word over the vertex generators of an ambient graph.
///
/// Words are kept *locally merged*: adjacent letters never share a vertex and
/// no exponent is zero. They are not otherwise reduced; use
/// [`normal_form`]/[`canonical`] for group-level comparisons.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    /// The empty word (the identity).
    pub fn identity() -> Word {
        Word::default()
    }

    /// The word consisting of a single generator.
    pub fn generator(vertex: usize) -> Word {
        Word::from_letters(vec![Letter {
            vertex,
            exp: BigInt::from(1),
        }])
    }

    /// A single generator raised to a power.
    pub fn power(vertex: usize, exp: BigInt) -> Word {
        Word::from_letters(vec![Letter { vertex, exp }])
    }

    /// Builds a word from letters, merging adjacent letters on the same
    /// vertex and dropping zero exponents.
    pub fn from_letters<I: IntoIterator<Item = Letter>>(letters: I) -> Word {
        let mut out: Vec<Letter> = Vec::new();
        for letter in letters {
            if letter.exp.is_zero() {
                continue;
            }
            match out.last_mut() {
                Some(last) if last.vertex == letter.vertex => {
                    last.exp += letter.exp;
                    if last.exp.is_zero() {
                        out.pop();
                    }
                }
                _ => out.push(letter),
            }
        }
        Word { letters: out }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    /// True when the word has no letters (it may still be the identity as a
    /// group element without this holding; see [`is_trivial`]).
    pub fn is_empty_word(&self) -> bool {
        self.letters.is_empty()
    }

    /// The free inverse: letters reversed with negated exponents.
    pub fn inverse(&self) -> Word {
        Word::from_letters(self.letters.iter().rev().map(|l| Letter {
            vertex: l.vertex,
            exp: -&l.exp,
        }))
    }

    /// Concatenation (merging at the seam only).
    pub fn concat(&self, other: &Word) -> Word {
        Word::from_letters(self.letters.iter().chain(other.letters.iter()).cloned())
    }

    /// Concatenation of several words.
    pub fn concat_all<'a, I: IntoIterator<Item = &'a Word>>(words: I) -> Word {
        let mut letters = Vec::new();
        for w in words {
            letters.extend(w.letters.iter().cloned());
        }
        Word::from_letters(letters)
    }

    /// Exponent sum per vertex of the ambient graph.
    pub fn abelianization(&self, num_vertices: usize) -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); num_vertices];
        for l in &self.letters {
            out[l.vertex] += &l.exp;
        }
        out
    }

    /// Total letter count weighted by |exponent| (a crude length measure).
    pub fn weight(&self) -> BigInt {
        self.letters.iter().map(|l| l.exp.abs()).sum()
    }

    /// Renders the word using the graph's vertex names, e.g. `a b^-2 c`.
    pub fn render(&self, graph: &SimpleGraph) -> String {
        if self.letters.is_empty() {
            return "1".to_string();
        }
        let parts: Vec<String> = self
            .letters
            .iter()
            .map(|l| {
                if l.exp == BigInt::from(1) {
                    graph.name_of(l.vertex).to_string()
                } else {
                    format!("{}^{}", graph.name_of(l.vertex), l.exp)
                }
            })
            .collect();
        parts.join(" ")
    }
}

/// Parses a whitespace-separated word: tokens `name`, `name^k` or the
/// literal `1` for the identity.
pub fn parse_word(graph: &SimpleGraph, text: &str) -> Result<Word, WordError> {
    let mut letters = Vec::new();
    for token in text.split_whitespace() {
        if token == "1" {
            continue;
        }
        let (name, exp) = match token.split_once('^') {
            None => (token, BigInt::from(1)),
            Some((name, exp_text)) => {
                let exp: BigInt = exp_text
                    .parse()
                    .map_err(|_| WordError::BadToken(token.to_string()))?;
                (name, exp)
            }
        };
        let vertex = graph
            .index_of(name)
            .ok_or_else(|| WordError::UnknownGenerator(name.to_string()))?;
        letters.push(Letter { vertex, exp });
    }
    Ok(Word::from_letters(letters))
}

/// The canonical normal form of a group element relative to a decomposition
/// node. Structural equality of normal forms is equality in the group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NormalForm {
    /// The identity of the trivial node.
    Trivial,
    /// At a central extension: the vector of central exponents (aligned with
    /// the node's central vertex list) and the normal form of the remainder
    /// relative to the child node.
    Central {
        exps: Vec<BigInt>,
        rest: Box<NormalForm>,
    },
    /// At a free product: the alternating sequence of nontrivial syllables,
    /// tagged by child index. Adjacent syllables always lie in different
    /// children.
    Product { syllables: Vec<(usize, NormalForm)> },
}

impl NormalForm {
    /// Whether this normal form is the identity element.
    pub fn is_identity(&self) -> bool {
        match self {
            NormalForm::Trivial => true,
            NormalForm::Central { exps, rest } => {
                exps.iter().all(|e| e.is_zero()) && rest.is_identity()
            }
            NormalForm::Product { syllables } => syllables.is_empty(),
        }
    }
}

/// Computes the normal form of a word relative to a decomposition node.
///
/// Fails with [`WordError::OutsideAmbient`] if the word uses vertices the
/// node does not cover. The caller supplies the root graph only for error
/// messages.
pub fn normal_form(
    graph: &SimpleGraph,
    node: &DromsNode,
    word: &Word,
) -> Result<NormalForm, WordError> {
    normal_form_letters(graph, node, word.letters())
}

fn normal_form_letters(
    graph: &SimpleGraph,
    node: &DromsNode,
    letters: &[Letter],
) -> Result<NormalForm, WordError> {
    match &node.kind {
        DromsKind::Trivial => match letters.first() {
            None => Ok(NormalForm::Trivial),
            Some(l) => Err(WordError::OutsideAmbient(graph.name_of(l.vertex).to_string())),
        },
        DromsKind::CentralExtension { central, child } => {
            let mut exps = vec![BigInt::zero(); central.len()];
            let mut rest: Vec<Letter> = Vec::new();
            for l in letters {
                match central.binary_search(&l.vertex) {
                    Ok(pos) => exps[pos] += &l.exp,
                    Err(_) => rest.push(l.clone()),
                }
            }
            let rest_nf = normal_form_letters(graph, child, &Word::from_letters(rest).letters)?;
            Ok(NormalForm::Central {
                exps,
                rest: Box::new(rest_nf),
            })
        }
        DromsKind::FreeProduct { children } => {
            let child_of = |vertex: usize| -> Result<usize, WordError> {
                children
                    .iter()
                    .position(|c| c.verts.binary_search(&vertex).is_ok())
                    .ok_or_else(|| WordError::OutsideAmbient(graph.name_of(vertex).to_string()))
            };
            // Cut into maximal runs per child, normalise each run, then
            // reduce the syllable sequence like a free word.
            let mut stack: Vec<(usize, NormalForm)> = Vec::new();
            let push = |stack: &mut Vec<(usize, NormalForm)>,
                            idx: usize,
                            nf: NormalForm|
             -> Result<(), WordError> {
                let idx = idx;
                let mut nf = nf;
                loop {
                    if nf.is_identity() {
                        return Ok(());
                    }
                    match stack.last() {
                        Some((top_idx, _)) if *top_idx == idx => {
                            let (_, top_nf) = stack.pop().expect("nonempty");
                            let merged = Word::from_letters(
                                letters_of_nf(&children[idx], &top_nf)
                                    .into_iter()
                                    .chain(letters_of_nf(&children[idx], &nf)),
                            );
                            nf = normal_form_letters(graph, &children[idx], merged.letters())?;
                            let _ = idx;
                        }
                        _ => {
                            stack.push((idx, nf));
                            return Ok(());
                        }
                    }
                }
            };
            let mut run: Vec<Letter> = Vec::new();
            let mut run_child: Option<usize> = None;
            for l in letters {
                let idx = child_of(l.vertex)?;
                match run_child {
                    Some(current) if current == idx => run.push(l.clone()),
                    Some(current) => {
                        let nf = normal_form_letters(
                            graph,
                            &children[current],
                            Word::from_letters(core::mem::take(&mut run)).letters(),
                        )?;
                        push(&mut stack, current, nf)?;
                        run.push(l.clone());
                        run_child = Some(idx);
                    }
                    None => {
                        run.push(l.clone());
                        run_child = Some(idx);
                    }
                }
            }
            if let Some(current) = run_child {
                let nf = normal_form_letters(
                    graph,
                    &children[current],
                    Word::from_letters(run).letters(),
                )?;
                push(&mut stack, current, nf)?;
            }
            Ok(NormalForm::Product { syllables: stack })
        }
    }
}

/// Renders a normal form back into a canonical word (central letters first,
/// in vertex order, then the remainder; syllables in sequence).
pub fn letters_of_nf(node: &DromsNode, nf: &NormalForm) -> Vec<Letter> {
    match (&node.kind, nf) {
        (DromsKind::Trivial, NormalForm::Trivial) => Vec::new(),
        (DromsKind::CentralExtension { central, child }, NormalForm::Central { exps, rest }) => {
            let mut out: Vec<Letter> = central
                .iter()
                .zip(exps.iter())
                .filter(|(_, e)| !e.is_zero())
                .map(|(&vertex, e)| Letter {
                    vertex,
                    exp: e.clone(),
                })
                .collect();
            out.extend(letters_of_nf(child, rest));
            out
        }
        (DromsKind::FreeProduct { children }, NormalForm::Product { syllables }) => syllables
            .iter()
            .flat_map(|(idx, s)| letters_of_nf(&children[*idx], s))
            .collect(),
        _ => panic!("normal form does not match node shape"),
    }
}

/// The canonical word representing the same group element.
pub fn canonical(graph: &SimpleGraph, node: &DromsNode, word: &Word) -> Result<Word, WordError> {
    let nf = normal_form(graph, node, word)?;
    Ok(Word::from_letters(letters_of_nf(node, &nf)))
}

/// Equality in the group, via normal forms.
pub fn words_equal(
    graph: &SimpleGraph,
    node: &DromsNode,
    a: &Word,
    b: &Word,
) -> Result<bool, WordError> {
    Ok(normal_form(graph, node, a)? == normal_form(graph, node, b)?)
}

/// Whether a word represents the identity.
pub fn is_trivial(graph: &SimpleGraph, node: &DromsNode, w: &Word) -> Result<bool, WordError> {
    Ok(normal_form(graph, node, w)?.is_identity())
}

/// At a central extension node, splits an element as `t^a · u` where `t^a`
/// collects the central generators and `u` is the canonical word of the
/// projection to the child node. Returns `(a, u)`.
pub fn project_central(
    graph: &SimpleGraph,
    node: &DromsNode,
    word: &Word,
) -> Result<(Vec<BigInt>, Word), WordError> {
    match normal_form(graph, node, word)? {
        NormalForm::Central { exps, rest } => {
            let child = match &node.kind {
                DromsKind::CentralExtension { child, .. } => child,
                _ => unreachable!(),
            };
            Ok((exps, Word::from_letters(letters_of_nf(child, &rest))))
        }
        _ => panic!("project_central requires a central extension node"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Raag;

    fn raag(vertices: &[&str], edges: &[(&str, &str)]) -> Raag {
        Raag::new(SimpleGraph::new(vertices, edges).unwrap()).unwrap()
    }

    fn w(r: &Raag, text: &str) -> Word {
        parse_word(r.graph(), text).unwrap()
    }

    fn canon_str(r: &Raag, text: &str) -> String {
        canonical(r.graph(), r.tree(), &w(r, text))
            .unwrap()
            .render(r.graph())
    }

    #[test]
    fn parse_and_render_round_trip() {
        let r = raag(&["a", "b"], &[]);
        assert_eq!(w(&r, "a b^-2 a^3").render(r.graph()), "a b^-2 a^3");
        assert_eq!(w(&r, "1").render(r.graph()), "1");
        assert!(parse_word(r.graph(), "x").is_err());
        assert!(parse_word(r.graph(), "a^x").is_err());
    }

    #[test]
    fn free_group_reduction() {
        let r = raag(&["a", "b"], &[]);
        assert_eq!(canon_str(&r, "a b b^-1 a^-1"), "1");
        assert_eq!(canon_str(&r, "a b a^-1 a b^-1"), "a");
        assert_eq!(canon_str(&r, "a a a^-1 b"), "a b");
    }

    #[test]
    fn central_letters_commute_past_everything() {
        // a - b - c: b is central.
        let r = raag(&["a", "b", "c"], &[("a", "b"), ("b", "c")]);
        assert!(words_equal(r.graph(), r.tree(), &w(&r, "a b"), &w(&r, "b a")).unwrap());
        assert!(words_equal(r.graph(), r.tree(), &w(&r, "a b c"), &w(&r, "b a c")).unwrap());
        assert!(!words_equal(r.graph(), r.tree(), &w(&r, "a b c"), &w(&r, "b c a")).unwrap());
        assert!(!words_equal(r.graph(), r.tree(), &w(&r, "a c"), &w(&r, "c a")).unwrap());
        assert_eq!(canon_str(&r, "a b c b a^-1"), "b^2 a c a^-1");
    }

    #[test]
    fn abelian_ambient_collapses_fully() {
        let r = raag(&["a", "b"], &[("a", "b")]);
        assert_eq!(canon_str(&r, "b a b a^-2"), "a^-1 b^2");
    }

    #[test]
    fn free_product_of_abelian_factors() {
        // Two components {a,b} (abelian) and {c}.
        let r = raag(&["a", "b", "c"], &[("a", "b")]);
        assert_eq!(canon_str(&r, "b a c a b"), "a b c a b");
        assert_eq!(canon_str(&r, "a c c^-1 a"), "a^2");
        assert!(!words_equal(r.graph(), r.tree(), &w(&r, "a c"), &w(&r, "c a")).unwrap());
    }

    #[test]
    fn project_central_splits() {
        let r = raag(&["a", "b", "c"], &[("a", "b"), ("b", "c")]);
        let (exps, u) = project_central(r.graph(), r.tree(), &w(&r, "a b^2 c b^-1")).unwrap();
        assert_eq!(exps, vec![BigInt::from(1)]);
        assert_eq!(u.render(r.graph()), "a c");
    }

    #[test]
    fn outside_ambient_detected() {
        let r = raag(&["a", "b", "c"], &[("a", "b"), ("b", "c")]);
        // The child node of the central extension covers {a, c} only.
        let child = match &r.tree().kind {
            crate::graph::DromsKind::CentralExtension { child, .. } => child.clone(),
            _ => unreachable!(),
        };
        let err = normal_form(r.graph(), &child, &w(&r, "b")).unwrap_err();
        assert_eq!(err, WordError::OutsideAmbient("b".into()));
    }
}
