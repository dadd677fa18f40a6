//! The decision procedures: membership, graphical bases, subgroup
//! intersection and coset intersection, recursing along the decomposition
//! tree of the ambient group.
//!
//! Every finitely generated subgroup is handled according to the shape of
//! the ambient node:
//!
//! * **trivial** — everything degenerates to the identity;
//! * **abelian** — exponent vectors and [`Lattice`] arithmetic;
//! * **central extension** `Z^m × G₀` — split each generator into a central
//!   vector and a projection, compute a basis of the projected subgroup
//!   recursively, complete its basis words back into the subgroup, and keep
//!   the central kernel `L = H ∩ Z^m` as a lattice ([`CentralData`]);
//! * **free product** — a reduced folded automaton
//!   ([`WedgeAutomaton`](crate::wedge::WedgeAutomaton)), with intersections
//!   delegated to the pullback construction in [`junction`](crate::junction).
//!
//! All answers carry witnesses: membership returns an expression of the
//! element over the given generators, and a subgroup basis carries rewrite
//! expressions in both directions. Intersections either return generators or
//! a pair `u, v` of elements of both subgroups generating a rank-2 free
//! group inside a subgroup that obstructs finite generation.
//!
//! Results for repeated (node, generators) inputs are memoised; all
//! iteration orders are deterministic, so identical queries always produce
//! identical output.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::rc::Rc;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::cell::RefCell;
use core::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::formal::FormalWord;
use crate::graph::{DromsKind, DromsNode, GraphError, Raag, SimpleGraph};
use crate::junction::{self, FactorOps, JunctionMode, JunctionResult};
use crate::lattice::{mat_mul, mat_sub, solve_row_system, AffineLattice, Lattice, Row};
use crate::wedge::{MembershipOracle, WedgeAutomaton};
use crate::word::{canonical, project_central, Letter, Word, WordError};

/// Errors surfaced by the solver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolverError {
    /// A word problem error (unknown generator, outside the ambient, ...).
    Word(WordError),
    /// A graph validation error.
    Graph(GraphError),
    /// A computation exceeded a built-in resource bound.
    Limit(String),
    /// An internal invariant failed; indicates a bug.
    Internal(String),
}

impl From<WordError> for SolverError {
    fn from(e: WordError) -> SolverError {
        SolverError::Word(e)
    }
}

impl From<GraphError> for SolverError {
    fn from(e: GraphError) -> SolverError {
        SolverError::Graph(e)
    }
}

impl fmt::Display for SolverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverError::Word(e) => write!(f, "{e}"),
            SolverError::Graph(e) => write!(f, "{e}"),
            SolverError::Limit(s) => write!(f, "resource limit exceeded: {s}"),
            SolverError::Internal(s) => write!(f, "internal error: {s}"),
        }
    }
}

/// Internal intersection outcome. In the `NotFg` case, `u` and `v` lie in
/// both subgroups and generate a rank-2 free group, witnessing that the
/// intersection is not finitely generated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SipOutcome {
    Fg(Vec<Word>),
    NotFg { u: Word, v: Word },
}

/// Public intersection outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IntersectionOutcome {
    /// The intersection is finitely generated, with generators.
    Fg { generators: Vec<Word> },
    /// Not finitely generated; the witness is a nontrivial commutator of
    /// elements of both subgroups.
    NotFg { witness: Word },
}

/// Answer to a coset intersection query `w·H ∩ w'·K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CosetAnswer {
    /// Nonempty, with an element of the intersection.
    Element(Word),
    Empty,
    /// The procedure could not decide (only possible when `H ∩ K` is not
    /// finitely generated).
    Undecided,
}

/// Commutation graph on the elements of a basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisGraph {
    pub n: usize,
    adj: Vec<bool>,
}

impl BasisGraph {
    pub fn empty(n: usize) -> BasisGraph {
        BasisGraph {
            n,
            adj: vec![false; n * n],
        }
    }

    pub fn complete(n: usize) -> BasisGraph {
        let mut g = BasisGraph::empty(n);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    g.adj[i * n + j] = true;
                }
            }
        }
        g
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.n + j]
    }

    pub fn set_adjacent(&mut self, i: usize, j: usize) {
        debug_assert_ne!(i, j);
        self.adj[i * self.n + j] = true;
        self.adj[j * self.n + i] = true;
    }

    /// Vertices adjacent to every other vertex (the center of the
    /// corresponding group).
    pub fn center(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&i| (0..self.n).all(|j| j == i || self.adjacent(i, j)))
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        self.center().len() == self.n
    }

    /// Copies `other` onto the vertex range starting at `offset`.
    fn paste(&mut self, offset: usize, other: &BasisGraph) {
        for i in 0..other.n {
            for j in 0..other.n {
                if i != j && other.adjacent(i, j) {
                    self.adj[(offset + i) * self.n + (offset + j)] = true;
                }
            }
        }
    }
}

/// A graphical basis of a finitely generated subgroup: basis words whose
/// commutation graph describes the subgroup's own presentation (the subgroup
/// is the group of the [`BasisGraph`] on the basis words), together with
/// rewrite expressions in both directions.
#[derive(Debug, Clone)]
pub struct BasisData {
    /// Canonical ambient words.
    pub basis: Vec<Word>,
    pub graph: BasisGraph,
    /// `basis[j]` expressed over the original generators.
    pub rewrite_out: Vec<FormalWord>,
    /// Original generator `i` expressed over the basis symbols.
    pub rewrite_in: Vec<FormalWord>,
}

/// Data for a subgroup of a central extension `Z^m × G₀`.
struct CentralData {
    /// Projection of each generator to the child node.
    v_words: Vec<Word>,
    /// Basis of the projected subgroup.
    proj: Rc<BasisData>,
    /// Central completion of each projected basis word: evaluating its
    /// rewrite over the original generators yields `t^{a_j} · u_j`.
    a_rows: Vec<Row>,
    /// The central kernel `H ∩ Z^m`.
    lat: Lattice,
    /// Each kernel basis vector `t^b` expressed over the original
    /// generators.
    lat_exprs: Vec<FormalWord>,
    /// The subgroup's own basis data.
    data: Rc<BasisData>,
}

/// The recursive decision engine for one ambient group.
pub struct Solver<'a> {
    raag: &'a Raag,
    basis_memo: RefCell<BTreeMap<String, Rc<BasisData>>>,
    central_memo: RefCell<BTreeMap<String, Rc<CentralData>>>,
    wedge_memo: RefCell<BTreeMap<String, Rc<WedgeAutomaton>>>,
    sip_memo: RefCell<BTreeMap<String, SipOutcome>>,
}

/// Renders a word as a graph-independent memo key fragment.
fn word_key(w: &Word) -> String {
    let parts: Vec<String> = w
        .letters()
        .iter()
        .map(|l| format!("{}^{}", l.vertex, l.exp))
        .collect();
    parts.join(".")
}

fn memo_key(node: &DromsNode, lists: &[&[Word]]) -> String {
    let mut key = format!(
        "{}",
        node.verts
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",")
    );
    for list in lists {
        key.push('|');
        // Wrap each word so lists of different lengths can never collide
        // (the identity renders as an empty fragment).
        let parts: Vec<String> = list.iter().map(|w| format!("({})", word_key(w))).collect();
        key.push_str(&parts.join(";"));
    }
    key
}

/// `w^exp` as a word, expanding multi-letter bases (bounded).
fn pow_word(w: &Word, exp: &BigInt) -> Result<Word, SolverError> {
    if exp.is_zero() || w.is_empty_word() {
        return Ok(Word::identity());
    }
    if w.letters().len() == 1 {
        let l = &w.letters()[0];
        return Ok(Word::power(l.vertex, &l.exp * exp));
    }
    let n: u64 = exp
        .abs()
        .try_into()
        .map_err(|_| SolverError::Limit("word power exponent too large".into()))?;
    if n.saturating_mul(w.letters().len() as u64) > 1_000_000 {
        return Err(SolverError::Limit("word power expansion too large".into()));
    }
    let base = if exp.is_negative() { w.inverse() } else { w.clone() };
    let mut out = Word::identity();
    for _ in 0..n {
        out = out.concat(&base);
    }
    Ok(out)
}

fn unit_row(dim: usize, at: usize) -> Row {
    let mut row = vec![BigInt::zero(); dim];
    row[at] = BigInt::from(1);
    row
}

fn neg_row(row: &Row) -> Row {
    row.iter().map(|e| -e).collect()
}

fn add_rows(a: &Row, b: &Row) -> Row {
    a.iter().zip(b.iter()).map(|(x, y)| x + y).collect()
}

fn sub_rows(a: &Row, b: &Row) -> Row {
    a.iter().zip(b.iter()).map(|(x, y)| x - y).collect()
}

/// `v * matrix` for a single row vector.
fn vec_mat(v: &Row, matrix: &[Row], cols: usize) -> Row {
    mat_mul(core::slice::from_ref(v), matrix, cols)
        .into_iter()
        .next()
        .unwrap()
}

/// The word `Π vertices[k]^{row[k]}` (canonical when the vertices commute
/// and are listed in ambient order).
fn vertex_word(vertices: &[usize], row: &Row) -> Word {
    Word::from_letters(vertices.iter().zip(row.iter()).map(|(&vertex, exp)| Letter {
        vertex,
        exp: exp.clone(),
    }))
}

/// Restriction of a full abelianization to the coordinates of a node.
fn restrict_ab(full: &[BigInt], verts: &[usize]) -> Row {
    verts.iter().map(|&v| full[v].clone()).collect()
}

enum NodeShape<'n> {
    Trivial,
    Abelian,
    Central {
        central: &'n [usize],
        child: &'n DromsNode,
    },
    FreeProduct,
}

fn shape_of(node: &DromsNode) -> NodeShape<'_> {
    if node.is_trivial() {
        return NodeShape::Trivial;
    }
    if node.is_abelian() {
        return NodeShape::Abelian;
    }
    match &node.kind {
        DromsKind::CentralExtension { central, child } => NodeShape::Central { central, child },
        DromsKind::FreeProduct { .. } => NodeShape::FreeProduct,
        DromsKind::Trivial => unreachable!("trivial handled above"),
    }
}

impl<'a> Solver<'a> {
    pub fn new(raag: &'a Raag) -> Solver<'a> {
        Solver {
            raag,
            basis_memo: RefCell::new(BTreeMap::new()),
            central_memo: RefCell::new(BTreeMap::new()),
            wedge_memo: RefCell::new(BTreeMap::new()),
            sip_memo: RefCell::new(BTreeMap::new()),
        }
    }

    pub fn raag(&self) -> &Raag {
        self.raag
    }

    fn graph(&self) -> &SimpleGraph {
        self.raag.graph()
    }

    fn canon(&self, node: &DromsNode, w: &Word) -> Result<Word, SolverError> {
        Ok(canonical(self.graph(), node, w)?)
    }

    fn canon_all(&self, node: &DromsNode, words: &[Word]) -> Result<Vec<Word>, SolverError> {
        words.iter().map(|w| self.canon(node, w)).collect()
    }

    // --- public root-level API ------------------------------------------

    /// Membership of `g` in the subgroup generated by `gens`, with a witness
    /// expression over `gens` on success.
    pub fn membership(&self, gens: &[Word], g: &Word) -> Result<Option<FormalWord>, SolverError> {
        self.membership_at(self.raag.tree(), gens, g)
    }

    /// A graphical basis of the subgroup generated by `gens`.
    pub fn subgroup_basis(&self, gens: &[Word]) -> Result<Rc<BasisData>, SolverError> {
        self.basis_at(self.raag.tree(), gens)
    }

    /// Whether `⟨gens1⟩ ∩ ⟨gens2⟩` is finitely generated, with generators or
    /// a witness.
    pub fn intersect(&self, gens1: &[Word], gens2: &[Word]) -> Result<IntersectionOutcome, SolverError> {
        match self.sip_at(self.raag.tree(), gens1, gens2)? {
            SipOutcome::Fg(generators) => Ok(IntersectionOutcome::Fg { generators }),
            SipOutcome::NotFg { u, v } => {
                let witness = self.canon(
                    self.raag.tree(),
                    &u.concat(&v).concat(&u.inverse()).concat(&v.inverse()),
                )?;
                Ok(IntersectionOutcome::NotFg { witness })
            }
        }
    }

    /// Emptiness of `w·⟨gens1⟩ ∩ w'·⟨gens2⟩`.
    pub fn coset_intersect(
        &self,
        gens1: &[Word],
        gens2: &[Word],
        w: &Word,
        wp: &Word,
    ) -> Result<CosetAnswer, SolverError> {
        self.coset_at(self.raag.tree(), gens1, gens2, w, wp)
    }

    /// The reduced folded automaton for a subgroup of a free-product node
    /// (exposed for inspection and rendering).
    pub fn automaton(&self, gens: &[Word]) -> Result<Option<Rc<WedgeAutomaton>>, SolverError> {
        match shape_of(self.raag.tree()) {
            NodeShape::FreeProduct => Ok(Some(self.wedge_for(self.raag.tree(), gens)?)),
            _ => Ok(None),
        }
    }

    // --- recursive node-level procedures --------------------------------

    /// Membership at an arbitrary decomposition node.
    pub fn membership_at(
        &self,
        node: &DromsNode,
        gens: &[Word],
        g: &Word,
    ) -> Result<Option<FormalWord>, SolverError> {
        let gens = self.canon_all(node, gens)?;
        let g = self.canon(node, g)?;
        match shape_of(node) {
            NodeShape::Trivial => Ok(Some(FormalWord::identity())),
            NodeShape::Abelian => {
                let rows: Vec<Row> = gens
                    .iter()
                    .map(|h| restrict_ab(&h.abelianization(self.graph().len()), &node.verts))
                    .collect();
                let (lat, exprs) = Lattice::from_rows_with_expressions(node.verts.len(), rows);
                let target = restrict_ab(&g.abelianization(self.graph().len()), &node.verts);
                let Some(coeffs) = lat.member(&target) else {
                    return Ok(None);
                };
                let mut out = FormalWord::identity();
                for (alpha, expr) in coeffs.iter().zip(exprs.iter()) {
                    for (i, e) in expr.iter().enumerate() {
                        out = out.concat(&FormalWord::power(i, alpha * e));
                    }
                }
                Ok(Some(out))
            }
            NodeShape::Central { central, child } => {
                let cd = self.central_data(node, &gens)?;
                let (gamma, v) = project_central(self.graph(), node, &g)?;
                let Some(beta) = self.membership_at(child, &cd.proj.basis, &v)? else {
                    return Ok(None);
                };
                let d = vec_mat(&beta.abelianization(cd.proj.basis.len()), &cd.a_rows, central.len());
                let Some(alpha) = cd.lat.member(&sub_rows(&gamma, &d)) else {
                    return Ok(None);
                };
                let mut out = FormalWord::identity();
                for (a, expr) in alpha.iter().zip(cd.lat_exprs.iter()) {
                    out = out.concat(&expr.pow(a));
                }
                let proj_out = &cd.proj.rewrite_out;
                Ok(Some(out.concat(&beta.substitute(|j| proj_out[j].clone()))))
            }
            NodeShape::FreeProduct => {
                let wa = self.wedge_for(node, &gens)?;
                match wa.trace(self.graph(), &g, self)? {
                    Some(steps) => Ok(Some(wa.trace_witness(&steps))),
                    None => Ok(None),
                }
            }
        }
    }

    /// Graphical basis at an arbitrary node.
    pub fn basis_at(&self, node: &DromsNode, gens: &[Word]) -> Result<Rc<BasisData>, SolverError> {
        let gens = self.canon_all(node, gens)?;
        let key = memo_key(node, &[&gens]);
        if let Some(hit) = self.basis_memo.borrow().get(&key) {
            return Ok(hit.clone());
        }
        let data = match shape_of(node) {
            NodeShape::Trivial => Rc::new(BasisData {
                basis: Vec::new(),
                graph: BasisGraph::empty(0),
                rewrite_out: Vec::new(),
                rewrite_in: vec![FormalWord::identity(); gens.len()],
            }),
            NodeShape::Abelian => Rc::new(self.abelian_basis(node, &gens)),
            NodeShape::Central { .. } => self.central_data(node, &gens)?.data.clone(),
            NodeShape::FreeProduct => Rc::new(self.free_product_basis(node, &gens)?),
        };
        self.basis_memo.borrow_mut().insert(key, data.clone());
        Ok(data)
    }

    fn abelian_basis(&self, node: &DromsNode, gens: &[Word]) -> BasisData {
        let dim = node.verts.len();
        let rows: Vec<Row> = gens
            .iter()
            .map(|h| restrict_ab(&h.abelianization(self.graph().len()), &node.verts))
            .collect();
        let (lat, exprs) = Lattice::from_rows_with_expressions(dim, rows.clone());
        let basis: Vec<Word> = lat
            .basis()
            .iter()
            .map(|row| vertex_word(&node.verts, row))
            .collect();
        let rewrite_out: Vec<FormalWord> = exprs
            .iter()
            .map(|expr| {
                FormalWord::from_factors(expr.iter().enumerate().map(|(i, e)| (i, e.clone())))
            })
            .collect();
        let rewrite_in: Vec<FormalWord> = rows
            .iter()
            .map(|row| {
                let coeffs = lat.member(row).expect("generator row lies in its own lattice");
                FormalWord::from_factors(coeffs.into_iter().enumerate().map(|(k, c)| (k, c)))
            })
            .collect();
        BasisData {
            basis,
            graph: BasisGraph::complete(lat.rank()),
            rewrite_out,
            rewrite_in,
        }
    }

    fn central_data(&self, node: &DromsNode, gens: &[Word]) -> Result<Rc<CentralData>, SolverError> {
        let gens = self.canon_all(node, gens)?;
        let key = memo_key(node, &[&gens]);
        if let Some(hit) = self.central_memo.borrow().get(&key) {
            return Ok(hit.clone());
        }
        let NodeShape::Central { central, child } = shape_of(node) else {
            return Err(SolverError::Internal("central data on non-central node".into()));
        };
        let m = central.len();
        let n = gens.len();
        let mut c_rows: Vec<Row> = Vec::with_capacity(n);
        let mut v_words: Vec<Word> = Vec::with_capacity(n);
        for h in &gens {
            let (c, v) = project_central(self.graph(), node, h)?;
            c_rows.push(c);
            v_words.push(v);
        }
        let proj = self.basis_at(child, &v_words)?;
        let k = proj.basis.len();
        // a_j: central part of evaluating basis word j's rewrite over the
        // original generators.
        let a_rows: Vec<Row> = proj
            .rewrite_out
            .iter()
            .map(|sigma| vec_mat(&sigma.abelianization(n), &c_rows, m))
            .collect();
        // d_i: central part of re-evaluating generator i's rewrite over the
        // completed basis words; then t^{c_i - d_i} lies in the subgroup.
        let diff_rows: Vec<Row> = (0..n)
            .map(|i| {
                let d = vec_mat(&proj.rewrite_in[i].abelianization(k), &a_rows, m);
                sub_rows(&c_rows[i], &d)
            })
            .collect();
        let (lat, u_rows) = Lattice::from_rows_with_expressions(m, diff_rows);
        // E_i: a formal word over the generators evaluating to t^{c_i - d_i}.
        let e_exprs: Vec<FormalWord> = (0..n)
            .map(|i| {
                let proj_out = &proj.rewrite_out;
                let lift = proj.rewrite_in[i].substitute(|j| proj_out[j].clone());
                FormalWord::generator(i).concat(&lift.inverse())
            })
            .collect();
        let lat_exprs: Vec<FormalWord> = u_rows
            .iter()
            .map(|urow| {
                let mut out = FormalWord::identity();
                for (i, c) in urow.iter().enumerate() {
                    out = out.concat(&e_exprs[i].pow(c));
                }
                out
            })
            .collect();
        let rank = lat.rank();
        let mut basis: Vec<Word> = lat
            .basis()
            .iter()
            .map(|row| vertex_word(central, row))
            .collect();
        for (a, u) in a_rows.iter().zip(proj.basis.iter()) {
            basis.push(self.canon(node, &vertex_word(central, a).concat(u))?);
        }
        let mut graph = BasisGraph::empty(rank + k);
        for i in 0..rank {
            for j in 0..rank + k {
                if i != j {
                    graph.set_adjacent(i, j);
                }
            }
        }
        graph.paste(rank, &proj.graph);
        let mut rewrite_out = lat_exprs.clone();
        rewrite_out.extend(proj.rewrite_out.iter().cloned());
        let rewrite_in: Vec<FormalWord> = (0..n)
            .map(|i| {
                let d = vec_mat(&proj.rewrite_in[i].abelianization(k), &a_rows, m);
                let coeffs = lat
                    .member(&sub_rows(&c_rows[i], &d))
                    .expect("difference row lies in the kernel lattice");
                let lat_part = FormalWord::from_factors(
                    coeffs.into_iter().enumerate().map(|(kk, c)| (kk, c)),
                );
                lat_part.concat(&proj.rewrite_in[i].shift(rank))
            })
            .collect();
        let data = Rc::new(BasisData {
            basis,
            graph,
            rewrite_out,
            rewrite_in,
        });
        let cd = Rc::new(CentralData {
            v_words,
            proj,
            a_rows,
            lat,
            lat_exprs,
            data,
        });
        self.central_memo.borrow_mut().insert(key, cd.clone());
        Ok(cd)
    }

    /// The reduced folded automaton for a subgroup of a free-product node.
    pub fn wedge_for(&self, node: &DromsNode, gens: &[Word]) -> Result<Rc<WedgeAutomaton>, SolverError> {
        let gens = self.canon_all(node, gens)?;
        let key = memo_key(node, &[&gens]);
        if let Some(hit) = self.wedge_memo.borrow().get(&key) {
            return Ok(hit.clone());
        }
        let mut wa = WedgeAutomaton::flower(self.graph(), node, &gens)?;
        wa.reduce(self.graph(), self)?;
        let wa = Rc::new(wa);
        self.wedge_memo.borrow_mut().insert(key, wa.clone());
        Ok(wa)
    }

    fn free_product_basis(&self, node: &DromsNode, gens: &[Word]) -> Result<BasisData, SolverError> {
        let wa = self.wedge_for(node, gens)?;
        let kd = wa.kurosh(self.graph())?;
        let mut basis: Vec<Word> = Vec::new();
        let mut rewrite_out: Vec<FormalWord> = Vec::new();
        let mut arc_to_sym: BTreeMap<usize, usize> = BTreeMap::new();
        for (i, fg) in kd.free.iter().enumerate() {
            arc_to_sym.insert(fg.arc, i);
            basis.push(fg.elem.clone());
            rewrite_out.push(fg.witness.clone());
        }
        // Per vertex group: a recursive basis of its label subgroup,
        // conjugated into the ambient.
        struct VgBlock {
            offset: usize,
            factor_basis: Rc<BasisData>,
        }
        let mut blocks: BTreeMap<usize, VgBlock> = BTreeMap::new();
        let mut graph_blocks: Vec<(usize, BasisGraph)> = Vec::new();
        for vg in &kd.vertex_groups {
            let elems: Vec<Word> = vg.gens.iter().map(|g| g.elem.clone()).collect();
            let fb = self.basis_at(&wa.factors[vg.kind], &elems)?;
            let offset = basis.len();
            for (bk, bw) in fb.basis.iter().enumerate() {
                basis.push(self.canon(
                    node,
                    &vg.z_inv.concat(bw).concat(&vg.z_inv.inverse()),
                )?);
                let witnesses: Vec<FormalWord> =
                    vg.gens.iter().map(|g| g.witness.clone()).collect();
                rewrite_out.push(fb.rewrite_out[bk].substitute(|i| witnesses[i].clone()));
            }
            graph_blocks.push((offset, fb.graph.clone()));
            blocks.insert(vg.sec, VgBlock { offset, factor_basis: fb });
        }
        let mut graph = BasisGraph::empty(basis.len());
        for (offset, block) in &graph_blocks {
            graph.paste(*offset, block);
        }
        let mut rewrite_in: Vec<FormalWord> = Vec::with_capacity(gens.len());
        for h in gens {
            let steps = self
                .canon(node, h)
                .and_then(|hc| wa.trace(self.graph(), &hc, self))?
                .ok_or_else(|| {
                    SolverError::Internal("generator fails its own membership trace".into())
                })?;
            let mut expr = FormalWord::identity();
            for step in &steps {
                let sym_of = |arc: usize| -> FormalWord {
                    match arc_to_sym.get(&arc) {
                        Some(&s) => FormalWord::generator(s),
                        None => FormalWord::identity(),
                    }
                };
                let pick = if step.pick_expr.is_identity() {
                    FormalWord::identity()
                } else {
                    let q = wa.arc(step.arc_in).sec;
                    let block = blocks.get(&q).ok_or_else(|| {
                        SolverError::Internal("trace picks from an unlabelled secondary".into())
                    })?;
                    let fb = &block.factor_basis;
                    let offset = block.offset;
                    step.pick_expr
                        .substitute(|j| fb.rewrite_in[j].shift(offset))
                };
                expr = expr
                    .concat(&sym_of(step.arc_in).inverse())
                    .concat(&pick)
                    .concat(&sym_of(step.arc_out));
            }
            rewrite_in.push(expr);
        }
        Ok(BasisData {
            basis,
            graph,
            rewrite_out,
            rewrite_in,
        })
    }

    /// Intersection of two finitely generated subgroups at a node.
    pub fn sip_at(
        &self,
        node: &DromsNode,
        gens1: &[Word],
        gens2: &[Word],
    ) -> Result<SipOutcome, SolverError> {
        let gens1 = self.canon_all(node, gens1)?;
        let gens2 = self.canon_all(node, gens2)?;
        let key = memo_key(node, &[&gens1, &gens2]);
        if let Some(hit) = self.sip_memo.borrow().get(&key) {
            return Ok(hit.clone());
        }
        let out = match shape_of(node) {
            NodeShape::Trivial => SipOutcome::Fg(Vec::new()),
            NodeShape::Abelian => {
                let dim = node.verts.len();
                let rows = |gens: &[Word]| -> Vec<Row> {
                    gens.iter()
                        .map(|h| restrict_ab(&h.abelianization(self.graph().len()), &node.verts))
                        .collect()
                };
                let l1 = Lattice::from_rows(dim, rows(&gens1));
                let l2 = Lattice::from_rows(dim, rows(&gens2));
                let inter = l1.intersection(&l2);
                SipOutcome::Fg(
                    inter
                        .basis()
                        .iter()
                        .map(|row| vertex_word(&node.verts, row))
                        .collect(),
                )
            }
            NodeShape::Central { central, child } => {
                self.central_sip(node, central, child, &gens1, &gens2)?
            }
            NodeShape::FreeProduct => {
                let a = self.wedge_for(node, &gens1)?;
                let b = self.wedge_for(node, &gens2)?;
                match junction::build(self.graph(), &a, &b, JunctionMode::StrictFg, self)? {
                    JunctionResult::NotFg { u, v } => SipOutcome::NotFg { u, v },
                    JunctionResult::Undecided => {
                        return Err(SolverError::Internal(
                            "coset subproblem undecided during intersection".into(),
                        ))
                    }
                    JunctionResult::Built(j) => {
                        let kd = j.automaton.kurosh(self.graph())?;
                        SipOutcome::Fg(kd.generators())
                    }
                }
            }
        };
        self.sip_memo.borrow_mut().insert(key, out.clone());
        Ok(out)
    }

    /// Completion rows: for each word of `targets` (an element of the
    /// projected subgroup), the central vector of its lift.
    fn completion_rows(
        &self,
        child: &DromsNode,
        cd: &CentralData,
        m: usize,
        targets: &[Word],
    ) -> Result<Vec<Row>, SolverError> {
        targets
            .iter()
            .map(|w| {
                let beta = self
                    .membership_at(child, &cd.proj.basis, w)?
                    .ok_or_else(|| {
                        SolverError::Internal(
                            "projected element escapes the projected subgroup".into(),
                        )
                    })?;
                Ok(vec_mat(&beta.abelianization(cd.proj.basis.len()), &cd.a_rows, m))
            })
            .collect()
    }

    /// Turns a pair with nontrivial commutator in the *projections'*
    /// intersection into a pair inside the subgroups' intersection itself.
    fn lift_notfg_pair(&self, node: &DromsNode, x: &Word, y: &Word) -> Result<SipOutcome, SolverError> {
        let u = self.canon(
            node,
            &x.concat(y).concat(&x.inverse()).concat(&y.inverse()),
        )?;
        let v = self.canon(node, &x.concat(&u).concat(&x.inverse()))?;
        Ok(SipOutcome::NotFg { u, v })
    }

    fn central_sip(
        &self,
        node: &DromsNode,
        central: &[usize],
        child: &DromsNode,
        gens1: &[Word],
        gens2: &[Word],
    ) -> Result<SipOutcome, SolverError> {
        let m = central.len();
        let cd1 = self.central_data(node, gens1)?;
        let cd2 = self.central_data(node, gens2)?;
        let wgens = match self.sip_at(child, &cd1.v_words, &cd2.v_words)? {
            SipOutcome::NotFg { u, v } => return self.lift_notfg_pair(node, &u, &v),
            SipOutcome::Fg(g) => g,
        };
        let lat_inter = cd1.lat.intersection(&cd2.lat);
        let wdata = self.basis_at(child, &wgens)?;
        let n3 = wdata.basis.len();
        if n3 == 0 {
            return Ok(SipOutcome::Fg(
                lat_inter
                    .basis()
                    .iter()
                    .map(|row| vertex_word(central, row))
                    .collect(),
            ));
        }
        let r1 = self.completion_rows(child, &cd1, m, &wdata.basis)?;
        let r2 = self.completion_rows(child, &cd2, m, &wdata.basis)?;
        let lsum = cd1.lat.sum(&cd2.lat);
        let rdiff = mat_sub(&r1, &r2);
        let mlat = lsum.preimage(&rdiff);
        let iz = wdata.graph.center();
        let iy: Vec<usize> = (0..n3).filter(|i| !iz.contains(i)).collect();
        let mut reps: Vec<Row> = Vec::new();
        let m5 = if iy.is_empty() {
            Lattice::zero(0)
        } else {
            let m5 = Lattice::from_rows(
                iy.len(),
                mlat.basis()
                    .iter()
                    .map(|row| iy.iter().map(|&c| row[c].clone()).collect())
                    .collect(),
            );
            if m5.rank() < iy.len() {
                // The intersection maps onto an abelianization-constrained
                // subgroup of infinite rank: not finitely generated. Any
                // nonadjacent basis pair gives the obstruction.
                let (bi, bj) = first_nonadjacent(&wdata.graph, &iy).ok_or_else(|| {
                    SolverError::Internal("missing nonadjacent pair in deficient case".into())
                })?;
                return self.lift_notfg_pair(node, &wdata.basis[bi], &wdata.basis[bj]);
            }
            reps = m5
                .residues(200_000)
                .ok_or_else(|| SolverError::Limit("too many residue classes".into()))?;
            m5
        };
        // Generators of the abelianization-constrained subgroup of the
        // projected intersection, each with its exponent vector.
        let mut items: Vec<(Row, Word)> = Vec::new();
        let e_rows: Vec<Row> = iz.iter().map(|&kk| unit_row(n3, kk)).collect();
        let mz = mlat.preimage(&e_rows);
        for lam in mz.basis() {
            let d = vec_mat(lam, &e_rows, n3);
            let mut word = Word::identity();
            for (&kk, c) in iz.iter().zip(lam.iter()) {
                word = word.concat(&pow_word(&wdata.basis[kk], c)?);
            }
            items.push((d, self.canon(child, &word)?));
        }
        if !iy.is_empty() {
            let mono = |rho: &Row| -> Result<Word, SolverError> {
                let mut out = Word::identity();
                for (&kk, c) in iy.iter().zip(rho.iter()) {
                    out = out.concat(&pow_word(&wdata.basis[kk], c)?);
                }
                Ok(out)
            };
            let mut stacked = e_rows.clone();
            stacked.extend(mlat.basis().iter().cloned());
            for rho in &reps {
                for (jpos, &jidx) in iy.iter().enumerate() {
                    let stepped = add_rows(rho, &unit_row(iy.len(), jpos));
                    let rho_next = m5.reduce_mod(&stepped);
                    let v5 = sub_rows(&stepped, &rho_next);
                    let mut vemb = vec![BigInt::zero(); n3];
                    for (p, &c) in iy.iter().enumerate() {
                        vemb[c] = v5[p].clone();
                    }
                    let x = solve_row_system(&stacked, n3, &neg_row(&vemb)).ok_or_else(|| {
                        SolverError::Internal("projected vector misses its own lattice".into())
                    })?;
                    let lam: Row = x[..iz.len()].to_vec();
                    let d = add_rows(&vemb, &vec_mat(&lam, &e_rows, n3));
                    let mut word = Word::identity();
                    for (&kk, c) in iz.iter().zip(lam.iter()) {
                        word = word.concat(&pow_word(&wdata.basis[kk], c)?);
                    }
                    word = word
                        .concat(&mono(rho)?)
                        .concat(&wdata.basis[jidx])
                        .concat(&mono(&rho_next)?.inverse());
                    let cw = self.canon(child, &word)?;
                    if cw.is_empty_word() {
                        continue;
                    }
                    items.push((d, cw));
                }
            }
        }
        let mut out: Vec<Word> = Vec::new();
        for (d, cw) in items {
            let o1 = AffineLattice::new(vec_mat(&d, &r1, m), cd1.lat.clone());
            let o2 = AffineLattice::new(vec_mat(&d, &r2, m), cd2.lat.clone());
            let delta = o1
                .intersect(&o2)
                .ok_or_else(|| SolverError::Internal("liftable fiber unexpectedly empty".into()))?
                .offset;
            out.push(self.canon(node, &vertex_word(central, &delta).concat(&cw))?);
        }
        for b in lat_inter.basis() {
            out.push(vertex_word(central, b));
        }
        Ok(SipOutcome::Fg(out))
    }

    /// Coset intersection `w·⟨gens1⟩ ∩ w'·⟨gens2⟩` at a node.
    pub fn coset_at(
        &self,
        node: &DromsNode,
        gens1: &[Word],
        gens2: &[Word],
        w: &Word,
        wp: &Word,
    ) -> Result<CosetAnswer, SolverError> {
        let gens1 = self.canon_all(node, gens1)?;
        let gens2 = self.canon_all(node, gens2)?;
        let w = self.canon(node, w)?;
        let wp = self.canon(node, wp)?;
        match shape_of(node) {
            NodeShape::Trivial => Ok(CosetAnswer::Element(Word::identity())),
            NodeShape::Abelian => {
                let dim = node.verts.len();
                let rows = |gens: &[Word]| -> Vec<Row> {
                    gens.iter()
                        .map(|h| restrict_ab(&h.abelianization(self.graph().len()), &node.verts))
                        .collect()
                };
                let l1 = Lattice::from_rows(dim, rows(&gens1));
                let l2 = Lattice::from_rows(dim, rows(&gens2));
                let a1 = AffineLattice::new(
                    restrict_ab(&w.abelianization(self.graph().len()), &node.verts),
                    l1,
                );
                let a2 = AffineLattice::new(
                    restrict_ab(&wp.abelianization(self.graph().len()), &node.verts),
                    l2,
                );
                match a1.intersect(&a2) {
                    Some(aff) => Ok(CosetAnswer::Element(vertex_word(&node.verts, &aff.offset))),
                    None => Ok(CosetAnswer::Empty),
                }
            }
            NodeShape::Central { central, child } => {
                self.central_coset(node, central, child, &gens1, &gens2, &w, &wp)
            }
            NodeShape::FreeProduct => self.free_product_coset(node, &gens1, &gens2, &w, &wp),
        }
    }

    fn central_coset(
        &self,
        node: &DromsNode,
        central: &[usize],
        child: &DromsNode,
        gens1: &[Word],
        gens2: &[Word],
        w: &Word,
        wp: &Word,
    ) -> Result<CosetAnswer, SolverError> {
        let m = central.len();
        let cd1 = self.central_data(node, gens1)?;
        let cd2 = self.central_data(node, gens2)?;
        let (a, u) = project_central(self.graph(), node, w)?;
        let (ap, up) = project_central(self.graph(), node, wp)?;
        let v0 = match self.coset_at(child, &cd1.v_words, &cd2.v_words, &u, &up)? {
            CosetAnswer::Empty => return Ok(CosetAnswer::Empty),
            CosetAnswer::Undecided => return Ok(CosetAnswer::Undecided),
            CosetAnswer::Element(v0) => v0,
        };
        let wgens = match self.sip_at(child, &cd1.v_words, &cd2.v_words)? {
            SipOutcome::NotFg { .. } => return Ok(CosetAnswer::Undecided),
            SipOutcome::Fg(g) => g,
        };
        let wdata = self.basis_at(child, &wgens)?;
        let n3 = wdata.basis.len();
        let r1 = self.completion_rows(child, &cd1, m, &wdata.basis)?;
        let r2 = self.completion_rows(child, &cd2, m, &wdata.basis)?;
        let x1 = self.canon(child, &u.inverse().concat(&v0))?;
        let x2 = self.canon(child, &up.inverse().concat(&v0))?;
        let c = self.completion_rows(child, &cd1, m, core::slice::from_ref(&x1))?.remove(0);
        let cp = self.completion_rows(child, &cd2, m, core::slice::from_ref(&x2))?.remove(0);
        let lsum = cd1.lat.sum(&cd2.lat);
        let target0 = add_rows(&sub_rows(&a, &ap), &sub_rows(&c, &cp));
        let mut rows = mat_sub(&r1, &r2);
        rows.extend(lsum.basis().iter().cloned());
        let Some(x) = solve_row_system(&rows, m, &neg_row(&target0)) else {
            return Ok(CosetAnswer::Empty);
        };
        let lam: Row = x[..n3].to_vec();
        let mut wstar = Word::identity();
        for (bw, c_exp) in wdata.basis.iter().zip(lam.iter()) {
            wstar = wstar.concat(&pow_word(bw, c_exp)?);
        }
        let o1 = AffineLattice::new(
            add_rows(&add_rows(&a, &c), &vec_mat(&lam, &r1, m)),
            cd1.lat.clone(),
        );
        let o2 = AffineLattice::new(
            add_rows(&add_rows(&ap, &cp), &vec_mat(&lam, &r2, m)),
            cd2.lat.clone(),
        );
        let gamma = o1
            .intersect(&o2)
            .ok_or_else(|| SolverError::Internal("coset fiber unexpectedly empty".into()))?
            .offset;
        Ok(CosetAnswer::Element(self.canon(
            node,
            &vertex_word(central, &gamma).concat(&v0).concat(&wstar),
        )?))
    }

    fn free_product_coset(
        &self,
        node: &DromsNode,
        gens1: &[Word],
        gens2: &[Word],
        w: &Word,
        wp: &Word,
    ) -> Result<CosetAnswer, SolverError> {
        // x ∈ wH ∩ w'K iff x⁻¹ ∈ Hw⁻¹ ∩ Kw'⁻¹; track the right cosets
        // H·w⁻¹ and K·w'⁻¹ as thread endpoints.
        let mut a = (*self.wedge_for(node, gens1)?).clone();
        let slot_a = a.attach_thread(self.graph(), &self.canon(node, &w.inverse())?)?;
        a.reduce(self.graph(), self)?;
        let mut b = (*self.wedge_for(node, gens2)?).clone();
        let slot_b = b.attach_thread(self.graph(), &self.canon(node, &wp.inverse())?)?;
        b.reduce(self.graph(), self)?;
        match junction::build(self.graph(), &a, &b, JunctionMode::TrivialLabels, self)? {
            JunctionResult::Undecided => Ok(CosetAnswer::Undecided),
            JunctionResult::NotFg { .. } => Err(SolverError::Internal(
                "label obstruction in label-free junction".into(),
            )),
            JunctionResult::Built(j) => {
                let pair = (a.tracked(slot_a), b.tracked(slot_b));
                match j.prim_of_pair.get(&pair) {
                    Some(&tp) => Ok(CosetAnswer::Element(
                        self.canon(node, &j.automaton.primary(tp).s.inverse())?,
                    )),
                    None => Ok(CosetAnswer::Empty),
                }
            }
        }
    }
}

/// First pair (in index order) of nonadjacent vertices among `within`.
fn first_nonadjacent(graph: &BasisGraph, within: &[usize]) -> Option<(usize, usize)> {
    for (i, &a) in within.iter().enumerate() {
        for &b in &within[i + 1..] {
            if !graph.adjacent(a, b) {
                return Some((a, b));
            }
        }
    }
    None
}

impl MembershipOracle for Solver<'_> {
    fn member_in(
        &self,
        _graph: &SimpleGraph,
        node: &DromsNode,
        gens: &[Word],
        g: &Word,
    ) -> Result<Option<FormalWord>, SolverError> {
        self.membership_at(node, gens, g)
    }
}

impl FactorOps for Solver<'_> {
    fn factor_sip(
        &self,
        _graph: &SimpleGraph,
        node: &DromsNode,
        gens1: &[Word],
        gens2: &[Word],
    ) -> Result<SipOutcome, SolverError> {
        self.sip_at(node, gens1, gens2)
    }

    fn factor_coset(
        &self,
        _graph: &SimpleGraph,
        node: &DromsNode,
        gens1: &[Word],
        gens2: &[Word],
        w: &Word,
        wp: &Word,
    ) -> Result<CosetAnswer, SolverError> {
        self.coset_at(node, gens1, gens2, w, wp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Raag;
    use crate::word::parse_word;

    #[test]
    fn basis_graph_center() {
        let mut g = BasisGraph::empty(3);
        g.set_adjacent(0, 1);
        g.set_adjacent(0, 2);
        assert_eq!(g.center(), vec![0]);
        assert!(!g.is_complete());
        assert!(BasisGraph::complete(3).is_complete());
        assert_eq!(BasisGraph::complete(1).center(), vec![0]);
    }

    #[test]
    fn memoisation_is_transparent() {
        let r = Raag::new(SimpleGraph::new(&["a", "b"], &[]).unwrap()).unwrap();
        let solver = Solver::new(&r);
        let gens = vec![
            parse_word(r.graph(), "a b").unwrap(),
            parse_word(r.graph(), "b a").unwrap(),
        ];
        let b1 = solver.subgroup_basis(&gens).unwrap();
        let b2 = solver.subgroup_basis(&gens).unwrap();
        assert!(Rc::ptr_eq(&b1, &b2));
        assert_eq!(b1.basis.len(), 2);
    }

    #[test]
    fn pow_word_handles_long_single_letters() {
        let w = Word::power(3, BigInt::from(7));
        let big = BigInt::from(10).pow(30);
        let p = pow_word(&w, &big).unwrap();
        assert_eq!(p.letters()[0].exp, BigInt::from(7) * BigInt::from(10).pow(30));
        let multi = Word::from_letters(vec![
            Letter { vertex: 0, exp: BigInt::from(1) },
            Letter { vertex: 1, exp: BigInt::from(1) },
        ]);
        assert!(pow_word(&multi, &big).is_err());
        assert_eq!(pow_word(&multi, &BigInt::from(2)).unwrap().letters().len(), 4);
    }
}
