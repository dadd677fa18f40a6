//! Algorithms for subgroups of Droms right-angled Artin groups.
//!
//! A right-angled Artin group (RAAG) is presented by a finite simple graph:
//! one generator per vertex, with two generators commuting exactly when their
//! vertices are adjacent. The *Droms* graphs are those with no induced path
//! or cycle on four vertices; equivalently, the graphs built recursively from
//! the one-vertex graph by disjoint union (free products) and adding a vertex
//! adjacent to everything (direct products with Z). Over this class the crate
//! decides, for finitely generated subgroups `H` and `K`:
//!
//! * whether `H ∩ K` is finitely generated, with an explicit generating set
//!   when it is ([`solver`]);
//! * whether a coset intersection `w·H ∩ w'·K` is empty, with an explicit
//!   witness element when it is not;
//! * membership `w ∈ H`, with a witness expression in the generators of `H`;
//! * a structured basis for a finitely generated subgroup (its own
//!   presentation graph plus rewriting maps in both directions).
//!
//! The machinery follows the recursive structure of the defining graph:
//! integer lattice arithmetic for abelian layers ([`lattice`]), completion
//! bookkeeping for central extensions, and folded wedge automata over free
//! products ([`wedge`], [`junction`]). A brute-force enumerator ([`oracle`])
//! cross-checks the solver on small instances.
//!
//! Everything in this crate is deterministic: vertex orders, folding orders
//! and breadth-first traversals are all fixed, so identical inputs produce
//! byte-identical outputs.
//!
//! The crate is `no_std` (with `alloc`); IO, file formats and the CLI live in
//! the companion crate `droms-cli`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod formal;
pub mod graph;
pub mod junction;
pub mod lattice;
pub mod oracle;
pub mod solver;
pub mod wedge;
pub mod word;
