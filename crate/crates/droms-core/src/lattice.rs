//! Exact arithmetic on sublattices of `Z^n` and their affine cosets.
//!
//! A [`Lattice`] is stored by its canonical echelon basis: row-style Hermite
//! form with strictly increasing pivot columns, positive pivots, and the
//! entries above each pivot reduced into `[0, pivot)`. This form is unique
//! per lattice, so structural equality is lattice equality and every
//! operation is deterministic. All arithmetic is over unbounded integers.
//!
//! Provided operations: membership with coefficients, sum, intersection,
//! preimage under a matrix acting by right multiplication, affine coset
//! intersection, integer row-system solving, and index/residue enumeration
//! for finite-index sublattices.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// A row vector over the integers.
pub type Row = Vec<BigInt>;

/// Builds a row from machine integers (convenience for tests and callers).
pub fn row_from_i64(entries: &[i64]) -> Row {
    entries.iter().map(|&e| BigInt::from(e)).collect()
}

/// `v - c * w`, in place.
fn row_sub_scaled(v: &mut Row, c: &BigInt, w: &Row) {
    if c.is_zero() {
        return;
    }
    for (a, b) in v.iter_mut().zip(w.iter()) {
        *a -= c * b;
    }
}

/// Matrix product of row-major matrices (`a` is r x k, `b` is k x n).
pub fn mat_mul(a: &[Row], b: &[Row], cols: usize) -> Vec<Row> {
    a.iter()
        .map(|row| {
            let mut out = vec![BigInt::zero(); cols];
            for (c, brow) in row.iter().zip(b.iter()) {
                if c.is_zero() {
                    continue;
                }
                for (o, e) in out.iter_mut().zip(brow.iter()) {
                    *o += c * e;
                }
            }
            out
        })
        .collect()
}

/// Entry-wise matrix difference.
pub fn mat_sub(a: &[Row], b: &[Row]) -> Vec<Row> {
    a.iter()
        .zip(b.iter())
        .map(|(ra, rb)| ra.iter().zip(rb.iter()).map(|(x, y)| x - y).collect())
        .collect()
}

/// Row-style Hermite normal form with its unimodular transform.
///
/// Returns `(h, u)` where `u * rows = h`, `u` is unimodular, and `h` is in
/// echelon form (pivot columns strictly increasing, pivots positive, entries
/// above pivots reduced into `[0, pivot)`); zero rows are collected at the
/// bottom.
pub fn hnf_with_transform(rows: &[Row], cols: usize) -> (Vec<Row>, Vec<Row>) {
    let r = rows.len();
    let mut h: Vec<Row> = rows.to_vec();
    let mut u: Vec<Row> = (0..r)
        .map(|i| {
            let mut row = vec![BigInt::zero(); r];
            row[i] = BigInt::one();
            row
        })
        .collect();
    let mut pivot_row = 0;
    for col in 0..cols {
        if pivot_row == r {
            break;
        }
        // Eliminate until at most one row at or below pivot_row is nonzero
        // in this column.
        loop {
            let mut best: Option<usize> = None;
            for i in pivot_row..r {
                if h[i][col].is_zero() {
                    continue;
                }
                best = Some(match best {
                    None => i,
                    Some(j) if h[i][col].abs() < h[j][col].abs() => i,
                    Some(j) => j,
                });
            }
            let Some(best) = best else { break };
            h.swap(pivot_row, best);
            u.swap(pivot_row, best);
            let mut any_left = false;
            for i in (pivot_row + 1)..r {
                if h[i][col].is_zero() {
                    continue;
                }
                let q = h[i][col].div_floor(&h[pivot_row][col]);
                let (hp, up) = (h[pivot_row].clone(), u[pivot_row].clone());
                row_sub_scaled(&mut h[i], &q, &hp);
                row_sub_scaled(&mut u[i], &q, &up);
                if !h[i][col].is_zero() {
                    any_left = true;
                }
            }
            if !any_left {
                break;
            }
        }
        if h[pivot_row][col].is_zero() {
            continue;
        }
        if h[pivot_row][col].is_negative() {
            for e in h[pivot_row].iter_mut() {
                *e = -&*e;
            }
            for e in u[pivot_row].iter_mut() {
                *e = -&*e;
            }
        }
        // Reduce the entries above the pivot into [0, pivot).
        let (hp, up) = (h[pivot_row].clone(), u[pivot_row].clone());
        for i in 0..pivot_row {
            let q = h[i][col].div_floor(&hp[col]);
            row_sub_scaled(&mut h[i], &q, &hp);
            row_sub_scaled(&mut u[i], &q, &up);
        }
        pivot_row += 1;
    }
    (h, u)
}

/// A basis of the left kernel `{x : x * rows = 0}` of a row-major matrix,
/// in canonical echelon form.
pub fn left_kernel(rows: &[Row], cols: usize) -> Vec<Row> {
    let (h, u) = hnf_with_transform(rows, cols);
    let kernel_rows: Vec<Row> = h
        .iter()
        .zip(u.into_iter())
        .filter(|(hrow, _)| hrow.iter().all(|e| e.is_zero()))
        .map(|(_, urow)| urow)
        .collect();
    Lattice::from_rows(rows.len(), kernel_rows).into_basis()
}

/// Solves `x * rows = target` over the integers.
pub fn solve_row_system(rows: &[Row], cols: usize, target: &Row) -> Option<Vec<BigInt>> {
    let (h, u) = hnf_with_transform(rows, cols);
    let mut t = target.clone();
    let mut y = vec![BigInt::zero(); rows.len()];
    for (i, hrow) in h.iter().enumerate() {
        let Some(p) = hrow.iter().position(|e| !e.is_zero()) else {
            break;
        };
        let (q, rem) = t[p].div_rem(&hrow[p]);
        if !rem.is_zero() {
            return None;
        }
        row_sub_scaled(&mut t, &q, hrow);
        y[i] = q;
    }
    if t.iter().any(|e| !e.is_zero()) {
        return None;
    }
    // x = y * u.
    let mut x = vec![BigInt::zero(); rows.len()];
    for (c, urow) in y.iter().zip(u.iter()) {
        if c.is_zero() {
            continue;
        }
        for (o, e) in x.iter_mut().zip(urow.iter()) {
            *o += c * e;
        }
    }
    Some(x)
}

/// A sublattice of `Z^dim` in canonical echelon basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    dim: usize,
    basis: Vec<Row>,
    /// Pivot column of each basis row, strictly increasing.
    pivots: Vec<usize>,
}

impl Lattice {
    /// The zero lattice in `Z^dim`.
    pub fn zero(dim: usize) -> Lattice {
        Lattice {
            dim,
            basis: Vec::new(),
            pivots: Vec::new(),
        }
    }

    /// All of `Z^dim`.
    pub fn full(dim: usize) -> Lattice {
        let basis = (0..dim)
            .map(|i| {
                let mut row = vec![BigInt::zero(); dim];
                row[i] = BigInt::one();
                row
            })
            .collect();
        Lattice {
            dim,
            basis,
            pivots: (0..dim).collect(),
        }
    }

    /// The lattice generated by the given rows.
    pub fn from_rows(dim: usize, rows: Vec<Row>) -> Lattice {
        debug_assert!(rows.iter().all(|r| r.len() == dim));
        let (h, _) = hnf_with_transform(&rows, dim);
        let basis: Vec<Row> = h
            .into_iter()
            .filter(|row| row.iter().any(|e| !e.is_zero()))
            .collect();
        let pivots = basis
            .iter()
            .map(|row| row.iter().position(|e| !e.is_zero()).expect("nonzero row"))
            .collect();
        Lattice { dim, basis, pivots }
    }

    /// Like [`from_rows`](Lattice::from_rows), but also expresses each
    /// canonical basis row as an integer combination of the input rows.
    pub fn from_rows_with_expressions(dim: usize, rows: Vec<Row>) -> (Lattice, Vec<Row>) {
        let (h, u) = hnf_with_transform(&rows, dim);
        let mut basis = Vec::new();
        let mut exprs = Vec::new();
        for (hrow, urow) in h.into_iter().zip(u.into_iter()) {
            if hrow.iter().any(|e| !e.is_zero()) {
                basis.push(hrow);
                exprs.push(urow);
            }
        }
        let pivots = basis
            .iter()
            .map(|row| row.iter().position(|e| !e.is_zero()).expect("nonzero row"))
            .collect();
        (Lattice { dim, basis, pivots }, exprs)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Row] {
        &self.basis
    }

    pub fn into_basis(self) -> Vec<Row> {
        self.basis
    }

    /// Membership with coefficients: `v = sum c_i * basis_i` if possible.
    pub fn member(&self, v: &Row) -> Option<Vec<BigInt>> {
        let mut t = v.clone();
        let mut coeffs = Vec::with_capacity(self.basis.len());
        for (row, &p) in self.basis.iter().zip(self.pivots.iter()) {
            let (q, rem) = t[p].div_rem(&row[p]);
            if !rem.is_zero() {
                return None;
            }
            row_sub_scaled(&mut t, &q, row);
            coeffs.push(q);
        }
        if t.iter().any(|e| !e.is_zero()) {
            return None;
        }
        Some(coeffs)
    }

    pub fn contains(&self, v: &Row) -> bool {
        self.member(v).is_some()
    }

    /// The canonical residue of `v` modulo the lattice: the unique vector in
    /// `v + L` whose entry at each pivot column lies in `[0, pivot)`.
    pub fn reduce_mod(&self, v: &Row) -> Row {
        let mut t = v.clone();
        for (row, &p) in self.basis.iter().zip(self.pivots.iter()) {
            let q = t[p].div_floor(&row[p]);
            row_sub_scaled(&mut t, &q, row);
        }
        t
    }

    /// The sum `L + M`.
    pub fn sum(&self, other: &Lattice) -> Lattice {
        debug_assert_eq!(self.dim, other.dim);
        let rows: Vec<Row> = self
            .basis
            .iter()
            .chain(other.basis.iter())
            .cloned()
            .collect();
        Lattice::from_rows(self.dim, rows)
    }

    /// The intersection `L ∩ M`, via the left kernel of the stacked bases.
    pub fn intersection(&self, other: &Lattice) -> Lattice {
        debug_assert_eq!(self.dim, other.dim);
        let stacked: Vec<Row> = self
            .basis
            .iter()
            .map(|r| r.clone())
            .chain(other.basis.iter().map(|r| r.iter().map(|e| -e).collect()))
            .collect();
        let kernel = left_kernel(&stacked, self.dim);
        let rows: Vec<Row> = kernel
            .iter()
            .map(|k| {
                let mut out = vec![BigInt::zero(); self.dim];
                for (c, row) in k.iter().take(self.basis.len()).zip(self.basis.iter()) {
                    for (o, e) in out.iter_mut().zip(row.iter()) {
                        *o += c * e;
                    }
                }
                out
            })
            .collect();
        Lattice::from_rows(self.dim, rows)
    }

    /// The preimage `{d in Z^k : d * matrix ∈ L}` where `matrix` is k x dim.
    pub fn preimage(&self, matrix: &[Row]) -> Lattice {
        let k = matrix.len();
        let stacked: Vec<Row> = matrix
            .iter()
            .cloned()
            .chain(self.basis.iter().cloned())
            .collect();
        let kernel = left_kernel(&stacked, self.dim);
        let rows: Vec<Row> = kernel.iter().map(|krow| krow[..k].to_vec()).collect();
        Lattice::from_rows(k, rows)
    }

    /// When the lattice has full rank, its index in `Z^dim` (the product of
    /// the pivots); `None` for infinite index.
    pub fn index_in_ambient(&self) -> Option<BigInt> {
        if self.rank() < self.dim {
            return None;
        }
        Some(self.basis.iter().enumerate().map(|(i, r)| r[i].clone()).product())
    }

    /// Canonical residues of `Z^dim` modulo a full-rank lattice, sorted.
    /// Fails when the index exceeds `cap`.
    pub fn residues(&self, cap: usize) -> Option<Vec<Row>> {
        let index = self.index_in_ambient()?;
        if index > BigInt::from(cap) {
            return None;
        }
        // Mixed-radix enumeration over [0, d_i) per coordinate gives a
        // transversal; reducing each vector yields the canonical residues.
        let radices: Vec<BigInt> = (0..self.dim).map(|i| self.basis[i][i].clone()).collect();
        let mut reps: Vec<Row> = Vec::new();
        let mut current = vec![BigInt::zero(); self.dim];
        loop {
            reps.push(self.reduce_mod(&current));
            let mut i = 0;
            loop {
                if i == self.dim {
                    reps.sort();
                    debug_assert_eq!(BigInt::from(reps.len()), index);
                    return Some(reps);
                }
                current[i] += 1;
                if current[i] < radices[i] {
                    break;
                }
                current[i] = BigInt::zero();
                i += 1;
            }
        }
    }
}

/// A nonempty affine coset `offset + L` with the offset in canonical residue
/// form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineLattice {
    pub offset: Row,
    pub lattice: Lattice,
}

impl AffineLattice {
    /// Builds the coset `offset + lattice`, canonicalising the offset.
    pub fn new(offset: Row, lattice: Lattice) -> AffineLattice {
        let offset = lattice.reduce_mod(&offset);
        AffineLattice { offset, lattice }
    }

    pub fn contains(&self, v: &Row) -> bool {
        let diff: Row = v
            .iter()
            .zip(self.offset.iter())
            .map(|(a, b)| a - b)
            .collect();
        self.lattice.contains(&diff)
    }

    /// Intersects two affine cosets; `None` when they are disjoint.
    pub fn intersect(&self, other: &AffineLattice) -> Option<AffineLattice> {
        let dim = self.lattice.dim();
        debug_assert_eq!(dim, other.lattice.dim());
        // Solve offset1 + x*B1 = offset2 + y*B2.
        let rows: Vec<Row> = self
            .lattice
            .basis()
            .iter()
            .cloned()
            .chain(
                other
                    .lattice
                    .basis()
                    .iter()
                    .map(|r| r.iter().map(|e| -e).collect()),
            )
            .collect();
        let target: Row = other
            .offset
            .iter()
            .zip(self.offset.iter())
            .map(|(a, b)| a - b)
            .collect();
        let solution = solve_row_system(&rows, dim, &target)?;
        let mut point = self.offset.clone();
        for (c, row) in solution
            .iter()
            .take(self.lattice.rank())
            .zip(self.lattice.basis().iter())
        {
            for (o, e) in point.iter_mut().zip(row.iter()) {
                *o += c * e;
            }
        }
        Some(AffineLattice::new(
            point,
            self.lattice.intersection(&other.lattice),
        ))
    }
}
