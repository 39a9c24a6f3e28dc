//! Exact submodule arithmetic: canonical spans, membership, sums,
//! intersections, kernels, and deterministic linear solves.
//!
//! Conventions: vectors are rows; a linear map with matrix `A` acts by
//! `v ↦ v·A`, so `A` has one row per source coordinate. Canonical forms are
//! reduced row echelon over the fields and row Hermite normal form over ℤ
//! (pivots positive, entries above a pivot reduced into `[0, pivot)`), which
//! makes submodule equality a plain comparison.

use crate::ring::{Ring, Scalar};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("ring mismatch: {0} vs {1}")]
    RingMismatch(Ring, Ring),
}

/// A row vector with exact entries.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Vector {
    pub ring: Ring,
    pub data: Vec<Scalar>,
}

impl Vector {
    pub fn zero(ring: Ring, len: usize) -> Self {
        Vector {
            ring,
            data: vec![ring.zero(); len],
        }
    }

    pub fn from_i64(ring: Ring, entries: &[i64]) -> Self {
        Vector {
            ring,
            data: entries.iter().map(|&v| ring.from_i64(v)).collect(),
        }
    }

    pub fn unit(ring: Ring, len: usize, pos: usize) -> Self {
        let mut v = Vector::zero(ring, len);
        v.data[pos] = ring.one();
        v
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| self.ring.is_zero(x))
    }

    pub fn add(&self, other: &Vector) -> Vector {
        debug_assert_eq!(self.len(), other.len());
        Vector {
            ring: self.ring,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| self.ring.add(a, b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        debug_assert_eq!(self.len(), other.len());
        Vector {
            ring: self.ring,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| self.ring.sub(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, c: &Scalar) -> Vector {
        Vector {
            ring: self.ring,
            data: self.data.iter().map(|a| self.ring.mul(c, a)).collect(),
        }
    }

    pub fn neg(&self) -> Vector {
        Vector {
            ring: self.ring,
            data: self.data.iter().map(|a| self.ring.neg(a)).collect(),
        }
    }

    /// Indices of nonzero coordinates.
    pub fn support_indices(&self) -> Vec<usize> {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, x)| !self.ring.is_zero(x))
            .map(|(i, _)| i)
            .collect()
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.data.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// A dense row-major matrix with exact entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    pub ring: Ring,
    pub rows: usize,
    pub cols: usize,
    data: Vec<Scalar>,
}

impl Matrix {
    pub fn zero(ring: Ring, rows: usize, cols: usize) -> Self {
        Matrix {
            ring,
            rows,
            cols,
            data: vec![ring.zero(); rows * cols],
        }
    }

    pub fn identity(ring: Ring, n: usize) -> Self {
        let mut m = Matrix::zero(ring, n, n);
        for i in 0..n {
            *m.at_mut(i, i) = ring.one();
        }
        m
    }

    pub fn from_rows(ring: Ring, rows: Vec<Vec<Scalar>>) -> Result<Self, LinalgError> {
        let ncols = rows.first().map_or(0, |r| r.len());
        for r in &rows {
            if r.len() != ncols {
                return Err(LinalgError::DimMismatch {
                    expected: ncols,
                    got: r.len(),
                });
            }
        }
        Ok(Matrix {
            ring,
            rows: rows.len(),
            cols: ncols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_i64_rows(ring: Ring, rows: &[&[i64]]) -> Self {
        let data = rows
            .iter()
            .flat_map(|r| r.iter().map(|&v| ring.from_i64(v)))
            .collect();
        Matrix {
            ring,
            rows: rows.len(),
            cols: rows.first().map_or(0, |r| r.len()),
            data,
        }
    }

    pub fn from_row_vectors(ring: Ring, cols: usize, vs: &[Vector]) -> Self {
        let mut data = Vec::with_capacity(vs.len() * cols);
        for v in vs {
            debug_assert_eq!(v.len(), cols);
            data.extend(v.data.iter().cloned());
        }
        Matrix {
            ring,
            rows: vs.len(),
            cols,
            data,
        }
    }

    pub fn at(&self, r: usize, c: usize) -> &Scalar {
        &self.data[r * self.cols + c]
    }

    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut Scalar {
        &mut self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> Vector {
        Vector {
            ring: self.ring,
            data: self.data[r * self.cols..(r + 1) * self.cols].to_vec(),
        }
    }

    pub fn row_slice(&self, r: usize) -> &[Scalar] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn rows_vec(&self) -> Vec<Vector> {
        (0..self.rows).map(|r| self.row(r)).collect()
    }

    pub fn stack(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        if self.ring != other.ring {
            return Err(LinalgError::RingMismatch(self.ring, other.ring));
        }
        if self.cols != other.cols && self.rows != 0 && other.rows != 0 {
            return Err(LinalgError::DimMismatch {
                expected: self.cols,
                got: other.cols,
            });
        }
        let cols = if self.rows == 0 { other.cols } else { self.cols };
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Ok(Matrix {
            ring: self.ring,
            rows: self.rows + other.rows,
            cols,
            data,
        })
    }

    /// Row-vector application: `v·A`.
    pub fn apply_row(&self, v: &Vector) -> Result<Vector, LinalgError> {
        if v.len() != self.rows {
            return Err(LinalgError::DimMismatch {
                expected: self.rows,
                got: v.len(),
            });
        }
        let ring = self.ring;
        let mut out = vec![ring.zero(); self.cols];
        for (r, coeff) in v.data.iter().enumerate() {
            if ring.is_zero(coeff) {
                continue;
            }
            for c in 0..self.cols {
                let t = ring.mul(coeff, self.at(r, c));
                out[c] = ring.add(&out[c], &t);
            }
        }
        Ok(Vector { ring, data: out })
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimMismatch {
                expected: self.cols,
                got: other.rows,
            });
        }
        let ring = self.ring;
        let mut out = Matrix::zero(ring, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k).clone();
                if ring.is_zero(&a) {
                    continue;
                }
                for j in 0..other.cols {
                    let t = ring.mul(&a, other.at(k, j));
                    let cur = ring.add(out.at(i, j), &t);
                    *out.at_mut(i, j) = cur;
                }
            }
        }
        Ok(out)
    }

    pub fn is_identity(&self) -> bool {
        if self.rows != self.cols {
            return false;
        }
        (0..self.rows).all(|i| {
            (0..self.cols).all(|j| {
                let e = self.at(i, j);
                if i == j {
                    *e == self.ring.one()
                } else {
                    self.ring.is_zero(e)
                }
            })
        })
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// row[dst] += coeff * row[src]
    fn add_multiple(&mut self, dst: usize, src: usize, coeff: &Scalar) {
        let ring = self.ring;
        if ring.is_zero(coeff) {
            return;
        }
        for c in 0..self.cols {
            let t = ring.mul(coeff, self.at(src, c));
            let cur = ring.add(self.at(dst, c), &t);
            *self.at_mut(dst, c) = cur;
        }
    }

    fn scale_row(&mut self, r: usize, coeff: &Scalar) {
        let ring = self.ring;
        for c in 0..self.cols {
            let cur = ring.mul(coeff, self.at(r, c));
            *self.at_mut(r, c) = cur;
        }
    }
}

/// Result of a row reduction: the reduced matrix, the pivot columns of its
/// nonzero rows (in order), and optionally the transform `T` with `T·A = R`.
pub struct Reduction {
    pub reduced: Matrix,
    pub pivots: Vec<usize>,
    pub transform: Option<Matrix>,
}

/// Reduced row echelon form over a field.
pub fn rref(a: &Matrix, want_transform: bool) -> Reduction {
    assert!(a.ring.is_field(), "rref requires a field");
    let ring = a.ring;
    let mut m = a.clone();
    let mut t = want_transform.then(|| Matrix::identity(ring, a.rows));
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..m.cols {
        if row >= m.rows {
            break;
        }
        let Some(p) = (row..m.rows).find(|&r| !ring.is_zero(m.at(r, col))) else {
            continue;
        };
        m.swap_rows(row, p);
        if let Some(t) = t.as_mut() {
            t.swap_rows(row, p);
        }
        let inv = ring.inv(m.at(row, col)).expect("nonzero pivot");
        m.scale_row(row, &inv);
        if let Some(t) = t.as_mut() {
            t.scale_row(row, &inv);
        }
        for r in 0..m.rows {
            if r != row && !ring.is_zero(m.at(r, col)) {
                let coeff = ring.neg(m.at(r, col));
                m.add_multiple(r, row, &coeff);
                if let Some(t) = t.as_mut() {
                    t.add_multiple(r, row, &coeff);
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    Reduction {
        reduced: m,
        pivots,
        transform: t,
    }
}

/// Row Hermite normal form over ℤ: nonzero rows first with strictly
/// increasing positive pivots, entries above each pivot reduced into
/// `[0, pivot)`.
pub fn hnf(a: &Matrix, want_transform: bool) -> Reduction {
    assert_eq!(a.ring, Ring::Integers, "hnf requires the integers");
    let ring = a.ring;
    let mut m = a.clone();
    let mut t = want_transform.then(|| Matrix::identity(ring, a.rows));
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..m.cols {
        if row >= m.rows {
            break;
        }
        // Euclidean elimination below `row` in this column.
        loop {
            let mut best: Option<usize> = None;
            for r in row..m.rows {
                if !ring.is_zero(m.at(r, col)) {
                    let better = match best {
                        None => true,
                        Some(b) => abs_cmp_less(m.at(r, col), m.at(b, col)),
                    };
                    if better {
                        best = Some(r);
                    }
                }
            }
            let Some(b) = best else {
                break;
            };
            m.swap_rows(row, b);
            if let Some(t) = t.as_mut() {
                t.swap_rows(row, b);
            }
            let mut done = true;
            for r in row + 1..m.rows {
                if !ring.is_zero(m.at(r, col)) {
                    let q = int_div_round(m.at(r, col), m.at(row, col));
                    let coeff = ring.neg(&q);
                    m.add_multiple(r, row, &coeff);
                    if let Some(t) = t.as_mut() {
                        t.add_multiple(r, row, &coeff);
                    }
                    if !ring.is_zero(m.at(r, col)) {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if ring.is_zero(m.at(row, col)) {
            continue;
        }
        if is_negative(m.at(row, col)) {
            let minus_one = ring.from_i64(-1);
            m.scale_row(row, &minus_one);
            if let Some(t) = t.as_mut() {
                t.scale_row(row, &minus_one);
            }
        }
        // Reduce entries above the pivot into [0, pivot).
        for r in 0..row {
            let q = int_div_floor(m.at(r, col), m.at(row, col));
            if !ring.is_zero(&q) {
                let coeff = ring.neg(&q);
                m.add_multiple(r, row, &coeff);
                if let Some(t) = t.as_mut() {
                    t.add_multiple(r, row, &coeff);
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    Reduction {
        reduced: m,
        pivots,
        transform: t,
    }
}

fn as_int(s: &Scalar) -> &num::BigInt {
    match s {
        Scalar::Int(x) => x,
        _ => panic!("expected integer scalar"),
    }
}

fn is_negative(s: &Scalar) -> bool {
    use num::Signed;
    as_int(s).is_negative()
}

fn abs_cmp_less(a: &Scalar, b: &Scalar) -> bool {
    use num::Signed;
    as_int(a).abs() < as_int(b).abs()
}

/// Round-to-nearest quotient, for Euclidean size reduction: the remainder of
/// `a - q·b` has magnitude at most |b|/2, which guarantees strict progress.
fn int_div_round(a: &Scalar, b: &Scalar) -> Scalar {
    use num::Signed;
    let (a, b) = (as_int(a), as_int(b));
    let (mut q, r) = num::Integer::div_rem(a, b);
    if r.abs() * 2 > b.abs() {
        if r.is_negative() == b.is_negative() {
            q += 1;
        } else {
            q -= 1;
        }
    }
    Scalar::Int(q)
}

fn int_div_floor(a: &Scalar, b: &Scalar) -> Scalar {
    let (a, b) = (as_int(a), as_int(b));
    Scalar::Int(num::Integer::div_floor(a, b))
}

/// Canonical reduction for the matrix ring: RREF over fields, HNF over ℤ.
pub fn reduce(a: &Matrix, want_transform: bool) -> Reduction {
    if a.ring.is_field() {
        rref(a, want_transform)
    } else {
        hnf(a, want_transform)
    }
}

/// A submodule of a free module `R^ambient`, held in canonical form.
///
/// Two submodules are equal iff their canonical bases are identical, so the
/// derived `PartialEq` is semantic equality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Submodule {
    ring: Ring,
    ambient: usize,
    basis: Matrix,
}

impl Submodule {
    pub fn zero(ring: Ring, ambient: usize) -> Self {
        Submodule {
            ring,
            ambient,
            basis: Matrix::zero(ring, 0, ambient),
        }
    }

    pub fn full(ring: Ring, ambient: usize) -> Self {
        Submodule {
            ring,
            ambient,
            basis: Matrix::identity(ring, ambient),
        }
    }

    /// Canonical span of a generating set.
    pub fn span(ring: Ring, ambient: usize, gens: &[Vector]) -> Result<Self, LinalgError> {
        for g in gens {
            if g.len() != ambient {
                return Err(LinalgError::DimMismatch {
                    expected: ambient,
                    got: g.len(),
                });
            }
            if g.ring != ring {
                return Err(LinalgError::RingMismatch(ring, g.ring));
            }
        }
        let m = Matrix::from_row_vectors(ring, ambient, gens);
        Ok(Self::from_matrix_rows(&m))
    }

    /// Canonical span of the rows of a matrix.
    pub fn from_matrix_rows(m: &Matrix) -> Self {
        let red = reduce(m, false);
        let rank = red.pivots.len();
        let basis = if rank == 0 {
            Matrix::zero(m.ring, 0, m.cols)
        } else {
            let mut rows = Vec::with_capacity(rank);
            for r in 0..rank {
                rows.push(red.reduced.row_slice(r).to_vec());
            }
            Matrix::from_rows(m.ring, rows).expect("canonical rows")
        };
        Submodule {
            ring: m.ring,
            ambient: m.cols,
            basis,
        }
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn rank(&self) -> usize {
        self.basis.rows
    }

    pub fn is_zero(&self) -> bool {
        self.basis.rows == 0
    }

    /// Canonical generators (basis rows).
    pub fn gens(&self) -> Vec<Vector> {
        self.basis.rows_vec()
    }

    pub fn basis_matrix(&self) -> &Matrix {
        &self.basis
    }

    /// Exact membership test.
    pub fn contains(&self, v: &Vector) -> Result<bool, LinalgError> {
        if v.len() != self.ambient {
            return Err(LinalgError::DimMismatch {
                expected: self.ambient,
                got: v.len(),
            });
        }
        Ok(self.reduce_vector(v).is_zero())
    }

    /// Residue of `v` after eliminating against the canonical basis; zero iff
    /// `v` is a member. Over ℤ the elimination respects divisibility.
    fn reduce_vector(&self, v: &Vector) -> Vector {
        let ring = self.ring;
        let mut w = v.clone();
        let pivots: Vec<usize> = (0..self.basis.rows)
            .map(|r| {
                (0..self.ambient)
                    .find(|&c| !ring.is_zero(self.basis.at(r, c)))
                    .expect("canonical basis row is nonzero")
            })
            .collect();
        for (r, &pc) in pivots.iter().enumerate() {
            if ring.is_zero(&w.data[pc]) {
                continue;
            }
            let coeff = if ring.is_field() {
                // canonical pivot is 1
                w.data[pc].clone()
            } else {
                match ring.div_exact(&w.data[pc], self.basis.at(r, pc)) {
                    Some(q) => q,
                    None => continue, // not divisible; residue stays nonzero
                }
            };
            for c in 0..self.ambient {
                let t = ring.mul(&coeff, self.basis.at(r, c));
                w.data[c] = ring.sub(&w.data[c], &t);
            }
        }
        w
    }

    /// Coordinates of `v` over the canonical basis, if `v` is a member.
    pub fn coordinates(&self, v: &Vector) -> Option<Vector> {
        let ring = self.ring;
        let mut w = v.clone();
        let mut coords = vec![ring.zero(); self.basis.rows];
        let pivots: Vec<usize> = (0..self.basis.rows)
            .map(|r| {
                (0..self.ambient)
                    .find(|&c| !ring.is_zero(self.basis.at(r, c)))
                    .expect("nonzero row")
            })
            .collect();
        for (r, &pc) in pivots.iter().enumerate() {
            if ring.is_zero(&w.data[pc]) {
                continue;
            }
            let coeff = if ring.is_field() {
                w.data[pc].clone()
            } else {
                ring.div_exact(&w.data[pc], self.basis.at(r, pc))?
            };
            for c in 0..self.ambient {
                let t = ring.mul(&coeff, self.basis.at(r, c));
                w.data[c] = ring.sub(&w.data[c], &t);
            }
            coords[r] = coeff;
        }
        w.is_zero().then_some(Vector {
            ring,
            data: coords,
        })
    }

    /// `self ⊇ other`.
    pub fn includes(&self, other: &Submodule) -> Result<bool, LinalgError> {
        if self.ambient != other.ambient {
            return Err(LinalgError::DimMismatch {
                expected: self.ambient,
                got: other.ambient,
            });
        }
        for g in other.gens() {
            if !self.contains(&g)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn sum(&self, other: &Submodule) -> Result<Submodule, LinalgError> {
        let stacked = self.basis.stack(&other.basis)?;
        Ok(Submodule::from_matrix_rows(&stacked))
    }

    /// Span of several submodules at once.
    pub fn sum_of(ring: Ring, ambient: usize, parts: &[&Submodule]) -> Submodule {
        let mut rows = Vec::new();
        for p in parts {
            for r in 0..p.basis.rows {
                rows.push(p.basis.row_slice(r).to_vec());
            }
        }
        let m = Matrix::from_rows(ring, rows).expect("uniform widths");
        if m.rows == 0 {
            return Submodule::zero(ring, ambient);
        }
        debug_assert_eq!(m.cols, ambient);
        Submodule::from_matrix_rows(&m)
    }

    /// Intersection with the coordinate subspace `span{e_j : keep(j)}`,
    /// computed from the left kernel of the dropped columns.
    pub fn intersect_coordinates(&self, keep: impl Fn(usize) -> bool) -> Submodule {
        let dropped: Vec<usize> = (0..self.ambient).filter(|&j| !keep(j)).collect();
        if dropped.is_empty() || self.is_zero() {
            return self.clone();
        }
        let mut rows = Vec::with_capacity(self.basis.rows);
        for r in 0..self.basis.rows {
            rows.push(dropped.iter().map(|&j| self.basis.at(r, j).clone()).collect());
        }
        let restricted = Matrix::from_rows(self.ring, rows).expect("uniform widths");
        let ker = left_kernel(&restricted);
        let gens: Vec<Vector> = ker
            .gens()
            .iter()
            .map(|x| self.basis.apply_row(x).expect("basis width"))
            .collect();
        Submodule::span(self.ring, self.ambient, &gens).expect("consistent ambient")
    }

    /// Image of this submodule under the row-convention map `v ↦ v·A`.
    pub fn transformed(&self, a: &Matrix) -> Result<Submodule, LinalgError> {
        let mut gens = Vec::with_capacity(self.basis.rows);
        for g in self.gens() {
            gens.push(a.apply_row(&g)?);
        }
        Submodule::span(self.ring, a.cols, &gens)
    }

    pub fn intersect(&self, other: &Submodule) -> Result<Submodule, LinalgError> {
        if self.ambient != other.ambient {
            return Err(LinalgError::DimMismatch {
                expected: self.ambient,
                got: other.ambient,
            });
        }
        if self.is_zero() || other.is_zero() {
            return Ok(Submodule::zero(self.ring, self.ambient));
        }
        let stacked = self.basis.stack(&other.basis)?;
        let ker = left_kernel(&stacked);
        let mut gens = Vec::with_capacity(ker.rank());
        for z in ker.gens() {
            let first = Vector {
                ring: self.ring,
                data: z.data[..self.basis.rows].to_vec(),
            };
            gens.push(self.basis.apply_row(&first)?);
        }
        Submodule::span(self.ring, self.ambient, &gens)
    }
}

/// Left kernel `{x : x·A = 0}` as a canonical submodule of `R^rows`.
pub fn left_kernel(a: &Matrix) -> Submodule {
    if a.rows == 0 {
        return Submodule::zero(a.ring, 0);
    }
    let red = reduce(a, true);
    let t = red.transform.expect("requested transform");
    let rank = red.pivots.len();
    let mut rows = Vec::new();
    for r in rank..a.rows {
        rows.push(t.row_slice(r).to_vec());
    }
    let m = Matrix::from_rows(a.ring, rows).expect("uniform widths");
    if m.rows == 0 {
        return Submodule::zero(a.ring, a.rows);
    }
    Submodule::from_matrix_rows(&m)
}

/// Deterministic solve of `x·A = t`: the first solution in canonical
/// elimination order, or `None` when `t` is not in the row span of `A`.
pub fn solve_row(a: &Matrix, t: &Vector) -> Result<Option<Vector>, LinalgError> {
    if t.len() != a.cols {
        return Err(LinalgError::DimMismatch {
            expected: a.cols,
            got: t.len(),
        });
    }
    let ring = a.ring;
    if a.rows == 0 {
        return Ok(t.is_zero().then(|| Vector::zero(ring, 0)));
    }
    let red = reduce(a, true);
    let tr = red.transform.expect("requested transform");
    let rank = red.pivots.len();
    let mut w = t.clone();
    let mut y = vec![ring.zero(); a.rows];
    for (r, &pc) in red.pivots.iter().enumerate().take(rank) {
        if ring.is_zero(&w.data[pc]) {
            continue;
        }
        let coeff = if ring.is_field() {
            w.data[pc].clone()
        } else {
            match ring.div_exact(&w.data[pc], red.reduced.at(r, pc)) {
                Some(q) => q,
                None => return Ok(None),
            }
        };
        for c in 0..a.cols {
            let tt = ring.mul(&coeff, red.reduced.at(r, c));
            w.data[c] = ring.sub(&w.data[c], &tt);
        }
        y[r] = coeff;
    }
    if !w.is_zero() {
        return Ok(None);
    }
    let y = Vector { ring, data: y };
    Ok(Some(tr.apply_row(&y)?))
}

/// Write `v = v₁ + v₂` with `vᵢ ∈ Mᵢ`, deterministically, or `None` when
/// `v ∉ M₁ + M₂`.
pub fn express_in_sum(
    v: &Vector,
    m1: &Submodule,
    m2: &Submodule,
) -> Result<Option<(Vector, Vector)>, LinalgError> {
    let parts = express_over_blocks(v, &[m1, m2])?;
    Ok(parts.map(|mut p| {
        let b = p.pop().expect("two parts");
        let a = p.pop().expect("two parts");
        (a, b)
    }))
}

/// Write `v = Σ vᵢ` with `vᵢ` in the i-th block, deterministically; `None`
/// when `v` is not in the sum of the blocks.
pub fn express_over_blocks(
    v: &Vector,
    blocks: &[&Submodule],
) -> Result<Option<Vec<Vector>>, LinalgError> {
    let ring = v.ring;
    let ambient = v.len();
    let mut rows = Vec::new();
    let mut offsets = Vec::with_capacity(blocks.len() + 1);
    offsets.push(0usize);
    for b in blocks {
        if b.ambient() != ambient {
            return Err(LinalgError::DimMismatch {
                expected: ambient,
                got: b.ambient(),
            });
        }
        for g in b.gens() {
            rows.push(g.data);
        }
        offsets.push(rows.len());
    }
    let stacked = Matrix::from_rows(ring, rows)?;
    let stacked = if stacked.rows == 0 {
        Matrix::zero(ring, 0, ambient)
    } else {
        stacked
    };
    let Some(x) = solve_row(&stacked, v)? else {
        return Ok(None);
    };
    let mut parts = Vec::with_capacity(blocks.len());
    for (i, b) in blocks.iter().enumerate() {
        let coeffs = Vector {
            ring,
            data: x.data[offsets[i]..offsets[i + 1]].to_vec(),
        };
        parts.push(b.basis_matrix().apply_row(&coeffs)?);
    }
    Ok(Some(parts))
}

/// Serializable shape of a submodule (canonical generator rows, text scalars).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubmoduleRepr {
    pub ambient: usize,
    pub basis: Vec<Vec<String>>,
}

impl From<&Submodule> for SubmoduleRepr {
    fn from(m: &Submodule) -> Self {
        SubmoduleRepr {
            ambient: m.ambient(),
            basis: m
                .gens()
                .iter()
                .map(|g| g.data.iter().map(|x| x.render()).collect())
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vq(entries: &[i64]) -> Vector {
        Vector::from_i64(Ring::Rationals, entries)
    }

    fn vz(entries: &[i64]) -> Vector {
        Vector::from_i64(Ring::Integers, entries)
    }

    fn vf(p: u64, entries: &[i64]) -> Vector {
        Vector::from_i64(Ring::PrimeField(p), entries)
    }

    #[test]
    fn empty_span_is_zero() {
        let m = Submodule::span(Ring::PrimeField(2), 2, &[]).unwrap();
        assert!(m.is_zero());
        assert_eq!(m.rank(), 0);
        assert!(m.contains(&vf(2, &[0, 0])).unwrap());
    }

    #[test]
    fn full_rank_span_over_f2() {
        let m = Submodule::span(Ring::PrimeField(2), 2, &[vf(2, &[1, 0]), vf(2, &[1, 1])]).unwrap();
        assert_eq!(m.rank(), 2);
        assert_eq!(m, Submodule::full(Ring::PrimeField(2), 2));
    }

    #[test]
    fn hnf_example_over_z() {
        // {(2,0),(0,3),(2,3)} spans the same lattice as {(2,0),(0,3)}.
        let m = Submodule::span(
            Ring::Integers,
            2,
            &[vz(&[2, 0]), vz(&[0, 3]), vz(&[2, 3])],
        )
        .unwrap();
        let expected = Submodule::span(Ring::Integers, 2, &[vz(&[2, 0]), vz(&[0, 3])]).unwrap();
        assert_eq!(m, expected);
        assert_eq!(m.rank(), 2);
        let g = m.gens();
        assert_eq!(g[0], vz(&[2, 0]));
        assert_eq!(g[1], vz(&[0, 3]));
    }

    #[test]
    fn z_lattice_membership_respects_index() {
        let m = Submodule::span(Ring::Integers, 2, &[vz(&[2, 0])]).unwrap();
        assert!(!m.contains(&vz(&[1, 0])).unwrap());
        assert!(m.contains(&vz(&[-4, 0])).unwrap());
    }

    #[test]
    fn kernel_forced_by_dimension() {
        // Left kernel of the 2×1 map (a,b) ↦ a+b over ℚ.
        let a = Matrix::from_i64_rows(Ring::Rationals, &[&[1], &[1]]);
        let k = left_kernel(&a);
        assert_eq!(k.rank(), 1);
        assert!(k.contains(&vq(&[1, -1])).unwrap());
    }

    #[test]
    fn intersection_over_f2_is_zero() {
        let r = Ring::PrimeField(2);
        let m1 = Submodule::span(r, 2, &[vf(2, &[1, 0])]).unwrap();
        let m2 = Submodule::span(r, 2, &[vf(2, &[1, 1])]).unwrap();
        let i = m1.intersect(&m2).unwrap();
        assert!(i.is_zero());
    }

    #[test]
    fn intersection_idempotent() {
        let m = Submodule::span(
            Ring::Rationals,
            3,
            &[vq(&[1, 2, 0]), vq(&[0, 1, 1])],
        )
        .unwrap();
        assert_eq!(m.intersect(&m).unwrap(), m);
    }

    #[test]
    fn express_in_sum_direct() {
        let r = Ring::PrimeField(2);
        let m1 = Submodule::span(r, 2, &[vf(2, &[1, 0])]).unwrap();
        let m2 = Submodule::span(r, 2, &[vf(2, &[0, 1])]).unwrap();
        let (a, b) = express_in_sum(&vf(2, &[1, 1]), &m1, &m2).unwrap().unwrap();
        assert_eq!(a, vf(2, &[1, 0]));
        assert_eq!(b, vf(2, &[0, 1]));
    }

    #[test]
    fn express_in_sum_with_zero_part() {
        let r = Ring::Rationals;
        let m1 = Submodule::span(r, 2, &[vq(&[1, 1])]).unwrap();
        let m2 = Submodule::zero(r, 2);
        let (a, b) = express_in_sum(&vq(&[2, 2]), &m1, &m2).unwrap().unwrap();
        assert_eq!(a, vq(&[2, 2]));
        assert!(b.is_zero());
        assert!(express_in_sum(&vq(&[1, 0]), &m1, &m2).unwrap().is_none());
    }

    #[test]
    fn solve_over_z_requires_divisibility() {
        let a = Matrix::from_i64_rows(Ring::Integers, &[&[2, 0], &[0, 3]]);
        assert!(solve_row(&a, &vz(&[4, 3])).unwrap().is_some());
        assert!(solve_row(&a, &vz(&[1, 0])).unwrap().is_none());
        let x = solve_row(&a, &vz(&[4, -3])).unwrap().unwrap();
        assert_eq!(a.apply_row(&x).unwrap(), vz(&[4, -3]));
    }

    #[test]
    fn modular_laws() {
        let r = Ring::PrimeField(3);
        let m1 = Submodule::span(r, 3, &[vf(3, &[1, 2, 0]), vf(3, &[0, 0, 1])]).unwrap();
        let m2 = Submodule::span(r, 3, &[vf(3, &[1, 1, 1])]).unwrap();
        let s = m1.sum(&m2).unwrap();
        assert!(s.includes(&m1).unwrap());
        assert!(s.includes(&m2).unwrap());
        let i = m1.intersect(&m2).unwrap();
        assert!(m1.includes(&i).unwrap());
        assert!(m2.includes(&i).unwrap());
    }

    #[test]
    fn canonicity_of_produced_submodules() {
        // Re-spanning the canonical generators reproduces the submodule.
        let cases = vec![
            Submodule::span(Ring::Integers, 3, &[vz(&[2, 4, 6]), vz(&[3, 0, 3])]).unwrap(),
            Submodule::span(Ring::Rationals, 3, &[vq(&[1, 2, 3]), vq(&[2, 4, 7])]).unwrap(),
            Submodule::span(Ring::PrimeField(5), 2, &[vf(5, &[2, 1]), vf(5, &[4, 2])]).unwrap(),
        ];
        for m in cases {
            let re = Submodule::span(m.ring(), m.ambient(), &m.gens()).unwrap();
            assert_eq!(re, m);
        }
    }
}
