//! Sparse matrix storage and a direct solver for the saddle-point systems.
//!
//! Storage is compressed-row (CSR) with sorted column indices. The solver
//! is a left-looking sparse LU with threshold partial pivoting, applied
//! after a minimum-degree column ordering computed on the column
//! intersection graph, which keeps the fill bounded for every choice of
//! pivot rows. Matrices whose pattern repeats (every Picard iteration of
//! a run) are refactorized over the frozen symbolic structure. There are
//! no iterative methods here.

use crate::error::{Error, Result};

const EMPTY: u32 = u32::MAX;

/// Relative pivot magnitude below which the matrix is declared singular.
const SINGULAR_TOL: f64 = 1e-14;

/// Diagonal-preference threshold for pivoting: the diagonal candidate is
/// kept when it is at least this fraction of the largest candidate, which
/// preserves the fill-reducing ordering.
const PIVOT_THRESHOLD: f64 = 0.1;

/// Compressed-row sparse matrix, double precision.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Assemble from triplets; duplicate (row, col) entries are summed in
    /// insertion order. Explicit zeros are kept (they pin the pattern).
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        rows: &[usize],
        cols: &[usize],
        vals: &[f64],
    ) -> Result<SparseMatrix> {
        if rows.len() != cols.len() || rows.len() != vals.len() {
            return Err(Error::DimensionMismatch(format!(
                "triplet arrays of lengths {}, {}, {}",
                rows.len(),
                cols.len(),
                vals.len()
            )));
        }
        for (&r, &c) in rows.iter().zip(cols) {
            if r >= nrows || c >= ncols {
                return Err(Error::IndexOutOfRange(format!(
                    "triplet ({r}, {c}) outside {nrows}x{ncols}"
                )));
            }
        }
        // Stable counting sort by row, then stable sort by column within
        // the row: keeps duplicate summation in insertion order.
        let nnz = rows.len();
        let mut row_counts = vec![0usize; nrows + 1];
        for &r in rows {
            row_counts[r + 1] += 1;
        }
        for i in 0..nrows {
            row_counts[i + 1] += row_counts[i];
        }
        let mut perm = vec![0usize; nnz];
        let mut next = row_counts.clone();
        for (t, &r) in rows.iter().enumerate() {
            perm[next[r]] = t;
            next[r] += 1;
        }

        let mut row_offsets = Vec::with_capacity(nrows + 1);
        let mut col_indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        row_offsets.push(0);
        let mut scratch: Vec<usize> = Vec::new();
        for r in 0..nrows {
            let slice = &mut perm[row_counts[r]..row_counts[r + 1]];
            scratch.clear();
            scratch.extend_from_slice(slice);
            scratch.sort_by_key(|&t| cols[t]); // stable: insertion order among equals
            let mut i = 0;
            while i < scratch.len() {
                let c = cols[scratch[i]];
                let mut v = 0.0;
                while i < scratch.len() && cols[scratch[i]] == c {
                    v += vals[scratch[i]];
                    i += 1;
                }
                col_indices.push(c);
                values.push(v);
            }
            row_offsets.push(col_indices.len());
        }
        Ok(SparseMatrix {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Build directly from CSR arrays (column indices sorted per row).
    pub fn from_csr(
        nrows: usize,
        ncols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> SparseMatrix {
        debug_assert_eq!(row_offsets.len(), nrows + 1);
        debug_assert_eq!(*row_offsets.last().unwrap(), col_indices.len());
        debug_assert_eq!(col_indices.len(), values.len());
        debug_assert!((0..nrows).all(|r| {
            let row = &col_indices[row_offsets[r]..row_offsets[r + 1]];
            row.windows(2).all(|w| w[0] < w[1]) && row.iter().all(|&c| c < ncols)
        }));
        SparseMatrix {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.col_indices.len()
    }

    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let span = self.row_offsets[r]..self.row_offsets[r + 1];
        (&self.col_indices[span.clone()], &self.values[span])
    }

    pub fn row_mut(&mut self, r: usize) -> (&[usize], &mut [f64]) {
        let span = self.row_offsets[r]..self.row_offsets[r + 1];
        (&self.col_indices[span.clone()], &mut self.values[span])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&c) {
            Ok(p) => vals[p],
            Err(_) => 0.0,
        }
    }

    /// y = A x.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols, "matvec dimension mismatch");
        let mut y = vec![0.0; self.nrows];
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            let mut acc = 0.0;
            for (&c, &v) in cols.iter().zip(vals) {
                acc += v * x[c];
            }
            y[r] = acc;
        }
        y
    }

    /// xᵀ A y as a quadratic/bilinear form.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        assert_eq!(x.len(), self.nrows);
        assert_eq!(y.len(), self.ncols);
        let mut acc = 0.0;
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            let mut row_acc = 0.0;
            for (&c, &v) in cols.iter().zip(vals) {
                row_acc += v * y[c];
            }
            acc += x[r] * row_acc;
        }
        acc
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.col_indices {
            counts[c + 1] += 1;
        }
        for i in 0..self.ncols {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols = vec![0usize; self.nnz()];
        let mut vals = vec![0.0; self.nnz()];
        for r in 0..self.nrows {
            let (ci, vi) = self.row(r);
            for (&c, &v) in ci.iter().zip(vi) {
                let p = next[c];
                cols[p] = r;
                vals[p] = v;
                next[c] += 1;
            }
        }
        SparseMatrix {
            nrows: self.ncols,
            ncols: self.nrows,
            row_offsets: counts,
            col_indices: cols,
            values: vals,
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                d[r][c] += v;
            }
        }
        d
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Fill-reducing column ordering for LU with row pivoting.
#[derive(Clone, Debug)]
pub struct ColumnOrdering {
    perm: Vec<usize>,
}

impl ColumnOrdering {
    pub fn identity(n: usize) -> ColumnOrdering {
        ColumnOrdering {
            perm: (0..n).collect(),
        }
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.perm
    }

    /// Minimum-degree ordering on the column intersection graph (rows act
    /// as cliques over their column patterns). This is the right model
    /// for LU with row pivoting: the fill of PAQ = LU is contained in the
    /// Cholesky fill of (AQ)ᵀ(AQ) for every row permutation P, so the
    /// ordering stays effective no matter which pivot rows the
    /// factorization picks — including on saddle-point matrices whose
    /// pressure block has no diagonal at all.
    ///
    /// Uses the generalized-element formulation with exact external
    /// degrees and element absorption.
    pub fn min_degree(a: &SparseMatrix) -> ColumnOrdering {
        let ncols = a.ncols();
        let nrows = a.nrows();

        // Elements: initially one clique per nonempty row.
        let mut elem_cols: Vec<Vec<u32>> = Vec::with_capacity(nrows);
        for r in 0..nrows {
            let (cols, _) = a.row(r);
            if !cols.is_empty() {
                elem_cols.push(cols.iter().map(|&c| c as u32).collect());
            }
        }
        let mut elem_alive = vec![true; elem_cols.len()];
        let mut col_elems: Vec<Vec<u32>> = vec![Vec::new(); ncols];
        for (e, cols) in elem_cols.iter().enumerate() {
            for &c in cols {
                col_elems[c as usize].push(e as u32);
            }
        }

        let mut col_alive = vec![true; ncols];
        let mut member = vec![0u32; ncols]; // marks the current new element
        let mut seen = vec![0u32; ncols]; // per-column scratch for unions
        let mut elem_seen = vec![0u32; elem_cols.len()];
        let mut elem_external = vec![0usize; elem_cols.len()];
        let mut round = 0u32;
        let mut scratch = 0u32;

        // Initial degree of a column: size of the union of its cliques.
        let mut degree = vec![0usize; ncols];
        for c in 0..ncols {
            scratch += 1;
            seen[c] = scratch;
            let mut d = 0;
            for &e in &col_elems[c] {
                for &u in &elem_cols[e as usize] {
                    let u = u as usize;
                    if seen[u] != scratch {
                        seen[u] = scratch;
                        d += 1;
                    }
                }
            }
            degree[c] = d;
        }

        let max_deg = ncols;
        let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); max_deg + 1];
        for c in 0..ncols {
            buckets[degree[c]].push(c as u32);
        }
        let mut cursor = 0usize;
        let mut perm = Vec::with_capacity(ncols);
        let mut new_cols: Vec<u32> = Vec::new();

        for _ in 0..ncols {
            let c = loop {
                while cursor <= max_deg && buckets[cursor].is_empty() {
                    cursor += 1;
                }
                let cand = buckets[cursor].pop().unwrap();
                let cu = cand as usize;
                if col_alive[cu] && degree[cu] == cursor {
                    break cu;
                }
                if col_alive[cu] && degree[cu] < cursor {
                    cursor = degree[cu];
                    buckets[cursor].push(cand);
                }
            };
            col_alive[c] = false;
            perm.push(c);

            // Union of the cliques containing c becomes the new element;
            // the merged cliques die (absorbed).
            round += 1;
            member[c] = round;
            new_cols.clear();
            for &e in &col_elems[c] {
                let eu = e as usize;
                if !elem_alive[eu] {
                    continue;
                }
                for &u in &elem_cols[eu] {
                    let uu = u as usize;
                    if col_alive[uu] && member[uu] != round {
                        member[uu] = round;
                        new_cols.push(u);
                    }
                }
                elem_alive[eu] = false;
            }
            col_elems[c] = Vec::new();

            if new_cols.is_empty() {
                continue;
            }
            let ne = elem_cols.len() as u32;
            elem_cols.push(new_cols.clone());
            elem_alive.push(true);

            // External sizes |e \ new_element| of the elements touching
            // the new columns, computed once per element; zero external
            // size means the clique was absorbed. Element lists are
            // compacted on the way through.
            scratch += 1;
            for &u in &new_cols {
                for &e in &col_elems[u as usize] {
                    let eu = e as usize;
                    if !elem_alive[eu] || elem_seen[eu] == scratch {
                        continue;
                    }
                    elem_seen[eu] = scratch;
                    let cols = &mut elem_cols[eu];
                    cols.retain(|&v| col_alive[v as usize]);
                    let ext = cols
                        .iter()
                        .filter(|&&v| member[v as usize] != round)
                        .count();
                    elem_external[eu] = ext;
                    if ext == 0 {
                        elem_alive[eu] = false; // subset of new element
                    }
                }
            }

            // Approximate external degree (the AMD bound): size of the new
            // element plus the external parts of the column's other
            // cliques.
            let fill_size = new_cols.len() - 1;
            for &u in &new_cols {
                let uu = u as usize;
                let elems = &mut col_elems[uu];
                elems.retain(|&e| elem_alive[e as usize]);
                elems.push(ne);
                let mut d = fill_size;
                for &e in elems.iter() {
                    if e != ne {
                        d += elem_external[e as usize];
                    }
                }
                let d = d.min(ncols - perm.len());
                if d != degree[uu] {
                    degree[uu] = d;
                    buckets[d.min(max_deg)].push(u);
                    if d < cursor {
                        cursor = d;
                    }
                }
            }
            elem_external.resize(elem_cols.len(), 0);
            elem_seen.resize(elem_cols.len(), 0);
        }
        ColumnOrdering { perm }
    }
}

/// Opaque sparse LU factors P A Q = L U with row pivoting.
#[derive(Clone, Debug)]
pub struct LuFactorization {
    n: usize,
    l_colptr: Vec<usize>,
    l_rows: Vec<u32>,
    l_vals: Vec<f64>,
    u_colptr: Vec<usize>,
    u_rows: Vec<u32>,
    u_vals: Vec<f64>,
    /// original row -> pivot position
    pinv: Vec<u32>,
    /// pivot position -> original column
    q: Vec<usize>,
}

/// Factor a square, structurally nonsingular matrix with a fresh
/// minimum-degree ordering.
pub fn lu_factor(a: &SparseMatrix) -> Result<LuFactorization> {
    let order = ColumnOrdering::min_degree(a);
    lu_factor_with_order(a, &order)
}

/// Solve A x = b using precomputed factors.
pub fn solve(f: &LuFactorization, b: &[f64]) -> Result<Vec<f64>> {
    f.solve(b)
}

/// Factor with a caller-supplied column ordering (reused across repeated
/// factorizations of matrices with the same pattern).
pub fn lu_factor_with_order(a: &SparseMatrix, order: &ColumnOrdering) -> Result<LuFactorization> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "LU needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let n = a.nrows();
    assert_eq!(order.perm.len(), n, "ordering size mismatch");
    let amax = a.max_abs();
    if n > 0 && amax == 0.0 {
        return Err(Error::SingularMatrix("all-zero matrix".into()));
    }
    let pivot_floor = SINGULAR_TOL * amax;

    // Column-compressed copy of A.
    let acsc = a.transpose(); // rows of Aᵀ are columns of A

    let lnz_guess = 4 * a.nnz().max(n);
    let mut l_colptr = Vec::with_capacity(n + 1);
    let mut l_rows: Vec<u32> = Vec::with_capacity(lnz_guess);
    let mut l_vals: Vec<f64> = Vec::with_capacity(lnz_guess);
    let mut u_colptr = Vec::with_capacity(n + 1);
    let mut u_rows: Vec<u32> = Vec::with_capacity(lnz_guess);
    let mut u_vals: Vec<f64> = Vec::with_capacity(lnz_guess);
    let mut pinv = vec![EMPTY; n];

    let mut x = vec![0.0f64; n];
    let mut visited = vec![u32::MAX; n];
    let mut topo: Vec<u32> = Vec::with_capacity(n);
    let mut stack: Vec<u32> = Vec::with_capacity(64);
    let mut child_pos: Vec<usize> = Vec::with_capacity(64);

    for k in 0..n {
        l_colptr.push(l_rows.len());
        u_colptr.push(u_rows.len());
        let col = order.perm[k];
        let (acols, avals) = acsc.row(col);

        // Symbolic: depth-first reach of the column pattern through the
        // already-built columns of L, producing a (reverse) topological
        // order in `topo`.
        topo.clear();
        let stamp = k as u32;
        for &i in acols {
            let i = i as u32;
            if visited[i as usize] == stamp {
                continue;
            }
            stack.clear();
            child_pos.clear();
            visited[i as usize] = stamp;
            stack.push(i);
            child_pos.push(0);
            while let Some(&node) = stack.last() {
                let jp = pinv[node as usize];
                let children: &[u32] = if jp == EMPTY {
                    &[]
                } else {
                    let span = l_colptr[jp as usize] + 1
                        ..*l_colptr.get(jp as usize + 1).unwrap_or(&l_rows.len());
                    &l_rows[span]
                };
                let pos = child_pos.last_mut().unwrap();
                let mut advanced = false;
                while *pos < children.len() {
                    let c = children[*pos];
                    *pos += 1;
                    if visited[c as usize] != stamp {
                        visited[c as usize] = stamp;
                        stack.push(c);
                        child_pos.push(0);
                        advanced = true;
                        break;
                    }
                }
                if !advanced {
                    topo.push(node);
                    stack.pop();
                    child_pos.pop();
                }
            }
        }

        // Numeric: scatter A(:, col), then eliminate in topological order.
        for (&i, &v) in acols.iter().zip(avals) {
            x[i] = v;
        }
        for &j in topo.iter().rev() {
            let jp = pinv[j as usize];
            if jp == EMPTY {
                continue;
            }
            let xj = x[j as usize];
            if xj != 0.0 {
                let span = l_colptr[jp as usize] + 1
                    ..*l_colptr.get(jp as usize + 1).unwrap_or(&l_rows.len());
                for (r, lv) in l_rows[span.clone()].iter().zip(&l_vals[span]) {
                    x[*r as usize] -= lv * xj;
                }
            }
        }

        // Pivot: largest candidate among not-yet-pivotal rows, keeping the
        // natural diagonal when it is within PIVOT_THRESHOLD of the best.
        let mut best = -1.0f64;
        let mut ipiv = EMPTY;
        for &i in &topo {
            if pinv[i as usize] == EMPTY {
                let t = x[i as usize].abs();
                if t > best {
                    best = t;
                    ipiv = i;
                }
            }
        }
        if ipiv == EMPTY {
            return Err(Error::SingularMatrix(format!(
                "no pivot candidates in column {col}"
            )));
        }
        if pinv[col] == EMPTY && x[col].abs() >= PIVOT_THRESHOLD * best {
            ipiv = col as u32;
        }
        let pivot = x[ipiv as usize];
        if !pivot.is_finite() {
            return Err(Error::SingularMatrix(format!(
                "non-finite pivot in column {col}"
            )));
        }
        if pivot.abs() <= pivot_floor {
            return Err(Error::SingularMatrix(format!(
                "pivot {pivot:.3e} below threshold in column {col}"
            )));
        }

        // Emit U column k (pivotal rows) and L column k (remaining rows).
        for &i in &topo {
            let iu = i as usize;
            let jp = pinv[iu];
            if jp != EMPTY {
                u_rows.push(jp);
                u_vals.push(x[iu]);
            } else if i != ipiv {
                l_rows.push(i);
                l_vals.push(x[iu] / pivot);
            }
            x[iu] = 0.0;
        }
        u_rows.push(k as u32);
        u_vals.push(pivot);
        pinv[ipiv as usize] = k as u32;
        // Unit diagonal of L, stored first is not possible after the loop
        // above; insert it by swapping into place.
        l_rows.push(ipiv);
        l_vals.push(1.0);
        let start = l_colptr[k];
        let last = l_rows.len() - 1;
        l_rows.swap(start, last);
        l_vals.swap(start, last);
    }
    l_colptr.push(l_rows.len());
    u_colptr.push(u_rows.len());

    // Map L's row indices to pivot positions.
    for r in l_rows.iter_mut() {
        *r = pinv[*r as usize];
    }

    let mut factors = LuFactorization {
        n,
        l_colptr,
        l_rows,
        l_vals,
        u_colptr,
        u_rows,
        u_vals,
        pinv,
        q: order.perm.clone(),
    };
    factors.sort_u_columns();
    Ok(factors)
}

impl LuFactorization {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Renumber the stored U patterns so each column lists its off-diagonal
    /// rows in ascending pivot position with the diagonal last; required
    /// by `refactor`, harmless for `solve`.
    fn sort_u_columns(&mut self) {
        let mut pairs: Vec<(u32, f64)> = Vec::new();
        for k in 0..self.n {
            let span = self.u_colptr[k]..self.u_colptr[k + 1] - 1;
            if span.is_empty() {
                continue;
            }
            pairs.clear();
            pairs.extend(
                self.u_rows[span.clone()]
                    .iter()
                    .copied()
                    .zip(self.u_vals[span.clone()].iter().copied()),
            );
            pairs.sort_unstable_by_key(|&(r, _)| r);
            for (i, &(r, v)) in pairs.iter().enumerate() {
                self.u_rows[span.start + i] = r;
                self.u_vals[span.start + i] = v;
            }
        }
    }

    /// Recompute the numeric factors of a matrix with the same sparsity
    /// pattern as the one originally factored, reusing the symbolic
    /// structure and pivot sequence. Fails (recoverably) when a reused
    /// pivot loses too much magnitude relative to its column, in which
    /// case the caller should factor afresh with pivoting.
    pub fn refactor(&mut self, a: &SparseMatrix) -> Result<()> {
        if a.nrows() != self.n || a.ncols() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "refactor of a {}x{} matrix with factors of size {}",
                a.nrows(),
                a.ncols(),
                self.n
            )));
        }
        let n = self.n;
        let amax = a.max_abs();
        if n > 0 && amax == 0.0 {
            return Err(Error::SingularMatrix("all-zero matrix".into()));
        }
        let pivot_floor = SINGULAR_TOL * amax;
        let acsc = a.transpose();
        let mut x = vec![0.0f64; n];

        for k in 0..n {
            let col = self.q[k];
            let (acols, avals) = acsc.row(col);
            // Scatter directly into pivot-position space.
            for (&i, &v) in acols.iter().zip(avals) {
                x[self.pinv[i] as usize] = v;
            }
            let uspan = self.u_colptr[k]..self.u_colptr[k + 1] - 1;
            let udiag = self.u_colptr[k + 1] - 1;
            for p in uspan.clone() {
                let j = self.u_rows[p] as usize;
                let xj = x[j];
                self.u_vals[p] = xj;
                if xj != 0.0 {
                    let lspan = self.l_colptr[j] + 1..self.l_colptr[j + 1];
                    for (r, lv) in self.l_rows[lspan.clone()].iter().zip(&self.l_vals[lspan]) {
                        x[*r as usize] -= lv * xj;
                    }
                }
            }
            let pivot = x[k];
            let lspan = self.l_colptr[k] + 1..self.l_colptr[k + 1];
            let mut colmax = pivot.abs();
            for &r in &self.l_rows[lspan.clone()] {
                colmax = colmax.max(x[r as usize].abs());
            }
            if !pivot.is_finite()
                || pivot.abs() <= pivot_floor
                || pivot.abs() < PIVOT_THRESHOLD * colmax
            {
                return Err(Error::SingularMatrix(format!(
                    "static pivot {pivot:.3e} unusable in column {col}"
                )));
            }
            self.u_vals[udiag] = pivot;
            x[k] = 0.0;
            for p in lspan {
                let r = self.l_rows[p] as usize;
                self.l_vals[p] = x[r] / pivot;
                x[r] = 0.0;
            }
            for p in uspan {
                x[self.u_rows[p] as usize] = 0.0;
            }
        }
        Ok(())
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "rhs length {} vs system size {}",
                b.len(),
                self.n
            )));
        }
        let n = self.n;
        let mut x = vec![0.0; n];
        for i in 0..n {
            x[self.pinv[i] as usize] = b[i];
        }
        // Forward solve with unit-diagonal L (diagonal stored first).
        for j in 0..n {
            let xj = x[j];
            if xj != 0.0 {
                let span = self.l_colptr[j] + 1..self.l_colptr[j + 1];
                for (r, v) in self.l_rows[span.clone()].iter().zip(&self.l_vals[span]) {
                    x[*r as usize] -= v * xj;
                }
            }
        }
        // Backward solve with U (diagonal stored last).
        for j in (0..n).rev() {
            let span = self.u_colptr[j]..self.u_colptr[j + 1] - 1;
            let diag = self.u_vals[self.u_colptr[j + 1] - 1];
            x[j] /= diag;
            let xj = x[j];
            if xj != 0.0 {
                for (r, v) in self.u_rows[span.clone()].iter().zip(&self.u_vals[span]) {
                    x[*r as usize] -= v * xj;
                }
            }
        }
        // Undo the column permutation.
        let mut out = vec![0.0; n];
        for k in 0..n {
            out[self.q[k]] = x[k];
        }
        Ok(out)
    }

    /// Count of stored factor entries, for diagnostics.
    pub fn factor_nnz(&self) -> usize {
        self.l_rows.len() + self.u_rows.len()
    }
}
