//! Sparse LU factorization of the simplex basis with product-form updates.
//!
//! Columns are factorized left-looking (one sparse triangular solve per
//! column) in ascending order of their nonzero count, with partial pivoting
//! on the unpivoted rows. Basis changes between refactorizations are kept as
//! a file of eta columns.

/// A sparse column: (row, value) pairs.
pub type SparseCol = Vec<(usize, f64)>;

const SINGULAR_TOL: f64 = 1e-11;
const DROP_TOL: f64 = 1e-14;

#[derive(Debug, Clone)]
struct Eta {
    /// Basis position replaced.
    pos: usize,
    pivot: f64,
    /// Other nonzeros of the entering column in basis-position space.
    others: Vec<(usize, f64)>,
}

#[derive(Debug, Clone)]
pub struct BasisFactor {
    m: usize,
    /// Basis position factorized at step k.
    col_order: Vec<usize>,
    /// Row pivoted at step k.
    pivot_row: Vec<usize>,
    /// Strictly-lower part of L per step, in row space.
    l_cols: Vec<Vec<(usize, f64)>>,
    /// Strictly-upper part of U per step, indexed by earlier step.
    u_cols: Vec<Vec<(usize, f64)>>,
    u_diag: Vec<f64>,
    etas: Vec<Eta>,
    eta_nnz: usize,
    /// Nonzeros of L and U plus the diagonal.
    factor_nnz: usize,
}

/// Outcome of a factorization that hit a (numerically) dependent column:
/// basis position `pos` should be replaced by the logical of `row`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Replacement {
    pub pos: usize,
    pub row: usize,
}

impl BasisFactor {
    /// Factorizes the m×m matrix whose columns are `cols`. Dependent columns
    /// are reported as replacements and factorized as unit columns of the
    /// rows left unpivoted, so the result is always usable.
    pub fn factorize(m: usize, cols: &[SparseCol]) -> (BasisFactor, Vec<Replacement>) {
        debug_assert_eq!(cols.len(), m);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by_key(|&p| (cols[p].len(), p));

        const UNPIVOTED: usize = usize::MAX;
        let mut row_step = vec![UNPIVOTED; m];
        let mut pivot_row = Vec::with_capacity(m);
        let mut l_cols: Vec<Vec<(usize, f64)>> = Vec::with_capacity(m);
        let mut u_cols: Vec<Vec<(usize, f64)>> = Vec::with_capacity(m);
        let mut u_diag = Vec::with_capacity(m);
        let mut col_order = Vec::with_capacity(m);
        let mut failed: Vec<usize> = Vec::new();

        let mut work = vec![0.0; m];
        let mut in_pattern = vec![false; m];
        let mut pattern: Vec<usize> = Vec::new();
        let mut visited = vec![false; m];
        let mut topo: Vec<usize> = Vec::new();
        let mut stack: Vec<(usize, usize)> = Vec::new();

        for &pos in &order {
            // Symbolic: steps reachable from the column's pivoted rows, in
            // topological order.
            topo.clear();
            for &(r, _) in &cols[pos] {
                let s = row_step[r];
                if s != UNPIVOTED && !visited[s] {
                    visited[s] = true;
                    stack.push((s, 0));
                    while let Some(&mut (j, ref mut next)) = stack.last_mut() {
                        let lc = &l_cols[j];
                        let mut descended = false;
                        while *next < lc.len() {
                            let r2 = lc[*next].0;
                            *next += 1;
                            let s2 = row_step[r2];
                            if s2 != UNPIVOTED && !visited[s2] {
                                visited[s2] = true;
                                stack.push((s2, 0));
                                descended = true;
                                break;
                            }
                        }
                        if !descended {
                            topo.push(j);
                            stack.pop();
                        }
                    }
                }
            }

            // Numeric.
            pattern.clear();
            for &(r, v) in &cols[pos] {
                if !in_pattern[r] {
                    in_pattern[r] = true;
                    pattern.push(r);
                }
                work[r] += v;
            }
            for &j in topo.iter().rev() {
                visited[j] = false;
                let xj = work[pivot_row[j]];
                if xj == 0.0 {
                    continue;
                }
                for &(r, l) in &l_cols[j] {
                    if !in_pattern[r] {
                        in_pattern[r] = true;
                        pattern.push(r);
                    }
                    work[r] -= l * xj;
                }
            }

            let mut best: Option<(usize, f64)> = None;
            for &r in &pattern {
                if row_step[r] == UNPIVOTED {
                    let a = work[r].abs();
                    if best.map_or(true, |(br, bv)| a > bv || (a == bv && r < br)) {
                        best = Some((r, a));
                    }
                }
            }

            match best {
                Some((p, a)) if a > SINGULAR_TOL => {
                    let step = pivot_row.len();
                    let piv = work[p];
                    let mut u = Vec::new();
                    let mut l = Vec::new();
                    for &r in &pattern {
                        let v = work[r];
                        if r == p || v.abs() <= DROP_TOL {
                            continue;
                        }
                        if row_step[r] != UNPIVOTED {
                            u.push((row_step[r], v));
                        } else {
                            l.push((r, v / piv));
                        }
                    }
                    row_step[p] = step;
                    pivot_row.push(p);
                    l_cols.push(l);
                    u_cols.push(u);
                    u_diag.push(piv);
                    col_order.push(pos);
                }
                _ => failed.push(pos),
            }

            for &r in &pattern {
                work[r] = 0.0;
                in_pattern[r] = false;
            }
        }

        let mut replacements = Vec::new();
        if !failed.is_empty() {
            let free_rows: Vec<usize> = (0..m).filter(|&r| row_step[r] == UNPIVOTED).collect();
            debug_assert_eq!(free_rows.len(), failed.len());
            for (&pos, &row) in failed.iter().zip(&free_rows) {
                let step = pivot_row.len();
                row_step[row] = step;
                pivot_row.push(row);
                l_cols.push(Vec::new());
                u_cols.push(Vec::new());
                // Logical columns carry -1 on their row.
                u_diag.push(-1.0);
                col_order.push(pos);
                replacements.push(Replacement { pos, row });
            }
        }

        let factor_nnz = m + l_cols.iter().map(Vec::len).sum::<usize>() + u_cols.iter().map(Vec::len).sum::<usize>();
        (
            BasisFactor {
                m,
                col_order,
                pivot_row,
                l_cols,
                u_cols,
                u_diag,
                etas: Vec::new(),
                eta_nnz: 0,
                factor_nnz,
            },
            replacements,
        )
    }

    /// True once the eta file costs more to apply than the factors
    /// themselves; refactorizing is then cheaper than carrying on.
    pub fn should_refactor(&self, max_updates: usize) -> bool {
        self.etas.len() >= max_updates || self.eta_nnz > 2 * self.factor_nnz
    }

    /// Solves B z = b in place; `b` is in row space on entry and holds `z`
    /// in basis-position space on return.
    pub fn ftran(&self, b: &mut [f64]) {
        let m = self.m;
        let mut v = vec![0.0; m];
        for j in 0..m {
            let vj = b[self.pivot_row[j]];
            v[j] = vj;
            if vj != 0.0 {
                for &(r, l) in &self.l_cols[j] {
                    b[r] -= l * vj;
                }
            }
        }
        for k in (0..m).rev() {
            let wk = v[k] / self.u_diag[k];
            v[k] = wk;
            if wk != 0.0 {
                for &(j, u) in &self.u_cols[k] {
                    v[j] -= u * wk;
                }
            }
        }
        for k in 0..m {
            b[self.col_order[k]] = v[k];
        }
        for eta in &self.etas {
            let zr = b[eta.pos] / eta.pivot;
            b[eta.pos] = zr;
            if zr != 0.0 {
                for &(i, a) in &eta.others {
                    b[i] -= a * zr;
                }
            }
        }
    }

    /// Solves Bᵀ y = c in place; `c` is in basis-position space on entry and
    /// holds `y` in row space on return.
    pub fn btran(&self, c: &mut [f64]) {
        let m = self.m;
        for eta in self.etas.iter().rev() {
            let mut s = c[eta.pos];
            for &(i, a) in &eta.others {
                s -= a * c[i];
            }
            c[eta.pos] = s / eta.pivot;
        }
        let mut u = vec![0.0; m];
        for k in 0..m {
            let mut s = c[self.col_order[k]];
            for &(j, ujk) in &self.u_cols[k] {
                s -= ujk * u[j];
            }
            u[k] = s / self.u_diag[k];
        }
        for j in (0..m).rev() {
            let mut s = u[j];
            for &(r, l) in &self.l_cols[j] {
                s -= l * c[r];
            }
            c[self.pivot_row[j]] = s;
        }
    }

    /// Records the replacement of basis position `pos` by a column whose
    /// FTRAN image is `alpha`.
    pub fn update(&mut self, pos: usize, alpha: &[f64]) {
        let others: Vec<(usize, f64)> = alpha
            .iter()
            .enumerate()
            .filter(|&(i, &a)| i != pos && a.abs() > DROP_TOL)
            .map(|(i, &a)| (i, a))
            .collect();
        self.eta_nnz += others.len();
        self.etas.push(Eta {
            pos,
            pivot: alpha[pos],
            others,
        });
    }

    #[cfg(test)]
    fn row_of_step(&self, k: usize) -> usize {
        self.pivot_row[k]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dense_mul(cols: &[SparseCol], z: &[f64], m: usize) -> Vec<f64> {
        let mut out = vec![0.0; m];
        for (p, col) in cols.iter().enumerate() {
            for &(r, v) in col {
                out[r] += v * z[p];
            }
        }
        out
    }

    fn dense_mul_t(cols: &[SparseCol], y: &[f64]) -> Vec<f64> {
        cols.iter().map(|col| col.iter().map(|&(r, v)| v * y[r]).sum()).collect()
    }

    #[test]
    fn solves_small_system() {
        // [2 1 0; 0 1 3; 1 0 1]
        let cols: Vec<SparseCol> = vec![vec![(0, 2.0), (2, 1.0)], vec![(0, 1.0), (1, 1.0)], vec![(1, 3.0), (2, 1.0)]];
        let (f, rep) = BasisFactor::factorize(3, &cols);
        assert!(rep.is_empty());
        let b = vec![3.0, 4.0, 2.0];
        let mut z = b.clone();
        f.ftran(&mut z);
        let back = dense_mul(&cols, &z, 3);
        for i in 0..3 {
            assert!((back[i] - b[i]).abs() < 1e-12);
        }
        let mut y = vec![1.0, -2.0, 0.5];
        let c = y.clone();
        f.btran(&mut y);
        let back = dense_mul_t(&cols, &y);
        for i in 0..3 {
            assert!((back[i] - c[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn dependent_column_is_replaced() {
        let cols: Vec<SparseCol> = vec![vec![(0, 1.0), (1, 1.0)], vec![(0, 2.0), (1, 2.0)]];
        let (f, rep) = BasisFactor::factorize(2, &cols);
        assert_eq!(rep.len(), 1);
        assert_eq!(rep[0].pos, 1);
        assert_eq!(f.row_of_step(1), rep[0].row);
    }

    proptest! {
        #[test]
        fn ftran_btran_with_updates(
            seed_vals in proptest::collection::vec(-3.0f64..3.0, 64),
            rhs in proptest::collection::vec(-5.0f64..5.0, 8),
            entering in proptest::collection::vec(-2.0f64..2.0, 8),
        ) {
            let m = 8;
            // Diagonally dominant sparse matrix built from the seed values.
            let mut cols: Vec<SparseCol> = Vec::new();
            for p in 0..m {
                let mut col = vec![(p, 10.0 + seed_vals[p].abs())];
                let q = (p * 3 + 1) % m;
                if q != p {
                    col.push((q, seed_vals[8 + p]));
                }
                let q2 = (p + 5) % m;
                if q2 != p && q2 != q {
                    col.push((q2, seed_vals[16 + p]));
                }
                col.sort_by_key(|e| e.0);
                cols.push(col);
            }
            let (mut f, rep) = BasisFactor::factorize(m, &cols);
            prop_assert!(rep.is_empty());

            // Replace position 2 by a new column.
            let mut newcol: SparseCol = entering.iter().enumerate().map(|(r, &v)| (r, v)).collect();
            newcol[2].1 += 12.0;
            let mut alpha = vec![0.0; m];
            for &(r, v) in &newcol {
                alpha[r] = v;
            }
            f.ftran(&mut alpha);
            prop_assume!(alpha[2].abs() > 1e-3);
            f.update(2, &alpha);
            cols[2] = newcol;

            let mut z = rhs.clone();
            f.ftran(&mut z);
            let back = dense_mul(&cols, &z, m);
            for i in 0..m {
                prop_assert!((back[i] - rhs[i]).abs() < 1e-8);
            }
            let mut y = rhs.clone();
            f.btran(&mut y);
            let back = dense_mul_t(&cols, &y);
            for i in 0..m {
                prop_assert!((back[i] - rhs[i]).abs() < 1e-8);
            }
        }
    }
}
