//! Dense block operators and their LU factorization.

use crate::error::{BemError, Result};
use crate::geom::{Matrix3, Vec3};
use crate::par;
use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::lu::partial_pivoting::{factor, solve};
use faer::perm::PermRef;
use faer::{MatMut, MatRef};

/// Pivots below this fraction of the largest matrix entry are singular.
pub const PIVOT_TOLERANCE: f64 = 1e-13;

/// Column-major `3N × 3N` matrix made of 3×3 blocks; unknown `a` of panel
/// `i` sits at index `3i + a`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    dim: usize,
    data: Vec<f64>,
}

impl DenseOperator {
    pub fn zeros(panels: usize) -> Self {
        let dim = 3 * panels;
        Self { dim, data: vec![0.0; dim * dim] }
    }

    /// Builds the operator from `block(i, j)`, parallel over block columns.
    pub fn from_blocks(panels: usize, block: impl Fn(usize, usize) -> Matrix3 + Sync + Send) -> Self {
        let mut op = Self::zeros(panels);
        op.fill_columns(|j, cols, dim| {
            for i in 0..panels {
                let b = block(i, j);
                for a in 0..3 {
                    for c in 0..3 {
                        cols[c * dim + 3 * i + a] = b.0[a][c];
                    }
                }
            }
        });
        op
    }

    /// Hands each group of three columns (one source panel) to `fill`,
    /// together with the column length.
    pub fn fill_columns(&mut self, fill: impl Fn(usize, &mut [f64], usize) + Sync + Send) {
        let dim = self.dim;
        if dim == 0 {
            return;
        }
        par::for_each_chunk(&mut self.data, 3 * dim, |j, cols| fill(j, cols, dim));
    }

    pub fn panels(&self) -> usize {
        self.dim / 3
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[col * self.dim + row]
    }

    pub fn block(&self, i: usize, j: usize) -> Matrix3 {
        let mut b = [[0.0; 3]; 3];
        for (a, row) in b.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = self.get(3 * i + a, 3 * j + c);
            }
        }
        Matrix3(b)
    }

    pub fn set_block(&mut self, i: usize, j: usize, b: &Matrix3) {
        for a in 0..3 {
            for c in 0..3 {
                self.data[(3 * j + c) * self.dim + 3 * i + a] = b.0[a][c];
            }
        }
    }

    /// `self += s · other`
    pub fn add_scaled(&mut self, s: f64, other: &DenseOperator) {
        assert_eq!(self.dim, other.dim);
        self.data.iter_mut().zip(&other.data).for_each(|(a, b)| *a += s * b);
    }

    /// Adds `s` to every diagonal entry.
    pub fn add_identity(&mut self, s: f64) {
        for k in 0..self.dim {
            self.data[k * self.dim + k] += s;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim);
        let mut y = vec![0.0; self.dim];
        for (col, &xc) in self.data.chunks_exact(self.dim).zip(x) {
            if xc != 0.0 {
                y.iter_mut().zip(col).for_each(|(yi, a)| *yi += a * xc);
            }
        }
        y
    }

    /// Block-vector form of [`DenseOperator::matvec`].
    pub fn apply(&self, x: &[Vec3]) -> Vec<Vec3> {
        from_flat(&self.matvec(&flatten(x)))
    }

    fn as_mat(&self) -> MatRef<'_, f64> {
        MatRef::from_column_major_slice(&self.data, self.dim, self.dim)
    }

    /// Partial-pivot LU in place, consuming the storage.
    pub fn factor(mut self) -> Result<LuFactors> {
        let n = self.dim;
        let norm = self.max_abs();
        if !self.is_finite() {
            return Err(BemError::InvalidArgument("matrix has non-finite entries".into()));
        }
        let mut perm = vec![0usize; n];
        let mut perm_inv = vec![0usize; n];
        let par = par::faer_par();
        {
            let mut buf = MemBuffer::new(factor::lu_in_place_scratch::<usize, f64>(
                n,
                n,
                par,
                Default::default(),
            ));
            let stack = MemStack::new(&mut buf);
            let a = MatMut::from_column_major_slice_mut(&mut self.data, n, n);
            factor::lu_in_place(a, &mut perm, &mut perm_inv, par, stack, Default::default());
        }
        for k in 0..n {
            let pivot = self.data[k * n + k];
            if !(pivot.abs() >= PIVOT_TOLERANCE * norm) {
                return Err(BemError::SingularSystem { row: k, pivot, norm });
            }
        }
        Ok(LuFactors { n, lu: self.data, perm, perm_inv })
    }
}

/// LU factors of a [`DenseOperator`].
#[derive(Debug, Clone)]
pub struct LuFactors {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    perm_inv: Vec<usize>,
}

impl LuFactors {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves for `ncols` right-hand sides stored column-major in `rhs`.
    pub fn solve_in_place(&self, rhs: &mut [f64], ncols: usize) {
        let n = self.n;
        assert_eq!(rhs.len(), n * ncols);
        if n == 0 {
            return;
        }
        let par = par::faer_par();
        let lu = MatRef::from_column_major_slice(&self.lu, n, n);
        let perm = PermRef::new_checked(&self.perm, &self.perm_inv, n);
        let mut buf = MemBuffer::new(solve::solve_in_place_scratch::<usize, f64>(n, ncols, par));
        let stack = MemStack::new(&mut buf);
        let b = MatMut::from_column_major_slice_mut(rhs, n, ncols);
        solve::solve_in_place(lu, lu, perm, b, par, stack);
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x, 1);
        x
    }
}

/// Relative residual `‖A x − b‖₂ / ‖b‖₂` (0 when `b = 0` and `x = 0`).
pub fn relative_residual(a: &DenseOperator, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.matvec(x);
    let r: f64 = ax.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if nb == 0.0 {
        r
    } else {
        r / nb
    }
}

pub fn flatten(v: &[Vec3]) -> Vec<f64> {
    v.iter().flat_map(|x| x.0).collect()
}

pub fn from_flat(v: &[f64]) -> Vec<Vec3> {
    v.chunks_exact(3).map(|c| Vec3([c[0], c[1], c[2]])).collect()
}

impl DenseOperator {
    /// Read-only faer view, for callers that want library routines.
    pub fn view(&self) -> MatRef<'_, f64> {
        self.as_mat()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn solve_random_system() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let panels = 20;
        let vals: Vec<f64> = (0..(60 * 60)).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let op = DenseOperator::from_blocks(panels, |i, j| {
            let mut b = [[0.0; 3]; 3];
            for a in 0..3 {
                for c in 0..3 {
                    b[a][c] = vals[(3 * j + c) * 60 + 3 * i + a] + if 3 * i + a == 3 * j + c { 5.0 } else { 0.0 };
                }
            }
            Matrix3(b)
        });
        let x: Vec<f64> = (0..60).map(|k| (k as f64).sin()).collect();
        let b = op.matvec(&x);
        let lu = op.clone().factor().unwrap();
        let y = lu.solve(&b);
        assert!(y.iter().zip(&x).all(|(p, q)| (p - q).abs() < 1e-12));
        assert!(relative_residual(&op, &y, &b) < 1e-14);
    }

    #[test]
    fn block_layout() {
        let mut op = DenseOperator::zeros(2);
        let m = Matrix3([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 9.0]]);
        op.set_block(1, 0, &m);
        assert_eq!(op.block(1, 0), m);
        assert_eq!(op.get(3, 1), 2.0);
        assert_eq!(op.get(4, 0), 4.0);
        assert_eq!(op.view().nrows(), 6);
    }

    #[test]
    fn singular_detected() {
        let op = DenseOperator::from_blocks(2, |i, _| if i == 0 { Matrix3::IDENTITY } else { Matrix3::IDENTITY });
        assert!(matches!(op.factor(), Err(BemError::SingularSystem { .. })));
    }
}
