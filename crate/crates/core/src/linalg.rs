//! Small dense linear algebra: vectors as slices, a row-major matrix, a cyclic
//! Jacobi eigensolver for symmetric matrices and the nullspace / least-squares
//! helpers built on it. Sizes in this crate stay below a few dozen, so nothing
//! here is blocked or vectorised.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `a + s * b`
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = Matrix::zeros(d.len(), d.len());
        for (i, v) in d.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Matrix { rows: r, cols: c, data }
    }

    /// Matrix whose columns are the given vectors (all of length `rows`).
    pub fn from_columns(rows: usize, cols: &[Vec<f64>]) -> Self {
        let mut m = Matrix::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for i in 0..rows {
                m[(i, j)] = c[i];
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `xᵀ M x`
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        dot(x, &self.mul_vec(x))
    }

    pub fn add_scaled(&mut self, other: &Matrix, s: f64) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn symmetrized(&self) -> Matrix {
        let t = self.transpose();
        let mut s = self.clone();
        for (a, b) in s.data.iter_mut().zip(&t.data) {
            *a = 0.5 * (*a + b);
        }
        s
    }

    pub fn frobenius(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|x| x * x).sum())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

impl core::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigen-decomposition of a symmetric matrix: ascending eigenvalues with
/// matching orthonormal eigenvectors stored as the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl SymEigen {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k)
    }
}

/// Cyclic Jacobi on `(M + Mᵀ)/2`.
pub fn sym_eigen(m: &Matrix) -> Result<SymEigen> {
    if !m.is_square() {
        return Err(Error::NonSquare { rows: m.rows, cols: m.cols });
    }
    let n = m.rows;
    let mut a = m.symmetrized();
    let mut v = Matrix::identity(n);
    let scale = a.frobenius();
    if n > 1 && scale > 0.0 {
        for _sweep in 0..100 {
            let mut off = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    off += a[(i, j)] * a[(i, j)];
                }
            }
            if libm::sqrt(off) <= 1e-15 * scale {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    if apq.abs() <= f64::MIN_POSITIVE {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / libm::sqrt(t * t + 1.0);
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s * apk + c * aqk;
                    }
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = c * vkp - s * vkq;
                        v[(k, q)] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            vectors[(k, new)] = v[(k, old)];
        }
    }
    Ok(SymEigen { values, vectors })
}

/// Singular values of `a` (descending), from the eigenvalues of the smaller Gram matrix.
pub fn singular_values(a: &Matrix) -> Vec<f64> {
    let gram = if a.rows <= a.cols { a.mul(&a.transpose()) } else { a.transpose().mul(a) };
    let eig = sym_eigen(&gram).expect("gram matrix is square");
    let mut s: Vec<f64> = eig.values.iter().map(|l| libm::sqrt(l.max(0.0))).collect();
    s.reverse();
    s
}

/// Orthonormal basis (as column vectors) of `{w : a w = 0}`. A singular value
/// counts as zero when it is at most `rel_tol` times the largest one.
pub fn nullspace(a: &Matrix, rel_tol: f64) -> Vec<Vec<f64>> {
    let n = a.cols;
    if a.rows == 0 {
        return (0..n).map(|j| unit(n, j)).collect();
    }
    let gram = a.transpose().mul(a);
    let eig = sym_eigen(&gram).expect("gram matrix is square");
    let top = eig.values.last().copied().unwrap_or(0.0).max(0.0);
    let cut = gram_cut(top, rel_tol);
    (0..n).filter(|&k| top == 0.0 || eig.values[k] <= cut).map(|k| eig.vector(k)).collect()
}

/// Roundoff in the Gram eigenvalues is about `ε·λ_max`, so singular values
/// below roughly `1e-7·σ_max` cannot be told apart from zero.
const GRAM_FLOOR: f64 = 64.0 * f64::EPSILON;

fn gram_cut(top: f64, rel_tol: f64) -> f64 {
    (rel_tol * rel_tol).max(GRAM_FLOOR) * top
}

/// Numerical rank from singular values with a relative threshold.
pub fn rank(a: &Matrix, rel_tol: f64) -> usize {
    if a.rows == 0 || a.cols == 0 {
        return 0;
    }
    let s = singular_values(a);
    let smax = s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    let cut = gram_cut(smax * smax, rel_tol);
    s.iter().filter(|&&v| v * v > cut).count()
}

/// Minimum-norm least-squares solution of `a x = b` through the pseudo-inverse
/// of `aᵀa`. Returns the solution and the residual norm.
pub fn lstsq(a: &Matrix, b: &[f64], rel_tol: f64) -> (Vec<f64>, f64) {
    let n = a.cols;
    if n == 0 {
        return (Vec::new(), norm(b));
    }
    let gram = a.transpose().mul(a);
    let rhs = a.transpose().mul_vec(b);
    let eig = sym_eigen(&gram).expect("gram matrix is square");
    let top = eig.values.last().copied().unwrap_or(0.0).max(0.0);
    let mut x = vec![0.0; n];
    for k in 0..n {
        let l = eig.values[k];
        if top == 0.0 || l <= rel_tol * rel_tol * top {
            continue;
        }
        let q = eig.vector(k);
        let coef = dot(&q, &rhs) / l;
        for i in 0..n {
            x[i] += coef * q[i];
        }
    }
    let r = sub(&a.mul_vec(&x), b);
    (x, norm(&r))
}

/// Rank by modified Gram–Schmidt on the rows, with a relative threshold against
/// the largest row norm. Independent of the SVD path above.
pub fn rank_gram_schmidt(rows: &[Vec<f64>], rel_tol: f64) -> (usize, Option<Vec<f64>>) {
    let scale = rows.iter().map(|r| norm(r)).fold(0.0, f64::max);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    // coefficients expressing each reduced row through the original rows
    let mut combos: Vec<Vec<f64>> = Vec::new();
    let k = rows.len();
    for (i, r) in rows.iter().enumerate() {
        let mut w = r.clone();
        let mut c = vec![0.0; k];
        c[i] = 1.0;
        for (b, bc) in basis.iter().zip(&combos) {
            let proj = dot(&w, b);
            w = axpy(&w, -proj, b);
            c = axpy(&c, -proj, bc);
        }
        let nw = norm(&w);
        if scale == 0.0 || nw <= rel_tol * scale {
            // r depends on the previous rows; c is a dependency witness
            return (basis.len(), Some(c));
        }
        basis.push(scale_vec(&w, 1.0 / nw));
        combos.push(scale_vec(&c, 1.0 / nw));
    }
    (basis.len(), None)
}

fn scale_vec(a: &[f64], s: f64) -> Vec<f64> {
    scale(a, s)
}

pub fn unit(n: usize, j: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[j] = 1.0;
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_of_diagonal_sorted() {
        let e = sym_eigen(&Matrix::diag(&[3.0, -1.0, 2.0])).unwrap();
        assert_eq!(e.values, vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn eigen_reconstructs_small_matrix() {
        let m = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let e = sym_eigen(&m).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn nullspace_of_single_row() {
        let a = Matrix::from_rows(&[vec![1.0, 0.0]]);
        let ns = nullspace(&a, 1e-10);
        assert_eq!(ns.len(), 1);
        assert!(ns[0][0].abs() < 1e-14);
        assert!((ns[0][1].abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn lstsq_solves_consistent_system() {
        let a = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 2.0], vec![1.0, 1.0]]);
        let (x, r) = lstsq(&a, &[1.0, 4.0, 3.0], 1e-12);
        assert!(r < 1e-12);
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn gram_schmidt_finds_dependency() {
        let (r, dep) = rank_gram_schmidt(&[vec![1.0, 0.0], vec![-2.0, 0.0]], 1e-10);
        assert_eq!(r, 1);
        let c = dep.unwrap();
        // c0 * (1,0) + c1 * (-2,0) = 0
        assert!((c[0] - 2.0 * c[1]).abs() < 1e-12);
    }

    #[test]
    fn non_square_rejected() {
        assert!(matches!(sym_eigen(&Matrix::zeros(2, 3)), Err(Error::NonSquare { .. })));
    }
}
