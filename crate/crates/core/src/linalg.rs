//! Dense matrices, Cholesky/LU, Jacobi eigenvalues and PSD tests.

use std::ops::{Index, IndexMut};

use crate::scalar::{BigScalar, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn filled(rows: usize, cols: usize, v: T) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![v; rows * cols],
        }
    }

    pub fn identity(n: usize, like: &T) -> Self {
        let mut m = Self::filled(n, n, like.zero_like());
        for i in 0..n {
            m[(i, i)] = like.one_like();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix");
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
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

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self[(i, j)].clone());
            }
        }
        Matrix {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in product");
        let zero = self.zero_elem(rhs);
        let mut out = Self::filled(self.rows, rhs.cols, zero);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let t = out[(i, j)].clone() + &(a.clone() * &rhs[(k, j)]);
                    out[(i, j)] = t;
                }
            }
        }
        out
    }

    fn zero_elem(&self, other: &Self) -> T {
        self.data
            .first()
            .or(other.data.first())
            .map(|x| x.zero_like())
            .expect("empty matrices carry no scalar context")
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a.clone() + b)
                .collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a.clone() - b)
                .collect(),
        }
    }

    pub fn scale(&self, c: &T) -> Self {
        self.map(|a| a.clone() * c)
    }

    /// `self += c·other`.
    pub fn axpy(&mut self, c: &T, other: &Self) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            if b.is_zero() {
                continue;
            }
            *a = a.clone() + &(c.clone() * b);
        }
    }

    /// `(A + Aᵀ)/2`.
    pub fn symmetrize(&self) -> Self {
        let n = self.rows;
        let mut out = self.clone();
        if n == 0 {
            return out;
        }
        let half = self.data[0].one_like() / &self.data[0].from_i64_like(2);
        for i in 0..n {
            for j in (i + 1)..n {
                let v = (self[(i, j)].clone() + &self[(j, i)]) * &half;
                out[(i, j)] = v.clone();
                out[(j, i)] = v;
            }
        }
        out
    }

    /// Frobenius inner product `Σ a_ij b_ij` (equal to `tr(A B)` for symmetric `A`).
    pub fn frob(&self, rhs: &Self) -> T {
        let zero = self.zero_elem(rhs);
        self.data
            .iter()
            .zip(&rhs.data)
            .filter(|(a, _)| !a.is_zero())
            .fold(zero, |acc, (a, b)| acc + &(a.clone() * b))
    }

    pub fn trace(&self) -> T {
        let zero = self.zero_elem(self);
        (0..self.rows.min(self.cols)).fold(zero, |acc, i| acc + &self[(i, i)])
    }

    pub fn max_abs(&self) -> Option<T> {
        let mut it = self.data.iter();
        let mut m = it.next()?.abs();
        for v in it {
            let a = v.abs();
            if a > m {
                m = a;
            }
        }
        Some(m)
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn mat_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let row = self.row(i);
                let zero = v
                    .first()
                    .map(|x| x.zero_like())
                    .unwrap_or_else(|| self.zero_elem(self));
                row.iter()
                    .zip(v)
                    .fold(zero, |acc, (a, b)| acc + &(a.clone() * b))
            })
            .collect()
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Exact PSD test by symmetric pivoted elimination. Only meaningful for
/// exact scalar types; for floats it tests the rounded matrix.
pub fn is_psd_exact<T: Scalar>(m: &Matrix<T>) -> bool {
    if !m.is_symmetric() {
        return false;
    }
    let n = m.rows();
    if n == 0 {
        return true;
    }
    let mut a = m.clone();
    let mut alive: Vec<usize> = (0..n).collect();
    while !alive.is_empty() {
        let mut pivot = None;
        for &i in &alive {
            let d = &a[(i, i)];
            if d.is_negative() {
                return false;
            }
            if d.is_zero() {
                if alive.iter().any(|&j| j != i && !a[(i, j)].is_zero()) {
                    return false;
                }
            } else if pivot.is_none() {
                pivot = Some(i);
            }
        }
        let Some(k) = pivot else {
            return true;
        };
        alive.retain(|&i| i != k);
        let d = a[(k, k)].clone();
        for &i in &alive {
            let f = a[(i, k)].clone() / &d;
            if f.is_zero() {
                continue;
            }
            for &j in &alive {
                let t = a[(i, j)].clone() - &(f.clone() * &a[(k, j)]);
                a[(i, j)] = t;
            }
        }
    }
    true
}

fn prec_of(m: &Matrix<BigScalar>) -> u32 {
    m.data.iter().map(BigScalar::prec).max().unwrap_or(crate::scalar::DEFAULT_PREC)
}

impl Matrix<BigScalar> {
    pub fn zeros(rows: usize, cols: usize, prec: u32) -> Self {
        Self::filled(rows, cols, BigScalar::zero(prec))
    }

    pub fn eye(n: usize, prec: u32) -> Self {
        Self::identity(n, &BigScalar::one(prec))
    }

    pub fn prec(&self) -> u32 {
        prec_of(self)
    }

    pub fn frob_norm(&self) -> BigScalar {
        let p = self.prec();
        self.data
            .iter()
            .fold(BigScalar::zero(p), |acc, a| acc + &(a * a))
            .sqrt()
    }

    /// Lower-triangular `L` with `L Lᵀ = self`, or `None` if a pivot is not
    /// positive.
    pub fn cholesky(&self) -> Option<Matrix<BigScalar>> {
        assert!(self.is_square());
        let n = self.rows;
        let p = self.prec();
        let mut l = Matrix::zeros(n, n, p);
        for j in 0..n {
            let mut d = self[(j, j)].clone();
            for k in 0..j {
                d -= &l[(j, k)] * &l[(j, k)];
            }
            if d.signum_i() <= 0 || !d.is_finite() {
                return None;
            }
            let dj = d.sqrt();
            for i in (j + 1)..n {
                let mut s = self[(i, j)].clone();
                for k in 0..j {
                    s -= &l[(i, k)] * &l[(j, k)];
                }
                l[(i, j)] = s / &dj;
            }
            l[(j, j)] = dj;
        }
        Some(l)
    }

    /// Solves `L Lᵀ x = b` given the Cholesky factor `L`.
    pub fn cholesky_solve(l: &Matrix<BigScalar>, b: &[BigScalar]) -> Vec<BigScalar> {
        let y = forward_sub(l, b);
        backward_sub_transposed(l, &y)
    }

    /// `L⁻¹` for a lower-triangular `L`.
    pub fn lower_inverse(l: &Matrix<BigScalar>) -> Matrix<BigScalar> {
        let n = l.rows;
        let p = l.prec();
        let mut inv = Matrix::zeros(n, n, p);
        for c in 0..n {
            let mut e = vec![BigScalar::zero(p); n];
            e[c] = BigScalar::one(p);
            let x = forward_sub(l, &e);
            for (r, v) in x.into_iter().enumerate() {
                inv[(r, c)] = v;
            }
        }
        inv
    }

    /// Inverse of an SPD matrix from its Cholesky factor.
    pub fn spd_inverse(l: &Matrix<BigScalar>) -> Matrix<BigScalar> {
        let li = Self::lower_inverse(l);
        li.transpose().mul(&li)
    }

    /// Gaussian elimination with partial pivoting. `None` when singular.
    pub fn lu_solve(&self, b: &[BigScalar]) -> Option<Vec<BigScalar>> {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut x: Vec<BigScalar> = b.to_vec();
        for col in 0..n {
            let piv = (col..n).max_by(|&i, &j| {
                a[(i, col)]
                    .abs()
                    .partial_cmp(&a[(j, col)].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })?;
            if a[(piv, col)].is_zero() {
                return None;
            }
            if piv != col {
                for j in 0..n {
                    let t = a[(col, j)].clone();
                    a[(col, j)] = a[(piv, j)].clone();
                    a[(piv, j)] = t;
                }
                x.swap(col, piv);
            }
            for i in (col + 1)..n {
                let f = &a[(i, col)] / &a[(col, col)];
                if f.is_zero() {
                    continue;
                }
                for j in col..n {
                    let t = &f * &a[(col, j)];
                    a[(i, j)] -= t;
                }
                let t = &f * &x[col];
                x[i] -= t;
            }
        }
        for i in (0..n).rev() {
            let mut s = x[i].clone();
            for j in (i + 1)..n {
                s -= &a[(i, j)] * &x[j];
            }
            x[i] = s / &a[(i, i)];
        }
        Some(x)
    }

    /// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, in
    /// ascending order.
    pub fn sym_eigenvalues(&self) -> Vec<BigScalar> {
        assert!(self.is_square());
        let n = self.rows;
        if n == 0 {
            return Vec::new();
        }
        let p = self.prec();
        let mut a = self.symmetrize();
        let tiny = BigScalar::pow2(-(2 * p as i32), p);
        let two = BigScalar::from_i64(2, p);
        let one = BigScalar::one(p);
        for _sweep in 0..100 {
            let mut off = BigScalar::zero(p);
            let mut diag = BigScalar::zero(p);
            for i in 0..n {
                diag += &a[(i, i)] * &a[(i, i)];
                for j in (i + 1)..n {
                    off += &a[(i, j)] * &a[(i, j)];
                }
            }
            let thresh = (&diag + &tiny) * BigScalar::ulp_rel(p) * BigScalar::ulp_rel(p);
            if off <= thresh {
                break;
            }
            for pi in 0..n {
                for qi in (pi + 1)..n {
                    let apq = a[(pi, qi)].clone();
                    if apq.is_zero() {
                        continue;
                    }
                    let theta = (&a[(qi, qi)] - &a[(pi, pi)]) / (&two * &apq);
                    let sgn = if theta.signum_i() < 0 { -one.clone() } else { one.clone() };
                    let t = sgn / (theta.abs() + (&theta * &theta + &one).sqrt());
                    let c = (&t * &t + &one).sqrt().recip();
                    let s = &t * &c;
                    for k in 0..n {
                        let akp = a[(k, pi)].clone();
                        let akq = a[(k, qi)].clone();
                        a[(k, pi)] = &c * &akp - &s * &akq;
                        a[(k, qi)] = &s * &akp + &c * &akq;
                    }
                    for k in 0..n {
                        let apk = a[(pi, k)].clone();
                        let aqk = a[(qi, k)].clone();
                        a[(pi, k)] = &c * &apk - &s * &aqk;
                        a[(qi, k)] = &s * &apk + &c * &aqk;
                    }
                }
            }
        }
        let mut ev: Vec<BigScalar> = (0..n).map(|i| a[(i, i)].clone()).collect();
        ev.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
        ev
    }

    pub fn min_eigenvalue(&self) -> BigScalar {
        self.sym_eigenvalues()
            .into_iter()
            .next()
            .unwrap_or_else(|| BigScalar::zero(crate::scalar::DEFAULT_PREC))
    }

    /// Certified-style lower bound on the smallest eigenvalue: the Jacobi
    /// estimate is pushed down until a shifted Cholesky succeeds, then a
    /// rounding allowance is subtracted.
    pub fn psd_check(&self) -> BigScalar {
        let n = self.rows;
        let p = self.prec();
        if n == 0 {
            return BigScalar::zero(p);
        }
        let sym = self.symmetrize();
        let est = sym.min_eigenvalue();
        let norm = sym.frob_norm();
        let u = BigScalar::ulp_rel(p);
        let slack = &norm * &u * BigScalar::from_i64(8 * (n as i64 + 1), p);
        let mut delta = slack.clone().max(est.abs() * BigScalar::pow2(-(p as i32) / 2, p));
        if delta.is_zero() {
            delta = BigScalar::pow2(-(p as i32), p);
        }
        for _ in 0..400 {
            let shift = &est - &delta;
            let mut shifted = sym.clone();
            for i in 0..n {
                shifted[(i, i)] -= &shift;
            }
            if shifted.cholesky().is_some() {
                return shift - &slack;
            }
            delta = delta.mul_i64(2);
        }
        est - &norm - &slack
    }

    /// Largest `α` with `X + α·dX ⪰ 0`, given the Cholesky factor of `X`.
    /// `None` means every step length is admissible.
    pub fn max_step(l_x: &Matrix<BigScalar>, dx: &Matrix<BigScalar>) -> Option<BigScalar> {
        let li = Self::lower_inverse(l_x);
        let w = li.mul(dx).mul(&li.transpose()).symmetrize();
        let lmin = w.min_eigenvalue();
        if lmin.signum_i() >= 0 {
            None
        } else {
            Some((-lmin).recip())
        }
    }
}

fn forward_sub(l: &Matrix<BigScalar>, b: &[BigScalar]) -> Vec<BigScalar> {
    let n = l.rows;
    let mut y: Vec<BigScalar> = Vec::with_capacity(n);
    for i in 0..n {
        let mut s = b[i].clone();
        for (k, yk) in y.iter().enumerate() {
            s -= &l[(i, k)] * yk;
        }
        y.push(s / &l[(i, i)]);
    }
    y
}

fn backward_sub_transposed(l: &Matrix<BigScalar>, y: &[BigScalar]) -> Vec<BigScalar> {
    let n = l.rows;
    let mut x = y.to_vec();
    for i in (0..n).rev() {
        let mut s = x[i].clone();
        for k in (i + 1)..n {
            s -= &l[(k, i)] * &x[k];
        }
        x[i] = s / &l[(i, i)];
    }
    x
}

/// Solution set `{y_p + N z}` of `A y = b`, found by Gauss–Jordan elimination
/// with partial pivoting at tolerance `tol` (relative to the row scale).
#[derive(Clone, Debug)]
pub struct AffineSpace {
    pub particular: Vec<BigScalar>,
    /// Each entry is one column of `N`, of length `ncols`.
    pub basis: Vec<Vec<BigScalar>>,
}

/// Result of trying to solve `A y = b`: an affine space, or a row combination
/// `w` with `wᵀA ≈ 0` and `wᵀb ≠ 0`.
pub fn affine_solution_space(
    a: &[Vec<BigScalar>],
    b: &[BigScalar],
    ncols: usize,
    prec: u32,
) -> Result<AffineSpace, Vec<BigScalar>> {
    let m = a.len();
    let mut rows: Vec<Vec<BigScalar>> = a.to_vec();
    let mut rhs: Vec<BigScalar> = b.to_vec();
    // Track row operations so an inconsistency can be explained.
    let mut comb: Vec<Vec<BigScalar>> = (0..m)
        .map(|i| {
            let mut e = vec![BigScalar::zero(prec); m];
            e[i] = BigScalar::one(prec);
            e
        })
        .collect();
    let scale = rows
        .iter()
        .flatten()
        .fold(BigScalar::one(prec), |acc, v| acc.max(v.abs()));
    let tol = scale * BigScalar::pow2(-(prec as i32) * 3 / 4, prec);
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == m {
            break;
        }
        let Some(piv) = (r..m).max_by(|&i, &j| {
            rows[i][c]
                .abs()
                .partial_cmp(&rows[j][c].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        }) else {
            break;
        };
        if rows[piv][c].abs() <= tol {
            continue;
        }
        rows.swap(r, piv);
        rhs.swap(r, piv);
        comb.swap(r, piv);
        let pv = rows[r][c].clone();
        for j in 0..ncols {
            rows[r][j] = &rows[r][j] / &pv;
        }
        rhs[r] = &rhs[r] / &pv;
        for j in 0..m {
            comb[r][j] = &comb[r][j] / &pv;
        }
        for i in 0..m {
            if i == r || rows[i][c].is_zero() {
                continue;
            }
            let f = rows[i][c].clone();
            for j in 0..ncols {
                let t = &f * &rows[r][j];
                rows[i][j] -= t;
            }
            let t = &f * &rhs[r];
            rhs[i] -= t;
            for j in 0..m {
                let t = &f * &comb[r][j];
                comb[i][j] -= t;
            }
        }
        pivots.push((r, c));
        r += 1;
    }
    let rhs_scale = b
        .iter()
        .fold(BigScalar::one(prec), |acc, v| acc.max(v.abs()));
    let rhs_tol = rhs_scale * BigScalar::pow2(-(prec as i32) * 3 / 4, prec);
    for i in r..m {
        if rhs[i].abs() > rhs_tol {
            return Err(comb[i].clone());
        }
    }
    let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
    let mut particular = vec![BigScalar::zero(prec); ncols];
    for &(row, c) in &pivots {
        particular[c] = rhs[row].clone();
    }
    let mut basis = Vec::new();
    for f in 0..ncols {
        if pivot_cols.contains(&f) {
            continue;
        }
        let mut v = vec![BigScalar::zero(prec); ncols];
        v[f] = BigScalar::one(prec);
        for &(row, c) in &pivots {
            v[c] = -rows[row][f].clone();
        }
        basis.push(v);
    }
    Ok(AffineSpace { particular, basis })
}
