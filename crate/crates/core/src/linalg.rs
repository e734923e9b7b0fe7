//! Dense row-major linear algebra: products, transpose, Gram matrices, an
//! SPD (Cholesky) solver and the ridge-regularized Moore-Penrose
//! pseudoinverse built on top of it.

use std::fmt;
use std::ops::Index;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Pivots below this fraction of the largest pivot seen so far are rejected.
pub const PIVOT_TOLERANCE: f64 = 1e-12;

/// Row-major matrix of finite `f64` values.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from row-major values, rejecting bad lengths and NaN/Inf.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::shape(
                "DenseMatrix::new",
                format!("{} values for {rows}x{cols}", rows * cols),
                format!("{} values", data.len()),
            ));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / cols.max(1),
                col: pos % cols.max(1),
                value: data[pos],
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Builds a matrix from a slice of equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::shape(
                    "DenseMatrix::from_rows",
                    format!("{cols} columns"),
                    format!("{} columns in row {i}", r.len()),
                ));
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    /// Builds a matrix by evaluating `f(row, col)` for every cell.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::new(rows, cols, data)
    }

    // Internal constructor for results of arithmetic on already-finite inputs.
    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[f64]> {
        // chunks_exact(0) panics, so an empty-column matrix yields no rows here
        self.data.chunks_exact(self.cols.max(1))
    }

    /// Copies the listed rows, in order, into a new matrix.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Self::from_raw(indices.len(), self.cols, data)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest absolute elementwise difference; `None` when shapes differ.
    pub fn max_abs_diff(&self, other: &DenseMatrix) -> Option<f64> {
        if self.shape() != other.shape() {
            return None;
        }
        Some(
            self.data
                .iter()
                .zip(&other.data)
                .fold(0.0, |m, (a, b)| m.max((a - b).abs())),
        )
    }

    pub fn sub(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.shape() != other.shape() {
            return Err(Error::shape(
                "sub",
                format!("{}x{}", self.rows, self.cols),
                format!("{}x{}", other.rows, other.cols),
            ));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Self::from_raw(self.rows, self.cols, data))
    }

    pub fn scale(&self, factor: f64) -> DenseMatrix {
        Self::from_raw(self.rows, self.cols, self.data.iter().map(|v| v * factor).collect())
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    fn add_to_diagonal(&mut self, value: f64) {
        let n = self.rows.min(self.cols);
        for i in 0..n {
            self.data[i * self.cols + i] += value;
        }
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for r in self.row_iter().take(8) {
            writeln!(f, "  {r:?}")?;
        }
        if self.rows > 8 {
            writeln!(f, "  ...")?;
        }
        write!(f, "]")
    }
}

/// Dot product with a fixed four-way accumulation order, so results are
/// reproducible bit-for-bit while still vectorizing.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Standard matrix product `a · b`.
pub fn matmul(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if a.cols != b.rows {
        return Err(Error::shape(
            "matmul",
            format!("left cols == right rows ({})", a.cols),
            format!("{}x{} * {}x{}", a.rows, a.cols, b.rows, b.cols),
        ));
    }
    let (n, inner, m) = (a.rows, a.cols, b.cols);
    let mut out = vec![0.0; n * m];
    if m > 0 {
        // Each output row is produced by one task in a fixed k order.
        out.par_chunks_mut(m).enumerate().for_each(|(i, out_row)| {
            let a_row = &a.data[i * inner..(i + 1) * inner];
            for (k, &aik) in a_row.iter().enumerate() {
                if aik == 0.0 {
                    continue;
                }
                let b_row = &b.data[k * m..(k + 1) * m];
                for (o, &bkj) in out_row.iter_mut().zip(b_row) {
                    *o += aik * bkj;
                }
            }
        });
    }
    Ok(DenseMatrix::from_raw(n, m, out))
}

pub fn transpose(a: &DenseMatrix) -> DenseMatrix {
    let (n, m) = a.shape();
    let mut out = vec![0.0; n * m];
    const BLOCK: usize = 32;
    for ib in (0..n).step_by(BLOCK) {
        for jb in (0..m).step_by(BLOCK) {
            for i in ib..(ib + BLOCK).min(n) {
                for j in jb..(jb + BLOCK).min(m) {
                    out[j * n + i] = a.data[i * m + j];
                }
            }
        }
    }
    DenseMatrix::from_raw(m, n, out)
}

/// `a · aᵀ`, exploiting symmetry. Entries are row-pair dot products.
pub fn gram_rows(a: &DenseMatrix) -> DenseMatrix {
    let n = a.rows;
    let lower: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let ri = a.row(i);
            (0..=i).map(|j| dot(ri, a.row(j))).collect()
        })
        .collect();
    let mut out = vec![0.0; n * n];
    for (i, row) in lower.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            out[i * n + j] = v;
            out[j * n + i] = v;
        }
    }
    DenseMatrix::from_raw(n, n, out)
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    // row-major, only the lower triangle is meaningful
    l: Vec<f64>,
}

impl Cholesky {
    /// Factors `a = L·Lᵀ`. Only the lower triangle of `a` is read.
    pub fn factor(a: &DenseMatrix) -> Result<Self> {
        if a.rows != a.cols {
            return Err(Error::shape(
                "cholesky",
                "square matrix",
                format!("{}x{}", a.rows, a.cols),
            ));
        }
        let n = a.rows;
        let mut l = vec![0.0; n * n];
        let mut largest_pivot: f64 = 0.0;
        for i in 0..n {
            for j in 0..=i {
                let (head, tail) = l.split_at_mut(i * n);
                let li = &tail[..n];
                let lj: &[f64] = if j == i { li } else { &head[j * n..j * n + n] };
                let s = a.data[i * n + j] - dot(&li[..j], &lj[..j]);
                if i == j {
                    if s <= 0.0 || !s.is_finite() || s < PIVOT_TOLERANCE * largest_pivot {
                        return Err(Error::Singular { index: i, pivot: s });
                    }
                    largest_pivot = largest_pivot.max(s);
                    tail[i] = s.sqrt();
                } else {
                    tail[j] = s / head[j * n + j];
                }
            }
        }
        Ok(Self { n, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `L·Lᵀ·X = B`.
    pub fn solve(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        let n = self.n;
        if b.rows != n {
            return Err(Error::shape(
                "cholesky solve",
                format!("{n} rows"),
                format!("{} rows", b.rows),
            ));
        }
        let m = b.cols;
        let mut x = b.data.clone();
        // forward: L·Y = B
        for i in 0..n {
            let (done, rest) = x.split_at_mut(i * m);
            let xi = &mut rest[..m];
            for k in 0..i {
                let lik = self.l[i * n + k];
                if lik == 0.0 {
                    continue;
                }
                let xk = &done[k * m..(k + 1) * m];
                for (v, &w) in xi.iter_mut().zip(xk) {
                    *v -= lik * w;
                }
            }
            let d = self.l[i * n + i];
            xi.iter_mut().for_each(|v| *v /= d);
        }
        // backward: Lᵀ·X = Y
        for i in (0..n).rev() {
            let (head, done) = x.split_at_mut((i + 1) * m);
            let xi = &mut head[i * m..];
            for k in i + 1..n {
                let lki = self.l[k * n + i];
                if lki == 0.0 {
                    continue;
                }
                let xk = &done[(k - i - 1) * m..(k - i) * m];
                for (v, &w) in xi.iter_mut().zip(xk) {
                    *v -= lki * w;
                }
            }
            let d = self.l[i * n + i];
            xi.iter_mut().for_each(|v| *v /= d);
        }
        Ok(DenseMatrix::from_raw(n, m, x))
    }
}

/// Solves `a·X = b` for symmetric positive-definite `a`.
pub fn solve_spd(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    Cholesky::factor(a)?.solve(b)
}

fn check_ridge(h: &DenseMatrix, ridge: f64) -> Result<()> {
    if h.is_empty() {
        return Err(Error::Input("pseudoinverse of an empty matrix".into()));
    }
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(Error::Input(format!("ridge must be finite and >= 0, got {ridge}")));
    }
    Ok(())
}

/// `(HᵀH + ridge·I)⁻¹ Hᵀ`, factoring the column Gram matrix.
pub fn pseudoinverse_tall(h: &DenseMatrix, ridge: f64) -> Result<DenseMatrix> {
    check_ridge(h, ridge)?;
    let ht = transpose(h);
    let mut gram = gram_rows(&ht);
    gram.add_to_diagonal(ridge);
    solve_spd(&gram, &ht)
}

/// `Hᵀ (HHᵀ + ridge·I)⁻¹`, factoring the row Gram matrix.
pub fn pseudoinverse_wide(h: &DenseMatrix, ridge: f64) -> Result<DenseMatrix> {
    check_ridge(h, ridge)?;
    let mut gram = gram_rows(h);
    gram.add_to_diagonal(ridge);
    // (HHᵀ + rI) is symmetric, so ((HHᵀ + rI)⁻¹ H)ᵀ = Hᵀ (HHᵀ + rI)⁻¹
    Ok(transpose(&solve_spd(&gram, h)?))
}

/// Regularized Moore-Penrose pseudoinverse. Uses the tall form when
/// `rows >= cols` and the wide form otherwise, so the smaller Gram matrix
/// is the one factored. With `ridge == 0` and full rank this is the exact
/// pseudoinverse.
pub fn pseudoinverse(h: &DenseMatrix, ridge: f64) -> Result<DenseMatrix> {
    if h.rows >= h.cols {
        pseudoinverse_tall(h, ridge)
    } else {
        pseudoinverse_wide(h, ridge)
    }
}

/// Computes `pseudoinverse(h, ridge) · y` without materializing the
/// pseudoinverse.
pub fn least_squares(h: &DenseMatrix, y: &DenseMatrix, ridge: f64) -> Result<DenseMatrix> {
    check_ridge(h, ridge)?;
    if y.rows != h.rows {
        return Err(Error::shape(
            "least_squares",
            format!("{} target rows", h.rows),
            format!("{} target rows", y.rows),
        ));
    }
    if h.rows >= h.cols {
        let ht = transpose(h);
        let mut gram = gram_rows(&ht);
        gram.add_to_diagonal(ridge);
        solve_spd(&gram, &matmul(&ht, y)?)
    } else {
        let mut gram = gram_rows(h);
        gram.add_to_diagonal(ridge);
        let z = solve_spd(&gram, y)?;
        matmul(&transpose(h), &z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
        DenseMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0)).unwrap()
    }

    fn naive_matmul(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
        DenseMatrix::from_fn(a.rows(), b.cols(), |i, j| {
            let mut s = 0.0;
            for k in 0..a.cols() {
                s += a[(i, k)] * b[(k, j)];
            }
            s
        })
        .unwrap()
    }

    fn m(rows: &[&[f64]]) -> DenseMatrix {
        DenseMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn constructor_rejects_nan_and_bad_length() {
        assert!(matches!(
            DenseMatrix::new(1, 2, vec![1.0, f64::NAN]),
            Err(Error::NonFinite { row: 0, col: 1, .. })
        ));
        assert!(matches!(DenseMatrix::new(2, 2, vec![1.0]), Err(Error::Shape { .. })));
        assert!(DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }

    #[test]
    fn matmul_identity_and_hand_checked() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random(3, 4, &mut rng);
        assert_eq!(matmul(&DenseMatrix::identity(3), &a).unwrap(), a);

        let p = matmul(&m(&[&[1.0, 2.0], &[3.0, 4.0]]), &m(&[&[0.0], &[1.0]])).unwrap();
        assert_eq!(p, m(&[&[2.0], &[4.0]]));
    }

    #[test]
    fn matmul_matches_triple_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random(7, 5, &mut rng);
        let b = random(5, 3, &mut rng);
        let diff = matmul(&a, &b).unwrap().max_abs_diff(&naive_matmul(&a, &b)).unwrap();
        assert!(diff <= 1e-12, "{diff}");
    }

    #[test]
    fn matmul_shape_error() {
        let a = DenseMatrix::zeros(2, 3);
        assert!(matches!(matmul(&a, &a), Err(Error::Shape { .. })));
    }

    #[test]
    fn transpose_cases() {
        assert_eq!(transpose(&m(&[&[1.0, 2.0, 3.0]])), m(&[&[1.0], &[2.0], &[3.0]]));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random(4, 6, &mut rng);
        let t = transpose(&a);
        assert_eq!(t.shape(), (6, 4));
        for i in 0..4 {
            for j in 0..6 {
                assert_eq!(t[(j, i)], a[(i, j)]);
            }
        }
        assert_eq!(transpose(&t), a);
        let big = random(70, 45, &mut rng);
        assert_eq!(transpose(&transpose(&big)), big);
    }

    #[test]
    fn gram_matches_product_with_transpose() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random(9, 13, &mut rng);
        let g = gram_rows(&a);
        let oracle = naive_matmul(&a, &transpose(&a));
        assert!(g.max_abs_diff(&oracle).unwrap() <= 1e-12);
    }

    #[test]
    fn solve_spd_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b = random(4, 2, &mut rng);
        assert_eq!(solve_spd(&DenseMatrix::identity(4), &b).unwrap(), b);
    }

    #[test]
    fn solve_spd_two_by_two_cramer() {
        // Cramer's rule: det = 4*3 - 1*1 = 11; x1 = (1*3 - 1*2)/11, x2 = (4*2 - 1*1)/11
        let a = m(&[&[4.0, 1.0], &[1.0, 3.0]]);
        let b = m(&[&[1.0], &[2.0]]);
        let x = solve_spd(&a, &b).unwrap();
        assert!((x[(0, 0)] - 1.0 / 11.0).abs() < 1e-15);
        assert!((x[(1, 0)] - 7.0 / 11.0).abs() < 1e-15);
    }

    #[test]
    fn solve_spd_random_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mm = random(8, 8, &mut rng);
        let mut a = gram_rows(&transpose(&mm));
        a.add_to_diagonal(1.0);
        let b = random(8, 3, &mut rng);
        let x = solve_spd(&a, &b).unwrap();
        let r = matmul(&a, &x).unwrap().sub(&b).unwrap().max_abs();
        assert!(r <= 1e-10, "{r}");
    }

    #[test]
    fn solve_spd_rejects_indefinite_and_singular() {
        let indefinite = m(&[&[1.0, 2.0], &[2.0, 1.0]]);
        assert!(matches!(
            solve_spd(&indefinite, &DenseMatrix::identity(2)),
            Err(Error::Singular { index: 1, .. })
        ));
        let singular = m(&[&[1.0, 1.0], &[1.0, 1.0]]);
        assert!(matches!(
            solve_spd(&singular, &DenseMatrix::identity(2)),
            Err(Error::Singular { .. })
        ));
        // pivot ratio 1e-14 falls below the relative tolerance
        let tiny = m(&[&[1.0, 0.0], &[0.0, 1e-14]]);
        assert!(solve_spd(&tiny, &DenseMatrix::identity(2)).is_err());
        let ok = m(&[&[1.0, 0.0], &[0.0, 1e-11]]);
        assert!(solve_spd(&ok, &DenseMatrix::identity(2)).is_ok());
    }

    #[test]
    fn pseudoinverse_of_identity() {
        let p = pseudoinverse(&DenseMatrix::identity(5), 0.0).unwrap();
        assert!(p.max_abs_diff(&DenseMatrix::identity(5)).unwrap() < 1e-15);
    }

    fn penrose_violation(h: &DenseMatrix, p: &DenseMatrix) -> f64 {
        let hp = naive_matmul(h, p);
        let ph = naive_matmul(p, h);
        let c1 = naive_matmul(&hp, h).max_abs_diff(h).unwrap();
        let c2 = naive_matmul(&ph, p).max_abs_diff(p).unwrap();
        let c3 = transpose(&hp).max_abs_diff(&hp).unwrap();
        let c4 = transpose(&ph).max_abs_diff(&ph).unwrap();
        c1.max(c2).max(c3).max(c4)
    }

    #[test]
    fn pseudoinverse_penrose_conditions_tall() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let h = random(10, 4, &mut rng);
        let p = pseudoinverse(&h, 0.0).unwrap();
        assert_eq!(p.shape(), (4, 10));
        let v = penrose_violation(&h, &p);
        assert!(v <= 1e-8, "{v}");
    }

    #[test]
    fn pseudoinverse_rank_deficient_with_ridge() {
        // third row = first + second
        let h = m(&[&[1.0, 2.0, 0.5], &[0.0, 1.0, -1.0], &[1.0, 3.0, -0.5]]);
        assert!(matches!(pseudoinverse(&h, 0.0), Err(Error::Singular { .. })));
        let ridge = 1e-6;
        let p = pseudoinverse(&h, ridge).unwrap();
        let mut g = naive_matmul(&transpose(&h), &h);
        g.add_to_diagonal(ridge);
        let r = naive_matmul(&g, &p).max_abs_diff(&transpose(&h)).unwrap();
        assert!(r <= 1e-8, "{r}");
    }

    #[test]
    fn tall_and_wide_forms_agree_on_square() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = random(6, 6, &mut rng);
        let t = pseudoinverse_tall(&h, 0.0).unwrap();
        let w = pseudoinverse_wide(&h, 0.0).unwrap();
        assert!(t.max_abs_diff(&w).unwrap() <= 1e-8);
    }

    #[test]
    fn ridge_continuity() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let h = random(20, 6, &mut rng);
        let a = pseudoinverse(&h, 1e-6).unwrap();
        let b = pseudoinverse(&h, 1e-7).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() <= 1e-6);
    }

    #[test]
    fn least_squares_equals_pinv_times_y() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for (r, c) in [(15, 6), (6, 15)] {
            let h = random(r, c, &mut rng);
            let y = random(r, 3, &mut rng);
            let direct = least_squares(&h, &y, 1e-9).unwrap();
            let via = matmul(&pseudoinverse(&h, 1e-9).unwrap(), &y).unwrap();
            assert!(direct.max_abs_diff(&via).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn pseudoinverse_input_errors() {
        assert!(matches!(pseudoinverse(&DenseMatrix::zeros(0, 3), 0.0), Err(Error::Input(_))));
        assert!(matches!(pseudoinverse(&DenseMatrix::identity(2), -1.0), Err(Error::Input(_))));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn matmul_is_associative(seed in any::<u64>(), n in 1usize..6, k in 1usize..6, l in 1usize..6, p in 1usize..6) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let a = random(n, k, &mut rng);
                let b = random(k, l, &mut rng);
                let c = random(l, p, &mut rng);
                let left = matmul(&matmul(&a, &b).unwrap(), &c).unwrap();
                let right = matmul(&a, &matmul(&b, &c).unwrap()).unwrap();
                let scale = left.max_abs().max(1.0);
                prop_assert!(left.max_abs_diff(&right).unwrap() <= 1e-10 * scale);
            }

            #[test]
            fn penrose_holds_for_random_full_rank(seed in any::<u64>(), r in 1usize..12, c in 1usize..12) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let h = random(r, c, &mut rng);
                // tiny random matrices can still be near-singular; only check the well-conditioned ones
                if let Ok(p) = pseudoinverse(&h, 0.0) {
                    if p.max_abs() < 1e3 {
                        prop_assert!(penrose_violation(&h, &p) <= 1e-8);
                    }
                }
            }
        }
    }
}
