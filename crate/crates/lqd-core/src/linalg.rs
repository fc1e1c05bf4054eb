//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::DMatrix;

pub type Mat = DMatrix<f64>;

pub fn symmetrize(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

/// Largest absolute entry of `m - mᵀ`.
pub fn asymmetry(m: &Mat) -> f64 {
    (m - m.transpose()).amax()
}

pub fn min_eigenvalue(m: &Mat) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    symmetrize(m).symmetric_eigenvalues().min()
}

pub fn max_eigenvalue(m: &Mat) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    symmetrize(m).symmetric_eigenvalues().max()
}

/// `x ⪯ y + tol·I` in the Loewner order.
pub fn loewner_leq(x: &Mat, y: &Mat, tol: f64) -> bool {
    min_eigenvalue(&(y - x)) >= -tol
}

pub fn numerical_rank(m: &Mat, rel_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().singular_values();
    let top = sv.max();
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * top).count()
}

/// Ranks of `[B, AB, …, A^{i-1}B]` for `i = 1..=n`.
pub fn kalman_ranks(a: &Mat, b: &Mat, rel_tol: f64) -> Vec<usize> {
    let n = a.nrows();
    let mut blocks: Vec<Mat> = Vec::with_capacity(n);
    let mut cur = b.clone();
    let mut ranks = Vec::with_capacity(n);
    for _ in 0..n {
        blocks.push(cur.clone());
        let k = Mat::from_fn(n, n * blocks.len(), |r, c| blocks[c / n][(r, c % n)]);
        ranks.push(numerical_rank(&k, rel_tol));
        cur = a * &cur;
    }
    ranks
}

/// Geodesic dimension `Σ (2i−1) d_i` read off the Kalman rank increments.
pub fn geodesic_dimension_from_kalman(ranks: &[usize]) -> usize {
    let mut prev = 0;
    let mut total = 0;
    for (i, &r) in ranks.iter().enumerate() {
        total += (2 * i + 1) * (r - prev.min(r));
        prev = r;
    }
    total
}

pub fn matrix_exp(m: &Mat) -> Mat {
    m.clone().exp()
}

pub fn smallest_singular_value(m: &Mat) -> f64 {
    m.clone().singular_values().min()
}

pub fn diag(values: &[f64]) -> Mat {
    Mat::from_diagonal(&nalgebra::DVector::from_column_slice(values))
}

pub fn from_rows(rows: &[Vec<f64>]) -> Mat {
    let r = rows.len();
    let c = rows.first().map_or(0, |x| x.len());
    Mat::from_fn(r, c, |i, j| rows[i][j])
}

pub fn to_rows(m: &Mat) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}
