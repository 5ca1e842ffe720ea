//! Naive dense linear algebra on `Vec<Vec<f64>>`.
//!
//! O(n^3) Gaussian elimination with partial pivoting — slow and simple on
//! purpose, so posterior algebra can be cross-checked against an
//! implementation that shares nothing with the BLAS-backed code.

pub type Mat = Vec<Vec<f64>>;

pub fn zeros(n: usize, m: usize) -> Mat {
    vec![vec![0.0; m]; n]
}

pub fn mat_vec(a: &Mat, x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum())
        .collect()
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    let mut out = zeros(n, m);
    for i in 0..n {
        for l in 0..k {
            let ail = a[i][l];
            for j in 0..m {
                out[i][j] += ail * b[l][j];
            }
        }
    }
    out
}

fn lu_decompose(a: &Mat) -> (Mat, Vec<usize>, f64) {
    let n = a.len();
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| lu[i][col].abs().total_cmp(&lu[j][col].abs()))
            .unwrap();
        if lu[pivot][col].abs() < 1e-300 {
            panic!("singular matrix in oracle LU");
        }
        if pivot != col {
            lu.swap(pivot, col);
            perm.swap(pivot, col);
            sign = -sign;
        }
        for row in col + 1..n {
            let factor = lu[row][col] / lu[col][col];
            lu[row][col] = factor;
            for j in col + 1..n {
                lu[row][j] -= factor * lu[col][j];
            }
        }
    }
    (lu, perm, sign)
}

fn lu_solve(lu: &Mat, perm: &[usize], b: &[f64]) -> Vec<f64> {
    let n = lu.len();
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[perm[i]];
        for j in 0..i {
            s -= lu[i][j] * y[j];
        }
        y[i] = s;
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for j in i + 1..n {
            s -= lu[i][j] * y[j];
        }
        y[i] = s / lu[i][i];
    }
    y
}

/// Solve `a x = b` with partial pivoting.
pub fn solve(a: &Mat, b: &[f64]) -> Vec<f64> {
    let (lu, perm, _) = lu_decompose(a);
    lu_solve(&lu, &perm, b)
}

/// Dense inverse.
pub fn inverse(a: &Mat) -> Mat {
    let n = a.len();
    let (lu, perm, _) = lu_decompose(a);
    let mut out = zeros(n, n);
    for col in 0..n {
        let mut e = vec![0.0; n];
        e[col] = 1.0;
        let x = lu_solve(&lu, &perm, &e);
        for row in 0..n {
            out[row][col] = x[row];
        }
    }
    out
}

/// log|det(a)| for a matrix with positive determinant.
pub fn log_det(a: &Mat) -> f64 {
    let (lu, _, sign) = lu_decompose(a);
    let mut logdet = 0.0;
    let mut s = sign;
    for i in 0..lu.len() {
        logdet += lu[i][i].abs().ln();
        if lu[i][i] < 0.0 {
            s = -s;
        }
    }
    assert!(s > 0.0, "determinant not positive");
    logdet
}
