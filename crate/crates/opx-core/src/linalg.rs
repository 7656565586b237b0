//! Dense linear algebra: full-pivot LU at any precision, symmetric
//! eigenvalues by Householder reduction and implicit QL, Hermitian
//! eigenvalues through the real embedding, complex Gram–Schmidt QR.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{OpxError, Result};
use crate::real::Real;

/// LU factorization with complete pivoting, PAQ = LU.
#[derive(Clone, Debug)]
pub struct Lu<T> {
    lu: Vec<Vec<T>>,
    rows: Vec<usize>,
    cols: Vec<usize>,
    negate: bool,
    /// Largest absolute entry of the factored matrix.
    scale: f64,
}

/// Factors a square matrix. Zero pivots are kept; [`Lu::solve`] rejects them.
pub fn lu<T: Real>(mut a: Vec<Vec<T>>) -> Lu<T> {
    let n = a.len();
    let mut rows: Vec<usize> = (0..n).collect();
    let mut cols: Vec<usize> = (0..n).collect();
    let mut negate = false;
    let mut scale = 0.0f64;
    for row in &a {
        for v in row {
            scale = scale.max(v.to_f64().abs());
        }
    }
    for k in 0..n {
        let (mut pr, mut pc) = (k, k);
        let mut best = a[k][k].abs();
        for (i, row) in a.iter().enumerate().skip(k) {
            for (j, v) in row.iter().enumerate().skip(k) {
                let m = v.abs();
                if m > best {
                    best = m;
                    pr = i;
                    pc = j;
                }
            }
        }
        if pr != k {
            a.swap(pr, k);
            rows.swap(pr, k);
            negate = !negate;
        }
        if pc != k {
            for row in a.iter_mut() {
                row.swap(pc, k);
            }
            cols.swap(pc, k);
            negate = !negate;
        }
        if a[k][k].is_zero() {
            continue;
        }
        let pivot = a[k][k].clone();
        for i in k + 1..n {
            let f = a[i][k].clone() / pivot.clone();
            if f.is_zero() {
                a[i][k] = f;
                continue;
            }
            for j in k + 1..n {
                let t = f.clone() * a[k][j].clone();
                a[i][j] = a[i][j].clone() - t;
            }
            a[i][k] = f;
        }
    }
    Lu { lu: a, rows, cols, negate, scale }
}

impl<T: Real> Lu<T> {
    pub fn dim(&self) -> usize {
        self.lu.len()
    }

    /// Determinant; the matrix must be at least 1x1.
    pub fn det(&self) -> T {
        let n = self.dim();
        let mut d = self.lu[0][0].clone();
        for i in 1..n {
            d = d * self.lu[i][i].clone();
        }
        if self.negate {
            -d
        } else {
            d
        }
    }

    /// Smallest |U_ii| relative to the largest matrix entry.
    pub fn min_pivot_ratio(&self) -> f64 {
        if self.scale == 0.0 {
            return 0.0;
        }
        self.lu
            .iter()
            .enumerate()
            .map(|(i, r)| r[i].to_f64().abs() / self.scale)
            .fold(f64::INFINITY, f64::min)
    }

    /// Whether some pivot falls below `rel` times the matrix scale.
    pub fn is_singular(&self, rel: f64) -> bool {
        self.dim() > 0 && !(self.min_pivot_ratio() > rel)
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        let n = self.dim();
        if b.len() != n {
            return Err(OpxError::Insufficient { needed: n, available: b.len() });
        }
        if self.is_singular(0.0) {
            return Err(OpxError::Singular(alloc::format!("{n}x{n} matrix")));
        }
        let mut y: Vec<T> = self.rows.iter().map(|&r| b[r].clone()).collect();
        for i in 0..n {
            for j in 0..i {
                let t = self.lu[i][j].clone() * y[j].clone();
                y[i] = y[i].clone() - t;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let t = self.lu[i][j].clone() * y[j].clone();
                y[i] = y[i].clone() - t;
            }
            y[i] = y[i].clone() / self.lu[i][i].clone();
        }
        let mut x = y.clone();
        for (k, &c) in self.cols.iter().enumerate() {
            x[c] = y[k].clone();
        }
        Ok(x)
    }
}

/// Determinant by complete pivoting of a nonempty square matrix.
pub fn det<T: Real>(a: Vec<Vec<T>>) -> T {
    lu(a).det()
}

/// Solves `a x = b`, failing when a pivot drops below `rel` of the matrix scale.
pub fn solve<T: Real>(a: Vec<Vec<T>>, b: &[T], rel: f64) -> Result<Vec<T>> {
    let f = lu(a);
    if f.is_singular(rel) {
        return Err(OpxError::Singular(alloc::format!("pivot ratio {:e}", f.min_pivot_ratio())));
    }
    f.solve(b)
}

/// Eigenvalues (ascending) of a symmetric tridiagonal matrix, with the first
/// component of each normalized eigenvector.
pub fn tridiagonal_eigen(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(&off[..n.saturating_sub(1)]);
    let mut z = vec![0.0; n];
    if n > 0 {
        z[0] = 1.0;
    }
    implicit_ql(&mut d, &mut e, Some(&mut z))?;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    Ok((idx.iter().map(|&i| d[i]).collect(), idx.iter().map(|&i| z[i]).collect()))
}

/// Implicit QL with Wilkinson shifts on (d, e), e[i] coupling i and i+1.
/// When `z` is given it must hold one row of the accumulated rotation.
fn implicit_ql(d: &mut [f64], e: &mut [f64], mut z: Option<&mut [f64]>) -> Result<()> {
    let n = d.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(OpxError::NoConvergence { iterations: iter, last_change: e[l].abs() });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = libm::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + if g >= 0.0 { r } else { -r });
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = libm::hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    let f = z[i + 1];
                    z[i + 1] = s * z[i] + c * f;
                    z[i] = c * z[i] - s * f;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Eigenvalues (ascending) of a real symmetric matrix.
pub fn symmetric_eigenvalues(mut a: Vec<Vec<f64>>) -> Result<Vec<f64>> {
    let n = a.len();
    for k in 0..n.saturating_sub(2) {
        let norm = libm::sqrt(a.iter().skip(k + 1).map(|r| r[k] * r[k]).sum::<f64>());
        if norm == 0.0 {
            continue;
        }
        let alpha = if a[k + 1][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k + 1..n).map(|i| a[i][k]).collect();
        v[0] -= alpha;
        let vn2: f64 = v.iter().map(|x| x * x).sum();
        if vn2 == 0.0 {
            continue;
        }
        let m = n - k - 1;
        let mut p = vec![0.0; m];
        for i in 0..m {
            p[i] = 2.0 / vn2 * (0..m).map(|j| a[k + 1 + i][k + 1 + j] * v[j]).sum::<f64>();
        }
        let kk = (0..m).map(|i| v[i] * p[i]).sum::<f64>() / vn2;
        let q: Vec<f64> = (0..m).map(|i| p[i] - kk * v[i]).collect();
        for i in 0..m {
            for j in 0..m {
                a[k + 1 + i][k + 1 + j] -= v[i] * q[j] + q[i] * v[j];
            }
        }
        a[k + 1][k] = alpha;
        a[k][k + 1] = alpha;
        for i in k + 2..n {
            a[i][k] = 0.0;
            a[k][i] = 0.0;
        }
    }
    let mut d: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    let mut e: Vec<f64> = (0..n).map(|i| if i + 1 < n { a[i][i + 1] } else { 0.0 }).collect();
    implicit_ql(&mut d, &mut e, None)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Eigenvalues (ascending) of a Hermitian matrix via the real symmetric
/// embedding [[A, -B], [B, A]] of A + iB, whose spectrum is doubled.
pub fn hermitian_eigenvalues(h: &[Vec<Complex64>]) -> Result<Vec<f64>> {
    let n = h.len();
    let mut big = vec![vec![0.0; 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            let z = h[i][j];
            big[i][j] = z.re;
            big[i + n][j + n] = z.re;
            big[i][j + n] = -z.im;
            big[i + n][j] = z.im;
        }
    }
    let all = symmetric_eigenvalues(big)?;
    Ok(all.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect())
}

/// Modified Gram–Schmidt on the columns of a square complex matrix; the
/// returned Q has the phases fixed by a positive diagonal of R.
pub fn complex_qr_q(a: &[Vec<Complex64>]) -> Result<Vec<Vec<Complex64>>> {
    let n = a.len();
    let mut cols: Vec<Vec<Complex64>> = (0..n).map(|j| (0..n).map(|i| a[i][j]).collect()).collect();
    for j in 0..n {
        for k in 0..j {
            let (done, rest) = cols.split_at_mut(j);
            let qk = &done[k];
            let r: Complex64 = qk.iter().zip(rest[0].iter()).map(|(q, x)| q.conj() * x).sum();
            for (x, q) in rest[0].iter_mut().zip(qk.iter()) {
                *x -= r * q;
            }
        }
        let norm = libm::sqrt(cols[j].iter().map(|x| x.norm_sqr()).sum::<f64>());
        if norm == 0.0 {
            return Err(OpxError::Singular(alloc::format!("rank-deficient column {j}")));
        }
        for x in cols[j].iter_mut() {
            *x /= norm;
        }
    }
    Ok((0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mp::Mp;

    #[test]
    fn determinant_matches_expansion() {
        let a = vec![vec![1.0, 1.0, 2.0], vec![1.0, 2.0, 6.0], vec![2.0, 6.0, 24.0]];
        assert!((det(a) - 4.0).abs() < 1e-12);
        let b = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert!((det(b) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn solve_at_multiprecision() {
        let bits = 256;
        // Hilbert matrix of order 8 is badly conditioned in f64.
        let n = 8;
        let h: Vec<Vec<Mp>> =
            (0..n).map(|i| (0..n).map(|j| Mp::ratio(1, (i + j + 1) as i64, bits)).collect()).collect();
        let x_true: Vec<Mp> = (0..n).map(|i| Mp::from_i64(i as i64 + 1, bits)).collect();
        let b: Vec<Mp> = h
            .iter()
            .map(|row| row.iter().zip(&x_true).fold(Mp::zero(bits), |acc, (a, x)| acc + a * x))
            .collect();
        let x = solve(h, &b, 1e-60).unwrap();
        for (u, v) in x.iter().zip(&x_true) {
            assert!((u - v).abs() < Mp::one(bits).ldexp(-200));
        }
    }

    #[test]
    fn singular_matrix_rejected() {
        let a = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(solve(a, &[1.0, 1.0], 1e-12).is_err());
    }

    #[test]
    fn symmetric_spectrum() {
        let a = vec![vec![2.0, -1.0, 0.0, 0.0], vec![-1.0, 2.0, -1.0, 0.0], vec![0.0, -1.0, 2.0, -1.0], vec![0.0, 0.0, -1.0, 2.0]];
        let ev = symmetric_eigenvalues(a).unwrap();
        for (k, v) in ev.iter().enumerate() {
            let exact = 2.0 - 2.0 * libm::cos((k + 1) as f64 * core::f64::consts::PI / 5.0);
            assert!((v - exact).abs() < 1e-13);
        }
        let dense = vec![vec![4.0, 1.0, 2.0], vec![1.0, 3.0, 0.5], vec![2.0, 0.5, 1.0]];
        let ev = symmetric_eigenvalues(dense).unwrap();
        assert!((ev.iter().sum::<f64>() - 8.0).abs() < 1e-12);
        let prod: f64 = ev.iter().product();
        let d = det(vec![vec![4.0, 1.0, 2.0], vec![1.0, 3.0, 0.5], vec![2.0, 0.5, 1.0]]);
        assert!((prod - d).abs() < 1e-12);
    }

    #[test]
    fn golub_welsch_weights_for_legendre() {
        // Legendre recurrence: b = 0, a_n^2 = n^2 / (4n^2 - 1), total mass 2.
        let n = 6;
        let off: Vec<f64> = (1..n).map(|k| libm::sqrt((k * k) as f64 / (4.0 * (k * k) as f64 - 1.0))).collect();
        let (x, v) = tridiagonal_eigen(&vec![0.0; n], &off).unwrap();
        let (gx, gw) = crate::quad::gauss_legendre(n);
        for i in 0..n {
            assert!((x[i] - gx[i]).abs() < 1e-13);
            assert!((2.0 * v[i] * v[i] - gw[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn hermitian_embedding() {
        let i = Complex64::new(0.0, 1.0);
        let h = vec![vec![Complex64::new(1.0, 0.0), i], vec![-i, Complex64::new(1.0, 0.0)]];
        let ev = hermitian_eigenvalues(&h).unwrap();
        assert!(ev[0].abs() < 1e-13 && (ev[1] - 2.0).abs() < 1e-13);
    }

    #[test]
    fn qr_is_unitary() {
        let a: Vec<Vec<Complex64>> = (0..3)
            .map(|r| (0..3).map(|c| Complex64::new(libm::sin((r * 3 + c) as f64 + 0.5), libm::cos((r * r + 2 * c) as f64))).collect())
            .collect();
        let q = complex_qr_q(&a).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let s: Complex64 = (0..3).map(|k| q[k][i].conj() * q[k][j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((s - want).norm() < 1e-12);
            }
        }
    }
}
