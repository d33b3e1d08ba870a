//! Symmetric eigensolver: Householder reduction to tridiagonal form followed
//! by implicit-shift QL iteration, eigenvalues only. Deterministic for fixed
//! input; accuracy is on the order of machine epsilon times the spectral
//! norm, comfortably inside the contract used by the rest of the crate.

use super::SpectraError;

#[inline]
fn dot4(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let mut ia = a.chunks_exact(4);
    let mut ib = b.chunks_exact(4);
    for (ca, cb) in (&mut ia).zip(&mut ib) {
        acc[0] += ca[0] * cb[0];
        acc[1] += ca[1] * cb[1];
        acc[2] += ca[2] * cb[2];
        acc[3] += ca[3] * cb[3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (x, y) in ia.remainder().iter().zip(ib.remainder()) {
        s += x * y;
    }
    s
}

#[inline]
fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// In-place Householder tridiagonalization of the lower triangle of the
/// row-major n x n matrix `a`. Returns (diagonal, subdiagonal) where
/// `e[i]` couples `d[i]` and `d[i+1]`; `e[n-1]` is zero padding.
fn tridiagonalize(a: &mut [f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut e = vec![0.0f64; n];
    let mut u = vec![0.0f64; n];
    let mut p = vec![0.0f64; n];

    for i in (1..n).rev() {
        let l = i; // active leading block is l x l
        if l == 1 {
            e[0] = a[n]; // a[1][0]
            continue;
        }
        let (head, tail) = a.split_at_mut(i * n);
        let row_i = &tail[..l];
        let scale: f64 = row_i.iter().map(|x| x.abs()).sum();
        if scale == 0.0 {
            e[l - 1] = row_i[l - 1];
            continue;
        }
        let inv_scale = scale.recip();
        for (uk, rk) in u[..l].iter_mut().zip(row_i) {
            *uk = rk * inv_scale;
        }
        let mut h: f64 = dot4(&u[..l], &u[..l]);
        let f = u[l - 1];
        let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
        e[l - 1] = scale * g;
        h -= f * g;
        u[l - 1] = f - g;
        let inv_h = h.recip();

        // p = A u / h over the leading l x l block (lower triangle of head).
        p[..l].iter_mut().for_each(|x| *x = 0.0);
        for j in 0..l {
            let row_j = &head[j * n..j * n + j + 1];
            let uj = u[j];
            let mut pj = dot4(&row_j[..j], &u[..j]);
            pj += row_j[j] * uj;
            p[j] += pj;
            axpy(&mut p[..j], uj, &row_j[..j]);
        }
        for x in p[..l].iter_mut() {
            *x *= inv_h;
        }

        // q = p - (u.p / 2h) u, then A -= u q^T + q u^T.
        let k = dot4(&u[..l], &p[..l]) * 0.5 * inv_h;
        for (pj, uj) in p[..l].iter_mut().zip(&u[..l]) {
            *pj -= k * uj;
        }
        for j in 0..l {
            let row_j = &mut head[j * n..j * n + j + 1];
            let uj = u[j];
            let qj = p[j];
            for ((rk, qk), uk) in row_j.iter_mut().zip(&p[..j + 1]).zip(&u[..j + 1]) {
                *rk -= uj * qk + qj * uk;
            }
        }
    }

    let d: Vec<f64> = (0..n).map(|j| a[j * n + j]).collect();
    (d, e)
}

/// Implicit-shift QL on a symmetric tridiagonal matrix; eigenvalues land in
/// `d` unsorted. `e[i]` couples d[i] and d[i+1]; e[n-1] is scratch.
fn tql_eigenvalues(d: &mut [f64], e: &mut [f64]) -> Result<(), SpectraError> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    let eps = f64::EPSILON;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 64 {
                return Err(SpectraError::NoConvergence);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(if g == 0.0 { 1.0 } else { g }));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut pshift = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= pshift;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - pshift;
                r = (d[i] - g) * s + 2.0 * c * b;
                pshift = s * r;
                d[i + 1] = g + pshift;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= pshift;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// All eigenvalues of the symmetric matrix stored row-major in `data`,
/// ascending. Consumes a working copy.
pub(crate) fn symmetric_eigenvalues(data: &[f64], n: usize) -> Result<Vec<f64>, SpectraError> {
    if n == 0 {
        return Err(SpectraError::EmptyInput);
    }
    if data.iter().any(|x| !x.is_finite()) {
        return Err(SpectraError::NonFiniteEntries);
    }
    if n == 1 {
        return Ok(vec![data[0]]);
    }
    let mut work = data.to_vec();
    let (mut d, mut e) = tridiagonalize(&mut work, n);
    tql_eigenvalues(&mut d, &mut e)?;
    d.sort_by(|x, y| x.partial_cmp(y).expect("eigenvalues are finite"));
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eig_dense(vals: &[f64], n: usize) -> Vec<f64> {
        symmetric_eigenvalues(vals, n).unwrap()
    }

    #[test]
    fn two_by_two_closed_form() {
        let eigs = eig_dense(&[2.0, 1.0, 1.0, 2.0], 2);
        assert!((eigs[0] - 1.0).abs() < 1e-14);
        assert!((eigs[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal_matrix_eigenvalues_sorted() {
        let mut a = vec![0.0; 16];
        for (i, v) in [4.0, -1.0, 2.5, 0.0].into_iter().enumerate() {
            a[i * 4 + i] = v;
        }
        let eigs = eig_dense(&a, 4);
        assert_eq!(eigs, vec![-1.0, 0.0, 2.5, 4.0]);
    }

    #[test]
    fn tridiagonal_toeplitz_formula() {
        // diag 2, offdiag 1: eigenvalues 2 + 2 cos(k pi / (n+1)).
        let n = 120;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = 2.0;
            if i + 1 < n {
                a[i * n + i + 1] = 1.0;
                a[(i + 1) * n + i] = 1.0;
            }
        }
        let eigs = eig_dense(&a, n);
        let mut expect: Vec<f64> = (1..=n)
            .map(|k| 2.0 + 2.0 * (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos())
            .collect();
        expect.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (a, b) in eigs.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn rejects_non_finite() {
        assert!(symmetric_eigenvalues(&[f64::NAN], 1).is_err());
    }
}
