//! Autocovariance-matrix builders.
//!
//! All builders produce dense symmetric matrices; the design envelope is
//! n <= 4000, so O(n^2) storage is fine and no structure-exploiting solver is
//! attempted. The sample autocovariance always uses the divisor n (never
//! n - k): the limit theory depends on that normalization.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::process::AcvfTable;

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error("series must be non-empty")]
    EmptySeries,
    #[error("bandwidth m = {m} out of range 1..={n}")]
    BandwidthOutOfRange { m: usize, n: usize },
    #[error("series of length {len} too short: need at least {need} observations")]
    SeriesTooShort { len: usize, need: usize },
    #[error("dimension must be >= 1")]
    ZeroDimension,
}

/// Dense real symmetric matrix, row-major. Symmetry is enforced on build: the
/// lower triangle is the source of truth and is mirrored exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Builds from a function of (row, col); only calls f on the lower
    /// triangle and mirrors it, so the result is exactly symmetric.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(n >= 1, "dimension must be >= 1");
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Self { n, data }
    }

    /// Symmetric Toeplitz matrix with `diagonals[k]` on offset |i-j| = k.
    pub fn from_toeplitz(n: usize, diagonals: &[f64]) -> Self {
        Self::from_fn(n, |i, j| diagonals.get(i - j).copied().unwrap_or(0.0))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    /// Leading principal m x m submatrix.
    pub fn leading_principal(&self, m: usize) -> SymMatrix {
        assert!(m >= 1 && m <= self.n);
        SymMatrix::from_fn(m, |i, j| self.get(i, j))
    }

    /// Writes the full square, row-major, as CSV rows.
    pub fn write_csv<W: std::io::Write>(&self, out: &mut W) -> std::io::Result<()> {
        for i in 0..self.n {
            let row = &self.data[i * self.n..(i + 1) * self.n];
            let line = row.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(",");
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// Dense rectangular matrix, used for the Gram-factor representations
/// Gamma = A A^T.
#[derive(Debug, Clone)]
pub struct RectMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RectMatrix {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; rows * cols];
        for i in 0..rows {
            for j in 0..cols {
                data[i * cols + j] = f(i, j);
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    /// A A^T as an exactly-symmetric matrix.
    pub fn gram(&self) -> SymMatrix {
        SymMatrix::from_fn(self.rows, |i, j| {
            let a = &self.data[i * self.cols..(i + 1) * self.cols];
            let b = &self.data[j * self.cols..(j + 1) * self.cols];
            a.iter().zip(b).map(|(x, y)| x * y).sum()
        })
    }
}

/// Taper kernels: K(0) = 1, symmetric, supported on [-1, 1], |K| <= 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelKind {
    /// Indicator of [-1, 1].
    Truncation,
    /// 1 - |x| on [-1, 1].
    Bartlett,
    /// Piecewise cubic Parzen window.
    Parzen,
}

impl KernelKind {
    pub fn eval(&self, x: f64) -> f64 {
        let a = x.abs();
        if a > 1.0 {
            return 0.0;
        }
        match self {
            KernelKind::Truncation => 1.0,
            KernelKind::Bartlett => 1.0 - a,
            KernelKind::Parzen => {
                if a <= 0.5 {
                    1.0 - 6.0 * a * a + 6.0 * a * a * a
                } else {
                    2.0 * (1.0 - a).powi(3)
                }
            }
        }
    }
}

/// Kernel plus bandwidth for the tapered estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub m: usize,
}

impl KernelSpec {
    pub fn new(kind: KernelKind, m: usize) -> Result<Self, EstimatorError> {
        if m < 1 {
            return Err(EstimatorError::BandwidthOutOfRange { m, n: usize::MAX });
        }
        Ok(Self { kind, m })
    }
}

/// Sample autocovariance `gh(k) = n^{-1} sum_{i=1}^{n-k} X_i X_{i+k}`;
/// zero when k >= n.
pub fn sample_acvf(x: &[f64], k: usize) -> Result<f64, EstimatorError> {
    let n = x.len();
    if n == 0 {
        return Err(EstimatorError::EmptySeries);
    }
    if k >= n {
        return Ok(0.0);
    }
    let acc: f64 = x[..n - k].iter().zip(&x[k..]).map(|(a, b)| a * b).sum();
    Ok(acc / n as f64)
}

/// Full-window autocovariance `g*(k) = n^{-1} sum_{i=1}^{n} X_i X_{i+k}`,
/// which needs n + k observations (2n - 1 for the full matrix).
pub fn sample_acvf_star(x: &[f64], k: usize, n: usize) -> Result<f64, EstimatorError> {
    if n == 0 {
        return Err(EstimatorError::ZeroDimension);
    }
    if k > n - 1 || x.len() < n + k {
        return Err(EstimatorError::SeriesTooShort { len: x.len(), need: n + k });
    }
    let acc: f64 = x[..n].iter().zip(&x[k..n + k]).map(|(a, b)| a * b).sum();
    Ok(acc / n as f64)
}

fn sample_acvf_all(x: &[f64]) -> Result<Vec<f64>, EstimatorError> {
    let n = x.len();
    if n == 0 {
        return Err(EstimatorError::EmptySeries);
    }
    let mut gh = Vec::with_capacity(n);
    for k in 0..n {
        let acc: f64 = x[..n - k].iter().zip(&x[k..]).map(|(a, b)| a * b).sum();
        gh.push(acc / n as f64);
    }
    Ok(gh)
}

/// Sample autocovariance matrix `((gh(|i-j|)))`; non-negative definite by
/// construction (it is a Gram matrix, see [`lag_factor`]).
pub fn build_gamma(x: &[f64]) -> Result<SymMatrix, EstimatorError> {
    let gh = sample_acvf_all(x)?;
    Ok(SymMatrix::from_toeplitz(x.len(), &gh))
}

/// Full-window matrix `((g*(|i-j|)))` of order n from 2n - 1 observations.
/// Not non-negative definite in general.
pub fn build_gamma_star(x: &[f64], n: usize) -> Result<SymMatrix, EstimatorError> {
    if n == 0 {
        return Err(EstimatorError::ZeroDimension);
    }
    if x.len() < 2 * n - 1 {
        return Err(EstimatorError::SeriesTooShort { len: x.len(), need: 2 * n - 1 });
    }
    let gs: Vec<f64> = (0..n).map(|k| sample_acvf_star(x, k, n)).collect::<Result<_, _>>()?;
    Ok(SymMatrix::from_toeplitz(n, &gs))
}

/// Type I banding: entries of the sample ACVM zeroed wherever |i-j| >= m.
/// May fail to be non-negative definite.
pub fn build_banded_i(x: &[f64], m: usize) -> Result<SymMatrix, EstimatorError> {
    let n = x.len();
    if n == 0 {
        return Err(EstimatorError::EmptySeries);
    }
    if m < 1 || m > n {
        return Err(EstimatorError::BandwidthOutOfRange { m, n });
    }
    let mut gh = sample_acvf_all(x)?;
    for item in gh.iter_mut().skip(m) {
        *item = 0.0;
    }
    Ok(SymMatrix::from_toeplitz(n, &gh))
}

/// Type II banding: the leading m x m principal submatrix of the sample ACVM
/// (inherits non-negative definiteness).
pub fn build_banded_ii(x: &[f64], m: usize) -> Result<SymMatrix, EstimatorError> {
    let n = x.len();
    if n == 0 {
        return Err(EstimatorError::EmptySeries);
    }
    if m < 1 || m > n {
        return Err(EstimatorError::BandwidthOutOfRange { m, n });
    }
    let gh = sample_acvf_all(x)?;
    Ok(SymMatrix::from_toeplitz(m, &gh[..m]))
}

/// Tapered matrix `((K((i-j)/m) gh(i-j)))`. With the truncation kernel this
/// keeps lags |k| <= m (one more lag than type I banding at equal m; both
/// conventions are kept as stated).
pub fn build_tapered(x: &[f64], kernel: &KernelSpec) -> Result<SymMatrix, EstimatorError> {
    let n = x.len();
    if n == 0 {
        return Err(EstimatorError::EmptySeries);
    }
    let gh = sample_acvf_all(x)?;
    let weighted: Vec<f64> = gh
        .iter()
        .enumerate()
        .map(|(k, &g)| kernel.kind.eval(k as f64 / kernel.m as f64) * g)
        .collect();
    Ok(SymMatrix::from_toeplitz(n, &weighted))
}

/// Theoretical ACVM `((gamma(|i-j|)))` of order n.
pub fn build_sigma(acvf: &AcvfTable, n: usize) -> Result<SymMatrix, EstimatorError> {
    if n == 0 {
        return Err(EstimatorError::ZeroDimension);
    }
    Ok(SymMatrix::from_toeplitz(n, acvf.values()))
}

/// The n x 2n lag factor A with A[i][j] = n^{-1/2} X_{j-i} for
/// 1 <= j-i <= n, zero otherwise; satisfies `build_gamma(x) = A A^T`.
pub fn lag_factor(x: &[f64]) -> Result<RectMatrix, EstimatorError> {
    let n = x.len();
    if n == 0 {
        return Err(EstimatorError::EmptySeries);
    }
    let scale = (n as f64).sqrt().recip();
    Ok(RectMatrix::from_fn(n, 2 * n, |i, j| {
        if j > i && j - i <= n {
            scale * x[j - i - 1]
        } else {
            0.0
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::eigenvalues_sym;
    use proptest::prelude::*;

    #[test]
    fn acvf_direct_sums() {
        let x = [1.0, 1.0, 1.0];
        assert_eq!(sample_acvf(&x, 0).unwrap(), 1.0);
        assert!((sample_acvf(&x, 1).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((sample_acvf(&x, 2).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(sample_acvf(&x, 3).unwrap(), 0.0);
        assert_eq!(sample_acvf(&x, 10).unwrap(), 0.0);
        assert_eq!(sample_acvf(&[1.0, -1.0], 1).unwrap(), -0.5);
        assert!(sample_acvf(&[], 0).is_err());
    }

    #[test]
    fn acvf_star_full_window() {
        let x = [1.0, 1.0, 1.0];
        assert_eq!(sample_acvf_star(&x, 0, 2).unwrap(), 1.0);
        assert_eq!(sample_acvf_star(&x, 1, 2).unwrap(), 1.0);
        // Constant series: g*(k) = c^2 for all feasible k.
        let c = 2.5;
        let xc = vec![c; 9]; // n = 5, k <= 4
        for k in 0..5 {
            assert!((sample_acvf_star(&xc, k, 5).unwrap() - c * c).abs() < 1e-12);
        }
        // k = 0 coincides with the triangular estimate on X_1..X_n.
        let y = [0.3, -1.2, 0.7, 2.0, -0.4];
        let a = sample_acvf_star(&y, 0, 3).unwrap();
        let b = sample_acvf(&y[..3], 0).unwrap();
        assert!((a - b).abs() < 1e-15);
        assert!(sample_acvf_star(&x, 2, 2).is_err());
    }

    #[test]
    fn gamma_two_by_two() {
        let g = build_gamma(&[1.0, 1.0]).unwrap();
        assert_eq!(g.get(0, 0), 1.0);
        assert_eq!(g.get(0, 1), 0.5);
        let eigs = eigenvalues_sym(&g).unwrap();
        assert!((eigs[0] - 0.5).abs() < 1e-12 && (eigs[1] - 1.5).abs() < 1e-12);
        let g1 = build_gamma(&[3.0]).unwrap();
        assert_eq!(g1.get(0, 0), 9.0);
    }

    #[test]
    fn gamma_star_examples() {
        let g = build_gamma_star(&[1.0, 1.0, 1.0], 2).unwrap();
        assert_eq!(g.get(0, 0), 1.0);
        assert_eq!(g.get(0, 1), 1.0);
        let eigs = eigenvalues_sym(&g).unwrap();
        assert!(eigs[0].abs() < 1e-12 && (eigs[1] - 2.0).abs() < 1e-12);
        let g1 = build_gamma_star(&[4.0], 1).unwrap();
        assert_eq!(g1.get(0, 0), 16.0);
        assert!(build_gamma_star(&[1.0, 2.0], 2).is_err());
    }

    #[test]
    fn banded_i_examples() {
        let x = [0.4, -1.0, 2.2, 0.9];
        let n = x.len();
        let g = build_gamma(&x).unwrap();
        let b1 = build_banded_i(&x, 1).unwrap();
        for i in 0..n {
            for j in 0..n {
                let expect = if i == j { g.get(0, 0) } else { 0.0 };
                assert_eq!(b1.get(i, j), expect);
            }
        }
        let bn = build_banded_i(&x, n).unwrap();
        assert_eq!(bn, g);
        let b2 = build_banded_i(&x, 2).unwrap();
        for i in 0..n {
            assert_eq!(b2.get(i, i), g.get(i, i));
        }
        assert!(build_banded_i(&x, 0).is_err());
        assert!(build_banded_i(&x, n + 1).is_err());
    }

    #[test]
    fn banded_ii_examples() {
        let x = [0.4, -1.0, 2.2, 0.9];
        let g = build_gamma(&x).unwrap();
        assert_eq!(build_banded_ii(&x, x.len()).unwrap(), g);
        let m1 = build_banded_ii(&x, 1).unwrap();
        assert_eq!(m1.get(0, 0), sample_acvf(&x, 0).unwrap());
        // Cauchy interlacing: top eigenvalue of the submatrix can't exceed
        // the top eigenvalue of the full matrix.
        let sub = build_banded_ii(&x, 2).unwrap();
        let top_sub = *eigenvalues_sym(&sub).unwrap().last().unwrap();
        let top = *eigenvalues_sym(&g).unwrap().last().unwrap();
        assert!(top_sub <= top + 1e-12);
    }

    #[test]
    fn tapered_examples() {
        let x = [1.0, 1.0];
        let spec = KernelSpec::new(KernelKind::Bartlett, 1).unwrap();
        let t = build_tapered(&x, &spec).unwrap();
        assert_eq!(t.get(0, 0), 1.0);
        assert_eq!(t.get(0, 1), 0.0);

        let spec2 = KernelSpec::new(KernelKind::Bartlett, 2).unwrap();
        let t2 = build_tapered(&x, &spec2).unwrap();
        assert!((t2.get(0, 1) - 0.5 * sample_acvf(&x, 1).unwrap()).abs() < 1e-15);

        // Truncation kernel with m = n keeps everything.
        let y = [0.3, -1.2, 0.7];
        let full = build_tapered(&y, &KernelSpec::new(KernelKind::Truncation, 3).unwrap()).unwrap();
        assert_eq!(full, build_gamma(&y).unwrap());
    }

    #[test]
    fn kernel_contracts() {
        for kind in [KernelKind::Truncation, KernelKind::Bartlett, KernelKind::Parzen] {
            assert_eq!(kind.eval(0.0), 1.0);
            for i in 0..=40 {
                let x = -2.0 + 4.0 * i as f64 / 40.0;
                let v = kind.eval(x);
                assert!((v - kind.eval(-x)).abs() < 1e-15, "symmetry of {kind:?}");
                assert!(v.abs() <= 1.0 + 1e-15);
                if x.abs() > 1.0 {
                    assert_eq!(v, 0.0);
                }
            }
        }
        assert!(KernelSpec::new(KernelKind::Bartlett, 0).is_err());
    }

    #[test]
    fn sigma_examples() {
        let white = AcvfTable::from_gamma(vec![1.5]);
        let s = build_sigma(&white, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(s.get(i, j), if i == j { 1.5 } else { 0.0 });
            }
        }
        let ma1 = AcvfTable::from_theta(&[1.0, 1.0]);
        let s2 = build_sigma(&ma1, 2).unwrap();
        let eigs = eigenvalues_sym(&s2).unwrap();
        assert!((eigs[0] - 1.0).abs() < 1e-12 && (eigs[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn gram_factorization_identity() {
        let x = [0.7, -0.2, 1.4, 0.1, -2.3];
        let gamma = build_gamma(&x).unwrap();
        let a = lag_factor(&x).unwrap();
        let aat = a.gram();
        let scale = gamma.get(0, 0).abs().max(1e-30);
        for i in 0..x.len() {
            for j in 0..x.len() {
                let d = (gamma.get(i, j) - aat.get(i, j)).abs();
                assert!(d <= 1e-12 * scale, "mismatch at ({i},{j}): {d}");
            }
        }
    }

    proptest! {
        #[test]
        fn gamma_factorization_holds_for_random_series(
            xs in proptest::collection::vec(-3.0f64..3.0, 1..24)
        ) {
            let gamma = build_gamma(&xs).unwrap();
            let aat = lag_factor(&xs).unwrap().gram();
            let scale = gamma.get(0, 0).abs().max(1.0);
            for i in 0..xs.len() {
                for j in 0..xs.len() {
                    prop_assert!((gamma.get(i, j) - aat.get(i, j)).abs() <= 1e-12 * scale);
                }
            }
        }

        #[test]
        fn builders_are_toeplitz_and_symmetric(
            xs in proptest::collection::vec(-2.0f64..2.0, 2..16),
            m in 1usize..8,
        ) {
            let m = m.min(xs.len());
            for mat in [
                build_gamma(&xs).unwrap(),
                build_banded_i(&xs, m).unwrap(),
                build_tapered(&xs, &KernelSpec::new(KernelKind::Parzen, m).unwrap()).unwrap(),
            ] {
                let n = mat.dim();
                for i in 0..n {
                    for j in 0..n {
                        prop_assert_eq!(mat.get(i, j), mat.get(j, i));
                        if i >= 1 && j >= 1 {
                            prop_assert_eq!(mat.get(i, j), mat.get(i - 1, j - 1));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn gamma_is_nonnegative_definite() {
        // Deterministic pseudo-random series; the Gram representation makes
        // Gamma_n NND, so the smallest eigenvalue may only be a rounding hair
        // below zero.
        let x: Vec<f64> = (0..60).map(|i| ((i * 37 % 17) as f64 - 8.0) / 5.0).collect();
        let g = build_gamma(&x).unwrap();
        let eigs = eigenvalues_sym(&g).unwrap();
        let floor = -1e-9 * g.get(0, 0) * x.len() as f64;
        assert!(eigs[0] >= floor, "min eigenvalue {}", eigs[0]);
        let b2 = build_banded_ii(&x, 20).unwrap();
        let eigs2 = eigenvalues_sym(&b2).unwrap();
        assert!(eigs2[0] >= floor);
    }
}
