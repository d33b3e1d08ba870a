//! Distances between spectral distributions and matrix perturbation bounds
//! for them.
//!
//! The bounded-Lipschitz distance here is Dudley's metric: the supremum of
//! `int f dP - int f dQ` over test functions with `|f| <= 1` and Lipschitz
//! constant at most 1 (both constraints separately; some texts instead bound
//! the sum). Everything downstream is calibrated to this convention.

use thiserror::Error;

use crate::estimators::{RectMatrix, SymMatrix};
use crate::spectra::EmpiricalDistribution;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("matrices must have equal dimension ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("factors must have equal shape ({0}x{1} vs {2}x{3})")]
    ShapeMismatch(usize, usize, usize, usize),
}

/// Exact bounded-Lipschitz distance plus an optimal test function sampled on
/// the union support.
#[derive(Debug, Clone)]
pub struct BLResult {
    pub distance: f64,
    /// Sorted union of the two supports.
    pub support: Vec<f64>,
    /// Values of an optimizing f at the support points; |f| <= 1, f is
    /// 1-Lipschitz between adjacent points, and sum_i (p_i - q_i) f_i equals
    /// `distance`.
    pub witness: Vec<f64>,
}

/// One linear piece of a concave piecewise-linear value function: value `v0`
/// at `x0`, extending with slope `slope` until the next piece starts.
#[derive(Debug, Clone, Copy)]
struct Piece {
    x0: f64,
    v0: f64,
    slope: f64,
}

/// Concave piecewise-linear function on [-1, 1]; slopes are non-increasing
/// across pieces.
struct Concave {
    pieces: Vec<Piece>,
}

impl Concave {
    fn linear(w: f64) -> Self {
        Self { pieces: vec![Piece { x0: -1.0, v0: -w, slope: w }] }
    }

    /// (argmax lo, argmax hi, max value).
    fn argmax(&self) -> (f64, f64, f64) {
        // Slopes are non-increasing, so the max sits where they cross zero.
        let mut lo = -1.0;
        let mut val = self.pieces[0].v0;
        let mut idx_after_pos = 0;
        for (idx, p) in self.pieces.iter().enumerate() {
            if p.slope > 0.0 {
                let xend = self.pieces.get(idx + 1).map_or(1.0, |q| q.x0);
                lo = xend;
                val = p.v0 + p.slope * (xend - p.x0);
                idx_after_pos = idx + 1;
            } else {
                break;
            }
        }
        let mut hi = lo;
        for (idx, p) in self.pieces.iter().enumerate().skip(idx_after_pos) {
            if p.slope == 0.0 {
                hi = self.pieces.get(idx + 1).map_or(1.0, |q| q.x0);
            } else {
                break;
            }
        }
        (lo, hi, val)
    }

    /// Replaces V by `f -> max_{|y - f| <= d} V(y)` restricted to [-1, 1]:
    /// the rising side shifts left by d, the falling side shifts right by d,
    /// and a plateau at the maximum bridges them.
    fn window_max(&mut self, d: f64, mlo: f64, mhi: f64, vmax: f64) {
        let mut out: Vec<Piece> = Vec::with_capacity(self.pieces.len() + 1);
        for p in &self.pieces {
            if p.slope > 0.0 {
                out.push(Piece { x0: p.x0 - d, ..*p });
            }
        }
        out.push(Piece { x0: mlo - d, v0: vmax, slope: 0.0 });
        let mut first_neg = true;
        for p in &self.pieces {
            if p.slope < 0.0 {
                if first_neg {
                    // The falling side now starts at the plateau's right edge.
                    out.push(Piece { x0: mhi + d, v0: vmax, slope: p.slope });
                    first_neg = false;
                } else {
                    out.push(Piece { x0: p.x0 + d, ..*p });
                }
            }
        }
        self.pieces = out;
        self.trim_domain();
    }

    /// Restricts the cover to [-1, 1].
    fn trim_domain(&mut self) {
        let pieces = std::mem::take(&mut self.pieces);
        let mut out: Vec<Piece> = Vec::with_capacity(pieces.len());
        for (idx, p) in pieces.iter().enumerate() {
            let xend = pieces.get(idx + 1).map_or(f64::INFINITY, |q| q.x0);
            if xend <= -1.0 || p.x0 >= 1.0 {
                continue;
            }
            let mut q = *p;
            if q.x0 < -1.0 {
                q.v0 += q.slope * (-1.0 - q.x0);
                q.x0 = -1.0;
            }
            out.push(q);
        }
        debug_assert!(!out.is_empty());
        self.pieces = out;
    }

    fn add_linear(&mut self, w: f64) {
        for p in self.pieces.iter_mut() {
            p.v0 += w * p.x0;
            p.slope += w;
        }
        // Merging exactly-equal slopes keeps the piece count in check.
        let mut merged: Vec<Piece> = Vec::with_capacity(self.pieces.len());
        for p in self.pieces.drain(..) {
            match merged.last() {
                Some(last) if last.slope == p.slope => {}
                _ => merged.push(p),
            }
        }
        self.pieces = merged;
    }
}

/// Merged union support with signed weight differences p - q.
fn union_support(p: &EmpiricalDistribution, q: &EmpiricalDistribution) -> (Vec<f64>, Vec<f64>) {
    let mut xs = Vec::with_capacity(p.len() + q.len());
    let mut ws = Vec::with_capacity(p.len() + q.len());
    let (pa, pw) = (p.atoms(), p.weights());
    let (qa, qw) = (q.atoms(), q.weights());
    let (mut i, mut j) = (0, 0);
    let mut push = |x: f64, w: f64, xs: &mut Vec<f64>, ws: &mut Vec<f64>| {
        if xs.last() == Some(&x) {
            *ws.last_mut().unwrap() += w;
        } else {
            xs.push(x);
            ws.push(w);
        }
    };
    while i < pa.len() || j < qa.len() {
        let take_p = j >= qa.len() || (i < pa.len() && pa[i] <= qa[j]);
        if take_p {
            push(pa[i], pw[i], &mut xs, &mut ws);
            i += 1;
        } else {
            push(qa[j], -qw[j], &mut xs, &mut ws);
            j += 1;
        }
    }
    (xs, ws)
}

/// Exact `d_BL(P, Q) = sup { int f dP - int f dQ : |f| <= 1, Lip(f) <= 1 }`.
///
/// On the sorted union support the Lipschitz constraint binds only between
/// adjacent atoms, so the supremum is a finite concave program. A forward
/// dynamic pass propagates concave piecewise-linear value functions and a
/// backward pass recovers an optimizing f. Cost is O(N * pieces); callers
/// with supports far beyond 10^4 points should coarsen first (see
/// [`EmpiricalDistribution::coarsen`], which perturbs the distance by at most
/// half the resolution).
pub fn dbl_empirical(p: &EmpiricalDistribution, q: &EmpiricalDistribution) -> BLResult {
    let (xs, ws) = union_support(p, q);
    let n = xs.len();
    if n == 1 {
        return BLResult { distance: 0.0, support: xs, witness: vec![0.0] };
    }

    let mut v = Concave::linear(ws[0]);
    // Per-step argmax intervals for the backward pass.
    let mut intervals: Vec<(f64, f64)> = Vec::with_capacity(n - 1);
    for i in 1..n {
        let d = xs[i] - xs[i - 1];
        let (mlo, mhi, vmax) = v.argmax();
        intervals.push((mlo, mhi));
        v.window_max(d, mlo, mhi, vmax);
        v.add_linear(ws[i]);
    }
    let (mlo, mhi, vmax) = v.argmax();
    // f = 0 is always feasible, so the optimum is never negative.
    let distance = vmax.max(0.0);

    // Backward: f_i is the point of the window [f_{i+1} - d, f_{i+1} + d]
    // closest to the argmax interval of V_i (the function is concave, so
    // that point realizes the window maximum).
    let mut witness = vec![0.0; n];
    witness[n - 1] = 0.5 * (mlo + mhi);
    for i in (0..n - 1).rev() {
        let d = xs[i + 1] - xs[i];
        let (lo, hi) = intervals[i];
        let f_next = witness[i + 1];
        witness[i] = f_next.clamp(lo, hi.max(lo)).clamp(f_next - d, f_next + d);
    }
    for f in witness.iter_mut() {
        *f = f.clamp(-1.0, 1.0);
    }

    BLResult { distance, support: xs, witness }
}

/// `sqrt((1/n) Tr(A-B)^2)`; always an upper bound for the bounded-Lipschitz
/// distance between the two ESDs.
pub fn dbl_trace_bound(a: &SymMatrix, b: &SymMatrix) -> Result<f64, MetricError> {
    if a.dim() != b.dim() {
        return Err(MetricError::DimensionMismatch(a.dim(), b.dim()));
    }
    let sum_sq: f64 = a.data().iter().zip(b.data()).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok((sum_sq / a.dim() as f64).sqrt())
}

/// Gram-factor bound `sqrt((2/p^2) Tr(X + Y) Tr[(A-B)(A-B)^T])` with
/// `X = A A^T`, `Y = B B^T`; an upper bound for the bounded-Lipschitz
/// distance between the ESDs of X and Y.
pub fn dbl_gram_bound(a: &RectMatrix, b: &RectMatrix) -> Result<f64, MetricError> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(MetricError::ShapeMismatch(a.rows(), a.cols(), b.rows(), b.cols()));
    }
    let p = a.rows() as f64;
    let mut tr_xy = 0.0;
    let mut tr_diff = 0.0;
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let x = a.get(i, j);
            let y = b.get(i, j);
            tr_xy += x * x + y * y;
            tr_diff += (x - y) * (x - y);
        }
    }
    Ok((2.0 / (p * p) * tr_xy * tr_diff).sqrt())
}

/// Kolmogorov-Smirnov distance: sup-norm between the empirical CDFs.
pub fn ks_distance(p: &EmpiricalDistribution, q: &EmpiricalDistribution) -> f64 {
    let (xs, ws) = union_support(p, q);
    let mut acc: f64 = 0.0;
    let mut best: f64 = 0.0;
    for i in 0..xs.len() {
        acc += ws[i];
        best = best.max(acc.abs());
    }
    best
}
