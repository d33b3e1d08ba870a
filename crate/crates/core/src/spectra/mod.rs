//! Eigenvalues, empirical spectral distributions, trace moments, and kernel
//! density grids.

mod eigen;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimators::SymMatrix;

#[derive(Debug, Error)]
pub enum SpectraError {
    #[error("matrix contains non-finite entries")]
    NonFiniteEntries,
    #[error("input must be non-empty")]
    EmptyInput,
    #[error("eigenvalue iteration failed to converge")]
    NoConvergence,
    #[error("moment order must be >= 1")]
    InvalidOrder,
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("bandwidth must be positive and finite")]
    InvalidBandwidth,
    #[error("automatic bandwidth needs at least two distinct atoms")]
    DegenerateDistribution,
    #[error("grid needs at least two points")]
    GridTooSmall,
}

/// All eigenvalues of a symmetric matrix, ascending.
pub fn eigenvalues_sym(a: &SymMatrix) -> Result<Vec<f64>, SpectraError> {
    eigen::symmetric_eigenvalues(a.data(), a.dim())
}

/// Weighted atoms on the real line; atoms are kept sorted and the weights sum
/// to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    atoms: Vec<f64>,
    weights: Vec<f64>,
}

impl EmpiricalDistribution {
    /// Uniform weights 1/n over the given atoms.
    pub fn from_atoms(mut atoms: Vec<f64>) -> Self {
        assert!(!atoms.is_empty(), "distribution needs at least one atom");
        atoms.sort_by(|a, b| a.partial_cmp(b).expect("atoms must be finite"));
        let w = 1.0 / atoms.len() as f64;
        let weights = vec![w; atoms.len()];
        Self { atoms, weights }
    }

    /// Explicit weights; they must be non-negative and sum to 1 within 1e-12.
    pub fn from_weighted(atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self, SpectraError> {
        if atoms.is_empty() || atoms.len() != weights.len() {
            return Err(SpectraError::InvalidWeights(
                "atoms and weights must be non-empty and equal-length".into(),
            ));
        }
        if weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(SpectraError::InvalidWeights("weights must be >= 0".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(SpectraError::InvalidWeights(format!("weights sum to {total}")));
        }
        let mut pairs: Vec<(f64, f64)> = atoms.into_iter().zip(weights).collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("atoms must be finite"));
        let (atoms, weights) = pairs.into_iter().unzip();
        Ok(Self { atoms, weights })
    }

    /// Pools several atom collections into one uniformly-weighted
    /// distribution (the pooled ESD of an ensemble).
    pub fn pool<'a>(parts: impl IntoIterator<Item = &'a [f64]>) -> Self {
        let mut atoms = Vec::new();
        for p in parts {
            atoms.extend_from_slice(p);
        }
        Self::from_atoms(atoms)
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.atoms[0]
    }

    pub fn max(&self) -> f64 {
        *self.atoms.last().unwrap()
    }

    /// h-th moment `sum_i w_i a_i^h`.
    pub fn moment(&self, h: u32) -> f64 {
        self.atoms
            .iter()
            .zip(&self.weights)
            .map(|(a, w)| w * a.powi(h as i32))
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    /// Probability mass at or below x.
    pub fn cdf(&self, x: f64) -> f64 {
        // atoms sorted: partition point gives count of atoms <= x
        let idx = self.atoms.partition_point(|&a| a <= x);
        self.weights[..idx].iter().sum()
    }

    /// Mass strictly above x.
    pub fn mass_above(&self, x: f64) -> f64 {
        let idx = self.atoms.partition_point(|&a| a <= x);
        self.weights[idx..].iter().sum()
    }

    /// Weighted quantile (lowest atom whose cumulative weight reaches q).
    pub fn quantile(&self, q: f64) -> f64 {
        let target = q.clamp(0.0, 1.0);
        let mut acc = 0.0;
        for (a, w) in self.atoms.iter().zip(&self.weights) {
            acc += w;
            if acc >= target {
                return *a;
            }
        }
        self.max()
    }

    /// Snaps atoms to a grid of the given spacing and merges coincident ones.
    /// Every atom moves by at most `resolution / 2`, so the bounded-Lipschitz
    /// distance between the original and the coarsened distribution is at
    /// most `resolution / 2`.
    pub fn coarsen(&self, resolution: f64) -> Self {
        assert!(resolution > 0.0);
        let mut merged: Vec<(i64, f64)> = Vec::new();
        for (a, w) in self.atoms.iter().zip(&self.weights) {
            let cell = (a / resolution).round() as i64;
            match merged.last_mut() {
                Some((c, acc)) if *c == cell => *acc += w,
                _ => merged.push((cell, *w)),
            }
        }
        let (atoms, weights): (Vec<f64>, Vec<f64>) = merged
            .into_iter()
            .map(|(c, w)| (c as f64 * resolution, w))
            .unzip();
        Self { atoms, weights }
    }

    /// Two-column CSV (atom, weight).
    pub fn write_csv<W: std::io::Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "atom,weight")?;
        for (a, w) in self.atoms.iter().zip(&self.weights) {
            writeln!(out, "{a},{w}")?;
        }
        Ok(())
    }
}

/// Empirical spectral distribution: uniform mass 1/n on the eigenvalues.
pub fn esd(eigs: &[f64]) -> EmpiricalDistribution {
    EmpiricalDistribution::from_atoms(eigs.to_vec())
}

/// `(1/n) sum_i lambda_i^h` from a sorted or unsorted eigenvalue slice.
pub fn power_moment(eigs: &[f64], h: u32) -> f64 {
    eigs.iter().map(|l| l.powi(h as i32)).sum::<f64>() / eigs.len() as f64
}

/// h-th trace moment `(1/n) Tr(A^h)`, computed as a power sum of the
/// eigenvalues. One factorization serves every h.
pub fn moment_trace(a: &SymMatrix, h: u32) -> Result<f64, SpectraError> {
    if h == 0 {
        return Err(SpectraError::InvalidOrder);
    }
    let eigs = eigenvalues_sym(a)?;
    Ok(power_moment(&eigs, h))
}

/// Gaussian kernel density estimate on an equispaced grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub bandwidth: f64,
}

impl DensityGrid {
    pub fn trapezoid_integral(&self) -> f64 {
        let mut acc = 0.0;
        for i in 1..self.grid.len() {
            acc += 0.5 * (self.values[i - 1] + self.values[i]) * (self.grid[i] - self.grid[i - 1]);
        }
        acc
    }

    /// Interprets the grid as a discrete distribution (trapezoid cell masses
    /// placed at the grid points).
    pub fn to_distribution(&self) -> Result<EmpiricalDistribution, SpectraError> {
        let n = self.grid.len();
        let mut w = vec![0.0; n];
        for i in 1..n {
            let cell = 0.5 * (self.values[i - 1] + self.values[i]) * (self.grid[i] - self.grid[i - 1]);
            w[i - 1] += 0.5 * cell;
            w[i] += 0.5 * cell;
        }
        let total: f64 = w.iter().sum();
        for x in w.iter_mut() {
            *x /= total;
        }
        EmpiricalDistribution::from_weighted(self.grid.clone(), w)
    }

    /// Two-column CSV (x, density).
    pub fn write_csv<W: std::io::Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "x,density")?;
        for (x, v) in self.grid.iter().zip(&self.values) {
            writeln!(out, "{x},{v}")?;
        }
        Ok(())
    }
}

/// Silverman's rule on the weighted atoms, with the effective sample size
/// `1 / sum w_i^2`.
fn silverman_bandwidth(dist: &EmpiricalDistribution) -> Result<f64, SpectraError> {
    let mean = dist.mean();
    let var: f64 = dist
        .atoms()
        .iter()
        .zip(dist.weights())
        .map(|(a, w)| w * (a - mean) * (a - mean))
        .sum();
    let sd = var.sqrt();
    if !(sd > 0.0) {
        return Err(SpectraError::DegenerateDistribution);
    }
    let iqr = dist.quantile(0.75) - dist.quantile(0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    let n_eff: f64 = dist.weights().iter().map(|w| w * w).sum::<f64>().recip();
    Ok(0.9 * spread * n_eff.powf(-0.2))
}

/// Gaussian-kernel density estimate over `[min - 3 bw, max + 3 bw]`. The grid
/// is renormalized so its trapezoid integral is exactly one (the +-3bw window
/// clips about 0.27% of the mass of an edge atom, which would otherwise break
/// the unit-integral contract).
pub fn kde(
    dist: &EmpiricalDistribution,
    bandwidth: Option<f64>,
    grid_size: usize,
) -> Result<DensityGrid, SpectraError> {
    if grid_size < 2 {
        return Err(SpectraError::GridTooSmall);
    }
    let bw = match bandwidth {
        Some(b) if b.is_finite() && b > 0.0 => b,
        Some(_) => return Err(SpectraError::InvalidBandwidth),
        None => silverman_bandwidth(dist)?,
    };
    let lo = dist.min() - 3.0 * bw;
    let hi = dist.max() + 3.0 * bw;
    let step = (hi - lo) / (grid_size - 1) as f64;
    let grid: Vec<f64> = (0..grid_size).map(|i| lo + i as f64 * step).collect();
    let norm = 1.0 / (bw * (2.0 * std::f64::consts::PI).sqrt());
    let mut values: Vec<f64> = grid
        .iter()
        .map(|&x| {
            dist.atoms()
                .iter()
                .zip(dist.weights())
                .map(|(a, w)| {
                    let z = (x - a) / bw;
                    w * norm * (-0.5 * z * z).exp()
                })
                .sum()
        })
        .collect();
    let raw = DensityGrid { grid, values: values.clone(), bandwidth: bw };
    let integral = raw.trapezoid_integral();
    for v in values.iter_mut() {
        *v /= integral;
    }
    Ok(DensityGrid { grid: raw.grid, values, bandwidth: bw })
}
