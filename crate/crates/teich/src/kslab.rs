//! Harmonic projectors and Green operators for parameter families of
//! finite-dimensional operators.
//!
//! A self-adjoint positive-semidefinite operator `L` (with respect to a
//! weighted inner product given by a Gram matrix `W`) splits every vector
//! as `u = F·u + L·G·u`: `F` projects `W`-orthogonally onto `ker L` and
//! `G` is the pseudo-inverse on the complement. For a family `{L_t}` with
//! constant kernel dimension the pair `(F_t, G_t)` varies as smoothly as
//! the family; a kernel-dimension jump breaks continuity, and the module
//! detects it rather than papering over it.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KsError {
    #[error("DimensionMismatch: {0}")]
    DimensionMismatch(String),
    #[error("BadWeight: Gram matrix is not symmetric positive-definite")]
    BadWeight,
    #[error("NotSelfAdjoint: ‖W·L − Lᵀ·W‖ = {defect} exceeds tolerance")]
    NotSelfAdjoint { defect: f64 },
    #[error("NotPositiveSemidefinite: eigenvalue {eigenvalue} below tolerance")]
    NotPositiveSemidefinite { eigenvalue: f64 },
    #[error("IllConditioned: spectral gap {gap} around rank_tol {rank_tol} is below 10·rank_tol")]
    IllConditioned { gap: f64, rank_tol: f64 },
    #[error("KernelDimensionJump: kernel dimension changes from {dim_left} at t={t_left} to {dim_right} at t={t_right}")]
    KernelDimensionJump { t_left: f64, t_right: f64, dim_left: usize, dim_right: usize },
}

impl KsError {
    pub fn name(&self) -> &'static str {
        match self {
            KsError::DimensionMismatch(_) => "DimensionMismatch",
            KsError::BadWeight => "BadWeight",
            KsError::NotSelfAdjoint { .. } => "NotSelfAdjoint",
            KsError::NotPositiveSemidefinite { .. } => "NotPositiveSemidefinite",
            KsError::IllConditioned { .. } => "IllConditioned",
            KsError::KernelDimensionJump { .. } => "KernelDimensionJump",
        }
    }
}

/// Harmonic projector `F` and Green operator `G` of one operator.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorPair {
    pub f: DMatrix<f64>,
    pub g: DMatrix<f64>,
    pub weight: DMatrix<f64>,
    pub kernel_dim: usize,
    pub rank_tol: f64,
}

impl ProjectorPair {
    /// `‖u − F·u − L·G·u‖₂` for one vector.
    pub fn green_defect(&self, l: &DMatrix<f64>, u: &DVector<f64>) -> f64 {
        (u - &self.f * u - l * (&self.g * u)).norm()
    }
}

/// A family `t ↦ L_t` sampled on a parameter grid, together with the Gram
/// matrix of its inner product. No interpolation between samples.
#[derive(Debug, Clone)]
pub struct OperatorFamily {
    pub ts: Vec<f64>,
    pub ops: Vec<DMatrix<f64>>,
    pub weight: DMatrix<f64>,
}

impl OperatorFamily {
    pub fn new(ts: Vec<f64>, ops: Vec<DMatrix<f64>>, weight: DMatrix<f64>) -> Result<Self, KsError> {
        if ts.len() != ops.len() || ts.is_empty() {
            return Err(KsError::DimensionMismatch(format!(
                "{} parameters vs {} operators",
                ts.len(),
                ops.len()
            )));
        }
        let d = weight.nrows();
        for m in &ops {
            if m.nrows() != d || m.ncols() != d {
                return Err(KsError::DimensionMismatch("operator size vs weight".into()));
            }
        }
        Ok(Self { ts, ops, weight })
    }

    pub fn from_fn(
        ts: Vec<f64>,
        f: impl Fn(f64) -> DMatrix<f64>,
        weight: DMatrix<f64>,
    ) -> Result<Self, KsError> {
        let ops = ts.iter().map(|&t| f(t)).collect();
        Self::new(ts, ops, weight)
    }

    pub fn dim(&self) -> usize {
        self.weight.nrows()
    }
}

/// Symmetric square root and inverse square root of a PD Gram matrix.
fn weight_roots(w: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>), KsError> {
    if w.nrows() != w.ncols() || (w - w.transpose()).norm() > 1e-12 * w.norm().max(1.0) {
        return Err(KsError::BadWeight);
    }
    let eig = w.clone().symmetric_eigen();
    let mut sqrt_vals = eig.eigenvalues.clone();
    let mut inv_vals = eig.eigenvalues.clone();
    for i in 0..sqrt_vals.len() {
        let v = eig.eigenvalues[i];
        if v <= 1e-12 * eig.eigenvalues.amax().max(1.0) {
            return Err(KsError::BadWeight);
        }
        sqrt_vals[i] = v.sqrt();
        inv_vals[i] = 1.0 / v.sqrt();
    }
    let q = &eig.eigenvectors;
    let sqrt = q * DMatrix::from_diagonal(&sqrt_vals) * q.transpose();
    let inv = q * DMatrix::from_diagonal(&inv_vals) * q.transpose();
    Ok((sqrt, inv))
}

/// Build the projector/Green pair of one operator.
///
/// Eigenvalues below `rank_tol` count as kernel; `rank_tol` defaults to
/// `1e-9` times the largest eigenvalue. A spectral gap around the
/// threshold smaller than `10·rank_tol` is refused as ill-conditioned.
pub fn harmonic_projector(
    l: &DMatrix<f64>,
    weight: &DMatrix<f64>,
    rank_tol: Option<f64>,
) -> Result<ProjectorPair, KsError> {
    let d = l.nrows();
    if l.ncols() != d || weight.nrows() != d || weight.ncols() != d {
        return Err(KsError::DimensionMismatch("operator and weight must be square and equal".into()));
    }
    let scale = l.norm().max(1.0);
    let self_adjoint_defect = (weight * l - l.transpose() * weight).norm();
    if self_adjoint_defect > 1e-9 * scale * weight.norm() {
        return Err(KsError::NotSelfAdjoint { defect: self_adjoint_defect });
    }
    let (w_sqrt, w_inv_sqrt) = weight_roots(weight)?;
    let mut b = &w_sqrt * l * &w_inv_sqrt;
    b = (&b + &b.transpose()) * 0.5;
    let eig = b.symmetric_eigen();
    let lambda_max = eig.eigenvalues.amax();
    let rank_tol = rank_tol.unwrap_or(1e-9 * lambda_max.max(1.0e-3));
    let min_eig = eig.eigenvalues.min();
    if min_eig < -10.0 * rank_tol {
        return Err(KsError::NotPositiveSemidefinite { eigenvalue: min_eig });
    }
    let mut below: f64 = 0.0;
    let mut above = f64::INFINITY;
    let mut kernel_dim = 0usize;
    for i in 0..d {
        let v = eig.eigenvalues[i];
        if v < rank_tol {
            kernel_dim += 1;
            below = below.max(v);
        } else {
            above = above.min(v);
        }
    }
    if above.is_finite() {
        let gap = above - below;
        if gap < 10.0 * rank_tol {
            return Err(KsError::IllConditioned { gap, rank_tol });
        }
    }
    let q = &eig.eigenvectors;
    let mut proj_diag = DVector::zeros(d);
    let mut green_diag = DVector::zeros(d);
    for i in 0..d {
        if eig.eigenvalues[i] < rank_tol {
            proj_diag[i] = 1.0;
        } else {
            green_diag[i] = 1.0 / eig.eigenvalues[i];
        }
    }
    let f = &w_inv_sqrt * q * DMatrix::from_diagonal(&proj_diag) * q.transpose() * &w_sqrt;
    let g = &w_inv_sqrt * q * DMatrix::from_diagonal(&green_diag) * q.transpose() * &w_sqrt;
    Ok(ProjectorPair { f, g, weight: weight.clone(), kernel_dim, rank_tol })
}

/// Max over random unit vectors of `‖u − F·u − L·G·u‖`.
pub fn green_identity_residual(
    pair: &ProjectorPair,
    l: &DMatrix<f64>,
    trials: usize,
    rng: &mut impl Rng,
) -> f64 {
    let d = l.nrows();
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let mut u = DVector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0));
        let n = u.norm();
        if n == 0.0 {
            continue;
        }
        u /= n;
        worst = worst.max(pair.green_defect(l, &u));
    }
    worst
}

/// Per-step deviations of the projector/Green families along the grid.
#[derive(Debug, Clone)]
pub struct ContinuityReport {
    pub ts: Vec<f64>,
    pub kernel_dim: usize,
    /// `‖F_{t_{i+1}} − F_{t_i}‖_F` per step.
    pub dev_f: Vec<f64>,
    pub dev_g: Vec<f64>,
    pub pairs: Vec<ProjectorPair>,
}

impl ContinuityReport {
    pub fn max_dev_f(&self) -> f64 {
        self.dev_f.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_dev_g(&self) -> f64 {
        self.dev_g.iter().copied().fold(0.0, f64::max)
    }
}

/// Walk the family, fail on a kernel-dimension jump, and report the
/// step-to-step deviations of `F` and `G` (Frobenius norm).
pub fn projector_continuity(
    family: &OperatorFamily,
    rank_tol: Option<f64>,
) -> Result<ContinuityReport, KsError> {
    let mut pairs = Vec::with_capacity(family.ts.len());
    for l in &family.ops {
        pairs.push(harmonic_projector(l, &family.weight, rank_tol)?);
    }
    for i in 0..pairs.len().saturating_sub(1) {
        if pairs[i].kernel_dim != pairs[i + 1].kernel_dim {
            return Err(KsError::KernelDimensionJump {
                t_left: family.ts[i],
                t_right: family.ts[i + 1],
                dim_left: pairs[i].kernel_dim,
                dim_right: pairs[i + 1].kernel_dim,
            });
        }
    }
    let dev_f: Vec<f64> =
        pairs.windows(2).map(|w| (&w[1].f - &w[0].f).norm()).collect();
    let dev_g: Vec<f64> =
        pairs.windows(2).map(|w| (&w[1].g - &w[0].g).norm()).collect();
    Ok(ContinuityReport {
        ts: family.ts.clone(),
        kernel_dim: pairs[0].kernel_dim,
        dev_f,
        dev_g,
        pairs,
    })
}

/// Stock families used by tests and the demo command.
pub mod families {
    use super::*;

    fn rotation(d: usize, t: f64) -> DMatrix<f64> {
        let mut r = DMatrix::identity(d, d);
        r[(0, 0)] = t.cos();
        r[(0, 1)] = -t.sin();
        r[(1, 0)] = t.sin();
        r[(1, 1)] = t.cos();
        r
    }

    /// `L_t = R(t)·diag(0, 1, 2, …)·R(t)ᵀ` rotating in the (0,1) plane:
    /// kernel dimension 1 for all t, projector derivative of norm √2.
    pub fn rotation_family(d: usize, ts: Vec<f64>) -> OperatorFamily {
        let diag = DMatrix::from_diagonal(&DVector::from_fn(d, |i, _| i as f64));
        OperatorFamily::from_fn(
            ts,
            move |t| {
                let r = rotation(d, t);
                &r * &diag * r.transpose()
            },
            DMatrix::identity(d, d),
        )
        .expect("rotation family is well formed")
    }

    /// Closed form of the rotation family's projector at parameter `t`.
    pub fn rotation_projector(d: usize, t: f64) -> DMatrix<f64> {
        let r = rotation(d, t);
        let mut p = DMatrix::zeros(d, d);
        p[(0, 0)] = 1.0;
        &r * p * r.transpose()
    }

    /// `L_t = diag(t², 1, 2, …)`: positive semidefinite for every t, with
    /// a kernel-dimension jump at t = 0.
    pub fn diagonal_crossing_family(d: usize, ts: Vec<f64>) -> OperatorFamily {
        OperatorFamily::from_fn(
            ts,
            move |t| {
                DMatrix::from_diagonal(&DVector::from_fn(d, |i, _| {
                    if i == 0 {
                        t * t
                    } else {
                        i as f64
                    }
                }))
            },
            DMatrix::identity(d, d),
        )
        .expect("diagonal family is well formed")
    }

    /// Random PSD matrix with a planted kernel of the given dimension;
    /// nonzero eigenvalues are drawn from [0.5, 2].
    pub fn planted_psd(d: usize, kernel_dim: usize, rng: &mut impl Rng) -> DMatrix<f64> {
        assert!(kernel_dim <= d);
        let raw = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
        let q = raw.qr().q();
        let eigs = DVector::from_fn(d, |i, _| {
            if i < kernel_dim {
                0.0
            } else {
                rng.gen_range(0.5..2.0)
            }
        });
        let l = &q * DMatrix::from_diagonal(&eigs) * q.transpose();
        (&l + &l.transpose()) * 0.5
    }
}
