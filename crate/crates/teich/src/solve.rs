//! Spectral solver for the Beltrami equation `u_z̄ = ν·u_z` on flat tori.
//!
//! Solutions are sought in the gauge `u(z) = z + c₀·z̄ + φ(z)` with `φ`
//! doubly periodic and zero-mean, which pins down the solution among its
//! post-compositions with holomorphic maps. The fixed point iterates
//!
//! ```text
//! rhs = ν·(1 + φ_z),   c₀ = mean(rhs),   φ ← ∂̄⁻¹(rhs − c₀)
//! ```
//!
//! with `∂̄⁻¹` the zero-mean Fourier-multiplier inverse on the lattice;
//! the map `φ ↦ ∂̄⁻¹P₀(ν·∂_z∂̄⁻¹φ)` contracts with factor `‖ν‖`, so the
//! iteration converges for admissible fields and degrades as `‖ν‖ → 1`.
//! Input fields are low-pass filtered to the lower half of the spectrum
//! (`|m|, |n| ≤ N/4`) so the products `ν·φ_z` stay alias-free.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::beltrami::{BeltramiError, BeltramiField};
use crate::grid::{CMap, GridDomain, GridError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("NotPowerOfTwo: grid size {n} must be a power of two (≥ 4)")]
    NotPowerOfTwo { n: usize },
    #[error("NotPeriodic: the field domain must be a torus fundamental domain")]
    NotPeriodic,
    #[error("BadLattice: generators must satisfy Im(λ₂/λ₁) > 0")]
    BadLattice,
    #[error("NoConvergence: residual {residual} after {iterations} iterations")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("DegenerateDerivative: u_z vanishes at sample {index}")]
    DegenerateDerivative { index: usize },
    #[error("DomainMismatch: family slices live on different grids")]
    DomainMismatch,
    #[error(transparent)]
    Beltrami(#[from] BeltramiError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

impl SolveError {
    pub fn name(&self) -> &'static str {
        match self {
            SolveError::NotPowerOfTwo { .. } => "NotPowerOfTwo",
            SolveError::NotPeriodic => "NotPeriodic",
            SolveError::BadLattice => "BadLattice",
            SolveError::NoConvergence { .. } => "NoConvergence",
            SolveError::DegenerateDerivative { .. } => "DegenerateDerivative",
            SolveError::DomainMismatch => "DomainMismatch",
            SolveError::Beltrami(e) => e.name(),
            SolveError::Grid(_) => "BadGrid",
        }
    }
}

/// A Beltrami problem on the torus `ℂ/(ℤλ₁ + ℤλ₂)`.
///
/// Construction band-limits the coefficient and re-checks admissibility.
#[derive(Debug, Clone)]
pub struct TorusProblem {
    field: BeltramiField,
}

impl TorusProblem {
    pub fn new(field: BeltramiField) -> Result<Self, SolveError> {
        let d = &field.domain;
        if d.periodic != (true, true) {
            return Err(SolveError::NotPeriodic);
        }
        if d.nx != d.ny || !d.nx.is_power_of_two() || d.nx < 4 {
            return Err(SolveError::NotPowerOfTwo { n: d.nx });
        }
        if (d.e2 / d.e1).im <= 0.0 {
            return Err(SolveError::BadLattice);
        }
        let n = d.nx;
        let mut values = field.values().to_vec();
        let spectral = Spectral::new(n);
        spectral.forward(&mut values);
        let cutoff = (n / 4) as i64;
        for j in 0..n {
            for i in 0..n {
                let m = wavenumber(i, n);
                let l = wavenumber(j, n);
                if m.abs() > cutoff || l.abs() > cutoff {
                    values[j * n + i] = Complex64::new(0.0, 0.0);
                }
            }
        }
        spectral.inverse(&mut values);
        let field = BeltramiField::new(d.clone(), values)?;
        Ok(Self { field })
    }

    /// The band-limited coefficient actually solved against.
    pub fn field(&self) -> &BeltramiField {
        &self.field
    }

    pub fn domain(&self) -> &GridDomain {
        &self.field.domain
    }

    pub fn lattice(&self) -> (Complex64, Complex64) {
        (self.field.domain.e1, self.field.domain.e2)
    }
}

/// A converged solution `u(z) = z + c₀·z̄ + φ(z)`.
#[derive(Debug, Clone)]
pub struct Solution {
    pub domain: GridDomain,
    pub c0: Complex64,
    /// Zero-mean periodic correction, sampled on the grid.
    pub phi: Vec<Complex64>,
    /// Spectral coefficients of `φ` (kept for off-grid evaluation).
    phi_hat: Vec<Complex64>,
    pub u: Vec<Complex64>,
    pub u_z: Vec<Complex64>,
    pub u_zbar: Vec<Complex64>,
    pub iterations: usize,
    pub residual: f64,
    pub residual_history: Vec<f64>,
}

impl Solution {
    /// Evaluate `u` anywhere by trigonometric interpolation of `φ`.
    pub fn eval_u(&self, z: Complex64) -> Complex64 {
        let n = self.domain.nx;
        let (a, b) = self.domain.coords_of(z);
        let two_pi = 2.0 * std::f64::consts::PI;
        let mut phi = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let l = wavenumber(j, n) as f64;
            for i in 0..n {
                let m = wavenumber(i, n) as f64;
                let hat = self.phi_hat[j * n + i];
                if hat.norm_sqr() == 0.0 {
                    continue;
                }
                phi += hat * Complex64::new(0.0, two_pi * (m * a + l * b)).exp();
            }
        }
        z + self.c0 * z.conj() + phi
    }

    /// View the solution as a sampled map with its spectral partials, for
    /// the coefficient calculus. (Grid differencing would be wrong here:
    /// `u` is equivariant under the lattice, not periodic.)
    pub fn as_map_grid(&self) -> crate::grid::MapGrid {
        crate::grid::MapGrid::from_parts(
            self.domain.clone(),
            self.u.clone(),
            self.u_z.clone(),
            self.u_zbar.clone(),
        )
        .expect("solution arrays share one grid")
    }

    /// Max over samples of `|u_z̄ − ν·u_z|`.
    pub fn beltrami_residual(&self, field: &BeltramiField) -> f64 {
        let nu = field.values();
        self.u_z
            .iter()
            .zip(&self.u_zbar)
            .zip(nu)
            .map(|((uz, uzb), v)| (uzb - v * uz).norm())
            .fold(0.0, f64::max)
    }
}

fn wavenumber(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

struct Spectral {
    n: usize,
    fwd: std::sync::Arc<dyn rustfft::Fft<f64>>,
    inv: std::sync::Arc<dyn rustfft::Fft<f64>>,
}

impl Spectral {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { n, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) }
    }

    fn rows(&self, data: &mut [Complex64], fft: &std::sync::Arc<dyn rustfft::Fft<f64>>) {
        for row in data.chunks_exact_mut(self.n) {
            fft.process(row);
        }
    }

    fn cols(&self, data: &mut [Complex64], fft: &std::sync::Arc<dyn rustfft::Fft<f64>>) {
        let n = self.n;
        let mut scratch = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            for j in 0..n {
                scratch[j] = data[j * n + i];
            }
            fft.process(&mut scratch);
            for j in 0..n {
                data[j * n + i] = scratch[j];
            }
        }
    }

    /// Physical → spectral, normalized so index 0 holds the mean.
    fn forward(&self, data: &mut [Complex64]) {
        self.rows(data, &self.fwd);
        self.cols(data, &self.fwd);
        let scale = 1.0 / (self.n * self.n) as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    fn inverse(&self, data: &mut [Complex64]) {
        self.rows(data, &self.inv);
        self.cols(data, &self.inv);
    }
}

/// Fourier multipliers of `∂_z` and `∂_z̄` on the lattice spanned by
/// `(λ₁, λ₂)`, indexed like the spectral grid.
fn multipliers(domain: &GridDomain) -> (Vec<Complex64>, Vec<Complex64>) {
    let n = domain.nx;
    let l1 = domain.e1;
    let l2 = domain.e2;
    let det = l1 * l2.conj() - l1.conj() * l2;
    let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
    let mut dz = vec![Complex64::new(0.0, 0.0); n * n];
    let mut dzbar = vec![Complex64::new(0.0, 0.0); n * n];
    for j in 0..n {
        let nn = wavenumber(j, n) as f64;
        for i in 0..n {
            let mm = wavenumber(i, n) as f64;
            let idx = j * n + i;
            dz[idx] = two_pi_i * (mm * l2.conj() - nn * l1.conj()) / det;
            dzbar[idx] = two_pi_i * (nn * l1 - mm * l2) / det;
        }
    }
    (dz, dzbar)
}

/// Solve the Beltrami equation on a torus by the spectral fixed point.
pub fn solve_torus(
    problem: &TorusProblem,
    tol: f64,
    max_iter: usize,
) -> Result<Solution, SolveError> {
    let domain = problem.domain().clone();
    let n = domain.nx;
    let count = n * n;
    let nu = problem.field().values();
    let spectral = Spectral::new(n);
    let (mult_z, mult_zbar) = multipliers(&domain);

    let mut phi_hat = vec![Complex64::new(0.0, 0.0); count];
    let mut c0 = Complex64::new(0.0, 0.0);
    let mut history = Vec::new();
    let mut residual = f64::INFINITY;
    let mut iterations = 0;

    let mut phi_z = vec![Complex64::new(0.0, 0.0); count];
    let mut phi_zbar = vec![Complex64::new(0.0, 0.0); count];

    for iter in 1..=max_iter {
        iterations = iter;
        // φ_z from the current spectrum.
        for idx in 0..count {
            phi_z[idx] = mult_z[idx] * phi_hat[idx];
        }
        spectral.inverse(&mut phi_z);
        // rhs = ν(1 + φ_z); its mean is the new c₀.
        let mut rhs: Vec<Complex64> =
            (0..count).map(|idx| nu[idx] * (1.0 + phi_z[idx])).collect();
        spectral.forward(&mut rhs);
        c0 = rhs[0];
        phi_hat = rhs;
        phi_hat[0] = Complex64::new(0.0, 0.0);
        for idx in 1..count {
            phi_hat[idx] /= mult_zbar[idx];
        }
        // A-posteriori residual of the updated iterate.
        for idx in 0..count {
            phi_z[idx] = mult_z[idx] * phi_hat[idx];
            phi_zbar[idx] = mult_zbar[idx] * phi_hat[idx];
        }
        spectral.inverse(&mut phi_z);
        spectral.inverse(&mut phi_zbar);
        residual = (0..count)
            .map(|idx| (c0 + phi_zbar[idx] - nu[idx] * (1.0 + phi_z[idx])).norm())
            .fold(0.0, f64::max);
        history.push(residual);
        if residual < tol {
            break;
        }
    }
    if residual >= tol {
        return Err(SolveError::NoConvergence { iterations, residual });
    }

    let mut phi = phi_hat.clone();
    spectral.inverse(&mut phi);
    let mut u = Vec::with_capacity(count);
    let mut u_z = Vec::with_capacity(count);
    let mut u_zbar = Vec::with_capacity(count);
    for (idx, z) in domain.points() {
        u.push(z + c0 * z.conj() + phi[idx]);
        u_z.push(1.0 + phi_z[idx]);
        u_zbar.push(c0 + phi_zbar[idx]);
    }
    if let Some(bad) = u_z.iter().position(|v| v.norm() < 1e-12) {
        return Err(SolveError::DegenerateDerivative { index: bad });
    }
    Ok(Solution {
        domain,
        c0,
        phi,
        phi_hat,
        u,
        u_z,
        u_zbar,
        iterations,
        residual,
        residual_history: history,
    })
}

/// Solutions along a parameter family plus the measured modulus of
/// continuity between consecutive slices.
#[derive(Debug, Clone)]
pub struct FamilyReport {
    pub solutions: Vec<Solution>,
    /// `sup_z |u_{t_{i+1}} − u_{t_i}|` per consecutive pair.
    pub step_moduli: Vec<f64>,
}

impl FamilyReport {
    pub fn max_modulus(&self) -> f64 {
        self.step_moduli.iter().copied().fold(0.0, f64::max)
    }
}

pub fn solve_family(
    problems: &[TorusProblem],
    tol: f64,
    max_iter: usize,
) -> Result<FamilyReport, SolveError> {
    let mut solutions = Vec::with_capacity(problems.len());
    for p in problems {
        if p.domain() != problems[0].domain() {
            return Err(SolveError::DomainMismatch);
        }
        solutions.push(solve_torus(p, tol, max_iter)?);
    }
    let mut step_moduli = Vec::new();
    for pair in solutions.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let dc = b.c0 - a.c0;
        let sup = a
            .domain
            .points()
            .map(|(idx, z)| (dc * z.conj() + (b.phi[idx] - a.phi[idx])).norm())
            .fold(0.0, f64::max);
        step_moduli.push(sup);
    }
    Ok(FamilyReport { solutions, step_moduli })
}

/// Report of the two solution-characterization checks.
#[derive(Debug, Clone, PartialEq)]
pub struct HoloReport {
    /// (a) Beltrami residual of `h ∘ u`.
    pub residual_composition: f64,
    /// (b) `∂/∂ū` of `h ∘ u` expressed against `u`.
    pub residual_in_u: f64,
    pub pass: bool,
}

/// Check the characterization of solutions: `f` solves the equation iff
/// it is a holomorphic function of `u`. `h` is the outer map applied to
/// the solution value.
///
/// (a) forms `f = h∘u` by the chain rule and measures `sup|f_z̄ − ν·f_z|`;
/// (b) measures the conjugate derivative of `f` against `u` directly,
/// `sup |(u_z·f_z̄ − u_z̄·f_z)/(|u_z|² − |u_z̄|²)|`.
pub fn holo_in_u_check(
    h: &CMap,
    solution: &Solution,
    field: &BeltramiField,
    tol: f64,
) -> HoloReport {
    let nu = field.values();
    let mut res_a: f64 = 0.0;
    let mut res_b: f64 = 0.0;
    for idx in 0..solution.u.len() {
        let u = solution.u[idx];
        let hu = h.dz(u);
        let hub = h.dzbar(u);
        let u_z = solution.u_z[idx];
        let u_zbar = solution.u_zbar[idx];
        let f_z = hu * u_z + hub * u_zbar.conj();
        let f_zbar = hu * u_zbar + hub * u_z.conj();
        res_a = res_a.max((f_zbar - nu[idx] * f_z).norm());
        let jac = u_z.norm_sqr() - u_zbar.norm_sqr();
        res_b = res_b.max(((u_z * f_zbar - u_zbar * f_z) / jac).norm());
    }
    HoloReport {
        residual_composition: res_a,
        residual_in_u: res_b,
        pass: res_a < tol && res_b < tol,
    }
}
