//! The stretch deformation of a flat surface and its singular charts.
//!
//! In a flat chart the deformation is the real-linear map
//! `z′ = (z + k·z̄)/(1−k)` with `k ∈ [0,1)`; applying it to every edge
//! vector of a [`FlatSurface`] produces the deformed surface. At a cone
//! point of even order `2n` the deformed structure is uniformized by
//! `η(z) = z·((1 + k·z̄ⁿ⁺¹/zⁿ⁺¹)/(1−k))^{1/(n+1)}`, and at odd order `m`
//! by `η(z) = z·((1 + k·|z|^{m+2}/z^{m+2})/(1−k))^{2/(m+2)}`; both radicands
//! lie in the right half-plane, so the principal root is single valued.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;

use crate::flatsurf::{ConePoint, EdgeVec, FlatSurface, Polygon, Sign};
use crate::rat::{rational_to_f64, solve2x2, RatComplex};

/// Deformation parameter `k ∈ [0,1)`, with an exact mirror when rational.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformationParam {
    value: f64,
    exact: Option<BigRational>,
}

impl DeformationParam {
    pub fn new(value: f64) -> Result<Self, DeformError> {
        if !(0.0..1.0).contains(&value) {
            return Err(DeformError::BadParam(format!("k = {value} outside [0,1)")));
        }
        Ok(Self { value, exact: None })
    }

    pub fn from_rational(k: BigRational) -> Result<Self, DeformError> {
        if k.is_negative() || k >= BigRational::one() {
            return Err(DeformError::BadParam(format!("k = {k} outside [0,1)")));
        }
        Ok(Self { value: rational_to_f64(&k), exact: Some(k) })
    }

    pub fn zero() -> Self {
        Self { value: 0.0, exact: Some(BigRational::zero()) }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn exact(&self) -> Option<&BigRational> {
        self.exact.as_ref()
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0.0
    }

    /// The parameter `t·k` along a deformation path, `t ∈ [0,1]`.
    fn scaled(&self, t_num: usize, t_den: usize) -> DeformationParam {
        let t = t_num as f64 / t_den as f64;
        match &self.exact {
            Some(k) => {
                let t_exact = BigRational::new(BigInt::from(t_num), BigInt::from(t_den));
                let k_t = k * &t_exact;
                DeformationParam { value: rational_to_f64(&k_t), exact: Some(k_t) }
            }
            None => DeformationParam { value: self.value * t, exact: None },
        }
    }

    /// Dilatation `(1 + k)/(1 − k)` of the associated stretch, computed in
    /// rational arithmetic when the parameter is exact.
    pub fn dilatation(&self) -> f64 {
        match &self.exact {
            Some(k) => {
                let one = BigRational::one();
                rational_to_f64(&((&one + k) / (&one - k)))
            }
            None => (1.0 + self.value) / (1.0 - self.value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DeformError {
    #[error("NotATorus: surface is not a genus-1 parallelogram torus")]
    NotATorus,
    #[error("ChartOverlap: chart of flat radius {needed} reaches another cone point (separation {available})")]
    ChartOverlap { needed: f64, available: f64 },
    #[error("BadStep: finite-difference step {h} too large for radius {radius}")]
    BadStep { h: f64, radius: f64 },
    #[error("BadParam: {0}")]
    BadParam(String),
}

impl DeformError {
    pub fn name(&self) -> &'static str {
        match self {
            DeformError::NotATorus => "NotATorus",
            DeformError::ChartOverlap { .. } => "ChartOverlap",
            DeformError::BadStep { .. } => "BadStep",
            DeformError::BadParam(_) => "BadParam",
        }
    }
}

/// `z′ = (z + k·z̄)/(1−k)`: real-linear and orientation preserving.
pub fn affine_map(z: Complex64, k: &DeformationParam) -> Complex64 {
    (z + k.value * z.conj()) / (1.0 - k.value)
}

pub fn affine_map_exact(z: &RatComplex, k: &BigRational) -> RatComplex {
    let one_minus = BigRational::one() - k;
    let num = z + &z.conj().scale(k);
    num.scale(&(BigRational::one() / one_minus))
}

/// Invert the stretch by solving its real 2×2 linear system.
pub fn inverse_affine_map(zp: Complex64, k: &DeformationParam) -> Complex64 {
    let col_x = affine_map(Complex64::new(1.0, 0.0), k);
    let col_y = affine_map(Complex64::new(0.0, 1.0), k);
    let det = col_x.re * col_y.im - col_y.re * col_x.im;
    let x = (zp.re * col_y.im - zp.im * col_y.re) / det;
    let y = (col_x.re * zp.im - col_x.im * zp.re) / det;
    Complex64::new(x, y)
}

pub fn inverse_affine_map_exact(zp: &RatComplex, k: &BigRational) -> RatComplex {
    let one = RatComplex::new(BigRational::one(), BigRational::zero());
    let i = RatComplex::new(BigRational::zero(), BigRational::one());
    let col_x = affine_map_exact(&one, k);
    let col_y = affine_map_exact(&i, k);
    let m = [[col_x.re.clone(), col_y.re.clone()], [col_x.im.clone(), col_y.im.clone()]];
    let rhs = [zp.re.clone(), zp.im.clone()];
    let [x, y] = solve2x2(&m, &rhs).expect("stretch is invertible for k < 1");
    RatComplex::new(x, y)
}

fn map_edges(surface: &FlatSurface, k: &DeformationParam, invert: bool) -> FlatSurface {
    if k.is_zero() {
        return surface.clone();
    }
    let polygons: Vec<Polygon> = surface
        .polygons()
        .iter()
        .map(|p| Polygon {
            label: p.label.clone(),
            edges: p
                .edges
                .iter()
                .map(|e| {
                    let exact = match (&e.exact, &k.exact) {
                        (Some(z), Some(kx)) => Some(if invert {
                            inverse_affine_map_exact(z, kx)
                        } else {
                            affine_map_exact(z, kx)
                        }),
                        _ => None,
                    };
                    let approx = match &exact {
                        Some(x) => x.to_c64(),
                        None => {
                            if invert {
                                inverse_affine_map(e.approx, k)
                            } else {
                                affine_map(e.approx, k)
                            }
                        }
                    };
                    EdgeVec { approx, exact }
                })
                .collect(),
        })
        .collect();
    FlatSurface::build(polygons, surface.gluings().to_vec())
        .expect("the stretch preserves surface validity")
}

/// Apply the stretch to every edge vector. Gluing signs are unchanged
/// since the map commutes with `z ↦ −z`, and cone orders are preserved.
pub fn deform_surface(surface: &FlatSurface, k: &DeformationParam) -> FlatSurface {
    map_edges(surface, k, false)
}

/// Undo [`deform_surface`] exactly (for rational data) by solving the
/// 2×2 real-linear system per edge.
pub fn inverse_deform_surface(surface: &FlatSurface, k: &DeformationParam) -> FlatSurface {
    map_edges(surface, k, true)
}

/// Chart at an even-order zero (order `2n`): continuous at 0, takes the
/// principal `(n+1)`-st root of a right half-plane radicand.
pub fn eta_even(z: Complex64, k: &DeformationParam, n: u32) -> Complex64 {
    if z == Complex64::new(0.0, 0.0) {
        return z;
    }
    let ratio = (z.conj() / z).powu(n + 1);
    let radicand = (1.0 + k.value * ratio) / (1.0 - k.value);
    z * radicand.powf(1.0 / (n as f64 + 1.0))
}

/// Chart at an odd-order zero (order `m`): the double cover `ζ² = z`
/// reduces it to the even case, giving exponent `2/(m+2)`.
pub fn eta_odd(z: Complex64, k: &DeformationParam, m: u32) -> Complex64 {
    if z == Complex64::new(0.0, 0.0) {
        return z;
    }
    let unit = z.conj() / z.norm(); // |z|/z
    let ratio = unit.powu(m + 2);
    let radicand = (1.0 + k.value * ratio) / (1.0 - k.value);
    z * radicand.powf(2.0 / (m as f64 + 2.0))
}

/// Which chart uniformizes a neighborhood: a flat chart at a regular
/// point, or an `η` chart at a zero of even/odd order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartKind {
    Regular,
    Even { n: u32 },
    Odd { m: u32 },
}

impl ChartKind {
    pub fn for_cone(cone: &ConePoint) -> ChartKind {
        if cone.order % 2 == 0 {
            ChartKind::Even { n: cone.order / 2 }
        } else {
            ChartKind::Odd { m: cone.order }
        }
    }
}

/// Evaluate the chart of the deformed structure at a base point `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartSample {
    pub base: Complex64,
    pub value: Complex64,
    pub kind: ChartKind,
}

pub fn chart_sample(z: Complex64, k: &DeformationParam, kind: ChartKind) -> ChartSample {
    let value = match kind {
        ChartKind::Regular => affine_map(z, k),
        ChartKind::Even { n } => eta_even(z, k, n),
        ChartKind::Odd { m } => eta_odd(z, k, m),
    };
    ChartSample { base: z, value, kind }
}

const TRANSITION_SAMPLES: usize = 64;

/// Discrete Cauchy–Riemann residual `|∂T/∂q̄|` of a transition `T`
/// evaluated by central differences with step `h` in the chart variable.
fn discrete_dbar(t: impl Fn(Complex64) -> Complex64, q: Complex64, h: f64) -> f64 {
    let dx = (t(q + Complex64::new(h, 0.0)) - t(q - Complex64::new(h, 0.0))) / (2.0 * h);
    let dy = (t(q + Complex64::new(0.0, h)) - t(q - Complex64::new(0.0, h))) / (2.0 * h);
    (0.5 * (dx + Complex64::i() * dy)).norm()
}

/// Max discrete CR residual of the transition from the `η` chart at a cone
/// point to the surrounding flat `z′` charts, sampled on the circle of
/// radius `radius` (in the uniformizer plane) with step `h` (in the `η`
/// plane).
///
/// The transition is evaluated by composing the actual chart functions:
/// from an `η`-value the flat coordinate is recovered through the inverse
/// stretch and a principal root, then mapped by the `z′` chart. Since the
/// transition is holomorphic, the measured residual is the second-order
/// truncation term of the stencil and shrinks like `h²`.
pub fn chart_transition_residual(
    surface: &FlatSurface,
    k: &DeformationParam,
    cone: &ConePoint,
    radius: f64,
    h: f64,
) -> Result<f64, DeformError> {
    if !(radius > 0.0) || !(h > 0.0) {
        return Err(DeformError::BadParam("radius and h must be positive".into()));
    }
    if h > radius / 10.0 {
        return Err(DeformError::BadStep { h, radius });
    }
    let available = surface.min_corner_separation();
    let needed = radius.powf((cone.order as f64 + 2.0) / 2.0);
    if needed >= available {
        return Err(DeformError::ChartOverlap { needed, available });
    }
    Ok(match ChartKind::for_cone(cone) {
        ChartKind::Even { n } => cone_transition_residual_even(k, n, radius, h),
        ChartKind::Odd { m } => cone_transition_residual_odd(k, m, radius, h),
        ChartKind::Regular => unreachable!("cone points have order >= 1"),
    })
}

/// Even-order transition `T = z′ ∘ η⁻¹`: the flat coordinate is
/// `w = A_k⁻¹(q^{n+1})` and the `z′` chart returns `A_k` of it.
pub fn cone_transition_residual_even(k: &DeformationParam, n: u32, radius: f64, h: f64) -> f64 {
    let transition = |q: Complex64| {
        let w = inverse_affine_map(q.powu(n + 1), k);
        let z = w.powf(1.0 / (n as f64 + 1.0));
        affine_map(z.powu(n + 1), k)
    };
    let mut worst: f64 = 0.0;
    for j in 0..TRANSITION_SAMPLES {
        let theta = 2.0 * std::f64::consts::PI * j as f64 / TRANSITION_SAMPLES as f64;
        let z0 = radius * Complex64::new(theta.cos(), theta.sin());
        let q0 = eta_even(z0, k, n);
        worst = worst.max(discrete_dbar(transition, q0, h));
    }
    worst
}

/// Odd-order transition: the `z′` chart lives on the double cover, so
/// `T(q) = ±√(q^{m+2})` with the sign branch chosen continuously against
/// the chart value at the sample point.
pub fn cone_transition_residual_odd(k: &DeformationParam, m: u32, radius: f64, h: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..TRANSITION_SAMPLES {
        let theta = 2.0 * std::f64::consts::PI * j as f64 / TRANSITION_SAMPLES as f64;
        let z0 = radius * Complex64::new(theta.cos(), theta.sin());
        let zeta0 = z0.sqrt();
        let xi0 = affine_map(zeta0.powu(m + 2), k);
        let q0 = eta_odd(z0, k, m);
        let transition = |q: Complex64| {
            let s = q.powu(m + 2).sqrt();
            if (s - xi0).norm() <= (-s - xi0).norm() {
                s
            } else {
                -s
            }
        };
        worst = worst.max(discrete_dbar(transition, q0, h));
    }
    worst
}

/// Max discrete CR residual of `z′`-to-`z′` transitions across every
/// gluing. These transitions are `±q + const`, so the residual is pure
/// rounding noise regardless of `k`.
pub fn regular_transition_residual(surface: &FlatSurface, k: &DeformationParam, h: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for g in surface.gluings() {
        let pa = &surface.polygons()[g.a.poly];
        let pb = &surface.polygons()[g.b.poly];
        let va = pa.vertices();
        let vb = pb.vertices();
        let start_a = va[g.a.edge];
        let edge_a = pa.edges[g.a.edge].approx;
        let end_b = vb[(g.b.edge + 1) % pb.edges.len()];
        // w_B = sign·w_A + c maps the start of edge a to the end of edge b.
        let (s, c) = match g.sign {
            Sign::Translation => (1.0, end_b - start_a),
            Sign::Flip => (-1.0, end_b + start_a),
        };
        let transition = |q: Complex64| affine_map(s * inverse_affine_map(q, k) + c, k);
        for frac in [0.25, 0.5, 0.75] {
            let w_mid = start_a + frac * edge_a;
            let q0 = affine_map(w_mid, k);
            worst = worst.max(discrete_dbar(transition, q0, h));
        }
    }
    worst
}

/// One step of a deformation path: the parameter position `t`, the
/// deformed surface at `t·k`, and the dilatation `(1+tk)/(1−tk)`.
#[derive(Debug, Clone)]
pub struct PathSample {
    pub t: f64,
    pub dilatation: f64,
    pub surface: FlatSurface,
}

/// The straight path `t ↦ deform(S, t·k)` on a uniform `t` grid, with the
/// endpoints exactly equal to the input and to `deform_surface(S, k)`.
pub fn teich_path(
    surface: &FlatSurface,
    k: &DeformationParam,
    steps: usize,
) -> Result<Vec<PathSample>, DeformError> {
    if steps < 2 {
        return Err(DeformError::BadParam(format!("steps = {steps}, need at least 2")));
    }
    let mut out = Vec::with_capacity(steps);
    for i in 0..steps {
        let k_t = k.scaled(i, steps - 1);
        let dilatation = k_t.dilatation();
        out.push(PathSample {
            t: i as f64 / (steps - 1) as f64,
            dilatation,
            surface: deform_surface(surface, &k_t),
        });
    }
    Ok(out)
}

/// Modulus of a genus-1 surface, reduced to the standard fundamental
/// domain `|Re τ| ≤ 1/2`, `|τ| ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Modulus {
    pub approx: Complex64,
    pub exact: Option<RatComplex>,
}

/// Modulus of the lattice spanned by a parallelogram polygon's edge pair.
///
/// The surface must be genus 1 and consist of a single parallelogram with
/// opposite sides glued by translation (in any cyclic labeling).
pub fn torus_modulus(surface: &FlatSurface) -> Result<Modulus, DeformError> {
    if surface.genus() != 1 || surface.polygons().len() != 1 {
        return Err(DeformError::NotATorus);
    }
    let p = &surface.polygons()[0];
    if p.edges.len() != 4 {
        return Err(DeformError::NotATorus);
    }
    if surface.gluings().iter().any(|g| g.sign != Sign::Translation) {
        return Err(DeformError::NotATorus);
    }
    let opposite = |a: &EdgeVec, b: &EdgeVec| match (&a.exact, &b.exact) {
        (Some(x), Some(y)) => &-x == y,
        _ => {
            let scale = a.approx.norm().max(1.0);
            (a.approx + b.approx).norm() <= 1e-9 * scale
        }
    };
    if !opposite(&p.edges[0], &p.edges[2]) || !opposite(&p.edges[1], &p.edges[3]) {
        return Err(DeformError::NotATorus);
    }
    let l1 = &p.edges[0];
    let l2 = &p.edges[1];
    if let (Some(a), Some(b)) = (&l1.exact, &l2.exact) {
        let tau = reduce_modulus_exact(&(b / a));
        Ok(Modulus { approx: tau.to_c64(), exact: Some(tau) })
    } else {
        let tau = reduce_modulus(l2.approx / l1.approx);
        Ok(Modulus { approx: tau, exact: None })
    }
}

/// Gauss reduction of `τ = λ₂/λ₁` into the fundamental domain.
pub fn reduce_modulus(mut tau: Complex64) -> Complex64 {
    if tau.im < 0.0 {
        tau = -tau;
    }
    for _ in 0..256 {
        let n = tau.re.round();
        tau.re -= n;
        if tau.norm_sqr() < 1.0 - 1e-15 {
            tau = -1.0 / tau;
        } else {
            break;
        }
    }
    if (tau.re + 0.5).abs() < 1e-15 {
        tau.re = 0.5;
    }
    if (tau.norm_sqr() - 1.0).abs() < 1e-15 && tau.re < 0.0 {
        tau = -1.0 / tau;
    }
    tau
}

fn reduce_modulus_exact(tau: &RatComplex) -> RatComplex {
    let mut tau = if tau.im.is_negative() { -tau } else { tau.clone() };
    let one = BigRational::one();
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    loop {
        let n = (&tau.re + &half).floor();
        tau.re -= n;
        if tau.norm_sq() < one {
            tau = neg_recip(&tau);
        } else {
            break;
        }
    }
    if tau.re == -half {
        tau.re += BigRational::one();
    }
    if tau.norm_sq() == one && tau.re.is_negative() {
        tau = neg_recip(&tau);
    }
    tau
}

fn neg_recip(tau: &RatComplex) -> RatComplex {
    let d = tau.norm_sq();
    RatComplex::new(-&tau.re / &d, &tau.im / &d)
}

/// Measured dilatation of the stretch composed with a random doubly
/// periodic shear `z ↦ z + s(z)` on the square torus. The shear has a
/// handful of low Fourier modes with coefficients scaled so its gradient
/// stays below `amplitude`.
pub fn perturbed_affine_dilatation(
    k: &DeformationParam,
    rng: &mut impl Rng,
    grid_n: usize,
    amplitude: f64,
) -> f64 {
    let pi = std::f64::consts::PI;
    let mut modes: Vec<(f64, f64, Complex64)> = Vec::new();
    let mut weight = 0.0;
    for m in -2i32..=2 {
        for n in -2i32..=2 {
            if m == 0 && n == 0 {
                continue;
            }
            let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            weight += c.norm() * pi * (m.abs() + n.abs()) as f64;
            modes.push((m as f64, n as f64, c));
        }
    }
    let scale = amplitude / weight.max(1e-12);
    let mut sup: f64 = 0.0;
    for iy in 0..grid_n {
        for ix in 0..grid_n {
            let x = ix as f64 / grid_n as f64;
            let y = iy as f64 / grid_n as f64;
            let mut s_z = Complex64::new(0.0, 0.0);
            let mut s_zbar = Complex64::new(0.0, 0.0);
            for &(m, n, c) in &modes {
                let phase = Complex64::new(0.0, 2.0 * pi * (m * x + n * y)).exp();
                let c = scale * c;
                // ∂_z e = π(n + im)·e, ∂_z̄ e = π(im − n)·e
                s_z += c * pi * Complex64::new(n, m) * phase;
                s_zbar += c * pi * Complex64::new(-n, m) * phase;
            }
            let g_z = Complex64::new(1.0, 0.0) + s_z;
            let g_zbar = s_zbar;
            let f_z = (g_z + k.value() * g_zbar.conj()) / (1.0 - k.value());
            let f_zbar = (g_zbar + k.value() * g_z.conj()) / (1.0 - k.value());
            let nu = (f_zbar / f_z).norm();
            sup = sup.max(nu);
        }
    }
    (1.0 + sup) / (1.0 - sup)
}
