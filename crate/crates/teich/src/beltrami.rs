//! Grid calculus of Beltrami coefficients.
//!
//! An orientation-preserving map `w` has local coefficient
//! `ν = w_z̄ / w_z`; it is admissible when `sup|ν| < 1`. The sup-norm here
//! is the max over grid samples, a documented stand-in for the essential
//! supremum. Dilatation is `K = (1 + ‖ν‖)/(1 − ‖ν‖)`.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::grid::{CMap, GridDoc, GridDomain, GridError, MapGrid};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BeltramiError {
    #[error("NotAdmissible: sup |ν| = {sup} is not < 1")]
    NotAdmissible { sup: f64 },
    #[error("DegenerateJacobian: |w_z|²-|w_z̄|² ≤ 0 at sample {index}")]
    DegenerateJacobian { index: usize },
    #[error("NotInverse: composition deviates from the identity by {max_error}")]
    NotInverse { max_error: f64 },
    #[error("DomainMismatch: grids live on different domains")]
    DomainMismatch,
    #[error("NeedsClosedForm: operation requires maps with closed-form sources")]
    NeedsClosedForm,
    #[error(transparent)]
    Grid(#[from] GridError),
}

impl BeltramiError {
    pub fn name(&self) -> &'static str {
        match self {
            BeltramiError::NotAdmissible { .. } => "NotAdmissible",
            BeltramiError::DegenerateJacobian { .. } => "DegenerateJacobian",
            BeltramiError::NotInverse { .. } => "NotInverse",
            BeltramiError::DomainMismatch => "DomainMismatch",
            BeltramiError::NeedsClosedForm => "NeedsClosedForm",
            BeltramiError::Grid(_) => "BadGrid",
        }
    }
}

/// Grid samples of a coefficient `ν` with `sup|ν| < 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeltramiField {
    pub domain: GridDomain,
    values: Vec<Complex64>,
    mask: Option<Vec<bool>>,
}

impl BeltramiField {
    /// Validate admissibility: strictly `sup|ν| < 1`, no epsilon slack.
    pub fn new(domain: GridDomain, values: Vec<Complex64>) -> Result<Self, BeltramiError> {
        Self::with_mask(domain, values, None)
    }

    pub fn with_mask(
        domain: GridDomain,
        values: Vec<Complex64>,
        mask: Option<Vec<bool>>,
    ) -> Result<Self, BeltramiError> {
        if values.len() != domain.len() {
            return Err(GridError::BadData(format!(
                "expected {} samples, got {}",
                domain.len(),
                values.len()
            ))
            .into());
        }
        if let Some(m) = &mask {
            if m.len() != values.len() {
                return Err(GridError::BadData("mask length mismatch".into()).into());
            }
        }
        let field = Self { domain, values, mask };
        let sup = field.sup_norm();
        if !(sup < 1.0) {
            return Err(BeltramiError::NotAdmissible { sup });
        }
        Ok(field)
    }

    pub fn constant(domain: GridDomain, c: Complex64) -> Result<Self, BeltramiError> {
        let n = domain.len();
        Self::new(domain, vec![c; n])
    }

    pub fn from_fn(
        domain: GridDomain,
        f: impl Fn(Complex64) -> Complex64,
    ) -> Result<Self, BeltramiError> {
        let values = domain.points().map(|(_, z)| f(z)).collect();
        Self::new(domain, values)
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn is_masked(&self, idx: usize) -> bool {
        self.mask.as_ref().map(|m| m[idx]).unwrap_or(false)
    }

    /// Grid sup of `|ν|` over unmasked samples.
    pub fn sup_norm(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .filter(|(i, _)| !self.is_masked(*i))
            .map(|(_, v)| v.norm())
            .fold(0.0, f64::max)
    }

    pub fn from_json_str(text: &str) -> Result<Self, BeltramiError> {
        let doc: GridDoc = serde_json::from_str(text)
            .map_err(|e| GridError::BadData(format!("invalid field JSON: {e}")))?;
        let (domain, values) = doc.unpack()?;
        Self::new(domain, values)
    }

    pub fn to_json_string(&self) -> String {
        let mut out = serde_json::to_string_pretty(&GridDoc::pack(&self.domain, &self.values))
            .expect("grid doc serializes");
        out.push('\n');
        out
    }
}

/// `sup|ν|` of a field (grid sup; the measurable sup is out of reach).
pub fn sup_norm(field: &BeltramiField) -> f64 {
    field.sup_norm()
}

/// Dilatation from a sup-norm: `(1 + s)/(1 − s)`.
pub fn dilatation_of_norm(s: f64) -> f64 {
    (1.0 + s) / (1.0 - s)
}

pub fn dilatation(field: &BeltramiField) -> f64 {
    dilatation_of_norm(field.sup_norm())
}

/// Exact dilatation of a rational sup-norm in `[0,1)`.
pub fn dilatation_exact(s: &BigRational) -> Result<BigRational, BeltramiError> {
    if s.is_negative() || *s >= BigRational::one() {
        return Err(BeltramiError::NotAdmissible {
            sup: crate::rat::rational_to_f64(s),
        });
    }
    Ok((BigRational::one() + s) / (BigRational::one() - s))
}

/// Extract `ν = w_z̄ / w_z` from a sampled map.
///
/// Masked samples (the finite exceptional set of a quasi-diffeomorphism)
/// are carried over with `ν = 0` and stay excluded from the sup.
pub fn mu_of_map(map: &MapGrid) -> Result<BeltramiField, BeltramiError> {
    let mut values = Vec::with_capacity(map.values.len());
    for idx in 0..map.values.len() {
        if map.is_masked(idx) {
            values.push(Complex64::new(0.0, 0.0));
            continue;
        }
        if map.jacobian(idx) <= 0.0 {
            return Err(BeltramiError::DegenerateJacobian { index: idx });
        }
        values.push(map.dzbar[idx] / map.dz[idx]);
    }
    BeltramiField::with_mask(map.domain.clone(), values, map.mask.clone())
}

/// The stretch `z ↦ (z + k·z̄)/(1−k)` with closed-form partials.
pub fn stretch_cmap(k: f64) -> CMap {
    CMap::with_partials(
        move |z| (z + k * z.conj()) / (1.0 - k),
        move |_| Complex64::new(1.0 / (1.0 - k), 0.0),
        move |_| Complex64::new(k / (1.0 - k), 0.0),
    )
}

/// Its inverse `z′ ↦ (z′ − k·z̄′)/(1+k)`, with coefficient `ν ≡ −k`.
pub fn stretch_inverse_cmap(k: f64) -> CMap {
    CMap::with_partials(
        move |z| (z - k * z.conj()) / (1.0 + k),
        move |_| Complex64::new(1.0 / (1.0 + k), 0.0),
        move |_| Complex64::new(-k / (1.0 + k), 0.0),
    )
}

/// Report of the inverse law `‖μ_F‖ = ‖μ_{F⁻¹}‖`.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseLawReport {
    pub norm_forward: f64,
    pub norm_inverse: f64,
    pub difference: f64,
    pub max_composition_error: f64,
}

/// Check that two sampled maps are mutually inverse and compare the
/// sup-norms of their coefficients.
///
/// The composition is tested by evaluating `inverse_map` at the forward
/// values (through its source when closed-form, bilinear interpolation
/// otherwise); forward samples whose image leaves the inverse grid are
/// skipped.
pub fn inverse_law_check(
    map: &MapGrid,
    inverse_map: &MapGrid,
    tol: f64,
) -> Result<InverseLawReport, BeltramiError> {
    let mut max_comp: f64 = 0.0;
    let mut tested = 0usize;
    for (idx, z) in map.domain.points() {
        if map.is_masked(idx) {
            continue;
        }
        if let Some(back) = inverse_map.eval_at(map.values[idx]) {
            max_comp = max_comp.max((back - z).norm());
            tested += 1;
        }
    }
    if tested == 0 || max_comp > tol {
        return Err(BeltramiError::NotInverse { max_error: max_comp });
    }
    let mu_f = mu_of_map(map)?;
    let mu_inv = mu_of_map(inverse_map)?;
    let a = mu_f.sup_norm();
    let b = mu_inv.sup_norm();
    Ok(InverseLawReport {
        norm_forward: a,
        norm_inverse: b,
        difference: (a - b).abs(),
        max_composition_error: max_comp,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompositionReport {
    pub max_deviation: f64,
    pub pass: bool,
}

/// Check that post-composing with a holomorphic `h` leaves `μ` unchanged:
/// `μ_{h∘F} = μ_F`. Returns the max pointwise deviation; an
/// orientation-reversing `h` (e.g. conjugation) fails loudly rather than
/// erroring.
pub fn composition_law_check(map: &MapGrid, post: &CMap, tol: f64) -> CompositionReport {
    let mut max_dev: f64 = 0.0;
    for idx in 0..map.values.len() {
        if map.is_masked(idx) {
            continue;
        }
        let w = map.values[idx];
        let hu = post.dz(w);
        let hub = post.dzbar(w);
        let f_z = hu * map.dz[idx] + hub * map.dzbar[idx].conj();
        let f_zbar = hu * map.dzbar[idx] + hub * map.dz[idx].conj();
        if f_z.norm() == 0.0 {
            max_dev = f64::INFINITY;
            continue;
        }
        let nu_composed = f_zbar / f_z;
        let nu = map.dzbar[idx] / map.dz[idx];
        max_dev = max_dev.max((nu_composed - nu).norm());
    }
    CompositionReport { max_deviation: max_dev, pass: max_dev < tol }
}

/// Sup over the grid of the chain-rule defect
/// `|f_z̄ − ν·f_z − (1−|ν|²)·f_w̄·conj(w_z)|`,
/// where `f_w̄` is estimated independently: `w` is inverted by Newton
/// around each sample and `f ∘ w⁻¹` is differenced in the `w`-plane.
pub fn chain_rule_residual(
    f: &MapGrid,
    w: &MapGrid,
    field: &BeltramiField,
) -> Result<f64, BeltramiError> {
    if f.domain != w.domain || field.domain != w.domain {
        return Err(BeltramiError::DomainMismatch);
    }
    let (f_src, w_src) = match (f.source(), w.source()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(BeltramiError::NeedsClosedForm),
    };
    let mut worst: f64 = 0.0;
    for (idx, z) in w.domain.points() {
        if f.is_masked(idx) || w.is_masked(idx) || field.is_masked(idx) {
            continue;
        }
        let nu = field.values()[idx];
        let lhs = f.dzbar[idx] - nu * f.dz[idx];
        let w0 = w.values[idx];
        let delta = 1e-3 * (1.0 + w0.norm());
        let g_wbar = {
            let g = |q: Complex64| {
                w_src
                    .invert(q, z, 1e-13 * (1.0 + q.norm()), 60)
                    .map(|p| f_src.eval(p))
            };
            let (gxp, gxm, gyp, gym) = match (
                g(w0 + delta),
                g(w0 - delta),
                g(w0 + Complex64::new(0.0, delta)),
                g(w0 - Complex64::new(0.0, delta)),
            ) {
                (Some(a), Some(b), Some(c), Some(d)) => (a, b, c, d),
                _ => continue,
            };
            let gx = (gxp - gxm) / (2.0 * delta);
            let gy = (gyp - gym) / (2.0 * delta);
            0.5 * (gx + Complex64::i() * gy)
        };
        let rhs = (1.0 - nu.norm_sqr()) * g_wbar * w.dz[idx].conj();
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn rect(n: usize) -> GridDomain {
        GridDomain::rectangle(-1.0, -1.0, 2.0, 2.0, n, n).unwrap()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn stretch_has_constant_coefficient_k() {
        for k in [0.0, 0.25, 0.5, 0.9] {
            let g = MapGrid::from_cmap(rect(17), &stretch_cmap(k));
            let mu = mu_of_map(&g).unwrap();
            for v in mu.values() {
                assert!((v - Complex64::new(k, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn stretch_inverse_has_coefficient_minus_k() {
        for k in [0.1, 0.5, 0.9] {
            let g = MapGrid::from_cmap(rect(17), &stretch_inverse_cmap(k));
            let mu = mu_of_map(&g).unwrap();
            for v in mu.values() {
                assert!((v - Complex64::new(-k, 0.0)).norm() < 1e-14);
            }
            assert!((mu.sup_norm() - k).abs() < 1e-14);
        }
    }

    #[test]
    fn holomorphic_map_has_vanishing_coefficient() {
        // w = z² + 3 sampled away from the critical point z = 0.
        let d = GridDomain::rectangle(1.0, 1.0, 1.0, 1.0, 33, 33).unwrap();
        let g = MapGrid::from_fn(d, |z| z * z + 3.0);
        let mu = mu_of_map(&g).unwrap();
        assert!(mu.sup_norm() < 1e-10);
    }

    #[test]
    fn sampled_polynomial_coefficient_shrinks_like_h_squared() {
        // Grid-step differencing of a holomorphic cubic leaves an O(h²)
        // coefficient; the empirical bound is 5h², decreasing in h.
        let mut sups = Vec::new();
        for m in [4u32, 5, 6] {
            let n = (1usize << m) + 1;
            let h = 2.0 / (n as f64 - 1.0);
            let d = GridDomain::rectangle(1.0, 1.0, 2.0, 2.0, n, n).unwrap();
            let values: Vec<Complex64> = d.points().map(|(_, z)| z * z * z + 2.0 * z).collect();
            let g = MapGrid::from_samples(d, values).unwrap();
            let sup = mu_of_map(&g).unwrap().sup_norm();
            assert!(sup < 5.0 * h * h, "h={h}: sup {sup}");
            sups.push(sup);
        }
        assert!(sups[1] < sups[0] && sups[2] < sups[1]);
    }

    #[test]
    fn admissibility_boundary_is_strict() {
        let d = rect(3);
        let mut values = vec![Complex64::new(0.5, 0.0); d.len()];
        values[4] = Complex64::new(0.0, 1.0); // |ν| = 1 exactly
        let err = BeltramiField::new(d.clone(), values.clone()).unwrap_err();
        assert!(matches!(err, BeltramiError::NotAdmissible { sup } if sup == 1.0));
        values[4] = Complex64::new(0.0, 1.0 - 1e-12);
        assert!(BeltramiField::new(d, values).is_ok());
    }

    #[test]
    fn masked_samples_are_excluded() {
        let d = rect(3);
        let mut values = vec![Complex64::new(0.2, 0.0); d.len()];
        values[0] = Complex64::new(5.0, 0.0);
        let mut mask = vec![false; d.len()];
        mask[0] = true;
        let f = BeltramiField::with_mask(d, values, Some(mask)).unwrap();
        assert!((f.sup_norm() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn degenerate_jacobian_is_caught() {
        let g = MapGrid::from_cmap(
            rect(5),
            &CMap::with_partials(
                |z| z.conj(),
                |_| Complex64::new(0.0, 0.0),
                |_| Complex64::new(1.0, 0.0),
            ),
        );
        assert!(matches!(mu_of_map(&g), Err(BeltramiError::DegenerateJacobian { .. })));
    }

    #[test]
    fn sup_norm_of_cosine_field_hits_grid_extremum() {
        let d = GridDomain::torus(Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), 128).unwrap();
        let f = BeltramiField::from_fn(d, |z| {
            let (x, y) = (z.re, z.im);
            Complex64::new(
                0.3 * (2.0 * std::f64::consts::PI * x).cos() * (2.0 * std::f64::consts::PI * y).cos(),
                0.0,
            )
        })
        .unwrap();
        assert!((f.sup_norm() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn dilatation_values() {
        let d = rect(3);
        let zero = BeltramiField::constant(d.clone(), Complex64::new(0.0, 0.0)).unwrap();
        assert_eq!(dilatation(&zero), 1.0);
        assert_eq!(dilatation_exact(&rat(1, 3)).unwrap(), rat(2, 1));
        assert_eq!(dilatation_exact(&rat(1, 2)).unwrap(), rat(3, 1));
        assert!(dilatation_exact(&rat(1, 1)).is_err());
        // Monotone in the norm.
        let ks: Vec<f64> = (0..10).map(|i| i as f64 / 10.0).collect();
        for w in ks.windows(2) {
            assert!(dilatation_of_norm(w[0]) < dilatation_of_norm(w[1]));
        }
    }

    #[test]
    fn inverse_law_for_the_stretch_battery() {
        for k in [0.0, 0.1, 0.3, 0.5, 0.7, 0.9] {
            let fwd = MapGrid::from_cmap(rect(17), &stretch_cmap(k));
            let inv = MapGrid::from_cmap(rect(17), &stretch_inverse_cmap(k));
            let report = inverse_law_check(&fwd, &inv, 1e-10).unwrap();
            assert!(report.difference < 1e-10, "k={k}: {report:?}");
            assert!(report.max_composition_error < 1e-12);
        }
    }

    #[test]
    fn identity_pair_has_zero_norms() {
        let id = CMap::with_partials(
            |z| z,
            |_| Complex64::new(1.0, 0.0),
            |_| Complex64::new(0.0, 0.0),
        );
        let g = MapGrid::from_cmap(rect(9), &id);
        let report = inverse_law_check(&g, &g, 1e-12).unwrap();
        assert_eq!(report.norm_forward, 0.0);
        assert_eq!(report.norm_inverse, 0.0);
    }

    #[test]
    fn mismatched_stretches_are_not_inverse() {
        let fwd = MapGrid::from_cmap(rect(9), &stretch_cmap(0.3));
        let inv = MapGrid::from_cmap(rect(9), &stretch_inverse_cmap(0.5));
        assert!(matches!(
            inverse_law_check(&fwd, &inv, 1e-10),
            Err(BeltramiError::NotInverse { .. })
        ));
    }

    #[test]
    fn composition_with_holomorphic_map_preserves_mu() {
        let k = 0.3;
        // Domain shifted so the image of the stretch avoids 0.
        let d = GridDomain::rectangle(1.0, 1.0, 1.0, 1.0, 33, 33).unwrap();
        let map = MapGrid::from_cmap(d, &stretch_cmap(k));
        let translate = CMap::holomorphic(|u| u + 5.0, |_| Complex64::new(1.0, 0.0));
        let r = composition_law_check(&map, &translate, 1e-12);
        assert!(r.pass, "translation deviation {}", r.max_deviation);
        let square = CMap::holomorphic(|u| u * u, |u| 2.0 * u);
        let r = composition_law_check(&map, &square, 1e-8);
        assert!(r.pass, "square deviation {}", r.max_deviation);
        let conj = CMap::with_partials(
            |u| u.conj(),
            |_| Complex64::new(0.0, 0.0),
            |_| Complex64::new(1.0, 0.0),
        );
        let r = composition_law_check(&map, &conj, 1e-8);
        assert!(!r.pass);
        assert!(r.max_deviation > 0.5);
    }

    #[test]
    fn chain_rule_residual_examples() {
        let k = 0.25;
        let d = rect(17);
        let w = MapGrid::from_cmap(d.clone(), &stretch_cmap_unscaled(k));
        let field = mu_of_map(&w).unwrap();

        // f = w: both sides vanish.
        let f = MapGrid::from_cmap(d.clone(), &stretch_cmap_unscaled(k));
        assert!(chain_rule_residual(&f, &w, &field).unwrap() < 1e-10);

        // f = w²: closed-form partials 2w·w_z, 2w·w_z̄.
        let fsq = CMap::with_partials(
            move |z| {
                let w = z + k * z.conj();
                w * w
            },
            move |z| 2.0 * (z + k * z.conj()),
            move |z| 2.0 * (z + k * z.conj()) * k,
        );
        let f = MapGrid::from_cmap(d.clone(), &fsq);
        assert!(chain_rule_residual(&f, &w, &field).unwrap() < 1e-10);

        // f = conj(w): the identity still holds with f_w̄ = 1.
        let fconj = CMap::with_partials(
            move |z| (z + k * z.conj()).conj(),
            move |_| Complex64::new(k, 0.0),
            move |_| Complex64::new(1.0, 0.0),
        );
        let f = MapGrid::from_cmap(d, &fconj);
        assert!(chain_rule_residual(&f, &w, &field).unwrap() < 1e-10);
    }

    /// `w = z + k·z̄` (no 1/(1−k) normalization), handy for chain-rule tests.
    fn stretch_cmap_unscaled(k: f64) -> CMap {
        CMap::with_partials(
            move |z| z + k * z.conj(),
            move |_| Complex64::new(1.0, 0.0),
            move |_| Complex64::new(k, 0.0),
        )
    }

    #[test]
    fn chain_rule_requires_matching_domains() {
        let k = 0.25;
        let w = MapGrid::from_cmap(rect(9), &stretch_cmap_unscaled(k));
        let f = MapGrid::from_cmap(rect(17), &stretch_cmap_unscaled(k));
        let field = mu_of_map(&w).unwrap();
        assert!(matches!(
            chain_rule_residual(&f, &w, &field),
            Err(BeltramiError::DomainMismatch)
        ));
    }

    #[test]
    fn field_json_round_trips_and_validates() {
        let d = GridDomain::torus(Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), 4).unwrap();
        let f = BeltramiField::constant(d, Complex64::new(0.25, 0.1)).unwrap();
        let text = f.to_json_string();
        let back = BeltramiField::from_json_str(&text).unwrap();
        assert_eq!(back, f);

        let bad = text.replace("0.25", "1.25");
        assert!(matches!(
            BeltramiField::from_json_str(&bad),
            Err(BeltramiError::NotAdmissible { .. })
        ));
    }
}
