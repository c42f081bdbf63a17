//! Sampling grids on rectangles and torus fundamental domains.
//!
//! A [`GridDomain`] is a parallelogram `origin + a·e1 + b·e2` with
//! `(a,b) ∈ [0,1]²`, sampled on an `nx × ny` lattice; periodic axes omit
//! the right endpoint so the samples tile the torus. [`MapGrid`] carries a
//! sampled map together with its Wirtinger partials `w_z`, `w_z̄` — exact
//! when built from a closed-form [`CMap`], estimated by central
//! differences otherwise.

use std::rc::Rc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GridError {
    #[error("BadDomain: {0}")]
    BadDomain(String),
    #[error("BadData: {0}")]
    BadData(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridDomain {
    pub origin: Complex64,
    pub e1: Complex64,
    pub e2: Complex64,
    pub nx: usize,
    pub ny: usize,
    pub periodic: (bool, bool),
}

impl GridDomain {
    pub fn new(
        origin: Complex64,
        e1: Complex64,
        e2: Complex64,
        nx: usize,
        ny: usize,
        periodic: (bool, bool),
    ) -> Result<Self, GridError> {
        let need_x = if periodic.0 { 2 } else { 3 };
        let need_y = if periodic.1 { 2 } else { 3 };
        if nx < need_x || ny < need_y {
            return Err(GridError::BadDomain(format!("grid {nx}×{ny} too small")));
        }
        let det = e1.re * e2.im - e1.im * e2.re;
        if det.abs() <= 1e-15 * (e1.norm() * e2.norm()).max(1e-300) {
            return Err(GridError::BadDomain("spanning vectors are collinear".into()));
        }
        Ok(Self { origin, e1, e2, nx, ny, periodic })
    }

    /// Axis-aligned rectangle `[x0, x0+w] × [y0, y0+h]`, endpoints included.
    pub fn rectangle(x0: f64, y0: f64, w: f64, h: f64, nx: usize, ny: usize) -> Result<Self, GridError> {
        Self::new(
            Complex64::new(x0, y0),
            Complex64::new(w, 0.0),
            Complex64::new(0.0, h),
            nx,
            ny,
            (false, false),
        )
    }

    /// Fundamental domain of the lattice spanned by `l1`, `l2`, periodic in
    /// both directions.
    pub fn torus(l1: Complex64, l2: Complex64, n: usize) -> Result<Self, GridError> {
        Self::new(Complex64::new(0.0, 0.0), l1, l2, n, n, (true, true))
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    fn div_x(&self) -> usize {
        if self.periodic.0 { self.nx } else { self.nx - 1 }
    }

    fn div_y(&self) -> usize {
        if self.periodic.1 { self.ny } else { self.ny - 1 }
    }

    pub fn point(&self, i: usize, j: usize) -> Complex64 {
        let a = i as f64 / self.div_x() as f64;
        let b = j as f64 / self.div_y() as f64;
        self.origin + a * self.e1 + b * self.e2
    }

    pub fn points(&self) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        (0..self.ny).flat_map(move |j| (0..self.nx).map(move |i| (self.index(i, j), self.point(i, j))))
    }

    /// Lattice coordinates `(a, b)` of a point, unclamped.
    pub fn coords_of(&self, z: Complex64) -> (f64, f64) {
        let d = z - self.origin;
        let det = self.e1.re * self.e2.im - self.e1.im * self.e2.re;
        let a = (d.re * self.e2.im - d.im * self.e2.re) / det;
        let b = (self.e1.re * d.im - self.e1.im * d.re) / det;
        (a, b)
    }

    /// Convert `(a,b)`-derivatives to Wirtinger derivatives.
    pub fn wirtinger(&self, fa: Complex64, fb: Complex64) -> (Complex64, Complex64) {
        let det = self.e1 * self.e2.conj() - self.e1.conj() * self.e2;
        let fz = (fa * self.e2.conj() - fb * self.e1.conj()) / det;
        let fzbar = (self.e1 * fb - self.e2 * fa) / det;
        (fz, fzbar)
    }
}

/// A map `ℂ → ℂ` with Wirtinger partials, evaluable anywhere.
#[derive(Clone)]
pub struct CMap {
    f: Rc<dyn Fn(Complex64) -> Complex64>,
    dz: Rc<dyn Fn(Complex64) -> Complex64>,
    dzbar: Rc<dyn Fn(Complex64) -> Complex64>,
}

impl std::fmt::Debug for CMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("CMap {..}")
    }
}

impl CMap {
    pub fn with_partials(
        f: impl Fn(Complex64) -> Complex64 + 'static,
        dz: impl Fn(Complex64) -> Complex64 + 'static,
        dzbar: impl Fn(Complex64) -> Complex64 + 'static,
    ) -> Self {
        Self { f: Rc::new(f), dz: Rc::new(dz), dzbar: Rc::new(dzbar) }
    }

    /// Wrap a bare function; partials fall back to central differences
    /// with the given step.
    pub fn numeric(f: impl Fn(Complex64) -> Complex64 + 'static, step: f64) -> Self {
        let f = Rc::new(f);
        let fz = {
            let f = f.clone();
            move |z: Complex64| {
                let fx = (f(z + step) - f(z - step)) / (2.0 * step);
                let fy = (f(z + Complex64::new(0.0, step)) - f(z - Complex64::new(0.0, step)))
                    / (2.0 * step);
                0.5 * (fx - Complex64::i() * fy)
            }
        };
        let fzbar = {
            let f = f.clone();
            move |z: Complex64| {
                let fx = (f(z + step) - f(z - step)) / (2.0 * step);
                let fy = (f(z + Complex64::new(0.0, step)) - f(z - Complex64::new(0.0, step)))
                    / (2.0 * step);
                0.5 * (fx + Complex64::i() * fy)
            }
        };
        Self { f, dz: Rc::new(fz), dzbar: Rc::new(fzbar) }
    }

    /// A holomorphic map given with its complex derivative.
    pub fn holomorphic(
        f: impl Fn(Complex64) -> Complex64 + 'static,
        df: impl Fn(Complex64) -> Complex64 + 'static,
    ) -> Self {
        Self::with_partials(f, df, |_| Complex64::new(0.0, 0.0))
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.f)(z)
    }

    pub fn dz(&self, z: Complex64) -> Complex64 {
        (self.dz)(z)
    }

    pub fn dzbar(&self, z: Complex64) -> Complex64 {
        (self.dzbar)(z)
    }

    /// Newton inversion of the map near `guess`, using the real 2×2
    /// linearization `A·δ + B·δ̄ = r`.
    pub fn invert(
        &self,
        target: Complex64,
        guess: Complex64,
        tol: f64,
        max_iter: usize,
    ) -> Option<Complex64> {
        let mut p = guess;
        for _ in 0..max_iter {
            let r = target - self.eval(p);
            if r.norm() <= tol {
                return Some(p);
            }
            let a = self.dz(p);
            let b = self.dzbar(p);
            let m00 = a.re + b.re;
            let m01 = -a.im + b.im;
            let m10 = a.im + b.im;
            let m11 = a.re - b.re;
            let det = m00 * m11 - m01 * m10;
            if det.abs() < 1e-300 {
                return None;
            }
            let u = (r.re * m11 - r.im * m01) / det;
            let v = (m00 * r.im - m10 * r.re) / det;
            p += Complex64::new(u, v);
        }
        if (target - self.eval(p)).norm() <= tol {
            Some(p)
        } else {
            None
        }
    }
}

/// A grid-sampled map with per-sample Wirtinger partials.
#[derive(Debug, Clone)]
pub struct MapGrid {
    pub domain: GridDomain,
    pub values: Vec<Complex64>,
    pub dz: Vec<Complex64>,
    pub dzbar: Vec<Complex64>,
    /// Samples excluded from reductions (the finite exceptional set of a
    /// quasi-diffeomorphism).
    pub mask: Option<Vec<bool>>,
    source: Option<CMap>,
}

impl MapGrid {
    /// Sample a closed-form map; partials come from the map itself.
    pub fn from_cmap(domain: GridDomain, map: &CMap) -> Self {
        let mut values = Vec::with_capacity(domain.len());
        let mut dz = Vec::with_capacity(domain.len());
        let mut dzbar = Vec::with_capacity(domain.len());
        for (_, z) in domain.points() {
            values.push(map.eval(z));
            dz.push(map.dz(z));
            dzbar.push(map.dzbar(z));
        }
        Self { domain, values, dz, dzbar, mask: None, source: Some(map.clone()) }
    }

    /// Sample a bare function; partials are estimated off-grid by central
    /// differences with a step proportional to the domain size.
    pub fn from_fn(domain: GridDomain, f: impl Fn(Complex64) -> Complex64 + 'static) -> Self {
        let scale = domain.e1.norm().max(domain.e2.norm());
        let map = CMap::numeric(f, 1e-4 * scale);
        Self::from_cmap(domain, &map)
    }

    /// Assemble a grid from precomputed values and partials (e.g. the
    /// spectral derivatives of a solver output).
    pub fn from_parts(
        domain: GridDomain,
        values: Vec<Complex64>,
        dz: Vec<Complex64>,
        dzbar: Vec<Complex64>,
    ) -> Result<Self, GridError> {
        if values.len() != domain.len() || dz.len() != domain.len() || dzbar.len() != domain.len() {
            return Err(GridError::BadData("values/partials length mismatch".into()));
        }
        Ok(Self { domain, values, dz, dzbar, mask: None, source: None })
    }

    /// Wrap raw samples; partials use grid-step central differences,
    /// wrapping on periodic axes and falling back to second-order
    /// one-sided stencils at open boundaries.
    pub fn from_samples(domain: GridDomain, values: Vec<Complex64>) -> Result<Self, GridError> {
        if values.len() != domain.len() {
            return Err(GridError::BadData(format!(
                "expected {} samples, got {}",
                domain.len(),
                values.len()
            )));
        }
        let (dz, dzbar) = grid_partials(&domain, &values);
        Ok(Self { domain, values, dz, dzbar, mask: None, source: None })
    }

    pub fn with_mask(mut self, mask: Vec<bool>) -> Result<Self, GridError> {
        if mask.len() != self.domain.len() {
            return Err(GridError::BadData("mask length mismatch".into()));
        }
        self.mask = Some(mask);
        Ok(self)
    }

    pub fn is_masked(&self, idx: usize) -> bool {
        self.mask.as_ref().map(|m| m[idx]).unwrap_or(false)
    }

    pub fn source(&self) -> Option<&CMap> {
        self.source.as_ref()
    }

    /// Jacobian determinant `|w_z|² − |w_z̄|²` at a sample.
    pub fn jacobian(&self, idx: usize) -> f64 {
        self.dz[idx].norm_sqr() - self.dzbar[idx].norm_sqr()
    }

    /// Evaluate off-grid: through the source map when available, otherwise
    /// by bilinear interpolation (`None` outside the domain).
    pub fn eval_at(&self, z: Complex64) -> Option<Complex64> {
        if let Some(map) = &self.source {
            return Some(map.eval(z));
        }
        let (mut a, mut b) = self.domain.coords_of(z);
        if self.domain.periodic.0 {
            a = a.rem_euclid(1.0);
        }
        if self.domain.periodic.1 {
            b = b.rem_euclid(1.0);
        }
        let eps = 1e-12;
        if !(-eps..=1.0 + eps).contains(&a) || !(-eps..=1.0 + eps).contains(&b) {
            return None;
        }
        let fx = (a.clamp(0.0, 1.0)) * self.domain.div_x() as f64;
        let fy = (b.clamp(0.0, 1.0)) * self.domain.div_y() as f64;
        let i0 = (fx.floor() as usize).min(self.domain.nx - 1);
        let j0 = (fy.floor() as usize).min(self.domain.ny - 1);
        let tx = fx - i0 as f64;
        let ty = fy - j0 as f64;
        let wrap_i = |i: usize| if self.domain.periodic.0 { i % self.domain.nx } else { i.min(self.domain.nx - 1) };
        let wrap_j = |j: usize| if self.domain.periodic.1 { j % self.domain.ny } else { j.min(self.domain.ny - 1) };
        let v = |i: usize, j: usize| self.values[self.domain.index(wrap_i(i), wrap_j(j))];
        let bottom = v(i0, j0) * (1.0 - tx) + v(i0 + 1, j0) * tx;
        let top = v(i0, j0 + 1) * (1.0 - tx) + v(i0 + 1, j0 + 1) * tx;
        Some(bottom * (1.0 - ty) + top * ty)
    }
}

fn grid_partials(domain: &GridDomain, values: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let nx = domain.nx;
    let ny = domain.ny;
    let da = 1.0 / domain.div_x() as f64;
    let db = 1.0 / domain.div_y() as f64;
    let v = |i: usize, j: usize| values[domain.index(i, j)];
    let mut dz = vec![Complex64::new(0.0, 0.0); values.len()];
    let mut dzbar = vec![Complex64::new(0.0, 0.0); values.len()];
    for j in 0..ny {
        for i in 0..nx {
            let fa = if domain.periodic.0 {
                (v((i + 1) % nx, j) - v((i + nx - 1) % nx, j)) / (2.0 * da)
            } else if i == 0 {
                (-3.0 * v(0, j) + 4.0 * v(1, j) - v(2, j)) / (2.0 * da)
            } else if i == nx - 1 {
                (3.0 * v(nx - 1, j) - 4.0 * v(nx - 2, j) + v(nx - 3, j)) / (2.0 * da)
            } else {
                (v(i + 1, j) - v(i - 1, j)) / (2.0 * da)
            };
            let fb = if domain.periodic.1 {
                (v(i, (j + 1) % ny) - v(i, (j + ny - 1) % ny)) / (2.0 * db)
            } else if j == 0 {
                (-3.0 * v(i, 0) + 4.0 * v(i, 1) - v(i, 2)) / (2.0 * db)
            } else if j == ny - 1 {
                (3.0 * v(i, ny - 1) - 4.0 * v(i, ny - 2) + v(i, ny - 3)) / (2.0 * db)
            } else {
                (v(i, j + 1) - v(i, j - 1)) / (2.0 * db)
            };
            let (z, zb) = domain.wirtinger(fa, fb);
            let idx = domain.index(i, j);
            dz[idx] = z;
            dzbar[idx] = zb;
        }
    }
    (dz, dzbar)
}

// ---------------------------------------------------------------------------
// JSON grid documents (shared by Beltrami fields and sampled maps)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainDoc {
    pub origin: [f64; 2],
    pub e1: [f64; 2],
    pub e2: [f64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridDoc {
    pub nx: usize,
    pub ny: usize,
    pub domain: DomainDoc,
    pub periodic: [bool; 2],
    /// Row-major `[re, im]` pairs.
    pub values: Vec<[f64; 2]>,
}

impl GridDoc {
    pub fn pack(domain: &GridDomain, values: &[Complex64]) -> Self {
        Self {
            nx: domain.nx,
            ny: domain.ny,
            domain: DomainDoc {
                origin: [domain.origin.re, domain.origin.im],
                e1: [domain.e1.re, domain.e1.im],
                e2: [domain.e2.re, domain.e2.im],
            },
            periodic: [domain.periodic.0, domain.periodic.1],
            values: values.iter().map(|v| [v.re, v.im]).collect(),
        }
    }

    pub fn unpack(&self) -> Result<(GridDomain, Vec<Complex64>), GridError> {
        let domain = GridDomain::new(
            Complex64::new(self.domain.origin[0], self.domain.origin[1]),
            Complex64::new(self.domain.e1[0], self.domain.e1[1]),
            Complex64::new(self.domain.e2[0], self.domain.e2[1]),
            self.nx,
            self.ny,
            (self.periodic[0], self.periodic[1]),
        )?;
        if self.values.len() != domain.len() {
            return Err(GridError::BadData(format!(
                "expected {} values, got {}",
                domain.len(),
                self.values.len()
            )));
        }
        Ok((domain, self.values.iter().map(|v| Complex64::new(v[0], v[1])).collect()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectangle_sampling_includes_endpoints() {
        let d = GridDomain::rectangle(0.0, 0.0, 2.0, 1.0, 5, 3).unwrap();
        assert_eq!(d.point(0, 0), Complex64::new(0.0, 0.0));
        assert_eq!(d.point(4, 2), Complex64::new(2.0, 1.0));
        assert_eq!(d.point(2, 1), Complex64::new(1.0, 0.5));
    }

    #[test]
    fn torus_sampling_omits_endpoint() {
        let d = GridDomain::torus(Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), 4).unwrap();
        assert_eq!(d.point(0, 0), Complex64::new(0.0, 0.0));
        assert_eq!(d.point(3, 0), Complex64::new(0.75, 0.0));
    }

    #[test]
    fn wirtinger_on_square_lattice_matches_definition() {
        let d = GridDomain::torus(Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), 4).unwrap();
        // f = z: f_a = e1, f_b = e2 ⇒ f_z = 1, f_z̄ = 0.
        let (fz, fzbar) = d.wirtinger(d.e1, d.e2);
        assert!((fz - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert!(fzbar.norm() < 1e-14);
        // f = z̄: f_a = ē1, f_b = ē2 ⇒ f_z = 0, f_z̄ = 1.
        let (fz, fzbar) = d.wirtinger(d.e1.conj(), d.e2.conj());
        assert!(fz.norm() < 1e-14);
        assert!((fzbar - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn wirtinger_on_skew_lattice() {
        let d = GridDomain::torus(Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.8), 4).unwrap();
        let (fz, fzbar) = d.wirtinger(d.e1, d.e2);
        assert!((fz - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert!(fzbar.norm() < 1e-14);
    }

    #[test]
    fn cmap_numeric_partials_are_accurate() {
        let m = CMap::numeric(|z| z * z + 3.0, 1e-4);
        let z = Complex64::new(0.7, -0.4);
        assert!((m.dz(z) - 2.0 * z).norm() < 1e-9);
        assert!(m.dzbar(z).norm() < 1e-9);
    }

    #[test]
    fn cmap_inverts_nonconformal_maps() {
        let k = 0.25;
        let m = CMap::with_partials(
            move |z| z + k * z.conj(),
            |_| Complex64::new(1.0, 0.0),
            move |_| Complex64::new(k, 0.0),
        );
        let target = Complex64::new(0.3, 0.9);
        let p = m.invert(target, Complex64::new(0.0, 0.0), 1e-14, 50).unwrap();
        assert!((m.eval(p) - target).norm() < 1e-14);
    }

    #[test]
    fn sampled_grid_partials_match_closed_form() {
        let d = GridDomain::rectangle(1.0, 1.0, 1.0, 1.0, 33, 33).unwrap();
        let values: Vec<Complex64> = d.points().map(|(_, z)| z * z).collect();
        let g = MapGrid::from_samples(d, values).unwrap();
        for (idx, z) in g.domain.points() {
            assert!((g.dz[idx] - 2.0 * z).norm() < 1e-10, "quadratic is exact for the stencils");
            assert!(g.dzbar[idx].norm() < 1e-10);
        }
    }

    #[test]
    fn bilinear_eval_reproduces_linear_maps() {
        let d = GridDomain::rectangle(-1.0, -1.0, 2.0, 2.0, 9, 9).unwrap();
        let a = Complex64::new(0.3, 0.1);
        let values: Vec<Complex64> = d.points().map(|(_, z)| a * z + z.conj()).collect();
        let g = MapGrid::from_samples(d, values).unwrap();
        let z = Complex64::new(0.123, -0.456);
        let want = a * z + z.conj();
        assert!((g.eval_at(z).unwrap() - want).norm() < 1e-12);
        assert!(g.eval_at(Complex64::new(5.0, 0.0)).is_none());
    }

    #[test]
    fn grid_doc_round_trips() {
        let d = GridDomain::torus(Complex64::new(1.0, 0.0), Complex64::new(0.2, 1.1), 4).unwrap();
        let values: Vec<Complex64> = d.points().map(|(_, z)| z).collect();
        let doc = GridDoc::pack(&d, &values);
        let text = serde_json::to_string(&doc).unwrap();
        let back: GridDoc = serde_json::from_str(&text).unwrap();
        let (d2, v2) = back.unpack().unwrap();
        assert_eq!(d2, d);
        assert_eq!(v2, values);
    }

    #[test]
    fn bad_grids_are_rejected() {
        assert!(GridDomain::rectangle(0.0, 0.0, 1.0, 1.0, 2, 3).is_err());
        assert!(GridDomain::new(
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, 0.0),
            4,
            4,
            (true, true)
        )
        .is_err());
        let d = GridDomain::rectangle(0.0, 0.0, 1.0, 1.0, 3, 3).unwrap();
        assert!(MapGrid::from_samples(d, vec![Complex64::new(0.0, 0.0); 5]).is_err());
    }
}
