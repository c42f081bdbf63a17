//! Flat polygonal models of Riemann surfaces carrying a quadratic
//! differential.
//!
//! A surface is a collection of positively oriented simple polygons whose
//! edges are identified in pairs by `z ↦ z + c` (sign `+1`) or `z ↦ −z + c`
//! (sign `−1`). Edge vectors live in the flat metric of the differential,
//! so the differential itself is implicit in the geometry: locally it is
//! `dz²` and its singular area form is Lebesgue measure. Vertex classes of
//! the identified complex get total angle `π(j+2)`; `j = 0` is a regular
//! point and `j ≥ 1` a zero of order `j`. Total angle `π` (a simple pole)
//! is rejected.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::rat::{format_rational, parse_rational, rational_sqrt, rational_to_f64, RatComplex};

/// Absolute tolerance when snapping a vertex-class angle to a multiple of π.
pub const ANGLE_TOL: f64 = 1e-9;

/// One polygon edge vector: an `f64` value plus an exact rational mirror
/// when the input was rational.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeVec {
    pub approx: Complex64,
    pub exact: Option<RatComplex>,
}

impl EdgeVec {
    pub fn from_rational(re: BigRational, im: BigRational) -> Self {
        let exact = RatComplex::new(re, im);
        Self { approx: exact.to_c64(), exact: Some(exact) }
    }

    pub fn from_ints(re: i64, im: i64) -> Self {
        Self::from_rational(
            BigRational::from_integer(BigInt::from(re)),
            BigRational::from_integer(BigInt::from(im)),
        )
    }

    pub fn from_f64(re: f64, im: f64) -> Self {
        Self { approx: Complex64::new(re, im), exact: None }
    }

    pub fn negate(&self) -> Self {
        Self { approx: -self.approx, exact: self.exact.as_ref().map(|e| -e) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    pub label: String,
    pub edges: Vec<EdgeVec>,
}

impl Polygon {
    pub fn new(label: impl Into<String>, edges: Vec<EdgeVec>) -> Self {
        Self { label: label.into(), edges }
    }

    /// Vertex positions, starting at the origin.
    pub fn vertices(&self) -> Vec<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut out = Vec::with_capacity(self.edges.len());
        for e in &self.edges {
            out.push(acc);
            acc += e.approx;
        }
        out
    }

    /// Signed shoelace area; positive for counterclockwise orientation.
    pub fn signed_area(&self) -> f64 {
        if let Some(exact) = self.signed_area_exact() {
            return rational_to_f64(&exact);
        }
        let vs = self.vertices();
        let n = vs.len();
        let mut twice = 0.0;
        for i in 0..n {
            let a = vs[i];
            let b = vs[(i + 1) % n];
            twice += a.re * b.im - a.im * b.re;
        }
        twice / 2.0
    }

    pub fn signed_area_exact(&self) -> Option<BigRational> {
        let mut acc = RatComplex::zero();
        let mut verts = Vec::with_capacity(self.edges.len());
        for e in &self.edges {
            verts.push(acc.clone());
            acc = &acc + e.exact.as_ref()?;
        }
        let n = verts.len();
        let mut twice = BigRational::zero();
        for i in 0..n {
            let a = &verts[i];
            let b = &verts[(i + 1) % n];
            twice += &a.re * &b.im - &a.im * &b.re;
        }
        Some(twice / BigRational::from_integer(BigInt::from(2)))
    }
}

/// Identification sign: `+1` glues by translation, `−1` by `z ↦ −z + c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Translation,
    Flip,
}

impl Sign {
    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Translation => 1,
            Sign::Flip => -1,
        }
    }

    pub fn from_i8(v: i8) -> Option<Self> {
        match v {
            1 => Some(Sign::Translation),
            -1 => Some(Sign::Flip),
            _ => None,
        }
    }
}

/// One side of a gluing: polygon index and edge index within it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeRef {
    pub poly: usize,
    pub edge: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Gluing {
    pub a: EdgeRef,
    pub b: EdgeRef,
    pub sign: Sign,
}

/// A vertex class of the identified complex with cone angle `π(order + 2)`
/// and `order ≥ 1`; regular classes (total angle `2π`) are not cone points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConePoint {
    pub class: usize,
    pub order: u32,
}

impl ConePoint {
    /// Cone angle as a multiple of π.
    pub fn angle_multiple(&self) -> u32 {
        self.order + 2
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FlatSurfError {
    #[error("UnknownLabel: gluing references polygon {0:?}")]
    UnknownLabel(String),
    #[error("DuplicateLabel: polygon label {0:?} used twice")]
    DuplicateLabel(String),
    #[error("EdgeIndexOutOfRange: polygon {poly:?} has no edge {edge}")]
    EdgeIndexOutOfRange { poly: String, edge: usize },
    #[error("UnmatchedEdge: polygon {poly:?} edge {edge} appears in no gluing")]
    UnmatchedEdge { poly: String, edge: usize },
    #[error("DuplicateGluing: polygon {poly:?} edge {edge} appears in more than one gluing")]
    DuplicateGluing { poly: String, edge: usize },
    #[error("VectorMismatch: glued edges {a_poly:?}#{a_edge} and {b_poly:?}#{b_edge} violate v_b = -sign*v_a")]
    VectorMismatch { a_poly: String, a_edge: usize, b_poly: String, b_edge: usize },
    #[error("NotClosed: polygon {0:?} edge vectors do not sum to zero")]
    NotClosed(String),
    #[error("NonPositiveArea: polygon {0:?} has non-positive signed area")]
    NonPositiveArea(String),
    #[error("SelfIntersecting: polygon {0:?} is not simple")]
    SelfIntersecting(String),
    #[error("SimplePoleAngle: vertex class {class} has cone angle π (simple pole)")]
    SimplePoleAngle { class: usize },
    #[error("ConeAngleNotPiMultiple: vertex class {class} angle {angle} is not a multiple of π")]
    ConeAngleNotPiMultiple { class: usize, angle: f64 },
    #[error("InvalidComplex: Euler characteristic {chi} is not of the form 2-2g")]
    InvalidComplex { chi: i64 },
    #[error("AngleGenusMismatch: sum of cone orders {order_sum} != 4g-4 = {expected}")]
    AngleGenusMismatch { order_sum: i64, expected: i64 },
    #[error("EmptyInput: need at least one polygon")]
    EmptyInput,
    #[error("BadTarget: rescale target must lie in (0,1)")]
    BadTarget,
}

impl FlatSurfError {
    /// Stable machine-readable name, used by the CLI error contract.
    pub fn name(&self) -> &'static str {
        match self {
            FlatSurfError::UnknownLabel(_) => "UnknownLabel",
            FlatSurfError::DuplicateLabel(_) => "DuplicateLabel",
            FlatSurfError::EdgeIndexOutOfRange { .. } => "EdgeIndexOutOfRange",
            FlatSurfError::UnmatchedEdge { .. } => "UnmatchedEdge",
            FlatSurfError::DuplicateGluing { .. } => "DuplicateGluing",
            FlatSurfError::VectorMismatch { .. } => "VectorMismatch",
            FlatSurfError::NotClosed(_) => "NotClosed",
            FlatSurfError::NonPositiveArea(_) => "NonPositiveArea",
            FlatSurfError::SelfIntersecting(_) => "SelfIntersecting",
            FlatSurfError::SimplePoleAngle { .. } => "SimplePoleAngle",
            FlatSurfError::ConeAngleNotPiMultiple { .. } => "ConeAngleNotPiMultiple",
            FlatSurfError::InvalidComplex { .. } => "InvalidComplex",
            FlatSurfError::AngleGenusMismatch { .. } => "AngleGenusMismatch",
            FlatSurfError::EmptyInput => "EmptyInput",
            FlatSurfError::BadTarget => "BadTarget",
        }
    }
}

/// A validated flat surface: polygons, gluings, and the derived vertex
/// classes, cone points and genus of the identified complex.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatSurface {
    polygons: Vec<Polygon>,
    gluings: Vec<Gluing>,
    /// Corners `(poly, corner)` grouped by vertex class, classes ordered by
    /// their smallest corner id so construction is deterministic.
    vertex_classes: Vec<Vec<(usize, usize)>>,
    /// Total angle of each vertex class as an integer multiple of π.
    class_angle_multiples: Vec<u32>,
    cone_points: Vec<ConePoint>,
    genus: u32,
}

impl FlatSurface {
    /// Validate polygons and gluings and compute the derived data.
    pub fn build(polygons: Vec<Polygon>, gluings: Vec<Gluing>) -> Result<Self, FlatSurfError> {
        if polygons.is_empty() {
            return Err(FlatSurfError::EmptyInput);
        }
        let mut seen = std::collections::BTreeSet::new();
        for p in &polygons {
            if !seen.insert(p.label.clone()) {
                return Err(FlatSurfError::DuplicateLabel(p.label.clone()));
            }
        }
        for g in &gluings {
            for side in [g.a, g.b] {
                let poly = polygons
                    .get(side.poly)
                    .ok_or_else(|| FlatSurfError::UnknownLabel(format!("#{}", side.poly)))?;
                if side.edge >= poly.edges.len() {
                    return Err(FlatSurfError::EdgeIndexOutOfRange {
                        poly: poly.label.clone(),
                        edge: side.edge,
                    });
                }
            }
        }
        check_gluing_cover(&polygons, &gluings)?;
        check_vector_law(&polygons, &gluings)?;
        for p in &polygons {
            check_polygon_geometry(p)?;
        }
        let vertex_classes = vertex_classes(&polygons, &gluings);
        let class_angle_multiples = class_angles(&polygons, &vertex_classes)?;
        let mut cone_points = Vec::new();
        for (class, &m) in class_angle_multiples.iter().enumerate() {
            if m == 1 {
                return Err(FlatSurfError::SimplePoleAngle { class });
            }
            if m >= 3 {
                cone_points.push(ConePoint { class, order: m - 2 });
            }
        }
        let v = vertex_classes.len() as i64;
        let e = gluings.len() as i64;
        let f = polygons.len() as i64;
        let chi = v - e + f;
        if (2 - chi) % 2 != 0 || chi > 2 {
            return Err(FlatSurfError::InvalidComplex { chi });
        }
        let genus = ((2 - chi) / 2) as u32;
        let order_sum: i64 = cone_points.iter().map(|c| c.order as i64).sum();
        let expected = 4 * genus as i64 - 4;
        if order_sum != expected {
            return Err(FlatSurfError::AngleGenusMismatch { order_sum, expected });
        }
        Ok(Self { polygons, gluings, vertex_classes, class_angle_multiples, cone_points, genus })
    }

    pub fn polygons(&self) -> &[Polygon] {
        &self.polygons
    }

    pub fn gluings(&self) -> &[Gluing] {
        &self.gluings
    }

    pub fn vertex_classes(&self) -> &[Vec<(usize, usize)>] {
        &self.vertex_classes
    }

    pub fn class_angle_multiples(&self) -> &[u32] {
        &self.class_angle_multiples
    }

    pub fn cone_points(&self) -> &[ConePoint] {
        &self.cone_points
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    /// True when every gluing is a translation and every cone order is even.
    pub fn is_translation_surface(&self) -> bool {
        self.gluings.iter().all(|g| g.sign == Sign::Translation)
            && self.cone_points.iter().all(|c| c.order % 2 == 0)
    }

    /// ‖ω‖: the total flat area of the surface.
    pub fn qd_norm(&self) -> f64 {
        if let Some(exact) = self.qd_norm_exact() {
            return rational_to_f64(&exact);
        }
        self.polygons.iter().map(|p| p.signed_area()).sum()
    }

    pub fn qd_norm_exact(&self) -> Option<BigRational> {
        let mut total = BigRational::zero();
        for p in &self.polygons {
            total += p.signed_area_exact()?;
        }
        Some(total)
    }

    /// Scale every edge vector by `factor` (areas scale by `factor²`).
    pub fn scale(&self, factor: f64) -> FlatSurface {
        let polygons = self
            .polygons
            .iter()
            .map(|p| Polygon {
                label: p.label.clone(),
                edges: p
                    .edges
                    .iter()
                    .map(|e| EdgeVec { approx: e.approx * factor, exact: None })
                    .collect(),
            })
            .collect();
        FlatSurface::build(polygons, self.gluings.clone())
            .expect("uniform scaling preserves validity")
    }

    fn scale_exact(&self, factor: &BigRational) -> Option<FlatSurface> {
        let mut polygons = Vec::with_capacity(self.polygons.len());
        for p in &self.polygons {
            let mut edges = Vec::with_capacity(p.edges.len());
            for e in &p.edges {
                let exact = e.exact.as_ref()?.scale(factor);
                edges.push(EdgeVec { approx: exact.to_c64(), exact: Some(exact) });
            }
            polygons.push(Polygon { label: p.label.clone(), edges });
        }
        Some(
            FlatSurface::build(polygons, self.gluings.clone())
                .expect("uniform scaling preserves validity"),
        )
    }

    /// Rescale so that `qd_norm` equals `target ∈ (0,1)`.
    ///
    /// When the surface is rational and `target / ‖ω‖` is a rational square
    /// the result is exact; otherwise the edge vectors are scaled in `f64`.
    pub fn rescale_to_unit_ball(&self, target: &BigRational) -> Result<FlatSurface, FlatSurfError> {
        if !target.is_positive() || *target >= BigRational::one() {
            return Err(FlatSurfError::BadTarget);
        }
        if let Some(norm) = self.qd_norm_exact() {
            let ratio = target / &norm;
            if let Some(factor) = rational_sqrt(&ratio) {
                if let Some(s) = self.scale_exact(&factor) {
                    return Ok(s);
                }
            }
        }
        let factor = (rational_to_f64(target) / self.qd_norm()).sqrt();
        Ok(self.scale(factor))
    }

    /// A lower bound for the flat distance between distinct vertex points,
    /// used to validate chart radii around cone points.
    pub fn min_corner_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for p in &self.polygons {
            let vs = p.vertices();
            for i in 0..vs.len() {
                for j in (i + 1)..vs.len() {
                    let d = (vs[i] - vs[j]).norm();
                    if d > 1e-15 && d < best {
                        best = d;
                    }
                }
            }
            for e in &p.edges {
                let d = e.approx.norm();
                if d < best {
                    best = d;
                }
            }
        }
        best
    }
}

fn check_gluing_cover(polygons: &[Polygon], gluings: &[Gluing]) -> Result<(), FlatSurfError> {
    let mut used: Vec<Vec<u32>> = polygons.iter().map(|p| vec![0; p.edges.len()]).collect();
    for g in gluings {
        for side in [g.a, g.b] {
            used[side.poly][side.edge] += 1;
        }
    }
    for (pi, counts) in used.iter().enumerate() {
        for (ei, &c) in counts.iter().enumerate() {
            if c == 0 {
                return Err(FlatSurfError::UnmatchedEdge {
                    poly: polygons[pi].label.clone(),
                    edge: ei,
                });
            }
            if c > 1 {
                return Err(FlatSurfError::DuplicateGluing {
                    poly: polygons[pi].label.clone(),
                    edge: ei,
                });
            }
        }
    }
    Ok(())
}

fn check_vector_law(polygons: &[Polygon], gluings: &[Gluing]) -> Result<(), FlatSurfError> {
    for g in gluings {
        let va = &polygons[g.a.poly].edges[g.a.edge];
        let vb = &polygons[g.b.poly].edges[g.b.edge];
        // v_b = -sign * v_a
        let want = match g.sign {
            Sign::Translation => va.negate(),
            Sign::Flip => va.clone(),
        };
        let ok = match (&want.exact, &vb.exact) {
            (Some(w), Some(v)) => w == v,
            _ => {
                let scale = va.approx.norm().max(vb.approx.norm()).max(1.0);
                (want.approx - vb.approx).norm() <= 1e-9 * scale
            }
        };
        if !ok {
            return Err(FlatSurfError::VectorMismatch {
                a_poly: polygons[g.a.poly].label.clone(),
                a_edge: g.a.edge,
                b_poly: polygons[g.b.poly].label.clone(),
                b_edge: g.b.edge,
            });
        }
    }
    Ok(())
}

fn check_polygon_geometry(p: &Polygon) -> Result<(), FlatSurfError> {
    let sum: Complex64 = p.edges.iter().map(|e| e.approx).sum();
    let scale: f64 = p.edges.iter().map(|e| e.approx.norm()).sum::<f64>().max(1.0);
    let closed_exact = p
        .edges
        .iter()
        .try_fold(RatComplex::zero(), |acc, e| e.exact.as_ref().map(|x| &acc + x))
        .map(|s| s.is_zero());
    let closed = closed_exact.unwrap_or(sum.norm() <= 1e-12 * scale);
    if !closed {
        return Err(FlatSurfError::NotClosed(p.label.clone()));
    }
    if p.edges.iter().any(|e| e.approx.norm() <= 1e-15 * scale) {
        return Err(FlatSurfError::NotClosed(p.label.clone()));
    }
    if p.signed_area() <= 0.0 {
        return Err(FlatSurfError::NonPositiveArea(p.label.clone()));
    }
    if !is_simple(p) {
        return Err(FlatSurfError::SelfIntersecting(p.label.clone()));
    }
    Ok(())
}

fn is_simple(p: &Polygon) -> bool {
    let vs = p.vertices();
    let n = vs.len();
    let scale: f64 = p.edges.iter().map(|e| e.approx.norm()).fold(0.0, f64::max);
    let eps = 1e-12 * scale * scale;
    for i in 0..n {
        for j in (i + 1)..n {
            // Skip adjacent edges; they share exactly one endpoint.
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (a, b) = (vs[i], vs[(i + 1) % n]);
            let (c, d) = (vs[j], vs[(j + 1) % n]);
            if segments_intersect(a, b, c, d, eps) {
                return false;
            }
        }
    }
    true
}

fn segments_intersect(a: Complex64, b: Complex64, c: Complex64, d: Complex64, eps: f64) -> bool {
    let cross = |u: Complex64, v: Complex64| u.re * v.im - u.im * v.re;
    let d1 = cross(b - a, c - a);
    let d2 = cross(b - a, d - a);
    let d3 = cross(d - c, a - c);
    let d4 = cross(d - c, b - c);
    if ((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps))
        && ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps))
    {
        return true;
    }
    let on_segment = |p: Complex64, q: Complex64, r: Complex64| {
        cross(q - p, r - p).abs() <= eps
            && r.re >= p.re.min(q.re) - eps
            && r.re <= p.re.max(q.re) + eps
            && r.im >= p.im.min(q.im) - eps
            && r.im <= p.im.max(q.im) + eps
    };
    on_segment(a, b, c) || on_segment(a, b, d) || on_segment(c, d, a) || on_segment(c, d, b)
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Attach the larger root under the smaller so class ids are
            // reproducible regardless of union order.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Group polygon corners into vertex classes of the identified complex.
///
/// Corner `i` of a polygon is the start point of edge `i`. For a gluing of
/// edge `a` onto edge `b` (either sign), the start of `a` is identified
/// with the end of `b` and vice versa.
fn vertex_classes(polygons: &[Polygon], gluings: &[Gluing]) -> Vec<Vec<(usize, usize)>> {
    let mut offsets = Vec::with_capacity(polygons.len());
    let mut total = 0;
    for p in polygons {
        offsets.push(total);
        total += p.edges.len();
    }
    let corner_id = |poly: usize, corner: usize| offsets[poly] + corner % polygons[poly].edges.len();
    let mut uf = UnionFind::new(total);
    for g in gluings {
        let na = polygons[g.a.poly].edges.len();
        let nb = polygons[g.b.poly].edges.len();
        let start_a = corner_id(g.a.poly, g.a.edge);
        let end_a = corner_id(g.a.poly, (g.a.edge + 1) % na);
        let start_b = corner_id(g.b.poly, g.b.edge);
        let end_b = corner_id(g.b.poly, (g.b.edge + 1) % nb);
        uf.union(start_a, end_b);
        uf.union(end_a, start_b);
    }
    let mut groups: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for (pi, p) in polygons.iter().enumerate() {
        for ci in 0..p.edges.len() {
            let root = uf.find(corner_id(pi, ci));
            groups.entry(root).or_default().push((pi, ci));
        }
    }
    groups.into_values().collect()
}

/// Interior angle at corner `ci` of polygon `p`, in `(0, 2π)`.
fn corner_angle(p: &Polygon, ci: usize) -> f64 {
    let n = p.edges.len();
    let prev = &p.edges[(ci + n - 1) % n];
    let next = &p.edges[ci];
    let (cross, dot) = match (&prev.exact, &next.exact) {
        (Some(a), Some(b)) => {
            let cross = &a.re * &b.im - &a.im * &b.re;
            let dot = &a.re * &b.re + &a.im * &b.im;
            (rational_to_f64(&cross), rational_to_f64(&dot))
        }
        _ => {
            let (a, b) = (prev.approx, next.approx);
            (a.re * b.im - a.im * b.re, a.re * b.re + a.im * b.im)
        }
    };
    std::f64::consts::PI - cross.atan2(dot)
}

fn class_angles(
    polygons: &[Polygon],
    classes: &[Vec<(usize, usize)>],
) -> Result<Vec<u32>, FlatSurfError> {
    let pi = std::f64::consts::PI;
    let mut out = Vec::with_capacity(classes.len());
    for (class, corners) in classes.iter().enumerate() {
        let total: f64 = corners.iter().map(|&(p, c)| corner_angle(&polygons[p], c)).sum();
        let multiple = (total / pi).round();
        if (total - multiple * pi).abs() > ANGLE_TOL * corners.len() as f64 || multiple < 1.0 {
            return Err(FlatSurfError::ConeAngleNotPiMultiple { class, angle: total });
        }
        out.push(multiple as u32);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// JSON document format
// ---------------------------------------------------------------------------

/// JSON form of a number: a decimal or fraction string preserves exactness;
/// a bare JSON number is kept exact only when integral.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum NumDoc {
    Text(String),
    Number(f64),
}

impl NumDoc {
    fn to_edge_part(&self) -> Result<(f64, Option<BigRational>), FlatSurfError> {
        match self {
            NumDoc::Text(s) => {
                let r = parse_rational(s)
                    .map_err(|_| FlatSurfError::UnknownLabel(format!("bad number {s:?}")))?;
                Ok((rational_to_f64(&r), Some(r)))
            }
            NumDoc::Number(v) => {
                if v.fract() == 0.0 && v.abs() < 9e15 {
                    Ok((*v, Some(BigRational::from_integer(BigInt::from(*v as i64)))))
                } else {
                    Ok((*v, None))
                }
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PolygonDoc {
    label: String,
    edges: Vec<[NumDoc; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GluingDoc {
    a: (String, usize),
    b: (String, usize),
    sign: i8,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SurfaceDoc {
    polygons: Vec<PolygonDoc>,
    gluings: Vec<GluingDoc>,
}

#[derive(Debug, thiserror::Error)]
pub enum SurfaceIoError {
    #[error("invalid surface JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Surface(#[from] FlatSurfError),
    #[error("invalid gluing sign {0} (want 1 or -1)")]
    BadSign(i8),
}

impl FlatSurface {
    pub fn from_json_str(text: &str) -> Result<Self, SurfaceIoError> {
        let doc: SurfaceDoc = serde_json::from_str(text)?;
        let mut polygons = Vec::with_capacity(doc.polygons.len());
        let mut index = BTreeMap::new();
        for (i, pd) in doc.polygons.iter().enumerate() {
            index.insert(pd.label.clone(), i);
            let mut edges = Vec::with_capacity(pd.edges.len());
            for [re, im] in &pd.edges {
                let (re_f, re_x) = re.to_edge_part()?;
                let (im_f, im_x) = im.to_edge_part()?;
                let exact = match (re_x, im_x) {
                    (Some(a), Some(b)) => Some(RatComplex::new(a, b)),
                    _ => None,
                };
                edges.push(EdgeVec { approx: Complex64::new(re_f, im_f), exact });
            }
            polygons.push(Polygon { label: pd.label.clone(), edges });
        }
        let mut gluings = Vec::with_capacity(doc.gluings.len());
        for gd in &doc.gluings {
            let a_poly = *index
                .get(&gd.a.0)
                .ok_or_else(|| FlatSurfError::UnknownLabel(gd.a.0.clone()))?;
            let b_poly = *index
                .get(&gd.b.0)
                .ok_or_else(|| FlatSurfError::UnknownLabel(gd.b.0.clone()))?;
            let sign = Sign::from_i8(gd.sign).ok_or(SurfaceIoError::BadSign(gd.sign))?;
            gluings.push(Gluing {
                a: EdgeRef { poly: a_poly, edge: gd.a.1 },
                b: EdgeRef { poly: b_poly, edge: gd.b.1 },
                sign,
            });
        }
        Ok(FlatSurface::build(polygons, gluings)?)
    }

    /// Canonical JSON form: exact edges print as decimal/fraction strings,
    /// floating edges as shortest round-trip decimal strings.
    pub fn to_json_string(&self) -> String {
        let doc = SurfaceDoc {
            polygons: self
                .polygons
                .iter()
                .map(|p| PolygonDoc {
                    label: p.label.clone(),
                    edges: p
                        .edges
                        .iter()
                        .map(|e| match &e.exact {
                            Some(x) => [
                                NumDoc::Text(format_rational(&x.re)),
                                NumDoc::Text(format_rational(&x.im)),
                            ],
                            None => [
                                NumDoc::Text(format!("{}", e.approx.re)),
                                NumDoc::Text(format!("{}", e.approx.im)),
                            ],
                        })
                        .collect(),
                })
                .collect(),
            gluings: self
                .gluings
                .iter()
                .map(|g| GluingDoc {
                    a: (self.polygons[g.a.poly].label.clone(), g.a.edge),
                    b: (self.polygons[g.b.poly].label.clone(), g.b.edge),
                    sign: g.sign.as_i8(),
                })
                .collect(),
        };
        let mut out = serde_json::to_string_pretty(&doc).expect("surface doc serializes");
        out.push('\n');
        out
    }
}

// ---------------------------------------------------------------------------
// Stock surfaces
// ---------------------------------------------------------------------------

/// Ready-made surfaces used by tests, demos and the CLI documentation.
pub mod samples {
    use super::*;

    /// The unit square torus: genus 1, no cone points, ‖ω‖ = 1.
    pub fn square_torus() -> FlatSurface {
        parallelogram_torus(RatComplex::from_ints(1, 0), RatComplex::from_ints(0, 1))
    }

    /// Torus from a parallelogram spanned by `e1`, `e2` (exact input).
    pub fn parallelogram_torus(e1: RatComplex, e2: RatComplex) -> FlatSurface {
        let edges = vec![
            EdgeVec { approx: e1.to_c64(), exact: Some(e1.clone()) },
            EdgeVec { approx: e2.to_c64(), exact: Some(e2.clone()) },
            EdgeVec { approx: -e1.to_c64(), exact: Some(-&e1) },
            EdgeVec { approx: -e2.to_c64(), exact: Some(-&e2) },
        ];
        let polygons = vec![Polygon::new("T", edges)];
        let gluings = vec![
            Gluing {
                a: EdgeRef { poly: 0, edge: 0 },
                b: EdgeRef { poly: 0, edge: 2 },
                sign: Sign::Translation,
            },
            Gluing {
                a: EdgeRef { poly: 0, edge: 1 },
                b: EdgeRef { poly: 0, edge: 3 },
                sign: Sign::Translation,
            },
        ];
        FlatSurface::build(polygons, gluings).expect("parallelogram torus is valid")
    }

    /// Regular octagon of side `side` with opposite sides identified by
    /// translation: genus 2 with a single cone point of order 4 (angle 6π).
    pub fn octagon(side: f64) -> FlatSurface {
        let edges: Vec<EdgeVec> = (0..8)
            .map(|j| {
                let theta = std::f64::consts::FRAC_PI_4 * j as f64;
                EdgeVec::from_f64(side * theta.cos(), side * theta.sin())
            })
            .collect();
        let polygons = vec![Polygon::new("O", edges)];
        let gluings = (0..4)
            .map(|j| Gluing {
                a: EdgeRef { poly: 0, edge: j },
                b: EdgeRef { poly: 0, edge: j + 4 },
                sign: Sign::Translation,
            })
            .collect();
        FlatSurface::build(polygons, gluings).expect("octagon surface is valid")
    }

    /// L-shaped translation surface (an L-tromino of unit squares): genus 2
    /// with a single cone point of order 4 (angle 6π), exact rational edges.
    pub fn l_shaped() -> FlatSurface {
        let e = |re: i64, im: i64| EdgeVec::from_ints(re, im);
        // Outline (0,0) → (1,0) → (2,0) → (2,1) → (1,1) → (1,2) → (0,2) → (0,1) → (0,0)
        let edges = vec![
            e(1, 0),  // 0: bottom left half
            e(1, 0),  // 1: bottom right half
            e(0, 1),  // 2: right side
            e(-1, 0), // 3: inner top
            e(0, 1),  // 4: inner right
            e(-1, 0), // 5: top
            e(0, -1), // 6: left upper half
            e(0, -1), // 7: left lower half
        ];
        let polygons = vec![Polygon::new("L", edges)];
        let g = |a: usize, b: usize| Gluing {
            a: EdgeRef { poly: 0, edge: a },
            b: EdgeRef { poly: 0, edge: b },
            sign: Sign::Translation,
        };
        let gluings = vec![g(0, 5), g(1, 3), g(2, 7), g(4, 6)];
        FlatSurface::build(polygons, gluings).expect("L-shaped surface is valid")
    }

    /// The pillowcase gluing of a unit square (flips on top and bottom
    /// halves). Its four vertex classes all have angle π, so construction
    /// must fail with `SimplePoleAngle`.
    pub fn pillowcase_input() -> (Vec<Polygon>, Vec<Gluing>) {
        let e = |re: i64, den: i64, im: i64| {
            EdgeVec::from_rational(
                BigRational::new(BigInt::from(re), BigInt::from(den)),
                BigRational::from_integer(BigInt::from(im)),
            )
        };
        let half = |re: i64| e(re, 2, 0);
        let edges = vec![
            half(1),                 // 0: bottom left half
            half(1),                 // 1: bottom right half
            EdgeVec::from_ints(0, 1), // 2: right
            half(-1),                // 3: top right half
            half(-1),                // 4: top left half
            EdgeVec::from_ints(0, -1), // 5: left
        ];
        let polygons = vec![Polygon::new("P", edges)];
        let gluings = vec![
            Gluing {
                a: EdgeRef { poly: 0, edge: 0 },
                b: EdgeRef { poly: 0, edge: 1 },
                sign: Sign::Flip,
            },
            Gluing {
                a: EdgeRef { poly: 0, edge: 3 },
                b: EdgeRef { poly: 0, edge: 4 },
                sign: Sign::Flip,
            },
            Gluing {
                a: EdgeRef { poly: 0, edge: 2 },
                b: EdgeRef { poly: 0, edge: 5 },
                sign: Sign::Translation,
            },
        ];
        (polygons, gluings)
    }
}
