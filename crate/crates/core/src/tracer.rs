//! Level-set tracing of `G(z) = |z|² - c0 - 2 Re F(z)` into closed
//! polylines, and conversion of the traced loops into domains.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::basis::{snapped_centroid, BasisElement, BasisSpec};
use crate::bergman::{
    boundary_defect, project_zbar, AnalyticExpansion, ExpansionTerm, ProjectionResult, TermKind,
};
use crate::error::{Error, Result};
use crate::geometry::{check_simple, point_segment_distance, BoundaryComponent, Domain};

pub const MIN_RESOLUTION: usize = 64;
pub const DEFAULT_RESOLUTION: usize = 512;
pub const DEFAULT_HALF_WIDTH: f64 = 2.5;
/// Crossings are refined until `|G| < CROSSING_TOL`, well inside the 1e-10 target.
const CROSSING_TOL: f64 = 1e-13;

/// Axis-aligned rectangle `[lo.re, hi.re] × [lo.im, hi.im]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub lo: C64,
    pub hi: C64,
}

impl Window {
    pub fn new(lo: C64, hi: C64) -> Result<Self> {
        let ok = [lo.re, lo.im, hi.re, hi.im].iter().all(|v| v.is_finite())
            && hi.re > lo.re
            && hi.im > lo.im;
        if !ok {
            return Err(Error::Input(format!("invalid window [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    /// `[-r, r]²`.
    pub fn square(r: f64) -> Result<Self> {
        Self::new(C64::new(-r, -r), C64::new(r, r))
    }

    pub fn contains(&self, z: C64) -> bool {
        z.re >= self.lo.re && z.re <= self.hi.re && z.im >= self.lo.im && z.im <= self.hi.im
    }
}

/// `G(z) = |z|² - c0 - 2 Re F(z)` sampled on a window; the traced domain is `G < 0`.
#[derive(Debug, Clone)]
pub struct LevelSetFamily {
    pub name: String,
    pub potential: AnalyticExpansion,
    pub c0: f64,
    pub window: Window,
    pub resolution: usize,
}

/// Names accepted by [`LevelSetFamily::named`].
pub const FAMILY_NAMES: [&str; 10] = [
    "circle", "fig3.1", "fig3.2", "fig3.3", "fig3.4", "fig3.5", "fig3.6", "fig3.7", "fig3.8",
    "fig3.9",
];

impl LevelSetFamily {
    pub fn new(
        name: impl Into<String>,
        potential: AnalyticExpansion,
        c0: f64,
        window: Window,
        resolution: usize,
    ) -> Result<Self> {
        if resolution < MIN_RESOLUTION {
            return Err(Error::Input(format!(
                "resolution {resolution} is below the minimum {MIN_RESOLUTION}"
            )));
        }
        if !c0.is_finite() {
            return Err(Error::Input("c0 must be finite".into()));
        }
        Ok(Self {
            name: name.into(),
            potential,
            c0,
            window,
            resolution,
        })
    }

    /// The example families, with `F` the antiderivative of the stated best
    /// approximation `f`, `c0 = 1` and the default window and resolution.
    ///
    /// The circle control uses the window `[-2, 2]²`.
    pub fn named(name: &str) -> Result<Self> {
        let o = C64::new(0.0, 0.0);
        let r = |v: f64| C64::new(v, 0.0);
        let half = C64::new(0.5, 0.0);
        let terms = match name {
            "circle" => vec![],
            // f = 3z²/10, 2z³/5, 5z⁴/14
            "fig3.1" => vec![ExpansionTerm::power(r(0.1), o, 1.0, 3)],
            "fig3.2" => vec![ExpansionTerm::power(r(0.1), o, 1.0, 4)],
            "fig3.3" => vec![ExpansionTerm::power(r(1.0 / 14.0), o, 1.0, 5)],
            // f = 1/(3z) + 1/(5(z - 1/2)), f = 1/(7z) + 1/(10(z - 1/2))
            "fig3.4" => vec![
                ExpansionTerm::log(r(1.0 / 3.0), o),
                ExpansionTerm::log(r(0.2), half),
            ],
            "fig3.5" => vec![
                ExpansionTerm::log(r(1.0 / 7.0), o),
                ExpansionTerm::log(r(0.1), half),
            ],
            // F = 1/(c P(z)), P(z) = (z - 1/2)(z - i/3)(z + 1/4), in partial fractions.
            "fig3.6" => cubic_reciprocal(40.0),
            "fig3.7" => cubic_reciprocal(10.0),
            "fig3.8" => cubic_reciprocal(8.0),
            // f = -3/(10 z⁷)
            "fig3.9" => vec![ExpansionTerm::inverse_power(r(1.0 / 20.0), o, 6)],
            _ => {
                return Err(Error::Input(format!(
                    "unknown family '{name}' (expected one of {})",
                    FAMILY_NAMES.join(", ")
                )))
            }
        };
        let window = if name == "circle" {
            Window::square(2.0)?
        } else {
            Window::square(DEFAULT_HALF_WIDTH)?
        };
        Self::new(name, AnalyticExpansion::new(terms), 1.0, window, DEFAULT_RESOLUTION)
    }

    pub fn with_resolution(mut self, resolution: usize) -> Result<Self> {
        if resolution < MIN_RESOLUTION {
            return Err(Error::Input(format!(
                "resolution {resolution} is below the minimum {MIN_RESOLUTION}"
            )));
        }
        self.resolution = resolution;
        Ok(self)
    }

    pub fn with_window(mut self, window: Window) -> Self {
        self.window = window;
        self
    }

    pub fn with_c0(mut self, c0: f64) -> Self {
        self.c0 = c0;
        self
    }

    /// `G(z)`; singular points count as exterior (`+∞`).
    pub fn g(&self, z: C64) -> f64 {
        let v = z.norm_sqr() - self.c0 - 2.0 * self.potential.real_part(z);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }

    /// The best approximation `f = F'` this family encodes.
    pub fn f(&self, z: C64) -> C64 {
        self.potential.derivative(z)
    }

    /// Order of the rotation group about 0 that leaves `G` invariant, when
    /// the potential is a single power of `z`.
    pub fn symmetry_order(&self) -> Option<u32> {
        match self.potential.terms.as_slice() {
            [ExpansionTerm {
                kind: TermKind::Power { center, exponent, .. },
                ..
            }] if center.norm() == 0.0 && *exponent >= 2 => Some(*exponent),
            [ExpansionTerm {
                kind: TermKind::InversePower { location, order },
                ..
            }] if location.norm() == 0.0 && *order >= 2 => Some(*order),
            _ => None,
        }
    }

    /// Monomials to `degree` about the centroid of `domain`, poles of
    /// orders 1 to 3 at each hole's interior point, and poles at the
    /// singularities of the potential up to their order in `F'`.
    ///
    /// Singularities on the traced boundary are skipped: the level set of a
    /// simple pole of `F` passes through the pole.
    pub fn basis_for(&self, domain: &Domain, degree: u32) -> Result<BasisSpec> {
        let mut poles: Vec<(C64, u32)> = domain.holes().iter().map(|h| (h.interior_point, 3)).collect();
        for term in &self.potential.terms {
            let (location, order) = match term.kind {
                TermKind::Power { .. } => continue,
                TermKind::InversePower { location, order } => (location, order + 1),
                TermKind::Log { location, .. } => (location, 1),
            };
            if domain.boundary_distance(location) <= 1e-6 * domain.diameter() {
                continue;
            }
            match poles.iter_mut().find(|(a, _)| (*a - location).norm() <= 1e-12 * domain.diameter()) {
                Some(entry) => entry.1 = entry.1.max(order),
                None => poles.push((location, order)),
            }
        }
        let mut elements: Vec<BasisElement> = (0..=degree)
            .map(|k| BasisElement::monomial(snapped_centroid(domain), 0.5 * domain.diameter(), k))
            .collect();
        for (a, order) in poles {
            elements.extend((1..=order).map(|j| BasisElement::pole(a, j)));
        }
        BasisSpec::new(elements)
    }
}

/// `(1/c) Σ A_k / (z - p_k)` with `A_k = 1 / P'(p_k)`.
fn cubic_reciprocal(c: f64) -> Vec<ExpansionTerm> {
    let roots = [C64::new(0.5, 0.0), C64::new(0.0, 1.0 / 3.0), C64::new(-0.25, 0.0)];
    (0..3)
        .map(|k| {
            let dp: C64 = (0..3).filter(|&j| j != k).map(|j| roots[k] - roots[j]).product();
            ExpansionTerm::inverse_power(dp.inv() / c, roots[k], 1)
        })
        .collect()
}

/// One closed traced polyline; the last vertex connects back to the first.
#[derive(Debug, Clone, PartialEq)]
pub struct TracedCurve {
    pub vertices: Vec<C64>,
    /// Shoelace area; positive for counterclockwise loops, which have the
    /// region `G < 0` on their inside.
    pub signed_area: f64,
    /// Signed area enclosed by the level curve itself: the polygon area
    /// plus, on every edge, the parabolic segment of height `-G/|∇G|`
    /// measured at the edge midpoint.
    pub front_area: f64,
    pub simple: bool,
}

impl TracedCurve {
    fn new(vertices: Vec<C64>) -> Self {
        let n = vertices.len();
        let signed_area = 0.5
            * (0..n)
                .map(|i| {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    a.re * b.im - a.im * b.re
                })
                .sum::<f64>();
        let simple = BoundaryComponent::polygon(&vertices)
            .and_then(|b| check_simple(&[&b]))
            .is_ok();
        Self {
            vertices,
            signed_area,
            front_area: signed_area,
            simple,
        }
    }

    fn with_front_correction(mut self, family: &LevelSetFamily) -> Self {
        let n = self.vertices.len();
        let mut correction = 0.0;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let chord = (b - a).norm();
            let m = 0.5 * (a + b);
            // |∇G| = 2 |∂G/∂z| = 2 |z̄ - F'(z)|
            let grad = 2.0 * (m.conj() - family.f(m)).norm();
            let height = -family.g(m) / grad;
            if height.is_finite() && height.abs() < 0.5 * chord {
                correction += 2.0 / 3.0 * chord * height;
            }
        }
        self.front_area = self.signed_area + correction;
        self
    }

    pub fn area(&self) -> f64 {
        self.signed_area.abs()
    }

    pub fn is_counterclockwise(&self) -> bool {
        self.signed_area > 0.0
    }

    /// Area centroid of the polygon.
    pub fn centroid(&self) -> C64 {
        let n = self.vertices.len();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let w = a.re * b.im - a.im * b.re;
            acc += (a + b) * w;
        }
        acc / (6.0 * self.signed_area)
    }

    /// Winding number of the polygon around `p` (nonzero means enclosed).
    pub fn winding(&self, p: C64) -> i32 {
        let n = self.vertices.len();
        let mut w = 0;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let side = (b.re - a.re) * (p.im - a.im) - (p.re - a.re) * (b.im - a.im);
            if a.im <= p.im {
                if b.im > p.im && side > 0.0 {
                    w += 1;
                }
            } else if b.im <= p.im && side < 0.0 {
                w -= 1;
            }
        }
        w
    }

    pub fn distance(&self, p: C64) -> f64 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| point_segment_distance(p, self.vertices[i], self.vertices[(i + 1) % n]))
            .fold(f64::INFINITY, f64::min)
    }

    /// A point strictly inside the polygon: the centroid when it is inside,
    /// otherwise the midpoint of the widest interior span on the horizontal
    /// line through the centroid.
    pub fn interior_point(&self) -> C64 {
        let c = self.centroid();
        if self.winding(c) != 0 {
            return c;
        }
        let (mut lo_y, mut hi_y) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in &self.vertices {
            lo_y = lo_y.min(v.im);
            hi_y = hi_y.max(v.im);
        }
        let mut best = (0.0, c);
        for k in 1..64 {
            let y = lo_y + (hi_y - lo_y) * k as f64 / 64.0;
            let mut xs = Vec::new();
            let n = self.vertices.len();
            for i in 0..n {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % n];
                if (a.im > y) != (b.im > y) {
                    xs.push(a.re + (y - a.im) / (b.im - a.im) * (b.re - a.re));
                }
            }
            xs.sort_by(|a, b| a.total_cmp(b));
            for pair in xs.chunks_exact(2) {
                let width = pair[1] - pair[0];
                if width > best.0 {
                    best = (width, C64::new(0.5 * (pair[0] + pair[1]), y));
                }
            }
        }
        best.1
    }
}

#[derive(Debug, Clone)]
pub struct TracedCurveSet {
    pub curves: Vec<TracedCurve>,
    /// Chains that ran into the window edge and were discarded.
    pub open_chains: usize,
    pub window: Window,
    /// The traced family, kept for refining loops into domain boundaries.
    pub family: LevelSetFamily,
}

/// Marching squares on the `resolution × resolution` grid of the window.
///
/// Each crossing is located on its cell edge by a bracketed secant
/// iteration to `|G| < 1e-13`. Saddle cells are resolved by the sign of `G`
/// at the cell center. Segments are oriented with `G < 0` on the left, so
/// outer loops run counterclockwise and holes clockwise. Chains that do not
/// close are discarded and counted in `open_chains`.
pub fn trace(family: &LevelSetFamily) -> Result<TracedCurveSet> {
    let n = family.resolution;
    let w = family.window;
    let hx = (w.hi.re - w.lo.re) / n as f64;
    let hy = (w.hi.im - w.lo.im) / n as f64;
    let node = |i: usize, j: usize| C64::new(w.lo.re + i as f64 * hx, w.lo.im + j as f64 * hy);
    let stride = n + 1;
    let values: Vec<f64> = (0..=n)
        .into_par_iter()
        .flat_map_iter(|j| (0..=n).map(move |i| (i, j)))
        .map(|(i, j)| family.g(node(i, j)))
        .collect();
    let val = |i: usize, j: usize| values[j * stride + i];
    let inside = |i: usize, j: usize| val(i, j) < 0.0;

    // Edge ids: horizontal (i,j)-(i+1,j) is 2(j·stride+i), vertical (i,j)-(i,j+1) is that plus 1.
    let h_edge = |i: usize, j: usize| 2 * (j * stride + i);
    let v_edge = |i: usize, j: usize| 2 * (j * stride + i) + 1;
    let none = usize::MAX;
    let mut next = vec![none; 2 * stride * stride];
    let mut has_incoming = vec![false; 2 * stride * stride];

    for j in 0..n {
        for i in 0..n {
            let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            let ins: Vec<bool> = corners.iter().map(|&(a, b)| inside(a, b)).collect();
            if ins.iter().all(|&b| b) || ins.iter().all(|&b| !b) {
                continue;
            }
            let edges = [h_edge(i, j), v_edge(i + 1, j), h_edge(i, j + 1), v_edge(i, j)];
            // Walking counterclockwise, edge k runs from corner k to corner k+1.
            let mut leaves = Vec::new();
            let mut enters = Vec::new();
            for k in 0..4 {
                let (a, b) = (ins[k], ins[(k + 1) % 4]);
                if a && !b {
                    leaves.push(k);
                } else if !a && b {
                    enters.push(k);
                }
            }
            let center_inside = family.g(node(i, j) + C64::new(0.5 * hx, 0.5 * hy)) < 0.0;
            for &k in &leaves {
                let partner = if leaves.len() == 1 {
                    enters[0]
                } else if center_inside {
                    (1..4).map(|d| (k + d) % 4).find(|m| enters.contains(m)).unwrap()
                } else {
                    (1..4).map(|d| (k + 4 - d) % 4).find(|m| enters.contains(m)).unwrap()
                };
                next[edges[k]] = edges[partner];
                has_incoming[edges[partner]] = true;
            }
        }
    }

    let crossing = |edge: usize| -> C64 {
        let cell = edge / 2;
        let (i, j) = (cell % stride, cell / stride);
        let (a, b) = if edge % 2 == 0 {
            ((i, j), (i + 1, j))
        } else {
            ((i, j), (i, j + 1))
        };
        refine_crossing(family, node(a.0, a.1), val(a.0, a.1), node(b.0, b.1), val(b.0, b.1))
    };

    let mut visited = vec![false; next.len()];
    let mut open_chains = 0;
    for start in 0..next.len() {
        if next[start] != none && !has_incoming[start] {
            open_chains += 1;
            let mut e = start;
            while e != none && !visited[e] {
                visited[e] = true;
                e = next[e];
            }
        }
    }
    let mut loops = Vec::new();
    for start in 0..next.len() {
        if next[start] == none || visited[start] {
            continue;
        }
        let mut chain = Vec::new();
        let mut e = start;
        let mut closed = false;
        while e != none && !visited[e] {
            visited[e] = true;
            chain.push(e);
            e = next[e];
            if e == start {
                closed = true;
                break;
            }
        }
        if closed {
            loops.push(chain);
        } else {
            open_chains += 1;
        }
    }

    // Crossings that land on (or next to) the same grid node come out as
    // near-duplicates; check_simple would reject the resulting tiny edge.
    let merge = 1e-8 * hx.min(hy);
    let curves: Vec<TracedCurve> = loops
        .into_par_iter()
        .map(|chain| {
            let mut pts: Vec<C64> = chain.iter().map(|&e| crossing(e)).collect();
            pts.dedup_by(|a, b| (*a - *b).norm() <= merge);
            while pts.len() > 1 && (pts[0] - pts[pts.len() - 1]).norm() <= merge {
                pts.pop();
            }
            pts
        })
        .filter(|pts| pts.len() >= 3)
        .map(|pts| TracedCurve::new(pts).with_front_correction(family))
        .collect();
    if curves.is_empty() {
        return Err(Error::EmptyTrace);
    }
    Ok(TracedCurveSet {
        curves,
        open_chains,
        window: w,
        family: family.clone(),
    })
}

/// Edges of a traced loop are split into this many pieces when the loop
/// becomes a domain boundary.
pub const DENSIFY: usize = 4;

/// Tolerance on `|G|` scaled by the size of the terms that make up `G`, so
/// that points near singularities are judged at floating-point resolution.
fn level_residual_ok(family: &LevelSetFamily, z: C64, g: f64) -> bool {
    let scale = 1.0 + z.norm_sqr() + family.c0.abs() + 2.0 * family.potential.real_part(z).abs();
    g.abs() <= 1e-10 * scale
}

/// Newton iteration `p ← p - G ∇G / |∇G|²` with `∇G = 2(z - conj F'(z))`.
fn project_onto_level_set(family: &LevelSetFamily, mut p: C64) -> Option<C64> {
    for _ in 0..8 {
        let g = family.g(p);
        if !g.is_finite() {
            return None;
        }
        if g.abs() < CROSSING_TOL {
            return Some(p);
        }
        let grad = (p - family.f(p).conj()) * 2.0;
        let step = grad * (g / grad.norm_sqr());
        if !(step.re.is_finite() && step.im.is_finite()) {
            return None;
        }
        p -= step;
    }
    let g = family.g(p);
    level_residual_ok(family, p, g).then_some(p)
}

/// Zero of `G` on the segment `a b`, where `G(a)` and `G(b)` have opposite
/// inside/outside status. Illinois-modified regula falsi with a bisection
/// step whenever the secant estimate is unusable.
fn refine_crossing(family: &LevelSetFamily, a: C64, ga: f64, b: C64, gb: f64) -> C64 {
    let (mut t0, mut g0, mut t1, mut g1) = (0.0f64, ga, 1.0f64, gb);
    let at = |t: f64| a + (b - a) * t;
    let mut side = 0i8;
    let mut t = 0.5;
    for _ in 0..200 {
        t = if g0.is_finite() && g1.is_finite() && g0 != g1 {
            let s = t0 - g0 * (t1 - t0) / (g1 - g0);
            if s > t0.min(t1) && s < t0.max(t1) {
                s
            } else {
                0.5 * (t0 + t1)
            }
        } else {
            0.5 * (t0 + t1)
        };
        let g = family.g(at(t));
        if g.abs() < CROSSING_TOL || (t1 - t0).abs() < 1e-15 {
            break;
        }
        if (g < 0.0) == (g0 < 0.0) {
            t0 = t;
            g0 = g;
            if side == -1 {
                g1 *= 0.5;
            }
            side = -1;
        } else {
            t1 = t;
            g1 = g;
            if side == 1 {
                g0 *= 0.5;
            }
            side = 1;
        }
    }
    let g = family.g(at(t));
    if !(g.abs() < CROSSING_TOL) && !(ga.is_finite() && gb.is_finite()) {
        // The bracket collapsed onto a singular node: there is no level
        // crossing on this edge, only a sign flip at the singularity.
        return at(0.5);
    }
    at(t)
}

/// Which traced loops make up a domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    /// The region enclosed by one loop, with no holes.
    Component(usize),
    /// The largest counterclockwise loop together with the clockwise loops
    /// directly inside it as holes.
    OuterWithHoles,
}

impl TracedCurveSet {
    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    /// Index of the counterclockwise loop with the largest area.
    pub fn outer_index(&self) -> Option<usize> {
        self.curves
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_counterclockwise())
            .max_by(|a, b| a.1.area().total_cmp(&b.1.area()))
            .map(|(i, _)| i)
    }

    /// Indices of the clockwise loops inside the outer loop that are not
    /// nested inside another such loop.
    pub fn hole_indices(&self) -> Vec<usize> {
        let Some(outer) = self.outer_index() else {
            return vec![];
        };
        let candidates: Vec<usize> = (0..self.curves.len())
            .filter(|&i| {
                !self.curves[i].is_counterclockwise()
                    && self.curves[outer].winding(self.curves[i].vertices[0]) != 0
            })
            .collect();
        candidates
            .iter()
            .copied()
            .filter(|&i| {
                !candidates.iter().any(|&j| {
                    j != i
                        && self.curves[j].area() > self.curves[i].area()
                        && self.curves[j].winding(self.curves[i].vertices[0]) != 0
                })
            })
            .collect()
    }

    pub fn to_domain(&self, selection: Selection) -> Result<Domain> {
        let simple = |i: usize| -> Result<&TracedCurve> {
            let c = self
                .curves
                .get(i)
                .ok_or_else(|| Error::Input(format!("no traced curve with index {i}")))?;
            if !c.simple {
                return Err(Error::Geometry(format!("traced curve {i} is not simple")));
            }
            Ok(c)
        };
        match selection {
            Selection::Component(i) => {
                let c = simple(i)?;
                Domain::new(self.boundary_loop(c)?, vec![])
            }
            Selection::OuterWithHoles => {
                let outer = self
                    .outer_index()
                    .ok_or_else(|| Error::Geometry("no counterclockwise traced loop".into()))?;
                let outer = self.boundary_loop(simple(outer)?)?;
                let mut holes = Vec::new();
                for i in self.hole_indices() {
                    let c = simple(i)?;
                    holes.push((self.boundary_loop(c)?, c.interior_point()));
                }
                Domain::new(outer, holes)
            }
        }
    }

    /// Polygon through the loop's vertices with [`DENSIFY`] - 1 extra points
    /// per edge, each projected onto `G = 0` by Newton steps along `∇G`.
    fn boundary_loop(&self, curve: &TracedCurve) -> Result<BoundaryComponent> {
        let fam = &self.family;
        let n = curve.vertices.len();
        let mut pts = Vec::with_capacity(DENSIFY * n);
        for i in 0..n {
            let a = curve.vertices[i];
            let b = curve.vertices[(i + 1) % n];
            pts.push(a);
            let chord = (b - a).norm();
            for k in 1..DENSIFY {
                let p0 = a + (b - a) * (k as f64 / DENSIFY as f64);
                if let Some(p) = project_onto_level_set(fam, p0) {
                    if (p - p0).norm() < 0.5 * chord {
                        pts.push(p);
                    }
                }
            }
        }
        BoundaryComponent::polygon(&pts)
    }

    /// Columns `curve,vertex,x,y`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "curve,vertex,x,y")?;
        for (ci, c) in self.curves.iter().enumerate() {
            for (vi, v) in c.vertices.iter().enumerate() {
                writeln!(out, "{ci},{vi},{:e},{:e}", v.re, v.im)?;
            }
        }
        Ok(())
    }

    /// Static SVG 1.1 with one closed path per loop. The y axis points up,
    /// so coordinates are flipped inside the window's view box.
    pub fn write_svg<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let w = self.window;
        let width = w.hi.re - w.lo.re;
        let height = w.hi.im - w.lo.im;
        let stroke = 0.002 * width.max(height);
        writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
        writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="{} {} {} {}" width="600" height="{}">"#,
            w.lo.re,
            -w.hi.im,
            width,
            height,
            (600.0 * height / width).round()
        )?;
        for (ci, c) in self.curves.iter().enumerate() {
            let mut d = String::new();
            for (k, v) in c.vertices.iter().enumerate() {
                let cmd = if k == 0 { 'M' } else { 'L' };
                d.push_str(&format!("{cmd}{:.6} {:.6} ", v.re, -v.im));
            }
            d.push('Z');
            writeln!(
                out,
                r#"  <path id="curve{ci}" d="{d}" fill="none" stroke="black" stroke-width="{stroke}"/>"#
            )?;
        }
        writeln!(out, "</svg>")
    }
}

/// Symmetric Hausdorff distance between two closed polylines, measuring
/// from each vertex set to the other polyline.
pub fn hausdorff(a: &TracedCurve, b: &TracedCurve) -> f64 {
    let one_way = |p: &TracedCurve, q: &TracedCurve| {
        p.vertices
            .par_iter()
            .map(|&v| q.distance(v))
            .reduce(|| 0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

/// Hausdorff distance between a loop and its rotation by `2π / order` about 0.
pub fn rotational_asymmetry(curve: &TracedCurve, order: u32) -> f64 {
    let rot = C64::from_polar(1.0, 2.0 * PI / order as f64);
    let rotated = TracedCurve {
        vertices: curve.vertices.iter().map(|v| v * rot).collect(),
        signed_area: curve.signed_area,
        front_area: curve.front_area,
        simple: curve.simple,
    };
    hausdorff(curve, &rotated)
}

/// Outcome of tracing a family, rebuilding its domain and projecting `z̄`.
#[derive(Debug, Clone)]
pub struct Roundtrip {
    pub domain: Domain,
    pub projection: ProjectionResult,
    /// Largest `|f_recovered - f|` over the sample points.
    pub pointwise_error: f64,
    /// Boundary defect of the recovered antiderivative.
    pub defect: f64,
    pub samples: Vec<C64>,
}

/// Number of interior test points used by [`roundtrip`].
pub const ROUNDTRIP_SAMPLES: usize = 50;

/// Traces `family`, builds the outer-with-holes domain, projects `z̄` onto
/// `basis` (the domain default when `None`) and compares the result with
/// the family's `f` at interior points farther than `0.05 · diameter` from
/// the boundary.
pub fn roundtrip(family: &LevelSetFamily, basis: Option<&BasisSpec>, seed: u64) -> Result<Roundtrip> {
    let curves = trace(family)?;
    let domain = curves.to_domain(Selection::OuterWithHoles)?;
    let basis = match basis {
        Some(b) => b.clone(),
        None => BasisSpec::default_for(&domain)?,
    };
    let projection = project_zbar(&domain, &basis)?;
    let samples = domain.sample_interior(ROUNDTRIP_SAMPLES, 0.05 * domain.diameter(), seed)?;
    let mut pointwise_error: f64 = 0.0;
    for &z in &samples {
        let err = (projection.evaluate_f(z)? - family.f(z)).norm();
        pointwise_error = pointwise_error.max(err);
    }
    let defect = boundary_defect(&domain, &projection.antiderivative())?.defect;
    Ok(Roundtrip {
        domain,
        projection,
        pointwise_error,
        defect,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_fractions_reproduce_the_reciprocal_cubic() {
        let terms = AnalyticExpansion::new(cubic_reciprocal(10.0));
        let z = C64::new(0.7, -0.4);
        let p = (z - 0.5) * (z - C64::new(0.0, 1.0 / 3.0)) * (z + 0.25);
        assert!((terms.eval(z) - (p * 10.0).inv()).norm() < 1e-14);
    }

    #[test]
    fn circle_is_one_counterclockwise_loop() {
        let set = trace(&LevelSetFamily::named("circle").unwrap().with_resolution(128).unwrap()).unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.open_chains, 0);
        let c = &set.curves[0];
        assert!(c.is_counterclockwise() && c.simple);
        let f = LevelSetFamily::named("circle").unwrap();
        assert!(c.vertices.iter().all(|&v| f.g(v).abs() < 1e-10));
    }

    #[test]
    fn rejects_low_resolution() {
        assert!(LevelSetFamily::named("circle").unwrap().with_resolution(32).is_err());
        assert!(LevelSetFamily::named("nope").is_err());
    }
}
