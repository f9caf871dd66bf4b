//! Bounded planar domains described by oriented boundary loops.
//!
//! A [`Domain`] owns one positively oriented outer [`BoundaryComponent`] and
//! any number of negatively oriented holes, so the domain always lies to the
//! left of its boundary. Each component keeps a dense polyline proxy that is
//! used for membership, distance and scanline queries; integrals use the
//! exact parametrization through [`Domain::boundary_quadrature`].

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

/// Relative chord deviation allowed between a piece and its proxy polyline.
const PROXY_REL_TOL: f64 = 1e-7;
/// Junction/closure tolerance relative to the component extent.
const CLOSURE_REL_TOL: f64 = 1e-12;
/// Points nearer than this (relative to the diameter) to the boundary are ambiguous.
const BOUNDARY_REL_TOL: f64 = 1e-12;
const WINDING_ANGLE_TOL: f64 = 1e-9;

/// One smooth piece of a boundary loop.
#[derive(Debug, Clone, PartialEq)]
pub enum CurvePiece {
    /// `start + t (end - start)`, `t` in `[0, 1]`.
    Segment { start: C64, end: C64 },
    /// `center + radius e^{it}` for `t` from `start_angle` to `end_angle`.
    /// A decreasing angle range traverses the arc clockwise.
    Arc {
        center: C64,
        radius: f64,
        start_angle: f64,
        end_angle: f64,
    },
    /// `sum_k coeffs[k] t^k`, `t` in `[t0, t1]`.
    Polynomial { coeffs: Vec<C64>, t0: f64, t1: f64 },
    /// `sum_j coeffs[j] e^{i (lowest_frequency + j) t}`, `t` in `[t0, t1]`.
    Trigonometric {
        coeffs: Vec<C64>,
        lowest_frequency: i32,
        t0: f64,
        t1: f64,
    },
}

impl CurvePiece {
    pub fn segment(start: C64, end: C64) -> Self {
        CurvePiece::Segment { start, end }
    }

    pub fn arc(center: C64, radius: f64, start_angle: f64, end_angle: f64) -> Self {
        CurvePiece::Arc {
            center,
            radius,
            start_angle,
            end_angle,
        }
    }

    pub fn parameter_range(&self) -> (f64, f64) {
        match *self {
            CurvePiece::Segment { .. } => (0.0, 1.0),
            CurvePiece::Arc {
                start_angle,
                end_angle,
                ..
            } => (start_angle, end_angle),
            CurvePiece::Polynomial { t0, t1, .. } | CurvePiece::Trigonometric { t0, t1, .. } => {
                (t0, t1)
            }
        }
    }

    pub fn point(&self, t: f64) -> C64 {
        match self {
            CurvePiece::Segment { start, end } => start + (end - start) * t,
            CurvePiece::Arc { center, radius, .. } => center + C64::from_polar(*radius, t),
            CurvePiece::Polynomial { coeffs, .. } => coeffs
                .iter()
                .rev()
                .fold(C64::new(0.0, 0.0), |acc, c| acc * t + c),
            CurvePiece::Trigonometric {
                coeffs,
                lowest_frequency,
                ..
            } => coeffs
                .iter()
                .enumerate()
                .map(|(j, c)| c * C64::from_polar(1.0, (*lowest_frequency + j as i32) as f64 * t))
                .sum(),
        }
    }

    /// Derivative of [`CurvePiece::point`] with respect to the parameter.
    pub fn tangent(&self, t: f64) -> C64 {
        match self {
            CurvePiece::Segment { start, end } => end - start,
            CurvePiece::Arc { radius, .. } => C64::i() * C64::from_polar(*radius, t),
            CurvePiece::Polynomial { coeffs, .. } => coeffs
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(C64::new(0.0, 0.0), |acc, (k, c)| acc * t + c * k as f64),
            CurvePiece::Trigonometric {
                coeffs,
                lowest_frequency,
                ..
            } => coeffs
                .iter()
                .enumerate()
                .map(|(j, c)| {
                    let k = (*lowest_frequency + j as i32) as f64;
                    c * C64::new(0.0, k) * C64::from_polar(1.0, k * t)
                })
                .sum(),
        }
    }

    pub fn start(&self) -> C64 {
        self.point(self.parameter_range().0)
    }

    pub fn end(&self) -> C64 {
        self.point(self.parameter_range().1)
    }

    /// The same point set traversed in the opposite direction.
    pub fn reversed(&self) -> Self {
        match self {
            CurvePiece::Segment { start, end } => CurvePiece::Segment {
                start: *end,
                end: *start,
            },
            CurvePiece::Arc {
                center,
                radius,
                start_angle,
                end_angle,
            } => CurvePiece::Arc {
                center: *center,
                radius: *radius,
                start_angle: *end_angle,
                end_angle: *start_angle,
            },
            CurvePiece::Polynomial { coeffs, t0, t1 } => {
                // p(t0 + t1 - t) re-expanded in powers of t.
                let s = t0 + t1;
                let n = coeffs.len();
                let mut out = vec![C64::new(0.0, 0.0); n];
                for (k, a) in coeffs.iter().enumerate() {
                    let mut binom = 1.0;
                    for (j, slot) in out.iter_mut().enumerate().take(k + 1) {
                        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                        *slot += a * binom * s.powi((k - j) as i32) * sign;
                        binom = binom * (k - j) as f64 / (j + 1) as f64;
                    }
                }
                CurvePiece::Polynomial {
                    coeffs: out,
                    t0: *t0,
                    t1: *t1,
                }
            }
            CurvePiece::Trigonometric {
                coeffs,
                lowest_frequency,
                t0,
                t1,
            } => {
                let s = t0 + t1;
                let top = *lowest_frequency + coeffs.len() as i32 - 1;
                let out = coeffs
                    .iter()
                    .enumerate()
                    .rev()
                    .map(|(j, c)| {
                        let k = (*lowest_frequency + j as i32) as f64;
                        c * C64::from_polar(1.0, k * s)
                    })
                    .collect();
                CurvePiece::Trigonometric {
                    coeffs: out,
                    lowest_frequency: -top,
                    t0: *t0,
                    t1: *t1,
                }
            }
        }
    }

    /// Image under `z -> scale * z + shift`.
    pub fn mapped(&self, scale: C64, shift: C64) -> Self {
        match self {
            CurvePiece::Segment { start, end } => CurvePiece::Segment {
                start: scale * start + shift,
                end: scale * end + shift,
            },
            CurvePiece::Arc {
                center,
                radius,
                start_angle,
                end_angle,
            } => {
                let rot = scale.arg();
                CurvePiece::Arc {
                    center: scale * center + shift,
                    radius: radius * scale.norm(),
                    start_angle: start_angle + rot,
                    end_angle: end_angle + rot,
                }
            }
            CurvePiece::Polynomial { coeffs, t0, t1 } => {
                let mut out: Vec<C64> = coeffs.iter().map(|c| c * scale).collect();
                if out.is_empty() {
                    out.push(C64::new(0.0, 0.0));
                }
                out[0] += shift;
                CurvePiece::Polynomial {
                    coeffs: out,
                    t0: *t0,
                    t1: *t1,
                }
            }
            CurvePiece::Trigonometric {
                coeffs,
                lowest_frequency,
                t0,
                t1,
            } => {
                let mut out: Vec<C64> = coeffs.iter().map(|c| c * scale).collect();
                let mut low = *lowest_frequency;
                if low > 0 {
                    let mut padded = vec![C64::new(0.0, 0.0); low as usize];
                    padded.append(&mut out);
                    out = padded;
                    low = 0;
                }
                let top = low + out.len() as i32 - 1;
                if top < 0 {
                    out.resize(out.len() + (-top) as usize, C64::new(0.0, 0.0));
                }
                out[(-low) as usize] += shift;
                CurvePiece::Trigonometric {
                    coeffs: out,
                    lowest_frequency: low,
                    t0: *t0,
                    t1: *t1,
                }
            }
        }
    }

    fn validate(&self, scale: f64) -> Result<()> {
        let (t0, t1) = self.parameter_range();
        if !t0.is_finite() || !t1.is_finite() || t0 == t1 {
            return Err(Error::Geometry(format!(
                "curve piece has a degenerate parameter interval [{t0}, {t1}]"
            )));
        }
        if let CurvePiece::Arc { radius, .. } = self {
            if !(*radius > 0.0) {
                return Err(Error::Geometry(format!("arc radius {radius} is not positive")));
            }
        }
        let span = (t1 - t0).abs();
        for k in 0..=32 {
            let t = t0 + (t1 - t0) * k as f64 / 32.0;
            let z = self.point(t);
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::Geometry("curve piece is not finite".into()));
            }
            if self.tangent(t).norm() * span < 1e-12 * scale {
                return Err(Error::Geometry(format!(
                    "curve piece has a vanishing tangent at t = {t}"
                )));
            }
        }
        Ok(())
    }

    /// Length-weighted sampling with the given Gauss rule.
    fn quadrature_into(&self, order: usize, out: &mut Vec<BoundaryNode>) {
        let rule = gauss_legendre(order);
        let (t0, t1) = self.parameter_range();
        for (t, w) in rule.mapped(t0, t1) {
            out.push(BoundaryNode {
                point: self.point(t),
                dz: self.tangent(t) * w,
            });
        }
    }
}

/// Orientation of a closed loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Positive,
    Negative,
}

/// A closed loop of curve pieces with its polyline proxy.
#[derive(Debug, Clone)]
pub struct BoundaryComponent {
    pieces: Vec<CurvePiece>,
    orientation: Orientation,
    signed_area: f64,
    proxy: Vec<C64>,
    /// Piece index and parameter of each proxy vertex.
    proxy_origin: Vec<(usize, f64)>,
    proxy_tolerance: f64,
}

impl BoundaryComponent {
    pub fn new(pieces: Vec<CurvePiece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::Geometry("boundary component has no pieces".into()));
        }
        let extent = coarse_extent(&pieces);
        if !(extent > 0.0) || !extent.is_finite() {
            return Err(Error::Geometry("boundary component has zero extent".into()));
        }
        for p in &pieces {
            p.validate(extent)?;
        }
        let tol = CLOSURE_REL_TOL * extent;
        let n = pieces.len();
        for i in 0..n {
            let gap = (pieces[i].end() - pieces[(i + 1) % n].start()).norm();
            if gap > tol {
                return Err(Error::Geometry(format!(
                    "boundary loop does not close: gap {gap:e} after piece {i}"
                )));
            }
        }
        let proxy_tolerance = PROXY_REL_TOL * extent;
        let (proxy, proxy_origin) = build_proxy(&pieces, proxy_tolerance);
        let signed_area = signed_area_of(&pieces);
        if signed_area == 0.0 {
            return Err(Error::Geometry("boundary loop encloses no area".into()));
        }
        let orientation = if signed_area > 0.0 {
            Orientation::Positive
        } else {
            Orientation::Negative
        };
        Ok(Self {
            pieces,
            orientation,
            signed_area,
            proxy,
            proxy_origin,
            proxy_tolerance,
        })
    }

    /// Closed polygon through the given vertices (last joins back to first).
    pub fn polygon(vertices: &[C64]) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::Geometry("polygon needs at least 3 vertices".into()));
        }
        let n = vertices.len();
        let pieces = (0..n)
            .map(|i| CurvePiece::segment(vertices[i], vertices[(i + 1) % n]))
            .collect();
        Self::new(pieces)
    }

    pub fn circle(center: C64, radius: f64) -> Result<Self> {
        let pieces = (0..4)
            .map(|k| {
                let a = k as f64 * PI / 2.0;
                CurvePiece::arc(center, radius, a, a + PI / 2.0)
            })
            .collect();
        Self::new(pieces)
    }

    pub fn ellipse(center: C64, a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::Geometry("ellipse semi-axes must be positive".into()));
        }
        let coeffs = vec![C64::new(0.5 * (a - b), 0.0), center, C64::new(0.5 * (a + b), 0.0)];
        let pieces = (0..4)
            .map(|k| {
                let t0 = k as f64 * PI / 2.0;
                CurvePiece::Trigonometric {
                    coeffs: coeffs.clone(),
                    lowest_frequency: -1,
                    t0,
                    t1: t0 + PI / 2.0,
                }
            })
            .collect();
        Self::new(pieces)
    }

    pub fn pieces(&self) -> &[CurvePiece] {
        &self.pieces
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// Signed enclosed area, positive for counterclockwise loops.
    pub fn signed_area(&self) -> f64 {
        self.signed_area
    }

    /// Dense polyline approximation, first vertex not repeated.
    pub fn proxy(&self) -> &[C64] {
        &self.proxy
    }

    pub fn proxy_tolerance(&self) -> f64 {
        self.proxy_tolerance
    }

    pub fn reversed(&self) -> Self {
        let pieces: Vec<CurvePiece> = self.pieces.iter().rev().map(|p| p.reversed()).collect();
        Self::new(pieces).expect("reversal preserves validity")
    }

    fn oriented(self, want: Orientation) -> Self {
        if self.orientation == want {
            self
        } else {
            self.reversed()
        }
    }

    pub fn mapped(&self, scale: C64, shift: C64) -> Result<Self> {
        Self::new(self.pieces.iter().map(|p| p.mapped(scale, shift)).collect())
    }

    /// Winding number of the loop around `p` by summed signed angles on the proxy.
    pub fn winding_number(&self, p: C64) -> Result<i32> {
        let n = self.proxy.len();
        let mut total = 0.0;
        for i in 0..n {
            let a = self.proxy[i] - p;
            let b = self.proxy[(i + 1) % n] - p;
            total += (b / a).arg();
        }
        let turns = total / (2.0 * PI);
        let rounded = turns.round();
        if ((turns - rounded) * 2.0 * PI).abs() > WINDING_ANGLE_TOL {
            return Err(Error::Geometry(format!(
                "winding number {turns} is not an integer"
            )));
        }
        Ok(rounded as i32)
    }

    /// Distance from `p` to the proxy polyline and the index of the nearest segment.
    fn proxy_distance(&self, p: C64) -> (f64, usize) {
        let n = self.proxy.len();
        let mut best = (f64::INFINITY, 0);
        for i in 0..n {
            let d = point_segment_distance(p, self.proxy[i], self.proxy[(i + 1) % n]);
            if d < best.0 {
                best = (d, i);
            }
        }
        best
    }

    /// Exact distance near proxy segment `seg`, with the closest boundary point
    /// and the unit tangent there (`None` at a piece junction).
    fn refine_nearest(&self, p: C64, seg: usize) -> (f64, C64, Option<C64>) {
        let n = self.proxy.len();
        let mut best = (f64::INFINITY, self.proxy[seg], None);
        for k in [seg + n - 1, seg, seg + 1] {
            let i = k % n;
            let (piece_idx, ta) = self.proxy_origin[i];
            let (next_piece, tb_raw) = self.proxy_origin[(i + 1) % n];
            let piece = &self.pieces[piece_idx];
            let tb = if next_piece == piece_idx {
                tb_raw
            } else {
                piece.parameter_range().1
            };
            let (t, d) = golden_min(|t| (piece.point(t) - p).norm(), ta, tb);
            if d < best.0 {
                let (r0, r1) = piece.parameter_range();
                let scale = (r1 - r0).abs();
                let at_end = (t - r0).abs() < 1e-9 * scale || (t - r1).abs() < 1e-9 * scale;
                let tangent = if at_end {
                    None
                } else {
                    let tau = piece.tangent(t);
                    Some(tau / tau.norm())
                };
                best = (d, piece.point(t), tangent);
            }
        }
        best
    }
}

fn coarse_extent(pieces: &[CurvePiece]) -> f64 {
    let mut lo = C64::new(f64::INFINITY, f64::INFINITY);
    let mut hi = C64::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in pieces {
        let (t0, t1) = p.parameter_range();
        for k in 0..=16 {
            let z = p.point(t0 + (t1 - t0) * k as f64 / 16.0);
            lo.re = lo.re.min(z.re);
            lo.im = lo.im.min(z.im);
            hi.re = hi.re.max(z.re);
            hi.im = hi.im.max(z.im);
        }
    }
    (hi - lo).norm()
}

fn build_proxy(pieces: &[CurvePiece], tol: f64) -> (Vec<C64>, Vec<(usize, f64)>) {
    let mut pts = Vec::new();
    let mut origin = Vec::new();
    for (idx, piece) in pieces.iter().enumerate() {
        let (t0, t1) = piece.parameter_range();
        if let CurvePiece::Segment { start, .. } = piece {
            pts.push(*start);
            origin.push((idx, t0));
            continue;
        }
        let initial = 8;
        for k in 0..initial {
            let ta = t0 + (t1 - t0) * k as f64 / initial as f64;
            let tb = t0 + (t1 - t0) * (k + 1) as f64 / initial as f64;
            let za = piece.point(ta);
            pts.push(za);
            origin.push((idx, ta));
            refine_proxy(piece, idx, (ta, za), (tb, piece.point(tb)), tol, 0, &mut pts, &mut origin);
        }
    }
    (pts, origin)
}

#[allow(clippy::too_many_arguments)]
fn refine_proxy(
    piece: &CurvePiece,
    idx: usize,
    a: (f64, C64),
    b: (f64, C64),
    tol: f64,
    depth: usize,
    pts: &mut Vec<C64>,
    origin: &mut Vec<(usize, f64)>,
) {
    let tm = 0.5 * (a.0 + b.0);
    let zm = piece.point(tm);
    let dev = point_segment_distance(zm, a.1, b.1);
    if dev <= tol || depth >= 18 {
        return;
    }
    refine_proxy(piece, idx, a, (tm, zm), tol, depth + 1, pts, origin);
    pts.push(zm);
    origin.push((idx, tm));
    refine_proxy(piece, idx, (tm, zm), b, tol, depth + 1, pts, origin);
}

fn signed_area_of(pieces: &[CurvePiece]) -> f64 {
    let mut nodes = Vec::new();
    for p in pieces {
        p.quadrature_into(64, &mut nodes);
    }
    nodes
        .iter()
        .map(|n| (n.point.conj() * n.dz).im * 0.5)
        .sum()
}

pub(crate) fn point_segment_distance(p: C64, a: C64, b: C64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a) * ab.conj()).re / len2;
    let t = t.clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

fn golden_min<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> (f64, f64) {
    let (mut lo, mut hi) = if a <= b { (a, b) } else { (b, a) };
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..90 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    let mut best = if f1 < f2 { (x1, f1) } else { (x2, f2) };
    for t in [a, b] {
        let v = f(t);
        if v < best.1 {
            best = (t, v);
        }
    }
    best
}

/// One Gauss node on the boundary: position and the complex weight `dz`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryNode {
    pub point: C64,
    pub dz: C64,
}

/// A midpoint-rule cell of an interior grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCell {
    pub center: C64,
    pub area: f64,
}

/// A hole loop together with a designated point inside it.
#[derive(Debug, Clone)]
pub struct Hole {
    pub boundary: BoundaryComponent,
    pub interior_point: C64,
}

/// Bounded, finitely connected planar domain.
#[derive(Debug, Clone)]
pub struct Domain {
    outer: BoundaryComponent,
    holes: Vec<Hole>,
    diameter: f64,
    bbox: (C64, C64),
}

impl Domain {
    /// Builds and validates a domain. Loop orientations are normalized: the
    /// outer loop becomes counterclockwise and every hole clockwise.
    pub fn new(outer: BoundaryComponent, holes: Vec<(BoundaryComponent, C64)>) -> Result<Self> {
        let outer = outer.oriented(Orientation::Positive);
        let holes: Vec<Hole> = holes
            .into_iter()
            .map(|(b, p)| Hole {
                boundary: b.oriented(Orientation::Negative),
                interior_point: p,
            })
            .collect();
        let hull = convex_hull(outer.proxy());
        let diameter = hull_diameter(&hull);
        let mut lo = C64::new(f64::INFINITY, f64::INFINITY);
        let mut hi = C64::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for z in outer.proxy() {
            lo.re = lo.re.min(z.re);
            lo.im = lo.im.min(z.im);
            hi.re = hi.re.max(z.re);
            hi.im = hi.im.max(z.im);
        }
        // Arcs may bulge past the proxy by at most the proxy tolerance.
        let pad = outer.proxy_tolerance();
        let bbox = (lo - C64::new(pad, pad), hi + C64::new(pad, pad));
        let domain = Self {
            outer,
            holes,
            diameter,
            bbox,
        };
        domain.validate()?;
        Ok(domain)
    }

    fn validate(&self) -> Result<()> {
        let comps: Vec<&BoundaryComponent> = self.components().collect();
        check_simple(&comps)?;
        for (i, hole) in self.holes.iter().enumerate() {
            let probe = hole.boundary.proxy()[0];
            if self.outer.winding_number(probe)? != 1 {
                return Err(Error::Geometry(format!("hole {i} is not inside the outer boundary")));
            }
            for (j, other) in self.holes.iter().enumerate() {
                if i != j && other.boundary.winding_number(probe)? != 0 {
                    return Err(Error::Geometry(format!("holes {i} and {j} overlap")));
                }
            }
            if hole.boundary.winding_number(hole.interior_point)?.abs() != 1 {
                return Err(Error::Geometry(format!(
                    "interior point of hole {i} does not lie inside that hole"
                )));
            }
            let (d, _) = hole.boundary.proxy_distance(hole.interior_point);
            if d < BOUNDARY_REL_TOL * self.diameter {
                return Err(Error::Geometry(format!(
                    "interior point of hole {i} lies on its boundary"
                )));
            }
        }
        Ok(())
    }

    pub fn disk(center: C64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Geometry("disk radius must be positive".into()));
        }
        Self::new(BoundaryComponent::circle(center, radius)?, vec![])
    }

    pub fn annulus(center: C64, inner: f64, outer: f64) -> Result<Self> {
        if !(inner > 0.0 && outer > inner) {
            return Err(Error::Geometry(format!(
                "annulus radii must satisfy 0 < inner < outer (got {inner}, {outer})"
            )));
        }
        Self::new(
            BoundaryComponent::circle(center, outer)?,
            vec![(BoundaryComponent::circle(center, inner)?, center)],
        )
    }

    pub fn ellipse(center: C64, a: f64, b: f64) -> Result<Self> {
        Self::new(BoundaryComponent::ellipse(center, a, b)?, vec![])
    }

    /// Axis-aligned rectangle of the given width and height.
    pub fn rectangle(center: C64, width: f64, height: f64) -> Result<Self> {
        if !(width > 0.0 && height > 0.0) {
            return Err(Error::Geometry("rectangle sides must be positive".into()));
        }
        let (w, h) = (0.5 * width, 0.5 * height);
        Self::polygon(&[
            center + C64::new(-w, -h),
            center + C64::new(w, -h),
            center + C64::new(w, h),
            center + C64::new(-w, h),
        ])
    }

    pub fn polygon(vertices: &[C64]) -> Result<Self> {
        Self::new(BoundaryComponent::polygon(vertices)?, vec![])
    }

    /// Built-in domains by name: `disk`, `annulus:r,R`, `ellipse:a,b`,
    /// `square` (unit side, centered at 0) and `rect:w,h`.
    pub fn builtin(spec: &str) -> Result<Self> {
        let (name, args) = match spec.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a)),
            None => (spec.trim(), None),
        };
        let params: Vec<f64> = match args {
            Some(a) => a
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Input(format!("bad number '{s}' in '{spec}'")))
                })
                .collect::<Result<_>>()?,
            None => vec![],
        };
        let origin = C64::new(0.0, 0.0);
        let want = |n: usize, default: &[f64]| -> Result<Vec<f64>> {
            if params.is_empty() {
                Ok(default.to_vec())
            } else if params.len() == n {
                Ok(params.clone())
            } else {
                Err(Error::Input(format!("'{name}' takes {n} parameters, got '{spec}'")))
            }
        };
        match name {
            "disk" => {
                let p = want(1, &[1.0])?;
                Self::disk(origin, p[0])
            }
            "annulus" => {
                let p = want(2, &[0.5, 1.0])?;
                Self::annulus(origin, p[0], p[1])
            }
            "ellipse" => {
                let p = want(2, &[2.0, 1.0])?;
                Self::ellipse(origin, p[0], p[1])
            }
            "square" => {
                let p = want(1, &[1.0])?;
                Self::rectangle(origin, p[0], p[0])
            }
            "rect" => {
                let p = want(2, &[2.0, 1.0])?;
                Self::rectangle(origin, p[0], p[1])
            }
            _ => Err(Error::Input(format!("unknown built-in domain '{spec}'"))),
        }
    }

    /// Image of the domain under `z -> scale * z + shift` (`scale != 0`).
    pub fn mapped(&self, scale: C64, shift: C64) -> Result<Self> {
        let holes = self
            .holes
            .iter()
            .map(|h| Ok((h.boundary.mapped(scale, shift)?, scale * h.interior_point + shift)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.outer.mapped(scale, shift)?, holes)
    }

    pub fn translated(&self, shift: C64) -> Result<Self> {
        self.mapped(C64::new(1.0, 0.0), shift)
    }

    pub fn outer(&self) -> &BoundaryComponent {
        &self.outer
    }

    pub fn holes(&self) -> &[Hole] {
        &self.holes
    }

    pub fn is_simply_connected(&self) -> bool {
        self.holes.is_empty()
    }

    /// Outer loop first, then the holes.
    pub fn components(&self) -> impl Iterator<Item = &BoundaryComponent> {
        std::iter::once(&self.outer).chain(self.holes.iter().map(|h| &h.boundary))
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Lower-left and upper-right corners of a box containing the closure.
    pub fn bounding_box(&self) -> (C64, C64) {
        self.bbox
    }

    /// Gauss–Legendre nodes of the given order on every piece of every loop.
    pub fn boundary_quadrature(&self, order: usize) -> Result<Vec<BoundaryNode>> {
        if order < 2 {
            return Err(Error::Input(format!("quadrature order {order} < 2")));
        }
        let mut nodes = Vec::new();
        for c in self.components() {
            for p in c.pieces() {
                p.quadrature_into(order, &mut nodes);
            }
        }
        Ok(nodes)
    }

    /// Adaptive boundary integration of several integrands at once.
    ///
    /// `eval` receives the nodes of one Gauss order and returns, per
    /// integrand, the quadrature sum and a magnitude scale (typically
    /// `sum |integrand| |dz|`). The order starts at 16 per piece and doubles
    /// until successive sums agree to 1e-10 of their scale or order 256 is
    /// reached; disagreement above 1e-9 at that point is an accuracy error.
    pub fn integrate_boundary<F>(&self, eval: F) -> Result<Vec<C64>>
    where
        F: Fn(&[BoundaryNode]) -> Vec<(C64, f64)>,
    {
        let mut order = 16;
        let mut prev = eval(&self.boundary_quadrature(order)?);
        loop {
            order *= 2;
            let next = eval(&self.boundary_quadrature(order)?);
            let worst = prev
                .iter()
                .zip(&next)
                .map(|((a, _), (b, mag))| (a - b).norm() / b.norm().max(*mag).max(f64::MIN_POSITIVE))
                .fold(0.0, f64::max);
            if worst <= 1e-10 {
                return Ok(next.into_iter().map(|(v, _)| v).collect());
            }
            if order >= 256 {
                if worst <= 1e-9 {
                    return Ok(next.into_iter().map(|(v, _)| v).collect());
                }
                return Err(Error::Accuracy(format!(
                    "relative disagreement {worst:e} between orders {} and {order}",
                    order / 2
                )));
            }
            prev = next;
        }
    }

    /// Adaptive integral of a single boundary integrand `f(z) dz`.
    pub fn integrate_dz<F: Fn(C64) -> C64>(&self, f: F) -> Result<C64> {
        let out = self.integrate_boundary(|nodes| {
            let mut sum = C64::new(0.0, 0.0);
            let mut mag = 0.0;
            for n in nodes {
                let v = f(n.point) * n.dz;
                sum += v;
                mag += v.norm();
            }
            vec![(sum, mag)]
        })?;
        Ok(out[0])
    }

    /// Area as `(1/2i) ∮ z̄ dz` over all loops.
    pub fn area(&self) -> f64 {
        let v = self
            .integrate_dz(|z| z.conj())
            .expect("area integrand is smooth on every piece");
        (v / C64::new(0.0, 2.0)).re
    }

    /// Area as `(1/2) ∮ (x dy - y dx)`, evaluated in real arithmetic.
    pub fn area_from_cross_product(&self) -> f64 {
        let nodes = self.boundary_quadrature(64).expect("order is valid");
        0.5 * nodes
            .iter()
            .map(|n| n.point.re * n.dz.im - n.point.im * n.dz.re)
            .sum::<f64>()
    }

    pub fn perimeter(&self) -> f64 {
        let nodes = self.boundary_quadrature(64).expect("order is valid");
        nodes.iter().map(|n| n.dz.norm()).sum()
    }

    /// Area centroid `(1/A) ∫ z dA`.
    pub fn centroid(&self) -> C64 {
        let m = self
            .integrate_dz(|z| z * z.conj())
            .expect("centroid integrand is smooth on every piece")
            / C64::new(0.0, 2.0);
        m / self.area()
    }

    /// Distance from `p` to the boundary measured on the proxy polylines.
    pub fn boundary_distance(&self, p: C64) -> f64 {
        self.components()
            .map(|c| c.proxy_distance(p).0)
            .fold(f64::INFINITY, f64::min)
    }

    /// Membership by total winding number, with an exact check for points that
    /// fall between a curved piece and its proxy.
    pub fn contains(&self, p: C64) -> Result<bool> {
        let ambiguous = BOUNDARY_REL_TOL * self.diameter;
        let mut nearest: Option<(f64, &BoundaryComponent, usize)> = None;
        for c in self.components() {
            let (d, seg) = c.proxy_distance(p);
            if nearest.is_none_or(|(bd, _, _)| d < bd) {
                nearest = Some((d, c, seg));
            }
        }
        let (d, comp, seg) = nearest.expect("domain has an outer loop");
        if d <= 4.0 * comp.proxy_tolerance() + ambiguous {
            let (exact, zstar, tangent) = comp.refine_nearest(p, seg);
            let exact = exact.min(d);
            if exact <= ambiguous {
                return Err(Error::AmbiguousMembership {
                    x: p.re,
                    y: p.im,
                    distance: exact,
                });
            }
            if let Some(tau) = tangent {
                // The domain lies to the left of every oriented loop.
                return Ok((tau.conj() * (p - zstar)).im > 0.0);
            }
        }
        let mut w = 0;
        for c in self.components() {
            w += c.winding_number(p)?;
        }
        Ok(w == 1)
    }

    /// Sorted abscissae where the horizontal line `y` crosses the boundary proxies.
    pub fn row_crossings(&self, y: f64) -> Vec<f64> {
        let mut xs = Vec::new();
        for c in self.components() {
            let pts = c.proxy();
            let n = pts.len();
            for i in 0..n {
                let a = pts[i];
                let b = pts[(i + 1) % n];
                if (a.im > y) != (b.im > y) {
                    let t = (y - a.im) / (b.im - a.im);
                    xs.push(a.re + t * (b.re - a.re));
                }
            }
        }
        xs.sort_by(|a, b| a.total_cmp(b));
        xs
    }

    /// Sorted ordinates where the vertical line `x` crosses the boundary proxies.
    pub fn column_crossings(&self, x: f64) -> Vec<f64> {
        let mut ys = Vec::new();
        for c in self.components() {
            let pts = c.proxy();
            let n = pts.len();
            for i in 0..n {
                let a = pts[i];
                let b = pts[(i + 1) % n];
                if (a.re > x) != (b.re > x) {
                    let t = (x - a.re) / (b.re - a.re);
                    ys.push(a.im + t * (b.im - a.im));
                }
            }
        }
        ys.sort_by(|a, b| a.total_cmp(b));
        ys
    }

    /// Midpoint-rule cells of side `spacing`, anchored at the lower-left
    /// corner of the bounding box, whose centers lie in the domain.
    pub fn interior_grid(&self, spacing: f64) -> Result<Vec<GridCell>> {
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::Input(format!("grid spacing {spacing} must be positive")));
        }
        if spacing > self.diameter {
            return Err(Error::EmptyGrid(format!(
                "spacing {spacing} exceeds the domain diameter {}",
                self.diameter
            )));
        }
        let (lo, hi) = self.tight_box();
        let nx = ((hi.re - lo.re) / spacing).ceil().max(1.0) as usize;
        let ny = ((hi.im - lo.im) / spacing).ceil().max(1.0) as usize;
        let area = spacing * spacing;
        let mut cells = Vec::new();
        for j in 0..ny {
            let y = lo.im + (j as f64 + 0.5) * spacing;
            let xs = self.row_crossings(y);
            for pair in xs.chunks_exact(2) {
                let first = ((pair[0] - lo.re) / spacing - 0.5).ceil().max(0.0) as usize;
                let mut i = first;
                while i < nx {
                    let x = lo.re + (i as f64 + 0.5) * spacing;
                    if x >= pair[1] {
                        break;
                    }
                    if x > pair[0] {
                        cells.push(GridCell {
                            center: C64::new(x, y),
                            area,
                        });
                    }
                    i += 1;
                }
            }
        }
        if cells.is_empty() {
            return Err(Error::EmptyGrid(format!("no cell centers inside at spacing {spacing}")));
        }
        Ok(cells)
    }

    /// Deterministic quasi-random points of the domain (Halton sequence in
    /// bases 2 and 3 over the bounding box, starting after index `seed`)
    /// whose distance to the boundary exceeds `margin`.
    pub fn sample_interior(&self, count: usize, margin: f64, seed: u64) -> Result<Vec<C64>> {
        let (lo, hi) = self.tight_box();
        let mut pts = Vec::with_capacity(count);
        let limit = seed + 1 + 10_000 * count.max(1) as u64;
        let mut k = seed;
        while pts.len() < count {
            k += 1;
            if k > limit {
                return Err(Error::EmptyGrid(format!(
                    "found only {} of {count} points at distance > {margin} from the boundary",
                    pts.len()
                )));
            }
            let z = C64::new(
                lo.re + radical_inverse(k, 2) * (hi.re - lo.re),
                lo.im + radical_inverse(k, 3) * (hi.im - lo.im),
            );
            if self.boundary_distance(z) > margin && self.contains(z).unwrap_or(false) {
                pts.push(z);
            }
        }
        Ok(pts)
    }

    /// Bounding box of the proxies without padding.
    fn tight_box(&self) -> (C64, C64) {
        let pad = self.outer.proxy_tolerance();
        (self.bbox.0 + C64::new(pad, pad), self.bbox.1 - C64::new(pad, pad))
    }
}

fn radical_inverse(mut k: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut r = 0.0;
    while k > 0 {
        r += (k % base) as f64 * inv;
        k /= base;
        inv /= base as f64;
    }
    r
}

fn cross(a: C64, b: C64) -> f64 {
    a.re * b.im - a.im * b.re
}

fn convex_hull(points: &[C64]) -> Vec<C64> {
    let mut pts: Vec<C64> = points.to_vec();
    pts.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<C64> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 1] - lower[lower.len() - 2], p - lower[lower.len() - 2]) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<C64> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 1] - upper[upper.len() - 2], p - upper[upper.len() - 2]) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn hull_diameter(hull: &[C64]) -> f64 {
    let n = hull.len();
    match n {
        0 | 1 => return 0.0,
        2 => return (hull[0] - hull[1]).norm(),
        _ => {}
    }
    let mut best: f64 = 0.0;
    let mut j = 1;
    for i in 0..n {
        let ni = (i + 1) % n;
        let edge = hull[ni] - hull[i];
        while cross(edge, hull[(j + 1) % n] - hull[i]).abs() > cross(edge, hull[j] - hull[i]).abs() {
            j = (j + 1) % n;
        }
        best = best
            .max((hull[i] - hull[j]).norm())
            .max((hull[ni] - hull[j]).norm());
    }
    best
}

fn segments_intersect(a: C64, b: C64, c: C64, d: C64) -> bool {
    let d1 = cross(b - a, c - a);
    let d2 = cross(b - a, d - a);
    let d3 = cross(d - c, a - c);
    let d4 = cross(d - c, b - c);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |p: C64, q: C64, r: C64, o: f64| {
        o == 0.0
            && r.re >= p.re.min(q.re)
            && r.re <= p.re.max(q.re)
            && r.im >= p.im.min(q.im)
            && r.im <= p.im.max(q.im)
    };
    on(a, b, c, d1) || on(a, b, d, d2) || on(c, d, a, d3) || on(c, d, b, d4)
}

/// Rejects any pair of non-adjacent proxy segments that touch, within and
/// across loops. Segments are bucketed on a uniform grid.
pub(crate) fn check_simple(components: &[&BoundaryComponent]) -> Result<()> {
    struct Seg {
        comp: usize,
        idx: usize,
        len: usize,
        a: C64,
        b: C64,
    }
    let mut segs = Vec::new();
    for (ci, c) in components.iter().enumerate() {
        let pts = c.proxy();
        let n = pts.len();
        for i in 0..n {
            segs.push(Seg {
                comp: ci,
                idx: i,
                len: n,
                a: pts[i],
                b: pts[(i + 1) % n],
            });
        }
    }
    let mut lo = C64::new(f64::INFINITY, f64::INFINITY);
    let mut hi = C64::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut total_len = 0.0;
    for s in &segs {
        for z in [s.a, s.b] {
            lo.re = lo.re.min(z.re);
            lo.im = lo.im.min(z.im);
            hi.re = hi.re.max(z.re);
            hi.im = hi.im.max(z.im);
        }
        total_len += (s.b - s.a).norm();
    }
    let cell = (2.0 * total_len / segs.len() as f64).max(1e-300);
    let nx = (((hi.re - lo.re) / cell).floor() as usize + 1).min(4096);
    let ny = (((hi.im - lo.im) / cell).floor() as usize + 1).min(4096);
    let cx = (hi.re - lo.re).max(1e-300) / nx as f64;
    let cy = (hi.im - lo.im).max(1e-300) / ny as f64;
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); nx * ny];
    let to_cell = |v: f64, o: f64, c: f64, n: usize| (((v - o) / c).floor().max(0.0) as usize).min(n - 1);
    for (k, s) in segs.iter().enumerate() {
        let (x0, x1) = (s.a.re.min(s.b.re), s.a.re.max(s.b.re));
        let (y0, y1) = (s.a.im.min(s.b.im), s.a.im.max(s.b.im));
        for i in to_cell(x0, lo.re, cx, nx)..=to_cell(x1, lo.re, cx, nx) {
            for j in to_cell(y0, lo.im, cy, ny)..=to_cell(y1, lo.im, cy, ny) {
                buckets[j * nx + i].push(k);
            }
        }
    }
    for bucket in &buckets {
        for (p, &i) in bucket.iter().enumerate() {
            for &j in &bucket[p + 1..] {
                let (s, t) = (&segs[i], &segs[j]);
                if s.comp == t.comp {
                    let n = s.len;
                    if (s.idx + 1) % n == t.idx || (t.idx + 1) % n == s.idx {
                        continue;
                    }
                }
                if segments_intersect(s.a, s.b, t.a, t.b) {
                    return Err(Error::Geometry(format!(
                        "boundary is not simple: loops {} and {} intersect near {:.6} + {:.6}i",
                        s.comp, t.comp, s.a.re, s.a.im
                    )));
                }
            }
        }
    }
    Ok(())
}
