//! Bergman analytic content and the inequalities that bracket it: the
//! torsion sandwich, St. Venant, the eigenvalue chain and the Cauchy
//! transform norm.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::basis::{BasisElement, BasisSpec};
use crate::bergman::{area_bound, project_zbar};
use crate::error::{Error, Result};
use crate::geometry::{CurvePiece, Domain};
use crate::poisson::{bessel_j0_first_zero, dirichlet_ground_eigenvalue, torsional_rigidity};
use crate::quadrature::gauss_legendre;

/// Relative slack added to every ordering check to absorb rounding.
const ROUNDING: f64 = 1e-12;
const PANEL_ORDER: usize = 10;
/// Public evaluations closer than this fraction of the diameter to the
/// boundary are refused.
const MIN_BOUNDARY_DISTANCE: f64 = 1e-9;
/// Cells whose centers lie within this many spacings of the boundary are subdivided.
const NEAR_CELLS: f64 = 2.0;
const SUBDIVISION: usize = 4;

#[derive(Debug, Clone)]
pub struct SandwichReport {
    pub label: String,
    pub sqrt_rho: f64,
    pub sqrt_rho_error: f64,
    pub lambda: f64,
    /// Change in `lambda` when the two highest monomial degrees are dropped.
    pub lambda_error: f64,
    /// `Area / √(2π)`.
    pub upper: f64,
    pub basis: BasisSpec,
    pub area: f64,
    pub perimeter: f64,
}

impl SandwichReport {
    /// `lambda - sqrt_rho`.
    pub fn lower_margin(&self) -> f64 {
        self.lambda - self.sqrt_rho
    }

    /// `upper - lambda`.
    pub fn upper_margin(&self) -> f64 {
        self.upper - self.lambda
    }

    /// `sqrt_rho ≤ lambda ≤ upper` up to the combined error estimates.
    pub fn ordering_holds(&self) -> bool {
        let slack = ROUNDING * self.upper;
        self.lower_margin() >= -(self.sqrt_rho_error + self.lambda_error + slack)
            && self.upper_margin() >= -(self.lambda_error + slack)
    }
}

/// Basis with the two highest monomial degrees removed, or `None` if that
/// leaves nothing to compare against.
fn reduced_basis(basis: &BasisSpec) -> Option<BasisSpec> {
    let top = basis
        .elements()
        .iter()
        .filter_map(|e| match e {
            BasisElement::Monomial { exponent, .. } => Some(*exponent),
            _ => None,
        })
        .max()?;
    if top < 2 {
        return None;
    }
    let kept: Vec<BasisElement> = basis
        .elements()
        .iter()
        .filter(|e| !matches!(e, BasisElement::Monomial { exponent, .. } if *exponent > top - 2))
        .cloned()
        .collect();
    BasisSpec::new(kept).ok()
}

/// `√ρ ≤ λ ≤ Area/√(2π)` with `ρ` from the stress function at spacing `h`
/// and `λ` from the projection onto `basis`.
pub fn sandwich(label: &str, domain: &Domain, basis: &BasisSpec, h: f64) -> Result<SandwichReport> {
    let (projection, rigidity) = rayon::join(|| project_zbar(domain, basis), || torsional_rigidity(domain, h));
    let projection = projection?;
    let rigidity = rigidity?;
    let lambda_error = match reduced_basis(basis) {
        Some(b) => (project_zbar(domain, &b)?.lambda - projection.lambda).abs(),
        None => 0.0,
    };
    let sqrt_rho = rigidity.rho.max(0.0).sqrt();
    Ok(SandwichReport {
        label: label.to_string(),
        sqrt_rho,
        sqrt_rho_error: rigidity.error_estimate / (2.0 * sqrt_rho),
        lambda: projection.lambda,
        lambda_error,
        upper: area_bound(domain),
        basis: basis.clone(),
        area: domain.area(),
        perimeter: domain.perimeter(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StVenantReport {
    pub rho: f64,
    pub rho_error: f64,
    /// `Area² / (2π)`.
    pub bound: f64,
    /// `bound - rho`.
    pub margin: f64,
    pub satisfied: bool,
}

/// `ρ ≤ Area²/(2π)` for a simply connected domain.
pub fn st_venant_check(domain: &Domain, h: f64) -> Result<StVenantReport> {
    if !domain.is_simply_connected() {
        return Err(Error::Input("St. Venant check needs a simply connected domain".into()));
    }
    let r = torsional_rigidity(domain, h)?;
    let bound = domain.area().powi(2) / (2.0 * PI);
    let margin = bound - r.rho;
    Ok(StVenantReport {
        rho: r.rho,
        rho_error: r.error_estimate,
        bound,
        margin,
        satisfied: margin >= -(r.error_estimate + ROUNDING * bound),
    })
}

/// The ground eigenvalue against the disk of equal area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenChainReport {
    pub eigenvalue: f64,
    pub eigenvalue_error: f64,
    /// `2 / √Λ₁`.
    pub lhs: f64,
    /// `(2 / j₀) √(Area / π)`.
    pub rhs: f64,
    /// `4 Area² / (j₀² π)`.
    pub coarse_bound: f64,
    /// `Area² / (2π)`.
    pub st_venant_bound: f64,
}

impl EigenChainReport {
    pub fn chain_holds(&self) -> bool {
        let err = self.lhs * self.eigenvalue_error / (2.0 * self.eigenvalue);
        self.lhs <= self.rhs + err + ROUNDING * self.rhs
    }

    /// The coarse bound is strictly weaker than St. Venant.
    pub fn coarse_is_weaker(&self) -> bool {
        self.coarse_bound > self.st_venant_bound
    }
}

pub fn eigen_chain(domain: &Domain, h: f64) -> Result<EigenChainReport> {
    let e = dirichlet_ground_eigenvalue(domain, h)?;
    let j0 = bessel_j0_first_zero();
    let area = domain.area();
    Ok(EigenChainReport {
        eigenvalue: e.value,
        eigenvalue_error: e.error_estimate,
        lhs: 2.0 / e.value.sqrt(),
        rhs: 2.0 / j0 * (area / PI).sqrt(),
        coarse_bound: 4.0 * area * area / (j0 * j0 * PI),
        st_venant_bound: area * area / (2.0 * PI),
    })
}

/// Gauss panels covering the boundary, reused across evaluation points.
struct PanelSet<'a> {
    panels: Vec<Panel<'a>>,
    /// Absolute tolerance for adaptively refined panels.
    tol: f64,
}

struct Panel<'a> {
    piece: &'a CurvePiece,
    a: f64,
    b: f64,
    center: C64,
    length: f64,
    /// Nodes and weights `w dz`.
    nodes: Vec<(C64, C64)>,
}

impl<'a> PanelSet<'a> {
    /// Panels no longer than `max_length`.
    fn new(domain: &'a Domain, max_length: f64) -> Self {
        let rule = gauss_legendre(PANEL_ORDER);
        let mut panels = Vec::new();
        for comp in domain.components() {
            for piece in comp.pieces() {
                let (t0, t1) = piece.parameter_range();
                // Arc length by a coarse Gauss pass decides the panel count.
                let length: f64 = rule.mapped(t0, t1).map(|(t, w)| piece.tangent(t).norm() * w).sum();
                let count = (length / max_length).ceil().max(1.0) as usize;
                for k in 0..count {
                    let a = t0 + (t1 - t0) * k as f64 / count as f64;
                    let b = t0 + (t1 - t0) * (k + 1) as f64 / count as f64;
                    let nodes: Vec<(C64, C64)> = rule
                        .mapped(a, b)
                        .map(|(t, w)| (piece.point(t), piece.tangent(t) * w))
                        .collect();
                    let length = nodes.iter().map(|n| n.1.norm()).sum();
                    panels.push(Panel {
                        piece,
                        a,
                        b,
                        center: piece.point(0.5 * (a + b)),
                        length,
                        nodes,
                    });
                }
            }
        }
        let total: f64 = panels.iter().map(|p| p.length).sum();
        Self { panels, tol: 1e-14 * total }
    }

    /// `(1/2πi) ∮ (z̄ - ζ̄) / (z - ζ) dz`.
    fn transform(&self, zeta: C64) -> C64 {
        let f = |z: C64| (z - zeta).conj() / (z - zeta);
        let mut sum = C64::new(0.0, 0.0);
        for p in &self.panels {
            if (p.center - zeta).norm() > 2.0 * p.length {
                sum += p.nodes.iter().map(|&(z, w)| f(z) * w).sum::<C64>();
            } else {
                sum += adaptive(p.piece, p.a, p.b, &f, self.tol);
            }
        }
        sum / C64::new(0.0, 2.0 * PI)
    }
}

/// Adaptive Gauss–Legendre integral of `f(z) dz` over `[a, b]` of one piece,
/// for `|f| ≤ 1`. A panel is accepted once its two halves agree with it to
/// `tol`, or once it is too short to contribute more than `tol`.
fn adaptive<F: Fn(C64) -> C64>(piece: &CurvePiece, a: f64, b: f64, f: &F, tol: f64) -> C64 {
    let rule = gauss_legendre(PANEL_ORDER);
    let panel = |a: f64, b: f64| -> C64 {
        rule.mapped(a, b)
            .map(|(t, w)| f(piece.point(t)) * piece.tangent(t) * w)
            .sum()
    };
    let mut total = C64::new(0.0, 0.0);
    let mut stack = vec![(a, b, panel(a, b))];
    while let Some((a, b, whole)) = stack.pop() {
        let m = 0.5 * (a + b);
        let (left, right) = (panel(a, m), panel(m, b));
        let length = (piece.tangent(m) * (b - a)).norm();
        if (left + right - whole).norm() <= tol || length <= tol || b - a <= 4.0 * f64::EPSILON * m.abs() {
            total += left + right;
        } else {
            stack.push((m, b, right));
            stack.push((a, m, left));
        }
    }
    total
}

/// `(1/π) ∫_Ω dA(z) / (z - ζ)` for `ζ` in `Ω`, by the boundary form
/// `(1/2πi) ∮ (z̄ - ζ̄) / (z - ζ) dz`, whose integrand stays bounded.
pub fn cauchy_transform(domain: &Domain, zeta: C64) -> Result<C64> {
    let distance = domain.boundary_distance(zeta);
    if distance <= MIN_BOUNDARY_DISTANCE * domain.diameter() {
        return Err(Error::NearBoundary {
            x: zeta.re,
            y: zeta.im,
            distance,
        });
    }
    if !domain.contains(zeta)? {
        return Err(Error::Input(format!("{zeta} is not in the domain")));
    }
    Ok(PanelSet::new(domain, domain.diameter() / 64.0).transform(zeta))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CauchyNormReport {
    pub label: String,
    /// `‖(1/π) ∫_Ω dA(z)/(z - ζ)‖` in `L²(Ω)`.
    pub norm: f64,
    /// Change in `norm` when the spacing is doubled.
    pub error_estimate: f64,
    /// `Area / √(2π)`.
    pub bound: f64,
    /// `norm ≤ bound`; evidence only.
    pub conjecture_satisfied: bool,
    pub h: f64,
}

impl CauchyNormReport {
    pub fn margin(&self) -> f64 {
        self.bound - self.norm
    }
}

fn parity_inside(crossings: &[f64], v: f64) -> bool {
    crossings.iter().filter(|&&c| c < v).count() % 2 == 1
}

fn near_crossing(crossings: &[f64], v: f64, reach: f64) -> bool {
    crossings.iter().any(|&c| (c - v).abs() < reach)
}

/// `∫_Ω |C(ζ)|² dA` by the midpoint rule on cells of side `h`. Cells whose
/// centers lie within `2h` of the boundary, measured along the grid lines
/// through them, are split into `4 × 4` subcells.
fn cauchy_norm_sq(domain: &Domain, h: f64) -> f64 {
    let (lo, hi) = domain.bounding_box();
    let nx = ((hi.re - lo.re) / h).ceil() as usize;
    let ny = ((hi.im - lo.im) / h).ceil() as usize;
    // A boundary within distance r of a point crosses one of the two grid
    // lines through it within r√2.
    let reach = NEAR_CELLS * h * std::f64::consts::SQRT_2;
    let sub = h / SUBDIVISION as f64;
    let panels = PanelSet::new(domain, h);
    let x = |i: usize| lo.re + (i as f64 + 0.5) * h;
    let y = |j: usize| lo.im + (j as f64 + 0.5) * h;
    let columns: Vec<Vec<f64>> = (0..nx).map(|i| domain.column_crossings(x(i))).collect();
    let rows: Vec<f64> = (0..ny)
        .into_par_iter()
        .map(|j| {
            let row_x = domain.row_crossings(y(j));
            let sub_rows: Vec<(f64, Vec<f64>)> = (0..SUBDIVISION)
                .map(|q| {
                    let ys = y(j) - 0.5 * h + (q as f64 + 0.5) * sub;
                    (ys, domain.row_crossings(ys))
                })
                .collect();
            let mut row = 0.0;
            for i in 0..nx {
                let center = C64::new(x(i), y(j));
                if !near_crossing(&row_x, center.re, reach) && !near_crossing(&columns[i], center.im, reach) {
                    if parity_inside(&row_x, center.re) {
                        row += h * h * panels.transform(center).norm_sqr();
                    }
                    continue;
                }
                for (ys, xs) in &sub_rows {
                    for p in 0..SUBDIVISION {
                        let xs_p = center.re - 0.5 * h + (p as f64 + 0.5) * sub;
                        if parity_inside(xs, xs_p) {
                            row += sub * sub * panels.transform(C64::new(xs_p, *ys)).norm_sqr();
                        }
                    }
                }
            }
            row
        })
        .collect();
    rows.iter().sum()
}

/// Tests `‖(1/π) ∫_Ω dA(z)/(z - ζ)‖₂ ≤ Area/√(2π)` at spacing `h`, with
/// an error estimate from a second pass at `2h`.
pub fn cauchy_norm_conjecture(label: &str, domain: &Domain, h: f64) -> Result<CauchyNormReport> {
    if !(h > 0.0) || h > domain.diameter() / 8.0 {
        return Err(Error::Input(format!("spacing {h} must lie in (0, diameter/8]")));
    }
    let (fine, coarse) = rayon::join(|| cauchy_norm_sq(domain, h), || cauchy_norm_sq(domain, 2.0 * h));
    let norm = fine.sqrt();
    let coarse = coarse.sqrt();
    let bound = area_bound(domain);
    Ok(CauchyNormReport {
        label: label.to_string(),
        norm,
        error_estimate: (norm - coarse).abs(),
        bound,
        conjecture_satisfied: norm <= bound,
        h,
    })
}

/// One domain's worth of sweep output.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub sandwich: SandwichReport,
    pub st_venant: Option<StVenantReport>,
    pub cauchy: CauchyNormReport,
}

impl SweepRow {
    /// Every proven inequality holds within its error estimate.
    pub fn inequalities_hold(&self) -> bool {
        self.sandwich.ordering_holds() && self.st_venant.is_none_or(|s| s.satisfied)
    }
}

/// Grid spacings used by the sweep, relative to the domain diameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpacing {
    pub rigidity: f64,
    pub cauchy: f64,
}

impl Default for SweepSpacing {
    fn default() -> Self {
        Self {
            rigidity: 1.0 / 256.0,
            cauchy: 1.0 / 128.0,
        }
    }
}

pub fn sweep_row(label: &str, domain: &Domain, basis: &BasisSpec, spacing: SweepSpacing) -> Result<SweepRow> {
    let d = domain.diameter();
    let sandwich = sandwich(label, domain, basis, spacing.rigidity * d)?;
    let st_venant = if domain.is_simply_connected() {
        // The sandwich already solved the same grids; reuse its ρ.
        let rho = sandwich.sqrt_rho.powi(2);
        let rho_error = 2.0 * sandwich.sqrt_rho * sandwich.sqrt_rho_error;
        let bound = sandwich.area.powi(2) / (2.0 * PI);
        Some(StVenantReport {
            rho,
            rho_error,
            bound,
            margin: bound - rho,
            satisfied: bound - rho >= -(rho_error + ROUNDING * bound),
        })
    } else {
        None
    };
    let cauchy = cauchy_norm_conjecture(label, domain, spacing.cauchy * d)?;
    Ok(SweepRow {
        sandwich,
        st_venant,
        cauchy,
    })
}

/// Rows in input order; domains are processed in parallel.
pub fn sweep(domains: &[(String, Domain, BasisSpec)], spacing: SweepSpacing) -> Result<Vec<SweepRow>> {
    domains
        .par_iter()
        .map(|(label, d, b)| sweep_row(label, d, b, spacing))
        .collect()
}

pub const SWEEP_HEADER: &str = "domain,area,perimeter,sqrt_rho,lambda,upper,cauchy_norm,\
lower_margin,upper_margin,st_venant_margin,cauchy_margin,sqrt_rho_error,lambda_error,cauchy_error";

/// Quotes a CSV field that contains a comma or a quote.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Writes the header and one line per row. Domains that are not simply
/// connected leave the St. Venant column empty.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{SWEEP_HEADER}")?;
    for r in rows {
        let s = &r.sandwich;
        let st = r.st_venant.map(|v| format!("{:e}", v.margin)).unwrap_or_default();
        writeln!(
            out,
            "{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{},{:e},{:e},{:e},{:e}",
            csv_field(&s.label),
            s.area,
            s.perimeter,
            s.sqrt_rho,
            s.lambda,
            s.upper,
            r.cauchy.norm,
            s.lower_margin(),
            s.upper_margin(),
            st,
            r.cauchy.margin(),
            s.sqrt_rho_error,
            s.lambda_error,
            r.cauchy.error_estimate
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_transform_is_minus_conjugate() {
        let d = Domain::builtin("disk").unwrap();
        for zeta in [C64::new(0.0, 0.0), C64::new(0.3, -0.2), C64::new(-0.9, 0.1)] {
            let v = cauchy_transform(&d, zeta).unwrap();
            assert!((v + zeta.conj()).norm() < 1e-12, "{zeta}: {v}");
        }
    }

    #[test]
    fn outside_point_is_rejected() {
        let d = Domain::builtin("disk").unwrap();
        assert!(matches!(cauchy_transform(&d, C64::new(2.0, 0.0)), Err(Error::Input(_))));
        assert!(matches!(cauchy_transform(&d, C64::new(1.0, 0.0)), Err(Error::NearBoundary { .. })));
    }

    #[test]
    fn reduced_basis_drops_top_degrees() {
        let b = BasisSpec::monomials(C64::new(0.0, 0.0), 1.0, 5).unwrap();
        assert_eq!(reduced_basis(&b).unwrap().len(), 4);
        let b = BasisSpec::monomials(C64::new(0.0, 0.0), 1.0, 1).unwrap();
        assert!(reduced_basis(&b).is_none());
    }
}
