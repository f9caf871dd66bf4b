//! Bergman projection of `z̄` onto a finite analytic subspace, its
//! antiderivative, and the boundary identity `|z|² = c0 + 2 Re F` that
//! certifies the projection.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;

use num_complex::Complex64 as C64;

use crate::basis::{BasisElement, BasisSpec};
use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::linalg::{Matrix, PivotedCholesky};
use crate::moments::{assemble_normal_equations, inner_product_swapped, zbar_inner_product, zbar_norm_sq};

/// Pivots of the equilibrated Gram matrix below this are a rank deficiency.
const PIVOT_THRESHOLD: f64 = 1e-14;
/// Ridge `ε = RIDGE_FACTOR · trace / dim` applied after a failed factorization.
const RIDGE_FACTOR: f64 = 1e-12;
/// Log coefficients whose imaginary part exceeds this fraction of their
/// modulus make `Re F` multivalued.
pub const LOG_IMAG_TOL: f64 = 1e-8;
/// Minimum number of boundary samples used by [`boundary_defect`].
pub const DEFECT_SAMPLES: usize = 512;

/// Numerical side information of one projection.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    /// Ridge added to the equilibrated Gram matrix, if the plain
    /// factorization failed.
    pub ridge: Option<f64>,
    /// Magnitude of a negative radicand that was clamped to zero.
    pub clamped: Option<f64>,
    /// Indices of simple-pole elements whose coefficient is not real.
    pub nonreal_log_coefficients: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct ProjectionResult {
    pub basis: BasisSpec,
    pub coefficients: Vec<C64>,
    /// `‖z̄ - f‖₂`.
    pub lambda: f64,
    /// `‖z̄‖²`.
    pub zbar_norm_sq: f64,
    /// `‖f‖² = cᴴ G c`.
    pub projection_norm_sq: f64,
    /// Squared ratio of extreme Cholesky pivots of the equilibrated Gram matrix.
    pub condition_estimate: f64,
    pub diagnostics: Diagnostics,
    /// Domain centroid, used to orient logarithm cuts.
    pub centroid: C64,
}

/// Best approximation to `z̄` in the span of `basis`, via the normal
/// equations `G c = b` with `G[i][j] = ⟨φ_j, φ_i⟩` and `b[i] = ⟨z̄, φ_i⟩`.
///
/// The system is scaled to unit diagonal and factored with diagonal
/// pivoting. If that fails, a ridge `ε = 1e-12 · trace / dim` is added and
/// recorded in the diagnostics.
pub fn project_zbar(domain: &Domain, basis: &BasisSpec) -> Result<ProjectionResult> {
    let (gram, rhs) = assemble_normal_equations(domain, basis)?;
    let n = gram.dim();
    let scale: Vec<f64> = (0..n)
        .map(|i| {
            let d = gram.get(i, i).re;
            if d > 0.0 {
                1.0 / d.sqrt()
            } else {
                1.0
            }
        })
        .collect();
    let mut eq = Matrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            eq.set(i, j, gram.get(i, j) * (scale[i] * scale[j]));
        }
    }
    let rhs_eq: Vec<C64> = rhs.iter().zip(&scale).map(|(b, s)| b * s).collect();

    let mut diagnostics = Diagnostics::default();
    let factor = match PivotedCholesky::factor(&eq, PIVOT_THRESHOLD) {
        Ok(f) => f,
        Err(_) => {
            let eps = RIDGE_FACTOR * eq.trace().re / n as f64;
            let mut ridged = eq.clone();
            for i in 0..n {
                ridged.set(i, i, ridged.get(i, i) + eps);
            }
            diagnostics.ridge = Some(eps);
            PivotedCholesky::factor(&ridged, 0.0).map_err(|e| Error::Conditioning {
                condition: 1.0 / e.pivot.max(f64::MIN_POSITIVE),
            })?
        }
    };
    let condition_estimate = factor.condition_estimate();
    let c_eq = factor.solve(&rhs_eq);
    let coefficients: Vec<C64> = c_eq.iter().zip(&scale).map(|(c, s)| c * s).collect();
    if coefficients.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::Conditioning {
            condition: condition_estimate,
        });
    }

    let zbar_sq = zbar_norm_sq(domain)?;
    let proj_sq = gram.quadratic_form(&coefficients).re;
    let radicand = zbar_sq - proj_sq;
    let lambda = if radicand < 0.0 {
        diagnostics.clamped = Some(-radicand);
        0.0
    } else {
        radicand.sqrt()
    };
    for (k, (e, c)) in basis.elements().iter().zip(&coefficients).enumerate() {
        if e.is_logarithmic() && c.im.abs() > LOG_IMAG_TOL * c.norm() {
            diagnostics.nonreal_log_coefficients.push(k);
        }
    }
    Ok(ProjectionResult {
        basis: basis.clone(),
        coefficients,
        lambda,
        zbar_norm_sq: zbar_sq,
        projection_norm_sq: proj_sq,
        condition_estimate,
        diagnostics,
        centroid: domain.centroid(),
    })
}

impl ProjectionResult {
    /// `f(z) = Σ c_k φ_k(z)`.
    pub fn evaluate_f(&self, z: C64) -> Result<C64> {
        let mut s = C64::new(0.0, 0.0);
        for (e, c) in self.basis.elements().iter().zip(&self.coefficients) {
            s += c * e.try_eval(z)?;
        }
        Ok(s)
    }

    /// Termwise antiderivative with integration constant 0.
    pub fn antiderivative(&self) -> AnalyticExpansion {
        let mut terms = Vec::new();
        for (e, &c) in self.basis.elements().iter().zip(&self.coefficients) {
            let term = match *e {
                BasisElement::Monomial {
                    center,
                    scale,
                    exponent,
                } => {
                    let k = exponent + 1;
                    ExpansionTerm {
                        coefficient: c * (scale / k as f64),
                        kind: TermKind::Power {
                            center,
                            scale,
                            exponent: k,
                        },
                    }
                }
                BasisElement::Pole { location, order } if order >= 2 => ExpansionTerm {
                    coefficient: c * (-1.0 / (order - 1) as f64),
                    kind: TermKind::InversePower {
                        location,
                        order: order - 1,
                    },
                },
                BasisElement::Pole { location, .. } | BasisElement::LogDerivative { location } => {
                    let away = location - self.centroid;
                    let cut = if away.norm() > 0.0 {
                        away / away.norm()
                    } else {
                        C64::new(1.0, 0.0)
                    };
                    ExpansionTerm {
                        coefficient: c,
                        kind: TermKind::Log { location, cut },
                    }
                }
            };
            terms.push(term);
        }
        AnalyticExpansion { terms }
    }

    /// Coefficients as CSV with columns `kind,center_re,center_im,exponent,re,im`.
    /// A monomial row gives the coefficient of `(z - center)^exponent`, with
    /// the basis scale divided out. For poles the center is the pole location
    /// and the exponent is the negative order.
    pub fn write_coefficients_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "kind,center_re,center_im,exponent,re,im")?;
        for (e, c) in self.basis.elements().iter().zip(&self.coefficients) {
            let (kind, center, exponent, c) = match *e {
                BasisElement::Monomial {
                    center,
                    scale,
                    exponent,
                } => ("monomial", center, exponent as i64, c / scale.powi(exponent as i32)),
                BasisElement::Pole { location, order } => ("pole", location, -(order as i64), *c),
                BasisElement::LogDerivative { location } => ("logderiv", location, -1, *c),
            };
            writeln!(
                out,
                "{kind},{:e},{:e},{exponent},{:e},{:e}",
                center.re, center.im, c.re, c.im
            )?;
        }
        Ok(())
    }
}

/// A primitive function in an [`AnalyticExpansion`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TermKind {
    /// `((z - center) / scale)^exponent`.
    Power { center: C64, scale: f64, exponent: u32 },
    /// `(z - location)^(-order)`, `order >= 1`.
    InversePower { location: C64, order: u32 },
    /// `log(z - location)` with its cut on the ray `location + t·cut`, `t > 0`.
    Log { location: C64, cut: C64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionTerm {
    pub coefficient: C64,
    pub kind: TermKind,
}

impl ExpansionTerm {
    pub fn power(coefficient: C64, center: C64, scale: f64, exponent: u32) -> Self {
        Self {
            coefficient,
            kind: TermKind::Power {
                center,
                scale,
                exponent,
            },
        }
    }

    pub fn inverse_power(coefficient: C64, location: C64, order: u32) -> Self {
        Self {
            coefficient,
            kind: TermKind::InversePower { location, order },
        }
    }

    /// Logarithm with the cut pointing along the positive real axis from `location`.
    pub fn log(coefficient: C64, location: C64) -> Self {
        Self {
            coefficient,
            kind: TermKind::Log {
                location,
                cut: C64::new(1.0, 0.0),
            },
        }
    }

    fn singularity(&self) -> Option<C64> {
        match self.kind {
            TermKind::Power { .. } => None,
            TermKind::InversePower { location, .. } | TermKind::Log { location, .. } => {
                Some(location)
            }
        }
    }

    fn has_multivalued_real_part(&self) -> bool {
        matches!(self.kind, TermKind::Log { .. })
            && self.coefficient.im.abs() > LOG_IMAG_TOL * self.coefficient.norm()
    }
}

/// Argument of `w` measured so that the discontinuity lies along `cut`.
fn cut_arg(w: C64, cut: C64) -> f64 {
    // arg(w / -cut) jumps exactly where w points along cut.
    let rotated = (w / (-cut)).arg();
    rotated + (-cut).arg()
}

/// `F(z) = Σ a_k φ_k(z)` over power, inverse-power and logarithm terms.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AnalyticExpansion {
    pub terms: Vec<ExpansionTerm>,
}

impl AnalyticExpansion {
    pub fn new(terms: Vec<ExpansionTerm>) -> Self {
        Self { terms }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// `F(z)`, using the stored cut for logarithms.
    pub fn eval(&self, z: C64) -> C64 {
        self.terms
            .iter()
            .map(|t| {
                t.coefficient
                    * match t.kind {
                        TermKind::Power {
                            center,
                            scale,
                            exponent,
                        } => ((z - center) / scale).powu(exponent),
                        TermKind::InversePower { location, order } => {
                            (z - location).powi(-(order as i32))
                        }
                        TermKind::Log { location, cut } => {
                            let w = z - location;
                            C64::new(w.norm().ln(), cut_arg(w, cut))
                        }
                    }
            })
            .sum()
    }

    /// `F'(z)`.
    pub fn derivative(&self, z: C64) -> C64 {
        self.terms
            .iter()
            .map(|t| {
                t.coefficient
                    * match t.kind {
                        TermKind::Power {
                            center,
                            scale,
                            exponent,
                        } => {
                            if exponent == 0 {
                                C64::new(0.0, 0.0)
                            } else {
                                ((z - center) / scale).powu(exponent - 1) * (exponent as f64 / scale)
                            }
                        }
                        TermKind::InversePower { location, order } => {
                            (z - location).powi(-(order as i32) - 1) * -(order as f64)
                        }
                        TermKind::Log { location, .. } => (z - location).inv(),
                    }
            })
            .sum()
    }

    /// `Re F(z)`. Logarithms with real coefficients contribute
    /// `Re(a) ln|z - p|`, which is single-valued; an imaginary part adds
    /// `-Im(a) arg(z - p)` measured against the stored cut.
    pub fn real_part(&self, z: C64) -> f64 {
        self.terms
            .iter()
            .map(|t| match t.kind {
                TermKind::Log { location, cut } => {
                    let w = z - location;
                    let a = t.coefficient;
                    let mut v = a.re * w.norm().ln();
                    if t.has_multivalued_real_part() {
                        v -= a.im * cut_arg(w, cut);
                    }
                    v
                }
                _ => t.eval_single(z).re,
            })
            .sum()
    }

    /// True when `Re F` depends on a logarithm cut.
    pub fn has_multivalued_real_part(&self) -> bool {
        self.terms.iter().any(ExpansionTerm::has_multivalued_real_part)
    }

    pub fn singularities(&self) -> impl Iterator<Item = C64> + '_ {
        self.terms.iter().filter_map(ExpansionTerm::singularity)
    }
}

impl ExpansionTerm {
    fn eval_single(&self, z: C64) -> C64 {
        AnalyticExpansion {
            terms: vec![*self],
        }
        .eval(z)
    }
}

impl fmt::Display for AnalyticExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let a = t.coefficient;
            match t.kind {
                TermKind::Power {
                    center,
                    scale,
                    exponent,
                } => write!(f, "({a})((z - ({center}))/{scale})^{exponent}")?,
                TermKind::InversePower { location, order } => {
                    write!(f, "({a})(z - ({location}))^-{order}")?
                }
                TermKind::Log { location, .. } => write!(f, "({a})log(z - ({location}))")?,
            }
        }
        Ok(())
    }
}

/// Does the ray `p + t·dir`, `t > 0`, meet the polyline loop `pts`?
fn ray_hits_loop(p: C64, dir: C64, pts: &[C64]) -> bool {
    let n = pts.len();
    (0..n).any(|i| {
        let a = pts[i] - p;
        let b = pts[(i + 1) % n] - p;
        // Rotate so the ray is the positive real axis.
        let a = a * dir.conj();
        let b = b * dir.conj();
        if (a.im > 0.0) == (b.im > 0.0) {
            return false;
        }
        let x = a.re + (b.re - a.re) * (-a.im) / (b.im - a.im);
        x > 0.0
    })
}

/// Deviation of `|z|² - 2 Re F` from a constant on the boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryDefect {
    /// Mean of `|z|² - 2 Re F` over the samples.
    pub c0: f64,
    /// `max |(|z|² - 2 Re F) - c0| / diameter²`.
    pub defect: f64,
    pub samples: usize,
}

/// Samples `|z|² - 2 Re F(z)` at Gauss nodes on every boundary piece, at
/// least [`DEFECT_SAMPLES`] in total.
pub fn boundary_defect(domain: &Domain, f: &AnalyticExpansion) -> Result<BoundaryDefect> {
    for t in &f.terms {
        if let TermKind::Log { location, cut } = t.kind {
            if t.has_multivalued_real_part()
                && domain.components().any(|c| ray_hits_loop(location, cut, c.proxy()))
            {
                return Err(Error::Branch(format!(
                    "log term at {location} has non-real coefficient {}",
                    t.coefficient
                )));
            }
        }
    }
    let pieces: usize = domain.components().map(|c| c.pieces().len()).sum();
    let order = DEFECT_SAMPLES.div_ceil(pieces).max(2);
    let nodes = domain.boundary_quadrature(order)?;
    let mut values = Vec::with_capacity(nodes.len());
    for node in &nodes {
        let z = node.point;
        let v = z.norm_sqr() - 2.0 * f.real_part(z);
        if !v.is_finite() {
            return Err(Error::Evaluation {
                x: z.re,
                y: z.im,
                reason: "F is singular on the boundary".into(),
            });
        }
        values.push(v);
    }
    let c0 = values.iter().sum::<f64>() / values.len() as f64;
    let dev = values.iter().map(|v| (v - c0).abs()).fold(0.0, f64::max);
    Ok(BoundaryDefect {
        c0,
        defect: dev / domain.diameter().powi(2),
        samples: values.len(),
    })
}

/// `max_k |⟨z̄ - f, φ_k⟩|`, with every inner product recomputed through the
/// alternate boundary integrand rather than reused from the solve.
pub fn orthogonality_report(domain: &Domain, result: &ProjectionResult) -> Result<f64> {
    let elems = result.basis.elements();
    let mut worst: f64 = 0.0;
    for phi in elems {
        let mut r = zbar_inner_product(domain, phi)?;
        for (e, c) in elems.iter().zip(&result.coefficients) {
            r -= c * inner_product_swapped(domain, e, phi)?;
        }
        worst = worst.max(r.norm());
    }
    Ok(worst)
}

/// One-line summary of a projection run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionSummary {
    pub lambda: f64,
    pub c0: f64,
    pub defect: f64,
    pub condition_estimate: f64,
    pub orthogonality: f64,
}

impl ProjectionSummary {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "lambda,lambda_sq,c0,defect,condition_estimate,orthogonality")?;
        writeln!(
            out,
            "{:e},{:e},{:e},{:e},{:e},{:e}",
            self.lambda,
            self.lambda * self.lambda,
            self.c0,
            self.defect,
            self.condition_estimate,
            self.orthogonality
        )
    }
}

/// Projection plus the checks that certify it.
pub fn project_and_verify(domain: &Domain, basis: &BasisSpec) -> Result<(ProjectionResult, ProjectionSummary)> {
    let result = project_zbar(domain, basis)?;
    let defect = boundary_defect(domain, &result.antiderivative())?;
    let orthogonality = orthogonality_report(domain, &result)?;
    let summary = ProjectionSummary {
        lambda: result.lambda,
        c0: defect.c0,
        defect: defect.defect,
        condition_estimate: result.condition_estimate,
        orthogonality,
    };
    Ok((result, summary))
}

/// `Area / √(2π)`, the upper end of the content sandwich.
pub fn area_bound(domain: &Domain) -> f64 {
    domain.area() / (2.0 * PI).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn disk_projection_vanishes() {
        let d = Domain::builtin("disk").unwrap();
        let basis = BasisSpec::monomials(c(0.0, 0.0), 1.0, 10).unwrap();
        let r = project_zbar(&d, &basis).unwrap();
        assert!(r.coefficients.iter().all(|c| c.norm() < 1e-10));
        assert!((r.lambda.powi(2) - PI / 2.0).abs() < 1e-8);
        assert!(r.evaluate_f(c(0.3, 0.1)).unwrap().norm() < 1e-10);
        let bd = boundary_defect(&d, &r.antiderivative()).unwrap();
        assert!((bd.c0 - 1.0).abs() < 1e-12 && bd.defect < 1e-12);
        assert!(bd.samples >= DEFECT_SAMPLES);
    }

    #[test]
    fn antiderivative_examples() {
        let basis = BasisSpec::new(vec![
            BasisElement::monomial(c(0.0, 0.0), 1.0, 2),
            BasisElement::pole(c(3.0, 0.0), 1),
            BasisElement::pole(c(0.0, 4.0), 3),
        ])
        .unwrap();
        let r = ProjectionResult {
            basis,
            coefficients: vec![c(0.3, 0.0), c(0.5, 0.0), c(0.2, -0.1)],
            lambda: 0.0,
            zbar_norm_sq: 0.0,
            projection_norm_sq: 0.0,
            condition_estimate: 1.0,
            diagnostics: Diagnostics::default(),
            centroid: c(0.0, 0.0),
        };
        let big_f = r.antiderivative();
        let z = c(0.4, -0.7);
        let expect = c(0.1, 0.0) * z.powu(3)
            + c(0.5, 0.0) * (z - 3.0).ln()
            + c(0.2, -0.1) * (-0.5) * (z - c(0.0, 4.0)).powi(-2);
        // The cut points from 3 away from the centroid (along +x), so the
        // principal logarithm agrees at this point.
        assert!((big_f.eval(z) - expect).norm() < 1e-14);
        let h = 1e-6;
        let fd = (big_f.eval(z + h) - big_f.eval(z - h)) / (2.0 * h);
        assert!((fd - r.evaluate_f(z).unwrap()).norm() < 1e-8);
        assert!((big_f.derivative(z) - r.evaluate_f(z).unwrap()).norm() < 1e-13);
        assert_eq!(AnalyticExpansion::zero().eval(z), c(0.0, 0.0));
    }

    #[test]
    fn cut_argument_jumps_along_the_cut() {
        let cut = c(0.0, 1.0);
        let left = cut_arg(c(-1e-9, 1.0), cut);
        let right = cut_arg(c(1e-9, 1.0), cut);
        assert!((left - right).abs() > 6.0);
        let along_neg = cut_arg(c(0.0, -1.0), cut);
        assert!((along_neg + PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn nonreal_log_crossing_boundary_is_a_branch_error() {
        let ann = Domain::builtin("annulus:0.5,1").unwrap();
        let f = AnalyticExpansion::new(vec![ExpansionTerm::log(c(0.5, 0.5), c(0.0, 0.0))]);
        assert!(matches!(boundary_defect(&ann, &f), Err(Error::Branch(_))));
        let real = AnalyticExpansion::new(vec![ExpansionTerm::log(c(0.5, 0.0), c(0.0, 0.0))]);
        assert!(boundary_defect(&ann, &real).is_ok());
    }

    #[test]
    fn coefficient_csv_has_one_row_per_element() {
        let d = Domain::builtin("ellipse:2,1").unwrap();
        let basis = BasisSpec::monomials(c(0.0, 0.0), 2.0, 4).unwrap();
        let r = project_zbar(&d, &basis).unwrap();
        let mut buf = Vec::new();
        r.write_coefficients_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 6);
        assert!(text.lines().nth(2).unwrap().starts_with("monomial,0e0,0e0,1,"));
    }
}
