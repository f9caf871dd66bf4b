//! Complex area moments and `A²(Ω)` inner products, reduced to boundary
//! integrals with the complex Green formula `∫_Ω ∂h/∂z̄ dA = (1/2i) ∮_Γ h dz`.

use std::collections::BTreeMap;
use std::io::Write;

use num_complex::Complex64 as C64;

use crate::basis::{BasisElement, BasisSpec};
use crate::error::{Error, Result};
use crate::geometry::{BoundaryNode, Domain};
use crate::linalg::Matrix;

/// Default bound on the powers held in a [`MomentTable`].
pub const DEFAULT_MAX_DEGREE: u32 = 64;

fn over_2i(v: C64) -> C64 {
    v / C64::new(0.0, 2.0)
}

/// Identifies `∫_Ω w^m w̄^n dA` with `w = z - center`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentKey {
    pub m: u32,
    pub n: u32,
    pub center: C64,
}

/// `∫_Ω w^m w̄^n dA`, evaluated as `(1/(2i(n+1))) ∮ w^m w̄^(n+1) dz`.
pub fn complex_moment(domain: &Domain, m: u32, n: u32, center: C64) -> Result<C64> {
    let v = domain.integrate_dz(|z| {
        let w = z - center;
        w.powu(m) * w.conj().powu(n + 1)
    })?;
    Ok(over_2i(v) / (n + 1) as f64)
}

/// All moments with `m, n <= max_degree` about one center.
#[derive(Debug, Clone)]
pub struct MomentTable {
    center: C64,
    max_degree: u32,
    values: BTreeMap<(u32, u32), C64>,
}

impl MomentTable {
    pub fn compute(domain: &Domain, max_degree: u32, center: C64) -> Result<Self> {
        if max_degree > DEFAULT_MAX_DEGREE {
            return Err(Error::Input(format!(
                "moment degree {max_degree} exceeds the configured maximum {DEFAULT_MAX_DEGREE}"
            )));
        }
        let d = max_degree as usize + 1;
        let sums = domain.integrate_boundary(|nodes| {
            let mut acc = vec![(C64::new(0.0, 0.0), 0.0); d * d];
            let mut wp = vec![C64::new(0.0, 0.0); d + 1];
            for node in nodes {
                let w = node.point - center;
                let wb = w.conj();
                wp[0] = C64::new(1.0, 0.0);
                for k in 1..=d {
                    wp[k] = wp[k - 1] * w;
                }
                let mut wbp = wb * node.dz;
                for n in 0..d {
                    for m in 0..d {
                        let v = wp[m] * wbp;
                        let slot = &mut acc[m * d + n];
                        slot.0 += v;
                        slot.1 += v.norm();
                    }
                    wbp *= wb;
                }
            }
            acc
        })?;
        let mut values = BTreeMap::new();
        for m in 0..d {
            for n in 0..d {
                values.insert((m as u32, n as u32), over_2i(sums[m * d + n]) / (n + 1) as f64);
            }
        }
        Ok(Self {
            center,
            max_degree,
            values,
        })
    }

    pub fn center(&self) -> C64 {
        self.center
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn value(&self, m: u32, n: u32) -> Option<C64> {
        self.values.get(&(m, n)).copied()
    }

    /// Debug dump with columns `m,n,center_re,center_im,re,im`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "m,n,center_re,center_im,re,im")?;
        for (&(m, n), v) in &self.values {
            writeln!(
                out,
                "{m},{n},{:e},{:e},{:e},{:e}",
                self.center.re, self.center.im, v.re, v.im
            )?;
        }
        Ok(())
    }
}

fn validate_pair(domain: &Domain, f: &BasisElement, g: &BasisElement) -> Result<()> {
    BasisSpec::new(vec![*f]).and_then(|b| b.validate(domain))?;
    BasisSpec::new(vec![*g]).and_then(|b| b.validate(domain))
}

/// `⟨f, g⟩ = ∫_Ω f ḡ dA` as `(1/2i) ∮ f H_g dz`, where `∂H_g/∂z̄ = ḡ`.
pub fn inner_product(domain: &Domain, f: &BasisElement, g: &BasisElement) -> Result<C64> {
    validate_pair(domain, f, g)?;
    let v = domain.integrate_dz(|z| f.eval(z) * g.conjugate_potential(z))?;
    Ok(over_2i(v))
}

/// The same inner product through the other element's potential:
/// `conj((1/2i) ∮ g H_f dz)`.
pub fn inner_product_swapped(domain: &Domain, f: &BasisElement, g: &BasisElement) -> Result<C64> {
    Ok(inner_product(domain, g, f)?.conj())
}

/// `⟨z̄, g⟩ = ∫_Ω z̄ ḡ dA`.
///
/// Monomials expand `z̄ = w̄ + c̄` about their center and use two moments;
/// other elements use `conj((1/2i) ∮ |z|² g dz)`, valid because
/// `∂(|z|² g)/∂z̄ = z g`.
pub fn zbar_inner_product(domain: &Domain, g: &BasisElement) -> Result<C64> {
    BasisSpec::new(vec![*g]).and_then(|b| b.validate(domain))?;
    match *g {
        BasisElement::Monomial {
            center,
            scale,
            exponent,
        } => {
            let a = complex_moment(domain, 0, exponent + 1, center)?;
            let b = complex_moment(domain, 0, exponent, center)?;
            Ok((a + center.conj() * b) / scale.powi(exponent as i32))
        }
        _ => zbar_inner_product_by_potential(domain, g),
    }
}

/// `⟨z̄, g⟩` through the `|z|² g` boundary integrand for any element.
pub fn zbar_inner_product_by_potential(domain: &Domain, g: &BasisElement) -> Result<C64> {
    let v = domain.integrate_dz(|z| z.norm_sqr() * g.eval(z))?;
    Ok(over_2i(v).conj())
}

/// `‖z̄‖² = ∫_Ω |z|² dA`.
pub fn zbar_norm_sq(domain: &Domain) -> Result<f64> {
    Ok(complex_moment(domain, 1, 1, C64::new(0.0, 0.0))?.re)
}

/// Gram matrix `G[i][j] = ⟨φ_j, φ_i⟩` and right-hand side `b[i] = ⟨z̄, φ_i⟩`
/// in one adaptive boundary pass. The lower triangle is the conjugate of the
/// upper one, so the matrix is Hermitian by construction.
pub fn assemble_normal_equations(domain: &Domain, basis: &BasisSpec) -> Result<(Matrix, Vec<C64>)> {
    basis.validate(domain)?;
    let elems = basis.elements();
    let n = elems.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let sums = domain.integrate_boundary(|nodes: &[BoundaryNode]| {
        let mut acc = vec![(C64::new(0.0, 0.0), 0.0); pairs.len() + n];
        let mut vals = vec![C64::new(0.0, 0.0); n];
        let mut pots = vec![C64::new(0.0, 0.0); n];
        for node in nodes {
            for (k, e) in elems.iter().enumerate() {
                vals[k] = e.eval(node.point);
                pots[k] = e.conjugate_potential(node.point);
            }
            for (slot, &(i, j)) in acc.iter_mut().zip(&pairs) {
                // G[i][j] = ⟨φ_j, φ_i⟩ = (1/2i) ∮ φ_j H_i dz
                let v = vals[j] * pots[i] * node.dz;
                slot.0 += v;
                slot.1 += v.norm();
            }
            let r2 = node.point.norm_sqr();
            for k in 0..n {
                let v = vals[k] * r2 * node.dz;
                let slot = &mut acc[pairs.len() + k];
                slot.0 += v;
                slot.1 += v.norm();
            }
        }
        acc
    })?;
    let mut gram = Matrix::zeros(n);
    for (s, &(i, j)) in sums.iter().zip(&pairs) {
        let v = over_2i(*s);
        if i == j {
            gram.set(i, i, C64::new(v.re, 0.0));
        } else {
            gram.set(i, j, v);
            gram.set(j, i, v.conj());
        }
    }
    let rhs = sums[pairs.len()..].iter().map(|s| over_2i(*s).conj()).collect();
    Ok((gram, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn disk_moments() {
        let d = Domain::builtin("disk").unwrap();
        let o = c(0.0, 0.0);
        assert!((complex_moment(&d, 0, 0, o).unwrap() - PI).norm() < 1e-13);
        assert!((complex_moment(&d, 1, 1, o).unwrap() - PI / 2.0).norm() < 1e-13);
        assert!(complex_moment(&d, 2, 1, o).unwrap().norm() < 1e-13);
    }

    #[test]
    fn ellipse_second_moment() {
        let d = Domain::builtin("ellipse:2,1").unwrap();
        let m = complex_moment(&d, 0, 2, c(0.0, 0.0)).unwrap();
        assert!((m - 1.5 * PI).norm() < 1e-12, "{m}");
    }

    #[test]
    fn table_matches_single_moments_and_symmetry() {
        let d = Domain::builtin("ellipse:2,1").unwrap().translated(c(0.3, -0.2)).unwrap();
        let center = c(0.1, 0.05);
        let t = MomentTable::compute(&d, 8, center).unwrap();
        for (m, n) in [(0, 0), (3, 1), (2, 5), (8, 8)] {
            let single = complex_moment(&d, m, n, center).unwrap();
            let tv = t.value(m, n).unwrap();
            assert!((single - tv).norm() <= 1e-12 * single.norm().max(1.0));
            let sym = t.value(n, m).unwrap().conj();
            assert!((tv - sym).norm() <= 1e-10 * tv.norm().max(1e-300) + 1e-14);
        }
        assert!((t.value(0, 0).unwrap().re - d.area()).abs() <= 1e-10 * d.area());
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 81);
        assert!(MomentTable::compute(&d, 65, center).is_err());
    }

    #[test]
    fn inner_product_examples() {
        let disk = Domain::builtin("disk").unwrap();
        let z = BasisElement::monomial(c(0.0, 0.0), 1.0, 1);
        let one = BasisElement::monomial(c(0.0, 0.0), 1.0, 0);
        assert!((inner_product(&disk, &z, &z).unwrap() - PI / 2.0).norm() < 1e-13);
        assert!((inner_product(&disk, &one, &one).unwrap() - PI).norm() < 1e-13);
        let ann = Domain::builtin("annulus:0.5,1").unwrap();
        let inv = BasisElement::pole(c(0.0, 0.0), 1);
        let got = inner_product(&ann, &inv, &inv).unwrap();
        assert!((got - 2.0 * PI * 2f64.ln()).norm() < 1e-12, "{got}");
        assert!((zbar_inner_product(&ann, &inv).unwrap() - 0.75 * PI).norm() < 1e-12);
        assert!(zbar_inner_product(&disk, &one).unwrap().norm() < 1e-13);
        let ell = Domain::builtin("ellipse:2,1").unwrap();
        let z1 = BasisElement::monomial(c(0.0, 0.0), 1.0, 1);
        assert!((zbar_inner_product(&ell, &z1).unwrap() - 1.5 * PI).norm() < 1e-12);
    }

    #[test]
    fn pole_in_domain_is_rejected() {
        let disk = Domain::builtin("disk").unwrap();
        let p = BasisElement::pole(c(0.0, 0.0), 2);
        assert!(matches!(inner_product(&disk, &p, &p), Err(Error::BasisValidity(_))));
        assert!(zbar_inner_product(&disk, &p).is_err());
    }
}
