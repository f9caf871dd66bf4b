//! Finite analytic bases spanning the projection subspace.

use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Domain;

/// One analytic function on a neighborhood of the closed domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BasisElement {
    /// `((z - center) / scale)^exponent`.
    Monomial { center: C64, scale: f64, exponent: u32 },
    /// `(z - location)^(-order)`, `order >= 1`.
    Pole { location: C64, order: u32 },
    /// `1 / (z - location)`, the derivative of `log(z - location)`.
    LogDerivative { location: C64 },
}

impl BasisElement {
    pub fn monomial(center: C64, scale: f64, exponent: u32) -> Self {
        BasisElement::Monomial {
            center,
            scale,
            exponent,
        }
    }

    pub fn pole(location: C64, order: u32) -> Self {
        BasisElement::Pole { location, order }
    }

    /// Singular point, if any.
    pub fn singularity(&self) -> Option<C64> {
        match *self {
            BasisElement::Monomial { .. } => None,
            BasisElement::Pole { location, .. } | BasisElement::LogDerivative { location } => {
                Some(location)
            }
        }
    }

    /// True when the antiderivative involves a logarithm.
    pub fn is_logarithmic(&self) -> bool {
        matches!(
            self,
            BasisElement::Pole { order: 1, .. } | BasisElement::LogDerivative { .. }
        )
    }

    /// Value at `z`; the caller keeps `z` away from the singularity.
    pub fn eval(&self, z: C64) -> C64 {
        match *self {
            BasisElement::Monomial {
                center,
                scale,
                exponent,
            } => ((z - center) / scale).powu(exponent),
            BasisElement::Pole { location, order } => (z - location).powi(-(order as i32)),
            BasisElement::LogDerivative { location } => (z - location).inv(),
        }
    }

    pub fn try_eval(&self, z: C64) -> Result<C64> {
        let v = self.eval(z);
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation {
                x: z.re,
                y: z.im,
                reason: format!("singularity of {self}"),
            })
        }
    }

    /// A function `H` with `∂H/∂z̄ = conj(self)`, single-valued on the plane
    /// minus the singularity. For monomials and poles of order two or more it
    /// is the conjugate of the antiderivative; for simple poles it is
    /// `2 ln|z - a|`, whose z̄-derivative is `1 / (z̄ - ā)`.
    pub fn conjugate_potential(&self, z: C64) -> C64 {
        match *self {
            BasisElement::Monomial {
                center,
                scale,
                exponent,
            } => {
                let k = exponent + 1;
                (((z - center) / scale).powu(k) * (scale / k as f64)).conj()
            }
            BasisElement::Pole { location, order } if order >= 2 => {
                let j = order as i32;
                ((z - location).powi(1 - j) * (-1.0 / (j - 1) as f64)).conj()
            }
            BasisElement::Pole { location, .. } | BasisElement::LogDerivative { location } => {
                C64::new(2.0 * (z - location).norm().ln(), 0.0)
            }
        }
    }

    /// Same function, possibly written differently.
    pub fn same_function(&self, other: &BasisElement) -> bool {
        match (self.canonical(), other.canonical()) {
            (
                BasisElement::Monomial {
                    center: c1,
                    scale: s1,
                    exponent: e1,
                },
                BasisElement::Monomial {
                    center: c2,
                    scale: s2,
                    exponent: e2,
                },
            ) => e1 == e2 && (e1 == 0 || (c1 == c2 && s1 == s2)),
            (a, b) => a == b,
        }
    }

    fn canonical(&self) -> BasisElement {
        match *self {
            BasisElement::LogDerivative { location } => BasisElement::Pole { location, order: 1 },
            other => other,
        }
    }

    /// Image under `z -> a z + b`, preserving the function's role: monomial
    /// scales multiply by `|a|` and centers and singularities map with the domain.
    pub fn mapped(&self, a: C64, b: C64) -> Self {
        match *self {
            BasisElement::Monomial {
                center,
                scale,
                exponent,
            } => BasisElement::Monomial {
                center: a * center + b,
                scale: scale * a.norm(),
                exponent,
            },
            BasisElement::Pole { location, order } => BasisElement::Pole {
                location: a * location + b,
                order,
            },
            BasisElement::LogDerivative { location } => BasisElement::LogDerivative {
                location: a * location + b,
            },
        }
    }

    fn validate(&self, domain: &Domain) -> Result<()> {
        match *self {
            BasisElement::Monomial { scale, .. } => {
                if !(scale > 0.0 && scale.is_finite()) {
                    return Err(Error::BasisValidity(format!("{self}: scale must be positive")));
                }
            }
            BasisElement::Pole { order: 0, .. } => {
                return Err(Error::BasisValidity("pole order must be at least 1".into()));
            }
            BasisElement::Pole { location, .. } | BasisElement::LogDerivative { location } => {
                match domain.contains(location) {
                    Ok(false) => {}
                    Ok(true) => {
                        return Err(Error::BasisValidity(format!(
                            "{self}: singularity lies inside the domain"
                        )))
                    }
                    Err(_) => {
                        return Err(Error::BasisValidity(format!(
                            "{self}: singularity lies on the boundary"
                        )))
                    }
                }
            }
        }
        Ok(())
    }
}

/// `z` or `(z - a)`.
fn shifted(a: C64) -> String {
    match (a.re == 0.0, a.im == 0.0) {
        (true, true) => "z".into(),
        (false, true) => format!("(z - {})", a.re),
        (true, false) => format!("(z - {}i)", a.im),
        (false, false) => format!("(z - ({}{:+}i))", a.re, a.im),
    }
}

impl fmt::Display for BasisElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisElement::Monomial {
                center,
                scale,
                exponent,
            } => {
                if *scale == 1.0 {
                    write!(f, "{}^{exponent}", shifted(*center))
                } else {
                    write!(f, "({} / {scale})^{exponent}", shifted(*center))
                }
            }
            BasisElement::Pole { location, order } => write!(f, "{}^-{order}", shifted(*location)),
            BasisElement::LogDerivative { location } => write!(f, "1 / {}", shifted(*location)),
        }
    }
}

/// Domain centroid with components below rounding level set to zero, so that
/// symmetric domains expand about the exact origin.
pub fn snapped_centroid(domain: &Domain) -> C64 {
    let c = domain.centroid();
    let tiny = 1e-12 * domain.diameter();
    let snap = |x: f64| if x.abs() <= tiny { 0.0 } else { x };
    C64::new(snap(c.re), snap(c.im))
}

/// Ordered list of basis elements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisSpec {
    elements: Vec<BasisElement>,
    constant_first: bool,
}

impl BasisSpec {
    pub fn new(elements: Vec<BasisElement>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::BasisValidity("basis has no elements".into()));
        }
        for (i, a) in elements.iter().enumerate() {
            for b in &elements[i + 1..] {
                if a.same_function(b) {
                    return Err(Error::BasisValidity(format!("duplicate basis element {a}")));
                }
            }
        }
        let constant_first = matches!(elements[0], BasisElement::Monomial { exponent: 0, .. });
        Ok(Self {
            elements,
            constant_first,
        })
    }

    /// `((z - center)/scale)^k` for `k = 0..=degree`.
    pub fn monomials(center: C64, scale: f64, degree: u32) -> Result<Self> {
        Self::new((0..=degree).map(|k| BasisElement::monomial(center, scale, k)).collect())
    }

    /// Monomials about the centroid scaled by half the diameter, plus poles
    /// of orders `1..=pole_order` at each given location.
    pub fn for_domain(domain: &Domain, degree: u32, poles: &[C64], pole_order: u32) -> Result<Self> {
        let center = snapped_centroid(domain);
        let mut elements: Vec<BasisElement> = (0..=degree)
            .map(|k| BasisElement::monomial(center, 0.5 * domain.diameter(), k))
            .collect();
        for &a in poles {
            for j in 1..=pole_order {
                elements.push(BasisElement::pole(a, j));
            }
        }
        Self::new(elements)
    }

    /// Monomials to degree 12, plus poles of orders 1..3 at every hole's
    /// designated interior point.
    pub fn default_for(domain: &Domain) -> Result<Self> {
        let poles: Vec<C64> = domain.holes().iter().map(|h| h.interior_point).collect();
        Self::for_domain(domain, 12, &poles, 3)
    }

    pub fn elements(&self) -> &[BasisElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn constant_first(&self) -> bool {
        self.constant_first
    }

    /// A copy with one more element appended.
    pub fn with(&self, element: BasisElement) -> Result<Self> {
        let mut e = self.elements.clone();
        e.push(element);
        Self::new(e)
    }

    pub fn mapped(&self, a: C64, b: C64) -> Self {
        Self {
            elements: self.elements.iter().map(|e| e.mapped(a, b)).collect(),
            constant_first: self.constant_first,
        }
    }

    /// Checks that every singularity lies off the closed domain.
    pub fn validate(&self, domain: &Domain) -> Result<()> {
        self.elements.iter().try_for_each(|e| e.validate(domain))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates() {
        let a = C64::new(0.0, 0.0);
        let err = BasisSpec::new(vec![
            BasisElement::pole(a, 1),
            BasisElement::LogDerivative { location: a },
        ]);
        assert!(err.is_err());
        assert!(BasisSpec::new(vec![]).is_err());
    }

    #[test]
    fn pole_inside_domain_is_invalid() {
        let disk = Domain::builtin("disk").unwrap();
        let b = BasisSpec::new(vec![BasisElement::pole(C64::new(0.2, 0.0), 1)]).unwrap();
        assert!(matches!(b.validate(&disk), Err(Error::BasisValidity(_))));
        let ann = Domain::builtin("annulus:0.5,1").unwrap();
        let b = BasisSpec::new(vec![BasisElement::pole(C64::new(0.0, 0.0), 2)]).unwrap();
        assert!(b.validate(&ann).is_ok());
    }

    #[test]
    fn conjugate_potential_has_conjugate_derivative() {
        let elems = [
            BasisElement::monomial(C64::new(0.1, -0.2), 1.5, 3),
            BasisElement::pole(C64::new(2.0, 1.0), 2),
            BasisElement::pole(C64::new(2.0, 1.0), 1),
            BasisElement::LogDerivative {
                location: C64::new(-1.5, 0.3),
            },
        ];
        let z = C64::new(0.3, 0.4);
        let h = 1e-6;
        for e in elems {
            // ∂/∂z̄ = (∂x + i ∂y) / 2
            let dx = (e.conjugate_potential(z + h) - e.conjugate_potential(z - h)) / (2.0 * h);
            let dy = (e.conjugate_potential(z + C64::new(0.0, h))
                - e.conjugate_potential(z - C64::new(0.0, h)))
                / (2.0 * h);
            let dzbar = (dx + C64::i() * dy) * 0.5;
            assert!((dzbar - e.eval(z).conj()).norm() < 1e-7, "{e}");
        }
    }
}
