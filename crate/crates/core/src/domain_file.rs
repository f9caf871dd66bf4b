//! Domain spec files. The format is TOML; see `docs/domain_schema.md`.

use std::path::Path;

use num_complex::Complex64 as C64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::geometry::{BoundaryComponent, CurvePiece, Domain};
use crate::tracer::{trace, LevelSetFamily, Selection, Window};

type Point = [f64; 2];

fn pt(p: Point) -> C64 {
    C64::new(p[0], p[1])
}

fn origin() -> Point {
    [0.0, 0.0]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    Disk {
        #[serde(default = "origin")]
        center: Point,
        radius: f64,
    },
    Annulus {
        #[serde(default = "origin")]
        center: Point,
        inner: f64,
        outer: f64,
    },
    Ellipse {
        #[serde(default = "origin")]
        center: Point,
        a: f64,
        b: f64,
    },
    Polygon {
        vertices: Vec<Point>,
        #[serde(default)]
        holes: Vec<HoleSpec>,
    },
    Parametric {
        pieces: Vec<PieceSpec>,
        #[serde(default)]
        holes: Vec<HoleSpec>,
    },
    LevelSet {
        family: String,
        resolution: Option<usize>,
        /// `[xmin, ymin, xmax, ymax]`.
        window: Option<[f64; 4]>,
        /// Index of a single traced loop; by default the outer loop with its holes.
        component: Option<usize>,
    },
}

/// A hole given either by polygon vertices or by curve pieces.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HoleSpec {
    #[serde(default)]
    pub vertices: Vec<Point>,
    #[serde(default)]
    pub pieces: Vec<PieceSpec>,
    pub interior_point: Point,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PieceSpec {
    Segment {
        start: Point,
        end: Point,
    },
    Arc {
        center: Point,
        radius: f64,
        start_angle: f64,
        end_angle: f64,
    },
    Polynomial {
        coeffs: Vec<Point>,
        t0: f64,
        t1: f64,
    },
    Trigonometric {
        coeffs: Vec<Point>,
        lowest_frequency: i32,
        t0: f64,
        t1: f64,
    },
}

impl PieceSpec {
    fn build(&self) -> CurvePiece {
        match self {
            PieceSpec::Segment { start, end } => CurvePiece::segment(pt(*start), pt(*end)),
            PieceSpec::Arc {
                center,
                radius,
                start_angle,
                end_angle,
            } => CurvePiece::arc(pt(*center), *radius, *start_angle, *end_angle),
            PieceSpec::Polynomial { coeffs, t0, t1 } => CurvePiece::Polynomial {
                coeffs: coeffs.iter().map(|&c| pt(c)).collect(),
                t0: *t0,
                t1: *t1,
            },
            PieceSpec::Trigonometric {
                coeffs,
                lowest_frequency,
                t0,
                t1,
            } => CurvePiece::Trigonometric {
                coeffs: coeffs.iter().map(|&c| pt(c)).collect(),
                lowest_frequency: *lowest_frequency,
                t0: *t0,
                t1: *t1,
            },
        }
    }
}

impl HoleSpec {
    fn build(&self) -> Result<(BoundaryComponent, C64)> {
        let boundary = match (self.vertices.is_empty(), self.pieces.is_empty()) {
            (false, true) => {
                let v: Vec<C64> = self.vertices.iter().map(|&p| pt(p)).collect();
                BoundaryComponent::polygon(&v)?
            }
            (true, false) => BoundaryComponent::new(self.pieces.iter().map(PieceSpec::build).collect())?,
            _ => {
                return Err(Error::Input(
                    "a hole needs exactly one of 'vertices' or 'pieces'".into(),
                ))
            }
        };
        Ok((boundary, pt(self.interior_point)))
    }
}

/// A parsed domain together with the level-set family it came from, if any.
#[derive(Debug, Clone)]
pub struct LoadedDomain {
    pub label: String,
    pub domain: Domain,
    pub family: Option<LevelSetFamily>,
}

impl DomainSpec {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Input(format!("domain spec: {e}")))
    }

    pub fn build(&self) -> Result<(Domain, Option<LevelSetFamily>)> {
        let holes = |hs: &[HoleSpec]| hs.iter().map(HoleSpec::build).collect::<Result<Vec<_>>>();
        let domain = match self {
            DomainSpec::Disk { center, radius } => Domain::disk(pt(*center), *radius)?,
            DomainSpec::Annulus { center, inner, outer } => Domain::annulus(pt(*center), *inner, *outer)?,
            DomainSpec::Ellipse { center, a, b } => Domain::ellipse(pt(*center), *a, *b)?,
            DomainSpec::Polygon { vertices, holes: hs } => {
                let v: Vec<C64> = vertices.iter().map(|&p| pt(p)).collect();
                Domain::new(BoundaryComponent::polygon(&v)?, holes(hs)?)?
            }
            DomainSpec::Parametric { pieces, holes: hs } => Domain::new(
                BoundaryComponent::new(pieces.iter().map(PieceSpec::build).collect())?,
                holes(hs)?,
            )?,
            DomainSpec::LevelSet {
                family,
                resolution,
                window,
                component,
            } => {
                let mut fam = LevelSetFamily::named(family)?;
                if let Some(n) = resolution {
                    fam = fam.with_resolution(*n)?;
                }
                if let Some([x0, y0, x1, y1]) = window {
                    fam = fam.with_window(Window::new(C64::new(*x0, *y0), C64::new(*x1, *y1))?);
                }
                let selection = component.map_or(Selection::OuterWithHoles, Selection::Component);
                let domain = trace(&fam)?.to_domain(selection)?;
                return Ok((domain, Some(fam)));
            }
        };
        Ok((domain, None))
    }
}

/// Resolves a `--domain` argument: an existing file is read as a spec file,
/// anything else as a built-in name such as `ellipse:2,1`.
pub fn load_domain(arg: &str) -> Result<LoadedDomain> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path)?;
        let (domain, family) = DomainSpec::parse(&text)?.build()?;
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| arg.to_string());
        return Ok(LoadedDomain { label, domain, family });
    }
    Ok(LoadedDomain {
        label: arg.to_string(),
        domain: Domain::builtin(arg)?,
        family: None,
    })
}
