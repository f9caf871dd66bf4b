use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use bergman_core::basis::{BasisElement, BasisSpec};
use bergman_core::bergman::{project_and_verify, AnalyticExpansion, ExpansionTerm};
use bergman_core::content::{sweep, sweep_row, write_sweep_csv, SweepRow, SweepSpacing};
use bergman_core::domain_file::{load_domain, LoadedDomain};
use bergman_core::tracer::{rotational_asymmetry, trace, LevelSetFamily, Selection, Window};
use bergman_core::{Error, Result};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as C64;

const EXIT_VALIDATION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_VIOLATION: u8 = 4;

const BUILTIN_DOMAINS: [&str; 5] = ["disk", "annulus:0.5,1", "ellipse:2,1", "square", "rect:2,1"];

#[derive(Parser)]
#[command(name = "bergman", version, about = "Bergman analytic content of planar domains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Project z̄ onto a basis and certify the result.
    Project {
        #[command(flatten)]
        domain: DomainArg,
        #[command(flatten)]
        basis: BasisArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Trace the level set |z|² - c0 - 2 Re F(z) = 0 of a figure family.
    Trace {
        /// Family name: circle, fig3.1 ... fig3.9.
        #[arg(long, required_unless_present = "coefficients")]
        family: Option<String>,
        /// Polynomial F given by its coefficients a0,a1,... (complex, e.g. 0,0,0,0.1).
        #[arg(long, conflicts_with = "family", value_delimiter = ',')]
        coefficients: Vec<Complex>,
        /// Grid cells per window side.
        #[arg(long, default_value_t = 512)]
        resolution: usize,
        /// Window as xmin,ymin,xmax,ymax.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        window: Option<Vec<f64>>,
        #[command(flatten)]
        common: Common,
    },
    /// Check √ρ ≤ λ ≤ Area/√(2π), St. Venant and the Cauchy norm bound on one domain.
    Sandwich {
        #[command(flatten)]
        domain: DomainArg,
        #[command(flatten)]
        basis: BasisArgs,
        /// Grid spacing for the stress function (default diameter/256).
        #[arg(long)]
        h: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Run the sandwich checks over several domains into one CSV.
    Sweep {
        /// Domains to include; `builtin` expands to every built-in domain.
        #[arg(long, required = true, num_args = 1..)]
        domains: Vec<String>,
        /// Stress-function spacing relative to each diameter.
        #[arg(long, default_value_t = 1.0 / 256.0)]
        h_rel: f64,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct DomainArg {
    /// Built-in name (disk, annulus:r,R, ellipse:a,b, square, rect:w,h) or spec file path.
    #[arg(long)]
    domain: String,
}

#[derive(Args)]
struct BasisArgs {
    /// Highest monomial degree.
    #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u32).range(0..=64))]
    degree: u32,
    /// Poles as location:order, e.g. 0:3 or 0.5+0.2i:1. Replaces the default hole poles.
    #[arg(long, num_args = 1..)]
    poles: Vec<PoleArg>,
}

#[derive(Args)]
struct Common {
    /// Output directory.
    #[arg(long, env = "BERGMAN_OUT_DIR", default_value = "out")]
    out: PathBuf,
    /// Offset into the quasi-random sequence used for sample points.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Complex literal: `1.5`, `-2i`, `i`, `0.5+0.25i`, `1e-3-2i`.
#[derive(Debug, Clone, Copy)]
struct Complex(C64);

impl FromStr for Complex {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || format!("cannot read '{s}' as a complex number");
        let Some(body) = t.strip_suffix('i') else {
            return t.parse::<f64>().map(|x| Complex(C64::new(x, 0.0))).map_err(|_| bad());
        };
        // Split at the last sign that is not leading and not part of an exponent.
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
        let (re, im) = match split {
            Some(k) => (&body[..k], &body[k..]),
            None => ("0", body),
        };
        let im = match im {
            "" | "+" => 1.0,
            "-" => -1.0,
            x => x.parse::<f64>().map_err(|_| bad())?,
        };
        let re = re.parse::<f64>().map_err(|_| bad())?;
        Ok(Complex(C64::new(re, im)))
    }
}

#[derive(Debug, Clone, Copy)]
struct PoleArg {
    location: C64,
    order: u32,
}

impl FromStr for PoleArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (loc, order) = match s.rsplit_once(':') {
            Some((l, o)) => (l, o.parse::<u32>().map_err(|_| format!("bad pole order in '{s}'"))?),
            None => (s, 1),
        };
        if !(1..=16).contains(&order) {
            return Err(format!("pole order in '{s}' must be between 1 and 16"));
        }
        Ok(PoleArg {
            location: loc.parse::<Complex>()?.0,
            order,
        })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error [{}]: {e}", e.module());
            ExitCode::from(if e.is_validation() { EXIT_VALIDATION } else { EXIT_NUMERICAL })
        }
    }
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Project { domain, basis, common } => cmd_project(&domain.domain, &basis, &common),
        Command::Trace {
            family,
            coefficients,
            resolution,
            window,
            common,
        } => cmd_trace(family.as_deref(), &coefficients, resolution, window.as_deref(), &common),
        Command::Sandwich {
            domain,
            basis,
            h,
            common,
        } => cmd_sandwich(&domain.domain, &basis, h, &common),
        Command::Sweep { domains, h_rel, common } => cmd_sweep(&domains, h_rel, &common),
    }
}

/// File-name-safe form of a label.
fn file_stem(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' })
        .collect()
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn build_basis(loaded: &LoadedDomain, args: &BasisArgs) -> Result<BasisSpec> {
    let d = &loaded.domain;
    if !args.poles.is_empty() {
        let mut spec = BasisSpec::for_domain(d, args.degree, &[], 0)?;
        for p in &args.poles {
            for j in 1..=p.order {
                spec = spec.with(BasisElement::pole(p.location, j))?;
            }
        }
        return Ok(spec);
    }
    match &loaded.family {
        Some(f) => f.basis_for(d, args.degree),
        None => {
            let holes: Vec<C64> = d.holes().iter().map(|h| h.interior_point).collect();
            BasisSpec::for_domain(d, args.degree, &holes, 3)
        }
    }
}

fn cmd_project(domain: &str, args: &BasisArgs, common: &Common) -> Result<u8> {
    let loaded = load_domain(domain)?;
    let basis = build_basis(&loaded, args)?;
    let (result, summary) = project_and_verify(&loaded.domain, &basis)?;
    let stem = file_stem(&loaded.label);

    let mut out = create(&common.out, &format!("project_{stem}_coefficients.csv"))?;
    result.write_coefficients_csv(&mut out)?;
    out.flush()?;
    let mut out = create(&common.out, &format!("project_{stem}_summary.csv"))?;
    summary.write_csv(&mut out)?;
    out.flush()?;
    let d = &loaded.domain;
    let samples = d.sample_interior(20, 0.05 * d.diameter(), common.seed)?;
    let mut out = create(&common.out, &format!("project_{stem}_samples.csv"))?;
    writeln!(out, "x,y,f_re,f_im")?;
    for z in samples {
        let f = result.evaluate_f(z)?;
        writeln!(out, "{:e},{:e},{:e},{:e}", z.re, z.im, f.re, f.im)?;
    }
    out.flush()?;

    println!("domain {}", loaded.label);
    println!("basis elements {}", basis.len());
    for (e, c) in basis.elements().iter().zip(&result.coefficients) {
        // Report monomial coefficients against (z - center)^k.
        let (e, c) = match *e {
            BasisElement::Monomial {
                center,
                scale,
                exponent,
            } => (BasisElement::monomial(center, 1.0, exponent), c / scale.powi(exponent as i32)),
            _ => (*e, *c),
        };
        println!("  {e}: {:+.10e} {:+.10e}i", c.re, c.im);
    }
    println!("lambda {:.12e}", summary.lambda);
    println!("lambda^2 {:.12e}", summary.lambda * summary.lambda);
    println!("c0 {:.12e}", summary.c0);
    println!("boundary defect {:.3e}", summary.defect);
    println!("orthogonality {:.3e}", summary.orthogonality);
    println!("condition estimate {:.3e}", summary.condition_estimate);
    if result.diagnostics.ridge.is_some() {
        println!("note: ridge regularization was applied");
    }
    Ok(0)
}

fn cmd_trace(
    family: Option<&str>,
    coefficients: &[Complex],
    resolution: usize,
    window: Option<&[f64]>,
    common: &Common,
) -> Result<u8> {
    let mut fam = match family {
        Some(name) => LevelSetFamily::named(name)?,
        None => {
            let terms = coefficients
                .iter()
                .enumerate()
                .filter(|(_, a)| a.0 != C64::new(0.0, 0.0))
                .map(|(k, a)| ExpansionTerm::power(a.0, C64::new(0.0, 0.0), 1.0, k as u32))
                .collect();
            let base = LevelSetFamily::named("circle")?;
            LevelSetFamily::new("custom", AnalyticExpansion::new(terms), 1.0, base.window, base.resolution)?
        }
    }
    .with_resolution(resolution)?;
    if let Some(w) = window {
        if w.len() != 4 {
            return Err(Error::Input(format!("--window needs 4 values, got {}", w.len())));
        }
        fam = fam.with_window(Window::new(C64::new(w[0], w[1]), C64::new(w[2], w[3]))?);
    }
    let set = trace(&fam)?;
    let stem = file_stem(&fam.name);
    let mut out = create(&common.out, &format!("trace_{stem}.csv"))?;
    set.write_csv(&mut out)?;
    out.flush()?;
    let mut out = create(&common.out, &format!("trace_{stem}.svg"))?;
    set.write_svg(&mut out)?;
    out.flush()?;

    println!("family {}", fam.name);
    println!("loops {}", set.len());
    println!("discarded open chains {}", set.open_chains);
    for (k, c) in set.curves.iter().enumerate() {
        println!(
            "  loop {k}: {} vertices, area {:.10e}, {}",
            c.vertices.len(),
            c.front_area.abs(),
            if c.is_counterclockwise() { "counterclockwise" } else { "clockwise" }
        );
    }
    let domain = set.to_domain(Selection::OuterWithHoles)?;
    println!("selected domain: area {:.10e}, holes {}", domain.area(), domain.holes().len());
    if let (Some(order), Some(outer)) = (fam.symmetry_order(), set.outer_index()) {
        let asym = rotational_asymmetry(&set.curves[outer], order);
        let verdict = if asym < 1e-3 { "symmetric" } else { "not symmetric" };
        println!("{order}-fold rotation: Hausdorff defect {asym:.3e} ({verdict})");
    }
    let origin = C64::new(0.0, 0.0);
    let inside = domain.contains(origin).unwrap_or(true);
    println!(
        "origin: {} selected domain, boundary distance {:.3e}",
        if inside { "in" } else { "not in" },
        domain.boundary_distance(origin)
    );
    Ok(0)
}

fn report(row: &SweepRow) {
    let s = &row.sandwich;
    println!("domain {}", s.label);
    println!("  sqrt_rho {:.10e} ± {:.1e}", s.sqrt_rho, s.sqrt_rho_error);
    println!("  lambda   {:.10e} ± {:.1e}", s.lambda, s.lambda_error);
    println!("  upper    {:.10e}", s.upper);
    println!("  margins  lower {:.3e}, upper {:.3e}", s.lower_margin(), s.upper_margin());
    match row.st_venant {
        Some(v) => println!("  St. Venant margin {:.6e} ({})", v.margin, if v.satisfied { "holds" } else { "VIOLATED" }),
        None => println!("  St. Venant: not simply connected, skipped"),
    }
    let c = &row.cauchy;
    println!(
        "  Cauchy norm {:.6e} ± {:.1e}, bound {:.6e}, margin {:.3e}",
        c.norm,
        c.error_estimate,
        c.bound,
        c.margin()
    );
    println!("  ordering {}", if s.ordering_holds() { "holds" } else { "VIOLATED" });
}

fn cmd_sandwich(domain: &str, args: &BasisArgs, h: Option<f64>, common: &Common) -> Result<u8> {
    let loaded = load_domain(domain)?;
    let basis = build_basis(&loaded, args)?;
    let diameter = loaded.domain.diameter();
    let rel = h.map_or(1.0 / 256.0, |h| h / diameter);
    let spacing = SweepSpacing {
        rigidity: rel,
        cauchy: 2.0 * rel,
    };
    let row = sweep_row(&loaded.label, &loaded.domain, &basis, spacing)?;
    let mut out = create(&common.out, &format!("sandwich_{}.csv", file_stem(&loaded.label)))?;
    write_sweep_csv(std::slice::from_ref(&row), &mut out)?;
    out.flush()?;
    report(&row);
    Ok(if row.inequalities_hold() { 0 } else { EXIT_VIOLATION })
}

fn cmd_sweep(domains: &[String], h_rel: f64, common: &Common) -> Result<u8> {
    let mut names: Vec<String> = Vec::new();
    for d in domains {
        if d == "builtin" {
            names.extend(BUILTIN_DOMAINS.iter().map(|s| s.to_string()));
        } else {
            names.push(d.clone());
        }
    }
    let args = BasisArgs {
        degree: 12,
        poles: vec![],
    };
    let mut inputs = Vec::new();
    for n in &names {
        let loaded = load_domain(n)?;
        let basis = build_basis(&loaded, &args)?;
        inputs.push((loaded.label, loaded.domain, basis));
    }
    if !(h_rel > 0.0 && h_rel <= 1.0 / 32.0) {
        return Err(Error::Input(format!("h-rel {h_rel} must lie in (0, 1/32]")));
    }
    let rows = sweep(
        &inputs,
        SweepSpacing {
            rigidity: h_rel,
            cauchy: 2.0 * h_rel,
        },
    )?;
    let mut out = create(&common.out, "sweep.csv")?;
    write_sweep_csv(&rows, &mut out)?;
    out.flush()?;
    for row in &rows {
        report(row);
    }
    Ok(if rows.iter().all(SweepRow::inequalities_hold) { 0 } else { EXIT_VIOLATION })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals() {
        let p = |s: &str| s.parse::<Complex>().unwrap().0;
        assert_eq!(p("1.5"), C64::new(1.5, 0.0));
        assert_eq!(p("i"), C64::new(0.0, 1.0));
        assert_eq!(p("-2i"), C64::new(0.0, -2.0));
        assert_eq!(p("0.5+0.25i"), C64::new(0.5, 0.25));
        assert_eq!(p("1e-3-2i"), C64::new(1e-3, -2.0));
        assert_eq!(p("-1e+2-i"), C64::new(-100.0, -1.0));
        assert!("abc".parse::<Complex>().is_err());
    }

    #[test]
    fn pole_arguments() {
        let p: PoleArg = "0:3".parse().unwrap();
        assert_eq!((p.location, p.order), (C64::new(0.0, 0.0), 3));
        let p: PoleArg = "0.5+0.2i".parse().unwrap();
        assert_eq!(p.order, 1);
        assert!("0:0".parse::<PoleArg>().is_err());
    }

    #[test]
    fn file_stems() {
        assert_eq!(file_stem("annulus:0.5,1"), "annulus_0.5_1");
        assert_eq!(file_stem("fig3.1"), "fig3.1");
    }
}
