//! End-to-end acceptance report. Prints one PASS/FAIL line per criterion.
//!
//! The report itself does not panic on a FAIL line; each check also lives
//! as a strict unit test in the other test files.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use bergman_core::basis::{BasisElement, BasisSpec};
use bergman_core::bergman::{boundary_defect, orthogonality_report, project_zbar};
use bergman_core::content::{cauchy_norm_conjecture, eigen_chain, sandwich, st_venant_check};
use bergman_core::geometry::Domain;
use bergman_core::moments::{assemble_normal_equations, complex_moment, inner_product};
use bergman_core::poisson::{
    bessel_j0_first_zero, dirichlet_ground_eigenvalue, torsional_rigidity, StressSolution,
};
use bergman_core::tracer::{roundtrip, rotational_asymmetry, trace, LevelSetFamily, Selection};
use bergman_core::C64;

const BUILTINS: [&str; 5] = ["disk", "annulus:0.5,1", "ellipse:2,1", "square", "rect:2,1"];

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn radical_inverse(mut k: u32, base: u32) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut r = 0.0;
    while k > 0 {
        r += (k % base) as f64 * inv;
        k /= base;
        inv /= base as f64;
    }
    r
}

/// Halton points inside `d`, at least `margin` from the boundary.
fn interior_points(d: &Domain, count: usize, margin: f64) -> Vec<C64> {
    let (lo, hi) = d.bounding_box();
    let mut pts = Vec::new();
    let mut k = 0;
    while pts.len() < count && k < 100_000 {
        k += 1;
        let z = c(
            lo.re + radical_inverse(k, 2) * (hi.re - lo.re),
            lo.im + radical_inverse(k, 3) * (hi.im - lo.im),
        );
        if d.boundary_distance(z) > margin && d.contains(z).unwrap_or(false) {
            pts.push(z);
        }
    }
    pts
}

fn builtin(name: &str) -> Domain {
    Domain::builtin(name).unwrap()
}

fn default_projection(d: &Domain) -> bergman_core::bergman::ProjectionResult {
    project_zbar(d, &BasisSpec::default_for(d).unwrap()).unwrap()
}

/// Collects failed checks for one criterion.
#[derive(Default)]
struct Checks {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Checks {
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        if ok {
            self.notes.push(what);
        } else {
            self.failures.push(what);
        }
    }

    fn runtime(&mut self, elapsed: Duration, limit: f64) {
        self.check(
            elapsed.as_secs_f64() < limit,
            format!("runtime {:.2}s < {limit}s", elapsed.as_secs_f64()),
        );
    }
}

fn disk_nullity(k: &mut Checks) {
    let t = Instant::now();
    let d = builtin("disk");
    let r = project_zbar(&d, &BasisSpec::monomials(c(0.0, 0.0), 1.0, 10).unwrap()).unwrap();
    let max_coeff = r.coefficients.iter().map(|a| a.norm()).fold(0.0, f64::max);
    k.check(max_coeff < 1e-10, format!("max |coefficient| {max_coeff:.1e}"));
    let err = (r.lambda.powi(2) - PI / 2.0).abs();
    k.check(err < 1e-8, format!("|λ² - π/2| {err:.1e}"));
    k.runtime(t.elapsed(), 1.0);
}

fn annulus_pole(k: &mut Checks) {
    let t = Instant::now();
    let d = builtin("annulus:0.5,1");
    let o = c(0.0, 0.0);
    let mut e = vec![BasisElement::pole(o, 1)];
    e.extend((0..=6).map(|n| BasisElement::monomial(o, 1.0, n)));
    let with_pole = project_zbar(&d, &BasisSpec::new(e).unwrap()).unwrap();
    let cc = 3.0 / (8.0 * 2f64.ln());
    let pts = interior_points(&d, 50, 0.0);
    let err = pts
        .iter()
        .map(|&z| (with_pole.evaluate_f(z).unwrap() - cc / z).norm())
        .fold(0.0, f64::max);
    k.check(pts.len() == 50 && err < 1e-6, format!("max |f - c/z| {err:.1e} at {} points", pts.len()));
    let monomials = project_zbar(&d, &BasisSpec::monomials(o, 1.0, 6).unwrap()).unwrap();
    let gap = monomials.lambda - with_pole.lambda;
    k.check(gap > 1e-3, format!("λ gap without the pole {gap:.4}"));
    k.runtime(t.elapsed(), 5.0);
}

fn ellipse_linearity(k: &mut Checks) {
    let t = Instant::now();
    let d = builtin("ellipse:2,1");
    let r = project_zbar(&d, &BasisSpec::monomials(c(0.0, 0.0), 1.0, 8).unwrap()).unwrap();
    let err = interior_points(&d, 50, 0.0)
        .iter()
        .map(|&z| (r.evaluate_f(z).unwrap() - 0.6 * z).norm())
        .fold(0.0, f64::max);
    k.check(err < 1e-8, format!("max |f - 3z/5| {err:.1e}"));
    let bd = boundary_defect(&d, &r.antiderivative()).unwrap();
    k.check(bd.defect < 1e-8, format!("boundary defect {:.1e}", bd.defect));
    k.check((bd.c0 - 1.6).abs() < 1e-8, format!("c0 {:.10}", bd.c0));
    k.runtime(t.elapsed(), 5.0);
}

fn boundary_identity(k: &mut Checks) {
    let t = Instant::now();
    for name in BUILTINS {
        let d = builtin(name);
        let r = default_projection(&d);
        let bd = boundary_defect(&d, &r.antiderivative()).unwrap();
        k.check(bd.defect < 1e-6, format!("{name} defect {:.1e}", bd.defect));
        let o = orthogonality_report(&d, &r).unwrap();
        k.check(o < 1e-8, format!("{name} orthogonality {o:.1e}"));
    }
    k.runtime(t.elapsed(), 10.0);
}

fn figure_roundtrips(k: &mut Checks) {
    let t = Instant::now();
    let fig31 = LevelSetFamily::named("fig3.1").unwrap();
    let rt = roundtrip(&fig31, None, 0).unwrap();
    k.check(rt.pointwise_error < 5e-3, format!("fig3.1 roundtrip {:.1e}", rt.pointwise_error));
    let set = trace(&fig31).unwrap();
    let d = set.to_domain(Selection::OuterWithHoles).unwrap();
    k.check(d.is_simply_connected(), "fig3.1 simply connected");
    let outer = set.outer_index().unwrap();
    let asym = rotational_asymmetry(&set.curves[outer], 3);
    k.check(asym < 1e-3, format!("fig3.1 3-fold defect {asym:.1e}"));

    let o = c(0.0, 0.0);
    let mut e: Vec<BasisElement> = (0..=10).map(|n| BasisElement::monomial(o, 1.0, n)).collect();
    e.push(BasisElement::pole(o, 1));
    e.push(BasisElement::pole(c(0.5, 0.0), 1));
    let basis = BasisSpec::new(e).unwrap();
    let rt = roundtrip(&LevelSetFamily::named("fig3.4").unwrap(), Some(&basis), 0).unwrap();
    k.check(rt.pointwise_error < 5e-3, format!("fig3.4 roundtrip {:.1e}", rt.pointwise_error));

    let d = trace(&LevelSetFamily::named("fig3.9").unwrap())
        .unwrap()
        .to_domain(Selection::OuterWithHoles)
        .unwrap();
    k.check(!d.contains(o).unwrap_or(true), "fig3.9 excludes 0");
    k.runtime(t.elapsed(), 30.0);
}

fn square_series() -> f64 {
    let s: f64 = (0..12)
        .map(|m| {
            let n = (2 * m + 1) as f64;
            (n * PI / 2.0).tanh() / n.powi(5)
        })
        .sum();
    1.0 / 3.0 - 64.0 / PI.powi(5) * s
}

fn rigidity(k: &mut Checks) {
    let t = Instant::now();
    for (name, exact) in [
        ("disk", PI / 2.0),
        ("square", square_series()),
        ("ellipse:2,1", 8.0 * PI / 5.0),
    ] {
        let d = builtin(name);
        let r = torsional_rigidity(&d, d.diameter() / 256.0).unwrap();
        let rel = (r.rho - exact).abs() / exact;
        k.check(rel < 5e-3, format!("{name} ρ {:.9} (rel {rel:.1e})", r.rho));
        if name == "disk" {
            k.check(
                (r.rho - exact).abs() <= r.error_estimate,
                format!("disk estimate {:.1e} covers {:.1e}", r.error_estimate, (r.rho - exact).abs()),
            );
        }
    }
    k.runtime(t.elapsed(), 60.0);
}

fn traced(name: &str) -> (Domain, BasisSpec) {
    let fam = LevelSetFamily::named(name).unwrap();
    let d = trace(&fam).unwrap().to_domain(Selection::OuterWithHoles).unwrap();
    let b = fam.basis_for(&d, 12).unwrap();
    (d, b)
}

fn sandwich_ordering(k: &mut Checks) {
    let mut cases: Vec<(String, Domain, BasisSpec)> = ["disk", "ellipse:2,1", "square", "annulus:0.5,1"]
        .iter()
        .map(|n| {
            let d = builtin(n);
            let b = BasisSpec::default_for(&d).unwrap();
            (n.to_string(), d, b)
        })
        .collect();
    for name in ["fig3.1", "fig3.4"] {
        let (d, b) = traced(name);
        cases.push((name.to_string(), d, b));
    }
    for (name, d, b) in &cases {
        let s = sandwich(name, d, b, d.diameter() / 256.0).unwrap();
        k.check(
            s.ordering_holds(),
            format!("{name} {:.6} <= {:.6} <= {:.6}", s.sqrt_rho, s.lambda, s.upper),
        );
        if name == "disk" {
            let spread = [s.sqrt_rho, s.lambda, s.upper]
                .iter()
                .map(|x| (x - s.upper).abs() / s.upper)
                .fold(0.0, f64::max);
            k.check(spread < 1e-6, format!("disk triple equality {spread:.1e}"));
        }
    }
}

fn st_venant(k: &mut Checks) {
    for name in ["disk", "ellipse:2,1", "square", "rect:2,1"] {
        let d = builtin(name);
        let r = st_venant_check(&d, d.diameter() / 256.0).unwrap();
        k.check(r.satisfied, format!("{name} margin {:.6}", r.margin));
        if name == "disk" {
            k.check(r.margin.abs() < 1e-6, format!("disk margin {:.1e}", r.margin));
        }
    }
    for name in ["fig3.1", "fig3.4"] {
        let (d, _) = traced(name);
        let r = st_venant_check(&d, d.diameter() / 256.0).unwrap();
        k.check(r.satisfied, format!("{name} margin {:.6}", r.margin));
    }
}

fn eigen_chain_check(k: &mut Checks) {
    let j0 = bessel_j0_first_zero();
    k.check((j0 - 2.404825557695773).abs() < 1e-12, format!("j0 {j0:.15}"));
    for (name, exact) in [("disk", j0 * j0), ("square", 2.0 * PI * PI)] {
        let d = builtin(name);
        let e = dirichlet_ground_eigenvalue(&d, d.diameter() / 128.0).unwrap();
        let rel = (e.value - exact).abs() / exact;
        k.check(rel < 5e-3, format!("{name} Λ₁ {:.6} (rel {rel:.1e})", e.value));
    }
    for name in BUILTINS {
        let d = builtin(name);
        let e = eigen_chain(&d, d.diameter() / 128.0).unwrap();
        k.check(e.chain_holds(), format!("{name} {:.6} <= {:.6}", e.lhs, e.rhs));
        if name == "disk" {
            let rel = (e.lhs - e.rhs).abs() / e.rhs;
            k.check(rel < 1e-6, format!("disk chain equality {rel:.1e}"));
        }
        k.check(e.coarse_is_weaker(), format!("{name} coarse bound weaker"));
    }
}

fn cauchy_norms(k: &mut Checks) {
    let t = Instant::now();
    for name in ["disk", "ellipse:2,1", "square"] {
        let d = builtin(name);
        let r = cauchy_norm_conjecture(name, &d, d.diameter() / 128.0).unwrap();
        if name == "disk" {
            let err = (r.norm - d.area() / (2.0 * PI).sqrt()).abs();
            k.check(err < 1e-3, format!("disk norm {:.7} (off by {err:.1e})", r.norm));
        } else {
            k.check(
                r.conjecture_satisfied && r.margin() > 0.0,
                format!("{name} margin {:.4}", r.margin()),
            );
        }
    }
    k.runtime(t.elapsed(), 60.0);
}

fn properties(k: &mut Checks) {
    let t = Instant::now();
    let o = c(0.0, 0.0);
    for name in BUILTINS {
        let d = builtin(name);
        let r = default_projection(&d);
        let zz = complex_moment(&d, 1, 1, o).unwrap().re;
        let gap = (r.lambda.powi(2) - (zz - r.projection_norm_sq)).abs() / zz;
        k.check(gap < 1e-9, format!("{name} Pythagoras {gap:.1e}"));

        let mut prev = f64::INFINITY;
        let mut monotone = true;
        for degree in 0..=12 {
            let b = BasisSpec::monomials(d.centroid(), 0.5 * d.diameter(), degree).unwrap();
            let lambda = project_zbar(&d, &b).unwrap().lambda;
            monotone &= lambda <= prev + 1e-10;
            prev = lambda;
        }
        k.check(monotone, format!("{name} basis monotonicity"));

        let basis = BasisSpec::default_for(&d).unwrap();
        let (gram, _) = assemble_normal_equations(&d, &basis).unwrap();
        let n = gram.dim();
        let hermitian = (0..n).all(|i| (0..n).all(|j| gram.get(i, j) == gram.get(j, i).conj()));
        k.check(hermitian, format!("{name} assembled Gram is exactly Hermitian"));
        let elems = basis.elements();
        let mut asym: f64 = 0.0;
        for f in elems {
            for g in elems {
                let fg = inner_product(&d, f, g).unwrap();
                let gf = inner_product(&d, g, f).unwrap();
                let scale = (inner_product(&d, f, f).unwrap().re * inner_product(&d, g, g).unwrap().re).sqrt();
                asym = asym.max((fg - gf.conj()).norm() / scale);
            }
        }
        k.check(asym < 1e-10, format!("{name} ⟨f,g⟩ vs conj ⟨g,f⟩ {asym:.1e}"));
    }

    for name in ["ellipse:2,1", "rect:2,1", "annulus:0.5,1"] {
        let d = builtin(name);
        let r0 = default_projection(&d);
        let b = c(0.7, -1.3);
        let moved = d.translated(b).unwrap();
        let r1 = default_projection(&moved);
        let a = 1.7;
        let scaled = d.mapped(c(a, 0.0), o).unwrap();
        let r2 = default_projection(&scaled);
        let (mut shift_err, mut scale_err): (f64, f64) = (0.0, 0.0);
        for z in interior_points(&d, 10, 0.05 * d.diameter()) {
            let f = r0.evaluate_f(z).unwrap();
            shift_err = shift_err.max((r1.evaluate_f(z + b).unwrap() - f - b.conj()).norm());
            scale_err = scale_err.max((r2.evaluate_f(z * a).unwrap() - f * a).norm());
        }
        k.check(shift_err < 1e-8, format!("{name} translation {shift_err:.1e}"));
        k.check(scale_err < 1e-8, format!("{name} scaling {scale_err:.1e}"));
    }

    let errors: Vec<f64> = [256, 512, 1024]
        .iter()
        .map(|&n| {
            let f = LevelSetFamily::named("circle").unwrap().with_resolution(n).unwrap();
            (trace(&f).unwrap().curves[0].front_area - PI).abs()
        })
        .collect();
    k.check(
        errors[0] / errors[1] >= 4.0 && errors[1] / errors[2] >= 4.0,
        format!("tracer convergence ratios {:.1}, {:.1}", errors[0] / errors[1], errors[1] / errors[2]),
    );

    for name in BUILTINS {
        let d = builtin(name);
        let s = StressSolution::solve(&d, d.diameter() / 128.0).unwrap();
        let min = s.u.iter().copied().fold(f64::INFINITY, f64::min);
        k.check(min > 0.0, format!("{name} maximum principle, min u {min:.1e}"));
    }
    k.runtime(t.elapsed(), 300.0);
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn(&mut Checks)); 11] = [
        ("disk nullity", disk_nullity),
        ("annulus pole", annulus_pole),
        ("ellipse linearity", ellipse_linearity),
        ("boundary identity on built-in domains", boundary_identity),
        ("figure round-trips", figure_roundtrips),
        ("torsional rigidity", rigidity),
        ("sandwich ordering", sandwich_ordering),
        ("St. Venant", st_venant),
        ("eigenvalue chain", eigen_chain_check),
        ("Cauchy norm evidence", cauchy_norms),
        ("property suites", properties),
    ];
    let mut lines = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let mut k = Checks::default();
        run(&mut k);
        let verdict = if k.failures.is_empty() { "PASS" } else { "FAIL" };
        let detail = if k.failures.is_empty() {
            k.notes.join("; ")
        } else {
            k.failures.join("; ")
        };
        let line = format!(
            "{verdict} {:>2} {name} [{:.1}s]: {detail}",
            i + 1,
            t.elapsed().as_secs_f64()
        );
        println!("{line}");
        lines.push(line);
    }
    assert_eq!(lines.len(), 11);
}
