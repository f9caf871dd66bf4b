use std::f64::consts::PI;

use bergman_core::geometry::Domain;
use bergman_core::poisson::{
    bessel_j0, bessel_j0_first_zero, dirichlet_ground_eigenvalue, torsional_rigidity,
    StressSolution,
};

/// Torsion series for the unit square, 12 odd terms.
fn square_rigidity() -> f64 {
    let s: f64 = (0..12)
        .map(|m| {
            let k = (2 * m + 1) as f64;
            (k * PI / 2.0).tanh() / k.powi(5)
        })
        .sum();
    1.0 / 3.0 - 64.0 / PI.powi(5) * s
}

fn rigidity_at_256(name: &str) -> (Domain, bergman_core::poisson::RigidityResult) {
    let d = Domain::builtin(name).unwrap();
    let r = torsional_rigidity(&d, d.diameter() / 256.0).unwrap();
    (d, r)
}

#[test]
fn series_oracle_value() {
    assert!((square_rigidity() - 0.140577).abs() < 1e-6);
}

#[test]
fn disk_rigidity() {
    let (_, r) = rigidity_at_256("disk");
    let exact = PI / 2.0;
    assert!((r.rho - exact).abs() < 5e-3 * exact);
    assert!((r.rho - exact).abs() <= r.error_estimate, "{r:?}");
    assert!(r.min_u > 0.0);
    // Energy identity and the variational form, to the error estimate.
    assert!((r.gradient_energy - 2.0 * r.u_integral).abs() <= r.error_estimate);
    assert!((r.rayleigh_rho - r.rho_fine).abs() <= r.error_estimate);
}

#[test]
fn ellipse_and_square_rigidity() {
    for (name, exact) in [("ellipse:2,1", 8.0 * PI / 5.0), ("square", square_rigidity())] {
        let (_, r) = rigidity_at_256(name);
        assert!((r.rho - exact).abs() < 5e-3 * exact, "{name}: {r:?}");
        assert!((r.rho - exact).abs() <= r.error_estimate, "{name}: {r:?}");
        assert!(r.min_u > 0.0, "{name}");
        assert!((r.gradient_energy - 2.0 * r.u_integral).abs() <= r.error_estimate, "{name}");
        assert!((r.rayleigh_rho - r.rho_fine).abs() <= r.error_estimate, "{name}");
    }
}

#[test]
fn annulus_stress_function_is_positive() {
    let d = Domain::builtin("annulus:0.5,1").unwrap();
    let s = StressSolution::solve(&d, d.diameter() / 128.0).unwrap();
    assert!(s.u.iter().all(|&u| u > 0.0));
    // ρ = π/2 (R⁴ - r⁴) - π (R² - r²)² / (2 ln(R/r)) for the annulus.
    let exact = PI / 2.0 * (1.0 - 0.0625) - PI * 0.75f64.powi(2) / (2.0 * 2f64.ln());
    assert!((s.rho() - exact).abs() < 5e-3 * exact, "{} vs {exact}", s.rho());
}

#[test]
fn disk_converges_at_second_order() {
    let d = Domain::builtin("disk").unwrap();
    let rho: Vec<f64> = [32.0, 64.0, 128.0, 256.0]
        .iter()
        .map(|k| StressSolution::solve(&d, d.diameter() / k).unwrap().rho())
        .collect();
    for w in rho.windows(3) {
        let ratio = (w[1] - w[0]) / (w[2] - w[1]);
        assert!(ratio >= 3.5, "{rho:?}");
    }
}

#[test]
fn rigidity_is_monotone_under_inclusion() {
    let small = Domain::builtin("disk:0.9").unwrap();
    let big = Domain::builtin("disk").unwrap();
    let h = big.diameter() / 128.0;
    let a = torsional_rigidity(&small, h).unwrap();
    let b = torsional_rigidity(&big, h).unwrap();
    assert!(a.rho < b.rho);
}

#[test]
fn coarse_spacing_is_rejected() {
    let d = Domain::builtin("disk").unwrap();
    assert!(torsional_rigidity(&d, d.diameter() / 16.0).is_err());
}

#[test]
fn bessel_zero() {
    let j0 = bessel_j0_first_zero();
    assert!((j0 - 2.404825557695773).abs() < 1e-12);
    assert_eq!(bessel_j0(0.0), 1.0);
    assert!(bessel_j0(j0).abs() < 1e-12);
}

#[test]
fn ground_eigenvalues() {
    let j0 = bessel_j0_first_zero();
    for (name, exact) in [
        ("disk", j0 * j0),
        ("square", 2.0 * PI * PI),
        ("rect:2,1", PI * PI * 1.25),
    ] {
        let d = Domain::builtin(name).unwrap();
        let e = dirichlet_ground_eigenvalue(&d, d.diameter() / 128.0).unwrap();
        assert!((e.value - exact).abs() < 5e-3 * exact, "{name}: {e:?}");
        assert!((e.value - exact).abs() <= e.error_estimate, "{name}: {e:?}");
    }
}

#[test]
fn faber_krahn_chain() {
    let j0 = bessel_j0_first_zero();
    for name in ["disk", "square"] {
        let d = Domain::builtin(name).unwrap();
        let e = dirichlet_ground_eigenvalue(&d, d.diameter() / 128.0).unwrap();
        let lhs = 2.0 / e.value.sqrt();
        let rhs = 2.0 / j0 * (d.area() / PI).sqrt();
        if name == "disk" {
            assert!((lhs - rhs).abs() < 1e-6 * rhs, "{lhs} vs {rhs}");
        } else {
            assert!(lhs < rhs);
        }
    }
}

#[test]
fn field_dump_has_one_row_per_unknown() {
    let d = Domain::builtin("square").unwrap();
    let s = StressSolution::solve(&d, d.diameter() / 64.0).unwrap();
    let mut out = Vec::new();
    s.grid.write_field_csv(&s.u, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().next(), Some("i,j,x,y,u"));
    assert_eq!(text.lines().count(), s.grid.unknowns() + 1);
}
