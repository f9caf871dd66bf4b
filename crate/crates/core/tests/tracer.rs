use std::f64::consts::PI;

use bergman_core::basis::{BasisElement, BasisSpec};
use bergman_core::tracer::{
    roundtrip, rotational_asymmetry, trace, LevelSetFamily, Selection, FAMILY_NAMES,
};
use bergman_core::{Error, C64};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[test]
fn circle_control() {
    let set = trace(&LevelSetFamily::named("circle").unwrap()).unwrap();
    assert_eq!(set.len(), 1);
    assert!((set.curves[0].area() - PI).abs() < 1e-4);
    let d = set.to_domain(Selection::Component(0)).unwrap();
    assert!((d.area() - PI).abs() < 1e-4);
    assert!(d.is_simply_connected());
}

#[test]
fn circle_front_converges_at_second_order_or_better() {
    let errors: Vec<f64> = [256, 512, 1024]
        .iter()
        .map(|&n| {
            let f = LevelSetFamily::named("circle").unwrap().with_resolution(n).unwrap();
            (trace(&f).unwrap().curves[0].front_area - PI).abs()
        })
        .collect();
    assert!(errors[0] / errors[1] >= 4.0, "{errors:?}");
    assert!(errors[1] / errors[2] >= 4.0, "{errors:?}");
}

#[test]
fn fig31_is_simply_connected_with_threefold_symmetry() {
    let set = trace(&LevelSetFamily::named("fig3.1").unwrap()).unwrap();
    assert_eq!(set.len(), 1);
    assert!(rotational_asymmetry(&set.curves[0], 3) < 1e-3);
    let d = set.to_domain(Selection::OuterWithHoles).unwrap();
    assert!(d.is_simply_connected());
}

#[test]
fn monomial_families_inherit_rotational_symmetry() {
    for (name, order) in [("fig3.1", 3), ("fig3.2", 4), ("fig3.3", 5)] {
        let set = trace(&LevelSetFamily::named(name).unwrap()).unwrap();
        let outer = set.outer_index().unwrap();
        assert!(rotational_asymmetry(&set.curves[outer], order) < 1e-3, "{name}");
    }
}

#[test]
fn fig39_excludes_the_origin() {
    let fam = LevelSetFamily::named("fig3.9").unwrap();
    let set = trace(&fam).unwrap();
    for curve in &set.curves {
        assert!(curve.distance(c(0.0, 0.0)) > 1e-3);
    }
    let d = set.to_domain(Selection::OuterWithHoles).unwrap();
    assert!(!d.contains(c(0.0, 0.0)).unwrap());
}

#[test]
fn fig35_connectivity_differs_from_fig34() {
    let d4 = trace(&LevelSetFamily::named("fig3.4").unwrap())
        .unwrap()
        .to_domain(Selection::OuterWithHoles)
        .unwrap();
    let d5 = trace(&LevelSetFamily::named("fig3.5").unwrap())
        .unwrap()
        .to_domain(Selection::OuterWithHoles)
        .unwrap();
    assert_eq!(d4.holes().len(), 0);
    assert_eq!(d5.holes().len(), 2);
    for h in d5.holes() {
        assert!(!d5.contains(h.interior_point).unwrap());
    }
}

#[test]
fn every_family_traces_closed_simple_loops() {
    for name in FAMILY_NAMES {
        let fam = LevelSetFamily::named(name).unwrap();
        let set = trace(&fam).unwrap();
        for curve in &set.curves {
            assert!(curve.simple, "{name}");
            assert!(curve.vertices.iter().all(|v| set.window.contains(*v)));
            // Near singularities |G| is limited by floating-point resolution
            // relative to the size of the terms of G. Edges that end on a
            // singular grid node carry no level crossing and are skipped.
            let cell = (set.window.hi.re - set.window.lo.re) / fam.resolution as f64;
            for &v in &curve.vertices {
                if fam.potential.singularities().any(|p| (v - p).norm() <= cell) {
                    continue;
                }
                let scale = 1.0 + v.norm_sqr() + 2.0 * fam.potential.real_part(v).abs();
                let grad = 2.0 * (v - fam.f(v).conj()).norm();
                assert!(fam.g(v).abs() <= 1e-10 * scale + 1e-16 * grad, "{name}: G({v}) = {}", fam.g(v));
            }
        }
        assert!(set.to_domain(Selection::OuterWithHoles).is_ok(), "{name}");
    }
}

#[test]
fn jordan_components_are_negative_at_their_centroids() {
    for name in ["circle", "fig3.1", "fig3.2", "fig3.3"] {
        let fam = LevelSetFamily::named(name).unwrap();
        let set = trace(&fam).unwrap();
        let outer = &set.curves[set.outer_index().unwrap()];
        assert!(fam.g(outer.centroid()) < 0.0, "{name}");
    }
}

#[test]
fn roundtrip_fig31() {
    let rt = roundtrip(&LevelSetFamily::named("fig3.1").unwrap(), None, 0).unwrap();
    assert!(rt.pointwise_error < 5e-3, "{}", rt.pointwise_error);
    assert_eq!(rt.samples.len(), 50);
}

#[test]
fn roundtrip_fig34_with_poles() {
    let o = c(0.0, 0.0);
    let mut e: Vec<BasisElement> = (0..=10).map(|k| BasisElement::monomial(o, 1.0, k)).collect();
    e.push(BasisElement::pole(o, 1));
    e.push(BasisElement::pole(c(0.5, 0.0), 1));
    let basis = BasisSpec::new(e).unwrap();
    let rt = roundtrip(&LevelSetFamily::named("fig3.4").unwrap(), Some(&basis), 0).unwrap();
    assert!(rt.pointwise_error < 5e-3, "{}", rt.pointwise_error);
}

#[test]
fn roundtrip_circle_recovers_zero() {
    let rt = roundtrip(&LevelSetFamily::named("circle").unwrap(), None, 0).unwrap();
    assert!(rt.pointwise_error < 1e-6, "{}", rt.pointwise_error);
}

#[test]
fn empty_window_is_an_error() {
    let fam = LevelSetFamily::named("circle")
        .unwrap()
        .with_window(bergman_core::tracer::Window::new(c(3.0, 3.0), c(4.0, 4.0)).unwrap());
    assert!(matches!(trace(&fam), Err(Error::EmptyTrace)));
}

#[test]
fn outputs_are_well_formed() {
    let set = trace(&LevelSetFamily::named("fig3.5").unwrap()).unwrap();
    let mut csv = Vec::new();
    set.write_csv(&mut csv).unwrap();
    let csv = String::from_utf8(csv).unwrap();
    let rows: usize = set.curves.iter().map(|c| c.vertices.len()).sum();
    assert_eq!(csv.lines().count(), rows + 1);
    let mut svg = Vec::new();
    set.write_svg(&mut svg).unwrap();
    let svg = String::from_utf8(svg).unwrap();
    assert_eq!(svg.matches("<path").count(), set.len());
    assert!(svg.contains(r#"viewBox="-2.5 -2.5 5 5""#));
}

#[test]
fn grid_nodes_on_the_curve_do_not_break_simplicity() {
    // At these resolutions some nodes fall within 1e-13 of the fig3.1 level set.
    for n in [200, 300] {
        let fam = LevelSetFamily::named("fig3.1").unwrap().with_resolution(n).unwrap();
        let set = trace(&fam).unwrap();
        assert!(set.curves.iter().all(|c| c.simple), "resolution {n}");
        set.to_domain(Selection::OuterWithHoles).unwrap();
    }
}
