mod oracles;

use std::f64::consts::PI;

use shapeforge::dsl::parse_shape;
use shapeforge::metrics::chamfer_points;
use shapeforge::{execute_shape, sample_surface, Mesh};

fn run(stmt: &str) -> Mesh {
    let m = execute_shape(&parse_shape(stmt).unwrap()).unwrap();
    assert!(m.watertight, "{stmt}");
    m
}

const ID: &str = "location=(0, 0, 0), rotation=(1, 0, 0, 0), scale=(1, 1, 1)";

#[test]
fn cube_volume_is_eight() {
    let m = run(&format!("create_primitive(kind=\"cube\", {ID})"));
    assert_eq!(m.volume().unwrap(), 8.0);
    assert_eq!(oracles::tet_volume(&m), 8.0);
}

#[test]
fn cylinder_volume_is_prism_volume() {
    let m = run(&format!("create_primitive(kind=\"cylinder\", segments=64, {ID})"));
    // 64 triangles of area sin(2 pi / 64) / 2 each, height 2
    let exact = 64.0 * 0.5 * (2.0 * PI / 64.0).sin() * 2.0;
    assert!((m.volume().unwrap() - exact).abs() < 1e-9);
    assert!((oracles::tet_volume(&m) - exact).abs() < 1e-9);
}

#[test]
fn swept_circle_matches_cylinder() {
    let sweep = run(&format!(
        "translation(section=create_curve(kind=\"circle\", radius=1), trajectory=create_curve(kind=\"line\", start=(0, 0, -1), end=(0, 0, 1)), profile=[(0, 1), (1, 1)], section_resolution=64, path_resolution=2, {ID})"
    ));
    let cyl = run(&format!("create_primitive(kind=\"cylinder\", segments=64, {ID})"));
    let a = sample_surface(&sweep, 32768, 3).unwrap();
    let b = sample_surface(&cyl, 32768, 4).unwrap();
    let cd = chamfer_points(&a.points, &b.points).unwrap();
    assert!(cd <= 1e-3, "cd {cd}");
    let rel = (sweep.volume().unwrap() - cyl.volume().unwrap()).abs() / cyl.volume().unwrap();
    assert!(rel < 1e-3, "volume differs by {rel}");
}

#[test]
fn torus_sweep_obeys_pappus() {
    let (big_r, r) = (1.0, 0.25);
    let m = run(&format!(
        "translation(section=create_curve(kind=\"circle\", radius={r}), trajectory=create_curve(kind=\"circle\", center=(0, 0, 0), axis=(0, 0, 1), radius={big_r}), profile=[(0, 1), (1, 1)], section_resolution=64, path_resolution=128, {ID})"
    ));
    let exact = 2.0 * PI * PI * big_r * r * r;
    let v = oracles::tet_volume(&m);
    assert!((v - exact).abs() / exact < 0.01, "{v} vs {exact}");
}

#[test]
fn tapered_sweep_is_a_frustum() {
    let m = run(&format!(
        "translation(section=create_curve(kind=\"circle\", radius=1), trajectory=create_curve(kind=\"line\", start=(0, 0, 0), end=(0, 0, 2)), profile=[(0, 1), (1, 0.5)], section_resolution=64, path_resolution=8, {ID})"
    ));
    let (r0, r1, h) = (1.0, 0.5, 2.0);
    let exact = PI * h * (r0 * r0 + r0 * r1 + r1 * r1) / 3.0;
    let v = oracles::tet_volume(&m);
    assert!((v - exact).abs() / exact < 0.01, "{v} vs {exact}");
}

#[test]
fn revolve_matches_pappus() {
    // rectangle 0.5 x 1 centered 1.5 from the axis
    let m = run(&format!(
        "revolve(section=create_curve(kind=\"rectangle\", width=0.5, height=1), axis_origin=(-1.5, 0), axis_direction=(0, 1), sweep_angle=360, section_resolution=4, steps=256, {ID})"
    ));
    let exact = 2.0 * PI * 1.5 * 0.5;
    let v = oracles::tet_volume(&m).abs();
    assert!((v - exact).abs() / exact < 0.01, "{v} vs {exact}");
}

#[test]
fn primitive_volumes_converge() {
    let sphere = run(&format!("create_primitive(kind=\"uv_sphere\", segments=128, rings=64, {ID})"));
    let v = oracles::tet_volume(&sphere);
    assert!((v - 4.0 / 3.0 * PI).abs() / (4.0 / 3.0 * PI) < 0.005);
    let cone = run(&format!("create_primitive(kind=\"cone\", segments=128, {ID})"));
    let v = oracles::tet_volume(&cone);
    assert!((v - 2.0 * PI / 3.0).abs() / (2.0 * PI / 3.0) < 0.005);
}
