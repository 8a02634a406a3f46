mod harness;
mod oracles;

use shapeforge::dsl::{parse_shape, BooleanKind};
use shapeforge::geometry::boolean;
use shapeforge::{execute_shape, Mesh, Vec3};

const ID: &str = "location=(0, 0, 0), rotation=(1, 0, 0, 0), scale=(1, 1, 1)";

fn prim(kind: &str, extra: &str) -> Mesh {
    execute_shape(&parse_shape(&format!("create_primitive(kind=\"{kind}\", {extra}{ID})")).unwrap()).unwrap()
}

#[test]
fn difference_with_itself_is_empty() {
    for (kind, extra) in [("cube", ""), ("cylinder", "segments=24, "), ("uv_sphere", "segments=16, rings=8, ")] {
        let a = prim(kind, extra);
        let d = boolean(&a, &a, BooleanKind::Difference).unwrap();
        assert!(d.is_empty(), "{kind}");
    }
}

#[test]
fn disjoint_union_adds_volumes() {
    let a = prim("uv_sphere", "segments=24, rings=12, ");
    let b = prim("torus", "").translated(&Vec3::new(5.0, 0.5, -0.25));
    let u = boolean(&a, &b, BooleanKind::Union).unwrap();
    let (va, vb) = (oracles::tet_volume(&a), oracles::tet_volume(&b));
    assert!((oracles::tet_volume(&u) - (va + vb)).abs() <= 1e-6 * (va + vb));
}

#[test]
fn sampled_booleans_match_occupancy_oracle() {
    for seed in 0..40 {
        let v = harness::boolean_corpus_iou(seed, 64);
        assert!(v >= 0.98, "seed {seed}: iou {v}");
    }
}
