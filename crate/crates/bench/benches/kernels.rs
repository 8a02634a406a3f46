use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use shapeforge::assembly::{object_bbox, order_parts, PartInstance};
use shapeforge::dsl::{parse_shape, BooleanKind};
use shapeforge::geometry::boolean;
use shapeforge::metrics::{chamfer_points, evaluate_reconstruction, EvalProtocol};
use shapeforge::sampler::{sample_part, Family, Ranges};
use shapeforge::{execute_program, execute_shape, parse_program, print_program, sample_surface, voxelize_solid, Vec3};
use shapeforge_bench::{object, part_programs};

fn dsl(c: &mut Criterion) {
    let mut g = c.benchmark_group("dsl");
    for (family, text) in part_programs() {
        g.throughput(Throughput::Bytes(text.len() as u64));
        g.bench_with_input(BenchmarkId::new("parse", family), &text, |b, t| b.iter(|| parse_program(t).unwrap()));
        let p = parse_program(&text).unwrap();
        g.bench_with_input(BenchmarkId::new("print", family), &p, |b, p| b.iter(|| print_program(p)));
    }
    g.finish();
}

fn execute(c: &mut Criterion) {
    let mut g = c.benchmark_group("execute");
    g.sample_size(20);
    for (family, text) in part_programs() {
        let p = parse_program(&text).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(family), &p, |b, p| b.iter(|| execute_program(p).unwrap()));
    }
    g.finish();
}

fn csg(c: &mut Criterion) {
    let sphere = "create_primitive(kind=\"uv_sphere\", segments=32, rings=16, location=(0, 0, 0), rotation=(1, 0, 0, 0), scale=(1, 1, 1))";
    let a = execute_shape(&parse_shape(sphere).unwrap()).unwrap();
    let b = a.translated(&Vec3::new(0.5, 0.3, 0.2));
    let mut g = c.benchmark_group("boolean");
    g.sample_size(10);
    for op in [BooleanKind::Union, BooleanKind::Intersection, BooleanKind::Difference] {
        g.bench_function(format!("{op:?}"), |bch| bch.iter(|| boolean(&a, &b, op).unwrap()));
    }
    g.finish();
}

fn sampling(c: &mut Criterion) {
    let mut g = c.benchmark_group("sampler");
    g.sample_size(20);
    for family in Family::ALL {
        let mut seed = 0u64;
        g.bench_function(BenchmarkId::from_parameter(family), |b| {
            b.iter(|| {
                seed += 1;
                sample_part(family, seed, &Ranges::default()).unwrap()
            })
        });
    }
    g.finish();
}

fn metrics(c: &mut Criterion) {
    let (program, mesh) = object(6);
    let mut g = c.benchmark_group("metrics");
    for n in [4096usize, 16384, 100_000] {
        g.throughput(Throughput::Elements(n as u64));
        g.bench_with_input(BenchmarkId::new("sample_surface", n), &n, |b, &n| b.iter(|| sample_surface(&mesh, n, 1).unwrap()));
    }
    let p = sample_surface(&mesh, 16384, 0).unwrap();
    let q = sample_surface(&mesh, 100_000, 1).unwrap();
    g.sample_size(10);
    g.bench_function("chamfer_16k_100k", |b| b.iter(|| chamfer_points(&p.points, &q.points).unwrap()));
    let frame = mesh.bbox().padded(0.02);
    g.bench_function("voxelize_32", |b| b.iter(|| voxelize_solid(&mesh, 32, &frame)));
    g.bench_function("evaluate_reconstruction", |b| {
        b.iter(|| evaluate_reconstruction(&mesh, &program, &EvalProtocol::default()))
    });
    g.finish();
}

fn assembly(c: &mut Criterion) {
    let (program, _) = object(8);
    let parts: Vec<PartInstance> = execute_program(&program)
        .unwrap()
        .into_iter()
        .map(|(l, m)| PartInstance::new(m, l))
        .collect();
    let bb = object_bbox(&parts);
    c.bench_function("order_parts_8", |b| b.iter(|| order_parts(&parts, &bb).unwrap()));
}

criterion_group!(benches, dsl, execute, csg, sampling, metrics, assembly);
criterion_main!(benches);
