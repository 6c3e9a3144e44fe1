use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use morsetower::{
    build_tower, check_all, deformed_sphere_system, random_system, sphere_system, Category,
    Declarations, FlowSystem,
};

fn systems() -> Vec<(String, FlowSystem, Declarations)> {
    let mut out = Vec::new();
    for n in 1..=3 {
        let (s, d) = sphere_system(n).unwrap();
        out.push((format!("sphere{n}"), s, d));
    }
    let (s, d) = deformed_sphere_system();
    out.push(("deformed".into(), s, d));
    for seed in [3, 17, 1540] {
        let (s, d) = random_system(seed, 6, 3).unwrap();
        out.push((format!("random{seed}"), s, d));
    }
    out
}

fn build(c: &mut Criterion) {
    let mut g = c.benchmark_group("build_tower");
    for (name, s, d) in systems() {
        g.bench_with_input(BenchmarkId::from_parameter(&name), &(s, d), |b, (s, d)| {
            b.iter(|| build_tower(black_box(s), black_box(d)).unwrap())
        });
    }
    g.finish();
}

fn category(c: &mut Criterion) {
    let mut g = c.benchmark_group("category");
    for (name, s, d) in systems() {
        let t = build_tower(&s, &d).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(&name), &t, |b, t| {
            b.iter(|| Category::new(black_box(t)))
        });
    }
    g.finish();
}

fn axioms(c: &mut Criterion) {
    let mut g = c.benchmark_group("check_all");
    for (name, s, d) in systems() {
        let cat = Category::new(&build_tower(&s, &d).unwrap());
        g.bench_with_input(BenchmarkId::from_parameter(&name), &cat, |b, cat| {
            b.iter(|| check_all(black_box(cat)))
        });
    }
    g.finish();
}

fn certification(c: &mut Criterion) {
    c.bench_function("certify_200_random", |b| {
        b.iter(|| {
            for seed in 0..200 {
                let (s, d) = random_system(seed, 6, 3).unwrap();
                let cat = Category::new(&build_tower(&s, &d).unwrap());
                assert!(check_all(&cat).passed());
            }
        })
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = build, category, axioms, certification
}
criterion_main!(benches);
