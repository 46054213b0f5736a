use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use zipstrat::finitezip::{build_instance, transporter_exists, zip_orbits_with, FiniteField, Mat};
use zipstrat::parabolic::min_double_coset_reps_with;
use zipstrat::zipcomb::{closure_poset_with, zip_datum_from_cocharacter};
use zipstrat::{Execution, NodeSet, WeylGroup};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn closure(c: &mut Criterion) {
    let mut group = c.benchmark_group("closure_poset");
    for tag in ["B3", "A4", "D4"] {
        let g = WeylGroup::from_series(tag).unwrap();
        let d = zip_datum_from_cocharacter(g.clone(), NodeSet::from_iter([0]), (0..g.rank()).collect(), 2, Default::default())
            .unwrap();
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, tag), &d, |b, d| b.iter(|| closure_poset_with(d, exec).unwrap()));
        }
    }
    group.finish();
}

fn double_cosets(c: &mut Criterion) {
    let mut group = c.benchmark_group("double_cosets");
    let g = WeylGroup::from_series("F4").unwrap();
    let (j, k) = (NodeSet::from_iter([0, 1]), NodeSet::from_iter([2, 3]));
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, "F4"), |b| b.iter(|| min_double_coset_reps_with(&g, j, k, exec)));
    }
    group.finish();
}

fn orbits(c: &mut Criterion) {
    let mut group = c.benchmark_group("zip_orbits");
    group.sample_size(10);
    for (n, d, p, m) in [(3usize, 1usize, 2u64, 1u32), (2, 1, 2, 2), (2, 1, 3, 2)] {
        let inst = build_instance(n, d, p, m).unwrap();
        let label = format!("GL{n}_d{d}_F{}", p.pow(m));
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, &label), &inst, |b, inst| b.iter(|| zip_orbits_with(inst, exec).unwrap()));
        }
    }
    group.finish();
}

fn transporter(c: &mut Criterion) {
    let mut group = c.benchmark_group("transporter");
    group.sample_size(10);
    let inst = build_instance(3, 1, 2, 1).unwrap();
    let field = FiniteField::new(2, 2).unwrap();
    // Two matrices in different orbits: the search runs over all of P(F_4).
    let a = Mat::identity(3);
    let b = Mat::permutation(&[2, 0, 1]);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, "GL3_d1_F4"), |bch| {
            bch.iter(|| transporter_exists(inst.shape(), &field, &a, &b, exec))
        });
    }
    group.finish();
}

criterion_group!(benches, closure, double_cosets, orbits, transporter);
criterion_main!(benches);
