use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use dconvex::principle::harmonic_solve;
use dconvex::scheme::{ConvexEnvelope, EnvelopeMethod, OperatorPlan};
use dconvex::{ma_measure, solve, ConvexDomain, DirectionStencil, MAProblem, SchemeConfig};
use dconvex_bench::{exp_samples, unit_lattice};

fn operator(c: &mut Criterion) {
    let mut g = c.benchmark_group("operator sweep");
    for w in [1, 2, 3] {
        let lat = unit_lattice(1.0 / 64.0);
        let plan = OperatorPlan::new(&lat, &DirectionStencil::new(w).unwrap()).unwrap();
        let u = exp_samples(&lat);
        g.bench_with_input(BenchmarkId::from_parameter(format!("W={w}")), &w, |b, _| {
            b.iter(|| lat.interior_ids().map(|x| plan.ma(x, black_box(u.values()))).sum::<f64>())
        });
    }
    g.finish();
}

fn solver(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve exp");
    g.sample_size(10);
    for n in [16, 32] {
        let lat = unit_lattice(1.0 / n as f64);
        let p = MAProblem::exp(ConvexDomain::unit_box());
        let cfg = SchemeConfig::default();
        g.bench_with_input(BenchmarkId::from_parameter(format!("h=1/{n}")), &n, |b, _| {
            b.iter(|| solve(&p, &lat, &cfg).unwrap())
        });
    }
    g.finish();
}

fn measure(c: &mut Criterion) {
    let mut g = c.benchmark_group("ma measure");
    g.sample_size(20);
    for n in [16, 32] {
        let lat = unit_lattice(1.0 / n as f64);
        let u = exp_samples(&lat);
        g.bench_with_input(BenchmarkId::from_parameter(format!("h=1/{n}")), &n, |b, _| b.iter(|| ma_measure(&u).unwrap()));
    }
    g.finish();
}

fn harmonic(c: &mut Criterion) {
    let lat = unit_lattice(1.0 / 64.0);
    c.bench_function("harmonic solve h=1/64", |b| b.iter(|| harmonic_solve(&lat, |p| p[0] * p[0] - p[1]).unwrap()));
}

fn envelope(c: &mut Criterion) {
    let d = ConvexDomain::disk([0.0, 0.0], 1.0).unwrap();
    let g = |p: [f64; 2]| (p[0] - 0.2).abs() + p[1] * p[1];
    let mut grp = c.benchmark_group("envelope eval");
    for (n, m) in [(64, EnvelopeMethod::Triples), (64, EnvelopeMethod::Simplex), (512, EnvelopeMethod::Simplex)] {
        let env = ConvexEnvelope::from_boundary(&d, g, n, m).unwrap();
        grp.bench_function(format!("{m:?} n={n}"), |b| b.iter(|| env.eval(black_box([0.1, -0.3])).unwrap()));
    }
    grp.finish();
}

criterion_group!(benches, operator, solver, measure, harmonic, envelope);
criterion_main!(benches);
