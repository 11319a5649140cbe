use std::hint::black_box;

use cknlab_bench::{extremal, generic_profile, params};
use cknlab_core::constants::{mode_infimum, mode_quotient_k_exact, QuotientFormula};
use cknlab_core::functionals::{mode_energies_closed_form, mode_energies_quadrature};
use cknlab_core::quadrature::{integrate_fn, DecayHint};
use cknlab_core::special::{gamma, weighted_exp_integral, GammaArg, WeightedExpIntegral};
use cknlab_core::variational::{
    build_gram_laguerre, estimate_mode_constant, minimize_gram, symmetry_breaking_scan, BasisSpec,
};
use cknlab_core::{MinimizeOptions, QuadratureSpec, QuotientForm};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn special(c: &mut Criterion) {
    c.bench_function("gamma/7.3", |b| {
        let t = GammaArg::new(7.3).unwrap();
        b.iter(|| gamma(black_box(t)))
    });
    c.bench_function("weighted_exp_integral", |b| {
        let i = WeightedExpIntegral::new(3.5, 2.0, 1.5).unwrap();
        b.iter(|| weighted_exp_integral(black_box(i)))
    });
}

fn quadrature(c: &mut Criterion) {
    let spec = QuadratureSpec::default();
    let f = |r: f64| (-2.0 * r.powf(1.5)).exp();
    c.bench_function("quadrature/plain", |b| {
        b.iter(|| integrate_fn(&f, black_box(3.5), None, &spec))
    });
    c.bench_function("quadrature/hinted", |b| {
        b.iter(|| integrate_fn(&f, black_box(3.5), Some(DecayHint::new(2.0, 1.5)), &spec))
    });
}

fn constants(c: &mut Criterion) {
    let p = params(12, 0.4);
    c.bench_function("K exact k=5", |b| b.iter(|| mode_quotient_k_exact(black_box(&p), 5)));
    c.bench_function("mode_infimum K kmax=64", |b| {
        b.iter(|| mode_infimum(QuotientFormula::K, black_box(&p), 64))
    });
}

fn energies(c: &mut Criterion) {
    let p = params(6, 0.2);
    let v = extremal(6, 0.2);
    let w = generic_profile();
    let spec = QuadratureSpec::default();
    c.bench_function("energies/closed k=1", |b| b.iter(|| mode_energies_closed_form(&v, &p, 1)));
    c.bench_function("energies/quadrature k=1", |b| {
        b.iter(|| mode_energies_quadrature(&w, &p, 1, &spec))
    });
}

fn variational(c: &mut Criterion) {
    let p = params(4, 0.0);
    let mut g = c.benchmark_group("gram+minimize");
    for m in [4usize, 8, 16, 24] {
        let basis = BasisSpec::default_for(&p, 1, m).unwrap();
        g.bench_with_input(BenchmarkId::new("gram", m), &basis, |b, basis| {
            b.iter(|| build_gram_laguerre(&p, 1, basis, QuotientForm::Full))
        });
        let gram = build_gram_laguerre(&p, 1, &basis, QuotientForm::Full).unwrap();
        g.bench_with_input(BenchmarkId::new("minimize", m), &gram, |b, gram| {
            b.iter(|| minimize_gram(gram, &MinimizeOptions::default(), &[]))
        });
    }
    g.finish();

    let mut g = c.benchmark_group("estimates");
    g.sample_size(10);
    g.bench_function("estimate N=5 k=0 [4,8,16]", |b| {
        b.iter(|| estimate_mode_constant(&params(5, 0.0), 0, &[4, 8, 16]))
    });
    g.bench_function("scan N=3 kmax=8 [4,8,16]", |b| {
        b.iter(|| symmetry_breaking_scan(3, 0.0, 8, &[4, 8, 16]))
    });
    g.finish();
}

criterion_group!(benches, special, quadrature, constants, energies, variational);
criterion_main!(benches);
