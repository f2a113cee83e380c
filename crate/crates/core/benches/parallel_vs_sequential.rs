//! Data-parallel vs sequential execution on three real workloads:
//! coefficient-kernel evaluation, disk quadrature, and sparse matvec.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use plap_core::coeffs::CoefficientField;
use plap_core::exec;
use plap_core::params::{Branch, ProblemParams};
use plap_core::profile::profile_ode;
use plap_core::quadrature::DiskQuadrature;
use plap_core::solver::assemble::{assemble_operator, AssemblyMode};
use plap_core::solver::strip::StripGrid;
use plap_core::tols;

fn setup() -> (ProblemParams, plap_core::profile::AngularProfile) {
    let prm = ProblemParams::new(4.0, 3, Branch::Larger).unwrap();
    let profile = profile_ode(&prm, 256, tols::ODE_TOL).unwrap();
    (prm, profile)
}

fn bench_angular_kernel(c: &mut Criterion) {
    let (prm, profile) = setup();
    let coeff = CoefficientField::new(&prm, &profile);
    let n = 200_000usize;
    let eval = |i: usize| {
        let theta = i as f64 * 1e-5;
        let m = coeff.angular_matrix(theta);
        m[0][0] + m[1][1]
    };
    let mut group = c.benchmark_group("angular_kernel");
    group.bench_function("parallel", |b| b.iter(|| black_box(exec::sum(n, eval))));
    group.bench_function("sequential", |b| {
        b.iter(|| black_box(exec::sum_seq(n, eval)))
    });
    group.finish();
}

fn bench_disk_quadrature(c: &mut Criterion) {
    let (prm, profile) = setup();
    let coeff = CoefficientField::new(&prm, &profile);
    let quad = DiskQuadrature::unit_disk(48, 192).unwrap();
    let f = |r: f64, theta: f64| {
        let m = coeff.angular_matrix(theta);
        r.powf(2.0 * prm.alpha_space) * (m[0][0] + m[1][1])
    };
    let mut group = c.benchmark_group("disk_quadrature");
    group.bench_function("parallel", |b| b.iter(|| black_box(quad.integrate(f))));
    group.bench_function("sequential", |b| {
        b.iter(|| {
            let mut total = 0.0;
            for (ri, &r) in quad.nodes_r.iter().enumerate() {
                let mut ring = 0.0;
                for &theta in &quad.nodes_theta {
                    ring += f(r, theta);
                }
                total += ring * quad.weights_r[ri] * quad.weight_theta * r;
            }
            black_box(total)
        })
    });
    group.finish();
}

fn bench_assembly_and_matvec(c: &mut Criterion) {
    let (prm, profile) = setup();
    let grid = StripGrid::new(&prm, 64, 128, None).unwrap();
    let sys = assemble_operator(&grid, &prm, &profile, AssemblyMode::SkewForm).unwrap();
    let x: Vec<f64> = (0..grid.n_dof()).map(|i| (i as f64 * 0.01).sin()).collect();
    let mut group = c.benchmark_group("strip_operator");
    group.bench_function("assemble", |b| {
        b.iter(|| {
            black_box(assemble_operator(&grid, &prm, &profile, AssemblyMode::SkewForm).unwrap())
        })
    });
    group.bench_function("matvec_parallel", |b| {
        b.iter(|| {
            black_box(exec::map_collect(sys.matrix.n_rows, |i| {
                let (cols, vals) = sys.matrix.row(i);
                cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum::<f64>()
            }))
        })
    });
    group.bench_function("matvec_sequential", |b| b.iter(|| black_box(sys.matrix.matvec(&x))));
    group.finish();
}

criterion_group!(
    benches,
    bench_angular_kernel,
    bench_disk_quadrature,
    bench_assembly_and_matvec
);
criterion_main!(benches);
