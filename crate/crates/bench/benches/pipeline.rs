use criterion::{black_box, criterion_group, criterion_main, Criterion};

use spinorlight_core::dynamics::{gaussian_spinor, Stepper, CHI_PLUS};
use spinorlight_core::{
    spectrum, sweep_frequencies, total_transfer, zero_frequency_transmission, Grid, MassProfile,
    MixingAngle, PhysicalScale, ScatterMode,
};

fn lab_kink() -> (PhysicalScale, spinorlight_core::SampledProfile) {
    let scale = PhysicalScale::default();
    let grid = Grid::new(&scale, 3000).unwrap();
    let sampled = MassProfile::kink_dimensionless(75.0, 6.0, &scale)
        .sample(&grid, &scale)
        .unwrap();
    (scale, sampled)
}

fn bench_total_transfer(c: &mut Criterion) {
    let (scale, sampled) = lab_kink();
    let mixing = MixingAngle::ideal();
    c.bench_function("total_transfer_3000_cells", |b| {
        b.iter(|| {
            total_transfer(&sampled, black_box(2.5), &scale, &mixing, ScatterMode::Ideal).unwrap()
        })
    });
}

fn bench_spectrum(c: &mut Criterion) {
    let (scale, sampled) = lab_kink();
    let mixing = MixingAngle::ideal();
    let freqs = sweep_frequencies(-2.0, 2.0, 101, 4.25).unwrap();
    c.bench_function("spectrum_101_freqs_3000_cells", |b| {
        b.iter(|| {
            spectrum(&sampled, &freqs, 4.25, &scale, &mixing, ScatterMode::Ideal).unwrap()
        })
    });
}

fn bench_zero_frequency_oracle(c: &mut Criterion) {
    let (scale, sampled) = lab_kink();
    let mixing = MixingAngle::ideal();
    c.bench_function("zero_frequency_oracle", |b| {
        b.iter(|| zero_frequency_transmission(black_box(&sampled), &scale, &mixing))
    });
}

fn bench_split_step(c: &mut Criterion) {
    let scale = PhysicalScale::new(1.0, 40.0).unwrap();
    let grid = Grid::new(&scale, 4000).unwrap();
    let sampled = MassProfile::kink_dimensionless(40.0, 40.0, &scale)
        .sample(&grid, &scale)
        .unwrap();
    let stepper = Stepper::new(&sampled, &scale);
    let field = gaussian_spinor(&grid, 1.2, 0.0, CHI_PLUS).unwrap();
    c.bench_function("split_step_100_steps_4000_cells", |b| {
        b.iter(|| {
            let mut f = field.clone();
            for _ in 0..100 {
                stepper.step(&mut f);
            }
            f
        })
    });
}

criterion_group!(
    benches,
    bench_total_transfer,
    bench_spectrum,
    bench_zero_frequency_oracle,
    bench_split_step
);
criterion_main!(benches);
