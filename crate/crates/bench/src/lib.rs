//! Shared input builders for the benchmarks.

use rand::Rng;

use zonecast_core::grid::{ClimateVariable, VARIABLE_COUNT};
use zonecast_core::seeding::rng_from;
use zonecast_core::synth::{
    ComponentSpec, GeneratorSpec, GridLayout, LabeledDataset, TargetRelation,
};

/// Gaussian blob mixture in d dimensions, `per_cluster` points per blob.
pub fn blobs(k: usize, per_cluster: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng_from(seed);
    let mut points = Vec::with_capacity(k * per_cluster);
    for j in 0..k {
        let center = 6.0 * j as f64;
        for _ in 0..per_cluster {
            points.push(
                (0..d)
                    .map(|_| center + rng.random_range(-1.0..1.0))
                    .collect(),
            );
        }
    }
    points
}

/// Noisy sine-curve regression problem.
pub fn sine_problem(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = rng_from(seed);
    let x: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random_range(0.0..1.0)]).collect();
    let y = x
        .iter()
        .map(|p| (2.0 * std::f64::consts::PI * p[0]).sin() + 0.1 * rng.random_range(-1.0..1.0))
        .collect();
    (x, y)
}

/// A compact labeled dataset for end-to-end pipeline benchmarks.
pub fn pipeline_dataset(seed: u64) -> LabeledDataset {
    let mut components = Vec::new();
    for j in 0..3 {
        let mut mean = [15.0, 25.0, 3.0, 50.0, 1005.0, 1.0, 0.5];
        for m in &mut mean {
            *m += 30.0 * j as f64;
        }
        components.push(ComponentSpec {
            mean,
            std: [0.5; VARIABLE_COUNT],
            cells: 8,
        });
    }
    let spec = GeneratorSpec {
        components,
        years: (1970, 2012),
        target_relation: TargetRelation::Linear {
            target: ClimateVariable::AirTemperature,
            intercept: 1.0,
            coefficients: vec![
                (ClimateVariable::Precipitation, 2.0),
                (ClimateVariable::RelativeHumidity, 0.5),
            ],
        },
        noise_sigma: 0.1,
        year_noise: [1.0; VARIABLE_COUNT],
        seed,
        grid: GridLayout::default(),
    };
    zonecast_core::synth::generate(&spec).expect("valid bench spec")
}
