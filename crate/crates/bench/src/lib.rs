//! Fixed inputs shared by the benchmarks.

use palmshift_core::{palm_sample, GroupModel, PointConfiguration, ProcessSpec, RngStream, Window};

/// Palm Poisson configuration on the flat 2-torus.
pub fn torus_config(intensity: f64, seed: u64) -> PointConfiguration {
    let mut rng = RngStream::new(seed, 0).rng();
    palm_sample(
        ProcessSpec::Poisson { intensity },
        GroupModel::Torus { dim: 2 },
        &Window::Whole,
        &mut rng,
    )
    .expect("torus sample")
}

/// Palm Poisson configuration on an ax+b cone around the identity.
pub fn ax_b_config(slope: f64, seed: u64) -> PointConfiguration {
    let mut rng = RngStream::new(seed, 0).rng();
    palm_sample(
        ProcessSpec::Poisson { intensity: 1.0 },
        GroupModel::AxB,
        &Window::cone(slope, 1e-3, 1e3),
        &mut rng,
    )
    .expect("ax+b sample")
}
