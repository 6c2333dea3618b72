//! Fixtures shared by the criterion benches.

use lambert_core::harness::{bench_samples, BenchConfig};
use lambert_core::TransferGeometry;

/// Normalized geometries drawn like the Monte-Carlo benchmark draws them.
pub fn fixture_geometries(n: usize, seed: u64) -> Vec<TransferGeometry> {
    let cfg = BenchConfig {
        n_samples: n,
        seed,
        ..Default::default()
    };
    bench_samples(&cfg)
        .into_iter()
        .filter_map(|(theta, tof)| TransferGeometry::planar(cfg.radius_ratio, theta, tof).ok())
        .collect()
}
