//! Synthetic inputs shared by the benchmarks.

use flypath_core::PathPoint;

/// A gently meandering eastbound flight of `n` points, one every 10 s.
pub fn synthetic_flight(n: usize) -> Vec<PathPoint> {
    (0..n)
        .map(|i| {
            let s = i as f64;
            PathPoint {
                time: 10.0 * s,
                lon: 116.3 + 0.01 * s,
                lat: 39.9 + 0.0015 * (0.8 * s).sin(),
                height: 1500.0 + 8.0 * (0.5 * s).sin(),
                heading: 90.0 - 4.8 * (0.8 * s).cos(),
                pitch: 1.5 + (0.6 * s).sin(),
                roll: 1.2 * (0.9 * s).sin(),
                photo_ref: format!("img_{i:03}.jpg"),
            }
        })
        .collect()
}
