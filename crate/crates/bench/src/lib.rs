//! Fixtures shared by the pipeline benchmarks.

use moebius_core::sampling::sample_points;
use moebius_core::{builtin, ImmersionSpec, Jet};

/// Builtins exercised by the benchmarks, one per ambient model.
pub const BENCH_SPECS: [&str; 4] = ["product-spheres-s4", "veronese-s4", "hyperbolic-cylinder-h4", "ls-1-0-sqrt3-0"];

pub fn spec_with_point(name: &str) -> (ImmersionSpec, Vec<f64>) {
    let spec = builtin(name).expect("builtin exists");
    let u = sample_points(&spec.domain, 1, 0).remove(0);
    (spec, u)
}

/// A pair of dense jets in `nvars` variables.
pub fn dense_jets(nvars: usize, order: usize) -> (Jet, Jet) {
    let a = Jet::from_taylor(nvars, order, |m| 1.0 / (1.0 + m.iter().map(|&k| k as f64).sum::<f64>()));
    let b = Jet::from_taylor(nvars, order, |m| if m.iter().all(|&k| k % 2 == 0) { 0.5 } else { -0.25 });
    (a, b)
}
