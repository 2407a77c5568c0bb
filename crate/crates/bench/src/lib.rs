//! Fixtures shared by the benchmarks: the ESTC1 operating point.

use estc::{estc1, CrystalConfig};

pub const Q: [f64; 3] = [0.0, 0.0, 0.02];

/// Near the `d ≥ 3` line bottom.
pub const XI: f64 = 1.4996792e-6;

pub fn crystal() -> CrystalConfig {
    estc1(5e-4)
}
