//! Fixed benchmark instances shared by the criterion benches.

use sndp_core::{generate, Family, GeneratorSpec, Instance, Kind};

/// A planar instance of `n` vertices with four demands of at most `k_max`.
pub fn planar(family: Family, kind: Kind, n: usize, k_max: u32) -> Instance {
    generate(&GeneratorSpec::new(family, n, 4, k_max, kind, 42)).expect("benchmark instance")
}
