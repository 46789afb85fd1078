//! Parameter triples and grid sizes shared by the benchmarks.

use sar2d_core::Params;

/// One representative triple per regime with a known limit.
pub fn regimes() -> [(&'static str, Params); 4] {
    let p = |a, b, c| Params::new(a, b, c).expect("finite");
    [
        ("stable", p(0.2, 0.1, 0.3)),
        ("face", p(0.3, 0.3, 0.4)),
        ("edge", p(1.0, 0.5, -0.5)),
        ("vertex", p(1.0, 1.0, -1.0)),
    ]
}

pub const TABLE_SIZES: [usize; 3] = [64, 256, 1024];
