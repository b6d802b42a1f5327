//! Small hand-built families used in documentation and tests.

use crate::family::{Distribution, Family};

/// The four-member family with states `s0, s1, s2, t, f`.
///
/// `s0` moves to the state chosen by `X ∈ {s1, s2}`; `s1` and `s2` split
/// their mass between the fixed parameters `T' = t`, `F' = f` and the hole
/// `Y ∈ {t, f}`. Members in lexicographic order reach `t` from `s0` with
/// probability 0.8, 0.6, 0.4 and 0.2.
pub fn toy4() -> Family {
    let d = |e: &[(usize, f64)]| Distribution::new(e.iter().copied()).expect("valid template");
    Family::new(
        ["s0", "s1", "s2", "t", "f"].map(String::from).to_vec(),
        0,
        ["X", "Y", "T'", "F'"].map(String::from).to_vec(),
        vec![vec![1, 2], vec![3, 4], vec![3], vec![4]],
        vec![
            d(&[(0, 1.0)]),
            d(&[(2, 0.6), (1, 0.2), (3, 0.2)]),
            d(&[(2, 0.2), (1, 0.2), (3, 0.6)]),
            d(&[(2, 1.0)]),
            d(&[(3, 1.0)]),
        ],
    )
    .expect("toy4 is well formed")
}
