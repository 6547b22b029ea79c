//! Bundled data sets.

/// Name under which the CLI exposes [`loss_pairs`].
pub const LOSS_PAIRS_NAME: &str = "paper-s4";

/// Twenty bivariate loss observations `(x, y)`.
pub const LOSS_PAIRS: [[f64; 2]; 20] = [
    [0.468, 0.966],
    [9.951, 2.679],
    [0.866, 0.897],
    [6.731, 2.249],
    [1.421, 0.956],
    [2.040, 1.141],
    [2.967, 1.707],
    [1.200, 1.008],
    [0.426, 1.065],
    [1.946, 1.162],
    [0.676, 0.918],
    [1.184, 1.336],
    [0.960, 0.933],
    [1.972, 1.077],
    [1.549, 1.041],
    [0.819, 0.899],
    [0.063, 0.710],
    [1.280, 1.118],
    [0.824, 0.894],
    [0.227, 0.837],
];

/// Published rank vectors of [`LOSS_PAIRS`], one per coordinate.
pub const LOSS_PAIRS_RANKS: [[u32; 20]; 2] = [
    [4, 20, 8, 19, 13, 17, 18, 11, 3, 15, 5, 10, 9, 16, 14, 6, 1, 12, 7, 2],
    [9, 20, 4, 19, 8, 15, 18, 10, 12, 16, 6, 17, 7, 13, 11, 5, 1, 14, 3, 2],
];

/// [`LOSS_PAIRS`] as row vectors.
pub fn loss_pairs() -> Vec<Vec<f64>> {
    LOSS_PAIRS.iter().map(|r| r.to_vec()).collect()
}

/// Looks up a bundled data set by name.
pub fn by_name(name: &str) -> Option<Vec<Vec<f64>>> {
    (name == LOSS_PAIRS_NAME).then(loss_pairs)
}
