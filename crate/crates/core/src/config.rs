use serde::Serialize;

/// Numeric defaults shared by every engine. Reports echo the values in use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Config {
    /// Window size per lattice coordinate.
    pub window: usize,
    /// Iteration cap for projection series and stabilization.
    pub k_max: usize,
    /// Residual tolerance for relations, unitarity and orthonormalization.
    pub tol: f64,
    /// Singular values below this count as zero.
    pub rank_tol: f64,
    /// Extraction residual above this marks wandering data unreliable.
    pub extraction_tol: f64,
    /// Witness residual bound for equivalence verdicts.
    pub witness_tol: f64,
    /// Word-length bound for trace fingerprints; `None` means 2·max(dim)².
    pub word_bound: Option<usize>,
    /// Seed for the generic intertwiner.
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            window: 6,
            k_max: 64,
            tol: 1e-10,
            rank_tol: 1e-8,
            extraction_tol: 1e-8,
            witness_tol: 1e-9,
            word_bound: None,
            seed: 0,
        }
    }
}

impl Config {
    pub fn word_bound_for(&self, max_dim: usize) -> usize {
        self.word_bound.unwrap_or(2 * max_dim * max_dim)
    }
}
