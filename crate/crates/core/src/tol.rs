/// Centralized numerical tolerance policy.
///
/// Every rank decision in the crate flows through one instance of this
/// policy so that dimension claims are never the product of two different
/// thresholds disagreeing with each other.
#[derive(Debug, Clone, Copy)]
pub struct TolPolicy {
    /// Multiplier on the default rank cutoff `max(rows, cols) * eps * sigma_max`.
    pub rank_multiplier: f64,
    /// Minimum ratio `sigma_rank / sigma_{rank+1}` for an unambiguous rank.
    pub min_gap_ratio: f64,
}

impl Default for TolPolicy {
    fn default() -> Self {
        TolPolicy { rank_multiplier: 1.0, min_gap_ratio: 1e3 }
    }
}

impl TolPolicy {
    /// Policy with a custom rank multiplier (the `ORTHOSTAB_TOL` override).
    pub fn with_multiplier(rank_multiplier: f64) -> Self {
        TolPolicy { rank_multiplier, ..Default::default() }
    }

    /// Rank cutoff for a matrix with the given shape and largest singular value.
    pub fn rank_cutoff(&self, rows: usize, cols: usize, sigma_max: f64) -> f64 {
        self.rank_multiplier * rows.max(cols) as f64 * f64::EPSILON * sigma_max
    }
}
