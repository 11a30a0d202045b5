//! Size caps shared by the exhaustive procedures.

use serde::{Deserialize, Serialize};

use crate::order::MAX_ENUM_POINTS;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    /// Largest order size accepted by enumeration (at most 8).
    pub max_order_size: usize,
    /// Largest `points * letters` for exhaustive valuation search.
    pub valuation_bits: usize,
    /// Largest number of construction stages.
    pub stage_cap: usize,
    /// Largest number of atoms in a truth-table check.
    pub taut_atoms: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_order_size: 7,
            valuation_bits: 20,
            stage_cap: 16,
            taut_atoms: 6,
        }
    }
}

impl Limits {
    /// Raises (or lowers) the order-size and valuation caps, as the
    /// `MILW_CAP` environment variable does. The order size stays within the
    /// compile-time maximum.
    pub fn with_size_cap(mut self, cap: usize) -> Self {
        self.max_order_size = cap.min(MAX_ENUM_POINTS);
        self.valuation_bits = self.valuation_bits.max(cap * 3).min(62);
        self
    }
}
