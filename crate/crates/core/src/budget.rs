use crate::error::{Error, Result};

/// Environment variable overriding the default memory budget.
pub const MEM_BUDGET_ENV: &str = "SAR2D_MEM_BUDGET_BYTES";

/// Upper bound on the bytes a single table allocation may request.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemoryBudget {
    pub bytes: u64,
}

impl MemoryBudget {
    /// 2 GiB.
    pub const DEFAULT: MemoryBudget = MemoryBudget { bytes: 2 << 30 };

    pub const fn new(bytes: u64) -> Self {
        Self { bytes }
    }

    /// Reads [`MEM_BUDGET_ENV`], falling back to [`MemoryBudget::DEFAULT`].
    pub fn from_env() -> Result<Self> {
        match std::env::var(MEM_BUDGET_ENV) {
            Ok(v) => v.trim().parse::<u64>().map(Self::new).map_err(|_| {
                Error::InvalidParameter(format!("{MEM_BUDGET_ENV} must be a byte count, got {v:?}"))
            }),
            Err(_) => Ok(Self::DEFAULT),
        }
    }

    /// Checks that `count` values of `f64` fit into the budget.
    pub fn check_f64s(&self, count: u128) -> Result<()> {
        let requested = count.saturating_mul(std::mem::size_of::<f64>() as u128);
        if requested > self.bytes as u128 {
            return Err(Error::Resource {
                requested: u64::try_from(requested).unwrap_or(u64::MAX),
                budget: self.bytes,
            });
        }
        Ok(())
    }
}

impl Default for MemoryBudget {
    fn default() -> Self {
        Self::DEFAULT
    }
}
