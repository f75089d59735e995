use crate::error::{Error, Result};

/// Point caps for exhaustive loops. Exceeding a cap is an error, never a
/// silent truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Integer points visited by a box enumeration.
    pub box_points: u64,
    /// Points visited by a scan over a finite field or a ring `Z/qZ`.
    pub scan_points: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            box_points: 100_000_000,
            scan_points: 10_000_000,
        }
    }
}

impl Budget {
    pub fn uniform(points: u64) -> Self {
        Budget {
            box_points: points,
            scan_points: points,
        }
    }

    pub fn check_box(&self, what: &'static str, needed: u128) -> Result<()> {
        check(what, needed, self.box_points)
    }

    pub fn check_scan(&self, what: &'static str, needed: u128) -> Result<()> {
        check(what, needed, self.scan_points)
    }
}

fn check(what: &'static str, needed: u128, cap: u64) -> Result<()> {
    if needed > cap as u128 {
        Err(Error::Budget { what, needed, cap })
    } else {
        Ok(())
    }
}

/// `base^exp` saturating at `u128::MAX`.
pub fn pow_count(base: u128, exp: u32) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base);
    }
    acc
}
