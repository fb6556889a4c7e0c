//! The full odds-ratio dependence structure of a 2×2×2 table.
//!
//! The three-way odds ratio ω₃ and the six conditional odds ratios ω_{ij|a}
//! of any strictly positive table are linked by the chain identity
//!
//! ```text
//! ω₃ = ω_{12|0}/ω_{12|1} = ω_{23|0}/ω_{23|1} = ω_{13|0}/ω_{13|1}
//! ```
//!
//! [`DependenceProfile3`] stores all seven quantities and refuses to exist
//! unless the identity holds, so a profile in hand is always internally
//! consistent.

use crate::error::{Error, Result};
use crate::relative_difference;
use crate::table::{Pair, Table3};
use crate::tol;

/// ω₃ together with the six conditional odds ratios of a 2×2×2 table.
#[derive(Debug, Clone, PartialEq)]
pub struct DependenceProfile3 {
    omega3: f64,
    /// Conditional odds ratios indexed by `[pair][conditioning level]`,
    /// pairs in `Pair::ALL` order.
    cond: [[f64; 2]; 3],
}

fn pair_slot(pair: Pair) -> usize {
    match pair {
        Pair::X1X2 => 0,
        Pair::X1X3 => 1,
        Pair::X2X3 => 2,
    }
}

impl DependenceProfile3 {
    pub(crate) fn from_parts(omega3: f64, cond: [[f64; 2]; 3]) -> Result<Self> {
        for pair in Pair::ALL {
            let [c0, c1] = cond[pair_slot(pair)];
            let ratio = c0 / c1;
            let rel = relative_difference(ratio, omega3);
            if rel > tol::CHAIN_IDENTITY_REL {
                return Err(Error::Inconsistency {
                    reason: format!(
                        "chain identity violated for pair {}: {:.17} / {:.17} deviates from \
                         omega3 = {:.17} by relative {:.3e}",
                        pair.label(),
                        c0,
                        c1,
                        omega3,
                        rel
                    ),
                });
            }
        }
        Ok(DependenceProfile3 { omega3, cond })
    }

    pub fn omega3(&self) -> f64 {
        self.omega3
    }

    /// ω_{ij|a} for the given pair and conditioning level.
    pub fn conditional(&self, pair: Pair, level: usize) -> f64 {
        assert!(level < 2, "level must be 0 or 1");
        self.cond[pair_slot(pair)][level]
    }

    /// The four quantities that pin down the profile: ω₃ and the three
    /// level-0 conditional odds ratios. The level-1 ratios are implied by
    /// the chain identity.
    pub fn targets(&self) -> OddsRatioTargets {
        OddsRatioTargets {
            omega3: self.omega3,
            cond_23: self.conditional(Pair::X2X3, 0),
            cond_13: self.conditional(Pair::X1X3, 0),
            cond_12: self.conditional(Pair::X1X2, 0),
        }
    }

    /// Largest relative difference between the entries of two profiles.
    pub fn max_relative_difference(&self, other: &DependenceProfile3) -> f64 {
        let mut worst = relative_difference(self.omega3, other.omega3);
        for slot in 0..3 {
            for level in 0..2 {
                worst = worst.max(relative_difference(
                    self.cond[slot][level],
                    other.cond[slot][level],
                ));
            }
        }
        worst
    }
}

impl Table3 {
    /// Computes ω₃ and all six conditional odds ratios, verifying the chain
    /// identity before returning.
    ///
    /// A violation of the identity beyond its tolerance can only come from
    /// an implementation bug, never from valid input, and surfaces as
    /// [`Error::Inconsistency`].
    pub fn dependence_profile(&self) -> Result<DependenceProfile3> {
        let omega3 = self.odds_ratio_3d()?;
        let mut cond = [[0.0; 2]; 3];
        for pair in Pair::ALL {
            for level in 0..2 {
                cond[pair_slot(pair)][level] = self.conditional_odds_ratio(pair, level)?;
            }
        }
        DependenceProfile3::from_parts(omega3, cond)
    }
}

/// The constraint set solved by the constrained-transform solvers: ω₃ plus
/// the three level-0 conditional odds ratios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OddsRatioTargets {
    pub omega3: f64,
    /// ω_{23|0}
    pub cond_23: f64,
    /// ω_{13|0}
    pub cond_13: f64,
    /// ω_{12|0}
    pub cond_12: f64,
}

impl OddsRatioTargets {
    pub fn new(omega3: f64, cond_23: f64, cond_13: f64, cond_12: f64) -> Result<Self> {
        let t = OddsRatioTargets {
            omega3,
            cond_23,
            cond_13,
            cond_12,
        };
        t.validate()?;
        Ok(t)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("omega3", self.omega3),
            ("omega_23|0", self.cond_23),
            ("omega_13|0", self.cond_13),
            ("omega_12|0", self.cond_12),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidTarget { name, value });
            }
        }
        Ok(())
    }

    /// Completes the targets into a full profile using the chain identity
    /// ω_{ij|1} = ω_{ij|0} / ω₃.
    pub fn complete(&self) -> Result<DependenceProfile3> {
        self.validate()?;
        let cond = [
            [self.cond_12, self.cond_12 / self.omega3],
            [self.cond_13, self.cond_13 / self.omega3],
            [self.cond_23, self.cond_23 / self.omega3],
        ];
        DependenceProfile3::from_parts(self.omega3, cond)
    }
}
