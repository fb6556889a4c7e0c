//! The solution family of the under-determined uniform-margin problem:
//! tables with all three margins equal to (1/2, 1/2) and a prescribed
//! three-way odds ratio ω, with no constraint on the conditional odds
//! ratios. This set is a three-dimensional manifold, parametrized here by
//! the free cells (p000, p001, p010).
//!
//! Given the free triple, the margin equations force
//!
//! ```text
//! p011 = 1/2 − p000 − p001 − p010
//! p100 + p101 = 1/2 − p000 − p001 =: s1
//! p100 + p110 = 1/2 − p000 − p010 =: s2
//! p111 = u + p100,  u := 1/2 − s1 − s2
//! ```
//!
//! leaving one unknown t = p100. Cross-multiplying the odds-ratio
//! constraint ω = p000·p011·(s1−t)(s2−t) / (p001·p010·t·(u+t)) gives a
//! quadratic in t,
//!
//! ```text
//! (A−B)t² − (A(s1+s2) + Bu)t + A·s1·s2 = 0,   A = p000·p011,  B = ω·p001·p010,
//! ```
//!
//! whose roots complete the table in closed form. On the feasible interval
//! max(0, −u) < t < min(s1, s2) the ω expression is strictly decreasing
//! from +∞ to 0, so exactly one root yields a strictly positive table.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::table::{Table3, TableKind, MARGIN_CONTRASTS};
use crate::tol;

/// Which root of the completion quadratic produced a family point. For a
/// degenerate (linear) fiber the surviving root keeps its formula sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootBranch {
    Plus,
    Minus,
}

/// One member of the solution family: the free parameters together with the
/// completed table.
///
/// Points produced by [`complete_table`] and [`sample_family`] satisfy the
/// full system: margins uniform to 1e-14 and ω₃ reproduced to relative
/// 1e-10. Hand-built points carry no such guarantee;
/// [`verify_family_point`] reports residuals either way.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyPoint {
    /// (p000, p001, p010)
    pub free: [f64; 3],
    /// Target three-way odds ratio of the fiber.
    pub omega: f64,
    pub table: Table3,
    pub branch: RootBranch,
}

/// Residuals of a family point against the uniform-margin system.
#[derive(Debug, Clone, Copy)]
pub struct FamilyResiduals {
    /// |Σ cells − 1|
    pub total: f64,
    /// Margin contrasts |Σ level-0 − Σ level-1| per axis.
    pub margins: [f64; 3],
    /// |ln ω₃(table) − ln ω| (infinite if ω₃ is undefined).
    pub omega_log: f64,
}

impl FamilyResiduals {
    /// Largest residual among the four linear rows.
    pub fn linear_max(&self) -> f64 {
        self.margins.iter().copied().fold(self.total, f64::max)
    }

    /// Largest residual over all five rows.
    pub fn max(&self) -> f64 {
        self.linear_max().max(self.omega_log)
    }
}

/// Substitutes the point back into the five rows of the uniform-margin
/// system and reports the residual of each. Reports residuals even for
/// invalid points.
pub fn verify_family_point(point: &FamilyPoint) -> FamilyResiduals {
    let cells = point.table.cells();
    let total = (cells.iter().sum::<f64>() - 1.0).abs();
    let margins = MARGIN_CONTRASTS.map(|row| {
        cells
            .iter()
            .zip(row)
            .map(|(c, s)| c * s)
            .sum::<f64>()
            .abs()
    });
    let w3 = (cells[0] * cells[3] * cells[5] * cells[6])
        / (cells[1] * cells[2] * cells[4] * cells[7]);
    let omega_log = if w3.is_finite() && w3 > 0.0 && point.omega > 0.0 {
        (w3.ln() - point.omega.ln()).abs()
    } else {
        f64::INFINITY
    };
    FamilyResiduals {
        total,
        margins,
        omega_log,
    }
}

/// Real roots of `a·t² + b·t + c = 0` in the numerically stable form. With
/// `a = 0` the quadratic degrades to the linear root `−c/b` (the other root
/// escapes to infinity and is discarded by the feasibility filter).
fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<(f64, RootBranch)> {
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    let sd = disc.sqrt();
    if b == 0.0 {
        let r = sd / (2.0 * a);
        return vec![(r, RootBranch::Plus), (-r, RootBranch::Minus)];
    }
    let q = -0.5 * (b + b.signum() * sd);
    let root_q = q / a;
    let root_c = c / q;
    if b > 0.0 {
        vec![(root_c, RootBranch::Plus), (root_q, RootBranch::Minus)]
    } else {
        vec![(root_q, RootBranch::Plus), (root_c, RootBranch::Minus)]
    }
}

/// Completes the free triple (p000, p001, p010) into full tables with
/// uniform margins and three-way odds ratio `omega`.
///
/// Returns every root of the completion quadratic that yields a strictly
/// positive, residual-verified table (at most two, generically one).
pub fn complete_table(free: [f64; 3], omega: f64) -> Result<Vec<FamilyPoint>> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::InvalidOmega { value: omega });
    }
    let [p000, p001, p010] = free;
    for (name, value) in [("p000", p000), ("p001", p001), ("p010", p010)] {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::InfeasibleFreeParameters {
                reason: format!("{name} = {value} must be strictly positive"),
            });
        }
    }
    let sum = p000 + p001 + p010;
    let p011 = 0.5 - sum;
    if p011 <= 0.0 {
        return Err(Error::InfeasibleFreeParameters {
            reason: format!(
                "p011 = 1/2 - {sum} = {p011} <= 0; the free parameters must satisfy \
                 p000 + p001 + p010 < 1/2"
            ),
        });
    }

    let s1 = 0.5 - p000 - p001;
    let s2 = 0.5 - p000 - p010;
    let u = 0.5 - s1 - s2;
    let big_a = p000 * p011;
    let big_b = omega * p001 * p010;
    let a = big_a - big_b;
    let b = -(big_a * (s1 + s2) + big_b * u);
    let c = big_a * s1 * s2;

    let mut points = Vec::new();
    for (t, branch) in quadratic_roots(a, b, c) {
        let cells = [p000, p001, p010, p011, t, s1 - t, s2 - t, u + t];
        if !cells.iter().all(|&x| x.is_finite() && x > 0.0) {
            continue;
        }
        let point = FamilyPoint {
            free,
            omega,
            table: Table3::from_raw(cells, TableKind::Probabilities, None),
            branch,
        };
        let residuals = verify_family_point(&point);
        if residuals.linear_max() <= tol::FAMILY_LINEAR_ABS
            && residuals.omega_log <= tol::FAMILY_OMEGA_LOG
        {
            points.push(point);
        }
    }
    if points.is_empty() {
        return Err(Error::NoFeasibleRoot);
    }
    Ok(points)
}

/// Draws up to `n` family points for the given ω by rejection-sampling free
/// triples uniformly from the open simplex {p > 0, p000 + p001 + p010 < 1/2}
/// and completing each. Deterministic for a fixed seed; may return fewer
/// than `n` points if acceptance is low.
pub fn sample_family(omega: f64, n: usize, seed: u64) -> Result<Vec<FamilyPoint>> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::InvalidOmega { value: omega });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_proposals = n.saturating_mul(10_000);
    let mut points = Vec::with_capacity(n);
    let mut proposals = 0usize;
    while points.len() < n && proposals < max_proposals {
        proposals += 1;
        let free: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.0..0.5));
        if free.iter().any(|&v| v <= 0.0) || free.iter().sum::<f64>() >= 0.5 {
            continue;
        }
        if let Ok(mut completed) = complete_table(free, omega) {
            points.append(&mut completed);
        }
    }
    if points.is_empty() {
        return Err(Error::FeasibleRegionTooThin {
            proposals: max_proposals,
        });
    }
    points.truncate(n);
    Ok(points)
}
