//! Closed-form uniform-margin transforms.
//!
//! For a 2×2 table the unique table with uniform margins and odds ratio ω is
//!
//! ```text
//! p00 = p11 = √ω / (2(1+√ω))        p01 = p10 = 1 / (2(1+√ω))
//! ```
//!
//! For a 2×2×2 table the analogous symmetric solution puts
//! ω^{1/4}/(4(1+ω^{1/4})) on the even-parity cells (i⊕j⊕k = 0) and
//! 1/(4(1+ω^{1/4})) on the odd-parity cells; it has uniform margins and
//! three-way odds ratio ω, and it is also the unique table whose
//! two-dimensional sections are all uniform.

use crate::error::{Error, Result};
use crate::table::{Table2, Table3, TableKind};
use crate::tol;

fn validate_omega(omega: f64) -> Result<()> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::InvalidOmega { value: omega });
    }
    Ok(())
}

/// Fourth root via the log, which stays accurate for extreme ω.
fn fourth_root(omega: f64) -> f64 {
    (omega.ln() / 4.0).exp()
}

fn parity(flat: usize) -> usize {
    ((flat >> 2) ^ (flat >> 1) ^ flat) & 1
}

/// The 2×2 uniform-margin transform: `diag` is the common value of
/// p00 = p11, `offdiag` of p01 = p10, and `omega` the preserved odds ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformTransform2 {
    diag: f64,
    offdiag: f64,
    omega: f64,
}

impl UniformTransform2 {
    pub fn diag(&self) -> f64 {
        self.diag
    }

    pub fn offdiag(&self) -> f64 {
        self.offdiag
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn to_table(&self) -> Table2 {
        Table2::from_raw(
            [self.diag, self.offdiag, self.offdiag, self.diag],
            TableKind::Probabilities,
        )
    }
}

/// Unique 2×2 probability table with both margins equal to (1/2, 1/2) and
/// odds ratio `omega`.
pub fn uniformize_2d(omega: f64) -> Result<UniformTransform2> {
    validate_omega(omega)?;
    let s = omega.sqrt();
    let denom = 2.0 * (1.0 + s);
    Ok(UniformTransform2 {
        diag: s / denom,
        offdiag: 1.0 / denom,
        omega,
    })
}

/// Symmetric 2×2×2 probability table with all three margins equal to
/// (1/2, 1/2) and three-way odds ratio `omega`.
pub fn symmetric_3d(omega: f64) -> Result<Table3> {
    validate_omega(omega)?;
    let r = fourth_root(omega);
    let denom = 4.0 * (1.0 + r);
    let even = r / denom;
    let odd = 1.0 / denom;
    let cells = std::array::from_fn(|flat| if parity(flat) == 0 { even } else { odd });
    Ok(Table3::from_raw(cells, TableKind::Probabilities, None))
}

/// Residuals of the uniform-section system: the table must have grand total
/// 1, uniform one-dimensional margins, uniform two-dimensional sections, and
/// three-way odds ratio ω.
#[derive(Debug, Clone, Copy)]
pub struct SectionResiduals {
    /// |ln ω₃(table) − ln ω| (infinite if ω₃ is undefined).
    pub omega_log: f64,
    /// |Σ cells − 1|
    pub total: f64,
    /// Margin contrasts |Σ level-0 cells − Σ level-1 cells| per axis.
    pub margins: [f64; 3],
    /// The nine section-uniformity contrasts.
    pub sections: [f64; 9],
}

const SECTION_ROWS: [[f64; 8]; 9] = [
    [1.0, 1.0, -1.0, -1.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 1.0, -1.0, -1.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0, 1.0, 1.0, -1.0, -1.0],
    [1.0, -1.0, 1.0, -1.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 1.0, -1.0, 0.0, -1.0, 0.0],
    [0.0, 0.0, 0.0, 0.0, 1.0, -1.0, 1.0, -1.0],
    [1.0, -1.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0],
    [0.0, 1.0, -1.0, 0.0, 0.0, 1.0, -1.0, 0.0],
    [0.0, 0.0, 1.0, -1.0, 0.0, 0.0, 1.0, -1.0],
];

fn contrast(cells: &[f64; 8], row: &[f64; 8]) -> f64 {
    cells.iter().zip(row).map(|(c, s)| c * s).sum()
}

impl SectionResiduals {
    /// All fourteen rows in system order: odds-ratio row, grand total,
    /// three margins, nine sections.
    pub fn rows(&self) -> [f64; 14] {
        let mut rows = [0.0; 14];
        rows[0] = self.omega_log;
        rows[1] = self.total;
        rows[2..5].copy_from_slice(&self.margins);
        rows[5..14].copy_from_slice(&self.sections);
        rows
    }

    pub fn max(&self) -> f64 {
        self.rows().iter().copied().fold(0.0, f64::max)
    }
}

/// Evaluates every row of the uniform-section system for `table` against the
/// target odds ratio `omega`.
pub fn section_residuals(table: &Table3, omega: f64) -> SectionResiduals {
    let cells = table.cells();
    let omega_log = match table.odds_ratio_3d() {
        Ok(w3) if omega > 0.0 => (w3.ln() - omega.ln()).abs(),
        _ => f64::INFINITY,
    };
    SectionResiduals {
        omega_log,
        total: (cells.iter().sum::<f64>() - 1.0).abs(),
        margins: crate::table::MARGIN_CONTRASTS.map(|row| contrast(cells, &row).abs()),
        sections: SECTION_ROWS.map(|row| contrast(cells, &row).abs()),
    }
}

/// Unique 2×2×2 probability table with three-way odds ratio `omega`, uniform
/// margins, and uniform two-dimensional sections.
///
/// This coincides with [`symmetric_3d`]; every row of the section system is
/// verified to residual ≤ 1e-12 before the table is returned.
pub fn uniform_sections_3d(omega: f64) -> Result<Table3> {
    let table = symmetric_3d(omega)?;
    let residuals = section_residuals(&table, omega);
    if residuals.max() > tol::SECTION_RESIDUAL_ABS {
        return Err(Error::Inconsistency {
            reason: format!(
                "uniform-section residual {:.3e} exceeds {:.1e} for omega = {}",
                residuals.max(),
                tol::SECTION_RESIDUAL_ABS,
                omega
            ),
        });
    }
    Ok(table)
}
