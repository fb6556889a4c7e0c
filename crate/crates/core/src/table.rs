//! 2×2 and 2×2×2 contingency tables with margin and odds-ratio computations.
//!
//! A [`Table3`] stores its eight cells as a flat array in row-major `(i, j, k)`
//! order with `i` slowest, i.e. `[p000, p001, p010, p011, p100, p101, p110,
//! p111]`, where the axes `(i, j, k)` correspond to the variables
//! `(X1, X2, X3)`. A [`Table2`] stores `[p00, p01, p10, p11]`.
//!
//! Cells may be raw counts or probabilities; the [`TableKind`] flag records
//! which. Zero cells are accepted at construction and only rejected by the
//! operations that need strictly positive cells (odds ratios, solvers).

use crate::error::{Error, Result};
use crate::tol;

/// Whether the cells of a table are raw counts or probabilities summing to 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableKind {
    Counts,
    Probabilities,
}

/// One of the three classification variables of a 2×2×2 table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X1,
    X2,
    X3,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X1, Axis::X2, Axis::X3];

    /// Position of the axis in the `(i, j, k)` index triple.
    pub fn index(self) -> usize {
        match self {
            Axis::X1 => 0,
            Axis::X2 => 1,
            Axis::X3 => 2,
        }
    }

    /// Level of this axis in the flat cell index (0..8).
    fn level_in(self, flat: usize) -> usize {
        (flat >> (2 - self.index())) & 1
    }
}

/// An unordered pair of variables of a 2×2×2 table, used to name the
/// conditional odds ratios ω_{ij|a}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pair {
    X1X2,
    X1X3,
    X2X3,
}

impl Pair {
    pub const ALL: [Pair; 3] = [Pair::X1X2, Pair::X1X3, Pair::X2X3];

    /// The two paired axes, in index order.
    pub fn axes(self) -> (Axis, Axis) {
        match self {
            Pair::X1X2 => (Axis::X1, Axis::X2),
            Pair::X1X3 => (Axis::X1, Axis::X3),
            Pair::X2X3 => (Axis::X2, Axis::X3),
        }
    }

    /// The remaining axis, fixed when conditioning.
    pub fn conditioning_axis(self) -> Axis {
        match self {
            Pair::X1X2 => Axis::X3,
            Pair::X1X3 => Axis::X2,
            Pair::X2X3 => Axis::X1,
        }
    }

    /// Subscript used in the ω_{ij|a} notation, e.g. `"23"`.
    pub fn label(self) -> &'static str {
        match self {
            Pair::X1X2 => "12",
            Pair::X1X3 => "13",
            Pair::X2X3 => "23",
        }
    }
}

/// Name of one axis together with the names of its two levels
/// (level 0 first).
#[derive(Debug, Clone, PartialEq)]
pub struct AxisLabel {
    pub name: String,
    pub levels: [String; 2],
}

/// Margin contrasts (level-0 cells minus level-1 cells) over the flat cell
/// order, for X1, X2, X3. Each row sums a margin difference that must
/// vanish for uniform margins.
pub(crate) const MARGIN_CONTRASTS: [[f64; 8]; 3] = [
    [1.0, 1.0, 1.0, 1.0, -1.0, -1.0, -1.0, -1.0],
    [1.0, 1.0, -1.0, -1.0, 1.0, 1.0, -1.0, -1.0],
    [1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0],
];

fn validate_cells(cells: &[f64]) -> Result<()> {
    for (index, &value) in cells.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFiniteCell { index });
        }
        if value < 0.0 {
            return Err(Error::NegativeCell { index, value });
        }
    }
    Ok(())
}

fn validate_probability_sum(cells: &[f64]) -> Result<()> {
    let sum: f64 = cells.iter().sum();
    if (sum - 1.0).abs() > tol::SUM_ABS {
        return Err(Error::ProbabilitySum { sum });
    }
    Ok(())
}

/// A 2×2 contingency table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table2 {
    cells: [f64; 4],
    kind: TableKind,
}

impl Table2 {
    /// Builds a counts table from `[n00, n01, n10, n11]`.
    pub fn from_counts(cells: [f64; 4]) -> Result<Self> {
        validate_cells(&cells)?;
        Ok(Table2 {
            cells,
            kind: TableKind::Counts,
        })
    }

    /// Builds a probability table; the cells must sum to 1.
    pub fn from_probabilities(cells: [f64; 4]) -> Result<Self> {
        validate_cells(&cells)?;
        validate_probability_sum(&cells)?;
        Ok(Table2 {
            cells,
            kind: TableKind::Probabilities,
        })
    }

    pub(crate) fn from_raw(cells: [f64; 4], kind: TableKind) -> Self {
        Table2 { cells, kind }
    }

    pub fn cells(&self) -> &[f64; 4] {
        &self.cells
    }

    pub fn cell(&self, i: usize, j: usize) -> f64 {
        self.cells[2 * i + j]
    }

    pub fn kind(&self) -> TableKind {
        self.kind
    }

    pub fn grand_total(&self) -> f64 {
        self.cells.iter().sum()
    }

    /// Divides every cell by the grand total, turning the table into
    /// relative frequencies.
    pub fn normalize(&self) -> Result<Table2> {
        let total = self.grand_total();
        if total <= 0.0 {
            return Err(Error::EmptyTable);
        }
        Ok(Table2 {
            cells: self.cells.map(|c| c / total),
            kind: TableKind::Probabilities,
        })
    }

    /// Margins of the two variables as `[row_margin, column_margin]`,
    /// each `[level0, level1]`.
    pub fn margins(&self) -> [[f64; 2]; 2] {
        let c = &self.cells;
        [[c[0] + c[1], c[2] + c[3]], [c[0] + c[2], c[1] + c[3]]]
    }

    /// Cross-product ratio `n00·n11 / (n01·n10)`.
    ///
    /// Scale-invariant, so counts and relative frequencies give the same
    /// value. Fails on any zero cell.
    pub fn odds_ratio(&self) -> Result<f64> {
        if self.cells.iter().any(|&c| c <= 0.0) {
            return Err(Error::ZeroCell);
        }
        let c = &self.cells;
        Ok((c[0] * c[3]) / (c[1] * c[2]))
    }
}

/// A 2×2×2 contingency table over variables `(X1, X2, X3)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table3 {
    cells: [f64; 8],
    kind: TableKind,
    labels: Option<[AxisLabel; 3]>,
}

impl Table3 {
    /// Builds a counts table from the flat row-major cell array.
    pub fn from_counts(cells: [f64; 8]) -> Result<Self> {
        validate_cells(&cells)?;
        Ok(Table3 {
            cells,
            kind: TableKind::Counts,
            labels: None,
        })
    }

    /// Builds a probability table; the cells must sum to 1.
    pub fn from_probabilities(cells: [f64; 8]) -> Result<Self> {
        validate_cells(&cells)?;
        validate_probability_sum(&cells)?;
        Ok(Table3 {
            cells,
            kind: TableKind::Probabilities,
            labels: None,
        })
    }

    pub(crate) fn from_raw(
        cells: [f64; 8],
        kind: TableKind,
        labels: Option<[AxisLabel; 3]>,
    ) -> Self {
        Table3 {
            cells,
            kind,
            labels,
        }
    }

    pub fn with_labels(mut self, labels: [AxisLabel; 3]) -> Self {
        self.labels = Some(labels);
        self
    }

    pub fn labels(&self) -> Option<&[AxisLabel; 3]> {
        self.labels.as_ref()
    }

    pub fn cells(&self) -> &[f64; 8] {
        &self.cells
    }

    pub fn cell(&self, i: usize, j: usize, k: usize) -> f64 {
        self.cells[4 * i + 2 * j + k]
    }

    pub fn kind(&self) -> TableKind {
        self.kind
    }

    pub fn grand_total(&self) -> f64 {
        self.cells.iter().sum()
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.cells.iter().all(|&c| c > 0.0)
    }

    /// Divides every cell by the grand total, turning the table into
    /// relative frequencies. Axis labels are preserved.
    pub fn normalize(&self) -> Result<Table3> {
        let total = self.grand_total();
        if total <= 0.0 {
            return Err(Error::EmptyTable);
        }
        Ok(Table3 {
            cells: self.cells.map(|c| c / total),
            kind: TableKind::Probabilities,
            labels: self.labels.clone(),
        })
    }

    /// One-dimensional margin of `axis` as `[level0, level1]`.
    pub fn margin(&self, axis: Axis) -> [f64; 2] {
        let mut m = [0.0; 2];
        for (flat, &c) in self.cells.iter().enumerate() {
            m[axis.level_in(flat)] += c;
        }
        m
    }

    /// The three one-dimensional margins, in `X1, X2, X3` order.
    pub fn margins_1d(&self) -> [[f64; 2]; 3] {
        Axis::ALL.map(|axis| self.margin(axis))
    }

    /// Three-way odds ratio
    /// `p000·p011·p101·p110 / (p001·p010·p100·p111)`.
    ///
    /// Scale-invariant. Fails on any zero cell.
    pub fn odds_ratio_3d(&self) -> Result<f64> {
        if !self.is_strictly_positive() {
            return Err(Error::ZeroCell);
        }
        let c = &self.cells;
        Ok((c[0] * c[3] * c[5] * c[6]) / (c[1] * c[2] * c[4] * c[7]))
    }

    /// The 2×2 sub-table of the paired variables obtained by fixing the
    /// conditioning variable at `level`.
    ///
    /// The result is returned as a counts table regardless of the parent
    /// kind, since a slice of a probability table no longer sums to 1.
    pub fn sub_table(&self, pair: Pair, level: usize) -> Table2 {
        assert!(level < 2, "level must be 0 or 1");
        let (row, col) = pair.axes();
        let cond = pair.conditioning_axis();
        let mut cells = [0.0; 4];
        for r in 0..2 {
            for c in 0..2 {
                let mut ijk = [0usize; 3];
                ijk[row.index()] = r;
                ijk[col.index()] = c;
                ijk[cond.index()] = level;
                cells[2 * r + c] = self.cell(ijk[0], ijk[1], ijk[2]);
            }
        }
        Table2::from_raw(cells, TableKind::Counts)
    }

    /// Conditional odds ratio ω_{ij|a}: the 2×2 odds ratio of the paired
    /// variables within the sub-table where the third variable is fixed
    /// at `level`.
    pub fn conditional_odds_ratio(&self, pair: Pair, level: usize) -> Result<f64> {
        self.sub_table(pair, level).odds_ratio()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const YULE: [f64; 4] = [274.0, 278.0, 200.0, 3951.0];
    // Clinical-trial counts in (response, treatment, clinic) axis order,
    // level 0 = (failure, A, clinic 1).
    const AGRESTI_FIXTURE: [f64; 8] = [12.0, 8.0, 8.0, 32.0, 18.0, 2.0, 12.0, 8.0];
    // The same data read straight off the printed grid (clinic slowest).
    const AGRESTI_READING: [f64; 8] = [18.0, 12.0, 12.0, 8.0, 2.0, 8.0, 8.0, 32.0];
    const FIENBERG_READING: [f64; 8] = [1.0, 4.0, 2.0, 6.0, 12.0, 1.0, 3.0, 1.0];

    #[test]
    fn normalize_yule_counts() {
        let t = Table2::from_counts(YULE).unwrap();
        let p = t.normalize().unwrap();
        assert_eq!(p.kind(), TableKind::Probabilities);
        let n = 4703.0;
        for (got, want) in p.cells().iter().zip(YULE.iter().map(|c| c / n)) {
            assert!((got - want).abs() < 1e-15);
        }
        // Two-decimal published frequencies.
        for (got, want) in p.cells().iter().zip([0.06, 0.06, 0.04, 0.84]) {
            assert!((got - want).abs() < 0.005);
        }
    }

    #[test]
    fn normalize_uniform_and_by_total() {
        let t = Table2::from_counts([1.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(*t.normalize().unwrap().cells(), [0.25; 4]);

        let t3 = Table3::from_counts(AGRESTI_READING).unwrap();
        assert_eq!(t3.grand_total(), 100.0);
        let p = t3.normalize().unwrap();
        for (got, want) in p.cells().iter().zip(AGRESTI_READING.iter()) {
            assert_eq!(*got, want / 100.0);
        }
    }

    #[test]
    fn normalize_rejects_all_zero() {
        let t = Table3::from_counts([0.0; 8]).unwrap();
        assert!(matches!(t.normalize(), Err(Error::EmptyTable)));
    }

    #[test]
    fn margins_uniform_table() {
        let t = Table3::from_probabilities([0.125; 8]).unwrap();
        for m in t.margins_1d() {
            assert_eq!(m, [0.5, 0.5]);
        }
    }

    #[test]
    fn margins_of_uniformized_solution() {
        let cells = [0.252, 0.103, 0.103, 0.042, 0.042, 0.103, 0.103, 0.252];
        let t = Table3::from_probabilities(cells).unwrap();
        for m in t.margins_1d() {
            assert!((m[0] - 0.5).abs() < 1e-12);
            assert!((m[1] - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn margins_clinical_trial_counts() {
        // Reading order: clinic is the first axis.
        let t = Table3::from_counts(AGRESTI_READING).unwrap();
        assert_eq!(t.margins_1d(), [[50.0, 50.0], [40.0, 60.0], [40.0, 60.0]]);
        // Fixture order: response first, level 0 = failure.
        let t = Table3::from_counts(AGRESTI_FIXTURE).unwrap();
        assert_eq!(t.margins_1d(), [[60.0, 40.0], [40.0, 60.0], [50.0, 50.0]]);
        for m in t.margins_1d() {
            assert_eq!(m[0] + m[1], t.grand_total());
        }
    }

    #[test]
    fn odds_ratio_yule() {
        let t = Table2::from_counts(YULE).unwrap();
        let or = t.odds_ratio().unwrap();
        assert!((or - 19.47).abs() < 0.005);
        // Counts and probabilities give the same value.
        let or_p = t.normalize().unwrap().odds_ratio().unwrap();
        assert!(crate::relative_difference(or, or_p) < 1e-12);
    }

    #[test]
    fn odds_ratio_trivial_cases() {
        let t = Table2::from_counts([1.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(t.odds_ratio().unwrap(), 1.0);
        // Clinic-1 sub-table of the clinical-trial data.
        let t = Table2::from_counts([18.0, 12.0, 12.0, 8.0]).unwrap();
        assert_eq!(t.odds_ratio().unwrap(), 1.0);
    }

    #[test]
    fn odds_ratio_rejects_zero_cell() {
        let t = Table2::from_counts([18.0, 0.0, 12.0, 8.0]).unwrap();
        assert!(matches!(t.odds_ratio(), Err(Error::ZeroCell)));
        let t3 = Table3::from_counts([1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(t3.odds_ratio_3d(), Err(Error::ZeroCell)));
    }

    #[test]
    fn odds_ratio_3d_values() {
        let t = Table3::from_counts(AGRESTI_FIXTURE).unwrap();
        assert!((t.odds_ratio_3d().unwrap() - 1.0).abs() < 1e-12);

        let t = Table3::from_probabilities([0.125; 8]).unwrap();
        assert_eq!(t.odds_ratio_3d().unwrap(), 1.0);

        let t = Table3::from_counts(FIENBERG_READING).unwrap();
        let w3 = t.odds_ratio_3d().unwrap();
        assert!((w3 - 0.1875).abs() < 1e-15);
        // Cross-check against the ratio of conditional odds ratios.
        let r = t.conditional_odds_ratio(Pair::X2X3, 0).unwrap()
            / t.conditional_odds_ratio(Pair::X2X3, 1).unwrap();
        assert!((w3 - 0.75 / 4.0).abs() < 1e-15);
        assert!(crate::relative_difference(w3, r) < 1e-12);
    }

    #[test]
    fn conditional_odds_ratio_values() {
        let t = Table3::from_counts(AGRESTI_FIXTURE).unwrap();
        assert!((t.conditional_odds_ratio(Pair::X2X3, 0).unwrap() - 6.0).abs() < 1e-12);
        let w13 = t.conditional_odds_ratio(Pair::X1X3, 0).unwrap();
        assert!((w13 - 0.167).abs() < 0.001);
        assert!((w13 - 1.0 / 6.0).abs() < 1e-15);
        assert!((t.conditional_odds_ratio(Pair::X1X2, 0).unwrap() - 1.0).abs() < 1e-12);

        let uniform = Table3::from_counts([3.0; 8]).unwrap();
        for pair in Pair::ALL {
            for level in 0..2 {
                assert_eq!(uniform.conditional_odds_ratio(pair, level).unwrap(), 1.0);
            }
        }
    }

    #[test]
    fn sub_table_orientation() {
        let cells: [f64; 8] = std::array::from_fn(|i| i as f64 + 1.0);
        let t = Table3::from_counts(cells).unwrap();
        // X2X3 at level 0 keeps the i = 0 slab in (j, k) order.
        assert_eq!(*t.sub_table(Pair::X2X3, 0).cells(), [1.0, 2.0, 3.0, 4.0]);
        assert_eq!(*t.sub_table(Pair::X2X3, 1).cells(), [5.0, 6.0, 7.0, 8.0]);
        // X1X3 at level 1 fixes j = 1.
        assert_eq!(*t.sub_table(Pair::X1X3, 1).cells(), [3.0, 4.0, 7.0, 8.0]);
        // X1X2 at level 0 fixes k = 0.
        assert_eq!(*t.sub_table(Pair::X1X2, 0).cells(), [1.0, 3.0, 5.0, 7.0]);
    }

    #[test]
    fn sub_table_zero_cell_is_rejected_by_odds_ratio() {
        let t = Table3::from_counts([1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(
            t.conditional_odds_ratio(Pair::X2X3, 0),
            Err(Error::ZeroCell)
        ));
        // The other slab is intact.
        assert!(t.conditional_odds_ratio(Pair::X2X3, 1).is_ok());
    }

    #[test]
    fn construction_validates_cells() {
        assert!(matches!(
            Table2::from_counts([1.0, -2.0, 3.0, 4.0]),
            Err(Error::NegativeCell { index: 1, .. })
        ));
        assert!(matches!(
            Table3::from_counts([1.0, f64::NAN, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]),
            Err(Error::NonFiniteCell { index: 1 })
        ));
        assert!(matches!(
            Table3::from_probabilities([0.2; 8]),
            Err(Error::ProbabilitySum { .. })
        ));
    }
}
