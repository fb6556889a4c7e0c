//! On-disk table format: a self-describing JSON document, with flat CSV
//! (`i,j[,k],value`) accepted for spreadsheet interop.
//!
//! Cells are stored in row-major order with the first axis slowest, the
//! same convention as the core table types. Saving and re-loading a
//! document reproduces the cells bit-exactly.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use unimargin_core::{AxisLabel, Table2, Table3};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocumentKind {
    Counts,
    Probabilities,
}

impl DocumentKind {
    pub fn name(self) -> &'static str {
        match self {
            DocumentKind::Counts => "counts",
            DocumentKind::Probabilities => "probabilities",
        }
    }
}

/// A 2×2 or 2×2×2 table together with its axis and level names.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableDocument {
    pub dims: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis_labels: Option<Vec<String>>,
    /// Per axis, the two level names with level 0 first.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level_labels: Option<Vec<[String; 2]>>,
    pub cells: Vec<f64>,
    pub kind: DocumentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

impl TableDocument {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.dims != 2 && self.dims != 3 {
            return Err(CliError::validation(format!(
                "dims must be 2 or 3, found {}",
                self.dims
            )));
        }
        let expected = 1usize << self.dims;
        if self.cells.len() != expected {
            return Err(CliError::validation(format!(
                "expected {expected} cells, found {}",
                self.cells.len()
            )));
        }
        if let Some(labels) = &self.axis_labels {
            if labels.len() != self.dims as usize {
                return Err(CliError::validation(format!(
                    "axis_labels has {} entries, expected {}",
                    labels.len(),
                    self.dims
                )));
            }
        }
        if let Some(levels) = &self.level_labels {
            if levels.len() != self.dims as usize {
                return Err(CliError::validation(format!(
                    "level_labels has {} entries, expected {}",
                    levels.len(),
                    self.dims
                )));
            }
        }
        // Cell validation (non-negative, finite, probability sum) is done by
        // the core table constructors.
        match self.dims {
            2 => self.to_table2().map(|_| ()),
            _ => self.to_table3().map(|_| ()),
        }
    }

    pub fn axis_name(&self, axis: usize) -> String {
        self.axis_labels
            .as_ref()
            .and_then(|l| l.get(axis).cloned())
            .unwrap_or_else(|| format!("x{}", axis + 1))
    }

    pub fn level_name(&self, axis: usize, level: usize) -> String {
        self.level_labels
            .as_ref()
            .and_then(|l| l.get(axis))
            .map(|pair| pair[level].clone())
            .unwrap_or_else(|| level.to_string())
    }

    pub fn to_table2(&self) -> Result<Table2, CliError> {
        let cells: [f64; 4] = self
            .cells
            .clone()
            .try_into()
            .map_err(|_| CliError::validation("expected 4 cells"))?;
        let table = match self.kind {
            DocumentKind::Counts => Table2::from_counts(cells)?,
            DocumentKind::Probabilities => Table2::from_probabilities(cells)?,
        };
        Ok(table)
    }

    pub fn to_table3(&self) -> Result<Table3, CliError> {
        let cells: [f64; 8] = self
            .cells
            .clone()
            .try_into()
            .map_err(|_| CliError::validation("expected 8 cells"))?;
        let table = match self.kind {
            DocumentKind::Counts => Table3::from_counts(cells)?,
            DocumentKind::Probabilities => Table3::from_probabilities(cells)?,
        };
        Ok(table.with_labels(self.core_labels3()))
    }

    fn core_labels3(&self) -> [AxisLabel; 3] {
        std::array::from_fn(|axis| AxisLabel {
            name: self.axis_name(axis),
            levels: [self.level_name(axis, 0), self.level_name(axis, 1)],
        })
    }

    /// A document with the same shape and labels but new (probability) cells.
    pub fn with_probability_cells(&self, cells: Vec<f64>, description: String) -> TableDocument {
        TableDocument {
            dims: self.dims,
            axis_labels: self.axis_labels.clone(),
            level_labels: self.level_labels.clone(),
            cells,
            kind: DocumentKind::Probabilities,
            description: Some(description),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Auto,
    Json,
    Csv,
}

pub fn load_table(path: &Path, format: Format) -> Result<TableDocument, CliError> {
    let format = match format {
        Format::Auto => match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Format::Json,
            Some("csv") => Format::Csv,
            other => {
                return Err(CliError::validation(format!(
                    "{}: cannot infer format from extension {:?}; pass --format json|csv",
                    path.display(),
                    other.unwrap_or("")
                )))
            }
        },
        other => other,
    };
    let doc = match format {
        Format::Json => load_json(path)?,
        Format::Csv => load_csv(path)?,
        Format::Auto => unreachable!(),
    };
    doc.validate()?;
    Ok(doc)
}

fn load_json(path: &Path) -> Result<TableDocument, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
}

fn load_csv(path: &Path) -> Result<TableDocument, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?
        .iter()
        .map(|h| h.to_ascii_lowercase())
        .collect();
    let dims = match headers
        .iter()
        .map(String::as_str)
        .collect::<Vec<_>>()
        .as_slice()
    {
        ["i", "j", "value"] => 2u8,
        ["i", "j", "k", "value"] => 3u8,
        other => {
            return Err(CliError::validation(format!(
                "{}: expected header i,j,value or i,j,k,value, found {}",
                path.display(),
                other.join(",")
            )))
        }
    };
    let n_cells = 1usize << dims;
    let mut cells: Vec<Option<f64>> = vec![None; n_cells];
    for record in reader.records() {
        let record = record.map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
        let line = record
            .position()
            .map(|p| p.line().to_string())
            .unwrap_or_else(|| "?".into());
        if record.len() != dims as usize + 1 {
            return Err(CliError::validation(format!(
                "{}: line {line}: expected {} fields, found {}",
                path.display(),
                dims + 1,
                record.len()
            )));
        }
        let mut flat = 0usize;
        for axis in 0..dims as usize {
            let field = &record[axis];
            let level: usize = field.parse().ok().filter(|&v| v < 2).ok_or_else(|| {
                CliError::validation(format!(
                    "{}: line {line}: index field {:?} must be 0 or 1",
                    path.display(),
                    field
                ))
            })?;
            flat = flat * 2 + level;
        }
        let value: f64 = record[dims as usize].parse().map_err(|_| {
            CliError::validation(format!(
                "{}: line {line}: value field {:?} is not a number",
                path.display(),
                &record[dims as usize]
            ))
        })?;
        if cells[flat].is_some() {
            return Err(CliError::validation(format!(
                "{}: line {line}: duplicate cell index",
                path.display()
            )));
        }
        cells[flat] = Some(value);
    }
    let found = cells.iter().filter(|c| c.is_some()).count();
    if found != n_cells {
        return Err(CliError::validation(format!(
            "{}: expected {n_cells} cells, found {found}",
            path.display()
        )));
    }
    Ok(TableDocument {
        dims,
        axis_labels: None,
        level_labels: None,
        cells: cells.into_iter().map(Option::unwrap).collect(),
        kind: DocumentKind::Counts,
        description: None,
    })
}

/// Serializes the document as pretty JSON and writes it atomically
/// (temporary file in the same directory, then rename).
pub fn save_table(doc: &TableDocument, path: &Path) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(doc)
        .map_err(|e| CliError::validation(format!("serialize: {e}")))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let file_name = path
        .file_name()
        .ok_or_else(|| CliError::validation(format!("{}: not a file path", path.display())))?;
    let mut tmp_name = file_name.to_os_string();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    {
        let mut file = fs::File::create(&tmp)
            .map_err(|e| CliError::validation(format!("{}: {e}", tmp.display())))?;
        file.write_all(bytes)
            .map_err(|e| CliError::validation(format!("{}: {e}", tmp.display())))?;
        file.sync_all()
            .map_err(|e| CliError::validation(format!("{}: {e}", tmp.display())))?;
    }
    fs::rename(&tmp, path).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
    Ok(())
}
