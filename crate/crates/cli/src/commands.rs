//! Subcommand implementations. Each returns the text to print on stdout;
//! human output uses three decimal places, JSON output keeps full
//! precision. All output is deterministic for identical invocations.

use std::path::Path;

use serde::Serialize;
use unimargin_core::{
    complete_table, sample_family, solve_ipf, solve_newton_from, symmetric_3d,
    uniform_sections_3d, uniformize_2d, verify_family_point, DependenceProfile3, Error as CoreError,
    FamilyPoint, Pair, RootBranch, SolverConfig, SolverReport, Table3,
};

use crate::document::{save_table, write_atomic, TableDocument};
use crate::error::CliError;
use crate::plot::{render_two_panel, PlotSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Method {
    Closed,
    Ipf,
    Newton,
    Sections,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Closed => "closed",
            Method::Ipf => "ipf",
            Method::Newton => "newton",
            Method::Sections => "sections",
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ProfileReport {
    pub omega3: f64,
    pub cond_12: [f64; 2],
    pub cond_13: [f64; 2],
    pub cond_23: [f64; 2],
}

impl ProfileReport {
    fn from_profile(profile: &DependenceProfile3) -> Self {
        let cond = |pair: Pair| [profile.conditional(pair, 0), profile.conditional(pair, 1)];
        ProfileReport {
            omega3: profile.omega3(),
            cond_12: cond(Pair::X1X2),
            cond_13: cond(Pair::X1X3),
            cond_23: cond(Pair::X2X3),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct InspectReport {
    pub dims: u8,
    pub kind: &'static str,
    pub grand_total: f64,
    pub cells: Vec<f64>,
    pub probabilities: Vec<f64>,
    /// Margins of the probability table, per axis.
    pub margins: Vec<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub odds_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<ProfileReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

const ZERO_CELL_NOTE: &str = "odds ratios undefined (zero cell)";

pub fn inspect_report(doc: &TableDocument) -> Result<InspectReport, CliError> {
    let mut report = match doc.dims {
        2 => {
            let table = doc.to_table2()?;
            let probabilities = table.normalize()?;
            let (odds_ratio, note) = match table.odds_ratio() {
                Ok(value) => (Some(value), None),
                Err(CoreError::ZeroCell) => (None, Some(ZERO_CELL_NOTE.to_string())),
                Err(err) => return Err(err.into()),
            };
            InspectReport {
                dims: 2,
                kind: doc.kind.name(),
                grand_total: table.grand_total(),
                cells: doc.cells.clone(),
                probabilities: probabilities.cells().to_vec(),
                margins: probabilities.margins().to_vec(),
                odds_ratio,
                profile: None,
                note,
            }
        }
        _ => {
            let table = doc.to_table3()?;
            let probabilities = table.normalize()?;
            let (profile, note) = match probabilities.dependence_profile() {
                Ok(profile) => (Some(ProfileReport::from_profile(&profile)), None),
                Err(CoreError::ZeroCell) => (None, Some(ZERO_CELL_NOTE.to_string())),
                Err(err) => return Err(err.into()),
            };
            InspectReport {
                dims: 3,
                kind: doc.kind.name(),
                grand_total: table.grand_total(),
                cells: doc.cells.clone(),
                probabilities: probabilities.cells().to_vec(),
                margins: probabilities.margins_1d().to_vec(),
                odds_ratio: None,
                profile,
                note,
            }
        }
    };
    // Present counts stored as probabilities consistently.
    if report.grand_total == 0.0 {
        report.probabilities.clear();
    }
    Ok(report)
}

fn axis_header(doc: &TableDocument) -> String {
    (0..doc.dims as usize)
        .map(|a| doc.axis_name(a))
        .collect::<Vec<_>>()
        .join(", ")
}

fn cell_label(doc: &TableDocument, flat: usize) -> String {
    let levels: Vec<String> = (0..doc.dims as usize)
        .map(|axis| {
            let shift = doc.dims as usize - 1 - axis;
            doc.level_name(axis, (flat >> shift) & 1)
        })
        .collect();
    format!("({})", levels.join(", "))
}

fn push_cell_lines(out: &mut String, doc: &TableDocument, cells: &[f64]) {
    for (flat, value) in cells.iter().enumerate() {
        out.push_str(&format!("  {} = {value:.3}\n", cell_label(doc, flat)));
    }
}

fn push_profile_lines(out: &mut String, before: &ProfileReport, after: Option<&ProfileReport>) {
    let rows = [
        ("omega3", [before.omega3, before.omega3]),
        ("omega_12", before.cond_12),
        ("omega_13", before.cond_13),
        ("omega_23", before.cond_23),
    ];
    let after_rows = after.map(|a| [[a.omega3, a.omega3], a.cond_12, a.cond_13, a.cond_23]);
    for (idx, (name, levels)) in rows.iter().enumerate() {
        if *name == "omega3" {
            match &after_rows {
                Some(a) => out.push_str(&format!("  omega3: {:.3} -> {:.3}\n", levels[0], a[idx][0])),
                None => out.push_str(&format!("  omega3 = {:.3}\n", levels[0])),
            }
            continue;
        }
        for level in 0..2 {
            match &after_rows {
                Some(a) => out.push_str(&format!(
                    "  {name}|{level}: {:.3} -> {:.3}\n",
                    levels[level], a[idx][level]
                )),
                None => out.push_str(&format!("  {name}|{level} = {:.3}\n", levels[level])),
            }
        }
    }
}

fn human_inspect(doc: &TableDocument, report: &InspectReport) -> String {
    let mut out = String::new();
    let shape = if report.dims == 2 { "2x2" } else { "2x2x2" };
    out.push_str(&format!(
        "{shape} table ({}), grand total {}\n",
        report.kind, report.grand_total
    ));
    out.push_str(&format!("cells as probabilities [{}]:\n", axis_header(doc)));
    push_cell_lines(&mut out, doc, &report.probabilities);
    out.push_str("margins:\n");
    for (axis, margin) in report.margins.iter().enumerate() {
        out.push_str(&format!(
            "  {}: {} = {:.3}, {} = {:.3}\n",
            doc.axis_name(axis),
            doc.level_name(axis, 0),
            margin[0],
            doc.level_name(axis, 1),
            margin[1]
        ));
    }
    match (&report.odds_ratio, &report.profile, &report.note) {
        (Some(value), _, _) => out.push_str(&format!("odds ratio = {value:.3}\n")),
        (_, Some(profile), _) => {
            out.push_str("dependence profile:\n");
            push_profile_lines(&mut out, profile, None);
        }
        (_, _, Some(note)) => out.push_str(&format!("dependence profile:\n  {note}\n")),
        _ => {}
    }
    out
}

pub fn cmd_inspect(doc: &TableDocument, json: bool) -> Result<String, CliError> {
    let report = inspect_report(doc)?;
    if json {
        let mut text = serde_json::to_string_pretty(&report)
            .map_err(|e| CliError::validation(format!("serialize: {e}")))?;
        text.push('\n');
        Ok(text)
    } else {
        Ok(human_inspect(doc, &report))
    }
}

fn solver_config(tol: Option<f64>, max_iter: Option<usize>) -> SolverConfig {
    let mut config = SolverConfig::default();
    if let Some(tol) = tol {
        config.margin_tolerance = tol;
        config.newton_tolerance = tol;
    }
    if let Some(max_iter) = max_iter {
        config.max_iterations = max_iter;
    }
    config
}

fn transformed_doc(doc: &TableDocument, cells: &[f64], method: Method) -> TableDocument {
    doc.with_probability_cells(
        cells.to_vec(),
        format!("uniform-margin transform ({})", method.name()),
    )
}

fn uniformize_2d_text(doc: &TableDocument, out_doc: &TableDocument, omega: f64) -> String {
    let mut text = String::from("method: closed\n");
    text.push_str(&format!("odds ratio: {omega:.3} (preserved)\n"));
    text.push_str(&format!(
        "transformed table (probabilities) [{}]:\n",
        axis_header(doc)
    ));
    push_cell_lines(&mut text, doc, &out_doc.cells);
    text
}

fn uniformize_3d_text(
    doc: &TableDocument,
    out_doc: &TableDocument,
    method: Method,
    report: Option<&SolverReport>,
    before: &DependenceProfile3,
    after: &DependenceProfile3,
) -> String {
    let mut text = format!("method: {}\n", method.name());
    if let Some(report) = report {
        text.push_str(&format!("iterations: {}\n", report.iterations));
        text.push_str(&format!("final residual: {:.3e}\n", report.final_residual));
    }
    text.push_str(&format!(
        "transformed table (probabilities) [{}]:\n",
        axis_header(doc)
    ));
    push_cell_lines(&mut text, doc, &out_doc.cells);
    text.push_str("dependence profile (before -> after):\n");
    push_profile_lines(
        &mut text,
        &ProfileReport::from_profile(before),
        Some(&ProfileReport::from_profile(after)),
    );
    text
}

pub fn cmd_uniformize(
    doc: &TableDocument,
    method: Method,
    tol: Option<f64>,
    max_iter: Option<usize>,
    out: Option<&Path>,
) -> Result<String, CliError> {
    let config = solver_config(tol, max_iter);
    let (out_doc, mut text) = match (doc.dims, method) {
        (2, Method::Closed) => {
            let omega = doc.to_table2()?.odds_ratio()?;
            let transform = uniformize_2d(omega)?;
            let cells = transform.to_table().cells().to_vec();
            let out_doc = transformed_doc(doc, &cells, method);
            let text = uniformize_2d_text(doc, &out_doc, omega);
            (out_doc, text)
        }
        (2, other) => {
            return Err(CliError::validation(format!(
                "method {} requires a 2x2x2 table",
                other.name()
            )))
        }
        (3, method) => {
            let table = doc.to_table3()?;
            let before = table.normalize()?.dependence_profile()?;
            let (solution, report): (Table3, Option<SolverReport>) = match method {
                Method::Closed => (symmetric_3d(before.omega3())?, None),
                Method::Sections => (uniform_sections_3d(before.omega3())?, None),
                Method::Ipf => {
                    let report = solve_ipf(&table, &config)?;
                    (report.solution.clone(), Some(report))
                }
                Method::Newton => {
                    let report = solve_newton_from(&before.targets(), &table, &config)?;
                    (report.solution.clone(), Some(report))
                }
            };
            let after = solution.dependence_profile()?;
            let out_doc = transformed_doc(doc, solution.cells(), method);
            let text =
                uniformize_3d_text(doc, &out_doc, method, report.as_ref(), &before, &after);
            (out_doc, text)
        }
        (dims, _) => {
            return Err(CliError::validation(format!(
                "dims must be 2 or 3, found {dims}"
            )))
        }
    };
    if let Some(path) = out {
        save_table(&out_doc, path)?;
        text.push_str(&format!("wrote {}\n", path.display()));
    }
    Ok(text)
}

#[derive(Debug, Serialize)]
struct ResidualReport {
    total: f64,
    margins: [f64; 3],
    omega_log: f64,
    max: f64,
}

#[derive(Debug, Serialize)]
struct FamilyPointReport {
    free: [f64; 3],
    omega: f64,
    branch: &'static str,
    cells: Vec<f64>,
    residuals: ResidualReport,
}

impl FamilyPointReport {
    fn from_point(point: &FamilyPoint) -> Self {
        let residuals = verify_family_point(point);
        FamilyPointReport {
            free: point.free,
            omega: point.omega,
            branch: match point.branch {
                RootBranch::Plus => "plus",
                RootBranch::Minus => "minus",
            },
            cells: point.table.cells().to_vec(),
            residuals: ResidualReport {
                total: residuals.total,
                margins: residuals.margins,
                omega_log: residuals.omega_log,
                max: residuals.max(),
            },
        }
    }
}

pub fn cmd_family(
    omega: f64,
    free: Option<&[f64]>,
    n: usize,
    seed: u64,
    out: Option<&Path>,
) -> Result<String, CliError> {
    let points = match free {
        Some(values) => {
            let free: [f64; 3] = values.try_into().map_err(|_| {
                CliError::validation(
                    "--free expects exactly three comma-separated values p000,p001,p010",
                )
            })?;
            complete_table(free, omega)?
        }
        None => {
            let points = sample_family(omega, n, seed)?;
            if points.len() < n {
                eprintln!(
                    "note: returned {} of {n} requested points (low acceptance)",
                    points.len()
                );
            }
            points
        }
    };
    let reports: Vec<FamilyPointReport> =
        points.iter().map(FamilyPointReport::from_point).collect();
    let mut text = serde_json::to_string_pretty(&reports)
        .map_err(|e| CliError::validation(format!("serialize: {e}")))?;
    text.push('\n');
    if let Some(path) = out {
        write_atomic(path, text.as_bytes())?;
    }
    Ok(text)
}

pub fn cmd_plot(
    before: &TableDocument,
    after: &TableDocument,
    out: &Path,
) -> Result<String, CliError> {
    let before_spec = PlotSpec::from_document(before, "Original data")?;
    let after_spec = PlotSpec::from_document(after, "Transformed data")?;
    let svg = render_two_panel(&before_spec, &after_spec);
    write_atomic(out, svg.as_bytes())?;
    Ok(format!("wrote {}\n", out.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::document::DocumentKind;

    fn doc3(cells: [f64; 8]) -> TableDocument {
        TableDocument {
            dims: 3,
            axis_labels: Some(vec!["a".into(), "b".into(), "c".into()]),
            level_labels: None,
            cells: cells.to_vec(),
            kind: DocumentKind::Counts,
            description: None,
        }
    }

    #[test]
    fn inspect_reports_zero_cell_note() {
        let report = inspect_report(&doc3([0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0])).unwrap();
        assert!(report.profile.is_none());
        assert_eq!(report.note.as_deref(), Some(ZERO_CELL_NOTE));
        let human = human_inspect(&doc3([0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]), &report);
        assert!(human.contains(ZERO_CELL_NOTE));
    }

    #[test]
    fn inspect_reports_profile() {
        let report = inspect_report(&doc3([12.0, 8.0, 8.0, 32.0, 18.0, 2.0, 12.0, 8.0])).unwrap();
        let profile = report.profile.expect("profile");
        assert!((profile.omega3 - 1.0).abs() < 1e-12);
        assert!((profile.cond_23[0] - 6.0).abs() < 1e-9);
        assert!((profile.cond_13[0] - 1.0 / 6.0).abs() < 1e-9);
    }

    #[test]
    fn uniformize_rejects_method_shape_mismatch() {
        let doc = TableDocument {
            dims: 2,
            axis_labels: None,
            level_labels: None,
            cells: vec![1.0, 2.0, 3.0, 4.0],
            kind: DocumentKind::Counts,
            description: None,
        };
        let err = cmd_uniformize(&doc, Method::Ipf, None, None, None).unwrap_err();
        assert_eq!(err.code, 2);
        assert!(err.message.contains("2x2x2"));
    }

    #[test]
    fn family_requires_three_free_values() {
        let err = cmd_family(1.0, Some(&[0.1, 0.2]), 5, 0, None).unwrap_err();
        assert_eq!(err.code, 2);
        assert!(err.message.contains("three"));
    }
}
