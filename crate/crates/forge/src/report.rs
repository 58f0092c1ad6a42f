//! Report files: CSV and markdown tables, σ matrices, the statement gallery
//! and Lean exports of proven gallery statements.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use forge_core::harness::{DatasetId, Metric, PairwiseMatrix, Report, TableRow};
use forge_core::prover::{export_lean, lean_file_name};
use forge_core::statements::parse;

use crate::error::{CliError, Result};
use crate::formats::{create_parent, write_json, write_text};

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    create_parent(path)?;
    csv::Writer::from_path(path).map_err(|e| CliError::Write { path: path.into(), source: e.into() })
}

fn csv_rows(path: &Path, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv_writer(path)?;
    let io = |e: csv::Error| CliError::Write { path: path.into(), source: e.into() };
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    w.flush().map_err(|source| CliError::Write { path: path.into(), source })
}

fn table_header() -> Vec<String> {
    let mut h: Vec<String> = ["dataset", "model", "unique_atomics", "total_statements", "episodes", "witnesses"]
        .into_iter()
        .map(String::from)
        .collect();
    for m in Metric::ALL {
        h.extend([m.name().to_string(), format!("{}_lo", m.name()), format!("{}_hi", m.name())]);
    }
    h
}

fn table_row(r: &TableRow) -> Vec<String> {
    let mut v = vec![
        r.dataset.to_string(),
        r.model.name().to_string(),
        r.unique_atomics.to_string(),
        r.total_statements.to_string(),
        r.episodes.to_string(),
        r.witnesses.to_string(),
    ];
    for m in Metric::ALL {
        let b = r.interval(m);
        v.extend([format!("{:.4}", b.point), format!("{:.4}", b.ci_low), format!("{:.4}", b.ci_high)]);
    }
    v
}

pub fn table_markdown(report: &Report) -> String {
    let mut s = String::from("| dataset | model | unique atomics | statements |");
    for m in Metric::ALL {
        let _ = write!(s, " {} |", m.name());
    }
    s.push_str(" witnesses |\n|---|---|---|---|");
    s.push_str(&"---|".repeat(Metric::ALL.len() + 1));
    s.push('\n');
    for r in &report.table {
        let _ = write!(s, "| {} | {} | {} | {} |", r.dataset, r.model.name(), r.unique_atomics, r.total_statements);
        for m in Metric::ALL {
            let b = r.interval(m);
            let _ = write!(s, " {:.2} [{:.2}, {:.2}] |", b.point, b.ci_low, b.ci_high);
        }
        let _ = writeln!(s, " {} |", r.witnesses);
    }
    s
}

fn matrix_markdown(m: &PairwiseMatrix, out: &mut String) {
    let _ = writeln!(out, "### {}: {}\n", m.title, m.metric.name());
    out.push_str("| row / col |");
    for l in &m.labels {
        let _ = write!(out, " {l} |");
    }
    out.push_str("\n|---|");
    out.push_str(&"---|".repeat(m.labels.len()));
    out.push('\n');
    for (label, row) in m.labels.iter().zip(&m.entries) {
        let _ = write!(out, "| {label} |");
        for p in row {
            let _ = write!(out, " {} / {} |", p.ratio, p.sigma);
        }
        out.push('\n');
    }
    out.push('\n');
}

fn matrix_rows(m: &PairwiseMatrix) -> impl Iterator<Item = Vec<String>> + '_ {
    m.labels.iter().zip(&m.entries).flat_map(move |(row, entries)| {
        m.labels.iter().zip(entries).map(move |(col, p)| {
            vec![
                m.title.clone(),
                m.metric.name().to_string(),
                row.clone(),
                col.clone(),
                p.ratio.to_string(),
                format!("{:.4}", p.sigma.value()),
                p.sigma.to_string(),
                format!("{:.6}", p.p_hat),
            ]
        })
    })
}

fn cell_dataset(label: &str) -> Result<DatasetId> {
    Ok(label.split('/').next().unwrap_or_default().parse()?)
}

/// Writes every report file under `dir` and returns their paths in order.
pub fn write_report(report: &Report, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let mut put = |name: &str| {
        let p = dir.join(name);
        written.push(p.clone());
        p
    };

    write_json(&put("report.json"), report)?;
    csv_rows(&put("table.csv"), &table_header(), report.table.iter().map(table_row))?;
    write_text(&put("table.md"), &table_markdown(report))?;

    let header: Vec<String> =
        ["title", "metric", "row", "col", "ratio", "sigma", "sigma_text", "p_hat"].into_iter().map(String::from).collect();
    let matrices: Vec<&PairwiseMatrix> = report.model_matrices.iter().chain(&report.dataset_matrices).collect();
    csv_rows(&put("matrices.csv"), &header, matrices.iter().flat_map(|m| matrix_rows(m)))?;
    let mut md = String::new();
    for m in &matrices {
        matrix_markdown(m, &mut md);
    }
    write_text(&put("matrices.md"), &md)?;

    let header: Vec<String> = [
        "cell", "episode", "t", "statement", "has_chi", "has_b0", "has_b1", "has_b2", "rho", "proved", "checks_passed",
        "witness",
    ]
    .into_iter()
    .map(String::from)
    .collect();
    let rows = report.gallery.iter().map(|g| {
        let (e, f) = (&g.entry, &g.entry.flags);
        vec![
            g.cell.clone(),
            e.episode.to_string(),
            e.t.to_string(),
            e.statement.clone(),
            f.has_chi.to_string(),
            f.has_b0.to_string(),
            f.has_b1.to_string(),
            f.has_b2.to_string(),
            format!("{:.4}", e.rho),
            e.proved.to_string(),
            e.checks_passed.to_string(),
            e.is_witness().to_string(),
        ]
    });
    csv_rows(&put("gallery.csv"), &header, rows)?;
    let mut md = String::from("| cell | statement | concepts | rho | proved | checks |\n|---|---|---|---|---|---|\n");
    for g in &report.gallery {
        let f = &g.entry.flags;
        let concepts: Vec<&str> = [(f.has_chi, "χ"), (f.has_b0, "b0"), (f.has_b1, "b1"), (f.has_b2, "b2")]
            .into_iter()
            .filter_map(|(on, n)| on.then_some(n))
            .collect();
        let _ = writeln!(
            md,
            "| {} | `{}` | {} | {:.2} | {} | {} |",
            g.cell,
            g.entry.statement,
            concepts.join(", "),
            g.entry.rho,
            g.entry.proved,
            g.entry.checks_passed
        );
    }
    write_text(&put("gallery.md"), &md)?;

    let mut lean = std::collections::BTreeMap::new();
    for g in report.gallery.iter().filter(|g| g.entry.proved) {
        let premises = cell_dataset(&g.cell)?.premises();
        let s = parse(&g.entry.statement)?;
        lean.insert(lean_file_name(&s, &premises), export_lean(&s, &premises));
    }
    for (name, text) in lean {
        write_text(&put(&name), &text)?;
    }
    Ok(written)
}
