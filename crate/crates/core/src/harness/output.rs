use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::svg::{loglog_chart, scatter_plot, Series};
use super::ExperimentResult;
use crate::atoms::{read_atoms, write_atoms};
use crate::{Error, Result, RootSet};

pub const ROWS_CSV: &str = "rows.csv";
pub const SUMMARY_CSV: &str = "summary.csv";
pub const RESULT_JSON: &str = "result.json";
pub const SAMPLE_ZEROS: &str = "sample_zeros.pts";
pub const SAMPLE_CRITICAL: &str = "sample_critical.pts";

#[derive(Clone, Debug, Default, PartialEq)]
pub struct OutputFiles {
    pub written: Vec<PathBuf>,
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:e}")
    } else {
        String::new()
    }
}

pub(super) fn rows_csv(r: &ExperimentResult) -> String {
    let cols = r.columns();
    let mut out = String::from("n,trial,seed,status");
    for c in &cols {
        out.push(',');
        out.push_str(c);
    }
    out.push_str(",message\n");
    for row in &r.rows {
        write!(
            out,
            "{},{},{},{}",
            row.n,
            row.trial,
            row.seed.0,
            if row.ok { "ok" } else { "failed" }
        )
        .expect("writing to a String cannot fail");
        for c in &cols {
            out.push(',');
            out.push_str(&row.values.get(c).map_or(String::new(), |&v| num(v)));
        }
        out.push(',');
        out.push_str(&csv_field(&row.message));
        out.push('\n');
    }
    out
}

pub(super) fn summary_csv(r: &ExperimentResult) -> String {
    let mut out = String::from("n,column,count,q10,median,q90\n");
    for s in &r.summary {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            s.n,
            s.column,
            s.count,
            num(s.q10),
            num(s.median),
            num(s.q90)
        )
        .expect("writing to a String cannot fail");
    }
    out
}

fn write(dir: &Path, name: &str, text: &str, files: &mut OutputFiles) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, text)?;
    files.written.push(path);
    Ok(())
}

/// Writes rows, summary, probes and JSON into `dir`, plus SVG charts when the
/// spec asks for them.
pub fn write_outputs(r: &ExperimentResult, dir: &Path) -> Result<OutputFiles> {
    std::fs::create_dir_all(dir)?;
    let mut files = OutputFiles::default();
    write(dir, ROWS_CSV, &rows_csv(r), &mut files)?;
    write(dir, SUMMARY_CSV, &summary_csv(r), &mut files)?;
    for p in &r.probes {
        if let Some(res) = &p.result {
            let name = format!("probe_{}_{}.csv", p.kind.name(), p.label);
            write(dir, &name, &res.to_csv(), &mut files)?;
        }
    }
    let json = serde_json::to_string_pretty(r).map_err(|e| Error::Config(e.to_string()))?;
    write(dir, RESULT_JSON, &(json + "\n"), &mut files)?;
    if let Some((zeros, crit)) = &r.sample {
        write_atoms(&dir.join(SAMPLE_ZEROS), zeros, None)?;
        write_atoms(&dir.join(SAMPLE_CRITICAL), crit, None)?;
        files.written.push(dir.join(SAMPLE_ZEROS));
        files.written.push(dir.join(SAMPLE_CRITICAL));
    }
    if r.spec.plot {
        files.written.extend(write_plots(r, dir)?);
    }
    Ok(files)
}

/// Loads `result.json` and the sample atoms from a result directory.
pub fn read_result(dir: &Path) -> Result<ExperimentResult> {
    let path = dir.join(RESULT_JSON);
    let text = std::fs::read_to_string(&path)?;
    let mut r: ExperimentResult = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let (z, c) = (dir.join(SAMPLE_ZEROS), dir.join(SAMPLE_CRITICAL));
    if z.exists() && c.exists() {
        r.sample = Some((
            RootSet::new(read_atoms(&z)?.atoms),
            RootSet::new(read_atoms(&c)?.atoms),
        ));
    }
    Ok(r)
}

/// Scatter of the sample draw and one log-log chart per value column.
pub fn write_plots(r: &ExperimentResult, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    if let Some((zeros, crit)) = &r.sample {
        let n = r.spec.n_ladder.last().copied().unwrap_or(0);
        let path = dir.join("scatter.svg");
        std::fs::write(&path, scatter_plot(&format!("zeros and critical points, n = {n}"), zeros, crit))?;
        out.push(path);
    }
    for col in r.columns() {
        let s = r.summary_for(&col);
        let series = Series {
            label: "median".into(),
            points: s.iter().map(|s| (s.n as f64, s.median)).collect(),
            band: Some(s.iter().map(|s| (s.n as f64, s.q10, s.q90)).collect()),
        };
        let path = dir.join(format!("{col}.svg"));
        std::fs::write(&path, loglog_chart(&col, "n", &col, &[series]))?;
        out.push(path);
    }
    Ok(out)
}
