//! CSV, JSON and profile-data writers.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use convexa::{IntegrationSpec, ReportRow};
use serde::Serialize;

use crate::scenario::OutputSpec;
use crate::{CliError, PlannedEntry, Report, Summary};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputPaths {
    pub dir: PathBuf,
    pub csv: PathBuf,
    pub json: PathBuf,
    pub profiles: PathBuf,
}

impl OutputPaths {
    /// `--out` wins over the scenario directory, which wins over `./out`.
    pub fn resolve(flag: Option<&Path>, spec: &OutputSpec) -> Self {
        let dir = flag
            .map(Path::to_path_buf)
            .or_else(|| spec.dir.clone())
            .unwrap_or_else(|| PathBuf::from("out"));
        Self {
            csv: dir.join(spec.csv.as_deref().unwrap_or("report.csv")),
            json: dir.join(spec.json.as_deref().unwrap_or("report.json")),
            profiles: dir.join(spec.profiles.as_deref().unwrap_or("profiles")),
            dir,
        }
    }
}

#[derive(Serialize)]
struct Environment<'a> {
    tool: &'static str,
    version: &'static str,
    os: &'static str,
    arch: &'static str,
    jobs: usize,
    scenario: &'a str,
    seed: u64,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    generated_at_unix: Option<u64>,
    environment: Environment<'a>,
    integration: &'a IntegrationSpec,
    suites: &'a [PlannedEntry],
    summary: &'a Summary,
    rows: &'a [ReportRow],
    notes: &'a [String],
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

/// CSV text: an optional timestamp comment, then the rows in field order.
pub fn csv_text(rows: &[ReportRow], timestamp: Option<u64>) -> Result<String, CliError> {
    let mut buf = Vec::new();
    if let Some(t) = timestamp {
        writeln!(buf, "# generated_at_unix={t}")?;
    }
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        if rows.is_empty() {
            w.write_record(["suite", "fixture", "lambda", "p", "s", "lhs", "rhs", "margin", "error_budget", "verdict"])
                .map_err(csv_err)?;
        }
        for r in rows {
            w.serialize(r).map_err(csv_err)?;
        }
        w.flush()?;
    }
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Io(std::io::Error::other(e))
}

pub fn json_text(report: &Report, timestamp: Option<u64>) -> String {
    let doc = JsonReport {
        generated_at_unix: timestamp,
        environment: Environment {
            tool: "convexa",
            version: env!("CARGO_PKG_VERSION"),
            os: std::env::consts::OS,
            arch: std::env::consts::ARCH,
            jobs: report.jobs,
            scenario: &report.plan.source,
            seed: report.plan.seed,
        },
        integration: &report.plan.integration,
        suites: &report.plan.entries,
        summary: &report.summary,
        rows: &report.rows,
        notes: &report.notes,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
    s.push('\n');
    s
}

/// One gnuplot data file per suite: a block per fixture, blocks separated
/// by two blank lines so `index` selects a fixture.
pub fn profile_texts(report: &Report) -> Vec<(String, String)> {
    let mut files: Vec<(String, String)> = Vec::new();
    let mut last: Option<(String, String)> = None;
    for p in &report.profiles {
        let suite = p.suite.as_str().to_string();
        if files.last().is_none_or(|(s, _)| *s != suite) {
            files.push((suite.clone(), "# lambda log_as log_error\n".to_string()));
            last = None;
        }
        let text = &mut files.last_mut().expect("pushed above").1;
        let key = (suite, p.fixture.clone());
        if last.as_ref() != Some(&key) {
            if last.is_some() {
                text.push_str("\n\n");
            }
            let _ = writeln!(text, "# fixture {}", p.fixture);
            last = Some(key);
        }
        let _ = writeln!(text, "{} {} {}", p.lambda, p.log_value, p.log_error);
    }
    files
}

/// Writes `report.csv`, `report.json` and the profile files.
pub fn write_outputs(report: &Report, timestamp: bool) -> Result<(), CliError> {
    let paths = &report.plan.output;
    let stamp = timestamp.then(unix_now);
    fs::create_dir_all(&paths.dir)?;
    fs::write(&paths.csv, csv_text(&report.rows, stamp)?)?;
    fs::write(&paths.json, json_text(report, stamp))?;
    let profiles = profile_texts(report);
    if !profiles.is_empty() {
        fs::create_dir_all(&paths.profiles)?;
        for (suite, text) in profiles {
            fs::write(paths.profiles.join(format!("{suite}.dat")), text)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use convexa::Verdict;

    #[test]
    fn csv_columns_follow_the_row_fields() {
        let r = ReportRow {
            suite: "mccann".into(),
            fixture: "g".into(),
            lambda: Some(0.5),
            p: None,
            s: None,
            lhs: 1.0,
            rhs: 1.0,
            margin: -0.0,
            error_budget: 1e-10,
            verdict: Verdict::Flagged,
        };
        let text = csv_text(&[r], None).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("suite,fixture,lambda,p,s,lhs,rhs,margin,error_budget,verdict"));
        assert_eq!(lines.next(), Some("mccann,g,0.5,,,1.0,1.0,-0.0,1e-10,flagged"));
        let stamped = csv_text(&[], Some(7)).unwrap();
        assert!(stamped.starts_with("# generated_at_unix=7\nsuite,"));
    }

    #[test]
    fn output_paths_prefer_the_flag() {
        let spec = OutputSpec {
            dir: Some("from-scenario".into()),
            csv: Some("rows.csv".into()),
            ..OutputSpec::default()
        };
        let p = OutputPaths::resolve(Some(Path::new("flag")), &spec);
        assert_eq!(p.csv, PathBuf::from("flag/rows.csv"));
        assert_eq!(p.json, PathBuf::from("flag/report.json"));
        let p = OutputPaths::resolve(None, &spec);
        assert_eq!(p.dir, PathBuf::from("from-scenario"));
    }
}
