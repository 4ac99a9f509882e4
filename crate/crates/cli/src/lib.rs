//! Scenario-driven verification runs over the `convexa` library.
//!
//! A run resolves a [`Scenario`] into tasks (one suite on one fixture),
//! executes them on a worker pool and assembles ordered [`ReportRow`]s.

use std::cmp::Ordering;
use std::path::PathBuf;

use convexa::{IntegrationSpec, ReportRow, Verdict};
use rayon::prelude::*;
use serde::Serialize;

pub mod fixtures;
pub mod output;
pub mod scenario;
pub mod suites;

pub use output::{write_outputs, OutputPaths};
pub use scenario::{builtin, Scenario, SuiteEntry, BUILTIN_GROUPS};
pub use suites::{ProfilePoint, SuiteId, Task};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Unreadable or invalid scenario, or flags that do not resolve.
    #[error("scenario error: {0}")]
    Scenario(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("worker pool: {0}")]
    Pool(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        2
    }
}

/// Flag-level settings of a run; `None` leaves the scenario value alone.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub scenario: Option<PathBuf>,
    /// Suite ids, or built-in group names when no scenario is given.
    pub suites: Option<Vec<String>>,
    pub fixtures: Option<Vec<String>>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub lambda_grid: Option<Vec<f64>>,
    pub budget: Option<usize>,
    pub jobs: Option<usize>,
    pub timestamp: bool,
}

/// Catalog entry for `list`.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteInfo {
    pub id: &'static str,
    pub description: &'static str,
    pub fixtures: &'static str,
}

pub fn catalog() -> Vec<SuiteInfo> {
    SuiteId::ALL
        .iter()
        .map(|s| SuiteInfo {
            id: s.as_str(),
            description: s.description(),
            fixtures: s.fixture_class().as_str(),
        })
        .collect()
}

/// Suite entry after resolution, echoed in the JSON report.
#[derive(Debug, Clone, Serialize)]
pub struct PlannedEntry {
    pub suite: SuiteId,
    pub fixtures: Vec<String>,
    pub lambdas: Vec<f64>,
    pub p: Vec<f64>,
    pub maps: usize,
    pub integration: IntegrationSpec,
}

#[derive(Debug, Clone)]
pub struct Plan {
    pub source: String,
    pub seed: u64,
    pub integration: IntegrationSpec,
    pub entries: Vec<PlannedEntry>,
    pub tasks: Vec<Task>,
    pub output: OutputPaths,
}

/// Homogeneity maps per fixture when the entry does not say.
const DEFAULT_MAPS: usize = 2;

fn select_scenario(options: &RunOptions) -> Result<(Scenario, String), CliError> {
    if let Some(path) = &options.scenario {
        let mut s = Scenario::load(path)?;
        if let Some(names) = &options.suites {
            let mut keep = Vec::new();
            for name in names {
                keep.push(SuiteId::parse(name).ok_or_else(|| unknown_suite(name))?);
            }
            s.suites.retain(|e| keep.contains(&e.name));
        }
        return Ok((s, path.display().to_string()));
    }
    let full = builtin("full").expect("full scenario");
    let Some(names) = &options.suites else {
        return Ok((full, "builtin:full".into()));
    };
    let mut merged: Option<Scenario> = None;
    for name in names {
        let part = match builtin(name) {
            Some(s) if name != "full" => s,
            _ => {
                let id = SuiteId::parse(name).ok_or_else(|| unknown_suite(name))?;
                let mut s = full.clone();
                s.suites.retain(|e| e.name == id);
                s
            }
        };
        match merged.as_mut() {
            None => merged = Some(part),
            Some(m) => m.merge(part)?,
        }
    }
    let s = merged.ok_or_else(|| CliError::Scenario("--suite: no suite given".into()))?;
    Ok((s, format!("builtin:{}", names.join(","))))
}

fn unknown_suite(name: &str) -> CliError {
    let mut known: Vec<&str> = SuiteId::ALL.iter().map(|s| s.as_str()).collect();
    known.extend(BUILTIN_GROUPS.iter().map(|(g, _)| *g));
    CliError::Scenario(format!("--suite: unknown suite `{name}` (known: {})", known.join(", ")))
}

/// Resolves scenario, flags and fixtures into an ordered task list.
pub fn plan(options: &RunOptions) -> Result<Plan, CliError> {
    let (scenario, source) = select_scenario(options)?;
    let seed = options.seed.unwrap_or(scenario.seed);
    let mut base = scenario.integration.apply(IntegrationSpec::default()).with_seed(seed);
    if let Some(b) = options.budget {
        base.budget = b;
    }
    base.validate().map_err(|e| CliError::Scenario(format!("integration: {e}")))?;

    let mut entries = Vec::new();
    let mut tasks = Vec::new();
    for (i, entry) in scenario.suites.iter().enumerate() {
        let suite = entry.name;
        let mut spec = match &entry.integration {
            Some(o) => o.apply(base.clone()),
            None => base.clone(),
        };
        if let Some(b) = options.budget {
            spec.budget = b;
        }
        spec.validate().map_err(|e| CliError::Scenario(format!("suite[{i}].integration: {e}")))?;
        let class = suite.fixture_class();
        let mut ids: Vec<String> = match &entry.fixtures {
            Some(list) => list.clone(),
            None => scenario
                .fixtures
                .iter()
                .filter(|(_, f)| fixtures::class_of(f) == class)
                .map(|(id, _)| id.clone())
                .collect(),
        };
        if let Some(only) = &options.fixtures {
            ids.retain(|id| only.contains(id));
        }
        if ids.is_empty() {
            continue;
        }
        let lambdas = if suite.takes_lambdas() {
            options
                .lambda_grid
                .clone()
                .or_else(|| entry.lambdas.clone())
                .unwrap_or_else(|| suite.default_lambdas())
        } else {
            Vec::new()
        };
        let ps = entry.p.clone().unwrap_or_else(|| suite.default_ps());
        let maps = if suite == SuiteId::AsaDuality {
            entry.maps.unwrap_or(DEFAULT_MAPS)
        } else {
            0
        };
        for id in &ids {
            let fixture = fixtures::resolve(id, &scenario.fixtures, seed)?;
            if fixture.class() != class {
                return Err(CliError::Scenario(format!(
                    "suite[{i}].fixtures: `{id}` is a {}, suite `{suite}` needs a {}",
                    fixture.class().as_str(),
                    class.as_str()
                )));
            }
            tasks.push(Task {
                suite,
                fixture_id: id.clone(),
                fixture,
                lambdas: lambdas.clone(),
                ps: ps.clone(),
                maps,
                log_convexity: entry.log_convexity.unwrap_or(true),
                spec: spec.clone(),
            });
        }
        entries.push(PlannedEntry {
            suite,
            fixtures: ids,
            lambdas,
            p: ps,
            maps,
            integration: spec,
        });
    }
    let output = OutputPaths::resolve(options.out.as_deref(), &scenario.output);
    Ok(Plan {
        source,
        seed,
        integration: base,
        entries,
        tasks,
        output,
    })
}

#[derive(Debug, Clone, Default, Serialize, PartialEq, Eq)]
pub struct Summary {
    pub rows: usize,
    pub pass: usize,
    pub fail: usize,
    pub flagged: usize,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub plan: Plan,
    pub rows: Vec<ReportRow>,
    pub profiles: Vec<ProfilePoint>,
    pub notes: Vec<String>,
    pub summary: Summary,
    pub jobs: usize,
}

impl Report {
    /// 0 without fail rows, 1 otherwise; flagged rows do not count.
    pub fn exit_code(&self) -> i32 {
        i32::from(self.summary.fail > 0)
    }
}

fn cmp_opt(a: Option<f64>, b: Option<f64>) -> Ordering {
    match (a, b) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Less,
        (Some(_), None) => Ordering::Greater,
        (Some(x), Some(y)) => x.total_cmp(&y),
    }
}

/// `(suite, fixture, λ, p, s)`; the sort is stable, so ties keep task order.
fn row_order(a: &ReportRow, b: &ReportRow) -> Ordering {
    a.suite
        .cmp(&b.suite)
        .then_with(|| a.fixture.cmp(&b.fixture))
        .then_with(|| cmp_opt(a.lambda, b.lambda))
        .then_with(|| cmp_opt(a.p, b.p))
        .then_with(|| cmp_opt(a.s, b.s))
}

/// Runs all tasks on a pool of `jobs` workers (all cores when `None`).
pub fn execute(plan: Plan, jobs: Option<usize>) -> Result<Report, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Pool(e.to_string()))?;
    let jobs = pool.current_num_threads();
    let outputs: Vec<suites::TaskOutput> = pool.install(|| plan.tasks.par_iter().map(suites::run_task).collect());
    let mut rows = Vec::new();
    let mut profiles = Vec::new();
    let mut notes = Vec::new();
    for o in outputs {
        rows.extend(o.rows);
        profiles.extend(o.profile);
        notes.extend(o.notes);
    }
    rows.sort_by(row_order);
    profiles.sort_by(|a, b| {
        a.suite
            .cmp(&b.suite)
            .then_with(|| a.fixture.cmp(&b.fixture))
            .then_with(|| a.lambda.total_cmp(&b.lambda))
    });
    notes.sort();
    let mut summary = Summary {
        rows: rows.len(),
        ..Summary::default()
    };
    for r in &rows {
        match r.verdict {
            Verdict::Pass => summary.pass += 1,
            Verdict::Fail => summary.fail += 1,
            Verdict::Flagged => summary.flagged += 1,
        }
    }
    Ok(Report {
        plan,
        rows,
        profiles,
        notes,
        summary,
        jobs,
    })
}

/// Plans, executes and writes the report files.
pub fn run(options: &RunOptions) -> Result<Report, CliError> {
    let plan = plan(options)?;
    let report = execute(plan, options.jobs)?;
    write_outputs(&report, options.timestamp)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(suite: &str, fixture: &str, lambda: Option<f64>) -> ReportRow {
        ReportRow {
            suite: suite.into(),
            fixture: fixture.into(),
            lambda,
            p: None,
            s: None,
            lhs: 0.0,
            rhs: 0.0,
            margin: 0.0,
            error_budget: 0.0,
            verdict: Verdict::Pass,
        }
    }

    #[test]
    fn rows_sort_by_suite_fixture_then_parameters() {
        let mut rows = vec![
            row("b", "x", Some(0.5)),
            row("a", "y", None),
            row("b", "x", Some(0.25)),
            row("b", "x", None),
            row("a", "x", Some(1.0)),
        ];
        rows.sort_by(row_order);
        let keys: Vec<(String, String, Option<f64>)> =
            rows.into_iter().map(|r| (r.suite, r.fixture, r.lambda)).collect();
        assert_eq!(
            keys,
            vec![
                ("a".into(), "x".into(), Some(1.0)),
                ("a".into(), "y".into(), None),
                ("b".into(), "x".into(), None),
                ("b".into(), "x".into(), Some(0.25)),
                ("b".into(), "x".into(), Some(0.5)),
            ]
        );
    }

    #[test]
    fn catalog_lists_thirteen_suites() {
        let c = catalog();
        assert_eq!(c.len(), 13);
        assert_eq!(c[0].id, "legendre");
    }

    #[test]
    fn builtin_scenarios_resolve() {
        for name in ["full", "gaussian-smoke", "duality"] {
            let options = RunOptions {
                suites: (name != "full").then(|| vec![name.to_string()]),
                ..RunOptions::default()
            };
            let p = plan(&options).unwrap();
            assert!(!p.tasks.is_empty(), "{name}");
        }
    }

    #[test]
    fn full_scenario_covers_every_suite() {
        let p = plan(&RunOptions::default()).unwrap();
        for s in SuiteId::ALL {
            assert!(p.entries.iter().any(|e| e.suite == s), "{s}");
        }
    }

    #[test]
    fn unknown_suite_is_a_scenario_error() {
        let options = RunOptions {
            suites: Some(vec!["nope".into()]),
            ..RunOptions::default()
        };
        let err = plan(&options).unwrap_err();
        assert!(err.to_string().contains("nope") && err.exit_code() == 2);
    }

    #[test]
    fn lambda_grid_flag_overrides_entries() {
        let options = RunOptions {
            suites: Some(vec!["duality".into()]),
            lambda_grid: Some(vec![0.2, 0.4]),
            ..RunOptions::default()
        };
        let p = plan(&options).unwrap();
        assert!(p.tasks.iter().all(|t| t.lambdas == vec![0.2, 0.4]));
    }
}
