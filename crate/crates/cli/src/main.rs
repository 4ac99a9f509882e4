use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use convexa_cli::{catalog, output, run, RunOptions, BUILTIN_GROUPS};

#[derive(Parser)]
#[command(name = "convexa", version, about = "Numerical checks of affine surface area dualities and inequalities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites and write report.csv, report.json and profile data.
    Run(RunArgs),
    /// List the available suites.
    List {
        /// Machine-readable catalog.
        #[arg(long)]
        json: bool,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    /// Scenario file (TOML); the built-in scenario when absent.
    #[arg(long, value_name = "PATH")]
    scenario: Option<PathBuf>,
    /// Suites to run, comma separated.
    #[arg(long, value_name = "NAME[,NAME...]", value_delimiter = ',')]
    suite: Option<Vec<String>>,
    /// Restrict every suite to these fixture ids.
    #[arg(long, value_name = "ID[,ID...]", value_delimiter = ',')]
    fixture: Option<Vec<String>>,
    /// Global seed, overriding the scenario.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// `k` evenly spaced values from `a` to `b`.
    #[arg(long, value_name = "a:b:k", value_parser = parse_grid)]
    lambda_grid: Option<Grid>,
    /// Integration budget for every suite.
    #[arg(long, value_name = "N")]
    budget: Option<usize>,
    /// Print the JSON report to stdout.
    #[arg(long)]
    json: bool,
    /// Leave the timestamp out of the reports.
    #[arg(long)]
    no_timestamp: bool,
    /// Worker threads; all cores by default.
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
}

/// Parsed `a:b:k`; a newtype so clap keeps it a single value.
#[derive(Debug, Clone)]
struct Grid(Vec<f64>);

fn parse_grid(text: &str) -> Result<Grid, String> {
    grid_points(text).map(Grid)
}

fn grid_points(text: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let [a, b, k] = parts.as_slice() else {
        return Err(format!("expected a:b:k, got `{text}`"));
    };
    let a: f64 = a.parse().map_err(|e| format!("start `{a}`: {e}"))?;
    let b: f64 = b.parse().map_err(|e| format!("end `{b}`: {e}"))?;
    let k: usize = k.parse().map_err(|e| format!("count `{k}`: {e}"))?;
    if !(a.is_finite() && b.is_finite()) || k == 0 {
        return Err("grid needs finite ends and at least one point".into());
    }
    if k == 1 {
        return Ok(vec![a]);
    }
    // Round to 12 digits so 0.1:0.9:9 gives 0.3, not 0.30000000000000004.
    Ok((0..k)
        .map(|i| {
            let v = a + (b - a) * i as f64 / (k - 1) as f64;
            (v * 1e12).round() / 1e12
        })
        .collect())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List { json } => {
            let cat = catalog();
            if json {
                println!("{}", serde_json::to_string_pretty(&cat).expect("catalog serializes"));
            } else {
                for s in &cat {
                    println!("{:<18} {}", s.id, s.description);
                }
                println!();
                for (g, d) in BUILTIN_GROUPS {
                    println!("{g:<18} (group) {d}");
                }
            }
            ExitCode::SUCCESS
        }
        Command::Run(args) => {
            let options = RunOptions {
                scenario: args.scenario,
                suites: args.suite,
                fixtures: args.fixture,
                seed: args.seed,
                out: args.out,
                lambda_grid: args.lambda_grid.map(|g| g.0),
                budget: args.budget,
                jobs: args.jobs,
                timestamp: !args.no_timestamp,
            };
            match run(&options) {
                Ok(report) => {
                    if args.json {
                        print!("{}", output::json_text(&report, None));
                    } else {
                        for n in &report.notes {
                            eprintln!("note: {n}");
                        }
                        let s = &report.summary;
                        println!(
                            "{} rows: {} pass, {} fail, {} flagged; reports in {}",
                            s.rows,
                            s.pass,
                            s.fail,
                            s.flagged,
                            report.plan.output.dir.display()
                        );
                    }
                    ExitCode::from(report.exit_code() as u8)
                }
                Err(e) => {
                    eprintln!("convexa: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::grid_points;

    #[test]
    fn grid_is_inclusive_and_rounded() {
        let g = grid_points("0.1:0.9:9").unwrap();
        assert_eq!(g, vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]);
        assert_eq!(grid_points("0.5:2:1").unwrap(), vec![0.5]);
        assert!(grid_points("0:1").is_err());
        assert!(grid_points("0:1:0").is_err());
    }
}
