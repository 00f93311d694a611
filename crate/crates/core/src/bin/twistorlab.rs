use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use twistorlab::cli::{exit_code, list_catalog, resolve_target, run_suite, RunConfig, Suite};

#[derive(Parser)]
#[command(
    name = "twistorlab",
    version,
    about = "Numerical verification suites for twistor constructions on tangent bundles"
)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites and print one JSON report per check.
    Verify {
        /// adapted, twistor, nahm, metric or all.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Catalog entry (see `list`), or the report name for --spec.
        #[arg(long)]
        example: Option<String>,
        /// Manifold spec as JSON.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Jet order for parallel fields.
        #[arg(long)]
        order: Option<usize>,
        /// RK4 steps for geodesic flows.
        #[arg(long)]
        steps: Option<usize>,
        /// RK4 steps for Nahm frames.
        #[arg(long)]
        frame_steps: Option<usize>,
        /// Tube radius override.
        #[arg(long)]
        tube: Option<f64>,
        /// Multiplier applied to every tolerance.
        #[arg(long, default_value_t = 1.0)]
        tol_scale: f64,
        /// Also write the reports to this file.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// List the built-in examples.
    List {
        /// Emit JSON lines instead of a table.
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match args.command {
        Command::List { json } => {
            for entry in list_catalog() {
                if json {
                    println!("{}", serde_json::to_string(&entry).expect("listing serializes"));
                } else {
                    let sig = entry
                        .flags
                        .signature
                        .map(|(p, q)| format!("({}, {})", p, q))
                        .unwrap_or_else(|| "-".into());
                    println!(
                        "{:<20} n={}  flat={:<5}  metric={:<5}  signature={:<7} {}",
                        entry.name, entry.dim, entry.flags.flat, entry.flags.has_metric, sig, entry.description
                    );
                }
            }
            ExitCode::SUCCESS
        }
        Command::Verify {
            suite,
            example,
            spec,
            order,
            steps,
            frame_steps,
            tube,
            tol_scale,
            report,
        } => {
            let defaults = RunConfig::default();
            let config = RunConfig {
                order: order.unwrap_or(defaults.order),
                steps: steps.unwrap_or(defaults.steps),
                frame_steps: frame_steps.unwrap_or(defaults.frame_steps),
                tube,
                tol_scale,
            };
            let outcome = Suite::parse(&suite)
                .and_then(|s| Ok((s, resolve_target(example.as_deref(), spec.as_deref())?)))
                .and_then(|(s, target)| run_suite(s, &target, &config));
            let reports = match outcome {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {}", e);
                    return ExitCode::from(2);
                }
            };
            let lines: Vec<String> = reports.iter().map(|r| r.to_json_line()).collect();
            for line in &lines {
                println!("{}", line);
            }
            if let Some(path) = report {
                let written = std::fs::File::create(&path).and_then(|mut f| {
                    for line in &lines {
                        writeln!(f, "{}", line)?;
                    }
                    Ok(())
                });
                if let Err(e) = written {
                    eprintln!("error: cannot write {}: {}", path.display(), e);
                    return ExitCode::from(2);
                }
            }
            ExitCode::from(exit_code(&reports) as u8)
        }
    }
}
