use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use blockade::model::ModelKind;
use blockade::recipes::{figure_recipe, scaling_sweep};
use blockade::sweep::{self, convergence_check, fit_slope, fit_slope_csv, format_value, run_sweep, Observable, SweepSpec};
use blockade::weakdrive::scaling_prediction;
use blockade::Result;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "blockade", version, about = "Photon blockade in mixed cavity output fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep described by a JSON config; CSV goes to --out, the config's
    /// `output`, or stdout.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every panel of a figure recipe into <out>/<fig>_<panel>.csv.
    Fig {
        name: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare strong-coupling scaling laws with the master equation along the optimal line.
    Scaling {
        model: ModelKind,
        #[arg(long)]
        min: f64,
        #[arg(long)]
        max: f64,
        #[arg(long)]
        points: usize,
        #[arg(long)]
        cutoff: Option<usize>,
    },
    /// Re-solve sampled grid points at cutoff + 1 and report the largest relative change.
    Check { config: PathBuf },
    /// Log-log least-squares slope between two CSV columns.
    Slope {
        csv: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let message = e.to_string();
            let first = message.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("{}", serde_json::json!({ "error": "usage", "message": first }));
            return ExitCode::from(2);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", serde_json::json!({ "error": e.kind(), "message": e.to_string() }));
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Sweep { config, out } => {
            let spec = SweepSpec::from_path(&config)?;
            let result = run_sweep(&spec)?;
            match out.or_else(|| spec.output.as_ref().map(PathBuf::from)) {
                Some(path) => {
                    result.save(&path)?;
                    summary(&path, &result)
                }
                None => result.write_csv(std::io::stdout().lock()),
            }
        }
        Command::Fig { name, out } => {
            let recipe = figure_recipe(&name)?;
            std::fs::create_dir_all(&out)?;
            for panel in &recipe.panels {
                let path = out.join(format!("{}_{}.csv", recipe.name, panel.name));
                let result = run_sweep(&panel.spec)?;
                result.save(&path)?;
                summary(&path, &result)?;
            }
            Ok(())
        }
        Command::Scaling { model, min, max, points, cutoff } => {
            let mut spec = scaling_sweep(model, min, max, points)?;
            if let Some(c) = cutoff {
                spec = spec.cutoff(c);
            }
            spec.outputs = vec![Observable::G2_1, Observable::G2Out];
            let result = run_sweep(&spec)?;
            let axis = &spec.axes[0].param;
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{axis},predicted_g2_out,predicted_g2_1,extrapolated,g2_out,g2_1,status")?;
            for row in &result.rows {
                let strength = row.params[0];
                let p = scaling_prediction(model, strength, 1.0)?;
                writeln!(
                    stdout,
                    "{},{},{},{},{},{},{}",
                    format_value(Some(strength)),
                    format_value(Some(p.g2_out)),
                    format_value(Some(p.g2_1)),
                    p.extrapolated,
                    format_value(row.value(Observable::G2Out)),
                    format_value(row.value(Observable::G2_1)),
                    row.status(&spec.outputs),
                )?;
            }
            let slope = |o| fit_slope(&result, axis, o).ok();
            eprintln!(
                "{}",
                serde_json::json!({
                    "cutoff": spec.cutoff,
                    "slope_g2_out": slope(Observable::G2Out),
                    "slope_g2_1": slope(Observable::G2_1),
                })
            );
            Ok(())
        }
        Command::Check { config } => {
            let report = convergence_check(&SweepSpec::from_path(&config)?)?;
            println!("{}", serde_json::to_string(&report)?);
            Ok(())
        }
        Command::Slope { csv, x, y } => {
            let fit = fit_slope_csv(&csv, &x, &y)?;
            println!("{}", serde_json::to_string(&fit)?);
            Ok(())
        }
    }
}

fn summary(path: &Path, result: &sweep::SweepResult) -> Result<()> {
    let m = &result.metadata;
    let line = serde_json::json!({
        "csv": path.display().to_string(),
        "metadata": sweep::metadata_path(path).display().to_string(),
        "rows": m.rows,
        "failed": m.failed,
        "undefined": m.undefined,
        "max_residual": m.max_residual,
        "wall_time_s": m.wall_time_s,
    });
    println!("{line}");
    Ok(())
}
