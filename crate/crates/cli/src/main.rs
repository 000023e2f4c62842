use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use moutard_cli::config::parse_singular;
use moutard_cli::examples::{list_examples, make_example};
use moutard_cli::{run, CliError, LoadedConfig, RunOptions};
use moutard_core::field::io;
use moutard_core::verify::{residual_scaled, EquationId, ResidualInputs, ResidualReport};
use moutard_core::Mask;

#[derive(Parser)]
#[command(name = "moutard", version, about = "Moutard-type transforms of conductivity equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a pipeline config.
    Run {
        config: PathBuf,
        /// Verify the outputs of an earlier run without recomputing them.
        #[arg(long)]
        check_only: bool,
        #[arg(long)]
        tolerance_scale: Option<f64>,
        /// `reject`, `mask` or `mask:<threshold>`.
        #[arg(long)]
        singular_mode: Option<String>,
        #[arg(long)]
        max_depth: Option<usize>,
        /// Threads for verification reports.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Evaluate one residual on field files given in the equation's input order.
    Verify {
        fields: Vec<PathBuf>,
        #[arg(long)]
        eq: EquationId,
        #[arg(long)]
        tolerance_scale: Option<f64>,
    },
    /// Print the config of a named example.
    Example {
        #[arg(required_unless_present = "list")]
        name: Option<String>,
        /// `key=value`, repeatable.
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<(String, String)>,
        /// Write the config here instead of standard output.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        list: bool,
    },
}

fn parse_param(s: &str) -> Result<(String, String), String> {
    s.split_once('=').map(|(k, v)| (k.to_string(), v.to_string())).ok_or_else(|| format!("{s:?} is not key=value"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// `Ok(false)` means a verification failed.
fn dispatch(command: Command) -> Result<bool, CliError> {
    match command {
        Command::Run { config, check_only, tolerance_scale, singular_mode, max_depth, jobs } => {
            let loaded = LoadedConfig::load(&config)?;
            let singular = singular_mode.as_deref().map(parse_singular).transpose()?;
            let opts = RunOptions { tolerance_scale, singular, max_depth, jobs, check_only };
            let outcome = run(&loaded, &opts)?;
            for (entry, r) in outcome.manifest.reports.iter().zip(&outcome.reports) {
                println!(
                    "{} {}  max {:.3e}  tol {:.3e}",
                    if r.pass { "PASS" } else { "FAIL" },
                    entry.file,
                    r.norm_max,
                    r.tolerance
                );
            }
            if !outcome.pass() {
                eprintln!("verification failed:");
                for path in outcome.failures() {
                    eprintln!("  {}", path.display());
                }
            }
            Ok(outcome.pass())
        }
        Command::Verify { fields, eq, tolerance_scale } => {
            let report = verify_files(eq, &fields, tolerance_scale.unwrap_or(1.0))?;
            println!("{}", serde_json::to_string_pretty(&report).expect("reports serialize"));
            Ok(report.pass)
        }
        Command::Example { name, params, output, list } => {
            if list {
                for info in list_examples() {
                    let params: Vec<String> = info.params.iter().map(|(k, d)| format!("{k}={d}")).collect();
                    println!("{:<12} {}\n{:<12} params: {} (and n, output)", info.name, info.summary, "", params.join(" "));
                }
                return Ok(true);
            }
            let params: BTreeMap<String, String> = params.into_iter().collect();
            let config = make_example(name.as_deref().expect("clap requires a name"), &params)?;
            let text = serde_json::to_string_pretty(&config).expect("configs serialize") + "\n";
            match output {
                Some(path) => std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?,
                None => print!("{text}"),
            }
            Ok(true)
        }
    }
}

fn verify_files(eq: EquationId, paths: &[PathBuf], tolerance_scale: f64) -> Result<ResidualReport, CliError> {
    let names = eq.signature();
    if paths.len() != names.len() {
        return Err(CliError::Config(format!("{eq} takes {} fields: {}", names.len(), names.join(", "))));
    }
    let mut inputs = ResidualInputs::default();
    for (name, path) in names.iter().zip(paths) {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let field = io::read(&text).map_err(|e| CliError::core(path.display().to_string(), e))?;
        let real = |f: io::AnyField| f.into_real().map_err(|e| CliError::core(format!("{name} ({})", path.display()), e));
        match *name {
            "sigma" => {
                let sigma = real(field)?;
                inputs.mask = Some(Mask::from_nan(&sigma));
                inputs.sigma = Some(sigma);
            }
            "u" => inputs.u = Some(real(field)?),
            "v" => inputs.v = Some(real(field)?),
            "potential" => inputs.potential = Some(real(field)?),
            "psi_real" => inputs.psi_real = Some(real(field)?),
            "q" => inputs.q = Some(field.into_complex()),
            "psi" => inputs.psi = Some(field.into_complex()),
            "psi_plus" => inputs.psi_plus = Some(field.into_complex()),
            other => unreachable!("no residual reads {other}"),
        }
    }
    residual_scaled(eq, &inputs, tolerance_scale).map_err(|e| CliError::core(format!("verify {eq}"), e))
}
