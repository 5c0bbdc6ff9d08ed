use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use dglab::compare::{compare, ReferenceSpec};
use dglab::config::{load_config, RunConfig};
use dglab::diagnostics::limited_reference_run;
use dglab::output::{write_reference, write_run};
use dglab::scenario::{PresetVariant, Scenario};
use dglab::solver::run;
use dglab::DgError;

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(
    name = "dglab",
    version,
    about = "1D DG solver with artificial-viscosity shock capturing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a JSON-configured scenario and write snapshots, trace and metadata.
    Run {
        config: PathBuf,
        /// Override a config key, e.g. `--set mesh.elements=80`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Compare the final snapshots of two runs and print a JSON report.
    Compare {
        dir_a: PathBuf,
        dir_b: PathBuf,
        /// `exact` or a reference run directory.
        #[arg(long, default_value = "exact")]
        reference: ReferenceSpec,
        /// Restrict the error norms to `A,B`.
        #[arg(long, value_name = "A,B", value_parser = parse_window)]
        window: Option<(f64, f64)>,
    },
    /// List the built-in scenarios.
    ListScenarios,
    /// Compute a degree-1 minmod-limited reference solution.
    Reference {
        scenario: Scenario,
        #[arg(long, default_value_t = 2000)]
        elements: usize,
        #[arg(long, value_enum, default_value = "classical")]
        variant: VariantArg,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum VariantArg {
    Classical,
    PaperLiteral,
}

impl From<VariantArg> for PresetVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Classical => PresetVariant::Classical,
            VariantArg::PaperLiteral => PresetVariant::PaperLiteral,
        }
    }
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected A,B")?;
    let a: f64 = a.trim().parse().map_err(|e| format!("{a}: {e}"))?;
    let b: f64 = b.trim().parse().map_err(|e| format!("{b}: {e}"))?;
    if a.partial_cmp(&b) != Some(std::cmp::Ordering::Less) {
        return Err(format!("empty window {a},{b}"));
    }
    Ok((a, b))
}

fn is_config_error(e: &DgError) -> bool {
    matches!(e, DgError::Config(_) | DgError::Json(_) | DgError::Io(_))
}

fn cmd_run(path: PathBuf, overrides: Vec<String>) -> ExitCode {
    let config = match load_config(&path, &overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let start = Instant::now();
    let outcome = match run(&config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(if is_config_error(&e) { EXIT_CONFIG } else { EXIT_FAILURE });
        }
    };
    let dir = config.output_dir();
    let meta = match write_run(&dir, &config, &outcome, start.elapsed().as_secs_f64()) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: writing {}: {e}", dir.display());
            return ExitCode::from(EXIT_FAILURE);
        }
    };
    match &outcome.failure {
        None => {
            println!(
                "{} run {}: t = {} after {} steps, output in {}",
                config.scenario.name(),
                meta.run_id,
                meta.final_time,
                meta.steps,
                dir.display()
            );
            ExitCode::SUCCESS
        }
        Some(e) => {
            eprintln!(
                "error: {e}; last good state at t = {} written to {}",
                meta.final_time,
                dir.display()
            );
            ExitCode::from(EXIT_FAILURE)
        }
    }
}

fn cmd_compare(a: PathBuf, b: PathBuf, reference: ReferenceSpec, window: Option<(f64, f64)>) -> ExitCode {
    match compare(&a, &b, &reference, window).and_then(|r| Ok(serde_json::to_string_pretty(&r)?)) {
        Ok(text) => {
            println!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}

fn cmd_reference(scenario: Scenario, elements: usize, variant: PresetVariant, out: PathBuf) -> ExitCode {
    let start = Instant::now();
    let result = limited_reference_run(scenario, variant, elements, None).and_then(|r| {
        let mut config = RunConfig::for_scenario(scenario);
        config.preset_variant = variant;
        config.mesh.elements = Some(elements);
        config.degree = Some(1);
        config.viscosity.kind = Some(dglab::config::ViscosityChoice::None);
        config.viscosity.lambda = None;
        write_reference(&out, &config, &r, start.elapsed().as_secs_f64())
    });
    match result {
        Ok(meta) => {
            println!(
                "reference {} ({} steps) written to {}",
                meta.run_id,
                meta.steps,
                out.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Run { config, overrides } => cmd_run(config, overrides),
        Command::Compare {
            dir_a,
            dir_b,
            reference,
            window,
        } => cmd_compare(dir_a, dir_b, reference, window),
        Command::ListScenarios => {
            for s in Scenario::ALL {
                println!("{:<18} {}", s.name(), s.description());
            }
            ExitCode::SUCCESS
        }
        Command::Reference {
            scenario,
            elements,
            variant,
            out,
        } => cmd_reference(scenario, elements, variant.into(), out),
    }
}
