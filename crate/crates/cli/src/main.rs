use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use moebius_core::gallery::{builtin, builtin_examples};
use moebius_core::report::{to_json, to_table};
use moebius_core::{classify, ClassificationReport, ClassifyOptions, ImmersionSpec};

/// Verify Möbius invariant identities and classify submanifolds.
#[derive(Parser)]
#[command(name = "moebius", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the structural identities at sample points (exit 1 on violation).
    Verify(RunArgs),
    /// Classify the immersion (exit 1 when not classified).
    Classify(RunArgs),
    /// Built-in example immersions.
    #[command(subcommand)]
    Gallery(GalleryCommand),
}

#[derive(Subcommand)]
enum GalleryCommand {
    /// List built-in examples.
    List,
    /// Write a built-in example as a spec file.
    Emit {
        name: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Immersion spec JSON file.
    #[arg(long, conflicts_with = "example", required_unless_present = "example")]
    spec: Option<PathBuf>,
    /// Name of a built-in example instead of a file.
    #[arg(long)]
    example: Option<String>,
    #[arg(long, default_value_t = 5)]
    order: usize,
    #[arg(long, default_value_t = 16)]
    samples: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Threshold for treating λ₁+λ₂ as zero.
    #[arg(long, default_value_t = 1e-6)]
    tol_sum: f64,
    /// Write the JSON report here (`-` for stdout).
    #[arg(long)]
    json: Option<PathBuf>,
}

/// Failures that are the caller's fault map to exit code 2.
struct InputError(anyhow::Error);

impl RunArgs {
    fn load(&self) -> Result<ImmersionSpec> {
        match (&self.spec, &self.example) {
            (Some(path), _) => ImmersionSpec::load(path).with_context(|| format!("loading {}", path.display())),
            (None, Some(name)) => Ok(builtin(name)?),
            (None, None) => bail!("either --spec or --example is required"),
        }
    }

    fn options(&self) -> ClassifyOptions {
        ClassifyOptions {
            order: self.order,
            samples: self.samples,
            seed: self.seed,
            tol: self.tol,
            tol_sum: self.tol_sum,
            ..ClassifyOptions::default()
        }
    }
}

fn write_json(report: &ClassificationReport, out: &Path) -> Result<()> {
    let text = to_json(report);
    if out == Path::new("-") {
        print!("{text}");
    } else {
        std::fs::write(out, text).with_context(|| format!("writing {}", out.display()))?;
    }
    Ok(())
}

fn run_report(args: &RunArgs, verify: bool) -> Result<ExitCode, InputError> {
    let spec = args.load().map_err(InputError)?;
    let report = classify(&spec, &args.options()).map_err(|e| InputError(e.into()))?;
    if args.json.as_deref() != Some(Path::new("-")) {
        print!("{}", to_table(&report));
    }
    if let Some(out) = &args.json {
        write_json(&report, out).map_err(InputError)?;
    }
    let ok = if verify { report.identities_hold() } else { report.verdict.is_classified() };
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn run_gallery(cmd: &GalleryCommand) -> Result<ExitCode> {
    match cmd {
        GalleryCommand::List => {
            for e in builtin_examples() {
                println!("{:<28} {}", e.name, e.description);
            }
        }
        GalleryCommand::Emit { name, out } => {
            let spec = builtin(name)?;
            std::fs::write(out, spec.to_json()).with_context(|| format!("writing {}", out.display()))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Verify(args) => run_report(args, true),
        Command::Classify(args) => run_report(args, false),
        Command::Gallery(cmd) => run_gallery(cmd).map_err(InputError),
    };
    match result {
        Ok(code) => code,
        Err(InputError(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
