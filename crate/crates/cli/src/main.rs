use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use openbook_cli::{configure_threads, emit_report, run_suite, CliError, Format, ReportDocument, Suite, SuiteConfig};

/// Run a verification suite and report per-check results.
///
/// Exit status: 0 if every check passes, 1 if any check fails, 2 on usage,
/// configuration or output errors.
#[derive(Debug, Parser)]
#[command(name = "verify", version)]
struct Args {
    /// Suite to run (overrides the config file).
    #[arg(long, value_enum)]
    suite: Option<Suite>,
    /// JSON config file; unknown fields are rejected.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Samples per pointwise check.
    #[arg(long)]
    samples: Option<usize>,
    /// Output directory; without it the JSON document goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn config(args: &Args) -> Result<SuiteConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => SuiteConfig::load(path)?,
        None => SuiteConfig::default(),
    };
    if let Some(s) = args.suite {
        cfg.suite = s;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(n) = args.samples {
        cfg.samples = n;
    }
    if let Some(o) = &args.out {
        cfg.out = Some(o.clone());
    }
    if let Some(f) = args.format {
        cfg.format = f;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(args: &Args) -> Result<bool, CliError> {
    let cfg = config(args)?;
    configure_threads()?;
    let doc = ReportDocument::new(&cfg, run_suite(&cfg));
    for r in &doc.reports {
        eprintln!("{}", r.summary());
    }
    eprintln!("{}: {} passed, {} failed", doc.suite, doc.passed, doc.failed);
    match (&cfg.out, cfg.format) {
        (Some(dir), format) => {
            for path in emit_report(&doc, dir, format)? {
                eprintln!("wrote {}", path.display());
            }
        }
        (None, Format::Json) => println!("{}", doc.to_json()),
        (None, Format::Csv) => print!("{}", openbook_cli::output::summary_csv(&doc.reports)?),
    }
    Ok(doc.all_pass())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
