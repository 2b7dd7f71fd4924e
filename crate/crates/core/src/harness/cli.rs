use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use super::config::{ExperimentConfig, GridConfig, SyntheticKind};
use super::grid::run_grid;
use super::report::{build_report, load_records, ReportFormat};
use super::run::run_experiment;
use super::selftest::run_selftest;
use super::synthgen::{generate, generate_audio};
use crate::error::{Error, Result};
use crate::scenarios::{
    build_unchecked, extract_manifest_features, validate_stream, BuildOptions, Manifest,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "clbench",
    version,
    about = "Continual-learning benchmark over sequential task streams"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Text,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a stream from a manifest and check its scenario invariants.
    Validate {
        #[arg(long)]
        manifest: PathBuf,
        /// Feature cache for file-sourced manifests.
        #[arg(long)]
        cache: Option<PathBuf>,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Extract log-mel features of a manifest's audio into a cache file.
    ExtractFeatures {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one experiment config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write matrices and metrics in percent.
        #[arg(long)]
        percent: bool,
    },
    /// Run every cell of a hyperparameter grid.
    Grid {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        /// Run cells one after another.
        #[arg(long)]
        serial: bool,
        #[arg(long)]
        percent: bool,
    },
    /// Tabulate the run records found under a directory.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Also write per-session curves as CSV here.
        #[arg(long)]
        curves: Option<PathBuf>,
        /// Report fractions instead of percentages.
        #[arg(long)]
        fraction: bool,
    },
    /// Write a synthetic manifest, its data and a starter config.
    GenSynthetic {
        #[arg(long, value_enum)]
        kind: SyntheticArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Write a small WAV corpus of the kind's scenario instead of clusters.
        #[arg(long)]
        audio: bool,
    },
    /// Run gradient, metric, projection, regularizer, buffer and feature checks.
    Selftest,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SyntheticArg {
    StandardCi,
    StandardDi,
    DcaseCi,
    DcaseDi,
}

impl From<SyntheticArg> for SyntheticKind {
    fn from(a: SyntheticArg) -> Self {
        match a {
            SyntheticArg::StandardCi => SyntheticKind::StandardCi,
            SyntheticArg::StandardDi => SyntheticKind::StandardDi,
            SyntheticArg::DcaseCi => SyntheticKind::DcaseCi,
            SyntheticArg::DcaseDi => SyntheticKind::DcaseDi,
        }
    }
}

/// Exit status for an error: 2 for invalid inputs, 3 for everything else.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Validation(_) | Error::Manifest(_) | Error::Config(_) => EXIT_VALIDATION,
        _ => EXIT_RUNTIME,
    }
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    return EXIT_OK;
                }
                _ => EXIT_USAGE,
            };
            let _ = write!(err, "{}", e.render());
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let io = |e: std::io::Error| Error::io("<stdout>", e);
    match command {
        Command::Validate {
            manifest,
            cache,
            json,
        } => {
            let m = Manifest::load(&manifest)?;
            let opts = BuildOptions {
                base_dir: manifest.parent().map(PathBuf::from),
                cache,
            };
            let report = validate_stream(&build_unchecked(&m, &opts)?);
            if json {
                writeln!(out, "{}", report.to_json()).map_err(io)?;
            } else {
                writeln!(
                    out,
                    "{} stream: {} tasks, {} classes, train {:?}, test {:?}",
                    report.scenario,
                    report.tasks,
                    report.classes,
                    report.train_counts,
                    report.test_counts
                )
                .map_err(io)?;
                for v in &report.violations {
                    let task = v.task.map_or_else(String::new, |t| format!(" task {t}"));
                    writeln!(out, "  {:?}{task}: {}", v.kind, v.detail).map_err(io)?;
                }
                writeln!(out, "{}", if report.passed { "PASSED" } else { "FAILED" }).map_err(io)?;
            }
            Ok(if report.passed {
                EXIT_OK
            } else {
                EXIT_VALIDATION
            })
        }
        Command::ExtractFeatures {
            manifest,
            out: cache,
        } => {
            let m = Manifest::load(&manifest)?;
            let opts = BuildOptions {
                base_dir: manifest.parent().map(PathBuf::from),
                cache: Some(cache.clone()),
            };
            let c = extract_manifest_features(&m, &opts)?;
            writeln!(
                out,
                "{} rows x {} features -> {}",
                c.rows.len(),
                c.dim,
                cache.display()
            )
            .map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Run {
            config,
            out: dir,
            percent,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if dir.is_some() {
                cfg.output_dir = dir;
            }
            cfg.percent |= percent;
            let r = run_experiment(&cfg)?;
            let m = r.metrics.to_percent();
            let f = |v: Option<f64>| v.map_or("--".to_string(), |x| format!("{x:.2}"));
            writeln!(
                out,
                "{} seed {}: BWT {} FWT {} A {} ACC {} ({})",
                r.label,
                r.seed,
                f(m.bwt),
                f(m.fwt),
                f(m.a),
                f(m.acc),
                &r.config_hash[..16]
            )
            .map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Grid {
            config,
            out: dir,
            workers,
            serial,
            percent,
        } => {
            let mut g = GridConfig::load(&config)?;
            if dir.is_some() {
                g.base.output_dir = dir;
            }
            if workers.is_some() {
                g.workers = workers;
            }
            g.base.percent |= percent;
            let cells = run_grid(&g, !serial)?;
            let mut failed = 0;
            for c in &cells {
                match &c.outcome {
                    Ok(r) => {
                        let acc = r
                            .metrics
                            .acc
                            .map_or("--".into(), |a| format!("{:.2}", a * 100.0));
                        writeln!(out, "{} seed {}: ACC {acc}", r.label, r.seed).map_err(io)?;
                    }
                    Err(e) => {
                        failed += 1;
                        writeln!(
                            err,
                            "{} seed {}: {e}",
                            c.config.strategy.label(0),
                            c.config.seed
                        )
                        .map_err(io)?;
                    }
                }
            }
            writeln!(
                out,
                "{} of {} cells succeeded",
                cells.len() - failed,
                cells.len()
            )
            .map_err(io)?;
            Ok(if failed == 0 { EXIT_OK } else { EXIT_RUNTIME })
        }
        Command::Report {
            input,
            format,
            curves,
            fraction,
        } => {
            let records = load_records(&input)?;
            let report = build_report(&records, !fraction)?;
            let fmt = match format {
                Format::Csv => ReportFormat::Csv,
                Format::Text => ReportFormat::Text,
            };
            write!(out, "{}", report.render(fmt)).map_err(io)?;
            if let Some(p) = curves {
                std::fs::write(&p, report.curves_csv()).map_err(|e| Error::io(&p, e))?;
            }
            Ok(EXIT_OK)
        }
        Command::GenSynthetic {
            kind,
            seed,
            out: dir,
            audio,
        } => {
            let kind = SyntheticKind::from(kind);
            let g = if audio {
                generate_audio(kind.scenario(), seed, &dir)?
            } else {
                generate(kind, seed, &dir)?
            };
            writeln!(out, "manifest {}", g.manifest.display()).map_err(io)?;
            writeln!(out, "features {}", g.features.display()).map_err(io)?;
            writeln!(out, "config   {}", g.config.display()).map_err(io)?;
            if audio {
                writeln!(out, "{} WAV files", g.wav_files).map_err(io)?;
            }
            Ok(EXIT_OK)
        }
        Command::Selftest => {
            let results = run_selftest();
            for s in &results {
                writeln!(
                    out,
                    "{} {}: {}",
                    if s.passed { "PASS" } else { "FAIL" },
                    s.name,
                    s.detail
                )
                .map_err(io)?;
            }
            Ok(if results.iter().all(|s| s.passed) {
                EXIT_OK
            } else {
                EXIT_RUNTIME
            })
        }
    }
}
