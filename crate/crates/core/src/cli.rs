//! `fieldscope` command-line front end.
//!
//! Exit codes: 0 success, 1 verification mismatch, 2 input/parse/usage error,
//! 3 arithmetic overflow.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::arch::NetworkSpec;
use crate::calc;
use crate::error::FieldError;
use crate::oracle::{self, BatchOutcome, EquivalenceReport};
use crate::par::Execution;
use crate::parser::{self, Format};
use crate::random::{self, ChainBounds};
use crate::report::{self, AnalysisReport, TopDownReport};

pub const EXIT_OK: u8 = 0;
pub const EXIT_MISMATCH: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_OVERFLOW: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "fieldscope", version, about = "Receptive and projective field calculator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Table,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-layer ERF trace and projective-field sizes.
    Analyze {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
        format: OutputFormat,
        /// Read the chain as a deconvolutional network.
        #[arg(long)]
        deconv: bool,
    },
    /// Project one layer's RF down to the input, layer by layer.
    Topdown {
        file: PathBuf,
        #[arg(long)]
        layer: usize,
        #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
        format: OutputFormat,
    },
    /// Cross-check closed forms against the brute-force oracle.
    Verify {
        file: Option<PathBuf>,
        /// Verify seeded random chains instead of a file.
        #[arg(long)]
        random: bool,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Run trials on the calling thread only.
        #[arg(long)]
        sequential: bool,
    },
    /// ASCII diagram of one neuron's footprint on every lower layer.
    Footprint {
        file: PathBuf,
        #[arg(long)]
        layer: usize,
        #[arg(long, default_value_t = 120)]
        max_width: u64,
    },
}

fn exit_code(e: &FieldError) -> u8 {
    match e {
        FieldError::Overflow { .. } => EXIT_OVERFLOW,
        _ => EXIT_INPUT,
    }
}

/// Reads, parses and validates an architecture file. Diagnostics and
/// warnings go to `err`; on failure the exit code is returned.
pub fn load_network(path: &Path, err: &mut dyn Write) -> Result<NetworkSpec, u8> {
    let shown = path.display();
    let text = std::fs::read_to_string(path).map_err(|e| {
        let _ = writeln!(err, "error: cannot read {shown}: {e}");
        EXIT_INPUT
    })?;
    let parsed = parser::parse(&text, Format::from_path(path)).map_err(|diags| {
        for d in diags {
            let _ = writeln!(err, "{shown}:{d}");
        }
        EXIT_INPUT
    })?;
    for w in &parsed.warnings {
        let _ = writeln!(err, "{shown}:{w}");
    }
    let mut network = parsed.network;
    let validation = network.validate();
    for e in &validation.errors {
        let _ = writeln!(err, "{shown}: error: {e}");
    }
    for w in &validation.warnings {
        let _ = writeln!(err, "{shown}: warning: {w}");
    }
    if !validation.is_ok() {
        return Err(EXIT_INPUT);
    }
    if network.name.is_empty() {
        if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
            network.name = stem.to_string();
        }
    }
    Ok(network)
}

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    match cli.command {
        Command::Analyze {
            file,
            format,
            deconv,
        } => analyze(&file, format, deconv, out, err),
        Command::Topdown {
            file,
            layer,
            format,
        } => topdown(&file, layer, format, out, err),
        Command::Verify {
            file,
            random,
            trials,
            seed,
            sequential,
        } => {
            let exec = if sequential {
                Execution::Sequential
            } else {
                Execution::Parallel
            };
            match (file, random) {
                (Some(file), false) => verify_file(&file, out, err),
                (None, true) => verify_random(trials, seed, exec, out),
                (Some(_), true) => {
                    let _ = writeln!(err, "error: give either a file or --random, not both");
                    EXIT_INPUT
                }
                (None, false) => {
                    let _ = writeln!(err, "error: verify needs a file or --random");
                    EXIT_INPUT
                }
            }
        }
        Command::Footprint {
            file,
            layer,
            max_width,
        } => footprint(&file, layer, max_width, out, err),
    }
}

macro_rules! try_load {
    ($path:expr, $err:expr) => {
        match load_network($path, $err) {
            Ok(n) => n,
            Err(code) => return code,
        }
    };
}

macro_rules! try_calc {
    ($expr:expr, $err:expr) => {
        match $expr {
            Ok(v) => v,
            Err(e) => {
                let _ = writeln!($err, "error: {e}");
                return exit_code(&e);
            }
        }
    };
}

fn analyze(
    path: &Path,
    format: OutputFormat,
    deconv: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> u8 {
    let mut network = try_load!(path, err);
    if deconv {
        network = calc::deconv_view(&network);
    }
    let report = try_calc!(AnalysisReport::build(&network), err);
    let text = match format {
        OutputFormat::Table => report.to_table(),
        OutputFormat::Json => report.to_json(),
    };
    let _ = out.write_all(text.as_bytes());
    EXIT_OK
}

fn topdown(
    path: &Path,
    layer: usize,
    format: OutputFormat,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> u8 {
    let network = try_load!(path, err);
    let projection = try_calc!(calc::rf_top_down(&network, layer), err);
    let report = TopDownReport::new(&network, &projection);
    let text = match format {
        OutputFormat::Table => report.to_table(),
        OutputFormat::Json => report.to_json(),
    };
    let _ = out.write_all(text.as_bytes());
    EXIT_OK
}

fn verify_file(path: &Path, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let network = try_load!(path, err);
    let report = try_calc!(oracle::check_equivalence(&network), err);
    write_verification(&report, out)
}

/// Renders an equivalence report and returns the matching exit code.
pub fn write_verification(report: &EquivalenceReport, out: &mut dyn Write) -> u8 {
    let _ = out.write_all(report::render_equivalence(report).as_bytes());
    if report.pass {
        return EXIT_OK;
    }
    if let Some(c) = report.first_erf_mismatch() {
        let _ = writeln!(
            out,
            "first mismatch: layer {}: bottom-up {}, top-down {}, oracle span {}",
            c.layer, c.bottom_up, c.top_down, c.oracle.span
        );
    } else if let Some(c) = report.first_pf_mismatch() {
        let _ = writeln!(out, "first mismatch: boundary {}", c.boundary);
    }
    EXIT_MISMATCH
}

fn verify_random(trials: usize, seed: u64, exec: Execution, out: &mut dyn Write) -> u8 {
    let bounds = ChainBounds::default();
    let networks = random::seeded_chains(seed, trials, &bounds);
    let outcome = oracle::check_batch(&networks, exec);
    write_batch(&outcome, seed, &bounds, out)
}

/// Renders a random-suite outcome and returns the matching exit code.
pub fn write_batch(outcome: &BatchOutcome, seed: u64, bounds: &ChainBounds, out: &mut dyn Write) -> u8 {
    let trials = outcome.trials;
    let _ = writeln!(
        out,
        "random verification: {trials} trials, seed {seed}, layers ≤ {}, filter ≤ {}, stride ≤ {}",
        bounds.max_layers, bounds.max_filter, bounds.max_stride
    );
    let _ = writeln!(out, "passed: {}/{}", outcome.passed, outcome.trials);
    if let Some(fail) = &outcome.first_failure {
        let _ = writeln!(out, "first mismatch: trial {}", fail.trial);
        let _ = writeln!(out, "{}", parser::serialize_dsl(&fail.network));
        match &fail.outcome {
            Ok(report) => {
                let _ = out.write_all(report::render_equivalence(report).as_bytes());
            }
            Err(e) => {
                let _ = writeln!(out, "error: {e}");
            }
        }
    }
    let _ = writeln!(out, "result: {}", if outcome.pass() { "PASS" } else { "FAIL" });
    if outcome.pass() {
        EXIT_OK
    } else {
        EXIT_MISMATCH
    }
}

fn footprint(
    path: &Path,
    layer: usize,
    max_width: u64,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> u8 {
    let network = try_load!(path, err);
    let projection = try_calc!(calc::rf_top_down(&network, layer), err);
    let text = report::render_footprint(&network, &projection, max_width);
    let _ = out.write_all(text.as_bytes());
    EXIT_OK
}
