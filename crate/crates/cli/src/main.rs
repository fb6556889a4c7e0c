//! `unimargin` — inspect 2×2 / 2×2×2 contingency tables and transform them
//! into equivalent probability tables with uniform margins.

mod commands;
mod document;
mod error;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Method;
use document::Format;
use error::CliError;

#[derive(Parser)]
#[command(
    name = "unimargin",
    version,
    about = "Uniform-margin transforms for 2x2 and 2x2x2 contingency tables"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print grand total, relative frequencies, margins, and the odds-ratio
    /// dependence profile of a table
    Inspect {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Auto)]
        format: Format,
        /// Emit the report as JSON (full precision) instead of text
        #[arg(long)]
        json: bool,
    },
    /// Transform a table into an equivalent one with uniform margins
    Uniformize {
        file: PathBuf,
        /// closed: odds-ratio closed form (2x2, or symmetric 2x2x2);
        /// ipf/newton: preserve all conditional odds ratios (2x2x2);
        /// sections: uniform two-dimensional sections (2x2x2)
        #[arg(long, value_enum)]
        method: Method,
        /// Convergence tolerance (margin deviation / residual max-norm)
        #[arg(long)]
        tol: Option<f64>,
        /// Iteration cap for the iterative methods
        #[arg(long = "max-iter")]
        max_iter: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Auto)]
        format: Format,
        /// Write the transformed table as a JSON table document
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate members of the uniform-margin family with a given
    /// three-way odds ratio
    Family {
        #[arg(long)]
        omega: f64,
        /// Complete this free triple p000,p001,p010 instead of sampling
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        free: Option<Vec<f64>>,
        /// Number of points to sample
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the JSON list to a file
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a two-panel SVG bubble plot of a 2x2 table before and after
    /// transformation
    Plot {
        before: PathBuf,
        after: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Inspect { file, format, json } => {
            let doc = document::load_table(&file, format)?;
            commands::cmd_inspect(&doc, json)
        }
        Command::Uniformize {
            file,
            method,
            tol,
            max_iter,
            format,
            out,
        } => {
            let doc = document::load_table(&file, format)?;
            commands::cmd_uniformize(&doc, method, tol, max_iter, out.as_deref())
        }
        Command::Family {
            omega,
            free,
            n,
            seed,
            out,
        } => commands::cmd_family(omega, free.as_deref(), n, seed, out.as_deref()),
        Command::Plot { before, after, out } => {
            let before = document::load_table(&before, Format::Auto)?;
            let after = document::load_table(&after, Format::Auto)?;
            commands::cmd_plot(&before, &after, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}
