//! Command-line job description.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use rank1kit_core::sl2::Word;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Cross-ratio of four boundary points in both models.
    Crossratio,
    /// Projection of boundary points to the ball.
    Project,
    /// Action of a normal-form isometry on boundary points.
    Act,
    /// Length sequence converging to a fixed-point cross-ratio (CSV).
    Lemma1,
    /// Trace-length gauge table for loxodromic matrices (CSV).
    Lemma2,
    /// Triple-trace quadratic from six traces.
    Vogt,
    /// Trace and length Jacobian ranks of a representation.
    Jacobian,
    /// Representation from a length table or a reference representation.
    Reconstruct,
    /// Invariant suites of every module.
    Verify,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Crossratio => "crossratio",
            Command::Project => "project",
            Command::Act => "act",
            Command::Lemma1 => "lemma1",
            Command::Lemma2 => "lemma2",
            Command::Vogt => "vogt",
            Command::Jacobian => "jacobian",
            Command::Reconstruct => "reconstruct",
            Command::Verify => "verify",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Parser)]
#[command(
    name = "rank1kit",
    version,
    about = "Boundary geometry and length-spectrum tools for rank-one hyperbolic spaces"
)]
pub struct JobConfig {
    #[arg(value_enum)]
    pub command: Command,
    /// Input file (JSON, or CSV length table for `reconstruct`).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Tolerance override for the command's acceptance test.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Sequence length, sample count or budget depending on the command.
    #[arg(long)]
    pub n: Option<usize>,
    /// Words such as `[1,-2,1]`; repeat the flag for several.
    #[arg(long, value_parser = parse_word)]
    pub words: Vec<Word>,
}

fn parse_word(s: &str) -> Result<Word, String> {
    s.parse().map_err(|e: rank1kit_core::Error| e.to_string())
}

impl JobConfig {
    /// Parses arguments without the program name.
    pub fn parse_args<I, T>(args: I) -> Result<Self, clap::Error>
    where
        I: IntoIterator<Item = T>,
        T: Into<OsString> + Clone,
    {
        let argv = std::iter::once(OsString::from("rank1kit")).chain(args.into_iter().map(Into::into));
        Self::try_parse_from(argv)
    }

    /// Arguments that parse back to `self`, written `--flag=value`.
    pub fn render(&self) -> Vec<String> {
        let mut out = vec![self.command.name().to_owned()];
        if let Some(p) = &self.input {
            out.push(format!("--input={}", p.display()));
        }
        if let Some(p) = &self.output {
            out.push(format!("--output={}", p.display()));
        }
        out.push(format!("--seed={}", self.seed));
        if let Some(t) = self.tol {
            out.push(format!("--tol={}", t));
        }
        if let Some(n) = self.n {
            out.push(format!("--n={}", n));
        }
        for w in &self.words {
            out.push(format!("--words={}", w));
        }
        out
    }

    /// Checks referenced files and numeric overrides before any work starts.
    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(p) = &self.input {
            if !p.is_file() {
                return Err(CliError::field("--input", format!("{} does not exist", p.display())));
            }
        }
        if let Some(t) = self.tol {
            if !(t.is_finite() && t > 0.0) {
                return Err(CliError::field("--tol", "must be positive and finite"));
            }
        }
        if self.n == Some(0) {
            return Err(CliError::field("--n", "must be at least 1"));
        }
        if self.words.iter().any(Word::is_empty) {
            return Err(CliError::field("--words", "words must be nonempty"));
        }
        Ok(())
    }
}
