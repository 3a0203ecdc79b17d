//! Experiment harness: TOML-configured studies and their reports.

pub mod config;
pub mod families;
pub mod report;
pub mod study;

pub use config::StudyConfig;
pub use report::{Format, StudyReport};
pub use study::RunOptions;

use crate::error::Result;

/// One CLI subcommand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Norm,
    Operator,
    Weights,
    Bmo,
    Condition,
    StudyBounded,
    StudyLocal,
    StudyBmoNecessity,
    StudyVanishing,
}

impl Command {
    pub fn run(self, cfg: &StudyConfig, opts: RunOptions) -> Result<StudyReport> {
        match self {
            Command::Norm => study::run_norm(cfg, opts),
            Command::Operator => study::run_operator(cfg, opts),
            Command::Weights => study::run_weights(cfg, opts),
            Command::Bmo => study::run_bmo(cfg, opts),
            Command::Condition => study::run_condition(cfg, opts),
            Command::StudyBounded => study::run_boundedness_study(cfg, opts),
            Command::StudyLocal => study::run_local_estimate_check(cfg, opts),
            Command::StudyBmoNecessity => study::run_bmo_necessity_test(cfg, opts),
            Command::StudyVanishing => study::run_vanishing_study(cfg, opts),
        }
    }
}

impl std::str::FromStr for Command {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        <Command as clap::ValueEnum>::from_str(s, false)
            .map_err(|_| crate::Error::Argument(format!("unknown command {s:?}")))
    }
}
