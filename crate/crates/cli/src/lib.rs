//! Command-line experiment runner: configuration, output formats, run
//! manifests and the experiments themselves.

pub mod config;
pub mod experiments;
pub mod formats;
pub mod manifest;
pub mod oracle_suite;

use atomtronics_core::{Error, EvolutionFailure};
use config::ConfigError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_DETECTION: i32 = 4;

fn core_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Parameter(_) | Error::Precondition(_) | Error::GridMismatch(_) => EXIT_CONFIG,
        Error::NumericalBlowup { .. } | Error::Convergence { .. } | Error::DegenerateField(_) => EXIT_NUMERICAL,
        Error::Range(_) | Error::Detection(_) => EXIT_DETECTION,
    }
}

/// Process exit status for a failed run.
///
/// 2: bad configuration or parameters; 3: numerical failure; 4: a
/// measurement could not be made; 1: anything else, including I/O.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.downcast_ref::<ConfigError>().is_some() {
            return EXIT_CONFIG;
        }
        if let Some(f) = cause.downcast_ref::<EvolutionFailure>() {
            return core_code(&f.error);
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return core_code(e);
        }
    }
    EXIT_IO
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let cfg = anyhow::Error::new(ConfigError { errors: vec![] });
        assert_eq!(exit_code(&cfg), EXIT_CONFIG);
        let blowup = anyhow::Error::new(EvolutionFailure::from(Error::NumericalBlowup {
            step: 3,
            time: 0.1,
            reason: "nan".into(),
        }));
        assert_eq!(exit_code(&blowup), EXIT_NUMERICAL);
        let det = anyhow::Error::new(Error::Detection("no peak".into())).context("revival table");
        assert_eq!(exit_code(&det), EXIT_DETECTION);
        let io = anyhow::Error::new(std::io::Error::new(std::io::ErrorKind::NotFound, "x"));
        assert_eq!(exit_code(&io), EXIT_IO);
    }
}
