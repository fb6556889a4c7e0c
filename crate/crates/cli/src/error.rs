//! CLI error type carrying the documented exit codes: 2 parse/validation,
//! 3 solver non-convergence, 4 undefined odds ratio (zero cell).

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<unimargin_core::Error> for CliError {
    fn from(err: unimargin_core::Error) -> Self {
        use unimargin_core::Error::*;
        let code = match &err {
            ZeroCell | IpfZeroCell | NonPositiveStart => 4,
            NonConvergence { .. }
            | SingularJacobian { .. }
            | SolverDisagreement { .. }
            | FeasibleRegionTooThin { .. } => 3,
            _ => 2,
        };
        CliError {
            code,
            message: err.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError {
            code: 2,
            message: err.to_string(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}
