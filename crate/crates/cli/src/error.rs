use std::fmt;

use unprov_core::bridge::BridgeError;
use unprov_core::data_model::DataError;
use unprov_core::query::QueryError;
use unprov_core::questions::QuestionError;
use unprov_core::workflow::GraphError;

/// A failed command. `User` maps to exit status 1, `Data` to 2.
#[derive(Debug)]
pub enum CliError {
    User(String),
    Data(String),
}

impl CliError {
    pub fn user(msg: impl Into<String>) -> Self {
        CliError::User(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::User(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (CliError::User(m) | CliError::Data(m)) = self;
        // Diagnostics stay on one line.
        f.write_str(&m.replace('\n', " "))
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        match e {
            DataError::TypeMismatch { .. }
            | DataError::ArityMismatch { .. }
            | DataError::InvalidValue { .. }
            | DataError::Incomparable { .. }
            | DataError::Corrupt(_) => CliError::Data(e.to_string()),
            _ => CliError::User(e.to_string()),
        }
    }
}

impl From<QueryError> for CliError {
    fn from(e: QueryError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        CliError::User(e.to_string())
    }
}

impl From<BridgeError> for CliError {
    fn from(e: BridgeError) -> Self {
        CliError::User(e.to_string())
    }
}

impl From<QuestionError> for CliError {
    fn from(e: QuestionError) -> Self {
        match e {
            QuestionError::Query(q) => q.into(),
            other => CliError::User(other.to_string()),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Data(format!("csv: {e}"))
    }
}
