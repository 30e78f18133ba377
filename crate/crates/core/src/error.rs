use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("integration produced a non-finite derivative at t = {t} s")]
    Integration { t: f64 },
    #[error("non-finite {what} at t = {t} s")]
    NonFinite { what: &'static str, t: f64 },
    #[error("invalid configuration `{field}`: {reason}")]
    Config { field: String, reason: String },
}

impl SimError {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        SimError::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = SimError> = std::result::Result<T, E>;
