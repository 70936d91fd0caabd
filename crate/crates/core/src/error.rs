use thiserror::Error;

use crate::diagram::Violation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid diagram: {}", summarize(.0))]
    InvalidDiagram(Vec<Violation>),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("precondition {0}")]
    Precondition(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("window exceeds horizon: {0}")]
    WindowExceedsHorizon(String),
    #[error("target unreachable: {0}")]
    TargetUnreachable(String),
    #[error("ladder invalid: {0}")]
    LadderInvalid(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

fn summarize(v: &[Violation]) -> String {
    let mut parts: Vec<String> = v.iter().take(4).map(|x| x.to_string()).collect();
    if v.len() > 4 {
        parts.push(format!("and {} more", v.len() - 4));
    }
    parts.join("; ")
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn budget(msg: impl Into<String>) -> Self {
        Error::BudgetExceeded(msg.into())
    }
}
