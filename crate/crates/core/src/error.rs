use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    #[error("work budget exceeded: {required} operations needed, budget is {budget}")]
    WorkBudgetExceeded { required: u128, budget: u128 },

    #[error("non-finite value encountered at t = {time}")]
    NonFinite { time: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
