use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Inputs outside an operation's admissible region.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("pole: {0}")]
    Pole(String),
    /// A numerical target could not be met; `partial` carries the best estimate so far.
    #[error("accuracy error: {message}")]
    Accuracy { message: String, partial: Option<f64> },
    /// Phase tracking met a zero of the function on (or very near) the contour.
    #[error("contour passes near a zero: {0}")]
    NearZero(String),
    #[error("winding number rejected (residual {residual})")]
    WindingRejected { residual: f64 },
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub fn accuracy(message: impl Into<String>, partial: Option<f64>) -> Self {
        Error::Accuracy { message: message.into(), partial }
    }

    /// True for errors caused by numerical limits rather than bad input.
    pub fn is_accuracy(&self) -> bool {
        matches!(
            self,
            Error::Accuracy { .. } | Error::NearZero(_) | Error::WindingRejected { .. }
        )
    }

    /// Prefixes the message with context, keeping the variant.
    pub fn context(self, ctx: impl std::fmt::Display) -> Self {
        match self {
            Error::Domain(m) => Error::Domain(format!("{ctx}: {m}")),
            Error::Pole(m) => Error::Pole(format!("{ctx}: {m}")),
            Error::Accuracy { message, partial } => {
                Error::Accuracy { message: format!("{ctx}: {message}"), partial }
            }
            Error::NearZero(m) => Error::NearZero(format!("{ctx}: {m}")),
            Error::WindingRejected { residual } => Error::WindingRejected { residual },
            Error::Internal(m) => Error::Internal(format!("{ctx}: {m}")),
        }
    }
}
