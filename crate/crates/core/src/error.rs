use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// An enumeration or exact computation was refused because it would
    /// exceed a fixed size guard.
    #[error("{what} = {got} exceeds the guard limit {limit}")]
    Guard {
        what: &'static str,
        got: usize,
        limit: usize,
    },

    #[error("test set contains no samples with x_a = {class}; increase the test set size")]
    MissingClass { class: u8 },

    #[error("no surviving false predictor of size {size} after {retries} redraws")]
    NoFalsePredictor { size: usize, retries: usize },

    #[error("false predictor still alive after {max_steps} steps")]
    SurvivalUnbounded { max_steps: usize },
}
