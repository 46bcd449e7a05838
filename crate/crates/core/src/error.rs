use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("insufficient points: need {needed}, have {have}")]
    InsufficientPoints { needed: usize, have: usize },
    #[error("insufficient human/point-map overlap: best frame has {best} valid human pixels, need {needed}")]
    InsufficientOverlap { best: usize, needed: usize },
    #[error("empty point set: {0}")]
    EmptySet(&'static str),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(&'static str),
    #[error("scenario `{scenario}` needs a surface labelled `{missing}`")]
    ScenarioMismatch {
        scenario: &'static str,
        missing: &'static str,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}
