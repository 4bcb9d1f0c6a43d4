use crate::backend::BackendError;
use crate::obs::{BoxError, ObsError, ObsId};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Obs(#[from] ObsError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("tab items are empty")]
    EmptyItems,
    #[error("{0} view needs a parent widget")]
    MissingParent(&'static str),
    #[error("a window can only be rendered as the root view")]
    NestedWindow,
    #[error("the root view did not produce a window")]
    RootNotWindow,
    #[error("value committed to {0} has an unexpected type")]
    ValueType(ObsId),
    #[error("action failed: {0}")]
    Action(#[source] BoxError),
    #[error("view failed: {0}")]
    View(#[source] BoxError),
    #[error("panic in event loop job: {0}")]
    Panic(String),
    #[error("cannot render from inside an event loop job")]
    Reentrant,
}

impl Error {
    /// Wraps an action failure, keeping observable errors typed.
    pub fn from_action(err: BoxError) -> Self {
        match err.downcast::<ObsError>() {
            Ok(obs) => Error::Obs(*obs),
            Err(other) => Error::Action(other),
        }
    }

    pub fn is_derived_update(&self) -> bool {
        matches!(self, Error::Obs(ObsError::DerivedUpdate(_)))
    }
}
