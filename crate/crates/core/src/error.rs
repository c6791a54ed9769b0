use thiserror::Error;

use crate::audit::Anchor;
use crate::codec::CodecError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchemeError {
    #[error("bad parameter: {0}")]
    BadParam(String),
    #[error("{anchor} violated at node {node}")]
    Invariant { anchor: Anchor, node: usize },
    #[error("label is malformed: {0}")]
    Malformed(String),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

pub(crate) fn malformed(what: impl Into<String>) -> SchemeError {
    SchemeError::Malformed(what.into())
}
