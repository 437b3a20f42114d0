use std::fmt;

use thiserror::Error;

/// 1-based source position. Positions never take part in structural
/// equality of syntax trees, so a re-parsed program compares equal to the
/// original.
#[derive(Debug, Clone, Copy, Default)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl PartialEq for Pos {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Pos {}

impl Pos {
    pub fn new(line: u32, col: u32) -> Self {
        Pos { line, col }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{pos}: syntax error: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("{pos}: unsupported feature: {what}")]
    UnsupportedFeature { pos: Pos, what: String },
    #[error("{pos}: unknown import `{name}`")]
    UnknownImport { pos: Pos, name: String },
    #[error("{pos}: duplicate class `{name}`")]
    DuplicateClass { pos: Pos, name: String },
    #[error("{pos}: duplicate declaration of `{name}`")]
    DuplicateName { pos: Pos, name: String },
    #[error("{pos}: unknown identifier `{name}`")]
    UnknownIdentifier { pos: Pos, name: String },
    #[error("{pos}: unknown type `{name}`")]
    UnknownType { pos: Pos, name: String },
    #[error("{pos}: no type in the universe has a member `{name}` with {arity} argument(s)")]
    UnknownMember { pos: Pos, name: String, arity: usize },
    #[error("{pos}: arity mismatch for `{name}`: expected {expected}, found {found}")]
    ArityMismatch { pos: Pos, name: String, expected: usize, found: usize },
    #[error("{pos}: {msg}")]
    Untypable { pos: Pos, msg: String },
    #[error("internal error: descriptor collision for `{method}`: {descriptor}")]
    DescriptorCollision { method: String, descriptor: String },
    #[error("invalid class table: {0}")]
    Table(String),
}

impl Error {
    pub fn pos(&self) -> Option<Pos> {
        match self {
            Error::Syntax { pos, .. }
            | Error::UnsupportedFeature { pos, .. }
            | Error::UnknownImport { pos, .. }
            | Error::DuplicateClass { pos, .. }
            | Error::DuplicateName { pos, .. }
            | Error::UnknownIdentifier { pos, .. }
            | Error::UnknownType { pos, .. }
            | Error::UnknownMember { pos, .. }
            | Error::ArityMismatch { pos, .. }
            | Error::Untypable { pos, .. } => Some(*pos),
            Error::DescriptorCollision { .. } | Error::Table(_) => None,
        }
    }

    /// Untypable input as opposed to malformed input or configuration.
    pub fn is_type_error(&self) -> bool {
        matches!(
            self,
            Error::Untypable { .. }
                | Error::UnknownIdentifier { .. }
                | Error::UnknownMember { .. }
                | Error::ArityMismatch { .. }
                | Error::UnknownType { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
