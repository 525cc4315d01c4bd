use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// A law violated by a proposed composition table.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CategoryViolation {
    #[error("duplicate object `{0}`")]
    DuplicateObject(String),
    #[error("duplicate morphism `{0}`")]
    DuplicateMorphism(String),
    #[error("morphism `{morphism}` mentions unknown object `{object}`")]
    UnknownEndpoint { morphism: String, object: String },
    #[error("object `{0}` has no identity")]
    MissingIdentity(String),
    #[error("identity `{morphism}` of `{object}` is not an endomorphism of it")]
    BadIdentity { object: String, morphism: String },
    #[error("composite `{g} . {f}` mentions unknown morphism `{unknown}`")]
    UnknownMorphism { g: String, f: String, unknown: String },
    #[error("`{g} . {f}` is ill-typed: source of `{g}` is not the target of `{f}`")]
    IllTyped { g: String, f: String },
    #[error("`{g} . {f}` is declared as `{h}` which has the wrong endpoints")]
    WrongEndpoints { g: String, f: String, h: String },
    #[error("`{g} . {f}` is declared twice with different values")]
    Conflicting { g: String, f: String },
    #[error("identity law fails at `{g} . {f}`")]
    IdentityLaw { g: String, f: String },
    #[error("composite `{g} . {f}` is missing")]
    MissingComposite { g: String, f: String },
    #[error("associativity fails at `{h} . {g} . {f}`")]
    NotAssociative { h: String, g: String, f: String },
    #[error("monoid table: {0}")]
    Monoid(String),
    #[error("too many morphisms ({0}); sieves are limited to 64 arrows per site")]
    TooLarge(usize),
}

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid category: {0}")]
    InvalidCategory(#[from] CategoryViolation),
    #[error("unknown site `{0}`")]
    UnknownSite(String),
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("unknown morphism `{0}`")]
    UnknownMorphism(String),
    #[error("invalid presheaf: {0}")]
    InvalidPresheaf(String),
    #[error("not a natural transformation: {0}")]
    NotNatural(String),
    #[error("search too large: more than {bound} candidates")]
    SearchTooLarge { bound: u64 },
    #[error("mismatched maps: {0}")]
    Mismatch(String),
    #[error("not connected: {0}")]
    NotConnected(String),
    #[error("missing adjoint: {0}")]
    MissingAdjoint(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("internal law failure: {0}")]
    LawFailure(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown statement `{0}`")]
    UnknownStatement(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Error {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// True for failures caused by an enumeration budget rather than by the data.
    pub fn is_bound(&self) -> bool {
        matches!(self, Error::SearchTooLarge { .. })
    }
}
