use std::fmt;

use thiserror::Error;

use crate::domain::Sym;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("broken configuration with no pieces")]
    EmptyBroken,
    #[error("primitive {0} does not occur in the given point")]
    NotInContext(String),
    #[error("factors {0} and {1} do not meet at a common point")]
    FactorMismatch(String, String),
}

/// Where in a flow system a violation was found.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Location {
    Point(Sym),
    Moduli(Sym, Sym),
    Component(Sym, Sym, Sym),
    Declare(String),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Point(p) => write!(f, "critical point {p}"),
            Location::Moduli(a, b) => write!(f, "moduli {a} {b}"),
            Location::Component(a, b, c) => write!(f, "component {c} of moduli {a} {b}"),
            Location::Declare(k) => write!(f, "declare {k}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViolationKind {
    UnknownPoint,
    Duplicate,
    Acyclicity,
    IndexMonotonicity,
    Dimension,
    Incidence,
    FaceOfFace,
    Declaration,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ViolationKind::UnknownPoint => "unknown point",
            ViolationKind::Duplicate => "duplicate",
            ViolationKind::Acyclicity => "acyclicity",
            ViolationKind::IndexMonotonicity => "index monotonicity",
            ViolationKind::Dimension => "dimension",
            ViolationKind::Incidence => "incidence",
            ViolationKind::FaceOfFace => "face-of-face",
            ViolationKind::Declaration => "declaration",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Violation {
    pub kind: ViolationKind,
    pub location: Location,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.kind, self.location, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error("invalid flow system ({} violations)", .0.len())]
    Invalid(Vec<Violation>),
    #[error("missing declaration for {address}")]
    MissingDeclaration { address: String },
    #[error("inconsistent data at {address}: {message}")]
    Inconsistent { address: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StratError {
    #[error("{0} is not above {1}")]
    NotComparable(String, String),
    #[error("no moduli space at {0}")]
    Lookup(String),
    #[error("{0} is not a point of {1}")]
    Membership(String, String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CategoryError {
    #[error("level {level} out of range 0..={max}")]
    LevelOutOfRange { level: usize, max: usize },
    #[error("0-cells have no source or target")]
    NoBoundary,
    #[error("cells of levels {0} and {1} cannot be composed")]
    LevelMismatch(usize, usize),
    #[error("composition index {p} must be below level {level}")]
    BadIndex { p: usize, level: usize },
    #[error("cells are not composable along a {0}-cell")]
    NotComposable(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("sphere dimension must be at least 1")]
    BadDimension,
    #[error("bounds out of range: {0}")]
    Bounds(String),
    #[error("no valid system found after {0} attempts")]
    Exhausted(usize),
}
