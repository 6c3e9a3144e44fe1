//! Combinatorial iterated Morse moduli spaces and the almost-strict
//! n-category of their cells.

pub mod axioms;
pub mod category;
pub mod domain;
pub mod error;
pub mod format;
pub mod generators;
pub mod stratification;
pub mod tower;

pub use axioms::{check_all, check_axiom, check_globular, AxiomReport, Tag};
pub use category::{Category, GlobularSet};
pub use domain::{
    breaking_key, flatten_point, is_stationary, normalize, normalize_point, Cell, CritPoint,
    History, Home, ModuliAddress, NormalCell, Point, Sym, Value,
};
pub use error::{
    BuildError, CategoryError, GenError, Location, ParseError, StratError, StructureError,
    Violation, ViolationKind,
};
pub use generators::{deformed_sphere_system, random_system, sphere_system, GeneratorSpec};
pub use stratification::{
    boundary_strata, depth, moduli_dimension, validate_flow_system, BasePoint, Component,
    FlowSystem, Moduli, Piece, Shape, StrataView, Stratum,
};
pub use tower::{
    assign_values, build_tower, critical_points, derive_moduli, product_critical, CritInfo,
    DeclBlock, DeclCritical, Declarations, Space, Tower,
};
