//! Shared vocabulary: critical points, points of compactified moduli
//! spaces, addresses, cells and their normal forms.
//!
//! A point is an intensional tree. Leaves are primitive critical points or
//! the single point of a stationary space; inner nodes are broken
//! configurations. Equality in the category is decided on [`NormalCell`].

use std::cmp::{Ordering, Reverse};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_rational::Ratio;
use num_traits::Zero;

use crate::error::StructureError;

/// Exact Morse values.
pub type Value = Ratio<i64>;

/// Interned identifier.
pub type Sym = Arc<str>;

/// Where a critical point lives.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Home {
    /// The base manifold.
    Base,
    /// A compactified moduli space.
    Moduli(ModuliAddress),
}

/// One segment of a breaking-key chain: a value compared in descending
/// order, then a rendering.
pub type KeyPart = (Reverse<Value>, Sym);

/// A named critical point with its Morse index and value.
///
/// Identity is the `id` alone; ids are globally unique because every
/// derived id embeds the rendering of its home.
#[derive(Clone, Debug)]
pub struct CritPoint {
    pub id: Sym,
    pub index: u32,
    pub value: Value,
    pub home: Home,
    key: Vec<KeyPart>,
}

impl CritPoint {
    pub fn new(id: impl Into<Sym>, index: u32, value: Value, home: Home) -> Self {
        let id = id.into();
        let mut key = Vec::new();
        if let Home::Moduli(addr) = &home {
            for (src, dst) in &addr.rows {
                key.push((Reverse(src.value()), Sym::from(src.to_string())));
                key.push((Reverse(dst.value()), Sym::from(dst.to_string())));
            }
        }
        key.push((Reverse(value), id.clone()));
        CritPoint {
            id,
            index,
            value,
            home,
            key,
        }
    }

    /// Chain of (value, rendering) pairs from the outermost history row
    /// down to the point itself.
    pub fn key(&self) -> &[KeyPart] {
        &self.key
    }
}

impl PartialEq for CritPoint {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}
impl Eq for CritPoint {}
impl Hash for CritPoint {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.id.hash(state)
    }
}
impl PartialOrd for CritPoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for CritPoint {
    fn cmp(&self, other: &Self) -> Ordering {
        self.id.cmp(&other.id)
    }
}

/// A point of a compactified moduli space.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Point {
    Primitive(Arc<CritPoint>),
    /// Broken configuration, pieces in flow order.
    Broken(Vec<Point>),
    /// The unique point of the stationary space over the inner point.
    Stationary(Box<Point>),
}

impl Point {
    pub fn prim(c: CritPoint) -> Point {
        Point::Primitive(Arc::new(c))
    }

    pub fn stationary(p: Point) -> Point {
        Point::Stationary(Box::new(p))
    }

    pub fn broken(pieces: Vec<Point>) -> Point {
        Point::Broken(pieces)
    }

    /// Morse value: sum over primitive pieces, zero on stationary points.
    pub fn value(&self) -> Value {
        match self {
            Point::Primitive(c) => c.value,
            Point::Broken(ps) => ps.iter().fold(Value::zero(), |a, p| a + p.value()),
            Point::Stationary(_) => Value::zero(),
        }
    }

    /// Index additivity over pieces; stationary points have index 0.
    pub fn product_index(&self) -> u32 {
        match self {
            Point::Primitive(c) => c.index,
            Point::Broken(ps) => ps.iter().map(Point::product_index).sum(),
            Point::Stationary(_) => 0,
        }
    }

    pub fn is_stationary(&self) -> bool {
        matches!(self, Point::Stationary(_))
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Primitive(c) => write!(f, "{}", c.id),
            Point::Broken(ps) => {
                write!(f, "(")?;
                for (i, p) in ps.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, ")")
            }
            Point::Stationary(p) => write!(f, "1[{p}]"),
        }
    }
}

/// Flattens every level of nesting, left to right. Leaves are primitives
/// and stationary points.
pub fn flatten_point(p: &Point) -> Result<Vec<Point>, StructureError> {
    let mut out = Vec::new();
    flatten_into(p, &mut out)?;
    Ok(out)
}

fn flatten_into(p: &Point, out: &mut Vec<Point>) -> Result<(), StructureError> {
    match p {
        Point::Broken(ps) => {
            if ps.is_empty() {
                return Err(StructureError::EmptyBroken);
            }
            for q in ps {
                flatten_into(q, out)?;
            }
        }
        _ => out.push(p.clone()),
    }
    Ok(())
}

/// Sort key of a primitive occurring in `context`: the chain of
/// (level, source, target) data of its home from the outermost row down,
/// ordered by descending Morse value so that flow order is preserved.
pub fn breaking_key(p: &CritPoint, context: &Point) -> Result<Vec<KeyPart>, StructureError> {
    let leaves = flatten_point(context)?;
    let found = leaves.iter().any(|l| match l {
        Point::Primitive(c) => c.id == p.id,
        _ => false,
    });
    if !found {
        return Err(StructureError::NotInContext(p.id.to_string()));
    }
    Ok(p.key().to_vec())
}

/// Canonical form of a point: flattened, identity-free, position-sorted.
pub fn normalize_point(p: &Point) -> Point {
    match p {
        Point::Primitive(_) => p.clone(),
        Point::Stationary(inner) => Point::stationary(normalize_point(inner)),
        Point::Broken(_) => {
            let mut leaves = Vec::new();
            collect_leaves(p, &mut leaves);
            let mut moving: Vec<Arc<CritPoint>> = Vec::new();
            let mut still: Vec<Point> = Vec::new();
            for leaf in leaves {
                match leaf {
                    Point::Primitive(c) => moving.push(c),
                    Point::Stationary(inner) => still.push(normalize_point(&inner)),
                    Point::Broken(_) => unreachable!("leaves are never broken"),
                }
            }
            if !moving.is_empty() {
                moving.sort_by(|a, b| a.key().cmp(b.key()));
                if moving.len() == 1 {
                    Point::Primitive(moving.pop().unwrap())
                } else {
                    Point::Broken(moving.into_iter().map(Point::Primitive).collect())
                }
            } else if still.is_empty() {
                // empty broken configuration; keep it as is
                p.clone()
            } else {
                still.sort();
                still.dedup();
                if still.len() == 1 {
                    Point::stationary(still.pop().unwrap())
                } else {
                    Point::stationary(normalize_point(&Point::Broken(still)))
                }
            }
        }
    }
}

fn collect_leaves(p: &Point, out: &mut Vec<Point>) {
    match p {
        Point::Broken(ps) => ps.iter().for_each(|q| collect_leaves(q, out)),
        _ => out.push(p.clone()),
    }
}

/// The source/target history of an address, innermost level last.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct History {
    /// Entries for levels l-2 down to 0.
    pub sources: Vec<Point>,
    pub targets: Vec<Point>,
}

/// Address of an iterated moduli space M(x_{l-1}, y_{l-1}, f_{l-1}[...]).
///
/// `rows[j]` holds the pair (x_j, y_j). An empty row list denotes the base
/// manifold.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModuliAddress {
    pub rows: Vec<(Point, Point)>,
}

impl ModuliAddress {
    pub fn base() -> Self {
        ModuliAddress { rows: Vec::new() }
    }

    pub fn level(&self) -> usize {
        self.rows.len()
    }

    pub fn is_base(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn source(&self) -> Option<&Point> {
        self.rows.last().map(|r| &r.0)
    }

    pub fn target(&self) -> Option<&Point> {
        self.rows.last().map(|r| &r.1)
    }

    pub fn history(&self) -> History {
        let n = self.rows.len().saturating_sub(1);
        History {
            sources: self.rows[..n].iter().rev().map(|r| r.0.clone()).collect(),
            targets: self.rows[..n].iter().rev().map(|r| r.1.clone()).collect(),
        }
    }

    pub fn child(&self, src: Point, dst: Point) -> Self {
        let mut rows = self.rows.clone();
        rows.push((src, dst));
        ModuliAddress { rows }
    }

    pub fn parent(&self) -> Option<Self> {
        if self.rows.is_empty() {
            return None;
        }
        Some(ModuliAddress {
            rows: self.rows[..self.rows.len() - 1].to_vec(),
        })
    }

    pub fn normalized(&self) -> Self {
        ModuliAddress {
            rows: self
                .rows
                .iter()
                .map(|(a, b)| (normalize_point(a), normalize_point(b)))
                .collect(),
        }
    }

    /// Lookup key: rows rendered as `src>dst` joined by `/`.
    pub fn key(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for ModuliAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rows.is_empty() {
            return write!(f, "base");
        }
        for (i, (a, b)) in self.rows.iter().enumerate() {
            if i > 0 {
                write!(f, "/")?;
            }
            write!(f, "{a}>{b}")?;
        }
        Ok(())
    }
}

/// True iff the address denotes a stationary space M(xi, xi).
pub fn is_stationary(a: &ModuliAddress) -> bool {
    match a.rows.last() {
        Some((s, t)) => normalize_point(s) == normalize_point(t),
        None => false,
    }
}

/// An l-cell: a point together with the moduli space it lives in.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub top: Point,
    pub space: ModuliAddress,
}

impl Cell {
    pub fn new(top: Point, space: ModuliAddress) -> Self {
        Cell { top, space }
    }

    pub fn level(&self) -> usize {
        self.space.level()
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.space.is_base() {
            write!(f, "{}", self.top)
        } else {
            write!(f, "{} in {}", self.top, self.space)
        }
    }
}

/// A cell in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NormalCell(Cell);

impl NormalCell {
    pub fn cell(&self) -> &Cell {
        &self.0
    }

    pub fn into_cell(self) -> Cell {
        self.0
    }

    pub fn level(&self) -> usize {
        self.0.level()
    }
}

impl std::ops::Deref for NormalCell {
    type Target = Cell;
    fn deref(&self) -> &Cell {
        &self.0
    }
}

impl fmt::Display for NormalCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Flatten, drop stationary pieces, sort, and rewrite the address.
pub fn normalize(c: &Cell) -> NormalCell {
    NormalCell(Cell {
        top: normalize_point(&c.top),
        space: c.space.normalized(),
    })
}
