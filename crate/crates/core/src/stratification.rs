//! Face structure of compactified moduli spaces: components, strata,
//! dimensions, depth and validation of level-0 flow data.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::domain::{is_stationary, normalize_point, ModuliAddress, Point, Sym};
use crate::error::{Location, StratError, Violation, ViolationKind};
use crate::tower::Tower;

/// Shapes of connected components that the engine knows how to handle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Shape {
    Point,
    Interval,
    Circle,
    /// A k-sphere, k >= 2.
    SphereLike(u32),
    Declared,
}

impl Shape {
    /// Intrinsic dimension, if the shape fixes one.
    pub fn dim(self) -> Option<u32> {
        match self {
            Shape::Point => Some(0),
            Shape::Interval | Shape::Circle => Some(1),
            Shape::SphereLike(k) => Some(k),
            Shape::Declared => None,
        }
    }

    pub fn is_closed(self) -> bool {
        matches!(self, Shape::Point | Shape::Circle | Shape::SphereLike(_))
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Point => write!(f, "Point"),
            Shape::Interval => write!(f, "Interval"),
            Shape::Circle => write!(f, "Circle"),
            Shape::SphereLike(k) => write!(f, "SphereLike {k}"),
            Shape::Declared => write!(f, "Declared"),
        }
    }
}

/// One factor of a broken configuration: component `comp` of the moduli
/// space from `src` to `dst`, all referred to by rendering.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Piece {
    pub comp: Sym,
    pub src: Sym,
    pub dst: Sym,
}

impl fmt::Display for Piece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}>{}", self.comp, self.src, self.dst)
    }
}

/// A connected component of an open unparametrized trajectory space.
///
/// `endpoints` lists the two boundary configurations of an interval;
/// `faces` lists the codimension-one faces of a declared component (empty
/// means every face of the ambient space).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub id: Sym,
    pub shape: Shape,
    pub endpoints: Vec<Vec<Piece>>,
    pub faces: Vec<Vec<Piece>>,
}

impl Component {
    pub fn new(id: impl Into<Sym>, shape: Shape) -> Self {
        Component {
            id: id.into(),
            shape,
            endpoints: Vec::new(),
            faces: Vec::new(),
        }
    }

    pub fn with_endpoints(mut self, endpoints: Vec<Vec<Piece>>) -> Self {
        self.endpoints = endpoints;
        self
    }

    /// Dimension inside an ambient space of dimension `ambient`.
    pub fn dim_in(&self, ambient: u32) -> u32 {
        self.shape.dim().unwrap_or(ambient)
    }
}

/// A stratum of a compactified moduli space: a chain of critical points
/// with one component per segment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stratum {
    pub ambient: ModuliAddress,
    pub chain: Vec<Point>,
    pub components: Vec<Sym>,
    pub dim: u32,
}

impl Stratum {
    pub fn breaks(&self) -> usize {
        self.chain.len().saturating_sub(2)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasePoint {
    pub id: Sym,
    pub index: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Moduli {
    pub src: Sym,
    pub dst: Sym,
    pub components: Vec<Component>,
}

/// Level-0 combinatorial Morse-Smale data.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FlowSystem {
    pub points: Vec<BasePoint>,
    pub moduli: Vec<Moduli>,
}

impl FlowSystem {
    pub fn point(&self, id: &str) -> Option<&BasePoint> {
        self.points.iter().find(|p| &*p.id == id)
    }

    pub fn index_of(&self, id: &str) -> Option<u32> {
        self.point(id).map(|p| p.index)
    }

    /// Dimension of the base manifold, read off as the top Morse index.
    pub fn dim(&self) -> u32 {
        self.points.iter().map(|p| p.index).max().unwrap_or(0)
    }

    pub fn components(&self, src: &str, dst: &str) -> &[Component] {
        self.moduli
            .iter()
            .find(|m| &*m.src == src && &*m.dst == dst)
            .map(|m| m.components.as_slice())
            .unwrap_or(&[])
    }

    /// Strict order: `x > y` iff the compactified space is nonempty, i.e. a
    /// chain of nonempty open spaces leads from x to y.
    pub fn above(&self, x: &str, y: &str) -> bool {
        if x == y {
            return false;
        }
        let mut seen = BTreeSet::new();
        let mut stack = vec![x.to_string()];
        while let Some(u) = stack.pop() {
            for m in &self.moduli {
                if *m.src == *u && !m.components.is_empty() {
                    if *m.dst == *y {
                        return true;
                    }
                    if seen.insert(m.dst.to_string()) {
                        stack.push(m.dst.to_string());
                    }
                }
            }
        }
        false
    }
}

/// Dimension of the compactified space from `x` to `z`.
pub fn moduli_dimension(s: &FlowSystem, x: &str, z: &str) -> Result<u32, StratError> {
    if !s.above(x, z) {
        return Err(StratError::NotComparable(x.into(), z.into()));
    }
    let ix = s.index_of(x).unwrap_or(0);
    let iz = s.index_of(z).unwrap_or(0);
    Ok(ix - iz - 1)
}

/// Strata of a built moduli space and the closure relation among them:
/// `(i, j)` in `faces` means stratum i lies in the closure of stratum j.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrataView {
    pub strata: Vec<Stratum>,
    pub faces: Vec<(usize, usize)>,
    /// Number of codimension-one faces.
    pub k: usize,
}

pub fn boundary_strata(a: &ModuliAddress, tower: &Tower) -> Result<StrataView, StratError> {
    let a = a.normalized();
    if is_stationary(&a) {
        let xi = a.source().cloned().unwrap();
        return Ok(StrataView {
            strata: vec![Stratum {
                ambient: a.clone(),
                chain: vec![xi.clone(), xi],
                components: vec![Sym::from("stationary")],
                dim: 0,
            }],
            faces: Vec::new(),
            k: 0,
        });
    }
    let space = tower
        .space(&a)
        .ok_or_else(|| StratError::Lookup(a.to_string()))?;
    let k = space
        .strata
        .iter()
        .filter(|s| s.dim + 1 == space.dim)
        .count();
    Ok(StrataView {
        strata: space.strata.clone(),
        faces: space.faces.clone(),
        k,
    })
}

/// Number of breaks of a point of `a`.
pub fn depth(p: &Point, a: &ModuliAddress, tower: &Tower) -> Result<usize, StratError> {
    let a = a.normalized();
    let p = normalize_point(p);
    if is_stationary(&a) {
        if p == Point::stationary(normalize_point(a.source().unwrap())) {
            return Ok(0);
        }
        return Err(StratError::Membership(p.to_string(), a.to_string()));
    }
    let space = tower
        .space(&a)
        .ok_or_else(|| StratError::Lookup(a.to_string()))?;
    space
        .crit
        .iter()
        .find(|c| c.normal == p)
        .map(|c| c.stratum.map_or(0, |k| space.strata[k].breaks()))
        .ok_or_else(|| StratError::Membership(p.to_string(), a.to_string()))
}

fn valid_id(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

/// Checks a level-0 flow system; an empty list means valid.
pub fn validate_flow_system(s: &FlowSystem) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |kind, location, message: String| {
        out.push(Violation {
            kind,
            location,
            message,
        })
    };

    let mut ids = BTreeMap::new();
    for p in &s.points {
        if !valid_id(&p.id) {
            push(
                ViolationKind::UnknownPoint,
                Location::Point(p.id.clone()),
                "identifiers use letters, digits, '_' and '\\''".into(),
            );
        }
        if ids.insert(p.id.clone(), p.index).is_some() {
            push(
                ViolationKind::Duplicate,
                Location::Point(p.id.clone()),
                "critical point declared twice".into(),
            );
        }
    }

    let mut seen_pairs = BTreeSet::new();
    for m in &s.moduli {
        let here = Location::Moduli(m.src.clone(), m.dst.clone());
        let (Some(&is), Some(&id)) = (ids.get(&m.src), ids.get(&m.dst)) else {
            push(
                ViolationKind::UnknownPoint,
                here,
                "moduli section names an undeclared critical point".into(),
            );
            continue;
        };
        if !seen_pairs.insert((m.src.clone(), m.dst.clone())) {
            push(
                ViolationKind::Duplicate,
                here.clone(),
                "moduli section repeated".into(),
            );
        }
        if m.src == m.dst {
            push(
                ViolationKind::Acyclicity,
                here.clone(),
                "stationary spaces are implicit and cannot be listed".into(),
            );
            continue;
        }
        if m.components.is_empty() {
            continue;
        }
        if is <= id {
            push(
                ViolationKind::IndexMonotonicity,
                here.clone(),
                format!("index {is} of source does not exceed index {id} of target"),
            );
            continue;
        }
        let dim = is - id - 1;
        let mut cids = BTreeSet::new();
        for c in &m.components {
            let cl = Location::Component(m.src.clone(), m.dst.clone(), c.id.clone());
            if !valid_id(&c.id) {
                push(
                    ViolationKind::UnknownPoint,
                    cl.clone(),
                    "bad component id".into(),
                );
            }
            if !cids.insert(c.id.clone()) {
                push(
                    ViolationKind::Duplicate,
                    cl.clone(),
                    "component id repeated".into(),
                );
            }
            if let Some(d) = c.shape.dim() {
                if d != dim {
                    push(
                        ViolationKind::Dimension,
                        cl.clone(),
                        format!("shape {} has dimension {d}, expected {dim}", c.shape),
                    );
                }
            }
            if let Shape::SphereLike(k) = c.shape {
                if k < 2 {
                    push(
                        ViolationKind::Dimension,
                        cl.clone(),
                        "SphereLike needs k >= 2".into(),
                    );
                }
            }
            match c.shape {
                Shape::Interval => {
                    if c.endpoints.len() != 2 {
                        push(
                            ViolationKind::Incidence,
                            cl.clone(),
                            format!("interval has {} endpoints", c.endpoints.len()),
                        );
                    }
                    if c.endpoints.len() == 2 && c.endpoints[0] == c.endpoints[1] {
                        push(
                            ViolationKind::Incidence,
                            cl.clone(),
                            "endpoints coincide".into(),
                        );
                    }
                }
                _ => {
                    if !c.endpoints.is_empty() {
                        push(
                            ViolationKind::Incidence,
                            cl.clone(),
                            "only intervals carry endpoints".into(),
                        );
                    }
                }
            }
            if !c.faces.is_empty() && c.shape != Shape::Declared {
                push(
                    ViolationKind::Incidence,
                    cl.clone(),
                    "only declared components carry faces".into(),
                );
            }
            for e in c.endpoints.iter().chain(c.faces.iter()) {
                if let Err(msg) = check_chain(s, &m.src, &m.dst, e, c.shape == Shape::Interval) {
                    push(ViolationKind::Incidence, cl.clone(), msg);
                }
            }
        }
    }

    // acyclicity of the order (index monotonicity already implies it, but
    // the check is cheap and catches corrupted indices)
    for p in &s.points {
        if s.above(&p.id, &p.id) || cycle_through(s, &p.id) {
            push(
                ViolationKind::Acyclicity,
                Location::Point(p.id.clone()),
                "the order relation has a cycle".into(),
            );
        }
    }

    // face-of-face: each codimension-one configuration of a space is a face
    // of some component; in dimension one it is the endpoint of exactly one
    // interval
    for x in &s.points {
        for z in &s.points {
            if x.id == z.id || x.index <= z.index {
                continue;
            }
            let dim = x.index - z.index - 1;
            if dim == 0 {
                continue;
            }
            let here = Location::Moduli(x.id.clone(), z.id.clone());
            let configs = codim_one(s, &x.id, &z.id);
            let comps = s.components(&x.id, &z.id);
            if configs.is_empty() {
                for c in comps {
                    if c.shape == Shape::Interval {
                        push(
                            ViolationKind::FaceOfFace,
                            Location::Component(x.id.clone(), z.id.clone(), c.id.clone()),
                            "interval in a space without boundary".into(),
                        );
                    }
                }
                continue;
            }
            if dim == 1 {
                let mut count: BTreeMap<Vec<Piece>, usize> = BTreeMap::new();
                for c in comps.iter().filter(|c| c.shape == Shape::Interval) {
                    for e in &c.endpoints {
                        *count.entry(e.clone()).or_default() += 1;
                    }
                }
                for cfg in &configs {
                    match count.get(cfg).copied().unwrap_or(0) {
                        1 => {}
                        0 => push(
                            ViolationKind::FaceOfFace,
                            here.clone(),
                            format!("broken configuration {} bounds no interval", show(cfg)),
                        ),
                        n => push(
                            ViolationKind::FaceOfFace,
                            here.clone(),
                            format!("broken configuration {} bounds {n} intervals", show(cfg)),
                        ),
                    }
                }
                for e in count.keys() {
                    if !configs.contains(e) {
                        push(
                            ViolationKind::Incidence,
                            here.clone(),
                            format!("endpoint {} is not a boundary configuration", show(e)),
                        );
                    }
                }
            } else {
                let declared: Vec<&Component> = comps
                    .iter()
                    .filter(|c| c.shape == Shape::Declared)
                    .collect();
                if declared.is_empty() {
                    push(
                        ViolationKind::FaceOfFace,
                        here.clone(),
                        "space has boundary but no declared component to carry it".into(),
                    );
                } else if declared.len() > 1 {
                    for cfg in &configs {
                        let n = declared.iter().filter(|c| c.faces.contains(cfg)).count();
                        if n == 0 {
                            push(
                                ViolationKind::FaceOfFace,
                                here.clone(),
                                format!("face {} belongs to no declared component", show(cfg)),
                            );
                        }
                    }
                }
            }
        }
    }

    out.sort();
    out.dedup();
    out
}

fn show(cfg: &[Piece]) -> String {
    let parts: Vec<String> = cfg.iter().map(|p| p.to_string()).collect();
    format!("({})", parts.join(", "))
}

fn cycle_through(s: &FlowSystem, start: &str) -> bool {
    // the relation is given by nonempty sections; look for a path back
    let mut seen = BTreeSet::new();
    let mut stack: Vec<Sym> = s
        .moduli
        .iter()
        .filter(|m| &*m.src == start && !m.components.is_empty())
        .map(|m| m.dst.clone())
        .collect();
    while let Some(u) = stack.pop() {
        if &*u == start {
            return true;
        }
        if !seen.insert(u.clone()) {
            continue;
        }
        for m in &s.moduli {
            if m.src == u && !m.components.is_empty() {
                stack.push(m.dst.clone());
            }
        }
    }
    false
}

/// Codimension-one broken configurations of M(x, z): pairs of components
/// through one intermediate point, restricted to zero-dimensional factors
/// when `points_only`.
fn codim_one(s: &FlowSystem, x: &str, z: &str) -> Vec<Vec<Piece>> {
    let mut out = Vec::new();
    for y in &s.points {
        if &*y.id == x || &*y.id == z {
            continue;
        }
        let first = s.components(x, &y.id);
        let second = s.components(&y.id, z);
        for a in first {
            for b in second {
                out.push(vec![
                    Piece {
                        comp: a.id.clone(),
                        src: x.into(),
                        dst: y.id.clone(),
                    },
                    Piece {
                        comp: b.id.clone(),
                        src: y.id.clone(),
                        dst: z.into(),
                    },
                ]);
            }
        }
    }
    out.sort();
    out
}

fn check_chain(
    s: &FlowSystem,
    src: &str,
    dst: &str,
    chain: &[Piece],
    points_only: bool,
) -> Result<(), String> {
    if chain.len() < 2 {
        return Err(format!("configuration {} is not broken", show(chain)));
    }
    if &*chain[0].src != src || &*chain[chain.len() - 1].dst != dst {
        return Err(format!(
            "configuration {} does not run from {src} to {dst}",
            show(chain)
        ));
    }
    for w in chain.windows(2) {
        if w[0].dst != w[1].src {
            return Err(format!(
                "configuration {} breaks at {} but continues from {}",
                show(chain),
                w[0].dst,
                w[1].src
            ));
        }
    }
    for p in chain {
        let Some(c) = s.components(&p.src, &p.dst).iter().find(|c| c.id == p.comp) else {
            return Err(format!(
                "no component {} in moduli {} {}",
                p.comp, p.src, p.dst
            ));
        };
        if points_only && c.shape != Shape::Point {
            return Err(format!("endpoint factor {p} is not a point"));
        }
    }
    if points_only && chain.len() != 2 {
        return Err(format!(
            "interval endpoint {} must have two factors",
            show(chain)
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::deformed_sphere_system;

    #[test]
    fn deformed_sphere_dimensions() {
        let (s, _) = deformed_sphere_system();
        assert_eq!(moduli_dimension(&s, "x", "w"), Ok(1));
        assert_eq!(moduli_dimension(&s, "x", "y"), Ok(0));
        assert!(moduli_dimension(&s, "x", "x").is_err());
        assert!(moduli_dimension(&s, "w", "x").is_err());
    }

    #[test]
    fn deformed_sphere_is_valid() {
        let (s, _) = deformed_sphere_system();
        assert_eq!(validate_flow_system(&s), vec![]);
    }

    #[test]
    fn equal_indices_violate_monotonicity() {
        let s = FlowSystem {
            points: vec![
                BasePoint {
                    id: "x".into(),
                    index: 1,
                },
                BasePoint {
                    id: "y".into(),
                    index: 1,
                },
            ],
            moduli: vec![Moduli {
                src: "x".into(),
                dst: "y".into(),
                components: vec![Component::new("c", Shape::Point)],
            }],
        };
        let v = validate_flow_system(&s);
        assert!(v.iter().any(|v| v.kind == ViolationKind::IndexMonotonicity));
    }
}
