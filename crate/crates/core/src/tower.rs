//! The recursive Morse data f_1, f_2, ... on iterated moduli spaces.
//!
//! A [`Space`] is a compactified moduli space together with its strata,
//! its critical points and the open trajectory spaces between them. The
//! children of a space are built from the flows of its parent, in order of
//! increasing dimension, so every segment space of a stratum exists before
//! the space that contains it.

use std::collections::{BTreeMap, BTreeSet};

use crate::domain::{
    is_stationary, normalize_point, CritPoint, Home, ModuliAddress, Point, Sym, Value,
};
use crate::error::{BuildError, StructureError};
use crate::stratification::{validate_flow_system, Component, FlowSystem, Piece, Shape, Stratum};

/// Interior critical point declared on a closed or declared component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeclCritical {
    pub comp: Sym,
    pub id: Sym,
    pub index: u32,
}

/// Declared Morse data for one moduli space: its components (levels >= 2)
/// and interior critical points of its components. `empty` declares a
/// space with no components at all.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DeclBlock {
    pub components: Vec<Component>,
    pub critical: Vec<DeclCritical>,
    pub empty: bool,
}

/// Declarations keyed by address rendering with whitespace removed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Declarations {
    pub blocks: BTreeMap<String, DeclBlock>,
}

fn strip(key: &str) -> String {
    key.chars().filter(|c| !c.is_whitespace()).collect()
}

impl Declarations {
    pub fn block(&self, key: &str) -> Option<&DeclBlock> {
        self.blocks.get(&strip(key))
    }

    pub fn block_mut(&mut self, key: &str) -> &mut DeclBlock {
        self.blocks.entry(strip(key)).or_default()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

/// A critical point of the Morse data on a space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CritInfo {
    /// The point as built: a primitive, or a broken tuple of factor points.
    pub raw: Point,
    pub normal: Point,
    /// Index in the ambient space; this is what dimensions are computed from.
    pub index: u32,
    /// Sum of the factor indices on the stratum.
    pub stratum_index: u32,
    pub value: Value,
    /// Stratum containing the point; `None` on the base manifold.
    pub stratum: Option<usize>,
    /// Per segment of the stratum, the factor's index in that segment space.
    pub factors: Vec<usize>,
    /// Component whose interior holds the point, for unbroken points.
    pub interior: Option<Sym>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Space {
    pub address: ModuliAddress,
    pub key: String,
    pub dim: u32,
    pub components: Vec<Component>,
    pub strata: Vec<Stratum>,
    /// Parent critical-point indices of each stratum chain.
    pub chains: Vec<Vec<usize>>,
    /// `(i, j)`: stratum i lies in the closure of stratum j, i != j.
    pub faces: Vec<(usize, usize)>,
    pub crit: Vec<CritInfo>,
    /// Critical points on the open stratum of each component.
    pub interiors: BTreeMap<Sym, Vec<usize>>,
    /// Components of the open trajectory spaces between critical points.
    pub flows: BTreeMap<(usize, usize), Vec<Component>>,
    pub flow_values: BTreeMap<(usize, usize, Sym), Value>,
    /// Flow components copied from a segment space, with the segment's
    /// critical point on them.
    pub inherited: BTreeMap<(usize, usize, Sym), Point>,
}

impl Space {
    pub fn level(&self) -> usize {
        self.address.level()
    }

    pub fn crit_index(&self, p: &Point) -> Option<usize> {
        let p = normalize_point(p);
        self.crit.iter().position(|c| c.normal == p)
    }

    /// Child address for a pair of critical points.
    pub fn child_address(&self, i: usize, j: usize) -> ModuliAddress {
        self.address
            .child(self.crit[i].normal.clone(), self.crit[j].normal.clone())
    }

    /// `i > j` in the order given by nonempty flows.
    pub fn above(&self, i: usize, j: usize) -> bool {
        let mut seen = BTreeSet::new();
        let mut stack = vec![i];
        while let Some(u) = stack.pop() {
            for (&(a, b), comps) in &self.flows {
                if a == u && !comps.is_empty() {
                    if b == j {
                        return true;
                    }
                    if seen.insert(b) {
                        stack.push(b);
                    }
                }
            }
        }
        false
    }

    fn open_stratum(&self, comp: &str) -> Option<usize> {
        self.strata
            .iter()
            .position(|s| s.breaks() == 0 && &*s.components[0] == comp)
    }

    fn find_stratum(&self, pieces: &[Piece]) -> Option<usize> {
        self.strata.iter().position(|s| {
            s.components.len() == pieces.len()
                && s.components.iter().zip(pieces).all(|(c, p)| *c == p.comp)
                && pieces.iter().enumerate().all(|(k, p)| {
                    s.chain[k].to_string() == *p.src && s.chain[k + 1].to_string() == *p.dst
                })
        })
    }

    /// Strata in the closure of the open stratum of `comp`, itself included.
    pub fn closure(&self, comp: &str) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        if let Some(o) = self.open_stratum(comp) {
            out.insert(o);
            for &(a, b) in &self.faces {
                if b == o {
                    out.insert(a);
                }
            }
        }
        out
    }
}

/// The fully built hierarchy of moduli spaces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tower {
    pub system: FlowSystem,
    pub decls: Declarations,
    spaces: BTreeMap<ModuliAddress, Space>,
    /// Addresses of built spaces per level; level 0 is the base manifold.
    pub levels: Vec<Vec<ModuliAddress>>,
}

impl Tower {
    pub fn space(&self, a: &ModuliAddress) -> Option<&Space> {
        self.spaces.get(a)
    }

    pub fn base(&self) -> &Space {
        &self.spaces[&ModuliAddress::base()]
    }

    pub fn spaces(&self) -> impl Iterator<Item = &Space> {
        self.levels.iter().flatten().map(|a| &self.spaces[a])
    }

    pub fn spaces_at(&self, level: usize) -> impl Iterator<Item = &Space> {
        self.levels
            .get(level)
            .into_iter()
            .flatten()
            .map(|a| &self.spaces[a])
    }

    /// Highest level carrying a built moduli space.
    pub fn top_level(&self) -> usize {
        self.levels.len() - 1
    }
}

/// Values for the open components of one ambient space: longest-path rank
/// in the chain graph plus a per-component tiebreak in (0, 1]. Stationary
/// pairs get 0.
pub fn assign_values(
    pairs: &[((usize, usize), Vec<Sym>)],
) -> Result<BTreeMap<(usize, usize, Sym), Value>, BuildError> {
    let moving: Vec<(usize, usize)> = pairs
        .iter()
        .filter(|((a, b), c)| a != b && !c.is_empty())
        .map(|(p, _)| *p)
        .collect();
    let mut rank: BTreeMap<(usize, usize), i64> = BTreeMap::new();
    fn visit(
        p: (usize, usize),
        moving: &[(usize, usize)],
        rank: &mut BTreeMap<(usize, usize), i64>,
        active: &mut BTreeSet<(usize, usize)>,
    ) -> Result<i64, BuildError> {
        if let Some(&r) = rank.get(&p) {
            return Ok(r);
        }
        if !active.insert(p) {
            return Err(BuildError::Inconsistent {
                address: format!("{}>{}", p.0, p.1),
                message: "cycle in the chain constraint graph".into(),
            });
        }
        let mut r = 0;
        for &q in moving.iter().filter(|q| q.0 == p.1) {
            r = r.max(1 + visit(q, moving, rank, active)?);
        }
        active.remove(&p);
        rank.insert(p, r);
        Ok(r)
    }
    let mut active = BTreeSet::new();
    for &p in &moving {
        visit(p, &moving, &mut rank, &mut active)?;
    }
    let n: i64 = pairs
        .iter()
        .filter(|((a, b), _)| a != b)
        .map(|(_, c)| c.len() as i64)
        .sum();
    let mut out = BTreeMap::new();
    let mut k = 0;
    for ((a, b), comps) in pairs {
        for c in comps {
            let v = if a == b {
                Value::from(0)
            } else {
                let v = Value::from(rank[&(*a, *b)]) + Value::new(n - k, n + 1);
                k += 1;
                v
            };
            out.insert((*a, *b, c.clone()), v);
        }
    }
    Ok(out)
}

/// Product of two critical points on composable factor spaces. A
/// stationary factor is absorbed.
pub fn product_critical(a: &Point, b: &Point) -> Result<Point, StructureError> {
    type Ends = (Vec<(Point, Point)>, Point, Point);
    fn ends(p: &Point) -> Option<Ends> {
        match p {
            Point::Primitive(c) => match &c.home {
                Home::Moduli(addr) => {
                    let (s, t) = addr.rows.last()?.clone();
                    Some((addr.rows[..addr.rows.len() - 1].to_vec(), s, t))
                }
                Home::Base => None,
            },
            Point::Broken(ps) => {
                let (h, s, _) = ends(ps.first()?)?;
                let (_, _, t) = ends(ps.last()?)?;
                Some((h, s, t))
            }
            Point::Stationary(_) => None,
        }
    }
    if !a.is_stationary() && !b.is_stationary() {
        let (ea, eb) = (ends(a), ends(b));
        let ok = match (&ea, &eb) {
            (Some((ha, _, ta)), Some((hb, sb, _))) => {
                ha == hb && normalize_point(ta) == normalize_point(sb)
            }
            _ => false,
        };
        if !ok {
            return Err(StructureError::FactorMismatch(a.to_string(), b.to_string()));
        }
    }
    Ok(normalize_point(&Point::broken(vec![a.clone(), b.clone()])))
}

/// Critical points of the Morse data on `a`. A stationary space has its
/// single point, with index and value 0.
pub fn critical_points(a: &ModuliAddress, tower: &Tower) -> Result<Vec<CritInfo>, BuildError> {
    let a = a.normalized();
    if is_stationary(&a) {
        let p = Point::stationary(a.source().cloned().unwrap());
        return Ok(vec![CritInfo {
            raw: p.clone(),
            normal: normalize_point(&p),
            index: 0,
            stratum_index: 0,
            value: Value::from(0),
            stratum: None,
            factors: Vec::new(),
            interior: None,
        }]);
    }
    tower
        .space(&a)
        .map(|s| s.crit.clone())
        .ok_or_else(|| BuildError::Inconsistent {
            address: a.to_string(),
            message: "no such moduli space".into(),
        })
}

/// Components of the open trajectory space from `p` to `q` inside the
/// built space `a`.
pub fn derive_moduli(
    a: &ModuliAddress,
    p: &Point,
    q: &Point,
    tower: &Tower,
) -> Result<Vec<Component>, BuildError> {
    let a = a.normalized();
    let (p, q) = (normalize_point(p), normalize_point(q));
    if p == q {
        return Ok(vec![Component::new("stationary", Shape::Point)]);
    }
    if is_stationary(&a) {
        return Ok(Vec::new());
    }
    let space = tower.space(&a).ok_or_else(|| BuildError::Inconsistent {
        address: a.to_string(),
        message: "no such moduli space".into(),
    })?;
    let lookup = |x: &Point| {
        space.crit_index(x).ok_or_else(|| BuildError::Inconsistent {
            address: a.to_string(),
            message: format!("{x} is not a critical point"),
        })
    };
    let (i, j) = (lookup(&p)?, lookup(&q)?);
    if space.level() == 0 {
        return Ok(space.flows.get(&(i, j)).cloned().unwrap_or_default());
    }
    let mut used = BTreeSet::new();
    let flow = derive_pair(space, i, j, &tower.spaces, &tower.decls, &mut used)?;
    Ok(flow.into_iter().map(|(c, _)| c).collect())
}

fn inconsistent(addr: &str, message: impl Into<String>) -> BuildError {
    BuildError::Inconsistent {
        address: addr.to_string(),
        message: message.into(),
    }
}

/// The point a critical point of `t` induces in the segment space of
/// stratum `e` spanning chain positions `lo..hi` of the point's own chain.
fn restrict(t: &Space, c: &CritInfo, e: usize, s: usize) -> Option<(ModuliAddress, Point)> {
    let own = &t.chains[c.stratum?];
    let coarse = &t.chains[e];
    let lo = own.iter().position(|&x| x == coarse[s])?;
    let hi = own.iter().position(|&x| x == coarse[s + 1])?;
    let pieces: Vec<Point> = match &c.raw {
        Point::Broken(ps) => ps[lo..hi].to_vec(),
        p => vec![p.clone()],
    };
    let parent = t.address.parent()?;
    let st = &t.strata[e];
    let addr = parent.child(st.chain[s].clone(), st.chain[s + 1].clone());
    Some((addr, normalize_point(&Point::broken(pieces))))
}

type Flow = Vec<(Component, Option<Point>)>;

fn fresh(comps: Vec<Component>) -> Flow {
    comps.into_iter().map(|c| (c, None)).collect()
}

/// Forced flow data, or `None` when a declaration is needed. Flow lines
/// between two critical points run inside the smallest closed stratum
/// containing both.
fn forced(t: &Space, a: usize, b: usize, spaces: &BTreeMap<ModuliAddress, Space>) -> Option<Flow> {
    let (ca, cb) = (&t.crit[a], &t.crit[b]);
    if ca.index <= cb.index {
        return Some(Vec::new());
    }
    let (sa, sb) = (ca.stratum?, cb.stratum?);
    let in_closure = |s: usize, e: usize| s == e || t.faces.contains(&(s, e));
    let meet = (0..t.strata.len())
        .filter(|&e| in_closure(sa, e) && in_closure(sb, e))
        .max_by_key(|&e| (t.strata[e].breaks(), std::cmp::Reverse(e)));
    let Some(e) = meet else {
        return Some(Vec::new());
    };
    let st = &t.strata[e];
    if st.breaks() == 0 {
        let comp = t.components.iter().find(|c| c.id == st.components[0])?;
        let inner = &t.interiors[&comp.id];
        let extremal = sa == e
            && sb == e
            && inner.len() == 2
            && ca.index == comp.dim_in(t.dim)
            && cb.index == 0;
        return match comp.shape {
            Shape::Interval if ca.index == 1 && cb.index == 0 && sa != e && sb != e => {
                Some(fresh(vec![Component::new("l", Shape::Point)]))
            }
            Shape::Circle if extremal => Some(fresh(vec![
                Component::new("l0", Shape::Point),
                Component::new("l1", Shape::Point),
            ])),
            Shape::SphereLike(k) if extremal => {
                let shape = if k == 2 {
                    Shape::Circle
                } else {
                    Shape::SphereLike(k - 1)
                };
                Some(fresh(vec![Component::new("l", shape)]))
            }
            Shape::Point => Some(Vec::new()),
            _ => None,
        };
    }
    let mut moved = Vec::new();
    for s in 0..st.components.len() {
        let (addr, pa) = restrict(t, ca, e, s)?;
        let (_, pb) = restrict(t, cb, e, s)?;
        if pa != pb {
            moved.push((addr, pa, pb));
        }
    }
    let [(addr, pa, pb)] = moved.as_slice() else {
        return None;
    };
    let seg = spaces.get(addr)?;
    let (i, j) = (seg.crit_index(pa)?, seg.crit_index(pb)?);
    let comps = seg.flows.get(&(i, j)).cloned().unwrap_or_default();
    comps
        .into_iter()
        .map(|c| {
            if c.shape != Shape::Point {
                return None;
            }
            let p = point_of(seg, i, j, &c.id);
            Some((c, Some(p)))
        })
        .collect()
}

/// The critical point on a `Point` component of the flows from i to j.
fn point_of(s: &Space, i: usize, j: usize, comp: &Sym) -> Point {
    if let Some(p) = s.inherited.get(&(i, j, comp.clone())) {
        return p.clone();
    }
    let address = s.child_address(i, j);
    let cp = CritPoint::new(
        format!("{comp}@{}", strip(&address.key())),
        0,
        s.flow_values[&(i, j, comp.clone())],
        Home::Moduli(address),
    );
    Point::prim(cp)
}

fn same_shapes(a: &[Component], b: &[Component]) -> bool {
    let mut x: Vec<Shape> = a.iter().map(|c| c.shape).collect();
    let mut y: Vec<Shape> = b.iter().map(|c| c.shape).collect();
    x.sort();
    y.sort();
    x == y
}

fn derive_pair(
    t: &Space,
    a: usize,
    b: usize,
    spaces: &BTreeMap<ModuliAddress, Space>,
    decls: &Declarations,
    used: &mut BTreeSet<String>,
) -> Result<Flow, BuildError> {
    let child = t.child_address(a, b);
    let key = strip(&child.key());
    let forced = forced(t, a, b, spaces);
    let declared = decls
        .block(&key)
        .filter(|d| d.empty || !d.components.is_empty());
    let comps = match (forced, declared) {
        (Some(f), Some(d)) => {
            used.insert(key.clone());
            let f: Vec<Component> = f.into_iter().map(|(c, _)| c).collect();
            if !same_shapes(&f, &d.components) {
                return Err(inconsistent(
                    &key,
                    "declared components contradict the forced flow data",
                ));
            }
            fresh(d.components.clone())
        }
        (None, Some(d)) => {
            used.insert(key.clone());
            fresh(d.components.clone())
        }
        (Some(f), None) => f,
        (None, None) => return Err(BuildError::MissingDeclaration { address: key }),
    };
    if !comps.is_empty() {
        let (ia, ib) = (t.crit[a].index, t.crit[b].index);
        if ia <= ib {
            return Err(inconsistent(&key, "flow against the index"));
        }
        for (c, _) in &comps {
            if let Some(d) = c.shape.dim() {
                if d != ia - ib - 1 {
                    return Err(inconsistent(
                        &key,
                        format!(
                            "component {} has dimension {d}, expected {}",
                            c.id,
                            ia - ib - 1
                        ),
                    ));
                }
            }
        }
    }
    Ok(comps)
}

fn base_space(s: &FlowSystem) -> Result<Space, BuildError> {
    let address = ModuliAddress::base();
    let crit: Vec<CritInfo> = s
        .points
        .iter()
        .map(|p| {
            let cp = CritPoint::new(
                p.id.clone(),
                p.index,
                Value::from(p.index as i64 + 1),
                Home::Base,
            );
            let pt = Point::prim(cp);
            CritInfo {
                raw: pt.clone(),
                normal: pt,
                index: p.index,
                stratum_index: p.index,
                value: Value::from(p.index as i64 + 1),
                stratum: None,
                factors: Vec::new(),
                interior: None,
            }
        })
        .collect();
    let mut flows = BTreeMap::new();
    for (i, x) in s.points.iter().enumerate() {
        for (j, y) in s.points.iter().enumerate() {
            let comps = s.components(&x.id, &y.id);
            if i != j && !comps.is_empty() {
                flows.insert((i, j), comps.to_vec());
            }
        }
    }
    let mut space = Space {
        key: address.key(),
        address,
        dim: s.dim(),
        components: Vec::new(),
        strata: Vec::new(),
        chains: Vec::new(),
        faces: Vec::new(),
        crit,
        interiors: BTreeMap::new(),
        flows,
        flow_values: BTreeMap::new(),
        inherited: BTreeMap::new(),
    };
    space.flow_values = flow_values(&space)?;
    Ok(space)
}

fn flow_values(s: &Space) -> Result<BTreeMap<(usize, usize, Sym), Value>, BuildError> {
    let pairs: Vec<((usize, usize), Vec<Sym>)> = s
        .flows
        .iter()
        .map(|(p, cs)| (*p, cs.iter().map(|c| c.id.clone()).collect()))
        .collect();
    assign_values(&pairs).map_err(|e| match e {
        BuildError::Inconsistent { message, .. } => inconsistent(&s.key, message),
        e => e,
    })
}

/// All chains `i = c0 > c1 > ... > ck = j` through nonempty flows of `s`.
fn chains(s: &Space, i: usize, j: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut path = vec![i];
    fn go(s: &Space, j: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let u = *path.last().unwrap();
        for (&(a, b), comps) in &s.flows {
            if a != u || comps.is_empty() {
                continue;
            }
            if b == j {
                path.push(b);
                out.push(path.clone());
                path.pop();
            } else if s.above(b, j) {
                path.push(b);
                go(s, j, path, out);
                path.pop();
            }
        }
    }
    go(s, j, &mut path, &mut out);
    out
}

fn build_child(
    parent: &Space,
    i: usize,
    j: usize,
    spaces: &BTreeMap<ModuliAddress, Space>,
    decls: &Declarations,
    used: &mut BTreeSet<String>,
) -> Result<Space, BuildError> {
    let address = parent.child_address(i, j);
    let key = strip(&address.key());
    let dim = parent.crit[i].index - parent.crit[j].index - 1;
    let components = parent.flows.get(&(i, j)).cloned().unwrap_or_default();
    let segment = |a: usize, b: usize| {
        spaces
            .get(&parent.child_address(a, b))
            .ok_or_else(|| inconsistent(&key, "segment space missing"))
    };

    // strata
    let mut raw_strata: Vec<(Vec<usize>, Vec<Sym>, u32)> = Vec::new();
    for chain in chains(parent, i, j) {
        let mut choices: Vec<Vec<(Sym, u32)>> = Vec::new();
        for w in chain.windows(2) {
            let d = parent.crit[w[0]].index - parent.crit[w[1]].index - 1;
            choices.push(
                parent.flows[&(w[0], w[1])]
                    .iter()
                    .map(|c| (c.id.clone(), c.dim_in(d)))
                    .collect(),
            );
        }
        for pick in cartesian(&choices) {
            let sdim: u32 = pick.iter().map(|(_, d)| d).sum();
            let breaks = chain.len() as u32 - 2;
            if sdim + breaks != dim {
                return Err(inconsistent(
                    &key,
                    format!("stratum of dimension {sdim} with {breaks} breaks in a {dim}-dimensional space"),
                ));
            }
            raw_strata.push((
                chain.clone(),
                pick.into_iter().map(|(c, _)| c).collect(),
                sdim,
            ));
        }
    }
    let render = |c: &[usize]| -> Vec<String> {
        c.iter()
            .map(|&k| parent.crit[k].normal.to_string())
            .collect()
    };
    raw_strata
        .sort_by(|a, b| (a.0.len(), render(&a.0), &a.1).cmp(&(b.0.len(), render(&b.0), &b.1)));
    let mut t = Space {
        address: address.clone(),
        key: key.clone(),
        dim,
        components: components.clone(),
        strata: raw_strata
            .iter()
            .map(|(chain, comps, d)| Stratum {
                ambient: address.clone(),
                chain: chain
                    .iter()
                    .map(|&k| parent.crit[k].normal.clone())
                    .collect(),
                components: comps.clone(),
                dim: *d,
            })
            .collect(),
        chains: raw_strata.iter().map(|s| s.0.clone()).collect(),
        faces: Vec::new(),
        crit: Vec::new(),
        interiors: BTreeMap::new(),
        flows: BTreeMap::new(),
        flow_values: BTreeMap::new(),
        inherited: BTreeMap::new(),
    };

    // closure relation, broken strata first
    let mut faces = Vec::new();
    for (bi, b) in t.strata.iter().enumerate() {
        if b.breaks() == 0 {
            continue;
        }
        for (ai, a) in t.strata.iter().enumerate() {
            if ai != bi
                && refines(
                    &t.chains[ai],
                    &a.components,
                    &t.chains[bi],
                    &b.components,
                    &segment,
                )?
            {
                faces.push((ai, bi));
            }
        }
    }
    for (bi, b) in t.strata.iter().enumerate() {
        if b.breaks() != 0 {
            continue;
        }
        let comp = components.iter().find(|c| c.id == b.components[0]).unwrap();
        let mut direct = BTreeSet::new();
        match comp.shape {
            Shape::Interval if comp.endpoints.is_empty() && address.level() > 1 => {
                // declared intervals run between the two corners
                let corners: Vec<usize> = (0..t.strata.len())
                    .filter(|&k| t.strata[k].dim == 0 && t.strata[k].breaks() > 0)
                    .collect();
                if corners.len() != 2 {
                    return Err(inconsistent(
                        &key,
                        format!(
                            "interval {} needs two corners, found {}",
                            comp.id,
                            corners.len()
                        ),
                    ));
                }
                direct.extend(corners);
            }
            Shape::Interval => {
                for e in &comp.endpoints {
                    let k = t.find_stratum(e).ok_or_else(|| {
                        inconsistent(&key, format!("endpoint of {} is not a stratum", comp.id))
                    })?;
                    if t.strata[k].dim != 0 {
                        return Err(inconsistent(&key, "interval endpoint is not a corner"));
                    }
                    direct.insert(k);
                }
            }
            Shape::Declared => {
                if comp.faces.is_empty() {
                    direct.extend(
                        (0..t.strata.len())
                            .filter(|&k| t.strata[k].dim + 1 == dim && t.strata[k].breaks() > 0),
                    );
                } else {
                    for f in &comp.faces {
                        let k = t.find_stratum(f).ok_or_else(|| {
                            inconsistent(&key, format!("face of {} is not a stratum", comp.id))
                        })?;
                        direct.insert(k);
                    }
                }
            }
            _ => {}
        }
        let mut all = direct.clone();
        for &(a, f) in &faces {
            if direct.contains(&f) {
                all.insert(a);
            }
        }
        faces.extend(all.into_iter().map(|a| (a, bi)));
    }
    faces.sort();
    faces.dedup();
    t.faces = faces;

    // every codimension-one stratum bounds a component
    for (k, s) in t.strata.iter().enumerate() {
        if s.breaks() != 1 {
            continue;
        }
        let covering: Vec<&Component> = components
            .iter()
            .filter(|c| t.closure(&c.id).contains(&k))
            .collect();
        let bad = if dim == 1 {
            covering.len() != 1 || covering[0].shape != Shape::Interval
        } else {
            covering.is_empty()
        };
        if bad {
            return Err(inconsistent(
                &key,
                format!(
                    "boundary stratum {} is not the face of exactly one component",
                    k
                ),
            ));
        }
    }

    // critical points: boundary products first, then interiors
    let mut boundary_max = Value::from(0);
    for (k, st) in t.strata.iter().enumerate() {
        if st.breaks() == 0 {
            continue;
        }
        let chain = &t.chains[k];
        let mut lists: Vec<Vec<(usize, &CritInfo)>> = Vec::new();
        for (s, w) in chain.windows(2).enumerate() {
            let seg = segment(w[0], w[1])?;
            let inner = seg
                .interiors
                .get(&st.components[s])
                .cloned()
                .unwrap_or_default();
            lists.push(inner.into_iter().map(|c| (c, &seg.crit[c])).collect());
        }
        for pick in cartesian(&lists) {
            let raw = Point::broken(pick.iter().map(|(_, c)| c.normal.clone()).collect());
            let value = pick.iter().fold(Value::from(0), |v, (_, c)| v + c.value);
            let sidx: u32 = pick.iter().map(|(_, c)| c.index).sum();
            boundary_max = boundary_max.max(value);
            t.crit.push(CritInfo {
                normal: normalize_point(&raw),
                raw,
                index: sidx,
                stratum_index: sidx,
                value,
                stratum: Some(k),
                factors: pick.iter().map(|(f, _)| *f).collect(),
                interior: None,
            });
        }
    }
    let block = decls.block(&key);
    if let Some(b) = block {
        if !b.critical.is_empty() {
            used.insert(key.clone());
        }
        for d in &b.critical {
            match components.iter().find(|c| c.id == d.comp) {
                None => {
                    return Err(inconsistent(
                        &key,
                        format!("no component {} to carry {}", d.comp, d.id),
                    ))
                }
                Some(c) if matches!(c.shape, Shape::Point | Shape::Interval) => {
                    return Err(inconsistent(
                        &key,
                        format!("component {} admits no interior critical points", c.id),
                    ))
                }
                Some(c) if d.index > c.dim_in(dim) => {
                    return Err(inconsistent(
                        &key,
                        format!("index of {} exceeds dimension", d.id),
                    ))
                }
                _ => {}
            }
        }
    }
    for comp in &components {
        let k = t.open_stratum(&comp.id).unwrap();
        let cv = parent.flow_values[&(i, j, comp.id.clone())];
        let mut ids = Vec::new();
        let mut push = |t: &mut Space, name: &str, index: u32, value: Value| {
            let cp = CritPoint::new(
                format!("{name}@{key}"),
                index,
                value,
                Home::Moduli(address.clone()),
            );
            let p = Point::prim(cp);
            ids.push(t.crit.len());
            t.crit.push(CritInfo {
                raw: p.clone(),
                normal: p,
                index,
                stratum_index: index,
                value,
                stratum: Some(k),
                factors: Vec::new(),
                interior: Some(comp.id.clone()),
            });
        };
        match comp.shape {
            Shape::Point => {
                let p = point_of(parent, i, j, &comp.id);
                ids.push(t.crit.len());
                t.crit.push(CritInfo {
                    raw: p.clone(),
                    normal: p.clone(),
                    index: 0,
                    stratum_index: 0,
                    value: p.value(),
                    stratum: Some(k),
                    factors: Vec::new(),
                    interior: Some(comp.id.clone()),
                });
            }
            Shape::Interval => {}
            _ => {
                let decl: Vec<&DeclCritical> = block
                    .map(|b| b.critical.iter().filter(|d| d.comp == comp.id).collect())
                    .unwrap_or_default();
                if decl.is_empty() {
                    return Err(BuildError::MissingDeclaration {
                        address: key.clone(),
                    });
                }
                for d in decl {
                    push(
                        &mut t,
                        &d.id,
                        d.index,
                        boundary_max + cv + Value::from(d.index as i64),
                    );
                }
            }
        }
        t.interiors.insert(comp.id.clone(), ids);
    }
    let mut seen = BTreeSet::new();
    for c in &t.crit {
        if !seen.insert(c.normal.clone()) {
            return Err(inconsistent(
                &key,
                format!("critical point {} occurs twice", c.normal),
            ));
        }
    }

    // each break whose gluing direction descends adds one to the index
    for k in 0..t.crit.len() {
        let Some(sk) = t.crit[k].stratum else {
            continue;
        };
        let chain = t.chains[sk].clone();
        let Point::Broken(ps) = t.crit[k].raw.clone() else {
            continue;
        };
        if chain.len() < 4 {
            continue;
        }
        let mut extra = 0;
        for s in 1..chain.len() - 1 {
            let sib = segment(chain[s - 1], chain[s + 1])?;
            let glued = Point::broken(vec![ps[s - 1].clone(), ps[s].clone()]);
            let c = sib.crit_index(&glued).ok_or_else(|| {
                inconsistent(&key, format!("{glued} is not critical in {}", sib.key))
            })?;
            extra += sib.crit[c].index - sib.crit[c].stratum_index;
        }
        t.crit[k].index += extra;
    }

    // a monotone interval raises its upper endpoint to ambient index one
    if dim == 1 {
        for comp in components.iter().filter(|c| c.shape == Shape::Interval) {
            let open = t.open_stratum(&comp.id).unwrap();
            let ends: Vec<usize> = (0..t.crit.len())
                .filter(|&c| {
                    t.crit[c]
                        .stratum
                        .is_some_and(|k| t.faces.contains(&(k, open)))
                })
                .collect();
            if ends.len() != 2 {
                return Err(inconsistent(
                    &key,
                    format!("interval {} needs two endpoints", comp.id),
                ));
            }
            let (a, b) = (&t.crit[ends[0]], &t.crit[ends[1]]);
            let top = if (a.value, b.normal.to_string()) > (b.value, a.normal.to_string()) {
                ends[0]
            } else {
                ends[1]
            };
            t.crit[top].index += 1;
        }
    }
    Ok(t)
}

/// Whether stratum a (finer chain) lies in the closure of broken stratum b.
fn refines<'s>(
    ca: &[usize],
    ka: &[Sym],
    cb: &[usize],
    kb: &[Sym],
    segment: &dyn Fn(usize, usize) -> Result<&'s Space, BuildError>,
) -> Result<bool, BuildError> {
    if ca.len() <= cb.len() {
        return Ok(false);
    }
    let mut pos = Vec::new();
    let mut k = 0;
    for &x in cb {
        while k < ca.len() && ca[k] != x {
            k += 1;
        }
        if k == ca.len() {
            return Ok(false);
        }
        pos.push(k);
    }
    for s in 0..kb.len() {
        let (lo, hi) = (pos[s], pos[s + 1]);
        if hi - lo == 1 {
            if ka[lo] != kb[s] {
                return Ok(false);
            }
            continue;
        }
        let seg = segment(cb[s], cb[s + 1])?;
        let sub = seg
            .chains
            .iter()
            .zip(&seg.strata)
            .position(|(c, st)| *c == ca[lo..=hi] && st.components[..] == ka[lo..hi]);
        let Some(sub) = sub else { return Ok(false) };
        if !seg.closure(&kb[s]).contains(&sub) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn cartesian<T: Clone>(lists: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for l in lists {
        let mut next = Vec::new();
        for prefix in &out {
            for x in l {
                let mut p = prefix.clone();
                p.push(x.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Builds every level of Morse data until only stationary spaces remain.
pub fn build_tower(s: &FlowSystem, decls: &Declarations) -> Result<Tower, BuildError> {
    let violations = validate_flow_system(s);
    if !violations.is_empty() {
        return Err(BuildError::Invalid(violations));
    }
    let base = base_space(s)?;
    let mut spaces = BTreeMap::new();
    let mut levels = vec![vec![base.address.clone()]];
    spaces.insert(base.address.clone(), base);
    let mut used = BTreeSet::new();
    loop {
        let mut next = Vec::new();
        for paddr in levels.last().unwrap().clone() {
            let parent = spaces[&paddr].clone();
            let n = parent.crit.len();
            let mut pairs: Vec<(u32, usize, usize)> = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    if i != j && parent.above(i, j) {
                        pairs.push((parent.crit[i].index - parent.crit[j].index - 1, i, j));
                    }
                }
            }
            pairs.sort();
            for (_, i, j) in pairs {
                let mut t = build_child(&parent, i, j, &spaces, decls, &mut used)?;
                for a in 0..t.crit.len() {
                    for b in 0..t.crit.len() {
                        if a == b {
                            continue;
                        }
                        let flow = derive_pair(&t, a, b, &spaces, decls, &mut used)?;
                        if flow.is_empty() {
                            continue;
                        }
                        let mut comps = Vec::new();
                        for (c, origin) in flow {
                            if let Some(p) = origin {
                                t.inherited.insert((a, b, c.id.clone()), p);
                            }
                            comps.push(c);
                        }
                        t.flows.insert((a, b), comps);
                    }
                }
                t.flow_values = flow_values(&t)?;
                next.push(t.address.clone());
                spaces.insert(t.address.clone(), t);
            }
        }
        if next.is_empty() {
            break;
        }
        levels.push(next);
    }
    for key in decls.blocks.keys() {
        if !used.contains(key) {
            return Err(inconsistent(
                key,
                "declaration for a space that is never built",
            ));
        }
    }
    Ok(Tower {
        system: s.clone(),
        decls: decls.clone(),
        spaces,
        levels,
    })
}
