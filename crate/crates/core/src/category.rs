//! The globular set X(l) of a tower, with source, target, identities and
//! composition along p-cells.
//!
//! Structural operations act on raw cells and never normalize. A
//! [`Category`] stores the operation tables for the listed cells as data,
//! so single entries can be altered to test that the checker notices.

use std::collections::{BTreeMap, HashMap};

use crate::domain::{is_stationary, normalize, Cell, ModuliAddress, NormalCell, Point};
use crate::error::CategoryError;
use crate::tower::Tower;

/// Source of an l-cell: the source point of its last row over the
/// remaining rows.
pub fn source(c: &Cell) -> Result<Cell, CategoryError> {
    boundary(c, true)
}

pub fn target(c: &Cell) -> Result<Cell, CategoryError> {
    boundary(c, false)
}

fn boundary(c: &Cell, src: bool) -> Result<Cell, CategoryError> {
    let l = c.level();
    if l == 0 {
        return Err(CategoryError::NoBoundary);
    }
    let (a, b) = &c.space.rows[l - 1];
    Ok(Cell::new(
        if src { a.clone() } else { b.clone() },
        ModuliAddress {
            rows: c.space.rows[..l - 1].to_vec(),
        },
    ))
}

/// Iterated source s^k.
pub fn source_k(c: &Cell, k: usize) -> Result<Cell, CategoryError> {
    (0..k).try_fold(c.clone(), |c, _| source(&c))
}

pub fn target_k(c: &Cell, k: usize) -> Result<Cell, CategoryError> {
    (0..k).try_fold(c.clone(), |c, _| target(&c))
}

/// The cell over the stationary space of `c`'s point.
pub fn identity(c: &Cell) -> Cell {
    Cell::new(
        Point::stationary(c.top.clone()),
        c.space.child(c.top.clone(), c.top.clone()),
    )
}

pub fn identity_k(c: &Cell, k: usize) -> Cell {
    (0..k).fold(c.clone(), |c, _| identity(&c))
}

fn check_levels(p: usize, c: &Cell, a: &Cell) -> Result<usize, CategoryError> {
    let l = c.level();
    if a.level() != l {
        return Err(CategoryError::LevelMismatch(l, a.level()));
    }
    if p >= l {
        return Err(CategoryError::BadIndex { p, level: l });
    }
    Ok(l)
}

/// `s^{l-p}(C) = t^{l-p}(A)` as normalized cells.
pub fn composable(p: usize, c: &Cell, a: &Cell) -> Result<bool, CategoryError> {
    let l = check_levels(p, c, a)?;
    Ok(normalize(&source_k(c, l - p)?) == normalize(&target_k(a, l - p)?))
}

/// `C ∘_p A`: rows below p are shared, row p runs from A's source to C's
/// target, rows above p and the top point pair A's piece before C's.
pub fn compose(p: usize, c: &Cell, a: &Cell) -> Result<Cell, CategoryError> {
    if !composable(p, c, a)? {
        return Err(CategoryError::NotComposable(p));
    }
    let l = c.level();
    let mut rows = a.space.rows[..p].to_vec();
    rows.push((a.space.rows[p].0.clone(), c.space.rows[p].1.clone()));
    for j in p + 1..l {
        let (a0, a1) = &a.space.rows[j];
        let (c0, c1) = &c.space.rows[j];
        rows.push((
            Point::broken(vec![a0.clone(), c0.clone()]),
            Point::broken(vec![a1.clone(), c1.clone()]),
        ));
    }
    Ok(Cell::new(
        Point::broken(vec![a.top.clone(), c.top.clone()]),
        ModuliAddress { rows },
    ))
}

/// A listed cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub raw: Cell,
    pub normal: NormalCell,
    /// The cell carries no further nonstationary moduli space, so its
    /// identity is listed one level up.
    pub terminal: bool,
}

/// Lists X(0), ..., X(max_level).
pub fn listing(tower: &Tower) -> Vec<Vec<Entry>> {
    let base = tower.base();
    let mut levels: Vec<Vec<Entry>> = vec![base
        .crit
        .iter()
        .map(|c| {
            let raw = Cell::new(c.raw.clone(), ModuliAddress::base());
            Entry {
                normal: normalize(&raw),
                raw,
                terminal: base.dim == 0,
            }
        })
        .collect()];
    let max_level = tower.top_level() + 1;
    for l in 1..=max_level {
        let mut out = Vec::new();
        for space in tower.spaces_at(l) {
            for c in &space.crit {
                let raw = Cell::new(c.raw.clone(), space.address.clone());
                out.push(Entry {
                    normal: normalize(&raw),
                    raw,
                    terminal: space.dim == 0,
                });
            }
        }
        for e in levels[l - 1].iter().filter(|e| e.terminal) {
            let raw = identity(&e.raw);
            out.push(Entry {
                normal: normalize(&raw),
                raw,
                terminal: true,
            });
        }
        levels.push(out);
    }
    levels
}

/// X(l) of a tower.
pub fn cells(tower: &Tower, l: usize) -> Result<Vec<Cell>, CategoryError> {
    let max = tower.top_level() + 1;
    if l > max {
        return Err(CategoryError::LevelOutOfRange { level: l, max });
    }
    Ok(listing(tower)
        .swap_remove(l)
        .into_iter()
        .map(|e| e.raw)
        .collect())
}

type CompositeKey = (usize, NormalCell, NormalCell);

/// The category of a tower with its structure maps stored as tables.
///
/// Operations consult the tables first and fall back to the structural
/// definitions for cells outside them (lazy identities, composites of
/// those).
#[derive(Clone, Debug)]
pub struct Category {
    levels: Vec<Vec<Entry>>,
    index: HashMap<NormalCell, (usize, usize)>,
    sources: HashMap<NormalCell, NormalCell>,
    targets: HashMap<NormalCell, NormalCell>,
    identities: HashMap<NormalCell, NormalCell>,
    composites: BTreeMap<CompositeKey, NormalCell>,
}

/// The globular set of a tower is carried by its category.
pub type GlobularSet = Category;

impl Category {
    pub fn new(tower: &Tower) -> Self {
        let levels = listing(tower);
        let mut cat = Category {
            index: HashMap::new(),
            sources: HashMap::new(),
            targets: HashMap::new(),
            identities: HashMap::new(),
            composites: BTreeMap::new(),
            levels,
        };
        for (l, es) in cat.levels.iter().enumerate() {
            for (k, e) in es.iter().enumerate() {
                cat.index.insert(e.normal.clone(), (l, k));
                cat.identities
                    .insert(e.normal.clone(), normalize(&identity(&e.raw)));
                if l > 0 {
                    cat.sources
                        .insert(e.normal.clone(), normalize(&source(&e.raw).unwrap()));
                    cat.targets
                        .insert(e.normal.clone(), normalize(&target(&e.raw).unwrap()));
                }
            }
        }
        for l in 1..cat.levels.len() {
            for p in 0..l {
                for c in &cat.levels[l] {
                    for a in &cat.levels[l] {
                        if let Ok(g) = compose(p, &c.raw, &a.raw) {
                            cat.composites
                                .insert((p, c.normal.clone(), a.normal.clone()), normalize(&g));
                        }
                    }
                }
            }
        }
        cat
    }

    pub fn max_level(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, l: usize) -> Result<&[Entry], CategoryError> {
        self.levels
            .get(l)
            .map(Vec::as_slice)
            .ok_or(CategoryError::LevelOutOfRange {
                level: l,
                max: self.max_level(),
            })
    }

    pub fn levels(&self) -> &[Vec<Entry>] {
        &self.levels
    }

    pub fn entry(&self, c: &NormalCell) -> Option<&Entry> {
        self.index.get(c).map(|&(l, k)| &self.levels[l][k])
    }

    /// Membership in X, extended by iterated identities of members.
    pub fn contains(&self, c: &NormalCell) -> bool {
        if self.index.contains_key(c) {
            return true;
        }
        let l = c.level();
        if l == 0 || !is_stationary(&c.space) {
            return false;
        }
        let (a, _) = &c.space.rows[l - 1];
        if c.top != Point::stationary(a.clone()) {
            return false;
        }
        self.contains(&normalize(&source(c).unwrap()))
    }

    pub fn source(&self, c: &NormalCell) -> Result<NormalCell, CategoryError> {
        match self.sources.get(c) {
            Some(s) => Ok(s.clone()),
            None => source(c).map(|s| normalize(&s)),
        }
    }

    pub fn target(&self, c: &NormalCell) -> Result<NormalCell, CategoryError> {
        match self.targets.get(c) {
            Some(t) => Ok(t.clone()),
            None => target(c).map(|t| normalize(&t)),
        }
    }

    pub fn source_k(&self, c: &NormalCell, k: usize) -> Result<NormalCell, CategoryError> {
        (0..k).try_fold(c.clone(), |c, _| self.source(&c))
    }

    pub fn target_k(&self, c: &NormalCell, k: usize) -> Result<NormalCell, CategoryError> {
        (0..k).try_fold(c.clone(), |c, _| self.target(&c))
    }

    pub fn identity(&self, c: &NormalCell) -> NormalCell {
        match self.identities.get(c) {
            Some(i) => i.clone(),
            None => normalize(&identity(c)),
        }
    }

    pub fn identity_k(&self, c: &NormalCell, k: usize) -> NormalCell {
        (0..k).fold(c.clone(), |c, _| self.identity(&c))
    }

    pub fn composable(
        &self,
        p: usize,
        c: &NormalCell,
        a: &NormalCell,
    ) -> Result<bool, CategoryError> {
        let l = check_levels(p, c, a)?;
        Ok(self.source_k(c, l - p)? == self.target_k(a, l - p)?)
    }

    pub fn compose(
        &self,
        p: usize,
        c: &NormalCell,
        a: &NormalCell,
    ) -> Result<NormalCell, CategoryError> {
        if let Some(g) = self.composites.get(&(p, c.clone(), a.clone())) {
            return Ok(g.clone());
        }
        if !self.composable(p, c, a)? {
            return Err(CategoryError::NotComposable(p));
        }
        compose(p, c, a).map(|g| normalize(&g))
    }

    /// X(l) ×_p X(l) in listing order.
    pub fn composable_pairs(&self, l: usize, p: usize) -> Vec<(&Entry, &Entry)> {
        let mut out = Vec::new();
        let Some(es) = self.levels.get(l) else {
            return out;
        };
        for c in es {
            for a in es {
                if self.composable(p, &c.normal, &a.normal) == Ok(true) {
                    out.push((c, a));
                }
            }
        }
        out
    }

    pub fn set_source(&mut self, c: &NormalCell, s: NormalCell) {
        self.sources.insert(c.clone(), s);
    }

    pub fn set_target(&mut self, c: &NormalCell, t: NormalCell) {
        self.targets.insert(c.clone(), t);
    }

    pub fn set_identity(&mut self, c: &NormalCell, i: NormalCell) {
        self.identities.insert(c.clone(), i);
    }

    pub fn set_composite(&mut self, p: usize, c: &NormalCell, a: &NormalCell, g: NormalCell) {
        self.composites.insert((p, c.clone(), a.clone()), g);
    }
}
