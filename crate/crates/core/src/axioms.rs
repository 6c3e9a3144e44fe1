//! Exhaustive checking of the globular identities and the strict
//! n-category laws, up to normal form.
//!
//! Every law is evaluated twice: once through the [`Category`] (normal
//! forms, stored tables), which decides pass/fail, and once structurally on
//! raw cells, which only feeds the informational strict-equality count.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::category::{self, Category, Entry};
use crate::domain::{Cell, NormalCell};
use crate::error::CategoryError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tag {
    Globular,
    A,
    B,
    C,
    D,
    E,
    F,
}

impl Tag {
    pub const ALL: [Tag; 7] = [
        Tag::Globular,
        Tag::A,
        Tag::B,
        Tag::C,
        Tag::D,
        Tag::E,
        Tag::F,
    ];
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tag::Globular => "globular",
            Tag::A => "a",
            Tag::B => "b",
            Tag::C => "c",
            Tag::D => "d",
            Tag::E => "e",
            Tag::F => "f",
        })
    }
}

impl FromStr for Tag {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Tag::ALL
            .into_iter()
            .find(|t| t.to_string() == s)
            .ok_or_else(|| format!("unknown axiom {s}"))
    }
}

/// One quantified equation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Law {
    /// s(s(c)) = s(t(c))
    GlobularSource,
    /// t(s(c)) = t(t(c))
    GlobularTarget,
    /// source of C ∘_p A
    CompositeSource {
        p: usize,
    },
    CompositeTarget {
        p: usize,
    },
    /// s(1_A) = A
    IdentitySource,
    IdentityTarget,
    Associativity {
        p: usize,
    },
    /// 1^{l-p}(t^{l-p} A) ∘_p A = A
    UnitLeft {
        p: usize,
    },
    /// A ∘_p 1^{l-p}(s^{l-p} A) = A
    UnitRight {
        p: usize,
    },
    Interchange {
        p: usize,
        q: usize,
    },
    NullaryInterchange {
        p: usize,
    },
}

impl Law {
    pub fn tag(self) -> Tag {
        match self {
            Law::GlobularSource | Law::GlobularTarget => Tag::Globular,
            Law::CompositeSource { .. } | Law::CompositeTarget { .. } => Tag::A,
            Law::IdentitySource | Law::IdentityTarget => Tag::B,
            Law::Associativity { .. } => Tag::C,
            Law::UnitLeft { .. } | Law::UnitRight { .. } => Tag::D,
            Law::Interchange { .. } => Tag::E,
            Law::NullaryInterchange { .. } => Tag::F,
        }
    }

    fn p(self) -> Option<usize> {
        match self {
            Law::CompositeSource { p }
            | Law::CompositeTarget { p }
            | Law::Associativity { p }
            | Law::UnitLeft { p }
            | Law::UnitRight { p }
            | Law::Interchange { p, .. }
            | Law::NullaryInterchange { p } => Some(p),
            _ => None,
        }
    }

    fn q(self) -> Option<usize> {
        match self {
            Law::Interchange { q, .. } => Some(q),
            _ => None,
        }
    }
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Law::GlobularSource => write!(f, "s(s(c))=s(t(c))"),
            Law::GlobularTarget => write!(f, "t(s(c))=t(t(c))"),
            Law::CompositeSource { .. } => write!(f, "s(C*A)"),
            Law::CompositeTarget { .. } => write!(f, "t(C*A)"),
            Law::IdentitySource => write!(f, "s(1A)=A"),
            Law::IdentityTarget => write!(f, "t(1A)=A"),
            Law::Associativity { .. } => write!(f, "(E*C)*A=E*(C*A)"),
            Law::UnitLeft { .. } => write!(f, "1(t(A))*A=A"),
            Law::UnitRight { .. } => write!(f, "A*1(s(A))=A"),
            Law::Interchange { .. } => write!(f, "(H*pE)*q(C*pA)=(H*qC)*p(E*qA)"),
            Law::NullaryInterchange { .. } => write!(f, "1C*1A=1(C*A)"),
        }
    }
}

/// The operations a law is evaluated with.
trait Ops {
    type C: Clone + PartialEq + fmt::Display;
    fn s(&self, c: &Self::C) -> Result<Self::C, CategoryError>;
    fn t(&self, c: &Self::C) -> Result<Self::C, CategoryError>;
    fn id(&self, c: &Self::C) -> Self::C;
    fn comp(&self, p: usize, c: &Self::C, a: &Self::C) -> Result<Self::C, CategoryError>;
    fn level(&self, c: &Self::C) -> usize;
}

struct Raw;

impl Ops for Raw {
    type C = Cell;
    fn s(&self, c: &Cell) -> Result<Cell, CategoryError> {
        category::source(c)
    }
    fn t(&self, c: &Cell) -> Result<Cell, CategoryError> {
        category::target(c)
    }
    fn id(&self, c: &Cell) -> Cell {
        category::identity(c)
    }
    fn comp(&self, p: usize, c: &Cell, a: &Cell) -> Result<Cell, CategoryError> {
        category::compose(p, c, a)
    }
    fn level(&self, c: &Cell) -> usize {
        c.level()
    }
}

impl Ops for Category {
    type C = NormalCell;
    fn s(&self, c: &NormalCell) -> Result<NormalCell, CategoryError> {
        self.source(c)
    }
    fn t(&self, c: &NormalCell) -> Result<NormalCell, CategoryError> {
        self.target(c)
    }
    fn id(&self, c: &NormalCell) -> NormalCell {
        self.identity(c)
    }
    fn comp(&self, p: usize, c: &NormalCell, a: &NormalCell) -> Result<NormalCell, CategoryError> {
        self.compose(p, c, a)
    }
    fn level(&self, c: &NormalCell) -> usize {
        c.level()
    }
}

fn iter<O: Ops>(o: &O, c: &O::C, k: usize, src: bool) -> Result<O::C, CategoryError> {
    (0..k).try_fold(c.clone(), |c, _| if src { o.s(&c) } else { o.t(&c) })
}

fn ids<O: Ops>(o: &O, c: &O::C, k: usize) -> O::C {
    (0..k).fold(c.clone(), |c, _| o.id(&c))
}

fn sides<O: Ops>(o: &O, law: Law, w: &[O::C]) -> Result<(O::C, O::C), CategoryError> {
    Ok(match law {
        Law::GlobularSource => (o.s(&o.s(&w[0])?)?, o.s(&o.t(&w[0])?)?),
        Law::GlobularTarget => (o.t(&o.s(&w[0])?)?, o.t(&o.t(&w[0])?)?),
        Law::CompositeSource { p } => {
            let (c, a) = (&w[0], &w[1]);
            let g = o.s(&o.comp(p, c, a)?)?;
            if p + 1 == o.level(c) {
                (g, o.s(a)?)
            } else {
                (g, o.comp(p, &o.s(c)?, &o.s(a)?)?)
            }
        }
        Law::CompositeTarget { p } => {
            let (c, a) = (&w[0], &w[1]);
            let g = o.t(&o.comp(p, c, a)?)?;
            if p + 1 == o.level(c) {
                (g, o.t(c)?)
            } else {
                (g, o.comp(p, &o.t(c)?, &o.t(a)?)?)
            }
        }
        Law::IdentitySource => (o.s(&o.id(&w[0]))?, w[0].clone()),
        Law::IdentityTarget => (o.t(&o.id(&w[0]))?, w[0].clone()),
        Law::Associativity { p } => {
            let (e, c, a) = (&w[0], &w[1], &w[2]);
            (
                o.comp(p, &o.comp(p, e, c)?, a)?,
                o.comp(p, e, &o.comp(p, c, a)?)?,
            )
        }
        Law::UnitLeft { p } => {
            let a = &w[0];
            let k = o.level(a) - p;
            let u = ids(o, &iter(o, a, k, false)?, k);
            (o.comp(p, &u, a)?, a.clone())
        }
        Law::UnitRight { p } => {
            let a = &w[0];
            let k = o.level(a) - p;
            let u = ids(o, &iter(o, a, k, true)?, k);
            (o.comp(p, a, &u)?, a.clone())
        }
        Law::Interchange { p, q } => {
            let (h, e, c, a) = (&w[0], &w[1], &w[2], &w[3]);
            (
                o.comp(q, &o.comp(p, h, e)?, &o.comp(p, c, a)?)?,
                o.comp(p, &o.comp(q, h, c)?, &o.comp(q, e, a)?)?,
            )
        }
        Law::NullaryInterchange { p } => {
            let (c, a) = (&w[0], &w[1]);
            (o.comp(p, &o.id(c), &o.id(a))?, o.id(&o.comp(p, c, a)?))
        }
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure {
    pub tag: Tag,
    pub law: Law,
    pub level: usize,
    pub p: Option<usize>,
    pub q: Option<usize>,
    /// The quantified cells as listed.
    pub witnesses: Vec<Cell>,
    /// Both sides in normal form; `None` when an operation failed.
    pub lhs: Option<NormalCell>,
    pub rhs: Option<NormalCell>,
    /// Both sides evaluated structurally, before normalization.
    pub lhs_raw: String,
    pub rhs_raw: String,
    pub message: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "failure tag={} law={} level={}",
            self.tag, self.law, self.level
        )?;
        if let Some(p) = self.p {
            write!(f, " p={p}")?;
        }
        if let Some(q) = self.q {
            write!(f, " q={q}")?;
        }
        let ws: Vec<String> = self.witnesses.iter().map(|c| format!("[{c}]")).collect();
        write!(f, " cells={}", ws.join(","))?;
        let show = |s: &Option<NormalCell>| s.as_ref().map_or("-".to_string(), |c| c.to_string());
        write!(
            f,
            " lhs=[{}] rhs=[{}] lhs_raw=[{}] rhs_raw=[{}]",
            show(&self.lhs),
            show(&self.rhs),
            self.lhs_raw,
            self.rhs_raw
        )?;
        if !self.message.is_empty() {
            write!(f, " message={}", self.message)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TagResult {
    pub instances: usize,
    /// Instances whose two sides agree before normalization.
    pub strict_equal: usize,
    pub failures: Vec<Failure>,
}

impl TagResult {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AxiomReport {
    pub results: BTreeMap<Tag, TagResult>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.results.values().all(TagResult::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Failure> {
        self.results.values().flat_map(|r| r.failures.iter())
    }

    pub fn failing_tags(&self) -> Vec<Tag> {
        self.results
            .iter()
            .filter(|(_, r)| !r.passed())
            .map(|(t, _)| *t)
            .collect()
    }

    pub fn instances(&self) -> usize {
        self.results.values().map(|r| r.instances).sum()
    }

    fn merge(&mut self, other: AxiomReport) {
        for (t, r) in other.results {
            let e = self.results.entry(t).or_default();
            e.instances += r.instances;
            e.strict_equal += r.strict_equal;
            e.failures.extend(r.failures);
        }
    }
}

impl fmt::Display for AxiomReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (t, r) in &self.results {
            writeln!(
                f,
                "axiom.{t}={} instances={} strict={} failures={}",
                if r.passed() { "pass" } else { "fail" },
                r.instances,
                r.strict_equal,
                r.failures.len()
            )?;
        }
        for x in self.failures() {
            writeln!(f, "{x}")?;
        }
        Ok(())
    }
}

struct Checker<'a> {
    cat: &'a Category,
    result: TagResult,
}

impl Checker<'_> {
    fn instance(&mut self, law: Law, level: usize, es: &[&Entry]) {
        self.result.instances += 1;
        let normal: Vec<NormalCell> = es.iter().map(|e| e.normal.clone()).collect();
        let raw: Vec<Cell> = es.iter().map(|e| e.raw.clone()).collect();
        let judged = sides(self.cat, law, &normal);
        let strict = sides(&Raw, law, &raw);
        if matches!(&strict, Ok((l, r)) if l == r) {
            self.result.strict_equal += 1;
        }
        let ok = matches!(&judged, Ok((l, r)) if l == r);
        if ok {
            return;
        }
        let (lhs, rhs, message) = match judged {
            Ok((l, r)) => (Some(l), Some(r), String::new()),
            Err(e) => (None, None, e.to_string()),
        };
        let (lhs_raw, rhs_raw) = match &strict {
            Ok((l, r)) => (l.to_string(), r.to_string()),
            Err(e) => (format!("error: {e}"), String::new()),
        };
        self.result.failures.push(Failure {
            tag: law.tag(),
            law,
            level,
            p: law.p(),
            q: law.q(),
            witnesses: raw,
            lhs,
            rhs,
            lhs_raw,
            rhs_raw,
            message,
        });
    }
}

fn run(cat: &Category, tag: Tag) -> TagResult {
    let mut ch = Checker {
        cat,
        result: TagResult::default(),
    };
    let top = cat.max_level();
    let levels = cat.levels();
    match tag {
        Tag::Globular => {
            for (l, es) in levels.iter().enumerate().skip(2) {
                for e in es {
                    ch.instance(Law::GlobularSource, l, &[e]);
                    ch.instance(Law::GlobularTarget, l, &[e]);
                }
            }
        }
        Tag::A => {
            for l in 1..=top {
                for p in 0..l {
                    for (c, a) in cat.composable_pairs(l, p) {
                        ch.instance(Law::CompositeSource { p }, l, &[c, a]);
                        ch.instance(Law::CompositeTarget { p }, l, &[c, a]);
                    }
                }
            }
        }
        Tag::B => {
            for (l, es) in levels.iter().enumerate() {
                for e in es {
                    ch.instance(Law::IdentitySource, l, &[e]);
                    ch.instance(Law::IdentityTarget, l, &[e]);
                }
            }
        }
        Tag::C => {
            for l in 1..=top {
                for p in 0..l {
                    let pairs = cat.composable_pairs(l, p);
                    for &(c, a) in &pairs {
                        for &(e, c2) in &pairs {
                            if c2.normal == c.normal {
                                ch.instance(Law::Associativity { p }, l, &[e, c, a]);
                            }
                        }
                    }
                }
            }
        }
        Tag::D => {
            for (l, es) in levels.iter().enumerate().skip(1) {
                for p in 0..l {
                    for e in es {
                        ch.instance(Law::UnitLeft { p }, l, &[e]);
                        ch.instance(Law::UnitRight { p }, l, &[e]);
                    }
                }
            }
        }
        Tag::E => {
            for l in 2..=top {
                for p in 1..l {
                    let pairs = cat.composable_pairs(l, p);
                    for q in 0..p {
                        for &(c, a) in &pairs {
                            for &(h, e) in &pairs {
                                let across = |x: &Entry, y: &Entry| {
                                    cat.composable(q, &x.normal, &y.normal) == Ok(true)
                                };
                                if across(e, a) && across(h, c) {
                                    ch.instance(Law::Interchange { p, q }, l, &[h, e, c, a]);
                                }
                            }
                        }
                    }
                }
            }
        }
        Tag::F => {
            for l in 1..=top {
                for p in 0..l {
                    for (c, a) in cat.composable_pairs(l, p) {
                        ch.instance(Law::NullaryInterchange { p }, l, &[c, a]);
                    }
                }
            }
        }
    }
    ch.result
}

/// s∘s = s∘t and t∘s = t∘t on every X(l), l >= 2.
pub fn check_globular(cat: &Category) -> AxiomReport {
    check_axiom(Tag::Globular, cat)
}

pub fn check_axiom(tag: Tag, cat: &Category) -> AxiomReport {
    let mut report = AxiomReport::default();
    report.results.insert(tag, run(cat, tag));
    report
}

pub fn check_all(cat: &Category) -> AxiomReport {
    let mut report = AxiomReport::default();
    for tag in Tag::ALL {
        report.merge(check_axiom(tag, cat));
    }
    report
}
