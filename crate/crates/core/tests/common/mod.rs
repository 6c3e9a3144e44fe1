//! Fixtures and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use morsetower::category::{self, Category};
use morsetower::*;

pub fn piece(comp: &str, src: &str, dst: &str) -> Piece {
    Piece {
        comp: comp.into(),
        src: src.into(),
        dst: dst.into(),
    }
}

/// A square: top point a, two index-2 points, two index-1 points, bottom
/// d. M(a, d) is a two-dimensional disk with four edges, four corners and
/// an interior minimum e.
pub fn square_system() -> (FlowSystem, Declarations) {
    let pt = |id: &str, index| BasePoint {
        id: id.into(),
        index,
    };
    let m = |src: &str, dst: &str, components| Moduli {
        src: src.into(),
        dst: dst.into(),
        components,
    };
    let one = || vec![Component::new("m", Shape::Point)];
    let interval = |x: &str, y1: &str, y2: &str, z: &str| {
        vec![Component::new("I", Shape::Interval).with_endpoints(vec![
            vec![piece("m", x, y1), piece("m", y1, z)],
            vec![piece("m", x, y2), piece("m", y2, z)],
        ])]
    };
    let system = FlowSystem {
        points: vec![
            pt("a", 3),
            pt("b1", 2),
            pt("b2", 2),
            pt("c1", 1),
            pt("c2", 1),
            pt("d", 0),
        ],
        moduli: vec![
            m("a", "b1", one()),
            m("a", "b2", one()),
            m("b1", "c1", one()),
            m("b1", "c2", one()),
            m("b2", "c1", one()),
            m("b2", "c2", one()),
            m("c1", "d", one()),
            m("c2", "d", one()),
            m("a", "c1", interval("a", "b1", "b2", "c1")),
            m("a", "c2", interval("a", "b1", "b2", "c2")),
            m("b1", "d", interval("b1", "c1", "c2", "d")),
            m("b2", "d", interval("b2", "c1", "c2", "d")),
            m("a", "d", vec![Component::new("D", Shape::Declared)]),
        ],
    };
    let mut decls = Declarations::default();
    decls.block_mut("a>d").critical = vec![DeclCritical {
        comp: "D".into(),
        id: "e".into(),
        index: 0,
    }];
    // the disk: the index-two corner reaches the opposite corner along an
    // interval, and no corner flows to the interior minimum
    let corner = |b: &str, c: &str| format!("(m@a>{b},m@{b}>{c},m@{c}>d)");
    let top = corner("b1", "c1");
    decls
        .block_mut(&format!("a>d/{top}>{}", corner("b2", "c2")))
        .components = vec![Component::new("J", Shape::Interval)];
    for (b, c) in [("b1", "c1"), ("b1", "c2"), ("b2", "c1")] {
        decls
            .block_mut(&format!("a>d/{}>e@a>d", corner(b, c)))
            .empty = true;
    }
    (system, decls)
}

/// Named systems covering every built-in family.
pub fn fixtures() -> Vec<(String, FlowSystem, Declarations)> {
    let mut out = Vec::new();
    for n in 1..=3 {
        let (s, d) = sphere_system(n).unwrap();
        out.push((format!("sphere{n}"), s, d));
    }
    let (s, d) = deformed_sphere_system();
    out.push(("deformed".into(), s, d));
    let (s, d) = square_system();
    out.push(("square".into(), s, d));
    for seed in 0..40 {
        let (s, d) = random_system(seed, 6, 3).unwrap();
        out.push((format!("random{seed}"), s, d));
    }
    out
}

/// Composability read off the rows: equal rows below p, and C's source
/// at row p equal to A's target there.
pub fn rows_composable(p: usize, c: &Cell, a: &Cell) -> bool {
    let (c, a) = (normalize(c), normalize(a));
    let l = c.level();
    if a.level() != l || p >= l {
        return false;
    }
    c.space.rows[..p] == a.space.rows[..p] && c.space.rows[p].0 == a.space.rows[p].1
}

/// |X(l) ×_p X(l)| per (l, p), counted from the rows.
pub fn pair_counts(tower: &Tower) -> BTreeMap<(usize, usize), usize> {
    let mut out = BTreeMap::new();
    let max = tower.top_level() + 1;
    for l in 1..=max {
        let xs = category::cells(tower, l).unwrap();
        for p in 0..l {
            let n = xs
                .iter()
                .flat_map(|c| xs.iter().map(move |a| (c, a)))
                .filter(|(c, a)| rows_composable(p, c, a))
                .count();
            out.insert((l, p), n);
        }
    }
    out
}

/// Expected instance count per axiom tag, from row-based composability.
pub fn instance_counts(tower: &Tower) -> BTreeMap<Tag, usize> {
    let max = tower.top_level() + 1;
    let xs: Vec<Vec<Cell>> = (0..=max)
        .map(|l| category::cells(tower, l).unwrap())
        .collect();
    let mut n = BTreeMap::new();
    let pairs = pair_counts(tower);
    n.insert(Tag::Globular, (2..=max).map(|l| 2 * xs[l].len()).sum());
    n.insert(Tag::A, 2 * pairs.values().sum::<usize>());
    n.insert(Tag::B, 2 * xs.iter().map(Vec::len).sum::<usize>());
    n.insert(Tag::D, (1..=max).map(|l| 2 * l * xs[l].len()).sum());
    n.insert(Tag::F, pairs.values().sum());
    let mut c3 = 0;
    let mut e4 = 0;
    for (l, x) in xs.iter().enumerate().skip(1) {
        for p in 0..l {
            for e in x {
                for c in x {
                    for a in x {
                        if rows_composable(p, e, c) && rows_composable(p, c, a) {
                            c3 += 1;
                        }
                    }
                }
            }
            for q in 0..p {
                for h in x {
                    for e in x {
                        if !rows_composable(p, h, e) {
                            continue;
                        }
                        for c in x {
                            if !rows_composable(q, h, c) {
                                continue;
                            }
                            for a in x {
                                if rows_composable(p, c, a) && rows_composable(q, e, a) {
                                    e4 += 1;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    n.insert(Tag::C, c3);
    n.insert(Tag::E, e4);
    n
}

fn parent_index(tower: &Tower, s: &Space, p: &Point) -> u32 {
    let parent = tower.space(&s.address.parent().unwrap()).unwrap();
    parent.crit[parent.crit_index(p).unwrap()].index
}

/// Dimension formula, product strata, and face-of-face structure of every
/// built space. Returns the violated statements.
pub fn stratification_violations(tower: &Tower) -> Vec<String> {
    let mut out = Vec::new();
    for s in tower.spaces().filter(|s| s.level() > 0) {
        let (x, z) = s.address.rows.last().unwrap();
        let expected = parent_index(tower, s, x) as i64 - parent_index(tower, s, z) as i64 - 1;
        if s.dim as i64 != expected {
            out.push(format!("{}: dim {} != {expected}", s.key, s.dim));
        }
        for c in &s.components {
            if let Some(d) = c.shape.dim() {
                if d != s.dim {
                    out.push(format!("{}: component {} of dim {d}", s.key, c.id));
                }
            }
        }
        let parent_addr = s.address.parent().unwrap();
        for (k, st) in s.strata.iter().enumerate() {
            if st.dim + st.breaks() as u32 != s.dim {
                out.push(format!("{}: stratum {k} has codimension != breaks", s.key));
            }
            if st.chain.first() != Some(x) || st.chain.last() != Some(z) {
                out.push(format!(
                    "{}: stratum {k} does not run from source to target",
                    s.key
                ));
            }
            let mut sum = 0;
            for (i, w) in st.chain.windows(2).enumerate() {
                let seg_addr = parent_addr.child(w[0].clone(), w[1].clone());
                let Some(seg) = tower.space(&seg_addr) else {
                    out.push(format!(
                        "{}: stratum {k} factor space {seg_addr} missing",
                        s.key
                    ));
                    continue;
                };
                match seg.components.iter().find(|c| c.id == st.components[i]) {
                    Some(c) => sum += c.dim_in(seg.dim),
                    None => out.push(format!("{}: stratum {k} factor not a component", s.key)),
                }
            }
            if sum != st.dim {
                out.push(format!(
                    "{}: stratum {k} dim {} != factor sum {sum}",
                    s.key, st.dim
                ));
            }
            if st.dim >= s.dim && st.breaks() > 0 {
                out.push(format!(
                    "{}: boundary stratum {k} not of lower dimension",
                    s.key
                ));
            }
            // a depth-d stratum lies on exactly d codimension-one faces
            let on = s
                .strata
                .iter()
                .enumerate()
                .filter(|(j, b)| b.breaks() == 1 && (*j == k || s.faces.contains(&(k, *j))))
                .count();
            if on != st.breaks() {
                out.push(format!(
                    "{}: stratum {k} of depth {} on {on} faces",
                    s.key,
                    st.breaks()
                ));
            }
        }
        for &(a, b) in &s.faces {
            if s.strata[a].dim >= s.strata[b].dim {
                out.push(format!("{}: face {a} of {b} not of lower dimension", s.key));
            }
            for &(b2, c) in &s.faces {
                if b2 == b && !s.faces.contains(&(a, c)) {
                    out.push(format!(
                        "{}: face relation not transitive at {a} {b} {c}",
                        s.key
                    ));
                }
            }
        }
        // depth read off a point agrees with its stratum
        for c in &s.crit {
            let d = depth(&c.normal, &s.address, tower).unwrap();
            let pieces = flatten_point(&c.normal).unwrap().len();
            let expected = if c.stratum.map_or(0, |k| s.strata[k].breaks()) == 0 {
                0
            } else {
                pieces - 1
            };
            if d != expected {
                out.push(format!(
                    "{}: depth of {} is {d}, expected {expected}",
                    s.key, c.normal
                ));
            }
        }
    }
    out
}

/// Chain-order values, additivity over products, positivity, index
/// consistency and termination. Returns the violated statements.
pub fn morse_violations(tower: &Tower) -> Vec<String> {
    let mut out = Vec::new();
    let zero = Value::from(0);
    for s in tower.spaces() {
        for (&(x, y), cs) in &s.flows {
            for (&(y2, z), ds) in &s.flows {
                if y2 != y || x == z {
                    continue;
                }
                for c in cs {
                    for d in ds {
                        let vc = s.flow_values[&(x, y, c.id.clone())];
                        let vd = s.flow_values[&(y, z, d.id.clone())];
                        if !(vc > vd && vd > zero) {
                            out.push(format!("{}: chain order {vc} vs {vd}", s.key));
                        }
                    }
                }
            }
        }
        let mut vals: Vec<&Value> = s.flow_values.values().collect();
        vals.sort();
        if vals.windows(2).any(|w| w[0] == w[1]) {
            out.push(format!("{}: repeated component value", s.key));
        }
        for c in &s.crit {
            if c.value <= zero {
                out.push(format!("{}: nonpositive value at {}", s.key, c.normal));
            }
            match &c.raw {
                Point::Broken(ps) => {
                    let mut v = Value::from(0);
                    let mut i = 0;
                    for p in ps {
                        let Point::Primitive(f) = p else {
                            out.push(format!("{}: nested factor in {}", s.key, c.raw));
                            continue;
                        };
                        v += f.value;
                        i += f.index;
                        if c.value <= f.value {
                            out.push(format!(
                                "{}: {} does not rise above its factor",
                                s.key, c.raw
                            ));
                        }
                    }
                    if v != c.value || i != c.stratum_index {
                        out.push(format!(
                            "{}: {} is not the sum of its factors",
                            s.key, c.raw
                        ));
                    }
                    let breaks = ps.len() as u32 - 1;
                    if c.index < c.stratum_index || c.index > c.stratum_index + breaks {
                        out.push(format!("{}: index of {} drifts", s.key, c.raw));
                    }
                }
                Point::Primitive(p) => {
                    if p.index != c.index || p.value != c.value {
                        out.push(format!(
                            "{}: {} stored with two indices or values",
                            s.key, p.id
                        ));
                    }
                }
                Point::Stationary(_) => out.push(format!("{}: stationary critical point", s.key)),
            }
        }
    }
    for s in tower.spaces() {
        for c in &s.crit {
            let a = s.address.child(c.normal.clone(), c.normal.clone());
            let cp = critical_points(&a, tower).unwrap();
            if cp.len() != 1 || cp[0].value != zero || cp[0].index != 0 {
                out.push(format!(
                    "{}: stationary space over {} is not a 0-valued singleton",
                    s.key, c.normal
                ));
            }
        }
    }
    if tower.top_level() > tower.system.dim() as usize {
        out.push(format!(
            "{} nontrivial levels above a base of dimension {}",
            tower.top_level(),
            tower.system.dim()
        ));
    }
    out
}

pub fn category(s: &FlowSystem, d: &Declarations) -> (Tower, Category) {
    let t = build_tower(s, d).unwrap();
    let c = Category::new(&t);
    (t, c)
}

fn find(cat: &Category, l: usize, render: &str) -> NormalCell {
    cat.level(l)
        .unwrap()
        .iter()
        .find(|e| e.normal.to_string() == render)
        .unwrap_or_else(|| panic!("no cell {render}"))
        .normal
        .clone()
}

/// One documented single-field mutation of the deformed-sphere category
/// per axiom tag, with what it changes.
pub fn mutants() -> Vec<(Tag, &'static str, Category)> {
    let (s, d) = deformed_sphere_system();
    let (_, cat) = category(&s, &d);
    let m = find(&cat, 1, "m@x>y in x>y");
    let a = find(&cat, 1, "a@y>w in y>w");
    let b = find(&cat, 1, "b@y>w in y>w");
    let ma = find(&cat, 1, "(m@x>y,a@y>w) in x>w");
    let mb = find(&cat, 1, "(m@x>y,b@y>w) in x>w");
    let p = cat
        .level(2)
        .unwrap()
        .iter()
        .find(|e| e.normal.to_string().starts_with("l@x>w/"))
        .unwrap()
        .normal
        .clone();
    let z = find(&cat, 0, "z");
    let (im, ia, ib) = (cat.identity(&m), cat.identity(&a), cat.identity(&b));
    let mut out = Vec::new();
    let mut c = cat.clone();
    c.set_target(&p, m.clone());
    out.push((
        Tag::Globular,
        "target of the 2-cell over x>w set to the x>y cell",
        c,
    ));
    let mut c = cat.clone();
    c.set_source(&ma, z);
    out.push((Tag::A, "source of the upper corner of x>w set to z", c));
    let mut c = cat.clone();
    c.set_identity(&m, ia.clone());
    out.push((
        Tag::B,
        "identity of the x>y cell set to the identity of the a-cell",
        c,
    ));
    let mut c = cat.clone();
    c.set_composite(1, &im, &im, ia.clone());
    out.push((Tag::C, "1m *1 1m set to 1a", c.clone()));
    out.push((Tag::D, "1m *1 1m set to 1a", c));
    let mut c = cat.clone();
    c.set_composite(1, &ia, &ia, ib);
    out.push((Tag::E, "1a *1 1a set to 1b", c));
    let mut c = cat.clone();
    c.set_composite(0, &a, &m, mb);
    out.push((Tag::F, "a *0 m set to the lower corner of x>w", c));
    out
}

/// Every binary bracketing of a sequence.
pub fn bracketings(xs: &[Point]) -> Vec<Point> {
    if xs.len() == 1 {
        return vec![xs[0].clone()];
    }
    let mut out = Vec::new();
    for k in 1..xs.len() {
        for l in bracketings(&xs[..k]) {
            for r in bracketings(&xs[k..]) {
                out.push(Point::Broken(vec![l.clone(), r]));
            }
        }
    }
    out
}

/// Gluing straight from the definition: rows below p from the right-hand
/// cell, row p joins its source to the left-hand target, rows above glue
/// pointwise.
pub fn glue(p: usize, c: &Cell, a: &Cell) -> Cell {
    let l = c.space.rows.len();
    let mut rows = Vec::new();
    for j in 0..l {
        let (ca, cb) = &c.space.rows[j];
        let (aa, ab) = &a.space.rows[j];
        rows.push(match j.cmp(&p) {
            std::cmp::Ordering::Less => (aa.clone(), ab.clone()),
            std::cmp::Ordering::Equal => (aa.clone(), cb.clone()),
            std::cmp::Ordering::Greater => (
                Point::Broken(vec![aa.clone(), ca.clone()]),
                Point::Broken(vec![ab.clone(), cb.clone()]),
            ),
        });
    }
    Cell {
        top: Point::Broken(vec![a.top.clone(), c.top.clone()]),
        space: ModuliAddress { rows },
    }
}

pub fn tops(c: &Cell) -> Vec<Point> {
    match &c.top {
        Point::Broken(halves) => halves
            .iter()
            .flat_map(|h| match h {
                Point::Broken(ps) => ps.clone(),
                q => vec![q.clone()],
            })
            .collect(),
        q => vec![q.clone()],
    }
}
