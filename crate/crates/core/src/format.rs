//! Line-oriented text format for flow systems and their declarations.
//!
//! ```text
//! [critical]
//! x 2
//! y 1
//! [moduli x y]
//! component m shape Point
//! [declare x0>y0]
//! critical s x1 1
//! ```
//!
//! A declare block holding the single line `empty` says the space has no
//! components. `#` starts a comment. Piece lists in `endpoints` and `face` lines name
//! components of level-one spaces as `cid@src>dst`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Location, ParseError};
use crate::stratification::{BasePoint, Component, FlowSystem, Moduli, Piece, Shape};
use crate::tower::{DeclCritical, Declarations};

/// Line numbers of the parsed items, for reporting validation errors.
pub type SourceMap = BTreeMap<Location, usize>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TowerFile {
    pub system: FlowSystem,
    pub decls: Declarations,
    pub lines: SourceMap,
}

enum Section {
    None,
    Critical,
    Moduli(usize),
    Declare(String),
}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

fn parse_shape(words: &[&str], line: usize) -> Result<Shape, ParseError> {
    match words {
        ["Point"] => Ok(Shape::Point),
        ["Interval"] => Ok(Shape::Interval),
        ["Circle"] => Ok(Shape::Circle),
        ["Declared"] => Ok(Shape::Declared),
        ["SphereLike", k] => k
            .parse()
            .map(Shape::SphereLike)
            .map_err(|_| err(line, format!("bad sphere dimension {k}"))),
        _ => Err(err(line, format!("unknown shape {}", words.join(" ")))),
    }
}

fn parse_component(words: &[&str], line: usize) -> Result<Component, ParseError> {
    match words {
        ["component", id, "shape", rest @ ..] => Ok(Component::new(*id, parse_shape(rest, line)?)),
        _ => Err(err(line, "expected: component <id> shape <shape>")),
    }
}

fn parse_piece(s: &str, line: usize) -> Result<Piece, ParseError> {
    let s = s.trim();
    let (comp, rest) = s
        .split_once('@')
        .ok_or_else(|| err(line, format!("piece {s} lacks '@'")))?;
    let (src, dst) = rest
        .split_once('>')
        .ok_or_else(|| err(line, format!("piece {s} lacks '>'")))?;
    if comp.is_empty() || src.is_empty() || dst.is_empty() || dst.contains('>') {
        return Err(err(line, format!("malformed piece {s}")));
    }
    Ok(Piece {
        comp: comp.into(),
        src: src.into(),
        dst: dst.into(),
    })
}

/// Parenthesized groups of comma-separated pieces.
fn parse_groups(s: &str, line: usize) -> Result<Vec<Vec<Piece>>, ParseError> {
    let mut out = Vec::new();
    let mut rest = s.trim();
    while !rest.is_empty() {
        let body = rest
            .strip_prefix('(')
            .ok_or_else(|| err(line, "expected '('"))?;
        let close = body.find(')').ok_or_else(|| err(line, "unclosed '('"))?;
        let group = body[..close]
            .split(',')
            .map(|p| parse_piece(p, line))
            .collect::<Result<Vec<_>, _>>()?;
        out.push(group);
        rest = body[close + 1..].trim_start();
    }
    Ok(out)
}

pub fn parse_tower_file(text: &str) -> Result<TowerFile, ParseError> {
    let mut system = FlowSystem::default();
    let mut decls = Declarations::default();
    let mut lines = SourceMap::new();
    let mut section = Section::None;
    for (k, raw) in text.lines().enumerate() {
        let n = k + 1;
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        if let Some(inner) = line.strip_prefix('[') {
            let inner = inner
                .strip_suffix(']')
                .ok_or_else(|| err(n, "section header lacks ']'"))?;
            let words: Vec<&str> = inner.split_whitespace().collect();
            section = match words.as_slice() {
                ["critical"] => Section::Critical,
                ["moduli", a, b] => {
                    system.moduli.push(Moduli {
                        src: (*a).into(),
                        dst: (*b).into(),
                        components: Vec::new(),
                    });
                    lines
                        .entry(Location::Moduli((*a).into(), (*b).into()))
                        .or_insert(n);
                    Section::Moduli(system.moduli.len() - 1)
                }
                ["declare", ..] if words.len() > 1 => {
                    let key: String = inner["declare".len()..]
                        .chars()
                        .filter(|c| !c.is_whitespace())
                        .collect();
                    decls.block_mut(&key);
                    lines.entry(Location::Declare(key.clone())).or_insert(n);
                    Section::Declare(key)
                }
                _ => return Err(err(n, format!("unknown section [{inner}]"))),
            };
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        match &section {
            Section::None => return Err(err(n, "content outside any section")),
            Section::Critical => {
                let [id, index] = words.as_slice() else {
                    return Err(err(n, "expected: <id> <index>"));
                };
                let index = index
                    .parse()
                    .map_err(|_| err(n, format!("bad index {index}")))?;
                system.points.push(BasePoint {
                    id: (*id).into(),
                    index,
                });
                lines.entry(Location::Point((*id).into())).or_insert(n);
            }
            Section::Moduli(m) => {
                let m = &mut system.moduli[*m];
                match words[0] {
                    "component" => {
                        let c = parse_component(&words, n)?;
                        lines
                            .entry(Location::Component(
                                m.src.clone(),
                                m.dst.clone(),
                                c.id.clone(),
                            ))
                            .or_insert(n);
                        m.components.push(c);
                    }
                    "endpoints" | "face" => {
                        let groups = parse_groups(&line[words[0].len()..], n)?;
                        let c = m
                            .components
                            .last_mut()
                            .ok_or_else(|| err(n, format!("{} before any component", words[0])))?;
                        // point violations at the incidence data when present
                        lines.insert(
                            Location::Component(m.src.clone(), m.dst.clone(), c.id.clone()),
                            n,
                        );
                        if words[0] == "endpoints" {
                            c.endpoints.extend(groups);
                        } else {
                            c.faces.extend(groups);
                        }
                    }
                    w => return Err(err(n, format!("unexpected {w} in moduli section"))),
                }
            }
            Section::Declare(key) => {
                let block = decls.block_mut(key);
                match words.as_slice() {
                    ["critical", comp, id, index] => block.critical.push(DeclCritical {
                        comp: (*comp).into(),
                        id: (*id).into(),
                        index: index
                            .parse()
                            .map_err(|_| err(n, format!("bad index {index}")))?,
                    }),
                    ["empty"] => block.empty = true,
                    ["component", ..] => {
                        if !key.contains('/') {
                            return Err(err(
                                n,
                                "components of level-one spaces belong in a moduli section",
                            ));
                        }
                        block.components.push(parse_component(&words, n)?);
                    }
                    _ => return Err(err(n, "expected critical, component or empty line")),
                }
            }
        }
    }
    Ok(TowerFile {
        system,
        decls,
        lines,
    })
}

fn write_groups(out: &mut String, word: &str, groups: &[Vec<Piece>]) {
    if groups.is_empty() {
        return;
    }
    out.push_str(word);
    for g in groups {
        let parts: Vec<String> = g.iter().map(|p| p.to_string()).collect();
        let _ = write!(out, " ({})", parts.join(", "));
    }
    out.push('\n');
}

/// Renders a system in the text format; parsing the result gives the same
/// system and declarations back.
pub fn write_tower_file(system: &FlowSystem, decls: &Declarations) -> String {
    let mut out = String::from("[critical]\n");
    for p in &system.points {
        let _ = writeln!(out, "{} {}", p.id, p.index);
    }
    for m in &system.moduli {
        let _ = writeln!(out, "\n[moduli {} {}]", m.src, m.dst);
        for c in &m.components {
            let _ = writeln!(out, "component {} shape {}", c.id, c.shape);
            write_groups(&mut out, "endpoints", &c.endpoints);
            for f in &c.faces {
                write_groups(&mut out, "face", std::slice::from_ref(f));
            }
        }
    }
    for (key, block) in &decls.blocks {
        let _ = writeln!(out, "\n[declare {key}]");
        if block.empty {
            out.push_str("empty\n");
        }
        for c in &block.components {
            let _ = writeln!(out, "component {} shape {}", c.id, c.shape);
        }
        for d in &block.critical {
            let _ = writeln!(out, "critical {} {} {}", d.comp, d.id, d.index);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{deformed_sphere_system, sphere_system};

    #[test]
    fn round_trip() {
        for (s, d) in [deformed_sphere_system(), sphere_system(3).unwrap()] {
            let text = write_tower_file(&s, &d);
            let back = parse_tower_file(&text).unwrap();
            assert_eq!(back.system, s);
            assert_eq!(back.decls, d);
        }
    }

    #[test]
    fn errors_carry_lines() {
        let e = parse_tower_file("[critical]\nx 1\ny one\n").unwrap_err();
        assert_eq!(e.line, 3);
        let e = parse_tower_file("x 1").unwrap_err();
        assert_eq!(e.line, 1);
        let e = parse_tower_file("[moduli x y]\ncomponent c shape Blob\n").unwrap_err();
        assert_eq!(e.line, 2);
    }

    #[test]
    fn comments_and_spacing() {
        let f = parse_tower_file(
            "# header\n[critical]\n  x 1 # top\ny 0\n[moduli x y]\ncomponent c shape Point\n",
        )
        .unwrap();
        assert_eq!(f.system.points.len(), 2);
        assert_eq!(f.system.components("x", "y").len(), 1);
    }
}
