//! Built-in flow systems: standard spheres, the deformed 2-sphere and
//! seeded random systems of index difference at most two.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::GenError;
use crate::stratification::{
    validate_flow_system, BasePoint, Component, FlowSystem, Moduli, Piece, Shape,
};
use crate::tower::{DeclCritical, Declarations};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeneratorSpec {
    Sphere(u32),
    DeformedSphere,
    Random {
        seed: u64,
        max_points: usize,
        max_index: u32,
    },
}

impl GeneratorSpec {
    pub fn generate(self) -> Result<(FlowSystem, Declarations), GenError> {
        match self {
            GeneratorSpec::Sphere(n) => sphere_system(n),
            GeneratorSpec::DeformedSphere => Ok(deformed_sphere_system()),
            GeneratorSpec::Random {
                seed,
                max_points,
                max_index,
            } => random_system(seed, max_points, max_index),
        }
    }
}

fn point(id: &str, index: u32) -> BasePoint {
    BasePoint {
        id: id.into(),
        index,
    }
}

fn piece(comp: &str, src: &str, dst: &str) -> Piece {
    Piece {
        comp: comp.into(),
        src: src.into(),
        dst: dst.into(),
    }
}

fn shape_of_dim(d: u32) -> Shape {
    match d {
        0 => Shape::Point,
        1 => Shape::Circle,
        k => Shape::SphereLike(k),
    }
}

/// Height function on the n-sphere, with the height-function pattern
/// declared on every iterated moduli space.
pub fn sphere_system(n: u32) -> Result<(FlowSystem, Declarations), GenError> {
    if n < 1 {
        return Err(GenError::BadDimension);
    }
    let top = if n == 1 {
        vec![
            Component::new("x1", Shape::Point),
            Component::new("y1", Shape::Point),
        ]
    } else {
        vec![Component::new("s", shape_of_dim(n - 1))]
    };
    let system = FlowSystem {
        points: vec![point("x0", n), point("y0", 0)],
        moduli: vec![Moduli {
            src: "x0".into(),
            dst: "y0".into(),
            components: top,
        }],
    };
    let mut decls = Declarations::default();
    let mut key = String::from("x0>y0");
    // the space at `key` has dimension n - k
    for k in 1..n {
        let d = n - k;
        decls.block_mut(&key).critical = vec![
            DeclCritical {
                comp: "s".into(),
                id: format!("x{k}").into(),
                index: d,
            },
            DeclCritical {
                comp: "s".into(),
                id: format!("y{k}").into(),
                index: 0,
            },
        ];
        let next = format!("{key}/x{k}@{key}>y{k}@{key}");
        decls.block_mut(&next).components = if d == 1 {
            vec![
                Component::new(format!("x{}", k + 1), Shape::Point),
                Component::new(format!("y{}", k + 1), Shape::Point),
            ]
        } else {
            vec![Component::new("s", shape_of_dim(d - 1))]
        };
        key = next;
    }
    Ok((system, decls))
}

/// Two maxima x, z, a saddle y and a minimum w; the spaces from the maxima
/// to w are intervals between the two broken trajectories through y.
pub fn deformed_sphere_system() -> (FlowSystem, Declarations) {
    let interval = |from: &str| {
        Component::new("I", Shape::Interval).with_endpoints(vec![
            vec![piece("m", from, "y"), piece("a", "y", "w")],
            vec![piece("m", from, "y"), piece("b", "y", "w")],
        ])
    };
    let moduli = |src: &str, dst: &str, components| Moduli {
        src: src.into(),
        dst: dst.into(),
        components,
    };
    let system = FlowSystem {
        points: vec![point("w", 0), point("x", 2), point("y", 1), point("z", 2)],
        moduli: vec![
            moduli("x", "y", vec![Component::new("m", Shape::Point)]),
            moduli("z", "y", vec![Component::new("m", Shape::Point)]),
            moduli(
                "y",
                "w",
                vec![
                    Component::new("a", Shape::Point),
                    Component::new("b", Shape::Point),
                ],
            ),
            moduli("x", "w", vec![interval("x")]),
            moduli("z", "w", vec![interval("z")]),
        ],
    };
    (system, Declarations::default())
}

const ATTEMPTS: usize = 1000;

/// A seeded valid system with at most `max_points` critical points of
/// index at most `max_index` and no trajectory space of dimension above 1.
pub fn random_system(
    seed: u64,
    max_points: usize,
    max_index: u32,
) -> Result<(FlowSystem, Declarations), GenError> {
    if !(2..=8).contains(&max_points) {
        return Err(GenError::Bounds(format!(
            "max_points {max_points} not in 2..=8"
        )));
    }
    if !(1..=3).contains(&max_index) {
        return Err(GenError::Bounds(format!(
            "max_index {max_index} not in 1..=3"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..ATTEMPTS {
        if let Some(out) = draw(&mut rng, max_points, max_index) {
            return Ok(out);
        }
    }
    Err(GenError::Exhausted(ATTEMPTS))
}

fn draw(
    rng: &mut ChaCha8Rng,
    max_points: usize,
    max_index: u32,
) -> Option<(FlowSystem, Declarations)> {
    let n = rng.gen_range(2..=max_points);
    let points: Vec<BasePoint> = (0..n)
        .map(|i| point(&format!("c{i}"), rng.gen_range(0..=max_index)))
        .collect();
    let mut moduli: Vec<Moduli> = Vec::new();
    for x in &points {
        for y in &points {
            if x.index == y.index + 1 {
                let k = rng.gen_range(0..=2);
                if k > 0 {
                    moduli.push(Moduli {
                        src: x.id.clone(),
                        dst: y.id.clone(),
                        components: (0..k)
                            .map(|i| Component::new(format!("m{i}"), Shape::Point))
                            .collect(),
                    });
                }
            }
        }
    }
    let comps = |moduli: &[Moduli], a: &str, b: &str| -> Vec<Component> {
        moduli
            .iter()
            .find(|m| &*m.src == a && &*m.dst == b)
            .map(|m| m.components.clone())
            .unwrap_or_default()
    };
    let mut decls = Declarations::default();
    let mut wide = Vec::new();
    for x in &points {
        for z in &points {
            if x.index != z.index + 2 {
                continue;
            }
            let mut broken = Vec::new();
            for y in points.iter().filter(|y| y.index == z.index + 1) {
                for a in comps(&moduli, &x.id, &y.id) {
                    for b in comps(&moduli, &y.id, &z.id) {
                        broken.push(vec![piece(&a.id, &x.id, &y.id), piece(&b.id, &y.id, &z.id)]);
                    }
                }
            }
            if broken.len() % 2 == 1 {
                return None;
            }
            let mut components: Vec<Component> = broken
                .chunks(2)
                .enumerate()
                .map(|(i, e)| {
                    Component::new(format!("i{i}"), Shape::Interval).with_endpoints(e.to_vec())
                })
                .collect();
            if rng.gen_ratio(1, 4) {
                components.push(Component::new("o0", Shape::Circle));
                decls.block_mut(&format!("{}>{}", x.id, z.id)).critical = vec![
                    DeclCritical {
                        comp: "o0".into(),
                        id: "hi".into(),
                        index: 1,
                    },
                    DeclCritical {
                        comp: "o0".into(),
                        id: "lo".into(),
                        index: 0,
                    },
                ];
            }
            if !components.is_empty() {
                wide.push(Moduli {
                    src: x.id.clone(),
                    dst: z.id.clone(),
                    components,
                });
            }
        }
    }
    moduli.extend(wide);
    let system = FlowSystem { points, moduli };
    // a chain spanning three or more indices would need declared data
    for x in &system.points {
        for z in &system.points {
            if x.index >= z.index + 3 && system.above(&x.id, &z.id) {
                return None;
            }
        }
    }
    if !validate_flow_system(&system).is_empty() {
        return None;
    }
    Some((system, decls))
}
