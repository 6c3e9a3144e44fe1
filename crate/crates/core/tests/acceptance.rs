//! One PASS/FAIL line per acceptance criterion.

mod common;

use std::io::Write as _;
use std::time::{Duration, Instant};

use common::*;
use morsetower::category::{self, Category};
use morsetower::*;

const SEEDS: u64 = 200;

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    ok: bool,
    detail: String,
}

fn verdict(errors: Vec<String>, summary: String) -> Verdict {
    Verdict {
        ok: errors.is_empty(),
        detail: if errors.is_empty() {
            summary
        } else {
            format!("{summary}; {}", errors.join("; "))
        },
    }
}

fn random_systems() -> Vec<(String, FlowSystem, Declarations)> {
    (0..SEEDS)
        .map(|seed| {
            let (s, d) = random_system(seed, 6, 3).unwrap();
            (format!("random{seed}"), s, d)
        })
        .collect()
}

fn named_systems() -> Vec<(String, FlowSystem, Declarations)> {
    let mut out = Vec::new();
    for n in 1..=3 {
        let (s, d) = sphere_system(n).unwrap();
        out.push((format!("sphere{n}"), s, d));
    }
    let (s, d) = deformed_sphere_system();
    out.push(("deformed".into(), s, d));
    let (s, d) = square_system();
    out.push(("square".into(), s, d));
    out
}

fn spheres() -> Verdict {
    let mut errors = Vec::new();
    let mut slowest = Duration::ZERO;
    for n in 1..=3u32 {
        let start = Instant::now();
        let (s, d) = sphere_system(n).unwrap();
        let t = build_tower(&s, &d).unwrap();
        let cat = Category::new(&t);
        let n = n as usize;
        for l in 0..=n {
            let size = cat.level(l).map(|x| x.len()).unwrap_or(0);
            if size != 2 {
                errors.push(format!("sphere{n}: |X({l})| = {size}"));
            }
            for p in 0..l {
                let k = cat.composable_pairs(l, p).len();
                if k != 0 {
                    errors.push(format!("sphere{n}: |X({l}) x_{p} X({l})| = {k}"));
                }
            }
        }
        let took = start.elapsed();
        slowest = slowest.max(took);
        if took >= Duration::from_secs(1) {
            errors.push(format!("sphere{n} took {took:?}"));
        }
    }
    verdict(errors, format!("n=1..3, slowest {slowest:?}"))
}

fn deformed() -> Verdict {
    let start = Instant::now();
    let mut errors = Vec::new();
    let (s, d) = deformed_sphere_system();
    let (t, cat) = category(&s, &d);
    let sizes: Vec<usize> = (0..=2).map(|l| cat.level(l).unwrap().len()).collect();
    if sizes != [4, 8, 6] {
        errors.push(format!("sizes {sizes:?}"));
    }
    for (l, p, want) in [(1, 0, 4), (2, 1, 4), (2, 0, 4)] {
        let k = cat.composable_pairs(l, p).len();
        if k != want {
            errors.push(format!("|X({l}) x_{p} X({l})| = {k}"));
        }
    }
    let find = |render: &str| {
        cat.level(1)
            .unwrap()
            .iter()
            .find(|e| e.normal.to_string() == render)
            .map(|e| e.normal.clone())
    };
    let xw = t
        .spaces_at(1)
        .find(|s| s.key == "x>w")
        .expect("x>w is built");
    let max = xw.crit.iter().max_by_key(|c| c.value).unwrap();
    match (find("m@x>y in x>y"), find("a@y>w in y>w")) {
        (Some(m), Some(a)) => {
            let want = normalize(&Cell::new(max.normal.clone(), xw.address.clone()));
            match cat.compose(0, &a, &m) {
                Ok(g) if g == want && max.index == 1 => {}
                Ok(g) => errors.push(format!("composite {g}, expected {want}")),
                Err(e) => errors.push(format!("composite: {e}")),
            }
        }
        _ => errors.push("level-one cells missing".into()),
    }
    // P and Q: flows between the two ends of each interval
    for top in ["x", "z"] {
        let sp = t
            .spaces_at(1)
            .find(|s| s.key == format!("{top}>w"))
            .unwrap();
        let mut ends: Vec<&CritInfo> = sp.crit.iter().collect();
        ends.sort_by_key(|c| std::cmp::Reverse(c.value));
        let a = sp
            .address
            .child(ends[0].normal.clone(), ends[1].normal.clone());
        match critical_points(&a, &t) {
            Ok(cps) if cps.len() == 1 => {}
            Ok(cps) => errors.push(format!("{a} has {} points", cps.len())),
            Err(e) => errors.push(format!("{a}: {e}")),
        }
    }
    let took = start.elapsed();
    if took >= Duration::from_secs(1) {
        errors.push(format!("took {took:?}"));
    }
    verdict(errors, format!("|X| = {sizes:?}, {took:?}"))
}

fn certification() -> Verdict {
    let start = Instant::now();
    let mut errors = Vec::new();
    let mut instances = 0;
    let mut towers = 0;
    for (name, s, d) in named_systems().into_iter().chain(random_systems()) {
        let (t, cat) = category(&s, &d);
        let report = check_all(&cat);
        towers += 1;
        instances += report.instances();
        if !report.passed() {
            errors.push(format!("{name}: {:?} fail", report.failing_tags()));
        }
        let expected = instance_counts(&t);
        for (tag, r) in &report.results {
            if r.instances != expected[tag] {
                errors.push(format!(
                    "{name}: {tag} counted {} vs {}",
                    r.instances, expected[tag]
                ));
            }
        }
    }
    let took = start.elapsed();
    if took >= Duration::from_secs(60) {
        errors.push(format!("took {took:?}"));
    }
    verdict(
        errors,
        format!("{towers} towers, {instances} instances, {took:?}"),
    )
}

fn mutation() -> Verdict {
    let mut errors = Vec::new();
    for tag in Tag::ALL {
        let caught = mutants()
            .iter()
            .any(|(t, _, c)| *t == tag && check_all(c).failing_tags().contains(&tag));
        if !caught {
            errors.push(format!("{tag} undetected"));
        }
    }
    verdict(errors, "7 tags".into())
}

fn laws(oracle: fn(&Tower) -> Vec<String>) -> Verdict {
    let mut errors = Vec::new();
    let mut spaces = 0;
    for (name, s, d) in named_systems().into_iter().chain(random_systems()) {
        let t = build_tower(&s, &d).unwrap();
        spaces += t.spaces().count();
        for v in oracle(&t) {
            errors.push(format!("{name}: {v}"));
        }
    }
    verdict(errors, format!("{spaces} spaces"))
}

fn normalizer() -> Verdict {
    let mut errors = Vec::new();
    let mut cells = 0;
    let mut interchanges = 0;
    // idempotence on every listed cell and every composite
    for (name, s, d) in named_systems().into_iter().chain(random_systems()) {
        let (_, cat) = category(&s, &d);
        for l in 0..=cat.max_level() {
            for e in cat.level(l).unwrap() {
                cells += 1;
                if normalize(e.normal.cell()) != e.normal || normalize(&e.raw) != e.normal {
                    errors.push(format!("{name}: {} not stable", e.normal));
                }
            }
            for p in 0..l {
                for (c, a) in cat.composable_pairs(l, p) {
                    let g = category::compose(p, &c.raw, &a.raw).unwrap();
                    let n = normalize(&g);
                    if normalize(n.cell()) != n {
                        errors.push(format!("{name}: composite {n} not stable"));
                    }
                }
            }
        }
    }
    // re-association, exhaustive up to five pieces
    let pool: Vec<Point> = (0..5)
        .map(|k| {
            Point::prim(CritPoint::new(
                format!("q{k}"),
                0,
                Value::from(9 - k as i64),
                Home::Base,
            ))
        })
        .collect();
    for n in 1..=5 {
        let xs = &pool[..n];
        let flat = normalize_point(&Point::broken(xs.to_vec()));
        for t in bracketings(xs) {
            if normalize_point(&t) != flat {
                errors.push(format!("bracketing {t} differs"));
            }
        }
    }
    // both interchange trees on every admissible quadruple
    for (name, s, d) in random_systems() {
        let t = build_tower(&s, &d).unwrap();
        let cat = Category::new(&t);
        for l in 2..=cat.max_level() {
            let xs: Vec<Cell> = category::cells(&t, l)
                .unwrap()
                .iter()
                .map(|c| normalize(c).into_cell())
                .collect();
            for p in 1..l {
                for q in 0..p {
                    for h in &xs {
                        for e in xs.iter().filter(|e| rows_composable(p, h, e)) {
                            for c in xs.iter().filter(|c| rows_composable(q, h, c)) {
                                for a in xs.iter().filter(|a| {
                                    rows_composable(p, c, a) && rows_composable(q, e, a)
                                }) {
                                    let lhs = glue(q, &glue(p, h, e), &glue(p, c, a));
                                    let rhs = glue(p, &glue(q, h, c), &glue(q, e, a));
                                    interchanges += 1;
                                    if normalize(&lhs) != normalize(&rhs) {
                                        errors.push(format!(
                                            "{name}: interchange differs at l={l} p={p} q={q}"
                                        ));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    if interchanges == 0 {
        errors.push("no interchange instance exercised".into());
    }
    verdict(
        errors,
        format!("{cells} cells, {interchanges} interchange pairs"),
    )
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 7] = [
        ("1 sphere reproduction", spheres),
        ("2 deformed sphere reproduction", deformed),
        ("3 axiom certification", certification),
        ("4 mutation sensitivity", mutation),
        ("5 stratification laws", || laws(stratification_violations)),
        ("6 morse data laws", || laws(morse_violations)),
        ("7 normalizer soundness", normalizer),
    ];
    let mut failed = Vec::new();
    let mut out = std::io::stdout().lock();
    for (name, run) in criteria {
        let v = run();
        let word = if v.ok { "PASS" } else { "FAIL" };
        let _ = writeln!(out, "{word} criterion {name}: {}", v.detail);
        if !v.ok {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failed: {failed:?}");
}
