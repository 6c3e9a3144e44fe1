use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use morsetower::category::{self, Category};
use morsetower::format::{parse_tower_file, write_tower_file, TowerFile};
use morsetower::{
    build_tower, check_all, check_axiom, normalize, BuildError, GeneratorSpec, Location,
    NormalCell, Tag, Tower,
};

#[derive(Parser)]
#[command(
    name = "morsetower",
    version,
    about = "Iterated Morse moduli towers and their n-category"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a tower file for a built-in system.
    Generate {
        #[command(subcommand)]
        kind: Kind,
        /// Output file; standard output when absent.
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
    /// Validate and build a tower, printing a summary.
    Build { file: PathBuf },
    /// Check the n-category axioms; exit 1 on any failure.
    Check {
        file: PathBuf,
        #[arg(long, default_value = "all")]
        axiom: String,
    },
    /// List X(L) in normal form.
    Cells {
        file: PathBuf,
        #[arg(long)]
        level: usize,
    },
    /// Compose two cells along a p-cell. Cells are given as listed by
    /// `cells`, or as LEVEL:POSITION.
    Compose {
        file: PathBuf,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
    },
    /// DOT digraph of X(L-1) and X(L) with source and target arrows.
    ExportDot {
        file: PathBuf,
        #[arg(long)]
        level: usize,
    },
}

#[derive(Subcommand)]
enum Kind {
    Sphere {
        #[arg(long)]
        dim: u32,
    },
    DeformedSphere,
    Random {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 6)]
        max_points: usize,
        #[arg(long, default_value_t = 3)]
        max_index: u32,
    },
}

/// A failed command: exit code and message for standard error.
struct Failure(u8, String);

type Outcome = Result<String, Failure>;

fn load(path: &Path) -> Result<(TowerFile, Tower), Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure(2, format!("error: cannot read {}: {e}", path.display())))?;
    let file = parse_tower_file(&text).map_err(|e| Failure(2, format!("error: {e}")))?;
    let tower = build_tower(&file.system, &file.decls).map_err(|e| build_failure(&file, e))?;
    Ok((file, tower))
}

fn build_failure(file: &TowerFile, e: BuildError) -> Failure {
    let line_of = |loc: &Location| {
        file.lines
            .get(loc)
            .map_or(String::new(), |n| format!("line {n}: "))
    };
    match e {
        BuildError::Invalid(vs) => {
            let mut msg = String::new();
            for v in &vs {
                let _ = writeln!(msg, "error: {}{v}", line_of(&v.location));
            }
            Failure(2, msg.trim_end().to_string())
        }
        BuildError::MissingDeclaration { address } => {
            Failure(3, format!("error: missing declaration for {address}"))
        }
        BuildError::Inconsistent { address, message } => Failure(
            2,
            format!(
                "error: {}inconsistent data at {address}: {message}",
                line_of(&Location::Declare(address.clone()))
            ),
        ),
    }
}

fn summary(cat: &Category, tower: &Tower) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "critical_points={}", tower.system.points.len());
    let _ = writeln!(out, "base_dim={}", tower.system.dim());
    let _ = writeln!(out, "max_level={}", cat.max_level());
    for l in 1..=tower.top_level() {
        let _ = writeln!(out, "spaces.{l}={}", tower.spaces_at(l).count());
    }
    for (l, es) in cat.levels().iter().enumerate() {
        let _ = writeln!(out, "cells.{l}={}", es.len());
    }
    out
}

fn composability(cat: &Category) -> String {
    let mut out = String::new();
    for l in 1..=cat.max_level() {
        for p in 0..l {
            let _ = writeln!(
                out,
                "composable.{l}.{p}={}",
                cat.composable_pairs(l, p).len()
            );
        }
    }
    out
}

fn find_cell(cat: &Category, spec: &str) -> Result<NormalCell, Failure> {
    let unknown = || Failure(2, format!("error: unknown cell {spec}"));
    if let Some((l, k)) = spec.split_once(':') {
        if let (Ok(l), Ok(k)) = (l.trim().parse::<usize>(), k.trim().parse::<usize>()) {
            return cat
                .level(l)
                .ok()
                .and_then(|es| es.get(k))
                .map(|e| e.normal.clone())
                .ok_or_else(unknown);
        }
    }
    let squash = |s: &str| s.split_whitespace().collect::<String>();
    let want = squash(spec);
    for e in cat.levels().iter().flatten() {
        if squash(&e.normal.to_string()) == want {
            return Ok(e.normal.clone());
        }
        let id = cat.identity(&e.normal);
        if squash(&id.to_string()) == want {
            return Ok(id);
        }
    }
    Err(unknown())
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn dot(cat: &Category, l: usize) -> Outcome {
    if l == 0 || l > cat.max_level() {
        return Err(Failure(
            2,
            format!("error: level must lie in 1..={}", cat.max_level()),
        ));
    }
    let mut out = format!("digraph X{l} {{\n  rankdir=LR;\n");
    let mut nodes: Vec<NormalCell> = Vec::new();
    let mut node = |c: &NormalCell, out: &mut String| -> usize {
        if let Some(k) = nodes.iter().position(|n| n == c) {
            return k;
        }
        nodes.push(c.clone());
        let k = nodes.len() - 1;
        let _ = writeln!(out, "  n{k} [label={}];", quote(&c.to_string()));
        k
    };
    for e in cat.level(l - 1).unwrap() {
        node(&e.normal, &mut out);
    }
    let mut edges = Vec::new();
    for e in cat.level(l).unwrap() {
        let k = node(&e.normal, &mut out);
        for (tag, b) in [("s", cat.source(&e.normal)), ("t", cat.target(&e.normal))] {
            let b = b.map_err(|e| Failure(2, format!("error: {e}")))?;
            let j = node(&b, &mut out);
            edges.push(format!("  n{k} -> n{j} [label={tag}];"));
        }
    }
    for e in edges {
        let _ = writeln!(out, "{e}");
    }
    out.push_str("}\n");
    Ok(out)
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Generate { kind, out } => {
            let spec = match kind {
                Kind::Sphere { dim } => GeneratorSpec::Sphere(dim),
                Kind::DeformedSphere => GeneratorSpec::DeformedSphere,
                Kind::Random {
                    seed,
                    max_points,
                    max_index,
                } => GeneratorSpec::Random {
                    seed,
                    max_points,
                    max_index,
                },
            };
            let (s, d) = spec
                .generate()
                .map_err(|e| Failure(2, format!("error: {e}")))?;
            let text = write_tower_file(&s, &d);
            match out {
                Some(path) => {
                    fs::write(&path, text).map_err(|e| {
                        Failure(2, format!("error: cannot write {}: {e}", path.display()))
                    })?;
                    Ok(String::new())
                }
                None => Ok(text),
            }
        }
        Command::Build { file } => {
            let (_, tower) = load(&file)?;
            let cat = Category::new(&tower);
            Ok(format!("status=valid\n{}", summary(&cat, &tower)))
        }
        Command::Check { file, axiom } => {
            let (_, tower) = load(&file)?;
            let cat = Category::new(&tower);
            let report = if axiom == "all" {
                check_all(&cat)
            } else {
                let tag: Tag = axiom
                    .parse()
                    .map_err(|e| Failure(2, format!("error: {e}")))?;
                check_axiom(tag, &cat)
            };
            let text = format!(
                "{}{}{}status={}\n",
                summary(&cat, &tower),
                composability(&cat),
                report,
                if report.passed() { "pass" } else { "fail" }
            );
            if report.passed() {
                Ok(text)
            } else {
                Err(Failure(1, text))
            }
        }
        Command::Cells { file, level } => {
            let (_, tower) = load(&file)?;
            let cells =
                category::cells(&tower, level).map_err(|e| Failure(2, format!("error: {e}")))?;
            Ok(cells
                .iter()
                .map(|c| format!("{}\n", normalize(c)))
                .collect())
        }
        Command::Compose {
            file,
            p,
            left,
            right,
        } => {
            let (_, tower) = load(&file)?;
            let cat = Category::new(&tower);
            let (c, a) = (find_cell(&cat, &left)?, find_cell(&cat, &right)?);
            match cat.compose(p, &c, &a) {
                Ok(g) => Ok(format!("{g}\n")),
                Err(e) => Err(Failure(1, format!("error: {e}"))),
            }
        }
        Command::ExportDot { file, level } => {
            let (_, tower) = load(&file)?;
            dot(&Category::new(&tower), level)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(Failure(code, msg)) => {
            if code == 1 && !msg.starts_with("error") {
                print!("{msg}");
            } else {
                eprintln!("{msg}");
            }
            ExitCode::from(code)
        }
    }
}
