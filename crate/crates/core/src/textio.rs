//! Line-oriented text format for samples and distributions.
//!
//! ```text
//! # comments and blank lines are ignored
//! universe finite 8        # or: universe real 2
//! 3 1                      # instance, label
//! 0.5,-1.25 0 0.125        # coordinates, label, optional mass
//! ```
//!
//! The header comes first. A sample has no mass column; a distribution has
//! one on every line. Numbers are written in shortest round-trip form, so
//! writing and re-reading is lossless.

use std::fmt::Write as _;
use std::path::Path;

use crate::data::{Example, Instance, Sample, Universe};
use crate::distribution::DiscreteDistribution;
use crate::error::{Error, Result};

struct Line {
    example: Example,
    mass: Option<f64>,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_universe(line: usize, rest: &[&str]) -> Result<Universe> {
    match rest {
        ["finite", size] => size
            .parse::<u32>()
            .map(|size| Universe::Finite { size })
            .map_err(|_| parse_err(line, format!("bad domain size `{size}`"))),
        ["real", dim] => match dim.parse::<usize>() {
            Ok(dim) if dim >= 1 => Ok(Universe::Real { dim }),
            _ => Err(parse_err(line, format!("bad dimension `{dim}`"))),
        },
        _ => Err(parse_err(line, "expected `universe finite N` or `universe real D`")),
    }
}

fn parse_instance(line: usize, tok: &str, universe: Universe) -> Result<Instance> {
    let x = match universe {
        Universe::Finite { .. } => tok
            .parse::<u32>()
            .map(Instance::Id)
            .map_err(|_| parse_err(line, format!("bad instance id `{tok}`")))?,
        Universe::Real { .. } => {
            let coords = tok
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| parse_err(line, format!("bad coordinates `{tok}`")))?;
            Instance::point(coords)
        }
    };
    if !universe.contains(&x) {
        return Err(parse_err(
            line,
            format!("instance `{tok}` is outside universe {universe}"),
        ));
    }
    Ok(x)
}

fn parse_lines(text: &str) -> Result<(Universe, Vec<Line>)> {
    let mut universe = None;
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        if toks[0] == "universe" {
            if universe.is_some() {
                return Err(parse_err(lineno, "duplicate universe header"));
            }
            universe = Some(parse_universe(lineno, &toks[1..])?);
            continue;
        }
        let u = universe.ok_or_else(|| parse_err(lineno, "missing `universe` header before examples"))?;
        if !(2..=3).contains(&toks.len()) {
            return Err(parse_err(lineno, "expected `instance label [mass]`"));
        }
        let x = parse_instance(lineno, toks[0], u)?;
        let y = match toks[1] {
            "0" => false,
            "1" => true,
            other => return Err(parse_err(lineno, format!("label must be 0 or 1, got `{other}`"))),
        };
        let mass = match toks.get(2) {
            Some(m) => Some(
                m.parse::<f64>()
                    .map_err(|_| parse_err(lineno, format!("bad mass `{m}`")))?,
            ),
            None => None,
        };
        lines.push(Line {
            example: Example::new(x, y),
            mass,
        });
    }
    let universe = universe.ok_or_else(|| parse_err(0, "missing `universe` header"))?;
    Ok((universe, lines))
}

pub fn parse_sample(text: &str) -> Result<(Universe, Sample)> {
    let (u, lines) = parse_lines(text)?;
    if lines.iter().any(|l| l.mass.is_some()) {
        return Err(parse_err(0, "a sample has no mass column"));
    }
    Ok((u, lines.into_iter().map(|l| l.example).collect()))
}

pub fn parse_distribution(text: &str) -> Result<(Universe, DiscreteDistribution)> {
    let (u, lines) = parse_lines(text)?;
    let mut support = Vec::with_capacity(lines.len());
    let mut mass = Vec::with_capacity(lines.len());
    for l in lines {
        mass.push(
            l.mass
                .ok_or_else(|| parse_err(0, format!("example {} has no mass", l.example.x)))?,
        );
        support.push(l.example);
    }
    Ok((u, DiscreteDistribution::new(support, mass)?))
}

fn header(u: Universe) -> String {
    format!("universe {u}\n")
}

pub fn sample_to_text(u: Universe, s: &Sample) -> String {
    let mut out = header(u);
    for e in s.iter() {
        let _ = writeln!(out, "{} {}", e.x, e.y as u8);
    }
    out
}

pub fn distribution_to_text(u: Universe, d: &DiscreteDistribution) -> String {
    let mut out = header(u);
    for (e, w) in d.iter() {
        let _ = writeln!(out, "{} {} {}", e.x, e.y as u8, w);
    }
    out
}

pub fn load_sample(path: &Path) -> Result<(Universe, Sample)> {
    parse_sample(&std::fs::read_to_string(path)?)
}

pub fn load_distribution(path: &Path) -> Result<(Universe, DiscreteDistribution)> {
    parse_distribution(&std::fs::read_to_string(path)?)
}
