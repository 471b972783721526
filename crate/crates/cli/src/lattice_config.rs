//! Flat `key = value` configuration for `lattice-experiment`.
//!
//! ```text
//! # four points, two commuting swaps
//! points = 4
//! weights = 0.1, 0.2, 0.3, 0.4     # or: uniform | stationary | random:<seed>
//! generator = (1 2)(3 4)
//! generator = (1 3)(2 4)
//! direction = increasing           # or: decreasing
//! partition = 1 2 3 4
//! partition = 1 2 | 3 4
//! partition = 1 | 2 | 3 | 4
//! ```
//!
//! Points are numbered from 1; blocks are separated by `|`. Each directive
//! sits on its own line, `#` starts a comment, and `generator` and
//! `partition` may repeat (partitions in chain order).

use gwel::quotients::parse_permutation;
use gwel::sigma_lattice::{ChainDirection, Partition};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum WeightSpec {
    Uniform,
    Stationary,
    Random(u64),
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeConfig {
    pub points: usize,
    pub weights: WeightSpec,
    /// Generator images, 0-based, with their source text.
    pub generators: Vec<(String, Vec<usize>)>,
    pub direction: ChainDirection,
    pub chain: Vec<Partition>,
}

fn line_error(line: usize, message: impl std::fmt::Display) -> CliError {
    CliError::Param(format!("config line {line}: {message}"))
}

pub fn parse_partition(text: &str, points: usize) -> Result<Partition, String> {
    let blocks: Vec<Vec<usize>> = text
        .split('|')
        .map(|b| {
            b.split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| match t.parse::<usize>() {
                    Ok(p) if (1..=points).contains(&p) => Ok(p - 1),
                    _ => Err(format!("bad point '{t}' (points are 1..={points})")),
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;
    Partition::from_blocks(points, &blocks).map_err(|e| e.to_string())
}

impl LatticeConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut points = None;
        let mut weights = WeightSpec::Uniform;
        let mut generators = Vec::new();
        let mut direction = ChainDirection::Increasing;
        let mut partitions: Vec<(usize, String)> = Vec::new();
        let mut raw_generators: Vec<(usize, String)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| line_error(line, "expected 'key = value'"))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "points" => {
                    let m: usize = value
                        .parse()
                        .map_err(|_| line_error(line, format!("bad point count '{value}'")))?;
                    if m == 0 {
                        return Err(line_error(line, "point count must be positive"));
                    }
                    points = Some(m);
                }
                "weights" => {
                    weights = match value {
                        "uniform" => WeightSpec::Uniform,
                        "stationary" => WeightSpec::Stationary,
                        v if v.starts_with("random:") => {
                            let seed =
                                crate::parse::parse_seed(&v["random:".len()..]).map_err(|e| line_error(line, e))?;
                            WeightSpec::Random(seed)
                        }
                        v => WeightSpec::Explicit(
                            v.split(',')
                                .map(|w| crate::parse::parse_probability(w).map_err(|e| line_error(line, e)))
                                .collect::<Result<_, _>>()?,
                        ),
                    }
                }
                "generator" => raw_generators.push((line, value.to_string())),
                "direction" => {
                    direction = match value {
                        "increasing" => ChainDirection::Increasing,
                        "decreasing" => ChainDirection::Decreasing,
                        other => return Err(line_error(line, format!("unknown direction '{other}'"))),
                    }
                }
                "partition" => partitions.push((line, value.to_string())),
                other => return Err(line_error(line, format!("unknown directive '{other}'"))),
            }
        }
        let points = points.ok_or_else(|| CliError::Param("config: missing 'points'".into()))?;
        if let WeightSpec::Explicit(w) = &weights {
            if w.len() != points {
                return Err(CliError::Param(format!(
                    "config: {} weights given for {points} points",
                    w.len()
                )));
            }
        }
        for (line, text) in raw_generators {
            let perm = parse_permutation(&text, points).map_err(|e| line_error(line, e))?;
            generators.push((text, perm));
        }
        if partitions.is_empty() {
            return Err(CliError::Param("config: no 'partition' lines".into()));
        }
        let chain = partitions
            .iter()
            .map(|(line, text)| parse_partition(text, points).map_err(|e| line_error(*line, e)))
            .collect::<Result<_, _>>()?;
        if weights == WeightSpec::Stationary && generators.is_empty() {
            return Err(CliError::Param(
                "config: 'weights = stationary' needs generators".into(),
            ));
        }
        Ok(LatticeConfig {
            points,
            weights,
            generators,
            direction,
            chain,
        })
    }
}

/// Blocks in `1 2 | 3 4` notation.
pub fn format_partition(p: &Partition) -> String {
    p.blocks()
        .iter()
        .map(|b| b.iter().map(|x| (x + 1).to_string()).collect::<Vec<_>>().join(" "))
        .collect::<Vec<_>>()
        .join(" | ")
}
