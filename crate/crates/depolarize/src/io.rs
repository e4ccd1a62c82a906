//! File formats: edge lists, opinion files, trajectory CSVs, and JSON
//! summaries.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::OpinionProfile;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::planner::InterventionStep;

/// Reads an edge list: one `i j [w]` line per edge, 0-based ids, optional
/// weight defaulting to 1.0, `#` comment lines ignored, duplicates rejected.
/// Vertex count is `1 + max id` unless overridden.
pub fn read_edge_list(path: &Path, w_max: f64, n_override: Option<usize>) -> Result<Graph> {
    let file = File::open(path)?;
    let display = path.display().to_string();
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    let mut max_id = 0usize;
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut parts = trimmed.split_whitespace();
        let parse_id = |tok: Option<&str>, what: &str| -> Result<usize> {
            tok.ok_or_else(|| Error::Parse {
                path: display.clone(),
                line: lineno,
                msg: format!("missing {what}"),
            })?
            .parse()
            .map_err(|e| Error::Parse {
                path: display.clone(),
                line: lineno,
                msg: format!("bad {what}: {e}"),
            })
        };
        let i = parse_id(parts.next(), "source vertex")?;
        let j = parse_id(parts.next(), "target vertex")?;
        let w = match parts.next() {
            Some(tok) => tok.parse().map_err(|e| Error::Parse {
                path: display.clone(),
                line: lineno,
                msg: format!("bad weight: {e}"),
            })?,
            None => 1.0,
        };
        if parts.next().is_some() {
            return Err(Error::Parse {
                path: display.clone(),
                line: lineno,
                msg: "too many fields".into(),
            });
        }
        if i == j {
            return Err(Error::Parse {
                path: display.clone(),
                line: lineno,
                msg: format!("self-loop on vertex {i}"),
            });
        }
        max_id = max_id.max(i).max(j);
        edges.push((i, j, w));
    }
    let n = match n_override {
        Some(n) => {
            if !edges.is_empty() && n <= max_id {
                return Err(Error::InvalidConfig(format!(
                    "vertex count override {n} smaller than max id {max_id} + 1"
                )));
            }
            n
        }
        None => max_id + 1,
    };
    let mut g = Graph::new(n, w_max)?;
    for (i, j, w) in edges {
        if g.weight(i, j) != 0.0 {
            return Err(Error::Parse {
                path: display.clone(),
                line: 0,
                msg: format!("duplicate edge ({i}, {j})"),
            });
        }
        g.set_weight(i, j, w)?;
    }
    Ok(g)
}

pub fn write_edge_list(g: &Graph, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "# n = {}", g.vertex_count())?;
    for (i, j, w) in g.edges() {
        if w == 1.0 {
            writeln!(out, "{i} {j}")?;
        } else {
            writeln!(out, "{i} {j} {w}")?;
        }
    }
    Ok(())
}

/// Reads an opinion file: one real in [0, 1] per line, line k = vertex k,
/// `#` comments ignored; count must equal `n`.
pub fn read_opinions(path: &Path, n: usize) -> Result<OpinionProfile> {
    let file = File::open(path)?;
    let display = path.display().to_string();
    let mut values = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let v: f64 = trimmed.parse().map_err(|e| Error::Parse {
            path: display.clone(),
            line: lineno + 1,
            msg: format!("bad opinion value: {e}"),
        })?;
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Parse {
                path: display.clone(),
                line: lineno + 1,
                msg: format!("opinion {v} outside [0, 1]"),
            });
        }
        values.push(v);
    }
    if values.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: values.len(),
        });
    }
    Ok(OpinionProfile::from_vec(values))
}

pub fn write_opinions(s: &OpinionProfile, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for v in s.iter() {
        writeln!(out, "{v}")?;
    }
    Ok(())
}

/// Result of dropping isolated vertices: the reindexed graph, old-to-new index
/// mapping (`None` for removed vertices), and the removed vertex ids.
pub struct PreprocessOutcome {
    pub graph: Graph,
    pub mapping: Vec<Option<usize>>,
    pub removed: Vec<usize>,
    pub opinions: Option<OpinionProfile>,
}

pub fn drop_isolated(g: &Graph, s: Option<&OpinionProfile>) -> Result<PreprocessOutcome> {
    let n = g.vertex_count();
    let mut mapping = vec![None; n];
    let mut removed = Vec::new();
    let mut next = 0usize;
    for (i, slot) in mapping.iter_mut().enumerate() {
        if g.neighbors(i).is_empty() {
            removed.push(i);
        } else {
            *slot = Some(next);
            next += 1;
        }
    }
    if next == 0 {
        return Err(Error::NoEdges);
    }
    let mut out = Graph::new(next, g.w_max())?;
    for (i, j, w) in g.edges() {
        out.set_weight(mapping[i].unwrap(), mapping[j].unwrap(), w)?;
    }
    let opinions = match s {
        Some(s) => {
            if s.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: s.len(),
                });
            }
            let kept: Vec<f64> = (0..n)
                .filter(|&i| mapping[i].is_some())
                .map(|i| s.get(i))
                .collect();
            Some(OpinionProfile::from_vec(kept))
        }
        None => None,
    };
    Ok(PreprocessOutcome {
        graph: out,
        mapping,
        removed,
        opinions,
    })
}

/// Initial metrics plus one row per executed step.
pub fn write_trajectory_csv(
    path: &Path,
    initial_polarization: f64,
    initial_gap: f64,
    initial_assortativity: Option<f64>,
    steps: &[InterventionStep],
) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(
        out,
        "step,i,j,weight_added,polarization,spectral_gap,assortativity"
    )?;
    writeln!(
        out,
        "0,,,,{},{},{}",
        initial_polarization,
        initial_gap,
        fmt_opt(initial_assortativity)
    )?;
    for st in steps {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            st.step_index,
            st.edge.0,
            st.edge.1,
            st.weight_added,
            st.polarization_after,
            st.spectral_gap_after,
            fmt_opt(st.assortativity_after)
        )?;
    }
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Per-state metric triple used in the summary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricSnapshot {
    pub polarization: f64,
    pub spectral_gap: f64,
    pub assortativity: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub n: usize,
    pub m: usize,
    pub budget: usize,
    pub seed: u64,
    pub complete_graph_floor: f64,
    pub worst_case_polarization: f64,
    pub initial: MetricSnapshot,
    pub r#final: std::collections::BTreeMap<String, MetricSnapshot>,
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)
        .map_err(|e| Error::InvalidConfig(format!("json serialization failed: {e}")))?;
    writeln!(out)?;
    Ok(())
}
