//! Seed-deterministic synthetic graphs and opinion samplers.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::dynamics::OpinionProfile;
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Random graph family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphModel {
    ErdosRenyi { n: usize, p: f64 },
    SbmTwoBlock { n: usize, p_in: f64, q_out: f64 },
    PreferentialAttachment { n: usize, m: usize },
}

/// Opinion sampler paired with a graph model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OpinionModel {
    Uniform01,
    /// First block draws Beta(a1, b1), second block Beta(a2, b2). Blocks follow
    /// the SBM split (first ceil(n/2) vertices) for every graph model.
    BetaByBlock { a1: f64, b1: f64, a2: f64, b2: f64 },
}

impl GraphModel {
    pub fn vertex_count(&self) -> usize {
        match *self {
            GraphModel::ErdosRenyi { n, .. }
            | GraphModel::SbmTwoBlock { n, .. }
            | GraphModel::PreferentialAttachment { n, .. } => n,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        match *self {
            GraphModel::ErdosRenyi { n, p } => {
                if n < 2 {
                    return bad(format!("erdos-renyi needs n >= 2, got {n}"));
                }
                if !(0.0..=1.0).contains(&p) {
                    return bad(format!("edge probability {p} outside [0, 1]"));
                }
            }
            GraphModel::SbmTwoBlock { n, p_in, q_out } => {
                if n < 2 {
                    return bad(format!("sbm needs n >= 2, got {n}"));
                }
                for p in [p_in, q_out] {
                    if !(0.0..=1.0).contains(&p) {
                        return bad(format!("edge probability {p} outside [0, 1]"));
                    }
                }
            }
            GraphModel::PreferentialAttachment { n, m } => {
                if m < 1 {
                    return bad(format!("preferential attachment needs m >= 1, got {m}"));
                }
                if n < m + 1 {
                    return bad(format!("preferential attachment needs n >= m + 1 = {}", m + 1));
                }
            }
        }
        Ok(())
    }
}

/// Size of the first SBM block: ceil(n/2).
pub fn block_split(n: usize) -> usize {
    n.div_ceil(2)
}

/// Draws a Beta(a, b) variate as x / (x + y) from two Gamma draws.
pub fn sample_beta<R: Rng>(a: f64, b: f64, rng: &mut R) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "beta parameters must be positive, got ({a}, {b})"
        )));
    }
    let ga = Gamma::new(a, 1.0).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let gb = Gamma::new(b, 1.0).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let x: f64 = ga.sample(rng);
    let y: f64 = gb.sample(rng);
    if x + y == 0.0 {
        return Ok(0.5);
    }
    Ok(x / (x + y))
}

fn generate_graph<R: Rng>(model: &GraphModel, rng: &mut R) -> Result<Graph> {
    model.validate()?;
    match *model {
        GraphModel::ErdosRenyi { n, p } => {
            let mut g = Graph::new(n, 1.0)?;
            for i in 0..n {
                for j in (i + 1)..n {
                    if rng.gen::<f64>() < p {
                        g.set_weight(i, j, 1.0)?;
                    }
                }
            }
            Ok(g)
        }
        GraphModel::SbmTwoBlock { n, p_in, q_out } => {
            let split = block_split(n);
            let mut g = Graph::new(n, 1.0)?;
            for i in 0..n {
                for j in (i + 1)..n {
                    let p = if (i < split) == (j < split) { p_in } else { q_out };
                    if rng.gen::<f64>() < p {
                        g.set_weight(i, j, 1.0)?;
                    }
                }
            }
            Ok(g)
        }
        GraphModel::PreferentialAttachment { n, m } => {
            let mut g = Graph::new(n, 1.0)?;
            let mut degree = vec![0.0f64; n];
            // Seed clique on the first m + 1 vertices.
            for i in 0..=m {
                for j in (i + 1)..=m {
                    g.set_weight(i, j, 1.0)?;
                    degree[i] += 1.0;
                    degree[j] += 1.0;
                }
            }
            let mut targets = Vec::with_capacity(m);
            for v in (m + 1)..n {
                targets.clear();
                let mut total: f64 = degree[..v].iter().sum();
                // Draw m distinct targets proportional to current degree,
                // without replacement.
                while targets.len() < m && total > 0.0 {
                    let mut r = rng.gen::<f64>() * total;
                    let mut chosen = None;
                    for (u, &d) in degree[..v].iter().enumerate() {
                        if targets.contains(&u) {
                            continue;
                        }
                        r -= d;
                        if r <= 0.0 {
                            chosen = Some(u);
                            break;
                        }
                    }
                    let Some(u) = chosen else { break };
                    targets.push(u);
                    total -= degree[u];
                }
                for &u in &targets {
                    g.set_weight(v, u, 1.0)?;
                    degree[u] += 1.0;
                    degree[v] += 1.0;
                }
            }
            Ok(g)
        }
    }
}

fn generate_opinions<R: Rng>(model: &OpinionModel, n: usize, rng: &mut R) -> Result<OpinionProfile> {
    match *model {
        OpinionModel::Uniform01 => {
            Ok(OpinionProfile::from_vec((0..n).map(|_| rng.gen()).collect()))
        }
        OpinionModel::BetaByBlock { a1, b1, a2, b2 } => {
            let split = block_split(n);
            let mut values = Vec::with_capacity(n);
            for i in 0..n {
                let (a, b) = if i < split { (a1, b1) } else { (a2, b2) };
                values.push(sample_beta(a, b, rng)?);
            }
            Ok(OpinionProfile::from_vec(values))
        }
    }
}

/// Draws an opinion profile for an existing graph of `n` vertices.
pub fn generate_opinions_only<R: Rng>(
    model: &OpinionModel,
    n: usize,
    rng: &mut R,
) -> Result<OpinionProfile> {
    generate_opinions(model, n, rng)
}

/// Draws a graph and an opinion profile from one RNG stream (graph first).
pub fn generate<R: Rng>(
    model: &GraphModel,
    opinions: &OpinionModel,
    rng: &mut R,
) -> Result<(Graph, OpinionProfile)> {
    let g = generate_graph(model, rng)?;
    let s = generate_opinions(opinions, g.vertex_count(), rng)?;
    Ok((g, s))
}
