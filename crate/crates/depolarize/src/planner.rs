//! Greedy budgeted intervention loop and the four edge-selection heuristics.

use rand::Rng;

use crate::dynamics::{
    equilibrium_opinions, opinion_assortativity, polarization, Factorized, OpinionProfile,
};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::perturbation::EdgePerturbation;
use crate::spectral;

/// Edge-selection strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Heuristic {
    Random,
    DisagreementSeeking,
    CoordinateDescent,
    FiedlerDifference,
}

impl Heuristic {
    pub const ALL: [Heuristic; 4] = [
        Heuristic::Random,
        Heuristic::DisagreementSeeking,
        Heuristic::CoordinateDescent,
        Heuristic::FiedlerDifference,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Heuristic::Random => "random",
            Heuristic::DisagreementSeeking => "ds",
            Heuristic::CoordinateDescent => "cd",
            Heuristic::FiedlerDifference => "fd",
        }
    }

    pub fn needs_opinions(&self) -> bool {
        matches!(
            self,
            Heuristic::DisagreementSeeking | Heuristic::CoordinateDescent
        )
    }
}

impl std::str::FromStr for Heuristic {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Heuristic::Random),
            "ds" | "disagreement-seeking" => Ok(Heuristic::DisagreementSeeking),
            "cd" | "coordinate-descent" => Ok(Heuristic::CoordinateDescent),
            "fd" | "fiedler-difference" => Ok(Heuristic::FiedlerDifference),
            other => Err(Error::InvalidConfig(format!("unknown heuristic `{other}`"))),
        }
    }
}

/// Which pairs the planner may act on.
///
/// `NonEdges` restricts to pairs of weight zero, replicating the unweighted
/// experiments; `All` admits every non-saturated pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateMode {
    NonEdges,
    All,
}

impl std::str::FromStr for CandidateMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nonedges" => Ok(CandidateMode::NonEdges),
            "all" => Ok(CandidateMode::All),
            other => Err(Error::InvalidConfig(format!(
                "unknown candidate mode `{other}`"
            ))),
        }
    }
}

fn admits(g: &Graph, mode: CandidateMode, i: usize, j: usize) -> bool {
    match mode {
        CandidateMode::NonEdges => g.weight(i, j) == 0.0,
        CandidateMode::All => !g.is_saturated(i, j),
    }
}

/// One greedy step and the metrics observed after it.
#[derive(Debug, Clone)]
pub struct InterventionStep {
    pub step_index: usize,
    pub edge: (usize, usize),
    pub weight_added: f64,
    pub polarization_after: f64,
    pub spectral_gap_after: f64,
    pub assortativity_after: Option<f64>,
}

/// Argmax of `score` over admitted pairs, ties broken by smallest `(i, j)`.
///
/// The reduction (best score, then lexicographically smallest pair) is
/// associative, so the parallel and sequential paths select identically.
#[doc(hidden)]
pub fn best_scored<F>(g: &Graph, mode: CandidateMode, score: F) -> Option<(usize, usize)>
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    let n = g.vertex_count();
    let row_best = |i: usize| -> Option<(f64, (usize, usize))> {
        let mut best: Option<(f64, (usize, usize))> = None;
        for j in (i + 1)..n {
            if !admits(g, mode, i, j) {
                continue;
            }
            let s = score(i, j);
            match best {
                Some((bs, _)) if s <= bs => {}
                _ => best = Some((s, (i, j))),
            }
        }
        best
    };
    let merge = |a: Option<(f64, (usize, usize))>, b: Option<(f64, (usize, usize))>| match (a, b) {
        (Some((sa, pa)), Some((sb, pb))) => {
            if sa > sb || (sa == sb && pa < pb) {
                Some((sa, pa))
            } else {
                Some((sb, pb))
            }
        }
        (x, None) => x,
        (None, y) => y,
    };

    #[cfg(feature = "parallel")]
    let best = {
        use rayon::prelude::*;
        (0..n)
            .into_par_iter()
            .map(row_best)
            .reduce(|| None, merge)
    };
    #[cfg(not(feature = "parallel"))]
    let best = (0..n).map(row_best).fold(None, merge);

    best.map(|(_, pair)| pair)
}

/// Sequential scoring path, kept callable for benchmarks regardless of the
/// `parallel` feature.
#[doc(hidden)]
pub fn best_scored_sequential<F>(g: &Graph, mode: CandidateMode, score: F) -> Option<(usize, usize)>
where
    F: Fn(usize, usize) -> f64,
{
    let n = g.vertex_count();
    let mut best: Option<(f64, (usize, usize))> = None;
    for i in 0..n {
        for j in (i + 1)..n {
            if !admits(g, mode, i, j) {
                continue;
            }
            let s = score(i, j);
            match best {
                Some((bs, _)) if s <= bs => {}
                _ => best = Some((s, (i, j))),
            }
        }
    }
    best.map(|(_, pair)| pair)
}

#[doc(hidden)]
pub fn score_pairs(
    g: &Graph,
    s: Option<&OpinionProfile>,
    h: Heuristic,
) -> Result<ScoreFn> {
    let w_max = g.w_max();
    match h {
        Heuristic::Random => Err(Error::InvalidConfig(
            "random heuristic has no score function".into(),
        )),
        Heuristic::DisagreementSeeking => {
            let s = s.ok_or(Error::OpinionsRequired("disagreement-seeking"))?;
            let z = equilibrium_opinions(g, s)?;
            let zv: Vec<f64> = z.iter().collect();
            let weights: Vec<f64> = collect_weights(g);
            let n = g.vertex_count();
            Ok(Box::new(move |i, j| {
                let d = zv[i] - zv[j];
                (w_max - weights[i * n + j]) * d * d
            }))
        }
        Heuristic::CoordinateDescent => {
            let s = s.ok_or(Error::OpinionsRequired("coordinate-descent"))?;
            let f = Factorized::new(g)?;
            let z = OpinionProfile::from_dvector(f.solve(s.as_dvector()));
            let zc = z.centered();
            let y = f.solve(&zc);
            let zv: Vec<f64> = zc.iter().copied().collect();
            let yv: Vec<f64> = y.iter().copied().collect();
            let weights: Vec<f64> = collect_weights(g);
            let n = g.vertex_count();
            // -dP/dw_ij = 2 (y_i - y_j)(z_i - z_j)
            Ok(Box::new(move |i, j| {
                (w_max - weights[i * n + j]) * 2.0 * (yv[i] - yv[j]) * (zv[i] - zv[j])
            }))
        }
        Heuristic::FiedlerDifference => {
            let low = spectral::low_spectrum(g)?;
            let fv: Vec<f64> = low.fiedler.iter().copied().collect();
            let weights: Vec<f64> = collect_weights(g);
            let n = g.vertex_count();
            Ok(Box::new(move |i, j| {
                (w_max - weights[i * n + j]) * (fv[i] - fv[j]).abs()
            }))
        }
    }
}

pub type ScoreFn = Box<dyn Fn(usize, usize) -> f64 + Sync>;

fn collect_weights(g: &Graph) -> Vec<f64> {
    let n = g.vertex_count();
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            w[i * n + j] = g.weight(i, j);
        }
    }
    w
}

/// Picks the next pair under the heuristic, or `None` when no candidates remain.
pub fn select_edge<R: Rng>(
    g: &Graph,
    s: Option<&OpinionProfile>,
    h: Heuristic,
    mode: CandidateMode,
    rng: &mut R,
) -> Result<Option<(usize, usize)>> {
    match h {
        Heuristic::Random => {
            let cands: Vec<(usize, usize)> = g
                .candidate_pairs()
                .into_iter()
                .filter(|&(i, j, _)| admits(g, mode, i, j))
                .map(|(i, j, _)| (i, j))
                .collect();
            if cands.is_empty() {
                return Ok(None);
            }
            Ok(Some(cands[rng.gen_range(0..cands.len())]))
        }
        _ => {
            let score = score_pairs(g, s, h)?;
            Ok(best_scored(g, mode, score))
        }
    }
}

/// Runs the greedy loop: up to `budget` steps, each saturating the selected
/// pair to the weight cap and recording post-step metrics.
pub fn run_budgeted<R: Rng>(
    g: &Graph,
    s: &OpinionProfile,
    h: Heuristic,
    budget: usize,
    mode: CandidateMode,
    rng: &mut R,
) -> Result<(Vec<InterventionStep>, Graph)> {
    let mut current = g.clone();
    let mut steps = Vec::new();
    for step_index in 1..=budget {
        let Some((i, j)) = select_edge(&current, Some(s), h, mode, rng)? else {
            break;
        };
        let p = EdgePerturbation::saturating(&current, i, j)?;
        current.set_weight(i, j, current.w_max())?;
        let z = equilibrium_opinions(&current, s)?;
        steps.push(InterventionStep {
            step_index,
            edge: (i, j),
            weight_added: p.delta,
            polarization_after: polarization(&z),
            spectral_gap_after: spectral::spectral_gap(&current)?,
            assortativity_after: opinion_assortativity(&current, s)?,
        });
    }
    Ok((steps, current))
}
