//! Friedkin-Johnsen equilibrium, polarization and disagreement metrics,
//! contraction bounds, and opinion assortativity.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::graph::{Graph, HMode};

/// A vector of opinions, one entry per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct OpinionProfile {
    values: DVector<f64>,
}

impl OpinionProfile {
    pub fn from_vec(values: Vec<f64>) -> Self {
        OpinionProfile {
            values: DVector::from_vec(values),
        }
    }

    pub fn from_dvector(values: DVector<f64>) -> Self {
        OpinionProfile { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.len() == 0
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn as_dvector(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().copied()
    }

    pub fn mean(&self) -> f64 {
        self.values.mean()
    }

    /// Mean-centered copy of the opinions.
    pub fn centered(&self) -> DVector<f64> {
        let m = self.mean();
        self.values.map(|x| x - m)
    }
}

/// Cached Cholesky factorization of I + L for one graph version.
///
/// One factorization serves every solve against that graph; candidate scoring
/// only needs two triangular solves per right-hand side.
pub struct Factorized {
    a: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
}

impl Factorized {
    pub fn new(g: &Graph) -> Result<Self> {
        let n = g.vertex_count();
        let a = DMatrix::identity(n, n) + g.laplacian();
        let chol = Cholesky::new(a.clone()).ok_or(Error::SolveFailure)?;
        Ok(Factorized { a, chol })
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// Solves (I + L) x = b with one round of iterative refinement when the
    /// relative residual exceeds 1e-12.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let mut x = self.chol.solve(b);
        let b_norm = b.norm();
        if b_norm > 0.0 {
            for _ in 0..2 {
                let r = b - &self.a * &x;
                if r.norm() / b_norm <= 1e-12 {
                    break;
                }
                x += self.chol.solve(&r);
            }
        }
        x
    }
}

fn check_dims(g: &Graph, s: &OpinionProfile) -> Result<()> {
    if g.vertex_count() != s.len() {
        return Err(Error::DimensionMismatch {
            expected: g.vertex_count(),
            actual: s.len(),
        });
    }
    Ok(())
}

/// Expressed opinions z = (I + L)^{-1} s.
pub fn equilibrium_opinions(g: &Graph, s: &OpinionProfile) -> Result<OpinionProfile> {
    check_dims(g, s)?;
    let f = Factorized::new(g)?;
    Ok(OpinionProfile::from_dvector(f.solve(s.as_dvector())))
}

/// Outcome of the fixed-point iteration oracle.
#[derive(Debug, Clone)]
pub struct IterationOutcome {
    pub opinions: OpinionProfile,
    pub steps: usize,
    pub converged: bool,
}

/// Repeated application of the averaging update until the sup-norm step change
/// drops below `tol`. Independent of the linear-solve path.
pub fn iterate_opinions(
    g: &Graph,
    s: &OpinionProfile,
    max_steps: usize,
    tol: f64,
) -> Result<IterationOutcome> {
    check_dims(g, s)?;
    if tol <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "iteration tolerance must be positive, got {tol}"
        )));
    }
    let n = g.vertex_count();
    let mut current: Vec<f64> = s.iter().collect();
    let mut next = vec![0.0; n];
    for step in 1..=max_steps {
        let mut change: f64 = 0.0;
        for i in 0..n {
            let mut acc = s.get(i);
            let mut denom = 1.0;
            for &j in g.neighbors(i) {
                let w = g.weight(i, j);
                acc += w * current[j];
                denom += w;
            }
            next[i] = acc / denom;
            change = change.max((next[i] - current[i]).abs());
        }
        std::mem::swap(&mut current, &mut next);
        if change < tol {
            return Ok(IterationOutcome {
                opinions: OpinionProfile::from_vec(current),
                steps: step,
                converged: true,
            });
        }
    }
    Ok(IterationOutcome {
        opinions: OpinionProfile::from_vec(current),
        steps: max_steps,
        converged: false,
    })
}

/// P(x) = sum_i (x_i - mean)^2.
pub fn polarization(x: &OpinionProfile) -> f64 {
    x.centered().norm_squared()
}

/// D_ij(x) = (x_i - x_j)^2.
pub fn disagreement(x: &OpinionProfile, i: usize, j: usize) -> Result<f64> {
    let n = x.len();
    for idx in [i, j] {
        if idx >= n {
            return Err(Error::IndexOutOfRange { index: idx, n });
        }
    }
    Ok((x.get(i) - x.get(j)).powi(2))
}

/// Sandwich on expressed polarization from the degree profile and Cheeger constant.
#[derive(Debug, Clone, Copy)]
pub struct ContractionBounds {
    pub lower: f64,
    pub upper: f64,
}

/// Lower = P(s) / (1 + min(2 d_max, w_max n))^2,
/// upper = P(s) / (1 + d_min h^2 / 2)^2.
///
/// With sweep-mode h the upper bound is heuristic: the sweep value
/// over-estimates h, which can only shrink the reported upper bound below the
/// certified one. Verification uses exact mode.
pub fn polarization_bounds(g: &Graph, s: &OpinionProfile, h_mode: HMode) -> Result<ContractionBounds> {
    check_dims(g, s)?;
    let n = g.vertex_count();
    if n < 2 {
        return Err(Error::TooFewVertices { n, min: 2 });
    }
    let p_s = polarization(s);
    let degrees = g.degrees();
    let d_min = degrees.iter().cloned().fold(f64::INFINITY, f64::min);
    let d_max = degrees.iter().cloned().fold(0.0, f64::max);
    let h = g.isoperimetric_number(h_mode)?;
    let lower = p_s / (1.0 + (2.0 * d_max).min(g.w_max() * n as f64)).powi(2);
    let upper = p_s / (1.0 + 0.5 * d_min * h * h).powi(2);
    Ok(ContractionBounds { lower, upper })
}

/// Global polarization minimum P(s) / (1 + w_max n)^2, attained on the
/// saturated complete graph.
pub fn complete_graph_floor(s: &OpinionProfile, w_max: f64) -> f64 {
    let n = s.len() as f64;
    polarization(s) / (1.0 + w_max * n).powi(2)
}

/// Edge-weighted Pearson correlation of opinion values across edge endpoints,
/// each undirected edge counted in both orientations. `None` when the endpoint
/// values carry zero variance.
pub fn opinion_assortativity(g: &Graph, s: &OpinionProfile) -> Result<Option<f64>> {
    check_dims(g, s)?;
    if g.edge_count() == 0 {
        return Err(Error::NoEdges);
    }
    let mut w_total = 0.0;
    let mut mean = 0.0;
    for (i, j, w) in g.edges() {
        w_total += 2.0 * w;
        mean += w * (s.get(i) + s.get(j));
    }
    mean /= w_total;
    let mut cov = 0.0;
    let mut var = 0.0;
    for (i, j, w) in g.edges() {
        let a = s.get(i) - mean;
        let b = s.get(j) - mean;
        cov += 2.0 * w * a * b;
        var += w * (a * a + b * b);
    }
    if var <= 1e-15 * w_total {
        return Ok(None);
    }
    Ok(Some(cov / var))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete_graph, path_graph, Graph};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_connected(n: usize, rng: &mut ChaCha8Rng) -> Graph {
        let mut g = path_graph(n, 1.0).unwrap();
        for i in 0..n {
            for j in (i + 1)..n {
                if g.weight(i, j) == 0.0 && rng.gen::<f64>() < 0.3 {
                    g.set_weight(i, j, rng.gen_range(0.1..1.0)).unwrap();
                }
            }
        }
        g
    }

    fn random_profile(n: usize, rng: &mut ChaCha8Rng) -> OpinionProfile {
        OpinionProfile::from_vec((0..n).map(|_| rng.gen::<f64>()).collect())
    }

    #[test]
    fn constant_opinions_are_a_fixed_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = random_connected(7, &mut rng);
        let s = OpinionProfile::from_vec(vec![0.37; 7]);
        let z = equilibrium_opinions(&g, &s).unwrap();
        for v in z.iter() {
            assert!((v - 0.37).abs() < 1e-12);
        }
    }

    #[test]
    fn two_path_equilibrium() {
        let g = path_graph(2, 1.0).unwrap();
        let s = OpinionProfile::from_vec(vec![0.0, 1.0]);
        let z = equilibrium_opinions(&g, &s).unwrap();
        assert!((z.get(0) - 1.0 / 3.0).abs() < 1e-12);
        assert!((z.get(1) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn saturated_triangle_equilibrium() {
        let g = complete_graph(3, 1.0).unwrap();
        let s = OpinionProfile::from_vec(vec![0.0, 0.0, 1.0]);
        let z = equilibrium_opinions(&g, &s).unwrap();
        assert!((z.get(0) - 0.25).abs() < 1e-12);
        assert!((z.get(1) - 0.25).abs() < 1e-12);
        assert!((z.get(2) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn equilibrium_dimension_mismatch() {
        let g = path_graph(3, 1.0).unwrap();
        let s = OpinionProfile::from_vec(vec![0.0, 1.0]);
        assert!(matches!(
            equilibrium_opinions(&g, &s),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn iteration_isolated_vertices() {
        let g = Graph::new(4, 1.0).unwrap();
        let s = OpinionProfile::from_vec(vec![0.1, 0.4, 0.9, 0.5]);
        let out = iterate_opinions(&g, &s, 10, 1e-12).unwrap();
        assert!(out.converged);
        assert_eq!(out.steps, 1);
        assert_eq!(out.opinions, s);
    }

    #[test]
    fn iteration_matches_solve_on_two_path() {
        let g = path_graph(2, 1.0).unwrap();
        let s = OpinionProfile::from_vec(vec![0.0, 1.0]);
        let out = iterate_opinions(&g, &s, 10_000, 1e-12).unwrap();
        assert!(out.converged);
        assert!((out.opinions.get(0) - 1.0 / 3.0).abs() < 1e-10);
        assert!((out.opinions.get(1) - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn iteration_and_solve_agree_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = rng.gen_range(2..=50);
            let mut g = Graph::new(n, 1.0).unwrap();
            for i in 0..n {
                for j in (i + 1)..n {
                    if rng.gen::<f64>() < 0.2 {
                        g.set_weight(i, j, rng.gen::<f64>()).unwrap();
                    }
                }
            }
            let s = random_profile(n, &mut rng);
            let z = equilibrium_opinions(&g, &s).unwrap();
            let it = iterate_opinions(&g, &s, 200_000, 1e-12).unwrap();
            assert!(it.converged);
            let gap = (z.as_dvector() - it.opinions.as_dvector()).amax();
            assert!(gap < 1e-8, "sup gap {gap}");
        }
    }

    #[test]
    fn polarization_values() {
        assert_eq!(polarization(&OpinionProfile::from_vec(vec![0.4; 5])), 0.0);
        let p = polarization(&OpinionProfile::from_vec(vec![0.0, 1.0]));
        assert!((p - 0.5).abs() < 1e-15);
    }

    #[test]
    fn disagreement_values() {
        let x = OpinionProfile::from_vec(vec![0.2, 0.7]);
        assert_eq!(disagreement(&x, 0, 0).unwrap(), 0.0);
        assert!((disagreement(&x, 0, 1).unwrap() - 0.25).abs() < 1e-15);
        let y = OpinionProfile::from_vec(vec![0.0, 1.0]);
        assert_eq!(disagreement(&y, 0, 1).unwrap(), 1.0);
        assert!(disagreement(&y, 0, 5).is_err());
    }

    #[test]
    fn contraction_and_mean_preservation() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let n = rng.gen_range(2..=20);
            let g = random_connected(n, &mut rng);
            let s = random_profile(n, &mut rng);
            let z = equilibrium_opinions(&g, &s).unwrap();
            assert!(polarization(&z) <= polarization(&s) + 1e-12);
            assert!((z.mean() - s.mean()).abs() <= 1e-10);
        }
    }

    #[test]
    fn bounds_disconnected_upper_is_innate() {
        let mut g = Graph::new(4, 1.0).unwrap();
        g.set_weight(0, 1, 1.0).unwrap();
        g.set_weight(2, 3, 1.0).unwrap();
        let s = OpinionProfile::from_vec(vec![0.0, 1.0, 0.3, 0.9]);
        let b = polarization_bounds(&g, &s, HMode::Exact).unwrap();
        assert!((b.upper - polarization(&s)).abs() < 1e-12);
    }

    #[test]
    fn bounds_k5_lower_uses_wn_term() {
        let g = complete_graph(5, 1.0).unwrap();
        let s = OpinionProfile::from_vec(vec![0.0, 0.2, 0.4, 0.8, 1.0]);
        let b = polarization_bounds(&g, &s, HMode::Exact).unwrap();
        // 2 d_max = 8 exceeds w_max n = 5, so the w_max n term binds.
        assert!((b.lower - polarization(&s) / 36.0).abs() < 1e-12);
    }

    #[test]
    fn bounds_sandwich_equilibrium() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let n = rng.gen_range(2..=8);
            let g = random_connected(n, &mut rng);
            let s = random_profile(n, &mut rng);
            let b = polarization_bounds(&g, &s, HMode::Exact).unwrap();
            let p = polarization(&equilibrium_opinions(&g, &s).unwrap());
            assert!(b.lower - 1e-10 <= p && p <= b.upper + 1e-10);
        }
    }

    #[test]
    fn floor_cases() {
        assert_eq!(
            complete_graph_floor(&OpinionProfile::from_vec(vec![0.5; 4]), 1.0),
            0.0
        );
        let s = OpinionProfile::from_vec(vec![0.0, 0.0, 1.0]);
        let floor = complete_graph_floor(&s, 1.0);
        assert!((floor - (2.0 / 3.0) / 16.0).abs() < 1e-15);
        let g = complete_graph(3, 1.0).unwrap();
        let p = polarization(&equilibrium_opinions(&g, &s).unwrap());
        assert!((p - floor).abs() < 1e-14);
    }

    #[test]
    fn floor_is_global_minimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let n = rng.gen_range(2..=12);
            let g = random_connected(n, &mut rng);
            let s = random_profile(n, &mut rng);
            let p = polarization(&equilibrium_opinions(&g, &s).unwrap());
            assert!(p >= complete_graph_floor(&s, g.w_max()) - 1e-12);
        }
    }

    #[test]
    fn assortativity_bipartite_crossing() {
        let mut g = Graph::new(4, 1.0).unwrap();
        g.set_weight(0, 2, 1.0).unwrap();
        g.set_weight(0, 3, 1.0).unwrap();
        g.set_weight(1, 2, 1.0).unwrap();
        g.set_weight(1, 3, 1.0).unwrap();
        let s = OpinionProfile::from_vec(vec![0.0, 0.0, 1.0, 1.0]);
        let r = opinion_assortativity(&g, &s).unwrap().unwrap();
        assert!((r + 1.0).abs() < 1e-12);
    }

    #[test]
    fn assortativity_disjoint_cliques() {
        let mut g = Graph::new(6, 1.0).unwrap();
        for c in 0..2 {
            let base = 3 * c;
            for i in 0..3 {
                for j in (i + 1)..3 {
                    g.set_weight(base + i, base + j, 1.0).unwrap();
                }
            }
        }
        let s = OpinionProfile::from_vec(vec![0.1, 0.1, 0.1, 0.9, 0.9, 0.9]);
        let r = opinion_assortativity(&g, &s).unwrap().unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn assortativity_undefined_on_constant_opinions() {
        let g = complete_graph(4, 1.0).unwrap();
        let s = OpinionProfile::from_vec(vec![0.5; 4]);
        assert_eq!(opinion_assortativity(&g, &s).unwrap(), None);
    }

    #[test]
    fn assortativity_requires_edges() {
        let g = Graph::new(3, 1.0).unwrap();
        let s = OpinionProfile::from_vec(vec![0.0, 0.5, 1.0]);
        assert!(matches!(
            opinion_assortativity(&g, &s),
            Err(Error::NoEdges)
        ));
    }
}
