//! Low-end Laplacian eigenstructure and the spectral-gap bounds that govern
//! worst-case polarization.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::{Graph, HMode};

/// Second and third smallest Laplacian eigenvalues with a unit Fiedler vector.
#[derive(Debug, Clone)]
pub struct LowSpectrum {
    pub lambda2: f64,
    pub lambda3: f64,
    pub fiedler: DVector<f64>,
    /// lambda3 - lambda2. Zero when the spectral gap is degenerate.
    pub gap_beta: f64,
}

/// Two-sided estimate.
#[derive(Debug, Clone, Copy)]
pub struct BoundInterval {
    pub lower: f64,
    pub upper: f64,
}

/// Closed-form bounds on the extreme Laplacian eigenvalues:
/// `gap_lower <= lambda2 <= gap_upper` and `lambda_n <= top_upper`.
#[derive(Debug, Clone, Copy)]
pub struct ExtremeBounds {
    pub gap_lower: f64,
    pub gap_upper: f64,
    pub top_upper: f64,
}

/// Full Laplacian eigendecomposition, eigenvalues ascending, eigenvectors as
/// matching columns with the deterministic sign convention applied.
pub(crate) fn sorted_eigen(l: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = l.clone().symmetric_eigen();
    let n = l.nrows();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .expect("finite eigenvalues")
            .then(a.cmp(&b))
    });
    let values: Vec<f64> = idx.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &k) in idx.iter().enumerate() {
        let mut v: DVector<f64> = eig.eigenvectors.column(k).into();
        fix_sign(&mut v);
        vectors.set_column(col, &v);
    }
    (values, vectors)
}

/// Flips the vector so its first entry of magnitude > 1e-12 is positive.
pub(crate) fn fix_sign(v: &mut DVector<f64>) {
    for x in v.iter() {
        if x.abs() > 1e-12 {
            if *x < 0.0 {
                *v *= -1.0;
            }
            return;
        }
    }
}

/// Sorted (ascending) eigenvalues of the combinatorial Laplacian.
pub fn spectrum(g: &Graph) -> Vec<f64> {
    let mut values: Vec<f64> = g
        .laplacian()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    values
}

/// Spectral gap lambda2 for n >= 2.
pub fn spectral_gap(g: &Graph) -> Result<f64> {
    if g.vertex_count() < 2 {
        return Err(Error::TooFewVertices {
            n: g.vertex_count(),
            min: 2,
        });
    }
    Ok(spectrum(g)[1])
}

pub fn low_spectrum(g: &Graph) -> Result<LowSpectrum> {
    let n = g.vertex_count();
    if n < 3 {
        return Err(Error::TooFewVertices { n, min: 3 });
    }
    let (values, vectors) = sorted_eigen(&g.laplacian());
    let lambda2 = values[1];
    let lambda3 = values[2];
    Ok(LowSpectrum {
        lambda2,
        lambda3,
        fiedler: vectors.column(1).into(),
        gap_beta: lambda3 - lambda2,
    })
}

/// Optimal adversarial polarization R / (1 + lambda2)^2.
pub fn worst_case_polarization(lambda2: f64, r: f64) -> f64 {
    r / (1.0 + lambda2).powi(2)
}

fn check_perturbation(g: &Graph, i: usize, j: usize, delta: f64) -> Result<()> {
    let n = g.vertex_count();
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, n });
    }
    if j >= n {
        return Err(Error::IndexOutOfRange { index: j, n });
    }
    if i == j {
        return Err(Error::SelfLoop(i));
    }
    if delta <= 0.0 {
        return Err(Error::NonPositiveDelta(delta));
    }
    let headroom = g.w_max() - g.weight(i, j);
    if g.is_saturated(i, j) || delta > headroom + crate::graph::SATURATION_TOL {
        return Err(Error::SaturationOverflow {
            i,
            j,
            delta,
            headroom,
        });
    }
    Ok(())
}

/// Bounds on `lambda2(L+) - lambda2(L)` after adding weight `delta` to `(i, j)`:
/// `max(1 - 2 delta / beta, 0) delta alpha^2 <= gap change <= delta alpha^2`
/// with `alpha = |v_i - v_j|` for the unit Fiedler vector `v`. A degenerate gap
/// (beta = 0) degrades the lower bound to 0.
pub fn gap_bounds_after_addition(
    g: &Graph,
    i: usize,
    j: usize,
    delta: f64,
) -> Result<BoundInterval> {
    check_perturbation(g, i, j, delta)?;
    let low = low_spectrum(g)?;
    let alpha_sq = (low.fiedler[i] - low.fiedler[j]).powi(2);
    let upper = delta * alpha_sq;
    let shrink = if low.gap_beta > 0.0 {
        (1.0 - 2.0 * delta / low.gap_beta).max(0.0)
    } else {
        0.0
    };
    Ok(BoundInterval {
        lower: shrink * delta * alpha_sq,
        upper,
    })
}

/// Bounds on the drop in worst-case polarization induced by the same perturbation.
pub fn worst_case_reduction_bounds(
    g: &Graph,
    i: usize,
    j: usize,
    delta: f64,
    r: f64,
) -> Result<BoundInterval> {
    check_perturbation(g, i, j, delta)?;
    let low = low_spectrum(g)?;
    let alpha_sq = (low.fiedler[i] - low.fiedler[j]).powi(2);
    let shrink = if low.gap_beta > 0.0 {
        (1.0 - 2.0 * delta / low.gap_beta).max(0.0)
    } else {
        0.0
    };
    let lower = 2.0 * r * delta * shrink * alpha_sq / (1.0 + 2.0 * delta + low.lambda2).powi(3);
    let upper = 4.0 * r * delta.max(delta * delta) * alpha_sq / (1.0 + low.lambda2).powi(3);
    Ok(BoundInterval { lower, upper })
}

/// Closed-form eigenvalue bounds from the degree profile and Cheeger constant.
pub fn laplacian_extreme_bounds(g: &Graph, h_mode: HMode) -> Result<ExtremeBounds> {
    let n = g.vertex_count();
    if n < 2 {
        return Err(Error::TooFewVertices { n, min: 2 });
    }
    let degrees = g.degrees();
    let d_min = degrees.iter().cloned().fold(f64::INFINITY, f64::min);
    let d_max = degrees.iter().cloned().fold(0.0, f64::max);
    let h = g.isoperimetric_number(h_mode)?;
    Ok(ExtremeBounds {
        gap_lower: 0.5 * d_min * h * h,
        gap_upper: 2.0 * d_max * h,
        top_upper: (2.0 * d_max).min(g.w_max() * n as f64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete_graph, path_graph, Graph};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_graph(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Graph {
        let mut g = Graph::new(n, 1.0).unwrap();
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.gen::<f64>() < p {
                    g.set_weight(i, j, rng.gen_range(0.1..1.0)).unwrap();
                }
            }
        }
        g
    }

    /// Characteristic-polynomial roots by bisection on small matrices; an
    /// eigensolver-independent oracle.
    fn charpoly_eigenvalues(l: &DMatrix<f64>) -> Vec<f64> {
        let n = l.nrows();
        assert!(n <= 5);
        let det = |x: f64| (DMatrix::identity(n, n) * x - l).determinant();
        // All eigenvalues lie in [0, 2 d_max]; scan a fine grid for sign changes.
        let hi = 2.0 * (0..n).map(|i| l[(i, i)]).fold(1.0_f64, f64::max) + 1.0;
        let steps = 200_000;
        let mut roots = Vec::new();
        let mut prev_x = -1e-9;
        let mut prev = det(prev_x);
        for k in 1..=steps {
            let x = -1e-9 + (hi + 2e-9) * k as f64 / steps as f64;
            let f = det(x);
            if prev == 0.0 {
                roots.push(prev_x);
            } else if prev * f < 0.0 {
                let (mut a, mut b) = (prev_x, x);
                for _ in 0..80 {
                    let m = 0.5 * (a + b);
                    if det(a) * det(m) <= 0.0 {
                        b = m;
                    } else {
                        a = m;
                    }
                }
                roots.push(0.5 * (a + b));
            }
            prev_x = x;
            prev = f;
        }
        roots
    }

    #[test]
    fn saturated_complete_graph_spectrum() {
        let g = complete_graph(6, 1.5).unwrap();
        let low = low_spectrum(&g).unwrap();
        assert!((low.lambda2 - 9.0).abs() < 1e-9);
        assert!((low.lambda3 - 9.0).abs() < 1e-9);
        assert!(low.gap_beta.abs() < 1e-9);
    }

    #[test]
    fn disconnected_graph_zero_gap() {
        let mut g = Graph::new(4, 1.0).unwrap();
        g.set_weight(0, 1, 1.0).unwrap();
        g.set_weight(2, 3, 1.0).unwrap();
        assert!(low_spectrum(&g).unwrap().lambda2.abs() < 1e-10);
    }

    #[test]
    fn path_three_spectrum() {
        let g = path_graph(3, 1.0).unwrap();
        let low = low_spectrum(&g).unwrap();
        assert!((low.lambda2 - 1.0).abs() < 1e-9);
        assert!((low.lambda3 - 3.0).abs() < 1e-9);
    }

    #[test]
    fn fiedler_vector_contract() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        while checked < 20 {
            let g = random_graph(9, 0.5, &mut rng);
            let low = low_spectrum(&g).unwrap();
            if low.lambda2 < 1e-8 {
                // Disconnected: the zero eigenspace absorbs the Fiedler slot
                // and orthogonality to the all-ones vector is not guaranteed.
                continue;
            }
            checked += 1;
            let l = g.laplacian();
            let ones = DVector::from_element(9, 1.0);
            assert!(low.fiedler.dot(&ones).abs() < 1e-8);
            assert!((low.fiedler.norm() - 1.0).abs() < 1e-10);
            let residual = (&l * &low.fiedler - low.lambda2 * &low.fiedler).norm();
            assert!(residual < 1e-8, "residual {residual}");
        }
    }

    #[test]
    fn eigenvalues_match_charpoly_roots() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut checked = 0;
        while checked < 10 {
            let g = random_graph(5, 0.6, &mut rng);
            let ours = spectrum(&g);
            // Bisection cannot separate (near-)repeated roots; skip those.
            if ours.windows(2).any(|w| w[1] - w[0] < 1e-3) {
                continue;
            }
            checked += 1;
            let roots = charpoly_eigenvalues(&g.laplacian());
            assert_eq!(roots.len(), 5, "charpoly oracle found {} roots", roots.len());
            for (a, b) in ours.iter().zip(roots.iter()) {
                assert!((a - b).abs() < 1e-8, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn worst_case_polarization_values() {
        assert_eq!(worst_case_polarization(0.0, 3.0), 3.0);
        assert!((worst_case_polarization(1.0, 1.0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn gap_bounds_zero_alpha() {
        // Twin leaves 2 and 3 hang off vertex 1; the weak bridge (0, 1) keeps
        // lambda2 well below the twin eigenvalue 1, so the (simple) Fiedler
        // vector is symmetric under the twin swap and alpha = 0.
        let mut g = Graph::new(4, 1.0).unwrap();
        g.set_weight(0, 1, 0.1).unwrap();
        g.set_weight(1, 2, 1.0).unwrap();
        g.set_weight(1, 3, 1.0).unwrap();
        let low = low_spectrum(&g).unwrap();
        assert!(low.gap_beta > 1e-6, "lambda2 should be simple");
        assert!((low.fiedler[2] - low.fiedler[3]).abs() < 1e-10);
        let bounds = gap_bounds_after_addition(&g, 2, 3, 0.5).unwrap();
        assert!(bounds.lower.abs() < 1e-12);
        assert!(bounds.upper.abs() < 1e-12);
    }

    #[test]
    fn gap_bounds_clamp_when_delta_large() {
        let g = path_graph(5, 0.5).unwrap();
        let low = low_spectrum(&g).unwrap();
        let delta = low.gap_beta; // >= beta / 2
        let bounds = gap_bounds_after_addition(&g, 0, 4, delta.min(0.5)).unwrap();
        if delta.min(0.5) >= low.gap_beta / 2.0 {
            assert_eq!(bounds.lower, 0.0);
        }
        assert!(bounds.lower <= bounds.upper + 1e-12);
    }

    #[test]
    fn gap_bounds_contain_recomputed_change() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0;
        while checked < 50 {
            let g = random_graph(10, 0.45, &mut rng);
            let Ok(low) = low_spectrum(&g) else { continue };
            if low.gap_beta < 1e-8 {
                continue;
            }
            let cands = g.candidate_pairs();
            if cands.is_empty() {
                continue;
            }
            let (i, j, head) = cands[rng.gen_range(0..cands.len())];
            let delta = head * rng.gen_range(0.2..1.0);
            let bounds = gap_bounds_after_addition(&g, i, j, delta).unwrap();
            let mut g2 = g.clone();
            g2.set_weight(i, j, g.weight(i, j) + delta).unwrap();
            let change = spectral_gap(&g2).unwrap() - low.lambda2;
            assert!(
                bounds.lower - 1e-8 <= change && change <= bounds.upper + 1e-8,
                "change {change} outside [{}, {}]",
                bounds.lower,
                bounds.upper
            );
            checked += 1;
        }
    }

    #[test]
    fn reduction_bounds_plug_in() {
        // alpha^2 = 2, lambda2 = 0, delta = 1, beta large: upper = 8R.
        let upper = 4.0 * 1.0 * 1.0_f64.max(1.0) * 2.0 / 1.0_f64.powi(3);
        assert_eq!(upper, 8.0);
    }

    #[test]
    fn monotone_gap_under_weight_addition() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..30 {
            let g = random_graph(8, 0.4, &mut rng);
            let cands = g.candidate_pairs();
            if cands.is_empty() {
                continue;
            }
            let (i, j, head) = cands[rng.gen_range(0..cands.len())];
            let before = spectral_gap(&g).unwrap();
            let mut g2 = g.clone();
            g2.set_weight(i, j, g.weight(i, j) + head).unwrap();
            assert!(spectral_gap(&g2).unwrap() >= before - 1e-9);
        }
    }

    #[test]
    fn extreme_bounds_saturated_complete_graph() {
        let g = complete_graph(5, 1.0).unwrap();
        let b = laplacian_extreme_bounds(&g, HMode::Exact).unwrap();
        assert!((b.top_upper - 5.0).abs() < 1e-12);
        let top = *spectrum(&g).last().unwrap();
        assert!((top - 5.0).abs() < 1e-9);
    }

    #[test]
    fn extreme_bounds_disconnected() {
        let mut g = Graph::new(4, 1.0).unwrap();
        g.set_weight(0, 1, 1.0).unwrap();
        let b = laplacian_extreme_bounds(&g, HMode::Exact).unwrap();
        assert_eq!(b.gap_lower, 0.0);
        assert_eq!(b.gap_upper, 0.0);
    }

    #[test]
    fn extreme_bounds_hold_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..100 {
            let n = rng.gen_range(3..=10);
            let g = random_graph(n, 0.5, &mut rng);
            let b = laplacian_extreme_bounds(&g, HMode::Exact).unwrap();
            let spec = spectrum(&g);
            assert!(b.gap_lower <= spec[1] + 1e-9);
            assert!(spec[1] <= b.gap_upper + 1e-9);
            assert!(*spec.last().unwrap() <= b.top_upper + 1e-9);
        }
    }
}
