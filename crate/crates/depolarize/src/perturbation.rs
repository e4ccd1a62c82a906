//! Exact and first-order effects of single-edge weight additions on
//! polarization.
//!
//! Everything here reduces to the rank-one structure of the perturbed
//! Laplacian: with v = e_i - e_j and u = (I+L)^{-1} v, the quadratic forms
//! a = v'u and b = u'u drive all closed forms, and the Sherman-Morrison
//! update turns each candidate pair into two triangular solves against one
//! cached factorization.

use crate::dynamics::{equilibrium_opinions, polarization, Factorized, OpinionProfile};
use crate::error::{Error, Result};
use crate::graph::{Graph, SATURATION_TOL};
use crate::spectral::spectrum;
use nalgebra::DVector;

/// Single-pair weight addition, validated against a graph.
#[derive(Debug, Clone, Copy)]
pub struct EdgePerturbation {
    pub i: usize,
    pub j: usize,
    pub delta: f64,
}

impl EdgePerturbation {
    pub fn new(g: &Graph, i: usize, j: usize, delta: f64) -> Result<Self> {
        let n = g.vertex_count();
        for idx in [i, j] {
            if idx >= n {
                return Err(Error::IndexOutOfRange { index: idx, n });
            }
        }
        if i == j {
            return Err(Error::SelfLoop(i));
        }
        if delta <= 0.0 {
            return Err(Error::NonPositiveDelta(delta));
        }
        let headroom = g.w_max() - g.weight(i, j);
        if g.is_saturated(i, j) || delta > headroom + SATURATION_TOL {
            return Err(Error::SaturationOverflow {
                i,
                j,
                delta,
                headroom,
            });
        }
        Ok(EdgePerturbation { i, j, delta })
    }

    /// Saturating perturbation: raise the pair to the weight cap.
    pub fn saturating(g: &Graph, i: usize, j: usize) -> Result<Self> {
        EdgePerturbation::new(g, i, j, g.w_max() - g.weight(i, j))
    }
}

/// New graph with `delta` added to the weight of `(i, j)`.
pub fn add_weight(g: &Graph, p: &EdgePerturbation) -> Result<Graph> {
    // Re-validate so stale perturbations cannot overflow the cap.
    let p = EdgePerturbation::new(g, p.i, p.j, p.delta)?;
    let mut out = g.clone();
    let w = (g.weight(p.i, p.j) + p.delta).min(g.w_max());
    out.set_weight(p.i, p.j, w)?;
    Ok(out)
}

/// The rank-one quantities shared by every formula below.
struct PairTerms {
    /// v' (I+L)^{-1} v
    a: f64,
    /// v' (I+L)^{-2} v
    b: f64,
    /// z~' (I+L)^{-1} v
    zu: f64,
    /// z_i - z_j  (equals z~' v)
    zv: f64,
}

fn pair_terms(f: &Factorized, z_centered: &DVector<f64>, i: usize, j: usize) -> PairTerms {
    let n = f.n();
    let mut v = DVector::zeros(n);
    v[i] = 1.0;
    v[j] = -1.0;
    let u = f.solve(&v);
    PairTerms {
        a: u[i] - u[j],
        b: u.norm_squared(),
        zu: z_centered.dot(&u),
        zv: z_centered[i] - z_centered[j],
    }
}

/// Exact change P(z) - P(z+) from one linear solve, via the Sherman-Morrison
/// closed form. Positive means the addition reduces polarization.
pub fn polarization_delta_exact(g: &Graph, s: &OpinionProfile, p: &EdgePerturbation) -> Result<f64> {
    let p = EdgePerturbation::new(g, p.i, p.j, p.delta)?;
    let f = Factorized::new(g)?;
    let z = OpinionProfile::from_dvector(f.solve(s.as_dvector()));
    let zc = z.centered();
    let t = pair_terms(&f, &zc, p.i, p.j);
    Ok(delta_from_terms(&t, p.delta))
}

fn delta_from_terms(t: &PairTerms, delta: f64) -> f64 {
    let denom = 1.0 + delta * t.a;
    let grad = -2.0 * t.zu * t.zv; // dP/dw
    -delta * grad / denom - delta * delta * t.b * t.zv * t.zv / (denom * denom)
}

/// Closed-form partial derivative dP/dw_ij = -2 z~' (I+L)^{-1} v v' z~.
pub fn polarization_derivative(g: &Graph, s: &OpinionProfile, i: usize, j: usize) -> Result<f64> {
    let n = g.vertex_count();
    for idx in [i, j] {
        if idx >= n {
            return Err(Error::IndexOutOfRange { index: idx, n });
        }
    }
    if i == j {
        return Err(Error::SelfLoop(i));
    }
    let f = Factorized::new(g)?;
    let z = OpinionProfile::from_dvector(f.solve(s.as_dvector()));
    let zc = z.centered();
    // (I+L)^{-1} is symmetric: z~'(I+L)^{-1}v = ((I+L)^{-1}z~)_i - ((I+L)^{-1}z~)_j.
    let y = f.solve(&zc);
    Ok(-2.0 * (y[i] - y[j]) * (zc[i] - zc[j]))
}

/// True iff adding `delta` to `(i, j)` strictly reduces polarization:
/// -dP/dw > (z_i - z_j)^2 b / (1/delta + a).
pub fn reduction_condition(g: &Graph, s: &OpinionProfile, p: &EdgePerturbation) -> Result<bool> {
    let p = EdgePerturbation::new(g, p.i, p.j, p.delta)?;
    let f = Factorized::new(g)?;
    let z = OpinionProfile::from_dvector(f.solve(s.as_dvector()));
    let zc = z.centered();
    let t = pair_terms(&f, &zc, p.i, p.j);
    let grad = -2.0 * t.zu * t.zv;
    Ok(-grad > t.zv * t.zv * t.b / (1.0 / p.delta + t.a))
}

/// Verifies the twin precondition N(i) = N(j) with matching weights and
/// returns the common weighted degree d_i.
fn twin_degree(g: &Graph, i: usize, j: usize) -> Result<f64> {
    let n = g.vertex_count();
    for k in 0..n {
        if k == i || k == j {
            continue;
        }
        if (g.weight(i, k) - g.weight(j, k)).abs() > 1e-12 {
            return Err(Error::NotTwins { i, j });
        }
    }
    g.degree(i)
}

/// Closed-form reduction for twin vertices:
/// (z_i - z_j)^2 * 2 delta (1 + delta + d_i - w_ij) / (1 + 2 delta + d_i - w_ij)^2.
/// Always non-negative.
pub fn twin_edge_delta(g: &Graph, s: &OpinionProfile, p: &EdgePerturbation) -> Result<f64> {
    let p = EdgePerturbation::new(g, p.i, p.j, p.delta)?;
    let d = twin_degree(g, p.i, p.j)? - g.weight(p.i, p.j);
    let z = equilibrium_opinions(g, s)?;
    let dz = z.get(p.i) - z.get(p.j);
    let delta = p.delta;
    Ok(dz * dz * 2.0 * delta * (1.0 + delta + d) / (1.0 + 2.0 * delta + d).powi(2))
}

/// Two-sided bounds on the exact reduction. The upper bound is certified for
/// the descent direction (dP/dw <= 0, the case the planner acts on); for
/// ascent pairs the reported value can undershoot the true change. The lower
/// bound holds when the stated margin epsilon is positive, and is absent when
/// the hypothesis cannot be evaluated (z_i = z_j) or fails.
#[derive(Debug, Clone, Copy)]
pub struct DeltaBounds {
    pub upper: f64,
    pub lower: Option<f64>,
    pub epsilon: Option<f64>,
}

pub fn polarization_delta_bounds(
    g: &Graph,
    s: &OpinionProfile,
    p: &EdgePerturbation,
) -> Result<DeltaBounds> {
    let p = EdgePerturbation::new(g, p.i, p.j, p.delta)?;
    let f = Factorized::new(g)?;
    let z = OpinionProfile::from_dvector(f.solve(s.as_dvector()));
    let zc = z.centered();
    let t = pair_terms(&f, &zc, p.i, p.j);
    let spec = spectrum(g);
    let lambda2 = spec[1];
    let lambda_n = *spec.last().expect("non-empty spectrum");
    let grad = -2.0 * t.zu * t.zv;
    let delta = p.delta;
    let upper = (1.0 + lambda_n) / (1.0 + 2.0 * delta + lambda_n) * (-delta * grad);
    // A numerically null z_i - z_j leaves the hypothesis ratio undefined.
    if t.zv.abs() < 1e-13 {
        return Ok(DeltaBounds {
            upper,
            lower: None,
            epsilon: None,
        });
    }
    let eps = t.zu / t.zv - delta / (2.0 * delta + (1.0 + lambda2).powi(2));
    if eps > 0.0 {
        let lower = 2.0 * delta * eps * t.zv * t.zv / (1.0 + 2.0 * delta);
        Ok(DeltaBounds {
            upper,
            lower: Some(lower),
            epsilon: Some(eps),
        })
    } else {
        Ok(DeltaBounds {
            upper,
            lower: None,
            epsilon: None,
        })
    }
}

/// Full-recompute reference: polarization before minus after. Test oracle and
/// sanity path; the closed form above is the production route.
pub fn polarization_delta_recompute(
    g: &Graph,
    s: &OpinionProfile,
    p: &EdgePerturbation,
) -> Result<f64> {
    let before = polarization(&equilibrium_opinions(g, s)?);
    let after = polarization(&equilibrium_opinions(&add_weight(g, p)?, s)?);
    Ok(before - after)
}
