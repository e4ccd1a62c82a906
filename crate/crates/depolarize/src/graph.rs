//! Weighted undirected graphs with a hard cap on edge weights.
//!
//! The weight matrix is stored densely (all target graphs are small) with
//! adjacency lists kept alongside for O(d) neighbor iteration.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Weights within this distance of the cap count as saturated.
pub const SATURATION_TOL: f64 = 1e-12;

/// Largest vertex count for which exact isoperimetric enumeration is allowed.
pub const EXACT_ISO_LIMIT: usize = 20;

/// How the isoperimetric number is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HMode {
    /// Exhaustive minimum over all proper subsets (n <= 20 only).
    Exact,
    /// Minimum over the n-1 prefix cuts of the Fiedler-vector ordering.
    /// This is an upper bound on the true isoperimetric number.
    Sweep,
}

impl std::str::FromStr for HMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(HMode::Exact),
            "sweep" => Ok(HMode::Sweep),
            other => Err(Error::InvalidConfig(format!("unknown h-mode `{other}`"))),
        }
    }
}

/// Symmetric weighted graph on `n` vertices, no self-loops, weights in `[0, w_max]`.
#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    w_max: f64,
    weights: DMatrix<f64>,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    /// Empty graph on `n` vertices with weight cap `w_max`.
    pub fn new(n: usize, w_max: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::TooFewVertices { n, min: 1 });
        }
        if w_max <= 0.0 || w_max.is_nan() {
            return Err(Error::WeightOutOfRange { w: w_max, w_max });
        }
        Ok(Graph {
            n,
            w_max,
            weights: DMatrix::zeros(n, n),
            adj: vec![Vec::new(); n],
        })
    }

    /// Builds a graph from a full weight matrix, validating all invariants.
    pub fn from_weights(weights: DMatrix<f64>, w_max: f64) -> Result<Self> {
        let n = weights.nrows();
        if n == 0 || weights.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n.max(1),
                actual: weights.ncols(),
            });
        }
        let mut g = Graph::new(n, w_max)?;
        for i in 0..n {
            if weights[(i, i)] != 0.0 {
                return Err(Error::SelfLoop(i));
            }
            for j in (i + 1)..n {
                let w = weights[(i, j)];
                if w != weights[(j, i)] {
                    return Err(Error::InvalidConfig(format!(
                        "weight matrix not symmetric at ({i}, {j})"
                    )));
                }
                if w != 0.0 {
                    g.set_weight(i, j, w)?;
                }
            }
        }
        Ok(g)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn w_max(&self) -> f64 {
        self.w_max
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.n {
            return Err(Error::IndexOutOfRange { index: i, n: self.n });
        }
        Ok(())
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[(i, j)]
    }

    /// Sets the weight of pair `(i, j)` symmetrically, keeping adjacency lists in sync.
    pub fn set_weight(&mut self, i: usize, j: usize, w: f64) -> Result<()> {
        self.check_index(i)?;
        self.check_index(j)?;
        if i == j {
            return Err(Error::SelfLoop(i));
        }
        if !(0.0..=self.w_max).contains(&w) {
            return Err(Error::WeightOutOfRange { w, w_max: self.w_max });
        }
        let old = self.weights[(i, j)];
        self.weights[(i, j)] = w;
        self.weights[(j, i)] = w;
        if old == 0.0 && w > 0.0 {
            insert_sorted(&mut self.adj[i], j);
            insert_sorted(&mut self.adj[j], i);
        } else if old > 0.0 && w == 0.0 {
            remove_sorted(&mut self.adj[i], j);
            remove_sorted(&mut self.adj[j], i);
        }
        Ok(())
    }

    /// Weighted degree of vertex `i`.
    pub fn degree(&self, i: usize) -> Result<f64> {
        self.check_index(i)?;
        Ok(self.adj[i].iter().map(|&j| self.weights[(i, j)]).sum())
    }

    /// All weighted degrees.
    pub fn degrees(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.adj[i].iter().map(|&j| self.weights[(i, j)]).sum())
            .collect()
    }

    /// Neighbors of `i` in ascending order.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    /// Edges as `(i, j, w)` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            self.adj[i]
                .iter()
                .filter(move |&&j| j > i)
                .map(move |&j| (i, j, self.weights[(i, j)]))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|a| a.len()).sum::<usize>() / 2
    }

    pub fn total_weight(&self) -> f64 {
        self.edges().map(|(_, _, w)| w).sum()
    }

    /// Combinatorial Laplacian L = D - W.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let mut l = -&self.weights;
        for i in 0..self.n {
            l[(i, i)] = self.degree(i).expect("index in range");
        }
        l
    }

    pub fn is_saturated(&self, i: usize, j: usize) -> bool {
        self.weights[(i, j)] >= self.w_max - SATURATION_TOL
    }

    /// All unordered pairs `i < j` with headroom, in ascending `(i, j)` order.
    pub fn candidate_pairs(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if !self.is_saturated(i, j) {
                    out.push((i, j, self.w_max - self.weights[(i, j)]));
                }
            }
        }
        out
    }

    /// Cut weight between `members` (given as a bitmask-free sorted flag vector)
    /// and its complement, plus the two side volumes.
    fn cut_and_volumes(&self, in_x: &[bool]) -> (f64, f64, f64) {
        let mut cut = 0.0;
        let mut vol_x = 0.0;
        let mut vol_c = 0.0;
        for i in 0..self.n {
            let d: f64 = self.adj[i].iter().map(|&j| self.weights[(i, j)]).sum();
            if in_x[i] {
                vol_x += d;
                for &j in &self.adj[i] {
                    if !in_x[j] {
                        cut += self.weights[(i, j)];
                    }
                }
            } else {
                vol_c += d;
            }
        }
        (cut, vol_x, vol_c)
    }

    /// Conductance h(X) = cut(X, X^c) / min(vol X, vol X^c).
    pub fn conductance(&self, x: &VertexSubset) -> Result<f64> {
        x.validate(self.n)?;
        let mut in_x = vec![false; self.n];
        for &v in &x.members {
            in_x[v] = true;
        }
        let (cut, vol_x, vol_c) = self.cut_and_volumes(&in_x);
        let min_vol = vol_x.min(vol_c);
        if min_vol <= 0.0 {
            return Err(Error::ZeroVolume);
        }
        Ok(cut / min_vol)
    }

    /// Isoperimetric number (Cheeger constant).
    ///
    /// Exact mode enumerates all proper subsets (n <= 20). Sweep mode takes the
    /// minimum conductance over prefix cuts of the Fiedler ordering, which is an
    /// upper bound on the true value. Subsets whose smaller side carries zero
    /// volume witness disconnection and score 0.
    pub fn isoperimetric_number(&self, mode: HMode) -> Result<f64> {
        if self.n < 2 {
            return Err(Error::TooFewVertices { n: self.n, min: 2 });
        }
        match mode {
            HMode::Exact => self.isoperimetric_exact(),
            HMode::Sweep => self.isoperimetric_sweep(),
        }
    }

    fn isoperimetric_exact(&self) -> Result<f64> {
        if self.n > EXACT_ISO_LIMIT {
            return Err(Error::ExactSizeLimit {
                n: self.n,
                max: EXACT_ISO_LIMIT,
            });
        }
        let mut best = f64::INFINITY;
        let mut in_x = vec![false; self.n];
        // Each complementary pair {X, X^c} is visited once: vertex n-1 stays out of X.
        for mask in 1u32..(1u32 << (self.n - 1)) {
            for (i, flag) in in_x.iter_mut().enumerate() {
                *flag = mask & (1 << i) != 0;
            }
            let (cut, vol_x, vol_c) = self.cut_and_volumes(&in_x);
            let min_vol = vol_x.min(vol_c);
            let h = if min_vol <= 0.0 { 0.0 } else { cut / min_vol };
            if h < best {
                best = h;
            }
            if best == 0.0 {
                break;
            }
        }
        Ok(best)
    }

    fn isoperimetric_sweep(&self) -> Result<f64> {
        if self.n == 2 {
            return self.isoperimetric_exact();
        }
        let spectrum = crate::spectral::low_spectrum(self)?;
        let mut order: Vec<usize> = (0..self.n).collect();
        order.sort_by(|&a, &b| {
            spectrum.fiedler[a]
                .partial_cmp(&spectrum.fiedler[b])
                .expect("finite fiedler entries")
                .then(a.cmp(&b))
        });
        let degrees = self.degrees();
        let total_vol: f64 = degrees.iter().sum();
        let mut in_x = vec![false; self.n];
        let mut cut = 0.0;
        let mut vol_x = 0.0;
        let mut best = f64::INFINITY;
        for &v in order.iter().take(self.n - 1) {
            in_x[v] = true;
            vol_x += degrees[v];
            for &u in &self.adj[v] {
                let w = self.weights[(v, u)];
                if in_x[u] {
                    cut -= w;
                } else {
                    cut += w;
                }
            }
            let min_vol = vol_x.min(total_vol - vol_x);
            let h = if min_vol <= 0.0 { 0.0 } else { cut / min_vol };
            if h < best {
                best = h;
            }
        }
        Ok(best)
    }
}

/// Non-empty proper subset of vertices.
#[derive(Debug, Clone)]
pub struct VertexSubset {
    members: Vec<usize>,
}

impl VertexSubset {
    pub fn new(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        VertexSubset { members }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.members.is_empty() || self.members.len() >= n {
            return Err(Error::InvalidSubset);
        }
        if let Some(&max) = self.members.last() {
            if max >= n {
                return Err(Error::IndexOutOfRange { index: max, n });
            }
        }
        Ok(())
    }
}

fn insert_sorted(v: &mut Vec<usize>, x: usize) {
    if let Err(pos) = v.binary_search(&x) {
        v.insert(pos, x);
    }
}

fn remove_sorted(v: &mut Vec<usize>, x: usize) {
    if let Ok(pos) = v.binary_search(&x) {
        v.remove(pos);
    }
}

/// Complete graph on `n` vertices with every weight at the cap.
pub fn complete_graph(n: usize, w_max: f64) -> Result<Graph> {
    let mut g = Graph::new(n, w_max)?;
    for i in 0..n {
        for j in (i + 1)..n {
            g.set_weight(i, j, w_max)?;
        }
    }
    Ok(g)
}

/// Path graph with unit weights.
pub fn path_graph(n: usize, w: f64) -> Result<Graph> {
    let mut g = Graph::new(n, 1.0_f64.max(w))?;
    for i in 0..n.saturating_sub(1) {
        g.set_weight(i, i + 1, w)?;
    }
    Ok(g)
}
