//! Second-smallest eigenvalue of the normalized Laplacian `I - D^-1/2 A D^-1/2`.
//!
//! Small graphs go through a dense symmetric eigensolver. Larger ones use
//! Lanczos with full reorthogonalisation on `2I - L`, deflated against the
//! known bottom eigenvector `D^1/2 1`; the top Ritz value of the deflated
//! operator is `2 - lambda_2`.

use nalgebra::{DMatrix, SymmetricEigen};

/// Graphs up to this size are solved densely.
pub const DENSE_LIMIT: usize = 64;
/// Lanczos stops once the residual of the top Ritz pair drops below this.
pub const RESIDUAL_TOL: f64 = 1e-8;

/// A weighted undirected graph as adjacency lists of `(neighbor, weight)`.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    pub adj: Vec<Vec<(usize, f64)>>,
}

impl WeightedGraph {
    pub fn new(n: usize) -> Self {
        WeightedGraph { adj: vec![Vec::new(); n] }
    }

    pub fn add_edge(&mut self, u: usize, v: usize, w: f64) {
        self.adj[u].push((v, w));
        self.adj[v].push((u, w));
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    fn degrees(&self) -> Vec<f64> {
        self.adj.iter().map(|a| a.iter().map(|&(_, w)| w).sum()).collect()
    }
}

/// `lambda_2` of the normalized Laplacian, clamped into `[0, 2]`.
///
/// Graphs with fewer than two vertices, or with a vertex of zero weighted
/// degree, have no spectral expansion and report 0.
pub fn fiedler_value(graph: &WeightedGraph) -> f64 {
    let n = graph.len();
    if n < 2 {
        return 0.0;
    }
    let deg = graph.degrees();
    if deg.iter().any(|&d| d <= 0.0) {
        return 0.0;
    }
    let value = if n <= DENSE_LIMIT {
        dense_fiedler(graph, &deg)
    } else {
        lanczos_fiedler(graph, &deg)
    };
    value.clamp(0.0, 2.0)
}

pub fn normalized_laplacian(graph: &WeightedGraph) -> DMatrix<f64> {
    let n = graph.len();
    let deg = graph.degrees();
    let mut lap = DMatrix::identity(n, n);
    for (u, nbrs) in graph.adj.iter().enumerate() {
        for &(v, w) in nbrs {
            if deg[u] > 0.0 && deg[v] > 0.0 {
                lap[(u, v)] -= w / (deg[u] * deg[v]).sqrt();
            }
        }
    }
    lap
}

fn dense_fiedler(graph: &WeightedGraph, _deg: &[f64]) -> f64 {
    let eig = SymmetricEigen::new(normalized_laplacian(graph));
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values[1]
}

/// `y = (2I - L) x = x + D^-1/2 A D^-1/2 x`.
fn apply_shifted(graph: &WeightedGraph, inv_sqrt_deg: &[f64], x: &[f64], y: &mut [f64]) {
    for (u, nbrs) in graph.adj.iter().enumerate() {
        let mut acc = 0.0;
        for &(v, w) in nbrs {
            acc += w * inv_sqrt_deg[v] * x[v];
        }
        y[u] = x[u] + inv_sqrt_deg[u] * acc;
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    // Two passes of classical Gram-Schmidt.
    for _ in 0..2 {
        for q in basis {
            let c = dot(w, q);
            w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= c * qi);
        }
    }
}

fn top_ritz(alphas: &[f64], betas: &[f64]) -> (f64, f64) {
    let j = alphas.len();
    let t = DMatrix::from_fn(j, j, |a, b| {
        if a == b {
            alphas[a]
        } else if a + 1 == b {
            betas[a]
        } else if b + 1 == a {
            betas[b]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let (idx, &theta) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty tridiagonal");
    let last = eig.eigenvectors[(j - 1, idx)];
    (theta, last)
}

fn lanczos_fiedler(graph: &WeightedGraph, deg: &[f64]) -> f64 {
    let n = graph.len();
    let inv_sqrt_deg: Vec<f64> = deg.iter().map(|d| 1.0 / d.sqrt()).collect();
    let total: f64 = deg.iter().sum();
    let bottom: Vec<f64> = deg.iter().map(|d| (d / total).sqrt()).collect();

    // Deterministic start with no special alignment to graph structure.
    let mut q: Vec<f64> = (0..n)
        .map(|i| 1.0 + ((i as f64 + 1.0) * 0.618_033_988_749_895).fract())
        .collect();
    let mut basis: Vec<Vec<f64>> = vec![bottom];
    orthogonalize(&mut q, &basis);
    let norm = dot(&q, &q).sqrt();
    q.iter_mut().for_each(|x| *x /= norm);

    let max_steps = (n - 1).min(400);
    let mut alphas = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let mut theta = 0.0;
    for step in 0..max_steps {
        apply_shifted(graph, &inv_sqrt_deg, &q, &mut w);
        let alpha = dot(&w, &q);
        alphas.push(alpha);
        basis.push(q.clone());
        orthogonalize(&mut w, &basis);
        let beta = dot(&w, &w).sqrt();
        let (t, last) = top_ritz(&alphas, &betas);
        theta = t;
        if (beta * last).abs() < RESIDUAL_TOL || beta < 1e-12 || step + 1 == max_steps {
            break;
        }
        betas.push(beta);
        q.iter_mut().zip(&w).for_each(|(qi, wi)| *qi = wi / beta);
    }
    2.0 - theta
}
