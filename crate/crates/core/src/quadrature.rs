//! Tensor-product Gauss–Legendre quadrature over a rectangle.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::{Error, Result};

/// Nodes and weights of the n-point Gauss–Legendre rule on `[-1, 1]`.
///
/// Newton iteration on the Legendre recurrence, initialised with the
/// Chebyshev-like root estimate. Exact enough (1e-15 on nodes) for the
/// rule orders used here.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // p0, p1 carry the three-term recurrence up to degree n
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Order of the tensor rule used for the expectation integrals, with a
/// refinement step that bounds the discretization error.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec {
    /// Nodes per axis for the production evaluation.
    pub nodes: usize,
    /// Nodes per axis for the error check; 0 disables the check.
    pub check_nodes: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            nodes: 128,
            check_nodes: 256,
        }
    }
}

impl QuadratureSpec {
    pub fn new(nodes: usize, check_nodes: usize) -> Result<Self> {
        if nodes == 0 {
            return Err(Error::InvalidParameter(
                "quadrature rule needs at least one node".into(),
            ));
        }
        Ok(Self { nodes, check_nodes })
    }
}

/// Integrates `f(x, y)` over `[x0, x1] x [y0, y1]` with an `n x n` tensor rule.
pub fn integrate_2d<F>(f: &F, bounds: [f64; 4], n: usize) -> f64
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let [x0, x1, y0, y1] = bounds;
    let (nodes, weights) = gauss_legendre(n);
    let sx = 0.5 * (x1 - x0);
    let cx = 0.5 * (x1 + x0);
    let sy = 0.5 * (y1 - y0);
    let cy = 0.5 * (y1 + y0);

    let row = |i: usize| -> f64 {
        let x = cx + sx * nodes[i];
        let mut acc = 0.0;
        for j in 0..n {
            let y = cy + sy * nodes[j];
            acc += weights[j] * f(x, y);
        }
        weights[i] * acc
    };

    #[cfg(feature = "parallel")]
    let total: f64 = (0..n).into_par_iter().map(row).collect::<Vec<_>>().iter().sum();
    #[cfg(not(feature = "parallel"))]
    let total: f64 = (0..n).map(row).sum();

    total * sx * sy
}
