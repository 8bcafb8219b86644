//! Gauss–Hermite quadrature rules (physicists' weight `e^{-t²}`), built by
//! the Golub–Welsch method from the symmetric Jacobi matrix.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Minimum admissible rule order per axis.
pub const MIN_ORDER: usize = 16;
/// Default rule order used by the mutual-information routines.
pub const DEFAULT_ORDER: usize = 64;

/// A fixed Gauss–Hermite rule: `∫ e^{-t²} g(t) dt ≈ Σ_i w_i g(t_i)`.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    pub fn new(order: usize) -> Result<Self> {
        if order < MIN_ORDER {
            return Err(Error::InvalidArgument(format!(
                "quadrature order {order} below the minimum of {MIN_ORDER}"
            )));
        }
        let mut jacobi = DMatrix::<f64>::zeros(order, order);
        for i in 1..order {
            let b = (i as f64 / 2.0).sqrt();
            jacobi[(i, i - 1)] = b;
            jacobi[(i - 1, i)] = b;
        }
        let eig = SymmetricEigen::new(jacobi);
        let sqrt_pi = std::f64::consts::PI.sqrt();
        let mut pairs: Vec<(f64, f64)> = (0..order)
            .map(|k| {
                let node = eig.eigenvalues[k];
                let v0 = eig.eigenvectors[(0, k)];
                (node, sqrt_pi * v0 * v0)
            })
            .collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        Ok(Self {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Expectation of `g` under a standard normal, `E_{z~N(0,1)}[g(z)]`.
    pub fn expect_std_normal(&self, mut g: impl FnMut(f64) -> f64) -> f64 {
        let inv_sqrt_pi = 1.0 / std::f64::consts::PI.sqrt();
        let mut acc = 0.0;
        for (&t, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * g(std::f64::consts::SQRT_2 * t);
        }
        acc * inv_sqrt_pi
    }
}

/// Shared default-order rule.
pub fn default_rule() -> &'static GaussHermite {
    use std::sync::OnceLock;
    static RULE: OnceLock<GaussHermite> = OnceLock::new();
    RULE.get_or_init(|| GaussHermite::new(DEFAULT_ORDER).expect("default order is valid"))
}
