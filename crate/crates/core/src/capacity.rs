//! Constrained Gaussian capacity (log-det) and SNR normalization.

use nalgebra::Cholesky;

use crate::array::{dft_matrix, ArrayConfig};
use crate::covariance::hermitian_sqrt;
use crate::error::{Error, Result};
use crate::{CMatrix, Cplx};

/// A rate in nats together with the spatial-degrees-of-freedom normalizer
/// `2·min{L_t, L_r}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateValue {
    pub nats: f64,
    pub normalizer: f64,
}

impl RateValue {
    pub fn new(nats: f64, normalizer: f64) -> Self {
        Self { nats, normalizer }
    }

    pub fn bits(&self) -> f64 {
        self.nats / std::f64::consts::LN_2
    }

    pub fn normalized(&self) -> f64 {
        self.nats / self.normalizer
    }
}

/// Normalized SNR `γ̃ = γ / (4 Δ_t Δ_r)`.
pub fn snr_normalize(gamma: f64, dt: f64, dr: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument(format!("SNR must be positive, got {gamma}")));
    }
    if !(dt > 0.0 && dt <= 0.5 && dr > 0.0 && dr <= 0.5) {
        return Err(Error::InvalidArgument(format!(
            "separations must lie in (0, 1/2], got dt={dt}, dr={dr}"
        )));
    }
    Ok(gamma / (4.0 * dt * dr))
}

/// Log-det of `I + γ̃ B^H B` (equivalently `I + γ̃ B B^H`) through a Cholesky
/// factorization of whichever Gram matrix is smaller.
pub fn log_det_capacity(b: &CMatrix, snr_norm: f64) -> Result<f64> {
    if snr_norm == 0.0 {
        return Ok(0.0);
    }
    let gram = if b.nrows() <= b.ncols() {
        b * b.adjoint()
    } else {
        b.adjoint() * b
    };
    let dim = gram.nrows();
    let shifted = CMatrix::identity(dim, dim) + gram * Cplx::new(snr_norm, 0.0);
    let chol = Cholesky::new(shifted).ok_or_else(|| {
        Error::Numerical("Cholesky factorization of I + SNR·Gram failed".into())
    })?;
    let mut acc = 0.0;
    for i in 0..dim {
        acc += chol.l_dirty()[(i, i)].re.ln();
    }
    Ok(2.0 * acc)
}

/// Constrained capacity `log det(I + γ̃ G U^H Q U G^H)` in nats, for the
/// angular channel `G`, antenna-domain input covariance `Q`, and the transmit
/// array's DFT basis `U`. Computed through the stable route
/// `B = G (U^H Q U)^{1/2}`.
pub fn gaussian_capacity(
    g: &CMatrix,
    tx: &ArrayConfig,
    rx: &ArrayConfig,
    q: &CMatrix,
    snr_norm: f64,
) -> Result<RateValue> {
    let normalizer = 2.0 * tx.length().min(rx.length());
    if snr_norm < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "normalized SNR must be nonnegative, got {snr_norm}"
        )));
    }
    if g.ncols() != tx.elements() || q.nrows() != tx.elements() || q.ncols() != tx.elements() {
        return Err(Error::DimensionMismatch(format!(
            "G is {}x{}, Q is {}x{}, transmit array has {} elements",
            g.nrows(),
            g.ncols(),
            q.nrows(),
            q.ncols(),
            tx.elements()
        )));
    }
    let trace: f64 = q.diagonal().iter().map(|e| e.re).sum();
    if trace > 1.0 + 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "input covariance trace {trace} exceeds the unit power budget"
        )));
    }
    if snr_norm == 0.0 {
        return Ok(RateValue::new(0.0, normalizer));
    }
    let u = dft_matrix(tx);
    let sigma_prime = u.adjoint() * q * u;
    let root = hermitian_sqrt(&sigma_prime)?;
    let b = g * root;
    let nats = log_det_capacity(&b, snr_norm)?;
    Ok(RateValue::new(nats, normalizer))
}
