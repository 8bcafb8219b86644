//! Uniform-linear-array geometry: steering (signature) vectors, the unitary
//! DFT angular basis, and the beamforming kernel.
//!
//! All directional arguments are directional cosines `Ω = cos φ ∈ [-1, 1]`.
//! An array is described by its normalized length `L` (in carrier
//! wavelengths) and antenna separation `Δ ∈ (0, 1/2]`, giving `L/Δ` elements.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::{CMatrix, CVector, Cplx};

/// Geometry of one uniform linear array.
///
/// Invariants enforced at construction: `separation ∈ (0, 1/2]`,
/// `length_norm > 0`, and `length_norm / separation` is an integer (the
/// element count). Non-integer ratios are rejected rather than rounded, since
/// rounding would silently corrupt the DFT basis dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayConfig {
    length_norm: f64,
    separation: f64,
    elements: usize,
}

impl ArrayConfig {
    pub fn new(length_norm: f64, separation: f64) -> Result<Self> {
        if !(length_norm > 0.0 && length_norm.is_finite()) {
            return Err(Error::InvalidArray(format!(
                "array length must be positive, got {length_norm}"
            )));
        }
        if !(separation > 0.0 && separation <= 0.5) {
            return Err(Error::InvalidArray(format!(
                "antenna separation must lie in (0, 1/2], got {separation}"
            )));
        }
        let ratio = length_norm / separation;
        let elements = ratio.round();
        if (ratio - elements).abs() > 1e-9 * ratio.max(1.0) || elements < 1.0 {
            return Err(Error::InvalidArray(format!(
                "element count L/\u{0394} = {ratio} is not a positive integer"
            )));
        }
        Ok(Self {
            length_norm,
            separation,
            elements: elements as usize,
        })
    }

    /// Normalized array length `L` in carrier wavelengths.
    pub fn length(&self) -> f64 {
        self.length_norm
    }

    /// Normalized antenna separation `Δ`.
    pub fn separation(&self) -> f64 {
        self.separation
    }

    /// Number of antenna elements `L/Δ`.
    pub fn elements(&self) -> usize {
        self.elements
    }
}

/// Normalized spatial signature (steering) vector for directional cosine
/// `omega`: entry `n` is `(L/Δ)^{-1/2} exp(-2πj n Δ Ω)`. Unit Euclidean norm
/// by construction.
pub fn signature(cfg: &ArrayConfig, omega: f64) -> CVector {
    let k = cfg.elements();
    let scale = 1.0 / (k as f64).sqrt();
    CVector::from_fn(k, |n, _| {
        let phase = -2.0 * PI * n as f64 * cfg.separation() * omega;
        Cplx::new(phase.cos() * scale, phase.sin() * scale)
    })
}

/// The `L/Δ × L/Δ` unitary DFT matrix whose column `k` is the signature
/// vector at grid direction `k/L`.
pub fn dft_matrix(cfg: &ArrayConfig) -> CMatrix {
    let k = cfg.elements();
    let mut u = CMatrix::zeros(k, k);
    for col in 0..k {
        let s = signature(cfg, col as f64 / cfg.length());
        u.set_column(col, &s);
    }
    u
}

/// Beamforming kernel `f_{L,Δ}(Ω) = s^H(0) s(Ω) = (Δ/L) Σ_n e^{-2πj n Δ Ω}`.
///
/// Evaluated by direct summation rather than the closed Dirichlet form, which
/// is 0/0 on the `1/Δ`-periodic lattice. The closed form serves as a test
/// oracle only.
pub fn kernel_f(cfg: &ArrayConfig, omega: f64) -> Cplx {
    let k = cfg.elements();
    let mut acc = Cplx::new(0.0, 0.0);
    for n in 0..k {
        let phase = -2.0 * PI * n as f64 * cfg.separation() * omega;
        acc += Cplx::new(phase.cos(), phase.sin());
    }
    acc / k as f64
}

/// Coefficients of `s(Ω)` in the orthonormal grid basis `{s(k/L)}`:
/// entry `k` is the inner product `s(k/L)^H s(Ω) = f_{L,Δ}(Ω - k/L)`, so the
/// reconstruction `Σ_k c_k s(k/L) = s(Ω)` holds exactly.
pub fn expansion_coeffs(cfg: &ArrayConfig, omega: f64) -> CVector {
    let k = cfg.elements();
    CVector::from_fn(k, |i, _| kernel_f(cfg, omega - i as f64 / cfg.length()))
}

/// Beamforming pattern samples `(φ, |f_{L,Δ}(k/L - cos φ)|)` for grid beam
/// index `k`.
pub fn beam_pattern(cfg: &ArrayConfig, k: usize, phi_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if k >= cfg.elements() {
        return Err(Error::InvalidArgument(format!(
            "beam index {k} out of range for {} elements",
            cfg.elements()
        )));
    }
    let grid_dir = k as f64 / cfg.length();
    Ok(phi_grid
        .iter()
        .map(|&phi| (phi, kernel_f(cfg, grid_dir - phi.cos()).norm()))
        .collect())
}
