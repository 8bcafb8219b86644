//! Multipath channel generation: seeded Rayleigh path sampling, the physical
//! channel matrix `H`, the angular-domain matrix `G`, and its beamspace
//! truncation.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::array::{kernel_f, signature, ArrayConfig};
use crate::error::{Error, Result};
use crate::{CMatrix, Cplx};

/// One discrete propagation path: complex attenuation and the directional
/// cosines of its departure and incidence angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Path {
    /// Complex attenuation, serialized as `[re, im]`.
    #[serde(with = "crate::serialize::complex_pair")]
    pub gain: Cplx,
    /// Directional cosine of the departure angle, in [-1, 1].
    pub omega_t: f64,
    /// Directional cosine of the incidence angle, in [-1, 1].
    pub omega_r: f64,
}

/// A finite set of discrete propagation paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSet {
    pub paths: Vec<Path>,
}

impl PathSet {
    pub fn count(&self) -> usize {
        self.paths.len()
    }

    /// Total attenuation power `Σ_p |a(p)|²` (diagnostic for the bounded-power
    /// assumption).
    pub fn total_power(&self) -> f64 {
        self.paths.iter().map(|p| p.gain.norm_sqr()).sum()
    }
}

/// Channel matrix in the angular (beamspace) domain together with the index
/// sets on which its power concentrates.
///
/// The retained transmit indices are `[0 : L_t] ∪ [M - L_t : M)` and the
/// receive indices analogously; at critical spacing (`Δ = 1/2`) the union
/// covers the full range and truncation is the identity.
#[derive(Debug, Clone)]
pub struct AngularChannel {
    pub matrix: CMatrix,
    pub tx_index_set: Vec<usize>,
    pub rx_index_set: Vec<usize>,
    pub tx_cfg: ArrayConfig,
    pub rx_cfg: ArrayConfig,
}

impl AngularChannel {
    /// `2·min{L_t, L_r}`, the rate normalizer used throughout.
    pub fn normalizer(&self) -> f64 {
        2.0 * self.tx_cfg.length().min(self.rx_cfg.length())
    }
}

fn concentration_indices(count: usize, length: f64) -> Vec<usize> {
    let mut set = Vec::new();
    for n in 0..count {
        let nf = n as f64;
        if nf <= length + 1e-9 || nf >= count as f64 - length - 1e-9 {
            set.push(n);
        }
    }
    set
}

fn derive_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Sample `p` independent Rayleigh paths: CSCG attenuation with variance
/// `1/P`, departure and incidence angles uniform on `[0, 2π)` with the
/// directional cosine taken of each. Deterministic given the seed.
pub fn sample_rayleigh_paths(p: usize, rng_seed: u64) -> Result<PathSet> {
    sample_paths_inner(p, rng_seed, None)
}

/// Like [`sample_rayleigh_paths`] but with directional cosines clipped to
/// `[-(1 - eps), 1 - eps]`, for runs that respect the restricted-domain
/// assumption behind the asymptotic results.
pub fn sample_rayleigh_paths_clipped(p: usize, rng_seed: u64, eps: f64) -> Result<PathSet> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidArgument(format!(
            "clip epsilon must lie in [0, 1), got {eps}"
        )));
    }
    sample_paths_inner(p, rng_seed, Some(eps))
}

fn sample_paths_inner(p: usize, rng_seed: u64, clip: Option<f64>) -> Result<PathSet> {
    if p == 0 {
        return Err(Error::InvalidArgument("path count must be at least 1".into()));
    }
    let mut rng = derive_rng(rng_seed);
    let scale = (1.0 / (2.0 * p as f64)).sqrt();
    let mut paths = Vec::with_capacity(p);
    for _ in 0..p {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        let phi_t: f64 = rng.random::<f64>() * 2.0 * PI;
        let phi_r: f64 = rng.random::<f64>() * 2.0 * PI;
        let mut omega_t = phi_t.cos();
        let mut omega_r = phi_r.cos();
        if let Some(eps) = clip {
            omega_t = omega_t.clamp(-(1.0 - eps), 1.0 - eps);
            omega_r = omega_r.clamp(-(1.0 - eps), 1.0 - eps);
        }
        paths.push(Path {
            gain: Cplx::new(re * scale, im * scale),
            omega_t,
            omega_r,
        });
    }
    Ok(PathSet { paths })
}

/// Physical channel matrix `H = √(NM) Σ_p a(p) s_r(Ω_r(p)) s_t^H(Ω_t(p))`.
pub fn physical_channel(paths: &PathSet, tx: &ArrayConfig, rx: &ArrayConfig) -> CMatrix {
    let n = rx.elements();
    let m = tx.elements();
    let scale = ((n * m) as f64).sqrt();
    let mut h = CMatrix::zeros(n, m);
    for p in &paths.paths {
        let sr = signature(rx, p.omega_r);
        let st = signature(tx, p.omega_t);
        h += (sr * st.adjoint()) * (p.gain * scale);
    }
    h
}

/// Angular-domain channel matrix with entries
/// `g_{n,m} = √(4 L_t L_r) Σ_p a(p) f_r(Ω_r(p) - n/L_r) f_t(m/L_t - Ω_t(p))`,
/// the beamspace coefficients for which `√γ H = √γ̃ U_r G U_t^H` holds.
pub fn angular_channel(paths: &PathSet, tx: &ArrayConfig, rx: &ArrayConfig) -> AngularChannel {
    let n = rx.elements();
    let m = tx.elements();
    let scale = (4.0 * tx.length() * rx.length()).sqrt();
    let mut g = CMatrix::zeros(n, m);
    for p in &paths.paths {
        // Receive-side expansion coefficient of s_r(Ω_r) on grid beam n, and
        // the conjugated transmit-side coefficient from s_t^H(Ω_t).
        let kr: Vec<Cplx> = (0..n)
            .map(|i| kernel_f(rx, p.omega_r - i as f64 / rx.length()))
            .collect();
        let kt: Vec<Cplx> = (0..m)
            .map(|j| kernel_f(tx, j as f64 / tx.length() - p.omega_t))
            .collect();
        for j in 0..m {
            let w = p.gain * kt[j] * scale;
            for i in 0..n {
                g[(i, j)] += kr[i] * w;
            }
        }
    }
    AngularChannel {
        matrix: g,
        tx_index_set: concentration_indices(m, tx.length()),
        rx_index_set: concentration_indices(n, rx.length()),
        tx_cfg: *tx,
        rx_cfg: *rx,
    }
}

/// Frobenius residual `‖H - U_r G U_t^H / √(4 Δ_t Δ_r)‖_F` of the
/// angular-domain factorization, with both sides computed independently.
pub fn factorization_check(paths: &PathSet, tx: &ArrayConfig, rx: &ArrayConfig) -> f64 {
    let h = physical_channel(paths, tx, rx);
    let g = angular_channel(paths, tx, rx);
    let ur = crate::array::dft_matrix(rx);
    let ut = crate::array::dft_matrix(tx);
    let scale = 1.0 / (4.0 * tx.separation() * rx.separation()).sqrt();
    let rebuilt = (ur * &g.matrix * ut.adjoint()) * Cplx::new(scale, 0.0);
    (h - rebuilt).norm()
}

/// Effective channel: copy of `ch` with entries outside the concentration
/// index sets zeroed.
pub fn truncate_effective(ch: &AngularChannel) -> AngularChannel {
    let mut out = ch.clone();
    let keep_row: Vec<bool> = {
        let mut v = vec![false; ch.matrix.nrows()];
        for &i in &ch.rx_index_set {
            v[i] = true;
        }
        v
    };
    let keep_col: Vec<bool> = {
        let mut v = vec![false; ch.matrix.ncols()];
        for &j in &ch.tx_index_set {
            v[j] = true;
        }
        v
    };
    for j in 0..out.matrix.ncols() {
        for i in 0..out.matrix.nrows() {
            if !(keep_row[i] && keep_col[j]) {
                out.matrix[(i, j)] = Cplx::new(0.0, 0.0);
            }
        }
    }
    out
}

/// Largest singular value of `min{2L_t, 2L_r}^{-1/2} G` (boundedness
/// diagnostic for the large-system assumption).
pub fn max_singular_value_diag(ch: &AngularChannel) -> f64 {
    let scale = (2.0 * ch.tx_cfg.length()).min(2.0 * ch.rx_cfg.length()).sqrt();
    let svd = ch.matrix.clone().svd(false, false);
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    smax / scale
}
