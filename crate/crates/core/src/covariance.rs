//! Transmit covariance construction in the angular basis, the zero-insertion
//! extension operator, and Hermitian PSD matrix square roots for precoding.

use nalgebra::SymmetricEigen;

use crate::array::{dft_matrix, ArrayConfig};
use crate::error::{Error, Result};
use crate::{CMatrix, Cplx};

/// Tolerance below which negative eigenvalues are treated as rounding noise
/// and clamped to zero.
const PSD_CLAMP: f64 = 1e-9;

/// An angular-basis transmit covariance `Σ_M`: Hermitian PSD with
/// `Tr(Σ) ≤ 1`.
#[derive(Debug, Clone)]
pub struct CovarianceSpec {
    sigma: CMatrix,
}

impl CovarianceSpec {
    /// Validate and wrap a covariance matrix. Rejects non-Hermitian,
    /// non-PSD (below the clamping tolerance), or over-budget matrices.
    pub fn new(sigma: CMatrix) -> Result<Self> {
        if sigma.nrows() != sigma.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "covariance must be square, got {}x{}",
                sigma.nrows(),
                sigma.ncols()
            )));
        }
        let herm_err = (&sigma - sigma.adjoint()).norm();
        if herm_err > 1e-12 * sigma.norm().max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "covariance is not Hermitian (asymmetry {herm_err:.3e})"
            )));
        }
        let eig = SymmetricEigen::new(sigma.clone());
        let min_eig = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig < -PSD_CLAMP {
            return Err(Error::NotPsd(min_eig));
        }
        let trace: f64 = sigma.diagonal().iter().map(|e| e.re).sum();
        if trace > 1.0 + 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "covariance trace {trace} exceeds the unit power budget"
            )));
        }
        Ok(Self { sigma })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.sigma
    }

    pub fn dim(&self) -> usize {
        self.sigma.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.sigma.diagonal().iter().map(|e| e.re).sum()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.sigma.clone())
            .eigenvalues
            .iter()
            .cloned()
            .fold(0.0f64, f64::max)
    }
}

/// Extension operator `E_{n,k}`: insert `zeros` all-zero columns and rows
/// after the first `insert_after` columns and rows. Trace preserving.
pub fn extend(sigma: &CMatrix, insert_after: usize, zeros: usize) -> Result<CMatrix> {
    let n = sigma.nrows();
    if sigma.ncols() != n {
        return Err(Error::DimensionMismatch("extend requires a square matrix".into()));
    }
    if insert_after > n {
        return Err(Error::DimensionMismatch(format!(
            "insertion point {insert_after} exceeds dimension {n}"
        )));
    }
    let total = n + zeros;
    let mut out = CMatrix::zeros(total, total);
    let map = |i: usize| if i < insert_after { i } else { i + zeros };
    for i in 0..n {
        for j in 0..n {
            out[(map(i), map(j))] = sigma[(i, j)];
        }
    }
    Ok(out)
}

/// The densely spaced covariance pattern: an `M×M` diagonal with the first
/// `L_t + 1` and last `L_t` entries equal to `1/(2L_t + 1)` and zeros in the
/// middle. Trace is exactly 1.
pub fn dense_sigma(l_t: usize, m: usize) -> Result<CovarianceSpec> {
    if l_t == 0 {
        return Err(Error::InvalidArgument("L_t must be at least 1".into()));
    }
    if m < 2 * l_t + 1 {
        return Err(Error::DimensionMismatch(format!(
            "dimension {m} too small for 2 L_t + 1 = {}",
            2 * l_t + 1
        )));
    }
    let v = 1.0 / (2 * l_t + 1) as f64;
    let mut sigma = CMatrix::zeros(m, m);
    for i in 0..=l_t {
        sigma[(i, i)] = Cplx::new(v, 0.0);
    }
    for i in (m - l_t)..m {
        sigma[(i, i)] = Cplx::new(v, 0.0);
    }
    CovarianceSpec::new(sigma)
}

/// The critically spaced covariance: `(2L_t)^{-1} I` of dimension `2L_t`.
pub fn critical_sigma(l_t: usize) -> Result<CovarianceSpec> {
    if l_t == 0 {
        return Err(Error::InvalidArgument("L_t must be at least 1".into()));
    }
    let dim = 2 * l_t;
    let sigma = CMatrix::identity(dim, dim) * Cplx::new(1.0 / dim as f64, 0.0);
    CovarianceSpec::new(sigma)
}

/// Antenna-domain covariance `Q = U Σ U^H` for the transmit array's DFT
/// basis `U`.
pub fn q_from_sigma(spec: &CovarianceSpec, tx: &ArrayConfig) -> Result<CMatrix> {
    if spec.dim() != tx.elements() {
        return Err(Error::DimensionMismatch(format!(
            "covariance dimension {} does not match {} transmit elements",
            spec.dim(),
            tx.elements()
        )));
    }
    let u = dft_matrix(tx);
    Ok(&u * spec.matrix() * u.adjoint())
}

/// The unique Hermitian PSD square root of a Hermitian PSD matrix, via
/// eigendecomposition with negative eigenvalues clamped at zero.
pub fn hermitian_sqrt(q: &CMatrix) -> Result<CMatrix> {
    if q.nrows() != q.ncols() {
        return Err(Error::DimensionMismatch("square root requires a square matrix".into()));
    }
    let eig = SymmetricEigen::new(q.clone());
    let mut min_eig = f64::INFINITY;
    let scale = eig.eigenvalues.iter().cloned().fold(0.0f64, |a, b| a.max(b.abs())).max(1.0);
    for &l in eig.eigenvalues.iter() {
        min_eig = min_eig.min(l);
    }
    if min_eig < -PSD_CLAMP * scale {
        return Err(Error::NotPsd(min_eig));
    }
    let dim = q.nrows();
    let mut root = CMatrix::zeros(dim, dim);
    for k in 0..dim {
        let l = eig.eigenvalues[k].max(0.0).sqrt();
        let v = eig.eigenvectors.column(k);
        // root += l * v v^H
        for j in 0..dim {
            let w = v[j].conj() * l;
            for i in 0..dim {
                root[(i, j)] += v[i] * w;
            }
        }
    }
    Ok(root)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_psd(dim: usize, seed: u64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = CMatrix::from_fn(dim, dim, |_, _| {
            Cplx::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        &a * a.adjoint()
    }

    #[test]
    fn extend_matches_definition() {
        let s = CMatrix::from_row_slice(
            2,
            2,
            &[
                Cplx::new(1.0, 0.0),
                Cplx::new(2.0, 0.5),
                Cplx::new(2.0, -0.5),
                Cplx::new(4.0, 0.0),
            ],
        );
        let e = extend(&s, 1, 1).unwrap();
        assert_eq!(e.nrows(), 3);
        assert_eq!(e[(0, 0)], s[(0, 0)]);
        assert_eq!(e[(0, 2)], s[(0, 1)]);
        assert_eq!(e[(2, 0)], s[(1, 0)]);
        assert_eq!(e[(2, 2)], s[(1, 1)]);
        for k in 0..3 {
            assert_eq!(e[(1, k)], Cplx::new(0.0, 0.0));
            assert_eq!(e[(k, 1)], Cplx::new(0.0, 0.0));
        }
    }

    #[test]
    fn extend_with_no_zeros_is_identity() {
        let s = random_psd(3, 1);
        assert_eq!(extend(&s, 2, 0).unwrap(), s);
        assert!(extend(&s, 4, 1).is_err());
    }

    #[test]
    fn extend_preserves_trace() {
        let s = random_psd(5, 2);
        let e = extend(&s, 2, 3).unwrap();
        let tr_s: f64 = s.diagonal().iter().map(|x| x.re).sum();
        let tr_e: f64 = e.diagonal().iter().map(|x| x.re).sum();
        assert_abs_diff_eq!(tr_s, tr_e, epsilon = 1e-14);
    }

    #[test]
    fn dense_sigma_pattern() {
        let s = dense_sigma(3, 12).unwrap();
        let v = 1.0 / 7.0;
        let diag: Vec<f64> = s.matrix().diagonal().iter().map(|e| e.re).collect();
        let expect = [v, v, v, v, 0.0, 0.0, 0.0, 0.0, 0.0, v, v, v];
        for (a, b) in diag.iter().zip(expect.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(s.trace(), 1.0, epsilon = 1e-15);
        assert!(dense_sigma(3, 6).is_err());
    }

    #[test]
    fn dense_sigma_boundary_is_scaled_identity() {
        let s = dense_sigma(1, 3).unwrap();
        for i in 0..3 {
            assert_abs_diff_eq!(s.matrix()[(i, i)].re, 1.0 / 3.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn critical_sigma_is_uniform() {
        let s = critical_sigma(3).unwrap();
        assert_eq!(s.dim(), 6);
        for i in 0..6 {
            assert_abs_diff_eq!(s.matrix()[(i, i)].re, 1.0 / 6.0, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(s.trace(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn eigenvalue_bound_diagnostic_is_constant() {
        // max eig of 2 L_t Σ: 2L_t/(2L_t+1) for dense, exactly 1 for critical.
        for lt in [1usize, 3, 8] {
            let dense = dense_sigma(lt, 4 * lt).unwrap();
            let crit = critical_sigma(lt).unwrap();
            let scale = 2.0 * lt as f64;
            assert_abs_diff_eq!(
                scale * dense.max_eigenvalue(),
                scale / (scale + 1.0),
                epsilon = 1e-12
            );
            assert_abs_diff_eq!(scale * crit.max_eigenvalue(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn q_from_scaled_identity_is_unchanged() {
        let tx = ArrayConfig::new(3.0, 0.25).unwrap();
        let m = tx.elements();
        let spec =
            CovarianceSpec::new(CMatrix::identity(m, m) * Cplx::new(1.0 / m as f64, 0.0)).unwrap();
        let q = q_from_sigma(&spec, &tx).unwrap();
        let expect = CMatrix::identity(m, m) * Cplx::new(1.0 / m as f64, 0.0);
        assert!((q - expect).norm() <= 1e-12);
    }

    #[test]
    fn q_preserves_trace_and_eigenvalues() {
        let tx = ArrayConfig::new(2.0, 0.25).unwrap();
        let mut base = random_psd(8, 7);
        let tr: f64 = base.diagonal().iter().map(|e| e.re).sum();
        base /= Cplx::new(tr * 2.0, 0.0); // trace 1/2, inside the budget
        let spec = CovarianceSpec::new(base.clone()).unwrap();
        let q = q_from_sigma(&spec, &tx).unwrap();
        let q_tr: f64 = q.diagonal().iter().map(|e| e.re).sum();
        assert_abs_diff_eq!(q_tr, spec.trace(), epsilon = 1e-12);

        let mut eq: Vec<f64> = SymmetricEigen::new(q.clone()).eigenvalues.iter().cloned().collect();
        let mut es: Vec<f64> = SymmetricEigen::new(base).eigenvalues.iter().cloned().collect();
        eq.sort_by(|a, b| a.partial_cmp(b).unwrap());
        es.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in eq.iter().zip(es.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
        // Projecting back recovers Σ.
        let u = dft_matrix(&tx);
        let back = u.adjoint() * &q * u;
        assert!((back - spec.matrix()).norm() <= 1e-12 * spec.matrix().norm().max(1.0));
    }

    #[test]
    fn q_rejects_dimension_mismatch() {
        let tx = ArrayConfig::new(2.0, 0.5).unwrap();
        let spec = dense_sigma(1, 3).unwrap();
        assert!(q_from_sigma(&spec, &tx).is_err());
    }

    #[test]
    fn sqrt_of_identity_and_diagonal() {
        let r = hermitian_sqrt(&CMatrix::identity(4, 4)).unwrap();
        assert!((r - CMatrix::identity(4, 4)).norm() <= 1e-12);

        let q = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Cplx::new(4.0, 0.0),
            Cplx::new(0.0, 0.0),
            Cplx::new(1.0, 0.0),
        ]));
        let r = hermitian_sqrt(&q).unwrap();
        assert_abs_diff_eq!(r[(0, 0)].re, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r[(1, 1)].re, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r[(2, 2)].re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn sqrt_reconstructs_random_psd() {
        let q = random_psd(8, 21);
        let r = hermitian_sqrt(&q).unwrap();
        assert!((&r - r.adjoint()).norm() <= 1e-10 * r.norm());
        assert!(((&r * &r) - &q).norm() <= 1e-10 * q.norm());
    }

    #[test]
    fn sqrt_rejects_indefinite() {
        let mut q = CMatrix::identity(3, 3);
        q[(2, 2)] = Cplx::new(-0.5, 0.0);
        assert!(matches!(hermitian_sqrt(&q), Err(Error::NotPsd(_))));
    }

    #[test]
    fn covariance_spec_validation() {
        // Over-budget trace.
        assert!(CovarianceSpec::new(CMatrix::identity(3, 3)).is_err());
        // Non-Hermitian.
        let mut m = CMatrix::identity(2, 2) * Cplx::new(0.25, 0.0);
        m[(0, 1)] = Cplx::new(0.1, 0.0);
        assert!(CovarianceSpec::new(m).is_err());
    }

    #[test]
    fn covariance_discrepancy_trace_shrinks() {
        // Tr{(E_{L_t,1}(Σ_crit) - Σ_dense)²} is O(1/L_t) for this covariance
        // pair; checked as a trend.
        let mut prev = f64::INFINITY;
        for lt in [1usize, 2, 4, 8, 16] {
            let crit = critical_sigma(lt).unwrap();
            let dense_small = dense_sigma(lt, 2 * lt + 1).unwrap();
            let ext = extend(crit.matrix(), lt, 1).unwrap();
            let diff = &ext - dense_small.matrix();
            let sq = &diff * &diff;
            let tr: f64 = sq.diagonal().iter().map(|e| e.re).sum();
            assert!(tr <= prev);
            prev = tr;
        }
        assert!(prev < 1e-2);
    }
}
