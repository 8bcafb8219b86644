//! Mutual information of scalar complex-AWGN channels `y = √ρ x + v`,
//! `v ~ CN(0,1)`, under Gaussian, QPSK, and 16-QAM inputs, and the per-stream
//! SIC rate sum built on top of them.

use crate::capacity::RateValue;
use crate::error::{Error, Result};
use crate::quad::{default_rule, GaussHermite};
use crate::sic::SinrProfile;
use crate::Cplx;

/// A finite complex constellation with uniform probabilities, unit average
/// energy, and zero mean.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    points: Vec<Cplx>,
}

impl Constellation {
    pub fn new(points: Vec<Cplx>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidArgument(
                "a constellation needs at least two symbols".into(),
            ));
        }
        let k = points.len() as f64;
        let energy: f64 = points.iter().map(|p| p.norm_sqr()).sum::<f64>() / k;
        if (energy - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "constellation average energy {energy} is not 1"
            )));
        }
        let mean: Cplx = points.iter().sum::<Cplx>() / k;
        if mean.norm() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "constellation mean {mean} is not 0"
            )));
        }
        Ok(Self { points })
    }

    /// QPSK: `(±1 ± j)/√2`.
    pub fn qpsk() -> Self {
        let r = 1.0 / 2.0f64.sqrt();
        Self {
            points: [(r, r), (r, -r), (-r, r), (-r, -r)]
                .iter()
                .map(|&(a, b)| Cplx::new(a, b))
                .collect(),
        }
    }

    /// Square 16-QAM with per-dimension levels `{±1, ±3}/√10`.
    pub fn qam16() -> Self {
        let s = 1.0 / 10.0f64.sqrt();
        let levels = [-3.0, -1.0, 1.0, 3.0];
        let mut points = Vec::with_capacity(16);
        for &a in &levels {
            for &b in &levels {
                points.push(Cplx::new(a * s, b * s));
            }
        }
        Self { points }
    }

    pub fn points(&self) -> &[Cplx] {
        &self.points
    }

    pub fn size(&self) -> usize {
        self.points.len()
    }
}

/// Gaussian-input mutual information `ln(1 + ρ)`.
pub fn mi_gaussian(rho: f64) -> f64 {
    rho.ln_1p()
}

fn log_sum_exp(exponents: &[f64]) -> f64 {
    let m = exponents.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = exponents.iter().map(|&e| (e - m).exp()).sum();
    m + s.ln()
}

/// Constellation mutual information over the complex AWGN channel, by 2-D
/// Gauss–Hermite quadrature over the noise with the supplied per-axis rule.
pub fn mi_constellation_with(c: &Constellation, rho: f64, rule: &GaussHermite) -> Result<f64> {
    if !(rho >= 0.0) {
        return Err(Error::InvalidArgument(format!("SINR must be nonnegative, got {rho}")));
    }
    if rho == 0.0 {
        return Ok(0.0);
    }
    let k = c.points.len();
    let sr = rho.sqrt();
    let inv_pi = 1.0 / std::f64::consts::PI;
    let mut exponents = vec![0.0f64; k];
    let mut acc = 0.0;
    // Per real dimension the noise is N(0, 1/2), for which the Gauss-Hermite
    // substitution is the node itself (√2 σ = 1).
    for i in 0..k {
        let diffs: Vec<Cplx> = c.points.iter().map(|&x| (c.points[i] - x) * sr).collect();
        for (&ta, &wa) in rule.nodes.iter().zip(&rule.weights) {
            for (&tb, &wb) in rule.nodes.iter().zip(&rule.weights) {
                for (e, d) in exponents.iter_mut().zip(&diffs) {
                    *e = -d.norm_sqr() - 2.0 * (d.re * ta + d.im * tb);
                }
                acc += wa * wb * log_sum_exp(&exponents);
            }
        }
    }
    Ok((k as f64).ln() - acc * inv_pi / k as f64)
}

/// Constellation mutual information at the default quadrature order.
pub fn mi_constellation(c: &Constellation, rho: f64) -> Result<f64> {
    mi_constellation_with(c, rho, default_rule())
}

fn ln_1p_exp(x: f64) -> f64 {
    if x > 33.0 {
        x
    } else if x < -37.0 {
        0.0
    } else {
        x.exp().ln_1p()
    }
}

/// Mutual information of a binary antipodal `±a` input over the real channel
/// `y = x + z`, `z ~ N(0,1)`.
fn binary_antipodal_mi(a: f64, rule: &GaussHermite) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let penalty = rule.expect_std_normal(|z| ln_1p_exp(-2.0 * a * (a + z)));
    2.0f64.ln() - penalty
}

/// QPSK mutual information over the complex AWGN channel at SINR `rho`,
/// through the decomposition into two independent binary real channels. This
/// is an independent formulation cross-checked against
/// [`mi_constellation`] on the QPSK alphabet.
pub fn qpsk_mi(rho: f64) -> f64 {
    qpsk_mi_with(rho, default_rule())
}

pub fn qpsk_mi_with(rho: f64, rule: &GaussHermite) -> f64 {
    // Per dimension: amplitude √(ρ/2), noise N(0, 1/2); rescaling the output
    // by √2 gives a ±√ρ input against unit-variance real noise.
    2.0 * binary_antipodal_mi(rho.sqrt(), rule)
}

/// Input law used by the SIC rate sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SchemeInput<'a> {
    /// CSCG symbols; per-stream rate `ln(1 + ρ_m)`, summing to the log-det
    /// constrained capacity.
    Gaussian,
    Constellation(&'a Constellation),
}

/// Achievable-rate lower bound `Σ_m I(b_m; √ρ_m b_m + v)` over the SINR
/// profile of the LMMSE-SIC chain.
pub fn sic_rate_sum(profile: &SinrProfile, input: SchemeInput<'_>) -> Result<RateValue> {
    let mut nats = 0.0;
    for &rho in &profile.rho {
        nats += match input {
            SchemeInput::Gaussian => mi_gaussian(rho),
            SchemeInput::Constellation(c) => mi_constellation(c, rho)?,
        };
    }
    Ok(RateValue::new(nats, profile.normalizer))
}
