//! RF energy distributions of the AA-SS and AA-IS schemes.

use rand::Rng;

use super::chi2::NoncentralChi2;
use super::phase::{f_phase, v_tilde};
use crate::channel::{ArrayConfig, PhaseShift};
use crate::error::{Error, Result};
use crate::harvester::EhCurve;
use crate::quadrature::integrate_adaptive;

const CONVOLUTION_TOL: f64 = 1e-7;
const CONVOLUTION_DEPTH: usize = 24;

/// Everything the distributions depend on besides `beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseInputs {
    pub psi: PhaseShift,
    pub phi: f64,
    pub kappa: f64,
    pub r_sum: f64,
}

impl PhaseInputs {
    pub fn new(psi: PhaseShift, phi: f64, kappa: f64, r_sum: f64) -> Result<Self> {
        let m = psi.len() as f64;
        if !(kappa >= 0.0) || !kappa.is_finite() {
            return Err(Error::OutOfRange {
                name: "kappa",
                value: kappa,
            });
        }
        // tolerate rounding at the attainable extremes
        let slack = 1e-9 * m * m;
        if !(r_sum >= -slack && r_sum <= m * m + slack) {
            return Err(Error::OutOfRange {
                name: "R_sum",
                value: r_sum,
            });
        }
        Ok(PhaseInputs {
            psi,
            phi,
            kappa,
            r_sum: r_sum.clamp(0.0, m * m),
        })
    }

    pub fn from_config(config: &ArrayConfig, psi: &PhaseShift) -> Result<Self> {
        if psi.len() != config.m {
            return Err(Error::DimensionMismatch {
                expected: config.m,
                actual: psi.len(),
            });
        }
        PhaseInputs::new(psi.clone(), config.phi, config.kappa, config.r_sum()?)
    }

    pub fn antennas(&self) -> usize {
        self.psi.len()
    }

    pub fn f(&self) -> f64 {
        f_phase(&self.psi, self.phi)
    }

    pub fn v_tilde(&self) -> f64 {
        v_tilde(&self.psi, self.phi)
    }
}

/// `offset + sum_i scale_i * X_i` with independent non-central chi-squared
/// `X_i`. Degenerate components collapse into the deterministic offset.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyDistribution {
    offset: f64,
    components: Vec<(f64, NoncentralChi2)>,
}

impl EnergyDistribution {
    pub fn new(offset: f64, components: Vec<(f64, NoncentralChi2)>) -> Result<Self> {
        if !(offset >= 0.0) || !offset.is_finite() {
            return Err(Error::OutOfRange {
                name: "offset",
                value: offset,
            });
        }
        if components.len() > 2 {
            return Err(Error::InvalidInput("at most two components are supported".into()));
        }
        for (scale, _) in &components {
            if !(*scale > 0.0) || !scale.is_finite() {
                return Err(Error::OutOfRange {
                    name: "scale",
                    value: *scale,
                });
            }
        }
        Ok(EnergyDistribution { offset, components })
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn components(&self) -> &[(f64, NoncentralChi2)] {
        &self.components
    }

    pub fn mean(&self) -> f64 {
        self.offset + self.components.iter().map(|(s, d)| s * d.mean()).sum::<f64>()
    }

    pub fn variance(&self) -> f64 {
        self.components.iter().map(|(s, d)| s * s * d.variance()).sum()
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        let y = x - self.offset;
        match self.components.as_slice() {
            [] => Ok(if y >= 0.0 { 1.0 } else { 0.0 }),
            _ if y <= 0.0 => Ok(0.0),
            [(s, d)] => d.cdf(y / s),
            [(s1, d1), (s2, d2)] => {
                // integrate against the component with more degrees of
                // freedom so that its density stays bounded at the origin
                let ((sa, da), (sb, db)) = if d1.dof() >= d2.dof() {
                    ((*s1, d1), (*s2, d2))
                } else {
                    ((*s2, d2), (*s1, d1))
                };
                convolve(|u| Ok(da.pdf(u / sa)? / sa), |v| db.cdf(v / sb), y).map(|p| p.clamp(0.0, 1.0))
            }
            _ => unreachable!("constructor caps the component count"),
        }
    }

    /// Density of the continuous part; zero if the law is a point mass.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        let y = x - self.offset;
        match self.components.as_slice() {
            [] => Ok(0.0),
            _ if y < 0.0 => Ok(0.0),
            [(s, d)] => Ok(d.pdf(y / s)? / s),
            [(s1, d1), (s2, d2)] => {
                let ((sa, da), (sb, db)) = if d1.dof() >= d2.dof() {
                    ((*s1, d1), (*s2, d2))
                } else {
                    ((*s2, d2), (*s1, d1))
                };
                if y == 0.0 {
                    return Ok(0.0);
                }
                convolve(|u| Ok(da.pdf(u / sa)? / sa), |v| Ok(db.pdf(v / sb)? / sb), y)
            }
            _ => unreachable!("constructor caps the component count"),
        }
    }

    /// Probability that the RF energy falls below `xi0`.
    pub fn outage(&self, xi0: f64) -> Result<f64> {
        if xi0 <= 0.0 {
            return Ok(0.0);
        }
        self.cdf(xi0)
    }

    /// CDF of the harvested energy `g(X)` through the monotone curve.
    pub fn harvested_cdf(&self, curve: &EhCurve, y: f64) -> Result<f64> {
        if y < 0.0 {
            return Ok(0.0);
        }
        if y >= curve.g_max {
            return Ok(1.0);
        }
        self.cdf(curve.inverse(y)?)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.offset + self.components.iter().map(|(s, d)| s * d.sample(rng)).sum::<f64>()
    }
}

/// `integral_0^y a(u) b(y - u) du`, with errors from either factor surfaced.
fn convolve<A, B>(a: A, b: B, y: f64) -> Result<f64>
where
    A: Fn(f64) -> Result<f64>,
    B: Fn(f64) -> Result<f64>,
{
    let failure = std::cell::Cell::new(None);
    let integrand = |u: f64| match a(u).and_then(|pa| Ok(pa * b(y - u)?)) {
        Ok(v) => v,
        Err(e) => {
            failure.set(Some(e));
            0.0
        }
    };
    let value = integrate_adaptive(&integrand, 0.0, y, CONVOLUTION_TOL, CONVOLUTION_DEPTH);
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name: "beta",
            value: beta,
        })
    }
}

/// RF energy under AA-SS: a scaled 2-dof non-central chi-squared.
pub fn dist_aa_ss(beta: f64, inputs: &PhaseInputs) -> Result<EnergyDistribution> {
    check_beta(beta)?;
    let m = inputs.antennas() as f64;
    let k = inputs.kappa;
    let r = inputs.r_sum;
    let f = inputs.f();
    if r == 0.0 {
        return EnergyDistribution::new(beta * k * f / (m * (k + 1.0)), vec![]);
    }
    let scale = beta * r / (2.0 * (k + 1.0) * m);
    let d = NoncentralChi2::new(2.0, 2.0 * k * f / r)?;
    EnergyDistribution::new(0.0, vec![(scale, d)])
}

/// RF energy under AA-IS: exact for uniform correlation, otherwise an
/// approximation that only sees `R_sum`.
pub fn dist_aa_is(beta: f64, inputs: &PhaseInputs) -> Result<EnergyDistribution> {
    check_beta(beta)?;
    let mi = inputs.antennas();
    if mi == 1 {
        return dist_aa_ss(beta, inputs);
    }
    let m = mi as f64;
    let k = inputs.kappa;
    let r = inputs.r_sum;
    let f = inputs.f();
    // rounding can leave v_tilde a hair below zero when the LOS vector is
    // aligned with the all-ones direction
    let v = inputs.v_tilde().max(0.0);
    let base = beta / (2.0 * m * m * (k + 1.0));
    let mut offset = 0.0;
    let mut components = Vec::with_capacity(2);
    if r > 0.0 {
        components.push((base * r, NoncentralChi2::new(2.0, 2.0 * k * f / r)?));
    } else {
        offset += beta * k * f / (m * m * (k + 1.0));
    }
    let rest = m * m - r;
    if rest > 0.0 {
        let d = NoncentralChi2::new(2.0 * (m - 1.0), 2.0 * m * (m - 1.0) * k * v / rest)?;
        components.push((base * rest / (m - 1.0), d));
    } else {
        offset += beta * k * v / (m * (k + 1.0));
    }
    EnergyDistribution::new(offset, components)
}

/// Mean of AA-SS energy.
pub fn aa_ss_mean(beta: f64, m: usize, kappa: f64, r_sum: f64, f: f64) -> f64 {
    beta * (r_sum + kappa * f) / (m as f64 * (kappa + 1.0))
}

/// Variance of AA-SS energy.
pub fn aa_ss_variance(beta: f64, m: usize, kappa: f64, r_sum: f64, f: f64) -> f64 {
    let mf = m as f64;
    beta * beta * r_sum * (r_sum + 2.0 * kappa * f) / ((kappa + 1.0) * (kappa + 1.0) * mf * mf)
}

/// Mean of AA-IS energy in terms of the mean perturbation `f_tilde`.
pub fn aa_is_mean(beta: f64, m: usize, kappa: f64, f_tilde: f64) -> f64 {
    let mf = m as f64;
    beta * (1.0 + kappa * f_tilde / (mf * mf * (kappa + 1.0)))
}

/// Variance of AA-IS energy after eliminating `v_tilde = M - f / M`.
pub fn aa_is_variance_closed_form(beta: f64, m: usize, kappa: f64, r_sum: f64, f: f64) -> f64 {
    let mf = m as f64;
    let k = kappa;
    beta * beta / (mf.powi(3) * (mf - 1.0) * (k + 1.0) * (k + 1.0))
        * (mf.powi(3) * (1.0 + 2.0 * k) + r_sum * r_sum - 2.0 * mf * r_sum * (1.0 + k) + 2.0 * k * (r_sum - mf) * f)
}

/// Commonly quoted variant of [`aa_is_variance_closed_form`] whose phase
/// term carries an extra factor `M`. It agrees with the exact variance only
/// when `R_sum = M`, `kappa = 0` or `f = 0`.
pub fn aa_is_variance_extra_m(beta: f64, m: usize, kappa: f64, r_sum: f64, f: f64) -> f64 {
    let mf = m as f64;
    let k = kappa;
    beta * beta / (mf.powi(3) * (mf - 1.0) * (k + 1.0) * (k + 1.0))
        * (mf.powi(3) * (1.0 + 2.0 * k) + r_sum * r_sum - 2.0 * mf * r_sum * (1.0 + k)
            + 2.0 * k * mf * (r_sum - mf) * f)
}

/// Curve fits of the azimuth-averaged phase function under the
/// max-energy (`0.85 M^1.5`) and min-variance (`0.64 M`) shifts.
pub fn f_fit_max_energy(m: usize) -> f64 {
    0.85 * (m as f64).powf(1.5)
}

pub fn f_fit_min_variance(m: usize) -> f64 {
    0.64 * m as f64
}

/// AA-SS mean gain of max-energy over min-variance shifting, dB.
pub fn gain_mean_db(m: usize, kappa: f64, r_sum: f64) -> f64 {
    let hi = r_sum + kappa * f_fit_max_energy(m);
    let lo = r_sum + kappa * f_fit_min_variance(m);
    10.0 * (hi / lo).log10()
}

/// AA-SS variance growth of max-energy over min-variance shifting, dB.
pub fn gain_var_db(m: usize, kappa: f64, r_sum: f64) -> f64 {
    let hi = r_sum + 2.0 * kappa * f_fit_max_energy(m);
    let lo = r_sum + 2.0 * kappa * f_fit_min_variance(m);
    10.0 * (hi / lo).log10()
}

/// Limit of both gains as `kappa` grows without bound.
pub fn gain_bound_db(m: usize) -> f64 {
    10.0 * (f_fit_max_energy(m) / f_fit_min_variance(m)).log10()
}
