//! Non-central chi-squared distribution as a Poisson mixture of central ones.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson};

use super::special::{gamma_p, ln_gamma};
use crate::error::{Error, Result};

/// Series terms are dropped once their Poisson weight falls below this.
const TRUNCATION: f64 = 1e-14;
pub const MAX_TERMS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoncentralChi2 {
    dof: f64,
    noncentrality: f64,
}

impl NoncentralChi2 {
    pub fn new(dof: f64, noncentrality: f64) -> Result<Self> {
        if !(dof > 0.0) || !dof.is_finite() {
            return Err(Error::OutOfRange {
                name: "dof",
                value: dof,
            });
        }
        if !(noncentrality >= 0.0) || !noncentrality.is_finite() {
            return Err(Error::OutOfRange {
                name: "noncentrality",
                value: noncentrality,
            });
        }
        Ok(NoncentralChi2 { dof, noncentrality })
    }

    pub fn dof(&self) -> f64 {
        self.dof
    }

    pub fn noncentrality(&self) -> f64 {
        self.noncentrality
    }

    pub fn mean(&self) -> f64 {
        self.dof + self.noncentrality
    }

    pub fn variance(&self) -> f64 {
        2.0 * (self.dof + 2.0 * self.noncentrality)
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Ok(0.0);
        }
        if x.is_infinite() {
            return Ok(1.0);
        }
        let half_x = 0.5 * x;
        let a0 = 0.5 * self.dof;
        let mu = 0.5 * self.noncentrality;
        if mu == 0.0 {
            return gamma_p(a0, half_x);
        }
        // Central CDFs obey P(a + 1, y) = P(a, y) - y^a e^-y / Gamma(a + 1),
        // so one incomplete-gamma evaluation at the Poisson mode seeds both
        // directions of the sweep.
        let mode = mu.floor();
        let a_mode = a0 + mode;
        let p_mode = gamma_p(a_mode, half_x)?;
        let w_mode = poisson_weight(mode, mu);
        let ln_y = half_x.ln();
        let ln_step = |a: f64| (a * ln_y - half_x - ln_gamma(a + 1.0)).exp();

        let mut total = w_mode * p_mode;
        let mut terms = 1usize;

        // upward: j = mode + 1, mode + 2, ...
        let mut w = w_mode;
        let mut p = p_mode;
        let mut step = ln_step(a_mode);
        let mut j = mode;
        loop {
            j += 1.0;
            w *= mu / j;
            p = (p - step).max(0.0);
            step *= half_x / (a0 + j);
            total += w * p;
            terms += 1;
            if w < TRUNCATION || p == 0.0 {
                break;
            }
            if terms > MAX_TERMS {
                return Err(Error::NonConvergence { terms });
            }
        }

        // downward: j = mode - 1, ..., 0
        let mut w = w_mode;
        let mut p = p_mode;
        let mut j = mode;
        while j >= 1.0 {
            w *= j / mu;
            j -= 1.0;
            p = (p + ln_step(a0 + j)).min(1.0);
            total += w * p;
            terms += 1;
            if w < TRUNCATION {
                break;
            }
            if terms > MAX_TERMS {
                return Err(Error::NonConvergence { terms });
            }
        }
        Ok(total.clamp(0.0, 1.0))
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        if x < 0.0 || x.is_infinite() {
            return Ok(0.0);
        }
        let a0 = 0.5 * self.dof;
        let mu = 0.5 * self.noncentrality;
        if x == 0.0 {
            return Ok(if self.dof < 2.0 {
                f64::INFINITY
            } else if self.dof == 2.0 {
                0.5 * (-mu).exp()
            } else {
                0.0
            });
        }
        let half_x = 0.5 * x;
        // central density of dof 2(a0 + j) at x, in log form
        let ln_central = |a: f64| (a - 1.0) * half_x.ln() - half_x - ln_gamma(a) - std::f64::consts::LN_2;
        if mu == 0.0 {
            return Ok(ln_central(a0).exp());
        }
        let mode = mu.floor();
        let mut total = 0.0;
        let mut terms = 0usize;
        let mut j = mode;
        loop {
            let w = poisson_weight(j, mu);
            total += (w.ln() + ln_central(a0 + j)).exp();
            terms += 1;
            if w < TRUNCATION {
                break;
            }
            if terms > MAX_TERMS {
                return Err(Error::NonConvergence { terms });
            }
            j += 1.0;
        }
        let mut j = mode;
        while j >= 1.0 {
            j -= 1.0;
            let w = poisson_weight(j, mu);
            total += (w.ln() + ln_central(a0 + j)).exp();
            terms += 1;
            if w < TRUNCATION {
                break;
            }
            if terms > MAX_TERMS {
                return Err(Error::NonConvergence { terms });
            }
        }
        Ok(total)
    }

    /// Draws via the Poisson mixture: `2 * Gamma(dof/2 + K, 1)` with
    /// `K ~ Poisson(noncentrality / 2)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let mu = 0.5 * self.noncentrality;
        let k = if mu > 0.0 {
            Poisson::new(mu).expect("positive finite rate").sample(rng)
        } else {
            0.0
        };
        let shape = 0.5 * self.dof + k;
        2.0 * Gamma::new(shape, 1.0).expect("positive shape").sample(rng)
    }
}

fn poisson_weight(j: f64, mu: f64) -> f64 {
    (j * mu.ln() - mu - ln_gamma(j + 1.0)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_adaptive;
    use crate::rng::stream_rng;
    use proptest::prelude::*;

    /// Independent route: bivariate closed form for 2 dof,
    /// `F(x) = 1 - Q1(sqrt(n), sqrt(x))`, evaluated by integrating the
    /// Rice density directly.
    fn rice_cdf_2dof(n: f64, x: f64) -> f64 {
        let s = n.sqrt();
        let pdf = |r: f64| r * (-(r * r + s * s) / 2.0).exp() * bessel_i0(r * s);
        integrate_adaptive(&pdf, 0.0, x.sqrt(), 1e-14, 40)
    }

    fn bessel_i0(x: f64) -> f64 {
        // power series, fine for the moderate arguments used here
        let mut term = 1.0;
        let mut sum = 1.0;
        let q = 0.25 * x * x;
        for k in 1..500 {
            term *= q / (k as f64 * k as f64);
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        sum
    }

    #[test]
    fn central_two_dof_is_exponential() {
        let d = NoncentralChi2::new(2.0, 0.0).unwrap();
        assert!((d.cdf(2.0).unwrap() - 0.6321).abs() < 1e-4);
        for &x in &[0.01, 0.5, 2.0, 9.0, 60.0] {
            assert!((d.cdf(x).unwrap() - (1.0 - (-x / 2.0).exp())).abs() < 1e-15);
        }
    }

    #[test]
    fn moments_by_quadrature() {
        let d = NoncentralChi2::new(2.0, 3.0).unwrap();
        let pdf = |x: f64| d.pdf(x).unwrap();
        let m0 = integrate_adaptive(&pdf, 0.0, 200.0, 1e-13, 40);
        let m1 = integrate_adaptive(&|x| x * pdf(x), 0.0, 200.0, 1e-13, 40);
        let m2 = integrate_adaptive(&|x| x * x * pdf(x), 0.0, 200.0, 1e-12, 40);
        assert!((m0 - 1.0).abs() < 1e-10);
        assert!((m1 - 5.0).abs() < 1e-8);
        assert!((m2 - m1 * m1 - 16.0).abs() < 1e-8);
        assert_eq!(d.mean(), 5.0);
        assert_eq!(d.variance(), 16.0);
    }

    #[test]
    fn cdf_tends_to_one() {
        let d = NoncentralChi2::new(14.0, 7.3).unwrap();
        assert!((d.cdf(1e4).unwrap() - 1.0).abs() < 1e-10);
        let pdf = |x: f64| d.pdf(x).unwrap();
        let mass = integrate_adaptive(&pdf, 0.0, 400.0, 1e-13, 40);
        assert!((mass - 1.0).abs() < 1e-10);
    }

    #[test]
    fn cdf_matches_rice_route() {
        for &n in &[0.3, 2.0, 11.0, 40.0] {
            let d = NoncentralChi2::new(2.0, n).unwrap();
            for &x in &[0.05, 1.0, 4.0, 15.0, 60.0] {
                let a = d.cdf(x).unwrap();
                let b = rice_cdf_2dof(n, x);
                assert!((a - b).abs() < 1e-11, "n={n} x={x} {a} {b}");
            }
        }
    }

    #[test]
    fn cdf_is_integral_of_pdf() {
        for &(k, n) in &[(2.0, 5.0), (6.0, 0.0), (14.0, 7.3), (3.0, 120.0), (126.0, 2500.0)] {
            let d = NoncentralChi2::new(k, n).unwrap();
            for &q in &[0.3, 0.9, 1.2, 1.8] {
                let x = q * d.mean();
                let integral = integrate_adaptive(&|t| d.pdf(t).unwrap(), 0.0, x, 1e-12, 40);
                assert!((d.cdf(x).unwrap() - integral).abs() < 1e-9, "k={k} n={n} x={x}");
            }
        }
    }

    #[test]
    fn large_noncentrality_converges() {
        let d = NoncentralChi2::new(2.0, 1e5).unwrap();
        let c = d.cdf(d.mean()).unwrap();
        assert!(c > 0.45 && c < 0.55);
    }

    #[test]
    fn sampler_moments() {
        let d = NoncentralChi2::new(6.0, 4.5).unwrap();
        let mut rng = stream_rng(21, 0);
        let n = 400_000;
        let xs: Vec<f64> = (0..n).map(|_| d.sample(&mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
        let se = (d.variance() / n as f64).sqrt();
        assert!((mean - d.mean()).abs() < 4.0 * se);
        assert!((var / d.variance() - 1.0).abs() < 0.02);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(NoncentralChi2::new(0.0, 1.0).is_err());
        assert!(NoncentralChi2::new(2.0, -1.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn cdf_monotone_and_bounded(k in 1usize..40, n in 0.0f64..200.0) {
            let d = NoncentralChi2::new(k as f64, n).unwrap();
            let hi = d.mean() + 12.0 * d.variance().sqrt();
            let mut prev = 0.0;
            for i in 0..10_000 {
                let x = hi * i as f64 / 9_999.0;
                let c = d.cdf(x).unwrap();
                prop_assert!((0.0..=1.0).contains(&c));
                prop_assert!(c + 1e-13 >= prev, "x={} c={} prev={}", x, c, prev);
                prev = c;
            }
        }
    }
}
