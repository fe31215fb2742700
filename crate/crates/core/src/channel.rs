//! Correlated Rician channel model for a half-wavelength uniform linear array.
//!
//! The equivalent channel seen by a device, after the beacon applies its
//! preventive phase shifts, is split into real and imaginary Gaussian parts
//! `hx`, `hy`, each distributed as
//! `N(sqrt(kappa / (2 (kappa + 1))) * omega_{x,y}, R / (2 (kappa + 1)))`.

use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Eigenvalues in `[-PSD_TOLERANCE, 0)` are clamped to zero; anything more
/// negative is rejected.
pub const PSD_TOLERANCE: f64 = 1e-10;

const SYMMETRY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum CorrelationModel {
    /// `R[i][j] = tau^|i-j|`, `tau` in `[0, 1)`.
    Exponential { tau: f64 },
    /// Unit diagonal, `rho` everywhere else; `rho` in `[-1/(M-1), 1]`.
    Uniform { rho: f64 },
    /// User supplied symmetric PSD matrix with unit diagonal.
    Custom(DMatrix<f64>),
}

impl CorrelationModel {
    pub fn build(&self, m: usize) -> Result<DMatrix<f64>> {
        build_correlation(self, m)
    }

    /// Sum of all entries, using the closed forms where one exists.
    pub fn r_sum(&self, m: usize) -> Result<f64> {
        match self {
            CorrelationModel::Exponential { tau } => {
                check_tau(*tau)?;
                Ok(r_sum_exponential(*tau, m))
            }
            CorrelationModel::Uniform { rho } => {
                check_rho(*rho, m)?;
                Ok(r_sum_uniform(*rho, m))
            }
            CorrelationModel::Custom(r) => {
                validate_correlation(r, m)?;
                Ok(r_sum(r))
            }
        }
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if (0.0..1.0).contains(&tau) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name: "tau",
            value: tau,
        })
    }
}

/// Smallest admissible uniform correlation coefficient for `m` antennas.
pub fn uniform_rho_lower_bound(m: usize) -> f64 {
    if m <= 1 {
        -1.0
    } else {
        -1.0 / (m as f64 - 1.0)
    }
}

fn check_rho(rho: f64, m: usize) -> Result<()> {
    // a few ulps of slack so that rho computed as -1/(M-1) round-trips
    let lo = uniform_rho_lower_bound(m) * (1.0 + 4.0 * f64::EPSILON);
    if rho.is_finite() && rho >= lo && rho <= 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name: "rho",
            value: rho,
        })
    }
}

pub fn build_correlation(model: &CorrelationModel, m: usize) -> Result<DMatrix<f64>> {
    if m == 0 {
        return Err(Error::OutOfRange { name: "M", value: 0.0 });
    }
    match model {
        CorrelationModel::Exponential { tau } => {
            check_tau(*tau)?;
            Ok(DMatrix::from_fn(m, m, |i, j| tau.powi(i.abs_diff(j) as i32)))
        }
        CorrelationModel::Uniform { rho } => {
            check_rho(*rho, m)?;
            Ok(uniform_correlation(*rho, m))
        }
        CorrelationModel::Custom(r) => {
            validate_correlation(r, m)?;
            Ok(r.clone())
        }
    }
}

pub(crate) fn uniform_correlation(rho: f64, m: usize) -> DMatrix<f64> {
    DMatrix::from_fn(m, m, |i, j| if i == j { 1.0 } else { rho })
}

/// Checks shape, symmetry, unit diagonal and positive semidefiniteness.
pub fn validate_correlation(r: &DMatrix<f64>, m: usize) -> Result<()> {
    if r.nrows() != m || r.ncols() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: r.nrows().max(r.ncols()),
        });
    }
    for i in 0..m {
        if (r[(i, i)] - 1.0).abs() > SYMMETRY_TOLERANCE {
            return Err(Error::InvalidInput(format!(
                "correlation diagonal entry {i} is {} (expected 1)",
                r[(i, i)]
            )));
        }
        for j in 0..i {
            if (r[(i, j)] - r[(j, i)]).abs() > SYMMETRY_TOLERANCE {
                return Err(Error::InvalidInput(format!(
                    "correlation matrix is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    let min_eigenvalue = min_eigenvalue(r);
    if min_eigenvalue < -PSD_TOLERANCE {
        return Err(Error::NotPositiveSemidefinite { min_eigenvalue });
    }
    Ok(())
}

pub fn min_eigenvalue(r: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(r.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// `1^T R 1`, by direct summation.
pub fn r_sum(r: &DMatrix<f64>) -> f64 {
    r.iter().sum()
}

/// Geometric-series closed form of `r_sum` for exponential correlation.
pub fn r_sum_exponential(tau: f64, m: usize) -> f64 {
    let mf = m as f64;
    if tau == 0.0 {
        return mf;
    }
    (mf * (1.0 - tau * tau) - 2.0 * tau * (1.0 - tau.powi(m as i32))) / ((1.0 - tau) * (1.0 - tau))
}

pub fn r_sum_uniform(rho: f64, m: usize) -> f64 {
    let mf = m as f64;
    mf * (1.0 + (mf - 1.0) * rho)
}

/// Uniform correlation coefficient that reproduces a given `r_sum`.
pub fn uniform_rho_for_r_sum(r_sum: f64, m: usize) -> f64 {
    let mf = m as f64;
    if m <= 1 {
        return 0.0;
    }
    (r_sum - mf) / (mf * (mf - 1.0))
}

/// Preventive per-antenna phase offsets, `psi[0] = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseShift(Vec<f64>);

impl PhaseShift {
    pub fn new(psi: Vec<f64>) -> Result<Self> {
        match psi.first() {
            None => Err(Error::InvalidInput(
                "phase shift must cover at least one antenna".into(),
            )),
            Some(&p0) if p0 != 0.0 => Err(Error::InvalidInput(format!(
                "phase shift of the reference antenna must be 0, got {p0}"
            ))),
            Some(_) if psi.iter().any(|p| !p.is_finite()) => {
                Err(Error::InvalidInput("phase shift entries must be finite".into()))
            }
            Some(_) => Ok(PhaseShift(psi)),
        }
    }

    /// Removes the common phase so that the first entry is zero, then wraps
    /// every entry into `[0, 2 pi)`.
    pub fn normalized(psi: &[f64]) -> Result<Self> {
        let Some(&p0) = psi.first() else {
            return Err(Error::InvalidInput(
                "phase shift must cover at least one antenna".into(),
            ));
        };
        let mut out: Vec<f64> = psi.iter().map(|p| wrap_angle(p - p0)).collect();
        out[0] = 0.0;
        PhaseShift::new(out)
    }

    pub fn zeros(m: usize) -> Self {
        PhaseShift(vec![0.0; m.max(1)])
    }

    /// `psi_t = mod(t, 2) * pi`.
    pub fn alternating(m: usize) -> Self {
        PhaseShift((0..m.max(1)).map(|t| if t % 2 == 1 { PI } else { 0.0 }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Wraps an angle into `[0, 2 pi)`.
pub fn wrap_angle(x: f64) -> f64 {
    let w = x.rem_euclid(2.0 * PI);
    if w >= 2.0 * PI {
        0.0
    } else {
        w
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArrayConfig {
    pub m: usize,
    pub kappa: f64,
    pub phi: f64,
    pub phi0: f64,
    pub correlation: CorrelationModel,
}

impl ArrayConfig {
    pub fn new(m: usize, kappa: f64, phi: f64, correlation: CorrelationModel) -> Result<Self> {
        let config = ArrayConfig {
            m,
            kappa,
            phi,
            phi0: FRAC_PI_4,
            correlation,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_phi0(mut self, phi0: f64) -> Self {
        self.phi0 = phi0;
        self
    }

    pub fn with_phi(mut self, phi: f64) -> Self {
        self.phi = phi;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::OutOfRange { name: "M", value: 0.0 });
        }
        if !(self.kappa >= 0.0) || !self.kappa.is_finite() {
            return Err(Error::OutOfRange {
                name: "kappa",
                value: self.kappa,
            });
        }
        if !(0.0..=2.0 * PI).contains(&self.phi) {
            return Err(Error::OutOfRange {
                name: "phi",
                value: self.phi,
            });
        }
        if !self.phi0.is_finite() {
            return Err(Error::OutOfRange {
                name: "phi0",
                value: self.phi0,
            });
        }
        match &self.correlation {
            CorrelationModel::Exponential { tau } => check_tau(*tau),
            CorrelationModel::Uniform { rho } => check_rho(*rho, self.m),
            CorrelationModel::Custom(r) => validate_correlation(r, self.m),
        }
    }

    pub fn los_phases(&self) -> Vec<f64> {
        los_phases(self.m, self.phi)
    }

    pub fn r_sum(&self) -> Result<f64> {
        self.correlation.r_sum(self.m)
    }
}

/// Mean phase of each array element relative to the first,
/// `Phi_t = -t pi sin(phi)`.
pub fn los_phases(m: usize, phi: f64) -> Vec<f64> {
    let s = phi.sin();
    (0..m).map(|t| -(t as f64) * PI * s).collect()
}

/// LOS mean directions `(omega_x, omega_y)` of the real and imaginary parts.
pub fn mean_vectors(config: &ArrayConfig, shift: &PhaseShift) -> Result<(Vec<f64>, Vec<f64>)> {
    check_shift(config.m, shift)?;
    Ok(mean_vectors_at(config.phi, config.phi0, shift))
}

fn check_shift(m: usize, shift: &PhaseShift) -> Result<()> {
    if shift.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: shift.len(),
        });
    }
    Ok(())
}

/// Rotation coefficients of the initial phase, scaled by sqrt(2) so that the
/// default `phi0 = pi/4` gives exactly `omega = cos -/+ sin`.
fn initial_phase_coefficients(phi0: f64) -> (f64, f64) {
    if phi0 == FRAC_PI_4 {
        (1.0, 1.0)
    } else {
        (SQRT_2 * phi0.cos(), SQRT_2 * phi0.sin())
    }
}

pub(crate) fn mean_vectors_at(phi: f64, phi0: f64, shift: &PhaseShift) -> (Vec<f64>, Vec<f64>) {
    let m = shift.len();
    let mut wx = vec![0.0; m];
    let mut wy = vec![0.0; m];
    fill_mean_vectors(phi, phi0, shift, &mut wx, &mut wy);
    (wx, wy)
}

fn fill_mean_vectors(phi: f64, phi0: f64, shift: &PhaseShift, wx: &mut [f64], wy: &mut [f64]) {
    let (c, s) = initial_phase_coefficients(phi0);
    let sin_phi = phi.sin();
    for (t, psi) in shift.as_slice().iter().enumerate() {
        if t == 0 {
            wx[0] = c;
            wy[0] = s;
            continue;
        }
        let angle = psi - (t as f64) * PI * sin_phi;
        let (sa, ca) = angle.sin_cos();
        wx[t] = c * ca - s * sa;
        wy[t] = s * ca + c * sa;
    }
}

/// Symmetric square root `Q diag(sqrt(lambda)) Q^T` of a PSD matrix.
pub fn spectral_sqrt(r: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if r.nrows() != r.ncols() {
        return Err(Error::FactorizationFailure("matrix is not square".into()));
    }
    if r.iter().any(|x| !x.is_finite()) {
        return Err(Error::FactorizationFailure("matrix has non-finite entries".into()));
    }
    let eig = SymmetricEigen::new(r.clone());
    let mut roots = eig.eigenvalues.clone();
    for lambda in roots.iter_mut() {
        if *lambda < -PSD_TOLERANCE {
            return Err(Error::FactorizationFailure(format!(
                "eigenvalue {lambda:e} below -{PSD_TOLERANCE:e}"
            )));
        }
        *lambda = lambda.max(0.0).sqrt();
    }
    let q = &eig.eigenvectors;
    Ok(q * DMatrix::from_diagonal(&roots) * q.transpose())
}

/// One realization of the equivalent channel `h* = hx + i hy`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSample {
    pub hx: Vec<f64>,
    pub hy: Vec<f64>,
}

impl ChannelSample {
    pub fn new(hx: Vec<f64>, hy: Vec<f64>) -> Result<Self> {
        if hx.len() != hy.len() {
            return Err(Error::DimensionMismatch {
                expected: hx.len(),
                actual: hy.len(),
            });
        }
        if hx.is_empty() {
            return Err(Error::InvalidInput("channel sample needs at least one antenna".into()));
        }
        Ok(ChannelSample { hx, hy })
    }

    pub fn antennas(&self) -> usize {
        self.hx.len()
    }

    /// `|h_j|^2` for every antenna.
    pub fn gains(&self) -> impl Iterator<Item = f64> + '_ {
        self.hx.iter().zip(&self.hy).map(|(x, y)| x * x + y * y)
    }
}

/// Pre-factored sampler for one array configuration and phase shift.
#[derive(Debug, Clone)]
pub struct ChannelSampler {
    m: usize,
    phi0: f64,
    shift: PhaseShift,
    // row-major symmetric square root of R
    sqrt_r: Vec<f64>,
    los_scale: f64,
    nlos_scale: f64,
    // LOS means at the configured azimuth, already scaled
    mean_x: Vec<f64>,
    mean_y: Vec<f64>,
}

/// Reusable storage for allocation-free draws.
#[derive(Debug, Clone)]
pub struct SampleBuffer {
    sample: ChannelSample,
    z: Vec<f64>,
    wx: Vec<f64>,
    wy: Vec<f64>,
}

impl SampleBuffer {
    pub fn new(m: usize) -> Self {
        SampleBuffer {
            sample: ChannelSample {
                hx: vec![0.0; m],
                hy: vec![0.0; m],
            },
            z: vec![0.0; m],
            wx: vec![0.0; m],
            wy: vec![0.0; m],
        }
    }

    pub fn sample(&self) -> &ChannelSample {
        &self.sample
    }
}

impl ChannelSampler {
    pub fn new(config: &ArrayConfig, shift: &PhaseShift) -> Result<Self> {
        config.validate()?;
        check_shift(config.m, shift)?;
        let r = config.correlation.build(config.m)?;
        Self::with_matrix(config, shift, &r)
    }

    /// Uses an explicit correlation matrix in place of the configured model.
    pub fn with_matrix(config: &ArrayConfig, shift: &PhaseShift, r: &DMatrix<f64>) -> Result<Self> {
        check_shift(config.m, shift)?;
        if r.nrows() != config.m {
            return Err(Error::DimensionMismatch {
                expected: config.m,
                actual: r.nrows(),
            });
        }
        let root = spectral_sqrt(r)?;
        let m = config.m;
        let sqrt_r = (0..m * m).map(|k| root[(k / m, k % m)]).collect();
        let kappa = config.kappa;
        let los_scale = (kappa / (2.0 * (kappa + 1.0))).sqrt();
        let (wx, wy) = mean_vectors_at(config.phi, config.phi0, shift);
        Ok(ChannelSampler {
            m,
            phi0: config.phi0,
            shift: shift.clone(),
            sqrt_r,
            los_scale,
            nlos_scale: (1.0 / (2.0 * (kappa + 1.0))).sqrt(),
            mean_x: wx.iter().map(|w| los_scale * w).collect(),
            mean_y: wy.iter().map(|w| los_scale * w).collect(),
        })
    }

    pub fn antennas(&self) -> usize {
        self.m
    }

    pub fn shift(&self) -> &PhaseShift {
        &self.shift
    }

    /// Draws at the configured azimuth.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ChannelSample {
        let mut buf = SampleBuffer::new(self.m);
        self.draw_into(None, rng, &mut buf);
        buf.sample
    }

    /// Draws at an explicit azimuth (used when `phi` is random per draw).
    pub fn sample_at<R: Rng + ?Sized>(&self, phi: f64, rng: &mut R) -> ChannelSample {
        let mut buf = SampleBuffer::new(self.m);
        self.draw_into(Some(phi), rng, &mut buf);
        buf.sample
    }

    /// Overwrites `buf` with a fresh draw; `phi = None` uses the configured
    /// azimuth. Consumes the same random numbers as [`Self::sample`].
    pub fn draw_into<'a, R: Rng + ?Sized>(
        &self,
        phi: Option<f64>,
        rng: &mut R,
        buf: &'a mut SampleBuffer,
    ) -> &'a ChannelSample {
        let SampleBuffer { sample, z, wx, wy } = buf;
        let (mean_x, mean_y): (&[f64], &[f64]) = match phi {
            None => (&self.mean_x, &self.mean_y),
            Some(phi) => {
                fill_mean_vectors(phi, self.phi0, &self.shift, wx, wy);
                for t in 0..self.m {
                    wx[t] *= self.los_scale;
                    wy[t] *= self.los_scale;
                }
                (wx, wy)
            }
        };
        self.correlated_gaussian(rng, z, &mut sample.hx, mean_x);
        self.correlated_gaussian(rng, z, &mut sample.hy, mean_y);
        sample
    }

    fn correlated_gaussian<R: Rng + ?Sized>(&self, rng: &mut R, z: &mut [f64], out: &mut [f64], mean: &[f64]) {
        let m = self.m;
        for zi in z.iter_mut() {
            *zi = rng.sample(StandardNormal);
        }
        for (t, row) in self.sqrt_r.chunks_exact(m).enumerate() {
            let dot: f64 = row.iter().zip(z.iter()).map(|(a, b)| a * b).sum();
            out[t] = mean[t] + self.nlos_scale * dot;
        }
    }
}

/// One-shot convenience wrapper around [`ChannelSampler`].
pub fn sample_channel<R: Rng + ?Sized>(config: &ArrayConfig, shift: &PhaseShift, rng: &mut R) -> Result<ChannelSample> {
    Ok(ChannelSampler::new(config, shift)?.sample(rng))
}
