//! Closed-form distributions and phase functions of the received RF energy.

pub mod chi2;
pub mod distribution;
pub mod eigen;
pub mod phase;
pub mod special;

pub use chi2::NoncentralChi2;
pub use distribution::{
    aa_is_mean, aa_is_variance_closed_form, aa_is_variance_extra_m, aa_ss_mean, aa_ss_variance, dist_aa_is, dist_aa_ss,
    f_fit_max_energy, f_fit_min_variance, gain_bound_db, gain_mean_db, gain_var_db, EnergyDistribution, PhaseInputs,
};
pub use eigen::uniform_eigen;
pub use phase::{f_averaged, f_averaged_upper_bound, f_phase, f_phase_expanded, f_tilde, f_tilde_averaged, v_tilde};
pub use special::bessel_j0;
