//! Scalar special functions: the gamma family, Bernoulli numbers, the
//! Riemann zeta function and its derivative, occupation functions and the
//! Bose/Fermi sums `F_{b,f}(s, x)`.

pub mod bernoulli;
pub mod cache;
pub mod fstat;
pub mod gamma;
pub mod zeta;

pub use bernoulli::{bernoulli, bernoulli_f64, bernoulli_with_max, DEFAULT_BERNOULLI_MAX};
pub use cache::SpecialValueCache;
pub use fstat::{f_statistic, f_statistic_estimate, occupation};
pub use gamma::{
    cos_pi, digamma, gamma, gamma_family, gamma_ratio, gamma_sign, ln_gamma, rgamma, sin_pi,
    GammaKind, EULER_GAMMA,
};
pub use zeta::{dirichlet_eta, dirichlet_eta_prime, riemann_zeta, riemann_zeta_prime};
