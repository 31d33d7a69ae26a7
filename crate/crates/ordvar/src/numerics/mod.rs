//! Special functions, quadrature, root finding, and random sampling shared by
//! every other module.

mod beta;
mod gamma_inc;
mod kolmogorov;
mod quad;
mod rng;
mod root;
pub(crate) mod special;

pub use beta::reg_inc_beta;
pub use gamma_inc::{normal_cdf, reg_lower_gamma};
pub use kolmogorov::{kolmogorov_cdf, kolmogorov_exact_cdf};
pub use quad::{integrate, DEFAULT_ABS_TOL, DEFAULT_REL_TOL};
pub use rng::{sample_gamma, sample_normal, RandomStream};
pub use root::{solve_root, DEFAULT_ROOT_REL_TOL};
pub use special::{digamma, gamma_ratio, log_gamma};
