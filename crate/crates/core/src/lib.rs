//! Infinitesimal multiplicative convolutions of scalar non-commutative laws.
//!
//! Laws are dual moment sequences `m_n + ε m′_n` (`ε² = 0`). Transforms are
//! truncated power series with dual coefficients, and the ε-part of every
//! transform is its infinitesimal counterpart.

pub mod convolution;
pub mod cumulants;
pub mod dual;
pub mod embedding;
pub mod error;
pub mod io;
pub mod law;
pub mod partitions;
pub mod selftest;
pub mod series;
pub mod wishart;

pub use convolution::{
    convolve_by_transform, oracle_product, verify, MonotoneOrder, ProductKind, VerificationReport,
};
pub use cumulants::{
    cumulants_from_moments, inf_cumulants_direct, kappa_from_t, mixed_vanishing_check,
    moments_from_cumulants, t_coeffs, t_coeffs_from_moments, t_coeffs_via_transform, t_pi_value,
    BooleanWordModel, CumulantVector, FreeWordModel, KappaRoute, TCoeffVector, TSolver,
    WordMoments,
};
pub use dual::{DualScalar, C64};
pub use embedding::{ut2_freeness_check, Ut2FreenessReport, UT2};
pub use error::{Error, Result};
pub use law::{d_transform, law_from_transform, transform, InfLaw, TransformKind};
pub use partitions::{LinkedPartition, SetPartition};
pub use series::{ComplexSeries, DualSeries, Series, DEFAULT_ORDER, MAX_ORDER};
pub use wishart::{estimate_moments, product_experiment, McEstimate, Sampler, WishartConfig};
