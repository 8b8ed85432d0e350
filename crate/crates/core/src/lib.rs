//! Spectral geometry of conformal metrics on the Riemann sphere: Galerkin
//! spectra of the ∂̄-Laplacian, heat traces, zeta-regularised determinants,
//! analytic torsion and Quillen metrics, including singular integrable
//! metrics reached through smoothing families.

pub mod anomaly;
pub mod basis;
pub mod eigen;
pub mod error;
pub mod harness;
pub mod heat;
pub mod linalg;
pub mod metric;
pub mod operator;
pub mod quadrature;
pub mod special;

pub use error::{Error, Result};
pub use metric::{
    chern_c1, chern_c1_round, fs_metric, max_metric, pnorm_metric, smoothmax_metric,
    sup_log_distance, volume, volume_in_chart, Chart, ChartPoint, ConformalMetric, DeltaX,
    MetricFamily, Smoothness,
};
pub use quadrature::{QuadratureRule, SampleGrid, SpherePoint};
