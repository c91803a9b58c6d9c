//! From metric jets to curvature, Weyl, Jacobi operators and Ricci spectra.

mod chart;
mod curvature;
pub mod frame;
mod jacobi;
mod spectrum;
mod weyl;

pub use chart::{first_nonpositive_minor, MetricChart, MetricJets};
pub use curvature::{christoffel, christoffel_jets, curvature_bundle, inverse_jets, ChristoffelJets, CurvatureBundle};
pub use frame::Frame;
pub use jacobi::{jacobi_package, JacobiPackage};
pub use spectrum::{multiplicity_pattern, ricci_spectrum, RicciSpectrum, CLUSTER_TOL};
pub use weyl::{weyl, weyl_from_parts, weyl_selfdual_split, SelfDualSplit};
