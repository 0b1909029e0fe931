//! Continuum objects: excursion-coded real trees, stick-breaking trees,
//! tree-indexed Gaussian fields, distorted metrics, continuum potentials
//! and the Brox diffusion.

mod brox;
mod distort;
mod excursion;
mod field;
mod potential;
mod stick;

pub use brox::{brox_chain, brox_law, brox_simulate, PathSample};
pub use distort::{distorted_contour, distorted_metric, tilted_excursion, DistortedMetric};
pub use excursion::{
    sample_excursion, sample_excursion_bessel, tree_distance, CodedTree, Excursion,
};
pub use field::{gaussian_drift_values, sample_gaussian_field, GaussianField, GaussianFieldSampler};
pub use potential::{make_potential, ContinuumPotential, PotentialDomain, PotentialKind, PotentialParams};
pub use stick::{stick_breaking, StickBreakTree};
