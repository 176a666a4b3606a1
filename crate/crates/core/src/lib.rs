//! Simulation and Fourier-phase delay estimation for measuring the group-index
//! difference between two fiber cores with two-photon (HOM) and single-photon
//! interferometry.

pub mod optics;
pub mod scan;
pub mod estimator;
pub mod bench;
