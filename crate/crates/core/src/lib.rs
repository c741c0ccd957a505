//! Non-Abelian Hatano-Nelson chains: Hamiltonians, dense eigensolvers,
//! spectral topology, skin-effect diagnostics and the electric-circuit map.

pub mod circuit;
pub mod eigen;
pub mod error;
pub mod matrix;
pub mod model;
pub mod skin;
pub mod topology;

pub use circuit::{
    admittance_bloch, circuit_chain, circuit_to_model, m_coefficients, resonance_frequency, simulated_measurement,
    CircuitModel, CircuitParams, MeasurementSetup, NoiseModel, Protocol,
};
pub use eigen::{eig2x2, eig_dense, sort_bands_by_continuity, BandTrajectories, Spectrum};
pub use error::{Error, Result};
pub use matrix::ComplexMatrix;
pub use model::{
    analytic_eigenvalues, bloch_hamiltonian, is_nonabelian, pauli_combination, real_space_hamiltonian,
    BoundaryCondition, GaugeVector, ModelParams,
};
pub use skin::{
    abelian_control, classify_localization, gamma, obc_eigenstates, EigenstateSet, Localization, LocalizationReport,
};
pub use topology::{
    band_resolved_winding, band_trajectories, braiding_degree, compute_phase_diagram, exceptional_scan,
    phase_boundary_residual, spectral_winding, KGrid, PhaseDiagram,
};
