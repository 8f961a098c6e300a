//! Numerical tolerances shared by every module and test.

/// Squared-norm deviation allowed after `normalize`.
pub const NORMALIZATION: f64 = 1e-12;
/// Max-entry deviation for `A == A†`.
pub const HERMITIAN: f64 = 1e-12;
/// Max-entry deviation for `A†A == I`.
pub const UNITARY: f64 = 1e-10;
/// Eigen-residual bound `‖H v − λ v‖`.
pub const EIGEN_RESIDUAL: f64 = 1e-9;
/// Orthonormality of eigenvector sets.
pub const ORTHONORMAL: f64 = 1e-10;
/// Entrywise agreement for tensor identities.
pub const TENSOR: f64 = 1e-12;

/// Commutator norm below which an operator counts as a symmetry of a chain Hamiltonian.
pub const CHAIN_SYMMETRY: f64 = 1e-10;
/// Pauli conjugation identities.
pub const PAULI_CONJUGATION: f64 = 1e-14;
/// Default threshold for grouping eigenvalues into a ground space.
pub const DEGENERACY: f64 = 1e-9;
/// Order-parameter agreement in sensitivity scans.
pub const ORDER_PARAMETER: f64 = 1e-9;

/// `[Ũ, H]` bound for symmetries of a measurement model, and unitarity of `U_T`.
pub const MODEL_SYMMETRY: f64 = 1e-9;
/// Fidelity deficit under which two ensemble members are the same ray.
pub const ENSEMBLE_CLOSURE: f64 = 1e-9;
/// States within this distance must classify identically.
pub const OUTCOME_DETERMINISM: f64 = 1e-12;
/// Agreement of fine-grained probabilities with the Born weights.
pub const FINE_GRAIN: f64 = 1e-12;

/// Noise densities must integrate to one within this.
pub const DENSITY_NORMALIZATION: f64 = 1e-9;
/// `p_L + p_R == 1` and amplitude-input sums.
pub const PROBABILITY_SUM: f64 = 1e-9;
/// Absolute accuracy requested from adaptive quadrature.
pub const QUADRATURE: f64 = 1e-12;
/// Gaussian support is truncated at this many standard deviations.
pub const GAUSSIAN_TAIL_SIGMAS: f64 = 12.0;
/// Effective velocities closer than this to the separatrix are excluded from
/// dynamics-versus-energy comparisons.
pub const SEPARATRIX_GUARD: f64 = 1e-9;
/// Allowed energy drift of the default integrator.
pub const ENERGY_DRIFT: f64 = 1e-6;

/// Two-sided tail mass of a 5σ normal deviation, `erfc(5/√2)`. Used as the
/// significance level of every statistical gate.
pub const FIVE_SIGMA_ALPHA: f64 = 5.733_031_437_583_87e-7;
/// Width of the Monte Carlo acceptance band in standard errors.
pub const STAT_SIGMAS: f64 = 5.0;
