use serde::{Deserialize, Serialize};

use crate::spectral::DEFAULT_TOL_EIG;

/// Tolerances and budgets shared by every solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverOptions {
    /// Newton stopping rule on `‖residual‖∞ / max(1, ‖u‖∞)`.
    pub tol_newton: f64,
    /// Stopping rule on the `J`-norm of the sphere gradient.
    pub tol_sphere: f64,
    pub max_iter: usize,
    /// Starting directions for the sphere descent.
    pub restarts: usize,
    /// Random starts per fiber maximisation (the warm start comes on top).
    pub fiber_restarts: usize,
    /// Random `H⁺` directions pushed through the fiber map when searching
    /// for critical points.
    pub extra_seeds: usize,
    pub seed: u64,
    pub tol_eig: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol_newton: 1e-10,
            tol_sphere: 1e-8,
            max_iter: 4000,
            restarts: 8,
            fiber_restarts: 6,
            extra_seeds: 4,
            seed: 0,
            tol_eig: DEFAULT_TOL_EIG,
        }
    }
}

impl SolverOptions {
    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }
}
