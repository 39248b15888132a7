//! Coupling thresholds `β̂₁, β̂₂`, their maximum `Λ`, and regime flags.
//!
//! `β̂ᵢ` is the least value of `J_other(φ,φ) / ∫Uᵢ²φ²` over `φ` in the positive
//! subspace of the other component, minimised again over the ground-state
//! representatives that were found.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::discretization::{Field, Grid};
use crate::error::{Error, Result};
use crate::functional::SystemParams;
use crate::options::SolverOptions;
use crate::scalar::{solve_scalar_ground, ScalarGround};
use crate::spectral::{split_space, SpaceSplit, Spectrum};

/// Smallest `β` with `D x = β M x` for a positive diagonal `D`.
///
/// Solved as `1 / λ_max(D^{-1/2} M D^{-1/2})`, which needs no factorisation
/// of the possibly near-singular weight matrix. Returns the minimising
/// coefficient vector normalised to unit length.
pub fn pencil_min(d: &[f64], m: &DMatrix<f64>) -> Result<(f64, DVector<f64>)> {
    let k = d.len();
    if k == 0 {
        return Err(Error::EmptyPositiveSubspace);
    }
    if m.nrows() != k || m.ncols() != k {
        return Err(Error::ShapeMismatch { expected: k, got: m.nrows() });
    }
    if d.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidParameter("pencil diagonal must be positive".into()));
    }
    let inv_sqrt: Vec<f64> = d.iter().map(|v| 1.0 / v.sqrt()).collect();
    let w = DMatrix::from_fn(k, k, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]) * inv_sqrt[i] * inv_sqrt[j]);
    let eig = SymmetricEigen::new(w);
    let (imax, &top) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    let trace_scale = eig.eigenvalues.iter().map(|v| v.abs()).sum::<f64>();
    if !(top > 1e-14 * trace_scale) || !(top > 0.0) {
        return Err(Error::DegenerateWeight);
    }
    let y = eig.eigenvectors.column(imax);
    let mut x = DVector::from_fn(k, |i, _| y[i] * inv_sqrt[i]);
    x /= x.norm();
    Ok((1.0 / top, x))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetaHat {
    pub value: f64,
    /// The three largest coefficients of the minimiser as `(eigen index, coefficient)`.
    pub dominant_modes: Vec<(usize, f64)>,
}

/// `inf_{φ ∈ H⁺_other} (∫|∇φ|² − τ_other∫φ²) / ∫U²φ²`.
pub fn beta_hat(g: &Grid, spectrum: &Spectrum, split_other: &SpaceSplit, u: &Field) -> Result<BetaHat> {
    g.check(u)?;
    if u.amax() == 0.0 {
        return Err(Error::ZeroField);
    }
    let plus = &split_other.plus_idx;
    if plus.is_empty() {
        return Err(Error::EmptyPositiveSubspace);
    }
    let d: Vec<f64> = plus.iter().map(|&k| spectrum.eigenvalues[k] - split_other.tau).collect();
    let n = g.node_count;
    let basis = DMatrix::from_fn(n, plus.len(), |i, j| spectrum.vectors[(i, plus[j])]);
    let mut weighted = basis.clone();
    for i in 0..n {
        let w = g.quad_weight * u[i] * u[i];
        weighted.row_mut(i).scale_mut(w);
    }
    let m = basis.tr_mul(&weighted);
    let (value, x) = pencil_min(&d, &m)?;
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[b].abs().total_cmp(&x[a].abs()));
    let dominant_modes = order.iter().take(3).map(|&i| (plus[i], x[i])).collect();
    Ok(BetaHat { value, dominant_modes })
}

/// Lower bound `C′ / (C² ‖U‖²_{L⁴})` for [`beta_hat`].
///
/// `C′ = min (λₖ − τ)/λₖ` over the plus modes bounds `J_other` below by the
/// Dirichlet norm, and `C² = 1/s0`, where `s0` is the least Dirichlet–`L⁴`
/// quotient (the `τ = 0` scalar ground-state quotient).
pub fn beta_hat_lower_bound(g: &Grid, spectrum: &Spectrum, split_other: &SpaceSplit, u: &Field, s0: f64) -> Result<f64> {
    let c_prime = split_other
        .plus_idx
        .iter()
        .map(|&k| (spectrum.eigenvalues[k] - split_other.tau) / spectrum.eigenvalues[k])
        .fold(f64::INFINITY, f64::min);
    if !c_prime.is_finite() {
        return Err(Error::EmptyPositiveSubspace);
    }
    let l4 = g.norm_lp(u, 4)?;
    Ok(c_prime * s0 / (l4 * l4))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Thresholds {
    pub beta_hat_1: f64,
    pub beta_hat_2: f64,
    /// `Λ = max{β̂₁, β̂₂}`.
    pub lambda_cap: f64,
    /// `3√(μ₁μ₂)`.
    pub three_sqrt: f64,
    pub mu_max: f64,
    pub minimizing_modes_1: Vec<(usize, f64)>,
    pub minimizing_modes_2: Vec<(usize, f64)>,
    /// Ground-state representatives scanned per component.
    pub representatives: (usize, usize),
}

fn min_over_representatives(g: &Grid, spectrum: &Spectrum, split_other: &SpaceSplit, ground: &ScalarGround) -> Result<(BetaHat, usize)> {
    let mut best: Option<BetaHat> = None;
    let mut count = 0;
    for c in ground.representatives() {
        count += 1;
        let b = beta_hat(g, spectrum, split_other, &c.u)?;
        if best.as_ref().is_none_or(|x| b.value < x.value) {
            best = Some(b);
        }
    }
    Ok((best.ok_or(Error::NoCriticalPointFound)?, count))
}

/// Thresholds from already computed scalar ground states `U₁`, `U₂`.
pub fn thresholds_from_grounds(
    p: &SystemParams,
    g: &Grid,
    spectrum: &Spectrum,
    g1: &ScalarGround,
    g2: &ScalarGround,
    tol_eig: f64,
) -> Result<Thresholds> {
    p.validate()?;
    let split1 = split_space(spectrum, p.tau1, tol_eig)?;
    let split2 = split_space(spectrum, p.tau2, tol_eig)?;
    let (first, second) = rayon::join(
        || min_over_representatives(g, spectrum, &split2, g1),
        || min_over_representatives(g, spectrum, &split1, g2),
    );
    let (b1, r1) = first?;
    let (b2, r2) = second?;
    Ok(Thresholds {
        beta_hat_1: b1.value,
        beta_hat_2: b2.value,
        lambda_cap: b1.value.max(b2.value),
        three_sqrt: 3.0 * (p.mu1 * p.mu2).sqrt(),
        mu_max: p.mu1.max(p.mu2),
        minimizing_modes_1: b1.dominant_modes,
        minimizing_modes_2: b2.dominant_modes,
        representatives: (r1, r2),
    })
}

pub fn compute_thresholds(p: &SystemParams, g: &Grid, spectrum: &Spectrum, opts: &SolverOptions) -> Result<Thresholds> {
    p.validate()?;
    let (g1, g2) = rayon::join(
        || solve_scalar_ground(p.tau1, p.mu1, g, spectrum, opts),
        || solve_scalar_ground(p.tau2, p.mu2, g, spectrum, opts),
    );
    thresholds_from_grounds(p, g, spectrum, &g1?, &g2?, opts.tol_eig)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RegimeReport {
    /// `τ₁ = τ₂ = λ₁`.
    pub resonant: bool,
    /// `β > Λ`.
    pub ground_state_exists: bool,
    /// Resonant and `0 < β < 3√(μ₁μ₂)`.
    pub equalities_regime: bool,
    /// `β ≤ max{μ₁,μ₂}` and `β < 3√(μ₁μ₂)`.
    pub semitrivial_ground_hint: bool,
    /// `β > max{μ₁,μ₂}`.
    pub synchronized_regime: bool,
}

impl RegimeReport {
    /// Compact label listing the raised flags, `none` if there are none.
    pub fn label(&self) -> String {
        let flags = [
            (self.resonant, "resonant"),
            (self.ground_state_exists, "ground"),
            (self.equalities_regime, "equalities"),
            (self.semitrivial_ground_hint, "semitrivial_hint"),
            (self.synchronized_regime, "synchronized"),
        ];
        let on: Vec<&str> = flags.iter().filter(|f| f.0).map(|f| f.1).collect();
        if on.is_empty() {
            "none".into()
        } else {
            on.join("|")
        }
    }
}

/// Whether both `τᵢ` sit on the discrete principal eigenvalue.
pub fn is_resonant(p: &SystemParams, lambda1: f64, tol_eig: f64) -> bool {
    let tol = tol_eig * lambda1.abs().max(1.0);
    (p.tau1 - lambda1).abs() <= tol && (p.tau2 - lambda1).abs() <= tol
}

pub fn classify_regime(p: &SystemParams, t: &Thresholds, lambda1: f64, tol_eig: f64) -> Result<RegimeReport> {
    p.validate()?;
    let resonant = is_resonant(p, lambda1, tol_eig);
    let below = p.beta < t.three_sqrt;
    Ok(RegimeReport {
        resonant,
        ground_state_exists: p.beta > t.lambda_cap,
        equalities_regime: resonant && below,
        semitrivial_ground_hint: p.beta <= t.mu_max && below,
        synchronized_regime: p.beta > t.mu_max,
    })
}
