//! Ground states of the scalar problem `−Δu − τu = μu³`, the quotient `S`
//! and the quartic shift `k(u)`.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use crate::discretization::{Field, Grid};
use crate::error::{Error, Result};
use crate::functional::Problem;
use crate::newton::{damped_newton, NEWTON_ITER};
use crate::options::SolverOptions;
use crate::reduced::multi_descent;
use crate::spectral::Spectrum;

/// Candidates whose energies agree to this relative gap are the same level.
const LEVEL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct ScalarCandidate {
    #[serde(skip)]
    pub u: Field,
    pub energy: f64,
    pub residual_norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalarGround {
    pub tau: f64,
    pub mu: f64,
    #[serde(skip)]
    pub u: Field,
    pub energy: f64,
    /// `J_τ(U)/‖U‖²_{L⁴}`.
    pub quotient: f64,
    /// `‖residual‖∞ / max(1, ‖U‖∞)`.
    pub residual_norm: f64,
    /// Distinct converged critical points (modulo sign), sorted by energy.
    pub candidates: Vec<ScalarCandidate>,
}

impl ScalarGround {
    /// Candidates at the ground level, i.e. the found part of the ground-state set.
    pub fn representatives(&self) -> impl Iterator<Item = &ScalarCandidate> {
        let e = self.energy;
        self.candidates.iter().filter(move |c| (c.energy - e).abs() <= LEVEL_TOL * e.abs().max(1.0))
    }
}

pub(crate) fn same_up_to_sign(a: &DVector<f64>, b: &DVector<f64>, tol: f64) -> bool {
    let scale = a.amax().max(b.amax()).max(1.0);
    (a - b).amax() <= tol * scale || (a + b).amax() <= tol * scale
}

pub fn solve_scalar_ground(tau: f64, mu: f64, g: &Grid, spectrum: &Spectrum, opts: &SolverOptions) -> Result<ScalarGround> {
    let prob = Problem::scalar(g, spectrum, tau, mu, opts.tol_eig)?;
    if prob.splits[0].plus_idx.is_empty() {
        return Err(Error::EmptyPositiveSubspace);
    }
    let runs: Vec<Result<(DVector<f64>, f64, bool)>> = multi_descent(&prob, opts)
        .into_par_iter()
        .map(|d| {
            let nt = damped_newton(&prob, d?.fiber.point, opts.tol_newton, NEWTON_ITER);
            Ok((nt.x, nt.residual, nt.converged))
        })
        .collect();

    let mut cands: Vec<ScalarCandidate> = Vec::new();
    let mut best_failure: Option<Error> = None;
    for r in runs {
        match r {
            Ok((u, res, true)) => {
                if prob.norm_h1(&prob.project_plus(&u)) <= 1e-8 * prob.norm_h1(&u).max(1.0) {
                    continue;
                }
                let energy = prob.energy(&u);
                let dup = cands.iter().any(|c| {
                    (c.energy - energy).abs() <= 1e-6 * energy.abs().max(1.0) && same_up_to_sign(&c.u, &u, 1e-6)
                });
                if !dup {
                    cands.push(ScalarCandidate { u, energy, residual_norm: res });
                }
            }
            Ok((_, res, false)) => {
                best_failure.get_or_insert(Error::NoConvergence { iterations: NEWTON_ITER, residual: res });
            }
            Err(e) => {
                best_failure.get_or_insert(e);
            }
        }
    }
    if cands.is_empty() {
        return Err(best_failure.unwrap_or(Error::NoCriticalPointFound));
    }
    cands.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    let best = &cands[0];
    // fix the sign so the ground state is positive where it is largest
    let mut u = best.u.clone();
    let imax = u.iamax();
    if u[imax] < 0.0 {
        u.neg_mut();
    }
    Ok(ScalarGround {
        tau,
        mu,
        quotient: least_quotient(g, &u, tau)?,
        energy: best.energy,
        residual_norm: best.residual_norm,
        u,
        candidates: cands,
    })
}

/// `(∫|∇u|² − τ∫u²) / ‖u‖²_{L⁴}`.
pub fn least_quotient(g: &Grid, u: &Field, tau: f64) -> Result<f64> {
    g.check(u)?;
    let l4 = g.norm_lp(u, 4)?;
    if l4 == 0.0 {
        return Err(Error::ZeroField);
    }
    Ok((g.inner_grad(u, u)? - tau * g.inner_l2(u, u)?) / (l4 * l4))
}

/// The unique minimiser of `ℓ(k) = ¼∫(u + kφ₁)⁴`.
pub fn quartic_shift(g: &Grid, u: &Field, phi1: &Field) -> Result<f64> {
    g.check(u)?;
    g.check(phi1)?;
    if u.amax() == 0.0 {
        return Err(Error::ZeroField);
    }
    let pp = phi1.dot(phi1);
    if pp == 0.0 {
        return Err(Error::ZeroField);
    }
    let rest = u - phi1 * (u.dot(phi1) / pp);
    if rest.amax() <= 1e-12 * u.amax() {
        return Err(Error::ParallelToPrincipal);
    }
    let lp = |k: f64| shift_derivative(u, phi1, k);
    let dlp = |k: f64| u.iter().zip(phi1.iter()).map(|(a, p)| 3.0 * (a + k * p).powi(2) * p * p).sum::<f64>();

    let mut step = 1.0f64.max(u.amax() / phi1.amax());
    let (mut lo, mut hi) = (-step, step);
    while lp(lo) > 0.0 {
        hi = lo;
        step *= 2.0;
        lo = -step;
    }
    while lp(hi) < 0.0 {
        lo = hi;
        step *= 2.0;
        hi = step;
    }
    let mut k = 0.5 * (lo + hi);
    for _ in 0..200 {
        let v = lp(k);
        if v == 0.0 {
            break;
        }
        if v < 0.0 {
            lo = k;
        } else {
            hi = k;
        }
        let d = dlp(k);
        let newton = k - v / d;
        k = if d > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo <= 4.0 * f64::EPSILON * k.abs().max(1.0) {
            break;
        }
    }
    Ok(k)
}

/// `ℓ′(k) = ∫(u + kφ₁)³φ₁` up to the quadrature weight.
fn shift_derivative(u: &Field, phi1: &Field, k: f64) -> f64 {
    u.iter().zip(phi1.iter()).map(|(a, p)| (a + k * p).powi(3) * p).sum()
}
