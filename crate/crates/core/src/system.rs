//! System solvers: the reduced minimum `c′`, the discovered critical set and
//! the explicit synchronized and semitrivial solutions.
//!
//! The ground-state energy `e` is estimated from above by the least energy in
//! a finite discovered critical set; no certificate of the true infimum over
//! all critical points is attempted.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use crate::discretization::{Field, Grid};
use crate::error::{Error, Result};
use crate::fiber::{fiber_maximize, FiberPoint};
use crate::functional::{Pair, Problem, SystemParams};
use crate::newton::{damped_newton, NEWTON_ITER};
use crate::options::SolverOptions;
use crate::reduced::{multi_descent, restart_rng, seed_directions};
use crate::scalar::{solve_scalar_ground, ScalarGround};
use crate::spectral::Spectrum;

/// A component is zero when its sup norm is below this fraction of the point's.
pub const ZERO_COMPONENT_TOL: f64 = 1e-8;
/// Components at an angle below this (radians) count as proportional.
pub const SYNC_ANGLE_TOL: f64 = 1e-6;
/// Energy gap and relative sup distance below which two points are the same.
pub const DEDUP_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    FullyNontrivial,
    Semitrivial1,
    Semitrivial2,
    Synchronized,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalPoint {
    #[serde(skip)]
    pub point: Pair,
    pub energy: f64,
    /// `‖residual‖∞ / max(1, ‖point‖∞)`.
    pub residual_norm: f64,
    pub kind: Kind,
    /// `H¹₀` norm of the `H⁺` projection.
    pub hplus_norm: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Diagnostics {
    pub descent_iterations: Vec<usize>,
    pub descents_converged: usize,
    pub restarts_used: usize,
    pub seeds_tried: usize,
    pub newton_failures: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct GroundCandidate {
    pub best: CriticalPoint,
    pub c_prime_est: f64,
    pub e_est: f64,
    /// Distinct converged critical points, sorted by energy.
    pub all_found: Vec<CriticalPoint>,
    #[serde(skip)]
    pub minimizer: FiberPoint,
    /// Newton refinement of the reduced minimiser, when it converged.
    pub minimizer_refined: Option<CriticalPoint>,
    pub diagnostics: Diagnostics,
}

/// Angle in `[0, π/2]` between the two components, ignoring sign.
///
/// A component below [`ZERO_COMPONENT_TOL`] of the sup norm counts as zero;
/// it is proportional to anything and gives angle `0`.
pub fn component_angle(g: &Grid, p: &Pair) -> f64 {
    let scale = p.amax();
    if p.u1.amax() <= ZERO_COMPONENT_TOL * scale || p.u2.amax() <= ZERO_COMPONENT_TOL * scale {
        return 0.0;
    }
    let a = g.inner_l2(&p.u1, &p.u1).unwrap_or(0.0);
    let b = g.inner_l2(&p.u2, &p.u2).unwrap_or(0.0);
    let c = g.inner_l2(&p.u1, &p.u2).unwrap_or(0.0).abs() / (a * b).sqrt();
    // acos loses accuracy near 1; use the sine through the Gram determinant
    let s2 = (1.0 - c * c).max(0.0);
    s2.sqrt().atan2(c)
}

pub fn classify(g: &Grid, p: &Pair) -> Kind {
    let scale = p.amax();
    if p.u2.amax() <= ZERO_COMPONENT_TOL * scale {
        Kind::Semitrivial1
    } else if p.u1.amax() <= ZERO_COMPONENT_TOL * scale {
        Kind::Semitrivial2
    } else if component_angle(g, p) <= SYNC_ANGLE_TOL {
        Kind::Synchronized
    } else {
        Kind::FullyNontrivial
    }
}

fn critical_point(prob: &Problem, x: DVector<f64>, residual_norm: f64) -> Result<CriticalPoint> {
    let hplus_norm = prob.norm_h1(&prob.project_plus(&x));
    if hplus_norm <= 1e-8 * prob.norm_h1(&x).max(1.0) {
        return Err(Error::ConvergedToTilde);
    }
    let energy = prob.energy(&x);
    let point = Pair::from_flat(&x);
    let kind = classify(prob.grid, &point);
    Ok(CriticalPoint { point, energy, residual_norm, kind, hplus_norm })
}

/// Least value of `ψ(u) = max_{ℝ⁺u ⊕ H̃} I` over the descents.
pub fn minimize_reduced(prob: &Problem, opts: &SolverOptions) -> Result<(f64, FiberPoint)> {
    let (best, _) = reduced_runs(prob, opts)?;
    Ok((best.value, best))
}

/// Reduced minimiser, iterations, converged.
type Run = (FiberPoint, usize, bool);

fn reduced_runs(prob: &Problem, opts: &SolverOptions) -> Result<(FiberPoint, Vec<Run>)> {
    let mut runs = Vec::new();
    let mut failure = None;
    for r in multi_descent(prob, opts) {
        match r {
            Ok(d) => runs.push((d.fiber, d.iterations, d.converged)),
            Err(e) => {
                failure.get_or_insert(e);
            }
        }
    }
    let best = runs
        .iter()
        .map(|r| &r.0)
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .cloned()
        .ok_or_else(|| failure.unwrap_or(Error::NoConvergence { iterations: opts.max_iter, residual: f64::NAN }))?;
    Ok((best, runs))
}

/// Damped Newton on the system residual from `u0`.
pub fn newton_refine(prob: &Problem, u0: &DVector<f64>, opts: &SolverOptions) -> Result<CriticalPoint> {
    prob.check(u0)?;
    let nt = damped_newton(prob, u0.clone(), opts.tol_newton, NEWTON_ITER);
    if !nt.converged {
        return Err(Error::NoConvergence { iterations: nt.iterations, residual: nt.residual });
    }
    critical_point(prob, nt.x, nt.residual)
}

/// Same point up to the sign symmetries `(±u₁, ±u₂)`.
fn same_point(a: &CriticalPoint, b: &CriticalPoint) -> bool {
    let scale = a.energy.abs().max(b.energy.abs()).max(1.0);
    if (a.energy - b.energy).abs() > DEDUP_TOL * scale {
        return false;
    }
    let sup = a.point.amax().max(b.point.amax()).max(1.0);
    [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)].iter().any(|&(s1, s2)| {
        let d1 = (&a.point.u1 - &b.point.u1 * s1).amax();
        let d2 = (&a.point.u2 - &b.point.u2 * s2).amax();
        d1.max(d2) <= DEDUP_TOL * sup
    })
}

/// Newton from the reduced minimisers, the given `hints`, and `extra_seeds`
/// random `H⁺` directions pushed through the fiber map.
pub fn find_critical_set_with(prob: &Problem, opts: &SolverOptions, hints: &[DVector<f64>]) -> Result<GroundCandidate> {
    let (minimizer, runs) = reduced_runs(prob, opts)?;
    let mut diagnostics = Diagnostics {
        descent_iterations: runs.iter().map(|r| r.1).collect(),
        descents_converged: runs.iter().filter(|r| r.2).count(),
        restarts_used: runs.len(),
        ..Default::default()
    };

    let mut seeds: Vec<DVector<f64>> = vec![minimizer.point.clone()];
    seeds.extend(runs.iter().map(|r| r.0.point.clone()));
    seeds.extend(hints.iter().cloned());
    let mut rng = restart_rng(opts.seed ^ 0x5EED, 0);
    let dirs = seed_directions(prob, opts.extra_seeds + 1, &mut rng);
    for (k, d) in dirs.iter().skip(1).enumerate() {
        let mut r = restart_rng(opts.seed ^ 0xA5A5, k);
        if let Ok(fp) = fiber_maximize(prob, d, None, opts.fiber_restarts, &mut r) {
            seeds.push(fp.point);
        }
    }
    diagnostics.seeds_tried = seeds.len();

    let refined: Vec<Result<CriticalPoint>> = seeds.par_iter().map(|s| newton_refine(prob, s, opts)).collect();
    let minimizer_refined = refined[0].as_ref().ok().cloned();
    let mut found: Vec<CriticalPoint> = Vec::new();
    for r in refined {
        match r {
            Ok(cp) => {
                if !found.iter().any(|f| same_point(f, &cp)) {
                    found.push(cp);
                }
            }
            Err(_) => diagnostics.newton_failures += 1,
        }
    }
    if found.is_empty() {
        return Err(Error::NoCriticalPointFound);
    }
    found.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(GroundCandidate {
        best: found[0].clone(),
        c_prime_est: minimizer.value,
        e_est: found[0].energy,
        all_found: found,
        minimizer,
        minimizer_refined,
        diagnostics,
    })
}

/// Critical-set search with semitrivial and (when defined) synchronized seeds.
pub fn find_critical_set(p: &SystemParams, g: &Grid, spectrum: &Spectrum, opts: &SolverOptions) -> Result<GroundCandidate> {
    let prob = Problem::system(g, spectrum, p, opts.tol_eig)?;
    let mut hints = Vec::new();
    if let Ok(sem) = semitrivial_solutions(p, g, spectrum, opts) {
        hints.push(sem.first.point.to_flat());
        hints.push(sem.second.point.to_flat());
    }
    if let Some(s) = synchronized_seed(p, g, spectrum, opts) {
        hints.push(s.to_flat());
    }
    find_critical_set_with(&prob, opts, &hints)
}

pub(crate) fn synchronized_seed(p: &SystemParams, g: &Grid, spectrum: &Spectrum, opts: &SolverOptions) -> Option<Pair> {
    if !same_tau(p) {
        return None;
    }
    synchronized_amplitudes(p.mu1, p.mu2, p.beta).ok()?;
    let omega = solve_scalar_ground(p.tau1, 1.0, g, spectrum, opts).ok()?;
    synchronized_solution(p, g, &omega.u).ok()
}

pub(crate) fn same_tau(p: &SystemParams) -> bool {
    (p.tau1 - p.tau2).abs() <= 1e-12 * p.tau1.abs().max(1.0)
}

/// `(α₁, α₂)` with `μ₁α₁² + βα₂² = 1 = βα₁² + μ₂α₂²`.
pub fn synchronized_amplitudes(mu1: f64, mu2: f64, beta: f64) -> Result<(f64, f64)> {
    let denom = mu1 * mu2 - beta * beta;
    if denom.abs() <= 1e-12 {
        return Err(Error::DegenerateDenominator(denom));
    }
    let r1 = (mu2 - beta) / denom;
    let r2 = (mu1 - beta) / denom;
    if !(r1 > 0.0) || !(r2 > 0.0) {
        return Err(Error::NoSynchronizedPair(r1, r2));
    }
    Ok((r1.sqrt(), r2.sqrt()))
}

/// `(α₁ω, α₂ω)`, where `ω` solves the scalar problem with `μ = 1` at the common `τ`.
pub fn synchronized_solution(p: &SystemParams, g: &Grid, omega: &Field) -> Result<Pair> {
    p.validate()?;
    g.check(omega)?;
    if !same_tau(p) {
        return Err(Error::InvalidParameter("synchronized solution needs tau1 = tau2".into()));
    }
    let (a1, a2) = synchronized_amplitudes(p.mu1, p.mu2, p.beta)?;
    Ok(Pair::new(omega * a1, omega * a2))
}

#[derive(Debug, Clone, Serialize)]
pub struct Semitrivial {
    pub first: CriticalPoint,
    pub second: CriticalPoint,
    pub c_sem: f64,
    pub grounds: (ScalarGround, ScalarGround),
}

/// `(U₁, 0)`, `(0, U₂)` and `c_sem = min{I(U₁,0), I(0,U₂)}`.
pub fn semitrivial_solutions(p: &SystemParams, g: &Grid, spectrum: &Spectrum, opts: &SolverOptions) -> Result<Semitrivial> {
    let prob = Problem::system(g, spectrum, p, opts.tol_eig)?;
    let g1 = solve_scalar_ground(p.tau1, p.mu1, g, spectrum, opts)?;
    let g2 = if p.tau1 == p.tau2 && p.mu1 == p.mu2 { g1.clone() } else { solve_scalar_ground(p.tau2, p.mu2, g, spectrum, opts)? };
    let embed = |pair: Pair| -> Result<CriticalPoint> {
        let x = pair.to_flat();
        let res = prob.residual(&x).amax() / x.amax().max(1.0);
        critical_point(&prob, x, res)
    };
    let first = embed(Pair::new(g1.u.clone(), g.zeros()))?;
    let second = embed(Pair::new(g.zeros(), g2.u.clone()))?;
    let c_sem = first.energy.min(second.energy);
    Ok(Semitrivial { first, second, c_sem, grounds: (g1, g2) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{build_grid, DomainSpec};
    use crate::spectral::eigendecompose;
    use std::f64::consts::PI;

    #[test]
    fn amplitudes_examples() {
        let (a1, a2) = synchronized_amplitudes(1.0, 2.0, 3.0).unwrap();
        assert!((a1 - (1.0f64 / 7.0).sqrt()).abs() < 1e-15 && (a2 - (2.0f64 / 7.0).sqrt()).abs() < 1e-15);
        let (b1, b2) = synchronized_amplitudes(2.0, 2.0, 0.7).unwrap();
        assert!((b1 - 1.0 / 2.7f64.sqrt()).abs() < 1e-15 && (b2 - b1).abs() < 1e-15);
        let (c1, c2) = synchronized_amplitudes(1.0, 2.0, 1e4).unwrap();
        assert!((1e2 * c1 - 1.0).abs() < 1e-2 && (1e2 * c2 - 1.0).abs() < 1e-2);
        assert!(matches!(synchronized_amplitudes(1.0, 2.0, 1.5), Err(Error::NoSynchronizedPair(..))));
        assert!(matches!(synchronized_amplitudes(1.0, 1.0, 1.0), Err(Error::DegenerateDenominator(_))));
    }

    #[test]
    fn classification_and_angle() {
        let g = build_grid(&DomainSpec::interval(PI, 30)).unwrap();
        let a = g.sample(|x, _| x.sin());
        let b = g.sample(|x, _| (2.0 * x).sin());
        assert_eq!(classify(&g, &Pair::new(a.clone(), g.zeros())), Kind::Semitrivial1);
        assert_eq!(classify(&g, &Pair::new(g.zeros(), b.clone())), Kind::Semitrivial2);
        assert_eq!(classify(&g, &Pair::new(a.clone(), &a * -0.3)), Kind::Synchronized);
        assert_eq!(classify(&g, &Pair::new(a.clone(), b.clone())), Kind::FullyNontrivial);
        assert!((component_angle(&g, &Pair::new(a, b)) - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_seed_lands_in_tilde() {
        let g = build_grid(&DomainSpec::interval(PI, 30)).unwrap();
        let s = eigendecompose(&g);
        let p = SystemParams::new(s.lambda1(), s.lambda1(), 1.0, 1.0, 1.0).unwrap();
        let prob = Problem::system(&g, &s, &p, 1e-9).unwrap();
        let r = newton_refine(&prob, &prob.zeros(), &SolverOptions::default());
        assert_eq!(r.unwrap_err(), Error::ConvergedToTilde);
    }
}
