//! Minimisation of the reduced functional `ψ(u) = max_{ℝ⁺u ⊕ H̃} I` over the
//! `J`-unit sphere of `H⁺`.
//!
//! Riemannian gradient descent with Barzilai–Borwein trial steps, Armijo
//! backtracking and retraction by normalisation.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::fiber::{fiber_maximize, FiberPoint};
use crate::functional::Problem;
use crate::options::SolverOptions;

pub(crate) struct DescentOutcome {
    pub fiber: FiberPoint,
    pub iterations: usize,
    pub converged: bool,
}

/// `J`-Riesz representative of `dψ(u)` projected on the tangent space.
fn sphere_gradient(prob: &Problem, fp: &FiberPoint) -> DVector<f64> {
    let u = &fp.direction;
    let f = prob.f(&fp.point);
    let g = (u * fp.t - prob.a_plus_inverse(&f)) * fp.t;
    let radial = prob.j_form(&g, u);
    g - u * radial
}

/// Lowest `H⁺` modes used to build starting directions.
const SEED_MODES: usize = 6;

/// Starting directions: the lowest plus mode in every component, then random
/// combinations of the low plus modes with `1/(j+1)` decay.
pub(crate) fn seed_directions(prob: &Problem, count: usize, rng: &mut ChaCha8Rng) -> Vec<DVector<f64>> {
    let n = prob.nodes();
    let s = prob.spectrum;
    let mut out = Vec::with_capacity(count);
    let mut first = prob.zeros();
    for (c, sp) in prob.splits.iter().enumerate() {
        if let Some(&k) = sp.plus_idx.first() {
            first.rows_mut(c * n, n).copy_from(&s.vectors.column(k));
        }
    }
    out.push(first);
    while out.len() < count {
        let mut x = prob.zeros();
        for (c, sp) in prob.splits.iter().enumerate() {
            for (j, &k) in sp.plus_idx.iter().take(SEED_MODES).enumerate() {
                let a: f64 = rng.gen_range(-1.0..1.0);
                x.rows_mut(c * n, n).axpy(a / (j + 1) as f64, &s.vectors.column(k), 1.0);
            }
        }
        out.push(x);
    }
    out
}

/// Independent stream for restart `k`, so results do not depend on scheduling.
pub(crate) fn restart_rng(seed: u64, k: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (k as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// One sphere descent per starting direction, run in parallel, in seed order.
pub(crate) fn multi_descent(prob: &Problem, opts: &SolverOptions) -> Vec<Result<DescentOutcome>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let seeds = seed_directions(prob, opts.restarts.max(1), &mut rng);
    seeds
        .par_iter()
        .enumerate()
        .map(|(k, s)| sphere_descent(prob, s, opts, &mut restart_rng(opts.seed, k)))
        .collect()
}

fn retract(prob: &Problem, u: &DVector<f64>) -> DVector<f64> {
    let plus = prob.project_plus(u);
    let j = prob.j_form(&plus, &plus);
    plus / j.sqrt()
}

pub(crate) fn sphere_descent(
    prob: &Problem,
    u0: &DVector<f64>,
    opts: &SolverOptions,
    rng: &mut ChaCha8Rng,
) -> Result<DescentOutcome> {
    let trial_restarts = opts.fiber_restarts.min(2);
    let mut fp = fiber_maximize(prob, u0, None, opts.fiber_restarts, rng)?;
    let mut iterations = 0;
    let mut rechecks = 0;
    let mut alpha: Option<f64> = None;
    let mut prev: Option<(DVector<f64>, DVector<f64>)> = None;

    loop {
        let g = sphere_gradient(prob, &fp);
        let gn2 = prob.j_form(&g, &g).max(0.0);
        let rel = gn2.sqrt() / fp.value.abs().max(f64::MIN_POSITIVE);
        let stalled = iterations >= opts.max_iter;
        if rel <= opts.tol_sphere || stalled {
            // confirm the fiber maximiser with the full restart budget
            if !stalled && rechecks < 3 && opts.fiber_restarts > trial_restarts {
                rechecks += 1;
                let full = fiber_maximize(prob, &fp.direction, Some(&fp.chart()), opts.fiber_restarts, rng)?;
                if full.value > fp.value * (1.0 + 1e-10) {
                    fp = full;
                    prev = None;
                    continue;
                }
            }
            return Ok(DescentOutcome { fiber: fp, iterations, converged: rel <= opts.tol_sphere });
        }

        let u = fp.direction.clone();
        let mut step = match (&prev, alpha) {
            (Some((pu, pg)), _) => {
                let s = &u - pu;
                let y = &g - pg;
                let sy = prob.j_form(&s, &y);
                if sy > 0.0 {
                    prob.j_form(&s, &s) / sy
                } else {
                    alpha.unwrap_or(0.1 / gn2.sqrt()) * 2.0
                }
            }
            (None, Some(a)) => a,
            (None, None) => 0.1 / gn2.sqrt(),
        };
        // cap the move at half the sphere radius
        step = step.min(0.5 / gn2.sqrt());

        let warm = fp.chart();
        let mut accepted = None;
        for _ in 0..60 {
            let cand = retract(prob, &(&u - &g * step));
            if let Ok(tf) = fiber_maximize(prob, &cand, Some(&warm), trial_restarts, rng) {
                if tf.value <= fp.value - 1e-4 * step * gn2 {
                    accepted = Some(tf);
                    break;
                }
            }
            step *= 0.5;
        }
        iterations += 1;
        match accepted {
            Some(tf) => {
                prev = Some((u, g));
                alpha = Some(step);
                fp = tf;
            }
            None => {
                // no decrease possible at roundoff level
                return Ok(DescentOutcome { fiber: fp, iterations, converged: rel <= 1e2 * opts.tol_sphere });
            }
        }
    }
}
