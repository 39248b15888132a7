//! Damped Newton on the strong-form residual with a Levenberg fallback.

use nalgebra::{DMatrix, DVector};

use crate::functional::Operator;

pub(crate) struct NewtonOutcome {
    pub x: DVector<f64>,
    /// `‖residual‖∞ / max(1, ‖x‖∞)`.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

const LM_START: f64 = 1e-6;

/// Iteration budget for refining a descent endpoint or a seed.
pub(crate) const NEWTON_ITER: usize = 60;

pub(crate) fn damped_newton(op: &Operator, x0: DVector<f64>, tol: f64, max_iter: usize) -> NewtonOutcome {
    let mut x = x0;
    let mut r = op.residual(&x);
    let mut lm = LM_START;
    for it in 0..max_iter {
        let rel = r.amax() / x.amax().max(1.0);
        if rel <= tol {
            return NewtonOutcome { x, residual: rel, iterations: it, converged: true };
        }
        let jac = op.jacobian(&x);
        let rnorm = r.norm();

        let mut next = None;
        if let Some(step) = jac.clone().lu().solve(&(-&r)) {
            if step.iter().all(|v| v.is_finite()) {
                let mut alpha = 1.0;
                while alpha >= 1.0 / 64.0 {
                    let trial = &x + &step * alpha;
                    let rt = op.residual(&trial);
                    if rt.norm() < (1.0 - 1e-4 * alpha) * rnorm {
                        next = Some((trial, rt));
                        break;
                    }
                    alpha *= 0.5;
                }
            }
        }
        if next.is_none() {
            next = levenberg_step(op, &jac, &x, &r, &mut lm);
        } else {
            lm = (lm * 0.1).max(LM_START);
        }
        match next {
            Some((xn, rn)) => {
                x = xn;
                r = rn;
            }
            None => {
                let rel = r.amax() / x.amax().max(1.0);
                return NewtonOutcome { x, residual: rel, iterations: it, converged: rel <= tol };
            }
        }
    }
    let rel = r.amax() / x.amax().max(1.0);
    NewtonOutcome { x, residual: rel, iterations: max_iter, converged: rel <= tol }
}

/// `(JᵀJ + λ·s·I) p = −Jᵀr`, raising `λ` tenfold until the residual drops.
fn levenberg_step(
    op: &Operator,
    jac: &DMatrix<f64>,
    x: &DVector<f64>,
    r: &DVector<f64>,
    lm: &mut f64,
) -> Option<(DVector<f64>, DVector<f64>)> {
    let jtj = jac.tr_mul(jac);
    let scale = jtj.diagonal().amax().max(f64::MIN_POSITIVE);
    let rhs = -jac.tr_mul(r);
    let rnorm = r.norm();
    for _ in 0..14 {
        let mut m = jtj.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += *lm * scale;
        }
        if let Some(chol) = m.cholesky() {
            let step = chol.solve(&rhs);
            let trial = x + step;
            let rt = op.residual(&trial);
            if rt.norm() < rnorm {
                *lm = (*lm * 0.1).max(LM_START);
                return Some((trial, rt));
            }
        }
        *lm *= 10.0;
    }
    None
}
