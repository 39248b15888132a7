//! Maximisation of the energy over the generalized fiber `ℝ⁺u ⊕ H̃`.
//!
//! The fiber is parameterised by the chart `(t, c) ↦ t·u + Σ cⱼ bⱼ`, where
//! `u` is the direction normalised to `J(u,u) = 1` and `bⱼ` are the
//! `L²`-normalised eigenvectors spanning `H̃`. In this chart the quadratic part
//! of the energy is diagonal, so only `∫F` couples the coordinates and the
//! Hessian is a small dense matrix.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::functional::{Operator, Problem};

/// Chart gradient tolerance, relative to `max(1, ‖(t, c)‖∞)`.
const CHART_TOL: f64 = 1e-11;
const CHART_MAX_ITER: usize = 200;
/// Values closer than this (relative) are ties.
const TIE_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct FiberPoint {
    /// `H⁺` direction with `J(u,u) = 1`.
    pub direction: DVector<f64>,
    pub t: f64,
    /// Coefficients on the `H̃` basis (see [`Problem::tilde_modes`]).
    pub v_coeffs: Vec<f64>,
    /// `t·direction + v`.
    pub point: DVector<f64>,
    pub value: f64,
    pub converged: bool,
    /// Distinct local maxima met among the starts.
    pub candidates_found: usize,
    pub grad_norm: f64,
}

impl FiberPoint {
    pub fn chart(&self) -> Vec<f64> {
        std::iter::once(self.t).chain(self.v_coeffs.iter().copied()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeometryConstants {
    /// Radius of the small `H⁺` sphere.
    pub r: f64,
    /// Radius beyond which `I ≤ 0` on the fiber of the probed direction.
    pub rho: f64,
    /// Sampled lower bound of `I` on the small sphere.
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoercivityRadius {
    pub rho: f64,
    /// `false` when the doubling budget ran out before `I ≤ 0` on all samples.
    pub certified: bool,
}

/// `t` with `I′(tw)(tw) = 0`: `t² = J(w,w) / ∫f(w)·w`.
pub fn nehari_scale(op: &Operator, w: &DVector<f64>) -> Result<f64> {
    op.check(w)?;
    let j = op.j_form(w, w);
    let fw = op.f_pair(w, w);
    scale_from(j, fw)
}

pub(crate) fn scale_from(j: f64, fw: f64) -> Result<f64> {
    if !(j > 0.0) || !(fw > 0.0) {
        return Err(Error::NotScalable { j, fw });
    }
    Ok((j / fw).sqrt())
}

/// Fiber restricted to one direction, in chart coordinates.
struct Chart<'p, 'a> {
    prob: &'p Problem<'a>,
    basis: Vec<DVector<f64>>,
    diag: Vec<f64>,
}

impl<'p, 'a> Chart<'p, 'a> {
    fn new(prob: &'p Problem<'a>, direction: &DVector<f64>) -> Self {
        let mut basis = vec![direction.clone()];
        let mut diag = vec![prob.j_form(direction, direction)];
        for m in prob.tilde_modes() {
            basis.push(prob.tilde_vector(m));
            diag.push(m.shift);
        }
        Self { prob, basis, diag }
    }

    fn dim(&self) -> usize {
        self.basis.len()
    }

    fn point(&self, x: &[f64]) -> DVector<f64> {
        let mut w = self.prob.zeros();
        for (b, &c) in self.basis.iter().zip(x) {
            w.axpy(c, b, 1.0);
        }
        w
    }

    fn value(&self, x: &[f64]) -> f64 {
        let quad: f64 = self.diag.iter().zip(x).map(|(d, c)| d * c * c).sum();
        0.5 * quad - self.prob.big_f(&self.point(x))
    }

    fn grad(&self, x: &[f64]) -> DVector<f64> {
        let w = self.point(x);
        let f = self.prob.f(&w);
        let qw = self.prob.grid.quad_weight;
        DVector::from_fn(self.dim(), |i, _| self.diag[i] * x[i] - qw * f.dot(&self.basis[i]))
    }

    fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        let w = self.point(x);
        let k = self.dim();
        let mut h = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in i..k {
                let s = self.prob.second(&w, &self.basis[i], &self.basis[j]);
                let v = if i == j { self.diag[i] - s } else { -s };
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        h
    }
}

struct LocalMax {
    x: Vec<f64>,
    value: f64,
    grad_norm: f64,
    is_max: bool,
}

/// Modified Newton ascent: eigenvalues of the chart Hessian are replaced by
/// `−max(|λ|, δ)`, followed by an Armijo backtracking that keeps `t > 0`.
fn ascend(chart: &Chart, mut x: Vec<f64>) -> Option<LocalMax> {
    let mut val = chart.value(&x);
    for _ in 0..CHART_MAX_ITER {
        let g = chart.grad(&x);
        let scale = x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let h = chart.hessian(&x);
        let eig = SymmetricEigen::new(h);
        let lam_max = eig.eigenvalues.max();
        if g.amax() <= CHART_TOL * scale {
            let curv = eig.eigenvalues.amax().max(1.0);
            return Some(LocalMax { grad_norm: g.amax(), x, value: val, is_max: lam_max <= 1e-9 * curv });
        }
        let delta = 1e-10 * eig.eigenvalues.amax().max(1.0);
        let mut p = DVector::zeros(chart.dim());
        for (i, lam) in eig.eigenvalues.iter().enumerate() {
            let v = eig.eigenvectors.column(i);
            p.axpy(v.dot(&g) / lam.abs().max(delta), &v, 1.0);
        }
        let slope = g.dot(&p);
        let mut alpha = 1.0;
        let mut accepted = false;
        while alpha > 1e-14 {
            let trial: Vec<f64> = x.iter().zip(p.iter()).map(|(a, b)| a + alpha * b).collect();
            if trial[0] > 0.0 {
                let tv = chart.value(&trial);
                if tv >= val + 1e-4 * alpha * slope {
                    x = trial;
                    val = tv;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            // stalled at roundoff level; accept if the gradient is small enough
            let g = chart.grad(&x);
            let ok = g.amax() <= 1e3 * CHART_TOL * scale;
            let curv = eig.eigenvalues.amax().max(1.0);
            return ok.then(|| LocalMax { grad_norm: g.amax(), x, value: val, is_max: lam_max <= 1e-9 * curv });
        }
    }
    None
}

fn normalized_plus(prob: &Problem, u: &DVector<f64>) -> Result<DVector<f64>> {
    prob.check(u)?;
    let plus = prob.project_plus(u);
    let j = prob.j_form(&plus, &plus);
    let scale = prob.norm_h1(u).max(f64::MIN_POSITIVE);
    if !(j > 0.0) || prob.norm_h1(&plus) <= 1e-12 * scale {
        return Err(Error::InNonpositiveSubspace);
    }
    Ok(plus / j.sqrt())
}

/// Empirical radius beyond which `I ≤ 0` on the fiber of `u`.
///
/// Starts at `0.3·R₀`, where `R₀` is the root of the one-dimensional fiber
/// polynomial along `u`, and doubles until every sample on the sphere of
/// radius `R` (product `H¹₀` norm) has nonpositive energy.
pub fn coercivity_radius(prob: &Problem, u: &DVector<f64>, samples: usize, rng: &mut ChaCha8Rng) -> Result<CoercivityRadius> {
    let dir = normalized_plus(prob, u)?;
    let dir = &dir / prob.norm_h1(&dir);
    let tilde: Vec<(DVector<f64>, f64)> = prob
        .tilde_modes()
        .iter()
        .map(|m| (prob.tilde_vector(m), prob.spectrum.eigenvalues[m.mode].sqrt()))
        .collect();
    let j = prob.j_form(&dir, &dir);
    let f = prob.big_f(&dir);
    let r_pure = (j / (2.0 * f)).sqrt();

    let mut dirs = vec![dir.clone()];
    for _ in 0..samples {
        let mut z: Vec<f64> = (0..=tilde.len()).map(|_| gaussian(rng)).collect();
        z[0] = z[0].abs();
        let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut w = &dir * (z[0] / norm);
        for ((b, sq), zc) in tilde.iter().zip(&z[1..]) {
            w.axpy(zc / norm / sq, b, 1.0);
        }
        dirs.push(w);
    }
    let mut r = 0.3 * r_pure;
    for _ in 0..60 {
        if dirs.iter().all(|d| prob.energy(&(d * r)) <= 0.0) {
            return Ok(CoercivityRadius { rho: r, certified: true });
        }
        r *= 2.0;
    }
    Ok(CoercivityRadius { rho: r / 2.0, certified: false })
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box–Muller
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Global maximum (over the starts tried) of `I` on `ℝ⁺u ⊕ H̃`.
///
/// `warm` is an optional chart start `(t, c…)` for the already normalised
/// direction. With `H̃ = {0}` the maximum is the closed-form Nehari scaling.
pub fn fiber_maximize(
    prob: &Problem,
    u_plus: &DVector<f64>,
    warm: Option<&[f64]>,
    restarts: usize,
    rng: &mut ChaCha8Rng,
) -> Result<FiberPoint> {
    let dir = normalized_plus(prob, u_plus)?;
    let fu = prob.f_pair(&dir, &dir);
    let t_est = scale_from(1.0, fu)?;

    if prob.tilde_modes().is_empty() {
        let point = &dir * t_est;
        let value = prob.energy(&point);
        return Ok(FiberPoint {
            direction: dir,
            t: t_est,
            v_coeffs: Vec::new(),
            point,
            value,
            converged: true,
            candidates_found: 1,
            grad_norm: 0.0,
        });
    }

    let chart = Chart::new(prob, &dir);
    let m = chart.dim() - 1;
    let mut starts: Vec<Vec<f64>> = Vec::new();
    if let Some(w) = warm {
        if w.len() == m + 1 && w[0] > 0.0 {
            starts.push(w.to_vec());
        }
    }
    let mut x0 = vec![0.0; m + 1];
    x0[0] = t_est;
    starts.push(x0);
    if restarts > 0 {
        let rho = coercivity_radius(prob, &dir, 8, rng)?.rho;
        let ranges: Vec<f64> =
            prob.tilde_modes().iter().map(|md| rho / prob.spectrum.eigenvalues[md.mode].sqrt()).collect();
        for k in 0..restarts {
            let mut x = vec![[0.5, 1.0, 2.0][k % 3] * t_est];
            x.extend(ranges.iter().map(|r| rng.gen_range(-r..=*r)));
            starts.push(x);
        }
    }

    let mut maxima: Vec<LocalMax> = Vec::new();
    for s in starts {
        if let Some(lm) = ascend(&chart, s) {
            if !lm.is_max {
                continue;
            }
            let scale = lm.x.iter().fold(1.0f64, |a, v| a.max(v.abs()));
            let dup = maxima
                .iter()
                .any(|o| o.x.iter().zip(&lm.x).all(|(a, b)| (a - b).abs() <= 1e-6 * scale));
            if !dup {
                maxima.push(lm);
            }
        }
    }
    let candidates_found = maxima.len();
    let best = maxima
        .into_iter()
        .reduce(|a, b| if better(&b, &a) { b } else { a })
        .ok_or(Error::NoConvergence { iterations: CHART_MAX_ITER, residual: f64::NAN })?;

    let point = chart.point(&best.x);
    Ok(FiberPoint {
        direction: dir,
        t: best.x[0],
        v_coeffs: best.x[1..].to_vec(),
        point,
        value: best.value,
        converged: true,
        candidates_found,
        grad_norm: best.grad_norm,
    })
}

/// Higher value wins; ties go to the smaller `‖v‖`, then the smaller `t`.
fn better(a: &LocalMax, b: &LocalMax) -> bool {
    let tie = TIE_TOL * a.value.abs().max(b.value.abs()).max(1.0);
    if (a.value - b.value).abs() > tie {
        return a.value > b.value;
    }
    let va: f64 = a.x[1..].iter().map(|c| c * c).sum();
    let vb: f64 = b.x[1..].iter().map(|c| c * c).sum();
    if (va - vb).abs() > 1e-12 * va.max(vb).max(1.0) {
        return va < vb;
    }
    a.x[0] < b.x[0]
}

/// Sampled constants of the linking geometry around direction `u`.
pub fn geometry_constants(prob: &Problem, u: &DVector<f64>, samples: usize, rng: &mut ChaCha8Rng) -> Result<GeometryConstants> {
    let dir = normalized_plus(prob, u)?;
    let mut dirs = vec![&dir / prob.norm_h1(&dir)];
    let plus: Vec<(usize, usize)> = prob
        .splits
        .iter()
        .enumerate()
        .flat_map(|(c, sp)| sp.plus_idx.iter().take(12).map(move |&k| (c, k)))
        .collect();
    for _ in 0..samples {
        let mut z = prob.zeros();
        let n = prob.nodes();
        for &(c, k) in &plus {
            let coef = gaussian(rng) / (1.0 + k as f64);
            z.rows_mut(c * n, n).axpy(coef, &prob.spectrum.vectors.column(k), 1.0);
        }
        let h = prob.norm_h1(&z);
        if h > 0.0 {
            dirs.push(z / h);
        }
    }
    let r2 = dirs
        .iter()
        .map(|d| prob.j_form(d, d) / (4.0 * prob.big_f(d)))
        .fold(f64::INFINITY, f64::min);
    let r = r2.sqrt();
    let alpha = dirs.iter().map(|d| prob.energy(&(d * r))).fold(f64::INFINITY, f64::min);
    let rho = coercivity_radius(prob, u, samples, rng)?.rho;
    Ok(GeometryConstants { r, rho, alpha })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NehariVerdict {
    pub member: bool,
    /// `|I′(w)w| / max(1, ∫f(w)·w)`.
    pub nehari_residual: f64,
    /// `max |I′(w)bⱼ| / max(1, ‖w‖∞)` over the `H̃` basis.
    pub tilde_residual: f64,
}

fn check_outside_tilde(prob: &Problem, w: &DVector<f64>, tol: f64) -> Result<()> {
    prob.check(w)?;
    let plus = prob.project_plus(w);
    if prob.norm_h1(&plus) <= tol * prob.norm_h1(w).max(f64::MIN_POSITIVE) {
        return Err(Error::InNonpositiveSubspace);
    }
    Ok(())
}

/// First-order Nehari–Pankov conditions `I′(w)w = 0`, `I′(w)|_H̃ = 0`.
pub fn in_nehari(prob: &Problem, w: &DVector<f64>, tol: f64) -> Result<NehariVerdict> {
    check_outside_tilde(prob, w, tol)?;
    let r = prob.residual(w);
    let qw = prob.grid.quad_weight;
    let nehari_residual = (qw * r.dot(w)).abs() / prob.f_pair(w, w).max(1.0);
    let tilde_residual = prob
        .tilde_coefficients(&r)
        .iter()
        .fold(0.0f64, |m, c| m.max(c.abs()))
        / w.amax().max(1.0);
    Ok(NehariVerdict { member: nehari_residual <= tol && tilde_residual <= tol, nehari_residual, tilde_residual })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiberMaxVerdict {
    pub member: bool,
    /// `sup` over the fiber minus `I(w)`, as found.
    pub value_gap: f64,
    pub distance: f64,
}

/// Whether `w` is the maximiser of `I` on its own fiber `ℝ⁺w ⊕ H̃`.
pub fn in_nehari_prime(
    prob: &Problem,
    w: &DVector<f64>,
    tol: f64,
    restarts: usize,
    rng: &mut ChaCha8Rng,
) -> Result<FiberMaxVerdict> {
    check_outside_tilde(prob, w, tol)?;
    let plus = prob.project_plus(w);
    let j = prob.j_form(&plus, &plus).sqrt();
    let mut warm = vec![j];
    warm.extend(prob.tilde_coefficients(w));
    let fp = fiber_maximize(prob, &plus, Some(&warm), restarts, rng)?;
    let distance = (&fp.point - w).amax() / w.amax().max(1.0);
    let value_gap = fp.value - prob.energy(w);
    let member = distance <= tol && value_gap <= tol * fp.value.abs().max(1.0);
    Ok(FiberMaxVerdict { member, value_gap, distance })
}
