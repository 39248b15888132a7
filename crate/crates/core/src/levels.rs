//! The auxiliary function `h`, its infimum, and the assembled energy report
//! comparing `e`, `c′`, `c_sem`, `S` and `S′` with theorem verdicts.

use serde::Serialize;

use crate::discretization::{Field, Grid};
use crate::error::{Error, Result};
use crate::functional::{hessian_quadform, Pair, Problem, SystemParams};
use crate::options::SolverOptions;
use crate::scalar::{solve_scalar_ground, ScalarGround};
use crate::spectral::Spectrum;
use crate::system::{
    component_angle, find_critical_set_with, same_tau, semitrivial_solutions, synchronized_amplitudes,
    synchronized_solution, CriticalPoint, Diagnostics,
};
use crate::thresholds::{classify_regime, is_resonant, thresholds_from_grounds, RegimeReport, Thresholds};

/// Relative tolerance of the equality claims.
pub const EQUALITY_TOL: f64 = 1e-3;
/// Relative margin a strict inequality needs to pass.
pub const STRICT_MARGIN: f64 = 1e-3;
/// Absolute slack of `e ≤ c′`.
pub const ORDER_SLACK: f64 = 1e-8;
/// Largest component angle (radians) accepted as proportional.
pub const ANGLE_TOL: f64 = 1e-3;

/// `(t₁² + t₂²) / √(μ₁t₁⁴ + μ₂t₂⁴ + 2βt₁²t₂²)`.
pub fn h_aux(mu1: f64, mu2: f64, beta: f64, t1: f64, t2: f64) -> Result<f64> {
    if t1 == 0.0 && t2 == 0.0 {
        return Err(Error::ZeroField);
    }
    let (a, b) = (t1 * t1, t2 * t2);
    let rad = mu1 * a * a + mu2 * b * b + 2.0 * beta * a * b;
    if !(rad > 0.0) {
        return Err(Error::InvalidParameter(format!("nonpositive radicand {rad}")));
    }
    Ok((a + b) / rad.sqrt())
}

/// `inf h` and the maximiser `x = s₁²` of
/// `g(x) = (μ₁+μ₂−2β)x² + 2(β−μ₂)x + μ₂` on `[0, 1]`, with `inf h = 1/√max g`.
pub fn h_inf(mu1: f64, mu2: f64, beta: f64) -> (f64, f64) {
    let a = mu1 + mu2 - 2.0 * beta;
    let b = 2.0 * (beta - mu2);
    let g = |x: f64| (a * x + b) * x + mu2;
    let mut best = (g(0.0), 0.0);
    if g(1.0) > best.0 {
        best = (g(1.0), 1.0);
    }
    if a < 0.0 {
        let x = -b / (2.0 * a);
        if x > 0.0 && x < 1.0 && g(x) > best.0 {
            best = (g(x), x);
        }
    }
    (1.0 / best.0.sqrt(), best.1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
    NotApplicable,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
            Verdict::NotApplicable => "not_applicable",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictRecord {
    pub verdict: Verdict,
    pub margin: Option<f64>,
    pub detail: String,
}

impl VerdictRecord {
    fn not_applicable(detail: &str) -> Self {
        Self { verdict: Verdict::NotApplicable, margin: None, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdicts {
    /// `β > Λ ⇒ e ≤ c′ < c_sem`.
    pub t11: VerdictRecord,
    /// Resonant, `β < 3√(μ₁μ₂)` ⇒ `e = c′`, `S′ = inf h · S`, proportional minimiser.
    pub t12: VerdictRecord,
    /// Resonant, `β` past the synchronized instability ⇒ `e < c′`.
    pub t13: VerdictRecord,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyReport {
    pub params: SystemParams,
    pub lambda1: f64,
    pub e_est: Option<f64>,
    pub c_prime_est: Option<f64>,
    pub c_sem: Option<f64>,
    /// Scalar quotient of the ground state at the common `τ` (resonant case only).
    #[serde(rename = "S")]
    pub s: Option<f64>,
    #[serde(rename = "S_prime_est")]
    pub s_prime_est: Option<f64>,
    pub h_inf: f64,
    /// Maximiser `s₁²` of the quadratic behind `h_inf`.
    pub h_inf_argmax: f64,
    #[serde(rename = "h_inf_times_S")]
    pub h_inf_times_s: Option<f64>,
    /// `c_l` lies between `e_est` and `c_prime_est`.
    pub c_l_bracket: Option<(f64, f64)>,
    /// Upper bound `min{e_est, c_prime_est}` for the Nehari–Pankov level `c`.
    pub c_upper: Option<f64>,
    /// Component angle of the reduced minimiser (Newton-refined when that
    /// kept its energy), radians.
    pub minimizer_angle: Option<f64>,
    /// `S′ ≥ inf h · S − 10⁻³·S` (resonant case only).
    pub s_prime_bound_holds: Option<bool>,
    /// `⟨I″(w)z, z⟩` at the synchronized point `w` with `z = (φ₁, −φ₁)`.
    pub sync_hessian: Option<f64>,
    pub thresholds: Option<Thresholds>,
    pub regime: Option<RegimeReport>,
    pub critical_points: Vec<CriticalPoint>,
    pub diagnostics: Option<Diagnostics>,
    pub verdicts: Verdicts,
    /// Stages that failed, as `stage: error`.
    pub failures: Vec<String>,
}

impl EnergyReport {
    pub fn is_partial(&self) -> bool {
        !self.failures.is_empty()
    }
}

/// `⟨I″(α₁ω, α₂ω) z, z⟩` with `z = (φ₁, −φ₁)`.
pub fn sync_hessian_form(p: &SystemParams, g: &Grid, omega: &Field, phi1: &Field) -> Result<f64> {
    let w = synchronized_solution(p, g, omega)?;
    let z = Pair::new(phi1.clone(), -phi1);
    hessian_quadform(p, g, &w, &z)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignChange {
    pub lo: f64,
    pub hi: f64,
    /// Sign changes seen on the scan grid.
    pub changes: usize,
}

/// Brackets the `β` where [`sync_hessian_form`] turns from negative to
/// positive: scans `betas` (increasing), then bisects the first bracket to
/// `width`.
pub fn locate_hessian_sign_change(
    base: &SystemParams,
    g: &Grid,
    omega: &Field,
    phi1: &Field,
    betas: &[f64],
    width: f64,
) -> Result<SignChange> {
    let form = |b: f64| sync_hessian_form(&base.with_beta(b), g, omega, phi1);
    let values = betas.iter().map(|&b| form(b)).collect::<Result<Vec<_>>>()?;
    let changes = values.windows(2).filter(|w| (w[0] < 0.0) != (w[1] < 0.0)).count();
    let k = values
        .windows(2)
        .position(|w| w[0] < 0.0 && w[1] >= 0.0)
        .ok_or_else(|| Error::InvalidParameter("no sign change on the scan".into()))?;
    let (mut lo, mut hi) = (betas[k], betas[k + 1]);
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        if form(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(SignChange { lo, hi, changes })
}

fn record<T>(failures: &mut Vec<String>, stage: &str, r: Result<T>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            failures.push(format!("{stage}: {e}"));
            None
        }
    }
}

/// Runs every stage and collects the levels; failed stages leave their fields
/// empty and are listed in `failures`. Only invalid parameters are an error.
pub fn assemble_report(p: &SystemParams, g: &Grid, spectrum: &Spectrum, opts: &SolverOptions) -> Result<EnergyReport> {
    p.validate()?;
    let prob = Problem::system(g, spectrum, p, opts.tol_eig)?;
    let lambda1 = spectrum.lambda1();
    let resonant = is_resonant(p, lambda1, opts.tol_eig);
    let mut failures = Vec::new();

    let (sem, omega) = rayon::join(
        || semitrivial_solutions(p, g, spectrum, opts),
        || -> Option<Result<ScalarGround>> { same_tau(p).then(|| solve_scalar_ground(p.tau1, 1.0, g, spectrum, opts)) },
    );
    let sem = record(&mut failures, "semitrivial", sem);
    let omega = omega.and_then(|r| record(&mut failures, "synchronized profile", r));

    let thresholds = sem
        .as_ref()
        .and_then(|s| record(&mut failures, "thresholds", thresholds_from_grounds(p, g, spectrum, &s.grounds.0, &s.grounds.1, opts.tol_eig)));
    let regime = thresholds.as_ref().and_then(|t| record(&mut failures, "regime", classify_regime(p, t, lambda1, opts.tol_eig)));

    let sync = match (&omega, synchronized_amplitudes(p.mu1, p.mu2, p.beta)) {
        (Some(w), Ok(_)) => synchronized_solution(p, g, &w.u).ok(),
        _ => None,
    };
    let mut hints = Vec::new();
    if let Some(s) = &sem {
        hints.push(s.first.point.to_flat());
        hints.push(s.second.point.to_flat());
    }
    if let Some(s) = &sync {
        hints.push(s.to_flat());
    }
    let cand = record(&mut failures, "critical set", find_critical_set_with(&prob, opts, &hints));

    let e_est = cand.as_ref().map(|c| c.e_est);
    let c_prime_est = cand.as_ref().map(|c| c.c_prime_est);
    let c_sem = sem.as_ref().map(|s| s.c_sem);
    let s = if resonant { omega.as_ref().map(|w| w.quotient) } else { None };
    let s_prime_est = c_prime_est.map(|c| (4.0 * c).sqrt());
    let (h_inf, h_inf_argmax) = h_inf(p.mu1, p.mu2, p.beta);
    let h_inf_times_s = s.map(|s| h_inf * s);
    let minimizer_angle = cand.as_ref().map(|c| match &c.minimizer_refined {
        Some(r) if (r.energy - c.c_prime_est).abs() <= 1e-6 * c.c_prime_est.abs() => component_angle(g, &r.point),
        _ => component_angle(g, &Pair::from_flat(&c.minimizer.point)),
    });
    let s_prime_bound_holds = match (s_prime_est, h_inf_times_s, s) {
        (Some(sp), Some(hs), Some(s)) => Some(sp >= hs - STRICT_MARGIN * s),
        _ => None,
    };
    let phi1 = spectrum.phi1();
    let sync_hessian = match (&omega, &sync) {
        (Some(w), Some(_)) if resonant => sync_hessian_form(p, g, &w.u, &phi1).ok(),
        _ => None,
    };

    let t11 = verdict_t11(p, thresholds.as_ref(), e_est, c_prime_est, c_sem);
    let t12 = verdict_t12(p, resonant, e_est, c_prime_est, s_prime_est, h_inf_times_s, minimizer_angle);
    let t13 = verdict_t13(resonant, sync_hessian, e_est, c_prime_est);

    Ok(EnergyReport {
        params: *p,
        lambda1,
        e_est,
        c_prime_est,
        c_sem,
        s,
        s_prime_est,
        h_inf,
        h_inf_argmax,
        h_inf_times_s,
        c_l_bracket: e_est.zip(c_prime_est),
        c_upper: e_est.zip(c_prime_est).map(|(e, c)| e.min(c)),
        minimizer_angle,
        s_prime_bound_holds,
        sync_hessian,
        thresholds,
        regime,
        critical_points: cand.as_ref().map(|c| c.all_found.clone()).unwrap_or_default(),
        diagnostics: cand.map(|c| c.diagnostics),
        verdicts: Verdicts { t11, t12, t13 },
        failures,
    })
}

fn missing() -> VerdictRecord {
    VerdictRecord { verdict: Verdict::Inconclusive, margin: None, detail: "levels unavailable".into() }
}

fn verdict_t11(p: &SystemParams, t: Option<&Thresholds>, e: Option<f64>, c: Option<f64>, c_sem: Option<f64>) -> VerdictRecord {
    let Some(t) = t else { return missing() };
    if !(p.beta > t.lambda_cap) {
        return VerdictRecord::not_applicable("beta <= Lambda");
    }
    let (Some(e), Some(c), Some(cs)) = (e, c, c_sem) else { return missing() };
    let margin = cs - c;
    let ordered = e <= c + ORDER_SLACK;
    let verdict = if !ordered || margin <= 0.0 {
        Verdict::Fail
    } else if margin > STRICT_MARGIN * cs {
        Verdict::Pass
    } else {
        Verdict::Inconclusive
    };
    VerdictRecord { verdict, margin: Some(margin), detail: format!("e - c' = {:.3e}, c_sem - c' = {margin:.3e}", e - c) }
}

fn verdict_t12(
    p: &SystemParams,
    resonant: bool,
    e: Option<f64>,
    c: Option<f64>,
    s_prime: Option<f64>,
    hs: Option<f64>,
    angle: Option<f64>,
) -> VerdictRecord {
    if !resonant || !(p.beta < 3.0 * (p.mu1 * p.mu2).sqrt()) {
        return VerdictRecord::not_applicable("not resonant or beta >= 3 sqrt(mu1 mu2)");
    }
    let (Some(e), Some(c), Some(sp), Some(hs), Some(angle)) = (e, c, s_prime, hs, angle) else { return missing() };
    let gap = (e - c).abs() / c;
    let s_gap = (sp - hs).abs() / hs;
    let worst = gap.max(s_gap);
    let ok = gap <= EQUALITY_TOL && s_gap <= EQUALITY_TOL && angle <= ANGLE_TOL;
    VerdictRecord {
        verdict: if ok { Verdict::Pass } else { Verdict::Fail },
        margin: Some(worst),
        detail: format!(
            "|e-c'|/c' = {gap:.3e}, |S'-hS|/hS = {s_gap:.3e}, angle = {angle:.3e}; c_l {}",
            if gap <= EQUALITY_TOL { "consistent with bracket" } else { "not pinned by bracket" }
        ),
    }
}

fn verdict_t13(resonant: bool, sync_hessian: Option<f64>, e: Option<f64>, c: Option<f64>) -> VerdictRecord {
    if !resonant {
        return VerdictRecord::not_applicable("not resonant");
    }
    match sync_hessian {
        Some(h) if h > 0.0 => {}
        _ => return VerdictRecord::not_applicable("synchronized point absent or not past its instability"),
    }
    let (Some(e), Some(c)) = (e, c) else { return missing() };
    let margin = c - e;
    let verdict = if margin > STRICT_MARGIN * c {
        Verdict::Pass
    } else if margin > 0.0 {
        Verdict::Inconclusive
    } else {
        Verdict::Fail
    };
    VerdictRecord { verdict, margin: Some(margin), detail: format!("c' - e = {margin:.3e}") }
}
