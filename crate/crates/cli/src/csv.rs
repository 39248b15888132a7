//! Fixed-schema CSV rows for reports.

use nlss_core::levels::EnergyReport;
use nlss_core::SystemParams;

pub const HEADER: &str = "param,beta,mu1,mu2,tau1,tau2,e_est,c_prime,c_sem,beta_hat1,beta_hat2,S,S_prime,h_inf,regime,verdict_t11,verdict_t12,verdict_t13";

/// 17 significant digits, round-trip safe.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// One row. `param` is the swept value, empty for a single solve.
pub fn report_row(param: Option<f64>, r: &EnergyReport) -> String {
    let p = &r.params;
    let th = r.thresholds.as_ref();
    let cells = [
        opt(param),
        num(p.beta),
        num(p.mu1),
        num(p.mu2),
        num(p.tau1),
        num(p.tau2),
        opt(r.e_est),
        opt(r.c_prime_est),
        opt(r.c_sem),
        opt(th.map(|t| t.beta_hat_1)),
        opt(th.map(|t| t.beta_hat_2)),
        opt(r.s),
        opt(r.s_prime_est),
        num(r.h_inf),
        r.regime.as_ref().map(|g| g.label()).unwrap_or_default(),
        r.verdicts.t11.verdict.to_string(),
        r.verdicts.t12.verdict.to_string(),
        r.verdicts.t13.verdict.to_string(),
    ];
    cells.join(",")
}

/// Row for a point whose solve failed outright: computed cells are NaN.
pub fn failed_row(param: f64, p: &SystemParams) -> String {
    let nan = num(f64::NAN);
    let mut cells = vec![num(param), num(p.beta), num(p.mu1), num(p.mu2), num(p.tau1), num(p.tau2)];
    cells.extend(std::iter::repeat_n(nan, 8));
    cells.extend(std::iter::repeat_n(String::new(), 4));
    cells.join(",")
}
