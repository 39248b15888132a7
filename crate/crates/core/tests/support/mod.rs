//! Independent reference computations shared by the integration tests.
//!
//! Nothing here calls the solvers under test. Discrete operators are
//! rebuilt from the stencil directly.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

/// Solves a tridiagonal system with sub-diagonal `a`, diagonal `b` and super-diagonal `c`.
pub fn thomas(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    cp[0] = c[0] / b[0];
    dp[0] = d[0] / b[0];
    for i in 1..n {
        let m = b[i] - a[i] * cp[i - 1];
        cp[i] = if i + 1 < n { c[i] / m } else { 0.0 };
        dp[i] = (d[i] - a[i] * dp[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = dp[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = dp[i] - cp[i] * x[i + 1];
    }
    x
}

/// 1D Dirichlet stencil `(−u[i−1] + 2u[i] − u[i+1])/h²`.
pub fn neg_laplacian_1d(u: &[f64], h: f64) -> Vec<f64> {
    let n = u.len();
    (0..n)
        .map(|i| {
            let l = if i > 0 { u[i - 1] } else { 0.0 };
            let r = if i + 1 < n { u[i + 1] } else { 0.0 };
            (2.0 * u[i] - l - r) / (h * h)
        })
        .collect()
}

/// Ground state of `−u″ − τu = μu³` on `(0, L)` with `τ` below the principal
/// eigenvalue, by normalised nonlinear inverse iteration `u ← (−Δ − τ)⁻¹ u³`
/// rescaled onto the Nehari set after each step.
pub struct ScalarOracle {
    pub u: Vec<f64>,
    pub energy: f64,
    /// `J(u)/‖u‖²_{L⁴}`.
    pub quotient: f64,
    pub iterations: usize,
}

pub fn scalar_oracle(length: f64, n: usize, tau: f64, mu: f64) -> ScalarOracle {
    let h = length / (n as f64 + 1.0);
    let sub = vec![-1.0 / (h * h); n];
    let diag = vec![2.0 / (h * h) - tau; n];
    let j = |u: &[f64]| -> f64 {
        let lu = neg_laplacian_1d(u, h);
        h * u.iter().zip(&lu).map(|(a, b)| a * (b - tau * a)).sum::<f64>()
    };
    let quart = |u: &[f64]| -> f64 { h * u.iter().map(|v| v.powi(4)).sum::<f64>() };
    let nehari = |u: &mut Vec<f64>| {
        let s = (j(u) / (mu * quart(u))).sqrt();
        u.iter_mut().for_each(|v| *v *= s);
    };

    let mut u: Vec<f64> = (1..=n).map(|i| (i as f64 * h * std::f64::consts::PI / length).sin()).collect();
    nehari(&mut u);
    let mut iterations = 0;
    for it in 0..10_000 {
        iterations = it + 1;
        let rhs: Vec<f64> = u.iter().map(|v| mu * v.powi(3)).collect();
        let mut next = thomas(&sub, &diag, &sub, &rhs);
        nehari(&mut next);
        let change = next.iter().zip(&u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let scale = next.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        u = next;
        if change <= 1e-15 * scale {
            break;
        }
    }
    let jv = j(&u);
    let q4 = quart(&u);
    ScalarOracle { energy: 0.5 * jv - 0.25 * mu * q4, quotient: jv / q4.sqrt(), u, iterations }
}

/// Dense `−Δ_h − τ` on an interval with `n` interior nodes.
pub fn dense_operator_1d(length: f64, n: usize, tau: f64) -> DMatrix<f64> {
    let h = length / (n as f64 + 1.0);
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            2.0 / (h * h) - tau
        } else if i.abs_diff(j) == 1 {
            -1.0 / (h * h)
        } else {
            0.0
        }
    })
}

/// `inf φᵀKφ / Σ wᵢφᵢ²` over `φ ⊥ excluded`, with the quotient restricted to
/// the orthogonal complement through a Householder basis and solved by
/// Cholesky of the reduced `K`.
pub fn weighted_rayleigh_min(k: &DMatrix<f64>, weight: &[f64], excluded: &[DVector<f64>]) -> f64 {
    let n = k.nrows();
    let q = if excluded.is_empty() {
        DMatrix::identity(n, n)
    } else {
        let m = excluded.len();
        let mut a = DMatrix::zeros(n, n);
        for (c, v) in excluded.iter().enumerate() {
            a.set_column(c, v);
        }
        // pad with identity columns so the QR yields a full orthonormal basis
        for c in m..n {
            a[(c - m, c)] = 1.0;
        }
        let full = a.qr().q();
        full.columns(m, n - m).into_owned()
    };
    let kr = q.transpose() * k * &q;
    let mut wq = q.clone();
    for (i, w) in weight.iter().enumerate() {
        wq.row_mut(i).scale_mut(*w);
    }
    let mr = q.transpose() * wq;
    let l = kr.cholesky().expect("reduced operator must be positive definite").l();
    let linv = l.clone().try_inverse().expect("invertible factor");
    let c = &linv * mr * linv.transpose();
    let c = 0.5 * (&c + c.transpose());
    let top = c.symmetric_eigen().eigenvalues.max();
    1.0 / top
}

/// `inf_{s ∈ [0,1]} h(√s, √(1−s))` by scanning `s` with the given step.
pub fn h_inf_scan(mu1: f64, mu2: f64, beta: f64, step: f64) -> f64 {
    let n = (1.0 / step).round() as usize;
    let mut best = f64::INFINITY;
    for i in 0..=n {
        let s = i as f64 / n as f64;
        let r = 1.0 - s;
        let v = 1.0 / (mu1 * s * s + mu2 * r * r + 2.0 * beta * s * r).sqrt();
        best = best.min(v);
    }
    best
}

/// Least-squares slope of `log err` against `log eps`.
pub fn loglog_slope(eps: &[f64], err: &[f64]) -> f64 {
    let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = err.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
