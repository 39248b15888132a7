//! Energy `I(u) = ½J(u,u) − ∫F(u)`, its gradient and second variation.
//!
//! The residual is returned in strong nodal form, `(−Δʰ − τᵢ)uᵢ − fᵢ(u)`;
//! pairing it with a direction needs the quadrature weight:
//! `I′(u)v = quad_weight · ⟨residual(u), v⟩`.
//!
//! [`Problem`] is the shared engine for the scalar and the coupled equations.
//! It stores states as one flat vector with the components stacked, so the
//! fiber and sphere solvers are written once.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::discretization::{Field, Grid};
use crate::error::{Error, Result};
use crate::spectral::{split_space, SpaceSplit, Spectrum};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    pub tau1: f64,
    pub tau2: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub beta: f64,
}

impl SystemParams {
    pub fn new(tau1: f64, tau2: f64, mu1: f64, mu2: f64, beta: f64) -> Result<Self> {
        let p = Self { tau1, tau2, mu1, mu2, beta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.tau1, self.tau2, self.mu1, self.mu2, self.beta].iter().all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("parameters must be finite".into()));
        }
        if !(self.mu1 > 0.0) {
            return Err(Error::InvalidParameter("mu1 must be > 0".into()));
        }
        if !(self.mu2 > 0.0) {
            return Err(Error::InvalidParameter("mu2 must be > 0".into()));
        }
        if !(self.beta > 0.0) {
            return Err(Error::InvalidParameter("beta must be > 0".into()));
        }
        Ok(())
    }

    pub fn nonlinearity(&self) -> Nonlinearity {
        Nonlinearity::Coupled { mu1: self.mu1, mu2: self.mu2, beta: self.beta }
    }

    /// Same parameters with `β` replaced.
    pub fn with_beta(&self, beta: f64) -> Self {
        Self { beta, ..*self }
    }
}

/// Two-component field `(u₁, u₂)` on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Pair {
    pub u1: Field,
    pub u2: Field,
}

impl Pair {
    pub fn new(u1: Field, u2: Field) -> Self {
        Self { u1, u2 }
    }

    pub fn zeros(n: usize) -> Self {
        Self { u1: Field::zeros(n), u2: Field::zeros(n) }
    }

    pub fn len(&self) -> usize {
        self.u1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u1.is_empty()
    }

    pub fn to_flat(&self) -> DVector<f64> {
        let n = self.u1.len();
        let mut x = DVector::zeros(2 * n);
        x.rows_mut(0, n).copy_from(&self.u1);
        x.rows_mut(n, n).copy_from(&self.u2);
        x
    }

    pub fn from_flat(x: &DVector<f64>) -> Self {
        let n = x.len() / 2;
        Self { u1: x.rows(0, n).into_owned(), u2: x.rows(n, n).into_owned() }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { u1: &self.u1 * s, u2: &self.u2 * s }
    }

    pub fn add(&self, other: &Pair) -> Self {
        Self { u1: &self.u1 + &other.u1, u2: &self.u2 + &other.u2 }
    }

    pub fn amax(&self) -> f64 {
        self.u1.amax().max(self.u2.amax())
    }

    fn check(&self, g: &Grid) -> Result<()> {
        g.check(&self.u1)?;
        g.check(&self.u2)
    }
}

/// Local nonlinearity `F` with `f = ∇F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Nonlinearity {
    /// `F(u) = μu⁴/4`.
    Scalar { mu: f64 },
    /// `F(u) = (μ₁u₁⁴ + μ₂u₂⁴ + 2βu₁²u₂²)/4`.
    Coupled { mu1: f64, mu2: f64, beta: f64 },
}

impl Nonlinearity {
    pub fn ncomp(&self) -> usize {
        match self {
            Nonlinearity::Scalar { .. } => 1,
            Nonlinearity::Coupled { .. } => 2,
        }
    }

    /// Unweighted nodal sum of `F(x)`.
    fn sum_f(&self, x: &[f64]) -> f64 {
        match *self {
            Nonlinearity::Scalar { mu } => 0.25 * mu * x.iter().map(|v| v.powi(4)).sum::<f64>(),
            Nonlinearity::Coupled { mu1, mu2, beta } => {
                let n = x.len() / 2;
                let (a, b) = x.split_at(n);
                a.iter()
                    .zip(b)
                    .map(|(u, v)| {
                        let (u2, v2) = (u * u, v * v);
                        0.25 * (mu1 * u2 * u2 + mu2 * v2 * v2 + 2.0 * beta * u2 * v2)
                    })
                    .sum()
            }
        }
    }

    fn grad(&self, x: &[f64]) -> DVector<f64> {
        match *self {
            Nonlinearity::Scalar { mu } => DVector::from_iterator(x.len(), x.iter().map(|u| mu * u * u * u)),
            Nonlinearity::Coupled { mu1, mu2, beta } => {
                let n = x.len() / 2;
                let mut out = DVector::zeros(2 * n);
                for i in 0..n {
                    let (u, v) = (x[i], x[n + i]);
                    out[i] = mu1 * u * u * u + beta * u * v * v;
                    out[n + i] = mu2 * v * v * v + beta * u * u * v;
                }
                out
            }
        }
    }

    /// Unweighted nodal sum of `F″(x)[a, b]`.
    fn sum_second(&self, x: &[f64], a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Nonlinearity::Scalar { mu } => x.iter().zip(a).zip(b).map(|((u, p), q)| 3.0 * mu * u * u * p * q).sum(),
            Nonlinearity::Coupled { mu1, mu2, beta } => {
                let n = x.len() / 2;
                let mut s = 0.0;
                for i in 0..n {
                    let (u, v) = (x[i], x[n + i]);
                    let (a1, a2, b1, b2) = (a[i], a[n + i], b[i], b[n + i]);
                    s += 3.0 * mu1 * u * u * a1 * b1
                        + 3.0 * mu2 * v * v * a2 * b2
                        + beta * (v * v * a1 * b1 + u * u * a2 * b2 + 2.0 * u * v * (a1 * b2 + a2 * b1));
                }
                s
            }
        }
    }

    /// `F″(x) z` nodewise.
    fn second_apply(&self, x: &[f64], z: &[f64]) -> DVector<f64> {
        match *self {
            Nonlinearity::Scalar { mu } => {
                DVector::from_iterator(x.len(), x.iter().zip(z).map(|(u, p)| 3.0 * mu * u * u * p))
            }
            Nonlinearity::Coupled { mu1, mu2, beta } => {
                let n = x.len() / 2;
                let mut out = DVector::zeros(2 * n);
                for i in 0..n {
                    let (u, v) = (x[i], x[n + i]);
                    let (z1, z2) = (z[i], z[n + i]);
                    out[i] = (3.0 * mu1 * u * u + beta * v * v) * z1 + 2.0 * beta * u * v * z2;
                    out[n + i] = (3.0 * mu2 * v * v + beta * u * u) * z2 + 2.0 * beta * u * v * z1;
                }
                out
            }
        }
    }
}

/// Nodal operators of the energy: everything that needs only the grid.
#[derive(Debug, Clone)]
pub struct Operator<'a> {
    pub grid: &'a Grid,
    pub taus: Vec<f64>,
    pub nonlin: Nonlinearity,
}

impl<'a> Operator<'a> {
    pub fn new(grid: &'a Grid, taus: Vec<f64>, nonlin: Nonlinearity) -> Self {
        debug_assert_eq!(taus.len(), nonlin.ncomp());
        Self { grid, taus, nonlin }
    }

    pub fn ncomp(&self) -> usize {
        self.nonlin.ncomp()
    }

    pub fn nodes(&self) -> usize {
        self.grid.node_count
    }

    pub fn dim(&self) -> usize {
        self.ncomp() * self.nodes()
    }

    pub fn zeros(&self) -> DVector<f64> {
        DVector::zeros(self.dim())
    }

    pub fn component(&self, x: &DVector<f64>, c: usize) -> Field {
        x.rows(c * self.nodes(), self.nodes()).into_owned()
    }

    pub fn check(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::ShapeMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(())
    }

    /// Strong-form `(−Δʰ − τ_c) x_c` per component.
    pub fn a_apply(&self, x: &DVector<f64>) -> DVector<f64> {
        let n = self.nodes();
        let mut out = self.zeros();
        for c in 0..self.ncomp() {
            let xc = self.component(x, c);
            let lc = self.grid.laplacian_apply(&xc).expect("component conforms") - &xc * self.taus[c];
            out.rows_mut(c * n, n).copy_from(&lc);
        }
        out
    }

    pub fn j_form(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        self.grid.quad_weight * y.dot(&self.a_apply(x))
    }

    pub fn inner_l2(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        self.grid.quad_weight * x.dot(y)
    }

    /// Product `H¹₀` norm.
    pub fn norm_h1(&self, x: &DVector<f64>) -> f64 {
        (0..self.ncomp())
            .map(|c| self.grid.norm_h1(&self.component(x, c)).expect("component conforms").powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn big_f(&self, x: &DVector<f64>) -> f64 {
        self.grid.quad_weight * self.nonlin.sum_f(x.as_slice())
    }

    pub fn f(&self, x: &DVector<f64>) -> DVector<f64> {
        self.nonlin.grad(x.as_slice())
    }

    /// `∫ f(x)·y`.
    pub fn f_pair(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        self.grid.quad_weight * self.f(x).dot(y)
    }

    /// `∫ F″(x)[a, b]`.
    pub fn second(&self, x: &DVector<f64>, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        self.grid.quad_weight * self.nonlin.sum_second(x.as_slice(), a.as_slice(), b.as_slice())
    }

    pub fn energy(&self, x: &DVector<f64>) -> f64 {
        0.5 * self.j_form(x, x) - self.big_f(x)
    }

    pub fn residual(&self, x: &DVector<f64>) -> DVector<f64> {
        self.a_apply(x) - self.f(x)
    }

    /// `⟨I″(w)z, z⟩`.
    pub fn hessian_quadform(&self, w: &DVector<f64>, z: &DVector<f64>) -> f64 {
        self.j_form(z, z) - self.second(w, z, z)
    }

    /// Strong-form `I″(w) z`, the Newton Jacobian applied to `z`.
    pub fn jacobian_apply(&self, w: &DVector<f64>, z: &DVector<f64>) -> DVector<f64> {
        self.a_apply(z) - self.nonlin.second_apply(w.as_slice(), z.as_slice())
    }

    /// Dense strong-form Jacobian of [`Operator::residual`] at `w`.
    pub fn jacobian(&self, w: &DVector<f64>) -> DMatrix<f64> {
        let n = self.nodes();
        let lap = self.grid.laplacian_matrix();
        let mut jac = DMatrix::zeros(self.dim(), self.dim());
        for c in 0..self.ncomp() {
            let mut block = lap.clone();
            for i in 0..n {
                block[(i, i)] -= self.taus[c];
            }
            jac.view_mut((c * n, c * n), (n, n)).copy_from(&block);
        }
        // F″ is diagonal within each block
        let mut e = self.zeros();
        for c in 0..self.ncomp() {
            for i in 0..n {
                let col = c * n + i;
                e[col] = 1.0;
                let s = self.nonlin.second_apply(w.as_slice(), e.as_slice());
                e[col] = 0.0;
                for r in 0..self.ncomp() {
                    jac[(r * n + i, col)] -= s[r * n + i];
                }
            }
        }
        jac
    }
}

/// A `H̃` basis vector: eigenvector `mode` placed in component `comp`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TildeMode {
    pub comp: usize,
    pub mode: usize,
    /// `λₖ − τ_comp ≤ 0`.
    pub shift: f64,
}

/// [`Operator`] plus the spectral splitting of each component.
#[derive(Debug, Clone)]
pub struct Problem<'a> {
    pub op: Operator<'a>,
    pub spectrum: &'a Spectrum,
    pub splits: Vec<SpaceSplit>,
    tilde: Vec<TildeMode>,
}

impl<'a> std::ops::Deref for Problem<'a> {
    type Target = Operator<'a>;

    fn deref(&self) -> &Operator<'a> {
        &self.op
    }
}

impl<'a> Problem<'a> {
    pub fn scalar(grid: &'a Grid, spectrum: &'a Spectrum, tau: f64, mu: f64, tol_eig: f64) -> Result<Self> {
        if !(mu > 0.0) {
            return Err(Error::InvalidParameter("mu must be > 0".into()));
        }
        Self::build(grid, spectrum, vec![tau], Nonlinearity::Scalar { mu }, tol_eig)
    }

    pub fn system(grid: &'a Grid, spectrum: &'a Spectrum, p: &SystemParams, tol_eig: f64) -> Result<Self> {
        p.validate()?;
        Self::build(grid, spectrum, vec![p.tau1, p.tau2], p.nonlinearity(), tol_eig)
    }

    fn build(grid: &'a Grid, spectrum: &'a Spectrum, taus: Vec<f64>, nonlin: Nonlinearity, tol_eig: f64) -> Result<Self> {
        if spectrum.vectors.nrows() != grid.node_count {
            return Err(Error::ShapeMismatch { expected: grid.node_count, got: spectrum.vectors.nrows() });
        }
        let splits = taus.iter().map(|&t| split_space(spectrum, t, tol_eig)).collect::<Result<Vec<_>>>()?;
        let mut tilde = Vec::new();
        for (comp, sp) in splits.iter().enumerate() {
            for k in sp.tilde_idx() {
                tilde.push(TildeMode { comp, mode: k, shift: spectrum.eigenvalues[k] - sp.tau });
            }
        }
        Ok(Self { op: Operator::new(grid, taus, nonlin), spectrum, splits, tilde })
    }

    pub fn tilde_modes(&self) -> &[TildeMode] {
        &self.tilde
    }

    /// Flat vector of the `H̃` basis element.
    pub fn tilde_vector(&self, m: &TildeMode) -> DVector<f64> {
        let mut x = self.zeros();
        x.rows_mut(m.comp * self.nodes(), self.nodes()).copy_from(&self.spectrum.vectors.column(m.mode));
        x
    }

    /// `L²` coefficients of `x` on the `H̃` basis.
    pub fn tilde_coefficients(&self, x: &DVector<f64>) -> Vec<f64> {
        let n = self.nodes();
        self.tilde
            .iter()
            .map(|m| {
                let col = self.spectrum.vectors.column(m.mode);
                self.grid.quad_weight * col.dot(&x.rows(m.comp * n, n))
            })
            .collect()
    }

    pub fn synthesize_tilde(&self, coeffs: &[f64]) -> DVector<f64> {
        let n = self.nodes();
        let mut x = self.zeros();
        for (m, &c) in self.tilde.iter().zip(coeffs) {
            let col = self.spectrum.vectors.column(m.mode);
            x.rows_mut(m.comp * n, n).axpy(c, &col, 1.0);
        }
        x
    }

    pub fn project_tilde(&self, x: &DVector<f64>) -> DVector<f64> {
        self.synthesize_tilde(&self.tilde_coefficients(x))
    }

    pub fn project_plus(&self, x: &DVector<f64>) -> DVector<f64> {
        x - self.project_tilde(x)
    }

    /// Solves `(−Δʰ − τ)g = P⁺r` on `H⁺` componentwise (the `J`-Riesz map).
    pub fn a_plus_inverse(&self, r: &DVector<f64>) -> DVector<f64> {
        let n = self.nodes();
        let s = self.spectrum;
        let mut out = self.zeros();
        for (c, sp) in self.splits.iter().enumerate() {
            let rc = self.component(r, c);
            let coeffs = s.coefficients(&rc);
            let mut acc = Field::zeros(n);
            for &k in &sp.plus_idx {
                let d = s.eigenvalues[k] - sp.tau;
                acc.axpy(coeffs[k] / d, &s.vectors.column(k), 1.0);
            }
            out.rows_mut(c * n, n).copy_from(&acc);
        }
        out
    }
}

fn with_pairs<T>(p: &SystemParams, g: &Grid, pairs: &[&Pair], op: impl FnOnce(&Operator, Vec<DVector<f64>>) -> T) -> Result<T> {
    p.validate()?;
    for x in pairs {
        x.check(g)?;
    }
    let o = Operator::new(g, vec![p.tau1, p.tau2], p.nonlinearity());
    Ok(op(&o, pairs.iter().map(|x| x.to_flat()).collect()))
}

pub fn j_form(p: &SystemParams, g: &Grid, u: &Pair, v: &Pair) -> Result<f64> {
    with_pairs(p, g, &[u, v], |prob, x| prob.j_form(&x[0], &x[1]))
}

/// Nodal `f(u)`.
pub fn f_density(p: &SystemParams, u: &Pair) -> Pair {
    let x = u.to_flat();
    Pair::from_flat(&p.nonlinearity().grad(x.as_slice()))
}

pub fn big_f(p: &SystemParams, g: &Grid, u: &Pair) -> Result<f64> {
    with_pairs(p, g, &[u], |prob, x| prob.big_f(&x[0]))
}

pub fn energy(p: &SystemParams, g: &Grid, u: &Pair) -> Result<f64> {
    with_pairs(p, g, &[u], |prob, x| prob.energy(&x[0]))
}

pub fn residual(p: &SystemParams, g: &Grid, u: &Pair) -> Result<Pair> {
    with_pairs(p, g, &[u], |prob, x| Pair::from_flat(&prob.residual(&x[0])))
}

pub fn hessian_quadform(p: &SystemParams, g: &Grid, w: &Pair, z: &Pair) -> Result<f64> {
    with_pairs(p, g, &[w, z], |prob, x| prob.hessian_quadform(&x[0], &x[1]))
}

pub fn jacobian_apply(p: &SystemParams, g: &Grid, w: &Pair, z: &Pair) -> Result<Pair> {
    with_pairs(p, g, &[w, z], |prob, x| Pair::from_flat(&prob.jacobian_apply(&x[0], &x[1])))
}
