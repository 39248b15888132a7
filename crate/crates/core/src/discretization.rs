//! Uniform Dirichlet grids on intervals and rectangles, the five-point
//! (three-point in 1D) Laplacian and the nodal quadrature used for every
//! integral in the crate.
//!
//! Boundary nodes are excluded, so a [`Field`] only stores interior values and
//! the zero Dirichlet datum is implicit. All integrals use the same uniform
//! weight per node, which keeps `∫F` and its gradient exactly compatible.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nodal values on the interior of a [`Grid`].
pub type Field = DVector<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    Interval,
    Rectangle,
}

impl DomainKind {
    pub fn dim(self) -> usize {
        match self {
            DomainKind::Interval => 1,
            DomainKind::Rectangle => 2,
        }
    }
}

/// Geometry request: side lengths and interior points per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub lengths: Vec<f64>,
    pub n: usize,
}

impl DomainSpec {
    pub fn interval(length: f64, n: usize) -> Self {
        Self { kind: DomainKind::Interval, lengths: vec![length], n }
    }

    pub fn rectangle(lx: f64, ly: f64, n: usize) -> Self {
        Self { kind: DomainKind::Rectangle, lengths: vec![lx, ly], n }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lengths.len() != self.kind.dim() {
            return Err(Error::InvalidDomain(format!(
                "{:?} needs {} length(s), got {}",
                self.kind,
                self.kind.dim(),
                self.lengths.len()
            )));
        }
        if let Some(l) = self.lengths.iter().find(|l| !(**l > 0.0) || !l.is_finite()) {
            return Err(Error::InvalidDomain(format!("lengths must be > 0, got {l}")));
        }
        if self.n < 3 {
            return Err(Error::InvalidDomain(format!("n must be >= 3, got {}", self.n)));
        }
        Ok(())
    }
}

/// A validated uniform grid of interior nodes.
///
/// Nodes are numbered with the x index running fastest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    pub domain: DomainSpec,
    /// Spacing per axis.
    pub h: Vec<f64>,
    pub node_count: usize,
    /// Quadrature weight per node (`h` in 1D, `hx*hy` in 2D).
    pub quad_weight: f64,
}

pub fn build_grid(spec: &DomainSpec) -> Result<Grid> {
    spec.validate()?;
    let h: Vec<f64> = spec.lengths.iter().map(|l| l / (spec.n as f64 + 1.0)).collect();
    let node_count = spec.n.pow(spec.kind.dim() as u32);
    let quad_weight = h.iter().product();
    Ok(Grid { domain: spec.clone(), h, node_count, quad_weight })
}

impl Grid {
    pub fn dim(&self) -> usize {
        self.domain.kind.dim()
    }

    /// Interior points per axis.
    pub fn n(&self) -> usize {
        self.domain.n
    }

    pub fn check(&self, u: &Field) -> Result<()> {
        if u.len() != self.node_count {
            return Err(Error::ShapeMismatch { expected: self.node_count, got: u.len() });
        }
        Ok(())
    }

    /// Physical coordinates of node `idx`.
    pub fn coords(&self, idx: usize) -> [f64; 2] {
        let n = self.n();
        match self.domain.kind {
            DomainKind::Interval => [(idx as f64 + 1.0) * self.h[0], 0.0],
            DomainKind::Rectangle => {
                let (i, j) = (idx % n, idx / n);
                [(i as f64 + 1.0) * self.h[0], (j as f64 + 1.0) * self.h[1]]
            }
        }
    }

    /// Samples `f` at every interior node.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Field {
        Field::from_fn(self.node_count, |idx, _| {
            let [x, y] = self.coords(idx);
            f(x, y)
        })
    }

    pub fn zeros(&self) -> Field {
        Field::zeros(self.node_count)
    }

    /// Second-order centered `-Δ` with zero Dirichlet data.
    pub fn laplacian_apply(&self, u: &Field) -> Result<Field> {
        self.check(u)?;
        let n = self.n();
        let mut out = self.zeros();
        match self.domain.kind {
            DomainKind::Interval => {
                let ih2 = 1.0 / (self.h[0] * self.h[0]);
                for i in 0..n {
                    let left = if i > 0 { u[i - 1] } else { 0.0 };
                    let right = if i + 1 < n { u[i + 1] } else { 0.0 };
                    out[i] = (2.0 * u[i] - left - right) * ih2;
                }
            }
            DomainKind::Rectangle => {
                let ihx2 = 1.0 / (self.h[0] * self.h[0]);
                let ihy2 = 1.0 / (self.h[1] * self.h[1]);
                for j in 0..n {
                    for i in 0..n {
                        let k = i + n * j;
                        let w = if i > 0 { u[k - 1] } else { 0.0 };
                        let e = if i + 1 < n { u[k + 1] } else { 0.0 };
                        let s = if j > 0 { u[k - n] } else { 0.0 };
                        let no = if j + 1 < n { u[k + n] } else { 0.0 };
                        out[k] = (2.0 * u[k] - w - e) * ihx2 + (2.0 * u[k] - s - no) * ihy2;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Dense matrix of `-Δʰ`; only used by the cross-validation eigensolver
    /// and by dense Newton Jacobians.
    pub fn laplacian_matrix(&self) -> DMatrix<f64> {
        let m = self.node_count;
        let mut a = DMatrix::zeros(m, m);
        let mut e = self.zeros();
        for k in 0..m {
            e[k] = 1.0;
            let col = self.laplacian_apply(&e).expect("conforming unit vector");
            a.set_column(k, &col);
            e[k] = 0.0;
        }
        a
    }

    /// Discrete `∫∇u·∇v`.
    pub fn inner_grad(&self, u: &Field, v: &Field) -> Result<f64> {
        self.check(v)?;
        let lu = self.laplacian_apply(u)?;
        Ok(self.quad_weight * v.dot(&lu))
    }

    pub fn inner_l2(&self, u: &Field, v: &Field) -> Result<f64> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.quad_weight * u.dot(v))
    }

    pub fn norm_lp(&self, u: &Field, p: u32) -> Result<f64> {
        self.check(u)?;
        match p {
            2 => Ok((self.quad_weight * u.norm_squared()).sqrt()),
            4 => Ok((self.quad_weight * u.iter().map(|x| x.powi(4)).sum::<f64>()).powf(0.25)),
            _ => Err(Error::UnsupportedExponent(p)),
        }
    }

    /// `‖∇u‖_{L²}`, the norm of `H¹₀`.
    pub fn norm_h1(&self, u: &Field) -> Result<f64> {
        Ok(self.inner_grad(u, u)?.max(0.0).sqrt())
    }

    /// Smallest discrete Dirichlet eigenvalue, from the analytic formula.
    pub fn lambda1(&self) -> f64 {
        let n = self.n() as f64;
        self.h
            .iter()
            .map(|h| (2.0 - 2.0 * (std::f64::consts::PI / (n + 1.0)).cos()) / (h * h))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn builds_interval_and_rectangle() {
        let g = build_grid(&DomainSpec::interval(PI, 99)).unwrap();
        assert_eq!(g.node_count, 99);
        assert!((g.h[0] - PI / 100.0).abs() < 1e-15);
        assert!((g.quad_weight - PI / 100.0).abs() < 1e-15);

        let g = build_grid(&DomainSpec::rectangle(PI, PI, 31)).unwrap();
        assert_eq!(g.node_count, 961);
        assert!((g.quad_weight - (PI / 32.0).powi(2)).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_domains() {
        assert!(build_grid(&DomainSpec::interval(PI, 2)).is_err());
        assert!(build_grid(&DomainSpec::interval(0.0, 10)).is_err());
        assert!(build_grid(&DomainSpec::interval(-1.0, 10)).is_err());
        let bad = DomainSpec { kind: DomainKind::Rectangle, lengths: vec![1.0], n: 5 };
        assert!(build_grid(&bad).is_err());
    }

    #[test]
    fn sine_is_discrete_eigenvector() {
        let g = build_grid(&DomainSpec::interval(PI, 99)).unwrap();
        let u = g.sample(|x, _| x.sin());
        let lu = g.laplacian_apply(&u).unwrap();
        let h = g.h[0];
        let lam = (2.0 - 2.0 * h.cos()) / (h * h);
        assert!((&lu - &u * lam).amax() < 1e-12);
        assert!((lam - g.lambda1()).abs() < 1e-12);
        assert!(g.laplacian_apply(&g.zeros()).unwrap().amax() == 0.0);
    }

    #[test]
    fn tensor_sine_in_2d() {
        let g = build_grid(&DomainSpec::rectangle(PI, PI, 15)).unwrap();
        let u = g.sample(|x, y| x.sin() * y.sin());
        let lu = g.laplacian_apply(&u).unwrap();
        let h = g.h[0];
        let lam = 2.0 * (2.0 - 2.0 * h.cos()) / (h * h);
        assert!((&lu - &u * lam).amax() < 1e-11);
    }

    #[test]
    fn inner_grad_matches_eigen_relation() {
        let g = build_grid(&DomainSpec::interval(PI, 99)).unwrap();
        let u = g.sample(|x, _| x.sin());
        let lam = g.lambda1();
        let a = g.inner_grad(&u, &u).unwrap();
        // direct sum of squared differences, a different summation order
        let h = g.h[0];
        let mut direct = 0.0;
        for i in 0..=u.len() {
            let l = if i > 0 { u[i - 1] } else { 0.0 };
            let r = if i < u.len() { u[i] } else { 0.0 };
            direct += (r - l).powi(2) / h;
        }
        assert!((a - direct).abs() < 1e-12);
        assert!((a - lam * g.inner_l2(&u, &u).unwrap()).abs() < 1e-12);
        assert_eq!(g.inner_grad(&g.zeros(), &u).unwrap(), 0.0);
    }

    #[test]
    fn l2_norm_converges_at_second_order() {
        // sum of sin² with nodal weights is exactly π/2 for this grid family,
        // so compare against the trapezoid-free midpoint field instead
        let errs: Vec<f64> = [31usize, 63, 127]
            .iter()
            .map(|&n| {
                let g = build_grid(&DomainSpec::interval(PI, n)).unwrap();
                let u = g.sample(|x, _| x.sin() * (1.0 + 0.3 * x));
                let exact = {
                    // ∫₀^π sin²x (1+0.3x)² dx
                    let a = PI / 2.0;
                    let b = 0.6 * PI * PI / 4.0;
                    let c = 0.09 * (PI.powi(3) / 6.0 - PI / 4.0);
                    a + b + c
                };
                (g.norm_lp(&u, 2).unwrap().powi(2) - exact).abs()
            })
            .collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order > 1.8, "observed order {order}");
        }
        let g = build_grid(&DomainSpec::interval(PI, 256)).unwrap();
        let u = g.sample(|x, _| x.sin());
        assert!((g.norm_lp(&u, 2).unwrap().powi(2) - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn lp_norms_and_errors() {
        let g = build_grid(&DomainSpec::interval(PI, 20)).unwrap();
        assert_eq!(g.norm_lp(&g.zeros(), 4).unwrap(), 0.0);
        assert!(matches!(g.norm_lp(&g.zeros(), 3), Err(Error::UnsupportedExponent(3))));
        assert!(matches!(g.inner_l2(&g.zeros(), &Field::zeros(3)), Err(Error::ShapeMismatch { .. })));

        let u = g.sample(|x, _| x.sin());
        let v = g.sample(|x, _| (2.0 * x).sin() + 0.1);
        let lhs = g.inner_l2(&u.map(|x| x * x), &v.map(|x| x * x)).unwrap();
        let rhs = g.norm_lp(&u, 4).unwrap().powi(2) * g.norm_lp(&v, 4).unwrap().powi(2);
        assert!(lhs <= rhs);
    }

    #[test]
    fn laplacian_matrix_matches_apply() {
        let g = build_grid(&DomainSpec::rectangle(1.0, 2.0, 5)).unwrap();
        let a = g.laplacian_matrix();
        let u = g.sample(|x, y| x * y + x.powi(2));
        assert!((&a * &u - g.laplacian_apply(&u).unwrap()).amax() < 1e-10);
        assert!((&a - a.transpose()).amax() < 1e-12);
    }
}
