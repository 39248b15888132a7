//! Spectrum of the discrete Dirichlet Laplacian and the τ-relative splitting
//! `H = H⁺ ⊕ H⁰ ⊕ H⁻`.
//!
//! Eigenvectors are stored as columns, orthonormal in the nodal `L²` inner
//! product (`quad_weight · Σ vₖ vₗ = δₖₗ`). Because the mass matrix is a
//! multiple of the identity, these are also eigenvectors of the plain
//! matrix of `-Δʰ`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::discretization::{DomainKind, Field, Grid};
use crate::error::{Error, Result};

/// Default relative width of the zero band in [`split_space`].
pub const DEFAULT_TOL_EIG: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Ascending eigenvalues.
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the eigenvector of `eigenvalues[k]`.
    pub vectors: DMatrix<f64>,
    /// Mode numbers per axis (`(k, 0)` in 1D); empty for the Jacobi path.
    pub modes: Vec<(usize, usize)>,
    quad_weight: f64,
}

impl Spectrum {
    pub fn count(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn lambda1(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn vector(&self, k: usize) -> Field {
        self.vectors.column(k).into_owned()
    }

    /// Principal eigenvector, normalised in `L²` and positive inside.
    pub fn phi1(&self) -> Field {
        let v = self.vector(0);
        if v.sum() < 0.0 {
            -v
        } else {
            v
        }
    }

    /// `L²` coefficients of `u` in the eigenbasis.
    pub fn coefficients(&self, u: &Field) -> DVector<f64> {
        self.vectors.tr_mul(u) * self.quad_weight
    }

    fn combine(&self, idx: &[usize], u: &Field) -> Field {
        let mut out = Field::zeros(u.len());
        for &k in idx {
            let col = self.vectors.column(k);
            let c = self.quad_weight * col.dot(u);
            out.axpy(c, &col, 1.0);
        }
        out
    }
}

/// Analytic tensor-product eigenpairs of `-Δʰ` on the grid.
pub fn eigendecompose(g: &Grid) -> Spectrum {
    let n = g.n();
    let np1 = n as f64 + 1.0;
    let one_d = |h: f64| -> Vec<f64> {
        (1..=n).map(|k| (2.0 - 2.0 * (k as f64 * PI / np1).cos()) / (h * h)).collect()
    };
    let sine = |k: usize, j: usize| (k as f64 * j as f64 * PI / np1).sin();

    let mut pairs: Vec<(f64, usize, usize)> = match g.domain.kind {
        DomainKind::Interval => one_d(g.h[0]).into_iter().enumerate().map(|(k, l)| (l, k + 1, 0)).collect(),
        DomainKind::Rectangle => {
            let lx = one_d(g.h[0]);
            let ly = one_d(g.h[1]);
            let mut v = Vec::with_capacity(n * n);
            for (ky, a) in ly.iter().enumerate() {
                for (kx, b) in lx.iter().enumerate() {
                    v.push((a + b, kx + 1, ky + 1));
                }
            }
            v
        }
    };
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)).then(a.1.cmp(&b.1)));

    let m = g.node_count;
    let mut vectors = DMatrix::zeros(m, pairs.len());
    for (col, &(_, kx, ky)) in pairs.iter().enumerate() {
        let mut v = DVector::from_fn(m, |idx, _| match g.domain.kind {
            DomainKind::Interval => sine(kx, idx + 1),
            DomainKind::Rectangle => sine(kx, idx % n + 1) * sine(ky, idx / n + 1),
        });
        let norm = (g.quad_weight * v.norm_squared()).sqrt();
        v /= norm;
        vectors.set_column(col, &v);
    }
    Spectrum {
        eigenvalues: pairs.iter().map(|p| p.0).collect(),
        vectors,
        modes: pairs.iter().map(|p| (p.1, p.2)).collect(),
        quad_weight: g.quad_weight,
    }
}

/// Cross-validation path: cyclic Jacobi on the dense matrix of `-Δʰ`.
pub fn eigendecompose_jacobi(g: &Grid) -> Spectrum {
    let (vals, vecs) = jacobi_eigen(g.laplacian_matrix(), 1e-14, 100);
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let scale = 1.0 / g.quad_weight.sqrt();
    let mut vectors = DMatrix::zeros(vecs.nrows(), vecs.ncols());
    for (col, &k) in order.iter().enumerate() {
        vectors.set_column(col, &(vecs.column(k) * scale));
    }
    Spectrum {
        eigenvalues: order.iter().map(|&k| vals[k]).collect(),
        vectors,
        modes: Vec::new(),
        quad_weight: g.quad_weight,
    }
}

/// Cyclic Jacobi rotations for a dense symmetric matrix.
///
/// Returns unsorted eigenvalues and the orthogonal matrix of eigenvectors.
pub fn jacobi_eigen(mut a: DMatrix<f64>, tol: f64, max_sweeps: usize) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let mut v = DMatrix::identity(n, n);
    let scale = a.norm().max(f64::MIN_POSITIVE);
    for _ in 0..max_sweeps {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off.sqrt() <= tol * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[(i, i)]).collect(), v)
}

/// Index sets of the τ-relative splitting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpaceSplit {
    pub tau: f64,
    pub plus_idx: Vec<usize>,
    pub zero_idx: Vec<usize>,
    pub minus_idx: Vec<usize>,
    pub tol_eig: f64,
    /// `true` when `τ` sits on an eigenvalue (`H⁰ ≠ {0}`).
    pub degenerate: bool,
}

impl SpaceSplit {
    /// Indices spanning `H̃ = H⁰ ⊕ H⁻`, ascending.
    pub fn tilde_idx(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.minus_idx.iter().chain(&self.zero_idx).copied().collect();
        v.sort_unstable();
        v
    }

    pub fn tilde_dim(&self) -> usize {
        self.zero_idx.len() + self.minus_idx.len()
    }

    /// `min (λₖ - τ)` over the positive modes.
    pub fn plus_gap(&self, s: &Spectrum) -> Option<f64> {
        self.plus_idx.iter().map(|&k| s.eigenvalues[k] - self.tau).reduce(f64::min)
    }
}

pub fn split_space(s: &Spectrum, tau: f64, tol_eig: f64) -> Result<SpaceSplit> {
    if !(tol_eig > 0.0 && tol_eig <= 1e-3) {
        return Err(Error::InvalidParameter(format!("tol_eig must lie in (0, 1e-3], got {tol_eig}")));
    }
    let band = tol_eig * tau.abs().max(1.0);
    let (mut plus_idx, mut zero_idx, mut minus_idx) = (Vec::new(), Vec::new(), Vec::new());
    for (k, &lam) in s.eigenvalues.iter().enumerate() {
        if (lam - tau).abs() <= band {
            zero_idx.push(k);
        } else if lam < tau {
            minus_idx.push(k);
        } else {
            plus_idx.push(k);
        }
    }
    let degenerate = !zero_idx.is_empty();
    Ok(SpaceSplit { tau, plus_idx, zero_idx, minus_idx, tol_eig, degenerate })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subspace {
    Plus,
    Zero,
    Minus,
    /// `H⁰ ⊕ H⁻`.
    Tilde,
}

/// `L²`-orthogonal projection onto the chosen spectral subspace.
pub fn project(split: &SpaceSplit, s: &Spectrum, u: &Field, which: Subspace) -> Result<Field> {
    if u.len() != s.vectors.nrows() {
        return Err(Error::ShapeMismatch { expected: s.vectors.nrows(), got: u.len() });
    }
    let out = match which {
        Subspace::Plus => s.combine(&split.plus_idx, u),
        Subspace::Zero => s.combine(&split.zero_idx, u),
        Subspace::Minus => s.combine(&split.minus_idx, u),
        Subspace::Tilde => s.combine(&split.tilde_idx(), u),
    };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{build_grid, DomainSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn interval(n: usize) -> Grid {
        build_grid(&DomainSpec::interval(PI, n)).unwrap()
    }

    #[test]
    fn principal_eigenvalue_formula() {
        let g = interval(99);
        let s = eigendecompose(&g);
        let h = PI / 100.0;
        let expected = (2.0 - 2.0 * h.cos()) / (h * h);
        assert!((s.lambda1() - expected).abs() < 1e-12);
        assert!((s.lambda1() - 0.99992).abs() < 1e-5);
        assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn analytic_matches_jacobi() {
        let g = interval(40);
        let a = eigendecompose(&g);
        let b = eigendecompose_jacobi(&g);
        let diff = a.eigenvalues.iter().zip(&b.eigenvalues).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(diff <= 1e-8, "max discrepancy {diff}");
        // the principal vectors agree up to sign
        let d = a.phi1() - b.phi1();
        assert!(d.amax() < 1e-8);
    }

    #[test]
    fn rectangle_is_tensor_sum() {
        let g = build_grid(&DomainSpec::rectangle(PI, PI, 15)).unwrap();
        let s = eigendecompose(&g);
        let g1 = interval(15);
        assert!((s.lambda1() - 2.0 * g1.lambda1()).abs() < 1e-12);
        assert_eq!(s.modes[0], (1, 1));
    }

    #[test]
    fn orthonormal_and_residual() {
        let g = build_grid(&DomainSpec::rectangle(1.0, 1.5, 9)).unwrap();
        let s = eigendecompose(&g);
        let gram = s.vectors.tr_mul(&s.vectors) * g.quad_weight;
        assert!((gram - DMatrix::identity(s.count(), s.count())).amax() < 1e-10);
        for k in 0..s.count() {
            let v = s.vector(k);
            let r = g.laplacian_apply(&v).unwrap() - &v * s.eigenvalues[k];
            assert!(r.amax() <= 1e-9 * s.eigenvalues[k]);
        }
    }

    #[test]
    fn split_cases() {
        let g = interval(99);
        let s = eigendecompose(&g);
        let sp = split_space(&s, s.lambda1(), DEFAULT_TOL_EIG).unwrap();
        assert_eq!(sp.zero_idx, vec![0]);
        assert!(sp.minus_idx.is_empty() && sp.degenerate);

        let sp = split_space(&s, 2.5, DEFAULT_TOL_EIG).unwrap();
        assert_eq!(sp.minus_idx, vec![0]);
        assert!(sp.zero_idx.is_empty());

        let sp = split_space(&s, 0.5, DEFAULT_TOL_EIG).unwrap();
        assert_eq!(sp.tilde_dim(), 0);
        assert_eq!(sp.plus_idx.len(), 99);

        assert!(split_space(&s, 0.5, 0.0).is_err());
        assert!(split_space(&s, 0.5, 1e-2).is_err());
    }

    #[test]
    fn projector_algebra() {
        let g = interval(63);
        let s = eigendecompose(&g);
        let sp = split_space(&s, 10.0, DEFAULT_TOL_EIG).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = Field::from_fn(g.node_count, |_, _| rng.gen_range(-1.0..1.0));
        let p = project(&sp, &s, &u, Subspace::Plus).unwrap();
        let t = project(&sp, &s, &u, Subspace::Tilde).unwrap();
        assert!((&p + &t - &u).amax() < 1e-10);
        let pp = project(&sp, &s, &p, Subspace::Plus).unwrap();
        assert!((&pp - &p).amax() < 1e-10);
        assert!(project(&sp, &s, &p, Subspace::Minus).unwrap().amax() < 1e-10);

        let sp = split_space(&s, 3.0, DEFAULT_TOL_EIG).unwrap();
        let phi = s.phi1();
        assert!(project(&sp, &s, &phi, Subspace::Plus).unwrap().amax() < 1e-12);
    }
}
