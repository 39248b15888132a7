mod support;

use nlss_core::functional::{energy, hessian_quadform, residual};
use nlss_core::{build_grid, eigendecompose, DomainSpec, Field, Grid, Pair, SystemParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

const EPS: [f64; 4] = [1e-3, 1e-4, 1e-5, 1e-6];

fn smooth(g: &Grid, rng: &mut ChaCha8Rng, amp: f64) -> Field {
    let c: Vec<f64> = (0..6).map(|_| rng.gen_range(-amp..amp)).collect();
    g.sample(|x, _| c.iter().enumerate().map(|(k, a)| a * ((k + 1) as f64 * x).sin()).sum::<f64>())
}

fn dot(g: &Grid, a: &Pair, b: &Pair) -> f64 {
    g.quad_weight * (a.u1.dot(&b.u1) + a.u2.dot(&b.u2))
}

struct Case {
    p: SystemParams,
    u: Pair,
    z: Pair,
}

fn cases(g: &Grid, count: usize) -> Vec<Case> {
    let lam = eigendecompose(g).lambda1();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    (0..count)
        .map(|_| {
            let p = SystemParams::new(
                lam * rng.gen_range(0.0..2.0),
                lam * rng.gen_range(0.0..2.0),
                rng.gen_range(0.5..3.0),
                rng.gen_range(0.5..3.0),
                rng.gen_range(0.1..20.0),
            )
            .unwrap();
            let u = Pair::new(smooth(g, &mut rng, 1.0), smooth(g, &mut rng, 1.0));
            // with a large direction the O(ε²) term stays above rounding at ε = 1e-6
            let z = Pair::new(smooth(g, &mut rng, 1e3), smooth(g, &mut rng, 1e3));
            Case { p, u, z }
        })
        .collect()
}

#[test]
fn gradient_central_differences_decay_quadratically() {
    let g = build_grid(&DomainSpec::interval(PI, 63)).unwrap();
    for c in cases(&g, 20) {
        let exact = dot(&g, &residual(&c.p, &g, &c.u).unwrap(), &c.z);
        let errs: Vec<f64> = EPS
            .iter()
            .map(|&e| {
                let fp = energy(&c.p, &g, &c.u.add(&c.z.scale(e))).unwrap();
                let fm = energy(&c.p, &g, &c.u.add(&c.z.scale(-e))).unwrap();
                ((fp - fm) / (2.0 * e) - exact).abs()
            })
            .collect();
        let slope = support::loglog_slope(&EPS, &errs);
        assert!((1.8..=2.2).contains(&slope), "slope {slope}, errors {errs:?}");
    }
}

#[test]
fn hessian_central_differences_decay_quadratically() {
    let g = build_grid(&DomainSpec::interval(PI, 63)).unwrap();
    for c in cases(&g, 20) {
        let exact = hessian_quadform(&c.p, &g, &c.u, &c.z).unwrap();
        let errs: Vec<f64> = EPS
            .iter()
            .map(|&e| {
                let rp = dot(&g, &residual(&c.p, &g, &c.u.add(&c.z.scale(e))).unwrap(), &c.z);
                let rm = dot(&g, &residual(&c.p, &g, &c.u.add(&c.z.scale(-e))).unwrap(), &c.z);
                ((rp - rm) / (2.0 * e) - exact).abs()
            })
            .collect();
        let slope = support::loglog_slope(&EPS, &errs);
        assert!((1.8..=2.2).contains(&slope), "slope {slope}, errors {errs:?}");
    }
}

#[test]
fn residual_matches_stencil_oracle() {
    let g = build_grid(&DomainSpec::interval(PI, 63)).unwrap();
    for c in cases(&g, 5) {
        let r = residual(&c.p, &g, &c.u).unwrap();
        let (a, b) = (c.u.u1.as_slice(), c.u.u2.as_slice());
        let l1 = support::neg_laplacian_1d(a, g.h[0]);
        let l2 = support::neg_laplacian_1d(b, g.h[0]);
        let p = &c.p;
        for i in 0..a.len() {
            let r1 = l1[i] - p.tau1 * a[i] - (p.mu1 * a[i].powi(3) + p.beta * b[i] * b[i] * a[i]);
            let r2 = l2[i] - p.tau2 * b[i] - (p.mu2 * b[i].powi(3) + p.beta * a[i] * a[i] * b[i]);
            assert!((r.u1[i] - r1).abs() <= 1e-9 * r1.abs().max(1.0));
            assert!((r.u2[i] - r2).abs() <= 1e-9 * r2.abs().max(1.0));
        }
    }
}
