mod support;

use nlss_core::levels::{h_aux, h_inf};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn triples() -> Vec<(f64, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut out: Vec<(f64, f64, f64)> = (0..40)
        .map(|_| (rng.gen_range(0.2..5.0), rng.gen_range(0.2..5.0), rng.gen_range(0.05..12.0)))
        .collect();
    // β between the two μ: the infimum sits at an endpoint
    for _ in 0..10 {
        let m1 = rng.gen_range(0.2..2.0);
        let m2 = m1 + rng.gen_range(0.5..3.0);
        out.push((m1, m2, rng.gen_range(m1..m2)));
    }
    out
}

#[test]
fn closed_form_matches_dense_scan() {
    for (m1, m2, b) in triples() {
        let (v, x) = h_inf(m1, m2, b);
        let scan = support::h_inf_scan(m1, m2, b, 1e-6);
        assert!((v - scan).abs() <= 1e-10, "({m1}, {m2}, {b}): {v} vs {scan}");
        let at = h_aux(m1, m2, b, x.sqrt(), (1.0 - x).sqrt()).unwrap();
        assert!((at - v).abs() <= 1e-12 * v);
    }
}

#[test]
fn endpoint_regime_gives_reciprocal_root_of_largest_mu() {
    for (m1, m2, b) in triples().into_iter().skip(40) {
        let (v, x) = h_inf(m1, m2, b);
        assert_eq!(x, 0.0);
        assert!((v - 1.0 / m2.sqrt()).abs() <= 1e-14);
    }
}
