mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use relaxlab_core::lp::{
    besov_norm, block, block_norms, build_partition, chemin_lerner_norm, j_tau, lf_hf_split, phi, BesovSpec, TimeNorm,
};
use relaxlab_core::{Grid, SpectralField};

#[test]
fn partition_reconstruction_and_bernstein() {
    let r = common::lp_suite(21);
    assert!(r.unity_residual < 1e-10, "unity {:.3e}", r.unity_residual);
    assert!(r.reconstruction < 1e-12, "reconstruction {:.3e}", r.reconstruction);
    assert_eq!(r.bernstein_fields, 100);
    assert!(r.bernstein_min >= 0.75 && r.bernstein_max <= 8.0 / 3.0, "[{}, {}]", r.bernstein_min, r.bernstein_max);
}

#[test]
fn threshold_table() {
    assert_eq!(j_tau(1.0, -2), -2);
    assert_eq!(j_tau(0.125, -2), 1);
    assert_eq!(j_tau(0.3, -2), 0);
    let taus = [1.0, 0.7, 0.5, 0.3, 0.1, 0.01, 1e-3];
    for w in taus.windows(2) {
        assert!(j_tau(w[0], -2) <= j_tau(w[1], -2));
    }
}

#[test]
fn single_mode_norms() {
    let g = Grid::new(1, 64).unwrap();
    let part = build_partition(g).unwrap();
    let c = SpectralField::from_fn(g, |x| x[0].cos());
    let l2 = c.l2_norm();
    let s0 = besov_norm(&c, &BesovSpec::plain(0.0), &part);
    assert!((s0 - l2).abs() < 1e-12 * l2);
    let s1 = besov_norm(&c, &BesovSpec::plain(1.0), &part);
    let expected = (0.5 * phi(2.0) + phi(1.0)) * l2;
    assert!((s1 - expected).abs() < 1e-12 * l2, "{s1} vs {expected}");
    assert_eq!(besov_norm(&SpectralField::zeros(g), &BesovSpec::plain(1.0), &part), 0.0);
    let c4 = SpectralField::from_fn(g, |x| (4.0 * x[0]).cos());
    let b2 = block(&c4, 2, &part);
    for (a, v) in b2.phys().iter().zip(c4.phys()) {
        assert!((a - phi(1.0) * v).abs() < 1e-13);
    }
}

#[test]
fn low_high_split() {
    let g = Grid::new(1, 128).unwrap();
    let part = build_partition(g).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for tau in [1.0, 0.3, 0.05, 1e-3] {
        let u = common::random_field(g, 40, &mut rng);
        let (lo, hi) = lf_hf_split(&u, tau, -2, &part);
        let mean = u.mean();
        for i in 0..g.len() {
            assert!((lo.phys()[i] + hi.phys()[i] - (u.phys()[i] - mean)).abs() < 1e-12);
        }
        // Low part lives below 8/3·2^{J-1}, high part above 3/4·2^{J-1}.
        let cut = j_tau(tau, -2);
        for (i, (a, b)) in lo.hat().iter().zip(hi.hat()).enumerate() {
            let k = g.kmag(i);
            if k > 8.0 / 3.0 * 2f64.powi(cut - 1) {
                assert!(a.norm() < 1e-12);
            }
            if k < 0.75 * 2f64.powi(cut) {
                assert!(b.norm() < 1e-12);
            }
        }
    }
    let tiny = lf_hf_split(&SpectralField::from_fn(g, |x| x[0].sin()), 1e-6, -2, &part).1;
    assert!(tiny.max_abs() < 1e-14);
    let cos = SpectralField::from_fn(g, |x| x[0].cos());
    let (lo, hi) = lf_hf_split(&cos, 1.0, -2, &part);
    assert!(lo.max_abs() < 1e-14 && (hi.max_abs() - 1.0).abs() < 1e-12);
}

#[test]
fn besov_norm_is_homogeneous_and_subadditive() {
    let g = Grid::new(2, 32).unwrap();
    let part = build_partition(g).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for s in [-1.0, 0.0, 0.5, 2.0] {
        let spec = BesovSpec::plain(s);
        let u = common::random_field(g, 10, &mut rng);
        let v = common::random_field(g, 10, &mut rng);
        let nu = besov_norm(&u, &spec, &part);
        assert!((besov_norm(&u.scaled(-3.0), &spec, &part) - 3.0 * nu).abs() < 1e-12 * nu);
        let sum = SpectralField::from_phys(g, u.phys().iter().zip(v.phys()).map(|(a, b)| a + b).collect()).unwrap();
        assert!(besov_norm(&sum, &spec, &part) <= nu + besov_norm(&v, &spec, &part) + 1e-12);
    }
}

#[test]
fn low_and_high_norms_follow_the_overlapping_convention() {
    let g = Grid::new(1, 128).unwrap();
    let part = build_partition(g).unwrap();
    let u = common::random_field(g, 40, &mut ChaCha8Rng::seed_from_u64(2));
    let tau = 0.1;
    let cut = j_tau(tau, -2);
    let blocks = block_norms(&u, &part);
    let low: f64 = blocks.iter().filter(|(j, _)| *j <= cut).map(|(j, n)| 2f64.powi(*j) * n).sum();
    let high: f64 = blocks.iter().filter(|(j, _)| *j >= cut - 1).map(|(j, n)| 2f64.powi(*j) * n).sum();
    assert!((besov_norm(&u, &BesovSpec::low(1.0, tau), &part) - low).abs() < 1e-13 * low);
    assert!((besov_norm(&u, &BesovSpec::high(1.0, tau), &part) - high).abs() < 1e-13 * high);
}

#[test]
fn chemin_lerner_norms() {
    let g = Grid::new(1, 64).unwrap();
    let part = build_partition(g).unwrap();
    let c = SpectralField::from_fn(g, |x| x[0].cos());
    let spec = BesovSpec::plain(0.5);
    let b = besov_norm(&c, &spec, &part);
    let times: Vec<f64> = (0..11).map(|k| 0.3 * k as f64).collect();
    let constant = vec![c.clone(); times.len()];
    let sup = chemin_lerner_norm(&times, &constant, &spec, TimeNorm::Linf, &part).unwrap();
    assert!((sup - b).abs() < 1e-13 * b);
    let l1 = chemin_lerner_norm(&times, &constant, &spec, TimeNorm::L1, &part).unwrap();
    assert!((l1 - 3.0 * b).abs() < 1e-12 * b);

    // ∫₀^∞ e^{−t/ε} dt = ε, trapezoid on a fine grid out to 40ε.
    let eps = 0.05;
    let n = 8001;
    let ts: Vec<f64> = (0..n).map(|k| 40.0 * eps * k as f64 / (n - 1) as f64).collect();
    let fs: Vec<SpectralField> = ts.iter().map(|t| c.scaled((-t / eps).exp())).collect();
    let got = chemin_lerner_norm(&ts, &fs, &spec, TimeNorm::L1, &part).unwrap();
    assert!((got - eps * b).abs() < 1e-5 * eps * b, "{got} vs {}", eps * b);
}
