use hybrid_cs::measurement::{gen_gaussian_matrix, Signal};
use hybrid_cs::recovery::kappa;
use hybrid_cs::theory::{
    binom_cdf, empirical_success_rate, reg_inc_beta, theorem5_bound, theorem6_bound, theta_angles_thm5,
    theta_angles_thm6, Theorem5Params, Theorem6Params,
};
use hybrid_cs::{algorithm1, HybridMeasurements};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use std::f64::consts::PI;

fn choose(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn pmf(k: u64, n: u64, p: f64) -> f64 {
    choose(n, k) * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
}

fn direct_cdf(k: u64, n: u64, p: f64) -> f64 {
    (0..=k).map(|i| pmf(i, n, p)).sum()
}

// I_x(a, b) for integer shapes is P{Bin(a + b − 1, x) ≥ a}.
fn beta_by_sum(x: f64, a: u64, b: u64) -> f64 {
    let n = a + b - 1;
    (a..=n).map(|i| pmf(i, n, x)).sum()
}

fn signal(values: &[f64]) -> Signal {
    Signal::from_values(DVector::from_column_slice(values))
}

#[test]
fn binomial_cdf_matches_direct_summation() {
    let ps: Vec<f64> = std::iter::once(0.01).chain((1..=9).map(|i| i as f64 / 10.0)).chain([0.99]).collect();
    let mut worst: f64 = 0.0;
    for n in 1..=60u64 {
        for k in 0..=n {
            for &p in &ps {
                worst = worst.max((binom_cdf(k, n, p).unwrap() - direct_cdf(k, n, p)).abs());
            }
        }
    }
    assert!(worst <= 1e-12, "max error {worst:e}");
}

#[test]
fn beta_matches_quadrature() {
    // Composite Simpson on t³(1 − t)/B(4, 2), B(4, 2) = 1/20.
    let steps = 2000;
    let h = 0.3 / steps as f64;
    let f = |t: f64| 20.0 * t.powi(3) * (1.0 - t);
    let mut sum = f(0.0) + f(0.3);
    for i in 1..steps {
        sum += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    let oracle = sum * h / 3.0;
    assert!((reg_inc_beta(0.3, 4.0, 2.0).unwrap() - oracle).abs() <= 1e-10);
}

#[test]
fn beta_symmetry_and_monotonicity() {
    for &(a, b) in &[(0.5, 0.5), (2.0, 7.0), (30.0, 4.5), (200.0, 180.0), (1.0, 1000.0)] {
        let mut prev = 0.0;
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            let v = reg_inc_beta(x, a, b).unwrap();
            assert!(v >= prev - 1e-15, "({a}, {b}) at {x}");
            assert!((v + reg_inc_beta(1.0 - x, b, a).unwrap() - 1.0).abs() <= 1e-12);
            prev = v;
        }
    }
}

#[test]
fn equal_magnitude_angles() {
    let x = signal(&[0.0, 2.0, 0.0, -2.0, 0.0]);
    let norm = 8f64.sqrt();
    let (t11, t12) = theta_angles_thm5(&x, 1).unwrap();
    assert!((t11 - 0.5).abs() < 1e-15);
    assert!((t12 - (2.0 / norm).acos() / PI).abs() < 1e-15);
    let (t21, t22) = theta_angles_thm5(&x, 2).unwrap();
    assert!((t21 - (1.0 - 2f64.sqrt() * 2.0 / norm).asin() / PI).abs() < 1e-15);
    assert!((t22 - (2.0 / norm).acos() / PI).abs() < 1e-15);
    for v in [t11, t12, t21, t22] {
        assert!((0.0..=1.0).contains(&v));
    }
}

fn factor(t1: f64, t2: f64, m_o: u64, t: u64, rivals: f64) -> f64 {
    let (a, b) = (m_o - t + 1, t);
    1.0 - beta_by_sum(t1, a, b) - rivals * (1.0 - beta_by_sum(t2, a, b))
}

// Product of the factors, or the smallest one when any is nonpositive.
fn recombine(parts: &[f64]) -> f64 {
    let worst = parts.iter().copied().fold(f64::INFINITY, f64::min);
    if worst <= 0.0 {
        worst
    } else {
        parts.iter().product()
    }
}

#[test]
fn theorem5_recomposed_from_binomial_sums() {
    let x = signal(&[0.0, 3.0, 0.0, 0.0, -1.0, 0.0]);
    let (n, m_o) = (6u64, 40u64);
    let params = Theorem5Params {
        x: x.clone(),
        m_o: m_o as usize,
        c: vec![0.0, 0.5],
        n_thr: vec![20, 20],
    };
    let got = theorem5_bound(&params).unwrap();

    let norm = 10f64.sqrt();
    let th11 = 0.5;
    let th12 = (1.0 / norm).acos() / PI;
    let th21 = (1.0 - 2f64.sqrt() / norm).asin() / PI;
    let th22 = (3.0 / norm).acos() / PI;
    // κ_1 = 6, κ_2 = 3 for n = 6, s = 2.
    let c = 0.5f64;
    let parts = [
        1.0 - (2.0 / PI).sqrt() * c,
        1.0 - beta_by_sum((-c * c / 2.0).exp(), 3, 2),
        factor(th11, th12, m_o, 20, 5.0),
        factor(th21, th22, m_o, 20, 2.0),
    ];
    let oracle = recombine(&parts);
    assert_eq!(kappa(2, 2, n as usize), 3);
    assert!((got.raw - oracle).abs() <= 1e-12, "{} vs {oracle}", got.raw);
    assert!(got.raw <= 1.0);
    assert_eq!(got.clamped, got.raw.clamp(0.0, 1.0));
}

#[test]
fn theorem6_single_term_recomposed() {
    let x = signal(&[0.0, 4.0, 0.0, 0.0, -3.0, 1.0, 0.0, 0.0]);
    let (n, s, m_o, t) = (8.0, 3.0, 64u64, 40u64);
    let p = Theorem6Params::missing_smallest(x.clone(), m_o as usize, 1).unwrap();
    let p = Theorem6Params {
        n_hat: vec![t as usize],
        n_tilde: vec![t as usize],
        ..p
    };
    let got = theorem6_bound(&p).unwrap();
    let theta = (5.0 / 26f64.sqrt()).acos() / PI;
    let augment = factor(0.5, theta, m_o, t, n - s - 1.0);
    let (a, b) = (m_o - t + 1, t);
    let prune = 1.0 - 3.0 * beta_by_sum(0.5, a, b) - (1.0 - beta_by_sum(theta, a, b));
    assert!((got.raw - recombine(&[augment, prune])).abs() <= 1e-12);

    let (h1, h2, t2) = theta_angles_thm6(&x, &p.detected, 1).unwrap();
    assert_eq!(h1, 0.5);
    assert!((h2 - theta).abs() < 1e-15 && (t2 - theta).abs() < 1e-15);
}

#[test]
fn nothing_to_fix_gives_one() {
    let x = signal(&[1.0, 0.0, 2.0, 0.0]);
    let p = Theorem6Params::missing_smallest(x, 16, 0).unwrap();
    assert_eq!(theorem6_bound(&p).unwrap().raw, 1.0);
}

#[test]
fn bounds_never_exceed_one_and_fall_with_theta() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let n = rng.random_range(4..40);
        let s = rng.random_range(1..4.min(n));
        let mut v = vec![0.0; n];
        let lead = rng.random_range(5.0..10.0);
        v[0] = lead;
        for item in v.iter_mut().take(s).skip(1) {
            *item = rng.random_range(0.1..1.0);
        }
        let m_o = rng.random_range(8..400);
        let x = signal(&v);
        if let Ok(b) = theorem5_bound(&Theorem5Params::default_schedule(x.clone(), m_o)) {
            assert!(b.raw <= 1.0);
        }
        if let Ok(p) = Theorem6Params::missing_smallest(x, m_o, s - 1) {
            if let Ok(b) = theorem6_bound(&p) {
                assert!(b.raw <= 1.0);
            }
        }
    }
    // Growing the second entry raises θ_{2,1}; the bound may not increase.
    let mut prev = f64::INFINITY;
    for second in [0.1, 0.3, 0.6, 1.0] {
        let x = signal(&[5.0, second, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let p = Theorem5Params {
            x,
            m_o: 200,
            c: vec![0.0, 0.1],
            n_thr: vec![100, 100],
        };
        let raw = theorem5_bound(&p).unwrap().raw;
        assert!(raw <= prev + 1e-12);
        prev = raw;
    }
}

#[test]
fn fair_coin_stub() {
    let rate = empirical_success_rate(|rng| rng.random_bool(0.5), 10_000, 11).unwrap();
    let sd = (0.25f64 / 10_000.0).sqrt();
    assert!((rate.rate.value - 0.5).abs() <= 3.0 * sd);
    assert_eq!(empirical_success_rate(|_| true, 50, 0).unwrap().rate.value, 1.0);
    assert_eq!(empirical_success_rate(|_| false, 50, 0).unwrap().rate.value, 0.0);
}

#[test]
fn strong_bounds_are_not_beaten_by_measurement() {
    let mut checked = 0;
    for &(n, m_o) in &[(16usize, 256usize), (16, 1024), (32, 1024)] {
        for lead in [4.0, 10.0] {
            let mut v = vec![0.0; n];
            v[0] = lead;
            v[1] = 1.0;
            let x = signal(&v);
            let bound = theorem5_bound(&Theorem5Params::default_schedule(x.clone(), m_o)).unwrap();
            if bound.raw < 0.5 {
                continue;
            }
            checked += 1;
            let truth = x.support.clone();
            let rate = empirical_success_rate(
                |rng| {
                    let a_r = gen_gaussian_matrix(8, n, rng).unwrap();
                    let a_o = gen_gaussian_matrix(m_o, n, rng).unwrap();
                    let hm = HybridMeasurements::acquire(a_r, a_o, &x.values).unwrap();
                    algorithm1(&hm, 2).map(|r| r.support == truth).unwrap_or(false)
                },
                200,
                3,
            )
            .unwrap();
            assert!(rate.rate.value >= bound.raw - 3.0 * rate.sd());
        }
    }
    // At these sizes every bound so far has been vacuous.
    eprintln!("strong-bound instances checked: {checked}");
}
