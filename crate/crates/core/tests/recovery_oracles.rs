use hybrid_cs::measurement::{gen_gaussian_matrix, gen_sparse_signal};
use hybrid_cs::recovery::default_max_iters;
use hybrid_cs::{algorithm1, algorithm2, HybridMeasurements, SupportSet};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn instance(seed: u64, n: usize, s: usize, m_r: usize, m_o: usize) -> (HybridMeasurements, SupportSet) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = gen_sparse_signal(n, s, &mut rng).unwrap();
    let a_r = gen_gaussian_matrix(m_r, n, &mut rng).unwrap();
    let a_o = gen_gaussian_matrix(m_o, n, &mut rng).unwrap();
    (HybridMeasurements::acquire(a_r, a_o, &x.values).unwrap(), x.support)
}

// Scores a support through an SVD pseudo-inverse, independent of the library's QR path.
fn score(hm: &HybridMeasurements, t: &[usize]) -> usize {
    let a_t = DMatrix::from_fn(hm.a_r.rows(), t.len(), |i, k| hm.a_r.entries[(i, t[k])]);
    let z = a_t.clone().svd(true, true).solve(&hm.y_r, 1e-12).unwrap();
    let mut full = DVector::zeros(hm.n());
    for (k, &i) in t.iter().enumerate() {
        full[i] = z[k];
    }
    let proj = &hm.a_o.entries * full;
    proj.iter().zip(&hm.y_o).filter(|(v, &y)| f64::from(y) * **v >= 0.0).count()
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for last in (k - 1)..n {
        for mut head in subsets(last, k - 1) {
            head.push(last);
            out.push(head);
        }
    }
    out
}

#[test]
fn singleton_support_found_by_exhaustive_scoring() {
    let mut correct = 0;
    for seed in 0..100 {
        let (hm, truth) = instance(seed, 16, 1, 4, 64);
        let out = algorithm1(&hm, 1).unwrap();
        let best = (0..16).max_by_key(|&i| (score(&hm, &[i]), std::cmp::Reverse(i))).unwrap();
        assert_eq!(out.support.indices(), &[best], "seed {seed}");
        if out.support == truth {
            correct += 1;
        }
    }
    assert!(correct >= 95, "{correct}/100");
}

#[test]
fn pair_detection_matches_enumeration() {
    let mut matches = 0;
    for seed in 0..100 {
        let (hm, _) = instance(1000 + seed, 8, 2, 6, 128);
        let out = algorithm1(&hm, 2).unwrap();
        let best = subsets(8, 2).into_iter().map(|t| score(&hm, &t)).max().unwrap();
        if score(&hm, out.support.indices()) == best {
            matches += 1;
        }
    }
    assert!(matches >= 90, "{matches}/100");
}

#[test]
fn true_support_is_a_fixed_point() {
    let mut kept = 0;
    for seed in 0..100 {
        let (hm, truth) = instance(2000 + seed, 8, 2, 6, 128);
        let out = algorithm2(&hm, 2, &truth, default_max_iters(2)).unwrap();
        if out.support == truth && out.converged && out.iterations == 1 {
            kept += 1;
        }
    }
    assert!(kept >= 90, "{kept}/100");
}

#[test]
fn one_wrong_index_is_repaired() {
    let mut repaired = 0;
    for seed in 0..100 {
        let (hm, truth) = instance(3000 + seed, 16, 2, 8, 256);
        let keep = truth.indices()[0];
        let wrong = (0..16).find(|i| !truth.contains(*i)).unwrap();
        let start = SupportSet::new(vec![keep, wrong], 16).unwrap();
        let out = algorithm2(&hm, 2, &start, default_max_iters(2)).unwrap();
        if out.support == truth {
            repaired += 1;
        }
    }
    assert!(repaired >= 85, "{repaired}/100");
}

#[test]
fn detection_is_nested_and_residue_shrinks() {
    for seed in 0..20 {
        let (hm, _) = instance(4000 + seed, 64, 5, 20, 200);
        let out = algorithm1(&hm, 5).unwrap();
        assert_eq!(out.order.len(), 5);
        let mut sorted = out.order.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.as_slice(), out.support.indices());
        for w in out.residue_norms.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-12, "seed {seed}");
        }
    }
}

#[test]
fn output_support_size_is_s() {
    for seed in 0..10 {
        let (hm, truth) = instance(5000 + seed, 32, 4, 12, 64);
        let a1 = algorithm1(&hm, 4).unwrap();
        let a2 = algorithm2(&hm, 4, &a1.support, default_max_iters(4)).unwrap();
        assert_eq!(a1.support.len(), 4);
        assert_eq!(a2.support.len(), 4);
        assert!(a2.iterations <= default_max_iters(4));
        assert_eq!(truth.len(), 4);
    }
}
