//! Recover a sparse signal from a few linear measurements plus many sign bits,
//! first with the greedy detector and then with the support-modification pass.

use hybrid_cs::measurement::{gen_gaussian_matrix, gen_noise_for_snr, gen_sparse_signal};
use hybrid_cs::recovery::default_max_iters;
use hybrid_cs::{algorithm1, algorithm2, HybridMeasurements, SignalSnr};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> hybrid_cs::Result<()> {
    let (n, s, m_r, m_o) = (128, 5, 16, 256);
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    let x = gen_sparse_signal(n, s, &mut rng)?;
    let u = gen_noise_for_snr(&x, SignalSnr::Db(25.0), &mut rng)?.u;
    let a_r = gen_gaussian_matrix(m_r, n, &mut rng)?;
    let a_o = gen_gaussian_matrix(m_o, n, &mut rng)?;
    let hm = HybridMeasurements::acquire(a_r, a_o, &(&x.values + &u))?;

    println!("true support      {}", x.support);
    let first = algorithm1(&hm, s)?;
    println!("detected          {} (pick order {:?})", first.support, first.order);
    println!("sign agreements   {:?} of {m_o}", first.satisfied_counts);

    let second = algorithm2(&hm, s, &first.support, default_max_iters(s))?;
    println!(
        "after modification {} in {} iterations (converged: {})",
        second.support, second.iterations, second.converged
    );

    for (name, est) in [("detector", &first.estimate), ("modified", &second.estimate)] {
        let err = (&x.values - &est.values).norm() / x.norm();
        println!("{name:>9}: relative error {err:.4}");
    }
    Ok(())
}
