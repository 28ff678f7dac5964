//! OMP, SP and CoSaMP on the same instance at a matched bit budget:
//! 2s real measurements against 1.5s reals plus 16s sign bits (64s bits each).

use hybrid_cs::baselines::{cosamp, omp, sp};
use hybrid_cs::experiment::recovery_ratio;
use hybrid_cs::measurement::{gen_gaussian_matrix, gen_noise_for_snr, gen_sparse_signal, linear_measure};
use hybrid_cs::recovery::default_max_iters;
use hybrid_cs::{algorithm1, algorithm2, HybridMeasurements, SignalSnr};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> hybrid_cs::Result<()> {
    let (n, s) = (256, 4);
    let (m_r, m_o, m) = (6, 64, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let x = gen_sparse_signal(n, s, &mut rng)?;
    let x_tilde = &x.values + gen_noise_for_snr(&x, SignalSnr::Db(20.0), &mut rng)?.u;

    let a = gen_gaussian_matrix(m, n, &mut rng)?;
    let y = linear_measure(&a, &x_tilde)?;
    let hm = HybridMeasurements::acquire(
        gen_gaussian_matrix(m_r, n, &mut rng)?,
        gen_gaussian_matrix(m_o, n, &mut rng)?,
        &x_tilde,
    )?;

    let first = algorithm1(&hm, s)?;
    let second = algorithm2(&hm, s, &first.support, default_max_iters(s))?;
    let runs = [
        ("alg1", first),
        ("alg2", second),
        ("omp", omp(&a, &y, s)?),
        ("sp", sp(&a, &y, s)?),
        ("cosamp", cosamp(&a, &y, s)?),
    ];
    println!("{:<7} {:>9} {:>7}", "method", "SNR (dB)", "hits");
    for (name, r) in runs {
        let db = 10.0 * recovery_ratio(&x.values, &r.estimate.values).log10();
        let hits = r.support.iter().filter(|&i| x.support.contains(i)).count();
        println!("{name:<7} {db:>9.2} {hits:>4}/{s}");
    }
    Ok(())
}
