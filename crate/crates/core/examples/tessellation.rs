//! Random hyperplanes: the sign-flip rate between two vectors approaches their
//! angle over π, and the sign back-projection estimate lands inside the cell
//! predicted by the separation fraction.

use std::f64::consts::PI;

use hybrid_cs::measurement::SignalSnr;
use hybrid_cs::tessellation::{angle, sign_flip_rate, theorem4_batch, Theorem4Batch};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> hybrid_cs::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = DVector::from_vec(vec![1.0, 0.2, -0.4, 0.0]);
    let y = DVector::from_vec(vec![0.6, 0.9, -0.1, 0.3]);
    let theta = angle(&x, &y)? / PI;
    for rows in [100, 1_000, 10_000, 100_000] {
        let rate = sign_flip_rate(&x, &y, rows, &mut rng)?;
        println!("{rows:>7} rows: flip rate {rate:.4}  (θ/π = {theta:.4})");
    }

    let summary = theorem4_batch(&Theorem4Batch {
        n: 128,
        s: 4,
        m_o: 2048,
        delta: 0.5,
        snr: SignalSnr::Db(30.0),
        trials: 100,
        seed: 9,
    })?;
    let worst = summary.reports.iter().map(|r| r.rhs - r.lhs).fold(f64::INFINITY, f64::min);
    println!(
        "direction bound held in {}/100 trials (95% CI {:.3}..{:.3}), smallest slack {worst:.3}",
        summary.holds, summary.rate.lower, summary.rate.upper
    );
    Ok(())
}
