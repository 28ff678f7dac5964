//! Monte Carlo Gaussian mean width of unit-norm s-sparse vectors, next to the
//! usual sqrt(2 s log(2n/s)) scale.

use hybrid_cs::tessellation::gaussian_mean_width_sparse;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> hybrid_cs::Result<()> {
    let n = 256;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    println!("{:>4} {:>9} {:>19} {:>9}", "s", "width", "95% CI", "scale");
    for s in [1, 2, 4, 8, 16, 32, 64] {
        let w = gaussian_mean_width_sparse(n, s, 4000, &mut rng)?;
        let scale = (2.0 * s as f64 * (2.0 * n as f64 / s as f64).ln()).sqrt();
        println!("{s:>4} {:>9.4} [{:>8.4}, {:>8.4}] {scale:>9.4}", w.value, w.lower, w.upper);
    }
    Ok(())
}
