//! Success-probability lower bounds for a fast-decaying signal, and how they
//! move with the number of sign measurements.

use hybrid_cs::theory::{binom_cdf, theorem5_bound, theorem6_bound, Theorem5Params, Theorem6Params};
use hybrid_cs::measurement::Signal;
use nalgebra::DVector;

fn main() -> hybrid_cs::Result<()> {
    let n = 64;
    let mut v = vec![0.0; n];
    for (k, i) in [3, 17, 40].into_iter().enumerate() {
        v[i] = 0.2f64.powi(k as i32);
    }
    let x = Signal::from_values(DVector::from_vec(v));

    println!("P(Bin(20, 0.3) <= 6) = {:.6}", binom_cdf(6, 20, 0.3)?);
    println!("{:>6} {:>12} {:>12}", "m_o", "detect", "modify");
    for m_o in [64, 256, 1024, 4096] {
        let detect = theorem5_bound(&Theorem5Params::default_schedule(x.clone(), m_o))?;
        let modify = theorem6_bound(&Theorem6Params::missing_smallest(x.clone(), m_o, 1)?)?;
        println!("{m_o:>6} {:>12.4e} {:>12.4e}", detect.raw, modify.raw);
    }
    println!("negative values mean the bound is vacuous at that size");
    Ok(())
}
