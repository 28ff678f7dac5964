//! Empirical checks of random hyperplane tessellation geometry: separation
//! fractions, sign-flip probabilities, the Gaussian mean width of sparse unit
//! vectors, and the one-bit direction error bound for sparse signals.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::measurement::{
    binary_measure, gen_gaussian_matrix, gen_noise_for_snr, gen_sparse_signal, sign, MeasurementMatrix,
    SignalSnr, Signal,
};
use crate::stats::{mean_interval, wilson, Estimate, Z95};
use crate::support::{top_k_by_magnitude, SupportSet};

/// Outcome of one direction-error check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TessellationReport {
    /// `‖x/‖x‖ − x̂/‖x̂‖‖₂`.
    pub lhs: f64,
    /// `δ + d_A(x + u, x̂)`.
    pub rhs: f64,
    pub holds: bool,
    pub d_a: f64,
    /// Angle between `x` and `x̂` in radians.
    pub theta: f64,
}

/// Fraction of the rows of `a` whose hyperplanes separate `x` and `y`.
pub fn separation_fraction(a: &MeasurementMatrix, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
    if a.rows() == 0 {
        return Err(invalid("a", "need at least one hyperplane"));
    }
    let sx = binary_measure(a, x)?;
    let sy = binary_measure(a, y)?;
    let split = sx.iter().zip(&sy).filter(|(p, q)| p != q).count();
    Ok(split as f64 / a.rows() as f64)
}

/// Angle between two nonzero vectors, in `[0, π]`.
pub fn angle(x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
    if x.len() != y.len() {
        return Err(invalid("y", "vectors must have equal length"));
    }
    let (nx, ny) = (x.norm(), y.norm());
    if nx == 0.0 || ny == 0.0 {
        return Err(invalid("x", "angle needs two nonzero vectors"));
    }
    Ok((x.dot(y) / (nx * ny)).clamp(-1.0, 1.0).acos())
}

/// Monte Carlo estimate of `P{sign⟨a, x⟩ ≠ sign⟨a, y⟩}` over `n_rows` fresh
/// standard Gaussian rows.
pub fn sign_flip_rate<R: Rng + ?Sized>(x: &DVector<f64>, y: &DVector<f64>, n_rows: usize, rng: &mut R) -> Result<f64> {
    if x.len() != y.len() {
        return Err(invalid("y", "vectors must have equal length"));
    }
    if x.norm() == 0.0 || y.norm() == 0.0 {
        return Err(invalid("x", "sign flips need two nonzero vectors"));
    }
    if n_rows == 0 {
        return Err(invalid("n_rows", "need at least one row"));
    }
    let mut flips = 0usize;
    let mut row = DVector::zeros(x.len());
    for _ in 0..n_rows {
        row.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
        if sign(row.dot(x)) != sign(row.dot(y)) {
            flips += 1;
        }
    }
    Ok(flips as f64 / n_rows as f64)
}

/// Estimates `w(Σ′_{n,s}) = E sup_{q s-sparse, ‖q‖≤1} ⟨g, q⟩ = E‖[g]^s‖₂`,
/// where `[g]^s` keeps the `s` largest-magnitude entries of `g`.
pub fn gaussian_mean_width_sparse<R: Rng + ?Sized>(n: usize, s: usize, n_samples: usize, rng: &mut R) -> Result<Estimate> {
    if s == 0 || s > n {
        return Err(invalid("s", format!("need 1 <= s <= n (s = {s}, n = {n})")));
    }
    if n_samples == 0 {
        return Err(invalid("n_samples", "need at least one sample"));
    }
    let mut g = vec![0.0f64; n];
    let samples: Vec<f64> = (0..n_samples)
        .map(|_| {
            g.iter_mut().for_each(|v| *v = rng.sample::<f64, _>(StandardNormal).abs());
            g.select_nth_unstable_by(s - 1, |a, b| b.total_cmp(a));
            g[..s].iter().map(|v| v * v).sum::<f64>().sqrt()
        })
        .collect();
    Ok(mean_interval(&samples, Z95))
}

/// Checks `‖x/‖x‖ − x̂/‖x̂‖‖ ≤ δ + d_{A_o}(x + u, x̂)` for one instance.
pub fn theorem4_check(
    x: &Signal,
    u: &DVector<f64>,
    x_hat: &Signal,
    a_o: &MeasurementMatrix,
    delta: f64,
) -> Result<TessellationReport> {
    let (nx, nh) = (x.norm(), x_hat.norm());
    if nx == 0.0 || nh == 0.0 {
        return Err(invalid("x_hat", "both signal and estimate must be nonzero"));
    }
    if u.len() != x.n() || x_hat.n() != x.n() {
        return Err(invalid("u", "signal, noise and estimate must share one length"));
    }
    let lhs = (&x.values / nx - &x_hat.values / nh).norm();
    let x_tilde = &x.values + u;
    let d_a = separation_fraction(a_o, &x_tilde, &x_hat.values)?;
    let rhs = delta + d_a;
    Ok(TessellationReport {
        lhs,
        rhs,
        holds: lhs <= rhs,
        d_a,
        theta: angle(&x.values, &x_hat.values)?,
    })
}

/// The `s`-sparse direction estimate `H_s(A_oᵀ y_o)`, normalized to unit length.
pub fn sign_backprojection_estimate(a_o: &MeasurementMatrix, y_o: &[i8], s: usize) -> Result<Signal> {
    if y_o.len() != a_o.rows() {
        return Err(invalid("y_o", "need one sign per row of A_o"));
    }
    let n = a_o.cols();
    if s == 0 || s > n {
        return Err(invalid("s", format!("need 1 <= s <= n (s = {s}, n = {n})")));
    }
    let signs = DVector::from_iterator(y_o.len(), y_o.iter().map(|&v| f64::from(v)));
    let proxy = a_o.entries.tr_mul(&signs);
    let scored: Vec<(usize, f64)> = proxy.iter().copied().enumerate().collect();
    let support = SupportSet::new(top_k_by_magnitude(&scored, s), n)?;
    let mut values = DVector::zeros(n);
    for i in support.iter() {
        values[i] = proxy[i];
    }
    let norm = values.norm();
    if norm > 0.0 {
        values /= norm;
    }
    Ok(Signal { values, support })
}

/// Settings of a batch of direction-error checks.
#[derive(Clone, Copy, Debug)]
pub struct Theorem4Batch {
    pub n: usize,
    pub s: usize,
    pub m_o: usize,
    pub delta: f64,
    pub snr: SignalSnr,
    pub trials: usize,
    pub seed: u64,
}

/// Aggregate of a [`Theorem4Batch`].
#[derive(Clone, Debug)]
pub struct Theorem4Summary {
    pub reports: Vec<TessellationReport>,
    pub holds: usize,
    pub rate: Estimate,
}

/// Each trial draws a sparse signal, calibrated noise and a fresh `A_o`, then
/// checks the bound for the back-projection estimate.
pub fn theorem4_batch(cfg: &Theorem4Batch) -> Result<Theorem4Summary> {
    if cfg.trials == 0 {
        return Err(invalid("trials", "need at least one trial"));
    }
    let reports = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(t);
            let x = gen_sparse_signal(cfg.n, cfg.s, &mut rng)?;
            let u = gen_noise_for_snr(&x, cfg.snr, &mut rng)?.u;
            let a_o = gen_gaussian_matrix(cfg.m_o, cfg.n, &mut rng)?;
            let y_o = binary_measure(&a_o, &(&x.values + &u))?;
            let x_hat = sign_backprojection_estimate(&a_o, &y_o, cfg.s)?;
            theorem4_check(&x, &u, &x_hat, &a_o, cfg.delta)
        })
        .collect::<Result<Vec<_>>>()?;
    let holds = reports.iter().filter(|r| r.holds).count();
    Ok(Theorem4Summary {
        rate: wilson(holds, reports.len(), Z95),
        holds,
        reports,
    })
}
