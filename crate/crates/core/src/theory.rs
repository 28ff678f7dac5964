//! Binomial tail machinery and the success-probability lower bounds of the
//! two hybrid algorithms.
//!
//! Angles are expressed as fractions of π, i.e. as the probability that a
//! random Gaussian hyperplane separates two vectors at that angle; they are
//! fed directly into the regularized incomplete beta function.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;
use std::f64::consts::{FRAC_2_PI, PI, SQRT_2};

use crate::error::{invalid, Error, Result};
use crate::measurement::Signal;
use crate::recovery::kappa;
use crate::stats::{wilson, Estimate, Z95};
use crate::support::SupportSet;

const CF_MAX_ITER: usize = 10_000;
const CF_EPS: f64 = 1e-16;
const CF_TINY: f64 = 1e-300;

/// Regularized incomplete beta function `I_x(a, b)` for `x ∈ [0, 1]`, `a, b > 0`.
///
/// Evaluated with the modified Lentz continued fraction, switching to
/// `1 − I_{1−x}(b, a)` beyond the mean so the fraction converges quickly.
pub fn reg_inc_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(invalid("a", format!("shape must be positive and finite, got {a}")));
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(invalid("b", format!("shape must be positive and finite, got {b}")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(invalid("x", format!("must lie in [0, 1], got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let ln_front = a * x.ln() + b * (1.0 - x).ln() - ln_beta(a, b);
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok(ln_front.exp() * beta_cf(x, a, b) / a)
    } else {
        Ok(1.0 - ln_front.exp() * beta_cf(1.0 - x, b, a) / b)
    }
}

fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

fn beta_cf(x: f64, a: f64, b: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < CF_TINY {
        d = CF_TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < CF_TINY {
            d = CF_TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < CF_TINY {
            c = CF_TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < CF_TINY {
            d = CF_TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < CF_TINY {
            c = CF_TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < CF_EPS {
            break;
        }
    }
    h
}

/// `I_x(a, b)` extended to a zero second shape parameter by its limit:
/// as `b → 0` all mass of `Beta(a, b)` moves to 1, so `I_x(a, 0) = 0` for `x < 1`.
fn beta_term(x: f64, a: f64, b: f64) -> Result<f64> {
    if b == 0.0 {
        return Ok(if x < 1.0 { 0.0 } else { 1.0 });
    }
    reg_inc_beta(x, a, b)
}

/// `P{X ≤ k}` for `X ~ Binomial(n_prime, p)`, computed as `I_{1−p}(n′ − k, k + 1)`.
pub fn binom_cdf(k: u64, n_prime: u64, p: f64) -> Result<f64> {
    if k > n_prime {
        return Err(invalid("k", format!("k = {k} exceeds n' = {n_prime}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid("p", format!("must lie in [0, 1], got {p}")));
    }
    if k == n_prime {
        return Ok(1.0);
    }
    reg_inc_beta(1.0 - p, (n_prime - k) as f64, (k + 1) as f64)
}

/// A lower bound as evaluated, and the same value clamped into `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundValue {
    pub raw: f64,
    pub clamped: f64,
}

impl BoundValue {
    fn new(raw: f64) -> Self {
        BoundValue {
            raw,
            clamped: raw.clamp(0.0, 1.0),
        }
    }

    /// True when the bound carries no information (`raw ≤ 0`).
    pub fn is_vacuous(&self) -> bool {
        self.raw <= 0.0
    }
}

fn check_signal(x: &Signal) -> Result<f64> {
    let norm = x.norm();
    if norm == 0.0 || x.sparsity() == 0 {
        return Err(invalid("x", "signal must be nonzero"));
    }
    Ok(norm)
}

fn asin_fraction(arg: f64, what: &str) -> Result<f64> {
    if !(-1.0..=1.0).contains(&arg) {
        return Err(Error::OutOfRegime(format!("{what}: arcsine argument {arg} outside [-1, 1]")));
    }
    Ok(arg.asin() / PI)
}

fn acos_fraction(ratio: f64) -> f64 {
    ratio.clamp(-1.0, 1.0).acos() / PI
}

/// Requires `‖x‖ ≥ √2 · ‖x_rest‖`.
fn check_dominance(norm: f64, rest: f64) -> Result<()> {
    if norm < SQRT_2 * rest {
        return Err(Error::OutOfRegime(format!(
            "‖x‖ / ‖x_rest‖ = {:.6} is below √2",
            norm / rest
        )));
    }
    Ok(())
}

/// `(θ_{j,1}, θ_{j,2})` for detection step `j` of the first algorithm.
///
/// With support ordered `i_1, …, i_s` by decreasing magnitude:
/// `θ_{j,1} = asin(1 − √2(‖x_{Ω∖i_1}‖ − ‖x_{Ω∖{i_1..i_j}}‖)/‖x‖)/π` and
/// `θ_{j,2} = acos(‖x_{{i_1..i_{j−1}, i_{j+1}}}‖/‖x‖)/π`.
pub fn theta_angles_thm5(x: &Signal, j: usize) -> Result<(f64, f64)> {
    let norm = check_signal(x)?;
    let order = x.support_by_magnitude();
    let s = order.len();
    if j == 0 || j > s {
        return Err(invalid("j", format!("iteration must lie in 1..={s}, got {j}")));
    }
    let tail_first = x.restricted_norm(order[1..].iter().copied());
    check_dominance(norm, tail_first)?;
    let tail_j = x.restricted_norm(order[j..].iter().copied());
    let theta1 = asin_fraction(1.0 - SQRT_2 * (tail_first - tail_j) / norm, "θ_{j,1}")?;
    let near = order[..j - 1].iter().chain(order.get(j)).copied();
    let theta2 = acos_fraction(x.restricted_norm(near) / norm);
    Ok((theta1, theta2))
}

/// Parameters of the detection bound for the first algorithm.
///
/// `c` and `n_thr` are indexed by iteration (`c[0]` ↔ `j = 1`); `c[0]` is unused.
#[derive(Clone, Debug)]
pub struct Theorem5Params {
    pub x: Signal,
    pub m_o: usize,
    pub c: Vec<f64>,
    pub n_thr: Vec<usize>,
}

/// Reference value used by [`Theorem5Params::default_schedule`].
pub const DEFAULT_C: f64 = 0.1;
/// Threshold fraction of `m_o` used by the default schedules.
pub const DEFAULT_THRESHOLD_FRACTION: f64 = 0.75;

/// `⌈0.75·m_o⌉`.
pub fn default_threshold(m_o: usize) -> usize {
    ((DEFAULT_THRESHOLD_FRACTION * m_o as f64).ceil() as usize).clamp(1, m_o.max(1))
}

impl Theorem5Params {
    /// `c_j = 0.1`, `n_j = ⌈0.75·m_o⌉` for every iteration.
    pub fn default_schedule(x: Signal, m_o: usize) -> Self {
        let s = x.sparsity();
        Theorem5Params {
            x,
            m_o,
            c: vec![DEFAULT_C; s],
            n_thr: vec![default_threshold(m_o); s],
        }
    }
}

fn check_thresholds(name: &'static str, thr: &[usize], needed: usize, m_o: usize) -> Result<()> {
    if thr.len() < needed {
        return Err(invalid(name, format!("need {needed} thresholds, got {}", thr.len())));
    }
    if let Some(bad) = thr[..needed].iter().find(|&&t| t == 0 || t > m_o) {
        return Err(invalid(name, format!("threshold {bad} outside 1..={m_o}")));
    }
    Ok(())
}

/// Single-iteration detection factor
/// `1 − I_{θ1}(m_o − t + 1, t) − rivals·[1 − I_{θ2}(m_o − t + 1, t)]`.
fn detection_factor(theta1: f64, theta2: f64, m_o: usize, t: usize, rivals: f64) -> Result<f64> {
    let a = (m_o - t + 1) as f64;
    let b = t as f64;
    Ok(1.0 - reg_inc_beta(theta1, a, b)? - rivals * (1.0 - reg_inc_beta(theta2, a, b)?))
}

/// Multiplies the per-step factors. Each factor is at most 1, but two negative
/// ones would multiply into a spurious positive value, so a nonpositive factor
/// makes the bound vacuous and is reported as the raw value (the smallest one).
fn combine(factors: &[f64]) -> f64 {
    match factors.iter().copied().reduce(f64::min) {
        Some(worst) if worst <= 0.0 => worst,
        _ => factors.iter().product(),
    }
}

/// Lower bound on the probability that the first algorithm detects the full
/// support after `s` iterations.
pub fn theorem5_bound(p: &Theorem5Params) -> Result<BoundValue> {
    check_signal(&p.x)?;
    let n = p.x.n();
    let s = p.x.sparsity();
    if p.m_o == 0 {
        return Err(invalid("m_o", "need at least one binary measurement"));
    }
    if p.c.len() != s {
        return Err(invalid("c", format!("need {s} reference values, got {}", p.c.len())));
    }
    if let Some(bad) = p.c[1..].iter().find(|&&c| !(c > 0.0 && c.is_finite())) {
        return Err(invalid("c", format!("reference values must be positive, got {bad}")));
    }
    check_thresholds("n_thr", &p.n_thr, s, p.m_o)?;

    let mut factors = Vec::with_capacity(3 * s);
    for j in 2..=s {
        let c = p.c[j - 1];
        let k = kappa(j, s, n).min(n - j + 1);
        let tail = beta_term((-c * c / 2.0).exp(), k as f64, (n - j + 1 - k) as f64)?;
        factors.push(1.0 - FRAC_2_PI.sqrt() * c);
        factors.push(1.0 - tail);
    }
    for j in 1..=s {
        let (t1, t2) = theta_angles_thm5(&p.x, j)?;
        let k = kappa(j, s, n).min(n - j + 1);
        factors.push(detection_factor(t1, t2, p.m_o, p.n_thr[j - 1], k as f64 - 1.0)?);
    }
    Ok(BoundValue::new(combine(&factors)))
}

/// Parameters of the modification bound for the second algorithm.
///
/// `detected` is the correctly detected part of the initial guess; the
/// remaining `s′ = s − |detected|` support indices are the ones to be found.
#[derive(Clone, Debug)]
pub struct Theorem6Params {
    pub x: Signal,
    pub m_o: usize,
    pub detected: SupportSet,
    pub n_hat: Vec<usize>,
    pub n_tilde: Vec<usize>,
    /// Number of product terms; defaults to `s′`.
    pub product_range: Option<usize>,
}

impl Theorem6Params {
    /// Marks the `s_prime` smallest-magnitude support entries as missed and
    /// uses `⌈0.75·m_o⌉` for every threshold.
    pub fn missing_smallest(x: Signal, m_o: usize, s_prime: usize) -> Result<Self> {
        let order = x.support_by_magnitude();
        if s_prime > order.len() {
            return Err(invalid("s_prime", format!("cannot miss {s_prime} of {} indices", order.len())));
        }
        let detected = SupportSet::new(order[..order.len() - s_prime].to_vec(), x.n())?;
        Ok(Theorem6Params {
            x,
            m_o,
            detected,
            n_hat: vec![default_threshold(m_o); s_prime],
            n_tilde: vec![default_threshold(m_o); s_prime],
            product_range: None,
        })
    }

    pub fn s_prime(&self) -> usize {
        self.x.sparsity() - self.detected.len()
    }
}

/// Angles `(θ̂_{j,1}, θ̂_{j,2}, θ̃_{j,2})` for modification step `j`.
pub fn theta_angles_thm6(x: &Signal, detected: &SupportSet, j: usize) -> Result<(f64, f64, f64)> {
    let norm = check_signal(x)?;
    if !detected.is_subset(&x.support) {
        return Err(invalid("detected", "must be a subset of the signal support"));
    }
    let missed: Vec<usize> = x.support_by_magnitude().into_iter().filter(|&i| !detected.contains(i)).collect();
    let s_prime = missed.len();
    if j == 0 || j > s_prime {
        return Err(invalid("j", format!("iteration must lie in 1..={s_prime}, got {j}")));
    }
    // ‖x_{Ω ∖ (Ω̃₀ ∪ {i_1..i_k})}‖ is the norm of the missed entries after i_k.
    let rest_after = |k: usize| x.restricted_norm(missed[k..].iter().copied());
    let rest_first = rest_after(1);
    check_dominance(norm, rest_first)?;

    let theta_hat1 = asin_fraction(1.0 - SQRT_2 * (rest_first - rest_after(j)) / norm, "θ̂_{j,1}")?;

    let before: Vec<usize> = detected.iter().chain(missed[..j - 1].iter().copied()).collect();
    let hat2_set = before.iter().copied().chain(missed.get(j).copied());
    let theta_hat2 = acos_fraction(x.restricted_norm(hat2_set) / norm);

    let found: Vec<usize> = before.iter().copied().chain(std::iter::once(missed[j - 1])).collect();
    let weakest = found
        .iter()
        .copied()
        .min_by(|&a, &b| x.values[a].abs().total_cmp(&x.values[b].abs()).then(a.cmp(&b)))
        .expect("nonempty");
    let theta_tilde2 = acos_fraction(x.restricted_norm(found.iter().copied().filter(|&i| i != weakest)) / norm);
    Ok((theta_hat1, theta_hat2, theta_tilde2))
}

/// Lower bound on the probability that the second algorithm turns the
/// initial guess into the true support after `s′` iterations.
pub fn theorem6_bound(p: &Theorem6Params) -> Result<BoundValue> {
    check_signal(&p.x)?;
    let n = p.x.n();
    let s = p.x.sparsity();
    let s_prime = p.s_prime();
    if !p.detected.is_subset(&p.x.support) {
        return Err(invalid("detected", "must be a subset of the signal support"));
    }
    let range = p.product_range.unwrap_or(s_prime);
    if range > s_prime {
        return Err(invalid(
            "product_range",
            format!("terms beyond s' = {s_prime} reference undefined support indices"),
        ));
    }
    if range == 0 {
        return Ok(BoundValue::new(1.0));
    }
    if p.m_o == 0 {
        return Err(invalid("m_o", "need at least one binary measurement"));
    }
    if s >= n {
        return Err(invalid("x", "need at least one index outside the support"));
    }
    check_thresholds("n_hat", &p.n_hat, range, p.m_o)?;
    check_thresholds("n_tilde", &p.n_tilde, range, p.m_o)?;

    let mut factors = Vec::with_capacity(2 * range);
    for j in 1..=range {
        let (hat1, hat2, tilde2) = theta_angles_thm6(&p.x, &p.detected, j)?;
        let augment = detection_factor(hat1, hat2, p.m_o, p.n_hat[j - 1], (n - s - 1) as f64)?;

        let t = p.n_tilde[j - 1];
        let (a, b) = ((p.m_o - t + 1) as f64, t as f64);
        let keep = (s - s_prime + j) as f64;
        let lose = (s_prime - j + 1) as f64;
        let prune = 1.0 - keep * reg_inc_beta(hat1, a, b)? - lose * (1.0 - reg_inc_beta(tilde2, a, b)?);
        factors.push(augment);
        factors.push(prune);
    }
    Ok(BoundValue::new(combine(&factors)))
}

/// Fraction of successful trials with a Wilson 95% interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuccessRate {
    pub successes: usize,
    pub trials: usize,
    pub rate: Estimate,
}

impl SuccessRate {
    /// One binomial standard deviation at the observed rate.
    pub fn sd(&self) -> f64 {
        crate::stats::binomial_sd(self.rate.value, self.trials)
    }
}

/// Runs `trial` `n_trials` times, each with its own ChaCha stream derived from
/// `master_seed`, and reports the success frequency. The result does not
/// depend on how rayon schedules the trials.
pub fn empirical_success_rate<F>(trial: F, n_trials: usize, master_seed: u64) -> Result<SuccessRate>
where
    F: Fn(&mut ChaCha8Rng) -> bool + Sync,
{
    if n_trials == 0 {
        return Err(invalid("n_trials", "need at least one trial"));
    }
    let successes = (0..n_trials as u64)
        .into_par_iter()
        .filter(|&t| {
            let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
            rng.set_stream(t);
            trial(&mut rng)
        })
        .count();
    Ok(SuccessRate {
        successes,
        trials: n_trials,
        rate: wilson(successes, n_trials, Z95),
    })
}
