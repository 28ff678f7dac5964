//! Hybrid greedy recovery: support detection by binary-inequality checking
//! with least-squares residue updates, and support modification by
//! augment-then-prune.
//!
//! Both algorithms score a candidate support `T` by solving the linear
//! least-squares problem on `A_r[:, T]`, mapping the coefficients through
//! `A_o[:, T]`, and counting how many one-bit measurements agree in sign.
//! All argmax steps break ties toward the smallest index (or the
//! lexicographically smallest subset), so results are reproducible.

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::linalg::{restricted_mul, ColumnQr};
use crate::measurement::{HybridMeasurements, MeasurementMatrix, Signal};
use crate::support::{top_k_by_magnitude, SupportSet};

/// Output of any recovery routine in this crate.
#[derive(Clone, Debug)]
pub struct RecoveryResult {
    pub estimate: Signal,
    pub support: SupportSet,
    pub iterations: usize,
    /// Winning satisfied-inequality count of each iteration (hybrid algorithms only).
    pub satisfied_counts: Vec<usize>,
    pub converged: bool,
    /// Indices in the order they were added (detection algorithms only).
    pub order: Vec<usize>,
    /// `‖r_j‖₂` after each iteration (detection algorithms only).
    pub residue_norms: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Least-squares residue `r_j = y_r − A_r[:, Ω] A_r[:, Ω]† y_r`.
#[derive(Clone, Debug)]
pub struct Residue {
    pub r: DVector<f64>,
    pub iteration: usize,
}

/// Number of candidates kept at iteration `j`: `⌊(s − j + 1)·n / s⌋`.
pub fn kappa(j: usize, s: usize, n: usize) -> usize {
    assert!(j >= 1 && j <= s, "iteration {j} outside 1..={s}");
    (s - j + 1) * n / s
}

/// `argmin_z ‖A_r[:, T] z − y_r‖₂`, coefficients ordered like `t.indices()`.
pub fn restricted_least_squares(a_r: &MeasurementMatrix, y_r: &DVector<f64>, t: &SupportSet) -> Result<Vec<f64>> {
    check_rows(a_r, y_r, "y_r")?;
    check_support(t, a_r.cols())?;
    let qr = ColumnQr::with_columns(&a_r.entries, t.iter())?;
    Ok(qr.solve(y_r))
}

/// Scatters `coeffs` into a length-`n` vector at the indices of `t`.
pub fn embed(coeffs: &[f64], t: &SupportSet, n: usize) -> Result<Signal> {
    if coeffs.len() != t.len() {
        return Err(invalid(
            "coeffs",
            format!("{} coefficients for a support of size {}", coeffs.len(), t.len()),
        ));
    }
    check_support(t, n)?;
    Ok(embed_cols(t.indices(), coeffs, n))
}

fn embed_cols(cols: &[usize], z: &[f64], n: usize) -> Signal {
    let mut values = DVector::zeros(n);
    for (&c, &v) in cols.iter().zip(z) {
        values[c] = v;
    }
    let support = SupportSet::new(cols.to_vec(), n).expect("factorized columns are distinct");
    Signal { values, support }
}

/// `|{i : y_o[i] · (A_o[:, T] z)[i] ≥ 0}|` where `z` is the least-squares fit of
/// `y_r` on `A_r[:, T]`.
pub fn satisfied_count(
    y_o: &[i8],
    a_o: &MeasurementMatrix,
    t: &SupportSet,
    a_r: &MeasurementMatrix,
    y_r: &DVector<f64>,
) -> Result<usize> {
    if y_o.len() != a_o.rows() || y_o.is_empty() {
        return Err(invalid("y_o", "need one sign per row of A_o and at least one row"));
    }
    if a_o.cols() != a_r.cols() {
        return Err(invalid("a_o", "A_o and A_r must have the same number of columns"));
    }
    let z = restricted_least_squares(a_r, y_r, t)?;
    Ok(count_agreements(y_o, &a_o.entries, t.indices(), &z))
}

fn count_agreements(y_o: &[i8], a_o: &DMatrix<f64>, cols: &[usize], z: &[f64]) -> usize {
    let v = restricted_mul(a_o, cols, z);
    y_o.iter().zip(v.iter()).filter(|(&y, &vi)| f64::from(y) * vi >= 0.0).count()
}

/// Top-`κ_j` columns of `A_r` by `|⟨a_i, r_{j−1}⟩|` among indices outside
/// `omega_prev`. `κ_j` is clamped to the size of the complement.
pub fn candidate_select(
    a_r: &MeasurementMatrix,
    residue: &Residue,
    omega_prev: &SupportSet,
    j: usize,
    s: usize,
    n: usize,
) -> SupportSet {
    let keep = kappa(j, s, n).min(n - omega_prev.len());
    let scores: Vec<(usize, f64)> = omega_prev
        .complement(n)
        .into_iter()
        .map(|i| (i, a_r.entries.column(i).dot(&residue.r)))
        .collect();
    SupportSet::new(top_k_by_magnitude(&scores, keep), n).expect("distinct indices")
}

/// Residue of `y_r` after projecting out the columns in `omega`.
pub fn residue_update(a_r: &MeasurementMatrix, y_r: &DVector<f64>, omega: &SupportSet) -> Result<Residue> {
    check_rows(a_r, y_r, "y_r")?;
    check_support(omega, a_r.cols())?;
    let qr = ColumnQr::with_columns(&a_r.entries, omega.iter())?;
    Ok(residue_from(&qr, y_r, omega.len()))
}

fn residue_from(qr: &ColumnQr<'_>, y_r: &DVector<f64>, iteration: usize) -> Residue {
    let z = qr.solve(y_r);
    let fit = restricted_mul(qr.matrix(), qr.columns(), &z);
    Residue {
        r: y_r - fit,
        iteration,
    }
}

/// Binary inequality checking with residue update.
///
/// Runs exactly `s` iterations; each adds the candidate whose least-squares
/// estimate satisfies the most sign constraints.
pub fn algorithm1(hm: &HybridMeasurements, s: usize) -> Result<RecoveryResult> {
    let n = check_hybrid(hm)?;
    if s == 0 || s > n {
        return Err(invalid("s", format!("need 1 <= s <= n (s = {s}, n = {n})")));
    }
    let mut warnings = Vec::new();
    if s > hm.a_r.rows() {
        warnings.push(format!(
            "s = {s} exceeds m_r = {}; later supports cannot be fit uniquely",
            hm.a_r.rows()
        ));
    }
    let a_r = &hm.a_r.entries;
    let a_o = &hm.a_o.entries;
    let y_r = &hm.y_r;

    let mut qr = ColumnQr::new(a_r);
    let mut omega = SupportSet::empty();
    let mut residue = Residue {
        r: y_r.clone(),
        iteration: 0,
    };
    let mut counts = Vec::with_capacity(s);
    let mut norms = Vec::with_capacity(s);
    let mut skipped = 0usize;

    for j in 1..=s {
        let candidates = candidate_select(&hm.a_r, &residue, &omega, j, s, n);
        let qty = qr.qt_mul(y_r);
        let mut cols: Vec<usize> = qr.columns().to_vec();
        cols.push(usize::MAX);
        let mut best: Option<(usize, usize)> = None;
        for p in candidates.iter() {
            let z = match qr.solve_with(p, y_r, &qty) {
                Ok(z) => z,
                Err(Error::DegenerateSystem { .. }) => {
                    skipped += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            *cols.last_mut().unwrap() = p;
            let count = count_agreements(&hm.y_o, a_o, &cols, &z);
            if best.is_none_or(|(_, c)| count > c) {
                best = Some((p, count));
            }
        }
        let (p, count) = best.ok_or_else(|| {
            Error::RecoveryFailure(format!("every candidate support is degenerate at iteration {j}"))
        })?;
        qr.push(p)?;
        omega.insert(p);
        counts.push(count);
        residue = residue_from(&qr, y_r, j);
        norms.push(residue.r.norm());
    }
    if skipped > 0 {
        warnings.push(format!("skipped {skipped} degenerate candidate supports"));
    }
    let estimate = embed_cols(qr.columns(), &qr.solve(y_r), n);
    Ok(RecoveryResult {
        support: estimate.support.clone(),
        estimate,
        iterations: s,
        satisfied_counts: counts,
        converged: true,
        order: qr.columns().to_vec(),
        residue_norms: norms,
        warnings,
    })
}

/// Default iteration cap for [`algorithm2`].
pub fn default_max_iters(s: usize) -> usize {
    10 * s
}

/// Support modification via binary inequality checking.
///
/// Starting from `omega0` (`|omega0| = s`), each iteration appends the outside
/// index that best satisfies the sign constraints and then drops the member
/// whose removal leaves the best-scoring size-`s` subset. Stops when the
/// support no longer changes or after `max_iters` iterations.
pub fn algorithm2(hm: &HybridMeasurements, s: usize, omega0: &SupportSet, max_iters: usize) -> Result<RecoveryResult> {
    let n = check_hybrid(hm)?;
    if s == 0 || s >= n {
        return Err(invalid("s", format!("need 1 <= s < n (s = {s}, n = {n})")));
    }
    if omega0.len() != s {
        return Err(invalid("omega0", format!("initial support has {} indices, expected {s}", omega0.len())));
    }
    check_support(omega0, n)?;
    if max_iters == 0 {
        return Err(invalid("max_iters", "must be at least 1"));
    }
    let a_r = &hm.a_r.entries;
    let a_o = &hm.a_o.entries;
    let y_r = &hm.y_r;

    let mut warnings = Vec::new();
    let mut omega = omega0.clone();
    let mut counts = Vec::new();
    let mut skipped = 0usize;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < max_iters {
        iterations += 1;

        // Augmentation.
        let qr = ColumnQr::with_columns(a_r, omega.iter())?;
        let qty = qr.qt_mul(y_r);
        let mut cols: Vec<usize> = qr.columns().to_vec();
        cols.push(usize::MAX);
        let mut best: Option<(usize, usize)> = None;
        for p in omega.complement(n) {
            let z = match qr.solve_with(p, y_r, &qty) {
                Ok(z) => z,
                Err(Error::DegenerateSystem { .. }) => {
                    skipped += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            *cols.last_mut().unwrap() = p;
            let count = count_agreements(&hm.y_o, a_o, &cols, &z);
            if best.is_none_or(|(_, c)| count > c) {
                best = Some((p, count));
            }
        }
        let (added, _) = best.ok_or_else(|| {
            Error::RecoveryFailure(format!("every augmented support is degenerate at iteration {iterations}"))
        })?;
        let augmented = omega.with(added);

        // Pruning. Dropping larger indices first visits the size-s subsets in
        // lexicographic order, so a strict comparison keeps the smallest.
        let mut best_prune: Option<(SupportSet, usize)> = None;
        for &drop in augmented.indices().iter().rev() {
            let subset = augmented.without(drop);
            let qr = match ColumnQr::with_columns(a_r, subset.iter()) {
                Ok(qr) => qr,
                Err(Error::DegenerateSystem { .. }) => {
                    skipped += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let z = qr.solve(y_r);
            let count = count_agreements(&hm.y_o, a_o, subset.indices(), &z);
            if best_prune.as_ref().is_none_or(|(_, c)| count > *c) {
                best_prune = Some((subset, count));
            }
        }
        let (next, count) = best_prune.ok_or_else(|| {
            Error::RecoveryFailure(format!("every pruned support is degenerate at iteration {iterations}"))
        })?;
        counts.push(count);
        if next == omega {
            converged = true;
            break;
        }
        omega = next;
    }
    if skipped > 0 {
        warnings.push(format!("skipped {skipped} degenerate candidate supports"));
    }
    if !converged {
        warnings.push(format!("no fixed point after {max_iters} iterations"));
    }
    let z = restricted_least_squares(&hm.a_r, y_r, &omega)?;
    let estimate = embed_cols(omega.indices(), &z, n);
    Ok(RecoveryResult {
        support: omega,
        estimate,
        iterations,
        satisfied_counts: counts,
        converged,
        order: Vec::new(),
        residue_norms: Vec::new(),
        warnings,
    })
}

fn check_rows(a: &MeasurementMatrix, y: &DVector<f64>, name: &'static str) -> Result<()> {
    if a.rows() != y.len() {
        return Err(invalid(name, format!("length {} does not match {} matrix rows", y.len(), a.rows())));
    }
    Ok(())
}

fn check_support(t: &SupportSet, n: usize) -> Result<()> {
    match t.indices().last() {
        Some(&i) if i >= n => Err(invalid("support", format!("index {i} out of range for n = {n}"))),
        _ => Ok(()),
    }
}

fn check_hybrid(hm: &HybridMeasurements) -> Result<usize> {
    check_rows(&hm.a_r, &hm.y_r, "y_r")?;
    if hm.y_o.len() != hm.a_o.rows() || hm.y_o.is_empty() {
        return Err(invalid("y_o", "need one sign per row of A_o and at least one row"));
    }
    if hm.a_o.cols() != hm.a_r.cols() {
        return Err(invalid("a_o", "A_o and A_r must have the same number of columns"));
    }
    Ok(hm.a_r.cols())
}
