//! Classic greedy recovery from a single linear system `y = A x`: orthogonal
//! matching pursuit, subspace pursuit and CoSaMP.

use nalgebra::DVector;

use crate::error::{invalid, Error, Result};
use crate::linalg::{restricted_mul, ColumnQr};
use crate::measurement::{MeasurementMatrix, Signal};
use crate::recovery::RecoveryResult;
use crate::support::{top_k_by_magnitude, SupportSet};

/// Iteration cap for subspace pursuit and CoSaMP.
pub const MAX_ITERS: usize = 50;
/// CoSaMP stops once the residue norm changes by less than this fraction.
pub const COSAMP_STALL: f64 = 1e-6;

struct Fit {
    support: SupportSet,
    coeffs: Vec<f64>,
    residual: DVector<f64>,
}

fn fit(a: &MeasurementMatrix, y: &DVector<f64>, support: SupportSet) -> Result<Fit> {
    let qr = ColumnQr::with_columns(&a.entries, support.iter())?;
    let coeffs = qr.solve(y);
    let residual = y - restricted_mul(&a.entries, support.indices(), &coeffs);
    Ok(Fit {
        support,
        coeffs,
        residual,
    })
}

fn proxy(a: &MeasurementMatrix, r: &DVector<f64>, exclude: &SupportSet) -> Vec<(usize, f64)> {
    exclude
        .complement(a.cols())
        .into_iter()
        .map(|i| (i, a.entries.column(i).dot(r)))
        .collect()
}

fn finish(fit: Fit, n: usize, iterations: usize, converged: bool) -> RecoveryResult {
    let mut values = DVector::zeros(n);
    for (i, v) in fit.support.iter().zip(&fit.coeffs) {
        values[i] = *v;
    }
    RecoveryResult {
        estimate: Signal {
            values,
            support: fit.support.clone(),
        },
        support: fit.support,
        iterations,
        satisfied_counts: Vec::new(),
        converged,
        order: Vec::new(),
        residue_norms: Vec::new(),
        warnings: Vec::new(),
    }
}

fn check(a: &MeasurementMatrix, y: &DVector<f64>, s: usize) -> Result<()> {
    if y.len() != a.rows() {
        return Err(invalid("y", format!("length {} does not match {} matrix rows", y.len(), a.rows())));
    }
    if s == 0 || s > a.rows() || s > a.cols() {
        return Err(invalid("s", format!("need 1 <= s <= min(m, n), got s = {s}")));
    }
    Ok(())
}

/// Orthogonal matching pursuit: `s` greedy picks, each followed by a full
/// least-squares refit.
pub fn omp(a: &MeasurementMatrix, y: &DVector<f64>, s: usize) -> Result<RecoveryResult> {
    check(a, y, s)?;
    let n = a.cols();
    let mut qr = ColumnQr::new(&a.entries);
    let mut support = SupportSet::empty();
    let mut r = y.clone();
    let mut norms = Vec::with_capacity(s);
    for _ in 0..s {
        let mut scores = proxy(a, &r, &support);
        scores.sort_by(|p, q| q.1.abs().total_cmp(&p.1.abs()).then(p.0.cmp(&q.0)));
        // Fall through to the next-best column if the best one is dependent.
        let picked = scores.iter().map(|&(i, _)| i).find(|&i| qr.push(i).is_ok());
        let i = picked.ok_or_else(|| Error::RecoveryFailure("OMP ran out of independent columns".into()))?;
        support.insert(i);
        let z = qr.solve(y);
        r = y - restricted_mul(&a.entries, qr.columns(), &z);
        norms.push(r.norm());
    }
    let z = qr.solve(y);
    let cols = qr.columns().to_vec();
    let mut values = DVector::zeros(n);
    for (&c, v) in cols.iter().zip(&z) {
        values[c] = *v;
    }
    Ok(RecoveryResult {
        estimate: Signal {
            values,
            support: support.clone(),
        },
        support,
        iterations: s,
        satisfied_counts: Vec::new(),
        converged: true,
        order: cols,
        residue_norms: norms,
        warnings: Vec::new(),
    })
}

/// Subspace pursuit. The merged set is capped at `m` columns so that the
/// least-squares step stays overdetermined.
pub fn sp(a: &MeasurementMatrix, y: &DVector<f64>, s: usize) -> Result<RecoveryResult> {
    check(a, y, s)?;
    let n = a.cols();
    let m = a.rows();
    let init = top_k_by_magnitude(&proxy(a, y, &SupportSet::empty()), s);
    let mut current = fit(a, y, SupportSet::new(init, n)?)?;
    let tiny = 1e-12 * y.norm();
    for it in 1..=MAX_ITERS {
        if current.residual.norm() <= tiny {
            return Ok(finish(current, n, it - 1, true));
        }
        let extra = s.min(m - current.support.len());
        let added = top_k_by_magnitude(&proxy(a, &current.residual, &current.support), extra);
        let merged = current.support.union(&SupportSet::new(added, n)?);
        let wide = fit(a, y, merged)?;
        let scored: Vec<(usize, f64)> = wide.support.iter().zip(wide.coeffs.iter().copied()).collect();
        let pruned = fit(a, y, SupportSet::new(top_k_by_magnitude(&scored, s), n)?)?;
        if pruned.residual.norm() >= current.residual.norm() {
            return Ok(finish(current, n, it, true));
        }
        current = pruned;
    }
    Ok(finish(current, n, MAX_ITERS, false))
}

/// CoSaMP with a least-squares refit on the pruned support. The `2s`-column
/// proxy is capped so the merged set never exceeds `m` columns.
pub fn cosamp(a: &MeasurementMatrix, y: &DVector<f64>, s: usize) -> Result<RecoveryResult> {
    check(a, y, s)?;
    let n = a.cols();
    let m = a.rows();
    let mut current = Fit {
        support: SupportSet::empty(),
        coeffs: Vec::new(),
        residual: y.clone(),
    };
    if y.norm() == 0.0 {
        let support = SupportSet::range(s);
        let coeffs = vec![0.0; s];
        return Ok(finish(Fit { support, coeffs, residual: y.clone() }, n, 0, true));
    }
    let tiny = 1e-12 * y.norm();
    for it in 1..=MAX_ITERS {
        let extra = (2 * s).min(m - current.support.len());
        let added = top_k_by_magnitude(&proxy(a, &current.residual, &current.support), extra);
        let merged = current.support.union(&SupportSet::new(added, n)?);
        let wide = fit(a, y, merged)?;
        let scored: Vec<(usize, f64)> = wide.support.iter().zip(wide.coeffs.iter().copied()).collect();
        let next = fit(a, y, SupportSet::new(top_k_by_magnitude(&scored, s), n)?)?;
        let before = current.residual.norm();
        let after = next.residual.norm();
        current = next;
        if after <= tiny || (before - after).abs() < COSAMP_STALL * before {
            return Ok(finish(current, n, it, true));
        }
    }
    Ok(finish(current, n, MAX_ITERS, false))
}
