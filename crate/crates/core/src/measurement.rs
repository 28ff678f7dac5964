//! Sparse test signals, calibrated noise, Gaussian sensing matrices and the
//! linear / one-bit measurement maps of the hybrid model.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::support::SupportSet;

/// An exactly `s`-sparse vector together with its support.
#[derive(Clone, Debug, PartialEq)]
pub struct Signal {
    pub values: DVector<f64>,
    pub support: SupportSet,
}

impl Signal {
    /// Wraps `values`, taking the support to be its nonzero entries.
    pub fn from_values(values: DVector<f64>) -> Self {
        let support = SupportSet::new(
            values.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, _)| i).collect(),
            values.len(),
        )
        .expect("indices are distinct and in range");
        Signal { values, support }
    }

    pub fn zeros(n: usize) -> Self {
        Signal {
            values: DVector::zeros(n),
            support: SupportSet::empty(),
        }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn sparsity(&self) -> usize {
        self.support.len()
    }

    pub fn norm(&self) -> f64 {
        self.values.norm()
    }

    /// `‖x_T‖₂` for an arbitrary index set `T`.
    pub fn restricted_norm(&self, t: impl IntoIterator<Item = usize>) -> f64 {
        t.into_iter().map(|i| self.values[i].powi(2)).sum::<f64>().sqrt()
    }

    /// Support indices ordered by decreasing magnitude (ties by index).
    pub fn support_by_magnitude(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = self.support.indices().to_vec();
        idx.sort_by(|&a, &b| self.values[b].abs().total_cmp(&self.values[a].abs()).then(a.cmp(&b)));
        idx
    }
}

/// Signal-level SNR target. `Noiseless` yields `u = 0` exactly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SignalSnr {
    Noiseless,
    Db(f64),
}

impl SignalSnr {
    pub fn as_db(&self) -> f64 {
        match self {
            SignalSnr::Noiseless => f64::INFINITY,
            SignalSnr::Db(d) => *d,
        }
    }
}

impl std::str::FromStr for SignalSnr {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "+inf" | "noiseless" => Ok(SignalSnr::Noiseless),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(SignalSnr::Db)
                .ok_or_else(|| format!("expected a finite dB value or `inf`, got `{s}`")),
        }
    }
}

/// Additive signal-level noise `u`, so that the measured vector is `x + u`.
#[derive(Clone, Debug)]
pub struct NoiseModel {
    pub u: DVector<f64>,
    pub target: SignalSnr,
}

/// A Gaussian sensing matrix with i.i.d. `N(0, 1/m)` entries.
#[derive(Clone, Debug)]
pub struct MeasurementMatrix {
    pub entries: DMatrix<f64>,
    pub scale: f64,
}

impl MeasurementMatrix {
    /// Wraps an explicit matrix (scale recorded as 1).
    pub fn from_entries(entries: DMatrix<f64>) -> Self {
        MeasurementMatrix { entries, scale: 1.0 }
    }

    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }
}

/// Linear and one-bit measurements of the same vector.
#[derive(Clone, Debug)]
pub struct HybridMeasurements {
    pub a_r: MeasurementMatrix,
    pub y_r: DVector<f64>,
    pub a_o: MeasurementMatrix,
    pub y_o: Vec<i8>,
}

impl HybridMeasurements {
    /// Measures `x_tilde` through both matrices.
    pub fn acquire(a_r: MeasurementMatrix, a_o: MeasurementMatrix, x_tilde: &DVector<f64>) -> Result<Self> {
        let y_r = linear_measure(&a_r, x_tilde)?;
        let y_o = binary_measure(&a_o, x_tilde)?;
        Ok(HybridMeasurements { a_r, y_r, a_o, y_o })
    }

    pub fn n(&self) -> usize {
        self.a_r.cols()
    }
}

/// `sign(v)` with `sign(0) = +1`.
#[inline]
pub fn sign(v: f64) -> i8 {
    if v >= 0.0 {
        1
    } else {
        -1
    }
}

/// Draws an `s`-sparse signal: uniform support, standard normal values on it.
pub fn gen_sparse_signal<R: Rng + ?Sized>(n: usize, s: usize, rng: &mut R) -> Result<Signal> {
    if s == 0 || s > n {
        return Err(invalid("s", format!("sparsity must satisfy 1 <= s <= n (s = {s}, n = {n})")));
    }
    let support = SupportSet::new(rand::seq::index::sample(rng, n, s).into_vec(), n)?;
    let mut values = DVector::zeros(n);
    for i in support.iter() {
        let mut v: f64 = rng.sample(StandardNormal);
        // Keep the support exact.
        while v == 0.0 {
            v = rng.sample(StandardNormal);
        }
        values[i] = v;
    }
    Ok(Signal { values, support })
}

/// Draws `u = g · (‖x‖/‖g‖) · 10^(−ξ/20)` for standard normal `g`.
pub fn gen_noise_for_snr<R: Rng + ?Sized>(x: &Signal, snr: SignalSnr, rng: &mut R) -> Result<NoiseModel> {
    let n = x.n();
    let xn = x.norm();
    if xn == 0.0 {
        return Err(invalid("x", "signal must be nonzero to calibrate noise"));
    }
    let db = match snr {
        SignalSnr::Noiseless => {
            return Ok(NoiseModel {
                u: DVector::zeros(n),
                target: snr,
            })
        }
        SignalSnr::Db(d) if !d.is_finite() => return Err(invalid("xi_s", "SNR must be finite")),
        SignalSnr::Db(d) => d,
    };
    let mut g = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    while g.norm() == 0.0 {
        g = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    }
    let factor = xn / g.norm() * 10f64.powf(-db / 20.0);
    Ok(NoiseModel {
        u: g * factor,
        target: snr,
    })
}

/// `10·log10(‖x‖² / ‖u‖²)`.
pub fn snr_db(x: &DVector<f64>, u: &DVector<f64>) -> f64 {
    10.0 * (x.norm_squared() / u.norm_squared()).log10()
}

/// An `m × n` matrix of i.i.d. standard normals divided by `√m`.
pub fn gen_gaussian_matrix<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Result<MeasurementMatrix> {
    if m == 0 {
        return Err(invalid("m", "need at least one row"));
    }
    if n == 0 {
        return Err(invalid("n", "need at least one column"));
    }
    let scale = 1.0 / (m as f64).sqrt();
    let entries = DMatrix::from_fn(m, n, |_, _| rng.sample::<f64, _>(StandardNormal) * scale);
    Ok(MeasurementMatrix { entries, scale })
}

fn check_dims(a: &MeasurementMatrix, x: &DVector<f64>) -> Result<()> {
    if a.cols() != x.len() {
        return Err(invalid(
            "x_tilde",
            format!("length {} does not match matrix with {} columns", x.len(), a.cols()),
        ));
    }
    Ok(())
}

/// `y_r = A_r x̃`.
pub fn linear_measure(a_r: &MeasurementMatrix, x_tilde: &DVector<f64>) -> Result<DVector<f64>> {
    check_dims(a_r, x_tilde)?;
    Ok(&a_r.entries * x_tilde)
}

/// `y_o = sign(A_o x̃)` with entries in `{−1, +1}`.
pub fn binary_measure(a_o: &MeasurementMatrix, x_tilde: &DVector<f64>) -> Result<Vec<i8>> {
    Ok(linear_measure(a_o, x_tilde)?.iter().map(|&v| sign(v)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn full_sparsity_forces_full_support() {
        let x = gen_sparse_signal(4, 4, &mut rng(3)).unwrap();
        assert_eq!(x.support.indices(), &[0, 1, 2, 3]);
    }

    #[test]
    fn sparse_signal_has_exact_support() {
        let x = gen_sparse_signal(256, 4, &mut rng(11)).unwrap();
        assert_eq!(x.values.iter().filter(|v| **v != 0.0).count(), 4);
        for i in 0..256 {
            assert_eq!(x.values[i] != 0.0, x.support.contains(i));
        }
    }

    #[test]
    fn invalid_sparsity_rejected() {
        assert!(gen_sparse_signal(4, 0, &mut rng(0)).is_err());
        assert!(gen_sparse_signal(4, 5, &mut rng(0)).is_err());
    }

    #[test]
    fn support_inclusion_is_uniform() {
        // 10^4 draws, n = 256, s = 8: each index included with p = 1/32.
        let (n, s, draws) = (256, 8, 10_000);
        let mut r = rng(99);
        let mut hits = vec![0u32; n];
        for _ in 0..draws {
            for i in gen_sparse_signal(n, s, &mut r).unwrap().support.iter() {
                hits[i] += 1;
            }
        }
        let p = s as f64 / n as f64;
        let mean = draws as f64 * p;
        let sd = (draws as f64 * p * (1.0 - p)).sqrt();
        // 256 indices at 3σ: allow a handful of excursions.
        let outside = hits.iter().filter(|&&h| (h as f64 - mean).abs() > 3.0 * sd).count();
        assert!(outside <= 3, "{outside} indices outside 3σ");
        let total_sd = (draws as f64 * n as f64 * p * (1.0 - p)).sqrt();
        assert!((hits.iter().sum::<u32>() as f64 - mean * n as f64).abs() <= 3.0 * total_sd);
    }

    #[test]
    fn noise_hits_target_snr() {
        let x = gen_sparse_signal(64, 5, &mut rng(1)).unwrap();
        let mut r = rng(2);
        for db in [0.0, 20.0, -7.5, 33.3] {
            let u = gen_noise_for_snr(&x, SignalSnr::Db(db), &mut r).unwrap().u;
            assert!((snr_db(&x.values, &u) - db).abs() < 1e-9);
        }
        let u0 = gen_noise_for_snr(&x, SignalSnr::Db(0.0), &mut r).unwrap().u;
        assert!((u0.norm() - x.norm()).abs() < 1e-12 * x.norm());
        let u20 = gen_noise_for_snr(&x, SignalSnr::Db(20.0), &mut r).unwrap().u;
        assert!((u20.norm() - 0.1 * x.norm()).abs() < 1e-12 * x.norm());
        let quiet = gen_noise_for_snr(&x, SignalSnr::Noiseless, &mut r).unwrap().u;
        assert!(quiet.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn zero_signal_rejected_for_noise() {
        let x = Signal::zeros(5);
        assert!(gen_noise_for_snr(&x, SignalSnr::Db(10.0), &mut rng(0)).is_err());
    }

    #[test]
    fn snr_parsing() {
        assert_eq!("inf".parse::<SignalSnr>().unwrap(), SignalSnr::Noiseless);
        assert_eq!("10".parse::<SignalSnr>().unwrap(), SignalSnr::Db(10.0));
        assert!("nan".parse::<SignalSnr>().is_err());
    }

    #[test]
    fn matrix_shape_and_scale() {
        let a = gen_gaussian_matrix(64, 256, &mut rng(5)).unwrap();
        assert_eq!((a.rows(), a.cols()), (64, 256));
        assert!(a.entries.iter().all(|v| v.is_finite()));
        assert_eq!(a.scale, 0.125);
        let one = gen_gaussian_matrix(1, 1, &mut rng(5)).unwrap();
        assert_eq!(one.scale, 1.0);
        assert!(gen_gaussian_matrix(0, 3, &mut rng(5)).is_err());
    }

    #[test]
    fn entry_variance_is_one_over_m() {
        // 10^4 draws of a 100 × 1 matrix = 10^6 entries.
        let mut r = rng(8);
        let m = 100;
        let mut vals = Vec::with_capacity(m * 10_000);
        for _ in 0..10_000 {
            vals.extend(gen_gaussian_matrix(m, 1, &mut r).unwrap().entries.iter().copied());
        }
        let k = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / k;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
        let sigma2 = 1.0 / m as f64;
        assert!(mean.abs() <= 3.0 * (sigma2 / k).sqrt());
        // Var of the sample variance for Gaussian data: 2σ⁴/(k−1).
        assert!((var - sigma2).abs() <= 3.0 * (2.0 * sigma2 * sigma2 / (k - 1.0)).sqrt());
    }

    #[test]
    fn column_norms_concentrate() {
        let a = gen_gaussian_matrix(200, 400, &mut rng(21)).unwrap();
        let mean: f64 = a.entries.column_iter().map(|c| c.norm_squared()).sum::<f64>() / 400.0;
        // Each ‖column‖² ~ χ²_200 / 200 with variance 2/200.
        assert!((mean - 1.0).abs() <= 3.0 * (2.0 / 200.0 / 400.0f64).sqrt());
    }

    #[test]
    fn linear_measure_examples() {
        let zero = MeasurementMatrix::from_entries(DMatrix::zeros(3, 4));
        let x = DVector::from_vec(vec![1.0, -2.0, 3.0, 0.5]);
        assert!(linear_measure(&zero, &x).unwrap().iter().all(|v| *v == 0.0));
        let pick = MeasurementMatrix::from_entries(DMatrix::from_row_slice(1, 4, &[1.0, 0.0, 0.0, 0.0]));
        let e1 = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(linear_measure(&pick, &e1).unwrap()[0], 1.0);
        assert!(linear_measure(&pick, &DVector::zeros(3)).is_err());
    }

    #[test]
    fn linear_measure_matches_double_loop() {
        let a = gen_gaussian_matrix(3, 4, &mut rng(4)).unwrap();
        let x = DVector::from_vec(vec![0.3, -1.2, 2.5, 0.7]);
        let y = linear_measure(&a, &x).unwrap();
        for i in 0..3 {
            let mut acc = 0.0;
            for j in 0..4 {
                acc += a.entries[(i, j)] * x[j];
            }
            assert!((y[i] - acc).abs() < 1e-12);
        }
    }

    #[test]
    fn binary_measure_examples() {
        let a = gen_gaussian_matrix(6, 3, &mut rng(4)).unwrap();
        assert!(binary_measure(&a, &DVector::zeros(3)).unwrap().iter().all(|&v| v == 1));
        let pm = MeasurementMatrix::from_entries(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, -1.0, 0.0]));
        let e1 = DVector::from_vec(vec![1.0, 0.0]);
        assert_eq!(binary_measure(&pm, &e1).unwrap(), vec![1, -1]);
    }

    #[test]
    fn binary_measure_matches_row_loop() {
        let a = gen_gaussian_matrix(8, 5, &mut rng(12)).unwrap();
        let x = DVector::from_vec(vec![0.5, -0.25, 1.5, -2.0, 0.1]);
        let y = binary_measure(&a, &x).unwrap();
        for i in 0..8 {
            let dot: f64 = (0..5).map(|j| a.entries[(i, j)] * x[j]).sum();
            assert_eq!(y[i], if dot >= 0.0 { 1 } else { -1 });
        }
    }

    #[test]
    fn support_by_magnitude_orders_descending() {
        let x = Signal::from_values(DVector::from_vec(vec![0.0, -3.0, 1.0, 0.0, 2.0]));
        assert_eq!(x.support_by_magnitude(), vec![1, 4, 2]);
        assert_eq!(x.sparsity(), 3);
    }
}
