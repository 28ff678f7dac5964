//! Monte Carlo comparison of the hybrid algorithms against OMP, SP and CoSaMP
//! under matched bit budgets.
//!
//! Every trial owns a ChaCha8 generator seeded from a stable mix of
//! `(master_seed, s index, SNR index, trial index)`, so results do not depend
//! on thread count or scheduling. Trials are reduced in grid order before any
//! output is written.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::baselines::{cosamp, omp, sp};
use crate::error::{invalid, Error, Result};
use crate::measurement::{
    gen_gaussian_matrix, gen_noise_for_snr, gen_sparse_signal, linear_measure, HybridMeasurements, SignalSnr,
};
use crate::recovery::{algorithm1, algorithm2, default_max_iters, RecoveryResult};

/// Bumped whenever CSV columns or per-trial seeding change.
pub const CSV_SCHEMA_VERSION: u32 = 1;

/// `‖x − x̂‖²` is floored at this fraction of `‖x‖²`.
pub const RATIO_CLAMP: f64 = 1e-12;

pub const TRIALS_HEADER: &str =
    "experiment,algorithm,n,s,m_r,m_o,m,xi_s_db,trial,ratio,support_exact,iterations,wall_time_ms";
pub const AGGREGATE_HEADER: &str = "experiment,algorithm,n,s,m_r,m_o,m,xi_s_db,n_v,xi_r_db,success_rate";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Alg1,
    Alg2,
    Omp,
    Sp,
    Cosamp,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [Algorithm::Alg1, Algorithm::Alg2, Algorithm::Omp, Algorithm::Sp, Algorithm::Cosamp];

    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Alg1 => "alg1",
            Algorithm::Alg2 => "alg2",
            Algorithm::Omp => "omp",
            Algorithm::Sp => "sp",
            Algorithm::Cosamp => "cosamp",
        }
    }

    pub fn is_hybrid(&self) -> bool {
        matches!(self, Algorithm::Alg1 | Algorithm::Alg2)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| format!("unknown algorithm `{s}` (expected alg1, alg2, omp, sp or cosamp)"))
    }
}

/// Measurement counts of one grid point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dims {
    pub m_r: usize,
    pub m_o: usize,
    pub m: usize,
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub experiment_id: u8,
    pub n: usize,
    pub n_v: usize,
    pub s_grid: Vec<usize>,
    pub snr_grid: Vec<SignalSnr>,
    pub bits_per_real: usize,
    pub master_seed: u64,
    pub algorithms: Vec<Algorithm>,
}

/// Stored bits of `m_r` real measurements and `m_o` sign measurements.
pub fn bit_budget(m_r: usize, m_o: usize, bits_per_real: usize) -> usize {
    bits_per_real * m_r + m_o
}

/// Full-scale configuration of experiment 1 (`64s` bits) or 2 (2048 bits).
pub fn preset_config(experiment_id: u8) -> Result<ExperimentConfig> {
    let snr_grid: Vec<f64> = match experiment_id {
        1 => vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
        2 => vec![0.0, 10.0],
        other => return Err(invalid("id", format!("experiment must be 1 or 2, got {other}"))),
    };
    Ok(ExperimentConfig {
        experiment_id,
        n: 256,
        n_v: 500,
        s_grid: vec![4, 8, 16, 32],
        snr_grid: snr_grid.into_iter().map(SignalSnr::Db).collect(),
        bits_per_real: 32,
        master_seed: 0,
        algorithms: Algorithm::ALL.to_vec(),
    })
}

impl ExperimentConfig {
    /// Experiment 1: `m_r = ⌈1.5s⌉`, `m_o = b·⌊s/2⌋`, `m = 2s`.
    /// Experiment 2: `m_r = 48`, `m_o = 16b`, `m = 64`. (`b` = bits per real.)
    pub fn dims(&self, s: usize) -> Dims {
        let b = self.bits_per_real;
        match self.experiment_id {
            1 => Dims {
                m_r: (3 * s).div_ceil(2),
                m_o: b * (s / 2),
                m: 2 * s,
            },
            _ => Dims {
                m_r: 48,
                m_o: 16 * b,
                m: 64,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !matches!(self.experiment_id, 1 | 2) {
            return Err(invalid("id", format!("experiment must be 1 or 2, got {}", self.experiment_id)));
        }
        if self.n == 0 {
            return Err(invalid("n", "dimension must be positive"));
        }
        if self.n_v == 0 {
            return Err(invalid("nv", "need at least one trial per grid point"));
        }
        if self.s_grid.is_empty() || self.snr_grid.is_empty() || self.algorithms.is_empty() {
            return Err(invalid("grid", "s grid, SNR grid and algorithm list must be nonempty"));
        }
        for &s in &self.s_grid {
            let d = self.dims(s);
            if s == 0 || s >= self.n {
                return Err(invalid("s-grid", format!("sparsity {s} must lie in 1..n")));
            }
            if d.m_o == 0 {
                return Err(invalid("s-grid", format!("sparsity {s} leaves no binary measurements")));
            }
            if s > d.m {
                return Err(invalid("s-grid", format!("sparsity {s} exceeds m = {}", d.m)));
            }
        }
        Ok(())
    }

    /// `key=value` lines describing the resolved configuration.
    pub fn manifest_lines(&self) -> Vec<String> {
        let join = |v: Vec<String>| v.join(",");
        vec![
            format!("schema_version={CSV_SCHEMA_VERSION}"),
            format!("experiment={}", self.experiment_id),
            format!("n={}", self.n),
            format!("n_v={}", self.n_v),
            format!("s_grid={}", join(self.s_grid.iter().map(|s| s.to_string()).collect())),
            format!("snr_grid_db={}", join(self.snr_grid.iter().map(fmt_snr).collect())),
            format!("bits_per_real={}", self.bits_per_real),
            format!("master_seed={}", self.master_seed),
            format!("algorithms={}", join(self.algorithms.iter().map(|a| a.to_string()).collect())),
        ]
    }
}

/// One algorithm's outcome on one trial.
#[derive(Clone, Debug)]
pub struct TrialRecord {
    pub experiment: u8,
    pub algorithm: Algorithm,
    pub n: usize,
    pub s: usize,
    pub dims: Dims,
    pub xi_s: SignalSnr,
    pub trial: usize,
    /// `‖x‖² / max(‖x − x̂‖², ε‖x‖²)`.
    pub ratio: f64,
    pub support_exact: bool,
    pub iterations: usize,
    pub wall_time_ms: f64,
    /// Set when the algorithm errored; the estimate is then taken as zero.
    pub failure: Option<String>,
}

impl TrialRecord {
    /// Same outcome apart from timing.
    pub fn same_outcome(&self, other: &TrialRecord) -> bool {
        self.algorithm == other.algorithm
            && self.s == other.s
            && self.trial == other.trial
            && self.ratio.to_bits() == other.ratio.to_bits()
            && self.support_exact == other.support_exact
            && self.iterations == other.iterations
    }
}

/// Per grid point and algorithm aggregate.
#[derive(Clone, Debug)]
pub struct AggregateRow {
    pub experiment: u8,
    pub algorithm: Algorithm,
    pub n: usize,
    pub s: usize,
    pub dims: Dims,
    pub xi_s: SignalSnr,
    pub n_v: usize,
    /// `10·log10(mean of ratios)`.
    pub xi_r_db: f64,
    pub success_rate: f64,
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub trials: Vec<TrialRecord>,
    pub aggregates: Vec<AggregateRow>,
}

impl ExperimentResult {
    pub fn xi_r(&self, algorithm: Algorithm, s: usize, xi_s: SignalSnr) -> Option<f64> {
        self.aggregates
            .iter()
            .find(|r| r.algorithm == algorithm && r.s == s && r.xi_s == xi_s)
            .map(|r| r.xi_r_db)
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `trial` at grid point `(s_idx, snr_idx)`.
pub fn trial_seed(master_seed: u64, s_idx: usize, snr_idx: usize, trial: usize) -> u64 {
    [s_idx as u64, snr_idx as u64, trial as u64]
        .into_iter()
        .fold(splitmix(master_seed), |h, v| splitmix(h ^ v))
}

/// `‖x‖² / max(‖x − x̂‖², ε‖x‖²)`.
pub fn recovery_ratio(x: &DVector<f64>, x_hat: &DVector<f64>) -> f64 {
    let energy = x.norm_squared();
    energy / (x - x_hat).norm_squared().max(RATIO_CLAMP * energy)
}

const STREAM_SIGNAL: u64 = 0;
const STREAM_HYBRID: u64 = 1;
const STREAM_TRADITIONAL: u64 = 2;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Runs every configured algorithm on one freshly drawn instance.
pub fn run_trial(cfg: &ExperimentConfig, s_idx: usize, snr_idx: usize, trial: usize) -> Result<Vec<TrialRecord>> {
    let s = *cfg
        .s_grid
        .get(s_idx)
        .ok_or_else(|| invalid("s_idx", "outside the sparsity grid"))?;
    let xi_s = *cfg
        .snr_grid
        .get(snr_idx)
        .ok_or_else(|| invalid("snr_idx", "outside the SNR grid"))?;
    let dims = cfg.dims(s);
    let n = cfg.n;
    let seed = trial_seed(cfg.master_seed, s_idx, snr_idx, trial);

    let mut rng = stream(seed, STREAM_SIGNAL);
    let x = gen_sparse_signal(n, s, &mut rng)?;
    let u = gen_noise_for_snr(&x, xi_s, &mut rng)?.u;
    let x_tilde = &x.values + &u;

    let wants_hybrid = cfg.algorithms.iter().any(Algorithm::is_hybrid);
    let hybrid = if wants_hybrid {
        let mut rng = stream(seed, STREAM_HYBRID);
        let a_r = gen_gaussian_matrix(dims.m_r, n, &mut rng)?;
        let a_o = gen_gaussian_matrix(dims.m_o, n, &mut rng)?;
        Some(HybridMeasurements::acquire(a_r, a_o, &x_tilde)?)
    } else {
        None
    };
    let traditional = if cfg.algorithms.iter().any(|a| !a.is_hybrid()) {
        let mut rng = stream(seed, STREAM_TRADITIONAL);
        let a = gen_gaussian_matrix(dims.m, n, &mut rng)?;
        let y = linear_measure(&a, &x_tilde)?;
        Some((a, y))
    } else {
        None
    };

    let record = |algorithm: Algorithm, outcome: Result<RecoveryResult>, elapsed_ms: f64| -> TrialRecord {
        let (ratio, exact, iterations, failure) = match outcome {
            Ok(res) => (
                recovery_ratio(&x.values, &res.estimate.values),
                res.support == x.support,
                res.iterations,
                None,
            ),
            Err(e) => (recovery_ratio(&x.values, &DVector::zeros(n)), false, 0, Some(e.to_string())),
        };
        TrialRecord {
            experiment: cfg.experiment_id,
            algorithm,
            n,
            s,
            dims,
            xi_s,
            trial,
            ratio,
            support_exact: exact,
            iterations,
            wall_time_ms: elapsed_ms,
            failure,
        }
    };

    let mut alg1_support = None;
    let mut alg1_ms = 0.0;
    let mut out = Vec::with_capacity(cfg.algorithms.len());
    for &alg in &cfg.algorithms {
        let start = Instant::now();
        let outcome = match alg {
            Algorithm::Alg1 | Algorithm::Alg2 => {
                let hm = hybrid.as_ref().expect("hybrid measurements drawn");
                if alg1_support.is_none() {
                    let t0 = Instant::now();
                    alg1_support = Some(algorithm1(hm, s));
                    alg1_ms = t0.elapsed().as_secs_f64() * 1e3;
                }
                let first = alg1_support.as_ref().unwrap();
                match alg {
                    Algorithm::Alg1 => clone_outcome(first),
                    _ => match first {
                        Ok(res) => algorithm2(hm, s, &res.support, default_max_iters(s)),
                        Err(e) => Err(Error::RecoveryFailure(format!("no initial support: {e}"))),
                    },
                }
            }
            Algorithm::Omp | Algorithm::Sp | Algorithm::Cosamp => {
                let (a, y) = traditional.as_ref().expect("traditional measurements drawn");
                match alg {
                    Algorithm::Omp => omp(a, y, s),
                    Algorithm::Sp => sp(a, y, s),
                    _ => cosamp(a, y, s),
                }
            }
        };
        let mut elapsed = start.elapsed().as_secs_f64() * 1e3;
        if alg == Algorithm::Alg1 {
            elapsed = alg1_ms;
        }
        out.push(record(alg, outcome, elapsed));
    }
    Ok(out)
}

fn clone_outcome(r: &Result<RecoveryResult>) -> Result<RecoveryResult> {
    match r {
        Ok(res) => Ok(res.clone()),
        Err(e) => Err(Error::RecoveryFailure(e.to_string())),
    }
}

/// Runs the whole grid on `threads` workers (all cores when `None`).
pub fn run_experiment(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<ExperimentResult> {
    cfg.validate()?;
    let work: Vec<(usize, usize, usize)> = (0..cfg.s_grid.len())
        .flat_map(|si| (0..cfg.snr_grid.len()).flat_map(move |qi| (0..cfg.n_v).map(move |t| (si, qi, t))))
        .collect();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = threads {
        if k == 0 {
            return Err(invalid("threads", "need at least one worker"));
        }
        builder = builder.num_threads(k);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::RecoveryFailure(format!("thread pool: {e}")))?;
    let per_trial: Vec<Vec<TrialRecord>> = pool.install(|| {
        work.par_iter()
            .map(|&(si, qi, t)| run_trial(cfg, si, qi, t))
            .collect::<Result<Vec<_>>>()
    })?;
    let trials: Vec<TrialRecord> = per_trial.into_iter().flatten().collect();
    let aggregates = aggregate(cfg, &trials);
    Ok(ExperimentResult { trials, aggregates })
}

/// Mean of ratios per grid point and algorithm, then converted to dB.
pub fn aggregate(cfg: &ExperimentConfig, trials: &[TrialRecord]) -> Vec<AggregateRow> {
    let mut rows = Vec::new();
    for &s in &cfg.s_grid {
        for &xi_s in &cfg.snr_grid {
            for &alg in &cfg.algorithms {
                let group: Vec<&TrialRecord> = trials
                    .iter()
                    .filter(|r| r.s == s && r.xi_s == xi_s && r.algorithm == alg)
                    .collect();
                if group.is_empty() {
                    continue;
                }
                let k = group.len() as f64;
                let mean_ratio = group.iter().map(|r| r.ratio).sum::<f64>() / k;
                let exact = group.iter().filter(|r| r.support_exact).count() as f64;
                rows.push(AggregateRow {
                    experiment: cfg.experiment_id,
                    algorithm: alg,
                    n: cfg.n,
                    s,
                    dims: cfg.dims(s),
                    xi_s,
                    n_v: group.len(),
                    xi_r_db: 10.0 * mean_ratio.log10(),
                    success_rate: exact / k,
                });
            }
        }
    }
    rows
}

/// 17 significant digits.
pub fn fmt_num(v: f64) -> String {
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{v:.16e}")
}

fn fmt_snr(snr: &SignalSnr) -> String {
    fmt_num(snr.as_db())
}

pub fn write_trials_csv(path: &Path, trials: &[TrialRecord]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{TRIALS_HEADER}")?;
    for r in trials {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.experiment,
            r.algorithm,
            r.n,
            r.s,
            r.dims.m_r,
            r.dims.m_o,
            r.dims.m,
            fmt_snr(&r.xi_s),
            r.trial,
            fmt_num(r.ratio),
            u8::from(r.support_exact),
            r.iterations,
            fmt_num(r.wall_time_ms),
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_aggregate_csv(path: &Path, rows: &[AggregateRow]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{AGGREGATE_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.experiment,
            r.algorithm,
            r.n,
            r.s,
            r.dims.m_r,
            r.dims.m_o,
            r.dims.m,
            fmt_snr(&r.xi_s),
            r.n_v,
            fmt_num(r.xi_r_db),
            fmt_num(r.success_rate),
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `trials.csv`, `aggregate.csv` and `run-manifest.txt` into `dir`.
pub fn write_outputs(dir: &Path, cfg: &ExperimentConfig, result: &ExperimentResult, extra: &[String]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_trials_csv(&dir.join("trials.csv"), &result.trials)?;
    write_aggregate_csv(&dir.join("aggregate.csv"), &result.aggregates)?;
    let mut m = BufWriter::new(File::create(dir.join("run-manifest.txt"))?);
    for line in cfg.manifest_lines().iter().chain(extra) {
        writeln!(m, "{line}")?;
    }
    m.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_dimensions() {
        let e1 = preset_config(1).unwrap();
        assert_eq!(e1.dims(4), Dims { m_r: 6, m_o: 64, m: 8 });
        assert_eq!(e1.dims(32), Dims { m_r: 48, m_o: 512, m: 64 });
        let e2 = preset_config(2).unwrap();
        for s in [4, 8, 16, 32] {
            assert_eq!(e2.dims(s), Dims { m_r: 48, m_o: 512, m: 64 });
        }
        assert!(preset_config(3).is_err());
    }

    #[test]
    fn budgets() {
        assert_eq!(bit_budget(6, 64, 32), 256);
        assert_eq!(bit_budget(48, 512, 32), 2048);
        assert_eq!(bit_budget(0, 0, 32), 0);
    }

    #[test]
    fn ratio_is_clamped_at_exact_recovery() {
        let x = DVector::from_vec(vec![1.0, -2.0, 0.0]);
        assert_eq!(recovery_ratio(&x, &x), 1.0 / RATIO_CLAMP);
        assert_eq!(recovery_ratio(&x, &DVector::zeros(3)), 1.0);
    }

    #[test]
    fn seeds_differ_across_grid() {
        let a = trial_seed(1, 0, 0, 0);
        assert_ne!(a, trial_seed(1, 0, 0, 1));
        assert_ne!(a, trial_seed(1, 0, 1, 0));
        assert_ne!(a, trial_seed(1, 1, 0, 0));
        assert_ne!(a, trial_seed(2, 0, 0, 0));
        assert_eq!(a, trial_seed(1, 0, 0, 0));
    }

    #[test]
    fn number_format_has_17_significant_digits() {
        assert_eq!(fmt_num(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_num(f64::INFINITY), "inf");
        let v = 1.0 / 3.0;
        assert_eq!(fmt_num(v).parse::<f64>().unwrap(), v);
    }

    #[test]
    fn algorithm_names_roundtrip() {
        for a in Algorithm::ALL {
            assert_eq!(a.as_str().parse::<Algorithm>().unwrap(), a);
        }
        assert!("lasso".parse::<Algorithm>().is_err());
    }
}
