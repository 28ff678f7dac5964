//! Command-line front end (`hybridcs`).

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::baselines::{cosamp, omp, sp};
use crate::error::{Error, Result};
use crate::experiment::{preset_config, recovery_ratio, run_experiment, write_outputs, Algorithm};
use crate::measurement::{
    gen_gaussian_matrix, gen_noise_for_snr, gen_sparse_signal, linear_measure, HybridMeasurements, Signal,
    SignalSnr,
};
use crate::recovery::{algorithm1, algorithm2, default_max_iters};
use crate::tessellation::{angle, gaussian_mean_width_sparse, sign_flip_rate, theorem4_batch, Theorem4Batch};
use crate::theory::{
    default_threshold, theorem5_bound, theorem6_bound, Theorem5Params, Theorem6Params, DEFAULT_C,
};

pub const LONG_VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (csv schema v1)");

#[derive(Debug, Parser)]
#[command(name = "hybridcs", version = LONG_VERSION, about = "Hybrid one-bit + linear compressed sensing toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a bit-budget-matched Monte Carlo experiment and write CSVs.
    Experiment(ExperimentArgs),
    /// Recover one random instance with a single algorithm.
    Recover(RecoverArgs),
    /// Evaluate the success-probability lower bound of either hybrid algorithm.
    Bound(BoundArgs),
    /// Empirical direction-error and sign-flip checks.
    Tessellate(TessellateArgs),
    /// Monte Carlo Gaussian mean width of s-sparse unit vectors.
    Width(WidthArgs),
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Preset: 1 (64s bits) or 2 (2048 bits).
    #[arg(long)]
    pub id: u8,
    /// Trials per grid point.
    #[arg(long, default_value_t = 500)]
    pub nv: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory for trials.csv, aggregate.csv and run-manifest.txt.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Comma-separated sparsity levels (defaults to the preset grid).
    #[arg(long, value_delimiter = ',')]
    pub s_grid: Option<Vec<usize>>,
    /// Comma-separated signal SNRs in dB; `inf` means noiseless.
    #[arg(long, value_delimiter = ',')]
    pub snr_grid: Option<Vec<SignalSnr>>,
    /// Comma-separated subset of alg1, alg2, omp, sp, cosamp.
    #[arg(long, value_delimiter = ',')]
    pub algorithms: Option<Vec<Algorithm>>,
    /// Signal dimension.
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RecoverArgs {
    #[arg(long)]
    pub alg: Algorithm,
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    #[arg(long)]
    pub s: usize,
    /// Linear measurements of the hybrid scheme.
    #[arg(long)]
    pub mr: usize,
    /// Binary measurements of the hybrid scheme.
    #[arg(long)]
    pub mo: usize,
    /// Linear measurements for OMP/SP/CoSaMP (defaults to the bit-matched `mr + mo/32`).
    #[arg(long)]
    pub m: Option<usize>,
    /// Signal SNR in dB, or `inf`.
    #[arg(long, default_value = "inf")]
    pub snr: SignalSnr,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    /// 5 (detection) or 6 (modification).
    #[arg(long)]
    pub theorem: u8,
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    #[arg(long, default_value_t = 512)]
    pub mo: usize,
    /// Support magnitudes, placed at indices 0, 1, ...
    #[arg(long, value_delimiter = ',', default_value = "1,0.5,0.25,0.125")]
    pub magnitudes: Vec<f64>,
    /// Reference value c_j used for every iteration.
    #[arg(long, default_value_t = DEFAULT_C)]
    pub c: f64,
    /// Threshold n_j (or n̂_j, ñ_j); defaults to ⌈0.75·mo⌉.
    #[arg(long)]
    pub threshold: Option<usize>,
    /// Missed support indices of the initial guess (the smallest ones).
    #[arg(long, default_value_t = 1)]
    pub s_prime: usize,
    /// Number of product terms for the modification bound (defaults to s').
    #[arg(long)]
    pub product_range: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TessellateArgs {
    #[arg(long, default_value_t = 128)]
    pub n: usize,
    #[arg(long, default_value_t = 4)]
    pub s: usize,
    #[arg(long, default_value_t = 2048)]
    pub mo: usize,
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
    #[arg(long, default_value = "30")]
    pub snr: SignalSnr,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    /// Gaussian rows used by the sign-flip check.
    #[arg(long, default_value_t = 10_000)]
    pub rows: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct WidthArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub s: usize,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code: 0 on success, 2 on invalid arguments, 1 otherwise.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match dispatch(&cli.command, out) {
        Ok(()) => 0,
        Err(e @ Error::InvalidParameter { .. }) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn dispatch(cmd: &Command, out: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Experiment(a) => experiment(a, out),
        Command::Recover(a) => recover(a, out),
        Command::Bound(a) => bound(a, out),
        Command::Tessellate(a) => tessellate(a, out),
        Command::Width(a) => width(a, out),
    }
}

fn experiment(a: &ExperimentArgs, out: &mut dyn Write) -> Result<()> {
    let mut cfg = preset_config(a.id)?;
    cfg.n = a.n;
    cfg.n_v = a.nv;
    cfg.master_seed = a.seed;
    if let Some(g) = &a.s_grid {
        cfg.s_grid = g.clone();
    }
    if let Some(g) = &a.snr_grid {
        cfg.snr_grid = g.clone();
    }
    if let Some(algs) = &a.algorithms {
        cfg.algorithms = algs.clone();
    }
    cfg.validate()?;
    let threads = match a.threads {
        Some(k) => k.to_string(),
        None => "auto".into(),
    };
    let extra = vec![format!("threads={threads}"), format!("out={}", a.out.display())];
    for line in cfg.manifest_lines().iter().chain(&extra) {
        writeln!(out, "{line}")?;
    }
    let result = run_experiment(&cfg, a.threads)?;
    write_outputs(&a.out, &cfg, &result, &extra)?;
    for r in &result.aggregates {
        writeln!(
            out,
            "s={} xi_s={} {:>6}: xi_r = {:8.3} dB, exact support {:.3}",
            r.s,
            r.xi_s.as_db(),
            r.algorithm,
            r.xi_r_db,
            r.success_rate
        )?;
    }
    Ok(())
}

fn recover(a: &RecoverArgs, out: &mut dyn Write) -> Result<()> {
    let m = a.m.unwrap_or(a.mr + a.mo / 32);
    writeln!(
        out,
        "alg={} n={} s={} m_r={} m_o={} m={} snr_db={} seed={}",
        a.alg,
        a.n,
        a.s,
        a.mr,
        a.mo,
        m,
        a.snr.as_db(),
        a.seed
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let x = gen_sparse_signal(a.n, a.s, &mut rng)?;
    let u = gen_noise_for_snr(&x, a.snr, &mut rng)?.u;
    let x_tilde = &x.values + &u;
    let result = if a.alg.is_hybrid() {
        let a_r = gen_gaussian_matrix(a.mr, a.n, &mut rng)?;
        let a_o = gen_gaussian_matrix(a.mo, a.n, &mut rng)?;
        let hm = HybridMeasurements::acquire(a_r, a_o, &x_tilde)?;
        let first = algorithm1(&hm, a.s)?;
        if a.alg == Algorithm::Alg1 {
            first
        } else {
            algorithm2(&hm, a.s, &first.support, default_max_iters(a.s))?
        }
    } else {
        let mat = gen_gaussian_matrix(m, a.n, &mut rng)?;
        let y = linear_measure(&mat, &x_tilde)?;
        match a.alg {
            Algorithm::Omp => omp(&mat, &y, a.s)?,
            Algorithm::Sp => sp(&mat, &y, a.s)?,
            _ => cosamp(&mat, &y, a.s)?,
        }
    };
    let ratio = recovery_ratio(&x.values, &result.estimate.values);
    writeln!(out, "true_support={}", x.support)?;
    writeln!(out, "estimated_support={}", result.support)?;
    writeln!(out, "support_exact={}", u8::from(result.support == x.support))?;
    writeln!(out, "iterations={}", result.iterations)?;
    writeln!(out, "ratio={ratio:.6e}")?;
    writeln!(out, "ratio_db={:.4}", 10.0 * ratio.log10())?;
    for w in &result.warnings {
        writeln!(out, "warning: {w}")?;
    }
    Ok(())
}

fn bound_signal(a: &BoundArgs) -> Result<Signal> {
    if a.magnitudes.is_empty() || a.magnitudes.len() >= a.n {
        return Err(crate::error::invalid("magnitudes", "need between 1 and n-1 support values"));
    }
    if a.magnitudes.iter().any(|v| *v == 0.0 || !v.is_finite()) {
        return Err(crate::error::invalid("magnitudes", "support values must be finite and nonzero"));
    }
    let mut values = DVector::zeros(a.n);
    for (i, v) in a.magnitudes.iter().enumerate() {
        values[i] = *v;
    }
    Ok(Signal::from_values(values))
}

fn bound(a: &BoundArgs, out: &mut dyn Write) -> Result<()> {
    let x = bound_signal(a)?;
    let s = x.sparsity();
    let threshold = a.threshold.unwrap_or_else(|| default_threshold(a.mo));
    let value = match a.theorem {
        5 => {
            writeln!(out, "theorem=5 n={} s={s} m_o={} c={} threshold={threshold}", a.n, a.mo, a.c)?;
            let p = Theorem5Params {
                x,
                m_o: a.mo,
                c: vec![a.c; s],
                n_thr: vec![threshold; s],
            };
            theorem5_bound(&p)?
        }
        6 => {
            let mut p = Theorem6Params::missing_smallest(x, a.mo, a.s_prime)
                .map_err(|_| crate::error::invalid("s-prime", format!("must not exceed s = {s}")))?;
            p.n_hat = vec![threshold; a.s_prime];
            p.n_tilde = vec![threshold; a.s_prime];
            p.product_range = a.product_range;
            writeln!(
                out,
                "theorem=6 n={} s={s} m_o={} s_prime={} threshold={threshold} product_range={}",
                a.n,
                a.mo,
                a.s_prime,
                a.product_range.unwrap_or(a.s_prime)
            )?;
            theorem6_bound(&p)?
        }
        other => return Err(crate::error::invalid("theorem", format!("expected 5 or 6, got {other}"))),
    };
    writeln!(out, "raw={}", value.raw)?;
    writeln!(out, "clamped={}", value.clamped)?;
    if value.is_vacuous() {
        writeln!(out, "note: bound is vacuous for these parameters")?;
    }
    Ok(())
}

fn tessellate(a: &TessellateArgs, out: &mut dyn Write) -> Result<()> {
    writeln!(
        out,
        "n={} s={} m_o={} delta={} snr_db={} trials={} rows={} seed={}",
        a.n,
        a.s,
        a.mo,
        a.delta,
        a.snr.as_db(),
        a.trials,
        a.rows,
        a.seed
    )?;
    let summary = theorem4_batch(&Theorem4Batch {
        n: a.n,
        s: a.s,
        m_o: a.mo,
        delta: a.delta,
        snr: a.snr,
        trials: a.trials,
        seed: a.seed,
    })?;
    let mean_lhs = summary.reports.iter().map(|r| r.lhs).sum::<f64>() / summary.reports.len() as f64;
    let mean_da = summary.reports.iter().map(|r| r.d_a).sum::<f64>() / summary.reports.len() as f64;
    writeln!(
        out,
        "direction bound holds in {}/{} trials (rate {:.4}, 95% CI [{:.4}, {:.4}])",
        summary.holds, a.trials, summary.rate.value, summary.rate.lower, summary.rate.upper
    )?;
    writeln!(out, "mean lhs={mean_lhs:.6} mean d_A={mean_da:.6}")?;

    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    rng.set_stream(u64::MAX);
    let x = gen_sparse_signal(a.n, a.s, &mut rng)?.values;
    let y = gen_sparse_signal(a.n, a.s, &mut rng)?.values + &x * 0.5;
    let theta = angle(&x, &y)?;
    let rate = sign_flip_rate(&x, &y, a.rows, &mut rng)?;
    writeln!(
        out,
        "sign flips: rate={rate:.5} theta/pi={:.5} ({} rows)",
        theta / std::f64::consts::PI,
        a.rows
    )?;
    Ok(())
}

fn width(a: &WidthArgs, out: &mut dyn Write) -> Result<()> {
    writeln!(out, "n={} s={} samples={} seed={}", a.n, a.s, a.samples, a.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let est = gaussian_mean_width_sparse(a.n, a.s, a.samples, &mut rng)?;
    writeln!(out, "width={:.6} 95% CI [{:.6}, {:.6}]", est.value, est.lower, est.upper)?;
    Ok(())
}
