//! A small bit-budget comparison: every algorithm over a grid of signal SNRs,
//! printed as a recovery-SNR table. Pass a directory to also write the CSVs.

use std::path::PathBuf;

use hybrid_cs::experiment::{preset_config, run_experiment, write_outputs, Algorithm, ExperimentConfig};
use hybrid_cs::SignalSnr;

fn main() -> hybrid_cs::Result<()> {
    let cfg = ExperimentConfig {
        n_v: 40,
        s_grid: vec![4, 8],
        snr_grid: [0.0, 10.0, 20.0, 30.0].map(SignalSnr::Db).to_vec(),
        ..preset_config(1)?
    };
    let result = run_experiment(&cfg, None)?;

    for &s in &cfg.s_grid {
        let d = cfg.dims(s);
        println!("s = {s}: m_r = {}, m_o = {}, m = {}", d.m_r, d.m_o, d.m);
        print!("{:>8}", "ξ_s dB");
        for alg in Algorithm::ALL {
            print!("{:>9}", alg.as_str());
        }
        println!();
        for &q in &cfg.snr_grid {
            print!("{:>8.0}", q.as_db());
            for alg in Algorithm::ALL {
                print!("{:>9.2}", result.xi_r(alg, s, q).unwrap_or(f64::NAN));
            }
            println!();
        }
    }

    if let Some(dir) = std::env::args_os().nth(1).map(PathBuf::from) {
        write_outputs(&dir, &cfg, &result, &[])?;
        println!("wrote {}", dir.display());
    }
    Ok(())
}
