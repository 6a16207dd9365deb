//! Monte Carlo ⟨C(t)⟩ and ⟨F(t)⟩ against the leading-order predictions.
//!
//! `cargo run --release --example otoc_series -- [members] [N] [kind]`

use otoc_rmt::ensemble::{EnsembleConfig, SpectrumModel};
use otoc_rmt::observables::{OperatorKind, Support};
use otoc_rmt::otoc::{run_series, NormalizationMode, PairSpec, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let members: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(100);
    let n: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(16.0);
    let kind = match args.next().as_deref() {
        Some("hopping") => OperatorKind::Hopping,
        _ => OperatorKind::RandomOffdiag,
    };
    let d = (32.0 * n) as usize;
    let model = SpectrumModel::with_levels(d, n)?;
    let config = RunConfig {
        ensemble: EnsembleConfig::new(model, 1),
        pair: PairSpec {
            kind,
            support: Support::centered(d, 64),
            bandwidth: 4,
            seed: 7,
        },
        beta: 0.0,
        t_grid: (0..=16).map(|i| 0.25 * i as f64 / model.delta()).collect(),
        members,
        normalization: NormalizationMode::PerMember,
        workers: None,
    };
    let s = run_series(&config)?;
    println!("{:>6} {:>11} {:>9} {:>11} {:>11} {:>9} {:>11}", "tΔ", "C_mc", "C_se", "C_lead", "|F_mc|", "F_se", "|F_lead|");
    for k in 0..s.t.len() {
        println!(
            "{:>6.2} {:>11.4e} {:>9.2e} {:>11.4e} {:>11.4e} {:>9.2e} {:>11.4e}",
            s.t[k] * model.delta(),
            s.c_mean[k],
            s.c_stderr[k],
            s.c_analytic[k],
            s.f_mean[k].norm(),
            s.f_stderr[k],
            s.f_analytic[k].norm()
        );
    }
    println!("Tr Z = {:.3} ± {:.3}", s.tr_z.mean, s.tr_z.stderr);
    Ok(())
}
