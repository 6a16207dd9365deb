//! Samples ensemble members and prints band occupancy and level-spacing statistics.
//!
//! `cargo run --release --example sample_ensemble -- [N]`

use otoc_rmt::ensemble::{sample_member, EigenvalueMode, EnsembleConfig, OverlapMode, SpectrumModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: f64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(8.0);
    let d = (16.0 * n) as usize;
    let model = SpectrumModel::with_levels(d, n)?;
    let config = EnsembleConfig::new(model, 42).with_eigenvalues(EigenvalueMode::GoeUnfolded);
    println!("D = {d}, N = {n}, band ±{} levels, padding {}", config.band_levels(), config.padding());

    let member = sample_member(&config, 0)?;
    let m = d / 2;
    let (lo, row) = member.o.row(m);
    let weight: f64 = row.iter().map(|x| x * x).sum();
    println!("row {m}: columns {lo}..{}, Σ O² = {weight:.4}", lo + row.len());

    let mut spacings = Vec::new();
    for i in 0..20 {
        let e = sample_member(&config, i)?.e;
        let k = e.len();
        spacings.extend(e[k / 4..3 * k / 4].windows(2).map(|w| w[1] - w[0]));
    }
    let mean = spacings.iter().sum::<f64>() / spacings.len() as f64;
    println!("{} bulk spacings, mean {mean:.4}", spacings.len());
    println!("{:>6} {:>9} {:>9}", "s", "P(s)", "Wigner");
    for b in 0..12 {
        let (a, c) = (0.25 * b as f64, 0.25 * (b + 1) as f64);
        let count = spacings.iter().filter(|&&s| s / mean >= a && s / mean < c).count();
        let s = 0.5 * (a + c);
        let wigner = std::f64::consts::FRAC_PI_2 * s * (-std::f64::consts::FRAC_PI_4 * s * s).exp();
        println!("{s:>6.3} {:>9.4} {wigner:>9.4}", count as f64 / spacings.len() as f64 / 0.25);
    }

    let orth = EnsembleConfig::new(SpectrumModel::with_levels(64, 4.0)?, 42).with_overlap(OverlapMode::Orthogonalized);
    let o = sample_member(&orth, 0)?.o_dense();
    let defect = (o.transpose() * &o - nalgebra::DMatrix::identity(64, 64)).amax();
    println!("orthogonalized D = 64: max |OᵀO − 1| = {defect:.2e}");
    Ok(())
}
