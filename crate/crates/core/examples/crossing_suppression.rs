//! Crossing contractions and trace correlations shrink like 1/N.

use otoc_rmt::analytic::corr_tr_z_squared;
use otoc_rmt::ensemble::SpectrumModel;
use otoc_rmt::observables::{generate_pair, OperatorKind, Support};
use otoc_rmt::wick::{crossing_ratio, variance_decomposition, TraceFactor};
use otoc_rmt::Complex64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("{:>4} {:>12} {:>9} {:>12} {:>12}", "N", "crossing", "N·ratio", "TrZ² corr", "closed form");
    for n in [4.0, 8.0, 16.0, 32.0, 64.0] {
        let model = SpectrumModel::with_levels(24, n)?;
        let pair = generate_pair(24, OperatorKind::RandomOffdiag, Support::new(4, 19), 3, 5)?;
        let a = &pair.v * &pair.v;
        let t = 0.7 / model.delta();
        let trace = TraceFactor::new(vec![a.clone(), a], vec![Complex64::new(0.0, -t), Complex64::new(0.0, t)]);
        let r = crossing_ratio(&trace, &model)?;
        let z = TraceFactor::partition_function(0.0, 24);
        let v = variance_decomposition(&z, &z, &model)?;
        println!(
            "{n:>4} {r:>12.4e} {:>9.4} {:>12.4e} {:>12.4e}",
            r * n,
            v.corr_noncrossing.re,
            corr_tr_z_squared(0.0, &model)
        );
    }
    Ok(())
}
