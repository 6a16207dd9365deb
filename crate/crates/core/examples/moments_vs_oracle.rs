//! Closed-form moments against the exact contraction sum, including the sign of
//! the energy-spread exponent.

use otoc_rmt::analytic::{correlated_moment, first_moment, MomentSpec};
use otoc_rmt::ensemble::SpectrumModel;
use otoc_rmt::wick::{contributing_patterns, exact_moment, Restrict};
use otoc_rmt::Complex64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = SpectrumModel::with_levels(256, 16.0)?;
    let chi = Complex64::new(-0.01, -0.08);
    let spec = MomentSpec::chain(vec![chi], vec![128]);
    println!(
        "k=1: closed {:.6e}  oracle {:.6e}",
        first_moment(chi, model.energy(128), model.delta()),
        exact_moment(&spec, &model, Restrict::All)?
    );

    let chis = vec![Complex64::new(-0.01, -0.05), Complex64::new(0.0, 0.11), Complex64::new(-0.02, 0.03)];
    for m in [vec![120, 130, 140], vec![100, 128, 150]] {
        let spec = MomentSpec::chain(chis.clone(), m.clone());
        let closed = correlated_moment(&spec, &model)?;
        let oracle = exact_moment(&spec, &model, Restrict::ConnectedNonCrossing)?;
        let patterns = contributing_patterns(&spec, Restrict::ConnectedNonCrossing)?;
        // with a positive exponent the energy spread would enhance instead of suppress
        let spread: f64 = (0..3)
            .flat_map(|i| (i + 1..3).map(move |j| (i, j)))
            .map(|(i, j)| (model.energy(m[i]) - model.energy(m[j])).powi(2))
            .sum();
        let flipped = closed * (spread / (3.0 * model.delta().powi(2))).exp();
        println!(
            "k=3 m={m:?}: closed {closed:.6e}  oracle {oracle:.6e}  ({} pattern)  positive-sign variant {flipped:.3e}",
            patterns.len()
        );
    }
    Ok(())
}
