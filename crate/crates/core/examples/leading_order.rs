//! Leading-order ⟨C(t)⟩ and ⟨F(t)⟩ for the default hopping pair, no sampling.

use otoc_rmt::analytic::{c_asymptote, c_prediction, f_prediction, single_decay, LocalPair};
use otoc_rmt::ensemble::SpectrumModel;
use otoc_rmt::observables::{generate_pair, OperatorKind, Support};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = SpectrumModel::with_levels(512, 16.0)?;
    let pair = generate_pair(512, OperatorKind::Hopping, Support::new(224, 287), 4, 7)?;
    let local = LocalPair::new(&pair, &model);
    let delta = model.delta();
    for beta in [0.0, 1.0 / (4.0 * delta)] {
        println!("βΔ = {:.2}, asymptote {:.6}", beta * delta, c_asymptote(&local, beta, &model));
        println!("{:>5} {:>12} {:>12} {:>12}", "tΔ", "C", "S(t)", "|F|");
        for k in 0..=8 {
            let t = 0.5 * k as f64 / delta;
            println!(
                "{:>5.2} {:>12.5e} {:>12.5e} {:>12.5e}",
                t * delta,
                c_prediction(&local, beta, t, &model),
                single_decay(&local, beta, t),
                f_prediction(&local, beta, t, &model).norm()
            );
        }
    }
    Ok(())
}
