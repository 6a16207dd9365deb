//! Checks the exact propagator identities on one orthogonalized member.

use nalgebra::DMatrix;
use otoc_rmt::ensemble::{build_hamiltonian, sample_member, EnsembleConfig, OverlapMode, SpectrumModel};
use otoc_rmt::propagator::{build_y, build_y_block, trace_z, ComplexArgument};
use otoc_rmt::Complex64;

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = SpectrumModel::with_levels(48, 4.0)?;
    let config = EnsembleConfig::new(model, 3).with_overlap(OverlapMode::Orthogonalized);
    let member = sample_member(&config, 0)?;
    let (beta, t) = (1.0 / (4.0 * model.delta()), 0.6);

    let chi = ComplexArgument::regularized(beta, t)?;
    let y = build_y(&member, chi)?;
    let h = build_hamiltonian(&member).map(|x| Complex64::new(x, 0.0));
    let half = (&h * Complex64::new(-beta / 2.0, 0.0)).exp();
    println!("Y(χ)Y(χ)† − e^(−βH/2): {:.2e}", max_abs(&(&y.y * &y.adjoint().y - &half)));

    let u = build_y(&member, ComplexArgument::evolution(t)?)?.y;
    println!("U U† − 1:              {:.2e}", max_abs(&(&u * u.adjoint() - DMatrix::identity(48, 48))));

    let a = build_y(&member, ComplexArgument::evolution(0.4)?)?.y;
    let b = build_y(&member, ComplexArgument::evolution(0.2)?)?.y;
    println!("U(0.4)U(0.2) − U(0.6):  {:.2e}", max_abs(&(&a * &b - &u)));

    let block = build_y_block(&member, chi, 16..32)?.y;
    println!("window block − full:   {:.2e}", max_abs(&(block - y.y.view((16, 16), (16, 16)))));

    let z = build_y(&member, ComplexArgument::boltzmann(beta)?)?.y;
    println!("Tr Z = {:.6} (direct {:.6})", trace_z(&member, beta)?, z.trace().re);
    Ok(())
}
