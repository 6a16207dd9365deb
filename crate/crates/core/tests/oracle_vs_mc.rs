//! The full contraction sum against gaussian-mode Monte Carlo on small spectra.

use num_complex::Complex64;
use otoc_rmt::analytic::MomentSpec;
use otoc_rmt::ensemble::{sample_member, EnsembleConfig, SpectrumModel};
use otoc_rmt::observables::{generate_pair, OperatorKind, Support};
use otoc_rmt::propagator::{build_y, ComplexArgument};
use otoc_rmt::stats::ComplexAccumulator;
use otoc_rmt::wick::{exact_moment, exact_trace, PatternFilter, Restrict, TraceFactor};

const MEMBERS: u64 = 3000;

fn within(acc: &ComplexAccumulator, exact: Complex64) -> bool {
    (acc.mean() - exact).norm() <= 3.5 * acc.stderr()
}

#[test]
fn moments_and_traces_match_sampling() {
    let model = SpectrumModel::with_levels(32, 4.0).unwrap();
    let config = EnsembleConfig::new(model, 9);
    let chi1 = Complex64::new(-0.05, -0.3);
    let chi2 = Complex64::new(-0.02, 0.45);
    let pair = generate_pair(32, OperatorKind::RandomOffdiag, Support::new(12, 19), 2, 4).unwrap();
    let specs = [
        MomentSpec::chain(vec![chi1, chi2], vec![15, 17]),
        MomentSpec::chain(vec![chi1, chi2], vec![16, 16]),
        MomentSpec { chis: vec![chi1, chi2], rows: vec![15, 16], cols: vec![15, 16] },
        MomentSpec::chain(vec![chi1, chi2, chi1], vec![14, 16, 17]),
    ];
    let trace = TraceFactor::new(vec![pair.v.clone(), pair.w.clone()], vec![chi1, chi2]);

    let mut moment_acc = vec![ComplexAccumulator::default(); specs.len()];
    let mut trace_acc = ComplexAccumulator::default();
    for i in 0..MEMBERS {
        let m = sample_member(&config, i).unwrap();
        let y1 = build_y(&m, ComplexArgument::new(chi1).unwrap()).unwrap().y;
        let y2 = build_y(&m, ComplexArgument::new(chi2).unwrap()).unwrap().y;
        for (acc, spec) in moment_acc.iter_mut().zip(&specs) {
            let value = (0..spec.order())
                .map(|j| {
                    let y = if spec.chis[j] == chi1 { &y1 } else { &y2 };
                    y[(spec.rows[j], spec.cols[j])]
                })
                .product();
            acc.push(value);
        }
        let v = pair.v.map(|x| Complex64::new(x, 0.0));
        let w = pair.w.map(|x| Complex64::new(x, 0.0));
        trace_acc.push((&v * &y1 * &w * &y2).trace());
    }
    for (acc, spec) in moment_acc.iter().zip(&specs) {
        let exact = exact_moment(spec, &model, Restrict::All).unwrap();
        assert!(within(acc, exact), "{spec:?}: MC {} ± {} vs {exact}", acc.mean(), acc.stderr());
    }
    let exact = exact_trace(&[trace], &model, PatternFilter::All).unwrap();
    assert!(within(&trace_acc, exact), "trace: MC {} ± {} vs {exact}", trace_acc.mean(), trace_acc.stderr());
}
