use num_complex::Complex64;
use otoc_rmt::ensemble::SpectrumModel;
use otoc_rmt::wick::{exact_trace_patterns, TraceFactor};

/// Pairings of the eight O slots of Tr(A₁Y₁A₂Y₂A₃Y₃A₄Y₄) behind each leading piece.
pub const MEANS: [(usize, usize); 4] = [(0, 1), (2, 3), (4, 5), (6, 7)];
pub const PAIR13: [(usize, usize); 4] = [(0, 5), (1, 4), (2, 3), (6, 7)];
pub const PAIR24: [(usize, usize); 4] = [(0, 1), (2, 7), (3, 6), (4, 5)];

/// Oracle values of the means, pair13 and pair24 patterns.
pub fn oracle_pieces(trace: &TraceFactor, model: &SpectrumModel) -> [Complex64; 3] {
    let all = exact_trace_patterns(std::slice::from_ref(trace), model).unwrap();
    let pick = |target: &[(usize, usize)]| all.iter().find(|(i, _)| i.pattern.pairs == target).unwrap().1;
    [pick(&MEANS), pick(&PAIR13), pick(&PAIR24)]
}

pub fn close(a: Complex64, b: Complex64, rel: f64) -> bool {
    (a - b).norm() <= rel * a.norm().max(b.norm()).max(1e-300)
}
