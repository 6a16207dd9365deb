//! Exact Gaussian averages by explicit pair contraction.
//!
//! Each factor `Y_{ab}(χ) = Σ_α O_{aα} e^{χE_α} O_{bα}` contributes two O slots.
//! A pattern is a perfect matching of all slots; a matched pair forces equal
//! HF indices and ties the two eigenvalue labels together. Factors linked by
//! pairs share one Ē, which is integrated exactly against `ρ dĒ` (picket
//! eigenvalues, Ē on the whole real line).

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

use crate::analytic::MomentSpec;
use crate::ensemble::SpectrumModel;
use crate::{Error, Result};

pub const MAX_PAIRING_ORDER: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContractionPattern {
    /// Matched slot pairs `(a, b)` with `a < b`, sorted by `a`.
    pub pairs: Vec<(usize, usize)>,
    pub crossing: bool,
    /// All factors in one linked component.
    pub connected: bool,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }

    fn components(&mut self) -> usize {
        (0..self.0.len()).filter(|&i| self.find(i) == i).count()
    }
}

fn matchings(n: usize) -> Vec<Vec<(usize, usize)>> {
    fn rec(free: &mut Vec<usize>, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if free.is_empty() {
            out.push(cur.clone());
            return;
        }
        let a = free.remove(0);
        for i in 0..free.len() {
            let b = free.remove(i);
            cur.push((a, b));
            rec(free, cur, out);
            cur.pop();
            free.insert(i, b);
        }
        free.insert(0, a);
    }
    let mut out = Vec::new();
    rec(&mut (0..n).collect(), &mut Vec::new(), &mut out);
    out
}

/// Chords (a, b) and (c, d) on a circle cross iff exactly one endpoint of one lies strictly inside the other.
fn chords_cross(p: (usize, usize), q: (usize, usize)) -> bool {
    let (a, b) = (p.0.min(p.1), p.0.max(p.1));
    let inside = |x: usize| a < x && x < b;
    inside(q.0) != inside(q.1)
}

fn is_crossing(pairs: &[(usize, usize)], position: &[usize]) -> bool {
    for (i, &p) in pairs.iter().enumerate() {
        for &q in &pairs[i + 1..] {
            if chords_cross((position[p.0], position[p.1]), (position[q.0], position[q.1])) {
                return true;
            }
        }
    }
    false
}

fn factor_components(pairs: &[(usize, usize)], factors: usize) -> usize {
    let mut uf = UnionFind::new(factors);
    for &(a, b) in pairs {
        uf.union(a / 2, b / 2);
    }
    uf.components()
}

/// All (2k−1)!! matchings of the 2k slots of a k-factor product, in trace order.
pub fn enumerate_pairings(k: usize) -> Result<Vec<ContractionPattern>> {
    if k == 0 || k > MAX_PAIRING_ORDER {
        return Err(Error::OrderOutOfRange { k, max: MAX_PAIRING_ORDER });
    }
    let position: Vec<usize> = (0..2 * k).collect();
    Ok(matchings(2 * k)
        .into_iter()
        .map(|pairs| ContractionPattern {
            crossing: is_crossing(&pairs, &position),
            connected: factor_components(&pairs, k) == 1,
            pairs,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Restrict {
    All,
    NonCrossing,
    ConnectedNonCrossing,
}

impl Restrict {
    fn admits(self, p: &ContractionPattern) -> bool {
        match self {
            Restrict::All => true,
            Restrict::NonCrossing => !p.crossing,
            Restrict::ConnectedNonCrossing => !p.crossing && p.connected,
        }
    }
}

/// ρ∫dĒ Π_p F(h_p − Ē) e^{χĒ}, by completing the square in Ē.
fn block_integral(chi: Complex64, h: &[f64], model: &SpectrumModel) -> Complex64 {
    let delta = model.delta();
    let rho = model.density();
    let c = h.len() as f64;
    let a = c / (delta * delta);
    let b = chi + h.iter().sum::<f64>() / (delta * delta);
    let k0 = -h.iter().map(|x| x * x).sum::<f64>() / (2.0 * delta * delta);
    let norm = ((2.0 * PI).sqrt() * rho * delta).powf(-c);
    (b * b / (2.0 * a) + k0).exp() * (rho * (2.0 * PI / a).sqrt() * norm)
}

/// Value of one pattern given the HF index carried by every slot and the χ of every factor.
fn pattern_value(pairs: &[(usize, usize)], slot_energy: &dyn Fn(usize) -> f64, chis: &[Complex64], model: &SpectrumModel) -> Complex64 {
    let k = chis.len();
    let mut uf = UnionFind::new(k);
    for &(a, b) in pairs {
        uf.union(a / 2, b / 2);
    }
    let mut value = Complex64::new(1.0, 0.0);
    for root in 0..k {
        if uf.find(root) != root {
            continue;
        }
        let chi: Complex64 = (0..k).filter(|&f| uf.find(f) == root).map(|f| chis[f]).sum();
        let h: Vec<f64> = pairs.iter().filter(|&&(a, _)| uf.find(a / 2) == root).map(|&(a, _)| slot_energy(a)).collect();
        value *= block_integral(chi, &h, model);
    }
    value
}

/// Patterns whose index constraints are met by the spec's row and column indices.
pub fn contributing_patterns(spec: &MomentSpec, restrict: Restrict) -> Result<Vec<ContractionPattern>> {
    let slots = slot_indices(spec);
    Ok(enumerate_pairings(spec.order())?
        .into_iter()
        .filter(|p| restrict.admits(p) && p.pairs.iter().all(|&(a, b)| slots[a] == slots[b]))
        .collect())
}

fn slot_indices(spec: &MomentSpec) -> Vec<usize> {
    spec.rows.iter().zip(&spec.cols).flat_map(|(&r, &c)| [r, c]).collect()
}

/// ⟨Π_j Y_{m_j n_j}(χ_j)⟩ summed over the patterns admitted by `restrict`.
pub fn exact_moment(spec: &MomentSpec, model: &SpectrumModel, restrict: Restrict) -> Result<Complex64> {
    let slots = slot_indices(spec);
    let energy = |s: usize| model.energy(slots[s]);
    Ok(contributing_patterns(spec, restrict)?
        .iter()
        .map(|p| pattern_value(&p.pairs, &energy, &spec.chis, model))
        .sum())
}

/// Tr(A₁ Y(χ₁) A₂ Y(χ₂) ⋯ A_n Y(χ_n)).
#[derive(Debug, Clone, PartialEq)]
pub struct TraceFactor {
    pub ops: Vec<DMatrix<f64>>,
    pub chis: Vec<Complex64>,
}

impl TraceFactor {
    pub fn new(ops: Vec<DMatrix<f64>>, chis: Vec<Complex64>) -> Self {
        assert_eq!(ops.len(), chis.len(), "one operator per factor");
        assert!(!ops.is_empty());
        Self { ops, chis }
    }

    /// Tr Y(−β).
    pub fn partition_function(beta: f64, dimension: usize) -> Self {
        Self::new(vec![DMatrix::identity(dimension, dimension)], vec![Complex64::new(-beta, 0.0)])
    }

    pub fn order(&self) -> usize {
        self.chis.len()
    }

    /// The complex-conjugate trace (O real, operators real).
    pub fn conj(&self) -> Self {
        let mut ops = self.ops.clone();
        let mut chis: Vec<Complex64> = self.chis.iter().map(|c| c.conj()).collect();
        // Tr(A1 Y1 ... An Yn)* with transposed, reversed order
        ops.reverse();
        chis.reverse();
        ops.rotate_right(1);
        let ops = ops.into_iter().map(|a| a.transpose()).collect();
        Self { ops, chis }
    }
}

/// Flags of a pattern on a product of traces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PatternInfo {
    pub pattern: ContractionPattern,
    /// Pairs join every trace of the product into one component.
    pub traces_linked: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternFilter {
    All,
    NonCrossing,
    Crossing,
    Linked,
    LinkedNonCrossing,
}

impl PatternFilter {
    pub fn admits(self, info: &PatternInfo) -> bool {
        match self {
            PatternFilter::All => true,
            PatternFilter::NonCrossing => !info.pattern.crossing,
            PatternFilter::Crossing => info.pattern.crossing,
            PatternFilter::Linked => info.traces_linked,
            PatternFilter::LinkedNonCrossing => info.traces_linked && !info.pattern.crossing,
        }
    }
}

struct Layout {
    chis: Vec<Complex64>,
    trace_of: Vec<usize>,
    /// (matrix, from slot, to slot): A[idx(from), idx(to)]
    links: Vec<(usize, usize, usize)>,
    /// circle position of each slot; later traces run in reverse
    position: Vec<usize>,
    traces: usize,
}

fn layout(product: &[TraceFactor]) -> Layout {
    let mut chis = Vec::new();
    let mut trace_of = Vec::new();
    let mut links = Vec::new();
    let mut position = Vec::new();
    let mut mat = 0;
    let total_slots: usize = product.iter().map(|t| 2 * t.order()).sum();
    position.resize(total_slots, 0);
    let mut base = 0;
    for (ti, t) in product.iter().enumerate() {
        let n = t.order();
        for j in 0..n {
            chis.push(t.chis[j]);
            trace_of.push(ti);
            let row = base + 2 * j;
            let prev_col = base + 2 * ((j + n - 1) % n) + 1;
            links.push((mat, prev_col, row));
            mat += 1;
        }
        for s in 0..2 * n {
            position[base + s] = if ti == 0 { base + s } else { base + 2 * n - 1 - s };
        }
        base += 2 * n;
    }
    Layout {
        chis,
        trace_of,
        links,
        position,
        traces: product.len(),
    }
}

/// Every pattern on the product with its exact value (index sums carried out).
pub fn exact_trace_patterns(product: &[TraceFactor], model: &SpectrumModel) -> Result<Vec<(PatternInfo, Complex64)>> {
    let k: usize = product.iter().map(|t| t.order()).sum();
    if k == 0 || k > MAX_PAIRING_ORDER {
        return Err(Error::OrderOutOfRange { k, max: MAX_PAIRING_ORDER });
    }
    let d = model.dimension();
    let mats: Vec<&DMatrix<f64>> = product.iter().flat_map(|t| t.ops.iter()).collect();
    if mats.iter().any(|m| m.nrows() != d || m.ncols() != d) {
        return Err(Error::InvalidConfig(format!("trace operators must be {d}×{d}")));
    }
    let sparse: Vec<Sparse> = mats.iter().map(|m| Sparse::new(m)).collect();
    let lay = layout(product);
    let mut out = Vec::new();
    for pairs in matchings(2 * k) {
        let mut tuf = UnionFind::new(lay.traces);
        for &(a, b) in &pairs {
            tuf.union(lay.trace_of[a / 2], lay.trace_of[b / 2]);
        }
        let info = PatternInfo {
            pattern: ContractionPattern {
                crossing: is_crossing(&pairs, &lay.position),
                connected: factor_components(&pairs, k) == 1,
                pairs: pairs.clone(),
            },
            traces_linked: tuf.components() == 1,
        };
        let value = sum_indices(&pairs, &lay, &mats, &sparse, model);
        out.push((info, value));
    }
    Ok(out)
}

/// Σ over admitted patterns.
pub fn exact_trace(product: &[TraceFactor], model: &SpectrumModel, filter: PatternFilter) -> Result<Complex64> {
    Ok(exact_trace_patterns(product, model)?
        .into_iter()
        .filter(|(info, _)| filter.admits(info))
        .map(|(_, v)| v)
        .sum())
}

struct Sparse {
    rows: Vec<Vec<usize>>,
    cols: Vec<Vec<usize>>,
}

impl Sparse {
    fn new(m: &DMatrix<f64>) -> Self {
        let (r, c) = m.shape();
        let mut rows = vec![Vec::new(); r];
        let mut cols = vec![Vec::new(); c];
        for i in 0..r {
            for j in 0..c {
                if m[(i, j)] != 0.0 {
                    rows[i].push(j);
                    cols[j].push(i);
                }
            }
        }
        Self { rows, cols }
    }
}

fn sum_indices(pairs: &[(usize, usize)], lay: &Layout, mats: &[&DMatrix<f64>], sparse: &[Sparse], model: &SpectrumModel) -> Complex64 {
    // each pair is one index variable
    let nslots = 2 * lay.chis.len();
    let mut var_of = vec![0usize; nslots];
    for (v, &(a, b)) in pairs.iter().enumerate() {
        var_of[a] = v;
        var_of[b] = v;
    }
    let nvars = pairs.len();
    let constraints: Vec<(usize, usize, usize)> = lay.links.iter().map(|&(m, from, to)| (m, var_of[from], var_of[to])).collect();
    let mut assign = vec![usize::MAX; nvars];
    let mut total = Complex64::new(0.0, 0.0);
    let d = model.dimension();
    dfs(0, nvars, d, &constraints, mats, sparse, &mut assign, &mut |assign| {
        let mut weight = 1.0;
        for &(m, a, b) in &constraints {
            weight *= mats[m][(assign[a], assign[b])];
        }
        let energy = |s: usize| model.energy(assign[var_of[s]]);
        total += pattern_value(pairs, &energy, &lay.chis, model) * weight;
    });
    total
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    depth: usize,
    nvars: usize,
    d: usize,
    constraints: &[(usize, usize, usize)],
    mats: &[&DMatrix<f64>],
    sparse: &[Sparse],
    assign: &mut Vec<usize>,
    leaf: &mut dyn FnMut(&[usize]),
) {
    if depth == nvars {
        leaf(assign);
        return;
    }
    let assigned = |v: usize, assign: &[usize]| v < depth && assign[v] != usize::MAX;
    // restrict candidates through a link to an already assigned variable
    let mut candidates: Option<Vec<usize>> = None;
    for &(m, a, b) in constraints {
        let list = if b == depth && assigned(a, assign) {
            Some(&sparse[m].rows[assign[a]])
        } else if a == depth && assigned(b, assign) {
            Some(&sparse[m].cols[assign[b]])
        } else {
            None
        };
        if let Some(l) = list {
            if candidates.as_ref().is_none_or(|c| l.len() < c.len()) {
                candidates = Some(l.clone());
            }
        }
    }
    let candidates = candidates.unwrap_or_else(|| (0..d).collect());
    for x in candidates {
        assign[depth] = x;
        let ok = constraints.iter().all(|&(m, a, b)| {
            let top = a.max(b);
            top != depth || mats[m][(assign[a], assign[b])] != 0.0
        });
        if ok {
            dfs(depth + 1, nvars, d, constraints, mats, sparse, assign, leaf);
        }
    }
    assign[depth] = usize::MAX;
}

/// |crossing-class total| / |non-crossing-class total| for one trace.
pub fn crossing_ratio(trace: &TraceFactor, model: &SpectrumModel) -> Result<f64> {
    let all = exact_trace_patterns(std::slice::from_ref(trace), model)?;
    let (mut cross, mut non) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for (info, v) in all {
        if info.pattern.crossing {
            cross += v;
        } else {
            non += v;
        }
    }
    Ok(cross.norm() / non.norm())
}

/// Exact connected correlation of two traces against the product of their means.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceReport {
    pub mean1: Complex64,
    pub mean2: Complex64,
    /// ⟨T₁T₂⟩ − ⟨T₁⟩⟨T₂⟩, every linking pattern.
    pub corr_all: Complex64,
    /// Linking patterns that are non-crossing on the annulus.
    pub corr_noncrossing: Complex64,
    pub ratio_all: f64,
    pub ratio_noncrossing: f64,
}

pub fn variance_decomposition(t1: &TraceFactor, t2: &TraceFactor, model: &SpectrumModel) -> Result<VarianceReport> {
    let k = t1.order() + t2.order();
    if k > MAX_PAIRING_ORDER {
        return Err(Error::OrderOutOfRange { k, max: MAX_PAIRING_ORDER });
    }
    let mean1 = exact_trace(std::slice::from_ref(t1), model, PatternFilter::All)?;
    let mean2 = exact_trace(std::slice::from_ref(t2), model, PatternFilter::All)?;
    let both = exact_trace_patterns(&[t1.clone(), t2.clone()], model)?;
    let mut corr_all = Complex64::new(0.0, 0.0);
    let mut corr_noncrossing = Complex64::new(0.0, 0.0);
    for (info, v) in both {
        if PatternFilter::Linked.admits(&info) {
            corr_all += v;
        }
        if PatternFilter::LinkedNonCrossing.admits(&info) {
            corr_noncrossing += v;
        }
    }
    let denom = (mean1 * mean2).norm();
    Ok(VarianceReport {
        mean1,
        mean2,
        corr_all,
        corr_noncrossing,
        ratio_all: corr_all.norm() / denom,
        ratio_noncrossing: corr_noncrossing.norm() / denom,
    })
}
