//! Block measures: weights on admissible `n`-words glued by connector words,
//! their entropy and Birkhoff statistics, weight optimization under a ratio
//! constraint, and the finite-level roots `s_n`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{bracket_decreasing, find_root, log_sum_exp, Enclosure};
use crate::pressure::ThermoSystem;
use crate::symbolic::{word_code, LevelTable};

/// Connector words for every pair (`n`-word, first symbol of the next
/// word), all of one length.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Connectors {
    pub level: usize,
    pub length: usize,
    /// Indexed by `word_index * p + next_symbol`, in table order.
    words: Vec<Option<Vec<usize>>>,
    symbols: usize,
}

impl Connectors {
    /// The connector placed after the `index`-th `n`-word when the next word
    /// starts with `next`; `None` if no word starts with `next` after it.
    pub fn get(&self, index: usize, next: usize) -> Option<&[usize]> {
        self.words[index * self.symbols + next].as_deref()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockStats {
    /// `-sum q log q`, the entropy per block of `n + k` symbols.
    pub entropy: f64,
    /// Per-symbol averages of `log|T'|` and of `phi`, each widened by
    /// `k L / (n + k) + rho_n`.
    pub lyapunov: Enclosure,
    pub phi_avg: Enclosure,
    /// `sum q S_n log|T'|` and `sum q S_n phi` at representative points.
    pub psi_block: f64,
    pub phi_block: f64,
    pub rho: f64,
    pub bound_l: f64,
    pub slack: f64,
}

impl BlockStats {
    /// `entropy / sum q S_n log|T'|`.
    pub fn objective(&self) -> f64 {
        self.entropy / self.psi_block
    }

    /// `-sum q S_n phi / sum q S_n log|T'|`.
    pub fn ratio(&self) -> f64 {
        -self.phi_block / self.psi_block
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockMeasure {
    pub level: usize,
    pub connector_length: usize,
    /// Weights on the admissible `n`-words in lexicographic order.
    pub weights: Vec<f64>,
    pub connectors: Connectors,
    pub stats: BlockStats,
}

/// Statistics of the shift-invariant average of a block measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InvariantStats {
    pub entropy: f64,
    pub lyapunov: Enclosure,
    pub phi_avg: Enclosure,
}

impl InvariantStats {
    /// `-phi_avg / lyapunov` at the point estimates.
    pub fn ratio(&self) -> f64 {
        -self.phi_avg.value / self.lyapunov.value
    }
}

fn find_code(table: &LevelTable, code: u64) -> Option<usize> {
    table.entries.binary_search_by_key(&code, |e| e.code).ok()
}

fn connectors_of_length(sys: &ThermoSystem, n: usize, k: usize) -> Result<Option<Connectors>> {
    let map = sys.map();
    let p = map.num_symbols();
    let base = sys.table(n)?;
    let joined = sys.table(n + k)?;
    let shift = (p as u64).pow(k as u32);
    let omegas: Vec<Vec<usize>> = if k == 0 {
        vec![Vec::new()]
    } else {
        crate::symbolic::enumerate_words(map, k, u64::MAX)?.collect()
    };
    let mut words = Vec::with_capacity(base.len() * p);
    for e in &base.entries {
        let last = (e.code % p as u64) as usize;
        for next in 0..p {
            let found = omegas.iter().find(|w| {
                let tail = w.last().copied().unwrap_or(last);
                if !map.allowed(tail, next) || w.first().is_some_and(|&s| !map.allowed(last, s)) {
                    return false;
                }
                let code = e.code * shift + word_code(w, p);
                find_code(&joined, code).is_some_and(|i| joined.entries[i].psi[0] > 0.0)
            });
            match found {
                Some(w) => words.push(Some(w.clone())),
                None => return Ok(None),
            }
        }
    }
    Ok(Some(Connectors { level: n, length: k, words, symbols: p }))
}

/// Smallest `k` such that every pair of `n`-words can be joined through a
/// connector of length `k` with positive lower bracket of `S_{n+k} log|T'|`
/// on the joined cylinder. Ties are broken lexicographically.
pub fn connector_length(sys: &ThermoSystem, n: usize, k_max: Option<usize>) -> Result<Connectors> {
    if n == 0 {
        return Err(Error::InvalidInput("block level must be at least 1".into()));
    }
    let k_max = k_max.unwrap_or(3 * sys.map().aperiodicity_power() + 8);
    for k in 0..=k_max {
        if let Some(c) = connectors_of_length(sys, n, k)? {
            return Ok(c);
        }
    }
    Err(Error::NoConnector { level: n, k_max })
}

/// Shannon entropy `-sum q log q` with `0 log 0 = 0`.
pub fn entropy(q: &[f64]) -> f64 {
    -q.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>()
}

/// Block measure with weights `q` on the admissible `n`-words, in
/// lexicographic order.
pub fn block_measure(sys: &ThermoSystem, n: usize, q: Vec<f64>) -> Result<BlockMeasure> {
    let table = sys.table(n)?;
    if q.len() != table.len() {
        return Err(Error::InvalidInput(format!("expected {} weights, got {}", table.len(), q.len())));
    }
    if q.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::InvalidInput("weights must be finite and nonnegative".into()));
    }
    let total: f64 = q.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!("weights sum to {total}, not 1")));
    }
    let connectors = connector_length(sys, n, None)?;
    let k = connectors.length;
    let mut psi_block = 0.0;
    let mut phi_block = 0.0;
    let mut rho = 0.0f64;
    for (e, &w) in table.entries.iter().zip(&q) {
        let f = sys.phi_sum(e, n);
        psi_block += w * e.psi[1];
        phi_block += w * f[1];
        rho = rho.max(e.psi[2] - e.psi[0]).max(f[2] - f[0]);
    }
    let nf = n as f64;
    let rho = rho / nf;
    let bound_l = (-sys.inf_phi()?).max(sys.sup_phi()?.abs()).max(sys.sup_psi()?);
    let slack = k as f64 * bound_l / (nf + k as f64) + rho;
    let around = |c: f64| Enclosure::new(c - slack, c, c + slack);
    let stats = BlockStats {
        entropy: entropy(&q),
        lyapunov: around(psi_block / nf),
        phi_avg: around(phi_block / nf),
        psi_block,
        phi_block,
        rho,
        bound_l,
        slack,
    };
    Ok(BlockMeasure { level: n, connector_length: k, weights: q, connectors, stats })
}

/// Block measure from explicit `(word, weight)` pairs; words not listed get
/// weight zero.
pub fn block_measure_from_words(sys: &ThermoSystem, n: usize, words: &[(Vec<usize>, f64)]) -> Result<BlockMeasure> {
    let table = sys.table(n)?;
    let p = sys.map().num_symbols();
    let mut q = vec![0.0; table.len()];
    for (w, x) in words {
        if w.len() != n || w.iter().any(|&s| s >= p) || !sys.map().is_admissible(w) {
            return Err(Error::InadmissibleSupport(format!("word {w:?} is not an admissible {n}-word")));
        }
        let i = find_code(&table, word_code(w, p))
            .ok_or_else(|| Error::InadmissibleSupport(format!("word {w:?} has no level-{n} cylinder")))?;
        q[i] += x;
    }
    block_measure(sys, n, q)
}

/// Statistics of `(1 / (n + k)) sum_i mu_q o sigma^{-i}`.
pub fn spread_to_shift_invariant(bm: &BlockMeasure) -> InvariantStats {
    let period = (bm.level + bm.connector_length) as f64;
    InvariantStats { entropy: bm.stats.entropy / period, lyapunov: bm.stats.lyapunov, phi_avg: bm.stats.phi_avg }
}

/// Representative Birkhoff sums `(S_n log|T'|, S_n phi)` per word.
fn block_sums(sys: &ThermoSystem, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let table = sys.table(n)?;
    Ok(table.entries.iter().map(|e| (e.psi[1], sys.phi_sum(e, n)[1])).unzip())
}

fn log_z(s_psi: &[f64], s_phi: &[f64], a: f64, b: f64) -> f64 {
    let v: Vec<f64> = s_psi.iter().zip(s_phi).map(|(x, y)| a * x + b * y).collect();
    log_sum_exp(&v)
}

fn b_level(s_psi: &[f64], s_phi: &[f64], a: f64) -> Result<f64> {
    let g = |b: f64| log_z(s_psi, s_phi, a, b);
    let (lo, hi) = bracket_decreasing(g, 0.0, 1.0, 1e8)
        .ok_or_else(|| Error::InvalidInput(format!("level partition sum has no root at a = {a}")))?;
    Ok(find_root(g, lo, hi, 1e-14))
}

fn family_weights(s_psi: &[f64], s_phi: &[f64], a: f64, b: f64) -> Vec<f64> {
    let z = log_z(s_psi, s_phi, a, b);
    s_psi.iter().zip(s_phi).map(|(x, y)| (a * x + b * y - z).exp()).collect()
}

fn family_ratio(s_psi: &[f64], s_phi: &[f64], a: f64) -> f64 {
    let b = match b_level(s_psi, s_phi, a) {
        Ok(b) => b,
        Err(_) => return f64::NAN,
    };
    let q = family_weights(s_psi, s_phi, a, b);
    let num: f64 = q.iter().zip(s_phi).map(|(w, y)| w * y).sum();
    let den: f64 = q.iter().zip(s_psi).map(|(w, x)| w * x).sum();
    -num / den
}

/// Maximizes `entropy / sum q S_n log|T'|` over weights on `n`-words subject
/// to `-sum q S_n phi / sum q S_n log|T'| = alpha`. The optimum lies in the
/// family `q ∝ exp(a S_n log|T'| + b S_n phi)` with `log Z(a, b) = 0`.
pub fn optimize_block_weights(sys: &ThermoSystem, n: usize, alpha: f64) -> Result<BlockMeasure> {
    let (s_psi, s_phi) = block_sums(sys, n)?;
    let ratios: Vec<f64> = s_psi.iter().zip(&s_phi).map(|(x, y)| if *x > 0.0 { -y / x } else { f64::INFINITY }).collect();
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let degenerate = hi - lo <= 1e-12 * hi.abs().max(1.0);
    if degenerate {
        if (alpha - lo).abs() > 1e-12 * lo.abs().max(1.0) {
            return Err(Error::ConstraintInfeasible { alpha, lo, hi });
        }
    } else if !(alpha > lo && alpha < hi) {
        return Err(Error::ConstraintInfeasible { alpha, lo, hi });
    }
    let g = |a: f64| family_ratio(&s_psi, &s_phi, a) - alpha;
    let a = if degenerate || g(0.0) == 0.0 {
        0.0
    } else {
        let (l, h) = bracket_decreasing(g, 0.0, 1.0, 1e4)
            .ok_or(Error::ConstraintInfeasible { alpha, lo, hi })?;
        find_root(g, l, h, 1e-13)
    };
    let b = b_level(&s_psi, &s_phi, a)?;
    let mut q = family_weights(&s_psi, &s_phi, a, b);
    let total: f64 = q.iter().sum();
    q.iter_mut().for_each(|x| *x /= total);
    block_measure(sys, n, q)
}

/// Membership of each `n`-cylinder in the window `(alpha - eps, alpha + eps)`:
/// whole ratio bracket inside, representative ratio inside, bracket meets it.
fn window_sets(sys: &ThermoSystem, n: usize, alpha: f64, eps: f64) -> Result<Vec<(f64, [bool; 3])>> {
    let table = sys.table(n)?;
    let (wlo, whi) = (alpha - eps, alpha + eps);
    Ok(table
        .entries
        .iter()
        .map(|e| {
            let f = sys.phi_sum(e, n);
            let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { f64::INFINITY };
            let r_lo = ratio(-f[2], e.psi[2]);
            let r_hi = ratio(-f[0], e.psi[0]);
            let r_rep = ratio(-f[1], e.psi[1]);
            let inner = r_lo > wlo && r_hi < whi;
            let rep = r_rep > wlo && r_rep < whi;
            let outer = r_hi > wlo && r_lo < whi;
            (e.diameter(), [inner, rep, outer])
        })
        .collect())
}

fn diameter_root(diams: &[f64]) -> f64 {
    if diams.is_empty() {
        return 0.0;
    }
    let logs: Vec<f64> = diams.iter().map(|d| d.ln()).collect();
    let g = |s: f64| log_sum_exp(&logs.iter().map(|l| s * l).collect::<Vec<_>>());
    if g(0.0) <= 0.0 {
        return 0.0;
    }
    match bracket_decreasing(g, 0.0, 1.0, 1e6) {
        Some((lo, hi)) => find_root(g, lo, hi, 1e-12),
        None => f64::INFINITY,
    }
}

/// `s_n`: the root of `sum D_n^s = 1` over the `n`-cylinders whose ratio
/// `-S_n phi / S_n log|T'|` can fall in `(alpha - eps, alpha + eps)`. The
/// enclosure runs from the cylinders whose whole bracket lies in the window
/// to those whose bracket meets it; the point uses representative ratios.
pub fn bowen_sn(sys: &ThermoSystem, n: usize, alpha: f64, eps: f64) -> Result<Enclosure> {
    let sets = window_sets(sys, n, alpha, eps)?;
    let pick = |which: usize| -> Vec<f64> { sets.iter().filter(|s| s.1[which]).map(|s| s.0).collect() };
    let outer = pick(2);
    if outer.is_empty() {
        return Err(Error::EmptyWindow { alpha, eps, level: n });
    }
    if outer.iter().any(|&d| d <= 0.0) {
        return Err(Error::DegenerateCylinder { level: n });
    }
    let lo = diameter_root(&pick(0));
    let hi = diameter_root(&outer);
    let rep = pick(1);
    let value = if rep.is_empty() { lo } else { diameter_root(&rep) };
    Ok(Enclosure::clamped(lo, value, hi))
}

/// Block measure with `q = D_n^{s_n}` on the window cylinders (by
/// representative ratio), together with `s_n`.
pub fn diameter_weights(sys: &ThermoSystem, n: usize, alpha: f64, eps: f64) -> Result<(Enclosure, BlockMeasure)> {
    let s = bowen_sn(sys, n, alpha, eps)?;
    let sets = window_sets(sys, n, alpha, eps)?;
    let which = if sets.iter().any(|x| x.1[1]) { 1 } else { 2 };
    let mut q: Vec<f64> = sets.iter().map(|x| if x.1[which] { x.0.powf(s.value) } else { 0.0 }).collect();
    let total: f64 = q.iter().sum();
    q.iter_mut().for_each(|x| *x /= total);
    Ok((s, block_measure(sys, n, q)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{build_map, presets};
    use crate::symbolic::Potential;

    fn bernoulli() -> ThermoSystem {
        let m = build_map(&presets::doubling()).unwrap();
        ThermoSystem::new(m, Potential::bernoulli(&[0.25, 0.75])).unwrap()
    }

    #[test]
    fn full_shift_needs_no_connector() {
        let c = connector_length(&bernoulli(), 3, None).unwrap();
        assert_eq!(c.length, 0);
        assert_eq!(c.get(5, 1), Some(&[][..]));
    }

    #[test]
    fn uniform_weights_on_doubling() {
        let bm = block_measure(&bernoulli(), 1, vec![0.5, 0.5]).unwrap();
        let ln2 = 2f64.ln();
        assert!((bm.stats.entropy - ln2).abs() < 1e-15);
        assert!((bm.stats.lyapunov.value - ln2).abs() < 1e-15);
        assert!((bm.stats.phi_avg.value - 0.5 * (0.25f64.ln() + 0.75f64.ln())).abs() < 1e-15);
    }

    #[test]
    fn rejects_unnormalized_weights() {
        assert!(block_measure(&bernoulli(), 1, vec![0.5, 0.6]).is_err());
    }
}
