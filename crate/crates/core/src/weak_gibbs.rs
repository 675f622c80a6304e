//! Weak Gibbs measures through cylinder-mass brackets, local dimensions along
//! symbolic prefixes, sampling, and coarse spectra from window counts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::map_indexed;
use crate::finite_measures::bowen_sn;
use crate::numerics::Enclosure;
use crate::pressure::ThermoSystem;
use crate::symbolic::{boundary_ratio, cylinder};

/// Default threshold on `(1/n) log(Z_n / D_n)` below which a point counts
/// as too close to cylinder boundaries.
pub const BOUNDARY_EXPONENT_TOL: f64 = 0.1;

/// The sub-exponential error law `k_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum KnLaw {
    /// `k_n = 0`: cylinder masses equal `exp(S_n phi)`.
    Exact,
    /// `k_n = c / n^gamma`.
    Declared { c: f64, gamma: f64 },
}

impl KnLaw {
    pub fn k(&self, n: usize) -> f64 {
        match *self {
            KnLaw::Exact => 0.0,
            KnLaw::Declared { c, gamma } => c / (n as f64).powf(gamma),
        }
    }
}

/// A normalized potential together with its `k_n` law.
#[derive(Debug)]
pub struct WeakGibbsModel {
    sys: ThermoSystem,
    law: KnLaw,
}

impl WeakGibbsModel {
    /// `Exact` is accepted only on a full shift when `phi` is constant on
    /// each first-level cylinder and `sum exp(phi_i) = 1`.
    pub fn new(sys: ThermoSystem, law: KnLaw) -> Result<Self> {
        match law {
            KnLaw::Exact => {
                if !sys.map().is_full_shift() {
                    return Err(Error::InvalidInput("exact Gibbs law needs a full shift".into()));
                }
                let t = sys.table(1)?;
                let mut total = 0.0;
                for e in &t.entries {
                    let f = sys.phi_sum(e, 1);
                    if f[2] - f[0] > 1e-14 {
                        return Err(Error::InvalidInput("exact Gibbs law needs phi constant on first-level cylinders".into()));
                    }
                    total += f[1].exp();
                }
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidInput(format!("exact Gibbs law needs sum exp(phi) = 1, got {total}")));
                }
            }
            KnLaw::Declared { c, gamma } => {
                if !(c >= 0.0 && gamma > 0.0 && c.is_finite() && gamma.is_finite()) {
                    return Err(Error::InvalidInput("declared k_n law needs c >= 0 and gamma > 0".into()));
                }
            }
        }
        Ok(WeakGibbsModel { sys, law })
    }

    pub fn system(&self) -> &ThermoSystem {
        &self.sys
    }

    pub fn law(&self) -> KnLaw {
        self.law
    }

    /// `[exp(-n k_n + min S_n phi), exp(S_n phi(rep)), exp(n k_n + max S_n phi)]`.
    pub fn cylinder_mass_bracket(&self, word: &[usize]) -> Result<Enclosure> {
        let c = cylinder(self.sys.map(), self.sys.phi(), word)?;
        let nk = word.len() as f64 * self.law.k(word.len());
        Ok(Enclosure::new((c.birkhoff_phi[0] - nk).exp(), c.phi_rep.exp(), (c.birkhoff_phi[1] + nk).exp()))
    }

    /// Whether the children's mass brackets can add up to a mass inside the
    /// parent's bracket.
    pub fn children_consistent(&self, word: &[usize]) -> Result<bool> {
        let parent = self.cylinder_mass_bracket(word)?;
        let (mut lo, mut hi) = (0.0, 0.0);
        for s in self.children(word) {
            let m = self.cylinder_mass_bracket(&s)?;
            lo += m.lo;
            hi += m.hi;
        }
        let slack = 1e-12 * parent.hi;
        Ok(lo <= parent.hi + slack && hi >= parent.lo - slack)
    }

    fn children(&self, word: &[usize]) -> Vec<Vec<usize>> {
        let map = self.sys.map();
        (0..map.num_symbols())
            .filter(|&s| word.last().is_none_or(|&l| map.allowed(l, s)))
            .map(|s| {
                let mut w = word.to_vec();
                w.push(s);
                w
            })
            .collect()
    }

    /// Local-dimension diagnostics along the prefixes of `word`.
    pub fn local_dimension(&self, word: &[usize]) -> Result<LocalDimension> {
        local_dimension(self, word)
    }
}

/// One prefix length of a local-dimension trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioStep {
    pub n: usize,
    /// `-S_n phi / S_n log|T'|` over the cylinder, at the representative
    /// in `value`.
    pub ratio: Enclosure,
    /// `(1/n) log(Z_n / D_n)` at the point.
    pub boundary_exponent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalDimension {
    pub depth: usize,
    /// Prefix lengths `N/2 ..= N`.
    pub steps: Vec<RatioStep>,
    /// Range of the ratio brackets over the tail, with the depth-`N` value.
    pub bracket: Enclosure,
    /// Mean of the representative ratios over the tail.
    pub cesaro: f64,
    /// `log nu(Δ_N) / log D_N` at the mass and diameter of the deepest
    /// cylinder.
    pub symbolic: f64,
    /// Some prefix length in `N/2 ..= 3N/4` has boundary exponent above
    /// `-BOUNDARY_EXPONENT_TOL`. Longer prefixes are skipped because the
    /// point is the midpoint of the depth-`N` cylinder.
    pub boundary_ok: bool,
}

/// Ratio trace, symbolic estimate and boundary flag for the point coded by
/// `word` (taken as the representative of its cylinder).
pub fn local_dimension(model: &WeakGibbsModel, word: &[usize]) -> Result<LocalDimension> {
    let depth = word.len();
    if depth < 4 {
        return Err(Error::InvalidInput("local dimension needs depth >= 4".into()));
    }
    let map = model.sys.map();
    let phi = model.sys.phi();
    let deepest = cylinder(map, phi, word)?;
    if !(deepest.diameter > 0.0) {
        return Err(Error::DegenerateCylinder { level: depth });
    }
    let x = 0.5 * (deepest.interval[0] + deepest.interval[1]);
    let mut steps = Vec::new();
    for n in depth / 2..=depth {
        let c = cylinder(map, phi, &word[..n])?;
        if !(c.diameter > 0.0) {
            return Err(Error::DegenerateCylinder { level: n });
        }
        let q = |num: f64, den: f64| if den > 0.0 { num / den } else { f64::INFINITY };
        let lo = q(-c.birkhoff_phi[1], c.birkhoff_psi[1]);
        let hi = q(-c.birkhoff_phi[0], c.birkhoff_psi[0]);
        let rep = q(-c.phi_rep, c.psi_rep);
        let z = boundary_ratio(map, &word[..n], x)?;
        steps.push(RatioStep { n, ratio: Enclosure::clamped(lo, rep, hi), boundary_exponent: z.ln() / n as f64 });
    }
    let lo = steps.iter().map(|s| s.ratio.lo).fold(f64::INFINITY, f64::min);
    let hi = steps.iter().map(|s| s.ratio.hi).fold(f64::NEG_INFINITY, f64::max);
    let last = steps.last().unwrap().ratio.value;
    let cesaro = steps.iter().map(|s| s.ratio.value).sum::<f64>() / steps.len() as f64;
    let mass = model.cylinder_mass_bracket(word)?;
    let symbolic = mass.value.ln() / deepest.diameter.ln();
    let boundary_ok = steps
        .iter()
        .filter(|s| 4 * s.n <= 3 * depth)
        .any(|s| s.boundary_exponent >= -BOUNDARY_EXPONENT_TOL);
    Ok(LocalDimension { depth, steps, bracket: Enclosure::clamped(lo, last, hi), cesaro, symbolic, boundary_ok })
}

/// `count` words of length `depth`, drawn symbol by symbol with
/// probabilities proportional to the midpoints of the children's mass
/// brackets. Sample `i` uses stream `i` of a generator seeded by `seed`.
pub fn sample_points(model: &WeakGibbsModel, count: usize, depth: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if depth == 0 {
        return Err(Error::InvalidInput("sampling depth must be at least 1".into()));
    }
    crate::symbolic::check_level(model.sys.map(), depth, u64::MAX)?;
    let exec = model.sys.execution();
    map_indexed(exec, count, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let mut word = Vec::with_capacity(depth);
        for _ in 0..depth {
            let kids = model.children(&word);
            let weights = kids
                .iter()
                .map(|w| model.cylinder_mass_bracket(w).map(|m| 0.5 * (m.lo + m.hi)))
                .collect::<Result<Vec<f64>>>()?;
            let total: f64 = weights.iter().sum();
            let mut u = rng.gen::<f64>() * total;
            let mut pick = kids.len() - 1;
            for (k, w) in weights.iter().enumerate() {
                if u < *w {
                    pick = k;
                    break;
                }
                u -= w;
            }
            word.push(*kids[pick].last().unwrap());
        }
        Ok(word)
    })
    .into_iter()
    .collect()
}

/// `(alpha, s_n)` on a grid; windows without cylinders give `None`.
pub fn coarse_spectrum(model: &WeakGibbsModel, n: usize, alphas: &[f64], eps: f64) -> Result<Vec<(f64, Option<Enclosure>)>> {
    alphas
        .iter()
        .map(|&a| match bowen_sn(&model.sys, n, a, eps) {
            Ok(s) => Ok((a, Some(s))),
            Err(Error::EmptyWindow { .. }) => Ok((a, None)),
            Err(e) => Err(e),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{build_map, presets};
    use crate::symbolic::Potential;

    fn model(p: &[f64]) -> WeakGibbsModel {
        let m = build_map(&presets::doubling()).unwrap();
        WeakGibbsModel::new(ThermoSystem::new(m, Potential::bernoulli(p)).unwrap(), KnLaw::Exact).unwrap()
    }

    #[test]
    fn bernoulli_mass() {
        let m = model(&[0.25, 0.75]).cylinder_mass_bracket(&[0, 1, 1]).unwrap();
        assert!((m.value - 9.0 / 64.0).abs() < 1e-15);
        assert!(m.width() < 1e-15);
    }

    #[test]
    fn exact_law_requires_normalization() {
        let m = build_map(&presets::doubling()).unwrap();
        let sys = ThermoSystem::new(m, Potential::bernoulli(&[0.5, 0.25])).unwrap();
        assert!(WeakGibbsModel::new(sys, KnLaw::Exact).is_err());
    }

    #[test]
    fn sampling_is_reproducible() {
        let m = model(&[0.25, 0.75]);
        assert_eq!(sample_points(&m, 20, 8, 7).unwrap(), sample_points(&m, 20, 8, 7).unwrap());
    }
}
