use super::table::{entry_for, CylinderEntry};
use super::{build_levels, check_level, word_code, Potential};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::maps::MarkovMap;

/// An admissible word with its cylinder interval and Birkhoff brackets.
#[derive(Debug, Clone, PartialEq)]
pub struct Cylinder {
    pub word: Vec<usize>,
    pub interval: [f64; 2],
    pub diameter: f64,
    /// `[min, max]` of `S_n log|T'|` over the cylinder.
    pub birkhoff_psi: [f64; 2],
    /// `[min, max]` of `S_n phi` over the cylinder.
    pub birkhoff_phi: [f64; 2],
    /// `S_n log|T'|` and `S_n phi` at the representative point.
    pub psi_rep: f64,
    pub phi_rep: f64,
}

/// Converts a table entry into `S_n phi` bracket `[lo, rep, hi]`.
pub(crate) fn phi_bracket(e: &CylinderEntry, phi: &Potential, n: usize) -> [f64; 3] {
    let g = phi.psi_coefficient();
    let shift = phi.pressure_shift * n as f64;
    let (plo, phi_) = if g >= 0.0 { (e.psi[0], e.psi[2]) } else { (e.psi[2], e.psi[0]) };
    [
        g * plo + e.rest[0] - shift,
        g * e.psi[1] + e.rest[1] - shift,
        g * phi_ + e.rest[2] - shift,
    ]
}

pub fn cylinder(map: &MarkovMap, phi: &Potential, word: &[usize]) -> Result<Cylinder> {
    if word.is_empty() || !map.is_admissible(word) {
        return Err(Error::InvalidInput(format!("word {word:?} is not admissible")));
    }
    let rest = phi.rest(map)?;
    let p = map.num_symbols();
    let n = word.len();
    let last = *word.last().unwrap();
    let iv = map.core(last);
    let mut e = entry_for(map, &rest, last as u64, 1, iv, 0.5 * (iv[0] + iv[1]), None);
    for (k, &s) in word[..n - 1].iter().enumerate().rev() {
        let b = map.branch(s);
        let iv = b.inverse_interval([e.lo, e.hi]);
        let rep = b.inverse(e.rep).clamp(iv[0], iv[1]);
        let code = word_code(&word[k..], p);
        e = entry_for(map, &rest, code, n - k, iv, rep, Some(&e));
    }
    let f = phi_bracket(&e, phi, n);
    Ok(Cylinder {
        word: word.to_vec(),
        interval: [e.lo, e.hi],
        diameter: e.diameter(),
        birkhoff_psi: [e.psi[0], e.psi[2]],
        birkhoff_phi: [f[0], f[2]],
        psi_rep: e.psi[1],
        phi_rep: f[1],
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistortionReport {
    pub level: usize,
    pub k_psi: f64,
    pub k_phi: f64,
    pub k_n: f64,
    pub rho: f64,
}

/// Largest per-symbol Birkhoff oscillation over the `n`-cylinders, for
/// `log|T'|` and for `phi`; `k_n` is supplied by the weak Gibbs model.
pub fn distortion_report(map: &MarkovMap, phi: &Potential, n: usize, k_n: f64, budget: u64) -> Result<DistortionReport> {
    check_level(map, n, budget)?;
    let rest = phi.rest(map)?;
    let mut levels = Vec::new();
    build_levels(map, &rest, n, Execution::default(), &mut levels);
    let table = &levels[n - 1];
    let mut k_psi = 0.0f64;
    let mut k_phi = 0.0f64;
    for e in &table.entries {
        k_psi = k_psi.max(e.psi[2] - e.psi[0]);
        let f = phi_bracket(e, phi, n);
        k_phi = k_phi.max(f[2] - f[0]);
    }
    let nf = n as f64;
    let (k_psi, k_phi) = (k_psi / nf, k_phi / nf);
    Ok(DistortionReport { level: n, k_psi, k_phi, k_n, rho: k_psi.max(k_phi).max(k_n) })
}

/// `d(x, boundary) / diameter` for `x` in the cylinder of `word`.
pub fn boundary_ratio(map: &MarkovMap, word: &[usize], x: f64) -> Result<f64> {
    if word.is_empty() || !map.is_admissible(word) {
        return Err(Error::InvalidInput(format!("word {word:?} is not admissible")));
    }
    let [lo, hi] = map.cylinder_interval(word);
    if !(lo <= x && x <= hi) {
        return Err(Error::PointOutsideCylinder { x, lo, hi });
    }
    let d = hi - lo;
    if d <= 0.0 {
        return Ok(0.0);
    }
    Ok(((x - lo).min(hi - x) / d).clamp(0.0, 0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{build_map, presets};

    #[test]
    fn doubling_cylinders() {
        let m = build_map(&presets::doubling()).unwrap();
        let phi = Potential::bernoulli(&[0.25, 0.75]);
        let c = cylinder(&m, &phi, &[0, 0, 0]).unwrap();
        assert_eq!(c.interval, [0.0, 0.125]);
        assert_eq!(c.diameter, 0.125);
        assert!((c.birkhoff_psi[0] - 3.0 * 2f64.ln()).abs() < 1e-15);
        assert_eq!(c.birkhoff_psi[0], c.birkhoff_psi[1]);
        let c = cylinder(&m, &phi, &[0, 1, 1]).unwrap();
        assert!((c.birkhoff_phi[0] - (0.25f64 * 0.75 * 0.75).ln()).abs() < 1e-14);
    }

    #[test]
    fn boundary_ratios() {
        let m = build_map(&presets::doubling()).unwrap();
        assert_eq!(boundary_ratio(&m, &[0], 0.25).unwrap(), 0.5);
        assert_eq!(boundary_ratio(&m, &[0], 0.0).unwrap(), 0.0);
        assert!((boundary_ratio(&m, &[0, 1], 0.3).unwrap() - 0.2).abs() < 1e-12);
        assert!(matches!(boundary_ratio(&m, &[0, 1], 0.6), Err(Error::PointOutsideCylinder { .. })));
    }
}
