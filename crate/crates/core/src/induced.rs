//! Truncated first-return systems on a base of first-level cylinders.
//!
//! A branch is a return word `w = b e_1 ... e_{r-1}` (`b` in the base, the
//! `e_i` outside it) together with the base symbol that follows. Its domain
//! is the cylinder of `w b'`, mapped by `T^r` onto the core of `b'`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::map_indexed;
use crate::maps::MarkovMap;
use crate::numerics::{bracket_decreasing, find_root, linear_fit, log_sum_exp, Enclosure};
use crate::pressure::ThermoSystem;
use crate::symbolic::{Potential, Rest};

/// Which first-level cylinders make up the base.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BaseChoice {
    /// Every symbol that is not on a parabolic orbit.
    #[default]
    NonParabolic,
    Symbols(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InducedBranch {
    pub word: Vec<usize>,
    pub next: usize,
    pub return_time: usize,
    pub domain: [f64; 2],
    /// `[lo, rep, hi]` of `S_r log|T'|` and `S_r phi` over the domain.
    pub psi: [f64; 3],
    pub phi: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InducedSystem {
    pub base: Vec<usize>,
    pub truncation: usize,
    pub branches: Vec<InducedBranch>,
    /// Share of the base mass, under `exp(S phi)`, carried by kept branches.
    pub kept_fraction: f64,
    /// No return word is longer than the truncation.
    pub complete: bool,
    parabolic: bool,
}

impl InducedSystem {
    pub fn is_trivial(&self) -> bool {
        self.complete && self.branches.iter().all(|b| b.return_time == 1)
    }
}

fn base_symbols(map: &MarkovMap, choice: &BaseChoice) -> Result<Vec<usize>> {
    let p = map.num_symbols();
    let base: Vec<usize> = match choice {
        BaseChoice::NonParabolic => {
            let para: Vec<usize> = map.parabolic_orbits().iter().flat_map(|o| o.symbols.iter().copied()).collect();
            (0..p).filter(|s| !para.contains(s)).collect()
        }
        BaseChoice::Symbols(s) => {
            let mut s = s.clone();
            s.sort_unstable();
            s.dedup();
            s
        }
    };
    if base.is_empty() || base.iter().any(|&s| s >= p) {
        return Err(Error::InvalidInput(format!("invalid induced base {base:?}")));
    }
    Ok(base)
}

/// Return words of length exactly `r` starting in the base.
fn return_words(map: &MarkovMap, base: &[usize], r: usize, budget: usize) -> Result<Vec<Vec<usize>>> {
    let p = map.num_symbols();
    let mut out = Vec::new();
    let mut stack: Vec<Vec<usize>> = base.iter().rev().map(|&b| vec![b]).collect();
    while let Some(w) = stack.pop() {
        if w.len() == r {
            out.push(w);
            if out.len() > budget {
                return Err(Error::LevelTooLarge { level: r, count: out.len() as u128, budget: budget as u64 });
            }
            continue;
        }
        let last = *w.last().unwrap();
        for s in (0..p).rev() {
            if !base.contains(&s) && map.allowed(last, s) {
                let mut v = w.clone();
                v.push(s);
                stack.push(v);
            }
        }
    }
    Ok(out)
}

/// Domain and Birkhoff brackets of the first `r` positions of `word`
/// (of length `r + 1`).
fn branch_terms(map: &MarkovMap, phi: &Potential, rest: &Rest, word: &[usize]) -> ([f64; 2], f64, [f64; 3], [f64; 3]) {
    let r = word.len() - 1;
    let mut iv = map.core(word[r]);
    let mut rep = 0.5 * (iv[0] + iv[1]);
    let mut psi = [0.0; 3];
    let mut rs = [0.0; 3];
    let d = rest.depth();
    for k in (0..r).rev() {
        let b = map.branch(word[k]);
        iv = b.inverse_interval(iv);
        rep = b.inverse(rep).clamp(iv[0], iv[1]);
        let (lo, hi) = b.log_derivative_range(iv[0], iv[1]);
        psi[0] += lo;
        psi[1] += b.log_derivative(rep).clamp(lo, hi);
        psi[2] += hi;
        let head = &word[k..(k + d).min(word.len())];
        let t = rest.term(head, iv, rep);
        rs[0] += t.lo;
        rs[1] += t.rep;
        rs[2] += t.hi;
    }
    let g = phi.psi_coefficient();
    let shift = phi.pressure_shift * r as f64;
    let (gl, gh) = if g >= 0.0 { (g * psi[0], g * psi[2]) } else { (g * psi[2], g * psi[0]) };
    let f = [gl + rs[0] - shift, g * psi[1] + rs[1] - shift, gh + rs[2] - shift];
    (iv, rep, psi, f)
}

/// Induced system with return times up to `truncation`.
pub fn build_induced(sys: &ThermoSystem, base: &BaseChoice, truncation: usize) -> Result<InducedSystem> {
    if truncation == 0 {
        return Err(Error::InvalidInput("truncation must be at least 1".into()));
    }
    let map = sys.map();
    let phi = sys.phi();
    let rest = phi.rest(map)?;
    let base = base_symbols(map, base)?;
    const BUDGET: usize = 1 << 20;
    let per_time = map_indexed(sys.execution(), truncation, |i| -> Result<Vec<InducedBranch>> {
        let r = i + 1;
        let mut out = Vec::new();
        for w in return_words(map, &base, r, BUDGET)? {
            let last = *w.last().unwrap();
            for &next in base.iter().filter(|&&b| map.allowed(last, b)) {
                let mut full = w.clone();
                full.push(next);
                let (domain, _, psi, phi) = branch_terms(map, phi, &rest, &full);
                out.push(InducedBranch { word: w.clone(), next, return_time: r, domain, psi, phi });
            }
        }
        Ok(out)
    });
    let mut branches = Vec::new();
    for part in per_time {
        branches.extend(part?);
    }
    for b in &branches {
        if !(b.psi[0] > 0.0) {
            return Err(Error::InvalidInput(format!("induced branch {:?} is not uniformly expanding", b.word)));
        }
    }
    let complete = return_words(map, &base, truncation + 1, BUDGET)?.is_empty();
    let base_mass: f64 = base
        .iter()
        .map(|&b| {
            let t = sys.table(1).map(|t| sys.phi_sum(&t.entries[b], 1)[1]);
            t.map(f64::exp)
        })
        .sum::<Result<f64>>()?;
    let kept: f64 = branches
        .iter()
        .map(|b| {
            let t = sys.table(1).map(|t| sys.phi_sum(&t.entries[b.next], 1)[1]);
            t.map(|last| (b.phi[1] + last).exp())
        })
        .sum::<Result<f64>>()?;
    let kept_fraction = (kept / base_mass).min(1.0);
    if kept_fraction < 0.5 {
        return Err(Error::TruncationTooSmall { kept: kept_fraction });
    }
    Ok(InducedSystem { base, truncation, branches, kept_fraction, complete, parabolic: map.is_parabolic() })
}

/// Log of the Perron root of a small nonnegative matrix given by log
/// entries (`-inf` for zero), with Collatz–Wielandt bounds.
fn log_perron(log_m: &[Vec<f64>]) -> f64 {
    let d = log_m.len();
    let top = log_m.iter().flatten().cloned().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if d == 1 {
        return log_m[0][0];
    }
    let m: Vec<Vec<f64>> = log_m.iter().map(|row| row.iter().map(|v| (v - top).exp()).collect()).collect();
    let mut y = vec![1.0; d];
    let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
    for _ in 0..10_000 {
        let next: Vec<f64> = (0..d).map(|j| (0..d).map(|i| y[i] * m[i][j]).sum()).collect();
        lo = f64::INFINITY;
        hi = 0.0;
        for (n, o) in next.iter().zip(&y) {
            if *o > 0.0 {
                lo = lo.min(n / o);
                hi = hi.max(n / o);
            }
        }
        let s = next.iter().cloned().fold(0.0, f64::max);
        y = next.iter().map(|v| v / s).collect();
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    top + (0.5 * (lo + hi)).ln()
}

/// Sign-aware `[lo, rep, hi]` of `a psi + b phi` on a branch.
fn weight(br: &InducedBranch, a: f64, b: f64) -> [f64; 3] {
    let part = |c: f64, v: &[f64; 3]| if c >= 0.0 { [c * v[0], c * v[1], c * v[2]] } else { [c * v[2], c * v[1], c * v[0]] };
    let (x, y) = (part(a, &br.psi), part(b, &br.phi));
    [x[0] + y[0], x[1] + y[1], x[2] + y[2]]
}

/// Estimated mass beyond the truncation relative to the kept mass, from the
/// upper weights per return time. Infinite when no decay is visible.
fn tail_ratio(isys: &InducedSystem, a: f64, b: f64) -> f64 {
    if isys.complete {
        return 0.0;
    }
    let n = isys.truncation;
    let mut per_time = vec![Vec::new(); n];
    for br in &isys.branches {
        per_time[br.return_time - 1].push(weight(br, a, b)[2]);
    }
    let logs: Vec<f64> = per_time.iter().map(|v| log_sum_exp(v)).collect();
    let total = log_sum_exp(&logs);
    if n < 4 {
        return f64::INFINITY;
    }
    let from = n / 2;
    let window: Vec<(f64, f64)> = (from..n).filter(|&i| logs[i].is_finite()).map(|i| ((i + 1) as f64, logs[i])).collect();
    if window.len() < 3 {
        return f64::INFINITY;
    }
    let last = window.last().unwrap().1;
    let q = window.windows(2).map(|w| (w[1].1 - w[0].1).exp()).fold(0.0, f64::max);
    if q < 0.95 {
        return (last + (q / (1.0 - q)).ln() - total).exp();
    }
    let xs: Vec<f64> = window.iter().map(|w| w.0.ln()).collect();
    let ys: Vec<f64> = window.iter().map(|w| w.1).collect();
    let (slope, intercept, _) = linear_fit(&xs, &ys);
    let gamma = -slope;
    if gamma <= 1.05 {
        return f64::INFINITY;
    }
    let nf = n as f64;
    (intercept + (1.0 - gamma) * nf.ln() - (gamma - 1.0).ln() - total).exp()
}

/// Induced pressure of `a psi + b phi` from the lower, representative or
/// upper branch weights; the upper one includes the tail estimate.
pub fn induced_pressure(isys: &InducedSystem, a: f64, b: f64) -> [f64; 3] {
    let d = isys.base.len();
    let index = |s: usize| isys.base.iter().position(|&x| x == s).unwrap();
    let mut out = [0.0; 3];
    for (which, o) in out.iter_mut().enumerate() {
        let mut cells = vec![vec![Vec::new(); d]; d];
        for br in &isys.branches {
            cells[index(br.word[0])][index(br.next)].push(weight(br, a, b)[which]);
        }
        let log_m: Vec<Vec<f64>> = cells.iter().map(|row| row.iter().map(|c| log_sum_exp(c)).collect()).collect();
        *o = log_perron(&log_m);
    }
    out[2] += tail_ratio(isys, a, b).ln_1p();
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InducedSample {
    pub a: f64,
    pub b: Enclosure,
    /// Estimated relative mass of the dropped branches at `(a, b)`.
    pub tail: f64,
}

/// `b̄(a)` solving `P̄(a psī + b phī) = 0` on each `a`. With a parabolic
/// orbit, `b̄ = 0` where the sum at `b = 0` does not exceed one.
pub fn induced_b_curve(isys: &InducedSystem, a_grid: &[f64], tol: f64) -> Result<Vec<InducedSample>> {
    a_grid.iter().map(|&a| induced_b(isys, a, tol)).collect()
}

fn induced_b(isys: &InducedSystem, a: f64, tol: f64) -> Result<InducedSample> {
    let mut roots = [0.0; 3];
    for (which, r) in roots.iter_mut().enumerate() {
        let g = |b: f64| induced_pressure(isys, a, b)[which];
        if isys.parabolic && g(0.0) <= 0.0 {
            *r = 0.0;
            continue;
        }
        let (lo, hi) = bracket_decreasing(g, 0.0, 1.0, 1e6)
            .ok_or_else(|| Error::InvalidInput(format!("no root of the induced pressure at a = {a}")))?;
        *r = find_root(g, lo, hi, 1e-14);
    }
    let b = Enclosure::clamped(roots[0], roots[1], roots[2]);
    let tail = tail_ratio(isys, a, b.value);
    if tail > tol {
        return Err(Error::TailDominates { a, bound: tail, tol });
    }
    Ok(InducedSample { a, b, tail })
}
