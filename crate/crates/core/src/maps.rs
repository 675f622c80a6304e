//! Piecewise-monotone C¹ Markov interval maps with exact inverse branches,
//! and detection of parabolic periodic orbits.

use crate::error::{Error, Result};
use crate::numerics::linear_fit;

const ENDPOINT_TOL: f64 = 1e-12;
const PARABOLIC_TOL: f64 = 1e-10;

/// Closed-form branch families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// `T(x) = slope * x + offset`.
    Linear { slope: f64, offset: f64 },
    /// `T(x) = x + x^(1+s)` reduced by the integer part on the branch domain.
    MannevillePomeau { s: f64 },
    /// `T(x) = x / (1 - x)`.
    FareyLeft,
    /// `T(x) = (1 - x) / x`.
    FareyRight,
    /// `T(x) = x + c x^(1+s)` reduced by the integer part on the branch domain.
    PowerInterpolated { c: f64, s: f64 },
}

impl Family {
    fn power_params(&self) -> Option<(f64, f64)> {
        match *self {
            Family::MannevillePomeau { s } => Some((1.0, s)),
            Family::PowerInterpolated { c, s } => Some((c, s)),
            _ => None,
        }
    }

    fn raw(&self, x: f64) -> f64 {
        match *self {
            Family::Linear { slope, offset } => slope * x + offset,
            Family::FareyLeft => x / (1.0 - x),
            Family::FareyRight => (1.0 - x) / x,
            _ => {
                let (c, s) = self.power_params().unwrap();
                x + c * x.powf(1.0 + s)
            }
        }
    }
}

/// Input description of one branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchSpec {
    pub family: Family,
    pub domain: [f64; 2],
}

impl BranchSpec {
    pub fn new(family: Family, lo: f64, hi: f64) -> Self {
        BranchSpec { family, domain: [lo, hi] }
    }
}

/// A validated branch `T_i : J_i -> T_i(J_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub family: Family,
    pub domain: [f64; 2],
    pub image: [f64; 2],
    pub increasing: bool,
    shift: f64,
}

impl Branch {
    fn from_spec(spec: &BranchSpec, index: usize) -> Result<Branch> {
        let [lo, hi] = spec.domain;
        if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi && hi <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "branch {index}: domain [{lo}, {hi}] is not a nondegenerate subinterval of [0, 1]"
            )));
        }
        match spec.family {
            Family::Linear { slope, offset } => {
                if !(slope.is_finite() && offset.is_finite()) || slope == 0.0 {
                    return Err(Error::InvalidInput(format!("branch {index}: bad linear parameters")));
                }
            }
            Family::MannevillePomeau { s } => {
                if !(s.is_finite() && s > 0.0) {
                    return Err(Error::InvalidInput(format!("branch {index}: need s > 0")));
                }
            }
            Family::PowerInterpolated { c, s } => {
                if !(c.is_finite() && s.is_finite() && c > 0.0 && s > 0.0) {
                    return Err(Error::InvalidInput(format!("branch {index}: need c > 0 and s > 0")));
                }
            }
            Family::FareyLeft => {
                if hi >= 1.0 {
                    return Err(Error::InvalidInput(format!("branch {index}: FareyLeft needs domain below 1")));
                }
            }
            Family::FareyRight => {
                if lo <= 0.0 {
                    return Err(Error::InvalidInput(format!("branch {index}: FareyRight needs domain above 0")));
                }
            }
        }
        let shift = match spec.family.power_params() {
            Some(_) => (spec.family.raw(lo) + 1e-9).floor(),
            None => 0.0,
        };
        let increasing = match spec.family {
            Family::Linear { slope, .. } => slope > 0.0,
            Family::FareyRight => false,
            _ => true,
        };
        let mut b = Branch { family: spec.family, domain: spec.domain, image: [0.0, 0.0], increasing, shift };
        let (a, z) = (b.eval(lo), b.eval(hi));
        b.image = if increasing { [a, z] } else { [z, a] };
        for v in b.image.iter_mut() {
            for t in [0.0, 1.0] {
                if (*v - t).abs() <= ENDPOINT_TOL {
                    *v = t;
                }
            }
        }
        Ok(b)
    }

    /// `T_i(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        self.family.raw(x) - self.shift
    }

    /// Signed derivative `T_i'(x)`.
    pub fn derivative(&self, x: f64) -> f64 {
        match self.family {
            Family::Linear { slope, .. } => slope,
            Family::FareyLeft => 1.0 / ((1.0 - x) * (1.0 - x)),
            Family::FareyRight => -1.0 / (x * x),
            _ => 1.0 + self.excess(x),
        }
    }

    /// `|T_i'(x)| - 1`, computed without cancellation.
    pub fn excess(&self, x: f64) -> f64 {
        match self.family {
            Family::Linear { slope, .. } => slope.abs() - 1.0,
            Family::FareyLeft => x * (2.0 - x) / ((1.0 - x) * (1.0 - x)),
            Family::FareyRight => (1.0 - x) * (1.0 + x) / (x * x),
            _ => {
                let (c, s) = self.family.power_params().unwrap();
                c * (1.0 + s) * x.powf(s)
            }
        }
    }

    /// `log |T_i'(x)|`.
    pub fn log_derivative(&self, x: f64) -> f64 {
        match self.family {
            Family::Linear { slope, .. } => slope.abs().ln(),
            _ => self.excess(x).ln_1p(),
        }
    }

    /// Range of `log |T_i'|` over `[lo, hi]`. Every family has a monotone
    /// derivative on its domain, so the endpoints suffice.
    pub fn log_derivative_range(&self, lo: f64, hi: f64) -> (f64, f64) {
        let (a, b) = (self.log_derivative(lo), self.log_derivative(hi));
        (a.min(b), a.max(b))
    }

    pub fn is_linear(&self) -> bool {
        matches!(self.family, Family::Linear { .. })
    }

    /// Inverse branch without range checking; `y` is clamped to the image.
    pub fn inverse(&self, y: f64) -> f64 {
        let y = y.clamp(self.image[0], self.image[1]);
        let [lo, hi] = self.domain;
        let x = match self.family {
            Family::Linear { slope, offset } => (y - offset) / slope,
            Family::FareyLeft => y / (1.0 + y),
            Family::FareyRight => 1.0 / (1.0 + y),
            _ => self.power_inverse(y),
        };
        x.clamp(lo, hi)
    }

    fn power_inverse(&self, y: f64) -> f64 {
        let (c, s) = self.family.power_params().unwrap();
        let target = y + self.shift;
        let [mut lo, mut hi] = self.domain;
        let g = |x: f64| x + c * x.powf(1.0 + s) - target;
        if g(lo) >= 0.0 {
            return lo;
        }
        if g(hi) <= 0.0 {
            return hi;
        }
        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            let gx = g(x);
            if gx == 0.0 {
                return x;
            }
            if gx < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let d = 1.0 + c * (1.0 + s) * x.powf(s);
            let mut next = x - gx / d;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - x).abs() <= 1e-17 + 1e-16 * x.abs() || hi - lo <= 1e-17 {
                return next;
            }
            x = next;
        }
        x
    }

    /// Preimage of `[a, b]` under this branch, as a sorted interval.
    pub fn inverse_interval(&self, iv: [f64; 2]) -> [f64; 2] {
        let (p, q) = (self.inverse(iv[0]), self.inverse(iv[1]));
        if p <= q {
            [p, q]
        } else {
            [q, p]
        }
    }
}

/// Input description of a map.
#[derive(Debug, Clone)]
pub struct MapSpec {
    pub branches: Vec<BranchSpec>,
    /// `None` derives the transition matrix from the branch images.
    pub transition: Option<Vec<Vec<u8>>>,
    /// Largest period scanned for parabolic orbits.
    pub max_period: usize,
}

impl MapSpec {
    pub fn new(branches: Vec<BranchSpec>) -> Self {
        MapSpec { branches, transition: None, max_period: 3 }
    }

    pub fn with_transition(mut self, a: Vec<Vec<u8>>) -> Self {
        self.transition = Some(a);
        self
    }
}

/// Result of the local fit `||(T^m)'(x)| - 1| ~ L |x - w|^beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentFit {
    pub beta: f64,
    pub l: f64,
    pub residual: f64,
    /// Closed-form `(beta, L)` when the family provides one.
    pub analytic: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParabolicOrbit {
    pub points: Vec<f64>,
    pub symbols: Vec<usize>,
    pub exponent: Option<ExponentFit>,
}

impl ParabolicOrbit {
    pub fn period(&self) -> usize {
        self.symbols.len()
    }
}

/// A validated Markov map. Immutable after construction.
#[derive(Debug, Clone)]
pub struct MarkovMap {
    branches: Vec<Branch>,
    transition: Vec<Vec<bool>>,
    aperiodicity_power: usize,
    parabolic_orbits: Vec<ParabolicOrbit>,
    cores: Vec<[f64; 2]>,
}

pub fn build_map(spec: &MapSpec) -> Result<MarkovMap> {
    let p = spec.branches.len();
    if p == 0 {
        return Err(Error::InvalidInput("a map needs at least one branch".into()));
    }
    let branches = spec
        .branches
        .iter()
        .enumerate()
        .map(|(i, b)| Branch::from_spec(b, i))
        .collect::<Result<Vec<_>>>()?;

    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&i, &j| branches[i].domain[0].total_cmp(&branches[j].domain[0]));
    for w in order.windows(2) {
        let (a, b) = (&branches[w[0]], &branches[w[1]]);
        if a.domain[1] > b.domain[0] + ENDPOINT_TOL {
            return Err(Error::MarkovViolation(format!(
                "domains of branches {} and {} overlap",
                w[0], w[1]
            )));
        }
    }
    for (i, b) in branches.iter().enumerate() {
        if b.image[0] < -ENDPOINT_TOL || b.image[1] > 1.0 + ENDPOINT_TOL {
            return Err(Error::MarkovViolation(format!(
                "image [{}, {}] of branch {i} leaves [0, 1]",
                b.image[0], b.image[1]
            )));
        }
    }

    let covers = |i: usize, j: usize| {
        let (img, dom) = (branches[i].image, branches[j].domain);
        img[0] <= dom[0] + ENDPOINT_TOL && dom[1] <= img[1] + ENDPOINT_TOL
    };
    let touches_interior = |i: usize, j: usize| {
        let (img, dom) = (branches[i].image, branches[j].domain);
        img[1] > dom[0] + ENDPOINT_TOL && img[0] < dom[1] - ENDPOINT_TOL
    };

    let transition: Vec<Vec<bool>> = match &spec.transition {
        Some(a) => {
            if a.len() != p || a.iter().any(|r| r.len() != p) {
                return Err(Error::InvalidInput(format!("transition matrix must be {p}x{p}")));
            }
            let mut t = vec![vec![false; p]; p];
            for i in 0..p {
                for j in 0..p {
                    match a[i][j] {
                        1 => {
                            if !covers(i, j) {
                                return Err(Error::MarkovViolation(format!(
                                    "A({i},{j}) = 1 but the image of branch {i} does not cover J_{j}"
                                )));
                            }
                            t[i][j] = true;
                        }
                        0 => {
                            if touches_interior(i, j) {
                                return Err(Error::MarkovViolation(format!(
                                    "A({i},{j}) = 0 but the image of branch {i} meets the interior of J_{j}"
                                )));
                            }
                        }
                        v => return Err(Error::InvalidInput(format!("transition entry {v} is not 0 or 1"))),
                    }
                }
            }
            t
        }
        None => {
            let mut t = vec![vec![false; p]; p];
            for i in 0..p {
                for j in 0..p {
                    if covers(i, j) {
                        t[i][j] = true;
                    } else if touches_interior(i, j) {
                        return Err(Error::MarkovViolation(format!(
                            "image of branch {i} partially overlaps J_{j}"
                        )));
                    }
                }
            }
            t
        }
    };
    for j in 0..p {
        if !(0..p).any(|i| transition[i][j]) {
            return Err(Error::MarkovViolation(format!("J_{j} is not covered by any branch image")));
        }
    }

    for (i, b) in branches.iter().enumerate() {
        for k in 0..=1000 {
            let x = b.domain[0] + (b.domain[1] - b.domain[0]) * (k as f64 / 1000.0);
            let e = b.excess(x);
            if e < -ENDPOINT_TOL || !e.is_finite() {
                return Err(Error::ContractionViolation(format!(
                    "|T'({x})| = {} < 1 on branch {i}",
                    1.0 + e
                )));
            }
        }
    }

    let aperiodicity_power = primitivity_index(&transition)?;
    let cores = compute_cores(&branches, &transition);
    let mut map = MarkovMap { branches, transition, aperiodicity_power, parabolic_orbits: Vec::new(), cores };

    let mut orbits = Vec::new();
    for m in 1..=spec.max_period.max(1) {
        for word in canonical_cycles(&map, m) {
            if let Some(x) = map.periodic_point(&word) {
                if map.cycle_excess(&word, x) <= PARABOLIC_TOL {
                    let mut points = Vec::with_capacity(m);
                    let mut y = x;
                    for &s in &word {
                        points.push(y);
                        y = map.branches[s].eval(y).clamp(0.0, 1.0);
                    }
                    orbits.push(ParabolicOrbit { points, symbols: word, exponent: None });
                }
            }
        }
    }
    for o in orbits.iter_mut() {
        o.exponent = parabolic_exponent(&map, o).ok();
    }
    map.parabolic_orbits = orbits;

    for (i, b) in map.branches.iter().enumerate() {
        for k in 0..=1000 {
            let x = b.domain[0] + (b.domain[1] - b.domain[0]) * (k as f64 / 1000.0);
            if b.excess(x) <= PARABOLIC_TOL {
                let on_orbit = map
                    .parabolic_orbits
                    .iter()
                    .any(|o| o.points.iter().zip(&o.symbols).any(|(&q, &s)| s == i && (q - x).abs() <= 1e-9));
                if !on_orbit && !map.lands_on_parabolic_orbit(b.eval(x), 8) {
                    return Err(Error::ContractionViolation(format!(
                        "|T'| = 1 at x = {x} on branch {i}, away from any parabolic periodic orbit"
                    )));
                }
            }
        }
    }
    Ok(map)
}

/// Smallest `k` with `A^(k+1) > 0`, searched up to Wielandt's bound.
fn primitivity_index(a: &[Vec<bool>]) -> Result<usize> {
    let p = a.len();
    let k_max = (p - 1) * (p - 1) + 1;
    let mut power = a.to_vec();
    for k in 0..=k_max {
        if power.iter().all(|r| r.iter().all(|&v| v)) {
            return Ok(k);
        }
        let mut next = vec![vec![false; p]; p];
        for i in 0..p {
            for l in 0..p {
                if power[i][l] {
                    for j in 0..p {
                        if a[l][j] {
                            next[i][j] = true;
                        }
                    }
                }
            }
        }
        power = next;
    }
    Err(Error::NotTransitive { k_max })
}

fn compute_cores(branches: &[Branch], a: &[Vec<bool>]) -> Vec<[f64; 2]> {
    let p = branches.len();
    let mut cores: Vec<[f64; 2]> = branches.iter().map(|b| b.domain).collect();
    for _ in 0..10_000 {
        let mut change = 0.0f64;
        let next: Vec<[f64; 2]> = (0..p)
            .map(|i| {
                let mut hull = [f64::INFINITY, f64::NEG_INFINITY];
                for j in 0..p {
                    if a[i][j] {
                        hull[0] = hull[0].min(cores[j][0]);
                        hull[1] = hull[1].max(cores[j][1]);
                    }
                }
                branches[i].inverse_interval(hull)
            })
            .collect();
        for i in 0..p {
            change = change.max((next[i][0] - cores[i][0]).abs()).max((next[i][1] - cores[i][1]).abs());
        }
        cores = next;
        if change <= 1e-16 {
            break;
        }
    }
    cores
}

/// Primitive, cyclically admissible words of length `m` that are minimal
/// among their rotations.
pub(crate) fn canonical_cycles(map: &MarkovMap, m: usize) -> Vec<Vec<usize>> {
    let p = map.num_symbols();
    let total = p.pow(m as u32);
    let mut out = Vec::new();
    for code in 0..total {
        let mut w = vec![0usize; m];
        let mut c = code;
        for k in (0..m).rev() {
            w[k] = c % p;
            c /= p;
        }
        if !(0..m).all(|k| map.allowed(w[k], w[(k + 1) % m])) {
            continue;
        }
        let mut canonical = true;
        for r in 1..m {
            let rot: Vec<usize> = (0..m).map(|k| w[(k + r) % m]).collect();
            if rot <= w {
                canonical = false;
                break;
            }
        }
        if canonical {
            out.push(w);
        }
    }
    out
}

impl MarkovMap {
    pub fn num_symbols(&self) -> usize {
        self.branches.len()
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn branch(&self, i: usize) -> &Branch {
        &self.branches[i]
    }

    pub fn allowed(&self, i: usize, j: usize) -> bool {
        self.transition[i][j]
    }

    pub fn transition(&self) -> &[Vec<bool>] {
        &self.transition
    }

    pub fn aperiodicity_power(&self) -> usize {
        self.aperiodicity_power
    }

    pub fn parabolic_orbits(&self) -> &[ParabolicOrbit] {
        &self.parabolic_orbits
    }

    pub fn is_parabolic(&self) -> bool {
        !self.parabolic_orbits.is_empty()
    }

    /// Every branch maps onto all of the domains (full shift).
    pub fn is_full_shift(&self) -> bool {
        self.transition.iter().all(|r| r.iter().all(|&v| v))
    }

    pub fn all_linear(&self) -> bool {
        self.branches.iter().all(Branch::is_linear)
    }

    /// Span of the repeller points coded by words starting with `i`.
    pub fn core(&self, i: usize) -> [f64; 2] {
        self.cores[i]
    }

    /// `T(x)`, using the lowest-index branch on shared endpoints.
    pub fn apply(&self, x: f64) -> Option<(usize, f64)> {
        self.branches
            .iter()
            .enumerate()
            .find(|(_, b)| b.domain[0] <= x && x <= b.domain[1])
            .map(|(i, b)| (i, b.eval(x)))
    }

    /// Span of the cylinder of an admissible word.
    pub fn cylinder_interval(&self, word: &[usize]) -> [f64; 2] {
        let mut iv = self.core(*word.last().expect("nonempty word"));
        for &s in word[..word.len() - 1].iter().rev() {
            iv = self.branches[s].inverse_interval(iv);
        }
        iv
    }

    pub fn is_admissible(&self, word: &[usize]) -> bool {
        word.iter().all(|&s| s < self.num_symbols()) && word.windows(2).all(|w| self.allowed(w[0], w[1]))
    }

    /// The point of period `word.len()` coded by the periodic sequence `word`.
    pub fn periodic_point(&self, word: &[usize]) -> Option<f64> {
        if !self.is_admissible(word) || !self.allowed(*word.last()?, word[0]) {
            return None;
        }
        let [mut lo, mut hi] = self.cylinder_interval(word);
        let g = |x: f64| self.iterate_word(word, x) - x;
        let (glo, ghi) = (g(lo), g(hi));
        if glo.abs() <= 1e-14 {
            return Some(lo);
        }
        if ghi.abs() <= 1e-14 {
            return Some(hi);
        }
        if glo.signum() == ghi.signum() {
            return None;
        }
        let rising = glo < 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let gm = g(mid);
            if gm == 0.0 {
                return Some(mid);
            }
            if (gm < 0.0) == rising {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(0.5 * (lo + hi))
    }

    /// True when `x` reaches a parabolic orbit within `steps` applications
    /// of `T` (e.g. the right endpoint of the Farey map).
    fn lands_on_parabolic_orbit(&self, mut x: f64, steps: usize) -> bool {
        for _ in 0..=steps {
            if self.parabolic_orbits.iter().any(|o| o.points.iter().any(|&q| (q - x).abs() <= 1e-9)) {
                return true;
            }
            match self.apply(x) {
                Some((_, y)) => x = y,
                None => return false,
            }
        }
        false
    }

    /// Applies the branches of `word` in order.
    pub fn iterate_word(&self, word: &[usize], mut x: f64) -> f64 {
        for &s in word {
            let b = &self.branches[s];
            x = b.eval(x.clamp(b.domain[0], b.domain[1]));
        }
        x
    }

    /// `|(T^m)'(x)| - 1` along the branches of `word`.
    pub fn cycle_excess(&self, word: &[usize], mut x: f64) -> f64 {
        let mut log = 0.0;
        for &s in word {
            let b = &self.branches[s];
            let xc = x.clamp(b.domain[0], b.domain[1]);
            log += b.excess(xc).ln_1p();
            x = b.eval(xc);
        }
        log.exp_m1()
    }
}

/// `x` in `J_i` with `T_i(x) = y`.
pub fn inverse_branch(map: &MarkovMap, i: usize, y: f64) -> Result<f64> {
    let b = map.branches.get(i).ok_or_else(|| Error::InvalidInput(format!("no branch {i}")))?;
    if !(y >= b.image[0] - ENDPOINT_TOL && y <= b.image[1] + ENDPOINT_TOL) {
        return Err(Error::OutOfImage { branch: i, y });
    }
    Ok(b.inverse(y))
}

/// Fits `log ||(T^m)'(x)| - 1|` against `log |x - w|` on one-sided offsets
/// `2^-5 .. 2^-30`, using the offsets at or below `2^-18` where the leading
/// power law dominates curvature corrections.
pub fn parabolic_exponent(map: &MarkovMap, orbit: &ParabolicOrbit) -> Result<ExponentFit> {
    let w = orbit.points[0];
    let first = map.branch(orbit.symbols[0]);
    let side = if w + 2f64.powi(-5) <= first.domain[1] { 1.0 } else { -1.0 };
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for k in 18..=30 {
        let d = 2f64.powi(-k);
        let e = map.cycle_excess(&orbit.symbols, w + side * d);
        if e <= 0.0 || !e.is_finite() {
            return Err(Error::FitUnstable { residual: f64::INFINITY });
        }
        xs.push(d.ln());
        ys.push(e.ln());
    }
    let (beta, intercept, residual) = linear_fit(&xs, &ys);
    if residual > 1e-3 {
        return Err(Error::FitUnstable { residual });
    }
    let analytic = if orbit.period() == 1 && w == 0.0 {
        match first.family {
            Family::MannevillePomeau { s } if first.shift == 0.0 => Some((s, 1.0 + s)),
            Family::PowerInterpolated { c, s } if first.shift == 0.0 => Some((s, c * (1.0 + s))),
            Family::FareyLeft => Some((1.0, 2.0)),
            _ => None,
        }
    } else {
        None
    };
    Ok(ExponentFit { beta, l: intercept.exp(), residual, analytic })
}

/// Root of `x + c x^(1+s) = 1` in `(0, 1)`.
pub fn power_split_point(c: f64, s: f64) -> f64 {
    crate::numerics::find_root(|x| x + c * x.powf(1.0 + s) - 1.0, 0.0, 1.0, 1e-17)
}

pub mod presets {
    //! Standard example maps.
    use super::*;

    pub fn doubling() -> MapSpec {
        MapSpec::new(vec![
            BranchSpec::new(Family::Linear { slope: 2.0, offset: 0.0 }, 0.0, 0.5),
            BranchSpec::new(Family::Linear { slope: 2.0, offset: -1.0 }, 0.5, 1.0),
        ])
    }

    /// Two full linear branches with slopes 2 and 4 on `[0, 1/2]` and `[3/4, 1]`.
    pub fn slopes_2_4() -> MapSpec {
        MapSpec::new(vec![
            BranchSpec::new(Family::Linear { slope: 2.0, offset: 0.0 }, 0.0, 0.5),
            BranchSpec::new(Family::Linear { slope: 4.0, offset: -3.0 }, 0.75, 1.0),
        ])
    }

    /// `x -> g x mod 1` restricted so that the coding is the golden-mean shift.
    pub fn golden_mean() -> MapSpec {
        let g = 0.5 * (1.0 + 5f64.sqrt());
        MapSpec::new(vec![
            BranchSpec::new(Family::Linear { slope: g, offset: 0.0 }, 0.0, 1.0 / g),
            BranchSpec::new(Family::Linear { slope: g, offset: -1.0 }, 1.0 / g, 1.0),
        ])
    }

    pub fn manneville_pomeau(s: f64) -> MapSpec {
        let split = power_split_point(1.0, s);
        MapSpec::new(vec![
            BranchSpec::new(Family::MannevillePomeau { s }, 0.0, split),
            BranchSpec::new(Family::MannevillePomeau { s }, split, 1.0),
        ])
    }

    pub fn farey() -> MapSpec {
        MapSpec::new(vec![
            BranchSpec::new(Family::FareyLeft, 0.0, 0.5),
            BranchSpec::new(Family::FareyRight, 0.5, 1.0),
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::presets::*;
    use super::*;

    #[test]
    fn doubling_is_valid_and_hyperbolic() {
        let m = build_map(&doubling()).unwrap();
        assert!(m.is_full_shift());
        assert_eq!(m.aperiodicity_power(), 0);
        assert!(m.parabolic_orbits().is_empty());
        assert_eq!(m.core(1), [0.5, 1.0]);
    }

    #[test]
    fn golden_mean_transition_is_derived() {
        let m = build_map(&golden_mean()).unwrap();
        assert!(m.allowed(0, 0) && m.allowed(0, 1) && m.allowed(1, 0) && !m.allowed(1, 1));
        assert_eq!(m.aperiodicity_power(), 1);
    }

    #[test]
    fn slope_one_is_rejected() {
        let spec = MapSpec::new(vec![
            BranchSpec::new(Family::Linear { slope: 1.0, offset: 0.0 }, 0.0, 0.5),
            BranchSpec::new(Family::Linear { slope: 2.0, offset: -1.0 }, 0.5, 1.0),
        ]);
        assert!(build_map(&spec).is_err());
    }

    #[test]
    fn declared_transition_is_checked() {
        let spec = doubling().with_transition(vec![vec![1, 1], vec![1, 0]]);
        assert!(matches!(build_map(&spec), Err(Error::MarkovViolation(_))));
    }

    #[test]
    fn farey_branch_values() {
        let m = build_map(&farey()).unwrap();
        assert!((m.branch(0).eval(0.25) - 1.0 / 3.0).abs() < 1e-15);
        assert!((m.branch(1).eval(0.75) - 1.0 / 3.0).abs() < 1e-15);
        assert!(!m.branch(1).increasing);
    }
}
