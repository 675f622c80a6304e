//! Topological pressure with two-sided finite-level brackets, the Bowen
//! root, and normalization of potentials to zero pressure.
//!
//! Two evaluation paths are used:
//!
//! * locally constant combinations (linear branches, or no `log|T'|` term)
//!   go through grouped partition sums, whose successive ratios give a
//!   Collatz–Wielandt bracket on the Perron root;
//! * everything else goes through cylinder tables. The upper bound
//!   `(1/n) log Z̄_n` follows from sub-multiplicativity of the sup-sums, the
//!   lower bound from super-multiplicativity of the inf-sums across
//!   connectors of length `k` and from periodic-orbit measures.

use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::exec::{map_chunks, Execution};
use crate::maps::{canonical_cycles, MarkovMap};
use crate::numerics::{bisect_predicate, bracket_decreasing, find_root, Enclosure, LogSumExp};
use crate::symbolic::{
    build_levels, check_level, decode_word, phi_bracket, word_code, CylinderEntry, LevelTable, Potential, Rest,
};

/// The potential `a * log|T'| + b * phi + c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Combo {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Combo {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Combo { a, b, c }
    }

    /// `phi` itself.
    pub fn phi() -> Self {
        Combo::new(0.0, 1.0, 0.0)
    }

    /// `a * log|T'| + b * phi`.
    pub fn psi_a(a: f64, b: f64) -> Self {
        Combo::new(a, b, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PressureBracket {
    pub level: usize,
    pub lower: f64,
    pub upper: f64,
    pub value: f64,
    pub exact: bool,
}

impl PressureBracket {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn enclosure(&self) -> Enclosure {
        Enclosure::new(self.lower, self.value, self.upper)
    }
}

/// A periodic orbit with its Birkhoff sums, used for lower bounds.
#[derive(Debug, Clone)]
pub(crate) struct OrbitSample {
    pub word: Vec<usize>,
    pub psi_sum: f64,
    pub rest_sum: f64,
}

/// Grouped partition sums for locally constant combinations.
#[derive(Debug, Clone)]
struct TransferModel {
    states: usize,
    /// Edges `(from, to, psi, rest)`, sorted by `to`.
    edges: Vec<(usize, usize, f64, f64)>,
    /// Initial complete-window sums `(psi, rest)` per state, or `None` when
    /// states carry no complete window.
    init: Option<Vec<(f64, f64)>>,
}

impl TransferModel {
    fn new(map: &MarkovMap, rest: &Rest) -> Result<TransferModel> {
        let p = map.num_symbols();
        let d = rest.depth();
        let g = d.saturating_sub(1).max(1);
        let budget = 1u64 << 20;
        let words: Vec<Vec<usize>> = crate::symbolic::enumerate_words(map, g, budget)?.collect();
        let mut index = std::collections::HashMap::new();
        for (k, w) in words.iter().enumerate() {
            index.insert(word_code(w, p), k);
        }
        let psi = |s: usize| {
            let b = map.branch(s);
            if b.is_linear() {
                b.log_derivative(b.domain[0])
            } else {
                f64::NAN
            }
        };
        let mut edges = Vec::new();
        for w in crate::symbolic::enumerate_words(map, g + 1, budget)? {
            let from = index[&word_code(&w[..g], p)];
            let to = index[&word_code(&w[1..], p)];
            let window = &w[g + 1 - d..];
            edges.push((from, to, psi(window[0]), rest.window_value(window)));
        }
        edges.sort_by_key(|e| (e.1, e.0));
        let init = if d == 1 { Some(words.iter().map(|w| (psi(w[0]), rest.window_value(w))).collect()) } else { None };
        Ok(TransferModel { states: words.len(), edges, init })
    }

    /// Runs `iters` steps and returns the last Collatz–Wielandt bracket of
    /// `log rho`, or stops early when the bracket is narrower than
    /// `stop_width`.
    fn bracket(&self, big_a: f64, big_b: f64, big_c: f64, iters: usize, stop_width: f64) -> (f64, f64, usize) {
        let f = |psi: f64, rest: f64| {
            let mut v = big_c;
            if big_a != 0.0 {
                v += big_a * psi;
            }
            if big_b != 0.0 {
                v += big_b * rest;
            }
            v
        };
        let fe: Vec<f64> = self.edges.iter().map(|e| f(e.2, e.3)).collect();
        let fmax = fe.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = fe.iter().map(|v| (v - fmax).exp()).collect();
        let mut y: Vec<f64> = match &self.init {
            Some(init) => {
                let vals: Vec<f64> = init.iter().map(|&(p, r)| f(p, r)).collect();
                let m = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                vals.iter().map(|v| (v - m).exp()).collect()
            }
            None => vec![1.0; self.states],
        };
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        let mut next = vec![0.0; self.states];
        let mut done = 0;
        for it in 1..=iters {
            next.iter_mut().for_each(|v| *v = 0.0);
            for (e, &we) in self.edges.iter().zip(&w) {
                next[e.1] += y[e.0] * we;
            }
            let mut rmin = f64::INFINITY;
            let mut rmax = 0.0f64;
            for (n, &o) in next.iter().zip(&y) {
                if o > 0.0 {
                    let r = n / o;
                    rmin = rmin.min(r);
                    rmax = rmax.max(r);
                }
            }
            lo = fmax + rmin.ln();
            hi = fmax + rmax.ln();
            let m = next.iter().cloned().fold(0.0f64, f64::max);
            for (yv, &n) in y.iter_mut().zip(&next) {
                *yv = n / m;
            }
            done = it;
            if hi - lo <= stop_width {
                break;
            }
        }
        (lo, hi, done)
    }
}

/// Sums of `exp(S_n f)` at the lower, representative and upper brackets.
#[derive(Debug, Clone, Copy)]
struct LevelSums {
    lo: f64,
    rep: f64,
    hi: f64,
}

const SUM_CHUNK: usize = 2048;

/// A map together with a normalized potential `phi`, with cached cylinder
/// tables. Evaluates pressures of `a log|T'| + b phi + c`.
pub struct ThermoSystem {
    map: MarkovMap,
    phi: Potential,
    rest: Rest,
    exec: Execution,
    budget: u64,
    level: usize,
    transfer: Option<TransferModel>,
    orbits: Vec<OrbitSample>,
    levels: Mutex<Vec<Arc<LevelTable>>>,
}

impl std::fmt::Debug for ThermoSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ThermoSystem").field("phi", &self.phi).field("level", &self.level).finish()
    }
}

/// Default table level: the largest `n <= 14` with at most `2^14` words.
fn default_level(map: &MarkovMap) -> usize {
    let mut n = 1;
    while n < 14 && crate::symbolic::count_words(map, n + 1) <= 1 << 14 {
        n += 1;
    }
    n
}

impl ThermoSystem {
    pub fn new(map: MarkovMap, phi: Potential) -> Result<Self> {
        let rest = phi.rest(&map)?;
        let transfer = if rest.is_locally_constant() { Some(TransferModel::new(&map, &rest)?) } else { None };
        let mut orbits = Vec::new();
        let mut push = |word: Vec<usize>, points: Vec<f64>| {
            let psi_sum = word.iter().zip(&points).map(|(&s, &x)| map.branch(s).log_derivative(x)).sum();
            let rest_sum = rest.orbit_sum(&word, &points);
            orbits.push(OrbitSample { word, psi_sum, rest_sum });
        };
        for m in 1..=2 {
            for word in canonical_cycles(&map, m) {
                if let Some(x) = map.periodic_point(&word) {
                    let mut points = Vec::with_capacity(m);
                    let mut y = x;
                    for &s in &word {
                        points.push(y);
                        y = map.iterate_word(&[s], y);
                    }
                    push(word, points);
                }
            }
        }
        for o in map.parabolic_orbits() {
            if o.period() > 2 {
                push(o.symbols.clone(), o.points.clone());
            }
        }
        let level = default_level(&map);
        Ok(ThermoSystem {
            map,
            phi,
            rest,
            exec: Execution::default(),
            budget: crate::symbolic::DEFAULT_WORD_BUDGET,
            level,
            transfer,
            orbits,
            levels: Mutex::new(Vec::new()),
        })
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    /// Cylinder level used by root finding on the table path.
    pub fn with_level(mut self, level: usize) -> Self {
        self.level = level.max(1);
        self
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn map(&self) -> &MarkovMap {
        &self.map
    }

    pub fn phi(&self) -> &Potential {
        &self.phi
    }

    pub fn execution(&self) -> Execution {
        self.exec
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    /// Coefficients `(A, B, C)` of `A log|T'| + B rest + C`.
    fn split(&self, f: Combo) -> (f64, f64, f64) {
        let g = self.phi.psi_coefficient();
        (f.a + f.b * g, f.b, f.c - f.b * self.phi.pressure_shift)
    }

    /// Whether `f` is evaluated through grouped partition sums.
    pub fn uses_transfer(&self, f: Combo) -> bool {
        let (a, b, _) = self.split(f);
        self.transfer.is_some() && (a == 0.0 || self.map.all_linear()) && (b == 0.0 || self.rest.is_locally_constant())
    }

    /// Cylinder table of level `n`, built on first use.
    pub fn table(&self, n: usize) -> Result<Arc<LevelTable>> {
        if n == 0 {
            return Err(Error::InvalidInput("level must be at least 1".into()));
        }
        check_level(&self.map, n, self.budget)?;
        let mut levels = self.levels.lock().expect("table cache poisoned");
        build_levels(&self.map, &self.rest, n, self.exec, &mut levels);
        Ok(levels[n - 1].clone())
    }

    /// `[lo, rep, hi]` of `S_n f` on a table entry.
    pub(crate) fn birkhoff(&self, f: Combo, e: &CylinderEntry, n: usize) -> [f64; 3] {
        let (a, b, c) = self.split(f);
        let pick = |coef: f64, v: &[f64; 3]| {
            if coef == 0.0 {
                [0.0; 3]
            } else if coef > 0.0 {
                [coef * v[0], coef * v[1], coef * v[2]]
            } else {
                [coef * v[2], coef * v[1], coef * v[0]]
            }
        };
        let (x, y) = (pick(a, &e.psi), pick(b, &e.rest));
        let cn = c * n as f64;
        [x[0] + y[0] + cn, x[1] + y[1] + cn, x[2] + y[2] + cn]
    }

    /// `[lo, rep, hi]` of `S_n phi` on a table entry.
    pub(crate) fn phi_sum(&self, e: &CylinderEntry, n: usize) -> [f64; 3] {
        phi_bracket(e, &self.phi, n)
    }

    fn level_sums(&self, f: Combo, table: &LevelTable) -> LevelSums {
        let n = table.level;
        let parts = map_chunks(self.exec, &table.entries, SUM_CHUNK, |_, chunk| {
            let mut acc = [LogSumExp::new(); 3];
            for e in chunk {
                let s = self.birkhoff(f, e, n);
                for k in 0..3 {
                    acc[k].push(s[k]);
                }
            }
            acc
        });
        let mut total = [LogSumExp::new(); 3];
        for part in &parts {
            for k in 0..3 {
                total[k].merge(&part[k]);
            }
        }
        LevelSums { lo: total[0].value(), rep: total[1].value(), hi: total[2].value() }
    }

    /// Largest pressure lower bound from periodic-orbit measures.
    fn orbit_bound(&self, f: Combo) -> f64 {
        let (a, b, c) = self.split(f);
        self.orbits
            .iter()
            .map(|o| {
                let mut v = 0.0;
                if a != 0.0 {
                    v += a * o.psi_sum;
                }
                if b != 0.0 {
                    v += b * o.rest_sum;
                }
                v / o.word.len() as f64 + c
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn table_bracket(&self, f: Combo, n: usize) -> Result<PressureBracket> {
        let top = self.table(n)?;
        let first = self.table(1)?;
        let s = self.level_sums(f, &top);
        let nf = n as f64;
        let k = self.map.aperiodicity_power() as f64;
        let inf1 = first
            .entries
            .iter()
            .map(|e| self.birkhoff(f, e, 1)[0])
            .fold(f64::INFINITY, f64::min);
        let partition_lower = if k == 0.0 { s.lo / nf } else { (s.lo + k * inf1) / (nf + k) };
        let lower = partition_lower.max(self.orbit_bound(f));
        let upper = s.hi / nf;
        let value = if n >= 2 {
            let prev = self.table(n - 1)?;
            s.rep - self.level_sums(f, &prev).rep
        } else {
            s.rep
        };
        let upper = upper.max(lower);
        Ok(PressureBracket { level: n, lower, upper, value: value.clamp(lower, upper), exact: lower == upper })
    }

    fn transfer_bracket(&self, f: Combo, iters: usize, stop_width: f64) -> PressureBracket {
        let (a, b, c) = self.split(f);
        let (lo, hi, done) = self.transfer.as_ref().unwrap().bracket(a, b, c, iters, stop_width);
        let hi = hi.max(lo);
        PressureBracket { level: done, lower: lo, upper: hi, value: 0.5 * (lo + hi), exact: lo == hi }
    }

    /// Finite-level bracket of `P(f)` at level `n`.
    pub fn pressure_bracket(&self, f: Combo, n: usize) -> Result<PressureBracket> {
        if n == 0 {
            return Err(Error::InvalidInput("level must be at least 1".into()));
        }
        if self.uses_transfer(f) {
            Ok(self.transfer_bracket(f, n, -1.0))
        } else {
            self.table_bracket(f, n)
        }
    }

    /// Refines the level until the bracket is narrower than `tol`.
    pub fn pressure(&self, f: Combo, tol: f64) -> Result<PressureBracket> {
        if self.uses_transfer(f) {
            let b = self.transfer_bracket(f, 100_000, tol);
            if b.width() <= tol {
                return Ok(b);
            }
            return Err(Error::NotConverged { enclosure: b.enclosure(), tol });
        }
        let mut best: Option<PressureBracket> = None;
        let mut n = 1;
        loop {
            let b = match self.table_bracket(f, n) {
                Ok(b) => b,
                Err(Error::LevelTooLarge { .. }) if best.is_some() => break,
                Err(e) => return Err(e),
            };
            let merged = match best {
                None => b,
                Some(p) => {
                    let lower = p.lower.max(b.lower);
                    let upper = p.upper.min(b.upper).max(lower);
                    PressureBracket { level: n, lower, upper, value: b.value.clamp(lower, upper), exact: lower == upper }
                }
            };
            best = Some(merged);
            if merged.width() <= tol || n >= self.level.max(MAX_REFINE_LEVEL) {
                break;
            }
            n += 1;
        }
        let b = best.unwrap();
        if b.width() <= tol {
            Ok(b)
        } else {
            Err(Error::NotConverged { enclosure: b.enclosure(), tol })
        }
    }

    /// Lower, representative and upper pressure values used by root finding.
    pub fn bounds(&self, f: Combo) -> Result<PressureBracket> {
        if self.uses_transfer(f) {
            Ok(self.transfer_bracket(f, 20_000, 1e-14))
        } else {
            self.table_bracket(f, self.level)
        }
    }

    /// Enclosure of `b(a)`, the root of `P(a log|T'| + b phi) = 0`.
    pub fn b_of_a(&self, a: f64, tol: f64) -> Result<Enclosure> {
        let eval = |b: f64, which: usize| -> f64 {
            match self.bounds(Combo::psi_a(a, b)) {
                Ok(p) => [p.lower, p.value, p.upper][which],
                Err(_) => f64::NAN,
            }
        };
        self.bounds(Combo::psi_a(a, 0.0))?;
        let root_tol = if self.uses_transfer(Combo::psi_a(a, 1.0)) { 1e-15 } else { 1e-13 };
        let mut roots = [0.0; 3];
        for (which, r) in roots.iter_mut().enumerate() {
            let g = |b: f64| eval(b, which);
            let (lo, hi) = bracket_decreasing(g, 0.0, 1.0, 1e6)
                .ok_or_else(|| Error::InvalidInput(format!("no root of the pressure equation at a = {a}")))?;
            *r = find_root(g, lo, hi, root_tol);
        }
        let enc = Enclosure::clamped(roots[0], roots[1], roots[2]);
        if enc.width() > tol {
            return Err(Error::NotConverged { enclosure: enc, tol });
        }
        Ok(enc)
    }

    /// Enclosure of `dim Λ`, the zero of `t -> P(-t log|T'|)`.
    pub fn bowen_root(&self, tol: f64) -> Result<Enclosure> {
        let f = |t: f64| Combo::new(-t, 0.0, 0.0);
        if self.uses_transfer(f(1.0)) {
            let mut roots = [0.0; 3];
            for (which, r) in roots.iter_mut().enumerate() {
                let g = |t: f64| {
                    let p = self.transfer_bracket(f(t), 20_000, 1e-14);
                    [p.lower, p.value, p.upper][which]
                };
                *r = if g(0.0) <= 0.0 { 0.0 } else { find_root(g, 0.0, 1.0, 1e-14) };
            }
            let enc = Enclosure::clamped(roots[0], roots[1], roots[2]);
            return if enc.width() > tol { Err(Error::NotConverged { enclosure: enc, tol }) } else { Ok(enc) };
        }
        let n = self.level;
        let positive = |which: usize| {
            move |t: f64| match self.table_bracket(f(t), n) {
                Ok(p) => [p.lower, p.upper][which] > 0.0,
                Err(_) => false,
            }
        };
        let lower = if positive(0)(0.0) { bisect_predicate(positive(0), 0.0, 1.0, 1e-12).0 } else { 0.0 };
        let upper = if positive(1)(1.0) {
            1.0
        } else if positive(1)(0.0) {
            bisect_predicate(positive(1), 0.0, 1.0, 1e-12).1
        } else {
            0.0
        };
        let table = self.table(n)?;
        let diam: Vec<f64> = table.entries.iter().map(|e| e.diameter()).filter(|&d| d > 0.0).collect();
        let g = |t: f64| {
            let mut acc = LogSumExp::new();
            for &d in &diam {
                acc.push(t * d.ln());
            }
            acc.value()
        };
        let point = if g(1.0) >= 0.0 { 1.0 } else { find_root(g, 0.0, 1.0, 1e-14) };
        let enc = Enclosure::clamped(lower, point, upper);
        if enc.width() > tol {
            return Err(Error::NotConverged { enclosure: enc, tol });
        }
        Ok(enc)
    }

    /// Brackets `[lo, rep, hi]` of the first Birkhoff terms of `log|T'|` and
    /// of `phi` on a level-`n` table entry.
    pub(crate) fn first_terms(&self, e: &CylinderEntry, n: usize) -> ([f64; 3], [f64; 3]) {
        let p = self.map.num_symbols();
        let h = n.min(self.rest.depth());
        let head = decode_word(e.code / (p as u64).pow((n - h) as u32), h, p);
        let b = self.map.branch(head[0]);
        let (plo, phi_) = b.log_derivative_range(e.lo, e.hi);
        let psi = [plo, b.log_derivative(e.rep).clamp(plo, phi_), phi_];
        let r = self.rest.term(&head, [e.lo, e.hi], e.rep);
        let g = self.phi.psi_coefficient();
        let s = self.phi.pressure_shift;
        let (gl, gh) = if g >= 0.0 { (g * psi[0], g * psi[2]) } else { (g * psi[2], g * psi[0]) };
        (psi, [gl + r.lo - s, g * psi[1] + r.rep - s, gh + r.hi - s])
    }

    /// `(S_m log|T'|, S_m phi)` along the periodic orbit coded by `word`.
    pub fn periodic_sums(&self, word: &[usize]) -> Option<(f64, f64)> {
        let x = self.map.periodic_point(word)?;
        let mut points = Vec::with_capacity(word.len());
        let mut y = x;
        for &s in word {
            points.push(y);
            y = self.map.iterate_word(&[s], y);
        }
        let psi: f64 = word.iter().zip(&points).map(|(&s, &x)| self.map.branch(s).log_derivative(x)).sum();
        let rest = self.rest.orbit_sum(word, &points);
        let phi = self.phi.psi_coefficient() * psi + rest - self.phi.pressure_shift * word.len() as f64;
        Some((psi, phi))
    }

    /// Supremum of `phi` over the first-level cylinders.
    pub fn sup_phi(&self) -> Result<f64> {
        let t = self.table(1)?;
        Ok(t.entries.iter().map(|e| self.phi_sum(e, 1)[2]).fold(f64::NEG_INFINITY, f64::max))
    }

    /// Infimum of `phi` over the first-level cylinders.
    pub fn inf_phi(&self) -> Result<f64> {
        let t = self.table(1)?;
        Ok(t.entries.iter().map(|e| self.phi_sum(e, 1)[0]).fold(f64::INFINITY, f64::min))
    }

    /// Supremum of `log|T'|` over the first-level cylinders.
    pub fn sup_psi(&self) -> Result<f64> {
        let t = self.table(1)?;
        Ok(t.entries.iter().map(|e| e.psi[2]).fold(f64::NEG_INFINITY, f64::max))
    }

    /// Word of a table entry.
    pub fn word(&self, code: u64, n: usize) -> Vec<usize> {
        decode_word(code, n, self.map.num_symbols())
    }
}

/// Highest level tried by [`ThermoSystem::pressure`] on the table path.
const MAX_REFINE_LEVEL: usize = 18;

pub fn pressure_bracket(map: &MarkovMap, f: &Potential, n: usize) -> Result<PressureBracket> {
    ThermoSystem::new(map.clone(), f.clone())?.pressure_bracket(Combo::phi(), n)
}

pub fn pressure(map: &MarkovMap, f: &Potential, tol: f64) -> Result<PressureBracket> {
    ThermoSystem::new(map.clone(), f.clone())?.pressure(Combo::phi(), tol)
}

/// `dim Λ`, the root of `P(-t log|T'|) = 0`.
pub fn bowen_root(map: &MarkovMap, tol: f64) -> Result<Enclosure> {
    ThermoSystem::new(map.clone(), Potential::constant(map.num_symbols(), -1.0))?.bowen_root(tol)
}

/// `phi_raw - P(phi_raw)`, checked to be strictly negative.
pub fn normalize_potential(map: &MarkovMap, phi_raw: &Potential, tol: f64) -> Result<Potential> {
    let sys = ThermoSystem::new(map.clone(), phi_raw.clone())?;
    let p = sys.pressure(Combo::phi(), tol)?;
    let phi = phi_raw.shifted(p.value);
    let sup = ThermoSystem::new(map.clone(), phi.clone())?.sup_phi()?;
    if sup >= 0.0 {
        return Err(Error::NotStrictlyNegative { sup });
    }
    Ok(phi)
}
