use crate::error::{Error, Result};
use crate::maps::MarkovMap;

use super::word_code;

/// Potential families. The normalized potential is the family value minus
/// `pressure_shift`.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialKind {
    /// Depends on the first `depth` symbols; `table` is indexed by the base-`p`
    /// code of the word. Entries of inadmissible words are ignored.
    LocallyConstant { depth: usize, table: Vec<f64> },
    /// `coefficient * log|T'|`.
    Geometric { coefficient: f64 },
    /// `intercept + slope * x` on each branch domain, one `[intercept, slope]`
    /// pair per branch.
    Pointwise { pieces: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    pub kind: PotentialKind,
    pub pressure_shift: f64,
}

impl Potential {
    pub fn new(kind: PotentialKind) -> Self {
        Potential { kind, pressure_shift: 0.0 }
    }

    pub fn constant(num_symbols: usize, c: f64) -> Self {
        Potential::new(PotentialKind::LocallyConstant { depth: 1, table: vec![c; num_symbols] })
    }

    /// `log p_i` on the first-level cylinders.
    pub fn bernoulli(probs: &[f64]) -> Self {
        Potential::new(PotentialKind::LocallyConstant { depth: 1, table: probs.iter().map(|p| p.ln()).collect() })
    }

    pub fn locally_constant(depth: usize, table: Vec<f64>) -> Self {
        Potential::new(PotentialKind::LocallyConstant { depth, table })
    }

    pub fn geometric(coefficient: f64) -> Self {
        Potential::new(PotentialKind::Geometric { coefficient })
    }

    pub fn affine(pieces: Vec<[f64; 2]>) -> Self {
        Potential::new(PotentialKind::Pointwise { pieces })
    }

    /// The same potential with `shift` subtracted.
    pub fn shifted(&self, shift: f64) -> Self {
        Potential { kind: self.kind.clone(), pressure_shift: self.pressure_shift + shift }
    }

    /// Coefficient of `log|T'|` contained in the potential.
    pub fn psi_coefficient(&self) -> f64 {
        match self.kind {
            PotentialKind::Geometric { coefficient } => coefficient,
            _ => 0.0,
        }
    }

    pub fn depth(&self) -> usize {
        match self.kind {
            PotentialKind::LocallyConstant { depth, .. } => depth,
            _ => 1,
        }
    }

    pub fn validate(&self, map: &MarkovMap) -> Result<()> {
        let p = map.num_symbols();
        if !self.pressure_shift.is_finite() {
            return Err(Error::InvalidInput("pressure shift is not finite".into()));
        }
        match &self.kind {
            PotentialKind::LocallyConstant { depth, table } => {
                if *depth == 0 || *depth > 12 {
                    return Err(Error::InvalidInput(format!("table depth {depth} outside 1..=12")));
                }
                let expect = p.checked_pow(*depth as u32).unwrap_or(usize::MAX);
                if table.len() != expect {
                    return Err(Error::InvalidInput(format!(
                        "table has {} entries, expected {expect} for depth {depth}",
                        table.len()
                    )));
                }
                for w in super::enumerate_words(map, *depth, u64::MAX)? {
                    let v = table[word_code(&w, p) as usize];
                    if !v.is_finite() {
                        return Err(Error::InvalidInput(format!("table entry for {w:?} is not finite")));
                    }
                }
            }
            PotentialKind::Geometric { coefficient } => {
                if !coefficient.is_finite() {
                    return Err(Error::InvalidInput("geometric coefficient is not finite".into()));
                }
            }
            PotentialKind::Pointwise { pieces } => {
                if pieces.len() != p || pieces.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidInput(format!("pointwise potential needs {p} finite pieces")));
                }
            }
        }
        Ok(())
    }

    pub(crate) fn rest(&self, map: &MarkovMap) -> Result<Rest> {
        self.validate(map)?;
        Ok(match &self.kind {
            PotentialKind::Geometric { .. } => Rest::None,
            PotentialKind::Pointwise { pieces } => Rest::Affine(pieces.clone()),
            PotentialKind::LocallyConstant { depth, table } => {
                let p = map.num_symbols();
                let d = *depth;
                let mut levels: Vec<Vec<(f64, f64)>> = vec![Vec::new(); d + 1];
                levels[d] = vec![(f64::NAN, f64::NAN); table.len()];
                for w in super::enumerate_words(map, d, u64::MAX)? {
                    let c = word_code(&w, p) as usize;
                    levels[d][c] = (table[c], table[c]);
                }
                for m in (1..d).rev() {
                    let size = p.pow(m as u32);
                    let mut cur = vec![(f64::NAN, f64::NAN); size];
                    for (u, slot) in cur.iter_mut().enumerate() {
                        let last = u % p;
                        let mut lo = f64::INFINITY;
                        let mut hi = f64::NEG_INFINITY;
                        for s in 0..p {
                            if !map.allowed(last, s) {
                                continue;
                            }
                            let (a, b) = levels[m + 1][u * p + s];
                            if a.is_nan() {
                                continue;
                            }
                            lo = lo.min(a);
                            hi = hi.max(b);
                        }
                        if lo <= hi {
                            *slot = (lo, hi);
                        }
                    }
                    levels[m] = cur;
                }
                Rest::LocallyConstant { depth: d, p, levels }
            }
        })
    }
}

/// Bracket and representative value of one Birkhoff term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Term {
    pub lo: f64,
    pub rep: f64,
    pub hi: f64,
}

/// The part of a potential that is not a multiple of `log|T'|`.
#[derive(Debug, Clone)]
pub(crate) enum Rest {
    None,
    /// `levels[m][code]` is the range of the table over admissible
    /// extensions of the `m`-word `code`; `levels[depth]` holds exact values.
    LocallyConstant { depth: usize, p: usize, levels: Vec<Vec<(f64, f64)>> },
    Affine(Vec<[f64; 2]>),
}

impl Rest {
    pub fn depth(&self) -> usize {
        match self {
            Rest::LocallyConstant { depth, .. } => *depth,
            _ => 1,
        }
    }

    /// True when the rest depends only on finitely many symbols.
    pub fn is_locally_constant(&self) -> bool {
        match self {
            Rest::Affine(pieces) => pieces.iter().all(|p| p[1] == 0.0),
            _ => true,
        }
    }

    /// Exact value on a window of `depth()` symbols (locally constant case).
    pub fn window_value(&self, window: &[usize]) -> f64 {
        match self {
            Rest::None => 0.0,
            Rest::Affine(pieces) => pieces[window[0]][0],
            Rest::LocallyConstant { depth, p, levels } => {
                levels[*depth][word_code(&window[..*depth], *p) as usize].0
            }
        }
    }

    /// Term at position 0 of a word whose first symbols are `head`
    /// (`head.len() = min(word length, depth)`), over the interval `iv` with
    /// representative point `rep`.
    pub fn term(&self, head: &[usize], iv: [f64; 2], rep: f64) -> Term {
        match self {
            Rest::None => Term { lo: 0.0, rep: 0.0, hi: 0.0 },
            Rest::Affine(pieces) => {
                let [c, m] = pieces[head[0]];
                let (a, b) = (c + m * iv[0], c + m * iv[1]);
                Term { lo: a.min(b), rep: c + m * rep, hi: a.max(b) }
            }
            Rest::LocallyConstant { p, levels, .. } => {
                let (lo, hi) = levels[head.len()][word_code(head, *p) as usize];
                Term { lo, rep: 0.5 * (lo + hi), hi }
            }
        }
    }

    /// Birkhoff sum along the periodic orbit with symbols `word` through
    /// `points`.
    pub fn orbit_sum(&self, word: &[usize], points: &[f64]) -> f64 {
        let m = word.len();
        match self {
            Rest::None => 0.0,
            Rest::Affine(pieces) => word.iter().zip(points).map(|(&s, &x)| pieces[s][0] + pieces[s][1] * x).sum(),
            Rest::LocallyConstant { depth, .. } => (0..m)
                .map(|k| {
                    let window: Vec<usize> = (0..*depth).map(|j| word[(k + j) % m]).collect();
                    self.window_value(&window)
                })
                .sum(),
        }
    }
}
