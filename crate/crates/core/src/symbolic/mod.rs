//! Admissible words, cylinders, Birkhoff-sum brackets and distortion
//! diagnostics.

mod cylinder;
mod potential;
mod table;

pub use cylinder::{boundary_ratio, cylinder, distortion_report, Cylinder, DistortionReport};
pub(crate) use cylinder::phi_bracket;
pub use potential::{Potential, PotentialKind};
pub(crate) use potential::{Rest, Term};
pub use table::{CylinderEntry, LevelTable};
pub(crate) use table::build_levels;

use crate::error::{Error, Result};
use crate::maps::MarkovMap;

/// Default cap on the number of words at one level.
pub const DEFAULT_WORD_BUDGET: u64 = 1 << 26;

/// Number of admissible words of length `n`.
pub fn count_words(map: &MarkovMap, n: usize) -> u128 {
    if n == 0 {
        return 1;
    }
    let p = map.num_symbols();
    let mut v = vec![1u128; p];
    for _ in 1..n {
        let next: Vec<u128> = (0..p)
            .map(|i| (0..p).filter(|&j| map.allowed(i, j)).map(|j| v[j]).fold(0u128, |a, b| a.saturating_add(b)))
            .collect();
        v = next;
    }
    v.iter().fold(0u128, |a, &b| a.saturating_add(b))
}

/// Fails with `LevelTooLarge` when level `n` has more than `budget` words or
/// its words cannot be packed into a 64-bit code.
pub fn check_level(map: &MarkovMap, n: usize, budget: u64) -> Result<u128> {
    let count = count_words(map, n);
    let p = map.num_symbols() as f64;
    if count > budget as u128 || (n as f64) * p.log2() > 63.0 {
        return Err(Error::LevelTooLarge { level: n, count, budget });
    }
    Ok(count)
}

/// Lexicographic stream of admissible words of length `n`.
pub struct Words<'a> {
    map: &'a MarkovMap,
    current: Option<Vec<usize>>,
}

impl<'a> Iterator for Words<'a> {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        self.current = advance(self.map, out.clone());
        Some(out)
    }
}

fn first_completion(map: &MarkovMap, prefix: &mut Vec<usize>, n: usize) -> bool {
    let p = map.num_symbols();
    if prefix.len() == n {
        return true;
    }
    for s in 0..p {
        if prefix.last().is_none_or(|&l| map.allowed(l, s)) {
            prefix.push(s);
            if first_completion(map, prefix, n) {
                return true;
            }
            prefix.pop();
        }
    }
    false
}

fn advance(map: &MarkovMap, mut w: Vec<usize>) -> Option<Vec<usize>> {
    let n = w.len();
    let p = map.num_symbols();
    while let Some(last) = w.pop() {
        for s in last + 1..p {
            if w.last().is_none_or(|&l| map.allowed(l, s)) {
                w.push(s);
                if first_completion(map, &mut w, n) {
                    return Some(w);
                }
                w.pop();
            }
        }
    }
    None
}

/// Admissible words of length `n` in lexicographic order.
pub fn enumerate_words(map: &MarkovMap, n: usize, budget: u64) -> Result<Words<'_>> {
    if n == 0 {
        return Err(Error::InvalidInput("word length must be at least 1".into()));
    }
    let count = count_words(map, n);
    if count > budget as u128 {
        return Err(Error::LevelTooLarge { level: n, count, budget });
    }
    let mut first = Vec::with_capacity(n);
    let current = if first_completion(map, &mut first, n) { Some(first) } else { None };
    Ok(Words { map, current })
}

/// Base-`p` code of a word, most significant symbol first.
pub fn word_code(word: &[usize], p: usize) -> u64 {
    word.iter().fold(0u64, |c, &s| c * p as u64 + s as u64)
}

/// Inverse of [`word_code`] for a word of length `n`.
pub fn decode_word(mut code: u64, n: usize, p: usize) -> Vec<usize> {
    let mut w = vec![0usize; n];
    for k in (0..n).rev() {
        w[k] = (code % p as u64) as usize;
        code /= p as u64;
    }
    w
}
