use std::sync::Arc;

use super::{decode_word, Rest, Term};
use crate::exec::{map_chunks, Execution};
use crate::maps::MarkovMap;

/// One cylinder of a level table: span, representative point and Birkhoff
/// brackets of `log|T'|` and of the non-geometric part of the potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylinderEntry {
    pub code: u64,
    pub lo: f64,
    pub hi: f64,
    pub rep: f64,
    pub psi: [f64; 3],
    pub rest: [f64; 3],
}

impl CylinderEntry {
    pub fn diameter(&self) -> f64 {
        self.hi - self.lo
    }
}

/// All admissible cylinders of one length, in lexicographic order.
#[derive(Debug, Clone)]
pub struct LevelTable {
    pub level: usize,
    pub entries: Vec<CylinderEntry>,
}

impl LevelTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

const CHUNK: usize = 4096;

pub(super) fn entry_for(map: &MarkovMap, rest: &Rest, code: u64, n: usize, iv: [f64; 2], rep: f64, tail: Option<&CylinderEntry>) -> CylinderEntry {
    let p = map.num_symbols();
    let h = n.min(rest.depth());
    let head = decode_word(code / (p as u64).pow((n - h) as u32), h, p);
    let b = map.branch(head[0]);
    let (plo, phi) = b.log_derivative_range(iv[0], iv[1]);
    let prep = b.log_derivative(rep).clamp(plo, phi);
    let Term { lo: rlo, rep: rrep, hi: rhi } = rest.term(&head, iv, rep);
    let (mut psi, mut rs) = ([plo, prep, phi], [rlo, rrep, rhi]);
    if let Some(t) = tail {
        for k in 0..3 {
            psi[k] += t.psi[k];
            rs[k] += t.rest[k];
        }
    }
    CylinderEntry { code, lo: iv[0], hi: iv[1], rep, psi, rest: rs }
}

fn first_level(map: &MarkovMap, rest: &Rest) -> LevelTable {
    let entries = (0..map.num_symbols())
        .map(|i| {
            let iv = map.core(i);
            entry_for(map, rest, i as u64, 1, iv, 0.5 * (iv[0] + iv[1]), None)
        })
        .collect();
    LevelTable { level: 1, entries }
}

fn next_level(map: &MarkovMap, rest: &Rest, prev: &LevelTable, exec: Execution) -> LevelTable {
    let p = map.num_symbols();
    let n = prev.level;
    let top = (p as u64).pow((n - 1) as u32);
    let scale = (p as u64).pow(n as u32);
    let mut entries = Vec::new();
    for i in 0..p {
        let b = map.branch(i);
        let parts = map_chunks(exec, &prev.entries, CHUNK, |_, chunk| {
            chunk
                .iter()
                .filter(|e| map.allowed(i, (e.code / top) as usize))
                .map(|e| {
                    let iv = b.inverse_interval([e.lo, e.hi]);
                    let rep = b.inverse(e.rep).clamp(iv[0], iv[1]);
                    entry_for(map, rest, i as u64 * scale + e.code, n + 1, iv, rep, Some(e))
                })
                .collect::<Vec<_>>()
        });
        for part in parts {
            entries.extend(part);
        }
    }
    LevelTable { level: n + 1, entries }
}

/// Extends `levels` (level `k` at index `k - 1`) up to level `n`.
pub(crate) fn build_levels(map: &MarkovMap, rest: &Rest, n: usize, exec: Execution, levels: &mut Vec<Arc<LevelTable>>) {
    if levels.is_empty() && n >= 1 {
        levels.push(Arc::new(first_level(map, rest)));
    }
    while levels.len() < n {
        let next = next_level(map, rest, levels.last().unwrap(), exec);
        levels.push(Arc::new(next));
    }
}
