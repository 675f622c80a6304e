//! Extreme ratios `-S phi / S log|T'|` over periodic orbits, found as
//! minimum-ratio cycles on the graph of `(n-1)`-words.

use crate::error::{Error, Result};
use crate::numerics::Enclosure;
use crate::pressure::ThermoSystem;

#[derive(Debug, Clone, PartialEq)]
pub struct Endpoints {
    pub level: usize,
    pub alpha_min: Enclosure,
    /// `None` when a parabolic orbit makes `alpha_max` infinite.
    pub alpha_max: Option<Enclosure>,
    /// Symbols of an optimal cycle for each end.
    pub min_cycle: Vec<usize>,
    pub max_cycle: Option<Vec<usize>>,
}

impl Endpoints {
    pub fn alpha_max_value(&self) -> f64 {
        self.alpha_max.map_or(f64::INFINITY, |e| e.value)
    }
}

#[derive(Debug, Clone, Copy)]
struct Edge {
    from: usize,
    to: usize,
    symbol: usize,
    cost: f64,
    time: f64,
}

/// Karp's minimum mean cycle with a virtual source at every node. Returns
/// the minimum mean and a cycle (as edge indices) of that mean, or `None` for
/// an acyclic graph.
fn min_mean_cycle(nodes: usize, edges: &[Edge], weight: &[f64]) -> Option<(f64, Vec<usize>)> {
    let v = nodes;
    let mut d = vec![vec![f64::INFINITY; v]; v + 1];
    let mut parent = vec![vec![usize::MAX; v]; v + 1];
    d[0].iter_mut().for_each(|x| *x = 0.0);
    for k in 1..=v {
        for (ei, e) in edges.iter().enumerate() {
            let cand = d[k - 1][e.from] + weight[ei];
            if cand < d[k][e.to] {
                d[k][e.to] = cand;
                parent[k][e.to] = ei;
            }
        }
    }
    let mut best = f64::INFINITY;
    let mut best_v = usize::MAX;
    for u in 0..v {
        if !d[v][u].is_finite() {
            continue;
        }
        let mut worst = f64::NEG_INFINITY;
        for k in 0..v {
            if d[k][u].is_finite() {
                worst = worst.max((d[v][u] - d[k][u]) / (v - k) as f64);
            }
        }
        if worst < best {
            best = worst;
            best_v = u;
        }
    }
    if best_v == usize::MAX {
        return None;
    }
    let mut walk_nodes = vec![best_v];
    let mut walk_edges = Vec::with_capacity(v);
    let mut u = best_v;
    for k in (1..=v).rev() {
        let ei = parent[k][u];
        walk_edges.push(ei);
        u = edges[ei].from;
        walk_nodes.push(u);
    }
    walk_nodes.reverse();
    walk_edges.reverse();
    let mut last_seen = vec![usize::MAX; v];
    let mut best_cycle: Option<(f64, Vec<usize>)> = None;
    for (pos, &node) in walk_nodes.iter().enumerate() {
        let prev = last_seen[node];
        if prev != usize::MAX {
            let cyc: Vec<usize> = walk_edges[prev..pos].to_vec();
            let mean = cyc.iter().map(|&e| weight[e]).sum::<f64>() / cyc.len() as f64;
            if best_cycle.as_ref().is_none_or(|b| mean < b.0) {
                best_cycle = Some((mean, cyc));
            }
        }
        last_seen[node] = pos;
    }
    best_cycle.map(|(_, c)| (best, c))
}

fn ratio(edges: &[Edge], cycle: &[usize]) -> f64 {
    let c: f64 = cycle.iter().map(|&e| edges[e].cost).sum();
    let t: f64 = cycle.iter().map(|&e| edges[e].time).sum();
    c / t
}

/// Minimum of `sum cost / sum time` over cycles, by Dinkelbach iteration on
/// Karp's minimum mean cycle. Edges must have positive time.
fn min_ratio_cycle(nodes: usize, edges: &[Edge]) -> Option<(f64, Vec<usize>)> {
    let mut lambda = edges.iter().map(|e| e.cost / e.time).fold(f64::NEG_INFINITY, f64::max);
    let mut cycle: Option<Vec<usize>> = None;
    for _ in 0..200 {
        let w: Vec<f64> = edges.iter().map(|e| e.cost - lambda * e.time).collect();
        let (mean, cyc) = min_mean_cycle(nodes, edges, &w)?;
        let scale = edges.iter().map(|e| e.cost.abs() + lambda.abs() * e.time).fold(0.0, f64::max);
        if mean >= -1e-14 * scale.max(1e-300) {
            if cycle.is_none() {
                cycle = Some(cyc);
            }
            break;
        }
        let r = ratio(edges, &cyc);
        if r >= lambda {
            break;
        }
        lambda = r;
        cycle = Some(cyc);
    }
    let cycle = cycle?;
    Some((ratio(edges, &cycle), cycle))
}

/// Level-`n` graph with one weight choice per edge.
fn graph(sys: &ThermoSystem, n: usize, pick: usize, negate: bool) -> Result<(usize, Vec<Edge>)> {
    let table = sys.table(n)?;
    let p = sys.map().num_symbols() as u64;
    let mut node_index = std::collections::HashMap::new();
    let mut edges = Vec::with_capacity(table.len());
    let low = p.pow((n - 1) as u32);
    for e in &table.entries {
        let (psi, phi) = sys.first_terms(e, n);
        let (cost, time) = match pick {
            0 => (-phi[2], psi[2]),
            1 => (-phi[1], psi[1]),
            _ => (-phi[0], psi[0]),
        };
        let cost = if negate { -cost } else { cost };
        if time <= 0.0 {
            continue;
        }
        let from_code = e.code / p;
        let to_code = e.code % low;
        let nn = node_index.len();
        let from = *node_index.entry(from_code).or_insert(nn);
        let nn = node_index.len();
        let to = *node_index.entry(to_code).or_insert(nn);
        edges.push(Edge { from, to, symbol: (e.code / low) as usize, cost, time });
    }
    Ok((node_index.len(), edges))
}

fn cycle_symbols(edges: &[Edge], cycle: &[usize]) -> Vec<usize> {
    cycle.iter().map(|&e| edges[e].symbol).collect()
}

/// Exact ratio on the periodic orbit coded by `word`, if it can be located.
fn orbit_ratio(sys: &ThermoSystem, word: &[usize]) -> Option<f64> {
    let (psi, phi) = sys.periodic_sums(word)?;
    if psi > 0.0 {
        Some(-phi / psi)
    } else {
        None
    }
}

fn extreme(sys: &ThermoSystem, n: usize, maximize: bool) -> Result<(Enclosure, Vec<usize>)> {
    let mut vals = [0.0; 3];
    let mut rep_cycle = Vec::new();
    for pick in 0..3 {
        let (nodes, edges) = graph(sys, n, pick, maximize)?;
        let (r, cyc) = min_ratio_cycle(nodes, &edges)
            .ok_or_else(|| Error::InvalidInput(format!("no cycle with positive expansion at level {n}")))?;
        vals[pick] = if maximize { -r } else { r };
        if pick == 1 {
            rep_cycle = cycle_symbols(&edges, &cyc);
        }
    }
    let (lo, hi) = (vals[0].min(vals[2]), vals[0].max(vals[2]));
    let value = orbit_ratio(sys, &rep_cycle).unwrap_or(vals[1]);
    Ok((Enclosure::clamped(lo, value, hi), rep_cycle))
}

/// `alpha_min` and `alpha_max` from extreme cycle ratios at level `n`.
pub fn endpoints(sys: &ThermoSystem, n: usize) -> Result<Endpoints> {
    if n < 2 {
        return Err(Error::InvalidInput("endpoint level must be at least 2".into()));
    }
    let (alpha_min, min_cycle) = extreme(sys, n, false)?;
    let (alpha_max, max_cycle) = if sys.map().is_parabolic() {
        (None, None)
    } else {
        let (e, c) = extreme(sys, n, true)?;
        (Some(e), Some(c))
    };
    Ok(Endpoints { level: n, alpha_min, alpha_max, min_cycle, max_cycle })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn karp_finds_cheapest_loop() {
        let edges = vec![
            Edge { from: 0, to: 0, symbol: 0, cost: 3.0, time: 1.0 },
            Edge { from: 0, to: 1, symbol: 0, cost: 1.0, time: 1.0 },
            Edge { from: 1, to: 0, symbol: 1, cost: 1.0, time: 1.0 },
            Edge { from: 1, to: 1, symbol: 1, cost: 2.0, time: 1.0 },
        ];
        let (r, cyc) = min_ratio_cycle(2, &edges).unwrap();
        assert_eq!(r, 1.0);
        assert_eq!(cyc.len(), 2);
    }
}
