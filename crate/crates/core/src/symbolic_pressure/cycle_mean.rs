use std::collections::HashMap;

use super::subshift::Word;
use super::table::CylinderTable;
use crate::{Error, Result};

/// Maximum mean weight over all directed cycles (Karp's algorithm).
///
/// `weights[v]` is paid when leaving node `v`; `successors[v]` lists the
/// heads of its out-edges. A virtual source reaches every node, so the graph
/// need not be strongly connected.
pub fn max_cycle_mean(weights: &[f64], successors: &[Vec<usize>]) -> Result<f64> {
    let v = weights.len();
    if v == 0 {
        return Err(Error::NoCycle);
    }
    let ninf = f64::NEG_INFINITY;
    // d[k][u] = best weight of a k-edge walk ending at u, starting anywhere
    let mut d = vec![vec![ninf; v]; v + 1];
    d[0].iter_mut().for_each(|x| *x = 0.0);
    for k in 1..=v {
        let (prev, cur) = d.split_at_mut(k);
        let prev = &prev[k - 1];
        let cur = &mut cur[0];
        for u in 0..v {
            if prev[u] == ninf {
                continue;
            }
            let cand = prev[u] + weights[u];
            for &w in &successors[u] {
                if cand > cur[w] {
                    cur[w] = cand;
                }
            }
        }
    }
    let mut best = ninf;
    for u in 0..v {
        if d[v][u] == ninf {
            continue;
        }
        let worst = (0..v)
            .filter(|&k| d[k][u] != ninf)
            .map(|k| (d[v][u] - d[k][u]) / (v - k) as f64)
            .fold(f64::INFINITY, f64::min);
        best = best.max(worst);
    }
    if best == ninf {
        Err(Error::NoCycle)
    } else {
        Ok(best)
    }
}

/// `(λ_min, λ_max)`: min and max cycle means of `logJ(w)/n` on the graph
/// whose nodes are the table's words and whose edges join `w` to every `w'`
/// with `w[1..] == w'[..n-1]`.
pub fn lyapunov_bounds(table: &CylinderTable) -> Result<(f64, f64)> {
    let n = table.depth();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("lyapunov bounds need depth >= 2, got {n}")));
    }
    let words: Vec<&Word> = table.iter().map(|(w, _)| w).collect();
    let weights: Vec<f64> = table.iter().map(|(_, e)| e.log_j / n as f64).collect();
    let mut by_prefix: HashMap<&[u8], Vec<usize>> = HashMap::new();
    for (i, w) in words.iter().enumerate() {
        by_prefix.entry(&w.symbols()[..n - 1]).or_default().push(i);
    }
    let successors: Vec<Vec<usize>> = words
        .iter()
        .map(|w| by_prefix.get(&w.symbols()[1..]).cloned().unwrap_or_default())
        .collect();
    let lambda_max = max_cycle_mean(&weights, &successors)?;
    let negated: Vec<f64> = weights.iter().map(|w| -w).collect();
    let lambda_min = -max_cycle_mean(&negated, &successors)?;
    Ok((lambda_min, lambda_max))
}
