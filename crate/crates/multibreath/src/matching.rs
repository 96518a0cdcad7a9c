//! Pairing of decomposed signals: autocorrelation, dynamic time warping,
//! and stable roommate matching.
//!
//! The decomposition returns the per-person signals in arbitrary order and
//! two per person. Autocorrelation strengthens periodicity and removes the
//! phase offsets, DTW scores every pair of (downsampled) autocorrelation
//! curves, and the roommate matcher pairs the signals so no two unmatched
//! signals both prefer each other over their assigned partners.

use crate::error::{Error, Result};

/// Downsampling factor between autocorrelation and DTW.
pub const DTW_DOWNSAMPLE: usize = 10;

/// Full biased autocorrelation over lags `-(N-1)..=(N-1)`, normalized so
/// the lag-0 value is 1. An all-zero input stays all-zero.
pub fn autocorrelate(series: &[f64]) -> Result<Vec<f64>> {
    let n = series.len();
    if n < 2 {
        return Err(Error::SeriesTooShort { len: n, min: 2 });
    }
    let mut out = vec![0.0; 2 * n - 1];
    for lag in 0..n {
        let mut acc = 0.0;
        for t in 0..n - lag {
            acc += series[t] * series[t + lag];
        }
        out[n - 1 + lag] = acc;
        out[n - 1 - lag] = acc;
    }
    let zero_lag = out[n - 1];
    if zero_lag > 0.0 {
        for v in out.iter_mut() {
            *v /= zero_lag;
        }
    }
    Ok(out)
}

/// Keep every `factor`-th sample starting at index 0.
pub fn downsample(series: &[f64], factor: usize) -> Vec<f64> {
    if factor <= 1 {
        return series.to_vec();
    }
    series.iter().step_by(factor).copied().collect()
}

/// A monotone alignment between two equal-length sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpingPath {
    /// Index pairs from (0, 0) to (N'-1, N'-1); each step advances one or
    /// both coordinates by one.
    pub steps: Vec<(usize, usize)>,
    pub total_cost: f64,
}

/// Dynamic time warping distance with absolute-difference cost, plus one
/// optimal path recovered by backtracking (ties prefer the diagonal, then
/// the first-sequence step).
pub fn dtw_distance(p: &[f64], q: &[f64]) -> Result<(f64, WarpingPath)> {
    if p.len() != q.len() {
        return Err(Error::Dimension(format!(
            "dtw_distance: lengths differ ({} vs {})",
            p.len(),
            q.len()
        )));
    }
    let n = p.len();
    if n == 0 {
        return Err(Error::SeriesTooShort { len: 0, min: 1 });
    }
    let mut cost = vec![f64::INFINITY; n * n];
    let idx = |m: usize, l: usize| m * n + l;
    cost[idx(0, 0)] = (p[0] - q[0]).abs();
    for l in 1..n {
        cost[idx(0, l)] = (p[0] - q[l]).abs() + cost[idx(0, l - 1)];
    }
    for m in 1..n {
        cost[idx(m, 0)] = (p[m] - q[0]).abs() + cost[idx(m - 1, 0)];
        for l in 1..n {
            let best = cost[idx(m - 1, l)]
                .min(cost[idx(m, l - 1)])
                .min(cost[idx(m - 1, l - 1)]);
            cost[idx(m, l)] = (p[m] - q[l]).abs() + best;
        }
    }

    // backtrack: diagonal first, then decreasing m, then decreasing l
    let mut steps = Vec::with_capacity(2 * n);
    let (mut m, mut l) = (n - 1, n - 1);
    steps.push((m, l));
    while m > 0 || l > 0 {
        if m > 0 && l > 0 {
            let diag = cost[idx(m - 1, l - 1)];
            let vert = cost[idx(m - 1, l)];
            let horiz = cost[idx(m, l - 1)];
            if diag <= vert && diag <= horiz {
                m -= 1;
                l -= 1;
            } else if vert <= horiz {
                m -= 1;
            } else {
                l -= 1;
            }
        } else if m > 0 {
            m -= 1;
        } else {
            l -= 1;
        }
        steps.push((m, l));
    }
    steps.reverse();
    Ok((
        cost[idx(n - 1, n - 1)],
        WarpingPath {
            steps,
            total_cost: cost[idx(n - 1, n - 1)],
        },
    ))
}

/// Per-signal strict preference lists over all other signals, ordered by
/// ascending DTW distance (ties broken by lower index), together with the
/// symmetric distance matrix they were derived from.
#[derive(Debug, Clone)]
pub struct PreferenceTable {
    pub lists: Vec<Vec<usize>>,
    /// distances[i][j], symmetric with zero diagonal.
    pub distances: Vec<Vec<f64>>,
}

impl PreferenceTable {
    /// Build preference lists from a symmetric distance matrix.
    pub fn from_distances(distances: Vec<Vec<f64>>) -> Result<PreferenceTable> {
        let n = distances.len();
        if n < 2 {
            return Err(Error::Dimension(
                "preference table needs at least 2 participants".into(),
            ));
        }
        for (i, row) in distances.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension("distance matrix not square".into()));
            }
            for (j, &d) in row.iter().enumerate() {
                if !d.is_finite() {
                    return Err(Error::NonFinite("distance matrix"));
                }
                if (d - distances[j][i]).abs() > 1e-12 {
                    return Err(Error::Dimension(format!(
                        "distance matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let mut lists = Vec::with_capacity(n);
        for i in 0..n {
            let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            others.sort_by(|&x, &y| {
                distances[i][x]
                    .total_cmp(&distances[i][y])
                    .then(x.cmp(&y))
            });
            lists.push(others);
        }
        Ok(PreferenceTable { lists, distances })
    }

    pub fn participants(&self) -> usize {
        self.lists.len()
    }
}

/// Autocorrelate each signal, downsample by 10, compute pairwise DTW
/// distances, and derive the preference lists.
pub fn build_preferences(signals: &[Vec<f64>]) -> Result<PreferenceTable> {
    let n = signals.len();
    if n < 2 {
        return Err(Error::Dimension("need at least 2 signals".into()));
    }
    let mut curves = Vec::with_capacity(n);
    for s in signals {
        curves.push(downsample(&autocorrelate(s)?, DTW_DOWNSAMPLE));
    }
    let mut distances = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let (d, _) = dtw_distance(&curves[i], &curves[j])?;
            distances[i][j] = d;
            distances[j][i] = d;
        }
    }
    PreferenceTable::from_distances(distances)
}

/// How the matching was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchStability {
    /// Produced by the roommate algorithm; no blocking pair exists.
    Stable,
    /// No stable matching exists; pairs were chosen greedily by ascending
    /// distance.
    Fallback,
}

/// A perfect matching over the signal indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    /// Unordered index pairs, each index appearing exactly once.
    pub pairs: Vec<(usize, usize)>,
    pub stability: MatchStability,
}

/// Stable roommate matching over the preference table. If no stable
/// matching exists the result falls back to greedy minimum-distance
/// pairing and is flagged accordingly.
pub fn stable_roommate_match(prefs: &PreferenceTable) -> Result<Matching> {
    let n = prefs.participants();
    if n % 2 != 0 {
        return Err(Error::Config(format!(
            "stable roommate matching needs an even participant count, got {n}"
        )));
    }
    match irving(&prefs.lists) {
        Ok(pairs) => Ok(Matching {
            pairs,
            stability: MatchStability::Stable,
        }),
        Err(Error::NoStableMatching) => Ok(Matching {
            pairs: greedy_pairs(&prefs.distances),
            stability: MatchStability::Fallback,
        }),
        Err(e) => Err(e),
    }
}

/// Greedy pairing by ascending global distance.
fn greedy_pairs(distances: &[Vec<f64>]) -> Vec<(usize, usize)> {
    let n = distances.len();
    let mut edges: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            edges.push((distances[i][j], i, j));
        }
    }
    edges.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used = vec![false; n];
    let mut pairs = Vec::with_capacity(n / 2);
    for (_, i, j) in edges {
        if !used[i] && !used[j] {
            used[i] = true;
            used[j] = true;
            pairs.push((i, j));
        }
    }
    pairs
}

/// Irving's stable roommate algorithm on strict preference lists.
///
/// Phase 1 is the proposal round: each participant proposes down its list;
/// a holder keeps the best proposal seen and symmetric rejections prune
/// the lists. Phase 2 repeatedly finds an all-or-nothing rotation via
/// "q_i = second preference of p_i, p_{i+1} = last preference of q_i" and
/// eliminates it, restarting the scan after each elimination, until all
/// lists are singletons.
pub fn irving(lists: &[Vec<usize>]) -> Result<Vec<(usize, usize)>> {
    let n = lists.len();
    if n < 2 || n % 2 != 0 {
        return Err(Error::Config(format!(
            "irving: need an even participant count >= 2, got {n}"
        )));
    }
    for (i, list) in lists.iter().enumerate() {
        let mut seen = vec![false; n];
        for &j in list {
            if j >= n || j == i || seen[j] {
                return Err(Error::Config(format!(
                    "irving: list {i} is not a permutation of the other participants"
                )));
            }
            seen[j] = true;
        }
        if list.len() != n - 1 {
            return Err(Error::Config(format!(
                "irving: list {i} must rank all {} others",
                n - 1
            )));
        }
    }

    // rank[i][j] = position of j in i's list; lower is better
    let mut rank = vec![vec![0usize; n]; n];
    for i in 0..n {
        for (pos, &j) in lists[i].iter().enumerate() {
            rank[i][j] = pos;
        }
    }
    // active[i][j]: j still on i's list
    let mut active = vec![vec![true; n]; n];
    for (i, row) in active.iter_mut().enumerate() {
        row[i] = false;
    }
    fn reject(active: &mut [Vec<bool>], a: usize, b: usize) {
        active[a][b] = false;
        active[b][a] = false;
    }
    let first = |active: &[Vec<bool>], i: usize| -> Option<usize> {
        lists[i].iter().copied().find(|&j| active[i][j])
    };
    let second = |active: &[Vec<bool>], i: usize| -> Option<usize> {
        lists[i].iter().copied().filter(|&j| active[i][j]).nth(1)
    };
    let last = |active: &[Vec<bool>], i: usize| -> Option<usize> {
        lists[i].iter().rev().copied().find(|&j| active[i][j])
    };

    // Phase 1: proposals with symmetric rejections.
    let mut holds: Vec<Option<usize>> = vec![None; n];
    for proposer in 0..n {
        let mut current = proposer;
        loop {
            let Some(target) = first(&active, current) else {
                return Err(Error::NoStableMatching);
            };
            match holds[target] {
                None => {
                    holds[target] = Some(current);
                    break;
                }
                Some(held) => {
                    if rank[target][current] < rank[target][held] {
                        holds[target] = Some(current);
                        reject(&mut active, target, held);
                        current = held;
                    } else {
                        reject(&mut active, target, current);
                    }
                }
            }
        }
    }
    // If j holds a proposal from i, j rejects everyone it likes less
    // than i.
    for j in 0..n {
        if let Some(holder) = holds[j] {
            let cutoff = rank[j][holder];
            for &worse in &lists[j] {
                if rank[j][worse] > cutoff && active[j][worse] {
                    reject(&mut active, j, worse);
                }
            }
        }
    }
    if (0..n).any(|i| first(&active, i).is_none()) {
        return Err(Error::NoStableMatching);
    }

    // Phase 2: eliminate all-or-nothing rotations until all lists are
    // singletons, restarting the scan after each elimination.
    loop {
        let start = (0..n).find(|&i| lists[i].iter().filter(|&&j| active[i][j]).count() > 1);
        let Some(p1) = start else { break };

        let mut p_seq = vec![p1];
        let mut q_seq: Vec<usize> = Vec::new();
        let (cycle_start, cycle_len) = loop {
            let p_i = *p_seq.last().unwrap();
            let Some(q_i) = second(&active, p_i) else {
                return Err(Error::NoStableMatching);
            };
            q_seq.push(q_i);
            let Some(p_next) = last(&active, q_i) else {
                return Err(Error::NoStableMatching);
            };
            if let Some(pos) = p_seq.iter().position(|&p| p == p_next) {
                break (pos, p_seq.len() - pos);
            }
            p_seq.push(p_next);
        };

        // Around the cycle, q_i accepts its second-choice proposer p_i:
        // reject p_{i+1} (q_i's current first-choice holder) and everyone
        // else q_i likes less than p_i, symmetrically.
        for offset in 0..cycle_len {
            let q_i = q_seq[cycle_start + offset];
            let p_i = p_seq[cycle_start + offset];
            let cutoff = rank[q_i][p_i];
            for &worse in &lists[q_i] {
                if rank[q_i][worse] > cutoff && active[q_i][worse] {
                    reject(&mut active, q_i, worse);
                }
            }
        }
        if (0..n).any(|i| first(&active, i).is_none()) {
            return Err(Error::NoStableMatching);
        }
    }

    // All lists are singletons: read off the matching.
    let mut pairs = Vec::with_capacity(n / 2);
    let mut done = vec![false; n];
    for i in 0..n {
        if done[i] {
            continue;
        }
        let j = first(&active, i).ok_or(Error::NoStableMatching)?;
        if first(&active, j) != Some(i) {
            return Err(Error::NoStableMatching);
        }
        done[i] = true;
        done[j] = true;
        pairs.push((i.min(j), i.max(j)));
    }
    Ok(pairs)
}

/// True if the matching has a blocking pair under the preference lists:
/// two participants not matched together who each prefer the other over
/// their assigned partner.
pub fn has_blocking_pair(prefs: &PreferenceTable, pairs: &[(usize, usize)]) -> bool {
    let n = prefs.participants();
    let mut partner = vec![usize::MAX; n];
    for &(a, b) in pairs {
        partner[a] = b;
        partner[b] = a;
    }
    let rank_of = |i: usize, j: usize| prefs.lists[i].iter().position(|&x| x == j).unwrap();
    for x in 0..n {
        for y in x + 1..n {
            if partner[x] == y {
                continue;
            }
            let x_prefers = rank_of(x, y) < rank_of(x, partner[x]);
            let y_prefers = rank_of(y, x) < rank_of(y, partner[y]);
            if x_prefers && y_prefers {
                return true;
            }
        }
    }
    false
}
