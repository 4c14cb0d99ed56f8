//! Exact minimum hitting set over a finite blocker pool.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{best_hit, check_space, check_tolerance, LightRay, RaySpace};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinBlockers<P> {
    pub count: usize,
    /// Indices into the candidate pool, ascending.
    pub indices: Vec<usize>,
    pub blockers: Vec<P>,
}

/// Smallest subset of `candidates` meeting every ray's interior; among
/// optimal subsets the lexicographically first (by candidate index) wins.
///
/// The result bounds `b(x, y)` from above for the enumerated horizon only.
pub fn min_blockers<S: RaySpace + ?Sized>(
    space: &S,
    rays: &[LightRay],
    candidates: &[S::Point],
    tol: f64,
) -> Result<MinBlockers<S::Point>> {
    check_tolerance(space, tol)?;
    if rays.is_empty() {
        return Err(Error::EmptyRays);
    }
    check_space(space, rays)?;
    let mut sorted: Vec<&LightRay> = rays.iter().collect();
    sorted.sort_by(|a, b| a.canonical_cmp(b));
    let sets: Vec<Vec<usize>> = sorted
        .par_iter()
        .map(|ray| {
            let mut hitting = Vec::new();
            for (i, c) in candidates.iter().enumerate() {
                if best_hit(space, ray, std::slice::from_ref(c), tol)?.is_some() {
                    hitting.push(i);
                }
            }
            Ok(hitting)
        })
        .collect::<Result<_>>()?;
    for (ray, set) in sorted.iter().zip(&sets) {
        if set.is_empty() {
            return Err(Error::InsufficientCandidates(ray.id.clone()));
        }
    }
    let indices = min_hitting_set(candidates.len(), &sets);
    Ok(MinBlockers {
        count: indices.len(),
        blockers: indices.iter().map(|&i| candidates[i].clone()).collect(),
        indices,
    })
}

/// Minimum hitting set of `sets` (each a nonempty list of element indices
/// below `universe`) by include/exclude branch and bound.
///
/// Elements are decided in index order with inclusion tried first, so the
/// first optimum reached is the lexicographically smallest one. Pruning uses
/// a greedy packing of pairwise-disjoint uncovered sets as the lower bound.
pub fn min_hitting_set(universe: usize, sets: &[Vec<usize>]) -> Vec<usize> {
    let mut reduced: Vec<Vec<usize>> = sets.to_vec();
    for s in reduced.iter_mut() {
        s.sort_unstable();
        s.dedup();
    }
    reduced.sort();
    reduced.dedup();
    // A set containing another is hit whenever the smaller one is.
    let minimal: Vec<Vec<usize>> = reduced
        .iter()
        .filter(|s| !reduced.iter().any(|t| t != *s && t.len() < s.len() && t.iter().all(|e| s.contains(e))))
        .cloned()
        .collect();
    if minimal.is_empty() {
        return Vec::new();
    }

    let greedy = greedy_cover(universe, &minimal);
    let mut search = Search {
        sets: &minimal,
        universe,
        limit: greedy.len(),
        best: None,
        chosen: Vec::new(),
        hit_count: vec![0; minimal.len()],
        membership: (0..universe)
            .map(|e| (0..minimal.len()).filter(|&s| minimal[s].contains(&e)).collect())
            .collect(),
    };
    search.descend(0);
    search.best.unwrap_or(greedy)
}

fn greedy_cover(universe: usize, sets: &[Vec<usize>]) -> Vec<usize> {
    let mut covered = vec![false; sets.len()];
    let mut chosen = Vec::new();
    while covered.iter().any(|c| !c) {
        let best = (0..universe)
            .max_by_key(|&e| {
                let gain = sets.iter().zip(&covered).filter(|(s, c)| !**c && s.contains(&e)).count();
                (gain, std::cmp::Reverse(e))
            })
            .expect("nonempty universe");
        chosen.push(best);
        for (s, c) in sets.iter().zip(covered.iter_mut()) {
            if s.contains(&best) {
                *c = true;
            }
        }
    }
    chosen.sort_unstable();
    chosen
}

struct Search<'a> {
    sets: &'a [Vec<usize>],
    universe: usize,
    limit: usize,
    best: Option<Vec<usize>>,
    chosen: Vec<usize>,
    hit_count: Vec<usize>,
    membership: Vec<Vec<usize>>,
}

impl Search<'_> {
    fn lower_bound(&self, next: usize) -> Option<usize> {
        // Packing of uncovered sets with disjoint remaining elements; None if
        // some uncovered set can no longer be hit.
        let mut used = vec![false; self.universe];
        let mut packed = 0;
        for (s, set) in self.sets.iter().enumerate() {
            if self.hit_count[s] > 0 {
                continue;
            }
            let remaining: Vec<usize> = set.iter().copied().filter(|&e| e >= next).collect();
            if remaining.is_empty() {
                return None;
            }
            if remaining.iter().all(|&e| !used[e]) {
                for e in remaining {
                    used[e] = true;
                }
                packed += 1;
            }
        }
        Some(packed)
    }

    fn descend(&mut self, next: usize) {
        let Some(bound) = self.lower_bound(next) else { return };
        if self.chosen.len() + bound > self.limit {
            return;
        }
        if bound == 0 {
            // All sets hit.
            self.best = Some(self.chosen.clone());
            self.limit = self.chosen.len().saturating_sub(1);
            return;
        }
        if next >= self.universe {
            return;
        }
        if !self.membership[next].is_empty() {
            self.chosen.push(next);
            for &s in &self.membership[next] {
                self.hit_count[s] += 1;
            }
            self.descend(next + 1);
            for &s in &self.membership[next] {
                self.hit_count[s] -= 1;
            }
            self.chosen.pop();
        }
        self.descend(next + 1);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(universe: usize, sets: &[Vec<usize>]) -> Vec<usize> {
        for size in 0..=universe {
            let mut found: Option<Vec<usize>> = None;
            for mask in 0u32..(1 << universe) {
                if mask.count_ones() as usize != size {
                    continue;
                }
                if sets.iter().all(|s| s.iter().any(|&e| mask >> e & 1 == 1)) {
                    let pick: Vec<usize> = (0..universe).filter(|e| mask >> e & 1 == 1).collect();
                    if found.as_ref().map_or(true, |f| pick < *f) {
                        found = Some(pick);
                    }
                }
            }
            if let Some(f) = found {
                return f;
            }
        }
        unreachable!()
    }

    #[test]
    fn matches_brute_force_on_small_instances() {
        let cases: Vec<(usize, Vec<Vec<usize>>)> = vec![
            (4, vec![vec![0], vec![1], vec![2], vec![3]]),
            (3, vec![vec![0, 1], vec![1, 2], vec![0, 2]]),
            (5, vec![vec![0, 4], vec![1, 4], vec![2, 4], vec![3]]),
            (6, vec![vec![0, 1, 2], vec![2, 3], vec![3, 4, 5], vec![0, 5], vec![1, 4]]),
            (2, vec![vec![0, 1]]),
        ];
        for (u, sets) in cases {
            assert_eq!(min_hitting_set(u, &sets), brute(u, &sets), "sets {sets:?}");
        }
    }

    #[test]
    fn random_instances_agree_with_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let u = rng.gen_range(1..8);
            let k = rng.gen_range(1..8);
            let sets: Vec<Vec<usize>> = (0..k)
                .map(|_| {
                    let mut s: Vec<usize> = (0..u).filter(|_| rng.gen_bool(0.35)).collect();
                    if s.is_empty() {
                        s.push(rng.gen_range(0..u));
                    }
                    s
                })
                .collect();
            assert_eq!(min_hitting_set(u, &sets), brute(u, &sets), "sets {sets:?}");
        }
    }
}
