//! Lower bounds on blocking numbers from rays with pairwise disjoint interiors.
//!
//! Each ray of such a family needs its own blocker, so the family size bounds
//! `b(x, y)` from below (for the enumerated horizon).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_space, check_tolerance, shared_endpoints, LightRay, RaySpace};
use crate::Result;

/// Ray lists up to this size get an exhaustive maximum-family search.
pub const DEFAULT_EXACT_LIMIT: usize = 40;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisjointFamily {
    pub source: String,
    pub target: String,
    pub rays: Vec<String>,
    /// True when the family is maximum (exhaustive search), false when only maximal.
    pub exhaustive: bool,
    /// Disjointness was decided exactly.
    pub exact_disjoint: bool,
    /// Smallest distance between two member interiors (numeric spaces only).
    pub pairwise_gap: Option<f64>,
}

impl DisjointFamily {
    pub fn size(&self) -> usize {
        self.rays.len()
    }
}

/// Largest pairwise interior-disjoint subfamily: exact branch and bound when
/// `rays.len() <= exact_limit`, otherwise greedy by length with 1-for-2 swaps.
pub fn blocking_lower_bound<S: RaySpace + ?Sized>(
    space: &S,
    rays: &[LightRay],
    exact_limit: usize,
    tol: f64,
) -> Result<DisjointFamily> {
    check_tolerance(space, tol)?;
    let (source, target) = shared_endpoints(rays)?;
    check_space(space, rays)?;
    let mut sorted: Vec<&LightRay> = rays.iter().collect();
    sorted.sort_by(|a, b| a.canonical_cmp(b));
    let n = sorted.len();

    let (chosen, exhaustive) = if n <= exact_limit {
        let disjoint = disjointness_matrix(space, &sorted, tol)?;
        (max_clique(&disjoint), true)
    } else {
        (greedy_family(space, &sorted, tol)?, false)
    };

    let members: Vec<&LightRay> = chosen.iter().map(|&i| sorted[i]).collect();
    let mut gap: Option<f64> = None;
    if !space.exact() {
        for i in 0..members.len() {
            for j in i + 1..members.len() {
                if let Some(g) = space.interior_gap(members[i], members[j])? {
                    gap = Some(gap.map_or(g, |c: f64| c.min(g)));
                }
            }
        }
    }
    Ok(DisjointFamily {
        source,
        target,
        rays: members.iter().map(|r| r.id.clone()).collect(),
        exhaustive,
        exact_disjoint: space.exact(),
        pairwise_gap: gap,
    })
}

fn disjointness_matrix<S: RaySpace + ?Sized>(space: &S, rays: &[&LightRay], tol: f64) -> Result<Vec<Vec<bool>>> {
    let n = rays.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let verdicts: Vec<bool> = pairs
        .par_iter()
        .map(|&(i, j)| space.interiors_meet(rays[i], rays[j], tol).map(|meet| !meet))
        .collect::<Result<_>>()?;
    let mut m = vec![vec![false; n]; n];
    for (&(i, j), d) in pairs.iter().zip(verdicts) {
        m[i][j] = d;
        m[j][i] = d;
    }
    Ok(m)
}

/// Maximum clique in the disjointness graph; the first maximum found in
/// index order wins.
fn max_clique(adj: &[Vec<bool>]) -> Vec<usize> {
    fn extend(adj: &[Vec<bool>], current: &mut Vec<usize>, candidates: &[usize], best: &mut Vec<usize>) {
        if current.len() > best.len() {
            *best = current.clone();
        }
        for (pos, &v) in candidates.iter().enumerate() {
            if current.len() + candidates.len() - pos <= best.len() {
                return;
            }
            let next: Vec<usize> = candidates[pos + 1..].iter().copied().filter(|&w| adj[v][w]).collect();
            current.push(v);
            extend(adj, current, &next, best);
            current.pop();
        }
    }
    let all: Vec<usize> = (0..adj.len()).collect();
    let mut best = Vec::new();
    extend(adj, &mut Vec::new(), &all, &mut best);
    best
}

fn greedy_family<S: RaySpace + ?Sized>(space: &S, rays: &[&LightRay], tol: f64) -> Result<Vec<usize>> {
    let mut family: Vec<usize> = Vec::new();
    for (i, ray) in rays.iter().enumerate() {
        let mut ok = true;
        for &j in &family {
            if space.interiors_meet(ray, rays[j], tol)? {
                ok = false;
                break;
            }
        }
        if ok {
            family.push(i);
        }
    }
    // 1-for-2 augmentation: drop one member when two outsiders conflict only
    // with it and are disjoint from each other.
    loop {
        let mut improved = false;
        'members: for slot in 0..family.len() {
            let member = family[slot];
            let mut freed = Vec::new();
            for i in 0..rays.len() {
                if family.contains(&i) {
                    continue;
                }
                let mut blockers = 0;
                let mut hits_member = false;
                for &j in &family {
                    if space.interiors_meet(rays[i], rays[j], tol)? {
                        blockers += 1;
                        hits_member |= j == member;
                        if blockers > 1 {
                            break;
                        }
                    }
                }
                if blockers == 1 && hits_member {
                    freed.push(i);
                }
            }
            for a in 0..freed.len() {
                for b in a + 1..freed.len() {
                    if !space.interiors_meet(rays[freed[a]], rays[freed[b]], tol)? {
                        family.remove(slot);
                        family.push(freed[a]);
                        family.push(freed[b]);
                        family.sort_unstable();
                        improved = true;
                        break 'members;
                    }
                }
            }
        }
        if !improved {
            break;
        }
    }
    Ok(family)
}
