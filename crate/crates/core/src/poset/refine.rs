use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use super::{chain_order, hasse_covers, ComponentPoset};
use crate::chaingraph::Grid;
use crate::rational::{serde_rational, Rational};
use crate::systems::IntervalBlock;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SignatureError {
    #[error("a trace needs at least two levels")]
    TooFewLevels,
    #[error("resolutions must strictly increase")]
    UnorderedResolutions,
    #[error("poset at level {0} is not linear")]
    NonLinear(usize),
    #[error("component matching between levels {0} and {1} is broken")]
    BrokenMatching(usize, usize),
}

#[derive(Debug, Clone)]
pub struct TraceLevel {
    pub grid: Grid,
    pub eps: Rational,
    pub poset: ComponentPoset,
}

/// Posets of one system at increasing resolutions, with components matched level to level.
#[derive(Debug, Clone)]
pub struct RefinementTrace {
    levels: Vec<TraceLevel>,
    /// `matching[k][x]` is the level `k+1` component matched to component `x` of level `k`.
    matching: Vec<Vec<Option<usize>>>,
}

fn distance_to(x: &Rational, b: &IntervalBlock) -> Rational {
    if x < &b.lo {
        &b.lo - x
    } else if x > &b.hi {
        x - &b.hi
    } else {
        Rational::default()
    }
}

/// Fine component holding the representative of `c`, else the overlapping one nearest to it.
fn match_component(c: &crate::chaingraph::Component, fine: &TraceLevel, owner: &HashMap<usize, usize>) -> Option<usize> {
    let g = &fine.grid;
    let r = &c.representative;
    let j = g.cell_of(r);
    let mut hits: Vec<usize> = Vec::new();
    for k in [j.checked_sub(1), Some(j)].into_iter().flatten() {
        if g.cell(k).contains(r) {
            hits.extend(owner.get(&k));
        }
    }
    if let Some(&id) = hits.iter().min() {
        return Some(id);
    }
    fine.poset
        .components()
        .iter()
        .filter(|f| f.hull.intersects(&c.hull))
        .min_by(|a, b| distance_to(r, &a.hull).cmp(&distance_to(r, &b.hull)).then(a.id.cmp(&b.id)))
        .map(|f| f.id)
}

impl RefinementTrace {
    pub fn new(levels: Vec<TraceLevel>) -> Result<Self, SignatureError> {
        if !levels.windows(2).all(|w| w[0].grid.len() < w[1].grid.len()) {
            return Err(SignatureError::UnorderedResolutions);
        }
        let mut matching = Vec::new();
        for (k, w) in levels.windows(2).enumerate() {
            let owner: HashMap<usize, usize> =
                w[1].poset.components().iter().flat_map(|c| c.cells.iter().map(move |&i| (i, c.id))).collect();
            let m: Vec<Option<usize>> =
                w[0].poset.components().iter().map(|c| match_component(c, &w[1], &owner)).collect();
            let mut seen = vec![false; w[1].poset.len()];
            for &t in m.iter().flatten() {
                if std::mem::replace(&mut seen[t], true) {
                    return Err(SignatureError::BrokenMatching(k, k + 1));
                }
            }
            matching.push(m);
        }
        Ok(RefinementTrace { levels, matching })
    }

    pub fn levels(&self) -> &[TraceLevel] {
        &self.levels
    }

    pub fn matching(&self, k: usize) -> &[Option<usize>] {
        &self.matching[k]
    }
}

/// Open interval between two consecutive components.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GapSpan {
    #[serde(with = "serde_rational")]
    pub lo: Rational,
    #[serde(with = "serde_rational")]
    pub hi: Rational,
}

/// A cover gap of the first level that no later level places a component inside.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PersistentPair {
    #[serde(with = "serde_rational")]
    pub lower: Rational,
    #[serde(with = "serde_rational")]
    pub upper: Rational,
    /// Per level, the gap of the cover pair overlapping the previous level's gap the most.
    pub gaps: Vec<GapSpan>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TransitionStat {
    pub covers: usize,
    pub refined: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Signature {
    pub dense_growth: bool,
    pub persistent_pairs: Vec<PersistentPair>,
    pub transitions: Vec<TransitionStat>,
}

/// Open interval strictly between two disjoint hulls, if any.
fn gap_between(a: &IntervalBlock, b: &IntervalBlock) -> Option<(Rational, Rational)> {
    if a.hi < b.lo {
        Some((a.hi.clone(), b.lo.clone()))
    } else if b.hi < a.lo {
        Some((b.hi.clone(), a.lo.clone()))
    } else {
        None
    }
}

/// Whether the fine level has a component between `x ≺ y` in order and strictly inside their coarse gap.
fn refined(coarse: &ComponentPoset, fine: &ComponentPoset, x: usize, y: usize, fx: usize, fy: usize) -> bool {
    let Some((lo, hi)) = gap_between(&coarse.component(x).hull, &coarse.component(y).hull) else {
        return false;
    };
    let (bot, top) = if fine.precedes(fx, fy) { (fx, fy) } else { (fy, fx) };
    fine.components().iter().any(|z| {
        fine.precedes(bot, z.id) && fine.precedes(z.id, top) && lo < z.hull.lo && z.hull.hi < hi
    })
}

/// Gap of the cover pair of `p` sharing the longest stretch with `prev`.
fn widest_overlap(p: &ComponentPoset, prev: &GapSpan) -> Option<GapSpan> {
    hasse_covers(p)
        .into_iter()
        .filter_map(|(a, b)| gap_between(&p.component(a).hull, &p.component(b).hull))
        .filter_map(|(lo, hi)| {
            let overlap = std::cmp::min(&hi, &prev.hi) - std::cmp::max(&lo, &prev.lo);
            (overlap > Rational::default()).then_some((overlap, GapSpan { lo, hi }))
        })
        .max_by(|a, b| a.0.cmp(&b.0))
        .map(|(_, g)| g)
}

/// Growth signature of a trace: does every cover pair gain an intermediate component at each refinement?
pub fn density_signature(t: &RefinementTrace) -> Result<Signature, SignatureError> {
    let levels = t.levels();
    if levels.len() < 2 {
        return Err(SignatureError::TooFewLevels);
    }
    for (k, l) in levels.iter().enumerate() {
        if chain_order(&l.poset).is_err() {
            return Err(SignatureError::NonLinear(k));
        }
    }
    let mut dense_growth = true;
    let mut transitions = Vec::new();
    for k in 0..levels.len() - 1 {
        let (coarse, fine) = (&levels[k].poset, &levels[k + 1].poset);
        let covers = hasse_covers(coarse);
        let mut count = 0;
        for &(x, y) in &covers {
            let (Some(fx), Some(fy)) = (t.matching(k)[x], t.matching(k)[y]) else {
                return Err(SignatureError::BrokenMatching(k, k + 1));
            };
            if refined(coarse, fine, x, y, fx, fy) {
                count += 1;
            }
        }
        dense_growth &= count == covers.len();
        transitions.push(TransitionStat { covers: covers.len(), refined: count });
    }

    let mut persistent_pairs = Vec::new();
    'pairs: for (x0, y0) in hasse_covers(&levels[0].poset) {
        let first = &levels[0].poset;
        let Some((lo, hi)) = gap_between(&first.component(x0).hull, &first.component(y0).hull) else {
            continue;
        };
        let mut gaps = vec![GapSpan { lo, hi }];
        for l in &levels[1..] {
            let prev = gaps.last().expect("nonempty");
            if l.poset.components().iter().any(|z| prev.lo < z.hull.lo && z.hull.hi < prev.hi) {
                continue 'pairs;
            }
            match widest_overlap(&l.poset, prev) {
                Some(g) => gaps.push(g),
                None => continue 'pairs,
            }
        }
        persistent_pairs.push(PersistentPair {
            lower: first.component(x0).representative.clone(),
            upper: first.component(y0).representative.clone(),
            gaps,
        });
    }
    Ok(Signature { dense_growth, persistent_pairs, transitions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaingraph::{build_chain_graph, chain_components, EpsilonField, Mode};
    use crate::rational::rat;
    use crate::systems::SystemSpec;

    fn level(spec: &SystemSpec, n: usize) -> TraceLevel {
        let grid = Grid::unit(n);
        let eps = EpsilonField::auto(&grid);
        let g = build_chain_graph(spec, &grid, &eps, Mode::Enclosure).unwrap();
        TraceLevel { eps: grid.width() * rat(2, 1), grid, poset: chain_components(&g) }
    }

    #[test]
    fn single_level_is_rejected() {
        let t = RefinementTrace::new(vec![level(&SystemSpec::square(), 64)]).unwrap();
        assert_eq!(density_signature(&t), Err(SignatureError::TooFewLevels));
    }

    #[test]
    fn resolutions_must_increase() {
        let s = SystemSpec::square();
        assert!(RefinementTrace::new(vec![level(&s, 64), level(&s, 32)]).is_err());
    }

    #[test]
    fn square_pair_persists() {
        let s = SystemSpec::square();
        let t = RefinementTrace::new(vec![level(&s, 64), level(&s, 128), level(&s, 256)]).unwrap();
        let sig = density_signature(&t).unwrap();
        assert!(!sig.dense_growth);
        assert_eq!(sig.persistent_pairs.len(), 1);
    }
}
