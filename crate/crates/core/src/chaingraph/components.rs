use std::collections::VecDeque;

use fixedbitset::FixedBitSet;
use serde::Serialize;
use thiserror::Error;

use super::{condensation, ChainGraph};
use crate::rational::{serde_rational, Rational};
use crate::systems::IntervalBlock;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PosetError {
    #[error("component index {0} out of range")]
    OutOfRange(usize),
    #[error("relation contains a cycle through component {0}")]
    Cyclic(usize),
    #[error("poset is not linear: components {0} and {1} are incomparable")]
    NotLinear(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Component {
    pub id: usize,
    pub cells: Vec<usize>,
    /// Midpoint of the lowest member cell.
    #[serde(with = "serde_rational")]
    pub representative: Rational,
    /// Smallest interval containing every member cell.
    pub hull: IntervalBlock,
}

/// Chain components with the order `P ≺ Q` iff `Q` reaches `P`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentPoset {
    components: Vec<Component>,
    /// `below[q]` holds every `p` with `p ≺ q`.
    below: Vec<FixedBitSet>,
    recurrent: Vec<usize>,
}

impl ComponentPoset {
    /// Poset generated by the strict relations `(p, q)` meaning `p ≺ q`.
    pub fn from_pairs(components: Vec<Component>, pairs: &[(usize, usize)]) -> Result<Self, PosetError> {
        let n = components.len();
        let mut below = vec![FixedBitSet::with_capacity(n); n];
        for &(p, q) in pairs {
            if p >= n || q >= n {
                return Err(PosetError::OutOfRange(p.max(q)));
            }
            below[q].insert(p);
        }
        // Warshall closure
        for k in 0..n {
            let bk = below[k].clone();
            for row in below.iter_mut() {
                if row.contains(k) {
                    row.union_with(&bk);
                }
            }
        }
        if let Some(c) = (0..n).find(|&c| below[c].contains(c)) {
            return Err(PosetError::Cyclic(c));
        }
        let mut recurrent: Vec<usize> = components.iter().flat_map(|c| c.cells.iter().copied()).collect();
        recurrent.sort_unstable();
        Ok(ComponentPoset { components, below, recurrent })
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn component(&self, id: usize) -> &Component {
        &self.components[id]
    }

    pub fn recurrent_cells(&self) -> &[usize] {
        &self.recurrent
    }

    /// Strict order `p ≺ q`.
    pub fn precedes(&self, p: usize, q: usize) -> bool {
        self.below[q].contains(p)
    }

    pub fn comparable(&self, p: usize, q: usize) -> bool {
        self.precedes(p, q) || self.precedes(q, p)
    }

    pub fn below(&self, q: usize) -> impl Iterator<Item = usize> + '_ {
        self.below[q].ones()
    }

    /// All pairs `(p, q)` with `p ≺ q`, sorted.
    pub fn order_pairs(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> =
            (0..self.len()).flat_map(|q| self.below[q].ones().map(move |p| (p, q))).collect();
        out.sort_unstable();
        out
    }

    /// Same components with every relation reversed.
    pub fn reversed(&self) -> ComponentPoset {
        let n = self.len();
        let mut below = vec![FixedBitSet::with_capacity(n); n];
        for q in 0..n {
            for p in self.below[q].ones() {
                below[p].insert(q);
            }
        }
        ComponentPoset { components: self.components.clone(), below, recurrent: self.recurrent.clone() }
    }
}

/// Cells on a directed cycle, ascending.
pub fn recurrent_cells(g: &ChainGraph) -> Vec<usize> {
    let c = condensation(g);
    (0..g.len()).filter(|&i| c.cyclic[c.node_of[i]]).collect()
}

/// Recurrent strongly connected components ordered by reachability, ids ascending by lowest cell.
pub fn chain_components(g: &ChainGraph) -> ComponentPoset {
    let c = condensation(g);
    let grid = g.grid();

    let mut rec_nodes: Vec<usize> = (0..c.len()).filter(|&k| c.cyclic[k]).collect();
    rec_nodes.sort_by_key(|&k| c.members[k][0]);
    let mut comp_of_node = vec![usize::MAX; c.len()];
    for (id, &k) in rec_nodes.iter().enumerate() {
        comp_of_node[k] = id;
    }
    let m = rec_nodes.len();

    // node ids are sinks first, so every successor is finished before its predecessors
    let mut reach: Vec<FixedBitSet> = Vec::with_capacity(c.len());
    for k in 0..c.len() {
        let mut r = FixedBitSet::with_capacity(m);
        for &s in &c.succ[k] {
            r.union_with(&reach[s]);
            if comp_of_node[s] != usize::MAX {
                r.insert(comp_of_node[s]);
            }
        }
        reach.push(r);
    }

    let components: Vec<Component> = rec_nodes
        .iter()
        .enumerate()
        .map(|(id, &k)| {
            let cells = c.members[k].clone();
            let first = cells[0];
            let last = *cells.last().expect("nonempty");
            Component {
                id,
                representative: grid.midpoint(first),
                hull: IntervalBlock::new(grid.cell(first).lo, grid.cell(last).hi),
                cells,
            }
        })
        .collect();
    let below: Vec<FixedBitSet> = rec_nodes.iter().map(|&k| reach[k].clone()).collect();
    let recurrent = (0..g.len()).filter(|&i| c.cyclic[c.node_of[i]]).collect();
    ComponentPoset { components, below, recurrent }
}

/// For each cell, whether some recurrent cell is reachable from it.
pub fn reaches_recurrent(g: &ChainGraph) -> Vec<bool> {
    let n = g.len();
    let mut pred = vec![Vec::new(); n];
    for (i, j) in g.edges() {
        pred[j].push(i);
    }
    let mut seen = vec![false; n];
    let mut queue: VecDeque<usize> = recurrent_cells(g).into();
    for &i in &queue {
        seen[i] = true;
    }
    while let Some(j) = queue.pop_front() {
        for &i in &pred[j] {
            if !seen[i] {
                seen[i] = true;
                queue.push_back(i);
            }
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaingraph::{build_chain_graph, EpsilonField, Grid, Mode};
    use crate::rational::rat;
    use crate::systems::SystemSpec;

    fn graph(adj: Vec<Vec<usize>>) -> ChainGraph {
        let grid = Grid::unit(adj.len());
        let eps = EpsilonField::auto(&grid);
        ChainGraph::from_adjacency(grid, eps, Mode::Enclosure, adj)
    }

    #[test]
    fn identity_is_one_component() {
        let g = Grid::unit(32);
        let graph = build_chain_graph(&SystemSpec::identity(), &g, &EpsilonField::auto(&g), Mode::Enclosure).unwrap();
        assert_eq!(recurrent_cells(&graph).len(), 32);
        let p = chain_components(&graph);
        assert_eq!(p.len(), 1);
        assert!(p.order_pairs().is_empty());
        assert!(reaches_recurrent(&graph).into_iter().all(|b| b));
    }

    #[test]
    fn empty_and_isolated() {
        let g = graph(vec![vec![], vec![]]);
        assert!(recurrent_cells(&g).is_empty());
        assert_eq!(chain_components(&g).len(), 0);
        assert_eq!(reaches_recurrent(&g), vec![false, false]);

        let g = graph(vec![vec![0], vec![1]]);
        let p = chain_components(&g);
        assert_eq!(p.len(), 2);
        assert!(!p.comparable(0, 1));
    }

    #[test]
    fn order_passes_through_transients() {
        // 3 (loop) -> 2 -> 1 -> 0 (loop)
        let g = graph(vec![vec![0], vec![0], vec![1], vec![2, 3]]);
        let p = chain_components(&g);
        assert_eq!(p.len(), 2);
        assert!(p.precedes(0, 1));
        assert_eq!(p.component(1).representative, rat(7, 8));
        assert_eq!(reaches_recurrent(&g), vec![true; 4]);
    }

    #[test]
    fn from_pairs_closes_and_rejects_cycles() {
        let comps: Vec<Component> = (0..3)
            .map(|i| Component { id: i, cells: vec![i], representative: rat(1, 2), hull: IntervalBlock::point(rat(0, 1)) })
            .collect();
        let p = ComponentPoset::from_pairs(comps.clone(), &[(0, 1), (1, 2)]).unwrap();
        assert!(p.precedes(0, 2));
        assert_eq!(p.reversed().reversed(), p);
        assert!(ComponentPoset::from_pairs(comps.clone(), &[(0, 1), (1, 0)]).is_err());
        assert!(ComponentPoset::from_pairs(comps, &[(0, 5)]).is_err());
    }
}
