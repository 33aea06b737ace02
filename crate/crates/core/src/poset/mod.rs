//! Order-theoretic analysis of chain-component posets.

mod refine;

use std::fmt::Write as _;

use fixedbitset::FixedBitSet;
use serde::Serialize;

pub use crate::chaingraph::{Component, ComponentPoset, PosetError};
pub use refine::{density_signature, PersistentPair, RefinementTrace, Signature, SignatureError, TraceLevel};

/// Largest poset size handled by exact isomorphism search.
pub const EXACT_ISO_LIMIT: usize = 64;

pub fn is_linear(p: &ComponentPoset) -> bool {
    (0..p.len()).all(|a| (a + 1..p.len()).all(|b| p.comparable(a, b)))
}

/// Components with nothing strictly below them.
pub fn minimal_elements(p: &ComponentPoset) -> Vec<usize> {
    (0..p.len()).filter(|&q| p.below(q).next().is_none()).collect()
}

/// Components with nothing strictly above them.
pub fn maximal_elements(p: &ComponentPoset) -> Vec<usize> {
    let mut has_above = vec![false; p.len()];
    for (a, _) in p.order_pairs() {
        has_above[a] = true;
    }
    (0..p.len()).filter(|&a| !has_above[a]).collect()
}

/// Pairs `(a, b)` with `a ≺ b` and nothing strictly between them, sorted.
pub fn hasse_covers(p: &ComponentPoset) -> Vec<(usize, usize)> {
    let n = p.len();
    let below: Vec<FixedBitSet> = (0..n)
        .map(|q| {
            let mut s = FixedBitSet::with_capacity(n);
            s.extend(p.below(q));
            s
        })
        .collect();
    let mut out = Vec::new();
    for q in 0..n {
        let mut indirect = FixedBitSet::with_capacity(n);
        for c in below[q].ones() {
            indirect.union_with(&below[c]);
        }
        for a in below[q].ones() {
            if !indirect.contains(a) {
                out.push((a, q));
            }
        }
    }
    out.sort_unstable();
    out
}

/// Same components, order reversed.
pub fn dual(p: &ComponentPoset) -> ComponentPoset {
    p.reversed()
}

/// Components of a linear poset from bottom to top.
pub fn chain_order(p: &ComponentPoset) -> Result<Vec<usize>, PosetError> {
    for a in 0..p.len() {
        for b in a + 1..p.len() {
            if !p.comparable(a, b) {
                return Err(PosetError::NotLinear(a, b));
            }
        }
    }
    let mut ids: Vec<usize> = (0..p.len()).collect();
    ids.sort_by_key(|&q| p.below(q).count());
    Ok(ids)
}

/// Order type of a finite chain, its number of elements.
pub fn linear_order_type(p: &ComponentPoset) -> Result<usize, PosetError> {
    chain_order(p).map(|c| c.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IsoVerdict {
    pub isomorphic: bool,
    /// False when the verdict rests on invariants only.
    pub exact: bool,
}

fn relation(p: &ComponentPoset) -> Vec<FixedBitSet> {
    let n = p.len();
    (0..n)
        .map(|q| {
            let mut s = FixedBitSet::with_capacity(n);
            s.extend(p.below(q));
            s
        })
        .collect()
}

/// `(number below, number above)` for every element.
fn degrees(rel: &[FixedBitSet]) -> Vec<(usize, usize)> {
    let mut d: Vec<(usize, usize)> = rel.iter().map(|s| (s.count_ones(..), 0)).collect();
    for s in rel {
        for a in s.ones() {
            d[a].1 += 1;
        }
    }
    d
}

/// Backtracking search for an order isomorphism between two strict relations.
struct IsoSearch<'a> {
    order: &'a [usize],
    rp: &'a [FixedBitSet],
    rq: &'a [FixedBitSet],
    dp: &'a [(usize, usize)],
    dq: &'a [(usize, usize)],
}

impl IsoSearch<'_> {
    fn extend(&self, k: usize, map: &mut Vec<usize>, used: &mut FixedBitSet) -> bool {
        let Some(&a) = self.order.get(k) else { return true };
        for b in 0..self.rq.len() {
            if used.contains(b) || self.dp[a] != self.dq[b] {
                continue;
            }
            let consistent = self.order[..k].iter().all(|&x| {
                let y = map[x];
                self.rp[a].contains(x) == self.rq[b].contains(y) && self.rp[x].contains(a) == self.rq[y].contains(b)
            });
            if !consistent {
                continue;
            }
            map[a] = b;
            used.insert(b);
            if self.extend(k + 1, map, used) {
                return true;
            }
            used.set(b, false);
        }
        false
    }
}

/// Whether an order-preserving bijection exists.
///
/// Exact for chains and for posets up to [`EXACT_ISO_LIMIT`] elements; larger
/// inputs are compared by size, degree multiset and chain/antichain profile
/// and flagged as inexact.
pub fn order_isomorphic(p: &ComponentPoset, q: &ComponentPoset) -> IsoVerdict {
    if p.len() != q.len() {
        return IsoVerdict { isomorphic: false, exact: true };
    }
    let (lp, lq) = (is_linear(p), is_linear(q));
    if lp || lq {
        return IsoVerdict { isomorphic: lp && lq, exact: true };
    }
    let (rp, rq) = (relation(p), relation(q));
    let (dp, dq) = (degrees(&rp), degrees(&rq));
    let mut sp = dp.clone();
    let mut sq = dq.clone();
    sp.sort_unstable();
    sq.sort_unstable();
    if sp != sq {
        return IsoVerdict { isomorphic: false, exact: true };
    }
    if p.len() > EXACT_ISO_LIMIT {
        let same = height(&rp) == height(&rq) && minimal_elements(p).len() == minimal_elements(q).len();
        return IsoVerdict { isomorphic: same, exact: false };
    }
    // most constrained elements first
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by_key(|&a| std::cmp::Reverse(dp[a].0 + dp[a].1));
    let mut map = vec![usize::MAX; p.len()];
    let mut used = FixedBitSet::with_capacity(q.len());
    let search = IsoSearch { order: &order, rp: &rp, rq: &rq, dp: &dp, dq: &dq };
    let found = search.extend(0, &mut map, &mut used);
    IsoVerdict { isomorphic: found, exact: true }
}

/// Length of the longest chain.
fn height(rel: &[FixedBitSet]) -> usize {
    let mut ids: Vec<usize> = (0..rel.len()).collect();
    ids.sort_by_key(|&q| rel[q].count_ones(..));
    let mut h = vec![1usize; rel.len()];
    for &q in &ids {
        h[q] = rel[q].ones().map(|a| h[a] + 1).max().unwrap_or(1);
    }
    h.into_iter().max().unwrap_or(0)
}

/// DOT graph of the Hasse diagram, edges pointing from larger to smaller.
pub fn to_dot(p: &ComponentPoset, name: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph \"{name}\" {{");
    for c in p.components() {
        let _ = writeln!(out, "  c{} [label=\"{}\"];", c.id, crate::rational::format_rational(&c.representative));
    }
    for (a, b) in hasse_covers(p) {
        let _ = writeln!(out, "  c{b} -> c{a};");
    }
    out.push_str("}\n");
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PosetReport {
    pub components: Vec<Component>,
    pub order_pairs: Vec<(usize, usize)>,
    pub minimal: Vec<usize>,
    pub maximal: Vec<usize>,
    pub linear: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order_type: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub signature: Option<Signature>,
}

impl PosetReport {
    pub fn new(p: &ComponentPoset) -> Self {
        let linear = is_linear(p);
        PosetReport {
            components: p.components().to_vec(),
            order_pairs: p.order_pairs(),
            minimal: minimal_elements(p),
            maximal: maximal_elements(p),
            linear,
            order_type: linear.then(|| p.len()),
            signature: None,
        }
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::rational::rat;
    use crate::systems::IntervalBlock;

    /// Poset on `n` components placed at `i/n` with the given strict relations.
    pub fn poset(n: usize, pairs: &[(usize, usize)]) -> ComponentPoset {
        let comps = (0..n)
            .map(|i| Component {
                id: i,
                cells: vec![i],
                representative: rat(2 * i as i64 + 1, 2 * n as i64),
                hull: IntervalBlock::new(rat(i as i64, n as i64), rat(i as i64 + 1, n as i64)),
            })
            .collect();
        ComponentPoset::from_pairs(comps, pairs).unwrap()
    }

    pub fn chain(n: usize) -> ComponentPoset {
        let pairs: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
        poset(n, &pairs)
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::{chain, poset};
    use super::*;

    #[test]
    fn linearity() {
        assert!(is_linear(&chain(2)));
        assert!(!is_linear(&poset(2, &[])));
        assert_eq!(linear_order_type(&chain(4)), Ok(4));
        assert!(linear_order_type(&poset(2, &[])).is_err());
    }

    #[test]
    fn extrema() {
        assert_eq!(minimal_elements(&chain(2)), vec![0]);
        assert_eq!(maximal_elements(&chain(2)), vec![1]);
        let anti = poset(3, &[]);
        assert_eq!(minimal_elements(&anti), vec![0, 1, 2]);
        assert_eq!(maximal_elements(&anti), vec![0, 1, 2]);
    }

    #[test]
    fn covers() {
        assert_eq!(hasse_covers(&chain(3)), vec![(0, 1), (1, 2)]);
        assert!(hasse_covers(&poset(2, &[])).is_empty());
        // diamond
        let d = poset(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]);
        assert_eq!(hasse_covers(&d), vec![(0, 1), (0, 2), (1, 3), (2, 3)]);
    }

    #[test]
    fn duality() {
        let c = chain(2);
        let d = dual(&c);
        assert!(d.precedes(1, 0));
        assert_eq!(dual(&d), c);
        assert_eq!(minimal_elements(&d), maximal_elements(&c));
        assert_eq!(hasse_covers(&dual(&chain(4))), vec![(1, 0), (2, 1), (3, 2)]);
    }

    #[test]
    fn isomorphism() {
        assert!(order_isomorphic(&chain(3), &chain(3)).isomorphic);
        assert!(!order_isomorphic(&chain(3), &poset(3, &[(0, 1)])).isomorphic);
        // V and Λ shapes have equal size but different degree profiles
        let v = poset(3, &[(0, 1), (0, 2)]);
        let lam = poset(3, &[(0, 2), (1, 2)]);
        assert!(!order_isomorphic(&v, &lam).isomorphic);
        let v2 = poset(3, &[(2, 0), (2, 1)]);
        let verdict = order_isomorphic(&v, &v2);
        assert!(verdict.isomorphic && verdict.exact);
    }

    #[test]
    fn isomorphism_needs_structure_not_degrees() {
        // N shape versus two disjoint 2-chains
        let n_shape = poset(4, &[(0, 2), (1, 2), (1, 3)]);
        let two_two = poset(4, &[(0, 2), (1, 3)]);
        assert!(!order_isomorphic(&n_shape, &two_two).isomorphic);
        let n_other = poset(4, &[(3, 1), (0, 1), (0, 2)]);
        assert!(order_isomorphic(&n_shape, &n_other).isomorphic);
    }

    #[test]
    fn dot_edges_point_down() {
        let dot = to_dot(&chain(2), "p");
        assert!(dot.contains("c1 -> c0;"));
        assert!(dot.contains("c0 [label=\"1/4\"]"));
    }
}
