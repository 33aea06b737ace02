//! Discrete complete Lyapunov functions on chain graphs, valued in the middle-third Cantor set.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use num::{BigInt, Integer, One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::chaingraph::{chain_components, condensation, ChainGraph, Condensation};
use crate::rational::{format_rational, int, rat, Rational};
use crate::systems::SystemSpec;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LyapunovError {
    #[error("rank {rank} is not below total {total}")]
    RankOutOfRange { rank: usize, total: usize },
    #[error("assignment has {values} cell values but the graph has {cells} cells")]
    Mismatch { values: usize, cells: usize },
    #[error("at least one sample per cell is required")]
    NoSamples,
}

/// `rank` written with `⌈log2 total⌉` binary digits, each digit `b` read as ternary digit `2b`.
pub fn cantor_value(rank: usize, total: usize) -> Result<Rational, LyapunovError> {
    if rank >= total {
        return Err(LyapunovError::RankOutOfRange { rank, total });
    }
    let digits = digit_count(total);
    let mut v = Rational::zero();
    let mut place = Rational::one();
    for k in (0..digits).rev() {
        place /= int(3);
        if (rank >> k) & 1 == 1 {
            v += &place * int(2);
        }
    }
    Ok(v)
}

fn digit_count(total: usize) -> u32 {
    if total <= 1 {
        0
    } else {
        usize::BITS - (total - 1).leading_zeros()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LyapunovAssignment {
    #[serde(skip)]
    pub cell_values: Vec<Rational>,
    /// Value of each chain component, by component id.
    #[serde(serialize_with = "serialize_values")]
    pub component_values: Vec<Rational>,
    /// Number of condensation nodes ranked.
    pub total: usize,
}

fn serialize_values<S: serde::Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(format_rational))
}

/// Sinks-first topological order of the condensation, ties to the smallest member cell.
fn sink_first_order(c: &Condensation) -> Vec<usize> {
    let mut pred = vec![Vec::new(); c.len()];
    let mut out_deg: Vec<usize> = c.succ.iter().map(Vec::len).collect();
    for (k, s) in c.succ.iter().enumerate() {
        for &t in s {
            pred[t].push(k);
        }
    }
    let mut ready: BinaryHeap<Reverse<(usize, usize)>> =
        (0..c.len()).filter(|&k| out_deg[k] == 0).map(|k| Reverse((c.members[k][0], k))).collect();
    let mut order = Vec::with_capacity(c.len());
    while let Some(Reverse((_, k))) = ready.pop() {
        order.push(k);
        for &p in &pred[k] {
            out_deg[p] -= 1;
            if out_deg[p] == 0 {
                ready.push(Reverse((c.members[p][0], p)));
            }
        }
    }
    order
}

/// Ranks every condensation node sinks first and gives it the Cantor value of its rank.
pub fn synthesize(g: &ChainGraph) -> LyapunovAssignment {
    let c = condensation(g);
    let total = c.len();
    let mut node_value = vec![Rational::zero(); total];
    for (rank, k) in sink_first_order(&c).into_iter().enumerate() {
        node_value[k] = cantor_value(rank, total).expect("rank below total");
    }
    let cell_values: Vec<Rational> = c.node_of.iter().map(|&k| node_value[k].clone()).collect();
    let component_values = chain_components(g)
        .components()
        .iter()
        .map(|comp| cell_values[comp.cells[0]].clone())
        .collect();
    LyapunovAssignment { cell_values, component_values, total }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// First counterexample, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Certification {
    pub checks: Vec<Check>,
    /// Sampled steps that kept their value, and the largest strongly connected set they stayed in.
    pub equality_steps: usize,
    pub largest_equality_scc: usize,
}

impl Certification {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub const DESCENT: &str = "descent";
pub const CONSTANT_INJECTIVE: &str = "constant_and_injective";
pub const ORDER_COMPATIBLE: &str = "order_compatible";
pub const CANTOR_MEMBERSHIP: &str = "cantor_membership";

fn check(name: &'static str, witness: Option<String>) -> Check {
    Check { name, passed: witness.is_none(), witness }
}

/// Whether `v` in `[0,1]` is a finite ternary fraction with digits in {0,2}, at most `max_digits` long.
pub fn is_finite_cantor_point(v: &Rational, max_digits: u32) -> bool {
    if v.is_negative() || v > &Rational::one() {
        return false;
    }
    let three = BigInt::from(3);
    let mut den = v.denom().clone();
    let mut len = 0u32;
    while den > BigInt::one() {
        let (q, r) = den.div_rem(&three);
        if !r.is_zero() {
            return false;
        }
        den = q;
        len += 1;
    }
    if len > max_digits {
        return false;
    }
    // numerator over 3^len in base 3
    let scale = num::pow(three.clone(), len as usize);
    let mut n = v.numer() * (&scale / v.denom());
    if n == scale {
        return false;
    }
    while !n.is_zero() {
        let (q, r) = n.div_rem(&three);
        if r == BigInt::one() {
            return false;
        }
        n = q;
    }
    true
}

/// Sample points `lo + w·s/(k-1)` for `s < k`, or the midpoint when `k = 1`.
fn samples_in(lo: &Rational, w: &Rational, k: usize) -> Vec<Rational> {
    if k == 1 {
        return vec![lo + w * rat(1, 2)];
    }
    (0..k).map(|s| lo + w * rat(s as i64, k as i64 - 1)).collect()
}

/// Checks the assignment against the graph and the system it came from.
pub fn verify(a: &LyapunovAssignment, g: &ChainGraph, spec: &SystemSpec, samples: usize) -> Result<Certification, LyapunovError> {
    if a.cell_values.len() != g.len() {
        return Err(LyapunovError::Mismatch { values: a.cell_values.len(), cells: g.len() });
    }
    if samples == 0 {
        return Err(LyapunovError::NoSamples);
    }
    let c = condensation(g);
    let grid = g.grid();
    let v = &a.cell_values;

    // descent along sampled orbit steps; equality only inside one strongly connected set
    let per_cell: Vec<(Option<String>, usize, usize)> = (0..g.len())
        .into_par_iter()
        .map(|i| {
            let cell = grid.cell(i);
            let mut eq = 0;
            let mut largest = 0;
            for x in samples_in(&cell.lo, grid.width(), samples) {
                let fx = match spec.eval(&x) {
                    Ok(y) => y,
                    Err(e) => return (Some(format!("cell {i}: {e}")), eq, largest),
                };
                let j = grid.cell_of(&fx);
                let same = c.node_of[i] == c.node_of[j];
                if v[j] > v[i] || (v[j] == v[i] && !same) {
                    let w = format!(
                        "x={} in cell {i} (value {}) maps to cell {j} (value {})",
                        format_rational(&x),
                        format_rational(&v[i]),
                        format_rational(&v[j])
                    );
                    return (Some(w), eq, largest);
                }
                if v[j] == v[i] {
                    eq += 1;
                    largest = largest.max(c.members[c.node_of[i]].len());
                }
            }
            (None, eq, largest)
        })
        .collect();
    let descent = per_cell.iter().find_map(|(w, _, _)| w.clone());
    let equality_steps = per_cell.iter().map(|t| t.1).sum();
    let largest_equality_scc = per_cell.iter().map(|t| t.2).max().unwrap_or(0);

    let poset = chain_components(g);
    let comps = poset.components();
    let mut ci = None;
    'outer: for comp in comps {
        let base = &v[comp.cells[0]];
        if let Some(&bad) = comp.cells.iter().find(|&&i| &v[i] != base) {
            ci = Some(format!("component {} takes values {} and {}", comp.id, format_rational(base), format_rational(&v[bad])));
            break 'outer;
        }
    }
    if ci.is_none() {
        let mut seen: Vec<(&Rational, usize)> = comps.iter().map(|p| (&v[p.cells[0]], p.id)).collect();
        seen.sort();
        ci = seen
            .windows(2)
            .find(|w| w[0].0 == w[1].0)
            .map(|w| format!("components {} and {} share value {}", w[0].1, w[1].1, format_rational(w[0].0)));
    }

    let mut order = g
        .edges()
        .find(|&(i, j)| c.node_of[i] != c.node_of[j] && v[i] <= v[j])
        .map(|(i, j)| format!("edge {i} -> {j} does not decrease: {} to {}", format_rational(&v[i]), format_rational(&v[j])));
    if order.is_none() {
        order = poset
            .order_pairs()
            .into_iter()
            .find(|&(p, q)| v[comps[p].cells[0]] >= v[comps[q].cells[0]])
            .map(|(p, q)| format!("component {p} below component {q} but its value is not smaller"));
    }

    let digits = digit_count(a.total.max(1));
    let cantor = v
        .iter()
        .enumerate()
        .find(|(_, x)| !is_finite_cantor_point(x, digits))
        .map(|(i, x)| format!("cell {i} value {} is not a {digits}-digit ternary fraction with digits 0 and 2", format_rational(x)));

    Ok(Certification {
        checks: vec![
            check(DESCENT, descent),
            check(CONSTANT_INJECTIVE, ci),
            check(ORDER_COMPATIBLE, order),
            check(CANTOR_MEMBERSHIP, cantor),
        ],
        equality_steps,
        largest_equality_scc,
    })
}
