//! Finite ε-chain graphs on a uniform grid.

mod components;
mod scc;

use std::fmt::Write as _;

use num::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::rational::{ceil_i64, floor_i64, format_rational, int, interval_distance, rat, Rational};
use crate::systems::{IntervalBlock, SystemError, SystemSpec};

pub use components::{chain_components, reaches_recurrent, recurrent_cells, Component, ComponentPoset, PosetError};
pub use scc::{condensation, tarjan, Condensation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainGraphError {
    #[error("epsilon must be positive everywhere")]
    NonPositiveEps,
    #[error("epsilon breakpoints must have strictly increasing x-values and at least one entry")]
    BadBreakpoints,
    #[error("grid needs at least one cell and lo < hi")]
    BadGrid,
    #[error("grid [{0}, {1}] does not cover the system domain")]
    DomainMismatch(String, String),
    #[error(transparent)]
    System(#[from] SystemError),
}

/// `n` closed cells of equal width covering `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    lo: Rational,
    hi: Rational,
    n: usize,
    width: Rational,
}

impl Grid {
    pub fn new(lo: Rational, hi: Rational, n: usize) -> Result<Self, ChainGraphError> {
        if n == 0 || lo >= hi {
            return Err(ChainGraphError::BadGrid);
        }
        let width = (&hi - &lo) / int(n as i64);
        Ok(Grid { lo, hi, n, width })
    }

    pub fn unit(n: usize) -> Self {
        Grid::new(Rational::zero(), Rational::one(), n).expect("n > 0")
    }

    /// Closed core `[η, 1-η]` of the open unit interval with `η` equal to the cell width `1/(n+2)`.
    pub fn open_core(n: usize) -> Self {
        let eta = rat(1, n as i64 + 2);
        Grid::new(eta.clone(), Rational::one() - eta, n).expect("n > 0")
    }

    /// The standard grid for a system: the whole domain if closed, else the core.
    pub fn for_system(spec: &SystemSpec, n: usize) -> Self {
        let d = spec.domain();
        if d.is_closed() {
            Grid::new(d.lo.clone(), d.hi.clone(), n).expect("n > 0")
        } else {
            let eta = (&d.hi - &d.lo) / int(n as i64 + 2);
            Grid::new(&d.lo + &eta, &d.hi - &eta, n).expect("n > 0")
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn width(&self) -> &Rational {
        &self.width
    }

    pub fn cell(&self, i: usize) -> IntervalBlock {
        let a = &self.lo + &self.width * int(i as i64);
        let b = &a + &self.width;
        IntervalBlock::new(a, b)
    }

    pub fn midpoint(&self, i: usize) -> Rational {
        &self.lo + &self.width * rat(2 * i as i64 + 1, 2)
    }

    /// Cell containing `x`, clamped to the grid; shared endpoints go to the upper cell.
    pub fn cell_of(&self, x: &Rational) -> usize {
        let k = floor_i64(&((x - &self.lo) / &self.width));
        k.clamp(0, self.n as i64 - 1) as usize
    }

    /// Whether the grid is the closed domain itself or a core strictly inside an open one.
    pub fn covers(&self, spec: &SystemSpec) -> bool {
        let d = spec.domain();
        let lo_ok = if d.lo_closed { self.lo == d.lo } else { self.lo > d.lo };
        let hi_ok = if d.hi_closed { self.hi == d.hi } else { self.hi < d.hi };
        lo_ok && hi_ok
    }
}

/// Step tolerance, constant or a positive piecewise-linear function of position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EpsilonField {
    Constant(Rational),
    /// Linear interpolation between breakpoints, constant beyond the outer ones.
    PiecewiseLinear(Vec<(Rational, Rational)>),
}

impl EpsilonField {
    pub fn constant(e: Rational) -> Result<Self, ChainGraphError> {
        if e <= Rational::zero() {
            return Err(ChainGraphError::NonPositiveEps);
        }
        Ok(EpsilonField::Constant(e))
    }

    pub fn piecewise(points: Vec<(Rational, Rational)>) -> Result<Self, ChainGraphError> {
        if points.is_empty() || !points.windows(2).all(|w| w[0].0 < w[1].0) {
            return Err(ChainGraphError::BadBreakpoints);
        }
        if points.iter().any(|(_, e)| e <= &Rational::zero()) {
            return Err(ChainGraphError::NonPositiveEps);
        }
        Ok(EpsilonField::PiecewiseLinear(points))
    }

    /// The default `2w` for grid width `w`.
    pub fn auto(grid: &Grid) -> Self {
        EpsilonField::Constant(grid.width() * int(2))
    }

    pub fn at(&self, x: &Rational) -> Rational {
        match self {
            EpsilonField::Constant(e) => e.clone(),
            EpsilonField::PiecewiseLinear(pts) => {
                let k = pts.partition_point(|(px, _)| px <= x);
                if k == 0 {
                    return pts[0].1.clone();
                }
                if k == pts.len() {
                    return pts[k - 1].1.clone();
                }
                let (x0, e0) = &pts[k - 1];
                let (x1, e1) = &pts[k];
                e0 + (e1 - e0) * (x - x0) / (x1 - x0)
            }
        }
    }

    /// Supremum of the field over `[p, q]`.
    pub fn sup_over(&self, p: &Rational, q: &Rational) -> Rational {
        match self {
            EpsilonField::Constant(e) => e.clone(),
            EpsilonField::PiecewiseLinear(pts) => {
                let mut best = std::cmp::max(self.at(p), self.at(q));
                for (x, e) in pts {
                    if p < x && x < q && e > &best {
                        best = e.clone();
                    }
                }
                best
            }
        }
    }

    /// Smallest and largest values the field takes anywhere.
    pub fn bounds(&self) -> (Rational, Rational) {
        match self {
            EpsilonField::Constant(e) => (e.clone(), e.clone()),
            EpsilonField::PiecewiseLinear(pts) => {
                let lo = pts.iter().map(|(_, e)| e).min().expect("nonempty").clone();
                let hi = pts.iter().map(|(_, e)| e).max().expect("nonempty").clone();
                (lo, hi)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Exact image enclosures of whole cells.
    Enclosure,
    /// Images of cell endpoints and midpoint only; may miss edges.
    Sampled,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Enclosure => "enclosure",
            Mode::Sampled => "sampled",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainGraph {
    grid: Grid,
    eps: EpsilonField,
    mode: Mode,
    adjacency: Vec<Vec<usize>>,
    /// Cells whose own image meets them.
    touching: Vec<bool>,
}

impl ChainGraph {
    /// Graph with given successor lists; lists are sorted and deduplicated.
    pub fn from_adjacency(grid: Grid, eps: EpsilonField, mode: Mode, mut adjacency: Vec<Vec<usize>>) -> Self {
        assert_eq!(adjacency.len(), grid.len(), "one successor list per cell");
        for row in &mut adjacency {
            row.sort_unstable();
            row.dedup();
            assert!(row.last().is_none_or(|&j| j < grid.len()), "successor out of range");
        }
        let touching = adjacency.iter().enumerate().map(|(i, row)| row.binary_search(&i).is_ok()).collect();
        ChainGraph { grid, eps, mode, adjacency, touching }
    }

    /// Marks which cells have an image meeting the cell itself; by default every self-edge does.
    pub fn with_touching(mut self, touching: Vec<bool>) -> Self {
        assert_eq!(touching.len(), self.len());
        self.touching = touching;
        self
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn eps(&self) -> &EpsilonField {
        &self.eps
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn successors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.adjacency
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].binary_search(&j).is_ok()
    }

    /// Whether the image of cell `i` intersects cell `i`.
    pub fn touches_itself(&self, i: usize) -> bool {
        self.touching[i]
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(i, row)| row.iter().map(move |&j| (i, j)))
    }

    /// Whether every edge of `self` is an edge of `other`.
    pub fn is_subgraph_of(&self, other: &ChainGraph) -> bool {
        self.len() == other.len()
            && self.adjacency.iter().zip(&other.adjacency).all(|(a, b)| a.iter().all(|j| b.binary_search(j).is_ok()))
    }

    /// One line per cell, `i: j1 j2 ...`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, row) in self.adjacency.iter().enumerate() {
            let _ = write!(out, "{i}:");
            for j in row {
                let _ = write!(out, " {j}");
            }
            out.push('\n');
        }
        out
    }
}

/// Cells `j` with `dist([p, q], cell_j) < e`.
fn cells_near(grid: &Grid, p: &Rational, q: &Rational, e: &Rational) -> std::ops::RangeInclusive<usize> {
    let w = grid.width();
    let lo = floor_i64(&((p - e - grid.lo()) / w)).max(0);
    let hi = (ceil_i64(&((q + e - grid.lo()) / w)) - 1).min(grid.len() as i64 - 1);
    if lo > hi {
        #[allow(clippy::reversed_empty_ranges)]
        return 1..=0;
    }
    lo as usize..=hi as usize
}

fn cell_edges(spec: &SystemSpec, grid: &Grid, eps: &EpsilonField, mode: Mode, i: usize) -> Result<(Vec<usize>, bool), SystemError> {
    let cell = grid.cell(i);
    let pieces = match mode {
        Mode::Enclosure => spec.image_enclosure(&cell)?,
        Mode::Sampled => {
            let mid = grid.midpoint(i);
            [&cell.lo, &mid, &cell.hi]
                .into_iter()
                .map(|x| spec.eval(x).map(IntervalBlock::point))
                .collect::<Result<Vec<_>, _>>()?
        }
    };
    let touching = pieces.iter().any(|p| p.intersects(&cell));
    let mut out = Vec::new();
    for piece in &pieces {
        let e = eps.sup_over(&piece.lo, &piece.hi);
        for j in cells_near(grid, &piece.lo, &piece.hi, &e) {
            debug_assert!({
                let c = grid.cell(j);
                interval_distance(&piece.lo, &piece.hi, &c.lo, &c.hi) < e
            });
            out.push(j);
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok((out, touching))
}

/// Edge `i -> j` iff some piece of the image of cell `i` is closer to cell `j`
/// than the supremum of `eps` over that piece.
pub fn build_chain_graph(spec: &SystemSpec, grid: &Grid, eps: &EpsilonField, mode: Mode) -> Result<ChainGraph, ChainGraphError> {
    if !grid.covers(spec) {
        return Err(ChainGraphError::DomainMismatch(format_rational(grid.lo()), format_rational(grid.hi())));
    }
    let (adjacency, touching) = (0..grid.len())
        .into_par_iter()
        .map(|i| cell_edges(spec, grid, eps, mode, i))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .unzip();
    Ok(ChainGraph { grid: grid.clone(), eps: eps.clone(), mode, adjacency, touching })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ordinal::Ordinal;
    use crate::systems::Variant;

    #[test]
    fn grid_cells() {
        let g = Grid::unit(4);
        assert_eq!(g.cell(1), IntervalBlock::new(rat(1, 4), rat(1, 2)));
        assert_eq!(g.midpoint(3), rat(7, 8));
        assert_eq!(g.cell_of(&rat(1, 4)), 1);
        assert_eq!(g.cell_of(&int(1)), 3);
        let core = Grid::open_core(6);
        assert_eq!(core.lo(), &rat(1, 8));
        assert_eq!(core.width(), &rat(1, 8));
        assert!(Grid::new(int(1), int(0), 3).is_err());
    }

    #[test]
    fn identity_neighbors() {
        let g = Grid::unit(8);
        let graph = build_chain_graph(&SystemSpec::identity(), &g, &EpsilonField::constant(rat(1, 8)).unwrap(), Mode::Enclosure).unwrap();
        assert_eq!(graph.successors(0), &[0, 1]);
        assert_eq!(graph.successors(4), &[3, 4, 5]);
        assert_eq!(graph.successors(7), &[6, 7]);
    }

    #[test]
    fn square_top_cell() {
        let g = Grid::unit(4);
        let graph = build_chain_graph(&SystemSpec::square(), &g, &EpsilonField::constant(rat(1, 4)).unwrap(), Mode::Enclosure).unwrap();
        assert_eq!(graph.successors(3), &[1, 2, 3]);
    }

    #[test]
    fn constant_zero_map_edges() {
        // on [0,1/4] dense blocks send everything to 0
        let g = Grid::unit(16);
        let spec = SystemSpec::dense_blocks(0, Variant::WithMax);
        let eps = rat(3, 32);
        let graph = build_chain_graph(&spec, &g, &EpsilonField::constant(eps.clone()).unwrap(), Mode::Enclosure).unwrap();
        for i in 0..4 {
            let expected: Vec<usize> = (0..16).filter(|&j| rat(j, 16) < eps).map(|j| j as usize).collect();
            assert_eq!(graph.successors(i), expected.as_slice());
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(EpsilonField::constant(int(0)), Err(ChainGraphError::NonPositiveEps));
        assert!(EpsilonField::piecewise(vec![(int(0), int(1)), (int(0), int(2))]).is_err());
        let open = SystemSpec::dense_blocks(1, Variant::OpenInterval);
        let eps = EpsilonField::constant(rat(1, 8)).unwrap();
        assert!(matches!(build_chain_graph(&open, &Grid::unit(8), &eps, Mode::Enclosure), Err(ChainGraphError::DomainMismatch(..))));
        assert!(build_chain_graph(&open, &Grid::open_core(8), &eps, Mode::Enclosure).is_ok());
    }

    #[test]
    fn piecewise_field_values() {
        let f = EpsilonField::piecewise(vec![(int(0), rat(1, 4)), (rat(1, 2), rat(1, 2)), (int(1), rat(1, 8))]).unwrap();
        assert_eq!(f.at(&rat(1, 4)), rat(3, 8));
        assert_eq!(f.at(&int(2)), rat(1, 8));
        assert_eq!(f.sup_over(&rat(1, 4), &rat(3, 4)), rat(1, 2));
        assert_eq!(f.sup_over(&rat(3, 4), &int(1)), rat(5, 16));
        assert_eq!(f.bounds(), (rat(1, 8), rat(1, 2)));
    }

    #[test]
    fn sampled_inside_enclosure() {
        let g = Grid::unit(64);
        let eps = EpsilonField::auto(&g);
        for spec in [SystemSpec::ordinal_map(Ordinal::omega()), SystemSpec::dense_blocks(2, Variant::WithMax)] {
            let enc = build_chain_graph(&spec, &g, &eps, Mode::Enclosure).unwrap();
            let smp = build_chain_graph(&spec, &g, &eps, Mode::Sampled).unwrap();
            assert!(smp.is_subgraph_of(&enc));
        }
    }

    #[test]
    fn dump_format() {
        let g = Grid::unit(2);
        let graph = ChainGraph::from_adjacency(g, EpsilonField::auto(&Grid::unit(2)), Mode::Enclosure, vec![vec![1, 0], vec![]]);
        assert_eq!(graph.dump(), "0: 0 1\n1:\n");
    }
}
