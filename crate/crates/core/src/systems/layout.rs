//! Interval families: the dense block layouts and the removed middle thirds of the Cantor set.

use serde::Serialize;

use crate::rational::{rat, serde_rational, Rational};

/// Closed interval `[lo, hi]` with `lo <= hi`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct IntervalBlock {
    #[serde(with = "serde_rational")]
    pub lo: Rational,
    #[serde(with = "serde_rational")]
    pub hi: Rational,
}

impl IntervalBlock {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        debug_assert!(lo <= hi, "block with lo > hi");
        IntervalBlock { lo, hi }
    }

    pub fn point(x: Rational) -> Self {
        IntervalBlock { lo: x.clone(), hi: x }
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn intersects(&self, other: &IntervalBlock) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// Strict `<_P`: every point of `self` lies below every point of `other`.
    pub fn precedes(&self, other: &IntervalBlock) -> bool {
        self.hi < other.lo
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// `[0,1]∩Q`: outer blocks `[0,1/4]` and `[3/4,1]`.
    WithMax,
    /// `[0,1)∩Q`: a bottom block at 0 and no top block.
    NoMax,
    /// `(0,1)∩Q` on the open interval: blocks accumulate at both ends.
    OpenInterval,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::WithMax => "with_max",
            Variant::NoMax => "no_max",
            Variant::OpenInterval => "open_interval",
        }
    }
}

/// Closed middle half of the gap `(l, r)`.
fn middle_half(l: &Rational, r: &Rational) -> IntervalBlock {
    let q = (r - l) / rat(4, 1);
    IntervalBlock::new(l + &q, r - &q)
}

/// New blocks per construction level, level 0 first.
///
/// Each level inserts one block into every gap that the variant subdivides,
/// so the union of levels `0..=d` is the family `L_d`.
pub fn dense_block_levels(depth: u32, variant: Variant) -> Vec<Vec<IntervalBlock>> {
    let zero = rat(0, 1);
    let one = rat(1, 1);
    let first = match variant {
        Variant::WithMax => vec![
            IntervalBlock::new(zero.clone(), rat(1, 4)),
            IntervalBlock::new(rat(3, 4), one.clone()),
        ],
        Variant::NoMax => vec![IntervalBlock::new(zero.clone(), rat(1, 4))],
        Variant::OpenInterval => vec![middle_half(&zero, &one)],
    };
    let mut sorted = first.clone();
    let mut levels = vec![first];
    for _ in 0..depth {
        let mut fresh = Vec::with_capacity(sorted.len() + 1);
        if variant == Variant::OpenInterval {
            fresh.push(middle_half(&zero, &sorted[0].lo));
        }
        for pair in sorted.windows(2) {
            fresh.push(middle_half(&pair[0].hi, &pair[1].lo));
        }
        if matches!(variant, Variant::NoMax | Variant::OpenInterval) {
            fresh.push(middle_half(&sorted.last().unwrap().hi, &one));
        }
        sorted.extend(fresh.iter().cloned());
        sorted.sort_by(|a, b| a.lo.cmp(&b.lo));
        levels.push(fresh);
    }
    levels
}

/// The family `L_depth` sorted by `<_P`.
pub fn dense_blocks(depth: u32, variant: Variant) -> Vec<IntervalBlock> {
    let mut all: Vec<IntervalBlock> = dense_block_levels(depth, variant).into_iter().flatten().collect();
    all.sort_by(|a, b| a.lo.cmp(&b.lo));
    all
}

/// Open middle thirds removed at construction levels `1..=depth`, sorted, as `(lo, hi)` pairs.
pub fn cantor_gaps(depth: u32) -> Vec<IntervalBlock> {
    let mut kept = vec![IntervalBlock::new(rat(0, 1), rat(1, 1))];
    let mut gaps = Vec::new();
    for _ in 0..depth {
        let mut next = Vec::with_capacity(kept.len() * 2);
        for b in &kept {
            let third = b.width() / rat(3, 1);
            let l = &b.lo + &third;
            let r = &b.hi - &third;
            next.push(IntervalBlock::new(b.lo.clone(), l.clone()));
            next.push(IntervalBlock::new(r.clone(), b.hi.clone()));
            gaps.push(IntervalBlock::new(l, r));
        }
        kept = next;
    }
    gaps.sort_by(|a, b| a.lo.cmp(&b.lo));
    gaps
}

/// Lebesgue measure of `[0,1]` minus the union of `blocks` (or of the open interval for that variant).
pub fn gap_measure(blocks: &[IntervalBlock]) -> Rational {
    let covered: Rational = blocks.iter().map(IntervalBlock::width).sum();
    rat(1, 1) - covered
}
