//! Exact self-maps of a real interval.
//!
//! Every map here is built from affine rescalings, squares, the quadratic
//! successor piece and piecewise-constant block rules, so evaluation on a
//! rational point stays rational.

pub mod homeo;
pub mod layout;
pub mod ordinal_map;

use num::{One, Zero};
use thiserror::Error;

use crate::ordinal::Ordinal;
use crate::rational::{ceil_i64, floor_i64, format_rational, int, rat, Rational};

pub use homeo::{pl_inverse, PlHomeo};
pub use layout::{IntervalBlock, Variant};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SystemError {
    #[error("point {0} lies outside the domain")]
    OutOfDomain(String),
    #[error("cell [{0}, {1}] is not inside the domain")]
    CellOutOfDomain(String, String),
    #[error("invalid homeomorphism: {0}")]
    InvalidHomeo(String),
    #[error("homeomorphism is not a bijection of the system domain")]
    NotBijective,
    #[error("block families exist only for dense-block and Cantor systems")]
    NoBlocks,
    #[error("requested depth {requested} exceeds system depth {available}")]
    DepthTooLarge { requested: u32, available: u32 },
    #[error("depth must be at least 1")]
    ZeroDepth,
}

/// Interval `lo..hi`; the flags say whether each end belongs to the domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Domain {
    pub lo: Rational,
    pub hi: Rational,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Domain {
    pub fn unit() -> Self {
        Domain { lo: Rational::zero(), hi: Rational::one(), lo_closed: true, hi_closed: true }
    }

    pub fn open_unit() -> Self {
        Domain { lo_closed: false, hi_closed: false, ..Self::unit() }
    }

    pub fn is_closed(&self) -> bool {
        self.lo_closed && self.hi_closed
    }

    pub fn contains(&self, x: &Rational) -> bool {
        let above = if self.lo_closed { x >= &self.lo } else { x > &self.lo };
        let below = if self.hi_closed { x <= &self.hi } else { x < &self.hi };
        above && below
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Body {
    Identity,
    Square,
    OrdinalMap(Ordinal),
    CantorExample { depth: u32, gaps: Vec<IntervalBlock> },
    DenseBlocks { depth: u32, variant: Variant, blocks: Vec<IntervalBlock> },
    Conjugated { inner: Box<SystemSpec>, h: PlHomeo, h_inv: PlHomeo },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemSpec {
    domain: Domain,
    body: Body,
}

impl SystemSpec {
    pub fn identity() -> Self {
        SystemSpec { domain: Domain::unit(), body: Body::Identity }
    }

    pub fn square() -> Self {
        SystemSpec { domain: Domain::unit(), body: Body::Square }
    }

    /// `f_λ`; `λ = 0` and `λ = 1` give the identity and the square.
    pub fn ordinal_map(lambda: Ordinal) -> Self {
        let body = match lambda.as_finite() {
            Some(0) => Body::Identity,
            Some(1) => Body::Square,
            _ => Body::OrdinalMap(lambda),
        };
        SystemSpec { domain: Domain::unit(), body }
    }

    pub fn cantor_example(depth: u32) -> Result<Self, SystemError> {
        if depth == 0 {
            return Err(SystemError::ZeroDepth);
        }
        Ok(SystemSpec {
            domain: Domain::unit(),
            body: Body::CantorExample { depth, gaps: layout::cantor_gaps(depth) },
        })
    }

    pub fn dense_blocks(depth: u32, variant: Variant) -> Self {
        let domain = match variant {
            Variant::OpenInterval => Domain::open_unit(),
            _ => Domain::unit(),
        };
        SystemSpec {
            domain,
            body: Body::DenseBlocks { depth, variant, blocks: layout::dense_blocks(depth, variant) },
        }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn body(&self) -> &Body {
        &self.body
    }

    /// Short machine name used in reports.
    pub fn kind_name(&self) -> &'static str {
        match &self.body {
            Body::Identity => "identity",
            Body::Square => "square",
            Body::OrdinalMap(_) => "ordinal",
            Body::CantorExample { .. } => "cantor",
            Body::DenseBlocks { .. } => "dense_blocks",
            Body::Conjugated { .. } => "conjugated",
        }
    }

    /// Whether the map is continuous and non-decreasing, so `f([x,y]) = [f(x), f(y)]`.
    pub fn is_continuous_increasing(&self) -> bool {
        match &self.body {
            Body::Identity | Body::Square | Body::OrdinalMap(_) | Body::CantorExample { .. } => true,
            Body::DenseBlocks { .. } => false,
            Body::Conjugated { inner, .. } => inner.is_continuous_increasing(),
        }
    }

    pub fn eval(&self, x: &Rational) -> Result<Rational, SystemError> {
        if !self.domain.contains(x) {
            return Err(SystemError::OutOfDomain(format_rational(x)));
        }
        Ok(self.eval_unchecked(x))
    }

    fn eval_unchecked(&self, x: &Rational) -> Rational {
        match &self.body {
            Body::Identity => x.clone(),
            Body::Square => x * x,
            Body::OrdinalMap(l) => ordinal_map::eval(l, x),
            Body::CantorExample { gaps, .. } => {
                let k = gaps.partition_point(|g| &g.lo < x);
                match k.checked_sub(1).map(|i| &gaps[i]) {
                    Some(g) if x < &g.hi => x - (x - &g.lo) * (&g.hi - x),
                    _ => x.clone(),
                }
            }
            Body::DenseBlocks { variant, blocks, .. } => match containing_block(blocks, x) {
                Some(b) => b.lo.clone(),
                None => complement_value(*variant, x),
            },
            Body::Conjugated { inner, h, h_inv } => {
                let pre = h_inv.apply(x).expect("domain checked");
                h.apply(&inner.eval_unchecked(&pre)).expect("inner map stays in domain")
            }
        }
    }

    /// Closure of `f(cell)` as a sorted union of disjoint closed intervals.
    pub fn image_enclosure(&self, cell: &IntervalBlock) -> Result<Vec<IntervalBlock>, SystemError> {
        if !self.domain.contains(&cell.lo) || !self.domain.contains(&cell.hi) {
            return Err(SystemError::CellOutOfDomain(format_rational(&cell.lo), format_rational(&cell.hi)));
        }
        let mut pieces = self.enclosure_pieces(cell);
        normalize(&mut pieces);
        Ok(pieces)
    }

    fn enclosure_pieces(&self, cell: &IntervalBlock) -> Vec<IntervalBlock> {
        if self.is_continuous_increasing() {
            return vec![IntervalBlock::new(self.eval_unchecked(&cell.lo), self.eval_unchecked(&cell.hi))];
        }
        match &self.body {
            Body::DenseBlocks { variant, blocks, .. } => dense_enclosure(*variant, blocks, cell),
            Body::Conjugated { inner, h, h_inv } => {
                let a = h_inv.apply(&cell.lo).expect("domain checked");
                let b = h_inv.apply(&cell.hi).expect("domain checked");
                let pre = if a <= b { IntervalBlock::new(a, b) } else { IntervalBlock::new(b, a) };
                inner
                    .enclosure_pieces(&pre)
                    .into_iter()
                    .map(|p| {
                        let u = h.apply(&p.lo).expect("image in domain");
                        let v = h.apply(&p.hi).expect("image in domain");
                        if u <= v {
                            IntervalBlock::new(u, v)
                        } else {
                            IntervalBlock::new(v, u)
                        }
                    })
                    .collect()
            }
            _ => unreachable!("continuous bodies handled above"),
        }
    }

    /// The block family `L_depth` (dense blocks) or removed gaps up to `depth` (Cantor).
    pub fn blocks_of(&self, depth: u32) -> Result<Vec<IntervalBlock>, SystemError> {
        match &self.body {
            Body::DenseBlocks { depth: d, variant, .. } => {
                if depth > *d {
                    return Err(SystemError::DepthTooLarge { requested: depth, available: *d });
                }
                Ok(layout::dense_blocks(depth, *variant))
            }
            Body::CantorExample { depth: d, .. } => {
                if depth > *d {
                    return Err(SystemError::DepthTooLarge { requested: depth, available: *d });
                }
                Ok(layout::cantor_gaps(depth))
            }
            _ => Err(SystemError::NoBlocks),
        }
    }
}

/// `g = h ∘ f ∘ h⁻¹`, the system conjugate to `spec` through `h`.
pub fn conjugate(spec: &SystemSpec, h: &PlHomeo) -> Result<SystemSpec, SystemError> {
    let d = spec.domain();
    let (x0, x1) = h.domain();
    let (y0, y1) = h.range();
    if x0 != &d.lo || x1 != &d.hi || y0 != &d.lo || y1 != &d.hi {
        return Err(SystemError::NotBijective);
    }
    let domain = if h.is_increasing() {
        d.clone()
    } else {
        Domain { lo_closed: d.hi_closed, hi_closed: d.lo_closed, ..d.clone() }
    };
    Ok(SystemSpec {
        domain,
        body: Body::Conjugated { inner: Box::new(spec.clone()), h: h.clone(), h_inv: h.inverse() },
    })
}

fn containing_block<'a>(blocks: &'a [IntervalBlock], x: &Rational) -> Option<&'a IntervalBlock> {
    let k = blocks.partition_point(|b| &b.lo <= x);
    k.checked_sub(1).map(|i| &blocks[i]).filter(|b| x <= &b.hi)
}

/// Value off the blocks: 0, or `1/(m+2)` on `[1/(m+1), 1/m)` for the open-interval variant.
fn complement_value(variant: Variant, x: &Rational) -> Rational {
    match variant {
        Variant::WithMax | Variant::NoMax => Rational::zero(),
        Variant::OpenInterval => {
            let m = floor_i64(&x.recip());
            rat(1, m + 2)
        }
    }
}

/// Sub-interval of a cell not covered by blocks; `lo_in` says whether `lo` belongs to it.
struct Stretch {
    lo: Rational,
    lo_in: bool,
    hi: Rational,
}

fn dense_enclosure(variant: Variant, blocks: &[IntervalBlock], cell: &IntervalBlock) -> Vec<IntervalBlock> {
    let mut out = Vec::new();
    let mut stretches = Vec::new();
    let mut cursor = cell.lo.clone();
    let mut cursor_in = true;
    let start = blocks.partition_point(|b| b.hi < cell.lo);
    for b in blocks[start..].iter().take_while(|b| b.lo <= cell.hi) {
        out.push(IntervalBlock::point(b.lo.clone()));
        if cursor < b.lo {
            stretches.push(Stretch { lo: cursor.clone(), lo_in: cursor_in, hi: b.lo.clone() });
        }
        if b.hi > cursor {
            cursor = b.hi.clone();
            cursor_in = false;
        }
    }
    if cursor < cell.hi || (cursor == cell.hi && cursor_in) {
        stretches.push(Stretch { lo: cursor, lo_in: cursor_in, hi: cell.hi.clone() });
    }
    for s in stretches {
        match variant {
            Variant::WithMax | Variant::NoMax => out.push(IntervalBlock::point(Rational::zero())),
            Variant::OpenInterval => {
                // x in [1/(m+1), 1/m) maps to 1/(m+2); collect every m met on the stretch
                let m_min = floor_i64(&s.hi.recip());
                let inv_lo = s.lo.recip();
                let m_max = if s.lo_in { floor_i64(&inv_lo) } else { ceil_i64(&inv_lo) - 1 };
                for m in m_min..=m_max.max(m_min) {
                    out.push(IntervalBlock::point(rat(1, m + 2)));
                }
            }
        }
    }
    out
}

/// Sorts pieces and merges the ones that overlap.
fn normalize(pieces: &mut Vec<IntervalBlock>) {
    pieces.sort_by(|a, b| a.lo.cmp(&b.lo).then(a.hi.cmp(&b.hi)));
    let mut merged: Vec<IntervalBlock> = Vec::with_capacity(pieces.len());
    for p in pieces.drain(..) {
        match merged.last_mut() {
            Some(last) if p.lo <= last.hi => {
                if p.hi > last.hi {
                    last.hi = p.hi;
                }
            }
            _ => merged.push(p),
        }
    }
    *pieces = merged;
}

/// Fixed points of the system that anchor the predicted chain components,
/// refined down to recursion blocks of width `min_width`.
pub fn anchor_points(spec: &SystemSpec, min_width: &Rational) -> Vec<Rational> {
    let mut pts = match &spec.body {
        Body::Identity => vec![spec.domain.lo.clone()],
        Body::Square => vec![int(0), int(1)],
        Body::OrdinalMap(l) => ordinal_map::fixed_points(l, min_width),
        Body::CantorExample { gaps, .. } => {
            let mut v = vec![int(0), int(1)];
            for g in gaps {
                v.push(g.lo.clone());
                v.push(g.hi.clone());
            }
            v
        }
        Body::DenseBlocks { blocks, .. } => blocks.iter().map(|b| b.lo.clone()).collect(),
        Body::Conjugated { inner, h, .. } => anchor_points(inner, min_width)
            .iter()
            .map(|p| h.apply(p).expect("anchor in domain"))
            .collect(),
    };
    pts.sort();
    pts.dedup();
    pts
}
