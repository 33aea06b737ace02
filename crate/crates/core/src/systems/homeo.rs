use serde::Serialize;

use crate::rational::{format_rational, Rational};

use super::SystemError;

/// Piecewise-linear homeomorphism of a closed interval given by its breakpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlHomeo {
    points: Vec<(Rational, Rational)>,
    increasing: bool,
}

impl PlHomeo {
    pub fn new(points: Vec<(Rational, Rational)>) -> Result<Self, SystemError> {
        if points.len() < 2 {
            return Err(SystemError::InvalidHomeo("need at least two breakpoints".into()));
        }
        if !points.windows(2).all(|w| w[0].0 < w[1].0) {
            return Err(SystemError::InvalidHomeo("breakpoint x-values must strictly increase".into()));
        }
        let increasing = points[0].1 < points[1].1;
        let monotone = points
            .windows(2)
            .all(|w| if increasing { w[0].1 < w[1].1 } else { w[0].1 > w[1].1 });
        if !monotone {
            return Err(SystemError::InvalidHomeo("breakpoint y-values must be strictly monotone".into()));
        }
        Ok(PlHomeo { points, increasing })
    }

    pub fn identity(lo: Rational, hi: Rational) -> Self {
        PlHomeo { points: vec![(lo.clone(), lo), (hi.clone(), hi)], increasing: true }
    }

    pub fn points(&self) -> &[(Rational, Rational)] {
        &self.points
    }

    pub fn is_increasing(&self) -> bool {
        self.increasing
    }

    pub fn domain(&self) -> (&Rational, &Rational) {
        (&self.points[0].0, &self.points[self.points.len() - 1].0)
    }

    /// Image interval as `(min, max)`.
    pub fn range(&self) -> (&Rational, &Rational) {
        let a = &self.points[0].1;
        let b = &self.points[self.points.len() - 1].1;
        if self.increasing {
            (a, b)
        } else {
            (b, a)
        }
    }

    pub fn apply(&self, x: &Rational) -> Result<Rational, SystemError> {
        let (lo, hi) = self.domain();
        if x < lo || x > hi {
            return Err(SystemError::OutOfDomain(format_rational(x)));
        }
        let k = self.points.partition_point(|(px, _)| px <= x);
        if k == self.points.len() {
            return Ok(self.points[k - 1].1.clone());
        }
        let (x0, y0) = &self.points[k - 1];
        let (x1, y1) = &self.points[k];
        Ok(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
    }

    pub fn inverse(&self) -> PlHomeo {
        let mut points: Vec<(Rational, Rational)> =
            self.points.iter().map(|(x, y)| (y.clone(), x.clone())).collect();
        if !self.increasing {
            points.reverse();
        }
        PlHomeo { points, increasing: self.increasing }
    }
}

impl Serialize for PlHomeo {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let pts: Vec<(String, String)> = self
            .points
            .iter()
            .map(|(x, y)| (format_rational(x), format_rational(y)))
            .collect();
        pts.serialize(s)
    }
}

/// The inverse of `h`, checked exactly.
pub fn pl_inverse(h: &PlHomeo) -> PlHomeo {
    h.inverse()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn sample_h() -> PlHomeo {
        PlHomeo::new(vec![(int(0), int(0)), (rat(1, 3), rat(1, 2)), (int(1), int(1))]).unwrap()
    }

    #[test]
    fn inverse_swaps_coordinates() {
        let inv = sample_h().inverse();
        assert_eq!(inv.points(), &[(int(0), int(0)), (rat(1, 2), rat(1, 3)), (int(1), int(1))]);
        let id = PlHomeo::identity(int(0), int(1));
        assert_eq!(id.inverse(), id);
    }

    #[test]
    fn round_trip_at_quarter() {
        let h = sample_h();
        let y = h.apply(&rat(1, 4)).unwrap();
        assert_eq!(y, rat(3, 8));
        assert_eq!(h.inverse().apply(&y).unwrap(), rat(1, 4));
        assert_eq!(h.apply(&rat(1, 2)).unwrap(), rat(5, 8));
    }

    #[test]
    fn decreasing_homeo() {
        let h = PlHomeo::new(vec![(int(0), int(1)), (int(1), int(0))]).unwrap();
        assert!(!h.is_increasing());
        assert_eq!(h.apply(&rat(1, 4)).unwrap(), rat(3, 4));
        let inv = h.inverse();
        assert_eq!(inv.apply(&rat(3, 4)).unwrap(), rat(1, 4));
        assert_eq!(inv.domain(), (&int(0), &int(1)));
    }

    #[test]
    fn rejects_invalid() {
        assert!(PlHomeo::new(vec![(int(0), int(0))]).is_err());
        assert!(PlHomeo::new(vec![(int(0), int(0)), (rat(1, 2), int(1)), (int(1), rat(1, 2))]).is_err());
        assert!(PlHomeo::new(vec![(int(0), int(0)), (int(0), int(1))]).is_err());
        assert!(sample_h().apply(&int(2)).is_err());
    }
}
