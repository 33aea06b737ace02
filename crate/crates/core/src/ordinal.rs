//! Countable ordinals below epsilon-zero in iterated Cantor normal form.
//!
//! An ordinal is a list of `(exponent, coefficient)` terms with strictly
//! decreasing exponents, each exponent itself an [`Ordinal`]. The empty list is 0.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrdinalError {
    #[error("{0} is not a limit ordinal")]
    NotLimit(Ordinal),
    #[error("{0} is not of the form w^g with g >= 1")]
    NotIndecomposable(Ordinal),
    #[error("fundamental sequence index must be positive")]
    ZeroIndex,
    #[error("invalid term list: {0}")]
    InvalidForm(String),
    #[error("ordinal syntax error at column {col}: {msg}")]
    Parse { col: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Ordinal {
    terms: Vec<(Ordinal, u64)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Kind {
    Zero,
    Successor(Ordinal),
    Limit,
}

impl Ordinal {
    pub fn zero() -> Self {
        Ordinal { terms: Vec::new() }
    }

    pub fn finite(n: u64) -> Self {
        if n == 0 {
            Self::zero()
        } else {
            Ordinal { terms: vec![(Self::zero(), n)] }
        }
    }

    pub fn one() -> Self {
        Self::finite(1)
    }

    pub fn omega() -> Self {
        Self::omega_pow(Self::one())
    }

    /// `w^e`.
    pub fn omega_pow(e: Ordinal) -> Self {
        Ordinal { terms: vec![(e, 1)] }
    }

    /// `w^e * c`.
    pub fn monomial(e: Ordinal, c: u64) -> Self {
        if c == 0 {
            Self::zero()
        } else {
            Ordinal { terms: vec![(e, c)] }
        }
    }

    /// Builds from raw terms, rejecting anything that is not in Cantor normal form.
    pub fn from_terms(terms: Vec<(Ordinal, u64)>) -> Result<Self, OrdinalError> {
        for (i, (_, c)) in terms.iter().enumerate() {
            if *c == 0 {
                return Err(OrdinalError::InvalidForm(format!("coefficient of term {i} is 0")));
            }
            if i > 0 && terms[i - 1].0 <= terms[i].0 {
                return Err(OrdinalError::InvalidForm(format!(
                    "exponents not strictly decreasing at term {i}"
                )));
            }
        }
        Ok(Ordinal { terms })
    }

    pub fn terms(&self) -> &[(Ordinal, u64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_finite(&self) -> Option<u64> {
        match self.terms.as_slice() {
            [] => Some(0),
            [(e, c)] if e.is_zero() => Some(*c),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.as_finite().is_some()
    }

    /// Number of nested exponent levels; 0 for finite ordinals.
    pub fn height(&self) -> usize {
        self.terms
            .first()
            .map(|(e, _)| if e.is_zero() { 0 } else { 1 + e.height() })
            .unwrap_or(0)
    }

    pub fn classify(&self) -> Kind {
        match self.terms.last() {
            None => Kind::Zero,
            Some((e, c)) if e.is_zero() => {
                let mut pred = self.terms.clone();
                if *c == 1 {
                    pred.pop();
                } else {
                    pred.last_mut().unwrap().1 = c - 1;
                }
                Kind::Successor(Ordinal { terms: pred })
            }
            Some(_) => Kind::Limit,
        }
    }

    pub fn is_limit(&self) -> bool {
        self.classify() == Kind::Limit
    }

    pub fn succ(&self) -> Ordinal {
        self.add(&Ordinal::one())
    }

    /// Ordinal sum `self + rhs`: terms of `self` below the leading exponent of `rhs` are absorbed.
    pub fn add(&self, rhs: &Ordinal) -> Ordinal {
        let Some((lead, lead_c)) = rhs.terms.first() else {
            return self.clone();
        };
        let mut terms: Vec<(Ordinal, u64)> = Vec::with_capacity(self.terms.len() + rhs.terms.len());
        for (e, c) in &self.terms {
            match e.cmp(lead) {
                Ordering::Greater => terms.push((e.clone(), *c)),
                Ordering::Equal => {
                    terms.push((e.clone(), c + lead_c));
                    terms.extend(rhs.terms[1..].iter().cloned());
                    return Ordinal { terms };
                }
                Ordering::Less => break,
            }
        }
        terms.extend(rhs.terms.iter().cloned());
        Ordinal { terms }
    }

    /// Splits a limit ordinal `l` into `(a, e)` with `a + w^e = l`, `1 <= a < l`.
    ///
    /// `e` is the last Cantor exponent. For a pure power `w^e` the smallest
    /// admissible `a` (namely 1) is returned.
    pub fn tail_split(&self) -> Result<(Ordinal, Ordinal), OrdinalError> {
        if !self.is_limit() {
            return Err(OrdinalError::NotLimit(self.clone()));
        }
        let (e, c) = self.terms.last().unwrap().clone();
        if self.terms.len() == 1 && c == 1 {
            return Ok((Ordinal::one(), e));
        }
        let mut rest = self.terms.clone();
        if c == 1 {
            rest.pop();
        } else {
            rest.last_mut().unwrap().1 = c - 1;
        }
        Ok((Ordinal { terms: rest }, e))
    }

    /// Fundamental sequence of an indecomposable `w^g` (`g >= 1`), Wainer style:
    /// `w^(g'+1)[j] = w^g' * j` and `w^g[j] = w^(g[j])` for limit `g`.
    pub fn fundamental(&self, j: u64) -> Result<Ordinal, OrdinalError> {
        if j == 0 {
            return Err(OrdinalError::ZeroIndex);
        }
        match self.terms.as_slice() {
            [(g, 1)] if !g.is_zero() => Ok(self.limit_step(j)),
            _ => Err(OrdinalError::NotIndecomposable(self.clone())),
        }
    }

    /// `self[j]` for any limit ordinal: `d + w^g [j] = d + (w^g)[j]`.
    fn limit_step(&self, j: u64) -> Ordinal {
        debug_assert!(self.is_limit());
        let (head, g) = self.tail_split_raw();
        let tail = match g.classify() {
            Kind::Successor(p) => Ordinal::monomial(p, j),
            Kind::Limit => Ordinal::omega_pow(g.limit_step(j)),
            Kind::Zero => unreachable!("limit ordinal has a positive last exponent"),
        };
        head.add(&tail)
    }

    /// Like [`tail_split`](Self::tail_split) but returns 0 as the head of a pure power.
    fn tail_split_raw(&self) -> (Ordinal, Ordinal) {
        let (e, c) = self.terms.last().unwrap().clone();
        let mut rest = self.terms.clone();
        if c == 1 {
            rest.pop();
        } else {
            rest.last_mut().unwrap().1 = c - 1;
        }
        (Ordinal { terms: rest }, e)
    }
}

/// Lexicographic comparison of term lists; valid because exponents strictly decrease.
pub fn compare(a: &Ordinal, b: &Ordinal) -> Ordering {
    for ((ea, ca), (eb, cb)) in a.terms.iter().zip(&b.terms) {
        let ord = compare(ea, eb).then(ca.cmp(cb));
        if ord != Ordering::Equal {
            return ord;
        }
    }
    a.terms.len().cmp(&b.terms.len())
}

impl Ord for Ordinal {
    fn cmp(&self, other: &Self) -> Ordering {
        compare(self, other)
    }
}

impl PartialOrd for Ordinal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<u64> for Ordinal {
    fn from(n: u64) -> Self {
        Ordinal::finite(n)
    }
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, "+")?;
            }
            if e.is_zero() {
                write!(f, "{c}")?;
                continue;
            }
            match e.as_finite() {
                Some(1) => write!(f, "w")?,
                Some(k) => write!(f, "w^{k}")?,
                None => write!(f, "w^({e})")?,
            }
            if *c > 1 {
                write!(f, "*{c}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for Ordinal {
    type Err = OrdinalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Parser { src: s.as_bytes(), pos: 0 };
        let o = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(o)
    }
}

// expr := term ('+' term)* ; term := int | 'w' ['^' exp] ['*' int] ; exp := int | 'w' | '(' expr ')'
struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> OrdinalError {
        OrdinalError::Parse { col: self.pos + 1, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Ordinal, OrdinalError> {
        let mut acc = self.term()?;
        while self.eat(b'+') {
            let t = self.term()?;
            acc = acc.add(&t);
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Ordinal, OrdinalError> {
        match self.peek() {
            Some(b'0'..=b'9') => Ok(Ordinal::finite(self.int()?)),
            Some(b'w') => {
                self.pos += 1;
                let e = if self.eat(b'^') { self.exponent()? } else { Ordinal::one() };
                let c = if self.eat(b'*') { self.int()? } else { 1 };
                Ok(Ordinal::monomial(e, c))
            }
            Some(_) => Err(self.error("expected a number or `w`")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn exponent(&mut self) -> Result<Ordinal, OrdinalError> {
        match self.peek() {
            Some(b'0'..=b'9') => Ok(Ordinal::finite(self.int()?)),
            Some(b'w') => {
                self.pos += 1;
                Ok(Ordinal::omega())
            }
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(e)
            }
            _ => Err(self.error("expected exponent")),
        }
    }

    fn int(&mut self) -> Result<u64, OrdinalError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected integer"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| OrdinalError::Parse { col: start + 1, msg: "integer too large".into() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o(s: &str) -> Ordinal {
        s.parse().unwrap()
    }

    #[test]
    fn comparison_examples() {
        assert_eq!(compare(&o("w"), &o("w")), Ordering::Equal);
        assert_eq!(compare(&o("w"), &o("w+1")), Ordering::Less);
        assert_eq!(compare(&o("w^2*2"), &o("w^2*2+w*3")), Ordering::Less);
        assert!(o("w^(w)") > o("w^5*100+w*3"));
    }

    #[test]
    fn addition_examples() {
        assert_eq!(o("1").add(&o("w")), o("w"));
        assert_eq!(o("w").add(&o("1")), o("w+1"));
        assert_eq!(o("w^2+w").add(&o("w^2")), o("w^2*2"));
        assert_eq!(o("w*2+3").add(&o("w+1")), o("w*3+1"));
    }

    #[test]
    fn classify_examples() {
        assert_eq!(o("0").classify(), Kind::Zero);
        assert_eq!(o("w+3").classify(), Kind::Successor(o("w+2")));
        assert_eq!(o("w+1").classify(), Kind::Successor(o("w")));
        assert_eq!(o("w^2").classify(), Kind::Limit);
    }

    #[test]
    fn tail_split_examples() {
        assert_eq!(o("w^2+w").tail_split().unwrap(), (o("w^2"), o("1")));
        assert_eq!(o("w").tail_split().unwrap(), (o("1"), o("1")));
        assert_eq!(o("w^2").tail_split().unwrap(), (o("1"), o("2")));
        assert_eq!(o("w*3").tail_split().unwrap(), (o("w*2"), o("1")));
        assert!(matches!(o("w+1").tail_split(), Err(OrdinalError::NotLimit(_))));
        assert!(o("0").tail_split().is_err());
    }

    #[test]
    fn fundamental_examples() {
        assert_eq!(o("w").fundamental(5).unwrap(), o("5"));
        assert_eq!(o("w^2").fundamental(3).unwrap(), o("w*3"));
        assert_eq!(o("w^(w)").fundamental(2).unwrap(), o("w^2"));
        assert_eq!(o("w^(w+1)").fundamental(2).unwrap(), o("w^(w)*2"));
        assert_eq!(o("w^(w*2)").fundamental(3).unwrap(), o("w^(w+3)"));
        assert_eq!(o("w").fundamental(0), Err(OrdinalError::ZeroIndex));
        assert!(matches!(o("w*2").fundamental(1), Err(OrdinalError::NotIndecomposable(_))));
        assert!(o("5").fundamental(1).is_err());
    }

    #[test]
    fn display_round_trip() {
        for s in ["0", "5", "w", "w^2*3+w+1", "w^(w)", "w^(w^2+1)*2+w^3+7", "w*4"] {
            assert_eq!(o(s).to_string(), s);
        }
        assert_eq!(o("w^w").to_string(), "w^(w)");
        assert_eq!(o("3+w").to_string(), "w");
    }

    #[test]
    fn parse_errors_are_positioned() {
        match "w^".parse::<Ordinal>() {
            Err(OrdinalError::Parse { col, .. }) => assert_eq!(col, 3),
            other => panic!("{other:?}"),
        }
        match "w+e0".parse::<Ordinal>() {
            Err(OrdinalError::Parse { col, .. }) => assert_eq!(col, 3),
            other => panic!("{other:?}"),
        }
        assert!("w^(2".parse::<Ordinal>().is_err());
    }

    #[test]
    fn from_terms_validates() {
        assert!(Ordinal::from_terms(vec![(Ordinal::zero(), 1), (Ordinal::one(), 1)]).is_err());
        assert!(Ordinal::from_terms(vec![(Ordinal::one(), 0)]).is_err());
        assert_eq!(Ordinal::from_terms(vec![(Ordinal::one(), 2), (Ordinal::zero(), 1)]).unwrap(), o("w*2+1"));
    }
}
