//! Canonical half-open rational interval unions and exact piecewise-affine
//! partial bijections.
//!
//! All sets handled by this crate are finite unions of intervals `[lo, hi)`
//! with rational endpoints, kept in a canonical form: parts sorted by `lo`,
//! pairwise disjoint, and with no two adjacent parts sharing an endpoint.
//! Two unions describe the same set of rationals exactly when they are
//! structurally equal, so set equality is plain `==`.

use std::fmt;

use num::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::{midpoint, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot pick a point from the empty set")]
pub struct EmptySetError;

/// The interval `[lo, hi)`: closed on the left, open on the right.
///
/// Empty intervals are never materialized; `lo < hi` always holds.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfOpenInterval {
    lo: Rational,
    hi: Rational,
}

impl HalfOpenInterval {
    /// Panics unless `lo < hi`.
    pub fn new(lo: Rational, hi: Rational) -> Self {
        assert!(lo < hi, "degenerate interval [{lo}, {hi})");
        Self { lo, hi }
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn length(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x < &self.hi
    }

    pub fn midpoint(&self) -> Rational {
        midpoint(&self.lo, &self.hi)
    }

    /// `[max(lo), min(hi))` when nonempty.
    pub fn intersect(&self, other: &Self) -> Option<Self> {
        let lo = self.lo.clone().max(other.lo.clone());
        let hi = self.hi.clone().min(other.hi.clone());
        (lo < hi).then(|| Self::new(lo, hi))
    }

    /// Splits into `n` half-open subintervals of equal width, left to right.
    pub fn split_equal(&self, n: usize) -> Vec<Self> {
        assert!(n > 0, "cannot split into zero parts");
        let width = self.length() / Rational::from_integer(n.into());
        (0..n)
            .map(|k| {
                let lo = &self.lo + &width * Rational::from_integer(k.into());
                let hi = &lo + &width;
                Self::new(lo, hi)
            })
            .collect()
    }
}

impl fmt::Display for HalfOpenInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.lo, self.hi)
    }
}

/// Canonical finite union of half-open intervals. May be empty.
#[derive(Debug, Clone, PartialEq, Eq, Default, Hash)]
pub struct IntervalUnion {
    parts: Vec<HalfOpenInterval>,
}

impl IntervalUnion {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Canonicalizes an arbitrary list of intervals: sorts by `lo` and merges
    /// every overlapping or adjacent pair.
    pub fn from_parts(mut parts: Vec<HalfOpenInterval>) -> Self {
        parts.sort();
        let mut merged: Vec<HalfOpenInterval> = Vec::with_capacity(parts.len());
        for part in parts {
            match merged.last_mut() {
                Some(last) if part.lo <= last.hi => {
                    if part.hi > last.hi {
                        last.hi = part.hi;
                    }
                }
                _ => merged.push(part),
            }
        }
        Self { parts: merged }
    }

    pub fn interval(lo: Rational, hi: Rational) -> Self {
        Self {
            parts: vec![HalfOpenInterval::new(lo, hi)],
        }
    }

    pub fn parts(&self) -> &[HalfOpenInterval] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Membership by binary search on the canonical parts.
    pub fn contains(&self, x: &Rational) -> bool {
        let idx = self.parts.partition_point(|p| p.lo() <= x);
        idx > 0 && x < self.parts[idx - 1].hi()
    }

    /// Sum of part lengths.
    pub fn total_length(&self) -> Rational {
        self.parts
            .iter()
            .fold(Rational::zero(), |acc, p| acc + p.length())
    }

    /// Deterministic witness extraction: the `lo` of the first part.
    pub fn pick_point(&self) -> Result<Rational, EmptySetError> {
        self.parts
            .first()
            .map(|p| p.lo().clone())
            .ok_or(EmptySetError)
    }

    pub fn intersect(&self, other: &Self) -> Self {
        boolean_op(self, other, |a, b| a && b)
    }

    pub fn union(&self, other: &Self) -> Self {
        boolean_op(self, other, |a, b| a || b)
    }

    /// Set difference `self \ other`.
    pub fn difference(&self, other: &Self) -> Self {
        boolean_op(self, other, |a, b| a && !b)
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.difference(other).is_empty()
    }
}

impl From<HalfOpenInterval> for IntervalUnion {
    fn from(part: HalfOpenInterval) -> Self {
        Self { parts: vec![part] }
    }
}

impl fmt::Display for IntervalUnion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return write!(f, "empty");
        }
        for (i, part) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, " u ")?;
            }
            write!(f, "{part}")?;
        }
        Ok(())
    }
}

/// Endpoint-sweep evaluation of a pointwise boolean combination.
///
/// Both operands are constant between consecutive endpoints, so membership of
/// each elementary cell is decided at its midpoint.
fn boolean_op(a: &IntervalUnion, b: &IntervalUnion, keep: impl Fn(bool, bool) -> bool) -> IntervalUnion {
    let mut cuts: Vec<Rational> = Vec::new();
    for part in a.parts().iter().chain(b.parts()) {
        cuts.push(part.lo().clone());
        cuts.push(part.hi().clone());
    }
    cuts.sort();
    cuts.dedup();
    let mut parts = Vec::new();
    for pair in cuts.windows(2) {
        let mid = midpoint(&pair[0], &pair[1]);
        if keep(a.contains(&mid), b.contains(&mid)) {
            parts.push(HalfOpenInterval::new(pair[0].clone(), pair[1].clone()));
        }
    }
    IntervalUnion::from_parts(parts)
}

/// An increasing affine map restricted to a half-open domain.
///
/// Maps `[lo, hi)` bijectively onto `[slope*lo + offset, slope*hi + offset)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AffinePiece {
    domain: HalfOpenInterval,
    slope: Rational,
    offset: Rational,
}

impl AffinePiece {
    /// Panics unless `slope > 0` (all pieces are orientation-preserving).
    pub fn new(domain: HalfOpenInterval, slope: Rational, offset: Rational) -> Self {
        assert!(slope.is_positive(), "piece slope must be positive");
        Self { domain, slope, offset }
    }

    /// The unique increasing affine bijection `from -> onto`.
    pub fn mapping(from: HalfOpenInterval, onto: &HalfOpenInterval) -> Self {
        let slope = onto.length() / from.length();
        let offset = onto.lo() - &slope * from.lo();
        Self::new(from, slope, offset)
    }

    pub fn domain(&self) -> &HalfOpenInterval {
        &self.domain
    }

    pub fn slope(&self) -> &Rational {
        &self.slope
    }

    pub fn offset(&self) -> &Rational {
        &self.offset
    }

    pub fn image(&self) -> HalfOpenInterval {
        HalfOpenInterval::new(self.map_unchecked(self.domain.lo()), self.map_unchecked(self.domain.hi()))
    }

    /// `slope*x + offset` without the domain check.
    pub fn map_unchecked(&self, x: &Rational) -> Rational {
        &self.slope * x + &self.offset
    }

    pub fn apply(&self, x: &Rational) -> Option<Rational> {
        self.domain.contains(x).then(|| self.map_unchecked(x))
    }

    pub fn invert(&self) -> Self {
        let slope = Rational::one() / &self.slope;
        let offset = -&self.offset / &self.slope;
        Self::new(self.image(), slope, offset)
    }
}

impl fmt::Display for AffinePiece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.domain, self.slope, self.offset)
    }
}

/// An exact piecewise-affine partial bijection: piece domains pairwise
/// disjoint and sorted, piece images pairwise disjoint.
#[derive(Debug, Clone, PartialEq, Eq, Default, Hash)]
pub struct PiecewiseLinearMap {
    pieces: Vec<AffinePiece>,
}

impl PiecewiseLinearMap {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Canonicalizes and validates a list of pieces.
    ///
    /// Adjacent pieces that continue the same affine map are merged, so equal
    /// maps have equal representations. Panics if domains or images overlap
    /// (the map would not be a partial bijection).
    pub fn new(mut pieces: Vec<AffinePiece>) -> Self {
        pieces.sort_by(|a, b| a.domain.lo.cmp(&b.domain.lo));
        let mut merged: Vec<AffinePiece> = Vec::with_capacity(pieces.len());
        for piece in pieces {
            match merged.last_mut() {
                Some(last) if last.domain.hi == piece.domain.lo
                    && last.slope == piece.slope
                    && last.offset == piece.offset =>
                {
                    last.domain.hi = piece.domain.hi;
                }
                Some(last) => {
                    assert!(
                        last.domain.hi <= piece.domain.lo,
                        "piece domains overlap: {last} and {piece}"
                    );
                    merged.push(piece);
                }
                None => merged.push(piece),
            }
        }
        let map = Self { pieces: merged };
        // if images overlapped, the union would be shorter than the sum
        let image_length_sum = map
            .pieces
            .iter()
            .fold(Rational::zero(), |acc, p| acc + p.domain.length() * &p.slope);
        assert!(
            map.image().total_length() == image_length_sum,
            "piece images overlap; not a partial bijection"
        );
        map
    }

    pub fn identity_on(set: &IntervalUnion) -> Self {
        Self::new(
            set.parts()
                .iter()
                .map(|p| AffinePiece::new(p.clone(), Rational::one(), Rational::zero()))
                .collect(),
        )
    }

    pub fn pieces(&self) -> &[AffinePiece] {
        &self.pieces
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn domain(&self) -> IntervalUnion {
        IntervalUnion::from_parts(self.pieces.iter().map(|p| p.domain.clone()).collect())
    }

    pub fn image(&self) -> IntervalUnion {
        IntervalUnion::from_parts(self.pieces.iter().map(|p| p.image()).collect())
    }

    /// The piece whose domain contains `x`, if any.
    pub fn piece_at(&self, x: &Rational) -> Option<&AffinePiece> {
        let idx = self.pieces.partition_point(|p| p.domain.lo() <= x);
        if idx == 0 {
            return None;
        }
        let piece = &self.pieces[idx - 1];
        piece.domain.contains(x).then_some(piece)
    }

    /// Applies the map at `x`; `None` when `x` lies outside every piece.
    pub fn apply(&self, x: &Rational) -> Option<Rational> {
        self.piece_at(x).map(|p| p.map_unchecked(x))
    }

    pub fn invert(&self) -> Self {
        Self::new(self.pieces.iter().map(AffinePiece::invert).collect())
    }

    /// Function composition `self . inner` (apply `inner` first), restricting
    /// to the points whose `inner`-image lies in a domain piece of `self`.
    pub fn compose(&self, inner: &Self) -> Self {
        let mut pieces = Vec::new();
        for q in &inner.pieces {
            let q_image = q.image();
            let q_inv = q.invert();
            for r in &self.pieces {
                if let Some(overlap) = q_image.intersect(&r.domain) {
                    let sub_domain = HalfOpenInterval::new(
                        q_inv.map_unchecked(overlap.lo()),
                        q_inv.map_unchecked(overlap.hi()),
                    );
                    let slope = &r.slope * &q.slope;
                    let offset = &r.slope * &q.offset + &r.offset;
                    pieces.push(AffinePiece::new(sub_domain, slope, offset));
                }
            }
        }
        Self::new(pieces)
    }

    /// Restricts the domain to `set`.
    pub fn restrict(&self, set: &IntervalUnion) -> Self {
        let mut pieces = Vec::new();
        for piece in &self.pieces {
            for part in set.parts() {
                if let Some(overlap) = piece.domain.intersect(part) {
                    pieces.push(AffinePiece::new(overlap, piece.slope.clone(), piece.offset.clone()));
                }
            }
        }
        Self::new(pieces)
    }
}

impl fmt::Display for PiecewiseLinearMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pieces.is_empty() {
            return write!(f, "empty map");
        }
        for (i, piece) in self.pieces.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{piece}")?;
        }
        Ok(())
    }
}
