//! Bracket closure of finite sets of triangular derivations.
//!
//! A derivation is flattened into a rational vector indexed by a [`Frame`]
//! of `(coordinate, monomial)` slots. The frame grows lazily as brackets
//! produce new monomials; stored rows are zero-padded when that happens.
//! Spans are kept in reduced row echelon form with exact arithmetic.

use std::collections::HashMap;

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::deriv::TriangularDerivation;
use crate::error::{Error, Result};
use crate::poly::{Monomial, Rational};

pub const DEFAULT_CAP: usize = 50;

/// Slot of a derivation coefficient: `(coordinate index, monomial)`.
pub type Slot = (usize, Monomial);

#[derive(Debug, Clone, Default)]
pub struct Frame {
    slots: Vec<Slot>,
    index: HashMap<Slot, usize>,
}

impl Frame {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_slots(slots: impl IntoIterator<Item = Slot>) -> Self {
        let mut frame = Frame::new();
        for s in slots {
            frame.push(s);
        }
        frame
    }

    fn push(&mut self, slot: Slot) {
        if !self.index.contains_key(&slot) {
            self.index.insert(slot.clone(), self.slots.len());
            self.slots.push(slot);
        }
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    /// Adds every slot `d` uses that is not present yet.
    pub fn extend_with(&mut self, d: &TriangularDerivation) {
        for (i, g) in d.coeffs().iter().enumerate() {
            for (m, _) in g.terms() {
                self.push((i + 1, m.clone()));
            }
        }
    }

    fn covers(&self, d: &TriangularDerivation) -> bool {
        d.coeffs().iter().enumerate().all(|(i, g)| {
            g.terms()
                .all(|(m, _)| self.index.contains_key(&(i + 1, m.clone())))
        })
    }
}

/// Coordinates of `d` in `frame`.
pub fn vectorize(d: &TriangularDerivation, frame: &Frame) -> Result<Vec<Rational>> {
    let mut v = vec![Rational::zero(); frame.len()];
    for (i, g) in d.coeffs().iter().enumerate() {
        for (m, c) in g.terms() {
            let slot = (i + 1, m.clone());
            let k = frame
                .index
                .get(&slot)
                .ok_or_else(|| Error::FrameIncomplete {
                    coord: i + 1,
                    monomial: m.to_string(),
                })?;
            v[*k] = c.clone();
        }
    }
    Ok(v)
}

/// Reduced row echelon form: every row has a 1 at its pivot and every other
/// row has a 0 there.
#[derive(Debug, Clone, Default)]
struct Echelon {
    rows: Vec<Vec<Rational>>,
    pivots: Vec<usize>,
}

// Height |num|·den, used to pick cheap pivots.
fn height(c: &Rational) -> num_bigint::BigInt {
    c.numer().abs() * c.denom()
}

impl Echelon {
    fn pad(&mut self, len: usize) {
        for row in &mut self.rows {
            row.resize(len, Rational::zero());
        }
    }

    fn reduce(&self, mut v: Vec<Rational>) -> Vec<Rational> {
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if v[p].is_zero() {
                continue;
            }
            let factor = v[p].clone();
            for (x, r) in v.iter_mut().zip(row) {
                if !r.is_zero() {
                    *x -= &factor * r;
                }
            }
        }
        v
    }

    /// Inserts `v` if independent; returns whether the rank grew.
    fn insert(&mut self, v: Vec<Rational>) -> bool {
        let mut v = self.reduce(v);
        let pivot = v
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .min_by_key(|(_, c)| height(c))
            .map(|(k, _)| k);
        let Some(p) = pivot else {
            return false;
        };
        let inv = v[p].recip();
        for x in &mut v {
            *x *= &inv;
        }
        for row in &mut self.rows {
            if row[p].is_zero() {
                continue;
            }
            let factor = row[p].clone();
            for (x, r) in row.iter_mut().zip(&v) {
                if !r.is_zero() {
                    *x -= &factor * r;
                }
            }
        }
        self.rows.push(v);
        self.pivots.push(p);
        true
    }
}

/// Rational span of a list of derivations, with a linearly independent
/// spanning list.
#[derive(Debug, Clone)]
pub struct Span {
    n: usize,
    frame: Frame,
    elements: Vec<TriangularDerivation>,
    echelon: Echelon,
}

impl Span {
    pub fn new(n: usize) -> Self {
        Span {
            n,
            frame: Frame::new(),
            elements: Vec::new(),
            echelon: Echelon::default(),
        }
    }

    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[TriangularDerivation] {
        &self.elements
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn reduced_matrix(&self) -> &[Vec<Rational>] {
        &self.echelon.rows
    }

    /// Adds `d` when it is not already in the span; returns whether it was.
    pub fn insert(&mut self, d: TriangularDerivation) -> Result<bool> {
        if d.n() != self.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: d.n(),
            });
        }
        self.frame.extend_with(&d);
        self.echelon.pad(self.frame.len());
        let v = vectorize(&d, &self.frame)?;
        if self.echelon.insert(v) {
            self.elements.push(d);
            Ok(true)
        } else {
            Ok(false)
        }
    }

    pub fn contains(&self, d: &TriangularDerivation) -> bool {
        if d.n() != self.n || !self.frame.covers(d) {
            // a nonzero entry outside the frame cannot come from the span
            return d.is_zero();
        }
        let v = vectorize(d, &self.frame).expect("frame covers d");
        self.echelon.reduce(v).iter().all(Zero::is_zero)
    }

    fn spanned_by(n: usize, items: impl IntoIterator<Item = TriangularDerivation>) -> Result<Span> {
        let mut span = Span::new(n);
        for d in items {
            span.insert(d)?;
        }
        Ok(span)
    }
}

/// A bracket-closed span: the Lie algebra generated by some derivations.
#[derive(Debug, Clone)]
pub struct LieBasis {
    span: Span,
    rounds: usize,
}

impl LieBasis {
    pub fn n(&self) -> usize {
        self.span.n
    }

    pub fn dim(&self) -> usize {
        self.span.dim()
    }

    pub fn elements(&self) -> &[TriangularDerivation] {
        self.span.elements()
    }

    pub fn frame(&self) -> &Frame {
        self.span.frame()
    }

    pub fn reduced_matrix(&self) -> &[Vec<Rational>] {
        self.span.reduced_matrix()
    }

    /// Saturation rounds the closure needed.
    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn contains(&self, d: &TriangularDerivation) -> bool {
        self.span.contains(d)
    }

    pub fn is_bracket_closed(&self) -> Result<bool> {
        let els = self.elements();
        for (i, a) in els.iter().enumerate() {
            for b in &els[i + 1..] {
                if !self.contains(&a.bracket(b)?) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Smallest bracket-closed span containing `generators`.
///
/// Each round brackets the elements added in the previous round against
/// everything found so far. Fails after `cap` rounds without a fixed point.
pub fn lie_closure(generators: &[TriangularDerivation], cap: usize) -> Result<LieBasis> {
    let n = generators
        .first()
        .map(TriangularDerivation::n)
        .ok_or_else(|| {
            Error::InvalidParameter("lie_closure needs at least one generator".into())
        })?;
    let mut span = Span::new(n);
    let mut fresh = Vec::new();
    for g in generators {
        if span.insert(g.clone())? {
            fresh.push(span.dim() - 1);
        }
    }
    let mut rounds = 0;
    while !fresh.is_empty() {
        if rounds >= cap {
            return Err(Error::ClosureCap { cap });
        }
        rounds += 1;
        let settled = span.dim();
        let mut next = Vec::new();
        for (fi, &i) in fresh.iter().enumerate() {
            for j in 0..settled {
                // fresh-fresh pairs once each
                if j == i || fresh[..fi].contains(&j) {
                    continue;
                }
                let b = span.elements[i].bracket(&span.elements[j])?;
                if span.insert(b)? {
                    next.push(span.dim() - 1);
                }
            }
        }
        fresh = next;
    }
    Ok(LieBasis { span, rounds })
}

fn brackets_of(
    left: &[TriangularDerivation],
    right: &[TriangularDerivation],
) -> Result<Vec<TriangularDerivation>> {
    let mut out = Vec::with_capacity(left.len() * right.len());
    for a in left {
        for b in right {
            out.push(a.bracket(b)?);
        }
    }
    Ok(out)
}

fn series<F>(basis: &LieBasis, name: &'static str, mut step: F) -> Result<Vec<usize>>
where
    F: FnMut(&Span) -> Result<Vec<TriangularDerivation>>,
{
    let mut dims = vec![basis.dim()];
    let mut current = basis.span.clone();
    while current.dim() > 0 {
        let next = Span::spanned_by(basis.n(), step(&current)?)?;
        if next.dim() >= current.dim() {
            return Err(Error::SeriesStalled {
                series: name,
                dim: current.dim(),
            });
        }
        dims.push(next.dim());
        current = next;
    }
    Ok(dims)
}

/// Dimensions of `L ⊇ [L,L] ⊇ [L,[L,L]] ⊇ ...` down to 0.
pub fn lower_central_series(basis: &LieBasis) -> Result<Vec<usize>> {
    let whole = basis.elements().to_vec();
    series(basis, "lower central", |cur| {
        brackets_of(&whole, cur.elements())
    })
}

/// Dimensions of `L ⊇ [L,L] ⊇ [[L,L],[L,L]] ⊇ ...` down to 0.
pub fn derived_series(basis: &LieBasis) -> Result<Vec<usize>> {
    series(basis, "derived", |cur| {
        let els = cur.elements();
        let mut out = Vec::new();
        for (i, a) in els.iter().enumerate() {
            for b in &els[i + 1..] {
                out.push(a.bracket(b)?);
            }
        }
        Ok(out)
    })
}

/// Number of steps a series takes to reach 0.
pub fn series_length(dims: &[usize]) -> usize {
    dims.len().saturating_sub(1)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClosureReport {
    pub n: usize,
    pub dimension: usize,
    pub rounds: usize,
    pub basis: Vec<String>,
    pub lower_central_series: Vec<usize>,
    pub derived_series: Vec<usize>,
    pub nilpotency_class: usize,
    pub derived_length: usize,
}

impl ClosureReport {
    pub fn from_basis(basis: &LieBasis) -> Result<Self> {
        let lcs = lower_central_series(basis)?;
        let ds = derived_series(basis)?;
        Ok(ClosureReport {
            n: basis.n(),
            dimension: basis.dim(),
            rounds: basis.rounds(),
            basis: basis.elements().iter().map(ToString::to_string).collect(),
            nilpotency_class: series_length(&lcs),
            derived_length: series_length(&ds),
            lower_central_series: lcs,
            derived_series: ds,
        })
    }
}
