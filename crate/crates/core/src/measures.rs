//! Measures on a [`MeasureSpace`] and families of them.

use std::collections::HashMap;
use std::sync::Arc;

use crate::space::{euclid, MeasureSpace};
use crate::{Error, Result};

/// Tolerance for treating two measures as identical.
pub const DEDUP_TOL: f64 = 1e-12;

/// A nonnegative measure stored as sorted sparse `(point, mass)` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    len: usize,
    entries: Vec<(usize, f64)>,
    total: f64,
}

impl Measure {
    pub fn zero(len: usize) -> Self {
        Measure { len, entries: Vec::new(), total: 0.0 }
    }

    /// Builds a measure from possibly unsorted entries; repeated indices are
    /// summed and zero masses dropped.
    pub fn from_entries<I>(len: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, f64)>,
    {
        let mut raw: Vec<(usize, f64)> = Vec::new();
        for (index, mass) in entries {
            if index >= len {
                return Err(Error::BadIndex { index, len });
            }
            if !(mass.is_finite() && mass >= 0.0) {
                return Err(Error::InvalidInput(format!("measure mass {mass} at point {index}")));
            }
            raw.push((index, mass));
        }
        raw.sort_by_key(|e| e.0);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(raw.len());
        for (i, m) in raw {
            match merged.last_mut() {
                Some(last) if last.0 == i => last.1 += m,
                _ => merged.push((i, m)),
            }
        }
        merged.retain(|e| e.1 > 0.0);
        let total = merged.iter().map(|e| e.1).sum();
        Ok(Measure { len, entries: merged, total })
    }

    pub fn from_dense(values: &[f64]) -> Result<Self> {
        Measure::from_entries(values.len(), values.iter().copied().enumerate())
    }

    /// Size of the space the measure lives on.
    pub fn space_len(&self) -> usize {
        self.len
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.entries
            .binary_search_by_key(&i, |e| e.0)
            .map(|k| self.entries[k].1)
            .unwrap_or(0.0)
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.len];
        for &(i, m) in &self.entries {
            out[i] = m;
        }
        out
    }

    /// `∫ f dμ` for a function given by its values on every point.
    pub fn pair(&self, f: &[f64]) -> Result<f64> {
        if f.len() != self.len {
            return Err(Error::SpaceMismatch);
        }
        Ok(self.entries.iter().map(|&(i, m)| m * f[i]).sum())
    }

    pub fn scale(&self, c: f64) -> Result<Measure> {
        if !(c >= 0.0) || !c.is_finite() {
            return Err(Error::NegativeScale(c));
        }
        if c == 0.0 {
            return Ok(Measure::zero(self.len));
        }
        let entries: Vec<_> = self.entries.iter().map(|&(i, m)| (i, m * c)).collect();
        let total = entries.iter().map(|e| e.1).sum();
        Ok(Measure { len: self.len, entries, total })
    }

    pub fn add(&self, other: &Measure) -> Result<Measure> {
        if self.len != other.len {
            return Err(Error::SpaceMismatch);
        }
        Measure::from_entries(self.len, self.entries.iter().chain(other.entries.iter()).copied())
    }

    /// Entrywise equality up to `tol`.
    pub fn approx_eq(&self, other: &Measure, tol: f64) -> bool {
        if self.len != other.len {
            return false;
        }
        let (mut a, mut b) = (self.entries.iter().peekable(), other.entries.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (None, None) => return true,
                (Some(&&(i, x)), Some(&&(j, y))) if i == j => {
                    if (x - y).abs() > tol {
                        return false;
                    }
                    a.next();
                    b.next();
                }
                (Some(&&(i, x)), Some(&&(j, _))) if i < j => {
                    if x > tol {
                        return false;
                    }
                    a.next();
                }
                (Some(_), Some(&&(_, y))) => {
                    if y > tol {
                        return false;
                    }
                    b.next();
                }
                (Some(&&(_, x)), None) => {
                    if x > tol {
                        return false;
                    }
                    a.next();
                }
                (None, Some(&&(_, y))) => {
                    if y > tol {
                        return false;
                    }
                    b.next();
                }
            }
        }
    }
}

/// Unit point mass at `x`.
pub fn dirac(space: &MeasureSpace, x: usize) -> Result<Measure> {
    Measure::from_entries(space.len(), [(x, 1.0)])
}

/// Arclength measure of a polyline, deposited on the nearest points.
///
/// Each segment is cut into equal pieces no longer than half the smallest
/// point spacing; each piece puts its length on the point nearest to its
/// midpoint. The total mass is the polyline length.
pub fn path_measure(space: &MeasureSpace, polyline: &[Vec<f64>]) -> Result<Measure> {
    if !space.has_coords() {
        return Err(Error::NoCoords);
    }
    if polyline.len() < 2 {
        return Err(Error::InvalidInput("a path needs at least two vertices".into()));
    }
    if let Some(v) = polyline.iter().find(|v| v.len() != space.dim()) {
        return Err(Error::SizeMismatch { expected: space.dim(), got: v.len() });
    }
    let length: f64 = polyline.windows(2).map(|w| euclid(&w[0], &w[1])).sum();
    if !(length > 0.0) || !length.is_finite() {
        return Err(Error::ZeroLengthPath);
    }
    let step = 0.5 * space.min_spacing()?;
    let step = if step.is_finite() && step > 0.0 { step } else { length };
    let mut acc: HashMap<usize, f64> = HashMap::new();
    let mut point = vec![0.0; space.dim()];
    for w in polyline.windows(2) {
        let seg = euclid(&w[0], &w[1]);
        if seg == 0.0 {
            continue;
        }
        let pieces = (seg / step).ceil().max(1.0) as usize;
        let piece_len = seg / pieces as f64;
        for k in 0..pieces {
            let t = (k as f64 + 0.5) / pieces as f64;
            for (d, p) in point.iter_mut().enumerate() {
                *p = w[0][d] + t * (w[1][d] - w[0][d]);
            }
            *acc.entry(space.nearest(&point)?).or_insert(0.0) += piece_len;
        }
    }
    Measure::from_entries(space.len(), acc)
}

/// The reference mass restricted to `subset`.
pub fn restriction<I: IntoIterator<Item = usize>>(space: &MeasureSpace, subset: I) -> Result<Measure> {
    let mut seen = std::collections::BTreeSet::new();
    for index in subset {
        if index >= space.len() {
            return Err(Error::BadIndex { index, len: space.len() });
        }
        seen.insert(index);
    }
    Measure::from_entries(space.len(), seen.into_iter().map(|i| (i, space.mass()[i])))
}

/// Multiplies every entry of `mu` by `c >= 0`.
pub fn scale(mu: &Measure, c: f64) -> Result<Measure> {
    mu.scale(c)
}

/// A finite labelled family of measures on one space.
#[derive(Debug, Clone)]
pub struct MeasureFamily {
    space: Arc<MeasureSpace>,
    labels: Vec<String>,
    members: Vec<Measure>,
}

impl MeasureFamily {
    pub fn new(space: Arc<MeasureSpace>) -> Self {
        MeasureFamily { space, labels: Vec::new(), members: Vec::new() }
    }

    pub fn from_members<I>(space: Arc<MeasureSpace>, members: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, Measure)>,
    {
        let mut family = MeasureFamily::new(space);
        for (label, mu) in members {
            family.push(label, mu)?;
        }
        Ok(family)
    }

    pub fn push(&mut self, label: impl Into<String>, mu: Measure) -> Result<()> {
        let label = label.into();
        if mu.space_len() != self.space.len() {
            return Err(Error::SpaceMismatch);
        }
        if self.labels.contains(&label) {
            return Err(Error::InvalidInput(format!("duplicate member label {label:?}")));
        }
        self.labels.push(label);
        self.members.push(mu);
        Ok(())
    }

    pub fn space(&self) -> &Arc<MeasureSpace> {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[Measure] {
        &self.members
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Measure)> {
        self.labels.iter().map(String::as_str).zip(self.members.iter())
    }

    /// Position of a member equal to `mu` up to [`DEDUP_TOL`].
    pub fn find(&self, mu: &Measure) -> Option<usize> {
        self.members.iter().position(|m| m.approx_eq(mu, DEDUP_TOL))
    }

    pub fn contains(&self, mu: &Measure) -> bool {
        self.find(mu).is_some()
    }

    /// The same family with every member multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let members = self.members.iter().map(|m| m.scale(c)).collect::<Result<Vec<_>>>()?;
        Ok(MeasureFamily { space: self.space.clone(), labels: self.labels.clone(), members })
    }

    /// The same members re-attached to another space with the same point count.
    pub fn on_space(&self, space: Arc<MeasureSpace>) -> Result<Self> {
        if space.len() != self.space.len() {
            return Err(Error::SpaceMismatch);
        }
        Ok(MeasureFamily { space, labels: self.labels.clone(), members: self.members.clone() })
    }

    /// The sub-family at the given positions.
    pub fn select(&self, positions: &[usize]) -> Result<Self> {
        let mut out = MeasureFamily::new(self.space.clone());
        for &k in positions {
            if k >= self.len() {
                return Err(Error::BadIndex { index: k, len: self.len() });
            }
            out.push(self.labels[k].clone(), self.members[k].clone())?;
        }
        Ok(out)
    }
}

fn same_space(a: &Arc<MeasureSpace>, b: &Arc<MeasureSpace>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Concatenates two families, dropping members of `f2` already present in
/// `f1` (or earlier in `f2`). Clashing labels of new members get a suffix.
pub fn union_families(f1: &MeasureFamily, f2: &MeasureFamily) -> Result<MeasureFamily> {
    if !same_space(&f1.space, &f2.space) {
        return Err(Error::SpaceMismatch);
    }
    let mut out = MeasureFamily::new(f1.space.clone());
    for (label, mu) in f1.iter().chain(f2.iter()) {
        if out.contains(mu) {
            continue;
        }
        let mut name = label.to_string();
        let mut k = 2;
        while out.labels.contains(&name) {
            name = format!("{label}#{k}");
            k += 1;
        }
        out.push(name, mu.clone())?;
    }
    Ok(out)
}

/// Increasing sequence `E_1 ⊂ E_2 ⊂ …` materialized up to a horizon.
#[derive(Debug, Clone)]
pub struct FamilySequence {
    families: Vec<MeasureFamily>,
    monotone: bool,
}

impl FamilySequence {
    /// Calls `generator(k)` for `k = 1..=horizon`.
    pub fn generate<F>(horizon: usize, monotone: bool, mut generator: F) -> Result<Self>
    where
        F: FnMut(usize) -> Result<MeasureFamily>,
    {
        let families = (1..=horizon).map(&mut generator).collect::<Result<Vec<_>>>()?;
        FamilySequence::from_families(families, monotone)
    }

    pub fn from_families(families: Vec<MeasureFamily>, monotone: bool) -> Result<Self> {
        if families.is_empty() {
            return Err(Error::InvalidInput("a family sequence needs at least one family".into()));
        }
        if families.iter().any(|f| !same_space(f.space(), families[0].space())) {
            return Err(Error::SpaceMismatch);
        }
        Ok(FamilySequence { families, monotone })
    }

    /// A sequence repeating the same family.
    pub fn constant(family: MeasureFamily, horizon: usize) -> Result<Self> {
        FamilySequence::from_families(vec![family; horizon.max(1)], true)
    }

    pub fn horizon(&self) -> usize {
        self.families.len()
    }

    pub fn is_monotone_flagged(&self) -> bool {
        self.monotone
    }

    /// `E_k`, 1-based.
    pub fn family(&self, k: usize) -> Result<&MeasureFamily> {
        if k == 0 || k > self.families.len() {
            return Err(Error::BadIndex { index: k, len: self.families.len() });
        }
        Ok(&self.families[k - 1])
    }

    pub fn families(&self) -> &[MeasureFamily] {
        &self.families
    }

    pub fn space(&self) -> &Arc<MeasureSpace> {
        self.families[0].space()
    }

    /// Checks `E_k ⊆ E_{k+1}` for all `k < up_to`; also fails if the
    /// monotone flag is not set.
    pub fn verify_monotone(&self, up_to: usize) -> Result<()> {
        if !self.monotone {
            return Err(Error::NotMonotone { k: 0, member: "<sequence not flagged monotone>".into() });
        }
        let up_to = up_to.min(self.families.len());
        for k in 1..up_to {
            let (cur, next) = (&self.families[k - 1], &self.families[k]);
            for (label, mu) in cur.iter() {
                if !next.contains(mu) {
                    return Err(Error::NotMonotone { k, member: label.to_string() });
                }
            }
        }
        Ok(())
    }

    /// Union of `E_1, …, E_k`.
    pub fn union_up_to(&self, k: usize) -> Result<MeasureFamily> {
        let k = k.clamp(1, self.families.len());
        let mut acc = self.families[0].clone();
        for f in &self.families[1..k] {
            acc = union_families(&acc, f)?;
        }
        Ok(acc)
    }
}
