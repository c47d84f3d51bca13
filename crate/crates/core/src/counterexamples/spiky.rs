//! Nested open-set systems `G_{m,i}` and the families built from them.
//!
//! A [`GSystem`] holds point sets `G_{m,i}`, `m = 1..=M`, `i = 1..=I`, that
//! are disjoint across `m`, decrease in `i` and have positive finite mass.
//! The restriction of `m` to `H_{m,s} = ⋃_{n≥m} G_{n,s_n}` is the member
//! `μ_{m,s}`; `E_m` collects the members with start index at most `m`.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::measures::{restriction, FamilySequence, Measure, MeasureFamily};
use crate::modulus::DensityFunction;
use crate::space::{doubling_constant, DoublingReport, MeasureSpace};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GSystem {
    space: Arc<MeasureSpace>,
    /// `sets[m−1][i−1]` = sorted indices of `G_{m,i}`.
    sets: Vec<Vec<Vec<usize>>>,
}

impl GSystem {
    /// Checks (a) disjointness across `m` of the `G_{m,1}`, (b) `G_{m,i}`
    /// decreasing in `i`, (c) positive mass, (d) strictly decreasing mass in
    /// `i` and (e) finite total mass.
    pub fn new(space: Arc<MeasureSpace>, sets: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        let invariant = |msg: String| Err(Error::ConstructionInvariant(msg));
        let depth = sets.first().map_or(0, Vec::len);
        if sets.is_empty() || depth == 0 || sets.iter().any(|s| s.len() != depth) {
            return invariant("G-system must be a nonempty M x I array".into());
        }
        let n = space.len();
        let mass = space.mass();
        let mut sorted = Vec::with_capacity(sets.len());
        let mut taken = BTreeSet::new();
        for (m, row) in sets.into_iter().enumerate() {
            let mut prev: Option<(BTreeSet<usize>, f64)> = None;
            let mut out_row = Vec::with_capacity(depth);
            for (i, set) in row.into_iter().enumerate() {
                let set: BTreeSet<usize> = set.into_iter().collect();
                if set.iter().any(|&x| x >= n) {
                    return invariant(format!("G_{{{},{}}} has an index outside the space", m + 1, i + 1));
                }
                let measure: f64 = set.iter().map(|&x| mass[x]).sum();
                if !(measure > 0.0 && measure.is_finite()) {
                    return invariant(format!("m(G_{{{},{}}}) = {measure} is not positive and finite", m + 1, i + 1));
                }
                if let Some((p, pm)) = &prev {
                    if !set.is_subset(p) {
                        return invariant(format!("G_{{{},{}}} is not contained in G_{{{},{}}}", m + 1, i + 1, m + 1, i));
                    }
                    if measure >= *pm {
                        return invariant(format!("m(G_{{{},i}}) does not decrease at i = {}", m + 1, i + 1));
                    }
                } else if !set.is_disjoint(&taken) {
                    return invariant(format!("G_{{{},1}} meets an earlier G_{{n,1}}", m + 1));
                } else {
                    taken.extend(set.iter().copied());
                }
                out_row.push(set.iter().copied().collect());
                prev = Some((set, measure));
            }
            sorted.push(out_row);
        }
        Ok(GSystem { space, sets: sorted })
    }

    pub fn space(&self) -> &Arc<MeasureSpace> {
        &self.space
    }

    /// `M`.
    pub fn count(&self) -> usize {
        self.sets.len()
    }

    /// `I`.
    pub fn depth(&self) -> usize {
        self.sets[0].len()
    }

    /// `G_{m,i}`, 1-based.
    pub fn set(&self, m: usize, i: usize) -> Result<&[usize]> {
        self.sets
            .get(m.wrapping_sub(1))
            .and_then(|row| row.get(i.wrapping_sub(1)))
            .map(Vec::as_slice)
            .ok_or(Error::BadIndex { index: m.max(i), len: self.count().max(self.depth()) })
    }

    /// `m(G_{m,i})`.
    pub fn mass(&self, m: usize, i: usize) -> Result<f64> {
        let mass = self.space.mass();
        Ok(self.set(m, i)?.iter().map(|&x| mass[x]).sum())
    }

    /// `g_{m,i} = χ_{G_{m,i}} / m(G_{m,i})`, unit `L¹` norm.
    pub fn g(&self, m: usize, i: usize) -> Result<DensityFunction> {
        let total = self.mass(m, i)?;
        let mut values = vec![0.0; self.space.len()];
        for &x in self.set(m, i)? {
            values[x] = 1.0 / total;
        }
        DensityFunction::new(values)
    }

    /// `(g_{m,i})_{i=1..=I}`.
    pub fn g_sequence(&self, m: usize) -> Result<Vec<DensityFunction>> {
        (1..=self.depth()).map(|i| self.g(m, i)).collect()
    }

    /// Restriction of `m` to `H_{m,s} = ⋃_{n≥m} G_{n,s_n}`; `s` is indexed by
    /// `n − 1` and its entries are clamped to `1..=I`.
    pub fn h_measure(&self, start: usize, s: &[usize]) -> Result<Measure> {
        if start == 0 || start > self.count() || s.len() < self.count() {
            return Err(Error::InvalidInput(format!(
                "start {start} or index sequence of length {} does not fit M = {}",
                s.len(),
                self.count()
            )));
        }
        let depth = self.depth();
        let points = (start..=self.count())
            .map(|n| self.set(n, s[n - 1].clamp(1, depth)))
            .collect::<Result<Vec<_>>>()?;
        restriction(&self.space, points.into_iter().flatten().copied())
    }

    /// Restriction to `⋃_{n≥m} G_{n,1}`.
    pub fn tail_union(&self, start: usize) -> Result<Measure> {
        self.h_measure(start, &vec![1; self.count()])
    }

    /// Index sequences used by [`construction_families`]: the constants
    /// `(c, c, …)` and the diagonals `s_n = n` and `s_n = M − n + 1`.
    pub fn default_index_sequences(&self) -> Vec<Vec<usize>> {
        let (m, depth) = (self.count(), self.depth());
        let mut out: Vec<Vec<usize>> = (1..=depth).map(|c| vec![c; m]).collect();
        out.push((1..=m).map(|n| n.min(depth)).collect());
        out.push((1..=m).map(|n| (m - n + 1).min(depth)).collect());
        out
    }
}

/// The spiky space: segments `L_m` from the origin to `(2^{−m}, 2^{−m}/m)`
/// carrying twice their length measure, with `G_{m,i} = {0 < x₁ < 2^{−m−i+1}}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpikySpace {
    pub system: GSystem,
    pub segments: usize,
    pub depth: usize,
    pub cells_per_segment: usize,
    /// Index of the origin, a point of zero mass shared by all segments.
    pub origin: usize,
    pub doubling: DoublingReport,
}

pub const DEFAULT_CELLS_PER_SEGMENT: usize = 48;

/// Radii `2^{−k}`, `k = 1..=M+I+4`, scanned for the doubling constant.
pub fn spiky_radii(segments: usize, depth: usize) -> Vec<f64> {
    (1..=(segments + depth + 4) as i32).map(|k| 0.5f64.powi(k)).collect()
}

/// Each segment is cut into the pieces `2^{−m−i} ≤ x₁ < 2^{−m−i+1}`,
/// `i < I`, and `0 < x₁ < 2^{−m−I+1}`, each split into
/// `max(1, cells/I)` equal cells, so every `G_{m,i}` is a union of cells.
pub fn spiky_space(segments: usize, depth: usize, cells_per_segment: usize) -> Result<SpikySpace> {
    if segments == 0 || depth == 0 || cells_per_segment == 0 {
        return Err(Error::InvalidInput("M, I and the cell count must be positive".into()));
    }
    let per_piece = (cells_per_segment / depth).max(1);
    let mut mass = vec![0.0];
    let mut coords = vec![vec![0.0, 0.0]];
    let mut sets = Vec::with_capacity(segments);
    for m in 1..=segments {
        let slope = 1.0 / m as f64;
        let stretch = (1.0 + slope * slope).sqrt();
        // piece_cells[i−1] = indices of piece i
        let mut piece_cells: Vec<Vec<usize>> = Vec::with_capacity(depth);
        for i in 1..=depth {
            let hi = 0.5f64.powi((m + i - 1) as i32);
            let lo = if i < depth { hi / 2.0 } else { 0.0 };
            let width = (hi - lo) / per_piece as f64;
            let mut cells = Vec::with_capacity(per_piece);
            for c in 0..per_piece {
                let x1 = lo + (c as f64 + 0.5) * width;
                cells.push(mass.len());
                mass.push(2.0 * width * stretch);
                coords.push(vec![x1, x1 * slope]);
            }
            piece_cells.push(cells);
        }
        let row: Vec<Vec<usize>> = (0..depth).map(|i| piece_cells[i..].concat()).collect();
        sets.push(row);
    }
    let space = Arc::new(MeasureSpace::new(mass)?.with_coords(coords)?);
    let system = GSystem::new(space.clone(), sets)?;
    let doubling = doubling_constant(&space, &spiky_radii(segments, depth))?;
    if !doubling.constant.is_finite() {
        return Err(Error::ConstructionInvariant("doubling ratio is not finite".into()));
    }
    Ok(SpikySpace { system, segments, depth, cells_per_segment, origin: 0, doubling })
}

/// `E_1 ⊆ … ⊆ E_M` with `E_m = {μ_{m',s} : m' ≤ m, s ∈ sequences}`.
pub fn construction_families(system: &GSystem, sequences: &[Vec<usize>]) -> Result<FamilySequence> {
    let mut families = Vec::with_capacity(system.count());
    let mut current = MeasureFamily::new(system.space().clone());
    for m in 1..=system.count() {
        for (j, s) in sequences.iter().enumerate() {
            let mu = system.h_measure(m, s)?;
            if !current.contains(&mu) {
                current.push(format!("m{m}s{j}"), mu)?;
            }
        }
        families.push(current.clone());
    }
    FamilySequence::from_families(families, true)
}

fn primes(count: usize) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(count);
    let mut c = 2;
    while out.len() < count {
        if out.iter().take_while(|&&p| p * p <= c).all(|&p| c % p != 0) {
            out.push(c);
        }
        c += 1;
    }
    out
}

/// `G_{m,i} = ⋃_{j≥i} U_{p_m^j}` over the available sets `U_1, U_2, …`
/// (`sets[n−1] = U_n`), `p_m` the `m`-th prime.
pub fn prime_g_system(space: Arc<MeasureSpace>, sets: &[Vec<usize>], count: usize, depth: usize) -> Result<GSystem> {
    if count == 0 || depth == 0 {
        return Err(Error::InvalidInput("M and I must be positive".into()));
    }
    let ps = primes(count);
    let needed = ps[count - 1].checked_pow(depth as u32).unwrap_or(usize::MAX);
    if needed > sets.len() {
        return Err(Error::InsufficientSets { needed, available: sets.len() });
    }
    let rows = ps
        .iter()
        .map(|&p| {
            let mut powers = Vec::new();
            let mut q = p;
            while q <= sets.len() {
                powers.push(q);
                q = match q.checked_mul(p) {
                    Some(v) => v,
                    None => break,
                };
            }
            (1..=depth).map(|i| powers[i - 1..].iter().flat_map(|&q| sets[q - 1].iter().copied()).collect()).collect()
        })
        .collect();
    GSystem::new(space, rows)
}

/// Construction families over the prime-power system of [`prime_g_system`].
pub fn nonincr_measures_family(
    space: Arc<MeasureSpace>,
    sets: &[Vec<usize>],
    count: usize,
    depth: usize,
) -> Result<(GSystem, FamilySequence)> {
    let system = prime_g_system(space, sets, count, depth)?;
    let seq = construction_families(&system, &system.default_index_sequences())?;
    Ok((system, seq))
}
