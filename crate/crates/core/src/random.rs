//! Seeded random instances for duality checks and property tests.

use std::sync::Arc;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::measures::{FamilySequence, Measure, MeasureFamily};
use crate::space::MeasureSpace;
use crate::Result;

/// Size limits for [`random_family`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomShape {
    pub max_points: usize,
    pub max_members: usize,
    /// Largest support of a member.
    pub max_support: usize,
}

impl Default for RandomShape {
    fn default() -> Self {
        RandomShape { max_points: 40, max_members: 30, max_support: 8 }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Points on a line with masses in `[0.1, 1]`.
pub fn random_space<R: Rng>(rng: &mut R, n: usize) -> Result<MeasureSpace> {
    let mass = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
    MeasureSpace::new(mass)?.with_coords((0..n).map(|i| vec![i as f64]).collect())
}

pub fn random_measure<R: Rng>(rng: &mut R, n: usize, max_support: usize) -> Result<Measure> {
    let support = rng.gen_range(1..=max_support.clamp(1, n));
    let idx = sample(rng, n, support);
    let entries: Vec<(usize, f64)> = idx.iter().map(|i| (i, rng.gen_range(0.05..1.0))).collect();
    Measure::from_entries(n, entries)
}

pub fn random_family_on<R: Rng>(rng: &mut R, space: Arc<MeasureSpace>, members: usize, max_support: usize) -> Result<MeasureFamily> {
    let n = space.len();
    let mut family = MeasureFamily::new(space);
    for j in 0..members {
        family.push(format!("mu{j}"), random_measure(rng, n, max_support)?)?;
    }
    Ok(family)
}

pub fn random_family<R: Rng>(rng: &mut R, shape: RandomShape) -> Result<MeasureFamily> {
    let n = rng.gen_range(2..=shape.max_points.max(2));
    let members = rng.gen_range(1..=shape.max_members.max(1));
    let space = Arc::new(random_space(rng, n)?);
    random_family_on(rng, space, members, shape.max_support)
}

/// `E_1 ⊆ … ⊆ E_K`, each step adding between one and three members.
pub fn random_nested<R: Rng>(rng: &mut R, n: usize, horizon: usize) -> Result<FamilySequence> {
    let space = Arc::new(random_space(rng, n)?);
    let mut families = Vec::with_capacity(horizon);
    let mut current = MeasureFamily::new(space);
    let mut next_label = 0;
    for _ in 0..horizon {
        for _ in 0..rng.gen_range(1..=3) {
            current.push(format!("mu{next_label}"), random_measure(rng, n, 6)?)?;
            next_label += 1;
        }
        families.push(current.clone());
    }
    FamilySequence::from_families(families, true)
}
