//! The matroid `M = G|E` of a point set: rank, `PG(k-1,2)`-freeness with
//! witnesses, naive triangle counting and the critical number.

use serde::{Deserialize, Serialize};

use crate::ambient::{rank_of, AmbientGeometry, Flat, GfVector};
use crate::error::{Error, Result};
use crate::pointset::PointSet;
use crate::search::{self, SearchLimit};
use crate::thresholds;

pub fn matroid_rank(set: &PointSet) -> u32 {
    rank_of(set.iter())
}

/// Outcome of a `PG(n-1,2)`-freeness test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreenessWitness {
    pub level: u32,
    pub found: bool,
    /// A rank-`level` flat whose points all lie in the set.
    pub subspace: Option<Flat>,
}

impl FreenessWitness {
    pub fn is_free(&self) -> bool {
        !self.found
    }
}

/// Searches for a copy of `PG(n-1,2)` inside `set`, that is, a rank-`n` flat
/// all of whose `2^n - 1` points are in the set. `n = 2` detects triangles,
/// `n = 3` fanos. The witness is the least one in search order.
pub fn is_pg_free(set: &PointSet, n: u32) -> Result<FreenessWitness> {
    is_pg_free_with(set, n, SearchLimit::NONE)
}

pub fn is_pg_free_with(set: &PointSet, n: u32, limit: SearchLimit) -> Result<FreenessWitness> {
    if n == 0 {
        return Err(Error::InvalidParameter("freeness level must be at least 1".into()));
    }
    let subspace = match search::find_subspace(set, n, limit)? {
        Some(basis) => Some(Flat::from_basis(set.ambient(), &basis)?),
        None => None,
    };
    Ok(FreenessWitness {
        level: n,
        found: subspace.is_some(),
        subspace,
    })
}

/// Shorthand for `!is_pg_free(set, n).found`.
pub fn pg_free(set: &PointSet, n: u32) -> bool {
    match search::find_subspace(set, n, SearchLimit::NONE) {
        Ok(found) => found.is_none(),
        Err(_) => unreachable!("unbounded search cannot hit a cap"),
    }
}

/// Number of ordered triples `(x, y, z)` of points of the set with
/// `x + y + z = 0`, by testing every pair.
pub fn triangle_count_naive(set: &PointSet) -> u64 {
    let pts = set.to_vec();
    let mut pairs = 0u64;
    for (i, &x) in pts.iter().enumerate() {
        for &y in &pts[i + 1..] {
            pairs += set.contains_word(x ^ y) as u64;
        }
    }
    2 * pairs
}

/// Whether any line of the geometry lies entirely in the set.
pub fn has_triangle(set: &PointSet) -> bool {
    let pts = set.to_vec();
    pts.iter()
        .enumerate()
        .any(|(i, &x)| pts[i + 1..].iter().any(|&y| set.contains_word(x ^ y)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriticalNumber {
    pub chi: u32,
    /// A flat of corank `chi` disjoint from the set.
    pub disjoint_flat: Flat,
    /// Set when the input was empty; the full geometry is then disjoint.
    pub degenerate: bool,
}

/// `chi(M)`: the least corank of a flat of the ambient geometry disjoint
/// from the set, computed as `r` minus the largest rank of a subspace inside
/// the complement.
pub fn critical_number(set: &PointSet) -> u32 {
    critical_number_with(set, SearchLimit::NONE)
        .expect("unbounded search cannot hit a cap")
        .chi
}

pub fn critical_number_with(set: &PointSet, limit: SearchLimit) -> Result<CriticalNumber> {
    let flat = search::max_subspace(&set.complement(), limit)?;
    Ok(CriticalNumber {
        chi: flat.corank(),
        disjoint_flat: flat,
        degenerate: set.is_empty(),
    })
}

/// Checks `chi(M) in {n-1, n}` for a dense `PG(n-1,2)`-free set. Returns the
/// critical number and whether it lies in the window.
pub fn check_critical_number_window(set: &PointSet, n: u32) -> Result<(u32, bool)> {
    let r = set.rank();
    if n < 2 || r < n {
        return Err(Error::Hypothesis(format!("need r >= n >= 2, got r={r}, n={n}")));
    }
    if !thresholds::dense_for_level(set.len(), n, r) {
        return Err(Error::Hypothesis(format!(
            "|E| = {} is not above (1 - 3/2^{n}) 2^{r} = {}",
            set.len(),
            thresholds::density_threshold(3, n, r)
        )));
    }
    let w = is_pg_free(set, n)?;
    if let Some(s) = w.subspace {
        return Err(Error::Hypothesis(format!(
            "set contains PG({},2) spanned by {:?}",
            n - 1,
            s.basis()
        )));
    }
    let chi = critical_number(set);
    Ok((chi, chi + 1 == n || chi == n))
}

/// Coordinate change between a flat of the original geometry and the fresh
/// ambient of rank `flat.rank()` used for a restriction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoordinateMap {
    flat: Flat,
}

impl CoordinateMap {
    pub fn flat(&self) -> &Flat {
        &self.flat
    }

    /// Maps a restricted-ambient vector back into the original geometry.
    pub fn lift(&self, v: GfVector) -> GfVector {
        self.flat.lift(v)
    }

    /// Maps an original vector into restricted coordinates, if it lies in the flat.
    pub fn project(&self, v: GfVector) -> Option<GfVector> {
        self.flat.coordinates(v)
    }

    pub fn lift_flat(&self, f: &Flat) -> Result<Flat> {
        let lifted: Vec<GfVector> = f.basis().iter().map(|&b| self.lift(b)).collect();
        Flat::from_basis(self.flat.ambient(), &lifted)
    }

    pub fn lift_set(&self, set: &PointSet) -> PointSet {
        let mut out = PointSet::empty(self.flat.ambient());
        for p in set.iter() {
            out.insert_unchecked(self.lift(p));
        }
        out
    }
}

/// Re-coordinatizes `E ∩ f` into an ambient of rank `f.rank()` using the
/// canonical basis of `f`.
pub fn restrict_to_flat(set: &PointSet, f: &Flat) -> Result<(PointSet, CoordinateMap)> {
    set.ambient().same(f.ambient())?;
    let ambient = AmbientGeometry::new(f.rank())
        .map_err(|_| Error::InvalidParameter("cannot restrict to a flat of rank 0".into()))?;
    let mut out = PointSet::empty(ambient);
    if (set.len() as u64) < f.point_count() as u64 {
        for p in set.iter() {
            if let Some(c) = f.coordinates(p) {
                out.insert_unchecked(c);
            }
        }
    } else {
        for p in f.points() {
            if set.contains(p) {
                out.insert_unchecked(f.coordinates(p).expect("point of the flat"));
            }
        }
    }
    Ok((out, CoordinateMap { flat: f.clone() }))
}
