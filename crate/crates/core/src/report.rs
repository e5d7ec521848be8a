//! One-stop summary of a point set.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ambient::{Flat, GfVector};
use crate::error::{Error, Result};
use crate::matroid::{critical_number_with, is_pg_free_with, matroid_rank, triangle_count_naive, FreenessWitness};
use crate::pointset::PointSet;
use crate::rational::Rational;
use crate::search::SearchLimit;
use crate::spectral::walsh_hadamard;
use crate::structure::{find_triangle_free_flat, Strategy, StructureResult};
use crate::sweep::{FORMAT_VERSION, LIBRARY_VERSION};
use crate::thresholds;

/// Largest rank at which the quadratic triangle count is run as a cross-check.
pub const NAIVE_CROSS_CHECK_MAX_RANK: u32 = 16;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub format_version: u32,
    pub library_version: String,
    pub ambient_rank: u32,
    pub size: u64,
    pub matroid_rank: u32,
    /// `|E| / 2^r`
    pub density: Rational,
    /// Keyed by level `n`.
    pub pg_freeness: BTreeMap<u32, FreenessWitness>,
    pub critical_number: u32,
    pub critical_flat: Flat,
    /// The set is empty.
    pub degenerate: bool,
    pub triangle_count_ordered: u64,
    pub naive_cross_checked: bool,
    pub epsilon_min: Rational,
    pub worst_gamma: GfVector,
    /// Descent result for the highest requested level whose hypotheses hold.
    pub flat_search: Option<StructureResult>,
}

pub fn analyze(set: &PointSet, levels: &[u32], limit: SearchLimit) -> Result<AnalysisReport> {
    let r = set.rank();
    let size = set.len();
    let mut pg_freeness = BTreeMap::new();
    for &n in levels {
        pg_freeness.insert(n, is_pg_free_with(set, n, limit)?);
    }
    let crit = critical_number_with(set, limit)?;
    let spectrum = walsh_hadamard(set);
    let t = spectrum.triangle_count();
    let naive_cross_checked = r <= NAIVE_CROSS_CHECK_MAX_RANK;
    if naive_cross_checked {
        let naive = triangle_count_naive(set);
        if naive != t {
            return Err(Error::InternalInconsistency(format!(
                "spectral triangle count {t} differs from naive count {naive}"
            )));
        }
    }
    let u = spectrum.uniformity();
    let target = pg_freeness
        .iter()
        .rev()
        .find(|(&n, w)| n >= 2 && r >= n && w.is_free() && thresholds::dense_for_level(size, n, r))
        .map(|(&n, _)| n);
    let flat_search = match target {
        Some(n) => Some(find_triangle_free_flat(set, n, Strategy::Descent)?.0),
        None => None,
    };
    Ok(AnalysisReport {
        format_version: FORMAT_VERSION,
        library_version: LIBRARY_VERSION.to_string(),
        ambient_rank: r,
        size: size as u64,
        matroid_rank: matroid_rank(set),
        density: u.alpha.clone(),
        pg_freeness,
        critical_number: crit.chi,
        critical_flat: crit.disjoint_flat,
        degenerate: crit.degenerate,
        triangle_count_ordered: t,
        naive_cross_checked,
        epsilon_min: u.epsilon_min,
        worst_gamma: u.worst_gamma,
        flat_search,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::AmbientGeometry;
    use crate::constructions::{affine_set, k5};

    /// Triangles of K5's cycle space counted from the three edges directly.
    fn k5_triangles_brute() -> u64 {
        let e = k5();
        let pts = e.to_vec();
        let mut count = 0;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                for k in j + 1..pts.len() {
                    if pts[i] ^ pts[j] ^ pts[k] == 0 {
                        count += 1;
                    }
                }
            }
        }
        count
    }

    #[test]
    fn k5_report() {
        let rep = analyze(&k5(), &[3], SearchLimit::NONE).unwrap();
        assert_eq!(rep.size, 10);
        assert_eq!(rep.matroid_rank, 4);
        assert!(rep.pg_freeness[&3].is_free());
        assert_eq!(rep.critical_number, 3);
        assert_eq!(rep.triangle_count_ordered, 6 * k5_triangles_brute());
        assert!(rep.naive_cross_checked);
        // 10 is not above (1 - 3/8) 16
        assert!(rep.flat_search.is_none());
    }

    #[test]
    fn affine_report() {
        let rep = analyze(&affine_set(5, GfVector(1)).unwrap(), &[2], SearchLimit::NONE).unwrap();
        assert!(rep.pg_freeness[&2].is_free());
        assert_eq!(rep.critical_number, 1);
        assert_eq!(rep.epsilon_min, Rational::new(1, 2));
        assert_eq!(rep.triangle_count_ordered, 0);
        let fs = rep.flat_search.unwrap();
        assert!(fs.found && fs.density_claim_holds);
    }

    #[test]
    fn empty_report_is_degenerate() {
        let e = PointSet::empty(AmbientGeometry::new(3).unwrap());
        let rep = analyze(&e, &[2], SearchLimit::NONE).unwrap();
        assert!(rep.degenerate);
        assert_eq!(rep.critical_number, 0);
        assert_eq!(rep.density, Rational::zero());
    }

    #[test]
    fn rationals_serialize_as_pairs() {
        let rep = analyze(&affine_set(3, GfVector(1)).unwrap(), &[2], SearchLimit::NONE).unwrap();
        let v = serde_json::to_value(&rep).unwrap();
        assert_eq!(v["epsilon_min"], serde_json::json!({"num": 1, "den": 2}));
        assert_eq!(v["format_version"], FORMAT_VERSION);
    }
}
