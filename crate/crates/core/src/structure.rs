//! Structural searches on dense `PG(n-1,2)`-free sets: cones, hyperplane
//! size bounds, `PG(n-2,2)`-free hyperplanes, triangle-free flats of corank
//! `n-2`, and the check that hyperplanes of the geometry cut hyperplanes of
//! the matroid.

use serde::{Deserialize, Serialize};

use crate::ambient::{enumerate_flats, hyperplane_of, AmbientGeometry, Flat, GfVector};
use crate::error::{Error, Result};
use crate::matroid::{is_pg_free, matroid_rank, pg_free, restrict_to_flat, CoordinateMap};
use crate::pointset::PointSet;
use crate::rational::Rational;
use crate::thresholds::{self, density_threshold};

/// `E_p = {x in E \ {p} : x + p in E}`.
pub fn cone(set: &PointSet, p: GfVector) -> Result<PointSet> {
    if !set.contains(p) {
        return Err(Error::PointNotInSet(p));
    }
    let mut out = PointSet::empty(set.ambient());
    for x in set.iter() {
        if x != p && set.contains(x ^ p) {
            out.insert_unchecked(x);
        }
    }
    Ok(out)
}

/// `|E_p|` without building the set. `p` is not checked for membership.
pub fn cone_size(set: &PointSet, p: GfVector) -> usize {
    set.iter().filter(|&x| x != p && set.contains(x ^ p)).count()
}

fn require_levels(r: u32, n: u32, min_n: u32) -> Result<()> {
    if n < min_n || r < n {
        return Err(Error::Hypothesis(format!("need r >= n >= {min_n}, got r={r}, n={n}")));
    }
    Ok(())
}

fn require_free(set: &PointSet, n: u32) -> Result<()> {
    if let Some(s) = is_pg_free(set, n)?.subspace {
        return Err(Error::Hypothesis(format!(
            "set contains PG({},2) spanned by {:?}",
            n - 1,
            s.basis()
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeReport {
    pub point: GfVector,
    pub cone_size: u64,
    /// `2|E| - 2^r`, possibly negative.
    pub lower_bound: i64,
    pub slack: i64,
    pub cone_free: bool,
}

/// Verifies that the cone at `p` of a `PG(n-1,2)`-free set is
/// `PG(n-2,2)`-free and has at least `2|E| - 2^r` points.
pub fn check_cone_bounds(set: &PointSet, p: GfVector, n: u32) -> Result<ConeReport> {
    require_levels(set.rank(), n, 3)?;
    let c = cone(set, p)?;
    require_free(set, n)?;
    let lower_bound = 2 * set.len() as i64 - (1i64 << set.rank());
    let report = ConeReport {
        point: p,
        cone_size: c.len() as u64,
        lower_bound,
        slack: c.len() as i64 - lower_bound,
        cone_free: pg_free(&c, n - 1),
    };
    if report.slack < 0 || !report.cone_free {
        return Err(Error::InternalInconsistency(format!(
            "cone at {p} violates the cone bounds: {report:?}"
        )));
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HyperplaneBounds {
    pub outside: u64,
    pub inside: u64,
    /// `(1 - 1/2^{n-1}) 2^{r-1}`
    pub outside_bound: Rational,
    pub outside_slack: Rational,
    pub dense: bool,
    /// `(1 - 2/2^{n-1}) 2^{r-1}`, checked only for dense sets.
    pub inside_bound: Rational,
    pub inside_slack: Option<Rational>,
}

/// Size bounds for a hyperplane `H` whose intersection with a
/// `PG(n-1,2)`-free set still contains a `PG(n-2,2)`.
pub fn check_hyperplane_bounds(set: &PointSet, h: &Flat, n: u32) -> Result<HyperplaneBounds> {
    set.ambient().same(h.ambient())?;
    let r = set.rank();
    if h.corank() != 1 {
        return Err(Error::Hypothesis(format!("flat has corank {}, not 1", h.corank())));
    }
    require_levels(r, n, 3)?;
    require_free(set, n)?;
    let (inner, _) = restrict_to_flat(set, h)?;
    if pg_free(&inner, n - 1) {
        return Err(Error::Hypothesis(format!(
            "intersection with the hyperplane is PG({},2)-free",
            n - 2
        )));
    }
    let inside = inner.len() as u64;
    let outside = set.len() as u64 - inside;
    let outside_bound = density_threshold(1, n - 1, r - 1);
    let outside_slack = &outside_bound - &Rational::from(outside);
    let dense = thresholds::dense_for_level(set.len(), n, r);
    let inside_bound = density_threshold(2, n - 1, r - 1);
    let inside_slack = dense.then(|| Rational::from(inside) - inside_bound.clone());
    let broken = outside_slack.is_negative() || inside_slack.as_ref().is_some_and(|s| s.is_negative() || s.is_zero());
    if broken {
        return Err(Error::InternalInconsistency(format!(
            "hyperplane bounds fail: outside {outside} vs {outside_bound}, inside {inside} vs {inside_bound}"
        )));
    }
    Ok(HyperplaneBounds {
        outside,
        inside,
        outside_bound,
        outside_slack,
        dense,
        inside_bound,
        inside_slack,
    })
}

/// A hyperplane together with the re-coordinatized intersection.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HyperplaneChoice {
    pub gamma: GfVector,
    pub hyperplane: Flat,
    pub intersection_size: u64,
    pub restriction: PointSet,
    pub map: CoordinateMap,
}

/// First hyperplane `W_gamma` (scanning `gamma = 1, 2, ...`) whose
/// intersection with the set is `PG(n-2,2)`-free.
pub fn find_pg_free_hyperplane(set: &PointSet, n: u32) -> Result<Option<HyperplaneChoice>> {
    let r = set.rank();
    if n < 3 || r < n {
        return Err(Error::InvalidParameter(format!("need r >= n >= 3, got r={r}, n={n}")));
    }
    let g = set.ambient();
    for gamma in g.points() {
        let h = hyperplane_of(g, gamma)?;
        let (restriction, map) = restrict_to_flat(set, &h)?;
        if pg_free(&restriction, n - 1) {
            return Ok(Some(HyperplaneChoice {
                gamma,
                hyperplane: h,
                intersection_size: restriction.len() as u64,
                restriction,
                map,
            }));
        }
    }
    Ok(None)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Peel off one `PG(k-2,2)`-free hyperplane per level.
    Descent,
    /// Scan every flat of corank `n-2`.
    Exhaustive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureResult {
    pub level: u32,
    pub found: bool,
    pub flat: Option<Flat>,
    pub intersection_size: u64,
    /// `|E ∩ K| > 2^{r(K)} / 4`
    pub density_claim_holds: bool,
}

impl StructureResult {
    fn new(level: u32, hit: Option<(Flat, u64)>) -> Self {
        match hit {
            Some((flat, size)) => StructureResult {
                level,
                found: true,
                density_claim_holds: 4 * size > 1u64 << flat.rank(),
                flat: Some(flat),
                intersection_size: size,
            },
            None => StructureResult {
                level,
                found: false,
                flat: None,
                intersection_size: 0,
                density_claim_holds: false,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescentStep {
    pub level: u32,
    pub ambient_rank: u32,
    /// Normal of the chosen hyperplane in the coordinates of this step.
    pub gamma: GfVector,
    pub size_before: u64,
    pub size_after: u64,
    pub intersection_free: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fallback {
    pub level: u32,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescentTrace {
    pub steps: Vec<DescentStep>,
    pub fallback: Option<Fallback>,
    pub final_flat: Option<Flat>,
    pub final_restriction_size: u64,
}

/// Points of `set` inside `flat`, and whether they contain a line.
fn intersection_profile(set: &PointSet, flat: &Flat) -> (u64, bool) {
    let pts: Vec<u32> = if (set.len() as u64) < flat.point_count() as u64 {
        set.iter().filter(|&p| flat.contains(p)).map(|p| p.0).collect()
    } else {
        flat.points().filter(|&p| set.contains(p)).map(|p| p.0).collect()
    };
    let tri = pts
        .iter()
        .enumerate()
        .any(|(i, &x)| pts[i + 1..].iter().any(|&y| set.contains_word(x ^ y)));
    (pts.len() as u64, tri)
}

/// Triangle-free flat of corank `n-2` with the most points of the set; ties
/// go to the first flat in enumeration order.
fn exhaustive_flat(set: &PointSet, n: u32) -> Result<Option<(Flat, u64)>> {
    let mut best: Option<(Flat, u64)> = None;
    for f in enumerate_flats(set.ambient(), n - 2)? {
        let (size, tri) = intersection_profile(set, &f);
        if !tri && best.as_ref().is_none_or(|(_, s)| size > *s) {
            best = Some((f, size));
        }
    }
    Ok(best)
}

fn lift_through(maps: &[CoordinateMap], f: &Flat) -> Result<Flat> {
    maps.iter().rev().try_fold(f.clone(), |acc, m| m.lift_flat(&acc))
}

/// Searches for a flat `K` of corank `n-2` such that `E ∩ K` is
/// triangle-free.
pub fn find_triangle_free_flat(
    set: &PointSet,
    n: u32,
    strategy: Strategy,
) -> Result<(StructureResult, Option<DescentTrace>)> {
    let r = set.rank();
    if n < 2 || r < n {
        return Err(Error::InvalidParameter(format!("need r >= n >= 2, got r={r}, n={n}")));
    }
    match strategy {
        Strategy::Exhaustive => Ok((StructureResult::new(n, exhaustive_flat(set, n)?), None)),
        Strategy::Descent => {
            let (hit, trace) = descend(set, n)?;
            Ok((StructureResult::new(n, hit), Some(trace)))
        }
    }
}

fn descend(set: &PointSet, n: u32) -> Result<(Option<(Flat, u64)>, DescentTrace)> {
    let mut trace = DescentTrace {
        steps: Vec::new(),
        fallback: None,
        final_flat: None,
        final_restriction_size: 0,
    };
    let mut maps: Vec<CoordinateMap> = Vec::new();
    let mut current = set.clone();
    let mut level = n;
    while level >= 3 {
        let reason = if !thresholds::dense_for_level(current.len(), level, current.rank()) {
            Some(format!(
                "|E| = {} is not above {}",
                current.len(),
                density_threshold(3, level, current.rank())
            ))
        } else if !pg_free(&current, level) {
            Some(format!("set contains PG({},2)", level - 1))
        } else {
            None
        };
        if let Some(reason) = reason {
            trace.fallback = Some(Fallback { level, reason });
            let hit = match exhaustive_flat(&current, level)? {
                Some((f, size)) => Some((lift_through(&maps, &f)?, size)),
                None => None,
            };
            trace.final_flat = hit.as_ref().map(|(f, _)| f.clone());
            trace.final_restriction_size = hit.as_ref().map_or(0, |&(_, s)| s);
            return Ok((hit, trace));
        }
        let choice = find_pg_free_hyperplane(&current, level)?.ok_or_else(|| {
            Error::InternalInconsistency(format!(
                "no PG({},2)-free hyperplane for a dense PG({},2)-free set {}",
                level - 2,
                level - 1,
                current.to_compact()
            ))
        })?;
        trace.steps.push(DescentStep {
            level,
            ambient_rank: current.rank(),
            gamma: choice.gamma,
            size_before: current.len() as u64,
            size_after: choice.intersection_size,
            intersection_free: true,
        });
        maps.push(choice.map);
        current = choice.restriction;
        level -= 1;
    }
    let top = Flat::full(current.ambient());
    let free = pg_free(&current, 2);
    let lifted = lift_through(&maps, &top)?;
    trace.final_flat = Some(lifted.clone());
    trace.final_restriction_size = current.len() as u64;
    Ok((free.then_some((lifted, current.len() as u64)), trace))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReconcileCondition {
    /// `|E| >= (3/4) 2^r`
    ThreeQuarters,
    /// `PG(n-1,2)`-free with `|E| > (1 - 3/2^n) 2^r`, `r >= n >= 3`.
    DenseFree,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReconcileReport {
    pub condition: Option<ReconcileCondition>,
    pub ambient_rank: u32,
    pub matroid_rank: u32,
    pub intersection_rank: u32,
    /// Whether `E ∩ H` is a hyperplane of the matroid `G|E`.
    pub is_matroid_hyperplane: bool,
}

/// Measures whether `E ∩ H` is a hyperplane of `M = G|E`, and asserts it
/// when one of the sufficient conditions holds.
pub fn reconcile_hyperplane(set: &PointSet, h: &Flat, n: u32) -> Result<ReconcileReport> {
    set.ambient().same(h.ambient())?;
    if h.corank() != 1 {
        return Err(Error::InvalidParameter(format!(
            "flat has corank {}, not 1",
            h.corank()
        )));
    }
    let r = set.rank();
    let condition = if (set.len() as u64) * 4 >= 3u64 << r {
        Some(ReconcileCondition::ThreeQuarters)
    } else if n >= 3 && r >= n && thresholds::dense_for_level(set.len(), n, r) && pg_free(set, n) {
        Some(ReconcileCondition::DenseFree)
    } else {
        None
    };
    let rank_m = matroid_rank(set);
    let inner = crate::ambient::rank_of(set.iter().filter(|&p| h.contains(p)));
    let report = ReconcileReport {
        condition,
        ambient_rank: r,
        matroid_rank: rank_m,
        intersection_rank: inner,
        is_matroid_hyperplane: rank_m >= 1 && inner + 1 == rank_m,
    };
    if condition.is_some() && !(rank_m == r && inner + 1 == r) {
        return Err(Error::InternalInconsistency(format!(
            "hyperplane does not reconcile under {condition:?}: {report:?}"
        )));
    }
    Ok(report)
}

/// Every hyperplane of the geometry in canonical order.
pub fn hyperplanes(ambient: AmbientGeometry) -> impl Iterator<Item = Flat> {
    ambient
        .points()
        .map(move |g| hyperplane_of(ambient, g).expect("nonzero normal"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::flat_points;
    use crate::constructions::{bose_burton, k5};
    use crate::matroid::triangle_count_naive;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn amb(r: u32) -> AmbientGeometry {
        AmbientGeometry::new(r).unwrap()
    }

    fn random_set(rng: &mut ChaCha8Rng, r: u32, density: f64) -> PointSet {
        let g = amb(r);
        PointSet::from_points(g, g.points().filter(|_| rng.gen_bool(density))).unwrap()
    }

    /// Cone via the lines through `p`: pairs `{x, x+p}` with `x < x+p`.
    fn cone_by_lines(e: &PointSet, p: GfVector) -> PointSet {
        let mut out = PointSet::empty(e.ambient());
        for x in e.ambient().points() {
            let y = x ^ p;
            if x.0 < y.0 && !y.is_zero() && e.contains(x) && e.contains(y) {
                out.insert(x).unwrap();
                out.insert(y).unwrap();
            }
        }
        out
    }

    #[test]
    fn cone_examples() {
        let g = amb(4);
        let e = PointSet::from_words(g, [1, 2, 3]).unwrap();
        assert_eq!(cone(&e, GfVector(3)).unwrap().to_vec(), vec![1, 2]);
        let e = PointSet::from_words(g, [1, 2, 4]).unwrap();
        assert!(cone(&e, GfVector(1)).unwrap().is_empty());
        assert!(matches!(cone(&e, GfVector(7)), Err(Error::PointNotInSet(_))));
    }

    #[test]
    fn cone_matches_line_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for r in 2..=8 {
            for _ in 0..10 {
                let e = {
                    let d = rng.gen_range(0.2..0.9);
                    random_set(&mut rng, r, d)
                };
                let mut total = 0;
                for p in e.iter() {
                    let c = cone(&e, p).unwrap();
                    assert_eq!(c, cone_by_lines(&e, p));
                    assert_eq!(c.len() % 2, 0);
                    assert!(!c.contains(p));
                    assert_eq!(cone_size(&e, p), c.len());
                    for x in c.iter() {
                        assert!(cone(&e, x).unwrap().contains(p));
                        assert!(c.contains(x ^ p));
                    }
                    total += c.len() as u64;
                }
                assert_eq!(total, triangle_count_naive(&e));
            }
        }
    }

    #[test]
    fn cone_bounds_on_bose_burton() {
        let e = bose_burton(4, 3).unwrap();
        for p in e.iter() {
            let rep = check_cone_bounds(&e, p, 3).unwrap();
            assert!(rep.cone_size >= 8);
            assert_eq!(rep.lower_bound, 8);
        }
        let fano = PointSet::full(amb(3));
        assert!(matches!(
            check_cone_bounds(&fano, GfVector(1), 3),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn hyperplane_bounds_on_bose_burton_minus_point() {
        let g = amb(4);
        let mut e = bose_burton(4, 3).unwrap();
        let first = e.iter().next().unwrap();
        e.remove(first);
        let mut seen = 0;
        for h in hyperplanes(g) {
            match check_hyperplane_bounds(&e, &h, 3) {
                Ok(b) => {
                    assert!(b.outside <= 6);
                    assert!(b.dense);
                    seen += 1;
                }
                Err(Error::Hypothesis(_)) => {}
                Err(other) => panic!("{other}"),
            }
        }
        assert!(seen > 0);
    }

    #[test]
    fn hyperplane_bounds_reject_free_intersection() {
        let g = amb(4);
        let e = PointSet::from_words(g, [1, 2, 4, 8]).unwrap();
        let h = hyperplane_of(g, GfVector(1)).unwrap();
        assert!(matches!(check_hyperplane_bounds(&e, &h, 3), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn pg_free_hyperplane_for_dense_fano_free() {
        let mut e = bose_burton(4, 3).unwrap();
        let first = e.iter().next().unwrap();
        e.remove(first);
        let c = find_pg_free_hyperplane(&e, 3).unwrap().unwrap();
        assert!(c.intersection_size >= 3);
        assert!(pg_free(&c.restriction, 2));
        assert_eq!(
            c.map.lift_set(&c.restriction),
            e.intersection(&flat_points(&c.hyperplane)).unwrap()
        );
    }

    #[test]
    fn structure_examples() {
        let g = amb(4);
        let affine = flat_points(&hyperplane_of(g, GfVector(1)).unwrap()).complement();
        for s in [Strategy::Descent, Strategy::Exhaustive] {
            let (res, _) = find_triangle_free_flat(&affine, 2, s).unwrap();
            assert!(res.found);
            assert_eq!(res.flat.unwrap(), Flat::full(g));
            assert_eq!(res.intersection_size, 8);
        }

        let mut almost = PointSet::full(g);
        almost.remove(GfVector(15));
        for s in [Strategy::Descent, Strategy::Exhaustive] {
            let (res, trace) = find_triangle_free_flat(&almost, 4, s).unwrap();
            assert!(res.found && res.density_claim_holds);
            let k = res.flat.unwrap();
            assert_eq!(k.corank(), 2);
            assert!(res.intersection_size >= 2);
            let (_, tri) = intersection_profile(&almost, &k);
            assert!(!tri);
            if let Some(t) = trace {
                assert_eq!(t.steps.len(), 2);
                assert!(t.fallback.is_none());
                for w in t.steps.windows(2) {
                    assert_eq!(w[0].level, w[1].level + 1);
                    assert_eq!(w[0].ambient_rank, w[1].ambient_rank + 1);
                }
            }
        }
    }

    #[test]
    fn descent_falls_back_below_threshold() {
        let (res, trace) = find_triangle_free_flat(&k5(), 3, Strategy::Descent).unwrap();
        let trace = trace.unwrap();
        assert_eq!(trace.fallback.as_ref().unwrap().level, 3);
        let (ex, _) = find_triangle_free_flat(&k5(), 3, Strategy::Exhaustive).unwrap();
        assert_eq!(res, ex);
    }

    #[test]
    fn descent_and_exhaustive_agree_at_rank_five() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut dense = 0;
        let g = amb(5);
        for _ in 0..200 {
            // a Bose-Burton set in random coordinates, thinned towards the threshold
            let mut basis = Vec::new();
            while basis.len() < 5 {
                let v = GfVector(rng.gen_range(1..32));
                if crate::ambient::rank_of(basis.iter().copied().chain([v])) as usize > basis.len() {
                    basis.push(v);
                }
            }
            let image = |x: GfVector| {
                (0..5)
                    .filter(|&i| x.0 >> i & 1 == 1)
                    .fold(GfVector::ZERO, |acc, i| acc ^ basis[i])
            };
            let mut e = PointSet::from_points(g, bose_burton(5, 3).unwrap().iter().map(image)).unwrap();
            for _ in 0..rng.gen_range(0..4) {
                let x = e.to_vec()[rng.gen_range(0..e.len())];
                e.remove(GfVector(x));
            }
            if !thresholds::dense_for_level(e.len(), 3, 5) || !pg_free(&e, 3) {
                continue;
            }
            dense += 1;
            let (d, trace) = find_triangle_free_flat(&e, 3, Strategy::Descent).unwrap();
            let (x, _) = find_triangle_free_flat(&e, 3, Strategy::Exhaustive).unwrap();
            assert!(trace.unwrap().fallback.is_none());
            assert!(d.found && x.found && d.density_claim_holds && x.density_claim_holds);
            assert!(x.intersection_size >= d.intersection_size);
            for f in [d.flat.unwrap(), x.flat.unwrap()] {
                let inner = e.intersection(&flat_points(&f)).unwrap();
                assert_eq!(triangle_count_naive(&inner), 0);
            }
        }
        assert!(dense > 0);
    }

    #[test]
    fn reconcile_examples() {
        let g = amb(4);
        let mut almost = PointSet::full(g);
        almost.remove(GfVector(6));
        for h in hyperplanes(g) {
            let rep = reconcile_hyperplane(&almost, &h, 3).unwrap();
            assert_eq!(rep.condition, Some(ReconcileCondition::ThreeQuarters));
            assert_eq!(rep.intersection_rank, 3);
        }
        let basis = PointSet::from_words(g, [1, 2, 4, 8]).unwrap();
        let h = hyperplane_of(g, GfVector(1)).unwrap();
        let rep = reconcile_hyperplane(&basis, &h, 3).unwrap();
        assert_eq!(rep.condition, None);
        assert_eq!((rep.matroid_rank, rep.intersection_rank), (4, 3));
        let h = hyperplane_of(g, GfVector(3)).unwrap();
        let rep = reconcile_hyperplane(&basis, &h, 3).unwrap();
        assert_eq!(rep.intersection_rank, 2);
        assert!(!rep.is_matroid_hyperplane);
    }
}
