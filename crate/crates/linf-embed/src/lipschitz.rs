//! 1-Lipschitz functions, tight graphs, edge covers, and embeddings.
//!
//! A function `f` on (part of) a metric space is 1-Lipschitz when
//! `|f(a) - f(b)| <= d(a, b)` for all pairs in its domain. Its tight graph
//! orients an edge `a -> b` exactly when `f(a) - f(b) = d(a, b)`. A family
//! of 1-Lipschitz functions whose tight graphs jointly touch every pair is
//! an edge cover; reading the functions as coordinates gives an isometric
//! embedding into `l∞^k` with `k` the family size, which is the bridge
//! between covers and the minimal embedding dimension.
//!
//! Partial functions extend to one more point without losing the Lipschitz
//! property by taking the lower endpoint of the feasible interval,
//! `f(x0) = max_y (f(y) - d(y, x0))`; folding that over missing points in
//! ascending order lifts a cover of a subspace to the whole space.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::metric::MetricSpace;

/// Why a function family is not a valid Lipschitz object or cover.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LipschitzError {
    /// `|f(a) - f(b)|` exceeds `d(a, b)` by `excess`.
    NotLipschitz {
        a: usize,
        b: usize,
        excess: BigRational,
    },
    /// A domain point is outside `0..n`.
    OutOfRange { point: usize, n: usize },
    /// Row or coordinate counts do not match.
    DimensionMismatch { expected: usize, got: usize },
    /// Pairs left uncovered by every tight graph.
    IncompleteCover { missing: Vec<(usize, usize)> },
    /// A total function was required but `missing_point` has no value.
    PartialFunction { missing_point: usize },
}

impl fmt::Display for LipschitzError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LipschitzError::NotLipschitz { a, b, excess } => {
                write!(f, "|f({a}) - f({b})| exceeds the distance by {excess}")
            }
            LipschitzError::OutOfRange { point, n } => {
                write!(f, "point {point} outside space of {n} points")
            }
            LipschitzError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            LipschitzError::IncompleteCover { missing } => {
                write!(f, "cover misses {} pair(s), first {:?}", missing.len(), missing[0])
            }
            LipschitzError::PartialFunction { missing_point } => {
                write!(f, "function undefined at point {missing_point}")
            }
        }
    }
}

impl std::error::Error for LipschitzError {}

/// A 1-Lipschitz function on a subset of the points of a metric space.
///
/// The invariant is checked at construction and maintained by every public
/// operation, so a value of this type is always 1-Lipschitz on its domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LipschitzFn {
    values: BTreeMap<usize, BigRational>,
}

impl LipschitzFn {
    /// Validates the Lipschitz condition on every domain pair.
    pub fn new(
        ms: &MetricSpace,
        values: BTreeMap<usize, BigRational>,
    ) -> Result<LipschitzFn, LipschitzError> {
        assert!(!values.is_empty(), "empty domain");
        if let Some((&p, _)) = values.iter().next_back() {
            if p >= ms.n() {
                return Err(LipschitzError::OutOfRange { point: p, n: ms.n() });
            }
        }
        let pts: Vec<(&usize, &BigRational)> = values.iter().collect();
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let (&a, va) = pts[i];
                let (&b, vb) = pts[j];
                let gap = (va - vb).abs();
                let d = ms.dist(a, b);
                if gap > *d {
                    return Err(LipschitzError::NotLipschitz {
                        a,
                        b,
                        excess: gap - d,
                    });
                }
            }
        }
        Ok(LipschitzFn { values })
    }

    /// The total function `x -> d(z, x)`, 1-Lipschitz by the triangle
    /// inequality.
    pub fn distance_function(ms: &MetricSpace, z: usize) -> LipschitzFn {
        assert!(z < ms.n(), "point out of range");
        let values = (0..ms.n()).map(|x| (x, ms.dist(z, x).clone())).collect();
        LipschitzFn { values }
    }

    /// Domain points in ascending order.
    pub fn domain(&self) -> impl Iterator<Item = usize> + '_ {
        self.values.keys().copied()
    }

    pub fn contains(&self, p: usize) -> bool {
        self.values.contains_key(&p)
    }

    pub fn value(&self, p: usize) -> Option<&BigRational> {
        self.values.get(&p)
    }

    pub fn domain_len(&self) -> usize {
        self.values.len()
    }

    pub fn is_total(&self, ms: &MetricSpace) -> bool {
        self.values.len() == ms.n()
    }

    /// Restriction to the given domain points (all must be present).
    pub fn restricted(&self, points: &[usize]) -> LipschitzFn {
        let values = points
            .iter()
            .map(|&p| (p, self.values[&p].clone()))
            .collect();
        LipschitzFn { values }
    }

    /// Pushes domain point `i` to `points[i]`. Caller guarantees the map is
    /// strictly increasing and distance-preserving into `ms`, which keeps
    /// the Lipschitz invariant without revalidation.
    pub(crate) fn relabeled(&self, points: &[usize]) -> LipschitzFn {
        let values = self
            .values
            .iter()
            .map(|(&p, v)| (points[p], v.clone()))
            .collect();
        LipschitzFn { values }
    }

    /// Extends to one more point at the lower endpoint of the feasible
    /// interval, `max_y (f(y) - d(y, x0))`, which never breaks the
    /// Lipschitz condition.
    pub fn extend(&self, ms: &MetricSpace, x0: usize) -> LipschitzFn {
        assert!(x0 < ms.n(), "point out of range");
        assert!(!self.contains(x0), "point already in domain");
        let val = self
            .values
            .iter()
            .map(|(&y, v)| v - ms.dist(y, x0))
            .max()
            .expect("nonempty domain");
        let mut values = self.values.clone();
        values.insert(x0, val);
        LipschitzFn { values }
    }

    /// Extends to every missing point of the space in ascending order.
    pub fn extend_to_all(&self, ms: &MetricSpace) -> LipschitzFn {
        let mut out = self.clone();
        for p in 0..ms.n() {
            if !out.contains(p) {
                out = out.extend(ms, p);
            }
        }
        out
    }

    /// Values as a dense vector over `0..n`; fails on a partial function.
    pub fn dense_values(&self, n: usize) -> Result<Vec<BigRational>, LipschitzError> {
        (0..n)
            .map(|p| {
                self.values
                    .get(&p)
                    .cloned()
                    .ok_or(LipschitzError::PartialFunction { missing_point: p })
            })
            .collect()
    }

    /// All tight pairs, oriented from the larger value to the smaller, in
    /// lexicographic order of the underlying unordered pair. Re-checks the
    /// Lipschitz condition on the way.
    pub fn tight_graph(&self, ms: &MetricSpace) -> Result<TightGraph, LipschitzError> {
        let pts: Vec<(&usize, &BigRational)> = self.values.iter().collect();
        let mut edges = Vec::new();
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let (&a, va) = pts[i];
                let (&b, vb) = pts[j];
                let diff = va - vb;
                let d = ms.dist(a, b);
                if diff == *d {
                    edges.push((a, b));
                } else if -&diff == *d {
                    edges.push((b, a));
                } else if diff.abs() > *d {
                    return Err(LipschitzError::NotLipschitz {
                        a,
                        b,
                        excess: diff.abs() - d,
                    });
                }
            }
        }
        Ok(TightGraph { edges })
    }
}

/// Oriented tight edges of a 1-Lipschitz function: `(a, b)` means
/// `f(a) - f(b) = d(a, b)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TightGraph {
    pub edges: Vec<(usize, usize)>,
}

impl TightGraph {
    /// Unordered pairs touched by some tight edge, normalized `(min, max)`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges
            .iter()
            .map(|&(a, b)| if a < b { (a, b) } else { (b, a) })
    }

    pub fn covers(&self, a: usize, b: usize) -> bool {
        let key = if a < b { (a, b) } else { (b, a) };
        self.pairs().any(|p| p == key)
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// A family of 1-Lipschitz functions meant to cover all pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeCover {
    pub fns: Vec<LipschitzFn>,
}

impl EdgeCover {
    pub fn new(fns: Vec<LipschitzFn>) -> EdgeCover {
        EdgeCover { fns }
    }

    /// Number of functions, hence embedding coordinates.
    pub fn k(&self) -> usize {
        self.fns.len()
    }

    /// Pairs of the space covered by no tight graph, in lexicographic
    /// order. Empty means the cover is complete.
    pub fn missing_pairs(&self, ms: &MetricSpace) -> Result<Vec<(usize, usize)>, LipschitzError> {
        let mut covered: BTreeSet<(usize, usize)> = BTreeSet::new();
        for f in &self.fns {
            covered.extend(f.tight_graph(ms)?.pairs());
        }
        Ok(ms.pairs().filter(|p| !covered.contains(p)).collect())
    }
}

/// Lifts a cover of a common-domain subset `Y` to the whole space: each
/// function is extended over the missing points in ascending order, then
/// one distance function per missing point is appended, also ascending.
/// Every pair inside `Y` stays covered, and a pair touching `z` outside
/// `Y` is covered by the distance function at `z`.
pub fn lift_cover(cover: &EdgeCover, ms: &MetricSpace) -> EdgeCover {
    let domain: BTreeSet<usize> = cover
        .fns
        .first()
        .map(|f| f.domain().collect())
        .unwrap_or_default();
    for f in &cover.fns {
        assert!(
            f.domain().collect::<BTreeSet<_>>() == domain,
            "cover functions must share one domain"
        );
    }
    let missing: Vec<usize> = (0..ms.n()).filter(|p| !domain.contains(p)).collect();
    let mut fns: Vec<LipschitzFn> = cover
        .fns
        .iter()
        .map(|f| missing.iter().fold(f.clone(), |acc, &z| acc.extend(ms, z)))
        .collect();
    for &z in &missing {
        fns.push(LipschitzFn::distance_function(ms, z));
    }
    EdgeCover::new(fns)
}

/// Points of `l∞^k`, one row of `k` exact coordinates per point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Embedding {
    n: usize,
    k: usize,
    coords: Vec<Vec<BigRational>>,
}

impl Embedding {
    /// Builds from rows, requiring a rectangular shape.
    pub fn new(coords: Vec<Vec<BigRational>>) -> Result<Embedding, LipschitzError> {
        assert!(!coords.is_empty(), "need at least one point");
        let k = coords[0].len();
        for row in &coords {
            if row.len() != k {
                return Err(LipschitzError::DimensionMismatch {
                    expected: k,
                    got: row.len(),
                });
            }
        }
        Ok(Embedding {
            n: coords.len(),
            k,
            coords,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn coords(&self, p: usize) -> &[BigRational] {
        &self.coords[p]
    }

    pub fn rows(&self) -> &[Vec<BigRational>] {
        &self.coords
    }

    /// `max_i |x_a[i] - x_b[i]|`; zero when `k = 0`.
    pub fn linf_distance(&self, a: usize, b: usize) -> BigRational {
        (0..self.k)
            .map(|i| (&self.coords[a][i] - &self.coords[b][i]).abs())
            .max()
            .unwrap_or_else(BigRational::zero)
    }
}

/// First pair where the embedding misses the metric.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeviationWitness {
    pub pair: (usize, usize),
    pub achieved: BigRational,
    pub expected: BigRational,
}

/// Outcome of exact isometry verification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyReport {
    pub isometric: bool,
    pub witness: Option<DeviationWitness>,
}

/// Recomputes every pairwise `l∞` distance and compares exactly.
pub fn verify_embedding(ms: &MetricSpace, emb: &Embedding) -> Result<VerifyReport, LipschitzError> {
    if emb.n() != ms.n() {
        return Err(LipschitzError::DimensionMismatch {
            expected: ms.n(),
            got: emb.n(),
        });
    }
    for (a, b) in ms.pairs() {
        let achieved = emb.linf_distance(a, b);
        if achieved != *ms.dist(a, b) {
            return Ok(VerifyReport {
                isometric: false,
                witness: Some(DeviationWitness {
                    pair: (a, b),
                    achieved,
                    expected: ms.dist(a, b).clone(),
                }),
            });
        }
    }
    Ok(VerifyReport {
        isometric: true,
        witness: None,
    })
}

/// Largest additive deviation `| linf(a,b) - d(a,b) |` over all pairs;
/// zero for a single point.
pub fn max_abs_deviation(
    ms: &MetricSpace,
    emb: &Embedding,
) -> Result<BigRational, LipschitzError> {
    if emb.n() != ms.n() {
        return Err(LipschitzError::DimensionMismatch {
            expected: ms.n(),
            got: emb.n(),
        });
    }
    Ok(ms
        .pairs()
        .map(|(a, b)| (emb.linf_distance(a, b) - ms.dist(a, b)).abs())
        .max()
        .unwrap_or_else(BigRational::zero))
}

/// The baseline coordinate functions `f_y(x) = d(x, y) - d(x0, y)` for all
/// `y != x0` in ascending order. Each is total and 1-Lipschitz, the family
/// covers every pair, and the induced embedding is isometric with
/// `k = n - 1`.
pub fn frechet_functions(ms: &MetricSpace, x0: usize) -> Vec<LipschitzFn> {
    assert!(x0 < ms.n(), "basepoint out of range");
    (0..ms.n())
        .filter(|&y| y != x0)
        .map(|y| {
            let values: BTreeMap<usize, BigRational> = (0..ms.n())
                .map(|x| (x, ms.dist(x, y) - ms.dist(x0, y)))
                .collect();
            LipschitzFn::new(ms, values).expect("distance differences are 1-Lipschitz")
        })
        .collect()
}

/// The baseline embedding into `l∞^{n-1}` anchored at `x0`.
pub fn frechet_embedding(ms: &MetricSpace, x0: usize) -> Embedding {
    let fns = frechet_functions(ms, x0);
    let coords = (0..ms.n())
        .map(|p| fns.iter().map(|f| f.value(p).unwrap().clone()).collect())
        .collect();
    Embedding::new(coords).expect("rectangular by construction")
}

/// Reads a complete cover of total functions as coordinates. Errors if any
/// pair is uncovered or any function is partial.
pub fn embedding_from_cover(
    ms: &MetricSpace,
    cover: &EdgeCover,
) -> Result<Embedding, LipschitzError> {
    let missing = cover.missing_pairs(ms)?;
    if !missing.is_empty() {
        return Err(LipschitzError::IncompleteCover { missing });
    }
    let dense: Vec<Vec<BigRational>> = cover
        .fns
        .iter()
        .map(|f| f.dense_values(ms.n()))
        .collect::<Result<_, _>>()?;
    let coords = (0..ms.n())
        .map(|p| dense.iter().map(|col| col[p].clone()).collect())
        .collect();
    Embedding::new(coords)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{generate, SpaceKind};
    use crate::rat;
    use proptest::prelude::*;

    /// Line metric on reals 0, 2, 5.
    fn line_025() -> MetricSpace {
        MetricSpace::from_upper(3, vec![rat(2, 1), rat(5, 1), rat(3, 1)]).unwrap()
    }

    /// Line metric on reals 0, 1, 2.
    fn line_012() -> MetricSpace {
        MetricSpace::from_upper(3, vec![rat(1, 1), rat(2, 1), rat(1, 1)]).unwrap()
    }

    fn partial(ms: &MetricSpace, pairs: &[(usize, i64, i64)]) -> LipschitzFn {
        let values = pairs.iter().map(|&(p, num, den)| (p, rat(num, den))).collect();
        LipschitzFn::new(ms, values).unwrap()
    }

    #[test]
    fn extension_takes_lower_feasible_endpoint() {
        let ms = line_025();
        let f = partial(&ms, &[(0, 0, 1), (1, 2, 1)]);
        let g = f.extend(&ms, 2);
        // Feasible interval for f(2) is [max(0-5, 2-3), min(0+5, 2+3)] =
        // [-1, 5].
        assert_eq!(*g.value(2).unwrap(), rat(-1, 1));
        assert!(g.tight_graph(&ms).is_ok());
    }

    #[test]
    fn extension_to_all_is_ascending_fold() {
        let ms = generate(SpaceKind::Random, 6, 21).unwrap();
        let f = LipschitzFn::distance_function(&ms, 3).restricted(&[2, 3]);
        let g = f.extend_to_all(&ms);
        let mut h = f.clone();
        for p in [0, 1, 4, 5] {
            h = h.extend(&ms, p);
        }
        assert_eq!(g, h);
        assert!(g.is_total(&ms));
    }

    #[test]
    fn rejects_functions_violating_lipschitz() {
        let ms = line_025();
        let values = [(0, rat(0, 1)), (1, rat(5, 1))].into_iter().collect();
        let err = LipschitzFn::new(&ms, values).unwrap_err();
        assert_eq!(
            err,
            LipschitzError::NotLipschitz {
                a: 0,
                b: 1,
                excess: rat(3, 1),
            }
        );
    }

    #[test]
    fn tight_graph_orients_larger_to_smaller() {
        let ms = line_012();
        let f = partial(&ms, &[(0, 0, 1), (1, 1, 1), (2, 2, 1)]);
        let tg = f.tight_graph(&ms).unwrap();
        assert_eq!(tg.edges, vec![(1, 0), (2, 0), (2, 1)]);
        assert!(tg.covers(0, 2) && tg.covers(2, 1));
    }

    #[test]
    fn tight_graph_of_slack_function_is_empty() {
        let ms = line_025();
        let f = partial(&ms, &[(0, 0, 1), (1, 1, 2), (2, 0, 1)]);
        let tg = f.tight_graph(&ms).unwrap();
        assert!(tg.is_empty());
    }

    #[test]
    fn baseline_embedding_matches_hand_rows() {
        let ms =
            MetricSpace::from_upper(3, vec![rat(1, 1), rat(2, 1), rat(5, 2)]).unwrap();
        let emb = frechet_embedding(&ms, 0);
        assert_eq!(emb.k(), 2);
        assert_eq!(emb.coords(0), &[rat(0, 1), rat(0, 1)]);
        assert_eq!(emb.coords(1), &[rat(-1, 1), rat(1, 2)]);
        assert_eq!(emb.coords(2), &[rat(3, 2), rat(-2, 1)]);
        assert!(verify_embedding(&ms, &emb).unwrap().isometric);
    }

    #[test]
    fn baseline_cover_is_complete_for_any_basepoint() {
        let ms = generate(SpaceKind::Random, 7, 5).unwrap();
        for x0 in 0..7 {
            let cover = EdgeCover::new(frechet_functions(&ms, x0));
            assert_eq!(cover.k(), 6);
            assert!(cover.missing_pairs(&ms).unwrap().is_empty());
            let emb = embedding_from_cover(&ms, &cover).unwrap();
            assert!(verify_embedding(&ms, &emb).unwrap().isometric);
            assert_eq!(emb, frechet_embedding(&ms, x0));
        }
    }

    #[test]
    fn dropping_a_function_exposes_missing_pairs() {
        let ms = MetricSpace::from_upper(3, vec![rat(1, 1), rat(2, 1), rat(5, 2)]).unwrap();
        let mut fns = frechet_functions(&ms, 0);
        fns.pop();
        let cover = EdgeCover::new(fns);
        assert_eq!(cover.missing_pairs(&ms).unwrap(), vec![(0, 2)]);
        assert_eq!(
            embedding_from_cover(&ms, &cover).unwrap_err(),
            LipschitzError::IncompleteCover {
                missing: vec![(0, 2)],
            }
        );
    }

    #[test]
    fn lift_appends_distance_functions_and_extends() {
        let ms = line_025();
        // One function on Y = {0, 1} covering the pair (0, 1) tightly.
        let f = partial(&ms, &[(0, 0, 1), (1, 2, 1)]);
        let lifted = lift_cover(&EdgeCover::new(vec![f]), &ms);
        assert_eq!(lifted.k(), 2);
        assert_eq!(*lifted.fns[0].value(2).unwrap(), rat(-1, 1));
        assert_eq!(
            lifted.fns[1].dense_values(3).unwrap(),
            vec![rat(5, 1), rat(3, 1), rat(0, 1)]
        );
        assert!(lifted.missing_pairs(&ms).unwrap().is_empty());
    }

    #[test]
    fn lift_of_total_cover_is_identity() {
        let ms = generate(SpaceKind::Random, 5, 8).unwrap();
        let cover = EdgeCover::new(frechet_functions(&ms, 2));
        let lifted = lift_cover(&cover, &ms);
        assert_eq!(lifted, cover);
    }

    #[test]
    fn verify_catches_a_corrupted_coordinate() {
        let ms = generate(SpaceKind::Random, 5, 13).unwrap();
        let emb = frechet_embedding(&ms, 0);
        let mut rows = emb.rows().to_vec();
        rows[3][1] += rat(17, 3);
        let bad = Embedding::new(rows).unwrap();
        let report = verify_embedding(&ms, &bad).unwrap();
        assert!(!report.isometric);
        let w = report.witness.unwrap();
        assert_ne!(w.achieved, w.expected);
        assert!(max_abs_deviation(&ms, &bad).unwrap() > rat(0, 1));
    }

    #[test]
    fn single_point_embeds_in_zero_coordinates() {
        let ms = MetricSpace::from_upper(1, vec![]).unwrap();
        let emb = frechet_embedding(&ms, 0);
        assert_eq!((emb.n(), emb.k()), (1, 0));
        assert!(verify_embedding(&ms, &emb).unwrap().isometric);
        assert_eq!(max_abs_deviation(&ms, &emb).unwrap(), rat(0, 1));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        /// Any single extension lands inside the feasible interval of every
        /// domain point and keeps the function 1-Lipschitz.
        #[test]
        fn extension_stays_feasible(seed in 0u64..500, z in 0usize..6, shift in -20i64..20) {
            let ms = generate(SpaceKind::Random, 6, seed).unwrap();
            let base = LipschitzFn::distance_function(&ms, z);
            let mut values: BTreeMap<usize, BigRational> = BTreeMap::new();
            for p in [0usize, 2, 5] {
                values.insert(p, base.value(p).unwrap() + rat(shift, 7));
            }
            let f = LipschitzFn::new(&ms, values).unwrap();
            let g = f.extend(&ms, 3);
            let v = g.value(3).unwrap();
            for y in f.domain() {
                prop_assert!((v - f.value(y).unwrap()).abs() <= *ms.dist(y, 3));
            }
            prop_assert!(g.tight_graph(&ms).is_ok());
        }

        /// Lifting always yields a complete cover and an exact embedding.
        #[test]
        fn lifted_covers_verify(seed in 0u64..300) {
            let ms = generate(SpaceKind::Random, 6, seed).unwrap();
            let f = LipschitzFn::distance_function(&ms, 1).restricted(&[0, 1, 4]);
            let g = LipschitzFn::distance_function(&ms, 4).restricted(&[0, 1, 4]);
            let lifted = lift_cover(&EdgeCover::new(vec![f, g]), &ms);
            prop_assert_eq!(lifted.k(), 5);
            prop_assert!(lifted.missing_pairs(&ms).unwrap().is_empty());
            let emb = embedding_from_cover(&ms, &lifted).unwrap();
            prop_assert!(verify_embedding(&ms, &emb).unwrap().isometric);
        }
    }
}
