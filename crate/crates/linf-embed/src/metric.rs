//! Finite metric spaces over exact rationals.
//!
//! A [`MetricSpace`] stores the upper triangle of a symmetric distance
//! matrix. Construction validates positivity and every triangle inequality
//! exactly, so a value of this type is always a genuine metric. Point
//! indices `0..n` double as the total order used by quadruple coloring.
//!
//! "Generic" throughout this crate means the computable surrogate: within
//! every quadruple the three pair-sums are pairwise distinct. Whether all
//! distances are pairwise distinct is tracked separately in the report.

use std::fmt;
use std::sync::LazyLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coloring::{self, QuadColor};

static ZERO: LazyLock<BigRational> = LazyLock::new(BigRational::zero);

/// Denominator grid for all seeded random draws; keeps numerators small.
const GRAIN: i64 = 1 << 20;

/// Retry cap for perturbation and generation loops.
const MAX_ATTEMPTS: usize = 1000;

/// Why a distance table is not a metric.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MetricError {
    /// Row `row` has `len` entries, expected `n`.
    NotSquare { row: usize, len: usize, n: usize },
    /// Diagonal entry `(i, i)` is nonzero.
    NonZeroDiagonal { i: usize },
    /// `table[i][j] != table[j][i]`.
    AsymmetricInput { i: usize, j: usize },
    /// `dist(i, j) <= 0` for distinct points.
    NonPositiveDistance { i: usize, j: usize, value: BigRational },
    /// `dist(a, b) > dist(a, via) + dist(via, b)`, by `deficit`.
    TriangleViolation {
        a: usize,
        via: usize,
        b: usize,
        deficit: BigRational,
    },
}

impl fmt::Display for MetricError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricError::NotSquare { row, len, n } => {
                write!(f, "row {row} has {len} entries, expected {n}")
            }
            MetricError::NonZeroDiagonal { i } => write!(f, "diagonal entry ({i}, {i}) is nonzero"),
            MetricError::AsymmetricInput { i, j } => {
                write!(f, "entries ({i}, {j}) and ({j}, {i}) differ")
            }
            MetricError::NonPositiveDistance { i, j, value } => {
                write!(f, "distance ({i}, {j}) = {value} is not positive")
            }
            MetricError::TriangleViolation { a, via, b, deficit } => write!(
                f,
                "triangle inequality fails: dist({a}, {b}) exceeds dist({a}, {via}) + dist({via}, {b}) by {deficit}"
            ),
        }
    }
}

impl std::error::Error for MetricError {}

/// First genericity defect found, in lexicographic scan order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GenericityViolation {
    /// Two of the three pair-sums of `quad` coincide.
    TiedQuadSums {
        quad: [usize; 4],
        sums: [BigRational; 3],
    },
    /// Two distinct pairs carry the same distance.
    EqualDistances {
        first: (usize, usize),
        second: (usize, usize),
    },
}

/// Outcome of the genericity scan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenericityReport {
    /// All quadruples have pairwise distinct pair-sums.
    pub quad_generic: bool,
    /// All `C(n, 2)` distances are pairwise distinct.
    pub distinct_distances: bool,
    /// First defect found, if any (quad ties scanned before distance ties).
    pub first_violation: Option<GenericityViolation>,
}

/// Perturbation did not reach a generic space within the retry cap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PerturbationFailed {
    pub attempts: usize,
}

impl fmt::Display for PerturbationFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "no generic perturbation found after {} attempts",
            self.attempts
        )
    }
}

impl std::error::Error for PerturbationFailed {}

/// What `generate` should produce.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpaceKind {
    /// Uniform grid distances in `[1, 2]`, perturbed to generic.
    Random,
    /// Every quadruple carries the given color.
    Mono(QuadColor),
}

/// Why generation failed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GenError {
    /// No generator family exists for colors 213 and 312.
    UnsupportedColor(QuadColor),
    /// Jittered family never passed verification within the retry cap.
    Failed {
        color: QuadColor,
        n: usize,
        attempts: usize,
    },
    /// Random-kind perturbation failed.
    Perturbation(PerturbationFailed),
}

impl fmt::Display for GenError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenError::UnsupportedColor(c) => {
                write!(f, "no monochromatic generator for color {c}")
            }
            GenError::Failed { color, n, attempts } => write!(
                f,
                "generator for color {color} on {n} points failed verification {attempts} times"
            ),
            GenError::Perturbation(p) => p.fmt(f),
        }
    }
}

impl std::error::Error for GenError {}

/// A finite metric space on points `0..n` with exact rational distances.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricSpace {
    n: usize,
    /// Upper triangle in row-major pair order `(0,1), (0,2), ..., (n-2,n-1)`.
    upper: Vec<BigRational>,
}

impl MetricSpace {
    fn pos(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.n);
        i * (2 * self.n - i - 1) / 2 + (j - i - 1)
    }

    /// Number of points.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Distance between two points; `dist(a, a)` is zero.
    pub fn dist(&self, a: usize, b: usize) -> &BigRational {
        assert!(a < self.n && b < self.n, "point out of range");
        if a == b {
            &ZERO
        } else {
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            &self.upper[self.pos(i, j)]
        }
    }

    /// All unordered pairs in lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> {
        let n = self.n;
        (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
    }

    /// Raw upper triangle in pair order.
    pub fn upper_triangle(&self) -> &[BigRational] {
        &self.upper
    }

    /// Smallest distance; `None` for a single point.
    pub fn min_distance(&self) -> Option<&BigRational> {
        self.upper.iter().min()
    }

    /// Builds a space from a full square distance table.
    pub fn validate(table: &[Vec<BigRational>]) -> Result<MetricSpace, MetricError> {
        let n = table.len();
        assert!(n >= 1, "need at least one point");
        for (row, r) in table.iter().enumerate() {
            if r.len() != n {
                return Err(MetricError::NotSquare {
                    row,
                    len: r.len(),
                    n,
                });
            }
        }
        for (i, row) in table.iter().enumerate() {
            if !row[i].is_zero() {
                return Err(MetricError::NonZeroDiagonal { i });
            }
            for (j, other) in table.iter().enumerate().skip(i + 1) {
                if row[j] != other[i] {
                    return Err(MetricError::AsymmetricInput { i, j });
                }
            }
        }
        let mut upper = Vec::with_capacity(n * (n - 1) / 2);
        for (i, row) in table.iter().enumerate() {
            upper.extend_from_slice(&row[i + 1..]);
        }
        MetricSpace::from_upper(n, upper)
    }

    /// Builds a space from the upper triangle in pair order.
    pub fn from_upper(n: usize, upper: Vec<BigRational>) -> Result<MetricSpace, MetricError> {
        assert!(n >= 1, "need at least one point");
        assert_eq!(upper.len(), n * (n - 1) / 2, "wrong triangle length");
        let ms = MetricSpace { n, upper };
        for (i, j) in ms.pairs() {
            let d = ms.dist(i, j);
            if !d.is_positive() {
                return Err(MetricError::NonPositiveDistance {
                    i,
                    j,
                    value: d.clone(),
                });
            }
        }
        ms.check_triangles()?;
        Ok(ms)
    }

    fn check_triangles(&self) -> Result<(), MetricError> {
        for i in 0..self.n {
            for j in i + 1..self.n {
                for k in j + 1..self.n {
                    // Each of the three points plays the "via" role once.
                    for (a, via, b) in [(i, j, k), (j, i, k), (i, k, j)] {
                        let direct = self.dist(a, b);
                        let around = self.dist(a, via) + self.dist(via, b);
                        if *direct > around {
                            return Err(MetricError::TriangleViolation {
                                a,
                                via,
                                b,
                                deficit: direct - around,
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// The three pair-sums of a quadruple `a < b < c < d`:
    /// `[ab+cd, ac+bd, ad+bc]`.
    pub fn quad_sums(&self, q: [usize; 4]) -> [BigRational; 3] {
        let [a, b, c, d] = q;
        assert!(a < b && b < c && c < d && d < self.n, "bad quadruple");
        [
            self.dist(a, b) + self.dist(c, d),
            self.dist(a, c) + self.dist(b, d),
            self.dist(a, d) + self.dist(b, c),
        ]
    }

    /// Scans all quadruples and all distance pairs for genericity defects.
    pub fn genericity(&self) -> GenericityReport {
        let mut quad_violation = None;
        for q in coloring::quadruples(self.n) {
            let sums = self.quad_sums(q);
            if sums[0] == sums[1] || sums[0] == sums[2] || sums[1] == sums[2] {
                quad_violation = Some(GenericityViolation::TiedQuadSums { quad: q, sums });
                break;
            }
        }
        let mut dist_violation = None;
        let mut tagged: Vec<((usize, usize), &BigRational)> =
            self.pairs().map(|(i, j)| ((i, j), self.dist(i, j))).collect();
        tagged.sort_by(|x, y| x.1.cmp(y.1).then(x.0.cmp(&y.0)));
        for w in tagged.windows(2) {
            if w[0].1 == w[1].1 {
                dist_violation = Some(GenericityViolation::EqualDistances {
                    first: w[0].0,
                    second: w[1].0,
                });
                break;
            }
        }
        GenericityReport {
            quad_generic: quad_violation.is_none(),
            distinct_distances: dist_violation.is_none(),
            first_violation: quad_violation.or(dist_violation),
        }
    }

    /// Adds an independent seeded increment in `[eps, 2*eps]` to every
    /// distance and retries until the result is quad-generic with distinct
    /// distances. Increments keep the triangle inequality: each pair sum
    /// grows by at least `2*eps` while the opposite side grows by at most
    /// `2*eps`.
    pub fn perturb_to_generic(
        &self,
        eps: &BigRational,
        seed: u64,
    ) -> Result<MetricSpace, PerturbationFailed> {
        assert!(eps.is_positive(), "perturbation size must be positive");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grain = BigRational::from_integer(GRAIN.into());
        for _ in 0..MAX_ATTEMPTS {
            let upper: Vec<BigRational> = self
                .upper
                .iter()
                .map(|d| {
                    let k: i64 = rng.random_range(0..=GRAIN);
                    let step = BigRational::from_integer(k.into()) / &grain;
                    d + eps * (BigRational::one() + step)
                })
                .collect();
            let ms = MetricSpace::from_upper(self.n, upper)
                .expect("increments in [eps, 2eps] preserve the triangle inequality");
            let report = ms.genericity();
            if report.quad_generic && report.distinct_distances {
                return Ok(ms);
            }
        }
        Err(PerturbationFailed {
            attempts: MAX_ATTEMPTS,
        })
    }

    /// Restriction to a strictly increasing list of points, reindexed to
    /// `0..points.len()`.
    pub fn induced(&self, points: &[usize]) -> MetricSpace {
        assert!(!points.is_empty(), "need at least one point");
        assert!(
            points.windows(2).all(|w| w[0] < w[1]),
            "points must be strictly increasing"
        );
        assert!(*points.last().unwrap() < self.n, "point out of range");
        let m = points.len();
        let mut upper = Vec::with_capacity(m * (m - 1) / 2);
        for i in 0..m {
            for j in i + 1..m {
                upper.push(self.dist(points[i], points[j]).clone());
            }
        }
        MetricSpace { n: m, upper }
    }

    /// Rescales all distances by a positive rational.
    pub fn scaled(&self, lambda: &BigRational) -> MetricSpace {
        assert!(lambda.is_positive(), "scale factor must be positive");
        MetricSpace {
            n: self.n,
            upper: self.upper.iter().map(|d| d * lambda).collect(),
        }
    }
}

fn big(v: i64) -> BigInt {
    BigInt::from(v)
}

/// Base distance of the generator family for `color` on `n` points at
/// separation `t = j - i`. All four families stay within `(1, 2)`, which
/// makes every triangle inequality strict.
fn family_distance(color: QuadColor, n: usize, t: usize) -> BigRational {
    let n = big(n as i64);
    let t = big(t as i64);
    let n2 = &n * &n;
    let n3 = &n2 * &n;
    let t2 = &t * &t;
    match color {
        // convex growth: 1 + t^2 / n^2
        QuadColor::C321 => BigRational::new(&n2 + &t2, n2),
        // concave growth: 1 + (t*n^2 - t^2) / n^3
        QuadColor::C231 => BigRational::new(&n3 + &t * &n2 - &t2, n3),
        // decreasing convex-complement: 1 + (n^2 - t^2) / n^3
        QuadColor::C123 => BigRational::new(&n3 + &n2 - &t2, n3),
        // decreasing then rising tail: 1 + (n^3 - t*n^2 + t^2) / n^3
        QuadColor::C132 => BigRational::new(&n3 * 2 - &t * &n2 + &t2, n3),
        QuadColor::C213 | QuadColor::C312 => unreachable!("no generator family"),
    }
}

/// Smallest gap between two pair-sums of any quadruple, `None` if `n < 4`.
fn min_quad_gap(ms: &MetricSpace) -> Option<BigRational> {
    let mut best: Option<BigRational> = None;
    for q in coloring::quadruples(ms.n()) {
        let s = ms.quad_sums(q);
        for (x, y) in [(0, 1), (0, 2), (1, 2)] {
            let gap = (&s[x] - &s[y]).abs();
            if best.as_ref().is_none_or(|b| gap < *b) {
                best = Some(gap);
            }
        }
    }
    best
}

/// Smallest slack `dist(a, via) + dist(via, b) - dist(a, b)` over all
/// triples, `None` if `n < 3`.
fn min_triangle_slack(ms: &MetricSpace) -> Option<BigRational> {
    let n = ms.n();
    let mut best: Option<BigRational> = None;
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                for (a, via, b) in [(i, j, k), (j, i, k), (i, k, j)] {
                    let slack = ms.dist(a, via) + ms.dist(via, b) - ms.dist(a, b);
                    if best.as_ref().is_none_or(|s| slack < *s) {
                        best = Some(slack);
                    }
                }
            }
        }
    }
    best
}

/// Builds a seeded metric space of the requested kind.
///
/// `Mono(color)` draws from a fixed distance family whose quadruples all
/// carry `color`, then jitters within a bound small enough to keep every
/// strict comparison, and verifies the color of every quadruple plus
/// distinctness of all distances before returning. Colors 213 and 312 have
/// no family (five points already force a second color).
pub fn generate(kind: SpaceKind, n: usize, seed: u64) -> Result<MetricSpace, GenError> {
    assert!(n >= 1, "need at least one point");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match kind {
        SpaceKind::Random => {
            let upper: Vec<BigRational> = (0..n * (n - 1) / 2)
                .map(|_| {
                    let k: i64 = rng.random_range(0..=GRAIN);
                    BigRational::one() + BigRational::new(big(k), big(GRAIN))
                })
                .collect();
            let ms = MetricSpace::from_upper(n, upper)
                .expect("distances in [1, 2] always satisfy the triangle inequality");
            if n == 1 {
                return Ok(ms);
            }
            ms.perturb_to_generic(&BigRational::new(big(1), big(4096)), rng.next_u64())
                .map_err(GenError::Perturbation)
        }
        SpaceKind::Mono(color) => {
            if !color.constructible() {
                return Err(GenError::UnsupportedColor(color));
            }
            let mut base = Vec::with_capacity(n * (n - 1) / 2);
            for i in 0..n {
                for j in i + 1..n {
                    base.push(family_distance(color, n, j - i));
                }
            }
            let base = MetricSpace { n, upper: base };
            if n == 1 {
                return Ok(base);
            }
            // Jitter magnitude small enough to keep every strict pair-sum
            // comparison and every strict triangle inequality: each side of
            // a strict comparison moves by less than half the smallest gap.
            let one = BigRational::one();
            let mut bound = min_quad_gap(&base).unwrap_or_else(|| one.clone());
            if let Some(slack) = min_triangle_slack(&base) {
                if slack < bound {
                    bound = slack;
                }
            }
            if bound > one {
                bound = one;
            }
            bound /= BigRational::from_integer(big(4));
            let denom = BigRational::from_integer(big(2 * GRAIN));
            for _ in 0..MAX_ATTEMPTS {
                let upper: Vec<BigRational> = base
                    .upper
                    .iter()
                    .map(|d| {
                        let k: i64 = rng.random_range(-GRAIN..=GRAIN);
                        d + &bound * BigRational::from_integer(big(k)) / &denom
                    })
                    .collect();
                let Ok(ms) = MetricSpace::from_upper(n, upper) else {
                    continue;
                };
                let report = ms.genericity();
                if !(report.quad_generic && report.distinct_distances) {
                    continue;
                }
                let mono = coloring::quadruples(n).all(|q| {
                    coloring::color_quadruple(&ms, q).is_ok_and(|c| c == color)
                });
                if mono {
                    return Ok(ms);
                }
            }
            Err(GenError::Failed {
                color,
                n,
                attempts: MAX_ATTEMPTS,
            })
        }
    }
}
