//! Quadruple colors and monochromatic structure.
//!
//! For points `a < b < c < d` the three pair-sums are
//! `R1 = d(a,b) + d(c,d)`, `R2 = d(a,c) + d(b,d)`, `R3 = d(a,d) + d(b,c)`.
//! On a quad-generic space these are pairwise distinct and their strict
//! descending order is a permutation of `{1,2,3}`, the quadruple's color:
//! color `231` means `R2 > R3 > R1`. Colors are invariant under rescaling
//! all distances.
//!
//! Colors 213 and 312 admit no monochromatic five-point generic space: the
//! forced strict inequalities of three of the five quadruples add up to the
//! same pair multiset on both sides. [`impossibility_certificate`] returns
//! that contradiction in checkable form.

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::metric::MetricSpace;

/// Exhaustive subset search is used up to this many points.
const EXACT_SEARCH_LIMIT: usize = 15;

/// Internal seed for the heuristic search beyond the exact regime.
const HEURISTIC_SEED: u64 = 0x1f0c;
const HEURISTIC_RESTARTS: usize = 8;
const HEURISTIC_ITERS: usize = 200;

/// Strict descending order of the three pair-sums of a quadruple.
///
/// `C231` reads: `R2 > R3 > R1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum QuadColor {
    C123,
    C132,
    C213,
    C231,
    C312,
    C321,
}

impl QuadColor {
    /// All six colors in numeric label order.
    pub const ALL: [QuadColor; 6] = [
        QuadColor::C123,
        QuadColor::C132,
        QuadColor::C213,
        QuadColor::C231,
        QuadColor::C312,
        QuadColor::C321,
    ];

    /// Position in [`QuadColor::ALL`].
    pub fn index(self) -> usize {
        QuadColor::ALL.iter().position(|&c| c == self).unwrap()
    }

    /// The descending rank digits: `C231` gives `[2, 3, 1]`.
    pub fn digits(self) -> [u8; 3] {
        match self {
            QuadColor::C123 => [1, 2, 3],
            QuadColor::C132 => [1, 3, 2],
            QuadColor::C213 => [2, 1, 3],
            QuadColor::C231 => [2, 3, 1],
            QuadColor::C312 => [3, 1, 2],
            QuadColor::C321 => [3, 2, 1],
        }
    }

    fn from_digits(d: [u8; 3]) -> Option<QuadColor> {
        QuadColor::ALL.iter().copied().find(|c| c.digits() == d)
    }

    /// Whether arbitrarily large monochromatic spaces of this color exist.
    /// Colors 213 and 312 die at five points.
    pub fn constructible(self) -> bool {
        !matches!(self, QuadColor::C213 | QuadColor::C312)
    }
}

impl fmt::Display for QuadColor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.digits();
        write!(f, "{a}{b}{c}")
    }
}

/// Unknown color label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseColorError(pub String);

impl fmt::Display for ParseColorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "unknown color {:?} (expected a permutation of 123)",
            self.0
        )
    }
}

impl std::error::Error for ParseColorError {}

impl FromStr for QuadColor {
    type Err = ParseColorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bytes = s.as_bytes();
        if bytes.len() == 3 {
            let d = [bytes[0] - b'0', bytes[1] - b'0', bytes[2] - b'0'];
            if let Some(c) = QuadColor::from_digits(d) {
                return Ok(c);
            }
        }
        Err(ParseColorError(s.to_string()))
    }
}

/// Two of the three pair-sums coincide, so the quadruple has no color.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TiedSums {
    pub quad: [usize; 4],
    pub sums: [BigRational; 3],
}

impl fmt::Display for TiedSums {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.quad;
        write!(
            f,
            "quadruple ({a}, {b}, {c}, {d}) has tied pair-sums {}, {}, {}",
            self.sums[0], self.sums[1], self.sums[2]
        )
    }
}

impl std::error::Error for TiedSums {}

/// All quadruples of `0..n` in lexicographic order.
pub fn quadruples(n: usize) -> impl Iterator<Item = [usize; 4]> {
    (0..n).flat_map(move |a| {
        (a + 1..n).flat_map(move |b| {
            (b + 1..n).flat_map(move |c| (c + 1..n).map(move |d| [a, b, c, d]))
        })
    })
}

/// Colors one quadruple `a < b < c < d`.
pub fn color_quadruple(ms: &MetricSpace, quad: [usize; 4]) -> Result<QuadColor, TiedSums> {
    let sums = ms.quad_sums(quad);
    if sums[0] == sums[1] || sums[0] == sums[2] || sums[1] == sums[2] {
        return Err(TiedSums { quad, sums });
    }
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&x, &y| sums[y].cmp(&sums[x]));
    let digits = [idx[0] as u8 + 1, idx[1] as u8 + 1, idx[2] as u8 + 1];
    Ok(QuadColor::from_digits(digits).unwrap())
}

/// Aggregate color structure of a space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MonoStatus {
    /// Fewer than four points: no quadruples at all.
    Vacuous,
    /// Every quadruple has this color.
    Mono(QuadColor),
    /// At least two colors occur.
    Mixed,
}

/// Per-color quadruple counts plus the overall verdict.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColorReport {
    /// Counts indexed by [`QuadColor::index`].
    pub counts: [usize; 6],
    pub total: usize,
    pub mono: MonoStatus,
}

impl ColorReport {
    pub fn count(&self, color: QuadColor) -> usize {
        self.counts[color.index()]
    }
}

impl fmt::Display for ColorReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for color in QuadColor::ALL {
            writeln!(f, "color {color}: {}", self.count(color))?;
        }
        match &self.mono {
            MonoStatus::Vacuous => write!(f, "no quadruples"),
            MonoStatus::Mono(c) => write!(f, "monochromatic of color {c}"),
            MonoStatus::Mixed => write!(f, "mixed"),
        }
    }
}

/// Colors every quadruple; the first tie aborts the scan.
pub fn mono_color(ms: &MetricSpace) -> Result<ColorReport, TiedSums> {
    let mut counts = [0usize; 6];
    let mut total = 0;
    for q in quadruples(ms.n()) {
        let c = color_quadruple(ms, q)?;
        counts[c.index()] += 1;
        total += 1;
    }
    let mono = if total == 0 {
        MonoStatus::Vacuous
    } else {
        let seen: Vec<QuadColor> = QuadColor::ALL
            .into_iter()
            .filter(|c| counts[c.index()] > 0)
            .collect();
        if seen.len() == 1 {
            MonoStatus::Mono(seen[0])
        } else {
            MonoStatus::Mixed
        }
    };
    Ok(ColorReport {
        counts,
        total,
        mono,
    })
}

/// Result of a monochromatic subset search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonoSearch {
    /// Found subset (strictly increasing) and its color.
    pub subset: Option<(Vec<usize>, QuadColor)>,
    /// Whether absence would be a proof: true only in the exact regime.
    pub exhaustive: bool,
}

fn compatible(ms: &MetricSpace, chosen: &[usize], cand: usize, color: QuadColor) -> bool {
    let m = chosen.len();
    for i in 0..m {
        for j in i + 1..m {
            for l in j + 1..m {
                match color_quadruple(ms, [chosen[i], chosen[j], chosen[l], cand]) {
                    Ok(c) if c == color => {}
                    // Ties conflict just like wrong colors.
                    _ => return false,
                }
            }
        }
    }
    true
}

fn dfs(ms: &MetricSpace, color: QuadColor, k: usize, start: usize, chosen: &mut Vec<usize>) -> bool {
    if chosen.len() == k {
        return true;
    }
    let need = k - chosen.len();
    for cand in start..ms.n() {
        if ms.n() - cand < need {
            break;
        }
        if compatible(ms, chosen, cand, color) {
            chosen.push(cand);
            if dfs(ms, color, k, cand + 1, chosen) {
                return true;
            }
            chosen.pop();
        }
    }
    false
}

fn count_conflicts(ms: &MetricSpace, subset: &[usize], color: QuadColor) -> usize {
    let k = subset.len();
    let mut bad = 0;
    for a in 0..k {
        for b in a + 1..k {
            for c in b + 1..k {
                for d in c + 1..k {
                    match color_quadruple(ms, [subset[a], subset[b], subset[c], subset[d]]) {
                        Ok(col) if col == color => {}
                        _ => bad += 1,
                    }
                }
            }
        }
    }
    bad
}

fn heuristic(ms: &MetricSpace, k: usize, color: QuadColor, rng: &mut ChaCha8Rng) -> Option<Vec<usize>> {
    let n = ms.n();
    // Greedy seed: grow by the point adding the fewest conflicting quads.
    let mut subset: Vec<usize> = Vec::with_capacity(k);
    while subset.len() < k {
        let mut best: Option<(usize, usize)> = None;
        for cand in 0..n {
            if subset.contains(&cand) {
                continue;
            }
            let mut trial = subset.clone();
            trial.push(cand);
            trial.sort_unstable();
            let c = count_conflicts(ms, &trial, color);
            if best.is_none_or(|(bc, _)| c < bc) {
                best = Some((c, cand));
            }
        }
        subset.push(best.unwrap().1);
        subset.sort_unstable();
    }
    for _restart in 0..HEURISTIC_RESTARTS {
        let mut conflicts = count_conflicts(ms, &subset, color);
        for _ in 0..HEURISTIC_ITERS {
            if conflicts == 0 {
                return Some(subset);
            }
            // Best single swap of a member for an outsider.
            let mut best: Option<(usize, usize, usize)> = None;
            for pos in 0..k {
                for cand in 0..n {
                    if subset.contains(&cand) {
                        continue;
                    }
                    let mut trial = subset.clone();
                    trial[pos] = cand;
                    trial.sort_unstable();
                    let c = count_conflicts(ms, &trial, color);
                    if c < conflicts && best.is_none_or(|(bc, _, _)| c < bc) {
                        best = Some((c, pos, cand));
                    }
                }
            }
            match best {
                Some((c, pos, cand)) => {
                    subset[pos] = cand;
                    subset.sort_unstable();
                    conflicts = c;
                }
                None => break,
            }
        }
        if conflicts == 0 {
            return Some(subset);
        }
        // Random restart.
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = rng.random_range(i..n);
            pool.swap(i, j);
        }
        subset = pool[..k].to_vec();
        subset.sort_unstable();
    }
    None
}

fn search_color(ms: &MetricSpace, k: usize, color: QuadColor, exact: bool) -> Option<Vec<usize>> {
    if exact {
        let mut chosen = Vec::with_capacity(k);
        if dfs(ms, color, k, 0, &mut chosen) {
            return Some(chosen);
        }
        None
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(HEURISTIC_SEED);
        heuristic(ms, k, color, &mut rng)
    }
}

/// Searches for `k` points whose quadruples all carry one color, trying
/// colors in numeric label order. Up to [`EXACT_SEARCH_LIMIT`] points the
/// search is an exhaustive branch-and-bound (lexicographically earliest
/// subset per color); beyond, a seeded greedy-plus-local-search heuristic,
/// where absence proves nothing.
pub fn find_monochromatic(ms: &MetricSpace, k: usize) -> MonoSearch {
    assert!((4..=ms.n()).contains(&k), "need 4 <= k <= n");
    let exact = ms.n() <= EXACT_SEARCH_LIMIT;
    for color in QuadColor::ALL {
        if let Some(pts) = search_color(ms, k, color, exact) {
            return MonoSearch {
                subset: Some((pts, color)),
                exhaustive: exact,
            };
        }
    }
    MonoSearch {
        subset: None,
        exhaustive: exact,
    }
}

/// Like [`find_monochromatic`] but restricted to a single color.
pub fn find_monochromatic_of_color(ms: &MetricSpace, k: usize, color: QuadColor) -> MonoSearch {
    assert!((4..=ms.n()).contains(&k), "need 4 <= k <= n");
    let exact = ms.n() <= EXACT_SEARCH_LIMIT;
    MonoSearch {
        subset: search_color(ms, k, color, exact).map(|pts| (pts, color)),
        exhaustive: exact,
    }
}

/// An unordered pair-sum: the two pairs whose distances are added.
pub type PairSet = [(usize, usize); 2];

/// Why no generic five-point space is monochromatic of color 213 or 312.
///
/// Three quadruples of `{0,..,4}` each force a strict inequality between
/// two of their pair-sums; the three left sides and the three right sides
/// use exactly the same six pairs, so the summed inequality reads `S > S`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImpossibilityCertificate {
    pub color: QuadColor,
    /// The quadruples involved.
    pub quads: [[usize; 4]; 3],
    /// Per quadruple: left sum > right sum, forced by the color.
    pub strict: [(PairSet, PairSet); 3],
}

fn sum_pairs(q: [usize; 4], which: u8) -> PairSet {
    let [a, b, c, d] = q;
    match which {
        1 => [(a, b), (c, d)],
        2 => [(a, c), (b, d)],
        3 => [(a, d), (b, c)],
        _ => unreachable!(),
    }
}

impl ImpossibilityCertificate {
    /// Checks the telescoping identity: both sides use the same pair
    /// multiset, and each strict inequality is one the color really forces.
    pub fn verify(&self) -> bool {
        let digits = self.color.digits();
        let rank = |r: u8| digits.iter().position(|&d| d == r).unwrap();
        let mut left: Vec<(usize, usize)> = Vec::new();
        let mut right: Vec<(usize, usize)> = Vec::new();
        for (q, (lhs, rhs)) in self.quads.iter().zip(&self.strict) {
            let find = |side: &PairSet| (1..=3u8).find(|&w| sum_pairs(*q, w) == *side);
            let (Some(lw), Some(rw)) = (find(lhs), find(rhs)) else {
                return false;
            };
            // Larger sum means earlier rank in the descending color digits.
            if rank(lw) >= rank(rw) {
                return false;
            }
            left.extend_from_slice(lhs);
            right.extend_from_slice(rhs);
        }
        left.sort_unstable();
        right.sort_unstable();
        left == right
    }
}

impl fmt::Display for ImpossibilityCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "five points 0 < 1 < 2 < 3 < 4, all quadruples colored {}:",
            self.color
        )?;
        for (q, (lhs, rhs)) in self.quads.iter().zip(&self.strict) {
            writeln!(
                f,
                "  quad ({},{},{},{}) forces d({},{})+d({},{}) > d({},{})+d({},{})",
                q[0], q[1], q[2], q[3], lhs[0].0, lhs[0].1, lhs[1].0, lhs[1].1, rhs[0].0,
                rhs[0].1, rhs[1].0, rhs[1].1
            )?;
        }
        write!(
            f,
            "summing all three: both sides are the same six pairs, so S > S"
        )
    }
}

/// Builds the five-point contradiction for color 213 or 312.
pub fn impossibility_certificate(color: QuadColor) -> ImpossibilityCertificate {
    assert!(
        matches!(color, QuadColor::C213 | QuadColor::C312),
        "only colors 213 and 312 are impossible at five points"
    );
    let quads = [[0, 1, 2, 3], [1, 2, 3, 4], [0, 1, 3, 4]];
    // For 213 (R2 > R1 > R3) the first two quadruples give R1 > R3 and the
    // third gives R2 > R1; for 312 the comparisons flip.
    let picks: [(u8, u8); 3] = match color {
        QuadColor::C213 => [(1, 3), (1, 3), (2, 1)],
        QuadColor::C312 => [(3, 1), (3, 1), (1, 2)],
        _ => unreachable!(),
    };
    let strict = [
        (sum_pairs(quads[0], picks[0].0), sum_pairs(quads[0], picks[0].1)),
        (sum_pairs(quads[1], picks[1].0), sum_pairs(quads[1], picks[1].1)),
        (sum_pairs(quads[2], picks[2].0), sum_pairs(quads[2], picks[2].1)),
    ];
    ImpossibilityCertificate {
        color,
        quads,
        strict,
    }
}
