//! Per-color tree covers of monochromatic spaces.
//!
//! For each constructible color the cover below names its trees purely by
//! order-indices; on any quad-generic monochromatic space of that color
//! the peripheral attachments, and hence the covered pairs, come out the
//! same, because every attachment comparison reduces to a pair-sum
//! comparison decided by the color. Instantiating the trees and compiling
//! them to functions therefore covers all pairs with fewer functions than
//! points, which is where the dimension gain comes from:
//!
//! - color 321: `2c` points covered by `c` trees;
//! - color 132: `c^2` points covered by `2*C(c,2)` trees, built by
//!   repeatedly inserting two helper points per original pair;
//! - color 123: `2^{c+2} - 3` points, recursively, with at most
//!   `size - c` trees;
//! - color 231: `4c + 1` points covered by `3c` trees.
//!
//! Completeness and admissibility are never assumed: instantiation checks
//! both and reports a concrete counterexample on failure. An independent
//! greedy set-cover fallback over small admissible trees backs up the
//! pipeline when a construction claim fails on some input.

use std::collections::BTreeSet;
use std::fmt;

use crate::coloring::QuadColor;
use crate::lipschitz::{EdgeCover, LipschitzFn};
use crate::metric::MetricSpace;
use crate::trees::{AdmissibilityViolation, CenteredTree, CombinatorialTree};

/// Why a cover could not be built or instantiated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoverError {
    /// Colors 213 and 312 have no construction (nor spaces to apply it to).
    UnsupportedColor(QuadColor),
    /// A tree compiled to a non-Lipschitz function: counterexample to the
    /// construction's claim on this space.
    Inadmissible {
        tree_index: usize,
        violation: AdmissibilityViolation,
    },
    /// All trees compiled but some pairs stay uncovered.
    CoverageGap { missing: Vec<(usize, usize)> },
}

impl fmt::Display for CoverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoverError::UnsupportedColor(c) => write!(f, "no cover construction for color {c}"),
            CoverError::Inadmissible {
                tree_index,
                violation,
            } => write!(f, "tree {tree_index} is inadmissible: {violation}"),
            CoverError::CoverageGap { missing } => write!(
                f,
                "cover misses {} pair(s), first {:?}",
                missing.len(),
                missing[0]
            ),
        }
    }
}

impl std::error::Error for CoverError {}

/// A cover described by order-indices only, independent of distances.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CombinatorialCover {
    pub n_points: usize,
    pub trees: Vec<CombinatorialTree>,
    pub color: QuadColor,
    /// `n_points - trees.len()`, the dimension gain the cover claims.
    pub claimed_gain: usize,
}

/// Number of points the color-`c` construction needs.
pub fn required_size(color: QuadColor, c: usize) -> Result<usize, CoverError> {
    assert!(c >= 1, "gain must be at least 1");
    match color {
        QuadColor::C321 => Ok(2 * c),
        QuadColor::C132 => Ok(c * c),
        QuadColor::C123 => Ok((1usize << (c + 2)) - 3),
        QuadColor::C231 => Ok(4 * c + 1),
        other => Err(CoverError::UnsupportedColor(other)),
    }
}

/// 2c points on labels {-c..-1, 1..c}; tree i is centered at label -i with
/// mains {-c..-(i+1)} and {1..i}.
fn build_321(c: usize) -> Vec<CombinatorialTree> {
    let k = c as i64;
    let li = |l: i64| -> usize {
        if l < 0 {
            (l + k) as usize
        } else {
            (l + k - 1) as usize
        }
    };
    (1..=k)
        .map(|i| {
            let mains: Vec<usize> = (i + 1..=k)
                .map(|j| li(-j))
                .chain((1..=i).map(li))
                .collect();
            CombinatorialTree::new(li(-i), mains)
        })
        .collect()
}

/// Helper-point tokens of the 132 construction.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Slot {
    Orig(usize),
    /// Inserted just after `a` while processing pair `(a, b)`.
    Plus(usize, usize),
    /// Inserted just before `b` while processing pair `(a, b)`.
    Minus(usize, usize),
}

/// Runs the first `steps` pair-insertions of the 132 construction on `c`
/// original points. Returns the slot sequence and the per-pair trees in
/// token form.
fn slots_132(c: usize, steps: usize) -> (Vec<Slot>, Vec<(Slot, Vec<Slot>)>) {
    let mut seq: Vec<Slot> = (0..c).map(Slot::Orig).collect();
    let mut tree_tokens: Vec<(Slot, Vec<Slot>)> = Vec::new();
    let mut done = 0;
    'outer: for a in 0..c {
        for b in a + 1..c {
            if done == steps {
                break 'outer;
            }
            let pa = seq.iter().position(|s| *s == Slot::Orig(a)).unwrap();
            seq.insert(pa + 1, Slot::Plus(a, b));
            let pb = seq.iter().position(|s| *s == Slot::Orig(b)).unwrap();
            seq.insert(pb, Slot::Minus(a, b));
            tree_tokens.push((Slot::Orig(a), vec![Slot::Plus(a, b), Slot::Orig(b)]));
            tree_tokens.push((
                Slot::Orig(b),
                vec![Slot::Plus(a, b), Slot::Minus(a, b)],
            ));
            done += 1;
        }
    }
    (seq, tree_tokens)
}

fn resolve_132(seq: &[Slot], tree_tokens: &[(Slot, Vec<Slot>)]) -> Vec<CombinatorialTree> {
    let idx = |s: &Slot| seq.iter().position(|t| t == s).unwrap();
    tree_tokens
        .iter()
        .map(|(center, mains)| {
            CombinatorialTree::new(idx(center), mains.iter().map(idx).collect())
        })
        .collect()
}

/// Prefix of the 132 construction after `steps` processed pairs: point
/// count, trees so far, and the positions of the original points.
#[cfg(test)]
pub(crate) fn partial_132(c: usize, steps: usize) -> (usize, Vec<CombinatorialTree>, Vec<usize>) {
    let (seq, toks) = slots_132(c, steps);
    let trees = resolve_132(&seq, &toks);
    let originals = (0..c)
        .map(|o| seq.iter().position(|s| *s == Slot::Orig(o)).unwrap())
        .collect();
    (seq.len(), trees, originals)
}

fn build_132(c: usize) -> Vec<CombinatorialTree> {
    let (seq, toks) = slots_132(c, usize::MAX);
    debug_assert_eq!(seq.len(), c * c);
    resolve_132(&seq, &toks)
}

/// Recursive 123 layout on `size` points (always of the form `2N + 3`,
/// down to the single-point base): in label space `{-1, 0, .., 2N+1}`
/// (index = label + 1) the trees are T(0; -1, 2), T(1; 0, 2), the bridges
/// T(i+N+1; i, i+1) for i = 1..N, and the same construction again on the
/// suffix {N+2 .. 2N+1}.
fn build_123_rec(size: usize, offset: usize, trees: &mut Vec<CombinatorialTree>) {
    if size == 1 {
        return;
    }
    debug_assert!(size >= 5 && size % 2 == 1);
    let n_small = (size - 3) / 2;
    trees.push(CombinatorialTree::new(offset + 1, vec![offset, offset + 3]));
    trees.push(CombinatorialTree::new(
        offset + 2,
        vec![offset + 1, offset + 3],
    ));
    for i in 1..=n_small {
        trees.push(CombinatorialTree::new(
            offset + i + n_small + 2,
            vec![offset + i + 1, offset + i + 2],
        ));
    }
    build_123_rec(n_small, offset + n_small + 3, trees);
}

/// 4c+1 points: fans T(0; i, 4c+1-i) for i = 1..2c, then the shrinking
/// remainder trees T(j; 2c+j .. 4c+1-j) for j = 1..c.
fn build_231(c: usize) -> Vec<CombinatorialTree> {
    let mut trees: Vec<CombinatorialTree> = (1..=2 * c)
        .map(|i| CombinatorialTree::new(0, vec![i, 4 * c + 1 - i]))
        .collect();
    for j in 1..=c {
        trees.push(CombinatorialTree::new(
            j,
            (2 * c + j..=4 * c + 1 - j).collect(),
        ));
    }
    trees
}

/// Builds the combinatorial cover for a constructible color and gain `c`.
pub fn build_cover(color: QuadColor, c: usize) -> Result<CombinatorialCover, CoverError> {
    let n_points = required_size(color, c)?;
    let trees = match color {
        QuadColor::C321 => build_321(c),
        QuadColor::C132 => build_132(c),
        QuadColor::C123 => {
            let mut trees = Vec::new();
            build_123_rec(n_points, 0, &mut trees);
            trees
        }
        QuadColor::C231 => build_231(c),
        _ => unreachable!("filtered by required_size"),
    };
    for t in &trees {
        assert!(t.center < n_points && *t.mains.last().unwrap() < n_points);
    }
    assert!(trees.len() < n_points, "cover must gain at least 1");
    Ok(CombinatorialCover {
        n_points,
        claimed_gain: n_points - trees.len(),
        trees,
        color,
    })
}

/// Instantiates every tree of the cover on a concrete space of matching
/// size.
pub fn instantiated_trees(cc: &CombinatorialCover, ms: &MetricSpace) -> Vec<CenteredTree> {
    assert_eq!(ms.n(), cc.n_points, "space size must match the cover");
    cc.trees
        .iter()
        .map(|t| CenteredTree::instantiate(t, ms))
        .collect()
}

/// Compiles the cover on a concrete space and checks both claims: every
/// tree admissible, every pair covered. Any failure carries a full
/// witness; on a quad-generic monochromatic space of the cover's color a
/// failure is a mechanical counterexample to the construction.
pub fn instantiate_cover(
    cc: &CombinatorialCover,
    ms: &MetricSpace,
) -> Result<EdgeCover, CoverError> {
    let mut fns: Vec<LipschitzFn> = Vec::with_capacity(cc.trees.len());
    for (tree_index, ct) in instantiated_trees(cc, ms).into_iter().enumerate() {
        match ct.function(ms) {
            Ok(f) => fns.push(f),
            Err(violation) => {
                return Err(CoverError::Inadmissible {
                    tree_index,
                    violation,
                })
            }
        }
    }
    let cover = EdgeCover::new(fns);
    let missing = cover
        .missing_pairs(ms)
        .expect("functions validated at compilation");
    if !missing.is_empty() {
        return Err(CoverError::CoverageGap { missing });
    }
    Ok(cover)
}

/// Independent fallback: greedy set cover over all trees with at most
/// three mains. Picks the admissible tree covering the most uncovered
/// pairs (first in enumeration order on ties) until complete or the
/// budget is spent. Returns `None` if the budget cannot complete.
pub fn greedy_cover(ms: &MetricSpace, budget: usize) -> Option<EdgeCover> {
    let n = ms.n();
    let target = n * (n - 1) / 2;
    if target == 0 {
        return Some(EdgeCover::new(Vec::new()));
    }
    // Candidate pool, computed once: (covered pairs, compiled function).
    let mut pool: Vec<(BTreeSet<(usize, usize)>, LipschitzFn)> = Vec::new();
    let mut mains_sets: Vec<Vec<usize>> = Vec::new();
    for size in 1..=3.min(n - 1) {
        combinations(n, size, &mut mains_sets);
    }
    for center in 0..n {
        for mains in &mains_sets {
            if mains.contains(&center) {
                continue;
            }
            let skeleton = CombinatorialTree::new(center, mains.clone());
            let ct = CenteredTree::instantiate(&skeleton, ms);
            if let Ok(f) = ct.function(ms) {
                let pairs = f
                    .tight_graph(ms)
                    .expect("validated")
                    .pairs()
                    .collect::<BTreeSet<_>>();
                pool.push((pairs, f));
            }
        }
    }
    let mut covered: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut fns = Vec::new();
    while covered.len() < target && fns.len() < budget {
        let mut best: Option<(usize, usize)> = None; // (new pairs, pool index)
        for (i, (pairs, _)) in pool.iter().enumerate() {
            let new = pairs.difference(&covered).count();
            if new > 0 && best.is_none_or(|(bn, _)| new > bn) {
                best = Some((new, i));
            }
        }
        let (_, i) = best?;
        covered.extend(pool[i].0.iter().copied());
        fns.push(pool[i].1.clone());
    }
    (covered.len() == target).then(|| EdgeCover::new(fns))
}

/// All `size`-subsets of `0..n` in lexicographic order, appended to `out`.
fn combinations(n: usize, size: usize, out: &mut Vec<Vec<usize>>) {
    fn rec(n: usize, size: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for v in start..n {
            if n - v < size - cur.len() {
                break;
            }
            cur.push(v);
            rec(n, size, v + 1, cur, out);
            cur.pop();
        }
    }
    rec(n, size, 0, &mut Vec::new(), out);
}
