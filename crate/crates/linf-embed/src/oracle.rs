//! Independent ground truth for tiny spaces: the exact minimal number of
//! coordinates `m(X)` by brute force over edge-set partitions.
//!
//! A space embeds in `l∞^k` exactly when its `C(n, 2)` pairs split into `k`
//! parts, each realizable as tight pairs of a single 1-Lipschitz function.
//! Part feasibility reduces to a difference-constraint system per tight-edge
//! orientation, solved exactly over the rationals. Everything here is
//! deliberately independent of the cover constructions it validates.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;

use crate::coloring::QuadColor;
use crate::constructions::{build_cover, instantiate_cover, required_size, CoverError};
use crate::lipschitz::{EdgeCover, LipschitzError, LipschitzFn};
use crate::metric::{generate, GenError, MetricSpace, SpaceKind};

/// Largest `n` the exhaustive search accepts.
pub const EXACT_M_LIMIT: usize = 7;

/// The oracle refused to run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleError {
    /// Partition enumeration is exponential; past the limit it is hopeless.
    GuardExceeded { n: usize, limit: usize },
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::GuardExceeded { n, limit } => {
                write!(f, "exact search supports at most {limit} points, got {n}")
            }
        }
    }
}

impl std::error::Error for OracleError {}

/// Exact solution of a difference-constraint system by label relaxation from
/// an implicit all-zero source; `None` means a negative cycle, i.e. the
/// constraints contradict each other. Arc `(u, v, w)` encodes
/// `f(v) - f(u) <= w`.
fn difference_feasible(
    n: usize,
    arcs: &[(usize, usize, BigRational)],
) -> Option<Vec<BigRational>> {
    let mut dist = vec![BigRational::zero(); n];
    for _ in 0..n {
        let mut changed = false;
        for (u, v, w) in arcs {
            let cand = &dist[*u] + w;
            if cand < dist[*v] {
                dist[*v] = cand;
                changed = true;
            }
        }
        if !changed {
            return Some(dist);
        }
    }
    for (u, v, w) in arcs {
        if &dist[*u] + w < dist[*v] {
            return None;
        }
    }
    Some(dist)
}

/// Searches for a 1-Lipschitz function tight on every pair of `part`.
///
/// Each of the `2^|part|` orientation patterns (binary order, bit `i` flips
/// the `i`-th part edge in lex order) turns tightness into two inequalities
/// per edge; the first feasible system wins. The returned function is
/// re-verified Lipschitz and part-tight before it leaves.
pub fn part_feasible(ms: &MetricSpace, part: &[(usize, usize)]) -> Option<LipschitzFn> {
    let n = ms.n();
    assert!(!part.is_empty(), "parts are nonempty by contract");
    let mut edges: Vec<(usize, usize)> = part
        .iter()
        .map(|&(a, b)| {
            assert!(a != b && a < n && b < n, "part edge out of range");
            (a.min(b), a.max(b))
        })
        .collect();
    edges.sort();
    edges.dedup();
    let p = edges.len();
    assert!(p < 32, "orientation enumeration needs a small part");

    // Lipschitz inequalities, shared by every orientation.
    let mut base: Vec<(usize, usize, BigRational)> = Vec::with_capacity(n * (n - 1) + p);
    for (a, b) in ms.pairs() {
        base.push((a, b, ms.dist(a, b).clone()));
        base.push((b, a, ms.dist(a, b).clone()));
    }

    for mask in 0u32..(1u32 << p) {
        let mut arcs = base.clone();
        for (i, &(a, b)) in edges.iter().enumerate() {
            // f(x) - f(y) = d becomes f(y) - f(x) <= -d on top of the
            // Lipschitz bound, forcing equality.
            let d = ms.dist(a, b).clone();
            if mask & (1 << i) == 0 {
                arcs.push((a, b, -d));
            } else {
                arcs.push((b, a, -d));
            }
        }
        if let Some(values) = difference_feasible(n, &arcs) {
            let values: BTreeMap<usize, BigRational> = values.into_iter().enumerate().collect();
            let f = LipschitzFn::new(ms, values).expect("feasible system is 1-Lipschitz");
            let tg = f.tight_graph(ms).expect("function is total");
            for &(a, b) in &edges {
                assert!(tg.covers(a, b), "solver must return a part-tight function");
            }
            return Some(f);
        }
    }
    None
}

/// Result of the exact minimal-dimension search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExactM {
    Exact {
        m: usize,
        /// The witnessing partition, parts in discovery order.
        parts: Vec<Vec<(usize, usize)>>,
        /// One tight function per part, aligned with `parts`.
        fns: Vec<LipschitzFn>,
    },
    /// No partition into at most `k_max` feasible parts exists.
    ExceedsKMax { k_max: usize },
}

fn mask_pairs(mask: u32, edges: &[(usize, usize)]) -> Vec<(usize, usize)> {
    edges
        .iter()
        .enumerate()
        .filter(|(i, _)| mask & (1 << i) != 0)
        .map(|(_, &e)| e)
        .collect()
}

fn mask_feasible(
    ms: &MetricSpace,
    edges: &[(usize, usize)],
    mask: u32,
    memo: &mut HashMap<u32, bool>,
) -> bool {
    if let Some(&known) = memo.get(&mask) {
        return known;
    }
    let feasible = part_feasible(ms, &mask_pairs(mask, edges)).is_some();
    memo.insert(mask, feasible);
    feasible
}

/// Assigns edges in lex order to at most `k` parts, restricted-growth style
/// (a new part always opens with the current edge). A branch dies as soon as
/// the extended part is infeasible: tightness survives taking subsets, so no
/// completion can rescue it. Returns the first full assignment.
fn partition_dfs(
    ms: &MetricSpace,
    edges: &[(usize, usize)],
    k: usize,
    idx: usize,
    parts: &mut Vec<u32>,
    memo: &mut HashMap<u32, bool>,
) -> Option<Vec<u32>> {
    if idx == edges.len() {
        return Some(parts.clone());
    }
    let bit = 1u32 << idx;
    for j in 0..parts.len() {
        let grown = parts[j] | bit;
        if mask_feasible(ms, edges, grown, memo) {
            let old = parts[j];
            parts[j] = grown;
            if let Some(found) = partition_dfs(ms, edges, k, idx + 1, parts, memo) {
                return Some(found);
            }
            parts[j] = old;
        }
    }
    if parts.len() < k && mask_feasible(ms, edges, bit, memo) {
        parts.push(bit);
        if let Some(found) = partition_dfs(ms, edges, k, idx + 1, parts, memo) {
            return Some(found);
        }
        parts.pop();
    }
    None
}

/// The least `k <= k_max` such that the edges partition into `k` feasible
/// parts, with a witness; exhaustive, so also a proof of optimality.
pub fn exact_m(ms: &MetricSpace, k_max: usize) -> Result<ExactM, OracleError> {
    let n = ms.n();
    if n > EXACT_M_LIMIT {
        return Err(OracleError::GuardExceeded {
            n,
            limit: EXACT_M_LIMIT,
        });
    }
    let edges: Vec<(usize, usize)> = ms.pairs().collect();
    if edges.is_empty() {
        return Ok(ExactM::Exact {
            m: 0,
            parts: Vec::new(),
            fns: Vec::new(),
        });
    }
    assert!(edges.len() < 32, "guard keeps the edge count below 32");
    let mut memo: HashMap<u32, bool> = HashMap::new();
    for k in 1..=k_max.min(edges.len()) {
        let mut parts: Vec<u32> = Vec::new();
        if let Some(found) = partition_dfs(ms, &edges, k, 0, &mut parts, &mut memo) {
            let parts: Vec<Vec<(usize, usize)>> =
                found.iter().map(|&m| mask_pairs(m, &edges)).collect();
            let fns: Vec<LipschitzFn> = parts
                .iter()
                .map(|p| part_feasible(ms, p).expect("memoized part is feasible"))
                .collect();
            return Ok(ExactM::Exact {
                m: parts.len(),
                parts,
                fns,
            });
        }
    }
    Ok(ExactM::ExceedsKMax { k_max })
}

/// Splits a verified cover back into a partition: each pair goes to the
/// first function tight on it. Empty leftovers are dropped, so the parts are
/// nonempty, disjoint, and exhaustive.
pub fn induced_partition(
    cover: &EdgeCover,
    ms: &MetricSpace,
) -> Result<Vec<Vec<(usize, usize)>>, LipschitzError> {
    let tight: Vec<_> = cover
        .fns
        .iter()
        .map(|f| f.tight_graph(ms))
        .collect::<Result<_, _>>()?;
    let mut parts: Vec<Vec<(usize, usize)>> = vec![Vec::new(); cover.k()];
    let mut missing = Vec::new();
    for (a, b) in ms.pairs() {
        match tight.iter().position(|t| t.covers(a, b)) {
            Some(i) => parts[i].push((a, b)),
            None => missing.push((a, b)),
        }
    }
    if !missing.is_empty() {
        return Err(LipschitzError::IncompleteCover { missing });
    }
    Ok(parts.into_iter().filter(|p| !p.is_empty()).collect())
}

/// Construction size vs exact optimum on one generated instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrossCheck {
    pub color: QuadColor,
    pub c: usize,
    pub n: usize,
    /// Functions in the verified combinatorial cover.
    pub construction_size: usize,
    pub oracle_m: usize,
    /// `oracle_m <= construction_size`; anything else is a bug.
    pub consistent: bool,
}

impl fmt::Display for CrossCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "color {} gain {}: construction uses {} functions on {} points, exact m = {} ({})",
            self.color,
            self.c,
            self.construction_size,
            self.n,
            self.oracle_m,
            if self.consistent {
                "consistent"
            } else {
                "INCONSISTENT"
            }
        )
    }
}

/// Why a cross-check could not run.
#[derive(Clone, Debug)]
pub enum CrossCheckError {
    Oracle(OracleError),
    Generation(GenError),
    Cover(CoverError),
}

impl fmt::Display for CrossCheckError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CrossCheckError::Oracle(e) => e.fmt(f),
            CrossCheckError::Generation(e) => e.fmt(f),
            CrossCheckError::Cover(e) => e.fmt(f),
        }
    }
}

impl std::error::Error for CrossCheckError {}

/// Runs both routes on one generated monochromatic instance: the color's
/// combinatorial cover and the exhaustive oracle. Only the sizes that fit
/// under the oracle guard qualify.
pub fn cross_check_construction(
    color: QuadColor,
    c: usize,
    seed: u64,
) -> Result<CrossCheck, CrossCheckError> {
    let n = required_size(color, c).map_err(CrossCheckError::Cover)?;
    if n > EXACT_M_LIMIT {
        return Err(CrossCheckError::Oracle(OracleError::GuardExceeded {
            n,
            limit: EXACT_M_LIMIT,
        }));
    }
    let ms = generate(SpaceKind::Mono(color), n, seed).map_err(CrossCheckError::Generation)?;
    let cc = build_cover(color, c).map_err(CrossCheckError::Cover)?;
    let cover = instantiate_cover(&cc, &ms).map_err(CrossCheckError::Cover)?;
    let construction_size = cover.k();
    let oracle_m = match exact_m(&ms, construction_size).map_err(CrossCheckError::Oracle)? {
        ExactM::Exact { m, .. } => m,
        ExactM::ExceedsKMax { .. } => {
            panic!("a verified {construction_size}-cover induces a feasible partition")
        }
    };
    Ok(CrossCheck {
        color,
        c,
        n,
        construction_size,
        oracle_m,
        consistent: oracle_m <= construction_size,
    })
}
