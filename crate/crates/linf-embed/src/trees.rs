//! Trees of diameter at most 4 and their compiled 1-Lipschitz functions.
//!
//! A tree here has a center, a nonempty set of main vertices adjacent to
//! it, and peripheral vertices each attached to one main. Orienting every
//! edge away from the mains (main -> center, main -> peripheral) leaves no
//! directed two-edge path, so prescribing `f(center) = 0`,
//! `f(a) = d(a, center)` on mains and `f(p) = f(attach(p)) - d(attach(p), p)`
//! on peripherals makes every tree edge tight. The function is 1-Lipschitz
//! exactly when every four-vertex path `a - b - c - d` of the tree
//! satisfies `d(a,d) + d(b,c) >= d(a,b) + d(c,d)`; such trees are called
//! admissible.
//!
//! Peripherals attach by the rule
//! `attach(p) = argmin over mains a of (d(p, a) - d(a, center))`,
//! ties to the lowest main index, which picks the lower feasible endpoint
//! among the mains and makes the attachment order-independent.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;

use crate::lipschitz::{LipschitzError, LipschitzFn};
use crate::metric::MetricSpace;

/// A tree named by center and main vertices only; peripherals are decided
/// later against a concrete metric.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CombinatorialTree {
    pub center: usize,
    /// Strictly increasing, nonempty, never containing the center.
    pub mains: Vec<usize>,
}

impl CombinatorialTree {
    pub fn new(center: usize, mut mains: Vec<usize>) -> CombinatorialTree {
        mains.sort_unstable();
        mains.dedup();
        assert!(!mains.is_empty(), "need at least one main vertex");
        assert!(!mains.contains(&center), "center cannot be a main");
        CombinatorialTree { center, mains }
    }
}

/// The compiled function is not 1-Lipschitz: the tree is inadmissible.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdmissibilityViolation {
    /// First domain pair with `|f(x) - f(y)| > d(x, y)`.
    pub pair: (usize, usize),
    pub excess: BigRational,
    /// First four-vertex path breaking the path inequality, when one
    /// exists (it always does; the equivalence is under test elsewhere).
    pub path: Option<[usize; 4]>,
}

impl fmt::Display for AdmissibilityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "tree function breaks the Lipschitz bound on pair ({}, {}) by {}",
            self.pair.0, self.pair.1, self.excess
        )?;
        if let Some([a, b, c, d]) = self.path {
            write!(f, "; path {a}-{b}-{c}-{d} violates d(a,d)+d(b,c) >= d(a,b)+d(c,d)")?;
        }
        Ok(())
    }
}

impl std::error::Error for AdmissibilityViolation {}

/// A diameter-≤4 tree on concrete points of a metric space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CenteredTree {
    center: usize,
    mains: Vec<usize>,
    /// peripheral -> main it hangs from.
    attach: BTreeMap<usize, usize>,
}

impl CenteredTree {
    /// Builds from explicit parts; shape invariants are asserted.
    pub fn new(center: usize, mut mains: Vec<usize>, attach: BTreeMap<usize, usize>) -> CenteredTree {
        mains.sort_unstable();
        mains.dedup();
        assert!(!mains.is_empty(), "need at least one main vertex");
        assert!(!mains.contains(&center), "center cannot be a main");
        for (&p, &m) in &attach {
            assert!(p != center && !mains.contains(&p), "peripheral overlaps tree core");
            assert!(mains.contains(&m), "attachment target must be a main");
        }
        CenteredTree {
            center,
            mains,
            attach,
        }
    }

    /// Attaches every point of the space outside center and mains by the
    /// argmin rule.
    pub fn instantiate(skeleton: &CombinatorialTree, ms: &MetricSpace) -> CenteredTree {
        let mut t = CenteredTree::new(skeleton.center, skeleton.mains.clone(), BTreeMap::new());
        assert!(
            *t.mains.last().unwrap() < ms.n() && t.center < ms.n(),
            "tree vertices out of range"
        );
        for p in 0..ms.n() {
            if p != t.center && !t.mains.contains(&p) {
                t = t.extend(ms, p);
            }
        }
        t
    }

    /// Adds one peripheral at the main minimizing `d(x0, a) - d(a, center)`,
    /// lowest main index on ties.
    pub fn extend(&self, ms: &MetricSpace, x0: usize) -> CenteredTree {
        assert!(x0 < ms.n(), "point out of range");
        assert!(!self.contains(x0), "point already in tree");
        let best = self
            .mains
            .iter()
            .map(|&a| (ms.dist(x0, a) - ms.dist(a, self.center), a))
            .min()
            .expect("mains nonempty")
            .1;
        let mut attach = self.attach.clone();
        attach.insert(x0, best);
        CenteredTree {
            center: self.center,
            mains: self.mains.clone(),
            attach,
        }
    }

    pub fn center(&self) -> usize {
        self.center
    }

    pub fn mains(&self) -> &[usize] {
        &self.mains
    }

    pub fn attach(&self) -> &BTreeMap<usize, usize> {
        &self.attach
    }

    pub fn contains(&self, p: usize) -> bool {
        p == self.center || self.mains.contains(&p) || self.attach.contains_key(&p)
    }

    /// All vertices in ascending order.
    pub fn members(&self) -> Vec<usize> {
        let mut m: Vec<usize> = std::iter::once(self.center)
            .chain(self.mains.iter().copied())
            .chain(self.attach.keys().copied())
            .collect();
        m.sort_unstable();
        m
    }

    /// Undirected edges: center-main ascending, then main-peripheral by
    /// peripheral.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.mains
            .iter()
            .map(|&m| (self.center, m))
            .chain(self.attach.iter().map(|(&p, &m)| (m, p)))
            .collect()
    }

    /// Canonical orientation: every main is a source, so no directed path
    /// of length 2 exists.
    pub fn oriented_edges(&self) -> Vec<(usize, usize)> {
        self.mains
            .iter()
            .map(|&m| (m, self.center))
            .chain(self.attach.iter().map(|(&p, &m)| (m, p)))
            .collect()
    }

    /// Longest path length in edges; at most 4 by shape.
    pub fn diameter(&self) -> usize {
        let mains_with_peripherals = {
            let mut ms: Vec<usize> = self.attach.values().copied().collect();
            ms.sort_unstable();
            ms.dedup();
            ms.len()
        };
        if self.mains.len() == 1 {
            if self.attach.is_empty() {
                1
            } else {
                2
            }
        } else {
            match mains_with_peripherals {
                0 => 2,
                1 => 3,
                _ => 4,
            }
        }
    }

    /// Four-vertex paths of the tree. Peripherals are leaves and the
    /// center connects only to mains, so every such path has the shape
    /// peripheral - its main - center - other main.
    pub fn four_paths(&self) -> Vec<[usize; 4]> {
        let mut out = Vec::new();
        for (&p, &m) in &self.attach {
            for &other in &self.mains {
                if other != m {
                    out.push([p, m, self.center, other]);
                }
            }
        }
        out
    }

    /// First four-path `a - b - c - d` with `d(a,d) + d(b,c) < d(a,b) + d(c,d)`,
    /// or `None` when the admissibility criterion holds.
    pub fn four_path_violation(&self, ms: &MetricSpace) -> Option<[usize; 4]> {
        self.four_paths().into_iter().find(|&[a, b, c, d]| {
            ms.dist(a, d) + ms.dist(b, c) < ms.dist(a, b) + ms.dist(c, d)
        })
    }

    /// Compiles to the canonical function and checks 1-Lipschitzness on
    /// every vertex pair exactly.
    pub fn function(&self, ms: &MetricSpace) -> Result<LipschitzFn, AdmissibilityViolation> {
        let mut values: BTreeMap<usize, BigRational> = BTreeMap::new();
        values.insert(self.center, BigRational::from_integer(0.into()));
        for &a in &self.mains {
            values.insert(a, ms.dist(a, self.center).clone());
        }
        for (&p, &a) in &self.attach {
            values.insert(p, ms.dist(a, self.center) - ms.dist(a, p));
        }
        match LipschitzFn::new(ms, values) {
            Ok(f) => Ok(f),
            Err(LipschitzError::NotLipschitz { a, b, excess }) => Err(AdmissibilityViolation {
                pair: (a, b),
                excess,
                path: self.four_path_violation(ms),
            }),
            Err(other) => unreachable!("tree vertices validated: {other:?}"),
        }
    }
}
