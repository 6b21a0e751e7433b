//! End-to-end pipeline: perturb to genericity, find a monochromatic subset,
//! instantiate the per-color cover on it, lift to the whole space, and verify
//! the resulting coordinates exactly.
//!
//! The pipeline never returns an unverified embedding. When no color yields a
//! cover within budget it degrades to the baseline `n - 1` coordinates and
//! says so in the report instead of erroring.

use std::fmt;

use num_rational::BigRational;

use crate::coloring::{find_monochromatic_of_color, mono_color, MonoStatus, QuadColor};
use crate::constructions::{
    build_cover, greedy_cover, instantiate_cover, required_size, CoverError,
};
use crate::lipschitz::{
    embedding_from_cover, frechet_functions, lift_cover, verify_embedding, EdgeCover, Embedding,
};
use crate::metric::{MetricSpace, PerturbationFailed};

/// Colors tried in order of subset size needed at desk scale.
const COLOR_ORDER: [QuadColor; 4] = [
    QuadColor::C321,
    QuadColor::C231,
    QuadColor::C132,
    QuadColor::C123,
];

/// How the final coordinates were obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Per-color combinatorial covers with greedy fallback, then baseline.
    Construction,
    /// Greedy cover search on the whole space, then baseline.
    Greedy,
    /// Baseline `n - 1` coordinates, no cover search.
    Frechet,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Construction => write!(f, "construction"),
            Strategy::Greedy => write!(f, "greedy"),
            Strategy::Frechet => write!(f, "frechet"),
        }
    }
}

/// Record of an input perturbation, with the additive error bound that the
/// embedding of the perturbed space carries against the original metric.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PerturbationNote {
    pub epsilon: BigRational,
    /// Every distance moved by at most this much (`2 * epsilon`), so the
    /// exact embedding of the perturbed metric deviates from the original
    /// by at most this much per pair.
    pub deviation_bound: BigRational,
}

/// Provenance of one `embed_with_gain` run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmbedReport {
    pub n: usize,
    pub requested_gain: usize,
    pub strategy: Strategy,
    /// Coordinates in the returned embedding.
    pub k: usize,
    /// Whether `k <= n - requested_gain` was reached.
    pub gain_achieved: bool,
    /// Color whose construction produced the cover, when one did.
    pub color: Option<QuadColor>,
    /// Monochromatic subset used, in original point labels.
    pub subset: Option<Vec<usize>>,
    /// A greedy cover replaced a failed combinatorial cover on the subset.
    pub used_fallback: bool,
    /// Construction attempts that failed before the returned cover was found.
    pub construction_failures: Vec<(QuadColor, CoverError)>,
    pub perturbation: Option<PerturbationNote>,
    /// Why the run fell back to baseline coordinates, if it did.
    pub degraded_reason: Option<String>,
}

impl fmt::Display for EmbedReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "n = {}, requested gain = {}, strategy = {}",
            self.n, self.requested_gain, self.strategy
        )?;
        writeln!(
            f,
            "k = {} ({})",
            self.k,
            if self.gain_achieved {
                "gain achieved"
            } else {
                "gain not achieved"
            }
        )?;
        if let Some(color) = self.color {
            write!(f, "color {color}")?;
            match &self.subset {
                Some(points) => {
                    let labels: Vec<String> = points.iter().map(usize::to_string).collect();
                    writeln!(f, " on subset {{{}}}", labels.join(", "))?;
                }
                None => writeln!(f)?,
            }
        }
        if self.used_fallback {
            writeln!(f, "greedy fallback cover used on the subset")?;
        }
        for (color, err) in &self.construction_failures {
            writeln!(f, "construction for color {color} failed: {err}")?;
        }
        if let Some(note) = &self.perturbation {
            writeln!(
                f,
                "input perturbed with epsilon = {}; distances deviate from the \
                 original metric by at most {}",
                note.epsilon, note.deviation_bound
            )?;
        }
        if let Some(reason) = &self.degraded_reason {
            writeln!(f, "degraded to baseline: {reason}")?;
        }
        Ok(())
    }
}

/// Everything a successful run returns: the embedding, the cover it came
/// from, the metric it is exactly isometric on (perturbed when the input was
/// not generic), and the provenance report.
#[derive(Clone, Debug)]
pub struct EmbedOutcome {
    pub embedding: Embedding,
    /// The lifted cover whose functions are the coordinates.
    pub cover: EdgeCover,
    /// The metric the embedding was verified against.
    pub metric: MetricSpace,
    pub report: EmbedReport,
}

/// Failures that abort the pipeline instead of degrading it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EmbedError {
    Perturbation(PerturbationFailed),
    /// Internal verification rejected a cover-built embedding. Returned
    /// instead of the embedding: callers never see unverified coordinates.
    Verification {
        pair: (usize, usize),
        achieved: BigRational,
        expected: BigRational,
    },
}

impl fmt::Display for EmbedError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EmbedError::Perturbation(p) => p.fmt(f),
            EmbedError::Verification {
                pair,
                achieved,
                expected,
            } => write!(
                f,
                "verification failed on pair ({}, {}): embedding gives {achieved}, \
                 metric wants {expected}",
                pair.0, pair.1
            ),
        }
    }
}

impl std::error::Error for EmbedError {}

/// A cover on a subset, ready for lifting.
struct SubsetCover {
    cover: EdgeCover,
    /// Construction color; `None` for a whole-space greedy cover.
    color: Option<QuadColor>,
    subset: Vec<usize>,
    used_fallback: bool,
}

/// Embeds `ms` into `l∞^k` aiming for `k <= n - c`.
///
/// Steps: perturb when quadruple sums tie (`epsilon` defaults to a thousandth
/// of the minimum distance); search the constructible colors for a
/// monochromatic subset of the size the color's cover needs; instantiate the
/// cover there, falling back to a budgeted greedy cover when a tree turns out
/// inadmissible; lift to the full space; verify exactly. When every color
/// fails, the baseline `n - 1` embedding is returned with `gain_achieved =
/// false` rather than an error.
pub fn embed_with_gain(
    ms: &MetricSpace,
    c: usize,
    strategy: Strategy,
    epsilon: Option<&BigRational>,
    seed: u64,
) -> Result<EmbedOutcome, EmbedError> {
    assert!(c >= 1, "gain must be at least 1");
    let n = ms.n();

    // Step 1: establish quadruple genericity, recording the move.
    let (work, perturbation) = if ms.genericity().quad_generic {
        (ms.clone(), None)
    } else {
        let eps = match epsilon {
            Some(e) => e.clone(),
            None => {
                let min = ms.min_distance().expect("perturbing needs two points");
                min / BigRational::from_integer(1000.into())
            }
        };
        let perturbed = ms
            .perturb_to_generic(&eps, seed)
            .map_err(EmbedError::Perturbation)?;
        let bound = &eps + &eps;
        (
            perturbed,
            Some(PerturbationNote {
                epsilon: eps,
                deviation_bound: bound,
            }),
        )
    };

    let mut failures: Vec<(QuadColor, CoverError)> = Vec::new();
    let mut found: Option<SubsetCover> = None;

    match strategy {
        Strategy::Frechet => {}
        Strategy::Greedy => {
            if c < n {
                if let Some(cover) = greedy_cover(&work, n - c) {
                    found = Some(SubsetCover {
                        cover,
                        color: None,
                        subset: (0..n).collect(),
                        used_fallback: false,
                    });
                }
            }
        }
        Strategy::Construction => {
            found = search_constructions(&work, c, &mut failures);
        }
    }

    if let Some(sc) = found {
        let lifted = lift_cover_from_subset(&sc, &work);
        let embedding =
            embedding_from_cover(&work, &lifted).expect("lifted covers are complete and total");
        let report = verify_embedding(&work, &embedding).expect("dimensions match");
        if !report.isometric {
            let w = report.witness.expect("non-isometric report carries witness");
            return Err(EmbedError::Verification {
                pair: w.pair,
                achieved: w.achieved,
                expected: w.expected,
            });
        }
        let k = embedding.k();
        assert!(k <= n - c, "cover bookkeeping must respect the budget");
        let report = EmbedReport {
            n,
            requested_gain: c,
            strategy,
            k,
            gain_achieved: true,
            subset: sc.color.is_some().then_some(sc.subset),
            color: sc.color,
            used_fallback: sc.used_fallback,
            construction_failures: failures,
            perturbation,
            degraded_reason: None,
        };
        return Ok(EmbedOutcome {
            embedding,
            cover: lifted,
            metric: work,
            report,
        });
    }

    // Degradation: baseline coordinates, honest status.
    let cover = EdgeCover::new(frechet_functions(&work, 0));
    let embedding =
        embedding_from_cover(&work, &cover).expect("baseline covers are complete and total");
    let verify = verify_embedding(&work, &embedding).expect("dimensions match");
    assert!(verify.isometric, "baseline embedding is always isometric");
    let k = embedding.k();
    let degraded_reason = match strategy {
        Strategy::Frechet => None,
        Strategy::Greedy => Some("no greedy cover within budget".to_string()),
        Strategy::Construction => {
            Some("no color produced a cover within budget".to_string())
        }
    };
    let report = EmbedReport {
        n,
        requested_gain: c,
        strategy,
        k,
        gain_achieved: k + c <= n,
        color: None,
        subset: None,
        used_fallback: false,
        construction_failures: failures,
        perturbation,
        degraded_reason,
    };
    Ok(EmbedOutcome {
        embedding,
        cover,
        metric: work,
        report,
    })
}

/// Rewrites a subset cover in original labels and lifts it to all of `ms`.
fn lift_cover_from_subset(sc: &SubsetCover, ms: &MetricSpace) -> EdgeCover {
    let relabeled: Vec<_> = sc
        .cover
        .fns
        .iter()
        .map(|f| f.relabeled(&sc.subset))
        .collect();
    lift_cover(&EdgeCover::new(relabeled), ms)
}

/// Tries each constructible color: find a monochromatic subset of the needed
/// size, instantiate the combinatorial cover on it, and fall back to a greedy
/// cover under the same budget when instantiation fails.
fn search_constructions(
    ms: &MetricSpace,
    c: usize,
    failures: &mut Vec<(QuadColor, CoverError)>,
) -> Option<SubsetCover> {
    let n = ms.n();
    // Monochromatic inputs short-circuit to their own color.
    let whole = mono_color(ms).ok().map(|r| r.mono);
    let mut order: Vec<QuadColor> = Vec::with_capacity(4);
    if let Some(MonoStatus::Mono(color)) = whole {
        if color.constructible() {
            order.push(color);
        }
    }
    for color in COLOR_ORDER {
        if !order.contains(&color) {
            order.push(color);
        }
    }

    for color in order {
        let s = match required_size(color, c) {
            Ok(s) => s,
            Err(_) => continue,
        };
        if s > n {
            continue;
        }
        let subset: Vec<usize> = if s <= 3 {
            // No quadruples: any points do.
            (0..s).collect()
        } else if whole == Some(MonoStatus::Mono(color)) && s == n {
            (0..n).collect()
        } else {
            match find_monochromatic_of_color(ms, s, color).subset {
                Some((points, _)) => points,
                None => continue,
            }
        };
        let sub_ms = ms.induced(&subset);
        match build_cover(color, c).and_then(|cc| instantiate_cover(&cc, &sub_ms)) {
            Ok(cover) => {
                return Some(SubsetCover {
                    cover,
                    color: Some(color),
                    subset,
                    used_fallback: false,
                });
            }
            Err(err) => {
                failures.push((color, err));
                // Same budget, no combinatorial claim: s - c trees on s points.
                if let Some(cover) = greedy_cover(&sub_ms, s - c) {
                    return Some(SubsetCover {
                        cover,
                        color: Some(color),
                        subset,
                        used_fallback: true,
                    });
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lipschitz::{frechet_embedding, max_abs_deviation};
    use crate::metric::{generate, SpaceKind};
    use crate::rat;
    use num_traits::Zero;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// The flagship case: a monochromatic 321 space on 2c points embeds in
    /// c = n/2 coordinates.
    #[test]
    fn mono_321_halves_the_dimension() {
        let ms = generate(SpaceKind::Mono(QuadColor::C321), 6, 11).unwrap();
        let out = embed_with_gain(&ms, 3, Strategy::Construction, None, 0).unwrap();
        assert_eq!(out.report.k, 3);
        assert!(out.report.gain_achieved);
        assert_eq!(out.report.color, Some(QuadColor::C321));
        assert_eq!(out.report.subset, Some(vec![0, 1, 2, 3, 4, 5]));
        assert!(!out.report.used_fallback);
        assert!(out.report.perturbation.is_none());
        assert_eq!(out.metric, ms);
        let verify = verify_embedding(&ms, &out.embedding).unwrap();
        assert!(verify.isometric);
    }

    #[test]
    fn mono_123_gains_two_on_thirteen_points() {
        let ms = generate(SpaceKind::Mono(QuadColor::C123), 13, 5).unwrap();
        let out = embed_with_gain(&ms, 2, Strategy::Construction, None, 0).unwrap();
        assert!(out.report.k <= 11);
        assert!(out.report.gain_achieved);
        assert_eq!(out.report.color, Some(QuadColor::C123));
        let verify = verify_embedding(&out.metric, &out.embedding).unwrap();
        assert!(verify.isometric);
    }

    /// Core of 9 monochromatic 231 points plus three planted points whose
    /// equal cross distances force the perturbation path.
    #[test]
    fn planted_core_survives_appended_points_and_perturbation() {
        let core = generate(SpaceKind::Mono(QuadColor::C231), 9, 3).unwrap();
        let n = 12;
        let mut upper = Vec::new();
        for i in 0..n - 1 {
            for j in i + 1..n {
                if j < 9 {
                    upper.push(core.dist(i, j).clone());
                } else {
                    upper.push(rat(9, 4));
                }
            }
        }
        let ms = MetricSpace::from_upper(n, upper).unwrap();
        assert!(!ms.genericity().quad_generic);

        let out = embed_with_gain(&ms, 2, Strategy::Construction, None, 17).unwrap();
        let note = out.report.perturbation.clone().expect("ties force a perturbation");
        assert!(out.report.gain_achieved);
        assert!(out.report.k <= 10);
        // Any constructible color may win; a subset of its size must exist.
        let color = out.report.color.expect("gain came from a construction");
        let subset = out.report.subset.clone().expect("construction used a subset");
        assert_eq!(
            subset.len(),
            crate::constructions::required_size(color, 2).unwrap()
        );
        // Exact on the perturbed metric, within 2 epsilon of the original.
        let verify = verify_embedding(&out.metric, &out.embedding).unwrap();
        assert!(verify.isometric);
        let dev = max_abs_deviation(&ms, &out.embedding).unwrap();
        assert!(dev <= note.deviation_bound);
        assert!(dev > BigRational::zero());
    }

    #[test]
    fn frechet_strategy_gains_exactly_one() {
        let ms = generate(SpaceKind::Random, 6, 2).unwrap();
        let out = embed_with_gain(&ms, 1, Strategy::Frechet, None, 0).unwrap();
        assert_eq!(out.report.k, 5);
        assert!(out.report.gain_achieved);
        assert!(out.report.degraded_reason.is_none());

        let out2 = embed_with_gain(&ms, 2, Strategy::Frechet, None, 0).unwrap();
        assert_eq!(out2.report.k, 5);
        assert!(!out2.report.gain_achieved);
    }

    #[test]
    fn greedy_strategy_reports_no_color() {
        let ms = generate(SpaceKind::Mono(QuadColor::C321), 4, 8).unwrap();
        let out = embed_with_gain(&ms, 1, Strategy::Greedy, None, 0).unwrap();
        if out.report.gain_achieved && out.report.degraded_reason.is_none() {
            assert_eq!(out.report.color, None);
            assert_eq!(out.report.subset, None);
        }
        let verify = verify_embedding(&out.metric, &out.embedding).unwrap();
        assert!(verify.isometric);
    }

    /// Mixed random spaces rarely hold big monochromatic subsets; the
    /// pipeline must degrade to n - 1 coordinates, not error.
    #[test]
    fn mixed_space_degrades_honestly() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let upper: Vec<BigRational> = (0..15)
            .map(|_| rat(1, 1) + rat(rng.random_range(0..=1000), 1000))
            .collect();
        let ms = MetricSpace::from_upper(6, upper).unwrap();
        let out = embed_with_gain(&ms, 3, Strategy::Construction, None, 1).unwrap();
        if !out.report.gain_achieved {
            assert_eq!(out.report.k, 5);
            assert!(out.report.degraded_reason.is_some());
            assert_eq!(out.report.color, None);
        }
        let verify = verify_embedding(&out.metric, &out.embedding).unwrap();
        assert!(verify.isometric);
    }

    #[test]
    fn identical_seeds_reproduce_identical_outcomes() {
        let core = generate(SpaceKind::Mono(QuadColor::C321), 6, 4).unwrap();
        // A tied quadruple forces perturbation, the seeded part of the run.
        let mut upper = core.upper_triangle().to_vec();
        upper[0] = upper[1].clone();
        let ms = match MetricSpace::from_upper(6, upper) {
            Ok(ms) => ms,
            Err(_) => core,
        };
        let a = embed_with_gain(&ms, 2, Strategy::Construction, None, 5).unwrap();
        let b = embed_with_gain(&ms, 2, Strategy::Construction, None, 5).unwrap();
        assert_eq!(a.embedding.rows(), b.embedding.rows());
        assert_eq!(a.report, b.report);
    }

    #[test]
    fn requested_gain_larger_than_construction_sizes_degrades() {
        // c = 4 needs 8 (321), 17 (231), 16 (132), 61 (123) points; on n = 6
        // nothing fits.
        let ms = generate(SpaceKind::Mono(QuadColor::C321), 6, 11).unwrap();
        let out = embed_with_gain(&ms, 4, Strategy::Construction, None, 0).unwrap();
        assert!(!out.report.gain_achieved);
        assert_eq!(out.report.k, 5);
        assert!(out.report.degraded_reason.is_some());
    }

    #[test]
    fn cover_round_trip_matches_baseline() {
        let ms = generate(SpaceKind::Random, 5, 21).unwrap();
        let baseline = frechet_embedding(&ms, 0);
        let cover = EdgeCover::new(frechet_functions(&ms, 0));
        let emb = embedding_from_cover(&ms, &cover).unwrap();
        assert_eq!(baseline.rows(), emb.rows());
    }
}
