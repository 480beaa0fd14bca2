//! Hybrid multiobjective differential evolution over `α`.
//!
//! Each candidate `α` is scored through its EVP: it is feasible when
//! `λ*(α) ≤ -eps_feas` and then carries the objective vector `f(α)`. The
//! search keeps an archive of mutually nondominated, `η_d`-spaced objective
//! vectors and finishes by picking the knee of that archive.
//!
//! Phase I is classic DE (mutation about an archived best, reflection into
//! the box, binomial crossover, feasibility-first selection). Phase II
//! replaces individuals with random convex recombinations of archive pairs.
//!
//! Every generation is computed from a snapshot of the previous one and each
//! individual draws from its own RNG substream, so evaluations run in
//! parallel without affecting results.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::problem::{dominates, evaluate_candidate, CandidateEvaluation, Dominance, Momip};
use crate::{Error, Result, EPS_FEAS};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HmodeConfig {
    /// `N_p`.
    pub population: usize,
    /// `N_I`.
    pub iterations: usize,
    /// `η_c`.
    pub crossover_rate: f64,
    /// `η_d`.
    pub archive_spacing: f64,
    /// Share of iterations spent in Phase I.
    pub phase_fraction: f64,
    pub seed: u64,
    pub eps_feas: f64,
}

impl Default for HmodeConfig {
    fn default() -> Self {
        Self {
            population: 100,
            iterations: 200,
            crossover_rate: 0.2,
            archive_spacing: 0.05,
            phase_fraction: 2.0 / 3.0,
            seed: 0,
            eps_feas: EPS_FEAS,
        }
    }
}

impl HmodeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 4 {
            return Err(Error::Config(format!("population must be at least 4, got {}", self.population)));
        }
        if self.iterations < 1 {
            return Err(Error::Config("iterations must be at least 1".into()));
        }
        if !(self.crossover_rate > 0.0 && self.crossover_rate < 1.0) {
            return Err(Error::Config(format!("crossover_rate must lie in (0, 1), got {}", self.crossover_rate)));
        }
        if !(self.archive_spacing > 0.0 && self.archive_spacing.is_finite()) {
            return Err(Error::Config(format!("archive_spacing must be positive, got {}", self.archive_spacing)));
        }
        if !(self.phase_fraction > 0.0 && self.phase_fraction <= 1.0) {
            return Err(Error::Config(format!("phase_fraction must lie in (0, 1], got {}", self.phase_fraction)));
        }
        if !(self.eps_feas > 0.0 && self.eps_feas.is_finite()) {
            return Err(Error::Config(format!("eps_feas must be positive, got {}", self.eps_feas)));
        }
        Ok(())
    }

    /// Last generation index (1-based) that runs Phase I.
    pub fn phase_one_end(&self) -> usize {
        (self.phase_fraction * self.iterations as f64).floor() as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchiveEntry {
    pub f: Vec<f64>,
    pub alpha: Vec<f64>,
    pub x_star: Vec<f64>,
    pub lambda_star: f64,
}

/// Mutually nondominated objective vectors, pairwise farther apart than `eta_d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Archive {
    entries: Vec<ArchiveEntry>,
    eta_d: f64,
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

impl Archive {
    pub fn new(eta_d: f64) -> Self {
        Self { entries: Vec::new(), eta_d }
    }

    /// Entries in insertion order.
    pub fn entries(&self) -> &[ArchiveEntry] {
        &self.entries
    }

    pub fn eta_d(&self) -> f64 {
        self.eta_d
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Offers a feasible candidate; returns whether it was inserted.
    ///
    /// A candidate dominated by (or equal to) an archived vector is rejected.
    /// Otherwise the entries it dominates are dropped, and it is inserted if it
    /// lies farther than `eta_d` from every remaining entry.
    pub fn update(&mut self, candidate: &CandidateEvaluation) -> bool {
        assert!(candidate.feasible, "only feasible candidates may enter the archive");
        let f = candidate.f.as_deref().expect("feasible candidates carry objectives");
        if self
            .entries
            .iter()
            .any(|e| matches!(dominates(&e.f, f), Dominance::Dominates | Dominance::Equal))
        {
            return false;
        }
        self.entries.retain(|e| dominates(f, &e.f) != Dominance::Dominates);
        let nearest = self.entries.iter().map(|e| distance(&e.f, f)).fold(f64::INFINITY, f64::min);
        if nearest > self.eta_d {
            self.entries.push(ArchiveEntry {
                f: f.to_vec(),
                alpha: candidate.alpha.clone(),
                x_star: candidate.x_star.clone().unwrap_or_default(),
                lambda_star: candidate.lambda_star,
            });
            true
        } else {
            false
        }
    }

    /// Builds an archive directly from entries, e.g. for testing knee selection.
    pub fn from_entries(entries: Vec<ArchiveEntry>, eta_d: f64) -> Self {
        Self { entries, eta_d }
    }
}

/// Free-function form of [`Archive::update`].
pub fn archive_update(archive: &mut Archive, candidate: &CandidateEvaluation) -> bool {
    archive.update(candidate)
}

/// `best + r (a_j - a_k)`.
pub fn mutate(best: &[f64], a_j: &[f64], a_k: &[f64], r: f64) -> Vec<f64> {
    assert!(best.len() == a_j.len() && a_j.len() == a_k.len(), "mutation operands differ in length");
    best.iter().zip(a_j.iter().zip(a_k)).map(|(b, (j, k))| b + r * (j - k)).collect()
}

/// Mirrors out-of-box components back inside, clamping deep overshoots to the far bound.
pub fn reflect(v: &[f64], lo: &[f64], hi: &[f64]) -> Vec<f64> {
    v.iter()
        .zip(lo.iter().zip(hi))
        .map(|(&x, (&l, &h))| {
            if x < l {
                h.min(2.0 * l - x)
            } else if x > h {
                l.max(2.0 * h - x)
            } else {
                x
            }
        })
        .collect()
}

/// Binomial crossover: component `j` comes from the mutant when a fresh draw is
/// below `eta_c` or `j == j_rand`.
pub fn crossover<R: Rng + ?Sized>(parent: &[f64], mutant: &[f64], eta_c: f64, j_rand: usize, rng: &mut R) -> Vec<f64> {
    assert_eq!(parent.len(), mutant.len(), "crossover operands differ in length");
    assert!(j_rand < parent.len(), "j_rand out of range");
    parent
        .iter()
        .zip(mutant)
        .enumerate()
        .map(|(j, (&p, &m))| {
            let draw: f64 = rng.random();
            if draw < eta_c || j == j_rand { m } else { p }
        })
        .collect()
}

/// Keep the child if it is feasible and the parent is not, or both are feasible
/// and the child is strictly better in every objective.
pub fn select(parent: &CandidateEvaluation, child: &CandidateEvaluation) -> bool {
    match (parent.feasible, child.feasible) {
        (_, false) => false,
        (false, true) => true,
        (true, true) => {
            let (fp, fc) = (parent.f.as_deref().unwrap_or_default(), child.f.as_deref().unwrap_or_default());
            fp.len() == fc.len() && fc.iter().zip(fp).all(|(c, p)| c < p)
        }
    }
}

/// `r_j a1_j + (1 - r_j) a2_j` with independent `r_j ∈ (0, 1)`.
pub fn phase2_recombine<R: Rng + ?Sized>(a1: &[f64], a2: &[f64], rng: &mut R) -> Vec<f64> {
    assert_eq!(a1.len(), a2.len(), "recombination operands differ in length");
    a1.iter()
        .zip(a2)
        .map(|(&x, &y)| {
            let r: f64 = rng.sample(Open01);
            // keeps the result inside [min, max] despite rounding
            (r * x + (1.0 - r) * y).clamp(x.min(y), x.max(y))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KneeSelection {
    pub index: usize,
    pub score: f64,
}

/// Per-entry knee scores `Π_n (f̄_n - f_n) / (f̄_n - f_lo_n)`.
///
/// Objectives that are constant across the archive contribute a factor of 1.
pub fn knee_scores(entries: &[ArchiveEntry]) -> Vec<f64> {
    let Some(first) = entries.first() else { return Vec::new() };
    let n = first.f.len();
    let hi: Vec<f64> = (0..n).map(|k| entries.iter().map(|e| e.f[k]).fold(f64::NEG_INFINITY, f64::max)).collect();
    let lo: Vec<f64> = (0..n).map(|k| entries.iter().map(|e| e.f[k]).fold(f64::INFINITY, f64::min)).collect();
    entries
        .iter()
        .map(|e| {
            (0..n)
                .map(|k| if hi[k] > lo[k] { (hi[k] - e.f[k]) / (hi[k] - lo[k]) } else { 1.0 })
                .product()
        })
        .collect()
}

/// The entry with the largest knee score; ties go to the earliest entry.
pub fn knee_select(archive: &Archive) -> Result<KneeSelection> {
    let scores = knee_scores(archive.entries());
    let mut best: Option<KneeSelection> = None;
    for (index, score) in scores.into_iter().enumerate() {
        if best.as_ref().is_none_or(|b| score > b.score) {
            best = Some(KneeSelection { index, score });
        }
    }
    best.ok_or(Error::EmptyArchive)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HmodeOutput {
    pub archive: Archive,
    pub knee: Option<KneeSelection>,
    pub generations_run: usize,
    pub evaluations: usize,
}

impl HmodeOutput {
    pub fn knee_entry(&self) -> Option<&ArchiveEntry> {
        self.knee.as_ref().map(|k| &self.archive.entries()[k.index])
    }
}

/// Deterministic per-individual stream: generation `g`, individual `i`.
fn substream(seed: u64, generation: usize, individual: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((generation as u64) << 32) | individual as u64);
    rng
}

/// Draws an index from `0..n` avoiding `exclude`.
fn draw_excluding<R: Rng>(rng: &mut R, n: usize, exclude: &[usize]) -> usize {
    loop {
        let c = rng.random_range(0..n);
        if !exclude.contains(&c) {
            return c;
        }
    }
}

/// Snapshot of one generation, passed to [`run_observed`] observers.
pub struct Generation<'a> {
    pub index: usize,
    pub phase_one: bool,
    pub population: &'a [CandidateEvaluation],
    pub archive: &'a Archive,
}

pub fn run(p: &Momip, cfg: &HmodeConfig) -> Result<HmodeOutput> {
    run_observed(p, cfg, |_| {})
}

/// [`run`], calling `observe` after every generation's archive update.
pub fn run_observed(p: &Momip, cfg: &HmodeConfig, mut observe: impl FnMut(&Generation<'_>)) -> Result<HmodeOutput> {
    cfg.validate()?;
    let (lo, hi) = (p.lower(), p.upper());
    let np = cfg.population;
    let eps = cfg.eps_feas;

    let mut population: Vec<CandidateEvaluation> = (0..np)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(cfg.seed, 0, i);
            let alpha: Vec<f64> = lo.iter().zip(hi).map(|(&l, &h)| rng.random_range(l..=h)).collect();
            evaluate_candidate(p, &alpha, eps)
        })
        .collect();
    let mut evaluations = np;
    let mut archive = Archive::new(cfg.archive_spacing);
    let phase_one_end = cfg.phase_one_end();

    for generation in 1..=cfg.iterations {
        let phase_one = generation <= phase_one_end;
        let snapshot = &population;
        let gamma = &archive;
        let next: Vec<CandidateEvaluation> = (0..np)
            .into_par_iter()
            .map(|i| {
                let mut rng = substream(cfg.seed, generation, i);
                if !phase_one && gamma.len() >= 2 {
                    let a = rng.random_range(0..gamma.len());
                    let b = draw_excluding(&mut rng, gamma.len(), &[a]);
                    let alpha = phase2_recombine(&gamma.entries()[a].alpha, &gamma.entries()[b].alpha, &mut rng);
                    return evaluate_candidate(p, &alpha, eps);
                }
                let j = draw_excluding(&mut rng, np, &[i]);
                let k = draw_excluding(&mut rng, np, &[i, j]);
                let best = if gamma.is_empty() {
                    &snapshot[draw_excluding(&mut rng, np, &[i, j, k])].alpha
                } else {
                    &gamma.entries()[rng.random_range(0..gamma.len())].alpha
                };
                let r: f64 = rng.sample(Open01);
                let v = reflect(&mutate(best, &snapshot[j].alpha, &snapshot[k].alpha, r), lo, hi);
                let j_rand = rng.random_range(0..v.len());
                let child = crossover(&snapshot[i].alpha, &v, cfg.crossover_rate, j_rand, &mut rng);
                let child = evaluate_candidate(p, &child, eps);
                if select(&snapshot[i], &child) { child } else { snapshot[i].clone() }
            })
            .collect();
        evaluations += np;
        population = next;
        for c in population.iter().filter(|c| c.feasible) {
            archive.update(c);
        }
        observe(&Generation { index: generation, phase_one, population: &population, archive: &archive });
    }

    let knee = knee_select(&archive).ok();
    Ok(HmodeOutput { archive, knee, generations_run: cfg.iterations, evaluations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lmi::{AffineBlock, ConstraintSystem};
    use crate::matrix::SymmetricMatrix;
    use proptest::prelude::*;
    use std::collections::BTreeMap;
    use std::sync::Arc;

    fn feasible(f: &[f64]) -> CandidateEvaluation {
        CandidateEvaluation {
            alpha: f.to_vec(),
            feasible: true,
            lambda_star: -1.0,
            f: Some(f.to_vec()),
            x_star: Some(vec![]),
            reason: None,
        }
    }

    fn infeasible() -> CandidateEvaluation {
        CandidateEvaluation { feasible: false, f: None, x_star: None, lambda_star: 1.0, ..feasible(&[0.0]) }
    }

    fn entry(f: &[f64]) -> ArchiveEntry {
        ArchiveEntry { f: f.to_vec(), alpha: f.to_vec(), x_star: vec![], lambda_star: -1.0 }
    }

    /// `α` is feasible iff `α_1 + α_2 ≥ 1.5`, with `f = α`.
    fn half_plane() -> Momip {
        Momip::new(
            "half-plane",
            vec![0.0, 0.0],
            vec![2.0, 2.0],
            2,
            Arc::new(|a: &[f64]| {
                let base = SymmetricMatrix::diag(&[1.5 - a[0] - a[1]]);
                ConstraintSystem::with_dim(vec![AffineBlock::new(base, BTreeMap::new())?], 0)
            }),
            Arc::new(|a: &[f64], _: &ConstraintSystem, _: &_| Ok(a.to_vec())),
        )
        .unwrap()
    }

    #[test]
    fn mutate_examples() {
        assert_eq!(mutate(&[1.0, 1.0], &[2.0, 0.0], &[0.0, 2.0], 0.5), vec![2.0, 0.0]);
        assert_eq!(mutate(&[0.3, 4.0], &[1.0, 1.0], &[1.0, 1.0], 0.9), vec![0.3, 4.0]);
    }

    #[test]
    fn reflect_examples() {
        assert_eq!(reflect(&[5.0], &[0.0], &[10.0]), vec![5.0]);
        assert_eq!(reflect(&[-3.0], &[0.0], &[10.0]), vec![3.0]);
        assert_eq!(reflect(&[25.0], &[0.0], &[10.0]), vec![0.0]);
        assert_eq!(reflect(&[-30.0], &[0.0], &[10.0]), vec![10.0]);
    }

    #[test]
    fn crossover_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let parent = [0.0; 5];
        let mutant = [1.0; 5];
        assert_eq!(crossover(&parent, &mutant, 1.0, 2, &mut rng), mutant.to_vec());
        assert_eq!(crossover(&parent, &mutant, 0.0, 3, &mut rng), vec![0.0, 0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn crossover_golden_mask() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let out = crossover(&[0.0; 8], &[1.0; 8], 0.5, 0, &mut rng);
        assert_eq!(out, vec![1.0, 0.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn phase2_golden_vector() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let out = phase2_recombine(&[0.0, 0.0], &[1.0, 1.0], &mut rng);
        assert_eq!(out, vec![0.3181038076933286, 0.049724592327515915]);
    }

    #[test]
    fn select_rules() {
        assert!(!select(&infeasible(), &infeasible()));
        assert!(!select(&feasible(&[1.0, 1.0]), &infeasible()));
        assert!(select(&infeasible(), &feasible(&[9.0, 9.0])));
        assert!(!select(&feasible(&[2.0, 2.0]), &feasible(&[1.0, 3.0])));
        assert!(!select(&feasible(&[2.0, 2.0]), &feasible(&[1.0, 2.0])));
        assert!(select(&feasible(&[2.0, 2.0]), &feasible(&[1.0, 1.5])));
    }

    #[test]
    fn archive_examples() {
        let mut a = Archive::new(0.05);
        assert!(a.update(&feasible(&[1.0, 1.0])));
        assert!(!a.update(&feasible(&[1.0 + 1e-9, 1.0 + 1e-9])));
        assert!(!a.update(&feasible(&[1.0, 1.0])));

        let mut a = Archive::from_entries(vec![entry(&[1.0, 3.0]), entry(&[3.0, 1.0])], 0.05);
        assert!(a.update(&feasible(&[0.0, 0.0])));
        assert_eq!(a.entries().len(), 1);
        assert_eq!(a.entries()[0].f, vec![0.0, 0.0]);

        // nondominated but too close
        let mut a = Archive::from_entries(vec![entry(&[1.0, 3.0])], 0.05);
        assert!(!a.update(&feasible(&[0.99, 3.01])));
        assert!(a.update(&feasible(&[0.9, 3.1])));
    }

    #[test]
    fn knee_examples() {
        let a = Archive::from_entries(
            vec![entry(&[1.8324, 6.6537]), entry(&[2.1412, 2.0705]), entry(&[4.0862, 0.5084])],
            0.05,
        );
        let k = knee_select(&a).unwrap();
        assert_eq!(k.index, 1);
        let scores = knee_scores(a.entries());
        let hand = (4.0862 - 2.1412) / (4.0862 - 1.8324) * (6.6537 - 2.0705) / (6.6537 - 0.5084);
        assert!((k.score - hand).abs() < 1e-15);
        assert!((k.score - 0.644).abs() < 1e-3);
        assert_eq!((scores[0], scores[2]), (0.0, 0.0));

        let single = Archive::from_entries(vec![entry(&[3.0, 4.0])], 0.05);
        assert_eq!(knee_select(&single).unwrap(), KneeSelection { index: 0, score: 1.0 });
        assert!(matches!(knee_select(&Archive::new(0.05)), Err(Error::EmptyArchive)));
    }

    #[test]
    fn config_validation() {
        assert!(HmodeConfig::default().validate().is_ok());
        assert!(HmodeConfig { population: 3, ..Default::default() }.validate().is_err());
        assert!(HmodeConfig { iterations: 0, ..Default::default() }.validate().is_err());
        assert!(HmodeConfig { crossover_rate: 1.0, ..Default::default() }.validate().is_err());
        assert!(HmodeConfig { archive_spacing: 0.0, ..Default::default() }.validate().is_err());
        assert!(HmodeConfig { phase_fraction: 0.0, ..Default::default() }.validate().is_err());
        assert_eq!(HmodeConfig::default().phase_one_end(), 133);
    }

    #[test]
    fn infeasible_box_gives_empty_archive() {
        let p = half_plane().with_bounds(vec![0.0, 0.0], vec![0.5, 0.5]).unwrap();
        let cfg = HmodeConfig { population: 8, iterations: 1, ..Default::default() };
        let out = run(&p, &cfg).unwrap();
        assert!(out.archive.is_empty());
        assert!(out.knee.is_none());
        assert_eq!(out.evaluations, 16);
    }

    #[test]
    fn run_is_deterministic_and_keeps_invariants() {
        let p = half_plane();
        let cfg = HmodeConfig { population: 12, iterations: 15, seed: 5, ..Default::default() };
        let mut previous: Option<Vec<CandidateEvaluation>> = None;
        let out = run_observed(&p, &cfg, |g| {
            check_archive(g.archive);
            if g.phase_one {
                if let Some(prev) = &previous {
                    for (a, b) in prev.iter().zip(g.population) {
                        assert!(!a.feasible || b.feasible);
                    }
                }
            }
            previous = Some(g.population.to_vec());
        })
        .unwrap();
        assert!(!out.archive.is_empty());
        for e in out.archive.entries() {
            assert!(e.alpha[0] + e.alpha[1] >= 1.5 - 1e-9);
        }
        assert_eq!(out, run(&p, &cfg).unwrap());
        let other = run(&p, &HmodeConfig { seed: 6, ..cfg }).unwrap();
        assert_ne!(out.archive, other.archive);
    }

    fn check_archive(a: &Archive) {
        let e = a.entries();
        for i in 0..e.len() {
            assert!(e[i].lambda_star < 0.0);
            for j in i + 1..e.len() {
                assert_eq!(dominates(&e[i].f, &e[j].f), Dominance::Incomparable);
                assert!(distance(&e[i].f, &e[j].f) > a.eta_d());
            }
        }
    }

    proptest! {
        #[test]
        fn reflect_stays_in_box(v in prop::collection::vec(-50.0f64..50.0, 3), lo in -5.0f64..0.0, w in 0.1f64..10.0) {
            let lo = vec![lo; 3];
            let hi: Vec<f64> = lo.iter().map(|l| l + w).collect();
            for (x, (l, h)) in reflect(&v, &lo, &hi).iter().zip(lo.iter().zip(&hi)) {
                prop_assert!(l <= x && x <= h);
            }
        }

        #[test]
        fn mutate_matches_componentwise(b in prop::collection::vec(-5.0f64..5.0, 4), j in prop::collection::vec(-5.0f64..5.0, 4),
                                        k in prop::collection::vec(-5.0f64..5.0, 4), r in 0.0f64..1.0) {
            let v = mutate(&b, &j, &k, r);
            for i in 0..4 {
                prop_assert_eq!(v[i], b[i] + r * (j[i] - k[i]));
            }
        }

        #[test]
        fn crossover_takes_forced_index(seed in any::<u64>(), j_rand in 0usize..6, eta in 0.0f64..1.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let out = crossover(&[0.0; 6], &[1.0; 6], eta, j_rand, &mut rng);
            prop_assert_eq!(out[j_rand], 1.0);
            prop_assert!(out.iter().all(|&x| x == 0.0 || x == 1.0));
        }

        #[test]
        fn recombination_in_cube(a in prop::collection::vec(-5.0f64..5.0, 3), b in prop::collection::vec(-5.0f64..5.0, 3), seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = phase2_recombine(&a, &b, &mut rng);
            for i in 0..3 {
                prop_assert!(a[i].min(b[i]) <= c[i] && c[i] <= a[i].max(b[i]));
            }
        }

        #[test]
        fn archive_invariants_hold(points in prop::collection::vec(prop::collection::vec(0.0f64..3.0, 2), 1..60)) {
            let mut a = Archive::new(0.1);
            for p in &points {
                a.update(&feasible(p));
                check_archive(&a);
            }
            prop_assert!(!a.is_empty());
        }

        #[test]
        fn knee_invariant_under_affine_rescaling(
            points in prop::collection::vec(prop::collection::vec(0.0f64..10.0, 3), 1..20),
            scale in prop::collection::vec(0.1f64..10.0, 3),
            shift in prop::collection::vec(-5.0f64..5.0, 3),
        ) {
            let entries: Vec<ArchiveEntry> = points.iter().map(|p| entry(p)).collect();
            let scaled: Vec<ArchiveEntry> = points
                .iter()
                .map(|p| entry(&p.iter().enumerate().map(|(n, v)| scale[n] * v + shift[n]).collect::<Vec<_>>()))
                .collect();
            let a = knee_scores(&entries);
            let b = knee_scores(&scaled);
            let k1 = knee_select(&Archive::from_entries(entries, 0.0)).unwrap();
            let k2 = knee_select(&Archive::from_entries(scaled, 0.0)).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-9);
            }
            prop_assert!(a[k2.index] >= a[k1.index] - 1e-9);
        }
    }
}
