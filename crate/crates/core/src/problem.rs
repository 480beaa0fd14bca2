//! The reduced multiobjective problem over the scalar design vector `α`.
//!
//! For a candidate `α` the matrix variables are not searched stochastically:
//! they are fixed to the EVP optimizer `X*(α)`, and `α` is feasible exactly
//! when `λ*(α) ≤ -eps_feas`. An `(α, X)` pair is feasible for some `X` iff the
//! EVP at `α` has a negative optimum, so Pareto-optimal `α` here are exactly the
//! Pareto-optimal pairs of the joint problem.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::lmi::{self, ConstraintSystem, EvpResult, EvpStatus};
use crate::{Error, Result};

pub type BuildFn = dyn Fn(&[f64]) -> Result<ConstraintSystem> + Send + Sync;
pub type ObjectiveFn = dyn Fn(&[f64], &ConstraintSystem, &EvpResult) -> Result<Vec<f64>> + Send + Sync;

/// A multiobjective matrix-inequality problem in reduced form.
#[derive(Clone)]
pub struct Momip {
    name: String,
    lo: Vec<f64>,
    hi: Vec<f64>,
    objectives: usize,
    build: Arc<BuildFn>,
    objective: Arc<ObjectiveFn>,
}

impl fmt::Debug for Momip {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Momip")
            .field("name", &self.name)
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .field("objectives", &self.objectives)
            .finish_non_exhaustive()
    }
}

impl Momip {
    pub fn new(
        name: impl Into<String>,
        lo: Vec<f64>,
        hi: Vec<f64>,
        objectives: usize,
        build: Arc<BuildFn>,
        objective: Arc<ObjectiveFn>,
    ) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::InvalidInput("bounds must be nonempty and of equal length".into()));
        }
        if lo.iter().chain(&hi).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("bounds must be finite".into()));
        }
        if lo.iter().zip(&hi).any(|(l, h)| l >= h) {
            return Err(Error::InvalidInput("each lower bound must be below its upper bound".into()));
        }
        if objectives == 0 {
            return Err(Error::InvalidInput("at least one objective is required".into()));
        }
        Ok(Self { name: name.into(), lo, hi, objectives, build, objective })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Dimension `M` of `α`.
    pub fn alpha_dim(&self) -> usize {
        self.lo.len()
    }

    /// Number of objectives `N`.
    pub fn objectives(&self) -> usize {
        self.objectives
    }

    pub fn lower(&self) -> &[f64] {
        &self.lo
    }

    pub fn upper(&self) -> &[f64] {
        &self.hi
    }

    pub fn with_bounds(self, lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != self.alpha_dim() || hi.len() != self.alpha_dim() {
            return Err(Error::Dimension(format!("bounds must have {} entries", self.alpha_dim())));
        }
        Momip::new(self.name, lo, hi, self.objectives, self.build, self.objective)
    }

    pub fn contains(&self, alpha: &[f64]) -> bool {
        alpha.len() == self.alpha_dim()
            && alpha.iter().zip(self.lo.iter().zip(&self.hi)).all(|(a, (l, h))| l <= a && a <= h)
    }

    pub fn build(&self, alpha: &[f64]) -> Result<ConstraintSystem> {
        (self.build)(alpha)
    }

    pub fn objective(&self, alpha: &[f64], system: &ConstraintSystem, evp: &EvpResult) -> Result<Vec<f64>> {
        (self.objective)(alpha, system, evp)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum InfeasibleReason {
    /// The builder rejected `α` (e.g. a nonpositive scalar).
    Builder(String),
    /// The EVP converged but `λ* > -eps_feas`.
    NotStrictlyFeasible,
    /// The EVP did not converge.
    Solver(EvpStatus),
    /// The objective could not be evaluated at a feasible point.
    Objective(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateEvaluation {
    pub alpha: Vec<f64>,
    pub feasible: bool,
    pub lambda_star: f64,
    pub f: Option<Vec<f64>>,
    pub x_star: Option<Vec<f64>>,
    pub reason: Option<InfeasibleReason>,
}

impl CandidateEvaluation {
    fn infeasible(alpha: &[f64], lambda_star: f64, reason: InfeasibleReason) -> Self {
        Self { alpha: alpha.to_vec(), feasible: false, lambda_star, f: None, x_star: None, reason: Some(reason) }
    }
}

/// Evaluates an in-bounds candidate. Out-of-bounds `α` is a caller bug and panics.
pub fn evaluate_candidate(p: &Momip, alpha: &[f64], eps_feas: f64) -> CandidateEvaluation {
    assert!(p.contains(alpha), "candidate {alpha:?} lies outside the search box of `{}`", p.name());
    evaluate_at(p, alpha, eps_feas)
}

/// Evaluates any `α`, ignoring the search box.
pub fn evaluate_at(p: &Momip, alpha: &[f64], eps_feas: f64) -> CandidateEvaluation {
    let system = match p.build(alpha) {
        Ok(s) => s,
        Err(e) => return CandidateEvaluation::infeasible(alpha, f64::NAN, InfeasibleReason::Builder(e.to_string())),
    };
    let check = lmi::is_strictly_feasible(&system, eps_feas);
    let evp = check.evp;
    if !evp.converged() {
        return CandidateEvaluation::infeasible(alpha, evp.lambda_star, InfeasibleReason::Solver(evp.status));
    }
    if !check.feasible {
        return CandidateEvaluation::infeasible(alpha, evp.lambda_star, InfeasibleReason::NotStrictlyFeasible);
    }
    match p.objective(alpha, &system, &evp) {
        Ok(f) if f.len() == p.objectives() && f.iter().all(|v| v.is_finite()) => CandidateEvaluation {
            alpha: alpha.to_vec(),
            feasible: true,
            lambda_star: evp.lambda_star,
            f: Some(f),
            x_star: Some(evp.x_star),
            reason: None,
        },
        Ok(f) => CandidateEvaluation::infeasible(
            alpha,
            evp.lambda_star,
            InfeasibleReason::Objective(format!("objective returned {f:?}")),
        ),
        Err(e) => CandidateEvaluation::infeasible(alpha, evp.lambda_star, InfeasibleReason::Objective(e.to_string())),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dominance {
    Dominates,
    DominatedBy,
    Incomparable,
    Equal,
}

/// Pareto relation for minimization: `a` dominates `b` when it is no worse in
/// every coordinate and strictly better in at least one.
pub fn dominates(a: &[f64], b: &[f64]) -> Dominance {
    assert_eq!(a.len(), b.len(), "objective vectors differ in length");
    let mut better = false;
    let mut worse = false;
    for (x, y) in a.iter().zip(b) {
        if x < y {
            better = true;
        } else if x > y {
            worse = true;
        }
    }
    match (better, worse) {
        (true, false) => Dominance::Dominates,
        (false, true) => Dominance::DominatedBy,
        (true, true) => Dominance::Incomparable,
        (false, false) => Dominance::Equal,
    }
}

/// Feasible evaluations not dominated by any other feasible evaluation in the set.
pub fn nondominated(evals: &[CandidateEvaluation]) -> Vec<CandidateEvaluation> {
    let feasible: Vec<&CandidateEvaluation> = evals.iter().filter(|e| e.feasible && e.f.is_some()).collect();
    feasible
        .iter()
        .filter(|e| {
            let f = e.f.as_ref().unwrap();
            !feasible.iter().any(|o| dominates(o.f.as_ref().unwrap(), f) == Dominance::Dominates)
        })
        .map(|e| (*e).clone())
        .collect()
}

/// Points of the uniform grid over the bounds box, `counts[j]` per axis, last axis fastest.
pub fn grid_points(lo: &[f64], hi: &[f64], counts: &[usize]) -> Vec<Vec<f64>> {
    assert!(counts.len() == lo.len() && counts.iter().all(|&c| c >= 2), "need at least 2 points per axis");
    let mut out = vec![Vec::new()];
    for (j, &c) in counts.iter().enumerate() {
        let axis: Vec<f64> = (0..c)
            .map(|k| if k + 1 == c { hi[j] } else { lo[j] + (hi[j] - lo[j]) * k as f64 / (c - 1) as f64 })
            .collect();
        out = out
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out
}

/// Evaluates every grid point and returns the nondominated feasible subset.
pub fn brute_force_pareto(p: &Momip, grid_counts: &[usize], eps_feas: f64) -> Vec<CandidateEvaluation> {
    use rayon::prelude::*;
    let points = grid_points(p.lower(), p.upper(), grid_counts);
    let evals: Vec<CandidateEvaluation> =
        points.par_iter().map(|a| evaluate_candidate(p, a, eps_feas)).collect();
    nondominated(&evals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lmi::AffineBlock;
    use crate::matrix::SymmetricMatrix;

    /// α is feasible iff α_0 + α_1 > 1; f(α) = α.
    fn half_plane() -> Momip {
        Momip::new(
            "half-plane",
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            2,
            Arc::new(|a: &[f64]| {
                ConstraintSystem::with_dim(vec![AffineBlock::constant(SymmetricMatrix::diag(&[1.0 - a[0] - a[1]]))], 0)
            }),
            Arc::new(|a: &[f64], _: &ConstraintSystem, _: &EvpResult| Ok(a.to_vec())),
        )
        .unwrap()
    }

    #[test]
    fn dominance_cases() {
        assert_eq!(dominates(&[1.0, 2.0], &[1.0, 2.0]), Dominance::Equal);
        assert_eq!(dominates(&[1.0, 2.0], &[2.0, 2.0]), Dominance::Dominates);
        assert_eq!(dominates(&[2.0, 2.0], &[1.0, 2.0]), Dominance::DominatedBy);
        assert_eq!(dominates(&[1.0, 3.0], &[2.0, 2.0]), Dominance::Incomparable);
    }

    #[test]
    fn identity_objective_is_exact() {
        let p = half_plane();
        let e = evaluate_candidate(&p, &[0.7, 0.9], 1e-7);
        assert!(e.feasible);
        assert_eq!(e.f.as_deref(), Some(&[0.7, 0.9][..]));
        let e = evaluate_candidate(&p, &[0.2, 0.3], 1e-7);
        assert!(!e.feasible);
        assert_eq!(e.reason, Some(InfeasibleReason::NotStrictlyFeasible));
        assert!(e.f.is_none() && e.x_star.is_none());
    }

    #[test]
    #[should_panic(expected = "outside the search box")]
    fn out_of_bounds_candidate_panics() {
        evaluate_candidate(&half_plane(), &[2.0, 0.0], 1e-7);
    }

    #[test]
    fn builder_error_is_tagged_infeasible() {
        let p = Momip::new(
            "broken",
            vec![0.0],
            vec![1.0],
            1,
            Arc::new(|_: &[f64]| Err(Error::InvalidInput("nope".into()))),
            Arc::new(|a: &[f64], _: &ConstraintSystem, _: &EvpResult| Ok(a.to_vec())),
        )
        .unwrap();
        let e = evaluate_candidate(&p, &[0.5], 1e-7);
        assert!(!e.feasible);
        assert!(matches!(e.reason, Some(InfeasibleReason::Builder(_))));
    }

    #[test]
    fn brute_force_front_of_half_plane() {
        let front = brute_force_pareto(&half_plane(), &[5, 5], 1e-7);
        // grid 0, .25, .5, .75, 1: nondominated feasible points satisfy a0 + a1 = 1.25
        let mut alphas: Vec<Vec<f64>> = front.iter().map(|e| e.alpha.clone()).collect();
        alphas.sort_by(|a, b| a[0].total_cmp(&b[0]));
        assert_eq!(alphas, vec![vec![0.25, 1.0], vec![0.5, 0.75], vec![0.75, 0.5], vec![1.0, 0.25]]);
    }

    #[test]
    fn brute_force_empty_and_single() {
        let none = Momip::new(
            "never",
            vec![0.0],
            vec![1.0],
            1,
            Arc::new(|_: &[f64]| ConstraintSystem::with_dim(vec![AffineBlock::constant(SymmetricMatrix::diag(&[1.0]))], 0)),
            Arc::new(|a: &[f64], _: &ConstraintSystem, _: &EvpResult| Ok(a.to_vec())),
        )
        .unwrap();
        assert!(brute_force_pareto(&none, &[4], 1e-7).is_empty());
        let single = Momip::new(
            "corner",
            vec![0.0],
            vec![1.0],
            1,
            Arc::new(|a: &[f64]| {
                ConstraintSystem::with_dim(vec![AffineBlock::constant(SymmetricMatrix::diag(&[0.5 - a[0]]))], 0)
            }),
            Arc::new(|a: &[f64], _: &ConstraintSystem, _: &EvpResult| Ok(a.to_vec())),
        )
        .unwrap();
        let front = brute_force_pareto(&single, &[2], 1e-7);
        assert_eq!(front.len(), 1);
        assert_eq!(front[0].alpha, vec![1.0]);
    }

    #[test]
    fn grid_hits_both_bounds() {
        let g = grid_points(&[0.5, 0.5], &[8.0, 8.0], &[8, 8]);
        assert_eq!(g.len(), 64);
        assert_eq!(g[0], vec![0.5, 0.5]);
        assert_eq!(g[63], vec![8.0, 8.0]);
    }
}
