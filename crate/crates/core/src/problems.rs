//! Controller-design problems expressed as [`Momip`] instances.
//!
//! Two designs are provided:
//!
//! - Robust H∞ state feedback for an uncertain Takagi–Sugeno fuzzy plant with
//!   `α = [γ, ρ, δ]`. `γ` is the attenuation level, `1/ρ` bounds the uncertainty
//!   `‖F‖` and `δ` is an auxiliary scaling. Objectives are `[γ, ρ]`, optionally
//!   augmented with `1/det(Z*)` to discourage large gains.
//! - Bounded-input bounded-output state feedback for a linear plant with
//!   `α = [ū, ȳ]`; the objective is `α` itself.
//!
//! In both cases gains are recovered as `K = M Z⁻¹`.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::lmi::{assemble_lower, AffineExpr, ConstraintSystem, EvpResult, VariableKind, VariableLayout};
use crate::matrix::{self, Matrix};
use crate::problem::Momip;
use crate::{Error, Result};

/// One rule of an uncertain fuzzy plant.
#[derive(Clone, Debug, PartialEq)]
pub struct FuzzyRule {
    pub a: Matrix,
    pub b1: Matrix,
    pub b2: Matrix,
    pub c: Matrix,
    pub d: Matrix,
    pub h: Matrix,
}

/// `ẋ = Σ ξ_i {(A_i + F H_i) x + B1_i w + B2_i u}`, `y = Σ ξ_i (C_i x + D_i u)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RobustFuzzyPlant {
    rules: Vec<FuzzyRule>,
}

impl RobustFuzzyPlant {
    pub fn new(rules: Vec<FuzzyRule>) -> Result<Self> {
        let first = rules.first().ok_or_else(|| Error::InvalidInput("plant needs at least one rule".into()))?;
        let n = first.a.rows();
        let nw = first.b1.cols();
        let nu = first.b2.cols();
        let ny = first.c.rows();
        for (i, r) in rules.iter().enumerate() {
            let ok = r.a.shape() == (n, n)
                && r.b1.shape() == (n, nw)
                && r.b2.shape() == (n, nu)
                && r.c.shape() == (ny, n)
                && r.d.shape() == (ny, nu)
                && r.h.shape() == (n, n);
            if !ok {
                return Err(Error::Dimension(format!("rule {i} has inconsistent matrix shapes")));
            }
        }
        Ok(Self { rules })
    }

    pub fn rules(&self) -> &[FuzzyRule] {
        &self.rules
    }

    pub fn states(&self) -> usize {
        self.rules[0].a.rows()
    }

    pub fn inputs(&self) -> usize {
        self.rules[0].b2.cols()
    }

    pub fn disturbances(&self) -> usize {
        self.rules[0].b1.cols()
    }

    pub fn outputs(&self) -> usize {
        self.rules[0].c.rows()
    }
}

/// `ẋ = A x + B u`, `y = C x`, started from `x0`.
#[derive(Clone, Debug, PartialEq)]
pub struct BiboPlant {
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
    pub x0: Vec<f64>,
}

impl BiboPlant {
    pub fn new(a: Matrix, b: Matrix, c: Matrix, x0: Vec<f64>) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n || b.rows() != n || c.cols() != n || x0.len() != n {
            return Err(Error::Dimension("plant matrices are inconsistent".into()));
        }
        Ok(Self { a, b, c, x0 })
    }

    pub fn states(&self) -> usize {
        self.a.rows()
    }

    pub fn inputs(&self) -> usize {
        self.b.cols()
    }

    pub fn outputs(&self) -> usize {
        self.c.rows()
    }
}

/// Feedback gains, one per fuzzy rule (or a single gain).
#[derive(Clone, Debug, PartialEq)]
pub struct GainSet {
    pub gains: Vec<Matrix>,
}

impl GainSet {
    pub fn single(k: Matrix) -> Self {
        Self { gains: vec![k] }
    }

    pub fn to_rows(&self) -> Vec<Vec<Vec<f64>>> {
        self.gains.iter().map(Matrix::to_rows).collect()
    }

    pub fn from_rows(rows: &[Vec<Vec<f64>>]) -> Result<Self> {
        let gains = rows.iter().map(|k| Matrix::from_rows(k)).collect::<Result<Vec<_>>>()?;
        if gains.iter().any(|k| !k.is_finite()) {
            return Err(Error::InvalidInput("gain entries must be finite".into()));
        }
        Ok(Self { gains })
    }
}

fn m(rows: &[&[f64]]) -> Matrix {
    Matrix::from_rows(rows).expect("constant matrix literal")
}

/// The Lorenz system as a two-rule fuzzy model with sector-bounded uncertainty.
pub fn lorenz_fuzzy_plant() -> RobustFuzzyPlant {
    let b1 = Matrix::identity(3).scale(0.1);
    let b2 = m(&[&[1.0], &[0.0], &[0.0]]);
    let c = Matrix::identity(3);
    let d = m(&[&[1.0], &[1.0], &[1.0]]);
    let h = m(&[&[-3.0, 3.0, 0.0], &[8.4, 0.0, 0.0], &[0.0, 0.0, -0.8]]);
    let a1 = m(&[&[-10.0, 10.0, 0.0], &[28.0, -1.0, 20.0], &[0.0, -20.0, -8.0 / 3.0]]);
    let a2 = m(&[&[-10.0, 10.0, 0.0], &[28.0, -1.0, -30.0], &[0.0, 30.0, -8.0 / 3.0]]);
    let rule = |a: Matrix| FuzzyRule { a, b1: b1.clone(), b2: b2.clone(), c: c.clone(), d: d.clone(), h: h.clone() };
    RobustFuzzyPlant::new(vec![rule(a1), rule(a2)]).expect("constant plant is consistent")
}

/// The two-state linear plant of the bounded-input/output design.
pub fn bibo_plant() -> BiboPlant {
    BiboPlant::new(
        m(&[&[-10.0, -5.0], &[-4.0, -1.2]]),
        m(&[&[3.0, 1.0], &[0.0, 2.0]]),
        m(&[&[1.0, 0.7]]),
        vec![3.0, -4.0],
    )
    .expect("constant plant is consistent")
}

fn gain_name(rules: usize, i: usize) -> String {
    if rules == 1 { "M".to_owned() } else { format!("M{}", i + 1) }
}

/// Constraint system for the robust fuzzy H∞ design at `α = [γ, ρ, δ]`.
///
/// Blocks: `-Z ≺ 0`, then `Ω_ij + Ω_ji ≺ 0` for every `i ≤ j`.
pub fn build_example1(plant: &RobustFuzzyPlant, alpha: &[f64]) -> Result<ConstraintSystem> {
    let [gamma, rho, delta] = *alpha else {
        return Err(Error::Dimension(format!("expected α = [γ, ρ, δ], got {} entries", alpha.len())));
    };
    if !(gamma > 0.0 && rho > 0.0 && delta > 0.0) || !(gamma.is_finite() && rho.is_finite() && delta.is_finite()) {
        return Err(Error::InvalidInput(format!("γ, ρ, δ must be positive and finite, got {alpha:?}")));
    }
    let n = plant.states();
    let nu = plant.inputs();
    let nr = plant.rules().len();
    let mut layout = VariableLayout::new();
    let z = layout.add_symmetric("Z", n)?;
    let ms = (0..nr).map(|i| layout.add_rectangular(&gain_name(nr, i), nu, n)).collect::<Result<Vec<_>>>()?;

    struct Tilde {
        b1t: Matrix,
        ct: Matrix,
        dt: Matrix,
    }
    let tildes: Vec<Tilde> = plant
        .rules()
        .iter()
        .map(|r| {
            let nw = r.b1.cols();
            let ny = r.c.rows();
            // B̃1 = [δI  B1]
            let b1t = Matrix::from_fn(n, n + nw, |i, j| if j < n { if i == j { delta } else { 0.0 } } else { r.b1[(i, j - n)] });
            // C̃ = [γ/(ρδ) H ; √2 C],  D̃ = [0 ; √2 D]
            let s = gamma / (rho * delta);
            let ct = Matrix::from_fn(n + ny, n, |i, j| if i < n { s * r.h[(i, j)] } else { 2f64.sqrt() * r.c[(i - n, j)] });
            let dt = Matrix::from_fn(n + ny, nu, |i, j| if i < n { 0.0 } else { 2f64.sqrt() * r.d[(i - n, j)] });
            Tilde { b1t, ct, dt }
        })
        .collect();

    let w = n + plant.disturbances();
    let p = n + plant.outputs();
    // lower-block entries of Ω_ij: (0,0), (1,0), (1,1), (2,0), (2,2)
    let omega = |i: usize, j: usize| -> [AffineExpr; 5] {
        let r = &plant.rules()[i];
        let t = &tildes[i];
        [
            z.left_mul(&r.a).plus_transpose().add(&ms[j].left_mul(&r.b2).plus_transpose()),
            AffineExpr::constant(t.b1t.transpose()),
            AffineExpr::constant(Matrix::identity(w).scale(-gamma)),
            z.left_mul(&t.ct).add(&ms[j].left_mul(&t.dt)),
            AffineExpr::constant(Matrix::identity(p).scale(-gamma)),
        ]
    };
    let positions = [(0, 0), (1, 0), (1, 1), (2, 0), (2, 2)];

    let mut blocks = vec![assemble_lower(&[n], &[(0, 0, z.scale(-1.0))])?];
    for i in 0..nr {
        for j in i..nr {
            let (a, b) = (omega(i, j), omega(j, i));
            let entries: Vec<(usize, usize, AffineExpr)> = positions
                .iter()
                .zip(a.iter().zip(&b))
                .map(|(&(r, c), (x, y))| (r, c, x.add(y)))
                .collect();
            blocks.push(assemble_lower(&[n, w, p], &entries)?);
        }
    }
    ConstraintSystem::new(blocks, layout)
}

/// Objective `[γ, ρ]`, or `[γ, ρ, 1/det(Z*)]` when augmented.
pub fn example1_objective(alpha: &[f64], system: &ConstraintSystem, evp: &EvpResult, augmented: bool) -> Result<Vec<f64>> {
    let mut f = vec![alpha[0], alpha[1]];
    if augmented {
        let z = system.layout().extract_symmetric(&evp.x_star, "Z")?;
        let det = matrix::determinant(&z);
        if !(det > 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        f.push(1.0 / det);
    }
    Ok(f)
}

/// Constraint system for the bounded-input/output design at `α = [ū, ȳ]`.
///
/// Blocks: `(AZ,⋆) + (BM,⋆) ≺ 0`, `-Z1 ≺ 0`, `-Z2 ≺ 0`, `-Z3 ≺ 0` with
/// `Z1 = [1 x0ᵀ; x0 Z]`, `Z2 = [Z Mᵀ; M ū²I]`, `Z3 = [Z ZCᵀ; CZ ȳ²I]`.
pub fn build_example2(plant: &BiboPlant, alpha: &[f64]) -> Result<ConstraintSystem> {
    let [u_bar, y_bar] = *alpha else {
        return Err(Error::Dimension(format!("expected α = [ū, ȳ], got {} entries", alpha.len())));
    };
    if !(u_bar > 0.0 && y_bar > 0.0) || !(u_bar.is_finite() && y_bar.is_finite()) {
        return Err(Error::InvalidInput(format!("ū and ȳ must be positive and finite, got {alpha:?}")));
    }
    let n = plant.states();
    let nu = plant.inputs();
    let ny = plant.outputs();
    let mut layout = VariableLayout::new();
    let z = layout.add_symmetric("Z", n)?;
    let mm = layout.add_rectangular("M", nu, n)?;

    let lyap = z.left_mul(&plant.a).plus_transpose().add(&mm.left_mul(&plant.b).plus_transpose());
    let z1 = assemble_lower(
        &[1, n],
        &[
            (0, 0, AffineExpr::constant(Matrix::identity(1))),
            (1, 0, AffineExpr::constant(Matrix::column(&plant.x0))),
            (1, 1, z.clone()),
        ],
    )?;
    let z2 = assemble_lower(
        &[n, nu],
        &[(0, 0, z.clone()), (1, 0, mm), (1, 1, AffineExpr::constant(Matrix::identity(nu).scale(u_bar * u_bar)))],
    )?;
    let z3 = assemble_lower(
        &[n, ny],
        &[
            (0, 0, z.clone()),
            (1, 0, z.left_mul(&plant.c)),
            (1, 1, AffineExpr::constant(Matrix::identity(ny).scale(y_bar * y_bar))),
        ],
    )?;
    let blocks = vec![assemble_lower(&[n], &[(0, 0, lyap)])?, z1.scaled(-1.0), z2.scaled(-1.0), z3.scaled(-1.0)];
    ConstraintSystem::new(blocks, layout)
}

/// Search box used for the robust fuzzy design.
pub fn example1_bounds() -> (Vec<f64>, Vec<f64>) {
    (vec![0.5, 0.5, 0.01], vec![5.0, 5.0, 5.0])
}

/// Search box used for the bounded-input/output design.
pub fn example2_bounds() -> (Vec<f64>, Vec<f64>) {
    (vec![0.5, 0.5], vec![8.0, 8.0])
}

pub fn example1_momip(plant: RobustFuzzyPlant, augmented: bool) -> Momip {
    let (lo, hi) = example1_bounds();
    let plant = Arc::new(plant);
    let name = if augmented { "example1-augmented" } else { "example1" };
    Momip::new(
        name,
        lo,
        hi,
        if augmented { 3 } else { 2 },
        Arc::new(move |a: &[f64]| build_example1(&plant, a)),
        Arc::new(move |a: &[f64], s: &ConstraintSystem, e: &EvpResult| example1_objective(a, s, e, augmented)),
    )
    .expect("constant bounds are valid")
}

pub fn example2_momip(plant: BiboPlant) -> Momip {
    let (lo, hi) = example2_bounds();
    let plant = Arc::new(plant);
    Momip::new(
        "example2",
        lo,
        hi,
        2,
        Arc::new(move |a: &[f64]| build_example2(&plant, a)),
        Arc::new(|a: &[f64], _: &ConstraintSystem, _: &EvpResult| Ok(a.to_vec())),
    )
    .expect("constant bounds are valid")
}

/// `K_i = M_i Z⁻¹` for every rectangular variable of the layout, in layout order.
pub fn recover_gains(layout: &VariableLayout, x_star: &[f64]) -> Result<GainSet> {
    let z = layout.extract_symmetric(x_star, "Z")?;
    let chol = matrix::cholesky(&z)?;
    let gains = layout
        .variables()
        .iter()
        .filter(|v| matches!(v.kind, VariableKind::Rectangular(..)))
        .map(|v| {
            let mi = layout.extract(x_star, &v.name)?;
            // K = M Z⁻¹  ⇔  Kᵀ = Z⁻¹ Mᵀ
            Ok(chol.solve(&mi.transpose()).transpose())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GainSet { gains })
}

/// True when every eigenvalue of the square matrix has negative real part.
///
/// Uses the Routh–Hurwitz test on the characteristic polynomial, obtained with
/// the Faddeev–LeVerrier recursion. Intended for the small closed-loop matrices
/// here (`n ≤ 6`).
pub fn is_hurwitz(a: &Matrix) -> bool {
    let coeffs = characteristic_polynomial(a);
    routh_hurwitz(&coeffs)
}

/// Monic characteristic polynomial `[1, c1, …, cn]` of `det(sI - A)`.
pub fn characteristic_polynomial(a: &Matrix) -> Vec<f64> {
    let n = a.rows();
    assert_eq!(n, a.cols(), "matrix must be square");
    let mut coeffs = vec![1.0];
    let mut mk = Matrix::zeros(n, n);
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{k-1} I,  c_k = -tr(A M_k) / k
        let mut next = a.mul(&mk);
        let c_prev = coeffs[k - 1];
        for i in 0..n {
            next[(i, i)] += c_prev;
        }
        mk = next;
        let am = a.mul(&mk);
        let tr: f64 = (0..n).map(|i| am[(i, i)]).sum();
        coeffs.push(-tr / k as f64);
    }
    coeffs
}

fn routh_hurwitz(coeffs: &[f64]) -> bool {
    let n = coeffs.len() - 1;
    if coeffs.iter().any(|&c| !(c > 0.0)) {
        return false;
    }
    if n <= 2 {
        return true;
    }
    let mut prev: Vec<f64> = coeffs.iter().step_by(2).copied().collect();
    let mut cur: Vec<f64> = coeffs.iter().skip(1).step_by(2).copied().collect();
    for _ in 0..n - 1 {
        if !(cur[0] > 0.0) {
            return false;
        }
        let next: Vec<f64> = (0..prev.len().saturating_sub(1))
            .map(|j| {
                let c = cur.get(j + 1).copied().unwrap_or(0.0);
                (cur[0] * prev[j + 1] - prev[0] * c) / cur[0]
            })
            .collect();
        if next.is_empty() {
            break;
        }
        prev = cur;
        cur = next;
    }
    cur.first().is_none_or(|&c| c > 0.0)
}

/// Plant definitions accepted from JSON. Matrices are row-major nested arrays.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PlantFile {
    Bibo {
        a: Vec<Vec<f64>>,
        b: Vec<Vec<f64>>,
        c: Vec<Vec<f64>>,
        x0: Vec<f64>,
    },
    RobustFuzzy {
        rules: Vec<RuleFile>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleFile {
    pub a: Vec<Vec<f64>>,
    pub b1: Vec<Vec<f64>>,
    pub b2: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
    pub d: Vec<Vec<f64>>,
    pub h: Vec<Vec<f64>>,
}

/// A plant parsed from a [`PlantFile`].
#[derive(Clone, Debug, PartialEq)]
pub enum Plant {
    Bibo(BiboPlant),
    RobustFuzzy(RobustFuzzyPlant),
}

impl PlantFile {
    pub fn into_plant(self) -> Result<Plant> {
        let mat = |rows: &Vec<Vec<f64>>| Matrix::from_rows(rows);
        match self {
            PlantFile::Bibo { a, b, c, x0 } => Ok(Plant::Bibo(BiboPlant::new(mat(&a)?, mat(&b)?, mat(&c)?, x0)?)),
            PlantFile::RobustFuzzy { rules } => {
                let rules = rules
                    .iter()
                    .map(|r| {
                        Ok(FuzzyRule {
                            a: mat(&r.a)?,
                            b1: mat(&r.b1)?,
                            b2: mat(&r.b2)?,
                            c: mat(&r.c)?,
                            d: mat(&r.d)?,
                            h: mat(&r.h)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Plant::RobustFuzzy(RobustFuzzyPlant::new(rules)?))
            }
        }
    }

    pub fn from_plant(plant: &Plant) -> Self {
        match plant {
            Plant::Bibo(p) => PlantFile::Bibo { a: p.a.to_rows(), b: p.b.to_rows(), c: p.c.to_rows(), x0: p.x0.clone() },
            Plant::RobustFuzzy(p) => PlantFile::RobustFuzzy {
                rules: p
                    .rules()
                    .iter()
                    .map(|r| RuleFile {
                        a: r.a.to_rows(),
                        b1: r.b1.to_rows(),
                        b2: r.b2.to_rows(),
                        c: r.c.to_rows(),
                        d: r.d.to_rows(),
                        h: r.h.to_rows(),
                    })
                    .collect(),
            },
        }
    }
}

pub fn parse_plant(json: &str) -> Result<Plant> {
    serde_json::from_str::<PlantFile>(json)?.into_plant()
}

pub fn load_plant(path: &Path) -> Result<Plant> {
    parse_plant(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lmi::evaluate;

    #[test]
    fn lorenz_constants() {
        let p = lorenz_fuzzy_plant();
        assert_eq!(p.rules()[0].a[(1, 2)], 20.0);
        assert_eq!(p.rules()[1].a[(1, 2)], -30.0);
        assert_eq!(p.rules()[0].h[(1, 0)], 8.4);
        assert_eq!(p.rules()[1].b1, Matrix::identity(3).scale(0.1));
        assert_eq!(p.rules()[0].a[(2, 2)], -8.0 / 3.0);
    }

    #[test]
    fn bibo_constants() {
        let p = bibo_plant();
        assert_eq!(p.a[(1, 1)], -1.2);
        assert_eq!(p.x0, vec![3.0, -4.0]);
        assert_eq!(p.c.to_rows(), vec![vec![1.0, 0.7]]);
    }

    #[test]
    fn example1_block_dimensions() {
        let sys = build_example1(&lorenz_fuzzy_plant(), &[1.9009, 0.7914, 0.1585]).unwrap();
        let dims: Vec<usize> = sys.blocks().iter().map(|b| b.dim()).collect();
        assert_eq!(dims, vec![3, 15, 15, 15]);
        assert_eq!(sys.dim(), 6 + 3 + 3);
    }

    #[test]
    fn builders_reject_nonpositive_alpha() {
        assert!(build_example1(&lorenz_fuzzy_plant(), &[1.0, 1.0, 0.0]).is_err());
        assert!(build_example1(&lorenz_fuzzy_plant(), &[1.0, 1.0]).is_err());
        assert!(build_example2(&bibo_plant(), &[0.0, 1.0]).is_err());
        assert!(build_example2(&bibo_plant(), &[1.0, -1.0]).is_err());
    }

    #[test]
    fn example2_lyapunov_block_matches_expansion() {
        let plant = bibo_plant();
        let sys = build_example2(&plant, &[2.0, 2.0]).unwrap();
        let x = [0.3, -0.2, 0.9, 1.1, -0.4, 0.25, 0.7];
        let z = sys.layout().extract(&x, "Z").unwrap();
        let mm = sys.layout().extract(&x, "M").unwrap();
        let az = plant.a.mul(&z);
        let bm = plant.b.mul(&mm);
        let direct = az.add(&az.transpose()).add(&bm).add(&bm.transpose());
        let got = evaluate(&sys.blocks()[0], &x).to_matrix();
        for i in 0..2 {
            for j in 0..2 {
                assert!((got[(i, j)] - direct[(i, j)]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn gains_from_identity_and_scaled_z() {
        let mut layout = VariableLayout::new();
        layout.add_symmetric("Z", 2).unwrap();
        layout.add_rectangular("M", 2, 2).unwrap();
        let mut x = vec![0.0; layout.dim()];
        layout.pack("Z", &Matrix::identity(2), &mut x).unwrap();
        let mm = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        layout.pack("M", &mm, &mut x).unwrap();
        assert_eq!(recover_gains(&layout, &x).unwrap().gains, vec![mm]);

        layout.pack("Z", &Matrix::identity(2).scale(2.0), &mut x).unwrap();
        layout.pack("M", &Matrix::identity(2).scale(4.0), &mut x).unwrap();
        let k = &recover_gains(&layout, &x).unwrap().gains[0];
        assert!(k.sub(&Matrix::identity(2).scale(2.0)).max_abs() < 1e-14);

        layout.pack("Z", &Matrix::identity(2).scale(-1.0), &mut x).unwrap();
        assert!(matches!(recover_gains(&layout, &x), Err(Error::NotPositiveDefinite)));
    }

    #[test]
    fn hurwitz_test() {
        assert!(is_hurwitz(&Matrix::from_rows(&[[-1.0, 0.0], [0.0, -2.0]]).unwrap()));
        assert!(!is_hurwitz(&Matrix::from_rows(&[[1.0, 0.0], [0.0, -2.0]]).unwrap()));
        // rotation with positive real part
        assert!(!is_hurwitz(&Matrix::from_rows(&[[0.1, 1.0], [-1.0, 0.1]]).unwrap()));
        assert!(is_hurwitz(&Matrix::from_rows(&[[-0.1, 1.0], [-1.0, -0.1]]).unwrap()));
        // (s+1)(s² - 0.2 s + 4): unstable complex pair
        let a = Matrix::from_rows(&[[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [-4.0, -3.8, -0.8]]).unwrap();
        assert_eq!(characteristic_polynomial(&a), vec![1.0, 0.8, 3.8, 4.0]);
        assert!(!is_hurwitz(&a));
        let a = Matrix::from_rows(&[[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [-6.0, -11.0, -6.0]]).unwrap();
        assert!(is_hurwitz(&a));
    }

    #[test]
    fn plant_json_round_trip() {
        let plant = Plant::Bibo(bibo_plant());
        let json = serde_json::to_string(&PlantFile::from_plant(&plant)).unwrap();
        assert_eq!(parse_plant(&json).unwrap(), plant);
        let plant = Plant::RobustFuzzy(lorenz_fuzzy_plant());
        let json = serde_json::to_string(&PlantFile::from_plant(&plant)).unwrap();
        assert_eq!(parse_plant(&json).unwrap(), plant);
        assert!(parse_plant(r#"{"type":"bibo","a":[[1,2]],"b":[[1]],"c":[[1]],"x0":[1]}"#).is_err());
    }
}
