//! Affine symmetric matrix functions and the eigenvalue-bound problem.
//!
//! A [`ConstraintSystem`] is a list of [`AffineBlock`]s `G_k(x) = B_k + Σ_j x_j C_kj`,
//! each required to be negative definite. [`solve_evp`] minimizes the bound `λ`
//! in `G_k(x) ≺ λI` over `x`; the system is strictly feasible exactly when the
//! optimum is negative.
//!
//! Matrix variables are flattened into `x` through a [`VariableLayout`].
//! Symmetric variables use row-major upper-triangle packing: the coordinate of
//! an off-diagonal entry `(i, j)` multiplies `E_ij + E_ji`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::matrix::{self, Matrix, SymmetricMatrix};
use crate::{Error, Result, EPS_FEAS};

/// Lower-triangle nonzeros `(row, col, value)` of one coefficient.
type Nonzeros = Vec<(usize, usize, f64)>;

/// `base + Σ_j x_j · coeffs[j]` with every matrix of dimension `n`.
#[derive(Clone, Debug)]
pub struct AffineBlock {
    base: SymmetricMatrix,
    coeffs: BTreeMap<usize, SymmetricMatrix>,
    // nonzero entries of each coefficient, keyed by coordinate
    sparse: Vec<(usize, Nonzeros)>,
}

impl AffineBlock {
    pub fn new(base: SymmetricMatrix, coeffs: BTreeMap<usize, SymmetricMatrix>) -> Result<Self> {
        let n = base.dim();
        if let Some((j, c)) = coeffs.iter().find(|(_, c)| c.dim() != n) {
            return Err(Error::Dimension(format!(
                "coefficient {j} has dimension {}, block has {n}",
                c.dim()
            )));
        }
        if base.as_slice().iter().any(|v| !v.is_finite())
            || coeffs.values().any(|c| c.as_slice().iter().any(|v| !v.is_finite()))
        {
            return Err(Error::InvalidInput("non-finite entry in affine block".into()));
        }
        let sparse = coeffs
            .iter()
            .map(|(&j, c)| {
                let mut nz = Vec::new();
                for r in 0..n {
                    for col in 0..n {
                        let v = c.get(r, col);
                        if v != 0.0 {
                            nz.push((r, col, v));
                        }
                    }
                }
                (j, nz)
            })
            .collect();
        Ok(Self { base, coeffs, sparse })
    }

    pub fn constant(base: SymmetricMatrix) -> Self {
        Self::new(base, BTreeMap::new()).expect("constant block is always valid")
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn base(&self) -> &SymmetricMatrix {
        &self.base
    }

    pub fn coeffs(&self) -> &BTreeMap<usize, SymmetricMatrix> {
        &self.coeffs
    }

    pub fn max_index(&self) -> Option<usize> {
        self.coeffs.keys().next_back().copied()
    }

    /// Multiplies base and every coefficient by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let coeffs = self.coeffs.iter().map(|(&j, c)| (j, c.scale(s))).collect();
        Self::new(self.base.scale(s), coeffs).expect("scaling keeps dimensions")
    }

    fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(self.base.as_slice());
        let n = self.dim();
        for (j, nz) in &self.sparse {
            let xj = x[*j];
            if xj == 0.0 {
                continue;
            }
            for &(r, c, v) in nz {
                out[r * n + c] += xj * v;
            }
        }
    }
}

/// `base + Σ_j x_j · coeffs[j]`.
pub fn evaluate(block: &AffineBlock, x: &[f64]) -> SymmetricMatrix {
    let mut s = block.base.clone();
    for (&j, c) in &block.coeffs {
        if x[j] != 0.0 {
            s.add_scaled(x[j], c);
        }
    }
    s
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VariableKind {
    Symmetric(usize),
    Rectangular(usize, usize),
}

impl VariableKind {
    pub fn coordinates(self) -> usize {
        match self {
            VariableKind::Symmetric(n) => n * (n + 1) / 2,
            VariableKind::Rectangular(p, q) => p * q,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariableSpec {
    pub name: String,
    pub kind: VariableKind,
    pub offset: usize,
}

/// Named matrix variables laid out contiguously in the decision vector.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VariableLayout {
    vars: Vec<VariableSpec>,
    dim: usize,
}

impl VariableLayout {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a variable and returns it as an affine expression.
    pub fn add(&mut self, name: &str, kind: VariableKind) -> Result<AffineExpr> {
        if self.vars.iter().any(|v| v.name == name) {
            return Err(Error::InvalidInput(format!("duplicate variable `{name}`")));
        }
        self.vars.push(VariableSpec { name: name.to_owned(), kind, offset: self.dim });
        self.dim += kind.coordinates();
        self.expr(name)
    }

    pub fn add_symmetric(&mut self, name: &str, n: usize) -> Result<AffineExpr> {
        self.add(name, VariableKind::Symmetric(n))
    }

    pub fn add_rectangular(&mut self, name: &str, p: usize, q: usize) -> Result<AffineExpr> {
        self.add(name, VariableKind::Rectangular(p, q))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn variables(&self) -> &[VariableSpec] {
        &self.vars
    }

    pub fn spec(&self, name: &str) -> Result<&VariableSpec> {
        self.vars
            .iter()
            .find(|v| v.name == name)
            .ok_or_else(|| Error::InvalidInput(format!("unknown variable `{name}`")))
    }

    /// The variable as an affine expression of the decision vector.
    pub fn expr(&self, name: &str) -> Result<AffineExpr> {
        let spec = self.spec(name)?;
        let mut e = match spec.kind {
            VariableKind::Symmetric(n) => AffineExpr::zeros(n, n),
            VariableKind::Rectangular(p, q) => AffineExpr::zeros(p, q),
        };
        match spec.kind {
            VariableKind::Symmetric(n) => {
                let mut k = spec.offset;
                for i in 0..n {
                    for j in i..n {
                        let mut c = Matrix::zeros(n, n);
                        c[(i, j)] = 1.0;
                        c[(j, i)] = 1.0;
                        e.terms.insert(k, c);
                        k += 1;
                    }
                }
            }
            VariableKind::Rectangular(p, q) => {
                for i in 0..p {
                    for j in 0..q {
                        let mut c = Matrix::zeros(p, q);
                        c[(i, j)] = 1.0;
                        e.terms.insert(spec.offset + i * q + j, c);
                    }
                }
            }
        }
        Ok(e)
    }

    /// Reads a variable back out of `x`.
    pub fn extract(&self, x: &[f64], name: &str) -> Result<Matrix> {
        let spec = self.spec(name)?;
        if x.len() < self.dim {
            return Err(Error::Dimension(format!(
                "decision vector has {} entries, layout needs {}",
                x.len(),
                self.dim
            )));
        }
        let o = spec.offset;
        Ok(match spec.kind {
            VariableKind::Symmetric(_) => self.extract_symmetric(x, name)?.to_matrix(),
            VariableKind::Rectangular(p, q) => Matrix::from_row_slice(p, q, &x[o..o + p * q]),
        })
    }

    pub fn extract_symmetric(&self, x: &[f64], name: &str) -> Result<SymmetricMatrix> {
        let spec = self.spec(name)?;
        let VariableKind::Symmetric(n) = spec.kind else {
            return Err(Error::InvalidInput(format!("variable `{name}` is not symmetric")));
        };
        if x.len() < self.dim {
            return Err(Error::Dimension("decision vector shorter than layout".into()));
        }
        let mut s = SymmetricMatrix::zeros(n);
        let mut k = spec.offset;
        for i in 0..n {
            for j in i..n {
                s.set(i, j, x[k]);
                k += 1;
            }
        }
        Ok(s)
    }

    /// Writes `value` into the coordinates of `name`. Symmetric variables read the upper triangle.
    pub fn pack(&self, name: &str, value: &Matrix, x: &mut [f64]) -> Result<()> {
        let spec = self.spec(name)?;
        let o = spec.offset;
        match spec.kind {
            VariableKind::Symmetric(n) => {
                if value.shape() != (n, n) {
                    return Err(Error::Dimension(format!("`{name}` expects {n}x{n}")));
                }
                let mut k = o;
                for i in 0..n {
                    for j in i..n {
                        x[k] = value[(i, j)];
                        k += 1;
                    }
                }
            }
            VariableKind::Rectangular(p, q) => {
                if value.shape() != (p, q) {
                    return Err(Error::Dimension(format!("`{name}` expects {p}x{q}")));
                }
                x[o..o + p * q].copy_from_slice(value.as_slice());
            }
        }
        Ok(())
    }
}

/// Rectangular affine matrix expression `constant + Σ_j x_j · terms[j]`.
///
/// Used to assemble constraint blocks from products with constant matrices.
#[derive(Clone, Debug)]
pub struct AffineExpr {
    rows: usize,
    cols: usize,
    constant: Matrix,
    terms: BTreeMap<usize, Matrix>,
}

impl AffineExpr {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, constant: Matrix::zeros(rows, cols), terms: BTreeMap::new() }
    }

    pub fn constant(m: Matrix) -> Self {
        Self { rows: m.rows(), cols: m.cols(), constant: m, terms: BTreeMap::new() }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    fn map(&self, rows: usize, cols: usize, f: impl Fn(&Matrix) -> Matrix) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(&j, c)| (j, f(c)))
            .filter(|(_, c)| c.max_abs() != 0.0)
            .collect();
        Self { rows, cols, constant: f(&self.constant), terms }
    }

    /// `a · self`
    pub fn left_mul(&self, a: &Matrix) -> Self {
        assert_eq!(a.cols(), self.rows, "left factor has wrong column count");
        self.map(a.rows(), self.cols, |m| a.mul(m))
    }

    /// `self · b`
    pub fn right_mul(&self, b: &Matrix) -> Self {
        assert_eq!(self.cols, b.rows(), "right factor has wrong row count");
        self.map(self.rows, b.cols(), |m| m.mul(b))
    }

    pub fn transpose(&self) -> Self {
        self.map(self.cols, self.rows, Matrix::transpose)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(self.rows, self.cols, |m| m.scale(s))
    }

    pub fn add(&self, other: &AffineExpr) -> Self {
        assert_eq!(self.shape(), other.shape(), "expression shapes differ");
        let mut out = self.clone();
        out.constant = out.constant.add(&other.constant);
        for (&j, c) in &other.terms {
            let merged = match out.terms.get(&j) {
                Some(m) => m.add(c),
                None => c.clone(),
            };
            out.terms.insert(j, merged);
        }
        out.terms.retain(|_, m| m.max_abs() != 0.0);
        out
    }

    pub fn sub(&self, other: &AffineExpr) -> Self {
        self.add(&other.scale(-1.0))
    }

    /// `(X, ⋆) = X + Xᵀ`.
    pub fn plus_transpose(&self) -> Self {
        self.add(&self.transpose())
    }

    pub fn evaluate(&self, x: &[f64]) -> Matrix {
        let mut m = self.constant.clone();
        for (&j, c) in &self.terms {
            m = m.add(&c.scale(x[j]));
        }
        m
    }
}

/// Assembles a symmetric block matrix from its lower block triangle.
///
/// `sizes` are the diagonal block sizes; `entries` holds `(row, col, expr)` with
/// `row >= col`. Missing blocks are zero. Only the lower triangle of each
/// diagonal expression is read; everything above is mirrored.
pub fn assemble_lower(sizes: &[usize], entries: &[(usize, usize, AffineExpr)]) -> Result<AffineBlock> {
    let offsets: Vec<usize> = sizes
        .iter()
        .scan(0, |acc, &s| {
            let o = *acc;
            *acc += s;
            Some(o)
        })
        .collect();
    let n: usize = sizes.iter().sum();
    let mut base = Matrix::zeros(n, n);
    let mut coeffs: BTreeMap<usize, Matrix> = BTreeMap::new();
    for (r, c, e) in entries {
        if r < c {
            return Err(Error::InvalidInput(format!("block ({r},{c}) is above the diagonal")));
        }
        if e.shape() != (sizes[*r], sizes[*c]) {
            return Err(Error::Dimension(format!(
                "block ({r},{c}) is {:?}, expected {}x{}",
                e.shape(),
                sizes[*r],
                sizes[*c]
            )));
        }
        let (ro, co) = (offsets[*r], offsets[*c]);
        let place = |dst: &mut Matrix, src: &Matrix| {
            for i in 0..src.rows() {
                for j in 0..src.cols() {
                    if r == c && j > i {
                        continue;
                    }
                    dst[(ro + i, co + j)] += src[(i, j)];
                }
            }
        };
        place(&mut base, &e.constant);
        for (&j, m) in &e.terms {
            place(coeffs.entry(j).or_insert_with(|| Matrix::zeros(n, n)), m);
        }
    }
    let lower = |m: &Matrix| SymmetricMatrix::from_lower_fn(n, |i, j| m[(i, j)]);
    let coeffs = coeffs
        .iter()
        .filter(|(_, m)| m.max_abs() != 0.0)
        .map(|(&j, m)| (j, lower(m)))
        .collect();
    AffineBlock::new(lower(&base), coeffs)
}

/// Blocks that must all be negative definite, over a shared decision vector.
#[derive(Clone, Debug)]
pub struct ConstraintSystem {
    blocks: Vec<AffineBlock>,
    layout: VariableLayout,
}

impl ConstraintSystem {
    pub fn new(blocks: Vec<AffineBlock>, layout: VariableLayout) -> Result<Self> {
        let d = layout.dim();
        if let Some(k) = blocks.iter().position(|b| b.max_index().is_some_and(|j| j >= d)) {
            return Err(Error::Dimension(format!(
                "block {k} references a coordinate outside the {d}-dimensional layout"
            )));
        }
        Ok(Self { blocks, layout })
    }

    /// A system with `d` anonymous scalar coordinates.
    pub fn with_dim(blocks: Vec<AffineBlock>, d: usize) -> Result<Self> {
        let mut layout = VariableLayout::new();
        if d > 0 {
            layout.add_rectangular("x", d, 1)?;
        }
        Self::new(blocks, layout)
    }

    pub fn blocks(&self) -> &[AffineBlock] {
        &self.blocks
    }

    pub fn layout(&self) -> &VariableLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    /// Total constraint dimension `Σ_k n_k`.
    pub fn total_size(&self) -> usize {
        self.blocks.iter().map(AffineBlock::dim).sum()
    }

    pub fn push(&mut self, block: AffineBlock) -> Result<()> {
        if block.max_index().is_some_and(|j| j >= self.dim()) {
            return Err(Error::Dimension("block references a coordinate outside the layout".into()));
        }
        self.blocks.push(block);
        Ok(())
    }

    /// `max_k λ_max(G_k(x))`.
    pub fn max_eigenvalue(&self, x: &[f64]) -> Result<f64> {
        self.blocks
            .iter()
            .map(|b| matrix::max_eigenvalue(&evaluate(b, x)))
            .try_fold(f64::NEG_INFINITY, |m, v| Ok(m.max(v?)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EvpStatus {
    Converged,
    IterationCap,
    NumericalFailure,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvpResult {
    pub lambda_star: f64,
    pub x_star: Vec<f64>,
    pub status: EvpStatus,
    /// Total Newton steps taken.
    pub iterations: usize,
}

impl EvpResult {
    pub fn converged(&self) -> bool {
        self.status == EvpStatus::Converged
    }
}

/// Barrier-method settings. `tol` is relative: the gap target is `tol · max(1, |λ|)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EvpOptions {
    pub tol: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub t0: f64,
    pub mu: f64,
}

impl Default for EvpOptions {
    fn default() -> Self {
        Self { tol: 1e-6, max_outer: 200, max_inner: 50, t0: 1.0, mu: 10.0 }
    }
}

/// Minimizes `λ` subject to `G_k(x) ≺ λI` for every block.
pub fn solve_evp(system: &ConstraintSystem) -> EvpResult {
    solve_evp_with(system, &EvpOptions::default())
}

pub fn solve_evp_with(system: &ConstraintSystem, opts: &EvpOptions) -> EvpResult {
    let d = system.dim();
    let fail = |x: Vec<f64>, iterations| EvpResult {
        lambda_star: f64::NAN,
        x_star: x,
        status: EvpStatus::NumericalFailure,
        iterations,
    };
    let x0 = vec![0.0; d];
    let lambda0 = match system.max_eigenvalue(&x0) {
        Ok(v) => v,
        Err(_) => return fail(x0, 0),
    };
    if d == 0 || system.blocks.is_empty() {
        let status =
            if system.blocks.is_empty() && d > 0 { EvpStatus::IterationCap } else { EvpStatus::Converged };
        return EvpResult { lambda_star: lambda0, x_star: x0, status, iterations: 0 };
    }

    let mut barrier = Barrier::new(system);
    let mut z = x0;
    z.push(lambda0 + 1.0);
    let m_total = system.total_size() as f64;
    let mut t = opts.t0;
    let mut iterations = 0;
    let mut status = EvpStatus::IterationCap;

    for _ in 0..opts.max_outer {
        match barrier.center(&mut z, t, opts.max_inner) {
            Centering::Done(steps) => iterations += steps,
            Centering::Cap(steps) => {
                iterations += steps;
                break;
            }
            Centering::Failed(steps) => {
                iterations += steps;
                status = EvpStatus::NumericalFailure;
                break;
            }
        }
        let lambda = z[d];
        if z.iter().any(|v| !v.is_finite() || v.abs() > 1e15) {
            break;
        }
        if m_total / t < opts.tol * lambda.abs().max(1.0) {
            status = EvpStatus::Converged;
            break;
        }
        t *= opts.mu;
    }

    z.truncate(d);
    match system.max_eigenvalue(&z) {
        Ok(lambda_star) if status == EvpStatus::Converged => {
            EvpResult { lambda_star, x_star: z, status, iterations }
        }
        Ok(lambda_star) => EvpResult { lambda_star, x_star: z, status, iterations },
        Err(_) => fail(z, iterations),
    }
}

/// Result of `λ* ≤ -eps_feas` together with the solve that decided it.
#[derive(Clone, Debug, PartialEq)]
pub struct Feasibility {
    pub feasible: bool,
    pub evp: EvpResult,
}

pub fn is_strictly_feasible(system: &ConstraintSystem, eps_feas: f64) -> Feasibility {
    assert!(eps_feas > 0.0, "eps_feas must be positive");
    let evp = solve_evp(system);
    let feasible = evp.converged() && evp.lambda_star <= -eps_feas;
    Feasibility { feasible, evp }
}

pub fn is_strictly_feasible_default(system: &ConstraintSystem) -> Feasibility {
    is_strictly_feasible(system, EPS_FEAS)
}

/// `L⁻¹ F L⁻ᵀ` for symmetric row-major `F`.
fn sandwich(chol: &matrix::Cholesky, f: &[f64], n: usize) -> Vec<f64> {
    // W = L⁻¹ F, column by column; then Q = L⁻¹ Wᵀ
    let mut w = vec![0.0; n * n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        for i in 0..n {
            col[i] = f[i * n + j];
        }
        chol.forward_in_place(&mut col);
        for i in 0..n {
            w[i * n + j] = col[i];
        }
    }
    let mut q = vec![0.0; n * n];
    for j in 0..n {
        col.copy_from_slice(&w[j * n..(j + 1) * n]);
        chol.forward_in_place(&mut col);
        for i in 0..n {
            q[i * n + j] = col[i];
        }
    }
    q
}

enum Centering {
    Done(usize),
    Cap(usize),
    Failed(usize),
}

/// Log-det barrier for `λI - G_k(x) ≻ 0` with scratch buffers.
struct Barrier<'a> {
    system: &'a ConstraintSystem,
    d: usize,
    grad: Vec<f64>,
    hess: Vec<f64>,
    work: Vec<f64>,
}

impl<'a> Barrier<'a> {
    fn new(system: &'a ConstraintSystem) -> Self {
        let d = system.dim();
        let nmax = system.blocks.iter().map(AffineBlock::dim).max().unwrap_or(0);
        Self {
            system,
            d,
            grad: vec![0.0; d + 1],
            hess: vec![0.0; (d + 1) * (d + 1)],
            work: vec![0.0; nmax * nmax],
        }
    }

    /// Slack `λI - G(x)` of one block into `out`; false when not positive definite.
    fn slack(block: &AffineBlock, z: &[f64], lambda: f64, out: &mut [f64]) -> Option<matrix::Cholesky> {
        let n = block.dim();
        block.eval_into(z, out);
        for v in out.iter_mut() {
            *v = -*v;
        }
        for i in 0..n {
            out[i * n + i] += lambda;
        }
        matrix::cholesky_slice(n, out).ok()
    }

    /// `t·λ - Σ log det(λI - G_k(x))`, or `None` outside the domain.
    fn value(&mut self, z: &[f64], t: f64) -> Option<f64> {
        let lambda = z[self.d];
        let mut v = t * lambda;
        for block in &self.system.blocks {
            let n = block.dim();
            let chol = Self::slack(block, z, lambda, &mut self.work[..n * n])?;
            v -= chol.log_determinant();
        }
        v.is_finite().then_some(v)
    }

    /// Fills gradient and Hessian at `z`; returns false outside the domain.
    fn derivatives(&mut self, z: &[f64], t: f64) -> bool {
        let d = self.d;
        let dim = d + 1;
        let lambda = z[d];
        self.grad.iter_mut().for_each(|g| *g = 0.0);
        self.hess.iter_mut().for_each(|h| *h = 0.0);
        self.grad[d] = t;

        for block in &self.system.blocks {
            let n = block.dim();
            let Some(chol) = Self::slack(block, z, lambda, &mut self.work[..n * n]) else {
                return false;
            };
            // Q_a = L⁻¹ F_a L⁻ᵀ with F_x = -C_j, F_λ = I, so that tr(S⁻¹F_a) = tr(Q_a) and
            // tr(S⁻¹F_a S⁻¹F_b) = <Q_a, Q_b>; the Gram form keeps H positive semidefinite
            let mut idx: Vec<usize> = Vec::with_capacity(block.sparse.len() + 1);
            let mut qs: Vec<Vec<f64>> = Vec::with_capacity(block.sparse.len() + 1);
            let mut f = vec![0.0; n * n];
            for (j, nz) in &block.sparse {
                f.iter_mut().for_each(|v| *v = 0.0);
                for &(r, c, v) in nz {
                    f[r * n + c] = -v;
                }
                idx.push(*j);
                qs.push(sandwich(&chol, &f, n));
            }
            f.iter_mut().for_each(|v| *v = 0.0);
            for i in 0..n {
                f[i * n + i] = 1.0;
            }
            idx.push(d);
            qs.push(sandwich(&chol, &f, n));

            for (a, qa) in qs.iter().enumerate() {
                let trace: f64 = (0..n).map(|i| qa[i * n + i]).sum();
                self.grad[idx[a]] -= trace;
                for (b, qb) in qs.iter().enumerate().take(a + 1) {
                    let h: f64 = qa.iter().zip(qb).map(|(x, y)| x * y).sum();
                    let (ia, ib) = (idx[a], idx[b]);
                    self.hess[ia * dim + ib] += h;
                    if ia != ib {
                        self.hess[ib * dim + ia] += h;
                    }
                }
            }
        }
        self.grad.iter().chain(&self.hess).all(|v| v.is_finite())
    }

    /// Newton direction `-H⁻¹g` on the diagonally equilibrated Hessian.
    fn newton_step(&self) -> Option<Vec<f64>> {
        let dim = self.d + 1;
        let scale: Vec<f64> = (0..dim)
            .map(|i| {
                let h = self.hess[i * dim + i];
                if h > 0.0 { 1.0 / h.sqrt() } else { 1.0 }
            })
            .collect();
        let mut h = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                h[i * dim + j] = self.hess[i * dim + j] * scale[i] * scale[j];
            }
        }
        let chol = matrix::cholesky_slice(dim, &h).or_else(|_| {
            for i in 0..dim {
                h[i * dim + i] += 1e-12;
            }
            matrix::cholesky_slice(dim, &h)
        });
        let chol = chol.ok()?;
        let rhs: Vec<f64> = (0..dim).map(|i| -self.grad[i] * scale[i]).collect();
        let y = chol.solve_vec(&rhs);
        Some(y.iter().zip(&scale).map(|(v, s)| v * s).collect())
    }

    fn center(&mut self, z: &mut [f64], t: f64, max_inner: usize) -> Centering {
        const DECREMENT_TOL: f64 = 1e-10;
        const ARMIJO: f64 = 0.25;
        // decrease below this relative size is rounding noise
        const STALL: f64 = 1e-14;
        let mut trial = vec![0.0; z.len()];
        for step in 0..max_inner {
            if !self.derivatives(z, t) {
                return Centering::Failed(step);
            }
            let Some(dir) = self.newton_step() else {
                return Centering::Failed(step);
            };
            let slope: f64 = self.grad.iter().zip(&dir).map(|(g, v)| g * v).sum();
            let decrement = -slope;
            if !decrement.is_finite() {
                return Centering::Failed(step);
            }
            if decrement / 2.0 <= DECREMENT_TOL {
                return Centering::Done(step);
            }
            let Some(f0) = self.value(z, t) else {
                return Centering::Failed(step);
            };
            let mut s = 1.0;
            let mut accepted = None;
            for _ in 0..60 {
                for ((tr, zi), di) in trial.iter_mut().zip(z.iter()).zip(&dir) {
                    *tr = zi + s * di;
                }
                if let Some(f1) = self.value(&trial, t) {
                    if f1 <= f0 + ARMIJO * s * slope {
                        accepted = Some(f1);
                        break;
                    }
                }
                s *= 0.5;
            }
            let Some(f1) = accepted else {
                // no descent left at working precision
                return Centering::Done(step + 1);
            };
            z.copy_from_slice(&trial);
            if f0 - f1 <= STALL * f0.abs().max(1.0) {
                return Centering::Done(step + 1);
            }
        }
        Centering::Cap(max_inner)
    }
}
