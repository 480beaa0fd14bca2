//! C ABI over the `momip` library.
//!
//! Every fallible function returns a [`MomipStatus`]; on failure the message is
//! available from [`momip_last_error`] on the same thread. Handles are opaque and
//! must be released with their matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use momip::cli::{simulate_design, Design};
use momip::hmode::{self, HmodeConfig, HmodeOutput};
use momip::matrix::Matrix;
use momip::problem::{evaluate_at, Momip};
use momip::problems::{self, GainSet, Plant};
use momip::sim::{SimConfig, Uncertainty};
use momip::Error;

/// Result codes shared by every entry point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MomipStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    EmptyArchive = 4,
    Numerical = 5,
    BufferTooSmall = 6,
    Io = 7,
    Panic = 8,
}

/// Built-in design problems.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MomipProblemKind {
    /// Robust fuzzy H∞ design on the Lorenz model.
    Example1 = 0,
    /// The same design with `γ` as a second objective.
    Example1Augmented = 1,
    /// Bounded-input/output state feedback.
    Example2 = 2,
}

/// Opaque design problem.
pub struct MomipProblem {
    design: Design,
    momip: Momip,
}

/// Opaque result of an HMODE run.
pub struct MomipRun {
    output: HmodeOutput,
}

/// Result of a single candidate evaluation.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomipEvaluation {
    pub feasible: bool,
    /// NaN when the builder rejected the candidate.
    pub lambda_star: f64,
}

/// Mirror of the library's HMODE settings.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomipHmodeConfig {
    pub population: usize,
    pub iterations: usize,
    pub crossover_rate: f64,
    pub archive_spacing: f64,
    pub phase_fraction: f64,
    pub seed: u64,
    pub eps_feas: f64,
}

/// Simulation settings. The initial state is the plant default.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomipSimOptions {
    pub dt: f64,
    pub horizon: f64,
    pub seed: u64,
    pub perturbed: bool,
    pub disturbances: bool,
}

/// Closed-loop summary.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomipSimMetrics {
    pub max_u_norm: f64,
    pub max_y_norm: f64,
    /// NaN when no disturbance energy was injected.
    pub l2_ratio: f64,
    pub diverged: bool,
}

struct Failure {
    status: MomipStatus,
    message: String,
}

impl Failure {
    fn new(status: MomipStatus, message: impl Into<String>) -> Self {
        Self { status, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Config(_) => MomipStatus::Config,
            Error::EmptyArchive => MomipStatus::EmptyArchive,
            Error::Io(_) => MomipStatus::Io,
            Error::Dimension(_) | Error::InvalidInput(_) | Error::Json(_) => MomipStatus::InvalidArgument,
            Error::NotPositiveDefinite | Error::NumericalFailure(_) | Error::Diverged { .. } | Error::Undefined(_) => {
                MomipStatus::Numerical
            }
        };
        Self::new(status, e.to_string())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MomipStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MomipStatus::Ok,
        Ok(Err(failure)) => {
            set_last_error(&failure.message);
            failure.status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("panic: {msg}"));
            MomipStatus::Panic
        }
    }
}

fn non_null<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    // SAFETY: callers pass either null or a pointer obtained from this library.
    unsafe { p.as_ref() }.ok_or_else(|| Failure::new(MomipStatus::NullPointer, format!("{what} is null")))
}

fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    // SAFETY: callers pass either null or a writable pointer to a `T`.
    unsafe { p.as_mut() }.ok_or_else(|| Failure::new(MomipStatus::NullPointer, format!("{what} is null")))
}

fn input_slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::new(MomipStatus::NullPointer, format!("{what} is null")));
    }
    // SAFETY: the caller guarantees `len` readable doubles at `p`.
    Ok(unsafe { slice::from_raw_parts(p, len) })
}

fn write_slice(out: *mut f64, len: usize, values: &[f64], what: &str) -> Result<(), Failure> {
    if values.is_empty() {
        return Ok(());
    }
    if len < values.len() {
        return Err(Failure::new(
            MomipStatus::BufferTooSmall,
            format!("{what} holds {len} values, {} needed", values.len()),
        ));
    }
    if out.is_null() {
        return Err(Failure::new(MomipStatus::NullPointer, format!("{what} is null")));
    }
    // SAFETY: the caller guarantees `len >= values.len()` writable doubles at `out`.
    unsafe { ptr::copy_nonoverlapping(values.as_ptr(), out, values.len()) };
    Ok(())
}

fn boxed<T>(value: T, out: *mut *mut T) -> Result<(), Failure> {
    let out = out_ptr(out, "output handle")?;
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message of the last failure on this thread, or null. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn momip_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn momip_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates one of the built-in problems.
///
/// # Safety
/// `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn momip_problem_new(kind: MomipProblemKind, out: *mut *mut MomipProblem) -> MomipStatus {
    guard(|| {
        let design = match kind {
            MomipProblemKind::Example1 => Design::Fuzzy { plant: problems::lorenz_fuzzy_plant(), augmented: false },
            MomipProblemKind::Example1Augmented => {
                Design::Fuzzy { plant: problems::lorenz_fuzzy_plant(), augmented: true }
            }
            MomipProblemKind::Example2 => Design::Bibo(problems::bibo_plant()),
        };
        let momip = design.momip();
        boxed(MomipProblem { design, momip }, out)
    })
}

/// Creates a problem from a plant JSON document (same schema as the CLI's plant files).
///
/// # Safety
/// `json` must be null or a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn momip_problem_from_plant_json(
    json: *const c_char,
    augmented: bool,
    out: *mut *mut MomipProblem,
) -> MomipStatus {
    guard(|| {
        if json.is_null() {
            return Err(Failure::new(MomipStatus::NullPointer, "json is null"));
        }
        // SAFETY: checked non-null; the caller guarantees NUL termination.
        let text = unsafe { CStr::from_ptr(json) }
            .to_str()
            .map_err(|e| Failure::new(MomipStatus::InvalidArgument, format!("json is not UTF-8: {e}")))?;
        let design = match problems::parse_plant(text)? {
            Plant::Bibo(p) => Design::Bibo(p),
            Plant::RobustFuzzy(p) => Design::Fuzzy { plant: p, augmented },
        };
        let momip = design.momip();
        boxed(MomipProblem { design, momip }, out)
    })
}

/// Releases a problem. Null is a no-op.
///
/// # Safety
/// `problem` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn momip_problem_free(problem: *mut MomipProblem) {
    if !problem.is_null() {
        // SAFETY: ownership returns to Rust exactly once.
        drop(unsafe { Box::from_raw(problem) });
    }
}

/// Number of scalar parameters in `α`; 0 for a null handle.
///
/// # Safety
/// `problem` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn momip_problem_alpha_dim(problem: *const MomipProblem) -> usize {
    // SAFETY: see the function contract.
    unsafe { problem.as_ref() }.map_or(0, |p| p.momip.alpha_dim())
}

/// Number of objectives; 0 for a null handle.
///
/// # Safety
/// `problem` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn momip_problem_objectives(problem: *const MomipProblem) -> usize {
    // SAFETY: see the function contract.
    unsafe { problem.as_ref() }.map_or(0, |p| p.momip.objectives())
}

/// Copies the search box into `lo` and `hi`, each of capacity `len`.
///
/// # Safety
/// `lo` and `hi` must each point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn momip_problem_bounds(
    problem: *const MomipProblem,
    lo: *mut f64,
    hi: *mut f64,
    len: usize,
) -> MomipStatus {
    guard(|| {
        let p = non_null(problem, "problem")?;
        write_slice(lo, len, p.momip.lower(), "lo")?;
        write_slice(hi, len, p.momip.upper(), "hi")
    })
}

/// Replaces the search box.
///
/// # Safety
/// `lo` and `hi` must each point to `len` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn momip_problem_set_bounds(
    problem: *mut MomipProblem,
    lo: *const f64,
    hi: *const f64,
    len: usize,
) -> MomipStatus {
    guard(|| {
        let p = out_ptr(problem, "problem")?;
        let lo = input_slice(lo, len, "lo")?.to_vec();
        let hi = input_slice(hi, len, "hi")?.to_vec();
        p.momip = p.momip.clone().with_bounds(lo, hi)?;
        Ok(())
    })
}

/// Evaluates `α` (which must lie in the search box). Objectives go to `f_out`
/// when the candidate is feasible; pass `f_len = 0` to skip them.
///
/// # Safety
/// `alpha` must point to `alpha_len` doubles and `f_out` to `f_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn momip_evaluate(
    problem: *const MomipProblem,
    alpha: *const f64,
    alpha_len: usize,
    eps_feas: f64,
    out: *mut MomipEvaluation,
    f_out: *mut f64,
    f_len: usize,
) -> MomipStatus {
    guard(|| {
        let p = non_null(problem, "problem")?;
        let alpha = input_slice(alpha, alpha_len, "alpha")?;
        let out = out_ptr(out, "out")?;
        if alpha.len() != p.momip.alpha_dim() {
            return Err(Failure::new(
                MomipStatus::InvalidArgument,
                format!("alpha has {} components, expected {}", alpha.len(), p.momip.alpha_dim()),
            ));
        }
        if !p.momip.contains(alpha) {
            return Err(Failure::new(MomipStatus::InvalidArgument, format!("alpha {alpha:?} is outside the search box")));
        }
        if !(eps_feas >= 0.0 && eps_feas.is_finite()) {
            return Err(Failure::new(MomipStatus::InvalidArgument, "eps_feas must be finite and nonnegative"));
        }
        let eval = evaluate_at(&p.momip, alpha, eps_feas);
        *out = MomipEvaluation { feasible: eval.feasible, lambda_star: eval.lambda_star };
        if f_len > 0 {
            if let Some(f) = &eval.f {
                write_slice(f_out, f_len, f, "f_out")?;
            }
        }
        Ok(())
    })
}

/// Default HMODE settings.
#[no_mangle]
pub extern "C" fn momip_hmode_config_default() -> MomipHmodeConfig {
    let d = HmodeConfig::default();
    MomipHmodeConfig {
        population: d.population,
        iterations: d.iterations,
        crossover_rate: d.crossover_rate,
        archive_spacing: d.archive_spacing,
        phase_fraction: d.phase_fraction,
        seed: d.seed,
        eps_feas: d.eps_feas,
    }
}

/// Runs HMODE. An empty archive is still a successful run; check `momip_run_knee`.
///
/// # Safety
/// `problem` and `config` must be live pointers; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn momip_hmode_run(
    problem: *const MomipProblem,
    config: *const MomipHmodeConfig,
    out: *mut *mut MomipRun,
) -> MomipStatus {
    guard(|| {
        let p = non_null(problem, "problem")?;
        let c = non_null(config, "config")?;
        let cfg = HmodeConfig {
            population: c.population,
            iterations: c.iterations,
            crossover_rate: c.crossover_rate,
            archive_spacing: c.archive_spacing,
            phase_fraction: c.phase_fraction,
            seed: c.seed,
            eps_feas: c.eps_feas,
        };
        let output = hmode::run(&p.momip, &cfg)?;
        boxed(MomipRun { output }, out)
    })
}

/// Releases a run. Null is a no-op.
///
/// # Safety
/// `run` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn momip_run_free(run: *mut MomipRun) {
    if !run.is_null() {
        // SAFETY: ownership returns to Rust exactly once.
        drop(unsafe { Box::from_raw(run) });
    }
}

/// Archive size; 0 for a null handle.
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn momip_run_len(run: *const MomipRun) -> usize {
    // SAFETY: see the function contract.
    unsafe { run.as_ref() }.map_or(0, |r| r.output.archive.len())
}

/// Number of EVP evaluations performed; 0 for a null handle.
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn momip_run_evaluations(run: *const MomipRun) -> usize {
    // SAFETY: see the function contract.
    unsafe { run.as_ref() }.map_or(0, |r| r.output.evaluations)
}

/// Copies archive entry `index`: objectives into `f_out`, parameters into
/// `alpha_out`, and the EVP optimum into `lambda_out` (each pointer optional
/// when its length is 0 or, for `lambda_out`, null).
///
/// # Safety
/// Buffers must hold their stated lengths.
#[no_mangle]
pub unsafe extern "C" fn momip_run_entry(
    run: *const MomipRun,
    index: usize,
    f_out: *mut f64,
    f_len: usize,
    alpha_out: *mut f64,
    alpha_len: usize,
    lambda_out: *mut f64,
) -> MomipStatus {
    guard(|| {
        let r = non_null(run, "run")?;
        let entry = r.output.archive.entries().get(index).ok_or_else(|| {
            Failure::new(MomipStatus::InvalidArgument, format!("index {index} out of range (archive has {})", r.output.archive.len()))
        })?;
        if f_len > 0 {
            write_slice(f_out, f_len, &entry.f, "f_out")?;
        }
        if alpha_len > 0 {
            write_slice(alpha_out, alpha_len, &entry.alpha, "alpha_out")?;
        }
        // SAFETY: null or writable per the contract.
        if let Some(l) = unsafe { lambda_out.as_mut() } {
            *l = entry.lambda_star;
        }
        Ok(())
    })
}

/// Index and score of the knee entry; `EMPTY_ARCHIVE` when the run found nothing.
///
/// # Safety
/// `index_out` must be writable; `score_out` may be null.
#[no_mangle]
pub unsafe extern "C" fn momip_run_knee(run: *const MomipRun, index_out: *mut usize, score_out: *mut f64) -> MomipStatus {
    guard(|| {
        let r = non_null(run, "run")?;
        let knee = r.output.knee.as_ref().ok_or(Failure::from(Error::EmptyArchive))?;
        *out_ptr(index_out, "index_out")? = knee.index;
        // SAFETY: null or writable per the contract.
        if let Some(s) = unsafe { score_out.as_mut() } {
            *s = knee.score;
        }
        Ok(())
    })
}

/// Recovered state-feedback gains of archive entry `index`, concatenated
/// row-major. `written` receives the number of doubles required, also when the
/// buffer is too small. `count`, `rows` and `cols` (optional) describe the shape.
///
/// # Safety
/// `out` must hold `len` writable doubles; the shape pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn momip_run_entry_gains(
    run: *const MomipRun,
    problem: *const MomipProblem,
    index: usize,
    out: *mut f64,
    len: usize,
    written: *mut usize,
    count: *mut usize,
    rows: *mut usize,
    cols: *mut usize,
) -> MomipStatus {
    guard(|| {
        let r = non_null(run, "run")?;
        let p = non_null(problem, "problem")?;
        let entry = r.output.archive.entries().get(index).ok_or_else(|| {
            Failure::new(MomipStatus::InvalidArgument, format!("index {index} out of range"))
        })?;
        let system = p.momip.build(&entry.alpha)?;
        let gains = problems::recover_gains(system.layout(), &entry.x_star)?;
        let flat: Vec<f64> = gains.gains.iter().flat_map(|k| k.as_slice().iter().copied()).collect();
        let (kr, kc) = gains.gains.first().map_or((0, 0), |k| k.shape());
        // SAFETY: each pointer is null or writable per the contract.
        unsafe {
            if let Some(w) = written.as_mut() {
                *w = flat.len();
            }
            if let Some(c) = count.as_mut() {
                *c = gains.gains.len();
            }
            if let Some(v) = rows.as_mut() {
                *v = kr;
            }
            if let Some(v) = cols.as_mut() {
                *v = kc;
            }
        }
        write_slice(out, len, &flat, "out")
    })
}

/// Default simulation settings.
#[no_mangle]
pub extern "C" fn momip_sim_options_default() -> MomipSimOptions {
    let d = SimConfig::default();
    MomipSimOptions { dt: d.dt, horizon: d.horizon, seed: d.seed, perturbed: false, disturbances: false }
}

/// Simulates the problem's plant under `count` gain matrices of shape
/// `rows × cols`, given row-major and concatenated. `count = 0` runs open loop.
/// Divergence is reported through `out->diverged`, not as an error.
///
/// # Safety
/// `gains` must point to `count·rows·cols` doubles; `options` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn momip_simulate(
    problem: *const MomipProblem,
    gains: *const f64,
    count: usize,
    rows: usize,
    cols: usize,
    options: *const MomipSimOptions,
    out: *mut MomipSimMetrics,
) -> MomipStatus {
    guard(|| {
        let p = non_null(problem, "problem")?;
        let o = non_null(options, "options")?;
        let out = out_ptr(out, "out")?;
        let n = count
            .checked_mul(rows)
            .and_then(|v| v.checked_mul(cols))
            .ok_or_else(|| Failure::new(MomipStatus::InvalidArgument, "gain shape overflows"))?;
        if count > 0 && n == 0 {
            return Err(Failure::new(MomipStatus::InvalidArgument, "gain matrices must be nonempty"));
        }
        let data = input_slice(gains, n, "gains")?;
        let set = (count > 0).then(|| GainSet {
            gains: data.chunks(rows * cols).map(|c| Matrix::from_row_slice(rows, cols, c)).collect(),
        });
        let cfg = SimConfig {
            dt: o.dt,
            horizon: o.horizon,
            seed: o.seed,
            uncertainty: if o.perturbed { Uncertainty::Perturbed } else { Uncertainty::Nominal },
            disturbances: o.disturbances,
            x0: None,
        };
        cfg.validate()?;
        *out = match simulate_design(&p.design, set.as_ref(), &cfg) {
            Ok(res) => MomipSimMetrics {
                max_u_norm: res.max_u_norm,
                max_y_norm: res.max_y_norm,
                l2_ratio: res.l2_ratio.unwrap_or(f64::NAN),
                diverged: false,
            },
            Err(Error::Diverged { .. }) => MomipSimMetrics {
                max_u_norm: f64::INFINITY,
                max_y_norm: f64::INFINITY,
                l2_ratio: f64::NAN,
                diverged: true,
            },
            Err(e) => return Err(e.into()),
        };
        Ok(())
    })
}
