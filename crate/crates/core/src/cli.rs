//! Batch driver behind the `momip` binary.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 configuration error, 3 empty
//! archive (no feasible design found).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::hmode::{self, HmodeConfig};
use crate::lmi::EvpStatus;
use crate::matrix::Matrix;
use crate::problem::{evaluate_at, Momip};
use crate::problems::{self, BiboPlant, GainSet, Plant, RobustFuzzyPlant};
use crate::sim::{self, SimConfig, SimResult, Uncertainty};
use crate::{Error, Result};

pub const OUT_DIR_ENV: &str = "MOMIP_OUT_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    Example1,
    Example1Augmented,
    Example2,
    /// Plant read from `plant_file`.
    Custom,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

/// JSON run configuration. Every field except `problem` is optional.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemKind,
    #[serde(default)]
    pub plant_file: Option<PathBuf>,
    /// For custom robust fuzzy plants: add the `1/det(Z)` objective.
    #[serde(default)]
    pub augmented: bool,
    #[serde(default)]
    pub bounds: Option<Bounds>,
    #[serde(default)]
    pub hmode: HmodeConfig,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl RunConfig {
    pub fn for_problem(problem: ProblemKind) -> Self {
        Self {
            problem,
            plant_file: None,
            augmented: false,
            bounds: None,
            hmode: HmodeConfig::default(),
            sim: SimConfig::default(),
            output_dir: default_out(),
        }
    }

    /// Reads and validates a config; relative plant paths resolve against the config's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if let (Some(pf), Some(dir)) = (&cfg.plant_file, path.parent()) {
            if pf.is_relative() {
                cfg.plant_file = Some(dir.join(pf));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.hmode.validate()?;
        self.sim.validate()?;
        if self.problem == ProblemKind::Custom && self.plant_file.is_none() {
            return Err(Error::Config("problem `custom` needs `plant_file`".into()));
        }
        Ok(())
    }

    pub fn design(&self) -> Result<Design> {
        let design = match self.problem {
            ProblemKind::Example1 => Design::Fuzzy { plant: problems::lorenz_fuzzy_plant(), augmented: false },
            ProblemKind::Example1Augmented => Design::Fuzzy { plant: problems::lorenz_fuzzy_plant(), augmented: true },
            ProblemKind::Example2 => Design::Bibo(problems::bibo_plant()),
            ProblemKind::Custom => {
                let path = self.plant_file.as_ref().ok_or_else(|| Error::Config("missing plant_file".into()))?;
                match problems::load_plant(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))? {
                    Plant::Bibo(p) => Design::Bibo(p),
                    Plant::RobustFuzzy(p) => Design::Fuzzy { plant: p, augmented: self.augmented },
                }
            }
        };
        Ok(design)
    }

    pub fn momip(&self) -> Result<Momip> {
        let p = self.design()?.momip();
        match &self.bounds {
            None => Ok(p),
            Some(b) => p.with_bounds(b.lo.clone(), b.hi.clone()).map_err(|e| Error::Config(format!("bounds: {e}"))),
        }
    }
}

/// A concrete plant together with its design problem.
#[derive(Clone, Debug)]
pub enum Design {
    Fuzzy { plant: RobustFuzzyPlant, augmented: bool },
    Bibo(BiboPlant),
}

impl Design {
    pub fn momip(&self) -> Momip {
        match self {
            Design::Fuzzy { plant, augmented } => problems::example1_momip(plant.clone(), *augmented),
            Design::Bibo(plant) => problems::example2_momip(plant.clone()),
        }
    }
}

/// One row of `gains.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GainRecord {
    #[serde(default)]
    pub alpha: Option<Vec<f64>>,
    #[serde(default)]
    pub f: Option<Vec<f64>>,
    pub gains: Vec<Vec<Vec<f64>>>,
}

/// `gains.json`: records keyed by row index.
pub type GainsFile = BTreeMap<String, GainRecord>;

fn sorted_rows(file: &GainsFile) -> Vec<(&String, &GainRecord)> {
    let mut rows: Vec<_> = file.iter().collect();
    rows.sort_by_key(|(k, _)| (k.parse::<u64>().unwrap_or(u64::MAX), (*k).clone()));
    rows
}

pub fn load_gains(path: &Path) -> Result<GainsFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let file: GainsFile = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    if file.is_empty() {
        return Err(Error::Config(format!("{} holds no gain rows", path.display())));
    }
    Ok(file)
}

#[derive(Debug, Parser)]
#[command(name = "momip", version, about = "Multiobjective LMI controller synthesis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Built-in problem, used when no config is given.
    #[arg(long, value_enum)]
    pub problem: Option<ProblemKind>,
    /// Output directory; overrides the config and MOMIP_OUT_DIR.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the evolutionary design and write the approximated front.
    Design(Common),
    /// Check feasibility of given α vectors and recover gains.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Comma-separated α; repeat for several points.
        #[arg(long, required = true, value_delimiter = ';')]
        alpha: Vec<String>,
    },
    /// Simulate the closed loop under gains from a gains file.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Gains file in the `gains.json` layout; omitted means open loop.
        #[arg(long)]
        gains: Option<PathBuf>,
        /// Row whose trajectory goes to traj.csv (default: first row).
        #[arg(long)]
        row: Option<String>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        horizon: Option<f64>,
        /// Lorenz: use the perturbed parameters.
        #[arg(long)]
        perturbed: bool,
        /// Lorenz: inject bounded random disturbances.
        #[arg(long)]
        disturbances: bool,
    },
}

impl Common {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = match (&self.config, self.problem) {
            (Some(path), _) => RunConfig::load(path)?,
            (None, Some(p)) => RunConfig::for_problem(p),
            (None, None) => return Err(Error::Config("either --config or --problem is required".into())),
        };
        if let (Some(p), Some(_)) = (self.problem, &self.config) {
            cfg.problem = p;
        }
        if let Some(seed) = self.seed {
            cfg.hmode.seed = seed;
            cfg.sim.seed = seed;
        }
        if let Ok(dir) = std::env::var(OUT_DIR_ENV) {
            if !dir.is_empty() {
                cfg.output_dir = PathBuf::from(dir);
            }
        }
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Maps an error to the process exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => 2,
        Error::EmptyArchive => 3,
        _ => 1,
    }
}

/// Parses `args` and runs the command, returning the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let mut stdout = std::io::stdout().lock();
    match execute(&cli.command, &mut stdout) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn execute(command: &Command, stdout: &mut dyn Write) -> Result<()> {
    match command {
        Command::Design(common) => {
            let cfg = common.config()?;
            let summary = cmd_design(&cfg)?;
            writeln!(stdout, "{}", serde_json::to_string_pretty(&summary)?)?;
            if summary.archive_size == 0 {
                return Err(Error::EmptyArchive);
            }
            Ok(())
        }
        Command::Verify { common, alpha } => {
            let cfg = common.config()?;
            let alphas = alpha.iter().map(|a| parse_alpha(a)).collect::<Result<Vec<_>>>()?;
            let report = cmd_verify(&cfg, &alphas)?;
            let text = serde_json::to_string_pretty(&report)?;
            writeln!(stdout, "{text}")?;
            if common.out.is_some() || std::env::var_os(OUT_DIR_ENV).is_some() {
                fs::create_dir_all(&cfg.output_dir)?;
                fs::write(cfg.output_dir.join("verify.json"), text + "\n")?;
            }
            Ok(())
        }
        Command::Simulate { common, gains, row, dt, horizon, perturbed, disturbances } => {
            let mut cfg = common.config()?;
            if let Some(dt) = dt {
                cfg.sim.dt = *dt;
            }
            if let Some(h) = horizon {
                cfg.sim.horizon = *h;
            }
            if *perturbed {
                cfg.sim.uncertainty = Uncertainty::Perturbed;
            }
            cfg.sim.disturbances |= *disturbances;
            cfg.sim.validate()?;
            let gains = gains.as_deref().map(load_gains).transpose()?;
            let metrics = cmd_simulate(&cfg, gains.as_ref(), row.as_deref())?;
            writeln!(stdout, "{}", serde_json::to_string_pretty(&metrics)?)?;
            Ok(())
        }
    }
}

fn parse_alpha(s: &str) -> Result<Vec<f64>> {
    let v = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| Error::Config(format!("bad α entry `{t}`: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Config(format!("bad α `{s}`")));
    }
    Ok(v)
}

fn join(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KneeReport {
    /// Row of apf.csv / gains.json.
    pub row: usize,
    pub f: Vec<f64>,
    pub alpha: Vec<f64>,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub problem: String,
    pub seed: u64,
    pub evaluations: usize,
    pub generations: usize,
    pub archive_size: usize,
    pub wall_time_s: f64,
}

/// Runs HMODE and writes apf.csv, knee.json, gains.json and run_meta.json.
///
/// An empty archive still writes apf.csv (header only) and run_meta.json.
pub fn cmd_design(cfg: &RunConfig) -> Result<RunMeta> {
    let problem = cfg.momip()?;
    let start = Instant::now();
    let out = hmode::run(&problem, &cfg.hmode)?;
    let wall = start.elapsed().as_secs_f64();

    let mut entries: Vec<(usize, &hmode::ArchiveEntry)> = out.archive.entries().iter().enumerate().collect();
    entries.sort_by(|a, b| a.1.f[0].total_cmp(&b.1.f[0]).then(a.0.cmp(&b.0)));

    let dir = &cfg.output_dir;
    fs::create_dir_all(dir)?;
    let mut apf = BufWriter::new(fs::File::create(dir.join("apf.csv"))?);
    let header: Vec<String> = (1..=problem.objectives())
        .map(|i| format!("f{i}"))
        .chain((1..=problem.alpha_dim()).map(|i| format!("alpha{i}")))
        .collect();
    writeln!(apf, "{}", header.join(","))?;
    for (_, e) in &entries {
        writeln!(apf, "{},{}", join(&e.f), join(&e.alpha))?;
    }
    apf.flush()?;

    let meta = RunMeta {
        problem: problem.name().to_owned(),
        seed: cfg.hmode.seed,
        evaluations: out.evaluations,
        generations: out.generations_run,
        archive_size: entries.len(),
        wall_time_s: wall,
    };
    fs::write(dir.join("run_meta.json"), serde_json::to_string_pretty(&meta)? + "\n")?;

    if let Some(knee) = &out.knee {
        let row = entries.iter().position(|(i, _)| *i == knee.index).expect("knee is an archive entry");
        let e = entries[row].1;
        let report = KneeReport { row, f: e.f.clone(), alpha: e.alpha.clone(), score: knee.score };
        fs::write(dir.join("knee.json"), serde_json::to_string_pretty(&report)? + "\n")?;

        let mut gains = GainsFile::new();
        for (row, (_, e)) in entries.iter().enumerate() {
            let system = problem.build(&e.alpha)?;
            let k = problems::recover_gains(system.layout(), &e.x_star)?;
            gains.insert(row.to_string(), GainRecord { alpha: Some(e.alpha.clone()), f: Some(e.f.clone()), gains: k.to_rows() });
        }
        fs::write(dir.join("gains.json"), serde_json::to_string_pretty(&gains)? + "\n")?;
    }
    Ok(meta)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyEntry {
    pub alpha: Vec<f64>,
    pub feasible: bool,
    pub lambda_star: f64,
    pub status: Option<EvpStatus>,
    pub f: Option<Vec<f64>>,
    pub gains: Option<Vec<Vec<Vec<f64>>>>,
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub problem: String,
    pub eps_feas: f64,
    pub results: Vec<VerifyEntry>,
}

/// Evaluates each `α` (ignoring the search box) and recovers gains where feasible.
pub fn cmd_verify(cfg: &RunConfig, alphas: &[Vec<f64>]) -> Result<VerifyReport> {
    let problem = cfg.momip()?;
    let eps = cfg.hmode.eps_feas;
    let results = alphas
        .iter()
        .map(|alpha| {
            if alpha.len() != problem.alpha_dim() {
                return Err(Error::Config(format!("α must have {} entries, got {alpha:?}", problem.alpha_dim())));
            }
            let eval = evaluate_at(&problem, alpha, eps);
            let status = match &eval.reason {
                Some(crate::problem::InfeasibleReason::Solver(s)) => Some(*s),
                Some(crate::problem::InfeasibleReason::Builder(_)) => None,
                _ => Some(EvpStatus::Converged),
            };
            let gains = match (&eval.x_star, eval.feasible) {
                (Some(x), true) => Some(problems::recover_gains(problem.build(alpha)?.layout(), x)?.to_rows()),
                _ => None,
            };
            Ok(VerifyEntry {
                alpha: alpha.clone(),
                feasible: eval.feasible,
                lambda_star: eval.lambda_star,
                status,
                f: eval.f,
                gains,
                detail: eval.reason.map(|r| format!("{r:?}")),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VerifyReport { problem: problem.name().to_owned(), eps_feas: eps, results })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimMetrics {
    pub max_u_norm: f64,
    pub max_y_norm: f64,
    pub l2_ratio: Option<f64>,
    /// `max‖u‖ < ū`, when the row carries a bounded-input/output `α`.
    pub u_bound_ok: Option<bool>,
    /// `max|y| < ȳ`, when the row carries a bounded-input/output `α`.
    pub y_bound_ok: Option<bool>,
    /// `l2_ratio ≤ γ`, when the row carries an H∞ `α` and disturbances were injected.
    pub l2_bound_ok: Option<bool>,
    pub diverged: bool,
}

pub type MetricsFile = BTreeMap<String, SimMetrics>;

/// Simulates the plant behind `design` in closed loop with `gains` (open loop when absent).
pub fn simulate_design(design: &Design, gains: Option<&GainSet>, sim_cfg: &SimConfig) -> Result<SimResult> {
    match design {
        Design::Fuzzy { .. } => sim::simulate_lorenz(gains, sim_cfg),
        Design::Bibo(plant) => {
            let k = match gains {
                Some(g) if g.gains.len() == 1 => g.gains[0].clone(),
                Some(g) => return Err(Error::Config(format!("expected one gain matrix, got {}", g.gains.len()))),
                None => Matrix::zeros(plant.inputs(), plant.states()),
            };
            sim::simulate_bibo(plant, &k, sim_cfg)
        }
    }
}

fn metrics_for(design: &Design, record: Option<&GainRecord>, result: &SimResult, sim_cfg: &SimConfig) -> SimMetrics {
    let alpha = record.and_then(|r| r.alpha.as_deref());
    let (u_ok, y_ok, l2_ok) = match (design, alpha) {
        (Design::Bibo(_), Some([u, y])) => (Some(result.max_u_norm < *u), Some(result.max_y_norm < *y), None),
        (Design::Fuzzy { .. }, Some([gamma, ..])) if sim_cfg.disturbances => {
            (None, None, result.l2_ratio.map(|r| r <= *gamma))
        }
        _ => (None, None, None),
    };
    SimMetrics {
        max_u_norm: result.max_u_norm,
        max_y_norm: result.max_y_norm,
        l2_ratio: result.l2_ratio,
        u_bound_ok: u_ok,
        y_bound_ok: y_ok,
        l2_bound_ok: l2_ok,
        diverged: false,
    }
}

/// Simulates every gain row, writing traj.csv for the selected row and metrics.json for all rows.
pub fn cmd_simulate(cfg: &RunConfig, gains: Option<&GainsFile>, row: Option<&str>) -> Result<MetricsFile> {
    let design = cfg.design()?;
    let rows: Vec<(String, Option<&GainRecord>)> = match gains {
        Some(file) => sorted_rows(file).into_iter().map(|(k, r)| (k.clone(), Some(r))).collect(),
        None => vec![("open_loop".to_owned(), None)],
    };
    let traj_row = match row {
        Some(r) if rows.iter().any(|(k, _)| k == r) => r.to_owned(),
        Some(r) => return Err(Error::Config(format!("row `{r}` is not in the gains file"))),
        None => rows[0].0.clone(),
    };
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir)?;
    let mut metrics = MetricsFile::new();
    for (key, record) in &rows {
        let set = record.map(|r| GainSet::from_rows(&r.gains)).transpose().map_err(|e| Error::Config(e.to_string()))?;
        match simulate_design(&design, set.as_ref(), &cfg.sim) {
            Ok(result) => {
                if *key == traj_row {
                    let mut f = BufWriter::new(fs::File::create(dir.join("traj.csv"))?);
                    sim::write_csv(&result, &mut f)?;
                    f.flush()?;
                }
                metrics.insert(key.clone(), metrics_for(&design, *record, &result, &cfg.sim));
            }
            Err(Error::Diverged { .. }) => {
                metrics.insert(
                    key.clone(),
                    SimMetrics {
                        max_u_norm: f64::INFINITY,
                        max_y_norm: f64::INFINITY,
                        l2_ratio: None,
                        u_bound_ok: matches!(design, Design::Bibo(_)).then_some(false),
                        y_bound_ok: matches!(design, Design::Bibo(_)).then_some(false),
                        l2_bound_ok: None,
                        diverged: true,
                    },
                );
            }
            Err(e) => return Err(e),
        }
    }
    // serde_json rejects infinities, so diverged rows serialize as null
    let value = serde_json::to_value(metrics_json(&metrics))?;
    fs::write(dir.join("metrics.json"), serde_json::to_string_pretty(&value)? + "\n")?;
    Ok(metrics)
}

fn metrics_json(m: &MetricsFile) -> serde_json::Value {
    let num = |v: f64| if v.is_finite() { serde_json::json!(v) } else { serde_json::Value::Null };
    serde_json::Value::Object(
        m.iter()
            .map(|(k, s)| {
                (
                    k.clone(),
                    serde_json::json!({
                        "max_u_norm": num(s.max_u_norm),
                        "max_y_norm": num(s.max_y_norm),
                        "l2_ratio": s.l2_ratio,
                        "u_bound_ok": s.u_bound_ok,
                        "y_bound_ok": s.y_bound_ok,
                        "l2_bound_ok": s.l2_bound_ok,
                        "diverged": s.diverged,
                    }),
                )
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_and_errors() {
        let cfg: RunConfig = serde_json::from_str(r#"{"problem":"example2"}"#).unwrap();
        assert_eq!(cfg.hmode, HmodeConfig::default());
        assert_eq!(cfg.output_dir, PathBuf::from("out"));
        assert!(serde_json::from_str::<RunConfig>(r#"{"problem":"example3"}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"problem":"example2","typo":1}"#).is_err());
        let cfg = RunConfig { hmode: HmodeConfig { population: 2, ..Default::default() }, ..cfg };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        assert!(RunConfig::for_problem(ProblemKind::Custom).validate().is_err());
    }

    #[test]
    fn alpha_parsing() {
        assert_eq!(parse_alpha("2.1412, 2.0705").unwrap(), vec![2.1412, 2.0705]);
        assert!(parse_alpha("1,x").is_err());
        assert!(parse_alpha("1,NaN").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), 2);
        assert_eq!(exit_code(&Error::EmptyArchive), 3);
        assert_eq!(exit_code(&Error::NotPositiveDefinite), 1);
    }

    #[test]
    fn verify_reports_feasibility() {
        let cfg = RunConfig::for_problem(ProblemKind::Example2);
        let r = cmd_verify(&cfg, &[vec![2.1412, 2.0705], vec![1e-4, 1e-4]]).unwrap();
        assert!(r.results[0].feasible && r.results[0].lambda_star < 0.0);
        assert_eq!(r.results[0].gains.as_ref().unwrap()[0].len(), 2);
        assert!(!r.results[1].feasible);
        assert!(cmd_verify(&cfg, &[vec![1.0]]).is_err());
    }

    #[test]
    fn gains_rows_sort_numerically() {
        let rec = GainRecord { alpha: None, f: None, gains: vec![] };
        let file: GainsFile = ["10", "2", "0"].iter().map(|k| (k.to_string(), rec.clone())).collect();
        let keys: Vec<&str> = sorted_rows(&file).iter().map(|(k, _)| k.as_str()).collect();
        assert_eq!(keys, vec!["0", "2", "10"]);
    }
}
