//! Fixed-step closed-loop simulation.
//!
//! Two loops are covered: the nonlinear Lorenz system under fuzzy state
//! feedback (with optional parameter perturbation and bounded random
//! disturbances), and a disturbance-free linear plant under `u = Kx`.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;
use crate::problems::{BiboPlant, GainSet};
use crate::{Error, Result};

/// Classical fourth-order Runge–Kutta step of `ẋ = f(t, x)`.
pub fn rk4_step<F>(mut f: F, t: f64, x: &[f64], dt: f64) -> Vec<f64>
where
    F: FnMut(f64, &[f64]) -> Vec<f64>,
{
    let shifted = |k: &[f64], h: f64| x.iter().zip(k).map(|(xi, ki)| xi + h * ki).collect::<Vec<_>>();
    let k1 = f(t, x);
    let k2 = f(t + 0.5 * dt, &shifted(&k1, 0.5 * dt));
    let k3 = f(t + 0.5 * dt, &shifted(&k2, 0.5 * dt));
    let k4 = f(t + dt, &shifted(&k3, dt));
    (0..x.len()).map(|i| x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Uncertainty {
    /// `σ = 10`, `r = 28`, `b = 8/3`.
    #[default]
    Nominal,
    /// `σ(t) = 10 + sin t`, `r = 0.8·28`, `b = 1.1·8/3`.
    Perturbed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub dt: f64,
    pub horizon: f64,
    pub seed: u64,
    pub uncertainty: Uncertainty,
    /// Lorenz only: inject the bounded random disturbances.
    pub disturbances: bool,
    /// Initial state; each simulator has its own default.
    pub x0: Option<Vec<f64>>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { dt: 1e-3, horizon: 10.0, seed: 0, uncertainty: Uncertainty::Nominal, disturbances: false, x0: None }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.horizon >= self.dt && self.horizon.is_finite()) {
            return Err(Error::Config(format!("horizon must be at least dt, got {}", self.horizon)));
        }
        if let Some(x0) = &self.x0 {
            if x0.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config("x0 must be finite".into()));
            }
        }
        Ok(())
    }

    fn steps(&self) -> usize {
        (self.horizon / self.dt).round().max(1.0) as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub time: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub inputs: Vec<Vec<f64>>,
    pub outputs: Vec<Vec<f64>>,
    /// Disturbance held over `[t_k, t_{k+1})`; absent when none was injected.
    pub disturbances: Option<Vec<Vec<f64>>>,
    pub max_u_norm: f64,
    pub max_y_norm: f64,
    pub l2_ratio: Option<f64>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl SimResult {
    fn finish(
        time: Vec<f64>,
        states: Vec<Vec<f64>>,
        inputs: Vec<Vec<f64>>,
        outputs: Vec<Vec<f64>>,
        disturbances: Option<Vec<Vec<f64>>>,
    ) -> Self {
        let max_u_norm = inputs.iter().map(|u| norm(u)).fold(0.0, f64::max);
        let max_y_norm = outputs.iter().map(|y| norm(y)).fold(0.0, f64::max);
        let mut r = Self { time, states, inputs, outputs, disturbances, max_u_norm, max_y_norm, l2_ratio: None };
        r.l2_ratio = l2_gain_ratio(&r).ok();
        r
    }

    /// Largest `|x_i(t)|` over samples with `t ≥ t_from`.
    pub fn max_abs_state_after(&self, t_from: f64) -> f64 {
        self.time
            .iter()
            .zip(&self.states)
            .filter(|(t, _)| **t >= t_from - 1e-12)
            .flat_map(|(_, x)| x.iter().map(|v| v.abs()))
            .fold(0.0, f64::max)
    }

    /// Smallest `‖x(t)‖` over samples with `t ≥ t_from`.
    pub fn min_state_norm_after(&self, t_from: f64) -> f64 {
        self.time
            .iter()
            .zip(&self.states)
            .filter(|(t, _)| **t >= t_from - 1e-12)
            .map(|(_, x)| norm(x))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Fuzzy memberships of the Lorenz model, both clamped to `[0, 1]`.
pub fn membership(x1: f64) -> (f64, f64) {
    let xi1 = (-(x1 - 30.0) / 50.0).clamp(0.0, 1.0);
    let xi2 = ((x1 + 20.0) / 50.0).clamp(0.0, 1.0);
    (xi1, xi2)
}

const DIVERGENCE_NORM: f64 = 1e9;

const W_INTERVALS: [(f64, f64); 3] = [(-0.2, 0.8), (-0.7, 1.0), (-0.1, 0.3)];

fn check_state(x: &[f64], t: f64) -> Result<()> {
    let n = norm(x);
    if !n.is_finite() || n > DIVERGENCE_NORM {
        return Err(Error::Diverged { t });
    }
    Ok(())
}

/// Simulates the Lorenz loop; `gains = None` runs it open loop (`u = 0`).
///
/// A gain set holds either one gain per rule (two) or a single shared gain.
/// The default initial state is the origin.
pub fn simulate_lorenz(gains: Option<&GainSet>, cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    let ks: Option<[Vec<f64>; 2]> = match gains {
        None => None,
        Some(g) => {
            if g.gains.iter().any(|k| k.shape() != (1, 3)) {
                return Err(Error::Dimension("Lorenz gains must be 1×3".into()));
            }
            match g.gains.as_slice() {
                [k] => Some([k.row(0).to_vec(), k.row(0).to_vec()]),
                [k1, k2] => Some([k1.row(0).to_vec(), k2.row(0).to_vec()]),
                _ => return Err(Error::Dimension(format!("expected 1 or 2 Lorenz gains, got {}", g.gains.len()))),
            }
        }
    };
    let x0 = cfg.x0.clone().unwrap_or_else(|| vec![0.0; 3]);
    if x0.len() != 3 {
        return Err(Error::Dimension("Lorenz x0 must have 3 entries".into()));
    }
    let control = |x: &[f64]| -> f64 {
        match &ks {
            None => 0.0,
            Some([k1, k2]) => {
                let (xi1, xi2) = membership(x[0]);
                let dot = |k: &[f64]| k.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
                xi1 * dot(k1) + xi2 * dot(k2)
            }
        }
    };
    let params = |t: f64| -> (f64, f64, f64) {
        match cfg.uncertainty {
            Uncertainty::Nominal => (10.0, 28.0, 8.0 / 3.0),
            Uncertainty::Perturbed => (10.0 + t.sin(), 0.8 * 28.0, 1.1 * 8.0 / 3.0),
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut draw = || -> Vec<f64> {
        if cfg.disturbances {
            W_INTERVALS.iter().map(|&(lo, hi)| rng.random_range(lo..hi)).collect()
        } else {
            vec![0.0; 3]
        }
    };

    let steps = cfg.steps();
    let mut time = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut inputs = Vec::with_capacity(steps + 1);
    let mut outputs = Vec::with_capacity(steps + 1);
    let mut ws = Vec::with_capacity(steps + 1);
    let mut x = x0;
    check_state(&x, 0.0)?;
    for k in 0..=steps {
        let t = k as f64 * cfg.dt;
        let u = control(&x);
        let w = draw();
        time.push(t);
        outputs.push(x.iter().map(|xi| xi + u).collect());
        inputs.push(vec![u]);
        states.push(x.clone());
        if k < steps {
            let field = |s: f64, x: &[f64]| -> Vec<f64> {
                let (sigma, r, b) = params(s);
                let u = control(x);
                vec![
                    -sigma * x[0] + sigma * x[1] + u + 0.1 * w[0],
                    r * x[0] - x[1] - x[0] * x[2] + 0.1 * w[1],
                    x[0] * x[1] - b * x[2] + 0.1 * w[2],
                ]
            };
            x = rk4_step(field, t, &x, cfg.dt);
            check_state(&x, t + cfg.dt)?;
        }
        ws.push(w);
    }
    let disturbances = cfg.disturbances.then_some(ws);
    Ok(SimResult::finish(time, states, inputs, outputs, disturbances))
}

/// Simulates `ẋ = (A + BK)x`, `u = Kx`, `y = Cx`. The default initial state is the plant's `x0`.
pub fn simulate_bibo(plant: &BiboPlant, k: &Matrix, cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    if k.shape() != (plant.inputs(), plant.states()) {
        return Err(Error::Dimension(format!(
            "gain must be {}×{}, got {}×{}",
            plant.inputs(),
            plant.states(),
            k.rows(),
            k.cols()
        )));
    }
    let x0 = cfg.x0.clone().unwrap_or_else(|| plant.x0.clone());
    if x0.len() != plant.states() {
        return Err(Error::Dimension("x0 does not match the plant".into()));
    }
    let acl = plant.a.add(&plant.b.mul(k));
    let steps = cfg.steps();
    let mut time = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut inputs = Vec::with_capacity(steps + 1);
    let mut outputs = Vec::with_capacity(steps + 1);
    let mut x = x0;
    check_state(&x, 0.0)?;
    for step in 0..=steps {
        let t = step as f64 * cfg.dt;
        time.push(t);
        inputs.push(k.mul_vec(&x));
        outputs.push(plant.c.mul_vec(&x));
        states.push(x.clone());
        if step < steps {
            x = rk4_step(|_, x| acl.mul_vec(x), t, &x, cfg.dt);
            check_state(&x, t + cfg.dt)?;
        }
    }
    Ok(SimResult::finish(time, states, inputs, outputs, None))
}

fn trapezoid(time: &[f64], values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    time.windows(2).zip(v.windows(2)).map(|(t, y)| 0.5 * (t[1] - t[0]) * (y[0] + y[1])).sum()
}

/// `sqrt(∫ yᵀy / ∫ wᵀw)` by the trapezoidal rule on the sample grid.
pub fn l2_gain_ratio(result: &SimResult) -> Result<f64> {
    let ws = result.disturbances.as_ref().ok_or_else(|| Error::Undefined("no disturbance was recorded".into()))?;
    let energy = |v: &[Vec<f64>]| trapezoid(&result.time, v.iter().map(|s| s.iter().map(|x| x * x).sum()));
    let we = energy(ws);
    if !(we > 0.0) {
        return Err(Error::Undefined("disturbance energy is zero".into()));
    }
    Ok((energy(&result.outputs) / we).sqrt())
}

/// Writes `t,x1..xn,u1..um,y1..yp[,w1..wq]`, one row per sample.
pub fn write_csv<W: Write>(result: &SimResult, mut out: W) -> Result<()> {
    let width = |v: &[Vec<f64>]| v.first().map_or(0, Vec::len);
    let mut header = vec!["t".to_owned()];
    let groups: Vec<(&str, &[Vec<f64>])> = [
        Some(("x", result.states.as_slice())),
        Some(("u", result.inputs.as_slice())),
        Some(("y", result.outputs.as_slice())),
        result.disturbances.as_deref().map(|w| ("w", w)),
    ]
    .into_iter()
    .flatten()
    .collect();
    for (name, data) in &groups {
        header.extend((1..=width(data)).map(|i| format!("{name}{i}")));
    }
    writeln!(out, "{}", header.join(","))?;
    for (k, t) in result.time.iter().enumerate() {
        let mut row = vec![t.to_string()];
        for (_, data) in &groups {
            row.extend(data[k].iter().map(f64::to_string));
        }
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::bibo_plant;

    #[test]
    fn rk4_constant_field() {
        let x = rk4_step(|_, _| vec![0.0, 0.0], 0.0, &[1.5, -2.0], 0.1);
        assert_eq!(x, vec![1.5, -2.0]);
    }

    #[test]
    fn rk4_exponential_decay() {
        let x = rk4_step(|_, x| vec![-x[0]], 0.0, &[1.0], 0.1);
        assert!((x[0] - (-0.1f64).exp()).abs() < 1e-6);
    }

    #[test]
    fn rk4_is_fourth_order() {
        let a = Matrix::from_rows(&[[-0.5, 2.0], [-2.0, -0.3]]).unwrap();
        let run = |dt: f64| {
            let n = (2.0 / dt).round() as usize;
            let mut x = vec![1.0, 0.5];
            for k in 0..n {
                x = rk4_step(|_, x| a.mul_vec(x), k as f64 * dt, &x, dt);
            }
            x
        };
        let reference = run(0.025);
        let err = |x: Vec<f64>| norm(&[x[0] - reference[0], x[1] - reference[1]]);
        let ratio = err(run(0.2)) / err(run(0.1));
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn membership_values() {
        assert_eq!(membership(5.0), (0.5, 0.5));
        assert_eq!(membership(-30.0), (1.0, 0.0));
        assert_eq!(membership(40.0), (0.0, 1.0));
    }

    #[test]
    fn zero_gain_gives_zero_input() {
        let plant = bibo_plant();
        let r = simulate_bibo(&plant, &Matrix::zeros(2, 2), &SimConfig::default()).unwrap();
        assert_eq!(r.max_u_norm, 0.0);
        assert_eq!(r.time.len(), 10_001);
        assert!(r.l2_ratio.is_none());
        // |y(0)| = |3 - 2.8|
        assert!(r.max_y_norm >= 0.2 - 1e-12);
    }

    #[test]
    fn l2_ratio_cases() {
        let base = SimResult {
            time: vec![0.0, 1.0, 2.0],
            states: vec![vec![0.0]; 3],
            inputs: vec![vec![0.0]; 3],
            outputs: vec![vec![0.0]; 3],
            disturbances: Some(vec![vec![1.0], vec![2.0], vec![-1.0]]),
            max_u_norm: 0.0,
            max_y_norm: 0.0,
            l2_ratio: None,
        };
        assert_eq!(l2_gain_ratio(&base).unwrap(), 0.0);
        let same = SimResult { outputs: base.disturbances.clone().unwrap(), ..base.clone() };
        assert!((l2_gain_ratio(&same).unwrap() - 1.0).abs() < 1e-15);
        let silent = SimResult { disturbances: Some(vec![vec![0.0]; 3]), ..base.clone() };
        assert!(matches!(l2_gain_ratio(&silent), Err(Error::Undefined(_))));
        let none = SimResult { disturbances: None, ..base };
        assert!(matches!(l2_gain_ratio(&none), Err(Error::Undefined(_))));
    }

    #[test]
    fn divergence_is_reported() {
        let plant = BiboPlant::new(
            Matrix::from_rows(&[[5.0]]).unwrap(),
            Matrix::from_rows(&[[1.0]]).unwrap(),
            Matrix::from_rows(&[[1.0]]).unwrap(),
            vec![1.0],
        )
        .unwrap();
        let r = simulate_bibo(&plant, &Matrix::zeros(1, 1), &SimConfig::default());
        assert!(matches!(r, Err(Error::Diverged { .. })));
    }

    #[test]
    fn disturbances_stay_in_intervals_and_are_seeded() {
        let cfg = SimConfig { horizon: 0.5, disturbances: true, seed: 7, ..SimConfig::default() };
        let a = simulate_lorenz(None, &cfg).unwrap();
        let b = simulate_lorenz(None, &cfg).unwrap();
        assert_eq!(a, b);
        for w in a.disturbances.as_ref().unwrap() {
            for (v, (lo, hi)) in w.iter().zip(W_INTERVALS) {
                assert!(lo <= *v && *v < hi);
            }
        }
        assert!(a.l2_ratio.is_some());
    }

    #[test]
    fn open_loop_lorenz_is_chaotic_but_bounded() {
        let cfg = SimConfig { x0: Some(vec![1.0, 1.0, 1.0]), ..SimConfig::default() };
        let r = simulate_lorenz(None, &cfg).unwrap();
        assert!(r.min_state_norm_after(5.0) >= 1.0);
        assert!(r.max_abs_state_after(0.0) < 100.0);
        let fine = simulate_lorenz(None, &SimConfig { dt: 5e-4, horizon: 5.0, ..cfg.clone() }).unwrap();
        let coarse = simulate_lorenz(None, &SimConfig { horizon: 5.0, ..cfg }).unwrap();
        let (xc, xf) = (coarse.states.last().unwrap(), fine.states.last().unwrap());
        let diff = norm(&[xc[0] - xf[0], xc[1] - xf[1], xc[2] - xf[2]]);
        assert!(diff < 1e-3, "diff {diff}");
    }

    #[test]
    fn csv_layout() {
        let cfg = SimConfig { horizon: 0.002, disturbances: true, ..SimConfig::default() };
        let r = simulate_lorenz(None, &cfg).unwrap();
        let mut buf = Vec::new();
        write_csv(&r, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,x1,x2,x3,u1,y1,y2,y3,w1,w2,w3");
        let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[2][9], r.disturbances.as_ref().unwrap()[2][1]);
        assert_eq!(rows[1][1], r.states[1][0]);
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig { dt: 0.0, ..SimConfig::default() }.validate().is_err());
        assert!(SimConfig { horizon: 1e-4, ..SimConfig::default() }.validate().is_err());
        assert!(SimConfig::default().validate().is_ok());
    }
}
