use super::scenario::{Scenario, SolverConfig};
use super::step::{boundary_face_values, flux_antisymmetry, Stepper};
use crate::error::{Error, Result};
use crate::grid::{integrate_boundary, integrate_volume, pairwise_sum, SpatialField, TimeSeries};

/// Bookkeeping for one accepted step from `t` to `t + dt`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub dt: f64,
    pub iterations: usize,
    pub picard_residual: f64,
    /// Rejected attempts (each halving `dt`) before this step was accepted.
    pub rejections: usize,
    /// `int phi (w_new - w_old)`, summed directly from the cell differences.
    pub mass_change: f64,
    /// `int_Gamma psi(t + dt) w` with the boundary values used by the step.
    pub outflow: f64,
    /// `int s(x, t + dt)`, zero without a manufactured source.
    pub source: f64,
    pub clamped_cells: usize,
    pub clamped_mass: f64,
}

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub t: f64,
    pub u: SpatialField,
}

/// Everything recorded by [`solve`].
#[derive(Clone, Debug)]
pub struct SolutionTrace {
    pub snapshots: Vec<Snapshot>,
    pub alphas: Vec<f64>,
    /// `int phi u^alpha` after every step, one series per entry of `alphas`.
    pub energies: Vec<TimeSeries>,
    /// `int phi u^lambda` after every step.
    pub mass: TimeSeries,
    /// `int_Gamma psi u^lambda` after every step.
    pub outflow: TimeSeries,
    pub max_u: TimeSeries,
    pub steps: Vec<StepRecord>,
    pub flux_antisymmetric: bool,
}

impl SolutionTrace {
    pub fn energy(&self, alpha: f64) -> Option<&TimeSeries> {
        self.alphas.iter().position(|a| *a == alpha).map(|i| &self.energies[i])
    }

    pub fn final_u(&self) -> &SpatialField {
        &self.snapshots.last().expect("a trace always holds the initial snapshot").u
    }

    pub fn total_clamped_cells(&self) -> usize {
        self.steps.iter().map(|s| s.clamped_cells).sum()
    }
}

fn u_of_w(w: &[f64], lambda: f64) -> Vec<f64> {
    w.iter().map(|v| v.max(0.0).powf(1.0 / lambda)).collect()
}

struct Recorder<'a> {
    scenario: &'a Scenario,
    trace: SolutionTrace,
    next_snapshot: f64,
    interval: f64,
}

impl Recorder<'_> {
    fn record(&mut self, t: f64, w: &[f64], force_snapshot: bool) -> Result<()> {
        let sc = self.scenario;
        let phi = sc.phi.values();
        let u = u_of_w(w, sc.lambda);
        let g = sc.grid;
        self.trace.mass.push(t, integrate_volume(&g, |c| phi[c] * w[c])?)?;
        let psi = sc.psi.at_time(t);
        let wf = boundary_face_values(&g, w);
        self.trace.outflow.push(t, integrate_boundary(&g, |_, b| psi[b] * wf[b])?)?;
        self.trace.max_u.push(t, u.iter().copied().fold(0.0, f64::max))?;
        for (i, &alpha) in self.trace.alphas.iter().enumerate() {
            self.trace.energies[i].push(t, integrate_volume(&g, |c| phi[c] * u[c].powf(alpha))?)?;
        }
        if force_snapshot || self.interval == 0.0 || t >= self.next_snapshot {
            self.trace.snapshots.push(Snapshot { t, u: SpatialField::new(g, u, "u")? });
            if self.interval > 0.0 {
                self.next_snapshot = ((t / self.interval).floor() + 1.0) * self.interval;
            }
        }
        Ok(())
    }
}

/// Consecutive easy steps before `dt` grows.
const EASY_STEPS: usize = 3;
const DT_GROWTH: f64 = 1.2;

/// Integrates the scenario to its final time with adaptive steps.
///
/// `dt` halves on every rejected attempt and grows by 1.2 after three
/// consecutive steps that converge within half the Picard budget. The last
/// step is shortened to land on the final time and may fall below `dt_min`.
pub fn solve(scenario: &Scenario, config: &SolverConfig) -> Result<SolutionTrace> {
    config.validate()?;
    let sc = scenario;
    let lambda = sc.lambda;
    let mut w: Vec<f64> = sc.u0.values().iter().map(|u| u.powf(lambda)).collect();
    let trace = SolutionTrace {
        snapshots: Vec::new(),
        alphas: config.alphas.clone(),
        energies: vec![TimeSeries::new(); config.alphas.len()],
        mass: TimeSeries::new(),
        outflow: TimeSeries::new(),
        max_u: TimeSeries::new(),
        steps: Vec::new(),
        flux_antisymmetric: flux_antisymmetry(&sc.grid),
    };
    let mut rec = Recorder { scenario: sc, trace, next_snapshot: 0.0, interval: config.snapshot_interval };
    rec.record(0.0, &w, true)?;
    let mut stepper = Stepper::new(sc);
    let phi = sc.phi.values();
    let vol = sc.grid.cell_volume();
    let mut t = 0.0;
    let mut dt = config.dt_initial;
    let mut easy = 0usize;
    let t_end = sc.t_final;
    while t_end - t > 1e-14 * t_end {
        let mut rejections = 0usize;
        let (outcome, dt_used) = loop {
            let remaining = t_end - t;
            let dt_try = if dt >= remaining || remaining - dt < 1e-9 * t_end { remaining } else { dt };
            match stepper.step(&w, t, dt_try, config) {
                Ok(o) => break (o, dt_try),
                Err(fail) => {
                    rejections += 1;
                    dt = dt_try * 0.5;
                    easy = 0;
                    if dt < config.dt_min {
                        return Err(Error::SolverFailure {
                            t,
                            reason: format!("{fail}; dt fell below dt_min = {:e} after {rejections} halvings", config.dt_min),
                        });
                    }
                }
            }
        };
        let t_new = if dt_used == t_end - t { t_end } else { t + dt_used };
        let diffs: Vec<f64> = (0..w.len()).map(|c| phi[c] * (outcome.w[c] - w[c]) * vol).collect();
        let source = match &sc.source {
            Some(s) => integrate_volume(&sc.grid, |c| s(sc.grid.cell_center(c), t_new))?,
            None => 0.0,
        };
        rec.trace.steps.push(StepRecord {
            t,
            dt: dt_used,
            iterations: outcome.iterations,
            picard_residual: outcome.residual,
            rejections,
            mass_change: pairwise_sum(&diffs),
            outflow: outcome.outflow,
            source,
            clamped_cells: outcome.clamped_cells,
            clamped_mass: outcome.clamped_mass,
        });
        w = outcome.w;
        t = t_new;
        rec.record(t, &w, t == t_end)?;
        if outcome.iterations <= config.picard_max / 2 {
            easy += 1;
            if easy >= EASY_STEPS {
                dt = (dt * DT_GROWTH).min(config.dt_max);
                easy = 0;
            }
        } else {
            easy = 0;
        }
        dt = dt.min(config.dt_max);
    }
    Ok(rec.trace)
}
