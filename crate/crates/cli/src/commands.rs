use crate::config::{ConfigError, LoadedConfig, RunConfig};
use crate::output::{fmt_f64, OutputDir, Stamp};
use porebound_core::bounds::{
    bound_report, build_exponents, example_gas_tables, optimize_bound_report, verify_solution_against_bounds,
    BoundReport, ExponentInputs, GasInputs, OptimizeCandidate,
};
use porebound_core::grid::write_field_csv;
use porebound_core::harness::{
    calibrate_constants, default_parameter_sets, run_suite, EmbeddingConstants, SuiteConstants, DEFAULT_SAFETY_FACTOR,
};
use porebound_core::solver::{mass_balance_report, monotonicity_check, solve, MonotonicityReport, Scenario, SolutionTrace};
use porebound_core::Error;
use serde::Serialize;
use std::path::{Path, PathBuf};

/// A failed command and its exit code.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Solver(String),
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Solver(_) => 2,
            CliError::Verification(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Solver(m) => write!(f, "solver error: {m}"),
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("output: {e}"))
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::SolverFailure { .. } | Error::RootNotConverged { .. } => CliError::Solver(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

/// Errors raised while time stepping count as solver failures.
fn solver_err(e: Error) -> CliError {
    match e {
        Error::InvalidInput(_) => CliError::Config(e.to_string()),
        _ => CliError::Solver(e.to_string()),
    }
}

pub type CmdResult = Result<(), CliError>;

/// A loaded config with its output directory and stamp.
pub struct Run {
    pub cfg: RunConfig,
    pub base_dir: PathBuf,
    pub out: OutputDir,
}

impl Run {
    pub fn open(loaded: LoadedConfig, output: Option<&Path>) -> Result<Self, CliError> {
        let LoadedConfig { config, base_dir } = loaded;
        let canonical = toml::to_string(&config).map_err(|e| CliError::Config(e.to_string()))?;
        let stamp = Stamp::new(&canonical, Some(config.harness.seed));
        let dir = match output {
            Some(p) => p.to_path_buf(),
            None => base_dir.join(&config.output.directory),
        };
        let out = OutputDir::create(&dir, stamp)?;
        Ok(Run { cfg: config, base_dir, out })
    }

    /// Embedding constants for the bounds; calibrated ones use `p = 2 - a`.
    fn bound_constants(&self, sc: &Scenario) -> Result<EmbeddingConstants, CliError> {
        let c = &self.cfg.constants;
        if c.source == "user" {
            return Ok(self.cfg.user_constants()?);
        }
        let a = sc.law.degeneracy();
        let r1 = match self.cfg.bounds.r1 {
            Some(r1) => r1,
            None => {
                let inputs = ExponentInputs {
                    r: self.cfg.bounds.r,
                    alpha0: self.cfg.bounds.alpha0,
                    kappa_tilde: self.cfg.bounds.kappa_tilde,
                    p: self.cfg.bounds.p,
                    ..ExponentInputs::new(sc.grid.dim(), a, sc.lambda)
                };
                build_exponents(&inputs)?.r1
            }
        };
        self.calibrated(r1, 2.0 - a)
    }

    fn calibrated(&self, r1: f64, p: f64) -> Result<EmbeddingConstants, CliError> {
        let h = &self.cfg.harness;
        let family = self.cfg.family(h.calibration_seed.unwrap_or(h.seed.wrapping_add(1)));
        let grid = self.cfg.harness_grid()?;
        let k = self.cfg.constants.safety_factor;
        let mut c = calibrate_constants(&grid, r1, p, &family)?.scaled(k / DEFAULT_SAFETY_FACTOR);
        c.safety_factor = k;
        Ok(c)
    }

    fn report_for(&self, sc: &Scenario, consts: &EmbeddingConstants) -> Result<(BoundReport, Vec<OptimizeCandidate>), CliError> {
        let opts = self.cfg.bound_options(sc.t_final);
        if self.cfg.bounds.optimize {
            Ok(optimize_bound_report(sc, consts, &opts)?)
        } else {
            Ok((bound_report(sc, consts, &opts)?, Vec::new()))
        }
    }

    /// The final time: given directly, or a fraction of the blow-up time of
    /// a probe report built at `T = 1`.
    fn final_time(&self) -> Result<f64, CliError> {
        if let Some(t) = self.cfg.scenario.t_final {
            return Ok(t);
        }
        let frac = self.cfg.scenario.t_final_fraction.expect("validated: one of t_final, t_final_fraction");
        let probe = self.cfg.scenario(&self.base_dir, 1.0)?;
        let consts = self.bound_constants(&probe)?;
        let (rep, _) = self.report_for(&probe, &consts)?;
        let t = frac * rep.curve.t_threshold;
        if !(t.is_finite() && t > 0.0) {
            return Err(CliError::Config(format!("blow-up time {} gives no usable final time", rep.curve.t_threshold)));
        }
        Ok(t)
    }

    fn bounds(&self, sc: &Scenario) -> Result<(EmbeddingConstants, BoundReport, Vec<OptimizeCandidate>), CliError> {
        let consts = self.bound_constants(sc)?;
        let (rep, cands) = self.report_for(sc, &consts)?;
        Ok((consts, rep, cands))
    }

    fn solve(&self, sc: &Scenario, extra_alphas: &[f64]) -> Result<SolutionTrace, CliError> {
        solve(sc, &self.cfg.solver_config(sc.t_final, extra_alphas)).map_err(solver_err)
    }
}

fn write_trace(run: &Run, trace: &SolutionTrace) -> Result<(), CliError> {
    let mut columns = vec!["t".to_string(), "dt".into(), "picard_iterations".into(), "mass".into(), "outflow".into(), "max_u".into()];
    columns.extend(trace.alphas.iter().map(|a| format!("energy_alpha_{a}")));
    let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
    let count = trace.mass.len();
    let cadence = run.cfg.output.cadence;
    let rows = (0..count).filter(|k| k % cadence == 0 || *k + 1 == count).map(|k| {
        let (dt, it) = match k {
            0 => (0.0, 0),
            _ => (trace.steps[k - 1].dt, trace.steps[k - 1].iterations),
        };
        let mut row = vec![fmt_f64(trace.mass.times[k]), fmt_f64(dt), it.to_string()];
        row.extend([trace.mass.values[k], trace.outflow.values[k], trace.max_u.values[k]].map(fmt_f64));
        row.extend(trace.energies.iter().map(|e| fmt_f64(e.values[k])));
        row
    });
    run.out.write_csv("trace.csv", &cols, rows)?;
    Ok(())
}

#[derive(Serialize)]
struct MassSummary {
    worst_relative_defect: f64,
    tolerance: f64,
    passes: bool,
    clamp_events: Vec<porebound_core::solver::ClampEvent>,
}

#[derive(Serialize)]
struct SolveReport {
    t_final: f64,
    steps: usize,
    snapshots: usize,
    flux_antisymmetric: bool,
    mass_balance: MassSummary,
    /// One entry per recorded exponent; empty without pure outflow and no gravity.
    monotonicity: Vec<MonotonicityReport>,
    monotonicity_skipped: Option<String>,
}

pub fn cmd_solve(run: &Run) -> CmdResult {
    let t_final = run.final_time()?;
    let sc = run.cfg.scenario(&run.base_dir, t_final)?;
    let trace = run.solve(&sc, &[])?;
    write_trace(run, &trace)?;
    let mass = mass_balance_report(&trace, &sc)?;
    run.out.write_csv(
        "mass.csv",
        &["t", "residual", "defect"],
        mass.residual
            .times
            .iter()
            .zip(&mass.residual.values)
            .zip(&mass.defect.values)
            .map(|((t, r), d)| vec![fmt_f64(*t), fmt_f64(*r), fmt_f64(*d)]),
    )?;
    run.out.write_with("u_final.csv", |buf| write_field_csv(trace.final_u(), buf).map_err(std::io::Error::other))?;

    let mut monotonicity = Vec::new();
    let mut skipped = None;
    for &a in &trace.alphas {
        match monotonicity_check(&trace, &sc, a) {
            Ok(m) => monotonicity.push(m),
            Err(e) => {
                skipped = Some(e.to_string());
                break;
            }
        }
    }
    let report = SolveReport {
        t_final,
        steps: trace.steps.len(),
        snapshots: trace.snapshots.len(),
        flux_antisymmetric: trace.flux_antisymmetric,
        mass_balance: MassSummary {
            worst_relative_defect: mass.worst_relative_defect,
            tolerance: mass.tolerance,
            passes: mass.passes(),
            clamp_events: mass.clamp_events.clone(),
        },
        monotonicity,
        monotonicity_skipped: skipped,
    };
    run.out.write_json("report.json", &report)?;
    println!(
        "solved to T = {} in {} steps; worst mass defect {:e}",
        fmt_f64(t_final),
        report.steps,
        report.mass_balance.worst_relative_defect
    );
    Ok(())
}

#[derive(Serialize)]
struct BoundsFile<'a> {
    t_final: f64,
    constants: &'a EmbeddingConstants,
    report: &'a BoundReport,
    optimize_candidates: &'a [OptimizeCandidate],
}

fn write_curve(run: &Run, rep: &BoundReport) -> Result<(), CliError> {
    let c = &rep.curve;
    run.out.write_csv(
        "bounds.csv",
        &["t", "ln_v", "budget_fraction"],
        c.ln_v.times.iter().zip(&c.ln_v.values).map(|(t, v)| vec![fmt_f64(*t), fmt_f64(*v), fmt_f64(c.budget_fraction(*t))]),
    )?;
    Ok(())
}

pub fn cmd_bounds(run: &Run) -> CmdResult {
    let t_final = run.final_time()?;
    let sc = run.cfg.scenario(&run.base_dir, t_final)?;
    let (consts, rep, cands) = run.bounds(&sc)?;
    run.out.write_json(
        "report.json",
        &BoundsFile { t_final, constants: &consts, report: &rep, optimize_candidates: &cands },
    )?;
    write_curve(run, &rep)?;
    println!(
        "alpha = {}, r* = {}, blow-up time = {:e}, ln L-infinity bound = {}",
        rep.book.alpha,
        rep.book.r_star,
        rep.curve.t_threshold,
        rep.ln_linf()
    );
    for w in &rep.integrals.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

pub fn cmd_verify(run: &Run) -> CmdResult {
    let t_final = run.final_time()?;
    let sc = run.cfg.scenario(&run.base_dir, t_final)?;
    let (consts, rep, cands) = run.bounds(&sc)?;
    let trace = run.solve(&sc, &[rep.book.alpha])?;
    let v = verify_solution_against_bounds(&trace, &rep)?;
    write_trace(run, &trace)?;
    write_curve(run, &rep)?;
    run.out.write_csv(
        "margins.csv",
        &["t", "energy", "ln_bound", "log_margin"],
        v.energy_checks
            .iter()
            .map(|c| vec![fmt_f64(c.t), fmt_f64(c.energy), fmt_f64(c.ln_bound), fmt_f64(c.log_margin)]),
    )?;
    #[derive(Serialize)]
    struct VerifyFile<'a> {
        t_final: f64,
        constants: &'a EmbeddingConstants,
        verification: &'a porebound_core::bounds::VerificationReport,
        report: &'a BoundReport,
        optimize_candidates: &'a [OptimizeCandidate],
    }
    run.out.write_json(
        "report.json",
        &VerifyFile { t_final, constants: &consts, verification: &v, report: &rep, optimize_candidates: &cands },
    )?;
    println!(
        "{} energy checks (worst log margin {:e}), max u = {:e} against ln bound {}, certified = {}",
        v.energy_checks.len(),
        v.worst_energy_log_margin,
        v.max_u,
        v.ln_linf_bound,
        v.linf_certified
    );
    if v.pass {
        Ok(())
    } else {
        Err(CliError::Verification(v.audit.join("; ")))
    }
}

pub fn cmd_check_inequalities(run: &Run, sabotage: Option<f64>) -> CmdResult {
    let cfg = &run.cfg;
    let h = &cfg.harness;
    let grid = cfg.harness_grid()?;
    let family = cfg.family(h.seed);
    let params = match cfg.harness_params()? {
        Some(p) => p,
        None => default_parameter_sets(grid.dim())?,
    };
    let phi = cfg.harness_field(&grid, &h.phi, "harness.phi", &run.base_dir)?;
    let w = cfg.harness_field(&grid, &h.w, "harness.w", &run.base_dir)?;
    let factor = sabotage.or(h.sabotage).unwrap_or(1.0);
    let constants = match cfg.constants.source.as_str() {
        "calibrated" => SuiteConstants::Calibrated {
            family: cfg.family(h.calibration_seed.unwrap_or(h.seed.wrapping_add(1))),
            scale: factor * cfg.constants.safety_factor / DEFAULT_SAFETY_FACTOR,
        },
        _ => SuiteConstants::Fixed(cfg.user_constants()?.scaled(factor)),
    };
    let report = run_suite(&grid, &family, &params, &phi, &w, &constants)?;
    let kind = |k| serde_json::to_value(k).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
    run.out.write_csv(
        "margins.csv",
        &["check", "function_id", "param_id", "lhs", "rhs", "margin", "ln_lhs", "ln_rhs", "pass"],
        report.records.iter().map(|r| {
            vec![
                kind(r.check),
                r.function_id.to_string(),
                r.param_id.to_string(),
                fmt_f64(r.lhs),
                fmt_f64(r.rhs),
                fmt_f64(r.margin),
                fmt_f64(r.ln_lhs),
                fmt_f64(r.ln_rhs),
                r.pass.to_string(),
            ]
        }),
    )?;
    run.out.write_json("report.json", &report)?;
    println!(
        "{} records over {} parameter sets, {} failures, worst log margin {:e}",
        report.records.len(),
        report.params.len(),
        report.failures,
        report.worst_log_margin
    );
    if report.all_pass() {
        Ok(())
    } else {
        Err(CliError::Verification(format!("{} of {} checks failed. {}", report.failures, report.records.len(), report.interpretation)))
    }
}

pub fn cmd_calibrate(run: &Run) -> CmdResult {
    let cfg = &run.cfg;
    let grid = cfg.grid()?;
    let a = porebound_core::preset_law(&cfg.law_preset()?, &grid, Some(&run.base_dir))?.degeneracy();
    let p = cfg.harness.calibrate_p.unwrap_or(2.0 - a);
    let r1 = match cfg.harness.calibrate_r1.or(cfg.bounds.r1) {
        Some(r1) => r1,
        None => build_exponents(&ExponentInputs::new(grid.dim(), a, cfg.lambda()?))?.r1,
    };
    let c = run.calibrated(r1, p)?;
    run.out.write_json("constants.json", &c)?;
    let vals: Vec<String> = c.as_array().iter().map(|v| format!("{v:.6e}")).collect();
    println!("c1..c7 = [{}] at p = {p}, r1 = {r1}", vals.join(", "));
    Ok(())
}

pub struct GasArgs {
    pub n: usize,
    pub r1: Option<f64>,
    pub r: f64,
    pub alpha: f64,
    pub alpha0: f64,
    pub kappa_tilde: f64,
    pub output: Option<PathBuf>,
}

pub fn cmd_gas_example(args: &GasArgs) -> CmdResult {
    if args.n != 2 && args.n != 3 {
        return Err(CliError::Config(format!("the ideal-gas example needs n = 2 or 3, got {}", args.n)));
    }
    let reference = GasInputs::reference(args.n);
    let inputs = GasInputs::ideal(args.n, args.r1.unwrap_or(reference.r1), args.r, args.alpha, args.alpha0, args.kappa_tilde);
    let table = example_gas_tables(&inputs)?;
    println!(
        "ideal gas, n = {}, r1 = {}, r = {}, alpha = {}, alpha0 = {}, kappa_tilde = {}",
        inputs.n, inputs.r1, inputs.r, inputs.alpha, inputs.alpha0, inputs.kappa_tilde
    );
    println!("{:<14} {:>24} {:>24} {:>10}", "quantity", "closed form", "generic", "discrep.");
    for r in &table.rows {
        let flag = if r.flagged { "  MISMATCH" } else { "" };
        println!("{:<14} {:>24.16e} {:>24.16e} {:>10.2e}{flag}", r.name, r.closed_form, r.generic, r.discrepancy);
    }
    println!(
        "nu_tilde = {:.16e}; printed bound {:.16e} ({}); corrected bound {:.16e} ({})",
        table.nu_tilde,
        table.nu_bound_printed,
        if table.printed_bound_holds { "holds" } else { "violated" },
        table.nu_bound_corrected,
        if table.corrected_bound_holds { "holds" } else { "violated" },
    );
    if let Some(dir) = &args.output {
        let canonical = serde_json::to_string(&inputs).map_err(|e| CliError::Config(e.to_string()))?;
        let out = OutputDir::create(dir, Stamp::new(&canonical, None))?;
        out.write_csv(
            "gas.csv",
            &["quantity", "closed_form", "generic", "discrepancy", "flagged"],
            table.rows.iter().map(|r| {
                vec![r.name.to_string(), fmt_f64(r.closed_form), fmt_f64(r.generic), fmt_f64(r.discrepancy), r.flagged.to_string()]
            }),
        )?;
        out.write_json("gas.json", &table)?;
    }
    if table.all_agree() {
        Ok(())
    } else {
        Err(CliError::Verification("closed forms and the generic pipeline disagree".into()))
    }
}
