//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines always reach the output.
//! The process fails when a criterion fails, except those listed in
//! `KNOWN_FAILURES`, which are reported as FAIL but do not stop the run.

mod common;

use porebound_core::bounds::{
    alpha_bound_curve, bound_report, build_exponents, example_gas_tables, genn_bound, moser_products,
    verify_solution_against_bounds, BoundOptions, ExponentInputs, GasInputs, ProofConstants, GOLDEN_TOL,
};
use porebound_core::constitutive::{compute_weights, ForchheimerLaw, PointLaw};
use porebound_core::grid::{BoundaryField, Grid, SpatialField, TimeSeries};
use porebound_core::harness::{
    default_parameter_sets, run_suite, EmbeddingConstants, SuiteConstants, TestFunctionFamily, PASS_SLACK,
};
use porebound_core::logspace::LogScalar;
use porebound_core::solver::{
    mass_balance_report, monotonicity_check, solve, Scenario, SolverConfig, ZSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};

/// Criteria that are implemented faithfully but cannot pass.
/// 8: the printed closed-form upper bound on nu_tilde is smaller than the product itself.
const KNOWN_FAILURES: [u32; 1] = [8];

const SANDWICH_SLACK: f64 = 1e-8;
const SANDWICH_SAMPLES: usize = 10_000;
const SANDWICH_TIME: Duration = Duration::from_secs(5);
const ROOT_RESIDUAL: f64 = 1e-14;
const QUADRATIC_TOL: f64 = 1e-12;
const SUITE_TIME: Duration = Duration::from_secs(120);
const SUITE_FUNCTIONS: usize = 200;
const SUITE_CELLS: usize = 64;
const SAFETY_FACTOR: f64 = 2.0;
const DRIFT_TOL: f64 = 1e-12;
const MASS_TOL: f64 = 1e-10;
const MONOTONE_SLACK: f64 = 1e-10;
const ODE_TOL: f64 = 0.01;
const PRODUCT_STABILITY: f64 = 1e-12;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn random_law(rng: &mut ChaCha8Rng, grid: Grid) -> ForchheimerLaw {
    let n = rng.random_range(1..=4);
    let mut exps = vec![0.0];
    for _ in 0..n {
        let last = *exps.last().unwrap();
        exps.push(last + rng.random_range(0.05..1.0));
    }
    let fields = (0..=n)
        .map(|i| {
            // Interior coefficients may vanish; the first and last may not.
            let zero = i > 0 && i < n && rng.random_bool(0.3);
            let vals: Vec<f64> = (0..grid.cell_count())
                .map(|_| if zero { 0.0 } else { 10f64.powf(rng.random_range(-2.0..1.0)) })
                .collect();
            SpatialField::new(grid, vals, format!("a{i}")).unwrap()
        })
        .collect();
    ForchheimerLaw::new(exps, fields).unwrap()
}

/// Seeded `(cell, xi)` samples over five random laws.
fn law_samples() -> Vec<(ForchheimerLaw, Vec<(usize, f64)>)> {
    let grid = Grid::unit(2, 16).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    (0..5)
        .map(|_| {
            let law = random_law(&mut rng, grid);
            let pts = (0..SANDWICH_SAMPLES / 5)
                .map(|_| (rng.random_range(0..grid.cell_count()), 10f64.powf(rng.random_range(-8.0..8.0))))
                .collect();
            (law, pts)
        })
        .collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = f64::INFINITY;
    let mut count = 0;
    for (law, pts) in law_samples() {
        let a = law.degeneracy();
        let w = compute_weights(&law).unwrap();
        let an = law.leading_coefficient();
        for &(c, xi) in &pts {
            let k = law.eval_k(c, xi).unwrap();
            let (w1, w2, a_n) = (w.w1.get(c), w.w2.get(c), an.get(c));
            let x_norm = k * xi;
            let dot = k * xi * xi;
            let upper_xy = w2 * xi.powf(1.0 - a);
            let upper_sq = w2 * xi.powf(2.0 - a);
            let lower_sq = w1 * xi.powf(2.0 - a) - a_n / 2.0;
            let margins = [
                (upper_xy - x_norm) / upper_xy,
                (upper_sq - dot) / upper_sq,
                (dot - lower_sq) / dot.max(lower_sq.abs()).max(f64::MIN_POSITIVE),
            ];
            worst = margins.iter().copied().fold(worst, f64::min);
            count += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst >= -SANDWICH_SLACK && elapsed < SANDWICH_TIME && count == SANDWICH_SAMPLES,
        format!("{count} samples, worst relative margin {worst:.3e} (slack {SANDWICH_SLACK:e}), {elapsed:.2?}"),
    )
}

/// Positive root of `a1 s^2 + a0 s - xi = 0` in cancellation-free form.
fn quadratic_root(a0: f64, a1: f64, xi: f64) -> f64 {
    2.0 * xi / (a0 + (a0 * a0 + 4.0 * a1 * xi).sqrt())
}

fn criterion_2() -> Outcome {
    let mut worst_res: f64 = 0.0;
    for (law, pts) in law_samples() {
        for &(c, xi) in &pts {
            let p = law.at(c);
            let s = p.solve_s(xi).unwrap();
            worst_res = worst_res.max((s * p.g(s) - xi).abs() / (1.0 + xi));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_quad: f64 = 0.0;
    for _ in 0..SANDWICH_SAMPLES {
        let coefs = [10f64.powf(rng.random_range(-2.0..1.0)), 10f64.powf(rng.random_range(-2.0..1.0))];
        let xi = 10f64.powf(rng.random_range(-8.0..8.0));
        let p = PointLaw::new(&[0.0, 1.0], &coefs).unwrap();
        let want = quadratic_root(coefs[0], coefs[1], xi);
        worst_quad = worst_quad.max((p.solve_s(xi).unwrap() - want).abs() / want);
    }
    outcome(
        worst_res <= ROOT_RESIDUAL && worst_quad <= QUADRATIC_TOL,
        format!("worst |s g - xi|/(1+xi) {worst_res:.3e}, worst two-term deviation {worst_quad:.3e}"),
    )
}

fn criterion_3() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    for n in [2, 3] {
        let t = example_gas_tables(&GasInputs::reference(n)).unwrap();
        let get = |name: &str| t.row(name).unwrap().generic;
        let golden = [
            ("a", 0.5),
            ("r_star", 0.25),
            ("r_tilde", 3.0),
            ("theta", 0.84),
            ("theta_tilde", 0.92),
            ("mu1_tilde", 37.5),
            ("mu_max", 37.5),
            ("kappa", 1.125),
        ];
        for (name, want) in golden {
            if (get(name) - want).abs() > GOLDEN_TOL * want.max(1.0) {
                pass = false;
                notes.push(format!("n={n} {name} = {} (want {want})", get(name)));
            }
        }
        let worst = t.rows.iter().map(|r| r.discrepancy).fold(0.0, f64::max);
        pass &= t.all_agree();
        notes.push(format!("n={n}: {} rows, worst discrepancy {worst:.2e}", t.rows.len()));
    }
    outcome(pass, notes.join("; "))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let grid = Grid::unit(2, SUITE_CELLS).unwrap();
    let phi = SpatialField::from_fn(grid, "phi", |x| 1.0 + 0.5 * x[0] * x[1]).unwrap();
    let w = SpatialField::from_fn(grid, "w", |x| 1.5 - 0.5 * x[1]).unwrap();
    let checked = TestFunctionFamily::with_count(SUITE_FUNCTIONS, 1);
    let calibration = TestFunctionFamily::with_count(SUITE_FUNCTIONS, 2);
    let params = default_parameter_sets(2).unwrap();
    let rep = run_suite(
        &grid,
        &checked,
        &params,
        &phi,
        &w,
        &SuiteConstants::Calibrated { family: calibration, scale: SAFETY_FACTOR },
    )
    .unwrap();
    let elapsed = start.elapsed();
    outcome(
        rep.all_pass() && params.len() >= 10 && elapsed < SUITE_TIME,
        format!(
            "{} records over {} parameter sets, {} failures, worst log margin {:.3e} (slack {PASS_SLACK:e}), {elapsed:.1?}",
            rep.records.len(),
            params.len(),
            rep.failures,
            rep.worst_log_margin
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;

    let sc = Scenario::reference(12, 0.7, 0.1).unwrap();
    let sc = sc.clone().with_initial(SpatialField::constant(sc.grid, 1.0, "u0")).unwrap();
    let sc = Scenario { psi: BoundaryField::constant(sc.grid, 0.0), ..sc };
    let config = SolverConfig { dt_initial: 1e-3, dt_max: 1e-3, ..Default::default() };
    let tr = solve(&sc, &config).unwrap();
    let drift = tr.final_u().values().iter().map(|u| (u - 1.0).abs()).fold(0.0, f64::max);
    pass &= drift <= DRIFT_TOL && tr.steps.len() >= 100;
    notes.push(format!("constant drift {drift:.1e} over {} steps", tr.steps.len()));

    let grid = Grid::unit(2, 12).unwrap();
    let base = Scenario::reference(12, 0.0, 0.02).unwrap();
    let times: Vec<f64> = (0..=20).map(|k| 0.001 * k as f64).collect();
    let faces = BoundaryField::constant(grid, 0.0).samples()[0].len();
    let samples = times
        .iter()
        .map(|t| (0..faces).map(|f| 0.8 * ((f as f64) * 0.37 + 40.0 * t).sin()).collect())
        .collect();
    let mixed = Scenario::new(
        base.law.clone(),
        base.phi.clone(),
        0.5,
        ZSpec::new(1.3, [0.3, 1.0, 0.0]).unwrap(),
        BoundaryField::sampled(grid, times, samples).unwrap(),
        base.u0.clone(),
        0.02,
        None,
    )
    .unwrap();
    let tr = solve(&mixed, &SolverConfig { dt_initial: 1e-4, dt_max: 1e-3, ..Default::default() }).unwrap();
    let mb = mass_balance_report(&tr, &mixed).unwrap();
    pass &= mb.worst_relative_defect <= MASS_TOL && mb.clamp_events.is_empty();
    notes.push(format!(
        "mass defect {:.1e} over {} steps, {} clamp events",
        mb.worst_relative_defect,
        tr.steps.len(),
        mb.clamp_events.len()
    ));

    let mut worst_mono = f64::NEG_INFINITY;
    for psi in [0.0, 1.0] {
        let sc = Scenario::reference(16, psi, 0.02).unwrap();
        let tr = solve(&sc, &SolverConfig { dt_initial: 1e-4, dt_max: 2e-3, alphas: vec![2.0, 40.0], ..Default::default() })
            .unwrap();
        for alpha in [2.0, 40.0] {
            worst_mono = worst_mono.max(monotonicity_check(&tr, &sc, alpha).unwrap().worst_violation);
        }
    }
    pass &= worst_mono <= MONOTONE_SLACK;
    notes.push(format!("worst energy increase {worst_mono:.1e}"));

    let t = 0.2;
    let e32 = common::mms_error(32, t);
    let e128 = common::mms_error(128, t);
    let order = (e32 / e128).log2() / 2.0;
    pass &= order >= 1.0;
    notes.push(format!("manufactured order {order:.3}"));
    outcome(pass, notes.join("; "))
}

/// Three scenarios for the certification run, built for final time `t`.
fn certification_scenarios(t: f64) -> Vec<(&'static str, Scenario)> {
    let reference = Scenario::reference(12, 0.5, t).unwrap();
    let grid = reference.grid;

    let closed = Scenario::reference(12, 0.0, t).unwrap();
    let closed = closed
        .with_initial(SpatialField::from_fn(grid, "u0", |x| 2.0 + (6.0 * x[0]).sin() * (4.0 * x[1]).cos()).unwrap())
        .unwrap();

    let a0 = SpatialField::from_fn(grid, "a0", |x| 1.0 + 0.5 * x[0]).unwrap();
    let a1 = SpatialField::from_fn(grid, "a1", |x| 0.5 + x[1]).unwrap();
    let law = ForchheimerLaw::new(vec![0.0, 1.0], vec![a0, a1]).unwrap();
    let phi = SpatialField::from_fn(grid, "phi", |x| 0.6 + 0.4 * x[0]).unwrap();
    let hetero = Scenario::new(
        law,
        phi,
        0.5,
        ZSpec::new(0.3, [0.0, 1.0, 0.0]).unwrap(),
        BoundaryField::constant(grid, -0.1),
        reference.u0.clone(),
        t,
        None,
    )
    .unwrap();
    vec![("reference outflow", reference), ("no flux", closed), ("heterogeneous inflow with gravity", hetero)]
}

fn criterion_6() -> Outcome {
    let consts = EmbeddingConstants::user_supplied([1.0; 7]).unwrap();
    let opts = BoundOptions::small_r();
    let probes = certification_scenarios(1.0);
    let mut notes = Vec::new();
    let mut pass = probes.len() >= 3;
    for (i, (name, probe)) in probes.iter().enumerate() {
        let t_thr = match bound_report(probe, &consts, &opts) {
            Ok(r) => r.curve.t_threshold,
            Err(e) => panic!("{name}: {e:?}"),
        };
        let t = 0.5 * t_thr;
        let sc = certification_scenarios(t).swap_remove(i).1;
        let report = bound_report(&sc, &consts, &opts).unwrap();
        let config = SolverConfig {
            dt_initial: t / 16.0,
            dt_min: t * 1e-8,
            dt_max: t / 16.0,
            alphas: vec![report.book.beta1],
            ..Default::default()
        };
        let trace = solve(&sc, &config).unwrap();
        let v = verify_solution_against_bounds(&trace, &report).unwrap();
        pass &= v.pass && v.skipped == 0;
        notes.push(format!(
            "{name}: T = {t:.3e}, {} energy checks, worst ln margin {:.3e}, L-inf ln margin {:.3e}",
            v.energy_checks.len(),
            v.worst_energy_log_margin,
            v.linf_log_margin
        ));
    }
    outcome(pass, notes.join("; "))
}

fn stub_proof(z_star: f64) -> ProofConstants {
    let one = LogScalar::ONE;
    ProofConstants {
        c_z: 0.0,
        embedding: [1.0; 7],
        c0: 1.0,
        big_c1: one,
        big_c2: one,
        eps2: 1.0,
        eps3: 1.0,
        d1_theta: one,
        d2_theta: one,
        d1_theta_tilde: one,
        d2_theta_tilde: one,
        g: [one; 4],
        phi: [one; 4],
        z1: one,
        z2: one,
        z3: one,
        z4: one,
        z_star: LogScalar::new(z_star),
        c8: one,
        c9: one,
        c10: one,
        c11: one,
        chat: None,
    }
}

/// Classical RK4 on `V' = 3 Z* M(t) V^{1 + mu/alpha}`, written independently of the closed form.
fn rk4(z: f64, mu: f64, alpha: f64, v0: f64, m: &TimeSeries, t_end: f64, steps: usize) -> f64 {
    let f = |t: f64, v: f64| 3.0 * z * m.interpolate(t) * v.powf(1.0 + mu / alpha);
    let h = t_end / steps as f64;
    let mut v = v0;
    for i in 0..steps {
        let t = i as f64 * h;
        let k1 = f(t, v);
        let k2 = f(t + h / 2.0, v + h / 2.0 * k1);
        let k3 = f(t + h / 2.0, v + h / 2.0 * k2);
        let k4 = f(t + h, v + h * k3);
        v += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    v
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst: f64 = 0.0;
    let mut tuples = 0;
    while tuples < 10 {
        let n = rng.random_range(2..=3);
        let a = rng.random_range(0.2..0.8);
        let lambda = rng.random_range(0.2..1.5);
        let Ok(base) = build_exponents(&ExponentInputs::new(n, a, lambda)) else { continue };
        let alpha = base.alpha * rng.random_range(1.0..3.0);
        let Ok(book) = base.with_alpha(alpha) else { continue };
        let z = 10f64.powf(rng.random_range(0.0..3.0));
        let v0 = rng.random_range(1.0..3.0);
        let (m1, slope) = (rng.random_range(1.0..4.0), rng.random_range(0.0..3.0));
        let guess = book.alpha / (3.0 * book.mu_max * z * m1);
        let m = TimeSeries {
            times: (0..=50).map(|i| guess * i as f64 / 50.0).collect(),
            values: (0..=50).map(|i| m1 + slope * i as f64 / 50.0).collect(),
        };
        let curve = alpha_bound_curve(&book, &stub_proof(z), LogScalar::new(v0), &m, 1.0, None).unwrap();
        let t = 0.9 * curve.t_threshold;
        let ode = rk4(z, book.mu_max, book.alpha, v0, &m, t, 20_000);
        let closed = curve.v_at(t);
        worst = worst.max((ode - closed).abs() / closed);
        tuples += 1;
    }
    outcome(worst <= ODE_TOL, format!("{tuples} tuples, worst relative deviation {worst:.3e} (tolerance {ODE_TOL})"))
}

fn criterion_8() -> Outcome {
    let mut notes = Vec::new();

    let mut worst_shift: f64 = 0.0;
    let books = [
        ExponentInputs {
            r1: Some(2.0 / 3.0),
            r: Some(1.0),
            alpha0: Some(40.0),
            kappa_tilde: Some(1.03),
            ..ExponentInputs::new(2, 0.5, 0.5)
        },
        ExponentInputs::new(2, 0.5, 0.5),
        ExponentInputs::new(3, 2.0 / 3.0, 0.4),
        ExponentInputs::new(2, 0.3, 1.2),
    ];
    for inputs in &books {
        let book = build_exponents(inputs).unwrap();
        let a = moser_products(&book, 1e-14).unwrap().moser.unwrap();
        let b = moser_products(&book, 1e-16).unwrap().moser.unwrap();
        worst_shift = worst_shift
            .max(((a.mu_tilde - b.mu_tilde) / b.mu_tilde).abs())
            .max(((a.nu_tilde - b.nu_tilde) / b.nu_tilde).abs());
    }
    let stable = worst_shift < PRODUCT_STABILITY;
    notes.push(format!("truncation 1e-14 -> 1e-16 shift {worst_shift:.2e} [{}]", verdict(stable)));

    let mut printed_ok = true;
    let mut corrected_ok = true;
    for n in [2, 3] {
        let t = example_gas_tables(&GasInputs::reference(n)).unwrap();
        printed_ok &= t.printed_bound_holds;
        corrected_ok &= t.corrected_bound_holds;
        notes.push(format!(
            "n={n}: nu_tilde {:.15} vs printed bound {:.15}, corrected bound {:.15}",
            t.nu_tilde, t.nu_bound_printed, t.nu_bound_corrected
        ));
    }
    notes.push(format!("nu_tilde <= printed bound [{}]", verdict(printed_ok)));
    notes.push(format!("nu_tilde <= corrected bound [{}]", verdict(corrected_ok)));

    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let mut verified = 0;
    let families = 20;
    for _ in 0..families {
        let horizon: i32 = 120;
        let q: f64 = rng.random_range(1.3..3.0);
        let k0 = rng.random_range(1.0..4.0);
        let shrink = rng.random_range(0.5..1.0);
        let grow = rng.random_range(0.0..0.5);
        let ln_a = rng.random_range(0.0..5.0);
        let y0 = rng.random_range(0.0..10.0);
        let k: Vec<f64> = (0..horizon).map(|j| k0 * q.powi(j)).collect();
        let r: Vec<f64> = (0..horizon).map(|j| k[j as usize] * (1.0 - (1.0 - shrink) / q.powi(j))).collect();
        let s: Vec<f64> = (0..horizon).map(|j| k[j as usize] * (1.0 + grow / q.powi(j))).collect();
        let w: Vec<f64> = (0..horizon).map(|j| (j + 1) as f64).collect();
        if genn_bound(LogScalar::from_ln(ln_a), y0, &k, &r, &s, &w).unwrap().verified {
            verified += 1;
        }
    }
    notes.push(format!("sequence bound verified on {verified}/{families} families"));

    outcome(stable && printed_ok && verified == families, notes.join("; "))
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 8] = [
        (1, "constitutive sandwich", criterion_1),
        (2, "root solver", criterion_2),
        (3, "golden exponents", criterion_3),
        (4, "inequality suite", criterion_4),
        (5, "solver properties", criterion_5),
        (6, "bound certification", criterion_6),
        (7, "ODE oracle", criterion_7),
        (8, "iteration machinery", criterion_8),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut unexpected = Vec::new();
    for (id, name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str()) || f == &id.to_string()) {
            continue;
        }
        let o = run();
        let known = KNOWN_FAILURES.contains(&id);
        let tag = match (o.pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!("criterion {id} [{name}]: {tag}: {}", o.detail);
        if !o.pass && !known {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
