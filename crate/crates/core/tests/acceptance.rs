//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.

mod common;

use std::time::{Duration, Instant};

use bilinear_oscillator::algebra::MasterEqCoefficients;
use bilinear_oscillator::catalog::{ClassParams, EquationClass, canonical, cp_decompose, CP_RECONSTRUCTION_TOL};
use bilinear_oscillator::cli::presets::preset_config;
use bilinear_oscillator::cli::{Criterion, ThresholdSpec, find_threshold, parse_config};
use bilinear_oscillator::evolution::{
    GaussianParams, evolve_closed_form, evolve_matrix_pipeline, evolve_ode, min_nu_scan, rates, second_moments,
};
use bilinear_oscillator::generators::{assemble_k, symplectic_check};
use bilinear_oscillator::propagator::{
    bch_coefficients, matrix_exp, propagator_by_exponential, propagator_closed_form, propagator_from_bch,
};
use bilinear_oscillator::stationary::{Verdict, dekker_vs_generic, gamma_vector, stationary_params};
use rand::RngExt;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

const DRAW_SEED: u64 = 20240611;

fn draws(n: usize) -> Vec<(MasterEqCoefficients, GaussianParams)> {
    let mut rng = common::rng(DRAW_SEED);
    (0..n)
        .map(|_| (common::stable_coefficients(&mut rng), common::initial_state(&mut rng)))
        .collect()
}

fn route_equivalence() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for (c, init) in draws(20) {
        let times: Vec<f64> = (0..50).map(|k| 10.0 * k as f64 / 49.0).collect();
        let mut ode = init;
        let mut t_prev = 0.0;
        for &t in &times {
            if t > t_prev {
                ode = match evolve_ode(&c, &ode, t - t_prev, 0.01) {
                    Ok(p) => p,
                    Err(e) => return outcome(false, format!("ode failed for {c:?}: {e}")),
                };
                t_prev = t;
            }
            let (cf, mp) = match (evolve_closed_form(&c, &init, t), evolve_matrix_pipeline(&c, &init, t)) {
                (Ok(a), Ok(b)) => (a, b),
                (a, b) => return outcome(false, format!("route failed at t = {t}: {a:?} {b:?}")),
            };
            worst = worst.max(cf.max_rel_diff(&mp)).max(cf.max_rel_diff(&ode));
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-6 && elapsed < Duration::from_secs(10),
        format!("max relative difference {worst:.2e}, {:.2} s", elapsed.as_secs_f64()),
    )
}

fn propagator_equivalence() -> Outcome {
    let mut worst = 0.0f64;
    for (c, _) in draws(20) {
        for t in [0.3, 1.0, 3.0] {
            let reference = match propagator_by_exponential(&c, t) {
                Ok(m) => m,
                Err(e) => return outcome(false, format!("exponential failed: {e}")),
            };
            let closed = propagator_closed_form(&c, t);
            let bch = bch_coefficients(&c, t).map(|b| propagator_from_bch(&b));
            let (Ok(closed), Ok(bch)) = (closed, bch) else {
                return outcome(false, format!("route failed for {c:?} at t = {t}"));
            };
            let scale = 1.0 + reference.max_abs();
            worst = worst.max(closed.max_diff(&reference) / scale).max(bch.max_diff(&reference) / scale);
        }
    }
    outcome(worst <= 1e-10, format!("max entrywise difference {worst:.2e} (relative to 1 + max entry)"))
}

fn symplectic_invariant() -> Outcome {
    let mut worst = 0.0f64;
    for (c, _) in draws(20) {
        for t in [0.3, 1.0, 3.0] {
            match matrix_exp(&(assemble_k(&c, false).matrix * -t)) {
                Ok(s) => worst = worst.max(symplectic_check(&s)),
                Err(e) => return outcome(false, format!("exponential failed: {e}")),
            }
        }
    }
    outcome(worst <= 1e-10, format!("max symplectic residual {worst:.2e}"))
}

fn figure_thresholds() -> Outcome {
    let cases: [(&str, &str, f64, f64, Criterion, f64); 10] = [
        ("fig1-left-solid", "eta2", 0.0, 2.0, Criterion::StationaryNuZero, 0.875),
        ("fig1-right-solid", "eta2", -4.0, 0.0, Criterion::StationaryNuZero, -2.125),
        ("fig2-right-solid", "theta2", -1.0, 0.0, Criterion::CpBoundary, -0.553),
        ("fig2-right-solid", "theta2", 0.0, 1.0, Criterion::CpBoundary, 0.553),
        ("fig3-left-solid", "theta1", 1.0, 1.5, Criterion::StationaryNuZero, 1.106),
        ("fig3-left-solid", "theta1", -1.5, -1.0, Criterion::StationaryNuZero, -1.106),
        ("fig3-right-solid", "theta1", 1.0, 2.0, Criterion::OverdampedBoundary, 1.789),
        ("fig3-right-solid", "theta1", -2.0, -1.0, Criterion::OverdampedBoundary, -1.789),
        ("fig1-left-solid", "eta2", 0.5, 1.5, Criterion::StationaryNuZero, 0.875),
        ("fig1-right-solid", "eta2", -3.0, -1.0, Criterion::StationaryNuZero, -2.125),
    ];
    let mut lines = Vec::new();
    let mut pass = true;
    for (preset, scan, lo, hi, criterion, want) in cases {
        let cfg = parse_config(&preset_config(preset).expect("preset exists")).expect("preset parses");
        let spec = ThresholdSpec { scan: scan.into(), lo, hi, criterion, tolerance: 1e-6 };
        let start = Instant::now();
        let got = find_threshold(&cfg, &spec);
        let elapsed = start.elapsed();
        match got {
            Ok(x) => {
                let ok = (x - want).abs() <= 1e-3 && elapsed < Duration::from_secs(1);
                pass &= ok;
                lines.push(format!("{scan}*={x:.6}"));
            }
            Err(e) => {
                pass = false;
                lines.push(format!("{preset}: {e}"));
            }
        }
    }
    outcome(pass, lines.join(" "))
}

fn stationary_gamma_exactness() -> Outcome {
    let close = |a: [f64; 3], b: [f64; 3]| a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() <= 1e-12 * (1.0 + y.abs()));
    let mut pass = true;
    let mut checked = 0;
    for gamma in [0.3, 1.0, 1.7] {
        for omega0 in [0.6, 1.0, 2.5] {
            for b in [0.5, 0.8, 2.0] {
                let base = ClassParams { gamma: Some(gamma), omega0: Some(omega0), b: Some(b), ..Default::default() };
                let kl = canonical(EquationClass::KL, &base).unwrap();
                pass &= gamma_vector(&kl).is_ok_and(|g| close(g, [2.0 * b, 0.0, 0.0]));
                for theta1 in [-0.7 * omega0, 0.3 * omega0, 1.2 * omega0] {
                    let w = 2.0 * omega0;
                    let cl = canonical(EquationClass::CL, &ClassParams { theta1: Some(theta1), ..base }).unwrap();
                    let want_cl = [2.0 * b * w / (w + theta1), 2.0 * b * theta1 / (w + theta1), 0.0];
                    if let Ok(g) = gamma_vector(&cl) {
                        pass &= close(g, want_cl);
                        checked += 1;
                    }
                    for eta2 in [-1.3, 0.4, 2.2] {
                        let p = ClassParams { theta1: Some(theta1), eta2: Some(eta2), ..base };
                        let hpz = canonical(EquationClass::HPZ, &p).unwrap();
                        let want = [
                            2.0 * b * (w - eta2 / (2.0 * b)) / (w + theta1),
                            2.0 * b * (theta1 + eta2 / (2.0 * b)) / (w + theta1),
                            0.0,
                        ];
                        if let Ok(g) = gamma_vector(&hpz) {
                            pass &= close(g, want);
                            checked += 1;
                        }
                    }
                }
            }
        }
    }
    outcome(pass && checked > 100, format!("{checked} CL/HPZ sets plus 27 KL sets"))
}

fn rate_residuals() -> Outcome {
    let delta = 1e-5;
    let mut worst = 0.0f64;
    let mut rng = common::rng(DRAW_SEED + 6);
    for (c, init) in draws(10) {
        for _ in 0..100 {
            let t = rng.random_range(0.05..10.0);
            let (Ok(p), Ok(a), Ok(b)) = (
                evolve_closed_form(&c, &init, t),
                evolve_closed_form(&c, &init, t + delta),
                evolve_closed_form(&c, &init, t - delta),
            ) else {
                return outcome(false, format!("closed form failed at t = {t}"));
            };
            let fd = [
                (a.mu - b.mu) / (2.0 * delta),
                (a.kappa - b.kappa) / (2.0 * delta),
                (a.mu + a.nu - b.mu - b.nu) / (2.0 * delta),
            ];
            let rhs = rates(&c, p.mu, p.kappa, p.mu + p.nu);
            for k in 0..3 {
                worst = worst.max((fd[k] - rhs[k]).abs() / (1.0 + rhs[k].abs()));
            }
        }
    }
    outcome(worst <= 1e-6, format!("max scaled residual {worst:.2e}"))
}

fn cp_suite() -> Outcome {
    let mut rng = common::rng(DRAW_SEED + 7);
    let (mut witnessed, mut absent, mut worst) = (0, 0, 0.0f64);
    let mut k1_draws = 0;
    while k1_draws < 50 {
        let gamma = rng.random_range(0.3..2.0);
        let theta0 = rng.random_range(0.5..3.0);
        let theta1 = rng.random_range(-0.95..0.95) * theta0;
        let b = rng.random_range(0.5..3.0);
        let p = ClassParams { gamma: Some(gamma), theta0: Some(theta0), b: Some(b), theta1: Some(theta1), ..Default::default() };
        let k1 = canonical(EquationClass::GeneralizedKL1, &p).unwrap();
        // The class is CP on its positivity domain γθ₀/√(θ₀²−θ₁²) ≤ |η₀|.
        if gamma * theta0 / (theta0 * theta0 - theta1 * theta1).sqrt() > 2.0 * gamma * b {
            continue;
        }
        k1_draws += 1;
        let k2 = canonical(EquationClass::GeneralizedKL2, &p).unwrap();
        for c in [k1, k2] {
            if let Ok(Some(w)) = cp_decompose(&c) {
                witnessed += 1;
                worst = worst.max(w.reconstruction_error);
            }
        }
    }
    let classes = [EquationClass::CL, EquationClass::ConjugateCL, EquationClass::HPZ, EquationClass::ConjugateHPZ];
    for class in classes {
        for _ in 0..50 {
            let theta0 = rng.random_range(0.5..3.0);
            let mut p = ClassParams {
                gamma: Some(rng.random_range(0.05..2.0)),
                theta0: Some(theta0),
                b: Some(rng.random_range(0.5..5.0)),
                theta1: Some(rng.random_range(-0.95..0.95) * theta0),
                ..Default::default()
            };
            if matches!(class, EquationClass::HPZ | EquationClass::ConjugateHPZ) {
                p.eta2 = Some(rng.random_range(-3.0..3.0));
            }
            if matches!(cp_decompose(&canonical(class, &p).unwrap()), Ok(None)) {
                absent += 1;
            }
        }
    }
    outcome(
        witnessed == 100 && absent == 200 && worst <= CP_RECONSTRUCTION_TOL,
        format!("witnesses {witnessed}/100 (max reconstruction error {worst:.1e}), absent {absent}/200"),
    )
}

fn cl_early_negativity() -> Outcome {
    let run = |preset: &str| {
        let cfg = parse_config(&preset_config(preset).unwrap()).unwrap();
        let m = min_nu_scan(&cfg.coefficients, &cfg.init.unwrap()).unwrap();
        (m, stationary_params(&cfg.coefficients).nu_st.unwrap())
    };
    let (plus, nu_st_plus) = run("fig2-left-dotted");
    let (minus, _) = run("fig2-left-dot-dashed");
    let first = plus.nu < 0.0 && nu_st_plus > 0.0;
    let second = minus.nu >= -1e-9;
    outcome(
        first && second,
        format!(
            "theta1=0.2: min nu {:.4} at t={:.3}, nu_st {:.4} [{}]; theta1=-0.2: min nu {:.4} at t={:.3} [{}]",
            plus.nu,
            plus.t,
            nu_st_plus,
            if first { "ok" } else { "not reproduced" },
            minus.nu,
            minus.t,
            if second { "ok" } else { "not reproduced" },
        ),
    )
}

fn uncertainty_equivalence() -> Outcome {
    let mut rng = common::rng(DRAW_SEED + 9);
    let mut mismatches = 0;
    for k in 0..200 {
        let nu = if k % 20 == 0 { 0.0 } else { rng.random_range(-2.0..2.0) };
        let p = GaussianParams::new(rng.random_range(0.01..5.0), rng.random_range(-3.0..3.0), nu);
        let product = second_moments(&p).uncertainty_product();
        if (p.nu >= 0.0) != (product >= 0.25 - 1e-12) {
            mismatches += 1;
        }
    }
    outcome(mismatches == 0, format!("{mismatches} mismatches in 200 states"))
}

fn dekker_comparison() -> Outcome {
    let verdicts = |b: f64| {
        let p = ClassParams { gamma: Some(1.0), theta0: Some(2.0), theta1: Some(0.0), b: Some(b), ..Default::default() };
        dekker_vs_generic(&canonical(EquationClass::CL, &p).unwrap())
    };
    let mut pass = true;
    for b in [0.5, 0.6, 1.0, 2.0, 10.0] {
        let v = verdicts(b);
        pass &= v.dekker == Verdict::Fails && v.generic.satisfied();
    }
    for b in [0.05, 0.3, 0.49] {
        let v = verdicts(b);
        pass &= v.dekker == Verdict::Fails && v.generic == Verdict::Fails;
    }
    outcome(pass, "b >= 1/2: Dekker fails, positivity holds; b < 1/2: both fail")
}

type Check = fn() -> Outcome;

fn main() {
    let criteria: [(&str, Check); 10] = [
        ("route equivalence", route_equivalence),
        ("propagator equivalence", propagator_equivalence),
        ("symplectic invariant", symplectic_invariant),
        ("figure thresholds", figure_thresholds),
        ("stationary gamma exactness", stationary_gamma_exactness),
        ("rate equation residuals", rate_residuals),
        ("complete positivity suite", cp_suite),
        ("CL early-time negativity", cl_early_negativity),
        ("uncertainty equivalence", uncertainty_equivalence),
        ("Dekker comparison", dekker_comparison),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let result = check();
        let tag = if result.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {tag} {name}: {}", k + 1, result.detail);
        failed += usize::from(!result.pass);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
