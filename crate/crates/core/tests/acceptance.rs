//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the criteria can share the
//! expensive degeneracy searches and report in a fixed order. Exits non-zero
//! if any criterion fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use cdt_core::dynamics::{
    evolve, evolve_strobed, initial_state_all_left, odd_even_experiment, peak_width,
    scan_imbalance,
};
use cdt_core::effective::{effective_hamiltonian, effective_hamiltonian_oracle, predict_cdt_points};
use cdt_core::floquet::{
    find_degeneracies, floquet_operator, fold_quasienergy, quasienergy_spectrum, DegeneracyPoint,
    DEFAULT_THRESHOLD_PER_OMEGA, DEFAULT_TOL,
};
use cdt_core::model::{build_parity, hamiltonian_at, ModelParams};
use cdt_core::numerics::{eig_unitary, eigh, j0_root};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn template(omega: f64) -> ModelParams {
    ModelParams::new(10, 1.0, 0.0, 0.0, omega).unwrap()
}

/// J₀ from its integral representation (1/π)∫₀^π cos(x sin θ) dθ; the
/// trapezoid rule converges geometrically for this periodic integrand.
fn j0_by_quadrature(x: f64) -> f64 {
    let k = 400;
    let h = PI / k as f64;
    let interior: f64 = (1..k).map(|j| (x * (j as f64 * h).sin()).cos()).sum();
    (interior + 0.5 * (1.0 + 1.0)) * h / PI
}

/// k-th positive zero of J₀ by bisection on the quadrature value inside
/// the bracket (k − 1/4)π ± 0.5.
fn j0_zero_by_bisection(k: usize) -> f64 {
    let centre = (k as f64 - 0.25) * PI;
    let (mut lo, mut hi) = (centre - 0.5, centre + 0.5);
    let flo = j0_by_quadrature(lo);
    assert!(flo * j0_by_quadrature(hi) < 0.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if j0_by_quadrature(mid) * flo > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn criterion_1() -> Outcome {
    let predictions = predict_cdt_points(&template(40.0), 1).map_err(|e| e.to_string())?;
    let root = j0_zero_by_bisection(1);
    let quoted_values = [0.267, 0.344, 0.481];
    let mut detail = Vec::new();
    let mut ok = predictions.len() >= 3;
    for (i, quoted) in quoted_values.iter().enumerate() {
        let Some(p) = predictions.iter().find(|p| p.i == i && p.k == 1) else {
            return Err(format!("no prediction for i = {i}"));
        };
        let oracle = root / (10 - 2 * i - 1) as f64;
        let rounded = (p.g1_over_omega * 1000.0).round() / 1000.0;
        ok &= (p.g1_over_omega - oracle).abs() <= 1e-9
            && (rounded - quoted).abs() < 1e-9
            && p.expected_pairs == i + 1;
        detail.push(format!("{:.6} (quoted {quoted})", p.g1_over_omega));
    }
    check(ok, detail.join(", "))
}

/// Degeneracy nearest `target` within `bracket`, if any.
fn degeneracy_near(omega: f64, bracket: (f64, f64), target: f64) -> Result<DegeneracyPoint, String> {
    let found = find_degeneracies(
        &template(omega),
        bracket,
        DEFAULT_THRESHOLD_PER_OMEGA * omega,
        DEFAULT_TOL,
    )
    .map_err(|e| e.to_string())?;
    found
        .into_iter()
        .min_by(|a, b| {
            (a.g1_over_omega - target)
                .abs()
                .total_cmp(&(b.g1_over_omega - target).abs())
        })
        .ok_or_else(|| format!("no degeneracy in {bracket:?}"))
}

fn criterion_2(refined: &mut Option<[f64; 3]>) -> Outcome {
    let predictions = [9.0, 7.0, 5.0].map(|d| j0_root(1).unwrap() / d);
    let brackets = [(0.25, 0.29), (0.32, 0.37), (0.46, 0.50)];
    let mut found = [0.0; 3];
    let mut ok = true;
    let mut detail = Vec::new();
    let mut third = None;
    for i in 0..3 {
        let d = degeneracy_near(40.0, brackets[i], predictions[i])?;
        ok &= (d.g1_over_omega - predictions[i]).abs() <= 0.002 && d.pair_count == i + 1;
        detail.push(format!("{:.6}/{} pairs", d.g1_over_omega, d.pair_count));
        found[i] = d.g1_over_omega;
        if i == 2 {
            third = Some(d);
        }
    }
    // Third point: a three-state cluster in the middle of the spectrum plus
    // two touching pairs.
    let d = third.unwrap();
    let mut sizes: Vec<(usize, f64)> = d
        .involved_parities
        .iter()
        .zip(&d.cluster_quasienergies)
        .map(|(p, e)| (p.len(), *e))
        .collect();
    sizes.sort_by_key(|s| std::cmp::Reverse(s.0));
    let triple_mid = sizes.first().is_some_and(|(n, e)| *n == 3 && e.abs() < 1e-3);
    let pairs = sizes.iter().filter(|(n, _)| *n == 2).count();
    ok &= triple_mid && pairs == 2 && sizes.len() == 3;
    detail.push(format!(
        "III clusters {:?}",
        sizes.iter().map(|(n, e)| format!("{n}@{e:.4}")).collect::<Vec<_>>()
    ));
    *refined = Some(found);
    check(ok, detail.join(", "))
}

fn criterion_3() -> Outcome {
    let omega = 2.0 * PI;
    let quoted = [2.0079, 2.1330, 2.9862];
    let brackets = [(1.98, 2.03), (2.10, 2.16), (2.95, 3.02)];
    let roots = [6, 5, 5];
    let mut ok = true;
    let mut detail = Vec::new();
    for i in 0..3 {
        let d = degeneracy_near(omega, brackets[i], quoted[i])?;
        let scaled = d.g1_over_omega * (10 - 2 * i - 1) as f64;
        let root = j0_zero_by_bisection(roots[i]);
        ok &= (d.g1_over_omega - quoted[i]).abs() <= 0.01 && (scaled - root).abs() <= 0.05;
        detail.push(format!(
            "{:.5} (x{} = {scaled:.4} vs j0,{} = {root:.4})",
            d.g1_over_omega,
            10 - 2 * i - 1,
            roots[i]
        ));
    }
    check(ok, detail.join(", "))
}

fn dynamics_min(x: f64, t_max: f64) -> Result<f64, String> {
    let p = template(40.0).with_g1_over_omega(x);
    let traj = evolve(
        &initial_state_all_left(&p.basis()),
        &p,
        t_max,
        p.period() / 8.0,
        DEFAULT_TOL,
    )
    .map_err(|e| e.to_string())?;
    Ok(traj.min_s())
}

fn criterion_4(refined: Option<[f64; 3]>) -> Outcome {
    let refined = refined.ok_or("refined points unavailable (criterion 2)")?;
    let (a, b, c) = (
        dynamics_min(refined[0], 500.0)?,
        dynamics_min(refined[1], 500.0)?,
        dynamics_min(refined[2], 500.0)?,
    );
    let off = dynamics_min(0.2625, 2000.0)?;
    let ok = a >= 0.9 && (b - 0.8).abs() <= 0.03 && (c - 0.6).abs() <= 0.05 && off < 0.5;
    check(
        ok,
        format!("min<S>: I {a:.4}, II {b:.4}, III {c:.4}; off-point 0.2625 {off:.4}"),
    )
}

fn criterion_5(refined: Option<[f64; 3]>) -> Outcome {
    let refined = refined.ok_or("refined points unavailable (criterion 2)")?;
    let analytic = [9.0, 7.0, 5.0].map(|d| j0_root(1).unwrap() / d);
    let coarse: Vec<f64> = (5..=60).map(|i| i as f64 / 100.0).collect();
    let mut grid = coarse.clone();
    grid.extend(refined);
    grid.extend(analytic);
    grid.sort_by(f64::total_cmp);
    let scan = scan_imbalance(&template(40.0), &grid, 20000.0, None, DEFAULT_TOL)
        .map_err(|e| e.to_string())?;
    let value = |x: f64| scan.s_avg[grid.iter().position(|g| *g == x).unwrap()];
    let targets = [1.0, 0.9, 0.8];
    let mut ok = true;
    let mut detail = Vec::new();
    for i in 0..3 {
        let s = value(refined[i]);
        ok &= (s - targets[i]).abs() <= 0.05;
        detail.push(format!(
            "<<S>>({:.6}) = {s:.4} [analytic {:.6}: {:.4}]",
            refined[i],
            analytic[i],
            value(analytic[i])
        ));
    }
    let mut worst: (f64, f64) = (0.0, 0.0);
    for &x in &coarse {
        let s = value(x);
        if analytic.iter().all(|a| (x - a).abs() >= 0.02) && s.abs() > worst.1.abs() {
            worst = (x, s);
        }
    }
    ok &= worst.1.abs() < 0.15;
    detail.push(format!("largest |<<S>>| off-point {:.4} at {:.2}", worst.1, worst.0));
    check(ok, detail.join("; "))
}

fn criterion_6() -> Outcome {
    let mut grid: Vec<f64> = (0..=34).map(|i| 0.335 + 0.0005 * i as f64).collect();
    grid.extend((20..=60).map(|i| i as f64 / 100.0));
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let mut widths = Vec::new();
    let mut detail = Vec::new();
    for ratio in [0.0, 1.0 / 288.0, 1.0 / 144.0] {
        let scan = scan_imbalance(&template(40.0), &grid, 20000.0, Some(ratio * 40.0), DEFAULT_TOL)
            .map_err(|e| e.to_string())?;
        let w = peak_width(&grid, &scan.s_avg, 0.3435, 0.01).ok_or("no peak near 0.3435")?;
        let censored = w.left_censored || w.right_censored;
        detail.push(format!(
            "g0/w={ratio:.5}: FWHM {}{:.4} (peak {:.4} at {:.4})",
            if censored { ">=" } else { "" },
            w.width,
            w.height,
            w.location
        ));
        widths.push(w);
    }
    // A censored width is a lower bound, so it can only certify an increase
    // when it is the larger of the two being compared.
    let ok = widths.windows(2).all(|w| {
        let lower_exact = !(w[0].left_censored || w[0].right_censored);
        lower_exact && w[1].width > w[0].width
    });
    check(ok, detail.join("; "))
}

fn criterion_7() -> Outcome {
    let base = template(40.0);
    let r12 = odd_even_experiment(10, 2, &base, 20000.0, DEFAULT_TOL).map_err(|e| e.to_string())?;
    let r11 = odd_even_experiment(10, 1, &base, 20000.0, DEFAULT_TOL).map_err(|e| e.to_string())?;
    let ok = r12.s_min >= 0.78 && r11.s_min < 0.3 && r11.s_avg < 0.3;
    check(
        ok,
        format!(
            "g1/w = {:.6}: N=12 min<S> {:.4} (<<S>> {:.4}); N=11 min<S> {:.4}, <<S>> {:.4}",
            r12.g1_over_omega, r12.s_min, r12.s_avg, r11.s_min, r11.s_avg
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_cd7);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let n = rng.gen_range(1..=20);
        let v = rng.gen_range(0.2..2.0);
        let g0 = rng.gen_range(-1.0..1.0);
        let omega = rng.gen_range(5.0..60.0);
        let x = rng.gen_range(-3.0..=3.0);
        let p = ModelParams::new(n, v, g0, 0.0, omega).unwrap().with_g1_over_omega(x);
        let closed = effective_hamiltonian(&p).map_err(|e| e.to_string())?.matrix;
        let oracle = effective_hamiltonian_oracle(&p, 1024).map_err(|e| e.to_string())?;
        worst = worst.max(closed.entries().max_abs_diff(oracle.entries()));
    }
    check(worst <= 1e-8, format!("max entry deviation {worst:.2e} over 20 sets"))
}

fn quasienergies_at(p: &ModelParams, substeps: usize) -> Vec<f64> {
    let f = floquet_operator(p, substeps).unwrap();
    let mut e: Vec<f64> = eig_unitary(&f)
        .unwrap()
        .values
        .iter()
        .map(|l| fold_quasienergy(-l.arg() / p.period(), p.omega))
        .collect();
    e.sort_by(f64::total_cmp);
    e
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut failures = Vec::new();

    let (mut unitarity, mut commutation, mut block) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..10 {
        let n = rng.gen_range(1..=20);
        let p = ModelParams::new(n, 1.0, rng.gen_range(-1.0..1.0), 0.0, rng.gen_range(2.0..40.0))
            .unwrap()
            .with_g1_over_omega(rng.gen_range(-3.0..3.0));
        let parity = build_parity(&p.basis()).into_entries();
        let f = floquet_operator(&p, 128).unwrap().into_entries();
        unitarity = unitarity.max(f.unitarity_error());
        block = block.max((&(&parity * &f) * &parity).max_abs_diff(&f));
        let h = hamiltonian_at(&p, rng.gen_range(0.0..p.period())).into_entries();
        commutation = commutation.max((&parity * &h).max_abs_diff(&(&h * &parity)));
    }
    if unitarity > 1e-10 || block > 1e-10 {
        failures.push(format!("unitarity {unitarity:.1e}, PFP-F {block:.1e}"));
    }
    if commutation > 1e-12 {
        failures.push(format!("[P,H] {commutation:.1e}"));
    }

    let mut drift: f64 = 0.0;
    for x in [0.267, 0.3435, 0.4812] {
        let p = template(40.0).with_g1_over_omega(x);
        let traj = evolve_strobed(&initial_state_all_left(&p.basis()), &p, 20000.0, DEFAULT_TOL)
            .map_err(|e| e.to_string())?;
        drift = drift.max(traj.norm_drift);
    }
    if drift > 1e-8 {
        failures.push(format!("norm drift {drift:.1e}"));
    }

    let one = ModelParams::new(1, 1.0, 0.2, 0.0, 10.0).unwrap();
    let undriven = quasienergy_spectrum(&one, 1e-9).map_err(|e| e.to_string())?.quasienergies;
    let mut n1: f64 = 0.0;
    for x in [0.3, 1.1, 2.7] {
        let driven = quasienergy_spectrum(&one.with_g1_over_omega(x), 1e-9)
            .map_err(|e| e.to_string())?
            .quasienergies;
        n1 = n1.max(max_diff(&driven, &undriven));
    }
    if n1 > 1e-9 {
        failures.push(format!("N=1 drive dependence {n1:.1e}"));
    }

    let mut zero_mode: f64 = 0.0;
    for n in (2..=20).step_by(2) {
        let p = ModelParams::new(n, 1.0, 0.0, 0.0, 40.0)
            .unwrap()
            .with_g1_over_omega(rng.gen_range(-3.0..3.0));
        let e = effective_hamiltonian(&p).unwrap().eigenvalues().unwrap();
        zero_mode = zero_mode.max(e.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min));
    }
    if zero_mode > 1e-10 {
        failures.push(format!("H_eff zero mode {zero_mode:.1e}"));
    }

    let mut static_dev: f64 = 0.0;
    for (n, g0, omega) in [(4, 0.7, 10.0), (9, -0.4, 2.0 * PI), (10, 0.25, 40.0)] {
        let p = ModelParams::new(n, 1.0, g0, 0.0, omega).unwrap();
        let s = quasienergy_spectrum(&p, 1e-9).map_err(|e| e.to_string())?;
        let mut exact: Vec<f64> = eigh(&hamiltonian_at(&p, 0.0))
            .unwrap()
            .values
            .iter()
            .map(|e| fold_quasienergy(*e, omega))
            .collect();
        exact.sort_by(f64::total_cmp);
        static_dev = static_dev.max(max_diff(&exact, &s.quasienergies));
    }
    if static_dev > 1e-9 {
        failures.push(format!("static oracle {static_dev:.1e}"));
    }

    let p = ModelParams::new(6, 1.0, 0.3, 0.0, 10.0).unwrap().with_g1_over_omega(0.8);
    let e: Vec<Vec<f64>> = [64, 128, 256].iter().map(|&m| quasienergies_at(&p, m)).collect();
    let ratio = max_diff(&e[0], &e[1]) / max_diff(&e[1], &e[2]);
    if !(3.0..=5.0).contains(&ratio) {
        failures.push(format!("doubling ratio {ratio:.3}"));
    }

    let summary = format!(
        "unitarity {unitarity:.1e}, [P,H] {commutation:.1e}, drift {drift:.1e}, N=1 {n1:.1e}, \
         zero mode {zero_mode:.1e}, static {static_dev:.1e}, ratio {ratio:.3}"
    );
    if failures.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}; failing: {}", failures.join(", ")))
    }
}

fn run(label: &str, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f))
        .unwrap_or_else(|_| Err("panicked".to_string()));
    let secs = start.elapsed().as_secs_f64();
    match outcome {
        Ok(detail) => {
            println!("PASS {label}: {detail} [{secs:.1}s]");
            true
        }
        Err(detail) => {
            println!("FAIL {label}: {detail} [{secs:.1}s]");
            false
        }
    }
}

fn main() {
    let mut refined = None;
    let results = [
        run("1 CDT point prediction", criterion_1),
        run("2 degeneracies at omega = 40", || criterion_2(&mut refined)),
        run("3 degeneracies at omega = 2pi", criterion_3),
        run("4 population dynamics", || criterion_4(refined)),
        run("5 magic plateaus", || criterion_5(refined)),
        run("6 self-trapping broadening", criterion_6),
        run("7 odd-even amplification", criterion_7),
        run("8 effective Hamiltonian oracle", criterion_8),
        run("9 property suite", criterion_9),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
