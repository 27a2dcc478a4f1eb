//! Acceptance suite: one pass/fail line per criterion.
//!
//! Run with `cargo test -p jc-entropy --test acceptance -- --nocapture` to see
//! the verdict lines.

use std::f64::consts::LN_2;
use std::time::Instant;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use jc_entropy::densops::von_neumann_entropy;
use jc_entropy::dynamics::{joint_entropy_closed_form, Quench, QuenchConfig, SourceModel};
use jc_entropy::spectrum::{negative_branch_set, omega_ns};
use jc_entropy::sweep::{
    count_extrema, linear_grid, negative_intervals, run_quench_sweep, run_thermal_sweep, thermal_crossovers, write_csv,
    QuenchRow, QuenchSweepSpec, ThermalRow, ThermalSweepSpec,
};
use jc_entropy::thermal::{ThermalConfig, ThermalEnsemble};
use jc_entropy::{EntropyReport, ModelParams};

/// Calibrated on the first verified run of the default quench grid
/// (geometric N̄=1 showed 6 disjoint negative intervals) and frozen.
const GEOMETRIC_1_MIN_INTERVALS: usize = 6;
/// Swing a turning point of the ratio must exceed to count as an extremum in
/// the late window; Rabi-period ripples of the geometric field stay below it.
const LATE_WINDOW_SWING: f64 = 0.1;

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(failures: Vec<String>, summary: String) -> Self {
        if failures.is_empty() {
            Self { passed: true, detail: summary }
        } else {
            Self { passed: false, detail: format!("{summary}; {}", failures.join("; ")) }
        }
    }
}

/// Reports gathered from criteria 1-5 for the inequality suite.
type Collected = Vec<(String, EntropyReport)>;

fn entropy_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().filter(|&p| p > 1e-300).map(|p| -p * p.ln()).sum()
}

/// Thermal state built by numerically diagonalizing the product-basis
/// Hamiltonian `ω a†a + ω₀σ_z/2 + κ(aσ₊ + a†σ₋)` on the states
/// `|0,g⟩, |0,e⟩, …, |B,g⟩`. Returns `(S_joint, S_A, S_R)`.
fn dense_thermal_oracle(params: &ModelParams, beta: f64, blocks: usize) -> (f64, f64, f64) {
    let dim = 2 * blocks + 1;
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for m in 0..=blocks {
        h[(2 * m, 2 * m)] = params.omega * m as f64 - 0.5 * params.omega0;
        if m < blocks {
            h[(2 * m + 1, 2 * m + 1)] = params.omega * m as f64 + 0.5 * params.omega0;
            let g = params.kappa * ((m + 1) as f64).sqrt();
            h[(2 * m + 1, 2 * m + 2)] = g;
            h[(2 * m + 2, 2 * m + 1)] = g;
        }
    }
    let eig = SymmetricEigen::new(h);
    let e_min = eig.eigenvalues.min();
    let mut w: Vec<f64> = eig.eigenvalues.iter().map(|e| (-beta * (e - e_min)).exp()).collect();
    let z: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= z);
    let v = &eig.eigenvectors;
    let rho = v * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(w)) * v.transpose();

    let s_joint = entropy_of(SymmetricEigen::new(rho.clone()).eigenvalues.iter().copied());
    let p_g: f64 = (0..=blocks).map(|m| rho[(2 * m, 2 * m)]).sum();
    let s_atom = entropy_of([p_g, 1.0 - p_g]);
    let photons =
        (0..=blocks).map(|m| rho[(2 * m, 2 * m)] + if m < blocks { rho[(2 * m + 1, 2 * m + 1)] } else { 0.0 });
    (s_joint, s_atom, entropy_of(photons))
}

fn criterion_1(collected: &mut Collected) -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_0001);
    let inv_betas: Vec<f64> = (0..20).map(|_| rng.random_range(0.05..=4.0)).collect();
    let kappas: Vec<f64> = (0..20).map(|_| rng.random_range(0.0..=5.0)).collect();
    let points: Vec<(f64, f64)> = kappas.iter().flat_map(|&k| inv_betas.iter().map(move |&t| (k, t))).collect();

    let start = Instant::now();
    let results: Vec<Result<(f64, f64, f64, EntropyReport), String>> = points
        .par_iter()
        .map(|&(kappa, inv_beta)| {
            let cfg = ThermalConfig::new(ModelParams::resonant(kappa), inv_beta);
            let ens = ThermalEnsemble::new(&cfg).map_err(|e| e.to_string())?;
            let report = ens.report().map_err(|e| e.to_string())?;
            let (j, a, r) = dense_thermal_oracle(&cfg.params, cfg.beta(), ens.n_max() + 1);
            Ok((j, a, r, report))
        })
        .collect();
    let elapsed = start.elapsed().as_secs_f64();

    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for (&(kappa, inv_beta), result) in points.iter().zip(results) {
        match result {
            Ok((j, a, r, report)) => {
                let dev = (j - report.s_joint).abs().max((a - report.s_atom).abs()).max((r - report.s_rad).abs());
                worst = worst.max(dev);
                if dev > 1e-10 {
                    failures.push(format!("kappa {kappa} inv_beta {inv_beta}: deviation {dev:e}"));
                }
                collected.push((format!("thermal-oracle kappa={kappa} inv_beta={inv_beta}"), report));
            }
            Err(e) => failures.push(format!("kappa {kappa} inv_beta {inv_beta}: {e}")),
        }
    }
    if elapsed >= 60.0 {
        failures.push(format!("runtime {elapsed:.1} s"));
    }
    Outcome::new(failures, format!("{} points, max deviation {worst:.2e}, {elapsed:.1} s", points.len()))
}

fn sources() -> Vec<SourceModel> {
    [1.0, 5.0, 50.0]
        .into_iter()
        .flat_map(|nbar| [SourceModel::Geometric { nbar }, SourceModel::Poisson { nbar }])
        .collect()
}

fn criterion_2(collected: &mut Collected) -> Outcome {
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    let taus = linear_grid(0.0, 3.0, 500).unwrap();
    for source in sources() {
        let quench = Quench::new(&QuenchConfig::new(ModelParams::resonant(1.0), source.clone())).unwrap();
        let closed = joint_entropy_closed_form(&source);
        for &tau in &taus {
            let t = quench.cfg.time_from_tau(tau);
            let s = von_neumann_entropy(&quench.joint_density(t).unwrap());
            worst = worst.max((s - closed).abs());
            if (s - closed).abs() >= 1e-9 {
                failures.push(format!("{source:?} tau {tau}: {s} vs {closed}"));
            }
            collected.push((format!("conservation {source:?} tau={tau}"), quench.report(t).unwrap()));
        }
    }
    let geometric_1 = joint_entropy_closed_form(&SourceModel::Geometric { nbar: 1.0 });
    if (geometric_1 - 2.0 * LN_2).abs() > 1e-12 {
        failures.push(format!("geometric N=1 constant {geometric_1}"));
    }
    // 1 + e^{-1} Σ ln(n!)/n!, evaluated to 30 digits offline
    let poisson_1 = joint_entropy_closed_form(&SourceModel::Poisson { nbar: 1.0 });
    if (poisson_1 - 1.304_842_242_256_251_5).abs() > 1e-10 {
        failures.push(format!("poisson N=1 constant {poisson_1}"));
    }
    Outcome::new(failures, format!("6 sources x 500 points, max deviation {worst:.2e}"))
}

fn thermal_points(rows: &[ThermalRow], kappa: f64) -> Vec<(f64, Option<f64>)> {
    rows.iter().filter(|r| r.kappa_ratio == kappa).map(|r| (r.inv_beta, r.ratio())).collect()
}

fn criterion_3(collected: &mut Collected) -> Outcome {
    let mut failures = Vec::new();
    let spec = ThermalSweepSpec::default();
    let rows = run_thermal_sweep(&spec).unwrap();
    for row in &rows {
        match (&row.report, &row.error) {
            (Some(r), _) => {
                collected.push((format!("thermal kappa={} inv_beta={}", row.kappa_ratio, row.inv_beta), *r))
            }
            (None, e) => failures.push(format!("error row: {e:?}")),
        }
    }

    let min_low = thermal_points(&rows, 0.5).iter().filter_map(|p| p.1).fold(f64::INFINITY, f64::min);
    if min_low < -1e-9 {
        failures.push(format!("kappa 0.5 min ratio {min_low:e}"));
    }
    let mut summary = vec![format!("kappa 0.5 min ratio {min_low:.3}")];
    for kappa in [2.5, 5.0] {
        let intervals = negative_intervals(&thermal_points(&rows, kappa));
        if intervals.is_empty() {
            failures.push(format!("kappa {kappa}: no negative interval"));
        }
        summary.push(format!(
            "kappa {kappa} negative on {:?}",
            intervals.iter().map(|i| (i.start, i.end)).collect::<Vec<_>>()
        ));
    }

    let coarse = thermal_crossovers(&spec, &rows).unwrap();
    let fine_spec = ThermalSweepSpec { points: 2 * spec.points - 1, ..spec.clone() };
    let fine = thermal_crossovers(&fine_spec, &run_thermal_sweep(&fine_spec).unwrap()).unwrap();
    if coarse.len() != fine.len() || coarse.is_empty() {
        failures.push(format!("crossover count {} vs {} after grid doubling", coarse.len(), fine.len()));
    }
    for (a, b) in coarse.iter().zip(&fine) {
        if a.group != b.group || (a.axis - b.axis).abs() > 1e-6 {
            failures.push(format!("crossover {} at {} moved to {} {}", a.group, a.axis, b.group, b.axis));
        }
    }
    summary.push(format!("crossovers {:?}", coarse.iter().map(|c| (c.group.as_str(), c.axis)).collect::<Vec<_>>()));
    Outcome::new(failures, summary.join(", "))
}

fn quench_rows(source: SourceModel) -> Vec<QuenchRow> {
    run_quench_sweep(&QuenchSweepSpec { sources: vec![source], ..Default::default() }).unwrap()
}

fn collect_quench(rows: &[QuenchRow], collected: &mut Collected, failures: &mut Vec<String>) {
    for row in rows {
        match (&row.report, &row.error) {
            (Some(r), _) => collected.push((format!("quench {:?} nbar={} tau={}", row.source, row.nbar, row.tau), *r)),
            (None, e) => failures.push(format!("error row: {e:?}")),
        }
    }
}

fn quench_points(rows: &[QuenchRow]) -> Vec<(f64, Option<f64>)> {
    rows.iter().map(|r| (r.tau, r.ratio())).collect()
}

fn criterion_4(collected: &mut Collected) -> Outcome {
    let mut failures = Vec::new();
    let spec = QuenchSweepSpec::default();
    let low = quench_rows(SourceModel::Geometric { nbar: 1.0 });
    let high = quench_rows(SourceModel::Geometric { nbar: 50.0 });
    collect_quench(&low, collected, &mut failures);
    collect_quench(&high, collected, &mut failures);

    let low_intervals = negative_intervals(&quench_points(&low));
    let high_intervals = negative_intervals(&quench_points(&high));
    if low_intervals.len() < 3.max(GEOMETRIC_1_MIN_INTERVALS) {
        failures.push(format!("N=1 has {} negative intervals", low_intervals.len()));
    }
    let first_tau = high.iter().find(|r| r.ratio().is_some()).map(|r| r.tau);
    let tau_star = match high_intervals.as_slice() {
        [only] if Some(only.start) == first_tau => only.end,
        _ => {
            failures.push(format!("N=50 negative intervals {high_intervals:?}"));
            f64::NAN
        }
    };
    if tau_star.is_nan() || tau_star >= 0.1 * spec.tau_max {
        failures.push(format!("N=50 tau* = {tau_star}"));
    }
    if high_intervals.len() > low_intervals.len() {
        failures.push("N=50 has more negative intervals than N=1".into());
    }
    Outcome::new(
        failures,
        format!(
            "N=1: {} negative intervals, N=50: {} (tau* = {tau_star:.4} < {})",
            low_intervals.len(),
            high_intervals.len(),
            0.1 * spec.tau_max
        ),
    )
}

fn late_extrema(rows: &[QuenchRow]) -> usize {
    let late: Vec<f64> = rows.iter().filter(|r| (1.0..=3.0).contains(&r.tau)).filter_map(|r| r.ratio()).collect();
    count_extrema(&late, LATE_WINDOW_SWING)
}

fn criterion_5(collected: &mut Collected) -> Outcome {
    let mut failures = Vec::new();
    let poisson = quench_rows(SourceModel::Poisson { nbar: 50.0 });
    let geometric = quench_rows(SourceModel::Geometric { nbar: 50.0 });
    collect_quench(&poisson, collected, &mut failures);
    let (p, g) = (late_extrema(&poisson), late_extrema(&geometric));
    if p < 3 {
        failures.push(format!("poisson has {p} extrema"));
    }
    if g >= p {
        failures.push(format!("geometric has {g} >= {p} extrema"));
    }
    Outcome::new(
        failures,
        format!("extrema on tau in [1, 3] (swing > {LATE_WINDOW_SWING}): poisson {p}, geometric {g}"),
    )
}

fn criterion_6() -> Outcome {
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for source in sources() {
        // κ = 1, so t = κt
        let quench = Quench::new(&QuenchConfig::new(ModelParams::resonant(1.0), source.clone())).unwrap();
        for i in 1..=500 {
            let kt = 0.05 * i as f64 / 500.0;
            match quench.report(kt).unwrap().ratio {
                Some(r) if r < 0.0 => {}
                other => failures.push(format!("{source:?} kt {kt}: ratio {other:?}")),
            }
        }
        let exact = quench.report(1e-3).unwrap().ratio.unwrap();
        let asymptotic = quench.small_time_ratio(1e-3).unwrap();
        let rel = ((exact - asymptotic) / exact).abs();
        worst = worst.max(rel);
        if rel >= 0.2 {
            failures.push(format!("{source:?}: exact {exact} vs asymptotic {asymptotic}"));
        }
    }
    Outcome::new(failures, format!("6 sources negative on (0, 0.05], max relative gap at kt=1e-3 {worst:.2e}"))
}

fn criterion_7(collected: &Collected) -> Outcome {
    let failures: Vec<String> = collected
        .iter()
        .filter_map(|(label, r)| {
            let mut problems = Vec::new();
            if let Err(e) = r.check_invariants(1e-9) {
                problems.push(e.to_string());
            }
            if let Some(ratio) = r.ratio {
                let identity = 1.0 - r.mutual / r.s_atom;
                if (ratio - identity).abs() > 1e-10 {
                    problems.push(format!("ratio {ratio} vs {identity}"));
                }
            }
            (!problems.is_empty()).then(|| format!("{label}: {}", problems.join(", ")))
        })
        .take(10)
        .collect();
    Outcome::new(failures, format!("{} reports checked", collected.len()))
}

fn criterion_8() -> Outcome {
    let mut failures = Vec::new();
    let expected: [(f64, Vec<usize>); 3] = [(0.5, vec![]), (2.5, (0..=6).collect()), (5.0, (0..=24).collect())];
    for (kappa, want) in expected {
        let params = ModelParams::resonant(kappa);
        let scanned: Vec<usize> =
            (0..=200).filter(|&n| (n as f64 + 0.5) - kappa * ((n + 1) as f64).sqrt() < 0.0).collect();
        let library = negative_branch_set(&params, 200);
        if scanned != want || library != want {
            failures.push(format!("kappa {kappa}: scan {scanned:?}, library {library:?}"));
        }
    }
    let edge = omega_ns(&ModelParams::resonant(0.5), 0, 2).unwrap();
    if edge != 0.0 {
        failures.push(format!("Omega(0,2) at kappa 0.5 is {edge}"));
    }
    Outcome::new(failures, "negative branch {} / {0..6} / {0..24} at kappa 0.5 / 2.5 / 5 to n=200".into())
}

fn csv_bytes<R: jc_entropy::sweep::CsvRow>(rows: &[R]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).unwrap();
    buf
}

fn criterion_9() -> Outcome {
    let thermal = ThermalSweepSpec { points: 120, ..Default::default() };
    let quench = QuenchSweepSpec {
        sources: vec![SourceModel::Geometric { nbar: 5.0 }, SourceModel::Poisson { nbar: 50.0 }],
        points: 300,
        ..Default::default()
    };
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            (csv_bytes(&run_thermal_sweep(&thermal).unwrap()), csv_bytes(&run_quench_sweep(&quench).unwrap()))
        })
    };
    let reference = run(4);
    let mut failures = Vec::new();
    for threads in [4, 1, 3] {
        if run(threads) != reference {
            failures.push(format!("output differs with {threads} threads"));
        }
    }
    Outcome::new(
        failures,
        format!("thermal {} bytes, quench {} bytes identical across 3 reruns", reference.0.len(), reference.1.len()),
    )
}

#[test]
fn acceptance_criteria() {
    let mut collected = Collected::new();
    let outcomes: Vec<(&str, Outcome)> = vec![
        ("oracle equivalence (thermal)", criterion_1(&mut collected)),
        ("entropy conservation (quench)", criterion_2(&mut collected)),
        ("thermal sign structure", criterion_3(&mut collected)),
        ("geometric quench sign structure", criterion_4(&mut collected)),
        ("coherent-field revivals", criterion_5(&mut collected)),
        ("small-time law", criterion_6()),
    ];
    let inequality = criterion_7(&collected);
    let outcomes: Vec<(&str, Outcome)> = outcomes
        .into_iter()
        .chain([
            ("inequality suite", inequality),
            ("negative-branch spectrum", criterion_8()),
            ("determinism", criterion_9()),
        ])
        .collect();

    let mut failed = Vec::new();
    for (i, (name, outcome)) in outcomes.iter().enumerate() {
        let verdict = if outcome.passed { "PASS" } else { "FAIL" };
        println!("criterion {} [{name}]: {verdict} - {}", i + 1, outcome.detail);
        if !outcome.passed {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
