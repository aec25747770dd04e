//! Acceptance suite. Prints one line per criterion and exits nonzero if any
//! criterion fails. Monte Carlo criteria share one master seed.

use std::process::ExitCode;
use std::time::Instant;

use dcov_hetero::competitors::Competitor;
use dcov_hetero::dcov::dcov_from_points;
use dcov_hetero::dcov_test::run_test;
use dcov_hetero::mean_models::{fit_mean_parametric, LeastSquaresOptions, MeanFamily, MeanModelSpec};
use dcov_hetero::report::{bootstrap_csv, residuals_csv, test_summary};
use dcov_hetero::simlab::{
    generate, monte_carlo, monte_carlo_grid, theta0, theta1, Mode, Model, SimulationScenario, TestKind,
};
use dcov_hetero::variance_models::{fit_variance, sigma_at, VarianceFamily, VarianceFitOptions};
use dcov_hetero::{Dataset, TestConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const MASTER_SEED: u64 = 20261016;

struct Outcome {
    id: u32,
    pass: bool,
    detail: String,
}

fn outcome(id: u32, pass: bool, detail: String) -> Outcome {
    Outcome { id, pass, detail }
}

fn normals(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    (0..k).map(|_| rng.sample(StandardNormal)).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|t| t * t).sum::<f64>().sqrt()
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Term-by-term double-centered product sum with every inner sum written out.
fn dcov_term_by_term(z: &[Vec<f64>], w: &[Vec<f64>]) -> f64 {
    let n = z.len();
    let nf = n as f64;
    let centered = |pts: &[Vec<f64>], i: usize, j: usize| -> f64 {
        let mut ri = 0.0;
        for k in 0..n {
            ri += norm(&diff(&pts[i], &pts[k]));
        }
        let mut rj = 0.0;
        for l in 0..n {
            rj += norm(&diff(&pts[j], &pts[l]));
        }
        let mut all = 0.0;
        for k in 0..n {
            for l in 0..n {
                all += norm(&diff(&pts[k], &pts[l]));
            }
        }
        norm(&diff(&pts[i], &pts[j])) - ri / (nf - 2.0) - rj / (nf - 2.0) + all / ((nf - 1.0) * (nf - 2.0))
    };
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += centered(z, i, j) * centered(w, i, j);
            }
        }
    }
    s / (nf * (nf - 3.0))
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(MASTER_SEED ^ 1);
    let sizes = [4usize, 5, 6, 8];
    let mut worst: f64 = 0.0;
    for d in 0..20 {
        let n = sizes[d % sizes.len()];
        let p = 1 + d % 3;
        let q = 1 + (d / 3) % 2;
        let x = normals(&mut rng, n * p);
        let w: Vec<f64> = normals(&mut rng, n * q).iter().map(|v| 3.0 * v + 1.0).collect();
        let fast = dcov_from_points(&x, p, &w, q).expect("dcov").value;
        let zs: Vec<Vec<f64>> = x.chunks(p).map(|c| c.to_vec()).collect();
        let ws: Vec<Vec<f64>> = w.chunks(q).map(|c| c.to_vec()).collect();
        let slow = dcov_term_by_term(&zs, &ws);
        worst = worst.max((fast - slow).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        1,
        worst <= 1e-12 && secs < 1.0,
        format!("max |fast - term-by-term| = {worst:.2e} over 20 datasets, {secs:.3}s"),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(MASTER_SEED ^ 2);
    let reps = 10_000;
    let n = 10;
    let values: Vec<f64> = (0..reps)
        .map(|_| {
            let x = normals(&mut rng, n);
            let eta = normals(&mut rng, n);
            dcov_from_points(&x, 1, &eta, 1).expect("dcov").value
        })
        .collect();
    let mean = values.iter().sum::<f64>() / reps as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps as f64 - 1.0);
    let se = (var / reps as f64).sqrt();
    let secs = start.elapsed().as_secs_f64();
    outcome(
        2,
        mean.abs() <= 3.0 * se && secs < 30.0,
        format!(
            "mean = {mean:.3e}, se = {se:.3e}, |mean|/se = {:.2}, {secs:.1}s",
            mean.abs() / se
        ),
    )
}

fn rate_in(id: u32, label: &str, scn: &SimulationScenario, test: TestKind, lo: f64, hi: f64) -> Outcome {
    let start = Instant::now();
    let scn = SimulationScenario {
        tests: vec![test],
        ..scn.clone()
    };
    match monte_carlo(&scn) {
        Ok(t) => {
            let row = &t.rows[0];
            let rate = row.rate();
            outcome(
                id,
                rate >= lo && rate <= hi,
                format!(
                    "{label}: rate = {rate:.3} (se {:.3}, failures {}) target [{lo}, {hi}], {:.0}s",
                    row.se(),
                    row.failures,
                    start.elapsed().as_secs_f64()
                ),
            )
        }
        Err(e) => outcome(id, false, format!("{label}: {e}")),
    }
}

fn criteria_4_and_5() -> Vec<Outcome> {
    let start = Instant::now();
    let mut base = SimulationScenario::new(Model::H21, 100, 2, 0.0, MASTER_SEED);
    base.reps = 200;
    let grid = [0.0, 1.5, 2.5];
    match monte_carlo_grid(&base, &grid) {
        Ok(t) => {
            let rates: Vec<f64> = t.rows.iter().map(|r| r.rate()).collect();
            let top = &t.rows[2];
            let secs = start.elapsed().as_secs_f64();
            let c4 = outcome(
                4,
                top.rate() >= 0.85,
                format!(
                    "H21 n=100 a=2.5 reps=200 B=300: rate = {:.3} (se {:.3}, failures {}) target >= 0.85",
                    top.rate(),
                    top.se(),
                    top.failures
                ),
            );
            let monotone = rates.windows(2).all(|w| w[1] >= w[0] - 0.05);
            let c5 = outcome(
                5,
                monotone,
                format!("H21 n=100 coupled a = 0, 1.5, 2.5: rates = {rates:.3?}, {secs:.0}s"),
            );
            vec![c4, c5]
        }
        Err(e) => vec![outcome(4, false, e.to_string()), outcome(5, false, e.to_string())],
    }
}

fn criterion_7() -> Outcome {
    let mut cvm = SimulationScenario::new(Model::H22, 100, 2, 1.0, MASTER_SEED);
    cvm.reps = 150;
    let a = rate_in(
        7,
        "CvM H22 n=100 a=1",
        &cvm,
        TestKind::Competitor(Competitor::Cvm),
        0.95,
        1.0,
    );
    let wz = SimulationScenario::new(Model::H11, 100, 2, 0.0, MASTER_SEED);
    let b = rate_in(
        7,
        "WZ H11 n=100 a=0",
        &wz,
        TestKind::Competitor(Competitor::Wz),
        0.02,
        0.08,
    );
    outcome(7, a.pass && b.pass, format!("{}; {}", a.detail, b.detail))
}

fn report_bytes(ds: &Dataset, cfg: &TestConfig, threads: usize) -> (String, dcov_hetero::TestReport) {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("pool");
    let report = pool.install(|| run_test(ds, cfg)).expect("test run");
    let text = format!(
        "{}\n{}\n{}",
        test_summary(&report),
        bootstrap_csv(&report.bootstrap_stats),
        residuals_csv(ds, &report)
    );
    (text, report)
}

fn criterion_8() -> Outcome {
    let mut lattice_ok = true;
    let mut identical = true;
    let mut checked = 0;
    for (k, model) in Model::ALL.iter().enumerate() {
        let ds = generate(*model, 40, 2, 0.5 * k as f64 / 2.0, MASTER_SEED + k as u64).expect("generate");
        for (b, mean) in [
            (49usize, MeanModelSpec::parametric(MeanFamily::Linear)),
            (99, MeanModelSpec::nonparametric(1.2)),
        ] {
            let cfg = TestConfig::new(mean, model.null_family(), MASTER_SEED + 10 * k as u64).with_bootstrap(b);
            let (one, report) = report_bytes(&ds, &cfg, 1);
            let (eight, _) = report_bytes(&ds, &cfg, 8);
            identical &= one == eight;
            let b_eff = report.bootstrap_stats.len();
            let scaled = report.p_value * (b_eff + 1) as f64;
            lattice_ok &= (scaled - scaled.round()).abs() < 1e-9
                && scaled.round() >= 1.0
                && scaled.round() <= (b_eff + 1) as f64
                && b_eff + report.diagnostics.failed_replicates == b;
            checked += 1;
        }
    }
    outcome(
        8,
        lattice_ok && identical,
        format!("{checked} runs: p-values on lattice = {lattice_ok}, 1 vs 8 threads byte-identical = {identical}"),
    )
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(MASTER_SEED ^ 9);
    let family = VarianceFamily::from_id("constant").expect("family");
    let mut worst: f64 = 0.0;
    for d in 0..50 {
        let n = 10 + 5 * (d % 11);
        let p = 1 + d % 3;
        let scale = 0.1 + 5.0 * rng.random::<f64>();
        let x = normals(&mut rng, n * p);
        let y: Vec<f64> = (0..n)
            .map(|i| x[i * p..(i + 1) * p].iter().sum::<f64>() + scale * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let ds = Dataset::from_flat(y, x, p).expect("dataset");
        let mean = fit_mean_parametric(&ds, &MeanFamily::Linear, None, &LeastSquaresOptions::default()).expect("mean");
        let r2 = mean.residuals(&ds).iter().map(|r| r * r).sum::<f64>() / n as f64;
        let opts = VarianceFitOptions {
            seed: MASTER_SEED + d as u64,
            ..Default::default()
        };
        let fit = fit_variance(&ds, &mean, &family, None, &opts).expect("variance");
        worst = worst.max((fit.theta_hat[0] - r2).abs());
    }
    outcome(
        9,
        worst <= 1e-6,
        format!("max |theta_hat - mean r^2| = {worst:.2e} over 50 datasets"),
    )
}

/// Conditional SD of each model at `a = 0`, from the model displays.
fn generator_sd(model: Model, x: &[f64], p: usize) -> f64 {
    let dot = |t: &[f64]| x.iter().zip(t).map(|(a, b)| a * b).sum::<f64>();
    let t0 = dot(&theta0(p));
    match model {
        Model::H11 => (1.0 + t0.abs()).sqrt(),
        Model::H12 => (1.0 + dot(&theta1(p)).abs()).sqrt(),
        Model::H21 => (1.0 + t0 * t0).abs().sqrt(),
        Model::H22 => 1.0 + t0.sin().abs(),
    }
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(MASTER_SEED ^ 10);
    let mut worst: f64 = 0.0;
    let mut wiring: f64 = 0.0;
    for model in Model::ALL {
        for p in [2usize, 4] {
            let family = model.null_family();
            let theta = model.theta_null(p);
            for _ in 0..1000 {
                let x: Vec<f64> = normals(&mut rng, p).iter().map(|v| 2.0 * v).collect();
                let expected = generator_sd(model, &x, p);
                let fam = sigma_at(&family, &theta, &x, 0.0).expect("sigma");
                worst = worst.max((fam - expected).abs());
                wiring = wiring.max((model.conditional_sd(&x, 0.0) - expected).abs());
            }
        }
    }
    outcome(
        10,
        worst <= 1e-12 && wiring <= 1e-12,
        format!("max |sigma_at - generator sd| = {worst:.2e}, max |conditional_sd - display| = {wiring:.2e}"),
    )
}

fn main() -> ExitCode {
    let total = Instant::now();
    let mut results = Vec::new();
    let mut record = |o: Outcome| {
        println!(
            "[{}] criterion {}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.id,
            o.detail
        );
        results.push(o.pass);
    };

    record(criterion_1());
    record(criterion_2());
    record(rate_in(
        3,
        "H21 nonlinear n=50 a=0 reps=300 B=300",
        &SimulationScenario::new(Model::H21, 50, 2, 0.0, MASTER_SEED),
        TestKind::Dcov,
        0.02,
        0.08,
    ));
    for o in criteria_4_and_5() {
        record(o);
    }
    let mut np = SimulationScenario::new(Model::H11, 50, 2, 0.0, MASTER_SEED);
    np.mode = Mode::Nonparametric;
    np.bandwidth_c = 1.2;
    record(rate_in(
        6,
        "H11 nonparametric c=1.2 n=50 a=0 reps=300 B=300",
        &np,
        TestKind::Dcov,
        0.015,
        0.08,
    ));
    record(criterion_7());
    record(criterion_8());
    record(criterion_9());
    record(criterion_10());

    let failed = results.iter().filter(|p| !**p).count();
    println!(
        "acceptance: {} passed, {failed} failed, {:.0}s",
        results.len() - failed,
        total.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
