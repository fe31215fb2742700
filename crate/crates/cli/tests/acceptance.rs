//! Acceptance suite: one test per criterion, named `cNN_*`, plus the
//! coarse trend checks. Tolerances are pinned in the constants below.
//!
//! Run with `cargo test -p wetbench-cli --test acceptance -- --test-threads 1`.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command as Process;

use rand::Rng;

use wetbench_cli::{execute, Cli, Command};
use wetbench_core::analytic::{
    aa_ss_mean, aa_ss_variance, dist_aa_ss, f_averaged, f_phase, gain_mean_db, gain_var_db, uniform_eigen, PhaseInputs,
};
use wetbench_core::channel::{
    los_phases, r_sum, uniform_rho_lower_bound, ArrayConfig, ChannelSample, ChannelSampler, CorrelationModel,
    PhaseShift,
};
use wetbench_core::harvester::EhCurve;
use wetbench_core::montecarlo::{
    ks_critical, ks_statistic, mean_variance, parallel_draws, random_correlation_matched, simulate, ExperimentSpec,
};
use wetbench_core::optimize::max_energy_shift;
use wetbench_core::rng::stream_rng;
use wetbench_core::schemes::{harvested, jensen_order, rf_aa_is, JensenOrder, Scheme, SchemeConfig};

const PHASE_EXACT_TOL: f64 = 1e-10;
const FIT_TOL_MAX_E: f64 = 0.03;
const FIT_TOL_ZERO: f64 = 0.05;
const GAIN_MEAN_MIN_DB: f64 = 3.47;
const GAIN_VAR_MAX_DB: f64 = 5.75;
const STANDARD_ERRORS: f64 = 3.0;
const VARIANCE_REL_TOL: f64 = 0.03;
const KS_ALPHA: f64 = 0.01;
const MAX_MEAN_DISTANCE: f64 = 0.012;
const RAYLEIGH_DISTANCE: (f64, f64) = (0.00067, 0.006);
const EIGEN_TOL: f64 = 1e-10;
const HARVEST_ANCHOR: (f64, f64, f64) = (1.6, 0.28, 0.005);
const SCENARIO_B_GAIN_DB: (f64, f64) = (1.5, 0.5);
const SCENARIO_C_GAIN_DB: (f64, f64) = (2.0, 0.7);
const ROTATION_TOL_DEG: f64 = 10.0;

fn cli(command: Command, config: Option<PathBuf>, preset: Option<&str>, out: &Path) -> Cli {
    Cli {
        command,
        config,
        preset: preset.map(str::to_string),
        seed: None,
        threads: None,
        out: Some(out.to_path_buf()),
    }
}

fn run_config(command: Command, toml: &str, dir: &Path) -> Vec<String> {
    let path = dir.join("config.toml");
    fs::write(&path, toml).unwrap();
    execute(&cli(command, Some(path), None, dir)).unwrap()
}

/// Rows of a CSV written by the CLI, keyed by the header.
fn read_csv(path: &Path) -> Vec<csv::StringRecord> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path).unwrap();
    r.records().map(|x| x.unwrap()).collect()
}

fn field(row: &csv::StringRecord, i: usize) -> f64 {
    row[i].parse().unwrap()
}

#[test]
fn c01_phase_function_exactness() {
    let mut worst: f64 = 0.0;
    for m in 1..=64usize {
        for k in 0..16 {
            let phi = k as f64 * PI / 8.0 + 0.1;
            let cancel: Vec<f64> = los_phases(m, phi).iter().map(|p| -p).collect();
            let psi = PhaseShift::normalized(&cancel).unwrap();
            let f = f_phase(&psi, phi);
            worst = worst.max((f - (m * m) as f64).abs());
        }
    }
    println!("max |f - M^2| = {worst:e}");
    assert!(worst <= PHASE_EXACT_TOL);
}

#[test]
fn c02_curve_fit_approximations() {
    for m in [8usize, 16, 32, 64] {
        let mf = m as f64;
        let hi = f_averaged(&max_energy_shift(m)) / (0.85 * mf.powf(1.5)) - 1.0;
        let lo = f_averaged(&PhaseShift::zeros(m)) / (0.64 * mf) - 1.0;
        println!("M = {m}: max-E rel err {hi:+.4}, zero-shift rel err {lo:+.4}");
        assert!(hi.abs() <= FIT_TOL_MAX_E, "M = {m}");
        assert!(lo.abs() <= FIT_TOL_ZERO, "M = {m}");
    }
}

#[test]
fn c03_gain_bounds() {
    let e = gain_mean_db(8, 10.0, 8.0);
    let v = gain_var_db(8, 10.0, 8.0);
    println!("mean gain {e:.3} dB, variance growth {v:.3} dB");
    assert!(e >= GAIN_MEAN_MIN_DB);
    assert!(v <= GAIN_VAR_MAX_DB);
}

#[test]
fn c04_aa_ss_energy_distribution() {
    let n = 1_000_000;
    let curve = EhCurve::standard();
    for i in 0..20u64 {
        let mut rng = stream_rng(404, i);
        let m = rng.random_range(1..=16usize);
        let kappa = rng.random_range(0.0..20.0);
        let lb = if m > 1 { uniform_rho_lower_bound(m) } else { 0.0 };
        let rho = rng.random_range(lb..1.0);
        let phi = rng.random_range(0.0..2.0 * PI);
        let beta = rng.random_range(0.5..2.0);
        let raw: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
        let psi = PhaseShift::normalized(&raw).unwrap();
        let cfg = ArrayConfig::new(m, kappa, phi, CorrelationModel::Uniform { rho }).unwrap();
        let sc = SchemeConfig::new(Scheme::AaSs, beta, psi.clone()).unwrap();
        let ens = simulate(&ExperimentSpec::new(cfg.clone(), sc, curve, n, 40 + i)).unwrap();
        let inputs = PhaseInputs::from_config(&cfg, &psi).unwrap();
        let f = inputs.f();
        let mean = aa_ss_mean(beta, m, kappa, inputs.r_sum, f);
        let var = aa_ss_variance(beta, m, kappa, inputs.r_sum, f);
        let (emp_mean, emp_var) = mean_variance(&ens.rf);
        let se = (emp_var / n as f64).sqrt();
        let dist = dist_aa_ss(beta, &inputs).unwrap();
        let ks = ks_statistic(&ens.rf, |x| dist.cdf(x)).unwrap();
        let crit = ks_critical(n, KS_ALPHA);
        println!(
            "config {i}: M={m} kappa={kappa:.2} rho={rho:.3} mean z={:+.2} var rel={:+.4} ks={ks:.5} (crit {crit:.5})",
            (emp_mean - mean) / se,
            emp_var / var - 1.0
        );
        assert!((emp_mean - mean).abs() <= STANDARD_ERRORS * se, "config {i}: mean");
        assert!((emp_var / var - 1.0).abs() <= VARIANCE_REL_TOL, "config {i}: variance");
        assert!(ks <= crit, "config {i}: KS");
    }
}

#[test]
fn c05_equal_sum_substitution() {
    let dir = tempfile::tempdir().unwrap();
    let lines = execute(&cli(Command::Validate, None, Some("paper-appendixB"), dir.path())).unwrap();
    for l in &lines {
        println!("{l}");
    }
    let rows = read_csv(&dir.path().join("validate.csv"));
    assert_eq!(rows.len(), 32);
    let max = rows.iter().map(|r| field(r, 4)).fold(0.0, f64::max);
    let rayleigh: Vec<f64> = rows
        .iter()
        .filter(|r| field(r, 2) == 0.0)
        .map(|r| field(r, 4))
        .collect();
    let rayleigh_mean = rayleigh.iter().sum::<f64>() / rayleigh.len() as f64;
    for r in &rows {
        println!("kappa={} phi={:.4} mean d={:.5}", &r[2], field(r, 3), field(r, 4));
    }
    println!("max mean distance {max:.5}; kappa = 0 average {rayleigh_mean:.5}");
    assert!(max <= MAX_MEAN_DISTANCE, "max mean distance {max}");
    assert!(
        (RAYLEIGH_DISTANCE.0..=RAYLEIGH_DISTANCE.1).contains(&rayleigh_mean),
        "kappa = 0 average {rayleigh_mean}"
    );
}

/// Channel whose per-antenna gains are exactly `gains`.
fn sample_with_gains(gains: &[f64], split: &[f64]) -> ChannelSample {
    let hx = gains.iter().zip(split).map(|(g, u)| (g * u).sqrt()).collect();
    let hy = gains.iter().zip(split).map(|(g, u)| (g * (1.0 - u)).sqrt()).collect();
    ChannelSample::new(hx, hy).unwrap()
}

#[test]
fn c06_jensen_ordering() {
    let curve = EhCurve::standard();
    let b = curve.inflection();
    let n = 100_000;
    let mut rng = stream_rng(606, 0);
    for (branch, lo, hi) in [
        (JensenOrder::SaDominates, 0.0, b),
        (JensenOrder::AaIsDominates, b, 40.0),
    ] {
        let (mut violations, mut checked) = (0, 0);
        while checked < n {
            let m = rng.random_range(1..=16usize);
            let beta = rng.random_range(0.1..10.0);
            let gains: Vec<f64> = (0..m).map(|_| rng.random_range(lo..=hi) / beta).collect();
            let split: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..=1.0)).collect();
            let s = sample_with_gains(&gains, &split);
            // rounding in the division can step over the inflection point
            if jensen_order(&s, beta, b) != branch {
                continue;
            }
            checked += 1;
            let shift = PhaseShift::zeros(m);
            let sa = harvested(&SchemeConfig::new(Scheme::Sa, beta, shift.clone()).unwrap(), &curve, &s);
            let is = harvested(&SchemeConfig::new(Scheme::AaIs, beta, shift).unwrap(), &curve, &s);
            let ok = match branch {
                JensenOrder::SaDominates => sa >= is,
                _ => is >= sa,
            };
            if !ok {
                violations += 1;
            }
        }
        println!("{branch:?}: {violations} violations in {n} samples");
        assert_eq!(violations, 0, "{branch:?}");
    }
}

#[test]
fn c07_uniform_eigendecomposition() {
    let mut worst: f64 = 0.0;
    for m in 2..=64usize {
        for rho in [uniform_rho_lower_bound(m), -0.01, 0.0, 0.25, 0.6, 0.95, 1.0] {
            let (lambda, q) = uniform_eigen(m, rho).unwrap();
            for i in 0..m {
                for j in 0..m {
                    let rec: f64 = (0..m).map(|k| q[(i, k)] * lambda[k] * q[(j, k)]).sum();
                    let target = if i == j { 1.0 } else { rho };
                    let gram: f64 = (0..m).map(|k| q[(k, i)] * q[(k, j)]).sum();
                    let eye = if i == j { 1.0 } else { 0.0 };
                    worst = worst.max((rec - target).abs()).max((gram - eye).abs());
                }
            }
        }
    }
    println!("max residual {worst:e}");
    assert!(worst <= EIGEN_TOL);
}

#[test]
fn c08_aa_is_mean_invariance() {
    let n = 1_000_000;
    for i in 0..10u64 {
        let mut rng = stream_rng(808, i);
        let m = rng.random_range(2..=16usize);
        let kappa = rng.random_range(0.0..20.0);
        let phi = rng.random_range(0.0..2.0 * PI);
        let beta = rng.random_range(0.5..2.0);
        let target = rng.random_range(0.0..=(m * m) as f64);
        let r = random_correlation_matched(m, target, 80 + i).unwrap();
        let raw: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
        let psi = PhaseShift::normalized(&raw).unwrap();
        let cfg = ArrayConfig::new(m, kappa, phi, CorrelationModel::Exponential { tau: 0.0 }).unwrap();
        let sampler = ChannelSampler::with_matrix(&cfg, &psi, &r).unwrap();
        let rf = parallel_draws(n, 900 + i, || (), |_, rng| rf_aa_is(&sampler.sample(rng), beta));
        let (mean, var) = mean_variance(&rf);
        let se = (var / n as f64).sqrt();
        println!(
            "config {i}: M={m} kappa={kappa:.2} R_sum={:.2} z={:+.2}",
            r_sum(&r),
            (mean - beta) / se
        );
        assert!((mean - beta).abs() <= STANDARD_ERRORS * se, "config {i}");
    }
}

#[test]
fn c09_harvester_anchor() {
    let (x, y, tol) = HARVEST_ANCHOR;
    let g = EhCurve::standard().eval(x);
    println!("g({x} mW) = {g:.4} mW");
    assert!((g - y).abs() <= tol, "g({x}) = {g}");
}

struct ScenarioRun {
    /// Best minimum energy and its rotation (degrees) per template.
    best: Vec<(f64, f64)>,
}

fn run_scenario(preset: &str) -> ScenarioRun {
    let dir = tempfile::tempdir().unwrap();
    let lines = execute(&cli(Command::Scenario, None, Some(preset), dir.path())).unwrap();
    for l in &lines {
        println!("{l}");
    }
    let mut best: Vec<(f64, f64)> = Vec::new();
    for r in read_csv(&dir.path().join("scenario_plans.csv")) {
        let t = field(&r, 1) as usize;
        let (rot, min) = (field(&r, 2), field(&r, 3));
        if t == best.len() {
            best.push((min, rot));
        } else if min > best[t].0 {
            best[t] = (min, rot);
        }
    }
    ScenarioRun { best }
}

fn db(a: f64, b: f64) -> f64 {
    10.0 * (a / b).log10()
}

/// Distance between two array orientations; a line array looks the same
/// after half a turn for the shifts used here.
fn rotation_gap_deg(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(180.0);
    d.min(180.0 - d)
}

#[test]
fn c10_scenario_fairness() {
    let a = run_scenario("paper-fig10-A");
    let (sa, is, max_e, min_var) = (a.best[0].0, a.best[1].0, a.best[2].0, a.best[3].0);
    println!("A: SA {sa:.4} AA-IS {is:.4} max-E {max_e:.4} min-var {min_var:.4}");
    let b = run_scenario("paper-fig10-B");
    let gain_b = db(b.best[1].0, b.best[0].0);
    println!("B: max-E over SA {gain_b:+.3} dB at {} deg", b.best[1].1);
    let c = run_scenario("paper-fig10-C");
    let gain_c = db(c.best[1].0, c.best[0].0);
    println!("C: two-signal over SA {gain_c:+.3} dB at {} deg", c.best[1].1);

    assert!(sa >= is, "A: SA below AA-IS");
    assert!(is > max_e && is > min_var, "A: AA-IS not above both AA-SS variants");
    assert!(
        (gain_b - SCENARIO_B_GAIN_DB.0).abs() <= SCENARIO_B_GAIN_DB.1,
        "B: {gain_b} dB"
    );
    assert!(
        (gain_c - SCENARIO_C_GAIN_DB.0).abs() <= SCENARIO_C_GAIN_DB.1,
        "C: {gain_c} dB"
    );
}

/// Supplementary to criterion 10: the best orientations reported for the
/// clustered deployments (20 degrees counter-clockwise for B, 10 degrees
/// clockwise for C).
#[test]
fn c10x_scenario_best_rotations() {
    let b = run_scenario("paper-fig10-B");
    let c = run_scenario("paper-fig10-C");
    println!(
        "B best rotation {} deg, C best rotation {} deg",
        b.best[1].1, c.best[1].1
    );
    assert!(rotation_gap_deg(b.best[1].1, 20.0) <= ROTATION_TOL_DEG);
    assert!(rotation_gap_deg(c.best[1].1, -10.0) <= ROTATION_TOL_DEG);
}

const DETERMINISM_CONFIGS: [(&str, &str); 5] = [
    ("curves", "[curves]\nvalues = [-4.0, 4.0]\nsamples = 20000\n"),
    (
        "distributions",
        "[array]\nphi = 0.7\n[distributions]\nsamples = 20000\nbins = 12\n",
    ),
    ("optimize", "[optimize]\nm = 6\nrestarts = 6\ngrid = 120\n"),
    (
        "validate",
        "[validate]\nkappas = [1.0]\nphis = [0.4]\npsi = [\"zero\", \"random\"]\ntrials = 2\nsamples = 20000\n",
    ),
    (
        "scenario",
        "[scenario]\nsetup = \"c\"\nsamples = 9000\nrotation_step_deg = 120.0\n",
    ),
];

fn outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn c11_thread_count_determinism() {
    let bin = env!("CARGO_BIN_EXE_wetbench");
    let tmp = tempfile::tempdir().unwrap();
    for (cmd, toml) in DETERMINISM_CONFIGS {
        let config = tmp.path().join(format!("{cmd}.toml"));
        fs::write(&config, toml).unwrap();
        let mut results = Vec::new();
        for threads in ["1", "8"] {
            let out = tmp.path().join(format!("{cmd}-{threads}"));
            let status = Process::new(bin)
                .args([cmd, "--seed", "5", "--threads", threads, "--config"])
                .arg(&config)
                .arg("--out")
                .arg(&out)
                .env_remove("WETBENCH_PRESET")
                .env_remove("WETBENCH_CONFIG")
                .output()
                .unwrap();
            assert!(
                status.status.success(),
                "{cmd}: {}",
                String::from_utf8_lossy(&status.stderr)
            );
            results.push(outputs(&out));
        }
        assert!(!results[0].is_empty(), "{cmd}: no CSV written");
        assert_eq!(results[0], results[1], "{cmd}: output depends on thread count");
        println!("{cmd}: {} file(s) identical", results[0].len());
    }
}

/// Column index by header name.
fn column(path: &Path, name: &str) -> usize {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path).unwrap();
    r.headers().unwrap().iter().position(|h| h == name).unwrap()
}

#[test]
fn trends_outage_correlation_and_array_size() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curves.csv");

    // outage never rises with transmit power
    run_config(
        Command::Curves,
        "[curves]\nparameter = \"beta-dbm\"\nvalues = [-10.0, -6.0, -2.0, 2.0, 6.0, 10.0]\nsamples = 20000\n",
        dir.path(),
    );
    let rows = read_csv(&path);
    let outage = column(&path, "outage");
    for scheme in ["aa-ss-max-e", "aa-ss-min-var", "aa-is", "sa"] {
        let o: Vec<f64> = rows
            .iter()
            .filter(|r| &r[2] == scheme)
            .map(|r| field(r, outage))
            .collect();
        assert_eq!(o.len(), 6);
        assert!(o.windows(2).all(|w| w[1] <= w[0]), "{scheme}: {o:?}");
    }

    // correlation helps the coherent schemes
    run_config(
        Command::Curves,
        "[curves]\nparameter = \"tau\"\nvalues = [0.0, 0.3, 0.6, 0.9]\nsamples = 20000\nschemes = [\"aa-ss-max-e\", \"aa-ss-min-var\"]\n",
        dir.path(),
    );
    let rows = read_csv(&path);
    let mean = column(&path, "harvested_mean_mw");
    for scheme in ["aa-ss-max-e", "aa-ss-min-var"] {
        let h: Vec<f64> = rows
            .iter()
            .filter(|r| &r[2] == scheme)
            .map(|r| field(r, mean))
            .collect();
        println!("{scheme} harvested mean over tau: {h:?}");
        assert!(h.windows(2).all(|w| w[1] > w[0]), "{scheme}: {h:?}");
    }

    // more antennas smooth the incoherent schemes
    run_config(
        Command::Curves,
        "[curves]\nparameter = \"m\"\nvalues = [2.0, 4.0, 8.0, 16.0]\nsamples = 20000\nschemes = [\"aa-is\", \"sa\"]\n",
        dir.path(),
    );
    let rows = read_csv(&path);
    let var = column(&path, "harvested_variance");
    for scheme in ["aa-is", "sa"] {
        let v: Vec<f64> = rows.iter().filter(|r| &r[2] == scheme).map(|r| field(r, var)).collect();
        println!("{scheme} harvested variance over M: {v:?}");
        assert!(v.windows(2).all(|w| w[1] < w[0]), "{scheme}: {v:?}");
    }
}
