//! One function per subcommand. Each writes its CSV files and returns the
//! summary lines printed on stdout.

use std::f64::consts::PI;
use std::path::Path;

use rand::Rng;

use wetbench_core::analytic::{dist_aa_is, dist_aa_ss, f_phase, EnergyDistribution, PhaseInputs};
use wetbench_core::channel::{ArrayConfig, CorrelationModel, PhaseShift};
use wetbench_core::harvester::{dbm_to_mw, mw_to_dbm, EhCurve};
use wetbench_core::montecarlo::{
    histogram_from_cdf, run, validate_equal_sum, ExperimentSpec, HistogramSpec, PhiPolicy, ValidationOptions,
};
use wetbench_core::optimize::{max_energy_shift, search_phase, SearchOptions};
use wetbench_core::rng::{derive_seed, stream_rng};
use wetbench_core::scenario::{
    evaluate_plan, scenario_a, scenario_b, scenario_c, sweep_plans, BeaconPlan, Cluster, Deployment, Layout,
    ScenarioSetup,
};
use wetbench_core::schemes::{Scheme, SchemeConfig};

use crate::config::{parse_group, PsiPolicy, RunConfig, ScenarioName, SchemeChoice, SweepParameter};
use crate::error::CliError;
use crate::output::{csv_file, finish, Header};

pub struct Context<'a> {
    pub config: &'a RunConfig,
    pub seed: u64,
    pub out: &'a Path,
    pub header: Header,
}

fn experiment(
    ctx: &Context,
    array: &ArrayConfig,
    choice: SchemeChoice,
    beta: f64,
    curve: EhCurve,
    samples: usize,
) -> Result<ExperimentSpec, CliError> {
    let cfg = SchemeConfig::new(choice.scheme(), beta, choice.shift(array)?).map_err(CliError::numeric)?;
    let mut spec = ExperimentSpec::new(array.clone(), cfg, curve, samples, ctx.seed);
    if ctx.config.array.phi.is_none() {
        spec.phi_policy = PhiPolicy::UniformRandomPerSample;
    }
    Ok(spec)
}

fn check_samples(name: &str, samples: usize) -> Result<(), CliError> {
    if samples == 0 {
        return Err(CliError::config(format!("{name}: must be at least 1")));
    }
    Ok(())
}

pub fn curves(ctx: &Context) -> Result<Vec<String>, CliError> {
    let sec = &ctx.config.curves;
    if sec.values.is_empty() {
        return Err(CliError::config("curves.values: sweep grid is empty"));
    }
    if sec.values.iter().any(|v| !v.is_finite()) {
        return Err(CliError::config("curves.values: values must be finite"));
    }
    let base = ctx.config.array.build()?;
    if sec.parameter == SweepParameter::Phi {
        return phase_curves(ctx, &base);
    }
    check_samples("curves.samples", sec.samples)?;
    if sec.schemes.is_empty() {
        return Err(CliError::config("curves.schemes: no schemes selected"));
    }
    let curve = ctx.config.harvester.build()?;
    let (mut w, path) = csv_file(ctx.out, "curves.csv", &ctx.header)?;
    w.write_record([
        "parameter",
        "value",
        "scheme",
        "rf_mean_mw",
        "harvested_mean_mw",
        "harvested_variance",
        "outage",
    ])?;
    let label = match sec.parameter {
        SweepParameter::BetaDbm => "beta_dbm",
        SweepParameter::Tau => "tau",
        SweepParameter::Kappa => "kappa",
        SweepParameter::M => "m",
        SweepParameter::Phi => unreachable!("handled above"),
    };
    let mut rows = 0;
    for &v in &sec.values {
        let mut array = base.clone();
        let mut beta = dbm_to_mw(sec.beta_dbm);
        match sec.parameter {
            SweepParameter::BetaDbm => beta = dbm_to_mw(v),
            SweepParameter::Tau => array.correlation = CorrelationModel::Exponential { tau: v },
            SweepParameter::Kappa => array.kappa = v,
            SweepParameter::M => {
                if v < 1.0 || v.fract() != 0.0 {
                    return Err(CliError::config(format!(
                        "curves.values: M = {v} is not a positive integer"
                    )));
                }
                array.m = v as usize;
            }
            SweepParameter::Phi => unreachable!("handled above"),
        }
        array
            .validate()
            .map_err(|e| CliError::config(format!("curves.values: {e}")))?;
        for &choice in &sec.schemes {
            let spec = experiment(ctx, &array, choice, beta, curve, sec.samples)?;
            let st = run(&spec).map_err(CliError::numeric)?;
            w.serialize((
                label,
                v,
                choice.label(),
                st.rf_mean,
                st.harvested_mean,
                st.harvested_variance,
                st.outage,
            ))?;
            rows += 1;
        }
    }
    finish(w, &path)?;
    Ok(vec![format!("wrote {rows} rows to {}", path.display())])
}

fn phase_curves(ctx: &Context, base: &ArrayConfig) -> Result<Vec<String>, CliError> {
    let sec = &ctx.config.curves;
    let ms = if sec.ms.is_empty() {
        vec![base.m]
    } else {
        sec.ms.clone()
    };
    if ms.contains(&0) {
        return Err(CliError::config("curves.ms: array sizes must be positive"));
    }
    let (mut w, path) = csv_file(ctx.out, "curves.csv", &ctx.header)?;
    w.write_record(["phi", "m", "f_zero_shift", "f_max_energy_shift"])?;
    for &m in &ms {
        let zero = PhaseShift::zeros(m);
        let alt = max_energy_shift(m);
        for &phi in &sec.values {
            w.serialize((phi, m, f_phase(&zero, phi), f_phase(&alt, phi)))?;
        }
    }
    finish(w, &path)?;
    Ok(vec![format!(
        "wrote {} rows to {}",
        ms.len() * sec.values.len(),
        path.display()
    )])
}

pub fn distributions(ctx: &Context) -> Result<Vec<String>, CliError> {
    let sec = &ctx.config.distributions;
    check_samples("distributions.samples", sec.samples)?;
    if sec.bins == 0 {
        return Err(CliError::config("distributions.bins: must be at least 1"));
    }
    for (name, r) in [("rf_range", sec.rf_range), ("harvested_range", sec.harvested_range)] {
        if !(r[0] < r[1]) {
            return Err(CliError::config(format!(
                "distributions.{name}: lower edge must be below upper edge"
            )));
        }
    }
    let array = ctx.config.array.build()?;
    let curve = ctx.config.harvester.build()?;
    let beta = dbm_to_mw(sec.beta_dbm);
    let (mut w, path) = csv_file(ctx.out, "distributions.csv", &ctx.header)?;
    w.write_record(["scheme", "quantity", "bin_lo", "bin_hi", "empirical", "analytic"])?;
    let mut lines = Vec::new();
    for &choice in &sec.schemes {
        let mut spec = experiment(ctx, &array, choice, beta, curve, sec.samples)?;
        spec.histogram = Some(HistogramSpec {
            bins: sec.bins,
            rf_range: (sec.rf_range[0], sec.rf_range[1]),
            harvested_range: (sec.harvested_range[0], sec.harvested_range[1]),
        });
        let st = run(&spec).map_err(CliError::numeric)?;
        let analytic = analytic_distribution(ctx, &array, choice, beta)?;
        let rf_model = match &analytic {
            Some(d) => Some(
                histogram_from_cdf(|x| d.cdf(x), sec.bins, sec.rf_range[0], sec.rf_range[1])
                    .map_err(CliError::numeric)?,
            ),
            None => None,
        };
        let hv_model = match &analytic {
            Some(d) => Some(
                histogram_from_cdf(
                    |y| d.harvested_cdf(&curve, y),
                    sec.bins,
                    sec.harvested_range[0],
                    sec.harvested_range[1],
                )
                .map_err(CliError::numeric)?,
            ),
            None => None,
        };
        let parts = [
            ("rf", st.rf_histogram.as_ref(), rf_model.as_ref()),
            ("harvested", st.harvested_histogram.as_ref(), hv_model.as_ref()),
        ];
        for (quantity, empirical, model) in parts {
            let empirical = empirical.expect("histogram requested");
            for i in 0..empirical.bins() {
                let e = empirical.edges();
                w.serialize((
                    choice.label(),
                    quantity,
                    e[i],
                    e[i + 1],
                    empirical.mass()[i],
                    model.map(|h| h.mass()[i]),
                ))?;
            }
        }
        lines.push(format!(
            "{}: harvested mean {:.6} mW, outage {:.6}",
            choice.label(),
            st.harvested_mean,
            st.outage
        ));
    }
    finish(w, &path)?;
    lines.push(format!("wrote {}", path.display()));
    Ok(lines)
}

/// Closed-form RF distribution, available for AA schemes at a fixed azimuth.
fn analytic_distribution(
    ctx: &Context,
    array: &ArrayConfig,
    choice: SchemeChoice,
    beta: f64,
) -> Result<Option<EnergyDistribution>, CliError> {
    if ctx.config.array.phi.is_none() {
        return Ok(None);
    }
    let inputs = PhaseInputs::from_config(array, &choice.shift(array)?).map_err(CliError::numeric)?;
    let d = match choice.scheme() {
        Scheme::AaSs => dist_aa_ss(beta, &inputs),
        Scheme::AaIs => dist_aa_is(beta, &inputs),
        Scheme::Sa => return Ok(None),
    };
    d.map(Some).map_err(CliError::numeric)
}

pub fn optimize(ctx: &Context) -> Result<Vec<String>, CliError> {
    let sec = &ctx.config.optimize;
    let objective = sec.objective()?;
    let options = SearchOptions {
        restarts: sec.restarts,
        grid: sec.grid,
        max_sweeps: sec.max_sweeps,
        seed: ctx.seed,
    };
    let res = search_phase(objective, sec.m, &options).map_err(CliError::numeric)?;
    let (mut w, path) = csv_file(ctx.out, "optimize.csv", &ctx.header)?;
    w.write_record(["restart", "sweeps", "value", "best", "psi"])?;
    for (i, t) in res.traces.iter().enumerate() {
        w.serialize((
            i,
            t.history.len() - 1,
            t.value,
            i == res.best_restart,
            join(t.shift.as_slice()),
        ))?;
    }
    finish(w, &path)?;
    let in_pi: Vec<String> = res.shift.as_slice().iter().map(|p| format!("{:.4}", p / PI)).collect();
    Ok(vec![
        format!("best value {:.10} from restart {}", res.value, res.best_restart),
        format!("psi / pi = [{}]", in_pi.join(", ")),
        format!("wrote {}", path.display()),
    ])
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn validate(ctx: &Context) -> Result<Vec<String>, CliError> {
    let sec = &ctx.config.validate;
    if sec.trials == 0 {
        return Err(CliError::config("validate.trials: must be at least 1"));
    }
    check_samples("validate.samples", sec.samples)?;
    if sec.ms.is_empty() || sec.kappas.is_empty() || sec.phis.is_empty() || sec.psi.is_empty() {
        return Err(CliError::config("validate: every grid axis needs at least one value"));
    }
    if sec.ms.contains(&0) {
        return Err(CliError::config("validate.ms: array sizes must be positive"));
    }
    let options = ValidationOptions {
        trials: sec.trials,
        samples: sec.samples,
        bins: sec.bins,
        range: (sec.range[0], sec.range[1]),
        beta: sec.beta,
        seed: ctx.seed,
    };
    let (mut w, path) = csv_file(ctx.out, "validate.csv", &ctx.header)?;
    w.write_record([
        "m",
        "psi",
        "kappa",
        "phi",
        "mean_d_analytic",
        "mean_d_simulated",
        "max_trial_d_analytic",
    ])?;
    let mut means = Vec::new();
    let mut point = 0u64;
    for &m in &sec.ms {
        for &policy in &sec.psi {
            for &kappa in &sec.kappas {
                for &phi in &sec.phis {
                    let psi = match policy {
                        PsiPolicy::Zero => PhaseShift::zeros(m),
                        PsiPolicy::Random => random_shift(m, derive_seed(ctx.seed, point)),
                    };
                    point += 1;
                    let report = validate_equal_sum(m, kappa, phi, &psi, &options).map_err(CliError::numeric)?;
                    let worst = report.trials.iter().map(|t| t.analytic).fold(0.0, f64::max);
                    let label = match policy {
                        PsiPolicy::Zero => "zero",
                        PsiPolicy::Random => "random",
                    };
                    w.serialize((m, label, kappa, phi, report.mean_analytic, report.mean_simulated, worst))?;
                    means.push(report.mean_analytic);
                }
            }
        }
    }
    finish(w, &path)?;
    let max = means.iter().cloned().fold(0.0, f64::max);
    let mean = means.iter().sum::<f64>() / means.len() as f64;
    Ok(vec![
        format!("grid points: {}", means.len()),
        format!("max mean d_B: {max:.6}"),
        format!("grid average of mean d_B: {mean:.6}"),
        format!("wrote {}", path.display()),
    ])
}

fn random_shift(m: usize, seed: u64) -> PhaseShift {
    let mut rng = stream_rng(seed, 0);
    let mut v: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
    v[0] = 0.0;
    PhaseShift::new(v).expect("reference phase is zero")
}

pub fn scenario_setup(ctx: &Context) -> Result<ScenarioSetup, CliError> {
    let sec = &ctx.config.scenario;
    let mut setup = match sec.setup {
        ScenarioName::A => scenario_a(),
        ScenarioName::B => scenario_b(),
        ScenarioName::C => scenario_c(),
    };
    if let Some(step) = sec.rotation_step_deg {
        if !(step > 0.0 && step <= 360.0) {
            return Err(CliError::config("scenario.rotation_step_deg: must be in (0, 360]"));
        }
        let n = (360.0 / step).floor() as usize;
        setup.rotations = (0..n).map(|k| (k as f64 * step).to_radians()).collect();
    }
    if !sec.clusters.is_empty() {
        let clusters = sec
            .clusters
            .iter()
            .map(|c| Cluster {
                center: c.center_deg.to_radians(),
                spread: c.spread_deg.to_radians(),
                radial: (c.radial[0], c.radial[1]),
                count: c.count,
            })
            .collect();
        setup.deployment = Deployment {
            layout: Layout::Clusters(clusters),
            pathloss: setup.deployment.pathloss,
        };
    }
    if !sec.templates.is_empty() {
        setup.templates = sec
            .templates
            .iter()
            .map(|t| t.iter().map(|g| parse_group(g)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<_, _>>()?;
    }
    let array = ctx.config.array.build()?;
    // the scenario keeps its own azimuths; only M, kappa and correlation apply
    setup.array = ArrayConfig { phi: 0.0, ..array };
    Ok(setup)
}

fn describe(plan: &BeaconPlan) -> String {
    let groups: Vec<String> = plan
        .groups
        .iter()
        .map(|g| format!("{}[{}..{}]", g.scheme, g.start, g.start + g.len()))
        .collect();
    format!("{} @ {:.1} deg", groups.join(" + "), plan.rotation.to_degrees())
}

pub fn scenario(ctx: &Context) -> Result<Vec<String>, CliError> {
    let sec = &ctx.config.scenario;
    check_samples("scenario.samples", sec.samples)?;
    let setup = scenario_setup(ctx)?;
    let curve = ctx.config.harvester.build()?;
    let devices = setup.deployment.devices(setup.layout_seed).map_err(CliError::numeric)?;
    for t in &setup.templates {
        BeaconPlan {
            rotation: 0.0,
            groups: t.clone(),
        }
        .validate(setup.array.m)
        .map_err(|e| CliError::config(format!("scenario.templates: {e}")))?;
    }
    let pl = &setup.deployment.pathloss;
    let sweep = sweep_plans(
        &devices,
        pl,
        &setup.rotations,
        &setup.templates,
        &setup.array,
        &curve,
        sec.samples,
        ctx.seed,
    )
    .map_err(CliError::numeric)?;
    let baseline_plan = sweep.entries[0].plan.clone();
    let baseline = evaluate_plan(
        &devices,
        pl,
        &baseline_plan,
        &setup.array,
        &curve,
        sec.samples,
        ctx.seed,
    )
    .map_err(CliError::numeric)?;

    let (mut w, path) = csv_file(ctx.out, "scenario_plans.csv", &ctx.header)?;
    w.write_record([
        "candidate",
        "template",
        "rotation_deg",
        "min_mw",
        "min_dbm",
        "gain_db_vs_baseline",
    ])?;
    let per_template = setup.rotations.len();
    let mut template_best = vec![(f64::NEG_INFINITY, 0usize); setup.templates.len()];
    for (i, e) in sweep.entries.iter().enumerate() {
        let t = i / per_template;
        if e.min > template_best[t].0 {
            template_best[t] = (e.min, i);
        }
        w.serialize((
            i,
            t,
            e.plan.rotation.to_degrees(),
            e.min,
            dbm(e.min),
            10.0 * (e.min / baseline.min).log10(),
        ))?;
    }
    finish(w, &path)?;

    let (mut d, dpath) = csv_file(ctx.out, "scenario_devices.csv", &ctx.header)?;
    d.write_record(["device", "distance_m", "azimuth_deg", "best_plan_mw", "baseline_mw"])?;
    for (i, dev) in devices.iter().enumerate() {
        d.serialize((
            i,
            dev.distance,
            dev.azimuth.to_degrees(),
            sweep.best_evaluation.per_device[i],
            baseline.per_device[i],
        ))?;
    }
    finish(d, &dpath)?;

    let mut lines = vec![format!(
        "baseline {}: min {:.6} mW ({:.3} dBm)",
        describe(&baseline_plan),
        baseline.min,
        dbm(baseline.min)
    )];
    for (t, (v, i)) in template_best.iter().enumerate() {
        lines.push(format!(
            "template {t} best {}: min {:.6} mW, {:+.3} dB vs baseline",
            describe(&sweep.entries[*i].plan),
            v,
            10.0 * (v / baseline.min).log10()
        ));
    }
    lines.push(format!(
        "best plan {}: min {:.6} mW",
        describe(&sweep.best),
        sweep.best_evaluation.min
    ));
    lines.push(format!("wrote {} and {}", path.display(), dpath.display()));
    Ok(lines)
}

fn dbm(mw: f64) -> f64 {
    mw_to_dbm(mw).unwrap_or(f64::NEG_INFINITY)
}
