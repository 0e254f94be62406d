//! The five command implementations: simulate, estimate, profile, audit, and
//! check-equivalence. Each validates its configuration vocabulary, writes a
//! resolved-config echo, and emits CSV/SVG artifacts with round-trip floats.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ridgeboost_core::audit::build_mae_report;
use ridgeboost_core::boost::{estimate_with, fit_boost, BoostModel, VarianceResiduals};
use ridgeboost_core::features::{
    apply_feature_map, median_heuristic_bandwidth, sample_rff, FeatureMap, Kernel,
};
use ridgeboost_core::functionals::{
    average_derivative_functional, counterfactual_mean_functional, functional_on_features,
    missing_mean_functional, DiffSpec, LinearFunctional,
};
use ridgeboost_core::regress::{default_lambda, fit_krr_centered};
use ridgeboost_core::riesz::equivalence_report_perturbed;
use ridgeboost_core::sim::{
    frozen_truth, run_monte_carlo, true_average_derivative, McSettings,
    DEFAULT_BANDWIDTH_FACTOR, DEFAULT_RFF_FEATURES, ORACLE_SEED,
};
use ridgeboost_core::DenseMatrix;

use crate::config::{require_positive, RawConfig, ResolvedConfig};
use crate::figure::render_figure;
use crate::table::{csv_field, design_from_table, fmt_g17, read_table, write_csv, Design};
use crate::CliError;

fn ensure_out_dir(out: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out)
        .map_err(|e| CliError::Data(format!("cannot create output dir {}: {e}", out.display())))
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

const SIMULATE_KEYS: &[&str] = &[
    "seed",
    "n_grid",
    "mu_grid",
    "replications",
    "d_rff",
    "lambda_init",
    "lambda_boost",
    "bandwidth_factor",
    "step_factor",
    "n_target",
    "truth_draws",
];

pub fn cmd_simulate(
    cfg: &RawConfig,
    out: &Path,
    seed_override: Option<u64>,
) -> Result<i32, CliError> {
    cfg.restrict("simulate", SIMULATE_KEYS)?;
    let seed = seed_override.map_or_else(|| cfg.u64_or("seed", 42), Ok)?;
    let n_grid = cfg.usize_list_or("n_grid", &[100, 300, 500])?;
    let mu_grid = cfg.f64_list_or("mu_grid", &[-1.0, 0.0, 1.0])?;
    let replications = cfg.usize_or("replications", 500)?;
    let d_rff = cfg.usize_or("d_rff", DEFAULT_RFF_FEATURES)?;
    let lambda_init = cfg.auto_or_f64("lambda_init")?;
    let lambda_boost = cfg.auto_or_f64("lambda_boost")?;
    let bandwidth_factor = cfg.f64_or("bandwidth_factor", DEFAULT_BANDWIDTH_FACTOR)?;
    let step_factor = cfg.f64_or("step_factor", 0.1)?;
    let n_target = cfg.auto_or_usize("n_target")?;
    let truth_draws = cfg.usize_or("truth_draws", 1_000_000)?;

    if replications == 0 {
        return Err(CliError::Config("key \"replications\": must be >= 1".into()));
    }
    if n_grid.is_empty() || mu_grid.is_empty() {
        return Err(CliError::Config(
            "keys \"n_grid\"/\"mu_grid\": grids must be non-empty".into(),
        ));
    }
    if let Some(l) = lambda_init {
        require_positive("lambda_init", l)?;
    }
    if let Some(l) = lambda_boost {
        require_positive("lambda_boost", l)?;
    }
    require_positive("bandwidth_factor", bandwidth_factor)?;
    require_positive("step_factor", step_factor)?;
    if d_rff == 0 {
        return Err(CliError::Config("key \"d_rff\": must be >= 1".into()));
    }
    if truth_draws < 1000 {
        return Err(CliError::Config(
            "key \"truth_draws\": need at least 1000 draws".into(),
        ));
    }

    ensure_out_dir(out)?;
    let mut resolved = ResolvedConfig::new("simulate");
    resolved.set("seed", seed);
    resolved.set(
        "n_grid",
        n_grid
            .iter()
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    resolved.set(
        "mu_grid",
        mu_grid
            .iter()
            .map(|m| m.to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    resolved.set("replications", replications);
    resolved.set("d_rff", d_rff);
    resolved.set_opt_f64("lambda_init", lambda_init);
    resolved.set_opt_f64("lambda_boost", lambda_boost);
    resolved.set("bandwidth_factor", bandwidth_factor);
    resolved.set("step_factor", step_factor);
    match n_target {
        Some(m) => resolved.set("n_target", m),
        None => resolved.set("n_target", "auto"),
    }
    resolved.set("truth_draws", truth_draws);
    resolved.note("lambda_init auto rule: n^(-1/2) on the source sample size".to_string());
    resolved.note("lambda_boost auto rule: n^(-5/4) on the source sample size".to_string());

    // Truth per target shift: frozen high-precision oracle when available,
    // otherwise a fresh Monte Carlo oracle seeded from the shift value.
    let mut truths = Vec::with_capacity(mu_grid.len());
    for &mu in &mu_grid {
        let value = match frozen_truth(mu) {
            Some(v) => v,
            None => {
                let est = true_average_derivative(mu, truth_draws, ORACLE_SEED ^ mu.to_bits())
                    .map_err(CliError::from_core)?;
                resolved.note(format!(
                    "truth for mu={mu} from {truth_draws} fresh oracle draws: {}",
                    est.value
                ));
                est.value
            }
        };
        truths.push((mu, value));
    }
    resolved.write(out)?;

    let settings = McSettings {
        d_rff,
        lambda_init,
        lambda_boost,
        bandwidth_factor,
        step_factor,
        n_target,
    };
    let output = run_monte_carlo(&n_grid, &mu_grid, replications, seed, &settings, &truths)
        .map_err(CliError::from_core)?;

    let rows = output.rows.iter().map(|r| {
        format!(
            "{},{},{},{},{},{},{}",
            r.n,
            fmt_g17(r.mu_target),
            r.method.as_str(),
            fmt_g17(r.coverage),
            fmt_g17(r.mean_ci_width),
            fmt_g17(r.mean_bias),
            r.replications
        )
    });
    write_csv(
        &out.join("coverage.csv"),
        "n,mu_target,method,coverage,mean_ci_width,mean_bias,replications",
        rows,
        Some(format!("# failed_replications={}", output.failures.len())),
    )?;

    let svg = render_figure(&output.rows);
    let fig_path = out.join("figure1.svg");
    std::fs::write(&fig_path, svg)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", fig_path.display())))?;

    println!(
        "simulate: {} coverage rows over {} replications ({} failed); wrote {}",
        output.rows.len(),
        replications,
        output.failures.len(),
        out.join("coverage.csv").display()
    );
    Ok(0)
}

// ---------------------------------------------------------------------------
// shared model fitting for estimate / profile / audit
// ---------------------------------------------------------------------------

struct ModelSpec {
    kernel_spec: String,
    bandwidth_spec: String,
    features_spec: String,
    lambda_init: Option<f64>,
    lambda_boost: Option<f64>,
    seed: u64,
}

impl ModelSpec {
    fn from_config(cfg: &RawConfig, seed_override: Option<u64>) -> Result<Self, CliError> {
        let seed = seed_override.map_or_else(|| cfg.u64_or("seed", 42), Ok)?;
        let lambda_init = cfg.auto_or_f64("lambda_init")?;
        if let Some(l) = lambda_init {
            require_positive("lambda_init", l)?;
        }
        let lambda_boost = cfg.auto_or_f64("lambda")?;
        if let Some(l) = lambda_boost {
            require_positive("lambda", l)?;
        }
        Ok(Self {
            kernel_spec: cfg.str_or("kernel", "rbf"),
            bandwidth_spec: cfg.str_or("bandwidth", "median"),
            features_spec: cfg.str_or("features", &format!("rff({DEFAULT_RFF_FEATURES})")),
            lambda_init,
            lambda_boost,
            seed,
        })
    }

    fn echo(&self, resolved: &mut ResolvedConfig) {
        resolved.set("seed", self.seed);
        resolved.set("kernel", &self.kernel_spec);
        resolved.set("bandwidth", &self.bandwidth_spec);
        resolved.set("features", &self.features_spec);
        resolved.set_opt_f64("lambda_init", self.lambda_init);
        resolved.set_opt_f64("lambda", self.lambda_boost);
    }
}

/// Parses `name` or `name(arg, arg)` into the name and raw argument list.
fn split_call(spec: &str) -> Result<(&str, Vec<&str>), CliError> {
    let spec = spec.trim();
    match spec.split_once('(') {
        None => Ok((spec, Vec::new())),
        Some((name, rest)) => {
            let inner = rest.strip_suffix(')').ok_or_else(|| {
                CliError::Config(format!("malformed spec \"{spec}\": missing closing paren"))
            })?;
            let args = if inner.trim().is_empty() {
                Vec::new()
            } else {
                inner.split(',').map(|a| a.trim()).collect()
            };
            Ok((name.trim(), args))
        }
    }
}

fn parse_kernel(spec: &str, bandwidth: f64) -> Result<Kernel, CliError> {
    let (name, args) = split_call(spec)?;
    match name {
        "rbf" => {
            if !args.is_empty() {
                return Err(CliError::Config(
                    "key \"kernel\": rbf takes no arguments (set key \"bandwidth\")".into(),
                ));
            }
            Ok(Kernel::Rbf { bandwidth })
        }
        "linear" => Ok(Kernel::Linear),
        "polynomial" => {
            if args.len() != 2 {
                return Err(CliError::Config(
                    "key \"kernel\": expected polynomial(degree, offset)".into(),
                ));
            }
            let degree: u32 = args[0].parse().map_err(|_| {
                CliError::Config(format!("key \"kernel\": invalid degree \"{}\"", args[0]))
            })?;
            let offset: f64 = args[1].parse().map_err(|_| {
                CliError::Config(format!("key \"kernel\": invalid offset \"{}\"", args[1]))
            })?;
            Ok(Kernel::Polynomial { degree, offset })
        }
        other => Err(CliError::Config(format!(
            "key \"kernel\": unknown kernel \"{other}\" (rbf | linear | polynomial(degree, offset))"
        ))),
    }
}

fn parse_features(
    spec: &str,
    input_dim: usize,
    bandwidth: f64,
    seed: u64,
) -> Result<FeatureMap, CliError> {
    let (name, args) = split_call(spec)?;
    match name {
        "rff" => {
            if args.len() != 1 {
                return Err(CliError::Config(
                    "key \"features\": expected rff(count)".into(),
                ));
            }
            let d_out: usize = args[0].parse().map_err(|_| {
                CliError::Config(format!(
                    "key \"features\": invalid feature count \"{}\"",
                    args[0]
                ))
            })?;
            sample_rff(bandwidth, input_dim, d_out, seed).map_err(CliError::from_core)
        }
        "polynomial" => {
            if args.len() != 1 {
                return Err(CliError::Config(
                    "key \"features\": expected polynomial(degree)".into(),
                ));
            }
            let degree: u32 = args[0].parse().map_err(|_| {
                CliError::Config(format!("key \"features\": invalid degree \"{}\"", args[0]))
            })?;
            FeatureMap::polynomial(input_dim, degree, true).map_err(CliError::from_core)
        }
        "identity" => {
            if !args.is_empty() {
                return Err(CliError::Config(
                    "key \"features\": identity takes no arguments".into(),
                ));
            }
            Ok(FeatureMap::identity(input_dim))
        }
        other => Err(CliError::Config(format!(
            "key \"features\": unknown map \"{other}\" (rff(count) | polynomial(degree) | identity)"
        ))),
    }
}

struct FittedModel {
    model: BoostModel,
    bandwidth: f64,
    lambda_init: f64,
    lambda_boost: f64,
}

fn fit_model(x: &DenseMatrix, y: &[f64], spec: &ModelSpec) -> Result<FittedModel, CliError> {
    let n = x.rows();
    let bandwidth = match spec.bandwidth_spec.as_str() {
        "median" => median_heuristic_bandwidth(x).map_err(CliError::from_core)?,
        raw => {
            let v = raw.parse::<f64>().map_err(|_| {
                CliError::Config(format!(
                    "key \"bandwidth\": expected \"median\" or a number, got \"{raw}\""
                ))
            })?;
            require_positive("bandwidth", v)?
        }
    };
    let kernel = parse_kernel(&spec.kernel_spec, bandwidth)?;
    let map = parse_features(&spec.features_spec, x.cols(), bandwidth, spec.seed)?;
    let lambda_init = spec.lambda_init.unwrap_or_else(|| default_lambda(n));
    let lambda_boost = spec.lambda_boost.unwrap_or_else(|| default_lambda(n));
    let init = fit_krr_centered(x, y, kernel, lambda_init).map_err(CliError::from_core)?;
    let model =
        fit_boost(x, y, Box::new(init), map, lambda_boost).map_err(CliError::from_core)?;
    Ok(FittedModel {
        model,
        bandwidth,
        lambda_init,
        lambda_boost,
    })
}

// ---------------------------------------------------------------------------
// functional specs
// ---------------------------------------------------------------------------

/// Resolves a column reference (name or zero-based index) among covariates.
fn resolve_column(token: &str, names: &[String]) -> Result<usize, CliError> {
    if let Some(idx) = names.iter().position(|n| n == token) {
        return Ok(idx);
    }
    if let Ok(idx) = token.parse::<usize>() {
        if idx < names.len() {
            return Ok(idx);
        }
    }
    Err(CliError::Config(format!(
        "functional refers to unknown covariate \"{token}\" (available: {})",
        names.join(", ")
    )))
}

fn named_args<'a>(args: &[&'a str], spec: &str) -> Result<Vec<(&'a str, &'a str)>, CliError> {
    args.iter()
        .map(|a| {
            a.split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| {
                    CliError::Config(format!(
                        "functional \"{spec}\": expected key=value argument, got \"{a}\""
                    ))
                })
        })
        .collect()
}

/// Expands one functional spec into labeled functionals over the evaluation
/// sample. A counterfactual range `a=lo..hi` produces one functional per unit
/// step, endpoints inclusive.
fn build_functionals(
    spec: &str,
    x_eval: &DenseMatrix,
    names: &[String],
) -> Result<Vec<(String, LinearFunctional)>, CliError> {
    let (name, args) = split_call(spec)?;
    match name {
        "missing_mean" => {
            if !args.is_empty() {
                return Err(CliError::Config(
                    "functional \"missing_mean\" takes no arguments".into(),
                ));
            }
            let theta = missing_mean_functional(x_eval).map_err(CliError::from_core)?;
            Ok(vec![("missing_mean".to_string(), theta)])
        }
        "avg_derivative" => {
            let mut coordinate = None;
            let mut step = None;
            for (k, v) in named_args(&args, spec)? {
                match k {
                    "j" => coordinate = Some(resolve_column(v, names)?),
                    "h" => {
                        let h = v.parse::<f64>().map_err(|_| {
                            CliError::Config(format!(
                                "functional \"{spec}\": invalid step \"{v}\""
                            ))
                        })?;
                        step = Some(require_positive("h", h)?);
                    }
                    other => {
                        return Err(CliError::Config(format!(
                            "functional \"{spec}\": unknown argument \"{other}\""
                        )))
                    }
                }
            }
            let j = coordinate.ok_or_else(|| {
                CliError::Config(format!("functional \"{spec}\": missing argument j="))
            })?;
            let diff = match step {
                Some(h) => DiffSpec::new(j, h),
                None => DiffSpec::with_default_step(x_eval, j),
            }
            .map_err(CliError::from_core)?;
            let label = format!("avg_derivative(j={}, h={})", names[j], diff.step);
            let theta =
                average_derivative_functional(x_eval, diff).map_err(CliError::from_core)?;
            Ok(vec![(label, theta)])
        }
        "counterfactual" => {
            let mut coordinate = None;
            let mut values: Option<Vec<f64>> = None;
            for (k, v) in named_args(&args, spec)? {
                match k {
                    "j" => coordinate = Some(resolve_column(v, names)?),
                    "a" => values = Some(parse_value_grid(v, spec)?),
                    other => {
                        return Err(CliError::Config(format!(
                            "functional \"{spec}\": unknown argument \"{other}\""
                        )))
                    }
                }
            }
            let j = coordinate.ok_or_else(|| {
                CliError::Config(format!("functional \"{spec}\": missing argument j="))
            })?;
            let values = values.ok_or_else(|| {
                CliError::Config(format!("functional \"{spec}\": missing argument a="))
            })?;
            values
                .into_iter()
                .map(|a| {
                    let theta = counterfactual_mean_functional(x_eval, j, a)
                        .map_err(CliError::from_core)?;
                    Ok((format!("counterfactual(j={}, a={a})", names[j]), theta))
                })
                .collect()
        }
        other => Err(CliError::Config(format!(
            "unknown functional \"{other}\" (missing_mean | avg_derivative(j=..[, h=..]) | counterfactual(j=.., a=..))"
        ))),
    }
}

fn parse_value_grid(v: &str, spec: &str) -> Result<Vec<f64>, CliError> {
    if let Some((lo, hi)) = v.split_once("..") {
        let lo: f64 = lo.trim().parse().map_err(|_| {
            CliError::Config(format!("functional \"{spec}\": invalid range start \"{lo}\""))
        })?;
        let hi: f64 = hi.trim().parse().map_err(|_| {
            CliError::Config(format!("functional \"{spec}\": invalid range end \"{hi}\""))
        })?;
        if !(hi >= lo) {
            return Err(CliError::Config(format!(
                "functional \"{spec}\": range end must be >= start"
            )));
        }
        let mut values = Vec::new();
        let mut a = lo;
        while a <= hi + 1e-9 {
            values.push(a);
            a += 1.0;
        }
        Ok(values)
    } else {
        let a: f64 = v.trim().parse().map_err(|_| {
            CliError::Config(format!("functional \"{spec}\": invalid value \"{v}\""))
        })?;
        Ok(vec![a])
    }
}

// ---------------------------------------------------------------------------
// estimate / profile
// ---------------------------------------------------------------------------

const ESTIMATE_KEYS: &[&str] = &[
    "seed",
    "source",
    "target",
    "outcome",
    "functional",
    "kernel",
    "bandwidth",
    "features",
    "lambda_init",
    "lambda",
    "variance",
];

const PROFILE_KEYS: &[&str] = &[
    "seed",
    "source",
    "target",
    "outcome",
    "functionals",
    "kernel",
    "bandwidth",
    "features",
    "lambda_init",
    "lambda",
    "variance",
];

struct LoadedData {
    source: Design,
    x_eval: DenseMatrix,
    covariate_names: Vec<String>,
    source_path: String,
    target_path: Option<String>,
}

fn load_source_and_target(cfg: &RawConfig) -> Result<LoadedData, CliError> {
    let source_path = cfg.require("source")?;
    let outcome = cfg.require("outcome")?;
    let source_table = read_table(Path::new(&source_path))?;
    let source = design_from_table(&source_table, Some(&outcome), Path::new(&source_path))?;

    let target_path = match cfg.str_or("target", "").as_str() {
        "" => None,
        p => Some(p.to_string()),
    };
    let x_eval = match &target_path {
        None => source.x.clone(),
        Some(p) => {
            let table = read_table(Path::new(p))?;
            let design = design_from_table(&table, None, Path::new(p))?;
            if design.covariate_names != source.covariate_names {
                return Err(CliError::Data(format!(
                    "{p}: target columns ({}) must match source covariates ({})",
                    design.covariate_names.join(", "),
                    source.covariate_names.join(", ")
                )));
            }
            design.x
        }
    };
    let covariate_names = source.covariate_names.clone();
    Ok(LoadedData {
        source,
        x_eval,
        covariate_names,
        source_path,
        target_path,
    })
}

fn parse_variance(cfg: &RawConfig) -> Result<(VarianceResiduals, String), CliError> {
    let raw = cfg.str_or("variance", "boosted");
    match raw.as_str() {
        "boosted" => Ok((VarianceResiduals::Boosted, raw)),
        "initial" => Ok((VarianceResiduals::Initial, raw)),
        other => Err(CliError::Config(format!(
            "key \"variance\": expected boosted | initial, got \"{other}\""
        ))),
    }
}

fn run_estimation(
    cfg: &RawConfig,
    out: &Path,
    seed_override: Option<u64>,
    command: &str,
    functional_specs: &[String],
) -> Result<i32, CliError> {
    let data = load_source_and_target(cfg)?;
    let spec = ModelSpec::from_config(cfg, seed_override)?;
    let (variance, variance_raw) = parse_variance(cfg)?;

    let mut family: Vec<(String, LinearFunctional)> = Vec::new();
    for fs in functional_specs {
        family.extend(build_functionals(fs, &data.x_eval, &data.covariate_names)?);
    }
    if family.is_empty() {
        return Err(CliError::Config("no functionals requested".into()));
    }

    let y = data.source.y.as_ref().expect("outcome enforced at load");
    let fitted = fit_model(&data.source.x, y, &spec)?;

    ensure_out_dir(out)?;
    let mut resolved = ResolvedConfig::new(command);
    resolved.set("source", &data.source_path);
    resolved.set("target", data.target_path.as_deref().unwrap_or(""));
    resolved.set("outcome", cfg.require("outcome")?);
    if command == "profile" {
        resolved.set("functionals", functional_specs.join("; "));
    } else {
        resolved.set("functional", &functional_specs[0]);
    }
    resolved.set("variance", &variance_raw);
    spec.echo(&mut resolved);
    resolved.note(format!("resolved bandwidth: {}", fitted.bandwidth));
    resolved.note(format!("resolved lambda_init: {}", fitted.lambda_init));
    resolved.note(format!("resolved lambda: {}", fitted.lambda_boost));
    resolved.write(out)?;

    // One row per functional, all sharing the fitted model and its cached
    // normal-equation factorization.
    let mut rows = Vec::with_capacity(family.len());
    for (label, theta) in &family {
        let est = estimate_with(&fitted.model, theta, variance).map_err(|e| {
            let base = CliError::from_core(e);
            base.with_context(format!("functional \"{label}\""))
        })?;
        rows.push(format!(
            "{},{},{},{},{},{},{},{}",
            csv_field(label),
            fmt_g17(est.theta_hat),
            fmt_g17(est.std_error),
            fmt_g17(est.ci_low),
            fmt_g17(est.ci_high),
            fmt_g17(est.mae_before),
            fmt_g17(est.mae_after),
            fmt_g17(est.equivalence_residual)
        ));
    }
    write_csv(
        &out.join("estimates.csv"),
        "label,theta_hat,std_error,ci_low,ci_high,mae_before,mae_after,equivalence_residual",
        rows,
        None,
    )?;
    println!(
        "{command}: {} estimate rows; wrote {}",
        family.len(),
        out.join("estimates.csv").display()
    );
    Ok(0)
}

pub fn cmd_estimate(
    cfg: &RawConfig,
    out: &Path,
    seed_override: Option<u64>,
) -> Result<i32, CliError> {
    cfg.restrict("estimate", ESTIMATE_KEYS)?;
    let functional = cfg.require("functional")?;
    run_estimation(cfg, out, seed_override, "estimate", &[functional])
}

pub fn cmd_profile(
    cfg: &RawConfig,
    out: &Path,
    seed_override: Option<u64>,
) -> Result<i32, CliError> {
    cfg.restrict("profile", PROFILE_KEYS)?;
    let raw = cfg.require("functionals")?;
    let specs: Vec<String> = raw
        .split(';')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    if specs.is_empty() {
        return Err(CliError::Config(
            "key \"functionals\": expected at least one spec (separate with ;)".into(),
        ));
    }
    run_estimation(cfg, out, seed_override, "profile", &specs)
}

// ---------------------------------------------------------------------------
// audit
// ---------------------------------------------------------------------------

const AUDIT_KEYS: &[&str] = &[
    "seed",
    "source",
    "holdout",
    "outcome",
    "kernel",
    "bandwidth",
    "features",
    "lambda_init",
    "lambda",
];

pub fn cmd_audit(cfg: &RawConfig, out: &Path, seed_override: Option<u64>) -> Result<i32, CliError> {
    cfg.restrict("audit", AUDIT_KEYS)?;
    let source_path = cfg.require("source")?;
    let holdout_path = cfg.require("holdout")?;
    let outcome = cfg.require("outcome")?;
    let spec = ModelSpec::from_config(cfg, seed_override)?;

    let source_table = read_table(Path::new(&source_path))?;
    let source = design_from_table(&source_table, Some(&outcome), Path::new(&source_path))?;
    let holdout_table = read_table(Path::new(&holdout_path))?;
    let holdout = design_from_table(&holdout_table, Some(&outcome), Path::new(&holdout_path))?;
    if holdout.covariate_names != source.covariate_names {
        return Err(CliError::Data(format!(
            "{holdout_path}: holdout columns ({}) must match source covariates ({})",
            holdout.covariate_names.join(", "),
            source.covariate_names.join(", ")
        )));
    }

    let y = source.y.as_ref().expect("outcome enforced at load");
    let hy = holdout.y.as_ref().expect("outcome enforced at load");
    let fitted = fit_model(&source.x, y, &spec)?;
    let resid_boost = fitted.model.boosted_residuals().map_err(CliError::from_core)?;
    let hold_mae = fitted
        .model
        .holdout_mae(&holdout.x, hy)
        .map_err(CliError::from_core)?;
    let report = build_mae_report(
        fitted.model.training_features(),
        fitted.lambda_boost,
        fitted.model.init_residuals(),
        &resid_boost,
        Some(hold_mae),
    )
    .map_err(CliError::from_core)?;

    ensure_out_dir(out)?;
    let mut resolved = ResolvedConfig::new("audit");
    resolved.set("source", &source_path);
    resolved.set("holdout", &holdout_path);
    resolved.set("outcome", &outcome);
    spec.echo(&mut resolved);
    resolved.note(format!("resolved bandwidth: {}", fitted.bandwidth));
    resolved.note(format!("resolved lambda_init: {}", fitted.lambda_init));
    resolved.note(format!("resolved lambda: {}", fitted.lambda_boost));
    resolved.write(out)?;

    let flag = if report.contraction_ok { "PASS" } else { "FAIL" };
    write_csv(
        &out.join("audit.csv"),
        "mae_init,mae_boosted,contraction_factor,holdout_mae,contraction",
        std::iter::once(format!(
            "{},{},{},{},{flag}",
            fmt_g17(report.mae_init),
            fmt_g17(report.mae_boosted),
            fmt_g17(report.contraction_factor),
            fmt_g17(report.holdout_mae.unwrap_or(f64::NAN)),
        )),
        None,
    )?;
    write_csv(
        &out.join("eigenvalues.csv"),
        "index,eigenvalue",
        report
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(i, ev)| format!("{i},{}", fmt_g17(*ev))),
        None,
    )?;
    println!(
        "audit: contraction {flag} (mae {} -> {}, factor {}); holdout mae {}",
        report.mae_init,
        report.mae_boosted,
        report.contraction_factor,
        hold_mae
    );
    Ok(0)
}

// ---------------------------------------------------------------------------
// check-equivalence
// ---------------------------------------------------------------------------

const CHECK_KEYS: &[&str] = &["seed", "instances", "perturb_beta"];

const EQUIVALENCE_LAMBDAS: [f64; 4] = [1e-3, 1e-1, 1.0, 10.0];

pub fn cmd_check_equivalence(
    cfg: &RawConfig,
    out: &Path,
    seed_override: Option<u64>,
) -> Result<i32, CliError> {
    cfg.restrict("check-equivalence", CHECK_KEYS)?;
    let seed = seed_override.map_or_else(|| cfg.u64_or("seed", 42), Ok)?;
    let instances = cfg.usize_or("instances", 100)?;
    if instances == 0 {
        return Err(CliError::Config("key \"instances\": must be >= 1".into()));
    }
    // Internal test hook: a nonzero perturbation breaks the identity on
    // purpose so the failure path of this command stays exercised.
    let perturb_beta = cfg.f64_or("perturb_beta", 0.0)?;

    ensure_out_dir(out)?;
    let mut resolved = ResolvedConfig::new("check-equivalence");
    resolved.set("seed", seed);
    resolved.set("instances", instances);
    resolved.set("perturb_beta", perturb_beta);
    resolved.write(out)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_disc = 0.0f64;
    let mut max_rel = 0.0f64;
    let mut worst = String::new();
    let mut failures = 0usize;
    for k in 0..instances {
        let lambda = EQUIVALENCE_LAMBDAS[k % EQUIVALENCE_LAMBDAS.len()];
        let n = rng.gen_range(20..=80);
        let d = rng.gen_range(2..=4);
        let map = if k % 2 == 0 {
            FeatureMap::identity(d)
        } else {
            FeatureMap::polynomial(d, 2, true).map_err(CliError::from_core)?
        };
        let x = random_matrix(&mut rng, n, d);
        let z: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let m = rng.gen_range(5..=30);
        let x_q = random_matrix(&mut rng, m, d);
        let theta = match k % 3 {
            0 => missing_mean_functional(&x_q).map_err(CliError::from_core)?,
            1 => {
                let j = rng.gen_range(0..d);
                let diff = DiffSpec::with_default_step(&x_q, j).map_err(CliError::from_core)?;
                average_derivative_functional(&x_q, diff).map_err(CliError::from_core)?
            }
            _ => {
                let j = rng.gen_range(0..d);
                let a = rng.gen_range(-1.5..1.5);
                counterfactual_mean_functional(&x_q, j, a).map_err(CliError::from_core)?
            }
        };
        let theta_phi = functional_on_features(&theta, &map).map_err(CliError::from_core)?;
        let phi = apply_feature_map(&map, &x).map_err(CliError::from_core)?;
        let report = equivalence_report_perturbed(&phi, &z, &theta_phi, lambda, perturb_beta)
            .map_err(CliError::from_core)?;
        let tol = 1e-8 * (1.0 + report.plugin_side.abs());
        let rel = report.discrepancy / tol;
        if report.discrepancy > max_disc {
            max_disc = report.discrepancy;
        }
        if rel > max_rel {
            max_rel = rel;
            worst = format!(
                "instance {k}: functional {}, lambda {lambda}, n {n}, features {}",
                theta.label(),
                map.output_dim()
            );
        }
        if report.discrepancy > tol {
            failures += 1;
        }
    }

    println!("equivalence check: {instances} randomized instances");
    println!("  plug-in side:  theta(Phi)' beta_hat   (ridge route)");
    println!("  weighted side: (1/n) alpha_hat' z     (Riesz-weight route)");
    println!("  max |difference|: {max_disc:.3e}");
    println!("  max difference / tolerance: {max_rel:.3e}  ({worst})");
    if failures == 0 {
        println!("  verdict: PASS (all within 1e-8 * (1 + |estimate|))");
        Ok(0)
    } else {
        println!("  verdict: FAIL ({failures} of {instances} instances above tolerance)");
        Ok(1)
    }
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize, d: usize) -> DenseMatrix {
    let mut x = DenseMatrix::zeros(n, d);
    for i in 0..n {
        for j in 0..d {
            x.set(i, j, rng.gen_range(-2.0..2.0));
        }
    }
    x
}

// ---------------------------------------------------------------------------
// shared plumbing
// ---------------------------------------------------------------------------

pub fn load_config(path: Option<&PathBuf>) -> Result<RawConfig, CliError> {
    match path {
        Some(p) => RawConfig::from_file(p),
        None => Ok(RawConfig::empty()),
    }
}
