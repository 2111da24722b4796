//! The named experiment suites behind the `regrecon` binary: each builds its
//! inputs from the config, runs one study, and emits a JSON summary plus CSV
//! tables. Everything is deterministic given the seed.

use std::collections::BTreeMap;
use std::rc::Rc;

use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::config::{config_hash, ConfigError, ExperimentConfig};
use crate::hopf::{
    coproduct, enumerate_forests, enumerate_trees, random_rational_character, Character, Forest,
};
use crate::modelled::{
    density_approximant, dgamma_distance, elementary_md, DGammaOptions, SmoothBump,
};
use crate::models::{check_algebraic, HolderModel, Model, ModelError, SeminormOptions};
use crate::mollify::{
    mollification_convergence, mollification_norm_bound, mollify_model, mollify_model_uncorrected,
    Mollifier,
};
use crate::reconstruct::{recon_bound, recon_two_model_bound, ReconOptions};
use crate::report::{fit_level_log2, ConvergenceReport};
use crate::rough::{
    mollified_integral_sweep, mollify_rough_path, rough_integral, rough_integral_table,
    rough_path_distance, rp_to_model, BranchedRoughPath, ControlledPath, RoughPathError,
};
use crate::structures::{make_bump, RegStructure, TestFamily, WorkingGrid};
use crate::weierstrass::Weierstrass;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("unknown experiment {0:?}")]
    UnknownExperiment(String),
    #[error("models module rejected the input: {0}")]
    Model(#[from] ModelError),
    #[error("rough-path module rejected the input: {0}")]
    Rough(#[from] RoughPathError),
}

/// The result of one experiment run: summary fields, raw tables, and the
/// overall verdict.
pub struct ExperimentOutcome {
    pub experiment: String,
    pub config_hash: String,
    pub metrics: BTreeMap<String, Value>,
    pub pass: bool,
    pub tables: Vec<(String, String)>,
}

impl ExperimentOutcome {
    pub fn summary_json(&self) -> Value {
        json!({
            "experiment": self.experiment,
            "config_hash": self.config_hash,
            "metrics": self.metrics,
            "pass": self.pass,
        })
    }
}

pub const EXPERIMENTS: &[&str] = &[
    "hopf-selftest",
    "mollify-rate",
    "mollify-norms",
    "density-rate",
    "recon-bound",
    "recon-two-model",
    "rp-lift-check",
    "rp-integral-rate",
    "rp-mollify-rate",
    "gen-path",
];

pub fn run(config: &ExperimentConfig, raw_text: &str) -> Result<ExperimentOutcome, RunError> {
    let hash = config_hash(raw_text);
    let mut outcome = ExperimentOutcome {
        experiment: config.experiment.name.clone(),
        config_hash: hash,
        metrics: BTreeMap::new(),
        pass: false,
        tables: Vec::new(),
    };
    match config.experiment.name.as_str() {
        "hopf-selftest" => hopf_selftest(config, &mut outcome),
        "mollify-rate" => mollify_rate(config, &mut outcome)?,
        "mollify-norms" => mollify_norms(config, &mut outcome)?,
        "density-rate" => density_rate(config, &mut outcome)?,
        "recon-bound" => recon_bound_experiment(config, &mut outcome)?,
        "recon-two-model" => recon_two_model(config, &mut outcome)?,
        "rp-lift-check" => rp_lift_check(config, &mut outcome)?,
        "rp-integral-rate" => rp_integral_rate(config, &mut outcome)?,
        "rp-mollify-rate" => rp_mollify_rate(config, &mut outcome)?,
        "gen-path" => gen_path(config, &mut outcome),
        other => return Err(RunError::UnknownExperiment(other.to_string())),
    }
    Ok(outcome)
}

fn holder_context(
    config: &ExperimentConfig,
) -> Result<(Rc<dyn Model>, TestFamily, SeminormOptions), ModelError> {
    let st = RegStructure::two_level(
        config.model.alpha,
        config.model.gamma,
        config.model.test_order,
    );
    let grid = WorkingGrid::torus(1 << config.grid.resolution_log2);
    let w = Weierstrass::new(config.model.alpha, config.model.k_terms, config.experiment.seed);
    let model: Rc<dyn Model> =
        Rc::new(HolderModel::new(st, grid, |_| 1.0, move |t| w.eval(t))?);
    let family = TestFamily::standard(config.model.test_order);
    let opts = SeminormOptions {
        centers: 64,
        max_scale_log2: config.grid.resolution_log2.saturating_sub(2),
        pair_samples: 96,
    };
    Ok((model, family, opts))
}

fn holder_concrete(config: &ExperimentConfig) -> Result<HolderModel, ModelError> {
    let st = RegStructure::two_level(
        config.model.alpha,
        config.model.gamma,
        config.model.test_order,
    );
    let grid = WorkingGrid::torus(1 << config.grid.resolution_log2);
    let w = Weierstrass::new(config.model.alpha, config.model.k_terms, config.experiment.seed);
    HolderModel::new(st, grid, |_| 1.0, move |t| w.eval(t))
}

fn report_table(outcome: &mut ExperimentOutcome, name: &str, report: &ConvergenceReport) {
    let mut buffer = Vec::new();
    report.write_csv(&mut buffer).expect("in-memory write");
    outcome
        .tables
        .push((name.to_string(), String::from_utf8(buffer).expect("utf8")));
}

fn fit_metrics(outcome: &mut ExperimentOutcome, prefix: &str, report: &ConvergenceReport) {
    if let Some(fit) = report.fit {
        outcome
            .metrics
            .insert(format!("{prefix}_slope"), json!(fit.slope));
        outcome
            .metrics
            .insert(format!("{prefix}_intercept"), json!(fit.intercept));
        outcome
            .metrics
            .insert(format!("{prefix}_r_squared"), json!(fit.r_squared));
    }
}

fn hopf_selftest(config: &ExperimentConfig, outcome: &mut ExperimentOutcome) {
    let mut pass = true;
    let d = 2u32;
    let max_nodes = 4usize;
    let trees = enumerate_trees(d, max_nodes);
    let mut counts = BTreeMap::new();
    for n in 1..=max_nodes {
        counts.insert(
            format!("trees_with_{n}_nodes"),
            json!(trees.iter().filter(|t| t.node_count() == n).count()),
        );
    }
    outcome.metrics.insert("tree_counts".into(), json!(counts));

    // coassociativity and counit laws, exact integer coefficients
    let forests = enumerate_forests(d, max_nodes);
    let mut coassoc_ok = true;
    let mut counit_ok = true;
    let mut grading_ok = true;
    for forest in &forests {
        let cp = coproduct(forest, max_nodes).expect("within truncation");
        let mut lhs: BTreeMap<(Forest, Forest, Forest), i64> = BTreeMap::new();
        let mut rhs: BTreeMap<(Forest, Forest, Forest), i64> = BTreeMap::new();
        let mut left_contract: BTreeMap<Forest, i64> = BTreeMap::new();
        let mut right_contract: BTreeMap<Forest, i64> = BTreeMap::new();
        for (l, r, c) in cp.terms() {
            grading_ok &= l.node_count() + r.node_count() == forest.node_count();
            for (ll, lr, c2) in coproduct(l, max_nodes).unwrap().terms() {
                *lhs.entry((ll.clone(), lr.clone(), r.clone())).or_insert(0) += c * c2;
            }
            for (rl, rr, c2) in coproduct(r, max_nodes).unwrap().terms() {
                *rhs.entry((l.clone(), rl.clone(), rr.clone())).or_insert(0) += c * c2;
            }
            if l.is_empty() {
                *left_contract.entry(r.clone()).or_insert(0) += c;
            }
            if r.is_empty() {
                *right_contract.entry(l.clone()).or_insert(0) += c;
            }
        }
        lhs.retain(|_, v| *v != 0);
        rhs.retain(|_, v| *v != 0);
        left_contract.retain(|_, v| *v != 0);
        right_contract.retain(|_, v| *v != 0);
        coassoc_ok &= lhs == rhs;
        let expected: BTreeMap<Forest, i64> = [(forest.clone(), 1)].into_iter().collect();
        counit_ok &= left_contract == expected && right_contract == expected;
    }
    pass &= coassoc_ok && counit_ok && grading_ok;

    // character group laws on seeded random rational characters
    let mut rng = ChaCha8Rng::seed_from_u64(config.experiment.seed);
    let mut group_ok = true;
    for _ in 0..5 {
        let g = random_rational_character(d, max_nodes, &mut rng);
        let h = random_rational_character(d, max_nodes, &mut rng);
        let k = random_rational_character(d, max_nodes, &mut rng);
        let eps: Character<BigRational> = Character::counit(d, max_nodes);
        group_ok &= g.product(&h).unwrap().product(&k).unwrap()
            == g.product(&h.product(&k).unwrap()).unwrap();
        group_ok &= g.product(&g.inverse()).unwrap() == eps;
        group_ok &= g.inverse().product(&g).unwrap() == eps;
        group_ok &= g.product(&eps).unwrap() == g;
    }
    pass &= group_ok;

    outcome.metrics.insert("coassociativity".into(), json!(coassoc_ok));
    outcome.metrics.insert("counit_laws".into(), json!(counit_ok));
    outcome.metrics.insert("grading".into(), json!(grading_ok));
    outcome.metrics.insert("group_laws".into(), json!(group_ok));
    outcome.pass = pass;
}

fn mollify_rate(config: &ExperimentConfig, outcome: &mut ExperimentOutcome) -> Result<(), RunError> {
    let (model, family, opts) = holder_context(config)?;
    let widths = ExperimentConfig::widths_from_log2(&config.sweep.lambda_log2);
    let report = mollification_convergence(
        model,
        &widths,
        config.model.gamma,
        config.model.epsilon,
        config.model.mollifier_order,
        &family,
        &opts,
    )?;
    let slope = report.fit.map(|f| f.slope).unwrap_or(f64::NAN);
    outcome.metrics.insert("epsilon".into(), json!(config.model.epsilon));
    outcome.metrics.insert("tolerance".into(), json!(0.05));
    fit_metrics(outcome, "rate", &report);
    report_table(outcome, "mollify_rate", &report);
    outcome.pass = slope >= 0.05;
    Ok(())
}

fn mollify_norms(config: &ExperimentConfig, outcome: &mut ExperimentOutcome) -> Result<(), RunError> {
    let (model, family, opts) = holder_context(config)?;
    let widths = ExperimentConfig::widths_from_log2(&config.sweep.lambda_log2);
    let report = mollification_norm_bound(
        Rc::clone(&model),
        &widths,
        config.model.gamma,
        config.model.mollifier_order,
        &family,
        &opts,
    )?;
    let max_ratio = report.extras["max_ratio"];
    outcome.metrics.insert("max_ratio".into(), json!(max_ratio));
    outcome.metrics.insert("bound".into(), json!(10.0));
    report_table(outcome, "mollify_norms", &report);

    // negative control: drop the polynomial correction and re-measure
    let control = norm_ratio_without_correction(
        model,
        &widths,
        config.model.gamma,
        config.model.mollifier_order,
        &family,
        &opts,
    )?;
    outcome
        .metrics
        .insert("uncorrected_max_ratio".into(), json!(control));
    outcome.pass = max_ratio <= 10.0;
    Ok(())
}

pub fn norm_ratio_without_correction(
    base: Rc<dyn Model>,
    widths: &[f64],
    gamma: f64,
    mollifier_order: u32,
    family: &TestFamily,
    opts: &SeminormOptions,
) -> Result<f64, ModelError> {
    use crate::models::model_norm;
    let base_norm = model_norm(base.as_ref(), gamma, family, opts)?.z_norm();
    let mut worst: f64 = 0.0;
    for &width in widths {
        let broken = mollify_model_uncorrected(
            Rc::clone(&base),
            Mollifier::standard(mollifier_order, width),
        )?;
        let norm = model_norm(&broken, gamma, family, opts)?.z_norm();
        worst = worst.max(norm / base_norm);
    }
    Ok(worst)
}

fn density_rate(config: &ExperimentConfig, outcome: &mut ExperimentOutcome) -> Result<(), RunError> {
    let model = holder_concrete(config)?;
    let gamma = config.model.gamma;
    let bump = SmoothBump {
        profile: make_bump(2),
        center: 0.5,
        width: 0.3,
    };
    let f = elementary_md(0.5, &bump, model.tau_index(), &model, gamma)?;
    let st = model.structure().clone();
    let grid = model.grid().clone();
    let levels: Vec<f64> = st
        .levels()
        .into_iter()
        .filter(|&l| l < gamma - 1e-12)
        .collect();
    let mut per_level_errors: Vec<Vec<f64>> = vec![Vec::new(); levels.len()];
    let mut report = ConvergenceReport::new("n", "sup_error");
    for &n in &config.sweep.levels {
        let approx = density_approximant(&f, n, &model, gamma)?;
        let diff = approx.sub(&f);
        for (li, &level) in levels.iter().enumerate() {
            let sup = (0..grid.len())
                .map(|i| diff.level_magnitude(&st, i, level))
                .fold(0.0, f64::max);
            per_level_errors[li].push(sup);
            report.push_level(n as f64, sup, format!("{level}"));
        }
    }
    let ns: Vec<f64> = config.sweep.levels.iter().map(|&n| n as f64).collect();
    let mut pass = true;
    for (li, &level) in levels.iter().enumerate() {
        let fit = fit_level_log2(&ns, &per_level_errors[li]);
        let rate = fit.map(|f| -f.slope).unwrap_or(f64::NAN);
        let gate = (gamma - level) - 0.1;
        outcome
            .metrics
            .insert(format!("rate_level_{level}"), json!(rate));
        outcome
            .metrics
            .insert(format!("gate_level_{level}"), json!(gate));
        pass &= rate >= gate;
    }
    report_table(outcome, "density_rate", &report);
    outcome.pass = pass;
    Ok(())
}

fn recon_bound_experiment(
    config: &ExperimentConfig,
    outcome: &mut ExperimentOutcome,
) -> Result<(), RunError> {
    let model = holder_concrete(config)?;
    let gamma = config.model.gamma;
    let alpha = config.model.alpha;
    let family = TestFamily::standard(config.model.test_order);
    let opts = ReconOptions::default();

    // constant modelled distribution: all pairings vanish
    let constant = crate::modelled::constant_md(0.25, model.tau_index(), &model, gamma);
    let constant_report = recon_bound(&model, &constant, gamma, &family, &opts)?;
    outcome
        .metrics
        .insert("constant_sup_ratio".into(), json!(constant_report.sup_ratio));

    // localized constant: fitted small-δ slope against the guaranteed exponent
    let bump = SmoothBump {
        profile: make_bump(2),
        center: 0.5,
        width: 0.3,
    };
    let f = elementary_md(0.5, &bump, model.tau_index(), &model, gamma)?;
    let report = recon_bound(&model, &f, gamma, &family, &opts)?;
    let slope = report.fit.map(|f| f.slope).unwrap_or(f64::NAN);
    outcome.metrics.insert("slope".into(), json!(slope));
    outcome.metrics.insert("gate".into(), json!(alpha - 0.1));
    outcome
        .metrics
        .insert("sup_ratio".into(), json!(report.sup_ratio));

    // negative control: one corrupted coefficient destroys the slope
    let mut corrupted = f.clone();
    corrupted.at_mut(model.grid().len() / 2)[model.unit_index()] += 0.5;
    let corrupted_report = recon_bound(&model, &corrupted, gamma, &family, &opts)?;
    let corrupted_slope = corrupted_report.fit.map(|f| f.slope).unwrap_or(f64::NAN);
    outcome
        .metrics
        .insert("corrupted_slope".into(), json!(corrupted_slope));

    let mut csv = String::from("x,scale_log2,profile,pairing,ratio\n");
    for row in &report.rows {
        csv.push_str(&format!(
            "{:.17e},{},{},{:.17e},{:.17e}\n",
            row.x, row.scale_log2, row.profile, row.pairing, row.ratio
        ));
    }
    outcome.tables.push(("recon_bound_ratios".into(), csv));
    outcome.pass = constant_report.sup_ratio <= 1e-10 && slope >= alpha - 0.1;
    Ok(())
}

fn recon_two_model(config: &ExperimentConfig, outcome: &mut ExperimentOutcome) -> Result<(), RunError> {
    let (model, family, _) = holder_context(config)?;
    let gamma = config.model.gamma;
    let bump = SmoothBump {
        profile: make_bump(2),
        center: 0.5,
        width: 0.3,
    };
    let tau = 1usize; // abstract symbol of the two-level structure
    let f = elementary_md(0.5, &bump, tau, model.as_ref(), gamma)?;
    let opts = ReconOptions::default();
    let mut report = ConvergenceReport::new("lambda", "two_model_sup");
    for &j in &config.sweep.lambda_log2 {
        let width = 0.5f64.powi(j as i32);
        let mollified = mollify_model(
            Rc::clone(&model),
            Mollifier::standard(config.model.mollifier_order, width),
        )?;
        let f_tilde = elementary_md(0.5, &bump, tau, &mollified, gamma)?;
        let two = recon_two_model_bound(
            model.as_ref(),
            &f,
            &mollified,
            &f_tilde,
            gamma,
            &family,
            &opts,
        )?;
        report.push(width, two.sup_ratio);
        // right side of the continuity bound, recorded for comparison
        let dist = dgamma_distance(
            &f,
            &f_tilde,
            model.as_ref(),
            &mollified,
            gamma,
            f64::INFINITY,
            f64::INFINITY,
            &DGammaOptions {
                x_stride: 8,
                max_offsets_per_shell: 16,
            },
        )?;
        outcome
            .metrics
            .insert(format!("dgamma_distance_2^-{j}"), json!(dist));
    }
    let first = report.rows.first().map(|r| r.statistic).unwrap_or(0.0);
    let last = report.rows.last().map(|r| r.statistic).unwrap_or(0.0);
    outcome.metrics.insert("first".into(), json!(first));
    outcome.metrics.insert("last".into(), json!(last));
    outcome
        .metrics
        .insert("inversion_fraction".into(), json!(report.inversion_fraction()));
    report_table(outcome, "recon_two_model", &report);
    outcome.pass = last < first;
    Ok(())
}

fn rough_context(config: &ExperimentConfig) -> Result<(BranchedRoughPath, Vec<Vec<f64>>), RunError> {
    let grid = WorkingGrid::torus(1 << config.grid.resolution_log2);
    let w = Weierstrass::new(config.model.alpha, config.model.k_terms, config.experiment.seed);
    let comps = vec![grid.sample(|t| w.eval(t))];
    let n_max = (1.0 / config.model.alpha).floor() as usize;
    let n_max = if n_max as f64 * config.model.alpha >= 1.0 {
        n_max - 1
    } else {
        n_max
    };
    let path = BranchedRoughPath::lift(grid, &comps, config.model.alpha, n_max.clamp(1, 3))?;
    Ok((path, comps))
}

fn rp_lift_check(config: &ExperimentConfig, outcome: &mut ExperimentOutcome) -> Result<(), RunError> {
    // exactness on the linear path
    let grid = WorkingGrid::interval(1 << 8);
    let comps = vec![grid.sample(|t| t)];
    let linear = BranchedRoughPath::lift(grid, &comps, 0.3, 2)?;
    let bullet = crate::hopf::Forest::single(crate::hopf::Tree::leaf(1));
    let cherry = crate::hopf::Forest::single(crate::hopf::Tree::new(
        1,
        vec![crate::hopf::Tree::leaf(1)],
    ));
    let (s, t) = (0usize, 128usize);
    let dt = 0.5;
    let bullet_err = (linear.pair_increment(s, t, &bullet) - dt).abs();
    let cherry_err = (linear.pair_increment(s, t, &cherry) - dt * dt / 2.0).abs();
    outcome.metrics.insert("linear_bullet_error".into(), json!(bullet_err));
    outcome.metrics.insert("linear_cherry_error".into(), json!(cherry_err));

    // Chen and multiplicativity on the Weierstrass lift
    let (path, comps) = rough_context(config)?;
    let n = path.grid().len();
    let triples: Vec<(usize, usize, usize)> = (0..10)
        .map(|i| {
            let s = i * n / 16;
            (s, s + n / 8, s + n / 4)
        })
        .collect();
    let chen = path.chen_residual_from_scratch(&comps, &triples);
    let mult = path.multiplicativity_residual();
    outcome.metrics.insert("chen_residual".into(), json!(chen));
    outcome
        .metrics
        .insert("multiplicativity_residual".into(), json!(mult));

    // the model correspondence
    let model = rp_to_model(Rc::new(path));
    let report = check_algebraic(&model, 60, config.experiment.seed);
    outcome
        .metrics
        .insert("model_algebra_residual".into(), json!(report.max_residual()));
    outcome
        .metrics
        .insert("holder_statistic".into(), json!(model.path().holder_statistic(96)));
    outcome.pass = bullet_err < 1e-12
        && cherry_err < 1e-12
        && chen <= 1e-8
        && mult <= 1e-12
        && report.max_residual() <= 1e-10;
    Ok(())
}

fn rp_integral_rate(config: &ExperimentConfig, outcome: &mut ExperimentOutcome) -> Result<(), RunError> {
    // exactness: X(t) = t with its tautological controlled lift
    let grid = WorkingGrid::interval(1 << 10);
    let comps = vec![grid.sample(|t| t)];
    let linear = BranchedRoughPath::lift(grid, &comps, 0.4, 2)?;
    let z = ControlledPath::tautological(&linear, 1);
    let mut exact_err: f64 = 0.0;
    let t_index = 512usize;
    for level in 0..=8 {
        let v = rough_integral(&linear, &z, 1, 0, t_index, level)?;
        exact_err = exact_err.max((v - 0.125).abs());
    }
    outcome.metrics.insert("linear_exact_error".into(), json!(exact_err));

    // rate on the rough path
    let (path, _) = rough_context(config)?;
    let z = ControlledPath::tautological(&path, 1);
    let span = path.grid().len() / 2;
    let lo = *config.sweep.mesh_levels.iter().min().expect("nonempty");
    let hi = *config.sweep.mesh_levels.iter().max().expect("nonempty");
    let report = rough_integral_table(&path, &z, 1, 0, span, lo..=hi)?;
    let rate = report.fit.map(|f| -f.slope).unwrap_or(f64::NAN);
    let gate = 2.0 * config.model.alpha - 1.0 - 0.1;
    outcome.metrics.insert("rate".into(), json!(rate));
    outcome.metrics.insert("gate".into(), json!(gate));
    fit_metrics(outcome, "rate_fit", &report);
    report_table(outcome, "rp_integral_rate", &report);
    outcome.pass = exact_err <= 1e-12 && rate >= gate;
    Ok(())
}

fn rp_mollify_rate(config: &ExperimentConfig, outcome: &mut ExperimentOutcome) -> Result<(), RunError> {
    let (path, _) = rough_context(config)?;
    let widths = ExperimentConfig::widths_from_log2(&config.sweep.widths_log2);
    let order = config.model.mollifier_order;

    // Chen residual of the smoothed path over sampled triples
    let mut rng = ChaCha8Rng::seed_from_u64(config.experiment.seed);
    let smooth = mollify_rough_path(&path, &Mollifier::standard(order, widths[0]))?;
    let n = smooth.grid().len();
    let mut chen: f64 = 0.0;
    use rand::Rng;
    for _ in 0..100 {
        let s = rng.gen_range(0..n);
        let u = rng.gen_range(0..n);
        let t = rng.gen_range(0..n);
        let composed = smooth
            .increment(s, u)
            .product(&smooth.increment(u, t))
            .expect("same truncation");
        let whole = smooth.increment(s, t);
        for forest in smooth.forests() {
            chen = chen.max((composed.value(forest) - whole.value(forest)).abs());
        }
    }
    outcome.metrics.insert("chen_residual".into(), json!(chen));

    // weakened-metric convergence rate
    let mut dist_report = ConvergenceReport::new("epsilon", "weakened_distance");
    for &width in &widths {
        let smooth = mollify_rough_path(&path, &Mollifier::standard(order, width))?;
        let d = rough_path_distance(&path, &smooth, config.sweep.eps_weak, 96)?;
        dist_report.push(width, d);
    }
    let params = dist_report.params();
    let stats = dist_report.statistics();
    dist_report.fit = crate::report::fit_log2_log2(&params[1..], &stats[1..]);
    let dist_slope = dist_report.fit.map(|f| f.slope).unwrap_or(f64::NAN);
    outcome.metrics.insert("distance_slope".into(), json!(dist_slope));
    outcome
        .metrics
        .insert("distance_gate".into(), json!(config.sweep.eps_weak - 0.05));
    report_table(outcome, "rp_mollify_distance", &dist_report);

    // reconstruction identity for the smoothed controlled path
    let z = ControlledPath::tautological(&path, 1);
    let recon_residual = smoothing_reconstruction_residual(&path, &z, order, widths[0])?;
    outcome
        .metrics
        .insert("reconstruction_residual".into(), json!(recon_residual));

    // the nonstandard integral approximation sweep
    let span = path.grid().len() / 4;
    let rows = mollified_integral_sweep(&path, &z, 1, &widths, order, 0, span)?;
    let mut sweep_report = ConvergenceReport::new("epsilon", "integral_error");
    for row in &rows {
        sweep_report.push(row.width, row.error);
    }
    let monotone = sweep_report.inversion_fraction() == 0.0;
    outcome.metrics.insert("integral_monotone".into(), json!(monotone));
    report_table(outcome, "rp_mollify_integral", &sweep_report);

    outcome.pass = chen <= 1e-8
        && recon_residual <= 1e-6
        && monotone
        && dist_slope >= config.sweep.eps_weak - 0.05;
    Ok(())
}

/// |R̃(Z^ε) − φ^ε * Z| through the full model pipeline.
pub fn smoothing_reconstruction_residual(
    path: &BranchedRoughPath,
    z: &ControlledPath,
    order: u32,
    width: f64,
) -> Result<f64, RunError> {
    use crate::reconstruct::reconstruct;
    use crate::rough::mollify_controlled_path;
    let grid = path.grid().clone();
    let mollifier = Mollifier::standard(order, width);
    let smooth_path = mollify_rough_path(path, &mollifier)?;
    let smooth_z = mollify_controlled_path(z, path, &mollifier, false)?;
    let kernel = mollifier.kernel(0, &grid)?;
    let raw: Vec<f64> = (0..grid.len()).map(|m| z.at(m)[0]).collect();
    let conv = grid.convolve(&raw, &kernel);
    let model = rp_to_model(Rc::new(smooth_path));
    let f = model.controlled_to_modelled(&smooth_z);
    let rf = reconstruct(&model, &f);
    Ok((0..grid.len())
        .map(|m| (rf[m] - conv[m]).abs())
        .fold(0.0, f64::max))
}

fn gen_path(config: &ExperimentConfig, outcome: &mut ExperimentOutcome) {
    let grid = WorkingGrid::torus(1 << config.grid.resolution_log2);
    let w = Weierstrass::new(config.model.alpha, config.model.k_terms, config.experiment.seed);
    let samples = grid.sample(|t| w.eval(t));
    let mut csv = String::from("t,X1\n");
    for (i, v) in samples.iter().enumerate() {
        csv.push_str(&format!("{:.17e},{:.17e}\n", grid.point(i), v));
    }
    outcome.tables.push(("path".into(), csv));
    let hc = crate::weierstrass::sampled_holder_constant(
        &samples[..samples.len().min(1 << 10)],
        config.model.alpha,
        false,
    );
    outcome
        .metrics
        .insert("holder_constant_sampled".into(), json!(hc));
    outcome.metrics.insert("alpha".into(), json!(config.model.alpha));
    outcome.pass = hc.is_finite();
}

/// The experiments the acceptance suite reuses directly.
pub fn experiment_names() -> &'static [&'static str] {
    EXPERIMENTS
}
