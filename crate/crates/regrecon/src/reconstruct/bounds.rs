use serde::Serialize;

use super::{local_averages, reconstruct};
use crate::modelled::ModelledDistribution;
use crate::models::{Model, ModelError};
use crate::report::{fit_log2_log2, ConvergenceReport, SlopeFit};
use crate::structures::TestFamily;

#[derive(Clone, Debug)]
pub struct AverageOptions {
    /// Λ^C localization constant: offsets |h| ≤ C 2^{-(n+1)} enter the shell.
    pub localization: f64,
    pub p: f64,
    pub q: f64,
}

impl Default for AverageOptions {
    fn default() -> Self {
        AverageOptions {
            localization: 2.0,
            p: f64::INFINITY,
            q: f64::INFINITY,
        }
    }
}

/// Consistency of consecutive local averages: for each n the shell quantity
/// Σ_{h ∈ Λ^C_{n+1}} ‖ |f̄^n(x) − Γ_{x,x+h} f̄^{n+1}(x+h)|_ζ ‖_{l^p_n},
/// reported raw (for the decay-rate fit) and normalized by 2^{-n(γ-ζ)} (whose
/// sup over n is the finite q=∞ statistic).
pub fn average_consistency(
    f: &ModelledDistribution,
    model: &dyn Model,
    levels: std::ops::RangeInclusive<u32>,
    gamma: f64,
    opts: &AverageOptions,
) -> Result<ConvergenceReport, ModelError> {
    let structure = model.structure();
    let grid = model.grid();
    let sector_levels: Vec<f64> = structure
        .levels()
        .into_iter()
        .filter(|&l| l < gamma - 1e-12)
        .collect();
    let mut report = ConvergenceReport::new("n", "raw_shell");
    let mut normalized_sup: f64 = 0.0;
    let mut q_accum = 0.0;
    let mut raw_by_n = Vec::new();
    for n in levels.clone() {
        let coarse = local_averages(f, model, n)?;
        let fine = local_averages(f, model, n + 1)?;
        let fine_cells = fine.points.len();
        let spacing_fine = 1.0 / fine_cells as f64;
        let jmax = opts.localization.floor() as i64;
        let mut raw_total = 0.0f64;
        let mut norm_total = 0.0f64;
        for &level in &sector_levels {
            let rows = structure.indices_at_level(level);
            let weight = 0.5f64.powi(n as i32); // l^p_n measure 2^{-|s| n}
            let mut raw_shell = 0.0;
            let mut norm_shell = 0.0;
            for j in -jmax..=jmax {
                let mut raw_vals = Vec::with_capacity(coarse.points.len());
                for (k, x) in coarse.points.iter().enumerate() {
                    let fi = 2 * k; // Λ_n ⊂ Λ_{n+1}
                    let yi = fi as i64 + j;
                    let yi = if grid.periodic() {
                        yi.rem_euclid(fine_cells as i64) as usize
                    } else if yi >= 0 && (yi as usize) < fine_cells {
                        yi as usize
                    } else {
                        continue;
                    };
                    let y = yi as f64 * spacing_fine;
                    let transported = model.gamma_map(*x, y).apply(fine.value_at_index(yi));
                    let diff: f64 = rows
                        .iter()
                        .map(|&r| (coarse.value_at_index(k)[r] - transported[r]).abs())
                        .fold(0.0, f64::max);
                    raw_vals.push(diff);
                }
                if raw_vals.is_empty() {
                    continue;
                }
                let lp = if opts.p.is_infinite() {
                    raw_vals.iter().copied().fold(0.0, f64::max)
                } else {
                    (raw_vals.iter().map(|v| v.powf(opts.p)).sum::<f64>() * weight)
                        .powf(1.0 / opts.p)
                };
                raw_shell += lp;
                norm_shell += lp / 0.5f64.powi(n as i32).powf(gamma - level);
            }
            raw_total = raw_total.max(raw_shell);
            norm_total = norm_total.max(norm_shell);
            report.push_level(n as f64, raw_shell, format!("{level}"));
        }
        raw_by_n.push((n as f64, raw_total));
        normalized_sup = normalized_sup.max(norm_total);
        if opts.q.is_finite() {
            q_accum += norm_total.powf(opts.q);
        }
    }
    let ns: Vec<f64> = raw_by_n.iter().map(|r| r.0).collect();
    let raws: Vec<f64> = raw_by_n.iter().map(|r| r.1).collect();
    report.fit = crate::report::fit_level_log2(&ns, &raws);
    report
        .extras
        .insert("normalized_sup".into(), normalized_sup);
    if opts.q.is_finite() {
        report
            .extras
            .insert("q_statistic".into(), q_accum.powf(1.0 / opts.q));
    }
    Ok(report)
}

#[derive(Clone, Debug)]
pub struct ReconOptions {
    pub centers: usize,
    pub min_scale_log2: u32,
    pub max_scale_log2: u32,
    pub p: f64,
    pub q: f64,
    /// optional weakening: ratios divide by δ^{γ-ε} instead of δ^γ
    pub epsilon: f64,
}

impl Default for ReconOptions {
    fn default() -> Self {
        ReconOptions {
            centers: 64,
            min_scale_log2: 2,
            max_scale_log2: 8,
            p: f64::INFINITY,
            q: f64::INFINITY,
            epsilon: 0.0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RatioRow {
    pub x: f64,
    pub scale_log2: u32,
    pub profile: usize,
    pub pairing: f64,
    pub ratio: f64,
}

/// Ratios |⟨Rf − Π_x f(x), η^δ_x⟩| / δ^{γ-ε} per (x, scale, profile), the
/// composite statistic, and the small-δ slope of the un-normalized pairing.
#[derive(Clone, Debug, Serialize)]
pub struct ReconBoundReport {
    pub rows: Vec<RatioRow>,
    pub sup_ratio: f64,
    pub composite: f64,
    pub fit: Option<SlopeFit>,
    pub epsilon: f64,
    pub gamma: f64,
}

fn recon_sweep(
    model: &dyn Model,
    pairing_target: &dyn Fn(f64, usize, f64) -> f64,
    gamma: f64,
    family: &TestFamily,
    opts: &ReconOptions,
) -> ReconBoundReport {
    let grid = model.grid();
    let stride = (grid.len() / opts.centers.max(1)).max(1);
    let mut rows = Vec::new();
    let mut per_scale_sup = Vec::new();
    let mut composite_q = 0.0f64;
    let mut composite_sup = 0.0f64;
    for j in opts.min_scale_log2..=opts.max_scale_log2 {
        let delta = 0.5f64.powi(j as i32);
        let mut scale_sup = 0.0f64;
        let mut lp_values = Vec::new();
        for xi in (0..grid.len()).step_by(stride) {
            let x = grid.point(xi);
            let mut sup_eta = 0.0f64;
            let mut any = false;
            for (pi, profile) in family.profiles().iter().enumerate() {
                let Some(v) = grid.pair(
                    |yi, y| pairing_target(x, yi, y),
                    profile,
                    x,
                    delta,
                ) else {
                    continue;
                };
                any = true;
                let pairing = v.abs();
                let ratio = pairing / delta.powf(gamma - opts.epsilon);
                sup_eta = sup_eta.max(ratio);
                rows.push(RatioRow {
                    x,
                    scale_log2: j,
                    profile: pi,
                    pairing,
                    ratio,
                });
            }
            if any {
                lp_values.push(sup_eta);
                scale_sup = scale_sup.max(sup_eta);
            }
        }
        let lp = if opts.p.is_infinite() {
            scale_sup
        } else {
            (lp_values.iter().map(|v| v.powf(opts.p)).sum::<f64>() * grid.spacing()
                * stride as f64)
                .powf(1.0 / opts.p)
        };
        if opts.q.is_finite() {
            composite_q += lp.powf(opts.q);
        } else {
            composite_sup = composite_sup.max(lp);
        }
        // un-normalized sup pairing at this scale for the slope fit
        let sup_pairing = rows
            .iter()
            .filter(|r| r.scale_log2 == j)
            .map(|r| r.pairing)
            .fold(0.0, f64::max);
        per_scale_sup.push((delta, sup_pairing));
    }
    let sup_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let composite = if opts.q.is_finite() {
        composite_q.powf(1.0 / opts.q)
    } else {
        composite_sup
    };
    let deltas: Vec<f64> = per_scale_sup.iter().map(|r| r.0).collect();
    let sups: Vec<f64> = per_scale_sup.iter().map(|r| r.1).collect();
    ReconBoundReport {
        rows,
        sup_ratio,
        composite,
        fit: fit_log2_log2(&deltas, &sups),
        epsilon: opts.epsilon,
        gamma,
    }
}

/// The reconstruction-bound estimator for one model and one modelled
/// distribution.
pub fn recon_bound(
    model: &dyn Model,
    f: &ModelledDistribution,
    gamma: f64,
    family: &TestFamily,
    opts: &ReconOptions,
) -> Result<ReconBoundReport, ModelError> {
    let rf = reconstruct(model, f);
    let grid = model.grid();
    let target = |x: f64, yi: usize, y: f64| {
        rf[yi] - model.pi_vector(x, f.at(grid.index_nearest(x)), y)
    };
    Ok(recon_sweep(model, &target, gamma, family, opts))
}

/// The two-model difference statistic
/// ⟨(R_Z f − Π_x f(x)) − (R_Z̄ f̄ − Π̄_x f̄(x)), η^δ_x⟩, following the
/// difference decomposition used in the continuity bound.
pub fn recon_two_model_bound(
    model_a: &dyn Model,
    f_a: &ModelledDistribution,
    model_b: &dyn Model,
    f_b: &ModelledDistribution,
    gamma: f64,
    family: &TestFamily,
    opts: &ReconOptions,
) -> Result<ReconBoundReport, ModelError> {
    if model_a.grid() != model_b.grid() || model_a.structure().len() != model_b.structure().len()
    {
        return Err(ModelError::StructureMismatch);
    }
    let ra = reconstruct(model_a, f_a);
    let rb = reconstruct(model_b, f_b);
    let grid = model_a.grid();
    let target = |x: f64, yi: usize, y: f64| {
        let xi = grid.index_nearest(x);
        (ra[yi] - model_a.pi_vector(x, f_a.at(xi), y))
            - (rb[yi] - model_b.pi_vector(x, f_b.at(xi), y))
    };
    Ok(recon_sweep(model_a, &target, gamma, family, opts))
}
