use serde::Serialize;

use super::{Model, ModelError};
use crate::structures::TestFamily;

/// Controls for the seminorm sweeps: how many base points, which dyadic
/// scales, and how many pairs per separation bucket.
#[derive(Clone, Debug)]
pub struct SeminormOptions {
    pub centers: usize,
    pub max_scale_log2: u32,
    pub pair_samples: usize,
}

impl Default for SeminormOptions {
    fn default() -> Self {
        SeminormOptions {
            centers: 96,
            max_scale_log2: 9,
            pair_samples: 128,
        }
    }
}

/// Worst ratio observed in one (level, dyadic scale) cell, with the attaining
/// base point, symbol and profile index.
#[derive(Clone, Debug, Serialize)]
pub struct ScaleEntry {
    pub level: f64,
    pub scale_log2: u32,
    pub worst: f64,
    pub at_x: f64,
    pub tau: usize,
    pub profile: usize,
}

/// Lower-bound estimates of the model seminorms, per (level, scale) cell and
/// aggregated; the aggregates are the maxima of the cells.
#[derive(Clone, Debug, Default, Serialize)]
pub struct SeminormReport {
    pub pi_entries: Vec<ScaleEntry>,
    pub gamma_entries: Vec<ScaleEntry>,
    pub pi_norm: f64,
    pub gamma_norm: f64,
}

impl SeminormReport {
    pub fn z_norm(&self) -> f64 {
        self.pi_norm + self.gamma_norm
    }
}

fn centers(model: &dyn Model, count: usize) -> Vec<f64> {
    let grid = model.grid();
    let stride = (grid.len() / count.max(1)).max(1);
    (0..grid.len())
        .step_by(stride)
        .map(|i| grid.point(i))
        .collect()
}

/// Exponent used on level ζ: ζ - ε on non-integer levels, ζ on integer ones.
fn weakened_exponent(level: f64, eps: f64) -> f64 {
    if (level - level.round()).abs() < 1e-9 {
        level
    } else {
        level - eps
    }
}

fn sweep_pi(
    value: &dyn Fn(f64, usize, f64) -> f64,
    model: &dyn Model,
    gamma: f64,
    eps: f64,
    family: &TestFamily,
    opts: &SeminormOptions,
) -> Result<Vec<ScaleEntry>, ModelError> {
    let grid = model.grid();
    let structure = model.structure();
    let xs = centers(model, opts.centers);
    let mut entries = Vec::new();
    for level in structure.levels() {
        if level >= gamma - 1e-12 {
            continue;
        }
        let exponent = weakened_exponent(level, eps);
        for j in 0..=opts.max_scale_log2 {
            let delta = 0.5f64.powi(j as i32);
            let mut best: Option<ScaleEntry> = None;
            for tau in structure.indices_at_level(level) {
                for &x in &xs {
                    for (pi_idx, profile) in family.profiles().iter().enumerate() {
                        let Some(v) = grid.pair(|_, y| value(x, tau, y), profile, x, delta)
                        else {
                            continue;
                        };
                        if !v.is_finite() {
                            return Err(ModelError::NonFiniteSample { tau, x });
                        }
                        let ratio = v.abs() / delta.powf(exponent);
                        if best.as_ref().is_none_or(|b| ratio > b.worst) {
                            best = Some(ScaleEntry {
                                level,
                                scale_log2: j,
                                worst: ratio,
                                at_x: x,
                                tau,
                                profile: pi_idx,
                            });
                        }
                    }
                }
            }
            if let Some(entry) = best {
                entries.push(entry);
            }
        }
    }
    Ok(entries)
}

/// Lower-bound estimate of ‖Π‖_γ from the finite test family on dyadic
/// scales; monotone in the family and the scale range by construction.
pub fn estimate_pi_seminorm(
    model: &dyn Model,
    gamma: f64,
    family: &TestFamily,
    opts: &SeminormOptions,
) -> Result<SeminormReport, ModelError> {
    let entries = sweep_pi(
        &|x, tau, y| model.pi(x, tau, y),
        model,
        gamma,
        0.0,
        family,
        opts,
    )?;
    let pi_norm = entries.iter().map(|e| e.worst).fold(0.0, f64::max);
    Ok(SeminormReport {
        pi_entries: entries,
        gamma_entries: Vec::new(),
        pi_norm,
        gamma_norm: 0.0,
    })
}

fn sweep_gamma(
    entry_value: &dyn Fn(f64, f64, usize, usize) -> f64,
    model: &dyn Model,
    gamma: f64,
    eps: f64,
    opts: &SeminormOptions,
) -> Vec<ScaleEntry> {
    let grid = model.grid();
    let structure = model.structure();
    let levels = structure.levels();
    let mut entries = Vec::new();
    for &level in &levels {
        if level >= gamma - 1e-12 {
            continue;
        }
        let exponent_level = weakened_exponent(level, eps);
        for j in 1..=opts.max_scale_log2 {
            let separation = 0.5f64.powi(j as i32);
            let steps = (separation * grid.len() as f64).round() as usize;
            if steps == 0 {
                continue;
            }
            let stride = (grid.len() / opts.pair_samples.max(1)).max(1);
            let mut best: Option<ScaleEntry> = None;
            for tau in structure.indices_at_level(level) {
                for xi in (0..grid.len()).step_by(stride) {
                    let x = grid.point(xi);
                    let yi = xi + steps;
                    if !grid.periodic() && yi >= grid.len() {
                        continue;
                    }
                    let y = grid.point(yi % grid.len());
                    let dist = grid.distance(x, y);
                    if dist <= 0.0 || dist >= 1.0 {
                        continue;
                    }
                    let g = entry_value;
                    for &beta in &levels {
                        if beta >= exponent_level - 1e-12 {
                            continue;
                        }
                        let mut comp: f64 = 0.0;
                        for row in structure.indices_at_level(beta) {
                            comp = comp.max(g(x, y, row, tau).abs());
                        }
                        let ratio = comp / dist.powf(exponent_level - beta);
                        if best.as_ref().is_none_or(|b| ratio > b.worst) {
                            best = Some(ScaleEntry {
                                level,
                                scale_log2: j,
                                worst: ratio,
                                at_x: x,
                                tau,
                                profile: 0,
                            });
                        }
                    }
                }
            }
            if let Some(e) = best {
                entries.push(e);
            }
        }
    }
    entries
}

/// Estimate of ‖Γ‖_γ over sampled pairs at dyadic separations.
pub fn estimate_gamma_seminorm(
    model: &dyn Model,
    gamma: f64,
    opts: &SeminormOptions,
) -> SeminormReport {
    let entries = sweep_gamma(
        &|x, y, row, tau| model.gamma_map(x, y).get(row, tau),
        model,
        gamma,
        0.0,
        opts,
    );
    let gamma_norm = entries.iter().map(|e| e.worst).fold(0.0, f64::max);
    SeminormReport {
        pi_entries: Vec::new(),
        gamma_entries: entries,
        pi_norm: 0.0,
        gamma_norm,
    }
}

/// Both seminorm estimates; ‖Z‖_γ = ‖Π‖_γ + ‖Γ‖_γ.
pub fn model_norm(
    model: &dyn Model,
    gamma: f64,
    family: &TestFamily,
    opts: &SeminormOptions,
) -> Result<SeminormReport, ModelError> {
    let mut report = estimate_pi_seminorm(model, gamma, family, opts)?;
    let g = estimate_gamma_seminorm(model, gamma, opts);
    report.gamma_entries = g.gamma_entries;
    report.gamma_norm = g.gamma_norm;
    Ok(report)
}

fn check_same_structure(a: &dyn Model, b: &dyn Model) -> Result<(), ModelError> {
    let la = a.structure().levels();
    let lb = b.structure().levels();
    if a.structure().len() != b.structure().len()
        || la.len() != lb.len()
        || la
            .iter()
            .zip(&lb)
            .any(|(x, y)| (x - y).abs() > 1e-12)
        || a.grid() != b.grid()
    {
        return Err(ModelError::StructureMismatch);
    }
    Ok(())
}

/// Largest admissible ε for the weakened seminorms: the distance between the
/// non-integer and the integer homogeneities below γ.
pub fn admissible_epsilon_bound(model: &dyn Model, gamma: f64) -> f64 {
    let levels = model.structure().levels();
    let mut bound = f64::INFINITY;
    for &zeta in levels.iter().filter(|&&l| l < gamma - 1e-12) {
        if (zeta - zeta.round()).abs() < 1e-9 {
            continue;
        }
        let mut n = 0.0;
        while n < gamma {
            bound = bound.min((zeta - n).abs());
            n += 1.0;
        }
    }
    bound
}

/// Estimate of the ε-weakened distance ‖Z_A − Z_B‖_{γ,ε}: differenced
/// pairings with exponent ζ−ε on non-integer levels, ζ on integer levels,
/// plus the analogous differenced Γ part.
pub fn weakened_seminorm(
    a: &dyn Model,
    b: &dyn Model,
    gamma: f64,
    eps: f64,
    family: &TestFamily,
    opts: &SeminormOptions,
) -> Result<f64, ModelError> {
    check_same_structure(a, b)?;
    if eps > 0.0 {
        let bound = admissible_epsilon_bound(a, gamma);
        if eps >= bound {
            return Err(ModelError::EpsilonTooLarge { eps, bound });
        }
    }
    let pi_entries = sweep_pi(
        &|x, tau, y| a.pi(x, tau, y) - b.pi(x, tau, y),
        a,
        gamma,
        eps,
        family,
        opts,
    )?;
    let gamma_entries = sweep_gamma(
        &|x, y, row, tau| a.gamma_map(x, y).get(row, tau) - b.gamma_map(x, y).get(row, tau),
        a,
        gamma,
        eps,
        opts,
    );
    let pi_part = pi_entries.iter().map(|e| e.worst).fold(0.0, f64::max);
    let gamma_part = gamma_entries.iter().map(|e| e.worst).fold(0.0, f64::max);
    Ok(pi_part + gamma_part)
}

/// The metric d(Z, Z̄) = Σ_n 2^{-n} ‖Z-Z̄‖_n / (1 + ‖Z-Z̄‖_n), with the tail
/// summed in closed form once the levels below n exhaust A.
pub fn model_distance(
    a: &dyn Model,
    b: &dyn Model,
    family: &TestFamily,
    opts: &SeminormOptions,
) -> Result<f64, ModelError> {
    check_same_structure(a, b)?;
    let max_level = a
        .structure()
        .levels()
        .last()
        .copied()
        .unwrap_or(0.0);
    let n_star = max_level.floor() as i32 + 1;
    let mut total = 0.0;
    let mut last_term = 0.0;
    for n in 0..=n_star {
        let norm = weakened_seminorm(a, b, n as f64, 0.0, family, opts)?;
        last_term = norm / (1.0 + norm);
        total += 0.5f64.powi(n) * last_term;
    }
    // constant tail: Σ_{n > n*} 2^{-n} c/(1+c) = 2^{-n*} c/(1+c)
    total += 0.5f64.powi(n_star) * last_term;
    Ok(total)
}
