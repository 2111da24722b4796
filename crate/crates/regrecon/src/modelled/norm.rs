use serde::Serialize;

use super::ModelledDistribution;
use crate::models::{Model, ModelError};

/// Options for the D^γ_{p,q} norm computation. `x_stride` subsamples the
/// base points (1 visits every grid point), `max_offsets_per_shell` caps the
/// translation offsets per dyadic shell (0 keeps them all).
#[derive(Clone, Debug)]
pub struct DGammaOptions {
    pub x_stride: usize,
    pub max_offsets_per_shell: usize,
}

impl Default for DGammaOptions {
    fn default() -> Self {
        DGammaOptions {
            x_stride: 1,
            max_offsets_per_shell: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelNorm {
    pub level: f64,
    pub lp_part: f64,
    pub translation_part: f64,
}

/// The D^γ_{p,q} norm split per level: coefficient L^p norms plus the
/// translation seminorms over dyadic shells of the shift.
#[derive(Clone, Debug, Serialize)]
pub struct DGammaNorm {
    pub per_level: Vec<LevelNorm>,
    pub total: f64,
    /// per-shell translation values, for rate diagnostics: (level, shell n, value)
    pub shells: Vec<(f64, u32, f64)>,
}

impl DGammaNorm {
    pub fn translation_total(&self) -> f64 {
        self.per_level.iter().map(|l| l.translation_part).sum()
    }

    pub fn level(&self, level: f64) -> Option<&LevelNorm> {
        self.per_level
            .iter()
            .find(|l| (l.level - level).abs() < 1e-12)
    }
}

fn lp_reduce(values: impl Iterator<Item = f64>, p: f64, measure_weight: f64) -> f64 {
    if p.is_infinite() {
        values.fold(0.0, f64::max)
    } else {
        let sum: f64 = values.map(|v| v.powf(p)).sum();
        (sum * measure_weight).powf(1.0 / p)
    }
}

/// Shell n holds grid offsets with ‖h‖ ∈ (2^{-n-1}, 2^{-n}]; the largest
/// shells below one grid cell are empty and thus excluded automatically.
fn shell_offsets(grid_len: usize, n: u32, periodic: bool, cap: usize) -> Vec<i64> {
    let upper = (grid_len as f64 * 0.5f64.powi(n as i32)).floor() as i64;
    let lower = (grid_len as f64 * 0.5f64.powi(n as i32 + 1)).floor() as i64;
    let max_step = if periodic {
        (grid_len / 2) as i64
    } else {
        grid_len as i64 - 1
    };
    let mut steps: Vec<i64> = ((lower + 1)..=upper.min(max_step)).collect();
    if cap > 0 && steps.len() > cap {
        let stride = steps.len().div_ceil(cap);
        steps = steps.into_iter().step_by(stride).collect();
    }
    let mut out = Vec::with_capacity(steps.len() * 2);
    for s in steps {
        out.push(s);
        out.push(-s);
    }
    out
}

type IncrementFn<'a> = dyn Fn(usize, usize, f64) -> f64 + 'a;

/// Shared shell sweep: `increment(xi, yi, level)` returns
/// |f(y) - Γ_{y,x} f(x)|_ζ (or the two-model difference) for y = x + h.
fn translation_norms(
    model: &dyn Model,
    gamma: f64,
    p: f64,
    q: f64,
    opts: &DGammaOptions,
    increment: &IncrementFn,
) -> (Vec<LevelNorm>, Vec<(f64, u32, f64)>) {
    let grid = model.grid();
    let structure = model.structure();
    let levels: Vec<f64> = structure
        .levels()
        .into_iter()
        .filter(|&l| l < gamma - 1e-12)
        .collect();
    let n_max = (grid.len() as f64).log2().round() as u32;
    let spacing = grid.spacing();
    let mut shells = Vec::new();
    let mut per_level: Vec<LevelNorm> = levels
        .iter()
        .map(|&level| LevelNorm {
            level,
            lp_part: 0.0,
            translation_part: 0.0,
        })
        .collect();
    for (li, &level) in levels.iter().enumerate() {
        let mut shell_values = Vec::new();
        for n in 0..=n_max {
            let offsets = shell_offsets(grid.len(), n, grid.periodic(), opts.max_offsets_per_shell);
            if offsets.is_empty() {
                continue;
            }
            // value over the shell: sup for q=∞, else the q-integral with
            // measure dh/‖h‖
            let mut shell_sup: f64 = 0.0;
            let mut shell_int = 0.0;
            for &step in &offsets {
                let dist = (step.abs() as f64) * spacing;
                let mut xs = Vec::new();
                for xi in (0..grid.len()).step_by(opts.x_stride.max(1)) {
                    let yi = xi as i64 + step;
                    let yi = if grid.periodic() {
                        yi.rem_euclid(grid.len() as i64) as usize
                    } else if yi >= 0 && (yi as usize) < grid.len() {
                        yi as usize
                    } else {
                        continue;
                    };
                    xs.push(increment(xi, yi, level) / dist.powf(gamma - level));
                }
                if xs.is_empty() {
                    continue;
                }
                let lp = lp_reduce(xs.into_iter(), p, spacing * opts.x_stride.max(1) as f64);
                shell_sup = shell_sup.max(lp);
                if q.is_finite() {
                    shell_int += lp.powf(q) * spacing / dist;
                }
            }
            let value = if q.is_infinite() {
                shell_sup
            } else {
                shell_int.powf(1.0 / q)
            };
            shell_values.push(value);
            shells.push((level, n, value));
        }
        per_level[li].translation_part = if q.is_infinite() {
            shell_values.iter().copied().fold(0.0, f64::max)
        } else {
            shell_values
                .iter()
                .map(|v| v.powf(q))
                .sum::<f64>()
                .powf(1.0 / q)
        };
    }
    (per_level, shells)
}

/// The D^γ_{p,q} norm of a modelled distribution with respect to a model.
pub fn dgamma_norm(
    f: &ModelledDistribution,
    model: &dyn Model,
    gamma: f64,
    p: f64,
    q: f64,
    opts: &DGammaOptions,
) -> Result<DGammaNorm, ModelError> {
    let structure = model.structure();
    let grid = model.grid();
    if structure.levels().iter().all(|&l| l >= gamma - 1e-12) {
        return Err(ModelError::UnderResolved(format!(
            "gamma {gamma} leaves no levels below it"
        )));
    }
    let increment = |xi: usize, yi: usize, level: f64| {
        let x = grid.point(xi);
        let y = grid.point(yi);
        let g = model.gamma_map(y, x);
        let transported = g.apply(f.at(xi));
        structure
            .indices_at_level(level)
            .into_iter()
            .map(|i| (f.at(yi)[i] - transported[i]).abs())
            .fold(0.0, f64::max)
    };
    let (mut per_level, shells) = translation_norms(model, gamma, p, q, opts, &increment);
    for entry in &mut per_level {
        let values = (0..grid.len())
            .step_by(opts.x_stride.max(1))
            .map(|i| f.level_magnitude(structure, i, entry.level));
        entry.lp_part = lp_reduce(values, p, grid.spacing() * opts.x_stride.max(1) as f64);
    }
    let total = per_level
        .iter()
        .map(|l| l.lp_part + l.translation_part)
        .sum();
    Ok(DGammaNorm {
        per_level,
        total,
        shells,
    })
}

/// The two-model distance ‖f, f̄‖: coefficient differences in L^p plus the
/// differenced translation increments; collapses to ‖f − f̄‖ when the models
/// coincide.
pub fn dgamma_distance(
    f: &ModelledDistribution,
    f_bar: &ModelledDistribution,
    model: &dyn Model,
    model_bar: &dyn Model,
    gamma: f64,
    p: f64,
    q: f64,
    opts: &DGammaOptions,
) -> Result<f64, ModelError> {
    let structure = model.structure();
    if structure.len() != model_bar.structure().len() || model.grid() != model_bar.grid() {
        return Err(ModelError::StructureMismatch);
    }
    let grid = model.grid();
    let increment = |xi: usize, yi: usize, level: f64| {
        let x = grid.point(xi);
        let y = grid.point(yi);
        let ga = model.gamma_map(y, x).apply(f.at(xi));
        let gb = model_bar.gamma_map(y, x).apply(f_bar.at(xi));
        structure
            .indices_at_level(level)
            .into_iter()
            .map(|i| ((f.at(yi)[i] - ga[i]) - (f_bar.at(yi)[i] - gb[i])).abs())
            .fold(0.0, f64::max)
    };
    let (per_level, _) = translation_norms(model, gamma, p, q, opts, &increment);
    let mut total = 0.0;
    for entry in &per_level {
        let values = (0..grid.len()).step_by(opts.x_stride.max(1)).map(|i| {
            structure
                .indices_at_level(entry.level)
                .into_iter()
                .map(|t| (f.at(i)[t] - f_bar.at(i)[t]).abs())
                .fold(0.0, f64::max)
        });
        let lp = lp_reduce(values, p, grid.spacing() * opts.x_stride.max(1) as f64);
        total += lp + entry.translation_part;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{HolderModel, PolynomialModel};
    use crate::modelled::canonical_lift;
    use crate::structures::{RegStructure, Scaling, WorkingGrid};
    use crate::structures::Poly1;
    use crate::weierstrass::Weierstrass;

    const INF: f64 = f64::INFINITY;

    fn holder_model(log2: u32) -> HolderModel {
        let st = RegStructure::two_level(0.6, 0.9, 1);
        let grid = WorkingGrid::torus(1 << log2);
        let w = Weierstrass::new(0.6, 8, 1);
        HolderModel::new(st, grid, |_| 1.0, move |t| w.eval(t)).unwrap()
    }

    #[test]
    fn zero_field_has_zero_norm() {
        let model = holder_model(8);
        let f = ModelledDistribution::zero(model.grid(), model.structure(), 0.9);
        let n = dgamma_norm(&f, &model, 0.9, INF, INF, &DGammaOptions::default()).unwrap();
        assert_eq!(n.total, 0.0);
    }

    #[test]
    fn constant_lift_has_no_translation_part() {
        let st = RegStructure::polynomial(Scaling::isotropic(1), 2.0, 3);
        let model = PolynomialModel::new(st, WorkingGrid::interval(1 << 8)).unwrap();
        let f = canonical_lift(&Poly1::new(vec![1.0]), &model, 2.0).unwrap();
        let n = dgamma_norm(&f, &model, 2.0, INF, INF, &DGammaOptions::default()).unwrap();
        let level0 = n.level(0.0).unwrap();
        assert_eq!(level0.lp_part, 1.0);
        assert_eq!(n.translation_total(), 0.0);
    }

    #[test]
    fn missing_taylor_coefficient_costs_the_shell_supremum() {
        // f(x) = x·1 without the X coefficient on the polynomial model; the
        // translation increment at level 0 is |h|, the seminorm is
        // sup |h| / |h|^γ over the shells (for γ < 1 the coarsest shell
        // wins), and it must agree with the brute-force double loop.
        let st = RegStructure::polynomial(Scaling::isotropic(1), 1.0, 3);
        let grid = WorkingGrid::interval(1 << 8);
        let model = PolynomialModel::new(st.clone(), grid.clone()).unwrap();
        let unit = st.unit_index().unwrap();
        let gamma = 0.7;
        let f = ModelledDistribution::from_fn(&grid, &st, gamma, |x| {
            let mut v = vec![0.0; st.len()];
            v[unit] = x;
            v
        });
        let n = dgamma_norm(&f, &model, gamma, INF, INF, &DGammaOptions::default()).unwrap();
        let mut brute: f64 = 0.0;
        for xi in 0..grid.len() {
            for yi in 0..grid.len() {
                if xi != yi {
                    let dist = (grid.point(yi) - grid.point(xi)).abs();
                    brute = brute.max(dist / dist.powf(gamma));
                }
            }
        }
        assert!((brute - (1.0 - grid.spacing()).powf(1.0 - gamma)).abs() < 1e-12);
        let level0 = n.level(0.0).unwrap();
        assert!(
            (level0.translation_part - brute).abs() < 1e-10,
            "{} vs {brute}",
            level0.translation_part
        );
    }

    #[test]
    fn sup_norm_matches_brute_force_double_loop() {
        let model = holder_model(8);
        let grid = model.grid().clone();
        let st = model.structure().clone();
        let w2 = Weierstrass::new(0.8, 6, 5);
        let f = ModelledDistribution::from_fn(&grid, &st, 0.9, |x| {
            vec![w2.eval(x), 0.4 * (x * 12.0).cos()]
        });
        let gamma = 0.9;
        let n = dgamma_norm(&f, &model, gamma, INF, INF, &DGammaOptions::default()).unwrap();
        // brute force over every ordered grid pair with 0 < ‖h‖ ≤ 1
        let mut brute = vec![0.0f64; st.levels().len()];
        for xi in 0..grid.len() {
            for yi in 0..grid.len() {
                if xi == yi {
                    continue;
                }
                let dist = grid.distance(grid.point(xi), grid.point(yi));
                let g = model.gamma_map(grid.point(yi), grid.point(xi));
                let t = g.apply(f.at(xi));
                for (li, &level) in st.levels().iter().enumerate() {
                    if level >= gamma {
                        continue;
                    }
                    for idx in st.indices_at_level(level) {
                        let v = (f.at(yi)[idx] - t[idx]).abs() / dist.powf(gamma - level);
                        brute[li] = brute[li].max(v);
                    }
                }
            }
        }
        for (li, &level) in st.levels().iter().enumerate() {
            if level >= gamma {
                continue;
            }
            let computed = n.level(level).unwrap().translation_part;
            assert!(
                (computed - brute[li]).abs() <= 1e-10 * brute[li].max(1.0),
                "level {level}: {computed} vs {}",
                brute[li]
            );
        }
    }

    #[test]
    fn triangle_inequality_on_random_pairs() {
        use rand::Rng;
        use rand::SeedableRng;
        let model = holder_model(7);
        let grid = model.grid().clone();
        let st = model.structure().clone();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..3 {
            let seeds: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let f = ModelledDistribution::from_fn(&grid, &st, 0.9, |x| {
                vec![
                    seeds[0] * (x * 9.0).sin(),
                    seeds[1] * (x * 5.0).cos(),
                ]
            });
            let g = ModelledDistribution::from_fn(&grid, &st, 0.9, |x| {
                vec![
                    seeds[2] * (x * 7.0).cos(),
                    seeds[3] * (x * 3.0).sin(),
                ]
            });
            let opts = DGammaOptions::default();
            let nf = dgamma_norm(&f, &model, 0.9, INF, INF, &opts).unwrap().total;
            let ng = dgamma_norm(&g, &model, 0.9, INF, INF, &opts).unwrap().total;
            let nfg = dgamma_norm(&f.add(&g), &model, 0.9, INF, INF, &opts)
                .unwrap()
                .total;
            assert!(nfg <= nf + ng + 1e-12);
        }
    }

    #[test]
    fn distance_collapses_on_equal_models() {
        let model = holder_model(7);
        let grid = model.grid().clone();
        let st = model.structure().clone();
        let f = ModelledDistribution::from_fn(&grid, &st, 0.9, |x| vec![(x * 4.0).sin(), 0.0]);
        let g = ModelledDistribution::from_fn(&grid, &st, 0.9, |x| vec![0.0, (x * 3.0).cos()]);
        let opts = DGammaOptions::default();
        let d = dgamma_distance(&f, &g, &model, &model, 0.9, INF, INF, &opts).unwrap();
        assert!(d > 0.0);
        let same = dgamma_distance(&f, &f, &model, &model, 0.9, INF, INF, &opts).unwrap();
        assert_eq!(same, 0.0);
        let diff_norm = dgamma_norm(&f.sub(&g), &model, 0.9, INF, INF, &opts)
            .unwrap()
            .total;
        assert!((d - diff_norm).abs() < 1e-12);
    }

    #[test]
    fn rejects_gamma_below_all_levels() {
        let model = holder_model(6);
        let f = ModelledDistribution::zero(model.grid(), model.structure(), 0.9);
        assert!(dgamma_norm(&f, &model, -0.5, INF, INF, &DGammaOptions::default()).is_err());
    }

    #[test]
    fn finite_p_q_norms_are_finite_and_ordered() {
        let model = holder_model(7);
        let grid = model.grid().clone();
        let st = model.structure().clone();
        let f = ModelledDistribution::from_fn(&grid, &st, 0.9, |x| {
            vec![(x * 4.0).sin(), (x * 2.0).cos()]
        });
        let opts = DGammaOptions::default();
        let n_inf = dgamma_norm(&f, &model, 0.9, INF, INF, &opts).unwrap();
        let n_pq = dgamma_norm(&f, &model, 0.9, 2.0, 4.0, &opts).unwrap();
        assert!(n_pq.total.is_finite() && n_pq.total > 0.0);
        // the L^p part on a probability domain is below the sup norm
        for (a, b) in n_pq.per_level.iter().zip(&n_inf.per_level) {
            assert!(a.lp_part <= b.lp_part + 1e-12);
        }
    }
}
