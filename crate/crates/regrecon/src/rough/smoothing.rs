use serde::Serialize;

use super::{
    cumulative_rough_integral, rough_integral, BranchedRoughPath, ControlledPath, RoughPathError,
};
use crate::hopf::Character;
use crate::mollify::Mollifier;

/// The smooth approximation of a rough path at width ε: every tree component
/// of the base-point character path is convolved with φ^ε and re-normalized
/// at t_0, i.e. ⟨X^ε_t, τ⟩ = (φ^ε * ⟨X_{t_0,·}, τ⟩)(t) − (φ^ε * ⟨X_{t_0,·}, τ⟩)(t_0).
/// Storing the result as a character path keeps the Chen identity exact by
/// construction; on single nodes the increments are exactly the mollified
/// increments of the underlying path.
pub fn mollify_rough_path(
    path: &BranchedRoughPath,
    mollifier: &Mollifier,
) -> Result<BranchedRoughPath, RoughPathError> {
    let grid = path.grid();
    if !grid.periodic() {
        return Err(RoughPathError::NeedsPeriodicGrid);
    }
    let kernel = mollifier
        .kernel(0, grid)
        .map_err(|_| RoughPathError::UnderResolved {
            width: mollifier.width(),
            min: 2,
        })?;
    let mut smoothed_per_tree = Vec::new();
    for tree in path.trees() {
        let raw: Vec<f64> = (0..grid.len())
            .map(|m| path.character_at(m).tree_value(tree))
            .collect();
        let conv = grid.convolve(&raw, &kernel);
        smoothed_per_tree.push(conv);
    }
    let chars: Vec<Character<f64>> = (0..grid.len())
        .map(|m| {
            let values = path
                .trees()
                .iter()
                .enumerate()
                .map(|(ti, tree)| {
                    (
                        tree.clone(),
                        smoothed_per_tree[ti][m] - smoothed_per_tree[ti][0],
                    )
                })
                .collect::<Vec<_>>();
            Character::from_tree_values(path.dim(), path.level_count(), values)
                .expect("basis trees within truncation")
        })
        .collect();
    BranchedRoughPath::from_characters(grid.clone(), chars, path.alpha())
}

/// The mollified controlled path. The default (`literal_additive = false`)
/// REPLACES the empty-forest coefficient by φ^ε * Z, the unique choice that
/// reconstructs to φ^ε * Z against the smoothed model; the literal additive
/// variant Z + 1·(φ^ε ⋆ Z) is kept behind the flag so its residual can be
/// reported.
pub fn mollify_controlled_path(
    z: &ControlledPath,
    path: &BranchedRoughPath,
    mollifier: &Mollifier,
    literal_additive: bool,
) -> Result<ControlledPath, RoughPathError> {
    let grid = path.grid();
    if !grid.periodic() {
        return Err(RoughPathError::NeedsPeriodicGrid);
    }
    let kernel = mollifier
        .kernel(0, grid)
        .map_err(|_| RoughPathError::UnderResolved {
            width: mollifier.width(),
            min: 2,
        })?;
    let raw: Vec<f64> = (0..grid.len()).map(|m| z.at(m)[0]).collect();
    let conv = grid.convolve(&raw, &kernel);
    let mut out = z.clone();
    for m in 0..grid.len() {
        out.at_mut(m)[0] = if literal_additive {
            raw[m] + conv[m]
        } else {
            conv[m]
        };
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct MollifiedIntegralRow {
    pub width: f64,
    pub smoothed_integral: f64,
    pub target: f64,
    pub error: f64,
}

/// The nonstandard approximation of the rough integral: ∫ Z^ε dX^ε at the
/// finest mesh against the width-averaged target
/// ∫ φ^ε(w) (∫_{s-w}^{t-w} Z dX) dw, per width.
pub fn mollified_integral_sweep(
    path: &BranchedRoughPath,
    z: &ControlledPath,
    component: u32,
    widths: &[f64],
    mollifier_order: u32,
    s_index: usize,
    t_index: usize,
) -> Result<Vec<MollifiedIntegralRow>, RoughPathError> {
    let grid = path.grid();
    if !grid.periodic() {
        return Err(RoughPathError::NeedsPeriodicGrid);
    }
    let cumulative = cumulative_rough_integral(path, z, component)?;
    let n = grid.len() as i64;
    let mut rows = Vec::with_capacity(widths.len());
    for &width in widths {
        let mollifier = Mollifier::standard(mollifier_order, width);
        let smooth_path = mollify_rough_path(path, &mollifier)?;
        let smooth_z = mollify_controlled_path(z, path, &mollifier, false)?;
        let span = t_index - s_index;
        let level = span.trailing_zeros();
        let smoothed = rough_integral(&smooth_path, &smooth_z, component, s_index, t_index, level)?;
        // target: average of the shifted fine-mesh integrals under φ^ε
        let kernel = mollifier
            .kernel(0, grid)
            .map_err(|_| RoughPathError::UnderResolved { width, min: 2 })?;
        let w = kernel.half_width as i64;
        let mut target = 0.0;
        for o in -w..=w {
            let weight = kernel.weights[(o + w) as usize];
            let a = (s_index as i64 - o).rem_euclid(n) as usize;
            let b = (t_index as i64 - o).rem_euclid(n) as usize;
            // cumulative differences wrap around the torus period
            let shifted = if b >= a {
                cumulative[b] - cumulative[a]
            } else {
                cumulative.last().unwrap() - cumulative[a] + cumulative[b]
            };
            target += weight * shifted;
        }
        rows.push(MollifiedIntegralRow {
            width,
            smoothed_integral: smoothed,
            target,
            error: (smoothed - target).abs(),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hopf::{Forest, Tree};
    use crate::rough::rough_path_distance;
    use crate::structures::WorkingGrid;
    use crate::weierstrass::Weierstrass;

    fn weierstrass_path(log2: u32, alpha: f64) -> (BranchedRoughPath, Vec<Vec<f64>>) {
        let grid = WorkingGrid::torus(1 << log2);
        let w = Weierstrass::new(alpha, 10, 1);
        let comps = vec![grid.sample(|t| w.eval(t))];
        (
            BranchedRoughPath::lift(grid, &comps, alpha, 1).unwrap(),
            comps,
        )
    }

    #[test]
    fn needs_a_periodic_grid() {
        let grid = WorkingGrid::interval(1 << 8);
        let comps = vec![grid.sample(|t| t)];
        let x = BranchedRoughPath::lift(grid, &comps, 0.3, 1).unwrap();
        assert!(mollify_rough_path(&x, &Mollifier::standard(2, 0.0625)).is_err());
    }

    #[test]
    fn bullet_increments_are_mollified_increments_exactly() {
        let (x, comps) = weierstrass_path(10, 0.6);
        let grid = x.grid().clone();
        let mollifier = Mollifier::standard(2, 0.03125);
        let smooth = mollify_rough_path(&x, &mollifier).unwrap();
        let kernel = mollifier.kernel(0, &grid).unwrap();
        let conv = grid.convolve(&comps[0], &kernel);
        let bullet = Forest::single(Tree::leaf(1));
        for (s, t) in [(0usize, 64usize), (100, 700), (512, 200)] {
            let expected = conv[t] - conv[s];
            let got = smooth.pair_increment(s, t, &bullet);
            assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
        }
    }

    #[test]
    fn chen_holds_for_the_smoothed_path() {
        let (x, _) = weierstrass_path(9, 0.6);
        let smooth = mollify_rough_path(&x, &Mollifier::standard(2, 0.0625)).unwrap();
        // increments of a character path are multiplicative by construction;
        // verify over sampled triples anyway
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let n = smooth.grid().len();
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let s = rng.gen_range(0..n);
            let u = rng.gen_range(0..n);
            let t = rng.gen_range(0..n);
            let left = smooth.increment(s, u);
            let right = smooth.increment(u, t);
            let whole = smooth.increment(s, t);
            let composed = left.product(&right).unwrap();
            for forest in smooth.forests() {
                worst = worst.max((composed.value(forest) - whole.value(forest)).abs());
            }
        }
        assert!(worst <= 1e-8, "{worst}");
    }

    #[test]
    fn smooth_path_smoothing_converges_linearly() {
        // trend only: X^ε → X as ε shrinks, faster for smooth X
        let grid = WorkingGrid::torus(1 << 10);
        let comps = vec![grid.sample(|t| (std::f64::consts::TAU * t).sin() * 0.2)];
        let x = BranchedRoughPath::lift(grid, &comps, 0.6, 1).unwrap();
        let mut previous = f64::INFINITY;
        for j in 3..=6 {
            let width = 0.5f64.powi(j);
            let smooth = mollify_rough_path(&x, &Mollifier::standard(2, width)).unwrap();
            let d = rough_path_distance(&x, &smooth, 0.0, 64).unwrap();
            assert!(d < previous, "width {width}: {d} vs {previous}");
            previous = d;
        }
    }

    #[test]
    fn weakened_distance_decays_at_rate_epsilon() {
        let (x, _) = weierstrass_path(11, 0.6);
        let eps_weak = 0.1;
        let mut params = Vec::new();
        let mut stats = Vec::new();
        for j in 3..=7 {
            let width = 0.5f64.powi(j);
            let smooth = mollify_rough_path(&x, &Mollifier::standard(2, width)).unwrap();
            let d = rough_path_distance(&x, &smooth, eps_weak, 96).unwrap();
            params.push(width);
            stats.push(d);
        }
        let fit = crate::report::fit_log2_log2(&params[1..], &stats[1..]).unwrap();
        assert!(fit.slope >= eps_weak - 0.05, "slope {}", fit.slope);
    }

    #[test]
    fn tree_coefficients_survive_controlled_smoothing() {
        let (x, _) = weierstrass_path(9, 0.6);
        let z = ControlledPath::tautological(&x, 1);
        let smooth = mollify_controlled_path(&z, &x, &Mollifier::standard(2, 0.0625), false)
            .unwrap();
        for m in (0..x.grid().len()).step_by(37) {
            for fi in 1..z.forests().len() {
                assert_eq!(smooth.at(m)[fi], z.at(m)[fi]);
            }
        }
    }

    #[test]
    fn replacement_variant_reconstructs_to_the_smoothed_path() {
        use crate::reconstruct::reconstruct;
        use crate::rough::rp_to_model;
        use std::rc::Rc;
        let (x, _) = weierstrass_path(9, 0.6);
        let grid = x.grid().clone();
        let z = ControlledPath::tautological(&x, 1);
        let mollifier = Mollifier::standard(2, 0.0625);
        let smooth_x = mollify_rough_path(&x, &mollifier).unwrap();
        let smooth_z = mollify_controlled_path(&z, &x, &mollifier, false).unwrap();
        let additive_z = mollify_controlled_path(&z, &x, &mollifier, true).unwrap();
        let model = rp_to_model(Rc::new(smooth_x));
        let kernel = mollifier.kernel(0, &grid).unwrap();
        let raw: Vec<f64> = (0..grid.len()).map(|m| z.at(m)[0]).collect();
        let conv = grid.convolve(&raw, &kernel);
        let f = model.controlled_to_modelled(&smooth_z);
        let rf = reconstruct(&model, &f);
        let mut worst: f64 = 0.0;
        for m in 0..grid.len() {
            worst = worst.max((rf[m] - conv[m]).abs());
        }
        assert!(worst <= 1e-8, "replacement residual {worst}");
        // the literal additive reading misses by the size of ⟨1, Z⟩
        let fa = model.controlled_to_modelled(&additive_z);
        let rfa = reconstruct(&model, &fa);
        let additive_residual = (0..grid.len())
            .map(|m| (rfa[m] - conv[m]).abs())
            .fold(0.0, f64::max);
        let sup_z = raw.iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!(
            additive_residual > 0.5 * sup_z,
            "{additive_residual} vs sup {sup_z}"
        );
    }

    #[test]
    fn integral_sweep_decays_toward_the_averaged_target() {
        // the path octaves stop well above the mesh so both sides of the
        // comparison carry the same partition-level offset
        let grid = WorkingGrid::torus(1 << 10);
        let w = Weierstrass::new(0.6, 6, 1);
        let comps = vec![grid.sample(|t| w.eval(t))];
        let x = BranchedRoughPath::lift(grid, &comps, 0.6, 1).unwrap();
        let z = ControlledPath::tautological(&x, 1);
        let widths: Vec<f64> = (3..=6).map(|j| 0.5f64.powi(j)).collect();
        let rows =
            mollified_integral_sweep(&x, &z, 1, &widths, 2, 0, 1 << 9).unwrap();
        for pair in rows.windows(2) {
            assert!(
                pair[1].error <= pair[0].error,
                "sweep not decaying: {rows:?}"
            );
        }
    }

    #[test]
    fn degenerate_interval_gives_zero_on_both_sides() {
        let (x, _) = weierstrass_path(8, 0.6);
        let z = ControlledPath::tautological(&x, 1);
        let rows = mollified_integral_sweep(&x, &z, 1, &[0.125], 2, 64, 64).unwrap();
        assert_eq!(rows[0].smoothed_integral, 0.0);
        assert!(rows[0].target.abs() < 1e-12);
    }
}
